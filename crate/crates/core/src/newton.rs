//! Newton polygons of truncated series and the unit criterion for entire series.

use std::fmt;

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::padic::PadicElement;
use crate::series::TruncSeries;

/// Vertices of the lower convex hull of points sorted by abscissa.
pub fn lower_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in points {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // drop the middle point if it lies on or above the chord
            if (y2 - y1) * (pt.0 - x1) >= (pt.1 - y1) * (x2 - x1) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    hull
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    /// `Δv / Δk`; the corresponding zeros have valuation `-slope`.
    pub slope: Rational64,
    pub length: usize,
}

/// Newton polygon of `sum a_k x^k` over the exponents present at truncation.
///
/// Zeros at the origin (the x-adic order) are recorded separately as
/// `origin_multiplicity`; they correspond to roots of infinite valuation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    pub segments: Vec<Segment>,
    pub origin_multiplicity: usize,
    pub vertices: Vec<(i64, i64)>,
}

impl NewtonPolygon {
    pub fn slopes(&self) -> Vec<Rational64> {
        self.segments.iter().map(|s| s.slope).collect()
    }

    /// Number of zeros (with multiplicity) of valuation at least `r`, counting the origin.
    pub fn zeros_with_valuation_at_least(&self, r: Rational64) -> usize {
        self.origin_multiplicity + self.segments.iter().filter(|s| -s.slope >= r).map(|s| s.length).sum::<usize>()
    }

    /// No zeros anywhere in the considered range.
    pub fn has_no_zeros(&self) -> bool {
        self.segments.is_empty() && self.origin_multiplicity == 0
    }
}

impl fmt::Display for NewtonPolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let segs: Vec<String> = self.segments.iter().map(|s| format!("({}, {})", s.slope, s.length)).collect();
        write!(f, "slopes [{}]", segs.join(", "))?;
        if self.origin_multiplicity > 0 {
            write!(f, ", {} zero(s) at the origin", self.origin_multiplicity)?;
        }
        Ok(())
    }
}

pub fn newton_polygon(f: &TruncSeries<PadicElement>) -> Result<NewtonPolygon> {
    let points: Vec<(i64, i64)> =
        f.coeffs().iter().enumerate().filter_map(|(k, c)| c.val().map(|v| (k as i64, v))).collect();
    if points.is_empty() {
        return Err(Error::InvalidInput("Newton polygon of a series that is zero at precision".into()));
    }
    let vertices = lower_hull(&points);
    let segments = vertices
        .windows(2)
        .map(|w| Segment {
            slope: Rational64::new(w[1].1 - w[0].1, w[1].0 - w[0].0),
            length: (w[1].0 - w[0].0) as usize,
        })
        .collect();
    Ok(NewtonPolygon { segments, origin_multiplicity: points[0].0 as usize, vertices })
}

/// True iff `f` is a nonzero constant at precision and truncation; these are
/// the only units of the ring of entire series.
pub fn is_global_unit(f: &TruncSeries<PadicElement>) -> bool {
    match f.order() {
        Some(0) => f.coeffs()[1..].iter().all(|c| c.is_zero()),
        _ => false,
    }
}
