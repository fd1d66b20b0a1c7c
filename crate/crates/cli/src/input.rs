//! JSON payload formats.
//!
//! Every input file is an object with a `schema` field (currently `1`),
//! optional configuration overrides and a command-specific payload.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Deserialize;

use locan::cyclotomic::{CycloElement, CycloField};
use locan::series::TruncSeries;
use locan::{Matrix, PadicElement, PadicField};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Integer given either as a JSON number or as a decimal string.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum IntJson {
    Small(i64),
    Text(String),
}

impl IntJson {
    pub fn to_bigint(&self) -> Result<BigInt, CliError> {
        match self {
            IntJson::Small(n) => Ok(BigInt::from(*n)),
            IntJson::Text(s) => s.trim().parse().map_err(|_| CliError::parse(format!("not an integer: {s:?}"))),
        }
    }
}

/// A p-adic number.
///
/// * an integer or a string `"a"` / `"a/b"`: exact, known to the default precision;
/// * `{"digits": [d0, d1, ..], "valuation": v, "precision": P}`: `p^v sum d_i p^i + O(p^P)`;
/// * `{"coords": [c0, c1, ..], "valuation": v, "precision": P}`: `p^v sum c_i b^i + O(p^P)`
///   in an unramified extension with generator `b`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum PadicJson {
    Int(i64),
    Text(String),
    Digits {
        digits: Vec<u64>,
        #[serde(default)]
        valuation: i64,
        precision: Option<i64>,
    },
    Coords {
        coords: Vec<IntJson>,
        #[serde(default)]
        valuation: i64,
        precision: Option<i64>,
    },
}

impl PadicJson {
    pub fn to_element(&self, field: &PadicField) -> Result<PadicElement, CliError> {
        match self {
            PadicJson::Int(n) => Ok(field.from_i64(*n)),
            PadicJson::Text(s) => parse_rational(s, field),
            PadicJson::Digits { digits, valuation, precision } => {
                if field.degree() != 1 {
                    return Err(CliError::parse("digit form is only available over Q_p; use coords"));
                }
                let prec = precision.unwrap_or(valuation + field.cap());
                Ok(field.from_digits(digits, *valuation, prec)?)
            }
            PadicJson::Coords { coords, valuation, precision } => {
                let prec = precision.unwrap_or(valuation + field.cap());
                let c = coords.iter().map(IntJson::to_bigint).collect::<Result<Vec<_>, _>>()?;
                Ok(field.from_coeffs(&c, prec - valuation)?.shift(*valuation))
            }
        }
    }
}

fn parse_rational(s: &str, field: &PadicField) -> Result<PadicElement, CliError> {
    let bad = || CliError::parse(format!("not a rational number: {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => {
            (a.trim().parse::<BigInt>().map_err(|_| bad())?, b.trim().parse::<BigInt>().map_err(|_| bad())?)
        }
        None => (s.trim().parse::<BigInt>().map_err(|_| bad())?, BigInt::from(1)),
    };
    if den.is_zero() {
        return Err(bad());
    }
    Ok(field.from_bigint(&num).checked_div(&field.from_bigint(&den))?)
}

/// An element of `Q_p(zeta_{p^m})`: a base-field number or `{"zeta": [[e, c], ..]}`
/// for `sum c zeta^e`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum CycloJson {
    Base(PadicJson),
    Zeta { zeta: Vec<(u64, PadicJson)> },
}

impl CycloJson {
    pub fn to_element(&self, field: &CycloField) -> Result<CycloElement, CliError> {
        match self {
            CycloJson::Base(a) => Ok(field.scalar(&a.to_element(field.base())?)),
            CycloJson::Zeta { zeta } => {
                let mut acc = field.zero();
                for (e, c) in zeta {
                    let c = c.to_element(field.base())?;
                    acc = acc.add(&field.zeta_pow(*e).scale(&c));
                }
                Ok(acc)
            }
        }
    }
}

/// Sparse series `[[exponent, coefficient], ..]`.
pub type SeriesJson = Vec<(usize, PadicJson)>;

pub fn series(terms: &SeriesJson, trunc: usize, field: &PadicField) -> Result<TruncSeries<PadicElement>, CliError> {
    let mut coeffs = vec![field.zero(); trunc + 1];
    for (k, c) in terms {
        if *k > trunc {
            continue;
        }
        coeffs[*k] = coeffs[*k].add_ref(&c.to_element(field)?);
    }
    Ok(TruncSeries::new(coeffs, trunc, &field.zero()))
}

pub fn matrix(rows: &[Vec<PadicJson>], field: &PadicField) -> Result<Matrix<PadicElement>, CliError> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|a| a.to_element(field)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::from_rows(rows)?)
}

pub fn cyclo_matrix(rows: &[Vec<CycloJson>], field: &CycloField) -> Result<Matrix<CycloElement>, CliError> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|a| a.to_element(field)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::from_rows(rows)?)
}

/// Configuration values an input file may carry; command-line flags win.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub prime: Option<u64>,
    pub residue_degree: Option<usize>,
    pub modulus: Option<Vec<i64>>,
    pub precision: Option<i64>,
    pub trunc_t: Option<usize>,
    pub trunc_x: Option<usize>,
    pub trunc_u: Option<usize>,
    pub level: Option<u32>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope<P> {
    pub schema: u32,
    #[serde(default)]
    pub config: FileConfig,
    pub payload: P,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilteredPayload {
    pub phi: Vec<Vec<PadicJson>>,
    pub weights: Vec<i64>,
    pub adapted: Option<Vec<Vec<PadicJson>>>,
    pub window: Option<(i64, i64)>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiPayload {
    pub pi: Option<PadicJson>,
    pub phi: Vec<Vec<SeriesJson>>,
    pub nabla: Option<Vec<Vec<SeriesJson>>>,
    pub threshold: Option<i64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BdRPayload {
    /// `[[i, a_i], ..]` for `sum a_i t^i`.
    pub element: Vec<(usize, CycloJson)>,
    pub field_level: Option<u32>,
    pub slack: Option<i64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantsPayload {
    pub field_level: Option<u32>,
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SenPayload {
    pub c: PadicJson,
    pub field_level: Option<u32>,
    pub matrix: Option<Vec<Vec<CycloJson>>>,
    /// Build the action matrix as `exp(log(c) theta)` instead.
    pub theta: Option<Vec<Vec<CycloJson>>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonPayload {
    pub series: SeriesJson,
    pub trunc: Option<usize>,
}

pub fn parse_envelope<P: serde::de::DeserializeOwned>(text: &str) -> Result<Envelope<P>, CliError> {
    let env: Envelope<P> = serde_json::from_str(text).map_err(|e| CliError::parse(format!("malformed input: {e}")))?;
    if env.schema != SCHEMA_VERSION {
        return Err(CliError::parse(format!("unsupported schema version {} (expected {SCHEMA_VERSION})", env.schema)));
    }
    Ok(env)
}
