use serde_json::{json, Value};

use locan::anticyclo::anticyclo_kernel;
use locan::bdr::BdRElement;
use locan::cyclotomic::CycloField;
use locan::newton::{is_global_unit, newton_polygon};
use locan::phi::{normal_form, MatSeries, PhiModuleX};
use locan::refine::{dtri_lattice, enumerate_refinements, sen_polynomial, FilteredPhiModule};
use locan::sen::{action_matrix, sen_operator};
use locan::uadj::{
    admissible_samples, bdr_uadj_invariants, gamma_n_analytic_test, is_invariant, project0, section, UAdjElement,
};
use locan::{Matrix, PadicElement, PadicField};

use crate::config::JobConfig;
use crate::error::CliError;
use crate::input::{self, BdRPayload, FilteredPayload, InvariantsPayload, NewtonPayload, PhiPayload, SenPayload};
use crate::report::{self, PrecisionLog, Report};

type Out = Result<Report, CliError>;

fn filtered_module(pl: &FilteredPayload, field: &PadicField) -> Result<FilteredPhiModule, CliError> {
    let phi = input::matrix(&pl.phi, field)?;
    Ok(match &pl.adapted {
        Some(rows) => {
            let adapted = rows
                .iter()
                .map(|r| r.iter().map(|a| a.to_element(field)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            FilteredPhiModule::new(phi, pl.weights.clone(), adapted)?
        }
        None => FilteredPhiModule::with_standard_basis(phi, pl.weights.clone())?,
    })
}

pub fn refine(cfg: &JobConfig, pl: &FilteredPayload) -> Out {
    let field = cfg.field()?;
    let d = filtered_module(pl, &field)?;
    let refs = enumerate_refinements(&d)?;
    let mut rep = Report::new("refine", cfg.precision);
    let det = d.phi().det()?;
    let total: i64 = d.weights().iter().sum();
    let expected = det.checked_div(&field.p_power(total))?;
    rep.line(format!("dimension: {}", d.dim()));
    rep.line(format!("Hodge-Tate weights: {:?}", d.weights()));
    rep.line(format!("refinements: {}", refs.len()));
    let mut items = Vec::new();
    let mut sen_polys = Vec::new();
    for (i, r) in refs.iter().enumerate() {
        let prod = r.params.iter().fold(field.one(), |acc, x| acc.mul_ref(x));
        let ok = prod.eq_at_precision(&expected);
        let sp = sen_polynomial(&r.weights, &field.one());
        rep.line(format!(
            "#{}: phi-ordering {} weights {:?} parameters {} product-check {}",
            i + 1,
            report::show_vec(&r.phis),
            r.weights,
            report::show_vec(&r.params),
            if ok { "ok" } else { "FAILED" }
        ));
        items.push(json!({
            "ordering": report::padic_vec(&r.phis, &mut rep.precision),
            "weights": r.weights,
            "parameters": report::padic_vec(&r.params, &mut rep.precision),
            "product_check": ok,
        }));
        sen_polys.push(sp);
    }
    let sp = sen_polys.first().cloned().unwrap_or_default();
    let same = sen_polys.iter().all(|q| q.len() == sp.len() && q.iter().zip(&sp).all(|(a, b)| a.eq_at_precision(b)));
    rep.line(format!("Sen polynomial (lowest degree first): {}", report::show_vec(&sp)));
    rep.line(format!("Sen polynomial identical across refinements: {same}"));
    rep.data.insert("dimension".into(), json!(d.dim()));
    rep.data.insert("weights".into(), json!(d.weights()));
    rep.data.insert("refinements".into(), Value::Array(items));
    rep.data.insert("sen_polynomial".into(), report::padic_vec(&sp, &mut rep.precision));
    rep.data.insert("sen_polynomial_identical".into(), json!(same));
    Ok(rep)
}

fn mat_series(rows: &[Vec<input::SeriesJson>], n: usize, field: &PadicField) -> Result<MatSeries, CliError> {
    let entries = rows
        .iter()
        .map(|r| r.iter().map(|s| input::series(s, n, field)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MatSeries::from_matrix(&Matrix::from_rows(entries)?)?)
}

fn mat_series_json(m: &MatSeries, log: &mut PrecisionLog) -> Value {
    report::matrix(&m.to_matrix(), log, |s, l| report::series(s, l, report::padic))
}

pub fn normal_form_cmd(cfg: &JobConfig, pl: &PhiPayload) -> Out {
    let field = cfg.field()?;
    let pi = match &pl.pi {
        Some(p) => p.to_element(&field)?,
        None => field.p_power(1),
    };
    let phi = mat_series(&pl.phi, cfg.n_x, &field)?;
    let nabla = pl.nabla.as_ref().map(|n| mat_series(n, cfg.n_x, &field)).transpose()?;
    let m = PhiModuleX::new(pi.clone(), phi, nabla)?;
    let nf = normal_form(&m, pl.threshold)?;
    let mut rep = Report::new("normal-form", cfg.precision);
    rep.line(format!("rank {} over E<<x>> / x^{}, pi = {}", m.rank(), cfg.n_x + 1, pi));
    rep.line(format!("eigenvalues: {}", report::show_vec(&nf.eigenvalues)));
    rep.line(format!("B = {}", nf.b));
    rep.line(format!("A = {}", nf.a));
    let nonzero: Vec<&(usize, Matrix<PadicElement>)> = nf.nilpotent.iter().filter(|(_, n)| !n.is_zero()).collect();
    if nonzero.is_empty() {
        rep.line("N = 0");
    }
    for (i, n) in &nonzero {
        rep.line(format!("N_{i} = {n}"));
    }
    for r in &nf.resonances {
        rep.line(format!("resonance at degree {}: entry ({}, {}) = {}", r.degree, r.row, r.col, r.value));
    }
    rep.line(format!("verification residual zero: {}", nf.residual.is_zero()));
    if !nf.residual.is_zero() {
        return Err(CliError::math("normal form residual is nonzero"));
    }
    let log = &mut rep.precision;
    let b = mat_series_json(&nf.b, log);
    let a = report::matrix(&nf.a, log, report::padic);
    let nil: Vec<Value> = nonzero.iter().map(|(i, n)| json!([i, report::matrix(n, log, report::padic)])).collect();
    let res: Vec<Value> = nf
        .resonances
        .iter()
        .map(|r| json!({"degree": r.degree, "row": r.row, "col": r.col, "value": report::padic(&r.value, log)}))
        .collect();
    let eig = report::padic_vec(&nf.eigenvalues, log);
    rep.data.insert("eigenvalues".into(), eig);
    rep.data.insert("b".into(), b);
    rep.data.insert("a".into(), a);
    rep.data.insert("nilpotent".into(), Value::Array(nil));
    rep.data.insert("resonances".into(), Value::Array(res));
    rep.data.insert("residual_zero".into(), json!(true));
    Ok(rep)
}

fn bdr_json(x: &BdRElement, log: &mut PrecisionLog) -> Value {
    report::series(x.series(), log, report::cyclo)
}

fn cyclo_field(cfg: &JobConfig, base: &PadicField, level: Option<u32>) -> Result<CycloField, CliError> {
    Ok(CycloField::new(base, level.unwrap_or(cfg.level).max(cfg.level))?)
}

fn bdr_input(cfg: &JobConfig, pl: &BdRPayload) -> Result<(CycloField, BdRElement), CliError> {
    let base = cfg.field()?;
    let k = cyclo_field(cfg, &base, pl.field_level)?;
    let mut coeffs = vec![k.zero(); cfg.n_t];
    for (i, a) in &pl.element {
        if *i < cfg.n_t {
            coeffs[*i] = coeffs[*i].add(&a.to_element(&k)?);
        }
    }
    Ok((k.clone(), BdRElement::new(coeffs, cfg.n_t, &k)?))
}

fn uadj_json(z: &UAdjElement<BdRElement>, log: &mut PrecisionLog) -> Value {
    report::series(z.series(), log, bdr_json)
}

pub fn uadj_section(cfg: &JobConfig, pl: &BdRPayload) -> Out {
    let (k, z0) = bdr_input(cfg, pl)?;
    let z = section(&z0, cfg.level, cfg.m_u)?;
    let back = project0(&z);
    let mut rep = Report::new("uadj section", cfg.precision);
    rep.line(format!("coefficient ring: K_{}[[t]] / t^{}, level n = {}", k.level(), cfg.n_t, cfg.level));
    rep.line(format!("z0 = {z0}"));
    for (j, a) in z.coeffs().iter().enumerate() {
        rep.line(format!("u^{j}: {a}"));
    }
    rep.line(format!("+ O(u^{})", cfg.m_u + 1));
    let ok = back.eq_at_precision(&z0);
    rep.line(format!("projection recovers z0: {ok}"));
    let log = &mut rep.precision;
    let sec = uadj_json(&z, log);
    rep.data.insert("input".into(), bdr_json(&z0, &mut rep.precision));
    rep.data.insert("section".into(), sec);
    rep.data.insert("round_trip".into(), json!(ok));
    Ok(rep)
}

pub fn uadj_invariants(cfg: &JobConfig, pl: &InvariantsPayload) -> Out {
    let base = cfg.field()?;
    let k = cyclo_field(cfg, &base, pl.field_level)?;
    let basis = bdr_uadj_invariants(&k, cfg.level, cfg.n_t, cfg.m_u)?;
    let samples = admissible_samples(&base, cfg.level, pl.samples.unwrap_or(3));
    let mut rep = Report::new("uadj invariants", cfg.precision);
    rep.line(format!(
        "x = t*exp(-u) in K_{}[[t]]/t^{} {{{{u}}}}_{} / u^{}",
        k.level(),
        cfg.n_t,
        cfg.level,
        cfg.m_u + 1
    ));
    rep.line(format!("basis: {{x^k : 0 <= k < {}}}, dimension {}", cfg.n_t, basis.len()));
    let mut checks = Vec::new();
    for (i, z) in basis.iter().enumerate() {
        let ok = is_invariant(z, &samples)?;
        rep.line(format!("x^{i} = {z}  [invariant under {} samples: {ok}]", samples.len()));
        checks.push(ok);
    }
    rep.data.insert("dimension".into(), json!(basis.len()));
    rep.data.insert("samples".into(), report::padic_vec(&samples, &mut rep.precision));
    let elems: Vec<Value> = basis.iter().map(|z| uadj_json(z, &mut rep.precision)).collect();
    rep.data.insert("basis".into(), Value::Array(elems));
    rep.data.insert("invariant".into(), json!(checks));
    Ok(rep)
}

pub fn uadj_analytic(cfg: &JobConfig, pl: &BdRPayload) -> Out {
    let (_, z0) = bdr_input(cfg, pl)?;
    let r = gamma_n_analytic_test(&z0, cfg.level, cfg.m_u, pl.slack)?;
    let mut rep = Report::new("uadj analytic-test", cfg.precision);
    rep.line(format!("z0 = {z0}"));
    rep.line(format!("level n = {}, terms M = {}, slack = {}", cfg.level, cfg.m_u, r.slack));
    rep.line(format!("smallest level of the coefficients: {}", r.min_level));
    let table: Vec<String> = r.table.iter().map(|v| v.to_string()).collect();
    rep.line(format!("v(nabla^i z0 / i!): [{}]", table.join(", ")));
    rep.line(format!("analytic: {}", if r.analytic { "pass" } else { "fail" }));
    rep.data.insert("analytic".into(), json!(r.analytic));
    rep.data.insert("table".into(), json!(table));
    rep.data.insert("slack".into(), json!(r.slack));
    rep.data.insert("min_level".into(), json!(r.min_level));
    Ok(rep)
}

pub fn sen(cfg: &JobConfig, pl: &SenPayload) -> Out {
    let base = cfg.field()?;
    let k = CycloField::new(&base, pl.field_level.unwrap_or(0))?;
    let c = pl.c.to_element(&base)?;
    let m = match (&pl.matrix, &pl.theta) {
        (Some(m), None) => input::cyclo_matrix(m, &k)?,
        (None, Some(t)) => action_matrix(&input::cyclo_matrix(t, &k)?, &c, cfg.precision)?,
        _ => return Err(CliError::parse("give exactly one of payload.matrix and payload.theta")),
    };
    let s = sen_operator(&m, &c)?;
    let mut rep = Report::new("sen", cfg.precision);
    rep.line(format!("c = {c}, log series terms K = {}", s.series_length));
    rep.line(format!("Theta = {}", s.theta));
    rep.line(format!(
        "characteristic polynomial (lowest degree first): ({})",
        s.charpoly.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")
    ));
    let mut weights_json = Value::Null;
    let mut missing_json = json!([]);
    match s.weights() {
        Ok((w, missing)) => {
            let shown: Vec<String> = w.iter().map(|(r, mult)| format!("{r} (x{mult})")).collect();
            rep.line(format!("weights: {{{}}}", shown.join(", ")));
            if !missing.is_empty() {
                rep.line(format!("roots outside Q_p: {}", missing.join("; ")));
            }
            weights_json = Value::Array(
                w.iter()
                    .map(|(r, mult)| json!({"value": report::padic(r, &mut rep.precision), "multiplicity": mult}))
                    .collect(),
            );
            missing_json = json!(missing);
        }
        Err(e) => rep.line(format!("weights: {e}")),
    }
    rep.precision.note(format!("Theta is reported modulo p^{}", s.precision));
    rep.data.insert("theta".into(), report::matrix(&s.theta, &mut rep.precision, report::cyclo));
    let cp: Vec<Value> = s.charpoly.iter().map(|a| report::cyclo(a, &mut rep.precision)).collect();
    rep.data.insert("charpoly".into(), Value::Array(cp));
    rep.data.insert("weights".into(), weights_json);
    rep.data.insert("missing_roots".into(), missing_json);
    rep.data.insert("series_length".into(), json!(s.series_length));
    Ok(rep)
}

pub fn newton(cfg: &JobConfig, pl: &NewtonPayload) -> Out {
    let field = cfg.field()?;
    let n = pl.trunc.unwrap_or(cfg.n_x);
    let f = input::series(&pl.series, n, &field)?;
    let np = newton_polygon(&f)?;
    let unit = is_global_unit(&f);
    let mut rep = Report::new("newton", cfg.precision);
    rep.line(format!("f = {f}"));
    rep.line(format!("Newton polygon: {np}"));
    rep.line(format!("vertices: {:?}", np.vertices));
    rep.line(format!("unit of E<<x>>: {unit}"));
    let segs: Vec<Value> =
        np.segments.iter().map(|s| json!({"slope": s.slope.to_string(), "length": s.length})).collect();
    rep.data.insert("segments".into(), Value::Array(segs));
    rep.data.insert("vertices".into(), json!(np.vertices));
    rep.data.insert("origin_multiplicity".into(), json!(np.origin_multiplicity));
    rep.data.insert("global_unit".into(), json!(unit));
    for c in f.coeffs() {
        rep.precision.record(c.precision());
    }
    Ok(rep)
}

pub fn anticyclo(cfg: &JobConfig, n: usize) -> Out {
    let field = cfg.field()?;
    let ker = anticyclo_kernel(&field, n)?;
    let mut rep = Report::new("anticyclo", cfg.precision);
    let shown: Vec<String> = ker.iter().map(|b| b.to_string()).collect();
    rep.line(format!("total degree <= {n}"));
    rep.line(format!("kernel basis: {{{}}}", shown.join(", ")));
    rep.data.insert("degree".into(), json!(n));
    rep.data.insert("kernel".into(), json!(shown));
    rep.data.insert("dimension".into(), json!(ker.len()));
    Ok(rep)
}

pub fn dtri(cfg: &JobConfig, pl: &FilteredPayload) -> Out {
    let field = cfg.field()?;
    let d = filtered_module(pl, &field)?;
    let smax = *d.weights().last().unwrap();
    let smin = *d.weights().first().unwrap();
    let (lo, hi) = pl.window.unwrap_or((-smax, smax.max(-smin)));
    let l = dtri_lattice(&d, lo, hi)?;
    let mut rep = Report::new("dtri", cfg.precision);
    rep.line(format!("weights {:?}, window [{lo}, {hi}]", d.weights()));
    let mut pieces = Vec::new();
    for e in lo..=hi {
        let p = l.piece(e);
        let shown: Vec<String> = p.basis().iter().map(|v| report::show_vec(v)).collect();
        rep.line(format!("x^{e}: rank {} span {{{}}}", p.rank(), shown.join(", ")));
        let b: Vec<Value> = p.basis().iter().map(|v| report::padic_vec(v, &mut rep.precision)).collect();
        pieces.push(json!({"exponent": e, "rank": p.rank(), "basis": b}));
    }
    let gens = l.generators()?;
    for (e, v) in &gens {
        rep.line(format!("generator x^{e} {}", report::show_vec(v)));
    }
    let g: Vec<Value> = gens.iter().map(|(e, v)| json!([e, report::padic_vec(v, &mut rep.precision)])).collect();
    rep.data.insert("window".into(), json!([lo, hi]));
    rep.data.insert("pieces".into(), Value::Array(pieces));
    rep.data.insert("generators".into(), Value::Array(g));
    Ok(rep)
}
