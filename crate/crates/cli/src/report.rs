//! Human-readable and JSON renderings of command results.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use locan::cyclotomic::CycloElement;
use locan::series::TruncSeries;
use locan::{Matrix, PadicElement, RingElem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Tracks the precision of every reported quantity.
#[derive(Clone, Debug)]
pub struct PrecisionLog {
    working: i64,
    min_output: Option<i64>,
    notes: Vec<String>,
}

impl PrecisionLog {
    pub fn new(working: i64) -> Self {
        PrecisionLog { working, min_output: None, notes: Vec::new() }
    }

    pub fn record(&mut self, prec: i64) {
        if prec < i64::MAX / 4 {
            self.min_output = Some(self.min_output.map_or(prec, |m| m.min(prec)));
        }
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    fn to_json(&self) -> Value {
        json!({
            "working": self.working,
            "min_output": self.min_output,
            "loss": self.min_output.map(|m| (self.working - m).max(0)),
            "notes": self.notes,
        })
    }

    fn to_text(&self) -> String {
        let mut s = String::from("-- precision --\n");
        s.push_str(&format!("working precision: {}\n", self.working));
        match self.min_output {
            Some(m) => s.push_str(&format!("minimum output precision: {m} (loss {})\n", (self.working - m).max(0))),
            None => s.push_str("minimum output precision: exact\n"),
        }
        for n in &self.notes {
            s.push_str(&format!("note: {n}\n"));
        }
        s
    }
}

pub struct Report {
    pub command: String,
    pub lines: Vec<String>,
    pub data: Map<String, Value>,
    pub precision: PrecisionLog,
}

impl Report {
    pub fn new(command: &str, working: i64) -> Self {
        Report { command: command.into(), lines: Vec::new(), data: Map::new(), precision: PrecisionLog::new(working) }
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn machine(&self) -> Value {
        json!({
            "schema": crate::input::SCHEMA_VERSION,
            "command": self.command,
            "result": Value::Object(self.data.clone()),
            "precision": self.precision.to_json(),
        })
    }

    pub fn render(&self, format: Format) -> String {
        let machine = match format {
            Format::Json => serde_json::to_string_pretty(&self.machine()),
            Format::Text => serde_json::to_string(&self.machine()),
        }
        .expect("serializable");
        match format {
            Format::Json => machine + "\n",
            Format::Text => {
                let mut s = format!("== {} ==\n", self.command);
                for l in &self.lines {
                    s.push_str(l);
                    s.push('\n');
                }
                s.push_str("-- machine-readable --\n");
                s.push_str(&machine);
                s.push('\n');
                s.push_str(&self.precision.to_text());
                s
            }
        }
    }
}

fn digits(n: &BigInt, p: u64) -> Vec<u64> {
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut out = Vec::new();
    while !n.is_zero() {
        let (q, r) = n.div_mod_floor(&p);
        out.push(r.to_u64().expect("digit"));
        n = q;
    }
    out
}

/// `{"display", "digits" | "coords", "valuation", "precision"}`; the
/// digit/coordinate form parses back to the same element.
pub fn padic(e: &PadicElement, log: &mut PrecisionLog) -> Value {
    log.record(e.precision());
    let mut obj = Map::new();
    obj.insert("display".into(), Value::String(e.to_string()));
    obj.insert("precision".into(), json!(e.precision()));
    let p = e.prime();
    match e.val() {
        None => {
            obj.insert("valuation".into(), json!(e.precision()));
            if e.field().degree() == 1 {
                obj.insert("digits".into(), json!(Vec::<u64>::new()));
            } else {
                obj.insert("coords".into(), json!(Vec::<String>::new()));
            }
        }
        Some(v) => {
            obj.insert("valuation".into(), json!(v));
            let modulus = num_traits::pow(BigInt::from(p), (e.precision() - v) as usize);
            let unit: Vec<BigInt> = e.unit_coeffs().iter().map(|c| c.mod_floor(&modulus)).collect();
            if e.field().degree() == 1 {
                obj.insert("digits".into(), json!(digits(&unit[0], p)));
            } else {
                obj.insert("coords".into(), json!(unit.iter().map(|c| c.to_string()).collect::<Vec<_>>()));
            }
        }
    }
    Value::Object(obj)
}

pub fn cyclo(e: &CycloElement, log: &mut PrecisionLog) -> Value {
    json!({
        "display": e.to_string(),
        "level": e.level(),
        "coeffs": e.coeffs().iter().map(|c| padic(c, log)).collect::<Vec<_>>(),
    })
}

/// Nonzero terms as `[[k, a_k], ..]` plus the truncation order.
pub fn series<R: RingElem>(
    s: &TruncSeries<R>,
    log: &mut PrecisionLog,
    enc: impl Fn(&R, &mut PrecisionLog) -> Value,
) -> Value {
    let terms: Vec<Value> =
        s.coeffs().iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| json!([k, enc(c, log)])).collect();
    json!({ "terms": terms, "big_o": s.trunc() + 1 })
}

pub fn matrix<T: RingElem>(
    m: &Matrix<T>,
    log: &mut PrecisionLog,
    enc: impl Fn(&T, &mut PrecisionLog) -> Value,
) -> Value {
    Value::Array(m.to_rows().iter().map(|r| Value::Array(r.iter().map(|a| enc(a, log)).collect())).collect())
}

pub fn padic_vec(v: &[PadicElement], log: &mut PrecisionLog) -> Value {
    Value::Array(v.iter().map(|a| padic(a, log)).collect())
}

pub fn show_vec(v: &[PadicElement]) -> String {
    format!("({})", v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", "))
}
