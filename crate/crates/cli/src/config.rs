use std::path::PathBuf;

use locan::PadicField;

use crate::error::CliError;
use crate::input::FileConfig;

/// Flag values shared by every command; `None` means "not given".
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Flags {
    /// The prime p.
    #[arg(long, global = true)]
    pub prime: Option<u64>,
    /// Residue degree f of the base field.
    #[arg(long, global = true)]
    pub residue_degree: Option<usize>,
    /// Absolute p-adic precision P.
    #[arg(long, global = true)]
    pub precision: Option<i64>,
    /// Number of t-coefficients kept in the de Rham model.
    #[arg(long, global = true)]
    pub trunc_t: Option<usize>,
    /// Truncation order in x.
    #[arg(long, global = true)]
    pub trunc_x: Option<usize>,
    /// Truncation order in u.
    #[arg(long, global = true)]
    pub trunc_u: Option<usize>,
    /// Analyticity level n.
    #[arg(long, global = true)]
    pub level: Option<u32>,
    /// JSON input file (read from stdin when absent).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct JobConfig {
    pub p: u64,
    pub f: usize,
    pub modulus: Option<Vec<i64>>,
    pub precision: i64,
    pub n_t: usize,
    pub n_x: usize,
    pub m_u: usize,
    pub level: u32,
}

impl JobConfig {
    pub fn resolve(flags: &Flags, file: &FileConfig) -> Result<Self, CliError> {
        let p = flags
            .prime
            .or(file.prime)
            .ok_or_else(|| CliError::parse("a prime is required (--prime or config.prime)"))?;
        let f = flags.residue_degree.or(file.residue_degree).unwrap_or(1);
        let cfg = JobConfig {
            p,
            f,
            modulus: file.modulus.clone(),
            precision: flags.precision.or(file.precision).unwrap_or(20),
            n_t: flags.trunc_t.or(file.trunc_t).unwrap_or(8),
            n_x: flags.trunc_x.or(file.trunc_x).unwrap_or(6),
            m_u: flags.trunc_u.or(file.trunc_u).unwrap_or(8),
            level: flags.level.or(file.level).unwrap_or(1),
        };
        if cfg.f < 1 || cfg.precision < 1 || cfg.n_t < 1 || cfg.n_x < 1 || cfg.m_u < 1 || cfg.level < 1 {
            return Err(CliError::parse("residue degree, precision, truncations and level must all be at least 1"));
        }
        if let Some(m) = &cfg.modulus {
            if m.len() != cfg.f + 1 {
                return Err(CliError::parse(format!("modulus must have degree {}", cfg.f)));
            }
        }
        Ok(cfg)
    }

    /// The base field; for `f > 1` without an explicit modulus, the first
    /// monic irreducible polynomial in lexicographic order is used.
    pub fn field(&self) -> Result<PadicField, CliError> {
        let field = if self.f == 1 {
            PadicField::qp(self.p, self.precision)?
        } else if let Some(m) = &self.modulus {
            PadicField::unramified(self.p, m, self.precision)?
        } else {
            PadicField::qp(self.p, self.precision)?;
            let p = self.p as i64;
            let total = (self.p as u128).checked_pow(self.f as u32).filter(|&n| n <= 1 << 20).ok_or_else(|| {
                CliError::parse("residue field too large to search for a modulus; give config.modulus")
            })?;
            let mut found = None;
            for idx in 0..total as i64 {
                let mut coeffs = Vec::with_capacity(self.f + 1);
                let mut k = idx;
                for _ in 0..self.f {
                    coeffs.push(k % p);
                    k /= p;
                }
                coeffs.push(1);
                if let Ok(fld) = PadicField::unramified(self.p, &coeffs, self.precision) {
                    found = Some(fld);
                    break;
                }
            }
            found.ok_or_else(|| CliError::math("no irreducible modulus found"))?
        };
        Ok(if self.p == 2 { field.allowing_p2() } else { field })
    }
}
