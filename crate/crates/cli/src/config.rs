//! Run configuration: defaults, then the JSON config file, then flags.

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use ainfell::elliptic::EllipticOptions;
use ainfell::oracle::OracleOptions;
use ainfell::theta::TruncationPolicy;

use crate::CliError;

pub const CONFIG_ENV: &str = "AINFELL_CONFIG";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    /// Series tails pushed 100 times below the double-precision target.
    Extended,
}

/// Fields of the config file; every field is optional.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub tol: Option<f64>,
    pub eps: Option<f64>,
    pub max_terms: Option<usize>,
    pub grid_n: Option<usize>,
    pub cutoff_m: Option<usize>,
    pub pole_margin: Option<f64>,
    pub transversality_margin: Option<f64>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub precision: Option<Precision>,
}

/// Flags shared by every subcommand. Explicit flags win over the config file.
#[derive(Clone, Debug, Default, Args)]
pub struct GlobalArgs {
    /// JSON config file (defaults to $AINFELL_CONFIG).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override every suite tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Series truncation target.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    pub max_terms: Option<usize>,
    /// Grid points per direction for the quadrature oracle (power of two).
    #[arg(long, global = true)]
    pub grid_n: Option<usize>,
    /// Fourier cutoff for the quadrature oracle.
    #[arg(long, global = true)]
    pub cutoff_m: Option<usize>,
    #[arg(long, global = true)]
    pub pole_margin: Option<f64>,
    #[arg(long, global = true)]
    pub transversality_margin: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Also write the JSON record to this file.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub precision: Option<Precision>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub tol: Option<f64>,
    pub eps: f64,
    pub max_terms: usize,
    pub grid_n: usize,
    pub cutoff_m: usize,
    pub pole_margin: f64,
    pub transversality_margin: f64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub precision: Precision,
}

impl Default for RunConfig {
    fn default() -> Self {
        let o = OracleOptions::default();
        let e = EllipticOptions::default();
        Self {
            tol: None,
            eps: e.eps,
            max_terms: TruncationPolicy::default().max_terms,
            grid_n: o.n,
            cutoff_m: o.cutoff,
            pole_margin: e.pole_margin,
            transversality_margin: e.transversality_margin,
            seed: 0,
            output: None,
            precision: Precision::Double,
        }
    }
}

fn read_file(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("config {}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(flags: &GlobalArgs) -> Result<Self, CliError> {
        let path = flags
            .config
            .clone()
            .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        let file = match path {
            Some(p) => read_file(&p)?,
            None => ConfigFile::default(),
        };
        let d = Self::default();
        let cfg = Self {
            tol: flags.tol.or(file.tol),
            eps: flags.eps.or(file.eps).unwrap_or(d.eps),
            max_terms: flags.max_terms.or(file.max_terms).unwrap_or(d.max_terms),
            grid_n: flags.grid_n.or(file.grid_n).unwrap_or(d.grid_n),
            cutoff_m: flags.cutoff_m.or(file.cutoff_m).unwrap_or(d.cutoff_m),
            pole_margin: flags
                .pole_margin
                .or(file.pole_margin)
                .unwrap_or(d.pole_margin),
            transversality_margin: flags
                .transversality_margin
                .or(file.transversality_margin)
                .unwrap_or(d.transversality_margin),
            seed: flags.seed.or(file.seed).unwrap_or(d.seed),
            output: flags.output.clone().or(file.output),
            precision: flags.precision.or(file.precision).unwrap_or(d.precision),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("eps", self.eps),
            ("pole_margin", self.pole_margin),
            ("transversality_margin", self.transversality_margin),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(CliError::Invalid(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if let Some(t) = self.tol {
            if !t.is_finite() || t <= 0.0 {
                return Err(CliError::Invalid(format!("tol must be positive, got {t}")));
            }
        }
        if self.max_terms == 0 {
            return Err(CliError::Invalid("max_terms must be positive".into()));
        }
        self.oracle()
            .validate()
            .map_err(|e| CliError::Invalid(e.to_string()))
    }

    /// The effective series target.
    pub fn effective_eps(&self) -> f64 {
        match self.precision {
            Precision::Double => self.eps,
            Precision::Extended => self.eps * 1e-2,
        }
    }

    pub fn truncation(&self) -> TruncationPolicy {
        TruncationPolicy {
            eps: self.effective_eps(),
            max_terms: self.max_terms,
        }
    }

    pub fn elliptic(&self) -> EllipticOptions {
        EllipticOptions {
            eps: self.effective_eps(),
            pole_margin: self.pole_margin,
            transversality_margin: self.transversality_margin,
            ..EllipticOptions::default()
        }
    }

    pub fn oracle(&self) -> OracleOptions {
        OracleOptions {
            n: self.grid_n,
            cutoff: self.cutoff_m,
            pole_margin: self.pole_margin,
            truncation: self.truncation(),
            ..OracleOptions::default()
        }
    }

    /// `tol` if overridden, else the suite default.
    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}
