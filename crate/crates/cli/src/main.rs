//! `ainfell`: theta functions, elliptic triple products, homotopy fits and
//! verification suites from the command line.
//!
//! Every invocation prints one JSON record on stdout; diagnostics go to
//! stderr.

mod config;
mod suites;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::io::Write;
use std::process::ExitCode;

use ainfell::ainf::AinfError;
use ainfell::elliptic::{
    end_to_end_residual, homotopy_fit, m3_fukaya, m3_holomorphic, random_u_samples, EllipticError,
    LatticeCoordinates, ProductTable, QueryRecord, TripleProductQuery,
};
use ainfell::oracle::{m3_oracle, OracleError};
use ainfell::theta::{theta_shifted, Characteristic, Modulus, ThetaError};
use ainfell::C64;

use config::{GlobalArgs, RunConfig};
use suites::Suite;

const EXIT_HELP: &str = "\
Exit codes:
  0  success (verify: every check passed)
  1  verify: at least one check failed; other runtime failures
  2  invalid input (bad modulus, unknown suite, malformed flags or config)
  3  pole-margin violation
  4  transversality-margin violation
  5  ill-conditioned or underdetermined homotopy fit

Config: a JSON file given by --config or $AINFELL_CONFIG; explicit flags win.";

#[derive(Debug, Parser)]
#[command(name = "ainfell", version, about = "A-infinity transfer and elliptic triple products", after_help = EXIT_HELP)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate θ_r(x, τ).
    Theta {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        x: C64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: C64,
        /// Characteristic P/Q.
        #[arg(long = "char")]
        characteristic: Option<Characteristic>,
    },
    /// Coefficient of θ_{d/l}(lx+w, lτ) in m3(α, β1, β2).
    M3 {
        #[arg(long, value_enum)]
        side: M3Side,
        #[command(flatten)]
        q: QueryArgs,
    },
    /// Run a named verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
    },
    /// Fit the homotopy coefficients f^d_{a,q}(w).
    FitHomotopy {
        #[arg(long)]
        k: i64,
        #[arg(long)]
        l: i64,
        #[arg(long, default_value_t = 0)]
        a: i64,
        #[arg(long, default_value_t = 0)]
        d: i64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        w: C64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: C64,
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum M3Side {
    Holomorphic,
    Fukaya,
    Oracle,
}

#[derive(Debug, clap::Args)]
struct QueryArgs {
    #[arg(long)]
    k: i64,
    #[arg(long)]
    l: i64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    a: i64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    b: i64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    c: i64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    d: i64,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    u: C64,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    v: C64,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    tau: C64,
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected RE,IM, got {s:?}"))?;
    let re: f64 = re.trim().parse().map_err(|e| format!("real part: {e}"))?;
    let im: f64 = im
        .trim()
        .parse()
        .map_err(|e| format!("imaginary part: {e}"))?;
    Ok(C64::new(re, im))
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Pole(String),
    #[error("{0}")]
    Transversality(String),
    #[error("{0}")]
    IllConditioned(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Pole(_) => 3,
            CliError::Transversality(_) => 4,
            CliError::IllConditioned(_) => 5,
        }
    }
}

impl From<ThetaError> for CliError {
    fn from(e: ThetaError) -> Self {
        match e {
            ThetaError::TruncationExceeded { .. } => CliError::Failed(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<EllipticError> for CliError {
    fn from(e: EllipticError) -> Self {
        let msg = e.to_string();
        match e {
            EllipticError::Theta(t) => t.into(),
            EllipticError::InvalidDegree(_) => CliError::Invalid(msg),
            EllipticError::PoleProximity { .. } => CliError::Pole(msg),
            EllipticError::Transversality { .. } => CliError::Transversality(msg),
            EllipticError::IllConditioned(_) | EllipticError::TooFewSamples { .. } => {
                CliError::IllConditioned(msg)
            }
            _ => CliError::Failed(msg),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        let msg = e.to_string();
        match e {
            OracleError::Theta(t) => t.into(),
            OracleError::Elliptic(x) => x.into(),
            OracleError::PoleProximity { .. } => CliError::Pole(msg),
            OracleError::InvalidGrid(_)
            | OracleError::InvalidCutoff { .. }
            | OracleError::InvalidDegree(_) => CliError::Invalid(msg),
            _ => CliError::Failed(msg),
        }
    }
}

impl From<AinfError> for CliError {
    fn from(e: AinfError) -> Self {
        CliError::Failed(e.to_string())
    }
}

fn emit<T: Serialize>(value: &T, cfg: &RunConfig) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            return Err(CliError::Failed(e.to_string()))
        }
        _ => {}
    }
    if let Some(path) = &cfg.output {
        std::fs::write(path, format!("{text}\n"))
            .map_err(|e| CliError::Failed(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ThetaRecord {
    x: [f64; 2],
    tau: [f64; 2],
    characteristic: String,
    value: [f64; 2],
    terms_used: usize,
}

fn cmd_theta(x: C64, tau: C64, r: Option<Characteristic>, cfg: &RunConfig) -> Result<(), CliError> {
    let modulus = Modulus::new(tau)?;
    let r = r.unwrap_or_else(Characteristic::zero);
    let v = theta_shifted(r.value(), x, &modulus, &cfg.truncation())?;
    emit(
        &ThetaRecord {
            x: [x.re, x.im],
            tau: [tau.re, tau.im],
            characteristic: format!("{}/{}", r.numerator(), r.denominator()),
            value: [v.value.re, v.value.im],
            terms_used: v.terms_used,
        },
        cfg,
    )
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn cmd_m3(side: M3Side, a: &QueryArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let q = TripleProductQuery::new(a.k, a.l, a.a, a.b, a.c, a.d, a.u, a.v, a.tau)?;
    let opts = cfg.elliptic();
    let mut table = ProductTable {
        query: QueryRecord::from(&q),
        g: None,
        f: None,
        oracle: None,
        fit: None,
    };
    match side {
        M3Side::Holomorphic => table.g = Some(pair(m3_holomorphic(&q, &opts)?)),
        M3Side::Fukaya => table.f = Some(pair(m3_fukaya(&q, &opts)?)),
        M3Side::Oracle => table.oracle = Some(pair(m3_oracle(&q, &cfg.oracle())?)),
    }
    emit(&table, cfg)
}

fn cmd_verify(suite: Suite, cfg: &RunConfig) -> Result<(), CliError> {
    let report = suites::run(suite, cfg)?;
    for c in &report.checks {
        eprintln!(
            "{} {:<40} {:<45} residual {:.3e} (tol {:.1e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.identity,
            c.name,
            c.residual,
            c.tolerance
        );
    }
    emit(&report, cfg)?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.identity)
            .collect();
        Err(CliError::Failed(format!(
            "failed identities: {}",
            failed.join(", ")
        )))
    }
}

#[derive(Serialize)]
struct FitRecordOut {
    coefficients: ainfell::elliptic::HomotopyCoefficients,
    end_to_end_residual: f64,
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    k: i64,
    l: i64,
    a: i64,
    d: i64,
    w: C64,
    tau: C64,
    samples: usize,
    cfg: &RunConfig,
) -> Result<(), CliError> {
    if k <= 0 || l <= 0 {
        return Err(CliError::Invalid(format!(
            "degrees must be positive, got k = {k}, l = {l}"
        )));
    }
    let modulus = Modulus::new(tau)?;
    let w = LatticeCoordinates::from_value(w, &modulus);
    let opts = cfg.elliptic();
    let pol = cfg.truncation();
    let u_samples = random_u_samples(samples, cfg.seed, &modulus);
    let all = (0..l)
        .map(|dd| homotopy_fit(k, l, a, dd, w, &modulus, &u_samples, &opts, &pol))
        .collect::<Result<Vec<_>, _>>()?;
    let fresh = random_u_samples(1, cfg.seed.wrapping_add(1), &modulus)[0];
    let mut e2e = 0.0_f64;
    for b in 0..k {
        for c in 0..l {
            e2e = e2e.max(end_to_end_residual(&all, b, c, &fresh, &opts, &pol)?);
        }
    }
    let coefficients = all[d.rem_euclid(l) as usize].clone();
    eprintln!(
        "fit residual {:.3e}, fibre spread {:.3e}, condition {:.3e}, end-to-end {:.3e}",
        coefficients.fit.residual, coefficients.fit.fiber_spread, coefficients.fit.condition, e2e
    );
    emit(
        &FitRecordOut {
            coefficients,
            end_to_end_residual: e2e,
        },
        cfg,
    )
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.global)?;
    match cli.command {
        Command::Theta {
            x,
            tau,
            characteristic,
        } => cmd_theta(x, tau, characteristic, &cfg),
        Command::M3 { side, q } => cmd_m3(side, &q, &cfg),
        Command::Verify { suite } => cmd_verify(suite, &cfg),
        Command::FitHomotopy {
            k,
            l,
            a,
            d,
            w,
            tau,
            samples,
        } => cmd_fit(k, l, a, d, w, tau, samples, &cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
