//! Verification suites. Each check reports the identity it exercises.

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use ainfell::ainf::samples::{self, Nilmanifold};
use ainfell::ainf::{
    ainf_morphism_residual, ainf_residual, hodge_data, homotopy_between, inclusion_morphism,
    pairing_cyclic_residual, transfer, transfer_from_table, AinfMorphism, AinfStructure, HodgeData,
    LambdaTable,
};
use ainfell::elliptic::{
    end_to_end_residual, homotopy_fit, lattice_distance, m3_holomorphic, per1_residual,
    per2_residual, per5_residual, per6_residual, random_u_samples, residue_estimates,
    EllipticError, LatticeCoordinates, Side, TripleProductQuery,
};
use ainfell::oracle::{
    lemma_adjointness_residual, m3_oracle, m3_oracle_reversed, sample_h0_basis, sample_h1_basis,
    serre_cyclic_check,
};
use ainfell::theta::{addition_formula_residual, Modulus};
use ainfell::{C64, I};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Ainf,
    Morphism,
    Cyclic,
    ThetaAddition,
    Periodicity,
    Residue,
    Homotopy,
    Oracle,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub identity: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

struct Checks {
    cfg: RunConfig,
    out: Vec<Check>,
}

impl Checks {
    fn push(
        &mut self,
        name: impl Into<String>,
        identity: &'static str,
        residual: f64,
        default_tol: f64,
    ) {
        let tolerance = self.cfg.tol_or(default_tol);
        self.out.push(Check {
            name: name.into(),
            identity,
            residual,
            tolerance,
            passed: residual <= tolerance,
        });
    }
}

pub fn run(suite: Suite, cfg: &RunConfig) -> Result<SuiteReport, CliError> {
    let mut checks = Checks {
        cfg: cfg.clone(),
        out: Vec::new(),
    };
    let seed = cfg.seed;
    match suite {
        Suite::Ainf => ainf_suite(&mut checks, seed)?,
        Suite::Morphism => morphism_suite(&mut checks, seed)?,
        Suite::Cyclic => cyclic_suite(&mut checks, seed)?,
        Suite::ThetaAddition => theta_addition_suite(&mut checks, seed)?,
        Suite::Periodicity => periodicity_suite(&mut checks, seed)?,
        Suite::Residue => residue_suite(&mut checks)?,
        Suite::Homotopy => homotopy_suite(&mut checks, seed)?,
        Suite::Oracle => oracle_suite(&mut checks, seed)?,
    }
    let passed = checks.out.iter().all(|c| c.passed);
    Ok(SuiteReport {
        suite,
        seed,
        checks: checks.out,
        passed,
    })
}

const CORPUS: u64 = 10;

fn ainf_suite(c: &mut Checks, seed: u64) -> Result<(), CliError> {
    for s in seed..seed + CORPUS {
        let alg = samples::random_dg_algebra(s);
        let hd = hodge_data(&alg)?;
        let st = transfer(&alg, &hd, 4)?;
        c.push(
            format!("transfer seed {s}"),
            "A-infinity constraint",
            ainf_residual(&st),
            1e-10,
        );
        let zero = transfer(&alg, &HodgeData::zero(&alg), 4)?;
        let higher = (3..=4)
            .map(|k| zero.m(k).map_or(0.0, |m| m.max_abs()))
            .fold(0.0, f64::max);
        c.push(
            format!("Q = 0 seed {s}"),
            "m_k = 0 for k >= 3 when Q = 0",
            higher,
            0.0,
        );
    }
    Ok(())
}

fn morphism_suite(c: &mut Checks, seed: u64) -> Result<(), CliError> {
    for s in seed..seed + CORPUS {
        let alg = samples::random_dg_algebra(s);
        let hd = hodge_data(&alg)?;
        let table = LambdaTable::build(&alg, &hd, 4);
        let b = transfer_from_table(&alg, &hd, &table, 4)?;
        let a = AinfStructure::from_dg_algebra(&alg);
        let f = inclusion_morphism(&table, &hd, 4);
        c.push(
            format!("inclusion seed {s}"),
            "A-infinity morphism equation",
            ainf_morphism_residual(&f, &a, &b),
            1e-9,
        );
        let id = AinfMorphism::identity(b.dim(), 4);
        c.push(
            format!("identity seed {s}"),
            "identity A-infinity morphism",
            ainf_morphism_residual(&id, &b, &b),
            1e-12,
        );
    }
    Ok(())
}

fn random_tau(rng: &mut ChaCha8Rng) -> Modulus {
    Modulus::new(C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.8..1.5))).expect("Im τ > 0")
}

fn random_point(rng: &mut ChaCha8Rng, tau: &Modulus) -> LatticeCoordinates {
    loop {
        let z =
            LatticeCoordinates::from_coords(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), tau);
        if lattice_distance(&z, tau) > 0.05 {
            return z;
        }
    }
}

fn random_query(rng: &mut ChaCha8Rng, degrees: (i64, i64), tau: &Modulus) -> TripleProductQuery {
    let (k, l) = degrees;
    TripleProductQuery {
        k,
        l,
        a: rng.gen_range(0..k),
        b: rng.gen_range(0..k),
        c: rng.gen_range(0..l),
        d: rng.gen_range(0..l),
        u: random_point(rng, tau),
        v: random_point(rng, tau),
        tau: *tau,
    }
}

fn cyclic_suite(c: &mut Checks, seed: u64) -> Result<(), CliError> {
    for (kind, label) in [
        (Nilmanifold::Heisenberg, "heisenberg"),
        (Nilmanifold::Filiform, "filiform"),
    ] {
        let (alg, pairing) = samples::nilmanifold_pairing_instance(kind, seed);
        let hd = hodge_data(&alg)?;
        for n in 2..=4 {
            let r = pairing_cyclic_residual(&alg, &hd, &pairing, n)?;
            c.push(
                format!("{label} n = {n}"),
                "cyclic symmetry theorem",
                r,
                1e-10,
            );
        }
    }
    let opts = c.cfg.oracle();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = Modulus::new(I)?;
    for degrees in [(1, 1), (2, 1)] {
        let q = random_query(&mut rng, degrees, &tau);
        for n in [2, 3] {
            let r = serre_cyclic_check(&q, n, &opts)?;
            c.push(
                format!("curve (k,l) = {degrees:?} n = {n}"),
                "cyclic symmetry theorem (Serre pairing)",
                r.residual,
                1e-6,
            );
        }
        let pol = &opts.truncation;
        let alpha = sample_h1_basis(
            q.k,
            q.a,
            &LatticeCoordinates::zero(),
            &tau,
            opts.n,
            false,
            pol,
        )?
        .mul(&sample_h0_basis(q.k, q.b, &q.u, &tau, opts.n, pol)?)?;
        let vu = LatticeCoordinates::from_coords(q.v.z1 - q.u.z1, q.v.z2 - q.u.z2, &tau);
        let beta = sample_h1_basis(q.l, q.c, &q.v, &tau, opts.n, false, pol)?
            .mul(&sample_h0_basis(q.l, q.d, &vu, &tau, opts.n, pol)?)?;
        c.push(
            format!("curve (k,l) = {degrees:?}"),
            "Q-adjointness lemma",
            lemma_adjointness_residual(&alpha, &beta, &opts)?,
            1e-7,
        );
    }
    Ok(())
}

fn theta_addition_suite(c: &mut Checks, seed: u64) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pol = c.cfg.truncation();
    let z = |rng: &mut ChaCha8Rng| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    for i in 0..20 {
        let (k, l) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let (b, cc) = (rng.gen_range(-3..=3), rng.gen_range(-3..=3));
        let tau = random_tau(&mut rng);
        let (u, v, x) = (z(&mut rng), z(&mut rng), z(&mut rng));
        let r = addition_formula_residual(k, l, b, cc, u, v, x, &tau, &pol)?;
        c.push(
            format!("draw {i}: k={k} l={l} b={b} c={cc}"),
            "theta addition formula",
            r,
            1e-9,
        );
    }
    Ok(())
}

fn periodicity_suite(c: &mut Checks, seed: u64) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = c.cfg.elliptic();
    let mut done = 0;
    while done < 10 {
        let tau = random_tau(&mut rng);
        let degrees = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let q = random_query(&mut rng, degrees, &tau);
        let eval = || -> Result<[f64; 6], EllipticError> {
            Ok([
                per1_residual(Side::Holomorphic, &q, &opts)?,
                per1_residual(Side::Fukaya, &q, &opts)?,
                per2_residual(Side::Holomorphic, &q, &opts)?,
                per2_residual(Side::Fukaya, &q, &opts)?,
                per5_residual(&q, &opts)?,
                per6_residual(&q, &opts)?,
            ])
        };
        let r = match eval() {
            Ok(r) => r,
            Err(EllipticError::Transversality { .. } | EllipticError::PoleProximity { .. }) => {
                continue
            }
            Err(e) => return Err(e.into()),
        };
        let tag = format!("draw {done}: (k,l) = {degrees:?}");
        c.push(format!("{tag} G"), "per1", r[0], 1e-8);
        c.push(format!("{tag} F"), "per1", r[1], 1e-8);
        c.push(format!("{tag} G"), "per2", r[2], 1e-8);
        c.push(format!("{tag} F"), "per2", r[3], 1e-8);
        c.push(format!("{tag} G - F"), "per5", r[4], 1e-7);
        c.push(format!("{tag} G - F"), "per6", r[5], 1e-7);
        done += 1;
    }
    Ok(())
}

/// The residue checks at `|u| = 1e-3`. The one-sided estimates carry the
/// `O(u)` term of the Laurent expansion and are reported as they are; the
/// symmetric estimates cancel it.
fn residue_suite(c: &mut Checks) -> Result<(), CliError> {
    let opts = c.cfg.elliptic();
    let tau = Modulus::new(I)?;
    let u = C64::new(1.0, 1.0) * (1e-3 / 2.0_f64.sqrt());
    for (k, l) in [(1, 1), (2, 1)] {
        let q =
            TripleProductQuery::new(k, l, 0, 0, 0, 0, C64::new(0.2, 0.1), C64::new(0.1, 0.1), I)?;
        let q = q.with_u_fixed_w(LatticeCoordinates::from_value(u, &tau));
        let r = residue_estimates(&q, u, &opts)?;
        let tag = format!("(k,l) = ({k},{l})");
        c.push(
            format!("{tag} |uG - 1|"),
            "residue at u = 0 equals 1",
            r.g,
            1e-4,
        );
        c.push(
            format!("{tag} |uF - 1|"),
            "residue at u = 0 equals 1",
            r.f,
            1e-4,
        );
        c.push(
            format!("{tag} |u(G - F)|"),
            "G - F holomorphic at u = 0",
            r.h,
            1e-5,
        );
        c.push(
            format!("{tag} symmetric G"),
            "residue at u = 0 equals 1",
            r.g_symmetric,
            1e-4,
        );
        c.push(
            format!("{tag} symmetric F"),
            "residue at u = 0 equals 1",
            r.f_symmetric,
            1e-4,
        );
    }
    Ok(())
}

fn homotopy_suite(c: &mut Checks, seed: u64) -> Result<(), CliError> {
    for s in seed..seed + 4 {
        let alg = samples::random_dg_algebra(s);
        let h1 = alg
            .inner()
            .expect("corpus carries an inner product")
            .clone();
        let h2 = samples::random_inner_product(alg.basis(), s + 1000);
        let fit = homotopy_between(&alg, &h1, &h2)?;
        c.push(
            format!("seed {s}"),
            "f2 homotopy between m3 and m3'",
            fit.residual,
            1e-8,
        );
    }
    let tau = Modulus::new(I)?;
    let w = LatticeCoordinates::from_value(C64::new(0.3, 0.2), &tau);
    let opts = c.cfg.elliptic();
    let pol = c.cfg.truncation();
    for (k, l) in [(1, 1), (2, 1)] {
        let samples = random_u_samples(8, seed, &tau);
        let coeffs = (0..l)
            .map(|d| homotopy_fit(k, l, 0, d, w, &tau, &samples, &opts, &pol))
            .collect::<Result<Vec<_>, _>>()?;
        let tag = format!("(k,l) = ({k},{l})");
        let fit = coeffs.iter().map(|h| h.fit.residual).fold(0.0, f64::max);
        let spread = coeffs
            .iter()
            .map(|h| h.fit.fiber_spread)
            .fold(0.0, f64::max);
        c.push(
            format!("{tag} fit"),
            "G - F expansion in theta basis",
            fit,
            1e-8,
        );
        c.push(
            format!("{tag} fibres"),
            "coefficients depend only on phi3",
            spread,
            1e-7,
        );
        let fresh = random_u_samples(1, seed + 1, &tau)[0];
        let mut e2e = 0.0_f64;
        for b in 0..k {
            for cc in 0..l {
                e2e = e2e.max(end_to_end_residual(&coeffs, b, cc, &fresh, &opts, &pol)?);
            }
        }
        c.push(
            format!("{tag} end to end"),
            "m3 - m3' = n2(alpha, beta1 beta2)",
            e2e,
            1e-7,
        );
    }
    Ok(())
}

fn oracle_suite(c: &mut Checks, seed: u64) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eopts = c.cfg.elliptic();
    let oopts = c.cfg.oracle();
    let tau = Modulus::new(I)?;
    for degrees in [(1, 1), (2, 1), (2, 3)] {
        let q = random_query(&mut rng, degrees, &tau);
        let g = m3_holomorphic(&q, &eopts)?;
        let o = m3_oracle(&q, &oopts)?;
        let tag = format!("(k,l) = {degrees:?}");
        c.push(
            format!("{tag} relative"),
            "closed-form m3 equals quadrature m3",
            (g - o).norm() / g.norm().max(f64::MIN_POSITIVE),
            1e-6,
        );
        let rev = m3_oracle_reversed(&q, &oopts)?;
        c.push(
            format!("{tag} antisymmetry"),
            "m3(b2, b1, a) = -m3(a, b1, b2)",
            (rev + o).norm(),
            1e-7,
        );
    }
    Ok(())
}
