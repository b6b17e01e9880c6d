//! The holomorphic part `H = G - F` expanded in the theta basis `e(s)`, and
//! the map `n_2` it defines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;

use super::series::{lattice_distance, m3_fukaya, m3_holomorphic};
use super::tset::{big_n, phi2, phi3, t_set_enumerate};
use super::{EllipticError, EllipticOptions, LatticeCoordinates, TripleProductQuery};
use crate::linalg::{lstsq, CMatrix, CVector};
use crate::theta::{theta_char, Characteristic, Modulus, TruncationPolicy};
use crate::C64;
use num_integer::Integer;

/// Fits with a larger condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FitDiagnostics {
    /// Largest `|A f - (G - F)|` over all samples and all `(b, c)`.
    pub residual: f64,
    /// Largest condition number among the `(b, c)` systems.
    pub condition: f64,
    /// Largest disagreement between coefficients with equal `φ_3`.
    pub fiber_spread: f64,
    pub samples: usize,
}

/// `f^d_{a,q}(w)` for `q ∈ Z/(k+l)Z`.
#[derive(Clone, Debug, Serialize)]
pub struct HomotopyCoefficients {
    pub k: i64,
    pub l: i64,
    pub a: i64,
    pub d: i64,
    pub w: LatticeCoordinates,
    pub tau: Modulus,
    #[serde(rename = "coeffs", serialize_with = "serialize_coeffs")]
    pub f: Vec<Option<C64>>,
    pub fit: FitDiagnostics,
}

fn serialize_coeffs<S: Serializer>(f: &[Option<C64>], s: S) -> Result<S::Ok, S::Error> {
    let v: Vec<(usize, f64, f64)> = f
        .iter()
        .enumerate()
        .filter_map(|(q, z)| z.map(|z| (q, z.re, z.im)))
        .collect();
    v.serialize(s)
}

/// `e(s)(u) = θ_{s/N}(((k+l)u - kw)/r, Nτ)`.
pub fn theta_basis(
    s: i64,
    k: i64,
    l: i64,
    u: C64,
    w: C64,
    tau: &Modulus,
    pol: &TruncationPolicy,
) -> Result<C64, EllipticError> {
    let r = k.gcd(&l);
    let n = big_n(k, l);
    let z = (u * (k + l) as f64 - w * k as f64) / r as f64;
    Ok(theta_char(
        &Characteristic::new(s, n)?,
        z,
        &tau.scaled(n),
        pol,
    )?)
}

/// `count` points `x + yτ` with `x, y` uniform in `[0, 1)`, at least `0.05`
/// away from the lattice.
pub fn random_u_samples(count: usize, seed: u64, tau: &Modulus) -> Vec<LatticeCoordinates> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z =
            LatticeCoordinates::from_coords(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), tau);
        if lattice_distance(&z, tau) > 0.05 {
            out.push(z);
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn probe(
    k: i64,
    l: i64,
    a: i64,
    b: i64,
    c: i64,
    d: i64,
    u: &LatticeCoordinates,
    w: &LatticeCoordinates,
    tau: &Modulus,
) -> TripleProductQuery {
    TripleProductQuery {
        k,
        l,
        a: a.rem_euclid(k),
        b: b.rem_euclid(k),
        c: c.rem_euclid(l),
        d: d.rem_euclid(l),
        u: *u,
        v: LatticeCoordinates::from_coords(w.z1 - u.z1, w.z2 - u.z2, tau),
        tau: *tau,
    }
}

/// Least-squares fit of
/// `G^d_{a,b,c}(u,w) - F^d_{a,b,c}(u,w) = Σ_{σ ∈ φ_1^{-1}(b,c)} f_{φ_3(σ)} e(φ_2(σ))(u)`
/// for every `(b, c)`, then averaged over each `φ_3` class.
#[allow(clippy::too_many_arguments)]
pub fn homotopy_fit(
    k: i64,
    l: i64,
    a: i64,
    d: i64,
    w: LatticeCoordinates,
    tau: &Modulus,
    u_samples: &[LatticeCoordinates],
    opts: &EllipticOptions,
    pol: &TruncationPolicy,
) -> Result<HomotopyCoefficients, EllipticError> {
    if k <= 0 {
        return Err(EllipticError::InvalidDegree(k));
    }
    if l <= 0 {
        return Err(EllipticError::InvalidDegree(l));
    }
    let unknowns = t_set_enumerate(k, l, 0, 0).len();
    if u_samples.len() < unknowns {
        return Err(EllipticError::TooFewSamples {
            samples: u_samples.len(),
            unknowns,
        });
    }
    let mut collected: BTreeMap<i64, Vec<C64>> = BTreeMap::new();
    let mut residual = 0.0_f64;
    let mut condition = 0.0_f64;
    for b in 0..k {
        for c in 0..l {
            let fibre = t_set_enumerate(k, l, b, c);
            let mut mat = CMatrix::zeros(u_samples.len(), fibre.len());
            let mut rhs = CVector::zeros(u_samples.len());
            for (i, u) in u_samples.iter().enumerate() {
                let q = probe(k, l, a, b, c, d, u, &w, tau);
                rhs[i] = m3_holomorphic(&q, opts)? - m3_fukaya(&q, opts)?;
                for (j, sigma) in fibre.iter().enumerate() {
                    mat[(i, j)] =
                        theta_basis(phi2(sigma, k, l)?, k, l, u.value, w.value, tau, pol)?;
                }
            }
            let ls = lstsq(&mat, &rhs, 1e-15);
            if ls.condition.is_nan() || ls.condition > MAX_CONDITION {
                return Err(EllipticError::IllConditioned(ls.condition));
            }
            residual = residual.max(ls.residual);
            condition = condition.max(ls.condition);
            for (j, sigma) in fibre.iter().enumerate() {
                collected
                    .entry(phi3(sigma, k, l))
                    .or_default()
                    .push(ls.solution[j]);
            }
        }
    }
    let mut f = vec![None; (k + l) as usize];
    let mut fiber_spread = 0.0_f64;
    for (q, vals) in &collected {
        let mean = vals.iter().sum::<C64>() / vals.len() as f64;
        for x in vals {
            for y in vals {
                fiber_spread = fiber_spread.max((x - y).norm());
            }
        }
        f[*q as usize] = Some(mean);
    }
    Ok(HomotopyCoefficients {
        k,
        l,
        a: a.rem_euclid(k),
        d: d.rem_euclid(l),
        w,
        tau: *tau,
        f,
        fit: FitDiagnostics {
            residual,
            condition,
            fiber_spread,
            samples: u_samples.len(),
        },
    })
}

/// Coefficients of `n_2(α, θ_{q/(k+l)}((k+l)x+w, (k+l)τ))` in the basis
/// `θ_{d/l}(lx+w, lτ)`, `d ∈ Z/lZ`. `coeffs` must hold one fit per `d`.
pub fn n2_apply(coeffs: &[HomotopyCoefficients], q: i64) -> Result<Vec<C64>, EllipticError> {
    let Some(first) = coeffs.first() else {
        return Err(EllipticError::MissingCoefficient(0));
    };
    let (k, l) = (first.k, first.l);
    let q = q.rem_euclid(k + l) as usize;
    (0..l)
        .map(|d| {
            let entry = coeffs
                .iter()
                .find(|h| h.d == d && h.k == k && h.l == l)
                .ok_or(EllipticError::MissingCoefficient(d))?;
            entry.f[q].ok_or(EllipticError::MissingCoefficient(d))
        })
        .collect()
}

/// `n_2(α, β_1 β_2)` by expanding `β_1 β_2` with the addition formula.
fn n2_of_product(
    coeffs: &[HomotopyCoefficients],
    b: i64,
    c: i64,
    u: &LatticeCoordinates,
    pol: &TruncationPolicy,
) -> Result<Vec<C64>, EllipticError> {
    let first = coeffs.first().ok_or(EllipticError::MissingCoefficient(0))?;
    let (k, l, w, tau) = (first.k, first.l, first.w, first.tau);
    let mut out = vec![C64::new(0.0, 0.0); l as usize];
    for sigma in t_set_enumerate(k, l, b, c) {
        let e = theta_basis(phi2(&sigma, k, l)?, k, l, u.value, w.value, &tau, pol)?;
        for (o, x) in out.iter_mut().zip(n2_apply(coeffs, phi3(&sigma, k, l))?) {
            *o += e * x;
        }
    }
    Ok(out)
}

/// `max_d |(G^d - F^d)(u) - n_2(α, β_1β_2)_d|`, i.e. the identity
/// `m_3 - m'_3 = n_2(α, β_1 β_2)` at a point `u` not used by the fit.
pub fn end_to_end_residual(
    coeffs: &[HomotopyCoefficients],
    b: i64,
    c: i64,
    u: &LatticeCoordinates,
    opts: &EllipticOptions,
    pol: &TruncationPolicy,
) -> Result<f64, EllipticError> {
    let first = coeffs.first().ok_or(EllipticError::MissingCoefficient(0))?;
    let (k, l, a, w, tau) = (first.k, first.l, first.a, first.w, first.tau);
    let n2 = n2_of_product(coeffs, b, c, u, pol)?;
    let mut worst = 0.0_f64;
    for d in 0..l {
        let q = probe(k, l, a, b, c, d, u, &w, &tau);
        let diff = m3_holomorphic(&q, opts)? - m3_fukaya(&q, opts)?;
        worst = worst.max((diff - n2[d as usize]).norm());
    }
    Ok(worst)
}

/// Residuals of the reversed-order identity
/// `m_3(β_2,β_1,α) - m'_3(β_2,β_1,α) = f_2(β_1β_2, α)` with
/// `f_2(β, α) = n_2(α, β)` (`literal`) and with `f_2(β, α) = -n_2(α, β)`
/// (`corrected`), where `m'_3(β_2,β_1,α) = -F`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SymmetryResiduals {
    pub literal: f64,
    pub corrected: f64,
}

/// `m3_reversed[d]` is the coefficient of `θ_{d/l}(lx+w, lτ)` in
/// `m_3(β_2, β_1, α)` computed independently (e.g. by the quadrature oracle).
pub fn n2_symmetry_residuals(
    coeffs: &[HomotopyCoefficients],
    b: i64,
    c: i64,
    u: &LatticeCoordinates,
    m3_reversed: &[C64],
    opts: &EllipticOptions,
    pol: &TruncationPolicy,
) -> Result<SymmetryResiduals, EllipticError> {
    let first = coeffs.first().ok_or(EllipticError::MissingCoefficient(0))?;
    let (k, l, a, w, tau) = (first.k, first.l, first.a, first.w, first.tau);
    let n2 = n2_of_product(coeffs, b, c, u, pol)?;
    let mut literal = 0.0_f64;
    let mut corrected = 0.0_f64;
    for d in 0..l {
        let q = probe(k, l, a, b, c, d, u, &w, &tau);
        let fukaya_reversed = -m3_fukaya(&q, opts)?;
        let lhs = m3_reversed[d as usize] - fukaya_reversed;
        literal = literal.max((lhs - n2[d as usize]).norm());
        corrected = corrected.max((lhs + n2[d as usize]).norm());
    }
    Ok(SymmetryResiduals { literal, corrected })
}
