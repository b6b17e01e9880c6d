//! Closed-form coefficients: norms, Fourier coefficients, the holomorphic
//! lattice sum `G`, the Fukaya series `F` and their periodicity relations.

use num_integer::Integer;
use serde::Serialize;
use std::f64::consts::PI;

use super::{
    EllipticError, EllipticOptions, GammaConvention, LatticeCoordinates, TripleProductQuery,
};
use crate::linalg::CompensatedSum;
use crate::theta::Modulus;
use crate::{C64, I};

/// Integers below this distance from `(w_2 + d)/l - a/k` count as exact hits.
const INTEGRALITY_TOL: f64 = 1e-12;

/// `‖θ_{a/k}(kx+u, kτ)‖² = exp(2πt u_2²/k) / √(2tk)`, independent of `a`.
pub fn h0_basis_norm_sq(
    k: i64,
    u: &LatticeCoordinates,
    tau: &Modulus,
) -> Result<f64, EllipticError> {
    if k <= 0 {
        return Err(EllipticError::InvalidDegree(k));
    }
    let t = tau.t();
    let k = k as f64;
    Ok((2.0 * PI * t * u.z2 * u.z2 / k).exp() / (2.0 * t * k).sqrt())
}

/// Fourier coefficient of `θ_{b/k}(kx+u) conj(θ_{a/k}(kx+v)) exp(-2πt(kx_2² + 2x_2v_2))`
/// against `exp(2πi(m x_1 + (n - u + v) x_2))`; zero unless `m ≡ b - a (k)`,
/// otherwise, with `γ = mτ - n`,
/// `exp(-π/(2tk)(|γ|² + 2γ̄u - 2γv̄ + (u - v̄)²) + (πin/k)(m + 2a)) / √(2tk)`.
#[allow(clippy::too_many_arguments)]
pub fn fourier_c(
    m: i64,
    n: i64,
    k: i64,
    a: i64,
    b: i64,
    u: C64,
    v: C64,
    tau: &Modulus,
) -> Result<C64, EllipticError> {
    if k <= 0 {
        return Err(EllipticError::InvalidDegree(k));
    }
    if (m - (b - a)).rem_euclid(k) != 0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let t = tau.t();
    let kf = k as f64;
    let g = tau.tau() * m as f64 - n as f64;
    let uv = u - v.conj();
    let quad = g.norm_sqr() + 2.0 * g.conj() * u - 2.0 * g * v.conj() + uv * uv;
    let e = -PI / (2.0 * t * kf) * quad + I * PI * n as f64 / kf * (m + 2 * a) as f64;
    Ok(e.exp() / (2.0 * t * kf).sqrt())
}

/// Distance from `z` to the nearest point of `Z + Zτ`.
pub fn lattice_distance(z: &LatticeCoordinates, tau: &Modulus) -> f64 {
    let q0 = z.z2.round();
    let mut best = f64::INFINITY;
    for dq in -1..=1 {
        let q = q0 + dq as f64;
        let re = z.value.re - tau.tau().re * q;
        let p0 = re.round();
        for dp in -1..=1 {
            let p = p0 + dp as f64;
            best = best.min((z.value - tau.tau() * q - p).norm());
        }
    }
    best
}

fn check_pole(q: &TripleProductQuery, opts: &EllipticOptions) -> Result<(), EllipticError> {
    let distance = lattice_distance(&q.u, &q.tau);
    if distance < opts.pole_margin {
        return Err(EllipticError::PoleProximity {
            distance,
            margin: opts.pole_margin,
        });
    }
    Ok(())
}

/// Least non-negative `m_0` and step `lcm(k, l)` of `m ≡ b-a (k), m ≡ d-c (l)`,
/// or `None` when the congruences are incompatible.
fn crt_class(q: &TripleProductQuery) -> Option<(i64, i64)> {
    let step = q.k.lcm(&q.l);
    (0..step)
        .find(|m| (m - (q.b - q.a)).rem_euclid(q.k) == 0 && (m - (q.d - q.c)).rem_euclid(q.l) == 0)
        .map(|m0| (m0, step))
}

/// First member of the class `m0 + step Z` that is `≥ lo`.
fn class_start(m0: i64, step: i64, lo: f64) -> i64 {
    let j = ((lo - m0 as f64) / step as f64).ceil() as i64;
    m0 + j * step
}

/// `G^d_{a,b,c}(u, w)`:
///
/// ```text
/// Σ_{γ = mτ+n, m ≡ b-a (k), m ≡ d-c (l)}
///   exp(-(π(k+l)/2tkl) Q(γ,u) + (2πi/l)((u+n)w_2 - m w_1) + πin((m+2c)/l - (m+2a)/k)) / (γ + u)
/// ```
///
/// with `Q(γ,u) = |γ|² + 2γ̄u + u²`. Terms are bounded by
/// `g · exp(-c|γ+u|²)/|γ+u|` with `c = π(k+l)/(2tkl)` and
/// `g = exp(2c (Im u)² - 2π Im(u) w_2 / l)`; summing `|γ+u| ≤ R` over a
/// lattice with cell area `t` and diameter `δ` leaves at most
/// `g π exp(-c(R-δ)²) / (c t (R-δ))`.
pub fn m3_holomorphic(
    q: &TripleProductQuery,
    opts: &EllipticOptions,
) -> Result<C64, EllipticError> {
    check_pole(q, opts)?;
    let Some((m0, step)) = crt_class(q) else {
        return Ok(C64::new(0.0, 0.0));
    };
    let tau = q.tau.tau();
    let t = q.tau.t();
    let (k, l) = (q.k as f64, q.l as f64);
    let u = q.u.value;
    let w = q.w();
    let c = PI * (k + l) / (2.0 * t * k * l);
    let global = (2.0 * c * u.im * u.im - 2.0 * PI * u.im * w.z2 / l).exp();
    let delta = 1.0 + tau.norm();
    let target = opts.eps * global.max(1.0);
    let bound = |r: f64| global * PI * (-c * (r - delta).powi(2)).exp() / (c * t * (r - delta));
    let mut r = delta + 1.0;
    while bound(r) >= target {
        r += 0.25;
    }
    let flip = opts.convention == GammaConvention::Flipped;
    let mut acc = CompensatedSum::new();
    let mut m = class_start(m0, step, (-u.im - r) / t);
    while (m as f64) * t <= -u.im + r {
        let mf = m as f64;
        let centre = -(tau.re * mf + u.re);
        let (lo, hi) = if flip {
            (-centre - r, -centre + r)
        } else {
            (centre - r, centre + r)
        };
        for n in (lo.ceil() as i64)..=(hi.floor() as i64) {
            let nf = n as f64;
            let g = if flip { tau * mf - nf } else { tau * mf + nf };
            let quad = g.norm_sqr() + 2.0 * g.conj() * u + u * u;
            let e = -c * quad
                + 2.0 * PI * I / l * ((u + nf) * w.z2 - mf * w.z1)
                + PI * I * nf * ((mf + 2.0 * q.c as f64) / l - (mf + 2.0 * q.a as f64) / k);
            acc.add(e.exp() / (g + u));
        }
        m += step;
    }
    Ok(acc.value())
}

/// `n_0 = ⌈(w_2 + d)/l - a/k⌉`, checked against the transversality margin.
pub fn n0_for(q: &TripleProductQuery, opts: &EllipticOptions) -> Result<i64, EllipticError> {
    let x = (q.w().z2 + q.d as f64) / q.l as f64 - q.a as f64 / q.k as f64;
    let offset = (x - x.round()).abs();
    if offset <= INTEGRALITY_TOL {
        return Ok(x.round() as i64);
    }
    if offset < opts.transversality_margin {
        return Err(EllipticError::Transversality {
            offset,
            margin: opts.transversality_margin,
        });
    }
    Ok(x.ceil() as i64)
}

/// `F^d_{a,b,c}(u, w)`:
///
/// ```text
/// -2πi Σ_{m ≡ b-a (k), m ≡ d-c (l)}
///   exp((πi(k+l)/kl)(τm² + 2mu) - 2πimw/l + 2πi(mτ+u)(n_0 - d/l + a/k)) / (1 - exp(2πi(mτ+u)))
/// ```
///
/// The log-modulus of the numerator is a concave quadratic `-α m² + β m + C`
/// with `α = πt(k+l)/kl`; once `|mt + Im u| ≥ 1` the denominator exceeds
/// `0.99`, which gives a Gaussian tail bound around the vertex.
pub fn m3_fukaya(q: &TripleProductQuery, opts: &EllipticOptions) -> Result<C64, EllipticError> {
    check_pole(q, opts)?;
    let n0 = n0_for(q, opts)?;
    let Some((m0, step)) = crt_class(q) else {
        return Ok(C64::new(0.0, 0.0));
    };
    let tau = q.tau.tau();
    let t = q.tau.t();
    let (k, l) = (q.k as f64, q.l as f64);
    let u = q.u.value;
    let w = q.w().value;
    let s = n0 as f64 - q.d as f64 / l + q.a as f64 / k;
    let alpha = PI * t * (k + l) / (k * l);
    let beta = -2.0 * PI * (k + l) * u.im / (k * l) + 2.0 * PI * w.im / l - 2.0 * PI * s * t;
    let cst = -2.0 * PI * s * u.im;
    let mv = beta / (2.0 * alpha);
    let log_peak = alpha * mv * mv + cst;
    let target_log = opts.eps.ln() + log_peak.max(0.0);
    let tail_log =
        |r: f64| log_peak - alpha * r * r + (2.0 / (1.0 - (-2.0 * alpha * r).exp()) / 0.99).ln();
    let mut r = ((mv + u.im / t).abs() + 1.0 / t + 1.0).max(1.0);
    while tail_log(r) >= target_log {
        r += 0.5;
    }
    let mut acc = CompensatedSum::new();
    let mut m = class_start(m0, step, mv - r);
    while (m as f64) <= mv + r {
        let mf = m as f64;
        let z = tau * mf + u;
        let e = PI * I * (k + l) / (k * l) * (tau * mf * mf + 2.0 * mf * u)
            - 2.0 * PI * I * mf * w / l
            + 2.0 * PI * I * z * s;
        acc.add(e.exp() / (1.0 - (2.0 * PI * I * z).exp()));
        m += step;
    }
    Ok(acc.value() * (-2.0 * PI * I))
}

/// `H = G - F`.
pub fn m3_homotopy_part(
    q: &TripleProductQuery,
    opts: &EllipticOptions,
) -> Result<C64, EllipticError> {
    Ok(m3_holomorphic(q, opts)? - m3_fukaya(q, opts)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Holomorphic,
    Fukaya,
    Homotopy,
}

impl Side {
    pub fn eval(
        &self,
        q: &TripleProductQuery,
        opts: &EllipticOptions,
    ) -> Result<C64, EllipticError> {
        match self {
            Side::Holomorphic => m3_holomorphic(q, opts),
            Side::Fukaya => m3_fukaya(q, opts),
            Side::Homotopy => m3_homotopy_part(q, opts),
        }
    }
}

fn rel(lhs: C64, rhs: C64) -> f64 {
    (lhs - rhs).norm() / rhs.norm().max(1.0)
}

/// `f(u+1) = exp(2πi(b/k - c/l)) f(u)` at fixed `w`; residual relative to
/// `max(1, |rhs|)`.
pub fn per1_residual(
    side: Side,
    q: &TripleProductQuery,
    opts: &EllipticOptions,
) -> Result<f64, EllipticError> {
    let shifted = q.with_u_fixed_w(q.u.shift(1.0, 0.0, &q.tau));
    let lhs = side.eval(&shifted, opts)?;
    let phase = (2.0 * PI * I * (q.b as f64 / q.k as f64 - q.c as f64 / q.l as f64)).exp();
    Ok(rel(lhs, phase * side.eval(q, opts)?))
}

/// `f_{b,c}(u+τ) = exp(-(πi(k+l)/kl)(2u+τ) + 2πiw/l) f_{b+1,c-1}(u)`.
pub fn per2_residual(
    side: Side,
    q: &TripleProductQuery,
    opts: &EllipticOptions,
) -> Result<f64, EllipticError> {
    let (k, l) = (q.k as f64, q.l as f64);
    let shifted = q.with_u_fixed_w(q.u.shift(0.0, 1.0, &q.tau));
    let lhs = side.eval(&shifted, opts)?;
    let u = q.u.value;
    let factor = (-PI * I * (k + l) / (k * l) * (2.0 * u + q.tau.tau())
        + 2.0 * PI * I * q.w().value / l)
        .exp();
    let rhs = factor * side.eval(&q.with_bc(q.b + 1, q.c - 1), opts)?;
    Ok(rel(lhs, rhs))
}

/// `H(u + kl/r) = H(u)`, evaluated directly.
pub fn per5_residual(q: &TripleProductQuery, opts: &EllipticOptions) -> Result<f64, EllipticError> {
    let p = (q.k * q.l / q.k.gcd(&q.l)) as f64;
    let lhs = m3_homotopy_part(&q.with_u_fixed_w(q.u.shift(p, 0.0, &q.tau)), opts)?;
    Ok(rel(lhs, m3_homotopy_part(q, opts)?))
}

/// `H(u + (kl/r)τ) = exp(-πiNτ - 2πi((k+l)u - kw)/r) H(u)`, `N = (k+l)kl/r²`.
pub fn per6_residual(q: &TripleProductQuery, opts: &EllipticOptions) -> Result<f64, EllipticError> {
    let r = q.k.gcd(&q.l);
    let p = (q.k * q.l / r) as f64;
    let n = ((q.k + q.l) * q.k * q.l / (r * r)) as f64;
    let lhs = m3_homotopy_part(&q.with_u_fixed_w(q.u.shift(0.0, p, &q.tau)), opts)?;
    let u = q.u.value;
    let w = q.w().value;
    let factor = (-PI * I * n * q.tau.tau()
        - 2.0 * PI * I * (u * (q.k + q.l) as f64 - w * q.k as f64) / r as f64)
        .exp();
    Ok(rel(lhs, factor * m3_homotopy_part(q, opts)?))
}

/// Residue diagnostics at `u` (with `w` fixed).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResidueEstimates {
    pub u_abs: f64,
    /// `|u G(u) - 1|`.
    pub g: f64,
    /// `|u F(u) - 1|`.
    pub f: f64,
    /// `|u (G - F)(u)|`.
    pub h: f64,
    /// `|(u G(u) - u G(-u))/2 - 1|`, which cancels the `O(u)` term.
    pub g_symmetric: f64,
    pub f_symmetric: f64,
}

pub fn residue_estimates(
    q: &TripleProductQuery,
    u: C64,
    opts: &EllipticOptions,
) -> Result<ResidueEstimates, EllipticError> {
    let mut o = *opts;
    o.pole_margin = o.pole_margin.min(0.5 * u.norm());
    let at = |z: C64| q.with_u_fixed_w(LatticeCoordinates::from_value(z, &q.tau));
    let (qp, qm) = (at(u), at(-u));
    let (gp, gm) = (m3_holomorphic(&qp, &o)?, m3_holomorphic(&qm, &o)?);
    let (fp, fm) = (m3_fukaya(&qp, &o)?, m3_fukaya(&qm, &o)?);
    let one = C64::new(1.0, 0.0);
    Ok(ResidueEstimates {
        u_abs: u.norm(),
        g: (u * gp - one).norm(),
        f: (u * fp - one).norm(),
        h: (u * (gp - fp)).norm(),
        g_symmetric: ((u * gp - u * gm) * 0.5 - one).norm(),
        f_symmetric: ((u * fp - u * fm) * 0.5 - one).norm(),
    })
}
