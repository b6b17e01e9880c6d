//! Theta functions with rational characteristics.
//!
//! `θ_r(x, τ) = Σ_n exp(πiτ(n+r)² + 2πi(n+r)x)`, with `θ = θ_0`.
//!
//! Truncation: writing `y = Im x` and `t = Im τ`,
//! `|term_n| = exp(πy²/t) · exp(-πt(n + r + y/t)²)`, so the terms are a
//! Gaussian centred at `c = -r - y/t`. Keeping `|n - c| ≤ D` leaves a tail of
//! at most `exp(πy²/t) · 2 exp(-πtD²) / (1 - exp(-2πtD))`, which is the
//! bound used to pick `D`.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::linalg::CompensatedSum;
use crate::{C64, I};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ThetaError {
    #[error("modulus must have positive imaginary part, got Im τ = {0}")]
    InvalidModulus(f64),
    #[error("characteristic denominator must be positive, got {0}")]
    InvalidDenominator(i64),
    #[error("tail bound {eps:e} needs {needed} terms, cap is {max_terms}")]
    TruncationExceeded {
        eps: f64,
        needed: usize,
        max_terms: usize,
    },
    #[error("invalid truncation policy: {0}")]
    InvalidPolicy(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Modulus {
    tau: C64,
}

impl Modulus {
    pub fn new(tau: C64) -> Result<Self, ThetaError> {
        if !tau.re.is_finite() || !tau.im.is_finite() || tau.im <= 0.0 {
            return Err(ThetaError::InvalidModulus(tau.im));
        }
        Ok(Self { tau })
    }

    pub fn tau(&self) -> C64 {
        self.tau
    }

    /// `Im τ`.
    pub fn t(&self) -> f64 {
        self.tau.im
    }

    /// The modulus `n τ` for `n > 0`.
    pub fn scaled(&self, n: i64) -> Self {
        assert!(n > 0);
        Self {
            tau: self.tau * n as f64,
        }
    }
}

/// Reduced fraction in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Characteristic {
    numerator: i64,
    denominator: i64,
}

impl Characteristic {
    pub fn new(numerator: i64, denominator: i64) -> Result<Self, ThetaError> {
        if denominator <= 0 {
            return Err(ThetaError::InvalidDenominator(denominator));
        }
        let num = numerator.rem_euclid(denominator);
        let g = num.gcd(&denominator).max(1);
        Ok(Self {
            numerator: num / g,
            denominator: denominator / g,
        })
    }

    pub fn zero() -> Self {
        Self {
            numerator: 0,
            denominator: 1,
        }
    }

    pub fn numerator(&self) -> i64 {
        self.numerator
    }

    pub fn denominator(&self) -> i64 {
        self.denominator
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

impl std::str::FromStr for Characteristic {
    type Err = String;

    /// `"p/q"` or an integer.
    fn from_str(s: &str) -> Result<Self, String> {
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s.trim(), "1"),
        };
        let p: i64 = p.parse().map_err(|e| format!("numerator: {e}"))?;
        let q: i64 = q.parse().map_err(|e| format!("denominator: {e}"))?;
        Characteristic::new(p, q).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Target absolute tail bound.
    pub eps: f64,
    /// Cap on the number of summed terms.
    pub max_terms: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            eps: 1e-16,
            max_terms: 100_000,
        }
    }
}

impl TruncationPolicy {
    pub fn new(eps: f64, max_terms: usize) -> Result<Self, ThetaError> {
        if !eps.is_finite() || eps <= 0.0 {
            return Err(ThetaError::InvalidPolicy(format!("eps = {eps}")));
        }
        if max_terms == 0 {
            return Err(ThetaError::InvalidPolicy("max_terms = 0".into()));
        }
        Ok(Self { eps, max_terms })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaValue {
    pub value: C64,
    pub terms_used: usize,
}

/// Gaussian tail bound for `Σ_{|n-c|>D}` with prefactor `exp(πy²/t)`.
pub fn tail_bound(y: f64, t: f64, d: f64) -> f64 {
    let q = (-2.0 * PI * t * d).exp();
    (PI * y * y / t).exp() * 2.0 * (-PI * t * d * d).exp() / (1.0 - q)
}

/// Smallest integer radius `D ≥ 1` with `tail_bound(y, t, D) < eps`.
pub fn radius_for(y: f64, t: f64, eps: f64) -> usize {
    // ln of the bound is quadratic in D; start from the Gaussian estimate.
    let guess = ((PI * y * y / t + (2.0 / eps).ln()) / (PI * t))
        .max(0.0)
        .sqrt();
    let mut d = (guess.floor() as usize).max(1);
    while d > 1 && tail_bound(y, t, (d - 1) as f64) < eps {
        d -= 1;
    }
    while tail_bound(y, t, d as f64) >= eps {
        d += 1;
    }
    d
}

/// `Σ_{n=n_c-J}^{n_c+J} exp(πiτ(n+r)² + 2πi(n+r)x)` around the peak `n_c`,
/// summed centre-out in symmetric pairs with compensation.
pub fn theta_window(r: f64, x: C64, tau: &Modulus, half_width: usize) -> C64 {
    let t = tau.t();
    let centre = (-r - x.im / t).round() as i64;
    let term = |n: i64| {
        let m = n as f64 + r;
        (I * PI * tau.tau() * m * m + 2.0 * PI * I * m * x).exp()
    };
    let mut acc = CompensatedSum::new();
    acc.add(term(centre));
    for j in 1..=half_width as i64 {
        acc.add(term(centre + j) + term(centre - j));
    }
    acc.value()
}

/// `θ` with real shift `r` and certified truncation.
pub fn theta_shifted(
    r: f64,
    x: C64,
    tau: &Modulus,
    pol: &TruncationPolicy,
) -> Result<ThetaValue, ThetaError> {
    let t = tau.t();
    // After rounding the centre the peak sits within 1/2 of an integer.
    let d = radius_for(x.im, t, pol.eps) + 1;
    let needed = 2 * d + 1;
    if needed > pol.max_terms {
        return Err(ThetaError::TruncationExceeded {
            eps: pol.eps,
            needed,
            max_terms: pol.max_terms,
        });
    }
    Ok(ThetaValue {
        value: theta_window(r, x, tau, d),
        terms_used: needed,
    })
}

/// `θ(x, τ)`.
pub fn theta(x: C64, tau: &Modulus, pol: &TruncationPolicy) -> Result<C64, ThetaError> {
    theta_shifted(0.0, x, tau, pol).map(|v| v.value)
}

/// `θ_r(x, τ)` from its defining series.
pub fn theta_char(
    r: &Characteristic,
    x: C64,
    tau: &Modulus,
    pol: &TruncationPolicy,
) -> Result<C64, ThetaError> {
    theta_shifted(r.value(), x, tau, pol).map(|v| v.value)
}

/// `exp(πiτr² + 2πirx) θ(x + rτ, τ)`.
pub fn theta_char_explicit(
    r: &Characteristic,
    x: C64,
    tau: &Modulus,
    pol: &TruncationPolicy,
) -> Result<C64, ThetaError> {
    let rv = r.value();
    let pre = (I * PI * tau.tau() * rv * rv + 2.0 * PI * I * rv * x).exp();
    Ok(pre * theta(x + tau.tau() * rv, tau, pol)?)
}

/// Both sides of the addition formula
///
/// `θ_{b/k}(kx+u, kτ) θ_{c/l}(lx+v, lτ)
///   = Σ_p θ_{(b/k - c/l + p) r/(k+l)}(((k+l)u - kw)/r, Nτ) θ_{(b+c+kp)/(k+l)}((k+l)x + w, (k+l)τ)`
///
/// with `w = u + v`, `r = gcd(k, l)`, `N = (k+l)kl/r²` and `p` over
/// `0..(k+l)/r`.
#[allow(clippy::too_many_arguments)]
pub fn addition_formula_sides(
    k: i64,
    l: i64,
    b: i64,
    c: i64,
    u: C64,
    v: C64,
    x: C64,
    tau: &Modulus,
    pol: &TruncationPolicy,
) -> Result<(C64, C64), ThetaError> {
    assert!(k > 0 && l > 0, "degrees must be positive");
    let w = u + v;
    let r = k.gcd(&l);
    let n = (k + l) * k * l / (r * r);
    let tt = tau.tau();
    let lhs = theta_char(
        &Characteristic::new(b, k)?,
        x * k as f64 + u,
        &tau.scaled(k),
        pol,
    )? * theta_char(
        &Characteristic::new(c, l)?,
        x * l as f64 + v,
        &tau.scaled(l),
        pol,
    )?;
    let z1 = (u * (k + l) as f64 - w * k as f64) / r as f64;
    let z2 = x * (k + l) as f64 + w;
    let mut acc = CompensatedSum::new();
    for p in 0..(k + l) / r {
        // (b/k - c/l + p)·kl/r is an integer.
        let phi2 = (b * l - c * k + p * k * l) / r;
        let phi3 = b + c + k * p;
        let t1 = theta_char(
            &Characteristic::new(phi2, n)?,
            z1,
            &Modulus::new(tt * n as f64)?,
            pol,
        )?;
        let t2 = theta_char(
            &Characteristic::new(phi3, k + l)?,
            z2,
            &tau.scaled(k + l),
            pol,
        )?;
        acc.add(t1 * t2);
    }
    Ok((lhs, acc.value()))
}

/// `|lhs - rhs| / max(1, |lhs|)` of [`addition_formula_sides`]; theta values
/// grow like `exp(π (Im x)² / Im τ)`, so the absolute gap is only meaningful
/// relative to the size of the sides.
#[allow(clippy::too_many_arguments)]
pub fn addition_formula_residual(
    k: i64,
    l: i64,
    b: i64,
    c: i64,
    u: C64,
    v: C64,
    x: C64,
    tau: &Modulus,
    pol: &TruncationPolicy,
) -> Result<f64, ThetaError> {
    let (lhs, rhs) = addition_formula_sides(k, l, b, c, u, v, x, tau, pol)?;
    Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
}
