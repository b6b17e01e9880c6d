//! Triple products of line bundles on `E_τ = C / (Z + Zτ)`.
//!
//! Conventions: `x = x_1 + τ x_2`, `t = Im τ`, and `L(k, u)` carries the
//! metric weight `exp(-2πt(k x_2² + 2 x_2 u_2))`. The products studied are
//! `m_3(α, β_1, β_2)` with `α ∈ H¹(L(-k, 0))`, `β_1 = θ_{b/k}(kx+u, kτ)`,
//! `β_2 = θ_{c/l}(lx+v, lτ)`, expanded in the basis `θ_{d/l}(lx+w, lτ)` of
//! `H⁰(L(l, w))`, `w = u + v`.

mod fit;
mod series;
mod table;
mod tset;

pub use fit::{
    end_to_end_residual, homotopy_fit, n2_apply, n2_symmetry_residuals, random_u_samples,
    theta_basis, FitDiagnostics, HomotopyCoefficients, SymmetryResiduals,
};
pub use series::{
    fourier_c, h0_basis_norm_sq, lattice_distance, m3_fukaya, m3_holomorphic, m3_homotopy_part,
    n0_for, per1_residual, per2_residual, per5_residual, per6_residual, residue_estimates,
    ResidueEstimates, Side,
};
pub use table::{FitRecord, ProductTable, QueryRecord};
pub use tset::{phi2, phi3, t_set_enumerate, TSetElement};

use serde::{Deserialize, Serialize};

use crate::theta::{Modulus, ThetaError};
use crate::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EllipticError {
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error("degree must be positive, got {0}")]
    InvalidDegree(i64),
    #[error("twist is {distance:e} from the lattice, below the pole margin {margin:e}")]
    PoleProximity { distance: f64, margin: f64 },
    #[error(
        "(w2+d)/l - a/k is {offset:e} from an integer, below the transversality margin {margin:e}"
    )]
    Transversality { offset: f64, margin: f64 },
    #[error("ill-conditioned fit (condition number {0:e})")]
    IllConditioned(f64),
    #[error("{samples} samples cannot determine {unknowns} unknowns")]
    TooFewSamples { samples: usize, unknowns: usize },
    #[error("no homotopy coefficients for d = {0}")]
    MissingCoefficient(i64),
    #[error("characteristic (b/k - c/l + p)kl/r is not an integer for ({b}, {c}, {p})")]
    NonIntegralPhi2 { b: i64, c: i64, p: i64 },
}

/// A point of `C` with its lattice coordinates `z = z_1 + τ z_2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeCoordinates {
    pub value: C64,
    pub z1: f64,
    pub z2: f64,
}

impl LatticeCoordinates {
    pub fn from_value(value: C64, tau: &Modulus) -> Self {
        let z2 = value.im / tau.t();
        let z1 = value.re - tau.tau().re * z2;
        Self { value, z1, z2 }
    }

    pub fn from_coords(z1: f64, z2: f64, tau: &Modulus) -> Self {
        Self {
            value: tau.tau() * z2 + z1,
            z1,
            z2,
        }
    }

    pub fn zero() -> Self {
        Self {
            value: C64::new(0.0, 0.0),
            z1: 0.0,
            z2: 0.0,
        }
    }

    /// Sum computed coordinate-wise, so `w_2 = u_2 + v_2` exactly.
    pub fn add(&self, other: &Self, tau: &Modulus) -> Self {
        Self::from_coords(self.z1 + other.z1, self.z2 + other.z2, tau)
    }

    pub fn neg(&self) -> Self {
        Self {
            value: -self.value,
            z1: -self.z1,
            z2: -self.z2,
        }
    }

    /// `z + p + qτ`.
    pub fn shift(&self, p: f64, q: f64, tau: &Modulus) -> Self {
        Self::from_coords(self.z1 + p, self.z2 + q, tau)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            value: self.value * s,
            z1: self.z1 * s,
            z2: self.z2 * s,
        }
    }
}

/// `L(k, u)` on `E_τ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineBundleSlot {
    pub k: i64,
    pub u: LatticeCoordinates,
    pub tau: Modulus,
}

impl LineBundleSlot {
    pub fn new(k: i64, u: LatticeCoordinates, tau: Modulus) -> Self {
        Self { k, u, tau }
    }

    /// `L(k, u) ⊗ L(k', u') = L(k + k', u + u')`.
    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            k: self.k + other.k,
            u: self.u.add(&other.u, &self.tau),
            tau: self.tau,
        }
    }

    pub fn dual(&self) -> Self {
        Self {
            k: -self.k,
            u: self.u.neg(),
            tau: self.tau,
        }
    }

    /// `L(k, u) ≅ L(k, u + p + qτ)`.
    pub fn shifted(&self, p: f64, q: f64) -> Self {
        Self {
            u: self.u.shift(p, q, &self.tau),
            ..*self
        }
    }
}

/// Which form of the holomorphic lattice sum to use. `AsDisplayed` reads the
/// denominator and the quadratic form with `γ = mτ + n`; `Flipped` uses
/// `γ = mτ - n` there while keeping the phases unchanged. Only `AsDisplayed`
/// agrees with the quadrature oracle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum GammaConvention {
    #[default]
    AsDisplayed,
    Flipped,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticOptions {
    /// Target tail bound for the series, relative to `max(1, largest term)`.
    pub eps: f64,
    /// Minimum distance of `u` from the lattice.
    pub pole_margin: f64,
    /// Minimum distance of `(w_2 + d)/l - a/k` from an integer, unless it is
    /// an integer to rounding accuracy.
    pub transversality_margin: f64,
    pub convention: GammaConvention,
}

impl Default for EllipticOptions {
    fn default() -> Self {
        Self {
            eps: 1e-16,
            pole_margin: 1e-3,
            transversality_margin: 1e-6,
            convention: GammaConvention::AsDisplayed,
        }
    }
}

/// The data of `m_3(α, β_1, β_2)` and its coefficient index `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleProductQuery {
    pub k: i64,
    pub l: i64,
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
    pub u: LatticeCoordinates,
    pub v: LatticeCoordinates,
    pub tau: Modulus,
}

impl TripleProductQuery {
    /// Residues are stored reduced: `a, b ∈ [0, k)`, `c, d ∈ [0, l)`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        k: i64,
        l: i64,
        a: i64,
        b: i64,
        c: i64,
        d: i64,
        u: C64,
        v: C64,
        tau: C64,
    ) -> Result<Self, EllipticError> {
        if k <= 0 {
            return Err(EllipticError::InvalidDegree(k));
        }
        if l <= 0 {
            return Err(EllipticError::InvalidDegree(l));
        }
        let tau = Modulus::new(tau)?;
        Ok(Self {
            k,
            l,
            a: a.rem_euclid(k),
            b: b.rem_euclid(k),
            c: c.rem_euclid(l),
            d: d.rem_euclid(l),
            u: LatticeCoordinates::from_value(u, &tau),
            v: LatticeCoordinates::from_value(v, &tau),
            tau,
        })
    }

    pub fn w(&self) -> LatticeCoordinates {
        self.u.add(&self.v, &self.tau)
    }

    /// Same query with `u` replaced and `w` kept fixed.
    pub fn with_u_fixed_w(&self, u: LatticeCoordinates) -> Self {
        let w = self.w();
        Self {
            u,
            v: LatticeCoordinates::from_coords(w.z1 - u.z1, w.z2 - u.z2, &self.tau),
            ..*self
        }
    }

    pub fn with_bc(&self, b: i64, c: i64) -> Self {
        Self {
            b: b.rem_euclid(self.k),
            c: c.rem_euclid(self.l),
            ..*self
        }
    }
}
