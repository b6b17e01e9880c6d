//! Brute-force recomputation of the elliptic triple products: sections are
//! sampled on an `N × N` grid over the fundamental domain, products are taken
//! pointwise, `∂̄` is inverted mode by mode on `L(0, u)`, and harmonic parts are
//! extracted by quadrature against theta bases.
//!
//! A section of `L(k, u)` is stored through its values at `x = x_1 + τ x_2`,
//! `(x_1, x_2) ∈ [0, 1)²`. These trivializations are multiplicative, so
//! products of sections are pointwise products of samples. A `(0,1)`-form is
//! stored through its `dx̄` coefficient.

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::elliptic::{
    lattice_distance, EllipticError, LatticeCoordinates, LineBundleSlot, TripleProductQuery,
};
use crate::linalg::CompensatedSum;
use crate::theta::{theta_char, Characteristic, Modulus, ThetaError, TruncationPolicy};
use crate::{C64, I};

/// Twists closer than this in lattice coordinates are treated as equal.
const SLOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error("grid size {0} is not a power of two")]
    InvalidGrid(usize),
    #[error("mode cutoff {cutoff} does not fit a grid of size {n}")]
    InvalidCutoff { cutoff: usize, n: usize },
    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },
    #[error("non-finite sample")]
    NonFinite,
    #[error("degree must be positive, got {0}")]
    InvalidDegree(i64),
    #[error("sections live in different bundles or grids")]
    BundleMismatch,
    #[error("form types do not match")]
    FormMismatch,
    #[error(
        "slots are not dual: degrees sum to {k}, twist sum ({z1}, {z2}) is not a lattice point"
    )]
    NonDual { k: i64, z1: f64, z2: f64 },
    #[error("Fourier tail {tail:e} beyond the cutoff exceeds {tol:e}; increase M or N")]
    TailTooLarge { tail: f64, tol: f64 },
    #[error("twist is {distance:e} from the lattice, below the pole margin {margin:e}")]
    PoleProximity { distance: f64, margin: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Coefficient of `1` or of `dx̄`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormType {
    Function,
    OneForm,
}

impl FormType {
    pub fn degree(self) -> u8 {
        match self {
            FormType::Function => 0,
            FormType::OneForm => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Grid points per direction.
    pub n: usize,
    /// Fourier modes `|m|, |n| ≤ cutoff` are kept.
    pub cutoff: usize,
    /// Largest discarded Fourier coefficient, relative to `max(1, peak)`.
    pub tail_tol: f64,
    pub pole_margin: f64,
    pub truncation: TruncationPolicy,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            n: 256,
            cutoff: 64,
            tail_tol: 1e-10,
            pole_margin: 1e-3,
            truncation: TruncationPolicy::default(),
        }
    }
}

impl OracleOptions {
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.n < 2 || !self.n.is_power_of_two() {
            return Err(OracleError::InvalidGrid(self.n));
        }
        if 2 * self.cutoff >= self.n {
            return Err(OracleError::InvalidCutoff {
                cutoff: self.cutoff,
                n: self.n,
            });
        }
        Ok(())
    }
}

fn same_twist(a: &LatticeCoordinates, b: &LatticeCoordinates) -> bool {
    (a.z1 - b.z1).abs() <= SLOT_TOL && (a.z2 - b.z2).abs() <= SLOT_TOL
}

fn same_slot(a: &LineBundleSlot, b: &LineBundleSlot) -> bool {
    a.k == b.k && same_twist(&a.u, &b.u) && a.tau == b.tau
}

/// Samples of a section or `(0,1)`-form, `values[i1 * n + i2]` at
/// `x = i1/n + τ i2/n`.
#[derive(Clone, Debug)]
pub struct GridSection {
    bundle: LineBundleSlot,
    form: FormType,
    n: usize,
    values: Vec<C64>,
}

impl GridSection {
    pub fn new(
        bundle: LineBundleSlot,
        form: FormType,
        n: usize,
        values: Vec<C64>,
    ) -> Result<Self, OracleError> {
        if n < 2 || !n.is_power_of_two() {
            return Err(OracleError::InvalidGrid(n));
        }
        if values.len() != n * n {
            return Err(OracleError::SampleCount {
                expected: n * n,
                got: values.len(),
            });
        }
        if values
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(OracleError::NonFinite);
        }
        Ok(Self {
            bundle,
            form,
            n,
            values,
        })
    }

    /// Samples `f(x_1, x_2)` in parallel.
    pub fn from_fn<F>(
        bundle: LineBundleSlot,
        form: FormType,
        n: usize,
        f: F,
    ) -> Result<Self, OracleError>
    where
        F: Fn(f64, f64) -> Result<C64, OracleError> + Sync,
    {
        let step = 1.0 / n as f64;
        let values = (0..n * n)
            .into_par_iter()
            .map(|idx| f((idx / n) as f64 * step, (idx % n) as f64 * step))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(bundle, form, n, values)
    }

    pub fn zero(bundle: LineBundleSlot, form: FormType, n: usize) -> Result<Self, OracleError> {
        Self::new(bundle, form, n, vec![C64::new(0.0, 0.0); n * n])
    }

    pub fn bundle(&self) -> &LineBundleSlot {
        &self.bundle
    }

    pub fn form(&self) -> FormType {
        self.form
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn at(&self, i1: usize, i2: usize) -> C64 {
        self.values[i1 * self.n + i2]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            values: self.values.iter().map(|z| z * c).collect(),
            ..self.clone()
        }
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: C64, other: &Self) -> Result<Self, OracleError> {
        if self.n != other.n || !same_slot(&self.bundle, &other.bundle) {
            return Err(OracleError::BundleMismatch);
        }
        if self.form != other.form {
            return Err(OracleError::FormMismatch);
        }
        Ok(Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
            ..self.clone()
        })
    }

    /// Pointwise product in `L(k + k', u + u')`. The product of two
    /// `(0,1)`-forms vanishes on a curve and is rejected.
    pub fn mul(&self, other: &Self) -> Result<Self, OracleError> {
        if self.n != other.n || self.bundle.tau != other.bundle.tau {
            return Err(OracleError::BundleMismatch);
        }
        let form = match (self.form, other.form) {
            (FormType::Function, f) | (f, FormType::Function) => f,
            _ => return Err(OracleError::FormMismatch),
        };
        Ok(Self {
            bundle: self.bundle.tensor(&other.bundle),
            form,
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    /// The samples of a coarser grid of size `n`, which must divide `self.n`.
    pub fn subsample(&self, n: usize) -> Result<Self, OracleError> {
        if n == 0 || !self.n.is_multiple_of(n) {
            return Err(OracleError::InvalidGrid(n));
        }
        let s = self.n / n;
        let values = (0..n * n)
            .map(|idx| self.at((idx / n) * s, (idx % n) * s))
            .collect();
        Self::new(self.bundle, self.form, n, values)
    }
}

/// `exp(-2πt(k x_2² + 2 x_2 u_2))`, the metric weight of `L(k, u)`.
pub fn metric_weight(bundle: &LineBundleSlot, x2: f64) -> f64 {
    let t = bundle.tau.t();
    (-2.0 * PI * t * (bundle.k as f64 * x2 * x2 + 2.0 * x2 * bundle.u.z2)).exp()
}

fn grid_point(x1: f64, x2: f64, tau: &Modulus) -> C64 {
    tau.tau() * x2 + x1
}

/// `θ_r(kx + u, kτ)` as a section of `L(k, u)`, `k > 0`.
pub fn sample_theta_section(
    k: i64,
    r: &Characteristic,
    u: &LatticeCoordinates,
    tau: &Modulus,
    n: usize,
    pol: &TruncationPolicy,
) -> Result<GridSection, OracleError> {
    if k <= 0 {
        return Err(OracleError::InvalidDegree(k));
    }
    let ktau = tau.scaled(k);
    let kf = k as f64;
    GridSection::from_fn(
        LineBundleSlot::new(k, *u, *tau),
        FormType::Function,
        n,
        |x1, x2| {
            Ok(theta_char(
                r,
                grid_point(x1, x2, tau) * kf + u.value,
                &ktau,
                pol,
            )?)
        },
    )
}

/// Basis element `θ_{a/k}(kx + u, kτ)` of `H⁰(L(k, u))`.
pub fn sample_h0_basis(
    k: i64,
    a: i64,
    u: &LatticeCoordinates,
    tau: &Modulus,
    n: usize,
    pol: &TruncationPolicy,
) -> Result<GridSection, OracleError> {
    if k <= 0 {
        return Err(OracleError::InvalidDegree(k));
    }
    sample_theta_section(k, &Characteristic::new(a, k)?, u, tau, n, pol)
}

/// `π√(2k)/√t`, the factor attached to the `H¹` class in the triple products.
pub fn h1_normalization(k: i64, tau: &Modulus) -> f64 {
    PI * (2.0 * k as f64).sqrt() / tau.t().sqrt()
}

/// Basis element `conj(θ_{a/k}(kx + u, kτ)) exp(-2πt(k x_2² + 2 x_2 u_2)) dx̄`
/// of `H¹(L(-k, -u))`, `k > 0`, optionally times [`h1_normalization`].
pub fn sample_h1_basis(
    k: i64,
    a: i64,
    u: &LatticeCoordinates,
    tau: &Modulus,
    n: usize,
    normalized: bool,
    pol: &TruncationPolicy,
) -> Result<GridSection, OracleError> {
    if k <= 0 {
        return Err(OracleError::InvalidDegree(k));
    }
    let r = Characteristic::new(a, k)?;
    let ktau = tau.scaled(k);
    let kf = k as f64;
    let t = tau.t();
    let factor = if normalized {
        h1_normalization(k, tau)
    } else {
        1.0
    };
    let slot = LineBundleSlot::new(-k, u.neg(), *tau);
    GridSection::from_fn(slot, FormType::OneForm, n, |x1, x2| {
        let th = theta_char(&r, grid_point(x1, x2, tau) * kf + u.value, &ktau, pol)?;
        let w = (-2.0 * PI * t * (kf * x2 * x2 + 2.0 * x2 * u.z2)).exp();
        Ok(th.conj() * (w * factor))
    })
}

fn weighted_mean(values: impl IndexedParallelIterator<Item = C64>) -> C64 {
    let parts: Vec<C64> = values
        .chunks(4096)
        .map(|chunk| {
            let mut acc = CompensatedSum::default();
            for z in chunk {
                acc.add(z);
            }
            acc.value()
        })
        .collect();
    let mut acc = CompensatedSum::default();
    for z in parts {
        acc.add(z);
    }
    acc.value()
}

/// `∫ f ḡ exp(-2πt(k x_2² + 2 x_2 u_2)) dx_1 dx_2` by the trapezoidal rule.
pub fn quad_inner_product(f: &GridSection, g: &GridSection) -> Result<C64, OracleError> {
    if f.n != g.n || !same_slot(&f.bundle, &g.bundle) {
        return Err(OracleError::BundleMismatch);
    }
    if f.form != g.form {
        return Err(OracleError::FormMismatch);
    }
    let n = f.n;
    let weights: Vec<f64> = (0..n)
        .map(|i| metric_weight(&f.bundle, i as f64 / n as f64))
        .collect();
    let total = weighted_mean(
        f.values
            .par_iter()
            .zip(g.values.par_iter())
            .enumerate()
            .map(|(idx, (a, b))| a * b.conj() * weights[idx % n]),
    );
    Ok(total / (n * n) as f64)
}

/// Coefficients of a section of `L(0, u)` in the orthonormal basis
/// `φ_{u,m,n}(x) = exp(2πi(m x_1 + (n - u) x_2))`, `|m|, |n| ≤ cutoff`.
#[derive(Clone, Debug)]
pub struct FourierModeL0u {
    pub bundle: LineBundleSlot,
    pub cutoff: usize,
    coeffs: Vec<C64>,
}

impl FourierModeL0u {
    pub fn zeros(bundle: LineBundleSlot, cutoff: usize) -> Self {
        let w = 2 * cutoff + 1;
        Self {
            bundle,
            cutoff,
            coeffs: vec![C64::new(0.0, 0.0); w * w],
        }
    }

    fn index(&self, m: i64, n: i64) -> Option<usize> {
        let c = self.cutoff as i64;
        if m.abs() > c || n.abs() > c {
            return None;
        }
        Some(((m + c) * (2 * c + 1) + (n + c)) as usize)
    }

    /// Zero outside the cutoff.
    pub fn get(&self, m: i64, n: i64) -> C64 {
        self.index(m, n)
            .map_or(C64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn set(&mut self, m: i64, n: i64, z: C64) -> Result<(), OracleError> {
        let i = self.index(m, n).ok_or(OracleError::InvalidCutoff {
            cutoff: self.cutoff,
            n: (2 * m.abs().max(n.abs()) + 1) as usize,
        })?;
        self.coeffs[i] = z;
        Ok(())
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, i64, C64)> + '_ {
        let c = self.cutoff as i64;
        (-c..=c).flat_map(move |m| (-c..=c).map(move |n| (m, n, self.get(m, n))))
    }

    /// Multiplies mode `(m, n)` by `f(m, n)`.
    pub fn map_modes(&self, f: impl Fn(i64, i64) -> C64) -> Self {
        let c = self.cutoff as i64;
        let mut out = self.clone();
        for m in -c..=c {
            for n in -c..=c {
                let i = out.index(m, n).unwrap();
                out.coeffs[i] *= f(m, n);
            }
        }
        out
    }
}

/// `∂̄ φ_{u,m,n} = (π/t)(mτ - n + u) φ_{u,m,n}`.
pub fn dbar_eigenvalue(m: i64, n: i64, u: &LatticeCoordinates, tau: &Modulus) -> C64 {
    (tau.tau() * m as f64 - n as f64 + u.value) * (PI / tau.t())
}

fn frequency(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

fn fft2(values: &mut [C64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    values.par_chunks_mut(n).for_each(|row| fft.process(row));
    let mut cols: Vec<C64> = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            cols[j * n + i] = values[i * n + j];
        }
    }
    cols.par_chunks_mut(n).for_each(|col| fft.process(col));
    for i in 0..n {
        for j in 0..n {
            values[i * n + j] = cols[j * n + i];
        }
    }
}

fn require_l0(s: &GridSection) -> Result<(), OracleError> {
    if s.bundle.k != 0 {
        return Err(OracleError::Unsupported(format!(
            "Fourier expansion needs degree 0, got L({}, ·)",
            s.bundle.k
        )));
    }
    Ok(())
}

/// Expands a section (or the `dx̄` coefficient of a form) of `L(0, u)`,
/// checking that the discarded modes are below `tail_tol · max(1, peak)`.
pub fn fourier_l0u(
    s: &GridSection,
    cutoff: usize,
    tail_tol: f64,
) -> Result<FourierModeL0u, OracleError> {
    require_l0(s)?;
    let n = s.n;
    if 2 * cutoff >= n {
        return Err(OracleError::InvalidCutoff { cutoff, n });
    }
    let u = s.bundle.u;
    let mut vals: Vec<C64> = s
        .values
        .par_iter()
        .enumerate()
        .map(|(idx, z)| {
            let x2 = (idx % n) as f64 / n as f64;
            z * (I * 2.0 * PI * u.value * x2).exp()
        })
        .collect();
    fft2(&mut vals, n, false);
    let norm = (n * n) as f64;
    let mut out = FourierModeL0u::zeros(s.bundle, cutoff);
    let mut tail = 0.0_f64;
    let mut peak = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let (m, k) = (frequency(i, n), frequency(j, n));
            let c = vals[i * n + j] / norm;
            peak = peak.max(c.norm());
            if m.unsigned_abs() as usize <= cutoff && k.unsigned_abs() as usize <= cutoff {
                out.set(m, k, c)?;
            } else {
                tail = tail.max(c.norm());
            }
        }
    }
    if tail > tail_tol * peak.max(1.0) {
        return Err(OracleError::TailTooLarge {
            tail,
            tol: tail_tol,
        });
    }
    Ok(out)
}

/// Samples a mode expansion on an `n × n` grid.
pub fn synthesize_l0u(
    modes: &FourierModeL0u,
    form: FormType,
    n: usize,
) -> Result<GridSection, OracleError> {
    if n < 2 || !n.is_power_of_two() {
        return Err(OracleError::InvalidGrid(n));
    }
    if 2 * modes.cutoff >= n {
        return Err(OracleError::InvalidCutoff {
            cutoff: modes.cutoff,
            n,
        });
    }
    let mut vals = vec![C64::new(0.0, 0.0); n * n];
    for (m, k, c) in modes.modes() {
        let i = m.rem_euclid(n as i64) as usize;
        let j = k.rem_euclid(n as i64) as usize;
        vals[i * n + j] = c;
    }
    fft2(&mut vals, n, true);
    let u = modes.bundle.u;
    let values = vals
        .par_iter()
        .enumerate()
        .map(|(idx, z)| {
            let x2 = (idx % n) as f64 / n as f64;
            z * (-I * 2.0 * PI * u.value * x2).exp()
        })
        .collect();
    GridSection::new(modes.bundle, form, n, values)
}

fn check_pole(u: &LatticeCoordinates, tau: &Modulus, margin: f64) -> Result<(), OracleError> {
    let distance = lattice_distance(u, tau);
    if distance < margin {
        return Err(OracleError::PoleProximity { distance, margin });
    }
    Ok(())
}

/// `∂̄` of a section of `L(0, u)`, returned as the `dx̄` coefficient.
pub fn dbar_l0u(s: &GridSection, opts: &OracleOptions) -> Result<GridSection, OracleError> {
    if s.form != FormType::Function {
        return Err(OracleError::FormMismatch);
    }
    let modes = fourier_l0u(s, opts.cutoff, opts.tail_tol)?;
    let (u, tau) = (s.bundle.u, s.bundle.tau);
    let out = modes.map_modes(|m, n| dbar_eigenvalue(m, n, &u, &tau));
    synthesize_l0u(&out, FormType::OneForm, s.n)
}

/// The unique section `F` of `L(0, u)` with `∂̄F = rhs`, for `u` off the
/// lattice.
pub fn dbar_inverse_l0u(
    rhs: &GridSection,
    opts: &OracleOptions,
) -> Result<GridSection, OracleError> {
    if rhs.form != FormType::OneForm {
        return Err(OracleError::FormMismatch);
    }
    require_l0(rhs)?;
    let (u, tau) = (rhs.bundle.u, rhs.bundle.tau);
    check_pole(&u, &tau, opts.pole_margin)?;
    let modes = fourier_l0u(rhs, opts.cutoff, opts.tail_tol)?;
    let out = modes.map_modes(|m, n| 1.0 / dbar_eigenvalue(m, n, &u, &tau));
    synthesize_l0u(&out, FormType::Function, rhs.n)
}

/// The Green homotopy `Q`: `∂̄⁻¹` on `(0,1)`-forms of `L(0, u)` with
/// `u ∉ Z + Zτ`, and zero on sections.
pub fn apply_q(s: &GridSection, opts: &OracleOptions) -> Result<GridSection, OracleError> {
    match s.form {
        FormType::Function => GridSection::zero(s.bundle, FormType::Function, s.n),
        FormType::OneForm => {
            if s.bundle.k != 0 {
                return Err(OracleError::Unsupported(format!(
                    "Q on (0,1)-forms of L({}, ·)",
                    s.bundle.k
                )));
            }
            dbar_inverse_l0u(s, opts)
        }
    }
}

/// Harmonic part of a section or form, as coefficients in the theta basis of
/// its bundle.
#[derive(Clone, Debug)]
pub struct Harmonic {
    pub bundle: LineBundleSlot,
    pub form: FormType,
    pub coeffs: Vec<C64>,
    basis: Vec<GridSection>,
}

impl Harmonic {
    pub fn to_grid(&self, n: usize) -> Result<GridSection, OracleError> {
        let mut out = GridSection::zero(self.bundle, self.form, n)?;
        for (c, b) in self.coeffs.iter().zip(&self.basis) {
            out = out.axpy(*c, b)?;
        }
        Ok(out)
    }
}

/// Harmonic basis of the cohomology of `L(k, u)` in the degree of `form`:
/// `θ_{d/k}(kx+u, kτ)` for sections with `k > 0`, the unnormalized
/// `H¹(L(k, u))` basis for forms with `k < 0`, and nothing otherwise
/// (`L(0, u)` with `u` off the lattice is acyclic).
pub fn harmonic_basis(
    bundle: &LineBundleSlot,
    form: FormType,
    n: usize,
    opts: &OracleOptions,
) -> Result<Vec<GridSection>, OracleError> {
    let (k, u, tau) = (bundle.k, bundle.u, bundle.tau);
    if k == 0 {
        check_pole(&u, &tau, opts.pole_margin)?;
        return Ok(Vec::new());
    }
    match (form, k > 0) {
        (FormType::Function, true) => (0..k)
            .map(|d| sample_h0_basis(k, d, &u, &tau, n, &opts.truncation))
            .collect(),
        (FormType::OneForm, false) => (0..-k)
            .map(|d| sample_h1_basis(-k, d, &u.neg(), &tau, n, false, &opts.truncation))
            .collect(),
        _ => Ok(Vec::new()),
    }
}

/// Orthogonal projection onto harmonic representatives, with coefficients
/// `⟨s, e_d⟩ / ⟨e_d, e_d⟩` computed by quadrature.
pub fn project_harmonic(s: &GridSection, opts: &OracleOptions) -> Result<Harmonic, OracleError> {
    let basis = harmonic_basis(&s.bundle, s.form, s.n, opts)?;
    let coeffs = basis
        .iter()
        .map(|e| Ok(quad_inner_product(s, e)? / quad_inner_product(e, e)?))
        .collect::<Result<Vec<_>, OracleError>>()?;
    Ok(Harmonic {
        bundle: s.bundle,
        form: s.form,
        coeffs,
        basis,
    })
}

/// `m_2(a_1, a_2) = pr(a_1 a_2)`.
pub fn m2_oracle(
    a1: &GridSection,
    a2: &GridSection,
    opts: &OracleOptions,
) -> Result<Harmonic, OracleError> {
    project_harmonic(&a1.mul(a2)?, opts)
}

/// `Q(a b)`, zero when the product has degree other than 1.
fn q_of_product(
    a: &GridSection,
    b: &GridSection,
    opts: &OracleOptions,
) -> Result<Option<GridSection>, OracleError> {
    if a.form.degree() + b.form.degree() != 1 {
        return Ok(None);
    }
    Ok(Some(apply_q(&a.mul(b)?, opts)?))
}

/// `m_3(a_1, a_2, a_3) = pr(Q(a_1 a_2) a_3 - (-1)^{ã_1} a_1 Q(a_2 a_3))`.
pub fn m3_generic(
    a1: &GridSection,
    a2: &GridSection,
    a3: &GridSection,
    opts: &OracleOptions,
) -> Result<Harmonic, OracleError> {
    let target = a1.bundle.tensor(&a2.bundle).tensor(&a3.bundle);
    let degree = a1.form.degree() + a2.form.degree() + a3.form.degree();
    let form = match degree {
        1 => FormType::Function,
        2 => FormType::OneForm,
        _ => {
            return Ok(Harmonic {
                bundle: target,
                form: FormType::Function,
                coeffs: Vec::new(),
                basis: Vec::new(),
            });
        }
    };
    let mut acc = GridSection::zero(target, form, a1.n)?;
    if let Some(q12) = q_of_product(a1, a2, opts)? {
        acc = acc.axpy(C64::new(1.0, 0.0), &q12.mul(a3)?)?;
    }
    if let Some(q23) = q_of_product(a2, a3, opts)? {
        let sign = if a1.form.degree() % 2 == 1 { 1.0 } else { -1.0 };
        acc = acc.axpy(C64::new(sign, 0.0), &a1.mul(&q23)?)?;
    }
    project_harmonic(&acc, opts)
}

/// The three arguments of a triple-product query as grid samples:
/// `α = π√(2k)/√t conj(θ_{a/k}(kx, kτ)) exp(-2πtk x_2²) dx̄`,
/// `β_1 = θ_{b/k}(kx+u, kτ)`, `β_2 = θ_{c/l}(lx+v, lτ)`.
pub fn query_arguments(
    q: &TripleProductQuery,
    opts: &OracleOptions,
) -> Result<(GridSection, GridSection, GridSection), OracleError> {
    opts.validate()?;
    let pol = &opts.truncation;
    let alpha = sample_h1_basis(
        q.k,
        q.a,
        &LatticeCoordinates::zero(),
        &q.tau,
        opts.n,
        true,
        pol,
    )?;
    let beta1 = sample_h0_basis(q.k, q.b, &q.u, &q.tau, opts.n, pol)?;
    let beta2 = sample_h0_basis(q.l, q.c, &q.v, &q.tau, opts.n, pol)?;
    Ok((alpha, beta1, beta2))
}

/// Coefficient of `θ_{d/l}(lx+w, lτ)` in `m_3(α, β_1, β_2)`.
pub fn m3_oracle(q: &TripleProductQuery, opts: &OracleOptions) -> Result<C64, OracleError> {
    let (alpha, beta1, beta2) = query_arguments(q, opts)?;
    let h = m3_generic(&alpha, &beta1, &beta2, opts)?;
    Ok(h.coeffs[q.d.rem_euclid(q.l) as usize])
}

/// Coefficient of `θ_{d/l}(lx+w, lτ)` in `m_3(β_2, β_1, α)`.
pub fn m3_oracle_reversed(
    q: &TripleProductQuery,
    opts: &OracleOptions,
) -> Result<C64, OracleError> {
    let (alpha, beta1, beta2) = query_arguments(q, opts)?;
    let h = m3_generic(&beta2, &beta1, &alpha, opts)?;
    Ok(h.coeffs[q.d.rem_euclid(q.l) as usize])
}

/// `∫ a ∧ b` for a `(0,1)`-form and a section of dual bundles, using
/// `dx ∧ dx̄ = -2it dx_1 ∧ dx_2` after pairing with `dx`. When the twists sum
/// to a lattice point `λ ≠ 0`, the product is carried to `L(0, 0)` by
/// `exp(2πi λ_2 x)`.
pub fn serre_pair(a: &GridSection, b: &GridSection) -> Result<C64, OracleError> {
    if a.n != b.n || a.bundle.tau != b.bundle.tau {
        return Err(OracleError::BundleMismatch);
    }
    if a.form.degree() + b.form.degree() != 1 {
        return Err(OracleError::FormMismatch);
    }
    let sum = a.bundle.tensor(&b.bundle);
    let (l1, l2) = (sum.u.z1.round(), sum.u.z2.round());
    if sum.k != 0 || (sum.u.z1 - l1).abs() > SLOT_TOL || (sum.u.z2 - l2).abs() > SLOT_TOL {
        return Err(OracleError::NonDual {
            k: sum.k,
            z1: sum.u.z1,
            z2: sum.u.z2,
        });
    }
    let n = a.n;
    let tau = a.bundle.tau;
    let total = weighted_mean(
        a.values
            .par_iter()
            .zip(b.values.par_iter())
            .enumerate()
            .map(|(idx, (x, y))| {
                let twist = if l2 == 0.0 {
                    C64::new(1.0, 0.0)
                } else {
                    let x = grid_point(
                        (idx / n) as f64 / n as f64,
                        (idx % n) as f64 / n as f64,
                        &tau,
                    );
                    (I * 2.0 * PI * l2 * x).exp()
                };
                x * y * twist
            }),
    );
    Ok(-2.0 * I * tau.t() * total / (n * n) as f64)
}

/// Both sides of `⟨m_n(a_1..a_n), a_{n+1}⟩ = (-1)^{n(ã_1+1)} ⟨a_1, m_n(a_2..a_{n+1})⟩`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CyclicResidual {
    pub n: usize,
    pub lhs: C64,
    pub rhs: C64,
    pub sign: f64,
    pub residual: f64,
}

fn m_n(args: &[GridSection], opts: &OracleOptions) -> Result<Harmonic, OracleError> {
    match args {
        [a, b] => m2_oracle(a, b, opts),
        [a, b, c] => m3_generic(a, b, c, opts),
        _ => Err(OracleError::Unsupported(format!(
            "m_{} on the curve",
            args.len()
        ))),
    }
}

/// The cyclic identity for `n = args.len() - 1 ∈ {2, 3}` with the Serre
/// pairing, every product computed through the grid pipeline.
pub fn cyclic_residual(
    args: &[GridSection],
    opts: &OracleOptions,
) -> Result<CyclicResidual, OracleError> {
    let n = args.len().saturating_sub(1);
    if !(2..=3).contains(&n) {
        return Err(OracleError::Unsupported(format!(
            "cyclic check with n = {n}"
        )));
    }
    let grid = args[0].n;
    let left = m_n(&args[..n], opts)?.to_grid(grid)?;
    let lhs = serre_pair(&left, &args[n])?;
    let right = m_n(&args[1..], opts)?.to_grid(grid)?;
    let rhs = serre_pair(&args[0], &right)?;
    let sign = if (n * (args[0].form.degree() as usize + 1)).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    Ok(CyclicResidual {
        n,
        lhs,
        rhs,
        sign,
        residual: (lhs - rhs * sign).norm(),
    })
}

/// Curve instances of the cyclic identity built from a query:
/// `n = 2`: `(β_1, β_2, α_3)` with `α_3` the `d`-th `H¹(L(-k-l, -w))` basis form;
/// `n = 3`: `(α, β_1, β_2, α')` with `α'` the `d`-th `H¹(L(-l, -w))` basis form.
pub fn serre_cyclic_check(
    q: &TripleProductQuery,
    n: usize,
    opts: &OracleOptions,
) -> Result<CyclicResidual, OracleError> {
    let (alpha, beta1, beta2) = query_arguments(q, opts)?;
    let w = q.w();
    let pol = &opts.truncation;
    match n {
        2 => {
            let alpha3 = sample_h1_basis(q.k + q.l, q.d, &w, &q.tau, opts.n, false, pol)?;
            cyclic_residual(&[beta1, beta2, alpha3], opts)
        }
        3 => {
            let alpha4 = sample_h1_basis(q.l, q.d, &w, &q.tau, opts.n, false, pol)?;
            cyclic_residual(&[alpha, beta1, beta2, alpha4], opts)
        }
        _ => Err(OracleError::Unsupported(format!(
            "cyclic check with n = {n}"
        ))),
    }
}

/// `|∫ Qα ∧ β - (-1)^{α̃} ∫ α ∧ Qβ|` for `(0,1)`-forms `α` on `L(0, u)` and
/// `β` on `L(0, -u)`.
pub fn lemma_adjointness_residual(
    alpha: &GridSection,
    beta: &GridSection,
    opts: &OracleOptions,
) -> Result<f64, OracleError> {
    let lhs = serre_pair(&apply_q(alpha, opts)?, beta)?;
    let sign = if alpha.form.degree() % 2 == 1 {
        -1.0
    } else {
        1.0
    };
    let rhs = serre_pair(alpha, &apply_q(beta, opts)?)?;
    Ok((lhs - rhs * sign).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{fourier_c, h0_basis_norm_sq, m3_holomorphic, EllipticOptions};
    use crate::theta::theta;

    fn small() -> OracleOptions {
        OracleOptions {
            n: 64,
            cutoff: 24,
            ..Default::default()
        }
    }

    fn tau_i() -> Modulus {
        Modulus::new(I).unwrap()
    }

    #[test]
    fn theta_section_samples_match_theta() {
        let tau = tau_i();
        let s = sample_h0_basis(
            1,
            0,
            &LatticeCoordinates::zero(),
            &tau,
            8,
            &TruncationPolicy::default(),
        )
        .unwrap();
        let want = theta(
            grid_point(0.25, 0.5, &tau),
            &tau,
            &TruncationPolicy::default(),
        )
        .unwrap();
        assert!((s.at(2, 4) - want).norm() < 1e-14);
    }

    #[test]
    fn theta_basis_is_orthogonal_with_closed_form_norm() {
        let tau = Modulus::new(C64::new(0.3, 1.1)).unwrap();
        let u = LatticeCoordinates::from_value(C64::new(0.3, 0.4), &tau);
        let pol = TruncationPolicy::default();
        let e0 = sample_h0_basis(2, 0, &u, &tau, 64, &pol).unwrap();
        let e1 = sample_h0_basis(2, 1, &u, &tau, 64, &pol).unwrap();
        assert!(quad_inner_product(&e0, &e1).unwrap().norm() < 1e-8);
        let want = h0_basis_norm_sq(2, &u, &tau).unwrap();
        assert!((quad_inner_product(&e1, &e1).unwrap().re - want).abs() < 1e-8 * want);
        let h = sample_h1_basis(2, 1, &u, &tau, 64, false, &pol).unwrap();
        assert!((quad_inner_product(&h, &h).unwrap().re - want).abs() < 1e-8 * want);
    }

    #[test]
    fn unit_norm_at_origin() {
        let tau = tau_i();
        let e = sample_h0_basis(
            1,
            0,
            &LatticeCoordinates::zero(),
            &tau,
            32,
            &TruncationPolicy::default(),
        )
        .unwrap();
        assert!((quad_inner_product(&e, &e).unwrap().re - 0.5_f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn l0u_modes_are_orthonormal_and_invert() {
        let tau = tau_i();
        let u = LatticeCoordinates::from_value(C64::new(0.37, 0.21), &tau);
        let slot = LineBundleSlot::new(0, u, tau);
        let mut modes = Vec::new();
        for (m, n) in [(0, 0), (1, -2), (-3, 1)] {
            let mut f = FourierModeL0u::zeros(slot, 4);
            f.set(m, n, C64::new(1.0, 0.0)).unwrap();
            modes.push((m, n, synthesize_l0u(&f, FormType::Function, 16).unwrap()));
        }
        for (_, _, a) in &modes {
            for (_, _, b) in &modes {
                let ip = quad_inner_product(a, b).unwrap();
                let want = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-12);
            }
        }
        let opts = OracleOptions {
            n: 16,
            cutoff: 4,
            ..Default::default()
        };
        for (m, n, phi) in &modes {
            let rhs = GridSection {
                form: FormType::OneForm,
                ..phi.clone()
            };
            let f = dbar_inverse_l0u(&rhs, &opts).unwrap();
            let want = phi.scale(1.0 / dbar_eigenvalue(*m, *n, &u, &tau));
            assert!(f.axpy(C64::new(-1.0, 0.0), &want).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn dbar_round_trip_and_closed_form_modes() {
        let tau = Modulus::new(C64::new(0.3, 1.1)).unwrap();
        let (k, a, b) = (2, 1, 0);
        let u = LatticeCoordinates::from_value(C64::new(0.3, 0.4), &tau);
        let opts = small();
        let pol = opts.truncation;
        let alpha =
            sample_h1_basis(k, a, &LatticeCoordinates::zero(), &tau, opts.n, false, &pol).unwrap();
        let beta = sample_h0_basis(k, b, &u, &tau, opts.n, &pol).unwrap();
        let rhs = alpha.mul(&beta).unwrap();
        let f = dbar_inverse_l0u(&rhs, &opts).unwrap();
        let back = dbar_l0u(&f, &opts).unwrap();
        assert!(back.axpy(C64::new(-1.0, 0.0), &rhs).unwrap().max_abs() < 1e-8 * rhs.max_abs());
        let modes = fourier_l0u(&f, opts.cutoff, opts.tail_tol).unwrap();
        for (m, n) in [(1, 0), (-1, 2), (3, -1), (0, 0)] {
            let c = fourier_c(m, n, k, a, b, u.value, C64::new(0.0, 0.0), &tau).unwrap();
            let want = c / dbar_eigenvalue(m, n, &u, &tau);
            assert!((modes.get(m, n) - want).norm() < 1e-7, "{m},{n}");
        }
    }

    #[test]
    fn pole_and_tail_errors() {
        let tau = tau_i();
        let slot = LineBundleSlot::new(0, LatticeCoordinates::from_coords(1.0, 0.0, &tau), tau);
        let s = GridSection::zero(slot, FormType::OneForm, 16).unwrap();
        assert!(matches!(
            dbar_inverse_l0u(
                &s,
                &OracleOptions {
                    n: 16,
                    cutoff: 4,
                    ..Default::default()
                }
            ),
            Err(OracleError::PoleProximity { .. })
        ));
        let u = LatticeCoordinates::from_value(C64::new(0.3, 0.2), &tau);
        let noisy = GridSection::from_fn(
            LineBundleSlot::new(0, u, tau),
            FormType::OneForm,
            16,
            |x1, _| Ok(C64::new((2.0 * PI * 7.0 * x1).cos(), 0.0)),
        )
        .unwrap();
        assert!(matches!(
            dbar_inverse_l0u(
                &noisy,
                &OracleOptions {
                    n: 16,
                    cutoff: 4,
                    ..Default::default()
                }
            ),
            Err(OracleError::TailTooLarge { .. })
        ));
    }

    #[test]
    fn oracle_matches_series_small_grid() {
        let tau = tau_i();
        let u = LatticeCoordinates::from_value(C64::new(0.37, 0.21), &tau);
        let v = LatticeCoordinates::from_value(C64::new(0.11, -0.05), &tau);
        let q = TripleProductQuery {
            k: 1,
            l: 1,
            a: 0,
            b: 0,
            c: 0,
            d: 0,
            u,
            v,
            tau,
        };
        let g = m3_holomorphic(&q, &EllipticOptions::default()).unwrap();
        let o = m3_oracle(&q, &small()).unwrap();
        assert!((g - o).norm() < 1e-6 * g.norm(), "{g} {o}");
        let r = m3_oracle_reversed(&q, &small()).unwrap();
        assert!((r + o).norm() < 1e-7);
    }

    #[test]
    fn serre_pairing_rules() {
        let tau = tau_i();
        let pol = TruncationPolicy::default();
        let u = LatticeCoordinates::from_value(C64::new(0.2, 0.3), &tau);
        let b = sample_h0_basis(1, 0, &u, &tau, 32, &pol).unwrap();
        let a = sample_h1_basis(1, 0, &u, &tau, 32, false, &pol).unwrap();
        assert!(serre_pair(&a, &b).unwrap().norm() > 0.1);
        let other = sample_h0_basis(1, 0, &LatticeCoordinates::zero(), &tau, 32, &pol).unwrap();
        assert!(matches!(
            serre_pair(&a, &other),
            Err(OracleError::NonDual { .. })
        ));
        assert!(matches!(serre_pair(&b, &b), Err(OracleError::FormMismatch)));
    }

    #[test]
    fn serre_pairing_across_lattice_twist() {
        let tau = Modulus::new(C64::new(0.2, 1.1)).unwrap();
        let pol = TruncationPolicy::default();
        let u = LatticeCoordinates::from_value(C64::new(0.2, 0.3), &tau);
        let a = sample_h1_basis(1, 0, &u, &tau, 32, false, &pol).unwrap();
        let b = sample_h0_basis(1, 0, &u, &tau, 32, &pol).unwrap();
        let shifted = u.shift(0.0, 1.0, &tau);
        let b_shifted = sample_h0_basis(1, 0, &shifted, &tau, 32, &pol).unwrap();
        let ratio = serre_pair(&a, &b_shifted).unwrap() / serre_pair(&a, &b).unwrap();
        let want = (-I * PI * tau.tau() - 2.0 * I * PI * u.value).exp();
        assert!(
            (ratio - want).norm() < 1e-10 * want.norm(),
            "{ratio} {want}"
        );
    }

    #[test]
    fn cyclic_identity_on_small_grid() {
        let tau = tau_i();
        let u = LatticeCoordinates::from_value(C64::new(0.37, 0.21), &tau);
        let v = LatticeCoordinates::from_value(C64::new(0.11, -0.05), &tau);
        let q = TripleProductQuery {
            k: 2,
            l: 1,
            a: 1,
            b: 0,
            c: 0,
            d: 0,
            u,
            v,
            tau,
        };
        for n in [2, 3] {
            let r = serre_cyclic_check(&q, n, &small()).unwrap();
            assert!(r.residual < 1e-6 * r.lhs.norm().max(1.0), "{r:?}");
            assert!(r.lhs.norm() > 1e-6, "{r:?}");
        }
    }

    #[test]
    fn lemma_adjointness() {
        let tau = tau_i();
        let pol = TruncationPolicy::default();
        let n = 64;
        let u = LatticeCoordinates::from_value(C64::new(0.37, 0.21), &tau);
        let v = LatticeCoordinates::from_value(C64::new(0.11, -0.05), &tau);
        let alpha = sample_h1_basis(1, 0, &LatticeCoordinates::zero(), &tau, n, false, &pol)
            .unwrap()
            .mul(&sample_h0_basis(1, 0, &u, &tau, n, &pol).unwrap())
            .unwrap();
        let vu = LatticeCoordinates::from_coords(v.z1 - u.z1, v.z2 - u.z2, &tau);
        let beta = sample_h1_basis(2, 1, &v, &tau, n, false, &pol)
            .unwrap()
            .mul(&sample_h0_basis(2, 0, &vu, &tau, n, &pol).unwrap())
            .unwrap();
        let r = lemma_adjointness_residual(&alpha, &beta, &small()).unwrap();
        let scale = serre_pair(&apply_q(&alpha, &small()).unwrap(), &beta)
            .unwrap()
            .norm();
        assert!(r < 1e-7, "{r} vs {scale}");
        assert!(scale > 1e-6);
    }
}
