//! The transfer recursion `λ_n` and the induced A∞-structure `m_n = pr ∘ λ_n`.

use rayon::prelude::*;

use super::algebra::DgAlgebra;
use super::graded::{sign, GradedBasis, GradedElement, MultiLinear};
use super::hodge::HodgeData;
use super::AinfError;
use crate::linalg::{CMatrix, CVector};
use crate::C64;

/// Products `m_1, ..., m_K` on a graded space; `products[k - 1]` is `m_k`.
#[derive(Clone, Debug)]
pub struct AinfStructure {
    space: GradedBasis,
    products: Vec<MultiLinear>,
}

/// Largest entry of any `m_k` that breaks `deg m_k = 2 - k`.
pub const DEGREE_TOL: f64 = 1e-9;

impl AinfStructure {
    pub fn new(space: GradedBasis, products: Vec<MultiLinear>) -> Result<Self, AinfError> {
        let n = space.dim();
        for (i, m) in products.iter().enumerate() {
            let k = i + 1;
            if m.arity() != k || m.in_dim() != n || m.out_dim() != n {
                return Err(AinfError::Shape(format!("m_{k}")));
            }
            let v = m.degree_violation(&space, &space, 2 - k as i32);
            if v > DEGREE_TOL * m.max_abs().max(1.0) {
                return Err(AinfError::DegreeInconsistent(v));
            }
        }
        Ok(Self { space, products })
    }

    /// The dg-algebra itself: `m_1 = d`, `m_2 = product`, higher products zero.
    pub fn from_dg_algebra(alg: &DgAlgebra) -> Self {
        let n = alg.dim();
        let m1 = MultiLinear::from_fn(1, n, n, |idx| {
            alg.d().column(idx[0]).iter().copied().collect()
        });
        Self {
            space: alg.basis().clone(),
            products: vec![m1, alg.mult().clone()],
        }
    }

    pub fn space(&self) -> &GradedBasis {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Highest arity present.
    pub fn max_arity(&self) -> usize {
        self.products.len()
    }

    pub fn products(&self) -> &[MultiLinear] {
        &self.products
    }

    /// `m_k`, or `None` above the stored arity (treated as zero).
    pub fn m(&self, k: usize) -> Option<&MultiLinear> {
        if k == 0 {
            None
        } else {
            self.products.get(k - 1)
        }
    }

    /// Replaces `m_k` (used to perturb structures in sensitivity checks).
    pub fn with_product(mut self, k: usize, m: MultiLinear) -> Result<Self, AinfError> {
        while self.products.len() < k {
            let j = self.products.len() + 1;
            self.products
                .push(MultiLinear::zeros(j, self.dim(), self.dim()));
        }
        self.products[k - 1] = m;
        Self::new(self.space, self.products)
    }

    /// Transports the structure along an invertible degree-preserving map
    /// `phi`: `m''_k(x_1..x_k) = phi^{-1} m_k(phi x_1, ..., phi x_k)`.
    pub fn transport(&self, phi: &CMatrix) -> Result<Self, AinfError> {
        let n = self.dim();
        let inv = phi
            .clone()
            .try_inverse()
            .ok_or(AinfError::Singular("transport map"))?;
        let cols: Vec<Vec<C64>> = (0..n)
            .map(|j| phi.column(j).iter().copied().collect())
            .collect();
        let products = self
            .products
            .iter()
            .map(|m| {
                MultiLinear::from_fn(m.arity(), n, n, |idx| {
                    let args: Vec<&[C64]> = idx.iter().map(|&i| cols[i].as_slice()).collect();
                    let v = &inv * CVector::from_vec(m.apply(&args));
                    v.as_slice().to_vec()
                })
            })
            .collect();
        Self::new(self.space.clone(), products)
    }
}

/// Components `f_1, ..., f_K` of an A∞-morphism, `components[k - 1] = f_k`,
/// each mapping the source space to the target space.
#[derive(Clone, Debug)]
pub struct AinfMorphism {
    pub components: Vec<MultiLinear>,
}

impl AinfMorphism {
    pub fn identity(dim: usize, arity: usize) -> Self {
        let mut components = vec![MultiLinear::from_fn(1, dim, dim, |idx| {
            let mut v = vec![C64::new(0.0, 0.0); dim];
            v[idx[0]] = C64::new(1.0, 0.0);
            v
        })];
        for k in 2..=arity {
            components.push(MultiLinear::zeros(k, dim, dim));
        }
        Self { components }
    }

    pub fn max_arity(&self) -> usize {
        self.components.len()
    }

    pub fn f(&self, k: usize) -> Option<&MultiLinear> {
        if k == 0 {
            None
        } else {
            self.components.get(k - 1)
        }
    }
}

fn qapply(q: &CMatrix, v: &[C64]) -> Vec<C64> {
    (q * CVector::from_column_slice(v)).as_slice().to_vec()
}

fn axpy(acc: &mut [C64], s: f64, v: &[C64]) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += x * s;
    }
}

/// `λ_n(a_1, ..., a_n)` for homogeneous arguments in `A`:
///
/// `λ_2(a, b) = ab` and for `n ≥ 3`
///
/// ```text
/// λ_n = (-1)^{n-1} Qλ_{n-1}(a_1..a_{n-1}) a_n
///       - (-1)^{n ã_1} a_1 Qλ_{n-1}(a_2..a_n)
///       - Σ_{k+l=n, k,l≥2} (-1)^{k + (l-1)(ã_1+..+ã_k)} Qλ_k(a_1..a_k) Qλ_l(a_{k+1}..a_n)
/// ```
pub fn lambda_n(
    alg: &DgAlgebra,
    q: &CMatrix,
    args: &[GradedElement],
) -> Result<GradedElement, AinfError> {
    let n = args.len();
    if n < 2 {
        return Err(AinfError::ArityTooSmall(n));
    }
    let mut parities = Vec::with_capacity(n);
    for a in args {
        if a.coefficients.len() != alg.dim() {
            return Err(AinfError::DimensionMismatch {
                expected: alg.dim(),
                found: a.coefficients.len(),
            });
        }
        // The zero element has no degree but contributes nothing.
        if a.coefficients.iter().all(|z| z.norm() == 0.0) {
            return Ok(GradedElement {
                coefficients: vec![C64::new(0.0, 0.0); alg.dim()],
                homogeneous_degree: None,
            });
        }
        parities.push(a.parity().ok_or(AinfError::NotHomogeneous)?);
    }
    let vecs: Vec<&[C64]> = args.iter().map(|a| a.coefficients.as_slice()).collect();
    let coefficients = lambda_rec(alg, q, &vecs, &parities);
    let degree = args
        .iter()
        .map(|a| a.homogeneous_degree.unwrap_or(0))
        .sum::<i32>()
        + 2
        - n as i32;
    Ok(GradedElement {
        coefficients,
        homogeneous_degree: Some(degree),
    })
}

fn lambda_rec(alg: &DgAlgebra, q: &CMatrix, a: &[&[C64]], p: &[i64]) -> Vec<C64> {
    let n = a.len();
    if n == 2 {
        return alg.product(a[0], a[1]);
    }
    let ql = |lo: usize, hi: usize| qapply(q, &lambda_rec(alg, q, &a[lo..hi], &p[lo..hi]));
    let mut out = vec![C64::new(0.0, 0.0); alg.dim()];
    axpy(
        &mut out,
        sign(n as i64 - 1),
        &alg.product(&ql(0, n - 1), a[n - 1]),
    );
    axpy(
        &mut out,
        -sign(n as i64 * p[0]),
        &alg.product(a[0], &ql(1, n)),
    );
    for k in 2..=n - 2 {
        let l = n - k;
        let s: i64 = p[..k].iter().sum();
        let e = k as i64 + (l as i64 - 1) * s;
        axpy(&mut out, -sign(e), &alg.product(&ql(0, k), &ql(k, n)));
    }
    out
}

/// `Qλ_k` evaluated on every tuple of basis vectors of `B = im(pr)`, for
/// `k = 2..=K`, built bottom-up so each lower arity is computed once.
pub struct LambdaTable {
    h: usize,
    dim: usize,
    /// `lambda[k]`: `λ_k` on all `h^k` tuples, flattened, each of length `dim`.
    lambda: Vec<Vec<C64>>,
    /// `Qλ_k`, same layout.
    q_lambda: Vec<Vec<C64>>,
}

impl LambdaTable {
    pub fn build(alg: &DgAlgebra, hodge: &HodgeData, max_arity: usize) -> Self {
        let dim = alg.dim();
        let h = hodge.harmonic_dim();
        let parity: Vec<i64> = (0..h).map(|i| hodge.harmonic_basis.parity(i)).collect();
        let embed: Vec<Vec<C64>> = (0..h)
            .map(|j| hodge.embed.column(j).iter().copied().collect())
            .collect();
        let mut lambda: Vec<Vec<C64>> = vec![Vec::new(), Vec::new()];
        let mut q_lambda: Vec<Vec<C64>> = vec![Vec::new(), Vec::new()];
        for n in 2..=max_arity.max(1) {
            let tuples = h.pow(n as u32);
            let rows: Vec<Vec<C64>> = (0..tuples)
                .into_par_iter()
                .map(|flat| {
                    let idx = unflatten(flat, h, n);
                    if n == 2 {
                        return alg.product(&embed[idx[0]], &embed[idx[1]]);
                    }
                    let ql = |lo: usize, hi: usize| -> &[C64] {
                        let f = flatten(&idx[lo..hi], h);
                        &q_lambda[hi - lo][f * dim..(f + 1) * dim]
                    };
                    let mut out = vec![C64::new(0.0, 0.0); dim];
                    axpy(
                        &mut out,
                        sign(n as i64 - 1),
                        &alg.product(ql(0, n - 1), &embed[idx[n - 1]]),
                    );
                    axpy(
                        &mut out,
                        -sign(n as i64 * parity[idx[0]]),
                        &alg.product(&embed[idx[0]], ql(1, n)),
                    );
                    for k in 2..=n - 2 {
                        let l = n - k;
                        let s: i64 = idx[..k].iter().map(|&i| parity[i]).sum();
                        let e = k as i64 + (l as i64 - 1) * s;
                        axpy(&mut out, -sign(e), &alg.product(ql(0, k), ql(k, n)));
                    }
                    out
                })
                .collect();
            let lam: Vec<C64> = rows.concat();
            let qlam: Vec<C64> = lam
                .chunks(dim.max(1))
                .flat_map(|v| qapply(&hodge.q, v))
                .collect();
            lambda.push(lam);
            q_lambda.push(qlam);
        }
        Self {
            h,
            dim,
            lambda,
            q_lambda,
        }
    }

    pub fn lambda(&self, idx: &[usize]) -> &[C64] {
        let f = flatten(idx, self.h);
        &self.lambda[idx.len()][f * self.dim..(f + 1) * self.dim]
    }

    pub fn q_lambda(&self, idx: &[usize]) -> &[C64] {
        let f = flatten(idx, self.h);
        &self.q_lambda[idx.len()][f * self.dim..(f + 1) * self.dim]
    }
}

pub(crate) fn flatten(idx: &[usize], h: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * h + i)
}

pub(crate) fn unflatten(mut flat: usize, h: usize, n: usize) -> Vec<usize> {
    let mut idx = vec![0; n];
    for slot in idx.iter_mut().rev() {
        *slot = flat % h;
        flat /= h;
    }
    idx
}

/// The transferred structure on `B = im(pr)`: `m_1 = d|_B`, and
/// `m_k = pr ∘ λ_k` for `2 ≤ k ≤ K`, in the coordinates of `hodge.embed`.
pub fn transfer(
    alg: &DgAlgebra,
    hodge: &HodgeData,
    max_arity: usize,
) -> Result<AinfStructure, AinfError> {
    if max_arity < 2 {
        return Err(AinfError::ArityTooSmall(max_arity));
    }
    let table = LambdaTable::build(alg, hodge, max_arity);
    transfer_from_table(alg, hodge, &table, max_arity)
}

pub fn transfer_from_table(
    alg: &DgAlgebra,
    hodge: &HodgeData,
    table: &LambdaTable,
    max_arity: usize,
) -> Result<AinfStructure, AinfError> {
    let h = hodge.harmonic_dim();
    let proj = &hodge.coords * &hodge.pr;
    let m1m = &hodge.coords * alg.d() * &hodge.embed;
    let m1 = MultiLinear::from_fn(1, h, h, |idx| m1m.column(idx[0]).iter().copied().collect());
    let mut products = vec![m1];
    for k in 2..=max_arity {
        products.push(MultiLinear::from_fn(k, h, h, |idx| {
            qapply(&proj, table.lambda(idx))
        }));
    }
    AinfStructure::new(hodge.harmonic_basis.clone(), products)
}

/// The embedding `B -> A` extended to an A∞-morphism into `(A, d, ·)`:
/// `f_1 = ι`, `f_n = -Qλ_n` for `n ≥ 2`.
pub fn inclusion_morphism(
    table: &LambdaTable,
    hodge: &HodgeData,
    max_arity: usize,
) -> AinfMorphism {
    let h = hodge.harmonic_dim();
    let dim = hodge.embed.nrows();
    let f1 = MultiLinear::from_fn(1, h, dim, |idx| {
        hodge.embed.column(idx[0]).iter().copied().collect()
    });
    let mut components = vec![f1];
    for k in 2..=max_arity {
        components.push(MultiLinear::from_fn(k, h, dim, |idx| {
            table.q_lambda(idx).iter().map(|z| -z).collect()
        }));
    }
    AinfMorphism { components }
}
