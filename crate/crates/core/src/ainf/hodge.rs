//! Hodge decomposition of a finite-dimensional complex with an inner product.

use super::algebra::DgAlgebra;
use super::graded::GradedBasis;
use super::AinfError;
use crate::linalg::{hermitian_eigen, max_abs, CMatrix};
use crate::C64;

/// Eigenvalues of the Laplacian below this fraction of the largest one are
/// treated as zero.
pub const KERNEL_RTOL: f64 = 1e-10;
/// Allowed gap between `1 - Qd - dQ` and the spectral projector onto `ker Δ`.
pub const PROJECTOR_TOL: f64 = 1e-8;

/// `(G, Q, pr)` together with a basis of the image of `pr`.
///
/// `embed` has the basis of `B = im(pr)` as columns (in `A`-coordinates) and
/// `coords` is a left inverse of `embed`, so `coords · pr` maps `A` onto the
/// coordinates of `B`.
#[derive(Clone, Debug)]
pub struct HodgeData {
    pub green: CMatrix,
    pub q: CMatrix,
    pub pr: CMatrix,
    pub embed: CMatrix,
    pub coords: CMatrix,
    pub harmonic_basis: GradedBasis,
}

/// Identities the Hodge data should satisfy, as max-norm residuals.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct HodgeResiduals {
    pub pr_formula: f64,
    pub pr_idempotent: f64,
    pub pr_q: f64,
    pub q_squared: f64,
    pub pr_d_pr: f64,
    pub green_laplacian: f64,
}

impl HodgeData {
    /// `Q = 0`, `pr = 1`, `B = A`.
    pub fn zero(alg: &DgAlgebra) -> Self {
        let n = alg.dim();
        let z = CMatrix::zeros(n, n);
        Self {
            green: z.clone(),
            q: z,
            pr: CMatrix::identity(n, n),
            embed: CMatrix::identity(n, n),
            coords: CMatrix::identity(n, n),
            harmonic_basis: alg.basis().clone(),
        }
    }

    pub fn harmonic_dim(&self) -> usize {
        self.embed.ncols()
    }

    pub fn residuals(&self, alg: &DgAlgebra) -> HodgeResiduals {
        let n = alg.dim();
        let d = alg.d();
        let id = CMatrix::identity(n, n);
        let formula = &id - &self.q * d - d * &self.q;
        let pr_d_pr = max_abs(&(&self.pr * d * &self.pr));
        let laplace_gap = match alg.inner() {
            Some(h) => {
                let ds = adjoint(d, h);
                let lap = &ds * d + d * &ds;
                let one_minus_pr = &id - &self.pr;
                max_abs(&(&self.green * &lap - &one_minus_pr))
                    .max(max_abs(&(&lap * &self.green - &one_minus_pr)))
            }
            None => 0.0,
        };
        HodgeResiduals {
            pr_formula: max_abs(&(&self.pr - formula)),
            pr_idempotent: max_abs(&(&self.pr * &self.pr - &self.pr)),
            pr_q: max_abs(&(&self.pr * &self.q)),
            q_squared: max_abs(&(&self.q * &self.q)),
            pr_d_pr,
            green_laplacian: laplace_gap,
        }
    }
}

/// Adjoint of `m` with respect to the Gram matrix `h`: `H^{-1} m^† H`.
pub fn adjoint(m: &CMatrix, h: &CMatrix) -> CMatrix {
    let h_inv = h
        .clone()
        .try_inverse()
        .expect("inner product is invertible");
    h_inv * m.adjoint() * h
}

/// Builds `(G, Q, pr)` from the inner product of `alg`: `Δ = d*d + dd*`,
/// `G` the inverse of `Δ` off its kernel, `Q = d* G`, `pr = 1 - Qd - dQ`.
pub fn hodge_data(alg: &DgAlgebra) -> Result<HodgeData, AinfError> {
    let h = alg.inner().ok_or(AinfError::MissingInner)?;
    let n = alg.dim();
    let d = alg.d();

    // Orthonormal coordinates y = L^† x where H = L L^†.
    let chol = h
        .clone()
        .cholesky()
        .ok_or(AinfError::InnerNotPositive(0.0))?;
    let l_adj = chol.l().adjoint();
    let l_adj_inv = l_adj
        .clone()
        .try_inverse()
        .ok_or(AinfError::Singular("Cholesky factor"))?;
    let dt = &l_adj * d * &l_adj_inv;
    let lap = dt.adjoint() * &dt + &dt * dt.adjoint();
    let (eig, vecs) = hermitian_eigen(&lap);
    let scale = eig.iter().fold(1.0_f64, |a, &x| a.max(x.abs()));
    let mut p_t = CMatrix::zeros(n, n);
    let mut g_t = CMatrix::zeros(n, n);
    for (i, &lam) in eig.iter().enumerate() {
        let v = vecs.column(i);
        let outer = v * v.adjoint();
        if lam.abs() <= KERNEL_RTOL * scale {
            p_t += outer;
        } else {
            g_t += outer.scale(1.0 / lam);
        }
    }
    let green = &l_adj_inv * &g_t * &l_adj;
    let d_star = &l_adj_inv * dt.adjoint() * &l_adj;
    let q = &d_star * &green;
    let id = CMatrix::identity(n, n);
    let pr = &id - &q * d - d * &q;
    let spectral = &l_adj_inv * &p_t * &l_adj;
    let gap = max_abs(&(&pr - &spectral));
    if gap > PROJECTOR_TOL {
        return Err(AinfError::ProjectorMismatch(gap));
    }

    // H-orthonormal basis of im(pr), degree by degree. With H block diagonal
    // the Cholesky factor is too, so each degree block can be handled alone.
    let basis = alg.basis();
    let pr_t = &l_adj * &pr * &l_adj_inv;
    let mut cols: Vec<Vec<C64>> = Vec::new();
    let mut degrees = Vec::new();
    for deg in basis.distinct_degrees() {
        let idx = basis.indices_of_degree(deg);
        let sub = CMatrix::from_fn(idx.len(), idx.len(), |r, c| pr_t[(idx[r], idx[c])]);
        let (w, u) = hermitian_eigen(&sub);
        for (j, &wj) in w.iter().enumerate() {
            if wj > 0.5 {
                let mut y = crate::linalg::CVector::zeros(n);
                for (r, &i) in idx.iter().enumerate() {
                    y[i] = u[(r, j)];
                }
                let x = &l_adj_inv * y;
                cols.push(x.as_slice().to_vec());
                degrees.push(deg);
            }
        }
    }
    let embed = CMatrix::from_fn(n, cols.len(), |r, c| cols[c][r]);
    let coords = embed.adjoint() * h;
    Ok(HodgeData {
        green,
        q,
        pr,
        embed,
        coords,
        harmonic_basis: GradedBasis::from_degrees("h", &degrees),
    })
}
