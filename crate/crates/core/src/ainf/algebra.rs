//! Finite-dimensional dg-algebras given by structure constants.

use serde::{Deserialize, Serialize};

use super::graded::{sign, BasisLabel, GradedBasis, MultiLinear};
use super::AinfError;
use crate::linalg::{hermitian_eigen, max_abs, CMatrix};
use crate::C64;

/// Base tolerance for the construction-time checks; scaled by the size of the
/// structure constants.
pub const VALIDATION_TOL: f64 = 1e-12;
/// Smallest admissible eigenvalue of an inner product.
pub const MIN_INNER_EIGENVALUE: f64 = 1e-10;

/// `(A, d)` with an optional Hermitian inner product given by its Gram matrix
/// `H[i][j] = <e_i, e_j>` (conjugate-linear in the first slot).
#[derive(Clone, Debug)]
pub struct DgAlgebra {
    basis: GradedBasis,
    mult: MultiLinear,
    d: CMatrix,
    inner: Option<CMatrix>,
}

/// Largest violations of the dg-algebra axioms.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AxiomResiduals {
    pub degree: f64,
    pub d_squared: f64,
    pub associativity: f64,
    pub leibniz: f64,
}

impl DgAlgebra {
    /// `d` holds `d(e_j)` in column `j`.
    pub fn new(
        basis: GradedBasis,
        mult: MultiLinear,
        d: CMatrix,
        inner: Option<CMatrix>,
    ) -> Result<Self, AinfError> {
        let n = basis.dim();
        if mult.arity() != 2 || mult.in_dim() != n || mult.out_dim() != n {
            return Err(AinfError::Shape("multiplication tensor".into()));
        }
        if d.nrows() != n || d.ncols() != n {
            return Err(AinfError::Shape("differential".into()));
        }
        let alg = Self {
            basis,
            mult,
            d,
            inner: None,
        };
        let r = alg.axiom_residuals();
        let tol = alg.tolerance();
        if r.degree > tol {
            return Err(AinfError::DegreeInconsistent(r.degree));
        }
        if r.d_squared > tol {
            return Err(AinfError::DSquaredNonzero(r.d_squared));
        }
        if r.associativity > tol {
            return Err(AinfError::NotAssociative(r.associativity));
        }
        if r.leibniz > tol {
            return Err(AinfError::LeibnizViolated(r.leibniz));
        }
        match inner {
            Some(h) => alg.with_inner(h),
            None => Ok(alg),
        }
    }

    /// Attaches (or replaces) the inner product. It must be Hermitian,
    /// positive definite and block-diagonal with respect to the grading.
    pub fn with_inner(mut self, h: CMatrix) -> Result<Self, AinfError> {
        let n = self.dim();
        if h.nrows() != n || h.ncols() != n {
            return Err(AinfError::Shape("inner product".into()));
        }
        let scale = max_abs(&h).max(1.0);
        let herm = max_abs(&(&h - h.adjoint()));
        if herm > VALIDATION_TOL * scale {
            return Err(AinfError::InnerNotHermitian(herm));
        }
        for i in 0..n {
            for j in 0..n {
                if self.basis.degree(i) != self.basis.degree(j)
                    && h[(i, j)].norm() > VALIDATION_TOL * scale
                {
                    return Err(AinfError::InnerMixesDegrees);
                }
            }
        }
        let (eig, _) = hermitian_eigen(&h);
        let min = eig.first().copied().unwrap_or(1.0);
        if min <= MIN_INNER_EIGENVALUE {
            return Err(AinfError::InnerNotPositive(min));
        }
        self.inner = Some(h);
        Ok(self)
    }

    pub fn without_inner(mut self) -> Self {
        self.inner = None;
        self
    }

    pub fn basis(&self) -> &GradedBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn mult(&self) -> &MultiLinear {
        &self.mult
    }

    pub fn d(&self) -> &CMatrix {
        &self.d
    }

    pub fn inner(&self) -> Option<&CMatrix> {
        self.inner.as_ref()
    }

    pub fn product(&self, a: &[C64], b: &[C64]) -> Vec<C64> {
        self.mult.apply(&[a, b])
    }

    pub fn differential(&self, a: &[C64]) -> Vec<C64> {
        let v = crate::linalg::CVector::from_column_slice(a);
        (&self.d * v).as_slice().to_vec()
    }

    /// Absolute tolerance used for the axiom checks.
    pub fn tolerance(&self) -> f64 {
        let s = self.mult.max_abs().max(max_abs(&self.d)).max(1.0);
        VALIDATION_TOL * s * s * s
    }

    pub fn axiom_residuals(&self) -> AxiomResiduals {
        let n = self.dim();
        let b = &self.basis;
        let mut degree = self.mult.degree_violation(b, b, 0);
        for j in 0..n {
            for i in 0..n {
                if b.degree(i) != b.degree(j) + 1 {
                    degree = degree.max(self.d[(i, j)].norm());
                }
            }
        }
        let d_squared = max_abs(&(&self.d * &self.d));
        let mut associativity = 0.0_f64;
        let mut leibniz = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let ij = self.mult.slot(&[i, j]).to_vec();
                for k in 0..n {
                    let left = self.mult.apply_mixed(&[k], 0, &ij);
                    let jk = self.mult.slot(&[j, k]);
                    let right = self.mult.apply_mixed(&[i], 1, jk);
                    for (l, r) in left.iter().zip(&right) {
                        associativity = associativity.max((l - r).norm());
                    }
                }
                // d(e_i e_j) = d(e_i) e_j + (-1)^{|e_i|} e_i d(e_j)
                let lhs = self.differential(&ij);
                let di: Vec<C64> = self.d.column(i).iter().copied().collect();
                let dj: Vec<C64> = self.d.column(j).iter().copied().collect();
                let t1 = self.mult.apply_mixed(&[j], 0, &di);
                let t2 = self.mult.apply_mixed(&[i], 1, &dj);
                let s = sign(b.parity(i));
                for o in 0..n {
                    leibniz = leibniz.max((lhs[o] - t1[o] - t2[o] * s).norm());
                }
            }
        }
        AxiomResiduals {
            degree,
            d_squared,
            associativity,
            leibniz,
        }
    }

    /// Rewrites the algebra in the basis `e'_j = Σ_i T[i][j] e_i`. `T` must be
    /// invertible and preserve degrees. The inner product, if present, is
    /// transformed to the Gram matrix of the new basis.
    pub fn change_basis(&self, t: &CMatrix) -> Result<Self, AinfError> {
        let n = self.dim();
        if t.nrows() != n || t.ncols() != n {
            return Err(AinfError::Shape("basis change".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if self.basis.degree(i) != self.basis.degree(j) && t[(i, j)].norm() > 0.0 {
                    return Err(AinfError::DegreeInconsistent(t[(i, j)].norm()));
                }
            }
        }
        let t_inv = t
            .clone()
            .try_inverse()
            .ok_or(AinfError::Singular("basis change"))?;
        let cols: Vec<Vec<C64>> = (0..n)
            .map(|j| t.column(j).iter().copied().collect())
            .collect();
        let mult = MultiLinear::from_fn(2, n, n, |idx| {
            let p = self.product(&cols[idx[0]], &cols[idx[1]]);
            let v = &t_inv * crate::linalg::CVector::from_vec(p);
            v.as_slice().to_vec()
        });
        let d = &t_inv * &self.d * t;
        let inner = self.inner.as_ref().map(|h| t.adjoint() * h * t);
        DgAlgebra::new(self.basis.clone(), mult, d, inner)
    }

    pub fn to_doc(&self) -> AlgebraDoc {
        let n = self.dim();
        let mut mult = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for (k, z) in self.mult.slot(&[i, j]).iter().enumerate() {
                    if z.norm() > 0.0 {
                        mult.push((i, j, k, z.re, z.im));
                    }
                }
            }
        }
        let mut d = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let z = self.d[(i, j)];
                if z.norm() > 0.0 {
                    d.push((j, i, z.re, z.im));
                }
            }
        }
        let inner = self.inner.as_ref().map(|h| {
            let mut v = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let z = h[(i, j)];
                    if z.norm() > 0.0 {
                        v.push((i, j, z.re, z.im));
                    }
                }
            }
            v
        });
        AlgebraDoc {
            basis: self.basis.labels().to_vec(),
            mult,
            d,
            inner,
        }
    }

    pub fn from_doc(doc: &AlgebraDoc) -> Result<Self, AinfError> {
        let basis = GradedBasis::new(doc.basis.clone())?;
        let n = basis.dim();
        let check = |i: usize| {
            if i < n {
                Ok(i)
            } else {
                Err(AinfError::IndexOutOfRange(i))
            }
        };
        let mut mult = MultiLinear::zeros(2, n, n);
        for &(i, j, k, re, im) in &doc.mult {
            let (i, j, k) = (check(i)?, check(j)?, check(k)?);
            let z = mult.get(&[i, j], k) + C64::new(re, im);
            mult.set(&[i, j], k, z);
        }
        let mut d = CMatrix::zeros(n, n);
        for &(j, i, re, im) in &doc.d {
            let (i, j) = (check(i)?, check(j)?);
            d[(i, j)] += C64::new(re, im);
        }
        let inner = match &doc.inner {
            None => None,
            Some(entries) => {
                let mut h = CMatrix::zeros(n, n);
                for &(i, j, re, im) in entries {
                    let (i, j) = (check(i)?, check(j)?);
                    h[(i, j)] += C64::new(re, im);
                }
                Some(h)
            }
        };
        DgAlgebra::new(basis, mult, d, inner)
    }

    pub fn from_json(s: &str) -> Result<Self, AinfError> {
        let doc: AlgebraDoc =
            serde_json::from_str(s).map_err(|e| AinfError::Json(e.to_string()))?;
        Self::from_doc(&doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("algebra document serializes")
    }
}

/// JSON layout of a dg-algebra.
///
/// `mult` entries `[i, j, k, re, im]` mean `e_i e_j ∋ (re + i im) e_k`;
/// `d` entries `[i, j, re, im]` mean `d(e_i) ∋ (re + i im) e_j`;
/// `inner` entries `[i, j, re, im]` are Gram matrix entries `<e_i, e_j>`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraDoc {
    pub basis: Vec<BasisLabel>,
    #[serde(default)]
    pub mult: Vec<(usize, usize, usize, f64, f64)>,
    #[serde(default)]
    pub d: Vec<(usize, usize, f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Vec<(usize, usize, f64, f64)>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ainf::samples;

    #[test]
    fn json_roundtrip_preserves_structure() {
        let alg = samples::heisenberg(C64::new(1.0, 0.5), None);
        let back = DgAlgebra::from_json(&alg.to_json()).unwrap();
        assert_eq!(back.mult().distance(alg.mult()), Some(0.0));
        assert_eq!(max_abs(&(back.d() - alg.d())), 0.0);
    }

    #[test]
    fn d_squared_nonzero_rejected() {
        // d: e0 -> e1 -> e2 with d∘d != 0
        let basis = GradedBasis::from_degrees("e", &[0, 1, 2]);
        let mult = MultiLinear::zeros(2, 3, 3);
        let mut d = CMatrix::zeros(3, 3);
        d[(1, 0)] = C64::new(1.0, 0.0);
        d[(2, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(
            DgAlgebra::new(basis, mult, d, None),
            Err(AinfError::DSquaredNonzero(_))
        ));
    }

    #[test]
    fn leibniz_violation_rejected() {
        // unit e0 with d(e0) = e1 breaks d(1·1) = 2 d(1)
        let basis = GradedBasis::from_degrees("e", &[0, 1]);
        let mut mult = MultiLinear::zeros(2, 2, 2);
        mult.set(&[0, 0], 0, C64::new(1.0, 0.0));
        mult.set(&[0, 1], 1, C64::new(1.0, 0.0));
        mult.set(&[1, 0], 1, C64::new(1.0, 0.0));
        let mut d = CMatrix::zeros(2, 2);
        d[(1, 0)] = C64::new(1.0, 0.0);
        assert!(matches!(
            DgAlgebra::new(basis, mult, d, None),
            Err(AinfError::LeibnizViolated(_))
        ));
    }

    #[test]
    fn degenerate_inner_rejected() {
        let alg = samples::heisenberg(C64::new(1.0, 0.0), None);
        let mut h = CMatrix::identity(8, 8);
        h[(0, 0)] = C64::new(0.0, 0.0);
        assert!(matches!(
            alg.clone().with_inner(h),
            Err(AinfError::InnerNotPositive(_))
        ));
        let mut h = CMatrix::identity(8, 8);
        h[(0, 1)] = C64::new(0.1, 0.0);
        h[(1, 0)] = C64::new(0.1, 0.0);
        assert!(matches!(
            alg.with_inner(h),
            Err(AinfError::InnerMixesDegrees)
        ));
    }
}
