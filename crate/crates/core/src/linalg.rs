//! Small dense helpers over `nalgebra` used by the Hodge decomposition and the
//! least-squares fits.

use nalgebra::{DMatrix, DVector};

use crate::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest absolute entry, 0 for an empty matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_slice(v: &[C64]) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Result of a least-squares solve.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub solution: CVector,
    /// Max-norm of `A x - b`.
    pub residual: f64,
    /// Ratio of largest to smallest singular value (infinite when rank deficient).
    pub condition: f64,
    pub rank: usize,
}

/// Minimum-norm least-squares solution of `A x = b` through the SVD.
/// Singular values below `rcond * s_max` are treated as zero.
pub fn lstsq(a: &CMatrix, b: &CVector, rcond: f64) -> LeastSquares {
    if a.ncols() == 0 || a.nrows() == 0 {
        return LeastSquares {
            solution: CVector::zeros(a.ncols()),
            residual: b.iter().fold(0.0, |acc: f64, z| acc.max(z.norm())),
            condition: 1.0,
            rank: 0,
        };
    }
    let svd = a.clone().svd(true, true);
    let s_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = rcond * s_max;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let s_min = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let full_rank = rank == a.ncols().min(a.nrows()) && a.nrows() >= a.ncols();
    let condition = if full_rank && s_min > 0.0 {
        s_max / s_min
    } else {
        f64::INFINITY
    };
    let u = svd.u.as_ref().expect("svd computed with u");
    let v_t = svd.v_t.as_ref().expect("svd computed with v_t");
    let mut utb = u.adjoint() * b;
    for (i, s) in svd.singular_values.iter().enumerate() {
        utb[i] = if *s > cutoff {
            utb[i] / *s
        } else {
            C64::new(0.0, 0.0)
        };
    }
    let solution = v_t.adjoint() * utb;
    let r = a * &solution - b;
    let residual = r.iter().fold(0.0, |acc: f64, z| acc.max(z.norm()));
    LeastSquares {
        solution,
        residual,
        condition,
        rank,
    }
}

/// Hermitian eigendecomposition: eigenvalues ascending and the matching
/// orthonormal eigenvectors as columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum_re: f64,
    sum_im: f64,
    c_re: f64,
    c_im: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: C64) {
        neumaier(&mut self.sum_re, &mut self.c_re, z.re);
        neumaier(&mut self.sum_im, &mut self.c_im, z.im);
    }

    pub fn value(&self) -> C64 {
        C64::new(self.sum_re + self.c_re, self.sum_im + self.c_im)
    }
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}
