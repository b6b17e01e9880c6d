//! The `f_2`-homotopy between the `m_3` obtained from two inner products on
//! the same dg-algebra.

use super::algebra::DgAlgebra;
use super::graded::{GradedBasis, MultiLinear};
use super::hodge::hodge_data;
use super::residual::{homotopy_m3_residual, homotopy_rhs};
use super::transfer::transfer;
use super::AinfError;
use crate::linalg::{lstsq, CMatrix, CVector, LeastSquares};
use crate::C64;

#[derive(Clone, Debug)]
pub struct HomotopyFit {
    pub basis: GradedBasis,
    pub product: MultiLinear,
    pub m3: MultiLinear,
    /// `m'_3` moved onto the first harmonic space.
    pub m3_transported: MultiLinear,
    pub f2: MultiLinear,
    /// `homotopy_m3_residual` of the solved `f_2`.
    pub residual: f64,
    /// Difference between the two `m_2` after transport.
    pub m2_gap: f64,
    pub condition: f64,
}

/// Least-squares `f_2` of degree `-1` with
/// `m'_3 - m_3 = (-1)^{ã_1} a_1 f_2(a_2,a_3) - f_2(a_1,a_2) a_3 - f_2(a_1 a_2,a_3) + f_2(a_1,a_2 a_3)`.
pub fn solve_f2(
    basis: &GradedBasis,
    m3: &MultiLinear,
    m3p: &MultiLinear,
    product: &MultiLinear,
) -> Result<(MultiLinear, LeastSquares), AinfError> {
    let n = basis.dim();
    let mut unknowns = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for o in 0..n {
                if basis.degree(o) == basis.degree(i) + basis.degree(j) - 1 {
                    unknowns.push((i, j, o));
                }
            }
        }
    }
    let rows = n.pow(3) * n;
    let mut a = CMatrix::zeros(rows, unknowns.len());
    for (c, &(i, j, o)) in unknowns.iter().enumerate() {
        let mut f2 = MultiLinear::zeros(2, n, n);
        f2.set(&[i, j], o, C64::new(1.0, 0.0));
        let col = homotopy_rhs(basis, &f2, product);
        for (r, z) in col.data().iter().enumerate() {
            a[(r, c)] = *z;
        }
    }
    let b = CVector::from_iterator(rows, m3p.data().iter().zip(m3.data()).map(|(x, y)| x - y));
    let ls = lstsq(&a, &b, 1e-12);
    let mut f2 = MultiLinear::zeros(2, n, n);
    for (c, &(i, j, o)) in unknowns.iter().enumerate() {
        f2.set(&[i, j], o, ls.solution[c]);
    }
    Ok((f2, ls))
}

/// Transfers with the inner products `h1` and `h2`, moves the second `m_3`
/// onto the first harmonic space along `pr_2|_{B_1}` and solves for `f_2`.
pub fn homotopy_between(
    alg: &DgAlgebra,
    h1: &CMatrix,
    h2: &CMatrix,
) -> Result<HomotopyFit, AinfError> {
    let a1 = alg.clone().with_inner(h1.clone())?;
    let a2 = alg.clone().with_inner(h2.clone())?;
    let hd1 = hodge_data(&a1)?;
    let hd2 = hodge_data(&a2)?;
    if hd1.harmonic_basis.degrees() != hd2.harmonic_basis.degrees() {
        return Err(AinfError::Shape("harmonic spaces differ".into()));
    }
    let s1 = transfer(&a1, &hd1, 3)?;
    let s2 = transfer(&a2, &hd2, 3)?;
    let phi = &hd2.coords * &hd2.pr * &hd1.embed;
    let moved = s2.transport(&phi)?;
    let product = s1.m(2).expect("arity 3").clone();
    let m2_gap = moved
        .m(2)
        .expect("arity 3")
        .distance(&product)
        .unwrap_or(f64::INFINITY);
    let m3 = s1.m(3).expect("arity 3").clone();
    let m3p = moved.m(3).expect("arity 3").clone();
    let basis = s1.space().clone();
    let (f2, ls) = solve_f2(&basis, &m3, &m3p, &product)?;
    let residual = homotopy_m3_residual(&basis, &m3, &m3p, &f2, &product)?;
    Ok(HomotopyFit {
        basis,
        product,
        m3,
        m3_transported: m3p,
        f2,
        residual,
        m2_gap,
        condition: ls.condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ainf::samples;

    #[test]
    fn random_f2_is_recovered_up_to_kernel() {
        let alg = samples::random_dg_algebra(4);
        let hd = hodge_data(&alg).unwrap();
        let s = transfer(&alg, &hd, 3).unwrap();
        let basis = s.space().clone();
        let product = s.m(2).unwrap().clone();
        let n = basis.dim();
        let mut f2 = MultiLinear::zeros(2, n, n);
        for i in 0..n {
            for j in 0..n {
                for o in 0..n {
                    if basis.degree(o) == basis.degree(i) + basis.degree(j) - 1 {
                        f2.set(
                            &[i, j],
                            o,
                            C64::new(0.3 * i as f64 - 0.1, 0.2 * j as f64 + 0.05 * o as f64),
                        );
                    }
                }
            }
        }
        let m3 = s.m(3).unwrap().clone();
        let rhs = homotopy_rhs(&basis, &f2, &product);
        let data: Vec<C64> = m3
            .data()
            .iter()
            .zip(rhs.data())
            .map(|(a, b)| a + b)
            .collect();
        let m3p = MultiLinear::from_raw(3, n, n, data);
        assert!(homotopy_m3_residual(&basis, &m3, &m3p, &f2, &product).unwrap() < 1e-14);
        let (g2, _) = solve_f2(&basis, &m3, &m3p, &product).unwrap();
        assert!(homotopy_m3_residual(&basis, &m3, &m3p, &g2, &product).unwrap() < 1e-10);
    }

    #[test]
    fn two_inner_products_are_homotopic() {
        for seed in [0, 1, 2, 3, 4, 5, 6, 7, 8] {
            let alg = samples::random_dg_algebra(seed).without_inner();
            let h1 = samples::random_inner_product(alg.basis(), 100 + seed);
            let h2 = samples::random_inner_product(alg.basis(), 200 + seed);
            let fit = homotopy_between(&alg, &h1, &h2).unwrap();
            assert!(fit.m2_gap < 1e-10, "{seed}: {}", fit.m2_gap);
            assert!(fit.residual < 1e-8, "{seed}: {}", fit.residual);
        }
    }
}
