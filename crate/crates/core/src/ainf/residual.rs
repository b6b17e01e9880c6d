//! Residual checkers for the A∞-identities, evaluated exhaustively on tuples
//! of basis vectors.

use rayon::prelude::*;

use super::algebra::DgAlgebra;
use super::graded::{sign, GradedBasis, MultiLinear};
use super::hodge::HodgeData;
use super::transfer::{transfer_from_table, unflatten, AinfMorphism, AinfStructure, LambdaTable};
use super::AinfError;
use crate::linalg::CMatrix;
use crate::C64;

/// Threshold for the `Q`-adjointness precondition of the cyclic check.
pub const ADJOINTNESS_TOL: f64 = 1e-10;

fn max_norm_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

fn max_norm(a: &[C64]) -> f64 {
    a.iter().fold(0.0, |acc, x| acc.max(x.norm()))
}

/// Parallel max over `0..count`; the max of finite values does not depend on
/// the reduction order.
fn par_max(count: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    (0..count).into_par_iter().map(f).reduce(|| 0.0, f64::max)
}

fn concat_around(idx: &[usize], lo: usize, hi: usize) -> Vec<usize> {
    let mut rest = Vec::with_capacity(idx.len() - (hi - lo));
    rest.extend_from_slice(&idx[..lo]);
    rest.extend_from_slice(&idx[hi..]);
    rest
}

/// Max over basis tuples of arity `≤ K` of the constraint sum
/// `Σ_{k+l=n+1} Σ_j (-1)^{l(ã_1+..+ã_j) + j(l-1) + (k-1)l} m_k(a_1..a_j, m_l(a_{j+1}..a_{j+l}), ..)`.
pub fn ainf_residual(s: &AinfStructure) -> f64 {
    (1..=s.max_arity())
        .map(|n| ainf_residual_at(s, n))
        .fold(0.0, f64::max)
}

/// The constraint at a single arity `n`, dropping terms whose `m_k` or `m_l`
/// is not stored. For `n > K` this still tests the stored products, e.g.
/// arity `K + 1` with `m_1 = 0` is the first place an error in `m_K` shows up.
pub fn ainf_residual_at(s: &AinfStructure, n: usize) -> f64 {
    let h = s.dim();
    if h == 0 || n == 0 {
        return 0.0;
    }
    let basis = s.space();
    par_max(h.pow(n as u32), |flat| {
        let idx = unflatten(flat, h, n);
        let p: Vec<i64> = idx.iter().map(|&i| basis.parity(i)).collect();
        let mut total = vec![C64::new(0.0, 0.0); h];
        for k in 1..=n {
            let l = n + 1 - k;
            let (Some(mk), Some(ml)) = (s.m(k), s.m(l)) else {
                continue;
            };
            for j in 0..k {
                let inner = ml.slot(&idx[j..j + l]);
                if max_norm(inner) == 0.0 {
                    continue;
                }
                let pj: i64 = p[..j].iter().sum();
                let e = l as i64 * pj + (j * (l - 1) + (k - 1) * l) as i64;
                let v = mk.apply_mixed(&concat_around(&idx, j, j + l), j, inner);
                let sg = sign(e);
                for (t, x) in total.iter_mut().zip(&v) {
                    *t += x * sg;
                }
            }
        }
        max_norm(&total)
    })
}

fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Max-norm residual of the morphism equation for `f: B -> A` over basis
/// tuples of arity `≤` the number of components:
///
/// ```text
/// Σ_{r+s+t=n} (-1)^{r+st+s(ã_1+..+ã_r)} f_{r+1+t}(1^r ⊗ m^B_s ⊗ 1^t)
///   = Σ_{i_1+..+i_r=n} (-1)^{ε} m^A_r(f_{i_1} ⊗ .. ⊗ f_{i_r})
/// ```
///
/// with `ε = Σ_j (r-1-j)(i_j-1) + Σ_u (1-i_u)(ã of the arguments before block u)`.
pub fn ainf_morphism_residual(f: &AinfMorphism, a: &AinfStructure, b: &AinfStructure) -> f64 {
    let h = b.dim();
    let dim_a = a.dim();
    let kf = f.max_arity();
    let basis = b.space();
    let mut worst = 0.0_f64;
    for n in 1..=kf {
        if h == 0 {
            break;
        }
        let comps = compositions(n);
        let r = par_max(h.pow(n as u32), |flat| {
            let idx = unflatten(flat, h, n);
            let p: Vec<i64> = idx.iter().map(|&i| basis.parity(i)).collect();
            let mut lhs = vec![C64::new(0.0, 0.0); dim_a];
            for s in 1..=n {
                let Some(ms) = b.m(s) else { continue };
                for r in 0..=n - s {
                    let t = n - s - r;
                    let Some(fu) = f.f(r + 1 + t) else { continue };
                    let inner = ms.slot(&idx[r..r + s]);
                    if max_norm(inner) == 0.0 {
                        continue;
                    }
                    let pr: i64 = p[..r].iter().sum();
                    let sg = sign((r + s * t) as i64 + s as i64 * pr);
                    let v = fu.apply_mixed(&concat_around(&idx, r, r + s), r, inner);
                    for (x, y) in lhs.iter_mut().zip(&v) {
                        *x += y * sg;
                    }
                }
            }
            let mut rhs = vec![C64::new(0.0, 0.0); dim_a];
            for comp in &comps {
                let rr = comp.len();
                let Some(mr) = a.m(rr) else { continue };
                if comp.iter().any(|&i| i > kf) {
                    continue;
                }
                let mut e: i64 = 0;
                let mut pos = 0;
                let mut outs: Vec<&[C64]> = Vec::with_capacity(rr);
                for (j, &i) in comp.iter().enumerate() {
                    let before: i64 = p[..pos].iter().sum();
                    e += (1 - i as i64) * before + (rr as i64 - 1 - j as i64) * (i as i64 - 1);
                    outs.push(f.f(i).expect("checked arity").slot(&idx[pos..pos + i]));
                    pos += i;
                }
                let v = mr.apply(&outs);
                let sg = sign(e);
                for (x, y) in rhs.iter_mut().zip(&v) {
                    *x += y * sg;
                }
            }
            max_norm_diff(&lhs, &rhs)
        });
        worst = worst.max(r);
    }
    worst
}

fn check_square(m: &MultiLinear, arity: usize, n: usize, what: &str) -> Result<(), AinfError> {
    if m.arity() != arity || m.in_dim() != n || m.out_dim() != n {
        return Err(AinfError::Shape(what.to_string()));
    }
    Ok(())
}

/// `(-1)^{ã_1} a_1 f_2(a_2,a_3) - f_2(a_1,a_2) a_3 - f_2(a_1 a_2, a_3) + f_2(a_1, a_2 a_3)`
/// on all basis triples.
pub fn homotopy_rhs(basis: &GradedBasis, f2: &MultiLinear, product: &MultiLinear) -> MultiLinear {
    let n = basis.dim();
    MultiLinear::from_fn(3, n, n, |idx| {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        let s = sign(basis.parity(i));
        let t1 = product.apply_mixed(&[i], 1, f2.slot(&[j, k]));
        let t2 = product.apply_mixed(&[k], 0, f2.slot(&[i, j]));
        let t3 = f2.apply_mixed(&[k], 0, product.slot(&[i, j]));
        let t4 = f2.apply_mixed(&[i], 1, product.slot(&[j, k]));
        (0..n).map(|o| t1[o] * s - t2[o] - t3[o] + t4[o]).collect()
    })
}

/// Max-norm residual of `m'_3 - m_3 = homotopy_rhs(f_2)` over basis triples.
pub fn homotopy_m3_residual(
    basis: &GradedBasis,
    m3: &MultiLinear,
    m3p: &MultiLinear,
    f2: &MultiLinear,
    product: &MultiLinear,
) -> Result<f64, AinfError> {
    let n = basis.dim();
    check_square(m3, 3, n, "m3")?;
    check_square(m3p, 3, n, "m3'")?;
    check_square(f2, 2, n, "f2")?;
    check_square(product, 2, n, "product")?;
    let rhs = homotopy_rhs(basis, f2, product);
    let mut worst = 0.0_f64;
    for ((a, b), c) in m3p.data().iter().zip(m3.data()).zip(rhs.data()) {
        worst = worst.max((a - b - c).norm());
    }
    Ok(worst)
}

/// Bilinear form `<a, b> = a^T P b` on `A`.
fn pair(p: &CMatrix, a: &[C64], b: &[C64]) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for (i, ai) in a.iter().enumerate() {
        if ai.norm() == 0.0 {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            s += ai * p[(i, j)] * bj;
        }
    }
    s
}

/// `max |<Q e_i, e_j> - (-1)^{ẽ_i} <e_i, Q e_j>|` over basis pairs.
pub fn q_adjoint_residual(alg: &DgAlgebra, hodge: &HodgeData, pairing: &CMatrix) -> f64 {
    let n = alg.dim();
    let lhs = hodge.q.transpose() * pairing;
    let rhs = pairing * &hodge.q;
    let mut worst = 0.0_f64;
    for i in 0..n {
        let s = sign(alg.basis().parity(i));
        for j in 0..n {
            worst = worst.max((lhs[(i, j)] - rhs[(i, j)] * s).norm());
        }
    }
    worst
}

/// Max over harmonic tuples of
/// `|<m_n(α_1..α_n), α_{n+1}> - (-1)^{n(α̃_1+1)} <α_1, m_n(α_2..α_{n+1})>|`.
///
/// Fails with [`AinfError::AdjointnessViolated`] when the pairing is not
/// `Q`-adjoint, since the identity is not expected to hold then.
pub fn pairing_cyclic_residual(
    alg: &DgAlgebra,
    hodge: &HodgeData,
    pairing: &CMatrix,
    n: usize,
) -> Result<f64, AinfError> {
    if n < 2 {
        return Err(AinfError::ArityTooSmall(n));
    }
    if pairing.nrows() != alg.dim() || pairing.ncols() != alg.dim() {
        return Err(AinfError::Shape("pairing".into()));
    }
    let adj = q_adjoint_residual(alg, hodge, pairing);
    if adj > ADJOINTNESS_TOL {
        return Err(AinfError::AdjointnessViolated(adj));
    }
    let table = LambdaTable::build(alg, hodge, n);
    let s = transfer_from_table(alg, hodge, &table, n)?;
    let pb = hodge.embed.transpose() * pairing * &hodge.embed;
    let h = s.dim();
    if h == 0 {
        return Ok(0.0);
    }
    let mn = s.m(n).expect("arity built");
    let basis = s.space();
    let unit = |i: usize| {
        let mut v = vec![C64::new(0.0, 0.0); h];
        v[i] = C64::new(1.0, 0.0);
        v
    };
    Ok(par_max(h.pow(n as u32 + 1), |flat| {
        let idx = unflatten(flat, h, n + 1);
        let left = pair(&pb, mn.slot(&idx[..n]), &unit(idx[n]));
        let right = pair(&pb, &unit(idx[0]), mn.slot(&idx[1..]));
        let sg = sign(n as i64 * (basis.parity(idx[0]) + 1));
        (left - right * sg).norm()
    }))
}
