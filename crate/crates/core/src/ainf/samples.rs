//! Small dg-algebras used as fixtures and as the random test corpus.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::algebra::DgAlgebra;
use super::graded::{BasisLabel, GradedBasis, MultiLinear};
use crate::linalg::CMatrix;
use crate::C64;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rand_c(r: &mut ChaCha8Rng) -> C64 {
    C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

/// Sign of `e_s e_t` in the exterior algebra with basis indexed by bitmasks.
fn wedge_sign(s: usize, t: usize) -> f64 {
    let mut swaps = 0u32;
    let mut bits = t;
    while bits != 0 {
        let i = bits.trailing_zeros();
        swaps += (s >> (i + 1)).count_ones();
        bits &= bits - 1;
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `Λ(x_1, ..., x_g)` with `deg x_i = 1`. Basis vectors are indexed by bitmask
/// and `d` is extended from the generators by the Leibniz rule;
/// `dgen[i]` lists `(mask, coefficient)` terms of `d(x_{i+1})`.
pub fn exterior_algebra(ngen: usize, dgen: &[Vec<(usize, C64)>]) -> DgAlgebra {
    assert_eq!(dgen.len(), ngen);
    let dim = 1usize << ngen;
    let labels = (0..dim)
        .map(|s| BasisLabel {
            name: if s == 0 {
                "1".to_string()
            } else {
                (0..ngen)
                    .filter(|i| s >> i & 1 == 1)
                    .map(|i| format!("x{}", i + 1))
                    .collect::<Vec<_>>()
                    .join("")
            },
            degree: s.count_ones() as i32,
        })
        .collect();
    let basis = GradedBasis::new(labels).expect("distinct monomials");
    let mut mult = MultiLinear::zeros(2, dim, dim);
    for s in 0..dim {
        for t in 0..dim {
            if s & t == 0 {
                mult.set(&[s, t], s | t, C64::new(wedge_sign(s, t), 0.0));
            }
        }
    }
    // d(x_g · rest) = d(x_g) rest - x_g d(rest) with x_g the lowest generator.
    let mut d = CMatrix::zeros(dim, dim);
    for s in 1..dim {
        let i = s.trailing_zeros() as usize;
        let g = 1usize << i;
        let rest = s ^ g;
        let mut col = vec![C64::new(0.0, 0.0); dim];
        for &(m, c) in &dgen[i] {
            for (k, z) in mult.slot(&[m, rest]).iter().enumerate() {
                col[k] += c * z;
            }
        }
        let d_rest: Vec<C64> = d.column(rest).iter().copied().collect();
        for (r, z) in d_rest.iter().enumerate() {
            if z.norm() == 0.0 {
                continue;
            }
            for (k, w) in mult.slot(&[g, r]).iter().enumerate() {
                col[k] -= z * w;
            }
        }
        for (k, z) in col.into_iter().enumerate() {
            d[(k, s)] = z;
        }
    }
    DgAlgebra::new(basis, mult, d, None).expect("exterior model is a dg-algebra")
}

/// `Λ(x, y, z)` with `dz = c·xy`.
pub fn heisenberg(c: C64, inner: Option<CMatrix>) -> DgAlgebra {
    let alg = exterior_algebra(3, &[vec![], vec![], vec![(0b011, c)]]);
    match inner {
        Some(h) => alg.with_inner(h).expect("valid inner product"),
        None => alg,
    }
}

/// `Λ(x, y, z)` with `dx = 0` and `(dy, dz) = x ∧ A(y, z)`; `d² = 0` for every
/// `A` because `x ∧ x = 0`.
pub fn solvable_lie(a: [[C64; 2]; 2]) -> DgAlgebra {
    exterior_algebra(
        3,
        &[
            vec![],
            vec![(0b011, a[0][0]), (0b101, a[0][1])],
            vec![(0b011, a[1][0]), (0b101, a[1][1])],
        ],
    )
}

/// `Λ(x_1, .., x_4)` with `dx_3 = c_1 x_1x_2`, `dx_4 = c_2 x_1x_3`.
pub fn filiform(c1: C64, c2: C64) -> DgAlgebra {
    exterior_algebra(4, &[vec![], vec![], vec![(0b0011, c1)], vec![(0b0101, c2)]])
}

/// Upper-triangular matrices over a graded vector space with degrees `g`,
/// `E_ij` of degree `g_i - g_j`, and `d(a) = δa - (-1)^{|a|} aδ` for a
/// square-zero `δ` of degree 1 assembled from `delta` (entries `(i, j, c)`).
pub fn upper_triangular(g: &[i32], delta: &[(usize, usize, C64)]) -> DgAlgebra {
    let n = g.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let dim = pairs.len();
    let index = |i: usize, j: usize| pairs.iter().position(|&p| p == (i, j));
    let labels = pairs
        .iter()
        .map(|&(i, j)| BasisLabel {
            name: format!("E{i}{j}"),
            degree: g[i] - g[j],
        })
        .collect();
    let basis = GradedBasis::new(labels).expect("distinct entries");
    let mut mult = MultiLinear::zeros(2, dim, dim);
    for (a, &(i, j)) in pairs.iter().enumerate() {
        for (b, &(j2, k)) in pairs.iter().enumerate() {
            if j == j2 {
                let c = index(i, k).expect("upper triangular is closed");
                mult.set(&[a, b], c, C64::new(1.0, 0.0));
            }
        }
    }
    let mut dv = vec![C64::new(0.0, 0.0); dim];
    for &(i, j, c) in delta {
        assert_eq!(g[i] - g[j], 1, "δ must have degree 1");
        dv[index(i, j).expect("δ is upper triangular")] += c;
    }
    let mut d = CMatrix::zeros(dim, dim);
    for a in 0..dim {
        let mut e = vec![C64::new(0.0, 0.0); dim];
        e[a] = C64::new(1.0, 0.0);
        let left = mult.apply(&[&dv, &e]);
        let right = mult.apply(&[&e, &dv]);
        let s = if basis.parity(a) == 0 { 1.0 } else { -1.0 };
        for k in 0..dim {
            d[(k, a)] = left[k] - right[k] * s;
        }
    }
    DgAlgebra::new(basis, mult, d, None).expect("δ squares to zero")
}

/// Hermitian positive definite Gram matrix, block diagonal by degree.
pub fn random_inner_product(basis: &GradedBasis, seed: u64) -> CMatrix {
    let mut r = rng(seed ^ 0x5eed_1a7e);
    let n = basis.dim();
    let mut h = CMatrix::zeros(n, n);
    for deg in basis.distinct_degrees() {
        let idx = basis.indices_of_degree(deg);
        let m = idx.len();
        let b = DMatrix::from_fn(m, m, |_, _| rand_c(&mut r));
        let block = b.adjoint() * &b + CMatrix::identity(m, m);
        for (p, &i) in idx.iter().enumerate() {
            for (q, &j) in idx.iter().enumerate() {
                h[(i, j)] = block[(p, q)];
            }
        }
    }
    h
}

/// Degree-preserving basis change `1 + 0.5·R` block by block.
pub fn random_basis_change(basis: &GradedBasis, seed: u64) -> CMatrix {
    let mut r = rng(seed ^ 0xba5e_c4a6);
    let n = basis.dim();
    let mut t = CMatrix::identity(n, n);
    for deg in basis.distinct_degrees() {
        let idx = basis.indices_of_degree(deg);
        for &i in &idx {
            for &j in &idx {
                t[(i, j)] += rand_c(&mut r) * 0.5;
            }
        }
    }
    t
}

/// Member `seed` of the random corpus: a solvable Lie model, a Heisenberg
/// model or an upper-triangular algebra (all of dimension ≤ 8), in a random
/// basis and with a random inner product.
pub fn random_dg_algebra(seed: u64) -> DgAlgebra {
    let mut r = rng(seed);
    let base = match seed % 3 {
        0 => solvable_lie([
            [rand_c(&mut r), rand_c(&mut r)],
            [rand_c(&mut r), rand_c(&mut r)],
        ]),
        1 => heisenberg(rand_c(&mut r) + C64::new(0.5, 0.0), None),
        _ => {
            let shapes: [&[i32]; 3] = [&[1, 0, 0], &[2, 1, 0], &[1, 1, 0]];
            let g = shapes[r.gen_range(0..shapes.len())];
            let mut cand: Vec<(usize, usize)> = Vec::new();
            for i in 0..g.len() {
                for j in i + 1..g.len() {
                    if g[i] - g[j] == 1 {
                        cand.push((i, j));
                    }
                }
            }
            // Keep entries whose products vanish so that δ² = 0.
            let mut delta: Vec<(usize, usize, C64)> = Vec::new();
            for &(i, j) in &cand {
                if delta.iter().all(|&(a, b, _)| b != i && j != a) {
                    delta.push((i, j, rand_c(&mut r) + C64::new(1.0, 0.0)));
                }
            }
            upper_triangular(g, &delta)
        }
    };
    let t = random_basis_change(base.basis(), seed);
    let alg = base.change_basis(&t).expect("invertible basis change");
    let h = random_inner_product(alg.basis(), seed);
    alg.with_inner(h).expect("random inner product is valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Nilmanifold {
    Heisenberg,
    Filiform,
}

/// Gram matrix on `Λ(generators)` induced by a Hermitian metric `g` on the
/// generators: `<e_I, e_J> = det g[I, J]`.
pub fn induced_inner_product(g: &CMatrix) -> CMatrix {
    let ngen = g.nrows();
    let dim = 1usize << ngen;
    let bits = |s: usize| {
        (0..ngen)
            .filter(move |i| s >> i & 1 == 1)
            .collect::<Vec<_>>()
    };
    CMatrix::from_fn(dim, dim, |s, t| {
        let (i, j) = (bits(s), bits(t));
        if i.len() != j.len() {
            return C64::new(0.0, 0.0);
        }
        if i.is_empty() {
            return C64::new(1.0, 0.0);
        }
        CMatrix::from_fn(i.len(), j.len(), |a, b| g[(i[a], j[b])]).determinant()
    })
}

/// A nilmanifold model with random structure constants, an inner product
/// induced from a random Hermitian metric on the generators, and the pairing
/// `<a, b>` = top-degree coefficient of `ab`.
pub fn nilmanifold_pairing_instance(kind: Nilmanifold, seed: u64) -> (DgAlgebra, CMatrix) {
    let mut r = rng(seed ^ 0x4e11_0000);
    let (alg, ngen) = match kind {
        Nilmanifold::Heisenberg => (heisenberg(rand_c(&mut r) + C64::new(1.0, 0.0), None), 3),
        Nilmanifold::Filiform => (
            filiform(
                rand_c(&mut r) + C64::new(1.0, 0.0),
                rand_c(&mut r) + C64::new(1.0, 0.0),
            ),
            4,
        ),
    };
    let b = DMatrix::from_fn(ngen, ngen, |_, _| rand_c(&mut r));
    let g = b.adjoint() * &b + CMatrix::identity(ngen, ngen);
    let h = induced_inner_product(&g);
    let dim = alg.dim();
    let top = dim - 1;
    let pairing = CMatrix::from_fn(dim, dim, |i, j| alg.mult().get(&[i, j], top));
    (
        alg.with_inner(h).expect("induced metric is positive"),
        pairing,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exterior_signs() {
        let alg = exterior_algebra(3, &[vec![], vec![], vec![]]);
        // x2 x1 = -x1x2
        assert_eq!(alg.mult().get(&[0b010, 0b001], 0b011), C64::new(-1.0, 0.0));
        assert_eq!(alg.mult().get(&[0b001, 0b010], 0b011), C64::new(1.0, 0.0));
        assert_eq!(alg.basis().labels()[0b101].name, "x1x3");
    }

    #[test]
    fn corpus_is_small_and_valid() {
        for seed in 0..30 {
            let alg = random_dg_algebra(seed);
            assert!(alg.dim() <= 8);
            let r = alg.axiom_residuals();
            assert!(r.d_squared < 1e-12 && r.leibniz < 1e-12 && r.associativity < 1e-12);
        }
    }

    #[test]
    fn filiform_has_expected_differential() {
        let alg = filiform(C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        assert_eq!(alg.d()[(0b0011, 0b0100)], C64::new(1.0, 0.0));
        assert_eq!(alg.d()[(0b0101, 0b1000)], C64::new(1.0, 0.0));
    }
}
