//! dg-algebra fixtures: JSON round trips, cohomology against a rank count,
//! transfer residuals and a known Massey product.

use std::collections::BTreeMap;

use ainfell::ainf::{
    ainf_morphism_residual, ainf_residual, hodge_data, inclusion_morphism, transfer_from_table,
    AinfStructure, DgAlgebra, LambdaTable,
};
use ainfell::linalg::CMatrix;
use ainfell::C64;

fn load(name: &str) -> DgAlgebra {
    let path = format!("{}/tests/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
    DgAlgebra::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const NAMES: [&str; 3] = ["heisenberg", "filiform", "upper_triangular"];

fn rank(m: &CMatrix) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let s = m.clone().singular_values();
    let top = s.max();
    s.iter().filter(|&&x| x > 1e-10 * top.max(1.0)).count()
}

/// Cohomology dimensions from ranks of `d` restricted to each degree.
fn betti_by_rank(alg: &DgAlgebra) -> BTreeMap<i32, usize> {
    let b = alg.basis();
    let block = |from: i32| {
        let (rows, cols) = (b.indices_of_degree(from + 1), b.indices_of_degree(from));
        CMatrix::from_fn(rows.len(), cols.len(), |i, j| alg.d()[(rows[i], cols[j])])
    };
    b.distinct_degrees()
        .into_iter()
        .map(|p| {
            (
                p,
                b.indices_of_degree(p).len() - rank(&block(p)) - rank(&block(p - 1)),
            )
        })
        .collect()
}

fn betti_by_hodge(alg: &DgAlgebra) -> BTreeMap<i32, usize> {
    let hd = hodge_data(alg).unwrap();
    let mut out: BTreeMap<i32, usize> = alg
        .basis()
        .distinct_degrees()
        .into_iter()
        .map(|p| (p, 0))
        .collect();
    for p in hd.harmonic_basis.degrees() {
        *out.get_mut(&p).unwrap() += 1;
    }
    out
}

#[test]
fn fixtures_round_trip() {
    for name in NAMES {
        let alg = load(name);
        let again = DgAlgebra::from_json(&alg.to_json()).unwrap();
        assert_eq!(alg.to_json(), again.to_json(), "{name}");
        let r = alg.axiom_residuals();
        assert_eq!(
            (r.d_squared, r.associativity, r.leibniz),
            (0.0, 0.0, 0.0),
            "{name}"
        );
    }
}

#[test]
fn nilmanifold_betti_numbers() {
    let expect = |v: &[usize]| {
        v.iter()
            .enumerate()
            .map(|(p, &b)| (p as i32, b))
            .collect::<BTreeMap<_, _>>()
    };
    assert_eq!(betti_by_hodge(&load("heisenberg")), expect(&[1, 2, 2, 1]));
    assert_eq!(betti_by_hodge(&load("filiform")), expect(&[1, 2, 2, 2, 1]));
}

#[test]
fn harmonic_dimensions_match_rank_count() {
    for name in NAMES {
        let alg = load(name);
        assert_eq!(betti_by_hodge(&alg), betti_by_rank(&alg), "{name}");
    }
}

#[test]
fn transfer_on_fixtures() {
    for name in NAMES {
        let alg = load(name);
        let hd = hodge_data(&alg).unwrap();
        let table = LambdaTable::build(&alg, &hd, 4);
        let b = transfer_from_table(&alg, &hd, &table, 4).unwrap();
        assert!(ainf_residual(&b) < 1e-12, "{name}");
        let f = inclusion_morphism(&table, &hd, 4);
        let a = AinfStructure::from_dg_algebra(&alg);
        assert!(ainf_morphism_residual(&f, &a, &b) < 1e-12, "{name}");
    }
}

#[test]
fn heisenberg_massey_product() {
    // dz = xy, so <x, x, y> = ±[xz] with no indeterminacy; with the standard
    // metric xz is harmonic and m3(x, x, y) = ±xz exactly.
    let alg = load("heisenberg");
    let hd = hodge_data(&alg).unwrap();
    let b = transfer_from_table(&alg, &hd, &LambdaTable::build(&alg, &hd, 3), 3).unwrap();
    let idx = |s: &str| {
        alg.basis()
            .labels()
            .iter()
            .position(|l| l.name == s)
            .unwrap()
    };
    let harmonic = |i: usize| {
        let mut e = vec![C64::new(0.0, 0.0); alg.dim()];
        e[i] = C64::new(1.0, 0.0);
        let v = &hd.coords * ainfell::linalg::CVector::from_vec(e);
        v.as_slice().to_vec()
    };
    let (x, y) = (harmonic(idx("x1")), harmonic(idx("x2")));
    let out = b.m(3).unwrap().apply(&[&x, &x, &y]);
    let in_a = &hd.embed * ainfell::linalg::CVector::from_vec(out);
    let xz = idx("x1x3");
    for (i, z) in in_a.iter().enumerate() {
        let want = if i == xz { 1.0 } else { 0.0 };
        assert!((z.norm() - want).abs() < 1e-12, "component {i}: {z}");
    }
    // m3(x, y, y) lands in the class of yz.
    let out = b.m(3).unwrap().apply(&[&x, &y, &y]);
    let in_a = &hd.embed * ainfell::linalg::CVector::from_vec(out);
    assert!((in_a[idx("x2x3")].norm() - 1.0).abs() < 1e-12);
}

#[test]
fn inclusion_sign_matters() {
    // f_n = -Q λ_n; flipping the higher components breaks the morphism
    // equation on an algebra with nontrivial Massey products.
    let alg = load("heisenberg");
    let hd = hodge_data(&alg).unwrap();
    let table = LambdaTable::build(&alg, &hd, 3);
    let b = transfer_from_table(&alg, &hd, &table, 3).unwrap();
    let a = AinfStructure::from_dg_algebra(&alg);
    let mut f = inclusion_morphism(&table, &hd, 3);
    assert!(ainf_morphism_residual(&f, &a, &b) < 1e-12);
    for m in f.components.iter_mut().skip(1) {
        let flipped = m.data().iter().map(|z| -z).collect();
        *m = ainfell::ainf::MultiLinear::from_raw(m.arity(), m.in_dim(), m.out_dim(), flipped);
    }
    assert!(ainf_morphism_residual(&f, &a, &b) > 0.1);
}
