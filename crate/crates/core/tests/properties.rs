//! Property tests for the invariants of the theta functions, the lattice
//! sums, the index set `T` and the transfer.

use num_integer::Integer;
use proptest::prelude::*;

use ainfell::ainf::samples::{
    heisenberg, random_basis_change, random_dg_algebra, random_inner_product,
};
use ainfell::ainf::{
    ainf_morphism_residual, ainf_residual, hodge_data, inclusion_morphism, transfer,
    transfer_from_table, AinfStructure, LambdaTable,
};
use ainfell::elliptic::{
    per1_residual, per2_residual, phi2, phi3, t_set_enumerate, EllipticError, EllipticOptions,
    LatticeCoordinates, Side, TSetElement, TripleProductQuery,
};
use ainfell::theta::{
    addition_formula_residual, theta, theta_char, theta_char_explicit, Characteristic, Modulus,
    TruncationPolicy,
};
use ainfell::{C64, I};
use std::f64::consts::PI;

fn tau_strategy() -> impl Strategy<Value = Modulus> {
    (-0.5..0.5f64, 0.7..1.6f64).prop_map(|(re, im)| Modulus::new(C64::new(re, im)).unwrap())
}

fn z_strategy() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_quasi_periodic(x in z_strategy(), tau in tau_strategy()) {
        let pol = TruncationPolicy::default();
        let t0 = theta(x, &tau, &pol).unwrap();
        prop_assert!(rel(theta(x + 1.0, &tau, &pol).unwrap(), t0) < 1e-13);
        let shifted = theta(x + tau.tau(), &tau, &pol).unwrap();
        let factor = (-I * PI * tau.tau() - 2.0 * PI * I * x).exp();
        prop_assert!(rel(shifted, factor * t0) < 1e-13);
    }

    #[test]
    fn theta_characteristic_matches_shifted_series(
        p in 0i64..7, q in 1i64..7, x in z_strategy(), tau in tau_strategy()
    ) {
        let pol = TruncationPolicy::default();
        let r = Characteristic::new(p, q).unwrap();
        let a = theta_char(&r, x, &tau, &pol).unwrap();
        let b = theta_char_explicit(&r, x, &tau, &pol).unwrap();
        prop_assert!(rel(a, b) < 1e-13);
    }

    #[test]
    fn addition_formula_holds(
        k in 1i64..4, l in 1i64..4, b in -3i64..4, c in -3i64..4,
        u in z_strategy(), v in z_strategy(), x in z_strategy(), tau in tau_strategy()
    ) {
        let r = addition_formula_residual(k, l, b, c, u, v, x, &tau, &TruncationPolicy::default()).unwrap();
        prop_assert!(r < 1e-9);
    }

    #[test]
    fn lattice_coordinates_round_trip(z in z_strategy(), tau in tau_strategy()) {
        let c = LatticeCoordinates::from_value(z, &tau);
        let back = LatticeCoordinates::from_coords(c.z1, c.z2, &tau);
        prop_assert!((back.value - z).norm() < 1e-14);
    }

    #[test]
    fn t_set_maps_respect_relations(
        k in 1i64..6, l in 1i64..6, b in -10i64..10, c in -10i64..10, p in -10i64..10
    ) {
        let s = TSetElement { b, c, p };
        let period = (k + l) / k.gcd(&l);
        let moves = [
            TSetElement { b: b + k, c, p: p - 1 },
            TSetElement { b, c: c + l, p: p + 1 },
            TSetElement { b, c, p: p + period },
        ];
        let (f2, f3) = (phi2(&s, k, l).unwrap(), phi3(&s, k, l));
        for m in moves {
            prop_assert_eq!(phi2(&m, k, l).unwrap(), f2);
            prop_assert_eq!(phi3(&m, k, l), f3);
            prop_assert_eq!(m.canonical(k, l), s.canonical(k, l));
        }
        let fibre = t_set_enumerate(k, l, b.rem_euclid(k), c.rem_euclid(l));
        prop_assert_eq!(fibre.len() as i64, period);
        prop_assert!(fibre.contains(&s.canonical(k, l)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn holomorphic_and_fukaya_series_are_periodic(
        k in 1i64..4, l in 1i64..4, a in 0i64..3, b in 0i64..3, c in 0i64..3, d in 0i64..3,
        u in (0.05..0.95f64, 0.05..0.95f64), v in (0.0..1.0f64, 0.0..1.0f64), tau in tau_strategy()
    ) {
        let q = TripleProductQuery {
            k, l, a: a % k, b: b % k, c: c % l, d: d % l,
            u: LatticeCoordinates::from_coords(u.0, u.1, &tau),
            v: LatticeCoordinates::from_coords(v.0, v.1, &tau),
            tau,
        };
        let opts = EllipticOptions::default();
        for side in [Side::Holomorphic, Side::Fukaya] {
            for r in [per1_residual(side, &q, &opts), per2_residual(side, &q, &opts)] {
                match r {
                    Ok(r) => prop_assert!(r < 1e-8, "{side:?}: {r:e}"),
                    Err(EllipticError::Transversality { .. } | EllipticError::PoleProximity { .. }) => {}
                    Err(e) => prop_assert!(false, "{e}"),
                }
            }
        }
    }

    #[test]
    fn hodge_identities_on_corpus(seed in 0u64..10_000) {
        let alg = random_dg_algebra(seed);
        let r = hodge_data(&alg).unwrap().residuals(&alg);
        for x in [r.pr_formula, r.pr_idempotent, r.pr_q, r.q_squared, r.pr_d_pr, r.green_laplacian] {
            prop_assert!(x < 1e-10, "{r:?}");
        }
    }

    #[test]
    fn transfer_satisfies_ainf_relations(
        re in -2.0..2.0f64, im in -2.0..2.0f64, seed in 0u64..10_000
    ) {
        let base = heisenberg(C64::new(re, im) + C64::new(0.1, 0.0), None);
        let t = random_basis_change(base.basis(), seed);
        let alg = base.change_basis(&t).unwrap();
        let h = random_inner_product(alg.basis(), seed);
        let alg = alg.with_inner(h).unwrap();
        let hd = hodge_data(&alg).unwrap();
        let table = LambdaTable::build(&alg, &hd, 4);
        let st = transfer_from_table(&alg, &hd, &table, 4).unwrap();
        prop_assert!(ainf_residual(&st) < 1e-10);
        let f = inclusion_morphism(&table, &hd, 4);
        prop_assert!(ainf_morphism_residual(&f, &AinfStructure::from_dg_algebra(&alg), &st) < 1e-9);
        prop_assert_eq!(transfer(&alg, &hd, 4).unwrap().dim(), st.dim());
    }
}
