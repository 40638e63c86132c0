mod common;

use common::{random_instance, rng, Family, ALL_FAMILIES};
use proptest::prelude::*;
use rand::Rng;
use sublap::lovasz::{
    chain_sum_eval, enumerate_extreme_points, greedy_vertex, lovasz_eval,
    threshold_integral_eval, Quadrature,
};
use sublap::oracle::{check_submodular, SubmodularOracle};
use sublap::polytope::{membership, PolytopeHandle};

/// Weighted coverage function; `F(V) > 0`, so shift invariance does not apply.
fn coverage_oracle(seed: u64, k: usize) -> SubmodularOracle {
    let mut r = rng(seed);
    let sets: Vec<(u64, f64)> = (0..4)
        .map(|_| (r.random_range(1..1u64 << k), r.random_range(0.1..1.0)))
        .collect();
    let values = (0..1u64 << k)
        .map(|m| sets.iter().filter(|(s, _)| s & m != 0).map(|(_, w)| w).sum())
        .collect();
    SubmodularOracle::table((0..k).collect(), values).unwrap()
}

fn family() -> impl Strategy<Value = Family> {
    (0..ALL_FAMILIES.len()).prop_map(|i| ALL_FAMILIES[i])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn evaluators_agree(seed in any::<u64>(), fam in family(), n in 2usize..8) {
        let mut r = rng(seed);
        let t = random_instance(&mut r, fam, n, 6);
        let x: Vec<f64> = (0..t.n()).map(|_| r.random_range(0.0..1.0)).collect();
        for f in t.functions() {
            let a = lovasz_eval(f, &x);
            let b = chain_sum_eval(f, &x);
            let c = threshold_integral_eval(f, &x, Quadrature::Exact).unwrap();
            prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
            prop_assert!((a - c).abs() <= 1e-9, "{} vs {}", a, c);
        }
    }

    #[test]
    fn evaluators_agree_without_normalization(seed in any::<u64>(), k in 1usize..7) {
        let f = coverage_oracle(seed, k);
        let mut r = rng(seed ^ 1);
        let x: Vec<f64> = (0..k).map(|_| r.random_range(0.0..1.0)).collect();
        let a = lovasz_eval(&f, &x);
        prop_assert!((a - chain_sum_eval(&f, &x)).abs() <= 1e-9);
        prop_assert!((a - threshold_integral_eval(&f, &x, Quadrature::Exact).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn greedy_vertex_lies_in_base_polytope(seed in any::<u64>(), fam in family(), n in 2usize..8) {
        let mut r = rng(seed);
        let t = random_instance(&mut r, fam, n, 6);
        let x: Vec<f64> = (0..t.n()).map(|_| r.random_range(-1.0..1.0)).collect();
        for f in t.functions() {
            let g = greedy_vertex(f, &x);
            let m = membership(&PolytopeHandle::new(f), &g.local).unwrap();
            prop_assert!(m.member, "{:?}", m);
        }
    }

    #[test]
    fn lovasz_extension_is_max_over_extreme_points(seed in any::<u64>(), fam in family(), n in 2usize..7) {
        let mut r = rng(seed);
        let t = random_instance(&mut r, fam, n, 4);
        let x: Vec<f64> = (0..t.n()).map(|_| r.random_range(-1.0..1.0)).collect();
        for f in t.functions() {
            let pts = enumerate_extreme_points(f).unwrap();
            let best = pts
                .iter()
                .map(|w| f.support().iter().zip(w).map(|(&v, a)| a * x[v]).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((best - lovasz_eval(f, &x)).abs() <= 1e-9);
        }
    }

    #[test]
    fn shift_invariance_when_ground_set_vanishes(
        seed in any::<u64>(), fam in family(), n in 2usize..8, c in -3.0f64..3.0,
    ) {
        let mut r = rng(seed);
        let t = random_instance(&mut r, fam, n, 6);
        prop_assume!(t.vanishes_on_ground_set());
        let x: Vec<f64> = (0..t.n()).map(|_| r.random_range(-1.0..1.0)).collect();
        let shifted: Vec<f64> = x.iter().map(|a| a + c).collect();
        for f in t.functions() {
            prop_assert!((lovasz_eval(f, &x) - lovasz_eval(f, &shifted)).abs() <= 1e-9);
        }
    }

    #[test]
    fn positive_homogeneity(seed in any::<u64>(), fam in family(), n in 2usize..8, s in 0.0f64..5.0) {
        let mut r = rng(seed);
        let t = random_instance(&mut r, fam, n, 6);
        let x: Vec<f64> = (0..t.n()).map(|_| r.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = x.iter().map(|a| a * s).collect();
        for f in t.functions() {
            let lhs = lovasz_eval(f, &y);
            let rhs = s * lovasz_eval(f, &x);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn generated_functions_are_submodular(seed in any::<u64>(), fam in family(), n in 2usize..9) {
        let mut r = rng(seed);
        let t = random_instance(&mut r, fam, n, 8);
        for f in t.functions() {
            prop_assert!(check_submodular(f).is_ok());
        }
    }
}

#[test]
fn midpoint_rule_converges_to_exact_value() {
    let f = coverage_oracle(7, 5);
    let x = [0.13, 0.71, 0.42, 0.99, 0.05];
    let exact = threshold_integral_eval(&f, &x, Quadrature::Exact).unwrap();
    let coarse = threshold_integral_eval(&f, &x, Quadrature::Midpoint(100)).unwrap();
    let fine = threshold_integral_eval(&f, &x, Quadrature::Midpoint(100_000)).unwrap();
    assert!((coarse - exact).abs() < 5e-2);
    assert!((fine - exact).abs() < 1e-4);
}

#[test]
fn threshold_integral_rejects_out_of_range_input() {
    let f = coverage_oracle(1, 3);
    assert!(threshold_integral_eval(&f, &[0.5, 1.5, 0.0], Quadrature::Exact).is_err());
}
