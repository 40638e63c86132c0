mod common;

use common::{
    connected_graph, dense_normalized_laplacian, random_feasible, random_instance, rng,
    sorted_eigenvalues, Family, ALL_FAMILIES,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use sublap::cheeger::{
    brute_force_phi, certify, conductance_of_set, left_witness, strong_sweep, sweep_negative,
    sweep_positive, CertifyOptions,
};
use sublap::oracle::{build_undirected_cut, SubmodularTransformation};
use sublap::spectral::{
    diffusion_eigen, random_start, reference_lambda, DiffusionOptions, LaplacianOperator,
};

fn family() -> impl Strategy<Value = Family> {
    (0..ALL_FAMILIES.len()).prop_map(|i| ALL_FAMILIES[i])
}

/// Minimum conductance by a direct loop, independent of the library's scan.
fn naive_phi(t: &SubmodularTransformation) -> f64 {
    let n = t.n();
    let full = (1u64 << n) - 1;
    let mut best = f64::INFINITY;
    for s in 1..full {
        let vol: f64 = (0..n).filter(|v| s >> v & 1 == 1).map(|v| t.degree(v) as f64).sum();
        let volc = t.total_volume() - vol;
        if vol == 0.0 || volc == 0.0 {
            continue;
        }
        let cut: f64 = t.evaluate(s).iter().sum();
        let cutc: f64 = t.evaluate(full ^ s).iter().sum();
        best = best.min(cut.min(cutc) / vol.min(volc));
    }
    best
}

#[test]
fn operator_matches_dense_normalized_laplacian() {
    let mut r = rng(11);
    for _ in 0..30 {
        let n = r.random_range(2..=10);
        let m = r.random_range(n - 1..=2 * n);
        let edges = connected_graph(&mut r, n, m);
        let t = build_undirected_cut(n, &edges).unwrap();
        let op = LaplacianOperator::normalized(&t).unwrap();
        let l = dense_normalized_laplacian(n, &edges);
        let x: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let dense = &l * DVector::from_vec(x.clone());
        for (a, b) in op.apply(&x).iter().zip(dense.iter()) {
            assert!((a - b).abs() <= 1e-9);
        }
    }
}

#[test]
fn plain_operator_matches_combinatorial_laplacian() {
    let mut r = rng(5);
    let n = 6;
    let edges = connected_graph(&mut r, n, 9);
    let t = build_undirected_cut(n, &edges).unwrap();
    let op = LaplacianOperator::plain(&t);
    let mut l = DMatrix::<f64>::zeros(n, n);
    for &(u, v) in &edges {
        l[(u, u)] += 1.0;
        l[(v, v)] += 1.0;
        l[(u, v)] -= 1.0;
        l[(v, u)] -= 1.0;
    }
    let x: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let dense = &l * DVector::from_vec(x.clone());
    for (a, b) in op.apply(&x).iter().zip(dense.iter()) {
        assert!((a - b).abs() <= 1e-9);
    }
}

#[test]
fn diffusion_recovers_second_eigenvalue_of_graphs() {
    let mut r = rng(2024);
    for _ in 0..10 {
        let n = r.random_range(3..=8);
        let edges = connected_graph(&mut r, n, n + 2);
        let t = build_undirected_cut(n, &edges).unwrap();
        let op = LaplacianOperator::normalized(&t).unwrap();
        let ev = sorted_eigenvalues(dense_normalized_laplacian(n, &edges));
        let got = reference_lambda(&op, 3, 7, DiffusionOptions::default()).unwrap();
        assert!((got.lambda - ev[1]).abs() <= 1e-3, "{} vs {}", got.lambda, ev[1]);
    }
}

#[test]
fn diffusion_rayleigh_trace_is_non_increasing() {
    let mut r = rng(3);
    for fam in ALL_FAMILIES {
        let t = random_instance(&mut r, fam, 6, 6);
        let op = LaplacianOperator::normalized(&t).unwrap();
        let x0 = random_start(&op, 1);
        let res = diffusion_eigen(
            &op,
            &x0,
            DiffusionOptions {
                max_steps: 20_000,
                trace_every: 1,
                ..DiffusionOptions::default()
            },
        )
        .unwrap();
        // Explicit Euler is only near-monotone: slack 10 * step * R(x_0) per step.
        let slack = 10.0 * res.step * res.rayleigh_trace[0];
        for w in res.rayleigh_trace.windows(2) {
            assert!(w[1] <= w[0] + slack, "{fam:?}: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn four_clique_is_tight_on_the_left() {
    let edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let t = build_undirected_cut(4, &edges).unwrap();
    let cert = certify(&t, &CertifyOptions::default()).unwrap();
    assert!(cert.holds);
    assert!((cert.phi - 2.0 / 3.0).abs() <= 1e-6);
    assert!((cert.lambda_tilde / 2.0 - 2.0 / 3.0).abs() <= 1e-6);
}

#[test]
fn conductance_of_half_cycle() {
    let t = build_undirected_cut(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    let c = conductance_of_set(&t, 0b0011).unwrap();
    assert!((c.phi - 0.5).abs() < 1e-15);
    assert!(conductance_of_set(&t, 0b1111).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn brute_force_matches_naive_scan(seed in any::<u64>(), fam in family(), n in 2usize..9) {
        let mut r = rng(seed);
        let t = random_instance(&mut r, fam, n, 8);
        let got = brute_force_phi(&t).unwrap();
        prop_assert!((got.phi - naive_phi(&t)).abs() <= 1e-12);
    }

    #[test]
    fn strong_sweep_respects_square_root_bound(seed in any::<u64>(), fam in family(), n in 2usize..9) {
        let mut r = rng(seed);
        let t = random_instance(&mut r, fam, n, 8);
        let x = random_feasible(&mut r, t.degrees());
        let s = strong_sweep(&t, &x).unwrap();
        prop_assert!(s.cut.phi <= 2.0 * s.rayleigh.sqrt() + 1e-9);
    }

    #[test]
    fn weak_sweeps_respect_their_ratio_bounds(seed in any::<u64>(), fam in family(), n in 2usize..9) {
        let mut r = rng(seed);
        let t = random_instance(&mut r, fam, n, 8);
        let x: Vec<f64> = (0..t.n()).map(|_| r.random_range(0.0..1.0)).collect();
        let p = sweep_positive(&t, &x).unwrap();
        prop_assert!(p.ratio <= p.bound + 1e-9);
        let neg: Vec<f64> = x.iter().map(|a| -a).collect();
        let q = sweep_negative(&t, &neg).unwrap();
        prop_assert!(q.ratio <= q.bound + 1e-9);
    }

    #[test]
    fn left_witness_is_within_twice_the_conductance(seed in any::<u64>(), fam in family(), n in 2usize..9) {
        let mut r = rng(seed);
        let t = random_instance(&mut r, fam, n, 8);
        let best = brute_force_phi(&t).unwrap();
        let w = left_witness(&t, best.mask).unwrap();
        prop_assert!(w.best_rayleigh() <= 2.0 * best.phi + 1e-9);
    }

    #[test]
    fn reference_lambda_never_exceeds_witness(seed in any::<u64>(), fam in family(), n in 3usize..8) {
        let mut r = rng(seed);
        let t = random_instance(&mut r, fam, n, 6);
        let op = LaplacianOperator::normalized(&t).unwrap();
        let opts = DiffusionOptions { max_steps: 5_000, ..DiffusionOptions::default() };
        let lam = reference_lambda(&op, 1, seed, opts).unwrap().lambda;
        let best = brute_force_phi(&t).unwrap();
        let w = left_witness(&t, best.mask).unwrap();
        prop_assert!(lam <= w.best_rayleigh() + 1e-12);
    }
}
