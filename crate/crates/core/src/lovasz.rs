//! Lovász extension and greedy extreme points of base polytopes.
//!
//! For a normalized submodular `F` and a vector `x`, sorting the support by
//! decreasing `x` (ties by increasing vertex index) and taking marginal gains
//! along the resulting chain gives the extreme point of `B(F)` that maximizes
//! `<w, x>`. That maximum is the Lovász extension `f(x)`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::oracle::SubmodularOracle;
use crate::set::{self, Mask};

/// Largest support for which extreme points are enumerated.
pub const MAX_ENUMERATION_SUPPORT: usize = 8;
/// Two extreme points closer than this (in max norm) are considered equal.
pub const DEDUP_TOL: f64 = 1e-9;

/// Result of the greedy algorithm on one oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyVertex {
    /// Support vertices (global indices) in greedy order.
    pub order: Vec<usize>,
    /// Extreme point in local coordinates, aligned with `oracle.support()`.
    pub local: Vec<f64>,
}

impl GreedyVertex {
    /// Extreme point as a dense vector over a ground set of size `n`.
    pub fn dense(&self, oracle: &SubmodularOracle, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (&v, &w) in oracle.support().iter().zip(&self.local) {
            out[v] = w;
        }
        out
    }
}

/// Local permutation sorting `values` decreasingly, ties by increasing position.
#[inline]
pub(crate) fn greedy_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

/// Marginal gains along the chain given by a local order.
#[inline]
pub(crate) fn gains_along(oracle: &SubmodularOracle, order: &[usize], out: &mut [f64]) {
    let mut prefix: Mask = 0;
    let mut prev = 0.0;
    for &i in order {
        prefix |= 1 << i;
        let cur = oracle.eval_local(prefix);
        out[i] = cur - prev;
        prev = cur;
    }
}

/// Greedy extreme point for local values `xs` (one per support vertex).
pub fn greedy_local(oracle: &SubmodularOracle, xs: &[f64]) -> Vec<f64> {
    let order = greedy_order(xs);
    let mut w = vec![0.0; xs.len()];
    gains_along(oracle, &order, &mut w);
    w
}

/// Greedy extreme point maximizing `<w, x>` over `B(F)`; `x` is indexed by the ground set.
pub fn greedy_vertex(oracle: &SubmodularOracle, x: &[f64]) -> GreedyVertex {
    let xs: Vec<f64> = oracle.support().iter().map(|&v| x[v]).collect();
    let order = greedy_order(&xs);
    let mut local = vec![0.0; xs.len()];
    gains_along(oracle, &order, &mut local);
    GreedyVertex {
        order: order.iter().map(|&i| oracle.support()[i]).collect(),
        local,
    }
}

/// `f(x) = max_{w in B(F)} <w, x>` through the greedy vertex.
pub fn lovasz_eval(oracle: &SubmodularOracle, x: &[f64]) -> f64 {
    let g = greedy_vertex(oracle, x);
    oracle
        .support()
        .iter()
        .zip(&g.local)
        .map(|(&v, &w)| w * x[v])
        .sum()
}

/// `sum_k F(S_k) (x(v_k) - x(v_{k+1})) + F(V) x(v_n)` over the whole ground set.
pub fn chain_sum_eval(oracle: &SubmodularOracle, x: &[f64]) -> f64 {
    let n = x.len();
    let order = greedy_order(x);
    let mut total = 0.0;
    let mut prefix: Mask = 0;
    for (k, &v) in order.iter().enumerate() {
        prefix |= 1 << v;
        let next = if k + 1 < n { x[order[k + 1]] } else { 0.0 };
        total += oracle.eval(prefix) * (x[v] - next);
    }
    total
}

/// How [`threshold_integral_eval`] integrates over the threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Quadrature {
    /// Exact piecewise-constant integration over the distinct values of `x`.
    #[default]
    Exact,
    /// Midpoint rule with the given number of cells.
    Midpoint(usize),
}

/// `integral_0^1 F({v : x(v) >= t}) dt` for `x in [0,1]^V`.
pub fn threshold_integral_eval(
    oracle: &SubmodularOracle,
    x: &[f64],
    quadrature: Quadrature,
) -> Result<f64> {
    if let Some(v) = x.iter().position(|&a| !(0.0..=1.0).contains(&a)) {
        return Err(Error::input(format!(
            "threshold integral needs x in [0,1], x({}) = {}",
            v + 1,
            x[v]
        )));
    }
    let level = |t: f64| -> f64 {
        let mask = x
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a >= t)
            .fold(0u64, |m, (v, _)| m | 1 << v);
        oracle.eval(mask)
    };
    match quadrature {
        Quadrature::Exact => {
            let mut levels: Vec<f64> = x.to_vec();
            levels.sort_by(|a, b| b.total_cmp(a));
            levels.dedup();
            let mut total = 0.0;
            for (j, &u) in levels.iter().enumerate() {
                let below = levels.get(j + 1).copied().unwrap_or(0.0);
                if u > below {
                    total += level(u) * (u - below);
                }
            }
            Ok(total)
        }
        Quadrature::Midpoint(cells) => {
            if cells == 0 {
                return Err(Error::input("midpoint quadrature needs at least one cell"));
            }
            let h = 1.0 / cells as f64;
            Ok((0..cells).map(|i| level((i as f64 + 0.5) * h)).sum::<f64>() * h)
        }
    }
}

/// All distinct extreme points of `B(F)` in local coordinates.
///
/// Every permutation of the support is pushed through the greedy algorithm;
/// points within [`DEDUP_TOL`] of each other are merged. The output order is
/// the order of first appearance under Heap's permutation sequence.
pub fn enumerate_extreme_points(oracle: &SubmodularOracle) -> Result<Vec<Vec<f64>>> {
    let k = oracle.support().len();
    if k > MAX_ENUMERATION_SUPPORT {
        return Err(Error::Capability(format!(
            "extreme point enumeration limited to {MAX_ENUMERATION_SUPPORT} vertices, support has {k}"
        )));
    }
    // Subset values are shared by many permutations; tabulate them once.
    let table: Vec<f64> = (0..=set::full(k)).map(|m| oracle.eval_local(m)).collect();
    let mut seen: HashMap<Vec<i64>, ()> = HashMap::new();
    let mut points = Vec::new();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut emit = |perm: &[usize]| {
        let mut w = vec![0.0; k];
        let mut prefix = 0usize;
        let mut prev = 0.0;
        for &i in perm {
            prefix |= 1 << i;
            w[i] = table[prefix] - prev;
            prev = table[prefix];
        }
        let key: Vec<i64> = w.iter().map(|a| (a / DEDUP_TOL).round() as i64).collect();
        if seen.insert(key, ()).is_none() {
            points.push(w);
        }
    };
    // Heap's algorithm, iterative form.
    let mut c = vec![0usize; k];
    emit(&perm);
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            emit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(points)
}

/// Extreme points as dense vectors over a ground set of size `n`.
pub fn enumerate_extreme_points_dense(oracle: &SubmodularOracle, n: usize) -> Result<Vec<Vec<f64>>> {
    Ok(enumerate_extreme_points(oracle)?
        .into_iter()
        .map(|local| {
            let mut out = vec![0.0; n];
            for (&v, &w) in oracle.support().iter().zip(&local) {
                out[v] = w;
            }
            out
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::SubmodularOracle;

    #[test]
    fn edge_lovasz_is_absolute_difference() {
        let f = SubmodularOracle::undirected_edge(0, 1);
        let x = [0.3, 0.7];
        assert!((lovasz_eval(&f, &x) - 0.4).abs() < 1e-15);
        let g = greedy_vertex(&f, &x);
        assert_eq!(g.order, vec![1, 0]);
        assert_eq!(g.local, vec![-1.0, 1.0]);
    }

    #[test]
    fn zero_vector_uses_index_order() {
        let f = SubmodularOracle::hyperedge(vec![0, 1, 2]);
        let g = greedy_vertex(&f, &[0.0; 3]);
        assert_eq!(g.order, vec![0, 1, 2]);
        assert_eq!(g.local, vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn edge_has_two_extreme_points() {
        let f = SubmodularOracle::undirected_edge(0, 1);
        let pts = enumerate_extreme_points(&f).unwrap();
        assert_eq!(pts, vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
    }

    #[test]
    fn enumeration_limit() {
        let f = SubmodularOracle::hyperedge((0..9).collect());
        assert!(matches!(enumerate_extreme_points(&f), Err(Error::Capability(_))));
    }

    #[test]
    fn threshold_rejects_out_of_range() {
        let f = SubmodularOracle::undirected_edge(0, 1);
        assert!(threshold_integral_eval(&f, &[1.5, 0.0], Quadrature::Exact).is_err());
    }

    #[test]
    fn midpoint_close_to_exact() {
        let f = SubmodularOracle::hyperedge(vec![0, 1, 2]);
        let x = [0.1, 0.55, 0.9];
        let exact = threshold_integral_eval(&f, &x, Quadrature::Exact).unwrap();
        let approx = threshold_integral_eval(&f, &x, Quadrature::Midpoint(10_000)).unwrap();
        assert!((exact - 0.8).abs() < 1e-12);
        assert!((exact - approx).abs() < 1e-3);
    }
}
