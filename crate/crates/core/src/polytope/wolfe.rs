//! Wolfe's minimum-norm-point algorithm over a [`PolytopeHandle`].

use super::{linear_optimize, PolytopeHandle};
use crate::error::{Error, Result};
use crate::linalg::{self, dot};

/// Barycentric weights at or below this are treated as zero.
const WEIGHT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct WolfeOptions {
    /// Stop when `<x, x - q> <= eps^2 / 2` for the linear-optimization answer `q`.
    pub eps: f64,
    pub max_iterations: usize,
}

impl Default for WolfeOptions {
    fn default() -> Self {
        WolfeOptions {
            eps: 1e-6,
            max_iterations: 10_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MinNormResult {
    pub point: Vec<f64>,
    pub norm_sq: f64,
    /// Final value of `<x, x - q>`.
    pub gap: f64,
    pub iterations: usize,
    /// Corral size at termination.
    pub corral: usize,
}

/// Approximate minimum-norm point `x` of the handle with `||x||^2 <= min + 2 eps^2`.
pub fn wolfe_min_norm(handle: &PolytopeHandle<'_>, opts: WolfeOptions) -> Result<MinNormResult> {
    let k = handle.dim();
    let first = linear_optimize(handle, &vec![0.0; k])?;
    let mut corral: Vec<Vec<f64>> = vec![first.clone()];
    let mut weights: Vec<f64> = vec![1.0];
    let mut x = first;
    let threshold = opts.eps * opts.eps / 2.0;
    let mut gap = f64::INFINITY;

    for iteration in 0..opts.max_iterations {
        let neg: Vec<f64> = x.iter().map(|a| -a).collect();
        let q = linear_optimize(handle, &neg)?;
        let xx = dot(&x, &x);
        gap = xx - dot(&x, &q);
        if gap <= threshold {
            return Ok(MinNormResult {
                norm_sq: xx,
                point: x,
                gap,
                iterations: iteration,
                corral: corral.len(),
            });
        }
        // A repeated vertex means no further progress is possible in floating point.
        if corral.iter().any(|c| linalg::dist_sq(c, &q) <= 1e-24) {
            return Ok(MinNormResult {
                norm_sq: xx,
                point: x,
                gap,
                iterations: iteration,
                corral: corral.len(),
            });
        }
        corral.push(q);
        weights.push(0.0);

        // Minor cycles.
        loop {
            let alpha = match affine_minimizer(&corral) {
                Some(a) => a,
                None => {
                    // Affinely dependent corral: drop the lightest point and retry.
                    let drop = argmin(&weights[..weights.len() - 1]);
                    corral.remove(drop);
                    weights.remove(drop);
                    renormalize(&mut weights);
                    continue;
                }
            };
            if alpha.iter().all(|&a| a > WEIGHT_TOL) {
                weights = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for (l, a) in weights.iter().zip(&alpha) {
                if *a <= WEIGHT_TOL && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, a) in weights.iter_mut().zip(&alpha) {
                *l = theta * a + (1.0 - theta) * *l;
            }
            let mut i = 0;
            while i < weights.len() {
                if weights[i] <= WEIGHT_TOL {
                    corral.remove(i);
                    weights.remove(i);
                } else {
                    i += 1;
                }
            }
            renormalize(&mut weights);
            if corral.len() == 1 {
                weights = vec![1.0];
                break;
            }
        }
        x = combine(&corral, &weights, k);
    }
    let norm_sq = dot(&x, &x);
    log::debug!("wolfe stopped at cap with gap {gap:.3e}");
    Err(Error::Convergence {
        iterations: opts.max_iterations,
        best_value: norm_sq,
        best_point: x,
    })
}

fn combine(points: &[Vec<f64>], weights: &[f64], k: usize) -> Vec<f64> {
    let mut x = vec![0.0; k];
    for (p, &w) in points.iter().zip(weights) {
        linalg::axpy(w, p, &mut x);
    }
    x
}

fn renormalize(w: &mut [f64]) {
    let s: f64 = w.iter().sum();
    if s > 0.0 {
        for a in w.iter_mut() {
            *a /= s;
        }
    }
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len())
        .min_by(|&a, &b| v[a].total_cmp(&v[b]))
        .unwrap_or(0)
}

/// Weights `alpha` (summing to one) minimizing `||sum alpha_i s_i||`.
fn affine_minimizer(points: &[Vec<f64>]) -> Option<Vec<f64>> {
    let m = points.len();
    if m == 1 {
        return Some(vec![1.0]);
    }
    let mut a = vec![vec![0.0; m + 1]; m + 1];
    for i in 0..m {
        for j in 0..=i {
            let g = dot(&points[i], &points[j]);
            a[i][j] = g;
            a[j][i] = g;
        }
        a[i][m] = 1.0;
        a[m][i] = 1.0;
    }
    let mut b = vec![0.0; m + 1];
    b[m] = 1.0;
    let sol = linalg::solve(a, b)?;
    Some(sol[..m].to_vec())
}
