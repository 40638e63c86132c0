//! Low-rank augmented-Lagrangian solver for the eigenvalue relaxations.
//!
//! The vertex vectors are stored as `y_v = sqrt(d(v)) x_v`, which turns the
//! two degree constraints into "the rows of `Y` have unit Frobenius norm and
//! are orthogonal to `D^{1/2} 1`": a sphere inside a linear subspace. Both
//! constraints are kept exactly by projection and renormalization.
//!
//! Each point `w` of a function's cover contributes a constraint
//! `a_w(Y) <= t_e`. In the symmetric relaxation `a_w = ||Xw||^2`. In the
//! general relaxation the auxiliary vector `u` of the pair `(e, w)` is
//! minimized out in closed form, giving
//! `a_w = min { ||p||^2 + <p, u> : ||u|| = ||p||, <u, v_1> >= ||u||^2 }`
//! with `p = Xw` and `v_1` the first coordinate direction. The slack
//! variables `t_e` are minimized out exactly for fixed multipliers, so the
//! inner problem is a smooth function of `Y` alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{SdpInstance, SdpKind};
use crate::linalg;

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub seed: u64,
    /// Relative tolerance on constraint violation and objective stagnation.
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Optional unit vector `z` orthogonal to `D^{1/2} 1`, used as the
    /// rank-one starting point `y_v = z(v) v_1`.
    pub warm_start: Option<Vec<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            seed: 0,
            tol: 1e-6,
            max_outer: 40,
            max_inner: 3000,
            warm_start: None,
        }
    }
}

/// One cover point of one function, with coefficients `w(v)/sqrt(d(v))`.
pub(crate) struct Row {
    pub support: Vec<usize>,
    pub coef: Vec<f64>,
}

pub(crate) struct Problem {
    pub n: usize,
    pub rank: usize,
    pub general: bool,
    pub weight: f64,
    pub m: usize,
    pub rows: Vec<Row>,
    /// Row indices grouped by function.
    pub by_function: Vec<Vec<usize>>,
    /// Unit vector `D^{1/2} 1 / ||D^{1/2} 1||`.
    pub trivial: Vec<f64>,
}

impl Problem {
    pub fn new(inst: &SdpInstance) -> Self {
        let inv_sqrt: Vec<f64> = inst
            .degrees
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
            .collect();
        let mut rows = Vec::new();
        let mut by_function = vec![Vec::new(); inst.functions.len()];
        for (e, fc) in inst.functions.iter().enumerate() {
            for w in &fc.points {
                by_function[e].push(rows.len());
                rows.push(Row {
                    support: fc.support.clone(),
                    coef: w
                        .iter()
                        .zip(&fc.support)
                        .map(|(a, &v)| a * inv_sqrt[v])
                        .collect(),
                });
            }
        }
        let sd: Vec<f64> = inst.degrees.iter().map(|d| d.sqrt()).collect();
        let norm = linalg::norm(&sd);
        let trivial = if norm > 0.0 {
            linalg::scale(&sd, 1.0 / norm)
        } else {
            vec![0.0; inst.n]
        };
        Problem {
            n: inst.n,
            rank: inst.rank,
            general: inst.kind == SdpKind::General,
            weight: if inst.kind == SdpKind::General { 0.5 } else { 1.0 },
            m: inst.functions.len(),
            rows,
            by_function,
            trivial,
        }
    }

    /// `p = sum_v coef(v) y_v` for one row.
    pub fn row_vector(&self, row: &Row, y: &[f64]) -> Vec<f64> {
        let r = self.rank;
        let mut p = vec![0.0; r];
        for (&v, &c) in row.support.iter().zip(&row.coef) {
            linalg::axpy(c, &y[v * r..(v + 1) * r], &mut p);
        }
        p
    }

    /// Constraint value of a row and its gradient with respect to `p`.
    pub fn row_value(&self, p: &[f64]) -> (f64, Vec<f64>) {
        if self.general {
            general_value(p)
        } else {
            (linalg::norm_sq(p), linalg::scale(p, 2.0))
        }
    }

    /// Project onto `{Y : sum_v sqrt(d(v)) y_v = 0}` and renormalize.
    pub fn retract(&self, y: &mut [f64]) -> bool {
        self.project_subspace(y);
        let nn = linalg::norm(y);
        if nn == 0.0 || !nn.is_finite() {
            return false;
        }
        for a in y.iter_mut() {
            *a /= nn;
        }
        true
    }

    fn project_subspace(&self, y: &mut [f64]) {
        let r = self.rank;
        let mut mean = vec![0.0; r];
        for v in 0..self.n {
            linalg::axpy(self.trivial[v], &y[v * r..(v + 1) * r], &mut mean);
        }
        for v in 0..self.n {
            let c = self.trivial[v];
            for (a, b) in y[v * r..(v + 1) * r].iter_mut().zip(&mean) {
                *a -= c * b;
            }
        }
    }

    /// Constraint values for every row.
    pub fn values(&self, y: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| self.row_value(&self.row_vector(row, y)).0)
            .collect()
    }

    /// Feasible slacks `t_e = max_w a_w` and the resulting objective.
    pub fn feasible_objective(&self, y: &[f64]) -> (Vec<f64>, f64) {
        let a = self.values(y);
        let t: Vec<f64> = self
            .by_function
            .iter()
            .map(|rows| rows.iter().map(|&j| a[j]).fold(0.0, f64::max))
            .collect();
        let obj = self.weight * t.iter().sum::<f64>();
        (t, obj)
    }

    /// Augmented Lagrangian with `t` minimized out; returns value, Euclidean
    /// gradient in `Y`, the updated multiplier estimates and the optimal slacks.
    fn lagrangian(&self, y: &[f64], mu: &[f64], rho: f64, want_grad: bool) -> AlEval {
        let r = self.rank;
        let mut grad = if want_grad { vec![0.0; y.len()] } else { Vec::new() };
        let mut lambda = vec![0.0; self.rows.len()];
        let mut slacks = vec![0.0; self.m];
        let mut value = 0.0;
        let mut ps = Vec::with_capacity(self.rows.len());
        let mut a = Vec::with_capacity(self.rows.len());
        let mut da = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let p = self.row_vector(row, y);
            let (val, g) = self.row_value(&p);
            ps.push(p);
            a.push(val);
            da.push(g);
        }
        for (e, rows) in self.by_function.iter().enumerate() {
            if rows.is_empty() {
                continue;
            }
            let b: Vec<f64> = rows.iter().map(|&j| mu[j] / rho + a[j]).collect();
            let t = optimal_slack(&b, self.weight, rho);
            slacks[e] = t;
            value += self.weight * t;
            for (&j, &bj) in rows.iter().zip(&b) {
                let l = (rho * (bj - t)).max(0.0);
                value += (l * l - mu[j] * mu[j]) / (2.0 * rho);
                lambda[j] = l;
                if want_grad && l > 0.0 {
                    let row = &self.rows[j];
                    for (&v, &c) in row.support.iter().zip(&row.coef) {
                        linalg::axpy(l * c, &da[j], &mut grad[v * r..(v + 1) * r]);
                    }
                }
            }
        }
        AlEval {
            value,
            grad,
            lambda,
            slacks,
            a,
        }
    }

    /// Remove the normal components of `g` at `y`.
    fn tangent(&self, y: &[f64], g: &mut [f64]) {
        self.project_subspace(g);
        let c = linalg::dot(g, y);
        linalg::axpy(-c, y, g);
    }

    pub fn random_start(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let mut y: Vec<f64> = (0..self.n * self.rank)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            if self.retract(&mut y) {
                return y;
            }
        }
    }

    pub fn rank_one(&self, z: &[f64]) -> Option<Vec<f64>> {
        let mut y = vec![0.0; self.n * self.rank];
        for v in 0..self.n {
            y[v * self.rank] = z[v];
        }
        self.retract(&mut y).then_some(y)
    }
}

struct AlEval {
    value: f64,
    grad: Vec<f64>,
    lambda: Vec<f64>,
    slacks: Vec<f64>,
    a: Vec<f64>,
}

/// Minimizer over `t >= 0` of `c t + (1/(2 rho)) sum_j max(0, rho (b_j - t))^2`.
fn optimal_slack(b: &[f64], c: f64, rho: f64) -> f64 {
    let mut sorted = b.to_vec();
    sorted.sort_by(|x, y| y.total_cmp(x));
    let mut prefix = 0.0;
    let mut t = 0.0;
    for k in 0..sorted.len() {
        prefix += sorted[k];
        t = (prefix - c / rho) / (k + 1) as f64;
        let next = sorted.get(k + 1).copied().unwrap_or(f64::NEG_INFINITY);
        if t >= next {
            break;
        }
    }
    t.max(0.0)
}

/// `min_u ||p||^2 + <p, u>` over `||u|| = ||p||`, `u_0 >= ||u||^2`, with gradient in `p`.
pub(crate) fn general_value(p: &[f64]) -> (f64, Vec<f64>) {
    let a = p[0];
    let b2: f64 = p[1..].iter().map(|x| x * x).sum();
    let s = a * a + b2;
    let mut grad = vec![0.0; p.len()];
    if s == 0.0 || a <= -s {
        return (0.0, grad);
    }
    let b = b2.sqrt();
    let g = (s - s * s).max(0.0).sqrt();
    let value = s * (1.0 + a) - b * g;
    if g > 0.0 {
        let k = (1.0 - 2.0 * s) / g;
        grad[0] = 2.0 * a * (1.0 + a) + s - a * b * k;
        if b > 0.0 {
            let db = 2.0 * b * (1.0 + a) - g - b2 * k;
            for (gi, pi) in grad[1..].iter_mut().zip(&p[1..]) {
                *gi = db * pi / b;
            }
        }
    } else {
        grad[0] = 2.0 * a * (1.0 + a) + s;
    }
    (value.max(0.0), grad)
}

/// The minimizing auxiliary vector for [`general_value`].
pub(crate) fn general_aux(p: &[f64]) -> Vec<f64> {
    let a = p[0];
    let b2: f64 = p[1..].iter().map(|x| x * x).sum();
    let s = a * a + b2;
    if s == 0.0 {
        return vec![0.0; p.len()];
    }
    if a <= -s {
        return p.iter().map(|x| -x).collect();
    }
    let b = b2.sqrt();
    let g = (s - s * s).max(0.0).sqrt();
    let mut u = vec![0.0; p.len()];
    u[0] = s;
    if b > 0.0 {
        for (ui, pi) in u[1..].iter_mut().zip(&p[1..]) {
            *ui = -g * pi / b;
        }
    } else if p.len() > 1 {
        u[1] = g;
    }
    u
}

pub(crate) struct SolveOutcome {
    pub y: Vec<f64>,
    pub slacks: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub outer: usize,
    pub converged: bool,
    pub max_violation: f64,
}

pub(crate) fn solve_problem(pb: &Problem, opts: &SolverOptions) -> SolveOutcome {
    let mut y = match opts.warm_start.as_ref().and_then(|z| pb.rank_one(z)) {
        Some(y) => y,
        None => pb.random_start(opts.seed),
    };
    if pb.rows.is_empty() {
        return SolveOutcome {
            y,
            slacks: vec![0.0; pb.m],
            objective: 0.0,
            iterations: 0,
            outer: 0,
            converged: true,
            max_violation: 0.0,
        };
    }
    // Scale of constraint values, used to make every tolerance relative.
    let a0 = pb.values(&y);
    let scale = (a0.iter().sum::<f64>() / a0.len() as f64).max(1e-300);
    let mut rho = 10.0 / scale;
    let rho_max = rho * 1e8;
    let mut mu = vec![0.0; pb.rows.len()];
    let mut alpha = 1.0;
    let mut iterations = 0;
    let mut best = {
        let (t, obj) = pb.feasible_objective(&y);
        (obj, y.clone(), t)
    };
    let mut prev_violation = f64::INFINITY;
    let mut prev_obj = f64::INFINITY;
    let mut converged = false;
    let mut outer = 0;
    let mut last_violation = f64::INFINITY;
    while outer < opts.max_outer {
        outer += 1;
        // Inner minimization by Riemannian gradient descent with
        // Barzilai-Borwein trial steps and Armijo backtracking.
        let mut stagnant = 0;
        let mut first_gn = None;
        let mut last: Option<(Vec<f64>, Vec<f64>)> = None;
        // A failed line search leaves the step memory exhausted; start over.
        if alpha <= 1e-30 {
            alpha = 1.0;
        }
        for _ in 0..opts.max_inner {
            iterations += 1;
            let ev = pb.lagrangian(&y, &mu, rho, true);
            let mut g = ev.grad;
            pb.tangent(&y, &mut g);
            let gn2 = linalg::norm_sq(&g);
            let gn = gn2.sqrt();
            let g0 = *first_gn.get_or_insert(gn);
            // Inexact inner solves early on, tightening with each outer pass.
            let inner_tol = 10f64.powi(-(outer as i32 + 1)).max(1e-9);
            if gn <= inner_tol * g0.max(1e-300) || gn == 0.0 {
                break;
            }
            if let Some((py, pg)) = &last {
                let mut sy = 0.0;
                let mut ss = 0.0;
                for i in 0..y.len() {
                    let si = y[i] - py[i];
                    sy += si * (g[i] - pg[i]);
                    ss += si * si;
                }
                if sy > 0.0 {
                    alpha = (ss / sy).clamp(1e-12, 1e12);
                }
            }
            let mut accepted = false;
            let mut trial = vec![0.0; y.len()];
            while alpha > 1e-30 {
                trial.copy_from_slice(&y);
                linalg::axpy(-alpha, &g, &mut trial);
                if pb.retract(&mut trial) {
                    let val = pb.lagrangian(&trial, &mu, rho, false).value;
                    if val <= ev.value - 1e-4 * alpha * gn2 {
                        let gain = ev.value - val;
                        if gain <= 1e-15 * ev.value.abs().max(scale) {
                            stagnant += 1;
                        } else {
                            stagnant = 0;
                        }
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
            std::mem::swap(&mut y, &mut trial);
            last = Some((trial, g));
            alpha *= 2.0;
            if stagnant >= 20 {
                break;
            }
        }
        let ev = pb.lagrangian(&y, &mu, rho, false);
        let violation = pb
            .by_function
            .iter()
            .enumerate()
            .flat_map(|(e, rows)| rows.iter().map(move |&j| (e, j)))
            .map(|(e, j)| (ev.a[j] - ev.slacks[e]).max(0.0))
            .fold(0.0, f64::max)
            / scale;
        last_violation = violation;
        mu = ev.lambda;
        let (t, obj) = pb.feasible_objective(&y);
        if obj < best.0 {
            best = (obj, y.clone(), t);
        }
        let obj_change = (prev_obj - obj).abs() / obj.abs().max(scale);
        // The objective is non-negative, so a feasible near-zero value is optimal.
        let at_floor = best.0 <= opts.tol * scale;
        if violation <= opts.tol && (obj_change <= opts.tol || at_floor) {
            converged = true;
            break;
        }
        if violation > 0.25 * prev_violation {
            rho = (rho * 4.0).min(rho_max);
        }
        prev_violation = violation;
        prev_obj = obj;
    }
    SolveOutcome {
        objective: best.0,
        y: best.1,
        slacks: best.2,
        iterations,
        outer,
        converged,
        max_violation: last_violation * scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_single_row() {
        // c t + (rho/2)(b - t)^2 minimized at t = b - c/rho.
        let t = optimal_slack(&[1.0], 1.0, 10.0);
        assert!((t - 0.9).abs() < 1e-15);
    }

    #[test]
    fn slack_two_rows() {
        // Both rows active: 2 rho (mean - t) = c.
        let t = optimal_slack(&[1.0, 1.0], 1.0, 10.0);
        assert!((t - 0.95).abs() < 1e-15);
        let t = optimal_slack(&[1.0, 0.0], 1.0, 10.0);
        assert!((t - 0.9).abs() < 1e-15);
    }

    #[test]
    fn general_value_matches_aux() {
        let cases: [&[f64]; 4] = [
            &[0.01, 0.003, -0.002],
            &[-0.005, 0.004, 0.0],
            &[-0.001, 0.0, 0.0],
            &[0.0, 0.01, 0.0],
        ];
        for p in cases {
            let (val, _) = general_value(p);
            let u = general_aux(p);
            let pn = linalg::norm_sq(p);
            assert!((linalg::norm_sq(&u) - pn).abs() < 1e-15);
            assert!(u[0] >= linalg::norm_sq(&u) - 1e-15);
            assert!((pn + linalg::dot(p, &u) - val).abs() < 1e-15);
        }
    }

    #[test]
    fn general_gradient_finite_difference() {
        let p = [0.006, -0.004, 0.003];
        let (_, g) = general_value(&p);
        for i in 0..3 {
            let h = 1e-7;
            let mut q = p;
            q[i] += h;
            let mut r = p;
            r[i] -= h;
            let fd = (general_value(&q).0 - general_value(&r).0) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7, "{i}: {fd} vs {}", g[i]);
        }
    }
}
