//! Submodular Laplacians and a diffusion eigen-solver.
//!
//! The Laplacian of a transformation maps `x` to `sum_e w_e <w_e, x>` where
//! `w_e` is the greedy vertex of `B(F_e)` for `x`. The normalized Laplacian
//! is `D^{-1/2} L (D^{-1/2} x)`. Both are set-valued at ties; the greedy
//! tie-break picks one member consistently.
//!
//! `diffusion_eigen` integrates `dx/dt = -L(x)` with explicit Euler steps,
//! projecting out the trivial eigenvector and renormalizing after every step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::cheeger;
use crate::error::{Error, Result};
use crate::linalg::{self, dot};
use crate::lovasz;
use crate::oracle::SubmodularTransformation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianMode {
    Plain,
    Normalized,
}

#[derive(Clone, Debug)]
pub struct LaplacianOperator<'a> {
    t: &'a SubmodularTransformation,
    mode: LaplacianMode,
    /// `d(v)^{-1/2}`, or 1 in plain mode.
    inv_sqrt_deg: Vec<f64>,
    /// Unit trivial eigenvector: `1/sqrt(n)` or `D^{1/2} 1 / ||D^{1/2} 1||`.
    trivial: Vec<f64>,
}

impl<'a> LaplacianOperator<'a> {
    pub fn new(t: &'a SubmodularTransformation, mode: LaplacianMode) -> Result<Self> {
        let n = t.n();
        let (inv_sqrt_deg, trivial) = match mode {
            LaplacianMode::Plain => (vec![1.0; n], vec![1.0; n]),
            LaplacianMode::Normalized => {
                if let Some(v) = t.degrees().iter().position(|&d| d == 0) {
                    return Err(Error::input(format!(
                        "normalized Laplacian needs positive degrees; vertex {} has degree 0",
                        v + 1
                    )));
                }
                let s: Vec<f64> = t.degrees().iter().map(|&d| (d as f64).sqrt()).collect();
                (s.iter().map(|a| 1.0 / a).collect(), s)
            }
        };
        let nt = linalg::norm(&trivial);
        let trivial = linalg::scale(&trivial, 1.0 / nt);
        Ok(LaplacianOperator {
            t,
            mode,
            inv_sqrt_deg,
            trivial,
        })
    }

    pub fn plain(t: &'a SubmodularTransformation) -> Self {
        Self::new(t, LaplacianMode::Plain).expect("plain Laplacian has no preconditions")
    }

    pub fn normalized(t: &'a SubmodularTransformation) -> Result<Self> {
        Self::new(t, LaplacianMode::Normalized)
    }

    pub fn transformation(&self) -> &'a SubmodularTransformation {
        self.t
    }

    pub fn mode(&self) -> LaplacianMode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.t.n()
    }

    /// Unit vector spanning the trivial eigenspace.
    pub fn trivial_vector(&self) -> &[f64] {
        &self.trivial
    }

    fn precondition(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.inv_sqrt_deg).map(|(a, s)| a * s).collect()
    }

    /// Canonical member of the Laplacian image at `x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.apply_with_form(x).0
    }

    /// Laplacian image together with the quadratic form `sum_e f_e(x')^2`.
    pub fn apply_with_form(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let xp = self.precondition(x);
        let mut out = vec![0.0; x.len()];
        let mut q = 0.0;
        let mut local = Vec::new();
        for f in self.t.functions() {
            local.clear();
            local.extend(f.support().iter().map(|&v| xp[v]));
            let w = lovasz::greedy_local(f, &local);
            let fe = dot(&w, &local);
            q += fe * fe;
            for (&v, &wv) in f.support().iter().zip(&w) {
                out[v] += wv * fe;
            }
        }
        if self.mode == LaplacianMode::Normalized {
            for (o, s) in out.iter_mut().zip(&self.inv_sqrt_deg) {
                *o *= s;
            }
        }
        (out, q)
    }

    /// `sum_e f_e(x')^2` with `x' = x` or `D^{-1/2} x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let xp = self.precondition(x);
        self.t
            .functions()
            .iter()
            .map(|f| {
                let fe = lovasz::lovasz_eval(f, &xp);
                fe * fe
            })
            .sum()
    }

    /// Rayleigh quotient `quadratic_form(x) / ||x||^2`.
    pub fn rayleigh(&self, x: &[f64]) -> Result<f64> {
        let nn = linalg::norm_sq(x);
        if nn == 0.0 || !nn.is_finite() {
            return Err(Error::input("Rayleigh quotient of the zero vector"));
        }
        Ok(self.quadratic_form(x) / nn)
    }

    /// Remove the component along the trivial eigenvector.
    pub fn project(&self, x: &mut [f64]) {
        let c = dot(x, &self.trivial);
        linalg::axpy(-c, &self.trivial, x);
    }

    /// Upper bound on every Rayleigh quotient, from coordinate ranges of `B(F_e)`.
    ///
    /// Each coordinate `w(v)` of a point in `B(F_e)` lies in
    /// `[F(V) - F(V\v), F({v})]`, which bounds `||B(F_e)||_H^2`; the quotient is
    /// at most the largest such bound, times the largest degree in plain mode.
    pub fn rayleigh_upper_bound(&self) -> f64 {
        let h2 = max_hausdorff_sq_bound(self.t);
        match self.mode {
            LaplacianMode::Normalized => h2,
            LaplacianMode::Plain => {
                h2 * self.t.degrees().iter().copied().max().unwrap_or(0) as f64
            }
        }
    }
}

/// `max_e` of a coordinate-box bound on `||B(F_e)||_H^2`.
pub fn max_hausdorff_sq_bound(t: &SubmodularTransformation) -> f64 {
    t.functions()
        .iter()
        .map(|f| {
            let k = f.support().len();
            let full = crate::set::full(k);
            let fv = f.eval_local(full);
            (0..k)
                .map(|i| {
                    let hi = f.eval_local(1 << i);
                    let lo = fv - f.eval_local(full ^ 1 << i);
                    hi.abs().max(lo.abs()).powi(2)
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenResult {
    pub eigenvalue: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub rayleigh_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub step: f64,
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug)]
pub struct DiffusionOptions {
    /// Euler step; `None` selects `0.01 / (H^2 d_max + 1)`.
    pub step: Option<f64>,
    pub max_steps: usize,
    pub tol: f64,
    /// Stop early when the best Rayleigh quotient improves by less than a
    /// relative `1e-12` over this many steps. Zero disables the check.
    pub stall_window: usize,
    /// Record the Rayleigh quotient every this many steps.
    pub trace_every: usize,
}

impl Default for DiffusionOptions {
    fn default() -> Self {
        DiffusionOptions {
            step: None,
            max_steps: 1_000_000,
            tol: 1e-8,
            stall_window: 20_000,
            trace_every: 100,
        }
    }
}

/// Default Euler step `0.01 / (max_e ||B(F_e)||_H^2 * max_v d(v) + 1)`.
pub fn default_step(t: &SubmodularTransformation) -> f64 {
    let d_max = t.degrees().iter().copied().max().unwrap_or(0) as f64;
    0.01 / (max_hausdorff_sq_bound(t) * d_max + 1.0)
}

/// Explicit-Euler diffusion from `x0`.
///
/// Returns the final iterate when the residual `||L(x) - R(x) x||` drops to
/// `tol`; otherwise the iterate with the smallest Rayleigh quotient, flagged
/// as unconverged.
pub fn diffusion_eigen(
    op: &LaplacianOperator<'_>,
    x0: &[f64],
    opts: DiffusionOptions,
) -> Result<EigenResult> {
    let n = op.n();
    if x0.len() != n {
        return Err(Error::input(format!("start vector has length {}, expected {n}", x0.len())));
    }
    let mut x = x0.to_vec();
    let before = linalg::norm(&x);
    op.project(&mut x);
    let nx = linalg::norm(&x);
    if nx <= 1e-12 * before.max(1e-300) || nx == 0.0 {
        return Err(Error::input("start vector vanishes after projection"));
    }
    if (nx - before).abs() > 1e-9 * before {
        log::debug!("start vector projected onto the complement of the trivial eigenvector");
    }
    x = linalg::scale(&x, 1.0 / nx);
    let eta = opts.step.unwrap_or_else(|| default_step(op.transformation()));
    let trace_every = opts.trace_every.max(1);

    let mut trace = Vec::new();
    let mut best = (f64::INFINITY, x.clone(), f64::INFINITY);
    let mut checkpoint = f64::INFINITY;
    for step in 0..=opts.max_steps {
        let (g, r) = op.apply_with_form(&x);
        let residual = g
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - r * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if step % trace_every == 0 {
            trace.push(r);
        }
        if r < best.0 {
            best = (r, x.clone(), residual);
        }
        if residual <= opts.tol {
            return Ok(EigenResult {
                eigenvalue: r,
                vector: x,
                residual,
                rayleigh_trace: trace,
                iterations: step,
                converged: true,
                step: eta,
                seed: None,
            });
        }
        if step == opts.max_steps {
            break;
        }
        if opts.stall_window > 0 && step % opts.stall_window == 0 && step > 0 {
            if checkpoint - best.0 <= 1e-12 * (1.0 + best.0.abs()) {
                log::debug!("diffusion stalled after {step} steps");
                return Ok(unconverged(best, trace, step, eta));
            }
            checkpoint = best.0;
        }
        linalg::axpy(-eta, &g, &mut x);
        op.project(&mut x);
        let nx = linalg::norm(&x);
        if nx == 0.0 || !nx.is_finite() {
            return Err(Error::Internal("diffusion iterate collapsed".into()));
        }
        for a in x.iter_mut() {
            *a /= nx;
        }
    }
    Ok(unconverged(best, trace, opts.max_steps, eta))
}

fn unconverged(best: (f64, Vec<f64>, f64), trace: Vec<f64>, iterations: usize, eta: f64) -> EigenResult {
    EigenResult {
        eigenvalue: best.0,
        vector: best.1,
        residual: best.2,
        rayleigh_trace: trace,
        iterations,
        converged: false,
        step: eta,
        seed: None,
    }
}

/// Unit random vector orthogonal to the trivial eigenvector.
pub fn random_start(op: &LaplacianOperator<'_>, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut x: Vec<f64> = (0..op.n()).map(|_| StandardNormal.sample(&mut rng)).collect();
        op.project(&mut x);
        let nx = linalg::norm(&x);
        if nx > 1e-8 {
            return linalg::scale(&x, 1.0 / nx);
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReferenceLambda {
    /// Smallest Rayleigh quotient found; an upper bound on the eigenvalue.
    pub lambda: f64,
    pub best: EigenResult,
    /// Rayleigh quotient reached from each start, in start order.
    pub per_start: Vec<f64>,
}

/// Minimum Rayleigh quotient over diffusion runs from `restarts` random starts
/// and, in normalized mode when brute force is available, the two left witness
/// vectors built from a minimum-conductance set.
///
/// Starting vectors themselves count as iterates, so the result never exceeds
/// the Rayleigh quotient of any start.
pub fn reference_lambda(
    op: &LaplacianOperator<'_>,
    restarts: usize,
    seed: u64,
    opts: DiffusionOptions,
) -> Result<ReferenceLambda> {
    let t = op.transformation();
    let mut extra = Vec::new();
    if op.mode() == LaplacianMode::Normalized && t.n() <= cheeger::DEFAULT_BRUTE_FORCE_LIMIT {
        if let Ok(best) = cheeger::brute_force_phi(t) {
            if let Ok(w) = cheeger::left_witness(t, best.mask) {
                extra.push(w.plus);
                extra.push(w.minus);
            }
        }
    }
    reference_lambda_from(op, restarts, seed, opts, extra)
}

/// [`reference_lambda`] with caller-supplied extra starting vectors.
pub fn reference_lambda_from(
    op: &LaplacianOperator<'_>,
    restarts: usize,
    seed: u64,
    opts: DiffusionOptions,
    extra_starts: Vec<Vec<f64>>,
) -> Result<ReferenceLambda> {
    if restarts == 0 {
        return Err(Error::input("reference_lambda needs at least one restart"));
    }
    if op.n() < 2 {
        return Err(Error::input("ground set needs at least two vertices"));
    }
    let mut starts: Vec<(Vec<f64>, Option<u64>)> = (0..restarts as u64)
        .map(|i| {
            let s = seed.wrapping_add(i);
            (random_start(op, s), Some(s))
        })
        .collect();
    starts.extend(extra_starts.into_iter().map(|x| (x, None)));
    let results: Vec<Result<EigenResult>> = starts
        .par_iter()
        .map(|(x0, s)| {
            let mut r = refine(op, x0, opts)?;
            r.seed = *s;
            Ok(r)
        })
        .collect();
    let mut per_start = Vec::with_capacity(results.len());
    let mut best: Option<EigenResult> = None;
    for r in results {
        let r = r?;
        per_start.push(r.eigenvalue);
        if best.as_ref().is_none_or(|b| r.eigenvalue < b.eigenvalue) {
            best = Some(r);
        }
    }
    let best = best.expect("at least one start");
    Ok(ReferenceLambda {
        lambda: best.eigenvalue,
        best,
        per_start,
    })
}

/// Diffusion followed, when unconverged, by two passes with a smaller step
/// from the best iterate so far.
fn refine(op: &LaplacianOperator<'_>, x0: &[f64], opts: DiffusionOptions) -> Result<EigenResult> {
    let mut r = diffusion_eigen(op, x0, opts)?;
    let mut eta = r.step;
    for _ in 0..2 {
        if r.converged {
            break;
        }
        eta /= 10.0;
        let next = diffusion_eigen(
            op,
            &r.vector,
            DiffusionOptions {
                step: Some(eta),
                ..opts
            },
        )?;
        let iterations = r.iterations + next.iterations;
        let mut trace = std::mem::take(&mut r.rayleigh_trace);
        trace.extend(next.rayleigh_trace.iter().copied());
        if next.eigenvalue <= r.eigenvalue || next.converged {
            r = next;
        }
        r.iterations = iterations;
        r.rayleigh_trace = trace;
    }
    Ok(r)
}
