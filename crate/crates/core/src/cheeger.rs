//! Conductance, sweep rounding and two-sided Cheeger certificates.
//!
//! `phi(S) = min(cut(S), cut(V\S)) / min(vol(S), vol(V\S))` with
//! `cut(S) = sum_e F_e(S)` and `vol(S) = sum_{v in S} d(v)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, dot};
use crate::lovasz;
use crate::oracle::SubmodularTransformation;
use crate::set::{self, Mask};
use crate::spectral::{self, DiffusionOptions, LaplacianOperator};

/// Ground-set size up to which certificates run brute force by default.
pub const DEFAULT_BRUTE_FORCE_LIMIT: usize = 16;
/// Hard limit for exhaustive conductance.
pub const MAX_BRUTE_FORCE: usize = 20;
/// Additive slack on every checked inequality.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutReport {
    #[serde(skip)]
    pub mask: Mask,
    /// One-based vertex list.
    pub set: Vec<usize>,
    pub cut: f64,
    pub cut_complement: f64,
    pub vol: f64,
    pub vol_complement: f64,
    pub phi: f64,
}

fn one_based(mask: Mask) -> Vec<usize> {
    set::to_indices(mask).into_iter().map(|v| v + 1).collect()
}

/// Conductance of a proper non-empty subset with positive volume on both sides.
pub fn conductance_of_set(t: &SubmodularTransformation, mask: Mask) -> Result<CutReport> {
    let full = t.all_mask();
    if mask == 0 || mask & full == full || mask & !full != 0 {
        return Err(Error::input("conductance needs a proper non-empty subset of V"));
    }
    let comp = full ^ mask;
    let vol = t.volume(mask);
    let vol_complement = t.volume(comp);
    if vol <= 0.0 || vol_complement <= 0.0 {
        return Err(Error::input(format!(
            "set {{{}}} or its complement has zero volume",
            set::display_one_based(mask)
        )));
    }
    let cut = t.cut(mask);
    let cut_complement = t.cut(comp);
    Ok(CutReport {
        mask,
        set: one_based(mask),
        cut,
        cut_complement,
        vol,
        vol_complement,
        phi: cut.min(cut_complement) / vol.min(vol_complement),
    })
}

/// Exact `phi_F` with the default size limit.
pub fn brute_force_phi(t: &SubmodularTransformation) -> Result<CutReport> {
    brute_force_phi_capped(t, DEFAULT_BRUTE_FORCE_LIMIT)
}

/// Exact `phi_F` by scanning every subset; ties go to the smallest mask.
/// Subsets with zero volume on either side are skipped.
pub fn brute_force_phi_capped(t: &SubmodularTransformation, cap: usize) -> Result<CutReport> {
    let n = t.n();
    let cap = cap.min(MAX_BRUTE_FORCE);
    if n > cap {
        return Err(Error::Capability(format!(
            "brute-force conductance limited to {cap} vertices, got {n}"
        )));
    }
    if n < 2 {
        return Err(Error::input("conductance needs at least two vertices"));
    }
    let full = t.all_mask();
    let total = t.total_volume();
    let eval = |s: Mask| -> Option<(f64, Mask)> {
        let vol = t.volume(s);
        let vc = total - vol;
        if vol <= 0.0 || vc <= 0.0 {
            return None;
        }
        let phi = t.cut(s).min(t.cut(full ^ s)) / vol.min(vc);
        Some((phi, s))
    };
    let better = |a: (f64, Mask), b: (f64, Mask)| {
        if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    let best = (1..full as usize)
        .into_par_iter()
        .with_min_len(4096)
        .filter_map(|s| eval(s as Mask))
        .reduce(|| (f64::INFINITY, Mask::MAX), better);
    if best.1 == Mask::MAX {
        return Err(Error::input("no subset has positive volume on both sides"));
    }
    conductance_of_set(t, best.1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    #[serde(skip)]
    pub mask: Mask,
    pub set: Vec<usize>,
    /// `cut(S)/vol(S)` for the positive sweep, `cut(V\S)/vol(S)` for the negative one.
    pub ratio: f64,
    /// Guaranteed upper bound on `ratio`.
    pub bound: f64,
}

fn check_weights(t: &SubmodularTransformation, x: &[f64]) -> Result<()> {
    if x.len() != t.n() {
        return Err(Error::input(format!("vector has length {}, expected {}", x.len(), t.n())));
    }
    if x.iter().any(|a| !a.is_finite()) {
        return Err(Error::input("vector has non-finite entries"));
    }
    Ok(())
}

/// Best prefix of the decreasing order of `x in [0,1]^V`, restricted to its support.
pub fn sweep_positive(t: &SubmodularTransformation, x: &[f64]) -> Result<SweepResult> {
    check_weights(t, x)?;
    if x.iter().any(|&a| !(-1e-12..=1.0 + 1e-12).contains(&a)) {
        return Err(Error::input("positive sweep needs x in [0,1]^V"));
    }
    let denom: f64 = x.iter().zip(t.degrees()).map(|(a, &d)| a * d as f64).sum();
    if denom <= 0.0 {
        return Err(Error::input("positive sweep needs sum_v d(v) x(v) > 0"));
    }
    let numer: f64 = t.functions().iter().map(|f| lovasz::lovasz_eval(f, x)).sum();
    let bound = numer / denom;
    let order = lovasz::greedy_order(x);
    let mut best: Option<(f64, Mask)> = None;
    let mut prefix: Mask = 0;
    for &v in order.iter().take_while(|&&v| x[v] > 0.0) {
        prefix |= 1 << v;
        let vol = t.volume(prefix);
        if vol <= 0.0 {
            continue;
        }
        let ratio = t.cut(prefix) / vol;
        if best.is_none_or(|(b, _)| ratio < b) {
            best = Some((ratio, prefix));
        }
    }
    let (ratio, mask) = best.ok_or_else(|| Error::input("support of x has zero volume"))?;
    if ratio > bound + CHECK_TOL * bound.abs().max(1.0) {
        return Err(Error::Internal(format!(
            "positive sweep ratio {ratio} exceeds guarantee {bound}"
        )));
    }
    Ok(SweepResult {
        mask,
        set: one_based(mask),
        ratio,
        bound,
    })
}

/// Sweep for `x in [-1,0]^V`, using the reflected function `S -> F(V\S)`.
///
/// Scans prefixes of the increasing order of `x` inside its support and
/// minimizes `cut(V\S)/vol(S)`, which is at most `-sum_e f_e(x) / sum_v d(v) x(v)`.
pub fn sweep_negative(t: &SubmodularTransformation, x: &[f64]) -> Result<SweepResult> {
    check_weights(t, x)?;
    if x.iter().any(|&a| !(-1.0 - 1e-12..=1e-12).contains(&a)) {
        return Err(Error::input("negative sweep needs x in [-1,0]^V"));
    }
    if !t.vanishes_on_ground_set() {
        return Err(Error::input("negative sweep needs F(V) = 0"));
    }
    let denom: f64 = x.iter().zip(t.degrees()).map(|(a, &d)| a * d as f64).sum();
    if denom >= 0.0 {
        return Err(Error::input("negative sweep needs sum_v d(v) x(v) < 0"));
    }
    let numer: f64 = t.functions().iter().map(|f| lovasz::lovasz_eval(f, x)).sum();
    let bound = -numer / denom;
    let neg: Vec<f64> = x.iter().map(|a| -a).collect();
    let order = lovasz::greedy_order(&neg);
    let full = t.all_mask();
    let mut best: Option<(f64, Mask)> = None;
    let mut prefix: Mask = 0;
    for &v in order.iter().take_while(|&&v| x[v] < 0.0) {
        prefix |= 1 << v;
        let vol = t.volume(prefix);
        if vol <= 0.0 {
            continue;
        }
        let ratio = t.cut(full ^ prefix) / vol;
        if best.is_none_or(|(b, _)| ratio < b) {
            best = Some((ratio, prefix));
        }
    }
    let (ratio, mask) = best.ok_or_else(|| Error::input("support of x has zero volume"))?;
    if ratio > bound + CHECK_TOL * bound.abs().max(1.0) {
        return Err(Error::Internal(format!(
            "negative sweep ratio {ratio} exceeds guarantee {bound}"
        )));
    }
    Ok(SweepResult {
        mask,
        set: one_based(mask),
        ratio,
        bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepBranch {
    Positive,
    Negative,
}

#[derive(Clone, Debug, Serialize)]
pub struct StrongSweep {
    pub cut: CutReport,
    pub branch: SweepBranch,
    /// Normalized Rayleigh quotient of the input vector.
    pub rayleigh: f64,
    /// `2 sqrt(rayleigh)`.
    pub bound: f64,
}

/// A set `S` with `phi(S) <= 2 sqrt(R(x))` for `x` orthogonal to `D^{1/2} 1`.
///
/// `D^{-1/2} x` is shifted by its volume-weighted median so that both signed
/// parts are supported on at most half the volume; the part with the smaller
/// Rayleigh ratio is squared and swept (ties go to the positive part).
pub fn strong_sweep(t: &SubmodularTransformation, x: &[f64]) -> Result<StrongSweep> {
    check_weights(t, x)?;
    let op = LaplacianOperator::normalized(t)?;
    if !t.vanishes_on_ground_set() {
        return Err(Error::input("strong sweep needs F(V) = 0"));
    }
    let (lo, _) = t.value_range();
    if lo < -1e-12 {
        return Err(Error::input("strong sweep needs a non-negative transformation"));
    }
    let nx = linalg::norm(x);
    if nx == 0.0 {
        return Err(Error::input("strong sweep needs a non-zero vector"));
    }
    if dot(x, op.trivial_vector()).abs() > 1e-8 * nx {
        return Err(Error::input("strong sweep needs x orthogonal to D^{1/2} 1"));
    }
    let rayleigh = op.rayleigh(x)?;
    let bound = 2.0 * rayleigh.sqrt();
    let n = t.n();
    let deg: Vec<f64> = t.degrees().iter().map(|&d| d as f64).collect();
    let xt: Vec<f64> = x.iter().zip(&deg).map(|(a, d)| a / d.sqrt()).collect();

    // Smallest value m with vol{xt <= m} >= vol(V)/2.
    let mut asc: Vec<usize> = (0..n).collect();
    asc.sort_by(|&a, &b| xt[a].total_cmp(&xt[b]).then(a.cmp(&b)));
    let half = t.total_volume() / 2.0;
    let mut acc = 0.0;
    let mut median = xt[asc[n - 1]];
    for &v in &asc {
        acc += deg[v];
        if acc >= half {
            median = xt[v];
            break;
        }
    }
    let y: Vec<f64> = xt.iter().map(|a| a - median).collect();
    let y_pos: Vec<f64> = y.iter().map(|&a| a.max(0.0)).collect();
    let y_neg: Vec<f64> = y.iter().map(|&a| a.min(0.0)).collect();
    let side_ratio = |part: &[f64]| -> f64 {
        let denom: f64 = part.iter().zip(&deg).map(|(a, d)| d * a * a).sum();
        if denom <= 0.0 {
            return f64::INFINITY;
        }
        let numer: f64 = t
            .functions()
            .iter()
            .map(|f| lovasz::lovasz_eval(f, part).powi(2))
            .sum();
        numer / denom
    };
    let r_pos = side_ratio(&y_pos);
    let r_neg = side_ratio(&y_neg);
    let (branch, mask) = if r_pos <= r_neg {
        let sq: Vec<f64> = y_pos.iter().map(|a| a * a).collect();
        let top = sq.iter().copied().fold(0.0, f64::max);
        let sq: Vec<f64> = sq.iter().map(|a| a / top).collect();
        (SweepBranch::Positive, sweep_positive(t, &sq)?.mask)
    } else {
        let sq: Vec<f64> = y_neg.iter().map(|a| a * a).collect();
        let top = sq.iter().copied().fold(0.0, f64::max);
        let sq: Vec<f64> = sq.iter().map(|a| -a / top).collect();
        (SweepBranch::Negative, sweep_negative(t, &sq)?.mask)
    };
    let cut = conductance_of_set(t, mask)?;
    if cut.phi > bound + CHECK_TOL {
        return Err(Error::Internal(format!(
            "strong sweep found phi {} above 2 sqrt(R) = {bound}",
            cut.phi
        )));
    }
    Ok(StrongSweep {
        cut,
        branch,
        rayleigh,
        bound,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LeftWitness {
    /// One-based set used (the side with the smaller volume).
    pub set: Vec<usize>,
    #[serde(skip)]
    pub mask: Mask,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    pub rayleigh_plus: f64,
    pub rayleigh_minus: f64,
}

impl LeftWitness {
    pub fn best_rayleigh(&self) -> f64 {
        self.rayleigh_plus.min(self.rayleigh_minus)
    }
}

/// `x = D^{1/2} 1_S - (vol(S)/vol(V)) D^{1/2} 1` and its negation.
///
/// The smaller-volume side of `S` is used. Either vector has normalized
/// Rayleigh quotient at most `2 cut(S)/vol(S)` when `F` takes values in `[0,1]`.
pub fn left_witness(t: &SubmodularTransformation, mask: Mask) -> Result<LeftWitness> {
    let full = t.all_mask();
    let op = LaplacianOperator::normalized(t)?;
    let mut s = mask & full;
    if s == 0 || s == full {
        return Err(Error::input("left witness needs a proper non-empty subset"));
    }
    if t.volume(s) > t.volume(full ^ s) {
        s ^= full;
    }
    let ratio = t.volume(s) / t.total_volume();
    let plus: Vec<f64> = (0..t.n())
        .map(|v| {
            let sd = (t.degree(v) as f64).sqrt();
            let ind = if set::contains(s, v) { 1.0 } else { 0.0 };
            sd * (ind - ratio)
        })
        .collect();
    let minus: Vec<f64> = plus.iter().map(|a| -a).collect();
    let rayleigh_plus = op.rayleigh(&plus)?;
    let rayleigh_minus = op.rayleigh(&minus)?;
    Ok(LeftWitness {
        set: one_based(s),
        mask: s,
        plus,
        minus,
        rayleigh_plus,
        rayleigh_minus,
    })
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub seed: u64,
    pub restarts: usize,
    pub brute_force_limit: usize,
    pub diffusion: DiffusionOptions,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            seed: 0,
            restarts: 4,
            brute_force_limit: DEFAULT_BRUTE_FORCE_LIMIT,
            diffusion: DiffusionOptions {
                max_steps: 200_000,
                stall_window: 5_000,
                ..DiffusionOptions::default()
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessSummary {
    pub set: Vec<usize>,
    pub rayleigh_plus: f64,
    pub rayleigh_minus: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub set: Vec<usize>,
    pub phi: f64,
    pub branch: SweepBranch,
    pub rayleigh_used: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheegerCertificate {
    pub n: usize,
    pub m: usize,
    pub phi: f64,
    pub phi_set: Vec<usize>,
    pub lambda_tilde: f64,
    pub lambda_converged: bool,
    pub left_witness: WitnessSummary,
    pub sweep: SweepSummary,
    /// `min(R(x_left), R(-x_left)) <= 2 phi`.
    pub left_holds: bool,
    /// `phi(S_sweep) <= 2 sqrt(R(z))` for the vector `z` that was swept.
    pub right_holds: bool,
    /// `lambda_tilde <= 2 phi <= ... ` and `phi <= phi(S_sweep) <= 2 sqrt(lambda_tilde)`.
    pub sandwich_holds: bool,
    pub holds: bool,
    pub seed: u64,
    pub restarts: usize,
}

/// Check the value-range preconditions shared by certification routines.
pub fn validate_unit_range(t: &SubmodularTransformation) -> Result<()> {
    if let Some(v) = t.degrees().iter().position(|&d| d == 0) {
        return Err(Error::input(format!(
            "vertex {} lies in no function's support; conductance is undefined",
            v + 1
        )));
    }
    if !t.vanishes_on_ground_set() {
        return Err(Error::input("every function must satisfy F_e(V) = 0"));
    }
    let (lo, hi) = t.value_range();
    if lo < -1e-12 || hi > 1.0 + 1e-12 {
        return Err(Error::input(format!(
            "function values span [{lo}, {hi}], outside [0, 1]; scale the transformation first"
        )));
    }
    Ok(())
}

/// Two-sided certificate `lambda/2 <= phi <= 2 sqrt(lambda)` for a small transformation.
pub fn certify(t: &SubmodularTransformation, opts: &CertifyOptions) -> Result<CheegerCertificate> {
    validate_unit_range(t)?;
    let best = brute_force_phi_capped(t, opts.brute_force_limit)?;
    let witness = left_witness(t, best.mask)?;
    let op = LaplacianOperator::normalized(t)?;
    let reference = spectral::reference_lambda_from(
        &op,
        opts.restarts,
        opts.seed,
        opts.diffusion,
        vec![witness.plus.clone(), witness.minus.clone()],
    )?;
    let z = &reference.best.vector;
    let sweep = strong_sweep(t, z)?;
    let lambda = reference.lambda;
    let phi = best.phi;
    let left_holds = witness.best_rayleigh() <= 2.0 * phi + CHECK_TOL;
    let right_holds = sweep.cut.phi <= 2.0 * sweep.rayleigh.sqrt() + CHECK_TOL;
    let sandwich_holds = lambda <= 2.0 * phi + CHECK_TOL
        && phi <= sweep.cut.phi + 1e-12
        && sweep.cut.phi <= 2.0 * lambda.sqrt() + CHECK_TOL;
    Ok(CheegerCertificate {
        n: t.n(),
        m: t.m(),
        phi,
        phi_set: best.set.clone(),
        lambda_tilde: lambda,
        lambda_converged: reference.best.converged,
        left_witness: WitnessSummary {
            set: witness.set.clone(),
            rayleigh_plus: witness.rayleigh_plus,
            rayleigh_minus: witness.rayleigh_minus,
        },
        sweep: SweepSummary {
            set: sweep.cut.set.clone(),
            phi: sweep.cut.phi,
            branch: sweep.branch,
            rayleigh_used: sweep.rayleigh,
            bound: sweep.bound,
        },
        left_holds,
        right_holds,
        sandwich_holds,
        holds: left_holds && right_holds && sandwich_holds,
        seed: opts.seed,
        restarts: opts.restarts,
    })
}
