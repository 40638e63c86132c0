//! Vector relaxations of the eigenvalue problem and their roundings.
//!
//! Every function `F_e` is represented by a finite point set `C_e`, either
//! the extreme points of `B(F_e)` or a cover from
//! [`crate::polytope::cover_base_polytope`]. The symmetric relaxation
//! minimizes `sum_e ||eta_e||^2` subject to `||Xw||^2 <= ||eta_e||^2`; the
//! general one minimizes `(1/2) sum_e ||eta_e||^2` subject to
//! `||Xw||^2 + <Xw, u_w> <= ||eta_e||^2` with auxiliary vectors
//! `||u_w|| = ||Xw||`, `<u_w, v_1> >= ||u_w||^2`. Both share the degree
//! constraints `sum_v d(v)||x_v||^2 = 1` and `sum_v d(v) x_v = 0`.

mod dump;
mod rounding;
mod solver;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::lovasz;
use crate::oracle::{scale_for_general_sdp, SubmodularTransformation};
use crate::polytope::{cover_base_polytope, hausdorff_norm, PolytopeHandle};

pub use dump::{read_instance, write_instance, write_solution};
pub use rounding::{
    default_delta, round_general, round_symmetric, RoundedVector, RoundingOptions, DEFAULT_DRAWS,
};
pub use solver::SolverOptions;

/// Extra dimensions of the vector variables beyond `n`.
pub const RANK_PADDING: usize = 4;
/// Largest value a function may take in the general relaxation.
pub const GENERAL_SCALE_CAP: f64 = 0.01;
/// Slack when comparing values against [`GENERAL_SCALE_CAP`] and zero.
const SCALE_TOL: f64 = 1e-12;
/// Points of a symmetric set closer than this to the negation of a kept point are dropped.
const NEGATION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpKind {
    Symmetric,
    General,
}

/// Where the point sets `C_e` come from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum PointSource {
    /// All extreme points of `B(F_e)` (supports of at most eight vertices).
    Vertices,
    /// A cover of `B(F_e)` at relative radius `eps`.
    Cover { eps: f64 },
}

/// The point set of one function, in local coordinates of its support.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionPoints {
    pub support: Vec<usize>,
    pub points: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpInstance {
    pub kind: SdpKind,
    pub n: usize,
    /// Dimension `N` of every vector variable.
    pub rank: usize,
    pub degrees: Vec<f64>,
    pub functions: Vec<FunctionPoints>,
    pub source: PointSource,
}

impl SdpInstance {
    pub fn m(&self) -> usize {
        self.functions.len()
    }

    /// Number of `(e, w)` constraint pairs.
    pub fn num_constraints(&self) -> usize {
        self.functions.iter().map(|f| f.points.len()).sum()
    }

    fn validate(&self) -> Result<()> {
        if self.degrees.len() != self.n {
            return Err(Error::input("degree vector length differs from n"));
        }
        if self.rank < self.n.max(1) {
            return Err(Error::input("vector dimension must be at least n"));
        }
        for f in &self.functions {
            if f.support.iter().any(|&v| v >= self.n) {
                return Err(Error::input("support vertex out of range"));
            }
            if f.points.iter().any(|w| w.len() != f.support.len()) {
                return Err(Error::input("point dimension differs from support size"));
            }
        }
        Ok(())
    }
}

fn point_sets(t: &SubmodularTransformation, source: PointSource) -> Result<Vec<FunctionPoints>> {
    t.functions()
        .iter()
        .map(|f| {
            let points = match source {
                PointSource::Vertices => lovasz::enumerate_extreme_points(f)?,
                PointSource::Cover { eps } => {
                    if f.infinity_norm() == 0.0 {
                        vec![vec![0.0; f.support().len()]]
                    } else {
                        cover_base_polytope(f, eps)?.points
                    }
                }
            };
            Ok(FunctionPoints {
                support: f.support().to_vec(),
                points,
            })
        })
        .collect()
}

fn base_instance(t: &SubmodularTransformation, kind: SdpKind, source: PointSource) -> Result<SdpInstance> {
    if let PointSource::Cover { eps } = source {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::input("cover radius eps must be positive"));
        }
    }
    let inst = SdpInstance {
        kind,
        n: t.n(),
        rank: t.n() + RANK_PADDING,
        degrees: t.degrees().iter().map(|&d| d as f64).collect(),
        functions: point_sets(t, source)?,
        source,
    };
    inst.validate()?;
    Ok(inst)
}

/// Keep one of each pair `{w, -w}`; both give the same value of `||Xw||^2`.
fn drop_negations(points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for w in points {
        let neg: Vec<f64> = w.iter().map(|a| -a).collect();
        if !kept.iter().any(|k| linalg::dist_sq(k, &neg).sqrt() <= NEGATION_TOL) {
            kept.push(w);
        }
    }
    kept
}

/// Relaxation for transformations whose every function is symmetric.
pub fn build_symmetric(t: &SubmodularTransformation, source: PointSource) -> Result<SdpInstance> {
    if !t.all_functions_symmetric() {
        return Err(Error::input(
            "symmetric relaxation needs F_e(S) = F_e(V\\S) for every function",
        ));
    }
    let mut inst = base_instance(t, SdpKind::Symmetric, source)?;
    for f in &mut inst.functions {
        f.points = drop_negations(std::mem::take(&mut f.points));
    }
    Ok(inst)
}

/// Relaxation for general transformations, which must already take values in `[0, 1/100]`.
pub fn build_general(t: &SubmodularTransformation, source: PointSource) -> Result<SdpInstance> {
    let (lo, hi) = t.value_range();
    if lo < -SCALE_TOL || hi > GENERAL_SCALE_CAP + SCALE_TOL {
        return Err(Error::input(format!(
            "general relaxation needs values in [0, 1/100], found [{lo}, {hi}]; \
             rescale with oracle::scale_for_general_sdp first"
        )));
    }
    if !t.vanishes_on_ground_set() {
        return Err(Error::input("general relaxation needs F_e(V) = 0 for every function"));
    }
    base_instance(t, SdpKind::General, source)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SdpResiduals {
    /// `|sum_v d(v) ||x_v||^2 - 1|`.
    pub degree_norm: f64,
    /// `||sum_v d(v) x_v||`.
    pub degree_mean: f64,
    /// `max_(e,w) (a_w - ||eta_e||^2)`, clamped at zero.
    pub constraint: f64,
    /// General relaxation: `max | ||u_w||^2 - ||Xw||^2 |`.
    pub aux_norm: f64,
    /// General relaxation: `max (||u_w||^2 - <u_w, v_1>)`, clamped at zero.
    pub aux_cap: f64,
    /// Largest violation of the last augmented-Lagrangian iterate, before
    /// the slacks were reset to make the returned point feasible.
    pub solver_violation: f64,
}

impl SdpResiduals {
    pub fn max(&self) -> f64 {
        [
            self.degree_norm,
            self.degree_mean,
            self.constraint,
            self.aux_norm,
            self.aux_cap,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SdpSolution {
    pub kind: SdpKind,
    pub n: usize,
    pub rank: usize,
    /// `x_v` for each vertex, as rows of length `rank`.
    pub vectors: Vec<Vec<f64>>,
    /// `||eta_e||^2` for each function.
    pub slacks: Vec<f64>,
    pub objective: f64,
    pub residuals: SdpResiduals,
    pub iterations: usize,
    pub outer_iterations: usize,
    pub converged: bool,
    pub seed: u64,
}

impl SdpSolution {
    /// `Xw` for a point of function `e`.
    pub fn image(&self, inst: &SdpInstance, e: usize, w: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.rank];
        for (&v, &c) in inst.functions[e].support.iter().zip(w) {
            linalg::axpy(c, &self.vectors[v], &mut p);
        }
        p
    }

    /// The auxiliary vectors `u_w` of the general relaxation, per function and point.
    pub fn aux_vectors(&self, inst: &SdpInstance) -> Vec<Vec<Vec<f64>>> {
        inst.functions
            .iter()
            .enumerate()
            .map(|(e, f)| {
                f.points
                    .iter()
                    .map(|w| solver::general_aux(&self.image(inst, e, w)))
                    .collect()
            })
            .collect()
    }

    /// `<p, v_1>` split of the general relaxation's points into the sets
    /// `W_e^+ = {w : <Xw, v_1> > -1/2}` and its complement.
    pub fn split_sets(&self, inst: &SdpInstance) -> Vec<SplitSet> {
        inst.functions
            .iter()
            .enumerate()
            .map(|(e, f)| {
                let mut plus = Vec::new();
                let mut minus = Vec::new();
                let mut max_plus: f64 = 0.0;
                for (j, w) in f.points.iter().enumerate() {
                    let p = self.image(inst, e, w);
                    if p[0] > -0.5 {
                        plus.push(j);
                        max_plus = max_plus.max(linalg::norm_sq(&p));
                    } else {
                        minus.push(j);
                    }
                }
                SplitSet {
                    plus,
                    minus,
                    max_plus_norm_sq: max_plus,
                    slack: self.slacks[e],
                }
            })
            .collect()
    }
}

/// Points of one function with `<Xw, v_1> > -1/2` (`plus`) and the rest.
#[derive(Clone, Debug, Serialize)]
pub struct SplitSet {
    pub plus: Vec<usize>,
    pub minus: Vec<usize>,
    /// `max_{w in plus} ||Xw||^2`.
    pub max_plus_norm_sq: f64,
    /// `||eta_e||^2`.
    pub slack: f64,
}

impl SplitSet {
    /// Whether `max_{w in plus} ||Xw||^2 <= 2 ||eta_e||^2 + tol`.
    pub fn bound_holds(&self, tol: f64) -> bool {
        self.max_plus_norm_sq <= 2.0 * self.slack + tol
    }
}

/// Solve an instance; non-convergence is reported through `converged` and the residuals.
pub fn solve(inst: &SdpInstance, opts: &SolverOptions) -> Result<SdpSolution> {
    inst.validate()?;
    if !(opts.tol > 0.0) {
        return Err(Error::input("solver tolerance must be positive"));
    }
    if let Some(z) = &opts.warm_start {
        if z.len() != inst.n {
            return Err(Error::input("warm start length differs from n"));
        }
    }
    let pb = solver::Problem::new(inst);
    let out = solver::solve_problem(&pb, opts);
    let r = inst.rank;
    let vectors: Vec<Vec<f64>> = (0..inst.n)
        .map(|v| {
            let d = inst.degrees[v];
            let s = if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 };
            linalg::scale(&out.y[v * r..(v + 1) * r], s)
        })
        .collect();
    let mut sol = SdpSolution {
        kind: inst.kind,
        n: inst.n,
        rank: r,
        vectors,
        slacks: out.slacks,
        objective: out.objective,
        residuals: SdpResiduals {
            degree_norm: 0.0,
            degree_mean: 0.0,
            constraint: 0.0,
            aux_norm: 0.0,
            aux_cap: 0.0,
            solver_violation: out.max_violation,
        },
        iterations: out.iterations,
        outer_iterations: out.outer,
        converged: out.converged,
        seed: opts.seed,
    };
    sol.residuals = residuals(inst, &sol);
    Ok(sol)
}

fn residuals(inst: &SdpInstance, sol: &SdpSolution) -> SdpResiduals {
    let mut norm = 0.0;
    let mut mean = vec![0.0; sol.rank];
    let positive = inst.degrees.iter().any(|&d| d > 0.0);
    for (x, &d) in sol.vectors.iter().zip(&inst.degrees) {
        norm += d * linalg::norm_sq(x);
        linalg::axpy(d, x, &mut mean);
    }
    let mut constraint: f64 = 0.0;
    let mut aux_norm: f64 = 0.0;
    let mut aux_cap: f64 = 0.0;
    for (e, f) in inst.functions.iter().enumerate() {
        for w in &f.points {
            let p = sol.image(inst, e, w);
            let a = match inst.kind {
                SdpKind::Symmetric => linalg::norm_sq(&p),
                SdpKind::General => {
                    let u = solver::general_aux(&p);
                    let un = linalg::norm_sq(&u);
                    aux_norm = aux_norm.max((un - linalg::norm_sq(&p)).abs());
                    aux_cap = aux_cap.max(un - u[0]);
                    linalg::norm_sq(&p) + linalg::dot(&p, &u)
                }
            };
            constraint = constraint.max(a - sol.slacks[e]);
        }
    }
    SdpResiduals {
        degree_norm: if positive { (norm - 1.0).abs() } else { 0.0 },
        degree_mean: linalg::norm(&mean),
        constraint: constraint.max(0.0),
        aux_norm,
        aux_cap: aux_cap.max(0.0),
        solver_violation: sol.residuals.solver_violation,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpMode {
    Symmetric,
    General,
}

#[derive(Clone, Debug)]
pub struct ApproxOptions {
    pub seed: u64,
    pub source: PointSource,
    pub solver: SolverOptions,
    pub rounding: RoundingOptions,
}

impl ApproxOptions {
    pub fn new(seed: u64, source: PointSource) -> Self {
        ApproxOptions {
            seed,
            source,
            solver: SolverOptions {
                seed,
                ..SolverOptions::default()
            },
            rounding: RoundingOptions {
                seed,
                ..RoundingOptions::default()
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproxResult {
    pub mode: SdpMode,
    /// Normalized Rayleigh quotient of the rounded vector, on the input transformation.
    pub lambda_hat: f64,
    pub vector: Vec<f64>,
    /// Relaxation value on the instance actually solved.
    pub sdp_value: f64,
    /// Relaxation value in the units of the input transformation.
    pub sdp_value_unscaled: f64,
    /// Factor applied to every function before solving (1 in symmetric mode).
    pub scale_factor: f64,
    /// `max_e ||B(F_e)||_H^2` of the input transformation.
    pub b_squared: f64,
    pub b_squared_exact: bool,
    pub draw: usize,
    #[serde(skip)]
    pub instance: SdpInstance,
    #[serde(skip)]
    pub solution: SdpSolution,
}

/// Build, solve and round in one call.
pub fn approx_eigenvalue(
    t: &SubmodularTransformation,
    mode: SdpMode,
    opts: &ApproxOptions,
) -> Result<ApproxResult> {
    let mut b_squared: f64 = 0.0;
    let mut b_squared_exact = true;
    for f in t.functions() {
        let h = hausdorff_norm(&PolytopeHandle::new(f));
        b_squared = b_squared.max(h.value * h.value);
        b_squared_exact &= h.exact;
    }
    let (work, factor) = match mode {
        SdpMode::Symmetric => (None, 1.0),
        SdpMode::General => {
            let s = scale_for_general_sdp(t);
            (Some(s.transformation), s.factor)
        }
    };
    let target = work.as_ref().unwrap_or(t);
    let instance = match mode {
        SdpMode::Symmetric => build_symmetric(target, opts.source)?,
        SdpMode::General => build_general(target, opts.source)?,
    };
    let solution = solve(&instance, &opts.solver)?;
    let sdp_value = solution.objective;
    let sdp_value_unscaled = sdp_value / (factor * factor);
    if t.m() == 0 {
        let mut vector = vec![0.0; t.n()];
        if t.n() >= 2 {
            vector[0] = std::f64::consts::FRAC_1_SQRT_2;
            vector[1] = -std::f64::consts::FRAC_1_SQRT_2;
        }
        return Ok(ApproxResult {
            mode,
            lambda_hat: 0.0,
            vector,
            sdp_value,
            sdp_value_unscaled,
            scale_factor: factor,
            b_squared,
            b_squared_exact,
            draw: 0,
            instance,
            solution,
        });
    }
    let rounded = match mode {
        SdpMode::Symmetric => round_symmetric(target, &solution, &opts.rounding)?,
        SdpMode::General => round_general(target, &instance, &solution, &opts.rounding)?,
    };
    let op = crate::spectral::LaplacianOperator::normalized(t)?;
    let lambda_hat = op.rayleigh(&rounded.vector)?;
    Ok(ApproxResult {
        mode,
        lambda_hat,
        vector: rounded.vector,
        sdp_value,
        sdp_value_unscaled,
        scale_factor: factor,
        b_squared,
        b_squared_exact,
        draw: rounded.draw,
        instance,
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{build_directed_cut, build_undirected_cut};

    fn solve_default(inst: &SdpInstance, seed: u64) -> SdpSolution {
        solve(
            inst,
            &SolverOptions {
                seed,
                ..SolverOptions::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn single_edge_has_one_constraint_class() {
        let t = build_undirected_cut(2, &[(0, 1)]).unwrap();
        let inst = build_symmetric(&t, PointSource::Vertices).unwrap();
        assert_eq!(inst.num_constraints(), 1);
        let sol = solve_default(&inst, 1);
        assert!((sol.objective - 2.0).abs() < 1e-6, "{}", sol.objective);
    }

    #[test]
    fn four_cycle_value_is_at_most_one() {
        let t = build_undirected_cut(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let inst = build_symmetric(&t, PointSource::Vertices).unwrap();
        let sol = solve_default(&inst, 3);
        assert!(sol.objective <= 1.0 + 1e-4, "{}", sol.objective);
        assert!(sol.objective >= 1.0 - 1e-3, "{}", sol.objective);
        assert!(sol.residuals.max() <= 1e-6, "{:?}", sol.residuals);
    }

    #[test]
    fn empty_transformation_has_zero_value() {
        let t = SubmodularTransformation::new(3, vec![]).unwrap();
        let inst = build_symmetric(&t, PointSource::Vertices).unwrap();
        assert_eq!(solve_default(&inst, 0).objective, 0.0);
        let inst = build_general(&t, PointSource::Vertices).unwrap();
        assert_eq!(solve_default(&inst, 0).objective, 0.0);
        let r = approx_eigenvalue(&t, SdpMode::Symmetric, &ApproxOptions::new(0, PointSource::Vertices))
            .unwrap();
        assert_eq!(r.lambda_hat, 0.0);
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let t = build_directed_cut(2, &[(0, 1), (1, 0)]).unwrap();
        assert!(matches!(build_symmetric(&t, PointSource::Vertices), Err(Error::Input(_))));
    }

    #[test]
    fn unscaled_input_is_rejected() {
        let t = build_directed_cut(2, &[(0, 1)]).unwrap();
        let err = build_general(&t, PointSource::Vertices).unwrap_err();
        assert!(err.to_string().contains("scale_for_general_sdp"));
    }

    #[test]
    fn general_single_arc() {
        let t = build_directed_cut(2, &[(0, 1)]).unwrap();
        let s = scale_for_general_sdp(&t);
        let inst = build_general(&s.transformation, PointSource::Vertices).unwrap();
        assert_eq!(inst.functions[0].points.len(), 2);
        let sol = solve_default(&inst, 2);
        assert!(sol.objective >= -1e-6);
        assert!(sol.residuals.max() <= 1e-6, "{:?}", sol.residuals);
    }
}
