//! Base polytopes `B(F)`, their translates, and intersections with l1 balls.
//!
//! All vectors in this module live in the local coordinates of an oracle's
//! support. A [`PolytopeHandle`] with translation `p` and radius `r` denotes
//! the set of `y` with `y + p in B(F)` and `||y + p||_1 <= r`, which is
//! `B(F_p) ∩ (-p + r B_1)` for the translated function `F_p(S) = F(S) - p(S)`.

pub mod cover;
pub mod lp;
pub mod wolfe;

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg;
use crate::lovasz::{self, MAX_ENUMERATION_SUPPORT};
use crate::oracle::SubmodularOracle;
use crate::set::{self, Mask};

pub use cover::{
    cover_base_polytope, cover_base_polytope_at_scale, l1_ball_cover, maurey_cover_size,
    CoverProvenance, CoverSet,
};
pub use wolfe::{wolfe_min_norm, MinNormResult, WolfeOptions};

/// Largest support for exhaustive membership tests.
pub const MAX_MEMBERSHIP_SUPPORT: usize = 16;
/// Largest support for the l1-ball linear program.
pub const MAX_LP_SUPPORT: usize = 12;
/// Tolerance of membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct PolytopeHandle<'a> {
    oracle: &'a SubmodularOracle,
    translation: Option<Vec<f64>>,
    radius: Option<f64>,
    /// `F` tabulated on local masks when the support is small enough.
    table: Option<Vec<f64>>,
    max_l1: OnceLock<Option<f64>>,
}

impl<'a> PolytopeHandle<'a> {
    pub fn new(oracle: &'a SubmodularOracle) -> Self {
        let k = oracle.support().len();
        let table = (k <= MAX_MEMBERSHIP_SUPPORT)
            .then(|| (0..=set::full(k)).map(|m| oracle.eval_local(m)).collect());
        PolytopeHandle {
            oracle,
            translation: None,
            radius: None,
            table,
            max_l1: OnceLock::new(),
        }
    }

    /// Shift by `p`: the handle becomes `B(F) - p`.
    pub fn translated(mut self, p: Vec<f64>) -> Result<Self> {
        if p.len() != self.dim() {
            return Err(Error::input(format!(
                "translation has length {}, support has {}",
                p.len(),
                self.dim()
            )));
        }
        self.translation = Some(p);
        Ok(self)
    }

    /// Intersect with the l1 ball of radius `r` around `-p`.
    pub fn with_radius(mut self, r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::input(format!("radius must be non-negative, got {r}")));
        }
        self.radius = Some(r);
        Ok(self)
    }

    pub fn oracle(&self) -> &SubmodularOracle {
        self.oracle
    }

    pub fn dim(&self) -> usize {
        self.oracle.support().len()
    }

    pub fn translation(&self) -> Option<&[f64]> {
        self.translation.as_deref()
    }

    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    #[inline]
    fn f(&self, local: Mask) -> f64 {
        match &self.table {
            Some(t) => t[local as usize],
            None => self.oracle.eval_local(local),
        }
    }

    fn shift(&self) -> Vec<f64> {
        self.translation
            .clone()
            .unwrap_or_else(|| vec![0.0; self.dim()])
    }

    /// Largest l1 norm over `B(F)`, when the support allows enumeration.
    pub fn max_l1_norm(&self) -> Option<f64> {
        *self.max_l1.get_or_init(|| {
            lovasz::enumerate_extreme_points(self.oracle)
                .ok()
                .map(|pts| pts.iter().map(|w| linalg::norm1(w)).fold(0.0, f64::max))
        })
    }

    /// Whether the l1 constraint can be ignored because it contains all of `B(F)`.
    fn ball_is_redundant(&self) -> bool {
        match self.radius {
            None => true,
            Some(r) => self.max_l1_norm().is_some_and(|m| r >= m - 1e-12),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// Largest violation over all constraints; non-positive for members.
    pub worst_violation: f64,
    /// Description of the worst constraint.
    pub worst_constraint: String,
}

/// Exhaustive membership test of `y` in the handle.
pub fn membership(handle: &PolytopeHandle<'_>, y: &[f64]) -> Result<Membership> {
    let k = handle.dim();
    if k > MAX_MEMBERSHIP_SUPPORT {
        return Err(Error::Capability(format!(
            "membership limited to {MAX_MEMBERSHIP_SUPPORT} vertices, support has {k}"
        )));
    }
    if y.len() != k {
        return Err(Error::input(format!("point has length {}, expected {k}", y.len())));
    }
    let w = linalg::add(y, &handle.shift());
    let full = set::full(k);
    // Prefix sums over subsets, built incrementally from the lowest bit.
    let mut sums = vec![0.0; 1usize << k];
    let mut worst = f64::NEG_INFINITY;
    let mut worst_constraint = String::new();
    for s in 1..=full {
        let low = s.trailing_zeros() as usize;
        sums[s as usize] = sums[(s & (s - 1)) as usize] + w[low];
        let viol = sums[s as usize] - handle.f(s);
        if viol > worst {
            worst = viol;
            worst_constraint = format!("w(S) <= F(S) for local mask {s}");
        }
    }
    let eq = (sums[full as usize] - handle.f(full)).abs();
    if eq > worst {
        worst = eq;
        worst_constraint = "w(V) = F(V)".to_string();
    }
    if let Some(r) = handle.radius {
        let viol = linalg::norm1(&w) - r;
        if viol > worst {
            worst = viol;
            worst_constraint = format!("||w||_1 <= {r}");
        }
    }
    Ok(Membership {
        member: worst <= MEMBERSHIP_TOL,
        worst_violation: worst,
        worst_constraint,
    })
}

/// A point of the handle maximizing `<c, y>`.
///
/// Without an l1 constraint (or when the ball contains `B(F)`) this is the
/// greedy vertex shifted by `-p`. Otherwise a linear program over
/// `B(F) ∩ r B_1` is solved, adding violated subset constraints until none
/// remain, which gives the same optimum as listing all of them up front.
pub fn linear_optimize(handle: &PolytopeHandle<'_>, c: &[f64]) -> Result<Vec<f64>> {
    let k = handle.dim();
    if c.len() != k {
        return Err(Error::input(format!("direction has length {}, expected {k}", c.len())));
    }
    let p = handle.shift();
    let w = if handle.ball_is_redundant() {
        lovasz::greedy_local(handle.oracle, c)
    } else {
        ball_lp(handle, c, handle.radius.unwrap_or(f64::INFINITY))?
    };
    Ok(linalg::sub(&w, &p))
}

fn ball_lp(handle: &PolytopeHandle<'_>, c: &[f64], r: f64) -> Result<Vec<f64>> {
    use lp::{Constraint, LpOutcome, Relation};
    let k = handle.dim();
    if k > MAX_LP_SUPPORT {
        return Err(Error::Capability(format!(
            "l1-ball linear program limited to {MAX_LP_SUPPORT} vertices, support has {k}"
        )));
    }
    let full = set::full(k);
    let fv = handle.f(full);
    // Variables: w+ (k entries) then w- (k entries), w = w+ - w-.
    let signed = |mask: Mask| -> Vec<f64> {
        let mut row = vec![0.0; 2 * k];
        for i in set::to_indices(mask) {
            row[i] = 1.0;
            row[k + i] = -1.0;
        }
        row
    };
    let mut rows = vec![
        Constraint::new(vec![1.0; 2 * k], Relation::Le, r),
        Constraint::new(signed(full), Relation::Eq, fv),
    ];
    for i in 0..k {
        let single = 1u64 << i;
        rows.push(Constraint::new(signed(single), Relation::Le, handle.f(single)));
        rows.push(Constraint::new(
            signed(single),
            Relation::Ge,
            fv - handle.f(full ^ single),
        ));
    }
    let objective: Vec<f64> = c.iter().copied().chain(c.iter().map(|a| -a)).collect();
    let mut in_model = vec![false; 1usize << k];
    for _round in 0..=(1usize << k) {
        let x = match lp::maximize(&objective, &rows) {
            LpOutcome::Optimal { x, .. } => x,
            LpOutcome::Infeasible => {
                return Err(Error::Infeasible(format!(
                    "B(F) does not meet the l1 ball of radius {r}"
                )))
            }
            LpOutcome::Unbounded => {
                return Err(Error::Internal("bounded linear program reported unbounded".into()))
            }
        };
        let w: Vec<f64> = (0..k).map(|i| x[i] - x[k + i]).collect();
        let mut violated: Vec<(f64, Mask)> = Vec::new();
        let mut sums = vec![0.0; 1usize << k];
        for s in 1..full {
            let low = s.trailing_zeros() as usize;
            sums[s as usize] = sums[(s & (s - 1)) as usize] + w[low];
            let viol = sums[s as usize] - handle.f(s);
            if viol > 1e-10 && !in_model[s as usize] {
                violated.push((viol, s));
            }
        }
        if violated.is_empty() {
            return Ok(w);
        }
        violated.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, s) in violated.iter().take(8) {
            in_model[s as usize] = true;
            rows.push(Constraint::new(signed(s), Relation::Le, handle.f(s)));
        }
    }
    Err(Error::Internal("constraint generation did not terminate".into()))
}

/// `max_{w in P} ||w||_2`, exact or an upper bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HausdorffNorm {
    pub value: f64,
    pub exact: bool,
}

/// Hausdorff norm of the handle.
///
/// Exact by enumerating extreme points for supports of at most eight
/// vertices (translation applied, l1 ball ignored unless it is redundant);
/// otherwise the bound `2 ||F||_inf + ||p||_2`, flagged as inexact.
pub fn hausdorff_norm(handle: &PolytopeHandle<'_>) -> HausdorffNorm {
    let p = handle.shift();
    let k = handle.dim();
    if k <= MAX_ENUMERATION_SUPPORT && handle.ball_is_redundant() {
        if let Ok(pts) = lovasz::enumerate_extreme_points(handle.oracle) {
            let value = pts
                .iter()
                .map(|w| linalg::dist_sq(w, &p).sqrt())
                .fold(0.0, f64::max);
            return HausdorffNorm { value, exact: true };
        }
    }
    let mut bound = 2.0 * handle.oracle.infinity_norm();
    if let Some(r) = handle.radius {
        bound = bound.min(r);
    }
    HausdorffNorm {
        value: bound + linalg::norm(&p),
        exact: false,
    }
}
