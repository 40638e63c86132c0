//! Finite covers of l1 balls and of base polytopes.
//!
//! A cover of a set `P` at radius `eps` is a finite set `C` with every point of
//! `P` within Euclidean distance `eps` of some point of `C`.
//!
//! The l1-ball cover is the Maurey construction: averages of `K = ceil(1/eps^2)`
//! points drawn from `{0, ±e_1, ..., ±e_n}`, which are exactly the lattice
//! points `a / K` with `||a||_1 <= K`.
//!
//! Base polytopes are covered scale by scale. At radius `r`, every candidate
//! `p` of an `(eps/3)`-cover of `r B_1` is projected onto `B(F) ∩ r B_1` with
//! Wolfe's algorithm and the projection is kept when it moves `p` by at most
//! `2 eps / 3`. Candidates that provably lie farther than `2 eps / 3` from
//! `B(F) ∩ r B_1` are discarded before projection.

use std::collections::HashSet;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::wolfe::{wolfe_min_norm, WolfeOptions};
use super::{membership, PolytopeHandle};
use crate::error::{Error, Result};
use crate::linalg;
use crate::oracle::SubmodularOracle;
use crate::set::{self, Mask};

/// Largest support accepted by the base-polytope covers.
pub const MAX_COVER_SUPPORT: usize = 10;
/// Refuse to materialize more candidates than this.
pub const MAX_CANDIDATES: usize = 20_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoverProvenance {
    L1Ball { multiplicity: usize },
    Scale { radius: f64, candidates: usize, projected: usize },
    Multiscale { scales: Vec<f64>, hausdorff: f64, hausdorff_exact: bool },
}

#[derive(Clone, Debug)]
pub struct CoverSet {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    /// Absolute covering radius.
    pub eps_abs: f64,
    pub provenance: CoverProvenance,
}

impl CoverSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance from `x` to the nearest cover point (infinite for an empty cover).
    pub fn distance_to(&self, x: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|p| linalg::dist_sq(p, x))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    /// Text export: a header `dim eps_abs count`, then one point per line.
    pub fn write_to(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "{} {} {}", self.dim, self.eps_abs, self.points.len())?;
        for p in &self.points {
            let line: Vec<String> = p.iter().map(|a| format!("{a}")).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    /// Parse the text export produced by [`CoverSet::write_to`].
    pub fn read_from(text: &str) -> Result<CoverSet> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let parse_err = |line: usize, message: &str| Error::Parse {
            path: "<cover>".into(),
            line: line + 1,
            message: message.into(),
        };
        let (hl, header) = lines.next().ok_or_else(|| parse_err(0, "empty cover file"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 3 {
            return Err(parse_err(hl, "header must be `dim eps_abs count`"));
        }
        let dim: usize = h[0].parse().map_err(|_| parse_err(hl, "bad dimension"))?;
        let eps_abs: f64 = h[1].parse().map_err(|_| parse_err(hl, "bad radius"))?;
        let count: usize = h[2].parse().map_err(|_| parse_err(hl, "bad count"))?;
        let mut points = Vec::with_capacity(count);
        for (i, line) in lines {
            let p: std::result::Result<Vec<f64>, _> =
                line.split_whitespace().map(str::parse::<f64>).collect();
            let p = p.map_err(|_| parse_err(i, "bad coordinate"))?;
            if p.len() != dim {
                return Err(parse_err(i, "wrong number of coordinates"));
            }
            points.push(p);
        }
        if points.len() != count {
            return Err(parse_err(0, "point count does not match header"));
        }
        Ok(CoverSet {
            dim,
            points,
            eps_abs,
            provenance: CoverProvenance::L1Ball { multiplicity: 0 },
        })
    }
}

/// `ceil(1/eps^2)`, guarding against round-off at exact reciprocals.
pub fn maurey_multiplicity(eps: f64) -> usize {
    let k = 1.0 / (eps * eps);
    (k - 1e-9).ceil().max(1.0) as usize
}

/// Number of lattice points `a` in `Z^n` with `||a||_1 <= k`.
pub fn maurey_cover_size(n: usize, k: usize) -> u128 {
    // sum_j 2^j C(n, j) C(k, j)
    let mut total: u128 = 0;
    for j in 0..=n.min(k) {
        total += (1u128 << j) * binomial(n, j) * binomial(k, j);
    }
    total
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Maurey cover of the unit l1 ball in `R^n` at radius `eps`, for `0 < eps <= 1`.
pub fn l1_ball_cover(n: usize, eps: f64) -> Result<CoverSet> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::input(format!("l1 cover needs 0 < eps <= 1, got {eps}")));
    }
    if n == 0 {
        return Err(Error::input("dimension must be positive"));
    }
    let k = maurey_multiplicity(eps);
    let size = maurey_cover_size(n, k);
    if size > MAX_CANDIDATES as u128 {
        return Err(Error::Capability(format!(
            "l1 cover would have {size} points (limit {MAX_CANDIDATES})"
        )));
    }
    let mut points = Vec::with_capacity(size as usize);
    let mut a = vec![0i64; n];
    enumerate_l1_lattice(&mut a, 0, k as i64, &mut |a| {
        points.push(a.iter().map(|&x| x as f64 / k as f64).collect())
    });
    Ok(CoverSet {
        dim: n,
        points,
        eps_abs: eps,
        provenance: CoverProvenance::L1Ball { multiplicity: k },
    })
}

fn enumerate_l1_lattice(a: &mut Vec<i64>, i: usize, budget: i64, emit: &mut impl FnMut(&[i64])) {
    if i == a.len() {
        emit(a);
        return;
    }
    for v in -budget..=budget {
        a[i] = v;
        enumerate_l1_lattice(a, i + 1, budget - v.abs(), emit);
    }
    a[i] = 0;
}

/// Necessary conditions for `dist(p, B(F) ∩ r B_1) <= rho`, checked coordinate by coordinate.
struct CandidateFilter {
    k: usize,
    rho: f64,
    /// `F` on local masks.
    f: Vec<f64>,
    fv: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl CandidateFilter {
    fn new(oracle: &SubmodularOracle, rho: f64) -> Self {
        let k = oracle.support().len();
        let full = set::full(k);
        let f: Vec<f64> = (0..=full).map(|m| oracle.eval_local(m)).collect();
        let fv = f[full as usize];
        let lo = (0..k).map(|i| fv - f[(full ^ 1 << i) as usize]).collect();
        let hi = (0..k).map(|i| f[1 << i]).collect();
        CandidateFilter { k, rho, f, fv, lo, hi }
    }

    /// Every subset `S` of the first `depth + 1` coordinates that contains
    /// coordinate `depth` must satisfy
    /// `F(V) - F(V\S) - rho sqrt|S| <= p(S) <= F(S) + rho sqrt|S|`.
    fn partial_ok(&self, sums: &mut [f64], depth: usize, value: f64) -> bool {
        let full = set::full(self.k);
        let base = 1usize << depth;
        let slack = 1e-9;
        for s in 0..base {
            let total = sums[s] + value;
            sums[base | s] = total;
            let mask = (base | s) as Mask;
            let size = mask.count_ones() as f64;
            let margin = self.rho * size.sqrt() + slack;
            if total > self.f[mask as usize] + margin {
                return false;
            }
            if total < self.fv - self.f[(full ^ mask) as usize] - margin {
                return false;
            }
        }
        true
    }
}

/// Candidates on the lattice `h Z^k` surviving the filter and, when
/// `l1_budget` is set, the exact constraint `||a||_1 <= l1_budget`.
fn lattice_candidates(
    filter: &CandidateFilter,
    h: f64,
    r: f64,
    l1_budget: Option<i64>,
) -> Result<Vec<Vec<f64>>> {
    let k = filter.k;
    let rho = filter.rho;
    let mut out = Vec::new();
    let mut sums = vec![0.0; 1usize << k];
    let mut p = vec![0.0; k];
    let ranges: Vec<(i64, i64)> = (0..k)
        .map(|i| {
            let lo = (filter.lo[i] - rho).max(-r - rho);
            let hi = (filter.hi[i] + rho).min(r + rho);
            ((lo / h).ceil() as i64, (hi / h).floor() as i64)
        })
        .collect();
    let l1_limit = r + rho * (k as f64).sqrt() + 1e-9;
    let slab = rho * (k as f64).sqrt() + 1e-9;
    #[allow(clippy::too_many_arguments)]
    fn rec(
        depth: usize,
        filter: &CandidateFilter,
        ranges: &[(i64, i64)],
        h: f64,
        budget: Option<i64>,
        l1: f64,
        l1_limit: f64,
        slab: f64,
        sums: &mut Vec<f64>,
        p: &mut Vec<f64>,
        out: &mut Vec<Vec<f64>>,
    ) -> Result<()> {
        let k = filter.k;
        if depth == k {
            let total: f64 = p.iter().sum();
            if (total - filter.fv).abs() <= slab {
                if out.len() >= MAX_CANDIDATES {
                    return Err(Error::Capability(format!(
                        "more than {MAX_CANDIDATES} cover candidates"
                    )));
                }
                out.push(p.clone());
            }
            return Ok(());
        }
        let (lo, hi) = ranges[depth];
        for a in lo..=hi {
            if let Some(b) = budget {
                if a.abs() > b {
                    continue;
                }
            }
            let v = a as f64 * h;
            let l1_next = l1 + v.abs();
            if l1_next > l1_limit {
                continue;
            }
            if !filter.partial_ok(sums, depth, v) {
                continue;
            }
            p[depth] = v;
            rec(
                depth + 1,
                filter,
                ranges,
                h,
                budget.map(|b| b - a.abs()),
                l1_next,
                l1_limit,
                slab,
                sums,
                p,
                out,
            )?;
        }
        Ok(())
    }
    rec(
        0, filter, &ranges, h, l1_budget, 0.0, l1_limit, slab, &mut sums, &mut p, &mut out,
    )?;
    Ok(out)
}

fn dedup_points(points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut out = Vec::new();
    for p in points {
        let key: Vec<i64> = p.iter().map(|a| (a * 1e9).round() as i64).collect();
        if seen.insert(key) {
            out.push(p);
        }
    }
    out
}

fn check_cover_support(oracle: &SubmodularOracle) -> Result<()> {
    let k = oracle.support().len();
    if k > MAX_COVER_SUPPORT {
        return Err(Error::Capability(format!(
            "base polytope covers limited to {MAX_COVER_SUPPORT} vertices, support has {k}"
        )));
    }
    Ok(())
}

/// `eps`-cover of `B(F) ∩ r B_1` in local coordinates.
pub fn cover_base_polytope_at_scale(oracle: &SubmodularOracle, r: f64, eps: f64) -> Result<CoverSet> {
    check_cover_support(oracle)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::input(format!("radius must be positive, got {r}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::input(format!("eps must be positive, got {eps}")));
    }
    let k = oracle.support().len();
    let delta = eps / 3.0;
    let rho = 2.0 * eps / 3.0;
    let filter = CandidateFilter::new(oracle, rho);

    // Two admissible (eps/3)-covers of r B_1: the Maurey lattice (r/K) Z^k
    // restricted to ||a||_1 <= K, and the cube lattice h Z^k with
    // h = 2 delta / sqrt(k). Use whichever is coarser.
    let rel = (delta / r).min(1.0);
    let kk = maurey_multiplicity(rel);
    let h_maurey = r / kk as f64;
    let h_cube = 2.0 * delta / (k as f64).sqrt();
    let candidates = if h_maurey >= h_cube {
        lattice_candidates(&filter, h_maurey, r, Some(kk as i64))?
    } else {
        lattice_candidates(&filter, h_cube, r, None)?
    };
    let n_candidates = candidates.len();

    let base = PolytopeHandle::new(oracle).with_radius(r)?;
    let _ = base.max_l1_norm();
    let wolfe = WolfeOptions {
        eps: delta,
        max_iterations: 10_000,
    };
    let projected: Vec<Option<Vec<f64>>> = candidates
        .into_par_iter()
        .map(|p| {
            let mut handle = base.clone();
            if membership(&handle, &p).map(|m| m.member).unwrap_or(false) {
                return Some(p);
            }
            handle = match handle.translated(p.clone()) {
                Ok(h) => h,
                Err(_) => return None,
            };
            match wolfe_min_norm(&handle, wolfe) {
                Ok(res) if res.norm_sq.sqrt() <= rho => Some(linalg::add(&p, &res.point)),
                Ok(_) => None,
                Err(Error::Infeasible(_)) => None,
                Err(e) => {
                    log::warn!("skipping cover candidate: {e}");
                    None
                }
            }
        })
        .collect();
    let accepted: Vec<Vec<f64>> = projected.into_iter().flatten().collect();
    let n_projected = accepted.len();
    Ok(CoverSet {
        dim: k,
        points: dedup_points(accepted),
        eps_abs: eps,
        provenance: CoverProvenance::Scale {
            radius: r,
            candidates: n_candidates,
            projected: n_projected,
        },
    })
}

/// Multiscale cover of `B(F)` for a non-negative submodular `F`.
///
/// Scales are `r_i = 2^i K` for `i = 0..=ceil(log2 k)` with `K = max_v F({v})`
/// and `k` the support size; scale `i` contributes an `(r_i eps / 2)`-cover of
/// `B(F) ∩ r_i B_1`. The reported radius is `eps` times the Hausdorff norm.
pub fn cover_base_polytope(oracle: &SubmodularOracle, eps: f64) -> Result<CoverSet> {
    check_cover_support(oracle)?;
    let k = oracle.support().len();
    let full = set::full(k);
    let values: Vec<f64> = (0..=full).map(|m| oracle.eval_local(m)).collect();
    if values.iter().all(|v| v.abs() <= 1e-15) {
        return Err(Error::input("function is identically zero"));
    }
    if values.iter().any(|&v| v < -1e-12) {
        return Err(Error::input("multiscale cover needs a non-negative function"));
    }
    let big_k = (0..k).map(|i| values[1 << i]).fold(0.0, f64::max);
    let levels = (k as f64).log2().ceil().max(0.0) as u32;
    let scales: Vec<f64> = (0..=levels).map(|i| big_k * f64::from(1u32 << i)).collect();
    let mut points = Vec::new();
    for &r in &scales {
        let c = cover_base_polytope_at_scale(oracle, r, r * eps / 2.0)?;
        points.extend(c.points);
    }
    let hn = super::hausdorff_norm(&PolytopeHandle::new(oracle));
    Ok(CoverSet {
        dim: k,
        points: dedup_points(points),
        eps_abs: eps * hn.value,
        provenance: CoverProvenance::Multiscale {
            scales,
            hausdorff: hn.value,
            hausdorff_exact: hn.exact,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_radius_cover_has_axis_points() {
        let c = l1_ball_cover(3, 1.0).unwrap();
        assert_eq!(c.len(), 7);
        assert_eq!(maurey_cover_size(3, 1), 7);
    }

    #[test]
    fn lattice_size_formula() {
        for n in 1..5 {
            for eps in [1.0, 0.7, 0.5] {
                let c = l1_ball_cover(n, eps).unwrap();
                assert_eq!(c.len() as u128, maurey_cover_size(n, maurey_multiplicity(eps)));
            }
        }
    }

    #[test]
    fn rejects_bad_eps() {
        assert!(l1_ball_cover(2, 0.0).is_err());
        assert!(l1_ball_cover(2, 1.5).is_err());
    }

    #[test]
    fn zero_function_scale_cover_is_origin() {
        let f = SubmodularOracle::table(vec![0, 1], vec![0.0; 4]).unwrap();
        let c = cover_base_polytope_at_scale(&f, 1.0, 0.5).unwrap();
        assert_eq!(c.points, vec![vec![0.0, 0.0]]);
        assert!(cover_base_polytope(&f, 0.5).is_err());
    }

    #[test]
    fn infeasible_scale_is_empty() {
        let f = SubmodularOracle::table(vec![0, 1], vec![0.0, 1.0, 1.0, 2.0]).unwrap();
        let c = cover_base_polytope_at_scale(&f, 1.0, 0.3).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn export_round_trip() {
        let c = l1_ball_cover(2, 0.8).unwrap();
        let mut buf = Vec::new();
        c.write_to(&mut buf).unwrap();
        let back = CoverSet::read_from(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.points, c.points);
        assert_eq!(back.dim, 2);
    }
}
