//! Submodular set functions and transformations built from them.
//!
//! A [`SubmodularOracle`] is a normalized set function `F: 2^V -> R` that only
//! depends on a small `support`. Internally it is evaluated on *local* masks:
//! bit `i` of a local mask refers to `support[i]`. A
//! [`SubmodularTransformation`] is an ordered list of oracles over a common
//! ground set, together with the vertex degrees `d(v) = #{e : v in supp(F_e)}`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::set::{self, Mask};

/// Absolute tolerance for submodularity and symmetry checks.
pub const SUBMODULAR_TOL: f64 = 1e-9;
/// Largest support accepted for explicit value tables.
pub const MAX_TABLE_SUPPORT: usize = 20;
/// Tables up to this support are checked for submodularity on construction.
pub const EAGER_CHECK_SUPPORT: usize = 12;
/// Largest support [`check_submodular`] will scan.
pub const MAX_CHECK_SUPPORT: usize = 16;

#[derive(Clone, Debug)]
pub enum Family {
    /// `1` iff exactly one endpoint is in the set.
    UndirectedCut,
    /// `1` iff the tail is in the set and the head is not. `tail` is a local index.
    DirectedCut { tail: usize },
    /// `1` iff the set splits the hyperedge.
    HypergraphCut,
    /// Explicit values indexed by local mask.
    Table(Arc<Vec<f64>>),
    /// Normalized mutual information `I(S; V\S) / H(V)`, precomputed by local mask.
    MutualInformation(Arc<Vec<f64>>),
    /// `min(|S|,k) + min(s-|S|,k) - k` where `s` is the support size.
    TruncatedCardinality { k: usize },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::UndirectedCut => "undirected_cut",
            Family::DirectedCut { .. } => "directed_cut",
            Family::HypergraphCut => "hypergraph_cut",
            Family::Table(_) => "table",
            Family::MutualInformation(_) => "mutual_information",
            Family::TruncatedCardinality { .. } => "truncated_cardinality",
        }
    }
}

/// A normalized submodular function with a small support.
#[derive(Clone, Debug)]
pub struct SubmodularOracle {
    support: Vec<usize>,
    family: Family,
    scale: f64,
    /// Unscaled `max_S |F(S)|`.
    inf_norm: f64,
}

impl SubmodularOracle {
    fn new(support: Vec<usize>, family: Family) -> Self {
        let mut oracle = SubmodularOracle {
            support,
            family,
            scale: 1.0,
            inf_norm: 0.0,
        };
        oracle.inf_norm = oracle.compute_inf_norm();
        oracle
    }

    fn compute_inf_norm(&self) -> f64 {
        match &self.family {
            Family::UndirectedCut | Family::DirectedCut { .. } | Family::HypergraphCut => 1.0,
            Family::TruncatedCardinality { k } => *k as f64,
            Family::Table(v) | Family::MutualInformation(v) => {
                v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
            }
        }
    }

    pub fn undirected_edge(u: usize, v: usize) -> Self {
        Self::new(vec![u.min(v), u.max(v)], Family::UndirectedCut)
    }

    pub fn directed_arc(tail: usize, head: usize) -> Self {
        let tail_local = if tail < head { 0 } else { 1 };
        Self::new(
            vec![tail.min(head), tail.max(head)],
            Family::DirectedCut { tail: tail_local },
        )
    }

    pub fn hyperedge(mut vertices: Vec<usize>) -> Self {
        vertices.sort_unstable();
        Self::new(vertices, Family::HypergraphCut)
    }

    /// Explicit table over `support`; `values[mask]` is the value on the local mask.
    ///
    /// Rejects `F(empty) != 0`; runs [`check_submodular`] when the support has at
    /// most [`EAGER_CHECK_SUPPORT`] vertices.
    pub fn table(support: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        validate_support(&support)?;
        let k = support.len();
        if k > MAX_TABLE_SUPPORT {
            return Err(Error::Capability(format!(
                "table support {k} exceeds {MAX_TABLE_SUPPORT}"
            )));
        }
        if values.len() != 1usize << k {
            return Err(Error::input(format!(
                "table over {k} vertices needs {} values, got {}",
                1usize << k,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::input(format!("non-finite table value at mask {i}")));
        }
        if values[0].abs() > 1e-12 {
            return Err(Error::input(format!(
                "F(empty) must be 0, got {}",
                values[0]
            )));
        }
        let (support, values) = sort_support(support, values);
        let oracle = Self::new(support, Family::Table(Arc::new(values)));
        if k <= EAGER_CHECK_SUPPORT {
            check_submodular(&oracle)?;
        }
        Ok(oracle)
    }

    /// Table from `(local mask, value)` entries; every subset must appear.
    pub fn table_from_entries(
        support: Vec<usize>,
        entries: impl IntoIterator<Item = (Mask, f64)>,
    ) -> Result<Self> {
        let k = support.len();
        if k > MAX_TABLE_SUPPORT {
            return Err(Error::Capability(format!(
                "table support {k} exceeds {MAX_TABLE_SUPPORT}"
            )));
        }
        let mut values = vec![f64::NAN; 1usize << k];
        for (mask, value) in entries {
            if mask >= values.len() as u64 {
                return Err(Error::input(format!(
                    "subset mask {mask} out of range for support of size {k}"
                )));
            }
            values[mask as usize] = value;
        }
        if let Some(missing) = values.iter().position(|x| x.is_nan()) {
            return Err(Error::input(format!("missing subset entry for mask {missing}")));
        }
        Self::table(support, values)
    }

    /// `min(|S|,k) + min(n-|S|,k) - k` on the given support.
    pub fn truncated_cardinality(support: Vec<usize>, k: usize) -> Result<Self> {
        validate_support(&support)?;
        let n = support.len();
        if k == 0 || 2 * k > n {
            return Err(Error::input(format!("need 1 <= k <= n/2, got k={k}, n={n}")));
        }
        let mut support = support;
        support.sort_unstable();
        Ok(Self::new(support, Family::TruncatedCardinality { k }))
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Copy with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale *= factor;
        out
    }

    /// Mask of the support in global coordinates.
    pub fn support_mask(&self) -> Mask {
        set::from_indices(&self.support)
    }

    /// `max_S |F(S)|`.
    pub fn infinity_norm(&self) -> f64 {
        self.inf_norm * self.scale.abs()
    }

    /// Restrict a global mask to the support, producing a local mask.
    #[inline]
    pub fn localize(&self, mask: Mask) -> Mask {
        let mut local = 0;
        for (i, &v) in self.support.iter().enumerate() {
            local |= (mask >> v & 1) << i;
        }
        local
    }

    /// Evaluate on a global mask.
    #[inline]
    pub fn eval(&self, mask: Mask) -> f64 {
        self.eval_local(self.localize(mask))
    }

    /// Evaluate on a local mask over the support.
    #[inline]
    pub fn eval_local(&self, local: Mask) -> f64 {
        let k = self.support.len();
        let raw = match &self.family {
            Family::UndirectedCut | Family::HypergraphCut => {
                let full = set::full(k);
                if local != 0 && local != full {
                    1.0
                } else {
                    0.0
                }
            }
            Family::DirectedCut { tail } => {
                if local == 1 << tail {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Table(v) | Family::MutualInformation(v) => v[local as usize],
            Family::TruncatedCardinality { k: kk } => {
                let c = local.count_ones() as usize;
                (c.min(*kk) + (k - c).min(*kk)) as f64 - *kk as f64
            }
        };
        raw * self.scale
    }

    /// `F(S) = F(V\S)` for every `S` (within [`SUBMODULAR_TOL`]).
    pub fn is_symmetric(&self) -> bool {
        match &self.family {
            Family::UndirectedCut
            | Family::HypergraphCut
            | Family::MutualInformation(_)
            | Family::TruncatedCardinality { .. } => true,
            Family::DirectedCut { .. } => false,
            Family::Table(v) => {
                let full = v.len() - 1;
                (0..v.len()).all(|m| (v[m] - v[full ^ m]).abs() <= SUBMODULAR_TOL)
            }
        }
    }

    /// Value on the whole support.
    pub fn value_on_support(&self) -> f64 {
        self.eval_local(set::full(self.support.len()))
    }
}

fn validate_support(support: &[usize]) -> Result<()> {
    if support.is_empty() {
        return Err(Error::input("support must be non-empty"));
    }
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::input("support has repeated vertices"));
    }
    Ok(())
}

/// Reorder a table so that its support is ascending.
fn sort_support(support: Vec<usize>, values: Vec<f64>) -> (Vec<usize>, Vec<f64>) {
    let k = support.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| support[i]);
    if order.iter().enumerate().all(|(i, &j)| i == j) {
        return (support, values);
    }
    let sorted: Vec<usize> = order.iter().map(|&i| support[i]).collect();
    let mut out = vec![0.0; values.len()];
    for (new_mask, slot) in out.iter_mut().enumerate() {
        let mut old_mask = 0usize;
        for (new_bit, &old_bit) in order.iter().enumerate() {
            if new_mask >> new_bit & 1 == 1 {
                old_mask |= 1 << old_bit;
            }
        }
        *slot = values[old_mask];
    }
    (sorted, out)
}

/// Verify submodularity through the local exchange condition
/// `F(S+u) + F(S+v) >= F(S+u+v) + F(S)` for all `S` and `u, v` outside `S`.
///
/// The violation is reported as the pair `(S+u, S+v)` in global indices.
pub fn check_submodular(oracle: &SubmodularOracle) -> Result<()> {
    let k = oracle.support().len();
    if k > MAX_CHECK_SUPPORT {
        return Err(Error::Capability(format!(
            "submodularity check limited to {MAX_CHECK_SUPPORT} vertices, support has {k}"
        )));
    }
    let full = set::full(k);
    let mut worst: Option<(f64, Mask, Mask)> = None;
    for s in 0..=full {
        let fs = oracle.eval_local(s);
        let outside = full & !s;
        for u in set::to_indices(outside) {
            let su = s | 1 << u;
            let fsu = oracle.eval_local(su);
            for v in set::to_indices(outside & !((2u64 << u) - 1)) {
                let sv = s | 1 << v;
                let gap = fsu + oracle.eval_local(sv) - oracle.eval_local(su | sv) - fs;
                if gap < -SUBMODULAR_TOL && worst.is_none_or(|(g, _, _)| gap < g) {
                    worst = Some((gap, su, sv));
                }
            }
        }
    }
    match worst {
        None => Ok(()),
        Some((gap, a, b)) => {
            let global = |m: Mask| -> Vec<usize> {
                set::to_indices(m)
                    .into_iter()
                    .map(|i| oracle.support()[i])
                    .collect()
            };
            Err(Error::NotSubmodular {
                s: global(a),
                t: global(b),
                gap: -gap,
            })
        }
    }
}

/// A finite joint distribution over `n` discrete variables.
#[derive(Clone, Debug)]
pub struct JointDistribution {
    alphabet: Vec<usize>,
    outcomes: Vec<(Vec<usize>, f64)>,
}

impl JointDistribution {
    /// Probabilities must be non-negative and sum to one within `1e-12`.
    pub fn new(alphabet: Vec<usize>, outcomes: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        let n = alphabet.len();
        if n == 0 {
            return Err(Error::input("joint distribution needs at least one variable"));
        }
        if n > MAX_TABLE_SUPPORT {
            return Err(Error::Capability(format!(
                "joint distribution limited to {MAX_TABLE_SUPPORT} variables"
            )));
        }
        let mut total = 0.0;
        for (symbols, p) in &outcomes {
            if symbols.len() != n {
                return Err(Error::input(format!(
                    "outcome has {} symbols, expected {n}",
                    symbols.len()
                )));
            }
            for (i, (&s, &a)) in symbols.iter().zip(&alphabet).enumerate() {
                if s >= a {
                    return Err(Error::input(format!(
                        "symbol {s} of variable {} outside alphabet of size {a}",
                        i + 1
                    )));
                }
            }
            if !(p.is_finite() && *p >= 0.0) {
                return Err(Error::input(format!("invalid probability {p}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::input(format!("probabilities sum to {total}, not 1")));
        }
        Ok(JointDistribution { alphabet, outcomes })
    }

    pub fn num_variables(&self) -> usize {
        self.alphabet.len()
    }

    pub fn alphabet(&self) -> &[usize] {
        &self.alphabet
    }

    pub fn outcomes(&self) -> &[(Vec<usize>, f64)] {
        &self.outcomes
    }

    /// Joint entropy of the variables in `mask`, in bits.
    pub fn entropy(&self, mask: Mask) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        let idx = set::to_indices(mask);
        let mut marginal: HashMap<Vec<usize>, f64> = HashMap::new();
        for (symbols, p) in &self.outcomes {
            let key: Vec<usize> = idx.iter().map(|&i| symbols[i]).collect();
            *marginal.entry(key).or_insert(0.0) += p;
        }
        let mut probs: Vec<f64> = marginal.into_values().filter(|&p| p > 0.0).collect();
        // Fixed summation order keeps results reproducible across runs.
        probs.sort_by(f64::total_cmp);
        -probs.iter().map(|p| p * p.log2()).sum::<f64>()
    }
}

/// An ordered list of submodular oracles over a common ground set.
#[derive(Clone, Debug)]
pub struct SubmodularTransformation {
    n: usize,
    functions: Vec<SubmodularOracle>,
    degrees: Vec<usize>,
    symmetric: Arc<OnceLock<bool>>,
}

impl SubmodularTransformation {
    pub fn new(n: usize, functions: Vec<SubmodularOracle>) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("ground set must be non-empty"));
        }
        if n > set::MAX_VERTICES {
            return Err(Error::Capability(format!(
                "ground set limited to {} vertices",
                set::MAX_VERTICES
            )));
        }
        let mut degrees = vec![0; n];
        for (e, f) in functions.iter().enumerate() {
            for &v in f.support() {
                if v >= n {
                    return Err(Error::input(format!(
                        "function {} uses vertex {} outside ground set of size {n}",
                        e + 1,
                        v + 1
                    )));
                }
                degrees[v] += 1;
            }
        }
        Ok(SubmodularTransformation {
            n,
            functions,
            degrees,
            symmetric: Arc::new(OnceLock::new()),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.functions.len()
    }

    pub fn functions(&self) -> &[SubmodularOracle] {
        &self.functions
    }

    pub fn function(&self, e: usize) -> &SubmodularOracle {
        &self.functions[e]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    /// `F(S) = (F_e(S))_e`.
    pub fn evaluate(&self, mask: Mask) -> Vec<f64> {
        self.functions.iter().map(|f| f.eval(mask)).collect()
    }

    /// `cut_F(S) = sum_e F_e(S)`.
    pub fn cut(&self, mask: Mask) -> f64 {
        self.functions.iter().map(|f| f.eval(mask)).sum()
    }

    /// `vol(S) = sum_{v in S} d(v)`.
    pub fn volume(&self, mask: Mask) -> f64 {
        set::to_indices(mask)
            .iter()
            .map(|&v| self.degrees[v] as f64)
            .sum()
    }

    pub fn total_volume(&self) -> f64 {
        self.degrees.iter().sum::<usize>() as f64
    }

    pub fn all_mask(&self) -> Mask {
        set::full(self.n)
    }

    /// `cut_F(S) = cut_F(V\S)` for every `S`.
    ///
    /// True when every function is symmetric; otherwise decided by a scan of
    /// all subsets for ground sets of at most 20 vertices, and reported as
    /// `false` beyond that.
    pub fn is_symmetric(&self) -> bool {
        *self.symmetric.get_or_init(|| {
            if self.all_functions_symmetric() {
                return true;
            }
            if self.n > 20 {
                return false;
            }
            let full = self.all_mask();
            (0..=full).all(|s| {
                let a = self.cut(s);
                let b = self.cut(full ^ s);
                (a - b).abs() <= SUBMODULAR_TOL * (1.0 + a.abs())
            })
        })
    }

    /// Every individual function satisfies `F_e(S) = F_e(V\S)`.
    pub fn all_functions_symmetric(&self) -> bool {
        self.functions.iter().all(|f| f.is_symmetric())
    }

    /// `F_e(V) = 0` for every `e`.
    pub fn vanishes_on_ground_set(&self) -> bool {
        self.functions
            .iter()
            .all(|f| f.value_on_support().abs() <= 1e-12)
    }

    /// `max_e ||F_e||_inf`.
    pub fn max_infinity_norm(&self) -> f64 {
        self.functions
            .iter()
            .fold(0.0, |a, f| a.max(f.infinity_norm()))
    }

    /// Smallest and largest value taken by any function on any subset.
    pub fn value_range(&self) -> (f64, f64) {
        let mut lo = 0.0f64;
        let mut hi = 0.0f64;
        for f in &self.functions {
            for local in 0..=set::full(f.support().len()) {
                let x = f.eval_local(local);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        (lo, hi)
    }

    /// Copy with every function multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        SubmodularTransformation {
            n: self.n,
            functions: self.functions.iter().map(|f| f.scaled(factor)).collect(),
            degrees: self.degrees.clone(),
            symmetric: Arc::new(OnceLock::new()),
        }
    }
}

/// Undirected graph cut transformation; edges are zero-based pairs.
pub fn build_undirected_cut(n: usize, edges: &[(usize, usize)]) -> Result<SubmodularTransformation> {
    let mut fs = Vec::with_capacity(edges.len());
    for &(u, v) in edges {
        if u == v {
            return Err(Error::input(format!("self-loop at vertex {}", u + 1)));
        }
        fs.push(SubmodularOracle::undirected_edge(u, v));
    }
    SubmodularTransformation::new(n, fs)
}

/// Directed graph cut transformation; arcs are zero-based `(tail, head)` pairs.
pub fn build_directed_cut(n: usize, arcs: &[(usize, usize)]) -> Result<SubmodularTransformation> {
    let mut fs = Vec::with_capacity(arcs.len());
    for &(u, v) in arcs {
        if u == v {
            return Err(Error::input(format!("self-loop at vertex {}", u + 1)));
        }
        fs.push(SubmodularOracle::directed_arc(u, v));
    }
    SubmodularTransformation::new(n, fs)
}

/// Hypergraph cut transformation; every hyperedge needs at least two distinct vertices.
pub fn build_hypergraph_cut(n: usize, edges: &[Vec<usize>]) -> Result<SubmodularTransformation> {
    let mut fs = Vec::with_capacity(edges.len());
    for (i, e) in edges.iter().enumerate() {
        if e.len() < 2 {
            return Err(Error::input(format!(
                "hyperedge {} has fewer than two vertices",
                i + 1
            )));
        }
        validate_support(e).map_err(|_| {
            Error::input(format!("hyperedge {} repeats a vertex", i + 1))
        })?;
        fs.push(SubmodularOracle::hyperedge(e.clone()));
    }
    SubmodularTransformation::new(n, fs)
}

/// Single-function transformation `F(S) = I(X_S; X_{V\S}) / H(X_V)`.
pub fn build_mutual_information(dist: &JointDistribution) -> Result<SubmodularTransformation> {
    let n = dist.num_variables();
    let full = set::full(n);
    let entropies: Vec<f64> = (0..=full).map(|m| dist.entropy(m)).collect();
    let h = entropies[full as usize];
    if h <= 1e-15 {
        return Err(Error::input("joint entropy is zero; mutual information is undefined"));
    }
    let values: Vec<f64> = (0..=full)
        .map(|m| {
            if m == 0 || m == full {
                0.0
            } else {
                ((entropies[m as usize] + entropies[(full ^ m) as usize] - h) / h).max(0.0)
            }
        })
        .collect();
    let oracle = SubmodularOracle::new(
        (0..n).collect(),
        Family::MutualInformation(Arc::new(values)),
    );
    SubmodularTransformation::new(n, vec![oracle])
}

/// Single-function transformation `G_k(S) = min(|S|,k) + min(n-|S|,k) - k`.
pub fn build_truncated_cardinality(n: usize, k: usize) -> Result<SubmodularTransformation> {
    let oracle = SubmodularOracle::truncated_cardinality((0..n).collect(), k)?;
    SubmodularTransformation::new(n, vec![oracle])
}

/// A transformation rescaled into `[0, 1/100]`, with the factor applied.
#[derive(Clone, Debug)]
pub struct ScaledTransformation {
    pub transformation: SubmodularTransformation,
    pub factor: f64,
}

impl ScaledTransformation {
    /// Eigenvalue of the original transformation from one of the scaled one.
    pub fn unscale_eigenvalue(&self, lambda: f64) -> f64 {
        lambda / (self.factor * self.factor)
    }

    /// Conductance of the original transformation from one of the scaled one.
    pub fn unscale_conductance(&self, phi: f64) -> f64 {
        phi / self.factor
    }
}

/// Divide every function by `100 * max_e ||F_e||_inf`.
pub fn scale_for_general_sdp(t: &SubmodularTransformation) -> ScaledTransformation {
    let norm = t.max_infinity_norm();
    let factor = if norm > 0.0 { 1.0 / (100.0 * norm) } else { 1.0 };
    ScaledTransformation {
        transformation: t.scaled(factor),
        factor,
    }
}
