//! Random instance generators and dense reference computations shared by the test targets.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sublap::oracle::{
    build_directed_cut, build_hypergraph_cut, build_mutual_information,
    build_truncated_cardinality, build_undirected_cut, JointDistribution, SubmodularOracle,
    SubmodularTransformation,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Graph,
    Digraph,
    Hypergraph,
    Table,
    MutualInformation,
    Truncated,
}

pub const ALL_FAMILIES: [Family; 6] = [
    Family::Graph,
    Family::Digraph,
    Family::Hypergraph,
    Family::Table,
    Family::MutualInformation,
    Family::Truncated,
];

/// Random spanning tree edges on `0..n`.
fn tree_edges(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    (1..n)
        .map(|i| (order[rng.random_range(0..i)], order[i]))
        .collect()
}

fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let u = rng.random_range(0..n);
    let mut v = rng.random_range(0..n - 1);
    if v >= u {
        v += 1;
    }
    (u, v)
}

/// Connected multigraph with `n` vertices and `m >= n-1` edges.
pub fn connected_graph(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<(usize, usize)> {
    let mut edges = tree_edges(rng, n);
    while edges.len() < m {
        edges.push(random_pair(rng, n));
    }
    edges
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, m: usize) -> SubmodularTransformation {
    build_undirected_cut(n, &connected_graph(rng, n, m.max(n - 1))).unwrap()
}

pub fn random_digraph(rng: &mut ChaCha8Rng, n: usize, m: usize) -> SubmodularTransformation {
    let arcs: Vec<(usize, usize)> = connected_graph(rng, n, m.max(n - 1))
        .into_iter()
        .map(|(u, v)| if rng.random_bool(0.5) { (u, v) } else { (v, u) })
        .collect();
    build_directed_cut(n, &arcs).unwrap()
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize, lo: usize, hi: usize) -> Vec<usize> {
    let k = rng.random_range(lo..=hi.min(n));
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    all.truncate(k);
    all.sort_unstable();
    all
}

/// Hyperedges of size 2..=4 covering every vertex.
pub fn random_hyperedges(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut edges: Vec<Vec<usize>> = tree_edges(rng, n)
        .into_iter()
        .map(|(u, v)| {
            let mut e = vec![u, v];
            e.sort_unstable();
            e
        })
        .collect();
    // Merge tree edges into larger hyperedges until at most m remain.
    while edges.len() > m.max(1) {
        let b = edges.pop().unwrap();
        let i = rng.random_range(0..edges.len());
        edges[i].extend(b);
        edges[i].sort_unstable();
        edges[i].dedup();
    }
    while edges.len() < m {
        edges.push(random_subset(rng, n, 2, 4));
    }
    edges
}

pub fn random_hypergraph(rng: &mut ChaCha8Rng, n: usize, m: usize) -> SubmodularTransformation {
    build_hypergraph_cut(n, &random_hyperedges(rng, n, m)).unwrap()
}

/// Non-negative combination of arc and hyperedge cuts on `support`, scaled to max 1.
pub fn random_table_oracle(rng: &mut ChaCha8Rng, support: Vec<usize>) -> SubmodularOracle {
    let k = support.len();
    let terms = rng.random_range(1..=4);
    let mut values = vec![0.0; 1 << k];
    for _ in 0..terms {
        let weight: f64 = rng.random_range(0.1..1.0);
        let members = random_subset(rng, k, 2, k);
        let directed = rng.random_bool(0.5);
        let (tail, head) = (members[0], members[1]);
        for (mask, val) in values.iter_mut().enumerate() {
            let inside = |v: usize| mask >> v & 1 == 1;
            let hit = if directed {
                inside(tail) && !inside(head)
            } else {
                let c = members.iter().filter(|&&v| inside(v)).count();
                c > 0 && c < members.len()
            };
            if hit {
                *val += weight;
            }
        }
    }
    let top = values.iter().copied().fold(0.0, f64::max);
    if top > 0.0 {
        for v in &mut values {
            *v /= top;
        }
    }
    SubmodularOracle::table(support, values).unwrap()
}

pub fn random_table(rng: &mut ChaCha8Rng, n: usize, m: usize) -> SubmodularTransformation {
    let mut fs = Vec::new();
    for (u, v) in tree_edges(rng, n) {
        if fs.len() >= m.max(1) {
            break;
        }
        let mut s = vec![u, v];
        for w in random_subset(rng, n, 0, 3) {
            if !s.contains(&w) {
                s.push(w);
            }
        }
        fs.push(random_table_oracle(rng, s));
    }
    let covered = |fs: &[SubmodularOracle]| {
        (0..n).all(|v| fs.iter().any(|f| f.support().contains(&v)))
    };
    while fs.len() < m || !covered(&fs) {
        let s = random_subset(rng, n, 2, 5);
        fs.push(random_table_oracle(rng, s));
    }
    SubmodularTransformation::new(n, fs).unwrap()
}

pub fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> JointDistribution {
    let alphabet: Vec<usize> = (0..n).map(|_| rng.random_range(2..=3)).collect();
    let total: usize = alphabet.iter().product();
    let mut weights: Vec<f64> = (0..total).map(|_| rng.random_range(0.0..1.0)).collect();
    // Sparsify to create dependence.
    for w in &mut weights {
        if rng.random_bool(0.4) {
            *w = 0.0;
        }
    }
    weights[0] += 0.5;
    let s: f64 = weights.iter().sum();
    let mut outcomes = Vec::new();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        let mut rest = i;
        let symbols: Vec<usize> = alphabet
            .iter()
            .map(|&a| {
                let s = rest % a;
                rest /= a;
                s
            })
            .collect();
        let p = if i + 1 == total { 1.0 - acc } else { w / s };
        acc += p;
        outcomes.push((symbols, p.max(0.0)));
    }
    JointDistribution::new(alphabet, outcomes).unwrap()
}

pub fn random_mutual_information(rng: &mut ChaCha8Rng, n: usize) -> SubmodularTransformation {
    loop {
        let d = random_distribution(rng, n);
        if let Ok(t) = build_mutual_information(&d) {
            return t;
        }
    }
}

/// A random instance with `n` vertices from `family`; `m` bounds the number of functions.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    family: Family,
    n: usize,
    m: usize,
) -> SubmodularTransformation {
    match family {
        Family::Graph => random_graph(rng, n, m),
        Family::Digraph => random_digraph(rng, n, m),
        Family::Hypergraph => random_hypergraph(rng, n, m),
        Family::Table => random_table(rng, n, m),
        Family::MutualInformation => random_mutual_information(rng, n.min(5)),
        Family::Truncated => {
            // Divided by k so that values lie in [0, 1].
            let n = n.max(2);
            let k = rng.random_range(1..=n / 2);
            build_truncated_cardinality(n, k).unwrap().scaled(1.0 / k as f64)
        }
    }
}

/// Dense normalized Laplacian `I - D^{-1/2} A D^{-1/2}` of a multigraph.
pub fn dense_normalized_laplacian(n: usize, edges: &[(usize, usize)]) -> DMatrix<f64> {
    let mut deg = vec![0.0f64; n];
    let mut a = DMatrix::<f64>::zeros(n, n);
    for &(u, v) in edges {
        deg[u] += 1.0;
        deg[v] += 1.0;
        a[(u, v)] += 1.0;
        a[(v, u)] += 1.0;
    }
    let mut l = DMatrix::identity(n, n);
    for u in 0..n {
        for v in 0..n {
            l[(u, v)] -= a[(u, v)] / (deg[u] * deg[v]).sqrt();
        }
    }
    l
}

/// Sorted eigenvalues of a symmetric matrix.
pub fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Random unit vector orthogonal to `D^{1/2} 1`.
pub fn random_feasible(rng: &mut ChaCha8Rng, degrees: &[usize]) -> Vec<f64> {
    let sd: Vec<f64> = degrees.iter().map(|&d| (d as f64).sqrt()).collect();
    let nsd = sd.iter().map(|a| a * a).sum::<f64>().sqrt();
    loop {
        let mut x: Vec<f64> = (0..degrees.len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let c: f64 = x.iter().zip(&sd).map(|(a, b)| a * b).sum::<f64>() / nsd;
        for (xi, s) in x.iter_mut().zip(&sd) {
            *xi -= c * s / nsd;
        }
        let nx = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nx > 1e-6 {
            return x.iter().map(|a| a / nx).collect();
        }
    }
}
