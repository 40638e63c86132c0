//! Dense two-phase simplex with Bland's pivoting rule.
//!
//! Meant for the small programs that arise when optimizing over a base
//! polytope intersected with an l1 ball: a few dozen columns and rows.
//! All variables are non-negative.

const PIVOT_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Constraint {
            coeffs,
            relation,
            rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// Reduced-cost row; the last entry holds minus the objective value.
    obj: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for a in self.rows[r].iter_mut() {
            *a /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (a, b) in row.iter_mut().zip(&pivot_row) {
                        *a -= f * b;
                    }
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (a, b) in self.obj.iter_mut().zip(&pivot_row) {
                *a -= f * b;
            }
        }
        self.basis[r] = c;
    }

    /// Run simplex iterations on columns `< allowed`. Returns false if unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            // Bland: smallest index with negative reduced cost enters.
            let Some(c) = (0..allowed).find(|&j| self.obj[j] < -PIVOT_TOL) else {
                return true;
            };
            let rhs = self.width;
            let mut best: Option<(f64, usize, usize)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c] > PIVOT_TOL {
                    let ratio = row[rhs] / row[c];
                    let better = match best {
                        None => true,
                        Some((b, _, basis)) => {
                            ratio < b - 1e-14 || (ratio <= b + 1e-14 && self.basis[i] < basis)
                        }
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                None => return false,
                Some((_, r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// Maximize `c^T x` subject to the constraints and `x >= 0`.
pub fn maximize(c: &[f64], constraints: &[Constraint]) -> LpOutcome {
    let n = c.len();
    let m = constraints.len();
    let n_slack = constraints
        .iter()
        .filter(|k| k.relation != Relation::Eq)
        .count();
    // Normalize every row to a non-negative right-hand side.
    let rows_in: Vec<(Vec<f64>, Relation, f64)> = constraints
        .iter()
        .map(|k| {
            debug_assert_eq!(k.coeffs.len(), n);
            if k.rhs < 0.0 {
                let flipped = match k.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (k.coeffs.iter().map(|a| -a).collect(), flipped, -k.rhs)
            } else {
                (k.coeffs.clone(), k.relation, k.rhs)
            }
        })
        .collect();
    let n_art = rows_in
        .iter()
        .filter(|(_, r, _)| *r != Relation::Le)
        .count();
    let width = n + n_slack + n_art;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut slack = n;
    let mut art = n + n_slack;
    for (coeffs, rel, rhs) in &rows_in {
        let mut row = vec![0.0; width + 1];
        row[..n].copy_from_slice(coeffs);
        row[width] = *rhs;
        match rel {
            Relation::Le => {
                row[slack] = 1.0;
                basis.push(slack);
                slack += 1;
            }
            Relation::Ge => {
                row[slack] = -1.0;
                slack += 1;
                row[art] = 1.0;
                basis.push(art);
                art += 1;
            }
            Relation::Eq => {
                row[art] = 1.0;
                basis.push(art);
                art += 1;
            }
        }
        rows.push(row);
    }
    let art_start = n + n_slack;
    let mut t = Tableau {
        rows,
        obj: vec![0.0; width + 1],
        basis,
        width,
    };

    if n_art > 0 {
        // Phase I: maximize -(sum of artificials).
        for j in art_start..width {
            t.obj[j] = 1.0;
        }
        for i in 0..m {
            if t.basis[i] >= art_start {
                let row = t.rows[i].clone();
                for (a, b) in t.obj.iter_mut().zip(&row) {
                    *a -= b;
                }
            }
        }
        t.optimize(width);
        if -t.obj[width] > FEAS_TOL {
            return LpOutcome::Infeasible;
        }
        // Drive artificials out of the basis; drop rows that are redundant.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art_start {
                match (0..art_start).find(|&j| t.rows[i][j].abs() > PIVOT_TOL) {
                    Some(j) => {
                        t.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    // Phase II.
    t.obj = vec![0.0; width + 1];
    for j in 0..n {
        t.obj[j] = -c[j];
    }
    for i in 0..t.rows.len() {
        let b = t.basis[i];
        let f = t.obj[b];
        if f != 0.0 {
            let row = t.rows[i].clone();
            for (a, r) in t.obj.iter_mut().zip(&row) {
                *a -= f * r;
            }
        }
    }
    if !t.optimize(art_start) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rows[i][width];
        }
    }
    let value = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    LpOutcome::Optimal { x, value }
}
