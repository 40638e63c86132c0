//! Line-oriented text dumps of instances and solutions.
//!
//! Instance:
//!
//! ```text
//! sdp-instance 1
//! kind symmetric|general
//! source vertices | source cover <eps>
//! n <n> rank <N> m <m>
//! degrees <d_1> ... <d_n>
//! function <e> support <k> <v_1> ... <v_k> points <p>
//! <w_1> ... <w_k>            (p lines)
//! ...
//! end
//! ```
//!
//! Vertices and functions are 1-based. The solution dump lists the vectors,
//! one `constraint <e> <j> <a_w> <slack>` line per cover point (`j` 1-based)
//! and the residuals.

use std::io::Write;

use super::{FunctionPoints, PointSource, SdpInstance, SdpKind, SdpSolution};
use crate::error::{Error, Result};
use crate::linalg;

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ")
}

pub fn write_instance(inst: &SdpInstance, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "sdp-instance 1")?;
    writeln!(
        out,
        "kind {}",
        match inst.kind {
            SdpKind::Symmetric => "symmetric",
            SdpKind::General => "general",
        }
    )?;
    match inst.source {
        PointSource::Vertices => writeln!(out, "source vertices")?,
        PointSource::Cover { eps } => writeln!(out, "source cover {eps:e}")?,
    }
    writeln!(out, "n {} rank {} m {}", inst.n, inst.rank, inst.m())?;
    writeln!(out, "degrees {}", join(&inst.degrees))?;
    for (e, f) in inst.functions.iter().enumerate() {
        let support: Vec<String> = f.support.iter().map(|v| (v + 1).to_string()).collect();
        writeln!(
            out,
            "function {} support {} {} points {}",
            e + 1,
            f.support.len(),
            support.join(" "),
            f.points.len()
        )?;
        for w in &f.points {
            writeln!(out, "{}", join(w))?;
        }
    }
    writeln!(out, "end")
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<Vec<&'a str>> {
        for (i, l) in self.inner.by_ref() {
            let l = l.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            self.line = i + 1;
            return Ok(l.split_whitespace().collect());
        }
        Err(self.err("unexpected end of input"))
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: "<sdp instance>".into(),
            line: self.line,
            message: message.into(),
        }
    }

    fn expect(&self, tok: Option<&&str>, want: &str) -> Result<()> {
        match tok {
            Some(t) if *t == want => Ok(()),
            _ => Err(self.err(format!("expected '{want}'"))),
        }
    }

    fn num<T: std::str::FromStr>(&self, tok: Option<&&str>) -> Result<T> {
        tok.and_then(|t| t.parse().ok())
            .ok_or_else(|| self.err("expected a number"))
    }
}

pub fn read_instance(text: &str) -> Result<SdpInstance> {
    let mut it = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let head = it.next()?;
    if head != ["sdp-instance", "1"] {
        return Err(it.err("missing 'sdp-instance 1' header"));
    }
    let kind = match it.next()?.as_slice() {
        ["kind", "symmetric"] => SdpKind::Symmetric,
        ["kind", "general"] => SdpKind::General,
        _ => return Err(it.err("expected 'kind symmetric|general'")),
    };
    let toks = it.next()?;
    let source = match toks.as_slice() {
        ["source", "vertices"] => PointSource::Vertices,
        ["source", "cover", eps] => PointSource::Cover {
            eps: it.num(Some(eps))?,
        },
        _ => return Err(it.err("expected 'source vertices' or 'source cover <eps>'")),
    };
    let toks = it.next()?;
    it.expect(toks.first(), "n")?;
    it.expect(toks.get(2), "rank")?;
    it.expect(toks.get(4), "m")?;
    let n: usize = it.num(toks.get(1))?;
    let rank: usize = it.num(toks.get(3))?;
    let m: usize = it.num(toks.get(5))?;
    let toks = it.next()?;
    it.expect(toks.first(), "degrees")?;
    if toks.len() != n + 1 {
        return Err(it.err(format!("expected {n} degrees")));
    }
    let degrees = toks[1..]
        .iter()
        .map(|t| it.num(Some(t)))
        .collect::<Result<Vec<f64>>>()?;
    let mut functions = Vec::with_capacity(m);
    for e in 0..m {
        let toks = it.next()?;
        it.expect(toks.first(), "function")?;
        let idx: usize = it.num(toks.get(1))?;
        if idx != e + 1 {
            return Err(it.err(format!("expected function {}", e + 1)));
        }
        it.expect(toks.get(2), "support")?;
        let k: usize = it.num(toks.get(3))?;
        let support = (0..k)
            .map(|i| {
                let v: usize = it.num(toks.get(4 + i))?;
                if v == 0 || v > n {
                    return Err(it.err(format!("vertex {v} out of range")));
                }
                Ok(v - 1)
            })
            .collect::<Result<Vec<_>>>()?;
        it.expect(toks.get(4 + k), "points")?;
        let p: usize = it.num(toks.get(5 + k))?;
        let mut points = Vec::with_capacity(p);
        for _ in 0..p {
            let toks = it.next()?;
            if toks.len() != k {
                return Err(it.err(format!("expected {k} coordinates")));
            }
            points.push(
                toks.iter()
                    .map(|t| it.num(Some(t)))
                    .collect::<Result<Vec<f64>>>()?,
            );
        }
        functions.push(FunctionPoints { support, points });
    }
    if it.next()? != ["end"] {
        return Err(it.err("expected 'end'"));
    }
    let inst = SdpInstance {
        kind,
        n,
        rank,
        degrees,
        functions,
        source,
    };
    inst.validate()?;
    Ok(inst)
}

pub fn write_solution(
    inst: &SdpInstance,
    sol: &SdpSolution,
    out: &mut impl Write,
) -> std::io::Result<()> {
    writeln!(out, "sdp-solution 1")?;
    writeln!(out, "n {} rank {} m {}", sol.n, sol.rank, inst.m())?;
    writeln!(out, "objective {:e}", sol.objective)?;
    writeln!(
        out,
        "converged {} iterations {} outer {} seed {}",
        sol.converged, sol.iterations, sol.outer_iterations, sol.seed
    )?;
    writeln!(out, "slacks {}", join(&sol.slacks))?;
    for (v, x) in sol.vectors.iter().enumerate() {
        writeln!(out, "vector {} {}", v + 1, join(x))?;
    }
    let aux = (sol.kind == SdpKind::General).then(|| sol.aux_vectors(inst));
    for (e, f) in inst.functions.iter().enumerate() {
        for (j, w) in f.points.iter().enumerate() {
            let p = sol.image(inst, e, w);
            let a = match &aux {
                Some(aux) => linalg::norm_sq(&p) + linalg::dot(&p, &aux[e][j]),
                None => linalg::norm_sq(&p),
            };
            writeln!(out, "constraint {} {} {:e} {:e}", e + 1, j + 1, a, sol.slacks[e])?;
            if let Some(aux) = &aux {
                writeln!(out, "aux {} {} {}", e + 1, j + 1, join(&aux[e][j]))?;
            }
        }
    }
    let r = &sol.residuals;
    writeln!(
        out,
        "residuals degree_norm {:e} degree_mean {:e} constraint {:e} aux_norm {:e} aux_cap {:e}",
        r.degree_norm, r.degree_mean, r.constraint, r.aux_norm, r.aux_cap
    )?;
    writeln!(out, "end")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::build_hypergraph_cut;
    use crate::sdp::{build_symmetric, PointSource};

    #[test]
    fn instance_round_trip() {
        let t = build_hypergraph_cut(4, &[vec![0, 1, 2], vec![2, 3]]).unwrap();
        let inst = build_symmetric(&t, PointSource::Vertices).unwrap();
        let mut buf = Vec::new();
        write_instance(&inst, &mut buf).unwrap();
        let back = read_instance(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn truncated_instance_is_a_parse_error() {
        let err = read_instance("sdp-instance 1\nkind general\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }
}
