//! Instance file formats.
//!
//! * `graph` / `digraph`: header `n m`, then `m` lines `u v` (1-based; in a
//!   digraph the line means the arc `u -> v`).
//! * `hypergraph`: header `n m`, then `m` lines `k v_1 ... v_k`.
//! * `smf-json`: `{"n": n, "functions": [{"support": [...], "values": {"<mask>": value}}]}`
//!   with 1-based support vertices and decimal bitmasks over the support
//!   in the listed order (bit `i` is `support[i]`). Every subset must be listed.
//! * `jointdist`: header `n a_1 ... a_n`, then lines `s_1 ... s_n p` with
//!   0-based symbols `s_i < a_i`. Builds the normalized mutual-information cut.
//!
//! Blank lines and lines starting with `#` are ignored in the text formats.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{
    build_directed_cut, build_hypergraph_cut, build_mutual_information, build_undirected_cut,
    JointDistribution, SubmodularOracle, SubmodularTransformation,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Graph,
    Digraph,
    Hypergraph,
    SmfJson,
    Jointdist,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Graph => "graph",
            Format::Digraph => "digraph",
            Format::Hypergraph => "hypergraph",
            Format::SmfJson => "smf-json",
            Format::Jointdist => "jointdist",
        }
    }

    /// Guess the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Format> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "graph" | "edges" => Some(Format::Graph),
            "digraph" | "arcs" => Some(Format::Digraph),
            "hgr" | "hypergraph" => Some(Format::Hypergraph),
            "json" => Some(Format::SmfJson),
            "jointdist" | "jd" => Some(Format::Jointdist),
            _ => None,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graph" => Ok(Format::Graph),
            "digraph" => Ok(Format::Digraph),
            "hypergraph" | "hgr" => Ok(Format::Hypergraph),
            "smf-json" | "json" => Ok(Format::SmfJson),
            "jointdist" => Ok(Format::Jointdist),
            other => Err(Error::input(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmfFunction {
    pub support: Vec<usize>,
    pub values: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmfFile {
    pub n: usize,
    pub functions: Vec<SmfFunction>,
}

/// Parsed file contents, kept in their original 0-based form.
#[derive(Clone, Debug, PartialEq)]
pub enum InstanceData {
    Graph { n: usize, edges: Vec<(usize, usize)> },
    Digraph { n: usize, arcs: Vec<(usize, usize)> },
    Hypergraph { n: usize, edges: Vec<Vec<usize>> },
    Smf(SmfFile),
    Jointdist {
        alphabet: Vec<usize>,
        outcomes: Vec<(Vec<usize>, f64)>,
    },
}

#[derive(Clone, Debug)]
pub struct InstanceFile {
    pub format: Format,
    pub data: InstanceData,
    pub transformation: SubmodularTransformation,
}

struct Reader<'a> {
    path: &'a str,
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Reader<'a> {
    fn new(path: &'a str, text: &'a str) -> Self {
        Reader {
            path,
            lines: text.lines().enumerate(),
            line: 0,
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_string(),
            line: self.line,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<Vec<&'a str>> {
        for (i, l) in self.lines.by_ref() {
            let l = l.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            self.line = i + 1;
            return Some(l.split_whitespace().collect());
        }
        None
    }

    fn require(&mut self, what: &str) -> Result<Vec<&'a str>> {
        self.next()
            .ok_or_else(|| self.err(format!("unexpected end of file, expected {what}")))
    }

    fn finish(&mut self) -> Result<()> {
        match self.next() {
            Some(_) => Err(self.err("unexpected trailing line")),
            None => Ok(()),
        }
    }

    fn int(&self, tok: &str) -> Result<usize> {
        tok.parse()
            .map_err(|_| self.err(format!("expected a non-negative integer, found '{tok}'")))
    }

    fn real(&self, tok: &str) -> Result<f64> {
        tok.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| self.err(format!("expected a finite number, found '{tok}'")))
    }

    fn vertex(&self, tok: &str, n: usize) -> Result<usize> {
        let v = self.int(tok)?;
        if v == 0 || v > n {
            return Err(self.err(format!("vertex {v} outside 1..={n}")));
        }
        Ok(v - 1)
    }

    fn header(&mut self) -> Result<(usize, usize)> {
        let toks = self.require("header 'n m'")?;
        if toks.len() != 2 {
            return Err(self.err("header must be 'n m'"));
        }
        Ok((self.int(toks[0])?, self.int(toks[1])?))
    }
}

fn parse_pairs(r: &mut Reader<'_>) -> Result<(usize, Vec<(usize, usize)>)> {
    let (n, m) = r.header()?;
    let mut pairs = Vec::with_capacity(m);
    for _ in 0..m {
        let toks = r.require("an edge line 'u v'")?;
        if toks.len() != 2 {
            return Err(r.err("edge line must be 'u v'"));
        }
        let u = r.vertex(toks[0], n)?;
        let v = r.vertex(toks[1], n)?;
        if u == v {
            return Err(r.err("self-loops are not allowed"));
        }
        pairs.push((u, v));
    }
    r.finish()?;
    Ok((n, pairs))
}

fn parse_hypergraph(r: &mut Reader<'_>) -> Result<InstanceData> {
    let (n, m) = r.header()?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let toks = r.require("a hyperedge line 'k v_1 ... v_k'")?;
        let k = r.int(toks[0])?;
        if k == 0 || toks.len() != k + 1 {
            return Err(r.err(format!("hyperedge line must list k >= 1 vertices, found k = {k}")));
        }
        let e = toks[1..]
            .iter()
            .map(|t| r.vertex(t, n))
            .collect::<Result<Vec<_>>>()?;
        let mut sorted = e.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != e.len() {
            return Err(r.err("repeated vertex in hyperedge"));
        }
        edges.push(e);
    }
    r.finish()?;
    Ok(InstanceData::Hypergraph { n, edges })
}

fn parse_jointdist(r: &mut Reader<'_>) -> Result<InstanceData> {
    let toks = r.require("header 'n a_1 ... a_n'")?;
    let n = r.int(toks[0])?;
    if toks.len() != n + 1 {
        return Err(r.err(format!("header must list {n} alphabet sizes")));
    }
    let alphabet = toks[1..]
        .iter()
        .map(|t| r.int(t))
        .collect::<Result<Vec<_>>>()?;
    if alphabet.contains(&0) {
        return Err(r.err("alphabet sizes must be positive"));
    }
    let mut outcomes = Vec::new();
    while let Some(toks) = r.next() {
        if toks.len() != n + 1 {
            return Err(r.err(format!("outcome line must be {n} symbols and a probability")));
        }
        let symbols = toks[..n]
            .iter()
            .map(|t| r.int(t))
            .collect::<Result<Vec<_>>>()?;
        for (i, (&s, &a)) in symbols.iter().zip(&alphabet).enumerate() {
            if s >= a {
                return Err(r.err(format!("symbol {s} of variable {} exceeds alphabet {a}", i + 1)));
            }
        }
        outcomes.push((symbols, r.real(toks[n])?));
    }
    Ok(InstanceData::Jointdist { alphabet, outcomes })
}

fn parse_smf(path: &str, text: &str) -> Result<InstanceData> {
    let file: SmfFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_string(),
        line: e.line(),
        message: e.to_string(),
    })?;
    Ok(InstanceData::Smf(file))
}

fn smf_oracle(n: usize, e: usize, f: &SmfFunction) -> Result<SubmodularOracle> {
    let context = |msg: String| Error::input(format!("function {}: {msg}", e + 1));
    let support = f
        .support
        .iter()
        .map(|&v| {
            if v == 0 || v > n {
                Err(context(format!("vertex {v} outside 1..={n}")))
            } else {
                Ok(v - 1)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let entries = f
        .values
        .iter()
        .map(|(k, &val)| {
            k.trim()
                .parse::<u64>()
                .map(|m| (m, val))
                .map_err(|_| context(format!("subset key '{k}' is not a decimal bitmask")))
        })
        .collect::<Result<Vec<_>>>()?;
    SubmodularOracle::table_from_entries(support, entries)
}

impl InstanceData {
    pub fn build(&self) -> Result<SubmodularTransformation> {
        match self {
            InstanceData::Graph { n, edges } => build_undirected_cut(*n, edges),
            InstanceData::Digraph { n, arcs } => build_directed_cut(*n, arcs),
            InstanceData::Hypergraph { n, edges } => build_hypergraph_cut(*n, edges),
            InstanceData::Smf(file) => {
                let fs = file
                    .functions
                    .iter()
                    .enumerate()
                    .map(|(e, f)| smf_oracle(file.n, e, f))
                    .collect::<Result<Vec<_>>>()?;
                SubmodularTransformation::new(file.n, fs)
            }
            InstanceData::Jointdist { alphabet, outcomes } => {
                let dist = JointDistribution::new(alphabet.clone(), outcomes.clone())?;
                build_mutual_information(&dist)
            }
        }
    }

    /// Serialize back to the text of `format`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match self {
            InstanceData::Graph { n, edges: pairs } | InstanceData::Digraph { n, arcs: pairs } => {
                let _ = writeln!(s, "{n} {}", pairs.len());
                for (u, v) in pairs {
                    let _ = writeln!(s, "{} {}", u + 1, v + 1);
                }
            }
            InstanceData::Hypergraph { n, edges } => {
                let _ = writeln!(s, "{n} {}", edges.len());
                for e in edges {
                    let vs: Vec<String> = e.iter().map(|v| (v + 1).to_string()).collect();
                    let _ = writeln!(s, "{} {}", e.len(), vs.join(" "));
                }
            }
            InstanceData::Smf(file) => {
                s = serde_json::to_string_pretty(file).expect("plain data serializes");
                s.push('\n');
            }
            InstanceData::Jointdist { alphabet, outcomes } => {
                let a: Vec<String> = alphabet.iter().map(|x| x.to_string()).collect();
                let _ = writeln!(s, "{} {}", alphabet.len(), a.join(" "));
                for (sym, p) in outcomes {
                    let sy: Vec<String> = sym.iter().map(|x| x.to_string()).collect();
                    let _ = writeln!(s, "{} {p}", sy.join(" "));
                }
            }
        }
        s
    }
}

/// Parse `text` in the given format; `path` is only used in error messages.
pub fn parse_str(text: &str, format: Format, path: &str) -> Result<InstanceFile> {
    let mut r = Reader::new(path, text);
    let data = match format {
        Format::Graph => {
            let (n, edges) = parse_pairs(&mut r)?;
            InstanceData::Graph { n, edges }
        }
        Format::Digraph => {
            let (n, arcs) = parse_pairs(&mut r)?;
            InstanceData::Digraph { n, arcs }
        }
        Format::Hypergraph => parse_hypergraph(&mut r)?,
        Format::SmfJson => parse_smf(path, text)?,
        Format::Jointdist => parse_jointdist(&mut r)?,
    };
    let transformation = data.build()?;
    Ok(InstanceFile {
        format,
        data,
        transformation,
    })
}

/// Read a file, taking the format from `format` or else from the extension.
pub fn load(path: &Path, format: Option<Format>) -> Result<InstanceFile> {
    let format = match format.or_else(|| Format::from_path(path)) {
        Some(f) => f,
        None => {
            return Err(Error::input(format!(
                "cannot infer the format of {}; pass --format",
                path.display()
            )))
        }
    };
    let text = std::fs::read_to_string(path)?;
    parse_str(&text, format, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip() {
        let f = parse_str("4 4\n1 2\n2 3\n3 4\n4 1\n", Format::Graph, "c4").unwrap();
        assert_eq!(f.transformation.degrees(), &[2, 2, 2, 2]);
        let back = parse_str(&f.data.to_text(), Format::Graph, "c4").unwrap();
        assert_eq!(back.data, f.data);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_str("3 2\n1 2\n# note\n2 9\n", Format::Graph, "g").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(parse_str("3 1\n1 2\n2 3\n", Format::Graph, "g").is_err());
        assert!(parse_str("", Format::Hypergraph, "h").is_err());
    }

    #[test]
    fn smf_table() {
        let text = r#"{"n": 2, "functions": [{"support": [2, 1],
            "values": {"0": 0, "1": 1, "2": 0, "3": 0}}]}"#;
        let f = parse_str(text, Format::SmfJson, "s").unwrap();
        let t = &f.transformation;
        // Bit 0 is vertex 2 in the listed order.
        assert_eq!(t.cut(0b10), 1.0);
        assert_eq!(t.cut(0b01), 0.0);
        let missing = r#"{"n": 1, "functions": [{"support": [1], "values": {"0": 0}}]}"#;
        assert!(matches!(parse_str(missing, Format::SmfJson, "s"), Err(Error::Input(_))));
    }

    #[test]
    fn jointdist_independent_bits() {
        let text = "2 2 2\n0 0 0.25\n0 1 0.25\n1 0 0.25\n1 1 0.25\n";
        let f = parse_str(text, Format::Jointdist, "j").unwrap();
        assert!(f.transformation.cut(0b01).abs() < 1e-12);
        let back = parse_str(&f.data.to_text(), Format::Jointdist, "j").unwrap();
        assert_eq!(back.data, f.data);
    }
}
