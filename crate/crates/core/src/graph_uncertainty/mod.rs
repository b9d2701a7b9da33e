//! A discrete analogue on finite graphs: transport along edges, the edge
//! boundary of the positive set, Laplacian spectra and graphical designs.
//!
//! Vertices are labelled `1..=n` in every public interface that takes or
//! returns vertex sets, so subsets can be written as they appear in drawings
//! of the graph. Per-vertex values are stored by position (`values[v − 1]`).

mod designs;
mod spectrum;
mod transport;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use designs::{
    design_extremality_experiment, perfect_domination_check, search_designs, verify_design,
    verify_design_with, DesignCertificate, DesignSearch, ExtremalityTable, SearchMode, DESIGN_TOL,
    EXHAUSTIVE_CAP,
};
pub use spectrum::{laplacian_spectrum, laplacian_spectrum_with_tol, Eigenspace, Spectrum, SPECTRUM_TOL};
pub use transport::{boundary_size, graph_w1, uncertainty_product_graph, GraphProduct, GraphTransport};

/// Chords of the Nauru graph on top of the 24-cycle.
const NAURU_CHORDS: [(usize, usize); 12] = [
    (1, 6),
    (2, 17),
    (3, 10),
    (4, 21),
    (5, 14),
    (7, 12),
    (8, 23),
    (9, 16),
    (11, 20),
    (13, 18),
    (15, 22),
    (19, 24),
];

/// Chords of the McGee graph on top of the 24-cycle. The last one joins the
/// two vertices that would otherwise have degree two.
const MCGEE_CHORDS: [(usize, usize); 12] = [
    (1, 8),
    (2, 19),
    (3, 15),
    (4, 11),
    (5, 22),
    (6, 18),
    (7, 14),
    (9, 21),
    (10, 17),
    (13, 20),
    (16, 23),
    (12, 24),
];

/// A finite, simple, connected, undirected graph with positive edge lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    /// 1-based endpoints with `u < v`.
    edges: Vec<(usize, usize)>,
    lengths: Vec<f64>,
}

impl Graph {
    /// `edges` use labels `1..=n`; `lengths` default to 1.
    pub fn new(n: usize, edges: &[(usize, usize)], lengths: Option<Vec<f64>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("no vertices".into()));
        }
        let lengths = lengths.unwrap_or_else(|| vec![1.0; edges.len()]);
        if lengths.len() != edges.len() {
            return Err(Error::InvalidGraph(format!(
                "{} lengths for {} edges",
                lengths.len(),
                edges.len()
            )));
        }
        let mut seen = BTreeSet::new();
        let mut norm = Vec::with_capacity(edges.len());
        for (&(u, v), &len) in edges.iter().zip(&lengths) {
            if u == 0 || v == 0 || u > n || v > n {
                return Err(Error::InvalidGraph(format!("edge {u}-{v} outside 1..={n}")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("loop at vertex {u}")));
            }
            if !(len > 0.0 && len.is_finite()) {
                return Err(Error::InvalidGraph(format!("edge {u}-{v} has length {len}")));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(Error::InvalidGraph(format!("edge {}-{} repeated", e.0, e.1)));
            }
            norm.push(e);
        }
        let g = Self {
            n,
            edges: norm,
            lengths,
        };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// 1-based edges with `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// 0-based neighbour lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u - 1].push(v - 1);
            adj[v - 1].push(u - 1);
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency().iter().map(Vec::len).collect()
    }

    pub fn is_regular(&self, k: usize) -> bool {
        self.degrees().iter().all(|&d| d == k)
    }

    fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    fn cycle_with_chords(chords: &[(usize, usize)]) -> Self {
        let mut edges: Vec<(usize, usize)> = (1..=24).map(|i| (i, i % 24 + 1)).collect();
        edges.extend_from_slice(chords);
        Self::new(24, &edges, None).expect("built-in graph is valid")
    }

    /// The Nauru graph: a 24-cycle with 12 chords.
    pub fn nauru() -> Self {
        Self::cycle_with_chords(&NAURU_CHORDS)
    }

    /// The McGee graph: a 24-cycle with 12 chords.
    pub fn mcgee() -> Self {
        Self::cycle_with_chords(&MCGEE_CHORDS)
    }

    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
        Self::new(n, &edges, None)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGraph(format!("cycle needs 3 vertices, got {n}")));
        }
        let edges: Vec<_> = (1..=n).map(|i| (i, i % n + 1)).collect();
        Self::new(n, &edges, None)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v))).collect();
        Self::new(n, &edges, None)
    }

    /// `nauru`, `mcgee`, `path:N`, `cycle:N` or `complete:N`.
    pub fn named(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, arg) = match spec.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (spec, None),
        };
        let size = || -> Result<usize> {
            let arg = arg.ok_or_else(|| Error::Parse(format!("`{name}` needs a size, as in {name}:N")))?;
            arg.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad graph size `{arg}`")))
        };
        match (name.to_ascii_lowercase().as_str(), arg) {
            ("nauru", None) => Ok(Self::nauru()),
            ("mcgee", None) => Ok(Self::mcgee()),
            ("path", _) => Self::path(size()?),
            ("cycle", _) => Self::cycle(size()?),
            ("complete", _) => Self::complete(size()?),
            _ => Err(Error::InvalidGraph(format!("unknown graph `{spec}`"))),
        }
    }

    /// Built-in name, or else a path to an edge-list file.
    pub fn resolve(spec: &str) -> Result<Self> {
        match Self::named(spec) {
            Err(Error::InvalidGraph(_)) if Path::new(spec).is_file() => Self::load(Path::new(spec)),
            other => other,
        }
    }

    /// One `u v` or `u v length` per line, 1-based; `#` starts a comment.
    /// The vertex count is the largest label.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut lengths = Vec::new();
        let mut weighted = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || {
                Error::Parse(format!(
                    "line {}: expected `u v [length]`, got `{line}`",
                    lineno + 1
                ))
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(bad());
            }
            let u: usize = fields[0].parse().map_err(|_| bad())?;
            let v: usize = fields[1].parse().map_err(|_| bad())?;
            let len = match fields.get(2) {
                Some(s) => {
                    weighted = true;
                    s.parse().map_err(|_| bad())?
                }
                None => 1.0,
            };
            edges.push((u, v));
            lengths.push(len);
        }
        let n = edges.iter().map(|&(u, v)| u.max(v)).max().unwrap_or(0);
        Self::new(n, &edges, weighted.then_some(lengths))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse_edge_list(&std::fs::read_to_string(path)?)
    }

    /// The image under `v ↦ perm[v − 1]`, a permutation of `1..=n`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n)?;
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u - 1], perm[v - 1]))
            .collect();
        Self::new(self.n, &edges, Some(self.lengths.clone()))
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidConfig(format!(
            "permutation of length {} for {n} vertices",
            perm.len()
        )));
    }
    for &p in perm {
        if p == 0 || p > n || std::mem::replace(&mut seen[p - 1], true) {
            return Err(Error::InvalidConfig(format!(
                "{perm:?} is not a permutation of 1..={n}"
            )));
        }
    }
    Ok(())
}

/// Real values on the vertices, by position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexFunction {
    values: Vec<f64>,
}

impl VertexFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("vertex value {v} is not finite")));
        }
        Ok(Self { values })
    }

    /// `χ_S − |S|/n`.
    pub fn centered_indicator(n: usize, subset: &[usize]) -> Result<Self> {
        let s = check_subset(n, subset)?;
        let c = s.len() as f64 / n as f64;
        let mut values = vec![-c; n];
        for v in s {
            values[v - 1] = 1.0 - c;
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    /// `|Σ f| ≤ 1e−12 · max(1, ‖f‖₁)`.
    pub fn is_zero_mean(&self) -> bool {
        let s: f64 = crate::numerics::neumaier_sum(self.values.iter().copied());
        s.abs() <= 1e-12 * self.l1().max(1.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

/// Sorted, deduplicated labels; rejects labels outside `1..=n` and repeats.
fn check_subset(n: usize, subset: &[usize]) -> Result<Vec<usize>> {
    let mut s = subset.to_vec();
    s.sort_unstable();
    if let Some(&v) = s.iter().find(|&&v| v == 0 || v > n) {
        return Err(Error::BadSubset(format!("vertex {v} outside 1..={n}")));
    }
    if s.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::BadSubset(format!("{subset:?} repeats a vertex")));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn built_ins_are_cubic() {
        for g in [Graph::nauru(), Graph::mcgee()] {
            assert_eq!(g.n(), 24);
            assert_eq!(g.edges().len(), 36);
            assert!(g.is_regular(3));
        }
    }

    #[test]
    fn mcgee_drawing_leaves_one_chord_undetermined() {
        let drawn = &MCGEE_CHORDS[..11];
        let mut deg = [2; 24];
        for &(u, v) in drawn {
            deg[u - 1] += 1;
            deg[v - 1] += 1;
        }
        let short: Vec<usize> = (1..=24).filter(|&v| deg[v - 1] == 2).collect();
        assert_eq!(short, vec![12, 24]);
    }

    #[test]
    fn named_graphs() {
        assert_eq!(Graph::named("path:5").unwrap().edges().len(), 4);
        assert_eq!(Graph::named("cycle:6").unwrap().edges().len(), 6);
        assert_eq!(Graph::named("complete:5").unwrap().edges().len(), 10);
        assert!(Graph::named("petersen").is_err());
        assert!(Graph::named("path").is_err());
        assert!(Graph::named("path:x").is_err());
    }

    #[test]
    fn validation() {
        assert!(matches!(
            Graph::new(4, &[(1, 2), (3, 4)], None),
            Err(Error::Disconnected)
        ));
        assert!(Graph::new(3, &[(1, 1), (1, 2), (2, 3)], None).is_err());
        assert!(Graph::new(3, &[(1, 2), (2, 1), (2, 3)], None).is_err());
        assert!(Graph::new(3, &[(1, 2), (2, 4)], None).is_err());
        assert!(Graph::new(2, &[(1, 2)], Some(vec![0.0])).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::parse_edge_list("# triangle\n1 2\n2 3\n\n3 1 # closing\n").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges(), &[(1, 2), (2, 3), (1, 3)]);
        let w = Graph::parse_edge_list("1 2 0.5\n2 3 2\n").unwrap();
        assert_eq!(w.lengths(), &[0.5, 2.0]);
        assert!(matches!(Graph::parse_edge_list("1 2 3 4"), Err(Error::Parse(_))));
        assert!(matches!(Graph::parse_edge_list("1 a"), Err(Error::Parse(_))));
    }

    #[test]
    fn centered_indicator_has_zero_mean() {
        let f = VertexFunction::centered_indicator(24, &[7, 10, 14, 17, 21, 24]).unwrap();
        assert!(f.is_zero_mean());
        assert!((f.values()[6] - 0.75).abs() < 1e-15);
        assert!(VertexFunction::centered_indicator(4, &[1, 1]).is_err());
        assert!(VertexFunction::centered_indicator(4, &[5]).is_err());
    }
}
