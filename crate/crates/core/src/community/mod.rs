//! Weighted modularity and the two community detectors.
//!
//! Graphs are undirected with non-negative weights and no self-loops. With
//! `k_i` the weighted degree and `2m = Σ_i k_i`,
//!
//! ```text
//! Q = (1 / 2m) Σ_ij [w_ij - k_i k_j / 2m] δ(c_i, c_j)
//! ```
//!
//! where the double sum runs over ordered pairs, so each edge counts twice.

mod greedy;
mod spinglass;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub use greedy::greedy_modularity;
pub use spinglass::{hamiltonian, spinglass_communities, SpinglassConfig};

use crate::error::{Error, Result};
use crate::lon::FilteredLon;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
    degree: Vec<f64>,
    total: f64,
}

impl WeightedGraph {
    /// Parallel edges are merged by summing weights. Panics on self-loops,
    /// out-of-range endpoints, or negative weights.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, j, w) in edges {
            assert!(i < n && j < n, "edge ({i}, {j}) out of range for {n} nodes");
            assert!(i != j, "self-loops are not supported");
            assert!(w >= 0.0 && w.is_finite(), "edge weights must be finite and non-negative");
            *merged.entry((i.min(j), i.max(j))).or_insert(0.0) += w;
        }
        let mut adj = vec![Vec::new(); n];
        let mut degree = vec![0.0; n];
        for (&(i, j), &w) in &merged {
            if w == 0.0 {
                continue;
            }
            adj[i].push((j, w));
            adj[j].push((i, w));
            degree[i] += w;
            degree[j] += w;
        }
        for row in &mut adj {
            row.sort_by_key(|&(j, _)| j);
        }
        let total = degree.iter().sum();
        WeightedGraph { adj, degree, total }
    }

    pub fn from_filtered(g: &FilteredLon) -> Self {
        WeightedGraph::from_edges(
            g.num_nodes(),
            g.edges.iter().map(|e| (e.i as usize, e.j as usize, e.weight)),
        )
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.degree[i]
    }

    /// `2m`, the sum of all weighted degrees.
    pub fn total_weight(&self) -> f64 {
        self.total
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Each undirected edge once, as `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().filter(move |&&(j, _)| i < j).map(move |&(j, w)| (i, j, w)))
    }

    pub fn scaled(&self, c: f64) -> Self {
        WeightedGraph::from_edges(self.num_nodes(), self.edges().map(|(i, j, w)| (i, j, w * c)))
    }

    fn require_edges(&self) -> Result<()> {
        if self.total > 0.0 {
            Ok(())
        } else {
            Err(Error::UndefinedModularity)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Greedy,
    Spinglass,
    External,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::Spinglass => "spinglass",
            Algorithm::External => "external",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "greedy" => Some(Algorithm::Greedy),
            "spinglass" => Some(Algorithm::Spinglass),
            "external" => Some(Algorithm::External),
            _ => None,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Node id → community id, dense and 0-based in order of first appearance.
    pub assignment: Vec<usize>,
    pub q: f64,
    pub algorithm: Algorithm,
    pub seed: Option<u64>,
}

impl Partition {
    pub fn num_communities(&self) -> usize {
        self.assignment.iter().max().map_or(0, |&m| m + 1)
    }
}

/// Relabels arbitrary labels to `0, 1, …` in order of first appearance.
pub fn relabel_dense<T: Ord + Copy>(labels: &[T]) -> Vec<usize> {
    let mut seen: BTreeMap<T, usize> = BTreeMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = seen.len();
            *seen.entry(l).or_insert(next)
        })
        .collect()
}

pub fn modularity(g: &WeightedGraph, assignment: &[usize]) -> Result<f64> {
    assert_eq!(assignment.len(), g.num_nodes(), "assignment length does not match the graph");
    g.require_edges()?;
    let two_m = g.total_weight();
    let k = assignment.iter().max().map_or(0, |&m| m + 1);
    let mut inside = vec![0.0; k];
    let mut tot = vec![0.0; k];
    for i in 0..g.num_nodes() {
        let c = assignment[i];
        tot[c] += g.degree(i);
        for &(j, w) in g.neighbors(i) {
            if assignment[j] == c {
                inside[c] += w;
            }
        }
    }
    Ok(inside
        .iter()
        .zip(&tot)
        .map(|(&in_c, &k_c)| in_c / two_m - (k_c / two_m).powi(2))
        .sum())
}

/// Partition CSV: a `#` comment line with the run parameters, then
/// `node_id,community_id` rows.
pub fn format_partition_csv(p: &Partition, gamma: Option<f64>) -> String {
    let mut out = String::new();
    write!(out, "# algorithm={}", p.algorithm).unwrap();
    if let Some(seed) = p.seed {
        write!(out, " seed={seed}").unwrap();
    }
    if let Some(gamma) = gamma {
        write!(out, " gamma={gamma}").unwrap();
    }
    writeln!(out, " q={}", p.q).unwrap();
    out.push_str("node_id,community_id\n");
    for (i, c) in p.assignment.iter().enumerate() {
        writeln!(out, "{i},{c}").unwrap();
    }
    out
}

pub fn write_partition_csv(p: &Partition, gamma: Option<f64>, path: &Path) -> Result<()> {
    fs::write(path, format_partition_csv(p, gamma)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::WeightedGraph;

    pub fn two_triangles() -> WeightedGraph {
        WeightedGraph::from_edges(
            6,
            [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)],
        )
    }

    pub fn triangle() -> WeightedGraph {
        WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
    }

    pub fn complete(n: usize) -> WeightedGraph {
        WeightedGraph::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0))))
    }
}
