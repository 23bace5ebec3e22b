//! Local optima networks: construction, α-quantile filtering and export.
//!
//! For basins `b_i`, `b_j` the directed weight is the probability that a
//! uniformly chosen swap from a uniformly chosen member of `b_i` lands in
//! `b_j`. It is kept as the exact count `c_ij` of ordered neighbor pairs
//! `(s, s')` with `s ∈ b_i`, `s' ∈ b_j`, and converted to
//! `c_ij / (|b_i| * n(n-1)/2)` only when a float is needed.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::landscape::{blocks, BasinMap, LocalOptimum};
use crate::qap::{self, factorial, neighborhood_size, swap_pairs, QapInstance};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lon {
    pub n: usize,
    pub nodes: Vec<LocalOptimum>,
    /// Ordered-pair counts `c_ij`, self-loops included.
    pub counts: BTreeMap<(u32, u32), u64>,
}

impl Lon {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Neighbors per configuration, `n(n-1)/2`.
    pub fn moves_per_config(&self) -> u64 {
        neighborhood_size(self.n)
    }

    pub fn count(&self, i: u32, j: u32) -> u64 {
        self.counts.get(&(i, j)).copied().unwrap_or(0)
    }

    /// `w→_ij` as the exact fraction `(numerator, denominator)`.
    pub fn weight_ratio(&self, i: u32, j: u32) -> (u64, u64) {
        (
            self.count(i, j),
            self.nodes[i as usize].basin_size * self.moves_per_config(),
        )
    }

    pub fn weight(&self, i: u32, j: u32) -> f64 {
        let (num, den) = self.weight_ratio(i, j);
        num as f64 / den as f64
    }

    /// Directed edges `(i, j, w→_ij)` with non-zero weight, ordered by `(i, j)`.
    pub fn directed_edges(&self) -> Vec<(u32, u32, f64)> {
        self.counts
            .iter()
            .map(|(&(i, j), &c)| {
                let den = self.nodes[i as usize].basin_size * self.moves_per_config();
                (i, j, c as f64 / den as f64)
            })
            .collect()
    }

    /// Exact outgoing count totals per node.
    pub fn row_count_sums(&self) -> Vec<u64> {
        let mut sums = vec![0u64; self.nodes.len()];
        for (&(i, _), &c) in &self.counts {
            sums[i as usize] += c;
        }
        sums
    }
}

/// Panics if `bm` was not built from an instance of the same size, or its
/// roster disagrees with `inst`.
pub fn build_lon(inst: &QapInstance, bm: &BasinMap, workers: usize) -> Lon {
    let n = inst.n();
    assert_eq!(bm.n, n, "basin map size does not match the instance");
    assert_eq!(bm.assignment.len() as u64, factorial(n), "basin map is not exhaustive");
    for o in &bm.optima {
        assert_eq!(inst.cost(&o.rep), o.cost, "basin map roster does not match the instance");
    }

    let total = bm.assignment.len();
    let partials: Vec<HashMap<(u32, u32), u64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = blocks(total, workers)
            .into_iter()
            .map(|range| {
                scope.spawn(move || {
                    let mut local: HashMap<(u32, u32), u64> = HashMap::new();
                    let mut p = vec![0usize; n];
                    for r in range {
                        qap::unrank_into(&mut p, r as u64);
                        let from = bm.assignment[r];
                        for (i, j) in swap_pairs(n) {
                            p.swap(i, j);
                            let to = bm.assignment[qap::rank(&p) as usize];
                            p.swap(i, j);
                            *local.entry((from, to)).or_insert(0) += 1;
                        }
                    }
                    local
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });

    let mut counts = BTreeMap::new();
    for part in partials {
        for (k, c) in part {
            *counts.entry(k).or_insert(0) += c;
        }
    }
    Lon {
        n,
        nodes: bm.optima.clone(),
        counts,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuantileRule {
    /// The `ceil(alpha * E)`-th smallest value (1-based).
    #[default]
    NearestRank,
    /// Linear interpolation between order statistics at `(E - 1) * alpha`.
    Linear,
}

/// Empirical quantile of an ascending-sorted, non-empty slice.
pub fn quantile_sorted(sorted: &[f64], alpha: f64, rule: QuantileRule) -> f64 {
    assert!(!sorted.is_empty());
    let e = sorted.len();
    match rule {
        QuantileRule::NearestRank => {
            // Slack absorbs representation error such as 0.3 * 10 = 3.0000000000000004.
            let k = (alpha * e as f64 - 1e-9).ceil().max(1.0) as usize;
            sorted[k.min(e) - 1]
        }
        QuantileRule::Linear => {
            let h = (e - 1) as f64 * alpha;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(e - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UndirectedEdge {
    pub i: u32,
    pub j: u32,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredLon {
    pub nodes: Vec<LocalOptimum>,
    /// Retained edges with `i < j`, ordered by `(i, j)`.
    pub edges: Vec<UndirectedEdge>,
    pub threshold: f64,
    pub alpha: f64,
}

impl FilteredLon {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
}

/// Undirected weights `(w→_ij + w→_ji) / 2` for `i < j`, self-loops dropped.
pub fn undirected_edges(lon: &Lon) -> Vec<UndirectedEdge> {
    lon.counts
        .keys()
        .filter(|&&(i, j)| i < j)
        .map(|&(i, j)| UndirectedEdge {
            i,
            j,
            weight: (lon.weight(i, j) + lon.weight(j, i)) / 2.0,
        })
        .collect()
}

pub fn filter_lon(lon: &Lon, alpha: f64) -> FilteredLon {
    filter_lon_with(lon, alpha, QuantileRule::NearestRank)
}

/// Drops undirected edges whose weight is below the `alpha`-quantile of the
/// undirected weight distribution. `alpha = 0` keeps everything.
///
/// Panics if `alpha` is outside `[0, 1]` or the LON has no nodes.
pub fn filter_lon_with(lon: &Lon, alpha: f64, rule: QuantileRule) -> FilteredLon {
    assert!((0.0..=1.0).contains(&alpha), "alpha must lie in [0, 1], got {alpha}");
    assert!(!lon.nodes.is_empty(), "cannot filter an empty LON");
    let all = undirected_edges(lon);
    let threshold = if alpha == 0.0 || all.is_empty() {
        0.0
    } else {
        let mut ws: Vec<f64> = all.iter().map(|e| e.weight).collect();
        ws.sort_by(f64::total_cmp);
        quantile_sorted(&ws, alpha, rule)
    };
    FilteredLon {
        nodes: lon.nodes.clone(),
        edges: all.into_iter().filter(|e| e.weight >= threshold).collect(),
        threshold,
        alpha,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    GraphMl,
    Dot,
    EdgeCsv,
}

impl GraphFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "graphml" => Some(GraphFormat::GraphMl),
            "dot" => Some(GraphFormat::Dot),
            "edge_csv" | "csv" => Some(GraphFormat::EdgeCsv),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            GraphFormat::GraphMl => "graphml",
            GraphFormat::Dot => "dot",
            GraphFormat::EdgeCsv => "csv",
        }
    }
}

/// Rounds to 12 significant digits and prints the shortest decimal that
/// reads back as that rounded value.
pub fn format_weight(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().expect("valid float");
    format!("{rounded}")
}

/// Visual node attributes.
///
/// `size_hint = 20 * basin_size / max_basin_size`.
/// `shade = round(255 * (cost - min_cost) / (max_cost - min_cost))`, so the
/// best node is 0 (black); when all costs are equal every shade is 128.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeStyle {
    pub size_hint: f64,
    pub shade: u8,
}

pub fn node_styles(nodes: &[LocalOptimum]) -> Vec<NodeStyle> {
    let max_basin = nodes.iter().map(|o| o.basin_size).max().unwrap_or(1).max(1);
    let min_cost = nodes.iter().map(|o| o.cost).min().unwrap_or(0);
    let max_cost = nodes.iter().map(|o| o.cost).max().unwrap_or(0);
    nodes
        .iter()
        .map(|o| {
            let shade = if max_cost == min_cost {
                128
            } else {
                (255.0 * (o.cost - min_cost) as f64 / (max_cost - min_cost) as f64).round() as u8
            };
            NodeStyle {
                size_hint: 20.0 * o.basin_size as f64 / max_basin as f64,
                shade,
            }
        })
        .collect()
}

fn render(
    nodes: &[LocalOptimum],
    edges: &[(u32, u32, f64)],
    directed: bool,
    format: GraphFormat,
) -> String {
    let styles = node_styles(nodes);
    let mut out = String::new();
    match format {
        GraphFormat::GraphMl => {
            out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
            out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
            for (key, ty) in [
                ("cost", "long"),
                ("basin_size", "long"),
                ("size_hint", "double"),
                ("shade", "int"),
            ] {
                writeln!(out, "  <key id=\"{key}\" for=\"node\" attr.name=\"{key}\" attr.type=\"{ty}\"/>")
                    .unwrap();
            }
            out.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n");
            let kind = if directed { "directed" } else { "undirected" };
            writeln!(out, "  <graph id=\"lon\" edgedefault=\"{kind}\">").unwrap();
            for (o, s) in nodes.iter().zip(&styles) {
                writeln!(out, "    <node id=\"n{}\">", o.id).unwrap();
                writeln!(out, "      <data key=\"cost\">{}</data>", o.cost).unwrap();
                writeln!(out, "      <data key=\"basin_size\">{}</data>", o.basin_size).unwrap();
                writeln!(out, "      <data key=\"size_hint\">{}</data>", format_weight(s.size_hint)).unwrap();
                writeln!(out, "      <data key=\"shade\">{}</data>", s.shade).unwrap();
                out.push_str("    </node>\n");
            }
            for &(i, j, w) in edges {
                writeln!(
                    out,
                    "    <edge source=\"n{i}\" target=\"n{j}\"><data key=\"weight\">{}</data></edge>",
                    format_weight(w)
                )
                .unwrap();
            }
            out.push_str("  </graph>\n</graphml>\n");
        }
        GraphFormat::Dot => {
            let (kw, arrow) = if directed { ("digraph", "->") } else { ("graph", "--") };
            writeln!(out, "{kw} lon {{").unwrap();
            for (o, s) in nodes.iter().zip(&styles) {
                writeln!(
                    out,
                    "  {} [cost={}, basin_size={}, size_hint={}, shade={}];",
                    o.id,
                    o.cost,
                    o.basin_size,
                    format_weight(s.size_hint),
                    s.shade
                )
                .unwrap();
            }
            for &(i, j, w) in edges {
                writeln!(out, "  {i} {arrow} {j} [weight={}];", format_weight(w)).unwrap();
            }
            out.push_str("}\n");
        }
        GraphFormat::EdgeCsv => {
            out.push_str("src,dst,weight\n");
            for &(i, j, w) in edges {
                writeln!(out, "{i},{j},{}", format_weight(w)).unwrap();
            }
        }
    }
    out
}

pub fn render_filtered(g: &FilteredLon, format: GraphFormat) -> String {
    let edges: Vec<_> = g.edges.iter().map(|e| (e.i, e.j, e.weight)).collect();
    render(&g.nodes, &edges, false, format)
}

pub fn render_lon(lon: &Lon, format: GraphFormat) -> String {
    render(&lon.nodes, &lon.directed_edges(), true, format)
}

pub fn export_filtered(g: &FilteredLon, format: GraphFormat, path: &Path) -> Result<()> {
    fs::write(path, render_filtered(g, format)).map_err(|e| Error::io(path, e))
}

pub fn export_lon(lon: &Lon, format: GraphFormat, path: &Path) -> Result<()> {
    fs::write(path, render_lon(lon, format)).map_err(|e| Error::io(path, e))
}

/// Node CSV `id,cost,basin_size`.
pub fn write_node_csv(nodes: &[LocalOptimum], path: &Path) -> Result<()> {
    let mut out = String::from("id,cost,basin_size\n");
    for o in nodes {
        writeln!(out, "{},{},{}", o.id, o.cost, o.basin_size).unwrap();
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads an edge CSV `src,dst,weight`.
pub fn read_edge_csv(path: &Path) -> Result<Vec<(u32, u32, f64)>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut edges = Vec::new();
    for rec in reader.deserialize() {
        let (src, dst, w): (u32, u32, f64) = rec?;
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::Config(format!("edge {src}-{dst} has invalid weight {w}")));
        }
        edges.push((src, dst, w));
    }
    Ok(edges)
}

/// Number of rows of a node CSV.
pub fn read_node_count(path: &Path) -> Result<usize> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut count = 0;
    for rec in reader.records() {
        rec?;
        count += 1;
    }
    Ok(count)
}
