//! Potts-model community detection by simulated annealing.
//!
//! Each node carries one of `q_max` spin states. The energy is
//!
//! ```text
//! H(σ) = -Σ_{i<j} [w_ij - γ k_i k_j / 2m] δ(σ_i, σ_j)
//! ```
//!
//! which at `γ = 1` equals `-m (Q(σ) + Σ_i k_i² / 4m²)`, so its ground state
//! is a modularity maximum. Single-spin Metropolis moves are proposed as
//! (uniform active node, uniform different spin). Temperatures fall
//! geometrically; a run ends after the first temperature step in which no
//! energy-changing move is accepted, when the temperature drops below
//! `t_stop`, or after `max_steps` steps. Nodes of zero degree do not take part
//! and end up as singleton communities.

use super::{modularity, relabel_dense, Algorithm, Partition, WeightedGraph};
use crate::error::{Error, Result};
use crate::rng::Xoshiro256StarStar;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinglassConfig {
    pub gamma: f64,
    pub q_max: usize,
    /// Initial temperature. `None` calibrates it so that at least
    /// `target_acceptance` of random proposals from the initial state would
    /// be accepted.
    pub t_start: Option<f64>,
    pub cooling_factor: f64,
    /// Proposals per temperature step. `None` means `50 * |V|`.
    pub sweeps_per_t: Option<usize>,
    pub t_stop: Option<f64>,
    pub target_acceptance: f64,
    pub max_steps: usize,
}

impl Default for SpinglassConfig {
    fn default() -> Self {
        SpinglassConfig {
            gamma: 1.0,
            q_max: 25,
            t_start: None,
            cooling_factor: 0.99,
            sweeps_per_t: None,
            t_stop: None,
            target_acceptance: 0.9,
            max_steps: 100_000,
        }
    }
}

impl SpinglassConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return bad("gamma must be finite and non-negative");
        }
        if self.q_max == 0 {
            return bad("q_max must be at least 1");
        }
        if let Some(t) = self.t_start {
            if !(t.is_finite() && t > 0.0) {
                return bad("t_start must be positive");
            }
        }
        if !(self.cooling_factor > 0.0 && self.cooling_factor < 1.0) {
            return bad("cooling_factor must lie in (0, 1)");
        }
        if self.sweeps_per_t == Some(0) {
            return bad("sweeps_per_t must be positive");
        }
        if let Some(t) = self.t_stop {
            if !(t.is_finite() && t >= 0.0) {
                return bad("t_stop must be non-negative");
            }
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return bad("target_acceptance must lie in (0, 1)");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        Ok(())
    }
}

/// Potts energy of `spins` (any labels) at resolution `gamma`.
pub fn hamiltonian(g: &WeightedGraph, spins: &[usize], gamma: f64) -> f64 {
    assert_eq!(spins.len(), g.num_nodes());
    let two_m = g.total_weight();
    let k = spins.iter().max().map_or(0, |&m| m + 1);
    let mut internal = vec![0.0; k];
    let mut tot = vec![0.0; k];
    let mut sq = vec![0.0; k];
    for i in 0..g.num_nodes() {
        let s = spins[i];
        let d = g.degree(i);
        tot[s] += d;
        sq[s] += d * d;
        for &(j, w) in g.neighbors(i) {
            if j > i && spins[j] == s {
                internal[s] += w;
            }
        }
    }
    // Σ_{i<j, same spin} k_i k_j = (K_s² - Σ k_i²) / 2
    -(0..k)
        .map(|s| internal[s] - gamma * (tot[s] * tot[s] - sq[s]) / (2.0 * two_m))
        .sum::<f64>()
}

struct Annealer<'a> {
    g: &'a WeightedGraph,
    gamma: f64,
    q_max: usize,
    two_m: f64,
    active: Vec<usize>,
    spins: Vec<usize>,
    /// `to_spin[i * q_max + s]`: weight from node `i` to nodes in spin `s`.
    to_spin: Vec<f64>,
    spin_degree: Vec<f64>,
    rng: Xoshiro256StarStar,
}

impl<'a> Annealer<'a> {
    fn new(g: &'a WeightedGraph, cfg: &SpinglassConfig, seed: u64) -> Self {
        let n = g.num_nodes();
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        let active: Vec<usize> = (0..n).filter(|&i| g.degree(i) > 0.0).collect();
        let mut spins = vec![0; n];
        for &i in &active {
            spins[i] = rng.below(cfg.q_max as u64) as usize;
        }
        let mut a = Annealer {
            g,
            gamma: cfg.gamma,
            q_max: cfg.q_max,
            two_m: g.total_weight(),
            active,
            spins,
            to_spin: vec![0.0; n * cfg.q_max],
            spin_degree: vec![0.0; cfg.q_max],
            rng,
        };
        a.refresh();
        a
    }

    /// Recomputes the incremental tables from scratch to shed rounding drift.
    fn refresh(&mut self) {
        self.to_spin.iter_mut().for_each(|x| *x = 0.0);
        self.spin_degree.iter_mut().for_each(|x| *x = 0.0);
        for &i in &self.active {
            self.spin_degree[self.spins[i]] += self.g.degree(i);
            for &(j, w) in self.g.neighbors(i) {
                self.to_spin[j * self.q_max + self.spins[i]] += w;
            }
        }
    }

    fn energy(&self) -> f64 {
        hamiltonian(self.g, &self.spins, self.gamma)
    }

    fn delta(&self, i: usize, to: usize) -> f64 {
        let from = self.spins[i];
        let k = self.g.degree(i);
        let row = &self.to_spin[i * self.q_max..(i + 1) * self.q_max];
        let scale = self.gamma * k / self.two_m;
        (row[from] - scale * (self.spin_degree[from] - k)) - (row[to] - scale * self.spin_degree[to])
    }

    fn apply(&mut self, i: usize, to: usize) {
        let from = self.spins[i];
        let k = self.g.degree(i);
        self.spin_degree[from] -= k;
        self.spin_degree[to] += k;
        for &(j, w) in self.g.neighbors(i) {
            self.to_spin[j * self.q_max + from] -= w;
            self.to_spin[j * self.q_max + to] += w;
        }
        self.spins[i] = to;
    }

    fn propose(&mut self) -> (usize, usize) {
        let i = self.active[self.rng.below(self.active.len() as u64) as usize];
        let mut to = self.rng.below(self.q_max as u64 - 1) as usize;
        if to >= self.spins[i] {
            to += 1;
        }
        (i, to)
    }

    fn calibrate(&mut self, target: f64, samples: usize) -> f64 {
        let deltas: Vec<f64> = (0..samples)
            .map(|_| {
                let (i, to) = self.propose();
                self.delta(i, to)
            })
            .filter(|d| *d > 0.0)
            .collect();
        if deltas.is_empty() {
            return self.two_m;
        }
        let acceptance = |t: f64| {
            let uphill: f64 = deltas.iter().map(|d| (-d / t).exp()).sum();
            (uphill + (samples - deltas.len()) as f64) / samples as f64
        };
        let mut t = deltas.iter().sum::<f64>() / deltas.len() as f64;
        while acceptance(t) < target {
            t *= 1.5;
        }
        t
    }
}

pub fn spinglass_communities(g: &WeightedGraph, seed: u64, cfg: &SpinglassConfig) -> Result<Partition> {
    cfg.validate()?;
    g.require_edges()?;
    let n = g.num_nodes();

    let mut labels: Vec<usize> = vec![0; n];
    if cfg.q_max > 1 {
        let mut ann = Annealer::new(g, cfg, seed);
        let sweeps = cfg.sweeps_per_t.unwrap_or(50 * n);
        let mut t = match cfg.t_start {
            Some(t) => t,
            None => ann.calibrate(cfg.target_acceptance, sweeps.min(10_000)),
        };
        let t_stop = cfg.t_stop.unwrap_or(0.0);
        let eps = 1e-12 * ann.two_m;

        let mut h = ann.energy();
        let mut best_h = h;
        let mut best = ann.spins.clone();
        for _ in 0..cfg.max_steps {
            let mut changed = 0usize;
            for _ in 0..sweeps {
                let (i, to) = ann.propose();
                let d = ann.delta(i, to);
                if d <= 0.0 || ann.rng.next_f64() < (-d / t).exp() {
                    ann.apply(i, to);
                    h += d;
                    if d.abs() > eps {
                        changed += 1;
                    }
                    if h < best_h - eps {
                        best_h = h;
                        best.copy_from_slice(&ann.spins);
                    }
                }
            }
            if changed == 0 || t < t_stop {
                break;
            }
            t *= cfg.cooling_factor;
            ann.refresh();
            h = ann.energy();
        }
        labels = best;
    }

    // zero-degree nodes become singletons
    for i in 0..n {
        if g.degree(i) == 0.0 {
            labels[i] = cfg.q_max + i;
        }
    }
    let assignment = relabel_dense(&labels);
    let q = modularity(g, &assignment)?;
    Ok(Partition {
        assignment,
        q,
        algorithm: Algorithm::Spinglass,
        seed: Some(seed),
    })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    fn naive_hamiltonian(g: &WeightedGraph, spins: &[usize], gamma: f64) -> f64 {
        let n = g.num_nodes();
        let two_m = g.total_weight();
        let mut w = vec![vec![0.0; n]; n];
        for (i, j, x) in g.edges() {
            w[i][j] = x;
            w[j][i] = x;
        }
        let mut h = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                if spins[i] == spins[j] {
                    h -= w[i][j] - gamma * g.degree(i) * g.degree(j) / two_m;
                }
            }
        }
        h
    }

    #[test]
    fn hamiltonian_matches_pair_sum() {
        let g = WeightedGraph::from_edges(5, [(0, 1, 0.5), (1, 2, 2.0), (2, 3, 1.0), (0, 3, 0.25), (3, 4, 3.0)]);
        for spins in [[0, 0, 0, 0, 0], [0, 1, 2, 3, 4], [0, 0, 1, 1, 0], [2, 0, 2, 1, 1]] {
            for gamma in [0.5, 1.0, 2.0] {
                let a = hamiltonian(&g, &spins, gamma);
                let b = naive_hamiltonian(&g, &spins, gamma);
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn incremental_delta_matches_energy_difference() {
        let g = WeightedGraph::from_edges(
            6,
            [(0, 1, 0.5), (1, 2, 2.0), (2, 3, 1.0), (0, 3, 0.25), (3, 4, 3.0), (4, 5, 0.1), (1, 5, 0.7)],
        );
        let cfg = SpinglassConfig {
            q_max: 4,
            ..SpinglassConfig::default()
        };
        let mut ann = Annealer::new(&g, &cfg, 9);
        for _ in 0..200 {
            let (i, to) = ann.propose();
            let before = ann.energy();
            let d = ann.delta(i, to);
            ann.apply(i, to);
            assert!((ann.energy() - before - d).abs() < 1e-12);
        }
    }

    #[test]
    fn triangles_found_and_deterministic() {
        let g = two_triangles();
        let cfg = SpinglassConfig::default();
        let p = spinglass_communities(&g, 3, &cfg).unwrap();
        assert!((p.q - 0.5).abs() < 1e-12);
        assert_eq!(p.assignment, vec![0, 0, 0, 1, 1, 1]);
        assert_eq!(p, spinglass_communities(&g, 3, &cfg).unwrap());
        assert_eq!(p.seed, Some(3));
    }

    #[test]
    fn single_spin_state_gives_one_community() {
        let cfg = SpinglassConfig {
            q_max: 1,
            ..SpinglassConfig::default()
        };
        let p = spinglass_communities(&triangle(), 0, &cfg).unwrap();
        assert_eq!(p.assignment, vec![0, 0, 0]);
        assert_eq!(p.q, 0.0);
    }

    #[test]
    fn isolated_nodes_are_singletons() {
        let g = WeightedGraph::from_edges(
            8,
            [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (4, 5, 1.0), (5, 6, 1.0), (4, 6, 1.0)],
        );
        let p = spinglass_communities(&g, 1, &SpinglassConfig::default()).unwrap();
        assert_eq!(p.assignment, vec![0, 0, 0, 1, 2, 2, 2, 3]);
    }

    #[test]
    fn rejects_bad_schedule_and_empty_graph() {
        let g = triangle();
        for cfg in [
            SpinglassConfig { cooling_factor: 0.0, ..Default::default() },
            SpinglassConfig { cooling_factor: 1.0, ..Default::default() },
            SpinglassConfig { t_start: Some(-1.0), ..Default::default() },
            SpinglassConfig { sweeps_per_t: Some(0), ..Default::default() },
        ] {
            assert!(matches!(spinglass_communities(&g, 0, &cfg), Err(Error::Config(_))));
        }
        let empty = WeightedGraph::from_edges(3, []);
        assert!(matches!(
            spinglass_communities(&empty, 0, &SpinglassConfig::default()),
            Err(Error::UndefinedModularity)
        ));
    }
}
