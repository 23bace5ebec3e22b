//! Batch runs over seeded instances of both classes, records CSV and
//! summaries.
//!
//! Instance `i` of a class gets the seed `mix(master_seed, (c << 32) | i)`
//! where `c` is 0 for uniform and 1 for real-like; spin-glass run `k` on that
//! instance uses `mix(instance_seed, k)`. See [`crate::rng`] for `mix`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::{
    greedy_modularity, spinglass_communities, Algorithm, Partition, SpinglassConfig, WeightedGraph,
};
use crate::error::{Error, Result};
use crate::generate::{generate, GeneratorConfig};
use crate::landscape::{check_exhaustive_size, enumerate_basins};
use crate::lon::{build_lon, filter_lon};
use crate::qap::ClassTag;
use crate::rng::mix;
use crate::stats::{five_number, mann_whitney_greater, FiveNumber, MannWhitney};

/// Smallest group size for which the U test is run in summaries.
pub const MIN_TEST_GROUP: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub classes: Vec<ClassTag>,
    pub n_uniform: usize,
    pub n_real_like: usize,
    pub count: usize,
    pub master_seed: u64,
    pub alpha: f64,
    pub algorithms: Vec<Algorithm>,
    pub spinglass_seeds: usize,
    pub workers: usize,
    pub out_dir: Option<PathBuf>,
    pub uniform_max: i64,
    pub rl_grid: f64,
    pub rl_exponent: f64,
    pub rl_sparsity: f64,
    pub spinglass: SpinglassConfig,
}

impl Default for ExperimentConfig {
    /// The published study design: 200 uniform instances of size 9 and 200
    /// real-like instances of size 11.
    fn default() -> Self {
        ExperimentConfig {
            classes: vec![ClassTag::Uniform, ClassTag::RealLike],
            n_uniform: 9,
            n_real_like: 11,
            count: 200,
            master_seed: 1,
            alpha: 0.05,
            algorithms: vec![Algorithm::Greedy, Algorithm::Spinglass],
            spinglass_seeds: 1,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            out_dir: None,
            uniform_max: 100,
            rl_grid: 100.0,
            rl_exponent: 2.0,
            rl_sparsity: 0.0,
            spinglass: SpinglassConfig::default(),
        }
    }
}

fn class_code(class: ClassTag) -> u64 {
    match class {
        ClassTag::Uniform => 0,
        ClassTag::RealLike => 1,
        ClassTag::External => 2,
    }
}

pub fn instance_seed(master_seed: u64, class: ClassTag, index: usize) -> u64 {
    mix(master_seed, (class_code(class) << 32) | index as u64)
}

pub fn spinglass_seed(instance_seed: u64, run: usize) -> u64 {
    mix(instance_seed, run as u64)
}

impl ExperimentConfig {
    pub fn size_for(&self, class: ClassTag) -> usize {
        match class {
            ClassTag::Uniform => self.n_uniform,
            _ => self.n_real_like,
        }
    }

    pub fn generator(&self, class: ClassTag, index: usize) -> GeneratorConfig {
        GeneratorConfig {
            n: self.size_for(class),
            seed: instance_seed(self.master_seed, class, index),
            class,
            uniform_max: self.uniform_max,
            rl_grid: self.rl_grid,
            rl_exponent: self.rl_exponent,
            rl_sparsity: self.rl_sparsity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 1 {
            return Err(Error::Config("count must be at least 1".into()));
        }
        if self.classes.is_empty() || self.classes.contains(&ClassTag::External) {
            return Err(Error::Config("classes must be a non-empty subset of {uniform, real_like}".into()));
        }
        if self.algorithms.is_empty() || self.algorithms.contains(&Algorithm::External) {
            return Err(Error::Config("algorithms must be a non-empty subset of {greedy, spinglass}".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if self.spinglass_seeds < 1 {
            return Err(Error::Config("spinglass_seeds must be at least 1".into()));
        }
        for &class in &self.classes {
            self.generator(class, 0).validate()?;
        }
        self.spinglass.validate()
    }

    /// Applies `key = value` lines. `#` starts a comment; list values are
    /// comma-separated and may be wrapped in `[...]`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            let line_offset = offset;
            offset += line.len();
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::parse(line_offset, format!("expected key = value, found {content:?}")))?;
            let key = key.trim();
            let value = value.trim().trim_matches('"');
            cfg.set(key, value)
                .map_err(|msg| Error::parse(line_offset, format!("{key}: {msg}")))?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("cannot parse {v:?}"))
        }
        fn list(v: &str) -> impl Iterator<Item = &str> {
            v.trim_start_matches('[')
                .trim_end_matches(']')
                .split(',')
                .map(|s| s.trim().trim_matches('"'))
                .filter(|s| !s.is_empty())
        }
        match key {
            "classes" => {
                self.classes = list(value)
                    .map(|s| ClassTag::parse(s).ok_or_else(|| format!("unknown class {s:?}")))
                    .collect::<std::result::Result<_, _>>()?
            }
            "algorithms" => {
                self.algorithms = list(value)
                    .map(|s| Algorithm::parse(s).ok_or_else(|| format!("unknown algorithm {s:?}")))
                    .collect::<std::result::Result<_, _>>()?
            }
            "n" => {
                let n = num(value)?;
                self.n_uniform = n;
                self.n_real_like = n;
            }
            "n_uniform" | "n.uniform" => self.n_uniform = num(value)?,
            "n_real_like" | "n.real_like" => self.n_real_like = num(value)?,
            "count" => self.count = num(value)?,
            "master_seed" | "seed" => self.master_seed = num(value)?,
            "alpha" => self.alpha = num(value)?,
            "spinglass_seeds" => self.spinglass_seeds = num(value)?,
            "workers" => self.workers = num::<usize>(value)?.max(1),
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            "uniform_max" => self.uniform_max = num(value)?,
            "rl_grid" => self.rl_grid = num(value)?,
            "rl_exponent" => self.rl_exponent = num(value)?,
            "rl_sparsity" => self.rl_sparsity = num(value)?,
            "gamma" => self.spinglass.gamma = num(value)?,
            "q_max" => self.spinglass.q_max = num(value)?,
            "cooling_factor" => self.spinglass.cooling_factor = num(value)?,
            "sweeps_per_t" => self.spinglass.sweeps_per_t = Some(num(value)?),
            "t_start" => self.spinglass.t_start = Some(num(value)?),
            "t_stop" => self.spinglass.t_stop = Some(num(value)?),
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub class: String,
    pub n: usize,
    pub instance_seed: u64,
    pub algorithm: String,
    pub alpha: f64,
    pub n_optima: usize,
    pub n_edges_filtered: usize,
    pub n_communities: Option<usize>,
    pub q: Option<f64>,
    pub wall_ms: u64,
    pub error: Option<String>,
}

/// The parts of the pipeline a detector run needs.
struct Prepared {
    graph: WeightedGraph,
    n_optima: usize,
    n_edges: usize,
    prep_ms: u64,
}

fn prepare(cfg: &ExperimentConfig, class: ClassTag, index: usize, workers: usize) -> Result<Prepared> {
    let start = Instant::now();
    let inst = generate(&cfg.generator(class, index))?;
    let bm = enumerate_basins(&inst, workers)?;
    let lon = build_lon(&inst, &bm, workers);
    let filtered = filter_lon(&lon, cfg.alpha);
    Ok(Prepared {
        graph: WeightedGraph::from_filtered(&filtered),
        n_optima: filtered.num_nodes(),
        n_edges: filtered.num_edges(),
        prep_ms: start.elapsed().as_millis() as u64,
    })
}

fn error_tag(e: &Error) -> String {
    match e {
        Error::UndefinedModularity => "undefined_modularity".into(),
        other => other.to_string(),
    }
}

fn run_instance(cfg: &ExperimentConfig, class: ClassTag, index: usize, workers: usize) -> Result<Vec<ExperimentRecord>> {
    let gen = cfg.generator(class, index);
    let prepared = prepare(cfg, class, index, workers)?;
    let mut out = Vec::new();
    for &alg in &cfg.algorithms {
        let runs: Vec<Option<u64>> = match alg {
            Algorithm::Spinglass => (0..cfg.spinglass_seeds).map(|k| Some(spinglass_seed(gen.seed, k))).collect(),
            _ => vec![None],
        };
        for seed in runs {
            let start = Instant::now();
            let result: Result<Partition> = match (alg, seed) {
                (Algorithm::Spinglass, Some(s)) => spinglass_communities(&prepared.graph, s, &cfg.spinglass),
                _ => greedy_modularity(&prepared.graph),
            };
            let wall_ms = prepared.prep_ms + start.elapsed().as_millis() as u64;
            let (n_communities, q, error) = match result {
                Ok(p) => (Some(p.num_communities()), Some(p.q), None),
                Err(e) => (None, None, Some(error_tag(&e))),
            };
            out.push(ExperimentRecord {
                class: class.to_string(),
                n: gen.n,
                instance_seed: gen.seed,
                algorithm: alg.to_string(),
                alpha: cfg.alpha,
                n_optima: prepared.n_optima,
                n_edges_filtered: prepared.n_edges,
                n_communities,
                q,
                wall_ms,
                error,
            });
        }
    }
    Ok(out)
}

/// Runs every (class, instance, detector) combination. Records come back in
/// (class, index, algorithm, run) order regardless of scheduling. When
/// `cfg.out_dir` is set, `records.csv` and `summary.csv` are written there.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    for &class in &cfg.classes {
        check_exhaustive_size(cfg.size_for(class))?;
    }
    let tasks: Vec<(ClassTag, usize)> = cfg
        .classes
        .iter()
        .flat_map(|&c| (0..cfg.count).map(move |i| (c, i)))
        .collect();
    let workers = cfg.workers.max(1);
    let inner = (workers / tasks.len()).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let per_task: Vec<Result<Vec<ExperimentRecord>>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(class, index)| run_instance(cfg, class, index, inner))
            .collect()
    });
    let mut records = Vec::new();
    for r in per_task {
        records.extend(r?);
    }
    if let Some(dir) = &cfg.out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_records(&records, &dir.join("records.csv"))?;
        write_summary(&summarize(&records), &dir.join("summary.csv"))?;
    }
    Ok(records)
}

pub fn write_records(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let records = reader.deserialize().collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub class: String,
    pub algorithm: String,
    pub stats: FiveNumber,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassComparison {
    pub algorithm: String,
    pub n_real_like: usize,
    pub n_uniform: usize,
    /// `None` when either group has fewer than [`MIN_TEST_GROUP`] values.
    pub test: Option<MannWhitney>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    pub groups: Vec<GroupSummary>,
    pub comparisons: Vec<ClassComparison>,
}

impl Summary {
    pub fn group(&self, class: &str, algorithm: &str) -> Option<&GroupSummary> {
        self.groups.iter().find(|g| g.class == class && g.algorithm == algorithm)
    }

    pub fn comparison(&self, algorithm: &str) -> Option<&ClassComparison> {
        self.comparisons.iter().find(|c| c.algorithm == algorithm)
    }
}

/// Five-number summaries of `q` per (class, algorithm) and, per algorithm,
/// the one-sided U test of `Q(real_like) > Q(uniform)`. Rows without `q`
/// are ignored.
pub fn summarize(records: &[ExperimentRecord]) -> Summary {
    let mut groups: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for r in records {
        if let Some(q) = r.q {
            groups.entry((r.class.clone(), r.algorithm.clone())).or_default().push(q);
        }
    }
    let mut summary = Summary::default();
    for ((class, algorithm), qs) in &groups {
        if let Some(stats) = five_number(qs) {
            summary.groups.push(GroupSummary {
                class: class.clone(),
                algorithm: algorithm.clone(),
                stats,
            });
        }
    }
    let algorithms: Vec<String> = {
        let mut a: Vec<String> = records.iter().map(|r| r.algorithm.clone()).collect();
        a.sort();
        a.dedup();
        a
    };
    let empty = Vec::new();
    for alg in algorithms {
        let rl = groups.get(&("real_like".to_string(), alg.clone())).unwrap_or(&empty);
        let uni = groups.get(&("uniform".to_string(), alg.clone())).unwrap_or(&empty);
        if rl.is_empty() || uni.is_empty() {
            log::warn!("{alg}: a class has no usable records, comparison omitted");
            continue;
        }
        let test = if rl.len() >= MIN_TEST_GROUP && uni.len() >= MIN_TEST_GROUP {
            Some(mann_whitney_greater(rl, uni))
        } else {
            log::warn!("{alg}: fewer than {MIN_TEST_GROUP} values in a class, U test skipped");
            None
        };
        summary.comparisons.push(ClassComparison {
            algorithm: alg,
            n_real_like: rl.len(),
            n_uniform: uni.len(),
            test,
        });
    }
    summary
}

/// One CSV with a `kind` column: `five_number` rows per group, then
/// `mann_whitney` rows per algorithm (class column `real_like>uniform`).
pub fn format_summary(s: &Summary) -> String {
    let mut out = String::from("kind,class,algorithm,count,min,q1,median,q3,max,u,p_value,method\n");
    for g in &s.groups {
        let f = &g.stats;
        out.push_str(&format!(
            "five_number,{},{},{},{},{},{},{},{},,,\n",
            g.class, g.algorithm, f.count, f.min, f.q1, f.median, f.q3, f.max
        ));
    }
    for c in &s.comparisons {
        let (u, p, m) = match &c.test {
            Some(t) => (t.u.to_string(), t.p_value.to_string(), format!("{:?}", t.method).to_lowercase()),
            None => (String::new(), String::new(), "skipped".to_string()),
        };
        out.push_str(&format!(
            "mann_whitney,real_like>uniform,{},{},,,,,,{u},{p},{m}\n",
            c.algorithm,
            c.n_real_like + c.n_uniform
        ));
    }
    out
}

pub fn write_summary(s: &Summary, path: &Path) -> Result<()> {
    fs::write(path, format_summary(s)).map_err(|e| Error::io(path, e))
}
