//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Set `QAP_LON_SKIP_SMOKE=1` to skip the n = 9 scale smoke run.

mod common;

use std::time::{Duration, Instant};

use common::*;
use qap_lon::community::{
    greedy_modularity, hamiltonian, modularity, spinglass_communities, SpinglassConfig, WeightedGraph,
};
use qap_lon::experiment::{run_experiment, summarize, write_records, ExperimentConfig, ExperimentRecord};
use qap_lon::generate::{generate, GeneratorConfig};
use qap_lon::landscape::enumerate_basins;
use qap_lon::lon::{build_lon, filter_lon};
use qap_lon::qap::factorial;
use qap_lon::rng::Xoshiro256StarStar;
use qap_lon::ClassTag;

type Outcome = Result<String, String>;

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn c1_oracle_equivalence() -> Outcome {
    for class in [ClassTag::Uniform, ClassTag::RealLike] {
        for k in 0..20u64 {
            let inst = generate(&GeneratorConfig::new(class, 5, 1000 + k)).unwrap();
            let o = oracle_landscape(&inst);
            let bm = enumerate_basins(&inst, workers().max(2)).unwrap();
            let lon = build_lon(&inst, &bm, workers().max(2));
            compare_basins(&bm, &o)
                .and_then(|_| compare_weights(&lon, &o))
                .map_err(|e| format!("{class} seed {}: {e}", 1000 + k))?;
        }
    }
    Ok("40 instances identical to the naive oracle".into())
}

fn c2_probability_conservation() -> Outcome {
    let mut nodes = 0;
    let mut worst: f64 = 0.0;
    for k in 0..50u64 {
        let n = 5 + (k % 3) as usize;
        let class = if k % 2 == 0 { ClassTag::Uniform } else { ClassTag::RealLike };
        let inst = generate(&GeneratorConfig::new(class, n, 2000 + k)).unwrap();
        let bm = enumerate_basins(&inst, workers()).unwrap();
        let lon = build_lon(&inst, &bm, workers());
        let total: u64 = bm.optima.iter().map(|o| o.basin_size).sum();
        if total != factorial(n) {
            return Err(format!("instance {k}: basin sizes sum to {total}, not {n}!"));
        }
        let sums = lon.row_count_sums();
        for (i, opt) in bm.optima.iter().enumerate() {
            if sums[i] != opt.basin_size * lon.moves_per_config() {
                return Err(format!("instance {k}, node {i}: count row sum {} != |b|·moves", sums[i]));
            }
            let w: f64 = (0..lon.num_nodes() as u32).map(|j| lon.weight(i as u32, j)).sum();
            worst = worst.max((w - 1.0).abs());
        }
        nodes += bm.num_optima();
    }
    if worst > 1e-9 {
        return Err(format!("float row sum off by {worst:e}"));
    }
    Ok(format!("{nodes} nodes, max |Σw - 1| = {worst:e}"))
}

fn two_triangles() -> WeightedGraph {
    WeightedGraph::from_edges(6, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)])
}

/// Every set partition of `0..n` as restricted growth strings.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for c in 0..=max {
            cur.push(c);
            rec(cur, max.max(c + 1), n, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), 0, n, &mut out);
    out
}

fn c3_modularity_ground_truths() -> Outcome {
    let g = two_triangles();
    let best = set_partitions(6)
        .into_iter()
        .map(|p| (modularity(&g, &p).unwrap(), p))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap();
    if (best.0 - 0.5).abs() > 1e-12 || best.1 != vec![0, 0, 0, 1, 1, 1] {
        return Err(format!("exhaustive optimum {:?} with Q = {}", best.1, best.0));
    }
    let greedy = greedy_modularity(&g).unwrap();
    if greedy.assignment != vec![0, 0, 0, 1, 1, 1] || (greedy.q - 0.5).abs() > 1e-12 {
        return Err(format!("greedy gave {:?}, Q = {}", greedy.assignment, greedy.q));
    }
    let hits = (0..20u64)
        .filter(|&s| {
            let p = spinglass_communities(&g, s, &SpinglassConfig::default()).unwrap();
            (p.q - 0.5).abs() <= 1e-12
        })
        .count();
    if hits < 19 {
        return Err(format!("spin-glass reached Q = 0.5 in {hits}/20 seeds"));
    }
    let all_in_one = modularity(&g, &[0; 6]).unwrap();
    if all_in_one.abs() > 1e-12 {
        return Err(format!("all-in-one Q = {all_in_one}"));
    }
    let t = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
    let singles = modularity(&t, &[0, 1, 2]).unwrap();
    if (singles + 1.0 / 3.0).abs() > 1e-12 {
        return Err(format!("triangle singletons Q = {singles}"));
    }
    Ok(format!("greedy Q = 0.5, spin-glass {hits}/20 seeds at Q = 0.5"))
}

fn c4_hamiltonian_identity() -> Outcome {
    let mut rng = Xoshiro256StarStar::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let n = 4 + rng.below(12) as usize;
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.next_f64() < 0.5 {
                    edges.push((i, j, 0.01 + 10.0 * rng.next_f64()));
                }
            }
        }
        if edges.is_empty() {
            edges.push((0, 1, 1.0));
        }
        let g = WeightedGraph::from_edges(n, edges);
        let m = g.total_weight() / 2.0;
        let sum_k2: f64 = (0..n).map(|i| g.degree(i).powi(2)).sum();
        for _ in 0..100 {
            let q_max = 1 + rng.below(n as u64) as usize;
            let spins: Vec<usize> = (0..n).map(|_| rng.below(q_max as u64) as usize).collect();
            let q = modularity(&g, &spins).unwrap();
            let via_h = -hamiltonian(&g, &spins, 1.0) / m - sum_k2 / (4.0 * m * m);
            worst = worst.max((q - via_h).abs());
        }
    }
    if worst > 1e-12 {
        return Err(format!("max |Q - (-H/m - Σk²/4m²)| = {worst:e}"));
    }
    Ok(format!("1000 partitions, max deviation {worst:e}"))
}

fn trend_config() -> ExperimentConfig {
    ExperimentConfig::parse(
        "classes = uniform, real_like\nn = 8\ncount = 30\nalpha = 0.05\nalgorithms = greedy, spinglass\nmaster_seed = 1\n",
    )
    .unwrap()
}

fn c5_trend(records: &[ExperimentRecord]) -> Outcome {
    let summary = summarize(records);
    let mut lines = Vec::new();
    let mut ok = true;
    for alg in ["greedy", "spinglass"] {
        let rl = summary.group("real_like", alg).ok_or(format!("{alg}: no real_like results"))?;
        let uni = summary.group("uniform", alg).ok_or(format!("{alg}: no uniform results"))?;
        let p = summary
            .comparison(alg)
            .and_then(|c| c.test.as_ref())
            .map_or(f64::NAN, |t| t.p_value);
        let holds = rl.stats.median > uni.stats.median && p < 0.05;
        ok &= holds;
        lines.push(format!(
            "{alg}: median real_like {:.4} vs uniform {:.4}, p = {p:.4}; max Q real_like {:.4}, uniform {:.4} (published 0.79 / 0.53)",
            rl.stats.median, uni.stats.median, rl.stats.max, uni.stats.max
        ));
    }
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    let msg = format!("{}; {failed} failed records", lines.join("; "));
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c6_scale_smoke() -> Outcome {
    if std::env::var_os("QAP_LON_SKIP_SMOKE").is_some() {
        return Ok("skipped (QAP_LON_SKIP_SMOKE set)".into());
    }
    let start = Instant::now();
    let inst = generate(&GeneratorConfig::new(ClassTag::Uniform, 9, 9)).unwrap();
    let bm = enumerate_basins(&inst, workers()).unwrap();
    let f = filter_lon(&build_lon(&inst, &bm, workers()), 0.05);
    let g = WeightedGraph::from_filtered(&f);
    let greedy = greedy_modularity(&g).unwrap();
    let spin = spinglass_communities(&g, 9, &SpinglassConfig::default()).unwrap();
    let took = start.elapsed();
    let msg = format!(
        "n = 9: {} optima, {} edges, Q greedy {:.4} / spin-glass {:.4} in {:.1} s",
        bm.num_optima(),
        f.num_edges(),
        greedy.q,
        spin.q,
        took.as_secs_f64()
    );
    if took < Duration::from_secs(300) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Records CSV with the timing column removed.
fn untimed_csv(records: &[ExperimentRecord]) -> String {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.csv");
    write_records(records, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|&h| h == "wall_ms").unwrap();
    text.lines()
        .map(|line| {
            let mut fields: Vec<&str> = line.split(',').collect();
            fields.remove(col);
            fields.join(",") + "\n"
        })
        .collect()
}

fn c7_determinism(first: &[ExperimentRecord]) -> Outcome {
    let second = run_experiment(&trend_config()).map_err(|e| e.to_string())?;
    let (a, b) = (untimed_csv(first), untimed_csv(&second));
    if a == b {
        Ok(format!("{} records, {} bytes identical", second.len(), a.len()))
    } else {
        Err("records CSV differs between runs".into())
    }
}

fn main() {
    let mut failures = 0;
    let mut report = |name: &str, start: Instant, outcome: Outcome| {
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS  {name} [{secs:.1} s]: {msg}"),
            Err(msg) => {
                failures += 1;
                println!("FAIL  {name} [{secs:.1} s]: {msg}");
            }
        }
    };

    let t = Instant::now();
    report("1 oracle equivalence", t, c1_oracle_equivalence());
    let t = Instant::now();
    report("2 probability conservation", t, c2_probability_conservation());
    let t = Instant::now();
    report("3 modularity ground truths", t, c3_modularity_ground_truths());
    let t = Instant::now();
    report("4 spin-glass/modularity identity", t, c4_hamiltonian_identity());
    let t = Instant::now();
    let records = run_experiment(&trend_config());
    match &records {
        Ok(r) => report("5 class trend at n = 8", t, c5_trend(r)),
        Err(e) => report("5 class trend at n = 8", t, Err(e.to_string())),
    }
    let t = Instant::now();
    report("6 scale smoke at n = 9", t, c6_scale_smoke());
    let t = Instant::now();
    match &records {
        Ok(r) => report("7 determinism", t, c7_determinism(r)),
        Err(_) => report("7 determinism", t, Err("criterion 5 run did not complete".into())),
    }

    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
