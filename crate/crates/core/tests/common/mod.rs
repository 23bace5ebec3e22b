//! Brute-force oracles shared by the integration tests. Nothing here calls
//! the library's cost, delta, rank, climb or counting code.
#![allow(dead_code)]

use std::collections::HashMap;

use qap_lon::{BasinMap, Lon, QapInstance};

pub fn naive_cost(inst: &QapInstance, p: &[usize]) -> i64 {
    let n = inst.n();
    let (a, b) = (inst.a.as_slice(), inst.b.as_slice());
    let mut s = 0;
    for i in 0..n {
        for j in 0..n {
            s += a[i * n + j] * b[p[i] * n + p[j]];
        }
    }
    s
}

/// All permutations of `0..n` in lexicographic order, by recursive
/// selection of the smallest unused item first.
pub fn lexicographic_permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                rec(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn swap_neighbors(p: &[usize]) -> Vec<Vec<usize>> {
    let n = p.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut q = p.to_vec();
            q.swap(i, j);
            out.push(q);
        }
    }
    out
}

/// Best-improvement climb that recomputes every neighbor's cost from
/// scratch at each step.
pub fn naive_climb(inst: &QapInstance, start: &[usize]) -> Vec<usize> {
    let mut cur = start.to_vec();
    loop {
        let here = naive_cost(inst, &cur);
        let mut best: Option<(i64, Vec<usize>)> = None;
        for q in swap_neighbors(&cur) {
            let c = naive_cost(inst, &q);
            if c < here && best.as_ref().map_or(true, |(bc, _)| c < *bc) {
                best = Some((c, q));
            }
        }
        match best {
            Some((_, q)) => cur = q,
            None => return cur,
        }
    }
}

pub struct OracleLandscape {
    /// Optimum index per lexicographic configuration index.
    pub assignment: Vec<u32>,
    /// Optimum configurations, ascending lexicographic index.
    pub optima: Vec<Vec<usize>>,
    pub optimum_index: Vec<usize>,
    pub costs: Vec<i64>,
    pub basin_sizes: Vec<u64>,
    /// Ordered neighbor pair tallies between basins.
    pub counts: HashMap<(u32, u32), u64>,
    pub moves: u64,
}

pub fn oracle_landscape(inst: &QapInstance) -> OracleLandscape {
    let n = inst.n();
    let perms = lexicographic_permutations(n);
    let index: HashMap<Vec<usize>, usize> = perms.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();

    let endpoint: Vec<usize> = perms.iter().map(|p| index[&naive_climb(inst, p)]).collect();
    let mut reps: Vec<usize> = endpoint.clone();
    reps.sort_unstable();
    reps.dedup();
    let id_of: HashMap<usize, u32> = reps.iter().enumerate().map(|(k, &r)| (r, k as u32)).collect();
    let assignment: Vec<u32> = endpoint.iter().map(|e| id_of[e]).collect();

    let mut basin_sizes = vec![0u64; reps.len()];
    for &id in &assignment {
        basin_sizes[id as usize] += 1;
    }
    let mut counts = HashMap::new();
    for (s, p) in perms.iter().enumerate() {
        for q in swap_neighbors(p) {
            *counts.entry((assignment[s], assignment[index[&q]])).or_insert(0) += 1;
        }
    }
    OracleLandscape {
        assignment,
        optima: reps.iter().map(|&r| perms[r].clone()).collect(),
        optimum_index: reps.clone(),
        costs: reps.iter().map(|&r| naive_cost(inst, &perms[r])).collect(),
        basin_sizes,
        counts,
        moves: (n * (n - 1) / 2) as u64,
    }
}

/// Compares a basin map against the oracle; returns a description of the
/// first difference.
pub fn compare_basins(bm: &BasinMap, o: &OracleLandscape) -> Result<(), String> {
    if bm.assignment != o.assignment {
        return Err("assignment differs".into());
    }
    if bm.optima.len() != o.optima.len() {
        return Err(format!("{} optima vs oracle {}", bm.optima.len(), o.optima.len()));
    }
    for (k, opt) in bm.optima.iter().enumerate() {
        if opt.id as usize != k
            || opt.rep.as_slice() != &o.optima[k][..]
            || opt.cost != o.costs[k]
            || opt.basin_size != o.basin_sizes[k]
        {
            return Err(format!("optimum {k} differs"));
        }
    }
    Ok(())
}

/// Exact rational comparison of every directed weight.
pub fn compare_weights(lon: &Lon, o: &OracleLandscape) -> Result<(), String> {
    let v = o.optima.len() as u32;
    for i in 0..v {
        for j in 0..v {
            let (num, den) = lon.weight_ratio(i, j);
            let onum = o.counts.get(&(i, j)).copied().unwrap_or(0);
            let oden = o.basin_sizes[i as usize] * o.moves;
            if num as u128 * oden as u128 != onum as u128 * den as u128 {
                return Err(format!("w({i},{j}) = {num}/{den}, oracle {onum}/{oden}"));
            }
        }
    }
    if lon.counts.len() != o.counts.len() {
        return Err("edge sets differ".into());
    }
    Ok(())
}
