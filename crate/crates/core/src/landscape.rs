//! Best-improvement hill climbing and exhaustive basin enumeration.
//!
//! A climb repeatedly applies the swap with the most negative delta, taking
//! the first one in `(i, j)` scan order among equals, and stops as soon as
//! no swap strictly lowers the cost. Neutral moves are never taken, so every
//! configuration on a plateau without an improving exit is its own optimum.
//!
//! [`enumerate_basins`] climbs from all `n!` permutations. The rank range is
//! split into contiguous blocks, one per worker, each filling its own slice
//! of a dense `u32` array with the rank of the endpoint. A sequential merge
//! then numbers the distinct endpoints by ascending rank. The output does
//! not depend on the worker count.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU32, Ordering};

use crate::error::{Error, Result};
use crate::qap::{self, factorial, swap_pairs, Cost, Permutation, QapInstance, MAX_RANKABLE_N};

/// Upper bound on `n` accepted by [`enumerate_basins`].
pub const MAX_EXHAUSTIVE_N: usize = MAX_RANKABLE_N;

const BASIN_MAGIC: &[u8; 8] = b"QAPBASN1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalOptimum {
    pub id: u32,
    pub rep: Permutation,
    pub cost: Cost,
    pub basin_size: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasinMap {
    pub n: usize,
    /// Optimum id for every configuration rank.
    pub assignment: Vec<u32>,
    pub optima: Vec<LocalOptimum>,
}

impl BasinMap {
    pub fn num_optima(&self) -> usize {
        self.optima.len()
    }

    pub fn basin_of(&self, rank: u64) -> u32 {
        self.assignment[rank as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnumerationMode {
    /// Every configuration climbs all the way to its optimum.
    #[default]
    Reference,
    /// A climb stops early when it reaches a configuration whose endpoint is
    /// already known.
    Memoized,
}

/// Applies one best-improvement step in place. Returns false at a local
/// optimum.
fn best_improvement_step(inst: &QapInstance, p: &mut [usize]) -> bool {
    let mut best: Cost = 0;
    let mut best_pair = None;
    for (i, j) in swap_pairs(p.len()) {
        let d = qap::swap_delta(inst, p, i, j);
        if d < best {
            best = d;
            best_pair = Some((i, j));
        }
    }
    match best_pair {
        Some((i, j)) => {
            p.swap(i, j);
            true
        }
        None => false,
    }
}

fn climb_in_place(inst: &QapInstance, p: &mut [usize]) {
    while best_improvement_step(inst, p) {}
}

pub fn hill_climb(inst: &QapInstance, start: &Permutation) -> Permutation {
    assert_eq!(start.len(), inst.n(), "start permutation has the wrong length");
    let mut p = start.clone().into_vec();
    climb_in_place(inst, &mut p);
    Permutation::from_vec(p).expect("swaps preserve bijectivity")
}

/// Returns true if no swap strictly lowers the cost of `p`.
pub fn is_local_optimum(inst: &QapInstance, p: &Permutation) -> bool {
    swap_pairs(p.len()).all(|(i, j)| inst.swap_delta(p, i, j) >= 0)
}

pub fn check_exhaustive_size(n: usize) -> Result<()> {
    if n > MAX_EXHAUSTIVE_N {
        return Err(Error::TooLarge {
            n,
            limit: MAX_EXHAUSTIVE_N,
        });
    }
    Ok(())
}

/// Splits `0..total` into at most `workers` contiguous blocks.
pub(crate) fn blocks(total: usize, workers: usize) -> Vec<std::ops::Range<usize>> {
    let workers = workers.max(1).min(total.max(1));
    let chunk = total.div_ceil(workers);
    (0..workers)
        .map(|w| (w * chunk).min(total)..((w + 1) * chunk).min(total))
        .filter(|r| !r.is_empty())
        .collect()
}

pub fn enumerate_basins(inst: &QapInstance, workers: usize) -> Result<BasinMap> {
    enumerate_basins_with(inst, workers, EnumerationMode::Reference)
}

pub fn enumerate_basins_with(
    inst: &QapInstance,
    workers: usize,
    mode: EnumerationMode,
) -> Result<BasinMap> {
    let n = inst.n();
    check_exhaustive_size(n)?;
    let total = factorial(n) as usize;

    let endpoints = match mode {
        EnumerationMode::Reference => endpoints_reference(inst, total, workers),
        EnumerationMode::Memoized => endpoints_memoized(inst, total, workers),
    };
    Ok(canonicalize(inst, endpoints))
}

fn endpoints_reference(inst: &QapInstance, total: usize, workers: usize) -> Vec<u32> {
    let n = inst.n();
    let mut endpoints = vec![0u32; total];
    let ranges = blocks(total, workers);
    std::thread::scope(|scope| {
        let mut rest: &mut [u32] = &mut endpoints;
        for range in ranges {
            let (slice, tail) = rest.split_at_mut(range.len());
            rest = tail;
            scope.spawn(move || {
                let mut p = vec![0usize; n];
                for (k, slot) in slice.iter_mut().enumerate() {
                    qap::unrank_into(&mut p, (range.start + k) as u64);
                    climb_in_place(inst, &mut p);
                    *slot = qap::rank(&p) as u32;
                }
            });
        }
    });
    endpoints
}

fn endpoints_memoized(inst: &QapInstance, total: usize, workers: usize) -> Vec<u32> {
    const UNKNOWN: u32 = u32::MAX;
    let n = inst.n();
    let known: Vec<AtomicU32> = (0..total).map(|_| AtomicU32::new(UNKNOWN)).collect();
    std::thread::scope(|scope| {
        for range in blocks(total, workers) {
            let known = &known;
            scope.spawn(move || {
                let mut p = vec![0usize; n];
                let mut path: Vec<u32> = Vec::new();
                for r in range {
                    if known[r].load(Ordering::Relaxed) != UNKNOWN {
                        continue;
                    }
                    qap::unrank_into(&mut p, r as u64);
                    path.clear();
                    let end = loop {
                        let cur = qap::rank(&p) as u32;
                        let hit = known[cur as usize].load(Ordering::Relaxed);
                        if hit != UNKNOWN {
                            break hit;
                        }
                        path.push(cur);
                        if !best_improvement_step(inst, &mut p) {
                            break cur;
                        }
                    };
                    for &q in &path {
                        known[q as usize].store(end, Ordering::Relaxed);
                    }
                }
            });
        }
    });
    known.into_iter().map(AtomicU32::into_inner).collect()
}

/// Replaces endpoint ranks by dense ids ordered by ascending rank and builds
/// the roster.
fn canonicalize(inst: &QapInstance, mut endpoints: Vec<u32>) -> BasinMap {
    let n = inst.n();
    let mut reps: Vec<u32> = endpoints.clone();
    reps.sort_unstable();
    reps.dedup();

    let mut basin_size = vec![0u64; reps.len()];
    for e in endpoints.iter_mut() {
        let id = reps.binary_search(e).expect("endpoint is in the roster") as u32;
        basin_size[id as usize] += 1;
        *e = id;
    }
    let optima = reps
        .iter()
        .zip(basin_size)
        .enumerate()
        .map(|(id, (&r, size))| {
            let rep = Permutation::unrank(n, r as u64);
            LocalOptimum {
                id: id as u32,
                cost: inst.cost(&rep),
                rep,
                basin_size: size,
            }
        })
        .collect();
    BasinMap {
        n,
        assignment: endpoints,
        optima,
    }
}

/// Binary layout, little-endian: 8-byte magic `QAPBASN1`, `n` as u32,
/// the configuration count `n!` as u64, then `n!` u32 optimum ids by rank.
pub fn write_basin_binary(bm: &BasinMap, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
    put(BASIN_MAGIC)?;
    put(&(bm.n as u32).to_le_bytes())?;
    put(&(bm.assignment.len() as u64).to_le_bytes())?;
    for id in &bm.assignment {
        put(&id.to_le_bytes())?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads the layout written by [`write_basin_binary`]; returns `(n, ids)`.
pub fn read_basin_binary(path: &Path) -> Result<(usize, Vec<u32>)> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() < 20 || &bytes[..8] != BASIN_MAGIC {
        return Err(Error::parse(0, "not a basin map file"));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    if n > MAX_EXHAUSTIVE_N || count as u64 != factorial(n) {
        return Err(Error::parse(8, format!("inconsistent header: n = {n}, count = {count}")));
    }
    let body = &bytes[20..];
    if body.len() != count * 4 {
        return Err(Error::parse(20, format!("expected {} id bytes, found {}", count * 4, body.len())));
    }
    let ids = body
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((n, ids))
}

/// Roster CSV `id,rank,cost,basin_size`.
pub fn write_optima_csv(bm: &BasinMap, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "rank", "cost", "basin_size"])?;
    for o in &bm.optima {
        w.write_record([
            o.id.to_string(),
            o.rep.rank().to_string(),
            o.cost.to_string(),
            o.basin_size.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
