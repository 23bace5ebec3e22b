//! Agglomerative modularity ascent.
//!
//! Starts from singletons and repeatedly merges the connected pair of
//! communities with the largest `ΔQ = 2 (e_cd - a_c a_d)`, where `e_cd` is
//! half the fraction of total weight between `c` and `d` and `a_c` the
//! fraction of degree in `c`. Equal gains go to the lexicographically
//! smallest `(c, d)`; the merged community keeps the smaller id. The
//! partition with the highest `Q` along the merge path is returned, the
//! earliest one on ties.

use std::collections::BTreeMap;

use super::{modularity, relabel_dense, Algorithm, Partition, WeightedGraph};
use crate::error::Result;

pub fn greedy_modularity(g: &WeightedGraph) -> Result<Partition> {
    g.require_edges()?;
    let n = g.num_nodes();
    let two_m = g.total_weight();

    let mut a: Vec<f64> = (0..n).map(|i| g.degree(i) / two_m).collect();
    let mut between: Vec<BTreeMap<usize, f64>> = (0..n)
        .map(|i| g.neighbors(i).iter().map(|&(j, w)| (j, w / two_m)).collect())
        .collect();

    let mut q: f64 = -a.iter().map(|x| x * x).sum::<f64>();
    let mut best_q = q;
    let mut best_len = 0;
    let mut merges: Vec<(usize, usize)> = Vec::new();

    loop {
        let mut pick: Option<(f64, usize, usize)> = None;
        for (c, row) in between.iter().enumerate() {
            for (&d, &e) in row.range(c + 1..) {
                let gain = 2.0 * (e - a[c] * a[d]);
                if pick.map_or(true, |(best, _, _)| gain > best) {
                    pick = Some((gain, c, d));
                }
            }
        }
        let Some((gain, c, d)) = pick else { break };

        let moved = std::mem::take(&mut between[d]);
        for (x, e) in moved {
            if x == c {
                continue;
            }
            *between[c].entry(x).or_insert(0.0) += e;
            let row = &mut between[x];
            row.remove(&d);
            *row.entry(c).or_insert(0.0) += e;
        }
        between[c].remove(&d);
        a[c] += a[d];
        a[d] = 0.0;

        merges.push((c, d));
        q += gain;
        if q > best_q {
            best_q = q;
            best_len = merges.len();
        }
    }

    let mut label: Vec<usize> = (0..n).collect();
    for &(c, d) in &merges[..best_len] {
        for l in label.iter_mut() {
            if *l == d {
                *l = c;
            }
        }
    }
    let assignment = relabel_dense(&label);
    let q = modularity(g, &assignment)?;
    Ok(Partition {
        assignment,
        q,
        algorithm: Algorithm::Greedy,
        seed: None,
    })
}
