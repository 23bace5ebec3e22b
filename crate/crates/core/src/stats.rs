//! Five-number summaries and the one-sided Mann-Whitney U test.
//!
//! Quartiles use linear interpolation between order statistics: for sorted
//! `x_0 ≤ … ≤ x_{N-1}` the `p`-quantile is `x_l + (h - l)(x_{l+1} - x_l)` with
//! `h = (N - 1) p` and `l = floor(h)` (Hyndman-Fan type 7, the R default).

use statrs::distribution::{ContinuousCDF, Normal};

/// Combined sample size below which the U test enumerates exactly.
pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumber {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `None` for an empty sample.
pub fn five_number(values: &[f64]) -> Option<FiveNumber> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(FiveNumber {
        count: v.len(),
        min: v[0],
        q1: quantile(&v, 0.25),
        median: quantile(&v, 0.5),
        q3: quantile(&v, 0.75),
        max: v[v.len() - 1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PValueMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    /// P(U ≥ u) under the null hypothesis.
    pub p_value: f64,
    pub method: PValueMethod,
}

/// Mid-ranks (1-based) of the pooled sample, in input order.
fn midranks(pooled: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..pooled.len()).collect();
    idx.sort_by(|&a, &b| pooled[a].total_cmp(&pooled[b]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut k = 0;
    while k < idx.len() {
        let mut end = k + 1;
        while end < idx.len() && pooled[idx[end]] == pooled[idx[k]] {
            end += 1;
        }
        let r = (k + 1 + end) as f64 / 2.0;
        for &i in &idx[k..end] {
            ranks[i] = r;
        }
        k = end;
    }
    ranks
}

/// One-sided test of `H1: x tends to exceed y`.
///
/// Exact when `x.len() + y.len() < EXACT_LIMIT`: all `C(N, |x|)` ways of
/// drawing `|x|` of the pooled mid-ranks are enumerated. Otherwise the normal
/// approximation with tie-corrected variance and a 0.5 continuity correction
/// is used. Panics if either sample is empty.
pub fn mann_whitney_greater(x: &[f64], y: &[f64]) -> MannWhitney {
    assert!(!x.is_empty() && !y.is_empty(), "both samples must be non-empty");
    let (n1, n2) = (x.len(), y.len());
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranks = midranks(&pooled);
    let offset = (n1 * (n1 + 1)) as f64 / 2.0;
    let r1: f64 = ranks[..n1].iter().sum();
    let u = r1 - offset;

    if n1 + n2 < EXACT_LIMIT {
        // Compare doubled rank sums as integers to avoid float ties.
        let doubled: Vec<i64> = ranks.iter().map(|r| (2.0 * r).round() as i64).collect();
        let observed: i64 = doubled[..n1].iter().sum();
        let (mut hits, mut total) = (0u64, 0u64);
        for_each_subset_sum(&doubled, n1, &mut |s| {
            total += 1;
            if s >= observed {
                hits += 1;
            }
        });
        return MannWhitney {
            u,
            p_value: hits as f64 / total as f64,
            method: PValueMethod::Exact,
        };
    }

    let n = (n1 + n2) as f64;
    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut k = 0;
    while k < sorted.len() {
        let mut end = k + 1;
        while end < sorted.len() && sorted[end] == sorted[k] {
            end += 1;
        }
        let t = (end - k) as f64;
        tie_term += t * t * t - t;
        k = end;
    }
    let (f1, f2) = (n1 as f64, n2 as f64);
    let var = f1 * f2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let z = (u - f1 * f2 / 2.0 - 0.5) / var.sqrt();
        let normal = Normal::standard();
        1.0 - normal.cdf(z)
    };
    MannWhitney {
        u,
        p_value,
        method: PValueMethod::Normal,
    }
}

fn for_each_subset_sum(values: &[i64], k: usize, f: &mut impl FnMut(i64)) {
    fn rec(values: &[i64], start: usize, left: usize, acc: i64, f: &mut impl FnMut(i64)) {
        if left == 0 {
            f(acc);
            return;
        }
        for i in start..=values.len() - left {
            rec(values, i + 1, left - 1, acc + values[i], f);
        }
    }
    rec(values, 0, k, 0, f);
}
