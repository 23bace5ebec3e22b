//! QAP instances, permutations and exact cost evaluation.
//!
//! A permutation maps *positions* to *items*: `p[i]` is the item assigned to
//! position `i`. The cost is `C(p) = Σ_i Σ_j a[i][j] * b[p[i]][p[j]]`, so `A`
//! is indexed by positions (distances between locations) and `B` by the
//! assigned items (flows between facilities).

use std::fmt;

/// Fitness values are exact integers.
pub type Cost = i64;

/// Largest `n` whose `n!` fits the 32-bit rank arrays used downstream.
pub const MAX_RANKABLE_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassTag {
    Uniform,
    RealLike,
    External,
}

impl ClassTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassTag::Uniform => "uniform",
            ClassTag::RealLike => "real_like",
            ClassTag::External => "external",
        }
    }

    pub fn parse(s: &str) -> Option<ClassTag> {
        match s.trim() {
            "uniform" | "uni" => Some(ClassTag::Uniform),
            "real_like" | "real-like" | "rl" => Some(ClassTag::RealLike),
            "external" => Some(ClassTag::External),
            _ => None,
        }
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Dense row-major square matrix of non-negative integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    n: usize,
    data: Vec<Cost>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0; n * n],
        }
    }

    /// Builds from row-major data. Panics if `data.len() != n * n`.
    pub fn from_row_major(n: usize, data: Vec<Cost>) -> Self {
        assert_eq!(data.len(), n * n, "matrix data must be n*n");
        Matrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<Cost>]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "matrix must be square");
            data.extend_from_slice(row);
        }
        Matrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cost {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Cost) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[Cost] {
        &self.data
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i) == 0)
    }

    pub fn max_entry(&self) -> Cost {
        self.data.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QapInstance {
    pub label: String,
    pub class: ClassTag,
    /// Distances between locations (indexed by position).
    pub a: Matrix,
    /// Flows between facilities (indexed by item).
    pub b: Matrix,
}

impl QapInstance {
    /// Panics if the matrices differ in size, are empty, or hold negative
    /// entries.
    pub fn new(label: impl Into<String>, class: ClassTag, a: Matrix, b: Matrix) -> Self {
        assert!(a.n() >= 1, "instance size must be positive");
        assert_eq!(a.n(), b.n(), "distance and flow matrices differ in size");
        assert!(
            a.as_slice().iter().chain(b.as_slice()).all(|&v| v >= 0),
            "matrix entries must be non-negative"
        );
        QapInstance {
            label: label.into(),
            class,
            a,
            b,
        }
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn cost(&self, p: &Permutation) -> Cost {
        cost_of(self, p.as_slice())
    }

    pub fn swap_delta(&self, p: &Permutation, i: usize, j: usize) -> Cost {
        swap_delta(self, p.as_slice(), i, j)
    }
}

/// Exact double-sum cost of the assignment `p`.
pub fn cost_of(inst: &QapInstance, p: &[usize]) -> Cost {
    let n = inst.n();
    assert_eq!(p.len(), n, "permutation length does not match instance size");
    let mut total: Cost = 0;
    for i in 0..n {
        let pi = p[i];
        for j in 0..n {
            total += inst.a.get(i, j) * inst.b.get(pi, p[j]);
        }
    }
    total
}

/// `cost(p with positions i and j exchanged) - cost(p)` in O(n).
///
/// Valid for asymmetric matrices and non-zero diagonals.
pub fn swap_delta(inst: &QapInstance, p: &[usize], i: usize, j: usize) -> Cost {
    let n = inst.n();
    assert!(i < j && j < n, "swap_delta requires i < j < n, got ({i}, {j}) with n = {n}");
    debug_assert_eq!(p.len(), n);
    let (a, b) = (&inst.a, &inst.b);
    let u = p[i];
    let v = p[j];
    let mut d = a.get(i, i) * (b.get(v, v) - b.get(u, u))
        + a.get(j, j) * (b.get(u, u) - b.get(v, v))
        + a.get(i, j) * (b.get(v, u) - b.get(u, v))
        + a.get(j, i) * (b.get(u, v) - b.get(v, u));
    for k in 0..n {
        if k == i || k == j {
            continue;
        }
        let w = p[k];
        d += a.get(k, i) * (b.get(w, v) - b.get(w, u))
            + a.get(k, j) * (b.get(w, u) - b.get(w, v))
            + a.get(i, k) * (b.get(v, w) - b.get(u, w))
            + a.get(j, k) * (b.get(u, w) - b.get(v, w));
    }
    d
}

/// A bijection of `{0, …, n-1}`, stored as position → item.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// Returns `None` unless `items` holds each of `0..items.len()` once.
    pub fn from_vec(items: Vec<usize>) -> Option<Self> {
        let n = items.len();
        let mut seen = vec![false; n];
        for &x in &items {
            if x >= n || seen[x] {
                return None;
            }
            seen[x] = true;
        }
        Some(Permutation(items))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn rank(&self) -> u64 {
        rank(&self.0)
    }

    pub fn unrank(n: usize, r: u64) -> Self {
        let mut v = vec![0; n];
        unrank_into(&mut v, r);
        Permutation(v)
    }

    pub fn swapped(&self, i: usize, j: usize) -> Self {
        let mut v = self.0.clone();
        v.swap(i, j);
        Permutation(v)
    }

    /// All 2-swap neighbors in canonical `(i, j)` order, `i < j`.
    pub fn neighbors(&self) -> Vec<Permutation> {
        let n = self.len();
        assert!(n >= 2, "the swap neighborhood needs n >= 2");
        swap_pairs(n).map(|(i, j)| self.swapped(i, j)).collect()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

/// The `(i, j)` position pairs of the swap neighborhood in scan order.
pub fn swap_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> + Clone {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

pub fn neighborhood_size(n: usize) -> u64 {
    (n as u64) * (n as u64).saturating_sub(1) / 2
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Lexicographic rank via the Lehmer code, O(n) with a bitmask.
pub fn rank(p: &[usize]) -> u64 {
    let n = p.len();
    assert!(n <= 20, "rank only supports n <= 20");
    let mut remaining: u32 = (1u32 << n) - 1;
    let mut r: u64 = 0;
    for (pos, &x) in p.iter().enumerate() {
        let smaller = (remaining & ((1u32 << x) - 1)).count_ones() as u64;
        r = r * (n - pos) as u64 + smaller;
        remaining &= !(1u32 << x);
    }
    r
}

/// Writes the permutation of rank `r` into `out` (whose length is `n`).
///
/// Panics if `r >= n!`.
pub fn unrank_into(out: &mut [usize], mut r: u64) {
    let n = out.len();
    let total = factorial(n);
    assert!(r < total, "rank {r} out of range for n = {n} (n! = {total})");
    let mut pool: Vec<usize> = (0..n).collect();
    let mut f = total;
    for (pos, slot) in out.iter_mut().enumerate() {
        f /= (n - pos) as u64;
        let d = (r / f) as usize;
        r %= f;
        *slot = pool.remove(d);
    }
}
