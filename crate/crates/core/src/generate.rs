//! Seeded instance generators and QAPLIB-style file I/O.
//!
//! Two classes are produced, both symmetric with a zero diagonal:
//!
//! * **uniform**: every off-diagonal upper-triangle entry of `A`, then of
//!   `B`, is drawn uniformly from `{1, …, uniform_max}` in row-major order
//!   and mirrored.
//! * **real-like**: `n` points are placed uniformly in the square
//!   `[0, rl_grid]²` (x then y per point) and `a_ij` is their rounded
//!   Euclidean distance. For each `i < j` in row-major order one value `u`
//!   is drawn for sparsity and one value `r` for magnitude; the flow is `0`
//!   when `u < rl_sparsity`, otherwise `round(10^(r * rl_exponent))`.
//!
//! All draws come from [`Xoshiro256StarStar`] seeded with the config seed.
//! Rounding is half away from zero.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::qap::{ClassTag, Cost, Matrix, QapInstance};
use crate::rng::Xoshiro256StarStar;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n: usize,
    pub seed: u64,
    pub class: ClassTag,
    pub uniform_max: i64,
    pub rl_grid: f64,
    pub rl_exponent: f64,
    pub rl_sparsity: f64,
}

impl GeneratorConfig {
    pub fn new(class: ClassTag, n: usize, seed: u64) -> Self {
        GeneratorConfig {
            n,
            seed,
            class,
            uniform_max: 100,
            rl_grid: 100.0,
            rl_exponent: 2.0,
            rl_sparsity: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("n must be at least 2, got {}", self.n)));
        }
        if self.uniform_max < 1 {
            return Err(Error::Config("uniform_max must be >= 1".into()));
        }
        if !(self.rl_grid.is_finite() && self.rl_grid >= 0.0) {
            return Err(Error::Config("rl_grid must be a finite non-negative number".into()));
        }
        if !(self.rl_exponent.is_finite() && self.rl_exponent > 0.0) {
            return Err(Error::Config("rl_exponent must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.rl_sparsity) {
            return Err(Error::Config("rl_sparsity must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        format!("{}_n{}_s{}", self.class, self.n, self.seed)
    }
}

/// Dispatches on `cfg.class`.
pub fn generate(cfg: &GeneratorConfig) -> Result<QapInstance> {
    match cfg.class {
        ClassTag::Uniform => gen_uniform(cfg),
        ClassTag::RealLike => gen_real_like(cfg),
        ClassTag::External => Err(Error::Config("cannot generate an external instance".into())),
    }
}

pub fn gen_uniform(cfg: &GeneratorConfig) -> Result<QapInstance> {
    cfg.validate()?;
    if cfg.class != ClassTag::Uniform {
        return Err(Error::Config("gen_uniform needs class = uniform".into()));
    }
    let n = cfg.n;
    let mut rng = Xoshiro256StarStar::seed_from_u64(cfg.seed);
    let mut a = Matrix::zeros(n);
    let mut b = Matrix::zeros(n);
    for m in [&mut a, &mut b] {
        for i in 0..n {
            for j in i + 1..n {
                let v = rng.range_inclusive(1, cfg.uniform_max);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
    }
    Ok(QapInstance::new(cfg.label(), ClassTag::Uniform, a, b))
}

pub fn gen_real_like(cfg: &GeneratorConfig) -> Result<QapInstance> {
    cfg.validate()?;
    if cfg.class != ClassTag::RealLike {
        return Err(Error::Config("gen_real_like needs class = real_like".into()));
    }
    let n = cfg.n;
    let mut rng = Xoshiro256StarStar::seed_from_u64(cfg.seed);

    let points: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let x = cfg.rl_grid * rng.next_f64();
            let y = cfg.rl_grid * rng.next_f64();
            (x, y)
        })
        .collect();
    let mut a = Matrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
            let d = dx.hypot(dy).round() as Cost;
            a.set(i, j, d);
            a.set(j, i, d);
        }
    }

    let mut b = Matrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let u = rng.next_f64();
            let r = rng.next_f64();
            let f = if u < cfg.rl_sparsity {
                0
            } else {
                10f64.powf(r * cfg.rl_exponent).round() as Cost
            };
            b.set(i, j, f);
            b.set(j, i, f);
        }
    }
    Ok(QapInstance::new(cfg.label(), ClassTag::RealLike, a, b))
}

/// Parses the QAPLIB-style layout: `n`, then `n*n` entries of `A`, then
/// `n*n` entries of `B`, separated by arbitrary whitespace.
pub fn parse_instance(text: &str, label: &str) -> Result<QapInstance> {
    let mut tokens = Tokens::new(text);
    let (off, n) = tokens
        .next_int()?
        .ok_or_else(|| Error::parse(text.len(), "empty input, expected instance size"))?;
    if n < 1 {
        return Err(Error::parse(off, format!("instance size must be >= 1, got {n}")));
    }
    let n = n as usize;
    let cells = n
        .checked_mul(n)
        .filter(|c| *c <= 1 << 26)
        .ok_or_else(|| Error::parse(off, format!("instance size {n} is unreasonably large")))?;
    let mut read_matrix = |what: &str| -> Result<Matrix> {
        let mut data = Vec::with_capacity(cells);
        for k in 0..cells {
            let (off, v) = tokens.next_int()?.ok_or_else(|| {
                Error::parse(
                    text.len(),
                    format!("expected {cells} entries for {what}, found only {k}"),
                )
            })?;
            if v < 0 {
                return Err(Error::parse(off, format!("negative entry {v} in {what}")));
            }
            data.push(v);
        }
        Ok(Matrix::from_row_major(n, data))
    };
    let a = read_matrix("distance matrix A")?;
    let b = read_matrix("flow matrix B")?;
    if let Some((off, _)) = tokens.next_token() {
        return Err(Error::parse(off, "unexpected trailing token after flow matrix"));
    }
    if !a.has_zero_diagonal() || !b.has_zero_diagonal() {
        log::warn!("instance {label}: non-zero diagonal entries");
    }
    Ok(QapInstance::new(label, ClassTag::External, a, b))
}

/// Canonical serialization: `n`, blank line, `A` rows, blank line, `B` rows,
/// entries separated by single spaces.
pub fn format_instance(inst: &QapInstance) -> String {
    let n = inst.n();
    let mut out = String::new();
    writeln!(out, "{n}").unwrap();
    for m in [&inst.a, &inst.b] {
        out.push('\n');
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| m.get(i, j).to_string()).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
    }
    out
}

pub fn load_instance(path: &Path) -> Result<QapInstance> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_instance(&text, &label)
}

pub fn save_instance(inst: &QapInstance, path: &Path) -> Result<()> {
    fs::write(path, format_instance(inst)).map_err(|e| Error::io(path, e))
}

/// Path of the `key=value` metadata sidecar for an instance file.
pub fn meta_path(instance_path: &Path) -> PathBuf {
    instance_path.with_extension("meta")
}

pub fn format_meta(cfg: &GeneratorConfig) -> String {
    let mut s = String::new();
    writeln!(s, "class={}", cfg.class).unwrap();
    writeln!(s, "n={}", cfg.n).unwrap();
    writeln!(s, "seed={}", cfg.seed).unwrap();
    match cfg.class {
        ClassTag::Uniform => writeln!(s, "uniform_max={}", cfg.uniform_max).unwrap(),
        _ => {
            writeln!(s, "rl_grid={}", cfg.rl_grid).unwrap();
            writeln!(s, "rl_exponent={}", cfg.rl_exponent).unwrap();
            writeln!(s, "rl_sparsity={}", cfg.rl_sparsity).unwrap();
        }
    }
    s
}

pub fn save_meta(cfg: &GeneratorConfig, instance_path: &Path) -> Result<()> {
    let path = meta_path(instance_path);
    fs::write(&path, format_meta(cfg)).map_err(|e| Error::io(path, e))
}

struct Tokens<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        Tokens { text, pos: 0 }
    }

    fn next_token(&mut self) -> Option<(usize, &'a str)> {
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < bytes.len() && !bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        Some((start, &self.text[start..self.pos]))
    }

    fn next_int(&mut self) -> Result<Option<(usize, i64)>> {
        match self.next_token() {
            None => Ok(None),
            Some((off, tok)) => tok
                .parse::<i64>()
                .map(|v| Some((off, v)))
                .map_err(|_| Error::parse(off, format!("expected an integer, found {tok:?}"))),
        }
    }
}
