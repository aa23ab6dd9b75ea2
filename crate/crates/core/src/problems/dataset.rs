use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse feature row with 0-based, strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseRow {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseRow {
    pub fn new(indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: indices.len(), got: values.len() });
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("indices", "must be strictly increasing"));
        }
        Ok(SparseRow { indices, values })
    }

    pub fn from_dense(dense: &[f64]) -> Self {
        let (indices, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .unzip();
        SparseRow { indices, values }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// Largest index plus one, or 0 for an empty row.
    pub fn min_dim(&self) -> usize {
        self.indices.last().map_or(0, |i| i + 1)
    }

    #[inline]
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.iter().map(|(i, v)| v * x[i]).sum()
    }

    /// `out += coef * self`.
    #[inline]
    pub fn axpy_into(&self, coef: f64, out: &mut [f64]) {
        for (i, v) in self.iter() {
            out[i] += coef * v;
        }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        self.axpy_into(1.0, &mut out);
        out
    }
}

/// Labelled binary-classification samples, labels in `{−1, +1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    rows: Vec<SparseRow>,
    labels: Vec<f64>,
    dim: usize,
}

impl Dataset {
    pub fn new(rows: Vec<SparseRow>, labels: Vec<f64>, dim: usize) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: rows.len(), got: labels.len() });
        }
        if let Some(b) = labels.iter().find(|&&b| b != 1.0 && b != -1.0) {
            return Err(Error::invalid("labels", format!("expected ±1, got {b}")));
        }
        if let Some(row) = rows.iter().find(|r| r.min_dim() > dim) {
            return Err(Error::invalid(
                "dim",
                format!("feature index {} exceeds dimension {dim}", row.min_dim() - 1),
            ));
        }
        Ok(Dataset { rows, labels, dim })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn sample(&self, i: usize) -> (&SparseRow, f64) {
        (&self.rows[i], self.labels[i])
    }

    /// Mean squared row norm, `(1/n)Σ‖a_i‖²`.
    pub fn mean_sq_row_norm(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().map(|r| r.norm().powi(2)).sum::<f64>() / self.len() as f64
    }

    pub fn positive_count(&self) -> usize {
        self.labels.iter().filter(|&&b| b > 0.0).count()
    }

    /// Pads (never shrinks) the feature dimension.
    pub fn with_dim(mut self, dim: usize) -> Result<Self> {
        if dim < self.dim {
            return Err(Error::invalid(
                "dim",
                format!("{dim} is smaller than the largest feature index + 1 ({})", self.dim),
            ));
        }
        self.dim = dim;
        Ok(self)
    }

    fn select(&self, order: &[usize]) -> Dataset {
        Dataset {
            rows: order.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: order.iter().map(|&i| self.labels[i]).collect(),
            dim: self.dim,
        }
    }

    /// Uniform subsample of `m` rows without replacement, kept in file order.
    pub fn subsample(&self, m: usize, seed: u64) -> Dataset {
        if m >= self.len() {
            return self.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = rand::seq::index::sample(&mut rng, self.len(), m).into_vec();
        picked.sort_unstable();
        self.select(&picked)
    }

    /// LIBSVM text with 1-based indices; the byte-level serialization used for
    /// checksums and determinism checks.
    pub fn to_libsvm(&self) -> String {
        let mut out = String::new();
        for (row, &b) in self.rows.iter().zip(&self.labels) {
            out.push_str(if b > 0.0 { "+1" } else { "-1" });
            for (i, v) in row.iter() {
                let _ = write!(out, " {}:{}", i + 1, v);
            }
            out.push('\n');
        }
        out
    }
}

/// Divides every nonzero row by its ℓ2 norm.
pub fn normalize_rows(mut ds: Dataset) -> Dataset {
    for row in &mut ds.rows {
        let norm = row.norm();
        if norm > 0.0 {
            for v in &mut row.values {
                *v /= norm;
            }
        }
    }
    ds
}

/// Digits 0–4 become −1 and 5–9 become +1.
pub fn binarize_mnist(digits: &[f64]) -> Result<Vec<f64>> {
    digits
        .iter()
        .map(|&d| match d {
            d if d.fract() == 0.0 && (0.0..=4.0).contains(&d) => Ok(-1.0),
            d if d.fract() == 0.0 && (5.0..=9.0).contains(&d) => Ok(1.0),
            d => Err(Error::invalid("labels", format!("{d} is not a digit 0-9"))),
        })
        .collect()
}

/// Seeded random permutation; the first `⌊train_frac·n⌋` samples train.
pub fn split_train_test(ds: &Dataset, train_frac: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if ds.len() < 2 {
        return Err(Error::invalid("dataset", format!("need at least 2 samples to split, got {}", ds.len())));
    }
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::invalid("train_frac", format!("must lie in (0, 1), got {train_frac}")));
    }
    let n_train = (train_frac * ds.len() as f64).floor() as usize;
    if n_train == 0 || n_train == ds.len() {
        return Err(Error::invalid(
            "train_frac",
            format!("{train_frac} leaves an empty side for {} samples", ds.len()),
        ));
    }
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok((ds.select(&order[..n_train]), ds.select(&order[n_train..])))
}

/// Seeded synthetic binary classification data with unit-norm dense rows.
///
/// A hidden unit direction `w` labels each Gaussian row by `sign⟨w, a⟩`;
/// rows with `|⟨w, a⟩| < margin` are rejected, then each label is flipped
/// with probability `flip`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub margin: f64,
    pub flip: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn generate(&self) -> Result<Dataset> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::invalid("synthetic", "n and d must be positive"));
        }
        if !(0.0..1.0).contains(&self.margin) {
            return Err(Error::invalid("margin", format!("must lie in [0, 1), got {}", self.margin)));
        }
        if !(0.0..=0.5).contains(&self.flip) {
            return Err(Error::invalid("flip", format!("must lie in [0, 0.5], got {}", self.flip)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let unit = |rng: &mut ChaCha8Rng| loop {
            let v: Vec<f64> = (0..self.d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                break v.into_iter().map(|x| x / norm).collect::<Vec<f64>>();
            }
        };
        let w = unit(&mut rng);
        let mut rows = Vec::with_capacity(self.n);
        let mut labels = Vec::with_capacity(self.n);
        while rows.len() < self.n {
            let a = unit(&mut rng);
            let score: f64 = a.iter().zip(&w).map(|(x, y)| x * y).sum();
            if score.abs() < self.margin {
                continue;
            }
            let mut b = if score >= 0.0 { 1.0 } else { -1.0 };
            if rng.random::<f64>() < self.flip {
                b = -b;
            }
            rows.push(SparseRow { indices: (0..self.d).collect(), values: a });
            labels.push(b);
        }
        Dataset::new(rows, labels, self.d)
    }
}

/// Rows and raw real-valued labels as read from a LIBSVM file.
#[derive(Debug, Clone, PartialEq)]
pub struct RawLibsvm {
    pub rows: Vec<SparseRow>,
    pub labels: Vec<f64>,
    /// Largest 0-based feature index + 1.
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelRule {
    /// Positive labels → +1, everything else → −1.
    #[default]
    Sign,
    /// Digits 0–4 → −1, 5–9 → +1.
    Mnist,
}

impl RawLibsvm {
    pub fn into_dataset(self, rule: LabelRule, dim: Option<usize>) -> Result<Dataset> {
        let labels = match rule {
            LabelRule::Sign => self.labels.iter().map(|&l| if l > 0.0 { 1.0 } else { -1.0 }).collect(),
            LabelRule::Mnist => binarize_mnist(&self.labels)?,
        };
        let ds = Dataset::new(self.rows, labels, self.dim)?;
        match dim {
            Some(d) => ds.with_dim(d),
            None => Ok(ds),
        }
    }
}

/// Parses LIBSVM text: `<label> <idx>:<val> ...` with 1-based indices.
/// Blank lines and `#` comments are skipped.
pub fn parse_libsvm(text: &str) -> Result<RawLibsvm> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut dim = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let err = |reason: String| Error::Parse { line: line_no, reason };
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let label: f64 = label_tok
            .parse()
            .ok()
            .filter(|l: &f64| l.is_finite())
            .ok_or_else(|| err(format!("bad label `{label_tok}`")))?;
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected `index:value`, got `{tok}`")))?;
            let idx: usize = idx.parse().map_err(|_| err(format!("bad index `{idx}`")))?;
            if idx == 0 {
                return Err(err("indices are 1-based; found 0".into()));
            }
            let val: f64 = val
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| err(format!("bad value `{val}`")))?;
            if indices.last().is_some_and(|&last| idx - 1 <= last) {
                return Err(err(format!("indices not strictly increasing at `{tok}`")));
            }
            indices.push(idx - 1);
            values.push(val);
        }
        let row = SparseRow { indices, values };
        dim = dim.max(row.min_dim());
        rows.push(row);
        labels.push(label);
    }
    Ok(RawLibsvm { rows, labels, dim })
}

pub fn load_libsvm_raw(path: impl AsRef<Path>) -> Result<RawLibsvm> {
    parse_libsvm(&fs::read_to_string(path)?)
}

/// Loads a LIBSVM file with sign labels and `d = max index + 1`.
pub fn load_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    load_libsvm_raw(path)?.into_dataset(LabelRule::Sign, None)
}
