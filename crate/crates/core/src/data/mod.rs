//! Datasets, synthetic generators, CSV ingestion, normalization and model
//! persistence.

mod csv_io;
pub mod generators;
mod normalize;
pub mod persist;

pub use csv_io::{load_csv, load_features, save_csv, CsvSchema};
pub use generators::{gen_example1, gen_example2, gen_example3, GeneratorSpec, Splits};
pub use normalize::{normalize, screen_by_mad, Normalizer};

use crate::error::{Error, Result};

/// Labelled observations. Features are stored row-major; labels are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    p: usize,
    k: usize,
    x: Vec<f64>,
    y: Vec<usize>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(x: Vec<f64>, p: usize, y: Vec<usize>, k: usize) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::data("dataset must contain at least one observation"));
        }
        if k < 2 {
            return Err(Error::data(format!(
                "class count must be at least 2, got {k}"
            )));
        }
        if x.len() != n * p {
            return Err(Error::data(format!(
                "feature buffer has {} values, expected {n} x {p}",
                x.len()
            )));
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(format!(
                "non-finite feature value at row {}, column {}",
                pos / p.max(1) + 1,
                pos % p.max(1) + 1
            )));
        }
        let bad: Vec<usize> = y.iter().copied().filter(|&l| l == 0 || l > k).collect();
        if !bad.is_empty() {
            return Err(Error::data(format!(
                "labels outside 1..={k}: {:?}",
                dedup_sorted(bad)
            )));
        }
        Ok(Dataset {
            n,
            p,
            k,
            x,
            y,
            feature_names: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], y: Vec<usize>, k: usize) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::data("rows have differing lengths"));
        }
        if rows.len() != y.len() {
            return Err(Error::data(format!(
                "{} feature rows but {} labels",
                rows.len(),
                y.len()
            )));
        }
        Self::new(rows.concat(), p, y, k)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p {
            return Err(Error::data(format!(
                "{} feature names for {} features",
                names.len(),
                self.p
            )));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on 0; a zero-feature dataset yields empty rows
        (0..self.n).map(move |i| self.row(i))
    }

    pub fn features(&self) -> &[f64] {
        &self.x
    }

    /// 1-based label of observation `i`.
    pub fn label(&self, i: usize) -> usize {
        self.y[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.y
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.k];
        for &l in &self.y {
            c[l - 1] += 1;
        }
        c
    }

    /// Observations at the given indices, in order.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        let mut x = Vec::with_capacity(idx.len() * self.p);
        let mut y = Vec::with_capacity(idx.len());
        for &i in idx {
            x.extend_from_slice(self.row(i));
            y.push(self.y[i]);
        }
        Dataset {
            n: idx.len(),
            p: self.p,
            k: self.k,
            x,
            y,
            feature_names: self.feature_names.clone(),
        }
    }

    /// Keeps only the listed feature columns.
    pub fn select_features(&self, cols: &[usize]) -> Dataset {
        let mut x = Vec::with_capacity(self.n * cols.len());
        for i in 0..self.n {
            let r = self.row(i);
            x.extend(cols.iter().map(|&c| r[c]));
        }
        Dataset {
            n: self.n,
            p: cols.len(),
            k: self.k,
            x,
            y: self.y.clone(),
            feature_names: self
                .feature_names
                .as_ref()
                .map(|names| cols.iter().map(|&c| names[c].clone()).collect()),
        }
    }

    /// Relabels classes: observation label `l` becomes `perm[l - 1]`.
    pub fn permute_labels(&self, perm: &[usize]) -> Result<Dataset> {
        let mut seen = vec![false; self.k];
        if perm.len() != self.k
            || perm
                .iter()
                .any(|&l| l == 0 || l > self.k || std::mem::replace(&mut seen[l - 1], true))
        {
            return Err(Error::invalid(
                "label permutation must be a bijection of 1..=k",
            ));
        }
        let mut out = self.clone();
        for l in out.y.iter_mut() {
            *l = perm[*l - 1];
        }
        Ok(out)
    }

    pub(crate) fn map_features(&self, x: Vec<f64>) -> Dataset {
        debug_assert_eq!(x.len(), self.n * self.p);
        Dataset { x, ..self.clone() }
    }
}

fn dedup_sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}
