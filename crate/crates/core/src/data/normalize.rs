use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::Dataset;

/// Per-feature affine map `(x - mean) / sd` fitted on training data.
/// Zero-variance features map to 0 and are flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub zero_variance: Vec<bool>,
}

impl Normalizer {
    pub fn fit(train: &Dataset) -> Result<Self> {
        let (n, p) = (train.n(), train.p());
        if n < 2 {
            return Err(Error::data("normalization needs at least 2 training rows"));
        }
        let mut mean = vec![0.0; p];
        for r in train.rows() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; p];
        for r in train.rows() {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let sd: Vec<f64> = var.iter().map(|s| (s / (n - 1) as f64).sqrt()).collect();
        let zero_variance = sd
            .iter()
            .zip(&mean)
            .map(|(&s, &m)| s <= 1e-12 * m.abs().max(1.0))
            .collect();
        Ok(Normalizer {
            mean,
            sd,
            zero_variance,
        })
    }

    pub fn p(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_row(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, &v)| {
                if self.zero_variance[j] {
                    0.0
                } else {
                    (v - self.mean[j]) / self.sd[j]
                }
            })
            .collect()
    }

    pub fn transform(&self, data: &Dataset) -> Result<Dataset> {
        if data.p() != self.p() {
            return Err(Error::data(format!(
                "normalizer fitted on {} features, dataset has {}",
                self.p(),
                data.p()
            )));
        }
        let x = data.rows().flat_map(|r| self.transform_row(r)).collect();
        Ok(data.map_features(x))
    }
}

/// Fits on `train` and returns the map with the transformed training set.
pub fn normalize(train: &Dataset) -> Result<(Normalizer, Dataset)> {
    let norm = Normalizer::fit(train)?;
    let t = norm.transform(train)?;
    Ok((norm, t))
}

/// Indices (ascending) of the `keep` features with the largest median
/// absolute deviation on `train`.
pub fn screen_by_mad(train: &Dataset, keep: usize) -> Vec<usize> {
    let p = train.p();
    let mut mads: Vec<(usize, f64)> = (0..p)
        .map(|j| {
            let mut col: Vec<f64> = train.rows().map(|r| r[j]).collect();
            let med = median(&mut col);
            let mut dev: Vec<f64> = col.iter().map(|v| (v - med).abs()).collect();
            (j, median(&mut dev))
        })
        .collect();
    mads.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut idx: Vec<usize> = mads.into_iter().take(keep).map(|(j, _)| j).collect();
    idx.sort_unstable();
    idx
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
