//! Simplex class coding and angle margins.
//!
//! Class `j` (1-based) is coded by the vertex `Y_j` of a centered regular
//! simplex in `R^(k-1)`. A classification function value `f(x)` is scored
//! against every class through its angle margin `<Y_j, f(x)>`; the largest
//! margin is the smallest angle.

use std::collections::HashMap;
use std::ops::Index;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// The `k` unit vertices coding the class labels, stored as a dense
/// row-major `k x (k-1)` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CodingSimplex {
    k: usize,
    vertices: Vec<f64>,
}

impl CodingSimplex {
    /// Builds the simplex from its closed form:
    /// `Y_1 = (k-1)^(-1/2) 1` and
    /// `Y_j = -(1 + sqrt(k)) / (k-1)^(3/2) 1 + sqrt(k/(k-1)) e_(j-1)` for `j >= 2`.
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid(format!(
                "class count must be at least 2, got {k}"
            )));
        }
        let dim = k - 1;
        let kf = k as f64;
        let km1 = dim as f64;
        let first = km1.powf(-0.5);
        let common = -(1.0 + kf.sqrt()) / km1.powf(1.5);
        let spike = (kf / km1).sqrt();
        let mut vertices = vec![0.0; k * dim];
        for q in 0..dim {
            vertices[q] = first;
        }
        for j in 1..k {
            let row = &mut vertices[j * dim..(j + 1) * dim];
            for (q, v) in row.iter_mut().enumerate() {
                *v = common + if q == j - 1 { spike } else { 0.0 };
            }
        }
        Ok(CodingSimplex { k, vertices })
    }

    /// Process-wide cached simplex for `k` classes.
    pub fn shared(k: usize) -> Result<Arc<CodingSimplex>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<CodingSimplex>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(s) = guard.get(&k) {
            return Ok(Arc::clone(s));
        }
        let s = Arc::new(CodingSimplex::new(k)?);
        guard.insert(k, Arc::clone(&s));
        Ok(s)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Dimension of the coding space, `k - 1`.
    pub fn dim(&self) -> usize {
        self.k - 1
    }

    /// Vertex for the 0-based class index `j`.
    pub fn vertex(&self, j: usize) -> &[f64] {
        let dim = self.dim();
        &self.vertices[j * dim..(j + 1) * dim]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> {
        self.vertices.chunks_exact(self.dim())
    }

    /// Row-major `k x (k-1)` vertex matrix.
    pub fn as_row_major(&self) -> &[f64] {
        &self.vertices
    }

    /// Angle margins `<Y_j, f>` for all classes.
    pub fn angle_margins(&self, f_value: &[f64]) -> Result<MarginVector> {
        if f_value.len() != self.dim() {
            return Err(Error::invalid(format!(
                "function value has dimension {}, coding space has dimension {}",
                f_value.len(),
                self.dim()
            )));
        }
        Ok(MarginVector(
            self.vertices().map(|y| dot(y, f_value)).collect(),
        ))
    }

    /// Margin of a single 0-based class index; no dimension check.
    #[inline]
    pub fn margin(&self, j: usize, f_value: &[f64]) -> f64 {
        dot(self.vertex(j), f_value)
    }
}

/// Free-function form of [`CodingSimplex::new`].
pub fn build_simplex(k: usize) -> Result<CodingSimplex> {
    CodingSimplex::new(k)
}

/// Free-function form of [`CodingSimplex::angle_margins`].
pub fn angle_margins(f_value: &[f64], simplex: &CodingSimplex) -> Result<MarginVector> {
    simplex.angle_margins(f_value)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The `k` angle margins of one observation. Index `j` holds the margin of
/// class label `j + 1`. The margins of any function value sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginVector(pub Vec<f64>);

impl MarginVector {
    pub fn new(margins: Vec<f64>) -> Self {
        MarginVector(margins)
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// 1-based label of the largest margin; ties go to the smallest label.
    pub fn argmax_label(&self) -> usize {
        let mut best = 0;
        for (j, &m) in self.0.iter().enumerate() {
            if m > self.0[best] {
                best = j;
            }
        }
        best + 1
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, m| acc.max(m.abs()))
    }
}

impl Index<usize> for MarginVector {
    type Output = f64;
    fn index(&self, j: usize) -> &f64 {
        &self.0[j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn binary_simplex_is_plus_minus_one() {
        let s = build_simplex(2).unwrap();
        assert_abs_diff_eq!(s.vertex(0)[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.vertex(1)[0], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn three_class_vertices() {
        let s = build_simplex(3).unwrap();
        let expect = [[0.70711, 0.70711], [0.25882, -0.96593], [-0.96593, 0.25882]];
        for (j, e) in expect.iter().enumerate() {
            for q in 0..2 {
                assert_abs_diff_eq!(s.vertex(j)[q], e[q], epsilon = 1e-5);
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_abs_diff_eq!(dot(s.vertex(i), s.vertex(j)), -0.5, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_single_class() {
        assert!(matches!(build_simplex(1), Err(Error::InvalidArgument(_))));
        assert!(build_simplex(0).is_err());
    }

    #[test]
    fn margins_examples() {
        let s3 = build_simplex(3).unwrap();
        let m = s3.angle_margins(&[0.0, 0.0]).unwrap();
        assert!(m.0.iter().all(|&v| v == 0.0));

        let y1 = s3.vertex(0).to_vec();
        let m = s3.angle_margins(&y1).unwrap();
        assert_abs_diff_eq!(m[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m[1], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(m[2], -0.5, epsilon = 1e-12);

        let s2 = build_simplex(2).unwrap();
        let m = s2.angle_margins(&[0.7]).unwrap();
        assert_abs_diff_eq!(m[0], 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(m[1], -0.7, epsilon = 1e-15);
    }

    #[test]
    fn margins_dimension_mismatch() {
        let s = build_simplex(4).unwrap();
        assert!(s.angle_margins(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn shared_cache_returns_same_instance() {
        let a = CodingSimplex::shared(5).unwrap();
        let b = CodingSimplex::shared(5).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
