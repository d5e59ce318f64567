//! Synthetic benchmark generators.
//!
//! Each draw picks the class uniformly, then samples the two signal
//! covariates given the class, then appends i.i.d. `N(0, 0.01)` noise
//! covariates (standard deviation 0.1).
//!
//! Randomness comes from ChaCha20 seeded by `seed`, with a separate stream
//! per `(replicate, role)`, so a replicate's data does not depend on which
//! other replicates were generated or in what order.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::Dataset;

pub const NOISE_SD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub example: u8,
    pub n_train: usize,
    pub n_tune: usize,
    pub n_test: usize,
    pub noise_dim: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    /// Default sizes and noise dimension of example `id` (1, 2 or 3).
    pub fn example(id: u8, seed: u64) -> Result<Self> {
        let (n_train, n_tune, n_test, noise_dim) = match id {
            1 => (150, 150, 12_000, 98),
            2 => (120, 120, 12_000, 398),
            3 => (160, 160, 10_000, 98),
            _ => {
                return Err(Error::invalid(format!(
                    "unknown example {id} (expected 1, 2 or 3)"
                )))
            }
        };
        Ok(GeneratorSpec {
            example: id,
            n_train,
            n_tune,
            n_test,
            noise_dim,
            seed,
        })
    }

    pub fn k(&self) -> usize {
        match self.example {
            2 => 3,
            _ => 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.example) {
            return Err(Error::invalid(format!(
                "unknown example {} (expected 1, 2 or 3)",
                self.example
            )));
        }
        if self.n_train == 0 || self.n_tune == 0 || self.n_test == 0 {
            return Err(Error::invalid("generator sample sizes must be at least 1"));
        }
        Ok(())
    }

    /// Train, tune and test sets of replicate `replicate`.
    pub fn generate(&self, replicate: u64) -> Result<Splits> {
        self.validate()?;
        let sizes = [self.n_train, self.n_tune, self.n_test];
        let mut sets = sizes.iter().enumerate().map(|(role, &n)| {
            let mut rng = stream_rng(self.seed, replicate, role as u64);
            sample(self.example, n, self.noise_dim, &mut rng)
        });
        Ok(Splits {
            train: sets.next().unwrap()?,
            tune: sets.next().unwrap()?,
            test: sets.next().unwrap()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: Dataset,
    pub tune: Dataset,
    pub test: Dataset,
}

/// Generator for stream `role` of replicate `replicate`.
pub fn stream_rng(seed: u64, replicate: u64, role: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(replicate.wrapping_mul(4).wrapping_add(role));
    rng
}

/// Four-class overlapping squares.
pub fn gen_example1(sizes: (usize, usize, usize), seed: u64) -> Result<Splits> {
    with_sizes(1, sizes, seed)
}

/// Three-class Gaussian mixtures, classes 1 and 2 sharing two components.
pub fn gen_example2(sizes: (usize, usize, usize), seed: u64) -> Result<Splits> {
    with_sizes(2, sizes, seed)
}

/// Four-class segment-uniform means, classes {1, 2} and {3, 4} close.
pub fn gen_example3(sizes: (usize, usize, usize), seed: u64) -> Result<Splits> {
    with_sizes(3, sizes, seed)
}

fn with_sizes(id: u8, sizes: (usize, usize, usize), seed: u64) -> Result<Splits> {
    let mut spec = GeneratorSpec::example(id, seed)?;
    spec.n_train = sizes.0;
    spec.n_tune = sizes.1;
    spec.n_test = sizes.2;
    spec.generate(0)
}

fn sample<R: Rng>(example: u8, n: usize, noise_dim: usize, rng: &mut R) -> Result<Dataset> {
    let k = if example == 2 { 3 } else { 4 };
    let p = 2 + noise_dim;
    let signal = Normal::new(0.0, 0.2).expect("valid sd");
    let noise = Normal::new(0.0, NOISE_SD).expect("valid sd");
    let mut x = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let class = rng.gen_range(1..=k);
        let (x1, x2) = match example {
            1 => {
                let (r1, r2) = EXAMPLE1_BOXES[class - 1];
                (rng.gen_range(r1.0..=r1.1), rng.gen_range(r2.0..=r2.1))
            }
            2 => {
                let (mx, my) = example2_component(class, rng);
                (mx + signal.sample(rng), my + signal.sample(rng))
            }
            _ => {
                let (zx, zy) = EXAMPLE3_ENDS[class - 1];
                let t: f64 = rng.gen();
                (t * zx + signal.sample(rng), t * zy + signal.sample(rng))
            }
        };
        x.push(x1);
        x.push(x2);
        x.extend((0..noise_dim).map(|_| noise.sample(rng)));
        y.push(class);
    }
    let names = (1..=p).map(|j| format!("x{j}")).collect();
    Dataset::new(x, p, y, k)?.with_feature_names(names)
}

type Range = (f64, f64);

const EXAMPLE1_BOXES: [(Range, Range); 4] = [
    ((-0.3, 1.0), (-0.3, 1.0)),
    ((-0.3, 1.0), (-1.0, 0.3)),
    ((-1.0, 0.3), (-1.0, 0.3)),
    ((-1.0, 0.3), (-0.3, 1.0)),
];

const EXAMPLE3_ENDS: [(f64, f64); 4] = [(1.0, 0.2), (1.0, -0.2), (-1.0, 0.2), (-1.0, -0.2)];

fn example2_component<R: Rng>(class: usize, rng: &mut R) -> (f64, f64) {
    let h = 3f64.sqrt() / 2.0;
    let c = rng.gen_range(0..3);
    match (class, c) {
        (1, 0) => (-h, 0.5),
        (2, 0) => (-h, -0.5),
        (1 | 2, 1) => (-1.0, 0.0),
        (1 | 2, _) => (0.0, 0.0),
        (_, 0 | 1) => (1.0, 0.0),
        _ => (0.0, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_class_boxes() {
        let s = gen_example1((2000, 1, 1), 3).unwrap();
        let t = &s.train;
        assert_eq!(t.p(), 100);
        for i in 0..t.n() {
            let r = t.row(i);
            let ((a, b), (c, d)) = EXAMPLE1_BOXES[t.label(i) - 1];
            assert!(r[0] >= a && r[0] <= b && r[1] >= c && r[1] <= d);
        }
    }

    #[test]
    fn seeds_are_deterministic_and_streams_independent() {
        let spec = GeneratorSpec::example(3, 11).unwrap();
        let a = spec.generate(4).unwrap();
        let b = spec.generate(4).unwrap();
        assert_eq!(a, b);
        let c = spec.generate(5).unwrap();
        assert_ne!(a.train, c.train);
        assert_ne!(a.train, a.tune);
    }

    #[test]
    fn example3_class1_mean() {
        let mut spec = GeneratorSpec::example(3, 1).unwrap();
        spec.n_train = 40_000;
        spec.noise_dim = 0;
        let t = spec.generate(0).unwrap().train;
        let (mut sx, mut sy, mut c) = (0.0, 0.0, 0.0);
        for i in (0..t.n()).filter(|&i| t.label(i) == 1) {
            sx += t.row(i)[0];
            sy += t.row(i)[1];
            c += 1.0;
        }
        assert!((sx / c - 0.5).abs() < 0.02);
        assert!((sy / c - 0.1).abs() < 0.02);
    }

    #[test]
    fn example2_class3_mean() {
        let mut spec = GeneratorSpec::example(2, 2).unwrap();
        spec.n_train = 30_000;
        spec.noise_dim = 0;
        let t = spec.generate(0).unwrap().train;
        let (mut sx, mut sy, mut c) = (0.0, 0.0, 0.0);
        for i in (0..t.n()).filter(|&i| t.label(i) == 3) {
            sx += t.row(i)[0];
            sy += t.row(i)[1];
            c += 1.0;
        }
        assert!((sx / c - 2.0 / 3.0).abs() < 0.02);
        assert!((sy / c).abs() < 0.02);
    }

    #[test]
    fn bad_spec() {
        assert!(GeneratorSpec::example(4, 0).is_err());
        let mut s = GeneratorSpec::example(1, 0).unwrap();
        s.n_test = 0;
        assert!(s.generate(0).is_err());
    }
}
