//! Kernel machines with the squared RKHS-norm penalty.
//!
//! With `K = V diag(mu) V'` the fit `f_q = theta_{q,0} + K theta_q` and the
//! penalty `theta_q' K theta_q = |g_q|^2` are expressed through the feature
//! map `Phi = V diag(sqrt(mu))` and `g_q = diag(sqrt(mu)) V' theta_q`, which
//! turns training into a linear L2 problem on `Phi` solved by ADMM.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::losses::BentLoss;

use super::admm::AdmmSolver;
use super::{check_lambda, KernelModel, MarginProblem, Penalty, SolverOptions, SolverReport};

/// Relative eigenvalue floor below which feature directions are dropped.
const RANK_TOL: f64 = 1e-12;
/// Allowed negative eigenvalue, relative to the largest diagonal entry.
const PSD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Gaussian,
}

/// `Linear`: `K(x, x') = <x, x'>`. `Gaussian`: `exp(-|x - x'|^2 / (2 h^2))`
/// with bandwidth `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub bandwidth: f64,
}

impl KernelSpec {
    pub fn linear() -> Self {
        KernelSpec {
            kind: KernelKind::Linear,
            bandwidth: 1.0,
        }
    }

    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::invalid(format!(
                "Gaussian bandwidth must be finite and > 0, got {bandwidth}"
            )));
        }
        Ok(KernelSpec {
            kind: KernelKind::Gaussian,
            bandwidth,
        })
    }

    /// Parses `linear`, `gaussian` (bandwidth from `bandwidth`) or
    /// `gaussian:<h>`.
    pub fn parse(s: &str, bandwidth: f64) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.split_once(':') {
            Some(("gaussian", h)) => {
                let h: f64 = h
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad Gaussian bandwidth in '{s}'")))?;
                Self::gaussian(h)
            }
            None if lower == "linear" => Ok(Self::linear()),
            None if lower == "gaussian" || lower == "rbf" => Self::gaussian(bandwidth),
            _ => Err(Error::invalid(format!(
                "unknown kernel '{s}' (expected linear or gaussian)"
            ))),
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            KernelKind::Linear => "linear".to_string(),
            KernelKind::Gaussian => format!("gaussian:{}", self.bandwidth),
        }
    }

    pub fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Linear => x.iter().zip(z).map(|(a, b)| a * b).sum(),
            KernelKind::Gaussian => {
                let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * self.bandwidth * self.bandwidth)).exp()
            }
        }
    }
}

/// Symmetric `n x n` Gram matrix of the rows of `data`.
pub fn gram_matrix(data: &Dataset, kernel: &KernelSpec) -> DMatrix<f64> {
    let n = data.n();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(data.row(i), data.row(j));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Eigen-feature representation of one training set, reusable across
/// `lambda` and loss settings.
pub struct KernelTrainer {
    kernel: KernelSpec,
    support: Vec<f64>,
    p: usize,
    k: usize,
    n: usize,
    /// `V_r diag(mu_r^{-1/2})`, `n x r`, maps `g` back to `theta`.
    back: DMatrix<f64>,
    solver: AdmmSolver,
    penalize_intercept: bool,
}

impl KernelTrainer {
    pub fn new(data: &Dataset, kernel: KernelSpec, penalize_intercept: bool) -> Result<Self> {
        let n = data.n();
        let gram = gram_matrix(data, &kernel);
        let max_diag = (0..n).map(|i| gram[(i, i)]).fold(0.0f64, f64::max);
        let eig = SymmetricEigen::new(gram);
        let min_eig = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let max_eig = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
        if min_eig < -PSD_TOL * max_diag.max(1.0) {
            return Err(Error::NotPsd {
                kernel: kernel.name(),
                min_eigenvalue: min_eig,
            });
        }
        let keep: Vec<usize> = (0..n)
            .filter(|&i| eig.eigenvalues[i] > RANK_TOL * max_eig.max(f64::MIN_POSITIVE))
            .collect();
        let r = keep.len();
        let d = r + 1;
        let mut rows = vec![0.0; n * d];
        let mut back = DMatrix::zeros(n, r);
        for (c, &e) in keep.iter().enumerate() {
            let mu = eig.eigenvalues[e];
            let s = mu.sqrt();
            for i in 0..n {
                let v = eig.eigenvectors[(i, e)];
                rows[i * d + 1 + c] = v * s;
                back[(i, c)] = v / s;
            }
        }
        for i in 0..n {
            rows[i * d] = 1.0;
        }
        let prob = MarginProblem::from_augmented(rows, d, data)?;
        let mut penalized = vec![true; d];
        penalized[0] = penalize_intercept;
        let solver = AdmmSolver::from_problem(prob, penalized, r)?;
        Ok(KernelTrainer {
            kernel,
            support: data.features().to_vec(),
            p: data.p(),
            k: data.k(),
            n,
            back,
            solver,
            penalize_intercept,
        })
    }

    /// Numerical rank of the Gram matrix.
    pub fn rank(&self) -> usize {
        self.back.ncols()
    }

    pub fn solve(
        &self,
        loss: &BentLoss,
        lambda: f64,
        opts: &SolverOptions,
    ) -> Result<(KernelModel, SolverReport)> {
        check_lambda(lambda)?;
        let q = self.k - 1;
        let (w, report) = self
            .solver
            .solve_raw(loss, Penalty::L2, lambda, opts, None)?;
        let r = self.rank();
        let mut theta = vec![0.0; (self.n + 1) * q];
        theta[..q].copy_from_slice(&w[..q]);
        for i in 0..self.n {
            for qq in 0..q {
                let mut s = 0.0;
                for c in 0..r {
                    s += self.back[(i, c)] * w[(c + 1) * q + qq];
                }
                theta[(i + 1) * q + qq] = s;
            }
        }
        let model = KernelModel::new(
            theta,
            self.support.clone(),
            self.p,
            self.k,
            self.kernel,
            lambda,
            loss.clone(),
            self.penalize_intercept,
        )?;
        Ok((model, report))
    }
}

/// Kernel bent-loss machine; the intercept penalty follows
/// `opts.penalize_kernel_intercept`.
pub fn train_kernel(
    data: &Dataset,
    loss: &BentLoss,
    kernel: &KernelSpec,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<KernelModel> {
    check_lambda(lambda)?;
    let trainer = KernelTrainer::new(data, *kernel, opts.penalize_kernel_intercept)?;
    Ok(trainer.solve(loss, lambda, opts)?.0)
}
