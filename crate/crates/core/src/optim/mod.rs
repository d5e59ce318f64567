//! Regularized bent-loss training.
//!
//! Every solver minimizes
//!
//! ```text
//! (1/n) sum_i sum_{j != y_i} l(<Y_j, f(x_i)>) + lambda * R(f)
//! ```
//!
//! with `R = 1/2 sum_q |beta_q|_2^2` (L2), `R = sum_q |beta_q|_1` (L1), or
//! `R = 1/2 sum_q theta_q' K theta_q` for kernel machines. The linear L2 dual
//! is solved by coordinate descent ([`train_linear_dual_cd`]); every other
//! combination goes through the ADMM primal solver ([`train_linear_primal`]),
//! which also serves as the reference for the dual path.

mod admm;
mod dual_cd;
mod kernel;
mod model;

pub use admm::{train_linear_primal, AdmmSolver, PrimalFit};
pub use dual_cd::{train_linear_dual_cd, DualCoordinateDescent, DualFit, DualState};
pub use kernel::{gram_matrix, train_kernel, KernelKind, KernelSpec, KernelTrainer};
pub use model::{Classifier, KernelModel, LinearModel, Model};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coding::{dot, CodingSimplex};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::losses::BentLoss;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    L1,
    L2,
}

impl Penalty {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Penalty::L1),
            "l2" => Ok(Penalty::L2),
            other => Err(Error::invalid(format!(
                "unknown penalty '{other}' (expected l1 or l2)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Penalty::L1 => "l1",
            Penalty::L2 => "l2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Dual coordinate descent stops once the largest coordinate move in an
    /// epoch falls below this.
    pub tol: f64,
    /// Relative objective-change tolerance of the primal solver, also used
    /// for its residual test.
    pub primal_tol: f64,
    /// Epoch cap (dual) and iteration cap (primal).
    pub max_epochs: usize,
    /// Initial ADMM penalty parameter.
    pub rho: f64,
    /// Penalize the kernel intercepts `theta_{q,0}`.
    pub penalize_kernel_intercept: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-7,
            primal_tol: 1e-6,
            max_epochs: 10_000,
            rho: 1.0,
            penalize_kernel_intercept: false,
        }
    }
}

impl SolverOptions {
    /// Settings used when one solver acts as the reference for another.
    pub fn tight() -> Self {
        SolverOptions {
            tol: 1e-10,
            primal_tol: 1e-11,
            max_epochs: 200_000,
            ..Self::default()
        }
    }
}

/// Convergence summary shared by all solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    /// Objective of the returned iterate at each check point.
    pub trace: Vec<f64>,
    /// Final optimality residual in the solver's own units.
    pub residual: f64,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!(
            "regularization weight lambda must be finite and > 0, got {lambda}"
        )));
    }
    Ok(())
}

/// Augmented design (leading constant column) plus the coding of the labels.
pub(crate) struct MarginProblem {
    pub n: usize,
    /// Columns of the augmented design.
    pub d: usize,
    /// Coding dimension `k - 1`.
    pub q: usize,
    pub k: usize,
    pub rows: Vec<f64>,
    pub labels: Vec<usize>,
    pub simplex: Arc<CodingSimplex>,
}

impl MarginProblem {
    pub fn linear(data: &Dataset) -> Result<Self> {
        let d = data.p() + 1;
        let mut rows = Vec::with_capacity(data.n() * d);
        for r in data.rows() {
            rows.push(1.0);
            rows.extend_from_slice(r);
        }
        Self::from_augmented(rows, d, data)
    }

    pub fn from_augmented(rows: Vec<f64>, d: usize, data: &Dataset) -> Result<Self> {
        let simplex = CodingSimplex::shared(data.k())?;
        Ok(MarginProblem {
            n: data.n(),
            d,
            q: data.k() - 1,
            k: data.k(),
            rows,
            labels: data.labels().iter().map(|l| l - 1).collect(),
            simplex,
        })
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    /// Number of (observation, wrong class) pairs.
    pub fn pairs(&self) -> usize {
        self.n * (self.k - 1)
    }

    /// `f(x_i) = W' x_i` for a row-major `d x q` coefficient matrix.
    pub fn f_value(&self, w: &[f64], i: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (l, &x) in self.row(i).iter().enumerate() {
            if x != 0.0 {
                let wl = &w[l * self.q..(l + 1) * self.q];
                for (o, &c) in out.iter_mut().zip(wl) {
                    *o += x * c;
                }
            }
        }
    }

    /// Wrong-class margins `<Y_j, f(x_i)>`, pair-major.
    pub fn apply(&self, w: &[f64], out: &mut [f64]) {
        let mut f = vec![0.0; self.q];
        let mut pos = 0;
        for i in 0..self.n {
            self.f_value(w, i, &mut f);
            let y = self.labels[i];
            for j in 0..self.k {
                if j != y {
                    out[pos] = dot(self.simplex.vertex(j), &f);
                    pos += 1;
                }
            }
        }
    }

    /// Adjoint of [`apply`](Self::apply), accumulated into `out` (overwritten).
    pub fn apply_adjoint(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        let mut g = vec![0.0; self.q];
        let mut pos = 0;
        for i in 0..self.n {
            g.iter_mut().for_each(|x| *x = 0.0);
            let y = self.labels[i];
            for j in 0..self.k {
                if j != y {
                    let c = v[pos];
                    pos += 1;
                    if c != 0.0 {
                        for (gv, &yv) in g.iter_mut().zip(self.simplex.vertex(j)) {
                            *gv += c * yv;
                        }
                    }
                }
            }
            for (l, &x) in self.row(i).iter().enumerate() {
                if x != 0.0 {
                    let ol = &mut out[l * self.q..(l + 1) * self.q];
                    for (o, &gv) in ol.iter_mut().zip(&g) {
                        *o += x * gv;
                    }
                }
            }
        }
    }

    pub fn empirical_risk(&self, loss: &BentLoss, w: &[f64]) -> f64 {
        let mut margins = vec![0.0; self.pairs()];
        self.apply(w, &mut margins);
        margins.iter().map(|&u| loss.value(u)).sum::<f64>() / self.n as f64
    }
}

/// `R(W)` over the penalized rows of a row-major `d x q` matrix.
pub(crate) fn penalty_value(penalty: Penalty, w: &[f64], q: usize, penalized: &[bool]) -> f64 {
    w.chunks_exact(q)
        .zip(penalized)
        .filter(|(_, &p)| p)
        .map(|(row, _)| match penalty {
            Penalty::L1 => row.iter().map(|v| v.abs()).sum::<f64>(),
            Penalty::L2 => 0.5 * row.iter().map(|v| v * v).sum::<f64>(),
        })
        .sum()
}

/// Training objective of a linear model on `data`.
pub fn linear_objective(model: &LinearModel, data: &Dataset) -> Result<f64> {
    if data.p() != model.n_features() || data.k() != model.k() {
        return Err(Error::invalid("model and data dimensions differ"));
    }
    let prob = MarginProblem::linear(data)?;
    let penalized = vec![true; prob.d];
    Ok(prob.empirical_risk(model.loss(), model.beta())
        + model.lambda() * penalty_value(model.penalty(), model.beta(), prob.q, &penalized))
}
