use std::sync::Arc;

use crate::coding::{CodingSimplex, MarginVector};
use crate::error::{Error, Result};
use crate::losses::BentLoss;

use super::kernel::KernelSpec;
use super::Penalty;

/// Anything that maps an input to a function value in the coding space.
pub trait Classifier: Send + Sync {
    fn k(&self) -> usize;
    fn n_features(&self) -> usize;
    fn simplex(&self) -> &CodingSimplex;
    /// `f(x)` in `R^(k-1)`.
    fn f_value(&self, x: &[f64]) -> Vec<f64>;

    fn margins(&self, x: &[f64]) -> MarginVector {
        let f = self.f_value(x);
        MarginVector(
            self.simplex()
                .vertices()
                .map(|y| y.iter().zip(&f).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }
}

/// `f_q(x) = beta_q' (1, x)`, coefficients stored row-major `(p+1) x (k-1)`
/// with the intercept in row 0.
#[derive(Debug, Clone)]
pub struct LinearModel {
    beta: Vec<f64>,
    p: usize,
    k: usize,
    penalty: Penalty,
    lambda: f64,
    loss: BentLoss,
    simplex: Arc<CodingSimplex>,
}

impl LinearModel {
    pub fn new(
        beta: Vec<f64>,
        p: usize,
        k: usize,
        penalty: Penalty,
        lambda: f64,
        loss: BentLoss,
    ) -> Result<Self> {
        if beta.len() != (p + 1) * (k - 1) {
            return Err(Error::invalid(format!(
                "coefficient matrix has {} entries, expected {} x {}",
                beta.len(),
                p + 1,
                k - 1
            )));
        }
        if beta.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("coefficient matrix has non-finite entries"));
        }
        Ok(LinearModel {
            beta,
            p,
            k,
            penalty,
            lambda,
            loss,
            simplex: CodingSimplex::shared(k)?,
        })
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Coefficient of augmented feature `row` (0 = intercept) in column `q`.
    pub fn coef(&self, row: usize, q: usize) -> f64 {
        self.beta[row * (self.k - 1) + q]
    }

    pub fn penalty(&self) -> Penalty {
        self.penalty
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn loss(&self) -> &BentLoss {
        &self.loss
    }
}

impl Classifier for LinearModel {
    fn k(&self) -> usize {
        self.k
    }

    fn n_features(&self) -> usize {
        self.p
    }

    fn simplex(&self) -> &CodingSimplex {
        &self.simplex
    }

    fn f_value(&self, x: &[f64]) -> Vec<f64> {
        let q = self.k - 1;
        let mut f = self.beta[..q].to_vec();
        for (l, &xv) in x.iter().enumerate() {
            if xv != 0.0 {
                let row = &self.beta[(l + 1) * q..(l + 2) * q];
                for (fv, &b) in f.iter_mut().zip(row) {
                    *fv += xv * b;
                }
            }
        }
        f
    }
}

/// `f_q(x) = sum_i theta_{q,i} K(x_i, x) + theta_{q,0}`; `theta` is stored
/// row-major `(n+1) x (k-1)` with the intercepts in row 0.
#[derive(Debug, Clone)]
pub struct KernelModel {
    theta: Vec<f64>,
    support: Vec<f64>,
    n_support: usize,
    p: usize,
    k: usize,
    kernel: KernelSpec,
    lambda: f64,
    loss: BentLoss,
    penalize_intercept: bool,
    simplex: Arc<CodingSimplex>,
}

impl KernelModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        theta: Vec<f64>,
        support: Vec<f64>,
        p: usize,
        k: usize,
        kernel: KernelSpec,
        lambda: f64,
        loss: BentLoss,
        penalize_intercept: bool,
    ) -> Result<Self> {
        let n_support = if p == 0 { 0 } else { support.len() / p };
        if n_support * p != support.len() || theta.len() != (n_support + 1) * (k - 1) {
            return Err(Error::invalid("kernel model dimensions are inconsistent"));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "kernel coefficients have non-finite entries",
            ));
        }
        Ok(KernelModel {
            theta,
            support,
            n_support,
            p,
            k,
            kernel,
            lambda,
            loss,
            penalize_intercept,
            simplex: CodingSimplex::shared(k)?,
        })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn support_points(&self) -> &[f64] {
        &self.support
    }

    pub fn n_support(&self) -> usize {
        self.n_support
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn loss(&self) -> &BentLoss {
        &self.loss
    }

    pub fn penalize_intercept(&self) -> bool {
        self.penalize_intercept
    }
}

impl Classifier for KernelModel {
    fn k(&self) -> usize {
        self.k
    }

    fn n_features(&self) -> usize {
        self.p
    }

    fn simplex(&self) -> &CodingSimplex {
        &self.simplex
    }

    fn f_value(&self, x: &[f64]) -> Vec<f64> {
        let q = self.k - 1;
        let mut f = self.theta[..q].to_vec();
        for i in 0..self.n_support {
            let kv = self
                .kernel
                .eval(&self.support[i * self.p..(i + 1) * self.p], x);
            let row = &self.theta[(i + 1) * q..(i + 2) * q];
            for (fv, &t) in f.iter_mut().zip(row) {
                *fv += kv * t;
            }
        }
        f
    }
}

/// A trained model of either family.
#[derive(Debug, Clone)]
pub enum Model {
    Linear(LinearModel),
    Kernel(KernelModel),
}

impl Model {
    pub fn loss(&self) -> &BentLoss {
        match self {
            Model::Linear(m) => m.loss(),
            Model::Kernel(m) => m.loss(),
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            Model::Linear(m) => m.lambda(),
            Model::Kernel(m) => m.lambda(),
        }
    }

    fn inner(&self) -> &dyn Classifier {
        match self {
            Model::Linear(m) => m,
            Model::Kernel(m) => m,
        }
    }
}

impl From<LinearModel> for Model {
    fn from(m: LinearModel) -> Self {
        Model::Linear(m)
    }
}

impl From<KernelModel> for Model {
    fn from(m: KernelModel) -> Self {
        Model::Kernel(m)
    }
}

impl Classifier for Model {
    fn k(&self) -> usize {
        self.inner().k()
    }

    fn n_features(&self) -> usize {
        self.inner().n_features()
    }

    fn simplex(&self) -> &CodingSimplex {
        self.inner().simplex()
    }

    fn f_value(&self, x: &[f64]) -> Vec<f64> {
        self.inner().f_value(x)
    }
}
