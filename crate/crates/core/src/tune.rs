//! Grid search over `(lambda, delta, a)` by 0-d-1 loss.
//!
//! Each `(lambda, a)` pair is fitted once. Thresholds are
//! `delta = fraction * max_{i,j} |<Y_j, f(x_i)>|` over the training points
//! of that fit, so rescoring a new `delta` needs no refit.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coding::MarginVector;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::losses::{BentLoss, LossKind};
use crate::optim::{
    AdmmSolver, DualCoordinateDescent, KernelSpec, KernelTrainer, Model, Penalty, SolverOptions,
};
use crate::predict::{margins_of, predict_refine, zero_d_one_loss, Prediction, RejectCost};

/// Extreme bending slopes `a1 = (k-1-d)/(kd-d)` and `a2 = (k-1)(1-d)/d`.
pub fn a_bounds(k: usize, d: f64) -> Result<(f64, f64)> {
    RejectCost::new(d, k)?;
    let kf = k as f64;
    Ok(((kf - 1.0 - d) / (kf * d - d), (kf - 1.0) * (1.0 - d) / d))
}

/// A bending slope given directly or as one of the two bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ACandidate {
    A1,
    A2,
    Value(f64),
}

impl ACandidate {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a1" => Ok(ACandidate::A1),
            "a2" => Ok(ACandidate::A2),
            other => other.parse::<f64>().map(ACandidate::Value).map_err(|_| {
                Error::invalid(format!("bad bending slope '{s}' (a1, a2 or a number)"))
            }),
        }
    }

    pub fn resolve(self, k: usize, d: f64) -> Result<f64> {
        let (a1, a2) = a_bounds(k, d)?;
        let a = match self {
            ACandidate::A1 => a1,
            ACandidate::A2 => a2,
            ACandidate::Value(v) => v,
        };
        if !(a > 1.0) || !a.is_finite() {
            return Err(Error::invalid(format!(
                "bending slope {self} = {a} is not > 1 for k = {k}, d = {d}"
            )));
        }
        Ok(a)
    }
}

impl fmt::Display for ACandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ACandidate::A1 => write!(f, "a1"),
            ACandidate::A2 => write!(f, "a2"),
            ACandidate::Value(v) => write!(f, "{v}"),
        }
    }
}

impl TryFrom<String> for ACandidate {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Self::parse(&s)
    }
}

impl From<ACandidate> for String {
    fn from(a: ACandidate) -> String {
        a.to_string()
    }
}

/// `count` values log-spaced over `[lo, hi]`, largest first.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    let (l, h) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (h - (h - l) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningGrid {
    pub lambdas: Vec<f64>,
    pub delta_fractions: Vec<f64>,
    pub a_candidates: Vec<ACandidate>,
    pub d: f64,
    /// Also fit the unbent loss as the regular classifier.
    #[serde(default = "yes")]
    pub regular: bool,
}

fn yes() -> bool {
    true
}

impl TuningGrid {
    /// Thirty `lambda` values over `[1e-4, 1e2]`, fractions
    /// `0.3, 0.25, ..., 0.05, 0`, both slope bounds and a regular fit.
    pub fn new(d: f64) -> Self {
        TuningGrid {
            lambdas: log_grid(1e-4, 1e2, 30),
            delta_fractions: vec![0.3, 0.25, 0.2, 0.15, 0.1, 0.05, 0.0],
            a_candidates: vec![ACandidate::A1, ACandidate::A2],
            d,
            regular: true,
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        RejectCost::new(self.d, k)?;
        if self.lambdas.is_empty()
            || self.delta_fractions.is_empty()
            || self.a_candidates.is_empty()
        {
            return Err(Error::invalid("tuning grid lists must be nonempty"));
        }
        if let Some(l) = self.lambdas.iter().find(|&&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::invalid(format!("grid lambda {l} is not > 0")));
        }
        if let Some(f) = self
            .delta_fractions
            .iter()
            .find(|&&f| !(0.0..1.0).contains(&f))
        {
            return Err(Error::invalid(format!(
                "delta fraction {f} is outside [0, 1)"
            )));
        }
        for a in &self.a_candidates {
            a.resolve(k, self.d)?;
        }
        Ok(())
    }
}

/// What to fit at each grid cell.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub loss: LossKind,
    pub penalty: Penalty,
    /// Kernel machine when set (penalty is then the squared RKHS norm).
    pub kernel: Option<KernelSpec>,
    pub opts: SolverOptions,
}

#[derive(Debug, Clone)]
pub enum Validation<'a> {
    TuningSet(&'a Dataset),
    /// Stratified folds, assigned by a seeded shuffle within each class.
    CrossValidation {
        folds: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub lambda: f64,
    pub a: f64,
    pub a_label: ACandidate,
    pub delta_fraction: f64,
    /// Threshold on the final fit (training-set margin scale).
    pub delta: f64,
    /// Mean 0-d-1 loss on the validation data.
    pub loss: f64,
}

/// One `(lambda, a)` fit on the full training set.
#[derive(Debug, Clone)]
pub struct Fit {
    pub lambda: f64,
    pub a: f64,
    pub model: Model,
    /// `max_{i,j} |<Y_j, f(x_i)>|` on the training set.
    pub margin_scale: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct TuneResult {
    /// Grid order: `a`, then `lambda`, then `delta_fraction`.
    pub cells: Vec<GridCell>,
    pub best: usize,
    /// Training-set fits in grid order (`a`, then `lambda`).
    pub fits: Vec<Fit>,
    /// Unbent fits along the `lambda` path (largest first), if requested.
    pub regular_fits: Vec<Fit>,
    /// Validation 0-1 loss of each regular fit.
    pub regular_losses: Vec<f64>,
    /// Index of the chosen regular fit.
    pub regular: Option<usize>,
    pub warnings: Vec<String>,
}

impl TuneResult {
    pub fn best_cell(&self) -> &GridCell {
        &self.cells[self.best]
    }

    pub fn fit_for(&self, cell: &GridCell) -> &Fit {
        self.fits
            .iter()
            .find(|f| f.lambda == cell.lambda && f.a == cell.a)
            .expect("every cell has a fit")
    }

    pub fn best_model(&self) -> &Model {
        &self.fit_for(self.best_cell()).model
    }

    pub fn regular_model(&self) -> Option<&Model> {
        self.regular.map(|i| &self.regular_fits[i].model)
    }

    /// `key value` lines describing the selection.
    pub fn summary(&self) -> Vec<(String, String)> {
        let b = self.best_cell();
        let mut v = vec![
            ("tune.lambda".to_string(), format!("{:e}", b.lambda)),
            ("tune.a".to_string(), format!("{:e}", b.a)),
            ("tune.a_label".to_string(), b.a_label.to_string()),
            (
                "tune.delta_fraction".to_string(),
                format!("{}", b.delta_fraction),
            ),
            ("tune.delta".to_string(), format!("{:e}", b.delta)),
            ("tune.loss".to_string(), format!("{}", b.loss)),
            ("tune.cells".to_string(), self.cells.len().to_string()),
        ];
        if let Some(r) = self.regular {
            v.push((
                "tune.regular_lambda".into(),
                format!("{:e}", self.regular_fits[r].lambda),
            ));
            v.push((
                "tune.regular_loss".into(),
                format!("{}", self.regular_losses[r]),
            ));
        }
        v
    }

    /// Writes every grid cell as CSV.
    pub fn write_cells_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::io("<grid>", std::io::Error::other(e));
        w.write_record(["lambda", "a", "a_label", "delta_fraction", "delta", "loss"])
            .map_err(io)?;
        for c in &self.cells {
            w.write_record([
                format!("{:e}", c.lambda),
                format!("{:e}", c.a),
                c.a_label.to_string(),
                format!("{}", c.delta_fraction),
                format!("{:e}", c.delta),
                format!("{}", c.loss),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::io("<grid>", e))
    }
}

/// Fits along a decreasing `lambda` path, warm-starting ADMM fits. Linear
/// hinge fits with the L2 penalty use dual coordinate descent.
struct PathFitter<'a> {
    inner: FitterKind<'a>,
}

enum FitterKind<'a> {
    Dual(&'a Dataset),
    Linear(AdmmSolver),
    Kernel(KernelTrainer),
}

impl<'a> PathFitter<'a> {
    fn new(train: &'a Dataset, spec: &ModelSpec) -> Result<Self> {
        Ok(PathFitter {
            inner: match spec.kernel {
                None if spec.loss == LossKind::BentHinge && spec.penalty == Penalty::L2 => {
                    FitterKind::Dual(train)
                }
                None => FitterKind::Linear(AdmmSolver::new(train)?),
                Some(k) => FitterKind::Kernel(KernelTrainer::new(
                    train,
                    k,
                    spec.opts.penalize_kernel_intercept,
                )?),
            },
        })
    }

    /// Fits for `lambdas` in the given order.
    fn path(
        &self,
        spec: &ModelSpec,
        loss: &BentLoss,
        lambdas: &[f64],
    ) -> Result<Vec<(Model, bool)>> {
        let mut out = Vec::with_capacity(lambdas.len());
        let mut warm: Option<Vec<f64>> = None;
        for &lambda in lambdas {
            match &self.inner {
                FitterKind::Dual(data) => {
                    let fit =
                        DualCoordinateDescent::new(data, loss, lambda, &spec.opts)?.solve()?;
                    out.push((fit.model.into(), fit.report.converged));
                }
                FitterKind::Linear(s) => {
                    let fit = s.solve(loss, spec.penalty, lambda, &spec.opts, warm.as_deref())?;
                    warm = Some(fit.model.beta().to_vec());
                    out.push((fit.model.into(), fit.report.converged));
                }
                FitterKind::Kernel(t) => {
                    let (m, report) = t.solve(loss, lambda, &spec.opts)?;
                    out.push((m.into(), report.converged));
                }
            }
        }
        Ok(out)
    }
}

fn margin_scale(margins: &[MarginVector]) -> f64 {
    margins
        .iter()
        .map(MarginVector::max_abs)
        .fold(0.0, f64::max)
}

/// Total 0-d-1 loss for each delta fraction. An empty fraction list scores
/// the largest-margin rule once.
fn score(
    val_margins: &[MarginVector],
    labels: &[usize],
    scale: f64,
    fractions: &[f64],
    cost: RejectCost,
) -> Vec<f64> {
    if fractions.is_empty() {
        let wrong = val_margins
            .iter()
            .zip(labels)
            .map(|(m, &y)| zero_d_one_loss(&Prediction::Definite(m.argmax_label()), y, cost))
            .sum();
        return vec![wrong];
    }
    fractions
        .iter()
        .map(|&fr| {
            let delta = fr * scale;
            val_margins
                .iter()
                .zip(labels)
                .map(|(m, &y)| zero_d_one_loss(&predict_refine(m, delta), y, cost))
                .sum()
        })
        .collect()
}

/// Stratified fold index of every observation.
pub fn stratified_folds(data: &Dataset, folds: usize, seed: u64) -> Result<Vec<usize>> {
    use rand::seq::SliceRandom;
    if folds < 2 || folds > data.n() {
        return Err(Error::invalid(format!(
            "fold count {folds} must be in 2..={}",
            data.n()
        )));
    }
    let mut rng = crate::data::generators::stream_rng(seed, 0, 3);
    let mut assignment = vec![0; data.n()];
    let mut next = 0;
    for class in 1..=data.k() {
        let mut idx: Vec<usize> = (0..data.n()).filter(|&i| data.label(i) == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

/// Selects `(lambda, delta, a)` minimizing validation 0-d-1 loss. Ties go to
/// the larger `lambda`, then the larger `delta`, then the smaller `a`.
///
/// With `grid.regular` set, an unbent path is fitted as well and its
/// `lambda` chosen by the loss of the largest-margin rule.
pub fn tune(
    train: &Dataset,
    validation: Validation<'_>,
    grid: &TuningGrid,
    spec: &ModelSpec,
) -> Result<TuneResult> {
    let k = train.k();
    grid.validate(k)?;
    let cost = RejectCost::new(grid.d, k)?;
    let mut lambdas = grid.lambdas.clone();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    lambdas.dedup();
    let slopes: Vec<(ACandidate, f64)> = grid
        .a_candidates
        .iter()
        .map(|&c| Ok((c, c.resolve(k, grid.d)?)))
        .collect::<Result<_>>()?;
    let mut losses: Vec<BentLoss> = slopes
        .iter()
        .map(|&(_, a)| BentLoss::new(spec.loss.clone(), a))
        .collect::<Result<_>>()?;
    if grid.regular {
        losses.push(BentLoss::unbent(spec.loss.clone())?);
    }
    let nb = slopes.len();
    let fractions = |ai: usize| -> &[f64] {
        if ai < nb {
            &grid.delta_fractions
        } else {
            &[]
        }
    };

    let mut warnings = Vec::new();
    let nl = lambdas.len();

    // training-set fits (always needed for the final model and delta scale)
    let fitter = PathFitter::new(train, spec)?;
    let train_fits: Vec<Vec<(Model, bool)>> = losses
        .par_iter()
        .map(|loss| fitter.path(spec, loss, &lambdas))
        .collect::<Result<_>>()?;
    let mut fits = Vec::with_capacity(losses.len() * nl);
    for (loss, path) in losses.iter().zip(train_fits) {
        for (li, (model, converged)) in path.into_iter().enumerate() {
            let m = margins_of(&model, train)?;
            fits.push(Fit {
                lambda: lambdas[li],
                a: loss.a(),
                model,
                margin_scale: margin_scale(&m),
                converged,
            });
        }
    }
    let unconverged = fits.iter().filter(|f| !f.converged).count();
    if unconverged > 0 {
        warnings.push(format!(
            "{unconverged} of {} fits stopped at the iteration cap",
            fits.len()
        ));
    }

    // validation loss totals, indexed [a * nl + lambda][fraction]
    let (totals, n_val): (Vec<Vec<f64>>, usize) = match validation {
        Validation::TuningSet(tuning) => {
            if tuning.k() != k || tuning.p() != train.p() {
                return Err(Error::data(
                    "tuning set dimensions differ from the training set",
                ));
            }
            if tuning.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
                warnings.push("tuning set contains a single class".to_string());
            }
            let totals = fits
                .par_iter()
                .enumerate()
                .map(|(i, f)| {
                    let vm = margins_of(&f.model, tuning)?;
                    Ok(score(
                        &vm,
                        tuning.labels(),
                        f.margin_scale,
                        fractions(i / nl),
                        cost,
                    ))
                })
                .collect::<Result<_>>()?;
            (totals, tuning.n())
        }
        Validation::CrossValidation { folds, seed } => {
            let assignment = stratified_folds(train, folds, seed)?;
            let jobs: Vec<(usize, usize)> = (0..folds)
                .flat_map(|f| (0..losses.len()).map(move |a| (f, a)))
                .collect();
            let parts: Vec<Vec<Vec<f64>>> = jobs
                .par_iter()
                .map(|&(fold, ai)| {
                    let tr: Vec<usize> =
                        (0..train.n()).filter(|&i| assignment[i] != fold).collect();
                    let va: Vec<usize> =
                        (0..train.n()).filter(|&i| assignment[i] == fold).collect();
                    let (tr, va) = (train.subset(&tr), train.subset(&va));
                    let fitter = PathFitter::new(&tr, spec)?;
                    fitter
                        .path(spec, &losses[ai], &lambdas)?
                        .into_iter()
                        .map(|(model, _)| {
                            let scale = margin_scale(&margins_of(&model, &tr)?);
                            let vm = margins_of(&model, &va)?;
                            Ok(score(&vm, va.labels(), scale, fractions(ai), cost))
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;
            let mut totals: Vec<Vec<f64>> = (0..losses.len() * nl)
                .map(|i| vec![0.0; fractions(i / nl).len().max(1)])
                .collect();
            for (&(_, ai), part) in jobs.iter().zip(parts) {
                for (li, row) in part.into_iter().enumerate() {
                    for (t, v) in totals[ai * nl + li].iter_mut().zip(row) {
                        *t += v;
                    }
                }
            }
            (totals, train.n())
        }
    };

    let mut cells = Vec::with_capacity(nb * nl * grid.delta_fractions.len());
    for (ai, &(label, a)) in slopes.iter().enumerate() {
        for (li, &lambda) in lambdas.iter().enumerate() {
            let scale = fits[ai * nl + li].margin_scale;
            for (fi, &fr) in grid.delta_fractions.iter().enumerate() {
                cells.push(GridCell {
                    lambda,
                    a,
                    a_label: label,
                    delta_fraction: fr,
                    delta: fr * scale,
                    loss: totals[ai * nl + li][fi] / n_val as f64,
                });
            }
        }
    }
    let best = select(&cells, |_| true).expect("grid is nonempty");
    let regular_fits = fits.split_off(nb * nl);
    let regular_losses: Vec<f64> = totals[nb * nl..]
        .iter()
        .map(|t| t[0] / n_val as f64)
        .collect();
    // lambdas run largest first, so the first minimum wins ties
    let regular = regular_losses
        .iter()
        .enumerate()
        .fold(None, |acc: Option<usize>, (i, &l)| match acc {
            Some(b) if regular_losses[b] <= l => Some(b),
            _ => Some(i),
        });
    Ok(TuneResult {
        cells,
        best,
        fits,
        regular_fits,
        regular_losses,
        regular,
        warnings,
    })
}

/// Index of the best cell passing `keep`, with the documented tie-break.
fn select(cells: &[GridCell], keep: impl Fn(&GridCell) -> bool) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, c) in cells.iter().enumerate().filter(|(_, c)| keep(c)) {
        let better = match best {
            None => true,
            Some(b) => {
                let o = &cells[b];
                c.loss
                    .total_cmp(&o.loss)
                    .then(o.lambda.total_cmp(&c.lambda))
                    .then(o.delta_fraction.total_cmp(&c.delta_fraction))
                    .then(c.a.total_cmp(&o.a))
                    .is_lt()
            }
        };
        if better {
            best = Some(i);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generators::GeneratorSpec;
    use crate::optim::Classifier;

    #[test]
    fn bounds_examples() {
        let (a1, a2) = a_bounds(2, 0.3).unwrap();
        assert!((a1 - 0.7 / 0.3).abs() < 1e-12 && (a2 - 0.7 / 0.3).abs() < 1e-12);
        let (a1, a2) = a_bounds(3, 0.6).unwrap();
        assert!((a1 - 1.4 / 1.2).abs() < 1e-12 && (a2 - 0.8 / 0.6).abs() < 1e-12);
        let (a1, a2) = a_bounds(3, 0.5).unwrap();
        assert!((a1 - 1.5).abs() < 1e-12 && (a2 - 2.0).abs() < 1e-12);
        assert!(a_bounds(3, 0.7).is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-4, 1e2, 30);
        assert_eq!(g.len(), 30);
        assert!((g[0] - 1e2).abs() < 1e-10);
        assert!((g[29] - 1e-4).abs() < 1e-16);
        assert!(g.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn tie_break_prefers_conservative_cells() {
        let cell = |lambda, delta_fraction, a, loss| GridCell {
            lambda,
            a,
            a_label: ACandidate::Value(a),
            delta_fraction,
            delta: delta_fraction,
            loss,
        };
        let cells = vec![
            cell(0.1, 0.1, 2.0, 0.3),
            cell(1.0, 0.1, 2.0, 0.3),
            cell(1.0, 0.2, 2.0, 0.3),
            cell(1.0, 0.2, 1.5, 0.3),
            cell(5.0, 0.3, 1.5, 0.31),
        ];
        assert_eq!(select(&cells, |_| true), Some(3));
    }

    fn small_problem() -> (Dataset, Dataset) {
        let mut spec = GeneratorSpec::example(2, 9).unwrap();
        spec.n_train = 60;
        spec.n_tune = 60;
        spec.n_test = 1;
        spec.noise_dim = 3;
        let s = spec.generate(0).unwrap();
        (s.train, s.tune)
    }

    fn spec() -> ModelSpec {
        ModelSpec {
            loss: LossKind::BentHinge,
            penalty: Penalty::L2,
            kernel: None,
            opts: SolverOptions::default(),
        }
    }

    #[test]
    fn single_cell_grid() {
        let (train, tune_set) = small_problem();
        let grid = TuningGrid {
            lambdas: vec![0.1],
            delta_fractions: vec![0.1],
            a_candidates: vec![ACandidate::A1],
            d: 0.5,
            regular: false,
        };
        let r = tune(&train, Validation::TuningSet(&tune_set), &grid, &spec()).unwrap();
        assert_eq!(r.cells.len(), 1);
        assert_eq!(r.best, 0);
        assert_eq!(r.regular, None);
        assert!(r.regular_fits.is_empty());
    }

    #[test]
    fn recorded_losses_match_direct_evaluation() {
        let (train, tune_set) = small_problem();
        let grid = TuningGrid {
            lambdas: log_grid(1e-3, 1.0, 4),
            ..TuningGrid::new(0.5)
        };
        let r = tune(&train, Validation::TuningSet(&tune_set), &grid, &spec()).unwrap();
        assert_eq!(r.cells.len(), 4 * 7 * 2);
        let best = r.best_cell();
        assert!(r.cells.iter().all(|c| c.loss >= best.loss));
        for c in r.cells.iter().step_by(5) {
            let f = r.fit_for(c);
            let report = crate::predict::evaluate(&f.model, &tune_set, c.delta, 0.5).unwrap();
            assert!((report.overall_0d1 - c.loss).abs() < 1e-12);
        }
        assert_eq!(r.regular_fits.len(), 4);
        let reg = &r.regular_fits[r.regular.unwrap()];
        assert_eq!(reg.a, 1.0);
        let wrong = (0..tune_set.n())
            .filter(|&i| reg.model.margins(tune_set.row(i)).argmax_label() != tune_set.label(i))
            .count();
        assert!(
            (wrong as f64 / tune_set.n() as f64 - r.regular_losses[r.regular.unwrap()]).abs()
                < 1e-12
        );
        assert!(r
            .regular_losses
            .iter()
            .all(|&l| l >= r.regular_losses[r.regular.unwrap()]));
    }

    #[test]
    fn cross_validation_runs() {
        let (train, _) = small_problem();
        let grid = TuningGrid {
            lambdas: vec![1.0, 0.01],
            delta_fractions: vec![0.2, 0.0],
            a_candidates: vec![ACandidate::A2],
            d: 0.5,
            regular: true,
        };
        let r = tune(
            &train,
            Validation::CrossValidation { folds: 3, seed: 1 },
            &grid,
            &spec(),
        )
        .unwrap();
        assert_eq!(r.cells.len(), 4);
        assert_eq!(r.regular_losses.len(), 2);
        let folds = stratified_folds(&train, 3, 1).unwrap();
        for f in 0..3 {
            let c = folds.iter().filter(|&&v| v == f).count();
            assert!(c >= 18 && c <= 22, "{c}");
        }
    }

    #[test]
    fn a_candidate_parsing() {
        assert_eq!(ACandidate::parse("A1").unwrap(), ACandidate::A1);
        assert_eq!(ACandidate::parse("1.7").unwrap(), ACandidate::Value(1.7));
        assert!(ACandidate::parse("x").is_err());
        assert!(ACandidate::Value(0.9).resolve(3, 0.5).is_err());
    }
}
