//! ADMM for the primal training problem with any bent loss and an L1 or L2
//! penalty.
//!
//! Splitting: margins `v = M W` and penalty copy `z = W`, where `M` maps the
//! coefficient matrix to the wrong-class margins `<Y_j, W' x_i>`. The
//! `W`-step solves `(M'M + I) W = M'(v - eta) + (z - xi)`, which does not
//! depend on `rho`, `lambda` or the loss, so one factorization serves a whole
//! tuning grid. The `v`-step is the scalar prox of the loss and the `z`-step
//! the prox of the penalty (soft thresholding for L1, shrinkage for L2).
//!
//! ADMM iterates are not monotone in the objective, so the solver keeps the
//! best `z` seen at each check point; the returned trace is that incumbent's
//! objective. Iteration stops when the scaled residuals fall below tolerance
//! or when the incumbent improves by less than `primal_tol` (relative) over
//! 40 consecutive checks. Over-relaxation uses factor 1.6.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::coding::dot;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::losses::BentLoss;

use super::{
    check_lambda, penalty_value, LinearModel, MarginProblem, Penalty, SolverOptions, SolverReport,
};

const CHECK_EVERY: usize = 5;
const ADAPT_EVERY: usize = 10;
const RELAX: f64 = 1.6;
/// Number of objective checks over which the incumbent must improve.
const STALL_WINDOW: usize = 40;

enum Factor {
    /// Cholesky of `M'M + I` in coefficient space.
    Primal(Cholesky<f64, Dyn>),
    /// Cholesky of `I + M M'` in margin space (Woodbury).
    Margin(Cholesky<f64, Dyn>),
}

#[derive(Debug, Clone)]
pub struct PrimalFit {
    pub model: LinearModel,
    pub report: SolverReport,
}

/// Reusable ADMM solver bound to one design and labelling.
pub struct AdmmSolver {
    prob: MarginProblem,
    penalized: Vec<bool>,
    factor: Factor,
    p: usize,
}

impl AdmmSolver {
    /// Linear machine on `data`, intercept penalized.
    pub fn new(data: &Dataset) -> Result<Self> {
        let prob = MarginProblem::linear(data)?;
        let penalized = vec![true; prob.d];
        Self::from_problem(prob, penalized, data.p())
    }

    pub(crate) fn from_problem(
        prob: MarginProblem,
        penalized: Vec<bool>,
        p: usize,
    ) -> Result<Self> {
        let factor = factorize(&prob)?;
        Ok(AdmmSolver {
            prob,
            penalized,
            factor,
            p,
        })
    }

    #[cfg(test)]
    pub(crate) fn problem(&self) -> &MarginProblem {
        &self.prob
    }

    pub fn objective(&self, loss: &BentLoss, penalty: Penalty, lambda: f64, w: &[f64]) -> f64 {
        self.prob.empirical_risk(loss, w)
            + lambda * penalty_value(penalty, w, self.prob.q, &self.penalized)
    }

    /// Solves and wraps the coefficients as a [`LinearModel`].
    pub fn solve(
        &self,
        loss: &BentLoss,
        penalty: Penalty,
        lambda: f64,
        opts: &SolverOptions,
        warm_start: Option<&[f64]>,
    ) -> Result<PrimalFit> {
        let (w, report) = self.solve_raw(loss, penalty, lambda, opts, warm_start)?;
        let model = LinearModel::new(w, self.p, self.prob.k, penalty, lambda, loss.clone())?;
        Ok(PrimalFit { model, report })
    }

    pub(crate) fn solve_raw(
        &self,
        loss: &BentLoss,
        penalty: Penalty,
        lambda: f64,
        opts: &SolverOptions,
        warm_start: Option<&[f64]>,
    ) -> Result<(Vec<f64>, SolverReport)> {
        check_lambda(lambda)?;
        let prob = &self.prob;
        let (m, dq, q) = (prob.pairs(), prob.d * prob.q, prob.q);
        let nl = prob.n as f64 * lambda;

        let mut w = match warm_start {
            Some(w0) if w0.len() == dq => w0.to_vec(),
            Some(w0) => {
                return Err(Error::invalid(format!(
                    "warm start has {} entries, expected {dq}",
                    w0.len()
                )))
            }
            None => vec![0.0; dq],
        };
        let mut z = w.clone();
        let mut v = vec![0.0; m];
        prob.apply(&w, &mut v);
        let mut eta = vec![0.0; m];
        let mut xi = vec![0.0; dq];
        let mut mw = vec![0.0; m];
        let mut rhs = vec![0.0; dq];
        let mut tmp_m = vec![0.0; m];
        let mut tmp_dq = vec![0.0; dq];
        let mut v_old = vec![0.0; m];
        let mut z_old = vec![0.0; dq];
        let mut hat_m = vec![0.0; m];
        let mut hat_w = vec![0.0; dq];

        let mut rho = opts.rho;
        let abs_tol = opts.primal_tol * 1e-2;
        let rel_tol = opts.primal_tol;

        let mut best = z.clone();
        let mut best_obj = self.objective(loss, penalty, lambda, &z);
        let mut trace = vec![best_obj];
        let mut converged = false;
        let mut iterations = 0;
        let mut residual = f64::INFINITY;

        while iterations < opts.max_epochs {
            iterations += 1;

            // W-step
            for (t, (a, b)) in tmp_m.iter_mut().zip(v.iter().zip(&eta)) {
                *t = a - b;
            }
            prob.apply_adjoint(&tmp_m, &mut rhs);
            for (r, (a, b)) in rhs.iter_mut().zip(z.iter().zip(&xi)) {
                *r += a - b;
            }
            self.solve_system(&rhs, &mut w);
            prob.apply(&w, &mut mw);

            // v-step and z-step
            v_old.copy_from_slice(&v);
            z_old.copy_from_slice(&z);
            for (((h, &a), &b), (vv, &e)) in hat_m
                .iter_mut()
                .zip(&mw)
                .zip(&v_old)
                .zip(v.iter_mut().zip(&eta))
            {
                *h = RELAX * a + (1.0 - RELAX) * b;
                *vv = loss.prox(*h + e, rho);
            }
            for (l, penalized) in self.penalized.iter().enumerate() {
                for c in l * q..(l + 1) * q {
                    hat_w[c] = RELAX * w[c] + (1.0 - RELAX) * z_old[c];
                    let t = hat_w[c] + xi[c];
                    z[c] = if !penalized {
                        t
                    } else {
                        match penalty {
                            Penalty::L1 => soft_threshold(t, nl / rho),
                            Penalty::L2 => rho * t / (rho + nl),
                        }
                    };
                }
            }

            // dual update and residuals
            let mut r2 = 0.0;
            let mut ax2 = 0.0;
            let mut bz2 = 0.0;
            for (((e, &a), &b), &h) in eta.iter_mut().zip(&mw).zip(&v).zip(&hat_m) {
                let r = a - b;
                *e += h - b;
                r2 += r * r;
                ax2 += a * a;
                bz2 += b * b;
            }
            for (((x, &a), &b), &h) in xi.iter_mut().zip(&w).zip(&z).zip(&hat_w) {
                let r = a - b;
                *x += h - b;
                r2 += r * r;
                ax2 += a * a;
                bz2 += b * b;
            }
            for (t, (a, b)) in tmp_m.iter_mut().zip(v.iter().zip(&v_old)) {
                *t = a - b;
            }
            prob.apply_adjoint(&tmp_m, &mut tmp_dq);
            let mut s2 = 0.0;
            for (t, (a, b)) in tmp_dq.iter().zip(z.iter().zip(&z_old)) {
                let s = t + a - b;
                s2 += s * s;
            }
            let r_norm = r2.sqrt();
            let s_norm = rho * s2.sqrt();

            prob.apply_adjoint(&eta, &mut tmp_dq);
            let mut y2 = 0.0;
            for (t, x) in tmp_dq.iter().zip(&xi) {
                y2 += (t + x) * (t + x);
            }
            let eps_pri = ((m + dq) as f64).sqrt() * abs_tol + rel_tol * ax2.sqrt().max(bz2.sqrt());
            let eps_dual = (dq as f64).sqrt() * abs_tol + rel_tol * rho * y2.sqrt();
            residual = (r_norm / eps_pri.max(f64::MIN_POSITIVE))
                .max(s_norm / eps_dual.max(f64::MIN_POSITIVE));

            let done = r_norm <= eps_pri && s_norm <= eps_dual && iterations > 1;
            if done || iterations % CHECK_EVERY == 0 || iterations == opts.max_epochs {
                let obj = self.objective(loss, penalty, lambda, &z);
                if obj < best_obj {
                    best_obj = obj;
                    best.copy_from_slice(&z);
                }
                trace.push(best_obj);
            }
            let stalled = trace.len() > STALL_WINDOW
                && trace[trace.len() - 1 - STALL_WINDOW] - best_obj
                    <= opts.primal_tol * best_obj.abs().max(1.0);
            if done || stalled {
                converged = true;
                break;
            }

            if iterations % ADAPT_EVERY == 0 {
                let scale = if r_norm > 10.0 * s_norm {
                    2.0
                } else if s_norm > 10.0 * r_norm {
                    0.5
                } else {
                    1.0
                };
                if scale != 1.0 {
                    rho *= scale;
                    eta.iter_mut().for_each(|e| *e /= scale);
                    xi.iter_mut().for_each(|x| *x /= scale);
                }
            }
        }
        if !converged {
            log::debug!("ADMM hit {iterations} iterations (scaled residual {residual:e})");
        }
        Ok((
            best,
            SolverReport {
                iterations,
                converged,
                objective: best_obj,
                trace,
                residual,
            },
        ))
    }

    fn solve_system(&self, rhs: &[f64], out: &mut [f64]) {
        match &self.factor {
            Factor::Primal(chol) => {
                let x = chol.solve(&DVector::from_column_slice(rhs));
                out.copy_from_slice(x.as_slice());
            }
            Factor::Margin(chol) => {
                // (I + M'M)^{-1} r = r - M' (I + M M')^{-1} M r
                let m = self.prob.pairs();
                let mut mr = vec![0.0; m];
                self.prob.apply(rhs, &mut mr);
                let sol = chol.solve(&DVector::from_vec(mr));
                self.prob.apply_adjoint(sol.as_slice(), out);
                for (o, &r) in out.iter_mut().zip(rhs) {
                    *o = r - *o;
                }
            }
        }
    }
}

#[inline]
fn soft_threshold(c: f64, t: f64) -> f64 {
    if c > t {
        c - t
    } else if c < -t {
        c + t
    } else {
        0.0
    }
}

fn factorize(prob: &MarginProblem) -> Result<Factor> {
    let (n, d, q, k) = (prob.n, prob.d, prob.q, prob.k);
    let m = prob.pairs();
    let dq = d * q;
    let simplex = &prob.simplex;
    if dq <= m {
        // M'M = sum_c (X_c' X_c) (x) S_c with S_c = sum_{j != c} Y_j Y_j'
        let mut s = vec![vec![0.0; q * q]; k];
        for (c, sc) in s.iter_mut().enumerate() {
            for j in (0..k).filter(|&j| j != c) {
                let y = simplex.vertex(j);
                for a in 0..q {
                    for b in 0..q {
                        sc[a * q + b] += y[a] * y[b];
                    }
                }
            }
        }
        let mut gram = vec![DMatrix::<f64>::zeros(d, d); k];
        for i in 0..n {
            let x = prob.row(i);
            let g = &mut gram[prob.labels[i]];
            for l in 0..d {
                if x[l] == 0.0 {
                    continue;
                }
                for l2 in l..d {
                    g[(l, l2)] += x[l] * x[l2];
                }
            }
        }
        let mut h = DMatrix::<f64>::identity(dq, dq);
        for c in 0..k {
            let g = &gram[c];
            let sc = &s[c];
            for l in 0..d {
                for l2 in l..d {
                    let gv = g[(l, l2)];
                    if gv == 0.0 {
                        continue;
                    }
                    for a in 0..q {
                        for b in 0..q {
                            let val = gv * sc[a * q + b];
                            h[(l * q + a, l2 * q + b)] += val;
                            if l != l2 {
                                h[(l2 * q + b, l * q + a)] += val;
                            }
                        }
                    }
                }
            }
        }
        Cholesky::new(h)
            .map(Factor::Primal)
            .ok_or_else(|| Error::invalid("ADMM system matrix is not positive definite"))
    } else {
        let mut gx = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for i2 in i..n {
                let v = dot(prob.row(i), prob.row(i2));
                gx[(i, i2)] = v;
                gx[(i2, i)] = v;
            }
        }
        let mut index = Vec::with_capacity(m);
        for i in 0..n {
            for j in (0..k).filter(|&j| j != prob.labels[i]) {
                index.push((i, j));
            }
        }
        let mut yy = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                yy[a * k + b] = dot(simplex.vertex(a), simplex.vertex(b));
            }
        }
        let mut h = DMatrix::<f64>::identity(m, m);
        for (r, &(i, j)) in index.iter().enumerate() {
            for (c, &(i2, j2)) in index.iter().enumerate().skip(r) {
                let val = gx[(i, i2)] * yy[j * k + j2];
                h[(r, c)] += val;
                if r != c {
                    h[(c, r)] += val;
                }
            }
        }
        Cholesky::new(h)
            .map(Factor::Margin)
            .ok_or_else(|| Error::invalid("ADMM system matrix is not positive definite"))
    }
}

/// Linear bent-loss machine with an L1 or L2 penalty, solved in the primal.
pub fn train_linear_primal(
    data: &Dataset,
    loss: &BentLoss,
    penalty: Penalty,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<LinearModel> {
    check_lambda(lambda)?;
    Ok(AdmmSolver::new(data)?
        .solve(loss, penalty, lambda, opts, None)?
        .model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::Classifier;

    fn tiny(k: usize, n: usize, p: usize, seed: u64) -> Dataset {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = i % k + 1;
            let row: Vec<f64> = (0..p)
                .map(|l| rng.gen_range(-1.0..1.0) + if l == label % p { 0.8 } else { 0.0 })
                .collect();
            rows.push(row);
            y.push(label);
        }
        Dataset::from_rows(&rows, y, k).unwrap()
    }

    #[test]
    fn unregularized_pair_is_classified() {
        let data = Dataset::from_rows(&[vec![-1.0], vec![1.0]], vec![2, 1], 2).unwrap();
        let loss = BentLoss::hinge(2.0).unwrap();
        let m = train_linear_primal(&data, &loss, Penalty::L2, 1e-9, &SolverOptions::default())
            .unwrap();
        for i in 0..2 {
            let mg = m.margins(data.row(i));
            let y = data.label(i);
            let other = 3 - y;
            assert!(mg[y - 1] - mg[other - 1] > 0.0);
        }
    }

    #[test]
    fn l1_large_lambda_zeroes_everything_exactly() {
        let data = tiny(3, 30, 4, 1);
        let loss = BentLoss::hinge(1.5).unwrap();
        let m = train_linear_primal(&data, &loss, Penalty::L1, 10.0, &SolverOptions::default())
            .unwrap();
        assert!(m.beta().iter().all(|&b| b == 0.0), "{:?}", m.beta());
    }

    #[test]
    fn incumbent_trace_is_monotone() {
        let data = tiny(4, 40, 3, 2);
        for loss in [BentLoss::hinge(2.0).unwrap(), BentLoss::dwd(1.5).unwrap()] {
            for pen in [Penalty::L1, Penalty::L2] {
                let fit = AdmmSolver::new(&data)
                    .unwrap()
                    .solve(&loss, pen, 0.01, &SolverOptions::default(), None)
                    .unwrap();
                for w in fit.report.trace.windows(2) {
                    assert!(w[1] <= w[0] + 1e-10);
                }
            }
        }
    }

    #[test]
    fn both_factorizations_agree() {
        // p large relative to n forces the margin-space path
        let loss = BentLoss::hinge(1.5).unwrap();
        for data in [
            tiny(3, 6, 12, 3),
            tiny(3, 40, 2, 3),
            tiny(4, 5, 12, 5),
            tiny(4, 50, 2, 6),
        ] {
            let solver = AdmmSolver::new(&data).unwrap();
            let dq = solver.problem().d * solver.problem().q;
            let rhs: Vec<f64> = (0..dq).map(|i| (i as f64 * 0.37).sin()).collect();
            let mut out = vec![0.0; dq];
            solver.solve_system(&rhs, &mut out);
            // check (M'M + I) out = rhs
            let mut mv = vec![0.0; solver.problem().pairs()];
            solver.problem().apply(&out, &mut mv);
            let mut back = vec![0.0; dq];
            solver.problem().apply_adjoint(&mv, &mut back);
            for i in 0..dq {
                assert!((back[i] + out[i] - rhs[i]).abs() < 1e-9);
            }
            let _ = solver
                .solve(&loss, Penalty::L2, 0.1, &SolverOptions::default(), None)
                .unwrap();
        }
    }

    #[test]
    fn adjoint_is_transpose() {
        let data = tiny(4, 7, 3, 4);
        let prob = MarginProblem::linear(&data).unwrap();
        let dq = prob.d * prob.q;
        let w: Vec<f64> = (0..dq).map(|i| (i as f64).cos()).collect();
        let v: Vec<f64> = (0..prob.pairs()).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut mw = vec![0.0; prob.pairs()];
        prob.apply(&w, &mut mw);
        let mut mtv = vec![0.0; dq];
        prob.apply_adjoint(&v, &mut mtv);
        let lhs: f64 = mw.iter().zip(&v).map(|(a, b)| a * b).sum();
        let rhs: f64 = w.iter().zip(&mtv).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-10);
    }
}
