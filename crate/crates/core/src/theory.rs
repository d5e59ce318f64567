//! Population-level checks on the probability simplex.
//!
//! For class probabilities `p` and `Q_j = 1 - p_j`, the conditional risk of
//! a bent loss is `g(f) = sum_j Q_j l(<Y_j, f>)`. Margins `m = Y f` range
//! over the hyperplane `sum_j m_j = 0`, so a minimizer satisfies
//! `Q_j dl(m_j) ∋ nu` for one multiplier `nu`. [`population_minimizer`]
//! finds `nu` by a monotone one-dimensional search and reads off the
//! margins.

use std::io::Write;

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::coding::CodingSimplex;
use crate::data::generators::stream_rng;
use crate::error::{Error, Result};
use crate::losses::BentLoss;
use crate::predict::{Prediction, RejectCost};
use crate::tune::a_bounds;

/// Class probabilities `P_1..P_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    p: Vec<f64>,
    /// Class indices (0-based) by decreasing probability; ties keep the
    /// smaller index first.
    order: Vec<usize>,
}

impl ProbVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::invalid(
                "a probability vector needs at least 2 classes",
            ));
        }
        if p.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid(format!(
                "probabilities must be >= 0, got {p:?}"
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("probabilities sum to {sum}, not 1")));
        }
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
        Ok(ProbVector { p, order })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(vec![1.0 / k as f64; k])
    }

    /// Flat Dirichlet draw.
    pub fn sample<R: Rng>(k: usize, rng: &mut R) -> Self {
        loop {
            let e: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let s: f64 = e.iter().sum();
            let p: Vec<f64> = e.iter().map(|v| v / s).collect();
            if let Ok(pv) = Self::new(p) {
                return pv;
            }
        }
    }

    pub fn k(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self, j: usize) -> f64 {
        1.0 - self.p[j]
    }

    /// `P_(j)`, 1-based rank, largest first.
    pub fn p_sorted(&self, rank: usize) -> f64 {
        self.p[self.order[rank - 1]]
    }

    /// `Q_(j)`, 1-based rank, smallest first.
    pub fn q_sorted(&self, rank: usize) -> f64 {
        1.0 - self.p_sorted(rank)
    }

    /// 1-based label `y_(rank)`.
    pub fn label_of_rank(&self, rank: usize) -> usize {
        self.order[rank - 1] + 1
    }

    /// The same vector with classes relabelled: class `j` becomes
    /// `perm[j - 1]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut p = vec![0.0; self.k()];
        for (j, &t) in perm.iter().enumerate() {
            p[t - 1] = self.p[j];
        }
        Self::new(p)
    }
}

/// Region membership of one probability vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegionLabel {
    BayesReject,
    BayesLabel(usize),
    FstarReject,
    FstarRefine(Vec<usize>),
    FstarLabel(usize),
}

impl RegionLabel {
    pub fn is_reject(&self) -> bool {
        matches!(self, RegionLabel::BayesReject | RegionLabel::FstarReject)
    }

    pub fn tag(&self) -> String {
        match self {
            RegionLabel::BayesReject | RegionLabel::FstarReject => "reject".to_string(),
            RegionLabel::BayesLabel(l) | RegionLabel::FstarLabel(l) => l.to_string(),
            RegionLabel::FstarRefine(s) => {
                s.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
            }
        }
    }
}

/// Optimal 0-d-1 decision: the top class if `P_(1) > 1 - d`, else reject.
pub fn bayes_rule(p: &ProbVector, cost: RejectCost) -> Prediction {
    if p.p_sorted(1) > 1.0 - cost.d() {
        Prediction::Definite(p.label_of_rank(1))
    } else {
        Prediction::Reject
    }
}

pub fn bayes_region(p: &ProbVector, cost: RejectCost) -> RegionLabel {
    match bayes_rule(p, cost) {
        Prediction::Definite(l) => RegionLabel::BayesLabel(l),
        _ => RegionLabel::BayesReject,
    }
}

/// Largest `s` with `Q_(s) / Q_(1) < a` (so `s = k` means every ratio is
/// below `a`).
fn plateau_size(p: &ProbVector, a: f64) -> usize {
    let q1 = p.q_sorted(1);
    (1..=p.k())
        .take_while(|&s| p.q_sorted(s) < a * q1)
        .count()
        .max(1)
}

/// Region of the population minimizer for bending slope `a`: reject when
/// `Q_(k) < a Q_(1)`; otherwise the top class, refined to
/// `{y_(1), ..., y_(s)}` when classes `y_(2..s)` have zero margin.
pub fn fstar_region(p: &ProbVector, a: f64) -> Result<RegionLabel> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(Error::invalid(format!(
            "bending slope a must be > 1, got {a}"
        )));
    }
    let k = p.k();
    if p.q_sorted(k) < a * p.q_sorted(1) {
        return Ok(RegionLabel::FstarReject);
    }
    let s = plateau_size(p, a);
    if s == 1 {
        Ok(RegionLabel::FstarLabel(p.label_of_rank(1)))
    } else {
        let mut set: Vec<usize> = (1..=s).map(|r| p.label_of_rank(r)).collect();
        set.sort_unstable();
        Ok(RegionLabel::FstarRefine(set))
    }
}

/// Minimizer of the conditional risk with its margins and optimality
/// residual.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationMinimizer {
    pub f: Vec<f64>,
    pub margins: Vec<f64>,
    /// Multiplier of the sum-to-zero constraint.
    pub multiplier: f64,
    /// `max_j dist(nu, Q_j dl(m_j))` together with `|sum_j m_j|`.
    pub residual: f64,
}

const MINIMIZER_TOL: f64 = 1e-8;

pub fn population_minimizer(
    p: &ProbVector,
    loss: &BentLoss,
    simplex: &CodingSimplex,
) -> Result<PopulationMinimizer> {
    let k = p.k();
    if simplex.k() != k {
        return Err(Error::invalid(format!(
            "simplex has {} classes, probability vector {k}",
            simplex.k()
        )));
    }
    let q: Vec<f64> = (0..k).map(|j| p.q(j)).collect();
    if q.iter().any(|&v| v <= 0.0) {
        return Err(Error::invalid(
            "population minimizer is not unique when some class has probability 1",
        ));
    }
    let a = loss.a();
    // exact slopes at breakpoints
    let intervals = |nu: f64| -> Vec<(f64, f64)> {
        q.iter()
            .map(|&qj| {
                let slope = if nu == a * qj {
                    a
                } else if nu == qj {
                    1.0
                } else {
                    nu / qj
                };
                loss.margin_for_slope(slope)
            })
            .collect()
    };
    let sums = |iv: &[(f64, f64)]| -> (f64, f64) {
        iv.iter().fold((0.0, 0.0), |(l, h), &(a, b)| (l + a, h + b))
    };

    let mut breaks: Vec<f64> = q.iter().flat_map(|&qj| [qj, a * qj]).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut found: Option<(f64, Vec<(f64, f64)>)> = None;
    let mut prev: Option<f64> = None;
    for &b in &breaks {
        let iv = intervals(b);
        let (lo, hi) = sums(&iv);
        if lo <= 0.0 && hi >= 0.0 {
            found = Some((b, iv));
            break;
        }
        if lo > 0.0 {
            // the root lies strictly between the previous breakpoint and b
            let mut left = prev.unwrap_or(0.0);
            let mut right = b;
            for _ in 0..200 {
                let mid = 0.5 * (left + right);
                if mid <= left || mid >= right {
                    break;
                }
                let (l, h) = sums(&intervals(mid));
                if l > 0.0 {
                    right = mid;
                } else if h < 0.0 {
                    left = mid;
                } else {
                    left = mid;
                    right = mid;
                    break;
                }
            }
            let nu = 0.5 * (left + right);
            found = Some((nu, intervals(nu)));
            break;
        }
        prev = Some(b);
    }
    let (nu, iv) = found.ok_or_else(|| Error::NotConverged {
        what: "population minimizer multiplier search".into(),
        residual: f64::INFINITY,
    })?;

    // pick margins inside the intervals summing to zero
    let (lo_sum, _) = sums(&iv);
    let mut margins: Vec<f64> = iv.iter().map(|&(l, _)| l).collect();
    let unbounded: Vec<usize> = (0..k).filter(|&j| iv[j].1.is_infinite()).collect();
    if lo_sum.is_finite() && lo_sum < 0.0 {
        if unbounded.is_empty() {
            let width: f64 = iv.iter().map(|&(l, h)| h - l).sum();
            let theta = if width > 0.0 { -lo_sum / width } else { 0.0 };
            for (m, &(l, h)) in margins.iter_mut().zip(&iv) {
                *m = l + theta * (h - l);
            }
        } else {
            let share = -lo_sum / unbounded.len() as f64;
            for &j in &unbounded {
                margins[j] += share;
            }
        }
    }
    if margins.iter().any(|m| !m.is_finite()) {
        return Err(Error::NotConverged {
            what: "population minimizer".into(),
            residual: f64::INFINITY,
        });
    }

    let mut residual = margins.iter().sum::<f64>().abs();
    for (j, &m) in margins.iter().enumerate() {
        let (glo, ghi) = loss.subgradient(m);
        let (lo, hi) = (q[j] * glo, q[j] * ghi);
        let dist = if nu < lo {
            lo - nu
        } else if nu > hi {
            nu - hi
        } else {
            0.0
        };
        residual = residual.max(dist / nu.max(1e-300));
    }
    if residual > MINIMIZER_TOL {
        return Err(Error::NotConverged {
            what: "population minimizer".into(),
            residual,
        });
    }

    // f = ((k-1)/k) Y' m recovers f from margins on the hyperplane
    let scale = (k as f64 - 1.0) / k as f64;
    let mut f = vec![0.0; k - 1];
    for (j, &m) in margins.iter().enumerate() {
        for (fv, &y) in f.iter_mut().zip(simplex.vertex(j)) {
            *fv += scale * m * y;
        }
    }
    Ok(PopulationMinimizer {
        f,
        margins,
        multiplier: nu,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Zero,
    Negative,
}

fn classify(m: f64, tol: f64) -> Sign {
    if m > tol {
        Sign::Positive
    } else if m < -tol {
        Sign::Negative
    } else {
        Sign::Zero
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop1Report {
    /// `None` when all ratios are below `a` (all-zero pattern).
    pub s: Option<usize>,
    pub predicted: Vec<Sign>,
    pub observed: Vec<Sign>,
    pub margins: Vec<f64>,
    /// Some ratio `Q_(j)/Q_(1)` lies within `1e-9` of `a`.
    pub boundary: bool,
    pub agrees: bool,
}

/// Sign pattern predicted from the `Q` ratios, indexed by class.
pub fn predicted_pattern(p: &ProbVector, a: f64) -> (Option<usize>, Vec<Sign>) {
    let k = p.k();
    let s = plateau_size(p, a);
    if s == k {
        return (None, vec![Sign::Zero; k]);
    }
    let mut pat = vec![Sign::Negative; k];
    pat[p.label_of_rank(1) - 1] = Sign::Positive;
    for r in 2..=s {
        pat[p.label_of_rank(r) - 1] = Sign::Zero;
    }
    (Some(s), pat)
}

pub fn verify_prop1(p: &ProbVector, loss: &BentLoss, tol: f64) -> Result<Prop1Report> {
    let simplex = CodingSimplex::shared(p.k())?;
    let min = population_minimizer(p, loss, &simplex)?;
    let a = loss.a();
    let q1 = p.q_sorted(1);
    let boundary = (2..=p.k()).any(|r| (p.q_sorted(r) / q1 - a).abs() < 1e-9);
    let (s, predicted) = predicted_pattern(p, a);
    let observed: Vec<Sign> = min.margins.iter().map(|&m| classify(m, tol)).collect();
    Ok(Prop1Report {
        s,
        agrees: predicted == observed,
        predicted,
        observed,
        margins: min.margins,
        boundary,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop1Sweep {
    pub checked: usize,
    pub skipped_boundary: usize,
    pub failures: Vec<(Vec<f64>, Prop1Report)>,
}

impl Prop1Sweep {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `n` flat Dirichlet draws at `k` classes for one loss.
pub fn prop1_sweep(k: usize, loss: &BentLoss, n: usize, seed: u64, tol: f64) -> Result<Prop1Sweep> {
    let mut rng = stream_rng(seed, k as u64, 7);
    let draws: Vec<ProbVector> = (0..n).map(|_| ProbVector::sample(k, &mut rng)).collect();
    let reports: Vec<Result<Prop1Report>> = draws
        .par_iter()
        .map(|p| verify_prop1(p, loss, tol))
        .collect();
    let mut sweep = Prop1Sweep {
        checked: 0,
        skipped_boundary: 0,
        failures: Vec::new(),
    };
    for (p, r) in draws.iter().zip(reports) {
        let r = r?;
        if r.boundary {
            sweep.skipped_boundary += 1;
            continue;
        }
        sweep.checked += 1;
        if !r.agrees {
            sweep.failures.push((p.p().to_vec(), r));
        }
    }
    Ok(sweep)
}

/// Settings of a reject-region comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichConfig {
    pub k: usize,
    pub d: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Slope whose reject region must lie inside the Bayes one (default `a1`).
    pub a_inner: Option<f64>,
    /// Slope whose reject region must contain the Bayes one (default `a2`).
    pub a_outer: Option<f64>,
    /// Slope used for the tightness witnesses (default: midpoint of
    /// `(a1, min(a2, 1/d))`).
    pub a_interior: Option<f64>,
}

impl SandwichConfig {
    pub fn new(k: usize, d: f64, n_samples: usize, seed: u64) -> Self {
        SandwichConfig {
            k,
            d,
            n_samples,
            seed,
            a_inner: None,
            a_outer: None,
            a_interior: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub k: usize,
    pub d: f64,
    pub a_inner: f64,
    pub a_outer: f64,
    pub a_interior: Option<f64>,
    pub samples: usize,
    pub inner_violations: usize,
    pub outer_violations: usize,
    /// First offending vectors, at most 5 of each kind.
    pub examples: Vec<Vec<f64>>,
    /// A point rejected by `f*` at `a_interior` but not by the Bayes rule.
    pub witness_fstar_not_bayes: Option<Vec<f64>>,
    /// A point rejected by the Bayes rule but not by `f*` at `a_interior`.
    pub witness_bayes_not_fstar: Option<Vec<f64>>,
    /// Points where the Bayes and `f*(a_inner)` reject decisions differ
    /// (meaningful when `a_inner == a_outer`, as for `k = 2`).
    pub symmetric_difference: usize,
}

impl SandwichReport {
    pub fn inclusions_hold(&self) -> bool {
        self.inner_violations == 0 && self.outer_violations == 0
    }

    pub fn tight(&self) -> bool {
        self.a_interior.is_none()
            || (self.witness_fstar_not_bayes.is_some() && self.witness_bayes_not_fstar.is_some())
    }

    pub fn passed(&self) -> bool {
        self.inclusions_hold() && self.tight()
    }
}

/// Default interior slope for the tightness check, `None` when the
/// interval is empty.
pub fn interior_slope(k: usize, d: f64) -> Result<Option<f64>> {
    let (a1, a2) = a_bounds(k, d)?;
    let hi = a2.min(1.0 / d);
    Ok((hi > a1).then(|| 0.5 * (a1 + hi)))
}

pub fn verify_region_sandwich(cfg: &SandwichConfig) -> Result<SandwichReport> {
    let cost = RejectCost::new(cfg.d, cfg.k)?;
    let (a1, a2) = a_bounds(cfg.k, cfg.d)?;
    let a_inner = cfg.a_inner.unwrap_or(a1);
    let a_outer = cfg.a_outer.unwrap_or(a2);
    let a_interior = match cfg.a_interior {
        Some(a) => Some(a),
        None => interior_slope(cfg.k, cfg.d)?,
    };
    for a in [Some(a_inner), Some(a_outer), a_interior]
        .into_iter()
        .flatten()
    {
        if !(a > 1.0) {
            return Err(Error::invalid(format!(
                "bending slope a must be > 1, got {a}"
            )));
        }
    }
    let mut rng = stream_rng(cfg.seed, cfg.k as u64, 5);
    let mut report = SandwichReport {
        k: cfg.k,
        d: cfg.d,
        a_inner,
        a_outer,
        a_interior,
        samples: cfg.n_samples,
        inner_violations: 0,
        outer_violations: 0,
        examples: Vec::new(),
        witness_fstar_not_bayes: None,
        witness_bayes_not_fstar: None,
        symmetric_difference: 0,
    };
    let mut inner_examples = 0;
    let mut outer_examples = 0;
    let fstar_reject = |p: &ProbVector, a: f64| p.q_sorted(p.k()) < a * p.q_sorted(1);
    for _ in 0..cfg.n_samples {
        let p = ProbVector::sample(cfg.k, &mut rng);
        let bayes = bayes_rule(&p, cost) == Prediction::Reject;
        let inner = fstar_reject(&p, a_inner);
        let outer = fstar_reject(&p, a_outer);
        if inner && !bayes {
            report.inner_violations += 1;
            if inner_examples < 5 {
                inner_examples += 1;
                report.examples.push(p.p().to_vec());
            }
        }
        if bayes && !outer {
            report.outer_violations += 1;
            if outer_examples < 5 {
                outer_examples += 1;
                report.examples.push(p.p().to_vec());
            }
        }
        if inner != bayes {
            report.symmetric_difference += 1;
        }
        if let Some(a) = a_interior {
            let mid = fstar_reject(&p, a);
            if mid && !bayes && report.witness_fstar_not_bayes.is_none() {
                report.witness_fstar_not_bayes = Some(p.p().to_vec());
            }
            if bayes && !mid && report.witness_bayes_not_fstar.is_none() {
                report.witness_bayes_not_fstar = Some(p.p().to_vec());
            }
        }
    }
    Ok(report)
}

/// Writes region labels over the barycentric grid `p = (i, j, n - i - j) / n`
/// for three classes: columns `p1,p2,p3,bayes,fstar_a1,fstar_a2`.
pub fn export_region_map<W: Write>(out: W, d: f64, resolution: usize) -> Result<usize> {
    let cost = RejectCost::new(d, 3)?;
    let (a1, a2) = a_bounds(3, d)?;
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::io("<region map>", std::io::Error::other(e));
    w.write_record(["p1", "p2", "p3", "bayes", "fstar_a1", "fstar_a2"])
        .map_err(io)?;
    let n = resolution.max(1);
    let mut rows = 0;
    for i in 0..=n {
        for j in 0..=(n - i) {
            let l = n - i - j;
            let raw = [
                i as f64 / n as f64,
                j as f64 / n as f64,
                l as f64 / n as f64,
            ];
            let s: f64 = raw.iter().sum();
            let p = ProbVector::new(raw.iter().map(|v| v / s).collect())?;
            w.write_record([
                format!("{}", raw[0]),
                format!("{}", raw[1]),
                format!("{}", raw[2]),
                bayes_region(&p, cost).tag(),
                fstar_region(&p, a1)?.tag(),
                fstar_region(&p, a2)?.tag(),
            ])
            .map_err(io)?;
            rows += 1;
        }
    }
    w.flush().map_err(|e| Error::io("<region map>", e))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(p: &[f64]) -> ProbVector {
        ProbVector::new(p.to_vec()).unwrap()
    }

    #[test]
    fn bayes_examples() {
        let c = RejectCost::new(0.4, 3).unwrap();
        assert_eq!(
            bayes_rule(&pv(&[0.7, 0.2, 0.1]), c),
            Prediction::Definite(1)
        );
        assert_eq!(bayes_rule(&pv(&[0.4, 0.3, 0.3]), c), Prediction::Reject);
        let u = ProbVector::uniform(5).unwrap();
        assert_eq!(
            bayes_rule(&u, RejectCost::new(0.7, 5).unwrap()),
            Prediction::Reject
        );
    }

    #[test]
    fn fstar_examples() {
        assert_eq!(
            fstar_region(&ProbVector::uniform(4).unwrap(), 1.01).unwrap(),
            RegionLabel::FstarReject
        );
        assert_eq!(
            fstar_region(&pv(&[0.5, 0.3, 0.2]), 1.3).unwrap(),
            RegionLabel::FstarLabel(1)
        );
        assert_eq!(
            fstar_region(&pv(&[0.45, 0.35, 0.2]), 2.0).unwrap(),
            RegionLabel::FstarReject
        );
        assert_eq!(
            fstar_region(&pv(&[0.2, 0.45, 0.35]), 1.3).unwrap(),
            RegionLabel::FstarRefine(vec![2, 3])
        );
        assert!(fstar_region(&pv(&[0.5, 0.5]), 1.0).is_err());
    }

    #[test]
    fn minimizer_examples() {
        let s3 = CodingSimplex::shared(3).unwrap();
        for loss in [BentLoss::hinge(1.7).unwrap(), BentLoss::dwd(2.5).unwrap()] {
            let m = population_minimizer(&ProbVector::uniform(3).unwrap(), &loss, &s3).unwrap();
            assert!(m.margins.iter().all(|v| v.abs() < 1e-12));
        }
        let r = verify_prop1(&pv(&[0.5, 0.3, 0.2]), &BentLoss::hinge(1.3).unwrap(), 1e-5).unwrap();
        assert_eq!(r.s, Some(1));
        assert!(r.agrees, "{r:?}");
        assert_eq!(
            r.observed,
            vec![Sign::Positive, Sign::Negative, Sign::Negative]
        );
        let r = verify_prop1(
            &pv(&[0.45, 0.35, 0.2]),
            &BentLoss::hinge(2.0).unwrap(),
            1e-5,
        )
        .unwrap();
        assert_eq!(r.s, None);
        assert!(r.agrees);
    }

    #[test]
    fn minimizer_margins_match_f() {
        let s4 = CodingSimplex::shared(4).unwrap();
        let p = pv(&[0.1, 0.5, 0.15, 0.25]);
        for loss in [BentLoss::hinge(1.2).unwrap(), BentLoss::dwd(1.2).unwrap()] {
            let m = population_minimizer(&p, &loss, &s4).unwrap();
            let mv = s4.angle_margins(&m.f).unwrap();
            for j in 0..4 {
                assert!((mv[j] - m.margins[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn binary_regions_coincide() {
        let r = verify_region_sandwich(&SandwichConfig::new(2, 0.3, 20_000, 1)).unwrap();
        assert!(r.passed());
        assert_eq!(r.symmetric_difference, 0);
        assert_eq!(r.a_interior, None);
    }

    #[test]
    fn corrupted_inner_slope_is_caught() {
        let (a1, _) = a_bounds(3, 0.5).unwrap();
        let mut cfg = SandwichConfig::new(3, 0.5, 20_000, 2);
        cfg.a_inner = Some(a1 * 1.5);
        let r = verify_region_sandwich(&cfg).unwrap();
        assert!(r.inner_violations > 0);
        assert!(!r.passed());
    }

    #[test]
    fn region_map_rows() {
        let mut buf = Vec::new();
        let rows = export_region_map(&mut buf, 0.6, 10).unwrap();
        assert_eq!(rows, 66);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 67);
    }
}
