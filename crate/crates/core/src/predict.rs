//! Set-valued prediction from angle margins and 0-d-1 scoring.
//!
//! Margins are soft-thresholded at `delta`. The reject rule declines to
//! predict when every thresholded margin is zero and otherwise returns the
//! largest margin. The reject-and-refine rule additionally reports the set
//! of positive margins, or failing that the set of zero margins.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use crate::coding::MarginVector;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::optim::Classifier;

/// Outcome for one observation. Labels are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Prediction {
    Definite(usize),
    /// Sorted, size in `2..k`.
    Refined(Vec<usize>),
    Reject,
}

impl Prediction {
    /// Size of the predicted set; `k` for a rejection.
    pub fn size(&self, k: usize) -> usize {
        match self {
            Prediction::Definite(_) => 1,
            Prediction::Refined(s) => s.len(),
            Prediction::Reject => k,
        }
    }

    pub fn contains(&self, label: usize) -> bool {
        match self {
            Prediction::Definite(l) => *l == label,
            Prediction::Refined(s) => s.contains(&label),
            Prediction::Reject => true,
        }
    }

    /// Normalizes a candidate set: singletons become labels, full sets
    /// become rejections.
    fn from_set(set: Vec<usize>, k: usize) -> Self {
        match set.len() {
            1 => Prediction::Definite(set[0]),
            n if n >= k => Prediction::Reject,
            _ => Prediction::Refined(set),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("reject") {
            return Ok(Prediction::Reject);
        }
        let labels: std::result::Result<Vec<usize>, _> =
            s.split(',').map(|t| t.trim().parse::<usize>()).collect();
        match labels {
            Ok(l) if l.len() == 1 && l[0] >= 1 => Ok(Prediction::Definite(l[0])),
            Ok(mut l) if l.len() >= 2 && l.iter().all(|&v| v >= 1) => {
                l.sort_unstable();
                l.dedup();
                Ok(Prediction::Refined(l))
            }
            _ => Err(Error::invalid(format!("cannot parse prediction '{s}'"))),
        }
    }
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prediction::Definite(l) => write!(f, "{l}"),
            Prediction::Refined(s) => {
                let parts: Vec<String> = s.iter().map(usize::to_string).collect();
                write!(f, "{}", parts.join(","))
            }
            Prediction::Reject => write!(f, "REJECT"),
        }
    }
}

/// `sign(c) * max(|c| - delta, 0)`.
pub fn soft_threshold(c: f64, delta: f64) -> f64 {
    if c > delta {
        c - delta
    } else if c < -delta {
        c + delta
    } else {
        0.0
    }
}

/// Reject-only rule. Ties in the argmax go to the smallest label. At
/// `delta = 0` the option is off and the rule never rejects.
pub fn predict_reject(margins: &MarginVector, delta: f64) -> Prediction {
    if delta > 0.0
        && margins
            .as_slice()
            .iter()
            .all(|&m| soft_threshold(m, delta) == 0.0)
    {
        Prediction::Reject
    } else {
        Prediction::Definite(margins.argmax_label())
    }
}

/// Reject-and-refine rule. At `delta = 0` both options are off and the
/// rule returns the largest margin.
pub fn predict_refine(margins: &MarginVector, delta: f64) -> Prediction {
    let k = margins.k();
    if delta == 0.0 {
        return Prediction::Definite(margins.argmax_label());
    }
    let mut positive = Vec::new();
    let mut zero = Vec::new();
    for (j, &m) in margins.as_slice().iter().enumerate() {
        let s = soft_threshold(m, delta);
        if s > 0.0 {
            positive.push(j + 1);
        } else if s == 0.0 {
            zero.push(j + 1);
        }
    }
    if zero.len() == k {
        Prediction::Reject
    } else if !positive.is_empty() {
        Prediction::from_set(positive, k)
    } else if !zero.is_empty() {
        Prediction::from_set(zero, k)
    } else {
        // all margins negative: only reachable through rounding when the
        // margins do not sum to exactly zero
        Prediction::Definite(margins.argmax_label())
    }
}

/// Rejection cost `d`, admissible on `(0, (k-1)/k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RejectCost {
    d: f64,
    k: usize,
}

impl RejectCost {
    pub fn new(d: f64, k: usize) -> Result<Self> {
        let bound = (k as f64 - 1.0) / k as f64;
        if k < 2 || !(d > 0.0 && d <= bound) {
            return Err(Error::invalid(format!(
                "rejection cost d = {d} is inadmissible for k = {k}: need 0 < d <= (k-1)/k = {bound}"
            )));
        }
        Ok(RejectCost { d, k })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// 0 for a correct label or a set containing the truth, `d` for a
/// rejection, 1 otherwise.
pub fn zero_d_one_loss(pred: &Prediction, truth: usize, cost: RejectCost) -> f64 {
    match pred {
        Prediction::Reject => cost.d,
        p if p.contains(truth) => 0.0,
        _ => 1.0,
    }
}

/// Error rates of one rule over the partition induced by the
/// reject-and-refine rule. `None` marks an empty partition cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ColumnErrors {
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub p3: Option<f64>,
    pub overall: f64,
}

/// Evaluation of a reject-and-refine classifier on a labelled set, with the
/// reject-only rule and a regular classifier scored on the same partition.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub n: usize,
    pub k: usize,
    pub d: f64,
    pub delta: f64,
    /// Label-predicted, set-predicted and rejected fractions.
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub error_p1: Option<f64>,
    pub misrefine_p2: Option<f64>,
    pub overall_0d1: f64,
    /// Fraction of the test set receiving a set of each size, indexed by
    /// size (entries 0 and 1 unused).
    pub size_histogram: Vec<f64>,
    /// Fraction of the test set receiving each refined set.
    pub set_histogram: BTreeMap<Vec<usize>, f64>,
    pub reject_only: ColumnErrors,
    pub regular: ColumnErrors,
}

impl EvalReport {
    /// Share of size-`set.len()` predictions that equal `set`.
    pub fn set_share(&self, set: &[usize]) -> Option<f64> {
        let mut key = set.to_vec();
        key.sort_unstable();
        let size = *self.size_histogram.get(key.len())?;
        if size <= 0.0 {
            return None;
        }
        Some(self.set_histogram.get(&key).copied().unwrap_or(0.0) / size)
    }

    /// `p1 * error_p1 + p2 * misrefine_p2 + p3 * d`.
    pub fn decomposition(&self) -> f64 {
        self.p1 * self.error_p1.unwrap_or(0.0)
            + self.p2 * self.misrefine_p2.unwrap_or(0.0)
            + self.p3 * self.d
    }

    /// Field-wise mean; partition rates average over the reports where the
    /// cell is non-empty.
    pub fn mean(reports: &[EvalReport]) -> Result<EvalReport> {
        let first = reports
            .first()
            .ok_or_else(|| Error::invalid("cannot average zero reports"))?;
        let m = reports.len() as f64;
        let avg = |f: &dyn Fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / m;
        let avg_opt = |f: &dyn Fn(&EvalReport) -> Option<f64>| {
            let vals: Vec<f64> = reports.iter().filter_map(f).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        };
        let column = |f: &dyn Fn(&EvalReport) -> &ColumnErrors| ColumnErrors {
            p1: avg_opt(&|r| f(r).p1),
            p2: avg_opt(&|r| f(r).p2),
            p3: avg_opt(&|r| f(r).p3),
            overall: avg(&|r| f(r).overall),
        };
        let mut set_histogram = BTreeMap::new();
        for r in reports {
            for (s, v) in &r.set_histogram {
                *set_histogram.entry(s.clone()).or_insert(0.0) += v / m;
            }
        }
        let size_histogram = (0..first.size_histogram.len())
            .map(|s| avg(&|r| r.size_histogram.get(s).copied().unwrap_or(0.0)))
            .collect();
        Ok(EvalReport {
            n: reports.iter().map(|r| r.n).sum(),
            k: first.k,
            d: first.d,
            delta: avg(&|r| r.delta),
            p1: avg(&|r| r.p1),
            p2: avg(&|r| r.p2),
            p3: avg(&|r| r.p3),
            error_p1: avg_opt(&|r| r.error_p1),
            misrefine_p2: avg_opt(&|r| r.misrefine_p2),
            overall_0d1: avg(&|r| r.overall_0d1),
            size_histogram,
            set_histogram,
            reject_only: column(&|r| &r.reject_only),
            regular: column(&|r| &r.regular),
        })
    }

    /// Flat `key value` lines.
    pub fn to_key_value(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x}"));
        let mut lines = vec![
            format!("n {}", self.n),
            format!("k {}", self.k),
            format!("d {}", self.d),
            format!("delta {}", self.delta),
            format!("p1 {}", self.p1),
            format!("p2 {}", self.p2),
            format!("p3 {}", self.p3),
            format!("error_p1 {}", opt(self.error_p1)),
            format!("misrefine_p2 {}", opt(self.misrefine_p2)),
            format!("overall_0d1 {}", self.overall_0d1),
        ];
        for (size, v) in self.size_histogram.iter().enumerate().skip(2) {
            lines.push(format!("size{size} {v}"));
        }
        for (set, v) in &self.set_histogram {
            lines.push(format!("set_{} {v}", join(set, "_")));
        }
        for (name, c) in [("reject", &self.reject_only), ("regular", &self.regular)] {
            lines.push(format!("{name}_error_p1 {}", opt(c.p1)));
            lines.push(format!("{name}_error_p2 {}", opt(c.p2)));
            lines.push(format!("{name}_error_p3 {}", opt(c.p3)));
            lines.push(format!("{name}_overall {}", c.overall));
        }
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }

    /// Table with rows p1 / p2 (and set sizes and sets) / p3 / overall and
    /// columns proportion / regular / reject / rr, all in percent.
    pub fn write_table_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let pct = |v: f64| format!("{:.4}", 100.0 * v);
        let opt = |v: Option<f64>| v.map_or(String::new(), pct);
        let io = |e: csv::Error| Error::io("<table>", std::io::Error::other(e));
        w.write_record(["row", "proportion", "regular", "reject", "rr"])
            .map_err(io)?;
        let rows: Vec<[String; 5]> = {
            let mut r = vec![
                [
                    "p1".into(),
                    pct(self.p1),
                    opt(self.regular.p1),
                    opt(self.reject_only.p1),
                    opt(self.error_p1),
                ],
                [
                    "p2".into(),
                    pct(self.p2),
                    opt(self.regular.p2),
                    opt(self.reject_only.p2),
                    opt(self.misrefine_p2),
                ],
            ];
            for (size, &v) in self.size_histogram.iter().enumerate().skip(2) {
                r.push([
                    format!("size {size}"),
                    pct(v),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
            }
            for set in self.set_histogram.keys() {
                let share = self.set_share(set).unwrap_or(0.0);
                r.push([
                    format!("{{{}}} share of size {}", join(set, ","), set.len()),
                    pct(share),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
            }
            r.push([
                "p3".into(),
                pct(self.p3),
                opt(self.regular.p3),
                String::new(),
                String::new(),
            ]);
            r.push([
                "overall".into(),
                pct(1.0),
                pct(self.regular.overall),
                pct(self.reject_only.overall),
                pct(self.overall_0d1),
            ]);
            r
        };
        for row in rows {
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::io("<table>", e))
    }
}

fn join(set: &[usize], sep: &str) -> String {
    set.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(sep)
}

/// Margins of every row of `data`.
pub fn margins_of<C: Classifier + ?Sized>(model: &C, data: &Dataset) -> Result<Vec<MarginVector>> {
    if model.n_features() != data.p() || model.k() != data.k() {
        return Err(Error::data(format!(
            "model expects {} features and {} classes, data has {} and {}",
            model.n_features(),
            model.k(),
            data.p(),
            data.k()
        )));
    }
    Ok(data.rows().map(|r| model.margins(r)).collect())
}

/// Scores precomputed margins. `regular` are the margins of the regular
/// classifier, used with `delta = 0`.
pub fn evaluate_margins(
    margins: &[MarginVector],
    regular: &[MarginVector],
    labels: &[usize],
    delta: f64,
    cost: RejectCost,
) -> Result<EvalReport> {
    let n = labels.len();
    if n == 0 {
        return Err(Error::data("cannot evaluate on an empty test set"));
    }
    if margins.len() != n || regular.len() != n {
        return Err(Error::invalid("margin and label counts differ"));
    }
    if !(delta >= 0.0) {
        return Err(Error::invalid(format!(
            "threshold delta must be >= 0, got {delta}"
        )));
    }
    let k = cost.k();
    let mut count = [0usize; 3];
    let mut rr_err = [0usize; 3];
    let mut rej_err = [0usize; 3];
    let mut reg_err = [0usize; 3];
    let mut sizes = vec![0usize; k + 1];
    let mut sets: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut total = 0.0;
    let mut total_rej = 0.0;
    let mut total_reg = 0.0;
    for i in 0..n {
        let y = labels[i];
        let rr = predict_refine(&margins[i], delta);
        let rej = predict_reject(&margins[i], delta);
        let reg = Prediction::Definite(regular[i].argmax_label());
        let cell = match &rr {
            Prediction::Definite(_) => 0,
            Prediction::Refined(s) => {
                sizes[s.len()] += 1;
                *sets.entry(s.clone()).or_insert(0) += 1;
                1
            }
            Prediction::Reject => 2,
        };
        count[cell] += 1;
        let l_rr = zero_d_one_loss(&rr, y, cost);
        let l_rej = zero_d_one_loss(&rej, y, cost);
        let l_reg = zero_d_one_loss(&reg, y, cost);
        total += l_rr;
        total_rej += l_rej;
        total_reg += l_reg;
        rr_err[cell] += (l_rr == 1.0) as usize;
        rej_err[cell] += (l_rej == 1.0) as usize;
        reg_err[cell] += (l_reg == 1.0) as usize;
    }
    let nf = n as f64;
    let rate = |e: usize, c: usize| (c > 0).then(|| e as f64 / c as f64);
    let column = |e: &[usize; 3], overall: f64, with_p3: bool| ColumnErrors {
        p1: rate(e[0], count[0]),
        p2: rate(e[1], count[1]),
        p3: if with_p3 { rate(e[2], count[2]) } else { None },
        overall: overall / nf,
    };
    Ok(EvalReport {
        n,
        k,
        d: cost.d(),
        delta,
        p1: count[0] as f64 / nf,
        p2: count[1] as f64 / nf,
        p3: count[2] as f64 / nf,
        error_p1: rate(rr_err[0], count[0]),
        misrefine_p2: rate(rr_err[1], count[1]),
        overall_0d1: total / nf,
        size_histogram: sizes.iter().map(|&c| c as f64 / nf).collect(),
        set_histogram: sets.into_iter().map(|(s, c)| (s, c as f64 / nf)).collect(),
        reject_only: column(&rej_err, total_rej, false),
        regular: column(&reg_err, total_reg, true),
    })
}

/// Evaluates `model` at threshold `delta`; the same model at `delta = 0`
/// serves as the regular classifier.
pub fn evaluate<C: Classifier + ?Sized>(
    model: &C,
    test: &Dataset,
    delta: f64,
    d: f64,
) -> Result<EvalReport> {
    let m = margins_of(model, test)?;
    evaluate_margins(&m, &m, test.labels(), delta, RejectCost::new(d, test.k())?)
}

/// Like [`evaluate`] with a separately trained regular classifier.
pub fn evaluate_with<C: Classifier + ?Sized, R: Classifier + ?Sized>(
    model: &C,
    regular: &R,
    test: &Dataset,
    delta: f64,
    d: f64,
) -> Result<EvalReport> {
    let m = margins_of(model, test)?;
    let r = margins_of(regular, test)?;
    evaluate_margins(&m, &r, test.labels(), delta, RejectCost::new(d, test.k())?)
}
