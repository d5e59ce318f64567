//! Bent surrogate losses.
//!
//! A bent loss keeps a binary margin loss `l1` on the negative half-line and
//! replaces it by the line `l1(0) + a u` for `u >= 0`, so the slope jumps from
//! 1 to `a > 1` at the origin. The built-in kinds are the bent hinge (SVM) and
//! bent DWD losses; [`NegativeBranch`] lets callers plug in any other convex
//! nondecreasing `l1` with `l1'(0) = 1`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// The part of a bent loss left of the origin.
///
/// Implementations must be convex and nondecreasing on `u <= 0`, with
/// left derivative 1 at 0.
pub trait NegativeBranch: Send + Sync {
    fn name(&self) -> &str;
    /// `l1(u)` for `u <= 0`.
    fn value(&self, u: f64) -> f64;
    /// `l1'(u)` for `u < 0`.
    fn derivative(&self, u: f64) -> f64;
}

#[derive(Clone)]
pub enum LossKind {
    BentHinge,
    BentDwd,
    Custom(Arc<dyn NegativeBranch>),
}

impl LossKind {
    pub fn name(&self) -> &str {
        match self {
            LossKind::BentHinge => "hinge",
            LossKind::BentDwd => "dwd",
            LossKind::Custom(b) => b.name(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hinge" | "svm" => Ok(LossKind::BentHinge),
            "dwd" => Ok(LossKind::BentDwd),
            other => Err(Error::invalid(format!(
                "unknown loss '{other}' (expected hinge or dwd)"
            ))),
        }
    }
}

impl fmt::Debug for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl PartialEq for LossKind {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (LossKind::BentHinge, LossKind::BentHinge) => true,
            (LossKind::BentDwd, LossKind::BentDwd) => true,
            (LossKind::Custom(a), LossKind::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// A bent loss `l = l1 + l2` with right slope `a` at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct BentLoss {
    kind: LossKind,
    a: f64,
}

impl BentLoss {
    pub fn new(kind: LossKind, a: f64) -> Result<Self> {
        if !(a > 1.0) || !a.is_finite() {
            return Err(Error::invalid(format!(
                "bending slope a must be a finite value > 1, got {a}"
            )));
        }
        Self::checked(kind, a)
    }

    /// The unbent loss `l1` (slope 1 on both sides of 0), as used by a
    /// regular classifier without reject or refine options.
    pub fn unbent(kind: LossKind) -> Result<Self> {
        Self::checked(kind, 1.0)
    }

    /// Accepts `a = 1` (unbent) as well as `a > 1`.
    pub fn with_slope(kind: LossKind, a: f64) -> Result<Self> {
        if a == 1.0 {
            Self::unbent(kind)
        } else {
            Self::new(kind, a)
        }
    }

    pub fn is_bent(&self) -> bool {
        self.a > 1.0
    }

    fn with_a_unchecked(&self, a: f64) -> Self {
        BentLoss {
            kind: self.kind.clone(),
            a,
        }
    }

    fn checked(kind: LossKind, a: f64) -> Result<Self> {
        if let LossKind::Custom(b) = &kind {
            let left = b.derivative(-1e-9);
            if (left - 1.0).abs() > 1e-6 {
                return Err(Error::invalid(format!(
                    "custom loss '{}' must have left derivative 1 at 0, got {left}",
                    b.name()
                )));
            }
        }
        Ok(BentLoss { kind, a })
    }

    pub fn hinge(a: f64) -> Result<Self> {
        Self::new(LossKind::BentHinge, a)
    }

    pub fn dwd(a: f64) -> Result<Self> {
        Self::new(LossKind::BentDwd, a)
    }

    pub fn kind(&self) -> &LossKind {
        &self.kind
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Same loss family with a different bending slope.
    pub fn with_a(&self, a: f64) -> Result<Self> {
        Self::new(self.kind.clone(), a)
    }

    fn value_at_zero(&self) -> f64 {
        match &self.kind {
            LossKind::BentHinge | LossKind::BentDwd => 1.0,
            LossKind::Custom(b) => b.value(0.0),
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        if u >= 0.0 {
            return self.value_at_zero() + self.a * u;
        }
        match &self.kind {
            LossKind::BentHinge => {
                if u < -1.0 {
                    0.0
                } else {
                    1.0 + u
                }
            }
            LossKind::BentDwd => {
                if u < -0.5 {
                    -0.25 / u
                } else {
                    1.0 + u
                }
            }
            LossKind::Custom(b) => b.value(u),
        }
    }

    /// The bent hinge written as `[1 + u]_+ + (a - 1)[u]_+`.
    pub fn hinge_decomposition(&self, u: f64) -> Result<(f64, f64)> {
        if self.kind != LossKind::BentHinge {
            return Err(Error::invalid(
                "hinge decomposition is only defined for the bent hinge loss",
            ));
        }
        Ok(((1.0 + u).max(0.0), (self.a - 1.0) * u.max(0.0)))
    }

    /// Subdifferential `[lo, hi]` at `u`.
    pub fn subgradient(&self, u: f64) -> (f64, f64) {
        if u > 0.0 {
            return (self.a, self.a);
        }
        if u == 0.0 {
            return (1.0, self.a);
        }
        match &self.kind {
            LossKind::BentHinge => {
                if u < -1.0 {
                    (0.0, 0.0)
                } else if u == -1.0 {
                    (0.0, 1.0)
                } else {
                    (1.0, 1.0)
                }
            }
            LossKind::BentDwd => {
                if u < -0.5 {
                    let g = 0.25 / (u * u);
                    (g, g)
                } else {
                    (1.0, 1.0)
                }
            }
            LossKind::Custom(b) => {
                let g = b.derivative(u);
                (g, g)
            }
        }
    }

    /// `argmin_v l(v) + (rho / 2)(v - t)^2`.
    pub fn prox(&self, t: f64, rho: f64) -> f64 {
        let inv = 1.0 / rho;
        // right of the kink
        if t > self.a * inv {
            return t - self.a * inv;
        }
        if t >= inv {
            return 0.0;
        }
        match &self.kind {
            LossKind::BentHinge => {
                if t > -1.0 + inv {
                    t - inv
                } else if t >= -1.0 {
                    -1.0
                } else {
                    t
                }
            }
            LossKind::BentDwd => {
                if t >= -0.5 + inv {
                    t - inv
                } else {
                    dwd_prox_left(t, rho)
                }
            }
            LossKind::Custom(_) => self.prox_bisect(t, rho),
        }
    }

    fn prox_bisect(&self, t: f64, rho: f64) -> f64 {
        // optimality: 0 in dl(v) + rho (v - t), with v in [t - a/rho, min(t, 0)]
        let mut lo = t - self.a / rho;
        let mut hi = t.min(0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let (glo, ghi) = self.subgradient(mid);
            if glo + rho * (mid - t) > 0.0 {
                hi = mid;
            } else if ghi + rho * (mid - t) < 0.0 {
                lo = mid;
            } else {
                return mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Closure of `{m : s in dl(m)}` as an interval on the extended line.
    ///
    /// Slopes above `a` map to `+inf`, slopes below every attainable slope
    /// map to `-inf`. The map is monotone in `s`.
    pub fn margin_for_slope(&self, s: f64) -> (f64, f64) {
        const INF: f64 = f64::INFINITY;
        if s > self.a {
            return (INF, INF);
        }
        if s == self.a && self.is_bent() {
            return (0.0, INF);
        }
        if s == 1.0 && !self.is_bent() {
            let (lo, _) = self.with_a_unchecked(2.0).margin_for_slope(1.0);
            return (lo, INF);
        }
        if s > 1.0 {
            return (0.0, 0.0);
        }
        match &self.kind {
            LossKind::BentHinge => {
                if s == 1.0 {
                    (-1.0, 0.0)
                } else if s > 0.0 {
                    (-1.0, -1.0)
                } else if s == 0.0 {
                    (-INF, -1.0)
                } else {
                    (-INF, -INF)
                }
            }
            LossKind::BentDwd => {
                if s == 1.0 {
                    (-0.5, 0.0)
                } else if s > 0.0 {
                    let m = -0.5 / s.sqrt();
                    (m, m)
                } else {
                    (-INF, -INF)
                }
            }
            LossKind::Custom(b) => custom_margin_for_slope(b.as_ref(), s),
        }
    }
}

/// Solves `v + 1/(4 rho v^2) = t` on `v < -0.5`. The left side is convex and
/// increasing there, so Newton from `v = -0.5` converges monotonically.
fn dwd_prox_left(t: f64, rho: f64) -> f64 {
    let mut v = -0.5;
    for _ in 0..100 {
        let h = v + 0.25 / (rho * v * v) - t;
        let dh = 1.0 - 0.5 / (rho * v * v * v);
        let step = h / dh;
        v -= step;
        if step.abs() <= 1e-15 * v.abs() {
            break;
        }
    }
    v
}

fn custom_margin_for_slope(b: &dyn NegativeBranch, s: f64) -> (f64, f64) {
    // derivative is nondecreasing on (-inf, 0); bracket within [-1e8, 0)
    const FLOOR: f64 = -1e8;
    let first_ge = |target: f64, strict: bool| -> f64 {
        let pass = |u: f64| {
            let g = b.derivative(u);
            if strict {
                g > target
            } else {
                g >= target
            }
        };
        if pass(FLOOR) {
            return f64::NEG_INFINITY;
        }
        let (mut lo, mut hi) = (FLOOR, -1e-300);
        if !pass(hi) {
            return 0.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if pass(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let lo = first_ge(s, false);
    let hi = first_ge(s, true);
    if lo == f64::NEG_INFINITY && hi == f64::NEG_INFINITY {
        return (f64::NEG_INFINITY, f64::NEG_INFINITY);
    }
    (lo, hi.max(lo))
}

/// Free-function form of [`BentLoss::value`].
pub fn loss_eval(loss: &BentLoss, u: f64) -> f64 {
    loss.value(u)
}

/// Free-function form of [`BentLoss::subgradient`].
pub fn loss_subgradient(loss: &BentLoss, u: f64) -> (f64, f64) {
    loss.subgradient(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hinge_values() {
        let l = BentLoss::hinge(2.0).unwrap();
        assert_eq!(l.value(-2.0), 0.0);
        assert_eq!(l.value(-0.5), 0.5);
        assert_eq!(l.value(1.0), 3.0);
        assert_eq!(l.value(0.0), 1.0);
    }

    #[test]
    fn dwd_values() {
        let l = BentLoss::dwd(2.0).unwrap();
        assert_eq!(l.value(-1.0), 0.25);
        assert_eq!(l.value(-0.5), 0.5);
        assert_eq!(l.value(0.0), 1.0);
    }

    #[test]
    fn rejects_flat_bend() {
        assert!(BentLoss::hinge(1.0).is_err());
        assert!(BentLoss::dwd(0.5).is_err());
        assert!(BentLoss::hinge(f64::NAN).is_err());
    }

    #[test]
    fn subgradient_examples() {
        let h = BentLoss::hinge(2.0).unwrap();
        assert_eq!(h.subgradient(0.0), (1.0, 2.0));
        assert_eq!(h.subgradient(-1.0), (0.0, 1.0));
        assert_eq!(h.subgradient(0.5), (2.0, 2.0));
        let d = BentLoss::dwd(2.0).unwrap();
        assert_eq!(d.subgradient(-1.0), (0.25, 0.25));
    }

    #[test]
    fn decomposition_matches_value() {
        let h = BentLoss::hinge(1.7).unwrap();
        for &u in &[-3.0, -1.0, -0.3, 0.0, 0.4, 2.5] {
            let (a, b) = h.hinge_decomposition(u).unwrap();
            assert_abs_diff_eq!(a + b, h.value(u), epsilon = 1e-14);
        }
        assert!(BentLoss::dwd(2.0)
            .unwrap()
            .hinge_decomposition(0.0)
            .is_err());
    }

    fn brute_prox(l: &BentLoss, t: f64, rho: f64) -> f64 {
        // golden-section on the strongly convex prox objective
        let obj = |v: f64| l.value(v) + 0.5 * rho * (v - t) * (v - t);
        let (mut lo, mut hi) = (t - l.a() / rho - 1.0, t + 1.0);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..300 {
            let x1 = hi - g * (hi - lo);
            let x2 = lo + g * (hi - lo);
            if obj(x1) < obj(x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn prox_matches_golden_section() {
        for l in [BentLoss::hinge(1.5).unwrap(), BentLoss::dwd(3.0).unwrap()] {
            for &rho in &[0.3, 1.0, 4.0] {
                let mut t = -4.0;
                while t < 4.0 {
                    let p = l.prox(t, rho);
                    let b = brute_prox(&l, t, rho);
                    assert!((p - b).abs() < 1e-6, "{:?} t={t} rho={rho}: {p} vs {b}", l);
                    t += 0.037;
                }
            }
        }
    }

    /// `ln(1 + e^(b u)) / ln 2` with `b = 2 ln 2`: value 1 and slope 1 at 0.
    struct Logistic;
    impl NegativeBranch for Logistic {
        fn name(&self) -> &str {
            "logistic"
        }
        fn value(&self, u: f64) -> f64 {
            let b = 2.0 * 2f64.ln();
            (b * u).exp().ln_1p() / 2f64.ln()
        }
        fn derivative(&self, u: f64) -> f64 {
            let e = (2.0 * 2f64.ln() * u).exp();
            2.0 * e / (1.0 + e)
        }
    }

    #[test]
    fn custom_branch_prox_and_inverse() {
        let l = BentLoss::new(LossKind::Custom(Arc::new(Logistic)), 2.0).unwrap();
        for &t in &[-3.0, -0.7, 0.2, 1.0, 3.0] {
            let p = l.prox(t, 1.0);
            let (lo, hi) = l.subgradient(p);
            let r = (p - t) * 1.0;
            assert!(lo + r <= 1e-8 && hi + r >= -1e-8, "t={t} p={p}");
        }
        let (lo, hi) = l.margin_for_slope(0.5);
        assert!(lo < 0.0 && (lo - hi).abs() < 1e-8);
        assert!((l.subgradient(lo).0 - 0.5).abs() < 1e-8);
    }

    #[test]
    fn margin_for_slope_hinge() {
        let l = BentLoss::hinge(2.0).unwrap();
        assert_eq!(l.margin_for_slope(0.5), (-1.0, -1.0));
        assert_eq!(l.margin_for_slope(1.0), (-1.0, 0.0));
        assert_eq!(l.margin_for_slope(1.5), (0.0, 0.0));
        assert_eq!(l.margin_for_slope(2.0), (0.0, f64::INFINITY));
        assert_eq!(l.margin_for_slope(2.5).0, f64::INFINITY);
        let d = BentLoss::dwd(2.0).unwrap();
        let (m, _) = d.margin_for_slope(0.25);
        assert_abs_diff_eq!(m, -1.0, epsilon = 1e-15);
    }
}
