//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Set `ACCEPTANCE_ONLY=1,2,3` to run a subset. Sub-checks marked as
//! documented deviations print FAIL when they fail but do not fail the run;
//! every other failing check does.

use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rrclass::cli::run_replicate;
use rrclass::coding::{CodingSimplex, MarginVector};
use rrclass::data::persist::ModelFile;
use rrclass::data::{Dataset, GeneratorSpec};
use rrclass::losses::{BentLoss, LossKind};
use rrclass::optim::{
    linear_objective, train_linear_dual_cd, train_linear_primal, Classifier, LinearModel, Penalty,
    SolverOptions,
};
use rrclass::predict::EvalReport;
use rrclass::predict::{evaluate_margins, predict_refine, predict_reject, Prediction, RejectCost};
use rrclass::theory::{prop1_sweep, verify_region_sandwich, SandwichConfig};
use rrclass::tune::{ACandidate, ModelSpec, TuningGrid};

const SEED: u64 = 2024;
const REPLICATES: u64 = 20;

struct Check {
    what: String,
    ok: bool,
    /// Known failure recorded in the decisions ledger.
    deviation: bool,
}

fn check(what: impl Into<String>, ok: bool) -> Check {
    Check {
        what: what.into(),
        ok,
        deviation: false,
    }
}

fn deviation(what: impl Into<String>, ok: bool) -> Check {
    Check {
        deviation: true,
        ..check(what, ok)
    }
}

fn within(t: Instant, limit: Duration) -> Check {
    let e = t.elapsed();
    check(
        format!("runtime {:.1}s < {}s", e.as_secs_f64(), limit.as_secs()),
        e < limit,
    )
}

fn criterion1() -> Vec<Check> {
    let t = Instant::now();
    let mut out = Vec::new();
    for (k, d) in [(2, 0.3), (3, 0.5), (3, 0.6), (4, 0.5)] {
        let r = verify_region_sandwich(&SandwichConfig::new(k, d, 100_000, SEED)).unwrap();
        out.push(check(
            format!(
                "(k={k}, d={d}) violations {}+{} of 1e5, witnesses {}",
                r.inner_violations,
                r.outer_violations,
                if r.tight() { "found" } else { "missing" }
            ),
            r.passed(),
        ));
    }
    out.push(within(t, Duration::from_secs(30)));
    out
}

fn criterion2() -> Vec<Check> {
    let t = Instant::now();
    let (mut checked, mut boundary, mut bad) = (0, 0, 0);
    for k in [3, 4, 5] {
        for kind in [LossKind::BentHinge, LossKind::BentDwd] {
            for a in [1.2, 2.0, 3.0] {
                let loss = BentLoss::new(kind.clone(), a).unwrap();
                let s = prop1_sweep(k, &loss, 200, SEED, 1e-5).unwrap();
                checked += s.checked;
                boundary += s.skipped_boundary;
                bad += s.failures.len();
            }
        }
    }
    vec![
        check(
            format!("{checked} non-boundary cases, {bad} mismatches ({boundary} boundary skipped)"),
            bad == 0 && checked > 0,
        ),
        within(t, Duration::from_secs(120)),
    ]
}

fn criterion3() -> Vec<Check> {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let opts = SolverOptions::tight();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.gen_range(10..=60);
        let p = rng.gen_range(1..=10);
        let k = rng.gen_range(2..=4);
        let a = rng.gen_range(1.1..4.0);
        let lambda = 10f64.powf(rng.gen_range(-2.5..0.0));
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..p)
                    .map(|j| rng.gen_range(-1.0..1.0) + if j % k == i % k { 0.8 } else { 0.0 })
                    .collect()
            })
            .collect();
        let data = Dataset::from_rows(&rows, (0..n).map(|i| i % k + 1).collect(), k).unwrap();
        let loss = BentLoss::hinge(a).unwrap();
        let od = linear_objective(
            &train_linear_dual_cd(&data, &loss, lambda, &opts).unwrap(),
            &data,
        )
        .unwrap();
        let op = linear_objective(
            &train_linear_primal(&data, &loss, Penalty::L2, lambda, &opts).unwrap(),
            &data,
        )
        .unwrap();
        worst = worst.max((od - op).abs() / op.abs());
    }
    vec![
        check(
            format!("max relative objective gap {worst:.2e} <= 1e-6"),
            worst <= 1e-6,
        ),
        within(t, Duration::from_secs(60)),
    ]
}

fn simulate(example: u8, loss: LossKind, penalty: Penalty, d: f64, a: ACandidate) -> EvalReport {
    let gen = GeneratorSpec::example(example, SEED).unwrap();
    let mut grid = TuningGrid::new(d);
    grid.a_candidates = vec![a];
    let spec = ModelSpec {
        loss,
        penalty,
        kernel: None,
        opts: SolverOptions::default(),
    };
    let reports: Vec<EvalReport> = (0..REPLICATES)
        .map(|r| {
            run_replicate(&gen, r, &grid, &spec)
                .unwrap_or_else(|e| panic!("replicate {r} (seed {SEED}): {e}"))
                .report
        })
        .collect();
    EvalReport::mean(&reports).unwrap()
}

fn pct(v: f64) -> String {
    format!("{:.2}%", 100.0 * v)
}

fn criterion4() -> Vec<Check> {
    let t = Instant::now();
    let m = simulate(1, LossKind::BentHinge, Penalty::L1, 0.6, ACandidate::A2);
    let (rr, rej, reg) = (m.overall_0d1, m.reject_only.overall, m.regular.overall);
    let mis = m.misrefine_p2.unwrap_or(0.0);
    let reg_p2 = m.regular.p2.unwrap_or(0.0);
    vec![
        check(
            format!(
                "ordering R&R {} < Reject {} < Regular {}",
                pct(rr),
                pct(rej),
                pct(reg)
            ),
            rr < rej && rej < reg,
        ),
        deviation(
            format!("R&R {} within 27.47% +- 8", pct(rr)),
            (rr - 0.2747).abs() <= 0.08,
        ),
        check(
            format!("mis-refinement on p2 {} < 10%", pct(mis)),
            mis < 0.10,
        ),
        check(
            format!("regular error on p2 {} > 35%", pct(reg_p2)),
            reg_p2 > 0.35,
        ),
        within(t, Duration::from_secs(900)),
    ]
}

fn criterion5() -> Vec<Check> {
    let t = Instant::now();
    let m = simulate(2, LossKind::BentHinge, Penalty::L2, 0.5, ACandidate::A1);
    let share = m.set_share(&[1, 2]).unwrap_or(0.0);
    vec![
        check(
            format!("{{1,2}} share of size-2 sets {} >= 50%", pct(share)),
            share >= 0.5,
        ),
        check(
            format!(
                "R&R {} < Regular {}",
                pct(m.overall_0d1),
                pct(m.regular.overall)
            ),
            m.overall_0d1 < m.regular.overall,
        ),
        within(t, Duration::from_secs(900)),
    ]
}

fn criterion6() -> Vec<Check> {
    let t = Instant::now();
    let m = simulate(3, LossKind::BentDwd, Penalty::L1, 0.5, ACandidate::A2);
    let s12 = m.set_share(&[1, 2]).unwrap_or(0.0);
    let s34 = m.set_share(&[3, 4]).unwrap_or(0.0);
    vec![
        deviation(
            format!(
                "{{1,2}} {} + {{3,4}} {} of size-2 sets >= 60%",
                pct(s12),
                pct(s34)
            ),
            s12 + s34 >= 0.6,
        ),
        check(
            format!(
                "R&R {} < Regular {}",
                pct(m.overall_0d1),
                pct(m.regular.overall)
            ),
            m.overall_0d1 < m.regular.overall,
        ),
        within(t, Duration::from_secs(900)),
    ]
}

fn run_prop<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Check {
    let mut runner = TestRunner::new(Config {
        cases: 2000,
        failure_persistence: None,
        ..Config::default()
    });
    match runner.run(&strategy, test) {
        Ok(()) => check(name, true),
        Err(e) => check(format!("{name}: {e}"), false),
    }
}

fn margins() -> impl Strategy<Value = Vec<f64>> {
    (
        2usize..8,
        prop::collection::vec(-2.0..2.0f64, 7),
        prop::bool::weighted(0.1),
    )
        .prop_map(|(k, f, zero)| {
            let f: Vec<f64> = if zero {
                vec![0.0; k - 1]
            } else {
                f[..k - 1].to_vec()
            };
            CodingSimplex::new(k).unwrap().angle_margins(&f).unwrap().0
        })
}

fn losses() -> impl Strategy<Value = BentLoss> {
    (prop::bool::ANY, 1.0001..10.0f64).prop_map(|(h, a)| {
        if h {
            BentLoss::hinge(a).unwrap()
        } else {
            BentLoss::dwd(a).unwrap()
        }
    })
}

fn criterion7() -> Vec<Check> {
    let t = Instant::now();
    let mut simplex_ok = true;
    for k in 2..=50 {
        let s = CodingSimplex::new(k).unwrap();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        for i in 0..k {
            simplex_ok &= (dot(s.vertex(i), s.vertex(i)) - 1.0).abs() < 1e-12;
            for j in i + 1..k {
                simplex_ok &=
                    (dot(s.vertex(i), s.vertex(j)) + 1.0 / (k as f64 - 1.0)).abs() < 1e-12;
            }
        }
        let sum: Vec<f64> = (0..k - 1)
            .map(|c| s.vertices().map(|y| y[c]).sum())
            .collect();
        simplex_ok &= sum.iter().all(|v| v.abs() < 1e-12);
    }
    let mut out = vec![check("coding simplex k = 2..50", simplex_ok)];
    out.push(run_prop(
        "bent loss convex, continuous, value 1 at 0",
        (losses(), -5.0..5.0f64, -5.0..5.0f64, 0.0..=1.0f64),
        |(l, u, v, s)| {
            let chord = s * l.value(u) + (1.0 - s) * l.value(v);
            prop_assert!(l.value(s * u + (1.0 - s) * v) <= chord + 1e-12 * (1.0 + chord.abs()));
            prop_assert!((l.value(u + 1e-9) - l.value(u)).abs() <= 1e-8 * (1.0 + l.a()));
            prop_assert_eq!(l.value(0.0), 1.0);
            Ok(())
        },
    ));
    out.push(run_prop(
        "bent loss C1 away from its kinks",
        (losses(), -5.0..5.0f64),
        |(l, u)| {
            let hinge_kink = matches!(l.kind(), LossKind::BentHinge) && (u + 1.0).abs() < 1e-3;
            if u.abs() < 1e-3 || hinge_kink {
                return Ok(());
            }
            let (lo, hi) = l.subgradient(u);
            prop_assert_eq!(lo, hi);
            let numeric = (l.value(u + 1e-6) - l.value(u - 1e-6)) / 2e-6;
            prop_assert!((numeric - lo).abs() < 1e-5);
            Ok(())
        },
    ));
    out.push(run_prop(
        "reject outcomes of both rules coincide",
        (margins(), 0.0..2.0f64),
        |(m, delta)| {
            let mv = MarginVector(m);
            prop_assert_eq!(
                predict_reject(&mv, delta) == Prediction::Reject,
                predict_refine(&mv, delta) == Prediction::Reject
            );
            Ok(())
        },
    ));
    out.push(run_prop(
        "reject set is an up-set in delta",
        (margins(), 0.0..2.0f64, 0.0..2.0f64),
        |(m, x, y)| {
            let mv = MarginVector(m);
            if predict_refine(&mv, x.min(y)) == Prediction::Reject {
                prop_assert_eq!(predict_refine(&mv, x.max(y)), Prediction::Reject);
            }
            Ok(())
        },
    ));
    out.push(run_prop(
        "scale equivariance",
        (margins(), 0.0..1.0f64, -20i32..20),
        |(m, delta, e)| {
            let c = 2f64.powi(e);
            let scaled = MarginVector(m.iter().map(|v| c * v).collect());
            let mv = MarginVector(m);
            prop_assert_eq!(
                predict_refine(&scaled, c * delta),
                predict_refine(&mv, delta)
            );
            prop_assert_eq!(
                predict_reject(&scaled, c * delta),
                predict_reject(&mv, delta)
            );
            Ok(())
        },
    ));
    out.push(run_prop(
        "EvalReport decomposition identity",
        (
            prop::collection::vec((prop::collection::vec(-1.0..1.0f64, 4), 1usize..=4), 1..100),
            0.0..0.8f64,
        ),
        |(rows, delta)| {
            let m: Vec<MarginVector> = rows.iter().map(|(v, _)| MarginVector(v.clone())).collect();
            let y: Vec<usize> = rows.iter().map(|(_, l)| *l).collect();
            let r = evaluate_margins(&m, &m, &y, delta, RejectCost::new(0.5, 4).unwrap()).unwrap();
            prop_assert!((r.p1 + r.p2 + r.p3 - 1.0).abs() < 1e-12);
            prop_assert!((r.overall_0d1 - r.decomposition()).abs() < 1e-12);
            Ok(())
        },
    ));
    out.push(run_prop(
        "model persistence round trip to 1e-15",
        (prop::collection::vec(-1e3..1e3f64, 12), 1e-6..1e3f64),
        |(beta, lambda)| {
            let m = LinearModel::new(
                beta.clone(),
                3,
                4,
                Penalty::L2,
                lambda,
                BentLoss::dwd(2.0).unwrap(),
            )
            .unwrap();
            let text = ModelFile::new(m).to_text().unwrap();
            let back = ModelFile::from_text(&text, std::path::Path::new("mem")).unwrap();
            let x = [0.3, -1.2, 2.0];
            let fresh =
                LinearModel::new(beta, 3, 4, Penalty::L2, lambda, BentLoss::dwd(2.0).unwrap())
                    .unwrap();
            for (u, v) in back.model.margins(&x).0.iter().zip(fresh.margins(&x).0) {
                prop_assert!((u - v).abs() <= 1e-15 * v.abs().max(1.0));
            }
            Ok(())
        },
    ));
    out.push(within(t, Duration::from_secs(60)));
    out
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let criteria: [(usize, fn() -> Vec<Check>); 7] = [
        (1, criterion1),
        (2, criterion2),
        (3, criterion3),
        (4, criterion4),
        (5, criterion5),
        (6, criterion6),
        (7, criterion7),
    ];
    let mut unexpected = 0;
    for (id, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let checks = run();
        let passed = checks.iter().all(|c| c.ok);
        let parts: Vec<String> = checks
            .iter()
            .map(|c| match (c.ok, c.deviation) {
                (true, _) => c.what.clone(),
                (false, true) => format!("{} [FAILED, documented deviation]", c.what),
                (false, false) => format!("{} [FAILED]", c.what),
            })
            .collect();
        println!(
            "criterion {id}: {} ({})",
            if passed { "PASS" } else { "FAIL" },
            parts.join("; ")
        );
        unexpected += checks.iter().filter(|c| !c.ok && !c.deviation).count();
    }
    if unexpected > 0 {
        println!("{unexpected} check(s) failed outside the documented deviations");
        std::process::exit(1);
    }
}
