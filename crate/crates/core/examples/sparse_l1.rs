//! L1-penalized bent-loss fits along a lambda path; the noise covariates
//! drop out as lambda grows.
//!
//! `cargo run --release --example sparse_l1`

use rrclass::data::GeneratorSpec;
use rrclass::losses::BentLoss;
use rrclass::optim::{AdmmSolver, Penalty, SolverOptions};

fn main() -> rrclass::Result<()> {
    let mut spec = GeneratorSpec::example(1, 11)?;
    spec.noise_dim = 20;
    let train = spec.generate(0)?.train;
    let loss = BentLoss::hinge(1.5)?;
    let solver = AdmmSolver::new(&train)?;
    let opts = SolverOptions::default();
    let mut warm: Option<Vec<f64>> = None;
    println!(
        "{:>10} {:>8} {:>8} {:>6} {:>10}",
        "lambda", "signal", "noise", "iters", "objective"
    );
    for lambda in [0.3, 0.1, 0.03, 0.01, 0.003] {
        let fit = solver.solve(&loss, Penalty::L1, lambda, &opts, warm.as_deref())?;
        let m = &fit.model;
        let q = train.k() - 1;
        let active = |rows: std::ops::Range<usize>| {
            rows.filter(|&r| (0..q).any(|c| m.coef(r, c) != 0.0))
                .count()
        };
        println!(
            "{lambda:>10} {:>8} {:>8} {:>6} {:>10.5}",
            active(1..3),
            active(3..train.p() + 1),
            fit.report.iterations,
            fit.report.objective
        );
        warm = Some(m.beta().to_vec());
    }
    Ok(())
}
