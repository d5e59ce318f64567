//! Bent-hinge L2 fit by dual coordinate descent, checked against the
//! primal solver on the same problem.
//!
//! `cargo run --release --example dual_coordinate_descent`

use rrclass::data::GeneratorSpec;
use rrclass::losses::BentLoss;
use rrclass::optim::{
    linear_objective, train_linear_primal, DualCoordinateDescent, Penalty, SolverOptions,
};
use rrclass::tune::a_bounds;

fn main() -> rrclass::Result<()> {
    let mut spec = GeneratorSpec::example(2, 7)?;
    spec.n_train = 60;
    spec.noise_dim = 2;
    let train = spec.generate(0)?.train;
    let (a1, _) = a_bounds(train.k(), 0.5)?;
    let loss = BentLoss::hinge(a1)?;
    let lambda = 0.05;

    let opts = SolverOptions::tight();
    let fit = DualCoordinateDescent::new(&train, &loss, lambda, &opts)?.solve()?;
    println!(
        "dual CD: {} epochs, primal {:.10}, dual {:.10}, gap {:.2e}",
        fit.report.iterations,
        fit.report.objective,
        fit.dual_objective,
        fit.duality_gap()
    );
    let primal = train_linear_primal(&train, &loss, Penalty::L2, lambda, &opts)?;
    let po = linear_objective(&primal, &train)?;
    let dobj = linear_objective(&fit.model, &train)?;
    println!("ADMM primal objective {po:.10}");
    println!("relative difference {:.2e}", (dobj - po).abs() / po.abs());
    Ok(())
}
