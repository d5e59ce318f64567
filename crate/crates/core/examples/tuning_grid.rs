//! Grid search over (lambda, delta, a) on a held-out tuning set, then test
//! evaluation against the reject-only rule and the regular classifier.
//!
//! `cargo run --release --example tuning_grid`

use rrclass::data::GeneratorSpec;
use rrclass::losses::LossKind;
use rrclass::optim::{Penalty, SolverOptions};
use rrclass::predict::evaluate_with;
use rrclass::tune::{log_grid, tune, ModelSpec, TuningGrid, Validation};

fn main() -> rrclass::Result<()> {
    let mut spec = GeneratorSpec::example(2, 5)?;
    spec.noise_dim = 8;
    spec.n_test = 3000;
    let s = spec.generate(0)?;
    let mut grid = TuningGrid::new(0.5);
    grid.lambdas = log_grid(1e-3, 10.0, 12);
    let model = ModelSpec {
        loss: LossKind::BentHinge,
        penalty: Penalty::L2,
        kernel: None,
        opts: SolverOptions::default(),
    };
    let res = tune(&s.train, Validation::TuningSet(&s.tune), &grid, &model)?;
    for (k, v) in res.summary() {
        println!("{k} = {v}");
    }
    let best = res.best_cell();
    let report = evaluate_with(
        res.best_model(),
        res.regular_model().expect("regular path is on"),
        &s.test,
        best.delta,
        grid.d,
    )?;
    println!();
    print!("{}", report.to_key_value());
    Ok(())
}
