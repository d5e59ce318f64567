//! File-based workflow: CSV in, normalization with training statistics,
//! cross-validated tuning, model file out and back.
//!
//! `cargo run --release --example csv_workflow`

use rrclass::data::persist::{load_model, save_model, ModelFile};
use rrclass::data::{load_csv, normalize, save_csv, CsvSchema, GeneratorSpec};
use rrclass::losses::LossKind;
use rrclass::optim::{Classifier, Penalty, SolverOptions};
use rrclass::predict::evaluate;
use rrclass::tune::{log_grid, tune, ModelSpec, TuningGrid, Validation};

fn main() -> rrclass::Result<()> {
    let dir = std::env::temp_dir().join("rrclass-csv-workflow");
    std::fs::create_dir_all(&dir).map_err(|e| rrclass::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let mut spec = GeneratorSpec::example(3, 1)?;
    spec.noise_dim = 10;
    spec.n_test = 2000;
    let s = spec.generate(0)?;
    save_csv(dir.join("train.csv"), &s.train)?;
    save_csv(dir.join("test.csv"), &s.test)?;

    let train = load_csv(dir.join("train.csv"), &CsvSchema::default())?;
    let (nz, train) = normalize(&train)?;
    let mut grid = TuningGrid::new(0.5);
    grid.lambdas = log_grid(1e-3, 1.0, 10);
    let model = ModelSpec {
        loss: LossKind::BentDwd,
        penalty: Penalty::L1,
        kernel: None,
        opts: SolverOptions::default(),
    };
    let res = tune(
        &train,
        Validation::CrossValidation { folds: 5, seed: 9 },
        &grid,
        &model,
    )?;
    let best = res.best_cell();
    println!(
        "selected lambda {:.3e}, a {}, delta {:.4}, cv loss {:.4}",
        best.lambda, best.a_label, best.delta, best.loss
    );

    let mut file = ModelFile::new(res.best_model().clone());
    file.normalizer = Some(nz);
    file.delta = Some(best.delta);
    let path = dir.join("model.txt");
    save_model(&path, &file)?;
    let back = load_model(&path)?;
    println!(
        "model file {} ({} features)",
        path.display(),
        back.model.n_features()
    );

    let schema = CsvSchema {
        k: Some(4),
        ..CsvSchema::default()
    };
    let test = back
        .normalizer
        .as_ref()
        .expect("saved with a normalizer")
        .transform(&load_csv(dir.join("test.csv"), &schema)?)?;
    let report = evaluate(&back.model, &test, back.delta.unwrap_or(0.0), 0.5)?;
    println!(
        "test: p1 {:.3} p2 {:.3} p3 {:.3}, overall 0-d-1 {:.4}",
        report.p1, report.p2, report.p3, report.overall_0d1
    );
    Ok(())
}
