//! Gaussian-kernel machine on a four-class XOR layout.
//!
//! `cargo run --release --example kernel_xor`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rrclass::data::Dataset;
use rrclass::losses::BentLoss;
use rrclass::optim::{train_kernel, Classifier, KernelSpec, SolverOptions};

fn main() -> rrclass::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..80 {
        let (sx, sy) = [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)][i % 4];
        rows.push(vec![
            sx * rng.gen_range(0.2..1.0),
            sy * rng.gen_range(0.2..1.0),
        ]);
        y.push(i % 4 + 1);
    }
    let data = Dataset::from_rows(&rows, y, 4)?;
    let loss = BentLoss::hinge(2.0)?;
    let kernel = KernelSpec::gaussian(0.5)?;
    for lambda in [1.0, 1e-2, 1e-4] {
        let model = train_kernel(&data, &loss, &kernel, lambda, &SolverOptions::default())?;
        let wrong = (0..data.n())
            .filter(|&i| model.margins(data.row(i)).argmax_label() != data.label(i))
            .count();
        println!(
            "lambda {lambda:>7}: training error {:.3}",
            wrong as f64 / data.n() as f64
        );
    }
    Ok(())
}
