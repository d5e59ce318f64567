//! Population minimizers of the bent losses and their margin sign patterns.
//!
//! `cargo run --release --example population_minimizer`

use rrclass::coding::CodingSimplex;
use rrclass::losses::BentLoss;
use rrclass::theory::{population_minimizer, predicted_pattern, ProbVector};

fn main() -> rrclass::Result<()> {
    let simplex = CodingSimplex::new(4)?;
    let probs = [
        vec![0.7, 0.1, 0.1, 0.1],
        vec![0.4, 0.35, 0.15, 0.1],
        vec![0.3, 0.28, 0.22, 0.2],
    ];
    for a in [1.5, 3.0] {
        let loss = BentLoss::hinge(a)?;
        println!("bent hinge, a = {a}");
        for p in &probs {
            let pv = ProbVector::new(p.clone())?;
            let min = population_minimizer(&pv, &loss, &simplex)?;
            let (s, pattern) = predicted_pattern(&pv, a);
            let m: Vec<String> = min.margins.iter().map(|v| format!("{v:+.3}")).collect();
            println!(
                "  P = {p:?}: margins [{}], s = {s:?}, predicted {pattern:?}",
                m.join(", ")
            );
        }
    }
    Ok(())
}
