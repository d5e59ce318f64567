//! The two prediction rules on a few margin vectors, and the 0-d-1 scoring.
//!
//! `cargo run --example reject_and_refine`

use rrclass::coding::MarginVector;
use rrclass::predict::{predict_refine, predict_reject, zero_d_one_loss, RejectCost};

fn main() -> rrclass::Result<()> {
    let cost = RejectCost::new(0.5, 4)?;
    let cases = [
        vec![0.9, -0.2, -0.3, -0.4],
        vec![0.3, 0.25, -0.25, -0.3],
        vec![0.05, 0.02, -0.03, -0.04],
        vec![0.4, -0.05, -0.15, -0.2],
    ];
    println!(
        "{:<28} {:>6} {:>10} {:>10} {:>8}",
        "margins", "delta", "reject", "refine", "loss(y=2)"
    );
    for m in cases {
        for delta in [0.0, 0.1] {
            let mv = MarginVector(m.clone());
            let rej = predict_reject(&mv, delta);
            let refi = predict_refine(&mv, delta);
            println!(
                "{:<28} {delta:>6} {:>10} {:>10} {:>8}",
                format!("{m:?}"),
                rej.to_string(),
                refi.to_string(),
                zero_d_one_loss(&refi, 2, cost)
            );
        }
    }
    Ok(())
}
