//! Simplex class coding and angle margins.
//!
//! `cargo run --example coding_simplex`

use rrclass::coding::CodingSimplex;

fn main() -> rrclass::Result<()> {
    let simplex = CodingSimplex::new(4)?;
    println!("k = {}, vertices live in R^{}", simplex.k(), simplex.dim());
    for (j, y) in simplex.vertices().enumerate() {
        let norm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        println!("Y_{} = {:?}  |Y| = {norm:.3}", j + 1, round(y));
    }
    let inner: f64 = simplex
        .vertex(0)
        .iter()
        .zip(simplex.vertex(1))
        .map(|(a, b)| a * b)
        .sum();
    println!("<Y_1, Y_2> = {inner:.6} (expected {:.6})", -1.0 / 3.0);

    // any f gives margins summing to zero
    let f = [0.4, -0.1, 0.25];
    let m = simplex.angle_margins(&f)?;
    println!("margins of f = {f:?}: {:?}", round(m.as_slice()));
    println!(
        "sum = {:.2e}, predicted label = {}",
        m.as_slice().iter().sum::<f64>(),
        m.argmax_label()
    );
    Ok(())
}

fn round(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1e4).round() / 1e4).collect()
}
