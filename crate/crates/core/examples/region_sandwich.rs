//! Monte Carlo comparison of the Bayes reject region with the population
//! reject regions at the extreme slopes, plus a three-class region map.
//!
//! `cargo run --release --example region_sandwich [map.csv]`

use rrclass::theory::{export_region_map, verify_region_sandwich, SandwichConfig};

fn main() -> rrclass::Result<()> {
    for (k, d) in [(2, 0.3), (3, 0.5), (3, 0.6), (4, 0.5)] {
        let r = verify_region_sandwich(&SandwichConfig::new(k, d, 100_000, 1))?;
        println!(
            "k={k} d={d}: a1={:.4} a2={:.4} violations {}/{} interior a={:?} witnesses {}",
            r.a_inner,
            r.a_outer,
            r.inner_violations,
            r.outer_violations,
            r.a_interior.map(|a| (a * 1e4).round() / 1e4),
            if r.tight() { "found" } else { "missing" }
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        let file = std::fs::File::create(&path).map_err(|e| rrclass::Error::Io {
            path: path.clone().into(),
            source: e,
        })?;
        let rows = export_region_map(file, 0.5, 60)?;
        println!("wrote {rows} grid points to {path}");
    }
    Ok(())
}
