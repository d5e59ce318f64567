//! The `verify` command as a library call, with and without the corrupted
//! slope negative control.
//!
//! `cargo run --release --example verify_theory`

use rrclass::cli::{cmd_verify, RunConfig};

fn main() -> rrclass::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.run.out_dir = std::env::temp_dir().join("rrclass-verify");
    cfg.verify.samples = 20_000;
    let v = cmd_verify(&cfg)?;
    for line in &v.lines {
        println!("{line}");
    }
    cfg.verify.corrupt_a1 = true;
    match cmd_verify(&cfg) {
        Ok(_) => println!("negative control unexpectedly passed"),
        Err(e) => println!("negative control: {e} (exit code {})", e.exit_code()),
    }
    Ok(())
}
