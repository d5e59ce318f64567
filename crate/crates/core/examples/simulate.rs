//! Simulation protocol through the library entry point used by the CLI.
//!
//! `cargo run --release --example simulate [example] [replicates]`

use rrclass::cli::{cmd_simulate, RunConfig};

fn main() -> rrclass::Result<()> {
    let mut args = std::env::args().skip(1);
    let example: u8 = args.next().map_or(2, |s| s.parse().expect("example"));
    let replicates: usize = args.next().map_or(2, |s| s.parse().expect("replicates"));
    let (loss, penalty, d, a) = match example {
        1 => ("hinge", "l1", 0.6, "a2"),
        2 => ("hinge", "l2", 0.5, "a1"),
        _ => ("dwd", "l1", 0.5, "a2"),
    };
    let out = std::env::temp_dir().join(format!("rrclass-simulate-{example}"));
    let cfg = RunConfig::from_toml(&format!(
        r#"
[run]
command = "simulate"
replicates = {replicates}
out_dir = "{}"

[data]
example = {example}

[model]
loss = "{loss}"
penalty = "{penalty}"
d = {d}
a = ["{a}"]
"#,
        out.display()
    ))?;
    let sim = cmd_simulate(&cfg)?;
    for r in &sim.rows {
        println!(
            "replicate {}: rr {:.4} reject {:.4} regular {:.4}",
            r.replicate,
            r.report.overall_0d1,
            r.report.reject_only.overall,
            r.report.regular.overall
        );
    }
    println!();
    print!("{}", sim.mean.to_key_value());
    for f in &sim.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
