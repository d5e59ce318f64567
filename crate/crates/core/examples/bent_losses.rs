//! Bent hinge and bent DWD losses at the two extreme slopes.
//!
//! `cargo run --example bent_losses [k] [d]`

use rrclass::losses::BentLoss;
use rrclass::tune::a_bounds;

fn main() -> rrclass::Result<()> {
    let mut args = std::env::args().skip(1);
    let k: usize = args.next().map_or(4, |s| s.parse().expect("k"));
    let d: f64 = args.next().map_or(0.5, |s| s.parse().expect("d"));
    let (a1, a2) = a_bounds(k, d)?;
    println!("k = {k}, d = {d}: a1 = {a1:.4}, a2 = {a2:.4}");

    let losses = [
        ("hinge a1", BentLoss::hinge(a1)?),
        ("hinge a2", BentLoss::hinge(a2)?),
        ("dwd a1", BentLoss::dwd(a1)?),
        ("dwd a2", BentLoss::dwd(a2)?),
    ];
    print!("{:>6}", "u");
    for (name, _) in &losses {
        print!("{name:>11}");
    }
    println!();
    for i in -8..=4 {
        let u = i as f64 * 0.25;
        print!("{u:>6.2}");
        for (_, l) in &losses {
            print!("{:>11.4}", l.value(u));
        }
        println!();
    }
    for (name, l) in &losses {
        let (left, right) = l.subgradient(0.0);
        println!("{name}: subdifferential at 0 = [{left:.3}, {right:.3}]");
    }
    Ok(())
}
