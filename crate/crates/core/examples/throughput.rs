//! Rough evaluation throughput of the (μ,λ) EA on a jump function.

use std::time::Instant;

use comma_ea::{run, EAConfig, Objective, Selection};

fn main() {
    let f = Objective::jump(50, 3).unwrap();
    let cfg = EAConfig::new(50, 10, 40, Selection::Comma).with_budget(Some(5_000_000));
    let t = Instant::now();
    let r = run(&cfg, &f, None).unwrap();
    let secs = t.elapsed().as_secs_f64();
    println!(
        "{} evaluations in {secs:.2}s ({:.1} ns/eval)",
        r.evaluations,
        secs * 1e9 / r.evaluations as f64
    );
}
