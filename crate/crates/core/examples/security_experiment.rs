//! Monte-Carlo view of the sparse scheme: how often a random set of c
//! captured nodes gives full rank, and how often their supports overlap.
//!
//! cargo run --release --example security_experiment -- 16 200

use matrixkpd::attack::security_experiment;
use matrixkpd::schemes::{ParamSpec, SchemeKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let lambda: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(16);
    let trials: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200);
    let params = ParamSpec::new(SchemeKind::OrDdhv, 65537, lambda, 2 * lambda, 42).validate()?;
    println!("or-ddhv, lambda = {lambda}, N = {}, {trials} trials per row", 2 * lambda);
    println!("{:>4} {:>10} {:>12} {:>10}", "c", "recovered", "collisions", "mean rank");
    for c in (0..=2 * lambda).step_by((lambda / 4).max(1)) {
        let s = security_experiment(&params, c, trials)?;
        let mean_rank = s.rank_histogram.iter().map(|(r, n)| (r * n) as f64).sum::<f64>() / trials as f64;
        println!(
            "{c:>4} {:>9.1}% {:>11.3} {:>7.1}/{}",
            100.0 * s.full_recovery_fraction,
            s.colliding_support_fraction,
            mean_rank,
            s.unknowns
        );
    }
    Ok(())
}
