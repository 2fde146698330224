//! Any λ+1 Vandermonde columns are independent, so the dense schemes fall at
//! exactly λ+1 captured nodes and not one earlier.
//!
//! cargo run --release --example vandermonde_threshold

use matrixkpd::attack::security_experiment;
use matrixkpd::schemes::{ParamSpec, SchemeKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ParamSpec::new(SchemeKind::DdhvVandermonde, 65537, 6, 40, 3).validate()?;
    println!("ddhv, lambda = 6, m = {}, generator {}", params.m(), params.generator().unwrap());
    for c in 1..=params.m() + 1 {
        let s = security_experiment(&params, c, 50)?;
        let ranks: Vec<String> = s.rank_histogram.iter().map(|(r, n)| format!("{r}x{n}")).collect();
        println!("c = {c}: full recovery {:>5.1}%  ranks [{}] of {}", 100.0 * s.full_recovery_fraction, ranks.join(" "), s.unknowns);
    }
    Ok(())
}
