//! Multiplications, bits sent and bits stored per node for the three schemes
//! at the same security level.
//!
//! cargo run --release --example cost_comparison -- 64

use matrixkpd::protocol::agree_pair;
use matrixkpd::schemes::{setup, ParamSpec, SchemeKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lambda: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(64);
    let q = 65537;
    println!("q = {q}, lambda = {lambda}, N = {}", 2 * lambda);
    println!("{:<8} {:>6} {:>10} {:>10} {:>12}", "scheme", "mults", "sent bits", "elements", "stored bits");
    for kind in SchemeKind::ALL {
        let params = ParamSpec::new(kind, q, lambda, 2 * lambda, 1).validate()?;
        let dep = setup(&params);
        let out = agree_pair(&dep, 0, 2 * lambda - 1)?;
        let m = out.meter_i;
        println!("{:<8} {:>6} {:>10} {:>10} {:>12}", kind.name(), m.mults, m.comm_bits, m.comm_elements, m.memory_bits);
    }
    Ok(())
}
