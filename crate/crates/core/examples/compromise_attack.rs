//! Capture λ sparse nodes, solve the linear system for the secret matrix and
//! use it to predict keys between nodes that were never touched.
//!
//! cargo run --example compromise_attack

use matrixkpd::attack::{recover, CompromiseTranscript};
use matrixkpd::schemes::{setup, ParamSpec, SchemeKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lambda = 8;
    let params = ParamSpec::new(SchemeKind::OrDdhv, 251, lambda, 2 * lambda, 42).validate()?;
    let dep = setup(&params);

    for c in [lambda / 2, lambda - 1, lambda] {
        let ids: Vec<usize> = (0..c).collect();
        let t = CompromiseTranscript::capture(&dep, &ids)?;
        let mut rec = recover(&t, true)?;
        print!("c = {c}: rank {}/{} ({} equations)", rec.rank, rec.unknowns, rec.equations);
        if rec.recovered() {
            let audit = rec.audit_against(&dep)?;
            println!(
                ", secret recovered, {}/{} uncompromised keys predicted",
                audit.pairs_matching, audit.pairs_checked
            );
        } else {
            println!(", nullspace dimension {}", rec.nullspace_dim);
        }
    }
    Ok(())
}
