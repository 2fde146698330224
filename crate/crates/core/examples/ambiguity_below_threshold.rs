//! With fewer than λ captured nodes the attacker's equations admit several
//! symmetric secrets. This finds two of them that disagree on a key.
//!
//! cargo run --example ambiguity_below_threshold

use matrixkpd::attack::{ambiguity_witness, recover, verify_witness, CompromiseTranscript};
use matrixkpd::schemes::{setup, ParamSpec, SchemeKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ParamSpec::new(SchemeKind::OrDdhv, 251, 8, 16, 42).validate()?;
    let dep = setup(&params);
    let t = CompromiseTranscript::capture(&dep, &[0, 1, 2, 3, 4, 5, 6])?;
    let rec = recover(&t, true)?;
    println!("rank {}/{}, nullspace dimension {}", rec.rank, rec.unknowns, rec.nullspace_dim);

    for i in 7..16 {
        for j in i + 1..16 {
            if let Some(w) = ambiguity_witness(&t, (i, j), 1)? {
                assert!(verify_witness(&t, &w));
                println!(
                    "pair ({i},{j}): both candidates reproduce every captured row, yet give keys {} and {} (true key {})",
                    w.key1,
                    w.key2,
                    dep.key(i, j)?
                );
                return Ok(());
            }
        }
    }
    println!("every uncompromised key is already pinned down");
    Ok(())
}
