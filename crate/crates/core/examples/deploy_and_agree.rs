//! Set up a sparse deployment, let two nodes exchange public payloads over
//! the wire format, and check that they land on the same key.
//!
//! cargo run --example deploy_and_agree

use matrixkpd::protocol::{encode_message, handshake, run_all_pairs, PairSelection};
use matrixkpd::schemes::{setup, ParamSpec, SchemeKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ParamSpec::new(SchemeKind::OrDdhv, 65537, 16, 32, 42).validate()?;
    let dep = setup(&params);

    let (alice, bob) = (&dep.shares[3], &dep.shares[20]);
    let to_bob = encode_message(alice, &params);
    let to_alice = encode_message(bob, &params);
    println!("node 3 sends {} bytes: {:02x?}", to_bob.len(), to_bob);

    let (k_ab, meter) = handshake(alice, &to_alice, &params)?;
    let (k_ba, _) = handshake(bob, &to_bob, &params)?;
    println!("node 3 derives {k_ab}, node 20 derives {k_ba}, using {} multiplications each", meter.mults);
    assert_eq!(k_ab, k_ba);

    let report = run_all_pairs(&dep, PairSelection::All)?;
    println!("all {} pairs agree: {}", report.pairs_tested, report.all_keys_match);
    Ok(())
}
