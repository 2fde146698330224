//! Byte layout of a public-payload message and what the decoder rejects.
//!
//! cargo run --example wire_format

use matrixkpd::protocol::{decode_message, encode_message};
use matrixkpd::schemes::{setup, ParamSpec, SchemeKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for kind in SchemeKind::ALL {
        let params = ParamSpec::new(kind, 65537, 2, 4, 9).validate()?;
        let dep = setup(&params);
        let bytes = encode_message(&dep.shares[1], &params);
        let payload: Vec<u64> = dep.shares[1].public_payload.iter().map(|e| e.value()).collect();
        println!("{:<8} payload {payload:?}", kind.name());
        println!("         version {:02x} scheme {:02x} id {:02x?} count {:02x?} body {:02x?}", bytes[0], bytes[1], &bytes[2..6], &bytes[6..8], &bytes[8..]);
        assert_eq!(decode_message(&bytes, &params)?, (1, dep.shares[1].public_payload.clone()));
    }

    let params = ParamSpec::new(SchemeKind::OrDdhv, 65537, 2, 4, 9).validate()?;
    let good = encode_message(&setup(&params).shares[0], &params);
    let mut cases = vec![("truncated", good[..good.len() - 1].to_vec())];
    let mut v = good.clone();
    v[0] = 2;
    cases.push(("bad version", v));
    let mut v = good.clone();
    v[1] = 0;
    cases.push(("wrong scheme", v));
    let mut v = good.clone();
    v[8..11].copy_from_slice(&[0xff, 0xff, 0xff]);
    cases.push(("element >= q", v));
    for (name, bytes) in cases {
        println!("{name:<13} -> {}", decode_message(&bytes, &params).unwrap_err());
    }
    Ok(())
}
