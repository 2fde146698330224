//! Pairwise handshake: wire encoding of public payloads, key agreement and
//! resource metering.
//!
//! Wire layout (little-endian throughout):
//!
//! ```text
//! offset  size  field
//! 0       1     version (0x01)
//! 1       1     scheme id (0x00 blom, 0x01 ddhv, 0x02 or-ddhv)
//! 2       4     node id
//! 6       2     element count
//! 8       c*w   elements, w = ceil(ceil(log2 q) / 8) bytes each
//! ```

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::galois::{FieldElement, MulCounter};
use crate::rng::{seeded_rng, sub_seed};
use crate::schemes::{derive_key, Deployment, NodeShare, PairwiseKey, SchemeError, SchemeKind, SchemeParams};

pub const WIRE_VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("message truncated: need {needed} bytes, got {got}")]
    TruncatedMessage { needed: usize, got: usize },
    #[error("message has {extra} bytes past the declared payload")]
    TrailingBytes { extra: usize },
    #[error("unsupported wire version {0:#04x}")]
    BadVersion(u8),
    #[error("scheme id {found:#04x} does not match the deployment's {expected}")]
    SchemeMismatch { expected: SchemeKind, found: u8 },
    #[error("element {index} = {value} is not below q = {q}")]
    ElementOutOfRange { index: usize, value: u64, q: u64 },
    #[error("message declares {found} elements, the scheme publishes {expected}")]
    PayloadLengthMismatch { expected: usize, found: usize },
    #[error("node id {id} is outside the network of {n} nodes")]
    UnknownNode { id: u64, n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("key mismatch between nodes {i} and {j}: {k_ij} != {k_ji}")]
    KeyMismatch { i: usize, j: usize, k_ij: u64, k_ji: u64 },
}

/// A decoded public-column message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireMessage {
    pub scheme: SchemeKind,
    pub node_id: u32,
    pub elements: Vec<FieldElement>,
}

impl WireMessage {
    pub fn encode(&self, width: usize) -> Vec<u8> {
        let count = u16::try_from(self.elements.len()).expect("payload fits a 16-bit count");
        let mut out = Vec::with_capacity(HEADER_LEN + self.elements.len() * width);
        out.push(WIRE_VERSION);
        out.push(self.scheme.wire_id());
        out.extend_from_slice(&self.node_id.to_le_bytes());
        out.extend_from_slice(&count.to_le_bytes());
        for e in &self.elements {
            out.extend_from_slice(&e.value().to_le_bytes()[..width]);
        }
        out
    }
}

/// Serializes a node's public payload.
pub fn encode_message(share: &NodeShare, params: &SchemeParams) -> Vec<u8> {
    WireMessage {
        scheme: params.kind(),
        node_id: u32::try_from(share.node_id).expect("node ids fit 32 bits"),
        elements: share.public_payload.clone(),
    }
    .encode(params.modulus().byte_width())
}

/// Parses and validates a message against the deployment parameters.
pub fn decode_message(bytes: &[u8], params: &SchemeParams) -> Result<(usize, Vec<FieldElement>), WireError> {
    if bytes.len() < HEADER_LEN {
        return Err(WireError::TruncatedMessage { needed: HEADER_LEN, got: bytes.len() });
    }
    if bytes[0] != WIRE_VERSION {
        return Err(WireError::BadVersion(bytes[0]));
    }
    if bytes[1] != params.kind().wire_id() {
        return Err(WireError::SchemeMismatch { expected: params.kind(), found: bytes[1] });
    }
    let node_id = u32::from_le_bytes(bytes[2..6].try_into().expect("4 bytes"));
    let count = u16::from_le_bytes(bytes[6..8].try_into().expect("2 bytes")) as usize;
    let width = params.modulus().byte_width();
    let needed = HEADER_LEN + count * width;
    if bytes.len() < needed {
        return Err(WireError::TruncatedMessage { needed, got: bytes.len() });
    }
    if bytes.len() > needed {
        return Err(WireError::TrailingBytes { extra: bytes.len() - needed });
    }
    if count != params.payload_len() {
        return Err(WireError::PayloadLengthMismatch { expected: params.payload_len(), found: count });
    }
    if node_id as usize >= params.n() {
        return Err(WireError::UnknownNode { id: node_id.into(), n: params.n() });
    }
    let q = params.modulus().value();
    let elements = bytes[HEADER_LEN..]
        .chunks_exact(width)
        .enumerate()
        .map(|(index, chunk)| {
            let mut buf = [0u8; 8];
            buf[..width].copy_from_slice(chunk);
            let value = u64::from_le_bytes(buf);
            params.modulus().checked_elem(value).map_err(|_| WireError::ElementOutOfRange { index, value, q })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((node_id as usize, elements))
}

/// Per-handshake resource figures, in the units of the cost comparison:
/// field multiplications, bits sent and bits stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceMeter {
    /// Counted field multiplications for one key derivation.
    pub mults: u64,
    /// Field elements in the peer's public payload.
    pub comm_elements: u64,
    /// `comm_elements · ⌈log₂ q⌉`; the wire header is not included.
    pub comm_bits: u64,
    pub header_bits: u64,
    /// `m · ⌈log₂ q⌉` actually stored per node.
    pub memory_bits: u64,
    /// `λ · ⌈log₂ q⌉`, the figure the cost model quotes for every scheme.
    pub model_memory_bits: u64,
}

impl ResourceMeter {
    fn new(params: &SchemeParams, mults: u64) -> Self {
        let bits = u64::from(params.modulus().bits());
        let comm_elements = params.payload_len() as u64;
        Self {
            mults,
            comm_elements,
            comm_bits: comm_elements * bits,
            header_bits: (HEADER_LEN * 8) as u64,
            memory_bits: params.m() as u64 * bits,
            model_memory_bits: params.lambda() as u64 * bits,
        }
    }
}

/// One side of the online phase: decode the peer's message and derive the key.
pub fn handshake(
    share: &NodeShare,
    peer_message: &[u8],
    params: &SchemeParams,
) -> Result<(PairwiseKey, ResourceMeter), ProtocolError> {
    let (peer_id, payload) = decode_message(peer_message, params)?;
    let mut counter = MulCounter::new();
    let key = derive_key(share, &payload, peer_id, params, &mut counter)?;
    Ok((key, ResourceMeter::new(params, counter.count())))
}

/// Both directions of one pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairOutcome {
    pub i: usize,
    pub j: usize,
    pub key: PairwiseKey,
    pub meter_i: ResourceMeter,
    pub meter_j: ResourceMeter,
}

/// Runs the exchange between `i` and `j` and checks that both keys agree.
pub fn agree_pair(dep: &Deployment, i: usize, j: usize) -> Result<PairOutcome, ProtocolError> {
    let (si, sj) = (dep.share(i)?, dep.share(j)?);
    let msg_i = encode_message(si, &dep.params);
    let msg_j = encode_message(sj, &dep.params);
    let (k_ij, meter_i) = handshake(si, &msg_j, &dep.params)?;
    let (k_ji, meter_j) = handshake(sj, &msg_i, &dep.params)?;
    if k_ij != k_ji {
        return Err(ProtocolError::KeyMismatch { i, j, k_ij: k_ij.value(), k_ji: k_ji.value() });
    }
    Ok(PairOutcome { i, j, key: k_ij, meter_i, meter_j })
}

/// Which unordered pairs to exercise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSelection {
    All,
    /// `k` distinct pairs drawn uniformly with the deployment seed.
    Random(usize),
}

impl FromStr for PairSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(PairSelection::All);
        }
        s.strip_prefix("random:")
            .and_then(|k| k.parse().ok())
            .map(PairSelection::Random)
            .ok_or_else(|| format!("invalid pair selection {s:?} (expected all or random:K)"))
    }
}

impl fmt::Display for PairSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairSelection::All => f.write_str("all"),
            PairSelection::Random(k) => write!(f, "random:{k}"),
        }
    }
}

fn pair_at(mut index: usize, n: usize) -> (usize, usize) {
    for i in 0..n {
        let row = n - 1 - i;
        if index < row {
            return (i, i + 1 + index);
        }
        index -= row;
    }
    unreachable!("pair index out of range")
}

/// Unordered pairs `i < j` selected from a network of `n` nodes, in ascending order.
pub fn select_pairs(n: usize, selection: PairSelection, seed: u64) -> Vec<(usize, usize)> {
    let total = n * n.saturating_sub(1) / 2;
    match selection {
        PairSelection::All => (0..total).map(|k| pair_at(k, n)).collect(),
        PairSelection::Random(k) => {
            let mut rng = seeded_rng(sub_seed(seed, u64::MAX));
            let mut picked = index::sample(&mut rng, total, k.min(total)).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|k| pair_at(k, n)).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: u64,
    pub max: u64,
    pub mean: f64,
}

impl Summary {
    fn of(values: impl Iterator<Item = u64> + Clone) -> Self {
        let count = values.clone().count().max(1) as f64;
        Self {
            min: values.clone().min().unwrap_or(0),
            max: values.clone().max().unwrap_or(0),
            mean: values.map(|v| v as f64).sum::<f64>() / count,
        }
    }
}

/// Network-wide agreement check with aggregated meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub scheme: SchemeKind,
    pub q: u64,
    pub lambda: usize,
    pub m: usize,
    pub n: usize,
    pub pairs_tested: usize,
    pub all_keys_match: bool,
    pub mults_per_key: Summary,
    pub comm_elements_per_handshake: u64,
    pub comm_bits_per_handshake: Summary,
    pub header_bits: u64,
    pub memory_bits_per_node: u64,
    pub model_memory_bits_per_node: u64,
}

/// Runs both directions for each selected pair, in parallel.
///
/// Every session owns its meter, so the report does not depend on scheduling.
pub fn run_all_pairs(dep: &Deployment, selection: PairSelection) -> Result<AgreementReport, ProtocolError> {
    let params = &dep.params;
    let pairs = select_pairs(params.n(), selection, params.seed());
    let outcomes = pairs
        .par_iter()
        .map(|&(i, j)| agree_pair(dep, i, j))
        .collect::<Result<Vec<_>, _>>()?;
    let meters = outcomes.iter().flat_map(|o| [o.meter_i, o.meter_j]);
    let base = ResourceMeter::new(params, 0);
    Ok(AgreementReport {
        scheme: params.kind(),
        q: params.modulus().value(),
        lambda: params.lambda(),
        m: params.m(),
        n: params.n(),
        pairs_tested: outcomes.len(),
        all_keys_match: true,
        mults_per_key: Summary::of(meters.clone().map(|m| m.mults)),
        comm_elements_per_handshake: base.comm_elements,
        comm_bits_per_handshake: Summary::of(meters.map(|m| m.comm_bits)),
        header_bits: base.header_bits,
        memory_bits_per_node: base.memory_bits,
        model_memory_bits_per_node: base.model_memory_bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{setup, ParamSpec};

    fn params(kind: SchemeKind, q: u64, lambda: usize, n: usize) -> SchemeParams {
        ParamSpec::new(kind, q, lambda, n, 42).validate().unwrap()
    }

    #[test]
    fn sparse_layout_is_bit_exact() {
        let p = params(SchemeKind::OrDdhv, 65537, 8, 16);
        let f = p.modulus();
        let share = NodeShare { node_id: 7, private_row: vec![f.zero(); 8], public_payload: vec![f.elem(1), f.elem(2)] };
        let bytes = encode_message(&share, &p);
        assert_eq!(bytes, [0x01, 0x02, 7, 0, 0, 0, 2, 0, 0x01, 0x00, 0x00, 0x02, 0x00, 0x00]);
        assert_eq!(decode_message(&bytes, &p), Ok((7, vec![f.elem(1), f.elem(2)])));
    }

    #[test]
    fn element_counts_per_scheme() {
        for (kind, count) in [(SchemeKind::OrDdhv, 2u8), (SchemeKind::DdhvVandermonde, 1), (SchemeKind::BlomDense, 5)] {
            let p = params(kind, 65537, 4, 8);
            let dep = setup(&p);
            let bytes = encode_message(&dep.shares[3], &p);
            assert_eq!(bytes[6], count);
            assert_eq!(bytes.len(), HEADER_LEN + count as usize * 3);
        }
    }

    #[test]
    fn decode_errors() {
        let p = params(SchemeKind::OrDdhv, 251, 4, 8);
        let dep = setup(&p);
        let good = encode_message(&dep.shares[2], &p);

        assert!(matches!(decode_message(&good[..5], &p), Err(WireError::TruncatedMessage { .. })));
        assert!(matches!(decode_message(&good[..good.len() - 1], &p), Err(WireError::TruncatedMessage { .. })));

        let mut bad = good.clone();
        bad[0] = 2;
        assert_eq!(decode_message(&bad, &p), Err(WireError::BadVersion(2)));

        let mut bad = good.clone();
        bad[1] = 0;
        assert!(matches!(decode_message(&bad, &p), Err(WireError::SchemeMismatch { found: 0, .. })));

        let mut bad = good.clone();
        bad[HEADER_LEN] = 251;
        assert_eq!(decode_message(&bad, &p), Err(WireError::ElementOutOfRange { index: 0, value: 251, q: 251 }));

        let mut bad = good.clone();
        bad[2] = 8;
        assert_eq!(decode_message(&bad, &p), Err(WireError::UnknownNode { id: 8, n: 8 }));

        let mut bad = good;
        bad.push(0);
        assert_eq!(decode_message(&bad, &p), Err(WireError::TrailingBytes { extra: 1 }));
    }

    #[test]
    fn handshake_meters() {
        let p = params(SchemeKind::DdhvVandermonde, 65537, 8, 16);
        let dep = setup(&p);
        let (_, meter) = handshake(&dep.shares[0], &encode_message(&dep.shares[1], &p), &p).unwrap();
        assert_eq!(meter.mults, 16);
        assert_eq!((meter.comm_elements, meter.comm_bits), (1, 17));
        assert_eq!(meter.header_bits, 64);
        assert_eq!((meter.memory_bits, meter.model_memory_bits), (9 * 17, 8 * 17));
    }

    #[test]
    fn two_node_network() {
        for kind in SchemeKind::ALL {
            let dep = setup(&params(kind, 13, 2, 2));
            let report = run_all_pairs(&dep, PairSelection::All).unwrap();
            assert_eq!(report.pairs_tested, 1);
            assert!(report.all_keys_match);
        }
    }

    #[test]
    fn pair_selection() {
        assert_eq!(select_pairs(4, PairSelection::All, 0), vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let sample = select_pairs(50, PairSelection::Random(30), 7);
        assert_eq!(sample.len(), 30);
        assert_eq!(sample, select_pairs(50, PairSelection::Random(30), 7));
        assert!(sample.windows(2).all(|w| w[0] < w[1]));
        assert!(sample.iter().all(|&(i, j)| i < j && j < 50));
        assert_eq!(select_pairs(4, PairSelection::Random(100), 7).len(), 6);
        assert_eq!("random:12".parse(), Ok(PairSelection::Random(12)));
        assert_eq!("all".parse(), Ok(PairSelection::All));
        assert!("random:x".parse::<PairSelection>().is_err());
    }

    #[test]
    fn report_meters_are_constant() {
        let dep = setup(&params(SchemeKind::OrDdhv, 65537, 16, 32));
        let r = run_all_pairs(&dep, PairSelection::Random(100)).unwrap();
        assert_eq!(r.pairs_tested, 100);
        assert_eq!((r.mults_per_key.min, r.mults_per_key.max), (2, 2));
        assert_eq!(r.mults_per_key.mean, 2.0);
        assert_eq!(r.comm_bits_per_handshake.min, 34);
        assert_eq!(r.memory_bits_per_node, 16 * 17);
    }
}
