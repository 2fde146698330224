//! Matrix-based pairwise key pre-distribution for sensor networks.
//!
//! Three schemes share one structure (a symmetric secret `D` and a public
//! matrix `G`, with pairwise keys read off the symmetric `Gᵀ D G`) and differ
//! in how `G` is built:
//!
//! * [`SchemeKind::BlomDense`]: random dense `G`; a node publishes `λ+1` elements.
//! * [`SchemeKind::DdhvVandermonde`]: Vandermonde `G`; one element per node,
//!   `2λ` multiplications per key.
//! * [`SchemeKind::OrDdhv`]: sparse `G` with two nonzeros per column; two
//!   elements per node, two multiplications per key, `N ≤ 2λ`.
//!
//! ```
//! use matrixkpd::{setup, ParamSpec, SchemeKind};
//!
//! let params = ParamSpec::new(SchemeKind::OrDdhv, 65537, 8, 16, 42).validate()?;
//! let dep = setup(&params);
//! assert_eq!(dep.key(3, 11)?, dep.key(11, 3)?);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! See the crate's `examples/` directory for one runnable program per
//! capability: deployment, handshakes and metering, the cost comparison, and
//! the compromise attack.

pub mod attack;
pub mod cli;
pub mod galois;
pub mod protocol;
pub mod rng;
pub mod schemes;

pub use galois::{FieldElement, Matrix, Modulus, MulCounter};
pub use schemes::{
    derive_key, oracle_key_matrix, reconstruct_column, setup, Deployment, MasterSecret, NodeShare, PairwiseKey,
    ParamSpec, PublicMatrix, SchemeError, SchemeKind, SchemeParams,
};
