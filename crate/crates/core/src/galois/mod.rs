//! Arithmetic in the prime field `Z_q` and dense linear algebra over it.

mod field;
mod matrix;
mod solve;

pub use field::{is_prime, prime_factors, FieldElement, Modulus, MulCounter, MODULUS_LIMIT};
pub use matrix::{dot, Matrix};
pub use solve::{gauss_solve, rank, Solution};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is not below 2^31")]
    ModulusTooLarge(u64),
    #[error("value {value} is not a residue mod {q}")]
    OutOfRange { value: u64, q: u64 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch { expected: (usize, usize), found: (usize, usize) },
    #[error("operands live in different fields (q = {0} and q = {1})")]
    ModulusMismatch(u64, u64),
}
