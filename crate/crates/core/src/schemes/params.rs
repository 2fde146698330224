use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::galois::{FieldElement, FieldError, Modulus};

/// Which public-matrix construction a deployment uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemeKind {
    /// Blom's original scheme: a fully random `(λ+1) × N` public matrix.
    #[serde(rename = "blom")]
    BlomDense,
    /// Vandermonde public matrix; a column compresses to one element.
    #[serde(rename = "ddhv")]
    DdhvVandermonde,
    /// Sparse public matrix with two nonzero entries per column.
    #[serde(rename = "or-ddhv")]
    OrDdhv,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [SchemeKind::BlomDense, SchemeKind::DdhvVandermonde, SchemeKind::OrDdhv];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::BlomDense => "blom",
            SchemeKind::DdhvVandermonde => "ddhv",
            SchemeKind::OrDdhv => "or-ddhv",
        }
    }

    pub fn wire_id(self) -> u8 {
        match self {
            SchemeKind::BlomDense => 0x00,
            SchemeKind::DdhvVandermonde => 0x01,
            SchemeKind::OrDdhv => 0x02,
        }
    }

    pub fn from_wire_id(id: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.wire_id() == id)
    }

    /// Order of the secret matrix `D`: `λ+1` for the Blom family, `λ` for the sparse variant.
    pub fn matrix_order(self, lambda: usize) -> usize {
        match self {
            SchemeKind::BlomDense | SchemeKind::DdhvVandermonde => lambda + 1,
            SchemeKind::OrDdhv => lambda,
        }
    }

    /// Number of field elements a node publishes.
    pub fn payload_len(self, m: usize) -> usize {
        match self {
            SchemeKind::BlomDense => m,
            SchemeKind::DdhvVandermonde => 1,
            SchemeKind::OrDdhv => 2,
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "blom" => Ok(SchemeKind::BlomDense),
            "ddhv" => Ok(SchemeKind::DdhvVandermonde),
            "or-ddhv" => Ok(SchemeKind::OrDdhv),
            other => Err(format!("unknown scheme {other:?} (expected blom, ddhv or or-ddhv)")),
        }
    }
}

/// A broken parameter rule.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamViolation {
    #[error("invalid modulus: {0}")]
    Modulus(FieldError),
    #[error("lambda = {0} is below the minimum of 2")]
    LambdaTooSmall(usize),
    #[error("network size N = {0} is below the minimum of 2")]
    NetworkTooSmall(usize),
    #[error("network size N = {n} exceeds the or-ddhv limit N <= 2*lambda = {limit}")]
    NetworkTooLarge { n: usize, limit: usize },
    #[error("network size N = {0} does not fit a 32-bit node id")]
    NodeIdOverflow(usize),
    #[error("generator s = {s} is not a nonzero residue mod {q}")]
    GeneratorOutOfRange { s: u64, q: u64 },
    #[error("generator s = {s} has multiplicative order {order} < N = {n}")]
    GeneratorOrderTooSmall { s: u64, order: u64, n: usize },
}

impl ParamViolation {
    /// Only the network-size limit may be waived, and it is still reported.
    pub fn is_overridable(&self) -> bool {
        matches!(self, ParamViolation::NetworkTooLarge { .. })
    }
}

/// Every violated rule of a rejected parameter set.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct ParamErrors(pub Vec<ParamViolation>);

/// Unvalidated system parameters, as supplied by a user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub kind: SchemeKind,
    pub q: u64,
    pub lambda: usize,
    pub n: usize,
    /// Vandermonde generator; defaults to the smallest primitive root of `q`.
    pub generator: Option<u64>,
    pub seed: u64,
    /// Accept `N > 2λ` for the sparse scheme. The violation is still reported.
    pub allow_oversize: bool,
}

impl ParamSpec {
    pub fn new(kind: SchemeKind, q: u64, lambda: usize, n: usize, seed: u64) -> Self {
        Self { kind, q, lambda, n, generator: None, seed, allow_oversize: false }
    }

    pub fn with_generator(mut self, s: u64) -> Self {
        self.generator = Some(s);
        self
    }

    pub fn allow_oversize(mut self, allow: bool) -> Self {
        self.allow_oversize = allow;
        self
    }

    /// All violated rules, overridable ones included.
    pub fn check(&self) -> Vec<ParamViolation> {
        let mut out = Vec::new();
        let modulus = match Modulus::new(self.q) {
            Ok(m) => Some(m),
            Err(e) => {
                out.push(ParamViolation::Modulus(e));
                None
            }
        };
        if self.lambda < 2 {
            out.push(ParamViolation::LambdaTooSmall(self.lambda));
        }
        if self.n < 2 {
            out.push(ParamViolation::NetworkTooSmall(self.n));
        }
        if u32::try_from(self.n).is_err() {
            out.push(ParamViolation::NodeIdOverflow(self.n));
        }
        if self.kind == SchemeKind::OrDdhv && self.n > 2 * self.lambda {
            out.push(ParamViolation::NetworkTooLarge { n: self.n, limit: 2 * self.lambda });
        }
        if self.kind == SchemeKind::DdhvVandermonde {
            if let Some(f) = modulus {
                match self.resolve_generator(f) {
                    Err(v) => out.push(v),
                    Ok(s) => {
                        let order = f.order(s).expect("generator is nonzero");
                        if (order as u128) < self.n as u128 {
                            out.push(ParamViolation::GeneratorOrderTooSmall { s: s.value(), order, n: self.n });
                        }
                    }
                }
            }
        }
        out
    }

    fn resolve_generator(&self, f: Modulus) -> Result<FieldElement, ParamViolation> {
        match self.generator {
            None => Ok(f.smallest_primitive_root()),
            Some(s) if s == 0 || s >= f.value() => Err(ParamViolation::GeneratorOutOfRange { s, q: f.value() }),
            Some(s) => Ok(f.elem(s)),
        }
    }

    pub fn validate(&self) -> Result<SchemeParams, ParamErrors> {
        let violations = self.check();
        let (warnings, fatal): (Vec<_>, Vec<_>) =
            violations.into_iter().partition(|v| self.allow_oversize && v.is_overridable());
        if !fatal.is_empty() {
            return Err(ParamErrors(fatal));
        }
        let modulus = Modulus::new(self.q).expect("checked above");
        let generator = match self.kind {
            SchemeKind::DdhvVandermonde => Some(self.resolve_generator(modulus).expect("checked above")),
            _ => None,
        };
        Ok(SchemeParams {
            kind: self.kind,
            modulus,
            lambda: self.lambda,
            m: self.kind.matrix_order(self.lambda),
            n: self.n,
            generator,
            seed: self.seed,
            allow_oversize: self.allow_oversize,
            warnings,
        })
    }
}

/// Validated public system parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeParams {
    kind: SchemeKind,
    modulus: Modulus,
    lambda: usize,
    m: usize,
    n: usize,
    generator: Option<FieldElement>,
    seed: u64,
    allow_oversize: bool,
    warnings: Vec<ParamViolation>,
}

impl SchemeParams {
    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    /// Order of the secret matrix and length of every private row.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The Vandermonde generator `s`; `None` for the other schemes.
    pub fn generator(&self) -> Option<FieldElement> {
        self.generator
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn payload_len(&self) -> usize {
        self.kind.payload_len(self.m)
    }

    /// Violations accepted through an explicit override.
    pub fn warnings(&self) -> &[ParamViolation] {
        &self.warnings
    }

    /// The same parameters with a different seed.
    pub fn reseeded(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn to_spec(&self) -> ParamSpec {
        ParamSpec {
            kind: self.kind,
            q: self.modulus.value(),
            lambda: self.lambda,
            n: self.n,
            generator: self.generator.map(FieldElement::value),
            seed: self.seed,
            allow_oversize: self.allow_oversize,
        }
    }
}
