//! JSON documents for node shares and the authority's secret.

use serde::{Deserialize, Serialize};

use super::{MasterSecret, NodeShare, ParamSpec, SchemeError, SchemeKind, SchemeParams};
use crate::galois::{FieldElement, Matrix};

pub const FILE_VERSION: u32 = 1;

/// One node's share as written to disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareFile {
    pub version: u32,
    pub scheme: SchemeKind,
    pub q: u64,
    pub lambda: usize,
    pub m: usize,
    pub n: usize,
    pub node_id: usize,
    pub private_row: Vec<FieldElement>,
    pub public_payload: Vec<FieldElement>,
}

/// The authority's record: public parameters plus `D` and the seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorityFile {
    pub version: u32,
    pub scheme: SchemeKind,
    pub q: u64,
    pub lambda: usize,
    pub m: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<FieldElement>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_oversize: bool,
    pub seed: u64,
    /// `D`, row-major.
    pub d: Vec<FieldElement>,
}

fn mismatch(what: &str) -> SchemeError {
    SchemeError::Inconsistent(format!("share file disagrees with the deployment on {what}"))
}

impl ShareFile {
    pub fn new(share: &NodeShare, params: &SchemeParams) -> Self {
        Self {
            version: FILE_VERSION,
            scheme: params.kind(),
            q: params.modulus().value(),
            lambda: params.lambda(),
            m: params.m(),
            n: params.n(),
            node_id: share.node_id,
            private_row: share.private_row.clone(),
            public_payload: share.public_payload.clone(),
        }
    }

    /// Checks the header against `params` and every element's range.
    pub fn into_share(self, params: &SchemeParams) -> Result<NodeShare, SchemeError> {
        if self.version != FILE_VERSION {
            return Err(mismatch("version"));
        }
        if self.scheme != params.kind() {
            return Err(mismatch("scheme"));
        }
        if (self.q, self.lambda, self.m, self.n) != (params.modulus().value(), params.lambda(), params.m(), params.n()) {
            return Err(mismatch("q, lambda, m or n"));
        }
        if self.node_id >= params.n() {
            return Err(SchemeError::UnknownNode { id: self.node_id, n: params.n() });
        }
        if self.private_row.len() != params.m() {
            return Err(mismatch("private row length"));
        }
        if self.public_payload.len() != params.payload_len() {
            return Err(SchemeError::PayloadLengthMismatch {
                expected: params.payload_len(),
                found: self.public_payload.len(),
            });
        }
        let f = params.modulus();
        for v in self.private_row.iter().chain(&self.public_payload) {
            f.checked_elem(v.value())?;
        }
        Ok(NodeShare { node_id: self.node_id, private_row: self.private_row, public_payload: self.public_payload })
    }
}

impl AuthorityFile {
    pub fn new(params: &SchemeParams, secret: &MasterSecret) -> Self {
        Self {
            version: FILE_VERSION,
            scheme: params.kind(),
            q: params.modulus().value(),
            lambda: params.lambda(),
            m: params.m(),
            n: params.n(),
            s: params.generator(),
            allow_oversize: params.to_spec().allow_oversize,
            seed: params.seed(),
            d: secret.matrix().entries().to_vec(),
        }
    }

    pub fn params(&self) -> Result<SchemeParams, SchemeError> {
        if self.version != FILE_VERSION {
            return Err(SchemeError::Inconsistent(format!("unsupported authority file version {}", self.version)));
        }
        let spec = ParamSpec {
            kind: self.scheme,
            q: self.q,
            lambda: self.lambda,
            n: self.n,
            generator: self.s.map(FieldElement::value),
            seed: self.seed,
            allow_oversize: self.allow_oversize,
        };
        let params = spec.validate()?;
        if params.m() != self.m {
            return Err(SchemeError::Inconsistent(format!("m = {} but the scheme implies {}", self.m, params.m())));
        }
        Ok(params)
    }

    pub fn secret(&self, params: &SchemeParams) -> Result<MasterSecret, SchemeError> {
        MasterSecret::new(Matrix::from_entries(params.m(), params.m(), self.d.clone(), params.modulus())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::setup;

    #[test]
    fn share_json_layout() {
        let params = ParamSpec::new(SchemeKind::OrDdhv, 13, 2, 4, 5).validate().unwrap();
        let dep = setup(&params);
        let json = serde_json::to_value(ShareFile::new(&dep.shares[1], &params)).unwrap();
        assert_eq!(json["version"], 1);
        assert_eq!(json["scheme"], "or-ddhv");
        assert_eq!(json["q"], 13);
        assert_eq!(json["lambda"], 2);
        assert_eq!(json["m"], 2);
        assert_eq!(json["n"], 4);
        assert_eq!(json["node_id"], 1);
        assert!(json["private_row"].as_array().unwrap().iter().all(|v| v.is_string()));
        assert_eq!(json["public_payload"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn share_and_authority_roundtrip() {
        let params = ParamSpec::new(SchemeKind::DdhvVandermonde, 65537, 3, 5, 5).validate().unwrap();
        let dep = setup(&params);
        let text = serde_json::to_string(&AuthorityFile::new(&params, &dep.secret)).unwrap();
        let auth: AuthorityFile = serde_json::from_str(&text).unwrap();
        let p2 = auth.params().unwrap();
        assert_eq!(p2, params);
        assert_eq!(auth.secret(&p2).unwrap(), dep.secret);
        for share in &dep.shares {
            let text = serde_json::to_string(&ShareFile::new(share, &params)).unwrap();
            let back: ShareFile = serde_json::from_str(&text).unwrap();
            assert_eq!(&back.into_share(&params).unwrap(), share);
        }
    }

    #[test]
    fn share_file_checks() {
        let params = ParamSpec::new(SchemeKind::OrDdhv, 13, 2, 4, 5).validate().unwrap();
        let dep = setup(&params);
        let good = ShareFile::new(&dep.shares[0], &params);

        let mut bad = good.clone();
        bad.scheme = SchemeKind::BlomDense;
        assert!(bad.into_share(&params).is_err());

        let mut bad = good.clone();
        bad.private_row[0] = "13".parse().unwrap();
        assert!(bad.into_share(&params).is_err());

        let mut bad = good.clone();
        bad.public_payload.pop();
        assert!(matches!(bad.into_share(&params), Err(SchemeError::PayloadLengthMismatch { .. })));

        let mut bad = good;
        bad.node_id = 4;
        assert!(matches!(bad.into_share(&params), Err(SchemeError::UnknownNode { .. })));
    }
}
