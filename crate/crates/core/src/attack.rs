//! Node-compromise adversary.
//!
//! Every captured private row gives `m` linear equations
//! `a_ij = Σ_k g_ki · d_kj` in the unknown entries of `D`, with the public
//! column of the captured node as coefficients. Enough independent equations
//! pin `D` down and with it every pairwise key in the network; fewer leave a
//! nullspace along which uncompromised keys can move.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::galois::{gauss_solve, FieldElement, FieldError, Matrix, MulCounter, Solution};
use crate::rng::{seeded_rng, sub_seed};
use crate::schemes::{
    bilinear, reconstruct_column, setup, supports_collide, Deployment, PairwiseKey, PublicMatrix, SchemeError,
    SchemeKind, SchemeParams,
};

/// Number of coefficient vectors tried when looking for an ambiguity witness.
pub const WITNESS_SCAN_BUDGET: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttackError {
    #[error("no compromised nodes in the transcript")]
    EmptyTranscript,
    #[error("node {0} appears more than once in the compromise set")]
    DuplicateNode(usize),
    #[error("transcript is inconsistent: no symmetric secret reproduces the captured rows")]
    InconsistentTranscript,
    #[error("the transcript already determines the secret; no ambiguity to exhibit")]
    FullRank,
    #[error("invalid experiment: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// What the adversary extracted from one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapturedNode {
    pub node_id: usize,
    pub private_row: Vec<FieldElement>,
    pub public_payload: Vec<FieldElement>,
}

/// Captured shares plus the public knowledge every adversary has.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompromiseTranscript {
    pub params: SchemeParams,
    pub compromised: Vec<CapturedNode>,
    pub public: PublicMatrix,
}

impl CompromiseTranscript {
    pub fn new(params: SchemeParams, public: PublicMatrix, compromised: Vec<CapturedNode>) -> Result<Self, AttackError> {
        let mut seen = vec![false; params.n()];
        for c in &compromised {
            let slot = seen
                .get_mut(c.node_id)
                .ok_or(SchemeError::UnknownNode { id: c.node_id, n: params.n() })?;
            if std::mem::replace(slot, true) {
                return Err(AttackError::DuplicateNode(c.node_id));
            }
            if c.private_row.len() != params.m() {
                return Err(SchemeError::Inconsistent(format!("captured row of node {} has wrong length", c.node_id)).into());
            }
        }
        Ok(Self { params, compromised, public })
    }

    /// Physically captures the listed nodes of a deployment.
    pub fn capture(dep: &Deployment, ids: &[usize]) -> Result<Self, AttackError> {
        let compromised = ids
            .iter()
            .map(|&id| {
                let s = dep.share(id)?;
                Ok(CapturedNode { node_id: id, private_row: s.private_row.clone(), public_payload: s.public_payload.clone() })
            })
            .collect::<Result<Vec<_>, AttackError>>()?;
        Self::new(dep.params.clone(), dep.public.clone(), compromised)
    }

    pub fn ids(&self) -> Vec<usize> {
        self.compromised.iter().map(|c| c.node_id).collect()
    }

    pub fn is_compromised(&self, id: usize) -> bool {
        self.compromised.iter().any(|c| c.node_id == id)
    }

    fn column(&self, id: usize) -> Vec<FieldElement> {
        self.public.column(id, &self.params)
    }
}

/// Maps entries `d_kl` of the secret to columns of the linear system.
///
/// Folded: `d_kl` and `d_lk` share a column, `m(m+1)/2` unknowns in total,
/// enumerated over the upper triangle row by row. Unfolded: `m²` unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownIndex {
    m: usize,
    folded: bool,
}

impl UnknownIndex {
    pub fn new(m: usize, folded: bool) -> Self {
        Self { m, folded }
    }

    pub fn is_folded(&self) -> bool {
        self.folded
    }

    pub fn count(&self) -> usize {
        if self.folded {
            self.m * (self.m + 1) / 2
        } else {
            self.m * self.m
        }
    }

    pub fn index(&self, k: usize, l: usize) -> usize {
        if self.folded {
            let (a, b) = if k <= l { (k, l) } else { (l, k) };
            // row `a` of the upper triangle starts at a*m - a(a-1)/2
            a * self.m - a * a.saturating_sub(1) / 2 + (b - a)
        } else {
            k * self.m + l
        }
    }

    /// Entry `(k, l)` behind column `idx` (with `k <= l` when folded).
    pub fn entry(&self, idx: usize) -> (usize, usize) {
        if self.folded {
            let mut rest = idx;
            for a in 0..self.m {
                let row = self.m - a;
                if rest < row {
                    return (a, a + rest);
                }
                rest -= row;
            }
            panic!("unknown index {idx} out of range");
        } else {
            (idx / self.m, idx % self.m)
        }
    }

    /// Builds `D` from a solution vector.
    pub fn to_matrix(&self, x: &[FieldElement], params: &SchemeParams) -> Matrix {
        let mut d = Matrix::zeros(self.m, self.m, params.modulus());
        for (idx, &v) in x.iter().enumerate() {
            let (k, l) = self.entry(idx);
            d.set(k, l, v);
            if self.folded {
                d.set(l, k, v);
            }
        }
        d
    }
}

/// The adversary's equations `M x = rhs` over the unknown entries of `D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    pub matrix: Matrix,
    pub rhs: Vec<FieldElement>,
    pub unknowns: UnknownIndex,
}

/// One equation per captured entry `a_ij`, `m` per compromised node.
///
/// Unfolded mode keeps `d_kl` and `d_lk` separate and adds no symmetry
/// constraints.
pub fn assemble_system(t: &CompromiseTranscript, fold_symmetry: bool) -> Result<LinearSystem, AttackError> {
    if t.compromised.is_empty() {
        return Err(AttackError::EmptyTranscript);
    }
    let params = &t.params;
    let f = params.modulus();
    let m = params.m();
    let unknowns = UnknownIndex::new(m, fold_symmetry);
    let mut matrix = Matrix::zeros(m * t.compromised.len(), unknowns.count(), f);
    let mut rhs = Vec::with_capacity(matrix.rows());
    for (c, node) in t.compromised.iter().enumerate() {
        let g = t.column(node.node_id);
        for j in 0..m {
            let row = c * m + j;
            for (k, &gk) in g.iter().enumerate() {
                if gk.is_zero() {
                    continue;
                }
                let col = unknowns.index(k, j);
                let acc = f.add(matrix.get(row, col), gk);
                matrix.set(row, col, acc);
            }
            rhs.push(node.private_row[j]);
        }
    }
    Ok(LinearSystem { matrix, rhs, unknowns })
}

/// Outcome of an attempt to solve for `D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveryResult {
    pub compromised: Vec<usize>,
    pub rank: usize,
    pub unknowns: usize,
    pub equations: usize,
    pub nullspace_dim: usize,
    /// Present only when the system has a unique solution that is symmetric
    /// and regenerates every captured row.
    pub d_candidate: Option<Matrix>,
    pub key_audit: Option<KeyAudit>,
    pub solution: Solution,
    pub index: UnknownIndex,
}

/// Predicted keys compared with the true ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyAudit {
    pub matches_authority: bool,
    pub pairs_checked: usize,
    pub pairs_matching: usize,
}

fn regenerates(t: &CompromiseTranscript, d: &Matrix) -> bool {
    t.compromised.iter().all(|c| d.left_mul_vec(&t.column(c.node_id)) == c.private_row)
}

pub fn recover(t: &CompromiseTranscript, fold_symmetry: bool) -> Result<RecoveryResult, AttackError> {
    let system = assemble_system(t, fold_symmetry)?;
    let solution = gauss_solve(&system.matrix, &system.rhs)?;
    let Some(x) = &solution.particular else {
        return Err(AttackError::InconsistentTranscript);
    };
    let d_candidate = if solution.nullspace.is_empty() {
        let d = system.unknowns.to_matrix(x, &t.params);
        if !d.is_symmetric() {
            return Err(AttackError::InconsistentTranscript);
        }
        assert!(regenerates(t, &d), "a solution of the system reproduces the captured rows");
        Some(d)
    } else {
        None
    };
    Ok(RecoveryResult {
        compromised: t.ids(),
        rank: solution.rank,
        unknowns: system.unknowns.count(),
        equations: system.matrix.rows(),
        nullspace_dim: solution.nullspace_dim(),
        d_candidate,
        key_audit: None,
        solution,
        index: system.unknowns,
    })
}

impl RecoveryResult {
    pub fn recovered(&self) -> bool {
        self.d_candidate.is_some()
    }

    /// Compares the candidate with the authority's secret and predicts every
    /// key between uncompromised nodes against the true key.
    pub fn audit_against(&mut self, dep: &Deployment) -> Result<KeyAudit, AttackError> {
        let audit = match &self.d_candidate {
            None => KeyAudit { matches_authority: false, pairs_checked: 0, pairs_matching: 0 },
            Some(d) => {
                let free: Vec<_> = (0..dep.params.n()).filter(|id| !self.compromised.contains(id)).collect();
                let mut checked = 0;
                let mut matching = 0;
                for (a, &i) in free.iter().enumerate() {
                    for &j in &free[a + 1..] {
                        let (si, sj) = (dep.share(i)?, dep.share(j)?);
                        let predicted = predict_key(d, &si.public_payload, i, &sj.public_payload, j, &dep.params)?;
                        checked += 1;
                        matching += usize::from(predicted == dep.key(i, j)?);
                    }
                }
                KeyAudit { matches_authority: d == dep.secret.matrix(), pairs_checked: checked, pairs_matching: matching }
            }
        };
        self.key_audit = Some(audit);
        Ok(audit)
    }

    pub fn report(&self, params: &SchemeParams) -> RecoveryReport {
        let audit = self.key_audit;
        RecoveryReport {
            scheme: params.kind(),
            q: params.modulus().value(),
            lambda: params.lambda(),
            n: params.n(),
            compromised: self.compromised.clone(),
            rank: self.rank,
            unknowns: self.unknowns,
            equations: self.equations,
            nullspace_dim: self.nullspace_dim,
            recovered: self.recovered(),
            matches_authority: audit.map(|a| a.matches_authority),
            pairs_checked: audit.map(|a| a.pairs_checked),
            pairs_matching: audit.map(|a| a.pairs_matching),
        }
    }
}

/// Serializable view of a [`RecoveryResult`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub scheme: SchemeKind,
    pub q: u64,
    pub lambda: usize,
    pub n: usize,
    pub compromised: Vec<usize>,
    pub rank: usize,
    pub unknowns: usize,
    pub equations: usize,
    pub nullspace_dim: usize,
    pub recovered: bool,
    pub matches_authority: Option<bool>,
    pub pairs_checked: Option<usize>,
    pub pairs_matching: Option<usize>,
}

/// `G_c(i)ᵀ · D · G_c(j)` from public payloads and a candidate secret.
pub fn predict_key(
    d: &Matrix,
    payload_i: &[FieldElement],
    id_i: usize,
    payload_j: &[FieldElement],
    id_j: usize,
    params: &SchemeParams,
) -> Result<PairwiseKey, AttackError> {
    let m = params.m();
    if d.rows() != m || d.cols() != m {
        return Err(FieldError::DimensionMismatch { expected: (m, m), found: (d.rows(), d.cols()) }.into());
    }
    let mut scratch = MulCounter::new();
    let gi = reconstruct_column(params, id_i, payload_i, &mut scratch)?;
    let gj = reconstruct_column(params, id_j, payload_j, &mut scratch)?;
    Ok(PairwiseKey(bilinear(params, d, &gi, &gj)))
}

/// Two secrets, both consistent with the transcript, that disagree on a key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbiguityWitness {
    pub pair: (usize, usize),
    pub d1: Matrix,
    pub d2: Matrix,
    pub key1: PairwiseKey,
    pub key2: PairwiseKey,
    /// Coefficient vectors tried before the witness turned up.
    pub candidates_tried: u64,
}

/// Searches the solution space of an under-determined transcript for two
/// symmetric secrets whose keys for `pair` differ.
///
/// The scan walks every coefficient vector over the nullspace basis when
/// there are at most [`WITNESS_SCAN_BUDGET`] of them and otherwise draws that
/// many at random from `seed`. `Ok(None)` means no witness within budget,
/// which is certain when either endpoint is compromised: its captured row
/// already fixes the key.
pub fn ambiguity_witness(
    t: &CompromiseTranscript,
    pair: (usize, usize),
    seed: u64,
) -> Result<Option<AmbiguityWitness>, AttackError> {
    let rec = recover(t, true)?;
    if rec.nullspace_dim == 0 {
        return Err(AttackError::FullRank);
    }
    let (i, j) = pair;
    for id in [i, j] {
        if id >= t.params.n() {
            return Err(SchemeError::UnknownNode { id, n: t.params.n() }.into());
        }
    }
    if t.is_compromised(i) || t.is_compromised(j) {
        return Ok(None);
    }

    let f = t.params.modulus();
    let (gi, gj) = (t.column(i), t.column(j));
    let base = rec.solution.particular.as_ref().expect("recover returned a consistent system");
    let basis = &rec.solution.nullspace;
    let d1 = rec.index.to_matrix(base, &t.params);
    let key1 = bilinear(&t.params, &d1, &gi, &gj);

    let candidate = |coeffs: &[FieldElement]| -> Matrix {
        let mut x = base.clone();
        for (c, v) in coeffs.iter().zip(basis) {
            if c.is_zero() {
                continue;
            }
            for (xi, &vi) in x.iter_mut().zip(v) {
                *xi = f.add(*xi, f.mul(*c, vi));
            }
        }
        rec.index.to_matrix(&x, &t.params)
    };

    let dim = basis.len();
    let q = f.value();
    let exhaustive = u32::try_from(dim)
        .ok()
        .and_then(|d| u128::from(q).checked_pow(d))
        .is_some_and(|total| total <= u128::from(WITNESS_SCAN_BUDGET));
    let mut rng = seeded_rng(seed);
    let mut coeffs = vec![f.zero(); dim];
    let mut tried = 0u64;
    loop {
        if exhaustive {
            // odometer over all q^dim vectors, skipping the zero vector
            let Some(pos) = (0..dim).find(|&p| coeffs[p].value() + 1 < q) else {
                break;
            };
            coeffs[pos] = f.elem(coeffs[pos].value() + 1);
            coeffs[..pos].fill(f.zero());
        } else {
            if tried >= WITNESS_SCAN_BUDGET {
                break;
            }
            for c in &mut coeffs {
                *c = f.sample(&mut rng, false);
            }
        }
        tried += 1;
        let d2 = candidate(&coeffs);
        let key2 = bilinear(&t.params, &d2, &gi, &gj);
        if key2 != key1 {
            debug_assert!(d2.is_symmetric() && regenerates(t, &d2));
            return Ok(Some(AmbiguityWitness {
                pair,
                d1,
                d2,
                key1: PairwiseKey(key1),
                key2: PairwiseKey(key2),
                candidates_tried: tried,
            }));
        }
    }
    Ok(None)
}

/// Checks that a witness is genuine against its transcript.
pub fn verify_witness(t: &CompromiseTranscript, w: &AmbiguityWitness) -> bool {
    let (i, j) = w.pair;
    let (gi, gj) = (t.column(i), t.column(j));
    w.d1.is_symmetric()
        && w.d2.is_symmetric()
        && regenerates(t, &w.d1)
        && regenerates(t, &w.d2)
        && w.key1 != w.key2
        && PairwiseKey(bilinear(&t.params, &w.d1, &gi, &gj)) == w.key1
        && PairwiseKey(bilinear(&t.params, &w.d2, &gi, &gj)) == w.key2
}

/// Aggregate outcome of repeated random compromises.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityStats {
    pub scheme: SchemeKind,
    pub q: u64,
    pub lambda: usize,
    pub n: usize,
    pub c: usize,
    pub trials: usize,
    pub unknowns: usize,
    /// rank -> number of trials
    pub rank_histogram: BTreeMap<usize, usize>,
    pub full_recovery_fraction: f64,
    /// Mean over trials of the share of compromised pairs whose sparse
    /// columns have the same support. Always 0 for the dense schemes.
    pub colliding_support_fraction: f64,
}

struct TrialOutcome {
    rank: usize,
    recovered: bool,
    colliding: f64,
}

fn run_trial(params: &SchemeParams, c: usize, trial: u64) -> Result<TrialOutcome, AttackError> {
    let trial_seed = sub_seed(params.seed(), trial);
    let dep = setup(&params.reseeded(trial_seed));
    let mut rng = seeded_rng(sub_seed(trial_seed, 0));
    let mut ids = index::sample(&mut rng, params.n(), c).into_vec();
    ids.sort_unstable();

    let pairs = c * c.saturating_sub(1) / 2;
    let colliding = if params.kind() == SchemeKind::OrDdhv && pairs > 0 {
        let hits = ids
            .iter()
            .enumerate()
            .flat_map(|(a, &x)| ids[a + 1..].iter().map(move |&y| (x, y)))
            .filter(|&(x, y)| supports_collide(x, y, params.lambda()))
            .count();
        hits as f64 / pairs as f64
    } else {
        0.0
    };

    if ids.is_empty() {
        return Ok(TrialOutcome { rank: 0, recovered: false, colliding });
    }
    let t = CompromiseTranscript::capture(&dep, &ids)?;
    let rec = recover(&t, true)?;
    let recovered = rec.d_candidate.as_ref() == Some(dep.secret.matrix());
    Ok(TrialOutcome { rank: rec.rank, recovered, colliding })
}

/// Compromises `c` uniformly chosen nodes in each of `trials` independent
/// deployments and records how much of `D` the adversary can solve for.
///
/// Trial `t` uses the sub-seed derived from the parameter seed and `t`, so
/// the statistics do not depend on how trials are scheduled.
pub fn security_experiment(params: &SchemeParams, c: usize, trials: usize) -> Result<SecurityStats, AttackError> {
    if c > params.n() {
        return Err(AttackError::InvalidParams(format!("cannot compromise {c} of {} nodes", params.n())));
    }
    if trials == 0 {
        return Err(AttackError::InvalidParams("at least one trial is required".into()));
    }
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|t| run_trial(params, c, t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rank_histogram = BTreeMap::new();
    for o in &outcomes {
        *rank_histogram.entry(o.rank).or_insert(0) += 1;
    }
    let n = outcomes.len() as f64;
    Ok(SecurityStats {
        scheme: params.kind(),
        q: params.modulus().value(),
        lambda: params.lambda(),
        n: params.n(),
        c,
        trials,
        unknowns: UnknownIndex::new(params.m(), true).count(),
        rank_histogram,
        full_recovery_fraction: outcomes.iter().filter(|o| o.recovered).count() as f64 / n,
        colliding_support_fraction: outcomes.iter().map(|o| o.colliding).sum::<f64>() / n,
    })
}

/// Draws `c` distinct node ids; exposed for examples that pick compromise sets.
pub fn random_compromise_set<R: RngCore>(rng: &mut R, n: usize, c: usize) -> Vec<usize> {
    let mut ids = index::sample(rng, n, c).into_vec();
    ids.sort_unstable();
    ids
}
