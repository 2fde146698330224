//! Command-line front end.
//!
//! The binary is a thin wrapper around [`run`]; every subcommand returns its
//! rendered report so it can be tested without spawning a process.
//!
//! Exit codes: 0 ok, 2 invalid parameters, 3 I/O failure, 4 internal
//! invariant breach (such as two nodes deriving different keys).

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attack::{recover, security_experiment, CompromiseTranscript, RecoveryReport, SecurityStats};
use crate::protocol::{encode_message, handshake, run_all_pairs, AgreementReport, PairSelection, ResourceMeter};
use crate::schemes::{
    setup, AuthorityFile, Deployment, ParamSpec, SchemeError, SchemeKind, SchemeParams, ShareFile,
};

pub const AUTHORITY_FILE: &str = "authority.json";

pub fn share_file_name(id: usize) -> String {
    format!("share-{id:05}.json")
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid parameters:\n{0}")]
    Params(String),
    #[error("i/o failure: {0}")]
    Io(String),
    #[error("internal invariant breached: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Params(_) => 2,
            CliError::Io(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }
}

impl From<SchemeError> for CliError {
    fn from(e: SchemeError) -> Self {
        match e {
            SchemeError::InvalidParams(v) => {
                CliError::Params(v.0.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n"))
            }
            other => CliError::Params(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Which nodes an attack compromises.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompromiseSpec {
    /// `K` uniformly random nodes per trial.
    Count(usize),
    /// An explicit id list (`3,7,9`; a single id is written `3,`).
    Ids(Vec<usize>),
}

impl FromStr for CompromiseSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("invalid compromise spec {s:?} (expected K or id0,id1,...)");
        if s.contains(',') {
            s.split(',')
                .filter(|p| !p.trim().is_empty())
                .map(|p| p.trim().parse().map_err(|_| bad()))
                .collect::<Result<Vec<_>, _>>()
                .map(CompromiseSpec::Ids)
        } else {
            s.trim().parse().map(CompromiseSpec::Count).map_err(|_| bad())
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "matrixkpd", version, about = "Matrix-based pairwise key pre-distribution toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub cfg: RunConfig,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Generate a deployment: one authority file and one share file per node.
    Setup,
    /// Run the exchange between two nodes of a stored deployment.
    Handshake { i: usize, j: usize },
    /// Compare the resource cost of all three schemes at the same parameters.
    Bench,
    /// Compromise nodes and try to solve for the secret matrix.
    Attack,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    #[arg(long, global = true, default_value = "or-ddhv", value_parser = SchemeKind::from_str)]
    pub scheme: SchemeKind,
    #[arg(long, global = true, default_value_t = 65537)]
    pub q: u64,
    #[arg(long, global = true, default_value_t = 64)]
    pub lambda: usize,
    #[arg(long, global = true, default_value_t = 128)]
    pub n: usize,
    /// Vandermonde generator (ddhv only); defaults to the smallest primitive root of q.
    #[arg(long, global = true)]
    pub s: Option<u64>,
    #[arg(long, global = true, env = "MATRIXKPD_SEED", default_value_t = 42)]
    pub seed: u64,
    /// `all` or `random:K`.
    #[arg(long, global = true, default_value = "all", value_parser = PairSelection::from_str)]
    pub pairs: PairSelection,
    /// `K` random nodes per trial, or an explicit list `id0,id1,...`.
    #[arg(long, global = true, value_parser = CompromiseSpec::from_str)]
    pub compromise: Option<CompromiseSpec>,
    #[arg(long, global = true, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Output directory for `setup`; report file for the other subcommands (stdout if absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Directory holding a stored deployment (read by `handshake` and `attack`).
    #[arg(long, global = true, default_value = "deployment")]
    pub deployment: PathBuf,
    /// Accept N > 2*lambda for or-ddhv; the violation is still reported.
    #[arg(long, global = true)]
    pub allow_oversize: bool,
}

impl RunConfig {
    pub fn spec(&self) -> ParamSpec {
        ParamSpec {
            kind: self.scheme,
            q: self.q,
            lambda: self.lambda,
            n: self.n,
            generator: self.s,
            seed: self.seed,
            allow_oversize: self.allow_oversize,
        }
    }
}

/// A report that renders as JSON or as CSV with a header row.
pub trait Report {
    type Row: Serialize;

    fn rows(&self) -> Vec<Self::Row>;

    fn to_json(&self) -> String
    where
        Self: Serialize,
    {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in self.rows() {
            w.serialize(row).expect("rows serialize");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
    }

    fn render(&self, format: OutputFormat) -> String
    where
        Self: Serialize,
    {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetupSummary {
    pub scheme: SchemeKind,
    pub q: u64,
    pub lambda: usize,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub directory: String,
    pub files_written: usize,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
pub struct SetupRow {
    scheme: SchemeKind,
    q: u64,
    lambda: usize,
    m: usize,
    n: usize,
    seed: u64,
    directory: String,
    files_written: usize,
    warnings: String,
}

impl Report for SetupSummary {
    type Row = SetupRow;

    fn rows(&self) -> Vec<SetupRow> {
        vec![SetupRow {
            scheme: self.scheme,
            q: self.q,
            lambda: self.lambda,
            m: self.m,
            n: self.n,
            seed: self.seed,
            directory: self.directory.clone(),
            files_written: self.files_written,
            warnings: self.warnings.join("; "),
        }]
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("documents serialize") + "\n";
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(path, e))
}

/// Offline phase to disk.
pub fn cmd_setup(cfg: &RunConfig) -> Result<SetupSummary, CliError> {
    let params = cfg.spec().validate().map_err(SchemeError::from)?;
    let dep = setup(&params);
    let dir = cfg.out.clone().unwrap_or_else(|| cfg.deployment.clone());
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    write_json(&dir.join(AUTHORITY_FILE), &AuthorityFile::new(&params, &dep.secret))?;
    for share in &dep.shares {
        write_json(&dir.join(share_file_name(share.node_id)), &ShareFile::new(share, &params))?;
    }
    Ok(SetupSummary {
        scheme: params.kind(),
        q: params.modulus().value(),
        lambda: params.lambda(),
        m: params.m(),
        n: params.n(),
        seed: params.seed(),
        directory: dir.display().to_string(),
        files_written: dep.shares.len() + 1,
        warnings: params.warnings().iter().map(ToString::to_string).collect(),
    })
}

/// Public parameters as seen by a node: everything in its share header.
///
/// Shares do not record the Vandermonde generator; none of the node-side
/// computations need it.
pub fn share_params(file: &ShareFile) -> Result<SchemeParams, CliError> {
    let spec = ParamSpec {
        kind: file.scheme,
        q: file.q,
        lambda: file.lambda,
        n: file.n,
        generator: None,
        seed: 0,
        allow_oversize: true,
    };
    let params = spec.validate().map_err(SchemeError::from)?;
    if params.m() != file.m {
        return Err(CliError::Params(format!("share declares m = {} but the scheme implies {}", file.m, params.m())));
    }
    Ok(params)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandshakeReport {
    pub scheme: SchemeKind,
    pub i: usize,
    pub j: usize,
    pub key_ij: u64,
    pub key_ji: u64,
    pub keys_match: bool,
    pub meter_i: ResourceMeter,
    pub meter_j: ResourceMeter,
}

#[derive(Serialize)]
pub struct HandshakeRow {
    scheme: SchemeKind,
    side: usize,
    peer: usize,
    key: u64,
    mults: u64,
    comm_elements: u64,
    comm_bits: u64,
    header_bits: u64,
    memory_bits: u64,
    model_memory_bits: u64,
}

impl Report for HandshakeReport {
    type Row = HandshakeRow;

    fn rows(&self) -> Vec<HandshakeRow> {
        [(self.i, self.j, self.key_ij, self.meter_i), (self.j, self.i, self.key_ji, self.meter_j)]
            .into_iter()
            .map(|(side, peer, key, m)| HandshakeRow {
                scheme: self.scheme,
                side,
                peer,
                key,
                mults: m.mults,
                comm_elements: m.comm_elements,
                comm_bits: m.comm_bits,
                header_bits: m.header_bits,
                memory_bits: m.memory_bits,
                model_memory_bits: m.model_memory_bits,
            })
            .collect()
    }
}

/// Both directions of the online phase between stored nodes `i` and `j`.
pub fn cmd_handshake(cfg: &RunConfig, i: usize, j: usize) -> Result<HandshakeReport, CliError> {
    let file_i: ShareFile = read_json(&cfg.deployment.join(share_file_name(i)))?;
    let file_j: ShareFile = read_json(&cfg.deployment.join(share_file_name(j)))?;
    let params = share_params(&file_i)?;
    let share_i = file_i.into_share(&params)?;
    let share_j = file_j.into_share(&params)?;
    let (k_ij, meter_i) = handshake(&share_i, &encode_message(&share_j, &params), &params)
        .map_err(|e| CliError::Params(e.to_string()))?;
    let (k_ji, meter_j) = handshake(&share_j, &encode_message(&share_i, &params), &params)
        .map_err(|e| CliError::Params(e.to_string()))?;
    let report = HandshakeReport {
        scheme: params.kind(),
        i,
        j,
        key_ij: k_ij.value(),
        key_ji: k_ji.value(),
        keys_match: k_ij == k_ji,
        meter_i,
        meter_j,
    };
    if !report.keys_match {
        return Err(CliError::Invariant(format!("nodes {i} and {j} derived {} and {}", report.key_ij, report.key_ji)));
    }
    Ok(report)
}

/// One scheme's line of the cost comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scheme: SchemeKind,
    pub n: usize,
    pub m: usize,
    pub pairs_tested: usize,
    pub all_keys_match: bool,
    pub comm_elements: u64,
    pub comm_bits: u64,
    pub header_bits: u64,
    pub mults_per_key: u64,
    pub memory_elements: usize,
    pub memory_bits: u64,
    /// The cost model charges `λ` stored elements to every scheme.
    pub model_memory_elements: usize,
    pub model_memory_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTiming {
    pub scheme: SchemeKind,
    pub wall_ns_per_key: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub q: u64,
    pub lambda: usize,
    pub seed: u64,
    pub pairs: String,
    pub comparison: Vec<BenchRow>,
    pub agreement: Vec<AgreementReport>,
    /// Wall-clock figures; not reproducible run to run.
    pub timing: Vec<BenchTiming>,
}

#[derive(Serialize)]
pub struct BenchCsvRow {
    #[serde(flatten)]
    row: BenchRow,
    wall_ns_per_key: f64,
}

impl Report for BenchReport {
    type Row = BenchCsvRow;

    fn rows(&self) -> Vec<BenchCsvRow> {
        self.comparison
            .iter()
            .zip(&self.timing)
            .map(|(row, t)| BenchCsvRow { row: row.clone(), wall_ns_per_key: t.wall_ns_per_key })
            .collect()
    }

    // the flattened row does not go through csv's serde path
    fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "scheme",
            "n",
            "m",
            "pairs_tested",
            "all_keys_match",
            "comm_elements",
            "comm_bits",
            "header_bits",
            "mults_per_key",
            "memory_elements",
            "memory_bits",
            "model_memory_elements",
            "model_memory_bits",
            "wall_ns_per_key",
        ])
        .expect("in-memory writer");
        for r in self.rows() {
            let b = &r.row;
            w.write_record([
                b.scheme.to_string(),
                b.n.to_string(),
                b.m.to_string(),
                b.pairs_tested.to_string(),
                b.all_keys_match.to_string(),
                b.comm_elements.to_string(),
                b.comm_bits.to_string(),
                b.header_bits.to_string(),
                b.mults_per_key.to_string(),
                b.memory_elements.to_string(),
                b.memory_bits.to_string(),
                b.model_memory_elements.to_string(),
                b.model_memory_bits.to_string(),
                format!("{:.1}", r.wall_ns_per_key),
            ])
            .expect("in-memory writer");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
    }
}

/// Network size each scheme can host at the requested parameters.
fn clamped_spec(cfg: &RunConfig, kind: SchemeKind) -> ParamSpec {
    let mut spec = cfg.spec();
    spec.kind = kind;
    spec.generator = if kind == SchemeKind::DdhvVandermonde { cfg.s } else { None };
    spec.allow_oversize = false;
    match kind {
        SchemeKind::OrDdhv => spec.n = spec.n.min(2 * spec.lambda),
        SchemeKind::DdhvVandermonde => {
            if let Ok(f) = crate::galois::Modulus::new(spec.q) {
                let s = cfg.s.map_or_else(|| f.smallest_primitive_root(), |s| f.elem(s));
                if let Ok(order) = f.order(s) {
                    spec.n = spec.n.min(usize::try_from(order).unwrap_or(usize::MAX));
                }
            }
        }
        SchemeKind::BlomDense => {}
    }
    spec
}

/// Runs all three schemes at one `(q, λ)` and tabulates their costs.
pub fn cmd_bench(cfg: &RunConfig) -> Result<BenchReport, CliError> {
    let mut comparison = Vec::new();
    let mut agreement = Vec::new();
    let mut timing = Vec::new();
    for kind in SchemeKind::ALL {
        let params = clamped_spec(cfg, kind).validate().map_err(SchemeError::from)?;
        let dep = setup(&params);
        let started = Instant::now();
        let report = run_all_pairs(&dep, cfg.pairs).map_err(|e| CliError::Invariant(e.to_string()))?;
        let elapsed = started.elapsed();
        if report.mults_per_key.min != report.mults_per_key.max {
            return Err(CliError::Invariant(format!("{kind}: multiplication count varies across pairs")));
        }
        let keys = (2 * report.pairs_tested).max(1) as f64;
        comparison.push(BenchRow {
            scheme: kind,
            n: params.n(),
            m: params.m(),
            pairs_tested: report.pairs_tested,
            all_keys_match: report.all_keys_match,
            comm_elements: report.comm_elements_per_handshake,
            comm_bits: report.comm_bits_per_handshake.max,
            header_bits: report.header_bits,
            mults_per_key: report.mults_per_key.max,
            memory_elements: params.m(),
            memory_bits: report.memory_bits_per_node,
            model_memory_elements: params.lambda(),
            model_memory_bits: report.model_memory_bits_per_node,
        });
        timing.push(BenchTiming { scheme: kind, wall_ns_per_key: elapsed.as_nanos() as f64 / keys });
        agreement.push(report);
    }
    Ok(BenchReport { q: cfg.q, lambda: cfg.lambda, seed: cfg.seed, pairs: cfg.pairs.to_string(), comparison, agreement, timing })
}

/// Loads the authority file and every share of a stored deployment.
pub fn load_deployment(dir: &Path) -> Result<Deployment, CliError> {
    let auth: AuthorityFile = read_json(&dir.join(AUTHORITY_FILE))?;
    let params = auth.params()?;
    let secret = auth.secret(&params)?;
    let shares = (0..params.n())
        .map(|id| {
            let file: ShareFile = read_json(&dir.join(share_file_name(id)))?;
            if file.node_id != id {
                return Err(CliError::Params(format!("{} holds node {}", share_file_name(id), file.node_id)));
            }
            Ok(file.into_share(&params)?)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Deployment::from_parts(params, secret, shares).map_err(|e| CliError::Params(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttackReport {
    Recovery(RecoveryReport),
    Experiment(SecurityStats),
}

#[derive(Serialize)]
pub struct RecoveryRow {
    scheme: SchemeKind,
    q: u64,
    lambda: usize,
    n: usize,
    compromised: String,
    rank: usize,
    unknowns: usize,
    equations: usize,
    nullspace_dim: usize,
    recovered: bool,
    matches_authority: Option<bool>,
    pairs_checked: Option<usize>,
    pairs_matching: Option<usize>,
}

#[derive(Serialize)]
pub struct ExperimentRow {
    scheme: SchemeKind,
    q: u64,
    lambda: usize,
    n: usize,
    c: usize,
    trials: usize,
    unknowns: usize,
    full_recovery_fraction: f64,
    colliding_support_fraction: f64,
    /// `rank:count` pairs separated by `;`
    rank_histogram: String,
}

#[derive(Serialize)]
#[serde(untagged)]
pub enum AttackRow {
    Recovery(RecoveryRow),
    Experiment(ExperimentRow),
}

impl Report for AttackReport {
    type Row = AttackRow;

    fn rows(&self) -> Vec<AttackRow> {
        vec![match self {
            AttackReport::Recovery(r) => AttackRow::Recovery(RecoveryRow {
                scheme: r.scheme,
                q: r.q,
                lambda: r.lambda,
                n: r.n,
                compromised: r.compromised.iter().map(ToString::to_string).collect::<Vec<_>>().join(";"),
                rank: r.rank,
                unknowns: r.unknowns,
                equations: r.equations,
                nullspace_dim: r.nullspace_dim,
                recovered: r.recovered,
                matches_authority: r.matches_authority,
                pairs_checked: r.pairs_checked,
                pairs_matching: r.pairs_matching,
            }),
            AttackReport::Experiment(s) => AttackRow::Experiment(ExperimentRow {
                scheme: s.scheme,
                q: s.q,
                lambda: s.lambda,
                n: s.n,
                c: s.c,
                trials: s.trials,
                unknowns: s.unknowns,
                full_recovery_fraction: s.full_recovery_fraction,
                colliding_support_fraction: s.colliding_support_fraction,
                rank_histogram: s
                    .rank_histogram
                    .iter()
                    .map(|(r, c)| format!("{r}:{c}"))
                    .collect::<Vec<_>>()
                    .join(";"),
            }),
        }]
    }
}

/// Explicit ids give one recovery attempt checked against the authority;
/// a count runs the seeded experiment over `trials` fresh deployments.
pub fn cmd_attack(cfg: &RunConfig) -> Result<AttackReport, CliError> {
    let spec = cfg
        .compromise
        .clone()
        .ok_or_else(|| CliError::Params("attack needs --compromise K or --compromise id0,id1,...".into()))?;
    match spec {
        CompromiseSpec::Ids(ids) => {
            let dep = load_deployment(&cfg.deployment)?;
            let t = CompromiseTranscript::capture(&dep, &ids).map_err(|e| CliError::Params(e.to_string()))?;
            let mut rec = recover(&t, true).map_err(|e| CliError::Invariant(e.to_string()))?;
            rec.audit_against(&dep).map_err(|e| CliError::Invariant(e.to_string()))?;
            Ok(AttackReport::Recovery(rec.report(&dep.params)))
        }
        // every trial builds its own deployment, so only the flag parameters matter
        CompromiseSpec::Count(c) => {
            let params = cfg.spec().validate().map_err(SchemeError::from)?;
            let stats = security_experiment(&params, c, cfg.trials).map_err(|e| CliError::Params(e.to_string()))?;
            Ok(AttackReport::Experiment(stats))
        }
    }
}

fn emit(cfg: &RunConfig, text: String) -> Result<String, CliError> {
    match &cfg.out {
        Some(path) => {
            fs::write(path, &text).map_err(|e| io_err(path, e))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

/// Executes a parsed command line and returns what should go to stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let cfg = &cli.cfg;
    match &cli.command {
        Command::Setup => Ok(cmd_setup(cfg)?.render(cfg.format)),
        Command::Handshake { i, j } => emit(cfg, cmd_handshake(cfg, *i, *j)?.render(cfg.format)),
        Command::Bench => emit(cfg, cmd_bench(cfg)?.render(cfg.format)),
        Command::Attack => emit(cfg, cmd_attack(cfg)?.render(cfg.format)),
    }
}
