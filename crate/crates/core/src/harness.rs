//! Experiment plumbing behind the command-line tool: configs, Monte-Carlo
//! DFP campaigns with per-trial failure attribution, plans and bound tables.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitstream::BitString;
use crate::bounds::{self, RecursiveDfpBound};
use crate::channel::{transmit_with_origins, ChannelError, ChannelModel, RngSpec};
use crate::inner_code::{
    random_message, CodeFixture, DfpEstimate, InnerCode, InnerCodec, InnerError, SearchOptions, SearchStrategy, TrialMessage,
    TrialPlan,
};
use crate::recursive::{plan_schedule, AlignStatus, PlanLevel, RecursiveCode, RecursiveCodeConfig, RecursiveError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Inner(#[from] InnerError),
    #[error(transparent)]
    Recursive(#[from] RecursiveError),
    #[error("thread pool: {0}")]
    Pool(String),
    #[error("csv: {0}")]
    Csv(String),
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| HarnessError::Json { path: path.into(), source })
}

/// `t` and `d` for wrapping the inner code in one recursive step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecursiveParams {
    pub t: usize,
    pub d: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub k: usize,
    pub n: usize,
    pub target_delta: f64,
    #[serde(default = "default_strategy")]
    pub strategy: SearchStrategy,
    #[serde(default = "default_budget")]
    pub budget: u64,
}

fn default_strategy() -> SearchStrategy {
    SearchStrategy::Exhaustive
}

fn default_budget() -> u64 {
    1 << 20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeSource {
    /// A stored inner code, optionally wrapped in one recursive step.
    Fixture {
        path: PathBuf,
        #[serde(default)]
        recursive: Option<RecursiveParams>,
    },
    /// A stored recursive code config; its inner fixture path is resolved
    /// relative to the config file.
    Recursive { path: PathBuf },
    /// A base code found by search at run time.
    Search {
        #[serde(flatten)]
        spec: SearchSpec,
        #[serde(default)]
        recursive: Option<RecursiveParams>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Channel to simulate; defaults to the code's design channel.
    #[serde(default)]
    pub channel: Option<ChannelModel>,
    pub code: CodeSource,
    pub trials: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub outputs: OutputPaths,
}

impl ExperimentConfig {
    pub fn new(code: CodeSource, trials: u64) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            channel: None,
            code,
            trials,
            master_seed: 0,
            workers: None,
            outputs: OutputPaths::default(),
        }
    }

    /// Reads a config and makes its relative paths relative to the file.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let mut cfg: ExperimentConfig = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut cfg.code {
            CodeSource::Fixture { path, .. } | CodeSource::Recursive { path } => fix(path),
            CodeSource::Search { .. } => {}
        }
        cfg.outputs.csv.as_mut().map(fix);
        cfg.outputs.json.as_mut().map(fix);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(HarnessError::Config("workers must be at least 1".into()));
        }
        if let Some(ch) = self.channel {
            ch.validate()?;
        }
        match &self.code {
            CodeSource::Fixture { path, .. } | CodeSource::Recursive { path } if !path.is_file() => {
                Err(HarnessError::Config(format!("{} does not exist", path.display())))
            }
            _ => Ok(()),
        }
    }
}

/// A code ready for trials.
#[derive(Debug, Clone)]
pub enum BuiltCode {
    Inner(Arc<InnerCode>),
    Recursive(Arc<RecursiveCode>),
}

impl BuiltCode {
    pub fn codec(&self) -> &dyn InnerCodec {
        match self {
            BuiltCode::Inner(c) => c.as_ref(),
            BuiltCode::Recursive(c) => c.as_ref(),
        }
    }

    pub fn design_channel(&self) -> ChannelModel {
        match self {
            BuiltCode::Inner(c) => c.channel(),
            BuiltCode::Recursive(c) => c.config().channel,
        }
    }
}

fn wrap(inner: InnerCode, recursive: Option<RecursiveParams>) -> Result<BuiltCode, HarnessError> {
    Ok(match recursive {
        None => BuiltCode::Inner(Arc::new(inner)),
        Some(RecursiveParams { t, d }) => {
            let channel = inner.channel();
            BuiltCode::Recursive(Arc::new(RecursiveCode::new(Arc::new(inner), t, d, channel)?))
        }
    })
}

/// Loads a recursive code config and its inner fixture.
pub fn load_recursive(path: &Path) -> Result<RecursiveCode, HarnessError> {
    let cfg: RecursiveCodeConfig = read_json(path)?;
    let fixture = cfg
        .inner_fixture_path
        .as_ref()
        .ok_or_else(|| HarnessError::Config(format!("{}: inner_fixture_path is missing", path.display())))?;
    let fixture = path.parent().unwrap_or(Path::new("")).join(fixture);
    let inner = InnerCode::load(&fixture)?;
    Ok(RecursiveCode::from_config(cfg, Arc::new(inner))?)
}

/// Loads a code file holding either a recursive code config or a table
/// code fixture.
pub fn load_codec(path: &Path) -> Result<Arc<dyn InnerCodec>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.into(), source })?;
    if serde_json::from_str::<RecursiveCodeConfig>(&text).is_ok() {
        return Ok(Arc::new(load_recursive(path)?));
    }
    let fixture: CodeFixture =
        serde_json::from_str(&text).map_err(|source| HarnessError::Json { path: path.into(), source })?;
    Ok(Arc::new(InnerCode::from_fixture(fixture)?))
}

/// Builds the code a config describes. Search sources need `channel`.
pub fn build_code(source: &CodeSource, channel: Option<ChannelModel>, seed: u64) -> Result<BuiltCode, HarnessError> {
    match source {
        CodeSource::Fixture { path, recursive } => wrap(InnerCode::load(path)?, *recursive),
        CodeSource::Recursive { path } => Ok(BuiltCode::Recursive(Arc::new(load_recursive(path)?))),
        CodeSource::Search { spec, recursive } => {
            let channel = channel.ok_or_else(|| HarnessError::Config("a search source needs a channel".into()))?;
            wrap(run_search(spec, channel, seed)?, *recursive)
        }
    }
}

pub fn run_search(spec: &SearchSpec, channel: ChannelModel, seed: u64) -> Result<InnerCode, HarnessError> {
    let opts = SearchOptions {
        strategy: spec.strategy,
        budget: spec.budget,
        rng: RngSpec::new(seed, 0),
        mc_trials: 10_000,
    };
    Ok(crate::inner_code::search_base_code(channel, spec.k, spec.n, spec.target_delta, opts)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Alignment,
    Cut,
    Inner,
    Rs,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Alignment => "alignment",
            Stage::Cut => "cut",
            Stage::Inner => "inner",
            Stage::Rs => "rs",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub message_hash: String,
    pub outcome: Outcome,
    pub stage: Option<Stage>,
    pub n_received: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Success,
    Failure,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub alignment: u64,
    pub cut: u64,
    pub inner: u64,
    pub rs: u64,
}

impl StageCounts {
    pub fn total(&self) -> u64 {
        self.alignment + self.cut + self.inner + self.rs
    }

    fn add(&mut self, stage: Stage) {
        match stage {
            Stage::Alignment => self.alignment += 1,
            Stage::Cut => self.cut += 1,
            Stage::Inner => self.inner += 1,
            Stage::Rs => self.rs += 1,
        }
    }
}

/// Outcome of a DFP campaign.
///
/// `estimate` is the failure rate of the worst message found (see
/// [`TrialPlan`]) or, for codes with many messages, of uniformly drawn
/// messages. `failures` and `stage_counts` cover every trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub channel: ChannelModel,
    pub master_seed: u64,
    pub trials: u64,
    pub failures: u64,
    pub stage_counts: StageCounts,
    pub estimate: DfpEstimate,
    pub records: Vec<TrialRecord>,
    /// Wall-clock time; kept out of artifacts so they stay reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl TrialReport {
    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| HarnessError::Csv(e.to_string());
        w.write_record(["trial", "message_hash", "outcome", "stage", "n_received"]).map_err(err)?;
        for r in &self.records {
            let outcome = match r.outcome {
                Outcome::Success => "success",
                Outcome::Failure => "failure",
            };
            let stage = r.stage.map(|s| s.to_string()).unwrap_or_default();
            w.write_record([r.trial.to_string(), r.message_hash.clone(), outcome.into(), stage, r.n_received.to_string()])
                .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Csv(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is ascii"))
    }

    /// The report without per-trial rows.
    pub fn summary(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("report is an object").remove("records");
        v
    }
}

/// 64-bit FNV-1a over the message's ascii rendering, as 16 hex digits.
pub fn message_hash(message: &BitString) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in message.bits() {
        h ^= (b'0' + b) as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn trial_message(code: &dyn InnerCodec, choice: TrialMessage, spec: RngSpec) -> BitString {
    match choice {
        TrialMessage::Fixed(m) => BitString::from_u64(m, code.message_len()),
        TrialMessage::Uniform => random_message(code.message_len(), &mut spec.substream(1).rng()),
    }
}

/// Runs one trial and names the first decoding step that went wrong.
///
/// For a recursive code: a center that could not be aligned, then a segment
/// holding a bit that did not come from its own inner codeword, then more
/// than `t` wrong inner symbols, then Reed-Solomon. A plain inner code can
/// only fail at the inner stage.
pub fn run_attributed_trial(
    code: &BuiltCode,
    channel: ChannelModel,
    choice: TrialMessage,
    trial: u64,
    spec: RngSpec,
) -> TrialRecord {
    let codec = code.codec();
    let message = trial_message(codec, choice, spec);
    let x = codec.encode(&message);
    let (y, origins) = transmit_with_origins(channel, &x, spec);
    let (ok, stage) = match code {
        BuiltCode::Inner(c) => {
            let ok = c.decode(&y).is_ok_and(|m| m == message);
            (ok, Stage::Inner)
        }
        BuiltCode::Recursive(c) => {
            let (result, trace) = c.decode_traced(&y);
            let ok = result.is_ok_and(|m| m == message);
            let cfg = c.config();
            let stride = cfg.stride();
            let stage = if trace.delimiters.iter().any(|d| d.center.status == AlignStatus::Failed) {
                Stage::Alignment
            } else if trace.segments.iter().enumerate().any(|(b, s)| {
                origins[s.start..s.end].iter().any(|&o| o / stride != b || o % stride >= cfg.inner.n)
            }) {
                Stage::Cut
            } else {
                let sent = c.codeword_symbols(&message).expect("message length matches");
                let wrong = trace.segments.iter().zip(&sent).filter(|(s, v)| s.symbol != v.0).count();
                if wrong > cfg.t {
                    Stage::Inner
                } else {
                    Stage::Rs
                }
            };
            (ok, stage)
        }
    };
    TrialRecord {
        trial,
        message_hash: message_hash(&message),
        outcome: if ok { Outcome::Success } else { Outcome::Failure },
        stage: (!ok).then_some(stage),
        n_received: y.len(),
    }
}

/// Runs a DFP campaign. Trial `i` draws its randomness from stream `i` of
/// `master_seed`, so results do not depend on `workers`.
pub fn run_dfp(
    code: &BuiltCode,
    channel: ChannelModel,
    trials: u64,
    master_seed: u64,
    workers: usize,
) -> Result<TrialReport, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::Config("trials must be at least 1".into()));
    }
    let channel = channel.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let started = Instant::now();
    let codec = code.codec();
    let plan = TrialPlan::new(codec.message_len(), trials);
    let spec = |i: u64| RngSpec::new(master_seed, i);
    let run = |range: std::ops::Range<u64>, choice: &(dyn Fn(u64) -> TrialMessage + Sync)| -> Vec<TrialRecord> {
        pool.install(|| range.into_par_iter().map(|i| run_attributed_trial(code, channel, choice(i), i, spec(i))).collect())
    };
    let (records, estimate) = match plan.messages {
        None => {
            let records = run(0..trials, &|_| TrialMessage::Uniform);
            let failures = records.iter().filter(|r| r.outcome == Outcome::Failure).count() as u64;
            (records, DfpEstimate::new(failures, trials, None))
        }
        Some(_) => {
            let mut records = run(0..plan.pilot, &|i| plan.pilot_message(i));
            let failed: Vec<bool> = records.iter().map(|r| r.outcome == Outcome::Failure).collect();
            let tally = plan.tally(&failed);
            let candidates = TrialPlan::candidates(&tally);
            let main = run(plan.pilot..trials, &|i| plan.main_message(i, &candidates));
            let main_failed: Vec<bool> = main.iter().map(|r| r.outcome == Outcome::Failure).collect();
            records.extend(main);
            let estimate = plan.estimate(&tally, &candidates, &main_failed);
            (records, estimate)
        }
    };
    let mut stage_counts = StageCounts::default();
    for stage in records.iter().filter_map(|r| r.stage) {
        stage_counts.add(stage);
    }
    Ok(TrialReport {
        channel,
        master_seed,
        trials,
        failures: stage_counts.total(),
        stage_counts,
        estimate,
        records,
        elapsed: started.elapsed(),
    })
}

/// Loads the code a config names and runs its campaign.
pub fn run_experiment(cfg: &ExperimentConfig, default_workers: usize) -> Result<TrialReport, HarnessError> {
    cfg.validate()?;
    let code = build_code(&cfg.code, cfg.channel, cfg.master_seed)?;
    let channel = cfg.channel.unwrap_or_else(|| code.design_channel());
    run_dfp(&code, channel, cfg.trials, cfg.master_seed, cfg.workers.unwrap_or(default_workers))
}

/// A plan level with the rate bounds evaluated at that level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReportLevel {
    #[serde(flatten)]
    pub level: PlanLevel,
    pub rate_overhead_x: Option<f64>,
    pub final_rate_bound: Option<f64>,
}

pub fn plan_report(
    k_base: usize,
    n_base: usize,
    delta_base: f64,
    channel: ChannelModel,
    levels: usize,
    bridge: bool,
) -> Result<Vec<PlanReportLevel>, HarnessError> {
    let plan = plan_schedule(k_base, n_base, delta_base, channel, levels, bridge)?;
    Ok(plan
        .into_iter()
        .map(|level| {
            let k = level.config.inner.k as f64;
            let inner_rate = k / level.config.inner.n as f64;
            PlanReportLevel {
                rate_overhead_x: bounds::rate_overhead_x(k).ok(),
                final_rate_bound: bounds::final_rate_bound(k, level.config.inner.delta, inner_rate).ok(),
                level,
            }
        })
        .collect())
}

/// One bound evaluated at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub bound: &'static str,
    pub parameters: String,
    pub value: f64,
}

/// Every bound over a small default grid; points outside a bound's
/// preconditions are left out.
pub fn bounds_table() -> Vec<BoundRow> {
    let mut rows = Vec::new();
    let mut push = |bound: &'static str, parameters: String, value: Option<f64>| {
        if let Some(value) = value {
            rows.push(BoundRow { bound, parameters, value });
        }
    };
    let ps = [0.01, 0.05, 0.1, 0.3];
    let lambdas = [0.5, 1.0, 2.0, 20.0];
    let ns = [100u64, 1000, 10000];
    let epss = [0.1, 0.25, 0.45];
    for p in ps {
        for n in ns {
            for eps in epss {
                push("chernoff_binomial", format!("p={p};n={n};eps={eps}"), bounds::chernoff_binomial(p, n, eps).ok());
            }
        }
    }
    for lambda in lambdas.iter().chain(&[100.0, 1000.0]) {
        for eps in epss {
            push("chernoff_poisson", format!("lambda={lambda};eps={eps}"), bounds::chernoff_poisson(*lambda, eps).ok());
        }
    }
    for alpha in [8.0, 10.0, 20.0] {
        for p in ps {
            for n in ns {
                push(
                    "binomial_upper_tail_bound",
                    format!("alpha={alpha};p={p};n={n}"),
                    bounds::binomial_upper_tail_bound(alpha, p, n).ok(),
                );
            }
        }
    }
    for (d, k) in [(16.0, 64.0), (256.0, 4096.0), (1000.0, 64.0), (5000.0, 1000.0)] {
        push("positioning_failure_bound", format!("d={d};k={k}"), Some(bounds::positioning_failure_bound(d, k)));
    }
    for delta in [1e-3, 1e-6, 1e-12, 1e-50] {
        for (k, t, d) in [(64u64, 16u64, 16.0), (64, 16, 4000.0), (4096, 256, 256.0)] {
            push(
                "recursive_dfp_bound",
                format!("delta={delta};k={k};t={t};d={d}"),
                bounds::recursive_dfp_bound(delta, k, t, d).ok().map(|b: RecursiveDfpBound| b.total),
            );
        }
        push(
            "inner_failure_bound",
            format!("delta={delta}"),
            bounds::inner_failure_bound(delta).ok().map(|b| b.value),
        );
        push("inner_failure_components", format!("delta={delta}"), Some(bounds::inner_failure_components(delta)));
    }
    for k in [8.0, 16.0, 64.0, 4096.0] {
        push("rate_overhead_x", format!("k_base={k}"), bounds::rate_overhead_x(k).ok());
        for levels in [1u32, 3] {
            push(
                "rate_overhead_product",
                format!("k_base={k};levels={levels}"),
                Some(bounds::rate_overhead_product(k, levels)),
            );
        }
        push(
            "final_rate_bound",
            format!("k0={k};delta0=1e-6;r0=0.5"),
            bounds::final_rate_bound(k, 1e-6, 0.5).ok(),
        );
    }
    let channels = ps
        .iter()
        .map(|&p| ChannelModel::Bdc(p))
        .chain(lambdas.iter().map(|&l| ChannelModel::Prc(l)));
    for channel in channels {
        let s = channel.survival();
        let name = match channel {
            ChannelModel::Bdc(p) => format!("bdc={p}"),
            ChannelModel::Prc(l) => format!("prc={l}"),
        };
        for alpha in [1.0, 5.0, 20.0] {
            push("underestimation_bound", format!("{name};alpha={alpha}"), Some(bounds::underestimation_bound(alpha, s)));
            push("face_loss_probability", format!("{name};alpha={alpha}"), Some(bounds::face_loss_probability(channel, alpha)));
            push("zeta_common", format!("{name};alpha={alpha}"), Some(bounds::zeta_common(channel, alpha)));
            push("delta_extreme", format!("{name};alpha={alpha}"), Some(bounds::delta_extreme(alpha, s)));
        }
    }
    rows
}

pub fn bounds_csv(rows: &[BoundRow]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| HarnessError::Csv(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ascii"))
}
