//! One recursive step: a code for `k²`-bit messages built from an inner code
//! for `k`-bit messages.
//!
//! The message is split into `k` symbols of GF(2^k), Reed-Solomon encoded to
//! `k + 2t` symbols, each symbol inner-encoded, and every inner codeword
//! followed by a delimiter. Decoding chases the positioning valleys from
//! left to right, cuts segments at the partitioning valleys, decodes each
//! segment with the inner decoder and lets Reed-Solomon fix up to `t` wrong
//! symbols.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitstream::BitString;
use crate::bounds::{self, BoundError, RecursiveDfpBound, C1, C_ALPHA};
use crate::channel::{ChannelError, ChannelModel};
use crate::galois_rs::{FieldContext, FieldError, Gf, ReedSolomon, RsError};
use crate::inner_code::{InnerCodec, InnerError};
use crate::valley::{align_valley, DelimiterParams};

#[derive(Debug, Error)]
pub enum RecursiveError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("message has {got} bits, expected {expected}")]
    WrongMessageLength { expected: usize, got: usize },
    #[error("no codeword within the Reed-Solomon radius")]
    DecodeFailure,
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Inner(#[from] InnerError),
}

impl From<RsError> for RecursiveError {
    fn from(e: RsError) -> Self {
        match e {
            RsError::DecodeFailure => RecursiveError::DecodeFailure,
            other => RecursiveError::InvalidConfig(other.to_string()),
        }
    }
}

/// What the recursive step needs to know about its inner code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerSummary {
    pub k: usize,
    pub n: usize,
    pub delta: f64,
}

/// Quantities fixed by the inner code, `t`, `d` and the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derived {
    pub alpha: usize,
    pub beta: usize,
    pub f_estimate: usize,
    pub n_prime: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursiveCodeConfig {
    #[serde(default)]
    pub inner_fixture_path: Option<String>,
    pub inner: InnerSummary,
    pub t: usize,
    pub d: usize,
    pub channel: ChannelModel,
    pub derived: Derived,
}

/// `α = max(1, ⌈C·ln(1/δ)/s⌉)`; δ ≥ 1 carries no information and gives 1.
pub fn partition_face(delta: f64, survival: f64) -> usize {
    let raw = (C_ALPHA * (1.0 / delta).ln() / survival).ceil();
    if raw.is_finite() && raw >= 1.0 {
        raw as usize
    } else {
        1
    }
}

impl RecursiveCodeConfig {
    pub fn derive(inner: InnerSummary, t: usize, d: usize, channel: ChannelModel) -> Result<Self, RecursiveError> {
        let channel = channel.validate()?;
        let InnerSummary { k, n, delta } = inner;
        if k == 0 {
            return Err(RecursiveError::InvalidConfig("inner message length must be positive".into()));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(RecursiveError::InvalidConfig(format!("inner DFP {delta} outside (0, 1]")));
        }
        // 0 < t < 2^{k−1} − k
        let t_limit = if k >= 63 { u64::MAX } else { (1u64 << (k - 1)).saturating_sub(k as u64) };
        if t == 0 || t as u64 >= t_limit {
            return Err(RecursiveError::InvalidConfig(format!(
                "t = {t} must satisfy 0 < t < 2^(k-1) - k for k = {k}"
            )));
        }
        let s = channel.survival();
        let alpha = partition_face(delta, s);
        let half = (d as f64 / (2.0 * s)).ceil() as i64;
        let beta = half - 2 * alpha as i64;
        if beta < 1 {
            return Err(RecursiveError::InvalidConfig(format!(
                "delimiter budget d = {d} gives beta = {beta} < 1 (alpha = {alpha})"
            )));
        }
        let beta = beta as usize;
        let f_estimate = (2.0 * s * alpha as f64).ceil() as usize;
        let n_prime = (k + 2 * t) * (n + 4 * alpha + 2 * beta);
        Ok(RecursiveCodeConfig {
            inner_fixture_path: None,
            inner,
            t,
            d,
            channel,
            derived: Derived { alpha, beta, f_estimate, n_prime },
        })
    }

    /// Recomputes the derived fields; deserialized configs must agree.
    pub fn check(&self) -> Result<(), RecursiveError> {
        let fresh = RecursiveCodeConfig::derive(self.inner, self.t, self.d, self.channel)?;
        if fresh.derived != self.derived {
            return Err(RecursiveError::InvalidConfig(format!(
                "derived fields {:?} do not match the recomputed {:?}",
                self.derived, fresh.derived
            )));
        }
        Ok(())
    }

    pub fn with_fixture_path(mut self, path: impl Into<String>) -> Self {
        self.inner_fixture_path = Some(path.into());
        self
    }

    pub fn delimiter(&self) -> DelimiterParams {
        DelimiterParams { alpha: self.derived.alpha, beta: self.derived.beta }
    }

    pub fn survival(&self) -> f64 {
        self.channel.survival()
    }

    pub fn k(&self) -> usize {
        self.inner.k
    }

    pub fn message_len(&self) -> usize {
        self.inner.k * self.inner.k
    }

    pub fn num_blocks(&self) -> usize {
        self.inner.k + 2 * self.t
    }

    /// Transmitted bits per inner codeword plus its delimiter.
    pub fn stride(&self) -> usize {
        self.inner.n + self.delimiter().len()
    }

    /// Upper bound `(k+2t)(n + d/s + 2)` on the block length.
    pub fn n_prime_bound(&self) -> f64 {
        self.num_blocks() as f64 * (self.inner.n as f64 + self.d as f64 / self.survival() + 2.0)
    }

    pub fn dfp_bound(&self) -> Result<RecursiveDfpBound, BoundError> {
        bounds::recursive_dfp_bound(self.inner.delta.min(1.0 - f64::EPSILON), self.inner.k as u64, self.t as u64, self.d as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterRecord {
    pub estimate: usize,
    pub center: usize,
    pub status: AlignStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutRecord {
    /// Last 0 of the left partitioning valley, when the walk found it.
    pub left_partition: Option<usize>,
    pub right_partition: Option<usize>,
    pub left_cut: usize,
    pub right_cut: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolStatus {
    Ok,
    LengthExceeded,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub start: usize,
    pub end: usize,
    pub status: SymbolStatus,
    pub symbol: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RsStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelimiterTrace {
    #[serde(flatten)]
    pub center: CenterRecord,
    #[serde(flatten)]
    pub cut: CutRecord,
}

/// Everything the decoder decided, one record per delimiter and segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeTrace {
    pub delimiters: Vec<DelimiterTrace>,
    pub segments: Vec<SegmentRecord>,
    pub rs: RsStatus,
}

impl DecodeTrace {
    pub fn alignment_failures(&self) -> usize {
        self.delimiters.iter().filter(|d| d.center.status == AlignStatus::Failed).count()
    }
}

/// A recursive code bound to a concrete inner codec.
#[derive(Debug, Clone)]
pub struct RecursiveCode {
    cfg: RecursiveCodeConfig,
    inner: Arc<dyn InnerCodec>,
    rs: ReedSolomon,
    delimiter: BitString,
    delta: Option<f64>,
}

impl RecursiveCode {
    pub fn new(inner: Arc<dyn InnerCodec>, t: usize, d: usize, channel: ChannelModel) -> Result<Self, RecursiveError> {
        let summary = InnerSummary { k: inner.message_len(), n: inner.block_len(), delta: inner.delta() };
        let cfg = RecursiveCodeConfig::derive(summary, t, d, channel)?;
        RecursiveCode::from_config(cfg, inner)
    }

    pub fn from_config(cfg: RecursiveCodeConfig, inner: Arc<dyn InnerCodec>) -> Result<Self, RecursiveError> {
        cfg.check()?;
        if inner.message_len() != cfg.inner.k || inner.block_len() != cfg.inner.n {
            return Err(RecursiveError::InvalidConfig(format!(
                "inner code is ({}, {}), config expects ({}, {})",
                inner.message_len(),
                inner.block_len(),
                cfg.inner.k,
                cfg.inner.n
            )));
        }
        let field = Arc::new(FieldContext::new(cfg.inner.k as u32)?);
        let rs = ReedSolomon::new(field, cfg.inner.k, cfg.t)?;
        let delimiter = cfg.delimiter().render();
        Ok(RecursiveCode { cfg, inner, rs, delimiter, delta: None })
    }

    /// Records a measured DFP, reported when this code is itself an inner code.
    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn config(&self) -> &RecursiveCodeConfig {
        &self.cfg
    }

    pub fn inner(&self) -> &Arc<dyn InnerCodec> {
        &self.inner
    }

    pub fn field(&self) -> &FieldContext {
        self.rs.field()
    }

    /// The RS codeword symbols carrying `message`.
    pub fn codeword_symbols(&self, message: &BitString) -> Result<Vec<Gf>, RecursiveError> {
        if message.len() != self.cfg.message_len() {
            return Err(RecursiveError::WrongMessageLength { expected: self.cfg.message_len(), got: message.len() });
        }
        let symbols = self.field().symbols_from_bits(message)?;
        Ok(self.rs.encode(&symbols)?)
    }

    fn symbol_bits(&self, s: Gf) -> BitString {
        self.field().bits_from_symbols(&[s])
    }

    pub fn encode(&self, message: &BitString) -> Result<BitString, RecursiveError> {
        let symbols = self.codeword_symbols(message)?;
        let blocks: Vec<BitString> = symbols.par_iter().map(|&s| self.inner.encode(&self.symbol_bits(s))).collect();
        let mut out = BitString::with_capacity(self.cfg.derived.n_prime);
        for block in &blocks {
            out.extend_from(block);
            out.extend_from(&self.delimiter);
        }
        Ok(out)
    }

    /// Serially estimates and aligns each positioning-valley center.
    pub fn locate_positioning_centers(&self, w: &BitString) -> Vec<CenterRecord> {
        let s = self.cfg.survival();
        let Derived { alpha, beta, .. } = self.cfg.derived;
        let n = self.cfg.inner.n;
        let first = (s * (n + 2 * alpha + beta) as f64).round() as usize;
        let step = (s * self.cfg.stride() as f64).round() as usize;
        let last = w.len().saturating_sub(1);
        let mut records = Vec::with_capacity(self.cfg.num_blocks());
        let mut prev: Option<usize> = None;
        for _ in 0..self.cfg.num_blocks() {
            let estimate = prev.map_or(first, |l| l + step);
            let clamped = estimate.min(last);
            let record = match align_valley(w, clamped) {
                Ok(center) => CenterRecord { estimate, center, status: AlignStatus::Ok },
                Err(_) => CenterRecord { estimate, center: clamped, status: AlignStatus::Failed },
            };
            prev = Some(record.center);
            records.push(record);
        }
        records
    }

    /// Cuts the received string into one segment per inner codeword.
    pub fn cut_inner_segments(&self, w: &BitString, centers: &[CenterRecord]) -> (Vec<BitString>, Vec<CutRecord>) {
        let s = self.cfg.survival();
        let Derived { alpha, beta, f_estimate: f, .. } = self.cfg.derived;
        let fallback = (s * (2 * alpha + beta) as f64).round() as usize;
        let mut segments = Vec::with_capacity(centers.len());
        let mut cuts = Vec::with_capacity(centers.len());
        let mut prev_right = 0usize;
        for c in centers {
            let cut = delimiter_cut(w, c.center, f, fallback);
            segments.push(w.slice(prev_right, cut.left_cut));
            cuts.push(cut);
            prev_right = cut.right_cut;
        }
        (segments, cuts)
    }

    pub fn decode(&self, w: &BitString) -> Result<BitString, RecursiveError> {
        self.decode_traced(w).0
    }

    pub fn decode_traced(&self, w: &BitString) -> (Result<BitString, RecursiveError>, DecodeTrace) {
        let centers = self.locate_positioning_centers(w);
        let (segments, cuts) = self.cut_inner_segments(w, &centers);
        let decoded: Vec<(SymbolStatus, Gf)> = segments
            .par_iter()
            .map(|seg| match self.inner.decode(seg) {
                Ok(bits) => match self.field().symbols_from_bits(&bits) {
                    Ok(sym) if sym.len() == 1 => (SymbolStatus::Ok, sym[0]),
                    _ => (SymbolStatus::Failed, Gf::ZERO),
                },
                Err(InnerError::LengthExceeded { .. }) => (SymbolStatus::LengthExceeded, Gf::ZERO),
                Err(_) => (SymbolStatus::Failed, Gf::ZERO),
            })
            .collect();
        let received: Vec<Gf> = decoded.iter().map(|d| d.1).collect();
        let result = self.rs.decode(&received);
        let mut prev_right = 0usize;
        let segment_records = cuts
            .iter()
            .zip(&decoded)
            .map(|(cut, &(status, symbol))| {
                let start = prev_right;
                let end = cut.left_cut.max(start);
                prev_right = cut.right_cut;
                SegmentRecord { start, end, status, symbol: symbol.0 }
            })
            .collect();
        let trace = DecodeTrace {
            delimiters: centers.into_iter().zip(cuts).map(|(center, cut)| DelimiterTrace { center, cut }).collect(),
            segments: segment_records,
            rs: if result.is_ok() { RsStatus::Ok } else { RsStatus::Failed },
        };
        let message = result.map_err(RecursiveError::from).map(|symbols| self.field().bits_from_symbols(&symbols));
        (message, trace)
    }
}

/// Cut points around one delimiter whose positioning center is `center`:
/// `f` bits are removed beyond each partitioning center, or `fallback` bits
/// either side of `center` when a walk runs off the string.
pub fn delimiter_cut(w: &BitString, center: usize, f: usize, fallback: usize) -> CutRecord {
    let len = w.len();
    let left_partition = left_partition_center(w, center);
    let right_partition = right_partition_center(w, center);
    let left_cut = match left_partition {
        Some(p) => (p + 1).saturating_sub(f),
        None => center.saturating_sub(fallback),
    }
    .min(len);
    let right_cut = match right_partition {
        Some(p) => p + f + 1,
        None => center + fallback,
    }
    .min(len);
    CutRecord { left_partition, right_partition, left_cut, right_cut }
}

/// Walks left from a positioning center across its 0-face and the 1-face
/// before it; the first 0 reached is the left partitioning center.
fn left_partition_center(w: &BitString, center: usize) -> Option<usize> {
    let b = w.bits();
    if center >= b.len() {
        return None;
    }
    let mut i = center as isize;
    while i >= 0 && b[i as usize] == 0 {
        i -= 1;
    }
    while i >= 0 && b[i as usize] == 1 {
        i -= 1;
    }
    (i >= 0).then_some(i as usize)
}

/// Walks right across the positioning valley's 1-face and the next 0-run;
/// the last 0 before a 1 is the right partitioning center.
fn right_partition_center(w: &BitString, center: usize) -> Option<usize> {
    let b = w.bits();
    let mut i = center + 1;
    while i < b.len() && b[i] == 1 {
        i += 1;
    }
    if i >= b.len() {
        return None;
    }
    while i < b.len() && b[i] == 0 {
        i += 1;
    }
    (i < b.len()).then(|| i - 1)
}

impl InnerCodec for RecursiveCode {
    fn message_len(&self) -> usize {
        self.cfg.message_len()
    }

    fn block_len(&self) -> usize {
        self.cfg.derived.n_prime
    }

    fn delta(&self) -> f64 {
        self.delta.unwrap_or_else(|| self.cfg.dfp_bound().map_or(1.0, |b| b.total))
    }

    fn encode(&self, message: &BitString) -> BitString {
        RecursiveCode::encode(self, message).expect("message length checked by caller")
    }

    fn decode(&self, received: &BitString) -> Result<BitString, InnerError> {
        RecursiveCode::decode(self, received).map_err(|e| InnerError::DecodeFailure(e.to_string()))
    }
}

/// One level of a parameter plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanLevel {
    pub level: usize,
    pub config: RecursiveCodeConfig,
    pub dfp_bound: Option<RecursiveDfpBound>,
    pub n_prime_bound: f64,
    pub rate: f64,
}

/// Parameters for `levels` successive squaring steps starting from a base
/// code with message length `k_base`, block length `n_base` and DFP
/// `delta_base`.
///
/// Every level at message length `k` uses `t = d = ⌈k^{2/3}⌉`. With
/// `bridge`, level 0 instead uses `t = ⌈δ^{c1/2}·k⌉`, `d = ⌈k^{2/3}⌉`, the
/// variant that lowers the DFP of a base code with unknown DFP/length
/// relation. Later levels take the previous level's DFP bound as their δ.
pub fn plan_schedule(
    k_base: usize,
    n_base: usize,
    delta_base: f64,
    channel: ChannelModel,
    levels: usize,
    bridge: bool,
) -> Result<Vec<PlanLevel>, RecursiveError> {
    if levels == 0 {
        return Err(RecursiveError::InvalidConfig("levels must be at least 1".into()));
    }
    let mut k = k_base;
    let mut n = n_base;
    let mut delta = delta_base;
    let mut plan = Vec::with_capacity(levels);
    for level in 0..levels {
        let two_thirds = two_thirds_power(k);
        let (t, d) = if level == 0 && bridge {
            ((delta.powf(C1 / 2.0) * k as f64).ceil() as usize, two_thirds)
        } else {
            (two_thirds, two_thirds)
        };
        let config = RecursiveCodeConfig::derive(InnerSummary { k, n, delta }, t, d, channel)
            .map_err(|e| RecursiveError::InvalidConfig(format!("level {level}: {e}")))?;
        let dfp_bound = config.dfp_bound().ok();
        let rate = config.message_len() as f64 / config.derived.n_prime as f64;
        let n_prime_bound = config.n_prime_bound();
        delta = dfp_bound.map_or(1.0, |b| b.total);
        n = config.derived.n_prime;
        k = k
            .checked_mul(k)
            .ok_or_else(|| RecursiveError::InvalidConfig(format!("level {level}: message length overflows")))?;
        plan.push(PlanLevel { level, config, dfp_bound, n_prime_bound, rate });
    }
    Ok(plan)
}

/// `⌈k^{2/3}⌉`, exact for perfect cubes.
fn two_thirds_power(k: usize) -> usize {
    let approx = (k as f64).powf(2.0 / 3.0).round() as u128;
    let k3 = (k as u128).pow(2);
    // smallest x with x³ ≥ k²
    let mut x = approx.saturating_sub(2);
    while x.pow(3) < k3 {
        x += 1;
    }
    x as usize
}
