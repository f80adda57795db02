//! Table inner codes with MAP decoding, DFP evaluation and base-code search.
//!
//! A message is a `k`-bit string; its index is the unsigned integer whose
//! bit `i` is message bit `i` (see [`BitString::from_u64`]). Codeword `i` of
//! the table encodes message index `i`.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};
use thiserror::Error;

use crate::bitstream::BitString;
use crate::channel::{
    poisson_tail, subsequence_count_slices, transmit, ChannelError, ChannelModel, PrcState, RngSpec, Runs,
};

/// Largest message length a table code may have.
pub const MAX_TABLE_K: usize = 20;
/// Largest block length for exact BDC evaluation.
pub const EXACT_BDC_MAX_N: usize = 16;
/// Largest block length for exact PRC evaluation.
pub const EXACT_PRC_MAX_N: usize = 8;
/// Largest PRC output cap for exact evaluation.
pub const EXACT_PRC_MAX_CAP: usize = 20;
/// Above this many messages Monte-Carlo trials sample messages uniformly.
pub const ROUND_ROBIN_MAX_MESSAGES: u64 = 256;

#[derive(Debug, Error)]
pub enum InnerError {
    #[error("received {len} bits, the decoder accepts at most {max}")]
    LengthExceeded { len: usize, max: usize },
    #[error("outer decoding failed: {0}")]
    DecodeFailure(String),
    #[error("exact evaluation is out of range: {0}")]
    TooLarge(String),
    #[error("no code met the target within the budget (best {best:?})")]
    NotFound { best: Option<f64> },
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("fixture I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("fixture JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Anything usable as the inner code of a recursive step.
pub trait InnerCodec: Send + Sync + fmt::Debug {
    fn message_len(&self) -> usize;
    fn block_len(&self) -> usize;
    /// Known or measured decoding failure probability.
    fn delta(&self) -> f64;
    fn encode(&self, message: &BitString) -> BitString;
    fn decode(&self, received: &BitString) -> Result<BitString, InnerError>;
}

/// On-disk form of a table code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeFixture {
    pub k: usize,
    pub n: usize,
    pub channel: ChannelModel,
    pub codewords: Vec<BitString>,
    pub delta_measured: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prc_cap: Option<usize>,
}

/// An encoder table paired with the MAP decoder for `channel`.
#[derive(Clone, PartialEq)]
pub struct InnerCode {
    k: usize,
    n: usize,
    codewords: Vec<BitString>,
    channel: ChannelModel,
    delta: Option<f64>,
    prc_cap: Option<usize>,
}

impl fmt::Debug for InnerCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InnerCode")
            .field("k", &self.k)
            .field("n", &self.n)
            .field("channel", &self.channel)
            .field("delta", &self.delta)
            .field("prc_cap", &self.prc_cap)
            .finish_non_exhaustive()
    }
}

impl InnerCode {
    pub fn new(k: usize, codewords: Vec<BitString>, channel: ChannelModel) -> Result<Self, InnerError> {
        let channel = channel.validate()?;
        if k == 0 || k > MAX_TABLE_K {
            return Err(InnerError::InvalidCode(format!("message length {k} outside 1..={MAX_TABLE_K}")));
        }
        if codewords.len() != 1 << k {
            return Err(InnerError::InvalidCode(format!(
                "expected {} codewords, got {}",
                1u64 << k,
                codewords.len()
            )));
        }
        let n = codewords[0].len();
        if n < k {
            return Err(InnerError::InvalidCode(format!("block length {n} below message length {k}")));
        }
        if let Some(i) = codewords.iter().position(|c| c.len() != n) {
            return Err(InnerError::InvalidCode(format!("codeword {i} has length {}", codewords[i].len())));
        }
        let mut seen = HashSet::with_capacity(codewords.len());
        if let Some(i) = codewords.iter().position(|c| !seen.insert(c)) {
            return Err(InnerError::InvalidCode(format!("codeword {i} repeats an earlier one")));
        }
        Ok(InnerCode { k, n, codewords, channel, delta: None, prc_cap: None })
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    /// Sets the longest accepted PRC output; longer outputs are failures.
    pub fn with_prc_cap(mut self, cap: usize) -> Self {
        self.prc_cap = Some(cap);
        self
    }

    pub fn from_fixture(f: CodeFixture) -> Result<Self, InnerError> {
        let code = InnerCode::new(f.k, f.codewords, f.channel)?;
        if code.n != f.n {
            return Err(InnerError::InvalidCode(format!("fixture says n = {}, codewords have {}", f.n, code.n)));
        }
        Ok(InnerCode { delta: f.delta_measured, prc_cap: f.prc_cap, ..code })
    }

    pub fn to_fixture(&self) -> CodeFixture {
        CodeFixture {
            k: self.k,
            n: self.n,
            channel: self.channel,
            codewords: self.codewords.clone(),
            delta_measured: self.delta,
            prc_cap: self.prc_cap,
        }
    }

    pub fn load(path: &Path) -> Result<Self, InnerError> {
        let text = std::fs::read_to_string(path)?;
        InnerCode::from_fixture(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), InnerError> {
        let mut text = serde_json::to_string_pretty(&self.to_fixture())?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn channel(&self) -> ChannelModel {
        self.channel
    }

    pub fn delta_measured(&self) -> Option<f64> {
        self.delta
    }

    pub fn prc_cap(&self) -> Option<usize> {
        self.prc_cap
    }

    pub fn codewords(&self) -> &[BitString] {
        &self.codewords
    }

    pub fn num_messages(&self) -> u64 {
        1 << self.k
    }

    pub fn codeword(&self, message: u64) -> &BitString {
        &self.codewords[message as usize]
    }

    /// Longest received string the decoder accepts under `channel`.
    pub fn max_received_len(&self, channel: ChannelModel) -> Option<usize> {
        match channel {
            ChannelModel::Bdc(_) => Some(self.n),
            ChannelModel::Prc(_) => self.prc_cap,
        }
    }
}

impl InnerCodec for InnerCode {
    fn message_len(&self) -> usize {
        self.k
    }

    fn block_len(&self) -> usize {
        self.n
    }

    fn delta(&self) -> f64 {
        self.delta.unwrap_or(1.0)
    }

    fn encode(&self, message: &BitString) -> BitString {
        assert_eq!(message.len(), self.k, "message length");
        self.codeword(message.to_u64()).clone()
    }

    fn decode(&self, received: &BitString) -> Result<BitString, InnerError> {
        let m = map_decode(self, self.channel, received)?;
        Ok(BitString::from_u64(m, self.k))
    }
}

/// Index of the most likely message given `y`, smallest index on ties.
pub fn map_decode(code: &InnerCode, channel: ChannelModel, y: &BitString) -> Result<u64, InnerError> {
    if let Some(max) = code.max_received_len(channel) {
        if y.len() > max {
            return Err(InnerError::LengthExceeded { len: y.len(), max });
        }
    }
    match channel {
        ChannelModel::Bdc(p) => {
            // Every codeword has length n, so the likelihood is proportional
            // to the subsequence count and exact integers decide.
            let counts: Option<Vec<u128>> =
                code.codewords.iter().map(|x| subsequence_count_slices(x.bits(), y.bits())).collect();
            Ok(match counts {
                Some(counts) => argmax_first(counts.into_iter()),
                None => argmax_log(code.codewords.iter().map(|x| crate::channel::bdc_log_likelihood(x, y, p))),
            })
        }
        ChannelModel::Prc(lambda) => {
            let yr = Runs::of(y.bits());
            Ok(argmax_log(
                code.codewords
                    .iter()
                    .map(|x| crate::channel::prc_log_likelihood_runs(&Runs::of(x.bits()), &yr, lambda)),
            ))
        }
    }
}

fn argmax_first<T: PartialOrd>(values: impl Iterator<Item = T>) -> u64 {
    let mut best: Option<(u64, T)> = None;
    for (i, v) in values.enumerate() {
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((i as u64, v));
        }
    }
    best.map_or(0, |(i, _)| i)
}

fn argmax_log(values: impl Iterator<Item = f64>) -> u64 {
    argmax_first(values)
}

/// Smallest `m` with `Pr[Poisson(λn) ≥ m] ≤ δ/2`.
pub fn prc_cap(lambda: f64, n: usize, delta: f64) -> usize {
    let mu = lambda * n as f64;
    let mut m = mu.floor() as u64;
    while poisson_tail(mu, m) > delta / 2.0 {
        m += 1;
    }
    while m > 0 && poisson_tail(mu, m - 1) <= delta / 2.0 {
        m -= 1;
    }
    m as usize
}

/// Exact per-message failure probabilities and their maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDfp {
    pub per_message: Vec<f64>,
    pub max: f64,
    pub worst_message: u64,
}

impl ExactDfp {
    fn from_per_message(per_message: Vec<f64>) -> Self {
        let worst_message = argmax_first(per_message.iter().copied());
        let max = per_message[worst_message as usize];
        ExactDfp { per_message, max, worst_message }
    }

    pub fn average(&self) -> f64 {
        self.per_message.iter().sum::<f64>() / self.per_message.len() as f64
    }
}

/// Exact maximum-over-messages DFP of the MAP decoder.
pub fn exact_dfp(code: &InnerCode, channel: ChannelModel) -> Result<ExactDfp, InnerError> {
    match channel {
        ChannelModel::Bdc(p) => {
            if code.n > EXACT_BDC_MAX_N {
                return Err(InnerError::TooLarge(format!("BDC exact DFP needs n ≤ {EXACT_BDC_MAX_N}")));
            }
            Ok(exact_dfp_bdc(code, p))
        }
        ChannelModel::Prc(lambda) => {
            let cap = code
                .prc_cap
                .ok_or_else(|| InnerError::InvalidCode("PRC evaluation needs an output cap".into()))?;
            if code.n > EXACT_PRC_MAX_N || cap > EXACT_PRC_MAX_CAP {
                return Err(InnerError::TooLarge(format!(
                    "PRC exact DFP needs n ≤ {EXACT_PRC_MAX_N} and cap ≤ {EXACT_PRC_MAX_CAP}"
                )));
            }
            Ok(exact_dfp_prc(code, lambda, cap, true))
        }
    }
}

/// Visits every string that at least one codeword can turn into under
/// deletions, with the exact subsequence count for each codeword.
///
/// `h[m][i]` is the number of embeddings of the current prefix into the
/// first `i` bits of codeword `m`, so extending by bit `b` sets
/// `g[i] = [x_i = b]·h[i]` and `h'` to the prefix sums of `g`.
pub fn for_each_deletion_outcome(codewords: &[BitString], mut visit: impl FnMut(&[u8], &[u64])) {
    let n = codewords.first().map_or(0, |c| c.len());
    let root: Vec<Vec<u64>> = codewords.iter().map(|_| vec![1u64; n + 1]).collect();
    let mut y = Vec::with_capacity(n);
    let mut counts = vec![0u64; codewords.len()];
    fn walk(
        codewords: &[BitString],
        h: &[Vec<u64>],
        y: &mut Vec<u8>,
        counts: &mut Vec<u64>,
        visit: &mut dyn FnMut(&[u8], &[u64]),
    ) {
        for (c, hm) in counts.iter_mut().zip(h) {
            *c = *hm.last().unwrap_or(&1);
        }
        visit(y, counts);
        for b in 0..2u8 {
            let mut any = false;
            let child: Vec<Vec<u64>> = codewords
                .iter()
                .zip(h)
                .map(|(x, hm)| {
                    let mut next = Vec::with_capacity(hm.len());
                    let mut acc = 0u64;
                    next.push(0);
                    for (i, &xb) in x.bits().iter().enumerate() {
                        if xb == b {
                            acc += hm[i];
                        }
                        next.push(acc);
                    }
                    any |= acc > 0;
                    next
                })
                .collect();
            if any {
                y.push(b);
                walk(codewords, &child, y, counts, visit);
                y.pop();
            }
        }
    }
    walk(codewords, &root, &mut y, &mut counts, &mut visit);
}

fn exact_dfp_bdc(code: &InnerCode, p: f64) -> ExactDfp {
    let n = code.n;
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut fail = vec![0.0f64; code.codewords.len()];
    for_each_deletion_outcome(&code.codewords, |y, counts| {
        let decoded = argmax_first(counts.iter().copied()) as usize;
        let w = ((n - y.len()) as f64 * lp + y.len() as f64 * lq).exp();
        for (m, &c) in counts.iter().enumerate() {
            if m != decoded && c > 0 {
                fail[m] += c as f64 * w;
            }
        }
    });
    ExactDfp::from_per_message(fail)
}

/// Exact PRC DFP with outputs longer than `cap` either counted as failures
/// (`overflow_fails`) or decoded like any other output.
pub fn exact_dfp_prc(code: &InnerCode, lambda: f64, cap: usize, overflow_fails: bool) -> ExactDfp {
    let runs: Vec<Runs> = code.codewords.iter().map(|x| Runs::of(x.bits())).collect();
    let max_runs = runs.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let mut fail = vec![0.0f64; runs.len()];

    let mut account = |states: &[PrcState]| {
        let ll: Vec<f64> = states.iter().zip(&runs).map(|(s, r)| s.finish(r, lambda)).collect();
        let decoded = argmax_first(ll.iter().copied()) as usize;
        for (m, &l) in ll.iter().enumerate() {
            if m != decoded && l > f64::NEG_INFINITY {
                fail[m] += l.exp();
            }
        }
    };

    // depth-first over received run sequences, sharing DP prefixes
    let start: Vec<PrcState> = runs.iter().map(PrcState::start).collect();
    account(&start);
    let mut stack: Vec<(Vec<PrcState>, u8, usize, usize)> = Vec::new();
    for first in 0..2u8 {
        stack.push((start.clone(), first, 0, 0));
    }
    while let Some((states, bit, depth, used)) = stack.pop() {
        if depth == max_runs {
            continue;
        }
        for c in 1..=cap - used {
            let next: Vec<PrcState> =
                states.iter().zip(&runs).map(|(s, r)| s.push_run(r, bit, c, lambda)).collect();
            if next.iter().all(|s| s.is_impossible()) {
                continue;
            }
            account(&next);
            if used + c < cap {
                stack.push((next, 1 - bit, depth + 1, used + c));
            }
        }
    }

    let overflow = poisson_tail(lambda * code.n as f64, cap as u64 + 1);
    if overflow_fails {
        for f in &mut fail {
            *f += overflow;
        }
    }
    for f in &mut fail {
        *f = f.min(1.0);
    }
    ExactDfp::from_per_message(fail)
}

/// A Monte-Carlo DFP estimate with its 95% Clopper-Pearson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfpEstimate {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub failures: u64,
    pub trials: u64,
    /// The message whose failure rate was measured, when one was singled out.
    pub message: Option<u64>,
}

/// Exact two-sided 95% binomial interval for `x` successes in `n` trials.
pub fn clopper_pearson(x: u64, n: u64) -> (f64, f64) {
    assert!(n > 0 && x <= n);
    let (xf, nf) = (x as f64, n as f64);
    let lower = if x == 0 {
        0.0
    } else {
        Beta::new(xf, nf - xf + 1.0).expect("valid beta").inverse_cdf(0.025)
    };
    let upper = if x == n {
        1.0
    } else {
        Beta::new(xf + 1.0, nf - xf).expect("valid beta").inverse_cdf(0.975)
    };
    (lower, upper)
}

impl DfpEstimate {
    pub fn new(failures: u64, trials: u64, message: Option<u64>) -> Self {
        let (lower, upper) = clopper_pearson(failures, trials);
        DfpEstimate { estimate: failures as f64 / trials as f64, lower, upper, failures, trials, message }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Draws a uniformly random message of `k` bits.
pub fn random_message<R: Rng + ?Sized>(k: usize, rng: &mut R) -> BitString {
    (0..k).map(|_| rng.random::<bool>() as u8).collect()
}

/// How a Monte-Carlo trial chooses its message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialMessage {
    Fixed(u64),
    Uniform,
}

/// Message schedule of [`monte_carlo_dfp`].
///
/// With at most 256 messages, a round-robin pilot over all messages (a
/// tenth of the budget, at least two rounds) narrows the field to the
/// candidates for the worst message: those whose interval reaches the
/// highest lower interval end. The remaining trials cycle through the
/// candidates, and the estimate is the candidate with the highest failure
/// rate over all its trials. Budgets too small for a pilot stay round-robin
/// throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialPlan {
    pub trials: u64,
    pub messages: Option<u64>,
    pub pilot: u64,
}

impl TrialPlan {
    pub fn new(message_len: usize, trials: u64) -> Self {
        let messages = (message_len < 64)
            .then(|| 1u64 << message_len)
            .filter(|&m| m <= ROUND_ROBIN_MAX_MESSAGES);
        let pilot = match messages {
            Some(m) if trials > 2 * m => (trials / 10).max(2 * m),
            Some(_) => trials,
            None => 0,
        };
        TrialPlan { trials, messages, pilot }
    }

    pub fn pilot_message(&self, trial: u64) -> TrialMessage {
        match self.messages {
            Some(m) => TrialMessage::Fixed(trial % m),
            None => TrialMessage::Uniform,
        }
    }

    /// Per-message (failures, trials) of the pilot phase.
    pub fn tally(&self, pilot_failures: &[bool]) -> Vec<(u64, u64)> {
        let m = self.messages.unwrap_or(1) as usize;
        let mut tally = vec![(0u64, 0u64); m];
        for (i, &f) in pilot_failures.iter().enumerate() {
            let t = &mut tally[i % m];
            t.0 += f as u64;
            t.1 += 1;
        }
        tally
    }

    /// Messages that may still be the worst after the pilot, ascending.
    pub fn candidates(tally: &[(u64, u64)]) -> Vec<u64> {
        let intervals: Vec<Option<(f64, f64)>> =
            tally.iter().map(|&(f, n)| (n > 0).then(|| clopper_pearson(f, n))).collect();
        let best_lower = intervals.iter().flatten().map(|i| i.0).fold(0.0, f64::max);
        let candidates: Vec<u64> = intervals
            .iter()
            .enumerate()
            .filter(|(_, i)| i.is_some_and(|(_, upper)| upper >= best_lower))
            .map(|(m, _)| m as u64)
            .collect();
        if candidates.is_empty() {
            (0..tally.len() as u64).collect()
        } else {
            candidates
        }
    }

    pub fn main_message(&self, trial: u64, candidates: &[u64]) -> TrialMessage {
        TrialMessage::Fixed(candidates[((trial - self.pilot) % candidates.len() as u64) as usize])
    }

    /// Combines pilot and main-phase results into the final estimate.
    pub fn estimate(&self, tally: &[(u64, u64)], candidates: &[u64], main_failures: &[bool]) -> DfpEstimate {
        let mut totals: Vec<(u64, u64)> = candidates.iter().map(|&m| tally[m as usize]).collect();
        for (i, &f) in main_failures.iter().enumerate() {
            let t = &mut totals[i % candidates.len()];
            t.0 += f as u64;
            t.1 += 1;
        }
        let mut best = 0;
        for (j, &(f, n)) in totals.iter().enumerate() {
            // f/n > bf/bn without division
            let (bf, bn) = totals[best];
            if n > 0 && (bn == 0 || (f as u128) * (bn as u128) > (bf as u128) * (n as u128)) {
                best = j;
            }
        }
        let (f, n) = totals[best];
        DfpEstimate::new(f, n.max(1), Some(candidates[best]))
    }
}

/// Runs one trial: send `message` (or a random one) and report whether the
/// decoder got it wrong.
pub fn run_trial(code: &dyn InnerCodec, channel: ChannelModel, choice: TrialMessage, rng: RngSpec) -> bool {
    let message = match choice {
        TrialMessage::Fixed(m) => BitString::from_u64(m, code.message_len()),
        TrialMessage::Uniform => random_message(code.message_len(), &mut rng.substream(1).rng()),
    };
    let y = transmit(channel, &code.encode(&message), rng);
    code.decode(&y).map_or(true, |m| m != message)
}

/// Worst-message DFP estimate; trial `i` uses stream `(seed, i)`, so the
/// result does not depend on the thread count.
pub fn monte_carlo_dfp(
    code: &dyn InnerCodec,
    channel: ChannelModel,
    trials: u64,
    rng: RngSpec,
) -> Result<DfpEstimate, InnerError> {
    if trials == 0 {
        return Err(InnerError::InvalidArgument("trials must be at least 1".into()));
    }
    let plan = TrialPlan::new(code.message_len(), trials);
    let spec = |i: u64| RngSpec::new(rng.master_seed, rng.stream_index.wrapping_add(i));
    let Some(_) = plan.messages else {
        let failures = (0..trials)
            .into_par_iter()
            .filter(|&i| run_trial(code, channel, TrialMessage::Uniform, spec(i)))
            .count() as u64;
        return Ok(DfpEstimate::new(failures, trials, None));
    };
    let pilot: Vec<bool> = (0..plan.pilot)
        .into_par_iter()
        .map(|i| run_trial(code, channel, plan.pilot_message(i), spec(i)))
        .collect();
    let tally = plan.tally(&pilot);
    let candidates = TrialPlan::candidates(&tally);
    let main: Vec<bool> = (plan.pilot..trials)
        .into_par_iter()
        .map(|i| run_trial(code, channel, plan.main_message(i, &candidates), spec(i)))
        .collect();
    Ok(plan.estimate(&tally, &candidates, &main))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchStrategy {
    Exhaustive,
    Random,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub strategy: SearchStrategy,
    /// Codebooks to examine.
    pub budget: u64,
    pub rng: RngSpec,
    /// Trials per candidate when exact evaluation is out of range.
    pub mc_trials: u64,
}

/// The n-bit string at position `v` in lexicographic order.
fn lex_word(v: u64, n: usize) -> BitString {
    (0..n).map(|j| ((v >> (n - 1 - j)) & 1) as u8).collect()
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

fn evaluate(code: &InnerCode, channel: ChannelModel, opts: &SearchOptions, salt: u64) -> Result<f64, InnerError> {
    match exact_dfp(code, channel) {
        Ok(e) => Ok(e.max),
        Err(InnerError::TooLarge(_)) => {
            Ok(monte_carlo_dfp(code, channel, opts.mc_trials.max(1), opts.rng.substream(salt))?.estimate)
        }
        Err(e) => Err(e),
    }
}

/// Finds a table code with DFP at most `target_delta`.
///
/// Exhaustive search walks codebooks (sets of 2^k distinct words, assigned
/// to messages in lexicographic order) in lexicographic order and returns
/// the first that qualifies. Random search draws `budget` codebooks and
/// returns the best one if it qualifies. On PRC the output cap is fixed
/// from the target first, and outputs above it count as failures.
pub fn search_base_code(
    channel: ChannelModel,
    k: usize,
    n: usize,
    target_delta: f64,
    opts: SearchOptions,
) -> Result<InnerCode, InnerError> {
    let channel = channel.validate()?;
    if k == 0 || k > MAX_TABLE_K || n < k || n > 63 {
        return Err(InnerError::InvalidArgument(format!("unsupported (k, n) = ({k}, {n})")));
    }
    if opts.budget == 0 {
        return Err(InnerError::InvalidArgument("budget must be at least 1".into()));
    }
    let cap = match channel {
        ChannelModel::Prc(lambda) => Some(prc_cap(lambda, n, target_delta)),
        ChannelModel::Bdc(_) => None,
    };
    let build = |words: Vec<BitString>| -> Result<InnerCode, InnerError> {
        let code = InnerCode::new(k, words, channel)?;
        Ok(match cap {
            Some(c) => code.with_prc_cap(c),
            None => code,
        })
    };
    let size = 1usize << k;
    match opts.strategy {
        SearchStrategy::Exhaustive => {
            let total = binomial(1u128 << n, size as u128);
            if total.is_none_or(|t| t > u128::from(opts.budget)) {
                return Err(InnerError::TooLarge(format!(
                    "C(2^{n}, 2^{k}) codebooks exceed the budget of {}",
                    opts.budget
                )));
            }
            let words = 1u64 << n;
            let mut idx: Vec<u64> = (0..size as u64).collect();
            let mut best: Option<f64> = None;
            loop {
                let code = build(idx.iter().map(|&v| lex_word(v, n)).collect())?;
                let dfp = evaluate(&code, channel, &opts, 0)?;
                if dfp <= target_delta {
                    return Ok(code.with_delta(dfp));
                }
                best = Some(best.map_or(dfp, |b: f64| b.min(dfp)));
                // next combination
                let mut i = size;
                loop {
                    if i == 0 {
                        return Err(InnerError::NotFound { best });
                    }
                    i -= 1;
                    if idx[i] < words - (size - i) as u64 {
                        break;
                    }
                }
                idx[i] += 1;
                for j in i + 1..size {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        }
        SearchStrategy::Random => {
            if size as u64 > 1u64 << n {
                return Err(InnerError::InvalidArgument("more messages than words".into()));
            }
            let scored: Vec<(u64, f64, InnerCode)> = (0..opts.budget)
                .into_par_iter()
                .map(|i| {
                    let mut rng = opts.rng.substream(i.wrapping_mul(2)).rng();
                    let mut seen = HashSet::with_capacity(size);
                    let mut words = Vec::with_capacity(size);
                    while words.len() < size {
                        let w = random_message(n, &mut rng);
                        if seen.insert(w.clone()) {
                            words.push(w);
                        }
                    }
                    let code = build(words)?;
                    let dfp = evaluate(&code, channel, &opts, i.wrapping_mul(2) + 1)?;
                    Ok((i, dfp, code))
                })
                .collect::<Result<_, InnerError>>()?;
            let (_, dfp, code) = scored
                .into_iter()
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .expect("budget ≥ 1");
            if dfp <= target_delta {
                Ok(code.with_delta(dfp))
            } else {
                Err(InnerError::NotFound { best: Some(dfp) })
            }
        }
    }
}
