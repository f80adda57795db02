//! Deletion and repeat channels: sampling and exact likelihoods.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;
use thiserror::Error;

use crate::bitstream::BitString;

/// Largest repeat rate for which Poisson sampling by CDF inversion is supported.
pub const MAX_PRC_RATE: f64 = 30.0;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("deletion probability must lie in (0, 1), got {0}")]
    InvalidDeletionProbability(f64),
    #[error("repeat rate must lie in (0, {MAX_PRC_RATE}], got {0}")]
    InvalidRepeatRate(f64),
}

/// The two channel families handled by this crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "lowercase")]
pub enum ChannelModel {
    /// Each bit is deleted independently with probability `p`.
    Bdc(f64),
    /// Each bit is repeated Poisson(`lambda`) times.
    Prc(f64),
}

impl ChannelModel {
    pub fn bdc(p: f64) -> Result<Self, ChannelError> {
        if p > 0.0 && p < 1.0 {
            Ok(ChannelModel::Bdc(p))
        } else {
            Err(ChannelError::InvalidDeletionProbability(p))
        }
    }

    pub fn prc(lambda: f64) -> Result<Self, ChannelError> {
        if lambda > 0.0 && lambda <= MAX_PRC_RATE {
            Ok(ChannelModel::Prc(lambda))
        } else {
            Err(ChannelError::InvalidRepeatRate(lambda))
        }
    }

    /// Re-checks the parameter range; useful after deserialization.
    pub fn validate(self) -> Result<Self, ChannelError> {
        match self {
            ChannelModel::Bdc(p) => ChannelModel::bdc(p),
            ChannelModel::Prc(l) => ChannelModel::prc(l),
        }
    }

    /// Expected number of received bits per transmitted bit.
    pub fn survival(&self) -> f64 {
        match *self {
            ChannelModel::Bdc(p) => 1.0 - p,
            ChannelModel::Prc(lambda) => lambda,
        }
    }

    pub fn is_bdc(&self) -> bool {
        matches!(self, ChannelModel::Bdc(_))
    }

    pub fn param(&self) -> f64 {
        match *self {
            ChannelModel::Bdc(p) => p,
            ChannelModel::Prc(l) => l,
        }
    }

    pub fn transmit(&self, x: &BitString, rng: RngSpec) -> BitString {
        transmit(*self, x, rng)
    }

    pub fn likelihood(&self, x: &BitString, y: &BitString) -> f64 {
        match *self {
            ChannelModel::Bdc(p) => bdc_likelihood(x, y, p),
            ChannelModel::Prc(l) => prc_likelihood(x, y, l),
        }
    }

    pub fn log_likelihood(&self, x: &BitString, y: &BitString) -> f64 {
        match *self {
            ChannelModel::Bdc(p) => bdc_log_likelihood(x, y, p),
            ChannelModel::Prc(l) => prc_log_likelihood(x, y, l),
        }
    }
}

impl std::fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChannelModel::Bdc(p) => write!(f, "BDC(p={p})"),
            ChannelModel::Prc(l) => write!(f, "PRC(lambda={l})"),
        }
    }
}

/// Identifies one deterministic random stream.
///
/// Streams are ChaCha8 keyed by `master_seed` with `stream_index` selecting
/// the ChaCha stream, so distinct indices never overlap and any trial can be
/// replayed on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        RngSpec { master_seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// A child stream, for consumers that need more than one independent
    /// source per trial. The child's master seed mixes in the parent index.
    pub fn substream(&self, salt: u64) -> RngSpec {
        let mixed = splitmix64(self.master_seed ^ splitmix64(self.stream_index.wrapping_add(salt)));
        RngSpec { master_seed: mixed, stream_index: salt }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sends `x` through the channel.
pub fn transmit(channel: ChannelModel, x: &BitString, rng: RngSpec) -> BitString {
    let mut rng = rng.rng();
    transmit_with(channel, x, &mut rng, |_| {})
}

/// Like [`transmit`], also returning for every received bit the index of the
/// transmitted bit it came from. Same stream, same output.
pub fn transmit_with_origins(
    channel: ChannelModel,
    x: &BitString,
    rng: RngSpec,
) -> (BitString, Vec<usize>) {
    let mut rng = rng.rng();
    let mut origins = Vec::with_capacity(x.len());
    let y = transmit_with(channel, x, &mut rng, |i| origins.push(i));
    (y, origins)
}

/// Channel pass driven by a caller-owned RNG. `on_emit` receives the source
/// index of every output bit in order.
pub fn transmit_with<R: Rng + ?Sized>(
    channel: ChannelModel,
    x: &BitString,
    rng: &mut R,
    mut on_emit: impl FnMut(usize),
) -> BitString {
    let mut out = BitString::with_capacity(x.len());
    match channel {
        ChannelModel::Bdc(p) => {
            for (i, &b) in x.bits().iter().enumerate() {
                if rng.random::<f64>() >= p {
                    out.push(b);
                    on_emit(i);
                }
            }
        }
        ChannelModel::Prc(lambda) => {
            let sampler = PoissonSampler::new(lambda);
            for (i, &b) in x.bits().iter().enumerate() {
                for _ in 0..sampler.sample(rng) {
                    out.push(b);
                    on_emit(i);
                }
            }
        }
    }
    out
}

/// Poisson sampling by inversion of a precomputed CDF.
#[derive(Debug, Clone)]
pub struct PoissonSampler {
    cdf: Vec<f64>,
}

impl PoissonSampler {
    pub fn new(lambda: f64) -> Self {
        assert!(lambda > 0.0 && lambda <= MAX_PRC_RATE, "rate out of range: {lambda}");
        let mut cdf = Vec::new();
        let mut pmf = (-lambda).exp();
        let mut acc = 0.0;
        let mut j = 0u32;
        loop {
            acc += pmf;
            cdf.push(acc);
            j += 1;
            pmf *= lambda / f64::from(j);
            if (f64::from(j) > lambda && pmf < 1e-18) || acc >= 1.0 {
                break;
            }
        }
        PoissonSampler { cdf }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        // first index whose cumulative mass exceeds u
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

/// Number of distinct deletion patterns turning `x` into `y`, i.e. the
/// number of occurrences of `y` as a subsequence of `x`. `None` on `u128`
/// overflow.
pub fn subsequence_count(x: &BitString, y: &BitString) -> Option<u128> {
    subsequence_count_slices(x.bits(), y.bits())
}

pub(crate) fn subsequence_count_slices(x: &[u8], y: &[u8]) -> Option<u128> {
    if y.len() > x.len() {
        return Some(0);
    }
    // counts[j] = occurrences of y[..j] in the processed prefix of x
    let mut counts = vec![0u128; y.len() + 1];
    counts[0] = 1;
    for (i, &xb) in x.iter().enumerate() {
        // y[..j] cannot fit into i+1 bits for j > i+1
        let top = y.len().min(i + 1);
        for j in (1..=top).rev() {
            if y[j - 1] == xb {
                counts[j] = counts[j].checked_add(counts[j - 1])?;
            }
        }
    }
    Some(counts[y.len()])
}

/// Probability that BDC(p) maps `x` to exactly `y`.
pub fn bdc_likelihood(x: &BitString, y: &BitString, p: f64) -> f64 {
    if y.len() > x.len() {
        return 0.0;
    }
    if x.len() <= 64 {
        bdc_likelihood_linear(x.bits(), y.bits(), p)
    } else {
        bdc_log_likelihood(x, y, p).exp()
    }
}

fn bdc_likelihood_linear(x: &[u8], y: &[u8], p: f64) -> f64 {
    let q = 1.0 - p;
    // prob[j] = Pr[prefix of x maps to y[..j]]
    let mut prob = vec![0.0f64; y.len() + 1];
    prob[0] = 1.0;
    for &xb in x {
        for j in (1..=y.len()).rev() {
            let keep = if y[j - 1] == xb { prob[j - 1] * q } else { 0.0 };
            prob[j] = prob[j] * p + keep;
        }
        prob[0] *= p;
    }
    prob[y.len()]
}

/// Natural log of [`bdc_likelihood`], accumulated in log space so long
/// strings do not underflow. Returns `-inf` for impossible outcomes.
pub fn bdc_log_likelihood(x: &BitString, y: &BitString, p: f64) -> f64 {
    let (x, y) = (x.bits(), y.bits());
    if y.len() > x.len() {
        return f64::NEG_INFINITY;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut logp = vec![f64::NEG_INFINITY; y.len() + 1];
    logp[0] = 0.0;
    for &xb in x {
        for j in (1..=y.len()).rev() {
            let delete = logp[j] + lp;
            let keep = if y[j - 1] == xb { logp[j - 1] + lq } else { f64::NEG_INFINITY };
            logp[j] = log_add(delete, keep);
        }
        logp[0] += lp;
    }
    logp[y.len()]
}

/// Probability that PRC(lambda) maps `x` to exactly `y`.
pub fn prc_likelihood(x: &BitString, y: &BitString, lambda: f64) -> f64 {
    prc_log_likelihood(x, y, lambda).exp()
}

/// Natural log of [`prc_likelihood`].
pub fn prc_log_likelihood(x: &BitString, y: &BitString, lambda: f64) -> f64 {
    prc_log_likelihood_runs(&Runs::of(x.bits()), &Runs::of(y.bits()), lambda)
}

/// Run-length view of a bit string: `(bit, length)` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Runs(pub Vec<(u8, usize)>);

impl Runs {
    pub fn of(bits: &[u8]) -> Runs {
        let mut runs: Vec<(u8, usize)> = Vec::new();
        for &b in bits {
            match runs.last_mut() {
                Some((bit, len)) if *bit == b => *len += 1,
                _ => runs.push((b, 1)),
            }
        }
        Runs(runs)
    }

    pub fn total_len(&self) -> usize {
        self.0.iter().map(|r| r.1).sum()
    }
}

/// PRC log-likelihood over run-length encodings.
///
/// Every repeat pattern producing `y` groups the runs of `x` into contiguous
/// blocks, one per run of `y`: inside block `j` the runs carrying the other
/// bit are repeated zero times and the runs carrying `y`'s bit jointly emit
/// `c_j` copies, the last of them emitting at least one. Sums of independent
/// Poisson counts are Poisson, so a block contributes
/// `Pois(λ(S+ℓ); c) − Pois(λS; c)·e^{−λℓ}` where `S` is the same-bit length
/// before the closing run of length `ℓ`. The DP runs over (runs of `y`
/// completed, next run of `x`) in O(|runs y|·|runs x|²).
pub fn prc_log_likelihood_runs(x: &Runs, y: &Runs, lambda: f64) -> f64 {
    if y.0.len() > x.0.len() {
        return f64::NEG_INFINITY;
    }
    let mut state = PrcState::start(x);
    for (j, &(bit, c)) in y.0.iter().enumerate() {
        state = state.push_run_bounded(x, bit, c, lambda, y.0.len() - j - 1);
        if state.is_impossible() {
            return f64::NEG_INFINITY;
        }
    }
    state.finish(x, lambda)
}

/// Partial PRC likelihood DP after a prefix of the runs of `y`.
///
/// `log_mass[a]` is the log-probability that runs `..a` of `x` produced
/// exactly the consumed prefix. Extending one run at a time lets callers
/// share work between received strings with a common prefix.
#[derive(Debug, Clone)]
pub struct PrcState {
    log_mass: Vec<f64>,
}

impl PrcState {
    pub fn start(x: &Runs) -> PrcState {
        let mut log_mass = vec![f64::NEG_INFINITY; x.0.len() + 1];
        log_mass[0] = 0.0;
        PrcState { log_mass }
    }

    /// True when no repeat pattern can produce the consumed prefix.
    pub fn is_impossible(&self) -> bool {
        self.log_mass.iter().all(|&v| v == f64::NEG_INFINITY)
    }

    pub fn push_run(&self, x: &Runs, bit: u8, c: usize, lambda: f64) -> PrcState {
        self.push_run_bounded(x, bit, c, lambda, 0)
    }

    /// [`PrcState::push_run`] when `runs_after` more runs of `y` will follow;
    /// each needs at least one run of `x`, which prunes the DP to a band.
    pub fn push_run_bounded(&self, x: &Runs, bit: u8, c: usize, lambda: f64, runs_after: usize) -> PrcState {
        let xr = &x.0;
        let n_x = xr.len();
        let last_end = n_x.saturating_sub(runs_after);
        let ln_lambda = lambda.ln();
        let ln_fact = ln_factorial(c as u64);
        let log_pois = |mean_len: usize| -> f64 {
            if mean_len == 0 {
                return f64::NEG_INFINITY;
            }
            let mu = lambda * mean_len as f64;
            -mu + c as f64 * (ln_lambda + (mean_len as f64).ln()) - ln_fact
        };
        let mut next = vec![f64::NEG_INFINITY; n_x + 1];
        for (a, &base) in self.log_mass.iter().enumerate() {
            if base == f64::NEG_INFINITY {
                continue;
            }
            let (mut same, mut opp) = (0usize, 0usize);
            for e in a..last_end {
                let (xb, len) = xr[e];
                if xb == bit {
                    let hi = log_pois(same + len);
                    let lo = log_pois(same) - lambda * len as f64;
                    let block = if lo == f64::NEG_INFINITY {
                        hi
                    } else {
                        hi + (-(lo - hi).exp()).ln_1p()
                    };
                    let term = base - lambda * opp as f64 + block;
                    next[e + 1] = log_add(next[e + 1], term);
                    same += len;
                } else {
                    opp += len;
                }
            }
        }
        PrcState { log_mass: next }
    }

    /// Log-likelihood of the consumed prefix being the whole output: the
    /// unused runs of `x` must all repeat zero times.
    pub fn finish(&self, x: &Runs, lambda: f64) -> f64 {
        let mut suffix = 0usize;
        let mut acc = f64::NEG_INFINITY;
        for a in (0..self.log_mass.len()).rev() {
            acc = log_add(acc, self.log_mass[a] - lambda * suffix as f64);
            if a > 0 {
                suffix += x.0[a - 1].1;
            }
        }
        acc
    }
}

/// Exact Pr[Poisson(mu) ≥ m].
///
/// Sums whichever side of the distribution is smaller so the result keeps
/// full relative precision in the far tail.
pub fn poisson_tail(mu: f64, m: u64) -> f64 {
    assert!(mu > 0.0, "Poisson mean must be positive");
    if m == 0 {
        return 1.0;
    }
    let log_pmf = |j: u64| -mu + j as f64 * mu.ln() - ln_factorial(j);
    if (m as f64) > mu {
        // upper tail, terms decrease geometrically past the mode
        let mut sum = 0.0;
        let mut j = m;
        loop {
            let term = log_pmf(j).exp();
            sum += term;
            if term <= sum * 1e-17 || term == 0.0 && j as f64 > 2.0 * mu + 10.0 {
                break;
            }
            j += 1;
        }
        sum.min(1.0)
    } else {
        let lower: f64 = (0..m).map(|j| log_pmf(j).exp()).sum();
        (1.0 - lower).clamp(0.0, 1.0)
    }
}

/// Pr[Poisson(mu) = j].
pub fn poisson_pmf(mu: f64, j: u64) -> f64 {
    (-mu + j as f64 * mu.ln() - ln_factorial(j)).exp()
}

pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstream::bits;
    use std::collections::HashMap;

    /// Brute force over all deletion patterns.
    fn bdc_outcomes(x: &BitString, p: f64) -> HashMap<BitString, f64> {
        let n = x.len();
        let mut out = HashMap::new();
        for mask in 0u32..(1 << n) {
            let y: BitString = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| x[i]).collect();
            let kept = mask.count_ones() as i32;
            *out.entry(y).or_insert(0.0) += p.powi(n as i32 - kept) * (1.0 - p).powi(kept);
        }
        out
    }

    /// Position-by-position PRC DP: L[i][j] sums over the number r of copies
    /// emitted by x[i-1], which must all equal that bit.
    fn prc_positional(x: &BitString, y: &BitString, lambda: f64) -> f64 {
        let (n, m) = (x.len(), y.len());
        let mut table = vec![vec![0.0f64; m + 1]; n + 1];
        table[0][0] = 1.0;
        for i in 1..=n {
            for j in 0..=m {
                let mut acc = 0.0;
                let mut r = 0;
                loop {
                    acc += table[i - 1][j - r] * poisson_pmf(lambda, r as u64);
                    if r == j || y[j - r - 1] != x[i - 1] {
                        break;
                    }
                    r += 1;
                }
                table[i][j] = acc;
            }
        }
        table[n][m]
    }

    fn all_strings(max_len: usize) -> Vec<BitString> {
        (0..=max_len)
            .flat_map(|len| (0..1u64 << len).map(move |v| BitString::from_u64(v, len)))
            .collect()
    }

    #[test]
    fn bdc_examples() {
        assert!((bdc_likelihood(&bits("101"), &bits("11"), 0.5) - 0.125).abs() < 1e-15);
        for p in [0.1, 0.37, 0.9] {
            let expected = 3.0 * p * (1.0 - p) * (1.0 - p);
            assert!((bdc_likelihood(&bits("111"), &bits("11"), p) - expected).abs() < 1e-15);
            let x = bits("0110100");
            assert!((bdc_likelihood(&x, &x, p) - (1.0 - p).powi(7)).abs() < 1e-15);
        }
        assert_eq!(bdc_likelihood(&bits("01"), &bits("10"), 0.3), 0.0);
        assert_eq!(bdc_likelihood(&bits("01"), &bits("011"), 0.3), 0.0);
    }

    #[test]
    fn subsequence_counts_match_brute_force() {
        for x in all_strings(6) {
            let mut counts: HashMap<BitString, u128> = HashMap::new();
            for mask in 0u32..(1 << x.len()) {
                let y: BitString =
                    (0..x.len()).filter(|i| mask >> i & 1 == 1).map(|i| x[i]).collect();
                *counts.entry(y).or_default() += 1;
            }
            for (y, c) in counts {
                assert_eq!(subsequence_count(&x, &y), Some(c), "x={x} y={y}");
            }
        }
        assert_eq!(subsequence_count(&bits("111"), &bits("11")), Some(3));
    }

    #[test]
    fn bdc_likelihood_matches_enumeration() {
        for x in all_strings(7).into_iter().step_by(7) {
            for (y, prob) in bdc_outcomes(&x, 0.23) {
                let got = bdc_likelihood(&x, &y, 0.23);
                assert!((got - prob).abs() < 1e-14, "x={x} y={y}");
                assert!((bdc_log_likelihood(&x, &y, 0.23).exp() - prob).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn long_bdc_uses_log_space() {
        let x: BitString = (0..2000).map(|i| (i % 3 == 0) as u8).collect();
        let y = x.slice(0, 1500);
        let ll = bdc_log_likelihood(&x, &y, 0.4);
        assert!(ll.is_finite() && ll < -500.0);
    }

    #[test]
    fn prc_examples() {
        let lambda = 1.3f64;
        assert!((prc_likelihood(&bits("1"), &BitString::new(), lambda) - (-lambda).exp()).abs() < 1e-15);
        assert_eq!(prc_likelihood(&bits("1"), &bits("10"), lambda), 0.0);
        let two = (-lambda).exp() * lambda * lambda / 2.0;
        assert!((prc_likelihood(&bits("1"), &bits("11"), lambda) - two).abs() < 1e-15);
    }

    #[test]
    fn prc_run_dp_matches_positional_dp() {
        let xs = all_strings(5);
        let ys = all_strings(7);
        for lambda in [0.4, 1.0, 2.5] {
            for x in xs.iter().step_by(3) {
                for y in &ys {
                    let slow = prc_positional(x, y, lambda);
                    let fast = prc_likelihood(x, y, lambda);
                    assert!(
                        (slow - fast).abs() <= 1e-12 * slow.max(1e-300) + 1e-300,
                        "x={x} y={y} lambda={lambda}: {slow} vs {fast}"
                    );
                }
            }
        }
    }

    #[test]
    fn prc_long_inputs_stay_finite() {
        let x: BitString = (0..24).map(|i| ((i / 3) % 2) as u8).collect();
        let y: BitString = x.bits().iter().flat_map(|&b| std::iter::repeat_n(b, 20)).collect();
        let ll = prc_log_likelihood(&x, &y, 20.0);
        assert!(ll.is_finite());
    }

    #[test]
    fn poisson_tail_examples() {
        assert_eq!(poisson_tail(1.0, 0), 1.0);
        assert!((poisson_tail(1.0, 1) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((poisson_tail(2.0, 3) - (1.0 - (-2.0f64).exp() * 5.0)).abs() < 1e-15);
        // upper and lower branches agree around the mean
        for m in 5..15 {
            let upper: f64 = (m..200).map(|j| poisson_pmf(9.5, j)).sum();
            assert!((poisson_tail(9.5, m) - upper).abs() < 1e-14);
        }
        assert!(poisson_tail(1.0, 40) > 0.0 && poisson_tail(1.0, 40) < 1e-45);
    }

    #[test]
    fn transmit_basics() {
        let x = bits("10110");
        assert_eq!(transmit(ChannelModel::Bdc(1e-12), &x, RngSpec::new(3, 4)), x);
        assert!(transmit(ChannelModel::Prc(2.0), &BitString::new(), RngSpec::new(3, 4)).is_empty());
        let a = transmit(ChannelModel::Prc(1.0), &x, RngSpec::new(9, 1));
        let b = transmit(ChannelModel::Prc(1.0), &x, RngSpec::new(9, 1));
        assert_eq!(a, b);
        let (c, origins) = transmit_with_origins(ChannelModel::Prc(1.0), &x, RngSpec::new(9, 1));
        assert_eq!(a, c);
        assert!(origins.windows(2).all(|w| w[0] <= w[1]));
        assert!(origins.iter().zip(c.bits()).all(|(&o, &b)| x[o] == b));
    }

    #[test]
    fn bdc_mean_output_length() {
        let mut x = BitString::repeat(0, 1000);
        x.extend_from(&BitString::repeat(1, 1000));
        let trials = 100_000u64;
        let total: usize = (0..trials)
            .map(|t| transmit(ChannelModel::Bdc(0.5), &x, RngSpec::new(17, t)).len())
            .sum();
        let mean = total as f64 / trials as f64;
        assert!((990.0..=1010.0).contains(&mean), "mean {mean}");
    }

    #[test]
    fn poisson_sampler_moments() {
        let sampler = PoissonSampler::new(3.0);
        let mut rng = RngSpec::new(1, 2).rng();
        let n = 200_000;
        let samples: Vec<usize> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
        let mean = samples.iter().sum::<usize>() as f64 / n as f64;
        let var = samples.iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((mean - 3.0).abs() < 0.03, "mean {mean}");
        assert!((var - 3.0).abs() < 0.06, "var {var}");
    }

    #[test]
    fn channel_validation() {
        assert!(ChannelModel::bdc(0.0).is_err());
        assert!(ChannelModel::bdc(1.0).is_err());
        assert!(ChannelModel::prc(0.0).is_err());
        assert!(ChannelModel::prc(31.0).is_err());
        assert_eq!(ChannelModel::bdc(0.1).unwrap().survival(), 0.9);
        assert_eq!(ChannelModel::prc(2.0).unwrap().survival(), 2.0);
        let json = serde_json::to_string(&ChannelModel::Bdc(0.1)).unwrap();
        assert_eq!(json, r#"{"kind":"bdc","param":0.1}"#);
    }
}
