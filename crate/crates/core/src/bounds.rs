//! Closed-form bounds of the construction and exact tails to check them.
//!
//! Logarithms are natural throughout. Every bound is clamped to 1: a bound
//! above 1 says nothing, but it is not an error.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::ChannelModel;

/// Exponent on δ in the per-symbol failure probability.
pub const C1: f64 = 1.0 / 34.0;
/// Rate constant of the positioning-failure term.
pub const C2: f64 = 1.0 / 256.0;
/// Multiplier of the positioning-failure term.
pub const C3: f64 = 6.0;
/// Partition face length constant: α = ⌈C·ln(1/δ)/s⌉.
pub const C_ALPHA: f64 = 4.0 / 33.0;

/// Largest number of trials for exact binomial summation.
pub const MAX_EXACT_TRIALS: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("{name} = {value} violates {requirement}")]
    Precondition { name: &'static str, value: f64, requirement: &'static str },
    #[error("{0} trials exceeds the exact summation limit")]
    TooLarge(u64),
}

fn require(ok: bool, name: &'static str, value: f64, requirement: &'static str) -> Result<(), BoundError> {
    if ok {
        Ok(())
    } else {
        Err(BoundError::Precondition { name, value, requirement })
    }
}

fn clamp(x: f64) -> f64 {
    x.min(1.0)
}

/// `Pr[|Bin(p, n) − pn| > εpn] ≤ 2·exp(−ε²pn/4)`.
pub fn chernoff_binomial(p: f64, n: u64, eps: f64) -> Result<f64, BoundError> {
    require(p > 0.0 && p < 0.5, "p", p, "0 < p < 1/2")?;
    require(eps > 0.0 && eps < 0.5, "epsilon", eps, "0 < epsilon < 1/2")?;
    require(n >= 1, "n", n as f64, "n ≥ 1")?;
    Ok(clamp(2.0 * (-eps * eps * p * n as f64 / 4.0).exp()))
}

/// `Pr[|Poisson(λ) − λ| > ελ] ≤ 2·exp(−ε²λ/4)`.
pub fn chernoff_poisson(lambda: f64, eps: f64) -> Result<f64, BoundError> {
    require(lambda > 0.0, "lambda", lambda, "lambda > 0")?;
    require(eps > 0.0 && eps < 0.5, "epsilon", eps, "0 < epsilon < 1/2")?;
    Ok(clamp(2.0 * (-eps * eps * lambda / 4.0).exp()))
}

/// `Pr[Bin(p, n) > (α+1)pn] ≤ exp(−½·ln(α)·α·p·n)`.
pub fn binomial_upper_tail_bound(alpha: f64, p: f64, n: u64) -> Result<f64, BoundError> {
    require(alpha > std::f64::consts::E.powi(2), "alpha", alpha, "alpha > e^2")?;
    require(p > 0.0 && p < 1.0 / (alpha + 1.0), "p", p, "0 < p < 1/(alpha+1)")?;
    require(n >= 1, "n", n as f64, "n ≥ 1")?;
    Ok(clamp((-0.5 * alpha.ln() * alpha * p * n as f64).exp()))
}

/// Per-delimiter positioning failure, `6·exp(−min{d, d²/k}/256)`.
pub fn positioning_failure_bound(d: f64, k: f64) -> f64 {
    clamp(C3 * (-C2 * d.min(d * d / k)).exp())
}

/// The recursive-step DFP bound split into its two terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecursiveDfpBound {
    /// `Pr[Bin(δ^{c1}, k+2t) > t]`, summed exactly.
    pub symbol_term: f64,
    /// `c3·(k+2t)·exp(−c2·min{d, d²/k})`, unclamped.
    pub positioning_term: f64,
    pub total: f64,
}

/// `δ′ ≤ Pr[Bin(δ^{c1}, k+2t) > t] + c3·(k+2t)·exp(−c2·min{d, d²/k})`.
pub fn recursive_dfp_bound(delta: f64, k: u64, t: u64, d: f64) -> Result<RecursiveDfpBound, BoundError> {
    require(delta > 0.0 && delta < 1.0, "delta", delta, "0 < delta < 1")?;
    require(k >= 1, "k", k as f64, "k ≥ 1")?;
    require(t >= 1, "t", t as f64, "t ≥ 1")?;
    require(d > 0.0, "d", d, "d > 0")?;
    let blocks = k + 2 * t;
    if blocks > MAX_EXACT_TRIALS {
        return Err(BoundError::TooLarge(blocks));
    }
    let symbol_term = binomial_tail_above(delta.powf(C1), blocks, t);
    let kf = k as f64;
    let positioning_term = C3 * blocks as f64 * (-C2 * d.min(d * d / kf)).exp();
    Ok(RecursiveDfpBound { symbol_term, positioning_term, total: clamp(symbol_term + positioning_term) })
}

/// Bound on the cumulative rate-loss factor:
/// `exp(2·k^{−1/3} / (1 − k^{−1/3}))`.
pub fn rate_overhead_x(k_base: f64) -> Result<f64, BoundError> {
    require(k_base >= 2.0, "k_base", k_base, "k_base ≥ 2")?;
    let r = k_base.powf(-1.0 / 3.0);
    Ok((2.0 * r / (1.0 - r)).exp())
}

/// The product `Π_j (1 + k_j^{−1/3})²` over the message lengths
/// `k_j = k_base^{2^j}` of `levels` consecutive squaring steps.
pub fn rate_overhead_product(k_base: f64, levels: u32) -> f64 {
    let mut x = 1.0;
    let mut k = k_base;
    for _ in 0..levels {
        x *= (1.0 + k.powf(-1.0 / 3.0)).powi(2);
        k *= k;
    }
    x
}

/// `exp(2·k0^{−1/3}/(1 − k0^{−1/3}))·(1 + δ0^{c1/2})·r0`.
pub fn final_rate_bound(k0: f64, delta0: f64, r0: f64) -> Result<f64, BoundError> {
    require(delta0 > 0.0 && delta0 < 1.0, "delta0", delta0, "0 < delta0 < 1")?;
    require(r0 > 0.0, "r0", r0, "r0 > 0")?;
    Ok(rate_overhead_x(k0)? * (1.0 + delta0.powf(C1 / 2.0)) * r0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InnerFailureBound {
    /// `min(1, 4·δ^{1/33})`.
    pub value: f64,
    /// True when `4·δ^{1/33} ≤ δ^{1/34}`, so the simpler form also holds.
    pub simple_form_holds: bool,
}

/// Per-symbol failure after delimiter decoding, `4·δ^{1/33}`.
pub fn inner_failure_bound(delta: f64) -> Result<InnerFailureBound, BoundError> {
    require(delta > 0.0 && delta < 1.0, "delta", delta, "0 < delta < 1")?;
    inner_failure_bound_ln(delta.ln())
}

/// [`inner_failure_bound`] taking `ln δ`, for δ below the f64 range.
pub fn inner_failure_bound_ln(ln_delta: f64) -> Result<InnerFailureBound, BoundError> {
    require(ln_delta < 0.0, "ln delta", ln_delta, "ln delta < 0")?;
    let lhs = 4f64.ln() + ln_delta / 33.0;
    Ok(InnerFailureBound { value: clamp(lhs.exp()), simple_form_holds: lhs <= ln_delta / 34.0 })
}

/// The unsimplified per-symbol bound `δ^{1−8C} + 2δ^{C/4} + δ^C`.
pub fn inner_failure_components(delta: f64) -> f64 {
    let c = C_ALPHA;
    clamp(delta.powf(1.0 - 8.0 * c) + 2.0 * delta.powf(c / 4.0) + delta.powf(c))
}

/// `Pr[F > f_estimate] ≤ 2·exp(−α·s/16)`.
pub fn underestimation_bound(alpha: f64, survival: f64) -> f64 {
    clamp(2.0 * (-alpha * survival / 16.0).exp())
}

/// Probability that all `alpha` bits of a face vanish: `p^α` or `e^{−λα}`.
pub fn face_loss_probability(channel: ChannelModel, alpha: f64) -> f64 {
    match channel {
        ChannelModel::Bdc(p) => p.powf(alpha),
        ChannelModel::Prc(lambda) => (-lambda * alpha).exp(),
    }
}

/// Likelihood inflation from cutting up to 4α extra bits at each end:
/// `p^{−8α}` (BDC) or `e^{8αλ}` (PRC). Not clamped; it is a ratio.
pub fn zeta_common(channel: ChannelModel, alpha: f64) -> f64 {
    match channel {
        ChannelModel::Bdc(p) => p.powf(-8.0 * alpha),
        ChannelModel::Prc(lambda) => (8.0 * alpha * lambda).exp(),
    }
}

/// Chance that under half the expected bits survive among the 4α bits at
/// either end of an inner codeword: `2·exp(−α·s/4)`.
pub fn delta_extreme(alpha: f64, survival: f64) -> f64 {
    clamp(2.0 * (-alpha * survival / 4.0).exp())
}

/// Exact `Pr[Bin(p, n) > t]` by streaming summation of log pmf terms.
pub fn binomial_tail_above(p: f64, n: u64, t: u64) -> f64 {
    if t >= n {
        return 0.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let start = t + 1;
    let ln_choose = statrs::function::factorial::ln_binomial(n, start);
    let mut log_term = ln_choose + start as f64 * lp + (n - start) as f64 * lq;
    let ratio = lp - lq;
    let mut sum = 0.0;
    for j in start..=n {
        let term = log_term.exp();
        sum += term;
        if j as f64 > p * n as f64 && term < sum * 1e-18 {
            break;
        }
        // pmf(j+1)/pmf(j) = (n−j)/(j+1)·p/q
        log_term += ((n - j) as f64).ln() - ((j + 1) as f64).ln() + ratio;
    }
    sum.min(1.0)
}

/// Exact `Pr[X ≤ t]` for `X ~ Bin(p, n)`.
pub fn binomial_cdf(p: f64, n: u64, t: u64) -> f64 {
    if t >= n {
        return 1.0;
    }
    (1.0 - binomial_tail_above(p, n, t)).max(0.0)
}

/// Exact `Pr[|Bin(p, n) − pn| > εpn]`.
pub fn binomial_deviation(p: f64, n: u64, eps: f64) -> f64 {
    let mean = p * n as f64;
    let lo = mean - eps * mean;
    let hi = mean + eps * mean;
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let ln_fact = statrs::function::factorial::ln_factorial;
    (0..=n)
        .filter(|&j| (j as f64) < lo || (j as f64) > hi)
        .map(|j| (ln_fact(n) - ln_fact(j) - ln_fact(n - j) + j as f64 * lp + (n - j) as f64 * lq).exp())
        .sum::<f64>()
        .min(1.0)
}

/// Exact `Pr[|Poisson(λ) − λ| > ελ]`.
pub fn poisson_deviation(lambda: f64, eps: f64) -> f64 {
    let lo = lambda - eps * lambda;
    let hi = lambda + eps * lambda;
    let below: f64 = (0..)
        .take_while(|&j| (j as f64) < lo)
        .map(|j| crate::channel::poisson_pmf(lambda, j))
        .sum();
    // first integer strictly above hi
    let above_from = hi.floor() as u64 + 1;
    (below + crate::channel::poisson_tail(lambda, above_from)).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{Binomial, DiscreteCDF, Poisson};

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn chernoff_binomial_examples() {
        assert!(chernoff_binomial(0.5, 100, 0.2).is_err());
        assert_eq!(chernoff_binomial(0.499, 100, 0.2).unwrap(), 1.0);
        let b = chernoff_binomial(0.1, 10_000, 0.3).unwrap();
        assert!(close(b, 2.0 * (-22.5f64).exp(), 1e-12));
        assert!(close(b, 3.4e-10, 0.02));
        let exact = binomial_deviation(0.1, 200, 0.3);
        assert!(exact <= chernoff_binomial(0.1, 200, 0.3).unwrap());
    }

    #[test]
    fn chernoff_poisson_examples() {
        let b = chernoff_poisson(400.0, 0.25).unwrap();
        assert!(close(b, 3.86e-3, 0.002));
        assert!(poisson_deviation(20.0, 0.4) <= chernoff_poisson(20.0, 0.4).unwrap());
        assert_eq!(chernoff_poisson(5.0, 1e-6).unwrap(), 1.0);
        assert!(chernoff_poisson(5.0, 0.5).is_err());
    }

    #[test]
    fn binomial_upper_tail_examples() {
        let b = binomial_upper_tail_bound(8.0, 0.01, 1000).unwrap();
        assert!(close(b.ln(), -0.5 * 8f64.ln() * 80.0, 1e-12));
        assert!(close(b, 7e-37, 0.1), "{b}");
        let exact = binomial_tail_above(0.01, 500, 45);
        assert!(exact <= binomial_upper_tail_bound(8.0, 0.01, 500).unwrap());
        assert!(binomial_upper_tail_bound(std::f64::consts::E.powi(2), 0.01, 10).is_err());
    }

    #[test]
    fn exact_tails_match_statrs() {
        for &(p, n, t) in &[(0.1, 200u64, 30u64), (0.3, 1000, 280), (0.131, 96, 16), (0.5, 51, 25), (0.01, 500, 3)] {
            let expected = 1.0 - Binomial::new(p, n).unwrap().cdf(t);
            let got = binomial_tail_above(p, n, t);
            assert!((got - expected).abs() < 1e-12, "p={p} n={n} t={t}: {got} vs {expected}");
        }
        for &(l, eps) in &[(20.0, 0.4), (100.0, 0.2), (3.0, 0.45)] {
            let pois = Poisson::new(l).unwrap();
            let lo = l - eps * l;
            let hi = l + eps * l;
            let below = if lo > 0.0 { pois.cdf((lo.ceil() as u64).saturating_sub(1)) } else { 0.0 };
            let expected = below + (1.0 - pois.cdf(hi.floor() as u64));
            assert!((poisson_deviation(l, eps) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn recursive_bound_example() {
        let b = recursive_dfp_bound(1e-30, 64, 16, 16.0).unwrap();
        assert!(close(1e-30f64.powf(1.0 / 34.0), 0.131, 0.01));
        assert!(b.symbol_term > 0.05 && b.symbol_term < 0.2, "{}", b.symbol_term);
        assert!(close(b.positioning_term, 6.0 * 96.0 * (-4.0f64 / 256.0).exp(), 1e-12));
        assert_eq!(b.total, 1.0);
        assert!(recursive_dfp_bound(0.5, 4, 0, 4.0).is_err());
    }

    #[test]
    fn recursive_bound_monotone() {
        // Going from t to t+1 changes Pr[Bin(q, k+2t) > t] by
        // P(t)q² − P(t+1)(1−q)², which is ≤ 0 whenever q ≤ 1/2. The
        // positioning term grows with k+2t, so the total is not monotone in t.
        for delta in [1e-40, 1e-12, 2f64.powi(-34)] {
            for k in [1u64, 16, 64, 256] {
                let mut prev_t = f64::INFINITY;
                for t in 1..40 {
                    let b = recursive_dfp_bound(delta, k, t, 4096.0).unwrap();
                    assert!(b.symbol_term <= prev_t * (1.0 + 1e-12), "delta={delta} k={k} t={t}");
                    prev_t = b.symbol_term;
                }
                let mut prev_d = f64::INFINITY;
                for d in (1..200).map(f64::from) {
                    let b = recursive_dfp_bound(delta, k, 8, d * 10.0).unwrap();
                    assert!(b.total <= prev_d + 1e-15);
                    prev_d = b.total;
                }
            }
        }
    }

    #[test]
    fn rate_overhead_examples() {
        assert!((rate_overhead_x(64.0).unwrap() - (2.0f64 / 3.0).exp()).abs() < 1e-12);
        assert!(rate_overhead_x(1e9).unwrap() < 1.003);
        assert!(rate_overhead_product(16.0, 3) <= rate_overhead_x(16.0).unwrap());
        assert!(rate_overhead_x(1.5).is_err());
    }

    #[test]
    fn final_rate_examples() {
        let r = final_rate_bound(1000.0, 1e-6, 0.1).unwrap();
        let expected = (0.2f64 / 0.9).exp() * (1.0 + 10f64.powf(-3.0 / 34.0)) * 0.1;
        assert!(close(r, expected, 1e-14));
        assert!(close(r, 0.1 * 1.2488 * 1.8160, 1e-3), "{r}");
        let mut prev = f64::INFINITY;
        for k0 in [8.0, 64.0, 1e3, 1e6, 1e12] {
            let r = final_rate_bound(k0, 1e-6, 0.1).unwrap();
            assert!(r < prev && r > 0.1);
            prev = r;
        }
        assert!(final_rate_bound(1e30, 1e-300, 0.1).unwrap() - 0.1 < 0.01);
    }

    #[test]
    fn inner_failure_examples() {
        // 4e^{-1000/33} ≈ 2.8e-13 still exceeds e^{-1000/34} ≈ 1.7e-13; the
        // forms cross at ln δ = −1122·ln 4 ≈ −1555.4
        let b = inner_failure_bound_ln(-1000.0).unwrap();
        assert!(!b.simple_form_holds);
        assert!(close(b.value, 4.0 * (-1000.0f64 / 33.0).exp(), 1e-12));
        let crossover = -1122.0 * 4f64.ln();
        assert!(!inner_failure_bound_ln(crossover + 0.5).unwrap().simple_form_holds);
        assert!(inner_failure_bound_ln(crossover - 0.5).unwrap().simple_form_holds);
        let b = inner_failure_bound(0.5).unwrap();
        assert_eq!(b.value, 1.0);
        assert!(!b.simple_form_holds);
        let mut prev = 0.0;
        for e in (1..300).rev() {
            let v = inner_failure_bound(10f64.powf(-f64::from(e))).unwrap().value;
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn auxiliary_bounds() {
        assert!(close(underestimation_bound(20.0, 0.9), 2.0 * (-1.125f64).exp(), 1e-12));
        assert_eq!(positioning_failure_bound(64.0, 64.0), 1.0);
        assert!(close(positioning_failure_bound(2048.0, 4096.0), 6.0 * (-4.0f64).exp(), 1e-12));
        assert!(close(face_loss_probability(ChannelModel::Bdc(0.1), 3.0), 1e-3, 1e-12));
        assert!(close(face_loss_probability(ChannelModel::Prc(2.0), 3.0), (-6.0f64).exp(), 1e-12));
        assert!(close(zeta_common(ChannelModel::Bdc(0.5), 1.0), 256.0, 1e-12));
        assert!(close(delta_extreme(8.0, 1.0), 2.0 * (-2.0f64).exp(), 1e-12));
        // the simplified bound dominates its components once δ is small
        for e in [50, 100, 300] {
            let d = 10f64.powi(-e);
            assert!(inner_failure_components(d) <= inner_failure_bound(d).unwrap().value);
        }
    }
}
