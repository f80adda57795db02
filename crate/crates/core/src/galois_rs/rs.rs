//! Systematic Reed-Solomon codes over GF(2^m).
//!
//! A codeword is the evaluation of the unique polynomial of degree < k that
//! takes the message values at the first k evaluation points. Points are
//! `0, g, g^2, …` for the field's smallest primitive element `g`.
//!
//! Decoding computes syndromes against the dual code, runs Berlekamp-Massey
//! for the error locator, finds roots by Chien search and error values by
//! Forney's formula. The point 0 has no locator `X^{-1}`; an error there only
//! shows up in the 0th syndrome, so the decoder tries the hypothesis "no
//! error at 0" first and "error at 0" second, accepting whichever yields a
//! codeword within the radius.

use std::sync::Arc;

use thiserror::Error;

use super::field::{FieldContext, Gf};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RsError {
    #[error("block length k + 2t = {n} exceeds the field size 2^{m}")]
    BlockTooLong { n: usize, m: u32 },
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("expected {expected} symbols, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("symbol {0:?} does not belong to the field")]
    ForeignSymbol(Gf),
    #[error("erasure position {0} is out of range")]
    BadErasure(usize),
    #[error("no codeword within the correction radius")]
    DecodeFailure,
}

/// Evaluation points with their dual-code column multipliers.
#[derive(Debug, Clone)]
struct Domain {
    points: Vec<Gf>,
    weights: Vec<Gf>,
}

impl Domain {
    fn new(ctx: &FieldContext, points: Vec<Gf>) -> Domain {
        let weights = points
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let prod = points
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .fold(Gf::ONE, |acc, (_, &b)| ctx.mul(acc, a + b));
                ctx.inv(prod)
            })
            .collect();
        Domain { points, weights }
    }

    /// `S_l = Σ r_i v_i a_i^l` for l in 0..count.
    fn syndromes(&self, ctx: &FieldContext, r: &[Gf], count: usize) -> Vec<Gf> {
        let mut s = vec![Gf::ZERO; count];
        for ((&ri, &vi), &ai) in r.iter().zip(&self.weights).zip(&self.points) {
            if ri.is_zero() {
                continue;
            }
            let mut term = ctx.mul(ri, vi);
            for sl in s.iter_mut() {
                *sl += term;
                term = ctx.mul(term, ai);
            }
        }
        s
    }

    /// Corrects up to `radius` errors, where `2·radius ≤ syndrome count`.
    fn correct(&self, ctx: &FieldContext, r: &[Gf], nsyn: usize, radius: usize) -> Option<Vec<Gf>> {
        let s = self.syndromes(ctx, r, nsyn);
        if s.iter().all(|x| x.is_zero()) {
            return Some(r.to_vec());
        }
        let zero_pos = self.points.iter().position(|p| p.is_zero());
        let attempt = |errors: Vec<(usize, Gf)>| -> Option<Vec<Gf>> {
            if errors.len() > radius {
                return None;
            }
            let mut c = r.to_vec();
            for (i, e) in errors {
                c[i] += e;
            }
            self.syndromes(ctx, &c, nsyn).iter().all(|x| x.is_zero()).then_some(c)
        };
        if let Some(errors) = self.locate(ctx, &s, radius, None) {
            if let Some(c) = attempt(errors) {
                return Some(c);
            }
        }
        let zero = zero_pos?;
        if radius == 0 {
            return None;
        }
        // Error at the zero point: syndromes 1.. see only the other errors,
        // each scaled by its locator.
        let shifted = &s[1..];
        let mut errors = self.locate(ctx, shifted, radius - 1, Some(zero))?;
        let mut rest = s[0];
        for (i, e) in errors.iter_mut() {
            // locate() returned Y·X; unscale to Y, then to the error value
            let x = self.points[*i];
            let y = ctx.div(ctx.mul(*e, self.weights[*i]), x);
            rest += y;
            *e = ctx.div(y, self.weights[*i]);
        }
        if !rest.is_zero() {
            errors.push((zero, ctx.div(rest, self.weights[zero])));
        }
        attempt(errors)
    }

    /// Berlekamp-Massey + Chien + Forney on syndromes `s`, ignoring the
    /// point at index `skip`. Returns (position, error value) pairs.
    fn locate(
        &self,
        ctx: &FieldContext,
        s: &[Gf],
        radius: usize,
        skip: Option<usize>,
    ) -> Option<Vec<(usize, Gf)>> {
        let (lambda, l) = berlekamp_massey(ctx, s);
        if l > radius || 2 * l > s.len() {
            return None;
        }
        // Ω = S·Λ mod z^len
        let mut omega = vec![Gf::ZERO; s.len()];
        for (i, &li) in lambda.iter().enumerate() {
            if li.is_zero() {
                continue;
            }
            for (j, &sj) in s.iter().enumerate() {
                if i + j < s.len() {
                    omega[i + j] += ctx.mul(li, sj);
                }
            }
        }
        let mut errors = Vec::with_capacity(l);
        for (i, &x) in self.points.iter().enumerate() {
            if Some(i) == skip || x.is_zero() {
                continue;
            }
            let x_inv = ctx.inv(x);
            if !eval(ctx, &lambda, x_inv).is_zero() {
                continue;
            }
            let deriv = eval_derivative(ctx, &lambda, x_inv);
            if deriv.is_zero() {
                return None;
            }
            let y = ctx.div(ctx.mul(x, eval(ctx, &omega, x_inv)), deriv);
            errors.push((i, ctx.div(y, self.weights[i])));
        }
        (errors.len() == l).then_some(errors)
    }
}

fn eval(ctx: &FieldContext, poly: &[Gf], z: Gf) -> Gf {
    poly.iter().rev().fold(Gf::ZERO, |acc, &c| ctx.mul(acc, z) + c)
}

/// Formal derivative in characteristic 2 keeps only odd-degree terms.
fn eval_derivative(ctx: &FieldContext, poly: &[Gf], z: Gf) -> Gf {
    let z2 = ctx.square(z);
    let mut acc = Gf::ZERO;
    let mut zp = Gf::ONE;
    for d in (1..poly.len()).step_by(2) {
        acc += ctx.mul(poly[d], zp);
        zp = ctx.mul(zp, z2);
    }
    acc
}

/// Shortest LFSR generating `s`: connection polynomial and its length.
fn berlekamp_massey(ctx: &FieldContext, s: &[Gf]) -> (Vec<Gf>, usize) {
    let mut c = vec![Gf::ONE];
    let mut b = vec![Gf::ONE];
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut last_disc = Gf::ONE;
    for n in 0..s.len() {
        let mut d = s[n];
        for i in 1..=l.min(c.len() - 1) {
            d += ctx.mul(c[i], s[n - i]);
        }
        if d.is_zero() {
            shift += 1;
            continue;
        }
        let coef = ctx.div(d, last_disc);
        let prev = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, Gf::ZERO);
        }
        for (i, &bi) in b.iter().enumerate() {
            c[i + shift] += ctx.mul(coef, bi);
        }
        if 2 * l <= n {
            l = n + 1 - l;
            b = prev;
            last_disc = d;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    while c.len() > 1 && c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
    (c, l)
}

/// A Reed-Solomon code of dimension `k`, block length `k + 2t`, correcting
/// `t` symbol errors.
#[derive(Debug, Clone)]
pub struct ReedSolomon {
    ctx: Arc<FieldContext>,
    k: usize,
    t: usize,
    domain: Domain,
    /// parity[i][j] = L_j(a_{k+i}) for the Lagrange basis on the first k points
    parity: Vec<Vec<Gf>>,
}

impl ReedSolomon {
    pub fn new(ctx: Arc<FieldContext>, k: usize, t: usize) -> Result<Self, RsError> {
        if k == 0 {
            return Err(RsError::ZeroDimension);
        }
        let n = k + 2 * t;
        if n as u128 > ctx.order() {
            return Err(RsError::BlockTooLong { n, m: ctx.degree() });
        }
        let points: Vec<Gf> = std::iter::once(Gf::ZERO)
            .chain((1..n as u128).map(|i| ctx.exp(i)))
            .collect();
        let domain = Domain::new(&ctx, points);
        let parity = (k..n)
            .map(|i| lagrange_row(&ctx, &domain.points[..k], domain.points[i]))
            .collect();
        Ok(ReedSolomon { ctx, k, t, domain, parity })
    }

    pub fn field(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn radius(&self) -> usize {
        self.t
    }

    pub fn block_len(&self) -> usize {
        self.k + 2 * self.t
    }

    pub fn points(&self) -> &[Gf] {
        &self.domain.points
    }

    fn check_symbols(&self, symbols: &[Gf], expected: usize) -> Result<(), RsError> {
        if symbols.len() != expected {
            return Err(RsError::WrongLength { expected, got: symbols.len() });
        }
        match symbols.iter().find(|&&s| !self.ctx.contains(s)) {
            Some(&s) => Err(RsError::ForeignSymbol(s)),
            None => Ok(()),
        }
    }

    pub fn encode(&self, message: &[Gf]) -> Result<Vec<Gf>, RsError> {
        self.check_symbols(message, self.k)?;
        let mut out = message.to_vec();
        for row in &self.parity {
            let v = row
                .iter()
                .zip(message)
                .fold(Gf::ZERO, |acc, (&l, &m)| acc + self.ctx.mul(l, m));
            out.push(v);
        }
        Ok(out)
    }

    pub fn decode(&self, received: &[Gf]) -> Result<Vec<Gf>, RsError> {
        self.check_symbols(received, self.block_len())?;
        let corrected = self
            .domain
            .correct(&self.ctx, received, 2 * self.t, self.t)
            .ok_or(RsError::DecodeFailure)?;
        Ok(corrected[..self.k].to_vec())
    }

    /// Errors-and-erasures decoding: succeeds when 2·errors + erasures ≤ 2t.
    ///
    /// The erased positions are punctured away, the shorter code is decoded,
    /// and the message is re-interpolated from the surviving points.
    pub fn decode_with_erasures(&self, received: &[Gf], erasures: &[usize]) -> Result<Vec<Gf>, RsError> {
        self.check_symbols(received, self.block_len())?;
        let n = self.block_len();
        let mut erased = vec![false; n];
        for &e in erasures {
            if e >= n {
                return Err(RsError::BadErasure(e));
            }
            erased[e] = true;
        }
        let kept: Vec<usize> = (0..n).filter(|&i| !erased[i]).collect();
        if kept.len() < self.k {
            return Err(RsError::DecodeFailure);
        }
        if kept.len() == n {
            return self.decode(received);
        }
        let redundancy = kept.len() - self.k;
        let domain = Domain::new(&self.ctx, kept.iter().map(|&i| self.domain.points[i]).collect());
        let r: Vec<Gf> = kept.iter().map(|&i| received[i]).collect();
        let corrected = domain
            .correct(&self.ctx, &r, redundancy, redundancy / 2)
            .ok_or(RsError::DecodeFailure)?;
        let basis = &domain.points[..self.k];
        Ok(self.domain.points[..self.k]
            .iter()
            .map(|&a| {
                lagrange_row(&self.ctx, basis, a)
                    .iter()
                    .zip(&corrected[..self.k])
                    .fold(Gf::ZERO, |acc, (&l, &c)| acc + self.ctx.mul(l, c))
            })
            .collect())
    }
}

/// Lagrange basis polynomials on `nodes`, evaluated at `x`.
fn lagrange_row(ctx: &FieldContext, nodes: &[Gf], x: Gf) -> Vec<Gf> {
    (0..nodes.len())
        .map(|j| {
            let (num, den) = nodes.iter().enumerate().filter(|&(i, _)| i != j).fold(
                (Gf::ONE, Gf::ONE),
                |(num, den), (_, &ai)| (ctx.mul(num, x + ai), ctx.mul(den, nodes[j] + ai)),
            );
            ctx.div(num, den)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{seq::index::sample, Rng, SeedableRng};

    fn code(m: u32, k: usize, t: usize) -> ReedSolomon {
        ReedSolomon::new(Arc::new(FieldContext::new(m).unwrap()), k, t).unwrap()
    }

    fn all_messages_m4_k2() -> impl Iterator<Item = Vec<Gf>> {
        (0..16u64).flat_map(|a| (0..16u64).map(move |b| vec![Gf(a), Gf(b)]))
    }

    #[test]
    fn zero_message_is_zero_codeword() {
        let rs = code(8, 5, 3);
        assert_eq!(rs.encode(&[Gf::ZERO; 5]).unwrap(), vec![Gf::ZERO; 11]);
    }

    #[test]
    fn dimension_one_is_repetition() {
        let rs = code(4, 1, 1);
        assert_eq!(rs.points(), &[Gf(0), Gf(2), Gf(4)]);
        for c in 0..16 {
            assert_eq!(rs.encode(&[Gf(c)]).unwrap(), vec![Gf(c); 3]);
        }
        // majority of three
        assert_eq!(rs.decode(&[Gf(5), Gf(5), Gf(9)]).unwrap(), vec![Gf(5)]);
        assert_eq!(rs.decode(&[Gf(9), Gf(5), Gf(5)]).unwrap(), vec![Gf(5)]);
        assert_eq!(rs.decode(&[Gf(5), Gf(9), Gf(5)]).unwrap(), vec![Gf(5)]);
    }

    #[test]
    fn codewords_are_evaluations_of_low_degree_polynomials() {
        let rs = code(8, 4, 3);
        let ctx = rs.field().clone();
        let msg = vec![Gf(17), Gf(200), Gf(3), Gf(99)];
        let cw = rs.encode(&msg).unwrap();
        // any k positions interpolate the same polynomial
        let nodes: Vec<Gf> = [1, 4, 6, 9].iter().map(|&i| rs.points()[i]).collect();
        let vals: Vec<Gf> = [1, 4, 6, 9].iter().map(|&i| cw[i]).collect();
        for (i, &a) in rs.points().iter().enumerate() {
            let v = lagrange_row(&ctx, &nodes, a)
                .iter()
                .zip(&vals)
                .fold(Gf::ZERO, |acc, (&l, &c)| acc + ctx.mul(l, c));
            assert_eq!(v, cw[i]);
        }
    }

    #[test]
    fn exhaustive_single_errors_m4() {
        let rs = code(4, 2, 1);
        for msg in all_messages_m4_k2() {
            let cw = rs.encode(&msg).unwrap();
            assert_eq!(rs.decode(&cw).unwrap(), msg);
            for pos in 0..4 {
                for e in 1..16 {
                    let mut r = cw.clone();
                    r[pos] += Gf(e);
                    assert_eq!(rs.decode(&r).unwrap(), msg, "msg={msg:?} pos={pos} e={e}");
                }
            }
        }
    }

    #[test]
    fn exhaustive_distance_m4() {
        let rs = code(4, 2, 1);
        let words: Vec<Vec<Gf>> = all_messages_m4_k2().map(|m| rs.encode(&m).unwrap()).collect();
        for (i, a) in words.iter().enumerate() {
            for b in &words[i + 1..] {
                assert!(a.iter().zip(b).filter(|(x, y)| x != y).count() >= 3);
            }
        }
    }

    #[test]
    fn exhaustive_double_errors_m4_full_length() {
        // N = 2^m uses every field element, including 0, as a point
        let rs = code(4, 4, 6);
        assert_eq!(rs.block_len(), 16);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let msg: Vec<Gf> = (0..4).map(|_| Gf(rng.random_range(0..16))).collect();
            let cw = rs.encode(&msg).unwrap();
            let nerr = rng.random_range(0..=6);
            let mut r = cw.clone();
            for pos in sample(&mut rng, 16, nerr) {
                r[pos] += Gf(rng.random_range(1..16));
            }
            assert_eq!(rs.decode(&r).unwrap(), msg);
        }
    }

    #[test]
    fn random_errors_m8() {
        let rs = code(8, 16, 4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..100_000 {
            let msg: Vec<Gf> = (0..16).map(|_| Gf(rng.random_range(0..256))).collect();
            let cw = rs.encode(&msg).unwrap();
            let nerr = rng.random_range(0..=4);
            let mut r = cw.clone();
            for pos in sample(&mut rng, 24, nerr) {
                r[pos] += Gf(rng.random_range(1..256));
            }
            assert_eq!(rs.decode(&r).unwrap(), msg, "trial {trial}");
        }
    }

    #[test]
    fn beyond_radius_never_panics() {
        let rs = code(8, 16, 4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let mut failures = 0;
        for _ in 0..5_000 {
            let msg: Vec<Gf> = (0..16).map(|_| Gf(rng.random_range(0..256))).collect();
            let mut r = rs.encode(&msg).unwrap();
            for pos in sample(&mut rng, 24, 5) {
                r[pos] += Gf(rng.random_range(1..256));
            }
            match rs.decode(&r) {
                Err(RsError::DecodeFailure) => failures += 1,
                Ok(other) => assert_ne!(other, msg),
                Err(e) => panic!("unexpected {e}"),
            }
        }
        assert!(failures > 4_000);
    }

    #[test]
    fn erasures_and_errors() {
        let rs = code(8, 6, 3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..2_000 {
            let msg: Vec<Gf> = (0..6).map(|_| Gf(rng.random_range(0..256))).collect();
            let cw = rs.encode(&msg).unwrap();
            let erasures = rng.random_range(0..=6usize);
            let errors = (6 - erasures) / 2;
            let positions = sample(&mut rng, 12, erasures + errors).into_vec();
            let mut r = cw.clone();
            for &p in &positions {
                r[p] += Gf(rng.random_range(1..256));
            }
            assert_eq!(rs.decode_with_erasures(&r, &positions[..erasures]).unwrap(), msg);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let ctx = Arc::new(FieldContext::new(4).unwrap());
        assert!(matches!(ReedSolomon::new(ctx.clone(), 4, 7), Err(RsError::BlockTooLong { .. })));
        assert_eq!(ReedSolomon::new(ctx.clone(), 0, 1).unwrap_err(), RsError::ZeroDimension);
        let rs = ReedSolomon::new(ctx, 2, 1).unwrap();
        assert!(matches!(rs.encode(&[Gf(1)]), Err(RsError::WrongLength { .. })));
        assert!(matches!(rs.decode(&[Gf(1); 3]), Err(RsError::WrongLength { .. })));
        assert_eq!(rs.encode(&[Gf(16), Gf(0)]).unwrap_err(), RsError::ForeignSymbol(Gf(16)));
    }
}
