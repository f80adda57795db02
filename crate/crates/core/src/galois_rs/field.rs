//! Arithmetic in GF(2^m) for 1 ≤ m ≤ 64.
//!
//! Elements are polynomials over GF(2) packed into a `u64`, bit `i` holding
//! the coefficient of `x^i`. Addition is XOR. Fields with m ≤ 16 multiply
//! through log/antilog tables; larger fields use carry-less multiplication
//! followed by reduction.

use std::fmt;

use thiserror::Error;

use crate::bitstream::BitString;

pub const MAX_DEGREE: u32 = 64;
const TABLE_DEGREE: u32 = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("field degree must be in 1..={MAX_DEGREE}, got {0}")]
    UnsupportedDegree(u32),
    #[error("modulus {0:#x} is not irreducible of the requested degree")]
    Reducible(u128),
    #[error("bit length {len} is not a multiple of the symbol width {m}")]
    RaggedBits { len: usize, m: u32 },
}

/// An element of GF(2^m). Only meaningful together with its [`FieldContext`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Gf(pub u64);

impl Gf {
    pub const ZERO: Gf = Gf(0);
    pub const ONE: Gf = Gf(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl std::ops::Add for Gf {
    type Output = Gf;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Gf) -> Gf {
        Gf(self.0 ^ rhs.0)
    }
}

impl std::ops::AddAssign for Gf {
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: Gf) {
        self.0 ^= rhs.0;
    }
}

impl fmt::Debug for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf({:#x})", self.0)
    }
}

/// Lexicographically smallest irreducible polynomial of each degree 1..=64,
/// bit `i` holding the coefficient of `x^i`.
const IRREDUCIBLE: [u128; 64] = [
    0x2, 0x7, 0xb, 0x13,
    0x25, 0x43, 0x83, 0x11b,
    0x203, 0x409, 0x805, 0x1009,
    0x201b, 0x4021, 0x8003, 0x1002b,
    0x20009, 0x40009, 0x80027, 0x100009,
    0x200005, 0x400003, 0x800021, 0x100001b,
    0x2000009, 0x400001b, 0x8000027, 0x10000003,
    0x20000005, 0x40000003, 0x80000009, 0x10000008d,
    0x20000004b, 0x40000001b, 0x800000005, 0x1000000035,
    0x200000003f, 0x4000000063, 0x8000000011, 0x10000000039,
    0x20000000009, 0x40000000027, 0x80000000059, 0x100000000021,
    0x20000000001b, 0x400000000003, 0x800000000021, 0x100000000002d,
    0x2000000000071, 0x400000000001d, 0x800000000004b, 0x10000000000009,
    0x20000000000047, 0x4000000000007d, 0x80000000000047, 0x100000000000095,
    0x200000000000011, 0x400000000000063, 0x80000000000007b, 0x1000000000000003,
    0x2000000000000027, 0x4000000000000069, 0x8000000000000003, 0x1000000000000001b,
];

/// Distinct prime factors of `2^m - 1`, indexed by `m - 1`.
const GROUP_ORDER_PRIMES: [&[u64]; 64] = [
    &[],
    &[3],
    &[7],
    &[3, 5],
    &[31],
    &[3, 7],
    &[127],
    &[3, 5, 17],
    &[7, 73],
    &[3, 11, 31],
    &[23, 89],
    &[3, 5, 7, 13],
    &[8191],
    &[3, 43, 127],
    &[7, 31, 151],
    &[3, 5, 17, 257],
    &[131071],
    &[3, 7, 19, 73],
    &[524287],
    &[3, 5, 11, 31, 41],
    &[7, 127, 337],
    &[3, 23, 89, 683],
    &[47, 178481],
    &[3, 5, 7, 13, 17, 241],
    &[31, 601, 1801],
    &[3, 2731, 8191],
    &[7, 73, 262657],
    &[3, 5, 29, 43, 113, 127],
    &[233, 1103, 2089],
    &[3, 7, 11, 31, 151, 331],
    &[2147483647],
    &[3, 5, 17, 257, 65537],
    &[7, 23, 89, 599479],
    &[3, 43691, 131071],
    &[31, 71, 127, 122921],
    &[3, 5, 7, 13, 19, 37, 73, 109],
    &[223, 616318177],
    &[3, 174763, 524287],
    &[7, 79, 8191, 121369],
    &[3, 5, 11, 17, 31, 41, 61681],
    &[13367, 164511353],
    &[3, 7, 43, 127, 337, 5419],
    &[431, 9719, 2099863],
    &[3, 5, 23, 89, 397, 683, 2113],
    &[7, 31, 73, 151, 631, 23311],
    &[3, 47, 178481, 2796203],
    &[2351, 4513, 13264529],
    &[3, 5, 7, 13, 17, 97, 241, 257, 673],
    &[127, 4432676798593],
    &[3, 11, 31, 251, 601, 1801, 4051],
    &[7, 103, 2143, 11119, 131071],
    &[3, 5, 53, 157, 1613, 2731, 8191],
    &[6361, 69431, 20394401],
    &[3, 7, 19, 73, 87211, 262657],
    &[23, 31, 89, 881, 3191, 201961],
    &[3, 5, 17, 29, 43, 113, 127, 15790321],
    &[7, 32377, 524287, 1212847],
    &[3, 59, 233, 1103, 2089, 3033169],
    &[179951, 3203431780337],
    &[3, 5, 7, 11, 13, 31, 41, 61, 151, 331, 1321],
    &[2305843009213693951],
    &[3, 715827883, 2147483647],
    &[7, 73, 127, 337, 92737, 649657],
    &[3, 5, 17, 257, 641, 65537, 6700417],
];

#[derive(Clone)]
struct LogTables {
    log: Vec<u32>,
    exp: Vec<u64>,
}

/// Immutable description of one field: degree, modulus, and a primitive
/// element. Cheap to share across threads.
#[derive(Clone)]
pub struct FieldContext {
    m: u32,
    modulus: u128,
    mask: u64,
    generator: Gf,
    tables: Option<LogTables>,
}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldContext")
            .field("m", &self.m)
            .field("modulus", &format_args!("{:#x}", self.modulus))
            .field("generator", &self.generator)
            .finish()
    }
}

impl FieldContext {
    /// GF(2^m) with the smallest irreducible modulus of degree `m`.
    pub fn new(m: u32) -> Result<Self, FieldError> {
        if m == 0 || m > MAX_DEGREE {
            return Err(FieldError::UnsupportedDegree(m));
        }
        Self::with_modulus(m, IRREDUCIBLE[(m - 1) as usize])
    }

    /// GF(2^m) with a caller-chosen modulus, checked for irreducibility.
    pub fn with_modulus(m: u32, modulus: u128) -> Result<Self, FieldError> {
        if m == 0 || m > MAX_DEGREE {
            return Err(FieldError::UnsupportedDegree(m));
        }
        if modulus >> m != 1 || !is_irreducible(modulus, m) {
            return Err(FieldError::Reducible(modulus));
        }
        let mask = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
        let mut ctx = FieldContext { m, modulus, mask, generator: Gf::ONE, tables: None };
        ctx.generator = ctx.find_generator();
        if m <= TABLE_DEGREE {
            ctx.tables = Some(ctx.build_tables());
        }
        Ok(ctx)
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> u128 {
        self.modulus
    }

    /// Number of field elements, saturating at `u64::MAX + 1` for m = 64.
    pub fn order(&self) -> u128 {
        1u128 << self.m
    }

    /// The smallest primitive element.
    pub fn generator(&self) -> Gf {
        self.generator
    }

    pub fn contains(&self, a: Gf) -> bool {
        a.0 & !self.mask == 0
    }

    pub fn element(&self, v: u64) -> Gf {
        assert!(v & !self.mask == 0, "value {v:#x} outside GF(2^{})", self.m);
        Gf(v)
    }

    pub fn add(&self, a: Gf, b: Gf) -> Gf {
        a + b
    }

    pub fn mul(&self, a: Gf, b: Gf) -> Gf {
        if a.is_zero() || b.is_zero() {
            return Gf::ZERO;
        }
        match &self.tables {
            Some(t) => {
                let order = (t.exp.len()) as u32;
                let mut idx = t.log[a.0 as usize] + t.log[b.0 as usize];
                if idx >= order {
                    idx -= order;
                }
                Gf(t.exp[idx as usize])
            }
            None => Gf(self.reduce(clmul(a.0, b.0))),
        }
    }

    pub fn square(&self, a: Gf) -> Gf {
        self.mul(a, a)
    }

    pub fn pow(&self, a: Gf, mut e: u128) -> Gf {
        let mut base = a;
        let mut acc = Gf::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self, a: Gf) -> Gf {
        assert!(!a.is_zero(), "zero has no inverse");
        match &self.tables {
            Some(t) => {
                let order = t.exp.len() as u32;
                let l = t.log[a.0 as usize];
                Gf(t.exp[((order - l) % order) as usize])
            }
            None => self.pow(a, self.order() - 2),
        }
    }

    pub fn div(&self, a: Gf, b: Gf) -> Gf {
        self.mul(a, self.inv(b))
    }

    /// `generator^e`.
    pub fn exp(&self, e: u128) -> Gf {
        match &self.tables {
            Some(t) => Gf(t.exp[(e % t.exp.len() as u128) as usize]),
            None => self.pow(self.generator, e),
        }
    }

    fn reduce(&self, mut v: u128) -> u64 {
        let m = self.m;
        for bit in (m..2 * m - 1).rev() {
            if v >> bit & 1 == 1 {
                v ^= self.modulus << (bit - m);
            }
        }
        v as u64
    }

    fn find_generator(&self) -> Gf {
        let group = self.order() - 1;
        if group == 1 {
            return Gf::ONE;
        }
        let primes = GROUP_ORDER_PRIMES[(self.m - 1) as usize];
        (2..=self.mask)
            .map(Gf)
            .find(|&g| primes.iter().all(|&q| self.pow_slow(g, group / u128::from(q)) != Gf::ONE))
            .expect("every finite field has a primitive element")
    }

    fn pow_slow(&self, a: Gf, mut e: u128) -> Gf {
        let mut base = a.0;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.reduce(clmul(acc, base));
            }
            base = self.reduce(clmul(base, base));
            e >>= 1;
        }
        Gf(acc)
    }

    fn build_tables(&self) -> LogTables {
        let order = (self.mask) as usize; // 2^m - 1
        let mut exp = Vec::with_capacity(order);
        let mut log = vec![0u32; order + 1];
        let mut cur = 1u64;
        for i in 0..order {
            exp.push(cur);
            log[cur as usize] = i as u32;
            cur = self.reduce(clmul(cur, self.generator.0));
        }
        LogTables { log, exp }
    }

    /// Chunks `w` into m-bit symbols, first bit as the constant coefficient.
    pub fn symbols_from_bits(&self, w: &BitString) -> Result<Vec<Gf>, FieldError> {
        let m = self.m as usize;
        if !w.len().is_multiple_of(m) {
            return Err(FieldError::RaggedBits { len: w.len(), m: self.m });
        }
        Ok(w
            .bits()
            .chunks(m)
            .map(|chunk| Gf(chunk.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i))))
            .collect())
    }

    pub fn bits_from_symbols(&self, symbols: &[Gf]) -> BitString {
        let mut out = BitString::with_capacity(symbols.len() * self.m as usize);
        for s in symbols {
            for i in 0..self.m {
                out.push(((s.0 >> i) & 1) as u8);
            }
        }
        out
    }
}

/// Carry-less product of two 64-bit polynomials.
pub fn clmul(a: u64, b: u64) -> u128 {
    let a = u128::from(a);
    let mut acc = 0u128;
    let mut b = b;
    let mut shift = 0;
    while b != 0 {
        let tz = b.trailing_zeros();
        shift += tz;
        acc ^= a << shift;
        b >>= tz;
        b >>= 1;
        shift += 1;
    }
    acc
}

fn poly_mod(mut a: u128, b: u128) -> u128 {
    let db = 127 - b.leading_zeros();
    while a != 0 && 127 - a.leading_zeros() >= db {
        a ^= b << (127 - a.leading_zeros() - db);
    }
    a
}

fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = poly_mod(a, b);
        a = b;
        b = r;
    }
    a
}

/// Ben-Or test: `f` of degree m is irreducible iff gcd(x^(2^i) - x, f) = 1
/// for every i ≤ m/2.
pub fn is_irreducible(f: u128, m: u32) -> bool {
    if m == 1 {
        return f == 0b10 || f == 0b11;
    }
    if f & 1 == 0 {
        return false;
    }
    let mulmod = |a: u128, b: u128| -> u128 {
        let mut acc = 0u128;
        let mut a = a;
        let mut b = b;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a >> m & 1 == 1 {
                a ^= f;
            }
        }
        acc
    };
    let x = 0b10u128;
    let mut power = x;
    for _ in 0..m / 2 {
        power = mulmod(power, power);
        if poly_gcd(f, power ^ x) != 1 {
            return false;
        }
    }
    true
}
