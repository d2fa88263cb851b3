//! Level probabilities of Wagner's tree for uniform inputs.
//!
//! For `x` with independent entries uniform on `D_m`, `p_(i,m)(j)` is the
//! probability that the level-`i` value of a subtree is `j`. The table is
//! symmetric in `j`, so only `j = 0..=2^(m-i-1)` is stored. Level 1 is
//! uniform, `p_(1,m)(j) = 1/(2^m + 1)`, because a pair sum of two uniform
//! residues is uniform on all of `Z_M`. For `i >= 2` no wrap-around is
//! possible and
//!
//! ```text
//! p_i(j) = sum_{k=0..=j} p_(i-1)(k) p_(i-1)(j-k)
//!        + 2 sum_{k=j+1..=2^(m-i)} p_(i-1)(k) p_(i-1)(k-j).
//! ```
//!
//! The same step is valid at `i = m`, where the window is `D_0 = {0}`.
//!
//! Two arithmetic modes are provided. Float mode is the default for sweeps.
//! Exact mode keeps integer numerators over the common denominator
//! `M^(2^(i-1))` of level `i`.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ring::window_half_width;

/// Largest window exponent for which a table is ever allocated.
pub const MAX_TABLE_M: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Float,
    Exact,
}

/// Default guards on `(n, m)` per mode for [`p_nm`] and friends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub exact_max_n: u32,
    pub exact_max_m: u32,
    pub float_max_m: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { exact_max_n: 4, exact_max_m: 10, float_max_m: 16 }
    }
}

impl Limits {
    /// No caps beyond the allocation guard.
    pub fn unbounded() -> Self {
        Limits { exact_max_n: u32::MAX, exact_max_m: MAX_TABLE_M, float_max_m: MAX_TABLE_M }
    }

    pub fn check(&self, n: u32, m: u32, mode: Mode) -> Result<()> {
        if n == 0 || n > m {
            return Err(Error::ParameterDomain("need 1 <= n <= m"));
        }
        match mode {
            Mode::Float if m > self.float_max_m => Err(Error::ParameterDomain("m above the float-mode cap")),
            Mode::Exact if m > self.exact_max_m || n > self.exact_max_n => {
                Err(Error::ParameterDomain("(n, m) above the exact-mode cap"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Values {
    Float(Vec<f64>),
    Exact { numerators: Vec<BigUint>, denominator: BigUint },
}

/// A probability in either arithmetic mode.
#[derive(Debug, Clone, PartialEq)]
pub enum Probability {
    Float(f64),
    Exact(BigRational),
}

impl Probability {
    pub fn to_f64(&self) -> f64 {
        match self {
            Probability::Float(x) => *x,
            Probability::Exact(q) => rational_to_f64(q),
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Probability::Exact(q) => Some(q),
            Probability::Float(_) => None,
        }
    }

    fn scale(self, factor: &BigUint) -> Probability {
        match self {
            Probability::Float(x) => Probability::Float(x * factor.to_f64().unwrap_or(f64::INFINITY)),
            Probability::Exact(q) => Probability::Exact(q * BigRational::from_integer(BigInt::from(factor.clone()))),
        }
    }
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// One level of the recursion: `p_(level,m)(j)` for `j = 0..=2^(m-level-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbTable {
    m: u32,
    level: u32,
    values: Values,
}

impl ProbTable {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &Values {
        &self.values
    }

    pub fn mode(&self) -> Mode {
        match self.values {
            Values::Float(_) => Mode::Float,
            Values::Exact { .. } => Mode::Exact,
        }
    }

    /// Number of stored entries, `2^(m-level-1) + 1` (or 1 at `level = m`).
    pub fn len(&self) -> usize {
        match &self.values {
            Values::Float(v) => v.len(),
            Values::Exact { numerators, .. } => numerators.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `p(j)` for any `j` in the level window, using symmetry for `j < 0`.
    pub fn get(&self, j: i64) -> Option<Probability> {
        let k = j.unsigned_abs() as usize;
        match &self.values {
            Values::Float(v) => v.get(k).map(|&x| Probability::Float(x)),
            Values::Exact { numerators, denominator } => numerators
                .get(k)
                .map(|num| Probability::Exact(BigRational::new(num.clone().into(), denominator.clone().into()))),
        }
    }

    pub fn get_f64(&self, j: i64) -> Option<f64> {
        self.get(j).map(|p| p.to_f64())
    }

    /// Probability that the level value is not terminated:
    /// `p(0) + 2 sum_{j >= 1} p(j)`.
    pub fn survival_mass(&self) -> Probability {
        match &self.values {
            Values::Float(v) => Probability::Float(v[0] + 2.0 * v[1..].iter().sum::<f64>()),
            Values::Exact { numerators, denominator } => {
                let tail: BigUint = numerators[1..].iter().sum();
                let num = &numerators[0] + tail * 2u32;
                Probability::Exact(BigRational::new(num.into(), denominator.clone().into()))
            }
        }
    }
}

/// Level 1: the constant table `1/(2^m + 1)` on `j = 0..=2^(m-2)`.
pub fn frontier(m: u32, mode: Mode) -> Result<ProbTable> {
    if m == 0 || m > MAX_TABLE_M {
        return Err(Error::ParameterDomain("frontier needs 1 <= m <= 24"));
    }
    let len = window_half_width(m, 1)? as usize + 1;
    let modulus = (1u64 << m) + 1;
    let values = match mode {
        Mode::Float => Values::Float(vec![1.0 / modulus as f64; len]),
        Mode::Exact => Values::Exact { numerators: vec![BigUint::one(); len], denominator: BigUint::from(modulus) },
    };
    Ok(ProbTable { m, level: 1, values })
}

trait Weight: Clone {
    type Acc;
    fn zero() -> Self::Acc;
    fn add_product(acc: &mut Self::Acc, a: &Self, b: &Self);
    fn double(acc: &mut Self::Acc);
    fn finish(acc: Self::Acc) -> Self;
}

/// Neumaier-compensated running sum.
impl Weight for f64 {
    type Acc = (f64, f64);
    fn zero() -> Self::Acc {
        (0.0, 0.0)
    }
    fn add_product(acc: &mut Self::Acc, a: &Self, b: &Self) {
        let x = a * b;
        let t = acc.0 + x;
        if libm::fabs(acc.0) >= libm::fabs(x) {
            acc.1 += (acc.0 - t) + x;
        } else {
            acc.1 += (x - t) + acc.0;
        }
        acc.0 = t;
    }
    fn double(acc: &mut Self::Acc) {
        acc.0 *= 2.0;
        acc.1 *= 2.0;
    }
    fn finish(acc: Self::Acc) -> Self {
        acc.0 + acc.1
    }
}

impl Weight for BigUint {
    type Acc = BigUint;
    fn zero() -> Self::Acc {
        Zero::zero()
    }
    fn add_product(acc: &mut Self::Acc, a: &Self, b: &Self) {
        *acc += a * b;
    }
    fn double(acc: &mut Self::Acc) {
        *acc <<= 1u32;
    }
    fn finish(acc: Self::Acc) -> Self {
        acc
    }
}

fn step_values<W: Weight>(prev: &[W], out_len: usize) -> Vec<W> {
    let upper = prev.len() - 1;
    (0..out_len)
        .map(|j| {
            let mut acc = W::zero();
            for k in j + 1..=upper {
                W::add_product(&mut acc, &prev[k], &prev[k - j]);
            }
            W::double(&mut acc);
            for k in 0..=j {
                W::add_product(&mut acc, &prev[k], &prev[j - k]);
            }
            W::finish(acc)
        })
        .collect()
}

/// Advances a table from level `i - 1` to level `i`. Fails past level `m`.
pub fn step(table: &ProbTable) -> Result<ProbTable> {
    let level = table.level + 1;
    if level > table.m {
        return Err(Error::LevelOutOfRange { level, m: table.m });
    }
    let out_len = window_half_width(table.m, level)? as usize + 1;
    let values = match &table.values {
        Values::Float(v) => Values::Float(step_values(v, out_len)),
        Values::Exact { numerators, denominator } => {
            Values::Exact { numerators: step_values(numerators, out_len), denominator: denominator * denominator }
        }
    };
    Ok(ProbTable { m: table.m, level, values })
}

/// Tables for levels `1..=n`.
pub fn tables(n: u32, m: u32, mode: Mode) -> Result<Vec<ProbTable>> {
    if n == 0 || n > m {
        return Err(Error::ParameterDomain("need 1 <= n <= m"));
    }
    let mut out = vec![frontier(m, mode)?];
    for _ in 1..n {
        let next = step(&out[out.len() - 1])?;
        out.push(next);
    }
    Ok(out)
}

/// `p_(n,m)`: probability that `H_n` of a uniform vector is 0.
pub fn p_nm(n: u32, m: u32, mode: Mode) -> Result<Probability> {
    p_nm_with_limits(n, m, mode, &Limits::default())
}

pub fn p_nm_with_limits(n: u32, m: u32, mode: Mode, limits: &Limits) -> Result<Probability> {
    limits.check(n, m, mode)?;
    let top = tables(n, m, mode)?.pop().expect("n >= 1");
    Ok(top.get(0).expect("level table is never empty"))
}

/// `R_(n,m) = (2^m + 1) p_(n,m)`, the ratio of the mean Wagner count to the
/// mean zero-sum count.
pub fn ratio(n: u32, m: u32, mode: Mode) -> Result<Probability> {
    ratio_with_limits(n, m, mode, &Limits::default())
}

pub fn ratio_with_limits(n: u32, m: u32, mode: Mode, limits: &Limits) -> Result<Probability> {
    let p = p_nm_with_limits(n, m, mode, limits)?;
    Ok(p.scale(&(BigUint::from(1u32) + (BigUint::one() << m))))
}

/// Bit budget for exact evaluation of `L^N` before switching to logarithms.
const EXACT_POWER_BITS: f64 = 4096.0;

fn finite(x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::ParameterDomain("mean is not representable as a finite float"))
    }
}

/// `mu = L^N / M`. Exact rational arithmetic when `L^N` is moderate,
/// `exp(N ln L - ln M)` otherwise.
pub fn mu_mean(rows: u64, cols: u32, modulus: &BigUint) -> Result<f64> {
    if rows < 2 || cols < 2 || modulus < &BigUint::from(2u32) {
        return Err(Error::ParameterDomain("need L >= 2, N >= 2, M >= 2"));
    }
    let bits = cols as f64 * libm::log2(rows as f64);
    if bits <= EXACT_POWER_BITS {
        let num = BigUint::from(rows).pow(cols);
        return finite(rational_to_f64(&BigRational::new(num.into(), modulus.clone().into())));
    }
    finite(libm::exp(cols as f64 * libm::log(rows as f64) - ln_biguint(modulus)))
}

/// `lambda = L^N p_(n,m)` with `N = 2^n`.
pub fn lambda_mean(rows: u64, n: u32, m: u32, mode: Mode) -> Result<f64> {
    if rows < 2 || n >= 32 {
        return Err(Error::ParameterDomain("need L >= 2 and n < 32"));
    }
    let cols = 1u32 << n;
    let p = p_nm(n, m, mode)?;
    let bits = cols as f64 * libm::log2(rows as f64);
    match p {
        Probability::Exact(q) if bits <= EXACT_POWER_BITS => {
            let scaled = q * BigRational::from_integer(BigUint::from(rows).pow(cols).into());
            finite(rational_to_f64(&scaled))
        }
        p => finite(libm::exp(cols as f64 * libm::log(rows as f64) + libm::log(p.to_f64()))),
    }
}

fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return libm::log(x.to_f64().unwrap_or(f64::INFINITY));
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    libm::log(top) + shift as f64 * core::f64::consts::LN_2
}
