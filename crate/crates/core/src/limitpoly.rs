//! Exact limit polynomials of the scaled level probabilities.
//!
//! `phi_1 = 1` and, on `[0, 2^-n]`,
//!
//! ```text
//! phi_n(x) = int_0^x phi_(n-1)(u) phi_(n-1)(x-u) du
//!          + 2 int_x^(2^-n) phi_(n-1)(u) phi_(n-1)(u-x) du.
//! ```
//!
//! `phi_n(0)` is the limit of the ratio `R_(n,m)` as `m` grows. Everything is
//! computed with exact rational coefficients.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::recursion::rational_to_f64;

/// Default cap on `n`; the degree of `phi_n` is `2^(n-1) - 1`.
pub const DEFAULT_MAX_N: u32 = 8;

/// Polynomial with exact rational coefficients, lowest degree first, with
/// no trailing zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RationalPolynomial {
    coeffs: Vec<BigRational>,
}

impl RationalPolynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RationalPolynomial { coeffs }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..len).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero()];
        out.extend(self.coeffs.iter().enumerate().map(|(i, a)| a / BigInt::from(i + 1)));
        Self::new(out)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, a| acc * x + a)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * x + rational_to_f64(a))
    }

    /// `self^k`.
    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(BigRational::one()), |acc, _| acc.mul(self))
    }
}

impl Add for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn add(self, rhs: Self) -> RationalPolynomial {
        RationalPolynomial::add(self, rhs)
    }
}

impl Mul for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn mul(self, rhs: Self) -> RationalPolynomial {
        RationalPolynomial::mul(self, rhs)
    }
}

impl fmt::Display for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match i {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}*x")?,
                _ => write!(f, "{a}*x^{i}")?,
            }
        }
        Ok(())
    }
}

/// `phi_n` together with its domain `[0, 2^-n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitPolynomial {
    n: u32,
    poly: RationalPolynomial,
}

impl LimitPolynomial {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn poly(&self) -> &RationalPolynomial {
        &self.poly
    }

    /// Right end of the domain, `2^-n`.
    pub fn domain_end(&self) -> BigRational {
        dyadic_inverse(self.n)
    }

    pub fn eval(&self, x: &BigRational) -> Result<BigRational> {
        if x.is_negative() || x > &self.domain_end() {
            return Err(Error::OutsideDomain);
        }
        Ok(self.poly.eval(x))
    }

    /// `phi_n(0)`.
    pub fn at_zero(&self) -> BigRational {
        self.poly.coeff(0)
    }
}

fn dyadic_inverse(n: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << n)
}

fn binomial_row(i: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for r in 0..i {
        let next = &row[r] * BigInt::from(i - r) / BigInt::from(r + 1);
        row.push(next);
    }
    row
}

/// `int_0^x p(u) q(x - u) du` as a polynomial in `x`, using
/// `int_0^x u^i (x-u)^k du = x^(i+k+1) i! k! / (i+k+1)!`.
pub fn convolution_integral(p: &RationalPolynomial, q: &RationalPolynomial) -> RationalPolynomial {
    if p.is_zero() || q.is_zero() {
        return RationalPolynomial::zero();
    }
    let top = p.coeffs.len() + q.coeffs.len();
    let mut factorial = vec![BigInt::one()];
    for k in 1..=top {
        let next = &factorial[k - 1] * BigInt::from(k);
        factorial.push(next);
    }
    let mut out = vec![BigRational::zero(); top];
    for (i, a) in p.coeffs.iter().enumerate() {
        for (k, b) in q.coeffs.iter().enumerate() {
            let beta = BigRational::new(&factorial[i] * &factorial[k], factorial[i + k + 1].clone());
            out[i + k + 1] += a * b * beta;
        }
    }
    RationalPolynomial::new(out)
}

/// `int_x^c p(u) q(u - x) du` as a polynomial in `x`. Substituting
/// `t = u - x` gives `int_0^(c-x) p(t + x) q(t) dt`; the integrand is
/// expanded as a polynomial in `(t, x)` and integrated in `t`.
pub fn reflected_integral(p: &RationalPolynomial, q: &RationalPolynomial, c: &BigRational) -> RationalPolynomial {
    if p.is_zero() || q.is_zero() {
        return RationalPolynomial::zero();
    }
    let dp = p.coeffs.len();
    let dq = q.coeffs.len();
    // shifted[r][s]: coefficient of t^r x^s in p(t + x).
    let mut shifted = vec![vec![BigRational::zero(); dp]; dp];
    for (i, a) in p.coeffs.iter().enumerate() {
        for (r, binom) in binomial_row(i).into_iter().enumerate() {
            shifted[r][i - r] += a * BigRational::from_integer(binom);
        }
    }
    // by_t_power[e]: polynomial in x multiplying t^e in p(t + x) q(t).
    let mut by_t_power = vec![vec![BigRational::zero(); dp]; dp + dq - 1];
    for (r, row) in shifted.iter().enumerate() {
        for (k, b) in q.coeffs.iter().enumerate() {
            for (s, a) in row.iter().enumerate() {
                if !a.is_zero() {
                    by_t_power[r + k][s] += a * b;
                }
            }
        }
    }
    let c_minus_x = RationalPolynomial::new(vec![c.clone(), -BigRational::one()]);
    let mut power = c_minus_x.clone();
    let mut total = RationalPolynomial::zero();
    for (e, coeffs) in by_t_power.into_iter().enumerate() {
        let g = RationalPolynomial::new(coeffs).scale(&BigRational::new(BigInt::one(), BigInt::from(e + 1)));
        total = total.add(&g.mul(&power));
        power = power.mul(&c_minus_x);
    }
    total
}

/// One application of the recursion: `phi_n` from `phi_(n-1)`.
pub fn next_phi(prev: &LimitPolynomial) -> LimitPolynomial {
    let n = prev.n + 1;
    let q = &prev.poly;
    let direct = convolution_integral(q, q);
    let reflected = reflected_integral(q, q, &dyadic_inverse(n));
    let two = BigRational::from_integer(2.into());
    LimitPolynomial { n, poly: direct.add(&reflected.scale(&two)) }
}

/// Memo table of `phi_1, phi_2, ...`, filled on demand.
#[derive(Debug, Clone)]
pub struct LimitPolynomials {
    table: Vec<LimitPolynomial>,
    max_n: u32,
}

impl Default for LimitPolynomials {
    fn default() -> Self {
        Self::with_max_n(DEFAULT_MAX_N)
    }
}

impl LimitPolynomials {
    pub fn with_max_n(max_n: u32) -> Self {
        let base = LimitPolynomial { n: 1, poly: RationalPolynomial::constant(BigRational::one()) };
        LimitPolynomials { table: vec![base], max_n }
    }

    pub fn max_n(&self) -> u32 {
        self.max_n
    }

    pub fn get(&mut self, n: u32) -> Result<&LimitPolynomial> {
        if n == 0 || n > self.max_n {
            return Err(Error::ParameterDomain("limit polynomial index outside 1..=max_n"));
        }
        while (self.table.len() as u32) < n {
            let next = next_phi(&self.table[self.table.len() - 1]);
            self.table.push(next);
        }
        Ok(&self.table[n as usize - 1])
    }

    pub fn phi_at_zero(&mut self, n: u32) -> Result<BigRational> {
        Ok(self.get(n)?.at_zero())
    }
}

/// `phi_n`, computed from scratch with the default cap.
pub fn phi(n: u32) -> Result<LimitPolynomial> {
    LimitPolynomials::default().get(n).cloned()
}

/// `phi_n(0)`, the limit of `R_(n,m)` as `m` grows.
pub fn phi_at_zero(n: u32) -> Result<BigRational> {
    LimitPolynomials::default().phi_at_zero(n)
}

/// `phi_n(0)` through `2 int_0^(2^-n) phi_(n-1)(u)^2 du`, for `n >= 2`.
pub fn phi_at_zero_by_square_integral(table: &mut LimitPolynomials, n: u32) -> Result<BigRational> {
    if n < 2 {
        return Err(Error::ParameterDomain("square-integral form needs n >= 2"));
    }
    let prev = table.get(n - 1)?.poly().clone();
    let anti = prev.mul(&prev).antiderivative();
    Ok(anti.eval(&dyadic_inverse(n)) * BigRational::from_integer(2.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn polynomial_basics() {
        let p = RationalPolynomial::from_integers(&[1, 1]);
        let q = RationalPolynomial::from_integers(&[1, -1]);
        assert_eq!(p.mul(&q), RationalPolynomial::from_integers(&[1, 0, -1]));
        assert_eq!(
            RationalPolynomial::from_integers(&[0, 2]).antiderivative(),
            RationalPolynomial::from_integers(&[0, 0, 1])
        );
        let r = RationalPolynomial::new(vec![rat(1, 2), rat(-1, 1)]);
        assert_eq!(r.eval(&rat(1, 4)), rat(1, 4));
        assert_eq!(RationalPolynomial::from_integers(&[3, 0, 0]).degree(), Some(0));
        assert_eq!(RationalPolynomial::from_integers(&[0, 0]).degree(), None);
        assert_eq!(r.pow(2), RationalPolynomial::new(vec![rat(1, 4), rat(-1, 1), rat(1, 1)]));
        assert_eq!(std::format!("{r}"), "1/2 - 1*x");
    }

    #[test]
    fn first_limit_polynomials() {
        assert_eq!(phi(1).unwrap().poly(), &RationalPolynomial::from_integers(&[1]));
        assert_eq!(phi(2).unwrap().poly(), &RationalPolynomial::new(vec![rat(1, 2), rat(-1, 1)]));
        assert_eq!(phi_at_zero(3).unwrap(), rat(37, 768));
        assert_eq!(phi_at_zero(1).unwrap(), rat(1, 1));
        assert_eq!(phi_at_zero(2).unwrap(), rat(1, 2));
    }

    #[test]
    fn degrees_double() {
        let mut t = LimitPolynomials::default();
        for n in 1..=6 {
            assert_eq!(t.get(n).unwrap().poly().degree(), Some((1usize << (n - 1)) - 1));
        }
    }

    #[test]
    fn zero_value_two_ways() {
        let mut t = LimitPolynomials::default();
        for n in 2..=6 {
            assert_eq!(t.phi_at_zero(n).unwrap(), phi_at_zero_by_square_integral(&mut t, n).unwrap());
        }
    }

    #[test]
    fn nonnegative_on_domain() {
        let mut t = LimitPolynomials::default();
        for n in 1..=5 {
            let p = t.get(n).unwrap();
            let end = p.domain_end();
            for k in 0..=1024 {
                let x = &end * rat(k, 1024);
                assert!(!p.eval(&x).unwrap().is_negative(), "phi_{n} negative at {x}");
            }
        }
    }

    #[test]
    fn domain_and_cap() {
        let p = phi(3).unwrap();
        assert_eq!(p.eval(&rat(-1, 100)), Err(Error::OutsideDomain));
        assert_eq!(p.eval(&rat(1, 7)), Err(Error::OutsideDomain));
        assert!(p.eval(&rat(1, 8)).is_ok());
        assert!(phi(0).is_err());
        assert!(phi(DEFAULT_MAX_N + 1).is_err());
        assert!(LimitPolynomials::with_max_n(2).get(3).is_err());
    }

    #[test]
    fn fourth_limit_below_one_in_a_thousand() {
        let v = phi_at_zero(4).unwrap();
        assert!(v < rat(1, 1000));
        assert!(v.is_positive());
    }
}
