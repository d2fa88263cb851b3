//! Residues of `Z_M` in the symmetric window.
//!
//! Every class is represented by the unique integer `r` with
//! `-floor(M/2) <= r <= floor(M/2)`; for even `M` the class `M/2` is kept
//! positive, so the window is `(-M/2, M/2]`. For the dyadic moduli
//! `M = 2^m + 1` this is the window `D_m = {-2^(m-1), ..., 2^(m-1)}`, and
//! the sub-windows `D_(m-h)` used by Wagner's algorithm are tested with
//! [`RingContext::in_window`].

use core::fmt;

use rand_core::RngCore;

use crate::error::{Error, Result};

/// Largest supported modulus. Keeps every pair sum inside `i64`.
pub const MAX_MODULUS: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingContext {
    modulus: u64,
    dyadic: Option<u32>,
}

/// A canonical residue. Only a [`RingContext`] creates these from raw
/// integers, so the value is always inside the symmetric window of the ring
/// it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Residue(i64);

impl Residue {
    pub const ZERO: Residue = Residue(0);

    pub fn value(self) -> i64 {
        self.0
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl RingContext {
    /// Ring of integers modulo `modulus`. The dyadic exponent is detected
    /// automatically when `modulus = 2^m + 1`.
    pub fn new(modulus: u64) -> Result<Self> {
        if !(2..=MAX_MODULUS).contains(&modulus) {
            return Err(Error::InvalidModulus(modulus));
        }
        let below = modulus - 1;
        let dyadic = below.is_power_of_two().then(|| below.trailing_zeros()).filter(|&m| m >= 1);
        Ok(RingContext { modulus, dyadic })
    }

    /// The ring `Z_(2^m + 1)`.
    pub fn dyadic(m: u32) -> Result<Self> {
        if m == 0 || m > 61 {
            return Err(Error::ParameterDomain("dyadic exponent must satisfy 1 <= m <= 61"));
        }
        Self::new((1u64 << m) + 1)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `Some(m)` iff the modulus is `2^m + 1` with `m >= 1`.
    pub fn dyadic_exponent(&self) -> Option<u32> {
        self.dyadic
    }

    pub fn require_dyadic(&self) -> Result<u32> {
        self.dyadic.ok_or(Error::NotDyadic { modulus: self.modulus })
    }

    /// Largest value in the symmetric window.
    pub fn half(&self) -> i64 {
        (self.modulus / 2) as i64
    }

    /// Smallest value in the symmetric window.
    pub fn min_value(&self) -> i64 {
        self.half() + 1 - self.modulus as i64
    }

    pub fn canonical(&self, x: i64) -> Residue {
        self.canonical_wide(x as i128)
    }

    pub fn canonical_wide(&self, x: i128) -> Residue {
        let m = self.modulus as i128;
        let r = x.rem_euclid(m);
        let r = if r > self.half() as i128 { r - m } else { r };
        Residue(r as i64)
    }

    /// Wraps `value` as a residue if it is already canonical.
    pub fn residue(&self, value: i64) -> Result<Residue> {
        if (self.min_value()..=self.half()).contains(&value) {
            Ok(Residue(value))
        } else {
            Err(Error::NotCanonical { value, modulus: self.modulus })
        }
    }

    pub fn add_mod(&self, a: Residue, b: Residue) -> Residue {
        self.canonical(a.0 + b.0)
    }

    pub fn neg(&self, a: Residue) -> Residue {
        self.canonical(-a.0)
    }

    /// Membership of `a` in the level-`h` window `D_(m-h)`, i.e.
    /// `|a| <= 2^(m-h-1)`, with `D_0 = {0}`.
    pub fn in_window(&self, a: Residue, h: u32) -> Result<bool> {
        let m = self.require_dyadic()?;
        Ok(a.0.unsigned_abs() <= window_half_width(m, h)?)
    }

    /// Position of `a` in window order, `0..M`.
    pub fn offset(&self, a: Residue) -> usize {
        (a.0 - self.min_value()) as usize
    }

    /// Inverse of [`RingContext::offset`].
    pub fn from_offset(&self, offset: usize) -> Residue {
        debug_assert!((offset as u64) < self.modulus);
        Residue(self.min_value() + offset as i64)
    }

    /// All residues in increasing order.
    pub fn residues(&self) -> impl Iterator<Item = Residue> + '_ {
        (self.min_value()..=self.half()).map(Residue)
    }

    /// A uniformly distributed residue. Draws `k`-bit words, where `2^k` is
    /// the smallest power of two `>= M`, and rejects values `>= M`.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Residue {
        let bits = 64 - (self.modulus - 1).leading_zeros();
        let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
        loop {
            let draw = rng.next_u64() & mask;
            if draw < self.modulus {
                return self.canonical_wide(draw as i128);
            }
        }
    }
}

/// Half-width of the window `D_(m-h)`: `2^(m-h-1)` for `h < m`, and `0` for
/// `h = m`.
pub fn window_half_width(m: u32, h: u32) -> Result<u64> {
    match h.cmp(&m) {
        core::cmp::Ordering::Less => Ok(1u64 << (m - h - 1)),
        core::cmp::Ordering::Equal => Ok(0),
        core::cmp::Ordering::Greater => Err(Error::LevelOutOfRange { level: h, m }),
    }
}
