//! Poisson comparison for the counts `V_0` and `W`.
//!
//! The distance used throughout is the plain sum
//! `sum_k |P(Z = k) - e^-z z^k / k!|`, i.e. twice the total variation
//! distance, labelled "L1".

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exhaustive::count_zero;
use crate::instance::{sample_replicate, Instance};
use crate::recursion::{lambda_mean, mu_mean, Limits, Mode};
use crate::ring::RingContext;
use crate::wagner::{count_wagner, tree_depth};

/// Default cap on `M^(L N)` for exhaustive matrix enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 100_000_000;

/// Poisson tail mass below which the L1 sum is truncated.
pub const TAIL_TOLERANCE: f64 = 1e-15;

/// Which count a distribution describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    /// Number of zero-sum index vectors.
    V0,
    /// Number of Wagner solutions.
    W,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionKind {
    Exact,
    Empirical,
}

/// Distribution on counts `k >= 0`, stored as integer weights over a common
/// total: matrix counts for exact enumeration, replicate counts for Monte
/// Carlo.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountDistribution {
    weights: BTreeMap<u64, u128>,
    total: u128,
    kind: DistributionKind,
}

impl CountDistribution {
    pub fn from_weights(weights: BTreeMap<u64, u128>, kind: DistributionKind) -> Result<Self> {
        let mut total: u128 = 0;
        for w in weights.values() {
            total = total.checked_add(*w).ok_or(Error::CountOverflow)?;
        }
        if total == 0 {
            return Err(Error::ParameterDomain("distribution has no mass"));
        }
        let weights = weights.into_iter().filter(|(_, w)| *w > 0).collect();
        Ok(CountDistribution { weights, total, kind })
    }

    /// Empirical distribution of a sample of counts.
    pub fn from_samples(samples: &[u64]) -> Result<Self> {
        let mut weights = BTreeMap::new();
        for &s in samples {
            *weights.entry(s).or_insert(0u128) += 1;
        }
        Self::from_weights(weights, DistributionKind::Empirical)
    }

    /// Point mass at `k`.
    pub fn point_mass(k: u64) -> Self {
        CountDistribution { weights: BTreeMap::from([(k, 1)]), total: 1, kind: DistributionKind::Exact }
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn total(&self) -> u128 {
        self.total
    }

    /// Non-zero weights in increasing `k`.
    pub fn weights(&self) -> impl Iterator<Item = (u64, u128)> + '_ {
        self.weights.iter().map(|(&k, &w)| (k, w))
    }

    pub fn max_count(&self) -> u64 {
        self.weights.keys().next_back().copied().unwrap_or(0)
    }

    pub fn probability(&self, k: u64) -> f64 {
        self.weights.get(&k).map_or(0.0, |&w| w as f64 / self.total as f64)
    }

    pub fn probability_exact(&self, k: u64) -> BigRational {
        let w = self.weights.get(&k).copied().unwrap_or(0);
        BigRational::new(BigInt::from(w), BigInt::from(self.total))
    }

    pub fn mean_exact(&self) -> BigRational {
        let sum = self.weights.iter().fold(BigInt::zero(), |acc, (&k, &w)| acc + BigInt::from(k) * BigInt::from(w));
        BigRational::new(sum, BigInt::from(self.total))
    }

    pub fn mean(&self) -> f64 {
        crate::recursion::rational_to_f64(&self.mean_exact())
    }

    /// Variance of the distribution (population form).
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.weights.iter().map(|(&k, &w)| square(k as f64 - mean) * w as f64).sum::<f64>() / self.total as f64
    }

    /// `sum_k |P(k) - Q(k)|` between two distributions.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        let top = self.max_count().max(other.max_count());
        (0..=top).map(|k| (self.probability(k) - other.probability(k)).abs()).sum()
    }
}

fn square(x: f64) -> f64 {
    x * x
}

/// `e^-z z^k / k!`, evaluated in log space.
pub fn poisson_pmf(zeta: f64, k: u64) -> Result<f64> {
    if !(zeta.is_finite() && zeta >= 0.0) {
        return Err(Error::InvalidRate);
    }
    if zeta == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    let k = k as f64;
    Ok(libm::exp(k * libm::log(zeta) - zeta - libm::lgamma(k + 1.0)))
}

/// L1 distance to a Poisson law, with the truncation point used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonDistance {
    /// Certified upper estimate of the infinite sum, capped at 2.
    pub distance: f64,
    /// Last `k` summed explicitly.
    pub truncation: u64,
    /// Bound on the Poisson mass beyond `truncation`, already included in
    /// `distance`.
    pub residual: f64,
}

/// `sum_k |dist(k) - Poisson(zeta)(k)|`. The sum runs until past the
/// support of `dist` and until the geometric bound on the remaining
/// Poisson tail is below [`TAIL_TOLERANCE`]; that bound is then added.
pub fn l1_poisson_detailed(dist: &CountDistribution, zeta: f64) -> Result<PoissonDistance> {
    poisson_pmf(zeta, 0)?;
    let top = dist.max_count();
    let mut sum = 0.0;
    let mut k = 0u64;
    loop {
        let pk = poisson_pmf(zeta, k)?;
        sum += (dist.probability(k) - pk).abs();
        if k >= top && (k as f64 + 2.0) > zeta {
            // Beyond k the pmf ratios are at most zeta / (k + 2) < 1.
            let first = pk * zeta / (k as f64 + 1.0);
            let ratio = zeta / (k as f64 + 2.0);
            let residual = first / (1.0 - ratio);
            if residual < TAIL_TOLERANCE {
                return Ok(PoissonDistance { distance: (sum + residual).min(2.0), truncation: k, residual });
            }
        }
        k += 1;
    }
}

pub fn l1_poisson(dist: &CountDistribution, zeta: f64) -> Result<f64> {
    Ok(l1_poisson_detailed(dist, zeta)?.distance)
}

/// `4 (1 - e^-mu) / M` with `mu = L^N / M`: the bound on the L1 distance
/// between `V_0` and `Poisson(mu)`.
pub fn chen_stein_bound_v0(rows: u64, cols: u32, modulus: &BigUint) -> Result<f64> {
    let mu = mu_mean(rows, cols, modulus)?;
    let inv_m = crate::recursion::rational_to_f64(&BigRational::new(BigInt::from(1), BigInt::from(modulus.clone())));
    Ok(4.0 * -libm::expm1(-mu) * inv_m)
}

/// `8 (1 - e^-lambda) mu N / L` for `N = 2^n`, `M = 2^m + 1`, `m > n`: the
/// bound on the L1 distance between `W` and `Poisson(lambda)`.
pub fn chen_stein_bound_w(rows: u64, n: u32, m: u32) -> Result<f64> {
    if m <= n {
        return Err(Error::ParameterDomain("the W bound needs m > n"));
    }
    if m > 61 || n >= 32 {
        return Err(Error::ParameterDomain("m or n too large"));
    }
    let cols = 1u32 << n;
    let mu = mu_mean(rows, cols, &BigUint::from((1u64 << m) + 1))?;
    let lambda = lambda_mean(rows, n, m, preferred_mode(n, m))?;
    Ok(8.0 * -libm::expm1(-lambda) * mu * cols as f64 / rows as f64)
}

/// Exact mode when the default caps allow it, float otherwise.
pub fn preferred_mode(n: u32, m: u32) -> Mode {
    if Limits::default().check(n, m, Mode::Exact).is_ok() {
        Mode::Exact
    } else {
        Mode::Float
    }
}

/// Value of a statistic on one matrix.
pub fn statistic_value(inst: &Instance, statistic: Statistic) -> Result<u64> {
    let v = match statistic {
        Statistic::V0 => count_zero(inst)?,
        Statistic::W => count_wagner(inst)?,
    };
    u64::try_from(v).map_err(|_| Error::CountOverflow)
}

fn check_statistic(ring: &RingContext, cols: usize, statistic: Statistic) -> Result<()> {
    if statistic == Statistic::W {
        let m = ring.require_dyadic()?;
        let n = tree_depth(cols)?;
        if n > m {
            return Err(Error::DepthExceedsWindow { n, m });
        }
    }
    Ok(())
}

/// Distribution of the statistic over all `M^(L N)` equally likely matrices.
///
/// Columns are independent, so instead of visiting matrices one by one the
/// enumeration runs over histograms: first the distribution of a single
/// column's residue histogram, then (for `V_0`) the distribution of the
/// partial-sum histogram column by column, or (for `W`) the distribution of
/// a subtree's surviving histogram level by level, sibling subtrees being
/// independent and identically distributed. The budget still refers to the
/// number of matrices represented.
pub fn exact_distribution(
    rows: usize,
    cols: usize,
    modulus: u64,
    statistic: Statistic,
    budget: u128,
) -> Result<CountDistribution> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidShape { rows, cols });
    }
    let ring = RingContext::new(modulus)?;
    check_statistic(&ring, cols, statistic)?;
    let cells = (rows * cols) as u32;
    let required = (modulus as u128).checked_pow(cells).filter(|&r| r <= budget);
    if required.is_none() {
        return Err(Error::BudgetExceeded { modulus, cells, budget });
    }

    let columns = column_histograms(&ring, rows);
    let zero = ring.offset(crate::ring::Residue::ZERO);
    let mut weights = BTreeMap::new();
    match statistic {
        Statistic::V0 => {
            let mut start = vec![0u64; modulus as usize];
            start[zero] = 1;
            let mut states = BTreeMap::from([(start, 1u128)]);
            for _ in 0..cols {
                let mut next = BTreeMap::new();
                for (state, w) in &states {
                    for (column, wc) in &columns {
                        *next.entry(cyclic_convolution(state, column)).or_insert(0) += w * wc;
                    }
                }
                states = next;
            }
            for (state, w) in states {
                *weights.entry(state[zero]).or_insert(0) += w;
            }
        }
        Statistic::W => {
            let m = ring.require_dyadic()?;
            let n = tree_depth(cols)?;
            // Level-h states are histograms over the whole ring, zero outside
            // the window D_(m-h).
            let mut states = columns;
            for level in 1..=n {
                let mut next = BTreeMap::new();
                for (left, wl) in &states {
                    for (right, wr) in &states {
                        let merged = windowed_convolution(&ring, m, level, left, right)?;
                        *next.entry(merged).or_insert(0) += wl * wr;
                    }
                }
                states = next;
            }
            for (state, w) in states {
                *weights.entry(state[zero]).or_insert(0) += w;
            }
        }
    }
    CountDistribution::from_weights(weights, DistributionKind::Exact)
}

/// Distribution of one column's residue histogram over all `M^L` columns.
fn column_histograms(ring: &RingContext, rows: usize) -> BTreeMap<Vec<u64>, u128> {
    let m = ring.modulus() as usize;
    let mut states = BTreeMap::from([(vec![0u64; m], 1u128)]);
    for _ in 0..rows {
        let mut next = BTreeMap::new();
        for (hist, w) in &states {
            for r in 0..m {
                let mut h = hist.clone();
                h[r] += 1;
                *next.entry(h).or_insert(0) += w;
            }
        }
        states = next;
    }
    states
}

fn cyclic_convolution(a: &[u64], b: &[u64]) -> Vec<u64> {
    let m = a.len();
    let mut out = vec![0u64; m];
    // Offsets are shifted residues: offset(x) = x - min. For the cyclic sum,
    // offset(x + y) = (offset(x) + offset(y) + min) mod M.
    let shift = m - m / 2 - 1; // -min
    for (i, &ai) in a.iter().enumerate().filter(|(_, &v)| v > 0) {
        for (j, &bj) in b.iter().enumerate().filter(|(_, &v)| v > 0) {
            out[(i + j + m - shift) % m] += ai * bj;
        }
    }
    out
}

fn windowed_convolution(ring: &RingContext, m: u32, level: u32, a: &[u64], b: &[u64]) -> Result<Vec<u64>> {
    let half = crate::ring::window_half_width(m, level)? as i64;
    let mut out = vec![0u64; a.len()];
    for (i, &ai) in a.iter().enumerate().filter(|(_, &v)| v > 0) {
        for (j, &bj) in b.iter().enumerate().filter(|(_, &v)| v > 0) {
            let s = ring.add_mod(ring.from_offset(i), ring.from_offset(j));
            if s.value().abs() <= half {
                out[ring.offset(s)] += ai * bj;
            }
        }
    }
    Ok(out)
}

/// Monte Carlo parameters. Replicate `r` samples its matrix from
/// [`crate::instance::seeded_rng`]`(seed, r)`, so each replicate is a pure
/// function of `(seed, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloConfig {
    pub rows: usize,
    pub cols: usize,
    pub ring: RingContext,
    pub statistic: Statistic,
    pub replicates: u64,
    pub seed: u64,
}

impl MonteCarloConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::ParameterDomain("need at least one replicate"));
        }
        if self.rows < 2 || self.cols < 2 {
            return Err(Error::InvalidShape { rows: self.rows, cols: self.cols });
        }
        check_statistic(&self.ring, self.cols, self.statistic)
    }

    pub fn replicate(&self, r: u64) -> Result<u64> {
        let inst = sample_replicate(self.rows, self.cols, self.ring, self.seed, r)?;
        statistic_value(&inst, self.statistic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub replicates: u64,
    pub mean: f64,
    /// Sample variance with the `K - 1` divisor (0 for `K = 1`).
    pub variance: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarlo {
    pub distribution: CountDistribution,
    pub summary: Summary,
    /// Estimate of the L1 sampling noise of `distribution`: half the L1
    /// distance between the empirical laws of the first and second half of
    /// the replicates.
    pub noise_l1: f64,
}

impl MonteCarlo {
    /// Aggregates per-replicate values given in replicate order.
    pub fn from_values(values: &[u64]) -> Result<Self> {
        let distribution = CountDistribution::from_samples(values)?;
        let k = values.len() as f64;
        let mean = values.iter().map(|&v| v as u128).sum::<u128>() as f64 / k;
        let variance = if values.len() > 1 {
            values.iter().map(|&v| square(v as f64 - mean)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        let noise_l1 = if values.len() >= 2 {
            let (a, b) = values.split_at(values.len() / 2);
            CountDistribution::from_samples(a)?.l1_distance(&CountDistribution::from_samples(b)?) / 2.0
        } else {
            f64::INFINITY
        };
        let summary = Summary { replicates: values.len() as u64, mean, variance, std_error: libm::sqrt(variance / k) };
        Ok(MonteCarlo { distribution, summary, noise_l1 })
    }
}

/// Sequential Monte Carlo driver.
pub fn monte_carlo(config: &MonteCarloConfig) -> Result<MonteCarlo> {
    config.validate()?;
    let values = (0..config.replicates).map(|r| config.replicate(r)).collect::<Result<Vec<_>>>()?;
    MonteCarlo::from_values(&values)
}
