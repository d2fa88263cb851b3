//! The random matrix `A = (a_ij)` with `L` rows and `N` columns.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::error::{Error, Result};
use crate::ring::{Residue, RingContext};

/// An `L x N` matrix of canonical residues, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    rows: usize,
    cols: usize,
    ring: RingContext,
    entries: Vec<Residue>,
    seed: Option<u64>,
}

impl Instance {
    pub fn new(rows: usize, cols: usize, ring: RingContext, entries: Vec<Residue>) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidShape { rows, cols });
        }
        let expected = rows.checked_mul(cols).ok_or(Error::InvalidShape { rows, cols })?;
        if entries.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: entries.len() });
        }
        for e in &entries {
            ring.residue(e.value())?;
        }
        Ok(Instance { rows, cols, ring, entries, seed: None })
    }

    /// Builds an instance from raw integers, rejecting non-canonical values.
    pub fn from_values(rows: usize, cols: usize, ring: RingContext, values: &[i64]) -> Result<Self> {
        let entries = values.iter().map(|&v| ring.residue(v)).collect::<Result<Vec<_>>>()?;
        Self::new(rows, cols, ring, entries)
    }

    /// Builds an instance from its columns; handy in tests where the model
    /// is naturally column-oriented.
    pub fn from_columns(ring: RingContext, columns: &[&[i64]]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: columns.iter().map(|c| c.len()).sum(),
            });
        }
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            values.extend(columns.iter().map(|c| c[i]));
        }
        Self::from_values(rows, cols, ring, &values)
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    /// The all-zero matrix.
    pub fn zeros(rows: usize, cols: usize, ring: RingContext) -> Result<Self> {
        Self::new(rows, cols, ring, alloc::vec![Residue::ZERO; rows.saturating_mul(cols)])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ring(&self) -> RingContext {
        self.ring
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn entries(&self) -> &[Residue] {
        &self.entries
    }

    /// Entry `a_ij` with zero-based `row` and `col`.
    pub fn get(&self, row: usize, col: usize) -> Residue {
        self.entries[row * self.cols + col]
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = Residue> + '_ {
        (0..self.rows).map(move |i| self.get(i, col))
    }

    /// The entries `(a_(i_1,1), ..., a_(i_N,N))` picked by a zero-based index
    /// vector.
    pub fn select(&self, index: &[usize]) -> Vec<Residue> {
        index.iter().enumerate().map(|(j, &i)| self.get(i, j)).collect()
    }

    /// `L^N`, if it fits in 128 bits.
    pub fn tuple_count(&self) -> Result<u128> {
        let exp = u32::try_from(self.cols).map_err(|_| Error::CountOverflow)?;
        (self.rows as u128).checked_pow(exp).ok_or(Error::CountOverflow)
    }
}

/// Generator for replicate `stream` under `seed`: ChaCha8 keyed by
/// `seed_from_u64(seed)`, positioned on stream `stream`. Distinct
/// `(seed, stream)` pairs give distinct generators.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Samples a matrix with independent uniform entries, row-major from stream
/// 0 of [`seeded_rng`].
pub fn sample_instance(rows: usize, cols: usize, ring: RingContext, seed: u64) -> Result<Instance> {
    let inst = sample_replicate(rows, cols, ring, seed, 0)?;
    Ok(inst.with_seed(Some(seed)))
}

/// Matrix for Monte Carlo replicate `replicate`. Replicate 0 coincides with
/// [`sample_instance`].
pub fn sample_replicate(rows: usize, cols: usize, ring: RingContext, seed: u64, replicate: u64) -> Result<Instance> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidShape { rows, cols });
    }
    let mut rng = seeded_rng(seed, replicate);
    let len = rows.checked_mul(cols).ok_or(Error::InvalidShape { rows, cols })?;
    let entries = (0..len).map(|_| ring.sample(&mut rng)).collect();
    Instance::new(rows, cols, ring, entries)
}
