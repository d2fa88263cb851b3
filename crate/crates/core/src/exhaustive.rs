//! Exact census of the counts `V_b`: the number of index vectors whose
//! selected entries sum to `b` modulo `M`.
//!
//! Counting goes through per-column residue histograms convolved over
//! `Z_M`, so the cost is `O(N * min(M, L^N) * L)` instead of `L^N`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::ring::{Residue, RingContext};

/// Sparse residue histogram with 128-bit multiplicities.
pub type Counts = BTreeMap<Residue, u128>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Census {
    ring: RingContext,
    counts: Counts,
    total: u128,
}

impl Census {
    /// `V_b`.
    pub fn count(&self, b: Residue) -> u128 {
        self.counts.get(&b).copied().unwrap_or(0)
    }

    /// `L^N`, which also equals the sum of all `V_b`.
    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn ring(&self) -> RingContext {
        self.ring
    }

    /// Non-zero counts in increasing residue order.
    pub fn nonzero(&self) -> impl Iterator<Item = (Residue, u128)> + '_ {
        self.counts.iter().map(|(&b, &c)| (b, c))
    }

    /// Every residue of the window with its count, zeros included.
    pub fn dense(&self) -> impl Iterator<Item = (Residue, u128)> + '_ {
        self.ring.residues().map(|b| (b, self.count(b)))
    }
}

/// Histogram of the residues in column `col`.
pub fn column_counts(inst: &Instance, col: usize) -> Counts {
    let mut counts = Counts::new();
    for a in inst.column(col) {
        *counts.entry(a).or_insert(0) += 1;
    }
    counts
}

/// Cyclic convolution of two histograms over the ring.
pub fn convolve(ring: &RingContext, left: &Counts, right: &Counts) -> Result<Counts> {
    let mut out = Counts::new();
    for (&a, &ca) in left {
        for (&b, &cb) in right {
            let w = ca.checked_mul(cb).ok_or(Error::CountOverflow)?;
            let slot = out.entry(ring.add_mod(a, b)).or_insert(0);
            *slot = slot.checked_add(w).ok_or(Error::CountOverflow)?;
        }
    }
    Ok(out)
}

pub fn census(inst: &Instance) -> Result<Census> {
    let total = inst.tuple_count()?;
    let ring = inst.ring();
    let mut acc = column_counts(inst, 0);
    for col in 1..inst.cols() {
        acc = convolve(&ring, &acc, &column_counts(inst, col))?;
    }
    debug_assert_eq!(acc.values().sum::<u128>(), total);
    Ok(Census { ring, counts: acc, total })
}

/// `V_0`.
pub fn count_zero(inst: &Instance) -> Result<u128> {
    Ok(census(inst)?.count(Residue::ZERO))
}

/// Index vectors (zero-based rows, one per column) in lexicographic order,
/// at most `cap` of them. `truncated` is set when more exist.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SolutionList {
    pub solutions: Vec<Vec<usize>>,
    pub truncated: bool,
}

impl SolutionList {
    pub(crate) fn push(&mut self, cap: usize, index: &[usize]) -> bool {
        if self.solutions.len() == cap {
            self.truncated = true;
            return false;
        }
        self.solutions.push(index.to_vec());
        true
    }
}

/// Suffix sets larger than this are not built; the search then runs without
/// pruning at those depths.
const SUFFIX_SET_LIMIT: usize = 1 << 16;

/// Lists zero-sum index vectors by depth-first search. A partial sum `s`
/// after `j` columns is pruned when `-s` is not reachable from the
/// remaining columns.
pub fn list_zero_solutions(inst: &Instance, cap: usize) -> SolutionList {
    let ring = inst.ring();
    let cols = inst.cols();
    // reachable[j]: sums attainable from columns j..N, when small enough.
    let mut reachable: Vec<Option<BTreeSet<Residue>>> = vec![None; cols + 1];
    reachable[cols] = Some(BTreeSet::from([Residue::ZERO]));
    for j in (0..cols).rev() {
        let Some(next) = &reachable[j + 1] else { break };
        let column: BTreeSet<Residue> = inst.column(j).collect();
        if next.len().saturating_mul(column.len()) > SUFFIX_SET_LIMIT * 4 {
            break;
        }
        let set: BTreeSet<Residue> =
            column.iter().flat_map(|&a| next.iter().map(move |&b| ring.add_mod(a, b))).collect();
        if set.len() > SUFFIX_SET_LIMIT {
            break;
        }
        reachable[j] = Some(set);
    }

    let mut out = SolutionList::default();
    let mut index = vec![0usize; cols];
    search_zero(inst, &reachable, 0, Residue::ZERO, &mut index, cap, &mut out);
    out
}

fn search_zero(
    inst: &Instance,
    reachable: &[Option<BTreeSet<Residue>>],
    col: usize,
    partial: Residue,
    index: &mut [usize],
    cap: usize,
    out: &mut SolutionList,
) -> bool {
    let ring = inst.ring();
    if let Some(set) = &reachable[col] {
        if !set.contains(&ring.neg(partial)) {
            return true;
        }
    }
    if col == inst.cols() {
        return out.push(cap, index);
    }
    for row in 0..inst.rows() {
        index[col] = row;
        let next = ring.add_mod(partial, inst.get(row, col));
        if !search_zero(inst, reachable, col + 1, next, index, cap, out) {
            return false;
        }
    }
    true
}
