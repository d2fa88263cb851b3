//! Wagner's binary-tree algorithm over `Z_(2^m + 1)`.
//!
//! The `N = 2^n` leaves sit at level 0. At level `h` the values of two
//! sibling subtrees are added modulo `M`; the sum survives only if it lies
//! in the window `D_(m-h)`, otherwise the node becomes [`WagnerValue::Terminated`]
//! and so does every ancestor. An index vector is a Wagner solution when the
//! root value is 0.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exhaustive::{column_counts, Counts, SolutionList};
use crate::instance::Instance;
use crate::ring::{Residue, RingContext};

/// Value of a tree node: a residue inside its level window, or the terminal
/// state that marks a candidate as dead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WagnerValue {
    Value(Residue),
    Terminated,
}

impl WagnerValue {
    pub fn residue(self) -> Option<Residue> {
        match self {
            WagnerValue::Value(r) => Some(r),
            WagnerValue::Terminated => None,
        }
    }

    pub fn is_zero(self) -> bool {
        self == WagnerValue::Value(Residue::ZERO)
    }
}

/// Tree depth `n` for `len = 2^n` leaves.
pub fn tree_depth(len: usize) -> Result<u32> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros())
}

fn check_depth(ring: &RingContext, leaves: usize) -> Result<(u32, u32)> {
    let m = ring.require_dyadic()?;
    let n = tree_depth(leaves)?;
    if n > m {
        return Err(Error::DepthExceedsWindow { n, m });
    }
    Ok((n, m))
}

/// Value of the parent at level `level` of two children.
pub fn combine(ring: &RingContext, left: WagnerValue, right: WagnerValue, level: u32) -> Result<WagnerValue> {
    let (WagnerValue::Value(a), WagnerValue::Value(b)) = (left, right) else {
        return Ok(WagnerValue::Terminated);
    };
    let s = ring.add_mod(a, b);
    Ok(if ring.in_window(s, level)? { WagnerValue::Value(s) } else { WagnerValue::Terminated })
}

/// `H_n(x)` for a vector of `2^n` canonical residues, `n <= m`.
pub fn h_value(x: &[Residue], ring: &RingContext) -> Result<WagnerValue> {
    check_depth(ring, x.len())?;
    let mut layer: Vec<WagnerValue> = x.iter().map(|&r| WagnerValue::Value(r)).collect();
    let mut level = 0;
    while layer.len() > 1 {
        level += 1;
        layer = layer.chunks_exact(2).map(|pair| combine(ring, pair[0], pair[1], level)).collect::<Result<_>>()?;
    }
    Ok(layer[0])
}

/// Surviving multiplicities at one level: for each subtree `j`, the number
/// of index combinations over that subtree's columns that reach each
/// residue of `D_(m-h)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelTable {
    pub level: u32,
    pub subtrees: Vec<Counts>,
}

/// Windowed merge of two sibling histograms into their parent at `level`.
pub fn merge_pair(ring: &RingContext, left: &Counts, right: &Counts, level: u32) -> Result<Counts> {
    let mut out = Counts::new();
    for (&a, &ca) in left {
        for (&b, &cb) in right {
            let s = ring.add_mod(a, b);
            if !ring.in_window(s, level)? {
                continue;
            }
            let w = ca.checked_mul(cb).ok_or(Error::CountOverflow)?;
            let slot = out.entry(s).or_insert(0);
            *slot = slot.checked_add(w).ok_or(Error::CountOverflow)?;
        }
    }
    Ok(out)
}

/// All level tables from the leaves (level 0) to the root (level `n`).
pub fn level_tables(inst: &Instance) -> Result<Vec<LevelTable>> {
    let ring = inst.ring();
    let (n, _) = check_depth(&ring, inst.cols())?;
    let leaves = (0..inst.cols()).map(|j| column_counts(inst, j)).collect();
    let mut tables = vec![LevelTable { level: 0, subtrees: leaves }];
    for level in 1..=n {
        let below = &tables[tables.len() - 1].subtrees;
        let subtrees =
            below.chunks_exact(2).map(|pair| merge_pair(&ring, &pair[0], &pair[1], level)).collect::<Result<_>>()?;
        tables.push(LevelTable { level, subtrees });
    }
    Ok(tables)
}

/// `W`: the number of index vectors whose tree value is 0.
pub fn count_wagner(inst: &Instance) -> Result<u128> {
    inst.tuple_count()?;
    let tables = level_tables(inst)?;
    let root = &tables[tables.len() - 1].subtrees[0];
    Ok(root.get(&Residue::ZERO).copied().unwrap_or(0))
}

/// Wagner solutions in lexicographic order, at most `cap` of them.
///
/// The search keeps a stack of completed subtrees; whenever two siblings
/// complete, they are merged and a terminated node prunes the branch.
pub fn list_wagner_solutions(inst: &Instance, cap: usize) -> Result<SolutionList> {
    let ring = inst.ring();
    check_depth(&ring, inst.cols())?;
    let mut out = SolutionList::default();
    let mut index = vec![0usize; inst.cols()];
    let mut stack = Vec::new();
    search_wagner(inst, &ring, 0, &mut stack, &mut index, cap, &mut out)?;
    Ok(out)
}

fn search_wagner(
    inst: &Instance,
    ring: &RingContext,
    col: usize,
    stack: &mut Vec<(u32, Residue)>,
    index: &mut [usize],
    cap: usize,
    out: &mut SolutionList,
) -> Result<bool> {
    if col == inst.cols() {
        debug_assert_eq!(stack.len(), 1);
        if stack[0].1 == Residue::ZERO {
            return Ok(out.push(cap, index));
        }
        return Ok(true);
    }
    for row in 0..inst.rows() {
        index[col] = row;
        let depth = stack.len();
        let mut popped = Vec::new();
        let mut node = WagnerValue::Value(inst.get(row, col));
        let mut level = 0;
        while let Some(&(l, sibling)) = stack.last() {
            if l != level {
                break;
            }
            popped.push(stack.pop().unwrap());
            level += 1;
            node = combine(ring, WagnerValue::Value(sibling), node, level)?;
            if node == WagnerValue::Terminated {
                break;
            }
        }
        let keep_going = match node {
            WagnerValue::Value(v) => {
                stack.push((level, v));
                let go = search_wagner(inst, ring, col + 1, stack, index, cap, out)?;
                stack.pop();
                go
            }
            WagnerValue::Terminated => true,
        };
        while let Some(entry) = popped.pop() {
            stack.push(entry);
        }
        debug_assert_eq!(stack.len(), depth);
        if !keep_going {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exhaustive::{count_zero, list_zero_solutions};
    use crate::instance::sample_instance;

    fn residues(ring: &RingContext, xs: &[i64]) -> Vec<Residue> {
        xs.iter().map(|&x| ring.residue(x).unwrap()).collect()
    }

    fn brute_force_w(inst: &Instance) -> u128 {
        let ring = inst.ring();
        let mut count = 0;
        let mut index = vec![0usize; inst.cols()];
        loop {
            if h_value(&inst.select(&index), &ring).unwrap().is_zero() {
                count += 1;
            }
            let mut j = 0;
            while j < index.len() {
                index[j] += 1;
                if index[j] < inst.rows() {
                    break;
                }
                index[j] = 0;
                j += 1;
            }
            if j == index.len() {
                return count;
            }
        }
    }

    #[test]
    fn h_value_examples() {
        let ring = RingContext::dyadic(3).unwrap();
        let h = |xs: &[i64]| h_value(&residues(&ring, xs), &ring).unwrap();
        assert_eq!(h(&[1, -1, 2, -2]), WagnerValue::Value(Residue::ZERO));
        assert_eq!(h(&[3, 3, 1, 1]), WagnerValue::Terminated);
        assert_eq!(h(&[4, 4, 0, 0]), WagnerValue::Value(ring.residue(-1).unwrap()));
    }

    #[test]
    fn h_value_domain_errors() {
        let ring = RingContext::dyadic(3).unwrap();
        assert_eq!(h_value(&residues(&ring, &[0, 0, 0]), &ring), Err(Error::NotPowerOfTwo(3)));
        assert_eq!(h_value(&residues(&ring, &[0]), &ring), Err(Error::NotPowerOfTwo(1)));
        let small = RingContext::dyadic(1).unwrap();
        assert_eq!(h_value(&residues(&small, &[0, 0, 0, 0]), &small), Err(Error::DepthExceedsWindow { n: 2, m: 1 }));
        let plain = RingContext::new(7).unwrap();
        assert_eq!(h_value(&residues(&plain, &[0, 0]), &plain), Err(Error::NotDyadic { modulus: 7 }));
    }

    #[test]
    fn depth_equal_to_window_is_allowed() {
        // m = n = 2: the root window is D_0 = {0}.
        let ring = RingContext::dyadic(2).unwrap();
        assert!(h_value(&residues(&ring, &[1, 0, -1, 0]), &ring).unwrap().is_zero());
        assert_eq!(h_value(&residues(&ring, &[1, 0, 0, 0]), &ring).unwrap(), WagnerValue::Terminated);
    }

    #[test]
    fn zero_matrix_counts_everything() {
        let ring = RingContext::dyadic(3).unwrap();
        let inst = Instance::zeros(2, 4, ring).unwrap();
        assert_eq!(count_wagner(&inst), Ok(16));
        let list = list_wagner_solutions(&inst, 100).unwrap();
        assert_eq!(list.solutions.len(), 16);
        assert!(!list.truncated);
    }

    #[test]
    fn count_matches_brute_force() {
        let ring = RingContext::dyadic(3).unwrap();
        let inst = sample_instance(3, 4, ring, 7).unwrap();
        assert_eq!(count_wagner(&inst).unwrap(), brute_force_w(&inst));
        for seed in 0..30 {
            let ring = RingContext::dyadic(2 + (seed % 3) as u32).unwrap();
            let inst = sample_instance(3, 4, ring, seed).unwrap();
            assert_eq!(count_wagner(&inst).unwrap(), brute_force_w(&inst));
        }
    }

    #[test]
    fn single_level_equals_zero_count() {
        for seed in 0..20 {
            let ring = RingContext::dyadic(1 + (seed % 4) as u32).unwrap();
            let inst = sample_instance(5, 2, ring, seed).unwrap();
            assert_eq!(count_wagner(&inst).unwrap(), count_zero(&inst).unwrap());
        }
    }

    #[test]
    fn level_tables_shape() {
        let ring = RingContext::dyadic(4).unwrap();
        let inst = sample_instance(3, 8, ring, 11).unwrap();
        let tables = level_tables(&inst).unwrap();
        assert_eq!(tables.len(), 4);
        for t in &tables {
            assert_eq!(t.subtrees.len(), 8 >> t.level);
            for sub in &t.subtrees {
                for &r in sub.keys() {
                    assert!(ring.in_window(r, t.level).unwrap());
                }
            }
        }
        assert!(tables[0].subtrees.iter().all(|s| s.values().sum::<u128>() == 3));
    }

    #[test]
    fn listing_agrees_with_count_and_exhaustive() {
        for seed in 0..20 {
            let ring = RingContext::dyadic(3).unwrap();
            let inst = sample_instance(4, 4, ring, seed).unwrap();
            let list = list_wagner_solutions(&inst, usize::MAX).unwrap();
            assert_eq!(list.solutions.len() as u128, count_wagner(&inst).unwrap());
            let zero = list_zero_solutions(&inst, usize::MAX).solutions;
            for s in &list.solutions {
                assert!(h_value(&inst.select(s), &ring).unwrap().is_zero());
                assert!(zero.contains(s));
            }
            assert!(list.solutions.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn listing_truncates() {
        let ring = RingContext::dyadic(3).unwrap();
        let inst = Instance::zeros(2, 4, ring).unwrap();
        let list = list_wagner_solutions(&inst, 5).unwrap();
        assert_eq!(list.solutions.len(), 5);
        assert!(list.truncated);
        assert_eq!(list.solutions[0], vec![0, 0, 0, 0]);
        assert_eq!(list.solutions[4], vec![0, 1, 0, 0]);
    }

    #[test]
    fn non_dyadic_rejected() {
        let inst = Instance::zeros(2, 4, RingContext::new(10).unwrap()).unwrap();
        assert!(matches!(count_wagner(&inst), Err(Error::NotDyadic { .. })));
        let inst = Instance::zeros(2, 3, RingContext::dyadic(3).unwrap()).unwrap();
        assert_eq!(count_wagner(&inst), Err(Error::NotPowerOfTwo(3)));
    }
}
