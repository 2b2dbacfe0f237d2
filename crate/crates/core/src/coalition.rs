//! Coalitions of organizations as bit sets.

use std::fmt;

use crate::error::{Error, Result};

/// Largest coalition the exponential algorithms (subset enumeration, exact
/// Shapley contributions, the exact fair scheduler) accept.
pub const MAX_EXACT_ORGS: usize = 20;

/// Hard limit of the bit-set representation.
pub const MAX_ORGS: usize = 32;

/// A set of organization ids, stored as a bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coalition(u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn from_bits(bits: u32) -> Self {
        Coalition(bits)
    }

    /// The coalition `{0, 1, ..., k - 1}`.
    pub fn grand(k: usize) -> Result<Self> {
        if k > MAX_ORGS {
            return Err(Error::Capacity {
                size: k,
                limit: MAX_ORGS,
            });
        }
        Ok(Coalition(if k == MAX_ORGS {
            u32::MAX
        } else {
            (1u32 << k) - 1
        }))
    }

    pub fn singleton(org: usize) -> Self {
        debug_assert!(org < MAX_ORGS);
        Coalition(1 << org)
    }

    pub fn from_members<I: IntoIterator<Item = usize>>(members: I) -> Self {
        members
            .into_iter()
            .fold(Coalition::EMPTY, |c, org| c.with(org))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, org: usize) -> bool {
        org < MAX_ORGS && self.0 & (1 << org) != 0
    }

    #[must_use]
    pub fn with(self, org: usize) -> Self {
        debug_assert!(org < MAX_ORGS);
        Coalition(self.0 | (1 << org))
    }

    #[must_use]
    pub fn without(self, org: usize) -> Self {
        Coalition(self.0 & !(1u32 << org))
    }

    pub fn is_subset_of(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    /// Member ids in ascending order.
    pub fn members(self) -> Members {
        Members(self.0)
    }

    /// Position of `org` among the members (its rank in ascending order).
    pub fn rank_of(self, org: usize) -> Option<usize> {
        if !self.contains(org) {
            return None;
        }
        Some((self.0 & ((1u32 << org) - 1)).count_ones() as usize)
    }

    /// All submasks of this coalition, in no particular order (fast path for internal loops).
    pub(crate) fn submasks(self) -> impl Iterator<Item = Coalition> {
        let full = self.0;
        let mut next = Some(full);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == 0 {
                None
            } else {
                Some((cur - 1) & full)
            };
            Some(Coalition(cur))
        })
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members()).finish()
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.members().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<usize> for Coalition {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Coalition::from_members(iter)
    }
}

#[derive(Clone, Debug)]
pub struct Members(u32);

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let org = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(org)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Members {}

/// Every subset of `c` exactly once, ordered by size and then lexicographically
/// by member ids.
pub fn enumerate_subcoalitions(c: Coalition) -> Result<impl Iterator<Item = Coalition>> {
    if c.len() > MAX_EXACT_ORGS {
        return Err(Error::Capacity {
            size: c.len(),
            limit: MAX_EXACT_ORGS,
        });
    }
    let members: Vec<usize> = c.members().collect();
    let n = members.len();
    let mut out = Vec::with_capacity(1 << n);
    // Combinations of member positions in lexicographic order, one size at a time.
    for size in 0..=n {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(Coalition::from_members(idx.iter().map(|&i| members[i])));
            let Some(pos) = (0..size).rev().find(|&p| idx[p] != p + n - size) else {
                break;
            };
            idx[pos] += 1;
            for q in pos + 1..size {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    Ok(out.into_iter())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn two_member_order() {
        let subs: Vec<_> = enumerate_subcoalitions(Coalition::from_members([0, 1]))
            .unwrap()
            .collect();
        assert_eq!(
            subs,
            vec![
                Coalition::EMPTY,
                Coalition::singleton(0),
                Coalition::singleton(1),
                Coalition::from_members([0, 1]),
            ]
        );
    }

    #[test]
    fn empty_yields_only_empty() {
        let subs: Vec<_> = enumerate_subcoalitions(Coalition::EMPTY).unwrap().collect();
        assert_eq!(subs, vec![Coalition::EMPTY]);
    }

    #[test]
    fn ten_members_give_1024_distinct_subsets() {
        let c = Coalition::from_members([0, 2, 3, 5, 7, 8, 11, 13, 17, 19]);
        let subs: Vec<_> = enumerate_subcoalitions(c).unwrap().collect();
        assert_eq!(subs.len(), 1024);
        let uniq: HashSet<_> = subs.iter().copied().collect();
        assert_eq!(uniq.len(), 1024);
        assert!(subs.iter().all(|s| s.is_subset_of(c)));
        // sizes never decrease
        assert!(subs.windows(2).all(|w| w[0].len() <= w[1].len()));
    }

    #[test]
    fn size_then_lexicographic() {
        let c = Coalition::from_members([1, 4, 6]);
        let subs: Vec<Vec<usize>> = enumerate_subcoalitions(c)
            .unwrap()
            .map(|s| s.members().collect())
            .collect();
        assert_eq!(
            subs,
            vec![
                vec![],
                vec![1],
                vec![4],
                vec![6],
                vec![1, 4],
                vec![1, 6],
                vec![4, 6],
                vec![1, 4, 6],
            ]
        );
    }

    #[test]
    fn capacity_error_above_limit() {
        let c = Coalition::grand(21).unwrap();
        assert!(matches!(
            enumerate_subcoalitions(c),
            Err(Error::Capacity { size: 21, limit: 20 })
        ));
    }

    #[test]
    fn rank_and_submasks() {
        let c = Coalition::from_members([2, 5, 9]);
        assert_eq!(c.rank_of(5), Some(1));
        assert_eq!(c.rank_of(3), None);
        assert_eq!(c.submasks().count(), 8);
        assert_eq!(c.to_string(), "{2,5,9}");
    }
}
