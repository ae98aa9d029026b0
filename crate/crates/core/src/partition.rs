//! Set partitions of `{0, …, n-1}`.
//!
//! A partition is stored as its restricted-growth string (RGS): `rgs[j]` is
//! the index of the block holding `j`, and blocks are numbered in order of
//! their minimum element. Two partitions are equal iff their RGS are equal.
//!
//! Element labels are zero-based in the API. Display and the `"1,3|2,4"`
//! text form use one-based labels.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_N_MAX: usize = 10;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    rgs: Vec<u8>,
    blocks: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionClass {
    Single,
    Double,
    Joint,
}

impl SetPartition {
    /// Builds a partition from an arbitrary labelling; labels are relabelled
    /// into restricted-growth form.
    pub fn from_labels<T: PartialEq>(labels: &[T]) -> Self {
        let mut seen: Vec<&T> = Vec::new();
        let mut rgs = Vec::with_capacity(labels.len());
        for label in labels {
            let idx = match seen.iter().position(|s| *s == label) {
                Some(i) => i,
                None => {
                    seen.push(label);
                    seen.len() - 1
                }
            };
            rgs.push(idx as u8);
        }
        Self::from_rgs_unchecked(rgs)
    }

    pub fn from_rgs(rgs: &[u8]) -> Result<Self> {
        let mut max_seen: i32 = -1;
        for &v in rgs {
            if v as i32 > max_seen + 1 {
                return Err(invalid(format!("{rgs:?} is not a restricted-growth string")));
            }
            max_seen = max_seen.max(v as i32);
        }
        Ok(Self::from_rgs_unchecked(rgs.to_vec()))
    }

    fn from_rgs_unchecked(rgs: Vec<u8>) -> Self {
        let nblocks = rgs.iter().map(|&b| b as usize + 1).max().unwrap_or(0);
        let mut blocks = vec![Vec::new(); nblocks];
        for (j, &b) in rgs.iter().enumerate() {
            blocks[b as usize].push(j);
        }
        SetPartition { rgs, blocks }
    }

    /// Builds a partition of `{0, …, n-1}` from zero-based blocks.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(invalid("empty block"));
            }
            for &j in block {
                if j >= n {
                    return Err(invalid(format!("element {j} outside ground set of size {n}")));
                }
                if labels[j] != usize::MAX {
                    return Err(invalid(format!("element {j} appears in two blocks")));
                }
                labels[j] = b;
            }
        }
        if let Some(j) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(invalid(format!("element {j} is not covered")));
        }
        Ok(Self::from_labels(&labels))
    }

    /// Same as [`from_blocks`](Self::from_blocks) with one-based labels,
    /// e.g. `&[&[1, 3], &[2, 4]]`.
    pub fn from_one_based(n: usize, blocks: &[&[usize]]) -> Result<Self> {
        let zero_based: Vec<Vec<usize>> = blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|&j| j.checked_sub(1).ok_or_else(|| invalid("label 0 in one-based block")))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Self::from_blocks(n, &zero_based)
    }

    pub fn singletons(n: usize) -> Self {
        Self::from_rgs_unchecked((0..n as u8).collect())
    }

    pub fn n(&self) -> usize {
        self.rgs.len()
    }

    pub fn rgs(&self) -> &[u8] {
        &self.rgs
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Index of the block containing `j`.
    pub fn block_of(&self, j: usize) -> usize {
        self.rgs[j] as usize
    }

    pub fn one_based_blocks(&self) -> Vec<Vec<usize>> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|j| j + 1).collect())
            .collect()
    }

    pub fn is_singletons(&self) -> bool {
        self.blocks.len() == self.rgs.len()
    }

    pub fn is_double(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 2)
    }

    pub fn class(&self) -> PartitionClass {
        classify_partition(self)
    }

    /// `true` if every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &SetPartition) -> bool {
        self.n() == other.n()
            && self
                .blocks
                .iter()
                .all(|b| b.iter().all(|&j| other.block_of(j) == other.block_of(b[0])))
    }

    /// Relabels elements: element `j` of `self` becomes `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut labels = vec![0usize; self.n()];
        for (j, &b) in self.rgs.iter().enumerate() {
            labels[perm[j]] = b as usize;
        }
        Self::from_labels(&labels)
    }

    /// Sorted block sizes, largest first.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.blocks.iter().map(Vec::len).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, block) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            for (k, j) in block.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", j + 1)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self)
    }
}

impl FromStr for SetPartition {
    type Err = Error;

    /// Parses the one-based `"1,3|2,4"` form; `n` is the largest label.
    fn from_str(s: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        for part in s.split('|') {
            let block = part
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad element `{t}` in partition `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            blocks.push(block);
        }
        let n = blocks.iter().flatten().copied().max().unwrap_or(0);
        let refs: Vec<&[usize]> = blocks.iter().map(Vec::as_slice).collect();
        Self::from_one_based(n, &refs)
    }
}

pub fn classify_partition(p: &SetPartition) -> PartitionClass {
    if p.blocks.iter().any(|b| b.len() == 1) {
        PartitionClass::Single
    } else if p.is_double() {
        PartitionClass::Double
    } else {
        PartitionClass::Joint
    }
}

fn check_n(n: usize, n_max: usize) -> Result<()> {
    if n == 0 || n > n_max {
        return Err(invalid(format!("n = {n} outside 1..={n_max}")));
    }
    Ok(())
}

/// Every partition of `{0, …, n-1}` exactly once.
///
/// Canonical order: more blocks first (so the all-singletons partition leads
/// and every partition precedes the partitions it refines into), ties broken
/// by lexicographic RGS order.
pub fn enumerate_partitions(n: usize) -> Result<Vec<SetPartition>> {
    enumerate_partitions_with_max(n, DEFAULT_N_MAX)
}

pub fn enumerate_partitions_with_max(n: usize, n_max: usize) -> Result<Vec<SetPartition>> {
    check_n(n, n_max)?;
    if n > u8::MAX as usize {
        return Err(invalid("n exceeds the RGS label width"));
    }
    let mut out = Vec::new();
    let mut rgs = vec![0u8; n];
    // maxes[j] = max(rgs[0..=j])
    let mut maxes = vec![0u8; n];
    loop {
        out.push(SetPartition::from_rgs_unchecked(rgs.clone()));
        // Find rightmost position that can be incremented.
        let mut j = n - 1;
        loop {
            if j == 0 {
                out.sort_by(|a, b| b.num_blocks().cmp(&a.num_blocks()).then_with(|| a.rgs.cmp(&b.rgs)));
                return Ok(out);
            }
            if rgs[j] <= maxes[j - 1] {
                break;
            }
            j -= 1;
        }
        rgs[j] += 1;
        maxes[j] = maxes[j - 1].max(rgs[j]);
        for k in j + 1..n {
            rgs[k] = 0;
            maxes[k] = maxes[j];
        }
    }
}

/// Bell numbers via the Bell triangle.
pub fn bell_number(n: usize) -> BigUint {
    let mut row = vec![BigUint::one()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(row.last().cloned().unwrap_or_else(BigUint::zero));
        for v in &row {
            let s = next.last().unwrap() + v;
            next.push(s);
        }
        row = next;
    }
    row[0].clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, blocks: &[&[usize]]) -> SetPartition {
        SetPartition::from_one_based(n, blocks).unwrap()
    }

    #[test]
    fn small_enumerations() {
        let one = enumerate_partitions(1).unwrap();
        assert_eq!(one, vec![p(1, &[&[1]])]);
        let two = enumerate_partitions(2).unwrap();
        assert_eq!(two, vec![p(2, &[&[1], &[2]]), p(2, &[&[1, 2]])]);
    }

    #[test]
    fn four_has_fifteen() {
        // Brute-force oracle: all labellings in {0..3}^4, canonicalized and deduplicated.
        let mut seen = std::collections::BTreeSet::new();
        for code in 0..4usize.pow(4) {
            let labels: Vec<usize> = (0..4).map(|k| (code / 4usize.pow(k)) % 4).collect();
            seen.insert(SetPartition::from_labels(&labels).rgs().to_vec());
        }
        assert_eq!(seen.len(), 15);
        let listed: std::collections::BTreeSet<_> =
            enumerate_partitions(4).unwrap().iter().map(|q| q.rgs().to_vec()).collect();
        assert_eq!(listed, seen);
    }

    #[test]
    fn counts_match_bell_triangle() {
        for n in 1..=9 {
            assert_eq!(BigUint::from(enumerate_partitions(n).unwrap().len()), bell_number(n), "n={n}");
        }
        assert_eq!(bell_number(10), BigUint::from(115_975u32));
    }

    #[test]
    fn range_errors() {
        assert!(enumerate_partitions(0).is_err());
        assert!(enumerate_partitions(11).is_err());
        assert!(enumerate_partitions_with_max(11, 11).is_ok());
    }

    #[test]
    fn canonical_order_is_a_linear_extension_of_refinement() {
        let parts = enumerate_partitions(5).unwrap();
        for (i, a) in parts.iter().enumerate() {
            for b in &parts[..i] {
                assert!(!(a.refines(b) && a != b), "{a} refines earlier {b}");
            }
        }
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_partition(&p(4, &[&[1], &[2, 3, 4]])), PartitionClass::Single);
        assert_eq!(classify_partition(&p(4, &[&[1, 2], &[3, 4]])), PartitionClass::Double);
        assert_eq!(classify_partition(&p(6, &[&[1, 2, 3, 4], &[5, 6]])), PartitionClass::Joint);
    }

    #[test]
    fn class_counts_cover_everything() {
        for n in 1..=8 {
            let parts = enumerate_partitions(n).unwrap();
            let count = |c| parts.iter().filter(|q| q.class() == c).count();
            let (s, d, j) = (count(PartitionClass::Single), count(PartitionClass::Double), count(PartitionClass::Joint));
            assert_eq!(s + d + j, parts.len());
            if n % 2 == 1 {
                assert_eq!(d, 0);
            }
        }
        // (2r-1)!! perfect matchings
        let six = enumerate_partitions(6).unwrap();
        assert_eq!(six.iter().filter(|q| q.is_double()).count(), 15);
    }

    #[test]
    fn block_lookup_and_text_form() {
        let q: SetPartition = "1,3|2,4".parse().unwrap();
        assert_eq!(q.block_of(0), 0);
        assert_eq!(q.block_of(2), 0);
        assert_eq!(q.block_of(3), 1);
        assert_eq!(q.to_string(), "1,3|2,4");
        assert_eq!(q.rgs(), &[0, 1, 0, 1]);
        // blocks given out of order still canonicalize
        assert_eq!(p(4, &[&[4, 2], &[3, 1]]), q);
    }

    #[test]
    fn malformed_blocks_rejected() {
        assert!(SetPartition::from_one_based(3, &[&[1, 2]]).is_err());
        assert!(SetPartition::from_one_based(3, &[&[1, 2], &[2, 3]]).is_err());
        assert!(SetPartition::from_one_based(2, &[&[1, 3], &[2]]).is_err());
        assert!(SetPartition::from_rgs(&[0, 2]).is_err());
    }

    #[test]
    fn permuting_swaps_labels() {
        let q = p(4, &[&[1, 2], &[3], &[4]]);
        let swapped = q.permuted(&[0, 3, 2, 1]);
        assert_eq!(swapped, p(4, &[&[1, 4], &[3], &[2]]));
    }
}
