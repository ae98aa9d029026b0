//! Integer coefficients `C_P` expressing the distinct-index sum
//! `Σ* v_{1,l_1} ⊗ … ⊗ v_{n,l_n}` through independent-index partition sums.
//!
//! Two independent routes are provided:
//!
//! * [`compute_coefficients`] follows the inductive construction: peel off
//!   the last slot, then decouple the slot it collides with by
//!   inclusion–exclusion and recurse on the remaining slots.
//! * [`oracle_coefficients`] solves the unitriangular system over the
//!   refinement order directly.

use std::collections::HashMap;
use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::partition::{enumerate_partitions_with_max, SetPartition, DEFAULT_N_MAX};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientTable {
    n: usize,
    entries: Vec<(SetPartition, BigInt)>,
    index: HashMap<SetPartition, usize>,
}

impl CoefficientTable {
    fn from_map(n: usize, n_max: usize, map: &HashMap<Vec<u8>, BigInt>) -> Result<Self> {
        let parts = enumerate_partitions_with_max(n, n_max)?;
        let entries: Vec<_> = parts
            .into_iter()
            .map(|p| {
                let c = map.get(p.rgs()).cloned().unwrap_or_default();
                (p, c)
            })
            .collect();
        Ok(Self::from_entries(n, entries))
    }

    fn from_entries(n: usize, entries: Vec<(SetPartition, BigInt)>) -> Self {
        let index = entries.iter().enumerate().map(|(i, (p, _))| (p.clone(), i)).collect();
        CoefficientTable { n, entries, index }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in canonical partition order.
    pub fn entries(&self) -> &[(SetPartition, BigInt)] {
        &self.entries
    }

    pub fn get(&self, p: &SetPartition) -> Option<&BigInt> {
        self.index.get(p).map(|&i| &self.entries[i].1)
    }

    pub fn to_json(&self) -> CoefficientTableJson {
        CoefficientTableJson {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|(p, c)| CoefficientEntryJson {
                    blocks: p.one_based_blocks(),
                    coefficient: c.to_string(),
                })
                .collect(),
        }
    }

    /// CSV with columns `partition,coefficient`; partitions in `1,3|2,4` form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("partition,coefficient\n");
        for (p, c) in &self.entries {
            out.push_str(&format!("\"{p}\",{c}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct CoefficientTableJson {
    pub n: usize,
    pub entries: Vec<CoefficientEntryJson>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct CoefficientEntryJson {
    pub blocks: Vec<Vec<usize>>,
    pub coefficient: String,
}

pub fn compute_coefficients(n: usize) -> Result<CoefficientTable> {
    compute_coefficients_with_max(n, DEFAULT_N_MAX)
}

pub fn compute_coefficients_with_max(n: usize, n_max: usize) -> Result<CoefficientTable> {
    if n == 0 || n > n_max {
        return Err(invalid(format!("n = {n} outside 1..={n_max}")));
    }
    let mut tables: Vec<HashMap<Vec<u8>, BigInt>> = Vec::with_capacity(n + 1);
    // n = 0: the empty product, coefficient 1 on the empty partition.
    tables.push(HashMap::from([(Vec::new(), BigInt::one())]));
    for k in 1..=n {
        let next = recursive_step(k, &tables);
        tables.push(next);
    }
    CoefficientTable::from_map(n, n_max, &tables[n])
}

fn recursive_step(n: usize, smaller: &[HashMap<Vec<u8>, BigInt>]) -> HashMap<Vec<u8>, BigInt> {
    let mut acc: HashMap<Vec<u8>, BigInt> = HashMap::new();
    match n {
        1 => {
            acc.insert(vec![0], BigInt::one());
            return acc;
        }
        2 => {
            acc.insert(vec![0, 1], BigInt::one());
            acc.insert(vec![0, 0], -BigInt::one());
            return acc;
        }
        _ => {}
    }
    // First term: S_n in the last slot, i.e. {last} joins as its own block.
    for (rgs, c) in &smaller[n - 1] {
        let mut labels: Vec<usize> = rgs.iter().map(|&b| b as usize).collect();
        let fresh = labels.iter().max().map_or(0, |m| m + 1);
        labels.push(fresh);
        add_to(&mut acc, &labels, c);
    }

    // Second term: the last slot collides with slot j0. Build the j0 = n-2
    // contributions once on the canonical layout, then relabel by the
    // transposition (j0 n-2) for every other j0.
    let pivot = n - 2;
    let rest = n - 2; // slots 0..n-2 decoupled by inclusion–exclusion
    let mut pivot_terms: Vec<(Vec<usize>, BigInt)> = Vec::new();
    for mask in 0u32..(1u32 << rest) {
        // J = slots forced to share the pivot index
        let j_size = mask.count_ones() as usize;
        let sign_fact = {
            let f: BigInt = (1..=j_size).map(BigInt::from).product();
            if j_size % 2 == 1 {
                -f
            } else {
                f
            }
        };
        let free: Vec<usize> = (0..rest).filter(|s| mask & (1 << s) == 0).collect();
        for (sub_rgs, c_sub) in &smaller[free.len()] {
            // merged block label 0 holds J ∪ {pivot, last}; sub-blocks shift up
            let mut labels = vec![0usize; n];
            for (k, &slot) in free.iter().enumerate() {
                labels[slot] = sub_rgs[k] as usize + 1;
            }
            let coeff = -(&sign_fact * c_sub);
            pivot_terms.push((labels, coeff));
        }
    }
    for j0 in 0..=pivot {
        for (labels, coeff) in &pivot_terms {
            let mut moved = labels.clone();
            moved.swap(j0, pivot);
            add_to(&mut acc, &moved, coeff);
        }
    }
    acc.retain(|_, v| !v.is_zero());
    acc
}

fn add_to(acc: &mut HashMap<Vec<u8>, BigInt>, labels: &[usize], c: &BigInt) {
    let key = SetPartition::from_labels(labels).rgs().to_vec();
    *acc.entry(key).or_default() += c;
}

/// Solves `Σ_{P ≤ Q} C_P = [Q is all-singletons]` for every `Q`, where
/// `P ≤ Q` means `P` refines `Q`.
///
/// An independent-index sum over `P` splits by which block indices collide:
/// each collision pattern is a coarsening `Q` of `P`, summed over distinct
/// indices. The distinct-index sum is the finest pattern, which gives the
/// system above.
pub fn oracle_coefficients(n: usize) -> Result<CoefficientTable> {
    oracle_coefficients_with_max(n, DEFAULT_N_MAX)
}

pub fn oracle_coefficients_with_max(n: usize, n_max: usize) -> Result<CoefficientTable> {
    let parts = enumerate_partitions_with_max(n, n_max)?;
    let mut solved: HashMap<Vec<u8>, BigInt> = HashMap::with_capacity(parts.len());
    let mut entries = Vec::with_capacity(parts.len());
    // Canonical order lists finer partitions first, so every refinement of Q
    // is already solved when Q is reached.
    for q in parts {
        let rhs = if q.is_singletons() { BigInt::one() } else { BigInt::zero() };
        let mut lower = BigInt::zero();
        for_each_strict_refinement(&q, |rgs| {
            lower += &solved[rgs];
        });
        let c = rhs - lower;
        solved.insert(q.rgs().to_vec(), c.clone());
        entries.push((q, c));
    }
    Ok(CoefficientTable::from_entries(n, entries))
}

/// Calls `f` with the RGS of every partition strictly finer than `q`.
fn for_each_strict_refinement(q: &SetPartition, mut f: impl FnMut(&[u8])) {
    // A refinement picks a partition of each block independently.
    let block_parts: Vec<Vec<SetPartition>> = q
        .blocks()
        .iter()
        .map(|b| enumerate_partitions_with_max(b.len(), usize::MAX).expect("non-empty block"))
        .collect();
    let n = q.n();
    let mut choice = vec![0usize; block_parts.len()];
    let mut labels = vec![0usize; n];
    loop {
        let mut offset = 0;
        let mut strict = false;
        for (bi, block) in q.blocks().iter().enumerate() {
            let sub = &block_parts[bi][choice[bi]];
            if sub.num_blocks() > 1 {
                strict = true;
            }
            for (k, &j) in block.iter().enumerate() {
                labels[j] = offset + sub.block_of(k);
            }
            offset += sub.num_blocks();
        }
        if strict {
            f(SetPartition::from_labels(&labels).rgs());
        }
        // odometer
        let mut i = 0;
        loop {
            if i == choice.len() {
                return;
            }
            choice[i] += 1;
            if choice[i] < block_parts[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

pub const INCLUSION_EXCLUSION_MAX: usize = 20;

/// `Σ_{J ⊆ A} (-1)^{#J} (#J)! · φ(A \ J)`.
///
/// `phi` receives the complement `A \ J` as a sorted slice of elements of `a`.
pub fn inclusion_exclusion<W, F>(a: &[usize], mut phi: F) -> Result<W>
where
    W: Zero + Add<Output = W> + Mul<Output = W> + From<BigInt>,
    F: FnMut(&[usize]) -> W,
{
    if a.len() > INCLUSION_EXCLUSION_MAX {
        return Err(invalid(format!(
            "#A = {} exceeds {INCLUSION_EXCLUSION_MAX} (2^#A terms)",
            a.len()
        )));
    }
    let mut sorted = a.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != a.len() {
        return Err(invalid("A has repeated elements"));
    }
    let factorials: Vec<BigInt> = std::iter::once(BigInt::one())
        .chain((1..=sorted.len()).scan(BigInt::one(), |f, k| {
            *f *= k;
            Some(f.clone())
        }))
        .collect();
    let mut total = W::zero();
    let mut complement = Vec::with_capacity(sorted.len());
    for mask in 0u32..(1u32 << sorted.len()) {
        complement.clear();
        complement.extend(
            sorted
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) == 0)
                .map(|(_, &e)| e),
        );
        let size = mask.count_ones() as usize;
        let mut weight = factorials[size].clone();
        if size % 2 == 1 {
            weight = -weight;
        }
        total = total + W::from(weight) * phi(&complement);
    }
    Ok(total)
}
