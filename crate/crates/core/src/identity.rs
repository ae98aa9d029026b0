//! Distinct-index sums, independent-index partition sums, and verification of
//!
//! ```text
//! Σ*_{l_1..l_n distinct} Λ(v_{l_1}, …, v_{l_n}) = Σ_P C_P Σ_{(l_B)_{B∈P}} Λ(v_{l_{P(1)}}, …, v_{l_{P(n)}})
//! ```
//!
//! for a multilinear map `Λ`. Every map supported here factors into a
//! product of unary or binary factors over slots, so at a fixed atom it is
//! precomputed once into index tables ([`SlotTensor`]) and the sums become
//! nested loops that multiply a factor in as soon as all its slots are bound.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::bilinear::{BilinearForm, FunctionFamily, Vector};
use crate::coefficients::CoefficientTable;
use crate::config::CostGuard;
use crate::error::{invalid, Result};
use crate::partition::SetPartition;
use crate::scalar::{Mode, Scalar};

/// Slots are bounded so tuple counts stay representable and loops finite.
pub const MAX_ARITY: usize = 20;

/// Relative tolerance for float-mode identity checks.
pub const FLOAT_RTOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub enum Factor<S> {
    /// `table[l]` for the index bound to `slot`.
    Unary { slot: usize, table: Vec<S> },
    /// `table[a * len + b]` for indices bound to `left` and `right`.
    Binary { left: usize, right: usize, table: Vec<S> },
}

/// A multilinear map restricted to family members at one atom.
#[derive(Debug, Clone)]
pub struct SlotTensor<S> {
    arity: usize,
    len: usize,
    factors: Vec<Factor<S>>,
}

impl<S: Scalar> SlotTensor<S> {
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Number of family members each slot ranges over.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn factor_value(&self, f: &Factor<S>, idx_of_slot: impl Fn(usize) -> usize) -> S {
        match f {
            Factor::Unary { slot, table } => table[idx_of_slot(*slot)].clone(),
            Factor::Binary { left, right, table } => {
                table[idx_of_slot(*left) * self.len + idx_of_slot(*right)].clone()
            }
        }
    }

    fn factor_slots(f: &Factor<S>) -> Vec<usize> {
        match f {
            Factor::Unary { slot, .. } => vec![*slot],
            Factor::Binary { left, right, .. } => vec![*left, *right],
        }
    }

    /// Value at one index tuple.
    pub fn eval(&self, idx: &[usize]) -> S {
        let mut acc = S::one();
        for f in &self.factors {
            acc *= &self.factor_value(f, |s| idx[s]);
        }
        acc
    }

    /// Sum over `vars` independent (or pairwise distinct) indices, where
    /// slot `j` receives the index of variable `var_of_slot[j]`.
    fn contract(&self, var_of_slot: &[usize], vars: usize, distinct: bool) -> S {
        let mut at_level: Vec<Vec<&Factor<S>>> = vec![Vec::new(); vars];
        for f in &self.factors {
            let level = Self::factor_slots(f).iter().map(|&s| var_of_slot[s]).max().unwrap_or(0);
            at_level[level].push(f);
        }
        let mut state = Contraction {
            tensor: self,
            var_of_slot,
            at_level,
            assign: vec![0; vars],
            used: vec![false; self.len],
            distinct,
            acc: S::zero(),
        };
        if vars == 0 {
            return S::one();
        }
        state.descend(0, S::one());
        state.acc
    }
}

struct Contraction<'a, S> {
    tensor: &'a SlotTensor<S>,
    var_of_slot: &'a [usize],
    at_level: Vec<Vec<&'a Factor<S>>>,
    assign: Vec<usize>,
    used: Vec<bool>,
    distinct: bool,
    acc: S,
}

impl<S: Scalar> Contraction<'_, S> {
    fn descend(&mut self, level: usize, prefix: S) {
        let last = level + 1 == self.assign.len();
        for l in 0..self.tensor.len {
            if self.distinct && self.used[l] {
                continue;
            }
            self.assign[level] = l;
            let mut value = prefix.clone();
            for f in &self.at_level[level] {
                let assign = &self.assign;
                let vos = self.var_of_slot;
                value *= &self.tensor.factor_value(f, |s| assign[vos[s]]);
            }
            if value.is_zero() {
                continue;
            }
            if last {
                self.acc += &value;
            } else {
                if self.distinct {
                    self.used[l] = true;
                }
                self.descend(level + 1, value);
                if self.distinct {
                    self.used[l] = false;
                }
            }
        }
    }
}

/// A multilinear map on `R^dim` that factors over slots.
pub trait MultilinearMap<S: Scalar>: Sync {
    fn arity(&self) -> usize;
    fn dim(&self) -> usize;
    /// Direct evaluation on `arity` vectors.
    fn eval(&self, vs: &[&[S]]) -> Result<S>;
    /// Precomputed index tables at atom `x`.
    fn tensor_at(&self, family: &FunctionFamily<S>, x: usize) -> SlotTensor<S>;
}

/// `Λ(v_1, …, v_{2r}) = Π_j B(v_{2j-1}, v_{2j})`.
#[derive(Debug, Clone)]
pub struct LambdaMap<S> {
    form: BilinearForm<S>,
    r: usize,
}

impl<S: Scalar> LambdaMap<S> {
    pub fn new(form: BilinearForm<S>, r: usize) -> Result<Self> {
        if r == 0 || 2 * r > MAX_ARITY {
            return Err(invalid(format!("r = {r} outside 1..={}", MAX_ARITY / 2)));
        }
        Ok(LambdaMap { form, r })
    }

    pub fn form(&self) -> &BilinearForm<S> {
        &self.form
    }

    pub fn r(&self) -> usize {
        self.r
    }
}

impl<S: Scalar> MultilinearMap<S> for LambdaMap<S> {
    fn arity(&self) -> usize {
        2 * self.r
    }

    fn dim(&self) -> usize {
        self.form.dim()
    }

    fn eval(&self, vs: &[&[S]]) -> Result<S> {
        self.form.lambda_eval(self.r, vs)
    }

    fn tensor_at(&self, family: &FunctionFamily<S>, x: usize) -> SlotTensor<S> {
        let gram: Vec<S> = family.gram_at(&self.form, x).into_iter().flatten().collect();
        SlotTensor {
            arity: 2 * self.r,
            len: family.len(),
            factors: (0..self.r)
                .map(|j| Factor::Binary { left: 2 * j, right: 2 * j + 1, table: gram.clone() })
                .collect(),
        }
    }
}

/// `Λ(v_1, …, v_n) = Π_j ⟨a_j, v_j⟩`: a pure-tensor functional, available for
/// every arity including odd ones.
#[derive(Debug, Clone)]
pub struct ProductFunctional<S> {
    functionals: Vec<Vector<S>>,
}

impl<S: Scalar> ProductFunctional<S> {
    pub fn new(functionals: Vec<Vector<S>>) -> Result<Self> {
        let n = functionals.len();
        if n == 0 || n > MAX_ARITY {
            return Err(invalid(format!("arity {n} outside 1..={MAX_ARITY}")));
        }
        let dim = functionals[0].len();
        if dim == 0 || functionals.iter().any(|a| a.len() != dim) {
            return Err(invalid("functionals must share a non-zero dimension"));
        }
        Ok(ProductFunctional { functionals })
    }

    fn apply(a: &[S], v: &[S]) -> S {
        let mut acc = S::zero();
        for (x, y) in a.iter().zip(v) {
            let mut t = x.clone();
            t *= y;
            acc += &t;
        }
        acc
    }
}

impl<S: Scalar> MultilinearMap<S> for ProductFunctional<S> {
    fn arity(&self) -> usize {
        self.functionals.len()
    }

    fn dim(&self) -> usize {
        self.functionals[0].len()
    }

    fn eval(&self, vs: &[&[S]]) -> Result<S> {
        if vs.len() != self.arity() {
            return Err(invalid(format!("expected {} vectors, got {}", self.arity(), vs.len())));
        }
        let mut acc = S::one();
        for (a, v) in self.functionals.iter().zip(vs) {
            if v.len() != a.len() {
                return Err(invalid("dimension mismatch"));
            }
            acc *= &Self::apply(a, v);
        }
        Ok(acc)
    }

    fn tensor_at(&self, family: &FunctionFamily<S>, x: usize) -> SlotTensor<S> {
        SlotTensor {
            arity: self.arity(),
            len: family.len(),
            factors: self
                .functionals
                .iter()
                .enumerate()
                .map(|(slot, a)| Factor::Unary {
                    slot,
                    table: (0..family.len()).map(|l| Self::apply(a, family.value(l, x))).collect(),
                })
                .collect(),
        }
    }
}

fn falling_factorial(len: usize, k: usize) -> u128 {
    if k > len {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((len - i) as u128))
}

fn power(len: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, _| acc.saturating_mul(len as u128))
}

/// Estimated multiplications for the distinct-index sum.
pub fn distinct_sum_cost(len: usize, arity: usize) -> u128 {
    falling_factorial(len, arity).saturating_mul(arity.max(1) as u128)
}

/// Estimated multiplications for one partition sum.
pub fn partition_sum_cost(len: usize, p: &SetPartition) -> u128 {
    power(len, p.num_blocks()).saturating_mul(p.n().max(1) as u128)
}

fn check_map<S: Scalar, M: MultilinearMap<S> + ?Sized>(map: &M, family: &FunctionFamily<S>, x: usize) -> Result<()> {
    if map.dim() != family.dim() {
        return Err(invalid(format!("map dim {} but family dim {}", map.dim(), family.dim())));
    }
    if x >= family.atoms() {
        return Err(invalid(format!("atom {x} out of range")));
    }
    Ok(())
}

/// `Σ*` over ordered tuples of pairwise distinct indices; zero when `L < n`.
pub fn distinct_sum_tensor<S: Scalar>(t: &SlotTensor<S>) -> S {
    if t.len < t.arity {
        return S::zero();
    }
    let vars: Vec<usize> = (0..t.arity).collect();
    t.contract(&vars, t.arity, true)
}

/// `Σ_{(l_B)_{B∈P}}` with slot `j` receiving the index of `P(j)`.
pub fn partition_sum_tensor<S: Scalar>(t: &SlotTensor<S>, p: &SetPartition) -> Result<S> {
    if p.n() != t.arity {
        return Err(invalid(format!("partition of [{}] for a map of arity {}", p.n(), t.arity)));
    }
    let var_of_slot: Vec<usize> = (0..t.arity).map(|j| p.block_of(j)).collect();
    Ok(t.contract(&var_of_slot, p.num_blocks(), false))
}

pub fn distinct_sum_with<S: Scalar, M: MultilinearMap<S> + ?Sized>(
    map: &M,
    family: &FunctionFamily<S>,
    x: usize,
    guard: &CostGuard,
) -> Result<S> {
    check_map(map, family, x)?;
    guard.check(distinct_sum_cost(family.len(), map.arity()))?;
    Ok(distinct_sum_tensor(&map.tensor_at(family, x)))
}

pub fn partition_sum_with<S: Scalar, M: MultilinearMap<S> + ?Sized>(
    map: &M,
    family: &FunctionFamily<S>,
    x: usize,
    p: &SetPartition,
    guard: &CostGuard,
) -> Result<S> {
    check_map(map, family, x)?;
    guard.check(partition_sum_cost(family.len(), p))?;
    partition_sum_tensor(&map.tensor_at(family, x), p)
}

/// Distinct-index sum of `Λ = Π B(·,·)` at atom `x`.
pub fn distinct_sum<S: Scalar>(
    b: &BilinearForm<S>,
    family: &FunctionFamily<S>,
    x: usize,
    r: usize,
    guard: &CostGuard,
) -> Result<S> {
    distinct_sum_with(&LambdaMap::new(b.clone(), r)?, family, x, guard)
}

/// Partition sum of `Λ = Π B(·,·)` at atom `x`; `p` partitions `[2r]`.
pub fn partition_sum<S: Scalar>(
    b: &BilinearForm<S>,
    family: &FunctionFamily<S>,
    x: usize,
    p: &SetPartition,
    guard: &CostGuard,
) -> Result<S> {
    if p.n() % 2 != 0 {
        return Err(invalid("Λ needs a partition of an even ground set"));
    }
    partition_sum_with(&LambdaMap::new(b.clone(), p.n() / 2)?, family, x, p, guard)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport<S> {
    pub n: usize,
    pub lhs: S,
    pub rhs: S,
    /// Partition sums in coefficient-table order.
    pub per_partition: Vec<(SetPartition, BigInt, S)>,
    pub exact_match: bool,
    pub residual: S,
    /// `Σ |C_P| · |partition sum|`, the float tolerance scale.
    pub scale: S,
}

impl<S: Scalar> IdentityReport<S> {
    fn assemble(n: usize, lhs: S, per_partition: Vec<(SetPartition, BigInt, S)>) -> Self {
        let mut rhs = S::zero();
        let mut scale = S::zero();
        for (_, c, v) in &per_partition {
            let mut term = S::from_bigint(c);
            term *= v;
            scale += &term.abs();
            rhs += &term;
        }
        let mut diff = lhs.clone();
        diff -= &rhs;
        let residual = diff.abs();
        let exact_match = match S::MODE {
            Mode::Exact => residual.is_zero(),
            Mode::Float => residual.to_f64() <= FLOAT_RTOL * scale.to_f64(),
        };
        IdentityReport { n, lhs, rhs, per_partition, exact_match, residual, scale }
    }

    pub fn to_json(&self, include_partitions: bool) -> Value {
        let mut v = json!({
            "n": self.n,
            "lhs": self.lhs.to_json(),
            "rhs": self.rhs.to_json(),
            "exact_match": self.exact_match,
            "residual": self.residual.to_json(),
            "scale": self.scale.to_json(),
        });
        if include_partitions {
            v["per_partition"] = Value::Array(
                self.per_partition
                    .iter()
                    .map(|(p, c, s)| {
                        json!({"partition": p.to_string(), "coefficient": c.to_string(), "value": s.to_json()})
                    })
                    .collect(),
            );
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityVerification<S> {
    pub per_atom: Vec<IdentityReport<S>>,
    /// Both sides integrated against `μ`.
    pub integrated: IdentityReport<S>,
}

impl<S: Scalar> IdentityVerification<S> {
    /// Every atom and the integrated identity pass.
    pub fn passed(&self) -> bool {
        self.integrated.exact_match && self.per_atom.iter().all(|r| r.exact_match)
    }

    pub fn to_json(&self, per_atom: bool) -> Value {
        let mut v = json!({
            "passed": self.passed(),
            "integrated": self.integrated.to_json(true),
        });
        if per_atom {
            v["per_atom"] = Value::Array(self.per_atom.iter().map(|r| r.to_json(true)).collect());
        }
        v
    }
}

pub fn verify_identity_with<S: Scalar, M: MultilinearMap<S> + ?Sized>(
    map: &M,
    family: &FunctionFamily<S>,
    table: &CoefficientTable,
    guard: &CostGuard,
) -> Result<IdentityVerification<S>> {
    let n = map.arity();
    if table.n() != n {
        return Err(invalid(format!("coefficient table for n={} but map arity {n}", table.n())));
    }
    check_map(map, family, 0)?;
    let len = family.len();
    let per_atom_cost = table
        .entries()
        .iter()
        .fold(distinct_sum_cost(len, n), |acc, (p, _)| acc.saturating_add(partition_sum_cost(len, p)));
    guard.check(per_atom_cost.saturating_mul(family.atoms() as u128))?;

    let per_atom: Vec<IdentityReport<S>> = (0..family.atoms())
        .into_par_iter()
        .map(|x| {
            let t = map.tensor_at(family, x);
            let lhs = distinct_sum_tensor(&t);
            let parts = table
                .entries()
                .iter()
                .map(|(p, c)| Ok((p.clone(), c.clone(), partition_sum_tensor(&t, p)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(IdentityReport::assemble(n, lhs, parts))
        })
        .collect::<Result<_>>()?;

    let weights = family.space().weights();
    let integrate = |pick: &dyn Fn(&IdentityReport<S>) -> &S| {
        let vals: Vec<S> = per_atom.iter().map(|r| pick(r).clone()).collect();
        family.space().integrate(&vals)
    };
    let lhs = integrate(&|r| &r.lhs);
    let parts = table
        .entries()
        .iter()
        .enumerate()
        .map(|(i, (p, c))| {
            let mut acc = S::zero();
            for (w, r) in weights.iter().zip(&per_atom) {
                let mut t = w.clone();
                t *= &r.per_partition[i].2;
                acc += &t;
            }
            (p.clone(), c.clone(), acc)
        })
        .collect();
    let integrated = IdentityReport::assemble(n, lhs, parts);
    Ok(IdentityVerification { per_atom, integrated })
}

/// Verifies the identity for `Λ = Π B(·,·)` with `n = 2r`.
pub fn verify_identity<S: Scalar>(
    b: &BilinearForm<S>,
    family: &FunctionFamily<S>,
    r: usize,
    table: &CoefficientTable,
    guard: &CostGuard,
) -> Result<IdentityVerification<S>> {
    family.check_form(b)?;
    verify_identity_with(&LambdaMap::new(b.clone(), r)?, family, table, guard)
}

/// `Λ(S)^{#singletons} · Π_{#B ≥ 2} Σ_l Λ(f_l)^{#B}` at one atom, with
/// `Λ(v) = B(v,v)^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionBound<S> {
    /// The bound squared, exact, when every block of size ≥ 2 is even-sized
    /// (no square roots survive).
    pub squared: Option<S>,
    pub value: f64,
}

impl<S: Scalar> PartitionBound<S> {
    /// `|partition_sum| <= bound`, compared in squares when exact.
    pub fn dominates(&self, partition_sum: &S) -> bool {
        match (&self.squared, S::MODE) {
            (Some(sq), Mode::Exact) => {
                let mut lhs = partition_sum.clone();
                lhs *= partition_sum;
                &lhs <= sq
            }
            _ => partition_sum.to_f64().abs() <= self.value * (1.0 + FLOAT_RTOL) + 1e-12,
        }
    }
}

pub fn bound_partition_sum<S: Scalar>(
    b: &BilinearForm<S>,
    family: &FunctionFamily<S>,
    x: usize,
    p: &SetPartition,
    r: usize,
) -> Result<PartitionBound<S>> {
    family.check_form(b)?;
    if p.n() != 2 * r {
        return Err(invalid(format!("partition of [{}] but r = {r}", p.n())));
    }
    let q_sum = b.quadratic(&family.sum_at(x))?;
    let q_members = (0..family.len())
        .map(|l| b.quadratic(family.value(l, x)))
        .collect::<Result<Vec<S>>>()?;
    let singles = p.blocks().iter().filter(|blk| blk.len() == 1).count() as u32;

    let mut value = q_sum.to_f64().sqrt().powi(singles as i32);
    let mut squared = Some(q_sum.powu(singles));
    for blk in p.blocks().iter().filter(|blk| blk.len() >= 2) {
        let size = blk.len() as u32;
        let float_factor: f64 = q_members.iter().map(|q| q.to_f64().sqrt().powi(size as i32)).sum();
        value *= float_factor;
        if size % 2 == 0 {
            if let Some(sq) = squared.as_mut() {
                let mut s = S::zero();
                for q in &q_members {
                    s += &q.powu(size / 2);
                }
                let mut s2 = s.clone();
                s2 *= &s;
                *sq *= &s2;
            }
        } else {
            squared = None;
        }
    }
    Ok(PartitionBound { squared, value })
}
