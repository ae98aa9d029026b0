//! Superorthogonality types of a family.
//!
//! A family satisfies type `T` at order `r` when
//! `∫ B(f_{l_1}, f_{l_2}) ⋯ B(f_{l_{2r-1}}, f_{l_{2r}}) dμ = 0` for every tuple in
//! the vanishing set of `T`. Indices are zero-based here; reports print them
//! one-based.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::bilinear::{BilinearForm, FunctionFamily};
use crate::config::CostGuard;
use crate::error::{invalid, Error, Result};
use crate::identity::MAX_ARITY;
use crate::scalar::Scalar;

/// Float zero test: `|integral| <= FLOAT_ATOL * mass * maxscale`.
pub const FLOAT_ATOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeTag {
    IStar,
    I,
    II,
    III,
    IV,
}

impl TypeTag {
    pub const ALL: [TypeTag; 5] = [TypeTag::IStar, TypeTag::I, TypeTag::II, TypeTag::III, TypeTag::IV];

    pub fn name(self) -> &'static str {
        match self {
            TypeTag::IStar => "I*",
            TypeTag::I => "I",
            TypeTag::II => "II",
            TypeTag::III => "III",
            TypeTag::IV => "IV",
        }
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TypeTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i*" | "istar" => Ok(TypeTag::IStar),
            "i" => Ok(TypeTag::I),
            "ii" => Ok(TypeTag::II),
            "iii" => Ok(TypeTag::III),
            "iv" => Ok(TypeTag::IV),
            other => Err(invalid(format!("unknown type tag `{other}`"))),
        }
    }
}

/// Comma-separated list such as `iv,iii`.
pub fn parse_type_list(s: &str) -> Result<Vec<TypeTag>> {
    let mut tags: Vec<TypeTag> = s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
    if tags.is_empty() {
        return Err(invalid("empty type list"));
    }
    tags.sort();
    tags.dedup();
    Ok(tags)
}

fn counts(tuple: &[usize]) -> BTreeMap<usize, usize> {
    let mut c = BTreeMap::new();
    for &l in tuple {
        *c.entry(l).or_insert(0) += 1;
    }
    c
}

/// Membership of an even-length tuple in the vanishing set of `tag`.
pub fn tuple_in_vanishing_set(tuple: &[usize], tag: TypeTag) -> bool {
    let c = counts(tuple);
    match tag {
        TypeTag::IStar => {
            let mut odd: Vec<usize> = tuple.iter().step_by(2).copied().collect();
            let mut even: Vec<usize> = tuple.iter().skip(1).step_by(2).copied().collect();
            odd.sort_unstable();
            even.sort_unstable();
            odd != even
        }
        TypeTag::I => c.values().any(|&k| k % 2 == 1),
        TypeTag::II => c.values().any(|&k| k == 1),
        TypeTag::III => c.iter().next_back().is_some_and(|(_, &k)| k == 1),
        TypeTag::IV => c.values().all(|&k| k == 1),
    }
}

/// Every pair of positions differs by more than `separation`.
pub fn tuple_is_separated(tuple: &[usize], separation: usize) -> bool {
    tuple
        .iter()
        .enumerate()
        .all(|(i, &a)| tuple[i + 1..].iter().all(|&b| a.abs_diff(b) > separation))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeResult<S> {
    pub holds: bool,
    pub max_abs_residual: S,
    /// Lexicographically first tuple with a non-vanishing integral.
    pub witness: Option<Vec<usize>>,
    pub witness_value: Option<S>,
    /// Number of tuples tested.
    pub vanishing_set_size: u64,
}

impl<S: Scalar> TypeResult<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "holds": self.holds,
            "max_abs_residual": self.max_abs_residual.to_json(),
            "witness_tuple": self.witness.as_ref().map(|w| w.iter().map(|l| l + 1).collect::<Vec<_>>()),
            "witness_value": self.witness_value.as_ref().map(Scalar::to_json),
            "vanishing_set_size": self.vanishing_set_size,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeReport<S> {
    pub r: usize,
    pub per_type: Vec<(TypeTag, TypeResult<S>)>,
}

impl<S: Scalar> TypeReport<S> {
    pub fn get(&self, tag: TypeTag) -> Option<&TypeResult<S>> {
        self.per_type.iter().find(|(t, _)| *t == tag).map(|(_, res)| res)
    }

    pub fn all_hold(&self) -> bool {
        self.per_type.iter().all(|(_, res)| res.holds)
    }

    pub fn to_json(&self) -> Value {
        let mut per_type = serde_json::Map::new();
        for (tag, res) in &self.per_type {
            per_type.insert(tag.name().to_string(), res.to_json());
        }
        json!({"r": self.r, "per_type": per_type})
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport<S> {
    pub r: usize,
    pub separation: usize,
    pub result: TypeResult<S>,
}

impl<S: Scalar> SeparationReport<S> {
    pub fn to_json(&self) -> Value {
        json!({"r": self.r, "separation": self.separation, "result": self.result.to_json()})
    }
}

/// `B(f_a(x), f_b(x))` stored as one vector over atoms per pair `(a, b)`.
struct PairTable<S> {
    len: usize,
    atoms: usize,
    values: Vec<S>,
    weights: Vec<S>,
    atol: f64,
}

impl<S: Scalar> PairTable<S> {
    fn new(b: &BilinearForm<S>, family: &FunctionFamily<S>, r: usize) -> Result<Self> {
        family.check_form(b)?;
        let len = family.len();
        let atoms = family.atoms();
        let grams: Vec<Vec<Vec<S>>> = (0..atoms).map(|x| family.gram_at(b, x)).collect();
        let mut values = Vec::with_capacity(len * len * atoms);
        for a in 0..len {
            for c in 0..len {
                for g in &grams {
                    values.push(g[a][c].clone());
                }
            }
        }
        let maxscale = grams
            .iter()
            .map(|g| (0..len).map(|l| g[l][l].to_f64().abs()).fold(0.0, f64::max).powi(r as i32))
            .fold(0.0, f64::max);
        let atol = FLOAT_ATOL * family.space().mass().to_f64() * maxscale;
        Ok(PairTable { len, atoms, values, weights: family.space().weights().to_vec(), atol })
    }

    fn pair(&self, a: usize, c: usize) -> &[S] {
        let start = (a * self.len + c) * self.atoms;
        &self.values[start..start + self.atoms]
    }

    /// `Σ_x μ_x Π_j B(f_{l_{2j}}(x), f_{l_{2j+1}}(x))`.
    fn integral(&self, tuple: &[usize]) -> S {
        let mut acc = S::zero();
        for x in 0..self.atoms {
            let mut term = self.weights[x].clone();
            for j in 0..tuple.len() / 2 {
                term *= &self.pair(tuple[2 * j], tuple[2 * j + 1])[x];
                if term.is_zero() {
                    break;
                }
            }
            acc += &term;
        }
        acc
    }

    fn vanishes(&self, v: &S) -> bool {
        v.is_negligible(self.atol)
    }
}

struct Scan<S> {
    max_abs: S,
    witness: Option<(Vec<usize>, S)>,
    size: u64,
}

fn scan<S: Scalar>(table: &PairTable<S>, r: usize, keep: &(dyn Fn(&[usize]) -> bool + Sync)) -> Scan<S> {
    let n = 2 * r;
    let len = table.len;
    let partial: Vec<Scan<S>> = (0..len)
        .into_par_iter()
        .map(|first| {
            let mut out = Scan { max_abs: S::zero(), witness: None, size: 0 };
            let mut tuple = vec![0usize; n];
            tuple[0] = first;
            loop {
                if keep(&tuple) {
                    out.size += 1;
                    let v = table.integral(&tuple);
                    let a = v.abs();
                    if a > out.max_abs {
                        out.max_abs = a;
                    }
                    if out.witness.is_none() && !table.vanishes(&v) {
                        out.witness = Some((tuple.clone(), v));
                    }
                }
                // odometer on positions n-1 down to 1; lexicographic order
                let mut k = n - 1;
                loop {
                    if k == 0 {
                        return out;
                    }
                    tuple[k] += 1;
                    if tuple[k] < len {
                        break;
                    }
                    tuple[k] = 0;
                    k -= 1;
                }
            }
        })
        .collect();
    let mut total = Scan { max_abs: S::zero(), witness: None, size: 0 };
    for p in partial {
        total.size += p.size;
        if p.max_abs > total.max_abs {
            total.max_abs = p.max_abs;
        }
        if total.witness.is_none() {
            total.witness = p.witness;
        }
    }
    total
}

fn check_order(r: usize, len: usize, guard: &CostGuard, atoms: usize) -> Result<()> {
    if r == 0 || 2 * r > MAX_ARITY {
        return Err(invalid(format!("r = {r} outside 1..={}", MAX_ARITY / 2)));
    }
    let tuples = (0..2 * r).fold(1u128, |acc, _| acc.saturating_mul(len as u128));
    guard.check(tuples.saturating_mul((atoms * r) as u128))
}

fn result_of<S: Scalar>(s: Scan<S>) -> TypeResult<S> {
    let (witness, witness_value) = match s.witness {
        Some((t, v)) => (Some(t), Some(v)),
        None => (None, None),
    };
    TypeResult { holds: witness.is_none(), max_abs_residual: s.max_abs, witness, witness_value, vanishing_set_size: s.size }
}

pub fn classify<S: Scalar>(
    b: &BilinearForm<S>,
    family: &FunctionFamily<S>,
    r: usize,
    types: &[TypeTag],
    guard: &CostGuard,
) -> Result<TypeReport<S>> {
    check_order(r, family.len(), guard, family.atoms())?;
    let table = PairTable::new(b, family, r)?;
    let mut tags = types.to_vec();
    tags.sort();
    tags.dedup();
    let per_type = tags
        .into_iter()
        .map(|tag| (tag, result_of(scan(&table, r, &|t: &[usize]| tuple_in_vanishing_set(t, tag)))))
        .collect();
    Ok(TypeReport { r, per_type })
}

/// Vanishing restricted to tuples whose indices differ pairwise by more than
/// `separation`; `separation = 0` is type IV.
pub fn separated_vanishing_check<S: Scalar>(
    b: &BilinearForm<S>,
    family: &FunctionFamily<S>,
    r: usize,
    separation: usize,
    guard: &CostGuard,
) -> Result<SeparationReport<S>> {
    check_order(r, family.len(), guard, family.atoms())?;
    let table = PairTable::new(b, family, r)?;
    let result = result_of(scan(&table, r, &|t: &[usize]| tuple_is_separated(t, separation)));
    Ok(SeparationReport { r, separation, result })
}

/// Direct `Σ_x μ_x Λ(f_{l_1}(x), …)`, independent of the scan tables.
pub fn tuple_integral<S: Scalar>(b: &BilinearForm<S>, family: &FunctionFamily<S>, tuple: &[usize]) -> Result<S> {
    if tuple.is_empty() || tuple.len() % 2 != 0 {
        return Err(invalid("tuple length must be even and positive"));
    }
    if let Some(&l) = tuple.iter().find(|&&l| l >= family.len()) {
        return Err(invalid(format!("index {} out of range", l + 1)));
    }
    let values: Vec<S> = (0..family.atoms())
        .map(|x| {
            let vs: Vec<&[S]> = tuple.iter().map(|&l| family.value(l, x)).collect();
            b.lambda_eval(tuple.len() / 2, &vs)
        })
        .collect::<Result<_>>()?;
    Ok(family.space().integrate(&values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilinear::DiscreteMeasureSpace;
    use crate::scalar::{rational, Rational};
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn one_based(t: &[usize]) -> Vec<usize> {
        t.iter().map(|l| l - 1).collect()
    }

    #[test]
    fn predicate_examples() {
        let t = one_based(&[1, 2, 3, 4]);
        assert!(TypeTag::ALL.iter().all(|&tag| tuple_in_vanishing_set(&t, tag)));
        let t = one_based(&[1, 1, 2, 2]);
        assert!(TypeTag::ALL.iter().all(|&tag| !tuple_in_vanishing_set(&t, tag)));
        let t = one_based(&[1, 1, 2, 3]);
        assert!(!tuple_in_vanishing_set(&t, TypeTag::IV));
        assert!(tuple_in_vanishing_set(&t, TypeTag::III));
        assert!(tuple_in_vanishing_set(&t, TypeTag::II));
        // odd positions (1,2), even (2,1): a permutation
        assert!(!tuple_in_vanishing_set(&one_based(&[1, 2, 2, 1]), TypeTag::IStar));
        assert!(tuple_in_vanishing_set(&one_based(&[1, 2, 1, 2]), TypeTag::IStar));
    }

    #[test]
    fn tag_parsing() {
        assert_eq!(parse_type_list("iv,III, i*").unwrap(), vec![TypeTag::IStar, TypeTag::III, TypeTag::IV]);
        assert_eq!("istar".parse::<TypeTag>().unwrap(), TypeTag::IStar);
        assert!("v".parse::<TypeTag>().is_err());
        assert!(parse_type_list("").is_err());
    }

    #[test]
    fn inclusion_chain_exhaustive() {
        let len = 6;
        let n = 4;
        let mut t = vec![0usize; n];
        let chain = [TypeTag::IV, TypeTag::III, TypeTag::II, TypeTag::I, TypeTag::IStar];
        loop {
            for w in chain.windows(2) {
                if tuple_in_vanishing_set(&t, w[0]) {
                    assert!(tuple_in_vanishing_set(&t, w[1]), "{t:?} in {} but not {}", w[0], w[1]);
                }
            }
            let mut k = n;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                t[k] += 1;
                if t[k] < len {
                    break;
                }
                t[k] = 0;
            }
        }
    }

    #[test]
    fn separation_zero_is_distinctness() {
        assert!(tuple_is_separated(&[0, 1, 2, 3], 0));
        assert!(!tuple_is_separated(&[0, 1, 3, 5], 1));
        assert!(tuple_is_separated(&[0, 2, 4, 6], 1));
        assert!(!tuple_is_separated(&[0, 0], 0));
    }

    /// Two-atom family, dim 2: members ±e_1 on atom 0, varied on atom 1.
    fn family() -> (BilinearForm<Rational>, FunctionFamily<Rational>) {
        let space = DiscreteMeasureSpace::new(vec!["a".into(), "b".into(), "c".into()], vec![rational(1, 2), rational(1, 3), rational(1, 6)]).unwrap();
        let values = vec![
            vec![vec![q(1), q(0)], vec![q(-1), q(2)], vec![q(0), q(1)]],
            vec![vec![q(1), q(1)], vec![q(1), q(-1)], vec![rational(1, 2), q(0)]],
            vec![vec![q(0), q(1)], vec![q(3), q(0)], vec![q(-1), q(-1)]],
            vec![vec![q(2), q(0)], vec![q(0), q(0)], vec![q(1), q(2)]],
        ];
        let fam = FunctionFamily::new(space, 2, values).unwrap();
        (BilinearForm::gram(&[vec![q(1), q(1)], vec![q(0), q(1)]]).unwrap(), fam)
    }

    #[test]
    fn witness_is_lexicographic_and_genuine() {
        let (b, fam) = family();
        let rep = classify(&b, &fam, 2, &TypeTag::ALL, &CostGuard::default()).unwrap();
        for (tag, res) in &rep.per_type {
            if let Some(w) = &res.witness {
                assert!(tuple_in_vanishing_set(w, *tag));
                let direct = tuple_integral(&b, &fam, w).unwrap();
                assert_eq!(Some(&direct), res.witness_value.as_ref());
                assert_ne!(direct, q(0));
                // nothing earlier fails
                let mut t = vec![0usize; 4];
                while &t < w {
                    if tuple_in_vanishing_set(&t, *tag) {
                        assert_eq!(tuple_integral(&b, &fam, &t).unwrap(), q(0), "{t:?}");
                    }
                    let mut k = 4;
                    loop {
                        k -= 1;
                        t[k] += 1;
                        if t[k] < fam.len() {
                            break;
                        }
                        t[k] = 0;
                    }
                }
            }
        }
    }

    #[test]
    fn holds_chain_on_example() {
        let (b, fam) = family();
        let rep = classify(&b, &fam, 1, &TypeTag::ALL, &CostGuard::default()).unwrap();
        let holds: Vec<bool> = TypeTag::ALL.iter().map(|&t| rep.get(t).unwrap().holds).collect();
        for w in holds.windows(2) {
            assert!(!w[0] || w[1]);
        }
    }

    #[test]
    fn orthogonal_family_is_type_iv_at_r1() {
        let space = DiscreteMeasureSpace::<Rational>::uniform(1).unwrap();
        let fam = FunctionFamily::new(space, 2, vec![vec![vec![q(1), q(0)]], vec![vec![q(0), q(3)]]]).unwrap();
        let b = BilinearForm::identity(2);
        let rep = classify(&b, &fam, 1, &[TypeTag::IV], &CostGuard::default()).unwrap();
        assert!(rep.get(TypeTag::IV).unwrap().holds);
        assert_eq!(rep.get(TypeTag::IV).unwrap().vanishing_set_size, 2);
        let sep = separated_vanishing_check(&b, &fam, 1, 0, &CostGuard::default()).unwrap();
        assert!(sep.result.holds);
    }

    #[test]
    fn guard_applies() {
        let (b, fam) = family();
        let tight = CostGuard::new(10, false).unwrap();
        assert!(matches!(classify(&b, &fam, 2, &[TypeTag::IV], &tight), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn float_mode_agrees() {
        let (b, fam) = family();
        let exact = classify(&b, &fam, 2, &TypeTag::ALL, &CostGuard::default()).unwrap();
        let bf = b.map_scalar(|v| v.to_f64());
        let ff = fam.map_scalar(|v| v.to_f64());
        let float = classify(&bf, &ff, 2, &TypeTag::ALL, &CostGuard::default()).unwrap();
        for ((t1, e), (t2, f)) in exact.per_type.iter().zip(&float.per_type) {
            assert_eq!(t1, t2);
            assert_eq!(e.holds, f.holds);
            assert_eq!(e.witness, f.witness);
        }
    }

    fn summary(rep: &TypeReport<Rational>) -> Vec<(bool, Rational, Option<Rational>)> {
        rep.per_type.iter().map(|(_, r)| (r.holds, r.max_abs_residual.clone(), r.witness.as_ref().map(|_| q(0)))).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn invariant_under_atom_permutation(seed in 0u64..1000) {
            let (b, fam) = family();
            let mut perm: Vec<usize> = (0..fam.atoms()).collect();
            let k = (seed as usize) % perm.len();
            perm.rotate_left(k);
            if seed % 2 == 0 {
                perm.reverse();
            }
            let a = classify(&b, &fam, 2, &TypeTag::ALL, &CostGuard::default()).unwrap();
            let c = classify(&b, &fam.permuted_atoms(&perm), 2, &TypeTag::ALL, &CostGuard::default()).unwrap();
            prop_assert_eq!(a, c);
        }

        #[test]
        fn invariant_under_orthogonal_change(sign in prop::bool::ANY, swap in prop::bool::ANY) {
            // rotation by (3/5, 4/5), optionally composed with a reflection
            let s = if sign { q(1) } else { q(-1) };
            let mut m = vec![vec![rational(3, 5), rational(-4, 5)], vec![rational(4, 5) * &s, rational(3, 5) * &s]];
            if swap {
                m.swap(0, 1);
            }
            let space = DiscreteMeasureSpace::new(vec!["a".into(), "b".into()], vec![rational(1, 4), rational(3, 4)]).unwrap();
            let values = vec![
                vec![vec![q(1), q(0)], vec![q(1), q(2)]],
                vec![vec![q(0), q(1)], vec![q(-2), q(1)]],
                vec![vec![q(1), q(-1)], vec![q(0), q(0)]],
            ];
            let fam = FunctionFamily::new(space, 2, values).unwrap();
            let b = BilinearForm::<Rational>::identity(2);
            let before = classify(&b, &fam, 2, &TypeTag::ALL, &CostGuard::default()).unwrap();
            let after = classify(&b, &fam.transformed(&m), 2, &TypeTag::ALL, &CostGuard::default()).unwrap();
            prop_assert_eq!(summary(&before), summary(&after));
            for ((_, x), (_, y)) in before.per_type.iter().zip(&after.per_type) {
                prop_assert_eq!(&x.witness, &y.witness);
            }
        }
    }
}
