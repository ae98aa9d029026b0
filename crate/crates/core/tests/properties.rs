use num_traits::Zero;
use proptest::prelude::*;

use superorth::classify::{classify, separated_vanishing_check, TypeTag};
use superorth::coefficients::{compute_coefficients, oracle_coefficients};
use superorth::generators::{gen_appendix_counterexample, gen_martingale, gen_rademacher, random_family, split_parity};
use superorth::identity::{bound_partition_sum, distinct_sum, partition_sum, verify_identity};
use superorth::partition::{enumerate_partitions, SetPartition};
use superorth::ratios::ratios;
use superorth::scalar::{rational, Rational, Scalar};
use superorth::CostGuard;

fn q(n: i64) -> Rational {
    Rational::from_i64(n)
}

fn guard() -> CostGuard {
    CostGuard::default()
}

#[test]
fn partition_bound_dominates() {
    let parts: Vec<Vec<SetPartition>> = (1..=3).map(|r| enumerate_partitions(2 * r).unwrap()).collect();
    for seed in 0..100u64 {
        let (b, fam) = random_family(500 + seed, 1 + (seed as usize % 4), 1 + (seed as usize % 3), 1).unwrap();
        for (r0, ps) in parts.iter().enumerate() {
            for p in ps {
                let value = partition_sum(&b, &fam, 0, p, &guard()).unwrap();
                let bound = bound_partition_sum(&b, &fam, 0, p, r0 + 1).unwrap();
                assert!(bound.dominates(&value), "seed {seed} {p}: {value} vs {:?}", bound.value);
            }
        }
    }
}

#[test]
fn singletons_bound_is_equality() {
    let (b, fam) = random_family(1, 3, 2, 1).unwrap();
    let p = SetPartition::singletons(4);
    let value = partition_sum(&b, &fam, 0, &p, &guard()).unwrap();
    let bound = bound_partition_sum(&b, &fam, 0, &p, 2).unwrap();
    assert_eq!(bound.squared, Some(&value * &value));
}

#[test]
fn oracle_and_recursive_tables_give_identical_reports() {
    for r in 1..=3 {
        let rec = compute_coefficients(2 * r).unwrap();
        let ora = oracle_coefficients(2 * r).unwrap();
        for seed in 0..5u64 {
            let (b, fam) = random_family(seed, 5, 2, 2).unwrap();
            let a = verify_identity(&b, &fam, r, &rec, &guard()).unwrap();
            let c = verify_identity(&b, &fam, r, &ora, &guard()).unwrap();
            assert_eq!(a, c);
            assert!(a.passed());
        }
    }
}

#[test]
fn identity_table_mismatch_is_rejected() {
    let (b, fam) = random_family(0, 3, 1, 1).unwrap();
    assert!(verify_identity(&b, &fam, 2, &compute_coefficients(3).unwrap(), &guard()).is_err());
}

#[test]
fn degenerate_forms_keep_the_invariants() {
    // rank-one Gram form on R^2
    let b = superorth::BilinearForm::gram(&[vec![q(1), q(2)], vec![q(0), q(0)]]).unwrap();
    assert!(b.certify_positive().is_ok());
    let (_, fam) = random_family(12, 4, 2, 2).unwrap();
    let v = verify_identity(&b, &fam, 2, &compute_coefficients(4).unwrap(), &guard()).unwrap();
    assert!(v.passed());
}

#[test]
fn rademacher_ratio_examples() {
    let (b, fam) = gen_rademacher(5).unwrap();
    let r1 = ratios(&b, &fam, 1).unwrap();
    assert_eq!(r1.t_direct_pow(), Some(q(1)));
    let (b, fam) = gen_rademacher(6).unwrap();
    let r2 = ratios(&b, &fam, 2).unwrap();
    // (3L^2 - 2L) / L^2
    assert_eq!(r2.t_direct_pow(), Some(rational(96, 36)));
    assert!(r2.t_direct.value().unwrap() <= 10.0);
}

#[test]
fn rademacher_is_type_i_but_not_vacuous() {
    let (b, fam) = gen_rademacher(4).unwrap();
    let rep = classify(&b, &fam, 2, &TypeTag::ALL, &guard()).unwrap();
    for t in [TypeTag::I, TypeTag::II, TypeTag::III, TypeTag::IV] {
        assert!(rep.get(t).unwrap().holds, "{t}");
    }
    // (1,2,1,2) is in the I* set and E f1^2 f2^2 = 1
    assert!(!rep.get(TypeTag::IStar).unwrap().holds);
}

#[test]
fn martingale_is_type_iii() {
    let seed: Vec<Rational> = (0..16).map(|x| rational((x * 7) % 5 - 2, 1 + x % 3)).collect();
    let (b, fam) = gen_martingale(4, &seed).unwrap();
    for r in 1..=2 {
        let rep = classify(&b, &fam, r, &[TypeTag::III, TypeTag::IV], &guard()).unwrap();
        assert!(rep.all_hold(), "r={r}");
    }
}

#[test]
fn appendix_separation() {
    let eps = rational(1, 3);
    let (b, fam) = gen_appendix_counterexample(4, &eps).unwrap();
    let sep1 = separated_vanishing_check(&b, &fam, 2, 1, &guard()).unwrap();
    assert!(sep1.result.holds);
    let sep0 = separated_vanishing_check(&b, &fam, 2, 0, &guard()).unwrap();
    assert!(!sep0.result.holds);
    assert_eq!(sep0.result.witness, Some(vec![0, 1, 2, 3]));
    // the odd and even label subfamilies are each type IV
    let (odd, even) = split_parity(&fam).unwrap();
    for sub in [&odd, &even] {
        assert!(classify(&b, sub, 2, &[TypeTag::IV], &guard()).unwrap().all_hold());
        let rep = ratios(&b, sub, 2).unwrap();
        assert!(rep.t_direct.value().unwrap() <= 10.0);
    }
}

#[test]
fn necessary_ratio_never_exceeds_converse() {
    for eps in [rational(1, 2), rational(1, 4), rational(1, 8)] {
        let (b, fam) = gen_appendix_counterexample(6, &eps).unwrap();
        let rep = ratios(&b, &fam, 2).unwrap();
        assert!(rep.pow_2r <= rep.sq_pow);
        assert!(rep.t_necessary_pow().unwrap() <= rep.t_converse_pow().unwrap());
        // Σ f_l = ε Σ g_l, so t_converse^4 = (2 - 2ε + ε^2)^2 L^2 / (ε^4 E(Σg)^4)
        let l = 6i64;
        let fourth = rational(3 * l * l - 2 * l, 1);
        let s = rational(2, 1) - &eps * rational(2, 1) + &eps * &eps;
        let expected = (&s * &s) * q(l * l) / (eps.pow(4) * fourth);
        assert_eq!(rep.t_converse_pow().unwrap(), expected);
    }
}

#[test]
fn distinct_sum_is_empty_when_family_is_small() {
    let (b, fam) = random_family(3, 3, 2, 1).unwrap();
    assert!(distinct_sum(&b, &fam, 0, 2, &guard()).unwrap().is_zero());
}

#[test]
fn integrated_identity_is_linear() {
    let (b, fam) = random_family(77, 5, 2, 3).unwrap();
    let v = verify_identity(&b, &fam, 2, &compute_coefficients(4).unwrap(), &guard()).unwrap();
    let lhs: Vec<Rational> = v.per_atom.iter().map(|r| r.lhs.clone()).collect();
    assert_eq!(fam.space().integrate(&lhs), v.integrated.lhs);
    assert!(v.integrated.exact_match);
    assert!(fam.space().mass() > Rational::zero());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_identity_exact(seed in 0u64..10_000, len in 1usize..7, dim in 1usize..4, r in 1usize..3) {
        let (b, fam) = random_family(seed, len, dim, 2).unwrap();
        let v = verify_identity(&b, &fam, r, &compute_coefficients(2 * r).unwrap(), &guard()).unwrap();
        prop_assert!(v.passed());
        prop_assert!(v.integrated.residual.is_zero());
    }

    #[test]
    fn distinct_sum_relabeling(seed in 0u64..10_000, shift in 0usize..5) {
        let (b, fam) = random_family(seed, 5, 2, 1).unwrap();
        let mut perm: Vec<usize> = (0..5).collect();
        perm.rotate_left(shift);
        let a = distinct_sum(&b, &fam, 0, 2, &guard()).unwrap();
        let c = distinct_sum(&b, &fam.permuted_members(&perm), 0, 2, &guard()).unwrap();
        prop_assert_eq!(a, c);
    }
}
