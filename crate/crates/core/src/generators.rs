//! Families used by the experiments: Rademacher sequences, dyadic martingale
//! differences, the paired counterexample family, and seeded random families.
//!
//! Dyadic spaces have `2^L` equally weighted atoms. Atom `x` corresponds to
//! the bit string of `x` read most significant bit first, so coordinate `l`
//! (one-based) is bit `L - l` of `x`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bilinear::{BilinearForm, DiscreteMeasureSpace, FunctionFamily, Vector};
use crate::error::{invalid, Result};
use crate::scalar::{Rational, Scalar};

/// Dyadic spaces are enumerated in full.
pub const MAX_DYADIC_LEVELS: usize = 20;

fn dyadic_space(levels: usize) -> Result<DiscreteMeasureSpace<Rational>> {
    if levels == 0 || levels > MAX_DYADIC_LEVELS {
        return Err(invalid(format!("L = {levels} outside 1..={MAX_DYADIC_LEVELS}")));
    }
    let count = 1usize << levels;
    let w = Rational::new(BigInt::one(), BigInt::from(count));
    let points = (0..count).map(|x| format!("{x:0levels$b}")).collect();
    DiscreteMeasureSpace::new(points, vec![w; count])
}

/// `±1` coordinate `l` (zero-based) of atom `x`.
fn sign(levels: usize, l: usize, x: usize) -> i64 {
    if (x >> (levels - 1 - l)) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Independent signs `f_l(ω) = ω_l`, scalar valued with the product form.
pub fn gen_rademacher(levels: usize) -> Result<(BilinearForm<Rational>, FunctionFamily<Rational>)> {
    let space = dyadic_space(levels)?;
    let values = (0..levels)
        .map(|l| (0..space.len()).map(|x| Rational::from_i64(sign(levels, l, x))).collect())
        .collect();
    Ok((BilinearForm::identity(1), FunctionFamily::scalar(space, values)?))
}

/// `f_l = E[h | F_l] - E[h | F_{l-1}]` for the dyadic filtration, where `F_l`
/// is generated by the first `l` bits and `h(x) = seed[x]`.
pub fn gen_martingale(
    levels: usize,
    seed: &[Rational],
) -> Result<(BilinearForm<Rational>, FunctionFamily<Rational>)> {
    let space = dyadic_space(levels)?;
    if seed.len() != space.len() {
        return Err(invalid(format!("seed has {} values, expected 2^{levels} = {}", seed.len(), space.len())));
    }
    let conditional = |l: usize| -> Vec<Rational> {
        let block = 1usize << (levels - l);
        seed.chunks(block)
            .flat_map(|chunk| {
                let mean = chunk.iter().fold(Rational::zero(), |a, v| a + v) / Rational::from_i64(block as i64);
                std::iter::repeat_n(mean, block)
            })
            .collect()
    };
    let means: Vec<Vec<Rational>> = (0..=levels).map(conditional).collect();
    let values = (1..=levels)
        .map(|l| means[l].iter().zip(&means[l - 1]).map(|(a, b)| a - b).collect())
        .collect();
    Ok((BilinearForm::identity(1), FunctionFamily::scalar(space, values)?))
}

/// Family of size `2L`: `f_{2l-1} = g_l`, `f_{2l} = -(1-ε) g_l` with `g` Rademacher.
pub fn gen_appendix_counterexample(
    levels: usize,
    epsilon: &Rational,
) -> Result<(BilinearForm<Rational>, FunctionFamily<Rational>)> {
    if !epsilon.is_positive() || epsilon >= &Rational::one() {
        return Err(invalid(format!("epsilon = {epsilon} outside (0, 1)")));
    }
    let (b, g) = gen_rademacher(levels)?;
    let scale = -(Rational::one() - epsilon);
    let values = g
        .values()
        .iter()
        .flat_map(|gl| {
            let paired = gl.iter().map(|v| vec![&v[0] * &scale]).collect::<Vec<Vector<Rational>>>();
            [gl.clone(), paired]
        })
        .collect();
    Ok((b, FunctionFamily::new(g.space().clone(), 1, values)?))
}

/// Members with odd one-based labels, then those with even labels.
pub fn split_parity<S: Scalar>(family: &FunctionFamily<S>) -> Result<(FunctionFamily<S>, FunctionFamily<S>)> {
    let odd: Vec<usize> = (0..family.len()).step_by(2).collect();
    let even: Vec<usize> = (1..family.len()).step_by(2).collect();
    Ok((family.subfamily(&odd)?, family.subfamily(&even)?))
}

fn small_rational(rng: &mut ChaCha8Rng, span: i64, max_den: i64) -> Rational {
    Rational::new(BigInt::from(rng.gen_range(-span..=span)), BigInt::from(rng.gen_range(1..=max_den)))
}

/// Seeded family with `len` members in `R^dim` on `atoms` atoms, weights
/// `p/q` with `1 <= p, q <= 4`, and the Gram form of a random integer matrix.
pub fn random_family(
    seed: u64,
    len: usize,
    dim: usize,
    atoms: usize,
) -> Result<(BilinearForm<Rational>, FunctionFamily<Rational>)> {
    if len == 0 || dim == 0 || atoms == 0 {
        return Err(invalid("random family needs positive size, dim and atom count"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<Vec<Rational>> = (0..dim)
        .map(|_| (0..dim).map(|_| Rational::from_i64(rng.gen_range(-2..=2))).collect())
        .collect();
    let form = BilinearForm::gram(&a)?;
    let weights = (0..atoms)
        .map(|_| Rational::new(BigInt::from(rng.gen_range(1..=4)), BigInt::from(rng.gen_range(1..=4))))
        .collect();
    let space = DiscreteMeasureSpace::new((0..atoms).map(|i| format!("x{i}")).collect(), weights)?;
    let values = (0..len)
        .map(|_| (0..atoms).map(|_| (0..dim).map(|_| small_rational(&mut rng, 3, 3)).collect()).collect())
        .collect();
    Ok((form, FunctionFamily::new(space, dim, values)?))
}

/// `n` seeded linear functionals on `R^dim`.
pub fn random_functionals(seed: u64, n: usize, dim: usize) -> Vec<Vector<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d);
    (0..n).map(|_| (0..dim).map(|_| small_rational(&mut rng, 3, 2)).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn rademacher_small() {
        let (_, fam) = gen_rademacher(2).unwrap();
        assert_eq!(fam.atoms(), 4);
        assert!(fam.space().is_probability());
        let prod: Vec<Rational> = (0..4).map(|x| &fam.value(0, x)[0] * &fam.value(1, x)[0]).collect();
        assert_eq!(fam.space().integrate(&prod), q(0));
        let sq: Vec<Rational> = (0..4).map(|x| (&fam.value(0, x)[0] * &fam.value(1, x)[0]).pow(2)).collect();
        assert_eq!(fam.space().integrate(&sq), q(1));
        assert!(gen_rademacher(0).is_err());
        assert!(gen_rademacher(21).is_err());
    }

    #[test]
    fn martingale_by_hand() {
        let seed: Vec<Rational> = (0..8).map(q).collect();
        let (_, fam) = gen_martingale(3, &seed).unwrap();
        let column = |l: usize| -> Vec<Rational> { (0..8).map(|x| fam.value(l, x)[0].clone()).collect() };
        assert_eq!(column(0), [-2, -2, -2, -2, 2, 2, 2, 2].map(q).to_vec());
        assert_eq!(column(1), [-1, -1, 1, 1, -1, -1, 1, 1].map(q).to_vec());
        let h = rational(1, 2);
        assert_eq!(column(2), vec![-h.clone(), h.clone(), -h.clone(), h.clone(), -h.clone(), h.clone(), -h.clone(), h]);
        for x in 0..8 {
            assert_eq!(fam.sum_at(x)[0].clone() + rational(7, 2), q(x as i64));
        }
        let (_, flat) = gen_martingale(2, &vec![q(5); 4]).unwrap();
        assert!(flat.values().iter().flatten().flatten().all(Zero::is_zero));
        assert!(gen_martingale(2, &vec![q(1); 3]).is_err());
    }

    #[test]
    fn appendix_family() {
        let eps = rational(1, 4);
        let (b, fam) = gen_appendix_counterexample(3, &eps).unwrap();
        assert_eq!(fam.len(), 6);
        let (_, g) = gen_rademacher(3).unwrap();
        for x in 0..fam.atoms() {
            let gsum = &g.sum_at(x)[0];
            assert_eq!(fam.sum_at(x)[0], &eps * gsum);
            let sq: Rational = (0..fam.len()).map(|l| b.quadratic(fam.value(l, x)).unwrap()).sum();
            let one_minus = Rational::one() - &eps;
            assert_eq!(sq, (Rational::one() + &one_minus * &one_minus) * q(3));
        }
        assert!(gen_appendix_counterexample(3, &q(0)).is_err());
        assert!(gen_appendix_counterexample(3, &q(1)).is_err());
    }

    #[test]
    fn parity_split() {
        let (_, fam) = gen_appendix_counterexample(2, &rational(1, 2)).unwrap();
        let (odd, even) = split_parity(&fam).unwrap();
        assert_eq!(odd.len(), 2);
        assert_eq!(even.len(), 2);
        assert_eq!(odd.value(1, 3), fam.value(2, 3));
    }

    #[test]
    fn random_family_is_seeded() {
        let (b1, f1) = random_family(7, 4, 2, 3).unwrap();
        let (b2, f2) = random_family(7, 4, 2, 3).unwrap();
        assert_eq!(b1, b2);
        assert_eq!(f1, f2);
        let (_, f3) = random_family(8, 4, 2, 3).unwrap();
        assert_ne!(f1, f3);
        assert!(b1.certify_positive().is_ok());
        assert_eq!(random_functionals(1, 3, 2), random_functionals(1, 3, 2));
    }
}
