//! Counting lower bound for the vanishing set needed by a converse estimate
//! with constant `C`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::scalar::Rational;

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::one(), |acc, i| acc * BigUint::from(n - i) / BigUint::from(i + 1))
}

/// `m = ⌊C²⌋ + 1`, computed exactly.
pub fn sharpness_m(c: &Rational) -> Result<usize> {
    if !c.is_positive() {
        return Err(invalid(format!("C = {c} must be positive")));
    }
    let sq = c * c;
    let floor = sq.numer().div_floor(sq.denom());
    floor
        .to_usize()
        .and_then(|f| f.checked_add(1))
        .ok_or_else(|| Error::ArithmeticOverflow(format!("⌊C²⌋ for C = {c}")))
}

/// `binom(L, m) / binom(L - 2r, m - 2r)` with `m = ⌊C²⌋ + 1`; only defined for
/// `2r <= m <= L`.
pub fn sharpness_lower_bound(len: usize, r: usize, c: &Rational) -> Result<Rational> {
    if r == 0 {
        return Err(invalid("r must be positive"));
    }
    let m = sharpness_m(c)?;
    if m < 2 * r || m > len {
        return Err(Error::NotApplicable(format!("m = {m} violates 2r = {} <= m <= L = {len}", 2 * r)));
    }
    let num = binomial(len, m);
    let den = binomial(len - 2 * r, m - 2 * r);
    Ok(Rational::new(num.into(), den.into()))
}

/// `L (L-1) ⋯ (L-2r+1)`, the number of ordered tuples of distinct indices.
pub fn ordered_distinct_count(len: usize, r: usize) -> BigUint {
    (0..2 * r).fold(BigUint::one(), |acc, i| if i < len { acc * BigUint::from(len - i) } else { BigUint::zero() })
}
