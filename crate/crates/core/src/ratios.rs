//! `L^p` norms and the direct, converse and necessary-condition ratios.
//!
//! With `B(v) = B(v,v)^{1/2}` and `S = Σ_l f_l`:
//!
//! ```text
//! norm_sum = ‖B(S)‖_{2r}
//! norm_sq  = ‖(Σ_l B(f_l)²)^{1/2}‖_{2r}
//! norm_2r  = ‖(Σ_l B(f_l)^{2r})^{1/2r}‖_{2r}
//! ```
//!
//! All three have exact `2r`-th powers, so those are carried alongside the
//! float norms.

use std::fmt;

use serde_json::{json, Value};

use crate::bilinear::{BilinearForm, DiscreteMeasureSpace, FunctionFamily};
use crate::error::{invalid, Result};
use crate::scalar::{format_rational, Rational, Scalar};

/// `(Σ_x μ_x |g(x)|^p)^{1/p}` in float arithmetic.
pub fn lp_norm<S: Scalar>(g: &[S], p: f64, space: &DiscreteMeasureSpace<S>) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(invalid(format!("p = {p} must be at least 1")));
    }
    if g.len() != space.len() {
        return Err(invalid(format!("{} values for {} atoms", g.len(), space.len())));
    }
    let total: f64 = space.weights().iter().zip(g).map(|(w, v)| w.to_f64() * v.to_f64().abs().powf(p)).sum();
    Ok(total.powf(1.0 / p))
}

/// `Σ_x μ_x |g(x)|^p` for integer `p`, in the scalar field.
pub fn lp_norm_pow<S: Scalar>(g: &[S], p: u32, space: &DiscreteMeasureSpace<S>) -> Result<S> {
    if p == 0 {
        return Err(invalid("p must be at least 1"));
    }
    if g.len() != space.len() {
        return Err(invalid(format!("{} values for {} atoms", g.len(), space.len())));
    }
    let powered: Vec<S> = g.iter().map(|v| v.abs().powu(p)).collect();
    Ok(space.integrate(&powered))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Finite(f64),
    /// Zero denominator, non-zero numerator.
    Infinite,
    /// `0/0`.
    Undefined,
}

impl Ratio {
    fn of(num: f64, den: f64) -> Ratio {
        if den == 0.0 {
            if num == 0.0 {
                Ratio::Undefined
            } else {
                Ratio::Infinite
            }
        } else {
            Ratio::Finite(num / den)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn to_json(self) -> Value {
        match self {
            Ratio::Finite(v) => json!(v),
            Ratio::Infinite => json!("inf"),
            Ratio::Undefined => json!("undefined"),
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(v) => write!(f, "{v}"),
            Ratio::Infinite => f.write_str("inf"),
            Ratio::Undefined => f.write_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport<S> {
    pub r: usize,
    /// Family size.
    pub len: usize,
    /// `norm_sum^{2r}`, `norm_sq^{2r}` and `norm_2r^{2r}`.
    pub sum_pow: S,
    pub sq_pow: S,
    pub pow_2r: S,
    pub norm_sum: f64,
    pub norm_sq: f64,
    pub norm_2r: f64,
    pub t_direct: Ratio,
    pub t_converse: Ratio,
    pub t_necessary: Ratio,
}

fn exact_quotient<S: Scalar>(num: &S, den: &S) -> Option<Rational> {
    let (n, d) = (num.as_rational()?, den.as_rational()?);
    if d == Rational::from_i64(0) {
        None
    } else {
        Some(n / d)
    }
}

impl<S: Scalar> RatioReport<S> {
    /// `t_direct^{2r}` exactly, when available.
    pub fn t_direct_pow(&self) -> Option<Rational> {
        exact_quotient(&self.sum_pow, &self.sq_pow)
    }

    pub fn t_converse_pow(&self) -> Option<Rational> {
        exact_quotient(&self.sq_pow, &self.sum_pow)
    }

    pub fn t_necessary_pow(&self) -> Option<Rational> {
        exact_quotient(&self.pow_2r, &self.sum_pow)
    }

    pub fn to_json(&self) -> Value {
        let exact = |v: Option<Rational>| v.map(|q| Value::String(format_rational(&q))).unwrap_or(Value::Null);
        json!({
            "r": self.r,
            "L": self.len,
            "norm_sum_pow": self.sum_pow.to_json(),
            "norm_sq_pow": self.sq_pow.to_json(),
            "norm_2r_pow": self.pow_2r.to_json(),
            "norm_sum": self.norm_sum,
            "norm_sq": self.norm_sq,
            "norm_2r": self.norm_2r,
            "t_direct": self.t_direct.to_json(),
            "t_converse": self.t_converse.to_json(),
            "t_necessary": self.t_necessary.to_json(),
            "t_direct_pow": exact(self.t_direct_pow()),
            "t_converse_pow": exact(self.t_converse_pow()),
            "t_necessary_pow": exact(self.t_necessary_pow()),
        })
    }

    pub const CSV_HEADER: &'static str = "L,r,epsilon,norm_sum,norm_sq,norm_2r,t_direct,t_converse,t_necessary";

    /// One CSV row; `l` and `epsilon` are the generator parameters.
    pub fn csv_row(&self, l: usize, epsilon: Option<&str>) -> String {
        format!(
            "{l},{},{},{},{},{},{},{},{}",
            self.r,
            epsilon.unwrap_or(""),
            self.norm_sum,
            self.norm_sq,
            self.norm_2r,
            self.t_direct,
            self.t_converse,
            self.t_necessary
        )
    }
}

fn root(v: &impl Scalar, k: usize) -> f64 {
    v.to_f64().max(0.0).powf(1.0 / k as f64)
}

pub fn ratios<S: Scalar>(b: &BilinearForm<S>, family: &FunctionFamily<S>, r: usize) -> Result<RatioReport<S>> {
    if r == 0 {
        return Err(invalid("r must be positive"));
    }
    family.check_form(b)?;
    let ru = r as u32;
    let mut on_sum = Vec::with_capacity(family.atoms());
    let mut on_sq = Vec::with_capacity(family.atoms());
    let mut on_2r = Vec::with_capacity(family.atoms());
    for x in 0..family.atoms() {
        on_sum.push(b.quadratic(&family.sum_at(x))?.powu(ru));
        let mut sq = S::zero();
        let mut p2r = S::zero();
        for l in 0..family.len() {
            let q = b.quadratic(family.value(l, x))?;
            p2r += &q.powu(ru);
            sq += &q;
        }
        on_sq.push(sq.powu(ru));
        on_2r.push(p2r);
    }
    let space = family.space();
    let (sum_pow, sq_pow, pow_2r) = (space.integrate(&on_sum), space.integrate(&on_sq), space.integrate(&on_2r));
    let (norm_sum, norm_sq, norm_2r) = (root(&sum_pow, 2 * r), root(&sq_pow, 2 * r), root(&pow_2r, 2 * r));
    Ok(RatioReport {
        r,
        len: family.len(),
        sum_pow,
        sq_pow,
        pow_2r,
        norm_sum,
        norm_sq,
        norm_2r,
        t_direct: Ratio::of(norm_sum, norm_sq),
        t_converse: Ratio::of(norm_sq, norm_sum),
        t_necessary: Ratio::of(norm_2r, norm_sum),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn norm_examples() {
        let space = DiscreteMeasureSpace::<Rational>::uniform(3).unwrap();
        let c = vec![q(-2); 3];
        assert!((lp_norm(&c, 3.0, &space).unwrap() - 2.0).abs() < 1e-12);
        let two = DiscreteMeasureSpace::<Rational>::uniform(2).unwrap();
        let ind = vec![q(1), q(0)];
        assert!((lp_norm(&ind, 2.0, &two).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(lp_norm_pow(&ind, 2, &two).unwrap(), rational(1, 2));
        assert!(lp_norm(&ind, 0.5, &two).is_err());
        assert!(lp_norm_pow(&ind, 0, &two).is_err());
    }

    #[test]
    fn single_member_ratios_are_one() {
        let space = DiscreteMeasureSpace::new(vec!["a".into(), "b".into()], vec![rational(1, 3), rational(2, 3)]).unwrap();
        let fam = FunctionFamily::scalar(space, vec![vec![q(2), q(-5)]]).unwrap();
        let rep = ratios(&BilinearForm::identity(1), &fam, 3).unwrap();
        assert_eq!(rep.t_direct_pow(), Some(q(1)));
        assert_eq!(rep.t_necessary_pow(), Some(q(1)));
        assert_eq!(rep.t_direct, Ratio::Finite(1.0));
    }

    #[test]
    fn zero_family_is_flagged() {
        let space = DiscreteMeasureSpace::<Rational>::uniform(1).unwrap();
        let fam = FunctionFamily::scalar(space, vec![vec![q(1)], vec![q(-1)]]).unwrap();
        let rep = ratios(&BilinearForm::identity(1), &fam, 1).unwrap();
        assert_eq!(rep.t_converse, Ratio::Infinite);
        assert_eq!(rep.t_direct, Ratio::Finite(0.0));
        assert_eq!(rep.to_json()["t_converse"], "inf");
        assert!(rep.csv_row(2, None).starts_with("2,1,,0,"));
    }

    proptest! {
        #[test]
        fn power_mean(values in prop::collection::vec(-20i64..20, 1..8)) {
            let space = DiscreteMeasureSpace::<Rational>::uniform(values.len()).unwrap();
            let g: Vec<Rational> = values.iter().map(|&v| q(v)).collect();
            let n2 = lp_norm(&g, 2.0, &space).unwrap();
            let n4 = lp_norm(&g, 4.0, &space).unwrap();
            prop_assert!(n2 <= n4 * (1.0 + 1e-12));
            // exact: (E g²)² ≤ E g⁴
            let p2 = lp_norm_pow(&g, 2, &space).unwrap();
            prop_assert!(&p2 * &p2 <= lp_norm_pow(&g, 4, &space).unwrap());
        }

        #[test]
        fn necessary_below_converse(values in prop::collection::vec(prop::collection::vec(-5i64..5, 3), 1..5), r in 1usize..4) {
            let space = DiscreteMeasureSpace::<Rational>::uniform(3).unwrap();
            let rows: Vec<Vec<Rational>> = values.iter().map(|row| row.iter().map(|&v| q(v)).collect()).collect();
            let fam = FunctionFamily::scalar(space, rows).unwrap();
            let rep = ratios(&BilinearForm::identity(1), &fam, r).unwrap();
            prop_assert!(rep.pow_2r <= rep.sq_pow);
            if let (Some(a), Some(b)) = (rep.t_direct.value(), rep.t_converse.value()) {
                prop_assert!((a * b - 1.0).abs() < 1e-9);
            }
        }
    }
}
