//! Binary codings of points under `T_{β,α}` and their value `Σ ω_n β^{−n}`.

use crate::error::{Error, Result};
use crate::maps::{BetaParams, PiecewiseAffineMap};
use crate::numeric::Scalar;

/// The first `N` digits of a point: digit `i` is `1` iff `T^{i−1}(x)` is
/// evaluated by the right branch.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitString<S> {
    pub digits: Vec<u8>,
    pub params: BetaParams<S>,
    pub origin: S,
}

impl<S: Scalar> DigitString<S> {
    pub fn as_text(&self) -> String {
        self.digits.iter().map(|d| if *d == 1 { '1' } else { '0' }).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "beta": self.params.beta.to_decimal(),
            "alpha": self.params.alpha.to_decimal(),
            "x": self.origin.to_decimal(),
            "digits": self.as_text(),
        })
    }
}

pub fn coding<S: Scalar>(params: &BetaParams<S>, x: &S, n: usize) -> Result<DigitString<S>> {
    PiecewiseAffineMap::check_domain(x)?;
    if n == 0 {
        return Err(Error::InvalidParams("need at least one digit".into()));
    }
    let map = PiecewiseAffineMap::beta(params)?;
    let mut digits = Vec::with_capacity(n);
    let mut y = x.clone();
    for _ in 0..n {
        digits.push(map.branch_index(&y) as u8);
        y = map.apply(&y);
    }
    Ok(DigitString { digits, params: params.clone(), origin: x.clone() })
}

/// `Σ_{n=1}^{N} ω_n β^{−n}`, which is within `β^{−N}(1 + α/(β−1))` of
/// `x + α/(β−1)`.
pub fn reconstruct<S: Scalar>(digits: &DigitString<S>) -> S {
    let inverse = S::one() / digits.params.beta.clone();
    let mut weight = S::one();
    let mut total = S::zero();
    for d in &digits.digits {
        weight = weight * inverse.clone();
        if *d == 1 {
            total = total + weight.clone();
        }
    }
    total
}

/// `x + α/(β − 1)`, the value a full coding converges to.
pub fn expansion_target<S: Scalar>(params: &BetaParams<S>, x: &S) -> S {
    x.clone() + params.alpha.clone() / (params.beta.clone() - S::one())
}

/// `β^{−N}(1 + α/(β − 1))`.
pub fn truncation_bound<S: Scalar>(params: &BetaParams<S>, n: usize) -> S {
    let tail = S::one() + params.alpha.clone() / (params.beta.clone() - S::one());
    tail / params.beta.powi(n as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Rational;
    use proptest::prelude::*;

    fn q(s: &str) -> Rational {
        Rational::parse(s).unwrap()
    }

    fn params(b: &str, a: &str) -> BetaParams<Rational> {
        BetaParams::new(q(b), q(a)).unwrap()
    }

    #[test]
    fn codings() {
        let d = params("2", "0");
        let c = coding(&d, &q("0.625"), 5).unwrap();
        assert_eq!(c.as_text(), "10100");
        assert_eq!(reconstruct(&c), q("0.625"));
        assert_eq!(coding(&d, &q("0"), 3).unwrap().as_text(), "000");
        assert_eq!(coding(&params("1.5", "0.25"), &q("0.5"), 1).unwrap().as_text(), "1");
        assert!(matches!(coding(&d, &q("1.5"), 3), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn all_ones() {
        let d = params("2", "0");
        let ones = DigitString { digits: vec![1; 12], params: d, origin: q("1") };
        assert_eq!(reconstruct(&ones), q("1") - Rational::ratio(1, 4096));
    }

    #[test]
    fn offset_target() {
        let p = params("1.5", "0.25");
        let c = coding(&p, &q("0"), 40).unwrap();
        let err = (reconstruct(&c) - expansion_target(&p, &q("0"))).abs();
        assert!(err <= truncation_bound(&p, 40));
        assert_eq!(expansion_target(&p, &q("0")), q("0.5"));
    }

    fn arb_params() -> impl Strategy<Value = BetaParams<f64>> {
        (1.01f64..=2.0, 0.0f64..=1.0).prop_map(|(b, t)| BetaParams::new(b, (2.0 - b) * t).unwrap())
    }

    proptest! {
        #[test]
        fn shift_drops_first_digit(p in arb_params(), x in 0.0f64..=1.0, n in 2usize..30) {
            let map = PiecewiseAffineMap::beta(&p).unwrap();
            let full = coding(&p, &x, n).unwrap();
            let shifted = coding(&p, &map.apply(&x), n - 1).unwrap();
            prop_assert_eq!(&full.digits[1..], &shifted.digits[..]);
        }

        #[test]
        fn greedy_coding_is_monotone(b in 1.01f64..=2.0, x in 0.0f64..=1.0, y in 0.0f64..=1.0, n in 1usize..30) {
            let p = BetaParams::new(b, 0.0).unwrap();
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            prop_assert!(coding(&p, &lo, n).unwrap().digits <= coding(&p, &hi, n).unwrap().digits);
        }
    }
}
