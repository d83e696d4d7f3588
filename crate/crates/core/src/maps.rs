//! Discontinuous piecewise affine monotone interval maps on `[0, 1]`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::json::NumText;
use crate::numeric::Scalar;

/// Parameters of `x ↦ βx + α (mod 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaParams<S> {
    pub beta: S,
    pub alpha: S,
}

impl<S: Scalar> BetaParams<S> {
    pub fn new(beta: S, alpha: S) -> Result<Self> {
        if !(beta > S::one() && beta <= S::from_i64(2)) {
            return Err(Error::InvalidParams(format!(
                "beta = {} not in (1, 2]",
                beta.to_decimal()
            )));
        }
        let upper = S::from_i64(2) - beta.clone();
        if alpha < S::zero() || alpha > upper {
            return Err(Error::InvalidParams(format!(
                "alpha = {} not in [0, {}]",
                alpha.to_decimal(),
                upper.to_decimal()
            )));
        }
        Ok(BetaParams { beta, alpha })
    }

    /// The discontinuity `(1 − α)/β`.
    pub fn critical_point(&self) -> S {
        (S::one() - self.alpha.clone()) / self.beta.clone()
    }

    pub fn to_f64(&self) -> BetaParams<f64> {
        BetaParams { beta: self.beta.to_f64(), alpha: self.alpha.to_f64() }
    }
}

/// One affine piece `x ↦ slope·x + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch<S> {
    pub slope: S,
    pub intercept: S,
}

impl<S: Scalar> Branch<S> {
    pub fn new(slope: S, intercept: S) -> Self {
        Branch { slope, intercept }
    }

    pub fn apply(&self, x: &S) -> S {
        self.slope.clone() * x.clone() + self.intercept.clone()
    }

    pub fn invert(&self, y: &S) -> S {
        (y.clone() - self.intercept.clone()) / self.slope.clone()
    }
}

/// Which one-sided limit a map takes at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Sign of the derivative of an iterate: `+1` increasing, `−1` decreasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrientationSign {
    Increasing,
    Decreasing,
}

impl OrientationSign {
    pub fn of_slope<S: Scalar>(slope: &S) -> Self {
        if slope.is_negative() {
            OrientationSign::Decreasing
        } else {
            OrientationSign::Increasing
        }
    }

    pub fn value(self) -> i32 {
        match self {
            OrientationSign::Increasing => 1,
            OrientationSign::Decreasing => -1,
        }
    }

    pub fn times(self, other: OrientationSign) -> OrientationSign {
        if self == other {
            OrientationSign::Increasing
        } else {
            OrientationSign::Decreasing
        }
    }

    /// Multiplies a scalar by the sign.
    pub fn apply<S: Scalar>(self, v: S) -> S {
        match self {
            OrientationSign::Increasing => v,
            OrientationSign::Decreasing => -v,
        }
    }
}

/// Where a point sits relative to the partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// Open cell `I_j`, or one of the domain endpoints belonging to it.
    Cell(usize),
    Breakpoint(usize),
}

/// Breakpoints `z_0 < … < z_{n−1}` in `(0, 1)`, `n + 1` affine branches and
/// the side convention at each breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseAffineMap<S> {
    breakpoints: Vec<S>,
    branches: Vec<Branch<S>>,
    sides: Vec<Side>,
}

impl<S: Scalar> PiecewiseAffineMap<S> {
    pub fn new(breakpoints: Vec<S>, branches: Vec<Branch<S>>, sides: Vec<Side>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidMap("at least one discontinuity is required".into()));
        }
        if branches.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidMap(format!(
                "{} breakpoints need {} branches, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                branches.len()
            )));
        }
        if sides.len() != breakpoints.len() {
            return Err(Error::InvalidMap("one side per breakpoint is required".into()));
        }
        if breakpoints.iter().any(|z| *z <= S::zero() || *z >= S::one()) {
            return Err(Error::InvalidMap("breakpoints must lie in (0, 1)".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMap("breakpoints must be strictly increasing".into()));
        }
        if branches.iter().any(|b| b.slope.is_zero()) {
            return Err(Error::InvalidMap("branch slopes must be nonzero".into()));
        }
        let map = PiecewiseAffineMap { breakpoints, branches, sides };
        for j in 0..map.branches.len() {
            let (lo, hi) = map.cell_bounds(j);
            for end in [lo, hi] {
                let y = map.branches[j].apply(&end);
                let g = y.guard();
                if y < -g.clone() || y > S::one() + g {
                    return Err(Error::InvalidMap(format!(
                        "branch {j} maps {} to {} outside [0, 1]",
                        end.to_decimal(),
                        y.to_decimal()
                    )));
                }
            }
        }
        for m in 0..map.breakpoints.len() {
            let (minus, plus) = map.one_sided_limits(m)?;
            let jump = (plus - minus.clone()).abs();
            if jump <= minus.guard() {
                return Err(Error::InvalidMap(format!("no jump at breakpoint {m}")));
            }
        }
        Ok(map)
    }

    /// `T_{β,α}` with its discontinuity at `c = (1−α)/β` and `T(c) = 0`.
    pub fn beta(params: &BetaParams<S>) -> Result<Self> {
        let p = BetaParams::new(params.beta.clone(), params.alpha.clone())?;
        let c = p.critical_point();
        PiecewiseAffineMap::new(
            vec![c],
            vec![
                Branch::new(p.beta.clone(), p.alpha.clone()),
                Branch::new(p.beta.clone(), p.alpha.clone() - S::one()),
            ],
            vec![Side::Right],
        )
    }

    pub fn breakpoints(&self) -> &[S] {
        &self.breakpoints
    }

    pub fn branches(&self) -> &[Branch<S>] {
        &self.branches
    }

    pub fn sides(&self) -> &[Side] {
        &self.sides
    }

    pub fn n_breakpoints(&self) -> usize {
        self.breakpoints.len()
    }

    /// Closed bounds of cell `I_j`.
    pub fn cell_bounds(&self, j: usize) -> (S, S) {
        let lo = if j == 0 { S::zero() } else { self.breakpoints[j - 1].clone() };
        let hi = if j == self.breakpoints.len() { S::one() } else { self.breakpoints[j].clone() };
        (lo, hi)
    }

    pub fn min_cell_width(&self) -> S {
        (0..self.branches.len())
            .map(|j| {
                let (lo, hi) = self.cell_bounds(j);
                hi - lo
            })
            .reduce(S::min_of)
            .expect("at least two cells")
    }

    pub fn max_abs_slope(&self) -> S {
        self.branches.iter().map(|b| b.slope.abs()).reduce(S::max_of).expect("nonempty")
    }

    pub fn min_jump(&self) -> S {
        (0..self.breakpoints.len())
            .map(|m| {
                let (minus, plus) = self.one_sided_limits(m).expect("index in range");
                (plus - minus).abs()
            })
            .reduce(S::min_of)
            .expect("nonempty")
    }

    pub fn locate(&self, x: &S) -> Location {
        // partition_point: number of breakpoints strictly below x
        let below = self.breakpoints.partition_point(|z| z < x);
        if below < self.breakpoints.len() && self.breakpoints[below] == *x {
            Location::Breakpoint(below)
        } else {
            Location::Cell(below)
        }
    }

    /// Index of the branch `evaluate` uses at `x`.
    pub fn branch_index(&self, x: &S) -> usize {
        match self.locate(x) {
            Location::Cell(j) => j,
            Location::Breakpoint(m) => match self.sides[m] {
                Side::Left => m,
                Side::Right => m + 1,
            },
        }
    }

    pub fn check_domain(x: &S) -> Result<()> {
        if *x < S::zero() || *x > S::one() {
            Err(Error::OutOfDomain(x.to_decimal()))
        } else {
            Ok(())
        }
    }

    pub fn evaluate(&self, x: &S) -> Result<S> {
        Self::check_domain(x)?;
        Ok(self.apply(x))
    }

    /// Evaluation without the domain check.
    pub fn apply(&self, x: &S) -> S {
        self.branches[self.branch_index(x)].apply(x).clamp_unit()
    }

    /// `(f_−(z_m), f_+(z_m))`.
    pub fn one_sided_limits(&self, m: usize) -> Result<(S, S)> {
        let z = self
            .breakpoints
            .get(m)
            .ok_or(Error::IndexOutOfRange { index: m, len: self.breakpoints.len() })?;
        Ok((self.branches[m].apply(z), self.branches[m + 1].apply(z)))
    }

    /// Sign of the slope of `f^j` at `z`, following the side convention at
    /// breakpoints.
    pub fn orientation(&self, j: usize, z: &S) -> Result<OrientationSign> {
        Self::check_domain(z)?;
        let mut sign = OrientationSign::Increasing;
        let mut x = z.clone();
        for _ in 0..j {
            let b = &self.branches[self.branch_index(&x)];
            sign = sign.times(OrientationSign::of_slope(&b.slope));
            x = b.apply(&x).clamp_unit();
        }
        Ok(sign)
    }

    /// Conjugate by `x ↦ 1 − x`.
    pub fn reflect(&self) -> Self {
        let n = self.breakpoints.len();
        let breakpoints = self.breakpoints.iter().rev().map(|z| S::one() - z.clone()).collect();
        let branches = self
            .branches
            .iter()
            .rev()
            .map(|b| {
                Branch::new(b.slope.clone(), S::one() - b.slope.clone() - b.intercept.clone())
            })
            .collect();
        let sides = self.sides.iter().rev().map(|s| s.flip()).collect();
        debug_assert_eq!(n, self.sides.len());
        PiecewiseAffineMap { breakpoints, branches, sides }
    }

    /// Converts every coefficient with `f`. Validation is skipped: the
    /// conversion is expected to preserve the map's structure.
    pub fn convert<T: Scalar>(&self, f: impl Fn(&S) -> T) -> PiecewiseAffineMap<T> {
        PiecewiseAffineMap {
            breakpoints: self.breakpoints.iter().map(&f).collect(),
            branches: self
                .branches
                .iter()
                .map(|b| Branch::new(f(&b.slope), f(&b.intercept)))
                .collect(),
            sides: self.sides.clone(),
        }
    }

    pub fn to_f64(&self) -> PiecewiseAffineMap<f64> {
        self.convert(|v| v.to_f64())
    }
}

#[derive(Serialize, Deserialize)]
struct BranchJson {
    slope: NumText,
    intercept: NumText,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MapJson {
    Beta { beta: NumText, alpha: NumText },
    General { breakpoints: Vec<NumText>, branches: Vec<BranchJson>, sides: Vec<Side> },
}

impl<S: Scalar> Serialize for PiecewiseAffineMap<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
        MapJson::General {
            breakpoints: self.breakpoints.iter().map(NumText::of).collect(),
            branches: self
                .branches
                .iter()
                .map(|b| BranchJson { slope: NumText::of(&b.slope), intercept: NumText::of(&b.intercept) })
                .collect(),
            sides: self.sides.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for PiecewiseAffineMap<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let parse = |t: &NumText| t.value::<S>().map_err(D::Error::custom);
        match MapJson::deserialize(deserializer)? {
            MapJson::Beta { beta, alpha } => {
                let params = BetaParams::new(parse(&beta)?, parse(&alpha)?).map_err(D::Error::custom)?;
                PiecewiseAffineMap::beta(&params).map_err(D::Error::custom)
            }
            MapJson::General { breakpoints, branches, sides } => {
                let breakpoints = breakpoints.iter().map(parse).collect::<std::result::Result<_, _>>()?;
                let branches = branches
                    .iter()
                    .map(|b| Ok(Branch::new(parse(&b.slope)?, parse(&b.intercept)?)))
                    .collect::<std::result::Result<_, D::Error>>()?;
                PiecewiseAffineMap::new(breakpoints, branches, sides).map_err(D::Error::custom)
            }
        }
    }
}

impl<S: Scalar> Serialize for BetaParams<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
        MapJson::Beta { beta: NumText::of(&self.beta), alpha: NumText::of(&self.alpha) }
            .serialize(serializer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Rational;

    fn q(s: &str) -> Rational {
        Rational::parse(s).unwrap()
    }

    fn beta(b: &str, a: &str) -> PiecewiseAffineMap<Rational> {
        PiecewiseAffineMap::beta(&BetaParams::new(q(b), q(a)).unwrap()).unwrap()
    }

    /// `{z_0 = 0.5; −1.5x + 0.9; 1.5x − 0.5}`
    fn custom() -> PiecewiseAffineMap<Rational> {
        PiecewiseAffineMap::new(
            vec![q("0.5")],
            vec![Branch::new(q("-1.5"), q("0.9")), Branch::new(q("1.5"), q("-0.5"))],
            vec![Side::Right],
        )
        .unwrap()
    }

    #[test]
    fn beta_map_structure() {
        let f = beta("2", "0");
        assert_eq!(f.breakpoints(), &[q("0.5")]);
        assert_eq!(f.branches()[0], Branch::new(q("2"), q("0")));
        assert_eq!(f.branches()[1], Branch::new(q("2"), q("-1")));
        assert_eq!(f.sides(), &[Side::Right]);

        let g = beta("1.5", "0.25");
        assert_eq!(g.breakpoints(), &[q("0.5")]);
        assert_eq!(g.branches()[0], Branch::new(q("1.5"), q("0.25")));
        assert_eq!(g.branches()[1], Branch::new(q("1.5"), q("-0.75")));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(matches!(BetaParams::new(q("2.5"), q("0")), Err(Error::InvalidParams(_))));
        assert!(matches!(BetaParams::new(q("1"), q("0")), Err(Error::InvalidParams(_))));
        assert!(matches!(BetaParams::new(q("1.5"), q("0.6")), Err(Error::InvalidParams(_))));
        assert!(BetaParams::new(q("1.5"), q("0.5")).is_ok());
    }

    #[test]
    fn rejects_bad_maps() {
        // continuous at the breakpoint
        let r = PiecewiseAffineMap::new(
            vec![q("0.5")],
            vec![Branch::new(q("1"), q("0")), Branch::new(q("1"), q("0"))],
            vec![Side::Right],
        );
        assert!(matches!(r, Err(Error::InvalidMap(_))));
        // image leaves [0, 1]
        let r = PiecewiseAffineMap::new(
            vec![q("0.5")],
            vec![Branch::new(q("3"), q("0")), Branch::new(q("1"), q("-0.5"))],
            vec![Side::Right],
        );
        assert!(matches!(r, Err(Error::InvalidMap(_))));
        let r = PiecewiseAffineMap::<Rational>::new(vec![], vec![Branch::new(q("1"), q("0"))], vec![]);
        assert!(matches!(r, Err(Error::InvalidMap(_))));
    }

    #[test]
    fn evaluation() {
        let f = beta("2", "0");
        assert_eq!(f.evaluate(&q("0.25")).unwrap(), q("0.5"));
        assert_eq!(f.evaluate(&q("0.5")).unwrap(), q("0"));
        assert_eq!(f.evaluate(&q("1")).unwrap(), q("1"));
        assert_eq!(beta("1.5", "0.25").evaluate(&q("0.8")).unwrap(), q("0.45"));
        assert!(matches!(f.evaluate(&q("1.1")), Err(Error::OutOfDomain(_))));
        assert!(matches!(f.evaluate(&q("-0.1")), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn limits() {
        assert_eq!(beta("2", "0").one_sided_limits(0).unwrap(), (q("1"), q("0")));
        assert_eq!(beta("1.5", "0.25").one_sided_limits(0).unwrap(), (q("1"), q("0")));
        assert_eq!(custom().one_sided_limits(0).unwrap(), (q("0.15"), q("0.25")));
        assert!(matches!(custom().one_sided_limits(1), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn orientation_products() {
        let g = custom();
        assert_eq!(g.orientation(0, &q("0.25")).unwrap(), OrientationSign::Increasing);
        assert_eq!(g.orientation(1, &q("0.25")).unwrap(), OrientationSign::Decreasing);
        assert_eq!(g.evaluate(&q("0.25")).unwrap(), q("0.525"));
        assert_eq!(g.orientation(2, &q("0.25")).unwrap(), OrientationSign::Decreasing);
        // at the breakpoint the right branch is used
        assert_eq!(g.orientation(1, &q("0.5")).unwrap(), OrientationSign::Increasing);
        assert_eq!(beta("1.7", "0.2").orientation(9, &q("0.37")).unwrap(), OrientationSign::Increasing);
    }

    #[test]
    fn reflection() {
        let f = beta("2", "0");
        let r = f.reflect();
        assert_eq!(r.breakpoints(), &[q("0.5")]);
        assert_eq!(r.sides(), &[Side::Left]);
        for x in ["0", "0.1", "0.3", "0.7", "0.99", "1"] {
            let x = q(x);
            assert_eq!(r.evaluate(&(q("1") - x.clone())).unwrap(), q("1") - f.evaluate(&x).unwrap());
        }
        assert_eq!(custom().reflect().reflect(), custom());
    }

    #[test]
    fn json_round_trip() {
        let g = custom();
        let text = serde_json::to_string(&g).unwrap();
        assert!(text.contains("\"right\""));
        let back: PiecewiseAffineMap<Rational> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        let f: PiecewiseAffineMap<Rational> = serde_json::from_str(r#"{"beta":"1.5","alpha":0.25}"#).unwrap();
        assert_eq!(f, beta("1.5", "0.25"));
    }
}
