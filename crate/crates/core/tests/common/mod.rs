//! Oracles and generators shared by the integration suites.
#![allow(dead_code)]

use betashadow::maps::{Branch, Side};
use betashadow::{BetaParams, PiecewiseAffineMap, PseudoOrbit, Rational, Scalar};
use rand::Rng;

pub fn q(s: &str) -> Rational {
    Rational::parse(s).unwrap()
}

pub fn beta_map<S: Scalar>(beta: S, alpha: S) -> PiecewiseAffineMap<S> {
    PiecewiseAffineMap::beta(&BetaParams::new(beta, alpha).unwrap()).unwrap()
}

pub fn lorenz() -> PiecewiseAffineMap<Rational> {
    PiecewiseAffineMap::new(
        vec![q("0.5")],
        vec![Branch::new(q("1.6"), q("0.1")), Branch::new(q("1.6"), q("-0.7"))],
        vec![Side::Right],
    )
    .unwrap()
}

pub fn negative_slope_map() -> PiecewiseAffineMap<Rational> {
    PiecewiseAffineMap::new(
        vec![q("0.5")],
        vec![Branch::new(q("-1.5"), q("0.9")), Branch::new(q("1.5"), q("-0.5"))],
        vec![Side::Right],
    )
    .unwrap()
}

pub fn random_params_f64(rng: &mut impl Rng) -> BetaParams<f64> {
    let beta = rng.gen_range(1.05..=2.0);
    let alpha = (2.0 - beta) * rng.gen_range(0.0..=1.0);
    BetaParams::new(beta, alpha.min(2.0 - beta)).unwrap()
}

/// `k/d` with `k` uniform in `0..=d`.
pub fn random_fraction(rng: &mut impl Rng, d: i64) -> Rational {
    Rational::ratio(rng.gen_range(0..=d), d)
}

pub fn random_params_rational(rng: &mut impl Rng) -> BetaParams<Rational> {
    let beta = Rational::ratio(rng.gen_range(11..=20), 10);
    let top = Rational::from_i64(2) - beta.clone();
    let alpha = top * random_fraction(rng, 8);
    BetaParams::new(beta, alpha).unwrap()
}

/// A true orbit from `x` with each later point moved by at most `jitter`.
pub fn perturbed_orbit<S: Scalar>(
    map: &PiecewiseAffineMap<S>,
    x: S,
    len: usize,
    mut jitter: impl FnMut() -> S,
) -> Vec<S> {
    let mut points = vec![x];
    for _ in 1..len {
        let next = map.apply(points.last().unwrap()) + jitter();
        points.push(S::max_of(S::zero(), S::min_of(S::one(), next)));
    }
    points
}

#[derive(Clone, Debug)]
struct End {
    value: Rational,
    closed: bool,
}

/// Set of starting points as one interval with open or closed ends.
#[derive(Clone, Debug)]
struct Span {
    lo: End,
    hi: End,
}

impl Span {
    fn is_empty(&self) -> bool {
        self.lo.value > self.hi.value || (self.lo.value == self.hi.value && !(self.lo.closed && self.hi.closed))
    }

    fn raise(&mut self, e: End) {
        if e.value > self.lo.value || (e.value == self.lo.value && !e.closed) {
            self.lo = e;
        }
    }

    fn lower(&mut self, e: End) {
        if e.value < self.hi.value || (e.value == self.hi.value && !e.closed) {
            self.hi = e;
        }
    }

    /// Restricts to `{ z : lo ⊲ s·z + t ⊲ hi }`.
    fn constrain(&mut self, s: &Rational, t: &Rational, lo: End, hi: End) {
        let pull = |e: End| End { value: (e.value - t.clone()) / s.clone(), closed: e.closed };
        if s.is_negative() {
            self.lower(pull(lo));
            self.raise(pull(hi));
        } else {
            self.raise(pull(lo));
            self.lower(pull(hi));
        }
    }
}

/// Exhaustive search over itineraries: some `z` follows branch `j_i` at step
/// `i` (respecting the side convention at breakpoints) and stays strictly
/// within `ε` of every `x_i`.
pub fn itinerary_oracle(map: &PiecewiseAffineMap<Rational>, pseudo: &PseudoOrbit<Rational>, eps: &Rational) -> bool {
    let pts = &pseudo.points;
    let mut start = Span {
        lo: End { value: Rational::zero(), closed: true },
        hi: End { value: Rational::one(), closed: true },
    };
    let open = |v: Rational| End { value: v, closed: false };
    start.constrain(&Rational::one(), &Rational::zero(), open(pts[0].clone() - eps.clone()), open(pts[0].clone() + eps.clone()));
    if start.is_empty() {
        return false;
    }
    search(map, pts, eps, 0, start, Rational::one(), Rational::zero())
}

fn search(
    map: &PiecewiseAffineMap<Rational>,
    pts: &[Rational],
    eps: &Rational,
    i: usize,
    span: Span,
    s: Rational,
    t: Rational,
) -> bool {
    if i + 1 == pts.len() {
        return true;
    }
    let z = map.breakpoints();
    let n = z.len();
    for (j, branch) in map.branches().iter().enumerate() {
        let lo = if j == 0 {
            End { value: Rational::zero(), closed: true }
        } else {
            End { value: z[j - 1].clone(), closed: map.sides()[j - 1] == Side::Right }
        };
        let hi = if j == n {
            End { value: Rational::one(), closed: true }
        } else {
            End { value: z[j].clone(), closed: map.sides()[j] == Side::Left }
        };
        let mut next = span.clone();
        next.constrain(&s, &t, lo, hi);
        let s2 = branch.slope.clone() * s.clone();
        let t2 = branch.slope.clone() * t.clone() + branch.intercept.clone();
        let x = &pts[i + 1];
        next.constrain(
            &s2,
            &t2,
            End { value: x.clone() - eps.clone(), closed: false },
            End { value: x.clone() + eps.clone(), closed: false },
        );
        if !next.is_empty() && search(map, pts, eps, i + 1, next, s2, t2) {
            return true;
        }
    }
    false
}
