//! Open intervals, finite unions of them, and affine pieces pushed through a
//! map one branch at a time.

use crate::maps::PiecewiseAffineMap;
use crate::numeric::Scalar;

/// Open interval `(lo, hi)`; empty when `hi <= lo`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval<S> {
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> Interval<S> {
    pub fn new(lo: S, hi: S) -> Self {
        Interval { lo, hi }
    }

    /// `(center − radius, center + radius)`.
    pub fn ball(center: &S, radius: &S) -> Self {
        Interval::new(center.clone() - radius.clone(), center.clone() + radius.clone())
    }

    pub fn unit() -> Self {
        Interval::new(S::zero(), S::one())
    }

    pub fn width(&self) -> S {
        self.hi.clone() - self.lo.clone()
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: &S) -> bool {
        self.lo < *x && *x < self.hi
    }

    pub fn intersect(&self, other: &Interval<S>) -> Interval<S> {
        Interval::new(
            S::max_of(self.lo.clone(), other.lo.clone()),
            S::min_of(self.hi.clone(), other.hi.clone()),
        )
    }

    pub fn midpoint(&self) -> S {
        (self.lo.clone() + self.hi.clone()).half()
    }

    pub fn meets(&self, other: &Interval<S>) -> bool {
        !self.intersect(other).is_empty()
    }
}

/// Sorted, pairwise-disjoint open intervals. Components whose gap is at most
/// the backend's merge tolerance are merged.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalUnion<S> {
    components: Vec<Interval<S>>,
}

impl<S: Scalar> IntervalUnion<S> {
    pub fn empty() -> Self {
        IntervalUnion { components: Vec::new() }
    }

    pub fn from_intervals(parts: impl IntoIterator<Item = Interval<S>>) -> Self {
        let mut parts: Vec<Interval<S>> = parts.into_iter().filter(|i| !i.is_empty()).collect();
        parts.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("comparable endpoints"));
        let tol = S::merge_tolerance();
        let mut components: Vec<Interval<S>> = Vec::with_capacity(parts.len());
        for part in parts {
            match components.last_mut() {
                Some(last) if part.lo.clone() - last.hi.clone() <= tol => {
                    if part.hi > last.hi {
                        last.hi = part.hi;
                    }
                }
                _ => components.push(part),
            }
        }
        IntervalUnion { components }
    }

    pub fn single(interval: Interval<S>) -> Self {
        Self::from_intervals([interval])
    }

    pub fn components(&self) -> &[Interval<S>] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn union(&self, other: &IntervalUnion<S>) -> IntervalUnion<S> {
        Self::from_intervals(self.components.iter().chain(other.components.iter()).cloned())
    }

    pub fn contains(&self, x: &S) -> bool {
        self.components.iter().any(|c| c.contains(x))
    }

    /// True when a single component contains `[target.lo, target.hi]`.
    pub fn covers(&self, target: &Interval<S>) -> bool {
        self.components.iter().any(|c| c.lo <= target.lo && c.hi >= target.hi)
    }

    pub fn component_containing(&self, x: &S) -> Option<&Interval<S>> {
        self.components.iter().find(|c| c.contains(x))
    }

    /// Every component of `self` is within `tol` of a component of `other`.
    pub fn approx_eq(&self, other: &IntervalUnion<S>, tol: &S) -> bool {
        self.components.len() == other.components.len()
            && self.components.iter().zip(&other.components).all(|(a, b)| {
                (a.lo.clone() - b.lo.clone()).abs() <= *tol && (a.hi.clone() - b.hi.clone()).abs() <= *tol
            })
    }

    /// Gaps of `[0, 1]` not covered by the union, as closed intervals.
    pub fn gaps(&self) -> Vec<(S, S)> {
        let mut gaps = Vec::new();
        let mut cursor = S::zero();
        for c in &self.components {
            if c.lo > cursor {
                gaps.push((cursor.clone(), c.lo.clone()));
            }
            if c.hi > cursor {
                cursor = c.hi.clone();
            }
        }
        if cursor < S::one() {
            gaps.push((cursor, S::one()));
        }
        gaps
    }
}

/// Composed affine map `x ↦ scale·x + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine<S> {
    pub scale: S,
    pub offset: S,
}

impl<S: Scalar> Affine<S> {
    pub fn identity() -> Self {
        Affine { scale: S::one(), offset: S::zero() }
    }

    pub fn apply(&self, x: &S) -> S {
        self.scale.clone() * x.clone() + self.offset.clone()
    }

    pub fn invert(&self, y: &S) -> S {
        (y.clone() - self.offset.clone()) / self.scale.clone()
    }

    /// `branch ∘ self`.
    pub fn then(&self, slope: &S, intercept: &S) -> Self {
        Affine {
            scale: slope.clone() * self.scale.clone(),
            offset: slope.clone() * self.offset.clone() + intercept.clone(),
        }
    }

    /// Preimage of an open interval.
    pub fn pull_back(&self, image: &Interval<S>) -> Interval<S> {
        let a = self.invert(&image.lo);
        let b = self.invert(&image.hi);
        if a <= b {
            Interval::new(a, b)
        } else {
            Interval::new(b, a)
        }
    }
}

/// An open set of starting points on which `f^i` is the single affine map
/// `affine`, together with its image.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece<S> {
    pub image: Interval<S>,
    pub affine: Affine<S>,
}

impl<S: Scalar> Piece<S> {
    pub fn identity(seed: Interval<S>) -> Self {
        Piece { image: seed, affine: Affine::identity() }
    }

    pub fn seed(&self) -> Interval<S> {
        self.affine.pull_back(&self.image)
    }
}

/// A starting point whose `step`-th iterate is exactly the breakpoint
/// `breakpoint`.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakpointHit<S> {
    pub seed: S,
    pub breakpoint: usize,
}

/// Pushes a piece one step forward: splits its image at interior breakpoints,
/// applies each branch, and reports the split points pulled back to the seed.
pub fn step_piece<S: Scalar>(
    map: &PiecewiseAffineMap<S>,
    piece: &Piece<S>,
    out: &mut Vec<Piece<S>>,
    hits: &mut Vec<BreakpointHit<S>>,
) {
    let z = map.breakpoints();
    let first = z.partition_point(|b| *b <= piece.image.lo);
    let last = z.partition_point(|b| *b < piece.image.hi);
    let mut lo = piece.image.lo.clone();
    for j in first..=last {
        let hi = if j < last { z[j].clone() } else { piece.image.hi.clone() };
        let branch = &map.branches()[j];
        let a = branch.apply(&lo);
        let b = branch.apply(&hi);
        let image = if a <= b { Interval::new(a, b) } else { Interval::new(b, a) };
        if !image.is_empty() {
            out.push(Piece { image, affine: piece.affine.then(&branch.slope, &branch.intercept) });
        }
        if j < last {
            hits.push(BreakpointHit { seed: piece.affine.invert(&z[j]), breakpoint: j });
        }
        lo = hi;
    }
}

/// `{ f(x) : x ∈ u, x not a breakpoint }`.
pub fn forward_image<S: Scalar>(map: &PiecewiseAffineMap<S>, u: &IntervalUnion<S>) -> IntervalUnion<S> {
    let mut out = Vec::new();
    let mut hits = Vec::new();
    for c in u.components() {
        step_piece(map, &Piece::identity(c.clone()), &mut out, &mut hits);
    }
    IntervalUnion::from_intervals(out.into_iter().map(|p| clip_unit(p.image)))
}

pub(crate) fn clip_unit<S: Scalar>(i: Interval<S>) -> Interval<S> {
    i.intersect(&Interval::unit())
}
