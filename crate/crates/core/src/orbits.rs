//! Orbits, pseudo-orbits and preimage search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::{clip_unit, step_piece, Interval, Piece};
use crate::json::NumText;
use crate::maps::PiecewiseAffineMap;
use crate::numeric::{approx_eq, strictly_less, Decision, Scalar};

/// Default depth cap of the preimage search.
pub const DEFAULT_MAX_DEPTH: usize = 64;

/// Live pieces allowed in the preimage search before it gives up.
const PREIMAGE_PIECE_CAP: usize = 200_000;

/// A finite true orbit `x, f(x), …, f^N(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit<S> {
    pub points: Vec<S>,
}

/// A finite sequence together with the `δ` it is claimed to respect.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoOrbit<S> {
    pub points: Vec<S>,
    pub delta: S,
}

impl<S: Scalar> PseudoOrbit<S> {
    pub fn new(points: Vec<S>, delta: S) -> Self {
        PseudoOrbit { points, delta }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_f64(&self) -> PseudoOrbit<f64> {
        PseudoOrbit::new(self.points.iter().map(|p| p.to_f64()).collect(), self.delta.to_f64())
    }

    pub fn to_json(&self) -> PseudoOrbitJson {
        PseudoOrbitJson {
            delta: NumText::of(&self.delta),
            points: self.points.iter().map(NumText::of).collect(),
        }
    }

    pub fn from_json(json: &PseudoOrbitJson) -> Result<Self> {
        Ok(PseudoOrbit::new(
            json.points.iter().map(|p| p.value()).collect::<Result<_>>()?,
            json.delta.value()?,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoOrbitJson {
    pub delta: NumText,
    pub points: Vec<NumText>,
}

/// Largest one-step defect `|f(x_i) − x_{i+1}|` and its verdict against `δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport<S> {
    pub max_gap: S,
    pub argmax_index: usize,
    pub valid: Decision,
}

impl<S: Scalar> GapReport<S> {
    pub fn to_json(&self) -> serde_json::Value {
        let valid = match self.valid {
            Decision::Yes => serde_json::Value::Bool(true),
            Decision::No => serde_json::Value::Bool(false),
            Decision::Uncertain => serde_json::Value::String("uncertain".into()),
        };
        serde_json::json!({
            "max_gap": self.max_gap.to_decimal(),
            "argmax_index": self.argmax_index,
            "valid": valid,
        })
    }
}

pub fn iterate<S: Scalar>(map: &PiecewiseAffineMap<S>, x: &S, steps: usize) -> Result<Orbit<S>> {
    PiecewiseAffineMap::check_domain(x)?;
    let mut points = Vec::with_capacity(steps + 1);
    points.push(x.clone());
    for i in 0..steps {
        let next = map.apply(&points[i]);
        points.push(next);
    }
    Ok(Orbit { points })
}

pub fn validate_pseudo_orbit<S: Scalar>(
    map: &PiecewiseAffineMap<S>,
    points: &[S],
    delta: &S,
) -> Result<GapReport<S>> {
    if points.len() < 2 {
        return Err(Error::EmptySequence);
    }
    for p in points {
        PiecewiseAffineMap::check_domain(p)?;
    }
    let mut max_gap = S::zero();
    let mut argmax_index = 0;
    for (i, w) in points.windows(2).enumerate() {
        let gap = (map.apply(&w[0]) - w[1].clone()).abs();
        if gap > max_gap {
            max_gap = gap;
            argmax_index = i;
        }
    }
    let valid = strictly_less(&max_gap, delta);
    Ok(GapReport { max_gap, argmax_index, valid })
}

/// All `q` with `f(q) = p`, sorted ascending.
pub fn preimages_of<S: Scalar>(map: &PiecewiseAffineMap<S>, p: &S) -> Result<Vec<S>> {
    PiecewiseAffineMap::check_domain(p)?;
    let mut out: Vec<S> = Vec::new();
    for (j, branch) in map.branches().iter().enumerate() {
        let q = branch.invert(p);
        let (lo, hi) = map.cell_bounds(j);
        let g = q.guard();
        if q < lo.clone() - g.clone() || q > hi.clone() + g {
            continue;
        }
        let q = S::max_of(lo, S::min_of(hi, q));
        if approx_eq(&map.apply(&q), p) && !out.iter().any(|o| approx_eq(o, &q)) {
            out.push(q);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).expect("comparable"));
    Ok(out)
}

/// Smallest `m ≥ 1` (then smallest `y`) with `y ∈ window` and `f^m(y) = p`.
///
/// The window is pushed forward piece by piece: each piece carries the affine
/// form of `f^i` on an open set of starting points, so `p` is reached exactly
/// when it falls inside a piece image. Starting points whose orbit passes
/// through a breakpoint are followed separately as single points.
pub fn find_preimage_in<S: Scalar>(
    map: &PiecewiseAffineMap<S>,
    p: &S,
    window: &Interval<S>,
    max_depth: usize,
) -> Result<(S, usize)> {
    PiecewiseAffineMap::check_domain(p)?;
    let window = clip_unit(window.clone());
    if window.is_empty() {
        return Err(Error::NotFound("empty window".into()));
    }
    let mut pieces = vec![Piece::identity(window)];
    // (seed, current iterate)
    let mut tracked: Vec<(S, S)> = Vec::new();
    for depth in 1..=max_depth {
        let mut next = Vec::with_capacity(pieces.len() + 4);
        let mut hits = Vec::new();
        for piece in &pieces {
            step_piece(map, piece, &mut next, &mut hits);
        }
        for (_, x) in tracked.iter_mut() {
            *x = map.apply(x);
        }
        for hit in hits {
            let value = map.apply(&map.breakpoints()[hit.breakpoint]);
            tracked.push((hit.seed, value));
        }
        let mut found: Option<S> = None;
        let mut consider = |y: S| {
            if found.as_ref().is_none_or(|f| y < *f) {
                found = Some(y);
            }
        };
        for piece in &next {
            if piece.image.contains(p) {
                consider(piece.affine.invert(p));
            }
        }
        for (seed, x) in &tracked {
            if approx_eq(x, p) {
                consider(seed.clone());
            }
        }
        if let Some(y) = found {
            return Ok((y, depth));
        }
        if next.len() > PREIMAGE_PIECE_CAP {
            return Err(Error::NotFound(format!("piece cap reached at depth {depth}")));
        }
        pieces = next;
    }
    Err(Error::NotFound(format!("depth cap {max_depth} reached")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::BetaParams;
    use crate::numeric::Rational;

    fn q(s: &str) -> Rational {
        Rational::parse(s).unwrap()
    }

    fn qs(v: &[&str]) -> Vec<Rational> {
        v.iter().map(|s| q(s)).collect()
    }

    fn beta(b: &str, a: &str) -> PiecewiseAffineMap<Rational> {
        PiecewiseAffineMap::beta(&BetaParams::new(q(b), q(a)).unwrap()).unwrap()
    }

    #[test]
    fn iterates() {
        let d = beta("2", "0");
        assert_eq!(iterate(&d, &q("0.3"), 3).unwrap().points, qs(&["0.3", "0.6", "0.2", "0.4"]));
        assert_eq!(iterate(&d, &q("0.5"), 3).unwrap().points, qs(&["0.5", "0", "0", "0"]));
        let g = beta("1.5", "0.25");
        assert_eq!(iterate(&g, &q("0.5"), 3).unwrap().points, qs(&["0.5", "0", "0.25", "0.625"]));
        assert!(matches!(iterate(&d, &q("2"), 1), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn validates() {
        let d = beta("2", "0");
        let r = validate_pseudo_orbit(&d, &qs(&["0.3", "0.6", "0.2"]), &q("0.01")).unwrap();
        assert_eq!((r.max_gap.clone(), r.valid), (q("0"), Decision::Yes));
        let r = validate_pseudo_orbit(&d, &qs(&["0.3", "0.65", "0.3"]), &q("0.1")).unwrap();
        assert_eq!((r.max_gap, r.argmax_index, r.valid), (q("0.05"), 0, Decision::Yes));
        let r = validate_pseudo_orbit(&d, &qs(&["0.3", "0.72"]), &q("0.1")).unwrap();
        assert_eq!((r.max_gap, r.valid), (q("0.12"), Decision::No));
        assert_eq!(validate_pseudo_orbit(&d, &qs(&["0.3"]), &q("0.1")), Err(Error::EmptySequence));
        // gap equal to delta is not strictly below it
        let r = validate_pseudo_orbit(&d, &qs(&["0.3", "0.7"]), &q("0.1")).unwrap();
        assert_eq!(r.valid, Decision::No);
    }

    #[test]
    fn preimages() {
        let d = beta("2", "0");
        assert_eq!(preimages_of(&d, &q("0.5")).unwrap(), qs(&["0.25", "0.75"]));
        assert_eq!(preimages_of(&d, &q("0.1")).unwrap(), qs(&["0.05", "0.55"]));
        let g = beta("1.5", "0.25");
        assert_eq!(preimages_of(&g, &q("0.4")).unwrap(), vec![q("0.1"), Rational::ratio(23, 30)]);
        // 0 is hit only through the breakpoint
        assert_eq!(preimages_of(&d, &q("0")).unwrap(), qs(&["0", "0.5"]));
        // 1 is hit by the right endpoint only; 0.5 maps to 0, not 1
        assert_eq!(preimages_of(&d, &q("1")).unwrap(), qs(&["1"]));
    }

    #[test]
    fn preimage_search() {
        let d = beta("2", "0");
        let w = |a: &str, b: &str| Interval::new(q(a), q(b));
        assert_eq!(find_preimage_in(&d, &q("0.5"), &w("0", "0.1"), 64).unwrap(), (q("0.0625"), 3));
        assert_eq!(find_preimage_in(&d, &q("0.5"), &w("0.2", "0.3"), 64).unwrap(), (q("0.25"), 1));
        assert!(matches!(
            find_preimage_in(&d, &q("0.5"), &w("0.9", "0.90001"), 2),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn preimage_search_through_breakpoint() {
        // 0.5 → 0 → 0 under doubling: the only depth-2 preimage of 0 in the
        // window is reached through the breakpoint
        let d = beta("2", "0");
        let (y, m) = find_preimage_in(&d, &q("0"), &Interval::new(q("0.4"), q("0.6")), 8).unwrap();
        assert_eq!((y, m), (q("0.5"), 1));
        let g = beta("1.5", "0.25");
        // f(0.5) = 0, f(0) = 0.25
        let (y, m) = find_preimage_in(&g, &q("0.25"), &Interval::new(q("0.45"), q("0.55")), 8).unwrap();
        assert_eq!((y, m), (q("0.5"), 2));
    }
}
