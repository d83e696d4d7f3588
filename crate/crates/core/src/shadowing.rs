//! Deciding whether a finite pseudo-orbit is ε-shadowed by a true orbit.
//!
//! Starting points are tracked as open pieces on which every iterate so far is
//! one affine map. Each step splits pieces at breakpoints, applies the branch
//! and intersects with the next tube `(x_{i+1} − ε, x_{i+1} + ε)`. Points whose
//! orbit lands exactly on a breakpoint fall outside every open piece; they are
//! collected when the split happens and simulated directly, which keeps the
//! decision complete. In rational mode the surviving set is computed exactly,
//! so `NotShadowed` is a proof.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::{step_piece, BreakpointHit, Interval, Piece};
use crate::maps::PiecewiseAffineMap;
use crate::numeric::{strictly_less, Decision, Scalar};
use crate::orbits::PseudoOrbit;

pub const DEFAULT_MAX_PIECES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShadowStatus {
    Shadowed,
    NotShadowed,
    Uncertain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShadowReport<S> {
    pub status: ShadowStatus,
    pub witness: Option<S>,
    pub max_deviation: Option<S>,
    pub pieces_peak: usize,
    pub candidate_points_checked: usize,
}

impl<S: Scalar> ShadowReport<S> {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "status": self.status,
            "witness": self.witness.as_ref().map(|w| w.to_decimal()),
            "max_deviation": self.max_deviation.as_ref().map(|d| d.to_decimal()),
            "pieces_peak": self.pieces_peak,
            "candidate_points_checked": self.candidate_points_checked,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShadowConfig {
    pub max_pieces: usize,
}

impl Default for ShadowConfig {
    fn default() -> Self {
        ShadowConfig { max_pieces: DEFAULT_MAX_PIECES }
    }
}

/// `max_i |f^i(z) − x_i|`.
pub fn max_deviation<S: Scalar>(map: &PiecewiseAffineMap<S>, z: &S, points: &[S]) -> S {
    let mut y = z.clone();
    let mut worst = S::zero();
    for (i, x) in points.iter().enumerate() {
        if i > 0 {
            y = map.apply(&y);
        }
        worst = S::max_of(worst, (y.clone() - x.clone()).abs());
    }
    worst
}

/// Guarded check that `|f^i(z) − x_i| < ε` for `i ≥ from`, given `f^from(z) = start`.
fn follows_from<S: Scalar>(
    map: &PiecewiseAffineMap<S>,
    start: &S,
    from: usize,
    points: &[S],
    epsilon: &S,
) -> Decision {
    let mut y = start.clone();
    let mut verdict = Decision::Yes;
    for (i, x) in points.iter().enumerate().skip(from) {
        if i > from {
            y = map.apply(&y);
        }
        verdict = verdict.and(strictly_less(&(y.clone() - x.clone()).abs(), epsilon));
        if verdict == Decision::No {
            break;
        }
    }
    verdict
}

/// Single starting points whose orbit meets a breakpoint or the boundary.
struct CandidateTrack<'a, S> {
    map: &'a PiecewiseAffineMap<S>,
    points: &'a [S],
    epsilon: &'a S,
    checked: usize,
    witness: Option<S>,
}

impl<S: Scalar> CandidateTrack<'_, S> {
    /// `seed` satisfies `f^from(seed) = start` and already follows the tubes up to `from`.
    fn check(&mut self, seed: S, start: &S, from: usize, uncertain: &mut bool) {
        self.checked += 1;
        if self.witness.is_some() {
            return;
        }
        match follows_from(self.map, start, from, self.points, self.epsilon) {
            Decision::Yes => {
                // the seed must reproduce the orbit on its own
                let dev = max_deviation(self.map, &seed, self.points);
                match strictly_less(&dev, self.epsilon) {
                    Decision::Yes => self.witness = Some(seed),
                    _ => *uncertain = true,
                }
            }
            Decision::Uncertain => *uncertain = true,
            Decision::No => {}
        }
    }
}

pub fn check_shadowing<S: Scalar>(
    map: &PiecewiseAffineMap<S>,
    pseudo: &PseudoOrbit<S>,
    epsilon: &S,
) -> Result<ShadowReport<S>> {
    check_shadowing_with(map, pseudo, epsilon, &ShadowConfig::default())
}

pub fn check_shadowing_with<S: Scalar>(
    map: &PiecewiseAffineMap<S>,
    pseudo: &PseudoOrbit<S>,
    epsilon: &S,
    config: &ShadowConfig,
) -> Result<ShadowReport<S>> {
    let points = &pseudo.points;
    if points.is_empty() {
        return Err(Error::EmptySequence);
    }
    for p in points {
        PiecewiseAffineMap::check_domain(p)?;
    }
    if *epsilon <= S::zero() {
        return Err(Error::InvalidParams("epsilon must be positive".into()));
    }
    let tubes: Vec<Interval<S>> = points.iter().map(|x| Interval::ball(x, epsilon)).collect();
    let mut uncertain = false;
    let mut track = CandidateTrack { map, points, epsilon, checked: 0, witness: None };
    let mut initial = vec![S::zero(), S::one()];
    for end in [tubes[0].lo.clone(), tubes[0].hi.clone()] {
        if end >= S::zero() && end <= S::one() {
            initial.push(end);
        }
    }
    for c in initial {
        track.check(c.clone(), &c, 0, &mut uncertain);
    }

    let seed = tubes[0].intersect(&Interval::unit());
    let mut pieces: Vec<Piece<S>> = if seed.is_empty() { Vec::new() } else { vec![Piece::identity(seed)] };
    let mut pieces_peak = pieces.len();

    for step in 0..points.len() - 1 {
        let tube = &tubes[step + 1];
        let mut next = Vec::with_capacity(pieces.len() + 4);
        let mut hits: Vec<BreakpointHit<S>> = Vec::new();
        for piece in &pieces {
            let mut stepped = Vec::with_capacity(2);
            step_piece(map, piece, &mut stepped, &mut hits);
            for mut p in stepped {
                let inter = p.image.intersect(tube);
                let width = inter.width();
                let keep = if S::EXACT {
                    width > S::zero()
                } else {
                    let g = width.guard();
                    if width > g {
                        true
                    } else {
                        if width > -g {
                            uncertain = true;
                        }
                        false
                    }
                };
                if keep {
                    p.image = inter;
                    next.push(p);
                }
            }
        }
        for hit in hits {
            let z = map.breakpoints()[hit.breakpoint].clone();
            track.check(hit.seed, &z, step, &mut uncertain);
        }
        if next.len() > config.max_pieces {
            return Err(Error::PieceExplosion(config.max_pieces));
        }
        next.sort_by(|a, b| a.image.lo.partial_cmp(&b.image.lo).expect("comparable"));
        pieces_peak = pieces_peak.max(next.len());
        pieces = next;
        if pieces.is_empty() && track.witness.is_some() {
            break;
        }
    }

    let mut ranked: Vec<&Piece<S>> = pieces.iter().collect();
    ranked.sort_by(|a, b| b.image.width().partial_cmp(&a.image.width()).expect("comparable"));
    for piece in ranked.into_iter().take(8) {
        let z = piece.affine.invert(&piece.image.midpoint());
        let dev = max_deviation(map, &z, points);
        if strictly_less(&dev, epsilon).is_yes() {
            return Ok(ShadowReport {
                status: ShadowStatus::Shadowed,
                witness: Some(z),
                max_deviation: Some(dev),
                pieces_peak,
                candidate_points_checked: track.checked,
            });
        }
        uncertain = true;
    }
    if let Some(z) = track.witness {
        let dev = max_deviation(map, &z, points);
        return Ok(ShadowReport {
            status: ShadowStatus::Shadowed,
            witness: Some(z),
            max_deviation: Some(dev),
            pieces_peak,
            candidate_points_checked: track.checked,
        });
    }
    Ok(ShadowReport {
        status: if uncertain { ShadowStatus::Uncertain } else { ShadowStatus::NotShadowed },
        witness: None,
        max_deviation: None,
        pieces_peak,
        candidate_points_checked: track.checked,
    })
}

/// One-sided sampling oracle: the first grid point (after `x_0`, `x_0 ± ε/2`)
/// whose orbit stays within `ε` of the pseudo-orbit. `None` proves nothing.
pub fn grid_shadow_oracle<S: Scalar>(
    map: &PiecewiseAffineMap<S>,
    pseudo: &PseudoOrbit<S>,
    epsilon: &S,
    samples: usize,
) -> Option<S> {
    let points = &pseudo.points;
    if points.is_empty() {
        return None;
    }
    let shadows = |z: &S| {
        let mut y = z.clone();
        for (i, x) in points.iter().enumerate() {
            if i > 0 {
                y = map.apply(&y);
            }
            if (y.clone() - x.clone()).abs() >= *epsilon {
                return false;
            }
        }
        true
    };
    let x0 = points[0].clone();
    let half = epsilon.half();
    let augmented = [x0.clone(), x0.clone() - half.clone(), x0 + half];
    if let Some(z) = augmented
        .into_iter()
        .filter(|z| *z >= S::zero() && *z <= S::one())
        .find(|z| shadows(z))
    {
        return Some(z);
    }
    let last = samples.saturating_sub(1).max(1) as i64;
    (0..samples as i64)
        .into_par_iter()
        .map(|i| S::ratio(i, last))
        .find_first(|z| shadows(z))
}
