//! Pseudo-orbits that no true orbit can ε-shadow.
//!
//! Every construction follows the same pattern around a breakpoint `z_k`
//! whose side is `Right`:
//!
//! 1. An anchor pins down on which side of `z_k` any shadow must start. With
//!    [`Anchor::AtBreakpoint`] the pseudo-orbit sits on `z_k` itself, so a
//!    shadow starts in `[z_k, z_k + ε)`; with [`Anchor::LeftLimit`] it sits
//!    just left of `z_k` and continues from `f_−(z_k)`, forcing the shadow into
//!    `(z_k − ε, z_k)`.
//! 2. The pseudo-orbit follows the true orbit of the anchor value for `lead`
//!    steps. The shadow stays on a known side of it (sign `σ`).
//! 3. It jumps by less than `δ` to the opposite side, onto a point `y` with
//!    `f^m(y) = z_k`. The shadow is now strictly on side `τ = σ·orientation(m, y)`
//!    of `z_k`.
//! 4. The pseudo-orbit steps to `z_k − τκ`, the wrong side of the cut, and one
//!    step later the shadow and the pseudo-orbit are separated by about the
//!    jump `|f_+(z_k) − f_−(z_k)|`, which exceeds `ε`.
//!
//! Lead 0 at the breakpoint is the classical construction for `f(z_k) ≠ 0`.
//! When `f(z_k) = 0` and the orbit of `0` is fixed (as for the doubling map)
//! no jump window exists on the needed side and the search reports
//! [`Error::NoWitness`].

use crate::error::{Error, Result};
use crate::intervals::Interval;
use crate::maps::{OrientationSign, PiecewiseAffineMap, Side};
use crate::numeric::{strictly_less, Decision, Scalar};
use crate::orbits::{find_preimage_in, PseudoOrbit, DEFAULT_MAX_DEPTH};

/// Longest lead along the anchor orbit tried before giving up.
pub const MAX_LEAD: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessMargins<S> {
    pub eta: S,
    /// Supremum of admissible ε for this map.
    pub epsilon_max: S,
    pub min_cell: S,
    pub min_jump: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    Case1,
    Case2,
    TheoremB,
}

impl CaseTag {
    pub fn name(self) -> &'static str {
        match self {
            CaseTag::Case1 => "Case1",
            CaseTag::Case2 => "Case2",
            CaseTag::TheoremB => "TheoremB",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    AtBreakpoint,
    LeftLimit,
}

impl Anchor {
    pub fn name(self) -> &'static str {
        match self {
            Anchor::AtBreakpoint => "breakpoint",
            Anchor::LeftLimit => "left_limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessTrace<S> {
    pub pseudo: PseudoOrbit<S>,
    pub epsilon: S,
    pub case: CaseTag,
    pub k: usize,
    pub y: S,
    pub m: usize,
    pub orientation_m: OrientationSign,
    pub w: Option<S>,
    pub l: Option<usize>,
    pub orientation_l: Option<OrientationSign>,
    pub anchor: Anchor,
    pub lead: usize,
    pub reflected: bool,
}

impl<S: Scalar> WitnessTrace<S> {
    pub fn to_json(&self) -> serde_json::Value {
        let pseudo = serde_json::to_value(self.pseudo.to_json()).expect("plain data");
        serde_json::json!({
            "pseudo": pseudo,
            "epsilon": self.epsilon.to_decimal(),
            "case": self.case.name(),
            "k": self.k,
            "y": self.y.to_decimal(),
            "m": self.m,
            "w": self.w.as_ref().map(|w| w.to_decimal()),
            "l": self.l,
            "orientation_m": self.orientation_m.value(),
            "orientation_l": self.orientation_l.map(|o| o.value()),
            "anchor": self.anchor.name(),
            "lead": self.lead,
            "reflected": self.reflected,
        })
    }

    /// The same trace for the map conjugated by `x ↦ 1 − x`.
    pub fn reflect(self, n_breakpoints: usize) -> Self {
        let flip = |x: S| S::one() - x;
        WitnessTrace {
            pseudo: PseudoOrbit::new(self.pseudo.points.into_iter().map(flip).collect(), self.pseudo.delta),
            k: n_breakpoints - 1 - self.k,
            y: flip(self.y),
            w: self.w.map(flip),
            reflected: !self.reflected,
            ..self
        }
    }
}

fn too_large(constraint: &str) -> Error {
    Error::EpsilonTooLarge(constraint.to_string())
}

/// Margins for a witness at breakpoint `k`. The bound `η < f_−(z_k)` applies
/// only when `f(z_k) ≠ 0`.
pub fn witness_margins<S: Scalar>(
    map: &PiecewiseAffineMap<S>,
    k: usize,
    epsilon: &S,
) -> Result<WitnessMargins<S>> {
    let (f_minus, _) = map.one_sided_limits(k)?;
    if *epsilon <= S::zero() {
        return Err(Error::InvalidParams("epsilon must be positive".into()));
    }
    let min_cell = map.min_cell_width();
    let min_jump = map.min_jump();
    let stretch = S::one() + map.max_abs_slope();
    let epsilon_max = S::min_of(min_cell.clone(), min_jump.clone() / stretch.clone());
    if !strictly_less(epsilon, &min_cell).is_yes() {
        return Err(too_large("eps + eta < min_cell"));
    }
    if !strictly_less(&(stretch * epsilon.clone()), &min_jump).is_yes() {
        return Err(too_large("min_jump > (1 + max|s|)*eps"));
    }
    let mut bound = S::min_of(epsilon.clone(), min_cell.clone() - epsilon.clone());
    let value = map.apply(&map.breakpoints()[k]);
    if !value.is_zero() {
        if !f_minus.is_negative() && !f_minus.is_zero() {
            bound = S::min_of(bound, f_minus);
        } else {
            return Err(too_large("eta < f_-(z_k)"));
        }
    }
    Ok(WitnessMargins { eta: bound.half(), epsilon_max, min_cell, min_jump })
}

fn check_delta<S: Scalar>(margins: &WitnessMargins<S>, delta: &S) -> Result<()> {
    if *delta <= S::zero() || *delta >= margins.eta {
        return Err(Error::InvalidParams(format!(
            "delta must lie in (0, {})",
            margins.eta.to_decimal()
        )));
    }
    Ok(())
}

fn require_right<S: Scalar>(map: &PiecewiseAffineMap<S>, k: usize) -> Result<()> {
    match map.sides().get(k) {
        None => Err(Error::IndexOutOfRange { index: k, len: map.n_breakpoints() }),
        Some(Side::Left) => Err(Error::WrongCase("breakpoint side is left; reflect the map".into())),
        Some(Side::Right) => Ok(()),
    }
}

/// One attempt: the anchor, `lead` steps along the anchor orbit, the jump onto
/// a preimage of `z_k`, and the perturbed ending. `None` when the jump window is
/// empty or holds no preimage.
fn build<S: Scalar>(
    map: &PiecewiseAffineMap<S>,
    k: usize,
    epsilon: &S,
    delta: &S,
    anchor: Anchor,
    lead: usize,
    case: CaseTag,
) -> Result<Option<WitnessTrace<S>>> {
    let z = map.breakpoints()[k].clone();
    let (f_minus, f_plus) = map.one_sided_limits(k)?;
    let (start, value, sigma) = match anchor {
        Anchor::AtBreakpoint => {
            let slope = &map.branches()[k + 1].slope;
            (z.clone(), f_plus, OrientationSign::of_slope(slope))
        }
        Anchor::LeftLimit => {
            if lead == 0 {
                return Ok(None);
            }
            let slope = map.branches()[k].slope.clone();
            // |s_k|·κ₀ ≤ δ/2 keeps the first gap below δ
            let kappa0 = delta.half() / S::max_of(S::one(), slope.abs());
            let sigma = OrientationSign::of_slope(&slope).times(OrientationSign::Decreasing);
            (z.clone() - kappa0, f_minus, sigma)
        }
    };
    let mut points = vec![start];
    let mut p = value;
    let mut sigma = sigma;
    for _ in 0..lead {
        points.push(p.clone());
        let branch = &map.branches()[map.branch_index(&p)];
        sigma = sigma.times(OrientationSign::of_slope(&branch.slope));
        p = map.apply(&p);
    }
    let window = match sigma {
        OrientationSign::Increasing => Interval::new(p.clone() - delta.clone(), p.clone()),
        OrientationSign::Decreasing => Interval::new(p.clone(), p.clone() + delta.clone()),
    }
    .intersect(&Interval::unit());
    if window.is_empty() {
        return Ok(None);
    }
    let (y, m) = match find_preimage_in(map, &z, &window, DEFAULT_MAX_DEPTH) {
        Ok(found) => found,
        Err(Error::NotFound(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let orientation_m = map.orientation(m, &y)?;
    let mut x = y.clone();
    for _ in 0..m {
        points.push(x.clone());
        x = map.apply(&x);
    }
    let tau = sigma.times(orientation_m);
    let kappa = delta.half();
    let perturbed = z - tau.apply(kappa);
    let last = map.apply(&perturbed);
    points.push(perturbed);
    points.push(last);
    Ok(Some(WitnessTrace {
        pseudo: PseudoOrbit::new(points, delta.clone()),
        epsilon: epsilon.clone(),
        case,
        k,
        y,
        m,
        orientation_m,
        w: None,
        l: None,
        orientation_l: None,
        anchor,
        lead,
        reflected: false,
    }))
}

/// Witness at a breakpoint with `f(z_k) ≠ 0`: jump straight from `f(z_k)`.
pub fn case1_witness<S: Scalar>(
    map: &PiecewiseAffineMap<S>,
    k: usize,
    epsilon: &S,
    delta: &S,
) -> Result<WitnessTrace<S>> {
    require_right(map, k)?;
    if map.apply(&map.breakpoints()[k]).is_zero() {
        return Err(Error::WrongCase("f(z_k) = 0".into()));
    }
    let margins = witness_margins(map, k, epsilon)?;
    check_delta(&margins, delta)?;
    build(map, k, epsilon, delta, Anchor::AtBreakpoint, 0, CaseTag::Case1)?
        .ok_or_else(|| Error::NotFound("no preimage of z_k in the jump window".into()))
}

/// Witness at a breakpoint with `f(z_k) = 0`: follow the orbit of `f_+(z_k)`,
/// then of `f_−(z_k)`, until a jump window opens.
pub fn case2_witness<S: Scalar>(
    map: &PiecewiseAffineMap<S>,
    k: usize,
    epsilon: &S,
    delta: &S,
) -> Result<WitnessTrace<S>> {
    require_right(map, k)?;
    if !map.apply(&map.breakpoints()[k]).is_zero() {
        return Err(Error::WrongCase("f(z_k) != 0".into()));
    }
    let margins = witness_margins(map, k, epsilon)?;
    check_delta(&margins, delta)?;
    for anchor in [Anchor::AtBreakpoint, Anchor::LeftLimit] {
        for lead in 0..=MAX_LEAD {
            if let Some(trace) = build(map, k, epsilon, delta, anchor, lead, CaseTag::Case2)? {
                return Ok(trace);
            }
        }
    }
    Err(Error::NoWitness(format!(
        "both critical orbits of breakpoint {k} stay pinned to the boundary"
    )))
}

/// Witness for a transitive map with `δ = η/2`, at the smallest usable
/// breakpoint. Left-sided breakpoints are handled on the reflected map.
pub fn theorem_a_witness<S: Scalar>(map: &PiecewiseAffineMap<S>, epsilon: &S) -> Result<WitnessTrace<S>> {
    match crate::renorm::is_transitive(&map.to_f64(), &crate::renorm::DEFAULT_TOLERANCE)? {
        Decision::Yes => {}
        Decision::No => return Err(Error::NotTransitive),
        Decision::Uncertain => return Err(Error::TransitivityUncertain),
    }
    witness_without_transitivity_check(map, epsilon)
}

/// [`theorem_a_witness`] for a map already known to be transitive.
pub fn witness_without_transitivity_check<S: Scalar>(
    map: &PiecewiseAffineMap<S>,
    epsilon: &S,
) -> Result<WitnessTrace<S>> {
    let mut last_error = Error::NoWitness("no right-sided breakpoint".into());
    let reflected = map.reflect();
    for (candidate, flipped) in [(map, false), (&reflected, true)] {
        for k in 0..candidate.n_breakpoints() {
            if candidate.sides()[k] != Side::Right {
                continue;
            }
            let attempt = witness_margins(candidate, k, epsilon).and_then(|margins| {
                let delta = margins.eta.half();
                if candidate.apply(&candidate.breakpoints()[k]).is_zero() {
                    case2_witness(candidate, k, epsilon, &delta)
                } else {
                    case1_witness(candidate, k, epsilon, &delta)
                }
            });
            match attempt {
                Ok(trace) if flipped => return Ok(trace.reflect(map.n_breakpoints())),
                Ok(trace) => return Ok(trace),
                Err(e) => last_error = e,
            }
        }
    }
    Err(last_error)
}
