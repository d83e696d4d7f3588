//! Transitivity, first-return renormalization of β-transformations, and the
//! lift of a return-map witness back to the full map.
//!
//! Discovery runs in `f64`: the invariant hull of a small window around the
//! breakpoint `c` exposes the component `J ∋ c` of a proper invariant set and
//! its return time `n`. The endpoints are then recomputed in the target backend
//! as `J = (T^{n−1}(0), T^{n−1}(1))` and every property of the return map is
//! checked there, so in rational mode the verified data is exact.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::intervals::{forward_image, Interval, IntervalUnion};
use crate::maps::{BetaParams, PiecewiseAffineMap};
use crate::numeric::{Decision, Scalar};
use crate::orbits::{find_preimage_in, PseudoOrbit, DEFAULT_MAX_DEPTH};
use crate::witness::{theorem_a_witness, CaseTag, WitnessTrace};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ROUNDS: usize = 10_000;
pub const MAX_RENORMALIZATION_DEPTH: usize = 5;
/// Largest residual accepted by the verification.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
pub const CONJUGACY_GRID: usize = 1000;
pub const RETURN_SAMPLES: usize = 100;

/// Smallest forward-invariant union containing `u`: `V ← V ∪ f(V)` until no
/// endpoint moves by more than the merge tolerance.
pub fn invariant_hull<S: Scalar>(
    map: &PiecewiseAffineMap<S>,
    u: &IntervalUnion<S>,
    max_rounds: usize,
) -> Result<IntervalUnion<S>> {
    if u.is_empty() {
        return Err(Error::InvalidParams("hull of an empty set".into()));
    }
    let tol = S::merge_tolerance();
    let mut hull = u.clone();
    // only the newly added part needs to be pushed forward
    let mut frontier = hull.clone();
    for _ in 0..max_rounds {
        let image = forward_image(map, &frontier);
        let next = hull.union(&image);
        if next.approx_eq(&hull, &tol) {
            return Ok(hull);
        }
        frontier = difference(&next, &hull);
        hull = next;
    }
    Err(Error::NoStabilization(max_rounds))
}

/// `a \ b` for open unions, as open intervals.
fn difference<S: Scalar>(a: &IntervalUnion<S>, b: &IntervalUnion<S>) -> IntervalUnion<S> {
    let mut out = Vec::new();
    for c in a.components() {
        let mut lo = c.lo.clone();
        for d in b.components() {
            if d.hi <= lo || d.lo >= c.hi {
                continue;
            }
            if d.lo > lo {
                out.push(Interval::new(lo.clone(), d.lo.clone()));
            }
            lo = S::max_of(lo, d.hi.clone());
        }
        if lo < c.hi {
            out.push(Interval::new(lo, c.hi.clone()));
        }
    }
    IntervalUnion::from_intervals(out)
}

fn probe_windows<S: Scalar>(map: &PiecewiseAffineMap<S>, tol: &S) -> Vec<Interval<S>> {
    let mut centers: Vec<S> = map.breakpoints().to_vec();
    for j in 0..=map.n_breakpoints() {
        let (lo, hi) = map.cell_bounds(j);
        centers.push((lo + hi).half());
    }
    centers.iter().map(|c| Interval::ball(c, tol).intersect(&Interval::unit())).collect()
}

/// `Yes` when the hull of every probe window covers `(tol, 1 − tol)`, `No` when
/// one misses an interval wider than `2·tol`.
pub fn is_transitive<S: Scalar>(map: &PiecewiseAffineMap<S>, tol: &S) -> Result<Decision> {
    let target = Interval::new(tol.clone(), S::one() - tol.clone());
    let wide = tol.clone() + tol.clone();
    let mut verdict = Decision::Yes;
    for window in probe_windows(map, tol) {
        let hull = invariant_hull(map, &IntervalUnion::single(window), DEFAULT_MAX_ROUNDS)?;
        if hull.covers(&target) {
            continue;
        }
        if hull.gaps().iter().any(|(a, b)| b.clone() - a.clone() > wide) {
            return Ok(Decision::No);
        }
        verdict = Decision::Uncertain;
    }
    Ok(verdict)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residuals<S> {
    pub invariance: S,
    pub conjugacy: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenormalizationData<S> {
    pub j: Interval<S>,
    pub n: usize,
    pub renormalized: BetaParams<S>,
    pub residuals: Residuals<S>,
    /// Set when some level returns after exactly two steps.
    pub n_equals_two: bool,
    /// Number of nested renormalizations composed into this one.
    pub depth: usize,
}

impl<S: Scalar> RenormalizationData<S> {
    pub fn width(&self) -> S {
        self.j.width()
    }

    /// Increasing affine bijection from `closure(J)` onto `[0, 1]`.
    pub fn h(&self, x: &S) -> S {
        (x.clone() - self.j.lo.clone()) / self.width()
    }

    pub fn h_inv(&self, u: &S) -> S {
        self.j.lo.clone() + u.clone() * self.width()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "J": [self.j.lo.to_decimal(), self.j.hi.to_decimal()],
            "n": self.n,
            "beta_n": self.renormalized.beta.to_decimal(),
            "alpha_hat": self.renormalized.alpha.to_decimal(),
            "residuals": {
                "invariance": self.residuals.invariance.to_decimal(),
                "conjugacy": self.residuals.conjugacy.to_decimal(),
            },
            "n_equals_two": self.n_equals_two,
            "depth": self.depth,
        })
    }
}

fn failed(what: impl Into<String>) -> Error {
    Error::VerificationFailed(what.into())
}

fn within<S: Scalar>(value: &S) -> bool {
    if S::EXACT {
        value.is_zero()
    } else {
        value.to_f64() < RESIDUAL_TOLERANCE
    }
}

/// Return time and approximate `J` found from the hull around the breakpoint.
fn discover(params: &BetaParams<f64>, tol: f64) -> Result<(usize, Interval<f64>)> {
    let map = PiecewiseAffineMap::beta(params)?;
    match is_transitive(&map, &tol)? {
        Decision::Yes => return Err(Error::IsTransitive),
        Decision::Uncertain => return Err(Error::TransitivityUncertain),
        Decision::No => {}
    }
    let c = params.critical_point();
    let window = Interval::ball(&c, &tol);
    let hull = invariant_hull(&map, &IntervalUnion::single(window), DEFAULT_MAX_ROUNDS)?;
    let j = hull
        .component_containing(&c)
        .cloned()
        .ok_or_else(|| failed("breakpoint not inside its hull"))?;
    let target = IntervalUnion::single(j.clone());
    let mut image = target.clone();
    for i in 1..=64 {
        image = forward_image(&map, &image);
        let meets = image.components().iter().any(|comp| comp.intersect(&j).width() > RESIDUAL_TOLERANCE);
        if meets {
            return Ok((i, j));
        }
    }
    Err(failed("no return to J within 64 steps"))
}

/// Deterministic well-spread points of `(0, 1)`.
fn spread(i: usize) -> f64 {
    const PHI: f64 = 0.618_033_988_749_894_8;
    (0.5 + (i + 1) as f64 * PHI).fract()
}

/// One renormalization step, verified in the backend `S`.
fn renormalize_once<S: Scalar>(params: &BetaParams<S>) -> Result<RenormalizationData<S>> {
    let (n, approx) = discover(&params.to_f64(), DEFAULT_TOLERANCE)?;
    let map = PiecewiseAffineMap::beta(params)?;
    let iterate = |x: &S, steps: usize| (0..steps).fold(x.clone(), |y, _| map.apply(&y));
    let j = Interval::new(iterate(&S::zero(), n - 1), iterate(&S::one(), n - 1));
    if (j.lo.to_f64() - approx.lo).abs() > 1e-6 || (j.hi.to_f64() - approx.hi).abs() > 1e-6 {
        return Err(failed("J endpoints disagree with the hull"));
    }
    let c = params.critical_point();
    if !j.contains(&c) {
        return Err(failed("breakpoint outside J"));
    }

    let mut image = IntervalUnion::single(j.clone());
    for i in 1..n {
        image = forward_image(&map, &image);
        for comp in image.components() {
            let overlap = comp.intersect(&j).width();
            if overlap > S::zero() && !within(&overlap) {
                return Err(failed(format!("T^{i}(J) meets J")));
            }
        }
    }
    image = forward_image(&map, &image);
    let comps = image.components();
    if comps.len() != 1 {
        return Err(failed("T^n(J) is not an interval"));
    }
    let invariance = S::max_of((comps[0].lo.clone() - j.lo.clone()).abs(), (comps[0].hi.clone() - j.hi.clone()).abs());
    if !within(&invariance) {
        return Err(failed(format!("T^n(J) != J (residual {})", invariance.to_decimal())));
    }

    let width = j.width();
    let h = |x: &S| (x.clone() - j.lo.clone()) / width.clone();
    let h_inv = |u: &S| j.lo.clone() + u.clone() * width.clone();
    let beta_n = params.beta.powi(n as u32);
    let probe = (j.lo.clone() + c.clone()).half();
    let mut alpha_hat = h(&iterate(&probe, n)) - beta_n.clone() * h(&probe);
    if !S::EXACT {
        // rounding may push α̂ just past the ends of its range
        let top = S::from_i64(2) - beta_n.clone();
        let slack = S::from_f64(RESIDUAL_TOLERANCE).expect("finite");
        if alpha_hat < S::zero() && -alpha_hat.clone() <= slack {
            alpha_hat = S::zero();
        } else if alpha_hat > top && alpha_hat.clone() - top.clone() <= slack {
            alpha_hat = top;
        }
    }
    let renormalized = BetaParams::new(beta_n, alpha_hat.clone())
        .map_err(|e| failed(format!("renormalized parameters: {e}")))?;
    let inner = PiecewiseAffineMap::beta(&renormalized)?;

    let mut conjugacy = S::zero();
    for i in 0..CONJUGACY_GRID {
        let u = S::ratio(2 * i as i64 + 1, 2 * CONJUGACY_GRID as i64);
        let x = h_inv(&u);
        let defect = (h(&iterate(&x, n)) - inner.apply(&u)).abs();
        conjugacy = S::max_of(conjugacy, defect);
    }
    if !within(&conjugacy) {
        return Err(failed(format!("conjugacy defect {}", conjugacy.to_decimal())));
    }
    for i in 0..RETURN_SAMPLES {
        let u = S::from_f64(spread(i)).expect("finite");
        let mut x = h_inv(&u);
        let first = (1..=n).find(|_| {
            x = map.apply(&x);
            j.contains(&x)
        });
        if first != Some(n) {
            return Err(failed("first return time differs from n"));
        }
    }
    Ok(RenormalizationData {
        j,
        n,
        renormalized,
        residuals: Residuals { invariance, conjugacy },
        n_equals_two: n == 2,
        depth: 1,
    })
}

/// Renormalizes a non-transitive β-transformation, recursing while the
/// return map is still non-transitive.
pub fn renormalize<S: Scalar>(params: &BetaParams<S>) -> Result<RenormalizationData<S>> {
    let mut data = renormalize_once(params)?;
    loop {
        let inner_map = PiecewiseAffineMap::beta(&data.renormalized.to_f64())?;
        match is_transitive(&inner_map, &DEFAULT_TOLERANCE)? {
            Decision::Yes => return Ok(data),
            Decision::Uncertain => return Err(Error::TransitivityUncertain),
            Decision::No => {}
        }
        if data.depth >= MAX_RENORMALIZATION_DEPTH {
            return Err(Error::DepthExceeded(MAX_RENORMALIZATION_DEPTH));
        }
        let inner = renormalize_once(&data.renormalized)?;
        let j = Interval::new(data.h_inv(&inner.j.lo), data.h_inv(&inner.j.hi));
        data = RenormalizationData {
            j,
            n: data.n * inner.n,
            renormalized: inner.renormalized,
            residuals: Residuals {
                invariance: S::max_of(data.residuals.invariance, inner.residuals.invariance),
                conjugacy: S::max_of(data.residuals.conjugacy, inner.residuals.conjugacy),
            },
            n_equals_two: data.n_equals_two || inner.n_equals_two,
            depth: data.depth + 1,
        };
    }
}

/// `v_{jn+l} = T^l(x_j)` for `l < n`, ending with the last inner point.
pub fn lift_pseudo_orbit<S: Scalar>(
    params: &BetaParams<S>,
    data: &RenormalizationData<S>,
    inner: &PseudoOrbit<S>,
) -> Result<PseudoOrbit<S>> {
    let map = PiecewiseAffineMap::beta(params)?;
    for x in &inner.points {
        if *x < data.j.lo || *x > data.j.hi {
            return Err(Error::PointOutsideJ(x.to_decimal()));
        }
    }
    let Some((last, body)) = inner.points.split_last() else {
        return Err(Error::EmptySequence);
    };
    let mut points = Vec::with_capacity(body.len() * data.n + 1);
    for x in body {
        let mut y = x.clone();
        for _ in 0..data.n {
            points.push(y.clone());
            y = map.apply(&y);
        }
    }
    points.push(last.clone());
    Ok(PseudoOrbit::new(points, inner.delta.clone()))
}

/// Non-shadowable pseudo-orbit of `T_{β,α}`. Transitive parameters are handed
/// to [`theorem_a_witness`]; otherwise a witness of the return map is repeated
/// twice, joined through the midpoint of `J` so that any shadow is trapped in
/// the cycle of `J`, and lifted.
pub fn theorem_b_witness<S: Scalar>(params: &BetaParams<S>, epsilon: &S) -> Result<WitnessTrace<S>> {
    let map = PiecewiseAffineMap::beta(params)?;
    match is_transitive(&map.to_f64(), &DEFAULT_TOLERANCE)? {
        Decision::Yes => return theorem_a_witness(&map, epsilon),
        Decision::Uncertain => return Err(Error::TransitivityUncertain),
        Decision::No => {}
    }
    let data = renormalize(params)?;
    let width = data.width();
    if *epsilon >= width.half() {
        return Err(Error::EpsilonTooLarge("eps < |J|/2".into()));
    }
    let inner_map = PiecewiseAffineMap::beta(&data.renormalized)?;
    let inner = theorem_a_witness(&inner_map, &(epsilon.clone() / width.clone()))?;
    let w = &inner.pseudo.points;
    let delta = inner.pseudo.delta.clone();
    let middle = S::one().half();
    let around = |x: S| Interval::ball(&x, &delta).intersect(&Interval::unit());

    let last = w.last().expect("nonempty witness");
    let (y_star, k) = find_preimage_in(&inner_map, &middle, &around(inner_map.apply(last)), DEFAULT_MAX_DEPTH)?;
    let (z_star, t) = find_preimage_in(&inner_map, &w[0], &around(inner_map.apply(&middle)), DEFAULT_MAX_DEPTH)?;

    let mut u = w.clone();
    let mut x = y_star.clone();
    for _ in 0..k {
        u.push(x.clone());
        x = inner_map.apply(&x);
    }
    u.push(middle);
    let mut x = z_star.clone();
    for _ in 0..t {
        u.push(x.clone());
        x = inner_map.apply(&x);
    }
    u.extend(w.iter().cloned());

    let in_j = PseudoOrbit::new(u.iter().map(|v| data.h_inv(v)).collect(), delta * width);
    let pseudo = lift_pseudo_orbit(params, &data, &in_j)?;
    Ok(WitnessTrace {
        pseudo,
        epsilon: epsilon.clone(),
        case: CaseTag::TheoremB,
        k: inner.k,
        y: data.h_inv(&y_star),
        m: k,
        orientation_m: inner.orientation_m,
        w: Some(data.h_inv(&z_star)),
        l: Some(t),
        orientation_l: None,
        anchor: inner.anchor,
        lead: inner.lead,
        reflected: inner.reflected,
    })
}

/// One cell of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub beta: f64,
    pub alpha: f64,
    pub transitive: Option<Decision>,
    pub data: Option<RenormalizationData<f64>>,
    pub error: Option<String>,
}

impl SweepRow {
    pub const HEADER: &'static str = "beta,alpha,transitive,n,J_lo,J_hi,alpha_hat,residual,error";

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        let d = self.data.as_ref();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.beta.to_decimal(),
            self.alpha.to_decimal(),
            opt(self.transitive.map(|t| t.to_string())),
            opt(d.map(|d| d.n.to_string())),
            opt(d.map(|d| d.j.lo.to_decimal())),
            opt(d.map(|d| d.j.hi.to_decimal())),
            opt(d.map(|d| d.renormalized.alpha.to_decimal())),
            opt(d.map(|d| d.residuals.invariance.max(d.residuals.conjugacy).to_decimal())),
            opt(self.error.clone()),
        )
    }
}

/// Grid parameters of the sweep; `α_j = (2 − β_i)·j/(resolution − 1)`.
pub fn sweep_grid(beta_lo: f64, beta_hi: f64, resolution: usize) -> Result<Vec<(f64, f64)>> {
    if resolution < 2 {
        return Err(Error::InvalidParams("resolution must be at least 2".into()));
    }
    if !(beta_lo > 1.0 && beta_lo <= beta_hi && beta_hi <= 2.0) {
        return Err(Error::InvalidParams("beta range must lie in (1, 2]".into()));
    }
    let last = (resolution - 1) as f64;
    let mut cells = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        let beta = beta_lo + (beta_hi - beta_lo) * i as f64 / last;
        for j in 0..resolution {
            let alpha = ((2.0 - beta) * j as f64 / last).min(2.0 - beta);
            cells.push((beta, alpha));
        }
    }
    Ok(cells)
}

fn sweep_cell(beta: f64, alpha: f64) -> SweepRow {
    let mut row = SweepRow { beta, alpha, transitive: None, data: None, error: None };
    let params = match BetaParams::new(beta, alpha) {
        Ok(p) => p,
        Err(e) => {
            row.error = Some(e.kind().to_string());
            return row;
        }
    };
    let map = match PiecewiseAffineMap::beta(&params) {
        Ok(m) => m,
        Err(e) => {
            row.error = Some(e.kind().to_string());
            return row;
        }
    };
    match is_transitive(&map, &DEFAULT_TOLERANCE) {
        Ok(Decision::No) => {
            row.transitive = Some(Decision::No);
            match renormalize(&params) {
                Ok(data) => row.data = Some(data),
                Err(e) => row.error = Some(e.kind().to_string()),
            }
        }
        Ok(t) => row.transitive = Some(t),
        Err(e) => row.error = Some(e.kind().to_string()),
    }
    row
}

/// β-major sweep in `f64`; cells are evaluated in parallel, rows come back in
/// grid order.
pub fn sweep(beta_lo: f64, beta_hi: f64, resolution: usize) -> Result<Vec<SweepRow>> {
    let cells = sweep_grid(beta_lo, beta_hi, resolution)?;
    Ok(cells.into_par_iter().map(|(b, a)| sweep_cell(b, a)).collect())
}
