//! Executable finite-shadowing analysis for β-transformations and general
//! discontinuous piecewise affine monotone interval maps.
//!
//! All algorithms are generic over [`numeric::Scalar`]: use
//! [`numeric::Rational`] for exact verdicts and `f64` for speed.

pub mod error;
pub mod expansions;
pub mod intervals;
pub mod json;
pub mod maps;
pub mod numeric;
pub mod orbits;
pub mod renorm;
pub mod shadowing;
pub mod witness;

pub use error::{Error, Result};
pub use intervals::{forward_image, Interval, IntervalUnion};
pub use maps::{BetaParams, Branch, OrientationSign, PiecewiseAffineMap, Side};
pub use numeric::{Decision, Rational, Scalar};
pub use orbits::{find_preimage_in, iterate, preimages_of, validate_pseudo_orbit, GapReport, Orbit, PseudoOrbit};
pub use expansions::{coding, reconstruct, DigitString};
pub use renorm::{invariant_hull, is_transitive, lift_pseudo_orbit, renormalize, theorem_b_witness, RenormalizationData};
pub use shadowing::{check_shadowing, grid_shadow_oracle, ShadowReport, ShadowStatus};
pub use witness::{case1_witness, case2_witness, theorem_a_witness, witness_margins, WitnessMargins, WitnessTrace};
