//! Certified verification of vertex-expansion profiles for random
//! `d`-regular bipartite multigraphs.
//!
//! * [`interval`]: outward-rounded interval arithmetic.
//! * [`profiles`]: the exact piecewise-linear profiles `f_5` .. `f_8`.
//! * [`verifier`]: bisection certificates for `Q < 0.9999` on the profile
//!   boundaries, the convexity region, and the `Q = 1` level curve.
//! * [`exact`]: big-rational evaluation of the union-bound terms.
//! * [`graphs`]: the random matching construction and brute-force oracles.

pub mod exact;
pub mod graphs;
pub mod interval;
pub mod profiles;
pub mod verifier;

pub use interval::{Interval, IntervalError};
pub use profiles::{builtin_profile, AffineSegment, PiecewiseLinearProfile};
pub use verifier::{QFunction, Transcript, VerificationTask};
