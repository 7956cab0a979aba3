//! Rate-distortion-equivocation regions for lossy source coding with decoder
//! side information, an eavesdropper with its own side information, and a
//! shared secret key.
//!
//! - [`prob`]: finite joint distributions, channels and information measures.
//! - [`region`]: bound functionals and boundary search over auxiliary schemes.
//! - [`special`]: equivalent forms of the bound and closed-form special cases.
//! - [`osrb`]: exact finite-blocklength evaluation of the random-binning scheme.

pub mod osrb;
pub mod prob;
pub mod region;
pub mod special;

pub use prob::{Alphabet, CondChannel, DistortionMeasure, JointDist, ProbError};
pub use region::{
    evaluate_bounds, max_equivocation, optimal_reconstruction, region_sweep, BoundEvaluation, RegionError,
    RegionPoint, SchemeParams, SearchConfig, SearchOutcome,
};
