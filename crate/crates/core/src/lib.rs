//! Core library for the delay-aware data-collection simulation: the
//! age-of-information process, sonar signal estimators, observation-delay
//! models, the multi-vehicle environment, and the tabular training loop.

pub mod aoi;
pub mod delay;
pub mod env;
pub mod rng;
pub mod sonar;

pub use aoi::{AoiError, AoiProcess, DelayWaitTrace};
pub use delay::{DelayError, DelayModel, GeometryContext};
pub use rng::{derive_seed, seed_rng, SimRng};
