//! Simulation and reconstruction for ptychographic intensity interferometry.
//!
//! Pseudothermal speckle is generated for a probe scanned over an object,
//! the second-order intensity-fluctuation correlation of each position's
//! ensemble yields that position's Fourier modulus, and the object is
//! recovered by error reduction, hybrid input-output, or the ptychographic
//! engine in [`retrieval`].
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the common double-precision instantiations.

// Negated comparisons deliberately treat NaN as failing the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlation;
pub mod error;
pub mod fft;
pub mod grid;
pub mod optics;
pub mod piid;
pub mod retrieval;
pub mod scalar;
pub mod scan;
pub mod seed;

pub use error::{Error, Result};
pub use grid::{Dims, Grid, Offset};
pub use scalar::Real;

pub type ComplexField = optics::ComplexField<f64>;
pub type ObjectSample = optics::ObjectSample<f64>;
pub type ProbeAperture = optics::ProbeAperture<f64>;
pub type IntensityFrame = optics::IntensityFrame<f64>;
pub type SpeckleEnsemble = optics::SpeckleEnsemble<f64>;
pub type CorrelationMap = correlation::CorrelationMap<f64>;
pub type AmplitudeMap = correlation::AmplitudeMap<f64>;
pub type RetrievalState = retrieval::RetrievalState<f64>;
pub type PiiOutcome = retrieval::PiiOutcome<f64>;

pub type ComplexField32 = optics::ComplexField<f32>;
pub type ObjectSample32 = optics::ObjectSample<f32>;
pub type AmplitudeMap32 = correlation::AmplitudeMap<f32>;
