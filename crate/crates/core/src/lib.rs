//! Mean first passage times for noise-driven escape between the competing
//! attractors of a weakly nonlinear coupled map.
//!
//! The numerical core is generic over the scalar type ([`Real`]: `f32` or
//! `f64`); closed-form potentials also accept exact rationals ([`Field`]).
//! The `*64` aliases below fix the scalar to `f64`, which every experiment
//! driver uses.

pub mod analysis;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod noise;
pub mod path;
pub mod scalar;
pub mod theory;

pub use dynamics::{
    fixed_points, potential, potential_grad, rescale, step_raw, step_transformed, unscale,
    CriticalKind, CriticalPoint, FixedPoints, Frame, MapParams, State2D,
};
pub use error::{Error, Result};
pub use noise::NoiseStream;
pub use path::{trace_valley_path, PathMethod, PathOptions, ReducedSystem, ValleyPath};
pub use scalar::{Field, Real};
pub use theory::{
    critical_potentials, predicted_mfpt, wkb_density, wkb_residual, TheoryPrediction,
};

pub type MapParams64 = MapParams<f64>;
pub type State64 = State2D<f64>;
pub type CriticalPoint64 = CriticalPoint<f64>;
pub type ValleyPath64 = ValleyPath<f64>;
pub type ReducedSystem64 = ReducedSystem<f64>;
pub type NoiseStream64 = NoiseStream<f64>;
pub type EscapeProblem64 = engine::EscapeProblem<f64>;
pub type TheoryPrediction64 = TheoryPrediction<f64>;
