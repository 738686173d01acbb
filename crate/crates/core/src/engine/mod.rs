//! Escape-time estimation: Monte Carlo in the full map, the discretized
//! kernel oracle for the reduced map, and quasi-stationary density runs.

pub mod density;
pub mod montecarlo;
pub mod oracle;

pub use density::{empirical_density_1d, Histogram};
pub use montecarlo::{
    estimate_mfpt, run_trial, write_samples_jsonl, AbsorbingBoundary, EscapeProblem, ExitBranch,
    FptSample, MfptEstimate, OrientedLine, DEFAULT_STEP_CAP, MAX_CENSORED_FRACTION,
};
pub use oracle::{default_oracle_spacing, oracle_mfpt_1d, ExitMoments, KernelOracle};
