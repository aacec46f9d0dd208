//! Exact simulator and analysis toolkit for error-disturbance
//! uncertainty relations (EDURs) in successive spin-1/2 measurements.
//!
//! The crate models the three-stage polarimeter: mixed-state
//! preparation through a noisy rotation channel, a detuned projective
//! measurement followed by a correction unitary, and a successive
//! measurement of a second observable.  On top of that it evaluates the
//! trade-off inequalities between measurement error and disturbance,
//! their lower bounds for mixed states, and the intensity-level
//! three-state reconstruction with optional Poisson counting noise.

pub mod audit;
pub mod error;
pub mod matrix;
pub mod measurement;
pub mod metrics;
pub mod protocol;
pub mod quadrature;
pub mod states;

pub use error::{EdurError, Result};
pub use matrix::{Matrix2, PauliAxis};
pub use measurement::{
    corrected_apparatus, projective_apparatus, CorrectionTarget, MeasurementFamily,
};
pub use metrics::{
    bound_c, bound_d, check_branciard, check_ozawa, check_tight_qubit,
    disturbance_bounds_closed_form, error_closed_form, error_disturbance, optimize_correction,
    BoundSet, CorrectionSearch, EdurPoint, InequalityCheck,
};
pub use protocol::{
    expectations_from_counts, mixing_channel, parse_count_tables_csv, prefactor,
    simulate_counts, solve_sigma_for_alpha, CountMode, CountTable, NoiseDistribution,
    NoisyRotationSpec, Reconstruction, Sampling, ThreeStateRun,
};
pub use states::{expectation, fidelity, variance, AxisObservable, QubitState};
