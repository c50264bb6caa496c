//! Lower bounds on the feedback capacity of additive ARMA colored Gaussian
//! noise channels, computed through the steady state of a scalar Kalman
//! filter, together with the closed-loop coding systems the construction
//! induces.
//!
//! The pipeline: an ARMA noise model ([`noise::ArmaSpec`]) and a power budget
//! form a [`capacity::CapacityQuery`]; [`capacity::lower_bound`] solves the
//! power-constraint polynomial for the dominant real root `a_bar` and returns
//! `log2 |a_bar|` bits. The same root parameterizes an unstable plant whose
//! Kalman loop ([`kalman`]) doubles as the coding system, which [`coder`]
//! simulates and stress-tests instead of taking its claimed properties on
//! faith: Riccati fixed points, the power identity, the rate integral, and
//! closed-loop stability are each checked numerically.

pub mod capacity;
pub mod coder;
pub mod error;
pub mod kalman;
pub mod noise;
pub mod ratpoly;

pub use capacity::{
    achieved_power, bound_polynomial, kim_first_order, lower_bound, rate_integral, CapacityBound,
    CapacityQuery, RateIntegral, Variant,
};
pub use coder::{
    simulate_colored, simulate_whitened, stability_report, SimConfig, SimMode, SimReport,
    StabilityReport, TraceRecord,
};
pub use error::{Error, Result};
pub use kalman::{
    closed_loop_stable, dynamic_gain, loop_filters, riccati_iterate, steady_state_colored,
    steady_state_white, transform_colored, KalmanSteadyState, LoopFilters, PlantSpec, RiccatiTrace,
    Verdict,
};
pub use noise::{autocovariance, validate, ArmaSpec, NoiseTrace};
pub use ratpoly::{
    is_minimum_phase, jensen_log2, mean_log2_modulus, z_roots, Poly, RationalFilter, RootSet,
};
