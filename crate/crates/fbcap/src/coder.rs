//! Time-domain simulation of the two closed loops: the whitened steady-state
//! Kalman loop and the transformed coding loop, with divergence detection,
//! moment estimation, and whiteness testing.
//!
//! Whitened loop, driven by the white sequence:
//!
//! ```text
//! y~[k] = c_hat x~[k]        e[k] = -y~[k] + vh[k]
//! u[k]  = K_hat e[k]         x~[k+1] = a x~[k] + u[k]
//! ```
//!
//! Coding loop, driven by the colored sequence:
//!
//! ```text
//! y'[k] = c x~[k]            e'[k] = -y'[k] + v[k]
//! u[k]  = K_hat (e'[k] - sum f_i e'[k-i]) - sum g_j u[k-j]
//! x~[k+1] = a x~[k] + u[k]
//! ```
//!
//! Quantities are computed in exactly this order within a step. Everything
//! starts from zero history; the first `burn_in` samples are excluded from
//! the reported moments. Whiteness is tested on the innovation directly in
//! the whitened loop, and on the whitened `e'` stream in the coding loop.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kalman::{closed_loop_stable, loop_filters, steady_state_colored, PlantSpec, Verdict};
use crate::noise::{autocovariance, ArmaSpec};
use crate::ratpoly::DEFAULT_GRID;

/// Default blow-up threshold on the state magnitude.
pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Lags inspected by the whiteness statistic.
pub const WHITENESS_LAGS: usize = 20;

/// Simulation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_samples: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub divergence_threshold: f64,
}

impl SimConfig {
    pub fn new(n_samples: usize, burn_in: usize, seed: u64) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::InvalidInput("n_samples must be at least 1".into()));
        }
        Ok(Self {
            n_samples,
            burn_in,
            seed,
            divergence_threshold: DEFAULT_DIVERGENCE_THRESHOLD,
        })
    }

    pub fn with_divergence_threshold(mut self, threshold: f64) -> Self {
        self.divergence_threshold = threshold;
        self
    }
}

/// Which loop a report came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    Whitened,
    Colored,
}

impl std::fmt::Display for SimMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SimMode::Whitened => write!(f, "whitened"),
            SimMode::Colored => write!(f, "colored"),
        }
    }
}

/// Measured moments and health of a closed-loop run. Moment fields are None
/// when the run diverged before producing usable samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub mode: SimMode,
    /// Sample variance of the channel input (the loop output signal).
    pub input_power: Option<f64>,
    /// Sample variance of the designated innovation signal.
    pub innovation_variance: Option<f64>,
    /// Largest |normalized autocorrelation| of the innovation over lags 1..=20.
    pub whiteness_max_corr: Option<f64>,
    pub diverged: bool,
    /// Step at which the state magnitude first crossed the threshold.
    pub diverged_at: Option<usize>,
    /// Frequency-domain prediction of the input power; None when the loop is
    /// not strictly stable.
    pub predicted_input_power: Option<f64>,
    pub samples_used: usize,
}

/// One simulation step, streamed to the optional trace sink.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub x_tilde: f64,
    pub y_prime: f64,
    pub e_prime: f64,
    pub u: f64,
    pub v: f64,
}

/// Runs the whitened loop. The closed-loop pole is 1/a, so the run cannot
/// diverge unless the implementation is broken; the threshold is still
/// checked and reported rather than trusted.
pub fn simulate_whitened(plant: &PlantSpec, spec: &ArmaSpec, cfg: &SimConfig) -> Result<SimReport> {
    simulate_whitened_traced(plant, spec, cfg, |_| {})
}

pub fn simulate_whitened_traced(
    plant: &PlantSpec,
    spec: &ArmaSpec,
    cfg: &SimConfig,
    mut sink: impl FnMut(TraceRecord),
) -> Result<SimReport> {
    let ss = steady_state_colored(plant, spec);
    let total = cfg.burn_in + cfg.n_samples;
    let trace = spec.generate(total, 0, cfg.seed)?;
    let a = plant.a();

    let mut ys = Vec::with_capacity(total);
    let mut es = Vec::with_capacity(total);
    let mut x = 0.0_f64;
    let mut diverged_at = None;
    for k in 0..total {
        let y = ss.c_hat * x;
        let e = trace.v_hat[k] - y;
        let u = ss.k_hat * e;
        sink(TraceRecord {
            k,
            x_tilde: x,
            y_prime: y,
            e_prime: e,
            u,
            v: trace.v_hat[k],
        });
        ys.push(y);
        es.push(e);
        x = a * x + u;
        if !x.is_finite() || x.abs() > cfg.divergence_threshold {
            diverged_at = Some(k + 1);
            break;
        }
    }

    let predicted = (a * a - 1.0) * spec.sigma_hat_sq();
    finalize(
        SimMode::Whitened,
        &ys,
        &es,
        cfg,
        Some(predicted),
        diverged_at,
    )
}

/// Runs the transformed coding loop on colored noise.
pub fn simulate_colored(plant: &PlantSpec, spec: &ArmaSpec, cfg: &SimConfig) -> Result<SimReport> {
    simulate_colored_traced(plant, spec, cfg, |_| {})
}

pub fn simulate_colored_traced(
    plant: &PlantSpec,
    spec: &ArmaSpec,
    cfg: &SimConfig,
    mut sink: impl FnMut(TraceRecord),
) -> Result<SimReport> {
    let ss = steady_state_colored(plant, spec);
    let lf = loop_filters(plant, spec)?;
    let (verdict, _) = closed_loop_stable(&lf);
    let total = cfg.burn_in + cfg.n_samples;
    let trace = spec.generate(total, 0, cfg.seed)?;
    let (a, c) = (plant.a(), plant.c());
    let f = spec.f();
    let g = spec.g();

    let mut ys = Vec::with_capacity(total);
    let mut es = Vec::with_capacity(total);
    // Most recent past values first: prev_e[0] = e'[k-1], prev_u[0] = u[k-1].
    let mut prev_e = vec![0.0_f64; f.len()];
    let mut prev_u = vec![0.0_f64; g.len()];
    let mut x = 0.0_f64;
    let mut diverged_at = None;
    for k in 0..total {
        let y = c * x;
        let e = trace.v[k] - y;
        let mut corrected = e;
        for (i, &fi) in f.iter().enumerate() {
            corrected -= fi * prev_e[i];
        }
        let mut u = ss.k_hat * corrected;
        for (j, &gj) in g.iter().enumerate() {
            u -= gj * prev_u[j];
        }
        sink(TraceRecord {
            k,
            x_tilde: x,
            y_prime: y,
            e_prime: e,
            u,
            v: trace.v[k],
        });
        ys.push(y);
        es.push(e);
        if !prev_e.is_empty() {
            prev_e.rotate_right(1);
            prev_e[0] = e;
        }
        if !prev_u.is_empty() {
            prev_u.rotate_right(1);
            prev_u[0] = u;
        }
        x = a * x + u;
        if !x.is_finite() || x.abs() > cfg.divergence_threshold {
            diverged_at = Some(k + 1);
            break;
        }
    }

    let predicted = if verdict == Verdict::Stable {
        Some(predicted_colored_input_power(&lf.b, spec)?)
    } else {
        None
    };
    let innovations = spec.whiten_stream(&es);
    finalize(
        SimMode::Colored,
        &ys,
        &innovations,
        cfg,
        predicted,
        diverged_at,
    )
}

/// Stationary input power of the stable coding loop from the spectrum:
/// `sigma_hat_sq` times the mean of `|B F|^2` over the unit circle.
fn predicted_colored_input_power(
    b: &crate::ratpoly::RationalFilter,
    spec: &ArmaSpec,
) -> Result<f64> {
    let shaping = spec.shaping_filter();
    let mut sum = 0.0;
    for i in 0..DEFAULT_GRID {
        let w =
            std::f64::consts::TAU * (i as f64 + 0.5) / DEFAULT_GRID as f64 - std::f64::consts::PI;
        let z = Complex64::from_polar(1.0, w);
        let gain = b.eval_at(z)? * shaping.eval_at(z)?;
        sum += gain.norm_sqr();
    }
    Ok(spec.sigma_hat_sq() * sum / DEFAULT_GRID as f64)
}

fn finalize(
    mode: SimMode,
    ys: &[f64],
    innovations: &[f64],
    cfg: &SimConfig,
    predicted_input_power: Option<f64>,
    diverged_at: Option<usize>,
) -> Result<SimReport> {
    let diverged = diverged_at.is_some();
    let steady_ys = ys.get(cfg.burn_in..).unwrap_or(&[]);
    let steady_innov = innovations.get(cfg.burn_in..).unwrap_or(&[]);
    let moments_ok = !diverged && !steady_ys.is_empty();
    let variance = |x: &[f64]| -> Result<f64> { Ok(autocovariance(x, 0)?[0]) };
    Ok(SimReport {
        mode,
        input_power: if moments_ok {
            Some(variance(steady_ys)?)
        } else {
            None
        },
        innovation_variance: if moments_ok {
            Some(variance(steady_innov)?)
        } else {
            None
        },
        whiteness_max_corr: if moments_ok && steady_innov.len() > WHITENESS_LAGS {
            Some(crate::noise::max_abs_autocorrelation(
                steady_innov,
                WHITENESS_LAGS,
            )?)
        } else {
            None
        },
        diverged,
        diverged_at,
        predicted_input_power,
        samples_used: if diverged { ys.len() } else { cfg.n_samples },
    })
}

/// Bundled stability verdict for the coding loop at a plant: the instrument
/// for checking the blanket stability claim case by case.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub verdict: Verdict,
    /// Characteristic roots of the coding loop, with multiplicity.
    pub chi_poles: Vec<Complex64>,
    /// Pole of the whitened loop, always 1/a.
    pub whitened_pole: f64,
    /// True iff the coding loop is strictly stable, as the equivalence
    /// argument asserts it should always be.
    pub equivalence_consistent: bool,
}

pub fn stability_report(plant: &PlantSpec, spec: &ArmaSpec) -> Result<StabilityReport> {
    let lf = loop_filters(plant, spec)?;
    let (verdict, chi_poles) = closed_loop_stable(&lf);
    Ok(StabilityReport {
        verdict,
        chi_poles,
        whitened_pole: 1.0 / plant.a(),
        equivalence_consistent: verdict == Verdict::Stable,
    })
}
