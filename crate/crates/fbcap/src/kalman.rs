//! Scalar Kalman recursion, its steady state, the colored-noise output
//! transform, and the closed-loop filters of the transformed coding system.
//!
//! The plant is `x[k+1] = a x[k]`, `y[k] = c x[k] + v[k]` with `|a| > 1` and
//! `c != 0`. For white measurement noise the steady state has the closed
//! forms
//!
//! ```text
//! P = (a^2 - 1) sigma^2 / c^2,   K = (a^2 - 1) / (a c),   sigma_e^2 = a^2 sigma^2.
//! ```
//!
//! ARMA colored noise is reduced to the white case by filtering the output
//! with the whitening filter, which replaces `c` by the static gain
//! `c_hat = c (1 - sum f_i a^{-i}) / (1 + sum g_j a^{-j})` and leaves the
//! state untouched. Moving the whitening filter around the loop instead gives
//! the dynamic observer gain `K(z) = F^{-1}(z) K_hat` and a feedback loop
//! whose characteristic polynomial is assembled here symbolically.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::noise::ArmaSpec;
use crate::ratpoly::{Poly, RationalFilter, EPS_CIRCLE};

/// Number of impulse-response coefficients kept for the feedback filter B.
pub const B_IMPULSE_LEN: usize = 32;

/// Unstable scalar plant observed through noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantSpec {
    a: f64,
    c: f64,
}

impl PlantSpec {
    pub fn new(a: f64, c: f64) -> Result<Self> {
        if !a.is_finite() || a.abs() <= 1.0 {
            return Err(Error::InvalidPlant(format!(
                "system coefficient a = {a} must satisfy |a| > 1"
            )));
        }
        if !c.is_finite() || c == 0.0 {
            return Err(Error::InvalidPlant(
                "output coefficient c must be nonzero".into(),
            ));
        }
        Ok(Self { a, c })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

/// Finite-horizon Riccati iterates: error variances and observer gains.
#[derive(Debug, Clone)]
pub struct RiccatiTrace {
    pub p: Vec<f64>,
    pub gain: Vec<f64>,
}

/// Iterates `P[k+1] = a^2 P[k] - a^2 c^2 P[k]^2 / (c^2 P[k] + sigma^2)` from
/// `P[0] = p0`, recording `P[0..=steps]` and the gains
/// `K[k] = a c P[k] / (c^2 P[k] + sigma^2)`.
pub fn riccati_iterate(
    plant: &PlantSpec,
    sigma_v_sq: f64,
    p0: f64,
    steps: usize,
) -> Result<RiccatiTrace> {
    if !sigma_v_sq.is_finite() || sigma_v_sq <= 0.0 {
        return Err(Error::InvalidInput(
            "noise variance must be positive".into(),
        ));
    }
    if !p0.is_finite() || p0 <= 0.0 {
        return Err(Error::InvalidInput(
            "initial error variance must be positive".into(),
        ));
    }
    let (a, c) = (plant.a, plant.c);
    let mut p = Vec::with_capacity(steps + 1);
    let mut gain = Vec::with_capacity(steps + 1);
    let mut pk = p0;
    for _ in 0..=steps {
        p.push(pk);
        gain.push(a * c * pk / (c * c * pk + sigma_v_sq));
        pk = a * a * pk - a * a * c * c * pk * pk / (c * c * pk + sigma_v_sq);
    }
    Ok(RiccatiTrace { p, gain })
}

/// Steady state of the filter: transformed output gain, error variance,
/// static observer gain, and innovation variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KalmanSteadyState {
    pub c_hat: f64,
    pub p: f64,
    pub k_hat: f64,
    pub sigma_e_sq: f64,
}

/// Closed-form steady state for white measurement noise.
pub fn steady_state_white(plant: &PlantSpec, sigma_v_sq: f64) -> Result<KalmanSteadyState> {
    if !sigma_v_sq.is_finite() || sigma_v_sq <= 0.0 {
        return Err(Error::InvalidInput(
            "noise variance must be positive".into(),
        ));
    }
    let (a, c) = (plant.a, plant.c);
    Ok(KalmanSteadyState {
        c_hat: c,
        p: (a * a - 1.0) * sigma_v_sq / (c * c),
        k_hat: (a * a - 1.0) / (a * c),
        sigma_e_sq: a * a * sigma_v_sq,
    })
}

/// Static output gain of the whitened system:
/// `c_hat = c (1 - sum f_i a^{-i}) / (1 + sum g_j a^{-j})`.
///
/// Nonzero for every valid plant/spec pair: `a` lies outside the unit disk
/// where neither ARMA polynomial vanishes.
pub fn transform_colored(plant: &PlantSpec, spec: &ArmaSpec) -> f64 {
    let a = Complex64::new(plant.a, 0.0);
    let ar = spec.ar_poly().eval_delay(a).re;
    let ma = spec.ma_poly().eval_delay(a).re;
    debug_assert!(
        ma != 0.0,
        "MA polynomial cannot vanish outside the unit disk"
    );
    plant.c * ar / ma
}

/// Steady state of the whitened colored-noise filter.
pub fn steady_state_colored(plant: &PlantSpec, spec: &ArmaSpec) -> KalmanSteadyState {
    let a = plant.a;
    let c_hat = transform_colored(plant, spec);
    let sigma = spec.sigma_hat_sq();
    KalmanSteadyState {
        c_hat,
        p: (a * a - 1.0) * sigma / (c_hat * c_hat),
        k_hat: (a * a - 1.0) / (a * c_hat),
        sigma_e_sq: a * a * sigma,
    }
}

/// Dynamic observer gain `K(z) = K_hat (1 - sum f_i z^{-i}) / (1 + sum g_j z^{-j})`.
pub fn dynamic_gain(plant: &PlantSpec, spec: &ArmaSpec) -> Result<RationalFilter> {
    let ss = steady_state_colored(plant, spec);
    RationalFilter::new(spec.ar_poly().scale(ss.k_hat), spec.ma_poly())
}

/// Loop filters of the transformed coding system.
#[derive(Debug, Clone)]
pub struct LoopFilters {
    /// Dynamic observer gain K(z), delay view.
    pub k_dyn: RationalFilter,
    /// Open-loop transfer L(z) = c (z - a)^{-1} K(z), numerator in powers of z.
    pub l_num_z: Poly,
    /// Denominator of L(z) in powers of z.
    pub l_den_z: Poly,
    /// Closed-loop noise-to-input filter B(z) = -L / (1 + L), delay view.
    pub b: RationalFilter,
    /// Monic closed-loop characteristic polynomial in powers of z.
    pub char_poly: Poly,
    /// Leading impulse-response coefficients of B; index 0 is always 0.
    pub b_impulse: Vec<f64>,
}

/// Degree of the common lift: at least 1 so the white-noise case keeps the
/// delay pole of the loop explicit.
pub(crate) fn lift_order(spec: &ArmaSpec) -> usize {
    spec.p().max(spec.q()).max(1)
}

/// `z^{m-p} (z^p - sum f_i z^{p-i})` as an ascending coefficient list.
pub(crate) fn lifted_ar(spec: &ArmaSpec, m: usize) -> Poly {
    let mut coeffs = vec![0.0; m + 1];
    coeffs[m] = 1.0;
    for (i, &fi) in spec.f().iter().enumerate() {
        coeffs[m - (i + 1)] = -fi;
    }
    Poly::new(coeffs)
}

/// `z^{m-q} (z^q + sum g_j z^{q-j})` as an ascending coefficient list.
pub(crate) fn lifted_ma(spec: &ArmaSpec, m: usize) -> Poly {
    let mut coeffs = vec![0.0; m + 1];
    coeffs[m] = 1.0;
    for (j, &gj) in spec.g().iter().enumerate() {
        coeffs[m - (j + 1)] = gj;
    }
    Poly::new(coeffs)
}

/// Builds K(z), L(z), B(z), and the closed-loop characteristic polynomial
/// `chi(z) = z^m [(z - a)(1 + sum g_j z^{-j}) + c K_hat (1 - sum f_i z^{-i})]`
/// by polynomial convolution.
pub fn loop_filters(plant: &PlantSpec, spec: &ArmaSpec) -> Result<LoopFilters> {
    let ss = steady_state_colored(plant, spec);
    let m = lift_order(spec);
    let k_dyn = dynamic_gain(plant, spec)?;

    let l_num_z = lifted_ar(spec, m).scale(plant.c * ss.k_hat);
    let l_den_z = Poly::new(vec![-plant.a, 1.0]).mul(&lifted_ma(spec, m));
    let char_poly = l_den_z.add(&l_num_z);
    debug_assert_eq!(char_poly.degree(), m + 1);
    debug_assert!((char_poly.leading() - 1.0).abs() < 1e-12);

    // B = -l_num / chi; both sides are converted to the delay view by
    // dividing through z^{m+1}, which shifts the numerator one delay down.
    let mut b_num = vec![0.0; m + 2];
    for k in 0..=m {
        b_num[m + 1 - k] = -l_num_z.coeff(k);
    }
    let mut b_den = vec![0.0; m + 2];
    for k in 0..=m + 1 {
        b_den[m + 1 - k] = char_poly.coeff(k);
    }
    let b = RationalFilter::new(Poly::new(b_num), Poly::new(b_den))?;
    let b_impulse = b.series_expand(B_IMPULSE_LEN - 1);
    debug_assert_eq!(b_impulse[0], 0.0);

    Ok(LoopFilters {
        k_dyn,
        l_num_z,
        l_den_z,
        b,
        char_poly,
        b_impulse,
    })
}

/// Stability classification of the closed loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Marginal,
    Unstable,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Stable => "stable",
            Verdict::Marginal => "marginal",
            Verdict::Unstable => "unstable",
        };
        write!(f, "{s}")
    }
}

/// Classifies the loop by the largest characteristic root modulus: strictly
/// inside the unit circle is stable, within [`EPS_CIRCLE`] of it marginal,
/// outside unstable. Returns the poles with multiplicity.
pub fn closed_loop_stable(lf: &LoopFilters) -> (Verdict, Vec<Complex64>) {
    let roots = lf
        .char_poly
        .roots()
        .expect("characteristic polynomial is monic, never zero");
    let poles = roots.with_multiplicity();
    let max_mod = roots.max_modulus();
    let verdict = if max_mod < 1.0 - EPS_CIRCLE {
        Verdict::Stable
    } else if max_mod <= 1.0 + EPS_CIRCLE {
        Verdict::Marginal
    } else {
        Verdict::Unstable
    };
    (verdict, poles)
}
