//! Feedback-capacity lower bound for ARMA colored Gaussian noise channels.
//!
//! The bound is `log2 |a_bar|` where `a_bar` is the real root of largest
//! magnitude of the power-constraint equation
//!
//! ```text
//! (P / sigma^2) (1 - sum f_i a^{-i})^2 = (a^2 - 1) (1 + sum g_j a^{-j})^2,
//! ```
//!
//! cleared of negative powers into the polynomial `Q` of [`bound_polynomial`].
//! `Q(1) < 0` while `Q` grows without bound, so a root above 1 always exists.
//! A negative selected root means the positive magnitude `|a_bar|` solves the
//! sign-flipped form of the equation instead (substitute `a -> -a`), which
//! the bound records as the `Flipped` variant.
//!
//! Identities tied to the constraint equation (achieved power, the rewritten
//! power identity) hold at the signed root and are checked there; the coding
//! loop, its stability, and the rate integral are built at the positive
//! representative, matching the equivalent largest-positive-root formulation
//! of the bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kalman::{
    self, closed_loop_stable, loop_filters, steady_state_colored, PlantSpec, Verdict,
};
use crate::noise::ArmaSpec;
use crate::ratpoly::{jensen_log2, mean_log2_modulus, Poly, DEFAULT_GRID, TOL_INTEGRAL};

/// A capacity question: noise model, power budget, and output gain.
#[derive(Debug, Clone)]
pub struct CapacityQuery {
    pub spec: ArmaSpec,
    pub power: f64,
    pub c: f64,
}

impl CapacityQuery {
    /// Query with the default output gain c = 1.
    pub fn new(spec: ArmaSpec, power: f64) -> Result<Self> {
        Self::with_c(spec, power, 1.0)
    }

    pub fn with_c(spec: ArmaSpec, power: f64, c: f64) -> Result<Self> {
        if !power.is_finite() || power <= 0.0 {
            return Err(Error::InvalidInput(
                "power constraint must be positive".into(),
            ));
        }
        if !c.is_finite() || c == 0.0 {
            return Err(Error::InvalidInput("output gain c must be nonzero".into()));
        }
        Ok(Self { spec, power, c })
    }

    /// Signal-to-noise ratio `P / sigma_hat_sq`.
    pub fn snr(&self) -> f64 {
        self.power / self.spec.sigma_hat_sq()
    }
}

/// Which sign form of the constraint equation the positive representative
/// `|a_bar|` solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Plain,
    Flipped,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::Plain => write!(f, "plain"),
            Variant::Flipped => write!(f, "flipped"),
        }
    }
}

/// Solved lower bound with diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct CapacityBound {
    /// Selected root, sign preserved.
    pub a_bar: f64,
    /// `log2 |a_bar|`.
    pub capacity_bits: f64,
    pub variant: Variant,
    /// Every real root of the bound polynomial, ascending.
    pub all_real_roots: Vec<f64>,
    /// `|Q(a_bar)|` after polishing.
    pub residual: f64,
    /// Stability of the coding loop built at the positive representative.
    pub loop_verdict: Verdict,
}

impl CapacityBound {
    /// Plant at the positive representative `|a_bar|`: the one the coding
    /// loop, stability report, and rate integral are built on.
    pub fn coding_plant(&self, c: f64) -> PlantSpec {
        PlantSpec::new(self.a_bar.abs(), c).expect("|a_bar| > 1 by construction")
    }

    /// Plant at the signed root, where the power identities hold.
    pub fn signed_plant(&self, c: f64) -> PlantSpec {
        PlantSpec::new(self.a_bar, c).expect("|a_bar| > 1 by construction")
    }
}

/// The power-constraint equation cleared of negative powers:
///
/// ```text
/// Q(a) = (a^2 - 1) [z^{m-q}(a^q + sum g_j a^{q-j})]^2
///        - (P/sigma^2) [z^{m-p}(a^p - sum f_i a^{p-i})]^2
/// ```
///
/// with `m = max(p, q, 1)`. Monic of degree `2m + 2`, and `Q(1) < 0` for
/// every valid query.
pub fn bound_polynomial(query: &CapacityQuery) -> Poly {
    let m = kalman::lift_order(&query.spec);
    let ar = kalman::lifted_ar(&query.spec, m);
    let ma = kalman::lifted_ma(&query.spec, m);
    let a2_minus_1 = Poly::new(vec![-1.0, 0.0, 1.0]);
    a2_minus_1
        .mul(&ma.mul(&ma))
        .add(&ar.mul(&ar).scale(-query.snr()))
}

/// Polishes a real root of `q` with a few damped Newton steps.
fn polish_root(q: &Poly, dq: &Poly, mut x: f64) -> f64 {
    for _ in 0..5 {
        let fx = q.eval(x.into()).re;
        let dfx = dq.eval(x.into()).re;
        if dfx == 0.0 {
            break;
        }
        let next = x - fx / dfx;
        if !next.is_finite() || q.eval(next.into()).re.abs() >= fx.abs() {
            break;
        }
        x = next;
    }
    x
}

/// Solves the capacity lower bound.
///
/// Roots of `Q` come from companion-matrix eigenvalues; real roots are kept
/// when `|imag| < 1e-9 (1 + |real|)` and Newton-polished. The selected root
/// maximizes `|a|`; a tie between a positive and a negative root of equal
/// magnitude resolves to the positive one.
pub fn lower_bound(query: &CapacityQuery) -> Result<CapacityBound> {
    let q = bound_polynomial(query);
    let dq = q.derivative();
    let roots = q.roots()?;
    let mut real_roots: Vec<f64> = roots
        .with_multiplicity()
        .iter()
        .filter(|r| r.im.abs() < 1e-9 * (1.0 + r.re.abs()))
        .map(|r| polish_root(&q, &dq, r.re))
        .collect();
    real_roots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let max_mag = real_roots.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    if max_mag <= 1.0 {
        return Err(Error::SolverFailure(format!(
            "no real root of magnitude above 1 (max {max_mag}); the constraint \
             equation guarantees one, so this indicates a numerical bug"
        )));
    }
    let a_bar = real_roots
        .iter()
        .copied()
        .filter(|r| r.abs() >= max_mag * (1.0 - 1e-9))
        .fold(f64::NEG_INFINITY, f64::max);

    let residual = q.eval(a_bar.into()).re.abs();
    let variant = if a_bar > 0.0 {
        Variant::Plain
    } else {
        Variant::Flipped
    };
    let coding_plant = PlantSpec::new(a_bar.abs(), query.c)?;
    let (loop_verdict, _) = closed_loop_stable(&loop_filters(&coding_plant, &query.spec)?);

    Ok(CapacityBound {
        a_bar,
        capacity_bits: a_bar.abs().log2(),
        variant,
        all_real_roots: real_roots,
        residual,
        loop_verdict,
    })
}

/// Left side minus right side of the first-order constraint equation
/// `(a^2 - 1)(1 + g1/a)^2 - snr (1 - f1/a)^2`.
fn first_order_gap(a: f64, snr: f64, f1: f64, g1: f64) -> f64 {
    (a * a - 1.0) * (1.0 + g1 / a).powi(2) - snr * (1.0 - f1 / a).powi(2)
}

/// Unique positive root above 1 of the first-order constraint equation, by
/// bracketed bisection to 1e-12.
fn first_order_root(snr: f64, f1: f64, g1: f64) -> Result<f64> {
    let mut lo = 1.0;
    let mut hi = 1.0 + snr.sqrt() + f1.abs() + g1.abs() + 2.0;
    let mut guard = 0;
    while first_order_gap(hi, snr, f1, g1) <= 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::SolverFailure(
                "no bracket for the first-order capacity equation".into(),
            ));
        }
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if first_order_gap(mid, snr, f1, g1) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Exact feedback capacity in bits for first-order ARMA noise, as two sign
/// cases on `f1 + g1`: the plain equation when `f1 + g1 <= 0`, otherwise the
/// sign-flipped one. Missing coefficients count as zero.
pub fn kim_first_order(query: &CapacityQuery) -> Result<f64> {
    if query.spec.p() > 1 || query.spec.q() > 1 {
        return Err(Error::OutOfScope(format!(
            "first-order formula needs p, q <= 1 (got p = {}, q = {})",
            query.spec.p(),
            query.spec.q()
        )));
    }
    let f1 = query.spec.f().first().copied().unwrap_or(0.0);
    let g1 = query.spec.g().first().copied().unwrap_or(0.0);
    let root = if f1 + g1 <= 0.0 {
        first_order_root(query.snr(), f1, g1)?
    } else {
        first_order_root(query.snr(), -f1, -g1)?
    };
    Ok(root.log2())
}

/// Rate integral of the closed loop built at a plant.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateIntegral {
    /// Quadrature value of the mean log2 modulus of the sensitivity filter.
    pub bits: f64,
    /// `log2 |a|`, the value the integral takes when the loop is stable.
    pub expected_bits: f64,
    /// Set when unstable loop poles pull the integral below `log2 |a|`.
    pub discrepancy: bool,
}

/// Mean log2 modulus over the unit circle of the sensitivity
/// `1 / (1 + L) = z^m (z - a)(1 + sum g_j z^{-j}) / chi(z)`.
///
/// A stable characteristic polynomial makes this exactly `log2 |a|` (Jensen);
/// roots outside the disk subtract their log moduli, which is flagged as a
/// discrepancy. A marginal polynomial leaves the integrand unresolvable.
pub fn rate_integral(plant: &PlantSpec, spec: &ArmaSpec) -> Result<RateIntegral> {
    let lf = loop_filters(plant, spec)?;
    let (verdict, _) = closed_loop_stable(&lf);
    if verdict == Verdict::Marginal {
        return Err(Error::IllConditionedIntegral(
            "characteristic polynomial has a root on the unit circle".into(),
        ));
    }
    let bits = mean_log2_modulus(&lf.l_den_z, &lf.char_poly, DEFAULT_GRID)?;
    let jensen = jensen_log2(&lf.l_den_z)? - jensen_log2(&lf.char_poly)?;
    if (bits - jensen).abs() > TOL_INTEGRAL {
        return Err(Error::SolverFailure(format!(
            "quadrature {bits} disagrees with the Jensen value {jensen}"
        )));
    }
    let expected_bits = plant.a().abs().log2();
    if verdict == Verdict::Stable && (bits - expected_bits).abs() > TOL_INTEGRAL {
        return Err(Error::SolverFailure(format!(
            "stable loop rate integral {bits} should equal log2|a| = {expected_bits}"
        )));
    }
    Ok(RateIntegral {
        bits,
        expected_bits,
        discrepancy: verdict == Verdict::Unstable,
    })
}

/// Stationary channel input power `c^2 P` of the loop at the given plant.
/// At the signed bound root this equals the power constraint.
pub fn achieved_power(plant: &PlantSpec, spec: &ArmaSpec) -> f64 {
    plant.c() * plant.c() * steady_state_colored(plant, spec).p
}
