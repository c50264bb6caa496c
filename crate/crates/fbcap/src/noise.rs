//! ARMA(p, q) colored Gaussian noise: validation, shaping/whitening filters,
//! seeded sample generation, and whitening of observed streams.
//!
//! The model is
//!
//! ```text
//! v[k] = sum_i f[i] v[k-i] + vh[k] + sum_j g[j] vh[k-j]
//! ```
//!
//! with `vh` white Gaussian of variance `sigma_hat_sq`. Both the AR
//! polynomial `1 - sum f_i z^{-i}` and the MA polynomial `1 + sum g_j z^{-j}`
//! must be minimum-phase, so the shaping filter and its inverse are stable
//! and causal.
//!
//! Randomness is ChaCha12 keyed by the caller's seed, mapped to Gaussians by
//! the Box-Muller transform; identical (spec, n, burn_in, seed) inputs
//! reproduce traces bit-exactly on the same build.

use num_complex::Complex64;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::ratpoly::{z_roots, Poly, RationalFilter, EPS_CIRCLE};

/// ARMA(p, q) colored-noise model. Only valid specs can be constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmaSpec {
    f: Vec<f64>,
    g: Vec<f64>,
    sigma_hat_sq: f64,
}

/// Checks candidate ARMA parameters and names every violation found.
///
/// An empty list means the parameters form a valid spec.
pub fn validate(f: &[f64], g: &[f64], sigma_hat_sq: f64) -> Vec<String> {
    let mut violations = Vec::new();
    for (name, coeffs) in [("f", f), ("g", g)] {
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_finite() {
                violations.push(format!("{name}[{i}] must be finite"));
            }
        }
    }
    if !violations.is_empty() {
        return violations;
    }
    for (side, poly) in [("AR", ar_poly(f)), ("MA", ma_poly(g))] {
        match z_roots(&poly) {
            Ok(roots) => {
                for (r, _) in roots.roots() {
                    if r.norm() >= 1.0 - EPS_CIRCLE {
                        violations.push(format!("{side} root {} outside unit disk", fmt_root(*r)));
                    }
                }
            }
            Err(e) => violations.push(format!("{side} polynomial: {e}")),
        }
    }
    if !sigma_hat_sq.is_finite() || sigma_hat_sq <= 0.0 {
        violations.push("sigma_hat_sq must be positive".into());
    }
    violations
}

fn fmt_root(r: Complex64) -> String {
    if r.im == 0.0 {
        format!("{}", r.re)
    } else if r.im > 0.0 {
        format!("{}+{}i", r.re, r.im)
    } else {
        format!("{}{}i", r.re, r.im)
    }
}

fn ar_poly(f: &[f64]) -> Poly {
    let mut coeffs = vec![1.0];
    coeffs.extend(f.iter().map(|c| -c));
    Poly::new(coeffs)
}

fn ma_poly(g: &[f64]) -> Poly {
    let mut coeffs = vec![1.0];
    coeffs.extend_from_slice(g);
    Poly::new(coeffs)
}

impl ArmaSpec {
    /// Builds a validated spec; the error lists every violation.
    pub fn new(f: Vec<f64>, g: Vec<f64>, sigma_hat_sq: f64) -> Result<Self> {
        let violations = validate(&f, &g, sigma_hat_sq);
        if violations.is_empty() {
            Ok(Self { f, g, sigma_hat_sq })
        } else {
            Err(Error::InvalidSpec(violations))
        }
    }

    /// White noise of the given variance (p = q = 0).
    pub fn white(sigma_hat_sq: f64) -> Result<Self> {
        Self::new(Vec::new(), Vec::new(), sigma_hat_sq)
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn sigma_hat_sq(&self) -> f64 {
        self.sigma_hat_sq
    }

    pub fn p(&self) -> usize {
        self.f.len()
    }

    pub fn q(&self) -> usize {
        self.g.len()
    }

    /// AR polynomial `1 - sum f_i z^{-i}` in the delay view.
    pub fn ar_poly(&self) -> Poly {
        ar_poly(&self.f)
    }

    /// MA polynomial `1 + sum g_j z^{-j}` in the delay view.
    pub fn ma_poly(&self) -> Poly {
        ma_poly(&self.g)
    }

    /// Shaping filter F mapping the driving white noise to the colored noise:
    /// numerator the MA polynomial, denominator the AR polynomial.
    pub fn shaping_filter(&self) -> RationalFilter {
        RationalFilter::new(self.ma_poly(), self.ar_poly())
            .expect("valid spec yields a causal shaping filter")
    }

    /// Whitening filter, the reciprocal of the shaping filter.
    pub fn whitening_filter(&self) -> RationalFilter {
        RationalFilter::new(self.ar_poly(), self.ma_poly())
            .expect("valid spec yields a causal whitening filter")
    }

    /// Largest z-root modulus over both polynomials (0 for white noise).
    pub fn max_root_modulus(&self) -> f64 {
        let ar = z_roots(&self.ar_poly())
            .map(|r| r.max_modulus())
            .unwrap_or(0.0);
        let ma = z_roots(&self.ma_poly())
            .map(|r| r.max_modulus())
            .unwrap_or(0.0);
        ar.max(ma)
    }

    /// Default burn-in: `10 (p + q + 1) ceil(1 / (1 - r_max))` samples, enough
    /// for the recursion transient to decay to working precision.
    pub fn default_burn_in(&self) -> usize {
        let r_max = self.max_root_modulus();
        let stretch = (1.0 / (1.0 - r_max)).ceil() as usize;
        10 * (self.p() + self.q() + 1) * stretch
    }

    /// Generates a colored trace of length `n` after discarding `burn_in`
    /// leading samples. The recursion starts from zero history.
    pub fn generate(&self, n: usize, burn_in: usize, seed: u64) -> Result<NoiseTrace> {
        if n == 0 {
            return Err(Error::InvalidInput(
                "trace length must be at least 1".into(),
            ));
        }
        let total = n + burn_in;
        let mut gauss = SeededGaussian::new(seed);
        let sigma = self.sigma_hat_sq.sqrt();
        let mut v_hat = Vec::with_capacity(total);
        let mut v = Vec::with_capacity(total);
        for k in 0..total {
            let vh = sigma * gauss.sample();
            let mut x = vh;
            for (i, &fi) in self.f.iter().enumerate() {
                if k > i {
                    x += fi * v[k - i - 1];
                }
            }
            for (j, &gj) in self.g.iter().enumerate() {
                if k > j {
                    x += gj * v_hat[k - j - 1];
                }
            }
            v_hat.push(vh);
            v.push(x);
        }
        Ok(NoiseTrace {
            v: v.split_off(burn_in),
            v_hat: v_hat.split_off(burn_in),
            seed,
        })
    }

    /// Applies the whitening recursion to an observed stream, zero initial
    /// conditions: `out[k] = -sum_j g_j out[k-j] + v[k] - sum_i f_i v[k-i]`.
    pub fn whiten_stream(&self, v: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(v.len());
        for k in 0..v.len() {
            let mut x = v[k];
            for (i, &fi) in self.f.iter().enumerate() {
                if k > i {
                    x -= fi * v[k - i - 1];
                }
            }
            for (j, &gj) in self.g.iter().enumerate() {
                if k > j {
                    x -= gj * out[k - j - 1];
                }
            }
            out.push(x);
        }
        out
    }
}

/// A generated noise trace together with the white sequence that drove it.
#[derive(Debug, Clone)]
pub struct NoiseTrace {
    pub v: Vec<f64>,
    pub v_hat: Vec<f64>,
    pub seed: u64,
}

/// Biased sample autocovariances `gamma(0..=max_lag)` with the 1/N
/// normalization (positive semidefinite estimates).
pub fn autocovariance(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::InvalidInput(
            "autocovariance of an empty sequence".into(),
        ));
    }
    if x.len() <= max_lag {
        return Err(Error::InvalidInput(format!(
            "sequence length {} must exceed max_lag {}",
            x.len(),
            max_lag
        )));
    }
    let n = x.len() as f64;
    Ok((0..=max_lag)
        .map(|l| x.iter().zip(&x[l..]).map(|(a, b)| a * b).sum::<f64>() / n)
        .collect())
}

/// Largest `|gamma(l)/gamma(0)|` over lags `1..=max_lag`; 0 for a flat signal.
pub fn max_abs_autocorrelation(x: &[f64], max_lag: usize) -> Result<f64> {
    let gamma = autocovariance(x, max_lag)?;
    if gamma[0] == 0.0 {
        return Ok(0.0);
    }
    Ok(gamma[1..]
        .iter()
        .fold(0.0_f64, |m, g| m.max((g / gamma[0]).abs())))
}

/// Standard-normal stream: ChaCha12 keyed by the seed, Box-Muller transform.
///
/// Uniforms are taken as `((u64 >> 11) + 0.5) * 2^-53`, strictly inside
/// (0, 1), so the logarithm never sees zero.
pub struct SeededGaussian {
    rng: ChaCha12Rng,
    spare: Option<f64>,
}

impl SeededGaussian {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha12Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn next_unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(x) = self.spare.take() {
            return x;
        }
        let u1 = self.next_unit();
        let u2 = self.next_unit();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn validate_examples() {
        assert!(validate(&[0.5], &[], 1.0).is_empty());

        let violations = validate(&[], &[1.5], 1.0);
        assert_eq!(
            violations,
            vec!["MA root -1.5 outside unit disk".to_string()]
        );

        let violations = validate(&[0.5], &[-0.5], 0.0);
        assert_eq!(
            violations,
            vec!["sigma_hat_sq must be positive".to_string()]
        );
    }

    #[test]
    fn validate_rejects_ar_root_on_circle() {
        let violations = validate(&[1.0], &[], 1.0);
        assert_eq!(violations, vec!["AR root 1 outside unit disk".to_string()]);
    }

    #[test]
    fn shaping_filter_examples() {
        let white = ArmaSpec::white(1.0).unwrap();
        assert_eq!(white.shaping_filter(), RationalFilter::identity());

        let ar1 = ArmaSpec::new(vec![0.5], vec![], 1.0).unwrap();
        let f = ar1.shaping_filter();
        assert_eq!(f.num().coeffs(), &[1.0]);
        assert_eq!(f.den().coeffs(), &[1.0, -0.5]);

        let arma = ArmaSpec::new(vec![0.5], vec![0.25], 1.0).unwrap();
        let f = arma.shaping_filter();
        assert_eq!(f.num().coeffs(), &[1.0, 0.25]);
        assert_eq!(f.den().coeffs(), &[1.0, -0.5]);
    }

    #[test]
    fn whitening_filter_series() {
        let ar1 = ArmaSpec::new(vec![0.5], vec![], 1.0).unwrap();
        let w = ar1.whitening_filter();
        assert_eq!(w.series_expand(3), vec![1.0, -0.5, 0.0, 0.0]);

        // h coefficients of 1 - sum h_i z^{-i}: h1 = 0.5, h2 = -0.25, h3 = 0.125.
        let ma1 = ArmaSpec::new(vec![], vec![0.5], 1.0).unwrap();
        let series = ma1.whitening_filter().series_expand(3);
        let h: Vec<f64> = series[1..].iter().map(|s| -s).collect();
        assert_abs_diff_eq!(h[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(h[1], -0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(h[2], 0.125, epsilon = 1e-14);

        let white = ArmaSpec::white(2.0).unwrap();
        assert_eq!(
            white.whitening_filter().series_expand(3),
            vec![1.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn shared_root_filters_reduce_to_identity() {
        let spec = ArmaSpec::new(vec![0.5], vec![-0.5], 1.0).unwrap();
        assert_eq!(
            spec.shaping_filter().series_expand(4),
            vec![1.0, 0.0, 0.0, 0.0, 0.0]
        );
        let t = spec.generate(200, 0, 9).unwrap();
        for (a, b) in t.v.iter().zip(&t.v_hat) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = ArmaSpec::new(vec![0.4, -0.1], vec![0.3], 1.7).unwrap();
        let t1 = spec.generate(500, 25, 42).unwrap();
        let t2 = spec.generate(500, 25, 42).unwrap();
        assert_eq!(t1.v, t2.v);
        assert_eq!(t1.v_hat, t2.v_hat);
        let t3 = spec.generate(500, 25, 43).unwrap();
        assert_ne!(t1.v, t3.v);
    }

    #[test]
    fn white_generation_passes_through() {
        let spec = ArmaSpec::white(1.0).unwrap();
        let t = spec.generate(100, 10, 7).unwrap();
        assert_eq!(t.v, t.v_hat);
    }

    #[test]
    fn ar1_lag_one_autocorrelation() {
        let spec = ArmaSpec::new(vec![0.9], vec![], 1.0).unwrap();
        let t = spec
            .generate(1_000_000, spec.default_burn_in(), 11)
            .unwrap();
        let gamma = autocovariance(&t.v, 1).unwrap();
        assert_abs_diff_eq!(gamma[1] / gamma[0], 0.9, epsilon = 0.01);
    }

    #[test]
    fn whiten_stream_identity_for_white() {
        let spec = ArmaSpec::white(1.0).unwrap();
        let v = vec![0.3, -1.2, 0.8, 2.5];
        assert_eq!(spec.whiten_stream(&v), v);
    }

    #[test]
    fn whiten_stream_hand_convolution() {
        let spec = ArmaSpec::new(vec![], vec![0.5], 1.0).unwrap();
        let v = vec![1.0, 0.5, 0.0, 0.0, 0.0];
        let out = spec.whiten_stream(&v);
        assert_abs_diff_eq!(out[0], 1.0, epsilon = 1e-15);
        for x in &out[1..] {
            assert_abs_diff_eq!(*x, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn whiten_recovers_driver() {
        let spec = ArmaSpec::new(vec![0.6, -0.3], vec![0.4, 0.2], 2.0).unwrap();
        let t = spec.generate(4000, 0, 3).unwrap();
        let recovered = spec.whiten_stream(&t.v);
        for (a, b) in recovered.iter().zip(&t.v_hat) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-9);
        }
    }

    #[test]
    fn autocovariance_examples() {
        let zeros = vec![0.0; 16];
        assert_eq!(autocovariance(&zeros, 3).unwrap(), vec![0.0; 4]);

        let ones = vec![1.0, 1.0, 1.0, 1.0];
        let gamma = autocovariance(&ones, 1).unwrap();
        assert_abs_diff_eq!(gamma[1], 0.75, epsilon = 1e-15);

        assert!(matches!(
            autocovariance(&[], 0),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            autocovariance(&[1.0, 2.0], 5),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn iid_trace_is_white() {
        let spec = ArmaSpec::white(1.0).unwrap();
        let t = spec.generate(1_000_000, 0, 5).unwrap();
        let bound = 4.0 / (t.v.len() as f64).sqrt();
        assert!(max_abs_autocorrelation(&t.v, 20).unwrap() < bound);
    }

    #[test]
    fn default_burn_in_white() {
        assert_eq!(ArmaSpec::white(1.0).unwrap().default_burn_in(), 10);
    }
}
