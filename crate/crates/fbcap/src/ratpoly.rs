//! Polynomial and rational-transfer-function algebra in the unit-delay operator.
//!
//! A [`Poly`] is a dense coefficient list. The same representation serves two
//! views, distinguished by the operation applied to it:
//!
//! * delay view: `coeffs[k]` multiplies `z^{-k}` (filters, impulse responses);
//! * plain view: `coeffs[k]` multiplies `z^k` (characteristic polynomials,
//!   Jensen integrands).
//!
//! [`z_roots`] bridges the two: it lifts a delay-view polynomial of degree `d`
//! to `z^d p(z^{-1})` and returns the roots of that polynomial in the z-plane.
//!
//! Root finding goes through the companion matrix of the monic polynomial and
//! its eigenvalues; the degrees in this crate are small, so no balancing or
//! deflation heuristics are needed beyond what the eigensolver provides.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Strict-inside margin for unit-circle classifications. Roots within this
/// distance of the circle count as marginal.
pub const EPS_CIRCLE: f64 = 1e-9;

/// Relative tolerance under which two roots are considered equal.
pub const ROOT_DEDUP_TOL: f64 = 1e-8;

/// Default number of frequency points for unit-circle quadrature.
pub const DEFAULT_GRID: usize = 1 << 15;

/// Acceptable disagreement between quadrature and closed-form log integrals.
pub const TOL_INTEGRAL: f64 = 1e-6;

/// Dense real polynomial, ascending coefficient order.
///
/// Trailing zero coefficients are normalized away; the zero polynomial is the
/// single coefficient `0`. All coefficients are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    /// Builds a polynomial from coefficients, trimming trailing zeros.
    ///
    /// Panics on non-finite coefficients; callers validate external input
    /// before constructing polynomials.
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        assert!(
            coeffs.iter().all(|c| c.is_finite()),
            "polynomial coefficients must be finite"
        );
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1.0] }
    }

    pub fn constant(x: f64) -> Self {
        Self::new(vec![x])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Index of the last nonzero coefficient (0 for constants and zero).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs == [0.0]
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn constant_term(&self) -> f64 {
        self.coeffs[0]
    }

    /// Coefficient of the k-th power, 0 beyond the stored degree.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Horner evaluation treating `coeffs[k]` as the `z^k` coefficient.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Evaluation of the delay view `p(z^{-1})` at a point of the z-plane.
    pub fn eval_delay(&self, z: Complex64) -> Complex64 {
        self.eval(z.inv())
    }

    /// Derivative in the plain view.
    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() == 1 {
            return Poly::zero();
        }
        let coeffs: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        Poly::new(coeffs)
    }

    /// Polynomial product by convolution.
    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs: Vec<f64> = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        Poly::new(coeffs)
    }

    pub fn scale(&self, k: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * k).collect::<Vec<_>>())
    }

    /// The reversed coefficient list `z^d p(z^{-1})`, i.e. the degree lift of
    /// the delay view into the plain view.
    pub fn reversed(&self) -> Poly {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Poly::new(coeffs)
    }

    /// Largest absolute coefficient; scale reference for residual tests.
    pub fn coeff_scale(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Roots of the plain view, via companion-matrix eigenvalues.
    ///
    /// Complex roots are symmetrized into exact conjugate pairs and near-equal
    /// roots are merged into multiplicities; the result is sorted by
    /// (modulus, argument).
    pub fn roots(&self) -> Result<RootSet> {
        if self.is_zero() {
            return Err(Error::InvalidInput(
                "cannot compute roots of the zero polynomial".into(),
            ));
        }
        let d = self.degree();
        if d == 0 {
            return Ok(RootSet { roots: Vec::new() });
        }
        let lead = self.leading();
        let mut companion = DMatrix::<f64>::zeros(d, d);
        for i in 1..d {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..d {
            companion[(i, d - 1)] = -self.coeffs[i] / lead;
        }
        let eigs = companion.complex_eigenvalues();
        let raw: Vec<Complex64> = eigs.iter().map(|e| Complex64::new(e.re, e.im)).collect();
        Ok(RootSet::from_raw(raw))
    }
}

impl std::fmt::Display for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| format!("{c}*x^{k}"))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Roots of a lifted polynomial in the z-plane, with multiplicities.
#[derive(Debug, Clone)]
pub struct RootSet {
    roots: Vec<(Complex64, usize)>,
}

impl RootSet {
    fn from_raw(mut raw: Vec<Complex64>) -> Self {
        // Pair conjugates: each root with positive imaginary part is matched
        // to the nearest one with negative imaginary part and both are
        // replaced by the symmetrized pair. Unmatched near-real roots are
        // snapped onto the real axis.
        let mut used = vec![false; raw.len()];
        for i in 0..raw.len() {
            if used[i] || raw[i].im <= 0.0 {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for (j, r) in raw.iter().enumerate() {
                if j == i || used[j] || r.im >= 0.0 {
                    continue;
                }
                let dist = (raw[i] - r.conj()).norm();
                if best.is_none_or(|(_, b)| dist < b) {
                    best = Some((j, dist));
                }
            }
            if let Some((j, dist)) = best {
                let scale = 1.0 + raw[i].norm();
                if dist <= 1e-6 * scale {
                    let sym = (raw[i] + raw[j].conj()) * 0.5;
                    raw[i] = sym;
                    raw[j] = sym.conj();
                    used[i] = true;
                    used[j] = true;
                }
            }
        }
        for r in raw.iter_mut() {
            if r.im != 0.0 && r.im.abs() <= 1e-12 * (1.0 + r.re.abs()) {
                r.im = 0.0;
            }
        }
        raw.sort_by(|a, b| {
            (a.norm(), a.arg())
                .partial_cmp(&(b.norm(), b.arg()))
                .unwrap()
        });
        // Merge duplicates within the relative dedup tolerance.
        let mut roots: Vec<(Complex64, usize)> = Vec::new();
        for r in raw {
            match roots.last_mut() {
                Some((prev, mult)) if (*prev - r).norm() <= ROOT_DEDUP_TOL * (1.0 + r.norm()) => {
                    *mult += 1;
                }
                _ => roots.push((r, 1)),
            }
        }
        Self { roots }
    }

    /// Distinct roots with multiplicities, sorted by (modulus, argument).
    pub fn roots(&self) -> &[(Complex64, usize)] {
        &self.roots
    }

    /// Every root repeated by multiplicity.
    pub fn with_multiplicity(&self) -> Vec<Complex64> {
        self.roots
            .iter()
            .flat_map(|&(r, m)| std::iter::repeat_n(r, m))
            .collect()
    }

    pub fn count(&self) -> usize {
        self.roots.iter().map(|&(_, m)| m).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn max_modulus(&self) -> f64 {
        self.roots.iter().fold(0.0, |m, (r, _)| m.max(r.norm()))
    }
}

/// Roots in z of `z^d p(z^{-1})` for a delay-view polynomial `p` of degree d.
pub fn z_roots(p: &Poly) -> Result<RootSet> {
    if p.is_zero() {
        return Err(Error::InvalidInput("z_roots of the zero polynomial".into()));
    }
    p.reversed().roots()
}

/// True iff every z-root of the delay-view polynomial lies strictly inside
/// the unit circle (modulus below `1 - EPS_CIRCLE`). Marginal roots fail.
pub fn is_minimum_phase(p: &Poly) -> Result<bool> {
    if p.is_zero() || p.constant_term() == 0.0 {
        return Err(Error::InvalidInput(
            "minimum-phase test requires a nonzero constant term".into(),
        ));
    }
    let roots = z_roots(p)?;
    Ok(roots
        .roots()
        .iter()
        .all(|(r, _)| r.norm() < 1.0 - EPS_CIRCLE))
}

/// Mean of `log2 |num(e^{jw}) / den(e^{jw})|` over the unit circle, by the
/// composite midpoint rule on `grid` uniform frequencies. Both polynomials
/// are in the plain (power-of-z) view.
///
/// Errors if either polynomial has a root within [`EPS_CIRCLE`] of the unit
/// circle, where the integrand stops being resolvable on the grid.
pub fn mean_log2_modulus(num: &Poly, den: &Poly, grid: usize) -> Result<f64> {
    if num.is_zero() || den.is_zero() {
        return Err(Error::InvalidInput(
            "log-modulus integral of the zero polynomial".into(),
        ));
    }
    if grid == 0 {
        return Err(Error::InvalidInput(
            "quadrature grid must be nonzero".into(),
        ));
    }
    for (name, p) in [("numerator", num), ("denominator", den)] {
        for (r, _) in p.roots()?.roots() {
            if (r.norm() - 1.0).abs() < EPS_CIRCLE {
                return Err(Error::IllConditionedIntegral(format!(
                    "{name} root {r} lies on the unit circle"
                )));
            }
        }
    }
    let mut sum = 0.0;
    for i in 0..grid {
        let w = std::f64::consts::TAU * (i as f64 + 0.5) / grid as f64 - std::f64::consts::PI;
        let z = Complex64::from_polar(1.0, w);
        sum += (num.eval(z).norm() / den.eval(z).norm()).log2();
    }
    Ok(sum / grid as f64)
}

/// Closed-form mean log2 modulus of a plain-view polynomial over the unit
/// circle: `log2|lead| + sum over roots of log2 max(|r|, 1)`.
pub fn jensen_log2(p: &Poly) -> Result<f64> {
    if p.is_zero() {
        return Err(Error::InvalidInput(
            "Jensen value of the zero polynomial".into(),
        ));
    }
    let mut acc = p.leading().abs().log2();
    for (r, m) in p.roots()?.roots() {
        acc += *m as f64 * r.norm().max(1.0).log2();
    }
    Ok(acc)
}

/// Ratio of two delay-view polynomials; causal and proper by construction.
///
/// The denominator must have a nonzero constant term. Construction cancels
/// numerator/denominator z-root pairs that agree within [`ROOT_DEDUP_TOL`],
/// so the stored form is reduced.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFilter {
    num: Poly,
    den: Poly,
}

impl RationalFilter {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() || den.constant_term() == 0.0 {
            return Err(Error::InvalidInput(
                "filter denominator must have a nonzero constant term".into(),
            ));
        }
        let filter = Self { num, den };
        filter.reduced()
    }

    pub fn identity() -> Self {
        Self {
            num: Poly::one(),
            den: Poly::one(),
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    /// Cancels common z-roots of num and den, if any. Filters built from
    /// distinct factors come back unchanged, keeping their exact coefficients.
    fn reduced(self) -> Result<Self> {
        if self.num.is_zero() {
            return Ok(Self {
                num: Poly::zero(),
                den: Poly::one(),
            });
        }
        let nroots = z_roots(&self.num)?.with_multiplicity();
        let droots = z_roots(&self.den)?.with_multiplicity();
        let mut keep_d = vec![true; droots.len()];
        let mut keep_n = vec![true; nroots.len()];
        let mut cancelled = false;
        for (i, rn) in nroots.iter().enumerate() {
            for (j, rd) in droots.iter().enumerate() {
                if keep_d[j] && (rn - rd).norm() <= ROOT_DEDUP_TOL * (1.0 + rn.norm()) {
                    keep_n[i] = false;
                    keep_d[j] = false;
                    cancelled = true;
                    break;
                }
            }
        }
        if !cancelled {
            return Ok(self);
        }
        // Rebuild both sides from their surviving roots. Degree lost to the
        // lift (leading delay-view zeros) is restored as a pure delay on the
        // numerator only; the denominator of a causal filter never carries one.
        let num_delay = self.num.coeffs().iter().take_while(|&&c| c == 0.0).count();
        let num_kept: Vec<Complex64> = nroots
            .iter()
            .zip(&keep_n)
            .filter(|(_, keep)| **keep)
            .map(|(r, _)| *r)
            .collect();
        let den_kept: Vec<Complex64> = droots
            .iter()
            .zip(&keep_d)
            .filter(|(_, keep)| **keep)
            .map(|(r, _)| *r)
            .collect();
        let num = delay_poly_from_z_roots(self.num.coeff(num_delay), &num_kept, num_delay);
        let den = delay_poly_from_z_roots(self.den.constant_term(), &den_kept, 0);
        // Normalize so the denominator constant term is 1.
        let scale = den.constant_term();
        Ok(Self {
            num: num.scale(1.0 / scale),
            den: den.scale(1.0 / scale),
        })
    }

    /// First `n + 1` impulse-response coefficients by power-series long
    /// division; index 0 is the instantaneous term.
    pub fn series_expand(&self, n: usize) -> Vec<f64> {
        let b0 = self.den.constant_term();
        let mut h = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc = self.num.coeff(k);
            for j in 1..=k.min(self.den.degree()) {
                acc -= self.den.coeff(j) * h[k - j];
            }
            h.push(acc / b0);
        }
        h
    }

    /// Exact rational evaluation `num(z^{-1}) / den(z^{-1})`.
    pub fn eval_at(&self, z: Complex64) -> Result<Complex64> {
        let u = z.inv();
        let den_val = self.den.eval(u);
        let den_scale: f64 = self
            .den
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * u.norm().powi(k as i32))
            .sum();
        if den_val.norm() <= 1e-12 * (1.0 + den_scale) {
            return Err(Error::EvaluationAtPole(format!(
                "denominator vanishes at z = {z}"
            )));
        }
        Ok(self.num.eval(u) / den_val)
    }
}

/// Reconstructs a delay-view polynomial from its finite z-roots, a leading
/// scale, and an explicit delay (power of z^{-1}) prefix.
fn delay_poly_from_z_roots(first_nonzero: f64, roots: &[Complex64], delay: usize) -> Poly {
    // In the lifted plane the polynomial is lead * prod (z - r); delay-view
    // coefficients are that product reversed, shifted by the delay.
    let mut acc = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
        for (k, &c) in acc.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * r;
        }
        acc = next;
    }
    acc.reverse();
    // Scale so the first retained coefficient matches the original filter.
    let lead = acc[0];
    let mut coeffs = vec![0.0; delay];
    for c in &acc {
        coeffs.push((c / lead).re * first_nonzero);
    }
    Poly::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normalizes_trailing_zeros() {
        let p = Poly::new(vec![1.0, 0.5, 0.0, 0.0]);
        assert_eq!(p.coeffs(), &[1.0, 0.5]);
        assert_eq!(p.degree(), 1);
        assert!(Poly::new(vec![0.0, 0.0]).is_zero());
    }

    #[test]
    fn z_roots_first_order() {
        let rs = z_roots(&Poly::new(vec![1.0, 0.5])).unwrap();
        assert_eq!(rs.count(), 1);
        let (r, m) = rs.roots()[0];
        assert_eq!(m, 1);
        assert_abs_diff_eq!(r.re, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn z_roots_constant_is_empty() {
        let rs = z_roots(&Poly::one()).unwrap();
        assert!(rs.is_empty());
    }

    #[test]
    fn z_roots_conjugate_pair() {
        // 1 - (13/9) z^{-1} + 0.75 z^{-2}: complex pair, modulus sqrt(3)/2,
        // real part 13/18 (quadratic formula).
        let rs = z_roots(&Poly::new(vec![1.0, -13.0 / 9.0, 0.75])).unwrap();
        assert_eq!(rs.count(), 2);
        for (r, _) in rs.roots() {
            assert_abs_diff_eq!(r.norm(), 3.0_f64.sqrt() / 2.0, epsilon = 1e-12);
            assert_abs_diff_eq!(r.re, 13.0 / 18.0, epsilon = 1e-12);
        }
        let (a, b) = (rs.roots()[0].0, rs.roots()[1].0);
        assert_eq!(a, b.conj());
    }

    #[test]
    fn z_roots_zero_polynomial_is_invalid() {
        assert!(matches!(
            z_roots(&Poly::zero()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn z_roots_residuals_small() {
        let p = Poly::new(vec![1.0, -0.9, 0.3, 0.2, -0.05]);
        let lifted = p.reversed();
        let scale = lifted.coeff_scale();
        for (r, _) in z_roots(&p).unwrap().roots() {
            assert!(lifted.eval(*r).norm() < 1e-8 * scale);
        }
    }

    #[test]
    fn minimum_phase_classification() {
        assert!(is_minimum_phase(&Poly::new(vec![1.0, -0.5])).unwrap());
        assert!(!is_minimum_phase(&Poly::new(vec![1.0, 1.5])).unwrap());
        assert!(is_minimum_phase(&Poly::one()).unwrap());
        // Marginal root fails.
        assert!(!is_minimum_phase(&Poly::new(vec![1.0, 1.0])).unwrap());
        assert!(matches!(
            is_minimum_phase(&Poly::new(vec![0.0, 1.0])),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn series_expansion_examples() {
        let f = RationalFilter::new(Poly::new(vec![1.0, -0.5]), Poly::one()).unwrap();
        assert_eq!(f.series_expand(3), vec![1.0, -0.5, 0.0, 0.0]);

        let f = RationalFilter::new(Poly::new(vec![1.0, -0.5]), Poly::new(vec![1.0, 0.5])).unwrap();
        let h = f.series_expand(3);
        let expect = [1.0, -1.0, 0.5, -0.25];
        for (a, b) in h.iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }

        let f = RationalFilter::new(Poly::one(), Poly::new(vec![1.0, 0.5])).unwrap();
        let h = f.series_expand(3);
        let expect = [1.0, -0.5, 0.25, -0.125];
        for (a, b) in h.iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn eval_at_examples() {
        let f =
            RationalFilter::new(Poly::new(vec![1.0, -0.5]), Poly::new(vec![1.0, 0.25])).unwrap();
        let v = f.eval_at(Complex64::new(2.0, 0.0)).unwrap();
        assert_abs_diff_eq!(v.re, 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);

        let ident =
            RationalFilter::new(Poly::new(vec![1.0, 0.3]), Poly::new(vec![1.0, 0.3])).unwrap();
        let v = ident.eval_at(Complex64::new(-1.7, 0.4)).unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-12);

        let f = RationalFilter::new(Poly::new(vec![1.0, -0.5]), Poly::one()).unwrap();
        let v = f.eval_at(Complex64::new(2.0, 0.0)).unwrap();
        assert_abs_diff_eq!(v.re, 0.75, epsilon = 1e-14);
    }

    #[test]
    fn eval_at_pole_is_detected() {
        let f = RationalFilter::new(Poly::one(), Poly::new(vec![1.0, -2.0])).unwrap();
        // den(z^{-1}) = 1 - 2 z^{-1} vanishes at z = 2.
        assert!(matches!(
            f.eval_at(Complex64::new(2.0, 0.0)),
            Err(Error::EvaluationAtPole(_))
        ));
    }

    #[test]
    fn causality_requires_nonzero_den_constant() {
        assert!(matches!(
            RationalFilter::new(Poly::one(), Poly::new(vec![0.0, 1.0])),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn common_factor_is_cancelled() {
        // (1 - 0.5u)(1 + 0.25u) / (1 - 0.5u) reduces to 1 + 0.25u.
        let num = Poly::new(vec![1.0, -0.5]).mul(&Poly::new(vec![1.0, 0.25]));
        let f = RationalFilter::new(num, Poly::new(vec![1.0, -0.5])).unwrap();
        assert_eq!(f.den().degree(), 0);
        assert_abs_diff_eq!(f.num().coeff(0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.num().coeff(1), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn mean_log2_modulus_examples() {
        let one = Poly::one();
        let v = mean_log2_modulus(&Poly::new(vec![-2.0, 1.0]), &one, DEFAULT_GRID).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-9);

        let v = mean_log2_modulus(&Poly::new(vec![-0.5, 1.0]), &one, DEFAULT_GRID).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-9);

        // (z - 1.5)(z - 0.5) over z^2 - (13/9) z + 0.75: only the 1.5 root is
        // outside, denominator roots are inside, so the Jensen value is log2 1.5.
        let num = Poly::new(vec![-1.5, 1.0]).mul(&Poly::new(vec![-0.5, 1.0]));
        let den = Poly::new(vec![0.75, -13.0 / 9.0, 1.0]);
        let v = mean_log2_modulus(&num, &den, DEFAULT_GRID).unwrap();
        assert_abs_diff_eq!(v, 1.5_f64.log2(), epsilon = 1e-9);
    }

    #[test]
    fn mean_log2_modulus_rejects_circle_roots() {
        let num = Poly::new(vec![-1.0, 1.0]); // root at z = 1
        assert!(matches!(
            mean_log2_modulus(&num, &Poly::one(), 1024),
            Err(Error::IllConditionedIntegral(_))
        ));
    }

    #[test]
    fn jensen_matches_quadrature() {
        let p = Poly::new(vec![0.3, -1.1, 0.2, 1.4]);
        let q = mean_log2_modulus(&p, &Poly::one(), DEFAULT_GRID).unwrap();
        assert_abs_diff_eq!(q, jensen_log2(&p).unwrap(), epsilon = 1e-8);
    }

    #[test]
    fn double_root_multiplicity() {
        // (z - 0.5)^2 in the lifted plane.
        let p = Poly::new(vec![1.0, -1.0, 0.25]);
        let rs = z_roots(&p).unwrap();
        assert_eq!(rs.count(), 2);
        assert_eq!(rs.roots().len(), 1);
        assert_eq!(rs.roots()[0].1, 2);
        assert_abs_diff_eq!(rs.roots()[0].0.re, 0.5, epsilon = 1e-6);
    }
}
