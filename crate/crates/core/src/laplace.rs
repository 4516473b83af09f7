//! Gaussian moment expansions, a quadrature oracle for them, and asymptotic fitting.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use ndarray_linalg::{LeastSquaresSvd, SVD};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{cq_to_c64, factorial, Cq, Poly};

/// c_ℓ = Δ^ℓ g(0)/ℓ! for a polynomial g in (w_1..w_n, w̄_1..w̄_n).
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianExpansion {
    pub n: usize,
    pub coefficients: Vec<Cq>,
}

impl GaussianExpansion {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// (2π/τ)^n Σ_{ℓ ≤ upto} τ^{−ℓ} c_ℓ.
    pub fn evaluate(&self, tau: f64, upto: usize) -> Complex64 {
        let pre = (2.0 * PI / tau).powi(self.n as i32);
        let mut acc = Complex64::zero();
        for (l, c) in self.coefficients.iter().enumerate().take(upto + 1) {
            acc += cq_to_c64(c) * tau.powi(-(l as i32));
        }
        acc * pre
    }
}

fn laplacian(g: &Poly<Cq>, n: usize) -> Poly<Cq> {
    let mut out = Poly::zero(2 * n);
    for i in 0..n {
        out = out.add(&g.diff(i).diff(n + i));
    }
    out
}

pub fn gaussian_expand(g: &Poly<Cq>, order: usize) -> GaussianExpansion {
    assert!(g.nvars().is_multiple_of(2), "variables come in (w, w̄) pairs");
    let n = g.nvars() / 2;
    let mut coefficients = Vec::with_capacity(order + 1);
    let mut cur = g.clone();
    for l in 0..=order {
        let lf = Cq::new(BigRational::from_integer(factorial(l as u32)), Zero::zero());
        coefficients.push(cur.constant_term() / lf);
        cur = laplacian(&cur, n);
    }
    GaussianExpansion { n, coefficients }
}

#[derive(Clone, Debug)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub tail_bound: f64,
    pub radius: f64,
    pub resolution: usize,
}

pub fn default_radius(tau: f64) -> f64 {
    (40.0 / tau).sqrt().max(4.0)
}

/// Points per axis giving spacing 0.4/√τ.
pub fn default_resolution(tau: f64, radius: f64) -> usize {
    let m = (2.0 * radius * tau.sqrt() / 0.4).ceil() as usize;
    m + m % 2
}

/// Expands (x + iy)^a (x − iy)^b into Σ c x^p y^q, indexed by p (q = a + b − p).
fn real_expansion(a: u32, b: u32) -> Vec<Complex64> {
    let d = (a + b) as usize;
    let binom = |n: u32, k: u32| -> f64 { crate::exact::binomial(n, k).to_string().parse::<f64>().unwrap() };
    let mut out = vec![Complex64::zero(); d + 1];
    for s in 0..=a {
        for t in 0..=b {
            let iy = Complex64::i().powu(a - s) * (-Complex64::i()).powu(b - t);
            out[(s + t) as usize] += iy * binom(a, s) * binom(b, t);
        }
    }
    out
}

fn midpoint_moments(tau: f64, radius: f64, m: usize, max_p: usize) -> Vec<f64> {
    let h = 2.0 * radius / m as f64;
    let mut mom = vec![0.0; max_p + 1];
    for i in 0..m {
        let x = -radius + (i as f64 + 0.5) * h;
        let wgt = h * (-tau * x * x).exp();
        let mut xp = 1.0;
        for v in mom.iter_mut() {
            *v += wgt * xp;
            xp *= x;
        }
    }
    mom
}

fn midpoint_value(g: &Poly<Cq>, tau: f64, radius: f64, m: usize) -> Complex64 {
    let n = g.nvars() / 2;
    let mom = midpoint_moments(tau, radius, m, 2 * g.degree() as usize + 1);
    let mut total = Complex64::zero();
    for (e, c) in g.terms() {
        let mut per_dim = Complex64::new(2f64.powi(n as i32), 0.0) * cq_to_c64(c);
        for j in 0..n {
            let coeffs = real_expansion(e[j], e[n + j]);
            let d = coeffs.len() - 1;
            let mut s = Complex64::zero();
            for (p, cp) in coeffs.iter().enumerate() {
                s += cp * mom[p] * mom[d - p];
            }
            per_dim *= s;
        }
        total += per_dim;
    }
    total
}

/// Tensor midpoint rule for ∫ g e^{−τ|w|²} |dw dw̄| on the cube of half-width `radius`,
/// with |dw dw̄| = 2 dx dy per complex dimension. The error estimate compares against a
/// grid 1.25 times coarser.
pub fn gaussian_integral_numeric(
    g: &Poly<Cq>,
    tau: f64,
    radius: f64,
    resolution: usize,
    tolerance: f64,
) -> Result<QuadratureResult> {
    if tau <= 0.0 {
        return Err(Error::Invalid(format!("tau = {tau} must be positive")));
    }
    let n = g.nvars() / 2;
    let value = midpoint_value(g, tau, radius, resolution);
    let coarse = midpoint_value(g, tau, radius, ((resolution as f64) / 1.25).round().max(2.0) as usize);
    let abs_sum: f64 = g.terms().map(|(_, c)| cq_to_c64(c).norm()).sum();
    let tail_bound = abs_sum
        * (2.0 * PI / tau).powi(n as i32)
        * (-tau * radius * radius).exp()
        * (1.0 + radius.powi(g.degree() as i32 + 2));
    let error_estimate = (value - coarse).norm() + tail_bound;
    if error_estimate > tolerance {
        return Err(Error::Resolution { estimate: error_estimate, tolerance });
    }
    Ok(QuadratureResult { value, error_estimate, tail_bound, radius, resolution })
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticFit {
    pub exponents: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    pub k_min: f64,
    pub k_max: f64,
}

impl AsymptoticFit {
    /// Largest exponent whose term is significant at the top of the sampled range.
    pub fn leading_exponent(&self) -> Option<f64> {
        let contrib: Vec<f64> =
            self.exponents.iter().zip(&self.coefficients).map(|(e, c)| c.abs() * self.k_max.powf(*e)).collect();
        let top = contrib.iter().cloned().fold(0.0, f64::max);
        let floor = (1e-6 * top).max(self.residual_norm);
        let mut best: Option<f64> = None;
        for (e, c) in self.exponents.iter().zip(&contrib) {
            if *c > floor && best.is_none_or(|b| *e > b) {
                best = Some(*e);
            }
        }
        best
    }

    pub fn coefficient(&self, exponent: f64) -> Option<f64> {
        self.exponents.iter().position(|e| (e - exponent).abs() < 1e-12).map(|i| self.coefficients[i])
    }

    pub fn predict(&self, k: f64) -> f64 {
        self.exponents.iter().zip(&self.coefficients).map(|(e, c)| c * k.powf(*e)).sum()
    }
}

fn check_samples(samples: &[(f64, f64)], unknowns: usize) -> Result<()> {
    if samples.len() < 2 * unknowns {
        return Err(Error::InsufficientSamples { need: 2 * unknowns, got: samples.len() });
    }
    let mut ks: Vec<f64> = samples.iter().map(|s| s.0).collect();
    ks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if ks.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Invalid("repeated k in samples".into()));
    }
    Ok(())
}

/// Least squares of `value ≈ Σ c_j k^{e_j}`.
pub fn asymptotic_fit(samples: &[(f64, f64)], exponents: &[f64]) -> Result<AsymptoticFit> {
    check_samples(samples, exponents.len())?;
    let rows = samples.len();
    let cols = exponents.len();
    let mut a = Array2::<f64>::zeros((rows, cols));
    let mut b = Array1::<f64>::zeros(rows);
    for (i, (k, v)) in samples.iter().enumerate() {
        for (j, e) in exponents.iter().enumerate() {
            a[[i, j]] = k.powf(*e);
        }
        b[i] = *v;
    }
    let scale: Vec<f64> = (0..cols).map(|j| a.column(j).iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    for (j, sc) in scale.iter().enumerate() {
        a.column_mut(j).mapv_inplace(|x| x / sc);
    }
    let (_, s, _) = a.svd(false, false).map_err(|e| Error::Linalg(e.to_string()))?;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if smax == 0.0 || smin / smax < 1e-12 {
        return Err(Error::RankDeficient);
    }
    let sol = a.least_squares(&b).map_err(|e| Error::Linalg(e.to_string()))?;
    let coefficients: Vec<f64> = sol.solution.iter().zip(&scale).map(|(c, s)| c / s).collect();
    let resid = &b - &a.dot(&sol.solution);
    let residual_norm = resid.iter().map(|x| x * x).sum::<f64>().sqrt();
    let k_min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let k_max = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    Ok(AsymptoticFit { exponents: exponents.to_vec(), coefficients, residual_norm, k_min, k_max })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_norm: f64,
}

/// Regression of ln|value| on ln k.
pub fn loglog_slope(samples: &[(f64, f64)]) -> Result<SlopeFit> {
    check_samples(samples, 2)?;
    let pts: Vec<(f64, f64)> = samples.iter().map(|(k, v)| (k.ln(), v.abs().ln())).collect();
    if pts.iter().any(|p| !p.1.is_finite()) {
        return Err(Error::Invalid("zero or non-finite value in log-log fit".into()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_norm = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>().sqrt();
    Ok(SlopeFit { slope, intercept, residual_norm })
}

/// Estimates N in |f| ~ φ^{N/2} from samples with 0 < φ < 0.1 max φ.
pub fn vanishing_order_check(f: &[f64], phi: &[f64]) -> Result<f64> {
    if f.len() != phi.len() {
        return Err(Error::Shape(format!("{} values against {} phi samples", f.len(), phi.len())));
    }
    let pmax = phi.iter().cloned().fold(0.0, f64::max);
    let near: Vec<(f64, f64)> =
        f.iter().zip(phi).filter(|(_, &p)| p > 0.0 && p < 0.1 * pmax).map(|(v, p)| (*p, v.abs())).collect();
    if near.len() < 4 {
        return Err(Error::InsufficientSamples { need: 4, got: near.len() });
    }
    if near.iter().all(|s| s.1 == 0.0) {
        return Ok(f64::INFINITY);
    }
    let mut distinct = near.clone();
    distinct.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    distinct.dedup_by(|a, b| a.0 == b.0);
    Ok(2.0 * loglog_slope(&distinct)?.slope)
}

/// Builds a polynomial in (w, w̄) from (α, β, coefficient) triples.
pub fn poly_from_terms(n: usize, terms: &[(Vec<u32>, Vec<u32>, Cq)]) -> Result<Poly<Cq>> {
    let mut p = Poly::zero(2 * n);
    for (a, b, c) in terms {
        if a.len() != n || b.len() != n {
            return Err(Error::Shape(format!("multi-index length differs from n = {n}")));
        }
        let mut e = a.clone();
        e.extend(b);
        p.add_term(e, c.clone());
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{cq_int, cq_real, rat};

    fn w_wbar(a: u32, b: u32) -> Poly<Cq> {
        Poly::monomial(vec![a, b], cq_int(1))
    }

    #[test]
    fn expansion_examples() {
        let one = gaussian_expand(&w_wbar(0, 0), 3);
        assert_eq!(one.coefficients, vec![cq_int(1), cq_int(0), cq_int(0), cq_int(0)]);
        let ww = gaussian_expand(&w_wbar(1, 1), 2);
        assert_eq!(ww.coefficients, vec![cq_int(0), cq_int(1), cq_int(0)]);
        let w = gaussian_expand(&w_wbar(1, 0), 4);
        assert!(w.coefficients.iter().all(|c| c.is_zero()));
        let w2 = gaussian_expand(&w_wbar(2, 2), 3);
        assert_eq!(w2.coefficients[2], cq_int(2));
        assert_eq!(ww.evaluate(4.0, 2).re, 2.0 * PI / 16.0);
    }

    #[test]
    fn quadrature_examples() {
        let tau = 4.0;
        let r = default_radius(tau);
        let m = default_resolution(tau, r);
        let v = gaussian_integral_numeric(&w_wbar(0, 0), tau, r, m, 1e-10).unwrap();
        assert!((v.value.re - PI / 2.0).abs() < 1e-8);
        let v = gaussian_integral_numeric(&w_wbar(1, 1), tau, r, m, 1e-10).unwrap();
        assert!((v.value.re - 2.0 * PI / 16.0).abs() < 1e-8);
        let v = gaussian_integral_numeric(&w_wbar(1, 0), 9.0, r, m, 1e-10).unwrap();
        assert!(v.value.norm() < 1e-12);
        assert!(matches!(gaussian_integral_numeric(&w_wbar(0, 0), tau, r, 8, 1e-10), Err(Error::Resolution { .. })));
    }

    #[test]
    fn two_dimensional_moment() {
        let g = poly_from_terms(2, &[(vec![1, 1], vec![1, 1], cq_real(rat(1, 2)))]).unwrap();
        let exp = gaussian_expand(&g, 3);
        let tau = 16.0;
        let r = default_radius(tau);
        let q = gaussian_integral_numeric(&g, tau, r, default_resolution(tau, r), 1e-10).unwrap();
        assert!((q.value - exp.evaluate(tau, 3)).norm() < 1e-12);
    }

    #[test]
    fn fits() {
        let s: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0, 128.0].iter().map(|k| (*k, 3.0 / k + 5.0 / (k * k))).collect();
        let f = asymptotic_fit(&s, &[-1.0, -2.0]).unwrap();
        assert!((f.coefficients[0] - 3.0).abs() < 1e-9 && (f.coefficients[1] - 5.0).abs() < 1e-9);
        let s: Vec<(f64, f64)> =
            [4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0].iter().map(|k: &f64| (*k, k.powf(-0.5))).collect();
        let f = asymptotic_fit(&s, &[0.0, -0.5, -1.0]).unwrap();
        assert!((f.coefficients[1] - 1.0).abs() < 1e-9);
        assert_eq!(f.leading_exponent(), Some(-0.5));
        assert!(matches!(asymptotic_fit(&s[..3], &[0.0, -1.0]), Err(Error::InsufficientSamples { .. })));
        let dup = vec![(2.0, 1.0), (2.0, 1.0), (3.0, 1.0), (4.0, 1.0)];
        assert!(asymptotic_fit(&dup, &[0.0]).is_err());
        let sl = loglog_slope(&s).unwrap();
        assert!((sl.slope + 0.5).abs() < 1e-12);
    }

    #[test]
    fn vanishing_orders() {
        let phi: Vec<f64> = (0..40).map(|i| (i as f64 * 0.05).powi(2)).collect();
        assert!((vanishing_order_check(&phi, &phi).unwrap() - 2.0).abs() < 1e-12);
        let ones = vec![1.0; phi.len()];
        assert!(vanishing_order_check(&ones, &phi).unwrap().abs() < 1e-12);
        let cube: Vec<f64> = phi.iter().map(|p| p.powf(1.5)).collect();
        assert!((vanishing_order_check(&cube, &phi).unwrap() - 3.0).abs() < 1e-12);
        assert!(vanishing_order_check(&ones[..3], &phi[..3]).is_err());
    }
}
