//! Almost projectors P = (k/2π) E^k, their spectra, and the spectral projector Π = χ(P).

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{binomial, Rational};
use crate::geometry::{ModelManifold, Point, Section, C64};
use crate::kernel::{kernel_from_symbol, KernelOperator};
use crate::linalg;

pub fn build_almost_projector(manifold: Arc<ModelManifold>, section: &Section, k: u32) -> Result<KernelOperator> {
    let mut p = kernel_from_symbol(manifold, section, k, &|_, _| C64::new(1.0, 0.0))?;
    let n = p.len();
    for i in 0..n {
        for j in i..n {
            let v = 0.5 * (p.kernel[[i, j]] + p.kernel[[j, i]].conj());
            p.kernel[[i, j]] = v;
            p.kernel[[j, i]] = v.conj();
        }
    }
    Ok(p)
}

/// The closed-form reproducing kernel ((k+1)/2π) E^k of degree-k sections on the sphere.
pub fn sphere_oracle(manifold: Arc<ModelManifold>, k: u32) -> Result<KernelOperator> {
    let c = (k as f64 + 1.0) / k as f64;
    kernel_from_symbol(manifold, &Section::Sphere, k, &|_, _| C64::new(c, 0.0))
}

#[derive(Clone, Debug)]
pub struct SpectralData {
    pub k: u32,
    /// All eigenvalues in the weighted space, ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues above 1/2, descending, matching the columns of `basis`.
    pub cluster_one: Vec<f64>,
    /// Weighted-space orthonormal eigenvectors of the upper cluster.
    pub basis: Array2<C64>,
    pub gap: f64,
    /// ‖P² − P‖ = max |λ² − λ|.
    pub q_norm: f64,
    pub orthonormality_defect: f64,
    pub blocks: usize,
}

impl SpectralData {
    pub fn rank(&self) -> usize {
        self.cluster_one.len()
    }

    pub fn cluster_zero_count(&self) -> usize {
        self.eigenvalues.len() - self.rank()
    }
}

pub fn spectral_analysis(p: &KernelOperator) -> Result<SpectralData> {
    let tol = 1e-10 * linalg::max_abs(&p.kernel).max(1.0);
    if p.hermitian_defect() > tol {
        return Err(Error::Invalid(format!("operator is not Hermitian: defect {:e}", p.hermitian_defect())));
    }
    let a = p.weighted();
    let layout = p.manifold.cyclic_layout(p.k);
    let split = linalg::split_eigen(&a, layout.as_ref(), 0.5)?;
    drop(a);
    let gap = split.values.iter().map(|&l| l.abs().min((l - 1.0).abs())).fold(0.0, f64::max);
    let q_norm = split.values.iter().map(|&l| (l * l - l).abs()).fold(0.0, f64::max);
    let orthonormality_defect = linalg::orthonormality_defect(&split.vectors)?;
    Ok(SpectralData {
        k: p.k,
        eigenvalues: split.values,
        cluster_one: split.selected,
        basis: split.vectors,
        gap,
        q_norm,
        orthonormality_defect,
        blocks: split.blocks,
    })
}

/// Π = Σ_{λ>1/2} v v* in the weighted space, with Nyström extension off the nodes.
#[derive(Clone, Debug)]
pub struct Projector {
    pub manifold: Arc<ModelManifold>,
    pub section: Section,
    pub k: u32,
    /// K_P(x, y) = amplitude · E^k(x, y).
    pub amplitude: f64,
    pub basis: Array2<C64>,
    pub lambdas: Vec<f64>,
    sqrt_w: Vec<f64>,
}

pub fn chi_projector(p: &KernelOperator, s: &SpectralData) -> Result<Projector> {
    if s.gap >= 0.25 {
        return Err(Error::Unresolved(s.gap));
    }
    let section = p.section.clone().ok_or_else(|| Error::Invalid("operator has no section".into()))?;
    let amplitude = p.kernel[[0, 0]].re;
    let m = &p.manifold;
    let probe = [(0, m.len() / 3), (m.len() / 2, m.len() - 1)];
    for (i, j) in probe {
        let want = amplitude * section.power(m.nodes[i], m.nodes[j], p.k);
        if (p.kernel[[i, j]] - want).norm() > 1e-10 * amplitude {
            return Err(Error::Invalid("kernel is not a multiple of E^k".into()));
        }
    }
    Ok(Projector {
        manifold: p.manifold.clone(),
        section,
        k: p.k,
        amplitude,
        basis: s.basis.clone(),
        lambdas: s.cluster_one.clone(),
        sqrt_w: m.weights.iter().map(|w| w.sqrt()).collect(),
    })
}

impl Projector {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthonormal basis functions φ_a at the nodes, N×r.
    pub fn node_functions(&self) -> Array2<C64> {
        let mut phi = self.basis.clone();
        for ((i, _), v) in phi.indexed_iter_mut() {
            *v /= self.sqrt_w[i];
        }
        phi
    }

    /// φ_a(x) = λ_a^{-1} Σ_j K_P(x, y_j) w_j φ_a(y_j).
    pub fn eval_functions(&self, x: Point) -> Array1<C64> {
        let m = &self.manifold;
        let row: Array1<C64> =
            (0..m.len()).map(|j| self.amplitude * self.section.power(x, m.nodes[j], self.k) * self.sqrt_w[j]).collect();
        let mut phi = row.dot(&self.basis);
        for (v, l) in phi.iter_mut().zip(&self.lambdas) {
            *v /= *l;
        }
        phi
    }

    pub fn kernel_at(&self, x: Point, y: Point) -> C64 {
        let a = self.eval_functions(x);
        let b = self.eval_functions(y);
        a.iter().zip(b.iter()).map(|(p, q)| p * q.conj()).sum()
    }

    pub fn diagonal_at(&self, x: Point) -> f64 {
        self.eval_functions(x).iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn node_diagonal(&self) -> Vec<f64> {
        (0..self.manifold.len())
            .map(|i| self.basis.row(i).iter().map(|v| v.norm_sqr()).sum::<f64>() / (self.sqrt_w[i] * self.sqrt_w[i]))
            .collect()
    }

    /// Σ_i w_i Π(x_i, x_i).
    pub fn trace(&self) -> f64 {
        self.basis.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn dense_kernel(&self) -> KernelOperator {
        let phi = self.node_functions();
        let kernel = phi.dot(&linalg::adjoint(&phi));
        KernelOperator { manifold: self.manifold.clone(), k: self.k, kernel, symbol: None, section: None }
    }

    /// ‖Π² − Π‖ from the Gram matrix G = V*V: max |g(g − 1)| over its eigenvalues.
    pub fn idempotency_defect(&self) -> Result<f64> {
        if self.rank() == 0 {
            return Ok(0.0);
        }
        let (g, _) = linalg::hermitian_eigen(&linalg::gram(&self.basis))?;
        Ok(g.iter().map(|g| (g * (g - 1.0)).abs()).fold(0.0, f64::max))
    }

    /// Frobenius bound on ‖Π* − Π‖ from the assembled weighted matrix.
    pub fn hermitian_defect(&self) -> f64 {
        let pi = self.basis.dot(&linalg::adjoint(&self.basis));
        let n = pi.nrows();
        let mut acc = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                acc += 2.0 * (pi[[i, j]] - pi[[j, i]].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }
}

/// Taylor coefficients of f(y) = ½(1 − (1 + 4y)^{−1/2}) at 0, degrees 0..=m.
pub fn chi_taylor(m: usize) -> Vec<Rational> {
    let mut out = vec![Rational::from_integer(BigInt::from(0))];
    for j in 1..=m as u32 {
        let c = Rational::new(binomial(2 * j, j), BigInt::from(2));
        out.push(if j % 2 == 1 { c } else { -c });
    }
    out
}

fn chi_taylor_f64(m: usize) -> Vec<f64> {
    chi_taylor(m).iter().map(crate::exact::rat_to_f64).collect()
}

/// χ_m(λ) = λ + (1 − 2λ) p_m(λ² − λ).
pub fn chi_scalar(lambda: f64, m: usize) -> f64 {
    let c = chi_taylor_f64(m);
    let q = lambda * lambda - lambda;
    let p = c.iter().rev().fold(0.0, |acc, a| acc * q + a);
    lambda + (1.0 - 2.0 * lambda) * p
}

/// ‖χ_m(P) − Π‖, exact from the spectrum.
pub fn chi_series_defect(s: &SpectralData, m: usize) -> Result<f64> {
    if s.q_norm >= 0.25 {
        return Err(Error::Invalid(format!("‖P² − P‖ = {} is not below 1/4", s.q_norm)));
    }
    Ok(s.eigenvalues.iter().map(|&l| (chi_scalar(l, m) - if l > 0.5 { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max))
}

/// Dense χ_m(P) = P + (1 − 2P) p_m(P² − P) and its distance to the projector of `s`.
pub fn chi_series(p: &KernelOperator, s: &SpectralData, m: usize) -> Result<(KernelOperator, f64)> {
    if s.q_norm >= 0.25 {
        return Err(Error::Invalid(format!("‖P² − P‖ = {} is not below 1/4", s.q_norm)));
    }
    let a = p.weighted();
    let n = a.nrows();
    let eye = Array2::<C64>::eye(n);
    let q = a.dot(&a) - &a;
    let coeffs = chi_taylor_f64(m);
    let mut poly = Array2::<C64>::zeros((n, n));
    for c in coeffs.iter().rev() {
        poly = poly.dot(&q) + &eye.mapv(|v| v * c);
    }
    let chi = &a + &(&eye - &a.mapv(|v| v * 2.0)).dot(&poly);
    let pi = s.basis.dot(&linalg::adjoint(&s.basis));
    let defect = linalg::hermitian_norm(&(&chi - &pi))?;
    let w: Vec<f64> = p.manifold.weights.iter().map(|w| w.sqrt()).collect();
    let mut kernel = chi;
    for ((i, j), v) in kernel.indexed_iter_mut() {
        *v /= w[i] * w[j];
    }
    let op = KernelOperator { manifold: p.manifold.clone(), k: p.k, kernel, symbol: None, section: None };
    Ok((op, defect))
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionRow {
    pub k: u32,
    pub rank: usize,
    pub trace: f64,
    pub predicted: f64,
    pub residual: f64,
}

/// Rank against (k/2π)·vol(M).
pub fn dimension_report(ladder: &[&Projector]) -> Vec<DimensionRow> {
    ladder
        .iter()
        .map(|p| {
            let predicted = p.k as f64 / (2.0 * PI) * p.manifold.exact_volume();
            DimensionRow { k: p.k, rank: p.rank(), trace: p.trace(), predicted, residual: p.rank() as f64 - predicted }
        })
        .collect()
}

/// Builds P on the given grid, analyzes it and returns the spectral projector.
pub fn projector_on(manifold: Arc<ModelManifold>, section: &Section, k: u32) -> Result<(SpectralData, Projector)> {
    let p = build_almost_projector(manifold, section, k)?;
    let s = spectral_analysis(&p)?;
    let pi = chi_projector(&p, &s)?;
    Ok((s, pi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::geometry::{build_sphere, sphere_for, torus_for};

    #[test]
    fn taylor_coefficients() {
        let c = chi_taylor(4);
        assert_eq!(c[1], rat(1, 1));
        assert_eq!(c[2], rat(-3, 1));
        assert_eq!(c[3], rat(10, 1));
        assert_eq!(c[4], rat(-35, 1));
        let f = |y: f64| 0.5 * (1.0 - (1.0 + 4.0 * y).powf(-0.5));
        let h: f64 = 1e-2;
        let d1 = (f(h) - f(-h)) / (2.0 * h);
        let d2 = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        assert!((d1 - 1.0).abs() < 1e-2);
        assert!((d2 / 2.0 + 3.0).abs() < 0.1);
        assert_eq!(chi_scalar(1.0, 3), 1.0);
        assert_eq!(chi_scalar(0.0, 3), 0.0);
    }

    #[test]
    fn sphere_oracle_is_a_projector() {
        let k = 6;
        let m = Arc::new(sphere_for(k).unwrap());
        assert!(sphere_oracle(Arc::new(build_sphere(10, 10).unwrap()), k).is_err());
        let o = sphere_oracle(m.clone(), k).unwrap();
        let s = spectral_analysis(&o).unwrap();
        assert_eq!(s.rank(), 7);
        assert!(s.gap < 1e-8, "{}", s.gap);
        let pi = chi_projector(&o, &s).unwrap().dense_kernel();
        assert!(linalg::max_abs(&(&pi.kernel - &o.kernel)) < 1e-8);
        let (same, d) = chi_series(&o, &s, 2).unwrap();
        assert!(d < 1e-8);
        assert!(linalg::max_abs(&(&same.kernel - &o.kernel)) < 1e-8);
    }

    #[test]
    fn torus_ranks_and_laws() {
        let k = 8;
        let m = Arc::new(torus_for(k).unwrap());
        let (s, pi) = projector_on(m, &Section::TorusCubic { c: 0.35 }, k).unwrap();
        assert_eq!(pi.rank(), 8);
        assert!(s.orthonormality_defect < 1e-9);
        assert!((pi.trace() - 8.0).abs() < 1e-9);
        assert!(pi.idempotency_defect().unwrap() < 1e-9);
        assert!(pi.hermitian_defect() < 1e-12);
        let d: Vec<f64> = (1..=3).map(|mm| chi_series_defect(&s, mm).unwrap()).collect();
        assert!(d[0] > d[1] && d[1] > d[2]);
        let node = pi.node_diagonal();
        let x = pi.manifold.nodes[5];
        assert!((pi.diagonal_at(x) - node[5]).abs() < 1e-10);
    }

    #[test]
    fn dense_series_matches_spectral() {
        let k = 4;
        let m = Arc::new(sphere_for(k).unwrap());
        let p = build_almost_projector(m, &Section::Sphere, k).unwrap();
        let s = spectral_analysis(&p).unwrap();
        assert_eq!(s.rank(), 5);
        for mm in 0..3 {
            let (_, d) = chi_series(&p, &s, mm).unwrap();
            assert!((d - chi_series_defect(&s, mm).unwrap()).abs() < 1e-10);
        }
        let pi = chi_projector(&p, &s).unwrap();
        let rows = dimension_report(&[&pi]);
        assert_eq!(rows[0].residual, 1.0);
    }
}
