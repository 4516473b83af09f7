//! Toeplitz operators Π f Π, stored compressed on the range of Π: T = Φ C Φ*.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{s, Array1, Array2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{hamiltonian_vector, Point, C64};
use crate::laplace::{asymptotic_fit, loglog_slope, AsymptoticFit};
use crate::linalg;
use crate::projector::Projector;

#[derive(Clone, Debug)]
pub struct ToeplitzOperator {
    pub projector: Arc<Projector>,
    pub multiplier: Option<Vec<C64>>,
    /// C_ab = ⟨φ_a, T φ_b⟩ in the orthonormal basis of the range of Π.
    pub compressed: Array2<C64>,
}

fn real(f: &[f64]) -> Vec<C64> {
    f.iter().map(|v| C64::new(*v, 0.0)).collect()
}

pub fn toeplitz(pi: &Arc<Projector>, f: &[C64]) -> Result<ToeplitzOperator> {
    let n = pi.manifold.len();
    if f.len() != n {
        return Err(Error::Shape(format!("{} multiplier samples on {n} nodes", f.len())));
    }
    let v = &pi.basis;
    let mut fv = v.clone();
    for ((i, _), x) in fv.indexed_iter_mut() {
        *x *= f[i];
    }
    Ok(ToeplitzOperator {
        projector: pi.clone(),
        multiplier: Some(f.to_vec()),
        compressed: linalg::adjoint(v).dot(&fv),
    })
}

pub fn toeplitz_fn(pi: &Arc<Projector>, f: &dyn Fn(Point) -> f64) -> Result<ToeplitzOperator> {
    toeplitz(pi, &real(&pi.manifold.sample(f)))
}

impl ToeplitzOperator {
    pub fn k(&self) -> u32 {
        self.projector.k
    }

    fn with(&self, compressed: Array2<C64>) -> Self {
        ToeplitzOperator { projector: self.projector.clone(), multiplier: None, compressed }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.projector, &other.projector) {
            return Err(Error::Invalid("operators belong to different projectors".into()));
        }
        Ok(())
    }

    pub fn norm(&self) -> Result<f64> {
        linalg::spectral_norm(&self.compressed)
    }

    pub fn hermitian_defect(&self) -> f64 {
        linalg::hermitian_defect(&self.compressed)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let h = (&self.compressed + &linalg::adjoint(&self.compressed)).mapv(|z| z * 0.5);
        Ok(linalg::hermitian_eigen(&h)?.0.to_vec())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with(self.compressed.dot(&other.compressed)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with(&self.compressed - &other.compressed))
    }

    pub fn scale(&self, c: C64) -> Self {
        self.with(self.compressed.mapv(|z| z * c))
    }

    pub fn adjoint(&self) -> Self {
        let mut t = self.with(linalg::adjoint(&self.compressed));
        t.multiplier = self.multiplier.as_ref().map(|f| f.iter().map(|z| z.conj()).collect());
        t
    }

    /// ik[T, S].
    pub fn ik_commutator(&self, other: &Self) -> Result<Self> {
        let ts = self.mul(other)?;
        let st = other.mul(self)?;
        Ok(ts.sub(&st)?.scale(C64::new(0.0, self.k() as f64)))
    }

    pub fn kernel_at(&self, x: Point, y: Point) -> C64 {
        let a = self.projector.eval_functions(x);
        let b = self.projector.eval_functions(y);
        a.dot(&self.compressed.dot(&b.mapv(|z| z.conj())))
    }

    pub fn diagonal_at(&self, x: Point) -> C64 {
        let a = self.projector.eval_functions(x);
        a.dot(&self.compressed.dot(&a.mapv(|z| z.conj())))
    }

    pub fn node_diagonal(&self) -> Vec<C64> {
        let phi = self.projector.node_functions();
        let pc = phi.dot(&self.compressed);
        (0..phi.nrows()).map(|i| pc.row(i).iter().zip(phi.row(i).iter()).map(|(a, b)| a * b.conj()).sum()).collect()
    }

    /// Kernel T(x_i, x_j) on all node pairs.
    pub fn node_kernel(&self) -> Array2<C64> {
        let phi = self.projector.node_functions();
        phi.dot(&self.compressed).dot(&linalg::adjoint(&phi))
    }

    /// Rows `lo..hi` of the node kernel.
    pub fn node_kernel_rows(&self, phi: &Array2<C64>, lo: usize, hi: usize) -> Array2<C64> {
        phi.slice(s![lo..hi, ..]).dot(&self.compressed).dot(&linalg::adjoint(phi))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    Covariant,
    Contravariant,
}

/// Sampled coefficients f_0, f_1, … of a series in 1/k.
#[derive(Clone, Debug, Serialize)]
pub struct SymbolSeries {
    pub flavor: Flavor,
    pub probes: Vec<Point>,
    pub coefficients: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

impl SymbolSeries {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, probe: usize, k: u32) -> f64 {
        self.coefficients.iter().enumerate().map(|(j, c)| c[probe] * (k as f64).powi(-(j as i32))).sum()
    }
}

fn fit_series(samples: &[(f64, f64)], order: usize) -> Result<AsymptoticFit> {
    let mut exps: Vec<f64> = (0..=order).map(|j| -(j as f64)).collect();
    if samples.len() >= 2 * (order + 2) {
        exps.push(-((order + 1) as f64));
    }
    asymptotic_fit(samples, &exps)
}

/// Fits (2π/k) T(x,x) and (2π/k) Π(x,x) in powers of 1/k at each probe and divides the
/// series order by order.
pub fn covariant_symbol(ladder: &[ToeplitzOperator], probes: &[Point], order: usize) -> Result<SymbolSeries> {
    let mut t_samples = vec![Vec::new(); probes.len()];
    let mut p_samples = vec![Vec::new(); probes.len()];
    for t in ladder {
        let k = t.k() as f64;
        let s = 2.0 * PI / k;
        for (j, &x) in probes.iter().enumerate() {
            t_samples[j].push((k, t.diagonal_at(x).re * s));
            p_samples[j].push((k, t.projector.diagonal_at(x) * s));
        }
    }
    let mut coefficients = vec![vec![0.0; probes.len()]; order + 1];
    let mut residuals = Vec::with_capacity(probes.len());
    for j in 0..probes.len() {
        let tf = fit_series(&t_samples[j], order)?;
        let pf = fit_series(&p_samples[j], order)?;
        // series quotient t / p in powers of 1/k
        for n in 0..=order {
            let mut acc = tf.coefficients[n];
            for (i, c) in coefficients.iter().enumerate().take(n) {
                acc -= c[j] * pf.coefficients[n - i];
            }
            coefficients[n][j] = acc / pf.coefficients[0];
        }
        residuals.push(tf.residual_norm.max(pf.residual_norm));
    }
    Ok(SymbolSeries { flavor: Flavor::Covariant, probes: probes.to_vec(), coefficients, residuals })
}

/// T(x_i, x_i) / Π(x_i, x_i) at the nodes.
pub fn covariant_at_nodes(t: &ToeplitzOperator) -> Vec<C64> {
    let d = t.node_diagonal();
    d.iter().zip(t.projector.node_diagonal()).map(|(a, b)| a / b).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Recovered {
    pub k: u32,
    pub multiplier: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Largest ratio of successive residuals.
    pub contraction: f64,
}

/// Finds g with covariant diagonal of Π g Π equal to `target` at the nodes by the iteration
/// g ← g + (target − σ_cov(Π g Π)).
pub fn contravariant_recover(pi: &Arc<Projector>, target: &[f64], tol: f64) -> Result<Recovered> {
    const MAX_ITER: usize = 20;
    let mut g = target.to_vec();
    let mut last = f64::INFINITY;
    let mut contraction: f64 = 0.0;
    for it in 0..=MAX_ITER {
        let t = toeplitz(pi, &real(&g))?;
        let cov = covariant_at_nodes(&t);
        let r: Vec<f64> = target.iter().zip(&cov).map(|(a, b)| a - b.re).collect();
        let res = r.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if it > 0 && last > 0.0 {
            contraction = contraction.max(res / last);
        }
        if res <= tol {
            return Ok(Recovered { k: pi.k, multiplier: g, iterations: it, residual: res, contraction });
        }
        last = res;
        for (gi, ri) in g.iter_mut().zip(&r) {
            *gi += ri;
        }
    }
    Err(Error::NoConvergence(MAX_ITER))
}

#[derive(Clone, Debug, Serialize)]
pub struct NormRow {
    pub k: u32,
    pub norm: f64,
    pub sup: f64,
    pub scaled_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormLawReport {
    pub rows: Vec<NormRow>,
    pub fit: Option<AsymptoticFit>,
}

/// ‖T_k‖ against sup |f| over the ladder; the defect is reported as (sup − ‖T‖)·k.
pub fn norm_law_check(ladder: &[Arc<Projector>], f: &dyn Fn(Point) -> f64, sup: f64) -> Result<NormLawReport> {
    let mut rows = Vec::with_capacity(ladder.len());
    for pi in ladder {
        let norm = toeplitz_fn(pi, f)?.norm()?;
        rows.push(NormRow { k: pi.k, norm, sup, scaled_defect: (sup - norm) * pi.k as f64 });
    }
    let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.k as f64, r.norm)).collect();
    let fit = if samples.len() >= 4 { Some(asymptotic_fit(&samples, &[0.0, -1.0])?) } else { None };
    Ok(NormLawReport { rows, fit })
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorRow {
    pub k: u32,
    pub defect: f64,
    pub commutator_norm: f64,
    pub bracket_norm: f64,
    pub diagonal_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorReport {
    pub rows: Vec<CommutatorRow>,
    pub fitted_order: Option<f64>,
}

/// ‖ik[T_f, T_g] − T_b‖ over the ladder, with b the expected principal symbol.
pub fn commutator_check(
    ladder: &[Arc<Projector>],
    f: &dyn Fn(Point) -> f64,
    g: &dyn Fn(Point) -> f64,
    bracket: &dyn Fn(Point) -> f64,
    probes: &[Point],
) -> Result<CommutatorReport> {
    let mut rows = Vec::with_capacity(ladder.len());
    for pi in ladder {
        let tf = toeplitz_fn(pi, f)?;
        let tg = toeplitz_fn(pi, g)?;
        let tb = toeplitz_fn(pi, bracket)?;
        let c = tf.ik_commutator(&tg)?;
        let d = c.sub(&tb)?;
        let mut diag: f64 = 0.0;
        for &x in probes {
            let p = pi.diagonal_at(x);
            diag = diag.max(((c.diagonal_at(x) - tb.diagonal_at(x)) / p).norm());
        }
        rows.push(CommutatorRow {
            k: pi.k,
            defect: d.norm()?,
            commutator_norm: c.norm()?,
            bracket_norm: tb.norm()?,
            diagonal_defect: diag,
        });
    }
    let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.k as f64, r.defect)).collect();
    let fitted_order = if samples.len() >= 4 { Some(loglog_slope(&samples)?.slope) } else { None };
    Ok(CommutatorReport { rows, fitted_order })
}

/// Π (f + (i/k) ∇_X) Π with X the Hamiltonian field of f and ∇ the connection of L^k.
pub fn normalized_toeplitz(pi: &Arc<Projector>, f: &dyn Fn(Point) -> f64) -> Result<ToeplitzOperator> {
    let m = &pi.manifold;
    let k = pi.k as f64;
    let h = m.fd_step();
    let base = toeplitz_fn(pi, f)?;
    let r = pi.rank();
    let n = m.len();
    let mut dphi = Array2::<C64>::zeros((n, r));
    let phi = pi.node_functions();
    for i in 0..n {
        let x = m.nodes[i];
        let xv = hamiltonian_vector(m, f, x, h);
        if xv[0] == 0.0 && xv[1] == 0.0 {
            continue;
        }
        let a = m.connection(x);
        let mut row = Array1::<C64>::zeros(r);
        for mu in 0..2 {
            if xv[mu] == 0.0 {
                continue;
            }
            let mut xp = x;
            let mut xm = x;
            xp[mu] += h;
            xm[mu] -= h;
            let d = (pi.eval_functions(xp) - pi.eval_functions(xm)).mapv(|z| z / (2.0 * h));
            let conn = phi.row(i).mapv(|z| z * C64::new(0.0, k * a[mu]));
            row = row + (d + conn).mapv(|z| z * xv[mu]);
        }
        dphi.row_mut(i).assign(&row);
    }
    let mut weighted = phi.clone();
    for ((i, _), v) in weighted.indexed_iter_mut() {
        *v *= m.weights[i];
    }
    let correction = linalg::adjoint(&weighted).dot(&dphi).mapv(|z| z * C64::new(0.0, 1.0 / k));
    Ok(ToeplitzOperator { projector: pi.clone(), multiplier: None, compressed: base.compressed + correction })
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportRow {
    pub k: u32,
    pub product_norm: f64,
    pub outside_mass: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportReport {
    pub rows: Vec<SupportRow>,
    pub product_slope: Option<f64>,
    pub mass_slope: Option<f64>,
    pub vacuous: bool,
}

/// Locality: ‖T_f T_g‖ for the two multipliers and the Hilbert–Schmidt mass of T_f outside
/// a δ-neighbourhood of the diagonal over supp f, relative to its total mass.
pub fn support_check(
    ladder: &[Arc<Projector>],
    f: &dyn Fn(Point) -> f64,
    g: &dyn Fn(Point) -> f64,
    delta: f64,
) -> Result<SupportReport> {
    let mut rows = Vec::with_capacity(ladder.len());
    let mut vacuous = true;
    for pi in ladder {
        let m = &pi.manifold;
        let tf = toeplitz_fn(pi, f)?;
        let tg = toeplitz_fn(pi, g)?;
        let product_norm = tf.mul(&tg)?.norm()?;
        let fs = m.sample(f);
        let supp: Vec<usize> = (0..m.len()).filter(|&i| fs[i] != 0.0).collect();
        let near: Vec<bool> =
            m.nodes.iter().map(|&x| supp.iter().any(|&j| m.g_distance(x, m.nodes[j]) <= delta)).collect();
        if near.iter().any(|b| !b) {
            vacuous = false;
        }
        let phi = pi.node_functions();
        let n = m.len();
        let (mut outside, mut total) = (0.0, 0.0);
        let chunk = 256;
        for lo in (0..n).step_by(chunk) {
            let hi = (lo + chunk).min(n);
            let rows_k = tf.node_kernel_rows(&phi, lo, hi);
            for i in lo..hi {
                for j in 0..n {
                    let v = rows_k[[i - lo, j]].norm_sqr() * m.weights[i] * m.weights[j];
                    total += v;
                    let inside = near[i] && near[j] && m.g_distance(m.nodes[i], m.nodes[j]) <= delta;
                    if !inside {
                        outside += v;
                    }
                }
            }
        }
        let outside_mass = if total > 0.0 { (outside / total).sqrt() } else { 0.0 };
        rows.push(SupportRow { k: pi.k, product_norm, outside_mass });
    }
    let slope = |v: Vec<(f64, f64)>| -> Result<Option<f64>> {
        if v.len() >= 4 && v.iter().all(|p| p.1 > 0.0) {
            Ok(Some(loglog_slope(&v)?.slope))
        } else {
            Ok(None)
        }
    };
    let product_slope = slope(rows.iter().map(|r| (r.k as f64, r.product_norm)).collect())?;
    let mass_slope = slope(rows.iter().map(|r| (r.k as f64, r.outside_mass)).collect())?;
    Ok(SupportReport { rows, product_slope, mass_slope, vacuous })
}

/// Smooth bump of radius `r` around `c` in torus chart coordinates (minimal image).
pub fn torus_bump(c: Point, r: f64) -> impl Fn(Point) -> f64 {
    move |p: Point| {
        let dx = p[0] - c[0] - (p[0] - c[0]).round();
        let dy = p[1] - c[1] - (p[1] - c[1]).round();
        let s = (dx * dx + dy * dy) / (r * r);
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s)).exp()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sphere_for, torus_for, Section};
    use crate::projector::projector_on;

    fn sphere_pi(k: u32) -> Arc<Projector> {
        let m = Arc::new(sphere_for(k).unwrap());
        Arc::new(projector_on(m, &Section::Sphere, k).unwrap().1)
    }

    #[test]
    fn sphere_cos_theta_spectrum() {
        let k = 6;
        let pi = sphere_pi(k);
        let t = toeplitz_fn(&pi, &|p| p[0].cos()).unwrap();
        let ev = t.eigenvalues().unwrap();
        let want: Vec<f64> = (0..=k).map(|j| (2.0 * j as f64 - k as f64) / (k as f64 + 2.0)).collect();
        for (a, b) in ev.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10, "{ev:?}");
        }
        assert!((t.norm().unwrap() - k as f64 / (k as f64 + 2.0)).abs() < 1e-10);
        let one = toeplitz_fn(&pi, &|_| 1.0).unwrap();
        assert!(linalg::max_abs(&(&one.compressed - &Array2::<C64>::eye(pi.rank()))) < 1e-10);
        assert!(t.hermitian_defect() < 1e-12);
    }

    #[test]
    fn closure_under_projection() {
        let k = 4;
        let pi = sphere_pi(k);
        let f = toeplitz_fn(&pi, &|p| p[0].sin() * p[1].cos()).unwrap();
        let g = toeplitz_fn(&pi, &|p| p[0].cos().powi(2)).unwrap();
        let prod = f.mul(&g).unwrap().node_kernel();
        let p = pi.dense_kernel().kernel;
        let w =
            Array2::from_diag(&Array1::from(pi.manifold.weights.iter().map(|w| C64::new(*w, 0.0)).collect::<Vec<_>>()));
        let sandwiched = p.dot(&w).dot(&prod).dot(&w).dot(&p);
        assert!(linalg::max_abs(&(&sandwiched - &prod)) < 1e-9 * linalg::max_abs(&prod));
    }

    #[test]
    fn sphere_covariant_and_recovery() {
        let ladder: Vec<Arc<Projector>> = [8u32, 10, 12, 14, 16, 18].iter().map(|&k| sphere_pi(k)).collect();
        let ts: Vec<ToeplitzOperator> = ladder.iter().map(|pi| toeplitz_fn(pi, &|p| p[0].cos()).unwrap()).collect();
        let probes = [[0.4, 0.3], [1.2, 2.0], [2.5, 5.0]];
        let s = covariant_symbol(&ts, &probes, 1).unwrap();
        for (j, x) in probes.iter().enumerate() {
            assert!((s.coefficients[0][j] - x[0].cos()).abs() < 5e-3, "{s:?}");
            assert!((s.coefficients[1][j] + 2.0 * x[0].cos()).abs() < 0.3, "{s:?}");
        }
        let pi = &ladder[0];
        let target = pi.manifold.sample(|p| p[0].cos());
        let r = contravariant_recover(pi, &target, 1e-12).unwrap();
        let k = pi.k as f64;
        for (g, t) in r.multiplier.iter().zip(&target) {
            assert!((g - t * (k + 2.0) / k).abs() < 1e-9);
        }
        assert!(r.contraction < 0.5);
    }

    #[test]
    fn commutator_with_unit_vanishes() {
        let k = 8;
        let m = Arc::new(torus_for(k).unwrap());
        let pi = Arc::new(projector_on(m, &Section::TorusCubic { c: 0.35 }, k).unwrap().1);
        let f = toeplitz_fn(&pi, &|p| (2.0 * PI * p[0]).cos()).unwrap();
        let one = toeplitz_fn(&pi, &|_| 1.0).unwrap();
        assert!(f.ik_commutator(&one).unwrap().norm().unwrap() < 1e-10);
        let n = normalized_toeplitz(&pi, &|_| 2.5).unwrap();
        assert!(linalg::max_abs(&(&n.compressed - &one.compressed.mapv(|z| z * 2.5))) < 1e-12);
        let fa = f.adjoint();
        assert!(linalg::max_abs(&(&fa.compressed - &f.compressed)) < 1e-12);
    }
}
