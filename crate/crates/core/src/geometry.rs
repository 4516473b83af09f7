//! Model phase spaces: flat torus, round sphere and a flat disk, with the section E.
//!
//! Charts: torus (x, y) ∈ [0,1)² with z = x + iy; sphere (θ, φ) with w = tan(θ/2)e^{iφ};
//! patch z = x + iy. Sections of L^k are functions in a fixed gauge per model:
//! Landau gauge on the torus (connection d + 2πik y dx, ψ(x, y+1) = e^{−2πikx}ψ(x, y)),
//! the unitary chart frame on the sphere (d − ik sin²(θ/2) dφ) and the symmetric gauge on the
//! patch (d + ik(y dx − x dy)). Curvature is −ikω in all three.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::legendre::GaussLegendre;
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];
pub type C64 = Complex64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelKind {
    Torus { n: usize },
    Sphere { n_theta: usize, n_phi: usize },
    BargmannPatch { radius: f64, rings: usize, sectors: usize },
}

/// Nodes permuted cyclically by a symmetry of the model: orbit `o`, position `j`.
#[derive(Clone, Debug)]
pub struct CyclicLayout {
    pub order: usize,
    pub orbits: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct ModelManifold {
    pub kind: ModelKind,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
}

pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("positive degree"));
    let mut pairs: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w)).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

pub fn build_torus(n: usize) -> Result<ModelManifold> {
    if n < 8 {
        return Err(Error::Invalid(format!("torus grid {n} < 8")));
    }
    let mut nodes = Vec::with_capacity(n * n);
    for b in 0..n {
        for a in 0..n {
            nodes.push([a as f64 / n as f64, b as f64 / n as f64]);
        }
    }
    let weights = vec![2.0 * PI / (n * n) as f64; n * n];
    Ok(ModelManifold { kind: ModelKind::Torus { n }, nodes, weights })
}

/// Gauss–Legendre in cos θ times a uniform φ grid, ω = ½ sin θ dθ∧dφ.
pub fn build_sphere(n_theta: usize, n_phi: usize) -> Result<ModelManifold> {
    if n_theta < 8 || n_phi < 3 {
        return Err(Error::Invalid(format!("sphere grid {n_theta}x{n_phi} too small")));
    }
    let (x, w) = gauss_legendre(n_theta);
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for i in (0..n_theta).rev() {
        let theta = x[i].acos();
        for j in 0..n_phi {
            nodes.push([theta, 2.0 * PI * j as f64 / n_phi as f64]);
            weights.push(0.5 * w[i] * 2.0 * PI / n_phi as f64);
        }
    }
    Ok(ModelManifold { kind: ModelKind::Sphere { n_theta, n_phi }, nodes, weights })
}

/// Disk |z| < radius with ω = 2 dx∧dy = i dz∧dz̄; polar Gauss–Legendre rings.
pub fn build_bargmann_patch(radius: f64, rings: usize, sectors: usize) -> Result<ModelManifold> {
    if radius.is_nan() || radius <= 0.0 || rings < 2 || sectors < 3 {
        return Err(Error::Invalid(format!("patch radius {radius}, grid {rings}x{sectors}")));
    }
    let (x, w) = gauss_legendre(rings);
    let mut nodes = Vec::with_capacity(rings * sectors);
    let mut weights = Vec::with_capacity(rings * sectors);
    for i in 0..rings {
        let r = 0.5 * radius * (x[i] + 1.0);
        let wr = 0.5 * radius * w[i] * r;
        for j in 0..sectors {
            let a = 2.0 * PI * j as f64 / sectors as f64;
            nodes.push([r * a.cos(), r * a.sin()]);
            weights.push(2.0 * wr * 2.0 * PI / sectors as f64);
        }
    }
    Ok(ModelManifold { kind: ModelKind::BargmannPatch { radius, rings, sectors }, nodes, weights })
}

/// Smallest grid on which the guard holds at level k, preferring sizes sharing factors with k.
pub fn torus_for(k: u32) -> Result<ModelManifold> {
    let min = ((3.0 * (2.0 * PI * k as f64).sqrt()).ceil() as usize).max(8);
    let want = (k as usize).min(4);
    let n = (min..).find(|n| gcd(*n, k as usize) >= want).unwrap();
    build_torus(n)
}

pub fn sphere_for(k: u32) -> Result<ModelManifold> {
    let n = ((18.0 * PI * k as f64).sqrt().ceil() as usize).max(k as usize + 2).max(8);
    build_sphere(n, n)
}

/// Patch of radius `scaled_radius/√k`, resolved to the guard at level k.
pub fn patch_for(k: u32, scaled_radius: f64) -> Result<ModelManifold> {
    if scaled_radius < 4.0 {
        return Err(Error::Invalid(format!("scaled patch radius {scaled_radius} < 4")));
    }
    let rings = ((18.0f64).sqrt() * scaled_radius).ceil() as usize + 1;
    let sectors = (PI * rings as f64).ceil() as usize;
    build_bargmann_patch(scaled_radius / (k as f64).sqrt(), rings, sectors)
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl ModelManifold {
    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::Torus { .. } => "torus",
            ModelKind::Sphere { .. } => "sphere",
            ModelKind::BargmannPatch { .. } => "bargmann-patch",
        }
    }

    /// Complex dimension.
    pub fn n(&self) -> usize {
        1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn exact_volume(&self) -> f64 {
        match self.kind {
            ModelKind::Torus { .. } | ModelKind::Sphere { .. } => 2.0 * PI,
            ModelKind::BargmannPatch { radius, .. } => 2.0 * PI * radius * radius,
        }
    }

    /// ω = density · dx¹∧dx² in chart coordinates.
    pub fn omega_density(&self, p: Point) -> f64 {
        match self.kind {
            ModelKind::Torus { .. } => 2.0 * PI,
            ModelKind::Sphere { .. } => 0.5 * p[0].sin(),
            ModelKind::BargmannPatch { .. } => 2.0,
        }
    }

    /// g = ω(·, j·) in chart coordinates.
    pub fn metric(&self, p: Point) -> [[f64; 2]; 2] {
        match self.kind {
            ModelKind::Torus { .. } => [[2.0 * PI, 0.0], [0.0, 2.0 * PI]],
            ModelKind::Sphere { .. } => [[0.5, 0.0], [0.0, 0.5 * p[0].sin().powi(2)]],
            ModelKind::BargmannPatch { .. } => [[2.0, 0.0], [0.0, 2.0]],
        }
    }

    /// Real coefficients a with connection form A = ik a·dx on L^k.
    pub fn connection(&self, p: Point) -> [f64; 2] {
        match self.kind {
            ModelKind::Torus { .. } => [2.0 * PI * p[1], 0.0],
            ModelKind::Sphere { .. } => [0.0, -(0.5 * p[0]).sin().powi(2)],
            ModelKind::BargmannPatch { .. } => [p[1], -p[0]],
        }
    }

    pub fn g_distance(&self, p: Point, q: Point) -> f64 {
        match self.kind {
            ModelKind::Torus { .. } => {
                let dx = wrap(p[0] - q[0]);
                let dy = wrap(p[1] - q[1]);
                (2.0 * PI).sqrt() * (dx * dx + dy * dy).sqrt()
            }
            ModelKind::Sphere { .. } => {
                let c = p[0].cos() * q[0].cos() + p[0].sin() * q[0].sin() * (p[1] - q[1]).cos();
                c.clamp(-1.0, 1.0).acos() / 2f64.sqrt()
            }
            ModelKind::BargmannPatch { .. } => 2f64.sqrt() * ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt(),
        }
    }

    pub fn injectivity_radius(&self) -> f64 {
        match self.kind {
            ModelKind::Torus { .. } => 0.5 * (2.0 * PI).sqrt(),
            ModelKind::Sphere { .. } => PI / 2f64.sqrt(),
            ModelKind::BargmannPatch { radius, .. } => 2f64.sqrt() * radius,
        }
    }

    /// √(vol/N) in metric units.
    pub fn mean_spacing(&self) -> f64 {
        (self.volume() / self.len() as f64).sqrt()
    }

    /// Finite-difference step in chart units: an eighth of the local node spacing.
    pub fn fd_step(&self) -> f64 {
        match self.kind {
            ModelKind::Torus { n } => 1.0 / (8.0 * n as f64),
            ModelKind::Sphere { n_theta, n_phi } => PI / (8.0 * n_theta.max(n_phi) as f64),
            ModelKind::BargmannPatch { radius, rings, .. } => radius / (8.0 * rings as f64),
        }
    }

    /// Requires six nodes per Gaussian width 2k^{−1/2}.
    pub fn grid_guard(&self, k: u32) -> Result<()> {
        let limit = 2.0 / (k as f64).sqrt() / 6.0;
        let h = self.mean_spacing();
        if h > limit * (1.0 + 1e-12) {
            return Err(Error::GridGuard(format!(
                "{} with {} nodes: spacing {h:.4} exceeds {limit:.4} at k = {k}",
                self.name(),
                self.len()
            )));
        }
        Ok(())
    }

    /// Cyclic node symmetry commuting with the level-k kernels, if any.
    pub fn cyclic_layout(&self, k: u32) -> Option<CyclicLayout> {
        match self.kind {
            ModelKind::Torus { n } => {
                let g = gcd(n, k as usize);
                if g < 2 {
                    return None;
                }
                let step = n / g;
                let mut orbits = Vec::with_capacity(n * step);
                for b in 0..n {
                    for a0 in 0..step {
                        orbits.push((0..g).map(|j| b * n + a0 + j * step).collect());
                    }
                }
                Some(CyclicLayout { order: g, orbits })
            }
            ModelKind::Sphere { n_theta: rows, n_phi: cols }
            | ModelKind::BargmannPatch { rings: rows, sectors: cols, .. } => {
                let orbits = (0..rows).map(|i| (0..cols).map(|j| i * cols + j).collect()).collect();
                Some(CyclicLayout { order: cols, orbits })
            }
        }
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(p, w)| f(*p) * w).sum()
    }

    pub fn sample(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|p| f(*p)).collect()
    }
}

fn wrap(t: f64) -> f64 {
    t - t.round()
}

/// Realizations of the section E of L⊠L̄.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Section {
    /// Gaussian parallel transport along straight segments, lattice translates blended by a
    /// smooth partition of unity.
    TorusFlat,
    /// `TorusFlat` times exp(i c Re(u)|u|²) with u a normal coordinate, cut off away from 0.
    TorusCubic {
        c: f64,
    },
    Sphere,
    Patch,
}

const BLEND: f64 = 0.1;

fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / s).exp();
    let b = (-1.0 / (1.0 - s)).exp();
    a / (a + b)
}

/// One-dimensional partition of unity: Σ_m blend(t − m) = 1.
fn blend(t: f64) -> f64 {
    smooth_step((0.5 + BLEND - t.abs()) / (2.0 * BLEND))
}

const CUBIC_INNER: f64 = 0.25;
const CUBIC_OUTER: f64 = 0.45;

/// Odd periodic phase c·Re(u)|u|² with u = √π ṽ, ṽ the minimal image of v, cut off smoothly
/// between |ṽ| = 0.25 and 0.45.
pub fn cubic_phase(c: f64, v: Point) -> f64 {
    let (a, b) = (wrap(v[0]), wrap(v[1]));
    let r2 = a * a + b * b;
    let cut = smooth_step((CUBIC_OUTER - r2.sqrt()) / (CUBIC_OUTER - CUBIC_INNER));
    if cut == 0.0 {
        return 0.0;
    }
    c * PI.powf(1.5) * a * r2 * cut
}

/// log of the Landau-gauge translate term K̃(z, w+λ)·e^{−2πi n x_w} at level 1.
fn torus_term_log(z: Point, w: Point, m: f64, n: f64) -> C64 {
    let (xz, yz) = (z[0], z[1]);
    let (xw, yw) = (w[0] + m, w[1] + n);
    let zc = C64::new(xz, yz);
    let wc = C64::new(xw, yw);
    let flat = PI * (zc * wc.conj() - 0.5 * zc.norm_sqr() - 0.5 * wc.norm_sqr());
    flat + C64::new(0.0, -PI * xz * yz + PI * xw * yw - 2.0 * PI * n * w[0])
}

fn torus_power(z: Point, w: Point, k: u32) -> C64 {
    let v = [z[0] - w[0], z[1] - w[1]];
    let kf = k as f64;
    let mut acc = C64::new(0.0, 0.0);
    let (m0, n0) = (v[0].round(), v[1].round());
    for dm in -1..=1 {
        let m = m0 + dm as f64;
        let bx = blend(v[0] - m);
        if bx == 0.0 {
            continue;
        }
        for dn in -1..=1 {
            let n = n0 + dn as f64;
            let by = blend(v[1] - n);
            if by == 0.0 {
                continue;
            }
            acc += bx * by * (kf * torus_term_log(z, w, m, n)).exp();
        }
    }
    acc
}

impl Section {
    pub fn default_for(kind: &ModelKind) -> Section {
        match kind {
            ModelKind::Torus { .. } => Section::TorusCubic { c: DEFAULT_CUBIC },
            ModelKind::Sphere { .. } => Section::Sphere,
            ModelKind::BargmannPatch { .. } => Section::Patch,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Section::TorusFlat => "torus-flat".into(),
            Section::TorusCubic { c } => format!("torus-cubic({c})"),
            Section::Sphere => "sphere".into(),
            Section::Patch => "patch".into(),
        }
    }

    pub fn compatible(&self, m: &ModelManifold) -> bool {
        matches!(
            (self, &m.kind),
            (Section::TorusFlat | Section::TorusCubic { .. }, ModelKind::Torus { .. })
                | (Section::Sphere, ModelKind::Sphere { .. })
                | (Section::Patch, ModelKind::BargmannPatch { .. })
        )
    }

    pub fn eval(&self, x: Point, y: Point) -> C64 {
        self.power(x, y, 1)
    }

    /// The level-k kernel factor E^k(x, y). On the torus the lattice blend is applied to the
    /// translates of E^k, which keeps magnetic translations by (1/k)ℤ² exact symmetries.
    pub fn power(&self, x: Point, y: Point, k: u32) -> C64 {
        let kf = k as f64;
        match self {
            Section::TorusFlat => torus_power(x, y, k),
            Section::TorusCubic { c } => {
                let t = cubic_phase(*c, [x[0] - y[0], x[1] - y[1]]);
                torus_power(x, y, k) * C64::from_polar(1.0, kf * t)
            }
            Section::Sphere => {
                let (a, b) = (0.5 * x[0], 0.5 * y[0]);
                let e = a.cos() * b.cos() + a.sin() * b.sin() * C64::from_polar(1.0, x[1] - y[1]);
                e.powu(k)
            }
            Section::Patch => {
                let z = C64::new(x[0], x[1]);
                let w = C64::new(y[0], y[1]);
                (kf * (z * w.conj() - 0.5 * z.norm_sqr() - 0.5 * w.norm_sqr())).exp()
            }
        }
    }
}

pub const DEFAULT_CUBIC: f64 = 0.35;

/// Sampled E on the node set of a manifold.
#[derive(Clone, Debug)]
pub struct PrequantumKernel {
    pub manifold: Arc<ModelManifold>,
    pub section: Section,
    pub samples: Array2<C64>,
}

impl PrequantumKernel {
    /// φ = −2 ln|E|.
    pub fn phi(&self) -> Array2<f64> {
        self.samples.mapv(|e| -2.0 * e.norm().ln())
    }
}

pub fn section_e(manifold: Arc<ModelManifold>, section: Section) -> Result<PrequantumKernel> {
    if !section.compatible(&manifold) {
        return Err(Error::Invalid(format!("section {} on {}", section.name(), manifold.name())));
    }
    let n = manifold.len();
    let samples = Array2::from_shape_fn((n, n), |(i, j)| section.eval(manifold.nodes[i], manifold.nodes[j]));
    let k = PrequantumKernel { manifold, section, samples };
    let h = hermitian_defect(&k.samples);
    if h > 1e-10 {
        return Err(Error::Invalid(format!("gauge inconsistency: hermitian defect {h:e}")));
    }
    Ok(k)
}

fn hermitian_defect(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut d: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            d = d.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    d
}

#[derive(Clone, Debug, Serialize)]
pub struct EConditionReport {
    pub diagonal_defect: f64,
    pub hermitian_defect: f64,
    pub max_offdiagonal_modulus: f64,
    pub hessian_defect: f64,
    pub hessian_step: f64,
    pub violations: Vec<String>,
}

impl EConditionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks E(x,x) = 1, Hermitian symmetry, |E| < 1 off the diagonal, and the normal Hessian
/// of φ = −2 ln|E| against 2g (φ'' = 4 g(X,X) along (X, −X)).
pub fn check_e_conditions(k: &PrequantumKernel, step: Option<f64>, hessian_tol: f64) -> EConditionReport {
    let m = &k.manifold;
    let n = m.len();
    let mut violations = Vec::new();
    let diagonal_defect = (0..n).map(|i| (k.samples[[i, i]] - 1.0).norm()).fold(0.0, f64::max);
    if diagonal_defect > 1e-12 {
        violations.push(format!("diagonal differs from 1 by {diagonal_defect:e}"));
    }
    let hermitian_defect = hermitian_defect(&k.samples);
    if hermitian_defect > 1e-10 {
        violations.push(format!("hermitian defect {hermitian_defect:e}"));
    }
    let mut max_off: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                max_off = max_off.max(k.samples[[i, j]].norm());
            }
        }
    }
    if max_off >= 1.0 {
        violations.push(format!("|E| = {max_off} off the diagonal"));
    }
    let h = step.unwrap_or_else(|| m.fd_step());
    let stride = (n / 200).max(1);
    let mut hess: f64 = 0.0;
    for i in (0..n).step_by(stride) {
        let p = m.nodes[i];
        let g = m.metric(p);
        for (dir, gxx) in [([1.0, 0.0], g[0][0]), ([0.0, 1.0], g[1][1])] {
            let phi = |s: f64| {
                let a = [p[0] + s * dir[0], p[1] + s * dir[1]];
                let b = [p[0] - s * dir[0], p[1] - s * dir[1]];
                -2.0 * k.section.eval(a, b).norm().ln()
            };
            let second = (phi(h) - 2.0 * phi(0.0) + phi(-h)) / (h * h);
            hess = hess.max((second - 4.0 * gxx).abs() / (4.0 * gxx));
        }
    }
    if hess > hessian_tol {
        violations.push(format!("normal Hessian defect {hess:e}"));
    }
    EConditionReport {
        diagonal_defect,
        hermitian_defect,
        max_offdiagonal_modulus: max_off,
        hessian_defect: hess,
        hessian_step: h,
        violations,
    }
}

/// X with ι_X ω = df, evaluated by centered differences with step h.
pub fn hamiltonian_vector(m: &ModelManifold, f: &dyn Fn(Point) -> f64, p: Point, h: f64) -> [f64; 2] {
    let d0 = (f([p[0] + h, p[1]]) - f([p[0] - h, p[1]])) / (2.0 * h);
    let d1 = (f([p[0], p[1] + h]) - f([p[0], p[1] - h])) / (2.0 * h);
    let rho = m.omega_density(p);
    [d1 / rho, -d0 / rho]
}

#[derive(Clone, Debug)]
pub struct HamiltonianField {
    pub f: Vec<f64>,
    pub x: Vec<[f64; 2]>,
    pub step: f64,
    pub max_divergence: f64,
    /// max |ι_X ω − df| over nodes, from an independent coarser stencil.
    pub max_contraction_defect: f64,
}

pub fn hamiltonian_field(m: &ModelManifold, f: &dyn Fn(Point) -> f64) -> HamiltonianField {
    let h = m.fd_step();
    let mut xs = Vec::with_capacity(m.len());
    let mut max_div: f64 = 0.0;
    let mut max_con: f64 = 0.0;
    for &p in &m.nodes {
        let x = hamiltonian_vector(m, f, p, h);
        let flux = |q: Point, axis: usize| m.omega_density(q) * hamiltonian_vector(m, f, q, h)[axis];
        let div = ((flux([p[0] + h, p[1]], 0) - flux([p[0] - h, p[1]], 0))
            + (flux([p[0], p[1] + h], 1) - flux([p[0], p[1] - h], 1)))
            / (2.0 * h * m.omega_density(p));
        max_div = max_div.max(div.abs());
        let rho = m.omega_density(p);
        let h2 = 2.0 * h;
        let d0 = (f([p[0] + h2, p[1]]) - f([p[0] - h2, p[1]])) / (2.0 * h2);
        let d1 = (f([p[0], p[1] + h2]) - f([p[0], p[1] - h2])) / (2.0 * h2);
        max_con = max_con.max((-rho * x[1] - d0).abs()).max((rho * x[0] - d1).abs());
        xs.push(x);
    }
    HamiltonianField { f: m.sample(f), x: xs, step: h, max_divergence: max_div, max_contraction_defect: max_con }
}

/// {f, g} = ω(X_f, X_g) = −X_f·g.
pub fn poisson_bracket(m: &ModelManifold, f: &dyn Fn(Point) -> f64, g: &dyn Fn(Point) -> f64) -> Vec<f64> {
    let h = m.fd_step();
    m.nodes.iter().map(|&p| poisson_at(m, f, g, p, h)).collect()
}

pub fn poisson_at(m: &ModelManifold, f: &dyn Fn(Point) -> f64, g: &dyn Fn(Point) -> f64, p: Point, h: f64) -> f64 {
    let x = hamiltonian_vector(m, f, p, h);
    let g0 = (g([p[0] + h, p[1]]) - g([p[0] - h, p[1]])) / (2.0 * h);
    let g1 = (g([p[0], p[1] + h]) - g([p[0], p[1] - h])) / (2.0 * h);
    -(x[0] * g0 + x[1] * g1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volumes_and_quadrature() {
        let t = build_torus(16).unwrap();
        assert_eq!(t.len(), 256);
        assert!((t.volume() - 2.0 * PI).abs() < 1e-12);
        assert!(t.integrate(|p| (2.0 * PI * p[0]).cos() * (2.0 * PI * p[1]).sin()).abs() < 1e-12);
        let s = build_sphere(12, 16).unwrap();
        assert!((s.volume() - 2.0 * PI).abs() < 1e-10);
        let y20 = |p: Point| 3.0 * p[0].cos().powi(2) - 1.0;
        assert!(s.integrate(y20).abs() < 1e-10);
        assert!(s.integrate(|p| p[0].sin() * p[1].cos()).abs() < 1e-10);
        let d = build_bargmann_patch(2.0, 12, 40).unwrap();
        assert!((d.volume() - d.exact_volume()).abs() < 1e-10);
        assert!(build_torus(4).is_err());
    }

    #[test]
    fn metric_and_brackets_on_torus() {
        let t = build_torus(16).unwrap();
        assert_eq!(t.metric([0.3, 0.1]), [[2.0 * PI, 0.0], [0.0, 2.0 * PI]]);
        let x = |p: Point| p[0];
        let y = |p: Point| p[1];
        let b = poisson_bracket(&t, &x, &y);
        assert!(b.iter().all(|v| (v - 1.0 / (2.0 * PI)).abs() < 1e-12));
        let f = |p: Point| (2.0 * PI * p[0]).cos();
        let g = |p: Point| (2.0 * PI * p[1]).cos();
        let field = hamiltonian_field(&t, &f);
        for (p, v) in t.nodes.iter().zip(&field.x) {
            assert!(v[0].abs() < 1e-12);
            assert!((v[1] - (2.0 * PI * p[0]).sin()).abs() < 1e-3);
        }
        assert!(field.max_divergence < 1e-6);
        let fg = poisson_bracket(&t, &f, &g);
        for (p, v) in t.nodes.iter().zip(&fg) {
            let exact = 2.0 * PI * (2.0 * PI * p[0]).sin() * (2.0 * PI * p[1]).sin();
            assert!((v - exact).abs() < 1e-2);
        }
        let ff = poisson_bracket(&t, &f, &f);
        assert!(ff.iter().all(|v| v.abs() < 1e-12));
        let one = |_: Point| 1.0;
        assert!(poisson_bracket(&t, &f, &one).iter().all(|v| v.abs() < 1e-12));
        let zero_field = hamiltonian_field(&t, &one);
        assert!(zero_field.x.iter().all(|v| v[0] == 0.0 && v[1] == 0.0));
    }

    #[test]
    fn sphere_rotation_field() {
        let s = build_sphere(10, 12).unwrap();
        let f = |p: Point| p[0].cos();
        let field = hamiltonian_field(&s, &f);
        for v in &field.x {
            assert!(v[0].abs() < 1e-9);
            assert!((v[1] - 2.0).abs() < 1e-3);
        }
        assert!(field.max_divergence < 1e-4);
    }

    #[test]
    fn sections_satisfy_conditions() {
        let t = Arc::new(build_torus(12).unwrap());
        for sec in [Section::TorusFlat, Section::TorusCubic { c: 0.35 }] {
            let e = section_e(t.clone(), sec).unwrap();
            let r = check_e_conditions(&e, None, 1e-2);
            assert!(r.passed(), "{:?}", r.violations);
        }
        let s = Arc::new(build_sphere(8, 8).unwrap());
        let r = check_e_conditions(&section_e(s, Section::Sphere).unwrap(), None, 1e-3);
        assert!(r.passed(), "{:?}", r.violations);
        let d = Arc::new(build_bargmann_patch(4.0, 6, 20).unwrap());
        let e = section_e(d, Section::Patch).unwrap();
        let r = check_e_conditions(&e, Some(1e-3), 1e-6);
        assert!(r.passed(), "{:?}", r.violations);
        let mut bad = e.clone();
        bad.samples[[0, 5]] = C64::new(1.0, 0.0);
        bad.samples[[5, 0]] = C64::new(1.0, 0.0);
        assert!(!check_e_conditions(&bad, Some(1e-3), 1e-6).passed());
        assert!(section_e(t, Section::Sphere).is_err());
    }

    #[test]
    fn torus_section_is_quasi_periodic() {
        for k in [1, 3] {
            let sec = Section::TorusCubic { c: 0.35 };
            let (z, w) = ([0.31, 0.77], [0.62, 0.12]);
            let e = sec.power(z, w, k);
            let shifted_x = sec.power([z[0] + 1.0, z[1]], w, k);
            assert!((e - shifted_x).norm() < 1e-12);
            let shifted_y = sec.power([z[0], z[1] + 1.0], w, k);
            let phase = C64::from_polar(1.0, -2.0 * PI * k as f64 * z[0]);
            assert!((shifted_y - phase * e).norm() < 1e-12);
        }
    }

    #[test]
    fn nearby_modulus_follows_distance() {
        let t = build_torus(32).unwrap();
        let sec = Section::TorusFlat;
        let (p, q) = (t.nodes[0], t.nodes[33]);
        let d = t.g_distance(p, q);
        let e = sec.eval(p, q).norm();
        assert!((e / (-d * d / 4.0).exp() - 1.0).abs() < 1e-3);
        let far = Section::Sphere.eval([0.1, 0.0], [PI - 0.1, PI]).norm();
        assert!(far < 0.1);
    }

    #[test]
    fn guard_and_layouts() {
        let t = torus_for(16).unwrap();
        assert!(t.grid_guard(16).is_ok());
        assert!(build_torus(16).unwrap().grid_guard(16).is_err());
        let lay = t.cyclic_layout(16).unwrap();
        assert_eq!(lay.order, 16);
        assert_eq!(lay.orbits.len() * lay.order, t.len());
        assert!(sphere_for(24).unwrap().grid_guard(24).is_ok());
        assert!(patch_for(32, 6.0).unwrap().grid_guard(32).is_ok());
    }
}
