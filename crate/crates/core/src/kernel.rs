//! Discretized integral operators (Pψ)_i = Σ_j K_ij w_j ψ_j with kernels (k/2π) E^k f.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::cq_to_c64;
use crate::geometry::{patch_for, ModelKind, ModelManifold, Point, Section, C64};
use crate::laplace::loglog_slope;
use crate::linalg;
use crate::star::{self, FormalSymbol, GradedSymbol};

#[derive(Clone, Debug)]
pub struct KernelOperator {
    pub manifold: Arc<ModelManifold>,
    pub k: u32,
    pub kernel: Array2<C64>,
    pub symbol: Option<GradedSymbol>,
    pub section: Option<Section>,
}

impl KernelOperator {
    pub fn new(manifold: Arc<ModelManifold>, k: u32, kernel: Array2<C64>) -> Result<Self> {
        let n = manifold.len();
        if kernel.dim() != (n, n) {
            return Err(Error::Shape(format!("kernel {:?} on {n} nodes", kernel.dim())));
        }
        Ok(KernelOperator { manifold, k, kernel, symbol: None, section: None })
    }

    /// The discretized identity: K_ii = 1/w_i.
    pub fn identity(manifold: Arc<ModelManifold>, k: u32) -> Self {
        let n = manifold.len();
        let mut kernel = Array2::zeros((n, n));
        for i in 0..n {
            kernel[[i, i]] = C64::new(1.0 / manifold.weights[i], 0.0);
        }
        KernelOperator { manifold, k, kernel, symbol: None, section: None }
    }

    pub fn len(&self) -> usize {
        self.kernel.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.kernel.is_empty()
    }

    /// W^{1/2} K W^{1/2}, the matrix on the weighted sequence space.
    pub fn weighted(&self) -> Array2<C64> {
        let s: Vec<f64> = self.manifold.weights.iter().map(|w| w.sqrt()).collect();
        let mut a = self.kernel.clone();
        for ((i, j), v) in a.indexed_iter_mut() {
            *v *= s[i] * s[j];
        }
        a
    }

    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let wpsi: Array1<C64> = psi.iter().zip(&self.manifold.weights).map(|(p, w)| p * w).collect();
        self.kernel.dot(&wpsi).to_vec()
    }

    pub fn hermitian_defect(&self) -> f64 {
        linalg::hermitian_defect(&self.kernel)
    }

    pub fn scale(&self) -> f64 {
        self.k as f64 / (2.0 * PI)
    }
}

fn check_level(m: &ModelManifold, k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::Invalid("k must be positive".into()));
    }
    m.grid_guard(k)
}

/// K = (k/2π) E^k ⊙ f0.
pub fn kernel_from_symbol(
    manifold: Arc<ModelManifold>,
    section: &Section,
    k: u32,
    f0: &dyn Fn(Point, Point) -> C64,
) -> Result<KernelOperator> {
    check_level(&manifold, k)?;
    if !section.compatible(&manifold) {
        return Err(Error::Invalid(format!("section {} on {}", section.name(), manifold.name())));
    }
    let n = manifold.len();
    let c = k as f64 / (2.0 * PI);
    let nodes = &manifold.nodes;
    let kernel =
        Array2::from_shape_fn((n, n), |(i, j)| c * section.power(nodes[i], nodes[j], k) * f0(nodes[i], nodes[j]));
    Ok(KernelOperator { manifold, k, kernel, symbol: None, section: Some(section.clone()) })
}

/// Value of a rank-one symbol r(ℏ, z, z̄) at ℏ = 1/k on the pair (x, y) of the flat patch,
/// with z ↦ y − x and z̄ ↦ conj(x − y).
pub fn symbol_coefficient(sym: &FormalSymbol, k: u32, x: Point, y: Point) -> C64 {
    ScalarSymbol::new(sym, k).eval(x, y)
}

/// A rank-one symbol with coefficients converted to floating point at a fixed level.
struct ScalarSymbol {
    terms: Vec<(C64, u32, u32)>,
}

impl ScalarSymbol {
    fn new(sym: &FormalSymbol, k: u32) -> Self {
        let h = 1.0 / k as f64;
        let terms =
            sym.terms().map(|(m, c)| (cq_to_c64(c.get(0, 0)) * h.powi(m.hbar), m.alpha[0], m.beta[0])).collect();
        ScalarSymbol { terms }
    }

    fn eval(&self, x: Point, y: Point) -> C64 {
        let z = C64::new(y[0] - x[0], y[1] - x[1]);
        let zb = C64::new(x[0] - y[0], y[1] - x[1]);
        self.terms.iter().map(|(v, a, b)| v * z.powu(*a) * zb.powu(*b)).sum()
    }
}

fn check_patch_symbol(manifold: &ModelManifold, sym: &FormalSymbol) -> Result<()> {
    if !matches!(manifold.kind, ModelKind::BargmannPatch { .. }) {
        return Err(Error::Invalid("symbol realization needs the flat patch".into()));
    }
    if sym.n() != 1 || sym.r() != 1 {
        return Err(Error::Invalid(format!("symbol with n = {}, r = {} on the patch", sym.n(), sym.r())));
    }
    Ok(())
}

/// Kernel (k/2π) E^k r(1/k, y − x, conj(x − y)) carrying its declared symbol.
pub fn patch_symbol_kernel(manifold: Arc<ModelManifold>, k: u32, sym: &GradedSymbol) -> Result<KernelOperator> {
    check_patch_symbol(&manifold, sym.symbol())?;
    let s = ScalarSymbol::new(sym.symbol(), k);
    let mut op = kernel_from_symbol(manifold, &Section::Patch, k, &|x, y| s.eval(x, y))?;
    op.symbol = Some(sym.clone());
    Ok(op)
}

fn same_space(p: &KernelOperator, q: &KernelOperator) -> Result<()> {
    if !Arc::ptr_eq(&p.manifold, &q.manifold) && p.manifold.nodes != q.manifold.nodes {
        return Err(Error::Invalid("operators live on different node sets".into()));
    }
    if p.k != q.k {
        return Err(Error::Invalid(format!("levels differ: {} vs {}", p.k, q.k)));
    }
    Ok(())
}

/// K_PQ = K_P diag(w) K_Q; the declared symbol is the star product when both are declared.
pub fn compose(p: &KernelOperator, q: &KernelOperator) -> Result<KernelOperator> {
    same_space(p, q)?;
    let mut left = p.kernel.clone();
    for ((_, j), v) in left.indexed_iter_mut() {
        *v *= p.manifold.weights[j];
    }
    let kernel = left.dot(&q.kernel);
    let symbol = match (&p.symbol, &q.symbol) {
        (Some(a), Some(b)) => Some(a.star(b)?),
        _ => None,
    };
    Ok(KernelOperator { manifold: p.manifold.clone(), k: p.k, kernel, symbol, section: None })
}

/// Rows `rows` and columns `cols` of K_P diag(w) K_Q.
pub fn compose_block(p: &KernelOperator, q: &KernelOperator, rows: &[usize], cols: &[usize]) -> Result<Array2<C64>> {
    same_space(p, q)?;
    let n = p.len();
    let w = &p.manifold.weights;
    let left = Array2::from_shape_fn((rows.len(), n), |(a, j)| p.kernel[[rows[a], j]] * w[j]);
    let right = Array2::from_shape_fn((n, cols.len()), |(j, b)| q.kernel[[j, cols[b]]]);
    Ok(left.dot(&right))
}

pub fn adjoint_op(p: &KernelOperator) -> KernelOperator {
    KernelOperator {
        manifold: p.manifold.clone(),
        k: p.k,
        kernel: linalg::adjoint(&p.kernel),
        symbol: p.symbol.as_ref().map(|s| s.adjoint()),
        section: p.section.clone(),
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormReport {
    pub spectral: f64,
    pub schur: f64,
}

/// Spectral norm on the weighted space and the Schur bound √(max row sum · max column sum).
pub fn op_norm(p: &KernelOperator) -> Result<NormReport> {
    let spectral = linalg::spectral_norm(&p.weighted())?;
    let w = &p.manifold.weights;
    let n = p.len();
    let mut rows = vec![0.0; n];
    let mut cols = vec![0.0; n];
    for ((i, j), v) in p.kernel.indexed_iter() {
        let a = v.norm();
        rows[i] += a * w[j];
        cols[j] += a * w[i];
    }
    let r = rows.iter().cloned().fold(0.0, f64::max);
    let c = cols.iter().cloned().fold(0.0, f64::max);
    Ok(NormReport { spectral, schur: (r * c).sqrt() })
}

/// (2π/k) K(x_i, x_i).
pub fn covariant_diagonal(p: &KernelOperator) -> Vec<C64> {
    let s = 1.0 / p.scale();
    (0..p.len()).map(|i| p.kernel[[i, i]] * s).collect()
}

/// max |K(x, y)| / (k/2π) over pairs at g-distance greater than δ.
pub fn off_diagonal_decay(p: &KernelOperator, delta: f64) -> Result<f64> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::Invalid(format!("radius {delta} must be positive")));
    }
    let m = &p.manifold;
    let mut worst: f64 = 0.0;
    for ((i, j), v) in p.kernel.indexed_iter() {
        if m.g_distance(m.nodes[i], m.nodes[j]) > delta {
            worst = worst.max(v.norm());
        }
    }
    Ok(worst / p.scale())
}

#[derive(Clone, Debug, Serialize)]
pub struct SymbolProductRow {
    pub k: u32,
    pub diagonal: C64,
    pub prediction: C64,
    pub main: f64,
    pub defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymbolProductReport {
    pub left: String,
    pub right: String,
    pub product: String,
    pub grade: u32,
    pub rows: Vec<SymbolProductRow>,
    /// Log-log slope of the relative defect; `None` when every defect sits at the floor.
    pub fitted_order: Option<f64>,
    pub floor: f64,
}

impl SymbolProductReport {
    pub fn passed(&self, required: f64) -> bool {
        let at_floor = self.rows.iter().all(|r| r.defect <= self.floor);
        at_floor || self.fitted_order.is_some_and(|s| s <= required)
    }
}

pub const SYMBOL_FLOOR: f64 = 1e-9;

const INNER_SAMPLES: usize = 160;

/// Composes patch realizations of two symbols and compares the composed kernel on an inner
/// block of radius `inner/√k` around the origin with the realization of their star product.
pub fn verify_symbol_product(
    sp: &GradedSymbol,
    sq: &GradedSymbol,
    ladder: &[u32],
    scaled_radius: f64,
    inner: f64,
) -> Result<SymbolProductReport> {
    let prod = sp.star(sq)?;
    let mut rows = Vec::with_capacity(ladder.len());
    for &k in ladder {
        let m = Arc::new(patch_for(k, scaled_radius)?);
        m.grid_guard(k)?;
        check_patch_symbol(&m, sp.symbol())?;
        check_patch_symbol(&m, sq.symbol())?;
        let r = inner / (k as f64).sqrt();
        let inside: Vec<usize> = (0..m.len()).filter(|&i| m.nodes[i][0].hypot(m.nodes[i][1]) <= r).collect();
        let stride = inside.len().div_ceil(INNER_SAMPLES).max(1);
        let idx: Vec<usize> = inside.into_iter().step_by(stride).collect();
        let n = m.len();
        let c = k as f64 / (2.0 * PI);
        let (cp, cq, cpq) =
            (ScalarSymbol::new(sp.symbol(), k), ScalarSymbol::new(sq.symbol(), k), ScalarSymbol::new(prod.symbol(), k));
        let kern = |s: &ScalarSymbol, x: Point, y: Point| c * Section::Patch.power(x, y, k) * s.eval(x, y);
        let left =
            Array2::from_shape_fn((idx.len(), n), |(a, j)| kern(&cp, m.nodes[idx[a]], m.nodes[j]) * m.weights[j]);
        let right = Array2::from_shape_fn((n, idx.len()), |(j, b)| kern(&cq, m.nodes[j], m.nodes[idx[b]]));
        let got = left.dot(&right);
        let mut main: f64 = 0.0;
        let mut err: f64 = 0.0;
        for a in 0..idx.len() {
            for b in 0..idx.len() {
                let want = kern(&cpq, m.nodes[idx[a]], m.nodes[idx[b]]);
                main = main.max(want.norm());
                err = err.max((got[[a, b]] - want).norm());
            }
        }
        let centre = (0..idx.len())
            .min_by(|&a, &b| {
                let na = m.nodes[idx[a]][0].hypot(m.nodes[idx[a]][1]);
                let nb = m.nodes[idx[b]][0].hypot(m.nodes[idx[b]][1]);
                na.partial_cmp(&nb).unwrap()
            })
            .ok_or_else(|| Error::Invalid("empty inner block".into()))?;
        let x = m.nodes[idx[centre]];
        let scale = (k as f64).powf(-((sp.grade() + sq.grade()) as f64) / 2.0) * c;
        rows.push(SymbolProductRow {
            k,
            diagonal: got[[centre, centre]] / c,
            prediction: kern(&cpq, x, x) / c,
            main: main.max(scale),
            defect: err / main.max(scale),
        });
    }
    let samples: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.defect > SYMBOL_FLOOR).map(|r| (r.k as f64, r.defect)).collect();
    let fitted_order = if samples.len() >= 4 { Some(loglog_slope(&samples)?.slope) } else { None };
    Ok(SymbolProductReport {
        left: star::format_inline(sp.symbol()),
        right: star::format_inline(sq.symbol()),
        product: star::format_inline(prod.symbol()),
        grade: sp.grade() + sq.grade(),
        rows,
        fitted_order,
        floor: SYMBOL_FLOOR,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{cq_int, QMatrix};
    use crate::geometry::{build_bargmann_patch, build_torus, torus_for};
    use crate::star::make_symbol;

    fn mono(l: i32, a: u32, b: u32) -> GradedSymbol {
        let s = make_symbol(1, 1, vec![(l, vec![a], vec![b], QMatrix::scalar(1, cq_int(1)))]).unwrap();
        GradedSymbol::from_homogeneous(s).unwrap()
    }

    #[test]
    fn assembly_and_guard() {
        let t = Arc::new(torus_for(16).unwrap());
        let p = kernel_from_symbol(t.clone(), &Section::TorusFlat, 16, &|_, _| C64::new(1.0, 0.0)).unwrap();
        for d in covariant_diagonal(&p) {
            assert!((d - 1.0).norm() < 1e-14);
        }
        assert!(p.hermitian_defect() < 1e-12);
        let coarse = Arc::new(build_torus(16).unwrap());
        let err = kernel_from_symbol(coarse, &Section::TorusFlat, 16, &|_, _| C64::new(1.0, 0.0));
        assert!(matches!(err, Err(Error::GridGuard(_))));
        let row: Vec<f64> = (0..t.len()).map(|j| p.kernel[[0, j]].norm() / p.scale()).collect();
        let j = (1..t.len()).find(|&j| (row[j] - (-1.0f64).exp()).abs() < 0.08).unwrap();
        let d = t.g_distance(t.nodes[0], t.nodes[j]);
        assert!((d - 2.0 / 4.0).abs() < 0.1, "width {d}");
    }

    #[test]
    fn composition_algebra() {
        let m = Arc::new(build_bargmann_patch(1.5, 10, 30).unwrap());
        let k = 4;
        let op = |s: &GradedSymbol| {
            let mut p = patch_symbol_kernel(m.clone(), 1, s).unwrap();
            p.k = k;
            p
        };
        let (p, q, r) = (op(&mono(0, 1, 0)), op(&mono(0, 0, 1)), op(&mono(0, 1, 1)));
        let lhs = compose(&compose(&p, &q).unwrap(), &r).unwrap();
        let rhs = compose(&p, &compose(&q, &r).unwrap()).unwrap();
        assert!(linalg::max_abs(&(&lhs.kernel - &rhs.kernel)) < 1e-10 * linalg::max_abs(&lhs.kernel));
        let a = adjoint_op(&compose(&p, &q).unwrap());
        let b = compose(&adjoint_op(&q), &adjoint_op(&p)).unwrap();
        assert!(linalg::max_abs(&(&a.kernel - &b.kernel)) < 1e-10);
        assert_eq!(a.symbol, b.symbol);
        assert_eq!(adjoint_op(&p).symbol.unwrap(), mono(0, 0, 1));
        let id = KernelOperator::identity(m.clone(), k);
        assert!(linalg::max_abs(&(&compose(&p, &id).unwrap().kernel - &p.kernel)) < 1e-12);
        let (np, nq) = (op_norm(&p).unwrap(), op_norm(&q).unwrap());
        let npq = op_norm(&compose(&p, &q).unwrap()).unwrap();
        assert!(npq.spectral <= np.spectral * nq.spectral * (1.0 + 1e-8));
        assert!(np.spectral <= np.schur * (1.0 + 1e-12));
        let zero = KernelOperator::new(m.clone(), k, Array2::zeros((m.len(), m.len()))).unwrap();
        assert_eq!(op_norm(&zero).unwrap().spectral, 0.0);
        let other = Arc::new(build_torus(8).unwrap());
        assert!(compose(&p, &KernelOperator::identity(other, k)).is_err());
    }

    #[test]
    fn witness_products_on_patch() {
        let r = verify_symbol_product(&mono(0, 1, 0), &mono(0, 0, 1), &[16, 32], 7.0, 1.5).unwrap();
        for row in &r.rows {
            assert!((row.diagonal - 1.0 / row.k as f64).norm() < 1e-8, "{row:?}");
            assert!(row.defect < 1e-8, "{row:?}");
        }
        let r = verify_symbol_product(&mono(0, 0, 1), &mono(0, 1, 0), &[16], 7.0, 1.5).unwrap();
        assert!(r.rows[0].defect < 1e-8);
        let one = verify_symbol_product(&mono(0, 0, 0), &mono(0, 0, 0), &[16], 7.0, 1.5).unwrap();
        assert!((one.rows[0].diagonal - 1.0).norm() < 1e-9);
        assert!(one.passed(-0.5));
    }

    #[test]
    fn off_diagonal_decay_is_fast() {
        let vals: Vec<f64> = [8u32, 16, 32]
            .iter()
            .map(|&k| {
                let t = Arc::new(torus_for(k).unwrap());
                let p = kernel_from_symbol(t, &Section::TorusFlat, k, &|_, _| C64::new(1.0, 0.0)).unwrap();
                off_diagonal_decay(&p, 0.3 * (2.0 * PI).sqrt()).unwrap()
            })
            .collect();
        let s1 = (vals[1] / vals[0]).ln() / 2f64.ln();
        let s2 = (vals[2] / vals[1]).ln() / 2f64.ln();
        assert!(s2 < s1 && s1 < 0.0, "{vals:?}");
    }
}
