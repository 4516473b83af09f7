//! Dense Hermitian eigenproblems, with an exact block split for cyclically symmetric matrices.

use std::f64::consts::PI;

use ndarray::{s, Array1, Array2, ShapeBuilder};
use ndarray_linalg::{Eigh, SVD, UPLO};

use crate::error::{Error, Result};
use crate::geometry::{CyclicLayout, C64};

pub fn hermitian_eigen(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let mut f = Array2::zeros(a.raw_dim().f());
    f.assign(a);
    f.eigh(UPLO::Upper).map_err(|e| Error::Linalg(e.to_string()))
}

pub fn spectral_norm(a: &Array2<C64>) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    let (_, sv, _) = a.svd(false, false).map_err(|e| Error::Linalg(e.to_string()))?;
    Ok(sv.iter().cloned().fold(0.0, f64::max))
}

pub fn hermitian_norm(a: &Array2<C64>) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    let (e, _) = hermitian_eigen(a)?;
    Ok(e.iter().map(|v| v.abs()).fold(0.0, f64::max))
}

pub fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

pub fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_defect(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut d: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            d = d.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    d
}

/// Eigenvalues of a Hermitian matrix together with the eigenvectors whose eigenvalue exceeds
/// `threshold`, ordered by decreasing eigenvalue.
#[derive(Clone, Debug)]
pub struct SplitEigen {
    pub values: Vec<f64>,
    pub selected: Vec<f64>,
    pub vectors: Array2<C64>,
    pub blocks: usize,
}

/// True when `a[σi, σj] = a[i, j]` for the cyclic relabeling σ of the layout.
pub fn is_cyclic_invariant(a: &Array2<C64>, layout: &CyclicLayout, tol: f64) -> bool {
    let g = layout.order;
    let scale = max_abs(a).max(1.0);
    for src in &layout.orbits {
        for dst in &layout.orbits {
            for d in 0..g {
                let base = a[[src[0], dst[d]]];
                for j in 1..g {
                    if (a[[src[j], dst[(j + d) % g]]] - base).norm() > tol * scale {
                        return false;
                    }
                }
            }
        }
    }
    true
}

pub fn split_eigen(a: &Array2<C64>, layout: Option<&CyclicLayout>, threshold: f64) -> Result<SplitEigen> {
    match layout {
        Some(l) if l.order > 1 && is_cyclic_invariant(a, l, 1e-11) => cyclic_eigen(a, l, threshold),
        _ => dense_eigen(a, threshold),
    }
}

fn dense_eigen(a: &Array2<C64>, threshold: f64) -> Result<SplitEigen> {
    let (e, v) = hermitian_eigen(a)?;
    let n = a.nrows();
    let mut idx: Vec<usize> = (0..n).filter(|&i| e[i] > threshold).collect();
    idx.sort_by(|&x, &y| e[y].partial_cmp(&e[x]).unwrap().then(x.cmp(&y)));
    let mut vectors = Array2::zeros((n, idx.len()));
    for (c, &i) in idx.iter().enumerate() {
        vectors.column_mut(c).assign(&v.column(i));
    }
    Ok(SplitEigen { values: e.to_vec(), selected: idx.iter().map(|&i| e[i]).collect(), vectors, blocks: 1 })
}

fn cyclic_eigen(a: &Array2<C64>, layout: &CyclicLayout, threshold: f64) -> Result<SplitEigen> {
    let g = layout.order;
    let m = layout.orbits.len();
    let n = a.nrows();
    let roots: Vec<C64> = (0..g).map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / g as f64)).collect();
    let mut values = Vec::with_capacity(n);
    let mut picked: Vec<(f64, usize, Array1<C64>)> = Vec::new();
    for q in 0..g {
        let b = Array2::from_shape_fn((m, m), |(o, p)| {
            let row = layout.orbits[o][0];
            let mut acc = C64::new(0.0, 0.0);
            for d in 0..g {
                acc += a[[row, layout.orbits[p][d]]] * roots[(q * d) % g];
            }
            acc
        });
        let (e, u) = hermitian_eigen(&b)?;
        for c in 0..m {
            values.push(e[c]);
            if e[c] > threshold {
                let mut v = Array1::zeros(n);
                let norm = (g as f64).sqrt();
                for o in 0..m {
                    for j in 0..g {
                        v[layout.orbits[o][j]] = u[[o, c]] * roots[(q * j) % g] / norm;
                    }
                }
                picked.push((e[c], q * m + c, v));
            }
        }
    }
    values.sort_by(|x, y| x.partial_cmp(y).unwrap());
    picked.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap().then(x.1.cmp(&y.1)));
    let mut vectors = Array2::zeros((n, picked.len()));
    for (c, (_, _, v)) in picked.iter().enumerate() {
        vectors.column_mut(c).assign(v);
    }
    Ok(SplitEigen { values, selected: picked.iter().map(|p| p.0).collect(), vectors, blocks: g })
}

/// max |G − I| in spectral norm for the Gram matrix of the columns.
pub fn orthonormality_defect(v: &Array2<C64>) -> Result<f64> {
    let gram = adjoint(v).dot(v);
    let r = gram.nrows();
    let d = gram - Array2::<C64>::eye(r);
    hermitian_norm(&d)
}

pub fn gram(v: &Array2<C64>) -> Array2<C64> {
    adjoint(v).dot(v)
}

pub fn leading_block(a: &Array2<C64>, r: usize) -> Array2<C64> {
    a.slice(s![..r, ..r]).to_owned()
}
