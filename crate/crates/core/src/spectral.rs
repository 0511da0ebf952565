//! Eigendecompositions of `S` and `A` and the resulting embeddings.

use faer::{c64, Mat, MatRef, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{antisymmetry_defect, max_abs, require_square, symmetry_defect, Matrix};

/// Symmetry tolerance for inputs, relative to `max(1, ‖m‖_max)`.
pub const INPUT_SYMMETRY_TOL: f64 = 1e-10;

/// Pairs with `λ < KERNEL_RATIO · λ_max` are treated as null directions.
pub const KERNEL_RATIO: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SymmetricSpectrum {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns, column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: Matrix,
}

/// Real orthogonal decomposition of an antisymmetric matrix.
///
/// For each `k`, `A·u_k = -λ_k·u'_k` and `A·u'_k = λ_k·u_k`, i.e. the complex
/// vector `u_k + j·u'_k` is an eigenvector with eigenvalue `j·λ_k`.
#[derive(Debug, Clone)]
pub struct AntisymmetricSpectrum {
    /// Descending, strictly positive.
    pub lambdas: Vec<f64>,
    /// Column `k` is `u_k`.
    pub u: Matrix,
    /// Column `k` is `u'_k`.
    pub u_prime: Matrix,
    /// Orthonormal basis of the null space.
    pub kernel: Matrix,
}

impl AntisymmetricSpectrum {
    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn pairs(&self) -> usize {
        self.lambdas.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingSource {
    Common,
    Difference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenPart {
    Real,
    Imag,
    Sym,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenLabel {
    pub index: usize,
    pub part: EigenPart,
}

#[derive(Debug, Clone)]
pub struct Embedding {
    pub coords: Matrix,
    pub source: EmbeddingSource,
    pub eigen_labels: Vec<EigenLabel>,
    /// Eigenvalue (or `λ_k`) behind each column.
    pub eigenvalues: Vec<f64>,
}

fn tolerance(m: MatRef<'_, f64>) -> f64 {
    INPUT_SYMMETRY_TOL * max_abs(m).max(1.0)
}

pub fn symmetric_eig(s: MatRef<'_, f64>) -> Result<SymmetricSpectrum> {
    let n = require_square(s, "matrix")?;
    let defect = symmetry_defect(s);
    let tol = tolerance(s);
    if !(defect <= tol) {
        return Err(Error::SymmetryViolation { defect, tolerance: tol });
    }
    if n == 0 {
        return Ok(SymmetricSpectrum { eigenvalues: vec![], eigenvectors: Mat::zeros(0, 0) });
    }
    let evd = s
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NumericalFailure(format!("symmetric eigensolver: {e:?}")))?;
    let vals = evd.S().column_vector();
    let vecs = evd.U();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Mat::<f64>::zeros(n, n);
    for k in 0..n {
        let src = n - 1 - k;
        eigenvalues.push(vals[src]);
        let col = vecs.col(src);
        // largest-magnitude entry positive, first index on ties
        let mut best = 0;
        for i in 1..n {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        let sign = if col[best] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            eigenvectors[(i, k)] = sign * col[i];
        }
    }
    Ok(SymmetricSpectrum { eigenvalues, eigenvectors })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Orthogonalizes `v` against `basis` (twice, for stability).
fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            axpy(-c, b, v);
        }
    }
}

pub fn antisymmetric_spectrum(a: MatRef<'_, f64>) -> Result<AntisymmetricSpectrum> {
    let n = require_square(a, "matrix")?;
    let defect = antisymmetry_defect(a);
    let tol = tolerance(a);
    if !(defect <= tol) {
        return Err(Error::SymmetryViolation { defect, tolerance: tol });
    }
    if n == 0 {
        return Ok(AntisymmetricSpectrum {
            lambdas: vec![],
            u: Mat::zeros(0, 0),
            u_prime: Mat::zeros(0, 0),
            kernel: Mat::zeros(0, 0),
        });
    }
    // jA is Hermitian; its eigenvalue μ pairs with A's eigenvalue -jμ.
    let herm = Mat::<c64>::from_fn(n, n, |i, k| c64::new(0.0, a[(i, k)]));
    let evd = herm
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NumericalFailure(format!("hermitian eigensolver: {e:?}")))?;
    let mu: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
    let psi = evd.U();

    // Ascending μ, so negative μ come first with the largest λ = -μ leading.
    let lambda_max = (0..n).map(|k| -mu[k]).fold(0.0f64, f64::max);
    let cutoff = KERNEL_RATIO * lambda_max;
    let mut lambdas = Vec::new();
    let mut planes: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut null_cols = Vec::new();
    for k in 0..n {
        let lam = -mu[k];
        if lambda_max > 0.0 && lam > 0.0 && lam >= cutoff {
            let col = psi.col(k);
            // Real and imaginary parts of distinct eigenvectors are already
            // orthogonal; only the pair itself needs tidying.
            let mut u: Vec<f64> = (0..n).map(|i| col[i].re).collect();
            let mut up: Vec<f64> = (0..n).map(|i| col[i].im).collect();
            let nu = norm(&u);
            if nu == 0.0 {
                return Err(Error::NumericalFailure("degenerate eigenvector pair".into()));
            }
            u.iter_mut().for_each(|x| *x /= nu);
            project_out(&mut up, std::slice::from_ref(&u));
            let nup = norm(&up);
            if nup == 0.0 {
                return Err(Error::NumericalFailure("degenerate eigenvector pair".into()));
            }
            up.iter_mut().for_each(|x| *x /= nup);
            canonical_rotation(&mut u, &mut up);
            basis.push(u.clone());
            basis.push(up.clone());
            lambdas.push(lam);
            planes.push((u, up));
        } else if lam.abs() < cutoff || lambda_max == 0.0 {
            null_cols.push(k);
        }
    }

    let kernel_dim = null_cols.len();
    let mut kernel_vecs: Vec<Vec<f64>> = Vec::new();
    for &k in &null_cols {
        let col = psi.col(k);
        for part in 0..2 {
            if kernel_vecs.len() == kernel_dim {
                break;
            }
            let mut v: Vec<f64> = (0..n)
                .map(|i| if part == 0 { col[i].re } else { col[i].im })
                .collect();
            project_out(&mut v, &kernel_vecs);
            let nv = norm(&v);
            if nv > 1e-6 {
                v.iter_mut().for_each(|x| *x /= nv);
                kernel_vecs.push(v);
            }
        }
    }
    if kernel_vecs.len() < kernel_dim {
        // complete from the standard basis
        for e in 0..n {
            if kernel_vecs.len() == kernel_dim {
                break;
            }
            let mut v = vec![0.0; n];
            v[e] = 1.0;
            project_out(&mut v, &basis);
            project_out(&mut v, &kernel_vecs);
            let nv = norm(&v);
            if nv > 1e-6 {
                v.iter_mut().for_each(|x| *x /= nv);
                kernel_vecs.push(v);
            }
        }
    }

    let m = lambdas.len();
    let u = Mat::from_fn(n, m, |i, k| planes[k].0[i]);
    let u_prime = Mat::from_fn(n, m, |i, k| planes[k].1[i]);
    let kernel = Mat::from_fn(n, kernel_vecs.len(), |i, k| kernel_vecs[k][i]);
    Ok(AntisymmetricSpectrum { lambdas, u, u_prime, kernel })
}

/// Rotates the pair within its plane so that at the index of largest
/// `u_i² + u'_i²` the first vector is positive and the second is zero.
fn canonical_rotation(u: &mut [f64], up: &mut [f64]) {
    let mut best = 0;
    let mut best_r2 = -1.0;
    for i in 0..u.len() {
        let r2 = u[i] * u[i] + up[i] * up[i];
        if r2 > best_r2 {
            best_r2 = r2;
            best = i;
        }
    }
    let r = best_r2.sqrt();
    if r == 0.0 {
        return;
    }
    let (c, s) = (u[best] / r, up[best] / r);
    for i in 0..u.len() {
        let (x, y) = (u[i], up[i]);
        u[i] = c * x + s * y;
        up[i] = -s * x + c * y;
    }
    up[best] = 0.0;
}

/// First `m` eigenvectors of `S`.
pub fn common_embedding(spec: &SymmetricSpectrum, m: usize) -> Result<Embedding> {
    let n = spec.eigenvectors.nrows();
    if m == 0 || m > n {
        return Err(Error::param(format!("embedding dimension {m} outside 1..={n}")));
    }
    Ok(Embedding {
        coords: spec.eigenvectors.as_ref().subcols(0, m).to_owned(),
        source: EmbeddingSource::Common,
        eigen_labels: (0..m).map(|index| EigenLabel { index, part: EigenPart::Sym }).collect(),
        eigenvalues: spec.eigenvalues[..m].to_vec(),
    })
}

/// Real and imaginary parts of the first `m/2` eigenvector pairs of `A`,
/// interleaved as `u_1, u'_1, u_2, u'_2, ...`.
pub fn difference_embedding(spec: &AntisymmetricSpectrum, m: usize) -> Result<Embedding> {
    if m == 0 || m % 2 != 0 {
        return Err(Error::param(format!("embedding dimension must be even and positive, got {m}")));
    }
    if m / 2 > spec.pairs() {
        return Err(Error::param(format!(
            "requested {} pairs, only {} available",
            m / 2,
            spec.pairs()
        )));
    }
    let n = spec.n();
    let coords = Mat::from_fn(n, m, |i, c| {
        let k = c / 2;
        if c % 2 == 0 {
            spec.u[(i, k)]
        } else {
            spec.u_prime[(i, k)]
        }
    });
    let eigen_labels = (0..m)
        .map(|c| EigenLabel {
            index: c / 2,
            part: if c % 2 == 0 { EigenPart::Real } else { EigenPart::Imag },
        })
        .collect();
    let eigenvalues = (0..m).map(|c| spec.lambdas[c / 2]).collect();
    Ok(Embedding { coords, source: EmbeddingSource::Difference, eigen_labels, eigenvalues })
}

/// Rebuilds `A = Σ_k λ_k (u_k u'_kᵀ - u'_k u_kᵀ)`.
pub fn reconstruct_antisymmetric(spec: &AntisymmetricSpectrum) -> Matrix {
    let n = spec.n();
    let mut out = Mat::<f64>::zeros(n, n);
    for (k, &lam) in spec.lambdas.iter().enumerate() {
        let u = spec.u.col(k);
        let up = spec.u_prime.col(k);
        for j in 0..n {
            for i in 0..n {
                out[(i, j)] += lam * (u[i] * up[j] - up[i] * u[j]);
            }
        }
    }
    out
}

/// Rebuilds `S = V Λ Vᵀ`.
pub fn reconstruct_symmetric(spec: &SymmetricSpectrum) -> Matrix {
    let v = spec.eigenvectors.as_ref();
    let scaled = Mat::from_fn(v.nrows(), v.ncols(), |i, k| v[(i, k)] * spec.eigenvalues[k]);
    &scaled * v.transpose()
}
