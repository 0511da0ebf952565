//! Distances, bandwidths, Gaussian affinities and Markov normalization.

use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::matrix::{compensated_sum, is_finite, Matrix};
use crate::parallel::{build_columns, map_indices, ComputeOptions};

/// Two sample sets in row correspondence: row `i` of `view1` and row `i` of
/// `view2` describe the same underlying sample.
#[derive(Debug, Clone)]
pub struct PairedDataset {
    view1: Matrix,
    view2: Matrix,
}

impl PairedDataset {
    pub fn new(view1: Matrix, view2: Matrix) -> Result<Self> {
        if view1.nrows() != view2.nrows() {
            return Err(Error::shape(format!(
                "views have {} and {} rows",
                view1.nrows(),
                view2.nrows()
            )));
        }
        if view1.nrows() < 2 {
            return Err(Error::InvalidData(format!(
                "need at least 2 samples, got {}",
                view1.nrows()
            )));
        }
        for (k, v) in [&view1, &view2].into_iter().enumerate() {
            if !is_finite(v.as_ref()) {
                return Err(Error::InvalidData(format!("view {} has non-finite entries", k + 1)));
            }
        }
        Ok(PairedDataset { view1, view2 })
    }

    pub fn n(&self) -> usize {
        self.view1.nrows()
    }

    pub fn view1(&self) -> &Matrix {
        &self.view1
    }

    pub fn view2(&self) -> &Matrix {
        &self.view2
    }

    pub fn into_views(self) -> (Matrix, Matrix) {
        (self.view1, self.view2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
}

/// Symmetric, nonnegative, zero-diagonal distance matrix.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    d: Matrix,
}

impl DistanceMatrix {
    /// Wraps a user-supplied metric. The triangle inequality is not checked.
    pub fn from_matrix(d: Matrix) -> Result<Self> {
        let n = crate::matrix::require_square(d.as_ref(), "distance matrix")?;
        for j in 0..n {
            if d[(j, j)] != 0.0 {
                return Err(Error::InvalidData(format!("nonzero diagonal at {j}")));
            }
            for i in 0..n {
                let x = d[(i, j)];
                if !x.is_finite() || x < 0.0 {
                    return Err(Error::InvalidData(format!("bad distance {x} at ({i}, {j})")));
                }
                if x != d[(j, i)] {
                    return Err(Error::InvalidData(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(DistanceMatrix { d })
    }

    pub fn n(&self) -> usize {
        self.d.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.d
    }

    pub fn into_matrix(self) -> Matrix {
        self.d
    }
}

/// Gaussian kernel matrix with its bandwidth.
#[derive(Debug, Clone)]
pub struct AffinityMatrix {
    w: Matrix,
    epsilon: f64,
}

impl AffinityMatrix {
    /// Wraps an externally built kernel. Must be square, symmetric, with
    /// entries in `(0, 1]` and a unit diagonal.
    pub fn from_matrix(w: Matrix, epsilon: f64) -> Result<Self> {
        let n = crate::matrix::require_square(w.as_ref(), "affinity matrix")?;
        if !(epsilon > 0.0) {
            return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
        }
        for j in 0..n {
            if w[(j, j)] != 1.0 {
                return Err(Error::InvalidData(format!("diagonal entry {j} is {}", w[(j, j)])));
            }
            for i in 0..j {
                let x = w[(i, j)];
                if !(x > 0.0 && x <= 1.0) {
                    return Err(Error::InvalidData(format!("affinity {x} at ({i}, {j})")));
                }
                if x != w[(j, i)] {
                    return Err(Error::InvalidData(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(AffinityMatrix { w, epsilon })
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.w
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Row-stochastic `p = D⁻¹W` and column-stochastic `q = WD⁻¹` of one view.
#[derive(Debug, Clone)]
pub struct DiffusionPair {
    pub p: Matrix,
    pub q: Matrix,
    pub degrees: Vec<f64>,
}

impl DiffusionPair {
    pub fn n(&self) -> usize {
        self.p.nrows()
    }
}

pub fn pairwise_distances(points: MatRef<'_, f64>, metric: Metric) -> Result<DistanceMatrix> {
    pairwise_distances_with(points, metric, &ComputeOptions::default())
}

pub fn pairwise_distances_with(
    points: MatRef<'_, f64>,
    metric: Metric,
    opts: &ComputeOptions,
) -> Result<DistanceMatrix> {
    let n = points.nrows();
    if n < 2 {
        return Err(Error::InvalidData(format!("need at least 2 points, got {n}")));
    }
    if n > opts.max_n {
        return Err(Error::param(format!(
            "{n} samples exceeds the dense limit of {}",
            opts.max_n
        )));
    }
    if !is_finite(points) {
        return Err(Error::InvalidData("points contain non-finite values".into()));
    }
    let Metric::Euclidean = metric;
    let dim = points.ncols();
    // Row-major copy so each distance walks contiguous memory.
    let rows: Vec<f64> = (0..n)
        .flat_map(|i| (0..dim).map(move |k| points[(i, k)]))
        .collect();
    let d = build_columns(opts.execution, n, n, |j, col| {
        let xj = &rows[j * dim..(j + 1) * dim];
        for (i, out) in col.iter_mut().enumerate() {
            if i == j {
                continue;
            }
            let xi = &rows[i * dim..(i + 1) * dim];
            let mut s = 0.0;
            for k in 0..dim {
                let t = xi[k] - xj[k];
                s += t * t;
            }
            *out = s.sqrt();
        }
    });
    Ok(DistanceMatrix { d })
}

/// Median of the strictly-upper-triangular distances, divided by `divisor`.
/// An even count takes the mean of the two central values.
pub fn median_bandwidth(d: &DistanceMatrix, divisor: f64) -> Result<f64> {
    if !(divisor > 0.0) || !divisor.is_finite() {
        return Err(Error::param(format!("divisor must be positive, got {divisor}")));
    }
    let n = d.n();
    let mut vals = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for j in 1..n {
        for i in 0..j {
            vals.push(d.d[(i, j)]);
        }
    }
    if vals.is_empty() {
        return Err(Error::DegenerateData("fewer than two samples".into()));
    }
    let m = vals.len();
    let cmp = |a: &f64, b: &f64| a.total_cmp(b);
    let upper = m / 2;
    let (lo_part, hi, _) = vals.select_nth_unstable_by(upper, cmp);
    let hi = *hi;
    let med = if m % 2 == 1 {
        hi
    } else {
        let lo = lo_part.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    };
    if med <= 0.0 {
        let all_zero = d.d.as_ref().col_iter().all(|c| c.iter().all(|&x| x == 0.0));
        let msg = if all_zero {
            "all pairwise distances are zero"
        } else {
            "median pairwise distance is zero"
        };
        return Err(Error::DegenerateData(msg.into()));
    }
    Ok(med / divisor)
}

pub fn gaussian_affinity(d: &DistanceMatrix, epsilon: f64) -> Result<AffinityMatrix> {
    gaussian_affinity_with(d, epsilon, &ComputeOptions::default())
}

/// `w_ij = exp(-d_ij² / ε²)`.
pub fn gaussian_affinity_with(
    d: &DistanceMatrix,
    epsilon: f64,
    opts: &ComputeOptions,
) -> Result<AffinityMatrix> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
    }
    let n = d.n();
    let src = &d.d;
    let w = build_columns(opts.execution, n, n, |j, col| {
        for (i, out) in col.iter_mut().enumerate() {
            let r = src[(i, j)] / epsilon;
            *out = (-(r * r)).exp();
        }
    });
    Ok(AffinityMatrix { w, epsilon })
}

pub fn normalize(w: &AffinityMatrix) -> DiffusionPair {
    normalize_with(w, &ComputeOptions::default())
}

pub fn normalize_with(w: &AffinityMatrix, opts: &ComputeOptions) -> DiffusionPair {
    let n = w.n();
    let wm = &w.w;
    // w is symmetric, so row i is read down column i.
    let degrees = map_indices(opts.execution, n, |i| compensated_sum(wm.col(i).iter().copied()));
    let p = build_columns(opts.execution, n, n, |j, col| {
        for (i, out) in col.iter_mut().enumerate() {
            *out = wm[(i, j)] / degrees[i];
        }
    });
    let q = p.transpose().to_owned();
    DiffusionPair { p, q, degrees }
}

/// Distances, median bandwidth and normalization in one call. Returns the
/// bandwidth alongside the pair.
pub fn diffusion_from_points(
    points: MatRef<'_, f64>,
    divisor: f64,
    opts: &ComputeOptions,
) -> Result<(DiffusionPair, f64)> {
    let d = pairwise_distances_with(points, Metric::Euclidean, opts)?;
    let eps = median_bandwidth(&d, divisor)?;
    let w = gaussian_affinity_with(&d, eps, opts)?;
    Ok((normalize_with(&w, opts), eps))
}

/// Builds a [`DiffusionPair`] straight from a symmetric kernel that need not
/// be Gaussian, e.g. a planted-difference kernel.
pub fn normalize_kernel(w: MatRef<'_, f64>) -> Result<DiffusionPair> {
    let n = crate::matrix::require_square(w, "kernel")?;
    let degrees: Vec<f64> = (0..n)
        .map(|i| compensated_sum(w.col(i).iter().copied()))
        .collect();
    if let Some(i) = degrees.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::InvalidData(format!("row {i} has nonpositive degree")));
    }
    let p = Mat::from_fn(n, n, |i, j| w[(i, j)] / degrees[i]);
    let q = p.transpose().to_owned();
    Ok(DiffusionPair { p, q, degrees })
}
