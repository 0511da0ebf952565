//! Composite operators `G`, `H`, `S`, `A` and their diagnostics.

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::DiffusionPair;
use crate::matrix::{antisymmetric_part, require_square, symmetric_part, Matrix};
use crate::parallel::{matmul, Execution};

/// `g = p⁽²⁾q⁽¹⁾`, `h = gᵀ`, `s = g + h`, `a = g - h`.
///
/// `h` is stored as the exact transpose of `g`, which makes `s` exactly
/// symmetric and `a` exactly antisymmetric.
#[derive(Debug, Clone)]
pub struct CompositeOperators {
    pub g: Matrix,
    pub h: Matrix,
    pub s: Matrix,
    pub a: Matrix,
}

impl CompositeOperators {
    pub fn n(&self) -> usize {
        self.g.nrows()
    }
}

fn check_pairs(view1: &DiffusionPair, view2: &DiffusionPair) -> Result<usize> {
    let n = view1.n();
    if view2.n() != n || view1.p.ncols() != n || view2.p.ncols() != n {
        return Err(Error::shape(format!(
            "diffusion pairs have sizes {} and {}",
            view1.n(),
            view2.n()
        )));
    }
    Ok(n)
}

pub fn build_composite(view1: &DiffusionPair, view2: &DiffusionPair) -> Result<CompositeOperators> {
    build_composite_with(view1, view2, Execution::default())
}

pub fn build_composite_with(
    view1: &DiffusionPair,
    view2: &DiffusionPair,
    exec: Execution,
) -> Result<CompositeOperators> {
    let n = check_pairs(view1, view2)?;
    let g = matmul(exec, view2.p.as_ref(), view1.q.as_ref());
    let h = g.transpose().to_owned();
    let s = Mat::from_fn(n, n, |i, j| g[(i, j)] + g[(j, i)]);
    let a = Mat::from_fn(n, n, |i, j| g[(i, j)] - g[(j, i)]);
    Ok(CompositeOperators { g, h, s, a })
}

/// `s̃ = q⁽¹⁾ s p⁽¹⁾` and `ã = q⁽¹⁾ a p⁽¹⁾`. Since `q⁽¹⁾ = p⁽¹⁾ᵀ` these are
/// congruences; the results are projected onto their (anti)symmetric parts to
/// remove rounding asymmetry.
pub fn build_density_corrected(
    ops: &CompositeOperators,
    view1: &DiffusionPair,
) -> Result<(Matrix, Matrix)> {
    build_density_corrected_with(ops, view1, Execution::default())
}

pub fn build_density_corrected_with(
    ops: &CompositeOperators,
    view1: &DiffusionPair,
    exec: Execution,
) -> Result<(Matrix, Matrix)> {
    if ops.n() != view1.n() {
        return Err(Error::shape(format!(
            "operators are {}x{}, view is {}",
            ops.n(),
            ops.n(),
            view1.n()
        )));
    }
    let sandwich = |m: MatRef<'_, f64>| {
        let left = matmul(exec, view1.q.as_ref(), m);
        matmul(exec, left.as_ref(), view1.p.as_ref())
    };
    let s_tilde = symmetric_part(sandwich(ops.s.as_ref()).as_ref());
    let a_tilde = antisymmetric_part(sandwich(ops.a.as_ref()).as_ref());
    Ok((s_tilde, a_tilde))
}

/// `â = (p⁽¹⁾ - p⁽²⁾)(p⁽¹⁾ - p⁽²⁾)ᵀ`, symmetric positive semidefinite.
///
/// Its small-bandwidth expansion has no second-order term, so it carries less
/// geometric content than `a`.
pub fn build_alternative_difference(view1: &DiffusionPair, view2: &DiffusionPair) -> Result<Matrix> {
    build_alternative_difference_with(view1, view2, Execution::default())
}

pub fn build_alternative_difference_with(
    view1: &DiffusionPair,
    view2: &DiffusionPair,
    exec: Execution,
) -> Result<Matrix> {
    check_pairs(view1, view2)?;
    let diff = &view1.p - &view2.p;
    let prod = matmul(exec, diff.as_ref(), diff.transpose());
    Ok(symmetric_part(prod.as_ref()))
}

/// Difference of the two alternating-diffusion orders, `p⁽²⁾p⁽¹⁾ - p⁽¹⁾p⁽²⁾`.
pub fn alternating_diffusion_difference(
    view1: &DiffusionPair,
    view2: &DiffusionPair,
    exec: Execution,
) -> Result<Matrix> {
    check_pairs(view1, view2)?;
    let forward = matmul(exec, view2.p.as_ref(), view1.p.as_ref());
    let reverse = matmul(exec, view1.p.as_ref(), view2.p.as_ref());
    Ok(&forward - &reverse)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportMask {
    pub indices: Vec<usize>,
    pub threshold: f64,
}

impl SupportMask {
    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Flags sample `i` when `max_j max(|a_ij|, |a_ji|) > threshold`.
pub fn support_mask(a: MatRef<'_, f64>, threshold: f64) -> Result<SupportMask> {
    let n = require_square(a, "operator")?;
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(Error::param(format!("threshold must be positive, got {threshold}")));
    }
    let mut stat = vec![0.0f64; n];
    for j in 0..n {
        for i in 0..n {
            let x = a[(i, j)].abs();
            stat[i] = stat[i].max(x);
            stat[j] = stat[j].max(x);
        }
    }
    let indices = (0..n).filter(|&i| stat[i] > threshold).collect();
    Ok(SupportMask { indices, threshold })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub singular_values: Vec<f64>,
    pub numerical_rank: usize,
    pub tol_ratio: f64,
    /// `2m` when the number `m` of planted difference samples is known.
    pub bound: Option<usize>,
}

impl RankReport {
    pub fn within_bound(&self) -> Option<bool> {
        self.bound.map(|b| self.numerical_rank <= b)
    }
}

pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Counts singular values above `tol_ratio · σ_max`.
pub fn rank_report(a: MatRef<'_, f64>, planted_m: Option<usize>, tol_ratio: f64) -> Result<RankReport> {
    require_square(a, "operator")?;
    if !(tol_ratio >= 0.0) {
        return Err(Error::param(format!("tol_ratio must be nonnegative, got {tol_ratio}")));
    }
    let mut sv: Vec<f64> = if a.nrows() == 0 {
        Vec::new()
    } else {
        a.singular_values()
            .map_err(|e| Error::NumericalFailure(format!("singular values: {e:?}")))?
    };
    sv.sort_by(|x, y| y.total_cmp(x));
    for x in sv.iter_mut() {
        *x = x.max(0.0);
    }
    let smax = sv.first().copied().unwrap_or(0.0);
    let numerical_rank = if smax > 0.0 {
        sv.iter().filter(|&&x| x > tol_ratio * smax).count()
    } else {
        0
    };
    Ok(RankReport {
        singular_values: sv,
        numerical_rank,
        tol_ratio,
        bound: planted_m.map(|m| 2 * m),
    })
}
