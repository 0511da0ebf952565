//! Dense matrix alias and small numeric helpers.

use faer::{Mat, MatRef};

use crate::error::{Error, Result};

pub type Matrix = Mat<f64>;

/// Neumaier-compensated sum. Order-dependent only at the last-bit level and
/// always evaluated in index order, so it is reproducible.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn max_abs(m: MatRef<'_, f64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].abs());
        }
    }
    best
}

/// `max |m - mᵀ|`.
pub fn symmetry_defect(m: MatRef<'_, f64>) -> f64 {
    pair_defect(m, |a, b| a - b)
}

/// `max |m + mᵀ|`.
pub fn antisymmetry_defect(m: MatRef<'_, f64>) -> f64 {
    pair_defect(m, |a, b| a + b)
}

fn pair_defect(m: MatRef<'_, f64>, f: impl Fn(f64, f64) -> f64) -> f64 {
    let n = m.nrows().min(m.ncols());
    let mut best = 0.0f64;
    for j in 0..n {
        for i in j..n {
            best = best.max(f(m[(i, j)], m[(j, i)]).abs());
        }
    }
    best
}

/// `max |a - b|`; panics on shape mismatch.
pub fn max_abs_diff(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            best = best.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    best
}

/// Largest singular value.
pub fn spectral_norm(m: MatRef<'_, f64>) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    let sv = m
        .singular_values()
        .map_err(|e| Error::NumericalFailure(format!("singular values: {e:?}")))?;
    Ok(sv.iter().cloned().fold(0.0, f64::max))
}

/// Symmetric part `(m + mᵀ)/2`, exactly symmetric.
pub fn symmetric_part(m: MatRef<'_, f64>) -> Matrix {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        if i <= j {
            0.5 * (m[(i, j)] + m[(j, i)])
        } else {
            0.5 * (m[(j, i)] + m[(i, j)])
        }
    })
}

/// Antisymmetric part `(m - mᵀ)/2`, exactly antisymmetric.
pub fn antisymmetric_part(m: MatRef<'_, f64>) -> Matrix {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        if i <= j {
            0.5 * (m[(i, j)] - m[(j, i)])
        } else {
            -0.5 * (m[(j, i)] - m[(i, j)])
        }
    })
}

pub fn require_square(m: MatRef<'_, f64>, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::shape(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub fn is_finite(m: MatRef<'_, f64>) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].is_finite()))
}

/// Row-major copy, handy for CSV output and tests.
pub fn to_rows(m: MatRef<'_, f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::shape(format!(
            "row {i} has {} entries, expected {ncols}",
            r.len()
        )));
    }
    Ok(Mat::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
        assert_eq!(compensated_sum(std::iter::empty()), 0.0);
    }

    #[test]
    fn defects() {
        let m = from_rows(&[vec![1.0, 2.0], vec![2.5, 0.0]]).unwrap();
        assert_eq!(symmetry_defect(m.as_ref()), 0.5);
        assert_eq!(antisymmetry_defect(m.as_ref()), 4.5);
        let s = symmetric_part(m.as_ref());
        let a = antisymmetric_part(m.as_ref());
        assert_eq!(symmetry_defect(s.as_ref()), 0.0);
        assert_eq!(antisymmetry_defect(a.as_ref()), 0.0);
        assert!(max_abs_diff((&s + &a).as_ref(), m.as_ref()) < 1e-15);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = Mat::from_fn(3, 3, |i, j| if i == j { [1.0, -4.0, 2.0][i] } else { 0.0 });
        assert!((spectral_norm(m.as_ref()).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
