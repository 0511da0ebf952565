//! Execution policy shared by the dense kernels.
//!
//! With the `parallel` feature (on by default) row and column maps run on the
//! rayon pool and matrix products use faer's rayon backend. Without it every
//! routine runs on the calling thread. Each output entry is computed by the
//! same arithmetic in both modes, so results do not depend on thread count.

use faer::{Mat, MatRef, Par};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::matrix::Matrix;

/// Largest sample count accepted by the dense routines unless overridden.
pub const DEFAULT_MAX_N: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// True when work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    pub fn faer_par(self) -> Par {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            return Par::rayon(0);
        }
        Par::Seq
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComputeOptions {
    pub execution: Execution,
    pub max_n: usize,
}

impl Default for ComputeOptions {
    fn default() -> Self {
        ComputeOptions {
            execution: Execution::default(),
            max_n: DEFAULT_MAX_N,
        }
    }
}

impl ComputeOptions {
    pub fn sequential() -> Self {
        ComputeOptions {
            execution: Execution::Sequential,
            ..Default::default()
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

/// Evaluates `f` for every index in `0..n`, preserving order.
pub fn map_indices<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Builds an `nrows × ncols` matrix one column at a time. `fill(j, col)`
/// receives the zeroed storage of column `j`.
pub fn build_columns<F>(exec: Execution, nrows: usize, ncols: usize, fill: F) -> Matrix
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    let mut buf = vec![0.0f64; nrows * ncols];
    if nrows > 0 {
        #[cfg(feature = "parallel")]
        if exec.is_parallel() {
            buf.par_chunks_mut(nrows)
                .enumerate()
                .for_each(|(j, col)| fill(j, col));
            return MatRef::from_column_major_slice(&buf, nrows, ncols).to_owned();
        }
        let _ = exec;
        for (j, col) in buf.chunks_mut(nrows).enumerate() {
            fill(j, col);
        }
    }
    MatRef::from_column_major_slice(&buf, nrows, ncols).to_owned()
}

/// Dense product `lhs · rhs`.
pub fn matmul(exec: Execution, lhs: MatRef<'_, f64>, rhs: MatRef<'_, f64>) -> Matrix {
    let mut out = Mat::<f64>::zeros(lhs.nrows(), rhs.ncols());
    faer::linalg::matmul::matmul(
        out.as_mut(),
        faer::Accum::Replace,
        lhs,
        rhs,
        1.0,
        exec.faer_par(),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_indices_keeps_order() {
        for exec in [Execution::Sequential, Execution::Parallel] {
            let v = map_indices(exec, 100, |i| i * i);
            assert_eq!(v, (0..100).map(|i| i * i).collect::<Vec<_>>());
        }
    }

    #[test]
    fn build_columns_layout() {
        let m = build_columns(Execution::Parallel, 3, 2, |j, col| {
            for (i, x) in col.iter_mut().enumerate() {
                *x = (10 * i + j) as f64;
            }
        });
        assert_eq!(m[(2, 1)], 21.0);
        assert_eq!(m[(0, 1)], 1.0);
        let empty = build_columns(Execution::Sequential, 0, 4, |_, _| {});
        assert_eq!(empty.ncols(), 4);
    }

    #[test]
    fn matmul_matches_loop() {
        let a = Mat::from_fn(4, 3, |i, j| (i as f64) - 0.5 * j as f64);
        let b = Mat::from_fn(3, 5, |i, j| (i * j) as f64 + 1.0);
        let c = matmul(Execution::Sequential, a.as_ref(), b.as_ref());
        for i in 0..4 {
            for j in 0..5 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += a[(i, k)] * b[(k, j)];
                }
                assert!((c[(i, j)] - s).abs() < 1e-12);
            }
        }
    }
}
