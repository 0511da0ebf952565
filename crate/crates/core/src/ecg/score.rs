//! Beat-detection scoring.

use serde::{Deserialize, Serialize};

pub const DEFAULT_TOL_MS: f64 = 50.0;
pub const DEFAULT_GUARD_S: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeatEvaluation {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub se: f64,
    pub ppv: f64,
    pub f1: f64,
}

impl BeatEvaluation {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let se = if tp + fn_ == 0 { 1.0 } else { tp as f64 / (tp + fn_) as f64 };
        let ppv = if tp + fp == 0 { 1.0 } else { tp as f64 / (tp + fp) as f64 };
        let f1 = if se + ppv == 0.0 { 0.0 } else { 2.0 * se * ppv / (se + ppv) };
        BeatEvaluation { tp, fp, fn_, se, ppv, f1 }
    }
}

/// Greedy one-to-one matching in time order within `±tol_ms`.
///
/// Beats within `guard_s` of either end of a recording of `n_samples`
/// samples are ignored. Inputs need not be sorted.
pub fn f1_score(
    est: &[usize],
    truth: &[usize],
    fs: f64,
    tol_ms: f64,
    guard_s: f64,
    n_samples: usize,
) -> BeatEvaluation {
    let lo = guard_s * fs;
    let hi = n_samples as f64 - guard_s * fs;
    let keep = |v: &[usize]| {
        let mut out: Vec<f64> = v
            .iter()
            .map(|&i| i as f64)
            .filter(|&x| x >= lo && x <= hi)
            .collect();
        out.sort_by(f64::total_cmp);
        out
    };
    let e = keep(est);
    let t = keep(truth);
    let tol = tol_ms * 1e-3 * fs;
    let (mut i, mut j) = (0, 0);
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    while i < e.len() && j < t.len() {
        if (e[i] - t[j]).abs() <= tol {
            tp += 1;
            i += 1;
            j += 1;
        } else if e[i] < t[j] {
            fp += 1;
            i += 1;
        } else {
            fn_ += 1;
            j += 1;
        }
    }
    fp += e.len() - i;
    fn_ += t.len() - j;
    BeatEvaluation::from_counts(tp, fp, fn_)
}
