//! Dominant-curve extraction and harmonic curve removal.

use serde::{Deserialize, Serialize};

use super::stft::Spectrogram;
use crate::error::{Error, Result};

/// One frequency per spectrogram column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyCurve {
    pub times_s: Vec<f64>,
    pub hz: Vec<f64>,
    /// Ridge magnitude over the column maximum inside the search band.
    pub confidence: Vec<f64>,
}

impl FrequencyCurve {
    pub fn len(&self) -> usize {
        self.hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hz.is_empty()
    }

    /// Piecewise-linear value at time `t`, held constant past the ends.
    pub fn at(&self, t: f64) -> f64 {
        interp(&self.times_s, &self.hz, t)
    }

    /// Same curve sampled at other times.
    pub fn resample(&self, times_s: &[f64]) -> FrequencyCurve {
        FrequencyCurve {
            times_s: times_s.to_vec(),
            hz: times_s.iter().map(|&t| self.at(t)).collect(),
            confidence: times_s.iter().map(|&t| interp(&self.times_s, &self.confidence, t)).collect(),
        }
    }
}

pub(crate) fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => ys[0],
        n => {
            if x <= xs[0] {
                return ys[0];
            }
            if x >= xs[n - 1] {
                return ys[n - 1];
            }
            let k = xs.partition_point(|&v| v <= x).clamp(1, n - 1);
            let (x0, x1) = (xs[k - 1], xs[k]);
            let w = (x - x0) / (x1 - x0);
            ys[k - 1] + w * (ys[k] - ys[k - 1])
        }
    }
}

/// Bins of `spec` inside `[lo, hi]`.
pub fn band_bins(spec: &Spectrogram, f_range: (f64, f64)) -> Result<std::ops::Range<usize>> {
    let (lo, hi) = f_range;
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::param(format!("invalid frequency range ({lo}, {hi})")));
    }
    let first = spec.freqs_hz.partition_point(|&f| f < lo);
    let end = spec.freqs_hz.partition_point(|&f| f <= hi);
    if first >= end {
        return Err(Error::param(format!("no frequency bins inside ({lo}, {hi}) Hz")));
    }
    Ok(first..end)
}

/// Log-magnitude scores `ln(mag + δ)` of the band, indexed `[t][f]`.
pub fn ridge_scores(spec: &Spectrogram, bins: std::ops::Range<usize>) -> Vec<Vec<f64>> {
    let peak = spec.mag.col_iter().flat_map(|c| c.iter().copied().collect::<Vec<_>>()).fold(0.0, f64::max);
    let delta = (1e-12 * peak).max(f64::MIN_POSITIVE);
    (0..spec.ntimes())
        .map(|t| bins.clone().map(|f| (spec.mag[(f, t)] + delta).ln()).collect())
        .collect()
}

/// Maximizes `Σ_t score[t][path_t] - penalty·Σ_t |path_t - path_{t-1}|`.
/// Ties resolve to the lowest bin. Returns the path and its objective.
pub fn best_path(score: &[Vec<f64>], penalty: f64) -> (Vec<usize>, f64) {
    let tw = score.len();
    if tw == 0 {
        return (Vec::new(), 0.0);
    }
    let nf = score[0].len();
    let mut cost = score[0].clone();
    let mut back = vec![vec![0usize; nf]; tw];
    let mut next = vec![0.0; nf];
    for t in 1..tw {
        for f in 0..nf {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for (g, &c) in cost.iter().enumerate() {
                let v = c - penalty * f.abs_diff(g) as f64;
                if v > best {
                    best = v;
                    arg = g;
                }
            }
            next[f] = best + score[t][f];
            back[t][f] = arg;
        }
        std::mem::swap(&mut cost, &mut next);
    }
    let mut end = 0;
    for f in 1..nf {
        if cost[f] > cost[end] {
            end = f;
        }
    }
    let total = cost[end];
    let mut path = vec![end; tw];
    for t in (1..tw).rev() {
        path[t - 1] = back[t][path[t]];
    }
    (path, total)
}

/// Objective of an arbitrary path, for checking optimality.
pub fn path_objective(score: &[Vec<f64>], path: &[usize], penalty: f64) -> f64 {
    let mut total = 0.0;
    for (t, &f) in path.iter().enumerate() {
        total += score[t][f];
        if t > 0 {
            total -= penalty * f.abs_diff(path[t - 1]) as f64;
        }
    }
    total
}

pub fn extract_ridge(spec: &Spectrogram, f_range: (f64, f64), jump_penalty: f64) -> Result<FrequencyCurve> {
    if !(jump_penalty >= 0.0) || !jump_penalty.is_finite() {
        return Err(Error::param(format!("jump penalty must be nonnegative, got {jump_penalty}")));
    }
    let bins = band_bins(spec, f_range)?;
    let score = ridge_scores(spec, bins.clone());
    let (path, _) = best_path(&score, jump_penalty);
    let mut hz = Vec::with_capacity(path.len());
    let mut confidence = Vec::with_capacity(path.len());
    for (t, &p) in path.iter().enumerate() {
        let f = bins.start + p;
        hz.push(spec.freqs_hz[f]);
        let top = bins.clone().map(|k| spec.mag[(k, t)]).fold(0.0, f64::max);
        confidence.push(if top > 0.0 { spec.mag[(f, t)] / top } else { 0.0 });
    }
    Ok(FrequencyCurve { times_s: spec.times_s.clone(), hz, confidence })
}

/// Zeroes `±halfband_hz` around the curve and each of its integer harmonics
/// up to Nyquist.
pub fn remove_curve(spec: &Spectrogram, curve: &FrequencyCurve, halfband_hz: f64) -> Result<Spectrogram> {
    if !(halfband_hz > 0.0) {
        return Err(Error::param(format!("halfband must be positive, got {halfband_hz}")));
    }
    if curve.len() != spec.ntimes() {
        return Err(Error::shape(format!(
            "curve has {} points, spectrogram {} columns",
            curve.len(),
            spec.ntimes()
        )));
    }
    let mut out = spec.clone();
    let nyquist = spec.layout.fs / 2.0;
    for (t, &c) in curve.hz.iter().enumerate() {
        if !(c > 0.0) {
            continue;
        }
        let mut k = 1.0;
        while k * c - halfband_hz <= nyquist {
            let centre = k * c;
            for (f, &hz) in spec.freqs_hz.iter().enumerate() {
                if (hz - centre).abs() <= halfband_hz {
                    out.mag[(f, t)] = 0.0;
                }
            }
            k += 1.0;
        }
    }
    Ok(out)
}

/// Energy of `spec` within `±halfband_hz` of the curve (fundamental only).
pub fn energy_near_curve(spec: &Spectrogram, curve: &FrequencyCurve, halfband_hz: f64) -> f64 {
    let mut e = 0.0;
    for (t, &c) in curve.hz.iter().enumerate().take(spec.ntimes()) {
        for (f, &hz) in spec.freqs_hz.iter().enumerate() {
            if (hz - c).abs() <= halfband_hz {
                e += spec.mag[(f, t)] * spec.mag[(f, t)];
            }
        }
    }
    e
}
