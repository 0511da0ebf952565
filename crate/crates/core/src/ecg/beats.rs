//! Beat placement from an instantaneous-frequency curve.

use std::f64::consts::TAU;

use super::ridge::FrequencyCurve;
use crate::error::{Error, Result};

pub const DEFAULT_SNAP_MS: f64 = 40.0;

/// Local maximum test. A plateau counts once, at its first sample, when both
/// neighbours of the plateau are lower (or absent).
fn is_peak(x: &[f64], i: usize) -> bool {
    if i > 0 && x[i] <= x[i - 1] {
        return false;
    }
    let mut j = i;
    while j + 1 < x.len() && x[j + 1] == x[i] {
        j += 1;
    }
    if j + 1 == x.len() {
        // plateau runs to the end; it must at least have risen
        return i > 0;
    }
    x[j + 1] < x[i]
}

/// Nearest local maximum of `proxy` within `radius` samples of `i`.
/// Equal distances prefer the larger peak, then the earlier one.
fn snap(proxy: &[f64], i: usize, radius: usize) -> Option<usize> {
    let lo = i.saturating_sub(radius);
    let hi = (i + radius).min(proxy.len().saturating_sub(1));
    let mut best: Option<usize> = None;
    for k in lo..=hi {
        if !is_peak(proxy, k) {
            continue;
        }
        best = match best {
            None => Some(k),
            Some(b) => {
                let (db, dk) = (b.abs_diff(i), k.abs_diff(i));
                if dk < db || (dk == db && proxy[k] > proxy[b]) {
                    Some(k)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

/// Integrates the curve to a phase and emits a beat at every full cycle.
///
/// The first beat sits at the largest proxy value within the first period.
/// Each later beat is moved to the nearest proxy peak within `snap_ms`, and
/// the phase restarts from the moved beat. `snap_ms = 0` disables snapping.
pub fn beats_from_curve_with(
    curve: &FrequencyCurve,
    proxy: &[f64],
    fs: f64,
    snap_ms: f64,
) -> Result<Vec<usize>> {
    if curve.is_empty() {
        return Err(Error::param("empty frequency curve"));
    }
    if let Some(bad) = curve.hz.iter().find(|&&h| !(h > 0.0) || !h.is_finite()) {
        return Err(Error::param(format!("curve must be positive, found {bad} Hz")));
    }
    if !(fs > 0.0) || !(snap_ms >= 0.0) {
        return Err(Error::param("sampling rate and snap window must be positive"));
    }
    let len = proxy.len();
    if len == 0 {
        return Ok(Vec::new());
    }
    let radius = (snap_ms * 1e-3 * fs).round() as usize;
    let freq_at = |i: usize| curve.at(i as f64 / fs);

    let first_period = ((fs / freq_at(0)).ceil() as usize).clamp(1, len);
    let mut anchor = 0;
    for i in 1..first_period {
        if proxy[i] > proxy[anchor] {
            anchor = i;
        }
    }
    let mut beats = vec![anchor];
    let mut phase = 0.0;
    let mut i = anchor;
    while i + 1 < len {
        i += 1;
        phase += TAU * freq_at(i) / fs;
        if phase >= TAU {
            let prev = *beats.last().unwrap();
            let mut b = i;
            if radius > 0 {
                if let Some(s) = snap(proxy, i, radius) {
                    if s > prev {
                        b = s;
                    }
                }
            }
            beats.push(b);
            phase = 0.0;
            i = b;
        }
    }
    Ok(beats)
}

pub fn beats_from_curve(curve: &FrequencyCurve, proxy: &[f64], fs: f64) -> Result<Vec<usize>> {
    beats_from_curve_with(curve, proxy, fs, DEFAULT_SNAP_MS)
}
