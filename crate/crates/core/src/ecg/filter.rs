//! Zero-phase lowpass and running-median detrending.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const LOWPASS_TAPS: usize = 64;

/// Hamming-windowed sinc lowpass with unit DC gain.
pub fn lowpass_taps(fs: f64, cutoff_hz: f64, taps: usize) -> Vec<f64> {
    let fc = cutoff_hz / fs;
    let mid = (taps as f64 - 1.0) / 2.0;
    let mut h: Vec<f64> = (0..taps)
        .map(|k| {
            let x = k as f64 - mid;
            let sinc = if x == 0.0 { 2.0 * fc } else { (2.0 * PI * fc * x).sin() / (PI * x) };
            let win = 0.54 - 0.46 * (2.0 * PI * k as f64 / (taps as f64 - 1.0)).cos();
            sinc * win
        })
        .collect();
    let sum: f64 = h.iter().sum();
    h.iter_mut().for_each(|x| *x /= sum);
    h
}

/// Mirror index into `0..len` without repeating the edge sample.
fn reflect(i: isize, len: usize) -> usize {
    let n = len as isize;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let mut k = i.rem_euclid(period);
    if k >= n {
        k = period - k;
    }
    k as usize
}

fn fir(h: &[f64], x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    for (n, yn) in y.iter_mut().enumerate() {
        let mut s = 0.0;
        for (k, &hk) in h.iter().enumerate().take(n + 1) {
            s += hk * x[n - k];
        }
        *yn = s;
    }
    y
}

/// Forward-backward FIR filtering with reflected edges.
pub fn filtfilt(h: &[f64], x: &[f64]) -> Vec<f64> {
    let len = x.len();
    if len == 0 {
        return Vec::new();
    }
    let pad = (3 * h.len()).min(len - 1);
    let ext: Vec<f64> = (-(pad as isize)..(len + pad) as isize)
        .map(|i| x[reflect(i, len)])
        .collect();
    let mut y = fir(h, &ext);
    y.reverse();
    let mut y = fir(h, &y);
    y.reverse();
    y[pad..pad + len].to_vec()
}

pub fn lowpass(x: &[f64], fs: f64, cutoff_hz: f64) -> Result<Vec<f64>> {
    if !(fs > 2.0 * cutoff_hz) || !(cutoff_hz > 0.0) {
        return Err(Error::param(format!(
            "cutoff {cutoff_hz} Hz must lie in (0, fs/2) for fs = {fs} Hz"
        )));
    }
    Ok(filtfilt(&lowpass_taps(fs, cutoff_hz, LOWPASS_TAPS), x))
}

/// Centered running median over an odd window. Near the ends the window
/// shrinks to the available samples; even counts average the central pair.
pub fn running_median(x: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::param(format!("median window must be odd, got {window}")));
    }
    let len = x.len();
    let half = window / 2;
    let mut sorted: Vec<f64> = x[..(half + 1).min(len)].to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let m = sorted.len();
        out.push(if m % 2 == 1 {
            sorted[m / 2]
        } else {
            0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
        });
        if i >= half {
            let leaving = x[i - half];
            let pos = sorted.partition_point(|v| v.total_cmp(&leaving).is_lt());
            sorted.remove(pos);
        }
        if i + half + 1 < len {
            let entering = x[i + half + 1];
            let pos = sorted.partition_point(|v| v.total_cmp(&entering).is_lt());
            sorted.insert(pos, entering);
        }
    }
    Ok(out)
}

pub const DEFAULT_LOWPASS_HZ: f64 = 100.0;
pub const DEFAULT_DETREND_WINDOW: usize = 101;

/// Lowpass, then subtract the running median of the lowpassed signal.
/// Rates at or below twice the cutoff are rejected.
pub fn preprocess(x: &[f64], fs: f64, lowpass_hz: f64, detrend_window: usize) -> Result<Vec<f64>> {
    if detrend_window % 2 == 0 {
        return Err(Error::param(format!("detrend window must be odd, got {detrend_window}")));
    }
    let y = lowpass(x, fs, lowpass_hz)?;
    let trend = running_median(&y, detrend_window)?;
    Ok(y.iter().zip(&trend).map(|(a, b)| a - b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    fn tone(f: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * f * i as f64 / fs).sin()).collect()
    }

    #[test]
    fn reflect_indices() {
        let v: Vec<usize> = (-3..8).map(|i| reflect(i, 5)).collect();
        assert_eq!(v, vec![3, 2, 1, 0, 1, 2, 3, 4, 3, 2, 1]);
    }

    #[test]
    fn constant_detrends_to_zero() {
        let x = vec![3.7; 500];
        let y = preprocess(&x, 250.0, 100.0, 101).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stopband_tone_removed() {
        let x = tone(150.0, 1000.0, 4000);
        let y = preprocess(&x, 1000.0, 100.0, 101).unwrap();
        assert!(rms(&y) <= 0.05 * rms(&x), "{}", rms(&y) / rms(&x));
    }

    #[test]
    fn passband_tone_kept_dc_removed() {
        let t = tone(50.0, 1000.0, 4000);
        let x: Vec<f64> = t.iter().map(|v| v + 2.0).collect();
        let y = preprocess(&x, 1000.0, 100.0, 101).unwrap();
        let err: Vec<f64> = y.iter().zip(&t).map(|(a, b)| a - b).collect();
        assert!(rms(&err) <= 0.05 * rms(&t), "{}", rms(&err) / rms(&t));
    }

    #[test]
    fn median_matches_sort_oracle() {
        let x: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64 - 0.1 * i as f64).collect();
        let m = running_median(&x, 7).unwrap();
        for i in 0..40usize {
            let mut w: Vec<f64> = x[i.saturating_sub(3)..(i + 4).min(40)].to_vec();
            w.sort_by(f64::total_cmp);
            let c = w.len();
            let expected = if c % 2 == 1 { w[c / 2] } else { 0.5 * (w[c / 2 - 1] + w[c / 2]) };
            assert_eq!(m[i], expected);
        }
    }

    #[test]
    fn parameter_checks() {
        assert!(preprocess(&[1.0; 10], 150.0, 100.0, 101).is_err());
        assert!(preprocess(&[1.0; 10], 250.0, 100.0, 100).is_err());
        assert!(running_median(&[1.0], 0).is_err());
    }

    #[test]
    fn taps_unit_gain() {
        let h = lowpass_taps(250.0, 40.0, 64);
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        for k in 0..32 {
            assert!((h[k] - h[63 - k]).abs() < 1e-15);
        }
    }
}
