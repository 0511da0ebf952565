//! Magnitude STFT, a cepstral de-shaping mask and spectrogram stacking.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::parallel::{map_indices, Execution};

pub const MIN_WINDOW_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StftParams {
    pub window_s: f64,
    pub hop_s: f64,
    pub deshape: bool,
}

impl Default for StftParams {
    fn default() -> Self {
        StftParams { window_s: 4.0, hop_s: 0.1, deshape: true }
    }
}

/// Sample-level settings that produced a [`Spectrogram`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameLayout {
    pub fs: f64,
    pub window: usize,
    pub hop: usize,
    pub nfft: usize,
    pub deshape: bool,
}

#[derive(Debug, Clone)]
pub struct Spectrogram {
    /// `F × Tw`, nonnegative.
    pub mag: Matrix,
    pub freqs_hz: Vec<f64>,
    pub times_s: Vec<f64>,
    pub layout: FrameLayout,
}

impl Spectrogram {
    pub fn nfreqs(&self) -> usize {
        self.freqs_hz.len()
    }

    pub fn ntimes(&self) -> usize {
        self.times_s.len()
    }

    pub fn same_axes(&self, other: &Spectrogram) -> bool {
        self.freqs_hz == other.freqs_hz && self.times_s == other.times_s
    }

    /// Index of the frequency bin closest to `hz`.
    pub fn bin_of(&self, hz: f64) -> usize {
        let step = self.layout.fs / self.layout.nfft as f64;
        ((hz / step).round().max(0.0) as usize).min(self.nfreqs() - 1)
    }
}

fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / len as f64).cos())
        .collect()
}

/// Resolves window, hop and FFT length for a series sampled at `fs`.
pub fn frame_layout(fs: f64, params: &StftParams) -> Result<FrameLayout> {
    if !(fs > 0.0) || !fs.is_finite() {
        return Err(Error::param(format!("sampling rate must be positive, got {fs}")));
    }
    if !(params.window_s > 0.0) || !(params.hop_s > 0.0) {
        return Err(Error::param("window and hop must be positive"));
    }
    let window = (params.window_s * fs).round() as usize;
    if window < MIN_WINDOW_SAMPLES {
        return Err(Error::param(format!(
            "window of {window} samples is below the minimum of {MIN_WINDOW_SAMPLES}"
        )));
    }
    let hop = ((params.hop_s * fs).round() as usize).max(1);
    let nfft = (4 * window).next_power_of_two();
    Ok(FrameLayout { fs, window, hop, nfft, deshape: params.deshape })
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(nfft: usize) -> Self {
        let mut planner = FftPlanner::new();
        Plans { forward: planner.plan_fft_forward(nfft), inverse: planner.plan_fft_inverse(nfft) }
    }
}

pub fn stft(signal: &[f64], fs: f64, params: &StftParams) -> Result<Spectrogram> {
    stft_with(signal, fs, params, Execution::default())
}

pub fn stft_with(signal: &[f64], fs: f64, params: &StftParams, exec: Execution) -> Result<Spectrogram> {
    let layout = frame_layout(fs, params)?;
    if signal.len() < layout.window {
        return Err(Error::MinLength { len: signal.len(), min: layout.window });
    }
    if signal.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidData("signal has non-finite samples".into()));
    }
    let plans = Plans::new(layout.nfft);
    Ok(stft_planned(signal, &layout, &plans, exec))
}

fn stft_planned(signal: &[f64], layout: &FrameLayout, plans: &Plans, exec: Execution) -> Spectrogram {
    let FrameLayout { fs, window, hop, nfft, deshape } = *layout;
    let frames = (signal.len() - window) / hop + 1;
    let nf = nfft / 2 + 1;
    let win = hann(window);
    let columns: Vec<Vec<f64>> = map_indices(exec, frames, |t| {
        let start = t * hop;
        let mut buf = vec![Complex::new(0.0, 0.0); nfft];
        for k in 0..window {
            buf[k].re = signal[start + k] * win[k];
        }
        plans.forward.process(&mut buf);
        let mut mag: Vec<f64> = buf[..nf].iter().map(|z| z.norm()).collect();
        if deshape {
            apply_deshape(&mut mag, fs, nfft, plans.inverse.as_ref());
        }
        mag
    });
    let mag = Matrix::from_fn(nf, frames, |f, t| columns[t][f]);
    let freqs_hz = (0..nf).map(|k| k as f64 * fs / nfft as f64).collect();
    let times_s = (0..frames)
        .map(|t| (t * hop) as f64 / fs + window as f64 / (2.0 * fs))
        .collect();
    Spectrogram { mag, freqs_hz, times_s, layout: *layout }
}

fn median(v: &mut [f64]) -> f64 {
    let m = v.len();
    if m == 0 {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Multiplies one magnitude column by its cepstral mask.
///
/// The cepstrum of `log(mag + δ)` peaks at the period of a harmonic series.
/// After soft-thresholding at its median, the cepstrum is read at quefrency
/// `fs / f` for every bin `f`, normalized to a peak of 1, clipped to `[0, 1]`
/// and used as a gain. Harmonics at `k·f0` read the cepstrum at `period / k`
/// where it is small, so they are attenuated.
fn apply_deshape(mag: &mut [f64], fs: f64, nfft: usize, inverse: &dyn Fft<f64>) {
    let nf = mag.len();
    let peak = mag.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return;
    }
    let delta = 1e-6 * peak;
    let mut spec = vec![Complex::new(0.0, 0.0); nfft];
    for k in 0..nf {
        spec[k].re = (mag[k] + delta).ln();
    }
    for k in nf..nfft {
        spec[k].re = spec[nfft - k].re;
    }
    inverse.process(&mut spec);
    let half = nfft / 2;
    let ceps: Vec<f64> = spec[..=half].iter().map(|z| z.re / nfft as f64).collect();
    let mut tail: Vec<f64> = ceps[1..].to_vec();
    let tau = median(&mut tail);
    let soft: Vec<f64> = ceps.iter().map(|&c| (c - tau).max(0.0)).collect();

    let mut mask = vec![0.0; nf];
    for (k, m) in mask.iter_mut().enumerate().skip(1) {
        let f = k as f64 * fs / nfft as f64;
        let q = fs / f;
        if q >= 1.0 && q <= half as f64 {
            let lo = q.floor() as usize;
            let hi = (lo + 1).min(half);
            let w = q - lo as f64;
            *m = (1.0 - w) * soft[lo] + w * soft[hi];
        }
    }
    let mmax = mask.iter().cloned().fold(0.0, f64::max);
    if mmax > 0.0 {
        for (x, m) in mag.iter_mut().zip(&mask) {
            *x *= (m / mmax).clamp(0.0, 1.0);
        }
    } else {
        mag.iter_mut().for_each(|x| *x = 0.0);
    }
}

/// STFTs of several equally long series sharing one plan.
pub fn stft_batch(
    series: &[Vec<f64>],
    fs: f64,
    params: &StftParams,
    exec: Execution,
) -> Result<Vec<Spectrogram>> {
    let layout = frame_layout(fs, params)?;
    for s in series {
        if s.len() < layout.window {
            return Err(Error::MinLength { len: s.len(), min: layout.window });
        }
    }
    let plans = Plans::new(layout.nfft);
    // Parallelism goes across series; each transform runs sequentially.
    Ok(map_indices(exec, series.len(), |i| {
        stft_planned(&series[i], &layout, &plans, Execution::Sequential)
    }))
}

/// Pixel-wise median; even stacks average the two central values.
pub fn median_spectrogram(specs: &[Spectrogram]) -> Result<Spectrogram> {
    let first = specs.first().ok_or_else(|| Error::param("no spectrograms to combine"))?;
    if specs.iter().any(|s| !s.same_axes(first)) {
        return Err(Error::shape("spectrogram axes differ"));
    }
    let mut scratch = vec![0.0; specs.len()];
    let mag = Matrix::from_fn(first.nfreqs(), first.ntimes(), |f, t| {
        for (slot, s) in scratch.iter_mut().zip(specs) {
            *slot = s.mag[(f, t)];
        }
        median(&mut scratch)
    });
    Ok(Spectrogram {
        mag,
        freqs_hz: first.freqs_hz.clone(),
        times_s: first.times_s.clone(),
        layout: first.layout,
    })
}
