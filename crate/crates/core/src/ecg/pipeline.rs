//! Two-channel fetal ECG extraction through the difference operator.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::beats::beats_from_curve_with;
use super::filter::preprocess;
use super::ridge::{energy_near_curve, extract_ridge, remove_curve, FrequencyCurve};
use super::stft::{median_spectrogram, stft_batch, Spectrogram, StftParams};
use crate::datagen::lag_embed;
use crate::embed::{difference_operator, embed_difference, OperatorVariant};
use crate::error::{Error, Result};
use crate::kernels::diffusion_from_points;
use crate::matrix::Matrix;
use crate::parallel::{ComputeOptions, Execution};
use crate::spectral::{antisymmetric_spectrum, difference_embedding, Embedding};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FecgParams {
    pub lowpass_hz: f64,
    pub detrend_window: usize,
    pub lag_window: usize,
    pub lag_hop: usize,
    pub divisor: f64,
    pub operator: OperatorVariant,
    /// Eigenvector pairs whose spectrograms enter the median.
    pub pairs: usize,
    pub stft: StftParams,
    pub maternal_range_hz: [f64; 2],
    pub fetal_range_hz: [f64; 2],
    pub halfband_hz: f64,
    pub jump_penalty: f64,
    pub snap_ms: f64,
}

impl Default for FecgParams {
    fn default() -> Self {
        FecgParams {
            lowpass_hz: 100.0,
            detrend_window: 101,
            lag_window: 12,
            lag_hop: 6,
            divisor: 1.0,
            operator: OperatorVariant::Plain,
            pairs: 20,
            stft: StftParams::default(),
            maternal_range_hz: [0.7, 1.8],
            fetal_range_hz: [1.5, 3.5],
            halfband_hz: 0.15,
            jump_penalty: 0.5,
            snap_ms: 40.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FecgOutput {
    /// Median of the raw channels' spectrograms.
    pub raw_median: Spectrogram,
    /// Median of the eigenvector spectrograms, on signal time.
    pub eigen_median: Spectrogram,
    /// `eigen_median` with the maternal curve and harmonics removed.
    pub residual: Spectrogram,
    pub maternal_curve: FrequencyCurve,
    pub fetal_curve: FrequencyCurve,
    pub beats: Vec<usize>,
    /// Per-sample envelope used to place beats.
    pub proxy: Vec<f64>,
    pub difference: Embedding,
    /// Sampling rate of the embedding rows.
    pub fs_rows: f64,
    /// Maternal-band energy left after removal over the energy before.
    pub maternal_residual_ratio: f64,
}

/// Spectrograms of the `2k` leading eigenvector components of `a`, each
/// treated as a series sampled at `fs_rows`.
pub fn eigenvector_spectrograms(
    a: &Matrix,
    k: usize,
    fs_rows: f64,
    params: &StftParams,
) -> Result<Vec<Spectrogram>> {
    let spec = antisymmetric_spectrum(a.as_ref())?;
    if spec.pairs() == 0 {
        return Err(Error::NumericalFailure("no nonzero eigenvalue pairs".into()));
    }
    if k == 0 || k > spec.pairs() {
        return Err(Error::param(format!("requested {k} pairs, {} available", spec.pairs())));
    }
    let emb = difference_embedding(&spec, 2 * k)?;
    embedding_spectrograms(&emb, fs_rows, params, Execution::default())
}

pub fn embedding_spectrograms(
    emb: &Embedding,
    fs_rows: f64,
    params: &StftParams,
    exec: Execution,
) -> Result<Vec<Spectrogram>> {
    let series: Vec<Vec<f64>> = emb.coords.col_iter().map(|c| c.iter().copied().collect()).collect();
    stft_batch(&series, fs_rows, params, exec)
}

/// Energy of a Hann-windowed periodogram within `±halfband_hz` of `f0`.
pub fn band_energy(series: &[f64], fs: f64, f0: f64, halfband_hz: f64) -> f64 {
    let n = series.len();
    if n == 0 {
        return 0.0;
    }
    let nfft = n.next_power_of_two();
    let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); nfft];
    for (i, &x) in series.iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos();
        buf[i].re = x * w;
    }
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);
    (0..=nfft / 2)
        .filter(|&k| (k as f64 * fs / nfft as f64 - f0).abs() <= halfband_hz)
        .map(|k| buf[k].norm_sqr())
        .sum()
}

/// Summed band energy of all embedding columns at `f_num` over that at `f_den`.
pub fn embedding_band_ratio(emb: &Embedding, fs_rows: f64, f_num: f64, f_den: f64, halfband_hz: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for c in emb.coords.col_iter() {
        let s: Vec<f64> = c.iter().copied().collect();
        num += band_energy(&s, fs_rows, f_num, halfband_hz);
        den += band_energy(&s, fs_rows, f_den, halfband_hz);
    }
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

/// Mean rate implied by a sorted beat list.
pub fn mean_rate_hz(beats: &[usize], fs: f64) -> Option<f64> {
    if beats.len() < 2 {
        return None;
    }
    let span = (beats[beats.len() - 1] - beats[0]) as f64 / fs;
    Some((beats.len() - 1) as f64 / span)
}

/// Row energy of the embedding mapped back to sample time, each row placed at
/// the centre of its lag window and linearly interpolated between rows.
pub fn embedding_proxy(emb: &Embedding, window: usize, hop: usize, len: usize) -> Vec<f64> {
    let rows = emb.coords.nrows();
    let energy: Vec<f64> = (0..rows)
        .map(|r| (0..emb.coords.ncols()).map(|c| emb.coords[(r, c)].powi(2)).sum())
        .collect();
    let centre = |r: usize| (r * hop) as f64 + window as f64 / 2.0;
    let xs: Vec<f64> = (0..rows).map(centre).collect();
    (0..len).map(|i| super::ridge::interp(&xs, &energy, i as f64)).collect()
}

fn shift_times(spec: &mut Spectrogram, offset_s: f64) {
    spec.times_s.iter_mut().for_each(|t| *t += offset_s);
}

pub fn run_fecg(s1: &[f64], s2: &[f64], fs: f64, params: &FecgParams, opts: &ComputeOptions) -> Result<FecgOutput> {
    if s1.len() != s2.len() {
        return Err(Error::shape(format!("channels have {} and {} samples", s1.len(), s2.len())));
    }
    if params.pairs == 0 {
        return Err(Error::param("need at least one eigenvector pair"));
    }
    let exec = opts.execution;
    let x1 = preprocess(s1, fs, params.lowpass_hz, params.detrend_window)?;
    let x2 = preprocess(s2, fs, params.lowpass_hz, params.detrend_window)?;

    let l1 = lag_embed(&x1, params.lag_window, params.lag_hop)?;
    let l2 = lag_embed(&x2, params.lag_window, params.lag_hop)?;
    let (v1, _) = diffusion_from_points(l1.rows.as_ref(), params.divisor, opts)?;
    let (v2, _) = diffusion_from_points(l2.rows.as_ref(), params.divisor, opts)?;
    let op = difference_operator(&v1, &v2, params.operator, exec)?;
    drop((v1, v2));
    let (difference, _) = match embed_difference(&op, 2 * params.pairs) {
        Ok(x) => x,
        Err(Error::InvalidParameter(_)) => {
            // fewer pairs than requested: take all of them
            let spec = antisymmetric_spectrum(op.matrix().as_ref())?;
            if spec.pairs() == 0 {
                return Err(Error::NumericalFailure("difference operator has no usable spectrum".into()));
            }
            (difference_embedding(&spec, 2 * spec.pairs())?, spec.lambdas)
        }
        Err(e) => return Err(e),
    };
    drop(op);

    let fs_rows = fs / params.lag_hop as f64;
    let centre_offset = params.lag_window as f64 / (2.0 * fs);
    let mut specs = embedding_spectrograms(&difference, fs_rows, &params.stft, exec)?;
    specs.iter_mut().for_each(|s| shift_times(s, centre_offset));
    let eigen_median = median_spectrogram(&specs)?;
    drop(specs);

    let raw = stft_batch(&[x1.clone(), x2.clone()], fs, &params.stft, exec)?;
    let raw_median = median_spectrogram(&raw)?;
    let [mlo, mhi] = params.maternal_range_hz;
    let maternal_raw = extract_ridge(&raw_median, (mlo, mhi), params.jump_penalty)?;
    let maternal_curve = maternal_raw.resample(&eigen_median.times_s);

    let residual = remove_curve(&eigen_median, &maternal_curve, params.halfband_hz)?;
    let before = energy_near_curve(&eigen_median, &maternal_curve, params.halfband_hz);
    let after = energy_near_curve(&residual, &maternal_curve, params.halfband_hz);
    let maternal_residual_ratio = if before > 0.0 { after / before } else { 0.0 };

    let [flo, fhi] = params.fetal_range_hz;
    let fetal_curve = extract_ridge(&residual, (flo, fhi), params.jump_penalty)?;
    let proxy = embedding_proxy(&difference, params.lag_window, params.lag_hop, s1.len());
    let beats = beats_from_curve_with(&fetal_curve, &proxy, fs, params.snap_ms)?;

    Ok(FecgOutput {
        raw_median,
        eigen_median,
        residual,
        maternal_curve,
        fetal_curve,
        beats,
        proxy,
        difference,
        fs_rows,
        maternal_residual_ratio,
    })
}
