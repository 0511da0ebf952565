//! Seeded synthetic inputs: sphere/bump shape pairs, planted-difference
//! kernels, two-channel quasi-periodic signals and lag-map embeddings.

use std::f64::consts::PI;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    gaussian_affinity, median_bandwidth, pairwise_distances, AffinityMatrix, Metric, PairedDataset,
};
use crate::matrix::Matrix;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// A unit sphere and its deformed, scaled copy.
#[derive(Debug, Clone)]
pub struct ShapePair {
    pub dataset: PairedDataset,
    /// True on samples inside the bump.
    pub bump_mask: Vec<bool>,
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SphereParams {
    pub n: usize,
    pub alpha: f64,
    pub bump_center: [f64; 3],
    /// Angular radius in radians.
    pub bump_radius: f64,
    pub bump_height: f64,
    pub seed: u64,
}

impl Default for SphereParams {
    fn default() -> Self {
        SphereParams {
            n: 2000,
            alpha: 1.5,
            bump_center: [0.0, 0.0, 1.0],
            bump_radius: 0.5,
            bump_height: 0.3,
            seed: 7,
        }
    }
}

/// Smooth bump profile `cos²(πθ / 2r)` on `[0, r)`, zero beyond.
pub fn bump_profile(theta: f64, radius: f64) -> f64 {
    if theta < radius {
        let c = (PI * theta / (2.0 * radius)).cos();
        c * c
    } else {
        0.0
    }
}

pub fn generate_sphere_pair(
    n: usize,
    alpha: f64,
    bump_center: [f64; 3],
    bump_radius: f64,
    bump_height: f64,
    seed: u64,
) -> Result<ShapePair> {
    if n < 50 {
        return Err(Error::param(format!("need n >= 50, got {n}")));
    }
    if !(bump_radius > 0.0 && bump_radius < PI / 2.0) {
        return Err(Error::param(format!("bump radius {bump_radius} outside (0, pi/2)")));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::param(format!("alpha must be positive, got {alpha}")));
    }
    if !bump_height.is_finite() {
        return Err(Error::param("bump height must be finite"));
    }
    let cn = bump_center.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(cn > 0.0) || !cn.is_finite() {
        return Err(Error::param("bump center must be a nonzero vector"));
    }
    let center = bump_center.map(|x| x / cn);

    let mut rng = stream(seed, 0);
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if r > 1e-12 {
            pts.push(v.map(|x| x / r));
        }
    }
    let mut mask = Vec::with_capacity(n);
    let mut factor = Vec::with_capacity(n);
    for p in &pts {
        let cos = (p[0] * center[0] + p[1] * center[1] + p[2] * center[2]).clamp(-1.0, 1.0);
        let theta = cos.acos();
        mask.push(theta < bump_radius);
        factor.push(alpha * (1.0 + bump_height * bump_profile(theta, bump_radius)));
    }
    let view1 = Mat::from_fn(n, 3, |i, k| pts[i][k]);
    let view2 = Mat::from_fn(n, 3, |i, k| factor[i] * pts[i][k]);
    Ok(ShapePair {
        dataset: PairedDataset::new(view1, view2)?,
        bump_mask: mask,
        scale: alpha,
    })
}

pub fn generate_sphere_pair_from(params: &SphereParams) -> Result<ShapePair> {
    generate_sphere_pair(
        params.n,
        params.alpha,
        params.bump_center,
        params.bump_radius,
        params.bump_height,
        params.seed,
    )
}

/// Two kernels on the same random cloud that differ only on the rows and
/// columns in `diff_indices`: `W2 = min(W1 + BᵀB, 1)` with `B` supported on
/// those columns.
pub fn generate_planted_pair(
    n: usize,
    diff_indices: &[usize],
    magnitude: f64,
    seed: u64,
) -> Result<(AffinityMatrix, AffinityMatrix)> {
    if n < 2 {
        return Err(Error::param(format!("need n >= 2, got {n}")));
    }
    let m = diff_indices.len();
    if 2 * m > n {
        return Err(Error::param(format!("{m} difference samples exceeds n/2 = {}", n / 2)));
    }
    let mut sorted = diff_indices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != m || sorted.last().is_some_and(|&i| i >= n) {
        return Err(Error::param("difference indices must be distinct and below n"));
    }
    if !(magnitude >= 0.0) || !magnitude.is_finite() {
        return Err(Error::param(format!("magnitude must be nonnegative, got {magnitude}")));
    }

    let mut rng = stream(seed, 1);
    let pts = Mat::from_fn(n, 3, |_, _| rng.random_range(0.0..1.0));
    let d = pairwise_distances(pts.as_ref(), Metric::Euclidean)?;
    let eps = median_bandwidth(&d, 1.0)?;
    let w1 = gaussian_affinity(&d, eps)?;

    let rows = m.max(1);
    let b: Vec<Vec<f64>> = (0..rows)
        .map(|_| (0..m).map(|_| magnitude * rng.random_range(0.0..1.0)).collect())
        .collect();
    let mut w2 = w1.matrix().clone();
    for (a, &i) in sorted.iter().enumerate() {
        for (c, &j) in sorted.iter().enumerate() {
            let btb: f64 = b.iter().map(|row| row[a] * row[c]).sum();
            if btb != 0.0 {
                w2[(i, j)] = (w2[(i, j)] + btb).min(1.0);
            }
        }
    }
    let w2 = AffinityMatrix::from_matrix(w2, eps)?;
    Ok((w1, w2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub amplitude: f64,
    /// Offset from the beat time, seconds.
    pub offset_s: f64,
    /// Gaussian width, seconds.
    pub width_s: f64,
}

const fn wave(amplitude: f64, offset_s: f64, width_s: f64) -> Wave {
    Wave { amplitude, offset_s, width_s }
}

pub const MATERNAL_TEMPLATE: [Wave; 4] = [
    wave(0.15, -0.2, 0.03),
    wave(1.0, 0.0, 0.025),
    wave(-0.2, 0.05, 0.02),
    wave(0.3, 0.3, 0.07),
];

pub const FETAL_TEMPLATE_A: [Wave; 3] = [
    wave(0.1, -0.1, 0.015),
    wave(1.0, 0.0, 0.01),
    wave(0.2, 0.15, 0.03),
];

/// Biphasic complex seen from a second lead.
pub const FETAL_TEMPLATE_B: [Wave; 4] = [
    wave(-0.05, -0.1, 0.015),
    wave(-0.6, 0.0, 0.008),
    wave(0.5, 0.025, 0.008),
    wave(0.1, 0.15, 0.03),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SignalConfig {
    pub duration_s: f64,
    pub fs: f64,
    pub maternal_hr: f64,
    pub fetal_hr: f64,
    /// Peak scale of the fetal trains relative to the maternal QRS.
    pub fetal_amplitude: f64,
    /// White noise standard deviation; `None` means 5% of the fetal amplitude.
    pub noise_std: Option<f64>,
    /// Relative standard deviation of each RR interval.
    pub rr_jitter: f64,
    /// Relative standard deviation of each wave's amplitude and width.
    pub morphology_jitter: f64,
    pub seed: u64,
}

impl Default for SignalConfig {
    fn default() -> Self {
        SignalConfig {
            duration_s: 60.0,
            fs: 250.0,
            maternal_hr: 1.2,
            fetal_hr: 2.0,
            fetal_amplitude: 0.5,
            noise_std: None,
            rr_jitter: 0.02,
            morphology_jitter: 0.05,
            seed: 3,
        }
    }
}

impl SignalConfig {
    pub fn noise(&self) -> f64 {
        self.noise_std.unwrap_or(0.05 * self.fetal_amplitude)
    }
}

/// The clean sources behind a [`SignalPair`].
#[derive(Debug, Clone)]
pub struct SignalComponents {
    /// Maternal train, shared by both channels.
    pub z1: Vec<f64>,
    /// Fetal train as seen by channel 1.
    pub z2: Vec<f64>,
    /// Fetal train as seen by channel 2, same beat times as `z2`.
    pub z3: Vec<f64>,
    pub noise1: Vec<f64>,
    pub noise2: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SignalPair {
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
    pub fs: f64,
    pub maternal_beats: Vec<usize>,
    pub fetal_beats: Vec<usize>,
    pub components: SignalComponents,
}

/// Frequency at which a Gaussian of width `sigma` has decayed to 1% of its
/// spectral peak.
fn gaussian_bandwidth(sigma: f64) -> f64 {
    (2.0 * 100f64.ln()).sqrt() / (2.0 * PI * sigma)
}

/// Highest significant frequency of the built-in templates.
pub fn template_bandwidth_hz() -> f64 {
    MATERNAL_TEMPLATE
        .iter()
        .chain(FETAL_TEMPLATE_A.iter())
        .chain(FETAL_TEMPLATE_B.iter())
        .map(|w| gaussian_bandwidth(w.width_s))
        .fold(0.0, f64::max)
}

fn beat_times(rng: &mut ChaCha8Rng, duration: f64, hr: f64, jitter: f64) -> Vec<f64> {
    let period = 1.0 / hr;
    let mut t = rng.random_range(0.0..period);
    let mut out = Vec::new();
    while t < duration {
        out.push(t);
        let z: f64 = rng.sample(StandardNormal);
        t += period * (1.0 + jitter * z).max(0.5);
    }
    out
}

fn render_train(
    rng: &mut ChaCha8Rng,
    len: usize,
    fs: f64,
    beats: &[f64],
    template: &[Wave],
    scale: f64,
    jitter: f64,
) -> Vec<f64> {
    let mut z = vec![0.0; len];
    for &b in beats {
        for w in template {
            let za: f64 = rng.sample(StandardNormal);
            let zw: f64 = rng.sample(StandardNormal);
            let amp = scale * w.amplitude * (1.0 + jitter * za);
            let width = w.width_s * (1.0 + jitter * zw).max(0.5);
            let c = b + w.offset_s;
            let lo = ((c - 5.0 * width) * fs).floor().max(0.0) as usize;
            let hi = (((c + 5.0 * width) * fs).ceil() as isize + 1).clamp(0, len as isize) as usize;
            for (i, zi) in z.iter_mut().enumerate().take(hi).skip(lo) {
                let u = (i as f64 / fs - c) / width;
                *zi += amp * (-0.5 * u * u).exp();
            }
        }
    }
    z
}

fn to_indices(times: &[f64], fs: f64, len: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(times.len());
    for &t in times {
        let i = (t * fs).round() as usize;
        if i < len && out.last().is_none_or(|&p| i > p) {
            out.push(i);
        }
    }
    out
}

/// Two mixed channels `s1 = 2z1 - z2 + n1` and `s2 = z1 - z3/2 + n2`, where
/// `z1` is a maternal train and `z2`, `z3` are two morphologies of one fetal
/// train.
pub fn generate_signal_pair(cfg: &SignalConfig) -> Result<SignalPair> {
    if !(cfg.duration_s >= 10.0) || !cfg.duration_s.is_finite() {
        return Err(Error::param(format!("duration must be at least 10 s, got {}", cfg.duration_s)));
    }
    let need = 4.0 * template_bandwidth_hz();
    if !(cfg.fs >= need) || !cfg.fs.is_finite() {
        return Err(Error::param(format!(
            "sampling rate {} Hz is below 4x the template bandwidth ({need:.1} Hz)",
            cfg.fs
        )));
    }
    for (name, hr) in [("maternal_hr", cfg.maternal_hr), ("fetal_hr", cfg.fetal_hr)] {
        if !(hr > 0.0 && hr < cfg.fs / 4.0) {
            return Err(Error::param(format!("{name} = {hr} Hz is out of range")));
        }
    }
    let noise = cfg.noise();
    if !(noise >= 0.0) || !(cfg.fetal_amplitude >= 0.0) {
        return Err(Error::param("noise and fetal amplitude must be nonnegative"));
    }
    if !(cfg.rr_jitter >= 0.0 && cfg.rr_jitter < 0.5)
        || !(cfg.morphology_jitter >= 0.0 && cfg.morphology_jitter < 0.5)
    {
        return Err(Error::param("jitter must lie in [0, 0.5)"));
    }

    let len = (cfg.duration_s * cfg.fs).round() as usize;
    let mut beat_rng = stream(cfg.seed, 10);
    let mt = beat_times(&mut beat_rng, cfg.duration_s, cfg.maternal_hr, cfg.rr_jitter);
    let ft = beat_times(&mut beat_rng, cfg.duration_s, cfg.fetal_hr, cfg.rr_jitter);

    let mut shape_rng = stream(cfg.seed, 11);
    let j = cfg.morphology_jitter;
    let z1 = render_train(&mut shape_rng, len, cfg.fs, &mt, &MATERNAL_TEMPLATE, 1.0, j);
    let z2 = render_train(&mut shape_rng, len, cfg.fs, &ft, &FETAL_TEMPLATE_A, cfg.fetal_amplitude, j);
    let z3 = render_train(&mut shape_rng, len, cfg.fs, &ft, &FETAL_TEMPLATE_B, cfg.fetal_amplitude, j);

    let mut noise_rng = stream(cfg.seed, 12);
    let white = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..len)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                noise * z
            })
            .collect()
    };
    let noise1 = white(&mut noise_rng);
    let noise2 = white(&mut noise_rng);

    let s1 = (0..len).map(|i| (2.0 * z1[i] - z2[i]) + noise1[i]).collect();
    let s2 = (0..len).map(|i| (z1[i] - 0.5 * z3[i]) + noise2[i]).collect();
    Ok(SignalPair {
        s1,
        s2,
        fs: cfg.fs,
        maternal_beats: to_indices(&mt, cfg.fs, len),
        fetal_beats: to_indices(&ft, cfg.fs, len),
        components: SignalComponents { z1, z2, z3, noise1, noise2 },
    })
}

/// Delay windows of a scalar series.
#[derive(Debug, Clone)]
pub struct LagEmbedding {
    /// One window per row.
    pub rows: Matrix,
    pub window: usize,
    pub hop: usize,
    /// First sample of each row.
    pub origin_index: Vec<usize>,
}

pub fn lag_embed(signal: &[f64], window: usize, hop: usize) -> Result<LagEmbedding> {
    if window == 0 {
        return Err(Error::param("window must be at least 1"));
    }
    if hop == 0 || hop > window {
        return Err(Error::param(format!("hop {hop} outside 1..={window}")));
    }
    if signal.len() < window {
        return Err(Error::MinLength { len: signal.len(), min: window });
    }
    let count = (signal.len() - window) / hop + 1;
    let origin_index: Vec<usize> = (0..count).map(|r| r * hop).collect();
    let rows = Mat::from_fn(count, window, |r, k| signal[origin_index[r] + k]);
    Ok(LagEmbedding { rows, window, hop, origin_index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::max_abs_diff;

    #[test]
    fn sphere_points_on_unit_sphere() {
        let sp = generate_sphere_pair(200, 1.5, [0.0, 0.0, 1.0], 0.5, 0.3, 1).unwrap();
        let v1 = sp.dataset.view1();
        for i in 0..200 {
            let r = (0..3).map(|k| v1[(i, k)] * v1[(i, k)]).sum::<f64>().sqrt();
            assert!((r - 1.0).abs() <= 1e-9);
            if !sp.bump_mask[i] {
                for k in 0..3 {
                    assert_eq!(sp.dataset.view2()[(i, k)], 1.5 * v1[(i, k)]);
                }
            }
        }
    }

    #[test]
    fn flat_bump_is_pure_scaling() {
        let sp = generate_sphere_pair(100, 2.0, [1.0, 0.0, 0.0], 0.4, 0.0, 3).unwrap();
        let scaled = sp.dataset.view1() * faer::Scale(2.0);
        assert_eq!(max_abs_diff(scaled.as_ref(), sp.dataset.view2().as_ref()), 0.0);
        assert!(sp.bump_mask.iter().any(|&b| b));
        let same = generate_sphere_pair(100, 1.0, [1.0, 0.0, 0.0], 0.4, 0.0, 3).unwrap();
        assert_eq!(max_abs_diff(same.dataset.view1().as_ref(), same.dataset.view2().as_ref()), 0.0);
    }

    #[test]
    fn cap_fraction_matches_area() {
        let sp = generate_sphere_pair(2000, 1.5, [0.0, 0.0, 1.0], 0.5, 0.3, 7).unwrap();
        let frac = sp.bump_mask.iter().filter(|&&b| b).count() as f64 / 2000.0;
        let p = (1.0 - 0.5f64.cos()) / 2.0;
        let sd = (p * (1.0 - p) / 2000.0).sqrt();
        assert!((frac - p).abs() <= 3.0 * sd, "fraction {frac} vs {p}");
    }

    #[test]
    fn sphere_reproducible_and_validated() {
        let a = generate_sphere_pair(60, 1.5, [0.0, 1.0, 0.0], 0.5, 0.3, 9).unwrap();
        let b = generate_sphere_pair(60, 1.5, [0.0, 1.0, 0.0], 0.5, 0.3, 9).unwrap();
        assert_eq!(max_abs_diff(a.dataset.view2().as_ref(), b.dataset.view2().as_ref()), 0.0);
        assert!(generate_sphere_pair(49, 1.5, [0.0, 0.0, 1.0], 0.5, 0.3, 1).is_err());
        assert!(generate_sphere_pair(60, 1.5, [0.0, 0.0, 1.0], 1.6, 0.3, 1).is_err());
        assert!(generate_sphere_pair(60, 0.0, [0.0, 0.0, 1.0], 0.5, 0.3, 1).is_err());
        assert!(generate_sphere_pair(60, 1.0, [0.0, 0.0, 0.0], 0.5, 0.3, 1).is_err());
    }

    #[test]
    fn bump_profile_shape() {
        assert_eq!(bump_profile(0.0, 0.5), 1.0);
        assert!(bump_profile(0.4999, 0.5) < 1e-6);
        assert_eq!(bump_profile(0.5, 0.5), 0.0);
    }

    #[test]
    fn planted_support() {
        let (w1, w2) = generate_planted_pair(12, &[3, 7], 0.8, 4).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                let inside = [3, 7].contains(&i) && [3, 7].contains(&j);
                if !inside {
                    assert_eq!(w1.matrix()[(i, j)], w2.matrix()[(i, j)]);
                }
            }
        }
        assert!(w1.matrix()[(3, 7)] != w2.matrix()[(3, 7)]);
        let (a, b) = generate_planted_pair(12, &[3, 7], 0.0, 4).unwrap();
        assert_eq!(max_abs_diff(a.matrix().as_ref(), b.matrix().as_ref()), 0.0);
    }

    #[test]
    fn planted_validation() {
        assert!(generate_planted_pair(10, &[1, 2, 3, 4, 5, 6], 1.0, 0).is_err());
        assert!(generate_planted_pair(10, &[1, 2, 3, 4, 5], 1.0, 0).is_ok());
        assert!(generate_planted_pair(10, &[1, 1], 1.0, 0).is_err());
        assert!(generate_planted_pair(10, &[10], 1.0, 0).is_err());
        assert!(generate_planted_pair(10, &[1], -1.0, 0).is_err());
        assert!(generate_planted_pair(10, &[], 1.0, 0).is_ok());
    }

    #[test]
    fn beat_counts() {
        let cfg = SignalConfig { duration_s: 20.0, ..Default::default() };
        let sp = generate_signal_pair(&cfg).unwrap();
        let m = sp.maternal_beats.len() as i64;
        let f = sp.fetal_beats.len() as i64;
        assert!((m - (20.0 * cfg.maternal_hr) as i64).abs() <= 1, "{m}");
        assert!((f - (20.0 * cfg.fetal_hr) as i64).abs() <= 1, "{f}");
        assert!(sp.fetal_beats.windows(2).all(|w| w[0] < w[1]));
        assert!(sp.fetal_beats.iter().all(|&i| i < sp.s1.len()));
    }

    #[test]
    fn resynthesis() {
        let cfg = SignalConfig::default();
        let sp = generate_signal_pair(&cfg).unwrap();
        let c = &sp.components;
        assert_eq!(sp.s1.len(), 15000);
        for i in 0..sp.s1.len() {
            let clean1 = 2.0 * c.z1[i] - c.z2[i];
            let clean2 = c.z1[i] - 0.5 * c.z3[i];
            assert!((sp.s1[i] - c.noise1[i] - clean1).abs() <= 1e-12);
            assert!((sp.s2[i] - c.noise2[i] - clean2).abs() <= 1e-12);
        }
        let again = generate_signal_pair(&cfg).unwrap();
        assert_eq!(sp.s1, again.s1);
        assert_eq!(sp.fetal_beats, again.fetal_beats);
    }

    #[test]
    fn silent_fetus() {
        let cfg = SignalConfig { fetal_amplitude: 0.0, noise_std: Some(0.0), ..Default::default() };
        let sp = generate_signal_pair(&cfg).unwrap();
        for i in 0..sp.s1.len() {
            assert_eq!(sp.s1[i], 2.0 * sp.s2[i]);
        }
    }

    #[test]
    fn signal_validation() {
        let short = SignalConfig { duration_s: 5.0, ..Default::default() };
        assert!(generate_signal_pair(&short).is_err());
        let slow = SignalConfig { fs: 100.0, ..Default::default() };
        assert!(generate_signal_pair(&slow).is_err());
    }

    #[test]
    fn lag_cases() {
        let ramp: Vec<f64> = (0..10).map(|x| x as f64).collect();
        let e = lag_embed(&ramp, 4, 2).unwrap();
        assert_eq!(e.rows.nrows(), 4);
        assert_eq!(e.origin_index, vec![0, 2, 4, 6]);
        let e = lag_embed(&ramp, 3, 1).unwrap();
        assert_eq!((0..3).map(|k| e.rows[(2, k)]).collect::<Vec<_>>(), vec![2.0, 3.0, 4.0]);
        let e = lag_embed(&ramp, 5, 5).unwrap();
        assert_eq!(e.rows.nrows(), 2);
        assert_eq!(e.rows[(1, 0)], 5.0);
        assert!(lag_embed(&ramp, 0, 1).is_err());
        assert!(lag_embed(&ramp, 3, 4).is_err());
        assert!(matches!(lag_embed(&ramp[..2], 3, 1), Err(Error::MinLength { .. })));
    }
}
