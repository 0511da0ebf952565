//! Fetal ECG extraction: filtering, spectrograms, ridges, beats and scoring.

pub mod beats;
pub mod filter;
pub mod pipeline;
pub mod ridge;
pub mod score;
pub mod stft;

pub use beats::{beats_from_curve, beats_from_curve_with};
pub use filter::preprocess;
pub use pipeline::{eigenvector_spectrograms, run_fecg, FecgOutput, FecgParams};
pub use ridge::{extract_ridge, remove_curve, FrequencyCurve};
pub use score::{f1_score, BeatEvaluation};
pub use stft::{median_spectrogram, stft, Spectrogram, StftParams};
