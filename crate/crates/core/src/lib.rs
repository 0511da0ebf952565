//! Composite diffusion operators over paired datasets.
//!
//! Two corresponded sample sets are turned into Markov operators `P` and `Q`,
//! combined into a symmetric operator `S` that highlights shared structure and
//! an antisymmetric operator `A` that highlights where the two views differ.
//! The crate also ships synthetic generators and a two-channel signal
//! separation pipeline built on `A`.

pub mod datagen;
pub mod ecg;
pub mod embed;
pub mod error;
pub mod io;
pub mod kernels;
pub mod matrix;
pub mod operators;
pub mod parallel;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use parallel::{ComputeOptions, Execution};
