//! Two point clouds in, common and difference embeddings out.

use std::fmt;
use std::str::FromStr;

use faer::MatRef;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{diffusion_from_points, DiffusionPair};
use crate::matrix::{max_abs, Matrix};
use crate::operators::{build_alternative_difference_with, build_composite_with, build_density_corrected_with};
use crate::parallel::{ComputeOptions, Execution};
use crate::spectral::{
    antisymmetric_spectrum, common_embedding, difference_embedding, symmetric_eig, EigenLabel,
    EigenPart, Embedding, EmbeddingSource,
};

/// `‖A‖_max` at or below this is reported as a degenerate difference.
pub const DEGENERATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorVariant {
    /// `S` and `A`.
    #[default]
    Plain,
    /// Density-corrected `S̃` and `Ã`.
    Tilde,
    /// `S` with the symmetric difference `Â`.
    Hat,
}

impl fmt::Display for OperatorVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorVariant::Plain => "plain",
            OperatorVariant::Tilde => "tilde",
            OperatorVariant::Hat => "hat",
        })
    }
}

impl FromStr for OperatorVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(OperatorVariant::Plain),
            "tilde" => Ok(OperatorVariant::Tilde),
            "hat" => Ok(OperatorVariant::Hat),
            other => Err(Error::param(format!("unknown operator variant '{other}'"))),
        }
    }
}

/// The difference operator in use: antisymmetric for `A`/`Ã`, symmetric for `Â`.
#[derive(Debug, Clone)]
pub enum DifferenceOperator {
    Antisymmetric(Matrix),
    Symmetric(Matrix),
}

impl DifferenceOperator {
    pub fn matrix(&self) -> &Matrix {
        match self {
            DifferenceOperator::Antisymmetric(m) | DifferenceOperator::Symmetric(m) => m,
        }
    }
}

pub fn common_operator(
    view1: &DiffusionPair,
    view2: &DiffusionPair,
    variant: OperatorVariant,
    exec: Execution,
) -> Result<Matrix> {
    let ops = build_composite_with(view1, view2, exec)?;
    match variant {
        OperatorVariant::Tilde => Ok(build_density_corrected_with(&ops, view1, exec)?.0),
        _ => Ok(ops.s),
    }
}

pub fn difference_operator(
    view1: &DiffusionPair,
    view2: &DiffusionPair,
    variant: OperatorVariant,
    exec: Execution,
) -> Result<DifferenceOperator> {
    match variant {
        OperatorVariant::Plain => {
            Ok(DifferenceOperator::Antisymmetric(build_composite_with(view1, view2, exec)?.a))
        }
        OperatorVariant::Tilde => {
            let ops = build_composite_with(view1, view2, exec)?;
            Ok(DifferenceOperator::Antisymmetric(build_density_corrected_with(&ops, view1, exec)?.1))
        }
        OperatorVariant::Hat => Ok(DifferenceOperator::Symmetric(build_alternative_difference_with(
            view1, view2, exec,
        )?)),
    }
}

/// Leading `m` difference coordinates and the full spectrum they came from
/// (`λ_k` for antisymmetric operators, eigenvalues for `Â`).
pub fn embed_difference(op: &DifferenceOperator, m: usize) -> Result<(Embedding, Vec<f64>)> {
    match op {
        DifferenceOperator::Antisymmetric(a) => {
            let spec = antisymmetric_spectrum(a.as_ref())?;
            if spec.pairs() == 0 {
                return Err(Error::NumericalFailure("operator has no nonzero eigenvalue pairs".into()));
            }
            Ok((difference_embedding(&spec, m)?, spec.lambdas))
        }
        DifferenceOperator::Symmetric(h) => {
            let spec = symmetric_eig(h.as_ref())?;
            let mut e = common_embedding(&spec, m)?;
            e.source = EmbeddingSource::Difference;
            e.eigen_labels = (0..m).map(|index| EigenLabel { index, part: EigenPart::Sym }).collect();
            Ok((e, spec.eigenvalues))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbedParams {
    /// Median divisor for the kernels behind the common operator.
    pub divisor_s: f64,
    /// Median divisor for the kernels behind the difference operator.
    pub divisor_a: f64,
    pub operator: OperatorVariant,
    /// Columns in each embedding; must be even.
    pub dim: usize,
}

impl Default for EmbedParams {
    fn default() -> Self {
        EmbedParams { divisor_s: 2.0, divisor_a: 5.0, operator: OperatorVariant::Plain, dim: 4 }
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddingResult {
    pub common: Embedding,
    /// Zero columns when the difference operator is degenerate.
    pub difference: Embedding,
    pub common_eigenvalues: Vec<f64>,
    pub difference_spectrum: Vec<f64>,
    pub difference_max_abs: f64,
    pub degenerate: bool,
    /// Bandwidths `[view1 for S, view2 for S, view1 for A, view2 for A]`.
    pub epsilons: [f64; 4],
}

pub fn embed_views(
    view1: MatRef<'_, f64>,
    view2: MatRef<'_, f64>,
    params: &EmbedParams,
    opts: &ComputeOptions,
) -> Result<EmbeddingResult> {
    if params.dim == 0 || params.dim % 2 != 0 {
        return Err(Error::param(format!("embedding dimension must be even and positive, got {}", params.dim)));
    }
    if view1.nrows() != view2.nrows() {
        return Err(Error::shape(format!("views have {} and {} rows", view1.nrows(), view2.nrows())));
    }
    let exec = opts.execution;
    let (p1s, e1s) = diffusion_from_points(view1, params.divisor_s, opts)?;
    let (p2s, e2s) = diffusion_from_points(view2, params.divisor_s, opts)?;
    let s = common_operator(&p1s, &p2s, params.operator, exec)?;
    let s_spec = symmetric_eig(s.as_ref())?;
    let common = common_embedding(&s_spec, params.dim)?;
    drop(s);

    let (p1a, e1a) = diffusion_from_points(view1, params.divisor_a, opts)?;
    let (p2a, e2a) = diffusion_from_points(view2, params.divisor_a, opts)?;
    let op = difference_operator(&p1a, &p2a, params.operator, exec)?;
    let amax = max_abs(op.matrix().as_ref());
    let degenerate = amax <= DEGENERATE_TOL;
    let (difference, spectrum) = if degenerate {
        // eigenvectors of a rounding-level operator are arbitrary
        let empty = Embedding {
            coords: Matrix::zeros(view1.nrows(), 0),
            source: EmbeddingSource::Difference,
            eigen_labels: vec![],
            eigenvalues: vec![],
        };
        (empty, vec![])
    } else {
        embed_difference(&op, params.dim)?
    };
    Ok(EmbeddingResult {
        common,
        difference,
        common_eigenvalues: s_spec.eigenvalues,
        difference_spectrum: spectrum,
        difference_max_abs: amax,
        degenerate,
        epsilons: [e1s, e2s, e1a, e2a],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::max_abs_diff;
    use faer::Mat;

    #[test]
    fn variant_names_round_trip() {
        for v in [OperatorVariant::Plain, OperatorVariant::Tilde, OperatorVariant::Hat] {
            assert_eq!(v.to_string().parse::<OperatorVariant>().unwrap(), v);
        }
        assert!("other".parse::<OperatorVariant>().is_err());
    }

    #[test]
    fn scaled_copy_is_degenerate() {
        let x = Mat::from_fn(30, 2, |i, j| ((i * 7 + j * 3) % 11) as f64 + 0.1 * i as f64);
        let y = &x * faer::Scale(3.0);
        let r = embed_views(x.as_ref(), y.as_ref(), &EmbedParams::default(), &ComputeOptions::default())
            .unwrap();
        assert!(r.degenerate);
        assert_eq!(r.common.coords.ncols(), 4);
        assert_eq!(r.difference.coords.ncols(), 0);
    }

    #[test]
    fn all_variants_run() {
        let x = Mat::from_fn(25, 2, |i, j| ((i * 5 + j) % 7) as f64 + 0.05 * (i * i) as f64);
        let y = Mat::from_fn(25, 2, |i, j| x[(i, j)] + if i < 5 { 0.8 } else { 0.0 });
        for operator in [OperatorVariant::Plain, OperatorVariant::Tilde, OperatorVariant::Hat] {
            let params = EmbedParams { operator, ..Default::default() };
            let r = embed_views(x.as_ref(), y.as_ref(), &params, &ComputeOptions::default()).unwrap();
            assert!(!r.degenerate);
            let g = r.difference.coords.transpose() * &r.difference.coords;
            assert!(max_abs_diff(g.as_ref(), Mat::<f64>::identity(4, 4).as_ref()) < 1e-8);
        }
    }

    #[test]
    fn odd_dimension_rejected() {
        let x = Mat::from_fn(10, 1, |i, _| i as f64);
        let params = EmbedParams { dim: 3, ..Default::default() };
        assert!(embed_views(x.as_ref(), x.as_ref(), &params, &ComputeOptions::default()).is_err());
    }
}
