use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::orthogonality_defect;
use crate::preprocess::{denormalize, normalize, trim, zero_pad, NormalizerState};
use crate::space::LatentSpace;
use crate::types::{EstimatorKind, L2Denorm};

/// Largest `||R^T R - I||_F` accepted for orthogonal estimators.
pub const ORTHO_TOLERANCE: f64 = 1e-8;

/// A fitted map from one latent space to another.
///
/// Applying it pads the input to `padded_dim`, normalizes with the source
/// statistics, computes `x R + b`, de-normalizes with the target statistics
/// and trims back to `target_raw_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Translator {
    kind: EstimatorKind,
    r_matrix: DMatrix<f64>,
    bias: DVector<f64>,
    source_norm: NormalizerState,
    target_norm: NormalizerState,
    source_raw_dim: usize,
    target_raw_dim: usize,
    l2_denorm: L2Denorm,
}

/// Everything needed to build a [`Translator`].
#[derive(Debug, Clone)]
pub struct TranslatorParts {
    pub kind: EstimatorKind,
    pub r_matrix: DMatrix<f64>,
    pub bias: DVector<f64>,
    pub source_norm: NormalizerState,
    pub target_norm: NormalizerState,
    pub source_raw_dim: usize,
    pub target_raw_dim: usize,
    pub l2_denorm: L2Denorm,
}

impl Translator {
    pub fn from_parts(parts: TranslatorParts) -> Result<Self> {
        let TranslatorParts {
            kind,
            r_matrix,
            bias,
            source_norm,
            target_norm,
            source_raw_dim,
            target_raw_dim,
            l2_denorm,
        } = parts;
        if source_raw_dim == 0 || target_raw_dim == 0 {
            return Err(Error::InvalidConfig("raw dimensions must be positive".into()));
        }
        let padded = source_raw_dim.max(target_raw_dim);
        if r_matrix.shape() != (padded, padded) {
            return Err(Error::ShapeMismatch {
                left: r_matrix.shape(),
                right: (padded, padded),
            });
        }
        if bias.len() != padded {
            return Err(Error::DimMismatch {
                expected: padded,
                found: bias.len(),
            });
        }
        for state in [&source_norm, &target_norm] {
            if state.dim() != padded {
                return Err(Error::DimMismatch {
                    expected: padded,
                    found: state.dim(),
                });
            }
            state.check()?;
        }
        if r_matrix.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "translator parameters must be finite".into(),
            ));
        }
        if kind != EstimatorKind::Affine && bias.iter().any(|&b| b != 0.0) {
            return Err(Error::InvalidConfig(format!(
                "{kind} translator must have a zero bias"
            )));
        }
        if kind.is_orthogonal() {
            let defect = orthogonality_defect(&r_matrix);
            if defect >= ORTHO_TOLERANCE {
                return Err(Error::InvalidConfig(format!(
                    "{kind} translator is not orthogonal (defect {defect:e})"
                )));
            }
        }
        Ok(Self {
            kind,
            r_matrix,
            bias,
            source_norm,
            target_norm,
            source_raw_dim,
            target_raw_dim,
            l2_denorm,
        })
    }

    /// `R = I`, `b = 0`, no scaling.
    pub fn identity(dim: usize) -> Self {
        Self {
            kind: EstimatorKind::Linear,
            r_matrix: DMatrix::identity(dim, dim),
            bias: DVector::zeros(dim),
            source_norm: NormalizerState::identity(dim),
            target_norm: NormalizerState::identity(dim),
            source_raw_dim: dim,
            target_raw_dim: dim,
            l2_denorm: L2Denorm::Identity,
        }
    }

    pub fn into_parts(self) -> TranslatorParts {
        TranslatorParts {
            kind: self.kind,
            r_matrix: self.r_matrix,
            bias: self.bias,
            source_norm: self.source_norm,
            target_norm: self.target_norm,
            source_raw_dim: self.source_raw_dim,
            target_raw_dim: self.target_raw_dim,
            l2_denorm: self.l2_denorm,
        }
    }

    pub fn kind(&self) -> EstimatorKind {
        self.kind
    }

    pub fn r_matrix(&self) -> &DMatrix<f64> {
        &self.r_matrix
    }

    pub fn bias(&self) -> &DVector<f64> {
        &self.bias
    }

    pub fn source_norm(&self) -> &NormalizerState {
        &self.source_norm
    }

    pub fn target_norm(&self) -> &NormalizerState {
        &self.target_norm
    }

    pub fn padded_dim(&self) -> usize {
        self.r_matrix.nrows()
    }

    pub fn source_raw_dim(&self) -> usize {
        self.source_raw_dim
    }

    pub fn target_raw_dim(&self) -> usize {
        self.target_raw_dim
    }

    pub fn l2_denorm(&self) -> L2Denorm {
        self.l2_denorm
    }

    /// Returns a copy using a different unit-norm de-normalization policy.
    pub fn with_l2_denorm(mut self, l2_denorm: L2Denorm) -> Self {
        self.l2_denorm = l2_denorm;
        self
    }

    /// Maps already padded and normalized rows through `x R + b`.
    pub fn transform_normalized(&self, space: &LatentSpace) -> Result<LatentSpace> {
        if space.dim() != self.padded_dim() {
            return Err(Error::DimMismatch {
                expected: self.padded_dim(),
                found: space.dim(),
            });
        }
        let mut out = space.matrix() * &self.r_matrix;
        if self.kind == EstimatorKind::Affine {
            let bias_t = self.bias.transpose();
            for mut row in out.row_iter_mut() {
                row += &bias_t;
            }
        }
        LatentSpace::new(out)
    }

    /// Translates source-space rows into the target space.
    pub fn apply(&self, space: &LatentSpace) -> Result<LatentSpace> {
        if space.dim() != self.source_raw_dim {
            return Err(Error::DimMismatch {
                expected: self.source_raw_dim,
                found: space.dim(),
            });
        }
        let padded = zero_pad(space, self.padded_dim())?;
        let normalized = normalize(&padded, &self.source_norm)?.space;
        let mapped = self.transform_normalized(&normalized)?;
        let restored = denormalize(&mapped, &self.target_norm, self.l2_denorm)?;
        trim(restored, self.target_raw_dim)
    }
}
