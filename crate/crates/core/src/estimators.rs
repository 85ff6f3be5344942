//! Estimators for the transformation between two normalized anchor sets.
//!
//! All estimators use the row convention: anchors are `k x d` matrices with
//! one sample per row and the fitted map acts as `x R (+ b)`.

use log::debug;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{lstsq, polar_factor, svd};
use crate::preprocess::{fit_normalizer, normalize, zero_pad, NormalizerState};
use crate::space::{gather_anchors, AnchorCorrespondence, LatentSpace};
use crate::translator::{Translator, TranslatorParts};
use crate::types::{EstimatorKind, L2Denorm, ScalingMode};

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub kind: EstimatorKind,
    /// Relative cutoff for singular values in the least-squares solve.
    pub pinv_rcond: f64,
    pub gd_max_epochs: usize,
    pub gd_learning_rate: f64,
    /// Gradient descent stops once an epoch improves the loss by less than this.
    pub gd_tolerance: f64,
    /// Carried for configuration round-trips; the optimizer is deterministic
    /// and does not draw random numbers.
    pub seed: u64,
}

impl FitConfig {
    pub fn new(kind: EstimatorKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        positive("pinv_rcond", self.pinv_rcond)?;
        positive("gd_learning_rate", self.gd_learning_rate)?;
        positive("gd_tolerance", self.gd_tolerance)?;
        if self.gd_max_epochs == 0 {
            return Err(Error::InvalidConfig("gd_max_epochs must be positive".into()));
        }
        Ok(())
    }
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            kind: EstimatorKind::Affine,
            pinv_rcond: 1e-10,
            gd_max_epochs: 300,
            gd_learning_rate: 0.05,
            gd_tolerance: 1e-9,
            seed: 0,
        }
    }
}

/// Record of the affine optimizer's run. Hitting the epoch limit is not an
/// error; `converged` is simply false.
#[derive(Debug, Clone, PartialEq)]
pub struct GdDiagnostics {
    pub epochs: usize,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub converged: bool,
    /// Loss of the accepted iterate after each epoch.
    pub loss_history: Vec<f64>,
}

fn check_pair(src: &DMatrix<f64>, tgt: &DMatrix<f64>) -> Result<()> {
    if src.shape() != tgt.shape() {
        return Err(Error::ShapeMismatch {
            left: src.shape(),
            right: tgt.shape(),
        });
    }
    Ok(())
}

/// Least-squares `R` minimizing `||src R - tgt||_F`.
pub(crate) fn estimate_linear(
    src: &DMatrix<f64>,
    tgt: &DMatrix<f64>,
    rcond: f64,
) -> Result<DMatrix<f64>> {
    check_pair(src, tgt)?;
    lstsq(src, tgt, rcond)
}

/// Orthogonal Procrustes: `R = U V^T` where `src^T tgt = U S V^T`.
///
/// Reflections are allowed, so `det(R)` may be -1.
pub(crate) fn estimate_ortho(src: &DMatrix<f64>, tgt: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_pair(src, tgt)?;
    let cross = src.transpose() * tgt;
    let decomposition = svd(&cross)?;
    Ok(decomposition.u * decomposition.v_t)
}

pub(crate) fn estimate_l_ortho(
    src: &DMatrix<f64>,
    tgt: &DMatrix<f64>,
    rcond: f64,
) -> Result<DMatrix<f64>> {
    let linear = estimate_linear(src, tgt, rcond)?;
    polar_factor(&linear)
}

fn column_means(m: &DMatrix<f64>) -> DVector<f64> {
    m.row_mean().transpose()
}

fn affine_loss(src: &DMatrix<f64>, tgt: &DMatrix<f64>, r: &DMatrix<f64>, b: &DVector<f64>) -> (f64, DMatrix<f64>) {
    let mut residual = src * r - tgt;
    let bias_t = b.transpose();
    for mut row in residual.row_iter_mut() {
        row += &bias_t;
    }
    let loss = residual.norm_squared() / residual.len() as f64;
    (loss, residual)
}

pub(crate) fn estimate_affine(
    src: &DMatrix<f64>,
    tgt: &DMatrix<f64>,
    cfg: &FitConfig,
) -> Result<(DMatrix<f64>, DVector<f64>, GdDiagnostics)> {
    check_pair(src, tgt)?;
    cfg.validate()?;

    // Warm start: least squares on centered anchors, bias from the means.
    let src_mean = column_means(src);
    let tgt_mean = column_means(tgt);
    let mut src_c = src.clone();
    let mut tgt_c = tgt.clone();
    for mut row in src_c.row_iter_mut() {
        row -= &src_mean.transpose();
    }
    for mut row in tgt_c.row_iter_mut() {
        row -= &tgt_mean.transpose();
    }
    let mut r = match lstsq(&src_c, &tgt_c, cfg.pinv_rcond) {
        Ok(r) => r,
        // a single anchor, or anchors identical up to translation: no linear part to learn
        Err(Error::DegenerateAnchors { .. }) => DMatrix::zeros(src.ncols(), tgt.ncols()),
        Err(e) => return Err(e),
    };
    let mut b = &tgt_mean - (src_mean.transpose() * &r).transpose();

    // Full-batch gradient descent on the mean squared error over all entries.
    // A step that increases the loss is rejected and the rate halved, so the
    // returned iterate is always the best seen.
    let scale = 2.0 / (src.nrows() * tgt.ncols()) as f64;
    let (mut loss, mut residual) = affine_loss(src, tgt, &r, &b);
    let initial_loss = loss;
    let mut lr = cfg.gd_learning_rate;
    let mut history = Vec::with_capacity(cfg.gd_max_epochs);
    let mut converged = false;
    let mut epochs = 0;
    while epochs < cfg.gd_max_epochs {
        epochs += 1;
        let grad_r = (src.transpose() * &residual) * scale;
        let grad_b = residual.row_sum().transpose() * scale;
        let cand_r = &r - &grad_r * lr;
        let cand_b = &b - &grad_b * lr;
        let (cand_loss, cand_residual) = affine_loss(src, tgt, &cand_r, &cand_b);
        if cand_loss.is_finite() && cand_loss <= loss {
            let improvement = loss - cand_loss;
            r = cand_r;
            b = cand_b;
            loss = cand_loss;
            residual = cand_residual;
            history.push(loss);
            if improvement < cfg.gd_tolerance {
                converged = true;
                break;
            }
        } else {
            history.push(loss);
            lr *= 0.5;
            if lr < f64::EPSILON * cfg.gd_learning_rate {
                converged = true;
                break;
            }
        }
    }
    debug!("affine gd: {epochs} epochs, loss {initial_loss:e} -> {loss:e}, converged = {converged}");
    Ok((
        r,
        b,
        GdDiagnostics {
            epochs,
            initial_loss,
            final_loss: loss,
            converged,
            loss_history: history,
        },
    ))
}

fn bare_translator(
    kind: EstimatorKind,
    r_matrix: DMatrix<f64>,
    bias: DVector<f64>,
) -> Result<Translator> {
    let d = r_matrix.nrows();
    Translator::from_parts(TranslatorParts {
        kind,
        r_matrix,
        bias,
        source_norm: NormalizerState::identity(d),
        target_norm: NormalizerState::identity(d),
        source_raw_dim: d,
        target_raw_dim: d,
        l2_denorm: L2Denorm::Identity,
    })
}

/// Least-squares fit on anchors that are already padded and normalized.
pub fn fit_linear(src: &LatentSpace, tgt: &LatentSpace, rcond: f64) -> Result<Translator> {
    let r = estimate_linear(src.matrix(), tgt.matrix(), rcond)?;
    let d = r.nrows();
    bare_translator(EstimatorKind::Linear, r, DVector::zeros(d))
}

/// Procrustes fit on anchors that are already padded and normalized.
pub fn fit_ortho(src: &LatentSpace, tgt: &LatentSpace) -> Result<Translator> {
    let r = estimate_ortho(src.matrix(), tgt.matrix())?;
    let d = r.nrows();
    bare_translator(EstimatorKind::Ortho, r, DVector::zeros(d))
}

/// Orthogonalized least-squares fit on anchors that are already padded and normalized.
pub fn fit_l_ortho(src: &LatentSpace, tgt: &LatentSpace, rcond: f64) -> Result<Translator> {
    let r = estimate_l_ortho(src.matrix(), tgt.matrix(), rcond)?;
    let d = r.nrows();
    bare_translator(EstimatorKind::LOrtho, r, DVector::zeros(d))
}

/// Affine fit on anchors that are already padded and normalized.
pub fn fit_affine(
    src: &LatentSpace,
    tgt: &LatentSpace,
    cfg: &FitConfig,
) -> Result<(Translator, GdDiagnostics)> {
    let (r, b, diagnostics) = estimate_affine(src.matrix(), tgt.matrix(), cfg)?;
    Ok((bare_translator(EstimatorKind::Affine, r, b)?, diagnostics))
}

/// Settings for [`fit_translator`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineConfig {
    pub fit: FitConfig,
    pub scaling: ScalingMode,
    pub l2_denorm: L2Denorm,
}

impl PipelineConfig {
    pub fn new(kind: EstimatorKind, scaling: ScalingMode) -> Self {
        Self {
            fit: FitConfig::new(kind),
            scaling,
            l2_denorm: L2Denorm::Identity,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FittedTranslator {
    pub translator: Translator,
    /// Present for the affine estimator only.
    pub diagnostics: Option<GdDiagnostics>,
}

/// Fits a translator between two raw spaces from their anchor correspondence:
/// pad both sides to a common dimension, fit scaling statistics on each side's
/// anchors, normalize the anchors and estimate the map between them.
pub fn fit_translator(
    source: &LatentSpace,
    target: &LatentSpace,
    anchors: &AnchorCorrespondence,
    config: &PipelineConfig,
) -> Result<FittedTranslator> {
    config.fit.validate()?;
    anchors.check_bounds(source, target)?;
    let padded_dim = source.dim().max(target.dim());

    let src_anchors = zero_pad(&gather_anchors(source, anchors.source_indices())?, padded_dim)?;
    let tgt_anchors = zero_pad(&gather_anchors(target, anchors.target_indices())?, padded_dim)?;
    let source_norm = fit_normalizer(&src_anchors, config.scaling)?;
    let target_norm = fit_normalizer(&tgt_anchors, config.scaling)?;
    let a = normalize(&src_anchors, &source_norm)?.space;
    let t = normalize(&tgt_anchors, &target_norm)?.space;

    let rcond = config.fit.pinv_rcond;
    let (r_matrix, bias, diagnostics) = match config.fit.kind {
        EstimatorKind::Linear => (
            estimate_linear(a.matrix(), t.matrix(), rcond)?,
            DVector::zeros(padded_dim),
            None,
        ),
        EstimatorKind::LOrtho => (
            estimate_l_ortho(a.matrix(), t.matrix(), rcond)?,
            DVector::zeros(padded_dim),
            None,
        ),
        EstimatorKind::Ortho => (
            estimate_ortho(a.matrix(), t.matrix())?,
            DVector::zeros(padded_dim),
            None,
        ),
        EstimatorKind::Affine => {
            let (r, b, diag) = estimate_affine(a.matrix(), t.matrix(), &config.fit)?;
            (r, b, Some(diag))
        }
    };

    let translator = Translator::from_parts(TranslatorParts {
        kind: config.fit.kind,
        r_matrix,
        bias,
        source_norm,
        target_norm,
        source_raw_dim: source.dim(),
        target_raw_dim: target.dim(),
        l2_denorm: config.l2_denorm,
    })?;
    Ok(FittedTranslator {
        translator,
        diagnostics,
    })
}
