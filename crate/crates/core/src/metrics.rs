//! Translation quality metrics and the linear probe used to score stitched
//! classifiers.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{unit_rows, ZERO_NORM_EPS};
use crate::space::LatentSpace;

fn same_shape(a: &LatentSpace, b: &LatentSpace) -> Result<()> {
    if a.matrix().shape() != b.matrix().shape() {
        return Err(Error::ShapeMismatch {
            left: a.matrix().shape(),
            right: b.matrix().shape(),
        });
    }
    Ok(())
}

/// Mean row-wise cosine similarity. Rows where either side is zero count as 0.
pub fn latent_cosine(translated: &LatentSpace, target: &LatentSpace) -> Result<f64> {
    same_shape(translated, target)?;
    let total: f64 = translated
        .matrix()
        .row_iter()
        .zip(target.matrix().row_iter())
        .map(|(a, b)| {
            let denom = a.norm() * b.norm();
            if a.norm() < ZERO_NORM_EPS || b.norm() < ZERO_NORM_EPS {
                0.0
            } else {
                (a.dot(&b) / denom).clamp(-1.0, 1.0)
            }
        })
        .sum();
    Ok(total / translated.count() as f64)
}

/// Mean squared difference over all entries.
pub fn latent_mse(translated: &LatentSpace, target: &LatentSpace) -> Result<f64> {
    same_shape(translated, target)?;
    let diff = translated.matrix() - target.matrix();
    Ok(diff.norm_squared() / diff.len() as f64)
}

pub fn reconstruction_mse(decoded: &LatentSpace, original: &LatentSpace) -> Result<f64> {
    latent_mse(decoded, original)
}

/// Unit-normalizes each row and multiplies it by `alpha`. Zero rows pass through.
pub fn rescale_inject(space: &LatentSpace, alpha: f64) -> Result<LatentSpace> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    let (unit, _) = unit_rows(space.matrix());
    LatentSpace::new(unit * alpha)
}

pub const DEFAULT_RIDGE_LAMBDA: f64 = 1e-3;

/// Ridge regression onto one-hot targets; predicts by argmax.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProbe {
    /// `d x c`
    weights: DMatrix<f64>,
    /// Length `c`; absent for probes trained without an intercept.
    bias: Option<DVector<f64>>,
    ridge_lambda: f64,
}

impl LinearProbe {
    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn bias(&self) -> Option<&DVector<f64>> {
        self.bias.as_ref()
    }

    pub fn classes(&self) -> usize {
        self.weights.ncols()
    }

    pub fn dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn ridge_lambda(&self) -> f64 {
        self.ridge_lambda
    }

    /// Class scores `x W (+ b)`, one row per sample.
    pub fn scores(&self, space: &LatentSpace) -> Result<DMatrix<f64>> {
        if space.dim() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: space.dim(),
            });
        }
        let mut scores = space.matrix() * &self.weights;
        if let Some(b) = &self.bias {
            for mut row in scores.row_iter_mut() {
                row += b.transpose();
            }
        }
        Ok(scores)
    }

    /// Argmax class per row; ties go to the lowest class index.
    pub fn predict(&self, space: &LatentSpace) -> Result<Vec<usize>> {
        let scores = self.scores(space)?;
        Ok(scores
            .row_iter()
            .map(|row| {
                let mut best = 0;
                for (c, &v) in row.iter().enumerate().skip(1) {
                    if v > row[best] {
                        best = c;
                    }
                }
                best
            })
            .collect())
    }
}

fn check_labels(space: &LatentSpace, labels: &[usize]) -> Result<usize> {
    if labels.len() != space.count() {
        return Err(Error::ShapeMismatch {
            left: (space.count(), space.dim()),
            right: (labels.len(), 1),
        });
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(Error::SingleClass);
    }
    Ok(classes)
}

fn fit_ridge(space: &LatentSpace, labels: &[usize], ridge_lambda: f64, intercept: bool) -> Result<LinearProbe> {
    if !(ridge_lambda > 0.0 && ridge_lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "ridge_lambda must be positive, got {ridge_lambda}"
        )));
    }
    let classes = check_labels(space, labels)?;
    let (n, d) = (space.count(), space.dim());
    let cols = if intercept { d + 1 } else { d };
    let mut design = DMatrix::from_element(n, cols, 1.0);
    design.columns_mut(0, d).copy_from(space.matrix());
    let mut one_hot = DMatrix::zeros(n, classes);
    for (i, &l) in labels.iter().enumerate() {
        one_hot[(i, l)] = 1.0;
    }
    let mut gram = design.transpose() * &design;
    for i in 0..cols {
        gram[(i, i)] += ridge_lambda;
    }
    let rhs = design.transpose() * one_hot;
    let solution = gram
        .cholesky()
        .ok_or_else(|| Error::InvalidConfig("ridge system is not positive definite".into()))?
        .solve(&rhs);
    let weights = solution.rows(0, d).into_owned();
    let bias = intercept.then(|| solution.row(d).transpose());
    Ok(LinearProbe {
        weights,
        bias,
        ridge_lambda,
    })
}

/// Closed-form ridge regression to one-hot targets with a constant feature
/// appended for the intercept: `W = (X^T X + lambda I)^-1 X^T Y`.
pub fn train_probe(space: &LatentSpace, labels: &[usize], ridge_lambda: f64) -> Result<LinearProbe> {
    fit_ridge(space, labels, ridge_lambda, true)
}

/// As [`train_probe`] but without an intercept, so predictions are invariant
/// to positive rescaling of the inputs.
pub fn train_probe_without_intercept(
    space: &LatentSpace,
    labels: &[usize],
    ridge_lambda: f64,
) -> Result<LinearProbe> {
    fit_ridge(space, labels, ridge_lambda, false)
}

/// Fraction of rows whose predicted class equals the label.
pub fn probe_accuracy(probe: &LinearProbe, space: &LatentSpace, labels: &[usize]) -> Result<f64> {
    if labels.len() != space.count() {
        return Err(Error::ShapeMismatch {
            left: (space.count(), space.dim()),
            right: (labels.len(), 1),
        });
    }
    let predictions = probe.predict(space)?;
    let hits = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / labels.len() as f64)
}

/// [`probe_accuracy`] over a subset of rows given as a possibly empty selection.
pub fn probe_accuracy_rows(
    probe: &LinearProbe,
    space: &LatentSpace,
    labels: &[usize],
    rows: &[usize],
) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::EmptySpace {
            rows: 0,
            cols: space.dim(),
        });
    }
    let subset = space.select_rows(rows)?;
    let sub_labels: Vec<usize> = rows.iter().map(|&r| labels[r]).collect();
    probe_accuracy(probe, &subset, &sub_labels)
}

/// Scores for one stitching configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Estimator name, or `absolute` / `relative` / `no-stitch` for baselines.
    pub method: String,
    pub k_anchors: usize,
    pub n_eval: usize,
    pub lcos: Option<f64>,
    pub lmse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl EvalReport {
    pub fn new(method: impl Into<String>, k_anchors: usize, n_eval: usize) -> Self {
        Self {
            method: method.into(),
            k_anchors,
            n_eval,
            lcos: None,
            lmse: None,
            rmse: None,
            accuracy: None,
            note: None,
        }
    }

    pub fn unavailable(method: impl Into<String>, k_anchors: usize, n_eval: usize, note: &str) -> Self {
        Self {
            note: Some(note.to_owned()),
            ..Self::new(method, k_anchors, n_eval)
        }
    }
}
