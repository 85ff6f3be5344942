//! Zero-padding and the normalize / de-normalize pair wrapped around the
//! estimated transformation.
//!
//! Order on the source side is pad, center, scale; on the target side the
//! translated rows are de-scaled and then de-centered. Statistics are always
//! fitted on anchors only, after padding, so that both sides share a common
//! dimension.

use log::warn;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::space::LatentSpace;
use crate::types::{L2Denorm, ScalingMode};

/// Lower bound on fitted standard deviations.
pub const SCALE_FLOOR: f64 = 1e-8;

/// Rows with a Euclidean norm below this are treated as zero under unit-norm scaling.
pub const ZERO_NORM_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum NormalizerState {
    Standard { means: Vec<f64>, scales: Vec<f64> },
    UnitNorm { dim: usize, mean_anchor_norm: f64 },
    None { dim: usize },
}

impl NormalizerState {
    pub fn identity(dim: usize) -> Self {
        NormalizerState::None { dim }
    }

    pub fn mode(&self) -> ScalingMode {
        match self {
            NormalizerState::Standard { .. } => ScalingMode::Standard,
            NormalizerState::UnitNorm { .. } => ScalingMode::UnitNorm,
            NormalizerState::None { .. } => ScalingMode::None,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            NormalizerState::Standard { means, .. } => means.len(),
            NormalizerState::UnitNorm { dim, .. } | NormalizerState::None { dim } => *dim,
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        match self {
            NormalizerState::Standard { means, scales } => {
                if means.len() != scales.len() {
                    return Err(Error::DimMismatch {
                        expected: means.len(),
                        found: scales.len(),
                    });
                }
                if means.iter().any(|m| !m.is_finite())
                    || scales.iter().any(|s| !s.is_finite() || *s < SCALE_FLOOR)
                {
                    return Err(Error::InvalidConfig(
                        "standard scaling statistics must be finite with scales >= 1e-8".into(),
                    ));
                }
            }
            NormalizerState::UnitNorm {
                mean_anchor_norm, ..
            } => {
                if !(mean_anchor_norm.is_finite() && *mean_anchor_norm > 0.0) {
                    return Err(Error::InvalidConfig(
                        "mean anchor norm must be positive".into(),
                    ));
                }
            }
            NormalizerState::None { .. } => {}
        }
        Ok(())
    }

    fn expect_dim(&self, space: &LatentSpace) -> Result<()> {
        if space.dim() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: space.dim(),
            });
        }
        Ok(())
    }
}

/// Output of [`normalize`]: the scaled space plus the rows that could not be
/// unit-normalized because their norm was (numerically) zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub space: LatentSpace,
    pub zero_norm_rows: Vec<usize>,
}

/// Appends zero columns up to `target_dim`.
pub fn zero_pad(space: &LatentSpace, target_dim: usize) -> Result<LatentSpace> {
    let dim = space.dim();
    if target_dim < dim {
        return Err(Error::ShrinkForbidden {
            from: dim,
            to: target_dim,
        });
    }
    if target_dim == dim {
        return Ok(space.clone());
    }
    let mut data = DMatrix::zeros(space.count(), target_dim);
    data.columns_mut(0, dim).copy_from(space.matrix());
    LatentSpace::new(data)
}

/// Drops trailing columns, keeping the first `dim`.
pub(crate) fn trim(space: LatentSpace, dim: usize) -> Result<LatentSpace> {
    if dim == space.dim() {
        return Ok(space);
    }
    LatentSpace::new(space.matrix().columns(0, dim).into_owned())
}

pub fn fit_normalizer(anchors: &LatentSpace, mode: ScalingMode) -> Result<NormalizerState> {
    let dim = anchors.dim();
    let k = anchors.count();
    match mode {
        ScalingMode::Standard => {
            if k < 2 {
                return Err(Error::TooFewAnchors { found: k });
            }
            let m = anchors.matrix();
            let n = k as f64;
            let mut means = Vec::with_capacity(dim);
            let mut scales = Vec::with_capacity(dim);
            for col in m.column_iter() {
                let mean = col.sum() / n;
                // population variance, ddof = 0
                let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                means.push(mean);
                scales.push(var.sqrt().max(SCALE_FLOOR));
            }
            Ok(NormalizerState::Standard { means, scales })
        }
        ScalingMode::UnitNorm => {
            let total: f64 = anchors.matrix().row_iter().map(|r| r.norm()).sum();
            let mean_anchor_norm = total / k as f64;
            if mean_anchor_norm.is_nan() || mean_anchor_norm <= 0.0 {
                return Err(Error::ZeroNormAnchor { row: 0 });
            }
            Ok(NormalizerState::UnitNorm {
                dim,
                mean_anchor_norm,
            })
        }
        ScalingMode::None => Ok(NormalizerState::None { dim }),
    }
}

/// Divides every row by its own norm. Zero rows pass through and are reported.
pub(crate) fn unit_rows(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<usize>) {
    let mut out = m.clone();
    let mut zero_rows = Vec::new();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        let norm = row.norm();
        if norm < ZERO_NORM_EPS {
            zero_rows.push(i);
        } else {
            row.unscale_mut(norm);
        }
    }
    (out, zero_rows)
}

pub fn normalize(space: &LatentSpace, state: &NormalizerState) -> Result<Normalized> {
    state.expect_dim(space)?;
    match state {
        NormalizerState::Standard { means, scales } => {
            let mut out = space.matrix().clone();
            for (j, mut col) in out.column_iter_mut().enumerate() {
                let (mean, scale) = (means[j], scales[j]);
                col.apply(|v| *v = (*v - mean) / scale);
            }
            Ok(Normalized {
                space: LatentSpace::new(out)?,
                zero_norm_rows: Vec::new(),
            })
        }
        NormalizerState::UnitNorm { .. } => {
            let (out, zero_norm_rows) = unit_rows(space.matrix());
            if !zero_norm_rows.is_empty() {
                warn!(
                    "{} zero-norm row(s) left unscaled under unit-norm scaling",
                    zero_norm_rows.len()
                );
            }
            Ok(Normalized {
                space: LatentSpace::new(out)?,
                zero_norm_rows,
            })
        }
        NormalizerState::None { .. } => Ok(Normalized {
            space: space.clone(),
            zero_norm_rows: Vec::new(),
        }),
    }
}

pub fn denormalize(
    space: &LatentSpace,
    state: &NormalizerState,
    l2: L2Denorm,
) -> Result<LatentSpace> {
    state.expect_dim(space)?;
    match state {
        NormalizerState::Standard { means, scales } => {
            let mut out = space.matrix().clone();
            for (j, mut col) in out.column_iter_mut().enumerate() {
                let (mean, scale) = (means[j], scales[j]);
                col.apply(|v| *v = *v * scale + mean);
            }
            LatentSpace::new(out)
        }
        NormalizerState::UnitNorm {
            mean_anchor_norm, ..
        } => match l2 {
            L2Denorm::Identity => Ok(space.clone()),
            L2Denorm::MeanNorm => {
                let (mut out, _) = unit_rows(space.matrix());
                for mut row in out.row_iter_mut() {
                    if row.norm() >= ZERO_NORM_EPS {
                        row.scale_mut(*mean_anchor_norm);
                    }
                }
                LatentSpace::new(out)
            }
        },
        NormalizerState::None { .. } => Ok(space.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn space(rows: &[&[f64]]) -> LatentSpace {
        LatentSpace::from_rows(rows).unwrap()
    }

    #[test]
    fn zero_pad_examples() {
        let s = space(&[&[1.0, 2.0]]);
        assert_eq!(zero_pad(&s, 4).unwrap(), space(&[&[1.0, 2.0, 0.0, 0.0]]));
        assert_eq!(zero_pad(&s, 2).unwrap(), s);
        assert!(matches!(
            zero_pad(&space(&[&[1.0, 2.0, 3.0]]), 2),
            Err(Error::ShrinkForbidden { from: 3, to: 2 })
        ));
    }

    #[test]
    fn fit_standard_uses_population_statistics() {
        let state = fit_normalizer(&space(&[&[1.0, 3.0], &[3.0, 7.0]]), ScalingMode::Standard)
            .unwrap();
        assert_eq!(
            state,
            NormalizerState::Standard {
                means: vec![2.0, 5.0],
                scales: vec![1.0, 2.0]
            }
        );
    }

    #[test]
    fn fit_standard_floors_constant_columns() {
        let state = fit_normalizer(&space(&[&[1.0, 1.0], &[1.0, 1.0]]), ScalingMode::Standard)
            .unwrap();
        let NormalizerState::Standard { scales, .. } = state else {
            panic!("expected standard state")
        };
        assert_eq!(scales, vec![1e-8, 1e-8]);
    }

    #[test]
    fn fit_standard_needs_two_anchors() {
        assert!(matches!(
            fit_normalizer(&space(&[&[1.0, 2.0]]), ScalingMode::Standard),
            Err(Error::TooFewAnchors { found: 1 })
        ));
    }

    #[test]
    fn fit_unit_norm_mean() {
        let state = fit_normalizer(&space(&[&[3.0, 4.0]]), ScalingMode::UnitNorm).unwrap();
        assert_eq!(
            state,
            NormalizerState::UnitNorm {
                dim: 2,
                mean_anchor_norm: 5.0
            }
        );
        assert_eq!(
            fit_normalizer(&space(&[&[3.0, 4.0]]), ScalingMode::None).unwrap(),
            NormalizerState::None { dim: 2 }
        );
    }

    #[test]
    fn normalize_examples() {
        let std = NormalizerState::Standard {
            means: vec![2.0, 5.0],
            scales: vec![1.0, 2.0],
        };
        let out = normalize(&space(&[&[5.0, 9.0]]), &std).unwrap();
        assert_eq!(out.space, space(&[&[3.0, 2.0]]));

        let l2 = NormalizerState::UnitNorm {
            dim: 2,
            mean_anchor_norm: 1.0,
        };
        let out = normalize(&space(&[&[3.0, 4.0]]), &l2).unwrap();
        assert!((out.space.row(0)[0] - 0.6).abs() < 1e-15);
        assert!((out.space.row(0)[1] - 0.8).abs() < 1e-15);

        let out = normalize(&space(&[&[0.0, 0.0]]), &l2).unwrap();
        assert_eq!(out.space, space(&[&[0.0, 0.0]]));
        assert_eq!(out.zero_norm_rows, vec![0]);
    }

    #[test]
    fn normalize_rejects_dim_mismatch() {
        let state = NormalizerState::None { dim: 3 };
        assert!(matches!(
            normalize(&space(&[&[1.0, 2.0]]), &state),
            Err(Error::DimMismatch {
                expected: 3,
                found: 2
            })
        ));
        assert!(denormalize(&space(&[&[1.0, 2.0]]), &state, L2Denorm::Identity).is_err());
    }

    #[test]
    fn denormalize_examples() {
        let std = NormalizerState::Standard {
            means: vec![2.0, 5.0],
            scales: vec![1.0, 2.0],
        };
        assert_eq!(
            denormalize(&space(&[&[3.0, 2.0]]), &std, L2Denorm::Identity).unwrap(),
            space(&[&[5.0, 9.0]])
        );
        let row = space(&[&[0.3, -7.0]]);
        assert_eq!(
            denormalize(&row, &NormalizerState::None { dim: 2 }, L2Denorm::MeanNorm).unwrap(),
            row
        );
        let l2 = NormalizerState::UnitNorm {
            dim: 2,
            mean_anchor_norm: 10.0,
        };
        let out = denormalize(&space(&[&[0.6, 0.8]]), &l2, L2Denorm::MeanNorm).unwrap();
        assert!((out.row(0)[0] - 6.0).abs() < 1e-12);
        assert!((out.row(0)[1] - 8.0).abs() < 1e-12);
        let unit = space(&[&[0.6, 0.8]]);
        assert_eq!(denormalize(&unit, &l2, L2Denorm::Identity).unwrap(), unit);
    }

    #[test]
    fn padded_columns_stay_zero_after_standard_scaling() {
        let s = space(&[&[1.0, 2.0], &[-3.0, 0.5], &[4.0, 4.0]]);
        let padded = zero_pad(&s, 5).unwrap();
        let state = fit_normalizer(&padded, ScalingMode::Standard).unwrap();
        let out = normalize(&padded, &state).unwrap().space;
        for i in 0..3 {
            for j in 2..5 {
                assert_eq!(out.matrix()[(i, j)].to_bits(), 0f64.to_bits());
            }
        }
    }

    fn finite_space() -> impl Strategy<Value = LatentSpace> {
        (2usize..12, 1usize..6).prop_flat_map(|(n, d)| {
            prop::collection::vec(-1e3f64..1e3, n * d)
                .prop_map(move |v| LatentSpace::from_row_slice(n, d, &v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn standard_round_trip(s in finite_space()) {
            let state = fit_normalizer(&s, ScalingMode::Standard).unwrap();
            let back = denormalize(&normalize(&s, &state).unwrap().space, &state, L2Denorm::Identity).unwrap();
            for (a, b) in s.matrix().iter().zip(back.matrix().iter()) {
                // relative to the column scale; entries near zero cancel from ~|mean|
                let tol = 1e-10 * a.abs().max(1.0);
                prop_assert!((a - b).abs() <= tol, "{a} vs {b}");
            }
        }

        #[test]
        fn standardized_anchors_have_zero_mean_unit_std(s in finite_space()) {
            let state = fit_normalizer(&s, ScalingMode::Standard).unwrap();
            let NormalizerState::Standard { scales, .. } = &state else { unreachable!() };
            let out = normalize(&s, &state).unwrap().space;
            let n = s.count() as f64;
            for (j, col) in out.matrix().column_iter().enumerate() {
                let mean = col.sum() / n;
                prop_assert!(mean.abs() < 1e-10);
                if scales[j] > SCALE_FLOOR {
                    let std = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
                    prop_assert!((std - 1.0).abs() < 1e-8);
                }
            }
        }

        #[test]
        fn unit_norm_rows_have_norm_one(s in finite_space()) {
            let state = fit_normalizer(&s, ScalingMode::UnitNorm);
            prop_assume!(state.is_ok());
            let out = normalize(&s, &state.unwrap()).unwrap();
            for (i, row) in out.space.matrix().row_iter().enumerate() {
                if !out.zero_norm_rows.contains(&i) {
                    prop_assert!((row.norm() - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}
