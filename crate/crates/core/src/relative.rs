//! Relative representation baseline: each sample becomes its vector of cosine
//! similarities to a fixed set of anchors.

use log::warn;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::preprocess::{unit_rows, ZERO_NORM_EPS};
use crate::space::LatentSpace;

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeProjector {
    /// `k x d`, every row unit norm.
    anchor_matrix: DMatrix<f64>,
}

impl RelativeProjector {
    pub fn anchor_matrix(&self) -> &DMatrix<f64> {
        &self.anchor_matrix
    }

    pub fn anchor_count(&self) -> usize {
        self.anchor_matrix.nrows()
    }

    pub fn dim(&self) -> usize {
        self.anchor_matrix.ncols()
    }
}

pub fn build_projector(anchors: &LatentSpace) -> Result<RelativeProjector> {
    for (row, r) in anchors.matrix().row_iter().enumerate() {
        if r.norm() < ZERO_NORM_EPS {
            return Err(Error::ZeroNormAnchor { row });
        }
    }
    let (anchor_matrix, _) = unit_rows(anchors.matrix());
    Ok(RelativeProjector { anchor_matrix })
}

/// Projects `space` onto the anchors, giving an `n x k` matrix of cosines.
pub fn project_relative(space: &LatentSpace, projector: &RelativeProjector) -> Result<LatentSpace> {
    if space.dim() != projector.dim() {
        return Err(Error::DimMismatch {
            expected: projector.dim(),
            found: space.dim(),
        });
    }
    let (unit, zero_rows) = unit_rows(space.matrix());
    if !zero_rows.is_empty() {
        warn!(
            "{} zero-norm sample(s) projected to zero relative rows",
            zero_rows.len()
        );
    }
    LatentSpace::new(unit * projector.anchor_matrix.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{gaussian_matrix, random_orthogonal};
    use proptest::prelude::*;

    fn space(rows: &[&[f64]]) -> LatentSpace {
        LatentSpace::from_rows(rows).unwrap()
    }

    #[test]
    fn build_examples() {
        let p = build_projector(&space(&[&[3.0, 4.0]])).unwrap();
        assert!((p.anchor_matrix()[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((p.anchor_matrix()[(0, 1)] - 0.8).abs() < 1e-15);
        let basis = space(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(build_projector(&basis).unwrap().anchor_matrix(), basis.matrix());
        assert!(matches!(
            build_projector(&space(&[&[1.0, 0.0], &[0.0, 0.0]])),
            Err(Error::ZeroNormAnchor { row: 1 })
        ));
    }

    #[test]
    fn project_examples() {
        let basis = build_projector(&space(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_eq!(
            project_relative(&space(&[&[1.0, 0.0]]), &basis).unwrap().row(0),
            vec![1.0, 0.0]
        );
        let out = project_relative(&space(&[&[1.0, 1.0]]), &basis).unwrap().row(0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out[0] - h).abs() < 1e-15 && (out[1] - h).abs() < 1e-15);

        let single = build_projector(&space(&[&[1.0, 0.0]])).unwrap();
        assert_eq!(
            project_relative(&space(&[&[-2.0, 0.0]]), &single).unwrap().row(0),
            vec![-1.0]
        );
        assert_eq!(
            project_relative(&space(&[&[0.0, 0.0]]), &single).unwrap().row(0),
            vec![0.0]
        );
        assert!(project_relative(&space(&[&[1.0, 0.0, 0.0]]), &single).is_err());
    }

    proptest! {
        #[test]
        fn invariant_to_rotation_and_positive_scaling(seed in 0u64..1000, n in 1usize..20, k in 1usize..10, d in 1usize..8) {
            let x = gaussian_matrix(n, d, seed);
            let a = gaussian_matrix(k, d, seed + 1);
            let q = random_orthogonal(d, seed + 2);
            let base = project_relative(
                &LatentSpace::new(x.clone()).unwrap(),
                &build_projector(&LatentSpace::new(a.clone()).unwrap()).unwrap(),
            ).unwrap();
            let rotated = project_relative(
                &LatentSpace::new(&x * &q).unwrap(),
                &build_projector(&LatentSpace::new(&a * &q).unwrap()).unwrap(),
            ).unwrap();
            prop_assert!((base.matrix() - rotated.matrix()).amax() < 1e-9);

            let scales = gaussian_matrix(n + k, 1, seed + 3);
            let mut xs = x.clone();
            for (i, mut row) in xs.row_iter_mut().enumerate() {
                row *= scales[i].abs() + 0.01;
            }
            let mut as_ = a.clone();
            for (i, mut row) in as_.row_iter_mut().enumerate() {
                row *= 1.0 / (scales[n + i].abs() + 0.01);
            }
            let scaled = project_relative(
                &LatentSpace::new(xs).unwrap(),
                &build_projector(&LatentSpace::new(as_).unwrap()).unwrap(),
            ).unwrap();
            prop_assert!((base.matrix() - scaled.matrix()).amax() < 1e-9);
            prop_assert!(base.matrix().iter().all(|v| v.abs() <= 1.0 + 1e-9));
        }
    }
}
