//! Dense kernels shared by the estimators: thin SVD, truncated pseudo-inverse
//! solves, the orthogonal polar factor and a sign-normalized QR.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const SVD_EPS: f64 = 1e-15;
const SVD_MAX_ITER: usize = 10_000;

pub(crate) struct Svd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v_t: DMatrix<f64>,
}

pub(crate) fn svd(m: &DMatrix<f64>) -> Result<Svd> {
    let decomposition = m
        .clone()
        .try_svd(true, true, SVD_EPS, SVD_MAX_ITER)
        .ok_or(Error::SvdFailure)?;
    let u = decomposition.u.ok_or(Error::SvdFailure)?;
    let v_t = decomposition.v_t.ok_or(Error::SvdFailure)?;
    if decomposition.singular_values.iter().any(|s| !s.is_finite()) {
        return Err(Error::SvdFailure);
    }
    Ok(Svd {
        u,
        singular_values: decomposition.singular_values,
        v_t,
    })
}

/// Minimum-norm least-squares solution of `a * x = b`.
///
/// Singular values below `rcond * sigma_max` are treated as zero. Errors with
/// `DegenerateAnchors` when `a` carries no signal at all.
pub(crate) fn lstsq(a: &DMatrix<f64>, b: &DMatrix<f64>, rcond: f64) -> Result<DMatrix<f64>> {
    let Svd {
        u,
        singular_values,
        v_t,
    } = svd(a)?;
    let sigma_max = singular_values.max();
    if sigma_max.is_nan() || sigma_max <= f64::EPSILON {
        return Err(Error::DegenerateAnchors { sigma_max });
    }
    let cutoff = rcond * sigma_max;
    // x = V * diag(1/s) * U^T * b, skipping truncated directions
    let mut projected = u.transpose() * b;
    for (i, &s) in singular_values.iter().enumerate() {
        let inv = if s > cutoff { 1.0 / s } else { 0.0 };
        projected.row_mut(i).scale_mut(inv);
    }
    Ok(v_t.transpose() * projected)
}

/// Orthogonal factor `U V^T` of the SVD `m = U S V^T`.
pub(crate) fn polar_factor(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let Svd { u, v_t, .. } = svd(m)?;
    Ok(u * v_t)
}

/// QR factorization with the diagonal of `R` forced non-negative, which makes
/// `Q` unique for full-rank square input.
pub(crate) fn qr_positive(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..r.nrows().min(r.ncols()) {
        if r[(i, i)] < 0.0 {
            r.row_mut(i).neg_mut();
            q.column_mut(i).neg_mut();
        }
    }
    (q, r)
}

/// Ratio of largest to smallest singular value.
pub(crate) fn condition_number(m: &DMatrix<f64>) -> Result<f64> {
    let s = svd(m)?.singular_values;
    let min = s.min();
    if min <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(s.max() / min)
}

/// `||R^T R - I||_F`.
pub fn orthogonality_defect(r: &DMatrix<f64>) -> f64 {
    let gram = r.transpose() * r;
    (gram - DMatrix::identity(r.ncols(), r.ncols())).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::gaussian_matrix;

    #[test]
    fn svd_reconstructs_large_random_matrix() {
        let m = gaussian_matrix(512, 512, 11);
        let Svd {
            u,
            singular_values,
            v_t,
        } = svd(&m).unwrap();
        let rebuilt = &u * DMatrix::from_diagonal(&singular_values) * &v_t;
        let rel = (rebuilt - &m).norm() / m.norm();
        assert!(rel < 1e-10, "relative reconstruction error {rel:e}");
    }

    #[test]
    fn lstsq_truncates_rank_deficient_columns() {
        // second column duplicates the first: minimum-norm solution splits the weight
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let b = DMatrix::from_row_slice(3, 1, &[2.0, 4.0, 6.0]);
        let x = lstsq(&a, &b, 1e-10).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((x[(1, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lstsq_rejects_zero_matrix() {
        let a = DMatrix::zeros(3, 2);
        let b = DMatrix::zeros(3, 2);
        assert!(matches!(
            lstsq(&a, &b, 1e-10),
            Err(Error::DegenerateAnchors { .. })
        ));
    }

    #[test]
    fn qr_positive_has_nonnegative_diagonal() {
        let m = gaussian_matrix(6, 6, 3);
        let (q, r) = qr_positive(&m);
        for i in 0..6 {
            assert!(r[(i, i)] >= 0.0);
        }
        assert!(orthogonality_defect(&q) < 1e-12);
        assert!((q * r - m).norm() < 1e-12);
    }

    #[test]
    fn polar_factor_of_diagonal_is_identity() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]));
        let p = polar_factor(&m).unwrap();
        assert!((p - DMatrix::identity(2, 2)).norm() < 1e-14);
    }
}
