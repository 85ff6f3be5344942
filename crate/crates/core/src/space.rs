//! Latent spaces and anchor correspondences.
//!
//! A [`LatentSpace`] is an `n x d` matrix holding one encoding per row. Every
//! constructor validates that the matrix is non-empty and finite, so the rest of
//! the crate can assume both.

use std::collections::HashSet;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Checks the invariants every latent space must satisfy.
pub fn validate_space(data: &DMatrix<f64>) -> Result<()> {
    let (rows, cols) = data.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::EmptySpace { rows, cols });
    }
    // column-major storage: linear index i maps to (i % rows, i / rows)
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: i % rows,
            col: i / rows,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatentSpace {
    data: DMatrix<f64>,
}

impl LatentSpace {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        validate_space(&data)?;
        Ok(Self { data })
    }

    /// Builds a space from a row-major buffer of `count * dim` values.
    pub fn from_row_slice(count: usize, dim: usize, values: &[f64]) -> Result<Self> {
        if values.len() != count * dim {
            return Err(Error::InvalidConfig(format!(
                "buffer of {} values cannot fill a {count}x{dim} space",
                values.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(count, dim, values))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let count = rows.len();
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut flat = Vec::with_capacity(count * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::new(DMatrix::from_row_slice(count, dim, &flat))
    }

    pub fn count(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.data.row(i).iter().copied().collect()
    }

    /// Row-major copy of all entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.count() * self.dim());
        for row in self.data.row_iter() {
            out.extend(row.iter().copied());
        }
        out
    }

    /// Selects rows by index. Indices must be in range; duplicates are allowed
    /// here (use [`gather_anchors`] for anchor selection).
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptySpace {
                rows: 0,
                cols: self.dim(),
            });
        }
        for &index in indices {
            if index >= self.count() {
                return Err(Error::IndexOutOfRange {
                    index,
                    len: self.count(),
                });
            }
        }
        Ok(Self {
            data: self.data.select_rows(indices),
        })
    }
}

fn check_unique(indices: &[usize]) -> Result<()> {
    let mut seen = HashSet::with_capacity(indices.len());
    for &index in indices {
        if !seen.insert(index) {
            return Err(Error::DuplicateIndex { index });
        }
    }
    Ok(())
}

/// Returns the `k x d` space whose row `i` is `space` row `indices[i]`.
pub fn gather_anchors(space: &LatentSpace, indices: &[usize]) -> Result<LatentSpace> {
    if indices.is_empty() {
        return Err(Error::NoAnchors);
    }
    for &index in indices {
        if index >= space.count() {
            return Err(Error::IndexOutOfRange {
                index,
                len: space.count(),
            });
        }
    }
    check_unique(indices)?;
    space.select_rows(indices)
}

/// Paired anchor rows: `source_indices[i]` in the source space corresponds to
/// `target_indices[i]` in the target space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnchorCorrespondence {
    source_indices: Vec<usize>,
    target_indices: Vec<usize>,
}

impl AnchorCorrespondence {
    pub fn new(source_indices: Vec<usize>, target_indices: Vec<usize>) -> Result<Self> {
        if source_indices.len() != target_indices.len() {
            return Err(Error::AnchorLengthMismatch {
                source_len: source_indices.len(),
                target_len: target_indices.len(),
            });
        }
        if source_indices.is_empty() {
            return Err(Error::NoAnchors);
        }
        check_unique(&source_indices)?;
        check_unique(&target_indices)?;
        Ok(Self {
            source_indices,
            target_indices,
        })
    }

    /// Same row positions on both sides.
    pub fn parallel(indices: Vec<usize>) -> Result<Self> {
        Self::new(indices.clone(), indices)
    }

    pub fn len(&self) -> usize {
        self.source_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source_indices.is_empty()
    }

    pub fn source_indices(&self) -> &[usize] {
        &self.source_indices
    }

    pub fn target_indices(&self) -> &[usize] {
        &self.target_indices
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.source_indices
            .iter()
            .copied()
            .zip(self.target_indices.iter().copied())
    }

    /// Keeps the pairs at the given positions, in the given order.
    pub fn subset(&self, positions: &[usize]) -> Result<Self> {
        let mut src = Vec::with_capacity(positions.len());
        let mut tgt = Vec::with_capacity(positions.len());
        for &p in positions {
            if p >= self.len() {
                return Err(Error::IndexOutOfRange {
                    index: p,
                    len: self.len(),
                });
            }
            src.push(self.source_indices[p]);
            tgt.push(self.target_indices[p]);
        }
        Self::new(src, tgt)
    }

    /// Checks that every index is in range for the given spaces.
    pub fn check_bounds(&self, source: &LatentSpace, target: &LatentSpace) -> Result<()> {
        for (s, t) in self.pairs() {
            if s >= source.count() {
                return Err(Error::IndexOutOfRange {
                    index: s,
                    len: source.count(),
                });
            }
            if t >= target.count() {
                return Err(Error::IndexOutOfRange {
                    index: t,
                    len: target.count(),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_accepts_finite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert!(validate_space(&m).is_ok());
    }

    #[test]
    fn validate_rejects_nan_and_inf() {
        let m = DMatrix::from_row_slice(1, 2, &[f64::NAN, 0.0]);
        assert!(matches!(
            validate_space(&m),
            Err(Error::NonFinite { row: 0, col: 0 })
        ));
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, f64::INFINITY]);
        assert!(matches!(
            validate_space(&m),
            Err(Error::NonFinite { row: 1, col: 1 })
        ));
    }

    #[test]
    fn validate_rejects_empty() {
        let m = DMatrix::<f64>::zeros(0, 3);
        assert!(matches!(
            validate_space(&m),
            Err(Error::EmptySpace { rows: 0, cols: 3 })
        ));
        assert!(LatentSpace::new(DMatrix::zeros(3, 0)).is_err());
    }

    #[test]
    fn gather_selects_in_order() {
        let s = LatentSpace::from_rows(&[[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]).unwrap();
        let g = gather_anchors(&s, &[2, 0]).unwrap();
        assert_eq!(g, LatentSpace::from_rows(&[[3.0, 3.0], [1.0, 1.0]]).unwrap());
    }

    #[test]
    fn gather_rejects_duplicates_and_out_of_range() {
        let s = LatentSpace::from_rows(&[[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]).unwrap();
        assert!(matches!(
            gather_anchors(&s, &[0, 0]),
            Err(Error::DuplicateIndex { index: 0 })
        ));
        assert!(matches!(
            gather_anchors(&s, &[5]),
            Err(Error::IndexOutOfRange { index: 5, len: 3 })
        ));
    }

    #[test]
    fn gather_is_bit_exact() {
        let vals = [0.1f64, -1e-300, 7.0e200, std::f64::consts::PI];
        let s = LatentSpace::from_row_slice(2, 2, &vals).unwrap();
        let g = gather_anchors(&s, &[1, 0]).unwrap();
        assert_eq!(g.row(0)[0].to_bits(), vals[2].to_bits());
        assert_eq!(g.row(1)[1].to_bits(), vals[1].to_bits());
    }

    #[test]
    fn correspondence_validation() {
        assert!(matches!(
            AnchorCorrespondence::new(vec![0, 1], vec![0]),
            Err(Error::AnchorLengthMismatch { .. })
        ));
        assert!(matches!(
            AnchorCorrespondence::new(vec![], vec![]),
            Err(Error::NoAnchors)
        ));
        assert!(matches!(
            AnchorCorrespondence::new(vec![0, 1], vec![3, 3]),
            Err(Error::DuplicateIndex { index: 3 })
        ));
        let c = AnchorCorrespondence::new(vec![0, 5], vec![0, 2]).unwrap();
        assert_eq!(c.pairs().collect::<Vec<_>>(), vec![(0, 0), (5, 2)]);
    }

    #[test]
    fn correspondence_bounds() {
        let s = LatentSpace::from_rows(&[[1.0], [2.0]]).unwrap();
        let c = AnchorCorrespondence::new(vec![0, 1], vec![1, 2]).unwrap();
        assert!(matches!(
            c.check_bounds(&s, &s),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
    }
}
