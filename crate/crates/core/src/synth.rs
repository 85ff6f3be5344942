//! Seeded generators for spaces with a known relationship, tiny linear
//! autoencoders, and labeled Gaussian blobs.
//!
//! All randomness comes from Xoshiro256++ seeded through `seed_from_u64`
//! (SplitMix64 expansion). Normal deviates use `rand_distr::StandardNormal`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::linalg::{condition_number, qr_positive, svd};
use crate::preprocess::NormalizerState;
use crate::space::LatentSpace;
use crate::translator::{Translator, TranslatorParts};
use crate::types::{EstimatorKind, L2Denorm};

pub type SynthRng = Xoshiro256PlusPlus;

/// Upper bound on the condition number of planted invertible maps.
pub const MAX_PLANT_CONDITION: f64 = 1e3;

pub fn rng(seed: u64) -> SynthRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

fn fill_gaussian(rng: &mut SynthRng, rows: usize, cols: usize) -> DMatrix<f64> {
    // filled in row-major order so that the stream layout is independent of storage
    let values: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    DMatrix::from_row_slice(rows, cols, &values)
}

/// `rows x cols` matrix of independent standard normals.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    fill_gaussian(&mut rng(seed), rows, cols)
}

fn draw_orthogonal(rng: &mut SynthRng, dim: usize) -> DMatrix<f64> {
    qr_positive(&fill_gaussian(rng, dim, dim)).0
}

/// Haar-distributed orthogonal matrix: `Q` from the QR of a Gaussian matrix
/// with the diagonal of `R` made positive.
pub fn random_orthogonal(dim: usize, seed: u64) -> DMatrix<f64> {
    draw_orthogonal(&mut rng(seed), dim)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformClass {
    Orthogonal,
    /// `diag(s) Q` with `s` uniform in `[0.5, 2]`.
    ScaledOrthogonal,
    /// Gaussian matrix resampled until its condition number is below 1e3.
    InvertibleLinear,
    /// Invertible linear map plus a Gaussian bias.
    Affine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantSpec {
    pub transform_class: TransformClass,
    pub noise_sigma: f64,
    pub n: usize,
    pub d_src: usize,
    pub d_tgt: usize,
    pub seed: u64,
    /// Per-feature offset added to the target after the planted map.
    pub target_shift: Option<Vec<f64>>,
    /// Per-feature positive scale applied to the target after the planted map.
    pub target_scale: Option<Vec<f64>>,
}

impl PlantSpec {
    pub fn new(transform_class: TransformClass, n: usize, dim: usize, seed: u64) -> Self {
        Self {
            transform_class,
            noise_sigma: 0.0,
            n,
            d_src: dim,
            d_tgt: dim,
            seed,
            target_shift: None,
            target_scale: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidConfig("noise_sigma must be >= 0".into()));
        }
        if self.n == 0 || self.d_src == 0 || self.d_tgt == 0 {
            return Err(Error::InvalidConfig(
                "sample count and dimensions must be positive".into(),
            ));
        }
        for v in [&self.target_shift, &self.target_scale].into_iter().flatten() {
            if v.len() != self.d_tgt {
                return Err(Error::DimMismatch {
                    expected: self.d_tgt,
                    found: v.len(),
                });
            }
        }
        if let Some(scale) = &self.target_scale {
            if scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return Err(Error::InvalidConfig("target_scale must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PlantedPair {
    pub source: LatentSpace,
    pub target: LatentSpace,
    /// The planted map; `ground_truth.apply(&source)` is the noiseless target.
    pub ground_truth: Translator,
}

fn draw_invertible(rng: &mut SynthRng, dim: usize) -> Result<DMatrix<f64>> {
    loop {
        let m = fill_gaussian(rng, dim, dim);
        if condition_number(&m)? < MAX_PLANT_CONDITION {
            return Ok(m);
        }
    }
}

/// Draws a source space and a target related to it by a planted map.
pub fn plant_pair(spec: &PlantSpec) -> Result<PlantedPair> {
    spec.validate()?;
    let mut rng = rng(spec.seed);
    let source = LatentSpace::new(fill_gaussian(&mut rng, spec.n, spec.d_src))?;
    plant_with(&mut rng, spec, source)
}

/// Like [`plant_pair`] but with a caller-supplied source; `spec.n` and
/// `spec.d_src` are taken from it.
pub fn plant_from_source(spec: &PlantSpec, source: LatentSpace) -> Result<PlantedPair> {
    let spec = PlantSpec {
        n: source.count(),
        d_src: source.dim(),
        ..spec.clone()
    };
    spec.validate()?;
    plant_with(&mut rng(spec.seed), &spec, source)
}

fn plant_with(rng: &mut SynthRng, spec: &PlantSpec, source: LatentSpace) -> Result<PlantedPair> {
    let d = spec.d_src.max(spec.d_tgt);

    let (kind, r_matrix, bias) = match spec.transform_class {
        TransformClass::Orthogonal => (
            EstimatorKind::Ortho,
            draw_orthogonal(rng, d),
            DVector::zeros(d),
        ),
        TransformClass::ScaledOrthogonal => {
            let scales: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..2.0)).collect();
            let q = draw_orthogonal(rng, d);
            let m = DMatrix::from_diagonal(&DVector::from_vec(scales)) * q;
            (EstimatorKind::Linear, m, DVector::zeros(d))
        }
        TransformClass::InvertibleLinear => (
            EstimatorKind::Linear,
            draw_invertible(rng, d)?,
            DVector::zeros(d),
        ),
        TransformClass::Affine => {
            let m = draw_invertible(rng, d)?;
            let b = fill_gaussian(rng, d, 1).column(0).into_owned();
            (EstimatorKind::Affine, m, b)
        }
    };

    let target_norm = if spec.target_shift.is_some() || spec.target_scale.is_some() {
        let mut means = spec.target_shift.clone().unwrap_or_else(|| vec![0.0; spec.d_tgt]);
        let mut scales = spec.target_scale.clone().unwrap_or_else(|| vec![1.0; spec.d_tgt]);
        means.resize(d, 0.0);
        scales.resize(d, 1.0);
        NormalizerState::Standard { means, scales }
    } else {
        NormalizerState::identity(d)
    };

    let ground_truth = Translator::from_parts(TranslatorParts {
        kind,
        r_matrix,
        bias,
        source_norm: NormalizerState::identity(d),
        target_norm,
        source_raw_dim: spec.d_src,
        target_raw_dim: spec.d_tgt,
        l2_denorm: L2Denorm::Identity,
    })?;

    let mut target = ground_truth.apply(&source)?.into_matrix();
    if spec.noise_sigma > 0.0 {
        target += fill_gaussian(rng, spec.n, spec.d_tgt) * spec.noise_sigma;
    }
    Ok(PlantedPair {
        source,
        target: LatentSpace::new(target)?,
        ground_truth,
    })
}

/// Rank-`rank` data in `dim` dimensions: Gaussian coefficients on a random
/// orthonormal basis, plus optional isotropic noise.
pub fn low_rank_data(n: usize, dim: usize, rank: usize, noise_sigma: f64, seed: u64) -> Result<LatentSpace> {
    if rank == 0 || rank > dim || n == 0 {
        return Err(Error::InvalidConfig(format!(
            "cannot build rank-{rank} data in {dim} dimensions with {n} samples"
        )));
    }
    let mut rng = rng(seed);
    let basis = draw_orthogonal(&mut rng, dim).columns(0, rank).transpose();
    let coeffs = fill_gaussian(&mut rng, n, rank);
    let mut data = coeffs * basis;
    if noise_sigma > 0.0 {
        data += fill_gaussian(&mut rng, n, dim) * noise_sigma;
    }
    LatentSpace::new(data)
}

/// A linear autoencoder: `code = x E`, `reconstruction = code D`.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyAutoencoder {
    /// `input_dim x bottleneck`
    pub encoder_weights: DMatrix<f64>,
    /// `bottleneck x input_dim`
    pub decoder_weights: DMatrix<f64>,
    /// Reconstruction MSE after each epoch.
    pub training_log: Vec<f64>,
}

impl TinyAutoencoder {
    pub fn bottleneck(&self) -> usize {
        self.encoder_weights.ncols()
    }

    pub fn encode(&self, data: &LatentSpace) -> Result<LatentSpace> {
        if data.dim() != self.encoder_weights.nrows() {
            return Err(Error::DimMismatch {
                expected: self.encoder_weights.nrows(),
                found: data.dim(),
            });
        }
        LatentSpace::new(data.matrix() * &self.encoder_weights)
    }

    pub fn decode(&self, codes: &LatentSpace) -> Result<LatentSpace> {
        if codes.dim() != self.bottleneck() {
            return Err(Error::DimMismatch {
                expected: self.bottleneck(),
                found: codes.dim(),
            });
        }
        LatentSpace::new(codes.matrix() * &self.decoder_weights)
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.training_log.last().copied()
    }
}

const AE_INIT_SCALE: f64 = 0.1;

/// Trains a linear autoencoder by deterministic full-batch gradient descent on
/// the reconstruction MSE.
///
/// The decoder starts as the transpose of a seeded Gaussian encoder. Step sizes
/// adapt: an accepted step grows the rate by 10%, a step that would raise the
/// loss is discarded and the rate halved, so the logged loss never increases.
pub fn train_tiny_autoencoder(
    data: &LatentSpace,
    bottleneck: usize,
    seed: u64,
    epochs: usize,
) -> Result<TinyAutoencoder> {
    let (n, dim) = (data.count(), data.dim());
    if bottleneck == 0 || bottleneck >= dim || n < bottleneck {
        return Err(Error::BottleneckTooLarge {
            bottleneck,
            dim,
            count: n,
        });
    }
    if epochs == 0 {
        return Err(Error::InvalidConfig("epochs must be positive".into()));
    }

    // Everything below depends on the data only through its Gram matrix.
    let gram = data.matrix().transpose() * data.matrix();
    let norm = (n * dim) as f64;
    let identity = DMatrix::<f64>::identity(dim, dim);
    let loss_of = |e: &DMatrix<f64>, d: &DMatrix<f64>| -> (f64, DMatrix<f64>) {
        let gap = e * d - &identity;
        let weighted = &gram * &gap;
        ((gap.transpose() * &weighted).trace() / norm, weighted)
    };

    let mut rng = rng(seed);
    let mut encoder = fill_gaussian(&mut rng, dim, bottleneck) * (AE_INIT_SCALE / (dim as f64).sqrt());
    let mut decoder = encoder.transpose();

    let lambda_max = svd(&gram)?.singular_values.max().max(f64::MIN_POSITIVE);
    let mut lr = 0.5 * norm / lambda_max;
    let (mut loss, mut weighted) = loss_of(&encoder, &decoder);
    let mut log = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        let grad_e = &weighted * decoder.transpose() * (2.0 / norm);
        let grad_d = encoder.transpose() * &weighted * (2.0 / norm);
        let cand_e = &encoder - grad_e * lr;
        let cand_d = &decoder - grad_d * lr;
        let (cand_loss, cand_weighted) = loss_of(&cand_e, &cand_d);
        if cand_loss.is_finite() && cand_loss <= loss {
            encoder = cand_e;
            decoder = cand_d;
            loss = cand_loss;
            weighted = cand_weighted;
            lr *= 1.1;
        } else {
            lr *= 0.5;
        }
        log.push(loss.max(0.0));
    }
    Ok(TinyAutoencoder {
        encoder_weights: encoder,
        decoder_weights: decoder,
        training_log: log,
    })
}

/// Gaussian blobs with unit variance around per-class means.
///
/// Means are `separation` times distinct orthonormal directions when
/// `classes <= d`; with more classes than dimensions they are the first `d`
/// coordinates of such directions. Row `i` belongs to class `i % classes`.
pub fn make_labeled_blobs(
    n_per_class: usize,
    classes: usize,
    d: usize,
    separation: f64,
    seed: u64,
) -> Result<(LatentSpace, Vec<usize>)> {
    if classes < 2 {
        return Err(Error::SingleClass);
    }
    if n_per_class == 0 || d == 0 {
        return Err(Error::InvalidConfig("blob sizes must be positive".into()));
    }
    let mut rng = rng(seed);
    let directions = draw_orthogonal(&mut rng, d.max(classes));
    let total = n_per_class * classes;
    let mut data = fill_gaussian(&mut rng, total, d);
    let mut labels = Vec::with_capacity(total);
    for (i, mut row) in data.row_iter_mut().enumerate() {
        let class = i % classes;
        for j in 0..d {
            row[j] += separation * directions[(class, j)];
        }
        labels.push(class);
    }
    Ok((LatentSpace::new(data)?, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::fit_ortho;
    use crate::metrics::{probe_accuracy, train_probe};

    #[test]
    fn identical_seeds_are_bit_identical() {
        let spec = PlantSpec::new(TransformClass::Affine, 20, 4, 99);
        let a = plant_pair(&spec).unwrap();
        let b = plant_pair(&spec).unwrap();
        assert_eq!(a.source, b.source);
        assert_eq!(a.target, b.target);
        assert_eq!(a.ground_truth, b.ground_truth);
        let (x1, l1) = make_labeled_blobs(5, 3, 4, 2.0, 1).unwrap();
        let (x2, l2) = make_labeled_blobs(5, 3, 4, 2.0, 1).unwrap();
        assert_eq!((x1, l1), (x2, l2));
    }

    #[test]
    fn orthogonal_plant_is_recovered_by_procrustes() {
        let pair = plant_pair(&PlantSpec::new(TransformClass::Orthogonal, 256, 16, 7)).unwrap();
        let anchors: Vec<usize> = (0..32).map(|i| i * 7).collect();
        let src = pair.source.select_rows(&anchors).unwrap();
        let tgt = pair.target.select_rows(&anchors).unwrap();
        let fit = fit_ortho(&src, &tgt).unwrap();
        assert!((fit.r_matrix() - pair.ground_truth.r_matrix()).norm() < 1e-6);
    }

    #[test]
    fn noiseless_affine_plant_matches_ground_truth_exactly() {
        let mut spec = PlantSpec::new(TransformClass::Affine, 30, 5, 3);
        spec.d_tgt = 3;
        spec.target_shift = Some(vec![1.0, -2.0, 0.5]);
        spec.target_scale = Some(vec![3.0, 0.1, 1.0]);
        let pair = plant_pair(&spec).unwrap();
        assert_eq!(pair.ground_truth.apply(&pair.source).unwrap(), pair.target);
        assert_eq!(pair.target.dim(), 3);
    }

    #[test]
    fn invertible_plants_are_well_conditioned() {
        for seed in 0..10 {
            let pair = plant_pair(&PlantSpec::new(TransformClass::InvertibleLinear, 4, 6, seed)).unwrap();
            assert!(condition_number(pair.ground_truth.r_matrix()).unwrap() < MAX_PLANT_CONDITION);
        }
    }

    #[test]
    fn plant_spec_validation() {
        let mut spec = PlantSpec::new(TransformClass::Orthogonal, 4, 2, 0);
        spec.noise_sigma = -1.0;
        assert!(plant_pair(&spec).is_err());
        spec.noise_sigma = 0.0;
        spec.target_scale = Some(vec![1.0]);
        assert!(plant_pair(&spec).is_err());
    }

    #[test]
    fn autoencoder_fits_exact_low_rank_data() {
        let data = low_rank_data(200, 12, 4, 0.0, 5).unwrap();
        let ae = train_tiny_autoencoder(&data, 4, 1, 3000).unwrap();
        let log = &ae.training_log;
        assert!(log.windows(2).all(|w| w[1] <= w[0] + 1e-6));
        assert!(ae.final_loss().unwrap() < 1e-6, "final loss {}", ae.final_loss().unwrap());
    }

    #[test]
    fn autoencoder_seeds_differ_but_reach_similar_loss() {
        let data = low_rank_data(200, 12, 4, 0.05, 6).unwrap();
        let a = train_tiny_autoencoder(&data, 4, 1, 2000).unwrap();
        let b = train_tiny_autoencoder(&data, 4, 2, 2000).unwrap();
        assert!((&a.encoder_weights - &b.encoder_weights).norm() > 1e-3);
        let (la, lb) = (a.final_loss().unwrap(), b.final_loss().unwrap());
        assert!((la - lb).abs() <= 0.1 * la.max(lb), "{la} vs {lb}");
    }

    #[test]
    fn autoencoder_bookkeeping_and_errors() {
        let data = low_rank_data(20, 6, 2, 0.0, 7).unwrap();
        assert_eq!(train_tiny_autoencoder(&data, 2, 0, 1).unwrap().training_log.len(), 1);
        assert!(matches!(
            train_tiny_autoencoder(&data, 6, 0, 10),
            Err(Error::BottleneckTooLarge { .. })
        ));
    }

    #[test]
    fn separated_blobs_are_linearly_separable() {
        let (x, y) = make_labeled_blobs(200, 2, 4, 10.0, 8).unwrap();
        let probe = train_probe(&x, &y, 1e-3).unwrap();
        assert!(probe_accuracy(&probe, &x, &y).unwrap() >= 0.99);
    }

    #[test]
    fn zero_separation_is_chance() {
        let (train_x, train_y) = make_labeled_blobs(500, 4, 4, 0.0, 9).unwrap();
        let (test_x, test_y) = make_labeled_blobs(500, 4, 4, 0.0, 10).unwrap();
        let probe = train_probe(&train_x, &train_y, 1e-3).unwrap();
        let acc = probe_accuracy(&probe, &test_x, &test_y).unwrap();
        assert!((acc - 0.25).abs() <= 0.05, "accuracy {acc}");
    }
}
