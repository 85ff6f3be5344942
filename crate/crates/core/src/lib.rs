//! Estimate a transformation between two latent spaces from a small set of
//! paired anchors and use it to translate encodings from one space into the
//! other, so that independently trained encoders and decoders can be combined
//! without retraining.
//!
//! The pipeline pads both spaces to a common dimension, normalizes them with
//! statistics fitted on the anchors, estimates `x R + b` with one of four
//! estimators ([`EstimatorKind`]) and undoes the target-side normalization.
//!
//! ```
//! use latent_translate::{fit_translator, AnchorCorrespondence, EstimatorKind, PipelineConfig, ScalingMode};
//! use latent_translate::synth::{plant_pair, PlantSpec, TransformClass};
//!
//! let pair = plant_pair(&PlantSpec::new(TransformClass::Orthogonal, 200, 8, 1)).unwrap();
//! let anchors = AnchorCorrespondence::parallel((0..32).collect()).unwrap();
//! let cfg = PipelineConfig::new(EstimatorKind::Ortho, ScalingMode::None);
//! let fitted = fit_translator(&pair.source, &pair.target, &anchors, &cfg).unwrap();
//! let translated = fitted.translator.apply(&pair.source).unwrap();
//! assert!((translated.matrix() - pair.target.matrix()).norm() < 1e-8);
//! ```

pub mod cli;
pub mod error;
pub mod estimators;
pub mod io;
mod linalg;
pub mod metrics;
pub mod preprocess;
pub mod relative;
pub mod space;
pub mod stitch;
pub mod synth;
pub mod translator;
pub mod types;

pub use error::{Error, Result};
pub use estimators::{
    fit_affine, fit_l_ortho, fit_linear, fit_ortho, fit_translator, FitConfig, FittedTranslator,
    GdDiagnostics, PipelineConfig,
};
pub use linalg::orthogonality_defect;
pub use preprocess::{denormalize, fit_normalizer, normalize, zero_pad, NormalizerState};
pub use space::{gather_anchors, validate_space, AnchorCorrespondence, LatentSpace};
pub use translator::Translator;
pub use types::{EstimatorKind, L2Denorm, ScalingMode};
