use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Per-feature pre-processing applied to both spaces before estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ScalingMode {
    /// Center and divide by the population standard deviation, both fitted on anchors.
    #[default]
    Standard,
    /// Rescale every row to unit Euclidean norm.
    UnitNorm,
    None,
}

impl ScalingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalingMode::Standard => "standard",
            ScalingMode::UnitNorm => "l2",
            ScalingMode::None => "none",
        }
    }
}

impl fmt::Display for ScalingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScalingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(ScalingMode::Standard),
            "l2" | "unit-norm" => Ok(ScalingMode::UnitNorm),
            "none" => Ok(ScalingMode::None),
            other => Err(Error::InvalidConfig(format!("unknown scaling mode `{other}`"))),
        }
    }
}

/// How target-side unit-norm scaling is undone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum L2Denorm {
    /// Leave translated rows at unit norm; the decoder is assumed scale invariant.
    #[default]
    Identity,
    /// Rescale translated rows to the mean anchor norm of the target space.
    MeanNorm,
}

impl L2Denorm {
    pub fn as_str(self) -> &'static str {
        match self {
            L2Denorm::Identity => "identity",
            L2Denorm::MeanNorm => "mean-norm",
        }
    }
}

impl fmt::Display for L2Denorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for L2Denorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(L2Denorm::Identity),
            "mean-norm" => Ok(L2Denorm::MeanNorm),
            other => Err(Error::InvalidConfig(format!(
                "unknown l2 de-normalization `{other}`"
            ))),
        }
    }
}

/// The family the estimated transformation is restricted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    /// `x R + b`, fitted by gradient descent.
    Affine,
    /// `x R`, closed-form least squares.
    Linear,
    /// Orthogonal polar factor of the least-squares `R`.
    LOrtho,
    /// Orthogonal Procrustes solution.
    Ortho,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::Affine,
        EstimatorKind::Linear,
        EstimatorKind::LOrtho,
        EstimatorKind::Ortho,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Affine => "affine",
            EstimatorKind::Linear => "linear",
            EstimatorKind::LOrtho => "l-ortho",
            EstimatorKind::Ortho => "ortho",
        }
    }

    pub fn is_orthogonal(self) -> bool {
        matches!(self, EstimatorKind::Ortho | EstimatorKind::LOrtho)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "affine" => Ok(EstimatorKind::Affine),
            "linear" => Ok(EstimatorKind::Linear),
            "l-ortho" => Ok(EstimatorKind::LOrtho),
            "ortho" => Ok(EstimatorKind::Ortho),
            other => Err(Error::InvalidConfig(format!("unknown estimator `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for kind in EstimatorKind::ALL {
            assert_eq!(kind.as_str().parse::<EstimatorKind>().unwrap(), kind);
        }
        for mode in [ScalingMode::Standard, ScalingMode::UnitNorm, ScalingMode::None] {
            assert_eq!(mode.as_str().parse::<ScalingMode>().unwrap(), mode);
        }
        assert!("frobnicate".parse::<EstimatorKind>().is_err());
    }
}
