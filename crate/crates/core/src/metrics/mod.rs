//! Detection proxy and the near/far evaluation protocol.

mod cdf;
mod detect;
mod eval;

pub use cdf::{ecdf, improvement_cdf, quantile, range_cdf, CdfPoint, ImprovementCdf};
pub use detect::{connected_components, detect, detect_candidates, filter_confident, logistic, Detection};
pub use eval::{evaluate, match_detections, Category, Match, MatchResult, PrecisionReport, Ratio};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("detection box has zero area")]
    EmptyBox,
    #[error("confidence {0} outside [0, 1]")]
    Confidence(f64),
    #[error("invalid eval config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub iou_threshold: f64,
    pub confidence_threshold: f64,
    /// Second threshold for the sensitivity comparison.
    pub alt_confidence_threshold: f64,
    /// Meters; truth closer than this is near.
    pub near_far_split: f64,
    pub activation_threshold: f64,
    pub logistic_k: f64,
    pub logistic_m0: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            confidence_threshold: 0.5,
            alt_confidence_threshold: 0.3,
            near_far_split: 20.0,
            activation_threshold: 0.25,
            logistic_k: 6.0,
            logistic_m0: 0.5,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), MetricsError> {
        let open_unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(MetricsError::Config(format!("{name} = {v} must lie in (0, 1)")))
            }
        };
        open_unit("iou_threshold", self.iou_threshold)?;
        open_unit("confidence_threshold", self.confidence_threshold)?;
        open_unit("alt_confidence_threshold", self.alt_confidence_threshold)?;
        open_unit("activation_threshold", self.activation_threshold)?;
        if !(self.near_far_split > 0.0 && self.near_far_split.is_finite()) {
            return Err(MetricsError::Config(format!("near_far_split = {} must be positive", self.near_far_split)));
        }
        if !(self.logistic_k > 0.0 && self.logistic_k.is_finite() && self.logistic_m0.is_finite()) {
            return Err(MetricsError::Config("logistic_k must be positive and m0 finite".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        assert!(EvalConfig::default().validate().is_ok());
        let bad = EvalConfig {
            iou_threshold: 1.0,
            ..EvalConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = EvalConfig {
            near_far_split: 0.0,
            ..EvalConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
