use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid tracker config: {0}")]
pub struct ConfigError(pub String);

/// Every tunable of the tracker.
///
/// Defaults: `alpha_2d = 60 px/s`, `alpha_3d = 0.15 m`,
/// `lambda_a = 5`, `lambda_t = 10`, with the fixed weights `w_2d = 0.4`,
/// `w_3d = 0.6`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    /// Weight of the in-camera 2D displacement term.
    #[serde(alias = "w2D")]
    pub w_2d: f64,
    /// Weight of the 3D point-to-ray term.
    #[serde(alias = "w3D")]
    pub w_3d: f64,
    /// 2D velocity threshold in pixels per second.
    #[serde(alias = "alpha2D")]
    pub alpha_2d: f64,
    /// 3D distance threshold in meters.
    #[serde(alias = "alpha3D")]
    pub alpha_3d: f64,
    /// Affinity time-penalty rate, 1/s.
    pub lambda_a: f64,
    /// Triangulation time-penalty rate, 1/s.
    pub lambda_t: f64,
    /// Minimum body affinity for an assignment to be accepted.
    pub match_threshold: f64,
    /// Seconds without a match after which a target is dropped. Also the
    /// horizon beyond which 2D observations no longer enter triangulation.
    pub retire_after: f64,
    /// Number of recent 3D samples used for the velocity fit.
    pub velocity_window: usize,
    pub min_joint_confidence: f64,
    /// Minimum number of clustered views for a new target.
    pub min_views_init: usize,
    /// Epipolar distance threshold in pixels for initialization clustering.
    #[serde(alias = "alpha2D_epi")]
    pub alpha_2d_epi: f64,
    /// Minimum number of jointly visible joints for an epipolar score.
    pub min_shared_joints: usize,
    /// Largest pool solved exactly by the partitioner; greedy above it.
    pub max_exact_partition: usize,
    /// Time-weighted incremental triangulation (`false` selects plain DLT).
    pub weighted_triangulation: bool,
    /// Multiply triangulation row weights by the detector confidence.
    pub confidence_weighting: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            w_2d: 0.4,
            w_3d: 0.6,
            alpha_2d: 60.0,
            alpha_3d: 0.15,
            lambda_a: 5.0,
            lambda_t: 10.0,
            match_threshold: 0.0,
            retire_after: 1.0,
            velocity_window: 10,
            min_joint_confidence: 0.1,
            min_views_init: 2,
            alpha_2d_epi: 60.0 * 0.5,
            min_shared_joints: 3,
            max_exact_partition: 12,
            weighted_triangulation: true,
            confidence_weighting: false,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError(what.to_string()))
            }
        };
        check(self.w_2d >= 0.0 && self.w_3d >= 0.0, "weights must be non-negative")?;
        check(self.alpha_2d > 0.0, "alpha_2d must be positive")?;
        check(self.alpha_3d > 0.0, "alpha_3d must be positive")?;
        check(self.alpha_2d_epi > 0.0, "alpha_2d_epi must be positive")?;
        check(
            self.lambda_a >= 0.0 && self.lambda_t >= 0.0,
            "penalty rates must be non-negative",
        )?;
        check(self.velocity_window >= 2, "velocity_window must be at least 2")?;
        check(self.min_views_init >= 2, "min_views_init must be at least 2")?;
        check(self.retire_after > 0.0, "retire_after must be positive")?;
        check(self.match_threshold.is_finite(), "match_threshold must be finite")?;
        check(
            (0.0..=1.0).contains(&self.min_joint_confidence),
            "min_joint_confidence must lie in [0, 1]",
        )?;
        Ok(())
    }

    /// Parses either a JSON object or flat `key = value` lines; missing keys
    /// keep their defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: TrackerConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = TrackerConfig::default();
        assert_eq!((cfg.w_2d, cfg.w_3d), (0.4, 0.6));
        assert_eq!((cfg.alpha_2d, cfg.alpha_3d), (60.0, 0.15));
        assert_eq!((cfg.lambda_a, cfg.lambda_t), (5.0, 10.0));
        assert_eq!(TrackerConfig::parse("").unwrap(), cfg);
        cfg.validate().unwrap();
    }

    #[test]
    fn parses_key_value_and_json() {
        let kv = "# tuned\nalpha_2d = 25\nalpha3D = 0.1\nweighted_triangulation = false\n";
        let cfg = TrackerConfig::parse(kv).unwrap();
        assert_eq!(cfg.alpha_2d, 25.0);
        assert_eq!(cfg.alpha_3d, 0.1);
        assert!(!cfg.weighted_triangulation);
        let json = TrackerConfig::parse(r#"{"w2D": 1.0, "w_3d": 0.0}"#).unwrap();
        assert_eq!((json.w_2d, json.w_3d), (1.0, 0.0));
    }

    #[test]
    fn rejects_bad_values_and_unknown_keys() {
        assert!(TrackerConfig::parse("alpha_2d = 0").is_err());
        assert!(TrackerConfig::parse("velocity_window = 1").is_err());
        assert!(TrackerConfig::parse("bogus = 3").is_err());
    }
}
