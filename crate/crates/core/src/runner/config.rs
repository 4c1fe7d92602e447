use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RunError;
use crate::fusion::{EnhanceConfig, WeightConfig};
use crate::grid::{FeatureMap, GridSpec};
use crate::metrics::EvalConfig;
use crate::sim::{ExtractorConfig, LidarModel, Template};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Receiver map only.
    Single,
    /// Elementwise maxout of receiver and senders.
    Maxout,
    /// Weighted maxout plus enhancement.
    Coff,
    /// Weighted maxout with Y = 1.
    CoffNoEnhance,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Single, Method::Maxout, Method::Coff, Method::CoffNoEnhance];

    pub fn name(self) -> &'static str {
        match self {
            Method::Single => "single",
            Method::Maxout => "maxout",
            Method::Coff => "coff",
            Method::CoffNoEnhance => "coff_no_enhance",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| RunError::Config(format!("unknown method {s:?} (expected single, maxout, coff or coff_no_enhance)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandwidthConfig {
    pub frame_rate: f64,
    /// Link capacity in bits per second.
    pub link_rate_bps: f64,
}

impl Default for BandwidthConfig {
    fn default() -> Self {
        Self {
            frame_rate: 20.0,
            link_rate_bps: 27.0e6,
        }
    }
}

fn default_methods() -> Vec<Method> {
    vec![Method::Single, Method::Maxout, Method::Coff, Method::CoffNoEnhance]
}

fn default_channels() -> usize {
    FeatureMap::DEFAULT_CHANNELS
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("coff-out")
}

/// Everything a run needs. Every section except `template` is optional.
///
/// ```toml
/// template = "parking_lot"
/// seed_count = 50
/// methods = ["maxout", "coff"]
///
/// [enhance]
/// y = 2.0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub template: Template,
    /// Explicit seeds; takes precedence over `seed_count`.
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// Run seeds `seed_start .. seed_start + seed_count`.
    #[serde(default)]
    pub seed_count: Option<u64>,
    #[serde(default)]
    pub seed_start: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_channels")]
    pub channels: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub weight: WeightConfig,
    #[serde(default)]
    pub enhance: EnhanceConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub lidar: LidarModel,
    #[serde(default)]
    pub extractor: ExtractorConfig,
    #[serde(default)]
    pub bandwidth: BandwidthConfig,
}

impl RunConfig {
    /// Defaults for `template`, seeds `0..seed_count`.
    pub fn new(template: Template, seed_count: u64) -> Self {
        Self {
            template,
            seeds: Vec::new(),
            seed_count: Some(seed_count),
            seed_start: 0,
            methods: default_methods(),
            channels: default_channels(),
            output_dir: default_output_dir(),
            weight: WeightConfig::default(),
            enhance: EnhanceConfig::default(),
            eval: EvalConfig::default(),
            grid: GridSpec::default(),
            lidar: LidarModel::default(),
            extractor: ExtractorConfig::default(),
            bandwidth: BandwidthConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, RunError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("reading {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            RunError::Config(msg) => RunError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Sorted, de-duplicated seeds.
    pub fn seed_list(&self) -> Vec<u64> {
        let mut seeds = if self.seeds.is_empty() {
            let n = self.seed_count.unwrap_or(0);
            (self.seed_start..self.seed_start.saturating_add(n)).collect()
        } else {
            self.seeds.clone()
        };
        seeds.sort_unstable();
        seeds.dedup();
        seeds
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |m: String| Err(RunError::Config(m));
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return bad(format!("duplicate methods in {:?}", self.methods));
        }
        if self.seed_list().is_empty() {
            return bad("at least one seed is required (set `seeds` or `seed_count`)".into());
        }
        if self.channels == 0 {
            return bad("channels must be >= 1".into());
        }
        if self.extractor.n_sat == 0 {
            return bad("extractor.n_sat must be >= 1".into());
        }
        let b = self.bandwidth;
        if !(b.frame_rate > 0.0 && b.link_rate_bps > 0.0 && b.frame_rate.is_finite() && b.link_rate_bps.is_finite()) {
            return bad(format!("bandwidth rates must be positive: {b:?}"));
        }
        let to_config = |e: &dyn fmt::Display| RunError::Config(e.to_string());
        self.weight.validate().map_err(|e| to_config(&e))?;
        self.enhance.validate().map_err(|e| to_config(&e))?;
        self.eval.validate().map_err(|e| to_config(&e))?;
        self.lidar.validate().map_err(|e| to_config(&e))?;
        Ok(())
    }
}
