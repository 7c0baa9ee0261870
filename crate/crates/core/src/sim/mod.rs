//! Discrete-time overlay simulation.
//!
//! One tick is one request period (one second of stream). A run is fully
//! determined by its [`SimConfig`]; see [`run_simulation`].

mod engine;
mod overlay;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::priority::PriorityParams;
use crate::schedule::Strategy;

pub use engine::{run_simulation, simulate, Delivery, Outcome, World};
pub use overlay::{assign_classes, generate_overlay, OverlayGraph};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid(msg.to_string())
}

/// Scenario description. Parsed from a single JSON document; unknown keys
/// are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub node_count: u32,
    /// Neighbors per node.
    pub degree: u32,
    pub seed: u64,
    /// Measured ticks (after warm-up).
    pub duration: u32,
    pub strategy: Strategy,
    #[serde(default)]
    pub priority: PrioritySettings,
    pub stream: StreamSpec,
    /// Download classes of the non-source nodes; upload is half the
    /// download.
    pub bandwidth_classes: Vec<BandwidthClass>,
    pub window_seconds: u32,
    /// Source upload as a multiple of the stream rate.
    #[serde(default = "default_source_upload_factor")]
    pub source_upload_factor: f64,
}

fn default_source_upload_factor() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamSpec {
    /// Number of layers, 1 for a single-layer stream.
    pub layers: u32,
    /// Rate of each layer.
    pub layer_rate_kbps: u32,
    pub chunk_size_kbits: u32,
}

impl StreamSpec {
    pub fn total_rate_kbps(&self) -> u32 {
        self.layers * self.layer_rate_kbps
    }

    pub fn chunks_per_layer_tick(&self) -> u32 {
        self.layer_rate_kbps / self.chunk_size_kbits
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandwidthClass {
    pub fraction: f64,
    pub download_kbps: u32,
}

/// How θ is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ThetaSetting {
    /// `10^-L` for layered streams, 0 for a single layer.
    #[default]
    Default,
    /// Large enough that a lower layer always outranks a higher one.
    Conservative,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrioritySettings {
    pub theta: ThetaSetting,
    pub ep_base: f64,
    pub lp_base: f64,
    pub min_exponent: i32,
}

impl Default for PrioritySettings {
    fn default() -> Self {
        let p = PriorityParams::new(1);
        PrioritySettings {
            theta: ThetaSetting::Default,
            ep_base: p.ep_base,
            lp_base: p.lp_base,
            min_exponent: p.min_exponent,
        }
    }
}

pub const TOTAL_FRACTION_TOLERANCE: f64 = 1e-9;

impl SimConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let cfg: SimConfig = serde_json::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        SimConfig::from_json(&text, path)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.node_count < 2 {
            return Err(invalid("node_count must be at least 2"));
        }
        if self.degree == 0 || self.degree >= self.node_count {
            return Err(invalid(format_args!(
                "degree must be in 1..{} (got {})",
                self.node_count, self.degree
            )));
        }
        let s = &self.stream;
        if s.layers == 0 {
            return Err(invalid("stream.layers must be at least 1"));
        }
        if s.chunk_size_kbits == 0 || s.layer_rate_kbps == 0 {
            return Err(invalid("stream rates and chunk size must be positive"));
        }
        if s.layer_rate_kbps % s.chunk_size_kbits != 0 {
            return Err(invalid(format_args!(
                "layer rate {} Kbps is not a whole number of {} Kbit chunks per second",
                s.layer_rate_kbps, s.chunk_size_kbits
            )));
        }
        if self.window_seconds == 0 {
            return Err(invalid("window_seconds must be at least 1"));
        }
        if self.bandwidth_classes.is_empty() {
            return Err(invalid("at least one bandwidth class is required"));
        }
        let mut total = 0.0;
        for c in &self.bandwidth_classes {
            if !(c.fraction.is_finite() && c.fraction >= 0.0) {
                return Err(invalid(format_args!("bad class fraction {}", c.fraction)));
            }
            if c.download_kbps == 0 {
                return Err(invalid("class download must be positive"));
            }
            total += c.fraction;
        }
        if (total - 1.0).abs() > TOTAL_FRACTION_TOLERANCE {
            return Err(invalid(format_args!(
                "class fractions sum to {total}, expected 1"
            )));
        }
        if !(self.source_upload_factor.is_finite() && self.source_upload_factor > 0.0) {
            return Err(invalid("source_upload_factor must be positive"));
        }
        if let ThetaSetting::Value(t) = self.priority.theta {
            if !(t.is_finite() && t >= 0.0) {
                return Err(invalid("theta must be a non-negative number"));
            }
        }
        self.priority_params()
            .validate()
            .map_err(|e| invalid(format_args!("priority settings: {e}")))?;
        Ok(())
    }

    pub fn priority_params(&self) -> PriorityParams {
        let layers = self.stream.layers;
        let p = &self.priority;
        let mut params = PriorityParams {
            ep_base: p.ep_base,
            lp_base: p.lp_base,
            min_exponent: p.min_exponent,
            ..PriorityParams::new(layers)
        };
        params.theta = match p.theta {
            ThetaSetting::Default if layers == 1 => 0.0,
            ThetaSetting::Default => p.lp_base.powi(-(layers as i32)),
            ThetaSetting::Conservative => {
                return params.with_conservative_theta(self.window_seconds)
            }
            ThetaSetting::Value(t) => t,
        };
        params
    }

    /// SHA-256 of the config's JSON form, hex encoded.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// A small reference scenario: 50 nodes of degree 8, a 40/30/30 split
    /// over 512 Kbps, 1 Mbps and 2 Mbps, 10 Kbit chunks, 10 s window.
    pub fn desk_scale(strategy: Strategy, layers: u32, layer_rate_kbps: u32) -> Self {
        SimConfig {
            node_count: 50,
            degree: 8,
            seed: 1,
            duration: 30,
            strategy,
            priority: PrioritySettings::default(),
            stream: StreamSpec {
                layers,
                layer_rate_kbps,
                chunk_size_kbits: 10,
            },
            bandwidth_classes: vec![
                BandwidthClass {
                    fraction: 0.4,
                    download_kbps: 512,
                },
                BandwidthClass {
                    fraction: 0.3,
                    download_kbps: 1000,
                },
                BandwidthClass {
                    fraction: 0.3,
                    download_kbps: 2000,
                },
            ],
            window_seconds: 10,
            source_upload_factor: default_source_upload_factor(),
        }
    }
}
