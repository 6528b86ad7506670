//! Flat `key = value` parameter files.
//!
//! Lines are `key = value`; `#` starts a comment. Unknown and repeated keys
//! are errors, absent keys keep their defaults.

use std::path::Path;

use crate::error::{Error, Result};
use crate::event::BayerPattern;
use crate::filters::{BilateralParams, HfParams, IntegrationParams};
use crate::representation::DEFAULT_BINS;
use crate::simulator::SimConfig;

pub const DEFAULT_VOXEL_BATCH: usize = 10_000;

/// Every tunable parameter of the toolkit.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub sim: SimConfig,
    pub pattern: BayerPattern,
    pub hf: HfParams,
    pub integration: IntegrationParams,
    pub bilateral: BilateralParams,
    pub voxel_bins: usize,
    pub voxel_batch: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            sim: SimConfig::default(),
            pattern: BayerPattern::default(),
            hf: HfParams::default(),
            integration: IntegrationParams::default(),
            bilateral: BilateralParams::default(),
            voxel_bins: DEFAULT_BINS,
            voxel_batch: DEFAULT_VOXEL_BATCH,
        }
    }
}

pub const KEYS: &[&str] = &[
    "sim.c_pos",
    "sim.c_neg",
    "sim.refractory_us",
    "sim.log_eps",
    "sim.threshold_sigma",
    "sim.seed",
    "bayer.phase",
    "hf.cutoff",
    "hf.cutoff_per_event",
    "hf.contrast_step",
    "mr.window_events",
    "mr.contrast_step",
    "mr.decay",
    "bilateral.sigma_spatial",
    "bilateral.sigma_range",
    "voxel.bins",
    "voxel.batch",
];

fn typed<T: std::str::FromStr>(key: &str, line: usize, raw: &str, what: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Config {
        key: key.to_string(),
        line,
        msg: format!("expected {what}, got `{raw}`"),
    })
}

impl Config {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, raw: &str, line: usize) -> Result<()> {
        let real = |r: &str| typed::<f64>(key, line, r, "a number");
        let count = |r: &str| typed::<usize>(key, line, r, "a non-negative integer");
        match key {
            "sim.c_pos" => self.sim.c_pos = real(raw)?,
            "sim.c_neg" => self.sim.c_neg = real(raw)?,
            "sim.refractory_us" => self.sim.refractory_us = typed(key, line, raw, "an integer")?,
            "sim.log_eps" => self.sim.log_eps = real(raw)?,
            "sim.threshold_sigma" => self.sim.threshold_sigma = real(raw)?,
            "sim.seed" => self.sim.seed = typed(key, line, raw, "an integer")?,
            "bayer.phase" => {
                self.pattern = raw.parse().map_err(|e: Error| Error::Config {
                    key: key.to_string(),
                    line,
                    msg: e.to_string(),
                })?
            }
            "hf.cutoff" => self.hf.cutoff = real(raw)?,
            "hf.cutoff_per_event" => self.hf.cutoff_per_event = real(raw)?,
            "hf.contrast_step" => self.hf.contrast_step = real(raw)?,
            "mr.window_events" => self.integration.window_events = count(raw)?,
            "mr.contrast_step" => self.integration.contrast_step = real(raw)?,
            "mr.decay" => self.integration.decay = real(raw)?,
            "bilateral.sigma_spatial" => self.bilateral.sigma_spatial = real(raw)?,
            "bilateral.sigma_range" => self.bilateral.sigma_range = Some(real(raw)?),
            "voxel.bins" => self.voxel_bins = count(raw)?,
            "voxel.batch" => self.voxel_batch = count(raw)?,
            _ => {
                return Err(Error::Config {
                    key: key.to_string(),
                    line,
                    msg: "unknown key".to_string(),
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.hf.validate()?;
        self.integration.validate()?;
        if self.bilateral.sigma_spatial.is_nan() || self.bilateral.sigma_spatial <= 0.0 {
            return Err(Error::invalid("bilateral.sigma_spatial must be positive"));
        }
        if matches!(self.bilateral.sigma_range, Some(s) if s.is_nan() || s <= 0.0) {
            return Err(Error::invalid("bilateral.sigma_range must be positive"));
        }
        if self.voxel_bins == 0 || self.voxel_batch == 0 {
            return Err(Error::invalid(
                "voxel.bins and voxel.batch must be at least 1",
            ));
        }
        Ok(())
    }
}

pub fn parse_config_str(text: &str) -> Result<Config> {
    let mut cfg = Config::default();
    let mut seen = std::collections::HashMap::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            key: content.to_string(),
            line,
            msg: "expected `key = value`".to_string(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if let Some(prev) = seen.insert(key.to_string(), line) {
            return Err(Error::Config {
                key: key.to_string(),
                line,
                msg: format!("duplicate key (first set on line {prev})"),
            });
        }
        cfg.set(key, value, line)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}
