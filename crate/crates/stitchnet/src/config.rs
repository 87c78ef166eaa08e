//! Experiment configuration file.
//!
//! ```toml
//! [model]
//! layers = 5
//! hidden = 512
//! embed_dim = 128
//! aggregator = "mean"
//! panel_id = true
//! topology = true
//!
//! [train]
//! learning_rate = 1e-3
//! epochs = 18
//! seed = 0
//! normalize_loss = true
//!
//! [sinkhorn]
//! iterations = 100
//! tau_multi = 0.4
//!
//! [merge]
//! sleeve = "sleeve"
//! cuff = "cuff"
//! torso = ["ftorso", "btorso"]
//! tol = 1e-3
//! angle_tol = 1e-4
//! ```
//!
//! Every key is optional; missing keys keep their defaults.

use std::path::Path;

use serde::Deserialize;
use stitchnet_core::assignment::SinkhornConfig;
use stitchnet_core::encoding::FeatureMask;
use stitchnet_core::learning::TrainConfig;
use stitchnet_core::merge::MergeConfig;
use stitchnet_core::model::{Aggregator, ModelConfig};

use crate::error::{Error, Result};
use crate::format::read_file;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    pub model: ModelConfig,
    pub mask: FeatureMask,
    pub train: TrainConfig,
    pub sinkhorn: SinkhornConfig,
    pub merge: MergeConfig,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct File {
    #[serde(default)]
    model: ModelSection,
    #[serde(default)]
    train: TrainSection,
    #[serde(default)]
    sinkhorn: SinkhornSection,
    #[serde(default)]
    merge: MergeSection,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    layers: Option<usize>,
    hidden: Option<usize>,
    embed_dim: Option<usize>,
    aggregator: Option<String>,
    panel_id: Option<bool>,
    topology: Option<bool>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct TrainSection {
    learning_rate: Option<f64>,
    epochs: Option<usize>,
    seed: Option<u64>,
    normalize_loss: Option<bool>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SinkhornSection {
    iterations: Option<usize>,
    tau_multi: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct MergeSection {
    sleeve: Option<String>,
    cuff: Option<String>,
    torso: Option<Vec<String>>,
    tol: Option<f64>,
    angle_tol: Option<f64>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let f: File = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut c = Config::default();
        set(&mut c.model.layers, f.model.layers);
        set(&mut c.model.hidden, f.model.hidden);
        set(&mut c.model.embed_dim, f.model.embed_dim);
        if let Some(a) = f.model.aggregator {
            c.model.aggregator = parse_aggregator(&a)?;
        }
        set(&mut c.mask.panel_id, f.model.panel_id);
        set(&mut c.mask.topology, f.model.topology);
        set(&mut c.train.learning_rate, f.train.learning_rate);
        set(&mut c.train.epochs, f.train.epochs);
        set(&mut c.train.seed, f.train.seed);
        set(&mut c.train.normalize_loss, f.train.normalize_loss);
        set(&mut c.sinkhorn.iterations, f.sinkhorn.iterations);
        set(&mut c.sinkhorn.tau_multi, f.sinkhorn.tau_multi);
        set(&mut c.merge.sleeve_id_pattern, f.merge.sleeve);
        set(&mut c.merge.cuff_id_pattern, f.merge.cuff);
        set(&mut c.merge.torso_id_patterns, f.merge.torso);
        set(&mut c.merge.tolerance.tol, f.merge.tol);
        set(&mut c.merge.tolerance.angle_tol, f.merge.angle_tol);
        c.check()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = read_file(path)?;
        let text = std::str::from_utf8(&bytes).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn check(&self) -> Result<()> {
        self.model.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.sinkhorn.iterations == 0 {
            return Err(Error::Config("sinkhorn.iterations must be at least 1".into()));
        }
        if !(self.sinkhorn.tau_multi.is_finite() && self.train.learning_rate.is_finite() && self.train.learning_rate >= 0.0) {
            return Err(Error::Config("tau_multi and learning_rate must be finite, learning_rate >= 0".into()));
        }
        Ok(())
    }
}

pub fn parse_aggregator(s: &str) -> Result<Aggregator> {
    Aggregator::from_name(s).ok_or_else(|| Error::Config(format!("unknown aggregator `{s}` (expected mean or max)")))
}
