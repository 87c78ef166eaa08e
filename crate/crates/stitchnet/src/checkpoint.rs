//! Model checkpoints. A checkpoint always holds the parameters used for
//! prediction; checkpoints written during training also carry the full
//! trainer state so an interrupted run can be resumed.

use std::path::Path;

use serde::{Deserialize, Serialize};
use stitchnet_core::assignment::SinkhornConfig;
use stitchnet_core::encoding::{FeatureMask, LAYOUT_TAG};
use stitchnet_core::learning::{Adam, EpochRecord, TrainConfig, Trainer};
use stitchnet_core::model::{Aggregator, Layer, ModelConfig, ModelParams};
use stitchnet_core::pipeline::Predictor;
use stitchnet_core::tensor::Matrix;

use crate::error::{Error, Result};
use crate::format::{read_file, write_file};

pub const FORMAT_TAG: &str = "stitchnet-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub predictor: Predictor,
    pub trainer: Option<Trainer>,
}

#[derive(Serialize, Deserialize)]
struct Doc {
    format: String,
    version: u32,
    layout: String,
    model: ModelDoc,
    features: FeaturesDoc,
    sinkhorn: SinkhornDoc,
    params: ParamsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    training: Option<TrainingDoc>,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    layers: usize,
    hidden: usize,
    embed_dim: usize,
    aggregator: String,
}

#[derive(Serialize, Deserialize)]
struct FeaturesDoc {
    panel_id: bool,
    topology: bool,
}

#[derive(Serialize, Deserialize)]
struct SinkhornDoc {
    iterations: usize,
    tau_multi: f64,
}

#[derive(Serialize, Deserialize)]
struct LayerDoc {
    weight: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ParamsDoc {
    layers: Vec<LayerDoc>,
    z: f64,
}

#[derive(Serialize, Deserialize)]
struct TrainingDoc {
    learning_rate: f64,
    epochs: usize,
    seed: u64,
    normalize_loss: bool,
    epochs_done: usize,
    current: ParamsDoc,
    best_val_tf1: Option<f64>,
    adam: AdamDoc,
    history: Vec<HistoryDoc>,
}

#[derive(Serialize, Deserialize)]
struct AdamDoc {
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct HistoryDoc {
    epoch: usize,
    train_loss: f64,
    val_tf1: f64,
    val_gsp: f64,
}

fn params_doc(p: &ModelParams) -> ParamsDoc {
    ParamsDoc {
        layers: p
            .layers
            .iter()
            .map(|l| LayerDoc {
                weight: (0..l.weight.rows()).map(|r| l.weight.row(r).to_vec()).collect(),
                bias: l.bias.clone(),
            })
            .collect(),
        z: p.z,
    }
}

fn params_from(doc: ParamsDoc, cfg: &ModelConfig) -> Result<ModelParams> {
    let layers = doc
        .layers
        .into_iter()
        .map(|l| {
            let cols = l.weight.first().map_or(0, Vec::len);
            if l.weight.iter().any(|r| r.len() != cols) {
                return Err(Error::Checkpoint("ragged weight matrix".into()));
            }
            Ok(Layer { weight: Matrix::from_rows(&l.weight), bias: l.bias })
        })
        .collect::<Result<Vec<_>>>()?;
    let p = ModelParams { layers, z: doc.z };
    p.check(cfg).map_err(|e| Error::Checkpoint(e.to_string()))?;
    Ok(p)
}

impl Checkpoint {
    pub fn from_trainer(trainer: &Trainer, mask: FeatureMask) -> Self {
        Self {
            predictor: Predictor {
                model: trainer.model,
                params: trainer.best.clone(),
                mask,
                sinkhorn: trainer.sinkhorn,
            },
            trainer: Some(trainer.clone()),
        }
    }

    pub fn to_json(&self) -> String {
        let pr = &self.predictor;
        let training = self.trainer.as_ref().map(|t| TrainingDoc {
            learning_rate: t.train.learning_rate,
            epochs: t.train.epochs,
            seed: t.train.seed,
            normalize_loss: t.train.normalize_loss,
            epochs_done: t.epoch,
            current: params_doc(&t.params),
            best_val_tf1: Some(t.best_val_tf1).filter(|x| x.is_finite()),
            adam: AdamDoc {
                beta1: t.optimizer.beta1,
                beta2: t.optimizer.beta2,
                epsilon: t.optimizer.epsilon,
                step: t.optimizer.step,
                m: t.optimizer.m.clone(),
                v: t.optimizer.v.clone(),
            },
            history: t
                .history
                .iter()
                .map(|h| HistoryDoc { epoch: h.epoch, train_loss: h.train_loss, val_tf1: h.val_tf1, val_gsp: h.val_gsp })
                .collect(),
        });
        let doc = Doc {
            format: FORMAT_TAG.into(),
            version: VERSION,
            layout: LAYOUT_TAG.into(),
            model: ModelDoc {
                layers: pr.model.layers,
                hidden: pr.model.hidden,
                embed_dim: pr.model.embed_dim,
                aggregator: pr.model.aggregator.name().into(),
            },
            features: FeaturesDoc { panel_id: pr.mask.panel_id, topology: pr.mask.topology },
            sinkhorn: SinkhornDoc { iterations: pr.sinkhorn.iterations, tau_multi: pr.sinkhorn.tau_multi },
            params: params_doc(&pr.params),
            training,
        };
        let mut s = serde_json::to_string(&doc).expect("checkpoints always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let doc: Doc = serde_json::from_slice(bytes).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if doc.format != FORMAT_TAG {
            return Err(Error::Checkpoint(format!("not a checkpoint (format `{}`)", doc.format)));
        }
        if doc.version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {}", doc.version)));
        }
        if doc.layout != LAYOUT_TAG {
            return Err(Error::Checkpoint(format!("feature layout `{}` does not match `{LAYOUT_TAG}`", doc.layout)));
        }
        let aggregator = Aggregator::from_name(&doc.model.aggregator)
            .ok_or_else(|| Error::Checkpoint(format!("unknown aggregator `{}`", doc.model.aggregator)))?;
        let model =
            ModelConfig { layers: doc.model.layers, hidden: doc.model.hidden, embed_dim: doc.model.embed_dim, aggregator };
        model.validate().map_err(|e| Error::Checkpoint(e.to_string()))?;
        let sinkhorn = SinkhornConfig { iterations: doc.sinkhorn.iterations, tau_multi: doc.sinkhorn.tau_multi };
        let mask = FeatureMask { panel_id: doc.features.panel_id, topology: doc.features.topology };
        let params = params_from(doc.params, &model)?;
        let trainer = match doc.training {
            None => None,
            Some(t) => {
                let current = params_from(t.current, &model)?;
                let n = current.num_scalars();
                if t.adam.m.len() != n || t.adam.v.len() != n {
                    return Err(Error::Checkpoint("optimizer state does not match the parameters".into()));
                }
                Some(Trainer {
                    model,
                    sinkhorn,
                    train: TrainConfig {
                        learning_rate: t.learning_rate,
                        epochs: t.epochs,
                        seed: t.seed,
                        normalize_loss: t.normalize_loss,
                    },
                    params: current,
                    optimizer: Adam {
                        beta1: t.adam.beta1,
                        beta2: t.adam.beta2,
                        epsilon: t.adam.epsilon,
                        step: t.adam.step,
                        m: t.adam.m,
                        v: t.adam.v,
                    },
                    epoch: t.epochs_done,
                    best: params.clone(),
                    best_val_tf1: t.best_val_tf1.unwrap_or(f64::NEG_INFINITY),
                    history: t
                        .history
                        .into_iter()
                        .map(|h| EpochRecord { epoch: h.epoch, train_loss: h.train_loss, val_tf1: h.val_tf1, val_gsp: h.val_gsp })
                        .collect(),
                })
            }
        };
        Ok(Self { predictor: Predictor { model, params, mask, sinkhorn }, trainer })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_file(path)?).map_err(|e| e.in_file(path))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, self.to_json().as_bytes())
    }
}
