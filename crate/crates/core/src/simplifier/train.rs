//! Mini-batch Adam training with periodic validation checkpoints,
//! increase-streak early stopping and rollback to the best checkpoint.

use std::io::Write;
use std::path::Path;

use ndarray::{Array2, Axis};
use serde::Serialize;

use super::adam::{adam_step, AdamConfig, AdamState};
use super::mlp::{init_model, mse_array, param_count, to_array, Activation, MlpModel};
use super::SimplifierError;
use crate::embedding::EmbeddingMatrix;
use crate::rng::DetRng;

/// Offset between the init stream and the batch-order stream.
const SHUFFLE_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub checkpoint_interval: usize,
    /// Consecutive checkpoint-over-checkpoint increases that stop training.
    pub patience: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub adam: AdamConfig,
    pub activation: Activation,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            max_epochs: 10_000,
            checkpoint_interval: 50,
            patience: 5,
            batch_size: 256,
            seed: 42,
            adam: AdamConfig::default(),
            activation: Activation::Relu,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), SimplifierError> {
        let bad = |what: &str| Err(SimplifierError::InvalidConfig(what.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.max_epochs == 0 || self.checkpoint_interval == 0 || self.batch_size == 0 {
            return bad("max_epochs, checkpoint_interval and batch_size must be positive");
        }
        if self.patience == 0 {
            return bad("patience must be at least 1");
        }
        let a = &self.adam;
        if !(0.0..1.0).contains(&a.beta1) || !(0.0..1.0).contains(&a.beta2) || a.epsilon <= 0.0 {
            return bad("adam betas must be in [0, 1) and epsilon positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub epoch: usize,
    pub model: MlpModel,
    pub validation_loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckpointRecord {
    pub epoch: usize,
    /// Row-weighted mean of mini-batch losses over the checkpoint epoch.
    pub train_loss: f64,
    pub validation_loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxEpochs,
    EarlyStop,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingLog {
    pub param_count: usize,
    pub checkpoints: Vec<CheckpointRecord>,
    pub stop_reason: StopReason,
    /// Epoch at which training stopped.
    pub stopped_at: usize,
    /// Epoch of the returned snapshot.
    pub best_epoch: usize,
    pub final_loss: f64,
}

impl TrainingLog {
    /// One JSON object per checkpoint, then a summary line.
    pub fn to_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            kind: &'static str,
            #[serde(flatten)]
            rec: &'a CheckpointRecord,
        }
        #[derive(Serialize)]
        struct Summary {
            kind: &'static str,
            param_count: usize,
            stop_reason: StopReason,
            stopped_at: usize,
            best_epoch: usize,
            final_loss: f64,
        }
        let mut out = Vec::new();
        for rec in &self.checkpoints {
            serde_json::to_writer(
                &mut out,
                &Line {
                    kind: "checkpoint",
                    rec,
                },
            )
            .expect("serializable");
            out.push(b'\n');
        }
        let summary = Summary {
            kind: "summary",
            param_count: self.param_count,
            stop_reason: self.stop_reason,
            stopped_at: self.stopped_at,
            best_epoch: self.best_epoch,
            final_loss: self.final_loss,
        };
        serde_json::to_writer(&mut out, &summary).expect("serializable");
        out.push(b'\n');
        String::from_utf8(out).expect("json is utf-8")
    }

    pub fn write_jsonl(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_jsonl().as_bytes())
    }
}

/// Tracks the increase streak and the best snapshot across checkpoints.
#[derive(Debug, Clone)]
pub struct EarlyStopper {
    patience: usize,
    previous: Option<f64>,
    streak: usize,
    best: Option<Checkpoint>,
}

impl EarlyStopper {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            previous: None,
            streak: 0,
            best: None,
        }
    }

    /// Records a checkpoint; returns true when training should stop.
    pub fn observe(&mut self, epoch: usize, loss: f64, model: &MlpModel) -> bool {
        match self.previous {
            Some(p) if loss > p => self.streak += 1,
            _ => self.streak = 0,
        }
        self.previous = Some(loss);
        if self.best.as_ref().is_none_or(|b| loss < b.validation_loss) {
            self.best = Some(Checkpoint {
                epoch,
                model: model.clone(),
                validation_loss: loss,
            });
        }
        self.streak >= self.patience
    }

    pub fn best(&self) -> Option<&Checkpoint> {
        self.best.as_ref()
    }

    pub fn into_best(self) -> Option<Checkpoint> {
        self.best
    }
}

fn check_pairs(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    dim: usize,
) -> Result<(), SimplifierError> {
    if src.rows() != tgt.rows() {
        return Err(SimplifierError::RowMismatch(src.rows(), tgt.rows()));
    }
    for m in [src, tgt] {
        if m.dim() != dim {
            return Err(SimplifierError::DimMismatch {
                model: dim,
                input: m.dim(),
            });
        }
    }
    if src.rows() == 0 {
        return Err(SimplifierError::RowMismatch(0, 0));
    }
    Ok(())
}

/// Trains a fresh model and validates on the full validation set.
pub fn train(
    train_pairs: (&EmbeddingMatrix, &EmbeddingMatrix),
    val_pairs: (&EmbeddingMatrix, &EmbeddingMatrix),
    cfg: &TrainingConfig,
    dim: usize,
    hidden: usize,
) -> Result<(MlpModel, TrainingLog), SimplifierError> {
    check_pairs(val_pairs.0, val_pairs.1, dim)?;
    let vx = to_array(val_pairs.0);
    let vy = to_array(val_pairs.1);
    train_with_validator(train_pairs, cfg, dim, hidden, |model, _epoch| {
        mse_array(model.forward_array(vx.view()).view(), vy.view())
    })
}

/// Like [`train`], with the checkpoint validation loss supplied by the caller.
///
/// `validate` receives the current model and the checkpoint epoch.
pub fn train_with_validator<F>(
    train_pairs: (&EmbeddingMatrix, &EmbeddingMatrix),
    cfg: &TrainingConfig,
    dim: usize,
    hidden: usize,
    mut validate: F,
) -> Result<(MlpModel, TrainingLog), SimplifierError>
where
    F: FnMut(&MlpModel, usize) -> f64,
{
    cfg.validate()?;
    if hidden == 0 {
        return Err(SimplifierError::InvalidConfig(
            "hidden must be positive".into(),
        ));
    }
    check_pairs(train_pairs.0, train_pairs.1, dim)?;
    let x = to_array(train_pairs.0);
    let y = to_array(train_pairs.1);
    let n = x.nrows();

    let mut model = init_model(dim, hidden, cfg.seed);
    model.activation = cfg.activation;
    let mut adam = AdamState::new(&model);
    let mut order_rng = DetRng::new(cfg.seed.wrapping_add(SHUFFLE_STREAM));
    let mut stopper = EarlyStopper::new(cfg.patience);
    let mut records = Vec::new();
    let mut stop = StopReason::MaxEpochs;
    let mut stopped_at = cfg.max_epochs;

    for epoch in 1..=cfg.max_epochs {
        let order = order_rng.permutation(n);
        let mut epoch_loss = 0.0f64;
        for chunk in order.chunks(cfg.batch_size) {
            let (sel_x, sel_y): (Array2<f64>, Array2<f64>);
            // A full batch is the whole set; row order only matters for summation.
            let (bx, by) = if chunk.len() == n {
                (x.view(), y.view())
            } else {
                sel_x = x.select(Axis(0), chunk);
                sel_y = y.select(Axis(0), chunk);
                (sel_x.view(), sel_y.view())
            };
            let pred = model.forward_array(bx);
            epoch_loss += mse_array(pred.view(), by) * chunk.len() as f64;
            let grads = model.gradients_array(bx, by);
            adam_step(&mut model, &grads, &mut adam, cfg.learning_rate, &cfg.adam)?;
        }

        let at_checkpoint = epoch % cfg.checkpoint_interval == 0 || epoch == cfg.max_epochs;
        if !at_checkpoint {
            continue;
        }
        let validation_loss = validate(&model, epoch);
        if !validation_loss.is_finite() {
            return Err(SimplifierError::Diverged { epoch });
        }
        records.push(CheckpointRecord {
            epoch,
            train_loss: epoch_loss / n as f64,
            validation_loss,
        });
        log::debug!("epoch {epoch}: validation loss {validation_loss:.6e}");
        if stopper.observe(epoch, validation_loss, &model) {
            stop = StopReason::EarlyStop;
            stopped_at = epoch;
            break;
        }
    }

    let best = stopper.into_best().expect("at least one checkpoint");
    let log = TrainingLog {
        param_count: param_count(dim, hidden),
        checkpoints: records,
        stop_reason: stop,
        stopped_at,
        best_epoch: best.epoch,
        final_loss: best.validation_loss,
    };
    Ok((best.model, log))
}
