//! The training loop: mini-batch SGD with momentum, per-epoch validation,
//! and early stopping on the validation accuracy.

use super::loss::softmax_cross_entropy;
use super::report::{EpochRecord, TrainReport};
use super::sgd::sgd_step;
use super::TrainConfig;
use crate::dataset::{epoch_batches, FeatureStore, SplitFeatures};
use crate::error::{Error, Result};
use crate::model::{Model, ModelGrads, TrainState};
use crate::tensor::Tensor;
use std::time::Instant;

/// Early-stopping rule: training continues only while the current
/// validation accuracy has matched or exceeded the running best at least
/// once within the last `patience` epochs. A strictly decreasing accuracy
/// sequence therefore stops after `patience + 1` epochs.
#[derive(Debug, Clone)]
pub struct EarlyStopper {
    patience: u32,
    best: f64,
    streak: u32,
}

impl EarlyStopper {
    pub fn new(patience: u32) -> Self {
        EarlyStopper {
            patience,
            best: f64::NEG_INFINITY,
            streak: 0,
        }
    }

    /// Rebuild mid-run state when resuming from a checkpoint.
    pub fn resume(patience: u32, best: f64, streak: u32) -> Self {
        EarlyStopper {
            patience,
            best,
            streak,
        }
    }

    /// Record one epoch's validation accuracy; returns `true` when training
    /// should stop. Matching the running best (`>=`) resets the streak; only
    /// strictly exceeding it moves the best, so ties keep the earliest best
    /// epoch.
    pub fn observe(&mut self, val_acc: f64) -> bool {
        if val_acc >= self.best {
            self.streak = 0;
        } else {
            self.streak += 1;
        }
        if val_acc > self.best {
            self.best = val_acc;
        }
        self.streak >= self.patience
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    pub fn streak(&self) -> u32 {
        self.streak
    }
}

/// Loss and accuracy of one training epoch.
#[derive(Debug, Clone, Copy)]
pub struct EpochStats {
    /// Mean per-batch cross-entropy.
    pub train_loss: f64,
    /// Accuracy of the training-mode forward passes (dropout active).
    pub train_acc: f64,
}

/// Owns a model mid-training: optimizer velocity, the dropout step counter,
/// and the epoch index that seeds each epoch's shuffle.
pub struct Trainer {
    model: Model,
    cfg: TrainConfig,
    velocity: Vec<Tensor<f32>>,
    step: u64,
    epoch: u32,
}

impl Trainer {
    pub fn new(model: Model, cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let velocity = model
            .named_params()
            .iter()
            .map(|(_, t)| t.zeros_like())
            .collect();
        Ok(Trainer {
            model,
            cfg,
            velocity,
            step: 0,
            epoch: 0,
        })
    }

    /// Continue from a checkpointed optimizer state; the resumed run
    /// reproduces the uninterrupted one step for step.
    pub fn resume(model: Model, cfg: TrainConfig, state: &TrainState) -> Result<Self> {
        cfg.validate()?;
        let velocity = match &state.velocity {
            Some(v) => {
                let expected = model.named_params().len();
                if v.len() != expected {
                    return Err(Error::Shape(format!(
                        "checkpoint has {} velocity tensors, model has {expected} parameters",
                        v.len()
                    )));
                }
                v.clone()
            }
            None => model
                .named_params()
                .iter()
                .map(|(_, t)| t.zeros_like())
                .collect(),
        };
        Ok(Trainer {
            model,
            cfg,
            velocity,
            step: state.rng_step,
            epoch: state.epoch,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn into_model(self) -> Model {
        self.model
    }

    /// Completed epochs.
    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    /// Snapshot for a mid-training checkpoint.
    pub fn state(&self, best_val_acc: f64, patience_streak: u32) -> TrainState {
        TrainState {
            epoch: self.epoch,
            best_val_acc,
            rng_step: self.step,
            patience_streak,
            velocity: Some(self.velocity.clone()),
        }
    }

    /// One pass over the training split: shuffled mini-batches, gradients
    /// averaged per batch, one optimizer step per batch.
    pub fn run_epoch(&mut self, training: &SplitFeatures) -> Result<EpochStats> {
        if training.is_empty() {
            return Err(Error::Data("training split is empty".into()));
        }
        let batches = epoch_batches(
            training.len(),
            self.cfg.batch_size,
            self.cfg.seed,
            self.epoch,
        );
        let mut loss_sum = 0.0f64;
        let mut correct = 0usize;
        for batch in &batches {
            let mut grads = ModelGrads::zeros_for(&self.model);
            let mut batch_loss = 0.0f64;
            for &idx in batch {
                let x = &training.features[idx];
                let label = training.labels[idx];
                let (logits, trace) = self.model.forward_train(x, self.cfg.seed, self.step)?;
                self.step += 1;
                let (loss, grad_logits) = softmax_cross_entropy(&logits, label);
                if !loss.is_finite() {
                    return Err(Error::Divergence(format!(
                        "non-finite loss at epoch {}, step {} (clip {})",
                        self.epoch + 1,
                        self.step,
                        training.paths.get(idx).map(String::as_str).unwrap_or("?")
                    )));
                }
                batch_loss += loss as f64;
                if argmax(logits.data()) == label as usize {
                    correct += 1;
                }
                let g = self.model.backward(&trace, &grad_logits)?;
                grads.accumulate(&g);
            }
            grads.scale(1.0 / batch.len() as f32);
            loss_sum += batch_loss / batch.len() as f64;
            sgd_step(
                &mut self.model.params_mut(),
                &grads.tensors(),
                &mut self.velocity,
                self.cfg.lr,
                self.cfg.momentum,
            )?;
        }
        self.epoch += 1;
        Ok(EpochStats {
            train_loss: loss_sum / batches.len() as f64,
            train_acc: correct as f64 / training.len() as f64,
        })
    }
}

/// Index of the largest logit; ties break toward the lowest class id.
fn argmax(values: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Fraction of correctly classified examples, dropout disabled.
pub fn evaluate(model: &Model, features: &SplitFeatures) -> Result<f64> {
    if features.is_empty() {
        return Err(Error::Data("cannot evaluate an empty split".into()));
    }
    let mut correct = 0usize;
    for (x, &label) in features.features.iter().zip(&features.labels) {
        let logits = model.infer(x)?;
        if argmax(logits.data()) == label as usize {
            correct += 1;
        }
    }
    Ok(correct as f64 / features.len() as f64)
}

/// A finished run: the per-epoch report and the best-validation model.
#[derive(Debug)]
pub struct TrainOutcome {
    pub report: TrainReport,
    pub best_model: Model,
}

/// Train until `max_epochs` or early stopping, returning the model of the
/// best validation epoch (ties keep the earliest).
pub fn train(model: Model, store: &FeatureStore, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_observed(model, store, cfg, |_| {})
}

/// [`train`] with a per-epoch observer, for progress reporting.
pub fn train_observed(
    model: Model,
    store: &FeatureStore,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if store.train.is_empty() {
        return Err(Error::Data("training split is empty".into()));
    }
    if store.val.is_empty() {
        return Err(Error::Data("validation split is empty".into()));
    }

    let mut trainer = Trainer::new(model, cfg.clone())?;
    let mut stopper = EarlyStopper::new(cfg.patience);
    let mut records = Vec::new();
    let mut best: Option<(u32, f64, Model)> = None;

    for epoch in 1..=cfg.max_epochs {
        let start = Instant::now();
        let stats = trainer.run_epoch(&store.train)?;
        let val_acc = evaluate(trainer.model(), &store.val)?;
        let record = EpochRecord {
            epoch,
            train_loss: stats.train_loss,
            train_acc: stats.train_acc,
            val_acc,
            seconds: start.elapsed().as_secs_f64(),
        };
        on_epoch(&record);
        records.push(record);
        let improved = best.as_ref().is_none_or(|(_, acc, _)| val_acc > *acc);
        if improved {
            best = Some((epoch, val_acc, trainer.model().clone()));
        }
        if stopper.observe(val_acc) {
            break;
        }
    }

    let (best_epoch, best_val_acc, best_model) =
        best.expect("at least one epoch ran, so a best checkpoint exists");
    let test_acc = if store.test.is_empty() {
        None
    } else {
        Some(evaluate(&best_model, &store.test)?)
    };
    Ok(TrainOutcome {
        report: TrainReport {
            epochs: records,
            best_epoch,
            best_val_acc,
            test_acc,
        },
        best_model,
    })
}
