//! SGD-with-momentum training, early stopping, evaluation, and the
//! finite-difference gradient-check harness.

mod gradcheck;
mod loss;
mod report;
mod run;
mod sgd;

pub use gradcheck::{grad_check, grad_check_suite, GradCheckCase};
pub use loss::softmax_cross_entropy;
pub use report::{EpochRecord, TrainReport};
pub use run::{evaluate, train, train_observed, EarlyStopper, EpochStats, TrainOutcome, Trainer};
pub use sgd::sgd_step;

use crate::error::{Error, Result};

/// Optimizer and loop hyperparameters. The defaults are the ones used for
/// the speech-command experiments: SGD with momentum 0.9 at learning rate
/// 0.01, mini-batches of 50, at most 100 epochs with patience 10.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub lr: f32,
    pub momentum: f32,
    pub batch_size: usize,
    pub max_epochs: u32,
    pub patience: u32,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 0.01,
            momentum: 0.9,
            batch_size: 50,
            max_epochs: 100,
            patience: 10,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.lr
            )));
        }
        if !(self.momentum.is_finite() && (0.0..1.0).contains(&self.momentum)) {
            return Err(Error::Config(format!(
                "momentum must be in [0, 1), got {}",
                self.momentum
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::Config(
                "max_epochs and patience must be positive".into(),
            ));
        }
        if self.patience > self.max_epochs {
            return Err(Error::Config(format!(
                "patience {} exceeds max_epochs {}",
                self.patience, self.max_epochs
            )));
        }
        Ok(())
    }
}
