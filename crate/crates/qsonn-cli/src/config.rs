//! File-based experiment configuration.
//!
//! Every field has a default matching the reference experiment setup, a JSON
//! config file may override any subset, and command-line flags override the
//! file. Unknown keys are rejected so typos cannot silently fall back to
//! defaults. The merged configuration is echoed into each run's output
//! directory as `config.echo` for provenance.

use anyhow::{bail, Context, Result};
use qsonn::audio::FrontendConfig;
use qsonn::layers::QuadMode;
use qsonn::model::{LayerKind, ModelSpec};
use qsonn::training::TrainConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSection {
    /// `gsc` (official list-file splits) or `ssc` (seeded 80/10/10).
    pub kind: String,
    /// Seed for the ssc per-class shuffle.
    pub split_seed: u64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        DatasetSection {
            kind: "gsc".into(),
            split_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrontendSection {
    pub frame_len: usize,
    pub hop: usize,
    pub fft_size: usize,
    pub num_mel_filters: usize,
    pub num_coefficients: usize,
    pub mel_low_hz: f64,
    pub mel_high_hz: f64,
    pub log_floor: f64,
}

impl Default for FrontendSection {
    fn default() -> Self {
        let f = FrontendConfig::default();
        FrontendSection {
            frame_len: f.frame_len,
            hop: f.hop,
            fft_size: f.fft_size,
            num_mel_filters: f.num_mel_filters,
            num_coefficients: f.num_coefficients,
            mel_low_hz: f.mel_low_hz,
            mel_high_hz: f.mel_high_hz,
            log_floor: f.log_floor,
        }
    }
}

impl FrontendSection {
    pub fn to_frontend(&self) -> FrontendConfig {
        FrontendConfig {
            frame_len: self.frame_len,
            hop: self.hop,
            fft_size: self.fft_size,
            num_mel_filters: self.num_mel_filters,
            num_coefficients: self.num_coefficients,
            mel_low_hz: self.mel_low_hz,
            mel_high_hz: self.mel_high_hz,
            log_floor: self.log_floor,
            ..FrontendConfig::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    /// `conv`, `selfonn` or `qselfonn`.
    pub layer_kind: String,
    pub q_max: usize,
    /// `off`, `upper` or `full`.
    pub quad_mode: String,
    pub dropout_rate: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            layer_kind: "qselfonn".into(),
            q_max: 3,
            quad_mode: "full".into(),
            dropout_rate: 0.2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub lr: f32,
    pub momentum: f32,
    pub batch_size: usize,
    pub max_epochs: u32,
    pub patience: u32,
    pub seed: u64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            lr: t.lr,
            momentum: t.momentum,
            batch_size: t.batch_size,
            max_epochs: t.max_epochs,
            patience: t.patience,
            seed: t.seed,
        }
    }
}

/// The complete experiment configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub dataset: DatasetSection,
    pub frontend: FrontendSection,
    pub model: ModelSection,
    pub train: TrainSection,
}

impl ExperimentConfig {
    /// Defaults, optionally overridden by a JSON config file.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(ExperimentConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config file {}", p.display()))?;
                let cfg: ExperimentConfig = serde_json::from_str(&text)
                    .with_context(|| format!("parsing config file {}", p.display()))?;
                Ok(cfg)
            }
        }
    }

    pub fn parse_quad_mode(&self) -> Result<QuadMode> {
        match self.model.quad_mode.as_str() {
            "off" => Ok(QuadMode::Off),
            "upper" | "upper-triangular" => Ok(QuadMode::UpperTriangular),
            "full" | "full-block" => Ok(QuadMode::FullBlock),
            other => bail!("unknown quad mode '{other}' (expected off, upper or full)"),
        }
    }

    pub fn parse_layer_kind(&self) -> Result<LayerKind> {
        Ok(self.model.layer_kind.parse::<LayerKind>()?)
    }

    pub fn to_frontend(&self) -> FrontendConfig {
        self.frontend.to_frontend()
    }

    /// Assemble the model spec implied by this configuration.
    pub fn to_model_spec(&self) -> Result<ModelSpec> {
        let kind = self.parse_layer_kind()?;
        let mut spec = ModelSpec::speech_default(kind, self.model.q_max);
        spec.dropout_rate = self.model.dropout_rate;
        spec.input_shape = [
            1,
            self.frontend.num_coefficients,
            self.to_frontend().num_frames(),
        ];
        if kind == LayerKind::QSelfOnn {
            let mode = self.parse_quad_mode()?;
            if mode == QuadMode::Off {
                bail!("qselfonn requires quad_mode 'upper' or 'full'; use layer_kind 'selfonn' for quad off");
            }
            spec.quad_mode = mode;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_train_config(&self) -> TrainConfig {
        TrainConfig {
            lr: self.train.lr,
            momentum: self.train.momentum,
            batch_size: self.train.batch_size,
            max_epochs: self.train.max_epochs,
            patience: self.train.patience,
            seed: self.train.seed,
        }
    }

    /// Pretty JSON for the `config.echo` provenance file.
    pub fn echo(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
