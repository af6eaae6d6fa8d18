//! `qsonn train`: feature cache in, checkpoint and reports out.

use crate::commands::write_config_echo;
use crate::config::ExperimentConfig;
use anyhow::{Context, Result};
use qsonn::dataset::read_store;
use qsonn::model::{build_model, save_checkpoint};
use qsonn::training::train_observed;
use std::path::PathBuf;

#[derive(clap::Args)]
pub struct Args {
    /// Feature cache directory produced by `preprocess`
    #[arg(long)]
    pub features: PathBuf,
    /// Output directory for config.echo, report.csv, report.json, best.ckpt
    #[arg(long)]
    pub out: PathBuf,
    /// JSON config file; flags override file values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Layer kind: conv, selfonn or qselfonn [default: qselfonn]
    #[arg(long)]
    pub layer: Option<String>,
    /// Power-series truncation order Q [default: 3]
    #[arg(long)]
    pub q: Option<usize>,
    /// Quadratic-term structure: off, upper or full [default: full]
    #[arg(long)]
    pub quad_mode: Option<String>,
    /// Dropout rate [default: 0.2]
    #[arg(long)]
    pub dropout_rate: Option<f64>,
    /// Learning rate [default: 0.01]
    #[arg(long)]
    pub lr: Option<f32>,
    /// Momentum [default: 0.9]
    #[arg(long)]
    pub momentum: Option<f32>,
    /// Mini-batch size [default: 50]
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Maximum epochs [default: 100]
    #[arg(long)]
    pub max_epochs: Option<u32>,
    /// Early-stopping patience in epochs [default: 10]
    #[arg(long)]
    pub patience: Option<u32>,
    /// Master seed for init, shuffling and dropout [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn apply_overrides(cfg: &mut ExperimentConfig, args: &Args) {
    if let Some(v) = &args.layer {
        cfg.model.layer_kind = v.clone();
    }
    if let Some(v) = args.q {
        cfg.model.q_max = v;
    }
    if let Some(v) = &args.quad_mode {
        cfg.model.quad_mode = v.clone();
    }
    if let Some(v) = args.dropout_rate {
        cfg.model.dropout_rate = v;
    }
    if let Some(v) = args.lr {
        cfg.train.lr = v;
    }
    if let Some(v) = args.momentum {
        cfg.train.momentum = v;
    }
    if let Some(v) = args.batch_size {
        cfg.train.batch_size = v;
    }
    if let Some(v) = args.max_epochs {
        cfg.train.max_epochs = v;
    }
    if let Some(v) = args.patience {
        cfg.train.patience = v;
    }
    if let Some(v) = args.seed {
        cfg.train.seed = v;
    }
}

pub fn run(args: Args) -> Result<()> {
    let mut cfg = ExperimentConfig::load(args.config.as_deref())?;
    apply_overrides(&mut cfg, &args);

    let spec = cfg.to_model_spec()?;
    let train_cfg = cfg.to_train_config();
    let store = read_store(&args.features, &cfg.to_frontend())?;
    write_config_echo(&args.out, &cfg)?;

    let mut model = build_model(&spec)?;
    model.init_params(train_cfg.seed);
    println!(
        "training a {} model (Q={}, {} parameters) on {} clips, seed {}",
        spec.layer_kind.as_str(),
        spec.q_max,
        model.param_count(),
        store.train.len(),
        train_cfg.seed
    );

    let outcome = train_observed(model, &store, &train_cfg, |r| {
        println!(
            "epoch {:>3}: train_loss {:.4}  train_acc {:.4}  val_acc {:.4}  ({:.1}s)",
            r.epoch, r.train_loss, r.train_acc, r.val_acc, r.seconds
        );
    })?;

    let report_csv = args.out.join("report.csv");
    std::fs::write(&report_csv, outcome.report.to_csv())
        .with_context(|| format!("writing {}", report_csv.display()))?;
    let report_json = args.out.join("report.json");
    std::fs::write(&report_json, outcome.report.to_json())
        .with_context(|| format!("writing {}", report_json.display()))?;
    let ckpt = args.out.join("best.ckpt");
    save_checkpoint(&outcome.best_model, &ckpt)?;

    println!(
        "best epoch {} with validation accuracy {:.4}{}",
        outcome.report.best_epoch,
        outcome.report.best_val_acc,
        match outcome.report.test_acc {
            Some(acc) => format!("; test accuracy {acc:.4}"),
            None => String::new(),
        }
    );
    println!("wrote {}", args.out.display());
    Ok(())
}
