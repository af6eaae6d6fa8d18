//! `qsonn sweep-q`: train each layer kind across Q values and tabulate test
//! accuracy versus Q.

use crate::commands::write_config_echo;
use crate::config::ExperimentConfig;
use anyhow::{Context, Result};
use qsonn::dataset::read_store;
use qsonn::model::{build_model, LayerKind, ModelSpec};
use qsonn::training::train;
use std::path::PathBuf;

#[derive(clap::Args)]
pub struct Args {
    /// Feature cache directory produced by `preprocess`
    #[arg(long)]
    pub features: PathBuf,
    /// Output directory for config.echo and sweep.csv
    #[arg(long)]
    pub out: PathBuf,
    /// Largest power-series order to sweep [default: 5]
    #[arg(long, default_value_t = 5)]
    pub q_max: usize,
    /// Comma-separated layer kinds to sweep [default: conv,selfonn,qselfonn]
    #[arg(long, default_value = "conv,selfonn,qselfonn")]
    pub layers: String,
    /// JSON config file; flags override file values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Maximum epochs per run [default: 100]
    #[arg(long)]
    pub max_epochs: Option<u32>,
    /// Early-stopping patience in epochs [default: 10]
    #[arg(long)]
    pub patience: Option<u32>,
    /// Master seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn run(args: Args) -> Result<()> {
    let mut cfg = ExperimentConfig::load(args.config.as_deref())?;
    if let Some(v) = args.max_epochs {
        cfg.train.max_epochs = v;
    }
    if let Some(v) = args.patience {
        cfg.train.patience = v;
    }
    if let Some(v) = args.seed {
        cfg.train.seed = v;
    }
    let kinds: Vec<LayerKind> = args
        .layers
        .split(',')
        .map(|s| s.trim().parse::<LayerKind>())
        .collect::<Result<_, _>>()?;

    let store = read_store(&args.features, &cfg.to_frontend())?;
    write_config_echo(&args.out, &cfg)?;
    let train_cfg = cfg.to_train_config();

    let mut csv = String::from("layer,q,epochs,best_val_acc,test_acc\n");
    println!(
        "{:<10} {:>3} {:>7} {:>13} {:>10}",
        "layer", "q", "epochs", "best_val_acc", "test_acc"
    );
    for kind in kinds {
        let q_values: Vec<usize> = match kind {
            LayerKind::Conv => vec![1],
            _ => (1..=args.q_max).collect(),
        };
        for q in q_values {
            let mut spec = ModelSpec::speech_default(kind, q);
            spec.dropout_rate = cfg.model.dropout_rate;
            if kind == LayerKind::QSelfOnn {
                spec.quad_mode = cfg.parse_quad_mode()?;
            }
            let mut model = build_model(&spec)?;
            model.init_params(train_cfg.seed);
            let outcome = train(model, &store, &train_cfg)?;
            let test_acc = outcome.report.test_acc.unwrap_or(f64::NAN);
            println!(
                "{:<10} {:>3} {:>7} {:>13.4} {:>10.4}",
                kind.as_str(),
                q,
                outcome.report.epochs.len(),
                outcome.report.best_val_acc,
                test_acc
            );
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                kind.as_str(),
                q,
                outcome.report.epochs.len(),
                outcome.report.best_val_acc,
                test_acc
            ));
        }
    }
    let csv_path = args.out.join("sweep.csv");
    std::fs::write(&csv_path, csv).with_context(|| format!("writing {}", csv_path.display()))?;
    println!("wrote {}", csv_path.display());
    Ok(())
}
