//! `qsonn eval`: accuracy of a checkpoint on one split.

use crate::config::ExperimentConfig;
use anyhow::Result;
use qsonn::dataset::{read_store, Split};
use qsonn::model::load_checkpoint;
use qsonn::training::evaluate;
use std::path::PathBuf;

#[derive(clap::Args)]
pub struct Args {
    /// Checkpoint file written by `train`
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Feature cache directory produced by `preprocess`
    #[arg(long)]
    pub features: PathBuf,
    /// Split to score: train, val or test [default: test]
    #[arg(long, default_value = "test")]
    pub split: String,
    /// JSON config file (must carry the frontend settings the cache was
    /// built with)
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<()> {
    let cfg = ExperimentConfig::load(args.config.as_deref())?;
    let split: Split = args.split.parse()?;
    let (model, _) = load_checkpoint(&args.checkpoint)?;
    let store = read_store(&args.features, &cfg.to_frontend())?;
    let accuracy = evaluate(&model, store.split(split))?;
    println!(
        "{} accuracy of {}: {:.4} ({} clips)",
        split,
        args.checkpoint.display(),
        accuracy,
        store.split(split).len()
    );
    Ok(())
}
