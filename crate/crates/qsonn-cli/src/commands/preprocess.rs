//! `qsonn preprocess`: dataset tree in, feature cache out.

use crate::commands::write_config_echo;
use crate::config::ExperimentConfig;
use anyhow::{bail, Result};
use qsonn::dataset::{build_store, scan_gsc, scan_ssc, write_store, Split};
use std::path::PathBuf;

#[derive(clap::Args)]
pub struct Args {
    /// Dataset root (label folders; GSC also needs its two split list files)
    #[arg(long)]
    pub data_root: PathBuf,
    /// Output directory for the per-split cache files
    #[arg(long)]
    pub out: PathBuf,
    /// JSON config file; flags override file values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset layout: gsc (official split lists) or ssc (seeded 80/10/10) [default: gsc]
    #[arg(long)]
    pub kind: Option<String>,
    /// Per-class shuffle seed for ssc splits [default: 0]
    #[arg(long)]
    pub split_seed: Option<u64>,
}

pub fn run(args: Args) -> Result<()> {
    let mut cfg = ExperimentConfig::load(args.config.as_deref())?;
    if let Some(kind) = args.kind {
        cfg.dataset.kind = kind;
    }
    if let Some(seed) = args.split_seed {
        cfg.dataset.split_seed = seed;
    }

    let manifest = match cfg.dataset.kind.as_str() {
        "gsc" => scan_gsc(&args.data_root)?,
        "ssc" => scan_ssc(&args.data_root, cfg.dataset.split_seed)?,
        other => bail!("unknown dataset kind '{other}' (expected gsc or ssc)"),
    };
    if manifest.records.is_empty() {
        bail!(
            "no target-command clips found under {}",
            args.data_root.display()
        );
    }
    for warning in manifest.coverage_warnings() {
        eprintln!("warning: {warning}");
    }

    let frontend = cfg.to_frontend();
    println!(
        "extracting features for {} clips (train {}, val {}, test {}) ...",
        manifest.records.len(),
        manifest.split_len(Split::Train),
        manifest.split_len(Split::Val),
        manifest.split_len(Split::Test),
    );
    let store = build_store(&manifest, &frontend)?;
    write_store(&args.out, &store, &frontend)?;
    write_config_echo(&args.out, &cfg)?;
    println!(
        "wrote feature cache to {} (fingerprint {:016x})",
        args.out.display(),
        frontend.fingerprint()
    );
    Ok(())
}
