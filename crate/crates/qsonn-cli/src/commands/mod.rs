pub mod bench;
pub mod eval;
pub mod gradcheck;
pub mod preprocess;
pub mod sweep;
pub mod train;

use crate::config::ExperimentConfig;
use anyhow::{Context, Result};
use std::path::Path;

/// Create the output directory and drop the merged config into it as
/// `config.echo`.
pub fn write_config_echo(out_dir: &Path, cfg: &ExperimentConfig) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let path = out_dir.join("config.echo");
    std::fs::write(&path, cfg.echo()).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
