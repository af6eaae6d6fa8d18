//! `qsonn bench`: analytic per-layer parameter/MAC tables plus measured
//! per-utterance inference latency.

use crate::config::ExperimentConfig;
use anyhow::{bail, Result};
use qsonn::dataset::read_store;
use qsonn::model::{build_model, count_costs, LayerKind, ModelSpec};
use qsonn::rng::SplitMix64;
use qsonn::tensor::Tensor;
use std::path::PathBuf;
use std::time::Instant;

#[derive(clap::Args)]
pub struct Args {
    /// Layer kind to benchmark: conv, selfonn, qselfonn or all [default: all]
    #[arg(long, default_value = "all")]
    pub layer: String,
    /// Power-series order for the operational layers [default: 2]
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    /// Feature cache directory; latency is averaged over its test split.
    /// Without it, synthetic random utterances are used.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Timing runs; the median is reported [default: 3]
    #[arg(long, default_value_t = 3)]
    pub runs: usize,
    /// Synthetic utterances when no features are given [default: 20]
    #[arg(long, default_value_t = 20)]
    pub utterances: usize,
    /// JSON config file (frontend settings for reading the cache)
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn kinds_for(arg: &str) -> Result<Vec<LayerKind>> {
    Ok(match arg {
        "all" => vec![LayerKind::Conv, LayerKind::SelfOnn, LayerKind::QSelfOnn],
        other => vec![other.parse::<LayerKind>()?],
    })
}

pub fn run(args: Args) -> Result<()> {
    if args.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let cfg = ExperimentConfig::load(args.config.as_deref())?;
    let kinds = kinds_for(&args.layer)?;

    let inputs: Vec<Tensor<f32>> = match &args.features {
        Some(dir) => {
            let store = read_store(dir, &cfg.to_frontend())?;
            if store.test.is_empty() {
                bail!("the test split of {} is empty", dir.display());
            }
            store.test.features.clone()
        }
        None => {
            let mut rng = SplitMix64::new(17);
            (0..args.utterances.max(1))
                .map(|_| {
                    Tensor::from_vec(
                        &[1, 20, 51],
                        (0..20 * 51)
                            .map(|_| rng.uniform(-1.0, 1.0) as f32)
                            .collect(),
                    )
                })
                .collect()
        }
    };
    println!(
        "timing {} utterances x {} runs per layer kind (median reported)\n",
        inputs.len(),
        args.runs
    );

    for kind in kinds {
        let q = if kind == LayerKind::Conv { 1 } else { args.q };
        let spec = ModelSpec::speech_default(kind, q);
        let report = count_costs(&spec)?;
        println!("== {} (Q={q}) ==", kind.as_str());
        print!("{}", report.table());

        let mut model = build_model(&spec)?;
        model.init_params(1);
        let mut times: Vec<f64> = (0..args.runs)
            .map(|_| {
                let start = Instant::now();
                for x in &inputs {
                    let _ = model.infer(x)?;
                }
                Ok::<f64, anyhow::Error>(start.elapsed().as_secs_f64() / inputs.len() as f64)
            })
            .collect::<Result<_>>()?;
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median_ms = times[times.len() / 2] * 1e3;
        println!(
            "TOTAL {} q={q} params={} macs={} median_ms_per_utterance={median_ms:.3}\n",
            kind.as_str(),
            report.total_params(),
            report.total_macs()
        );
    }
    Ok(())
}
