//! Analytic parameter and multiply-accumulate counts per inference.
//!
//! The MAC totals stand in for on-device deployment time: they grow with Q
//! and with the quadratic term exactly as the measured wall clock does, and
//! are itemized per layer for the benchmark table.

use super::{Geometry, ModelSpec};
use crate::error::Result;
use crate::layers::QuadMode;

/// Cost of a single layer in the chain.
#[derive(Debug, Clone)]
pub struct LayerCost {
    pub name: String,
    pub params: usize,
    pub macs: u64,
}

/// Per-layer costs for one spec.
#[derive(Debug, Clone)]
pub struct CostReport {
    pub items: Vec<LayerCost>,
}

impl CostReport {
    pub fn total_params(&self) -> usize {
        self.items.iter().map(|i| i.params).sum()
    }

    pub fn total_macs(&self) -> u64 {
        self.items.iter().map(|i| i.macs).sum()
    }

    /// Fixed-width table for terminal output.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<12} {:>12} {:>16}\n",
            "layer", "params", "macs"
        ));
        for item in &self.items {
            out.push_str(&format!(
                "{:<12} {:>12} {:>16}\n",
                item.name, item.params, item.macs
            ));
        }
        out.push_str(&format!(
            "{:<12} {:>12} {:>16}\n",
            "total",
            self.total_params(),
            self.total_macs()
        ));
        out
    }
}

fn op_layer_cost(
    spec: &ModelSpec,
    name: &str,
    c_in: usize,
    c_out: usize,
    out_hw: (usize, usize),
) -> LayerCost {
    let n = spec.kernel.receptive_field();
    let row_len = c_in * n;
    let positions = (out_hw.0 * out_hw.1) as u64;
    let q = spec.q_max as u64;

    let linear_macs = q * positions * c_out as u64 * row_len as u64;
    // raising the patch matrix to powers 2..Q costs one multiply per element per power
    let power_macs = (q - 1) * positions * row_len as u64;
    let quad_macs = match spec.quad_mode {
        QuadMode::Off => 0,
        // x^T (Omega x): n*n for the mat-vec plus n for the dot, per channel block
        _ => q * positions * c_out as u64 * c_in as u64 * (n * n + n) as u64,
    };

    let linear_params = spec.q_max * c_out * c_in * n;
    let block_params = match spec.quad_mode {
        QuadMode::Off => 0,
        QuadMode::UpperTriangular => spec.q_max * c_out * c_in * (n * (n + 1) / 2),
        QuadMode::FullBlock => spec.q_max * c_out * c_in * n * n,
    };

    LayerCost {
        name: name.to_string(),
        params: linear_params + block_params + c_out,
        macs: linear_macs + power_macs + quad_macs,
    }
}

/// Exact parameter and MAC counts per one-utterance inference, itemized per
/// layer.
pub fn count_costs(spec: &ModelSpec) -> Result<CostReport> {
    spec.validate()?;
    let geo: Geometry = spec.geometry()?;
    let kind = spec.layer_kind.as_str();
    let items = vec![
        op_layer_cost(
            spec,
            &format!("{kind}1"),
            spec.input_shape[0],
            spec.channels[0],
            (geo.conv1_out[1], geo.conv1_out[2]),
        ),
        LayerCost {
            name: "pool1".into(),
            params: 0,
            macs: 0,
        },
        LayerCost {
            name: "tanh1".into(),
            params: 0,
            macs: 0,
        },
        LayerCost {
            name: "dropout1".into(),
            params: 0,
            macs: 0,
        },
        op_layer_cost(
            spec,
            &format!("{kind}2"),
            spec.channels[0],
            spec.channels[1],
            (geo.conv2_out[1], geo.conv2_out[2]),
        ),
        LayerCost {
            name: "pool2".into(),
            params: 0,
            macs: 0,
        },
        LayerCost {
            name: "tanh2".into(),
            params: 0,
            macs: 0,
        },
        LayerCost {
            name: "dropout2".into(),
            params: 0,
            macs: 0,
        },
        LayerCost {
            name: "dense".into(),
            params: geo.dense_in * spec.fc_out + spec.fc_out,
            macs: (geo.dense_in * spec.fc_out) as u64,
        },
    ];
    Ok(CostReport { items })
}
