//! The smoothness / redundancy study: sweep the AR(1) coefficient, summarize
//! consecutive-frame relevance per cell, and emit JSON + raw CSV.

use serde::Serialize;
use std::path::Path;

use crate::error::Result;
use crate::experiment::config::ExperimentConfig;
use crate::experiment::report::{write_csv, write_json};
use crate::redundancy::{redundancy_sweep, SweepCell, SweepConfig};
use crate::seeding::derive_seed;

#[derive(Debug, Clone, Serialize)]
pub struct RedundancyReport {
    pub config: ExperimentConfig,
    pub bandwidth: f64,
    pub bandwidth_fallback: bool,
    pub normalizer: f64,
    pub cells: Vec<SweepCell>,
    /// Smallest rho whose mean relevance reaches 0.5, when any does: the
    /// sweep's redundancy threshold.
    pub rho_at_half_relevance: Option<f64>,
}

#[derive(Serialize)]
struct RawRelevanceRow {
    rho: f64,
    pair_index: usize,
    relevance: f64,
}

/// Run the sweep and write `redundancy.json` and `relevances.csv`.
pub fn run_redundancy_study(config: &ExperimentConfig, out_dir: &Path) -> Result<RedundancyReport> {
    config.redundancy.validate()?;
    let sweep_config = SweepConfig {
        generator: config.redundancy.generator.clone(),
        rho_grid: config.redundancy.rho_grid.clone(),
        videos_per_cell: config.redundancy.videos_per_cell,
        seed: derive_seed(config.seed, 0xD0),
    };
    let table = redundancy_sweep(&sweep_config)?;

    let mut rows = Vec::new();
    for (cell, values) in table.cells.iter().zip(&table.raw) {
        for (pair_index, relevance) in values.iter().enumerate() {
            rows.push(RawRelevanceRow {
                rho: cell.rho,
                pair_index,
                relevance: *relevance,
            });
        }
    }
    write_csv(&out_dir.join("relevances.csv"), &rows)?;

    let rho_at_half_relevance = table
        .cells
        .iter()
        .filter(|cell| cell.mean >= 0.5)
        .map(|cell| cell.rho)
        .fold(None, |acc: Option<f64>, rho| {
            Some(acc.map_or(rho, |a| a.min(rho)))
        });
    let report = RedundancyReport {
        config: config.clone(),
        bandwidth: table.bandwidth,
        bandwidth_fallback: table.bandwidth_fallback,
        normalizer: table.normalizer,
        cells: table.cells,
        rho_at_half_relevance,
    };
    write_json(&out_dir.join("redundancy.json"), &report)?;
    Ok(report)
}
