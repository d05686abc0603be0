//! CSV and JSON emission.
//!
//! The trace CSV schema is fixed: one row per recorded checkpoint per run,
//! columns `experiment_id,policy,d,T,norm,seed,step,cum_regret`, rows ordered
//! by (instance, policy, seed, step). The final checkpoint of each run is the
//! per-run final regret.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

use super::{AggregateRow, BoundRow, ExperimentResults, NoiseKind};

pub const CSV_HEADER: &str = "experiment_id,policy,d,T,norm,seed,step,cum_regret";

/// Formatted trace rows for one experiment, in deterministic order.
pub fn csv_rows(results: &ExperimentResults) -> Vec<String> {
    let mut rows = Vec::new();
    for ep in &results.episodes {
        let inst = &results.instances[ep.instance];
        let policy = &results.policy_names[ep.policy];
        for &(step, cum) in &ep.checkpoints {
            rows.push(format!(
                "{},{},{},{},{},{},{},{}",
                results.config.experiment_id,
                policy,
                results.set_dim,
                results.config.horizon,
                inst.norm,
                ep.seed,
                step,
                cum
            ));
        }
    }
    rows
}

#[derive(Debug, Serialize)]
struct ExperimentSummary<'a> {
    experiment_id: &'a str,
    #[serde(rename = "T")]
    horizon: usize,
    runs: usize,
    sigma: f64,
    noise: NoiseKind,
    base_seed: u64,
    d: usize,
    centered: bool,
    instances: Vec<&'a str>,
    policies: &'a [String],
    rows: &'a [AggregateRow],
    bound_report: &'a [BoundRow],
    all_bounds_pass: bool,
}

#[derive(Debug, Serialize)]
struct SummaryDoc<'a> {
    experiments: Vec<ExperimentSummary<'a>>,
}

fn summary_doc<'a>(results: &'a [ExperimentResults]) -> SummaryDoc<'a> {
    SummaryDoc {
        experiments: results
            .iter()
            .map(|r| ExperimentSummary {
                experiment_id: &r.config.experiment_id,
                horizon: r.config.horizon,
                runs: r.config.runs,
                sigma: r.config.sigma,
                noise: r.config.noise,
                base_seed: r.config.base_seed,
                d: r.set_dim,
                centered: r.centered,
                instances: r.instances.iter().map(|i| i.label.as_str()).collect(),
                policies: &r.policy_names,
                rows: &r.rows,
                bound_report: &r.bound_report,
                all_bounds_pass: r.all_bounds_pass(),
            })
            .collect(),
    }
}

pub fn summary_json(results: &[ExperimentResults]) -> Result<String> {
    Ok(serde_json::to_string_pretty(&summary_doc(results))?)
}

/// Write `traces.csv` and `summary.json` into `dir`.
pub fn write_outputs(dir: &Path, results: &[ExperimentResults]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut csv = fs::File::create(dir.join("traces.csv"))?;
    writeln!(csv, "{CSV_HEADER}")?;
    for r in results {
        for row in csv_rows(r) {
            writeln!(csv, "{row}")?;
        }
    }
    fs::write(dir.join("summary.json"), summary_json(results)?)?;
    Ok(())
}
