//! CSV and JSON study reports.
//!
//! `rows.csv` and `summary.json` depend only on the study spec and seed.
//! Wall-clock telemetry goes to `telemetry.json`.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::study::{RowTiming, StudyResult, StudySpec};
use crate::{io, Result};

/// Column order of `rows.csv`.
pub const ROW_COLUMNS: [&str; 16] = [
    "value",
    "epsilon",
    "d",
    "n",
    "sup_error",
    "l2_error",
    "energy_error",
    "energy_std_error",
    "oracle_residual",
    "oracle_relative_residual",
    "trusted",
    "samples",
    "near_surface_samples",
    "grad_vf_max",
    "vf_max",
    "diagonal_gap_max",
];

#[derive(Serialize)]
struct Summary<'a> {
    quantity: &'a super::study::Quantity,
    sweep: &'a super::study::SweepParameter,
    rows: usize,
    fitted_slope: Option<f64>,
    slope_interval: Option<[f64; 2]>,
    fit_prefactor: Option<f64>,
    fit_points: usize,
    bound_constants: &'a std::collections::BTreeMap<String, f64>,
    excluded_rows: &'a [usize],
    monotone: Option<bool>,
    seed: u64,
    columns: &'a [&'a str],
    crate_version: &'a str,
    spec: &'a StudySpec,
}

#[derive(Serialize)]
struct Telemetry<'a> {
    rows: &'a [RowTiming],
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `rows.csv`, `summary.json` and `telemetry.json` into `dir` and
/// returns their paths.
pub fn emit_report(result: &StudyResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let rows_path = dir.join("rows.csv");
    let mut w = csv::Writer::from_path(&rows_path)?;
    w.write_record(ROW_COLUMNS)?;
    for r in &result.rows {
        w.write_record([
            r.value.to_string(),
            r.epsilon.to_string(),
            r.d.to_string(),
            r.n.to_string(),
            r.sup_error.to_string(),
            r.l2_error.to_string(),
            opt(r.energy.map(|e| e.value)),
            opt(r.energy.map(|e| e.std_error)),
            r.oracle_residual.to_string(),
            r.oracle_relative_residual.to_string(),
            r.trusted.to_string(),
            r.samples.to_string(),
            r.near_surface_samples.to_string(),
            r.grad_vf_max.to_string(),
            r.vf_max.to_string(),
            opt(r.diagonal_gap_max),
        ])?;
    }
    w.flush()?;

    let summary_path = dir.join("summary.json");
    io::write_json(
        &summary_path,
        &Summary {
            quantity: &result.spec.quantity,
            sweep: &result.spec.sweep,
            rows: result.rows.len(),
            fitted_slope: result.fit.map(|f| f.slope),
            slope_interval: result.fit.and_then(|f| f.interval),
            fit_prefactor: result.fit.map(|f| f.prefactor()),
            fit_points: result.fit.map_or(0, |f| f.points),
            bound_constants: &result.bound_constants,
            excluded_rows: &result.excluded_rows,
            monotone: result.monotone,
            seed: result.spec.seed,
            columns: &ROW_COLUMNS,
            crate_version: env!("CARGO_PKG_VERSION"),
            spec: &result.spec,
        },
    )?;
    let telemetry_path = dir.join("telemetry.json");
    io::write_json(&telemetry_path, &Telemetry { rows: &result.timings })?;
    Ok(vec![rows_path, summary_path, telemetry_path])
}
