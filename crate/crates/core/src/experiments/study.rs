//! Convergence studies: asymptotic fields against the reference solver over
//! a sweep of one cloud parameter.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::energy::{energy_error, EnergyEstimate};
use super::fit::{fit_loglog, SlopeFit};
use super::sampling::{sample_pairs, sample_points, PairSampling, Sampling};
use crate::fields::MesoModel;
use crate::geometry::{
    generate_cloud, separation_parameters, validate_cloud, AmbientDomain, CloudSpec, InclusionCloud,
    Pattern, DEFAULT_REGIME_CONSTANT,
};
use crate::kernels::{SourceTerm, UnperturbedSolution};
use crate::oracle::{OracleBasis, OracleConfig};
use crate::{Error, Result, Vec3};

/// Oracle residual must be at most this fraction of the measured error.
pub const TRUST_RATIO: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Maximal inclusion diameter; every radius is set to `value / 2`.
    Epsilon,
    /// Half the minimal centre distance; the spacing is set to `2 · value`.
    D,
    /// Lattice points per axis (lattice patterns) or inclusion count (random).
    N,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    U,
    Green,
    Energy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySettings {
    pub mc_samples: usize,
    /// Finite-difference step as a fraction of the smallest radius.
    pub fd_step_fraction: f64,
}

impl Default for EnergySettings {
    fn default() -> Self {
        Self {
            mc_samples: 100_000,
            fd_step_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    pub sweep: SweepParameter,
    pub values: Vec<f64>,
    pub base_cloud: CloudSpec,
    #[serde(default)]
    pub ambient: AmbientDomain,
    pub source: SourceTerm,
    #[serde(default)]
    pub sample_points: Sampling,
    #[serde(default)]
    pub pairs: PairSampling,
    pub quantity: Quantity,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub energy: EnergySettings,
}

impl StudySpec {
    pub fn validate(&self) -> Result<()> {
        let increasing = self.values.windows(2).all(|w| w[0] < w[1]);
        let decreasing = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(Error::InvalidInput("sweep values must be strictly monotone".into()));
        }
        if self.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput("sweep values must be finite and non-negative".into()));
        }
        self.source.validate()?;
        self.sample_points.validate()?;
        self.oracle.validate()
    }

    /// Cloud for one sweep value.
    pub fn cloud_for(&self, value: f64) -> Result<InclusionCloud> {
        let mut spec = self.base_cloud.clone();
        match self.sweep {
            SweepParameter::Epsilon => spec.radius = 0.5 * value,
            SweepParameter::D => spec.spacing = 2.0 * value,
            SweepParameter::N => {
                let n = value.round() as usize;
                if n == 0 {
                    return Ok(InclusionCloud::empty());
                }
                match spec.pattern {
                    Pattern::Random => spec.n = n,
                    Pattern::Lattice | Pattern::JitteredLattice => spec.n_per_axis = n,
                }
            }
        }
        generate_cloud(&spec)
    }
}

/// One sweep value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub value: f64,
    pub epsilon: f64,
    pub d: f64,
    pub n: usize,
    /// Largest error over the samples (not a true supremum).
    pub sup_error: f64,
    /// Root-mean-square error over the samples.
    pub l2_error: f64,
    pub energy: Option<EnergyEstimate>,
    /// Largest absolute held-out oracle residual over all solves of the row.
    pub oracle_residual: f64,
    pub oracle_relative_residual: f64,
    pub trusted: bool,
    pub samples: usize,
    /// Samples closer than `0.1 ε_j` to a surface.
    pub near_surface_samples: usize,
    /// `max |∇v_f|` and `max |v_f|` over samples and centres (`u`, `energy`).
    pub grad_vf_max: f64,
    pub vf_max: f64,
    /// Largest `|Σ_j 𝒞_jj P⁽ʲ⁾(x) P⁽ʲ⁾(y)|` over the pairs (`green`, free space).
    pub diagonal_gap_max: Option<f64>,
}

/// Wall-clock telemetry, kept out of the bit-stable outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RowTiming {
    pub value: f64,
    pub n: usize,
    pub evaluations: usize,
    pub asymptotic_seconds: f64,
    pub oracle_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyResult {
    pub spec: StudySpec,
    pub rows: Vec<StudyRow>,
    /// Slope of the studied error against the swept value over trusted rows.
    pub fit: Option<SlopeFit>,
    /// Fitted prefactors `max error / bound` for the theorem bounds.
    pub bound_constants: BTreeMap<String, f64>,
    /// Indices of rows excluded from the fit.
    pub excluded_rows: Vec<usize>,
    /// For ε-sweeps: `sup_error` non-increasing as ε decreases, with 10% slack.
    pub monotone: Option<bool>,
    #[serde(skip)]
    pub timings: Vec<RowTiming>,
}

impl StudyResult {
    /// The error the fit is based on for this row.
    pub fn studied_error(&self, row: &StudyRow) -> f64 {
        match self.spec.quantity {
            Quantity::Energy => row.energy.map_or(f64::NAN, |e| e.value),
            Quantity::U | Quantity::Green => row.sup_error,
        }
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

fn max_abs_diffs(diffs: &[f64]) -> (f64, f64) {
    let sup = diffs.iter().map(|d| d.abs()).fold(0.0, f64::max);
    let l2 = if diffs.is_empty() {
        0.0
    } else {
        (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt()
    };
    (sup, l2)
}

fn run_row(spec: &StudySpec, value: f64, unperturbed: &UnperturbedSolution) -> Result<(StudyRow, RowTiming)> {
    let cloud = spec.cloud_for(value)?;
    let ambient = spec.ambient;
    if !cloud.is_empty() {
        let report = validate_cloud(&cloud, &ambient, DEFAULT_REGIME_CONSTANT)?;
        if !report.disjoint {
            return Err(Error::InvalidInput(format!("sweep value {value} gives overlapping inclusions")));
        }
        for w in report.warnings() {
            log::info!("sweep value {value}: {w}");
        }
    }
    let (epsilon, d) = match separation_parameters(&cloud) {
        Ok(p) => (p.epsilon, p.d),
        Err(Error::EmptyCloud) => (0.0, f64::INFINITY),
        Err(e) => return Err(e),
    };

    let start = Instant::now();
    let model = match spec.quantity {
        Quantity::Green => MesoModel::new(cloud.clone(), ambient, None)?,
        Quantity::U | Quantity::Energy => MesoModel::with_unperturbed(cloud.clone(), unperturbed.clone())?,
    };
    let mut asymptotic_seconds = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let basis = OracleBasis::new(&cloud, &ambient, spec.oracle)?;
    let mut oracle_seconds = start.elapsed().as_secs_f64();

    let mut row = StudyRow {
        value,
        epsilon,
        d,
        n: cloud.len(),
        sup_error: 0.0,
        l2_error: 0.0,
        energy: None,
        oracle_residual: 0.0,
        oracle_relative_residual: 0.0,
        trusted: true,
        samples: 0,
        near_surface_samples: 0,
        grad_vf_max: 0.0,
        vf_max: 0.0,
        diagonal_gap_max: None,
    };
    let evaluations;
    match spec.quantity {
        Quantity::U | Quantity::Energy => {
            let points = sample_points(&cloud, &ambient, &spec.sample_points, spec.seed)?;
            let start = Instant::now();
            let oracle = basis.solve_u(unperturbed)?;
            let reference: Vec<f64> = points
                .par_iter()
                .map(|x| oracle.correction(x))
                .collect::<Result<_>>()?;
            oracle_seconds += start.elapsed().as_secs_f64();
            let start = Instant::now();
            let approx: Vec<f64> = points
                .par_iter()
                .map(|x| model.correction(x))
                .collect::<Result<_>>()?;
            asymptotic_seconds += start.elapsed().as_secs_f64();
            let diffs: Vec<f64> = reference.iter().zip(&approx).map(|(r, a)| r - a).collect();
            (row.sup_error, row.l2_error) = max_abs_diffs(&diffs);
            row.samples = points.len();
            row.near_surface_samples = points.iter().filter(|x| model.near_surface(x).is_some()).count();
            row.oracle_residual = oracle.boundary_residual;
            row.oracle_relative_residual = oracle.relative_residual;
            row.trusted = oracle.trusted;
            let probes: Vec<Vec3> = points
                .iter()
                .copied()
                .chain(cloud.inclusions.iter().map(|inc| inc.center))
                .collect();
            let stats: Vec<(f64, f64)> = probes
                .par_iter()
                .map(|x| Ok((unperturbed.gradient(x)?.norm(), unperturbed.value(x)?.abs())))
                .collect::<Result<_>>()?;
            row.grad_vf_max = stats.iter().map(|s| s.0).fold(0.0, f64::max);
            row.vf_max = stats.iter().map(|s| s.1).fold(0.0, f64::max);
            evaluations = points.len();
            if spec.quantity == Quantity::Energy {
                let step = spec.energy.fd_step_fraction * cloud.min_radius();
                let step = if step.is_finite() { step } else { 1e-4 };
                let start = Instant::now();
                row.energy = Some(energy_error(&model, &oracle, spec.energy.mc_samples, step, spec.seed)?);
                oracle_seconds += start.elapsed().as_secs_f64();
            }
        }
        Quantity::Green => {
            let pairs = sample_pairs(&cloud, &ambient, &spec.pairs, spec.seed);
            let start = Instant::now();
            let solves: Vec<(f64, f64, f64)> = pairs
                .par_iter()
                .map(|(x, y)| {
                    let sol = basis.solve_green(y)?;
                    Ok((sol.value(x)?, sol.boundary_residual, sol.relative_residual))
                })
                .collect::<Result<_>>()?;
            oracle_seconds += start.elapsed().as_secs_f64();
            let start = Instant::now();
            let approx: Vec<f64> = pairs
                .par_iter()
                .map(|(x, y)| model.approximate_green(x, y))
                .collect::<Result<_>>()?;
            asymptotic_seconds += start.elapsed().as_secs_f64();
            let diffs: Vec<f64> = solves.iter().zip(&approx).map(|(s, a)| s.0 - a).collect();
            (row.sup_error, row.l2_error) = max_abs_diffs(&diffs);
            row.samples = pairs.len();
            row.near_surface_samples = pairs
                .iter()
                .filter(|(x, y)| model.near_surface(x).is_some() || model.near_surface(y).is_some())
                .count();
            row.oracle_residual = solves.iter().map(|s| s.1).fold(0.0, f64::max);
            row.oracle_relative_residual = solves.iter().map(|s| s.2).fold(0.0, f64::max);
            row.trusted = row.oracle_relative_residual <= crate::oracle::TRUST_THRESHOLD;
            if ambient.is_free_space() {
                let gaps: Vec<f64> = pairs
                    .iter()
                    .map(|(x, y)| model.diagonal_term(x, y))
                    .collect::<Result<_>>()?;
                row.diagonal_gap_max = Some(gaps.iter().map(|g| g.abs()).fold(0.0, f64::max));
            }
            evaluations = pairs.len();
        }
    }
    if !(row.oracle_residual <= TRUST_RATIO * row.sup_error) && !cloud.is_empty() {
        row.trusted = false;
    }
    let timing = RowTiming {
        value,
        n: row.n,
        evaluations,
        asymptotic_seconds,
        oracle_seconds,
    };
    Ok((row, timing))
}

/// Runs every sweep value (in parallel), then fits the log-log slope of the
/// studied error against the swept value over trusted rows.
pub fn run_study(spec: &StudySpec) -> Result<StudyResult> {
    spec.validate()?;
    let unperturbed = UnperturbedSolution::new(spec.ambient, spec.source.clone());
    let outcomes: Vec<(StudyRow, RowTiming)> = spec
        .values
        .par_iter()
        .map(|&v| run_row(spec, v, &unperturbed))
        .collect::<Result<_>>()?;
    let (rows, timings): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();

    let excluded_rows: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.trusted)
        .map(|(i, _)| i)
        .collect();
    if !rows.is_empty() && excluded_rows.len() == rows.len() && rows.iter().any(|r| r.n > 0) {
        let detail = rows
            .iter()
            .map(|r| {
                format!(
                    "value {}: residual {:e} (relative {:e}) vs error {:e}",
                    r.value, r.oracle_residual, r.oracle_relative_residual, r.sup_error
                )
            })
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::OracleUntrusted(detail));
    }

    let mut result = StudyResult {
        spec: spec.clone(),
        rows,
        fit: None,
        bound_constants: BTreeMap::new(),
        excluded_rows,
        monotone: None,
        timings,
    };
    let trusted: Vec<&StudyRow> = result.rows.iter().filter(|r| r.trusted).collect();
    let xs: Vec<f64> = trusted.iter().map(|r| r.value).collect();
    let ys: Vec<f64> = trusted.iter().map(|r| result.studied_error(r)).collect();
    result.fit = fit_loglog(&xs, &ys);
    result.bound_constants = bound_constants(&result);
    if spec.sweep == SweepParameter::Epsilon {
        let mut by_eps: Vec<&StudyRow> = trusted.clone();
        by_eps.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
        result.monotone = Some(by_eps.windows(2).all(|w| w[0].sup_error <= 1.1 * w[1].sup_error));
    }
    Ok(result)
}

/// `max over trusted rows of error / bound` for the bounds relevant to the
/// studied quantity.
fn bound_constants(result: &StudyResult) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    let mut record = |key: &str, ratio: f64| {
        if ratio.is_finite() {
            let e = out.entry(key.to_string()).or_insert(0.0f64);
            *e = e.max(ratio);
        }
    };
    let f_sup = result.spec.source.sup_bound();
    for row in result.rows.iter().filter(|r| r.trusted && r.n > 0) {
        let (eps, d) = (row.epsilon, row.d);
        let dd = if d.is_finite() { d } else { f64::INFINITY };
        match result.spec.quantity {
            Quantity::U | Quantity::Energy => {
                let thm1 = eps * row.grad_vf_max + eps * eps * dd.powf(-3.5) * row.vf_max;
                let thm2 = eps * row.grad_vf_max + eps * eps * dd.powi(-3) * row.vf_max;
                record("uniform_eps_d_7_2", row.sup_error / thm1);
                record("uniform_eps_d_3", row.sup_error / thm2);
                if let Some(e) = row.energy {
                    record("energy_eps2_d_4", e.value / (eps * eps * dd.powi(-4) * f_sup));
                }
            }
            Quantity::Green => {
                record("green_eps_d_2", row.sup_error / (eps * dd.powi(-2)));
                if let Some(gap) = row.diagonal_gap_max {
                    record("diagonal_gap_eps_d_2", gap / (eps * dd.powi(-2)));
                }
            }
        }
    }
    out
}
