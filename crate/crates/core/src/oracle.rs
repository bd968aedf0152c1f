//! Method-of-fundamental-solutions reference solver for the perforated
//! domain.
//!
//! The harmonic correction is represented as a sum of point charges on
//! proxy spheres inside every inclusion, using the ambient Green's function
//! as kernel so that the outer boundary condition holds identically. Charges
//! are fitted to the boundary trace on Fibonacci collocation points by
//! truncated-SVD least squares, and a held-out subset of collocation points
//! measures the boundary residual.
//!
//! The SVD depends only on the cloud, so an [`OracleBasis`] is factorized
//! once and reused for every right-hand side (source term, Green's function
//! pole, ...).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Dyn, SVD};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{AmbientDomain, InclusionCloud};
use crate::kernels::{ambient_green, SourceTerm, UnperturbedSolution};
use crate::{Error, Result, Vec3};

/// Relative residual above which a solution is marked untrusted.
pub const TRUST_THRESHOLD: f64 = 1e-6;

/// Singular values below this fraction of the largest are truncated.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub sources_per_inclusion: usize,
    pub collocation_per_inclusion: usize,
    /// Proxy sphere radius as a fraction of the inclusion radius.
    pub proxy_radius_factor: f64,
    /// Fraction of collocation points held out for the residual check.
    pub holdout_fraction: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            sources_per_inclusion: 128,
            collocation_per_inclusion: 256,
            proxy_radius_factor: 0.2,
            holdout_fraction: 0.2,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sources_per_inclusion == 0 {
            return Err(Error::InvalidInput("sources_per_inclusion must be positive".into()));
        }
        if (self.collocation_per_inclusion as f64) < 1.5 * self.sources_per_inclusion as f64 {
            return Err(Error::InvalidInput(format!(
                "collocation_per_inclusion {} is below 1.5 x sources_per_inclusion {}",
                self.collocation_per_inclusion, self.sources_per_inclusion
            )));
        }
        if !(self.proxy_radius_factor > 0.0 && self.proxy_radius_factor < 1.0) {
            return Err(Error::InvalidInput("proxy_radius_factor must lie in (0, 1)".into()));
        }
        if !(0.0..0.5).contains(&self.holdout_fraction) {
            return Err(Error::InvalidInput("holdout_fraction must lie in [0, 0.5)".into()));
        }
        Ok(())
    }

    /// Same configuration with the source count multiplied by `factor` and
    /// the collocation count scaled to keep the same overdetermination.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            sources_per_inclusion: self.sources_per_inclusion * factor,
            collocation_per_inclusion: self.collocation_per_inclusion * factor,
            ..*self
        }
    }
}

/// `n` nearly uniform unit vectors on a Fibonacci spiral.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Indices `0..n` split evenly into held-out points and fit points.
fn holdout_mask(n: usize, fraction: f64) -> Vec<bool> {
    (0..n)
        .map(|i| ((i + 1) as f64 * fraction).floor() > (i as f64 * fraction).floor())
        .collect()
}

/// Clouds with at most this many proxy sources are fitted with one dense
/// SVD of the full collocation matrix; larger clouds use block-Jacobi sweeps
/// over per-inclusion SVDs, which never form the full matrix.
pub const DENSE_SOURCE_LIMIT: usize = 2048;

/// Block sweeps stop once the coupling data changes by less than this
/// fraction of the boundary data.
const BLOCK_TOLERANCE: f64 = 1e-14;
const MAX_BLOCK_SWEEPS: usize = 200;

enum Solver {
    Empty,
    Dense {
        svd: SVD<f64, Dyn, Dyn>,
        holdout_matrix: DMatrix<f64>,
    },
    Blocked {
        local: Vec<SVD<f64, Dyn, Dyn>>,
    },
}

/// Factorized MFS discretization of one cloud.
pub struct OracleBasis {
    cloud: InclusionCloud,
    ambient: AmbientDomain,
    config: OracleConfig,
    sources: Arc<Vec<Vec3>>,
    fit_points: Vec<Vec3>,
    holdout_points: Vec<Vec3>,
    /// Fit points and sources per inclusion; both lists are grouped by inclusion.
    fit_per: usize,
    sources_per: usize,
    solver: Solver,
    rank: usize,
}

impl std::fmt::Debug for OracleBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OracleBasis")
            .field("inclusions", &self.cloud.len())
            .field("config", &self.config)
            .field("dense", &matches!(self.solver, Solver::Dense { .. }))
            .field("rank", &self.rank)
            .finish()
    }
}

fn kernel_matrix(ambient: &AmbientDomain, points: &[Vec3], sources: &[Vec3]) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .map(|p| sources.iter().map(|s| ambient_green(ambient, p, s)).collect())
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(points.len(), sources.len(), |i, j| rows[i][j]))
}

fn truncation(svd: &SVD<f64, Dyn, Dyn>) -> (f64, usize) {
    let eps = RANK_TOLERANCE * svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    (eps, rank)
}

fn check_rank(rank: usize, columns: usize) -> Result<()> {
    if 2 * rank < columns {
        return Err(Error::IllConditioned { rank, columns });
    }
    if rank < columns {
        log::debug!("oracle basis truncated to rank {rank} of {columns}");
    }
    Ok(())
}

fn lstsq(svd: &SVD<f64, Dyn, Dyn>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let (eps, _) = truncation(svd);
    svd.solve(b, eps)
        .map_err(|e| Error::InvalidInput(format!("oracle least squares failed: {e}")))
}

impl OracleBasis {
    pub fn new(cloud: &InclusionCloud, ambient: &AmbientDomain, config: OracleConfig) -> Result<Self> {
        config.validate()?;
        let source_dirs = fibonacci_sphere(config.sources_per_inclusion);
        let colloc_dirs = fibonacci_sphere(config.collocation_per_inclusion);
        let mask = holdout_mask(config.collocation_per_inclusion, config.holdout_fraction);
        let mut sources = Vec::new();
        let mut fit_points = Vec::new();
        let mut holdout_points = Vec::new();
        for inc in &cloud.inclusions {
            if !ambient.contains(&inc.center) {
                return Err(Error::OutOfDomain);
            }
            let rho = config.proxy_radius_factor * inc.radius;
            sources.extend(source_dirs.iter().map(|e| inc.center + rho * e));
            for (e, &held) in colloc_dirs.iter().zip(&mask) {
                let p = inc.center + inc.radius * e;
                if held {
                    holdout_points.push(p);
                } else {
                    fit_points.push(p);
                }
            }
        }
        let fit_per = mask.iter().filter(|&&h| !h).count();
        let sources_per = config.sources_per_inclusion;
        let (solver, rank) = if sources.is_empty() {
            (Solver::Empty, 0)
        } else if sources.len() <= DENSE_SOURCE_LIMIT {
            let svd = kernel_matrix(ambient, &fit_points, &sources)?.svd(true, true);
            let (_, rank) = truncation(&svd);
            check_rank(rank, sources.len())?;
            let holdout_matrix = kernel_matrix(ambient, &holdout_points, &sources)?;
            (Solver::Dense { svd, holdout_matrix }, rank)
        } else {
            let local: Vec<SVD<f64, Dyn, Dyn>> = (0..cloud.len())
                .into_par_iter()
                .map(|i| {
                    let pts = &fit_points[i * fit_per..(i + 1) * fit_per];
                    let src = &sources[i * sources_per..(i + 1) * sources_per];
                    Ok(kernel_matrix(ambient, pts, src)?.svd(true, true))
                })
                .collect::<Result<_>>()?;
            let mut rank = 0;
            for svd in &local {
                let (_, r) = truncation(svd);
                check_rank(r, sources_per)?;
                rank += r;
            }
            (Solver::Blocked { local }, rank)
        };
        Ok(Self {
            cloud: cloud.clone(),
            ambient: *ambient,
            config,
            sources: Arc::new(sources),
            fit_points,
            holdout_points,
            fit_per,
            sources_per,
            solver,
            rank,
        })
    }

    pub fn cloud(&self) -> &InclusionCloud {
        &self.cloud
    }

    pub fn ambient(&self) -> &AmbientDomain {
        &self.ambient
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    /// Numerical rank retained by the truncated SVD(s).
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Whether the fit uses one dense factorization of the whole cloud.
    pub fn is_dense(&self) -> bool {
        matches!(self.solver, Solver::Dense { .. })
    }

    /// All collocation points (fit and held-out).
    pub fn collocation_points(&self) -> impl Iterator<Item = &Vec3> {
        self.fit_points.iter().chain(&self.holdout_points)
    }

    /// Field of the charges `q` (grouped like the sources) at `p`, skipping
    /// the sources of inclusion `skip`.
    fn field_of(&self, q: &[f64], p: &Vec3, skip: Option<usize>) -> Result<f64> {
        let mut acc = 0.0;
        for (j, (charges, sources)) in q
            .chunks(self.sources_per)
            .zip(self.sources.chunks(self.sources_per))
            .enumerate()
        {
            if Some(j) == skip {
                continue;
            }
            for (c, s) in charges.iter().zip(sources) {
                acc += c * ambient_green(&self.ambient, p, s)?;
            }
        }
        Ok(acc)
    }

    /// Block-Jacobi least squares: every inclusion fits its own data minus
    /// the field of all other inclusions' current charges.
    fn solve_blocked(&self, local: &[SVD<f64, Dyn, Dyn>], b: &DVector<f64>, scale: f64) -> Result<DVector<f64>> {
        let n = self.cloud.len();
        let m = self.fit_per;
        let mut q: Vec<f64> = vec![0.0; self.sources.len()];
        let mut coupling = vec![0.0; b.len()];
        let mut previous_change = f64::INFINITY;
        for sweep in 0..MAX_BLOCK_SWEEPS {
            let blocks: Vec<DVector<f64>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let rhs = DVector::from_iterator(m, (0..m).map(|k| b[i * m + k] - coupling[i * m + k]));
                    lstsq(&local[i], &rhs)
                })
                .collect::<Result<_>>()?;
            for (i, block) in blocks.iter().enumerate() {
                q[i * self.sources_per..(i + 1) * self.sources_per].copy_from_slice(block.as_slice());
            }
            let new_coupling: Vec<f64> = (0..b.len())
                .into_par_iter()
                .map(|k| self.field_of(&q, &self.fit_points[k], Some(k / m)))
                .collect::<Result<_>>()?;
            let change = new_coupling
                .iter()
                .zip(&coupling)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                / scale.max(f64::MIN_POSITIVE);
            coupling = new_coupling;
            if change <= BLOCK_TOLERANCE || (change >= previous_change && change < 1e-10) {
                log::debug!("block iteration converged after {} sweeps (change {change:e})", sweep + 1);
                // One more local solve so the charges match the final coupling.
                let blocks: Vec<DVector<f64>> = (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let rhs = DVector::from_iterator(m, (0..m).map(|k| b[i * m + k] - coupling[i * m + k]));
                        lstsq(&local[i], &rhs)
                    })
                    .collect::<Result<_>>()?;
                for (i, block) in blocks.iter().enumerate() {
                    q[i * self.sources_per..(i + 1) * self.sources_per].copy_from_slice(block.as_slice());
                }
                return Ok(DVector::from_vec(q));
            }
            previous_change = change;
        }
        Err(Error::NotConverged {
            iterations: MAX_BLOCK_SWEEPS,
            change: previous_change,
        })
    }

    /// Fits charges so that `correction + fixed charges = trace` on the
    /// inclusion surfaces.
    fn fit(&self, trace: &(dyn Fn(&Vec3) -> Result<f64> + Sync), fixed: Vec<(Vec3, f64)>, base: Base) -> Result<OracleSolution> {
        let fixed_at = |p: &Vec3| -> Result<f64> {
            fixed
                .iter()
                .map(|(s, q)| Ok(q * ambient_green(&self.ambient, p, s)?))
                .sum()
        };
        let target = |points: &[Vec3]| -> Result<(DVector<f64>, f64)> {
            let pairs: Vec<(f64, f64)> = points
                .par_iter()
                .map(|p| Ok((trace(p)?, fixed_at(p)?)))
                .collect::<Result<_>>()?;
            let scale = pairs.iter().map(|(t, _)| t.abs()).fold(0.0, f64::max);
            Ok((DVector::from_iterator(points.len(), pairs.iter().map(|(t, f)| t - f)), scale))
        };
        let (b_fit, scale_fit) = target(&self.fit_points)?;
        let (b_hold, scale_hold) = target(&self.holdout_points)?;
        let data_scale = scale_fit.max(scale_hold);
        let (charges, held_field) = match &self.solver {
            Solver::Empty => (DVector::zeros(0), DVector::zeros(0)),
            Solver::Dense { svd, holdout_matrix } => {
                let q = lstsq(svd, &b_fit)?;
                let h = holdout_matrix * &q;
                (q, h)
            }
            Solver::Blocked { local } => {
                let q = self.solve_blocked(local, &b_fit, data_scale)?;
                let h: Vec<f64> = self
                    .holdout_points
                    .par_iter()
                    .map(|p| self.field_of(q.as_slice(), p, None))
                    .collect::<Result<_>>()?;
                (q, DVector::from_vec(h))
            }
        };
        let boundary_residual = if self.holdout_points.is_empty() {
            0.0
        } else {
            (&held_field - &b_hold).amax()
        };
        let relative_residual = if data_scale > 0.0 {
            boundary_residual / data_scale
        } else {
            boundary_residual
        };
        let trusted = relative_residual <= TRUST_THRESHOLD;
        if !trusted {
            log::warn!("oracle residual {relative_residual:e} (relative) exceeds trust threshold");
        }
        Ok(OracleSolution {
            charges: charges.iter().copied().collect(),
            sources: Arc::clone(&self.sources),
            fixed,
            boundary_residual,
            relative_residual,
            data_scale,
            trusted,
            config: self.config,
            ambient: self.ambient,
            base,
        })
    }

    /// Harmonic field in `Ω_N` (vanishing on `∂Ω`) equal to `trace` on the
    /// inclusion surfaces.
    pub fn solve(&self, trace: &(dyn Fn(&Vec3) -> Result<f64> + Sync)) -> Result<OracleSolution> {
        self.fit(trace, Vec::new(), Base::None)
    }

    /// Reference solution `u = v_f + correction` with correction `= −v_f` on
    /// the inclusions.
    pub fn solve_u(&self, unperturbed: &UnperturbedSolution) -> Result<OracleSolution> {
        if unperturbed.ambient() != &self.ambient {
            return Err(Error::WrongAmbient);
        }
        let trace = |p: &Vec3| Ok(-unperturbed.value(p)?);
        self.fit(&trace, Vec::new(), Base::Unperturbed(Box::new(unperturbed.clone())))
    }

    /// Reference Green's function `G_N(·, y) = G(·, y) + correction`.
    ///
    /// Each inclusion additionally carries the Kelvin image of the pole, a
    /// fixed charge that cancels the near-singular part of the boundary data
    /// when `y` approaches an inclusion.
    pub fn solve_green(&self, y: &Vec3) -> Result<OracleSolution> {
        if !self.ambient.contains(y) {
            return Err(Error::OutOfDomain);
        }
        if let Some(j) = self.cloud.containing_inclusion(y) {
            return Err(Error::InsideInclusion { index: Some(j) });
        }
        let base = Base::Green(*y);
        if self.cloud.inclusions.iter().any(|inc| inc.surface_distance(y) <= 1e-12 * inc.radius) {
            // The pole sits on a Dirichlet boundary: G_N(·, y) vanishes.
            return Ok(OracleSolution::zero(self, Base::Zero));
        }
        let fixed = self
            .cloud
            .inclusions
            .iter()
            .map(|inc| {
                let r = y - inc.center;
                let dist = r.norm();
                let a = inc.radius;
                (inc.center + (a * a / (dist * dist)) * r, -a / dist)
            })
            .collect();
        let ambient = self.ambient;
        let trace = move |p: &Vec3| Ok(-ambient_green(&ambient, p, y)?);
        self.fit(&trace, fixed, base)
    }
}

/// Non-harmonic part of the reference field.
#[derive(Debug, Clone)]
enum Base {
    None,
    Zero,
    Unperturbed(Box<UnperturbedSolution>),
    Green(Vec3),
}

/// A fitted reference field.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub charges: Vec<f64>,
    pub sources: Arc<Vec<Vec3>>,
    /// Fixed image charges `(location, strength)` added to the fitted ones.
    pub fixed: Vec<(Vec3, f64)>,
    /// Sup-norm residual on the held-out collocation points.
    pub boundary_residual: f64,
    /// `boundary_residual` divided by the sup norm of the boundary data.
    pub relative_residual: f64,
    pub data_scale: f64,
    pub trusted: bool,
    pub config: OracleConfig,
    ambient: AmbientDomain,
    base: Base,
}

impl OracleSolution {
    fn zero(basis: &OracleBasis, base: Base) -> Self {
        Self {
            charges: vec![0.0; basis.sources.len()],
            sources: Arc::clone(&basis.sources),
            fixed: Vec::new(),
            boundary_residual: 0.0,
            relative_residual: 0.0,
            data_scale: 0.0,
            trusted: true,
            config: basis.config,
            ambient: basis.ambient,
            base,
        }
    }

    /// Harmonic correction field at `x`.
    pub fn correction(&self, x: &Vec3) -> Result<f64> {
        if matches!(self.base, Base::Zero) {
            return Ok(0.0);
        }
        let mut value = 0.0;
        for (q, s) in self.charges.iter().zip(self.sources.iter()) {
            value += q * ambient_green(&self.ambient, x, s)?;
        }
        for (s, q) in &self.fixed {
            value += q * ambient_green(&self.ambient, x, s)?;
        }
        Ok(value)
    }

    /// Full reference field at `x`: base field plus correction.
    pub fn value(&self, x: &Vec3) -> Result<f64> {
        let base = match &self.base {
            Base::None | Base::Zero => 0.0,
            Base::Unperturbed(v) => v.value(x)?,
            Base::Green(y) => ambient_green(&self.ambient, x, y)?,
        };
        Ok(base + self.correction(x)?)
    }
}

/// One-shot harmonic solve for an arbitrary boundary trace.
pub fn oracle_solve(
    cloud: &InclusionCloud,
    ambient: &AmbientDomain,
    boundary_trace: &(dyn Fn(&Vec3) -> Result<f64> + Sync),
    config: OracleConfig,
) -> Result<OracleSolution> {
    OracleBasis::new(cloud, ambient, config)?.solve(boundary_trace)
}

/// Reference `u(x)` for `−Δu = f` in `Ω_N`.
pub fn oracle_u(
    cloud: &InclusionCloud,
    ambient: &AmbientDomain,
    f: &SourceTerm,
    x: &Vec3,
    config: OracleConfig,
) -> Result<f64> {
    let v = UnperturbedSolution::new(*ambient, f.clone());
    OracleBasis::new(cloud, ambient, config)?.solve_u(&v)?.value(x)
}

/// Reference `G_N(x, y)`.
pub fn oracle_green(
    cloud: &InclusionCloud,
    ambient: &AmbientDomain,
    x: &Vec3,
    y: &Vec3,
    config: OracleConfig,
) -> Result<f64> {
    if x == y {
        return Err(Error::SingularPoint);
    }
    OracleBasis::new(cloud, ambient, config)?.solve_green(y)?.value(x)
}
