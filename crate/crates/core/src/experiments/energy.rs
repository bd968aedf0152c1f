//! Monte Carlo estimate of the Dirichlet energy of the remainder.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::sampling::{stream_rng, Stream};
use crate::fields::MesoModel;
use crate::geometry::{AmbientDomain, InclusionCloud};
use crate::oracle::OracleSolution;
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyEstimate {
    /// `(∫ |∇(a − b)|²)^{1/2}` over `Ω_N ∩ ω'`.
    pub value: f64,
    /// Standard error of `value` (delta method).
    pub std_error: f64,
    pub samples: usize,
    /// Samples whose difference stencil lies in `Ω_N`.
    pub accepted: usize,
    pub box_volume: f64,
}

/// Energy norm of `a − b` over the bounding cube `ω'` of `ω`, restricted to
/// `Ω_N`. Gradients use central differences with step `fd_step`; points
/// whose stencil would leave `Ω_N` contribute zero.
pub fn energy_norm_of_difference(
    cloud: &InclusionCloud,
    ambient: &AmbientDomain,
    a: &(dyn Fn(&Vec3) -> Result<f64> + Sync),
    b: &(dyn Fn(&Vec3) -> Result<f64> + Sync),
    mc_samples: usize,
    fd_step: f64,
    seed: u64,
) -> Result<EnergyEstimate> {
    if !(fd_step > 0.0) {
        return Err(Error::InvalidInput("fd_step must be positive".into()));
    }
    if !cloud.is_empty() {
        let limit = 0.5 * cloud.min_radius();
        if fd_step >= limit {
            return Err(Error::StepTooLarge { step: fd_step, limit });
        }
    }
    if mc_samples == 0 {
        return Err(Error::InvalidInput("mc_samples must be positive".into()));
    }
    let r = cloud.omega.radius();
    let box_volume = (2.0 * r).powi(3);
    let mut rng = stream_rng(seed, Stream::MonteCarlo);
    let points: Vec<Vec3> = (0..mc_samples)
        .map(|_| {
            cloud.omega.center
                + Vec3::new(
                    rng.random_range(-r..=r),
                    rng.random_range(-r..=r),
                    rng.random_range(-r..=r),
                )
        })
        .collect();
    let inside = |x: &Vec3| {
        ambient.contains(x)
            && cloud
                .inclusions
                .iter()
                .all(|inc| inc.surface_distance(x) > fd_step)
    };
    let diff = |x: &Vec3| -> Result<f64> { Ok(a(x)? - b(x)?) };
    let integrand: Vec<Option<f64>> = points
        .par_iter()
        .map(|x| {
            let stencil_ok = inside(x)
                && (0..3).all(|k| {
                    let mut e = Vec3::zeros();
                    e[k] = fd_step;
                    ambient.contains(&(x + e)) && ambient.contains(&(x - e))
                });
            if !stencil_ok {
                return Ok(None);
            }
            Ok(Some(gradient_squared(&diff, x, fd_step)?))
        })
        .collect::<Result<_>>()?;
    let accepted = integrand.iter().filter(|v| v.is_some()).count();
    let n = mc_samples as f64;
    let values = integrand.iter().map(|v| v.unwrap_or(0.0));
    let values: Vec<f64> = values.collect();
    let (mean, var) = mean_and_variance(&values);
    let integral = box_volume * mean;
    let integral_se = box_volume * (var / n).sqrt();
    let value = integral.max(0.0).sqrt();
    let std_error = if value > 0.0 {
        integral_se / (2.0 * value)
    } else {
        integral_se.sqrt()
    };
    Ok(EnergyEstimate {
        value,
        std_error,
        samples: mc_samples,
        accepted,
        box_volume,
    })
}

fn gradient_squared(
    diff: &(dyn Fn(&Vec3) -> Result<f64> + Sync),
    x: &Vec3,
    fd_step: f64,
) -> Result<f64> {
    let mut g2 = 0.0;
    for k in 0..3 {
        let mut e = Vec3::zeros();
        e[k] = fd_step;
        let g = (diff(&(x + e))? - diff(&(x - e))?) / (2.0 * fd_step);
        g2 += g * g;
    }
    Ok(g2)
}

/// Stratified variant of [`energy_norm_of_difference`]: the shells
/// `a_j < |x − O⁽ʲ⁾| < shell_outer · a_j` are integrated separately with
/// `shell_samples` points each, drawn with radial density `∝ r⁻²`, and the
/// rest of `ω'` with `bulk_samples` uniform points. Gradients of remainders
/// concentrate within a few radii of the inclusions, where uniform sampling
/// of `ω'` almost never lands.
#[allow(clippy::too_many_arguments)]
pub fn energy_norm_stratified(
    cloud: &InclusionCloud,
    ambient: &AmbientDomain,
    a: &(dyn Fn(&Vec3) -> Result<f64> + Sync),
    b: &(dyn Fn(&Vec3) -> Result<f64> + Sync),
    shell_samples: usize,
    shell_outer: f64,
    bulk_samples: usize,
    fd_step: f64,
    seed: u64,
) -> Result<EnergyEstimate> {
    if !(shell_outer > 1.0) || shell_samples == 0 || bulk_samples == 0 {
        return Err(Error::InvalidInput("need shell_outer > 1 and positive sample counts".into()));
    }
    if !cloud.is_empty() {
        let limit = 0.5 * cloud.min_radius();
        if !(fd_step > 0.0) || fd_step >= limit {
            return Err(Error::StepTooLarge { step: fd_step, limit });
        }
        for (i, p) in cloud.inclusions.iter().enumerate() {
            for q in &cloud.inclusions[i + 1..] {
                if shell_outer * (p.radius + q.radius) >= (p.center - q.center).norm() {
                    return Err(Error::InvalidInput("integration shells overlap".into()));
                }
            }
        }
    }
    let diff = |x: &Vec3| -> Result<f64> { Ok(a(x)? - b(x)?) };
    let mut rng = stream_rng(seed, Stream::MonteCarlo);
    let mut shell_points = Vec::with_capacity(cloud.len() * shell_samples);
    for inc in &cloud.inclusions {
        let (lo, hi) = (inc.radius + fd_step, shell_outer * inc.radius);
        for _ in 0..shell_samples {
            let s = 1.0 / hi + (1.0 / lo - 1.0 / hi) * rng.random::<f64>();
            let r = 1.0 / s;
            let dir = super::sampling::random_direction(&mut rng);
            // Weight = |shell| / density for density ∝ r⁻² in r, uniform in direction.
            let weight = 4.0 * std::f64::consts::PI * r.powi(4) * (1.0 / lo - 1.0 / hi);
            shell_points.push((inc.center + r * dir, weight));
        }
    }
    let radius = cloud.omega.radius();
    let box_volume = (2.0 * radius).powi(3);
    let bulk_points: Vec<Vec3> = (0..bulk_samples)
        .map(|_| {
            cloud.omega.center
                + Vec3::new(
                    rng.random_range(-radius..=radius),
                    rng.random_range(-radius..=radius),
                    rng.random_range(-radius..=radius),
                )
        })
        .collect();
    let stencil_in_ambient = |x: &Vec3| {
        (0..3).all(|k| {
            let mut e = Vec3::zeros();
            e[k] = fd_step;
            ambient.contains(&(x + e)) && ambient.contains(&(x - e))
        })
    };
    let shell_values: Vec<f64> = shell_points
        .par_iter()
        .map(|(x, w)| {
            if stencil_in_ambient(x) {
                Ok(w * gradient_squared(&diff, x, fd_step)?)
            } else {
                Ok(0.0)
            }
        })
        .collect::<Result<_>>()?;
    let bulk_values: Vec<f64> = bulk_points
        .par_iter()
        .map(|x| {
            let outside_shells = cloud
                .inclusions
                .iter()
                .all(|inc| (x - inc.center).norm() >= shell_outer * inc.radius);
            if outside_shells && stencil_in_ambient(x) {
                Ok(box_volume * gradient_squared(&diff, x, fd_step)?)
            } else {
                Ok(0.0)
            }
        })
        .collect::<Result<_>>()?;
    let (mut integral, mut variance) = (0.0, 0.0);
    let mut accepted = 0;
    for chunk in shell_values.chunks(shell_samples).chain(std::iter::once(&bulk_values[..])) {
        let (mean, var) = mean_and_variance(chunk);
        integral += mean;
        variance += var / chunk.len() as f64;
        accepted += chunk.iter().filter(|v| **v != 0.0).count();
    }
    let value = integral.max(0.0).sqrt();
    let se = variance.sqrt();
    Ok(EnergyEstimate {
        value,
        std_error: if value > 0.0 { se / (2.0 * value) } else { se.sqrt() },
        samples: shell_values.len() + bulk_values.len(),
        accepted,
        box_volume,
    })
}

fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Energy norm of `u_oracle − u_asym`. Both fields share `v_f`, so the
/// difference is taken between their inclusion-induced parts to avoid
/// cancellation.
pub fn energy_error(
    model: &MesoModel,
    oracle: &OracleSolution,
    mc_samples: usize,
    fd_step: f64,
    seed: u64,
) -> Result<EnergyEstimate> {
    model.unperturbed().ok_or_else(|| {
        Error::InvalidInput("energy error needs a model built with a source term".into())
    })?;
    energy_norm_of_difference(
        model.cloud(),
        model.ambient(),
        &|x| oracle.correction(x),
        &|x| model.correction(x),
        mc_samples,
        fd_step,
        seed,
    )
}
