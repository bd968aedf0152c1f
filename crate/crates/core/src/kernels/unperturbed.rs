use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::quadrature::{gauss_legendre, harmonic_count, harmonic_index, real_harmonics};
use super::SourceTerm;
use crate::geometry::AmbientDomain;
use crate::{Error, Result, Vec3};

/// Product rule on the sphere: Gauss–Legendre in `cos θ` times the
/// trapezoidal rule in `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoissonQuadrature {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for PoissonQuadrature {
    fn default() -> Self {
        Self {
            n_theta: 32,
            n_phi: 64,
        }
    }
}

impl PoissonQuadrature {
    /// Highest harmonic degree the rule resolves.
    pub fn max_degree(&self) -> usize {
        (self.n_theta - 1).min((self.n_phi - 1) / 2)
    }
}

/// Solution `v_f` of `-Δv = f` in the unperforated domain with zero
/// Dirichlet data.
///
/// In free space this is the Newtonian potential. In a ball it is the
/// Newtonian potential minus the harmonic extension of its boundary trace,
/// which is computed spectrally: the trace is projected onto real spherical
/// harmonics with the product rule and each degree-`l` component is extended
/// by `(r/R)^l`. This is the Poisson integral written in the harmonic basis,
/// and unlike direct kernel quadrature it stays accurate up to the boundary.
#[derive(Debug, Clone)]
pub struct UnperturbedSolution {
    ambient: AmbientDomain,
    source: SourceTerm,
    extension: Option<HarmonicExtension>,
}

#[derive(Debug, Clone)]
struct HarmonicExtension {
    radius: f64,
    lmax: usize,
    coefficients: Vec<f64>,
}

impl HarmonicExtension {
    fn new(radius: f64, quadrature: PoissonQuadrature, trace: impl Fn(&Vec3) -> f64) -> Self {
        let lmax = quadrature.max_degree();
        let count = harmonic_count(lmax);
        let (mu, w) = gauss_legendre(quadrature.n_theta);
        let mut coefficients = vec![0.0; count];
        let mut y = vec![0.0; count];
        let dphi = 2.0 * PI / quadrature.n_phi as f64;
        for (&m, &wm) in mu.iter().zip(&w) {
            let s = (1.0 - m * m).sqrt();
            for j in 0..quadrature.n_phi {
                let phi = j as f64 * dphi;
                let point = radius * Vec3::new(s * phi.cos(), s * phi.sin(), m);
                let g = trace(&point) * wm * dphi;
                real_harmonics(lmax, m, phi, &mut y);
                for (c, yk) in coefficients.iter_mut().zip(&y) {
                    *c += g * yk;
                }
            }
        }
        Self {
            radius,
            lmax,
            coefficients,
        }
    }

    fn evaluate(&self, x: &Vec3) -> f64 {
        let r = x.norm();
        if r == 0.0 {
            return self.coefficients[0] / (4.0 * PI).sqrt();
        }
        let cos_theta = x.z / r;
        let phi = x.y.atan2(x.x);
        let mut y = vec![0.0; harmonic_count(self.lmax)];
        real_harmonics(self.lmax, cos_theta, phi, &mut y);
        let ratio = r / self.radius;
        let mut scale = 1.0;
        let mut total = 0.0;
        for l in 0..=self.lmax {
            let li = l as isize;
            let degree: f64 = (-li..=li)
                .map(|m| {
                    let k = harmonic_index(l, m);
                    self.coefficients[k] * y[k]
                })
                .sum();
            total += scale * degree;
            scale *= ratio;
        }
        total
    }
}

impl UnperturbedSolution {
    pub fn new(ambient: AmbientDomain, source: SourceTerm) -> Self {
        Self::with_quadrature(ambient, source, PoissonQuadrature::default())
    }

    pub fn with_quadrature(
        ambient: AmbientDomain,
        source: SourceTerm,
        quadrature: PoissonQuadrature,
    ) -> Self {
        let extension = match ambient {
            AmbientDomain::FreeSpace => None,
            AmbientDomain::Ball { radius } => Some(HarmonicExtension::new(
                radius,
                quadrature,
                |p: &Vec3| source.newtonian_potential(p),
            )),
        };
        Self {
            ambient,
            source,
            extension,
        }
    }

    pub fn ambient(&self) -> &AmbientDomain {
        &self.ambient
    }

    pub fn source(&self) -> &SourceTerm {
        &self.source
    }

    pub fn value(&self, x: &Vec3) -> Result<f64> {
        if !self.ambient.contains(x) {
            return Err(Error::OutOfDomain);
        }
        let newtonian = self.source.newtonian_potential(x);
        Ok(match &self.extension {
            None => newtonian,
            Some(ext) => newtonian - ext.evaluate(x),
        })
    }

    /// Gradient of `v_f`; analytic in free space, central differences for the
    /// ball correction.
    pub fn gradient(&self, x: &Vec3) -> Result<Vec3> {
        if !self.ambient.contains(x) {
            return Err(Error::OutOfDomain);
        }
        let mut g = self.source.newtonian_gradient(x);
        if let Some(ext) = &self.extension {
            let h = 1e-6 * ext.radius;
            for axis in 0..3 {
                let mut e = Vec3::zeros();
                e[axis] = h;
                g[axis] -= (ext.evaluate(&(x + e)) - ext.evaluate(&(x - e))) / (2.0 * h);
            }
        }
        Ok(g)
    }
}
