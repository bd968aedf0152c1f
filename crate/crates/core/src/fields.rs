//! Asymptotic approximations of the perforated-domain solution `u` and
//! Green's function `G_N`.
//!
//! ```text
//! u(x)   ≈ v_f(x) + Σ_j C_j (P⁽ʲ⁾(x) − 4π cap_j H(x, O⁽ʲ⁾))
//!
//! G_N(x, y) ≈ G(x, y) − Σ_j { h⁽ʲ⁾(x, y) − P⁽ʲ⁾(y) H(x, O⁽ʲ⁾) − P⁽ʲ⁾(x) H(O⁽ʲ⁾, y)
//!                            + 4π cap_j H(x, O⁽ʲ⁾) H(O⁽ʲ⁾, y)
//!                            + H(O⁽ʲ⁾, O⁽ʲ⁾) T⁽ʲ⁾(x) T⁽ʲ⁾(y)
//!                            − Σ_i 𝒞_ij T⁽ⁱ⁾(x) T⁽ʲ⁾(y) }
//! ```
//!
//! with `T⁽ʲ⁾(y) = P⁽ʲ⁾(y) − 4π cap_j H(O⁽ʲ⁾, y)`. In free space the Green's
//! function also has the simplified form
//! `(1 − N)/(4π|x − y|) + Σ_j g⁽ʲ⁾(x, y) + Σ_{i≠j} 𝒞_ij P⁽ⁱ⁾(x) P⁽ʲ⁾(y)`,
//! which drops the diagonal of `𝒞`.
//!
//! Only the explicit sums are evaluated; remainders are never modelled.

use nalgebra::DVector;

use crate::geometry::{separation_parameters, AmbientDomain, InclusionCloud, SeparationParams};
use crate::kernels::{
    ambient_green, ambient_regular_part, capacitary_potential, capacity, exterior_green,
    exterior_regular_part, free_space_green, SourceTerm, UnperturbedSolution,
};
use crate::system::{
    assemble_system, certificates, interaction_matrix, solve_coefficients, CertificateReport,
    Coefficients, InteractionMatrix, InteractionSystem,
};
use crate::{Error, Result, Vec3, FOUR_PI};

/// Points closer than this fraction of `ε_j` to `∂F⁽ʲ⁾` are flagged.
pub const NEAR_SURFACE_FRACTION: f64 = 0.1;

/// A solved asymptotic model for one cloud, ambient domain and (optional)
/// source. Fields are private so the system and interaction matrix always
/// belong to the cloud they were built from.
#[derive(Debug, Clone)]
pub struct MesoModel {
    cloud: InclusionCloud,
    ambient: AmbientDomain,
    unperturbed: Option<UnperturbedSolution>,
    system: InteractionSystem,
    coefficients: Coefficients,
    cmat: InteractionMatrix,
    params: Option<SeparationParams>,
    capacities: Vec<f64>,
    /// `H(O⁽ʲ⁾, O⁽ʲ⁾)`.
    h_diag: Vec<f64>,
}

impl MesoModel {
    pub fn new(cloud: InclusionCloud, ambient: AmbientDomain, source: Option<SourceTerm>) -> Result<Self> {
        let unperturbed = source.map(|s| UnperturbedSolution::new(ambient, s));
        Self::build(cloud, ambient, unperturbed)
    }

    /// Builds the model around an existing unperturbed solution (useful when
    /// the ball-domain quadrature should be shared across clouds).
    pub fn with_unperturbed(cloud: InclusionCloud, unperturbed: UnperturbedSolution) -> Result<Self> {
        let ambient = *unperturbed.ambient();
        Self::build(cloud, ambient, Some(unperturbed))
    }

    fn build(
        cloud: InclusionCloud,
        ambient: AmbientDomain,
        unperturbed: Option<UnperturbedSolution>,
    ) -> Result<Self> {
        let system = assemble_system(&cloud, &ambient, unperturbed.as_ref())?;
        let params = if cloud.is_empty() {
            None
        } else {
            Some(separation_parameters(&cloud)?)
        };
        let coefficients = solve_coefficients(&system, params.as_ref())?;
        let cmat = interaction_matrix(&system)?;
        let capacities = cloud
            .inclusions
            .iter()
            .map(capacity)
            .collect::<Result<Vec<_>>>()?;
        let h_diag = cloud
            .inclusions
            .iter()
            .map(|inc| ambient_regular_part(&ambient, &inc.center, &inc.center))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cloud,
            ambient,
            unperturbed,
            system,
            coefficients,
            cmat,
            params,
            capacities,
            h_diag,
        })
    }

    pub fn cloud(&self) -> &InclusionCloud {
        &self.cloud
    }

    pub fn ambient(&self) -> &AmbientDomain {
        &self.ambient
    }

    pub fn unperturbed(&self) -> Option<&UnperturbedSolution> {
        self.unperturbed.as_ref()
    }

    pub fn system(&self) -> &InteractionSystem {
        &self.system
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    pub fn interaction_matrix(&self) -> &InteractionMatrix {
        &self.cmat
    }

    /// `None` for the empty cloud.
    pub fn params(&self) -> Option<&SeparationParams> {
        self.params.as_ref()
    }

    pub fn certificates(&self) -> Option<CertificateReport> {
        self.params
            .as_ref()
            .map(|p| certificates(&self.system, &self.coefficients, &self.cmat, p))
    }

    fn check_point(&self, x: &Vec3) -> Result<()> {
        if !self.ambient.contains(x) {
            return Err(Error::OutOfDomain);
        }
        if let Some(j) = self.cloud.containing_inclusion(x) {
            return Err(Error::InsideInclusion { index: Some(j) });
        }
        Ok(())
    }

    /// Index of an inclusion whose surface is within `0.1 ε_j` of `x`
    /// (points inside inclusions are not flagged).
    pub fn near_surface(&self, x: &Vec3) -> Option<usize> {
        self.cloud
            .inclusions
            .iter()
            .position(|inc| {
                let dist = inc.surface_distance(x);
                (0.0..NEAR_SURFACE_FRACTION * inc.diameter()).contains(&dist)
            })
    }

    fn potentials(&self, x: &Vec3) -> Result<Vec<f64>> {
        self.cloud
            .inclusions
            .iter()
            .map(|inc| capacitary_potential(inc, x))
            .collect()
    }

    fn regular_parts(&self, x: &Vec3) -> Result<Vec<f64>> {
        self.cloud
            .inclusions
            .iter()
            .map(|inc| ambient_regular_part(&self.ambient, x, &inc.center))
            .collect()
    }

    fn source_solution(&self) -> Result<&UnperturbedSolution> {
        self.unperturbed
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("model was built without a source term".into()))
    }

    /// Asymptotic approximation of `u(x)`.
    pub fn approximate_solution(&self, x: &Vec3) -> Result<f64> {
        let v = self.source_solution()?;
        self.check_point(x)?;
        let mut u = v.value(x)?;
        for (j, inc) in self.cloud.inclusions.iter().enumerate() {
            let p = capacitary_potential(inc, x)?;
            let h = ambient_regular_part(&self.ambient, x, &inc.center)?;
            u += self.coefficients.values[j] * (p - FOUR_PI * self.capacities[j] * h);
        }
        Ok(u)
    }

    /// `u − v_f`, the part of the approximation carried by the inclusions.
    pub fn correction(&self, x: &Vec3) -> Result<f64> {
        let v = self.source_solution()?;
        Ok(self.approximate_solution(x)? - v.value(x)?)
    }

    /// `T⁽ʲ⁾(y) = P⁽ʲ⁾(y) − 4π cap_j H(O⁽ʲ⁾, y)`.
    pub fn t_function(&self, j: usize, y: &Vec3) -> Result<f64> {
        let inc = self
            .cloud
            .inclusions
            .get(j)
            .ok_or_else(|| Error::InvalidInput(format!("no inclusion with index {j}")))?;
        if !self.ambient.contains(y) {
            return Err(Error::OutOfDomain);
        }
        if let Some(i) = self.cloud.containing_inclusion(y) {
            return Err(Error::InsideInclusion { index: Some(i) });
        }
        let p = capacitary_potential(inc, y)?;
        let h = ambient_regular_part(&self.ambient, &inc.center, y)?;
        Ok(p - FOUR_PI * self.capacities[j] * h)
    }

    fn t_vector(&self, p: &[f64], h: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            p.len(),
            p.iter()
                .zip(h)
                .zip(&self.capacities)
                .map(|((p, h), cap)| p - FOUR_PI * cap * h),
        )
    }

    /// Asymptotic approximation of `G_N(x, y)` in the general form.
    pub fn approximate_green(&self, x: &Vec3, y: &Vec3) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        if x == y {
            return Err(Error::SingularPoint);
        }
        let g = ambient_green(&self.ambient, x, y)?;
        let (px, py) = (self.potentials(x)?, self.potentials(y)?);
        let (hx, hy) = (self.regular_parts(x)?, self.regular_parts(y)?);
        let tx = self.t_vector(&px, &hx);
        let ty = self.t_vector(&py, &hy);
        let mut sum = 0.0;
        for (j, inc) in self.cloud.inclusions.iter().enumerate() {
            let cap = self.capacities[j];
            sum += exterior_regular_part(inc, x, y)? - py[j] * hx[j] - px[j] * hy[j]
                + FOUR_PI * cap * hx[j] * hy[j]
                + self.h_diag[j] * tx[j] * ty[j];
        }
        let coupling = tx.dot(&(&self.cmat.cmat * &ty));
        Ok(g - sum + coupling)
    }

    /// Simplified free-space form of the Green's function approximation.
    pub fn approximate_green_freespace(&self, x: &Vec3, y: &Vec3) -> Result<f64> {
        if !self.ambient.is_free_space() {
            return Err(Error::WrongAmbient);
        }
        self.check_point(x)?;
        self.check_point(y)?;
        if x == y {
            return Err(Error::SingularPoint);
        }
        let n = self.cloud.len();
        let mut value = (1.0 - n as f64) * free_space_green(x, y);
        for inc in &self.cloud.inclusions {
            value += exterior_green(inc, x, y)?;
        }
        let (px, py) = (self.potentials(x)?, self.potentials(y)?);
        let c = &self.cmat.cmat;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    value += c[(i, j)] * px[i] * py[j];
                }
            }
        }
        Ok(value)
    }

    /// `Σ_j 𝒞_jj P⁽ʲ⁾(x) P⁽ʲ⁾(y)`: the structural gap between the two Green's
    /// function formulas in free space.
    pub fn diagonal_term(&self, x: &Vec3, y: &Vec3) -> Result<f64> {
        let (px, py) = (self.potentials(x)?, self.potentials(y)?);
        Ok((0..self.cloud.len())
            .map(|j| self.cmat.cmat[(j, j)] * px[j] * py[j])
            .sum())
    }
}
