//! The interaction system `(I + SD) C = -V_f` and the interaction matrix
//! `𝒞 = (I + SD)⁻¹ S`.
//!
//! `S` holds the ambient Green's function between distinct inclusion
//! centres, `D = 4π diag(cap)`, and `V_f` samples the unperturbed solution at
//! the centres. One dense LU factorization of `I + SD` serves both the
//! coefficient solve and the interaction matrix.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, Dyn, LU};
use serde::Serialize;

use crate::geometry::{AmbientDomain, InclusionCloud, SeparationParams};
use crate::kernels::{ambient_green, capacity, UnperturbedSolution};
use crate::{io, Error, Result, FOUR_PI};

/// Factorizations whose 1-norm condition estimate exceeds this are treated
/// as singular.
pub const MAX_CONDITION: f64 = 1e14;

/// Relative residual required of every coefficient solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug)]
pub struct Factorization {
    lu: LU<f64, Dyn, Dyn>,
    pub condition_estimate: f64,
}

#[derive(Debug)]
pub struct InteractionSystem {
    /// `S_ik = G(O⁽ᵏ⁾, O⁽ⁱ⁾)` for `i ≠ k`, zero diagonal.
    pub s: DMatrix<f64>,
    pub capacities: DVector<f64>,
    /// Diagonal of `D`, i.e. `4π cap(F⁽ʲ⁾)`.
    pub d: DVector<f64>,
    /// `v_f(O⁽ʲ⁾)`; zero when assembled without a source.
    pub vf: DVector<f64>,
    factorization: OnceLock<std::result::Result<Factorization, f64>>,
}

impl Clone for InteractionSystem {
    fn clone(&self) -> Self {
        Self {
            s: self.s.clone(),
            capacities: self.capacities.clone(),
            d: self.d.clone(),
            vf: self.vf.clone(),
            factorization: OnceLock::new(),
        }
    }
}

/// Assembles `S`, `D` and `V_f`. Without an unperturbed solution `V_f = 0`,
/// which is the configuration used for the Green's function.
pub fn assemble_system(
    cloud: &InclusionCloud,
    ambient: &AmbientDomain,
    unperturbed: Option<&UnperturbedSolution>,
) -> Result<InteractionSystem> {
    let n = cloud.len();
    for (index, inc) in cloud.inclusions.iter().enumerate() {
        if !ambient.contains(&inc.center) {
            log::debug!("inclusion {index} centre outside the ambient domain");
            return Err(Error::OutOfDomain);
        }
    }
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for k in (i + 1)..n {
            let g = ambient_green(
                ambient,
                &cloud.inclusions[k].center,
                &cloud.inclusions[i].center,
            )?;
            s[(i, k)] = g;
            s[(k, i)] = g;
        }
    }
    let capacities = DVector::from_iterator(
        n,
        cloud
            .inclusions
            .iter()
            .map(capacity)
            .collect::<Result<Vec<_>>>()?,
    );
    let d = capacities.map(|c| FOUR_PI * c);
    let vf = match unperturbed {
        Some(v) => DVector::from_iterator(
            n,
            cloud
                .inclusions
                .iter()
                .map(|inc| v.value(&inc.center))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => DVector::zeros(n),
    };
    Ok(InteractionSystem {
        s,
        capacities,
        d,
        vf,
        factorization: OnceLock::new(),
    })
}

impl InteractionSystem {
    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// `I + SD`.
    pub fn operator(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut a = DMatrix::identity(n, n);
        for k in 0..n {
            for i in 0..n {
                a[(i, k)] += self.s[(i, k)] * self.d[k];
            }
        }
        a
    }

    /// LU factorization of `I + SD`, computed once.
    pub fn factorization(&self) -> Result<&Factorization> {
        let cached = self.factorization.get_or_init(|| {
            let a = self.operator();
            let norm_a = one_norm(&a);
            let lu = a.lu();
            let n = self.len();
            let inverse = lu.solve(&DMatrix::identity(n, n));
            match inverse {
                Some(inv) if inv.iter().all(|v| v.is_finite()) => {
                    let condition_estimate = norm_a * one_norm(&inv);
                    if condition_estimate > MAX_CONDITION {
                        Err(condition_estimate)
                    } else {
                        Ok(Factorization {
                            lu,
                            condition_estimate,
                        })
                    }
                }
                _ => Err(f64::INFINITY),
            }
        });
        cached
            .as_ref()
            .map_err(|&condition| Error::SingularSystem { condition })
    }

    pub fn with_source_values(&self, vf: DVector<f64>) -> Self {
        assert_eq!(vf.len(), self.len());
        Self {
            vf,
            ..self.clone()
        }
    }
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().map(f64::abs).fold(0.0, f64::max)
}

/// Solved coefficient vector with its diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct Coefficients {
    #[serde(serialize_with = "serialize_dvector")]
    pub values: DVector<f64>,
    /// `‖(I + SD)C + V_f‖_∞`.
    pub residual: f64,
    pub condition_estimate: f64,
    /// `max cap < 5d/(24π)`; when false the result lies outside the proven regime.
    pub lemma1_hypothesis: bool,
}

fn serialize_dvector<S: serde::Serializer>(v: &DVector<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter())
}

/// `C = −(I + SD)⁻¹ V_f`.
pub fn solve_coefficients(sys: &InteractionSystem, params: Option<&SeparationParams>) -> Result<Coefficients> {
    if sys.is_empty() {
        return Ok(Coefficients {
            values: DVector::zeros(0),
            residual: 0.0,
            condition_estimate: 1.0,
            lemma1_hypothesis: true,
        });
    }
    let fact = sys.factorization()?;
    let rhs = -&sys.vf;
    let values = fact
        .lu
        .solve(&rhs)
        .ok_or(Error::SingularSystem {
            condition: fact.condition_estimate,
        })?;
    let residual = max_abs((sys.operator() * &values + &sys.vf).iter().copied());
    let scale = max_abs(sys.vf.iter().copied()).max(1.0);
    if residual > RESIDUAL_TOLERANCE * scale {
        log::warn!("interaction solve residual {residual:e} above tolerance");
    }
    let lemma1_hypothesis = match params {
        Some(p) => sys.capacities.max() < 5.0 * p.d / (24.0 * PI),
        None => true,
    };
    if !lemma1_hypothesis {
        log::warn!("max capacity violates 5d/(24 pi); coefficients lie outside the proven regime");
    }
    Ok(Coefficients {
        values,
        residual,
        condition_estimate: fact.condition_estimate,
        lemma1_hypothesis,
    })
}

#[derive(Debug, Clone)]
pub struct InteractionMatrix {
    /// Symmetrized `𝒞`.
    pub cmat: DMatrix<f64>,
    /// `‖𝒞 − 𝒞ᵀ‖_max / ‖𝒞‖_max` before symmetrization.
    pub raw_asymmetry: f64,
    /// Spectral norm of the symmetrized `𝒞`.
    pub operator_norm_estimate: f64,
}

/// `𝒞 = (I + SD)⁻¹ S`, solved column by column from the cached factorization.
pub fn interaction_matrix(sys: &InteractionSystem) -> Result<InteractionMatrix> {
    let n = sys.len();
    if n == 0 {
        return Ok(InteractionMatrix {
            cmat: DMatrix::zeros(0, 0),
            raw_asymmetry: 0.0,
            operator_norm_estimate: 0.0,
        });
    }
    let fact = sys.factorization()?;
    let raw = fact.lu.solve(&sys.s).ok_or(Error::SingularSystem {
        condition: fact.condition_estimate,
    })?;
    let scale = max_abs(raw.iter().copied());
    let asym = max_abs((&raw - raw.transpose()).iter().copied());
    let raw_asymmetry = if scale > 0.0 { asym / scale } else { 0.0 };
    if raw_asymmetry > 1e-10 {
        log::warn!("interaction matrix asymmetry {raw_asymmetry:e} before symmetrization");
    } else {
        log::debug!("interaction matrix asymmetry {raw_asymmetry:e}");
    }
    let cmat = 0.5 * (&raw + raw.transpose());
    let operator_norm_estimate = cmat
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    Ok(InteractionMatrix {
        cmat,
        raw_asymmetry,
        operator_norm_estimate,
    })
}

/// Runtime checks of the coefficient and interaction-matrix estimates.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    /// `Σ cap_j C_j²`.
    pub lemma1_lhs: f64,
    /// `(1 − 24π cap_max / (5d))⁻² Σ cap_j v_f(O⁽ʲ⁾)²`, `None` when the
    /// prefactor is not positive.
    pub lemma1_rhs: Option<f64>,
    pub lemma1_applicable: bool,
    pub lemma1_holds: bool,
    /// `max_k |C_k| / max_j |v_f(O⁽ʲ⁾)|`.
    pub lemma2_ratio: f64,
    /// `‖𝒞‖ d³`.
    pub lemma3_ratio: f64,
}

pub fn certificates(
    sys: &InteractionSystem,
    coefficients: &Coefficients,
    cmat: &InteractionMatrix,
    params: &SeparationParams,
) -> CertificateReport {
    let c = &coefficients.values;
    let lemma1_lhs: f64 = sys
        .capacities
        .iter()
        .zip(c.iter())
        .map(|(cap, cj)| cap * cj * cj)
        .sum();
    let weighted_vf: f64 = sys
        .capacities
        .iter()
        .zip(sys.vf.iter())
        .map(|(cap, v)| cap * v * v)
        .sum();
    let cap_max = if sys.is_empty() { 0.0 } else { sys.capacities.max() };
    let prefactor = if params.d.is_finite() {
        1.0 - 24.0 * PI * cap_max / (5.0 * params.d)
    } else {
        1.0
    };
    let lemma1_applicable = prefactor > 0.0;
    let lemma1_rhs = lemma1_applicable.then(|| weighted_vf / (prefactor * prefactor));
    let lemma1_holds = match lemma1_rhs {
        Some(rhs) => lemma1_lhs <= rhs + 1e-12 * rhs.abs().max(f64::MIN_POSITIVE),
        None => false,
    };
    let vf_max = max_abs(sys.vf.iter().copied());
    let lemma2_ratio = if vf_max > 0.0 {
        max_abs(c.iter().copied()) / vf_max
    } else {
        0.0
    };
    let lemma3_ratio = if params.d.is_finite() {
        cmat.operator_norm_estimate * params.d.powi(3)
    } else {
        0.0
    };
    CertificateReport {
        lemma1_lhs,
        lemma1_rhs,
        lemma1_applicable,
        lemma1_holds,
        lemma2_ratio,
        lemma3_ratio,
    }
}

/// Writes `S.csv`, `D.csv`, `Vf.csv`, `C.csv` and `Cmat.csv` into `dir`.
pub fn dump_system(
    dir: &Path,
    sys: &InteractionSystem,
    coefficients: Option<&Coefficients>,
    cmat: Option<&InteractionMatrix>,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    io::write_matrix_csv(&dir.join("S.csv"), &sys.s)?;
    io::write_matrix_csv(&dir.join("D.csv"), &DMatrix::from_diagonal(&sys.d))?;
    io::write_matrix_csv(&dir.join("Vf.csv"), &DMatrix::from_column_slice(sys.len(), 1, sys.vf.as_slice()))?;
    if let Some(c) = coefficients {
        io::write_matrix_csv(
            &dir.join("C.csv"),
            &DMatrix::from_column_slice(c.values.len(), 1, c.values.as_slice()),
        )?;
    }
    if let Some(m) = cmat {
        io::write_matrix_csv(&dir.join("Cmat.csv"), &m.cmat)?;
    }
    Ok(())
}
