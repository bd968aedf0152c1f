use serde::{Deserialize, Serialize};

use super::PotentialValue;
use crate::{Error, Result, Vec3, FOUR_PI};

/// Radial polynomial bump `A (1 − |x − c|²/ρ²)^k` supported in the ball of
/// radius `ρ` about `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    #[serde(with = "crate::io::vec3")]
    pub center: Vec3,
    pub rho: f64,
    pub amplitude: f64,
    #[serde(default = "default_exponent")]
    pub exponent: u32,
}

fn default_exponent() -> u32 {
    4
}

impl Bump {
    pub fn new(center: Vec3, rho: f64, amplitude: f64, exponent: u32) -> Result<Self> {
        let bump = Self {
            center,
            rho,
            amplitude,
            exponent,
        };
        bump.validate()?;
        Ok(bump)
    }

    fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "bump support radius must be positive, got {}",
                self.rho
            )));
        }
        if self.exponent < 2 {
            return Err(Error::InvalidInput(format!(
                "bump exponent must be at least 2 for a C¹ source, got {}",
                self.exponent
            )));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidInput("bump amplitude must be finite".into()));
        }
        Ok(())
    }

    pub fn value(&self, x: &Vec3) -> f64 {
        let s2 = (x - self.center).norm_squared() / (self.rho * self.rho);
        if s2 >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - s2).powi(self.exponent as i32)
        }
    }

    /// `(−1)^i C(k, i) / (2i + 3)` for `i = 0..=k`.
    fn moment_coefficients(&self) -> impl Iterator<Item = f64> + '_ {
        let k = self.exponent;
        let mut binom = 1.0;
        (0..=k).map(move |i| {
            let c = if i % 2 == 0 { binom } else { -binom } / (2 * i + 3) as f64;
            binom = binom * (k - i) as f64 / (i + 1) as f64;
            c
        })
    }

    /// Total mass `∫ f`.
    pub fn mass(&self) -> f64 {
        let sum: f64 = self.moment_coefficients().sum();
        FOUR_PI * self.amplitude * self.rho.powi(3) * sum
    }

    /// Newtonian potential `∫ f(y) / (4π|x − y|) dy` with its gradient, from
    /// the radial shell formula `(1/r)∫₀^r s² f + ∫_r^∞ s f`.
    pub fn newtonian(&self, x: &Vec3) -> PotentialValue {
        let offset = x - self.center;
        let r = offset.norm();
        let rho = self.rho;
        if r >= rho {
            let q = self.mass() / FOUR_PI;
            return PotentialValue {
                value: q / r,
                gradient: Some(-q * offset / (r * r * r)),
            };
        }
        let s = r / rho;
        let s2 = s * s;
        // inner(r) / r and inner(r) / r², with inner(r) = ∫₀^r t² f(t) dt.
        let mut series = 0.0;
        let mut power = s2; // s^{2i+2}
        for c in self.moment_coefficients() {
            series += c * power;
            power *= s2;
        }
        let inner_over_r = self.amplitude * rho * rho * series;
        let outer = self.amplitude * rho * rho / (2.0 * (self.exponent + 1) as f64)
            * (1.0 - s2).powi(self.exponent as i32 + 1);
        let gradient = if r > 0.0 {
            // dN/dr = −inner(r)/r²
            let inner_over_r2 = inner_over_r / r;
            -inner_over_r2 * offset / r
        } else {
            Vec3::zeros()
        };
        PotentialValue {
            value: inner_over_r + outer,
            gradient: Some(gradient),
        }
    }
}

/// Source term `f` as a sum of radial bumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SourceTerm {
    pub bumps: Vec<Bump>,
}

impl SourceTerm {
    pub fn new(bumps: Vec<Bump>) -> Result<Self> {
        let source = Self { bumps };
        source.validate()?;
        Ok(source)
    }

    pub fn single(center: Vec3, rho: f64, amplitude: f64, exponent: u32) -> Result<Self> {
        Self::new(vec![Bump::new(center, rho, amplitude, exponent)?])
    }

    pub fn validate(&self) -> Result<()> {
        self.bumps.iter().try_for_each(Bump::validate)
    }

    pub fn evaluate(&self, x: &Vec3) -> f64 {
        self.bumps.iter().map(|b| b.value(x)).sum()
    }

    pub fn newtonian_potential(&self, x: &Vec3) -> f64 {
        self.bumps.iter().map(|b| b.newtonian(x).value).sum()
    }

    pub fn newtonian_gradient(&self, x: &Vec3) -> Vec3 {
        self.bumps
            .iter()
            .map(|b| b.newtonian(x).gradient.unwrap_or_default())
            .sum()
    }

    /// Diameter of the smallest ball about the first bump centre that covers
    /// every support (an upper bound for `diam(supp f)`).
    pub fn support_diameter(&self) -> f64 {
        let Some(first) = self.bumps.first() else {
            return 0.0;
        };
        2.0 * self
            .bumps
            .iter()
            .map(|b| (b.center - first.center).norm() + b.rho)
            .fold(0.0, f64::max)
    }

    /// Upper bound for `‖f‖_∞`.
    pub fn sup_bound(&self) -> f64 {
        self.bumps.iter().map(|b| b.amplitude.abs()).sum()
    }

    /// Whether `x` lies in the closed support of some bump.
    pub fn in_support(&self, x: &Vec3) -> bool {
        self.bumps
            .iter()
            .any(|b| (x - b.center).norm() <= b.rho)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            bumps: self
                .bumps
                .iter()
                .map(|b| Bump {
                    amplitude: b.amplitude * factor,
                    ..*b
                })
                .collect(),
        }
    }
}
