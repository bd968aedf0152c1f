//! Analytic building blocks of the asymptotic formulas.
//!
//! Everything here is exact for the supported shapes (balls) and ambient
//! domains (free space, ball): the only approximation left in
//! [`crate::fields`] is the asymptotic remainder itself, plus the spectral
//! quadrature used for the ball-domain unperturbed solution.

mod green;
pub mod quadrature;
mod source;
mod unperturbed;

pub use green::{
    ambient_green, ambient_regular_part, capacitary_potential, capacity, exterior_green,
    exterior_regular_part, free_space_green,
};
pub use source::{Bump, SourceTerm};
pub use unperturbed::{PoissonQuadrature, UnperturbedSolution};

use crate::Vec3;

/// A scalar potential value with an optional analytic gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialValue {
    pub value: f64,
    pub gradient: Option<Vec3>,
}
