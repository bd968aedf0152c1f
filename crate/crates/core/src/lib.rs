//! Meso-scale asymptotics for the Laplacian in domains with many small holes.
//!
//! The crate evaluates explicit asymptotic approximations for
//!
//! * the solution `u` of `-Δu = f` in `Ω_N = Ω \ ∪ F⁽ʲ⁾` with `u = 0` on `∂Ω_N`, and
//! * the Dirichlet Green's function `G_N(x, y)` of `Ω_N`,
//!
//! where the inclusions `F⁽ʲ⁾` are small balls whose number is large. Both
//! approximations are finite sums of single-inclusion model fields (capacitary
//! potentials, exterior Green's functions) coupled through an `N × N` linear
//! system built from the Green's function of the unperforated domain.
//!
//! A method-of-fundamental-solutions reference solver ([`oracle`]) computes the
//! exact perforated-domain fields to near machine precision at desk scale, and
//! the [`experiments`] harness measures the remainder rates against it.
//!
//! Module map:
//!
//! | module | contents |
//! |--------|----------|
//! | [`geometry`] | inclusion clouds, separation parameters, admissibility reports, cloud generation |
//! | [`kernels`] | Green's functions, capacities, capacitary potentials, sources, unperturbed solution |
//! | [`system`] | interaction system `(I + SD)C = -V_f`, interaction matrix, certificates |
//! | [`fields`] | asymptotic solution and Green's function |
//! | [`oracle`] | brute-force reference solver |
//! | [`experiments`] | convergence studies, energy error, reports |

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod fields;
pub mod geometry;
pub mod io;
pub mod kernels;
pub mod oracle;
pub mod system;

pub use error::{Error, Result};

/// Points and vectors in ℝ³.
pub type Vec3 = nalgebra::Vector3<f64>;

pub const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;
