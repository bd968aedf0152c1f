//! Inclusion clouds, the enclosing set ω, and the admissibility checks that
//! decide which of the asymptotic estimates apply to a given configuration.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

/// Default value of the "sufficiently small absolute constant" used by the
/// regime checks.
pub const DEFAULT_REGIME_CONSTANT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    #[default]
    Ball,
}

/// A small inclusion `F⁽ʲ⁾` with its reference point `O⁽ʲ⁾`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inclusion {
    pub center: Vec3,
    pub radius: f64,
    pub shape: ShapeKind,
}

impl Inclusion {
    pub fn ball(center: Vec3, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "inclusion radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            center,
            radius,
            shape: ShapeKind::Ball,
        })
    }

    /// Diameter `ε_j`.
    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    /// Signed distance from `x` to the inclusion surface (negative inside).
    pub fn surface_distance(&self, x: &Vec3) -> f64 {
        (x - self.center).norm() - self.radius
    }
}

/// The open set ω that contains every inclusion, modelled as a ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Omega {
    pub center: Vec3,
    pub diameter: f64,
}

impl Omega {
    pub fn radius(&self) -> f64 {
        0.5 * self.diameter
    }
}

/// The unperforated domain Ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmbientDomain {
    #[default]
    FreeSpace,
    /// Ball of the given radius centred at the origin.
    Ball { radius: f64 },
}

impl AmbientDomain {
    pub fn is_free_space(&self) -> bool {
        matches!(self, AmbientDomain::FreeSpace)
    }

    /// Whether `x` lies in the closure of Ω (with a relative tolerance on the
    /// outer sphere).
    pub fn contains(&self, x: &Vec3) -> bool {
        match *self {
            AmbientDomain::FreeSpace => true,
            AmbientDomain::Ball { radius } => x.norm() <= radius * (1.0 + 1e-12),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InclusionCloud {
    pub inclusions: Vec<Inclusion>,
    pub omega: Omega,
}

impl InclusionCloud {
    /// Builds a cloud with the default ω: the bounding ball of the
    /// inclusions inflated by `2d` (by `2ε` when `N = 1`).
    pub fn new(inclusions: Vec<Inclusion>) -> Self {
        let omega = default_omega(&inclusions);
        Self { inclusions, omega }
    }

    pub fn with_omega(inclusions: Vec<Inclusion>, omega: Omega) -> Self {
        Self { inclusions, omega }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.inclusions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inclusions.is_empty()
    }

    pub fn max_capacity(&self) -> f64 {
        self.inclusions
            .iter()
            .map(|inc| inc.radius)
            .fold(0.0, f64::max)
    }

    pub fn min_radius(&self) -> f64 {
        self.inclusions
            .iter()
            .map(|inc| inc.radius)
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the first inclusion whose open interior contains `x`.
    pub fn containing_inclusion(&self, x: &Vec3) -> Option<usize> {
        self.inclusions
            .iter()
            .position(|inc| (x - inc.center).norm() < inc.radius * (1.0 - 1e-12))
    }

    /// Smallest relative surface distance `dist(x, ∂F⁽ʲ⁾) / ε_j` over all inclusions.
    pub fn min_relative_surface_distance(&self, x: &Vec3) -> f64 {
        self.inclusions
            .iter()
            .map(|inc| inc.surface_distance(x) / inc.diameter())
            .fold(f64::INFINITY, f64::min)
    }

    /// Same cloud with every radius multiplied by `factor` and centres kept.
    pub fn with_scaled_radii(&self, factor: f64) -> Self {
        let inclusions = self
            .inclusions
            .iter()
            .map(|inc| Inclusion {
                radius: inc.radius * factor,
                ..*inc
            })
            .collect();
        Self {
            inclusions,
            omega: self.omega,
        }
    }
}

fn bounding_ball(inclusions: &[Inclusion]) -> (Vec3, f64) {
    if inclusions.is_empty() {
        return (Vec3::zeros(), 0.0);
    }
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for inc in inclusions {
        let r = Vec3::repeat(inc.radius);
        lo = lo.inf(&(inc.center - r));
        hi = hi.sup(&(inc.center + r));
    }
    let center = 0.5 * (lo + hi);
    let radius = inclusions
        .iter()
        .map(|inc| (inc.center - center).norm() + inc.radius)
        .fold(0.0, f64::max);
    (center, radius)
}

fn default_omega(inclusions: &[Inclusion]) -> Omega {
    if inclusions.is_empty() {
        return Omega {
            center: Vec3::zeros(),
            diameter: 1.0,
        };
    }
    let (center, radius) = bounding_ball(inclusions);
    let params = separation_parameters_unchecked(inclusions);
    let margin = if params.d.is_finite() {
        2.0 * params.d
    } else {
        2.0 * params.epsilon
    };
    Omega {
        center,
        diameter: 2.0 * (radius + margin),
    }
}

/// `ε` (largest diameter), `d` (half the smallest centre distance) and `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationParams {
    pub epsilon: f64,
    /// `+∞` when the cloud has a single inclusion.
    pub d: f64,
    pub n: usize,
}

fn separation_parameters_unchecked(inclusions: &[Inclusion]) -> SeparationParams {
    let epsilon = inclusions
        .iter()
        .map(Inclusion::diameter)
        .fold(0.0, f64::max);
    let mut min_dist = f64::INFINITY;
    for (i, a) in inclusions.iter().enumerate() {
        for b in &inclusions[i + 1..] {
            min_dist = min_dist.min((a.center - b.center).norm());
        }
    }
    SeparationParams {
        epsilon,
        d: 0.5 * min_dist,
        n: inclusions.len(),
    }
}

pub fn separation_parameters(cloud: &InclusionCloud) -> Result<SeparationParams> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(separation_parameters_unchecked(&cloud.inclusions))
}

/// Admissibility report. Never an error: regime failures are advisory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    pub epsilon: f64,
    pub d: f64,
    pub disjoint: bool,
    /// Every inclusion lies strictly inside ω.
    pub omega_containment: bool,
    /// The inclusions keep a distance of at least `2d` from `∂ω`.
    pub omega_margin_ok: bool,
    /// ω keeps a distance of at least `2d` from `∂Ω`.
    pub clearance_ok: bool,
    pub omega_diameter: f64,
    /// ω has the unit diameter normalization (reported, never enforced).
    pub unit_diameter: bool,
    pub max_capacity: f64,
    /// `5d / (24π)`.
    pub lemma1_threshold: f64,
    pub lemma1_ok: bool,
    /// `lemma1_threshold - max_capacity`.
    pub lemma1_slack: f64,
    /// `ε < c d^{7/4}`.
    pub regime_thm1: bool,
    /// `ε < c d²`.
    pub regime_thm3: bool,
    pub c_used: f64,
}

impl ValidationReport {
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.disjoint {
            out.push("inclusions overlap".to_string());
        }
        if !self.omega_containment {
            out.push("an inclusion is not contained in omega".to_string());
        }
        if !self.omega_margin_ok {
            out.push("inclusions closer than 2d to the boundary of omega".to_string());
        }
        if !self.clearance_ok {
            out.push("omega closer than 2d to the ambient boundary".to_string());
        }
        if !self.unit_diameter {
            out.push(format!(
                "omega has diameter {} rather than 1",
                self.omega_diameter
            ));
        }
        if !self.lemma1_ok {
            out.push(format!(
                "max capacity {} is not below 5d/(24 pi) = {}",
                self.max_capacity, self.lemma1_threshold
            ));
        }
        if !self.regime_thm1 {
            out.push("epsilon >= c d^(7/4): uniform estimate not proven".to_string());
        }
        if !self.regime_thm3 {
            out.push("epsilon >= c d^2: energy and Green's function estimates not proven".to_string());
        }
        out
    }
}

pub fn validate_cloud(
    cloud: &InclusionCloud,
    ambient: &AmbientDomain,
    c: f64,
) -> Result<ValidationReport> {
    if !(c > 0.0) {
        return Err(Error::InvalidInput(format!(
            "regime constant must be positive, got {c}"
        )));
    }
    let params = separation_parameters_unchecked(&cloud.inclusions);
    let n = params.n;
    let single = !params.d.is_finite();

    let mut disjoint = true;
    for (i, a) in cloud.inclusions.iter().enumerate() {
        for b in &cloud.inclusions[i + 1..] {
            if (a.center - b.center).norm() <= a.radius + b.radius {
                disjoint = false;
            }
        }
    }

    let omega = cloud.omega;
    let gap_to_omega = cloud
        .inclusions
        .iter()
        .map(|inc| omega.radius() - (inc.center - omega.center).norm() - inc.radius)
        .fold(f64::INFINITY, f64::min);
    let omega_containment = gap_to_omega > 0.0;
    let margin = if single { 0.0 } else { 2.0 * params.d };
    // Relative slack so the default ω (inflated by exactly 2d) passes.
    let omega_margin_ok = gap_to_omega >= margin * (1.0 - 1e-9);

    let clearance_ok = match *ambient {
        AmbientDomain::FreeSpace => true,
        AmbientDomain::Ball { radius } => {
            let omega_gap = radius - omega.center.norm() - omega.radius();
            let inclusions_inside = cloud
                .inclusions
                .iter()
                .all(|inc| inc.center.norm() + inc.radius < radius);
            inclusions_inside && omega_gap >= margin && omega_gap > 0.0
        }
    };

    let max_capacity = cloud.max_capacity();
    let lemma1_threshold = 5.0 * params.d / (24.0 * PI);
    let lemma1_ok = max_capacity < lemma1_threshold;
    let (regime_thm1, regime_thm3) = if single {
        (true, true)
    } else {
        (
            params.epsilon < c * params.d.powf(1.75),
            params.epsilon < c * params.d * params.d,
        )
    };

    Ok(ValidationReport {
        n,
        epsilon: params.epsilon,
        d: params.d,
        disjoint,
        omega_containment,
        omega_margin_ok,
        clearance_ok,
        omega_diameter: omega.diameter,
        unit_diameter: (omega.diameter - 1.0).abs() < 1e-9,
        max_capacity,
        lemma1_threshold,
        lemma1_ok,
        lemma1_slack: lemma1_threshold - max_capacity,
        regime_thm1,
        regime_thm3,
        c_used: c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pattern {
    Lattice,
    Random,
    JitteredLattice,
}

/// Parameters for [`generate_cloud`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudSpec {
    pub pattern: Pattern,
    /// Lattice points per axis (lattice patterns).
    #[serde(default)]
    pub n_per_axis: usize,
    /// Number of inclusions (random pattern).
    #[serde(default)]
    pub n: usize,
    pub radius: f64,
    /// Lattice spacing, or minimal centre distance for the random pattern.
    pub spacing: f64,
    #[serde(default)]
    pub jitter_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    /// Side of the sampling cube for the random pattern; defaults to
    /// `2 · spacing · ⌈n^{1/3}⌉`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_side: Option<f64>,
}

impl CloudSpec {
    pub fn lattice(n_per_axis: usize, spacing: f64, radius: f64) -> Self {
        Self {
            pattern: Pattern::Lattice,
            n_per_axis,
            n: 0,
            radius,
            spacing,
            jitter_fraction: 0.0,
            seed: 0,
            box_side: None,
        }
    }
}

const ATTEMPTS_PER_INCLUSION: usize = 10_000;

/// Generates a deterministic cloud of equal balls centred around the origin.
pub fn generate_cloud(spec: &CloudSpec) -> Result<InclusionCloud> {
    if !(spec.radius > 0.0) || !(spec.spacing > 2.0 * spec.radius) {
        return Err(Error::InvalidInput(format!(
            "need 0 < 2 radius < spacing, got radius {} spacing {}",
            spec.radius, spec.spacing
        )));
    }
    if !(0.0..0.5).contains(&spec.jitter_fraction) {
        return Err(Error::InvalidInput(format!(
            "jitter fraction must lie in [0, 0.5), got {}",
            spec.jitter_fraction
        )));
    }
    // Neighbouring centres move apart by at most 2 · jitter · spacing per axis.
    if spec.pattern == Pattern::JitteredLattice
        && !(spec.spacing * (1.0 - 2.0 * spec.jitter_fraction) > 2.0 * spec.radius)
    {
        return Err(Error::InvalidInput(format!(
            "jitter {} can make balls of radius {} overlap at spacing {}",
            spec.jitter_fraction, spec.radius, spec.spacing
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let centers = match spec.pattern {
        Pattern::Lattice => lattice_points(spec.n_per_axis, spec.spacing),
        Pattern::JitteredLattice => {
            let amplitude = spec.jitter_fraction * spec.spacing;
            lattice_points(spec.n_per_axis, spec.spacing)
                .into_iter()
                .map(|p| {
                    let jitter = Vec3::from_fn(|_, _| rng.random_range(-1.0..=1.0) * amplitude);
                    p + jitter
                })
                .collect()
        }
        Pattern::Random => random_points(spec, &mut rng)?,
    };
    if centers.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let inclusions = centers
        .into_iter()
        .map(|c| Inclusion::ball(c, spec.radius))
        .collect::<Result<Vec<_>>>()?;
    let (center, radius) = bounding_ball(&inclusions);
    let omega = Omega {
        center,
        diameter: 2.0 * (radius + 2.0 * spec.spacing),
    };
    Ok(InclusionCloud::with_omega(inclusions, omega))
}

fn lattice_points(n_per_axis: usize, spacing: f64) -> Vec<Vec3> {
    let offset = 0.5 * (n_per_axis as f64 - 1.0);
    let coord = |i: usize| (i as f64 - offset) * spacing;
    let mut out = Vec::with_capacity(n_per_axis.pow(3));
    for i in 0..n_per_axis {
        for j in 0..n_per_axis {
            for k in 0..n_per_axis {
                out.push(Vec3::new(coord(i), coord(j), coord(k)));
            }
        }
    }
    out
}

fn random_points(spec: &CloudSpec, rng: &mut ChaCha8Rng) -> Result<Vec<Vec3>> {
    let side = spec
        .box_side
        .unwrap_or(2.0 * spec.spacing * (spec.n as f64).cbrt().ceil());
    let half = 0.5 * side;
    let max_attempts = ATTEMPTS_PER_INCLUSION * spec.n.max(1);
    let mut out: Vec<Vec3> = Vec::with_capacity(spec.n);
    let mut attempts = 0;
    while out.len() < spec.n {
        if attempts == max_attempts {
            return Err(Error::PackingFailed {
                placed: out.len(),
                requested: spec.n,
                attempts,
            });
        }
        attempts += 1;
        let p = Vec3::from_fn(|_, _| rng.random_range(-half..half));
        if out.iter().all(|q| (p - q).norm() >= spec.spacing) {
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(x: f64, y: f64, z: f64, r: f64) -> Inclusion {
        Inclusion::ball(Vec3::new(x, y, z), r).unwrap()
    }

    #[test]
    fn two_balls() {
        let cloud = InclusionCloud::new(vec![ball(0.0, 0.0, 0.0, 0.1), ball(1.0, 0.0, 0.0, 0.1)]);
        let p = separation_parameters(&cloud).unwrap();
        assert_eq!(p.epsilon, 0.2);
        assert_eq!(p.d, 0.5);
        assert_eq!(p.n, 2);
    }

    #[test]
    fn single_ball_has_infinite_d() {
        let cloud = InclusionCloud::new(vec![ball(0.0, 0.0, 0.0, 0.05)]);
        let p = separation_parameters(&cloud).unwrap();
        assert_eq!(p.epsilon, 0.1);
        assert!(p.d.is_infinite());
    }

    #[test]
    fn collinear_nearest_pair() {
        let cloud = InclusionCloud::new(vec![
            ball(0.0, 0.0, 0.0, 0.05),
            ball(1.0, 0.0, 0.0, 0.05),
            ball(2.0, 0.0, 0.0, 0.05),
        ]);
        let p = separation_parameters(&cloud).unwrap();
        assert_eq!(p.d, 0.5);
        assert_eq!(p.epsilon, 0.1);
    }

    #[test]
    fn empty_cloud_is_an_error() {
        assert!(matches!(
            separation_parameters(&InclusionCloud::empty()),
            Err(Error::EmptyCloud)
        ));
    }

    #[test]
    fn non_positive_radius_rejected() {
        assert!(Inclusion::ball(Vec3::zeros(), 0.0).is_err());
        assert!(Inclusion::ball(Vec3::zeros(), -1.0).is_err());
    }

    #[test]
    fn lemma1_threshold_from_formula() {
        let cloud = InclusionCloud::new(vec![ball(0.0, 0.0, 0.0, 0.01), ball(1.0, 0.0, 0.0, 0.01)]);
        let r = validate_cloud(&cloud, &AmbientDomain::FreeSpace, 0.1).unwrap();
        assert_eq!(r.d, 0.5);
        assert!((r.lemma1_threshold - 5.0 * 0.5 / (24.0 * PI)).abs() < 1e-15);
        assert!(r.lemma1_ok);
    }

    #[test]
    fn overlap_is_reported_not_raised() {
        let cloud = InclusionCloud::new(vec![ball(0.0, 0.0, 0.0, 0.1), ball(0.15, 0.0, 0.0, 0.1)]);
        let r = validate_cloud(&cloud, &AmbientDomain::FreeSpace, 0.1).unwrap();
        assert!(!r.disjoint);
    }

    #[test]
    fn touching_regime_fails_both_regimes() {
        // epsilon = d = 0.5
        let cloud = InclusionCloud::new(vec![ball(0.0, 0.0, 0.0, 0.25), ball(1.0, 0.0, 0.0, 0.25)]);
        let r = validate_cloud(&cloud, &AmbientDomain::FreeSpace, 0.1).unwrap();
        assert_eq!(r.epsilon, r.d);
        assert!(!r.regime_thm1);
        assert!(!r.regime_thm3);
    }

    #[test]
    fn non_positive_constant_rejected() {
        let cloud = InclusionCloud::new(vec![ball(0.0, 0.0, 0.0, 0.1)]);
        assert!(validate_cloud(&cloud, &AmbientDomain::FreeSpace, 0.0).is_err());
    }

    #[test]
    fn ball_clearance() {
        let cloud = generate_cloud(&CloudSpec::lattice(2, 0.5, 0.01)).unwrap();
        let small = AmbientDomain::Ball { radius: 1.0 };
        let large = AmbientDomain::Ball { radius: 3.0 };
        assert!(!validate_cloud(&cloud, &small, 0.1).unwrap().clearance_ok);
        assert!(validate_cloud(&cloud, &large, 0.1).unwrap().clearance_ok);
    }

    #[test]
    fn lattice_of_27() {
        let cloud = generate_cloud(&CloudSpec::lattice(3, 0.25, 0.01)).unwrap();
        let p = separation_parameters(&cloud).unwrap();
        assert_eq!(p.n, 27);
        assert!((p.d - 0.125).abs() < 1e-15);
    }

    #[test]
    fn random_cloud_is_deterministic() {
        let spec = CloudSpec {
            pattern: Pattern::Random,
            n_per_axis: 0,
            n: 10,
            radius: 0.01,
            spacing: 0.2,
            jitter_fraction: 0.0,
            seed: 42,
            box_side: None,
        };
        let a = generate_cloud(&spec).unwrap();
        let b = generate_cloud(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
    }

    #[test]
    fn jittered_lattice_gaps() {
        let spec = CloudSpec {
            pattern: Pattern::JitteredLattice,
            n_per_axis: 4,
            n: 0,
            radius: 0.01,
            spacing: 0.25,
            jitter_fraction: 0.2,
            seed: 7,
            box_side: None,
        };
        let cloud = generate_cloud(&spec).unwrap();
        let bound = spec.spacing * (1.0 - 2.0 * 0.2) - 2.0 * spec.radius;
        assert!(bound > 0.0);
        for (i, a) in cloud.inclusions.iter().enumerate() {
            for b in &cloud.inclusions[i + 1..] {
                let gap = (a.center - b.center).norm() - a.radius - b.radius;
                assert!(gap >= bound, "gap {gap} < {bound}");
            }
        }
    }

    #[test]
    fn infeasible_random_packing() {
        let spec = CloudSpec {
            pattern: Pattern::Random,
            n_per_axis: 0,
            n: 30,
            radius: 0.01,
            spacing: 0.2,
            jitter_fraction: 0.0,
            seed: 1,
            box_side: Some(0.3),
        };
        assert!(matches!(
            generate_cloud(&spec),
            Err(Error::PackingFailed { requested: 30, .. })
        ));
    }

    #[test]
    fn invalid_specs() {
        assert!(generate_cloud(&CloudSpec::lattice(2, 0.1, 0.05)).is_err());
        let mut spec = CloudSpec::lattice(2, 0.5, 0.01);
        spec.jitter_fraction = 0.5;
        assert!(generate_cloud(&spec).is_err());
        let spec = CloudSpec {
            pattern: Pattern::JitteredLattice,
            jitter_fraction: 0.3,
            ..CloudSpec::lattice(2, 0.1, 0.03)
        };
        assert!(matches!(generate_cloud(&spec), Err(Error::InvalidInput(_))));
    }
}
