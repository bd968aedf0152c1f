//! Seeded sample points in the perforated domain.
//!
//! Near-surface samples are drawn in coordinates normalized by the inclusion
//! radius, so with a fixed seed the same normalized positions are used for
//! every cloud of an ε-sweep.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{AmbientDomain, InclusionCloud};
use crate::{Result, Vec3};

/// Independent random streams derived from one study seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    NearPoints = 1,
    BulkPoints = 2,
    Pairs = 3,
    MonteCarlo = 4,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingStrategy {
    /// Uniform in `ω ∩ Ω` outside the inclusions.
    Uniform,
    /// Uniform in the shells `a_j ≤ |x − O⁽ʲ⁾| ≤ shell_outer · a_j`.
    NearSurface,
    /// `near_fraction` of the points near surfaces, the rest uniform.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sampling {
    pub count: usize,
    pub strategy: SamplingStrategy,
    pub near_fraction: f64,
    /// Outer shell radius in units of the inclusion radius.
    pub shell_outer: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            count: 500,
            strategy: SamplingStrategy::Mixed,
            near_fraction: 0.5,
            shell_outer: 2.0,
        }
    }
}

/// Uniformly distributed unit vector.
pub fn random_direction(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        );
        let n2 = v.norm_squared();
        if n2 > 1e-12 && n2 <= 1.0 {
            return v / n2.sqrt();
        }
    }
}

/// Point in the shell around inclusion `j` at normalized radius `t ∈ [1, outer]`.
fn shell_point(cloud: &InclusionCloud, j: usize, outer: f64, rng: &mut impl Rng) -> Vec3 {
    let inc = &cloud.inclusions[j];
    let dir = random_direction(rng);
    let t = 1.0 + (outer - 1.0) * rng.random::<f64>();
    inc.center + t * inc.radius * dir
}

fn admissible(cloud: &InclusionCloud, ambient: &AmbientDomain, x: &Vec3) -> bool {
    ambient.contains(x) && cloud.containing_inclusion(x).is_none()
}

/// Uniform sample of `ω ∩ Ω` outside the inclusions, by rejection from the
/// bounding cube of `ω`.
pub fn uniform_points(
    cloud: &InclusionCloud,
    ambient: &AmbientDomain,
    count: usize,
    rng: &mut impl Rng,
) -> Vec<Vec3> {
    let r = cloud.omega.radius();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = cloud.omega.center
            + Vec3::new(
                rng.random_range(-r..=r),
                rng.random_range(-r..=r),
                rng.random_range(-r..=r),
            );
        if (x - cloud.omega.center).norm() <= r && admissible(cloud, ambient, &x) {
            out.push(x);
        }
    }
    out
}

/// Near-surface sample: inclusion chosen uniformly, position uniform in
/// normalized shell radius and direction.
pub fn near_surface_points(
    cloud: &InclusionCloud,
    ambient: &AmbientDomain,
    count: usize,
    shell_outer: f64,
    rng: &mut impl Rng,
) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(count);
    if cloud.is_empty() {
        return out;
    }
    while out.len() < count {
        let j = rng.random_range(0..cloud.len());
        let x = shell_point(cloud, j, shell_outer, rng);
        if admissible(cloud, ambient, &x) {
            out.push(x);
        }
    }
    out
}

/// Sample points for a field comparison.
pub fn sample_points(
    cloud: &InclusionCloud,
    ambient: &AmbientDomain,
    sampling: &Sampling,
    seed: u64,
) -> Result<Vec<Vec3>> {
    sampling.validate()?;
    let near = match sampling.strategy {
        _ if cloud.is_empty() => 0,
        SamplingStrategy::Uniform => 0,
        SamplingStrategy::NearSurface => sampling.count,
        SamplingStrategy::Mixed => (sampling.near_fraction * sampling.count as f64).round() as usize,
    };
    let mut points = near_surface_points(
        cloud,
        ambient,
        near,
        sampling.shell_outer,
        &mut stream_rng(seed, Stream::NearPoints),
    );
    points.extend(uniform_points(
        cloud,
        ambient,
        sampling.count - near,
        &mut stream_rng(seed, Stream::BulkPoints),
    ));
    Ok(points)
}

impl Sampling {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.near_fraction) {
            return Err(crate::Error::InvalidInput("near_fraction must lie in [0, 1]".into()));
        }
        if !(self.shell_outer > 1.0) {
            return Err(crate::Error::InvalidInput("shell_outer must exceed 1".into()));
        }
        Ok(())
    }
}

/// Point pairs for Green's function comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairSampling {
    /// Include the three anchored pairs from [`anchored_pairs`].
    pub anchored: bool,
    pub random_pairs: usize,
    pub shell_outer: f64,
}

impl Default for PairSampling {
    fn default() -> Self {
        Self {
            anchored: true,
            random_pairs: 100,
            shell_outer: 2.0,
        }
    }
}

/// Three pairs at fixed normalized positions: poles near the first and last
/// inclusions, poles near the first two inclusions, and a pole near the
/// first inclusion paired with the cloud centroid.
pub fn anchored_pairs(cloud: &InclusionCloud, ambient: &AmbientDomain) -> Vec<(Vec3, Vec3)> {
    let n = cloud.len();
    if n < 2 {
        return Vec::new();
    }
    let near = |j: usize, t: f64, dir: Vec3| {
        let inc = &cloud.inclusions[j];
        inc.center + t * inc.radius * dir.normalize()
    };
    let centroid = cloud.inclusions.iter().map(|inc| inc.center).sum::<Vec3>() / n as f64;
    let candidates = [
        (near(0, 1.5, Vec3::x()), near(n - 1, 1.5, -Vec3::x())),
        (near(0, 1.5, Vec3::y()), near(1, 1.5, Vec3::z())),
        (near(0, 1.25, Vec3::new(1.0, 1.0, 1.0)), centroid),
    ];
    candidates
        .into_iter()
        .filter(|(x, y)| x != y && admissible(cloud, ambient, x) && admissible(cloud, ambient, y))
        .collect()
}

/// Anchored pairs followed by random pairs whose points lie in the shells
/// of two distinct inclusions (uniform pairs when `N < 2`).
pub fn sample_pairs(
    cloud: &InclusionCloud,
    ambient: &AmbientDomain,
    sampling: &PairSampling,
    seed: u64,
) -> Vec<(Vec3, Vec3)> {
    let mut pairs = if sampling.anchored {
        anchored_pairs(cloud, ambient)
    } else {
        Vec::new()
    };
    let target = pairs.len() + sampling.random_pairs;
    let mut rng = stream_rng(seed, Stream::Pairs);
    let n = cloud.len();
    while pairs.len() < target {
        let (x, y) = if n >= 2 {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            (
                shell_point(cloud, i, sampling.shell_outer, &mut rng),
                shell_point(cloud, j, sampling.shell_outer, &mut rng),
            )
        } else {
            let p = uniform_points(cloud, ambient, 2, &mut rng);
            (p[0], p[1])
        };
        if x != y && admissible(cloud, ambient, &x) && admissible(cloud, ambient, &y) {
            pairs.push((x, y));
        }
    }
    pairs
}
