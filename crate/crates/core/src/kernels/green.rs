use crate::geometry::{AmbientDomain, Inclusion, ShapeKind};
use crate::{Error, Result, Vec3, FOUR_PI};

/// Relative tolerance for points on (not inside) a sphere.
const SURFACE_TOL: f64 = 1e-12;

#[inline]
pub fn free_space_green(x: &Vec3, y: &Vec3) -> f64 {
    1.0 / (FOUR_PI * (x - y).norm())
}

/// Kelvin image term for a sphere of radius `a` centred at the origin,
/// written in the symmetric form
/// `a / (4π sqrt(|x|²|y|² − 2a² x·y + a⁴))`, which equals
/// `a / (4π |y| |x − a² y / |y|²|)` and stays finite as `y → 0`.
#[inline]
fn image_term(a: f64, x: &Vec3, y: &Vec3) -> f64 {
    let a2 = a * a;
    let q = x.norm_squared() * y.norm_squared() - 2.0 * a2 * x.dot(y) + a2 * a2;
    a / (FOUR_PI * q.max(0.0).sqrt())
}

fn check_in_ambient(ambient: &AmbientDomain, x: &Vec3) -> Result<()> {
    if ambient.contains(x) {
        Ok(())
    } else {
        Err(Error::OutOfDomain)
    }
}

/// Green's function `G(x, y)` of the unperforated domain.
pub fn ambient_green(ambient: &AmbientDomain, x: &Vec3, y: &Vec3) -> Result<f64> {
    check_in_ambient(ambient, x)?;
    check_in_ambient(ambient, y)?;
    if x == y {
        return Err(Error::SingularPoint);
    }
    Ok(match *ambient {
        AmbientDomain::FreeSpace => free_space_green(x, y),
        AmbientDomain::Ball { radius } => free_space_green(x, y) - image_term(radius, x, y),
    })
}

/// Regular part `H(x, y) = 1/(4π|x − y|) − G(x, y)`, evaluated from the
/// image term so that the diagonal `x = y` is finite.
pub fn ambient_regular_part(ambient: &AmbientDomain, x: &Vec3, y: &Vec3) -> Result<f64> {
    check_in_ambient(ambient, x)?;
    check_in_ambient(ambient, y)?;
    Ok(match *ambient {
        AmbientDomain::FreeSpace => 0.0,
        AmbientDomain::Ball { radius } => image_term(radius, x, y),
    })
}

/// Harmonic capacity, normalized so that a ball of radius `a` has capacity `a`.
pub fn capacity(inclusion: &Inclusion) -> Result<f64> {
    match inclusion.shape {
        ShapeKind::Ball => Ok(inclusion.radius),
    }
}

fn check_outside(inclusion: &Inclusion, x: &Vec3) -> Result<f64> {
    let r = (x - inclusion.center).norm();
    if r < inclusion.radius * (1.0 - SURFACE_TOL) {
        return Err(Error::InsideInclusion { index: None });
    }
    Ok(r)
}

/// Capacitary potential `P(x)`: harmonic outside the inclusion, 1 on its
/// surface, decaying like `cap / |x − O|`.
pub fn capacitary_potential(inclusion: &Inclusion, x: &Vec3) -> Result<f64> {
    let r = check_outside(inclusion, x)?;
    match inclusion.shape {
        ShapeKind::Ball => Ok((inclusion.radius / r).min(1.0)),
    }
}

/// Regular part `h(x, y)` of the exterior Dirichlet Green's function of one
/// inclusion.
pub fn exterior_regular_part(inclusion: &Inclusion, x: &Vec3, y: &Vec3) -> Result<f64> {
    check_outside(inclusion, x)?;
    check_outside(inclusion, y)?;
    match inclusion.shape {
        ShapeKind::Ball => Ok(image_term(
            inclusion.radius,
            &(x - inclusion.center),
            &(y - inclusion.center),
        )),
    }
}

/// Exterior Dirichlet Green's function `g(x, y)` of one inclusion.
pub fn exterior_green(inclusion: &Inclusion, x: &Vec3, y: &Vec3) -> Result<f64> {
    let h = exterior_regular_part(inclusion, x, y)?;
    if x == y {
        return Err(Error::SingularPoint);
    }
    Ok(free_space_green(x, y) - h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_ball() -> AmbientDomain {
        AmbientDomain::Ball { radius: 1.0 }
    }

    #[test]
    fn free_space_unit_distance() {
        let g = ambient_green(
            &AmbientDomain::FreeSpace,
            &Vec3::zeros(),
            &Vec3::new(1.0, 0.0, 0.0),
        )
        .unwrap();
        assert!((g - 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert!((g - 0.0795775).abs() < 1e-7);
    }

    #[test]
    fn ball_green_vanishes_on_boundary() {
        let y = Vec3::new(0.2, -0.3, 0.1);
        let x = Vec3::new(0.6, 0.0, 0.8);
        let g = ambient_green(&unit_ball(), &x, &y).unwrap();
        assert!(g.abs() < 1e-13, "{g}");
    }

    #[test]
    fn ball_regular_part_diagonal() {
        let x = Vec3::new(0.5, 0.0, 0.0);
        let h = ambient_regular_part(&unit_ball(), &x, &x).unwrap();
        assert!((h - 1.0 / (3.0 * PI)).abs() < 1e-15);
        // Cross-check against the subtraction form just off the diagonal.
        let y = x + Vec3::new(1e-4, 0.0, 0.0);
        let sub = free_space_green(&x, &y) - ambient_green(&unit_ball(), &x, &y).unwrap();
        assert!((sub - h).abs() < 1e-4);
    }

    #[test]
    fn ball_regular_part_at_centre() {
        let h = ambient_regular_part(&unit_ball(), &Vec3::zeros(), &Vec3::zeros()).unwrap();
        assert!((h - 1.0 / (4.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn out_of_domain_and_singular() {
        let outside = Vec3::new(1.5, 0.0, 0.0);
        assert!(matches!(
            ambient_green(&unit_ball(), &outside, &Vec3::zeros()),
            Err(Error::OutOfDomain)
        ));
        assert!(matches!(
            ambient_regular_part(&unit_ball(), &outside, &Vec3::zeros()),
            Err(Error::OutOfDomain)
        ));
        let p = Vec3::new(0.1, 0.0, 0.0);
        assert!(matches!(
            ambient_green(&AmbientDomain::FreeSpace, &p, &p),
            Err(Error::SingularPoint)
        ));
    }

    #[test]
    fn capacities() {
        let a = Inclusion::ball(Vec3::zeros(), 0.05).unwrap();
        assert_eq!(capacity(&a).unwrap(), 0.05);
        let b = Inclusion::ball(Vec3::zeros(), 1.0).unwrap();
        assert_eq!(capacity(&b).unwrap(), 1.0);
        let lambda = 3.5;
        let c = Inclusion::ball(Vec3::zeros(), 0.05 * lambda).unwrap();
        assert!((capacity(&c).unwrap() - lambda * capacity(&a).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn capacitary_potential_values() {
        let inc = Inclusion::ball(Vec3::zeros(), 0.1).unwrap();
        assert!((capacitary_potential(&inc, &Vec3::new(0.2, 0.0, 0.0)).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(capacitary_potential(&inc, &Vec3::new(0.0, 0.1, 0.0)).unwrap(), 1.0);
        let far = capacitary_potential(&inc, &Vec3::new(0.0, 0.0, 10.0)).unwrap();
        assert!((far - 0.01).abs() < 1e-15);
        assert!(matches!(
            capacitary_potential(&inc, &Vec3::new(0.05, 0.0, 0.0)),
            Err(Error::InsideInclusion { .. })
        ));
    }

    #[test]
    fn exterior_regular_part_matches_subtraction() {
        let inc = Inclusion::ball(Vec3::zeros(), 0.1).unwrap();
        let y = Vec3::new(0.3, 0.0, 0.0);
        let x = Vec3::new(0.0, 0.4, 0.0);
        let h = exterior_regular_part(&inc, &x, &y).unwrap();
        let direct = 0.1 / (4.0 * PI * 0.3 * (x - y * (0.01 / 0.09)).norm());
        assert!((h - direct).abs() < 1e-13);
        let sub = free_space_green(&x, &y) - exterior_green(&inc, &x, &y).unwrap();
        assert!((h - sub).abs() < 1e-13);
    }

    #[test]
    fn exterior_green_vanishes_on_sphere() {
        let inc = Inclusion::ball(Vec3::new(0.1, 0.2, -0.3), 0.05).unwrap();
        let y = Vec3::new(0.4, 0.2, -0.1);
        for k in 0..100 {
            let t = k as f64 * 0.731;
            let dir = Vec3::new(t.cos() * (1.3 * t).sin(), t.sin() * (1.3 * t).sin(), (1.3 * t).cos());
            let x = inc.center + inc.radius * dir.normalize();
            assert!(exterior_green(&inc, &x, &y).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn vanishing_obstacle() {
        let x = Vec3::new(0.3, 0.1, 0.0);
        let y = Vec3::new(-0.2, 0.4, 0.1);
        let inc = Inclusion::ball(Vec3::zeros(), 1e-9).unwrap();
        let g = exterior_green(&inc, &x, &y).unwrap();
        assert!((g - free_space_green(&x, &y)).abs() < 1e-8);
        assert!(exterior_regular_part(&inc, &x, &y).unwrap() < 1e-8);
    }
}
