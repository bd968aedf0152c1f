//! Single-inclusion building blocks: ambient Green's functions, capacities,
//! capacitary potentials, exterior Green's functions and the unperturbed
//! solution `v_f`.
//!
//! Run with `cargo run --example kernels`.

use mesoscale::geometry::{AmbientDomain, Inclusion};
use mesoscale::kernels::{
    ambient_green, ambient_regular_part, capacitary_potential, capacity, exterior_green,
    free_space_green, SourceTerm, UnperturbedSolution,
};
use mesoscale::Vec3;

fn main() -> mesoscale::Result<()> {
    let ball = AmbientDomain::Ball { radius: 1.0 };
    let x = Vec3::new(0.3, 0.1, -0.2);
    let y = Vec3::new(-0.1, 0.2, 0.4);
    println!("Gamma(x, y)          = {:.6}", free_space_green(&x, &y));
    println!("G_ball(x, y)         = {:.6}", ambient_green(&ball, &x, &y)?);
    println!("G_ball(y, x)         = {:.6}", ambient_green(&ball, &y, &x)?);
    println!("H_ball(x, y)         = {:.6}", ambient_regular_part(&ball, &x, &y)?);

    let inclusion = Inclusion::ball(Vec3::zeros(), 0.05)?;
    println!("cap(B_0.05)          = {:.6} (the radius)", capacity(&inclusion)?);
    for r in [0.05, 0.1, 0.5] {
        let p = Vec3::new(r, 0.0, 0.0);
        println!("P(|x| = {r:<4})        = {:.6}", capacitary_potential(&inclusion, &p)?);
    }
    let near = Vec3::new(0.08, 0.0, 0.0);
    let on_surface = Vec3::new(0.0, 0.05, 0.0);
    println!(
        "g(surface, y)        = {:.2e} (vanishes on the inclusion)",
        exterior_green(&inclusion, &on_surface, &near)?
    );

    let f = SourceTerm::single(Vec3::new(0.1, 0.0, 0.0), 0.3, 1.0, 4)?;
    for ambient in [AmbientDomain::FreeSpace, ball] {
        let v = UnperturbedSolution::new(ambient, f.clone());
        println!(
            "{:?}: v_f(0) = {:.6}, grad v_f(0) = {:.4?}",
            ambient,
            v.value(&Vec3::zeros())?,
            v.gradient(&Vec3::zeros())?.as_slice()
        );
    }
    Ok(())
}
