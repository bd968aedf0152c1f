//! Asymptotic Green's function of the perforated domain: general form, the
//! simplified free-space form and the diagonal terms separating them.
//!
//! Run with `cargo run --example green_function`.

use mesoscale::fields::MesoModel;
use mesoscale::geometry::{generate_cloud, AmbientDomain, CloudSpec};
use mesoscale::kernels::free_space_green;
use mesoscale::Vec3;

fn main() -> mesoscale::Result<()> {
    let cloud = generate_cloud(&CloudSpec::lattice(3, 0.25, 0.002))?;
    let model = MesoModel::new(cloud, AmbientDomain::FreeSpace, None)?;

    let y = Vec3::new(0.0, 0.0, 0.004);
    for x in [Vec3::new(0.0, 0.0, -0.005), Vec3::new(0.1, 0.05, 0.0), Vec3::new(0.4, 0.3, 0.2)] {
        let g = model.approximate_green(&x, &y)?;
        let swapped = model.approximate_green(&y, &x)?;
        let simplified = model.approximate_green_freespace(&x, &y)?;
        let diagonal = model.diagonal_term(&x, &y)?;
        println!(
            "x = {:?}\n  Gamma = {:.6}  G_N = {g:.6}  G_N(y,x) - G_N(x,y) = {:.1e}\n  simplified = {simplified:.6}  difference = {:.3e}  diagonal = {diagonal:.3e}",
            x.as_slice(),
            free_space_green(&x, &y),
            swapped - g,
            g - simplified,
        );
    }
    Ok(())
}
