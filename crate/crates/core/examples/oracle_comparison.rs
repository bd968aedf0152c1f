//! Compare the asymptotic solution and Green's function with the
//! method-of-fundamental-solutions reference solver.
//!
//! Run with `cargo run --release --example oracle_comparison`.

use mesoscale::fields::MesoModel;
use mesoscale::geometry::{generate_cloud, AmbientDomain, CloudSpec};
use mesoscale::kernels::SourceTerm;
use mesoscale::oracle::{OracleBasis, OracleConfig};
use mesoscale::Vec3;

fn main() -> mesoscale::Result<()> {
    let f = SourceTerm::single(Vec3::new(0.05, -0.03, 0.02), 0.25, 1.0, 4)?;
    let probe = Vec3::new(0.25, 0.25, 0.25) + Vec3::new(0.0, 0.0, 1.0);
    for radius in [0.004, 0.002, 0.001] {
        let cloud = generate_cloud(&CloudSpec::lattice(2, 0.5, radius))?;
        let model = MesoModel::new(cloud, AmbientDomain::FreeSpace, Some(f.clone()))?;
        let basis = OracleBasis::new(model.cloud(), model.ambient(), OracleConfig::default())?;
        let u_ref = basis.solve_u(model.unperturbed().expect("source given"))?;

        // A point 1.5 radii from the first inclusion centre, where the
        // remainder is largest.
        let center = model.cloud().inclusions[0].center;
        let x = center + 1.5 * radius * probe.normalize();
        let err_u = (model.approximate_solution(&x)? - u_ref.value(&x)?).abs();

        let y = center - 1.5 * radius * probe.normalize();
        let g_ref = basis.solve_green(&y)?;
        let err_g = (model.approximate_green(&x, &y)? - g_ref.value(&x)?).abs();
        println!(
            "eps = {:.4}: |u_N - u| = {err_u:.3e}, |G_N - G| = {err_g:.3e}, oracle residuals {:.1e} / {:.1e}",
            2.0 * radius,
            u_ref.relative_residual,
            g_ref.relative_residual
        );
    }
    Ok(())
}
