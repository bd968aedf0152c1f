//! Energy norm of the remainder `u - u_N` by uniform Monte Carlo and by the
//! shell-stratified estimator that resolves the gradient near the surfaces.
//!
//! Run with `cargo run --release --example energy_error`.

use mesoscale::experiments::{energy_error, energy_norm_stratified};
use mesoscale::fields::MesoModel;
use mesoscale::geometry::{generate_cloud, AmbientDomain, CloudSpec};
use mesoscale::kernels::SourceTerm;
use mesoscale::oracle::{OracleBasis, OracleConfig};
use mesoscale::Vec3;

fn main() -> mesoscale::Result<()> {
    let f = SourceTerm::single(Vec3::new(0.05, -0.03, 0.02), 0.25, 1.0, 4)?;
    for radius in [8e-4, 1.6e-3] {
        let cloud = generate_cloud(&CloudSpec::lattice(2, 0.5, radius))?;
        let model = MesoModel::new(cloud, AmbientDomain::FreeSpace, Some(f.clone()))?;
        let basis = OracleBasis::new(model.cloud(), model.ambient(), OracleConfig::default())?;
        let reference = basis.solve_u(model.unperturbed().expect("source given"))?;
        let fd_step = 0.1 * radius;

        let uniform = energy_error(&model, &reference, 20_000, fd_step, 1)?;
        let stratified = energy_norm_stratified(
            model.cloud(),
            model.ambient(),
            &|x| reference.correction(x),
            &|x| model.correction(x),
            2000,
            20.0,
            20_000,
            fd_step,
            1,
        )?;
        println!(
            "eps = {:.1e}: uniform {:.3e} ± {:.1e}, stratified {:.3e} ± {:.1e}",
            2.0 * radius,
            uniform.value,
            uniform.std_error,
            stratified.value,
            stratified.std_error
        );
    }
    Ok(())
}
