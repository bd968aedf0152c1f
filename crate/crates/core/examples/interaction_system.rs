//! Assemble the interaction system `(I + SD)C = -V_f`, solve for the
//! coefficients, form the symmetric interaction matrix and evaluate the
//! runtime certificates.
//!
//! Run with `cargo run --example interaction_system`.

use mesoscale::geometry::{generate_cloud, separation_parameters, AmbientDomain, CloudSpec};
use mesoscale::kernels::{SourceTerm, UnperturbedSolution};
use mesoscale::system::{assemble_system, certificates, dump_system, interaction_matrix, solve_coefficients};
use mesoscale::Vec3;

fn main() -> mesoscale::Result<()> {
    let cloud = generate_cloud(&CloudSpec::lattice(3, 0.25, 0.001))?;
    let ambient = AmbientDomain::Ball { radius: 1.0 };
    let f = SourceTerm::single(Vec3::new(0.05, 0.0, 0.0), 0.3, 1.0, 4)?;
    let v = UnperturbedSolution::new(ambient, f);
    let params = separation_parameters(&cloud)?;

    let sys = assemble_system(&cloud, &ambient, Some(&v))?;
    let coefficients = solve_coefficients(&sys, Some(&params))?;
    println!(
        "N = {}, residual = {:.2e}, condition ~ {:.3}",
        sys.len(),
        coefficients.residual,
        coefficients.condition_estimate
    );
    println!("C[0..3] = {:.5?}", &coefficients.values.as_slice()[..3]);

    let cmat = interaction_matrix(&sys)?;
    println!(
        "interaction matrix: raw asymmetry {:.1e}, norm {:.4}",
        cmat.raw_asymmetry, cmat.operator_norm_estimate
    );

    let report = certificates(&sys, &coefficients, &cmat, &params);
    println!(
        "lemma 1: {:.3e} <= {:?} ({}), lemma 2 ratio {:.3}, lemma 3 ratio {:.3e}",
        report.lemma1_lhs, report.lemma1_rhs, report.lemma1_holds, report.lemma2_ratio, report.lemma3_ratio
    );

    let dir = std::env::temp_dir().join("mesoscale_system");
    dump_system(&dir, &sys, Some(&coefficients), Some(&cmat))?;
    println!("matrices written to {}", dir.display());
    Ok(())
}
