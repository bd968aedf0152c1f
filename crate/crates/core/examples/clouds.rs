//! Generate inclusion clouds, check their admissibility and save one to JSON.
//!
//! Run with `cargo run --example clouds`.

use mesoscale::geometry::{
    generate_cloud, separation_parameters, validate_cloud, AmbientDomain, CloudSpec, Pattern,
    DEFAULT_REGIME_CONSTANT,
};
use mesoscale::io::write_cloud;

fn main() -> mesoscale::Result<()> {
    let lattice = CloudSpec::lattice(3, 0.25, 0.002);
    let random = CloudSpec {
        pattern: Pattern::Random,
        n: 20,
        seed: 7,
        ..lattice.clone()
    };
    let jittered = CloudSpec {
        pattern: Pattern::JitteredLattice,
        jitter_fraction: 0.2,
        seed: 7,
        ..lattice.clone()
    };
    let ambient = AmbientDomain::Ball { radius: 1.0 };

    for (name, spec) in [("lattice", &lattice), ("random", &random), ("jittered", &jittered)] {
        let cloud = generate_cloud(spec)?;
        let params = separation_parameters(&cloud)?;
        let report = validate_cloud(&cloud, &ambient, DEFAULT_REGIME_CONSTANT)?;
        println!(
            "{name:>9}: N = {:3}  eps = {:.4}  d = {:.4}  cap_max = {:.3e} (threshold {:.3e})",
            params.n, params.epsilon, params.d, report.max_capacity, report.lemma1_threshold
        );
        for warning in report.warnings() {
            println!("           warning: {warning}");
        }
    }

    // Shrinking the radii moves the lattice into the small-inclusion regime.
    let small = generate_cloud(&CloudSpec::lattice(3, 0.25, 2e-4))?;
    let report = validate_cloud(&small, &ambient, DEFAULT_REGIME_CONSTANT)?;
    println!(
        "small radii: lemma 1 ok = {}, eps < c d^(7/4): {}, eps < c d^2: {}",
        report.lemma1_ok, report.regime_thm1, report.regime_thm3
    );

    let path = std::env::temp_dir().join("mesoscale_lattice.json");
    write_cloud(&path, &small, ambient)?;
    println!("wrote {}", path.display());
    Ok(())
}
