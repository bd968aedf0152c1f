//! A small ε-sweep of the uniform error of `u_N`, written as rows.csv,
//! summary.json and telemetry.json.
//!
//! Run with `cargo run --release --example convergence_study`.

use mesoscale::experiments::{emit_report, run_study, Quantity, Sampling, StudySpec, SweepParameter};
use mesoscale::geometry::{AmbientDomain, CloudSpec};
use mesoscale::kernels::SourceTerm;
use mesoscale::oracle::OracleConfig;
use mesoscale::Vec3;

fn main() -> mesoscale::Result<()> {
    let spec = StudySpec {
        sweep: SweepParameter::Epsilon,
        values: vec![8e-4, 1.6e-3, 3.2e-3],
        base_cloud: CloudSpec::lattice(2, 0.5, 1e-3),
        ambient: AmbientDomain::FreeSpace,
        source: SourceTerm::single(Vec3::new(0.05, -0.03, 0.02), 0.25, 1.0, 4)?,
        sample_points: Sampling {
            count: 200,
            ..Sampling::default()
        },
        pairs: Default::default(),
        quantity: Quantity::U,
        seed: 2024,
        oracle: OracleConfig::default(),
        energy: Default::default(),
    };
    let result = run_study(&spec)?;
    for row in &result.rows {
        println!(
            "eps = {:.1e}  sup error = {:.3e}  oracle residual = {:.1e}  trusted = {}",
            row.epsilon, row.sup_error, row.oracle_residual, row.trusted
        );
    }
    if let Some(fit) = &result.fit {
        println!("fitted slope {:.3} with 95% interval {:?}", fit.slope, fit.interval);
    }
    let dir = std::env::temp_dir().join("mesoscale_study");
    for path in emit_report(&result, &dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
