//! Evaluate the asymptotic solution `u_N` of `-Δu = f` with zero data on
//! every inclusion, along a line through the cloud.
//!
//! Run with `cargo run --example approximate_solution`.

use mesoscale::fields::MesoModel;
use mesoscale::geometry::{generate_cloud, AmbientDomain, CloudSpec};
use mesoscale::kernels::SourceTerm;
use mesoscale::{Error, Vec3};

fn main() -> mesoscale::Result<()> {
    let cloud = generate_cloud(&CloudSpec::lattice(3, 0.25, 0.01))?;
    let f = SourceTerm::single(Vec3::new(0.05, 0.0, 0.0), 0.3, 1.0, 4)?;
    let model = MesoModel::new(cloud, AmbientDomain::Ball { radius: 1.0 }, Some(f))?;
    let v = model.unperturbed().expect("model has a source");

    println!("{:>8} {:>12} {:>12} {:>12}  note", "x", "v_f", "u_N", "u_N - v_f");
    for i in 0..=24 {
        let t = -0.3 + 0.025 * i as f64;
        let x = Vec3::new(t, 0.0, 0.0);
        match model.approximate_solution(&x) {
            Ok(u) => {
                let note = match model.near_surface(&x) {
                    Some(j) => format!("near inclusion {j}"),
                    None => String::new(),
                };
                println!("{t:8.3} {:12.6} {u:12.6} {:12.3e}  {note}", v.value(&x)?, u - v.value(&x)?);
            }
            Err(Error::InsideInclusion { index }) => println!("{t:8.3} inside inclusion {index:?}"),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
