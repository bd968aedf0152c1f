//! End-to-end runs of the `mesoscale` binary on small inputs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mesoscale(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mesoscale"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = mesoscale(args, dir);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn values(path: &Path) -> Vec<(f64, String)> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["x", "y", "z", "value", "flags"]
    );
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[3].parse().unwrap(), r[4].to_string())
        })
        .collect()
}

fn setup(dir: &Path) {
    ok(
        &["gen-cloud", "--n", "2", "--spacing", "0.4", "--radius", "0.004", "--ambient-radius", "1", "-o", "cloud.json"],
        dir,
    );
    fs::write(
        dir.join("source.json"),
        r#"{"bumps":[{"center":[0.05,0,0],"rho":0.3,"amplitude":1.0,"exponent":4}]}"#,
    )
    .unwrap();
    // Off the cloud, 1.5 radii from an inclusion, and inside one.
    fs::write(dir.join("points.csv"), "x,y,z\n0.05,0.1,0.0\n0.206,0.2,0.2\n0.2,0.2,0.2\n").unwrap();
}

#[test]
fn solve_and_oracle_u_agree() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let report = ok(&["validate", "--cloud", "cloud.json"], dir.path());
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(report["n"], 8);
    assert_eq!(report["disjoint"], true);

    ok(
        &["solve", "--cloud", "cloud.json", "--source", "source.json", "--points", "points.csv", "-o", "u.csv", "--dump-system", "sys"],
        dir.path(),
    );
    for name in ["S.csv", "D.csv", "Vf.csv", "C.csv", "Cmat.csv"] {
        assert!(dir.path().join("sys").join(name).exists(), "{name} missing");
    }
    fs::write(dir.path().join("oracle.json"), r#"{"sources_per_inclusion":64,"collocation_per_inclusion":128}"#).unwrap();
    ok(
        &["oracle-u", "--cloud", "cloud.json", "--source", "source.json", "--points", "points.csv", "-o", "ou.csv", "--oracle-config", "oracle.json"],
        dir.path(),
    );
    let (asym, reference) = (values(&dir.path().join("u.csv")), values(&dir.path().join("ou.csv")));
    // The remainder is O(ε) ≈ 1e-6 here, largest next to the inclusion.
    for k in 0..2 {
        assert!((asym[k].0 - reference[k].0).abs() < 1e-5, "{asym:?} vs {reference:?}");
    }
    assert!(asym[1].1.contains("near_surface") || asym[1].1.is_empty());
    assert!(asym[2].0.is_nan() && asym[2].1.contains("inside_inclusion"));
    assert!(reference[2].0.is_nan());
}

#[test]
fn green_forms_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    // The free-space form needs a free-space cloud.
    let out = mesoscale(
        &["green", "--cloud", "cloud.json", "--x", "0.1,0,0", "--points", "points.csv", "-o", "g.csv", "--freespace-form"],
        dir.path(),
    );
    assert!(!out.status.success());

    ok(&["gen-cloud", "--n", "2", "--spacing", "0.4", "--radius", "0.004", "-o", "free.json"], dir.path());
    for (args, name) in [
        (vec!["green"], "g.csv"),
        (vec!["green", "--freespace-form"], "gf.csv"),
        (vec!["oracle-green"], "og.csv"),
    ] {
        let mut full = args.clone();
        full.extend(["--cloud", "free.json", "--x", "0.1,0,0", "--points", "points.csv", "-o", name]);
        ok(&full, dir.path());
    }
    let g = values(&dir.path().join("g.csv"));
    let gf = values(&dir.path().join("gf.csv"));
    let og = values(&dir.path().join("og.csv"));
    let (cloud, ambient) = mesoscale::io::read_cloud(&dir.path().join("free.json")).unwrap();
    let model = mesoscale::fields::MesoModel::new(cloud, ambient, None).unwrap();
    let pole = mesoscale::Vec3::new(0.1, 0.0, 0.0);
    let points = mesoscale::io::read_points(&dir.path().join("points.csv")).unwrap();
    for k in 0..2 {
        assert!((g[k].0 - og[k].0).abs() < 1e-2 * og[k].0.abs(), "{g:?} vs {og:?}");
        let diagonal = model.diagonal_term(&pole, &points[k]).unwrap();
        assert!((g[k].0 - gf[k].0 - diagonal).abs() < 1e-12 * g[k].0.abs().max(1.0));
    }
}

#[test]
fn converge_writes_reports_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{
        "sweep": "epsilon",
        "values": [0.0008, 0.0016],
        "base_cloud": {"pattern": "lattice", "n_per_axis": 2, "radius": 0.001, "spacing": 0.5},
        "source": {"bumps":[{"center":[0.05,-0.03,0.02],"rho":0.25,"amplitude":1.0,"exponent":4}]},
        "sample_points": {"count": 40},
        "quantity": "u",
        "seed": 5,
        "oracle": {"sources_per_inclusion": 64, "collocation_per_inclusion": 128}
    }"#;
    fs::write(dir.path().join("spec.json"), spec).unwrap();
    ok(&["converge", "--spec", "spec.json", "-o", "a"], dir.path());
    ok(&["--threads", "1", "converge", "--spec", "spec.json", "-o", "b"], dir.path());
    let read = |d: &str, f: &str| fs::read(dir.path().join(d).join(f)).unwrap();
    assert_eq!(read("a", "rows.csv"), read("b", "rows.csv"));
    assert_eq!(read("a", "summary.json"), read("b", "summary.json"));
    let summary: serde_json::Value = serde_json::from_slice(&read("a", "summary.json")).unwrap();
    assert!(summary["fitted_slope"].is_number());
    assert_eq!(String::from_utf8(read("a", "rows.csv")).unwrap().lines().count(), 3);

    // A different seed changes the sample and therefore the rows.
    ok(&["--seed", "6", "converge", "--spec", "spec.json", "-o", "c"], dir.path());
    assert_ne!(read("a", "rows.csv"), read("c", "rows.csv"));
}

#[test]
fn bad_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let out = mesoscale(&["gen-cloud", "--n", "2", "--spacing", "0.01", "--radius", "0.01", "-o", "x.json"], dir.path());
    assert!(!out.status.success());
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    let out = mesoscale(&["validate", "--cloud", "missing.json"], dir.path());
    assert!(!out.status.success());
    fs::write(dir.path().join("bad.json"), r#"{"sources_per_inclusion":64,"collocation_per_inclusion":64}"#).unwrap();
    let out = mesoscale(
        &["oracle-u", "--cloud", "cloud.json", "--source", "source.json", "--points", "points.csv", "-o", "o.csv", "--oracle-config", "bad.json"],
        dir.path(),
    );
    assert!(!out.status.success());
}
