//! Command-line front end for the `mesoscale` library.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use mesoscale::experiments::{emit_report, run_study, StudySpec};
use mesoscale::fields::MesoModel;
use mesoscale::geometry::{
    generate_cloud, validate_cloud, AmbientDomain, CloudSpec, Pattern, DEFAULT_REGIME_CONSTANT,
};
use mesoscale::io::{self, FieldRow};
use mesoscale::oracle::{OracleBasis, OracleConfig, OracleSolution};
use mesoscale::system::dump_system;
use mesoscale::{Error, Result, Vec3};

#[derive(Parser)]
#[command(name = "mesoscale", version, about = "Meso-scale asymptotics for perforated domains")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Random seed; overrides the seed of gen-cloud and of study specs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PatternArg {
    Lattice,
    Random,
    JitteredLattice,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an inclusion cloud file.
    GenCloud {
        #[arg(long, value_enum, default_value = "lattice")]
        pattern: PatternArg,
        /// Points per axis (lattice patterns) or inclusion count (random).
        #[arg(long)]
        n: usize,
        #[arg(long)]
        spacing: f64,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        /// Radius of a ball ambient domain centred at the origin; free space if absent.
        #[arg(long)]
        ambient_radius: Option<f64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the admissibility report of a cloud.
    Validate {
        #[arg(long)]
        cloud: PathBuf,
        /// Regime constant c.
        #[arg(long, default_value_t = DEFAULT_REGIME_CONSTANT)]
        c: f64,
    },
    /// Evaluate the asymptotic solution u at points.
    Solve {
        #[command(flatten)]
        io: SolveIo,
        /// Write S, D, Vf, C and the interaction matrix as CSV into this directory.
        #[arg(long)]
        dump_system: Option<PathBuf>,
    },
    /// Evaluate the asymptotic Green's function G_N(x, ·) at points.
    Green {
        #[command(flatten)]
        io: GreenIo,
        /// Use the simplified free-space formula.
        #[arg(long)]
        freespace_form: bool,
    },
    /// Evaluate the reference solution u at points.
    OracleU {
        #[command(flatten)]
        io: SolveIo,
        #[arg(long)]
        oracle_config: Option<PathBuf>,
    },
    /// Evaluate the reference Green's function G_N(x, ·) at points.
    OracleGreen {
        #[command(flatten)]
        io: GreenIo,
        #[arg(long)]
        oracle_config: Option<PathBuf>,
    },
    /// Run a convergence study and write rows.csv, summary.json, telemetry.json.
    Converge {
        #[arg(long)]
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct SolveIo {
    #[arg(long)]
    cloud: PathBuf,
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    points: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct GreenIo {
    #[arg(long)]
    cloud: PathBuf,
    /// Pole, as "x,y,z".
    #[arg(long, value_parser = parse_point_arg)]
    x: Vec3,
    #[arg(long)]
    points: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
}

fn parse_point_arg(s: &str) -> std::result::Result<Vec3, String> {
    io::parse_point(s).map_err(|e| e.to_string())
}

fn oracle_config(path: Option<&Path>) -> Result<OracleConfig> {
    match path {
        Some(p) => {
            let cfg: OracleConfig = io::read_json(p)?;
            cfg.validate()?;
            Ok(cfg)
        }
        None => Ok(OracleConfig::default()),
    }
}

/// Evaluates `eval` at every point; points where it fails are written with
/// a NaN value and the failure as flag.
fn evaluate(
    points: &[Vec3],
    model: &MesoModel,
    eval: impl Fn(&Vec3) -> Result<f64> + Sync,
) -> Vec<FieldRow> {
    points
        .par_iter()
        .map(|p| {
            let (value, mut flags) = match eval(p) {
                Ok(v) => (v, Vec::new()),
                Err(e) => (f64::NAN, vec![error_flag(&e)]),
            };
            if let Some(j) = model.near_surface(p) {
                flags.push(format!("near_surface_{j}"));
            }
            FieldRow {
                point: *p,
                value,
                flags: flags.join(";"),
            }
        })
        .collect()
}

fn error_flag(e: &Error) -> String {
    match e {
        Error::InsideInclusion { .. } => "inside_inclusion".into(),
        Error::OutOfDomain => "out_of_domain".into(),
        Error::SingularPoint => "singular".into(),
        other => format!("error: {other}"),
    }
}

fn report_oracle(sol: &OracleSolution) {
    log::info!(
        "oracle residual {:e} (relative {:e}), trusted: {}",
        sol.boundary_residual,
        sol.relative_residual,
        sol.trusted
    );
    if !sol.trusted {
        eprintln!(
            "warning: oracle residual {:e} relative exceeds the trust threshold",
            sol.relative_residual
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenCloud {
            pattern,
            n,
            spacing,
            radius,
            jitter,
            ambient_radius,
            output,
        } => {
            let pattern = match pattern {
                PatternArg::Lattice => Pattern::Lattice,
                PatternArg::Random => Pattern::Random,
                PatternArg::JitteredLattice => Pattern::JitteredLattice,
            };
            let spec = CloudSpec {
                pattern,
                n_per_axis: n,
                n,
                radius,
                spacing,
                jitter_fraction: jitter,
                seed: cli.seed.unwrap_or(0),
                box_side: None,
            };
            let cloud = generate_cloud(&spec)?;
            let ambient = match ambient_radius {
                Some(radius) => AmbientDomain::Ball { radius },
                None => AmbientDomain::FreeSpace,
            };
            io::write_cloud(&output, &cloud, ambient)?;
            eprintln!("wrote {} inclusions to {}", cloud.len(), output.display());
        }
        Command::Validate { cloud, c } => {
            let (cloud, ambient) = io::read_cloud(&cloud)?;
            let report = validate_cloud(&cloud, &ambient, c)?;
            for w in report.warnings() {
                eprintln!("warning: {w}");
            }
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Solve { io: args, dump_system: dump } => {
            let (cloud, ambient) = io::read_cloud(&args.cloud)?;
            let source = io::read_source(&args.source)?;
            let points = io::read_points(&args.points)?;
            let model = MesoModel::new(cloud, ambient, Some(source))?;
            if let Some(dir) = dump {
                dump_system(
                    &dir,
                    model.system(),
                    Some(model.coefficients()),
                    Some(model.interaction_matrix()),
                )?;
            }
            let rows = evaluate(&points, &model, |p| model.approximate_solution(p));
            io::write_field_csv(&args.output, &rows)?;
        }
        Command::Green { io: args, freespace_form } => {
            let (cloud, ambient) = io::read_cloud(&args.cloud)?;
            let points = io::read_points(&args.points)?;
            let model = MesoModel::new(cloud, ambient, None)?;
            if freespace_form && !ambient.is_free_space() {
                return Err(Error::WrongAmbient);
            }
            let rows = evaluate(&points, &model, |p| {
                if freespace_form {
                    model.approximate_green_freespace(&args.x, p)
                } else {
                    model.approximate_green(&args.x, p)
                }
            });
            io::write_field_csv(&args.output, &rows)?;
        }
        Command::OracleU { io: args, oracle_config: cfg } => {
            let (cloud, ambient) = io::read_cloud(&args.cloud)?;
            let source = io::read_source(&args.source)?;
            let points = io::read_points(&args.points)?;
            let cfg = oracle_config(cfg.as_deref())?;
            let model = MesoModel::new(cloud.clone(), ambient, Some(source))?;
            let basis = OracleBasis::new(&cloud, &ambient, cfg)?;
            let sol = basis.solve_u(model.unperturbed().expect("model has a source"))?;
            report_oracle(&sol);
            let rows = evaluate(&points, &model, |p| {
                if let Some(j) = cloud.containing_inclusion(p) {
                    return Err(Error::InsideInclusion { index: Some(j) });
                }
                sol.value(p)
            });
            io::write_field_csv(&args.output, &rows)?;
        }
        Command::OracleGreen { io: args, oracle_config: cfg } => {
            let (cloud, ambient) = io::read_cloud(&args.cloud)?;
            let points = io::read_points(&args.points)?;
            let cfg = oracle_config(cfg.as_deref())?;
            let model = MesoModel::new(cloud.clone(), ambient, None)?;
            let basis = OracleBasis::new(&cloud, &ambient, cfg)?;
            // G_N is symmetric, so one solve with the pole at x serves every point.
            let sol = basis.solve_green(&args.x)?;
            report_oracle(&sol);
            let rows = evaluate(&points, &model, |p| {
                if let Some(j) = cloud.containing_inclusion(p) {
                    return Err(Error::InsideInclusion { index: Some(j) });
                }
                if *p == args.x {
                    return Err(Error::SingularPoint);
                }
                sol.value(p)
            });
            io::write_field_csv(&args.output, &rows)?;
        }
        Command::Converge { spec, output } => {
            let mut spec: StudySpec = io::read_json(&spec)?;
            if let Some(seed) = cli.seed {
                spec.seed = seed;
            }
            let result = run_study(&spec)?;
            for path in emit_report(&result, &output)? {
                eprintln!("wrote {}", path.display());
            }
            match result.fit {
                Some(fit) => println!("fitted slope {}", fit.slope),
                None => println!("fitted slope null"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
