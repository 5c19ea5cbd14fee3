use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use slpos::harness::{
    coherence_and_latency_check, export_spectra_csv, read_anchors_file, run_bounds_sweep,
    run_positioning_demo, run_ranging_sweep, sweep_spectra, write_csv, CurvePoint, Link, RunConfig,
};
use slpos::positioning::Dim;
use slpos::propagation::build_scenario;
use slpos::scenario_file::{read_scenario_file, to_kv_string};
use slpos::signal::default_config;
use slpos::{Error, Vec3};

#[derive(Parser)]
#[command(
    name = "slpos",
    version,
    about = "Sidelink ranging and positioning simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SweepArgs {
    #[arg(long)]
    scenario: u8,
    /// rsu-vehicle, rsu-bicycle or vehicle-bicycle
    #[arg(long)]
    link: Link,
    #[arg(long, default_value_t = 1.5)]
    beta: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Scenario override file (key = value)
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output; printed to stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print a built-in scenario in config-file format
    Scenario {
        #[arg(long)]
        id: u8,
        #[arg(long)]
        dump: bool,
    },
    /// Monte Carlo RTT ranging sweep with bounds
    Ranging {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        no_doppler: bool,
        /// Clock-bias standard deviation, seconds
        #[arg(long, default_value_t = 1e-6)]
        clock_bias_std: f64,
        /// Also write noiseless delay spectra (long format)
        #[arg(long)]
        spectrum_out: Option<PathBuf>,
    },
    /// Range-error bounds along the trajectory (no Monte Carlo)
    Bounds {
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Multilateration demo against requirement sets
    Position {
        /// One `id x y [z]` per line
        #[arg(long)]
        anchors: PathBuf,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// True position `x,y[,z]`; defaults to the anchor centroid
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        truth: Option<Vec<f64>>,
        /// Solve in 3-D instead of the truth's horizontal plane
        #[arg(long)]
        spatial: bool,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Coherence-time and latency feasibility
    Check {
        #[arg(long, allow_negative_numbers = true)]
        vmax: f64,
        #[arg(long)]
        accuracy: f64,
    },
}

fn run_config(args: &SweepArgs) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::new(args.scenario, args.link)?;
    if let Some(path) = &args.config {
        cfg.scenario = read_scenario_file(path)?;
        if cfg.scenario.scenario_id != args.scenario {
            return Err(Error::InvalidConfig(format!(
                "config file is scenario {}, --scenario is {}",
                cfg.scenario.scenario_id, args.scenario
            )));
        }
    }
    cfg.beta = args.beta;
    cfg.seed = args.seed;
    cfg.output_path = args.out.clone();
    Ok(cfg)
}

fn emit(points: &[CurvePoint], cfg: &RunConfig) {
    match &cfg.output_path {
        Some(path) => eprintln!("wrote {} rows to {}", points.len(), path.display()),
        None => print!("{}", write_csv(points)),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Scenario { id, dump } => {
            let cfg = build_scenario(id)?;
            if dump {
                print!("{}", to_kv_string(&cfg));
            } else {
                println!(
                    "scenario {id}: {} buildings, rsu {}, horizon {:.1} s",
                    cfg.buildings.len(),
                    cfg.rsu
                        .map_or("absent".to_string(), |p| p.position.to_string()),
                    cfg.horizon()
                );
            }
        }
        Command::Ranging {
            sweep,
            trials,
            no_doppler,
            clock_bias_std,
            spectrum_out,
        } => {
            let mut cfg = run_config(&sweep)?;
            cfg.trials = trials;
            cfg.doppler_enabled = !no_doppler;
            cfg.clock_bias_std = clock_bias_std;
            let points = run_ranging_sweep(&cfg)?;
            emit(&points, &cfg);
            if let Some(path) = spectrum_out {
                export_spectra_csv(&sweep_spectra(&cfg)?, &path)?;
            }
        }
        Command::Bounds { sweep } => {
            let cfg = run_config(&sweep)?;
            let points = run_bounds_sweep(&cfg)?;
            emit(&points, &cfg);
        }
        Command::Position {
            anchors,
            sigma,
            trials,
            truth,
            spatial,
            seed,
        } => {
            let anchors = read_anchors_file(&anchors)?;
            if anchors.is_empty() {
                return Err(Error::InvalidConfig("anchor file is empty".into()));
            }
            let truth = match truth.as_deref() {
                Some([x, y]) => Vec3::new(*x, *y, 0.0),
                Some([x, y, z]) => Vec3::new(*x, *y, *z),
                Some(_) => return Err(Error::InvalidConfig("--truth takes x,y or x,y,z".into())),
                None => {
                    let n = anchors.len() as f64;
                    let sum = anchors.iter().fold(Vec3::ZERO, |s, a| s + a.position);
                    sum * (1.0 / n)
                }
            };
            let dim = if spatial {
                Dim::Spatial
            } else {
                Dim::Planar { height: truth.z }
            };
            let s = run_positioning_demo(&anchors, truth, sigma, trials, seed, dim)?;
            println!("truth: {truth}");
            println!("rmse: {:.4} m", s.rmse);
            println!("crb: {:.4} m", s.crb);
            println!("p95 error: {:.4} m", s.p95_error);
            println!("converged: {:.1}%", 100.0 * s.converged_fraction);
            for o in &s.sets {
                println!(
                    "{}: accuracy {}-{} m at {:.0}-{:.0}% -> {:.1}% within {} m: {}",
                    o.set.name,
                    o.set.accuracy.0,
                    o.set.accuracy.1,
                    100.0 * o.set.confidence.0,
                    100.0 * o.set.confidence.1,
                    100.0 * o.fraction_within,
                    o.set.accuracy.1,
                    if o.passed { "PASS" } else { "FAIL" }
                );
            }
        }
        Command::Check { vmax, accuracy } => {
            let report = coherence_and_latency_check(&default_config(), vmax, accuracy)?;
            println!("{report}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are configuration errors, not I/O failures
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
