use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use polyflow::energetics::{entropy_pathology_demo, pathology_bound_sum};
use polyflow::runner::{self, load_config, with_overrides, RunReport, SelftestOptions};

#[derive(Parser)]
#[command(name = "polyflow", version, about = "Coupled Navier-Stokes / Fokker-Planck polymer flow laboratory")]
struct Cli {
    /// Directory for energy.csv, closure.csv and snapshots (overrides the config).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Random seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration.
    Run { config: PathBuf },
    /// Kinetic and Oldroyd-B side by side; prints the stress mismatch.
    VerifyClosure { config: PathBuf },
    /// Relax toward equilibrium with the flow at rest.
    Relax { config: PathBuf },
    /// Entropy of the heat flow started from a zero-entropy bump train.
    Pathology {
        #[arg(long, default_value_t = 1000)]
        nmax: usize,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Built-in example battery.
    Selftest,
    /// Moment toolkit battery.
    MomentsSelftest,
}

fn summarize(r: &RunReport) {
    println!("t = {}  steps = {}  rejections = {}", r.t, r.steps, r.rejections);
    if let Some(e) = r.energy.last() {
        println!("kinetic = {:.6e}  free_energy = {:.6e}", e.kinetic, e.free_energy);
    }
    println!("mass drift = {:.3e}  max clipped mass = {:.3e}", r.mass_drift, r.max_clipped_mass);
}

fn execute(cli: Cli) -> polyflow::Result<bool> {
    let load = |p: &PathBuf| -> polyflow::Result<_> { Ok(with_overrides(load_config(p)?, cli.output_dir.clone(), cli.seed)) };
    match &cli.command {
        Command::Run { config } => {
            let r = runner::run(load(config)?)?;
            if !cli.quiet {
                summarize(&r);
            }
            Ok(true)
        }
        Command::VerifyClosure { config } => {
            let r = runner::verify_closure(load(config)?)?;
            if !cli.quiet {
                println!("t,l2_diff,linf_diff");
                for row in &r.closure {
                    println!("{},{:.6e},{:.6e}", row.t, row.l2_diff, row.linf_diff);
                }
            }
            Ok(true)
        }
        Command::Relax { config } => {
            let r = runner::relax(load(config)?)?;
            if !cli.quiet {
                println!("t = {}", r.t);
                println!("L1 distance to equilibrium: {:.6e} -> {:.6e}", r.l1_initial, r.l1_final);
                println!("max |sigma - rho I| = {:.6e}", r.stress_deviation);
                if let (Some(a), Some(b)) = (r.analytic_difference, r.analytic_difference_rate_2eps) {
                    println!("difference to Oldroyd-B decay, rate 4 eps: {a:.6e}; rate 2 eps: {b:.6e}");
                }
            }
            Ok(true)
        }
        Command::Pathology { nmax, t } => {
            let v = entropy_pathology_demo(*nmax, *t);
            if !cli.quiet {
                println!("entropy at t = {t} with {nmax} bumps: {v:.6}");
                println!("lower bound 2 sum a log a: {:.6}", pathology_bound_sum(*nmax));
            }
            Ok(true)
        }
        Command::Selftest => {
            let s = runner::selftest_with(SelftestOptions { seed: cli.seed.unwrap_or(0), ..Default::default() });
            if !cli.quiet || !s.passed() {
                println!("{s}");
            }
            Ok(s.passed())
        }
        Command::MomentsSelftest => {
            let s = runner::moments_selftest(cli.seed.unwrap_or(0));
            if !cli.quiet || !s.passed() {
                println!("{s}");
            }
            Ok(s.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
