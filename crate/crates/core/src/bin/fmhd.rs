//! `fmhd` command-line driver.
//!
//! Exit status: 0 pass, 1 threshold failure, 2 blow-up (or a Gronwall bound
//! past its breakdown), 3 usage or configuration error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fmhd::diagnostics::{breakdown_time, gronwall_bound, BetaSamples, GSpec, GronwallBound};
use fmhd::harness::{
    convergence_study, identity_command, parse_config_with, run, stability_study, write_study,
    Outcome, SimConfig, StudyResult,
};
use fmhd::Error;

const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "fmhd",
    version,
    about = "Pseudo-spectral ferromagnetic MHD simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration and write diagnostics and checkpoints.
    Run(ConfigArgs),
    /// Compare runs over increasing Galerkin truncations.
    Convergence {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated truncations, increasing.
        #[arg(long = "k", value_delimiter = ',', required = true)]
        k: Vec<f64>,
    },
    /// Twin runs with perturbed initial velocity.
    Stability {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated perturbation sizes.
        #[arg(long, value_delimiter = ',', default_value = "1e-3,1e-4,1e-5,1e-6")]
        deltas: Vec<f64>,
    },
    /// Check the vector-calculus identities on random fields.
    Identities {
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Use all-zero fields.
        #[arg(long)]
        zero: bool,
        /// Flip a sign in the curl-of-cross check; the suite must then fail.
        #[arg(long)]
        mis_signed: bool,
    },
    /// Evaluate the generalised Gronwall bound.
    Gronwall(GronwallArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML config; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set grid.n=32`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct GronwallArgs {
    #[arg(long)]
    alpha: f64,
    /// g(s) = s^p.
    #[arg(long, conflicts_with = "g_table", required_unless_present = "g_table")]
    g_power: Option<f64>,
    /// CSV with columns s,g tabulating a nondecreasing g.
    #[arg(long)]
    g_table: Option<PathBuf>,
    /// β ≡ c on [a, t].
    #[arg(
        long,
        conflicts_with = "beta_file",
        required_unless_present = "beta_file"
    )]
    beta_const: Option<f64>,
    /// CSV with columns t,beta.
    #[arg(long)]
    beta_file: Option<PathBuf>,
    /// Start of the interval for --beta-const.
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    #[arg(long)]
    t: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn load(args: &ConfigArgs) -> Result<SimConfig, Error> {
    let text = match &args.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    parse_config_with(&text, &args.set)
}

fn report(study: &StudyResult, dir: &Path) -> Result<u8, Error> {
    print!("{}", study.table());
    write_study(dir, study)?;
    Ok(study.outcome as u8)
}

fn execute(command: Command) -> Result<u8, Error> {
    match command {
        Command::Run(args) => {
            let config = load(&args)?;
            let dir = config.resolved_output_dir();
            let out = run(&config, Some(&dir))?;
            print!("{}", out.study.table());
            Ok(out.study.outcome as u8)
        }
        Command::Convergence { config, k } => {
            let config = load(&config)?;
            let study = convergence_study(&config, &k)?;
            report(&study, &config.resolved_output_dir())
        }
        Command::Stability { config, deltas } => {
            let config = load(&config)?;
            let study = stability_study(&config, &deltas)?;
            report(&study, &config.resolved_output_dir())
        }
        Command::Identities {
            n,
            seed,
            zero,
            mis_signed,
        } => {
            let (table, study) = identity_command(n, seed, zero, mis_signed)?;
            print!("{}", table.table());
            Ok(study.outcome as u8)
        }
        Command::Gronwall(args) => gronwall(args),
    }
}

fn read_pairs(path: &Path, first: &str, second: &str) -> Result<(Vec<f64>, Vec<f64>), Error> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Input(format!("{}: missing column `{name}`", path.display())))
    };
    let (i, j) = (col(first)?, col(second)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for rec in reader.records() {
        let rec = rec?;
        let parse = |k: usize| {
            rec.get(k)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    Error::Input(format!("{}: bad number in row {rec:?}", path.display()))
                })
        };
        xs.push(parse(i)?);
        ys.push(parse(j)?);
    }
    Ok((xs, ys))
}

fn gronwall(args: GronwallArgs) -> Result<u8, Error> {
    let g = match (args.g_power, &args.g_table) {
        (Some(p), _) => GSpec::Power(p),
        (None, Some(path)) => {
            let (s, g) = read_pairs(path, "s", "g")?;
            GSpec::Tabulated { s, g }
        }
        (None, None) => unreachable!("clap requires one of --g-power, --g-table"),
    };
    let beta = match (args.beta_const, &args.beta_file) {
        (Some(c), _) => {
            if args.t < args.a {
                return Err(Error::Input(format!(
                    "--t {} precedes --a {}",
                    args.t, args.a
                )));
            }
            BetaSamples::constant(c, args.a, args.t.max(args.a + f64::EPSILON))?
        }
        (None, Some(path)) => {
            let (t, b) = read_pairs(path, "t", "beta")?;
            BetaSamples::new(t, b)?
        }
        (None, None) => unreachable!("clap requires one of --beta-const, --beta-file"),
    };
    let bound = gronwall_bound(args.alpha, &beta, &g, args.t)?;
    let breakdown = breakdown_time(args.alpha, &beta, &g)?;
    match bound {
        GronwallBound::Bound(x) => {
            println!("bound {x:?}");
            if let Some(t) = breakdown {
                println!("breakdown_time {t:?}");
            }
            Ok(Outcome::Pass as u8)
        }
        GronwallBound::OutOfDomain { integral, limit } => {
            println!("out-of-domain");
            println!("beta_integral {integral:?}");
            println!("g_range_limit {limit:?}");
            if let Some(t) = breakdown {
                println!("breakdown_time {t:?}");
            }
            Ok(Outcome::BlowUp as u8)
        }
    }
}
