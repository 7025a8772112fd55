use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use breather_core::breather::{self, BreatherConfig, BreatherParams, IntegrationOptions};
use breather_core::config::{parse_list, ConfigFile};
use breather_core::continuum::solve_ground_state;
use breather_core::fem::fem_sweep;
use breather_core::spectral::HarmonicSet;
use breather_core::{Error, Result};

#[derive(Parser)]
#[command(name = "kgbreather", version, about = "Discrete breathers of Klein-Gordon lattices")]
struct Cli {
    /// key = value file; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Continuum ground state: profile CSV and JSON metadata.
    Groundstate {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Assemble one breather and write its files.
    Breather {
        #[command(flatten)]
        phys: Physical,
        #[arg(long)]
        mu: Option<f64>,
        #[command(flatten)]
        num: Numerics,
    },
    /// μ-sweep with log-log slope fits.
    Scaling {
        #[command(flatten)]
        phys: Physical,
        /// Comma separated, strictly decreasing.
        #[arg(long)]
        mu_list: Option<String>,
        #[command(flatten)]
        num: Numerics,
    },
    /// Re-check a stored breather, optionally by time integration.
    Validate {
        /// Breather JSON file written by `breather`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        integrate: bool,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        periods: Option<usize>,
        #[arg(long)]
        drift_bound: Option<f64>,
    },
    /// Finite-element gradient identity and potential remainder sweep.
    FemCheck {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        mu_list: Option<String>,
        #[arg(long)]
        decay_budget: Option<f64>,
    },
}

#[derive(Args)]
struct Physical {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    /// st | p (1D); st | h1 | h2 | p (2D).
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Args)]
struct Numerics {
    /// Truncation radius K.
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long = "Lmax")]
    l_max: Option<usize>,
    /// Kernel Newton tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    decay_budget: Option<f64>,
    /// Skip the Hessian diagnostics.
    #[arg(long)]
    no_hessian: bool,
}

fn required<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidParameter(format!("missing --{key} (flag or config file)")))
}

fn physical(file: &ConfigFile, phys: Physical) -> Result<(usize, f64, f64, String)> {
    Ok((
        required(file.pick(phys.n, "n")?, "n")?,
        required(file.pick(phys.p, "p")?, "p")?,
        required(file.pick(phys.a, "a")?, "a")?,
        file.pick_or(phys.mode, "mode", "st".to_string())?,
    ))
}

fn numerics(file: &ConfigFile, num: Numerics) -> Result<BreatherConfig> {
    let d = BreatherConfig::default();
    let harmonics = match file.get::<String>("harmonics")?.as_deref() {
        None | Some("odd") => HarmonicSet::Odd,
        Some("all") => HarmonicSet::All,
        Some(other) => return Err(Error::Format(format!("harmonics = {other}; expected odd or all"))),
    };
    Ok(BreatherConfig {
        l_max: file.pick_or(num.l_max, "l_max", d.l_max)?,
        harmonics,
        k: file.pick(num.k, "k")?,
        decay_budget: file.pick_or(num.decay_budget, "decay_budget", d.decay_budget)?,
        profile_tol: file.pick_or(None, "profile_tol", d.profile_tol)?,
        dnls_tol: file.pick_or(None, "dnls_tol", d.dnls_tol)?,
        kernel_tol: file.pick_or(num.tol, "kernel_tol", d.kernel_tol)?,
        range_tol: file.pick_or(None, "range_tol", d.range_tol)?,
        range_max_iter: file.pick_or(None, "range_max_iter", d.range_max_iter)?,
        samples: file.pick(None, "samples")?,
        hessian: !num.no_hessian && file.pick_or(None, "hessian", d.hessian)?,
    })
}

fn mu_list(file: &ConfigFile, flag: Option<String>) -> Result<Vec<f64>> {
    match flag {
        Some(s) => parse_list(&s),
        None => required(file.get_list("mu_list")?, "mu-list"),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), value)?;
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let out: PathBuf = file.pick_or(cli.out, "out", PathBuf::from("."))?;
    std::fs::create_dir_all(&out)?;
    match cli.cmd {
        Command::Groundstate { n, p, tol } => {
            let n = required(file.pick(n, "n")?, "n")?;
            let p = required(file.pick(p, "p")?, "p")?;
            let tol = file.pick_or(tol, "profile_tol", BreatherConfig::default().profile_tol)?;
            let gs = solve_ground_state(n, p, tol)?;
            let stem = format!("groundstate_n{n}_p{p}");
            gs.write_csv(BufWriter::new(File::create(out.join(format!("{stem}.csv")))?))?;
            gs.write_json(BufWriter::new(File::create(out.join(format!("{stem}.json")))?))?;
            print_json(&gs.meta())
        }
        Command::Breather { phys, mu, num } => {
            let (n, p, a, mode) = physical(&file, phys)?;
            let mu = required(file.pick(mu, "mu")?, "mu")?;
            let cfg = numerics(&file, num)?;
            let params = BreatherParams { n, p, a, mu, mode };
            let b = breather::assemble(&params, &cfg)?;
            let stem = format!("breather_n{n}_p{p}_{}_mu{mu}", params.mode);
            let json = b.write(&out, &stem)?;
            eprintln!("wrote {}", json.display());
            print_json(&b.report)
        }
        Command::Scaling { phys, mu_list: list, num } => {
            let (n, p, a, mode) = physical(&file, phys)?;
            let mus = mu_list(&file, list)?;
            let cfg = numerics(&file, num)?;
            let table = breather::scaling_study(n, p, a, &mode, &mus, &cfg)?;
            let stem = format!("scaling_n{n}_p{p}_{mode}");
            table.write_csv(BufWriter::new(File::create(out.join(format!("{stem}.csv")))?))?;
            write_json(&out.join(format!("{stem}.json")), &table)?;
            print_json(&table.slopes)
        }
        Command::Validate {
            input,
            integrate,
            steps,
            periods,
            drift_bound,
        } => {
            let (rec, u) = breather::load(&input)?;
            let d = IntegrationOptions::default();
            let opts = IntegrationOptions {
                steps_per_period: file.pick_or(steps, "steps", d.steps_per_period)?,
                periods: file.pick_or(periods, "periods", d.periods)?,
                drift_bound: file.pick_or(drift_bound, "drift_bound", d.drift_bound)?,
            };
            let report = breather::validate(&rec, &u, integrate.then_some(&opts))?;
            print_json(&report)
        }
        Command::FemCheck {
            n,
            p,
            mu_list: list,
            decay_budget,
        } => {
            let n = required(file.pick(n, "n")?, "n")?;
            let p = required(file.pick(p, "p")?, "p")?;
            let mus = mu_list(&file, list)?;
            let budget = file.pick_or(decay_budget, "decay_budget", 40.0)?;
            let sweep = fem_sweep(n, p, &mus, budget)?;
            let stem = format!("femcheck_n{n}_p{p}");
            let mut wr = csv::Writer::from_writer(BufWriter::new(File::create(out.join(format!("{stem}.csv")))?));
            for r in &sweep.records {
                wr.serialize(r).map_err(Error::from)?;
            }
            wr.flush()?;
            write_json(&out.join(format!("{stem}.json")), &sweep)?;
            print_json(&sweep)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
