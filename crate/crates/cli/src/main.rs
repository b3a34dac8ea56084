use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gupsim::dispersion::DispersionModel;
use gupsim::gkg::opcheck;
use gupsim::harness::{
    dispersion_table, emit_dispersion_curves, execute, packet_width_table, run_experiment, run_gkg, scan,
    write_atomic, ComparisonReport, ExperimentConfig, Format, ScanParameter,
};
use gupsim::packet::GaussianPacketSpec;

/// Relative tolerance for `gkg opcheck`.
const OPCHECK_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "gupsim", version, about = "Wave packets under GUP-modified dispersion")]
struct Cli {
    /// Print an experiment config with every default filled in, then exit.
    #[arg(long)]
    print_config: bool,
    #[arg(long, value_enum, default_value_t = ConfigFormat::Toml, requires = "print_config")]
    format: ConfigFormat,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConfigFormat {
    Toml,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the dispersion relation.
    #[command(subcommand)]
    Dispersion(DispersionCmd),
    /// Closed-form Gaussian packet widths.
    #[command(subcommand)]
    Packet(PacketCmd),
    /// Evolve the packet by Fourier synthesis and compare against theory.
    Evolve {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        emit_fields: bool,
    },
    /// Generalized Klein-Gordon solver.
    #[command(subcommand)]
    Gkg(GkgCmd),
    /// Run one experiment per parameter value.
    Scan {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_parser = parse_param)]
        param: ScanParameter,
        /// Comma-separated values, e.g. `-0.01,0,0.01`; may be empty.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_values)]
        values: Values,
    },
    /// Run the comparisons and print the JSON report without writing files.
    Report {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output.dir`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum DispersionCmd {
    /// Write `k,omega,v_g,beta,hbar_eff` rows.
    Sample {
        #[arg(long, allow_hyphen_values = true)]
        alpha_prime: f64,
        #[arg(long, allow_hyphen_values = true)]
        k_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        k_max: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        first_order: bool,
        #[command(flatten)]
        units: Units,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the exact, first-order and free curves of an experiment config.
    Curves {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct Units {
    #[arg(long, default_value_t = 1.0)]
    l_p: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
}

#[derive(Subcommand)]
enum PacketCmd {
    /// Write `t,width_exact,width_ratio,width_paper_eq17` rows.
    Analytic {
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        k0: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha_prime: f64,
        #[arg(long)]
        t_max: f64,
        #[arg(long)]
        n_t: usize,
        #[command(flatten)]
        units: Units,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GkgCmd {
    /// Evolve the `[gkg]` section of an experiment config.
    Run {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        emit_fields: bool,
    },
    /// Apply the generalized momentum operators to a plane wave.
    Opcheck {
        #[arg(long, allow_hyphen_values = true)]
        beta_prime: f64,
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
    },
}

#[derive(Clone)]
struct Values(Vec<f64>);

fn parse_values(s: &str) -> Result<Values, String> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(Values)
}

fn parse_param(s: &str) -> Result<ScanParameter, String> {
    s.parse().map_err(|e: gupsim::Error| e.to_string())
}

enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    // usage errors exit 1; 2 is reserved for failed comparisons
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match setup_threads().and_then(|_| dispatch(cli)) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn setup_threads() -> Result<()> {
    let Ok(v) = std::env::var("GUPSIM_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("GUPSIM_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn load(run: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&run.config)?;
    if let Some(dir) = &run.out_dir {
        cfg.output.dir = dir.clone();
    }
    Ok(cfg)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn summarize(report: &ComparisonReport) -> Outcome {
    for c in report.failures() {
        eprintln!(
            "FAIL {}: predicted {:e}, measured {:e}, deviation {:e} > {:e}",
            c.quantity(),
            c.predicted(),
            c.measured(),
            c.rel_dev(),
            c.tolerance()
        );
    }
    eprintln!(
        "{}: {}/{} comparisons pass",
        report.experiment_id,
        report.comparisons().iter().filter(|c| c.pass()).count(),
        report.comparisons().len()
    );
    if report.all_pass() {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn dispatch(cli: Cli) -> Result<Outcome> {
    if cli.print_config {
        let format = match cli.format {
            ConfigFormat::Toml => Format::Toml,
            ConfigFormat::Json => Format::Json,
        };
        print!("{}", ExperimentConfig::example().to_string(format)?);
        return Ok(Outcome::Pass);
    }
    let Some(command) = cli.command else {
        bail!("no subcommand given; see --help");
    };
    match command {
        Command::Dispersion(DispersionCmd::Sample {
            alpha_prime,
            k_min,
            k_max,
            n,
            first_order,
            units,
            out,
        }) => {
            let m = DispersionModel::with_units(alpha_prime, units.l_p, units.c, units.hbar)?;
            let csv = dispersion_table(&m, k_min, k_max, n, first_order)?;
            emit(csv.as_str(), out.as_deref())?;
            Ok(Outcome::Pass)
        }
        Command::Dispersion(DispersionCmd::Curves { run }) => {
            let cfg = load(&run)?;
            for p in emit_dispersion_curves(&cfg)? {
                println!("{}", p.display());
            }
            Ok(Outcome::Pass)
        }
        Command::Packet(PacketCmd::Analytic {
            alpha,
            k0,
            alpha_prime,
            t_max,
            n_t,
            units,
            out,
        }) => {
            let spec = GaussianPacketSpec::new(alpha, k0)?;
            let m = DispersionModel::with_units(alpha_prime, units.l_p, units.c, units.hbar)?;
            let csv = packet_width_table(&spec, &m, t_max, n_t)?;
            emit(csv.as_str(), out.as_deref())?;
            Ok(Outcome::Pass)
        }
        Command::Evolve { run, emit_fields } => {
            let mut cfg = load(&run)?;
            cfg.output.emit_fields |= emit_fields;
            let report = run_experiment(&cfg)?;
            Ok(summarize(&report))
        }
        Command::Gkg(GkgCmd::Run { run, emit_fields }) => {
            let mut cfg = load(&run)?;
            cfg.output.emit_fields |= emit_fields;
            let report = run_gkg(&cfg)?;
            Ok(summarize(&report))
        }
        Command::Gkg(GkgCmd::Opcheck { beta_prime, k, hbar }) => {
            let check = opcheck(beta_prime, k, hbar)?;
            println!("{}", serde_json::to_string_pretty(&check)?);
            Ok(if check.relative_error <= OPCHECK_TOL {
                Outcome::Pass
            } else {
                Outcome::Fail
            })
        }
        Command::Scan { run, param, values } => {
            let cfg = load(&run)?;
            let outcome = scan(&cfg, param, &values.0)?;
            println!("{}", outcome.summary.display());
            for p in &outcome.points {
                summarize(&p.report);
            }
            Ok(if outcome.all_pass() { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Report { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let outcome = execute(&cfg)?;
            print!("{}", outcome.report.to_json());
            Ok(summarize(&outcome.report))
        }
    }
}
