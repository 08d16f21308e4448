//! `su3g`: g sweeps, chain traces and resource reports.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 when a numerical contract
//! breaks (for example a nonpositive Monte Carlo weight), 1 for I/O failures.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use su3_gutzwiller::experiment::{self, ExperimentConfig, Method};
use su3_gutzwiller::model::{build_lattice, Geometry, ModelParams};
use su3_gutzwiller::sampling::write_trace_csv;
use su3_gutzwiller::Error;

const REVISION: &str = env!("SU3G_GIT_REVISION");

#[derive(Parser)]
#[command(name = "su3g", version, about = "Gutzwiller operator simulations for attractive SU(3) fermions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the g sweep described by a configuration file and write a CSV table.
    Run {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Output CSV; overrides `output` in the config. Stdout when neither is set.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
        #[arg(long, value_name = "N")]
        threads: Option<usize>,
        /// approach1-exact, approach1-shots, approach2-mc, approach2-enum or oracle.
        #[arg(long, value_name = "NAME")]
        method: Option<String>,
    },
    /// Dump one Monte Carlo chain as CSV (sweep, weight, O_K, O_D, O_P3).
    Trace {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Position in the g grid.
        #[arg(long, default_value_t = 0)]
        grid_index: usize,
        #[arg(long, default_value_t = 0)]
        chain: usize,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
    },
    /// Gate counts and shot budget for the half-filled Fermi sea.
    Resources {
        #[arg(long, value_enum, default_value = "chain-open")]
        geometry: GeometryArg,
        /// Chain length, or `LX,LY` for square lattices.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        hopping: f64,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        g: f64,
        /// Target statistical error.
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        /// Circuit fidelity; defaults to 0.999 per CNOT equivalent.
        #[arg(long)]
        fidelity: Option<f64>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum GeometryArg {
    ChainOpen,
    ChainPeriodic,
    SquarePeriodic,
}

impl From<GeometryArg> for Geometry {
    fn from(g: GeometryArg) -> Self {
        match g {
            GeometryArg::ChainOpen => Geometry::ChainOpen,
            GeometryArg::ChainPeriodic => Geometry::ChainPeriodic,
            GeometryArg::SquarePeriodic => Geometry::SquarePeriodic,
        }
    }
}

enum Failure {
    Io(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn load_config(path: &Path, seed: Option<u64>, method: Option<&str>) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut config = ExperimentConfig::from_toml(&text)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(m) = method {
        config.method = m.parse::<Method>()?;
        config.validate()?;
    }
    Ok(config)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, out, seed, threads, method } => {
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            }
            let config = load_config(&config, seed, method.as_deref())?;
            let rows = experiment::run_experiment(&config)?;
            let out = out.or_else(|| config.output.clone());
            let mut w = open_output(out.as_deref())?;
            experiment::write_csv(&config, REVISION, &rows, &mut w)?;
            w.flush()?;
            if let Some(p) = out {
                eprintln!("{} rows ({}) written to {}", rows.len(), config.method.name(), p.display());
            }
        }
        Command::Trace { config, grid_index, chain, out, seed } => {
            let config = load_config(&config, seed, Some(Method::Approach2Mc.name()))?;
            let rows = experiment::chain_trace(&config, grid_index, chain)?;
            let mut w = open_output(out.as_deref())?;
            write_trace_csv(&rows, &mut w)?;
            w.flush()?;
        }
        Command::Resources { geometry, dims, hopping, g, epsilon, fidelity } => {
            let lattice = build_lattice(geometry.into(), &dims)?;
            let params = ModelParams::new(hopping, -1.0)?;
            let r = experiment::resource_report(&lattice, &params, g, epsilon, fidelity)?;
            let opt = |x: Option<String>| x.unwrap_or_else(|| "n/a".into());
            let mut w = io::stdout().lock();
            writeln!(w, "sites                  {}", r.gates.n_site)?;
            writeln!(w, "gutzwiller_block_cnots {}", r.gates.gutzwiller_block)?;
            writeln!(w, "fswaps_per_network     {}", r.gates.fswaps_per_network)?;
            writeln!(w, "relabeling_cnots       {}", r.gates.relabeling)?;
            writeln!(w, "trial_prep_bound       {}", r.gates.trial_prep_bound)?;
            writeln!(w, "trial_prep_actual      {}", opt(r.gates.trial_prep_actual.map(|x| x.to_string())))?;
            writeln!(w, "total_cnots            {}", r.gates.total)?;
            writeln!(w, "fidelity               {:.6}", r.fidelity)?;
            writeln!(w, "g                      {}", r.g)?;
            writeln!(w, "p0                     {}", opt(r.p0.map(|p| format!("{p:.10}"))))?;
            writeln!(w, "epsilon                {}", r.epsilon)?;
            writeln!(w, "shots                  {}", opt(r.shots.map(|s| s.to_string())))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
