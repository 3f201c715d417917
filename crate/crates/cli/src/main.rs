//! `citysim`: generate populations, run simulations, export analytics.

mod analyze;
mod config;
mod run;

use analyze::Report;
use citysim::city_map::{CityMap, VenueCategory, Weather};
use citysim::persona::{generate_population, PersonaError, PopulationConfig};
use citysim::scheduler::SimError;
use clap::{Args, Parser, Subcommand};
use config::{BackendKind, RunConfig, SinkKind};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(String, String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Persona(#[from] PersonaError),
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e.to_string()))
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(path.display().to_string(), e.to_string()))
}

#[derive(Parser)]
#[command(name = "citysim", version, about = "City-scale agent simulator")]
struct Cli {
    /// Log progress (info level). `RUST_LOG` overrides.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one or more days and write the event log.
    Run(RunArgs),
    /// Turn an event log into CSV tables.
    Analyze {
        /// NDJSON event log.
        log: PathBuf,
        #[arg(long, default_value = "analysis")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Report::All)]
        report: Report,
        /// Heatmap bucket width in minutes.
        #[arg(long, default_value_t = 60.0)]
        bucket: f64,
        /// Needs curve sampling step in minutes.
        #[arg(long, default_value_t = 15.0)]
        step: f64,
    },
    /// Generate a synthetic population as JSON.
    Population {
        #[arg(long, default_value_t = 40)]
        generate: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Population config (TOML); the bundled one when absent.
        #[arg(long)]
        population: Option<PathBuf>,
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long, default_value = "personas.json")]
        out: PathBuf,
        /// Print the bundled population config and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Summarise a map, or export the bundled one for editing.
    Map {
        #[arg(long)]
        map: Option<PathBuf>,
        /// Write the map document as TOML.
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Run config (TOML). Flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Map document (TOML); the bundled city when absent.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Persona list (.json) or population config (.toml).
    #[arg(long)]
    population: Option<PathBuf>,
    /// Number of agents to generate.
    #[arg(long)]
    generate: Option<usize>,
    /// Days to simulate [default: 1].
    #[arg(long)]
    days: Option<u32>,
    /// Start on Saturday.
    #[arg(long)]
    weekend: bool,
    /// sunny, cloudy or rainy, for the whole run [default: sunny].
    #[arg(long, value_parser = parse_weather)]
    weather: Option<Weather>,
    /// Air temperature in °C [default: 18].
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long, value_enum)]
    backend: Option<BackendKind>,
    /// Chat-completions URL for the remote backend.
    #[arg(long)]
    endpoint: Option<String>,
    /// Seeds the population, the scheduler and the mock backend [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    sink: Option<SinkKind>,
    /// Bulk endpoint for `--sink bulk`.
    #[arg(long)]
    bulk_url: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Abort on backend errors instead of falling back to the mock policy.
    #[arg(long)]
    strict: bool,
    /// Log every step of every trip.
    #[arg(long)]
    dense: bool,
    /// Write a checkpoint after the last day.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Continue from a checkpoint instead of building a population.
    #[arg(long)]
    resume: Option<PathBuf>,
}

fn parse_weather(s: &str) -> Result<Weather, String> {
    match s {
        "sunny" => Ok(Weather::Sunny),
        "cloudy" => Ok(Weather::Cloudy),
        "rainy" => Ok(Weather::Rainy),
        _ => Err(format!("unknown weather `{s}` (sunny, cloudy, rainy)")),
    }
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { c.$field = v; })*
            };
        }
        set!(generate, days, weather, temperature, backend, seed, sink, out);
        c.map = self.map.or(c.map);
        c.population = self.population.or(c.population);
        c.checkpoint = self.checkpoint.or(c.checkpoint);
        c.resume = self.resume.or(c.resume);
        c.weekend |= self.weekend;
        c.strict |= self.strict;
        c.sim.dense_trace |= self.dense;
        if let Some(url) = self.endpoint {
            c.remote.endpoint = url;
        }
        if let Some(url) = self.bulk_url {
            c.bulk.url = url;
        }
        Ok(c)
    }
}

fn load_map(path: Option<&Path>) -> Result<CityMap, CliError> {
    match path {
        Some(p) => CityMap::from_toml(&read(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => Ok(CityMap::default_city()),
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(args) => {
            let config = args.into_config()?;
            let report = run::cmd_run(&config)?;
            match run::print_report(&report, &config.out) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    return Err(CliError::Io("stdout".into(), e.to_string()))
                }
                _ => {}
            }
        }
        Command::Analyze { log, out, report, bucket, step } => {
            for path in analyze::cmd_analyze(&log, &out, report, bucket, step)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Population { generate, seed, population, map, out, print_config } => {
            if print_config {
                print!("{}", PopulationConfig::default_config().to_toml());
                return Ok(());
            }
            let config = match &population {
                Some(p) => PopulationConfig::from_toml(&read(p)?)?,
                None => PopulationConfig::default_config(),
            };
            let map = load_map(map.as_deref())?;
            let personas = generate_population(generate, seed, &config, &map)?;
            let json = serde_json::to_string_pretty(&personas).expect("personas serialize");
            write(&out, &json)?;
            println!("wrote {} personas to {}", personas.len(), out.display());
        }
        Command::Map { map, export } => {
            let m = load_map(map.as_deref())?;
            println!("{} x {} tiles, {} buildings, {} venues", m.width(), m.height(), m.buildings().len(), m.venues().len());
            for c in VenueCategory::ALL {
                let n = m.venues_of(c).count();
                if n > 0 {
                    println!("  {c}: {n}");
                }
            }
            println!(
                "{} PMV stations, {} bus stations, {} bus routes",
                m.pmv_stations().len(),
                m.bus_stations().len(),
                m.bus_routes().len()
            );
            if let Some(path) = export {
                write(&path, &m.document().to_toml())?;
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
