use crate::config::{is_json, BackendKind, RunConfig, SinkKind};
use crate::{read, write, CliError};
use citysim::catalog::Catalog;
use citysim::city_map::{CityMap, EnvironmentState};
use citysim::decision::{
    build_prompt, whitespace_tokens, BackendError, BackendStats, DecisionBackend, DecisionRequest, DecisionResponse,
    MockBackend, RemoteBackend,
};
use citysim::persona::{generate_population, Persona, PopulationConfig};
use citysim::scheduler::{Checkpoint, DaySummary, Simulation, World};
use citysim::social::{build_conversation_prompt, ConversationTask, Exchange};
use citysim::telemetry::{BulkHttpSink, EventSink, FileSink, HashSink, NullSink};
use citysim::time::Weekday;
use serde::Serialize;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

/// Counts batches and estimates prompt tokens for any backend.
struct Metered {
    inner: Box<dyn DecisionBackend>,
    calls: AtomicU64,
    requests: AtomicU64,
    prompt_tokens: AtomicU64,
}

impl Metered {
    fn new(inner: Box<dyn DecisionBackend>) -> Self {
        Self {
            inner,
            calls: AtomicU64::new(0),
            requests: AtomicU64::new(0),
            prompt_tokens: AtomicU64::new(0),
        }
    }

    fn count(&self, n: usize, tokens: usize) {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.requests.fetch_add(n as u64, Ordering::Relaxed);
        self.prompt_tokens.fetch_add(tokens as u64, Ordering::Relaxed);
    }

    /// `(batches, requests, estimated prompt tokens)`.
    fn counts(&self) -> (u64, u64, u64) {
        (
            self.calls.load(Ordering::Relaxed),
            self.requests.load(Ordering::Relaxed),
            self.prompt_tokens.load(Ordering::Relaxed),
        )
    }
}

impl DecisionBackend for Metered {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn decide_batch(&self, batch: &[DecisionRequest]) -> Vec<Result<DecisionResponse, BackendError>> {
        let tokens = batch.iter().map(|r| whitespace_tokens(&build_prompt(r))).sum();
        self.count(batch.len(), tokens);
        self.inner.decide_batch(batch)
    }

    fn communicate_batch(&self, batch: &[ConversationTask]) -> Vec<Result<Exchange, BackendError>> {
        let tokens = batch.iter().map(|t| whitespace_tokens(&build_conversation_prompt(t))).sum();
        self.count(batch.len(), tokens);
        self.inner.communicate_batch(batch)
    }

    fn stats(&self) -> BackendStats {
        self.inner.stats()
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub agents: usize,
    pub days: u32,
    pub start: Weekday,
    pub seed: u64,
    pub backend: String,
    pub wall_clock_seconds: f64,
    pub backend_calls: u64,
    pub backend_requests: u64,
    pub estimated_prompt_tokens: u64,
    pub remote: BackendStats,
    pub totals: DaySummary,
    pub per_day: Vec<DaySummary>,
    pub events: u64,
    pub log_hash: String,
}

fn load_world(config: &RunConfig) -> Result<World, CliError> {
    let map = match &config.map {
        Some(p) => CityMap::from_toml(&read(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        None => CityMap::default_city(),
    };
    World::new(map, Catalog::default_catalog()).map_err(CliError::Sim)
}

pub fn load_personas(config: &RunConfig, map: &CityMap) -> Result<Vec<Persona>, CliError> {
    match &config.population {
        Some(p) if is_json(p) => {
            serde_json::from_str(&read(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        }
        Some(p) => {
            let pop = PopulationConfig::from_toml(&read(p)?)
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            generate_population(config.generate, config.seed, &pop, map).map_err(CliError::from)
        }
        None => generate_population(config.generate, config.seed, &PopulationConfig::default_config(), map)
            .map_err(CliError::from),
    }
}

fn open_sink(config: &RunConfig) -> Result<Box<dyn EventSink>, CliError> {
    Ok(match config.sink {
        SinkKind::File => {
            let path = config.out.join("events.ndjson");
            Box::new(FileSink::create(&path).map_err(|e| CliError::Io(path.display().to_string(), e.to_string()))?)
        }
        SinkKind::Bulk => Box::new(BulkHttpSink::new(config.bulk.clone())),
        SinkKind::Null => Box::new(NullSink),
    })
}

pub fn cmd_run(config: &RunConfig) -> Result<RunReport, CliError> {
    config.validate()?;
    std::fs::create_dir_all(&config.out)
        .map_err(|e| CliError::Io(config.out.display().to_string(), e.to_string()))?;
    let world = load_world(config)?;
    let mut sim_config = config.sim.clone();
    sim_config.seed = config.seed;
    sim_config.strict = config.strict;
    let mut sim = match &config.resume {
        Some(p) => {
            let mut cp = Checkpoint::load(p)?;
            cp.config = sim_config;
            Simulation::from_checkpoint(&world, cp)?
        }
        None => {
            let personas = load_personas(config, &world.map)?;
            let start = if config.weekend { Weekday::Saturday } else { Weekday::Monday };
            Simulation::new(&world, personas, sim_config, start)?
        }
    };
    let start = sim.weekday();
    let agents = sim.agents().len();
    let metered = Metered::new(match config.backend {
        BackendKind::Mock => Box::new(MockBackend::new(config.seed)),
        BackendKind::Remote => Box::new(RemoteBackend::new(config.remote.clone())),
    });
    let mut sink = HashSink::new(open_sink(config)?);

    let t0 = Instant::now();
    let mut per_day = Vec::new();
    let mut totals = DaySummary::default();
    for _ in 0..config.days {
        let env = EnvironmentState::constant(sim.weekday(), config.weather, config.temperature);
        let weekday = sim.weekday();
        let s = sim.run_day(&env, &metered, &mut sink)?;
        log::info!("day {} ({weekday}): {} decisions, {} events", s.day, s.decisions, s.events);
        if s.fallbacks > 0 {
            log::warn!(
                "day {}: {} backend requests failed and fell back to the mock policy",
                s.day,
                s.fallbacks
            );
        }
        totals.add(&s);
        totals.day = s.day;
        per_day.push(s);
    }
    let elapsed = t0.elapsed().as_secs_f64();
    if let Some(p) = &config.checkpoint {
        sim.checkpoint().save(p)?;
    }
    let (calls, requests, prompt_tokens) = metered.counts();
    let report = RunReport {
        agents,
        days: config.days,
        start,
        seed: config.seed,
        backend: metered.name().to_string(),
        wall_clock_seconds: elapsed,
        backend_calls: calls,
        backend_requests: requests,
        estimated_prompt_tokens: prompt_tokens,
        remote: metered.stats(),
        totals,
        per_day,
        events: sink.events(),
        log_hash: sink.hex(),
    };
    let summary = serde_json::to_string_pretty(&report).expect("report serializes");
    write(&config.out.join("summary.json"), &summary)?;
    Ok(report)
}

pub fn print_report(r: &RunReport, out: &Path) -> std::io::Result<()> {
    let mut w = std::io::stdout().lock();
    writeln!(
        w,
        "simulated {} agents for {} day(s) from {} (backend {}, seed {})",
        r.agents, r.days, r.start, r.backend, r.seed
    )?;
    writeln!(w, "wall-clock: {:.3} s", r.wall_clock_seconds)?;
    writeln!(
        w,
        "backend calls: {} ({} requests, {} conversation batches)",
        r.backend_calls, r.backend_requests, r.totals.conversation_dispatches
    )?;
    writeln!(
        w,
        "tokens: ~{} prompt (whitespace estimate); remote usage {} prompt / {} completion",
        r.estimated_prompt_tokens, r.remote.prompt_tokens, r.remote.completion_tokens
    )?;
    writeln!(
        w,
        "decisions {}, conversations {}, fallbacks {}, late starts {}",
        r.totals.decisions, r.totals.conversations, r.totals.fallbacks, r.totals.late_starts
    )?;
    writeln!(w, "events: {}  log hash: {}", r.events, r.log_hash)?;
    writeln!(w, "summary: {}", out.join("summary.json").display())?;
    Ok(())
}
