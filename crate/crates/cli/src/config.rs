use crate::CliError;
use citysim::city_map::Weather;
use citysim::decision::RemoteConfig;
use citysim::scheduler::SimConfig;
use citysim::telemetry::BulkConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Mock,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SinkKind {
    /// NDJSON file `events.ndjson` in the output directory.
    File,
    /// Bulk-indexing HTTP endpoint (see `[bulk]`).
    Bulk,
    /// Discard events; only the summary is written.
    Null,
}

/// Everything `citysim run` needs. Loaded from TOML; command-line flags
/// override individual fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Map document; the bundled city when absent.
    pub map: Option<PathBuf>,
    /// Either a persona list (`.json`, as written by `citysim population`)
    /// or a population config (`.toml`) to generate from.
    pub population: Option<PathBuf>,
    /// Agents to generate when `population` is not a persona list.
    pub generate: usize,
    pub days: u32,
    /// Start on Saturday instead of Monday.
    pub weekend: bool,
    pub weather: Weather,
    pub temperature: f64,
    pub backend: BackendKind,
    /// Seeds population generation and the scheduler.
    pub seed: u64,
    pub sink: SinkKind,
    pub out: PathBuf,
    pub strict: bool,
    /// Write a checkpoint here after the last day.
    pub checkpoint: Option<PathBuf>,
    /// Continue from a checkpoint instead of building a new population.
    pub resume: Option<PathBuf>,
    pub sim: SimConfig,
    pub remote: RemoteConfig,
    pub bulk: BulkConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            map: None,
            population: None,
            generate: 40,
            days: 1,
            weekend: false,
            weather: Weather::Sunny,
            temperature: 18.0,
            backend: BackendKind::Mock,
            seed: 0,
            sink: SinkKind::File,
            out: PathBuf::from("out"),
            strict: false,
            checkpoint: None,
            resume: None,
            sim: SimConfig::default(),
            remote: RemoteConfig::default(),
            bulk: BulkConfig::default(),
        }
    }
}

impl RunConfig {
    /// Reads a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = crate::read(path)?;
        let mut c: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut c.map, &mut c.population, &mut c.checkpoint, &mut c.resume]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if c.out.is_relative() {
            c.out = base.join(&c.out);
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for p in [&self.map, &self.population, &self.resume].into_iter().flatten() {
            if !p.is_file() {
                return Err(CliError::Config(format!("{} does not exist", p.display())));
            }
        }
        if self.days == 0 {
            return Err(CliError::Config("days must be at least 1".into()));
        }
        let persona_list = self.population.as_ref().is_some_and(|p| is_json(p));
        if self.resume.is_none() && !persona_list && self.generate == 0 {
            return Err(CliError::Config("generate must be at least 1".into()));
        }
        if self.sim.batch_size == 0 || self.sim.conversation_batch_size == 0 {
            return Err(CliError::Config("batch sizes must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let c = RunConfig::default();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(toml::from_str::<RunConfig>(&text).unwrap(), c);
    }

    #[test]
    fn partial_files_fill_defaults_and_resolve_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "days = 2\nout = \"res\"\n[sim]\nbatch_size = 8\n").unwrap();
        let c = RunConfig::load(&path).unwrap();
        assert_eq!((c.days, c.sim.batch_size, c.generate), (2, 8, 40));
        assert_eq!(c.out, dir.path().join("res"));
        std::fs::write(&path, "dayz = 2\n").unwrap();
        assert!(matches!(RunConfig::load(&path), Err(CliError::Config(_))));
    }

    #[test]
    fn missing_files_are_rejected() {
        let c = RunConfig {
            map: Some(PathBuf::from("/nonexistent/map.toml")),
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        assert!(RunConfig { days: 0, ..RunConfig::default() }.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }
}
