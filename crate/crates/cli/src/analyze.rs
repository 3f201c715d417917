use crate::{write, CliError};
use citysim::telemetry::{
    activity_distribution, needs_timeseries, transport_shares, venue_heatmap, EventRecord, SCHEMA_VERSION,
};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Report {
    All,
    /// Agents per venue category per time bucket.
    Heatmap,
    /// Time share per activity class, by demographic category.
    Activity,
    /// Travel time share per mode, by demographic category.
    Transport,
    /// Mean need curves per employment group.
    Needs,
}

/// A parsed log and whether reading stopped early.
pub struct LoadedLog {
    pub events: Vec<EventRecord>,
    /// 1-based line at which reading stopped, if it did.
    pub stopped_at: Option<usize>,
}

/// Reads an NDJSON log, keeping everything before the first unreadable
/// line. A wrong schema version is an error.
pub fn load_log(path: &Path) -> Result<LoadedLog, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Io(path.display().to_string(), e.to_string()))?;
    let mut events = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let Ok(line) = line else {
            return Ok(LoadedLog { events, stopped_at: Some(i + 1) });
        };
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<EventRecord>(&line) {
            Ok(e) if e.v != SCHEMA_VERSION => {
                return Err(CliError::Input(format!(
                    "{} line {}: schema version {} (expected {SCHEMA_VERSION})",
                    path.display(),
                    i + 1,
                    e.v
                )))
            }
            Ok(e) => events.push(e),
            Err(err) => {
                log::debug!("line {}: {err}", i + 1);
                return Ok(LoadedLog { events, stopped_at: Some(i + 1) });
            }
        }
    }
    Ok(LoadedLog { events, stopped_at: None })
}

/// Writes the requested tables into `out` and returns their paths.
pub fn cmd_analyze(
    log: &Path,
    out: &Path,
    report: Report,
    bucket_minutes: f64,
    step_minutes: f64,
) -> Result<Vec<PathBuf>, CliError> {
    if !(bucket_minutes > 0.0 && step_minutes > 0.0) {
        return Err(CliError::Config("bucket and step must be positive".into()));
    }
    let loaded = load_log(log)?;
    if let Some(line) = loaded.stopped_at {
        log::warn!(
            "{}: unreadable from line {line}; partial report from {} events",
            log.display(),
            loaded.events.len()
        );
    }
    if loaded.events.is_empty() {
        return Err(CliError::Input(format!("{}: no events", log.display())));
    }
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(out.display().to_string(), e.to_string()))?;
    let ev = &loaded.events;
    let wanted = |r: Report| report == Report::All || report == r;
    let mut written = Vec::new();
    let mut emit = |name: &str, csv: String| -> Result<(), CliError> {
        let path = out.join(name);
        write(&path, &csv)?;
        written.push(path);
        Ok(())
    };
    if wanted(Report::Heatmap) {
        emit("heatmap.csv", venue_heatmap(ev, bucket_minutes).to_csv())?;
    }
    if wanted(Report::Activity) {
        emit("activity.csv", activity_distribution(ev).to_csv())?;
    }
    if wanted(Report::Transport) {
        emit("transport.csv", transport_shares(ev).to_csv())?;
    }
    if wanted(Report::Needs) {
        emit("needs.csv", needs_timeseries(ev, step_minutes).to_csv())?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_logs_keep_the_readable_prefix() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.ndjson");
        let line = r#"{"v":1,"day":0,"agent":0,"t":0.0,"kind":"moved","tile":[1,2],"mode":"walking","arrived":false}"#;
        std::fs::write(&path, format!("{line}\n\n{line}\n{}", &line[..20])).unwrap();
        let log = load_log(&path).unwrap();
        assert_eq!((log.events.len(), log.stopped_at), (2, Some(4)));
        std::fs::write(&path, line.replace("\"v\":1", "\"v\":9")).unwrap();
        assert!(load_log(&path).is_err());
    }
}
