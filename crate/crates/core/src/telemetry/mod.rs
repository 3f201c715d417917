//! Event log: record types, NDJSON encoding, sinks, interpolation and
//! analytics tables.

mod analytics;
mod interpolate;
mod sink;

pub use analytics::{
    activity_distribution, needs_timeseries, transport_shares, venue_heatmap, Heatmap, NeedsSeries,
    PercentTable, TRANSIT_COLUMN,
};
pub use interpolate::{interpolate, AgentTrack, Location, Tracks};
pub use sink::{bulk_body, BulkConfig, BulkHttpSink, EventSink, FileSink, HashSink, MemorySink, NullSink};

use crate::catalog::{ActionId, ActivityClass};
use crate::city_map::{Pos, VenueCategory, VenueId};
use crate::needs::NeedVector;
use crate::persona::{AgentId, CategoryCode, Employment};
use crate::social::Channel;
use crate::time::Weekday;
use crate::transport::Mode;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::BufRead;
use thiserror::Error;

/// Version stamped on every record.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TelemetryError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported schema version {0}")]
    Version(u32),
    #[error("bulk export failed: {0}")]
    Http(String),
    #[error("agent {0} has no events")]
    UnknownAgent(AgentId),
    #[error("time {t} is outside the logged range [{first}, {last}] of agent {agent}")]
    OutOfRange { agent: AgentId, t: f64, first: f64, last: f64 },
}

pub fn tile(p: Pos) -> [u16; 2] {
    [p.x, p.y]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    DayStart {
        weekday: Weekday,
        category: CategoryCode,
        employment: Employment,
        venue: VenueId,
        venue_category: VenueCategory,
        tile: [u16; 2],
        needs: NeedVector,
    },
    ActionCompleted {
        action: ActionId,
        name: String,
        class: ActivityClass,
        venue: VenueId,
        /// Absolute minute the action began.
        start: f64,
        mandatory: bool,
        /// Calendar start for mandatory tasks.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scheduled: Option<f64>,
        needs: NeedVector,
        feedback: f64,
    },
    /// A waypoint. `mode` is how the agent got here; `arrived` marks the end
    /// of a trip, and a trip's first waypoint is its departure.
    Moved {
        tile: [u16; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        venue: Option<VenueId>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        venue_category: Option<VenueCategory>,
        mode: Mode,
        arrived: bool,
    },
    Conversation {
        partner: AgentId,
        channel: Channel,
        delta_r: f64,
        r: f64,
        gained: usize,
    },
    DayEnd {
        venue: VenueId,
        tile: [u16; 2],
        needs: NeedVector,
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::DayStart { .. } => "day_start",
            EventKind::ActionCompleted { .. } => "action_completed",
            EventKind::Moved { .. } => "moved",
            EventKind::Conversation { .. } => "conversation",
            EventKind::DayEnd { .. } => "day_end",
        }
    }

    /// Need snapshot carried by the event, if any.
    pub fn needs(&self) -> Option<&NeedVector> {
        match self {
            EventKind::DayStart { needs, .. }
            | EventKind::ActionCompleted { needs, .. }
            | EventKind::DayEnd { needs, .. } => Some(needs),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub v: u32,
    pub day: u32,
    pub agent: AgentId,
    /// Absolute minute (multiples of one 15-second step).
    pub t: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl EventRecord {
    pub fn new(day: u32, agent: AgentId, t: f64, kind: EventKind) -> Self {
        Self {
            v: SCHEMA_VERSION,
            day,
            agent,
            t,
            kind,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("events always serialize")
    }
}

/// One JSON object per line.
pub fn to_ndjson(events: &[EventRecord]) -> String {
    let mut s = String::new();
    for e in events {
        s.push_str(&e.to_json());
        s.push('\n');
    }
    s
}

/// Parses an NDJSON log. Blank lines are skipped.
pub fn read_ndjson(reader: impl BufRead) -> Result<Vec<EventRecord>, TelemetryError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e: EventRecord = serde_json::from_str(&line).map_err(|err| TelemetryError::Parse {
            line: i + 1,
            message: err.to_string(),
        })?;
        if e.v != SCHEMA_VERSION {
            return Err(TelemetryError::Version(e.v));
        }
        out.push(e);
    }
    Ok(out)
}

pub fn parse_ndjson(text: &str) -> Result<Vec<EventRecord>, TelemetryError> {
    read_ndjson(text.as_bytes())
}

/// Sorts by `(day, agent, t)`, keeping emission order for ties.
pub fn canonical_order(events: &mut [EventRecord]) {
    events.sort_by(|a, b| {
        a.day
            .cmp(&b.day)
            .then(a.agent.cmp(&b.agent))
            .then(a.t.total_cmp(&b.t))
    });
}

/// SHA-256 over the canonically ordered NDJSON encoding, as lowercase hex.
pub fn log_hash(events: &[EventRecord]) -> String {
    let mut sorted = events.to_vec();
    canonical_order(&mut sorted);
    let mut h = Sha256::new();
    for e in &sorted {
        h.update(e.to_json().as_bytes());
        h.update(b"\n");
    }
    hex(&h.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample() -> Vec<EventRecord> {
        vec![
            EventRecord::new(
                0,
                AgentId(1),
                0.0,
                EventKind::DayStart {
                    weekday: Weekday::Monday,
                    category: CategoryCode(110),
                    employment: Employment::Employed,
                    venue: VenueId(3),
                    venue_category: VenueCategory::ResidentialRoom,
                    tile: [4, 5],
                    needs: NeedVector::splat(0.5),
                },
            ),
            EventRecord::new(
                0,
                AgentId(1),
                12.25,
                EventKind::Moved {
                    tile: [6, 5],
                    venue: None,
                    venue_category: None,
                    mode: Mode::Walking,
                    arrived: false,
                },
            ),
        ]
    }

    #[test]
    fn ndjson_round_trip() {
        let ev = sample();
        let text = to_ndjson(&ev);
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with(r#"{"v":1,"day":0,"agent":1,"t":0.0,"kind":"day_start""#));
        assert_eq!(parse_ndjson(&text).unwrap(), ev);
        assert_eq!(to_ndjson(&[]), "");
    }

    #[test]
    fn bad_lines_are_reported() {
        let err = parse_ndjson("{\"v\":1}\n").unwrap_err();
        assert!(matches!(err, TelemetryError::Parse { line: 1, .. }));
        let mut e = sample().remove(0);
        e.v = 2;
        assert!(matches!(parse_ndjson(&e.to_json()), Err(TelemetryError::Version(2))));
    }

    #[test]
    fn hash_ignores_cross_agent_interleaving() {
        let mut ev = sample();
        let mut other = ev[0].clone();
        other.agent = AgentId(0);
        ev.push(other.clone());
        let mut swapped = vec![other];
        swapped.extend(sample());
        assert_eq!(log_hash(&ev), log_hash(&swapped));
        assert_eq!(log_hash(&ev).len(), 64);
        assert_ne!(log_hash(&ev), log_hash(&sample()));
    }
}
