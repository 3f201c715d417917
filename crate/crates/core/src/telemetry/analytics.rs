use super::interpolate::{Location, Tracks};
use super::{EventKind, EventRecord};
use crate::catalog::ActivityClass;
use crate::city_map::VenueCategory;
use crate::needs::{Need, NEED_COUNT};
use crate::persona::{CategoryCode, Employment};
use crate::time::{format_hhmm, MINUTES_PER_DAY};
use crate::transport::Mode;
use std::collections::BTreeMap;
use std::fmt::Write;

pub const TRANSIT_COLUMN: &str = "transit";

/// Agent counts per time bucket and venue category.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub bucket_minutes: f64,
    pub columns: Vec<String>,
    /// `(bucket start, counts)`, start in absolute minutes.
    pub rows: Vec<(f64, Vec<u32>)>,
}

impl Heatmap {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Index of the largest count in `row`, ties to the earlier column.
    pub fn modal_column(&self, row: usize) -> usize {
        let counts = &self.rows[row].1;
        let mut best = 0;
        for (i, &c) in counts.iter().enumerate() {
            if c > counts[best] {
                best = i;
            }
        }
        best
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("start,day,time,{}\n", self.columns.join(","));
        for (start, counts) in &self.rows {
            let day = (start / MINUTES_PER_DAY).floor();
            let _ = write!(s, "{start},{day},{}", format_hhmm(start - day * MINUTES_PER_DAY));
            for c in counts {
                let _ = write!(s, ",{c}");
            }
            s.push('\n');
        }
        s
    }
}

/// Where every logged agent is at the start of each bucket.
pub fn venue_heatmap(log: &[EventRecord], bucket_minutes: f64) -> Heatmap {
    let tracks = Tracks::build(log);
    heatmap_from_tracks(&tracks, bucket_minutes)
}

fn heatmap_from_tracks(tracks: &Tracks, bucket_minutes: f64) -> Heatmap {
    let mut columns: Vec<String> = VenueCategory::ALL.iter().map(|c| c.as_str().to_string()).collect();
    columns.push(TRANSIT_COLUMN.to_string());
    let transit = columns.len() - 1;
    let mut rows = Vec::new();
    let bucket = if bucket_minutes > 0.0 { bucket_minutes } else { 30.0 };
    let first = tracks.agents.values().map(|t| t.first).fold(f64::INFINITY, f64::min);
    let last = tracks.agents.values().map(|t| t.last).fold(f64::NEG_INFINITY, f64::max);
    if first.is_finite() {
        let mut t = (first / bucket).floor() * bucket;
        while t < last {
            let mut counts = vec![0u32; columns.len()];
            for tr in tracks.agents.values() {
                if !tr.covers(t) {
                    continue;
                }
                let col = match tr.location_at(t).expect("covered") {
                    Location::Venue(cat, _) => cat as usize,
                    Location::Transit => transit,
                };
                counts[col] += 1;
            }
            rows.push((t, counts));
            t += bucket;
        }
    }
    Heatmap {
        bucket_minutes: bucket,
        columns,
        rows,
    }
}

/// Row-normalised percentages keyed by a label.
#[derive(Debug, Clone, PartialEq)]
pub struct PercentTable {
    pub key: String,
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

impl PercentTable {
    fn from_minutes(key: &str, columns: Vec<String>, minutes: BTreeMap<String, Vec<f64>>) -> Self {
        let rows = minutes
            .into_iter()
            .filter_map(|(label, m)| {
                let total: f64 = m.iter().sum();
                (total > 0.0).then(|| (label, m.iter().map(|x| 100.0 * x / total).collect()))
            })
            .collect();
        Self {
            key: key.to_string(),
            columns,
            rows,
        }
    }

    pub fn row(&self, label: &str) -> Option<&[f64]> {
        self.rows.iter().find(|(l, _)| l == label).map(|(_, v)| v.as_slice())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{},{}\n", self.key, self.columns.join(","));
        for (label, values) in &self.rows {
            s.push_str(label);
            for v in values {
                let _ = write!(s, ",{v:.4}");
            }
            s.push('\n');
        }
        s
    }
}

fn by_agent(log: &[EventRecord]) -> BTreeMap<crate::persona::AgentId, Vec<&EventRecord>> {
    let mut m: BTreeMap<_, Vec<&EventRecord>> = BTreeMap::new();
    for e in log {
        m.entry(e.agent).or_default().push(e);
    }
    for v in m.values_mut() {
        v.sort_by(|a, b| a.day.cmp(&b.day).then(a.t.total_cmp(&b.t)));
    }
    m
}

fn category_of(events: &[&EventRecord]) -> Option<CategoryCode> {
    events.iter().find_map(|e| match &e.kind {
        EventKind::DayStart { category, .. } => Some(*category),
        _ => None,
    })
}

/// Percent of accounted time per activity class for each demographic
/// category. Travel time counts as its own class; waiting is not counted.
pub fn activity_distribution(log: &[EventRecord]) -> PercentTable {
    let columns: Vec<String> = ActivityClass::ALL.iter().map(|c| c.as_str().to_string()).collect();
    let mut minutes: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for events in by_agent(log).values() {
        let Some(cat) = category_of(events) else { continue };
        let row = minutes
            .entry(cat.to_string())
            .or_insert_with(|| vec![0.0; columns.len()]);
        let mut trip_start = None;
        for e in events {
            match &e.kind {
                EventKind::ActionCompleted { class, start, .. } => {
                    row[*class as usize] += e.t - start;
                }
                EventKind::Moved { arrived, .. } => match (trip_start, arrived) {
                    (None, false) => trip_start = Some(e.t),
                    (Some(s), true) => {
                        row[ActivityClass::Travel as usize] += e.t - s;
                        trip_start = None;
                    }
                    _ => {}
                },
                _ => {}
            }
        }
    }
    PercentTable::from_minutes("category", columns, minutes)
}

/// Percent of travel time per mode for each demographic category. Each
/// segment between waypoints counts toward the mode of its later waypoint.
pub fn transport_shares(log: &[EventRecord]) -> PercentTable {
    let columns: Vec<String> = Mode::ALL.iter().map(|m| m.as_str().to_string()).collect();
    let mut minutes: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for events in by_agent(log).values() {
        let Some(cat) = category_of(events) else { continue };
        let row = minutes
            .entry(cat.to_string())
            .or_insert_with(|| vec![0.0; columns.len()]);
        let mut prev: Option<f64> = None;
        for e in events {
            if let EventKind::Moved { mode, arrived, .. } = &e.kind {
                if let Some(p) = prev {
                    row[mode.index()] += e.t - p;
                }
                prev = if *arrived { None } else { Some(e.t) };
            }
        }
    }
    PercentTable::from_minutes("category", columns, minutes)
}

/// Mean need curves per employment group, sampled every `step` minutes of
/// the day and averaged over every logged agent-day.
#[derive(Debug, Clone, PartialEq)]
pub struct NeedsSeries {
    pub step_minutes: f64,
    /// `(group, points)`; each point is the mean vector at `k·step`.
    pub groups: Vec<(String, Vec<[f64; NEED_COUNT]>)>,
}

impl NeedsSeries {
    pub fn group(&self, name: &str) -> Option<&[[f64; NEED_COUNT]]> {
        self.groups.iter().find(|(g, _)| g == name).map(|(_, v)| v.as_slice())
    }

    pub fn to_csv(&self) -> String {
        let names: Vec<&str> = Need::ALL.iter().map(|n| n.as_str()).collect();
        let mut s = format!("group,minute,time,{}\n", names.join(","));
        for (g, points) in &self.groups {
            for (k, p) in points.iter().enumerate() {
                let m = k as f64 * self.step_minutes;
                let _ = write!(s, "{g},{m},{}", format_hhmm(m));
                for v in p {
                    let _ = write!(s, ",{v:.6}");
                }
                s.push('\n');
            }
        }
        s
    }
}

pub fn needs_timeseries(log: &[EventRecord], step_minutes: f64) -> NeedsSeries {
    let tracks = Tracks::build(log);
    let step = if step_minutes > 0.0 { step_minutes } else { 15.0 };
    let points = (MINUTES_PER_DAY / step).ceil() as usize;
    let mut sums: BTreeMap<Employment, (Vec<[f64; NEED_COUNT]>, Vec<u32>)> = BTreeMap::new();
    for tr in tracks.agents.values() {
        let Some(group) = tr.employment else { continue };
        let (sum, count) = sums
            .entry(group)
            .or_insert_with(|| (vec![[0.0; NEED_COUNT]; points], vec![0; points]));
        let first_day = (tr.first / MINUTES_PER_DAY).floor() as i64;
        let last_day = (tr.last / MINUTES_PER_DAY).floor() as i64;
        for day in first_day..=last_day {
            for k in 0..points {
                let t = day as f64 * MINUTES_PER_DAY + k as f64 * step;
                if !tr.covers(t) {
                    continue;
                }
                let n = tr.needs_at(t).expect("covered");
                for (acc, v) in sum[k].iter_mut().zip(n.0) {
                    *acc += v;
                }
                count[k] += 1;
            }
        }
    }
    let groups = sums
        .into_iter()
        .map(|(g, (sum, count))| {
            let means = sum
                .into_iter()
                .zip(count)
                .map(|(s, c)| {
                    if c == 0 {
                        [f64::NAN; NEED_COUNT]
                    } else {
                        s.map(|v| v / f64::from(c))
                    }
                })
                .collect();
            (g.as_str().to_string(), means)
        })
        .collect();
    NeedsSeries {
        step_minutes: step,
        groups,
    }
}
