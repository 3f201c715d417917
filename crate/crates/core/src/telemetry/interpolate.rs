use super::{EventKind, EventRecord, TelemetryError};
use crate::city_map::{Pos, VenueCategory, VenueId};
use crate::needs::{NeedVector, NEED_COUNT};
use crate::persona::{AgentId, CategoryCode, Employment};
use std::collections::BTreeMap;

/// Where an agent is at some instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Venue(VenueCategory, VenueId),
    Transit,
}

/// One agent's reconstructed trajectory.
#[derive(Debug, Clone, Default)]
pub struct AgentTrack {
    pub agent: AgentId,
    pub category: Option<CategoryCode>,
    pub employment: Option<Employment>,
    pub waypoints: Vec<(f64, [f64; 2])>,
    pub needs: Vec<(f64, NeedVector)>,
    pub locations: Vec<(f64, Location)>,
    pub first: f64,
    pub last: f64,
}

/// Index of the last sample at or before `t` (after any samples sharing
/// that timestamp), or `None` if all samples are later.
fn last_at_or_before<T>(samples: &[(f64, T)], t: f64) -> Option<usize> {
    samples.partition_point(|(ts, _)| *ts <= t).checked_sub(1)
}

fn lerp(a: f64, b: f64, w: f64) -> f64 {
    if w <= 0.0 {
        a
    } else {
        a + (b - a) * w
    }
}

impl AgentTrack {
    fn check(&self, t: f64) -> Result<(), TelemetryError> {
        if t < self.first || t > self.last || !t.is_finite() {
            return Err(TelemetryError::OutOfRange {
                agent: self.agent,
                t,
                first: self.first,
                last: self.last,
            });
        }
        Ok(())
    }

    /// Fractional position, linear between waypoints.
    pub fn position_f(&self, t: f64) -> Result<[f64; 2], TelemetryError> {
        self.check(t)?;
        let k = last_at_or_before(&self.waypoints, t).unwrap_or(0);
        let (t0, p0) = self.waypoints[k];
        let Some(&(t1, p1)) = self.waypoints.get(k + 1) else {
            return Ok(p0);
        };
        let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        Ok([lerp(p0[0], p1[0], w), lerp(p0[1], p1[1], w)])
    }

    /// Position rounded to the nearest tile.
    pub fn position(&self, t: f64) -> Result<Pos, TelemetryError> {
        let [x, y] = self.position_f(t)?;
        Ok(Pos {
            x: x.round() as u16,
            y: y.round() as u16,
        })
    }

    /// Need vector, componentwise linear between snapshots.
    pub fn needs_at(&self, t: f64) -> Result<NeedVector, TelemetryError> {
        self.check(t)?;
        let k = last_at_or_before(&self.needs, t).unwrap_or(0);
        let (t0, n0) = self.needs[k];
        let Some(&(t1, n1)) = self.needs.get(k + 1) else {
            return Ok(n0);
        };
        let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        let mut out = [0.0; NEED_COUNT];
        for (i, o) in out.iter_mut().enumerate() {
            *o = lerp(n0.0[i], n1.0[i], w);
        }
        Ok(NeedVector(out))
    }

    pub fn location_at(&self, t: f64) -> Result<Location, TelemetryError> {
        self.check(t)?;
        let k = last_at_or_before(&self.locations, t).unwrap_or(0);
        Ok(self.locations[k].1)
    }

    pub fn covers(&self, t: f64) -> bool {
        t >= self.first && t <= self.last
    }
}

/// Trajectories of every agent in a log, keyed by agent id.
#[derive(Debug, Clone, Default)]
pub struct Tracks {
    pub agents: BTreeMap<AgentId, AgentTrack>,
}

impl Tracks {
    pub fn build(log: &[EventRecord]) -> Self {
        let mut by_agent: BTreeMap<AgentId, Vec<&EventRecord>> = BTreeMap::new();
        for e in log {
            by_agent.entry(e.agent).or_default().push(e);
        }
        let mut agents = BTreeMap::new();
        for (agent, mut events) in by_agent {
            events.sort_by(|a, b| a.day.cmp(&b.day).then(a.t.total_cmp(&b.t)));
            let mut tr = AgentTrack {
                agent,
                first: events[0].t,
                last: events[events.len() - 1].t,
                ..AgentTrack::default()
            };
            for e in events {
                let t = e.t;
                match &e.kind {
                    EventKind::DayStart {
                        category,
                        employment,
                        venue,
                        venue_category,
                        tile,
                        needs,
                        ..
                    } => {
                        tr.category = Some(*category);
                        tr.employment = Some(*employment);
                        tr.waypoints.push((t, [f64::from(tile[0]), f64::from(tile[1])]));
                        tr.needs.push((t, *needs));
                        tr.locations.push((t, Location::Venue(*venue_category, *venue)));
                    }
                    EventKind::Moved {
                        tile,
                        venue,
                        venue_category,
                        arrived,
                        ..
                    } => {
                        tr.waypoints.push((t, [f64::from(tile[0]), f64::from(tile[1])]));
                        let loc = match (arrived, venue, venue_category) {
                            (true, Some(v), Some(c)) => Location::Venue(*c, *v),
                            _ => Location::Transit,
                        };
                        tr.locations.push((t, loc));
                    }
                    EventKind::ActionCompleted { needs, .. } => tr.needs.push((t, *needs)),
                    EventKind::DayEnd { tile, needs, .. } => {
                        tr.waypoints.push((t, [f64::from(tile[0]), f64::from(tile[1])]));
                        tr.needs.push((t, *needs));
                    }
                    EventKind::Conversation { .. } => {}
                }
            }
            if tr.waypoints.is_empty() || tr.needs.is_empty() || tr.locations.is_empty() {
                log::warn!("agent {agent} has an incomplete log and is skipped");
                continue;
            }
            agents.insert(agent, tr);
        }
        Self { agents }
    }

    pub fn get(&self, agent: AgentId) -> Result<&AgentTrack, TelemetryError> {
        self.agents.get(&agent).ok_or(TelemetryError::UnknownAgent(agent))
    }
}

/// Reconstructed `(tile, C_N)` of `agent` at absolute minute `t`.
pub fn interpolate(log: &[EventRecord], agent: AgentId, t: f64) -> Result<(Pos, NeedVector), TelemetryError> {
    let only: Vec<EventRecord> = log.iter().filter(|e| e.agent == agent).cloned().collect();
    let tracks = Tracks::build(&only);
    let tr = tracks.get(agent)?;
    Ok((tr.position(t)?, tr.needs_at(t)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{ActionId, ActivityClass};
    use crate::time::Weekday;
    use crate::transport::Mode;

    fn log() -> Vec<EventRecord> {
        let a = AgentId(0);
        let mut n0 = NeedVector::splat(0.5);
        n0.0[0] = 0.8;
        let mut n1 = n0;
        n1.0[0] = 0.6;
        let moved = |t: f64, x: u16, arrived: bool| {
            EventRecord::new(
                0,
                a,
                t,
                EventKind::Moved {
                    tile: [x, 0],
                    venue: arrived.then_some(VenueId(2)),
                    venue_category: arrived.then_some(VenueCategory::Cafe),
                    mode: Mode::Walking,
                    arrived,
                },
            )
        };
        vec![
            EventRecord::new(
                0,
                a,
                0.0,
                EventKind::DayStart {
                    weekday: Weekday::Monday,
                    category: CategoryCode(100),
                    employment: Employment::Unemployed,
                    venue: VenueId(1),
                    venue_category: VenueCategory::ResidentialRoom,
                    tile: [0, 0],
                    needs: NeedVector::splat(0.5),
                },
            ),
            moved(0.0, 0, false),
            moved(10.0, 10, true),
            EventRecord::new(
                0,
                a,
                600.0,
                EventKind::ActionCompleted {
                    action: ActionId(3),
                    name: "x".into(),
                    class: ActivityClass::Leisure,
                    venue: VenueId(2),
                    start: 570.0,
                    mandatory: false,
                    scheduled: None,
                    needs: n0,
                    feedback: 0.1,
                },
            ),
            EventRecord::new(
                0,
                a,
                660.0,
                EventKind::ActionCompleted {
                    action: ActionId(3),
                    name: "x".into(),
                    class: ActivityClass::Leisure,
                    venue: VenueId(2),
                    start: 630.0,
                    mandatory: false,
                    scheduled: None,
                    needs: n1,
                    feedback: 0.1,
                },
            ),
        ]
    }

    #[test]
    fn midpoints_and_exact_events() {
        let log = log();
        let tr = Tracks::build(&log);
        let tr = tr.get(AgentId(0)).unwrap();
        assert_eq!(tr.position(5.0).unwrap(), Pos { x: 5, y: 0 });
        assert_eq!(tr.position(10.0).unwrap(), Pos { x: 10, y: 0 });
        assert_eq!(tr.position(300.0).unwrap(), Pos { x: 10, y: 0 });
        assert!((tr.needs_at(630.0).unwrap().0[0] - 0.7).abs() < 1e-12);
        assert_eq!(tr.needs_at(600.0).unwrap().0[0], 0.8);
        assert_eq!(tr.location_at(5.0).unwrap(), Location::Transit);
        assert_eq!(
            tr.location_at(10.0).unwrap(),
            Location::Venue(VenueCategory::Cafe, VenueId(2))
        );
        assert!(matches!(tr.needs_at(700.0), Err(TelemetryError::OutOfRange { .. })));
        assert!(matches!(
            interpolate(&log, AgentId(9), 0.0),
            Err(TelemetryError::UnknownAgent(_))
        ));
        let (p, n) = interpolate(&log, AgentId(0), 660.0).unwrap();
        assert_eq!((p, n.0[0]), (Pos { x: 10, y: 0 }, 0.6));
    }
}
