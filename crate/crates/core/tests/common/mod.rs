#![allow(dead_code)]

pub mod http;

use citysim::city_map::{CityMap, EnvironmentState, TileLayers, Weather};
use citysim::decision::MockBackend;
use citysim::needs::NEED_COUNT;
use citysim::persona::{generate_population, Persona, PopulationConfig};
use citysim::scheduler::{DaySummary, SimConfig, Simulation, World};
use citysim::telemetry::{EventKind, EventRecord, MemorySink};
use citysim::time::Weekday;
use citysim::transport::{Mode, BUS_BOARDING_TICKS, BUS_TICKS, PMV_TICKS, WALK_TICKS};
use std::collections::{BTreeMap, VecDeque};

pub fn people(world: &World, n: usize, seed: u64) -> Vec<Persona> {
    generate_population(n, seed, &PopulationConfig::default_config(), &world.map).expect("default population")
}

/// Runs `days` days from Monday under constant weather with the mock backend.
pub fn simulate(
    world: &World,
    personas: Vec<Persona>,
    config: SimConfig,
    days: u32,
    weather: Weather,
) -> (Vec<EventRecord>, DaySummary) {
    let mut sim = Simulation::new(world, personas, config, Weekday::Monday).expect("valid population");
    let mut sink = MemorySink::default();
    let summary = sim
        .run(
            days,
            |_, wd| EnvironmentState::constant(wd, weather, 18.0),
            &MockBackend::new(0),
            &mut sink,
        )
        .expect("mock run");
    (sink.events, summary)
}

/// `(agent, action name, start, end)` for every completed action.
pub fn action_sequence(log: &[EventRecord]) -> Vec<(u32, String, f64, f64)> {
    let mut out: Vec<_> = log
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::ActionCompleted { name, start, .. } => Some((e.agent.0, name.clone(), *start, e.t)),
            _ => None,
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.2.total_cmp(&b.2)));
    out
}

/// Mandatory tasks that started after their scheduled time.
pub fn late_starts(log: &[EventRecord]) -> usize {
    log.iter()
        .filter(|e| {
            matches!(
                &e.kind,
                EventKind::ActionCompleted { mandatory: true, start, scheduled: Some(s), .. } if start > s
            )
        })
        .count()
}

/// Minutes of travel per mode, all categories pooled. A segment between two
/// waypoints counts toward the mode of the later one.
pub fn pooled_mode_minutes(log: &[EventRecord]) -> [f64; 3] {
    let mut by_agent: BTreeMap<u32, Vec<&EventRecord>> = BTreeMap::new();
    for e in log {
        by_agent.entry(e.agent.0).or_default().push(e);
    }
    let mut out = [0.0; 3];
    for events in by_agent.values_mut() {
        events.sort_by(|a, b| a.day.cmp(&b.day).then(a.t.total_cmp(&b.t)));
        let mut prev = None;
        for e in events.iter() {
            if let EventKind::Moved { mode, arrived, .. } = &e.kind {
                if let Some(p) = prev {
                    out[mode.index()] += e.t - p;
                }
                prev = if *arrived { None } else { Some(e.t) };
            }
        }
    }
    out
}

// ---- needs oracle: plain loops, no shared helpers with the library ----

pub fn oracle_hp(x: &[f64], a: &[f64], w: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut nx = 0.0;
    let mut na = 0.0;
    for i in 0..x.len() {
        num += (w[i] * x[i]) * (w[i] * a[i]);
        nx += (w[i] * x[i]) * (w[i] * x[i]);
        na += (w[i] * a[i]) * (w[i] * a[i]);
    }
    let cos = num / (nx.sqrt() * na.sqrt());
    (1.0 + cos.clamp(-1.0, 1.0)) / 2.0
}

pub fn oracle_importance(imp: &[f64; NEED_COUNT], cur: &[f64; NEED_COUNT], eff: &[f64; NEED_COUNT], k: f64) -> f64 {
    let m = imp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = imp.iter().map(|v| (v - m).exp()).sum();
    let mut s = 0.0;
    for i in 0..NEED_COUNT {
        let p = (imp[i] - m).exp() / z;
        let gain = if eff[i] > 0.0 { (k * eff[i]).tanh() } else { 0.0 };
        s += p * (1.0 - cur[i]) * gain;
    }
    s
}

// ---- routing oracle: label-correcting search over an independently built graph ----

/// Multimodal graph rebuilt from the raw map layers.
pub struct OracleGraph {
    pub tiles: usize,
    adj: Vec<Vec<(usize, u32)>>,
    pmv_base: usize,
    bus_base: usize,
}

fn ride_hops(map: &CityMap, from: usize) -> Vec<Option<u32>> {
    let tiles = map.tiles();
    let station = |i: usize| {
        tiles[i].layers.contains(TileLayers::PMV_STATION) || tiles[i].layers.contains(TileLayers::BUS_STATION)
    };
    let mut dist = vec![None; tiles.len()];
    dist[from] = Some(0);
    let mut q = VecDeque::from([from]);
    while let Some(i) = q.pop_front() {
        let on_road = tiles[i].layers.contains(TileLayers::HIGHWAY);
        if i != from && !on_road {
            continue;
        }
        let d = dist[i].unwrap();
        for p in map.neighbours(tiles[i].pos()) {
            let j = map.index_of(p);
            if dist[j].is_some() {
                continue;
            }
            let road = tiles[j].layers.contains(TileLayers::HIGHWAY);
            if road || (station(j) && on_road) {
                dist[j] = Some(d + 1);
                q.push_back(j);
            }
        }
    }
    dist
}

impl OracleGraph {
    pub fn new(map: &CityMap, mode: Mode) -> Self {
        let t = map.tiles().len();
        let np = map.pmv_stations().len();
        let nb = map.bus_stations().len();
        let mut adj = vec![Vec::new(); t + np + nb];
        for (i, tile) in map.tiles().iter().enumerate() {
            if !tile.walkable {
                continue;
            }
            for p in map.neighbours(tile.pos()) {
                let j = map.index_of(p);
                if map.tiles()[j].walkable {
                    adj[i].push((j, WALK_TICKS));
                }
            }
        }
        if mode == Mode::Pmv {
            let st = map.pmv_stations();
            for (a, sa) in st.iter().enumerate() {
                let ta = map.index_of(sa.pos);
                adj[ta].push((t + a, 0));
                adj[t + a].push((ta, 0));
                let hops = ride_hops(map, ta);
                for (b, sb) in st.iter().enumerate() {
                    if a != b {
                        if let Some(h) = hops[map.index_of(sb.pos)] {
                            adj[t + a].push((t + b, PMV_TICKS * h));
                        }
                    }
                }
            }
        }
        if mode == Mode::Bus {
            let st = map.bus_stations();
            let node = |c: char| st.iter().position(|s| s.symbol == c).unwrap();
            for (k, s) in st.iter().enumerate() {
                let ti = map.index_of(s.pos);
                adj[ti].push((t + np + k, BUS_BOARDING_TICKS));
                adj[t + np + k].push((ti, 0));
            }
            for r in map.bus_routes() {
                let n = r.stations.len();
                for k in 0..n {
                    let (a, b) = (node(r.stations[k]), node(r.stations[(k + 1) % n]));
                    if a == b {
                        continue;
                    }
                    let hops = ride_hops(map, map.index_of(st[a].pos));
                    let h = hops[map.index_of(st[b].pos)].expect("route segment on the road");
                    adj[t + np + a].push((t + np + b, BUS_TICKS * h));
                }
            }
        }
        Self {
            tiles: t,
            adj,
            pmv_base: t,
            bus_base: t + np,
        }
    }

    /// Minimum ticks from `source` to every tile (Bellman-Ford with a queue).
    pub fn spfa(&self, source: usize) -> Vec<u32> {
        let n = self.adj.len();
        let mut dist = vec![u32::MAX; n];
        let mut queued = vec![false; n];
        dist[source] = 0;
        let mut q = VecDeque::from([source]);
        queued[source] = true;
        while let Some(u) = q.pop_front() {
            queued[u] = false;
            for &(v, c) in &self.adj[u] {
                let nd = dist[u] + c;
                if nd < dist[v] {
                    dist[v] = nd;
                    if !queued[v] {
                        queued[v] = true;
                        q.push_back(v);
                    }
                }
            }
        }
        dist.truncate(self.tiles);
        dist
    }
}
