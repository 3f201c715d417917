//! Walking, PMV and bus networks and multimodal shortest routes.
//!
//! Costs are counted in ticks of 1/10 of a 15-second step so that every mode
//! speed is integral: walking covers one tile per step (10 ticks), a PMV two
//! tiles (5 ticks) and a bus five tiles (2 ticks). Boarding a bus costs a
//! fixed two steps.

mod table;

pub use table::{ModeSummary, RouteTable};

use crate::city_map::{walking_component, CityMap, Pos, VenueId};
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub const TICKS_PER_STEP: u32 = 10;
pub const WALK_TICKS: u32 = 10;
pub const PMV_TICKS: u32 = 5;
pub const BUS_TICKS: u32 = 2;
pub const BUS_BOARDING_TICKS: u32 = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransportError {
    #[error("bus route `{route}` references missing station {station:?}")]
    MissingStation { route: String, station: char },
    #[error("bus route `{0}` needs at least two stations")]
    ShortRoute(String),
    #[error("{kind} station {symbol:?} at {pos} is not reachable: {reason}")]
    UnreachableStation {
        kind: &'static str,
        symbol: char,
        pos: Pos,
        reason: &'static str,
    },
    #[error("bus route `{route}` cannot drive from {from:?} to {to:?} over highways")]
    NoRoadBetween { route: String, from: char, to: char },
    #[error("no route from venue {from} to venue {to}")]
    Unreachable { from: u32, to: u32 },
    #[error("mode {mode} has no route from venue {from} to venue {to}")]
    InfeasibleMode { mode: Mode, from: u32, to: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Walking,
    Pmv,
    Bus,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Walking, Mode::Pmv, Mode::Bus];

    /// Fixed index used in prompts and replies.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Mode> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Walking => "walking",
            Mode::Pmv => "pmv",
            Mode::Bus => "bus",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

/// Per-trip fare for each mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fares {
    pub walking: u32,
    pub pmv: u32,
    pub bus: u32,
}

impl Default for Fares {
    fn default() -> Self {
        Self {
            walking: 0,
            pmv: 1,
            bus: 3,
        }
    }
}

impl Fares {
    pub fn of(&self, mode: Mode) -> u32 {
        match mode {
            Mode::Walking => self.walking,
            Mode::Pmv => self.pmv,
            Mode::Bus => self.bus,
        }
    }
}

/// A contiguous stretch of a route travelled in one mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg {
    pub mode: Mode,
    /// Tiles visited, including the leg's first and last tile.
    pub tiles: Vec<Pos>,
    /// Cost in ticks, including any boarding penalty.
    pub ticks: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteOption {
    pub mode: Mode,
    /// Full tile sequence from origin to destination (empty when they coincide).
    pub path: Vec<Pos>,
    pub legs: Vec<Leg>,
    /// Travel time in 15-second steps.
    pub time_steps: u32,
    pub money_cost: u32,
}

impl RouteOption {
    pub fn minutes(&self) -> f64 {
        crate::time::steps_to_minutes(self.time_steps)
    }

    pub fn uses_vehicle(&self) -> bool {
        self.legs.iter().any(|l| l.mode != Mode::Walking)
    }
}

pub fn ticks_to_steps(ticks: u32) -> u32 {
    ticks.div_ceil(TICKS_PER_STEP)
}

#[derive(Debug, Clone)]
struct Ride {
    to: usize,
    tiles: Vec<Pos>,
}

#[derive(Debug, Clone)]
struct StationNode {
    symbol: char,
    tile: usize,
    rides: Vec<Ride>,
}

/// The three transportation graphs over one map.
///
/// Node space: one node per tile (walking), then one per PMV station, then
/// one per bus station. PMV stations are joined pairwise by their shortest
/// highway ride; bus stations by directed edges between consecutive stops.
#[derive(Debug, Clone)]
pub struct TransitGraphs {
    width: u16,
    walkable: Vec<bool>,
    pmv_at: Vec<Option<usize>>,
    bus_at: Vec<Option<usize>>,
    pmv: Vec<StationNode>,
    bus: Vec<StationNode>,
    anchors: Vec<Pos>,
    fares: Fares,
}

/// Shortest-path tree from one source tile under one mode set.
#[derive(Debug, Clone)]
pub struct ShortestTree {
    mode: Mode,
    dist: Vec<u32>,
    pred: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl TransitGraphs {
    pub fn build(map: &CityMap) -> Result<Self, TransportError> {
        Self::with_fares(map, Fares::default())
    }

    pub fn with_fares(map: &CityMap, fares: Fares) -> Result<Self, TransportError> {
        let n = map.tiles().len();
        let main = walking_component(map, map.venues()[0].anchor);
        let highway: Vec<bool> = map.tiles().iter().map(|t| t.is_highway()).collect();

        let check = |kind: &'static str, symbol: char, pos: Pos| {
            let i = map.index_of(pos);
            let reason = if !map.tiles()[i].walkable {
                Some("tile is not walkable")
            } else if !main[i] {
                Some("tile is not connected to the venues on foot")
            } else if !map.neighbours(pos).any(|q| highway[map.index_of(q)]) {
                Some("tile is not next to a highway")
            } else {
                None
            };
            match reason {
                Some(reason) => Err(TransportError::UnreachableStation {
                    kind,
                    symbol,
                    pos,
                    reason,
                }),
                None => Ok(()),
            }
        };
        for s in map.pmv_stations() {
            check("pmv", s.symbol, s.pos)?;
        }
        for s in map.bus_stations() {
            check("bus", s.symbol, s.pos)?;
        }

        let mut pmv: Vec<StationNode> = map
            .pmv_stations()
            .iter()
            .map(|s| StationNode {
                symbol: s.symbol,
                tile: map.index_of(s.pos),
                rides: Vec::new(),
            })
            .collect();
        for a in 0..pmv.len() {
            let paths = highway_paths(map, &highway, pmv[a].tile);
            for b in 0..pmv.len() {
                if a == b {
                    continue;
                }
                if let Some(tiles) = trace(map, &paths, pmv[a].tile, pmv[b].tile) {
                    pmv[a].rides.push(Ride { to: b, tiles });
                }
            }
        }

        let mut bus: Vec<StationNode> = map
            .bus_stations()
            .iter()
            .map(|s| StationNode {
                symbol: s.symbol,
                tile: map.index_of(s.pos),
                rides: Vec::new(),
            })
            .collect();
        let index: BTreeMap<char, usize> =
            bus.iter().enumerate().map(|(i, s)| (s.symbol, i)).collect();
        for route in map.bus_routes() {
            if route.stations.len() < 2 {
                return Err(TransportError::ShortRoute(route.name.clone()));
            }
            let stops = route
                .stations
                .iter()
                .map(|c| {
                    index.get(c).copied().ok_or(TransportError::MissingStation {
                        route: route.name.clone(),
                        station: *c,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            for (k, &from) in stops.iter().enumerate() {
                let to = stops[(k + 1) % stops.len()];
                if from == to {
                    continue;
                }
                let paths = highway_paths(map, &highway, bus[from].tile);
                let tiles = trace(map, &paths, bus[from].tile, bus[to].tile).ok_or_else(|| {
                    TransportError::NoRoadBetween {
                        route: route.name.clone(),
                        from: bus[from].symbol,
                        to: bus[to].symbol,
                    }
                })?;
                if !bus[from].rides.iter().any(|r| r.to == to) {
                    bus[from].rides.push(Ride { to, tiles });
                }
            }
        }

        let mut pmv_at = vec![None; n];
        for (i, s) in pmv.iter().enumerate() {
            pmv_at[s.tile] = Some(i);
        }
        let mut bus_at = vec![None; n];
        for (i, s) in bus.iter().enumerate() {
            bus_at[s.tile] = Some(i);
        }

        Ok(Self {
            width: map.width(),
            walkable: map.tiles().iter().map(|t| t.walkable).collect(),
            pmv_at,
            bus_at,
            pmv,
            bus,
            anchors: map.venues().iter().map(|v| v.anchor).collect(),
            fares,
        })
    }

    pub fn fares(&self) -> &Fares {
        &self.fares
    }

    pub fn venue_count(&self) -> usize {
        self.anchors.len()
    }

    pub fn pmv_station_count(&self) -> usize {
        self.pmv.len()
    }

    pub fn bus_station_count(&self) -> usize {
        self.bus.len()
    }

    /// Number of directed bus segments.
    pub fn bus_edge_count(&self) -> usize {
        self.bus.iter().map(|s| s.rides.len()).sum()
    }

    pub fn walkable_tile_count(&self) -> usize {
        self.walkable.iter().filter(|w| **w).count()
    }

    fn tiles(&self) -> usize {
        self.walkable.len()
    }

    fn pos(&self, i: usize) -> Pos {
        let w = usize::from(self.width);
        Pos::new((i % w) as u16, (i / w) as u16)
    }

    fn tile_index(&self, p: Pos) -> usize {
        usize::from(p.y) * usize::from(self.width) + usize::from(p.x)
    }

    fn node_count(&self) -> usize {
        self.tiles() + self.pmv.len() + self.bus.len()
    }

    /// Dijkstra from `source` over the walking graph united with the graph
    /// of `mode`. Ties are broken by node index, and predecessors change only
    /// on strict improvement, so trees are deterministic.
    pub fn shortest_tree(&self, source: Pos, mode: Mode) -> ShortestTree {
        let n = self.node_count();
        let (t, np) = (self.tiles(), self.pmv.len());
        let mut dist = vec![NONE; n];
        let mut pred = vec![NONE; n];
        let mut heap = BinaryHeap::new();
        let s = self.tile_index(source);
        dist[s] = 0;
        heap.push(Reverse((0u32, s as u32)));
        let w = usize::from(self.width);
        let mut edges: Vec<(usize, u32)> = Vec::with_capacity(8);

        while let Some(Reverse((d, u))) = heap.pop() {
            let u = u as usize;
            if d > dist[u] {
                continue;
            }
            edges.clear();
            if u < t {
                let (x, y) = (u % w, u / w);
                if y > 0 {
                    edges.push((u - w, WALK_TICKS));
                }
                if x > 0 {
                    edges.push((u - 1, WALK_TICKS));
                }
                if x + 1 < w {
                    edges.push((u + 1, WALK_TICKS));
                }
                if u + w < t {
                    edges.push((u + w, WALK_TICKS));
                }
                edges.retain(|&(v, _)| self.walkable[v]);
                match mode {
                    Mode::Pmv => {
                        if let Some(k) = self.pmv_at[u] {
                            edges.push((t + k, 0));
                        }
                    }
                    Mode::Bus => {
                        if let Some(k) = self.bus_at[u] {
                            edges.push((t + np + k, BUS_BOARDING_TICKS));
                        }
                    }
                    Mode::Walking => {}
                }
            } else if u < t + np {
                let st = &self.pmv[u - t];
                edges.push((st.tile, 0));
                for r in &st.rides {
                    edges.push((t + r.to, PMV_TICKS * hops(&r.tiles)));
                }
            } else {
                let st = &self.bus[u - t - np];
                edges.push((st.tile, 0));
                for r in &st.rides {
                    edges.push((t + np + r.to, BUS_TICKS * hops(&r.tiles)));
                }
            }
            for &(v, c) in &edges {
                let nd = d + c;
                if nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = u as u32;
                    heap.push(Reverse((nd, v as u32)));
                }
            }
        }
        ShortestTree { mode, dist, pred }
    }

    /// Minimum cost in ticks to `target` in a tree, if reachable.
    pub fn tree_ticks(&self, tree: &ShortestTree, target: Pos) -> Option<u32> {
        let d = tree.dist[self.tile_index(target)];
        (d != NONE).then_some(d)
    }

    /// Reconstructs the route to `target` from a shortest-path tree.
    pub fn extract(&self, tree: &ShortestTree, target: Pos) -> Option<RouteOption> {
        let ti = self.tile_index(target);
        let total = tree.dist[ti];
        if total == NONE {
            return None;
        }
        let mut nodes = vec![ti];
        let mut cur = ti;
        while tree.pred[cur] != NONE {
            cur = tree.pred[cur] as usize;
            nodes.push(cur);
        }
        nodes.reverse();

        let (t, np) = (self.tiles(), self.pmv.len());
        let mut legs: Vec<Leg> = Vec::new();
        let mut walk: Vec<Pos> = Vec::new();
        let flush_walk = |walk: &mut Vec<Pos>, legs: &mut Vec<Leg>| {
            if walk.len() > 1 {
                let ticks = WALK_TICKS * (walk.len() as u32 - 1);
                legs.push(Leg {
                    mode: Mode::Walking,
                    tiles: std::mem::take(walk),
                    ticks,
                });
            }
            walk.clear();
        };
        let mut i = 0;
        while i < nodes.len() {
            let u = nodes[i];
            if u < t {
                walk.push(self.pos(u));
                i += 1;
                continue;
            }
            // a run of vehicle nodes, entered from and left to a walking tile
            flush_walk(&mut walk, &mut legs);
            let (mode, stations, per_tile, boarding) = if u < t + np {
                (Mode::Pmv, &self.pmv, PMV_TICKS, 0)
            } else {
                (Mode::Bus, &self.bus, BUS_TICKS, BUS_BOARDING_TICKS)
            };
            let offset = if mode == Mode::Pmv { t } else { t + np };
            let first = u - offset;
            let mut tiles = vec![self.pos(stations[first].tile)];
            let mut ticks = boarding;
            let mut k = first;
            i += 1;
            while i < nodes.len() && nodes[i] >= offset && nodes[i] < offset + stations.len() {
                let next = nodes[i] - offset;
                let ride = stations[k]
                    .rides
                    .iter()
                    .find(|r| r.to == next)
                    .expect("tree edges follow rides");
                tiles.extend_from_slice(&ride.tiles[1..]);
                ticks += per_tile * hops(&ride.tiles);
                k = next;
                i += 1;
            }
            debug_assert_eq!(nodes.get(i), Some(&stations[k].tile));
            legs.push(Leg { mode, tiles, ticks });
        }
        flush_walk(&mut walk, &mut legs);

        let mut path: Vec<Pos> = Vec::new();
        for leg in &legs {
            if path.is_empty() {
                path.extend_from_slice(&leg.tiles);
            } else {
                path.extend_from_slice(&leg.tiles[1..]);
            }
        }
        debug_assert_eq!(legs.iter().map(|l| l.ticks).sum::<u32>(), total);
        let vehicle = legs.iter().any(|l| l.mode != Mode::Walking);
        Some(RouteOption {
            mode: tree.mode,
            path,
            legs,
            time_steps: ticks_to_steps(total),
            money_cost: if vehicle { self.fares.of(tree.mode) } else { 0 },
        })
    }

    /// Best route between two tiles with walking plus `mode`.
    pub fn tile_route(&self, from: Pos, to: Pos, mode: Mode) -> Option<RouteOption> {
        self.extract(&self.shortest_tree(from, mode), to)
    }

    /// Route options between two venues, sorted by travel time.
    ///
    /// Walking is always listed when feasible. PMV and bus are listed only
    /// when the fastest route over walking plus that mode actually rides the
    /// vehicle; otherwise they would duplicate the walking option.
    pub fn route_options(&self, s: VenueId, t: VenueId) -> Result<Vec<RouteOption>, TransportError> {
        let (a, b) = (self.anchors[s.index()], self.anchors[t.index()]);
        let mut out = Vec::with_capacity(3);
        for mode in Mode::ALL {
            if let Some(r) = self.tile_route(a, b, mode) {
                if mode == Mode::Walking || r.uses_vehicle() {
                    out.push(r);
                }
            }
        }
        if out.is_empty() {
            return Err(TransportError::Unreachable { from: s.0, to: t.0 });
        }
        out.sort_by_key(|r| (r.time_steps, r.mode));
        Ok(out)
    }

    /// Travel time in steps of the option for `mode`.
    pub fn travel_time(&self, s: VenueId, t: VenueId, mode: Mode) -> Result<u32, TransportError> {
        self.route_options(s, t)?
            .into_iter()
            .find(|r| r.mode == mode)
            .map(|r| r.time_steps)
            .ok_or(TransportError::InfeasibleMode {
                mode,
                from: s.0,
                to: t.0,
            })
    }

    /// Minimum time in steps over walking united with `mode`, whether or not
    /// the vehicle is used.
    pub fn union_time(&self, s: VenueId, t: VenueId, mode: Mode) -> Option<u32> {
        let (a, b) = (self.anchors[s.index()], self.anchors[t.index()]);
        self.tree_ticks(&self.shortest_tree(a, mode), b)
            .map(ticks_to_steps)
    }

    pub(crate) fn anchor(&self, v: VenueId) -> Pos {
        self.anchors[v.index()]
    }
}

fn hops(tiles: &[Pos]) -> u32 {
    tiles.len().saturating_sub(1) as u32
}

/// BFS predecessors for vehicle rides starting at station tile `from`: the
/// vehicle moves over highway tiles and may leave the road only onto a
/// station tile at the end of the ride.
fn highway_paths(map: &CityMap, highway: &[bool], from: usize) -> Vec<u32> {
    let mut pred = vec![NONE; highway.len()];
    pred[from] = from as u32;
    let mut queue = VecDeque::from([from]);
    while let Some(i) = queue.pop_front() {
        if i != from && !highway[i] {
            // reached a non-road tile (a station); rides end here
            continue;
        }
        for q in map.neighbours(map.pos_of(i)) {
            let j = map.index_of(q);
            if pred[j] != NONE {
                continue;
            }
            let tile = &map.tiles()[j];
            let station = tile.layers.contains(crate::city_map::TileLayers::PMV_STATION)
                || tile.layers.contains(crate::city_map::TileLayers::BUS_STATION);
            if highway[j] || (station && highway[i]) {
                pred[j] = i as u32;
                queue.push_back(j);
            }
        }
    }
    pred
}

fn trace(map: &CityMap, pred: &[u32], from: usize, to: usize) -> Option<Vec<Pos>> {
    if pred[to] == NONE {
        return None;
    }
    let mut out = vec![map.pos_of(to)];
    let mut cur = to;
    while cur != from {
        cur = pred[cur] as usize;
        out.push(map.pos_of(cur));
    }
    out.reverse();
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::city_map::layout::{test_grid, GridCityBuilder, Side};
    use crate::city_map::{load_map, CityMap};

    fn default_graphs() -> (CityMap, TransitGraphs) {
        let map = CityMap::default_city();
        let g = TransitGraphs::build(&map).unwrap();
        (map, g)
    }

    #[test]
    fn same_venue_is_a_zero_walk() {
        let (_, g) = default_graphs();
        let opts = g.route_options(VenueId(3), VenueId(3)).unwrap();
        assert_eq!(opts.len(), 1);
        assert_eq!(opts[0].mode, Mode::Walking);
        assert!(opts[0].path.is_empty() || opts[0].path.len() == 1);
        assert_eq!(opts[0].time_steps, 0);
        assert_eq!(opts[0].money_cost, 0);
        assert_eq!(g.travel_time(VenueId(3), VenueId(3), Mode::Walking), Ok(0));
    }

    #[test]
    fn default_map_has_two_bus_routes() {
        let (map, g) = default_graphs();
        assert_eq!(map.bus_routes().len(), 2);
        assert_eq!(g.bus_edge_count(), 12);
        assert_eq!(g.pmv_station_count(), 6);
    }

    #[test]
    fn no_stations_means_walking_only() {
        let doc = GridCityBuilder::new(2, 1)
            .block(0, 0, crate::city_map::layout::generic_block("w", 2))
            .block(1, 0, crate::city_map::layout::generic_block("e", 2))
            .build();
        let map = load_map(doc).unwrap();
        let g = TransitGraphs::build(&map).unwrap();
        assert_eq!(g.pmv_station_count() + g.bus_station_count(), 0);
        assert_eq!(g.walkable_tile_count(), 2 * 18 * 18 + 2);
        let opts = g.route_options(VenueId(0), VenueId(3)).unwrap();
        assert!(opts.iter().all(|o| o.mode == Mode::Walking));
    }

    #[test]
    fn station_off_the_road_is_rejected() {
        let doc = GridCityBuilder::new(1, 1)
            .block(0, 0, crate::city_map::layout::generic_block("b", 2))
            .pmv_station('p', Pos::new(10, 10))
            .build();
        let map = load_map(doc).unwrap();
        assert!(matches!(
            TransitGraphs::build(&map),
            Err(TransportError::UnreachableStation { .. })
        ));
    }

    #[test]
    fn route_with_missing_station_is_rejected() {
        let doc = GridCityBuilder::new(1, 1)
            .block(0, 0, crate::city_map::layout::generic_block("b", 2))
            .bus_station('A', GridCityBuilder::edge_tile(0, 0, Side::North, 3))
            .bus_route("r", "AZ")
            .build();
        let map = load_map(doc).unwrap();
        assert_eq!(
            TransitGraphs::build(&map).unwrap_err(),
            TransportError::MissingStation {
                route: "r".into(),
                station: 'Z'
            }
        );
    }

    #[test]
    fn leg_speeds_over_one_block() {
        // ride 20 tiles along the top road between two stations one block apart
        let doc = GridCityBuilder::new(3, 1)
            .block(0, 0, crate::city_map::layout::generic_block("a", 1))
            .block(1, 0, crate::city_map::layout::generic_block("b", 1))
            .block(2, 0, crate::city_map::layout::generic_block("c", 1))
            .pmv_station('p', GridCityBuilder::edge_tile(0, 0, Side::North, 5))
            .pmv_station('q', GridCityBuilder::edge_tile(1, 0, Side::North, 5))
            .build();
        let map = load_map(doc).unwrap();
        let g = TransitGraphs::build(&map).unwrap();
        let ride = &g.pmv[0].rides[0];
        // station -> road -> 20 tiles along the road -> station: 22 hops
        assert_eq!(hops(&ride.tiles), 22);
        assert_eq!(PMV_TICKS * 20, 10 * TICKS_PER_STEP);
        assert_eq!(BUS_TICKS * 20, 4 * TICKS_PER_STEP);
        assert_eq!(WALK_TICKS * 20, 20 * TICKS_PER_STEP);
    }

    #[test]
    fn options_are_sorted_and_consistent() {
        let map = load_map(test_grid(4, 2)).unwrap();
        let g = TransitGraphs::build(&map).unwrap();
        let n = map.venues().len() as u32;
        for s in (0..n).step_by(5) {
            for t in (0..n).step_by(3) {
                let opts = g.route_options(VenueId(s), VenueId(t)).unwrap();
                assert!(opts.windows(2).all(|w| w[0].time_steps <= w[1].time_steps));
                let walk = opts.iter().find(|o| o.mode == Mode::Walking).unwrap();
                for o in &opts {
                    assert!(o.time_steps <= walk.time_steps);
                    let ticks: u32 = o.legs.iter().map(|l| l.ticks).sum();
                    assert_eq!(o.time_steps, ticks_to_steps(ticks));
                    if s != t {
                        assert_eq!(o.path.first(), Some(&map.venue(VenueId(s)).anchor));
                        assert_eq!(o.path.last(), Some(&map.venue(VenueId(t)).anchor));
                    }
                    for w in o.path.windows(2) {
                        assert_eq!(w[0].manhattan(w[1]), 1);
                    }
                }
            }
        }
    }
}
