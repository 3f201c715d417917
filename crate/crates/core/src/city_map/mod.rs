//! Tile-based city: grid geometry, buildings, venues and opening hours.
//!
//! One tile is 25 m and one block is 20 tiles (500 m). Maps are loaded from
//! the layered-grid document described in `docs/MAP_FORMAT.md` and are
//! immutable once validated.

mod document;
mod environment;
pub mod layout;

pub use document::{BuildingDoc, BusRouteDoc, LayersDoc, MapDocument, VenueDoc};
pub use environment::{environment_at, EnvironmentEntry, EnvironmentState, Weather};

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Tiles per block edge.
pub const BLOCK_TILES: u16 = 20;
/// Metres per tile edge.
pub const TILE_METRES: f64 = 25.0;

const DEFAULT_MAP: &str = include_str!("../../data/default_map.toml");

#[derive(Debug, Error)]
pub enum MapError {
    #[error("malformed map document: {0}")]
    Malformed(String),
    #[error("layer `{layer}` has {found} rows/columns where {expected} were expected")]
    LayerShape {
        layer: String,
        expected: String,
        found: String,
    },
    #[error("layer `{layer}` has unexpected character {ch:?} at ({x},{y})")]
    BadCell { layer: String, ch: char, x: u16, y: u16 },
    #[error("unknown building symbol {0:?}")]
    UnknownBuilding(char),
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("venue `{venue}` has no tiles")]
    EmptyVenue { venue: String },
    #[error("venue `{venue}` tile ({x},{y}) lies outside building `{building}`")]
    VenueOutsideBuilding {
        venue: String,
        building: String,
        x: u16,
        y: u16,
    },
    #[error("venue `{venue}` tile ({x},{y}) is not walkable")]
    VenueTileBlocked { venue: String, x: u16, y: u16 },
    #[error("venue `{venue}` opening window [{start}, {close}] is invalid")]
    BadOpeningWindow { venue: String, start: u32, close: u32 },
    #[error("tile ({x},{y}) is a zebra crossing but {reason}")]
    BadZebra { x: u16, y: u16, reason: &'static str },
    #[error("tile ({x},{y}) is highway but walkable without a zebra crossing")]
    WalkableHighway { x: u16, y: u16 },
    #[error("building `{0}` has walkable tiles that are not connected to each other")]
    DisconnectedBuilding(String),
    #[error("venue `{0}` is unreachable on foot from the other venues")]
    UnreachableVenue(String),
    #[error("map has no venues")]
    NoVenues,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub x: u16,
    pub y: u16,
}

impl Pos {
    pub fn new(x: u16, y: u16) -> Self {
        Self { x, y }
    }

    pub fn manhattan(self, other: Pos) -> u32 {
        u32::from(self.x.abs_diff(other.x)) + u32::from(self.y.abs_diff(other.y))
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Marker layers a tile can carry.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TileLayers(u8);

impl TileLayers {
    pub const BUILDING_INTERIOR: TileLayers = TileLayers(1);
    pub const ZEBRA_CROSSING: TileLayers = TileLayers(1 << 1);
    pub const HIGHWAY: TileLayers = TileLayers(1 << 2);
    pub const PMV_STATION: TileLayers = TileLayers(1 << 3);
    pub const BUS_STATION: TileLayers = TileLayers(1 << 4);

    pub fn contains(self, other: TileLayers) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn insert(&mut self, other: TileLayers) {
        self.0 |= other.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tile {
    pub x: u16,
    pub y: u16,
    pub walkable: bool,
    pub layers: TileLayers,
}

impl Tile {
    pub fn pos(&self) -> Pos {
        Pos::new(self.x, self.y)
    }

    pub fn is_highway(&self) -> bool {
        self.layers.contains(TileLayers::HIGHWAY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VenueCategory {
    ResidentialRoom,
    Office,
    Canteen,
    Restaurant,
    ConvenienceStore,
    Cafe,
    Park,
    Hospital,
    Store,
    Stadium,
    Entertainment,
    Sports,
}

impl VenueCategory {
    pub const ALL: [VenueCategory; 12] = [
        VenueCategory::ResidentialRoom,
        VenueCategory::Office,
        VenueCategory::Canteen,
        VenueCategory::Restaurant,
        VenueCategory::ConvenienceStore,
        VenueCategory::Cafe,
        VenueCategory::Park,
        VenueCategory::Hospital,
        VenueCategory::Store,
        VenueCategory::Stadium,
        VenueCategory::Entertainment,
        VenueCategory::Sports,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VenueCategory::ResidentialRoom => "residential-room",
            VenueCategory::Office => "office",
            VenueCategory::Canteen => "canteen",
            VenueCategory::Restaurant => "restaurant",
            VenueCategory::ConvenienceStore => "convenience-store",
            VenueCategory::Cafe => "cafe",
            VenueCategory::Park => "park",
            VenueCategory::Hospital => "hospital",
            VenueCategory::Store => "store",
            VenueCategory::Stadium => "stadium",
            VenueCategory::Entertainment => "entertainment",
            VenueCategory::Sports => "sports",
        }
    }
}

impl fmt::Display for VenueCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VenueCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VenueCategory::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown venue category `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VenueId(pub u32);

impl VenueId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BuildingId(pub u32);

#[derive(Debug, Clone, PartialEq)]
pub struct Venue {
    pub id: VenueId,
    pub name: String,
    pub category: VenueCategory,
    pub building: BuildingId,
    pub tiles: Vec<Pos>,
    /// Tile agents travel to and from: the venue tile closest to its centroid.
    pub anchor: Pos,
    /// Opening minute-of-day.
    pub open: u32,
    /// Closing minute-of-day.
    pub close: u32,
}

impl Venue {
    pub fn is_always_open(&self) -> bool {
        self.open == 0 && self.close == 1440
    }
}

/// True iff a visit `[t_arrive, t_arrive + duration]` lies inside the venue's
/// opening window.
pub fn venue_open(venue: &Venue, t_arrive: f64, duration: f64) -> bool {
    debug_assert!(duration >= 0.0);
    t_arrive >= f64::from(venue.open) && t_arrive + duration <= f64::from(venue.close)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Building {
    pub id: BuildingId,
    pub name: String,
    pub kind: String,
    pub symbol: char,
    pub venues: Vec<VenueId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Station {
    pub symbol: char,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BusRoute {
    pub name: String,
    /// Station symbols in travel order; the route loops back to the first.
    pub stations: Vec<char>,
}

#[derive(Debug, Clone)]
pub struct CityMap {
    width: u16,
    height: u16,
    tiles: Vec<Tile>,
    tile_building: Vec<Option<BuildingId>>,
    tile_venue: Vec<Option<VenueId>>,
    buildings: Vec<Building>,
    venues: Vec<Venue>,
    pmv_stations: Vec<Station>,
    bus_stations: Vec<Station>,
    bus_routes: Vec<BusRoute>,
    document: MapDocument,
}

impl CityMap {
    /// Parses and validates a map document in TOML form.
    pub fn from_toml(text: &str) -> Result<Self, MapError> {
        let doc: MapDocument =
            toml::from_str(text).map_err(|e| MapError::Malformed(e.to_string()))?;
        load_map(doc)
    }

    /// The bundled 18-building, 68-venue city.
    pub fn default_city() -> Self {
        Self::from_toml(DEFAULT_MAP).expect("bundled map is valid")
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn in_bounds(&self, x: i32, y: i32) -> bool {
        x >= 0 && y >= 0 && x < i32::from(self.width) && y < i32::from(self.height)
    }

    pub fn index_of(&self, p: Pos) -> usize {
        usize::from(p.y) * usize::from(self.width) + usize::from(p.x)
    }

    pub fn pos_of(&self, index: usize) -> Pos {
        let w = usize::from(self.width);
        Pos::new((index % w) as u16, (index / w) as u16)
    }

    pub fn tile(&self, p: Pos) -> &Tile {
        &self.tiles[self.index_of(p)]
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn venues(&self) -> &[Venue] {
        &self.venues
    }

    pub fn venue(&self, id: VenueId) -> &Venue {
        &self.venues[id.index()]
    }

    pub fn venue_by_name(&self, name: &str) -> Option<&Venue> {
        self.venues.iter().find(|v| v.name == name)
    }

    pub fn buildings(&self) -> &[Building] {
        &self.buildings
    }

    pub fn venue_at(&self, p: Pos) -> Option<VenueId> {
        self.tile_venue[self.index_of(p)]
    }

    pub fn building_at(&self, p: Pos) -> Option<BuildingId> {
        self.tile_building[self.index_of(p)]
    }

    pub fn pmv_stations(&self) -> &[Station] {
        &self.pmv_stations
    }

    pub fn bus_stations(&self) -> &[Station] {
        &self.bus_stations
    }

    pub fn bus_routes(&self) -> &[BusRoute] {
        &self.bus_routes
    }

    pub fn venues_of(&self, category: VenueCategory) -> impl Iterator<Item = &Venue> {
        self.venues.iter().filter(move |v| v.category == category)
    }

    /// The document this map was loaded from.
    pub fn document(&self) -> &MapDocument {
        &self.document
    }

    /// 4-neighbours inside the grid, in fixed (up, left, right, down) order.
    pub fn neighbours(&self, p: Pos) -> impl Iterator<Item = Pos> + '_ {
        const DIRS: [(i32, i32); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
        DIRS.iter().filter_map(move |(dx, dy)| {
            let (x, y) = (i32::from(p.x) + dx, i32::from(p.y) + dy);
            self.in_bounds(x, y).then(|| Pos::new(x as u16, y as u16))
        })
    }
}

/// Validates a parsed document and builds the immutable map.
pub fn load_map(doc: MapDocument) -> Result<CityMap, MapError> {
    let width = doc.width;
    let height = doc.height;
    if width == 0 || height == 0 {
        return Err(MapError::Malformed("width and height must be positive".into()));
    }
    let n = usize::from(width) * usize::from(height);

    let walkable = bool_layer(&doc.layers.walkable, "walkable", width, height)?;
    let highway = bool_layer(&doc.layers.highway, "highway", width, height)?;
    let zebra = bool_layer(&doc.layers.zebra, "zebra", width, height)?;
    let pmv = symbol_layer(&doc.layers.pmv, "pmv", width, height)?;
    let bus = symbol_layer(&doc.layers.bus, "bus", width, height)?;
    let building_cells = symbol_layer(&doc.layers.buildings, "buildings", width, height)?;

    let mut buildings = Vec::with_capacity(doc.buildings.len());
    let mut symbol_to_building = BTreeMap::new();
    for (i, b) in doc.buildings.iter().enumerate() {
        let symbol = single_char(&b.symbol)
            .ok_or_else(|| MapError::Malformed(format!("building symbol `{}`", b.symbol)))?;
        if symbol_to_building.insert(symbol, BuildingId(i as u32)).is_some() {
            return Err(MapError::Duplicate {
                kind: "building symbol",
                name: b.symbol.clone(),
            });
        }
        buildings.push(Building {
            id: BuildingId(i as u32),
            name: b.name.clone(),
            kind: b.kind.clone(),
            symbol,
            venues: Vec::new(),
        });
    }

    let mut tiles = Vec::with_capacity(n);
    let mut tile_building = vec![None; n];
    for i in 0..n {
        let (x, y) = ((i % usize::from(width)) as u16, (i / usize::from(width)) as u16);
        let mut layers = TileLayers::default();
        if let Some(sym) = building_cells[i] {
            let id = *symbol_to_building
                .get(&sym)
                .ok_or(MapError::UnknownBuilding(sym))?;
            tile_building[i] = Some(id);
            layers.insert(TileLayers::BUILDING_INTERIOR);
        }
        if highway[i] {
            layers.insert(TileLayers::HIGHWAY);
        }
        if zebra[i] {
            if !highway[i] {
                return Err(MapError::BadZebra {
                    x,
                    y,
                    reason: "it is not on a highway",
                });
            }
            if !walkable[i] {
                return Err(MapError::BadZebra {
                    x,
                    y,
                    reason: "it is not walkable",
                });
            }
            layers.insert(TileLayers::ZEBRA_CROSSING);
        } else if highway[i] && walkable[i] {
            return Err(MapError::WalkableHighway { x, y });
        }
        if pmv[i].is_some() {
            layers.insert(TileLayers::PMV_STATION);
        }
        if bus[i].is_some() {
            layers.insert(TileLayers::BUS_STATION);
        }
        tiles.push(Tile {
            x,
            y,
            walkable: walkable[i],
            layers,
        });
    }

    let mut venues = Vec::with_capacity(doc.venues.len());
    let mut tile_venue = vec![None; n];
    let mut seen_names = BTreeMap::new();
    for (i, v) in doc.venues.iter().enumerate() {
        let id = VenueId(i as u32);
        if seen_names.insert(v.name.clone(), id).is_some() {
            return Err(MapError::Duplicate {
                kind: "venue",
                name: v.name.clone(),
            });
        }
        let category = VenueCategory::from_str(&v.category).map_err(MapError::Malformed)?;
        let bsym = single_char(&v.building)
            .ok_or_else(|| MapError::Malformed(format!("venue building `{}`", v.building)))?;
        let building = *symbol_to_building
            .get(&bsym)
            .ok_or(MapError::UnknownBuilding(bsym))?;
        let [open, close] = v.open;
        if open >= close || close > 1440 {
            return Err(MapError::BadOpeningWindow {
                venue: v.name.clone(),
                start: open,
                close,
            });
        }
        let mut vt: Vec<Pos> = v.tiles.iter().map(|&[x, y]| Pos::new(x, y)).collect();
        for &[x0, y0, x1, y1] in &v.rects {
            for y in y0.min(y1)..=y0.max(y1) {
                for x in x0.min(x1)..=x0.max(x1) {
                    vt.push(Pos::new(x, y));
                }
            }
        }
        vt.sort_by_key(|p| (p.y, p.x));
        vt.dedup();
        if vt.is_empty() {
            return Err(MapError::EmptyVenue {
                venue: v.name.clone(),
            });
        }
        for p in &vt {
            let inside = p.x < width && p.y < height && {
                let idx = usize::from(p.y) * usize::from(width) + usize::from(p.x);
                tile_building[idx] == Some(building)
            };
            if !inside {
                return Err(MapError::VenueOutsideBuilding {
                    venue: v.name.clone(),
                    building: buildings[building.0 as usize].name.clone(),
                    x: p.x,
                    y: p.y,
                });
            }
            let idx = usize::from(p.y) * usize::from(width) + usize::from(p.x);
            if !walkable[idx] {
                return Err(MapError::VenueTileBlocked {
                    venue: v.name.clone(),
                    x: p.x,
                    y: p.y,
                });
            }
            if tile_venue[idx].is_some() {
                return Err(MapError::Duplicate {
                    kind: "venue tile",
                    name: format!("{} at {p}", v.name),
                });
            }
            tile_venue[idx] = Some(id);
        }
        let anchor = centroid_tile(&vt);
        buildings[building.0 as usize].venues.push(id);
        venues.push(Venue {
            id,
            name: v.name.clone(),
            category,
            building,
            tiles: vt,
            anchor,
            open,
            close,
        });
    }
    if venues.is_empty() {
        return Err(MapError::NoVenues);
    }

    let pmv_stations = collect_stations(&pmv, width);
    let bus_stations = collect_stations(&bus, width);
    let bus_routes = doc
        .bus_routes
        .iter()
        .map(|r| BusRoute {
            name: r.name.clone(),
            stations: r.stations.chars().collect(),
        })
        .collect();

    let map = CityMap {
        width,
        height,
        tiles,
        tile_building,
        tile_venue,
        buildings,
        venues,
        pmv_stations,
        bus_stations,
        bus_routes,
        document: doc,
    };
    check_building_connectivity(&map)?;
    check_venue_reachability(&map)?;
    Ok(map)
}

fn single_char(s: &str) -> Option<char> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) if c != '.' && !c.is_whitespace() => Some(c),
        _ => None,
    }
}

fn check_rows(rows: &[String], layer: &str, width: u16, height: u16) -> Result<(), MapError> {
    if rows.len() != usize::from(height) {
        return Err(MapError::LayerShape {
            layer: layer.to_string(),
            expected: format!("{height} rows"),
            found: format!("{} rows", rows.len()),
        });
    }
    for (y, row) in rows.iter().enumerate() {
        let len = row.chars().count();
        if len != usize::from(width) {
            return Err(MapError::LayerShape {
                layer: layer.to_string(),
                expected: format!("{width} columns"),
                found: format!("{len} columns in row {y}"),
            });
        }
    }
    Ok(())
}

fn bool_layer(rows: &[String], layer: &str, width: u16, height: u16) -> Result<Vec<bool>, MapError> {
    check_rows(rows, layer, width, height)?;
    let mut out = Vec::with_capacity(usize::from(width) * usize::from(height));
    for (y, row) in rows.iter().enumerate() {
        for (x, ch) in row.chars().enumerate() {
            out.push(match ch {
                '#' => true,
                '.' => false,
                _ => {
                    return Err(MapError::BadCell {
                        layer: layer.to_string(),
                        ch,
                        x: x as u16,
                        y: y as u16,
                    })
                }
            });
        }
    }
    Ok(out)
}

fn symbol_layer(
    rows: &[String],
    layer: &str,
    width: u16,
    height: u16,
) -> Result<Vec<Option<char>>, MapError> {
    check_rows(rows, layer, width, height)?;
    let mut out = Vec::with_capacity(usize::from(width) * usize::from(height));
    for (y, row) in rows.iter().enumerate() {
        for (x, ch) in row.chars().enumerate() {
            out.push(match ch {
                '.' => None,
                c if c.is_ascii_alphanumeric() => Some(c),
                _ => {
                    return Err(MapError::BadCell {
                        layer: layer.to_string(),
                        ch,
                        x: x as u16,
                        y: y as u16,
                    })
                }
            });
        }
    }
    Ok(out)
}

fn collect_stations(layer: &[Option<char>], width: u16) -> Vec<Station> {
    let w = usize::from(width);
    let mut out: Vec<Station> = layer
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            s.map(|symbol| Station {
                symbol,
                pos: Pos::new((i % w) as u16, (i / w) as u16),
            })
        })
        .collect();
    out.sort_by_key(|s| s.symbol);
    out
}

fn centroid_tile(tiles: &[Pos]) -> Pos {
    let n = tiles.len() as f64;
    let cx = tiles.iter().map(|p| f64::from(p.x)).sum::<f64>() / n;
    let cy = tiles.iter().map(|p| f64::from(p.y)).sum::<f64>() / n;
    // tiles are sorted row-major, so min_by keeps the lexicographically first on ties
    *tiles
        .iter()
        .min_by(|a, b| {
            let da = (f64::from(a.x) - cx).powi(2) + (f64::from(a.y) - cy).powi(2);
            let db = (f64::from(b.x) - cx).powi(2) + (f64::from(b.y) - cy).powi(2);
            da.total_cmp(&db)
        })
        .expect("non-empty venue")
}

fn check_building_connectivity(map: &CityMap) -> Result<(), MapError> {
    let n = map.tiles.len();
    for b in &map.buildings {
        let cells: Vec<usize> = (0..n)
            .filter(|&i| map.tile_building[i] == Some(b.id) && map.tiles[i].walkable)
            .collect();
        let Some(&start) = cells.first() else {
            continue;
        };
        let mut seen = vec![false; n];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for q in map.neighbours(map.pos_of(i)) {
                let j = map.index_of(q);
                if !seen[j] && map.tile_building[j] == Some(b.id) && map.tiles[j].walkable {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        if count != cells.len() {
            return Err(MapError::DisconnectedBuilding(b.name.clone()));
        }
    }
    Ok(())
}

/// Walking-reachable tiles from `from`.
pub fn walking_component(map: &CityMap, from: Pos) -> Vec<bool> {
    let mut seen = vec![false; map.tiles.len()];
    let start = map.index_of(from);
    if !map.tiles[start].walkable {
        return seen;
    }
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        for q in map.neighbours(map.pos_of(i)) {
            let j = map.index_of(q);
            if !seen[j] && map.tiles[j].walkable {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen
}

fn check_venue_reachability(map: &CityMap) -> Result<(), MapError> {
    let seen = walking_component(map, map.venues[0].anchor);
    for v in &map.venues[1..] {
        if !seen[map.index_of(v.anchor)] {
            return Err(MapError::UnreachableVenue(v.name.clone()));
        }
    }
    Ok(())
}
