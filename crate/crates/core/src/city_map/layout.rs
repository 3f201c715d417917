//! Programmatic construction of block-grid cities.
//!
//! Every block is 20×20 tiles: a 2-tile highway strip along its north and
//! west edges and an 18×18 building footprint. A trailing highway ring closes
//! the east and south edges of the city. Adjacent blocks are joined by a
//! zebra crossing at the middle of the shared road.

use super::document::{BuildingDoc, BusRouteDoc, LayersDoc, MapDocument, VenueDoc};
use super::{Pos, VenueCategory, BLOCK_TILES};

const ROAD: u16 = 2;
const CROSSING_OFFSET: u16 = 11;

#[derive(Debug, Clone)]
pub struct VenueSpec {
    pub name: String,
    pub category: VenueCategory,
    pub open: [u32; 2],
}

#[derive(Debug, Clone)]
pub struct BlockSpec {
    pub name: String,
    pub kind: String,
    pub venues: Vec<VenueSpec>,
}

/// Side of a block footprint a station sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    North,
    South,
    West,
    East,
}

#[derive(Debug, Clone)]
pub struct GridCityBuilder {
    blocks_x: u16,
    blocks_y: u16,
    blocks: Vec<Option<BlockSpec>>,
    pmv: Vec<(char, Pos)>,
    bus: Vec<(char, Pos)>,
    routes: Vec<(String, String)>,
}

const BUILDING_SYMBOLS: &str = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

impl GridCityBuilder {
    pub fn new(blocks_x: u16, blocks_y: u16) -> Self {
        Self {
            blocks_x,
            blocks_y,
            blocks: vec![None; usize::from(blocks_x) * usize::from(blocks_y)],
            pmv: Vec::new(),
            bus: Vec::new(),
            routes: Vec::new(),
        }
    }

    pub fn width(&self) -> u16 {
        self.blocks_x * BLOCK_TILES + ROAD
    }

    pub fn height(&self) -> u16 {
        self.blocks_y * BLOCK_TILES + ROAD
    }

    pub fn block(mut self, bx: u16, by: u16, spec: BlockSpec) -> Self {
        assert!(bx < self.blocks_x && by < self.blocks_y, "block out of range");
        self.blocks[usize::from(by) * usize::from(self.blocks_x) + usize::from(bx)] = Some(spec);
        self
    }

    /// Tile on the edge of block `(bx, by)`'s footprint, `offset` tiles along
    /// that edge (0..18), adjacent to the road on `side`.
    pub fn edge_tile(bx: u16, by: u16, side: Side, offset: u16) -> Pos {
        let (x0, y0) = (bx * BLOCK_TILES + ROAD, by * BLOCK_TILES + ROAD);
        let last = BLOCK_TILES - ROAD - 1;
        match side {
            Side::North => Pos::new(x0 + offset, y0),
            Side::South => Pos::new(x0 + offset, y0 + last),
            Side::West => Pos::new(x0, y0 + offset),
            Side::East => Pos::new(x0 + last, y0 + offset),
        }
    }

    pub fn pmv_station(mut self, symbol: char, pos: Pos) -> Self {
        self.pmv.push((symbol, pos));
        self
    }

    pub fn bus_station(mut self, symbol: char, pos: Pos) -> Self {
        self.bus.push((symbol, pos));
        self
    }

    pub fn bus_route(mut self, name: &str, stations: &str) -> Self {
        self.routes.push((name.to_string(), stations.to_string()));
        self
    }

    pub fn build(&self) -> MapDocument {
        let (w, h) = (usize::from(self.width()), usize::from(self.height()));
        let mut walkable = vec![vec!['.'; w]; h];
        let mut highway = vec![vec!['.'; w]; h];
        let mut zebra = vec![vec!['.'; w]; h];
        let mut pmv = vec![vec!['.'; w]; h];
        let mut bus = vec![vec!['.'; w]; h];
        let mut owner = vec![vec!['.'; w]; h];
        let mut buildings = Vec::new();
        let mut venues = Vec::new();
        let mut symbols = BUILDING_SYMBOLS.chars();

        let bt = usize::from(BLOCK_TILES);
        let road = usize::from(ROAD);
        for (y, row) in highway.iter_mut().enumerate() {
            for (x, cell) in row.iter_mut().enumerate() {
                if x % bt < road || y % bt < road || x >= w - road || y >= h - road {
                    *cell = '#';
                }
            }
        }

        for by in 0..self.blocks_y {
            for bx in 0..self.blocks_x {
                let Some(spec) = &self.blocks[usize::from(by) * usize::from(self.blocks_x) + usize::from(bx)]
                else {
                    continue;
                };
                let symbol = symbols.next().expect("at most 62 buildings");
                let (x0, y0) = (usize::from(bx) * bt + road, usize::from(by) * bt + road);
                let side = bt - road;
                for row in owner.iter_mut().skip(y0).take(side) {
                    row[x0..x0 + side].fill(symbol);
                }
                for row in walkable.iter_mut().skip(y0).take(side) {
                    row[x0..x0 + side].fill('#');
                }
                buildings.push(BuildingDoc {
                    symbol: symbol.to_string(),
                    name: spec.name.clone(),
                    kind: spec.kind.clone(),
                });
                let rects = partition(spec.venues.len(), x0 as u16, y0 as u16, side as u16);
                for (v, rect) in spec.venues.iter().zip(rects) {
                    venues.push(VenueDoc {
                        name: v.name.clone(),
                        category: v.category.as_str().to_string(),
                        building: symbol.to_string(),
                        rects: vec![rect],
                        tiles: Vec::new(),
                        open: v.open,
                    });
                }
            }
        }

        // zebra crossings between horizontally and vertically adjacent blocks
        let off = usize::from(CROSSING_OFFSET);
        for by in 0..usize::from(self.blocks_y) {
            for bx in 0..usize::from(self.blocks_x) {
                if bx + 1 < usize::from(self.blocks_x) {
                    let y = by * bt + off;
                    for x in (bx + 1) * bt..(bx + 1) * bt + road {
                        zebra[y][x] = '#';
                        walkable[y][x] = '#';
                    }
                }
                if by + 1 < usize::from(self.blocks_y) {
                    let x = bx * bt + off;
                    for y in (by + 1) * bt..(by + 1) * bt + road {
                        zebra[y][x] = '#';
                        walkable[y][x] = '#';
                    }
                }
            }
        }

        for &(c, p) in &self.pmv {
            pmv[usize::from(p.y)][usize::from(p.x)] = c;
        }
        for &(c, p) in &self.bus {
            bus[usize::from(p.y)][usize::from(p.x)] = c;
        }

        let rows = |g: Vec<Vec<char>>| g.into_iter().map(|r| r.into_iter().collect()).collect();
        MapDocument {
            width: self.width(),
            height: self.height(),
            layers: LayersDoc {
                walkable: rows(walkable),
                highway: rows(highway),
                zebra: rows(zebra),
                pmv: rows(pmv),
                bus: rows(bus),
                buildings: rows(owner),
            },
            buildings,
            venues,
            bus_routes: self
                .routes
                .iter()
                .map(|(name, stations)| BusRouteDoc {
                    name: name.clone(),
                    stations: stations.clone(),
                })
                .collect(),
        }
    }
}

/// Splits a square footprint into `n` rectangles on a near-square grid,
/// leaving a one-tile passage on the east and south side of each cell.
fn partition(n: usize, x0: u16, y0: u16, side: u16) -> Vec<[u16; 4]> {
    if n == 0 {
        return Vec::new();
    }
    let cols = (n as f64).sqrt().ceil() as u16;
    let rows = (n as u16).div_ceil(cols);
    let cw = side / cols;
    let ch = side / rows;
    (0..n as u16)
        .map(|i| {
            let (c, r) = (i % cols, i / cols);
            let (x, y) = (x0 + c * cw, y0 + r * ch);
            [x, y, x + cw - 2, y + ch - 2]
        })
        .collect()
}

fn venue(name: impl Into<String>, category: VenueCategory, open: [u32; 2]) -> VenueSpec {
    VenueSpec {
        name: name.into(),
        category,
        open,
    }
}

const ALWAYS: [u32; 2] = [0, 1440];

/// Block with `n` generic venues cycling through the non-residential
/// categories; used for synthetic test maps.
pub fn generic_block(name: &str, n: usize) -> BlockSpec {
    let cats = [
        VenueCategory::ResidentialRoom,
        VenueCategory::Office,
        VenueCategory::Cafe,
        VenueCategory::Park,
        VenueCategory::Restaurant,
        VenueCategory::ConvenienceStore,
    ];
    BlockSpec {
        name: name.to_string(),
        kind: "mixed".to_string(),
        venues: (0..n)
            .map(|i| venue(format!("{name}-{i}"), cats[i % cats.len()], ALWAYS))
            .collect(),
    }
}

/// A `blocks`×`blocks` city where every block holds `venues_per_block`
/// venues, with a PMV station and bus stops on every block's north edge
/// and one clockwise bus loop around the outer blocks.
pub fn test_grid(blocks: u16, venues_per_block: usize) -> MapDocument {
    let mut b = GridCityBuilder::new(blocks, blocks);
    let mut station_symbols = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789".chars();
    for by in 0..blocks {
        for bx in 0..blocks {
            b = b.block(bx, by, generic_block(&format!("b{bx}-{by}"), venues_per_block));
            if (bx + by) % 2 == 0 {
                let sym = station_symbols.next().expect("enough symbols");
                b = b.pmv_station(sym, GridCityBuilder::edge_tile(bx, by, Side::North, 4));
            }
        }
    }
    let mut ring = Vec::new();
    for bx in 0..blocks {
        ring.push((bx, 0));
    }
    for by in 1..blocks {
        ring.push((blocks - 1, by));
    }
    for bx in (0..blocks.saturating_sub(1)).rev() {
        ring.push((bx, blocks - 1));
    }
    for by in (1..blocks.saturating_sub(1)).rev() {
        ring.push((0, by));
    }
    let mut route = String::new();
    let mut bus_symbols = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz".chars();
    for (bx, by) in ring {
        let sym = bus_symbols.next().expect("enough symbols");
        route.push(sym);
        b = b.bus_station(sym, GridCityBuilder::edge_tile(bx, by, Side::North, 14));
    }
    if route.chars().count() >= 2 {
        b = b.bus_route("ring", &route);
    }
    b.build()
}

/// Document for the bundled default city: 6×3 blocks, 18 buildings and 68
/// venues, two bus loops and a handful of PMV docks.
pub fn default_document() -> MapDocument {
    use VenueCategory::*;

    const OFFICE_HOURS: [u32; 2] = [360, 1320];
    const CANTEEN: [u32; 2] = [420, 1260];
    const RESTAURANT: [u32; 2] = [420, 1380];
    const CAFE: [u32; 2] = [420, 1200];
    const HOSPITAL: [u32; 2] = [540, 1080];
    const STORE: [u32; 2] = [600, 1260];
    const STADIUM: [u32; 2] = [600, 1380];
    const NIGHTLIFE: [u32; 2] = [900, 1440];
    const GYM: [u32; 2] = [360, 1320];

    let apartment = |n: u32| {
        let name = format!("apartment-{n}");
        let mut venues: Vec<VenueSpec> = (1..=4)
            .map(|r| venue(format!("{name}-room-{r}"), ResidentialRoom, ALWAYS))
            .collect();
        venues.push(venue(format!("{name}-restaurant"), Restaurant, RESTAURANT));
        if n % 2 == 1 {
            venues.push(venue(format!("{name}-mart"), ConvenienceStore, ALWAYS));
        } else {
            venues.push(venue(format!("{name}-arcade"), Entertainment, NIGHTLIFE));
        }
        BlockSpec {
            name,
            kind: "apartment".into(),
            venues,
        }
    };
    let office = |n: u32| {
        let name = format!("office-{n}");
        let mut venues: Vec<VenueSpec> = (1..=3)
            .map(|f| venue(format!("{name}-floor-{f}"), Office, OFFICE_HOURS))
            .collect();
        venues.push(venue(format!("{name}-canteen"), Canteen, CANTEEN));
        venues.push(venue(format!("{name}-mart"), ConvenienceStore, ALWAYS));
        BlockSpec {
            name,
            kind: "office".into(),
            venues,
        }
    };
    let park = |n: u32| BlockSpec {
        name: format!("park-{n}"),
        kind: "park".into(),
        venues: vec![venue(format!("park-{n}"), Park, ALWAYS)],
    };
    let hospital = BlockSpec {
        name: "hospital".into(),
        kind: "hospital".into(),
        venues: vec![venue("hospital", Hospital, HOSPITAL)],
    };
    let department = BlockSpec {
        name: "department-store".into(),
        kind: "store".into(),
        venues: vec![
            venue("department-store", Store, STORE),
            venue("department-store-cafe", Cafe, CAFE),
        ],
    };
    let stadium = BlockSpec {
        name: "stadium".into(),
        kind: "stadium".into(),
        venues: vec![venue("stadium", Stadium, STADIUM), venue("stadium-gym", Sports, GYM)],
    };

    let rows: [[BlockSpec; 6]; 3] = [
        [apartment(1), apartment(2), office(1), park(1), apartment(3), park(2)],
        [park(3), apartment(4), department, hospital, apartment(5), stadium],
        [apartment(6), park(4), apartment(7), office(2), park(5), apartment(8)],
    ];
    let mut b = GridCityBuilder::new(6, 3);
    for (by, row) in rows.into_iter().enumerate() {
        for (bx, spec) in row.into_iter().enumerate() {
            b = b.block(bx as u16, by as u16, spec);
        }
    }

    // PMV docks on the west edge of a few blocks
    for (sym, (bx, by)) in "123456".chars().zip([(0, 0), (3, 0), (2, 1), (5, 1), (1, 2), (4, 2)]) {
        b = b.pmv_station(sym, GridCityBuilder::edge_tile(bx, by, Side::West, 8));
    }

    // line 1 runs east along the north side of row 1 and back west along the
    // south side of row 0; line 2 does the same between rows 1 and 2
    let line = |b: GridCityBuilder, symbols: &str, north_row: u16| {
        let south_row = north_row - 1;
        let stops = [
            (0, north_row, Side::North),
            (2, north_row, Side::North),
            (4, north_row, Side::North),
            (5, south_row, Side::South),
            (3, south_row, Side::South),
            (1, south_row, Side::South),
        ];
        stops
            .iter()
            .zip(symbols.chars())
            .fold(b, |b, (&(bx, by, side), sym)| {
                b.bus_station(sym, GridCityBuilder::edge_tile(bx, by, side, 8))
            })
    };
    b = line(b, "ABCDEF", 1);
    b = line(b, "GHIJKL", 2);
    b = b.bus_route("line-1", "ABCDEF").bus_route("line-2", "GHIJKL");
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::city_map::{load_map, CityMap};

    #[test]
    fn bundled_file_matches_generator() {
        let text = include_str!("../../data/default_map.toml");
        let doc: MapDocument = toml::from_str(text).unwrap();
        assert_eq!(doc, default_document());
    }

    /// Rewrites the bundled map from the generator: `cargo test -- --ignored regenerate`.
    #[test]
    #[ignore]
    fn regenerate_default_map() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/default_map.toml");
        std::fs::write(path, default_document().to_toml()).unwrap();
    }

    #[test]
    fn test_grid_loads() {
        let map = load_map(test_grid(6, 2)).unwrap();
        assert_eq!(map.buildings().len(), 36);
        assert_eq!(map.venues().len(), 72);
        assert_eq!(map.width(), 122);
    }

    #[test]
    fn partition_cells_are_disjoint() {
        for n in 1..=9 {
            let rects = partition(n, 2, 2, 18);
            assert_eq!(rects.len(), n);
            for r in &rects {
                assert!(r[2] <= 19 && r[3] <= 19 && r[0] <= r[2] && r[1] <= r[3]);
            }
        }
        let _ = CityMap::default_city();
    }
}
