use serde::{Deserialize, Serialize};

/// Serialized form of a city map (TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDocument {
    pub width: u16,
    pub height: u16,
    pub layers: LayersDoc,
    #[serde(default)]
    pub buildings: Vec<BuildingDoc>,
    #[serde(default)]
    pub venues: Vec<VenueDoc>,
    #[serde(default)]
    pub bus_routes: Vec<BusRouteDoc>,
}

/// One character grid per layer, rows top to bottom.
///
/// `walkable`, `highway` and `zebra` use `#` for set and `.` for unset.
/// `pmv` and `bus` hold a station symbol (ASCII letter or digit) or `.`.
/// `buildings` holds the owning building's symbol or `.`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayersDoc {
    pub walkable: Vec<String>,
    pub highway: Vec<String>,
    pub zebra: Vec<String>,
    pub pmv: Vec<String>,
    pub bus: Vec<String>,
    pub buildings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildingDoc {
    pub symbol: String,
    pub name: String,
    #[serde(default)]
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VenueDoc {
    pub name: String,
    pub category: String,
    pub building: String,
    /// Inclusive rectangles `[x0, y0, x1, y1]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rects: Vec<[u16; 4]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tiles: Vec<[u16; 2]>,
    /// `[open, close]` in minutes of day.
    pub open: [u32; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusRouteDoc {
    pub name: String,
    /// Station symbols in travel order, e.g. `"ABCD"`; the route loops.
    pub stations: String,
}

impl MapDocument {
    /// Renders the document with one grid row per line.
    pub fn to_toml(&self) -> String {
        #[derive(Serialize)]
        struct Tables<'a> {
            buildings: &'a [BuildingDoc],
            venues: &'a [VenueDoc],
            bus_routes: &'a [BusRouteDoc],
        }

        let mut out = format!("width = {}\nheight = {}\n\n[layers]\n", self.width, self.height);
        let l = &self.layers;
        for (name, rows) in [
            ("walkable", &l.walkable),
            ("highway", &l.highway),
            ("zebra", &l.zebra),
            ("pmv", &l.pmv),
            ("bus", &l.bus),
            ("buildings", &l.buildings),
        ] {
            out.push_str(name);
            out.push_str(" = [\n");
            for row in rows {
                out.push_str(&format!("  \"{row}\",\n"));
            }
            out.push_str("]\n");
        }
        out.push('\n');
        let tables = Tables {
            buildings: &self.buildings,
            venues: &self.venues,
            bus_routes: &self.bus_routes,
        };
        out.push_str(&toml::to_string(&tables).expect("map tables always serialize"));
        out
    }
}
