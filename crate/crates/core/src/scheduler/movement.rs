use crate::city_map::{CityMap, Pos, VenueId};
use crate::time::STEP_MINUTES;
use crate::transport::{
    Mode, RouteOption, BUS_TICKS, PMV_TICKS, TICKS_PER_STEP, WALK_TICKS,
};

/// A logged point along a trip. `t` is minutes after departure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub t: f64,
    pub tile: Pos,
    pub venue: Option<VenueId>,
    /// Mode used to reach this tile.
    pub mode: Mode,
    pub arrived: bool,
}

fn per_tile(mode: Mode) -> u32 {
    match mode {
        Mode::Walking => WALK_TICKS,
        Mode::Pmv => PMV_TICKS,
        Mode::Bus => BUS_TICKS,
    }
}

/// Tick at which each tile of the route is reached.
fn timeline(route: &RouteOption) -> Vec<(u32, Pos, Mode)> {
    let mut out: Vec<(u32, Pos, Mode)> = Vec::with_capacity(route.path.len());
    let Some(first) = route.legs.first() else {
        return out;
    };
    out.push((0, first.tiles[0], first.mode));
    let mut tick = 0;
    for leg in &route.legs {
        let hops = leg.tiles.len().saturating_sub(1) as u32;
        let step = per_tile(leg.mode);
        tick += leg.ticks - step * hops;
        for &p in &leg.tiles[1..] {
            tick += step;
            out.push((tick, p, leg.mode));
        }
    }
    out
}

fn quantize(tick: u32) -> f64 {
    f64::from(tick.div_ceil(TICKS_PER_STEP)) * STEP_MINUTES
}

/// Waypoints for a trip to `dest`: the departure, every venue boundary
/// crossing and mode change, and the arrival. With `dense`, also the
/// position at every step. Times are rounded up to whole steps. An empty
/// route yields nothing.
pub fn step_movement(map: &CityMap, route: &RouteOption, dest: VenueId, dense: bool) -> Vec<Waypoint> {
    let tl = timeline(route);
    if tl.len() < 2 {
        return Vec::new();
    }
    let total = f64::from(route.time_steps) * STEP_MINUTES;
    let mut out = vec![Waypoint {
        t: 0.0,
        tile: tl[0].1,
        venue: map.venue_at(tl[0].1),
        mode: tl[0].2,
        arrived: false,
    }];
    if dense {
        let mut k = 0;
        for s in 1..route.time_steps {
            let limit = s * TICKS_PER_STEP;
            while k + 1 < tl.len() && tl[k + 1].0 <= limit {
                k += 1;
            }
            let (_, p, m) = tl[k];
            let mode = if k == 0 { tl[1].2 } else { m };
            out.push(Waypoint {
                t: f64::from(s) * STEP_MINUTES,
                tile: p,
                venue: map.venue_at(p),
                mode,
                arrived: false,
            });
        }
    } else {
        for k in 1..tl.len() - 1 {
            let (tick, p, m) = tl[k];
            let venue = map.venue_at(p);
            let crossing = venue != map.venue_at(tl[k - 1].1);
            let leg_end = tl[k + 1].2 != m;
            if crossing || leg_end {
                out.push(Waypoint {
                    t: quantize(tick),
                    tile: p,
                    venue,
                    mode: m,
                    arrived: false,
                });
            }
        }
    }
    let &(_, p, m) = tl.last().expect("non-empty");
    out.push(Waypoint {
        t: total,
        tile: p,
        venue: Some(dest),
        mode: m,
        arrived: true,
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::{Leg, TransitGraphs};

    fn straight(mode: Mode, n: u16) -> RouteOption {
        let tiles: Vec<Pos> = (0..=n).map(|x| Pos { x, y: 0 }).collect();
        let ticks = per_tile(mode) * u32::from(n);
        RouteOption {
            mode,
            path: tiles.clone(),
            legs: vec![Leg { mode, tiles, ticks }],
            time_steps: ticks.div_ceil(TICKS_PER_STEP),
            money_cost: 0,
        }
    }

    #[test]
    fn twenty_tile_walk_takes_five_minutes() {
        let map = CityMap::default_city();
        let r = straight(Mode::Walking, 20);
        assert_eq!(r.minutes(), 5.0);
        let w = step_movement(&map, &r, VenueId(0), false);
        assert_eq!(w.last().unwrap().t, 5.0);
        assert!(w.last().unwrap().arrived);
        let dense = step_movement(&map, &r, VenueId(0), true);
        assert_eq!(dense.len(), 21);
        assert_eq!(dense[4].tile, Pos { x: 4, y: 0 });
    }

    #[test]
    fn bus_leg_of_twenty_tiles_takes_one_minute() {
        let r = straight(Mode::Bus, 20);
        assert_eq!(r.time_steps, 4);
        assert_eq!(r.minutes(), 1.0);
    }

    #[test]
    fn empty_route_emits_nothing() {
        let map = CityMap::default_city();
        let r = RouteOption {
            mode: Mode::Walking,
            path: vec![],
            legs: vec![],
            time_steps: 0,
            money_cost: 0,
        };
        assert!(step_movement(&map, &r, VenueId(0), false).is_empty());
    }

    #[test]
    fn real_trips_are_monotone_and_end_at_the_anchor() {
        let map = CityMap::default_city();
        let g = TransitGraphs::build(&map).unwrap();
        let n = map.venues().len() as u32;
        for (s, t) in [(0, n - 1), (3, 40), (10, 11)] {
            for opt in g.route_options(VenueId(s), VenueId(t)).unwrap() {
                for dense in [false, true] {
                    let w = step_movement(&map, &opt, VenueId(t), dense);
                    assert!(w.len() >= 2);
                    assert!(w.windows(2).all(|p| p[0].t <= p[1].t));
                    assert_eq!(w[0].tile, map.venue(VenueId(s)).anchor);
                    let last = w.last().unwrap();
                    assert_eq!(last.tile, map.venue(VenueId(t)).anchor);
                    assert_eq!(last.t, opt.minutes());
                    if dense {
                        assert_eq!(w.len() as u32, opt.time_steps + 1);
                    }
                }
            }
        }
    }
}
