use super::{ticks_to_steps, Mode, RouteOption, ShortestTree, TransitGraphs, TransportError};
use crate::city_map::VenueId;

/// Time and fare of one offered mode between two venues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeSummary {
    pub mode: Mode,
    pub steps: u32,
    pub money: u32,
}

impl ModeSummary {
    pub fn minutes(&self) -> f64 {
        crate::time::steps_to_minutes(self.steps)
    }
}

/// Precomputed route options for every ordered venue pair.
///
/// Holds one shortest-path tree per (origin venue, mode), so full paths for
/// movement can be extracted without rerunning the search.
#[derive(Debug)]
pub struct RouteTable {
    graphs: TransitGraphs,
    n: usize,
    options: Vec<Vec<ModeSummary>>,
    trees: Vec<[ShortestTree; 3]>,
}

impl RouteTable {
    pub fn build(graphs: TransitGraphs) -> Self {
        let n = graphs.venue_count();
        let threads = std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1)
            .clamp(1, 16);
        let chunk = n.div_ceil(threads).max(1);
        let sources: Vec<usize> = (0..n).collect();
        let per_source: Vec<(Vec<Vec<ModeSummary>>, [ShortestTree; 3])> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = sources
                    .chunks(chunk)
                    .map(|part| {
                        let g = &graphs;
                        scope.spawn(move || {
                            part.iter()
                                .map(|&s| source_row(g, s))
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .flat_map(|h| h.join().expect("route worker panicked"))
                    .collect()
            });
        let mut options = Vec::with_capacity(n * n);
        let mut trees = Vec::with_capacity(n);
        for (row, t) in per_source {
            options.extend(row);
            trees.push(t);
        }
        Self {
            graphs,
            n,
            options,
            trees,
        }
    }

    pub fn graphs(&self) -> &TransitGraphs {
        &self.graphs
    }

    pub fn venue_count(&self) -> usize {
        self.n
    }

    /// Offered modes from `s` to `t`, fastest first.
    pub fn options(&self, s: VenueId, t: VenueId) -> &[ModeSummary] {
        &self.options[s.index() * self.n + t.index()]
    }

    pub fn fastest(&self, s: VenueId, t: VenueId) -> ModeSummary {
        self.options(s, t)[0]
    }

    pub fn option(&self, s: VenueId, t: VenueId, mode: Mode) -> Option<ModeSummary> {
        self.options(s, t).iter().copied().find(|o| o.mode == mode)
    }

    pub fn travel_time(&self, s: VenueId, t: VenueId, mode: Mode) -> Result<u32, TransportError> {
        self.option(s, t, mode)
            .map(|o| o.steps)
            .ok_or(TransportError::InfeasibleMode {
                mode,
                from: s.0,
                to: t.0,
            })
    }

    /// Full route for one offered mode.
    pub fn route(&self, s: VenueId, t: VenueId, mode: Mode) -> Option<RouteOption> {
        self.option(s, t, mode)?;
        self.graphs
            .extract(&self.trees[s.index()][mode.index()], self.graphs.anchor(t))
    }
}

fn source_row(g: &TransitGraphs, s: usize) -> (Vec<Vec<ModeSummary>>, [ShortestTree; 3]) {
    let src = g.anchor(VenueId(s as u32));
    let trees = Mode::ALL.map(|m| g.shortest_tree(src, m));
    let row = (0..g.venue_count())
        .map(|t| {
            let dst = g.anchor(VenueId(t as u32));
            let mut opts: Vec<ModeSummary> = Vec::with_capacity(3);
            for (mode, tree) in Mode::ALL.into_iter().zip(&trees) {
                let Some(ticks) = g.tree_ticks(tree, dst) else {
                    continue;
                };
                if mode == Mode::Walking {
                    opts.push(ModeSummary {
                        mode,
                        steps: ticks_to_steps(ticks),
                        money: 0,
                    });
                } else if let Some(r) = g.extract(tree, dst).filter(|r| r.uses_vehicle()) {
                    opts.push(ModeSummary {
                        mode,
                        steps: r.time_steps,
                        money: r.money_cost,
                    });
                }
            }
            opts.sort_by_key(|o| (o.steps, o.mode));
            opts
        })
        .collect();
    (row, trees)
}
