//! Candidate assembly, decision requests and the backends that answer them.

mod backend;
mod mock;
mod parse;
mod prompt;
mod remote;

pub use backend::{BackendError, BackendStats, DecisionBackend, MockBackend};
pub use mock::{choose_mode, mock_decide};
pub use parse::{parse_response, ParseError};
pub use prompt::{build_prompt, whitespace_tokens};
pub use remote::{RemoteBackend, RemoteConfig, API_KEY_ENV};

use crate::catalog::{ActionId, ActionSpec, Catalog};
use crate::city_map::{CityMap, VenueCategory, VenueId, Weather};
use crate::habits::{habit_intensity, HabitRecord};
use crate::needs::{needs_score, NeedVector, NeedsError, NeedsParams};
use crate::obligations::{mask, MaskInput};
use crate::persona::{
    AgentId, Employment, FamilyStatus, Gender, Income, Persona,
};
use crate::time::Weekday;
use crate::transport::{Mode, RouteTable};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DecisionError {
    #[error("k_needs and k_habit must both be at least 1")]
    ZeroK,
    #[error(transparent)]
    Needs(#[from] NeedsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateSource {
    Needs,
    Habit,
}

/// One way of getting to a candidate's venue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeOption {
    pub mode: Mode,
    pub minutes: f64,
    pub money: u32,
    /// Whether the action still completes in time for the next obligation
    /// when travelling this way.
    pub fits: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub action: ActionId,
    pub name: String,
    pub venue: VenueId,
    pub venue_name: String,
    pub duration: u32,
    pub money: u32,
    pub source: CandidateSource,
    /// Needs score `N` or habit intensity `H`, depending on `source`.
    pub score: f64,
    /// Minutes to spare before the next obligation using the fastest mode.
    pub slack: f64,
    /// Sorted by mode index; never empty.
    pub options: Vec<ModeOption>,
}

impl Candidate {
    pub fn option(&self, mode: Mode) -> Option<&ModeOption> {
        self.options.iter().find(|o| o.mode == mode)
    }

    pub fn fastest(&self) -> &ModeOption {
        self.options
            .iter()
            .min_by(|a, b| a.minutes.total_cmp(&b.minutes).then(a.mode.cmp(&b.mode)))
            .expect("candidates always offer a mode")
    }
}

/// The persona attributes a backend sees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonaSummary {
    pub age: u8,
    pub gender: Gender,
    pub job: String,
    pub employment: Employment,
    pub income: Income,
    pub family: FamilyStatus,
    pub hobbies: Vec<String>,
}

impl From<&Persona> for PersonaSummary {
    fn from(p: &Persona) -> Self {
        let d = &p.demographics;
        Self {
            age: d.age,
            gender: d.gender,
            job: d.job.clone(),
            employment: d.employment,
            income: d.income,
            family: d.family,
            hobbies: p.hobbies.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObligationSummary {
    pub label: String,
    pub venue_name: String,
    /// Minutes from today's midnight.
    pub start: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRequest {
    pub agent: AgentId,
    pub day: Weekday,
    /// Minute of day.
    pub time: f64,
    pub persona: PersonaSummary,
    pub needs: NeedVector,
    pub weather: Weather,
    pub temperature: f64,
    pub location: String,
    pub next_obligation: Option<ObligationSummary>,
    pub candidates: Vec<Candidate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionResponse {
    pub candidate: usize,
    pub mode: Mode,
}

impl DecisionResponse {
    /// Whether the response names an existing candidate and one of its
    /// offered modes.
    pub fn is_valid_for(&self, request: &DecisionRequest) -> bool {
        request
            .candidates
            .get(self.candidate)
            .is_some_and(|c| c.option(self.mode).is_some())
    }
}

/// Union of the two ranked lists, needs first; an action present in both
/// keeps its needs entry.
pub fn merge_ranked(
    needs: &[(ActionId, f64)],
    habits: &[(ActionId, f64)],
) -> Vec<(ActionId, CandidateSource, f64)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(needs.len() + habits.len());
    for &(a, s) in needs {
        if seen.insert(a) {
            out.push((a, CandidateSource::Needs, s));
        }
    }
    for &(a, s) in habits {
        if seen.insert(a) {
            out.push((a, CandidateSource::Habit, s));
        }
    }
    out
}

/// Everything candidate assembly needs to know about one agent's situation.
pub struct CandidateContext<'a> {
    pub persona: &'a Persona,
    pub needs: &'a NeedVector,
    pub habits: &'a [HabitRecord],
    pub catalog: &'a Catalog,
    pub map: &'a CityMap,
    pub routes: &'a RouteTable,
    pub location: VenueId,
    /// Minute of day.
    pub t: f64,
    /// Absolute minute, used for habit forgetting.
    pub now: f64,
    /// Next obligation's start (minutes from today's midnight) and venue.
    pub next_obligation: Option<(f64, VenueId)>,
    pub k_needs: usize,
    pub k_habit: usize,
    pub params: NeedsParams,
}

struct Admissible {
    venue: VenueId,
    dt_next: f64,
    slack: f64,
}

impl CandidateContext<'_> {
    fn deadline(&self) -> f64 {
        self.next_obligation.map_or(f64::INFINITY, |(s, _)| s)
    }

    fn dt_next(&self, venue: VenueId) -> f64 {
        self.next_obligation
            .map_or(0.0, |(_, v)| self.routes.fastest(venue, v).minutes())
    }

    /// Venue for `action` passing the mask: home, the workplace, or the
    /// nearest open venue of the category (ties to the lower id).
    fn resolve(&self, action: &ActionSpec) -> Option<Admissible> {
        let fixed = match action.category {
            VenueCategory::ResidentialRoom => Some(self.persona.home),
            VenueCategory::Office => Some(self.persona.work?),
            _ => None,
        };
        let listed = fixed
            .is_none()
            .then(|| self.map.venues_of(action.category).map(|v| v.id))
            .into_iter()
            .flatten();
        let mut best: Option<(f64, VenueId, f64)> = None;
        for v in fixed.into_iter().chain(listed) {
            let dt_cur = self.routes.fastest(self.location, v).minutes();
            if best.is_some_and(|(d, _, _)| d <= dt_cur) {
                continue;
            }
            let dt_next = self.dt_next(v);
            let input = MaskInput {
                t: self.t,
                action,
                venue: self.map.venue(v),
                dt_cur,
                dt_next,
                next_obligation: self.deadline(),
            };
            if mask(&input) {
                best = Some((dt_cur, v, dt_next));
            }
        }
        best.map(|(dt_cur, venue, dt_next)| Admissible {
            venue,
            dt_next,
            slack: self.deadline() - (self.t + dt_cur + f64::from(action.duration) + dt_next),
        })
    }
}

/// Mask-filtered top-k needs and habit candidates, merged and re-indexed.
/// An empty result means the agent should idle.
pub fn assemble_candidates(ctx: &CandidateContext<'_>) -> Result<Vec<Candidate>, DecisionError> {
    if ctx.k_needs == 0 || ctx.k_habit == 0 {
        return Err(DecisionError::ZeroK);
    }
    let mut admissible = Vec::with_capacity(ctx.catalog.len());
    for a in ctx.catalog.voluntary() {
        if let Some(adm) = ctx.resolve(a) {
            admissible.push((a, adm));
        }
    }

    let mut by_needs = Vec::with_capacity(admissible.len());
    for (a, _) in &admissible {
        let s = needs_score(ctx.persona, ctx.needs, a, ctx.catalog.weights_for(a), &ctx.params)?;
        by_needs.push((a.id, s));
    }
    by_needs.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    by_needs.truncate(ctx.k_needs);

    let mut by_habit: Vec<(ActionId, f64)> = ctx
        .habits
        .iter()
        .filter(|r| admissible.iter().any(|(a, _)| a.id == r.action))
        .filter_map(|r| habit_intensity(r, ctx.now).ok().map(|h| (r.action, h)))
        .filter(|(_, h)| *h > 0.0)
        .collect();
    by_habit.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    by_habit.truncate(ctx.k_habit);

    let deadline = ctx.deadline();
    let mut out = Vec::with_capacity(by_needs.len() + by_habit.len());
    for (id, source, score) in merge_ranked(&by_needs, &by_habit) {
        let (action, adm) = admissible
            .iter()
            .find(|(a, _)| a.id == id)
            .expect("ranked actions are admissible");
        let dur = f64::from(action.duration);
        let options = ctx
            .routes
            .options(ctx.location, adm.venue)
            .iter()
            .map(|o| ModeOption {
                mode: o.mode,
                minutes: o.minutes(),
                money: o.money,
                fits: ctx.t + o.minutes() + dur + adm.dt_next <= deadline,
            })
            .collect::<Vec<_>>();
        let mut options = options;
        options.sort_by_key(|o| o.mode);
        out.push(Candidate {
            action: id,
            name: action.name.clone(),
            venue: adm.venue,
            venue_name: ctx.map.venue(adm.venue).name.clone(),
            duration: action.duration,
            money: action.money,
            source,
            score,
            slack: adm.slack,
            options,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persona::{generate_population, PopulationConfig};
    use crate::transport::TransitGraphs;

    #[test]
    fn merge_examples() {
        let n = [(ActionId(3), 0.5), (ActionId(4), 0.4), (ActionId(5), 0.3)];
        let h = [(ActionId(6), 2.0), (ActionId(7), 1.0), (ActionId(8), 0.5)];
        assert_eq!(merge_ranked(&n, &h).len(), 6);
        let h = [(ActionId(4), 9.0)];
        let m = merge_ranked(&n, &h);
        assert_eq!(m.len(), 3);
        assert_eq!(m[1], (ActionId(4), CandidateSource::Needs, 0.4));
    }

    #[test]
    fn assembled_candidates_pass_the_mask() {
        let map = CityMap::default_city();
        let routes = RouteTable::build(TransitGraphs::build(&map).unwrap());
        let catalog = Catalog::default_catalog();
        let pop = generate_population(20, 5, &PopulationConfig::default_config(), &map).unwrap();
        for p in &pop {
            for t in [420.0, 700.0, 1100.0, 1300.0] {
                let next = crate::obligations::next_obligation(&p.calendar, Weekday::Tuesday, t).unwrap();
                let ctx = CandidateContext {
                    persona: p,
                    needs: &NeedVector::splat(0.4),
                    habits: &[],
                    catalog: &catalog,
                    map: &map,
                    routes: &routes,
                    location: p.home,
                    t,
                    now: t,
                    next_obligation: Some((next.start(), next.task.venue)),
                    k_needs: 5,
                    k_habit: 3,
                    params: NeedsParams::default(),
                };
                let cands = assemble_candidates(&ctx).unwrap();
                assert!(cands.len() <= 5);
                for c in &cands {
                    let a = catalog.get(c.action);
                    assert!(a.in_window(t));
                    assert!(c.fastest().fits, "{} at {t}", c.name);
                    assert!(c.slack >= 0.0);
                    if a.category == VenueCategory::ResidentialRoom {
                        assert_eq!(c.venue, p.home);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_k_is_rejected() {
        let map = CityMap::default_city();
        let routes = RouteTable::build(TransitGraphs::build(&map).unwrap());
        let catalog = Catalog::default_catalog();
        let pop = generate_population(1, 5, &PopulationConfig::default_config(), &map).unwrap();
        let ctx = CandidateContext {
            persona: &pop[0],
            needs: &NeedVector::splat(0.4),
            habits: &[],
            catalog: &catalog,
            map: &map,
            routes: &routes,
            location: pop[0].home,
            t: 600.0,
            now: 600.0,
            next_obligation: None,
            k_needs: 0,
            k_habit: 3,
            params: NeedsParams::default(),
        };
        assert_eq!(assemble_candidates(&ctx), Err(DecisionError::ZeroK));
    }
}
