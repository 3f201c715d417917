//! The simulated day: local clocks, obligations, batched decisions and
//! conversations.

mod checkpoint;
mod movement;

pub use checkpoint::{AgentState, Checkpoint, CHECKPOINT_VERSION};
pub use movement::{step_movement, Waypoint};

use crate::catalog::{positive_gain, ActionId, ActionSpec, Catalog};
use crate::city_map::{CityMap, EnvironmentState, VenueCategory, VenueId};
use crate::decision::{
    assemble_candidates, choose_mode, mock_decide, BackendError, Candidate, CandidateContext,
    DecisionBackend, DecisionError, DecisionRequest, DecisionResponse, ModeOption,
    ObligationSummary, PersonaSummary,
};
use crate::habits::{halfwidth_for_duration, prune_relative, reinforce, HabitParams, HabitRecord};
use crate::needs::{Need, NeedVector, NeedsParams};
use crate::obligations::next_obligation;
use crate::persona::{AgentId, ObligationTask, Persona};
use crate::social::{
    apply_exchange, face_to_face_pairs, mock_communicate, virtual_partner, Channel,
    ConversationTask, Exchange, MemoryStore, RelationshipMatrix, Stay, FIRST_CONTACT,
};
use crate::telemetry::{tile, EventKind, EventRecord, EventSink, TelemetryError};
use crate::time::{Weekday, MINUTES_PER_DAY};
use crate::transport::{Mode, RouteTable, TransitGraphs, TransportError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("agent {agent}: unknown venue {venue}")]
    UnknownVenue { agent: AgentId, venue: u32 },
    #[error("agent {agent}: obligation `{label}` has no mandatory action in the catalog")]
    UnknownObligation { agent: AgentId, label: String },
    #[error("agent ids must be 0..n in order (found {found} at position {index})")]
    AgentOrder { index: usize, found: AgentId },
    #[error("no agents")]
    Empty,
    #[error("backend failed in strict mode: {0}")]
    Backend(BackendError),
    #[error(transparent)]
    Decision(#[from] DecisionError),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("invalid environment: {0}")]
    Environment(String),
}

/// Scheduler settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Decision requests per dispatch.
    pub batch_size: usize,
    /// Conversation tasks per dispatch.
    pub conversation_batch_size: usize,
    pub k_needs: usize,
    pub k_habit: usize,
    /// Social satisfaction below which an agent calls its closest contact.
    pub social_threshold: f64,
    /// Social satisfaction gained by both sides of a conversation.
    pub conversation_gain: f64,
    pub max_face_to_face_per_day: usize,
    pub min_overlap_minutes: f64,
    pub idle_minutes: f64,
    pub memory_capacity: usize,
    /// Need level every agent starts the first day with.
    pub initial_needs: f64,
    pub habit: HabitParams,
    pub needs: NeedsParams,
    pub seed: u64,
    /// Abort instead of falling back to the mock policy on backend errors.
    pub strict: bool,
    /// Log a waypoint for every step of every trip.
    pub dense_trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            conversation_batch_size: 16,
            k_needs: 5,
            k_habit: 3,
            social_threshold: 0.3,
            conversation_gain: 0.1,
            max_face_to_face_per_day: 2,
            min_overlap_minutes: 15.0,
            idle_minutes: 15.0,
            memory_capacity: crate::social::DEFAULT_MEMORY_CAPACITY,
            initial_needs: 0.6,
            habit: HabitParams::default(),
            needs: NeedsParams::default(),
            seed: 0,
            strict: false,
            dense_trace: false,
        }
    }
}

/// Immutable inputs shared by every agent.
#[derive(Debug)]
pub struct World {
    pub map: CityMap,
    pub routes: RouteTable,
    pub catalog: Catalog,
}

impl World {
    pub fn new(map: CityMap, catalog: Catalog) -> Result<Self, SimError> {
        let routes = RouteTable::build(TransitGraphs::build(&map)?);
        Ok(Self { map, routes, catalog })
    }

    pub fn default_city() -> Self {
        Self::new(CityMap::default_city(), Catalog::default_catalog()).expect("bundled city is valid")
    }

    fn obligation_action(&self, task: &ObligationTask) -> Option<&ActionSpec> {
        self.catalog
            .by_name(&task.label)
            .filter(|a| a.mandatory)
    }
}

#[derive(Debug, Clone, Copy)]
struct Completion {
    action: ActionId,
    midpoint: f64,
    duration: f64,
    feedback: f64,
}

/// Mutable per-agent state.
#[derive(Debug, Clone)]
pub struct AgentRuntime {
    pub persona: Persona,
    /// Minute of the current day.
    pub clock: f64,
    pub needs: NeedVector,
    pub habits: Vec<HabitRecord>,
    pub memory: MemoryStore,
    pub venue: VenueId,
    pending: bool,
    done: bool,
    /// Obligations starting before this minute are handled.
    cursor: f64,
    completed: Vec<Completion>,
    stays: Vec<Stay>,
    called: bool,
}

impl AgentRuntime {
    fn new(persona: Persona, needs: NeedVector, memory_capacity: usize) -> Self {
        let venue = persona.home;
        Self {
            persona,
            clock: 0.0,
            needs,
            habits: Vec::new(),
            memory: MemoryStore::new(memory_capacity),
            venue,
            pending: false,
            done: false,
            cursor: 0.0,
            completed: Vec::new(),
            stays: Vec::new(),
            called: false,
        }
    }

    pub fn id(&self) -> AgentId {
        self.persona.id
    }

    /// Moves the clock forward, decaying needs on the way.
    fn advance(&mut self, minutes: f64) {
        if minutes > 0.0 {
            self.needs = self
                .needs
                .decay(minutes, &self.persona.decay)
                .expect("positive duration");
            self.clock += minutes;
        }
    }
}

/// Counters for one simulated day.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DaySummary {
    pub day: u32,
    pub decisions: u64,
    pub dispatches: u64,
    pub conversation_dispatches: u64,
    pub conversations: u64,
    /// Requests answered by the mock policy after a backend failure.
    pub fallbacks: u64,
    /// Responses whose mode would have made the agent late.
    pub refits: u64,
    pub idle_waits: u64,
    pub mandatory_tasks: u64,
    pub late_starts: u64,
    pub dropped_memories: u64,
    pub events: u64,
}

impl DaySummary {
    pub fn add(&mut self, o: &DaySummary) {
        self.decisions += o.decisions;
        self.dispatches += o.dispatches;
        self.conversation_dispatches += o.conversation_dispatches;
        self.conversations += o.conversations;
        self.fallbacks += o.fallbacks;
        self.refits += o.refits;
        self.idle_waits += o.idle_waits;
        self.mandatory_tasks += o.mandatory_tasks;
        self.late_starts += o.late_starts;
        self.dropped_memories += o.dropped_memories;
        self.events += o.events;
    }
}

enum Step {
    Done,
    Decide(Box<DecisionRequest>),
}

/// One buffer per agent, so the day's log can be put in canonical order
/// without a global sort.
struct AgentEvents(Vec<Vec<EventRecord>>);

impl AgentEvents {
    fn push(&mut self, e: EventRecord) {
        self.0[e.agent.index()].push(e);
    }

    /// All records ordered by `(agent, t)`, keeping emission order for ties.
    fn into_canonical(self) -> Vec<EventRecord> {
        let mut out = Vec::with_capacity(self.0.iter().map(Vec::len).sum());
        for mut v in self.0 {
            v.sort_by(|a, b| a.t.total_cmp(&b.t));
            out.append(&mut v);
        }
        out
    }
}

struct DayState<'e> {
    day: u32,
    weekday: Weekday,
    base: f64,
    env: &'e EnvironmentState,
    events: AgentEvents,
    /// Virtual calls waiting for both clocks to pass the call time.
    calls: Vec<(usize, usize, f64)>,
    ready: Vec<ConversationTask>,
    results: Vec<(ConversationTask, Exchange)>,
    summary: DaySummary,
}

/// Home-mates start out as acquaintances: residents of each room are
/// chained by id.
pub fn seed_relationships(personas: &[Persona]) -> RelationshipMatrix {
    let mut by_home: BTreeMap<VenueId, Vec<AgentId>> = BTreeMap::new();
    for p in personas {
        by_home.entry(p.home).or_default().push(p.id);
    }
    let mut r = RelationshipMatrix::default();
    for ids in by_home.values() {
        for w in ids.windows(2) {
            r.set(w[0], w[1], FIRST_CONTACT);
        }
    }
    r
}

/// A population living in a world.
pub struct Simulation<'w> {
    world: &'w World,
    config: SimConfig,
    agents: Vec<AgentRuntime>,
    relationships: RelationshipMatrix,
    day: u32,
    weekday: Weekday,
}

impl<'w> Simulation<'w> {
    pub fn new(
        world: &'w World,
        personas: Vec<Persona>,
        config: SimConfig,
        start: Weekday,
    ) -> Result<Self, SimError> {
        let relationships = seed_relationships(&personas);
        let needs = NeedVector::splat(config.initial_needs.clamp(0.0, 1.0));
        let agents = personas
            .into_iter()
            .map(|p| AgentRuntime::new(p, needs, config.memory_capacity))
            .collect();
        let sim = Self {
            world,
            config,
            agents,
            relationships,
            day: 0,
            weekday: start,
        };
        sim.validate()?;
        Ok(sim)
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.agents.is_empty() {
            return Err(SimError::Empty);
        }
        let n = self.world.map.venues().len() as u32;
        for (index, a) in self.agents.iter().enumerate() {
            let p = &a.persona;
            if p.id.index() != index {
                return Err(SimError::AgentOrder { index, found: p.id });
            }
            let venues = std::iter::once(p.home)
                .chain(p.work)
                .chain(p.calendar.iter().map(|t| t.venue))
                .chain(std::iter::once(a.venue));
            for v in venues {
                if v.0 >= n {
                    return Err(SimError::UnknownVenue { agent: p.id, venue: v.0 });
                }
            }
            for t in &p.calendar {
                if self.world.obligation_action(t).is_none() {
                    return Err(SimError::UnknownObligation {
                        agent: p.id,
                        label: t.label.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn world(&self) -> &World {
        self.world
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn agents(&self) -> &[AgentRuntime] {
        &self.agents
    }

    pub fn relationships(&self) -> &RelationshipMatrix {
        &self.relationships
    }

    /// Index of the next day to run.
    pub fn day(&self) -> u32 {
        self.day
    }

    pub fn weekday(&self) -> Weekday {
        self.weekday
    }

    /// Runs one day and hands its events, in canonical order, to `sink`.
    pub fn run_day(
        &mut self,
        env: &EnvironmentState,
        backend: &dyn DecisionBackend,
        sink: &mut dyn EventSink,
    ) -> Result<DaySummary, SimError> {
        env.validate().map_err(SimError::Environment)?;
        let mut st = DayState {
            day: self.day,
            weekday: self.weekday,
            base: f64::from(self.day) * MINUTES_PER_DAY,
            env,
            events: AgentEvents(vec![Vec::new(); self.agents.len()]),
            calls: Vec::new(),
            ready: Vec::new(),
            results: Vec::new(),
            summary: DaySummary {
                day: self.day,
                ..DaySummary::default()
            },
        };
        for i in 0..self.agents.len() {
            let a = &mut self.agents[i];
            // an action that ran past midnight eats into the new day
            a.clock = (a.clock - MINUTES_PER_DAY).max(0.0);
            a.pending = false;
            a.done = false;
            a.cursor = 0.0;
            a.completed.clear();
            a.stays.clear();
            a.called = false;
            let v = self.world.map.venue(a.venue);
            st.events.push(EventRecord::new(
                st.day,
                a.id(),
                st.base + a.clock,
                EventKind::DayStart {
                    weekday: st.weekday,
                    category: a.persona.category,
                    employment: a.persona.employment(),
                    venue: v.id,
                    venue_category: v.category,
                    tile: tile(v.anchor),
                    needs: a.needs,
                },
            ));
        }

        let batch = self.config.batch_size.max(1);
        let mut agents_in: Vec<usize> = Vec::new();
        let mut requests: Vec<DecisionRequest> = Vec::new();
        loop {
            let mut active = false;
            for i in 0..self.agents.len() {
                if self.agents[i].done {
                    continue;
                }
                active = true;
                if self.agents[i].pending {
                    continue;
                }
                if let Step::Decide(req) = self.step_agent(i, &mut st)? {
                    self.agents[i].pending = true;
                    agents_in.push(i);
                    requests.push(*req);
                    if requests.len() >= batch {
                        self.dispatch(&mut agents_in, &mut requests, backend, &mut st)?;
                    }
                }
            }
            // every live agent is now waiting on a response
            if !requests.is_empty() {
                self.dispatch(&mut agents_in, &mut requests, backend, &mut st)?;
            }
            self.collect_ready_calls(&mut st);
            if st.ready.len() >= self.config.conversation_batch_size.max(1) {
                self.dispatch_conversations(backend, &mut st)?;
            }
            if !active {
                break;
            }
        }
        self.close_day(backend, &mut st)?;

        let events = std::mem::replace(&mut st.events, AgentEvents(Vec::new())).into_canonical();
        st.summary.events = events.len() as u64;
        sink.write_owned(events)?;
        sink.flush()?;
        self.day += 1;
        self.weekday = self.weekday.succ();
        Ok(st.summary)
    }

    /// Advances agent `i` until it needs a decision or its day is over.
    fn step_agent(&mut self, i: usize, st: &mut DayState<'_>) -> Result<Step, SimError> {
        let world = self.world;
        loop {
            let a = &self.agents[i];
            if a.clock >= MINUTES_PER_DAY {
                self.agents[i].done = true;
                return Ok(Step::Done);
            }
            let next = next_obligation(&a.persona.calendar, st.weekday, a.cursor)
                .ok()
                .map(|n| (n.start(), n.days_ahead, n.task.clone()));
            let mut departure = MINUTES_PER_DAY;
            if let Some((start, days_ahead, task)) = &next {
                let lead = world.routes.fastest(a.venue, task.venue).minutes();
                departure = start - lead;
                if a.clock >= departure {
                    if *days_ahead == 0 {
                        self.run_obligation(i, task, st);
                    } else {
                        // tomorrow's first task needs an early start: wait out the day
                        let rest = MINUTES_PER_DAY - a.clock;
                        self.agents[i].advance(rest);
                    }
                    continue;
                }
            }

            let a = &self.agents[i];
            if !a.called {
                if let Some(j) = virtual_partner(
                    &self.relationships,
                    a.id(),
                    a.needs[Need::SocialConnection],
                    self.config.social_threshold,
                ) {
                    st.calls.push((i, j.index(), st.base + a.clock));
                    self.agents[i].called = true;
                }
            }

            let a = &self.agents[i];
            let (weather, temperature) = st.env.at(a.clock);
            let ctx = CandidateContext {
                persona: &a.persona,
                needs: &a.needs,
                habits: &a.habits,
                catalog: &world.catalog,
                map: &world.map,
                routes: &world.routes,
                location: a.venue,
                t: a.clock,
                now: st.base + a.clock,
                next_obligation: next.as_ref().map(|(start, _, task)| (*start, task.venue)),
                k_needs: self.config.k_needs,
                k_habit: self.config.k_habit,
                params: self.config.needs,
            };
            let candidates = assemble_candidates(&ctx)?;
            if candidates.is_empty() {
                let until = (a.clock + self.config.idle_minutes).min(departure.min(MINUTES_PER_DAY));
                let wait = (until - a.clock).max(crate::time::STEP_MINUTES);
                self.agents[i].advance(wait);
                st.summary.idle_waits += 1;
                continue;
            }
            let request = DecisionRequest {
                agent: a.id(),
                day: st.weekday,
                time: a.clock,
                persona: PersonaSummary::from(&a.persona),
                needs: a.needs,
                weather,
                temperature,
                location: world.map.venue(a.venue).name.clone(),
                next_obligation: next.as_ref().map(|(start, _, task)| ObligationSummary {
                    label: task.label.clone(),
                    venue_name: world.map.venue(task.venue).name.clone(),
                    start: *start,
                }),
                candidates,
            };
            return Ok(Step::Decide(Box::new(request)));
        }
    }

    /// Travels to `dest` by `mode`, logging waypoints.
    fn travel(&mut self, i: usize, dest: VenueId, mode: Mode, st: &mut DayState<'_>) {
        let a = &self.agents[i];
        if a.venue == dest {
            return;
        }
        let route = self
            .world
            .routes
            .route(a.venue, dest, mode)
            .or_else(|| self.world.routes.route(a.venue, dest, Mode::Walking))
            .expect("walking always connects venues");
        let t0 = st.base + a.clock;
        for w in step_movement(&self.world.map, &route, dest, self.config.dense_trace) {
            st.events.push(EventRecord::new(
                st.day,
                a.id(),
                t0 + w.t,
                EventKind::Moved {
                    tile: tile(w.tile),
                    venue: w.venue,
                    venue_category: w.venue.map(|v| self.world.map.venue(v).category),
                    mode: w.mode,
                    arrived: w.arrived,
                },
            ));
        }
        let a = &mut self.agents[i];
        a.advance(route.minutes());
        a.venue = dest;
    }

    /// Performs `action` for `duration` minutes at the current venue.
    fn perform(
        &mut self,
        i: usize,
        action: &ActionSpec,
        duration: f64,
        scheduled: Option<f64>,
        st: &mut DayState<'_>,
    ) {
        let a = &mut self.agents[i];
        let start = a.clock;
        a.advance(duration);
        let before = a.needs;
        let scale = if action.mandatory {
            duration / f64::from(action.duration)
        } else {
            1.0
        };
        a.needs = a.needs.apply_effect(&action.effect.scaled(scale));
        let feedback = positive_gain(&before, &a.needs);
        let venue = a.venue;
        let (s_abs, e_abs) = (st.base + start, st.base + a.clock);
        a.stays.push(Stay {
            agent: a.persona.id,
            venue,
            start: s_abs,
            end: e_abs,
        });
        if !action.mandatory {
            a.completed.push(Completion {
                action: action.id,
                midpoint: s_abs + duration / 2.0,
                duration,
                feedback,
            });
        }
        let venue_name = &self.world.map.venue(venue).name;
        a.memory.push(
            e_abs,
            format!("{} at {venue_name}", action.name),
            vec![action.class.as_str().to_string()],
        );
        st.events.push(EventRecord::new(
            st.day,
            a.persona.id,
            e_abs,
            EventKind::ActionCompleted {
                action: action.id,
                name: action.name.clone(),
                class: action.class,
                venue,
                start: s_abs,
                mandatory: action.mandatory,
                scheduled: scheduled.map(|s| st.base + s),
                needs: a.needs,
                feedback,
            },
        ));
    }

    fn run_obligation(&mut self, i: usize, task: &ObligationTask, st: &mut DayState<'_>) {
        let world = self.world;
        let action = world.obligation_action(task).expect("validated calendar");
        let start = f64::from(task.start);
        let a = &self.agents[i];
        if a.venue != task.venue {
            let options: Vec<ModeOption> = world
                .routes
                .options(a.venue, task.venue)
                .iter()
                .map(|o| ModeOption {
                    mode: o.mode,
                    minutes: o.minutes(),
                    money: o.money,
                    fits: a.clock + o.minutes() <= start,
                })
                .collect();
            let fastest = world.routes.fastest(a.venue, task.venue).minutes();
            let (weather, _) = st.env.at(a.clock);
            let mode = choose_mode(&options, start - a.clock - fastest, weather, a.persona.income());
            self.travel(i, task.venue, mode, st);
        }
        let a = &mut self.agents[i];
        if a.clock < start {
            a.advance(start - a.clock);
        }
        if a.clock > start {
            st.summary.late_starts += 1;
            log::warn!("agent {} late for {} by {} min", a.persona.id, task.label, a.clock - start);
        }
        a.cursor = f64::from(task.end());
        st.summary.mandatory_tasks += 1;
        self.perform(i, action, f64::from(task.duration), Some(start), st);
    }

    fn dispatch(
        &mut self,
        agents_in: &mut Vec<usize>,
        requests: &mut Vec<DecisionRequest>,
        backend: &dyn DecisionBackend,
        st: &mut DayState<'_>,
    ) -> Result<(), SimError> {
        st.summary.dispatches += 1;
        st.summary.decisions += requests.len() as u64;
        let results = backend.decide_batch(requests);
        for (k, (&i, req)) in agents_in.iter().zip(requests.iter()).enumerate() {
            let response = match results.get(k) {
                Some(Ok(r)) if r.is_valid_for(req) => *r,
                other => {
                    let err = match other {
                        Some(Err(e)) => e.clone(),
                        Some(Ok(_)) => BackendError::Malformed("response does not match request".into()),
                        None => BackendError::Malformed("missing response".into()),
                    };
                    if self.config.strict {
                        return Err(SimError::Backend(err));
                    }
                    log::warn!("agent {}: {err}; using mock policy", req.agent);
                    st.summary.fallbacks += 1;
                    mock_decide(std::slice::from_ref(req), self.config.seed)[0]
                }
            };
            let candidate = &req.candidates[response.candidate];
            let mode = self.refit(candidate, response, st);
            self.agents[i].pending = false;
            let action = self.world.catalog.get(candidate.action);
            self.travel(i, candidate.venue, mode, st);
            self.perform(i, action, f64::from(action.duration), None, st);
        }
        agents_in.clear();
        requests.clear();
        Ok(())
    }

    /// Replaces a mode that would cause lateness by the fastest one.
    fn refit(&self, c: &Candidate, r: DecisionResponse, st: &mut DayState<'_>) -> Mode {
        match c.option(r.mode) {
            Some(o) if o.fits => r.mode,
            _ => {
                st.summary.refits += 1;
                c.fastest().mode
            }
        }
    }

    fn task_for(&self, i: usize, j: usize, channel: Channel, t: f64, venue: Option<VenueId>) -> ConversationTask {
        ConversationTask {
            i: self.agents[i].id(),
            j: self.agents[j].id(),
            channel,
            t,
            venue,
            venue_name: venue.map(|v| self.world.map.venue(v).name.clone()),
            memory_i: self.agents[i].memory.snapshot(t),
            memory_j: self.agents[j].memory.snapshot(t),
        }
    }

    fn collect_ready_calls(&self, st: &mut DayState<'_>) {
        let base = st.base;
        let clock = |k: usize| base + self.agents[k].clock;
        let (ready, waiting): (Vec<_>, Vec<_>) = st
            .calls
            .drain(..)
            .partition(|&(i, j, t)| clock(i) >= t && clock(j) >= t);
        st.calls = waiting;
        for (i, j, t) in ready {
            let task = self.task_for(i, j, Channel::Virtual, t, None);
            st.ready.push(task);
        }
    }

    fn dispatch_conversations(&self, backend: &dyn DecisionBackend, st: &mut DayState<'_>) -> Result<(), SimError> {
        let width = self.config.conversation_batch_size.max(1);
        let tasks = std::mem::take(&mut st.ready);
        for chunk in tasks.chunks(width) {
            st.summary.conversation_dispatches += 1;
            let results = backend.communicate_batch(chunk);
            for (k, task) in chunk.iter().enumerate() {
                let ex = match results.get(k) {
                    Some(Ok(ex)) => ex.clone(),
                    other => {
                        let err = match other {
                            Some(Err(e)) => e.clone(),
                            _ => BackendError::Malformed("missing response".into()),
                        };
                        if self.config.strict {
                            return Err(SimError::Backend(err));
                        }
                        log::warn!("conversation {}-{}: {err}; using mock policy", task.i, task.j);
                        st.summary.fallbacks += 1;
                        mock_communicate(std::slice::from_ref(task), self.config.seed).remove(0)
                    }
                };
                st.results.push((task.clone(), ex));
            }
        }
        Ok(())
    }

    fn close_day(&mut self, backend: &dyn DecisionBackend, st: &mut DayState<'_>) -> Result<(), SimError> {
        // every clock is past midnight, so all calls are ready
        self.collect_ready_calls(st);
        let stays: Vec<Stay> = self.agents.iter().flat_map(|a| a.stays.iter().copied()).collect();
        let map = &self.world.map;
        let meetings = face_to_face_pairs(
            &stays,
            self.config.min_overlap_minutes,
            self.config.max_face_to_face_per_day,
            |v| map.venue(v).category != VenueCategory::ResidentialRoom,
        );
        for (i, j, v, t) in meetings {
            let task = self.task_for(i.index(), j.index(), Channel::FaceToFace, t, Some(v));
            st.ready.push(task);
        }
        if !st.ready.is_empty() {
            self.dispatch_conversations(backend, st)?;
        }

        let mut results = std::mem::take(&mut st.results);
        results.sort_by(|a, b| {
            a.0.t
                .total_cmp(&b.0.t)
                .then(a.0.i.cmp(&b.0.i))
                .then(a.0.j.cmp(&b.0.j))
                .then(a.0.channel.cmp(&b.0.channel))
        });
        for (task, ex) in &results {
            let (i, j) = (task.i.index(), task.j.index());
            let (ai, aj) = pair_mut(&mut self.agents, i, j);
            let out = apply_exchange(
                task,
                ex,
                &mut ai.memory,
                &mut aj.memory,
                &mut self.relationships,
                &mut ai.needs,
                &mut aj.needs,
                self.config.conversation_gain,
            );
            st.summary.conversations += 1;
            st.summary.dropped_memories += out.dropped as u64;
            for (me, partner, gained) in [(task.i, task.j, out.gained_i), (task.j, task.i, out.gained_j)] {
                st.events.push(EventRecord::new(
                    st.day,
                    me,
                    task.t,
                    EventKind::Conversation {
                        partner,
                        channel: task.channel,
                        delta_r: out.delta_r,
                        r: out.r,
                        gained,
                    },
                ));
            }
        }

        let end = st.base + MINUTES_PER_DAY;
        for a in &mut self.agents {
            for c in &a.completed {
                reinforce(
                    &mut a.habits,
                    c.action,
                    c.midpoint,
                    halfwidth_for_duration(c.duration),
                    c.feedback,
                    &self.config.habit,
                )
                .expect("half-width is clamped");
            }
            prune_relative(&mut a.habits, end, self.config.habit.prune_fraction).expect("positive fraction");
            a.habits.sort_by_key(|h| h.action);
            a.memory.trim();
            let v = self.world.map.venue(a.venue);
            st.events.push(EventRecord::new(
                st.day,
                a.persona.id,
                st.base + a.clock,
                EventKind::DayEnd {
                    venue: v.id,
                    tile: tile(v.anchor),
                    needs: a.needs,
                },
            ));
        }
        Ok(())
    }

    /// Runs `days` consecutive days with one environment per day.
    pub fn run(
        &mut self,
        days: u32,
        env_for: impl Fn(u32, Weekday) -> EnvironmentState,
        backend: &dyn DecisionBackend,
        sink: &mut dyn EventSink,
    ) -> Result<DaySummary, SimError> {
        let mut total = DaySummary::default();
        for _ in 0..days {
            let env = env_for(self.day, self.weekday);
            let s = self.run_day(&env, backend, sink)?;
            total.add(&s);
            total.day = s.day;
        }
        Ok(total)
    }
}

fn pair_mut<T>(v: &mut [T], i: usize, j: usize) -> (&mut T, &mut T) {
    assert_ne!(i, j, "conversation partners differ");
    if i < j {
        let (a, b) = v.split_at_mut(j);
        (&mut a[i], &mut b[0])
    } else {
        let (a, b) = v.split_at_mut(i);
        (&mut b[0], &mut a[j])
    }
}

#[cfg(test)]
mod tests;
