use super::*;
use crate::city_map::Weather;
use crate::decision::MockBackend;
use crate::persona::{generate_population, PopulationConfig};
use crate::telemetry::{log_hash, MemorySink};

fn world() -> World {
    World::default_city()
}

fn people(world: &World, n: usize, seed: u64) -> Vec<Persona> {
    generate_population(n, seed, &PopulationConfig::default_config(), &world.map).unwrap()
}

fn run(world: &World, n: usize, days: u32, config: SimConfig) -> (Vec<EventRecord>, DaySummary, Simulation<'_>) {
    let mut sim = Simulation::new(world, people(world, n, 7), config, Weekday::Monday).unwrap();
    let mut sink = MemorySink::default();
    let total = sim
        .run(
            days,
            |_, wd| EnvironmentState::constant(wd, Weather::Sunny, 18.0),
            &MockBackend::new(1),
            &mut sink,
        )
        .unwrap();
    (sink.events, total, sim)
}

#[test]
fn one_day_smoke() {
    let w = world();
    let t0 = std::time::Instant::now();
    let (events, s, sim) = run(&w, 60, 1, SimConfig::default());
    eprintln!("{s:?} in {:?}", t0.elapsed());
    assert!(s.decisions > 0);
    assert_eq!(s.late_starts, 0);
    assert_eq!(sim.day(), 1);
    assert_eq!(sim.weekday(), Weekday::Tuesday);
    let starts = events.iter().filter(|e| e.kind.name() == "day_start").count();
    let ends = events.iter().filter(|e| e.kind.name() == "day_end").count();
    assert_eq!((starts, ends), (60, 60));
    assert!(events.iter().all(|e| (e.t * 4.0).fract() == 0.0));
}

#[test]
fn batch_size_does_not_change_the_log() {
    let w = world();
    let base = SimConfig {
        batch_size: 1,
        conversation_batch_size: 1,
        social_threshold: 0.6,
        ..SimConfig::default()
    };
    let (a, sa, _) = run(&w, 40, 2, base.clone());
    let (b, sb, _) = run(
        &w,
        40,
        2,
        SimConfig {
            batch_size: 32,
            conversation_batch_size: 16,
            ..base
        },
    );
    assert!(sa.dispatches > sb.dispatches);
    assert_eq!(sa.conversations, sb.conversations);
    assert_eq!(log_hash(&a), log_hash(&b));
}

#[test]
fn checkpoint_resume_matches_a_straight_run() {
    let w = world();
    let (full, _, _) = run(&w, 20, 2, SimConfig::default());
    let (first, _, sim) = run(&w, 20, 1, SimConfig::default());
    let cp = Checkpoint::from_json(&sim.checkpoint().to_json()).unwrap();
    let mut resumed = Simulation::from_checkpoint(&w, cp).unwrap();
    let mut sink = MemorySink::default();
    resumed
        .run_day(
            &EnvironmentState::constant(Weekday::Tuesday, Weather::Sunny, 18.0),
            &MockBackend::new(1),
            &mut sink,
        )
        .unwrap();
    let mut joined = first;
    joined.extend(sink.events);
    assert_eq!(log_hash(&joined), log_hash(&full));
}

#[test]
fn bad_checkpoint_version_is_rejected() {
    let w = world();
    let sim = Simulation::new(&w, people(&w, 3, 1), SimConfig::default(), Weekday::Monday).unwrap();
    let mut cp = sim.checkpoint();
    cp.version = 99;
    assert!(matches!(Checkpoint::from_json(&cp.to_json()), Err(SimError::Checkpoint(_))));
}

#[test]
fn home_mates_are_seeded() {
    let w = world();
    let ps = people(&w, 50, 3);
    let r = seed_relationships(&ps);
    for (i, j, v) in r.pairs() {
        assert_eq!(ps[i.index()].home, ps[j.index()].home);
        assert_eq!(v, FIRST_CONTACT);
    }
}

#[test]
fn misnumbered_agents_are_rejected() {
    let w = world();
    let mut ps = people(&w, 3, 1);
    ps.swap(0, 1);
    assert!(matches!(
        Simulation::new(&w, ps, SimConfig::default(), Weekday::Monday),
        Err(SimError::AgentOrder { .. })
    ));
    assert!(matches!(
        Simulation::new(&w, vec![], SimConfig::default(), Weekday::Monday),
        Err(SimError::Empty)
    ));
}

struct Failing;

impl DecisionBackend for Failing {
    fn name(&self) -> &str {
        "failing"
    }
    fn decide_batch(&self, batch: &[DecisionRequest]) -> Vec<Result<DecisionResponse, BackendError>> {
        batch.iter().map(|_| Err(BackendError::Status(500))).collect()
    }
    fn communicate_batch(&self, batch: &[ConversationTask]) -> Vec<Result<Exchange, BackendError>> {
        batch.iter().map(|_| Err(BackendError::Status(500))).collect()
    }
}

#[test]
fn failures_fall_back_unless_strict() {
    let w = world();
    let env = EnvironmentState::constant(Weekday::Monday, Weather::Sunny, 18.0);
    let mut sim = Simulation::new(&w, people(&w, 10, 2), SimConfig::default(), Weekday::Monday).unwrap();
    let s = sim.run_day(&env, &Failing, &mut MemorySink::default()).unwrap();
    assert_eq!(s.fallbacks, s.decisions + s.conversations);
    let strict = SimConfig {
        strict: true,
        ..SimConfig::default()
    };
    let mut sim = Simulation::new(&w, people(&w, 10, 2), strict, Weekday::Monday).unwrap();
    assert!(matches!(
        sim.run_day(&env, &Failing, &mut MemorySink::default()),
        Err(SimError::Backend(_))
    ));
}
