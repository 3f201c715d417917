mod common;

use citysim::city_map::{VenueCategory, Weather};
use citysim::decision::{
    assemble_candidates, build_prompt, parse_response, whitespace_tokens, BackendError, CandidateContext,
    DecisionBackend, DecisionRequest, ObligationSummary, ParseError, PersonaSummary, RemoteBackend, RemoteConfig,
};
use citysim::needs::{NeedVector, NeedsParams};
use citysim::persona::AgentId;
use citysim::scheduler::{SimConfig, SimError, Simulation, World};
use citysim::social::{Channel, ConversationTask, MemoryStore};
use citysim::telemetry::NullSink;
use citysim::time::Weekday;
use common::http::{completion, MockServer};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

/// Monday 07:00 at the first cafe, sunny and 15 °C, for the first generated
/// resident, with candidates assembled from the default city.
fn cafe_request(world: &World) -> DecisionRequest {
    let persona = common::people(world, 1, 11).remove(0);
    let cafe = world.map.venues_of(VenueCategory::Cafe).next().expect("a cafe").id;
    let needs = NeedVector::splat(0.5);
    let work = persona.work.map(|w| (540.0, w));
    let ctx = CandidateContext {
        persona: &persona,
        needs: &needs,
        habits: &[],
        catalog: &world.catalog,
        map: &world.map,
        routes: &world.routes,
        location: cafe,
        t: 420.0,
        now: 420.0,
        next_obligation: work,
        k_needs: 5,
        k_habit: 3,
        params: NeedsParams::default(),
    };
    let candidates = assemble_candidates(&ctx).unwrap();
    DecisionRequest {
        agent: persona.id,
        day: Weekday::Monday,
        time: 420.0,
        persona: PersonaSummary::from(&persona),
        needs,
        weather: Weather::Sunny,
        temperature: 15.0,
        location: world.map.venue(cafe).name.clone(),
        next_obligation: work.map(|(start, v)| ObligationSummary {
            label: "work".into(),
            venue_name: world.map.venue(v).name.clone(),
            start,
        }),
        candidates,
    }
}

#[test]
fn prompt_matches_golden_file() {
    let world = World::default_city();
    let req = cafe_request(&world);
    let prompt = build_prompt(&req);
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/prompt_cafe_0700.txt");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &prompt).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("golden file; rerun with UPDATE_GOLDEN=1 to create");
    assert_eq!(prompt, golden);
    assert!(whitespace_tokens(&prompt) <= 512);
    assert!(prompt.contains("It is Monday 07:00. Weather: sunny, 15°C."));
}

#[test]
fn replies_are_checked_against_the_request() {
    let world = World::default_city();
    let req = cafe_request(&world);
    let n = req.candidates.len();
    let mode = req.candidates[0].options[0].mode;
    let r = parse_response(&format!("Option 0, mode {}.", mode.index()), &req).unwrap();
    assert_eq!((r.candidate, r.mode), (0, mode));
    assert!(r.is_valid_for(&req));
    assert_eq!(
        parse_response(&format!("{n} 0"), &req),
        Err(ParseError::OptionOutOfRange { index: n as u64, count: n })
    );
    assert_eq!(parse_response("no idea", &req), Err(ParseError::NoIntegers));
    assert_eq!(parse_response("0", &req), Err(ParseError::MissingMode));
    assert_eq!(parse_response("0 7", &req), Err(ParseError::InfeasibleMode(7)));
}

fn remote(url: &str, retries: u32) -> RemoteBackend {
    RemoteBackend::with_key(
        RemoteConfig {
            endpoint: url.to_string(),
            timeout_secs: 5,
            retries,
            max_parallel: 4,
            ..RemoteConfig::default()
        },
        Some("test-key".into()),
    )
}

#[test]
fn remote_backend_posts_chat_completions() {
    let server = MockServer::start("/v1/chat/completions", |_| (200, completion("0 0")));
    let world = World::default_city();
    let mut req = cafe_request(&world);
    req.candidates.truncate(1);
    req.candidates[0].options.retain(|o| o.mode.index() == 0);
    let backend = remote(&server.url, 0);
    let out = backend.decide_batch(&[req.clone(), req.clone(), req.clone()]);
    assert_eq!(out.len(), 3);
    for r in &out {
        assert_eq!(r.as_ref().unwrap().candidate, 0);
    }
    let stats = backend.stats();
    assert_eq!((stats.requests, stats.http_calls, stats.failures), (3, 3, 0));
    assert_eq!((stats.prompt_tokens, stats.completion_tokens), (33, 6));
    let body: serde_json::Value = serde_json::from_str(&server.bodies()[0]).unwrap();
    assert_eq!(body["messages"][1]["content"], build_prompt(&req));
    assert_eq!(body["temperature"], 0);
}

#[test]
fn remote_backend_retries_then_gives_up() {
    let calls = Arc::new(AtomicU32::new(0));
    let c = Arc::clone(&calls);
    let server = MockServer::start("/", move |_| {
        if c.fetch_add(1, Ordering::SeqCst) < 2 {
            (503, "{}".into())
        } else {
            (200, completion("0 0"))
        }
    });
    let world = World::default_city();
    let req = cafe_request(&world);
    let backend = remote(&server.url, 2);
    assert!(backend.decide_batch(std::slice::from_ref(&req))[0].is_ok());
    assert_eq!(backend.stats().http_calls, 3);

    let down = MockServer::start("/", |_| (500, "{}".into()));
    let backend = remote(&down.url, 1);
    let out = backend.decide_batch(&[req]);
    assert_eq!(out[0], Err(BackendError::Status(500)));
    let stats = backend.stats();
    assert_eq!((stats.http_calls, stats.failures), (2, 1));
}

#[test]
fn malformed_replies_are_errors() {
    let server = MockServer::start("/", |_| (200, r#"{"choices":[]}"#.into()));
    let world = World::default_city();
    let out = remote(&server.url, 0).decide_batch(&[cafe_request(&world)]);
    assert!(matches!(out[0], Err(BackendError::Malformed(_))));

    let server = MockServer::start("/", |_| (200, completion("99 0")));
    let out = remote(&server.url, 0).decide_batch(&[cafe_request(&world)]);
    assert!(matches!(out[0], Err(BackendError::Parse(ParseError::OptionOutOfRange { index: 99, .. }))));
}

#[test]
fn remote_conversations_parse_the_exchange() {
    let server = MockServer::start("/", |_| (200, completion("1;0,2;0.15")));
    let mut a = MemoryStore::new(10);
    a.push(0.0, "saw a concert", vec![]);
    let task = ConversationTask {
        i: AgentId(0),
        j: AgentId(1),
        channel: Channel::Virtual,
        t: 600.0,
        venue: None,
        venue_name: None,
        memory_i: a.entries().to_vec(),
        memory_j: Vec::new(),
    };
    let out = remote(&server.url, 0).communicate_batch(&[task]);
    let ex = out[0].as_ref().unwrap();
    assert_eq!((ex.to_i.clone(), ex.to_j.clone(), ex.delta_r), (vec![1], vec![0, 2], 0.15));
    assert!(server.bodies()[0].contains("talk on the phone"));
}

#[test]
fn unreachable_backend_falls_back_unless_strict() {
    let server = MockServer::start("/", |_| (500, "{}".into()));
    let world = World::default_city();
    let run = |strict: bool| {
        let config = SimConfig { strict, ..SimConfig::default() };
        let mut sim = Simulation::new(&world, common::people(&world, 3, 5), config, Weekday::Monday).unwrap();
        let env = citysim::city_map::EnvironmentState::constant(Weekday::Monday, Weather::Sunny, 18.0);
        sim.run_day(&env, &remote(&server.url, 0), &mut NullSink)
    };
    let summary = run(false).unwrap();
    assert!(summary.fallbacks > 0);
    assert_eq!(summary.fallbacks, summary.decisions + summary.conversations);
    assert!(matches!(run(true), Err(SimError::Backend(_))));
}
