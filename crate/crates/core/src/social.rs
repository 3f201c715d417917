//! Memories, relationships, conversation detection and memory-index
//! exchanges.

use crate::city_map::VenueId;
use crate::needs::{Need, NeedVector};
use crate::persona::AgentId;
use crate::time::format_hhmm;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

pub const DEFAULT_MEMORY_CAPACITY: usize = 50;
/// Relationship score two strangers start from on first contact.
pub const FIRST_CONTACT: f64 = 0.1;
/// Bound on a single exchange's relationship change.
pub const MAX_DELTA_R: f64 = 0.2;
pub const FACE_TO_FACE_DELTA: f64 = 0.05;
pub const VIRTUAL_DELTA: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryEntry {
    pub id: u32,
    /// Absolute minute.
    pub t: f64,
    pub text: String,
    pub tags: Vec<String>,
}

impl MemoryEntry {
    fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t == tag)
    }
}

fn shared_tag(with: AgentId) -> String {
    format!("shared:{}", with.0)
}

fn from_tag(from: AgentId) -> String {
    format!("from:{}", from.0)
}

/// Per-agent memory. Pushes never evict; [`MemoryStore::trim`] drops the
/// oldest entries beyond capacity and is meant to run at day boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryStore {
    entries: Vec<MemoryEntry>,
    next_id: u32,
    capacity: usize,
}

impl Default for MemoryStore {
    fn default() -> Self {
        Self::new(DEFAULT_MEMORY_CAPACITY)
    }
}

impl MemoryStore {
    pub fn new(capacity: usize) -> Self {
        Self {
            entries: Vec::new(),
            next_id: 0,
            capacity: capacity.max(1),
        }
    }

    /// Appends an entry and returns its id. Timestamps are kept
    /// nondecreasing by clamping to the latest entry.
    pub fn push(&mut self, t: f64, text: impl Into<String>, tags: Vec<String>) -> u32 {
        let t = self.entries.last().map_or(t, |e| e.t.max(t));
        let id = self.next_id;
        self.next_id += 1;
        self.entries.push(MemoryEntry {
            id,
            t,
            text: text.into(),
            tags,
        });
        id
    }

    pub fn entries(&self) -> &[MemoryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, id: u32) -> Option<&MemoryEntry> {
        self.entries
            .binary_search_by_key(&id, |e| e.id)
            .ok()
            .map(|i| &self.entries[i])
    }

    fn tag(&mut self, id: u32, tag: String) {
        if let Ok(i) = self.entries.binary_search_by_key(&id, |e| e.id) {
            if !self.entries[i].has_tag(&tag) {
                self.entries[i].tags.push(tag);
            }
        }
    }

    /// Entries recorded at or before absolute minute `until`.
    pub fn snapshot(&self, until: f64) -> Vec<MemoryEntry> {
        let end = self.entries.partition_point(|e| e.t <= until);
        self.entries[..end].to_vec()
    }

    /// Evicts the oldest entries beyond capacity.
    pub fn trim(&mut self) {
        let excess = self.entries.len().saturating_sub(self.capacity);
        self.entries.drain(..excess);
    }
}

/// Sparse symmetric relationship scores in `[0, 1]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<(AgentId, AgentId, f64)>", into = "Vec<(AgentId, AgentId, f64)>")]
pub struct RelationshipMatrix {
    adj: BTreeMap<AgentId, BTreeMap<AgentId, f64>>,
}

impl From<Vec<(AgentId, AgentId, f64)>> for RelationshipMatrix {
    fn from(v: Vec<(AgentId, AgentId, f64)>) -> Self {
        let mut m = Self::default();
        for (i, j, r) in v {
            m.set(i, j, r);
        }
        m
    }
}

impl From<RelationshipMatrix> for Vec<(AgentId, AgentId, f64)> {
    fn from(m: RelationshipMatrix) -> Self {
        m.pairs().collect()
    }
}

impl RelationshipMatrix {
    pub fn get(&self, i: AgentId, j: AgentId) -> f64 {
        self.adj.get(&i).and_then(|row| row.get(&j)).copied().unwrap_or(0.0)
    }

    pub fn knows(&self, i: AgentId, j: AgentId) -> bool {
        self.adj.get(&i).is_some_and(|row| row.contains_key(&j))
    }

    /// Sets both directions, clipped to `[0, 1]`. Self-pairs are ignored.
    pub fn set(&mut self, i: AgentId, j: AgentId, r: f64) {
        if i == j {
            return;
        }
        let r = r.clamp(0.0, 1.0);
        self.adj.entry(i).or_default().insert(j, r);
        self.adj.entry(j).or_default().insert(i, r);
    }

    /// Adds `delta`, starting strangers at [`FIRST_CONTACT`]. Returns the new
    /// score.
    pub fn update(&mut self, i: AgentId, j: AgentId, delta: f64) -> f64 {
        let base = if self.knows(i, j) { self.get(i, j) } else { FIRST_CONTACT };
        self.set(i, j, base + delta);
        self.get(i, j)
    }

    /// Strongest relationship of `i`, ties to the lower id. Zero scores do
    /// not count.
    pub fn best_partner(&self, i: AgentId) -> Option<AgentId> {
        let mut best: Option<(AgentId, f64)> = None;
        for (&j, &r) in self.adj.get(&i)? {
            if r > 0.0 && best.is_none_or(|(_, b)| r > b) {
                best = Some((j, r));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Each unordered pair once, `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (AgentId, AgentId, f64)> + '_ {
        self.adj.iter().flat_map(|(&i, row)| {
            row.iter()
                .filter(move |(&j, _)| i < j)
                .map(move |(&j, &r)| (i, j, r))
        })
    }

    pub fn len(&self) -> usize {
        self.pairs().count()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    FaceToFace,
    Virtual,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::FaceToFace => "face_to_face",
            Channel::Virtual => "virtual",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationTask {
    pub i: AgentId,
    pub j: AgentId,
    pub channel: Channel,
    /// Absolute minute the conversation happens.
    pub t: f64,
    pub venue: Option<VenueId>,
    pub venue_name: Option<String>,
    pub memory_i: Vec<MemoryEntry>,
    pub memory_j: Vec<MemoryEntry>,
}

/// `(ΔM_i, ΔM_j, ΔR_ij)`: ids from j's store that i receives, ids from i's
/// store that j receives, and the relationship change.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Exchange {
    pub to_i: Vec<u32>,
    pub to_j: Vec<u32>,
    pub delta_r: f64,
}

/// Most recent entry of `from` that `to` has neither received from nor
/// already been given.
fn freshest_for(memory: &[MemoryEntry], to: AgentId) -> Option<u32> {
    let (shared, from) = (shared_tag(to), from_tag(to));
    memory
        .iter()
        .rev()
        .find(|e| !e.has_tag(&shared) && !e.has_tag(&from))
        .map(|e| e.id)
}

/// Deterministic stand-in for the conversation model.
pub fn mock_communicate(batch: &[ConversationTask], _seed: u64) -> Vec<Exchange> {
    batch
        .iter()
        .map(|task| Exchange {
            to_i: freshest_for(&task.memory_j, task.i).into_iter().collect(),
            to_j: freshest_for(&task.memory_i, task.j).into_iter().collect(),
            delta_r: match task.channel {
                Channel::FaceToFace => FACE_TO_FACE_DELTA,
                Channel::Virtual => VIRTUAL_DELTA,
            },
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeOutcome {
    pub gained_i: usize,
    pub gained_j: usize,
    /// Referenced ids that were not in the partner's snapshot.
    pub dropped: usize,
    pub delta_r: f64,
    pub r: f64,
}

fn copy_entries(
    ids: &[u32],
    source: &[MemoryEntry],
    source_agent: AgentId,
    receiver: &mut MemoryStore,
    t: f64,
) -> (usize, usize) {
    let (mut gained, mut dropped) = (0, 0);
    let mut seen = BTreeSet::new();
    for &id in ids {
        if !seen.insert(id) {
            continue;
        }
        let Some(e) = source.iter().find(|e| e.id == id) else {
            dropped += 1;
            continue;
        };
        let mut tags: Vec<String> = e
            .tags
            .iter()
            .filter(|t| !t.starts_with("shared:") && !t.starts_with("from:"))
            .cloned()
            .collect();
        tags.push(from_tag(source_agent));
        receiver.push(t, e.text.clone(), tags);
        gained += 1;
    }
    (gained, dropped)
}

/// Applies a conversation result: copies shared entries from the dispatch
/// snapshots, marks originals as shared, updates `R_ij` and raises both
/// agents' social satisfaction by `gain`.
#[allow(clippy::too_many_arguments)]
pub fn apply_exchange(
    task: &ConversationTask,
    exchange: &Exchange,
    store_i: &mut MemoryStore,
    store_j: &mut MemoryStore,
    relationships: &mut RelationshipMatrix,
    needs_i: &mut NeedVector,
    needs_j: &mut NeedVector,
    gain: f64,
) -> ExchangeOutcome {
    let (gained_i, dropped_i) = copy_entries(&exchange.to_i, &task.memory_j, task.j, store_i, task.t);
    let (gained_j, dropped_j) = copy_entries(&exchange.to_j, &task.memory_i, task.i, store_j, task.t);
    for &id in &exchange.to_i {
        if task.memory_j.iter().any(|e| e.id == id) {
            store_j.tag(id, shared_tag(task.i));
        }
    }
    for &id in &exchange.to_j {
        if task.memory_i.iter().any(|e| e.id == id) {
            store_i.tag(id, shared_tag(task.j));
        }
    }
    let delta_r = if exchange.delta_r.is_finite() {
        exchange.delta_r.clamp(-MAX_DELTA_R, MAX_DELTA_R)
    } else {
        0.0
    };
    let r = relationships.update(task.i, task.j, delta_r);
    let mut bump = NeedVector::ZERO;
    bump[Need::SocialConnection] = gain;
    *needs_i = needs_i.apply_effect(&bump);
    *needs_j = needs_j.apply_effect(&bump);
    ExchangeOutcome {
        gained_i,
        gained_j,
        dropped: dropped_i + dropped_j,
        delta_r,
        r,
    }
}

/// One visit of an agent to a venue, absolute minutes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stay {
    pub agent: AgentId,
    pub venue: VenueId,
    pub start: f64,
    pub end: f64,
}

/// A detected co-location: `(i, j, venue, t)` with `i < j` and `t` the
/// later arrival.
pub type Meeting = (AgentId, AgentId, VenueId, f64);

/// Pairs of agents whose stays at the same venue overlap by at least
/// `min_overlap` minutes. Stays are taken in arrival order; each newcomer
/// meets the earliest-arrived partners still present who have not used up
/// their `max_per_agent` meetings. A pair meets at most once. The result is
/// sorted by `(t, i, j)`.
pub fn face_to_face_pairs(
    stays: &[Stay],
    min_overlap: f64,
    max_per_agent: usize,
    eligible: impl Fn(VenueId) -> bool,
) -> Vec<Meeting> {
    let mut sorted: Vec<&Stay> = stays
        .iter()
        .filter(|s| eligible(s.venue) && s.end - s.start >= min_overlap)
        .collect();
    sorted.sort_by(|a, b| {
        a.start
            .total_cmp(&b.start)
            .then(a.venue.cmp(&b.venue))
            .then(a.agent.cmp(&b.agent))
    });
    let mut active: BTreeMap<VenueId, Vec<&Stay>> = BTreeMap::new();
    let mut pairs = BTreeSet::new();
    let mut count: BTreeMap<AgentId, usize> = BTreeMap::new();
    let mut out = Vec::new();
    for s in sorted {
        let here = active.entry(s.venue).or_default();
        here.retain(|a| a.end - s.start >= min_overlap && count.get(&a.agent).copied().unwrap_or(0) < max_per_agent);
        for a in here.iter() {
            if count.get(&s.agent).copied().unwrap_or(0) >= max_per_agent {
                break;
            }
            if a.agent == s.agent || count.get(&a.agent).copied().unwrap_or(0) >= max_per_agent {
                continue;
            }
            let (i, j) = if a.agent < s.agent { (a.agent, s.agent) } else { (s.agent, a.agent) };
            if !pairs.insert((i, j)) {
                continue;
            }
            *count.entry(i).or_default() += 1;
            *count.entry(j).or_default() += 1;
            out.push((i, j, s.venue, s.start));
        }
        if count.get(&s.agent).copied().unwrap_or(0) < max_per_agent {
            here.push(s);
        }
    }
    out.sort_by(|a, b| a.3.total_cmp(&b.3).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    out
}

/// Partner for a remote conversation when `i`'s social satisfaction is
/// below `threshold`.
pub fn virtual_partner(
    relationships: &RelationshipMatrix,
    i: AgentId,
    social: f64,
    threshold: f64,
) -> Option<AgentId> {
    if social < threshold {
        relationships.best_partner(i)
    } else {
        None
    }
}

/// Prompt for the remote conversation model.
pub fn build_conversation_prompt(task: &ConversationTask) -> String {
    let mut s = String::with_capacity(512);
    let place = match (&task.channel, &task.venue_name) {
        (Channel::FaceToFace, Some(v)) => format!("meet at {v}"),
        (Channel::FaceToFace, None) => "meet in person".to_string(),
        (Channel::Virtual, _) => "talk on the phone".to_string(),
    };
    let _ = writeln!(
        s,
        "Two residents, A and B, {place} at {}.",
        format_hhmm(task.t.rem_euclid(1440.0))
    );
    for (label, memory) in [("A", &task.memory_i), ("B", &task.memory_j)] {
        let _ = writeln!(s, "Memories of {label}:");
        if memory.is_empty() {
            let _ = writeln!(s, "(none)");
        }
        for e in memory {
            let _ = writeln!(s, "{}: {}", e.id, e.text);
        }
    }
    s.push_str(
        "Reply with three parts separated by semicolons: the memory ids B tells A \
         (comma-separated, may be empty), the memory ids A tells B, and the change in \
         their relationship between -0.2 and 0.2.\n",
    );
    s
}

/// Reads `"ids_to_i;ids_to_j;delta"`.
pub fn parse_exchange(text: &str) -> Result<Exchange, String> {
    let line = text.trim().lines().last().unwrap_or("").trim();
    let parts: Vec<&str> = line.split(';').map(str::trim).collect();
    let [a, b, d] = parts[..] else {
        return Err(format!("expected three `;`-separated parts, got `{line}`"));
    };
    let ids = |s: &str| -> Result<Vec<u32>, String> {
        s.split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(|x| x.parse::<u32>().map_err(|e| format!("bad memory id `{x}`: {e}")))
            .collect()
    };
    let delta_r: f64 = d.parse().map_err(|e| format!("bad delta `{d}`: {e}"))?;
    if !delta_r.is_finite() {
        return Err(format!("bad delta `{d}`"));
    }
    Ok(Exchange {
        to_i: ids(a)?,
        to_j: ids(b)?,
        delta_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(i: u32, j: u32, memory_i: Vec<MemoryEntry>, memory_j: Vec<MemoryEntry>) -> ConversationTask {
        ConversationTask {
            i: AgentId(i),
            j: AgentId(j),
            channel: Channel::FaceToFace,
            t: 600.0,
            venue: Some(VenueId(3)),
            venue_name: Some("cafe".into()),
            memory_i,
            memory_j,
        }
    }

    #[test]
    fn store_ids_and_trim() {
        let mut s = MemoryStore::new(3);
        for k in 0..5 {
            assert_eq!(s.push(f64::from(k), format!("m{k}"), vec![]), k);
        }
        assert_eq!(s.len(), 5);
        s.trim();
        assert_eq!(s.entries().iter().map(|e| e.id).collect::<Vec<_>>(), [2, 3, 4]);
        assert!(s.get(1).is_none());
        assert_eq!(s.snapshot(3.0).len(), 2);
        s.push(1.0, "late", vec![]);
        assert_eq!(s.entries().last().unwrap().t, 4.0);
    }

    #[test]
    fn relationships_are_symmetric_and_clipped() {
        let mut r = RelationshipMatrix::default();
        let (a, b, c) = (AgentId(1), AgentId(2), AgentId(3));
        assert_eq!(r.update(a, b, 0.05), 0.15000000000000002);
        assert_eq!(r.get(b, a), r.get(a, b));
        r.set(a, c, 0.95);
        assert_eq!(r.update(c, a, 0.2), 1.0);
        assert_eq!(r.best_partner(a), Some(c));
        r.set(a, b, 1.0);
        assert_eq!(r.best_partner(a), Some(b));
        assert_eq!(r.len(), 2);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<RelationshipMatrix>(&json).unwrap(), r);
    }

    #[test]
    fn empty_exchange_only_touches_relationship() {
        let t = task(0, 1, vec![], vec![]);
        let ex = mock_communicate(std::slice::from_ref(&t), 0).pop().unwrap();
        assert_eq!(ex, Exchange { to_i: vec![], to_j: vec![], delta_r: FACE_TO_FACE_DELTA });
        let (mut si, mut sj) = (MemoryStore::default(), MemoryStore::default());
        let mut rel = RelationshipMatrix::default();
        let (mut ni, mut nj) = (NeedVector::splat(0.5), NeedVector::splat(0.5));
        let zero = Exchange::default();
        let out = apply_exchange(&t, &zero, &mut si, &mut sj, &mut rel, &mut ni, &mut nj, 0.1);
        assert_eq!((out.gained_i, out.gained_j, out.dropped), (0, 0, 0));
        assert!(si.is_empty() && sj.is_empty());
        assert_eq!(out.r, FIRST_CONTACT);
        assert!((ni[Need::SocialConnection] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn sharing_copies_and_drops_unknown_ids() {
        let mut sj = MemoryStore::default();
        for k in 0..8 {
            sj.push(f64::from(k), format!("j{k}"), vec!["leisure".into()]);
        }
        let mut si = MemoryStore::default();
        let t = task(0, 1, si.snapshot(600.0), sj.snapshot(600.0));
        let before = sj.clone();
        let ex = Exchange { to_i: vec![7, 42], to_j: vec![], delta_r: 0.5 };
        let mut rel = RelationshipMatrix::default();
        rel.set(AgentId(0), AgentId(1), 0.95);
        let (mut ni, mut nj) = (NeedVector::splat(0.5), NeedVector::splat(0.5));
        let out = apply_exchange(&t, &ex, &mut si, &mut sj, &mut rel, &mut ni, &mut nj, 0.0);
        assert_eq!((out.gained_i, out.dropped), (1, 1));
        assert_eq!(out.r, 1.0);
        assert_eq!(out.delta_r, MAX_DELTA_R);
        assert_eq!(si.entries()[0].text, "j7");
        assert!(si.entries()[0].tags.contains(&"from:1".to_string()));
        assert_eq!(sj.len(), before.len());
        assert_eq!(sj.get(7).unwrap().text, "j7");
        assert!(sj.get(7).unwrap().tags.contains(&"shared:0".to_string()));
        // the next meeting shares something new
        let t2 = task(0, 1, si.snapshot(700.0), sj.snapshot(700.0));
        let ex2 = mock_communicate(&[t2], 0).pop().unwrap();
        assert_eq!(ex2.to_i, vec![6]);
        assert!(ex2.to_j.is_empty(), "i holds only what j told it");
    }

    #[test]
    fn repeated_meetings_never_lower_r() {
        let mut rel = RelationshipMatrix::default();
        let (mut si, mut sj) = (MemoryStore::default(), MemoryStore::default());
        let (mut ni, mut nj) = (NeedVector::splat(0.5), NeedVector::splat(0.5));
        let mut last = 0.0;
        for _ in 0..30 {
            let t = task(0, 1, si.snapshot(1e9), sj.snapshot(1e9));
            let ex = mock_communicate(std::slice::from_ref(&t), 9).pop().unwrap();
            let out = apply_exchange(&t, &ex, &mut si, &mut sj, &mut rel, &mut ni, &mut nj, 0.1);
            assert!(out.r >= last);
            last = out.r;
        }
        assert_eq!(last, 1.0);
    }

    #[test]
    fn co_location_and_loneliness() {
        let s = |a: u32, v: u32, start: f64, end: f64| Stay {
            agent: AgentId(a),
            venue: VenueId(v),
            start,
            end,
        };
        let stays = [s(1, 5, 600.0, 660.0), s(2, 5, 620.0, 700.0), s(3, 6, 600.0, 700.0)];
        let m = face_to_face_pairs(&stays, 15.0, 2, |_| true);
        assert_eq!(m, vec![(AgentId(1), AgentId(2), VenueId(5), 620.0)]);
        assert!(face_to_face_pairs(&stays, 15.0, 2, |v| v != VenueId(5)).is_empty());
        let brief = [s(1, 5, 600.0, 660.0), s(2, 5, 650.0, 700.0)];
        assert!(face_to_face_pairs(&brief, 15.0, 2, |_| true).is_empty());

        let mut rel = RelationshipMatrix::default();
        assert_eq!(virtual_partner(&rel, AgentId(1), 0.1, 0.3), None);
        rel.set(AgentId(1), AgentId(4), 0.1);
        assert_eq!(virtual_partner(&rel, AgentId(1), 0.1, 0.3), Some(AgentId(4)));
        assert_eq!(virtual_partner(&rel, AgentId(1), 0.8, 0.3), None);
    }

    #[test]
    fn per_agent_cap() {
        let stays: Vec<Stay> = (0..6)
            .map(|a| Stay {
                agent: AgentId(a),
                venue: VenueId(0),
                start: 600.0 + f64::from(a),
                end: 700.0,
            })
            .collect();
        let m = face_to_face_pairs(&stays, 15.0, 2, |_| true);
        let mut count = BTreeMap::new();
        for (i, j, _, _) in &m {
            *count.entry(*i).or_insert(0) += 1;
            *count.entry(*j).or_insert(0) += 1;
        }
        assert!(count.values().all(|&c| c <= 2));
        assert_eq!(m[0], (AgentId(0), AgentId(1), VenueId(0), 601.0));
    }

    #[test]
    fn exchange_reply_format() {
        assert_eq!(
            parse_exchange("3, 5; 7; 0.05").unwrap(),
            Exchange { to_i: vec![3, 5], to_j: vec![7], delta_r: 0.05 }
        );
        assert_eq!(parse_exchange(";;-0.1").unwrap().delta_r, -0.1);
        assert!(parse_exchange("1;2").is_err());
        assert!(parse_exchange("x;;0").is_err());
        let t = task(0, 1, vec![], vec![]);
        let p = build_conversation_prompt(&t);
        assert!(p.contains("meet at cafe at 10:00") && p.contains("(none)"));
    }
}
