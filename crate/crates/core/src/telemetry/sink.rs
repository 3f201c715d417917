use super::{EventRecord, TelemetryError};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

/// Destination for event records. Records arrive grouped by day in
/// canonical order.
pub trait EventSink {
    fn write(&mut self, events: &[EventRecord]) -> Result<(), TelemetryError>;

    /// Like `write`, for callers that no longer need the records.
    fn write_owned(&mut self, events: Vec<EventRecord>) -> Result<(), TelemetryError> {
        self.write(&events)
    }

    fn flush(&mut self) -> Result<(), TelemetryError> {
        Ok(())
    }
}

impl<S: EventSink + ?Sized> EventSink for Box<S> {
    fn write(&mut self, events: &[EventRecord]) -> Result<(), TelemetryError> {
        (**self).write(events)
    }

    fn write_owned(&mut self, events: Vec<EventRecord>) -> Result<(), TelemetryError> {
        (**self).write_owned(events)
    }

    fn flush(&mut self) -> Result<(), TelemetryError> {
        (**self).flush()
    }
}

#[derive(Debug, Default)]
pub struct NullSink;

impl EventSink for NullSink {
    fn write(&mut self, _events: &[EventRecord]) -> Result<(), TelemetryError> {
        Ok(())
    }
}

#[derive(Debug, Default, Clone)]
pub struct MemorySink {
    pub events: Vec<EventRecord>,
}

impl EventSink for MemorySink {
    fn write(&mut self, events: &[EventRecord]) -> Result<(), TelemetryError> {
        self.events.extend_from_slice(events);
        Ok(())
    }

    fn write_owned(&mut self, mut events: Vec<EventRecord>) -> Result<(), TelemetryError> {
        if self.events.is_empty() {
            self.events = events;
        } else {
            self.events.append(&mut events);
        }
        Ok(())
    }
}

/// NDJSON file, one record per line.
pub struct FileSink {
    path: PathBuf,
    out: BufWriter<File>,
}

impl FileSink {
    pub fn create(path: impl AsRef<Path>) -> Result<Self, TelemetryError> {
        let path = path.as_ref().to_path_buf();
        let out = BufWriter::new(File::create(&path)?);
        Ok(Self { path, out })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl EventSink for FileSink {
    fn write(&mut self, events: &[EventRecord]) -> Result<(), TelemetryError> {
        for e in events {
            self.out.write_all(e.to_json().as_bytes())?;
            self.out.write_all(b"\n")?;
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<(), TelemetryError> {
        self.out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BulkConfig {
    /// Bulk endpoint, e.g. `http://localhost:9200/_bulk`.
    pub url: String,
    pub index: String,
    /// Events per request.
    pub batch: usize,
    /// Extra attempts after a failed request.
    pub retries: u32,
    pub timeout_secs: u64,
}

impl Default for BulkConfig {
    fn default() -> Self {
        Self {
            url: "http://127.0.0.1:9200/_bulk".into(),
            index: "citysim-events".into(),
            batch: 500,
            retries: 3,
            timeout_secs: 30,
        }
    }
}

/// Body of one bulk-index request: an action line and a document line per
/// event.
pub fn bulk_body(events: &[EventRecord], index: &str) -> String {
    let action = serde_json::json!({ "index": { "_index": index } }).to_string();
    let mut s = String::new();
    for e in events {
        s.push_str(&action);
        s.push('\n');
        s.push_str(&e.to_json());
        s.push('\n');
    }
    s
}

/// Posts events to a search engine's bulk-indexing endpoint.
pub struct BulkHttpSink {
    config: BulkConfig,
    agent: ureq::Agent,
    pending: Vec<EventRecord>,
    requests: u64,
}

impl BulkHttpSink {
    pub fn new(config: BulkConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
            .build()
            .into();
        Self {
            config,
            agent,
            pending: Vec::new(),
            requests: 0,
        }
    }

    /// Successful bulk requests so far.
    pub fn requests(&self) -> u64 {
        self.requests
    }

    fn post(&mut self, events: &[EventRecord]) -> Result<(), TelemetryError> {
        let body = bulk_body(events, &self.config.index);
        let mut last = String::new();
        for _ in 0..=self.config.retries {
            let res = self
                .agent
                .post(&self.config.url)
                .header("Content-Type", "application/x-ndjson")
                .send(body.as_str());
            match res {
                Ok(_) => {
                    self.requests += 1;
                    return Ok(());
                }
                Err(e) => {
                    log::warn!("bulk request failed: {e}");
                    last = e.to_string();
                }
            }
        }
        Err(TelemetryError::Http(last))
    }

    fn drain_full_batches(&mut self) -> Result<(), TelemetryError> {
        let n = self.config.batch.max(1);
        while self.pending.len() >= n {
            let batch: Vec<EventRecord> = self.pending[..n].to_vec();
            self.post(&batch)?;
            self.pending.drain(..n);
        }
        Ok(())
    }
}

impl EventSink for BulkHttpSink {
    fn write(&mut self, events: &[EventRecord]) -> Result<(), TelemetryError> {
        self.pending.extend_from_slice(events);
        self.drain_full_batches()
    }

    fn flush(&mut self) -> Result<(), TelemetryError> {
        self.drain_full_batches()?;
        if !self.pending.is_empty() {
            let batch = std::mem::take(&mut self.pending);
            if let Err(e) = self.post(&batch) {
                self.pending = batch;
                return Err(e);
            }
        }
        Ok(())
    }
}

/// Passes records on to `inner` while hashing their NDJSON encoding. For a
/// simulation's output, which arrives in canonical order, [`HashSink::hex`]
/// equals [`super::log_hash`] of the full log.
pub struct HashSink<S> {
    inner: S,
    hasher: Sha256,
    events: u64,
}

impl<S: EventSink> HashSink<S> {
    pub fn new(inner: S) -> Self {
        Self {
            inner,
            hasher: Sha256::new(),
            events: 0,
        }
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn hex(&self) -> String {
        super::hex(&self.hasher.clone().finalize())
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    pub fn into_inner(self) -> S {
        self.inner
    }

    fn absorb(&mut self, events: &[EventRecord]) {
        for e in events {
            self.hasher.update(e.to_json().as_bytes());
            self.hasher.update(b"\n");
        }
        self.events += events.len() as u64;
    }
}

impl<S: EventSink> EventSink for HashSink<S> {
    fn write(&mut self, events: &[EventRecord]) -> Result<(), TelemetryError> {
        self.absorb(events);
        self.inner.write(events)
    }

    fn write_owned(&mut self, events: Vec<EventRecord>) -> Result<(), TelemetryError> {
        self.absorb(&events);
        self.inner.write_owned(events)
    }

    fn flush(&mut self) -> Result<(), TelemetryError> {
        self.inner.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::telemetry::tests::sample;

    #[test]
    fn bulk_body_pairs_lines() {
        let body = bulk_body(&sample(), "citysim-events");
        let lines: Vec<&str> = body.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], r#"{"index":{"_index":"citysim-events"}}"#);
        assert_eq!(lines[1], sample()[0].to_json());
        assert_eq!(bulk_body(&[], "x"), "");
    }

    #[test]
    fn file_sink_writes_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.ndjson");
        let mut sink = FileSink::create(&path).unwrap();
        sink.write(&[]).unwrap();
        sink.flush().unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "");
        sink.write(&sample()).unwrap();
        sink.flush().unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 2);
    }

    #[test]
    fn hash_sink_matches_log_hash() {
        let mut ev = sample();
        super::super::canonical_order(&mut ev);
        let mut sink = HashSink::new(MemorySink::default());
        sink.write(&ev[..1]).unwrap();
        sink.write_owned(ev[1..].to_vec()).unwrap();
        assert_eq!(sink.hex(), super::super::log_hash(&ev));
        assert_eq!(sink.events(), 2);
        assert_eq!(sink.into_inner().events, ev);
    }

    #[test]
    fn empty_bulk_flush_makes_no_requests() {
        let mut sink = BulkHttpSink::new(BulkConfig {
            url: "http://127.0.0.1:9/_bulk".into(),
            ..BulkConfig::default()
        });
        sink.write(&[]).unwrap();
        sink.flush().unwrap();
        assert_eq!(sink.requests(), 0);
    }
}
