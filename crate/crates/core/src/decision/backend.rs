use super::mock::mock_one;
use super::{DecisionRequest, DecisionResponse, ParseError};
use crate::social::{mock_communicate, ConversationTask, Exchange};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint returned status {0}")]
    Status(u16),
    #[error("malformed reply: {0}")]
    Malformed(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Counters a backend accumulates over its lifetime.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BackendStats {
    pub requests: u64,
    pub http_calls: u64,
    pub failures: u64,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// Answers decision and conversation batches. Results correspond to inputs
/// by position.
pub trait DecisionBackend: Send + Sync {
    fn name(&self) -> &str;

    fn decide_batch(&self, batch: &[DecisionRequest]) -> Vec<Result<DecisionResponse, BackendError>>;

    fn communicate_batch(&self, batch: &[ConversationTask]) -> Vec<Result<Exchange, BackendError>>;

    fn stats(&self) -> BackendStats {
        BackendStats::default()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MockBackend {
    pub seed: u64,
}

impl MockBackend {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }
}

impl DecisionBackend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn decide_batch(&self, batch: &[DecisionRequest]) -> Vec<Result<DecisionResponse, BackendError>> {
        batch.iter().map(|r| Ok(mock_one(r))).collect()
    }

    fn communicate_batch(&self, batch: &[ConversationTask]) -> Vec<Result<Exchange, BackendError>> {
        mock_communicate(batch, self.seed).into_iter().map(Ok).collect()
    }
}
