use super::{DecisionRequest, DecisionResponse};
use crate::transport::Mode;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("reply contains no integers")]
    NoIntegers,
    #[error("reply names option {index} but only {count} were offered")]
    OptionOutOfRange { index: u64, count: usize },
    #[error("reply has no mode index")]
    MissingMode,
    #[error("mode {0} is not offered for the chosen option")]
    InfeasibleMode(u64),
}

fn integers(text: &str) -> impl Iterator<Item = u64> + '_ {
    text.split(|c: char| !c.is_ascii_digit())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u64>().unwrap_or(u64::MAX))
}

/// Reads the first two integers of a reply as (option index, mode index) and
/// checks them against the request.
pub fn parse_response(text: &str, request: &DecisionRequest) -> Result<DecisionResponse, ParseError> {
    let mut ints = integers(text);
    let index = ints.next().ok_or(ParseError::NoIntegers)?;
    let count = request.candidates.len();
    let candidate = usize::try_from(index)
        .ok()
        .filter(|&i| i < count)
        .ok_or(ParseError::OptionOutOfRange { index, count })?;
    let m = ints.next().ok_or(ParseError::MissingMode)?;
    let mode = usize::try_from(m)
        .ok()
        .and_then(Mode::from_index)
        .filter(|mode| request.candidates[candidate].option(*mode).is_some())
        .ok_or(ParseError::InfeasibleMode(m))?;
    Ok(DecisionResponse { candidate, mode })
}
