use crate::time::Weekday;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weather {
    Sunny,
    Cloudy,
    Rainy,
}

impl fmt::Display for Weather {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weather::Sunny => "sunny",
            Weather::Cloudy => "cloudy",
            Weather::Rainy => "rainy",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentEntry {
    pub start: u32,
    pub weather: Weather,
    pub temperature: f64,
}

/// Weather and temperature for one simulated day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentState {
    pub day: Weekday,
    pub schedule: Vec<EnvironmentEntry>,
}

impl EnvironmentState {
    /// Constant conditions for the whole day.
    pub fn constant(day: Weekday, weather: Weather, temperature: f64) -> Self {
        Self {
            day,
            schedule: vec![EnvironmentEntry {
                start: 0,
                weather,
                temperature,
            }],
        }
    }

    /// Checks that the schedule is non-empty, starts at minute 0 and has
    /// strictly increasing start minutes below 1440.
    pub fn validate(&self) -> Result<(), String> {
        let Some(first) = self.schedule.first() else {
            return Err("environment schedule is empty".into());
        };
        if first.start != 0 {
            return Err("environment schedule must start at minute 0".into());
        }
        for w in self.schedule.windows(2) {
            if w[1].start <= w[0].start {
                return Err("environment schedule start minutes must increase".into());
            }
        }
        if self.schedule.last().is_some_and(|e| e.start >= 1440) {
            return Err("environment schedule entries must start before 1440".into());
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> (Weather, f64) {
        environment_at(&self.schedule, t)
    }
}

/// Entry with the largest start minute `<= t`.
///
/// Panics on an empty schedule; [`EnvironmentState::validate`] rules that out.
pub fn environment_at(schedule: &[EnvironmentEntry], t: f64) -> (Weather, f64) {
    let idx = schedule.partition_point(|e| f64::from(e.start) <= t);
    let e = schedule[idx.saturating_sub(1)];
    (e.weather, e.temperature)
}
