//! Simulated-time helpers.
//!
//! Local clocks are kept in minutes as `f64`. Every increment the simulator
//! applies is a whole number of 15-second steps (0.25 min), so clock values
//! stay exactly representable and comparisons against calendar minutes are
//! exact.

use serde::{Deserialize, Serialize};
use std::fmt;

pub const MINUTES_PER_DAY: f64 = 1440.0;
pub const SECONDS_PER_STEP: f64 = 15.0;
pub const STEP_MINUTES: f64 = SECONDS_PER_STEP / 60.0;

/// Converts a whole number of 15-second steps to minutes.
pub fn steps_to_minutes(steps: u32) -> f64 {
    f64::from(steps) * STEP_MINUTES
}

/// Renders a minute-of-day as `HH:MM` (minutes are floored).
pub fn format_hhmm(minute: f64) -> String {
    let m = minute.max(0.0).floor() as u32;
    format!("{:02}:{:02}", m / 60, m % 60)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weekday {
    Monday,
    Tuesday,
    Wednesday,
    Thursday,
    Friday,
    Saturday,
    Sunday,
}

impl Weekday {
    pub const ALL: [Weekday; 7] = [
        Weekday::Monday,
        Weekday::Tuesday,
        Weekday::Wednesday,
        Weekday::Thursday,
        Weekday::Friday,
        Weekday::Saturday,
        Weekday::Sunday,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i % 7]
    }

    pub fn succ(self) -> Self {
        Self::from_index(self.index() + 1)
    }

    pub fn is_weekend(self) -> bool {
        matches!(self, Weekday::Saturday | Weekday::Sunday)
    }

    /// Bit for this day in a [`DayMask`].
    pub fn bit(self) -> u8 {
        1 << self.index()
    }
}

impl fmt::Display for Weekday {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Weekday::Monday => "Monday",
            Weekday::Tuesday => "Tuesday",
            Weekday::Wednesday => "Wednesday",
            Weekday::Thursday => "Thursday",
            Weekday::Friday => "Friday",
            Weekday::Saturday => "Saturday",
            Weekday::Sunday => "Sunday",
        };
        f.write_str(s)
    }
}

/// Set of weekdays, bit `i` set for `Weekday::from_index(i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DayMask(pub u8);

impl DayMask {
    pub const EVERY_DAY: DayMask = DayMask(0b111_1111);
    pub const WEEKDAYS: DayMask = DayMask(0b001_1111);
    pub const WEEKEND: DayMask = DayMask(0b110_0000);

    pub fn contains(self, day: Weekday) -> bool {
        self.0 & day.bit() != 0
    }

    pub fn intersects(self, other: DayMask) -> bool {
        self.0 & other.0 != 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hhmm_formatting() {
        assert_eq!(format_hhmm(0.0), "00:00");
        assert_eq!(format_hhmm(420.0), "07:00");
        assert_eq!(format_hhmm(1439.75), "23:59");
    }

    #[test]
    fn quarter_minute_sums_are_exact() {
        let mut t = 0.0;
        for _ in 0..5760 {
            t += STEP_MINUTES;
        }
        assert_eq!(t, MINUTES_PER_DAY);
    }

    #[test]
    fn day_masks() {
        assert!(DayMask::WEEKDAYS.contains(Weekday::Friday));
        assert!(!DayMask::WEEKDAYS.contains(Weekday::Saturday));
        assert!(DayMask::WEEKEND.contains(Weekday::Sunday));
        assert_eq!(Weekday::Sunday.succ(), Weekday::Monday);
    }
}
