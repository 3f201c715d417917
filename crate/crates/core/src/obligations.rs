//! Obligation calendar lookup and the admissibility mask for voluntary
//! actions.

use crate::catalog::ActionSpec;
use crate::city_map::{venue_open, Venue};
use crate::persona::ObligationTask;
use crate::time::Weekday;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ObligationError {
    #[error("calendar has no tasks")]
    EmptyCalendar,
}

/// The next mandatory task and when it starts relative to today's midnight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NextObligation<'a> {
    pub task: &'a ObligationTask,
    /// 0 for today, 1 for tomorrow, ...
    pub days_ahead: u32,
}

impl NextObligation<'_> {
    /// Start minute counted from today's midnight (may exceed 1440).
    pub fn start(&self) -> f64 {
        f64::from(self.days_ahead * 1440 + self.task.start)
    }
}

/// Earliest task starting at or after minute `t` today, else the first task
/// of the following days.
pub fn next_obligation(
    calendar: &[ObligationTask],
    day: Weekday,
    t: f64,
) -> Result<NextObligation<'_>, ObligationError> {
    let today = calendar
        .iter()
        .filter(|task| task.days.contains(day) && f64::from(task.start) >= t)
        .min_by_key(|task| task.start);
    if let Some(task) = today {
        return Ok(NextObligation { task, days_ahead: 0 });
    }
    let mut d = day;
    for ahead in 1..=7 {
        d = d.succ();
        if let Some(task) = calendar
            .iter()
            .filter(|task| task.days.contains(d))
            .min_by_key(|task| task.start)
        {
            return Ok(NextObligation {
                task,
                days_ahead: ahead,
            });
        }
    }
    Err(ObligationError::EmptyCalendar)
}

/// Inputs to the admissibility mask. Times are minutes from today's
/// midnight.
#[derive(Debug, Clone, Copy)]
pub struct MaskInput<'a> {
    pub t: f64,
    pub action: &'a ActionSpec,
    pub venue: &'a Venue,
    /// Travel time from the current location to the candidate venue.
    pub dt_cur: f64,
    /// Travel time from the candidate venue to the next obligation's venue.
    pub dt_next: f64,
    pub next_obligation: f64,
}

impl MaskInput<'_> {
    pub fn semantic(&self) -> bool {
        self.action.in_window(self.t)
    }

    pub fn open(&self) -> bool {
        venue_open(self.venue, self.t + self.dt_cur, f64::from(self.action.duration))
    }

    pub fn before_obligation(&self) -> bool {
        completes_before(
            self.t,
            self.dt_cur,
            f64::from(self.action.duration),
            self.dt_next,
            self.next_obligation,
        )
    }
}

/// `t + Δcur + Δact + Δnext ≤ t_obl`.
pub fn completes_before(t: f64, dt_cur: f64, dt_act: f64, dt_next: f64, t_obl: f64) -> bool {
    t + dt_cur + dt_act + dt_next <= t_obl
}

/// True iff the action is timely, its venue is open for the whole visit and
/// it finishes in time to reach the next obligation.
pub fn mask(input: &MaskInput<'_>) -> bool {
    debug_assert!(input.dt_cur >= 0.0 && input.dt_next >= 0.0);
    input.semantic() && input.open() && input.before_obligation()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;
    use crate::city_map::{CityMap, VenueId};
    use crate::time::DayMask;

    fn task(start: u32, duration: u32, label: &str, days: DayMask) -> ObligationTask {
        ObligationTask {
            start,
            duration,
            venue: VenueId(0),
            label: label.into(),
            days,
        }
    }

    fn calendar() -> Vec<ObligationTask> {
        vec![
            task(0, 420, "sleep", DayMask::EVERY_DAY),
            task(540, 540, "work", DayMask::WEEKDAYS),
            task(1380, 60, "sleep", DayMask::EVERY_DAY),
        ]
    }

    #[test]
    fn next_obligation_examples() {
        let cal = calendar();
        let n = next_obligation(&cal, Weekday::Monday, 480.0).unwrap();
        assert_eq!((n.task.label.as_str(), n.start()), ("work", 540.0));
        let n = next_obligation(&cal, Weekday::Monday, 1320.0).unwrap();
        assert_eq!((n.task.label.as_str(), n.start()), ("sleep", 1380.0));
        let n = next_obligation(&cal, Weekday::Monday, 1400.0).unwrap();
        assert_eq!((n.days_ahead, n.start()), (1, 1440.0));
        let n = next_obligation(&cal, Weekday::Saturday, 480.0).unwrap();
        assert_eq!(n.task.label, "sleep");
        assert_eq!(
            next_obligation(&[], Weekday::Monday, 0.0),
            Err(ObligationError::EmptyCalendar)
        );
    }

    #[test]
    fn weekday_only_calendar_wraps_over_weekend() {
        let cal = vec![task(540, 60, "work", DayMask::WEEKDAYS)];
        let n = next_obligation(&cal, Weekday::Friday, 700.0).unwrap();
        assert_eq!(n.days_ahead, 3);
    }

    #[test]
    fn mask_examples() {
        let map = CityMap::default_city();
        let catalog = Catalog::default_catalog();
        let breakfast = catalog.by_name("breakfast-at-home").unwrap();
        let home = map.venues_of(crate::city_map::VenueCategory::ResidentialRoom).next().unwrap();
        let night = MaskInput {
            t: 1260.0,
            action: breakfast,
            venue: home,
            dt_cur: 0.0,
            dt_next: 0.0,
            next_obligation: 1380.0,
        };
        assert!(!mask(&night));
        assert!(completes_before(600.0, 10.0, 30.0, 15.0, 660.0));
        assert!(!completes_before(600.0, 10.0, 30.0, 15.0, 650.0));
        let morning = MaskInput { t: 450.0, next_obligation: 540.0, ..night };
        assert!(mask(&morning));
        let late = MaskInput { next_obligation: 470.0, ..morning };
        assert!(!mask(&late));
    }
}
