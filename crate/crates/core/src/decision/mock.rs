use super::{DecisionRequest, DecisionResponse, ModeOption};
use crate::city_map::Weather;
use crate::persona::Income;
use crate::transport::Mode;

/// Slack below which the mock policy takes the fastest mode.
pub const TIGHT_SLACK_MINUTES: f64 = 20.0;

fn fastest<'a>(options: impl Iterator<Item = &'a ModeOption>) -> Option<&'a ModeOption> {
    options.min_by(|a, b| a.minutes.total_cmp(&b.minutes).then(a.mode.cmp(&b.mode)))
}

/// Deterministic mode preference: no PMV in the rain, fastest when slack is
/// tight, bus for high earners when it beats walking, otherwise cheapest.
/// Only modes that fit are considered; if none does, the overall fastest.
pub fn choose_mode(options: &[ModeOption], slack: f64, weather: Weather, income: Income) -> Mode {
    let usable: Vec<&ModeOption> = options
        .iter()
        .filter(|o| o.fits && !(weather == Weather::Rainy && o.mode == Mode::Pmv))
        .collect();
    let Some(quickest) = fastest(usable.iter().copied()) else {
        return fastest(options.iter()).expect("at least one option").mode;
    };
    if slack < TIGHT_SLACK_MINUTES {
        return quickest.mode;
    }
    if income == Income::High {
        let find = |m: Mode| usable.iter().find(|o| o.mode == m);
        if let (Some(bus), Some(walk)) = (find(Mode::Bus), find(Mode::Walking)) {
            if bus.minutes < walk.minutes {
                return Mode::Bus;
            }
        }
    }
    usable
        .iter()
        .min_by(|a, b| {
            a.money
                .cmp(&b.money)
                .then(a.minutes.total_cmp(&b.minutes))
                .then(a.mode.cmp(&b.mode))
        })
        .expect("non-empty")
        .mode
}

/// Stand-in for the language model: highest-scoring option (ties to the
/// lower index) with [`choose_mode`]. The policy is fully deterministic, so
/// the seed does not change the outcome.
pub fn mock_decide(batch: &[DecisionRequest], _seed: u64) -> Vec<DecisionResponse> {
    batch.iter().map(mock_one).collect()
}

pub(crate) fn mock_one(req: &DecisionRequest) -> DecisionResponse {
    let mut best = 0;
    for (i, c) in req.candidates.iter().enumerate() {
        if c.score > req.candidates[best].score {
            best = i;
        }
    }
    let c = &req.candidates[best];
    let mode = choose_mode(&c.options, c.slack, req.weather, req.persona.income);
    DecisionResponse { candidate: best, mode }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opt(mode: Mode, minutes: f64, money: u32) -> ModeOption {
        ModeOption { mode, minutes, money, fits: true }
    }

    #[test]
    fn rain_excludes_pmv() {
        let o = [opt(Mode::Walking, 20.0, 0), opt(Mode::Pmv, 5.0, 1), opt(Mode::Bus, 8.0, 3)];
        assert_eq!(choose_mode(&o, 5.0, Weather::Rainy, Income::Medium), Mode::Bus);
        assert_eq!(choose_mode(&o, 5.0, Weather::Sunny, Income::Medium), Mode::Pmv);
        assert_eq!(choose_mode(&o, 60.0, Weather::Rainy, Income::Medium), Mode::Walking);
    }

    #[test]
    fn high_income_takes_faster_bus() {
        let o = [opt(Mode::Walking, 20.0, 0), opt(Mode::Bus, 8.0, 3)];
        assert_eq!(choose_mode(&o, 60.0, Weather::Sunny, Income::High), Mode::Bus);
        assert_eq!(choose_mode(&o, 60.0, Weather::Sunny, Income::Medium), Mode::Walking);
        let slow_bus = [opt(Mode::Walking, 8.0, 0), opt(Mode::Bus, 8.0, 3)];
        assert_eq!(choose_mode(&slow_bus, 60.0, Weather::Sunny, Income::High), Mode::Walking);
    }

    #[test]
    fn unfit_modes_are_skipped() {
        let mut walk = opt(Mode::Walking, 30.0, 0);
        walk.fits = false;
        let o = [walk, opt(Mode::Bus, 10.0, 3)];
        assert_eq!(choose_mode(&o, 60.0, Weather::Sunny, Income::Medium), Mode::Bus);
        let mut pmv = opt(Mode::Pmv, 5.0, 1);
        pmv.fits = true;
        let only_pmv = [walk, pmv];
        assert_eq!(choose_mode(&only_pmv, 0.0, Weather::Rainy, Income::Medium), Mode::Pmv);
    }
}
