//! Synthetic population generator.

use super::{
    from_record, with_calendar, CategoryCode, Employment, FamilyStatus, FinancialStatus, Gender,
    Income, ObligationTask, Persona, PersonaError, PersonaParams, SurveyRecord,
};
use crate::city_map::{CityMap, VenueCategory, VenueId};
use crate::time::{DayMask, Weekday};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

const DEFAULT_CONFIG: &str = include_str!("../../data/population.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryShare {
    pub code: u16,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraitDistribution {
    pub name: String,
    pub mean: f64,
    pub stddev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VenueRole {
    Home,
    Work,
}

/// Calendar slot handed to every persona whose employment is listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObligationTemplate {
    pub label: String,
    pub venue: VenueRole,
    /// `[start, end)` minute ranges.
    pub intervals: Vec<[u32; 2]>,
    pub days: Vec<Weekday>,
    pub employment: Vec<Employment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationConfig {
    #[serde(default)]
    pub params: PersonaParams,
    pub categories: Vec<CategoryShare>,
    #[serde(default)]
    pub traits: Vec<TraitDistribution>,
    #[serde(default)]
    pub hobbies: Vec<String>,
    #[serde(default)]
    pub hobbies_per_agent: usize,
    pub living_alone_share: f64,
    /// Share of medium-income people who are financially constrained.
    pub constrained_share: f64,
    pub employed_jobs: Vec<String>,
    pub part_time_jobs: Vec<String>,
    pub educations: Vec<String>,
    pub obligations: Vec<ObligationTemplate>,
}

impl PopulationConfig {
    pub fn from_toml(text: &str) -> Result<Self, PersonaError> {
        toml::from_str(text).map_err(|e| PersonaError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("population configs always serialize")
    }

    /// The bundled configuration.
    pub fn default_config() -> Self {
        Self::from_toml(DEFAULT_CONFIG).expect("bundled population config is valid")
    }

    /// Same as the default but with all nine category codes equally likely.
    pub fn uniform() -> Self {
        let mut c = Self::default_config();
        let k = c.categories.len() as f64;
        for cat in &mut c.categories {
            cat.share = 1.0 / k;
        }
        c
    }

    pub fn validate(&self) -> Result<(), PersonaError> {
        let err = |m: String| Err(PersonaError::Config(m));
        if self.categories.is_empty() {
            return err("no categories".into());
        }
        let total: f64 = self.categories.iter().map(|c| c.share).sum();
        if (total - 1.0).abs() > 1e-9 {
            return err(format!("category shares sum to {total}, expected 1"));
        }
        for c in &self.categories {
            if !CategoryCode(c.code).is_valid() {
                return err(format!("invalid category code {:03}", c.code));
            }
            if c.share.is_nan() || c.share < 0.0 {
                return err(format!("negative share for {:03}", c.code));
            }
        }
        for t in &self.traits {
            if !self.params.traits.contains(&t.name) {
                return err(format!("distribution for unknown trait `{}`", t.name));
            }
            if t.stddev.is_nan() || t.stddev < 0.0 || !t.mean.is_finite() {
                return err(format!("bad distribution for trait `{}`", t.name));
            }
        }
        for (name, p) in [
            ("living_alone_share", self.living_alone_share),
            ("constrained_share", self.constrained_share),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return err(format!("{name} must be within [0, 1]"));
            }
        }
        if self.employed_jobs.is_empty() || self.part_time_jobs.is_empty() || self.educations.is_empty() {
            return err("job and education lists must be non-empty".into());
        }
        if self.hobbies_per_agent > self.hobbies.len() {
            return err("hobbies_per_agent exceeds the hobby list".into());
        }
        if !self.obligations.iter().any(|o| o.label == "sleep") {
            return err("templates must include a `sleep` obligation".into());
        }
        Ok(())
    }
}

/// Largest-remainder apportionment of `n` over `shares`; ties in the
/// fractional parts go to the earlier entry.
fn apportion(n: usize, shares: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = shares.iter().map(|s| s * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

fn truncated_normal(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> f64 {
    if sd == 0.0 {
        return mean.clamp(0.0, 1.0);
    }
    let normal = Normal::new(mean, sd).expect("validated stddev");
    for _ in 0..64 {
        let v = normal.sample(rng);
        if (0.0..=1.0).contains(&v) {
            return v;
        }
    }
    mean.clamp(0.0, 1.0)
}

/// Generates `n` personas for `map`. Deterministic in `(n, seed, config)`.
pub fn generate_population(
    n: usize,
    seed: u64,
    config: &PopulationConfig,
    map: &CityMap,
) -> Result<Vec<Persona>, PersonaError> {
    if n == 0 {
        return Err(PersonaError::EmptyPopulation);
    }
    config.validate()?;
    let homes: Vec<VenueId> = map.venues_of(VenueCategory::ResidentialRoom).map(|v| v.id).collect();
    let offices: Vec<VenueId> = map.venues_of(VenueCategory::Office).map(|v| v.id).collect();
    if homes.is_empty() {
        return Err(PersonaError::Config("map has no residential rooms".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shares: Vec<f64> = config.categories.iter().map(|c| c.share).collect();
    let mut codes: Vec<CategoryCode> = Vec::with_capacity(n);
    for (cat, count) in config.categories.iter().zip(apportion(n, &shares)) {
        codes.extend(std::iter::repeat_n(CategoryCode(cat.code), count));
    }
    codes.shuffle(&mut rng);

    let trait_dists: Vec<(f64, f64)> = config
        .params
        .traits
        .iter()
        .map(|name| {
            config
                .traits
                .iter()
                .find(|t| &t.name == name)
                .map_or((0.5, 0.15), |t| (t.mean, t.stddev))
        })
        .collect();

    let mut out = Vec::with_capacity(n);
    for (i, code) in codes.into_iter().enumerate() {
        let employment = code.employment().expect("validated code");
        let income = code.income().expect("validated code");
        if employment.has_work() && offices.is_empty() {
            return Err(PersonaError::Config("map has no offices for workers".into()));
        }
        let age: u8 = match code.age_band() {
            1 => rng.random_range(25..=44),
            2 => rng.random_range(45..=64),
            _ => rng.random_range(65..=84),
        };
        let gender = match rng.random_range(0..100) {
            0..49 => Gender::Female,
            49..98 => Gender::Male,
            _ => Gender::Other,
        };
        let job = match employment {
            Employment::Employed => config.employed_jobs.choose(&mut rng).cloned(),
            Employment::PartTime => config.part_time_jobs.choose(&mut rng).cloned(),
            Employment::Unemployed if age >= 65 => Some("retired".to_string()),
            Employment::Unemployed => Some("none".to_string()),
        };
        let education = config.educations.choose(&mut rng).cloned();
        let financial = match income {
            Income::High => FinancialStatus::Comfortable,
            Income::Medium if rng.random_bool(config.constrained_share) => FinancialStatus::Constrained,
            Income::Medium => FinancialStatus::Comfortable,
        };
        let family = if rng.random_bool(config.living_alone_share) {
            FamilyStatus::LivingAlone
        } else {
            FamilyStatus::Cohabiting
        };
        let traits: Vec<f64> = trait_dists
            .iter()
            .map(|&(m, s)| truncated_normal(&mut rng, m, s))
            .collect();
        let hobbies: Vec<String> = config
            .hobbies
            .choose_multiple(&mut rng, config.hobbies_per_agent)
            .cloned()
            .collect();
        let home = *homes.choose(&mut rng).expect("non-empty");
        let work = if employment.has_work() {
            offices.choose(&mut rng).copied()
        } else {
            None
        };

        let record = SurveyRecord {
            id: i as u32,
            gender: Some(gender),
            age: Some(age),
            job,
            education,
            financial: Some(financial),
            family: Some(family),
            employment: Some(employment),
            income: Some(income),
            traits: Some(traits),
            hobbies,
            home: Some(home),
            work,
        };
        let persona = from_record(&record, &config.params)?;
        let calendar = calendar_for(&persona, &config.obligations);
        out.push(with_calendar(persona, calendar)?);
    }
    Ok(out)
}

fn calendar_for(persona: &Persona, templates: &[ObligationTemplate]) -> Vec<ObligationTask> {
    let mut out = Vec::new();
    for t in templates {
        if !t.employment.contains(&persona.employment()) {
            continue;
        }
        let venue = match t.venue {
            VenueRole::Home => persona.home,
            VenueRole::Work => match persona.work {
                Some(w) => w,
                None => continue,
            },
        };
        let days = DayMask(t.days.iter().fold(0, |m, d| m | d.bit()));
        for &[s, e] in &t.intervals {
            out.push(ObligationTask {
                start: s,
                duration: e.saturating_sub(s),
                venue,
                label: t.label.clone(),
                days,
            });
        }
    }
    out
}
