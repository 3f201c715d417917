//! Static agent profiles and the obligation calendar.

mod generate;

pub use generate::{
    generate_population, CategoryShare, ObligationTemplate, PopulationConfig, TraitDistribution,
    VenueRole,
};

use crate::city_map::VenueId;
use crate::needs::{Need, NeedVector, NEED_COUNT};
use crate::time::{DayMask, Weekday};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Default human-parameter traits: the Big Five followed by five behavioural
/// traits.
pub const DEFAULT_TRAITS: [&str; 10] = [
    "openness",
    "conscientiousness",
    "extraversion",
    "agreeableness",
    "neuroticism",
    "activeness",
    "thrift",
    "ambition",
    "curiosity",
    "routine",
];

/// Which trait speeds up which need's decay: factor `0.8 + 0.4·trait`.
const DECAY_TRAITS: [(Need, &str); 4] = [
    (Need::Energy, "activeness"),
    (Need::Health, "neuroticism"),
    (Need::Pleasure, "openness"),
    (Need::SocialConnection, "extraversion"),
];

/// Which trait shifts which need's importance: `+0.4·(trait − 0.5)`.
const IMPORTANCE_TRAITS: [(Need, &str); 6] = [
    (Need::Health, "conscientiousness"),
    (Need::FinancialSecurity, "thrift"),
    (Need::Pleasure, "openness"),
    (Need::SocialConnection, "extraversion"),
    (Need::StatusRecognition, "ambition"),
    (Need::SelfGrowth, "curiosity"),
];

#[derive(Debug, Error, PartialEq)]
pub enum PersonaError {
    #[error("record {id}: missing field `{field}`")]
    MissingField { id: u32, field: &'static str },
    #[error("record {id}: trait `{name}` = {value} outside [0, 1]")]
    TraitOutOfRange { id: u32, name: String, value: f64 },
    #[error("record {id}: expected {expected} traits, found {found}")]
    TraitCount { id: u32, expected: usize, found: usize },
    #[error("record {id}: employed or part-time persona without a work venue")]
    MissingWorkVenue { id: u32 },
    #[error("record {id}: calendar tasks overlap on {day}")]
    OverlappingTasks { id: u32, day: Weekday },
    #[error("record {id}: task `{label}` runs past midnight")]
    TaskPastMidnight { id: u32, label: String },
    #[error("population config: {0}")]
    Config(String),
    #[error("population size must be at least 1")]
    EmptyPopulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl AgentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gender {
    Female,
    Male,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Employment {
    Unemployed,
    Employed,
    PartTime,
}

impl Employment {
    pub const ALL: [Employment; 3] = [
        Employment::Unemployed,
        Employment::Employed,
        Employment::PartTime,
    ];

    pub fn digit(self) -> u16 {
        match self {
            Employment::Unemployed => 0,
            Employment::Employed => 1,
            Employment::PartTime => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Employment::Unemployed => "unemployed",
            Employment::Employed => "employed",
            Employment::PartTime => "part-time",
        }
    }

    pub fn has_work(self) -> bool {
        self != Employment::Unemployed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Income {
    Medium,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FinancialStatus {
    Constrained,
    Comfortable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyStatus {
    LivingAlone,
    Cohabiting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demographics {
    pub gender: Gender,
    pub age: u8,
    pub job: String,
    pub education: String,
    pub financial: FinancialStatus,
    pub family: FamilyStatus,
    pub employment: Employment,
    pub income: Income,
}

/// Three-digit demographic code: age band, employment, income.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryCode(pub u16);

impl CategoryCode {
    pub fn from_parts(age: u8, employment: Employment, income: Income) -> Self {
        let x = match age {
            0..=44 => 1,
            45..=64 => 2,
            _ => 3,
        };
        let z = match income {
            Income::Medium => 0,
            Income::High => 1,
        };
        CategoryCode(x * 100 + employment.digit() * 10 + z)
    }

    pub fn age_band(self) -> u16 {
        self.0 / 100
    }

    pub fn employment(self) -> Option<Employment> {
        match (self.0 / 10) % 10 {
            0 => Some(Employment::Unemployed),
            1 => Some(Employment::Employed),
            2 => Some(Employment::PartTime),
            _ => None,
        }
    }

    pub fn income(self) -> Option<Income> {
        match self.0 % 10 {
            0 => Some(Income::Medium),
            1 => Some(Income::High),
            _ => None,
        }
    }

    pub fn is_valid(self) -> bool {
        (1..=3).contains(&self.age_band()) && self.employment().is_some() && self.income().is_some()
    }
}

impl fmt::Display for CategoryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:03}", self.0)
    }
}

/// A fixed calendar slot that must be executed as scheduled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObligationTask {
    /// Minute of day.
    pub start: u32,
    /// Minutes.
    pub duration: u32,
    pub venue: VenueId,
    /// Mandatory catalog action performed during the slot.
    pub label: String,
    pub days: DayMask,
}

impl ObligationTask {
    pub fn end(&self) -> u32 {
        self.start + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Persona {
    pub id: AgentId,
    pub demographics: Demographics,
    pub category: CategoryCode,
    pub x_hp: Vec<f64>,
    pub hobbies: Vec<String>,
    pub importance: NeedVector,
    pub decay: NeedVector,
    pub home: VenueId,
    pub work: Option<VenueId>,
    pub calendar: Vec<ObligationTask>,
}

impl Persona {
    pub fn employment(&self) -> Employment {
        self.demographics.employment
    }

    pub fn income(&self) -> Income {
        self.demographics.income
    }

    /// Calendar tasks active on `day`, sorted by start.
    pub fn tasks_on(&self, day: Weekday) -> impl Iterator<Item = &ObligationTask> {
        self.calendar.iter().filter(move |t| t.days.contains(day))
    }
}

/// One respondent as it arrives from a survey file; every field is required.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub id: u32,
    pub gender: Option<Gender>,
    pub age: Option<u8>,
    pub job: Option<String>,
    pub education: Option<String>,
    pub financial: Option<FinancialStatus>,
    pub family: Option<FamilyStatus>,
    pub employment: Option<Employment>,
    pub income: Option<Income>,
    pub traits: Option<Vec<f64>>,
    #[serde(default)]
    pub hobbies: Vec<String>,
    pub home: Option<VenueId>,
    pub work: Option<VenueId>,
}

/// Parameters turning demographics and traits into decay and importance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PersonaParams {
    pub traits: Vec<String>,
    pub base_decay: NeedVector,
    pub base_importance: NeedVector,
    /// Social-connection decay multiplier for people living alone.
    pub living_alone_social_factor: f64,
    /// Financial-security importance multiplier for medium-income,
    /// financially constrained people.
    pub constrained_finance_factor: f64,
}

impl Default for PersonaParams {
    fn default() -> Self {
        const DAY: f64 = 1440.0;
        Self {
            traits: DEFAULT_TRAITS.iter().map(|s| s.to_string()).collect(),
            base_decay: NeedVector([
                1.0 / DAY,
                1.0 / DAY,
                1.0 / (2.0 * DAY),
                1.0 / (2.0 * DAY),
                1.0 / (2.0 * DAY),
                1.0 / (2.0 * DAY),
                1.0 / (4.0 * DAY),
                1.0 / (4.0 * DAY),
            ]),
            base_importance: NeedVector([1.0, 1.0, 0.6, 0.6, 0.5, 0.5, 0.3, 0.3]),
            living_alone_social_factor: 1.5,
            constrained_finance_factor: 1.5,
        }
    }
}

impl PersonaParams {
    fn trait_value(&self, x_hp: &[f64], name: &str) -> Option<f64> {
        self.traits.iter().position(|t| t == name).map(|i| x_hp[i])
    }

    pub fn decay_for(&self, x_hp: &[f64], family: FamilyStatus) -> NeedVector {
        let mut d = self.base_decay;
        for (need, name) in DECAY_TRAITS {
            if let Some(v) = self.trait_value(x_hp, name) {
                d[need] *= 0.8 + 0.4 * v;
            }
        }
        if family == FamilyStatus::LivingAlone {
            d[Need::SocialConnection] *= self.living_alone_social_factor;
        }
        d
    }

    pub fn importance_for(
        &self,
        x_hp: &[f64],
        income: Income,
        financial: FinancialStatus,
    ) -> NeedVector {
        let mut imp = self.base_importance;
        for (need, name) in IMPORTANCE_TRAITS {
            if let Some(v) = self.trait_value(x_hp, name) {
                imp[need] += 0.4 * (v - 0.5);
            }
        }
        if income == Income::Medium && financial == FinancialStatus::Constrained {
            imp[Need::FinancialSecurity] *= self.constrained_finance_factor;
        }
        imp
    }
}

/// Builds a persona from a survey record. The calendar is left empty; see
/// [`with_calendar`] and the population generator.
pub fn from_record(record: &SurveyRecord, params: &PersonaParams) -> Result<Persona, PersonaError> {
    let id = record.id;
    let missing = |field| PersonaError::MissingField { id, field };
    let gender = record.gender.ok_or(missing("gender"))?;
    let age = record.age.ok_or(missing("age"))?;
    let job = record.job.clone().ok_or(missing("job"))?;
    let education = record.education.clone().ok_or(missing("education"))?;
    let financial = record.financial.ok_or(missing("financial"))?;
    let family = record.family.ok_or(missing("family"))?;
    let employment = record.employment.ok_or(missing("employment"))?;
    let income = record.income.ok_or(missing("income"))?;
    let x_hp = record.traits.clone().ok_or(missing("traits"))?;
    let home = record.home.ok_or(missing("home"))?;

    if x_hp.len() != params.traits.len() {
        return Err(PersonaError::TraitCount {
            id,
            expected: params.traits.len(),
            found: x_hp.len(),
        });
    }
    for (name, &value) in params.traits.iter().zip(&x_hp) {
        if !(0.0..=1.0).contains(&value) {
            return Err(PersonaError::TraitOutOfRange {
                id,
                name: name.clone(),
                value,
            });
        }
    }
    if employment.has_work() && record.work.is_none() {
        return Err(PersonaError::MissingWorkVenue { id });
    }

    let decay = params.decay_for(&x_hp, family);
    let importance = params.importance_for(&x_hp, income, financial);
    debug_assert!(decay.0.iter().all(|d| *d >= 0.0));
    debug_assert!(importance.0.iter().all(|i| i.is_finite()));

    Ok(Persona {
        id: AgentId(id),
        category: CategoryCode::from_parts(age, employment, income),
        demographics: Demographics {
            gender,
            age,
            job,
            education,
            financial,
            family,
            employment,
            income,
        },
        x_hp,
        hobbies: record.hobbies.clone(),
        importance,
        decay,
        home,
        work: if employment.has_work() { record.work } else { None },
        calendar: Vec::new(),
    })
}

/// Installs a calendar after checking that no task crosses midnight and no
/// two tasks overlap on any weekday.
pub fn with_calendar(
    mut persona: Persona,
    mut calendar: Vec<ObligationTask>,
) -> Result<Persona, PersonaError> {
    let id = persona.id.0;
    for t in &calendar {
        if t.end() > 1440 || t.duration == 0 {
            return Err(PersonaError::TaskPastMidnight {
                id,
                label: t.label.clone(),
            });
        }
    }
    calendar.sort_by_key(|t| (t.start, t.end()));
    for day in Weekday::ALL {
        let today: Vec<&ObligationTask> = calendar.iter().filter(|t| t.days.contains(day)).collect();
        if today.windows(2).any(|w| w[1].start < w[0].end()) {
            return Err(PersonaError::OverlappingTasks { id, day });
        }
    }
    persona.calendar = calendar;
    Ok(persona)
}

const _: () = assert!(NEED_COUNT == 8);
