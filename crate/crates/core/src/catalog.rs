//! Action catalog: the activities agents can perform.

use crate::city_map::VenueCategory;
use crate::needs::{Need, NeedVector};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

const DEFAULT_CATALOG: &str = include_str!("../data/actions.toml");

/// Minimum and maximum duration of a voluntary action, in minutes.
pub const VOLUNTARY_DURATION: (u32, u32) = (30, 180);

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("malformed action catalog: {0}")]
    Malformed(String),
    #[error("duplicate action `{0}`")]
    Duplicate(String),
    #[error("action `{action}`: {reason}")]
    Invalid { action: String, reason: String },
    #[error("catalog lacks the mandatory action `{0}`")]
    MissingMandatory(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionId(pub u32);

impl ActionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Coarse activity class used by the analytics tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivityClass {
    Work,
    Meals,
    Exercise,
    Leisure,
    Errands,
    Rest,
    Travel,
}

impl ActivityClass {
    pub const ALL: [ActivityClass; 7] = [
        ActivityClass::Work,
        ActivityClass::Meals,
        ActivityClass::Exercise,
        ActivityClass::Leisure,
        ActivityClass::Errands,
        ActivityClass::Rest,
        ActivityClass::Travel,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActivityClass::Work => "work",
            ActivityClass::Meals => "meals",
            ActivityClass::Exercise => "exercise",
            ActivityClass::Leisure => "leisure",
            ActivityClass::Errands => "errands",
            ActivityClass::Rest => "rest",
            ActivityClass::Travel => "travel",
        }
    }
}

impl FromStr for ActivityClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActivityClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown activity class `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionSpec {
    pub id: ActionId,
    pub name: String,
    pub category: VenueCategory,
    pub class: ActivityClass,
    /// Minutes. For mandatory actions this is the nominal duration the
    /// effect is calibrated to.
    pub duration: u32,
    /// Half-open `[start, end)` minute-of-day intervals; empty means any time.
    pub windows: Vec<[u32; 2]>,
    pub effect: NeedVector,
    pub features: Vec<f64>,
    pub money: u32,
    pub mandatory: bool,
}

impl ActionSpec {
    /// Whether minute-of-day `t` falls in one of the semantic windows.
    pub fn in_window(&self, t: f64) -> bool {
        self.windows.is_empty()
            || self
                .windows
                .iter()
                .any(|&[s, e]| t >= f64::from(s) && t < f64::from(e))
    }

    /// Mean positive need gain, clipped to [0, 1].
    pub fn feedback(&self) -> f64 {
        positive_gain(&NeedVector::ZERO, &self.effect)
    }
}

/// Mean of the positive components of `after − before`, or 0 if none.
pub fn positive_gain(before: &NeedVector, after: &NeedVector) -> f64 {
    let gains: Vec<f64> = before
        .0
        .iter()
        .zip(after.0)
        .map(|(b, a)| a - b)
        .filter(|g| *g > 0.0)
        .collect();
    if gains.is_empty() {
        0.0
    } else {
        (gains.iter().sum::<f64>() / gains.len() as f64).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogDoc {
    #[serde(default)]
    weights: BTreeMap<String, BTreeMap<String, f64>>,
    actions: Vec<ActionDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionDoc {
    name: String,
    category: String,
    class: String,
    duration: u32,
    #[serde(default)]
    windows: Vec<[u32; 2]>,
    #[serde(default)]
    effect: BTreeMap<String, f64>,
    #[serde(default)]
    features: BTreeMap<String, f64>,
    #[serde(default)]
    money: u32,
    #[serde(default)]
    mandatory: bool,
}

#[derive(Debug, Clone)]
pub struct Catalog {
    actions: Vec<ActionSpec>,
    default_weights: Vec<f64>,
    weights: BTreeMap<VenueCategory, Vec<f64>>,
    sleep: ActionId,
    work: ActionId,
}

impl Catalog {
    /// Parses a catalog. Feature and weight tables are keyed by trait name;
    /// features default to 0.5 and weights to 1.
    pub fn from_toml(text: &str, traits: &[String]) -> Result<Self, CatalogError> {
        let doc: CatalogDoc =
            toml::from_str(text).map_err(|e| CatalogError::Malformed(e.to_string()))?;
        let trait_index = |action: &str, name: &str| {
            traits
                .iter()
                .position(|t| t == name)
                .ok_or_else(|| CatalogError::Invalid {
                    action: action.to_string(),
                    reason: format!("unknown trait `{name}`"),
                })
        };

        let mut actions = Vec::with_capacity(doc.actions.len());
        let mut names = BTreeMap::new();
        for (i, a) in doc.actions.into_iter().enumerate() {
            let invalid = |reason: String| CatalogError::Invalid {
                action: a.name.clone(),
                reason,
            };
            if names.insert(a.name.clone(), i).is_some() {
                return Err(CatalogError::Duplicate(a.name));
            }
            let category = VenueCategory::from_str(&a.category).map_err(invalid)?;
            let class = ActivityClass::from_str(&a.class).map_err(invalid)?;
            if !a.mandatory
                && !(VOLUNTARY_DURATION.0..=VOLUNTARY_DURATION.1).contains(&a.duration)
            {
                return Err(invalid(format!(
                    "duration {} outside [{}, {}]",
                    a.duration, VOLUNTARY_DURATION.0, VOLUNTARY_DURATION.1
                )));
            }
            if a.duration == 0 || a.duration > 1440 {
                return Err(invalid(format!("duration {} out of range", a.duration)));
            }
            for &[s, e] in &a.windows {
                if s >= e || e > 1440 {
                    return Err(invalid(format!("window [{s}, {e}) is invalid")));
                }
            }
            let mut effect = NeedVector::ZERO;
            for (k, v) in &a.effect {
                let need = Need::from_name(k).ok_or_else(|| invalid(format!("unknown need `{k}`")))?;
                if !v.is_finite() {
                    return Err(invalid(format!("effect on `{k}` is not finite")));
                }
                effect[need] = *v;
            }
            let mut features = vec![0.5; traits.len()];
            for (k, v) in &a.features {
                if !(0.0..=1.0).contains(v) {
                    return Err(invalid(format!("feature `{k}` = {v} outside [0, 1]")));
                }
                features[trait_index(&a.name, k)?] = *v;
            }
            actions.push(ActionSpec {
                id: ActionId(i as u32),
                name: a.name,
                category,
                class,
                duration: a.duration,
                windows: a.windows,
                effect,
                features,
                money: a.money,
                mandatory: a.mandatory,
            });
        }

        let mut weights = BTreeMap::new();
        for (cat, table) in doc.weights {
            let category = VenueCategory::from_str(&cat).map_err(CatalogError::Malformed)?;
            let mut w = vec![1.0; traits.len()];
            for (k, v) in table {
                if v < 0.0 {
                    return Err(CatalogError::Malformed(format!("negative weight for `{k}`")));
                }
                w[trait_index(&cat, &k)?] = v;
            }
            weights.insert(category, w);
        }

        let find = |name: &'static str| {
            actions
                .iter()
                .find(|a| a.name == name && a.mandatory)
                .map(|a| a.id)
                .ok_or(CatalogError::MissingMandatory(name))
        };
        let sleep = find("sleep")?;
        let work = find("work")?;
        Ok(Self {
            default_weights: vec![1.0; traits.len()],
            actions,
            weights,
            sleep,
            work,
        })
    }

    /// The bundled catalog for the default trait list.
    pub fn default_catalog() -> Self {
        let traits: Vec<String> = crate::persona::DEFAULT_TRAITS
            .iter()
            .map(|s| s.to_string())
            .collect();
        Self::from_toml(DEFAULT_CATALOG, &traits).expect("bundled catalog is valid")
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, id: ActionId) -> &ActionSpec {
        &self.actions[id.index()]
    }

    pub fn by_name(&self, name: &str) -> Option<&ActionSpec> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn actions(&self) -> &[ActionSpec] {
        &self.actions
    }

    pub fn voluntary(&self) -> impl Iterator<Item = &ActionSpec> {
        self.actions.iter().filter(|a| !a.mandatory)
    }

    pub fn sleep(&self) -> ActionId {
        self.sleep
    }

    pub fn work(&self) -> ActionId {
        self.work
    }

    /// Cosine weights for an action's venue category.
    pub fn weights_for(&self, action: &ActionSpec) -> &[f64] {
        self.weights
            .get(&action.category)
            .unwrap_or(&self.default_weights)
    }

    /// Catalog restricted to a subset of actions (mandatory ones are always
    /// kept); ids are reassigned in order.
    pub fn subset(&self, keep: impl Fn(&ActionSpec) -> bool) -> Self {
        let mut out = self.clone();
        out.actions = self
            .actions
            .iter()
            .filter(|a| a.mandatory || keep(a))
            .cloned()
            .enumerate()
            .map(|(i, mut a)| {
                a.id = ActionId(i as u32);
                a
            })
            .collect();
        out.sleep = out.by_name("sleep").map(|a| a.id).expect("sleep kept");
        out.work = out.by_name("work").map(|a| a.id).expect("work kept");
        out
    }
}
