//! Need state and the needs-driven action score.

use crate::catalog::{ActionId, ActionSpec, Catalog};
use crate::persona::Persona;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Index, IndexMut};
use thiserror::Error;

pub const NEED_COUNT: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum NeedsError {
    #[error("time step must be non-negative, got {0}")]
    NegativeDuration(f64),
    #[error("weighted {0} vector has zero norm")]
    ZeroNorm(&'static str),
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("action catalog is empty")]
    EmptyCatalog,
    #[error("k must be at least 1")]
    ZeroK,
}

/// The eight needs, from physiological to self-actualisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Need {
    Fullness,
    Energy,
    Health,
    FinancialSecurity,
    Pleasure,
    SocialConnection,
    StatusRecognition,
    SelfGrowth,
}

impl Need {
    pub const ALL: [Need; NEED_COUNT] = [
        Need::Fullness,
        Need::Energy,
        Need::Health,
        Need::FinancialSecurity,
        Need::Pleasure,
        Need::SocialConnection,
        Need::StatusRecognition,
        Need::SelfGrowth,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Need::Fullness => "fullness",
            Need::Energy => "energy",
            Need::Health => "health",
            Need::FinancialSecurity => "financial_security",
            Need::Pleasure => "pleasure",
            Need::SocialConnection => "social_connection",
            Need::StatusRecognition => "status_recognition",
            Need::SelfGrowth => "self_growth",
        }
    }

    pub fn from_name(s: &str) -> Option<Need> {
        Need::ALL.into_iter().find(|n| n.as_str() == s)
    }
}

impl fmt::Display for Need {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Eight need components in [`Need::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NeedVector(pub [f64; NEED_COUNT]);

impl NeedVector {
    pub const ZERO: NeedVector = NeedVector([0.0; NEED_COUNT]);

    pub fn splat(v: f64) -> Self {
        Self([v; NEED_COUNT])
    }

    pub fn as_array(&self) -> &[f64; NEED_COUNT] {
        &self.0
    }

    /// `clip(C − Δt·D, 0, 1)` componentwise.
    pub fn decay(&self, dt: f64, rates: &NeedVector) -> Result<Self, NeedsError> {
        if dt < 0.0 || dt.is_nan() {
            return Err(NeedsError::NegativeDuration(dt));
        }
        Ok(Self(std::array::from_fn(|i| {
            (self.0[i] - dt * rates.0[i]).clamp(0.0, 1.0)
        })))
    }

    /// `clip(C + A, 0, 1)` componentwise.
    pub fn apply_effect(&self, effect: &NeedVector) -> Self {
        Self(std::array::from_fn(|i| (self.0[i] + effect.0[i]).clamp(0.0, 1.0)))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.map(|v| v * factor))
    }

    pub fn in_unit_range(&self) -> bool {
        self.0.iter().all(|v| (0.0..=1.0).contains(v))
    }
}

impl Index<Need> for NeedVector {
    type Output = f64;

    fn index(&self, n: Need) -> &f64 {
        &self.0[n.index()]
    }
}

impl IndexMut<Need> for NeedVector {
    fn index_mut(&mut self, n: Need) -> &mut f64 {
        &mut self.0[n.index()]
    }
}

pub fn softmax(x: &[f64; NEED_COUNT]) -> [f64; NEED_COUNT] {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = x.map(|v| (v - max).exp());
    let sum: f64 = e.iter().sum();
    e.map(|v| v / sum)
}

/// `½(1 + cos_w(x_hp, x_act))`, the persona/action affinity.
pub fn score_hp(x_hp: &[f64], x_act: &[f64], w: &[f64]) -> Result<f64, NeedsError> {
    if x_hp.len() != x_act.len() {
        return Err(NeedsError::LengthMismatch(x_hp.len(), x_act.len()));
    }
    if w.len() != x_hp.len() {
        return Err(NeedsError::LengthMismatch(w.len(), x_hp.len()));
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for ((&a, &b), &wi) in x_hp.iter().zip(x_act).zip(w) {
        let (a, b) = (wi * a, wi * b);
        dot += a * b;
        na += a * a;
        nb += b * b;
    }
    if na == 0.0 {
        return Err(NeedsError::ZeroNorm("persona"));
    }
    if nb == 0.0 {
        return Err(NeedsError::ZeroNorm("action"));
    }
    let cos = (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0);
    Ok(0.5 * (1.0 + cos))
}

/// `Σ softmax(I)·(1 − C)·tanh(k·ReLU(A))` over the eight needs.
pub fn score_importance(
    importance: &NeedVector,
    current: &NeedVector,
    effect: &NeedVector,
    k_tanh: f64,
) -> f64 {
    debug_assert!(k_tanh > 0.0);
    let p = softmax(&importance.0);
    (0..NEED_COUNT)
        .map(|i| p[i] * (1.0 - current.0[i]) * (k_tanh * effect.0[i].max(0.0)).tanh())
        .sum()
}

/// Scoring parameters shared by every agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeedsParams {
    pub k_tanh: f64,
}

impl Default for NeedsParams {
    fn default() -> Self {
        Self { k_tanh: 3.0 }
    }
}

/// `N = N_hp · N_imp` for one action.
pub fn needs_score(
    persona: &Persona,
    current: &NeedVector,
    action: &ActionSpec,
    weights: &[f64],
    params: &NeedsParams,
) -> Result<f64, NeedsError> {
    let hp = score_hp(&persona.x_hp, &action.features, weights)?;
    let imp = score_importance(&persona.importance, current, &action.effect, params.k_tanh);
    Ok(hp * imp)
}

/// The `k` voluntary actions with the highest needs score, best first; ties
/// go to the lower action id.
pub fn top_k_needs(
    persona: &Persona,
    current: &NeedVector,
    catalog: &Catalog,
    k: usize,
    params: &NeedsParams,
) -> Result<Vec<(ActionId, f64)>, NeedsError> {
    if k == 0 {
        return Err(NeedsError::ZeroK);
    }
    let mut scored = Vec::with_capacity(catalog.len());
    for a in catalog.voluntary() {
        let s = needs_score(persona, current, a, catalog.weights_for(a), params)?;
        scored.push((a.id, s));
    }
    if scored.is_empty() {
        return Err(NeedsError::EmptyCatalog);
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decay_examples() {
        let c = NeedVector::splat(0.5);
        assert_eq!(c.decay(100.0, &NeedVector::ZERO).unwrap(), c);
        let mut d = NeedVector::ZERO;
        d.0[2] = 0.01;
        assert_eq!(c.decay(60.0, &d).unwrap().0[2], 0.0);
        let full = NeedVector::splat(1.0);
        let day = full.decay(1440.0, &NeedVector::splat(1.0 / 1440.0)).unwrap();
        assert!(day.0.iter().all(|v| v.abs() < 1e-12));
        assert!(matches!(c.decay(-1.0, &d), Err(NeedsError::NegativeDuration(_))));
    }

    #[test]
    fn effect_examples() {
        let mut c = NeedVector::splat(0.2);
        c.0[0] = 0.9;
        assert_eq!(c.apply_effect(&NeedVector::ZERO), c);
        let mut a = NeedVector::ZERO;
        a.0[0] = 0.5;
        a.0[1] = -0.3;
        let r = c.apply_effect(&a);
        assert_eq!(r.0[0], 1.0);
        assert_eq!(r.0[1], 0.0);
    }

    #[test]
    fn hp_examples() {
        let x = [0.2, 0.7, 0.4];
        let w = [1.0; 3];
        assert!((score_hp(&x, &x, &w).unwrap() - 1.0).abs() < 1e-12);
        assert!((score_hp(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &w).unwrap() - 0.5).abs() < 1e-12);
        let neg = x.map(|v| -v);
        assert!(score_hp(&x, &neg, &w).unwrap().abs() < 1e-12);
        assert_eq!(
            score_hp(&[0.0; 3], &x, &w),
            Err(NeedsError::ZeroNorm("persona"))
        );
        assert_eq!(
            score_hp(&x, &[1.0, 1.0, 1.0], &[0.0; 3]),
            Err(NeedsError::ZeroNorm("persona"))
        );
    }

    #[test]
    fn importance_examples() {
        let i = NeedVector::splat(0.3);
        let mut a = NeedVector::ZERO;
        a.0[4] = 0.5;
        assert_eq!(score_importance(&i, &NeedVector::splat(1.0), &a, 3.0), 0.0);
        assert_eq!(
            score_importance(&i, &NeedVector::ZERO, &NeedVector::splat(-0.4), 3.0),
            0.0
        );
        a.0[4] = 1e6;
        let s = score_importance(&i, &NeedVector::ZERO, &a, 3.0);
        assert!((s - 0.125).abs() < 1e-12);
    }

    #[test]
    fn softmax_shift_invariance() {
        let x = [0.1, 2.0, -1.0, 0.3, 0.3, 0.9, 1.5, 0.0];
        let p = softmax(&x);
        let q = softmax(&x.map(|v| v + 7.5));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (a, b) in p.iter().zip(q) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
