//! Time-of-day habits: a circular Gaussian around the usual execution time,
//! scaled by a forgetting curve.

use crate::catalog::ActionId;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Narrowest and widest admissible half-width (30 min and 3 h of a day).
pub const MIN_HALFWIDTH: f64 = PI / 48.0;
pub const MAX_HALFWIDTH: f64 = PI / 8.0;

/// `√k·a` at which the Gaussian holds 90% of its mass inside `±a`.
const COVERAGE_ROOT: f64 = 1.163;
/// Amplitude constant keeping the area under the peak equal to `S`.
const AREA_CONSTANT: f64 = 0.627;

#[derive(Debug, Error, PartialEq)]
pub enum HabitError {
    #[error("half-width must be positive, got {0}")]
    NonPositiveHalfWidth(f64),
    #[error("half-width {0} outside [π/48, π/8]")]
    HalfWidthOutOfRange(f64),
    #[error("amplitude inputs must be positive (k = {k}, S = {s})")]
    NonPositiveAmplitudeInput { k: f64, s: f64 },
    #[error("clock {now} is earlier than the last reinforcement at {last}")]
    ClockBehind { now: f64, last: f64 },
    #[error("prune threshold must be positive, got {0}")]
    NonPositiveThreshold(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HabitRecord {
    pub action: ActionId,
    /// Minute of day of the last execution midpoint.
    pub t_m: f64,
    /// Absolute minute (across days) of the last reinforcement.
    pub last_reinforced: f64,
    /// Angular half-width in radians.
    pub a_h: f64,
    /// Habit mass.
    pub s: f64,
    /// Forgetting rate per minute.
    pub r_h: f64,
    /// Peak amplitude when the record was created; the relative prune
    /// threshold is measured against it.
    pub initial_amplitude: f64,
}

impl HabitRecord {
    pub fn k(&self) -> f64 {
        (COVERAGE_ROOT / self.a_h).powi(2)
    }

    pub fn amplitude(&self) -> f64 {
        AREA_CONSTANT * self.s * self.k().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HabitParams {
    /// Mass added per unit of feedback.
    pub eta: f64,
    pub r_h: f64,
    /// Records whose peak falls below this fraction of their initial
    /// amplitude are dropped.
    pub prune_fraction: f64,
}

impl Default for HabitParams {
    fn default() -> Self {
        Self {
            eta: 1.0,
            r_h: 1.0 / 4320.0,
            prune_fraction: 0.01,
        }
    }
}

/// Signed circular distance from `t_m` to `t` in radians, in `(−π, π]`.
pub fn delta_theta(t: f64, t_m: f64) -> f64 {
    let x = (t - t_m).rem_euclid(1440.0);
    let angle = 2.0 * PI * x / 1440.0;
    if angle > PI {
        angle - 2.0 * PI
    } else {
        angle
    }
}

pub fn k_from_halfwidth(a_h: f64) -> Result<f64, HabitError> {
    if a_h.is_nan() || a_h <= 0.0 {
        return Err(HabitError::NonPositiveHalfWidth(a_h));
    }
    Ok((COVERAGE_ROOT / a_h).powi(2))
}

pub fn amplitude(k: f64, s: f64) -> Result<f64, HabitError> {
    if !(k > 0.0 && s > 0.0) {
        return Err(HabitError::NonPositiveAmplitudeInput { k, s });
    }
    Ok(AREA_CONSTANT * s * k.sqrt())
}

/// Padé [2/2] approximation of `e^{−u}`.
pub fn pade_exp(u: f64) -> f64 {
    let q = u * u / 12.0;
    (1.0 - u / 2.0 + q) / (1.0 + u / 2.0 + q)
}

/// Half-width matching an execution of `duration` minutes.
pub fn halfwidth_for_duration(duration: f64) -> f64 {
    (PI * duration / 1440.0).clamp(MIN_HALFWIDTH, MAX_HALFWIDTH)
}

/// `H = R·A·exp(−k·Δθ²)` at absolute minute `now`.
pub fn habit_intensity(record: &HabitRecord, now: f64) -> Result<f64, HabitError> {
    let elapsed = now - record.last_reinforced;
    if elapsed < 0.0 {
        return Err(HabitError::ClockBehind {
            now,
            last: record.last_reinforced,
        });
    }
    let k = record.k();
    let dtheta = delta_theta(now.rem_euclid(1440.0), record.t_m);
    let u = k * dtheta * dtheta;
    let shape = if dtheta.abs() <= record.a_h {
        pade_exp(u)
    } else {
        (-u).exp()
    };
    let retention = (-record.r_h * elapsed).exp();
    Ok(retention * record.amplitude() * shape)
}

/// Peak intensity (at `t_m`) after forgetting up to `now`.
pub fn peak_intensity(record: &HabitRecord, now: f64) -> f64 {
    (-record.r_h * (now - record.last_reinforced).max(0.0)).exp() * record.amplitude()
}

/// Strengthens or creates the habit for `action`.
///
/// `exec_midpoint` is the absolute minute of the execution midpoint. New
/// records start with `S = η·feedback`; a zero-feedback first execution
/// creates nothing.
pub fn reinforce(
    records: &mut Vec<HabitRecord>,
    action: ActionId,
    exec_midpoint: f64,
    exec_halfwidth: f64,
    feedback: f64,
    params: &HabitParams,
) -> Result<(), HabitError> {
    if !(MIN_HALFWIDTH - 1e-12..=MAX_HALFWIDTH + 1e-12).contains(&exec_halfwidth) {
        return Err(HabitError::HalfWidthOutOfRange(exec_halfwidth));
    }
    let feedback = feedback.clamp(0.0, 1.0);
    let t_m = exec_midpoint.rem_euclid(1440.0);
    if let Some(r) = records.iter_mut().find(|r| r.action == action) {
        r.t_m = t_m;
        r.last_reinforced = r.last_reinforced.max(exec_midpoint);
        r.a_h = exec_halfwidth;
        r.s += params.eta * feedback;
        return Ok(());
    }
    let s = params.eta * feedback;
    if s <= 0.0 {
        return Ok(());
    }
    let mut record = HabitRecord {
        action,
        t_m,
        last_reinforced: exec_midpoint,
        a_h: exec_halfwidth,
        s,
        r_h: params.r_h,
        initial_amplitude: 0.0,
    };
    record.initial_amplitude = record.amplitude();
    records.push(record);
    Ok(())
}

/// Drops records whose forgetting-weighted peak is below `epsilon`.
pub fn prune(records: &mut Vec<HabitRecord>, now: f64, epsilon: f64) -> Result<(), HabitError> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(HabitError::NonPositiveThreshold(epsilon));
    }
    records.retain(|r| peak_intensity(r, now) >= epsilon);
    Ok(())
}

/// Drops records whose peak is below `fraction` of their initial amplitude.
pub fn prune_relative(records: &mut Vec<HabitRecord>, now: f64, fraction: f64) -> Result<(), HabitError> {
    if fraction.is_nan() || fraction <= 0.0 {
        return Err(HabitError::NonPositiveThreshold(fraction));
    }
    records.retain(|r| peak_intensity(r, now) >= fraction * r.initial_amplitude);
    Ok(())
}

/// The `k` strongest habits at `now`, best first; ties go to the lower
/// action id. Zero-intensity habits are skipped.
pub fn top_k_habits(records: &[HabitRecord], now: f64, k: usize) -> Vec<(ActionId, f64)> {
    let mut scored: Vec<(ActionId, f64)> = records
        .iter()
        .filter_map(|r| habit_intensity(r, now).ok().map(|h| (r.action, h)))
        .filter(|(_, h)| *h > 0.0)
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}
