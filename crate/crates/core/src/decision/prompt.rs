use super::DecisionRequest;
use crate::needs::Need;
use crate::persona::{FamilyStatus, Gender, Income};
use crate::time::format_hhmm;
use std::fmt::Write;

/// Renders the multiple-choice prompt. Identical requests give identical
/// bytes.
pub fn build_prompt(req: &DecisionRequest) -> String {
    let p = &req.persona;
    let gender = match p.gender {
        Gender::Female => "female",
        Gender::Male => "male",
        Gender::Other => "non-binary",
    };
    let income = match p.income {
        Income::Medium => "medium",
        Income::High => "high",
    };
    let family = match p.family {
        FamilyStatus::LivingAlone => "living alone",
        FamilyStatus::Cohabiting => "living with others",
    };
    let mut s = String::with_capacity(1024);
    let _ = writeln!(
        s,
        "You are a {}-year-old {gender} {} ({}, {income} income, {family}).",
        p.age,
        p.job,
        p.employment.as_str()
    );
    if !p.hobbies.is_empty() {
        let _ = writeln!(s, "Hobbies: {}.", p.hobbies.join(", "));
    }
    let _ = writeln!(
        s,
        "It is {} {}. Weather: {}, {:.0}°C. You are at {}.",
        req.day,
        format_hhmm(req.time),
        req.weather,
        req.temperature,
        req.location
    );
    let needs: Vec<String> = Need::ALL
        .iter()
        .map(|n| format!("{} {:.2}", n.as_str(), req.needs[*n]))
        .collect();
    let _ = writeln!(s, "Needs (0 depleted, 1 satisfied): {}.", needs.join(", "));
    if let Some(o) = &req.next_obligation {
        let when = if o.start >= 1440.0 {
            format!("tomorrow {}", format_hhmm(o.start - 1440.0 * (o.start / 1440.0).floor()))
        } else {
            format_hhmm(o.start)
        };
        let _ = writeln!(s, "Next obligation: {} at {} from {when}.", o.label, o.venue_name);
    }
    let _ = writeln!(s, "Options:");
    for (i, c) in req.candidates.iter().enumerate() {
        let source = match c.source {
            super::CandidateSource::Needs => "need",
            super::CandidateSource::Habit => "habit",
        };
        let _ = writeln!(
            s,
            "{i}. {} at {} ({} min, cost {}, {source} score {:.1})",
            c.name, c.venue_name, c.duration, c.money, c.score
        );
        let modes: Vec<String> = c
            .options
            .iter()
            .map(|o| format!("{} {} {} min cost {}", o.mode.index(), o.mode.as_str(), o.minutes, o.money))
            .collect();
        let _ = writeln!(s, "   modes: {}", modes.join("; "));
    }
    s.push_str("Answer with two integers: the option number and the mode number.\n");
    s
}

/// Whitespace-delimited token count, the budget unit for prompts.
pub fn whitespace_tokens(text: &str) -> usize {
    text.split_whitespace().count()
}
