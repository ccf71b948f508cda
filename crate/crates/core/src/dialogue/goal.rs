use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::lexicon::{self, find_phrase, has_any, singular, tokenize};
use super::suggest::SuggestionState;
use crate::gateway::{FieldKind, FieldSpec, GatewayError, GatewayRequest, LanguageModel, Purpose};
use crate::navsim::Directional;
use crate::worldmap::{AnnotatedMap, ExhibitId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NavGoal {
    SpecificExhibit(ExhibitId),
    Next,
    ShowAround,
    Directional(Directional),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GoalError {
    #[error("several exhibits match: {0:?}")]
    AmbiguousGoal(Vec<ExhibitId>),
    #[error("there is no exhibit {0} on this map")]
    UnknownExhibit(u64),
    #[error("no directional command found")]
    NoDirection,
    #[error("goal extraction failed: {0}")]
    Backend(#[from] GatewayError),
}

/// Extracts the navigation goal of a control utterance.
///
/// `low_level` selects the directional route. Name matching is
/// case-insensitive and whole-word; a full exhibit name beats a partial one,
/// and a name shared by several exhibits is an error, never a guess.
pub fn extract_goal(
    utterance: &str,
    low_level: bool,
    map: &AnnotatedMap,
    suggestion: &SuggestionState,
    llm: Option<&dyn LanguageModel>,
) -> Result<NavGoal, GoalError> {
    let tokens = tokenize(utterance);
    if low_level {
        return lexicon::directional(&tokens)
            .map(NavGoal::Directional)
            .ok_or(GoalError::NoDirection);
    }
    match llm {
        Some(llm) => extract_with_llm(utterance, map, llm),
        None => extract_with_rules(&tokens, map, suggestion),
    }
}

fn resolve_number(map: &AnnotatedMap, n: u64) -> Result<NavGoal, GoalError> {
    match ExhibitId::try_from(n).ok().and_then(|id| map.exhibit(id)) {
        Some(e) => Ok(NavGoal::SpecificExhibit(e.id)),
        None => Err(GoalError::UnknownExhibit(n)),
    }
}

fn extract_with_rules(
    tokens: &[String],
    map: &AnnotatedMap,
    suggestion: &SuggestionState,
) -> Result<NavGoal, GoalError> {
    if let Some(&n) = lexicon::numbers(tokens).first() {
        return resolve_number(map, n);
    }

    // Full exhibit names; drop matches contained in a longer match.
    let full: Vec<(usize, usize, ExhibitId)> = map
        .exhibits()
        .iter()
        .filter_map(|e| {
            let phrase = tokenize(&e.name).join(" ");
            find_phrase(tokens, &phrase).map(|pos| (pos, phrase.split(' ').count(), e.id))
        })
        .collect();
    let maximal: Vec<ExhibitId> = full
        .iter()
        .filter(|&&(p, l, _)| {
            !full
                .iter()
                .any(|&(q, m, _)| m > l && q <= p && p + l <= q + m)
        })
        .map(|&(_, _, id)| id)
        .collect();
    match maximal.len() {
        0 => {}
        1 => return Ok(NavGoal::SpecificExhibit(maximal[0])),
        _ => return Err(GoalError::AmbiguousGoal(sorted(maximal))),
    }

    if has_any(tokens, lexicon::NEXT_WORDS) {
        return Ok(NavGoal::Next);
    }
    if has_any(tokens, lexicon::AROUND_PHRASES) {
        return Ok(NavGoal::ShowAround);
    }

    // Area names resolve to the area's first exhibit still to be seen.
    for area in map.areas() {
        let phrase = tokenize(&area.name).join(" ");
        if !phrase.is_empty() && lexicon::has_phrase(tokens, &phrase) {
            if let Some(id) = first_in_area(map, &area.id, suggestion) {
                return Ok(NavGoal::SpecificExhibit(id));
            }
        }
    }

    // Distinctive words from exhibit names.
    let partial: Vec<ExhibitId> = map
        .exhibits()
        .iter()
        .filter(|e| {
            tokenize(&e.name).iter().any(|w| {
                w.len() >= 4
                    && !lexicon::STOPWORDS.contains(&w.as_str())
                    && tokens.iter().any(|t| singular(t) == singular(w))
            })
        })
        .map(|e| e.id)
        .collect();
    match partial.len() {
        0 => {}
        1 => return Ok(NavGoal::SpecificExhibit(partial[0])),
        _ => return Err(GoalError::AmbiguousGoal(sorted(partial))),
    }

    // A bare "let's go" or "take me somewhere" defers to the tour order.
    Ok(NavGoal::ShowAround)
}

fn sorted(mut ids: Vec<ExhibitId>) -> Vec<ExhibitId> {
    ids.sort_unstable();
    ids
}

fn first_in_area(map: &AnnotatedMap, area: &str, s: &SuggestionState) -> Option<ExhibitId> {
    let in_area = |id: &&ExhibitId| map.exhibit(**id).is_some_and(|e| e.area_id == area);
    map.tour_order()
        .iter()
        .filter(in_area)
        .find(|id| !s.is_visited(**id))
        .or_else(|| map.tour_order().iter().find(in_area))
        .or_else(|| map.exhibits().iter().find(|e| e.area_id == area).map(|e| &e.id))
        .copied()
}

const EXTRACT_PROMPT: &str = "A museum visitor asked a guide robot to move. Decide where to go. \
Set goal to \"exhibit\" when a specific exhibit is named or numbered, \"next\" for the next stop \
on the tour, or \"around\" for an open-ended request to be shown around. Set exhibit_number to \
the exhibit number when goal is \"exhibit\", otherwise 0.";

fn extract_with_llm(utterance: &str, map: &AnnotatedMap, llm: &dyn LanguageModel) -> Result<NavGoal, GoalError> {
    let mut system = String::from(EXTRACT_PROMPT);
    system.push_str("\nExhibits:");
    for e in map.exhibits() {
        system.push_str(&alloc::format!("\n{}: {}", e.id, e.name));
    }
    let req = GatewayRequest::new(Purpose::Extract, system, utterance.trim());
    let schema = [
        FieldSpec::new("goal", FieldKind::Text, "one of exhibit, next, around"),
        FieldSpec::new("exhibit_number", FieldKind::Int, "exhibit number, or 0"),
    ];
    let fields = llm.extract_structured(&req, &schema)?;
    let goal = fields["goal"].as_text().unwrap_or_default().trim().to_ascii_lowercase();
    let number = fields["exhibit_number"].as_int().unwrap_or(0);
    match goal.as_str() {
        "exhibit" => resolve_number(map, number.max(0) as u64),
        "next" => Ok(NavGoal::Next),
        "around" => Ok(NavGoal::ShowAround),
        _ => Err(GoalError::Backend(GatewayError::ParseFailure {
            missing: alloc::vec![String::from("goal")],
        })),
    }
}

/// Rule-based goal parse without suggestion context, used when coding logs.
pub(crate) fn goal_for_coding(tokens: &[String], map: Option<&AnnotatedMap>) -> Option<NavGoal> {
    match map {
        Some(m) => extract_with_rules(tokens, m, &SuggestionState::default()).ok(),
        None => {
            if let Some(&n) = lexicon::numbers(tokens).first() {
                return ExhibitId::try_from(n).ok().map(NavGoal::SpecificExhibit);
            }
            if has_any(tokens, lexicon::NEXT_WORDS) {
                Some(NavGoal::Next)
            } else if has_any(tokens, lexicon::AROUND_PHRASES) {
                Some(NavGoal::ShowAround)
            } else {
                None
            }
        }
    }
}
