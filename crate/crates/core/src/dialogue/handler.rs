use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::goal::{extract_goal, GoalError, NavGoal};
use super::lexicon::{self, tokenize};
use super::prompt::{build_prompt, build_proactive_prompt, PromptTemplate};
use super::suggest::{suggest_next, Suggestion, SuggestionState};
use super::Intent;
use crate::gateway::{GatewayRequest, LanguageModel, Purpose};
use crate::navsim::{Mode, RobotState};
use crate::worldmap::{AnnotatedMap, ExhibitId};

pub const FALLBACK_SPEECH: &str = "Sorry, I didn't catch that. Could you say it again?";
const PROACTIVE_FALLBACK: &str = "Is there anything you would like to know about this gallery?";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeechReason {
    /// Language-model answer to a conversational turn.
    Response,
    /// Spoken when a navigation goal is accepted.
    Confirmation,
    Arrival,
    /// Silence-triggered social chat.
    Proactive,
    Clarification,
    Acknowledgement,
    TourComplete,
    Fallback,
}

/// What a handler wants done. Any combination of fields may be set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Action {
    pub speech: Option<(String, SpeechReason)>,
    pub navigate: Option<NavGoal>,
    /// A fresh suggestion to log.
    pub suggested: Option<ExhibitId>,
    pub error: Option<String>,
}

impl Action {
    fn speak(text: impl Into<String>, reason: SpeechReason) -> Self {
        Action {
            speech: Some((text.into(), reason)),
            ..Default::default()
        }
    }

    fn fallback(error: impl ToString) -> Self {
        Action {
            speech: Some((FALLBACK_SPEECH.to_string(), SpeechReason::Fallback)),
            error: Some(error.to_string()),
            ..Default::default()
        }
    }
}

pub struct DialogueContext<'a> {
    pub map: &'a AnnotatedMap,
    pub robot: &'a RobotState,
    pub suggestion: &'a mut SuggestionState,
    pub template: &'a PromptTemplate,
    pub llm: &'a dyn LanguageModel,
    /// Use the language model for high-level goal extraction.
    pub llm_goals: bool,
    /// Navigate to robot-initiated suggestions without waiting for consent.
    pub auto_guide: bool,
}

impl DialogueContext<'_> {
    fn exhibit_label(&self, id: ExhibitId) -> String {
        match self.map.exhibit(id) {
            Some(e) => format!("exhibit {id}, {}", e.name),
            None => format!("exhibit {id}"),
        }
    }

    fn go_to(&mut self, id: ExhibitId, text: String) -> Action {
        self.suggestion.clear_pending();
        Action {
            speech: Some((text, SpeechReason::Confirmation)),
            navigate: Some(NavGoal::SpecificExhibit(id)),
            ..Default::default()
        }
    }

    fn open_ended(&mut self) -> Action {
        if let Some(p) = self.suggestion.pending() {
            let text = format!("Great, let's go to {}.", self.exhibit_label(p));
            return self.go_to(p, text);
        }
        if let Some(g) = self.robot.goal_exhibit() {
            let text = format!("We're already on our way to {}.", self.exhibit_label(g));
            return self.go_to(g, text);
        }
        match suggest_next(self.suggestion, self.map.tour_order()) {
            Suggestion::Exhibit(id) => {
                let text = format!("Let's go to {} next.", self.exhibit_label(id));
                let mut a = self.go_to(id, text);
                a.suggested = Some(id);
                a
            }
            Suggestion::TourComplete => Action::speak(
                "We have visited every exhibit on the tour. Feel free to ask me anything or look around on your own.",
                SpeechReason::TourComplete,
            ),
        }
    }
}

/// Routes a classified utterance to its handler.
///
/// Low-level commands never reach the language model.
pub fn handle(intent: Intent, utterance: &str, ctx: &mut DialogueContext<'_>) -> Action {
    let tokens = tokenize(utterance);
    if intent == Intent::LowLevelControl {
        return match extract_goal(utterance, true, ctx.map, ctx.suggestion, None) {
            Ok(goal) => Action {
                navigate: Some(goal),
                ..Default::default()
            },
            Err(e) => Action::fallback(e),
        };
    }

    if let Some(p) = ctx.suggestion.pending() {
        if intent != Intent::HighLevelControl {
            if lexicon::is_negation(&tokens) {
                ctx.suggestion.clear_pending();
                return Action::speak(
                    "No problem, we can stay here. Just tell me when you would like to move on.",
                    SpeechReason::Acknowledgement,
                );
            }
            if lexicon::is_affirmation(&tokens) {
                let text = format!("Great, let's go to {}.", ctx.exhibit_label(p));
                return ctx.go_to(p, text);
            }
        }
    }

    if intent == Intent::HighLevelControl {
        let llm = ctx.llm_goals.then_some(ctx.llm);
        return match extract_goal(utterance, false, ctx.map, ctx.suggestion, llm) {
            Ok(NavGoal::SpecificExhibit(id)) => {
                let text = format!("Sure, let's head to {}.", ctx.exhibit_label(id));
                ctx.go_to(id, text)
            }
            Ok(NavGoal::Next | NavGoal::ShowAround) => ctx.open_ended(),
            Ok(NavGoal::Directional(d)) => Action {
                navigate: Some(NavGoal::Directional(d)),
                ..Default::default()
            },
            Err(GoalError::AmbiguousGoal(ids)) => {
                let options: Vec<String> = ids.iter().map(|id| ctx.exhibit_label(*id)).collect();
                Action {
                    speech: Some((
                        format!("Did you mean {}?", options.join(" or ")),
                        SpeechReason::Clarification,
                    )),
                    error: Some(GoalError::AmbiguousGoal(ids).to_string()),
                    ..Default::default()
                }
            }
            Err(e @ GoalError::UnknownExhibit(n)) => Action {
                speech: Some((
                    format!("I couldn't find exhibit {n} on this tour."),
                    SpeechReason::Clarification,
                )),
                error: Some(e.to_string()),
                ..Default::default()
            },
            Err(e) => Action::fallback(e),
        };
    }

    let visited = ctx.suggestion.visited().to_vec();
    let bundle = build_prompt(intent, utterance, ctx.map, ctx.robot, &visited, ctx.template)
        .expect("conversational intents always yield a prompt");
    let (system, user) = bundle.render_parts(ctx.template);
    match ctx.llm.complete(&GatewayRequest::new(Purpose::Respond, system, user)) {
        Ok(text) if !text.trim().is_empty() => Action::speak(text.trim(), SpeechReason::Response),
        Ok(_) => Action::fallback("language model returned an empty response"),
        Err(e) => Action::fallback(e),
    }
}

/// Silence-triggered social chat, plus the next tour suggestion when the
/// robot is not already travelling.
pub fn proactive(ctx: &mut DialogueContext<'_>, silence_secs: f64) -> Action {
    let visited = ctx.suggestion.visited().to_vec();
    let cue = format!("The visitor has been silent for {silence_secs:.0} seconds.");
    let bundle = build_proactive_prompt(ctx.map, ctx.robot, &visited, ctx.template, &cue);
    let (system, user) = bundle.render_parts(ctx.template);
    let mut action = match ctx.llm.complete(&GatewayRequest::new(Purpose::Proactive, system, user)) {
        Ok(text) if !text.trim().is_empty() => Action::speak(text.trim(), SpeechReason::Proactive),
        Ok(_) => Action {
            speech: Some((PROACTIVE_FALLBACK.to_string(), SpeechReason::Proactive)),
            error: Some("language model returned an empty response".to_string()),
            ..Default::default()
        },
        Err(e) => Action {
            speech: Some((PROACTIVE_FALLBACK.to_string(), SpeechReason::Proactive)),
            error: Some(e.to_string()),
            ..Default::default()
        },
    };
    if ctx.robot.mode() != Mode::Autonomous {
        if let Suggestion::Exhibit(id) = suggest_next(ctx.suggestion, ctx.map.tour_order()) {
            let label = ctx.exhibit_label(id);
            let (text, _) = action.speech.get_or_insert((String::new(), SpeechReason::Proactive));
            if ctx.auto_guide {
                text.push_str(&format!(" Let's head to {label} next."));
                ctx.suggestion.clear_pending();
                action.navigate = Some(NavGoal::SpecificExhibit(id));
            } else {
                text.push_str(&format!(" Would you like to visit {label} next?"));
            }
            action.suggested = Some(id);
        }
    }
    action
}

/// Spoken on arrival at an exhibit.
pub(crate) fn arrival_narration(map: &AnnotatedMap, id: ExhibitId) -> String {
    match map.exhibit(id) {
        Some(e) => format!("Here we are at exhibit {id}, {}. {}", e.name, e.intro.trim()),
        None => format!("Here we are at exhibit {id}."),
    }
}
