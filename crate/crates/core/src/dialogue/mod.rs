//! Dialogue system: intent classification, navigation-goal extraction,
//! tour suggestions, location-aware prompt assembly and proactive narration.

mod classify;
mod goal;
mod handler;
pub mod lexicon;
mod prompt;
mod suggest;

use core::fmt;

use serde::{Deserialize, Serialize};

pub use classify::{classify, ClassifierBackend, ClassifyError, RuleClassifier};
pub use goal::{extract_goal, GoalError, NavGoal};
pub(crate) use goal::goal_for_coding;
pub use handler::{handle, proactive, Action, DialogueContext, SpeechReason, FALLBACK_SPEECH};
pub(crate) use handler::arrival_narration;
pub use prompt::{build_prompt, PromptBundle, PromptTemplate, TemplateError, DEFAULT_TEMPLATE};
pub use suggest::{suggest_next, Suggestion, SuggestionState};

use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intent {
    InquiryAboutMuseum,
    Comment,
    FreeChat,
    LowLevelControl,
    HighLevelControl,
}

impl Intent {
    pub const ALL: [Intent; 5] = [
        Intent::InquiryAboutMuseum,
        Intent::Comment,
        Intent::FreeChat,
        Intent::LowLevelControl,
        Intent::HighLevelControl,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Intent::InquiryAboutMuseum => "inquiry_about_museum",
            Intent::Comment => "comment",
            Intent::FreeChat => "free_chat",
            Intent::LowLevelControl => "low_level_control",
            Intent::HighLevelControl => "high_level_control",
        }
    }

    pub fn from_label(label: &str) -> Option<Intent> {
        Intent::ALL.into_iter().find(|i| i.label() == label)
    }

    pub fn is_conversational(self) -> bool {
        matches!(self, Intent::InquiryAboutMuseum | Intent::Comment | Intent::FreeChat)
    }

    pub fn is_navigational(self) -> bool {
        !self.is_conversational()
    }
}

impl fmt::Display for Intent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Whether the guide should start a social chat.
///
/// True once `now - last_activity` reaches `threshold` while the robot is
/// neither speaking nor narrating in transit.
pub fn proactive_due(
    now: SimTime,
    last_activity: SimTime,
    threshold: SimTime,
    speaking: bool,
    transit_narration: bool,
) -> bool {
    !speaking && !transit_narration && now.saturating_sub(last_activity) >= threshold
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn labels_round_trip() {
        for i in Intent::ALL {
            assert_eq!(Intent::from_label(i.label()), Some(i));
        }
        assert_eq!(Intent::from_label("chit_chat"), None);
    }

    #[test]
    fn proactive_boundaries() {
        let t = SimTime::from_millis(45_000);
        assert!(!proactive_due(SimTime::from_millis(44_900), SimTime::ZERO, t, false, false));
        assert!(proactive_due(SimTime::from_millis(45_000), SimTime::ZERO, t, false, false));
        assert!(!proactive_due(SimTime::from_millis(60_000), SimTime::ZERO, t, true, false));
        assert!(!proactive_due(SimTime::from_millis(60_000), SimTime::ZERO, t, false, true));
    }

    proptest! {
        #[test]
        fn proactive_monotone_in_silence(a in 0u64..200_000, b in 0u64..200_000, th in 1u64..100_000) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let th = SimTime::from_millis(th);
            let due_lo = proactive_due(SimTime::from_millis(lo), SimTime::ZERO, th, false, false);
            let due_hi = proactive_due(SimTime::from_millis(hi), SimTime::ZERO, th, false, false);
            prop_assert!(!due_lo || due_hi);
        }
    }
}
