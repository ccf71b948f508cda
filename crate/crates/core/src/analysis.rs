//! Coding of recorded tours and the paired-sample statistics used to compare
//! conditions across participants.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialogue::lexicon::{self, tokenize};
use crate::dialogue::{goal_for_coding, Intent, NavGoal, RuleClassifier};
use crate::session::{Event, EventBody};
use crate::time::SimTime;
use crate::worldmap::{AnnotatedMap, ExhibitId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Politeness {
    Polite,
    /// Bald on-record.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    MuseumInquiry,
    RobotControlLow,
    RobotControlHigh,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoryGroup {
    Navigational,
    Conversational,
    Other,
}

impl Category {
    pub fn group(self) -> CategoryGroup {
        match self {
            Category::RobotControlLow | Category::RobotControlHigh => CategoryGroup::Navigational,
            Category::MuseumInquiry => CategoryGroup::Conversational,
            Category::Other => CategoryGroup::Other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuggestionResponse {
    Accept,
    Reject,
    Ignored,
}

pub fn code_politeness(text: &str) -> Politeness {
    if lexicon::has_any(&tokenize(text), lexicon::POLITENESS_MARKERS) {
        Politeness::Polite
    } else {
        Politeness::Direct
    }
}

pub fn code_category(intent: Intent) -> Category {
    match intent {
        Intent::LowLevelControl => Category::RobotControlLow,
        Intent::HighLevelControl => Category::RobotControlHigh,
        Intent::InquiryAboutMuseum => Category::MuseumInquiry,
        Intent::Comment | Intent::FreeChat => Category::Other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodedUtterance {
    pub t: SimTime,
    pub text: String,
    pub category: Category,
    pub politeness: Politeness,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suggestion_response: Option<SuggestionResponse>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestionOutcome {
    /// Time of the suggestion event.
    pub t: SimTime,
    pub exhibit: ExhibitId,
    pub response: SuggestionResponse,
    /// Index into the user utterances of the answer, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<usize>,
}

fn classifier(map: Option<&AnnotatedMap>) -> RuleClassifier {
    map.map_or_else(RuleClassifier::new, RuleClassifier::for_map)
}

/// Logged intent, falling back to the rule classifier for unlabelled turns.
fn intent_of(text: &str, logged: Option<Intent>, rules: &RuleClassifier) -> Intent {
    logged
        .or_else(|| rules.classify(text).ok())
        .unwrap_or(Intent::FreeChat)
}

fn user_turns(events: &[Event]) -> impl Iterator<Item = (usize, &Event, &str)> {
    events.iter().enumerate().filter_map(|(i, e)| match &e.body {
        EventBody::UserUtterance { text, .. } => Some((i, e, text.as_str())),
        _ => None,
    })
}

/// How a single utterance answers a suggestion; `None` when it does neither.
fn judge(text: &str, intent: Intent, suggested: ExhibitId, map: Option<&AnnotatedMap>) -> Option<SuggestionResponse> {
    let tokens = tokenize(text);
    if lexicon::is_negation(&tokens) {
        return Some(SuggestionResponse::Reject);
    }
    if intent == Intent::HighLevelControl {
        return match goal_for_coding(&tokens, map) {
            Some(NavGoal::SpecificExhibit(id)) if id != suggested => Some(SuggestionResponse::Reject),
            _ => Some(SuggestionResponse::Accept),
        };
    }
    if lexicon::is_affirmation(&tokens) {
        return Some(SuggestionResponse::Accept);
    }
    None
}

/// Classifies the visitor's answer to every suggestion in the log.
///
/// The first user utterance after a suggestion that affirms or navigates
/// toward the suggested exhibit is an accept; one that negates or redirects
/// is a reject. If no such utterance occurs before the next suggestion the
/// suggestion was ignored.
pub fn code_suggestion_responses(events: &[Event], map: Option<&AnnotatedMap>) -> Vec<SuggestionOutcome> {
    let rules = classifier(map);
    let turns: Vec<(usize, &Event, &str)> = user_turns(events).collect();
    let suggestions: Vec<(usize, SimTime, ExhibitId)> = events
        .iter()
        .enumerate()
        .filter_map(|(i, e)| match e.body {
            EventBody::Suggestion { exhibit } => Some((i, e.t, exhibit)),
            _ => None,
        })
        .collect();
    let mut out = Vec::with_capacity(suggestions.len());
    for (k, &(pos, t, exhibit)) in suggestions.iter().enumerate() {
        let until = suggestions.get(k + 1).map_or(usize::MAX, |s| s.0);
        let mut outcome = SuggestionOutcome {
            t,
            exhibit,
            response: SuggestionResponse::Ignored,
            answer: None,
        };
        for (n, &(i, e, text)) in turns.iter().enumerate() {
            if i <= pos || i >= until {
                continue;
            }
            if let Some(r) = judge(text, intent_of(text, e.intent, &rules), exhibit, map) {
                outcome.response = r;
                outcome.answer = Some(n);
                break;
            }
        }
        out.push(outcome);
    }
    out
}

/// Codes every user utterance in the log, in log order.
pub fn code_events(events: &[Event], map: Option<&AnnotatedMap>) -> Vec<CodedUtterance> {
    let rules = classifier(map);
    let mut coded: Vec<CodedUtterance> = user_turns(events)
        .map(|(_, e, text)| CodedUtterance {
            t: e.t,
            text: String::from(text),
            category: code_category(intent_of(text, e.intent, &rules)),
            politeness: e.politeness.unwrap_or_else(|| code_politeness(text)),
            suggestion_response: None,
        })
        .collect();
    for s in code_suggestion_responses(events, map) {
        if let Some(n) = s.answer {
            coded[n].suggestion_response = Some(s.response);
        }
    }
    coded
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionStats {
    pub n_utterances: u32,
    pub n_accept: u32,
    pub n_reject: u32,
    pub n_ignored: u32,
    pub n_inquiry: u32,
    pub n_control: u32,
    pub n_low: u32,
    pub n_high: u32,
    pub n_polite: u32,
    pub n_direct: u32,
}

pub fn session_stats(events: &[Event], map: Option<&AnnotatedMap>) -> SessionStats {
    let mut s = SessionStats::default();
    for c in code_events(events, map) {
        s.n_utterances += 1;
        match c.category {
            Category::MuseumInquiry => s.n_inquiry += 1,
            Category::RobotControlLow => s.n_low += 1,
            Category::RobotControlHigh => s.n_high += 1,
            Category::Other => {}
        }
        match c.politeness {
            Politeness::Polite => s.n_polite += 1,
            Politeness::Direct => s.n_direct += 1,
        }
    }
    s.n_control = s.n_low + s.n_high;
    for o in code_suggestion_responses(events, map) {
        match o.response {
            SuggestionResponse::Accept => s.n_accept += 1,
            SuggestionResponse::Reject => s.n_reject += 1,
            SuggestionResponse::Ignored => s.n_ignored += 1,
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineRow {
    pub t: SimTime,
    pub category_group: CategoryGroup,
    pub politeness: Politeness,
}

/// Timeline strip rows, sorted by time (stable for equal times).
pub fn export_timeline(coded: &[CodedUtterance]) -> Vec<TimelineRow> {
    let mut rows: Vec<TimelineRow> = coded
        .iter()
        .map(|c| TimelineRow {
            t: c.t,
            category_group: c.category.group(),
            politeness: c.politeness,
        })
        .collect();
    rows.sort_by_key(|r| r.t);
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTTest {
    pub n: usize,
    pub mean_diff: f64,
    pub sd_diff: f64,
    pub t_stat: f64,
    pub df: usize,
    pub p_two_sided: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TTestError {
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two pairs, got {0}")]
    TooFewPairs(usize),
    #[error("differences have zero variance")]
    DegenerateSample,
}

/// Paired-sample Student t-test on `a - b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTTest, TTestError> {
    if a.len() != b.len() {
        return Err(TTestError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(TTestError::TooFewPairs(n));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let ss: f64 = d.iter().map(|x| (x - mean) * (x - mean)).sum();
    let sd = libm::sqrt(ss / (nf - 1.0));
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(TTestError::DegenerateSample);
    }
    let t = mean / (sd / libm::sqrt(nf));
    let df = n - 1;
    Ok(PairedTTest {
        n,
        mean_diff: mean,
        sd_diff: sd,
        t_stat: t,
        df,
        p_two_sided: student_t_two_sided(t, df as f64),
    })
}

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    reg_inc_beta(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

/// Regularized incomplete beta I_x(a, b).
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b)
        + a * libm::log(x)
        + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
