//! One guided tour as a single-threaded state machine on a virtual clock.
//!
//! Callers feed utterances, button presses and clock advances; every
//! observable effect is appended to the transcript as an [`Event`].

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{code_politeness, Politeness};
use crate::dialogue::{
    arrival_narration, classify, handle, lexicon, proactive, proactive_due, Action, ClassifierBackend,
    DialogueContext, Intent, NavGoal, PromptTemplate, RuleClassifier, SpeechReason, SuggestionState,
};
use crate::gateway::LanguageModel;
use crate::geometry::Pose;
use crate::navsim::{self, apply_low_level, plan_path, Directional, Mode, MotionConfig, NavEvent, RobotState};
use crate::time::SimTime;
use crate::worldmap::{AnnotatedMap, ExhibitId};

/// Which implementation answers a language-understanding question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Rules,
    Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    /// Seconds of silence before the guide starts a social chat.
    pub silence_threshold: f64,
    /// Navigate to robot suggestions without asking first.
    pub auto_guide: bool,
    /// Let a new utterance cut the robot's speech short.
    pub barge_in: bool,
    pub motion: MotionConfig,
    /// Characters per second of simulated speech.
    pub speech_rate: f64,
    /// Motion tick in seconds.
    pub tick: f64,
    pub classifier: Engine,
    pub goal_extractor: Engine,
    /// Hold proactive chat while the robot travels autonomously.
    pub transit_narration: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            silence_threshold: 45.0,
            auto_guide: false,
            barge_in: false,
            motion: MotionConfig::default(),
            speech_rate: 15.0,
            tick: 0.1,
            classifier: Engine::Rules,
            goal_extractor: Engine::Rules,
            transit_narration: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("invalid value for `{0}`")]
pub struct InvalidConfig(pub &'static str);

impl SessionConfig {
    /// Checks every positive quantity, naming the first bad field.
    pub fn validate(&self) -> Result<(), InvalidConfig> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.silence_threshold) {
            return Err(InvalidConfig("silence_threshold"));
        }
        if !positive(self.speech_rate) {
            return Err(InvalidConfig("speech_rate"));
        }
        if !positive(self.tick) || SimTime::from_secs_f64(self.tick) == SimTime::ZERO {
            return Err(InvalidConfig("tick"));
        }
        self.motion.validate().map_err(|field| {
            InvalidConfig(match field {
                "linear_speed" => "motion.linear_speed",
                "angular_speed" => "motion.angular_speed",
                "step_distance" => "motion.step_distance",
                "step_angle" => "motion.step_angle",
                "arrival_pos_tol" => "motion.arrival_pos_tol",
                _ => "motion.arrival_heading_tol",
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSource {
    /// Typed or transcribed speech.
    Text,
    /// A console button.
    Button,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NavCommand {
    Directional { directional: Directional, blocked: bool },
    Goal { goal_exhibit: ExhibitId, eta: SimTime },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventBody {
    UserUtterance { text: String, source: InputSource },
    RobotSpeech { text: String, reason: SpeechReason },
    NavCommand(NavCommand),
    Arrived { exhibit: ExhibitId },
    Suggestion { exhibit: ExhibitId },
    Error { message: String },
}

impl EventBody {
    pub fn kind(&self) -> &'static str {
        match self {
            EventBody::UserUtterance { .. } => "user_utterance",
            EventBody::RobotSpeech { .. } => "robot_speech",
            EventBody::NavCommand(_) => "nav_command",
            EventBody::Arrived { .. } => "arrived",
            EventBody::Suggestion { .. } => "suggestion",
            EventBody::Error { .. } => "error",
        }
    }
}

/// One transcript record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: SimTime,
    #[serde(flatten)]
    pub body: EventBody,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intent: Option<Intent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub politeness: Option<Politeness>,
}

impl Event {
    pub fn new(t: SimTime, body: EventBody) -> Self {
        Event {
            t,
            body,
            intent: None,
            politeness: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("session is closed")]
    Closed,
    #[error("utterance is empty")]
    EmptyUtterance,
    #[error("no suggestion is awaiting an answer")]
    NoPendingSuggestion,
}

/// Read-only view for the console.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub session_id: String,
    pub t: SimTime,
    pub pose: Pose,
    pub mode: Mode,
    pub goal_exhibit: Option<ExhibitId>,
    /// Points still to drive through, ending at the viewing position.
    pub path: Vec<[f64; 2]>,
    pub speaking: bool,
    pub visited: Vec<ExhibitId>,
    pub pending_suggestion: Option<ExhibitId>,
    pub event_count: usize,
    pub last_events: Vec<Event>,
    pub closed: bool,
}

const SNAPSHOT_EVENTS: usize = 10;

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    map: Arc<AnnotatedMap>,
    template: Arc<PromptTemplate>,
    config: SessionConfig,
    rules: RuleClassifier,
    robot: RobotState,
    suggestion: SuggestionState,
    transcript: Vec<Event>,
    clock: SimTime,
    last_activity: SimTime,
    speaking_until: SimTime,
    /// Utterance waiting for the robot to finish speaking.
    queued: Option<String>,
    closed: bool,
}

impl Session {
    pub fn new(
        id: impl Into<String>,
        map: Arc<AnnotatedMap>,
        config: SessionConfig,
        template: Arc<PromptTemplate>,
    ) -> Result<Self, InvalidConfig> {
        config.validate()?;
        Ok(Session {
            id: id.into(),
            rules: RuleClassifier::for_map(&map),
            robot: RobotState::new(map.start_pose()),
            map,
            template,
            config,
            suggestion: SuggestionState::default(),
            transcript: Vec::new(),
            clock: SimTime::ZERO,
            last_activity: SimTime::ZERO,
            speaking_until: SimTime::ZERO,
            queued: None,
            closed: false,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn map(&self) -> &AnnotatedMap {
        &self.map
    }

    pub fn clock(&self) -> SimTime {
        self.clock
    }

    pub fn robot(&self) -> &RobotState {
        &self.robot
    }

    pub fn suggestion(&self) -> &SuggestionState {
        &self.suggestion
    }

    pub fn transcript(&self) -> &[Event] {
        &self.transcript
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn is_speaking(&self) -> bool {
        self.speaking_until > self.clock
    }

    /// Utterance held back until the current speech ends.
    pub fn queued(&self) -> Option<&str> {
        self.queued.as_deref()
    }

    fn threshold(&self) -> SimTime {
        SimTime::from_secs_f64(self.config.silence_threshold)
    }

    /// Start of the current silence window.
    fn silence_start(&self) -> SimTime {
        self.last_activity.max(self.speaking_until)
    }

    fn ensure_open(&self) -> Result<(), SessionError> {
        if self.closed {
            Err(SessionError::Closed)
        } else {
            Ok(())
        }
    }

    fn push(&mut self, body: EventBody) {
        self.transcript.push(Event::new(self.clock, body));
    }

    fn since(&self, mark: usize) -> Vec<Event> {
        self.transcript[mark..].to_vec()
    }

    /// A visitor utterance. While the robot speaks (and barge-in is off) it
    /// is held until the speech ends, replacing any utterance already held.
    pub fn submit_utterance(&mut self, text: &str, llm: &dyn LanguageModel) -> Result<Vec<Event>, SessionError> {
        self.ensure_open()?;
        let text = text.trim();
        if lexicon::tokenize(text).is_empty() {
            return Err(SessionError::EmptyUtterance);
        }
        let mark = self.transcript.len();
        self.last_activity = self.clock;
        if self.is_speaking() {
            if !self.config.barge_in {
                self.queued = Some(text.to_string());
                return Ok(Vec::new());
            }
            self.speaking_until = self.clock;
        }
        self.process(text, InputSource::Text, llm);
        Ok(self.since(mark))
    }

    /// A directional console button; applies at once, even mid-speech.
    pub fn press(&mut self, cmd: Directional) -> Result<Vec<Event>, SessionError> {
        self.ensure_open()?;
        let mark = self.transcript.len();
        self.last_activity = self.clock;
        let text = match cmd {
            Directional::Forward => "move forward",
            Directional::Backward => "move backward",
            Directional::TurnLeft => "turn left",
            Directional::TurnRight => "turn right",
            Directional::Stop => "stop",
        };
        self.transcript.push(Event {
            t: self.clock,
            body: EventBody::UserUtterance {
                text: text.to_string(),
                source: InputSource::Button,
            },
            intent: Some(Intent::LowLevelControl),
            politeness: Some(Politeness::Direct),
        });
        self.apply(Action {
            navigate: Some(NavGoal::Directional(cmd)),
            ..Default::default()
        });
        Ok(self.since(mark))
    }

    /// Accept or decline button for the pending suggestion.
    pub fn respond_suggestion(&mut self, accept: bool, llm: &dyn LanguageModel) -> Result<Vec<Event>, SessionError> {
        self.ensure_open()?;
        if self.suggestion.pending().is_none() {
            return Err(SessionError::NoPendingSuggestion);
        }
        let mark = self.transcript.len();
        self.last_activity = self.clock;
        self.process(if accept { "yes" } else { "no" }, InputSource::Button, llm);
        Ok(self.since(mark))
    }

    /// Runs the virtual clock forward by `dt`.
    pub fn advance(&mut self, dt: SimTime, llm: &dyn LanguageModel) -> Result<Vec<Event>, SessionError> {
        self.ensure_open()?;
        let mark = self.transcript.len();
        let end = self.clock + dt;
        let tick = SimTime::from_secs_f64(self.config.tick).as_millis();
        while self.clock < end {
            let grid = SimTime::from_millis((self.clock.as_millis() / tick + 1) * tick);
            let mut next = end.min(grid);
            if self.speaking_until > self.clock {
                next = next.min(self.speaking_until);
            }
            let due = self.silence_start() + self.threshold();
            if due > self.clock {
                next = next.min(due);
            }
            let (robot, ev) = navsim::tick(&self.robot, (next - self.clock).as_secs_f64(), &self.config.motion);
            self.robot = robot;
            self.clock = next;
            if let Some(NavEvent::Arrived(id)) = ev {
                self.on_arrival(id);
            }
            self.settle(llm);
        }
        Ok(self.since(mark))
    }

    pub fn snapshot(&self) -> Snapshot {
        let mut path: Vec<[f64; 2]> = self.robot.remaining_waypoints().iter().map(|&(x, y)| [x, y]).collect();
        if let Some(plan) = self.robot.plan() {
            path.push([plan.target.0, plan.target.1]);
        }
        let skip = self.transcript.len().saturating_sub(SNAPSHOT_EVENTS);
        Snapshot {
            session_id: self.id.clone(),
            t: self.clock,
            pose: self.robot.pose(),
            mode: self.robot.mode(),
            goal_exhibit: self.robot.goal_exhibit(),
            path,
            speaking: self.is_speaking(),
            visited: self.suggestion.visited().to_vec(),
            pending_suggestion: self.suggestion.pending(),
            event_count: self.transcript.len(),
            last_events: self.transcript[skip..].to_vec(),
            closed: self.closed,
        }
    }

    pub fn close(&mut self) -> Result<(), SessionError> {
        self.ensure_open()?;
        self.closed = true;
        self.queued = None;
        Ok(())
    }

    /// Work that falls due at the current instant.
    fn settle(&mut self, llm: &dyn LanguageModel) {
        if !self.is_speaking() {
            if let Some(text) = self.queued.take() {
                self.process(&text, InputSource::Text, llm);
            }
        }
        let transit = self.config.transit_narration && self.robot.mode() == Mode::Autonomous;
        if proactive_due(self.clock, self.silence_start(), self.threshold(), self.is_speaking(), transit) {
            let silence = (self.clock - self.silence_start()).as_secs_f64();
            let action = {
                let mut ctx = DialogueContext {
                    map: &self.map,
                    robot: &self.robot,
                    suggestion: &mut self.suggestion,
                    template: &self.template,
                    llm,
                    llm_goals: self.config.goal_extractor == Engine::Model,
                    auto_guide: self.config.auto_guide,
                };
                proactive(&mut ctx, silence)
            };
            self.apply(action);
        }
    }

    fn process(&mut self, text: &str, source: InputSource, llm: &dyn LanguageModel) {
        let classified = match (source, self.config.classifier) {
            (InputSource::Button, _) | (_, Engine::Rules) => self.rules.classify(text),
            (_, Engine::Model) => classify(text, &ClassifierBackend::Llm(llm)),
        };
        self.transcript.push(Event {
            t: self.clock,
            body: EventBody::UserUtterance {
                text: text.to_string(),
                source,
            },
            intent: classified.as_ref().ok().copied(),
            politeness: Some(code_politeness(text)),
        });
        let intent = match classified {
            Ok(i) => i,
            Err(e) => {
                self.push(EventBody::Error { message: e.to_string() });
                self.speak(crate::dialogue::FALLBACK_SPEECH.to_string(), SpeechReason::Fallback);
                return;
            }
        };
        let action = {
            let mut ctx = DialogueContext {
                map: &self.map,
                robot: &self.robot,
                suggestion: &mut self.suggestion,
                template: &self.template,
                llm,
                llm_goals: self.config.goal_extractor == Engine::Model,
                auto_guide: self.config.auto_guide,
            };
            handle(intent, text, &mut ctx)
        };
        self.apply(action);
    }

    fn apply(&mut self, action: Action) {
        if let Some(id) = action.suggested {
            self.push(EventBody::Suggestion { exhibit: id });
        }
        let mut speech = action.speech;
        let mut error = action.error;
        match action.navigate {
            None => {}
            Some(NavGoal::Directional(cmd)) => {
                let step = apply_low_level(&self.robot, cmd, &self.config.motion, &self.map);
                self.robot = step.state;
                self.push(EventBody::NavCommand(NavCommand::Directional {
                    directional: cmd,
                    blocked: step.blocked,
                }));
            }
            Some(NavGoal::SpecificExhibit(id)) => match plan_path(&self.map, self.robot.pose(), id) {
                Ok(plan) => {
                    let eta = SimTime::from_secs_f64(navsim::eta(&plan, &self.config.motion));
                    self.robot = self.robot.with_plan(plan);
                    self.push(EventBody::NavCommand(NavCommand::Goal { goal_exhibit: id, eta }));
                }
                Err(e) => {
                    error = Some(e.to_string());
                    speech = Some((
                        format!("Sorry, I can't find a way to exhibit {id} from here."),
                        SpeechReason::Fallback,
                    ));
                }
            },
            Some(goal) => error = Some(format!("unresolved navigation goal {goal:?}")),
        }
        if let Some(message) = error {
            self.push(EventBody::Error { message });
        }
        if let Some((text, reason)) = speech {
            self.speak(text, reason);
        }
    }

    fn speak(&mut self, text: String, reason: SpeechReason) {
        let chars = text.chars().count() as f64;
        let duration = SimTime::from_secs_f64(chars / self.config.speech_rate);
        let start = self.clock.max(self.speaking_until);
        self.speaking_until = start + duration;
        self.push(EventBody::RobotSpeech { text, reason });
    }

    fn on_arrival(&mut self, id: ExhibitId) {
        self.suggestion.mark_visited(id);
        self.push(EventBody::Arrived { exhibit: id });
        let text = arrival_narration(&self.map, id);
        self.speak(text, SpeechReason::Arrival);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::fake::FakeModel;
    use crate::worldmap::testutil::two_rooms;
    use alloc::vec;

    fn session(config: SessionConfig) -> Session {
        Session::new("s1", Arc::new(two_rooms()), config, Arc::new(PromptTemplate::default())).unwrap()
    }

    fn secs(s: f64) -> SimTime {
        SimTime::from_secs_f64(s)
    }

    fn kinds(events: &[Event]) -> Vec<&'static str> {
        events.iter().map(|e| e.body.kind()).collect()
    }

    fn proactive_count(events: &[Event]) -> usize {
        events
            .iter()
            .filter(|e| matches!(e.body, EventBody::RobotSpeech { reason: SpeechReason::Proactive, .. }))
            .count()
    }

    #[test]
    fn turn_left_while_idle() {
        let mut s = session(SessionConfig::default());
        let llm = FakeModel::replying("unused");
        let ev = s.submit_utterance("turn left", &llm).unwrap();
        assert_eq!(kinds(&ev), ["user_utterance", "nav_command"]);
        assert_eq!(ev[0].intent, Some(Intent::LowLevelControl));
        assert_eq!(
            ev[1].body,
            EventBody::NavCommand(NavCommand::Directional {
                directional: Directional::TurnLeft,
                blocked: false
            })
        );
        assert_eq!(llm.calls.get(), 0);
    }

    #[test]
    fn silence_boundary_is_exact() {
        let mut s = session(SessionConfig::default());
        let llm = FakeModel::replying("Lovely day for rocks.");
        assert!(s.advance(secs(44.9), &llm).unwrap().is_empty());
        let ev = s.advance(secs(0.1), &llm).unwrap();
        assert_eq!(proactive_count(&ev), 1);
        assert_eq!(ev[0].t, secs(45.0));
        assert!(s.advance(SimTime::ZERO, &llm).unwrap().is_empty());
    }

    #[test]
    fn utterance_resets_silence() {
        let mut s = session(SessionConfig::default());
        let llm = FakeModel::replying("Hi.");
        s.advance(secs(44.0), &llm).unwrap();
        s.submit_utterance("hello there friend", &llm).unwrap();
        let ev = s.advance(secs(2.0), &llm).unwrap();
        assert_eq!(proactive_count(&ev), 0);
        // The reply "Hi." lasts 0.2 s; the window restarts when it ends.
        let ev = s.advance(secs(43.1), &llm).unwrap();
        assert_eq!(proactive_count(&ev), 0);
        let ev = s.advance(secs(0.1), &llm).unwrap();
        assert_eq!(proactive_count(&ev), 1);
        assert_eq!(ev[0].t, secs(89.2));
    }

    #[test]
    fn queue_keeps_newest_mid_speech() {
        let mut s = session(SessionConfig::default());
        let llm = FakeModel::replying("A fairly long answer about minerals and the rocks around here.");
        s.submit_utterance("What is galena?", &llm).unwrap();
        assert!(s.is_speaking());
        assert!(s.submit_utterance("go to exhibit 13", &llm).unwrap().is_empty());
        assert!(s.submit_utterance("turn left", &llm).unwrap().is_empty());
        assert_eq!(s.queued(), Some("turn left"));
        let until = s.speaking_until;
        let ev = s.advance(secs(10.0), &llm).unwrap();
        let user: Vec<&Event> = ev.iter().filter(|e| e.body.kind() == "user_utterance").collect();
        assert_eq!(user.len(), 1);
        assert_eq!(user[0].t, until);
        assert!(ev.iter().all(|e| !matches!(e.body, EventBody::NavCommand(NavCommand::Goal { .. }))));
    }

    #[test]
    fn barge_in_applies_at_once() {
        let mut s = session(SessionConfig {
            barge_in: true,
            ..Default::default()
        });
        let llm = FakeModel::replying("A fairly long answer about minerals and the rocks around here.");
        s.submit_utterance("What is galena?", &llm).unwrap();
        let ev = s.submit_utterance("turn left", &llm).unwrap();
        assert_eq!(kinds(&ev), ["user_utterance", "nav_command"]);
        assert!(!s.is_speaking());
    }

    #[test]
    fn navigation_then_arrival() {
        let mut s = session(SessionConfig::default());
        let llm = FakeModel::replying("unused");
        let ev = s.submit_utterance("go to exhibit 13", &llm).unwrap();
        assert_eq!(kinds(&ev), ["user_utterance", "nav_command", "robot_speech"]);
        let planned_eta = match ev[1].body {
            EventBody::NavCommand(NavCommand::Goal { goal_exhibit: 13, eta }) => eta,
            ref other => panic!("{other:?}"),
        };
        assert_eq!(s.snapshot().mode, Mode::Autonomous);
        assert_eq!(s.snapshot().goal_exhibit, Some(13));
        let ev = s.advance(secs(60.0), &llm).unwrap();
        let i = ev.iter().position(|e| e.body == EventBody::Arrived { exhibit: 13 }).unwrap();
        assert!(matches!(ev[i + 1].body, EventBody::RobotSpeech { reason: SpeechReason::Arrival, .. }));
        // Arrival lands on the first tick boundary at or after the closed-form time.
        let tick = secs(0.1).as_millis();
        let want = planned_eta.as_millis().div_ceil(tick) * tick;
        assert!(ev[i].t.as_millis().abs_diff(want) <= tick, "{} vs {}", ev[i].t, want);
        assert_eq!(s.snapshot().visited, vec![13]);
        assert_eq!(s.snapshot().mode, Mode::Idle);
        let e = &s.map.exhibit(13).unwrap().viewing_pose;
        assert!(s.robot.pose().distance(e) <= 0.1);
    }

    #[test]
    fn proactive_suggestion_then_accept_button() {
        let mut s = session(SessionConfig::default());
        let llm = FakeModel::replying("Isn't this gallery lovely?");
        let ev = s.advance(secs(45.0), &llm).unwrap();
        assert_eq!(kinds(&ev), ["suggestion", "robot_speech"]);
        assert_eq!(s.snapshot().pending_suggestion, Some(7));
        let ev = s.respond_suggestion(true, &llm).unwrap();
        assert_eq!(ev[0].body.kind(), "user_utterance");
        assert!(ev
            .iter()
            .any(|e| matches!(e.body, EventBody::NavCommand(NavCommand::Goal { goal_exhibit: 7, .. }))));
        assert_eq!(s.respond_suggestion(true, &llm), Err(SessionError::NoPendingSuggestion));
    }

    #[test]
    fn gateway_failure_logs_error_and_fallback() {
        let mut s = session(SessionConfig::default());
        let ev = s.submit_utterance("Tell me more about Galena.", &FakeModel::failing()).unwrap();
        assert_eq!(kinds(&ev), ["user_utterance", "error", "robot_speech"]);
    }

    #[test]
    fn closed_sessions_refuse_work() {
        let mut s = session(SessionConfig::default());
        let llm = FakeModel::default();
        s.close().unwrap();
        assert_eq!(s.submit_utterance("hi", &llm), Err(SessionError::Closed));
        assert_eq!(s.advance(secs(1.0), &llm), Err(SessionError::Closed));
        assert_eq!(s.press(Directional::Stop), Err(SessionError::Closed));
        assert_eq!(s.close(), Err(SessionError::Closed));
    }

    #[test]
    fn snapshot_is_a_stable_copy() {
        let s = session(SessionConfig::default());
        let a = s.snapshot();
        assert_eq!(a, s.snapshot());
        assert_eq!(a.pose, s.map.start_pose());
        assert!(a.visited.is_empty());
    }

    #[test]
    fn config_validation_names_field() {
        let bad = SessionConfig {
            speech_rate: 0.0,
            ..Default::default()
        };
        assert_eq!(bad.validate(), Err(InvalidConfig("speech_rate")));
        let mut bad = SessionConfig::default();
        bad.motion.angular_speed = -1.0;
        assert_eq!(bad.validate(), Err(InvalidConfig("motion.angular_speed")));
    }
}
