//! Headless tour scripts.
//!
//! One command per line:
//!
//! ```text
//! # comment
//! at 0    say "Show me around"
//! at 12.5 press turn_left
//! at 60   accept
//! at 90   reject
//! ```
//!
//! Times are virtual-clock seconds and must not decrease.

use docent_core::gateway::LanguageModel;
use docent_core::navsim::{Directional, Mode};
use docent_core::session::{Session, SessionError};
use docent_core::SimTime;
use thiserror::Error;

/// How long an open-ended run may keep going after the last command.
pub const SETTLE_CAP: SimTime = SimTime::from_millis(600_000);

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Say(String),
    Press(Directional),
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub line: usize,
    pub at: SimTime,
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct ScriptParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("line {line}: {source}")]
    Step { line: usize, source: SessionError },
    #[error("line {line}: command at {at} is past the run duration {duration}")]
    PastDuration { line: usize, at: SimTime, duration: SimTime },
    #[error(transparent)]
    Session(#[from] SessionError),
}

pub fn parse_script(text: &str) -> Result<Vec<Step>, ScriptParseError> {
    let mut steps: Vec<Step> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| ScriptParseError { line, message };
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let rest = body
            .strip_prefix("at")
            .filter(|r| r.starts_with(char::is_whitespace))
            .ok_or_else(|| err("expected `at <seconds> ...`".into()))?
            .trim_start();
        let (time, rest) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
        let secs: f64 = time.parse().map_err(|_| err(format!("bad time {time:?}")))?;
        if !secs.is_finite() || secs < 0.0 {
            return Err(err(format!("bad time {time:?}")));
        }
        let at = SimTime::from_secs_f64(secs);
        if let Some(prev) = steps.last() {
            if at < prev.at {
                return Err(err(format!("time {at} is earlier than the previous command at {}", prev.at)));
            }
        }
        let rest = rest.trim();
        let (verb, arg) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
        let arg = arg.trim();
        let command = match verb {
            "say" => Command::Say(unquote(arg).map_err(err)?),
            "press" => Command::Press(Directional::parse(arg).ok_or_else(|| {
                err(format!(
                    "unknown button {arg:?}; expected forward, backward, turn_left, turn_right or stop"
                ))
            })?),
            "accept" | "reject" if !arg.is_empty() => return Err(err(format!("unexpected text after {verb}"))),
            "accept" => Command::Accept,
            "reject" => Command::Reject,
            "" => return Err(err("missing command after time".into())),
            other => return Err(err(format!("unknown command {other:?}"))),
        };
        steps.push(Step { line, at, command });
    }
    Ok(steps)
}

fn unquote(arg: &str) -> Result<String, String> {
    let inner = arg
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .filter(|_| arg.len() >= 2)
        .ok_or_else(|| "utterance must be a double-quoted string".to_string())?;
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some(e @ ('"' | '\\')) => out.push(e),
                Some(e) => return Err(format!("unknown escape \\{e}")),
                None => return Err("dangling backslash".into()),
            },
            '"' => return Err("unescaped quote inside utterance".into()),
            c => out.push(c),
        }
    }
    if out.trim().is_empty() {
        return Err("utterance is empty".into());
    }
    Ok(out)
}

fn quiescent(s: &Session) -> bool {
    s.robot().mode() != Mode::Autonomous && !s.is_speaking() && s.queued().is_none()
}

/// Plays `steps` against `session` on the virtual clock.
///
/// With a duration the run stops exactly there. Without one it continues
/// until the robot is parked, silent and has nothing queued, or until
/// [`SETTLE_CAP`] past the last command.
pub fn run_script(
    session: &mut Session,
    steps: &[Step],
    llm: &dyn LanguageModel,
    duration: Option<SimTime>,
) -> Result<(), RunError> {
    for step in steps {
        if let Some(d) = duration.filter(|d| step.at > *d) {
            return Err(RunError::PastDuration {
                line: step.line,
                at: step.at,
                duration: d,
            });
        }
        let wrap = |source| RunError::Step { line: step.line, source };
        session.advance(step.at.saturating_sub(session.clock()), llm).map_err(wrap)?;
        match &step.command {
            Command::Say(text) => session.submit_utterance(text, llm),
            Command::Press(cmd) => session.press(*cmd),
            Command::Accept => session.respond_suggestion(true, llm),
            Command::Reject => session.respond_suggestion(false, llm),
        }
        .map_err(wrap)?;
    }
    match duration {
        Some(d) => {
            session.advance(d.saturating_sub(session.clock()), llm)?;
        }
        None => {
            let stop = session.clock() + SETTLE_CAP;
            let tick = SimTime::from_secs_f64(session.config().tick);
            while !quiescent(session) && session.clock() < stop {
                session.advance(tick.min(stop - session.clock()), llm)?;
            }
        }
    }
    Ok(())
}
