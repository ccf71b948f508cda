//! Newline-delimited transcript logs, one event per line.

use std::io::{self, Write};

use docent_core::session::Event;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("log line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
    #[error("log line {line} is not valid UTF-8")]
    Encoding { line: usize },
}

pub fn event_line(event: &Event) -> String {
    serde_json::to_string(event).expect("events always serialize")
}

pub fn persist<W: Write>(events: &[Event], mut sink: W) -> io::Result<()> {
    for e in events {
        sink.write_all(event_line(e).as_bytes())?;
        sink.write_all(b"\n")?;
    }
    sink.flush()
}

pub fn to_ndjson(events: &[Event]) -> String {
    let mut out = Vec::new();
    persist(events, &mut out).expect("writing to memory cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

/// Parses a log; blank lines are skipped, line numbers are 1-based.
pub fn load_log(bytes: &[u8]) -> Result<Vec<Event>, LogError> {
    let mut events = Vec::new();
    for (i, raw) in bytes.split(|b| *b == b'\n').enumerate() {
        let line = std::str::from_utf8(raw).map_err(|_| LogError::Encoding { line: i + 1 })?;
        if line.trim().is_empty() {
            continue;
        }
        let event = serde_json::from_str(line).map_err(|source| LogError::Parse { line: i + 1, source })?;
        events.push(event);
    }
    Ok(events)
}
