//! Line-delimited JSON wire protocol and headless script replay.
//!
//! Every message is one JSON object on one line, discriminated by `"op"`.
//! Unknown fields are ignored. A line that is not a JSON object with a
//! string `op`, or whose fields do not match, is answered with
//! `error{code:"bad_message"}`; an unrecognized `op` with
//! `error{code:"unknown_message"}`.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::command::{parse_command, Utterance};
use crate::content::{MediaDescriptor, MediaKind};
use crate::grid::{BracketType, Footprint, GridConfig, UnitId};
use crate::render::render_page;
use crate::session::{EngineEvent, Effect, SessionState, VibrationPattern};

pub const DEFAULT_WAKE_WORD: &str = "hey grid";

/// Board or UI to engine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Inbound {
    Place {
        unit: UnitId,
        #[serde(rename = "type")]
        bracket_type: BracketType,
        row: u16,
        col: u16,
        row_span: u16,
        col_span: u16,
    },
    Remove {
        unit: UnitId,
    },
    Reshape {
        unit: UnitId,
        row: u16,
        col: u16,
        row_span: u16,
        col_span: u16,
    },
    Touch {
        unit: UnitId,
        duration_ms: u64,
    },
    Command {
        text: String,
    },
    MediaSelected {
        unit: UnitId,
        kind: MediaKind,
        uri: String,
        width: u32,
        height: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alt: Option<String>,
    },
    ReplaceText {
        unit: UnitId,
        lines: Vec<String>,
    },
}

pub const INBOUND_OPS: [&str; 7] =
    ["place", "remove", "reshape", "touch", "command", "media_selected", "replace_text"];

/// Engine to clients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Outbound {
    Vibrate { unit: UnitId, pattern: VibrationPattern },
    Utter { text: String, severity: crate::command::Severity, template_id: String },
    Render { revision: u64, html: String },
    OpenMediaPicker { unit: UnitId },
    Error { code: String, message: String },
}

impl Outbound {
    pub fn error(code: &str, message: impl Into<String>) -> Self {
        Outbound::Error { code: code.to_string(), message: message.into() }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("outbound message serializes")
    }
}

impl From<Utterance> for Outbound {
    fn from(u: Utterance) -> Self {
        Outbound::Utter { text: u.text, severity: u.severity, template_id: u.template_id }
    }
}

impl Inbound {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("inbound message serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("bad_message: {0}")]
    BadMessage(String),
    #[error("unknown_message: {0}")]
    UnknownMessage(String),
}

impl WireError {
    pub fn code(&self) -> &'static str {
        match self {
            WireError::BadMessage(_) => "bad_message",
            WireError::UnknownMessage(_) => "unknown_message",
        }
    }

    pub fn to_outbound(&self) -> Outbound {
        let message = match self {
            WireError::BadMessage(m) | WireError::UnknownMessage(m) => m.clone(),
        };
        Outbound::error(self.code(), message)
    }
}

fn op_of(line: &str) -> Result<(Value, String), WireError> {
    let value: Value = serde_json::from_str(line).map_err(|e| WireError::BadMessage(e.to_string()))?;
    let op = value
        .as_object()
        .ok_or_else(|| WireError::BadMessage("message must be a JSON object".into()))?
        .get("op")
        .and_then(Value::as_str)
        .ok_or_else(|| WireError::BadMessage("message needs a string \"op\" field".into()))?
        .to_string();
    Ok((value, op))
}

pub fn parse_inbound(line: &str) -> Result<Inbound, WireError> {
    let (value, op) = op_of(line)?;
    if !INBOUND_OPS.contains(&op.as_str()) {
        return Err(WireError::UnknownMessage(format!("unknown op {op:?}")));
    }
    serde_json::from_value(value).map_err(|e| WireError::BadMessage(e.to_string()))
}

/// The reducer plus the session-level settings needed to turn wire
/// messages into events and effects into outbound messages.
#[derive(Debug, Clone, PartialEq)]
pub struct Engine {
    pub state: SessionState,
    pub wake_word: String,
}

impl Engine {
    pub fn new(config: GridConfig, wake_word: impl Into<String>) -> Self {
        Self { state: SessionState::new(config), wake_word: wake_word.into() }
    }

    pub fn with_state(state: SessionState, wake_word: impl Into<String>) -> Self {
        Self { state, wake_word: wake_word.into() }
    }

    pub fn to_event(&self, msg: &Inbound) -> EngineEvent {
        match msg.clone() {
            Inbound::Place { unit, bracket_type, row, col, row_span, col_span } => {
                EngineEvent::Placed { unit, bracket_type, footprint: Footprint::new(row, col, row_span, col_span) }
            }
            Inbound::Remove { unit } => EngineEvent::Removed { unit },
            Inbound::Reshape { unit, row, col, row_span, col_span } => {
                EngineEvent::Reshaped { unit, footprint: Footprint::new(row, col, row_span, col_span) }
            }
            Inbound::Touch { unit, duration_ms } => EngineEvent::Touch { unit, duration_ms },
            Inbound::Command { text } => EngineEvent::Command {
                parsed: parse_command(&text, self.state.mode.parse_mode(), &self.wake_word),
            },
            Inbound::MediaSelected { unit, kind, uri, width, height, alt } => EngineEvent::MediaSelected {
                unit,
                media: MediaDescriptor { kind, uri, width, height, alt_text: alt },
            },
            Inbound::ReplaceText { unit, lines } => EngineEvent::TextReplaced { unit, lines },
        }
    }

    pub fn current_render(&self) -> Outbound {
        let page = render_page(&self.state);
        Outbound::Render { revision: page.revision, html: page.html }
    }

    pub fn effects_to_outbound(&self, effects: Vec<Effect>) -> Vec<Outbound> {
        effects
            .into_iter()
            .map(|e| match e {
                Effect::Vibrate { unit, pattern } => Outbound::Vibrate { unit, pattern },
                Effect::Utter(u) => u.into(),
                Effect::RenderUpdated { .. } => self.current_render(),
                Effect::OpenMediaPicker { unit } => Outbound::OpenMediaPicker { unit },
            })
            .collect()
    }

    pub fn handle(&mut self, msg: &Inbound) -> Vec<Outbound> {
        let event = self.to_event(msg);
        let effects = self.state.apply(event);
        self.effects_to_outbound(effects)
    }

    /// Parses and handles one raw line. Protocol errors leave the state
    /// untouched.
    pub fn handle_line(&mut self, line: &str) -> Result<Vec<Outbound>, WireError> {
        let msg = parse_inbound(line)?;
        Ok(self.handle(&msg))
    }
}

/// An assertion line in a session script.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Expectation {
    /// Some utterance produced by the preceding message matches every
    /// given field: exact `text`, `contains` substring, `template_id`.
    ExpectUtterance {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        text: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        contains: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        template_id: Option<String>,
    },
    /// No utterance so far in the session used this template.
    ExpectNoUtterance { template_id: String },
}

impl Expectation {
    fn matches(&self, u: &Utterance) -> bool {
        match self {
            Expectation::ExpectUtterance { text, contains, template_id } => {
                text.as_ref().is_none_or(|t| &u.text == t)
                    && contains.as_ref().is_none_or(|c| u.text.contains(c.as_str()))
                    && template_id.as_ref().is_none_or(|t| &u.template_id == t)
            }
            Expectation::ExpectNoUtterance { template_id } => &u.template_id == template_id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptStep {
    Send { line: usize, message: Inbound },
    Expect { line: usize, expectation: Expectation },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SessionScript {
    pub steps: Vec<ScriptStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("script line {line}: {message}")]
pub struct ScriptParseError {
    pub line: usize,
    pub message: String,
}

impl SessionScript {
    /// Parses JSON lines. Blank lines and lines starting with `#` are
    /// skipped; line numbers are 1-based.
    pub fn parse(text: &str) -> Result<Self, ScriptParseError> {
        let mut steps = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let err = |message: String| ScriptParseError { line, message };
            let (value, op) = op_of(trimmed).map_err(|e| err(e.to_string()))?;
            if op.starts_with("expect_") {
                let expectation = serde_json::from_value(value).map_err(|e| err(e.to_string()))?;
                steps.push(ScriptStep::Expect { line, expectation });
            } else {
                let message = parse_inbound(trimmed).map_err(|e| err(e.to_string()))?;
                steps.push(ScriptStep::Send { line, message });
            }
        }
        Ok(Self { steps })
    }

    pub fn from_messages(messages: impl IntoIterator<Item = Inbound>) -> Self {
        Self {
            steps: messages
                .into_iter()
                .enumerate()
                .map(|(i, message)| ScriptStep::Send { line: i + 1, message })
                .collect(),
        }
    }

    pub fn messages(&self) -> impl Iterator<Item = &Inbound> + '_ {
        self.steps.iter().filter_map(|s| match s {
            ScriptStep::Send { message, .. } => Some(message),
            ScriptStep::Expect { .. } => None,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            let line = match step {
                ScriptStep::Send { message, .. } => message.to_line(),
                ScriptStep::Expect { expectation, .. } => serde_json::to_string(expectation).expect("serializes"),
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssertionFailure {
    pub line: usize,
    pub expectation: Expectation,
}

#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub engine: Engine,
    pub outbound: Vec<Outbound>,
    pub failures: Vec<AssertionFailure>,
}

impl ReplayOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Transcript as plain text, one utterance per line.
    pub fn transcript_text(&self) -> String {
        self.engine.state.utterances().map(|u| format!("{}\n", u.text)).collect()
    }

    pub fn html(&self) -> String {
        render_page(&self.engine.state).html
    }
}

/// Runs a script headlessly from the given starting engine.
pub fn replay_with(mut engine: Engine, script: &SessionScript) -> ReplayOutcome {
    let mut outbound = Vec::new();
    let mut failures = Vec::new();
    let mut last: Vec<Utterance> = Vec::new();
    for step in &script.steps {
        match step {
            ScriptStep::Send { message, .. } => {
                let out = engine.handle(message);
                last = engine.state.transcript.last().map(|e| e.utterances.clone()).unwrap_or_default();
                outbound.extend(out);
            }
            ScriptStep::Expect { line, expectation } => {
                let ok = match expectation {
                    Expectation::ExpectUtterance { .. } => last.iter().any(|u| expectation.matches(u)),
                    Expectation::ExpectNoUtterance { .. } => !engine.state.utterances().any(|u| expectation.matches(u)),
                };
                if !ok {
                    failures.push(AssertionFailure { line: *line, expectation: expectation.clone() });
                }
            }
        }
    }
    ReplayOutcome { engine, outbound, failures }
}

pub fn replay(script: &SessionScript, config: GridConfig, wake_word: &str) -> ReplayOutcome {
    replay_with(Engine::new(config, wake_word), script)
}
