//! Text command grammar standing in for the speech channel.
//!
//! Matching is strict: the line is trimmed, runs of whitespace collapse to
//! one space and case is folded, then keywords must match exactly.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "command", content = "text", rename_all = "snake_case")]
pub enum Command {
    Title,
    Text,
    NextLine,
    Stop,
    Media,
    Check,
    DictationChunk(String),
}

impl Command {
    pub const KEYWORDS: [(&'static str, Command); 6] = [
        ("title", Command::Title),
        ("text", Command::Text),
        ("next line", Command::NextLine),
        ("stop", Command::Stop),
        ("media", Command::Media),
        ("check", Command::Check),
    ];

    pub fn keyword(&self) -> Option<&'static str> {
        Self::KEYWORDS.iter().find(|(_, c)| c == self).map(|(k, _)| *k)
    }
}

/// What the parser needs to know about the session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParseMode {
    Idle,
    Dictating,
    AwaitingMedia,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "reason", content = "verb", rename_all = "snake_case")]
pub enum NotACommand {
    Empty,
    MissingWakeWord,
    UnknownVerb(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parsed {
    Command(Command),
    NotACommand(NotACommand),
}

fn normalize(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Strips a leading wake word from an already normalized line.
fn strip_wake<'a>(line: &'a str, wake: &str) -> Option<&'a str> {
    if wake.is_empty() {
        return Some(line);
    }
    let rest = line.strip_prefix(wake)?;
    if rest.is_empty() {
        Some(rest)
    } else {
        rest.strip_prefix(' ')
    }
}

fn keyword(verb: &str) -> Option<Command> {
    Command::KEYWORDS.iter().find(|(k, _)| *k == verb).map(|(_, c)| c.clone())
}

pub fn parse_command(raw: &str, mode: ParseMode, wake_word: &str) -> Parsed {
    let line = normalize(raw);
    if line.is_empty() {
        return Parsed::NotACommand(NotACommand::Empty);
    }
    let wake = normalize(wake_word);
    match mode {
        ParseMode::Dictating => {
            let verb = strip_wake(&line, &wake).unwrap_or(&line);
            match keyword(verb) {
                Some(c @ (Command::NextLine | Command::Stop)) => Parsed::Command(c),
                _ => Parsed::Command(Command::DictationChunk(raw.trim().to_string())),
            }
        }
        ParseMode::Idle | ParseMode::AwaitingMedia => match strip_wake(&line, &wake) {
            None => Parsed::NotACommand(NotACommand::MissingWakeWord),
            Some(verb) => match keyword(verb) {
                Some(c) => Parsed::Command(c),
                None => Parsed::NotACommand(NotACommand::UnknownVerb(verb.to_string())),
            },
        },
    }
}

/// A line that parses back to `cmd`, together with the mode to parse it in.
pub fn render_canonical(cmd: &Command, wake_word: &str) -> (String, ParseMode) {
    match cmd {
        Command::DictationChunk(text) => (text.clone(), ParseMode::Dictating),
        Command::NextLine | Command::Stop => (cmd.keyword().unwrap_or_default().to_string(), ParseMode::Dictating),
        other => (format!("{} {}", wake_word, other.keyword().unwrap_or_default()), ParseMode::Idle),
    }
}
