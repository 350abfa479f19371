//! Content bound to a bracket unit. It outlives the bracket's presence on
//! the board: lifting a bracket never discards what was entered into it.

use serde::{Deserialize, Serialize};

use crate::grid::BracketType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MediaKind {
    #[serde(alias = "Image")]
    Image,
    #[serde(alias = "Video")]
    Video,
}

impl MediaKind {
    pub fn bracket_type(self) -> BracketType {
        match self {
            MediaKind::Image => BracketType::Image,
            MediaKind::Video => BracketType::Video,
        }
    }

    pub fn lower(self) -> &'static str {
        self.bracket_type().lower()
    }

    pub fn title(self) -> &'static str {
        self.bracket_type().title()
    }
}

/// A media file as reported by the picker: referenced, never embedded.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediaDescriptor {
    pub kind: MediaKind,
    pub uri: String,
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub alt_text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(tag = "content", rename_all = "lowercase", deny_unknown_fields)]
pub enum ElementContent {
    #[default]
    Empty,
    Text {
        is_title: bool,
        lines: Vec<String>,
    },
    Media(MediaDescriptor),
}

impl ElementContent {
    pub fn is_empty(&self) -> bool {
        match self {
            ElementContent::Empty => true,
            ElementContent::Text { lines, .. } => lines.iter().all(String::is_empty),
            ElementContent::Media(_) => false,
        }
    }

    /// Whether this content may live in a bracket of the given type.
    pub fn fits_type(&self, bracket_type: BracketType) -> bool {
        match self {
            ElementContent::Empty => true,
            ElementContent::Text { .. } => bracket_type == BracketType::Text,
            ElementContent::Media(m) => m.kind.bracket_type() == bracket_type,
        }
    }

    pub fn text_lines(&self) -> Option<&[String]> {
        match self {
            ElementContent::Text { lines, .. } => Some(lines),
            _ => None,
        }
    }
}

/// Characters counted against a bracket's capacity: every code point,
/// spaces included, structural line breaks excluded.
pub fn char_count(lines: &[String]) -> usize {
    lines.iter().map(|l| l.chars().count()).sum()
}

pub fn word_count(lines: &[String]) -> usize {
    lines.iter().map(|l| l.split_whitespace().count()).sum()
}

/// Replaces any line-break characters so a stored line stays one line.
pub fn sanitize_line(raw: &str) -> String {
    raw.chars().map(|c| if matches!(c, '\n' | '\r' | '\u{2028}' | '\u{2029}') { ' ' } else { c }).collect()
}
