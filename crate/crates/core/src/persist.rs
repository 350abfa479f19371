//! Project files: canonical JSON (`.gridsite.json`, format version 1).
//!
//! Object keys are emitted in sorted order with fixed indentation, so
//! saving the same state twice yields identical bytes. Loading validates
//! the document against the same rules the engine enforces and reports
//! violations with a JSON-pointer path.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::content::ElementContent;
use crate::grid::{Board, BracketType, Footprint, GridConfig, GridError, UnitId};
use crate::session::{Mode, SessionState, TranscriptEntry};

pub const FORMAT_VERSION: u64 = 1;
pub const PROJECT_EXTENSION: &str = ".gridsite.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketRecord {
    pub unit_id: UnitId,
    #[serde(rename = "type")]
    pub bracket_type: BracketType,
    pub footprint: Footprint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectFile {
    pub format_version: u64,
    pub grid: GridConfig,
    pub brackets: Vec<BracketRecord>,
    #[serde(default)]
    pub content_memory: BTreeMap<UnitId, ElementContent>,
    #[serde(default)]
    pub transcript: Vec<TranscriptEntry>,
    #[serde(default)]
    pub selected: Option<UnitId>,
    #[serde(default = "idle")]
    pub mode: Mode,
    #[serde(default)]
    pub revision: u64,
}

fn idle() -> Mode {
    Mode::Idle
}

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("unknown project format version {0}")]
    UnknownVersion(u64),
    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn violation(path: impl Into<String>, message: impl Into<String>) -> PersistError {
    PersistError::SchemaViolation { path: path.into(), message: message.into() }
}

impl ProjectFile {
    pub fn from_state(state: &SessionState) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            grid: state.config().clone(),
            brackets: state
                .board
                .brackets()
                .map(|(id, b)| BracketRecord { unit_id: id.clone(), bracket_type: b.bracket_type, footprint: b.footprint })
                .collect(),
            content_memory: state.content.clone(),
            transcript: state.transcript.clone(),
            selected: state.selected.clone(),
            mode: state.mode.clone(),
            revision: state.revision,
        }
    }

    /// Checks every engine invariant and builds the session.
    pub fn into_state(self) -> Result<SessionState, PersistError> {
        self.grid.validate().map_err(|e| violation("/grid", e.to_string()))?;
        let mut board = Board::new(self.grid.clone());
        for (i, rec) in self.brackets.iter().enumerate() {
            board.place(rec.unit_id.clone(), rec.bracket_type, rec.footprint).map_err(|e| match e {
                GridError::Overlap(others) => {
                    let names: Vec<&str> = others.iter().map(UnitId::as_str).collect();
                    violation(
                        format!("/brackets/{i}"),
                        format!("bracket {} overlaps {}", rec.unit_id, names.join(", ")),
                    )
                }
                GridError::DuplicateUnit(u) => violation(format!("/brackets/{i}/unit_id"), format!("duplicate unit {u}")),
                other => violation(format!("/brackets/{i}/footprint"), other.to_string()),
            })?;
        }
        for (id, content) in &self.content_memory {
            let base = format!("/content_memory/{}", pointer_escape(id.as_str()));
            match content {
                ElementContent::Text { lines, .. } => {
                    if let Some(j) = lines.iter().position(|l| l.contains(['\n', '\r'])) {
                        return Err(violation(format!("{base}/lines/{j}"), "line contains a line break"));
                    }
                }
                ElementContent::Media(m) => {
                    if m.width == 0 {
                        return Err(violation(format!("{base}/width"), "must be positive"));
                    }
                    if m.height == 0 {
                        return Err(violation(format!("{base}/height"), "must be positive"));
                    }
                }
                ElementContent::Empty => {}
            }
            if let Some(b) = board.get(id) {
                if !content.fits_type(b.bracket_type) {
                    return Err(violation(base, format!("content does not fit a {} bracket", b.bracket_type)));
                }
            }
        }
        if let Some(sel) = &self.selected {
            if !board.contains(sel) {
                return Err(violation("/selected", format!("unit {sel} is not on the board")));
            }
        }
        match &self.mode {
            Mode::Idle => {}
            Mode::AwaitingMedia { target } | Mode::Dictating { target, .. } if !board.contains(target) => {
                return Err(violation("/mode/target", format!("unit {target} is not on the board")));
            }
            Mode::Dictating { lines, .. } if lines.is_empty() => {
                return Err(violation("/mode/lines", "dictation buffer needs at least one line"));
            }
            _ => {}
        }
        let mut content = self.content_memory;
        for (id, _) in board.brackets() {
            content.entry(id.clone()).or_default();
        }
        Ok(SessionState {
            board,
            content,
            selected: self.selected,
            mode: self.mode,
            transcript: self.transcript,
            revision: self.revision,
        })
    }
}

fn pointer_escape(segment: &str) -> String {
    segment.replace('~', "~0").replace('/', "~1")
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&pointer_escape(key)),
            Segment::Enum { variant } => out.push_str(&pointer_escape(variant)),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

pub fn save_project(state: &SessionState) -> Vec<u8> {
    let value = serde_json::to_value(ProjectFile::from_state(state)).expect("project file serializes");
    let mut bytes = serde_json::to_vec_pretty(&value).expect("json value serializes");
    bytes.push(b'\n');
    bytes
}

pub fn load_project(bytes: &[u8]) -> Result<SessionState, PersistError> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| violation("/", e.to_string()))?;
    let version = value
        .get("format_version")
        .ok_or_else(|| violation("/format_version", "missing"))?
        .as_u64()
        .ok_or_else(|| violation("/format_version", "must be a non-negative integer"))?;
    if version != FORMAT_VERSION {
        return Err(PersistError::UnknownVersion(version));
    }
    let file: ProjectFile = serde_path_to_error::deserialize(value)
        .map_err(|e| violation(json_pointer(e.path()), e.inner().to_string()))?;
    file.into_state()
}

/// Writes to a sibling temporary file and renames it over `path`, so the
/// destination is always either the old or the new complete file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn save_project_to_path(state: &SessionState, path: &Path) -> Result<(), PersistError> {
    write_atomic(path, &save_project(state))?;
    Ok(())
}

pub fn load_project_from_path(path: &Path) -> Result<SessionState, PersistError> {
    load_project(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::command::{Command, Parsed};
    use crate::content::{MediaDescriptor, MediaKind};
    use crate::session::EngineEvent;

    fn sample_state() -> SessionState {
        let mut s = SessionState::default();
        for ev in [
            EngineEvent::Placed { unit: "u1".into(), bracket_type: BracketType::Text, footprint: Footprint::new(1, 3, 2, 8) },
            EngineEvent::Touch { unit: "u1".into(), duration_ms: 200 },
            EngineEvent::Command { parsed: Parsed::Command(Command::Title) },
            EngineEvent::Command { parsed: Parsed::Command(Command::DictationChunk("Hi".into())) },
            EngineEvent::Command { parsed: Parsed::Command(Command::Stop) },
            EngineEvent::Placed { unit: "img".into(), bracket_type: BracketType::Image, footprint: Footprint::new(3, 1, 4, 4) },
            EngineEvent::Touch { unit: "img".into(), duration_ms: 200 },
            EngineEvent::Command { parsed: Parsed::Command(Command::Media) },
            EngineEvent::MediaSelected {
                unit: "img".into(),
                media: MediaDescriptor { kind: MediaKind::Image, uri: "a.png".into(), width: 3, height: 2, alt_text: Some("A".into()) },
            },
            EngineEvent::Command { parsed: Parsed::Command(Command::Check) },
        ] {
            s.apply(ev);
        }
        s
    }

    #[test]
    fn empty_state_saves_minimal_document() {
        let bytes = save_project(&SessionState::default());
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["format_version"], 1);
        assert_eq!(v["grid"]["rows"], 16);
        assert_eq!(v["grid"]["cols"], 12);
        assert_eq!(v["brackets"], serde_json::json!([]));
        assert_eq!(load_project(&bytes).unwrap(), SessionState::default());
    }

    #[test]
    fn round_trip_and_byte_stability() {
        let s = sample_state();
        let bytes = save_project(&s);
        let loaded = load_project(&bytes).unwrap();
        assert_eq!(loaded, s);
        assert_eq!(save_project(&loaded), bytes);
    }

    #[test]
    fn keys_are_sorted() {
        let text = String::from_utf8(save_project(&SessionState::default())).unwrap();
        let top: Vec<usize> = ["\"brackets\"", "\"content_memory\"", "\"format_version\"", "\"grid\"", "\"mode\""]
            .iter()
            .map(|k| text.find(k).unwrap())
            .collect();
        assert!(top.windows(2).all(|w| w[0] < w[1]), "{text}");
    }

    #[test]
    fn unknown_version_is_rejected() {
        let mut v: serde_json::Value = serde_json::from_slice(&save_project(&SessionState::default())).unwrap();
        v["format_version"] = serde_json::json!(7);
        let err = load_project(v.to_string().as_bytes()).unwrap_err();
        assert!(matches!(err, PersistError::UnknownVersion(7)));
    }

    #[test]
    fn overlapping_brackets_name_both_units() {
        let mut v: serde_json::Value = serde_json::from_slice(&save_project(&SessionState::default())).unwrap();
        v["brackets"] = serde_json::json!([
            {"unit_id": "a", "type": "text", "footprint": {"row": 1, "col": 1, "row_span": 2, "col_span": 4}},
            {"unit_id": "b", "type": "image", "footprint": {"row": 2, "col": 3, "row_span": 2, "col_span": 2}}
        ]);
        match load_project(v.to_string().as_bytes()) {
            Err(PersistError::SchemaViolation { path, message }) => {
                assert_eq!(path, "/brackets/1");
                assert!(message.contains('a') && message.contains('b'), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_violations_carry_pointer_paths() {
        let mut v: serde_json::Value = serde_json::from_slice(&save_project(&sample_state())).unwrap();
        v["brackets"][0]["footprint"]["row"] = serde_json::json!("one");
        match load_project(v.to_string().as_bytes()) {
            Err(PersistError::SchemaViolation { path, .. }) => assert_eq!(path, "/brackets/0/footprint/row"),
            other => panic!("unexpected {other:?}"),
        }

        let mut v: serde_json::Value = serde_json::from_slice(&save_project(&sample_state())).unwrap();
        v["content_memory"]["img"]["width"] = serde_json::json!(0);
        match load_project(v.to_string().as_bytes()) {
            Err(PersistError::SchemaViolation { path, .. }) => assert_eq!(path, "/content_memory/img/width"),
            other => panic!("unexpected {other:?}"),
        }

        let mut v: serde_json::Value = serde_json::from_slice(&save_project(&sample_state())).unwrap();
        v["selected"] = serde_json::json!("ghost");
        match load_project(v.to_string().as_bytes()) {
            Err(PersistError::SchemaViolation { path, .. }) => assert_eq!(path, "/selected"),
            other => panic!("unexpected {other:?}"),
        }

        assert!(matches!(load_project(b"{not json"), Err(PersistError::SchemaViolation { .. })));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("demo.gridsite.json");
        save_project_to_path(&SessionState::default(), &path).unwrap();
        save_project_to_path(&sample_state(), &path).unwrap();
        assert_eq!(load_project_from_path(&path).unwrap(), sample_state());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
