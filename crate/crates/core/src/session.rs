//! The interaction state machine.
//!
//! [`SessionState::apply`] is the single reducer: it consumes one
//! [`EngineEvent`], updates the state and returns the effects to perform.
//! Rejected events never change anything except the transcript; they come
//! back as an error utterance so the user always hears what went wrong.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::command::{
    compose_check, compose_dictation_chunk, compose_dictation_start, compose_error, compose_expansion,
    compose_image_fit, compose_media_picker, compose_notice, compose_placement, compose_readback, compose_removal,
    compose_reshape, compose_text_fit, compose_text_replaced, Command, NotACommand, ParseMode, Parsed, Utterance,
};
use crate::content::{char_count, sanitize_line, ElementContent, MediaDescriptor, MediaKind};
use crate::fit::{analyze_expansion, analyze_image, analyze_text, page_check, text_capacity, FitKind};
use crate::grid::{Board, BracketType, Footprint, GridConfig, GridError, UnitId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    Idle,
    /// Dictation into `target`. `lines` is the uncommitted buffer; it always
    /// holds at least one (possibly empty) line.
    Dictating { target: UnitId, as_title: bool, lines: Vec<String> },
    AwaitingMedia { target: UnitId },
}

impl Mode {
    pub fn parse_mode(&self) -> ParseMode {
        match self {
            Mode::Idle => ParseMode::Idle,
            Mode::Dictating { .. } => ParseMode::Dictating,
            Mode::AwaitingMedia { .. } => ParseMode::AwaitingMedia,
        }
    }

    pub fn target(&self) -> Option<&UnitId> {
        match self {
            Mode::Idle => None,
            Mode::Dictating { target, .. } | Mode::AwaitingMedia { target } => Some(target),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EngineEvent {
    Placed { unit: UnitId, bracket_type: BracketType, footprint: Footprint },
    Removed { unit: UnitId },
    Reshaped { unit: UnitId, footprint: Footprint },
    /// A completed touch; the board measures how long it was held.
    Touch { unit: UnitId, duration_ms: u64 },
    Command { parsed: Parsed },
    MediaSelected { unit: UnitId, media: MediaDescriptor },
    /// Keyboard refinement: replaces the text of a bracket wholesale.
    TextReplaced { unit: UnitId, lines: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VibrationPattern {
    Select,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "effect", rename_all = "snake_case")]
pub enum Effect {
    Vibrate { unit: UnitId, pattern: VibrationPattern },
    Utter(Utterance),
    RenderUpdated { revision: u64 },
    OpenMediaPicker { unit: UnitId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub event: EngineEvent,
    pub utterances: Vec<Utterance>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("unit {unit} holds content that cannot go into a {bracket_type} bracket")]
    TypeChanged { unit: UnitId, content: ElementContent, bracket_type: BracketType },
    #[error("no bracket is selected")]
    NoSelection,
    #[error("command {command:?} does not apply to a {actual} bracket")]
    WrongBracketType { command: Command, actual: BracketType },
    #[error("not dictating")]
    NotDictating,
    #[error("already dictating")]
    AlreadyDictating,
    #[error("no media was requested for {0}")]
    NotAwaitingMedia(UnitId),
    #[error("{media_kind:?} media cannot go into a {bracket_type} bracket")]
    MediaKindMismatch { media_kind: MediaKind, bracket_type: BracketType },
    #[error("media dimensions must be positive")]
    NonPositiveDimensions,
    #[error("unknown command {0:?}")]
    UnknownCommand(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionState {
    pub board: Board,
    /// Content per unit, including units that are currently lifted.
    pub content: BTreeMap<UnitId, ElementContent>,
    pub selected: Option<UnitId>,
    pub mode: Mode,
    pub transcript: Vec<TranscriptEntry>,
    /// Page revision; bumps whenever the rendered page would change.
    pub revision: u64,
}

impl Default for SessionState {
    fn default() -> Self {
        Self::new(GridConfig::default())
    }
}

/// Pure form of the reducer.
pub fn handle_event(state: &SessionState, event: &EngineEvent) -> (SessionState, Vec<Effect>) {
    let mut next = state.clone();
    let effects = next.apply(event.clone());
    (next, effects)
}

impl SessionState {
    pub fn new(config: GridConfig) -> Self {
        Self {
            board: Board::new(config),
            content: BTreeMap::new(),
            selected: None,
            mode: Mode::Idle,
            transcript: Vec::new(),
            revision: 0,
        }
    }

    pub fn config(&self) -> &GridConfig {
        self.board.config()
    }

    pub fn content_of(&self, unit: &UnitId) -> ElementContent {
        self.content.get(unit).cloned().unwrap_or_default()
    }

    /// All utterances spoken so far, in order.
    pub fn utterances(&self) -> impl Iterator<Item = &Utterance> + '_ {
        self.transcript.iter().flat_map(|e| e.utterances.iter())
    }

    pub fn apply(&mut self, event: EngineEvent) -> Vec<Effect> {
        let effects = match self.dispatch(&event) {
            Ok(effects) => effects,
            Err(err) => vec![Effect::Utter(compose_error(&err, &self.board))],
        };
        let utterances = effects
            .iter()
            .filter_map(|e| match e {
                Effect::Utter(u) => Some(u.clone()),
                _ => None,
            })
            .collect();
        self.transcript.push(TranscriptEntry { event, utterances });
        effects
    }

    fn dispatch(&mut self, event: &EngineEvent) -> Result<Vec<Effect>, EngineError> {
        match event {
            EngineEvent::Placed { unit, bracket_type, footprint } => self.on_placed(unit, *bracket_type, *footprint),
            EngineEvent::Removed { unit } => self.on_removed(unit),
            EngineEvent::Reshaped { unit, footprint } => self.on_reshaped(unit, *footprint),
            EngineEvent::Touch { unit, duration_ms } => self.on_touch(unit, *duration_ms),
            EngineEvent::Command { parsed } => self.on_command(parsed),
            EngineEvent::MediaSelected { unit, media } => self.on_media_selected(unit, media),
            EngineEvent::TextReplaced { unit, lines } => self.on_text_replaced(unit, lines),
        }
    }

    fn bump(&mut self) -> Effect {
        self.revision += 1;
        Effect::RenderUpdated { revision: self.revision }
    }

    fn on_placed(&mut self, unit: &UnitId, t: BracketType, fp: Footprint) -> Result<Vec<Effect>, EngineError> {
        if let Some(stored) = self.content.get(unit) {
            if !stored.fits_type(t) {
                return Err(EngineError::TypeChanged { unit: unit.clone(), content: stored.clone(), bracket_type: t });
            }
        }
        self.board.place(unit.clone(), t, fp)?;
        self.content.entry(unit.clone()).or_default();
        Ok(vec![Effect::Utter(compose_placement(t, &fp)), self.bump()])
    }

    fn on_removed(&mut self, unit: &UnitId) -> Result<Vec<Effect>, EngineError> {
        let bracket = self.board.remove(unit)?;
        let mut effects = vec![Effect::Utter(compose_removal(bracket.bracket_type, &bracket.footprint))];
        if self.selected.as_ref() == Some(unit) {
            self.selected = None;
        }
        if self.mode.target() == Some(unit) {
            match std::mem::replace(&mut self.mode, Mode::Idle) {
                Mode::Dictating { target, as_title, lines } => {
                    self.commit_dictation(&target, as_title, lines);
                    effects.push(Effect::Utter(compose_notice("dictation.saved_on_removal")));
                }
                Mode::AwaitingMedia { .. } => {
                    effects.push(Effect::Utter(compose_notice("media.cancelled_on_removal")));
                }
                Mode::Idle => {}
            }
        }
        effects.push(self.bump());
        Ok(effects)
    }

    fn on_reshaped(&mut self, unit: &UnitId, fp: Footprint) -> Result<Vec<Effect>, EngineError> {
        let bracket = *self.board.get(unit).ok_or_else(|| GridError::UnknownUnit(unit.clone()))?;
        if bracket.footprint == fp {
            return Ok(vec![Effect::Utter(compose_reshape(bracket.bracket_type, &fp, false))]);
        }
        self.board.reshape(unit, fp)?;
        let mut effects = vec![Effect::Utter(compose_reshape(bracket.bracket_type, &fp, true))];
        effects.extend(self.fit_feedback(unit).into_iter().map(Effect::Utter));
        effects.push(self.bump());
        Ok(effects)
    }

    fn on_touch(&mut self, unit: &UnitId, duration_ms: u64) -> Result<Vec<Effect>, EngineError> {
        let bracket = *self.board.get(unit).ok_or_else(|| GridError::UnknownUnit(unit.clone()))?;
        self.selected = Some(unit.clone());
        let mut effects = vec![Effect::Vibrate { unit: unit.clone(), pattern: VibrationPattern::Select }];
        if duration_ms >= self.config().long_press_ms {
            effects.push(Effect::Utter(compose_readback(&bracket, &self.content_of(unit))));
        }
        Ok(effects)
    }

    fn on_command(&mut self, parsed: &Parsed) -> Result<Vec<Effect>, EngineError> {
        let cmd = match parsed {
            Parsed::Command(c) => c,
            Parsed::NotACommand(NotACommand::Empty) => {
                return Ok(vec![Effect::Utter(compose_notice("notice.empty_command"))])
            }
            Parsed::NotACommand(NotACommand::MissingWakeWord) => {
                return Ok(vec![Effect::Utter(compose_notice("notice.missing_wake_word"))])
            }
            Parsed::NotACommand(NotACommand::UnknownVerb(v)) => return Err(EngineError::UnknownCommand(v.clone())),
        };
        match cmd {
            Command::Title => self.begin_dictation(true),
            Command::Text => self.begin_dictation(false),
            Command::NextLine => self.new_line(),
            Command::Stop => match self.mode {
                Mode::Dictating { .. } => Ok(self.end_dictation()),
                _ => Ok(vec![Effect::Utter(compose_notice("notice.nothing_to_stop"))]),
            },
            Command::Media => self.request_media(),
            Command::Check => Ok(vec![Effect::Utter(self.check_utterance())]),
            Command::DictationChunk(text) => self.append_dictation(text),
        }
    }

    fn selected_bracket(&self) -> Result<(UnitId, BracketType), EngineError> {
        let unit = self.selected.clone().ok_or(EngineError::NoSelection)?;
        let bracket = self.board.get(&unit).ok_or_else(|| GridError::UnknownUnit(unit.clone()))?;
        Ok((unit, bracket.bracket_type))
    }

    fn begin_dictation(&mut self, as_title: bool) -> Result<Vec<Effect>, EngineError> {
        if matches!(self.mode, Mode::Dictating { .. }) {
            return Err(EngineError::AlreadyDictating);
        }
        let (target, t) = self.selected_bracket()?;
        if t != BracketType::Text {
            let command = if as_title { Command::Title } else { Command::Text };
            return Err(EngineError::WrongBracketType { command, actual: t });
        }
        self.mode = Mode::Dictating { target, as_title, lines: vec![String::new()] };
        Ok(vec![Effect::Utter(compose_dictation_start(as_title))])
    }

    fn append_dictation(&mut self, text: &str) -> Result<Vec<Effect>, EngineError> {
        let Mode::Dictating { lines, .. } = &mut self.mode else {
            return Err(EngineError::NotDictating);
        };
        let chunk = sanitize_line(text.trim());
        // buffer invariant: never empty
        let line = lines.last_mut().expect("dictation buffer has a line");
        if !line.is_empty() && !chunk.is_empty() {
            line.push(' ');
        }
        line.push_str(&chunk);
        Ok(vec![Effect::Utter(compose_dictation_chunk(&chunk))])
    }

    fn new_line(&mut self) -> Result<Vec<Effect>, EngineError> {
        let Mode::Dictating { lines, .. } = &mut self.mode else {
            return Err(EngineError::NotDictating);
        };
        lines.push(String::new());
        Ok(vec![Effect::Utter(compose_notice("dictation.next_line"))])
    }

    fn end_dictation(&mut self) -> Vec<Effect> {
        let Mode::Dictating { target, as_title, lines } = std::mem::replace(&mut self.mode, Mode::Idle) else {
            return Vec::new();
        };
        self.commit_dictation(&target, as_title, lines);
        let mut effects: Vec<Effect> = self.fit_feedback(&target).into_iter().map(Effect::Utter).collect();
        effects.push(self.bump());
        effects
    }

    /// Titles replace the bracket's text; plain text appends to an existing
    /// paragraph.
    fn commit_dictation(&mut self, target: &UnitId, as_title: bool, mut lines: Vec<String>) {
        if lines.len() == 1 && lines[0].is_empty() {
            lines.clear();
        }
        let committed = match self.content.remove(target) {
            Some(ElementContent::Text { is_title: false, lines: mut old }) if !as_title && !old.is_empty() => {
                old.extend(lines);
                old
            }
            _ => lines,
        };
        self.content.insert(target.clone(), ElementContent::Text { is_title: as_title, lines: committed });
    }

    fn request_media(&mut self) -> Result<Vec<Effect>, EngineError> {
        if matches!(self.mode, Mode::Dictating { .. }) {
            return Err(EngineError::AlreadyDictating);
        }
        let (target, t) = self.selected_bracket()?;
        if !t.is_media() {
            return Err(EngineError::WrongBracketType { command: Command::Media, actual: t });
        }
        self.mode = Mode::AwaitingMedia { target: target.clone() };
        Ok(vec![Effect::OpenMediaPicker { unit: target }, Effect::Utter(compose_media_picker(t))])
    }

    fn on_media_selected(&mut self, unit: &UnitId, media: &MediaDescriptor) -> Result<Vec<Effect>, EngineError> {
        match &self.mode {
            Mode::AwaitingMedia { target } if target == unit => {}
            _ => return Err(EngineError::NotAwaitingMedia(unit.clone())),
        }
        let bracket = *self.board.get(unit).ok_or_else(|| GridError::UnknownUnit(unit.clone()))?;
        if media.kind.bracket_type() != bracket.bracket_type {
            return Err(EngineError::MediaKindMismatch { media_kind: media.kind, bracket_type: bracket.bracket_type });
        }
        if media.width == 0 || media.height == 0 {
            return Err(EngineError::NonPositiveDimensions);
        }
        self.content.insert(unit.clone(), ElementContent::Media(media.clone()));
        self.mode = Mode::Idle;
        let mut effects: Vec<Effect> = self.fit_feedback(unit).into_iter().map(Effect::Utter).collect();
        effects.push(self.bump());
        Ok(effects)
    }

    fn on_text_replaced(&mut self, unit: &UnitId, lines: &[String]) -> Result<Vec<Effect>, EngineError> {
        let bracket = self.board.get(unit).ok_or_else(|| GridError::UnknownUnit(unit.clone()))?;
        if bracket.bracket_type != BracketType::Text {
            return Err(EngineError::WrongBracketType { command: Command::Text, actual: bracket.bracket_type });
        }
        let is_title = matches!(self.content.get(unit), Some(ElementContent::Text { is_title: true, .. }));
        let lines: Vec<String> = lines.iter().map(|l| sanitize_line(l)).collect();
        let mut effects = vec![Effect::Utter(compose_text_replaced(&lines))];
        self.content.insert(unit.clone(), ElementContent::Text { is_title, lines });
        effects.extend(self.fit_feedback(unit).into_iter().map(Effect::Utter));
        effects.push(self.bump());
        Ok(effects)
    }

    /// Fit utterances for a bracket's current content. Overflowing text also
    /// gets advice on where the bracket could grow.
    fn fit_feedback(&self, unit: &UnitId) -> Vec<Utterance> {
        let Some(bracket) = self.board.get(unit) else { return Vec::new() };
        let config = self.config();
        match self.content.get(unit) {
            Some(ElementContent::Text { lines, .. }) => {
                let cap = text_capacity(&bracket.footprint, config);
                let diag = analyze_text(char_count(lines) as u32, cap, config);
                let mut out: Vec<Utterance> = compose_text_fit(&diag).into_iter().collect();
                if let FitKind::TextOverflow { current, max, .. } = diag {
                    let needed = (f64::from(current - max) / config.text_density).ceil() as u32;
                    if let Ok(advice) = analyze_expansion(&self.board, unit, needed.max(1)) {
                        out.extend(compose_expansion(&advice));
                    }
                }
                out
            }
            Some(ElementContent::Media(m)) => analyze_image(m.width, m.height, &bracket.footprint)
                .ok()
                .and_then(|diag| compose_image_fit(&diag, m.kind).ok())
                .into_iter()
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn check_utterance(&self) -> Utterance {
        let summary = page_check(&self.board, &self.content, self.config());
        compose_check(&summary, &self.board)
    }

    /// Structural invariants every reachable state satisfies.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen = BTreeSet::new();
        for (id, b) in self.board.brackets() {
            b.footprint.check(self.config()).map_err(|e| format!("{id}: {e}"))?;
            for cell in b.footprint.cells() {
                if !seen.insert(cell) {
                    return Err(format!("cell {cell:?} covered twice"));
                }
            }
            if !self.content_of(id).fits_type(b.bracket_type) {
                return Err(format!("{id}: content does not match bracket type"));
            }
        }
        if let Some(sel) = &self.selected {
            if !self.board.contains(sel) {
                return Err(format!("selected unit {sel} is not on the board"));
            }
        }
        if let Some(target) = self.mode.target() {
            if !self.board.contains(target) {
                return Err(format!("mode target {target} is not on the board"));
            }
        }
        if let Mode::Dictating { lines, .. } = &self.mode {
            if lines.is_empty() {
                return Err("dictation buffer has no line".into());
            }
        }
        for (id, c) in &self.content {
            if let ElementContent::Text { lines, .. } = c {
                if lines.iter().any(|l| l.contains(['\n', '\r'])) {
                    return Err(format!("{id}: stored line contains a line break"));
                }
            }
            if let ElementContent::Media(m) = c {
                if m.width == 0 || m.height == 0 {
                    return Err(format!("{id}: media without size"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::command::Severity;

    fn u(s: &str) -> UnitId {
        UnitId::new(s)
    }

    fn cmd(c: Command) -> EngineEvent {
        EngineEvent::Command { parsed: Parsed::Command(c) }
    }

    fn chunk(s: &str) -> EngineEvent {
        cmd(Command::DictationChunk(s.into()))
    }

    fn place(unit: &str, t: BracketType, fp: Footprint) -> EngineEvent {
        EngineEvent::Placed { unit: u(unit), bracket_type: t, footprint: fp }
    }

    fn touch(unit: &str, ms: u64) -> EngineEvent {
        EngineEvent::Touch { unit: u(unit), duration_ms: ms }
    }

    fn texts(effects: &[Effect]) -> Vec<String> {
        effects
            .iter()
            .filter_map(|e| match e {
                Effect::Utter(u) => Some(u.text.clone()),
                _ => None,
            })
            .collect()
    }

    fn ids(effects: &[Effect]) -> Vec<String> {
        effects
            .iter()
            .filter_map(|e| match e {
                Effect::Utter(u) => Some(u.template_id.clone()),
                _ => None,
            })
            .collect()
    }

    fn walkthrough_state() -> SessionState {
        let mut s = SessionState::default();
        s.apply(place("u1", BracketType::Text, Footprint::new(1, 3, 2, 8)));
        s
    }

    #[test]
    fn placement_announces_and_renders() {
        let (s, effects) = handle_event(&SessionState::default(), &place("u1", BracketType::Text, Footprint::new(1, 3, 2, 8)));
        assert_eq!(
            effects,
            vec![
                Effect::Utter(compose_placement(BracketType::Text, &Footprint::new(1, 3, 2, 8))),
                Effect::RenderUpdated { revision: 1 }
            ]
        );
        assert_eq!(texts(&effects), vec!["Text bracket detected, size 2 by 8, location at row 1 and column 3."]);
        assert!(s.board.contains(&u("u1")));
        assert_eq!(s.content_of(&u("u1")), ElementContent::Empty);
    }

    #[test]
    fn short_touch_selects_with_vibration_only() {
        let mut s = walkthrough_state();
        let effects = s.apply(touch("u1", 500));
        assert_eq!(effects, vec![Effect::Vibrate { unit: u("u1"), pattern: VibrationPattern::Select }]);
        assert_eq!(s.selected, Some(u("u1")));
    }

    #[test]
    fn long_press_reads_back() {
        let mut s = walkthrough_state();
        let effects = s.apply(touch("u1", 3200));
        assert!(matches!(effects[0], Effect::Vibrate { .. }));
        assert!(texts(&effects)[0].contains("Text bracket, size 2 by 8"));
        assert!(texts(&effects)[0].contains("No text entered."));

        let mut s = walkthrough_state();
        let at = s.apply(touch("u1", 3000));
        assert_eq!(ids(&at), vec!["readback.empty_text"]);
        let below = s.apply(touch("u1", 2999));
        assert!(ids(&below).is_empty());
    }

    #[test]
    fn touch_unknown_unit_is_error_and_state_unchanged() {
        let s = walkthrough_state();
        let (next, effects) = handle_event(&s, &touch("zz", 100));
        assert_eq!(ids(&effects), vec!["error.unknown_unit"]);
        assert_eq!(next.board, s.board);
        assert_eq!(next.selected, s.selected);
        assert_eq!(next.transcript.len(), s.transcript.len() + 1);
    }

    #[test]
    fn stop_while_idle_is_a_notice() {
        let mut s = walkthrough_state();
        s.apply(touch("u1", 100));
        let (next, effects) = handle_event(&s, &cmd(Command::Stop));
        assert_eq!(ids(&effects), vec!["notice.nothing_to_stop"]);
        assert_eq!(next.mode, s.mode);
        assert_eq!(next.content, s.content);
    }

    #[test]
    fn dictation_commits_on_stop() {
        let mut s = walkthrough_state();
        s.apply(touch("u1", 100));
        s.apply(cmd(Command::Title));
        assert_eq!(s.mode, Mode::Dictating { target: u("u1"), as_title: true, lines: vec![String::new()] });
        s.apply(chunk("Welcome"));
        let effects = s.apply(cmd(Command::Stop));
        assert_eq!(s.content_of(&u("u1")), ElementContent::Text { is_title: true, lines: vec!["Welcome".into()] });
        assert_eq!(s.mode, Mode::Idle);
        assert_eq!(ids(&effects), vec!["text.underflow"]);
        assert!(effects.iter().any(|e| matches!(e, Effect::RenderUpdated { .. })));
    }

    #[test]
    fn chunks_join_and_next_line_preserves_empty_lines() {
        let mut s = walkthrough_state();
        s.apply(touch("u1", 100));
        s.apply(cmd(Command::Text));
        s.apply(chunk("Hello"));
        s.apply(chunk("world"));
        s.apply(cmd(Command::NextLine));
        s.apply(cmd(Command::NextLine));
        s.apply(chunk("Again"));
        s.apply(cmd(Command::Stop));
        assert_eq!(
            s.content_of(&u("u1")),
            ElementContent::Text { is_title: false, lines: vec!["Hello world".into(), String::new(), "Again".into()] }
        );
    }

    #[test]
    fn overflow_reports_three_numbers() {
        let cfg = GridConfig { text_density: 1.25, ..GridConfig::default() };
        let mut s = SessionState::new(cfg);
        s.apply(place("t", BracketType::Text, Footprint::new(1, 1, 3, 4)));
        s.apply(touch("t", 100));
        s.apply(cmd(Command::Text));
        s.apply(chunk("Welcome to my island"));
        let effects = s.apply(cmd(Command::Stop));
        let spoken = texts(&effects);
        assert!(spoken[0].starts_with("Text exceeds bracket capacity."));
        assert!(spoken[0].ends_with(
            "The current number of characters inside the bracket is 20. The maximum is 15. The recommended number is 10."
        ));
        assert_eq!(ids(&effects), vec!["text.overflow", "expansion.available"]);
    }

    #[test]
    fn text_append_after_existing_paragraph() {
        let mut s = walkthrough_state();
        s.apply(touch("u1", 100));
        s.apply(cmd(Command::Text));
        s.apply(chunk("First"));
        s.apply(cmd(Command::Stop));
        s.apply(cmd(Command::Text));
        s.apply(chunk("Second"));
        s.apply(cmd(Command::Stop));
        assert_eq!(
            s.content_of(&u("u1")),
            ElementContent::Text { is_title: false, lines: vec!["First".into(), "Second".into()] }
        );
    }

    #[test]
    fn dictation_errors() {
        let mut s = walkthrough_state();
        let e = s.apply(cmd(Command::Text));
        assert_eq!(ids(&e), vec!["error.no_selection"]);
        s.apply(place("img", BracketType::Image, Footprint::new(3, 3, 4, 4)));
        s.apply(touch("img", 100));
        let e = s.apply(cmd(Command::Title));
        assert_eq!(ids(&e), vec!["error.wrong_bracket_type"]);
        assert_eq!(e.len(), 1);
        assert_eq!(s.mode, Mode::Idle);
        let e = s.apply(cmd(Command::NextLine));
        assert_eq!(ids(&e), vec!["error.not_dictating"]);
        let e = s.apply(chunk("stray"));
        assert_eq!(ids(&e), vec!["error.not_dictating"]);
    }

    #[test]
    fn removal_keeps_content_and_clears_selection() {
        let mut s = walkthrough_state();
        s.apply(touch("u1", 100));
        s.apply(cmd(Command::Text));
        s.apply(chunk("Hello"));
        s.apply(cmd(Command::Stop));
        let e = s.apply(EngineEvent::Removed { unit: u("u1") });
        assert_eq!(ids(&e), vec!["removal"]);
        assert_eq!(s.selected, None);
        s.apply(place("u1", BracketType::Text, Footprint::new(5, 1, 2, 6)));
        let e = s.apply(touch("u1", 4000));
        assert!(texts(&e)[0].contains("Hello"), "{:?}", texts(&e));
    }

    #[test]
    fn removing_other_unit_keeps_selection() {
        let mut s = walkthrough_state();
        s.apply(place("u2", BracketType::Image, Footprint::new(5, 1, 2, 2)));
        s.apply(touch("u1", 100));
        s.apply(EngineEvent::Removed { unit: u("u2") });
        assert_eq!(s.selected, Some(u("u1")));
    }

    #[test]
    fn removal_during_dictation_flushes_buffer() {
        let mut s = walkthrough_state();
        s.apply(touch("u1", 100));
        s.apply(cmd(Command::Text));
        s.apply(chunk("Half a"));
        s.apply(chunk("thought"));
        let e = s.apply(EngineEvent::Removed { unit: u("u1") });
        assert_eq!(ids(&e), vec!["removal", "dictation.saved_on_removal"]);
        assert_eq!(s.mode, Mode::Idle);
        assert_eq!(s.content_of(&u("u1")), ElementContent::Text { is_title: false, lines: vec!["Half a thought".into()] });
        s.check_invariants().unwrap();
    }

    #[test]
    fn media_flow() {
        let mut s = SessionState::default();
        s.apply(place("img", BracketType::Image, Footprint::new(1, 1, 2, 6)));
        s.apply(touch("img", 100));
        let e = s.apply(cmd(Command::Media));
        assert_eq!(e[0], Effect::OpenMediaPicker { unit: u("img") });
        assert_eq!(s.mode, Mode::AwaitingMedia { target: u("img") });

        let portrait = MediaDescriptor { kind: MediaKind::Image, uri: "p.jpg".into(), width: 600, height: 900, alt_text: None };
        let e = s.apply(EngineEvent::MediaSelected { unit: u("img"), media: portrait.clone() });
        assert_eq!(ids(&e), vec!["image.letterbox_cols"]);
        // 2 rows x 6 cols: displayed width 4/3, floor((6 - 4/3) / 2) = 2 per side
        assert!(texts(&e)[0].contains("two columns remain empty on the left and right"));
        assert_eq!(s.content_of(&u("img")), ElementContent::Media(portrait.clone()));
        assert_eq!(s.mode, Mode::Idle);

        let e = s.apply(EngineEvent::MediaSelected { unit: u("img"), media: portrait });
        assert_eq!(ids(&e), vec!["error.not_awaiting_media"]);
    }

    #[test]
    fn media_errors() {
        let mut s = walkthrough_state();
        s.apply(touch("u1", 100));
        let e = s.apply(cmd(Command::Media));
        assert_eq!(ids(&e), vec!["error.wrong_bracket_type"]);
        s.apply(place("img", BracketType::Image, Footprint::new(3, 1, 4, 4)));
        s.apply(touch("img", 100));
        s.apply(cmd(Command::Media));
        let video = MediaDescriptor { kind: MediaKind::Video, uri: "v.mp4".into(), width: 1920, height: 1080, alt_text: None };
        let e = s.apply(EngineEvent::MediaSelected { unit: u("img"), media: video });
        assert_eq!(ids(&e), vec!["error.media_kind_mismatch"]);
        assert_eq!(s.mode, Mode::AwaitingMedia { target: u("img") });
        let flat = MediaDescriptor { kind: MediaKind::Image, uri: "x.png".into(), width: 0, height: 10, alt_text: None };
        let e = s.apply(EngineEvent::MediaSelected { unit: u("img"), media: flat });
        assert_eq!(ids(&e), vec!["error.non_positive_dimensions"]);
    }

    #[test]
    fn check_summaries() {
        let mut s = SessionState::default();
        let e = s.apply(cmd(Command::Check));
        assert_eq!(
            texts(&e),
            vec!["0 text brackets, 0 image brackets, 0 video brackets on the board. 100 percent of the canvas is whitespace."]
        );
        s.apply(place("t", BracketType::Text, Footprint::new(1, 1, 2, 6)));
        s.apply(place("i", BracketType::Image, Footprint::new(1, 7, 4, 6)));
        let e = s.apply(cmd(Command::Check));
        // 12 + 24 cells covered: round(100 * (1 - 36/192)) = round(81.25)
        assert!(texts(&e)[0].starts_with(
            "1 text bracket, 1 image bracket, 0 video brackets on the board. 81 percent of the canvas is whitespace."
        ));
        assert_eq!(s.revision, 2);
    }

    #[test]
    fn reshape_confirms_fit_and_keeps_identity() {
        let cfg = GridConfig { text_density: 1.25, ..GridConfig::default() };
        let mut s = SessionState::new(cfg);
        s.apply(place("t", BracketType::Text, Footprint::new(1, 1, 3, 4)));
        s.apply(touch("t", 100));
        s.apply(cmd(Command::Title));
        s.apply(chunk("Welcome to my island"));
        s.apply(cmd(Command::Stop));
        let e = s.apply(EngineEvent::Reshaped { unit: u("t"), footprint: Footprint::new(1, 1, 3, 6) });
        assert_eq!(ids(&e), vec!["reshape", "text.fits"]);
        assert_eq!(s.board.get(&u("t")).unwrap().bracket_type, BracketType::Text);
        let rev = s.revision;
        let e = s.apply(EngineEvent::Reshaped { unit: u("t"), footprint: Footprint::new(1, 1, 3, 6) });
        assert_eq!(ids(&e), vec!["reshape.unchanged"]);
        assert_eq!(s.revision, rev);
    }

    #[test]
    fn unknown_verb_and_missing_wake_word() {
        let mut s = SessionState::default();
        let e = s.apply(EngineEvent::Command { parsed: Parsed::NotACommand(NotACommand::UnknownVerb("dance".into())) });
        assert_eq!(texts(&e), vec!["Unknown command: dance."]);
        let e = s.apply(EngineEvent::Command { parsed: Parsed::NotACommand(NotACommand::MissingWakeWord) });
        assert_eq!(ids(&e), vec!["notice.missing_wake_word"]);
    }

    #[test]
    fn type_change_on_replace_is_rejected() {
        let mut s = walkthrough_state();
        s.apply(touch("u1", 100));
        s.apply(cmd(Command::Text));
        s.apply(chunk("Keep me"));
        s.apply(cmd(Command::Stop));
        s.apply(EngineEvent::Removed { unit: u("u1") });
        let e = s.apply(place("u1", BracketType::Image, Footprint::new(1, 1, 2, 2)));
        assert_eq!(ids(&e), vec!["error.type_changed"]);
        assert!(!s.board.contains(&u("u1")));
    }

    #[test]
    fn text_replacement() {
        let mut s = walkthrough_state();
        let e = s.apply(EngineEvent::TextReplaced { unit: u("u1"), lines: vec!["Edited\nline".into()] });
        assert_eq!(ids(&e), vec!["text.replaced", "text.underflow"]);
        assert_eq!(s.content_of(&u("u1")), ElementContent::Text { is_title: false, lines: vec!["Edited line".into()] });
    }

    #[test]
    fn error_utterances_are_error_severity() {
        let mut s = SessionState::default();
        let e = s.apply(EngineEvent::Removed { unit: u("ghost") });
        match &e[0] {
            Effect::Utter(utt) => assert_eq!(utt.severity, Severity::Error),
            other => panic!("unexpected {other:?}"),
        }
    }
}
