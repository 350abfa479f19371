//! Content/layout fit analysis.
//!
//! Text capacity uses a linear characters-per-cell model. Media is
//! contain-fitted into the bracket (cells are square) and the empty bands
//! that remain are reported in whole cells, since brackets only resize in
//! whole grid steps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::content::{char_count, ElementContent};
use crate::grid::{Board, BracketType, Direction, Footprint, GridConfig, GridError, UnitId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextCapacity {
    pub max_chars: u32,
    pub recommended_chars: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitKind {
    TextOverflow { current: u32, max: u32, recommended: u32 },
    TextUnderflow { current: u32, max: u32, fill_fraction: f64 },
    TextFits { current: u32, max: u32 },
    ImageLetterbox { empty_cols_left: u16, empty_cols_right: u16, empty_rows_top: u16, empty_rows_bottom: u16 },
    ImageFits,
    ExpansionBlocked { directions: Vec<Direction> },
    /// Growth options that would supply the requested room, as
    /// (direction, whole rows or columns to add).
    ExpansionAvailable { options: Vec<(Direction, u16)> },
    EmptyContent,
}

impl FitKind {
    /// True for diagnostics that describe something to fix.
    pub fn is_issue(&self) -> bool {
        !matches!(self, FitKind::TextFits { .. } | FitKind::ImageFits | FitKind::ExpansionAvailable { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostic {
    pub subject: UnitId,
    #[serde(flatten)]
    pub kind: FitKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageSummary {
    pub counts: BTreeMap<BracketType, u32>,
    pub whitespace_percent: u8,
    pub open_diagnostics: Vec<FitDiagnostic>,
}

impl PageSummary {
    pub fn count(&self, t: BracketType) -> u32 {
        self.counts.get(&t).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FitError {
    #[error("media dimensions must be positive")]
    NonPositiveDimensions,
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub fn text_capacity(fp: &Footprint, config: &GridConfig) -> TextCapacity {
    let max = (config.text_density * f64::from(fp.area())).floor().max(0.0) as u32;
    let recommended = (config.recommended_ratio * f64::from(max)).round() as u32;
    TextCapacity { max_chars: max, recommended_chars: recommended.clamp(max.min(1), max) }
}

pub fn analyze_text(current: u32, cap: TextCapacity, config: &GridConfig) -> FitKind {
    let max = cap.max_chars;
    if current > max {
        return FitKind::TextOverflow { current, max, recommended: cap.recommended_chars };
    }
    let fill = if max == 0 { 0.0 } else { f64::from(current) / f64::from(max) };
    if current == 0 || f64::from(current) < config.underflow_ratio * f64::from(max) {
        FitKind::TextUnderflow { current, max, fill_fraction: fill }
    } else {
        FitKind::TextFits { current, max }
    }
}

/// Contain-fit of a `width` x `height` picture in the footprint.
///
/// Works in exact integer arithmetic: with image aspect `w/h` and bracket
/// aspect `cs/rs`, a narrower image leaves `(cs*h - rs*w) / h` empty
/// columns in total, a wider one `(rs*w - cs*h) / w` empty rows.
pub fn analyze_image(width: u32, height: u32, fp: &Footprint) -> Result<FitKind, FitError> {
    if width == 0 || height == 0 {
        return Err(FitError::NonPositiveDimensions);
    }
    let (w, h) = (u64::from(width), u64::from(height));
    let (rs, cs) = (u64::from(fp.row_span), u64::from(fp.col_span));
    let (mut cols, mut rows) = (0u16, 0u16);
    if w * rs < h * cs {
        cols = ((cs * h - rs * w) / (2 * h)) as u16;
    } else if w * rs > h * cs {
        rows = ((rs * w - cs * h) / (2 * w)) as u16;
    }
    if cols == 0 && rows == 0 {
        Ok(FitKind::ImageFits)
    } else {
        Ok(FitKind::ImageLetterbox {
            empty_cols_left: cols,
            empty_cols_right: cols,
            empty_rows_top: rows,
            empty_rows_bottom: rows,
        })
    }
}

/// Whether one bracket can gain `needed_cells` of area by growing along a
/// single side.
pub fn analyze_expansion(board: &Board, unit: &UnitId, needed_cells: u32) -> Result<FitKind, FitError> {
    let room = board.expansion_room(unit)?;
    let fp = board.get(unit).ok_or_else(|| GridError::UnknownUnit(unit.clone()))?.footprint;
    let mut options = Vec::new();
    for d in Direction::ALL {
        // one added row contributes col_span cells, one added column row_span
        let per_line = u32::from(if d.is_vertical() { fp.col_span } else { fp.row_span });
        let lines = needed_cells.div_ceil(per_line).max(1);
        if u32::from(room.get(d)) >= lines {
            options.push((d, lines as u16));
        }
    }
    if options.is_empty() {
        let directions = Direction::ALL.into_iter().filter(|d| room.get(*d) == 0).collect();
        Ok(FitKind::ExpansionBlocked { directions })
    } else {
        Ok(FitKind::ExpansionAvailable { options })
    }
}

/// Diagnostic for one bracket's content. Brackets with nothing in them
/// report `EmptyContent`.
pub fn analyze_content(
    bracket_type: BracketType,
    fp: &Footprint,
    content: &ElementContent,
    config: &GridConfig,
) -> FitKind {
    match content {
        ElementContent::Text { lines, .. } if !content.is_empty() => {
            analyze_text(char_count(lines) as u32, text_capacity(fp, config), config)
        }
        ElementContent::Media(m) if m.kind.bracket_type() == bracket_type => {
            analyze_image(m.width, m.height, fp).unwrap_or(FitKind::EmptyContent)
        }
        _ => FitKind::EmptyContent,
    }
}

pub fn page_check(board: &Board, content: &BTreeMap<UnitId, ElementContent>, config: &GridConfig) -> PageSummary {
    let mut counts: BTreeMap<BracketType, u32> = BracketType::ALL.iter().map(|t| (*t, 0)).collect();
    let mut open = Vec::new();
    for (id, b) in board.reading_order() {
        *counts.entry(b.bracket_type).or_default() += 1;
        let stored = content.get(id).cloned().unwrap_or_default();
        let kind = analyze_content(b.bracket_type, &b.footprint, &stored, config);
        if kind.is_issue() {
            open.push(FitDiagnostic { subject: id.clone(), kind });
        }
    }
    PageSummary {
        counts,
        whitespace_percent: (board.whitespace_fraction() * 100.0).round() as u8,
        open_diagnostics: open,
    }
}
