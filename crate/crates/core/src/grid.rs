//! Geometry and occupancy of the baseboard.
//!
//! The board is a fixed grid of square cells addressed with 1-based
//! coordinates (row 1 is the top edge). Brackets occupy whole-cell
//! rectangles and may never overlap. Every mutation validates first and
//! only then touches the bracket set, so a rejected mutation leaves the
//! board exactly as it was.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Board dimensions and the tuning constants the analyzers read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub rows: u16,
    pub cols: u16,
    pub cell_pitch_mm: f64,
    pub min_span: u16,
    pub long_press_ms: u64,
    /// Characters of text one cell is expected to hold.
    pub text_density: f64,
    pub recommended_ratio: f64,
    pub underflow_ratio: f64,
    /// Pixel size of one cell in the rendered page.
    pub cell_px: u32,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            rows: 16,
            cols: 12,
            cell_pitch_mm: 25.4,
            min_span: 2,
            long_press_ms: 3000,
            text_density: 8.0,
            recommended_ratio: 2.0 / 3.0,
            underflow_ratio: 0.4,
            cell_px: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("grid must have at least one row and one column")]
    EmptyGrid,
    #[error("min_span must be at least 1 and fit the grid")]
    MinSpan,
    #[error("text_density must be positive and give a minimum bracket at least one character")]
    TextDensity,
    #[error("recommended_ratio must be in (0, 1]")]
    RecommendedRatio,
    #[error("underflow_ratio must be in [0, recommended_ratio)")]
    UnderflowRatio,
    #[error("cell_pitch_mm and cell_px must be positive")]
    CellSize,
}

impl GridConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(ConfigError::EmptyGrid);
        }
        if self.min_span == 0 || self.min_span > self.rows.min(self.cols) {
            return Err(ConfigError::MinSpan);
        }
        let min_area = f64::from(self.min_span) * f64::from(self.min_span);
        if !(self.text_density.is_finite() && self.text_density > 0.0)
            || (self.text_density * min_area).floor() < 1.0
        {
            return Err(ConfigError::TextDensity);
        }
        if !(self.recommended_ratio > 0.0 && self.recommended_ratio <= 1.0) {
            return Err(ConfigError::RecommendedRatio);
        }
        if !(self.underflow_ratio >= 0.0 && self.underflow_ratio < self.recommended_ratio) {
            return Err(ConfigError::UnderflowRatio);
        }
        if !(self.cell_pitch_mm.is_finite() && self.cell_pitch_mm > 0.0) || self.cell_px == 0 {
            return Err(ConfigError::CellSize);
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        usize::from(self.rows) * usize::from(self.cols)
    }

    /// Physical board size in millimetres as (width, height).
    pub fn board_size_mm(&self) -> (f64, f64) {
        (
            f64::from(self.cols) * self.cell_pitch_mm,
            f64::from(self.rows) * self.cell_pitch_mm,
        )
    }
}

/// Stable identity of one physical bracket.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitId(String);

impl UnitId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UnitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for UnitId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BracketType {
    #[serde(alias = "Text")]
    Text,
    #[serde(alias = "Image")]
    Image,
    #[serde(alias = "Video")]
    Video,
}

impl BracketType {
    pub const ALL: [BracketType; 3] = [BracketType::Text, BracketType::Image, BracketType::Video];

    /// Capitalized name, as spoken at the start of a sentence.
    pub fn title(self) -> &'static str {
        match self {
            BracketType::Text => "Text",
            BracketType::Image => "Image",
            BracketType::Video => "Video",
        }
    }

    pub fn lower(self) -> &'static str {
        match self {
            BracketType::Text => "text",
            BracketType::Image => "image",
            BracketType::Video => "video",
        }
    }

    pub fn is_media(self) -> bool {
        matches!(self, BracketType::Image | BracketType::Video)
    }
}

impl fmt::Display for BracketType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.lower())
    }
}

/// Whole-cell rectangle, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Footprint {
    pub row: u16,
    pub col: u16,
    pub row_span: u16,
    pub col_span: u16,
}

impl Footprint {
    pub const fn new(row: u16, col: u16, row_span: u16, col_span: u16) -> Self {
        Self { row, col, row_span, col_span }
    }

    pub fn area(&self) -> u32 {
        u32::from(self.row_span) * u32::from(self.col_span)
    }

    /// Last occupied row, inclusive.
    pub fn last_row(&self) -> u32 {
        u32::from(self.row) + u32::from(self.row_span) - 1
    }

    /// Last occupied column, inclusive.
    pub fn last_col(&self) -> u32 {
        u32::from(self.col) + u32::from(self.col_span) - 1
    }

    pub fn contains(&self, row: u16, col: u16) -> bool {
        let (r, c) = (u32::from(row), u32::from(col));
        r >= u32::from(self.row)
            && r <= self.last_row()
            && c >= u32::from(self.col)
            && c <= self.last_col()
    }

    pub fn intersects(&self, other: &Footprint) -> bool {
        u32::from(self.row) <= other.last_row()
            && u32::from(other.row) <= self.last_row()
            && u32::from(self.col) <= other.last_col()
            && u32::from(other.col) <= self.last_col()
    }

    /// Every covered cell in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (u16, u16)> + '_ {
        let (row, col, rs, cs) = (self.row, self.col, self.row_span, self.col_span);
        (0..rs).flat_map(move |dr| (0..cs).map(move |dc| (row + dr, col + dc)))
    }

    /// Same rectangle with rows and columns exchanged.
    pub fn transposed(&self) -> Footprint {
        Footprint::new(self.col, self.row, self.col_span, self.row_span)
    }

    pub fn check(&self, config: &GridConfig) -> Result<(), GridError> {
        if self.row_span < config.min_span || self.col_span < config.min_span {
            return Err(GridError::BelowMinimumSize { min_span: config.min_span });
        }
        if self.row == 0
            || self.col == 0
            || self.last_row() > u32::from(config.rows)
            || self.last_col() > u32::from(config.cols)
        {
            return Err(GridError::OutOfBounds(*self));
        }
        Ok(())
    }

    /// Grown by `cells` whole rows or columns on one side, if that stays
    /// representable. Bounds are not checked here.
    pub fn grown(&self, direction: Direction, cells: u16) -> Option<Footprint> {
        let mut fp = *self;
        match direction {
            Direction::Up => {
                fp.row = fp.row.checked_sub(cells)?;
                fp.row_span = fp.row_span.checked_add(cells)?;
            }
            Direction::Down => fp.row_span = fp.row_span.checked_add(cells)?,
            Direction::Left => {
                fp.col = fp.col.checked_sub(cells)?;
                fp.col_span = fp.col_span.checked_add(cells)?;
            }
            Direction::Right => fp.col_span = fp.col_span.checked_add(cells)?,
        }
        Some(fp)
    }
}

impl fmt::Display for Footprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} at ({}, {})", self.row_span, self.col_span, self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Up, Direction::Down, Direction::Left, Direction::Right];

    pub fn word(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Left => "left",
            Direction::Right => "right",
        }
    }

    /// Whether growth in this direction adds rows (as opposed to columns).
    pub fn is_vertical(self) -> bool {
        matches!(self, Direction::Up | Direction::Down)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bracket {
    pub bracket_type: BracketType,
    pub footprint: Footprint,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("footprint {0} leaves the board")]
    OutOfBounds(Footprint),
    #[error("bracket spans must be at least {min_span} cells")]
    BelowMinimumSize { min_span: u16 },
    #[error("footprint overlaps {}", join_units(.0))]
    Overlap(Vec<UnitId>),
    #[error("unit {0} is already on the board")]
    DuplicateUnit(UnitId),
    #[error("unit {0} is not on the board")]
    UnknownUnit(UnitId),
}

fn join_units(units: &[UnitId]) -> String {
    units.iter().map(UnitId::as_str).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExpansionRoom {
    pub up: u16,
    pub down: u16,
    pub left: u16,
    pub right: u16,
}

impl ExpansionRoom {
    pub fn get(&self, direction: Direction) -> u16 {
        match direction {
            Direction::Up => self.up,
            Direction::Down => self.down,
            Direction::Left => self.left,
            Direction::Right => self.right,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellState {
    Empty,
    OccupiedBy(UnitId),
}

/// Row-major snapshot of cell ownership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyMap {
    rows: u16,
    cols: u16,
    cells: Vec<CellState>,
}

impl OccupancyMap {
    /// State of the cell at 1-based (row, col).
    pub fn get(&self, row: u16, col: u16) -> Option<&CellState> {
        if row == 0 || col == 0 || row > self.rows || col > self.cols {
            return None;
        }
        self.cells.get(usize::from(row - 1) * usize::from(self.cols) + usize::from(col - 1))
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|c| matches!(c, CellState::OccupiedBy(_))).count()
    }

    pub fn count_for(&self, unit: &UnitId) -> usize {
        self.cells
            .iter()
            .filter(|c| matches!(c, CellState::OccupiedBy(u) if u == unit))
            .count()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u16, u16, &CellState)> + '_ {
        let cols = self.cols;
        self.cells.iter().enumerate().map(move |(i, s)| {
            let row = (i / usize::from(cols)) as u16 + 1;
            let col = (i % usize::from(cols)) as u16 + 1;
            (row, col, s)
        })
    }
}

/// The baseboard: configuration plus the brackets currently placed on it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Board {
    config: GridConfig,
    brackets: BTreeMap<UnitId, Bracket>,
}

impl Board {
    pub fn new(config: GridConfig) -> Self {
        Self { config, brackets: BTreeMap::new() }
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn get(&self, unit: &UnitId) -> Option<&Bracket> {
        self.brackets.get(unit)
    }

    pub fn contains(&self, unit: &UnitId) -> bool {
        self.brackets.contains_key(unit)
    }

    pub fn len(&self) -> usize {
        self.brackets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.brackets.is_empty()
    }

    /// Brackets ordered by unit id.
    pub fn brackets(&self) -> impl Iterator<Item = (&UnitId, &Bracket)> + '_ {
        self.brackets.iter()
    }

    /// Brackets in reading order: top to bottom, then left to right.
    pub fn reading_order(&self) -> Vec<(&UnitId, &Bracket)> {
        let mut all: Vec<_> = self.brackets.iter().collect();
        all.sort_by_key(|(id, b)| (b.footprint.row, b.footprint.col, (*id).clone()));
        all
    }

    fn conflicts(&self, fp: &Footprint, ignore: Option<&UnitId>) -> Vec<UnitId> {
        self.brackets
            .iter()
            .filter(|(id, _)| Some(*id) != ignore)
            .filter(|(_, b)| b.footprint.intersects(fp))
            .map(|(id, _)| id.clone())
            .collect()
    }

    pub fn place(&mut self, unit: UnitId, bracket_type: BracketType, fp: Footprint) -> Result<(), GridError> {
        if self.brackets.contains_key(&unit) {
            return Err(GridError::DuplicateUnit(unit));
        }
        fp.check(&self.config)?;
        let conflicts = self.conflicts(&fp, None);
        if !conflicts.is_empty() {
            return Err(GridError::Overlap(conflicts));
        }
        self.brackets.insert(unit, Bracket { bracket_type, footprint: fp });
        Ok(())
    }

    pub fn remove(&mut self, unit: &UnitId) -> Result<Bracket, GridError> {
        self.brackets.remove(unit).ok_or_else(|| GridError::UnknownUnit(unit.clone()))
    }

    /// Moves or resizes a bracket in place. Identity and type are kept.
    pub fn reshape(&mut self, unit: &UnitId, fp: Footprint) -> Result<(), GridError> {
        if !self.brackets.contains_key(unit) {
            return Err(GridError::UnknownUnit(unit.clone()));
        }
        fp.check(&self.config)?;
        let conflicts = self.conflicts(&fp, Some(unit));
        if !conflicts.is_empty() {
            return Err(GridError::Overlap(conflicts));
        }
        if let Some(b) = self.brackets.get_mut(unit) {
            b.footprint = fp;
        }
        Ok(())
    }

    pub fn occupancy_map(&self) -> OccupancyMap {
        let (rows, cols) = (self.config.rows, self.config.cols);
        let mut cells = vec![CellState::Empty; usize::from(rows) * usize::from(cols)];
        for (id, b) in &self.brackets {
            for (r, c) in b.footprint.cells() {
                if r <= rows && c <= cols {
                    cells[usize::from(r - 1) * usize::from(cols) + usize::from(c - 1)] =
                        CellState::OccupiedBy(id.clone());
                }
            }
        }
        OccupancyMap { rows, cols, cells }
    }

    pub fn occupied_cells(&self) -> u32 {
        self.brackets.values().map(|b| b.footprint.area()).sum()
    }

    /// Share of the canvas not covered by any bracket.
    pub fn whitespace_fraction(&self) -> f64 {
        let total = self.config.cell_count() as f64;
        1.0 - f64::from(self.occupied_cells()) / total
    }

    /// How many whole rows or columns the bracket can grow on each side
    /// before it would leave the board or touch another bracket.
    pub fn expansion_room(&self, unit: &UnitId) -> Result<ExpansionRoom, GridError> {
        let fp = self
            .brackets
            .get(unit)
            .ok_or_else(|| GridError::UnknownUnit(unit.clone()))?
            .footprint;
        let occupied: BTreeSet<(u16, u16)> = self
            .brackets
            .iter()
            .filter(|(id, _)| *id != unit)
            .flat_map(|(_, b)| b.footprint.cells())
            .collect();
        let row_free = |r: u16| (fp.col..fp.col + fp.col_span).all(|c| !occupied.contains(&(r, c)));
        let col_free = |c: u16| (fp.row..fp.row + fp.row_span).all(|r| !occupied.contains(&(r, c)));

        let up = (1..fp.row).rev().take_while(|&r| row_free(r)).count();
        let down = (fp.row + fp.row_span..=self.config.rows).take_while(|&r| row_free(r)).count();
        let left = (1..fp.col).rev().take_while(|&c| col_free(c)).count();
        let right = (fp.col + fp.col_span..=self.config.cols).take_while(|&c| col_free(c)).count();

        Ok(ExpansionRoom { up: up as u16, down: down as u16, left: left as u16, right: right as u16 })
    }
}
