//! Builds every feedback utterance from the catalog.

use thiserror::Error;

use super::catalog::{catalog, Utterance};
use crate::content::{char_count, word_count, ElementContent, MediaKind};
use crate::fit::{FitKind, PageSummary};
use crate::grid::{Board, Bracket, BracketType, Direction, Footprint, GridError, UnitId};
use crate::session::EngineError;

/// Characters of text quoted in a readback before truncating.
pub const READBACK_PREVIEW_CHARS: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("diagnostic kind is not handled by this template family")]
pub struct WrongDiagnosticKind;

/// Numbers one through twelve as words, anything else as digits.
pub fn number_word(n: u32) -> String {
    const WORDS: [&str; 12] =
        ["one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve"];
    match n {
        1..=12 => WORDS[n as usize - 1].to_string(),
        _ => n.to_string(),
    }
}

fn plural(n: u64, one: &'static str, many: &'static str) -> &'static str {
    if n == 1 {
        one
    } else {
        many
    }
}

fn cells_phrase(n: u16, vertical: bool) -> String {
    let noun = if vertical { plural(n.into(), "row", "rows") } else { plural(n.into(), "column", "columns") };
    format!("{} {}", number_word(n.into()), noun)
}

/// Joins with commas and a final conjunction: "a", "a or b", "a, b or c".
fn join_list(items: &[String], conj: &str) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} {conj} {last}", init.join(", ")),
    }
}

fn footprint_args(fp: &Footprint) -> [(&'static str, String); 4] {
    [
        ("row_span", fp.row_span.to_string()),
        ("col_span", fp.col_span.to_string()),
        ("row", fp.row.to_string()),
        ("col", fp.col.to_string()),
    ]
}

fn render(id: &str, args: &[(&str, String)]) -> Utterance {
    let borrowed: Vec<(&str, &str)> = args.iter().map(|(k, v)| (*k, v.as_str())).collect();
    catalog().render(id, &borrowed)
}

fn with_footprint(id: &str, bracket_type: BracketType, fp: &Footprint, extra: &[(&str, String)]) -> Utterance {
    let mut args = vec![("type", bracket_type.title().to_string())];
    args.extend(footprint_args(fp));
    args.extend(extra.iter().cloned());
    render(id, &args)
}

pub fn compose_placement(bracket_type: BracketType, fp: &Footprint) -> Utterance {
    with_footprint("placement", bracket_type, fp, &[])
}

pub fn compose_reshape(bracket_type: BracketType, fp: &Footprint, changed: bool) -> Utterance {
    with_footprint(if changed { "reshape" } else { "reshape.unchanged" }, bracket_type, fp, &[])
}

pub fn compose_removal(bracket_type: BracketType, fp: &Footprint) -> Utterance {
    render(
        "removal",
        &[("type", bracket_type.title().to_string()), ("row", fp.row.to_string()), ("col", fp.col.to_string())],
    )
}

pub fn compose_text_fit(diag: &FitKind) -> Result<Utterance, WrongDiagnosticKind> {
    Ok(match *diag {
        FitKind::TextOverflow { current, max, recommended } => render(
            "text.overflow",
            &[("current", current.to_string()), ("max", max.to_string()), ("recommended", recommended.to_string())],
        ),
        FitKind::TextUnderflow { current, max, fill_fraction } => render(
            "text.underflow",
            &[
                ("current", current.to_string()),
                ("max", max.to_string()),
                ("percent", format!("{}", (fill_fraction * 100.0).round() as i64)),
            ],
        ),
        FitKind::TextFits { current, max } => {
            render("text.fits", &[("current", current.to_string()), ("max", max.to_string())])
        }
        _ => return Err(WrongDiagnosticKind),
    })
}

pub fn compose_image_fit(diag: &FitKind, kind: MediaKind) -> Result<Utterance, WrongDiagnosticKind> {
    let kind_title = kind.title().to_string();
    match *diag {
        FitKind::ImageFits => Ok(render("image.fits", &[("kind", kind_title)])),
        FitKind::ImageLetterbox { empty_cols_left: l, empty_cols_right: r, empty_rows_top: t, empty_rows_bottom: b } => {
            let banded = |n: u16, vertical: bool, id: &str| {
                let noun = if vertical { plural(n.into(), "row", "rows") } else { plural(n.into(), "column", "columns") };
                render(
                    id,
                    &[
                        ("kind", kind_title.clone()),
                        ("count", number_word(n.into())),
                        ("noun", noun.to_string()),
                        ("verb", plural(n.into(), "remains", "remain").to_string()),
                    ],
                )
            };
            Ok(if l == r && t == 0 && b == 0 && l > 0 {
                banded(l, false, "image.letterbox_cols")
            } else if t == b && l == 0 && r == 0 && t > 0 {
                banded(t, true, "image.letterbox_rows")
            } else {
                let phrase = |n: u16, vertical: bool| if n == 0 { "nothing".to_string() } else { cells_phrase(n, vertical) };
                render(
                    "image.letterbox_mixed",
                    &[
                        ("kind", kind_title.clone()),
                        ("kind_lower", kind.lower().to_string()),
                        ("left", phrase(l, false)),
                        ("right", phrase(r, false)),
                        ("top", phrase(t, true)),
                        ("bottom", phrase(b, true)),
                    ],
                )
            })
        }
        _ => Err(WrongDiagnosticKind),
    }
}

pub fn compose_expansion(diag: &FitKind) -> Result<Utterance, WrongDiagnosticKind> {
    match diag {
        FitKind::ExpansionAvailable { options } => {
            let items: Vec<String> =
                options.iter().map(|(d, n)| format!("{} by {}", d.word(), cells_phrase(*n, d.is_vertical()))).collect();
            Ok(render("expansion.available", &[("options", join_list(&items, "or"))]))
        }
        FitKind::ExpansionBlocked { directions } => {
            let phrase = if directions.is_empty() {
                "far enough in any single direction".to_string()
            } else {
                let words: Vec<String> = directions.iter().map(|d: &Direction| d.word().to_string()).collect();
                join_list(&words, "or")
            };
            Ok(render("expansion.blocked", &[("directions", phrase)]))
        }
        _ => Err(WrongDiagnosticKind),
    }
}

/// Spoken page summary followed by one sentence per open diagnostic.
pub fn compose_check(summary: &PageSummary, board: &Board) -> Utterance {
    let count = |t: BracketType| summary.count(t);
    let noun = |t: BracketType| {
        let n = count(t);
        format!("{} {}", t.lower(), plural(n.into(), "bracket", "brackets"))
    };
    let mut utterance = render(
        "check.summary",
        &[
            ("text_count", count(BracketType::Text).to_string()),
            ("text_noun", noun(BracketType::Text)),
            ("image_count", count(BracketType::Image).to_string()),
            ("image_noun", noun(BracketType::Image)),
            ("video_count", count(BracketType::Video).to_string()),
            ("video_noun", noun(BracketType::Video)),
            ("percent", summary.whitespace_percent.to_string()),
        ],
    );
    for diag in &summary.open_diagnostics {
        let Some(bracket) = board.get(&diag.subject) else { continue };
        let location = [
            ("type", bracket.bracket_type.title().to_string()),
            ("row", bracket.footprint.row.to_string()),
            ("col", bracket.footprint.col.to_string()),
        ];
        let detail = match &diag.kind {
            FitKind::EmptyContent => None,
            kind => {
                let media = match bracket.bracket_type {
                    BracketType::Video => MediaKind::Video,
                    _ => MediaKind::Image,
                };
                compose_text_fit(kind)
                    .or_else(|_| compose_image_fit(kind, media))
                    .or_else(|_| compose_expansion(kind))
                    .ok()
            }
        };
        let sentence = match detail {
            Some(d) => {
                let mut args = location.to_vec();
                args.push(("detail", d.text));
                render("check.issue", &args)
            }
            None => render("check.empty", &location),
        };
        utterance.text.push(' ');
        utterance.text.push_str(&sentence.text);
        utterance.severity = utterance.severity.max(sentence.severity);
    }
    utterance
}

fn preview(lines: &[String]) -> String {
    let joined = lines.iter().filter(|l| !l.is_empty()).cloned().collect::<Vec<_>>().join(" ");
    if joined.chars().count() > READBACK_PREVIEW_CHARS {
        let cut: String = joined.chars().take(READBACK_PREVIEW_CHARS).collect();
        format!("{}...", cut.trim_end())
    } else {
        joined
    }
}

/// Long-press readback: type, size, location and what the bracket holds.
pub fn compose_readback(bracket: &Bracket, content: &ElementContent) -> Utterance {
    let (t, fp) = (bracket.bracket_type, &bracket.footprint);
    match content {
        ElementContent::Text { is_title, lines } if !content.is_empty() => {
            let chars = char_count(lines) as u64;
            let words = word_count(lines) as u64;
            with_footprint(
                "readback.text",
                t,
                fp,
                &[
                    ("role", if *is_title { "title" } else { "text" }.to_string()),
                    ("chars", chars.to_string()),
                    ("chars_noun", plural(chars, "character", "characters").to_string()),
                    ("words", words.to_string()),
                    ("words_noun", plural(words, "word", "words").to_string()),
                    ("preview", preview(lines)),
                ],
            )
        }
        ElementContent::Media(m) => {
            let mut args = vec![
                ("media_kind", m.kind.lower().to_string()),
                ("width", m.width.to_string()),
                ("height", m.height.to_string()),
            ];
            match &m.alt_text {
                Some(alt) if !alt.trim().is_empty() => {
                    args.push(("alt", alt.clone()));
                    with_footprint("readback.media_alt", t, fp, &args)
                }
                _ => with_footprint("readback.media", t, fp, &args),
            }
        }
        _ if t == BracketType::Text => with_footprint("readback.empty_text", t, fp, &[]),
        _ => with_footprint("readback.empty_media", t, fp, &[]),
    }
}

pub fn compose_text_replaced(lines: &[String]) -> Utterance {
    let chars = char_count(lines) as u64;
    render(
        "text.replaced",
        &[("chars", chars.to_string()), ("chars_noun", plural(chars, "character", "characters").to_string())],
    )
}

pub fn compose_dictation_start(as_title: bool) -> Utterance {
    render(if as_title { "dictation.start_title" } else { "dictation.start_text" }, &[])
}

pub fn compose_dictation_chunk(text: &str) -> Utterance {
    render("dictation.chunk", &[("text", text.to_string())])
}

/// Fixed sentences that take no arguments.
pub fn compose_notice(id: &str) -> Utterance {
    render(id, &[])
}

pub fn compose_media_picker(bracket_type: BracketType) -> Utterance {
    render("media.picker", &[("type", bracket_type.lower().to_string())])
}

fn describe_unit(board: &Board, unit: &UnitId) -> String {
    match board.get(unit) {
        Some(b) => format!(
            "the {} bracket at row {} and column {}",
            b.bracket_type.lower(),
            b.footprint.row,
            b.footprint.col
        ),
        None => format!("bracket {unit}"),
    }
}

fn describe_content(content: &ElementContent) -> &'static str {
    match content {
        ElementContent::Empty => "nothing",
        ElementContent::Text { .. } => "text",
        ElementContent::Media(m) => match m.kind {
            MediaKind::Image => "an image",
            MediaKind::Video => "a video",
        },
    }
}

pub fn compose_error(err: &EngineError, board: &Board) -> Utterance {
    match err {
        EngineError::Grid(g) => match g {
            GridError::OutOfBounds(fp) => {
                let args: Vec<(&str, String)> = footprint_args(fp).to_vec();
                render("error.out_of_bounds", &args)
            }
            GridError::BelowMinimumSize { min_span } => render("error.below_minimum", &[("min", min_span.to_string())]),
            GridError::Overlap(units) => {
                let targets: Vec<String> = units.iter().map(|u| describe_unit(board, u)).collect();
                render("error.overlap", &[("targets", join_list(&targets, "and"))])
            }
            GridError::DuplicateUnit(u) => render("error.duplicate_unit", &[("unit", u.to_string())]),
            GridError::UnknownUnit(u) => render("error.unknown_unit", &[("unit", u.to_string())]),
        },
        EngineError::TypeChanged { unit, content, bracket_type } => render(
            "error.type_changed",
            &[
                ("unit", unit.to_string()),
                ("content", describe_content(content).to_string()),
                ("type", bracket_type.lower().to_string()),
            ],
        ),
        EngineError::NoSelection => render("error.no_selection", &[]),
        EngineError::WrongBracketType { command, actual } => {
            let required = match command {
                super::Command::Media => "an image or video bracket",
                _ => "a text bracket",
            };
            render(
                "error.wrong_bracket_type",
                &[
                    ("command", command.keyword().unwrap_or("dictation").to_string()),
                    ("required", required.to_string()),
                    ("actual", actual.lower().to_string()),
                ],
            )
        }
        EngineError::NotDictating => render("error.not_dictating", &[]),
        EngineError::AlreadyDictating => render("error.already_dictating", &[]),
        EngineError::NotAwaitingMedia(u) => render("error.not_awaiting_media", &[("unit", u.to_string())]),
        EngineError::MediaKindMismatch { media_kind, bracket_type } => render(
            "error.media_kind_mismatch",
            &[("media_kind", media_kind.lower().to_string()), ("type", bracket_type.lower().to_string())],
        ),
        EngineError::NonPositiveDimensions => render("error.non_positive_dimensions", &[]),
        EngineError::UnknownCommand(verb) => render("error.unknown_command", &[("verb", verb.clone())]),
    }
}
