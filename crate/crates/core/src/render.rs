//! Live page preview: a standalone HTML document with one CSS grid track
//! per board cell, and a parser that recovers the layout from it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use crate::content::ElementContent;
use crate::grid::{Board, BracketType, Footprint, UnitId};
use crate::session::SessionState;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedPage {
    pub html: String,
    pub revision: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutEntry {
    pub unit: UnitId,
    pub bracket_type: BracketType,
    pub footprint: Footprint,
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn unescape_html(s: &str) -> String {
    s.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&amp;", "&")
}

fn page_title(board: &Board, content: &BTreeMap<UnitId, ElementContent>) -> String {
    board
        .reading_order()
        .into_iter()
        .find_map(|(id, _)| match content.get(id) {
            Some(ElementContent::Text { is_title: true, lines }) if lines.iter().any(|l| !l.is_empty()) => {
                Some(lines.iter().filter(|l| !l.is_empty()).cloned().collect::<Vec<_>>().join(" "))
            }
            _ => None,
        })
        .unwrap_or_else(|| "Untitled page".to_string())
}

/// Renders the board. Pure: equal inputs give byte-equal output.
pub fn render_html(board: &Board, content: &BTreeMap<UnitId, ElementContent>) -> String {
    let cfg = board.config();
    let px = cfg.cell_px;
    let mut html = String::new();
    html.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(html, "<title>{}</title>", escape_html(&page_title(board, content)));
    html.push_str("<style>\n");
    let _ = writeln!(
        html,
        ".gridsite-canvas {{ display: grid; grid-template-columns: repeat({cols}, {px}px); \
         grid-template-rows: repeat({rows}, {px}px); width: {w}px; height: {h}px; margin: 0; padding: 0; }}",
        cols = cfg.cols,
        rows = cfg.rows,
        w = u32::from(cfg.cols) * px,
        h = u32::from(cfg.rows) * px,
    );
    html.push_str(".gridsite-element { margin: 0; overflow: hidden; box-sizing: border-box; }\n");
    html.push_str(".gridsite-element img, .gridsite-element video { width: 100%; height: 100%; object-fit: contain; display: block; }\n");
    html.push_str(".gridsite-placeholder { display: flex; align-items: center; justify-content: center; border: 1px dashed #888; }\n");
    html.push_str("</style>\n</head>\n<body>\n");
    let _ = writeln!(html, "<main class=\"gridsite-canvas\" data-rows=\"{}\" data-cols=\"{}\">", cfg.rows, cfg.cols);

    for (id, bracket) in board.reading_order() {
        let fp = bracket.footprint;
        let stored = content.get(id).cloned().unwrap_or_default();
        let placeholder = match (&stored, bracket.bracket_type) {
            (ElementContent::Media(m), t) => m.uri.is_empty() || m.kind.bracket_type() != t,
            (_, t) => t.is_media(),
        };
        let attrs = format!(
            "class=\"gridsite-element{}\" data-unit=\"{}\" data-type=\"{}\" style=\"grid-row: {} / {}; grid-column: {} / {};\"",
            if placeholder { " gridsite-placeholder" } else { "" },
            escape_html(id.as_str()),
            bracket.bracket_type.lower(),
            fp.row,
            u32::from(fp.row) + u32::from(fp.row_span),
            fp.col,
            u32::from(fp.col) + u32::from(fp.col_span),
        );
        match (bracket.bracket_type, &stored) {
            (BracketType::Text, ElementContent::Text { is_title: true, lines }) => {
                let body: Vec<String> = lines.iter().map(|l| escape_html(l)).collect();
                let _ = writeln!(html, "<h1 {attrs}>{}</h1>", body.join("<br>"));
            }
            (BracketType::Text, ElementContent::Text { lines, .. }) => {
                let body: Vec<String> = lines.iter().map(|l| escape_html(l)).collect();
                let _ = writeln!(html, "<p {attrs}>{}</p>", body.join("<br>"));
            }
            (BracketType::Text, _) => {
                let _ = writeln!(html, "<p {attrs}></p>");
            }
            (BracketType::Image, ElementContent::Media(m)) if !placeholder => {
                let alt = m.alt_text.as_deref().map(|a| format!(" alt=\"{}\"", escape_html(a))).unwrap_or_default();
                let _ = writeln!(
                    html,
                    "<div {attrs}><img src=\"{}\" width=\"{}\" height=\"{}\"{alt}></div>",
                    escape_html(&m.uri),
                    m.width,
                    m.height
                );
            }
            (BracketType::Video, ElementContent::Media(m)) if !placeholder => {
                let label = m.alt_text.as_deref().map(|a| format!(" title=\"{}\"", escape_html(a))).unwrap_or_default();
                let _ = writeln!(
                    html,
                    "<div {attrs}><video src=\"{}\" width=\"{}\" height=\"{}\" controls{label}></video></div>",
                    escape_html(&m.uri),
                    m.width,
                    m.height
                );
            }
            (t, _) => {
                let _ = writeln!(html, "<div {attrs}>{} placeholder</div>", t.title());
            }
        }
    }
    html.push_str("</main>\n</body>\n</html>\n");
    html
}

pub fn render_page(state: &SessionState) -> RenderedPage {
    RenderedPage { html: render_html(&state.board, &state.content), revision: state.revision }
}

pub fn export_html(state: &SessionState, path: &Path) -> Result<(), RenderError> {
    crate::persist::write_atomic(path, render_page(state).html.as_bytes())?;
    Ok(())
}

fn element_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r#"<(h1|p|div) class="gridsite-element[^"]*" data-unit="([^"]*)" data-type="([^"]*)" style="([^"]*)""#)
            .expect("valid regex")
    })
}

fn style_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^grid-row: (\d+) / (\d+); grid-column: (\d+) / (\d+);$").expect("valid regex")
    })
}

/// Recovers every bracket's grid placement from a page produced by
/// [`render_html`], in document order.
pub fn parse_layout(html: &str) -> Result<Vec<LayoutEntry>, RenderError> {
    let malformed = |m: &str| RenderError::MalformedDocument(m.to_string());
    if !html.starts_with("<!DOCTYPE html>") {
        return Err(malformed("missing doctype"));
    }
    if !html.trim_end().ends_with("</html>") {
        return Err(malformed("document is truncated"));
    }
    let open = html.find("<main class=\"gridsite-canvas\"").ok_or_else(|| malformed("no grid canvas"))?;
    let close = html[open..].find("</main>").map(|i| open + i).ok_or_else(|| malformed("grid canvas is not closed"))?;
    let canvas = &html[open..close];
    // attribute quotes never survive escaping, so this only counts real elements
    if canvas.matches("\" data-unit=\"").count() != element_regex().find_iter(canvas).count() {
        return Err(malformed("element with unreadable placement"));
    }

    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for cap in element_regex().captures_iter(canvas) {
        let unit = UnitId::new(unescape_html(&cap[2]));
        let bracket_type = match &cap[3] {
            "text" => BracketType::Text,
            "image" => BracketType::Image,
            "video" => BracketType::Video,
            other => return Err(RenderError::MalformedDocument(format!("unknown element type {other:?}"))),
        };
        let style = style_regex()
            .captures(&cap[4])
            .ok_or_else(|| RenderError::MalformedDocument(format!("bad grid style for {unit}")))?;
        let num = |i: usize| -> Result<u16, RenderError> {
            style[i].parse().map_err(|_| RenderError::MalformedDocument(format!("grid line out of range for {unit}")))
        };
        let (r0, r1, c0, c1) = (num(1)?, num(2)?, num(3)?, num(4)?);
        if r1 <= r0 || c1 <= c0 || r0 == 0 || c0 == 0 {
            return Err(RenderError::MalformedDocument(format!("empty grid area for {unit}")));
        }
        if !seen.insert(unit.clone()) {
            return Err(RenderError::MalformedDocument(format!("unit {unit} appears twice")));
        }
        out.push(LayoutEntry { unit, bracket_type, footprint: Footprint::new(r0, c0, r1 - r0, c1 - c0) });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content::{MediaDescriptor, MediaKind};
    use crate::grid::GridConfig;

    fn one_bracket() -> (Board, BTreeMap<UnitId, ElementContent>) {
        let mut board = Board::new(GridConfig::default());
        board.place("u1".into(), BracketType::Text, Footprint::new(1, 3, 2, 8)).unwrap();
        let content = BTreeMap::from([(
            UnitId::from("u1"),
            ElementContent::Text { is_title: true, lines: vec!["Welcome to my lovely hometown island!".into()] },
        )]);
        (board, content)
    }

    #[test]
    fn empty_board_renders_empty_grid() {
        let board = Board::new(GridConfig::default());
        let html = render_html(&board, &BTreeMap::new());
        assert!(html.contains("grid-template-columns: repeat(12, 60px)"));
        assert!(html.contains("grid-template-rows: repeat(16, 60px)"));
        assert!(!html.contains("data-unit"));
        assert_eq!(parse_layout(&html).unwrap(), vec![]);
    }

    #[test]
    fn title_renders_as_heading_on_grid_lines() {
        let (board, content) = one_bracket();
        let html = render_html(&board, &content);
        assert!(html.contains(
            "<h1 class=\"gridsite-element\" data-unit=\"u1\" data-type=\"text\" \
             style=\"grid-row: 1 / 3; grid-column: 3 / 11;\">Welcome to my lovely hometown island!</h1>"
        ));
        assert!(html.contains("<title>Welcome to my lovely hometown island!</title>"));
        assert_eq!(
            parse_layout(&html).unwrap(),
            vec![LayoutEntry { unit: "u1".into(), bracket_type: BracketType::Text, footprint: Footprint::new(1, 3, 2, 8) }]
        );
        assert_eq!(html, render_html(&board, &content));
    }

    #[test]
    fn paragraphs_media_and_placeholders() {
        let mut board = Board::new(GridConfig::default());
        board.place("p".into(), BracketType::Text, Footprint::new(3, 1, 2, 6)).unwrap();
        board.place("i".into(), BracketType::Image, Footprint::new(5, 1, 4, 4)).unwrap();
        board.place("v".into(), BracketType::Video, Footprint::new(9, 1, 4, 8)).unwrap();
        board.place("e".into(), BracketType::Image, Footprint::new(13, 1, 2, 2)).unwrap();
        let content = BTreeMap::from([
            (UnitId::from("p"), ElementContent::Text { is_title: false, lines: vec!["a < b".into(), "line 2".into()] }),
            (
                UnitId::from("i"),
                ElementContent::Media(MediaDescriptor {
                    kind: MediaKind::Image,
                    uri: "beach.jpg".into(),
                    width: 800,
                    height: 600,
                    alt_text: Some("A \"sunny\" beach".into()),
                }),
            ),
            (
                UnitId::from("v"),
                ElementContent::Media(MediaDescriptor {
                    kind: MediaKind::Video,
                    uri: "tour.mp4".into(),
                    width: 1920,
                    height: 1080,
                    alt_text: None,
                }),
            ),
        ]);
        let html = render_html(&board, &content);
        assert!(html.contains(">a &lt; b<br>line 2</p>"));
        assert!(html.contains("<img src=\"beach.jpg\" width=\"800\" height=\"600\" alt=\"A &quot;sunny&quot; beach\">"));
        assert!(html.contains("<video src=\"tour.mp4\""));
        assert!(html.contains("class=\"gridsite-element gridsite-placeholder\" data-unit=\"e\""));
        assert!(html.contains(">Image placeholder</div>"));
        let mut parsed: Vec<_> = parse_layout(&html).unwrap().into_iter().map(|e| (e.unit, e.footprint)).collect();
        parsed.sort();
        let mut expected: Vec<_> = board.brackets().map(|(id, b)| (id.clone(), b.footprint)).collect();
        expected.sort();
        assert_eq!(parsed, expected);
    }

    #[test]
    fn mangled_documents_are_rejected() {
        let (board, content) = one_bracket();
        let html = render_html(&board, &content);
        let mutations = [
            html.replace("<!DOCTYPE html>", ""),
            html.replace("</html>", ""),
            html.replace("</main>", ""),
            html.replace("grid-row: 1 / 3", "grid-row: 1 / x"),
            html.replace("grid-row: 1 / 3", "grid-row: 3 / 1"),
            html.replace("grid-column: 3 / 11", "grid-column: 3 / 99999999"),
            html.replace("style=\"grid-row", "styl=\"grid-row"),
            html.replace("data-type=\"text\"", "data-type=\"table\""),
            html.replace("<main class=\"gridsite-canvas\"", "<main class=\"canvas\""),
            html.replace("</h1>", "</h1>\n<h1 class=\"gridsite-element\" data-unit=\"u1\" data-type=\"text\" style=\"grid-row: 5 / 7; grid-column: 1 / 3;\"></h1>"),
        ];
        for (i, m) in mutations.iter().enumerate() {
            assert!(matches!(parse_layout(m), Err(RenderError::MalformedDocument(_))), "mutation {i} accepted");
        }
    }

    #[test]
    fn unit_ids_are_escaped() {
        let mut board = Board::new(GridConfig::default());
        board.place("a\"<b>".into(), BracketType::Text, Footprint::new(1, 1, 2, 2)).unwrap();
        let html = render_html(&board, &BTreeMap::new());
        let parsed = parse_layout(&html).unwrap();
        assert_eq!(parsed[0].unit, UnitId::from("a\"<b>"));
    }
}
