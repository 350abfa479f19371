//! The utterance template catalog, loaded from `templates/catalog.json`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

const CATALOG_JSON: &str = include_str!("../../templates/catalog.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

/// A fully rendered feedback sentence, ready for any speech engine.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Utterance {
    pub text: String,
    pub severity: Severity,
    pub template_id: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Template {
    pub severity: Severity,
    pub pattern: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Catalog {
    pub version: u32,
    pub templates: BTreeMap<String, Template>,
}

impl Catalog {
    pub fn get(&self, id: &str) -> Option<&Template> {
        self.templates.get(id)
    }

    /// Placeholder names used by a template, in order of appearance.
    pub fn placeholders(pattern: &str) -> Vec<&str> {
        let mut out = Vec::new();
        let mut rest = pattern;
        while let Some(start) = rest.find('{') {
            let Some(len) = rest[start..].find('}') else { break };
            out.push(&rest[start + 1..start + len]);
            rest = &rest[start + len + 1..];
        }
        out
    }

    /// Fills a template. Unknown ids and missing arguments are programming
    /// errors in the composers and panic.
    pub fn render(&self, id: &str, args: &[(&str, &str)]) -> Utterance {
        let template = self.get(id).unwrap_or_else(|| panic!("no template {id:?} in catalog"));
        let mut text = String::with_capacity(template.pattern.len() + 32);
        let mut rest = template.pattern.as_str();
        while let Some(start) = rest.find('{') {
            text.push_str(&rest[..start]);
            let len = rest[start..].find('}').unwrap_or_else(|| panic!("unterminated placeholder in {id:?}"));
            let name = &rest[start + 1..start + len];
            let value = args
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| *v)
                .unwrap_or_else(|| panic!("template {id:?} needs argument {name:?}"));
            text.push_str(value);
            rest = &rest[start + len + 1..];
        }
        text.push_str(rest);
        Utterance { text, severity: template.severity, template_id: id.to_string() }
    }
}

pub fn catalog() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(|| serde_json::from_str(CATALOG_JSON).expect("template catalog is valid JSON"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_loads_with_version() {
        let c = catalog();
        assert_eq!(c.version, 1);
        assert!(c.get("placement").is_some());
    }

    #[test]
    fn placeholders_are_well_formed() {
        for (id, t) in &catalog().templates {
            let opens = t.pattern.matches('{').count();
            let closes = t.pattern.matches('}').count();
            assert_eq!(opens, closes, "{id}");
            for name in Catalog::placeholders(&t.pattern) {
                assert!(!name.is_empty() && name.chars().all(|c| c.is_ascii_lowercase() || c == '_'), "{id}: {name}");
            }
        }
    }

    #[test]
    fn render_fills_every_placeholder() {
        let u = catalog().render(
            "placement",
            &[("type", "Text"), ("row_span", "2"), ("col_span", "8"), ("row", "1"), ("col", "3")],
        );
        assert_eq!(u.text, "Text bracket detected, size 2 by 8, location at row 1 and column 3.");
        assert_eq!(u.severity, Severity::Info);
        assert_eq!(u.template_id, "placement");
    }

    #[test]
    #[should_panic(expected = "needs argument")]
    fn render_panics_on_missing_argument() {
        catalog().render("placement", &[("type", "Text")]);
    }
}
