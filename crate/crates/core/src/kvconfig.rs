//! Sectioned key-value files, shared by rule files and run configs.
//!
//! ```text
//! # comment
//! [section]
//! key=value
//! key=another value
//! ```
//!
//! Keys may repeat within a section. Blank lines and lines starting with `#`
//! are ignored. Leading and trailing whitespace around keys and values is
//! trimmed.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    /// Last value for `key`, if any.
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().rev().find(|e| e.key == key)
    }
}

/// Parse a sectioned config. `origin` names the source in error messages.
pub fn parse(src: &str, origin: &str) -> Result<Vec<Section>> {
    let err = |line: usize, message: String| Error::Config {
        location: format!("{origin}:{line}"),
        message,
    };
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        if let Some(rest) = text.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(line, format!("unterminated section header '{text}'")))?
                .trim();
            if name.is_empty() {
                return Err(err(line, "empty section name".into()));
            }
            if let Some(prev) = sections.iter().find(|s| s.name == name) {
                return Err(err(
                    line,
                    format!("section [{name}] already defined at line {}", prev.line),
                ));
            }
            sections.push(Section {
                name: name.to_string(),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = text
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected key=value, got '{text}'")))?;
        let section = sections
            .last_mut()
            .ok_or_else(|| err(line, "entry before any [section] header".into()))?;
        section.entries.push(Entry {
            key: key.trim().to_string(),
            value: value.trim().to_string(),
            line,
        });
    }
    Ok(sections)
}
