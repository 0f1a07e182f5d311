use std::collections::HashMap;
use std::sync::OnceLock;

use unicode_normalization::char::{decompose_canonical, is_combining_mark};

use crate::{Error, Result};

const DEFAULT_TABLE: &str = include_str!("../../data/translit.tsv");

/// Base-letter folding for Latin script: `á → a`, `Ö → O`, `ø → o`.
///
/// Letters with a canonical decomposition onto an ASCII base drop their
/// marks. Letters without one are looked up in a table. Everything else,
/// including digraph candidates such as `ß` or `æ`, passes through.
#[derive(Debug, Clone)]
pub struct Transliterator {
    table: HashMap<char, String>,
}

impl Default for Transliterator {
    fn default() -> Self {
        Self::from_table(DEFAULT_TABLE).expect("bundled transliteration table parses")
    }
}

impl Transliterator {
    /// Parse a `<char>\t<replacement>` table. Lines starting with `#` are comments.
    pub fn from_table(text: &str) -> Result<Self> {
        let mut table = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('\t')
                .ok_or_else(|| Error::invalid(format!("translit table line {}: missing tab", i + 1)))?;
            let mut chars = key.chars();
            let (Some(c), None) = (chars.next(), chars.next()) else {
                return Err(Error::invalid(format!(
                    "translit table line {}: key must be one character",
                    i + 1
                )));
            };
            table.insert(c, value.to_string());
        }
        Ok(Transliterator { table })
    }

    /// Default folding plus the entries of `text`, which take precedence.
    pub fn with_overrides(text: &str) -> Result<Self> {
        let mut base = Self::default();
        base.table.extend(Self::from_table(text)?.table);
        Ok(base)
    }

    pub fn apply(&self, raw: &str) -> String {
        let mut out = String::with_capacity(raw.len());
        // Marks are dropped only when they trail a folded Latin letter.
        let mut after_latin = false;
        for c in raw.chars() {
            if let Some(rep) = self.table.get(&c) {
                out.push_str(rep);
                after_latin = true;
                continue;
            }
            if c.is_ascii_alphabetic() {
                out.push(c);
                after_latin = true;
                continue;
            }
            if is_combining_mark(c) {
                if !after_latin {
                    out.push(c);
                }
                continue;
            }
            let mut parts = Vec::with_capacity(3);
            decompose_canonical(c, |d| parts.push(d));
            let base = parts[0];
            let marks_only = parts[1..].iter().all(|&d| is_combining_mark(d));
            if parts.len() > 1 && marks_only {
                if base.is_ascii_alphabetic() {
                    out.push(base);
                    after_latin = true;
                    continue;
                }
                if let Some(rep) = self.table.get(&base) {
                    out.push_str(rep);
                    after_latin = true;
                    continue;
                }
            }
            out.push(c);
            after_latin = false;
        }
        out
    }
}

fn default_transliterator() -> &'static Transliterator {
    static DEFAULT: OnceLock<Transliterator> = OnceLock::new();
    DEFAULT.get_or_init(Transliterator::default)
}

/// Fold accented Latin letters with the bundled table.
pub fn transliterate(raw: &str) -> String {
    default_transliterator().apply(raw)
}
