use std::collections::HashSet;
use std::sync::OnceLock;

const DEFAULT_PARTICLES: &str = include_str!("../../data/particles.txt");
const DEFAULT_SUFFIXES: &str = include_str!("../../data/suffixes.txt");

/// A person name split into components.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedName {
    pub given: String,
    /// Particles absorbed into `family`, in order.
    pub particles: Vec<String>,
    /// Family name including any particles, e.g. `van Beethoven`.
    pub family: String,
    /// Lowercased suffixes without punctuation, e.g. `jr`.
    pub suffix: String,
}

impl ParsedName {
    /// First letter of the given name, lowercased.
    pub fn first_initial(&self) -> Option<char> {
        self.given
            .chars()
            .find(|c| c.is_alphabetic())
            .and_then(|c| c.to_lowercase().next())
    }
}

/// Rule-based parser driven by a particle table and a suffix table.
#[derive(Debug, Clone)]
pub struct NameParser {
    particles: HashSet<String>,
    suffixes: HashSet<String>,
}

fn word_list(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

fn bare(token: &str) -> String {
    token
        .trim_matches(|c: char| c == '.' || c == ',')
        .to_lowercase()
}

impl Default for NameParser {
    fn default() -> Self {
        NameParser::from_tables(DEFAULT_PARTICLES, DEFAULT_SUFFIXES)
    }
}

impl NameParser {
    /// Build from one-entry-per-line tables (`#` starts a comment line).
    pub fn from_tables(particles: &str, suffixes: &str) -> Self {
        NameParser {
            particles: word_list(particles),
            suffixes: word_list(suffixes),
        }
    }

    fn is_suffix(&self, token: &str) -> bool {
        self.suffixes.contains(&bare(token))
    }

    fn is_particle(&self, token: &str) -> bool {
        self.particles.contains(&token.to_lowercase())
    }

    pub fn parse(&self, full: &str) -> ParsedName {
        // "Family, Given" unless everything after the comma is a suffix.
        if let Some((before, after)) = full.split_once(',') {
            let after_tokens: Vec<&str> = after.split_whitespace().collect();
            let before = before.trim();
            if !before.is_empty()
                && !after_tokens.is_empty()
                && !after_tokens.iter().all(|t| self.is_suffix(t))
            {
                let (given, suffix) = self.split_suffixes(&after_tokens);
                let family_tokens: Vec<&str> = before.split_whitespace().collect();
                let particles = family_tokens[..family_tokens.len() - 1]
                    .iter()
                    .filter(|t| self.is_particle(t))
                    .map(|t| t.to_string())
                    .collect();
                return ParsedName {
                    given: given.join(" "),
                    particles,
                    family: family_tokens.join(" "),
                    suffix,
                };
            }
        }

        let tokens: Vec<&str> = full
            .split_whitespace()
            .map(|t| t.trim_end_matches(','))
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() {
            return ParsedName::default();
        }
        let (rest, suffix) = self.split_suffixes(&tokens);
        if rest.len() == 1 {
            return ParsedName {
                family: rest[0].to_string(),
                suffix,
                ..ParsedName::default()
            };
        }
        // The first token always stays in the given name.
        let mut start = rest.len() - 1;
        while start > 1 && self.is_particle(rest[start - 1]) {
            start -= 1;
        }
        ParsedName {
            given: rest[..start].join(" "),
            particles: rest[start..rest.len() - 1]
                .iter()
                .map(|t| t.to_string())
                .collect(),
            family: rest[start..].join(" "),
            suffix,
        }
    }

    /// Strip trailing suffix tokens, keeping at least one token.
    fn split_suffixes<'a>(&self, tokens: &[&'a str]) -> (Vec<&'a str>, String) {
        let mut end = tokens.len();
        while end > 1 && self.is_suffix(tokens[end - 1]) {
            end -= 1;
        }
        let suffix = tokens[end..]
            .iter()
            .map(|t| bare(t))
            .collect::<Vec<_>>()
            .join(" ");
        (tokens[..end].to_vec(), suffix)
    }
}

pub(crate) fn default_parser() -> &'static NameParser {
    static DEFAULT: OnceLock<NameParser> = OnceLock::new();
    DEFAULT.get_or_init(NameParser::default)
}

/// Parse with the bundled particle and suffix tables.
pub fn parse_name(full: &str) -> ParsedName {
    default_parser().parse(full)
}
