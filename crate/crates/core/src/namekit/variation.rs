use serde::{Deserialize, Serialize};

use super::parse::{default_parser, NameParser};
use super::translit::Transliterator;
use crate::{Error, Result};

/// How a byline name is compared against the registry family name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariationMeasure {
    /// The byline name ends with the family name.
    EndWith,
    /// The parsed family name equals the registry family name.
    Parser,
}

impl VariationMeasure {
    pub const ALL: [VariationMeasure; 2] = [VariationMeasure::EndWith, VariationMeasure::Parser];

    pub fn as_str(self) -> &'static str {
        match self {
            VariationMeasure::EndWith => "endwith",
            VariationMeasure::Parser => "parser",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariationVerdict {
    pub measure: VariationMeasure,
    pub char_sensitive: bool,
    pub is_variant: bool,
}

/// Variation checks with configurable parsing and folding tables.
#[derive(Debug, Clone, Default)]
pub struct VariationChecker {
    pub parser: NameParser,
    pub translit: Transliterator,
}

impl VariationChecker {
    pub fn new(parser: NameParser, translit: Transliterator) -> Self {
        VariationChecker { parser, translit }
    }

    pub fn check(
        &self,
        byline_name: &str,
        official_family: &str,
        measure: VariationMeasure,
        char_sensitive: bool,
    ) -> VariationVerdict {
        verdict(
            &self.parser,
            &self.translit,
            byline_name,
            official_family,
            measure,
            char_sensitive,
        )
    }
}

fn verdict(
    parser: &NameParser,
    translit: &Transliterator,
    byline_name: &str,
    official_family: &str,
    measure: VariationMeasure,
    char_sensitive: bool,
) -> VariationVerdict {
    // Folding is applied per character after lowercasing, so a match in
    // sensitive mode always survives into insensitive mode.
    let fold = |s: &str| {
        let lower = s.trim().to_lowercase();
        if char_sensitive {
            lower
        } else {
            translit.apply(&lower)
        }
    };
    let family = fold(official_family);
    let matched = match measure {
        VariationMeasure::EndWith => fold(byline_name).ends_with(&family),
        VariationMeasure::Parser => fold(&parser.parse(byline_name).family) == family,
    };
    VariationVerdict {
        measure,
        char_sensitive,
        is_variant: !matched,
    }
}

/// Is `byline_name` a variant of `official_family` under `measure`?
pub fn is_variant(
    byline_name: &str,
    official_family: &str,
    measure: VariationMeasure,
    char_sensitive: bool,
) -> VariationVerdict {
    static DEFAULT: std::sync::OnceLock<Transliterator> = std::sync::OnceLock::new();
    let translit = DEFAULT.get_or_init(Transliterator::default);
    verdict(
        default_parser(),
        translit,
        byline_name,
        official_family,
        measure,
        char_sensitive,
    )
}

/// Share of verdicts that are variants.
pub fn variation_degree<I>(verdicts: I) -> Result<f64>
where
    I: IntoIterator<Item = VariationVerdict>,
{
    let (variants, total) = verdicts
        .into_iter()
        .fold((0u64, 0u64), |(v, t), x| (v + x.is_variant as u64, t + 1));
    if total == 0 {
        return Err(Error::invalid("variation degree needs at least one verdict"));
    }
    Ok(variants as f64 / total as f64)
}
