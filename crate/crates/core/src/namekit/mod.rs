//! Name handling: normalization, character 2-grams, transliteration, parsing
//! and last-name variation measures.

mod ngram;
mod parse;
mod translit;
mod variation;

pub use ngram::{
    bigram_jaccard, bigrams, dice_ratio, dice_similarity, name_dice, normalize_for_ngrams,
    BigramProfile, NormalizedName,
};
pub use parse::{parse_name, NameParser, ParsedName};
pub use translit::{transliterate, Transliterator};
pub use variation::{
    is_variant, variation_degree, VariationChecker, VariationMeasure, VariationVerdict,
};
