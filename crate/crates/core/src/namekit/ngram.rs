use std::collections::{BTreeMap, BTreeSet};

/// A name reduced to lowercase letters, keeping the raw input alongside.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedName {
    pub text: String,
    pub source: String,
}

/// Lowercase and drop every non-alphabetic character (spaces, periods,
/// hyphens, digits). Diacritics are kept.
pub fn normalize_for_ngrams(raw: &str) -> NormalizedName {
    let text = raw
        .chars()
        .flat_map(char::to_lowercase)
        .filter(|c| c.is_alphabetic())
        .collect();
    NormalizedName {
        text,
        source: raw.to_string(),
    }
}

/// Multiset of overlapping character pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BigramProfile {
    pub grams: BTreeMap<(char, char), u32>,
    pub size: usize,
}

impl BigramProfile {
    /// Size of the multiset intersection (sum of per-gram minimum counts).
    pub fn intersection(&self, other: &BigramProfile) -> usize {
        let (small, large) = if self.grams.len() <= other.grams.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .grams
            .iter()
            .filter_map(|(g, &n)| large.grams.get(g).map(|&m| n.min(m) as usize))
            .sum()
    }

    pub fn distinct(&self) -> BTreeSet<(char, char)> {
        self.grams.keys().copied().collect()
    }
}

pub fn bigrams(name: &NormalizedName) -> BigramProfile {
    let chars: Vec<char> = name.text.chars().collect();
    let mut grams = BTreeMap::new();
    for w in chars.windows(2) {
        *grams.entry((w[0], w[1])).or_insert(0) += 1;
    }
    BigramProfile {
        grams,
        size: chars.len().saturating_sub(1),
    }
}

/// Dice coefficient as an unreduced fraction `(2·|A∩B|, |A|+|B|)`.
pub fn dice_ratio(a: &BigramProfile, b: &BigramProfile) -> (usize, usize) {
    (2 * a.intersection(b), a.size + b.size)
}

/// `2·|A∩B| / (|A|+|B|)` over 2-gram multisets; 0 when both are empty.
pub fn dice_similarity(a: &BigramProfile, b: &BigramProfile) -> f64 {
    match dice_ratio(a, b) {
        (_, 0) => 0.0,
        (num, den) => num as f64 / den as f64,
    }
}

/// Dice similarity of two raw names.
pub fn name_dice(a: &str, b: &str) -> f64 {
    dice_similarity(
        &bigrams(&normalize_for_ngrams(a)),
        &bigrams(&normalize_for_ngrams(b)),
    )
}

/// Set Jaccard over distinct 2-grams of two raw names; 0 when both are empty.
pub fn bigram_jaccard(a: &str, b: &str) -> f64 {
    let ga = bigrams(&normalize_for_ngrams(a)).distinct();
    let gb = bigrams(&normalize_for_ngrams(b)).distinct();
    let union = ga.union(&gb).count();
    if union == 0 {
        return 0.0;
    }
    ga.intersection(&gb).count() as f64 / union as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn profile(s: &str) -> BigramProfile {
        bigrams(&normalize_for_ngrams(s))
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_for_ngrams("M.C. Ciornei").text, "mcciornei");
        assert_eq!(normalize_for_ngrams("john smith").text, "johnsmith");
        assert_eq!(normalize_for_ngrams("").text, "");
        assert_eq!(normalize_for_ngrams("Latino-Martel").text, "latinomartel");
        assert_eq!(normalize_for_ngrams("Höper").text, "höper");
    }

    #[test]
    fn john_smith_grams() {
        let p = profile("john smith");
        let expect = ["jo", "oh", "hn", "ns", "sm", "mi", "it", "th"];
        assert_eq!(p.size, 8);
        for g in expect {
            let mut c = g.chars();
            let key = (c.next().unwrap(), c.next().unwrap());
            assert_eq!(p.grams[&key], 1, "{g}");
        }
        assert_eq!(p.grams.len(), 8);
    }

    #[test]
    fn short_and_repeated() {
        assert_eq!(profile("a").size, 0);
        assert!(profile("a").grams.is_empty());
        let p = profile("aaa");
        assert_eq!(p.size, 2);
        assert_eq!(p.grams[&('a', 'a')], 2);
    }

    #[test]
    fn ciornei_scores() {
        let cfn = profile("Florina Carmen Ciornei");
        for fname in ["M.C. Ciornei", "F.C. Ciornei"] {
            assert_eq!(dice_ratio(&cfn, &profile(fname)), (12, 27));
        }
    }

    #[test]
    fn reversed_name() {
        assert_eq!(dice_ratio(&profile("Fan Wang"), &profile("Wang Fan")), (10, 12));
    }

    #[test]
    fn empty_profiles_score_zero() {
        assert_eq!(dice_similarity(&profile(""), &profile("x")), 0.0);
        assert_eq!(bigram_jaccard("", ""), 0.0);
    }

    #[test]
    fn jaccard_johnsmyth() {
        // {jo,oh,hn,ns,sm,mi,it,th} vs {jo,oh,hn,ns,sm,my,yt,th}: 6 shared, 10 total.
        assert!((bigram_jaccard("johnsmith", "johnsmyth") - 0.6).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn dice_symmetric_and_bounded(a in "\\PC{0,16}", b in "\\PC{0,16}") {
            let (pa, pb) = (profile(&a), profile(&b));
            let s = dice_similarity(&pa, &pb);
            prop_assert_eq!(s, dice_similarity(&pb, &pa));
            prop_assert!((0.0..=1.0).contains(&s));
            let equal = pa.grams == pb.grams && pa.size > 0;
            prop_assert_eq!(s == 1.0, equal);
        }

        #[test]
        fn profile_size_is_len_minus_one(a in "\\PC{0,24}") {
            let n = normalize_for_ngrams(&a);
            prop_assert_eq!(bigrams(&n).size, n.text.chars().count().saturating_sub(1));
        }

        #[test]
        fn normalization_idempotent(a in "\\PC{0,24}") {
            let once = normalize_for_ngrams(&a).text;
            prop_assert_eq!(normalize_for_ngrams(&once).text, once.clone());
            prop_assert!(once.chars().all(char::is_alphabetic));
        }
    }
}
