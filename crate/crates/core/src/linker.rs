//! DOI join between the registry and the corpus, and author position
//! identification inside each linked citation's byline.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ingest::{AuthorRecord, CitationRecord};
use crate::namekit::{bigrams, dice_similarity, normalize_for_ngrams};

/// Floating slack used when comparing score gaps against the margin, so that
/// a gap that is exactly the margin in rational terms is never accepted.
const SCORE_EPS: f64 = 1e-9;

/// A registry claim resolved to a citation, with the claimed author's
/// 1-based byline position (0 while unidentified).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkedClaim {
    pub doi: String,
    pub author_id: String,
    pub cfn: String,
    pub citation: Arc<CitationRecord>,
    pub position: u32,
}

impl LinkedClaim {
    /// Byline name at the identified position.
    pub fn byline_name(&self) -> Option<&str> {
        self.citation.slot(self.position).map(|s| s.name.as_str())
    }

    pub fn affiliation(&self) -> Option<&str> {
        self.citation.slot(self.position).map(|s| s.affiliation.as_str())
    }
}

/// Read-only DOI → citation lookup.
#[derive(Debug, Default, Clone)]
pub struct CitationIndex {
    by_doi: HashMap<String, Arc<CitationRecord>>,
}

impl CitationIndex {
    /// Index citations by DOI. Later duplicates of a DOI are ignored.
    pub fn new<I: IntoIterator<Item = CitationRecord>>(records: I) -> Self {
        let mut by_doi = HashMap::new();
        for rec in records {
            by_doi.entry(rec.doi.clone()).or_insert_with(|| Arc::new(rec));
        }
        CitationIndex { by_doi }
    }

    pub fn get(&self, doi: &str) -> Option<&Arc<CitationRecord>> {
        self.by_doi.get(doi)
    }

    pub fn len(&self) -> usize {
        self.by_doi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_doi.is_empty()
    }

    pub fn citations(&self) -> impl Iterator<Item = &Arc<CitationRecord>> {
        self.by_doi.values()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PositionConfig {
    /// Required lead of the best score over the runner-up.
    pub margin: f64,
    /// Minimum score to accept the sole author of a single-author citation.
    pub single_author_floor: f64,
}

impl Default for PositionConfig {
    fn default() -> Self {
        PositionConfig {
            margin: 0.2,
            single_author_floor: 0.5,
        }
    }
}

/// Dice score of `cfn` against each byline name, in byline order.
pub fn position_scores<S: AsRef<str>>(cfn: &str, author_names: &[S]) -> Vec<f64> {
    let cfn_grams = bigrams(&normalize_for_ngrams(cfn));
    author_names
        .iter()
        .map(|n| dice_similarity(&cfn_grams, &bigrams(&normalize_for_ngrams(n.as_ref()))))
        .collect()
}

/// Pick the byline position of `cfn`, or 0 when it cannot be identified.
///
/// Positions are ranked by descending score (stable, so earlier positions win
/// ties). The best position is accepted only if its score beats the runner-up
/// by more than `cfg.margin`; with a single author it must reach
/// `cfg.single_author_floor`.
pub fn identify_author_position<S: AsRef<str>>(
    cfn: &str,
    author_names: &[S],
    cfg: &PositionConfig,
) -> u32 {
    let scores = position_scores(cfn, author_names);
    let mut ranked: Vec<usize> = (0..scores.len()).collect();
    ranked.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let Some(&best) = ranked.first() else {
        return 0;
    };
    let top = scores[best];
    if top <= 0.0 {
        return 0;
    }
    let accepted = match ranked.get(1) {
        Some(&second) => top - scores[second] > cfg.margin + SCORE_EPS,
        None => top >= cfg.single_author_floor - SCORE_EPS,
    };
    if accepted {
        best as u32 + 1
    } else {
        0
    }
}

/// Streams one claim per (author, claimed DOI) that resolves in the index.
pub struct LinkByDoi<'a, I> {
    registry: I,
    index: &'a CitationIndex,
    current: Option<(AuthorRecord, usize)>,
    resolved: u64,
    unresolved: u64,
    authors: u64,
}

impl<'a, I: Iterator<Item = AuthorRecord>> LinkByDoi<'a, I> {
    pub fn resolved(&self) -> u64 {
        self.resolved
    }

    pub fn unresolved(&self) -> u64 {
        self.unresolved
    }

    pub fn authors(&self) -> u64 {
        self.authors
    }
}

impl<I: Iterator<Item = AuthorRecord>> Iterator for LinkByDoi<'_, I> {
    type Item = LinkedClaim;

    fn next(&mut self) -> Option<LinkedClaim> {
        loop {
            if let Some((author, next_doi)) = self.current.as_mut() {
                while *next_doi < author.claimed_dois.len() {
                    let doi = &author.claimed_dois[*next_doi];
                    *next_doi += 1;
                    match self.index.get(doi) {
                        Some(citation) => {
                            self.resolved += 1;
                            return Some(LinkedClaim {
                                doi: doi.clone(),
                                author_id: author.author_id.clone(),
                                cfn: author.cfn.clone(),
                                citation: Arc::clone(citation),
                                position: 0,
                            });
                        }
                        None => self.unresolved += 1,
                    }
                }
            }
            let author = self.registry.next()?;
            self.authors += 1;
            self.current = Some((author, 0));
        }
    }
}

pub fn link_by_doi<I>(registry: I, index: &CitationIndex) -> LinkByDoi<'_, I::IntoIter>
where
    I: IntoIterator<Item = AuthorRecord>,
{
    LinkByDoi {
        registry: registry.into_iter(),
        index,
        current: None,
        resolved: 0,
        unresolved: 0,
        authors: 0,
    }
}

/// Counts produced by [`link_and_position`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub authors: u64,
    pub resolved: u64,
    pub unresolved: u64,
    pub positioned: u64,
    pub rejected: u64,
    /// Rejections among single-author citations (governed by the floor policy).
    pub rejected_single_author: u64,
    pub margin: f64,
    pub single_author_floor: f64,
}

/// Link, identify positions in parallel, drop unidentified claims and sort
/// the survivors by `(author_id, doi)`.
pub fn link_and_position<I>(
    registry: I,
    index: &CitationIndex,
    cfg: &PositionConfig,
) -> (Vec<LinkedClaim>, LinkReport)
where
    I: IntoIterator<Item = AuthorRecord>,
{
    let mut linker = link_by_doi(registry, index);
    let mut claims: Vec<LinkedClaim> = linker.by_ref().collect();
    claims.par_iter_mut().for_each(|claim| {
        let names: Vec<&str> = claim.citation.authors.iter().map(|a| a.name.as_str()).collect();
        claim.position = identify_author_position(&claim.cfn, &names, cfg);
    });
    let rejected_single_author = claims
        .iter()
        .filter(|c| c.position == 0 && c.citation.authors.len() == 1)
        .count() as u64;
    let before = claims.len() as u64;
    claims.retain(|c| c.position > 0);
    claims.par_sort_by(|a, b| (&a.author_id, &a.doi).cmp(&(&b.author_id, &b.doi)));
    let report = LinkReport {
        authors: linker.authors(),
        resolved: linker.resolved(),
        unresolved: linker.unresolved(),
        positioned: claims.len() as u64,
        rejected: before - claims.len() as u64,
        rejected_single_author,
        margin: cfg.margin,
        single_author_floor: cfg.single_author_floor,
    };
    (claims, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::AuthorSlot;
    use proptest::prelude::*;

    fn citation(doi: &str, names: &[&str]) -> CitationRecord {
        CitationRecord {
            doi: doi.into(),
            paper_id: format!("p-{doi}"),
            title: String::new(),
            abstract_text: String::new(),
            venue: String::new(),
            year: None,
            authors: names
                .iter()
                .map(|n| AuthorSlot {
                    name: n.to_string(),
                    affiliation: String::new(),
                })
                .collect(),
        }
    }

    fn author(id: &str, cfn: &str, dois: &[&str]) -> AuthorRecord {
        AuthorRecord {
            author_id: id.into(),
            cfn: cfn.into(),
            claimed_dois: dois.iter().map(|d| d.to_string()).collect(),
        }
    }

    fn pos(cfn: &str, names: &[&str]) -> u32 {
        identify_author_position(cfn, names, &PositionConfig::default())
    }

    #[test]
    fn ciornei_is_rejected() {
        assert_eq!(pos("Florina Carmen Ciornei", &["M.C. Ciornei", "F.C. Ciornei"]), 0);
    }

    #[test]
    fn clear_match() {
        assert_eq!(pos("John Smith", &["John Smith", "Alice Brown"]), 1);
        assert_eq!(pos("John Smith", &["Alice Brown", "J. Smith", "Bob Stone"]), 2);
    }

    #[test]
    fn single_author_floor() {
        assert_eq!(pos("Fan Wang", &["Wang Fan"]), 1);
        assert_eq!(pos("Fan Wang", &["Alice Brown"]), 0);
        // 12/27 is below the default floor of 0.5.
        assert_eq!(pos("Florina Carmen Ciornei", &["M.C. Ciornei"]), 0);
        let loose = PositionConfig {
            single_author_floor: 0.4,
            ..PositionConfig::default()
        };
        assert_eq!(identify_author_position("Florina Carmen Ciornei", &["M.C. Ciornei"], &loose), 1);
    }

    #[test]
    fn degenerate_inputs() {
        let empty: [&str; 0] = [];
        assert_eq!(pos("John Smith", &empty), 0);
        assert_eq!(pos("John Smith", &["Xy Qz", "Uv Kw"]), 0);
        assert_eq!(pos("", &["John Smith"]), 0);
    }

    #[test]
    fn gap_equal_to_margin_is_rejected() {
        let cfg = PositionConfig::default();
        let scores = position_scores("aaaa", &["aaaa", "aaab"]);
        // 1 - 2·2/6 = 1/3 > 0.2: accepted.
        assert_eq!(identify_author_position("aaaa", &["aaaa", "aaab"], &cfg), 1);
        let exact = PositionConfig {
            margin: scores[0] - scores[1],
            ..cfg
        };
        assert_eq!(identify_author_position("aaaa", &["aaaa", "aaab"], &exact), 0);
    }

    #[test]
    fn link_counts() {
        let index = CitationIndex::new(vec![citation("d1", &["A B"])]);
        let mut l = link_by_doi(vec![author("a1", "A B", &["d1", "d2"])], &index);
        let claims: Vec<_> = l.by_ref().collect();
        assert_eq!(claims.len(), 1);
        assert_eq!(l.unresolved(), 1);

        let two = vec![author("a1", "A B", &["d1"]), author("a2", "C D", &["d1"])];
        assert_eq!(link_by_doi(two, &index).count(), 2);
        assert_eq!(link_by_doi(Vec::new(), &index).count(), 0);
    }

    #[test]
    fn link_and_position_drops_and_sorts() {
        let index = CitationIndex::new(vec![
            citation("d1", &["John Smith", "Alice Brown"]),
            citation("d2", &["M.C. Ciornei", "F.C. Ciornei"]),
            citation("d0", &["J. Smith"]),
        ]);
        let registry = vec![
            author("b", "Florina Carmen Ciornei", &["d2"]),
            author("a", "John Smith", &["d1", "d0", "d9"]),
        ];
        let (claims, report) = link_and_position(registry, &index, &PositionConfig::default());
        let keys: Vec<_> = claims.iter().map(|c| (c.author_id.as_str(), c.doi.as_str(), c.position)).collect();
        assert_eq!(keys, vec![("a", "d0", 1), ("a", "d1", 1)]);
        assert_eq!(report.resolved, 4 - 1);
        assert_eq!(report.unresolved, 1);
        assert_eq!(report.positioned, 2);
        assert_eq!(report.rejected, 1);
        assert_eq!(report.rejected_single_author, 0);
    }

    fn names_strategy() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec("[A-Z][a-z]{1,6} [A-Z][a-z]{2,8}", 1..7)
    }

    proptest! {
        #[test]
        fn permutation_consistent(names in names_strategy(), pick in 0usize..7, rot in 0usize..7) {
            let cfn = names[pick % names.len()].clone();
            let cfg = PositionConfig::default();
            let p = identify_author_position(&cfn, &names, &cfg);
            let mut rotated = names.clone();
            let k = rot % names.len();
            rotated.rotate_left(k);
            let q = identify_author_position(&cfn, &rotated, &cfg);
            if p == 0 {
                prop_assert_eq!(q, 0);
            } else {
                let n = names.len();
                let expected = ((p as usize - 1 + n - k) % n) + 1;
                prop_assert_eq!(q as usize, expected);
            }
        }

        #[test]
        fn accepted_position_leads_by_margin(names in names_strategy(), cfn in "[A-Z][a-z]{1,6} [A-Z][a-z]{2,8}") {
            let cfg = PositionConfig::default();
            let p = identify_author_position(&cfn, &names, &cfg);
            if p > 0 && names.len() > 1 {
                let s = position_scores(&cfn, &names);
                let best = s[p as usize - 1];
                for (i, &x) in s.iter().enumerate() {
                    if i + 1 != p as usize {
                        prop_assert!(best - x > cfg.margin);
                    }
                }
            }
        }

        #[test]
        fn appending_weaker_names_keeps_answer(names in names_strategy(), pick in 0usize..7, extra in "[A-Z][a-z]{1,6} [A-Z][a-z]{2,8}") {
            prop_assume!(names.len() >= 2);
            let cfn = names[pick % names.len()].clone();
            let cfg = PositionConfig::default();
            let s = position_scores(&cfn, &names);
            let mut sorted = s.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            let extra_score = position_scores(&cfn, &[extra.as_str()])[0];
            prop_assume!(extra_score <= sorted[1]);
            let mut more = names.clone();
            more.push(extra);
            prop_assert_eq!(
                identify_author_position(&cfn, &names, &cfg),
                identify_author_position(&cfn, &more, &cfg)
            );
        }
    }
}
