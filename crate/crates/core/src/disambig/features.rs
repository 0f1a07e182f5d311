use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::tfidf::{content_tfidf_sim, fit_tfidf, TfidfIndex};
use crate::linker::LinkedClaim;
use crate::namekit::bigram_jaccard;

/// A similarity value with a flag for missing metadata. Missing values are 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub value: f64,
    pub missing: bool,
}

impl Similarity {
    pub const MISSING: Similarity = Similarity {
        value: 0.0,
        missing: true,
    };

    pub fn present(value: f64) -> Self {
        Similarity {
            value,
            missing: false,
        }
    }
}

/// Lowercased alphanumeric tokens.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Word-level set Jaccard. Missing when either side has no tokens.
pub fn word_jaccard(a: &str, b: &str) -> Similarity {
    let ta: BTreeSet<String> = tokenize(a).collect();
    let tb: BTreeSet<String> = tokenize(b).collect();
    if ta.is_empty() || tb.is_empty() {
        return Similarity::MISSING;
    }
    let inter = ta.intersection(&tb).count();
    let union = ta.len() + tb.len() - inter;
    Similarity::present(inter as f64 / union as f64)
}

/// Absolute difference of publication years; `None` when either is absent.
pub fn year_gap(a: Option<i32>, b: Option<i32>) -> Option<u32> {
    Some(a?.abs_diff(b?))
}

/// Set Jaccard over character 2-grams of the normalized names.
pub fn name_similarity(a: &str, b: &str) -> f64 {
    bigram_jaccard(a, b)
}

/// Which content similarity fills the content slot.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentKind {
    None,
    Jaccard,
    #[default]
    Tfidf,
    /// Scores supplied by an external process through a file.
    Plugin,
}

impl std::str::FromStr for ContentKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "none" => Ok(ContentKind::None),
            "jaccard" => Ok(ContentKind::Jaccard),
            "tfidf" => Ok(ContentKind::Tfidf),
            "plugin" => Ok(ContentKind::Plugin),
            other => Err(crate::Error::invalid(format!("unknown content feature {other:?}"))),
        }
    }
}

/// Externally computed content similarities keyed by an unordered pair of paper IDs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PluginScores {
    scores: HashMap<(String, String), f64>,
}

/// One line of a plugin score file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PluginLine {
    pub left_paper_id: String,
    pub right_paper_id: String,
    pub score: f64,
}

fn unordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl PluginScores {
    pub fn from_lines<I: IntoIterator<Item = PluginLine>>(lines: I) -> crate::Result<Self> {
        let mut scores = HashMap::new();
        for l in lines {
            if !(0.0..=1.0).contains(&l.score) {
                return Err(crate::Error::invalid(format!(
                    "plugin score {} for ({}, {}) is outside [0, 1]",
                    l.score, l.left_paper_id, l.right_paper_id
                )));
            }
            scores.insert(unordered(&l.left_paper_id, &l.right_paper_id), l.score);
        }
        Ok(PluginScores { scores })
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        self.scores.get(&unordered(a, b)).copied()
    }
}

/// Base features plus an optional content feature, with missing-value flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub name_sim: f64,
    pub year_gap: f64,
    pub venue_sim: f64,
    pub affil_sim: f64,
    pub content_sim: Option<f64>,
    pub content_kind: ContentKind,
    pub year_missing: bool,
    pub venue_missing: bool,
    pub affil_missing: bool,
    pub content_missing: bool,
}

impl FeatureVector {
    pub fn names(kind: ContentKind) -> Vec<&'static str> {
        let mut names = vec!["name_sim", "year_gap", "venue_sim", "affil_sim"];
        if kind != ContentKind::None {
            names.push("content_sim");
        }
        names.extend(["year_missing", "venue_missing", "affil_missing"]);
        if kind != ContentKind::None {
            names.push("content_missing");
        }
        names
    }

    /// Model input row, in the order of [`FeatureVector::names`].
    pub fn to_row(&self) -> Vec<f64> {
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        let mut row = vec![self.name_sim, self.year_gap, self.venue_sim, self.affil_sim];
        if let Some(c) = self.content_sim {
            row.push(c);
        }
        row.extend([
            flag(self.year_missing),
            flag(self.venue_missing),
            flag(self.affil_missing),
        ]);
        if self.content_sim.is_some() {
            row.push(flag(self.content_missing));
        }
        row
    }
}

/// Feature extraction state fitted on the training fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureExtractor {
    pub content_kind: ContentKind,
    /// Year gap used when either year is absent: the training median.
    pub year_impute: f64,
    pub tfidf: Option<TfidfIndex>,
    #[serde(skip)]
    pub plugin: Option<PluginScores>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) / 2.0
    }
}

impl FeatureExtractor {
    /// Extractor with no fitted state (year gaps impute to 0).
    pub fn unfitted(content_kind: ContentKind) -> Self {
        FeatureExtractor {
            content_kind,
            year_impute: 0.0,
            tfidf: None,
            plugin: None,
        }
    }

    /// Fit the year imputation on training pairs and, for tf-idf, the
    /// vocabulary on the training citations' title and abstract.
    pub fn fit<'a>(
        content_kind: ContentKind,
        train_pairs: &[(&'a LinkedClaim, &'a LinkedClaim)],
        train_claims: impl IntoIterator<Item = &'a LinkedClaim>,
    ) -> Self {
        let gaps = train_pairs
            .iter()
            .filter_map(|(l, r)| year_gap(l.citation.year, r.citation.year))
            .map(f64::from)
            .collect();
        let tfidf = (content_kind == ContentKind::Tfidf).then(|| {
            let mut seen = BTreeSet::new();
            let docs: Vec<String> = train_claims
                .into_iter()
                .filter(|c| seen.insert(c.doi.as_str()))
                .map(|c| c.citation.content())
                .collect();
            fit_tfidf(docs.iter().map(String::as_str))
        });
        FeatureExtractor {
            content_kind,
            year_impute: median(gaps),
            tfidf,
            plugin: None,
        }
    }

    pub fn with_plugin(mut self, plugin: PluginScores) -> Self {
        self.plugin = Some(plugin);
        self
    }

    pub fn feature_names(&self) -> Vec<&'static str> {
        FeatureVector::names(self.content_kind)
    }

    fn content(&self, left: &LinkedClaim, right: &LinkedClaim) -> Option<Similarity> {
        let (a, b) = (&left.citation, &right.citation);
        match self.content_kind {
            ContentKind::None => None,
            ContentKind::Jaccard => Some(word_jaccard(&a.content(), &b.content())),
            ContentKind::Tfidf => Some(match &self.tfidf {
                Some(idx) => content_tfidf_sim(idx, &a.content(), &b.content()),
                None => Similarity::MISSING,
            }),
            ContentKind::Plugin => Some(
                self.plugin
                    .as_ref()
                    .and_then(|p| p.get(&a.paper_id, &b.paper_id))
                    .map_or(Similarity::MISSING, Similarity::present),
            ),
        }
    }

    pub fn extract(&self, left: &LinkedClaim, right: &LinkedClaim) -> FeatureVector {
        let name_sim = name_similarity(
            left.byline_name().unwrap_or(&left.cfn),
            right.byline_name().unwrap_or(&right.cfn),
        );
        let gap = year_gap(left.citation.year, right.citation.year);
        let venue = word_jaccard(&left.citation.venue, &right.citation.venue);
        let affil = word_jaccard(
            left.affiliation().unwrap_or_default(),
            right.affiliation().unwrap_or_default(),
        );
        let content = self.content(left, right);
        FeatureVector {
            name_sim,
            year_gap: gap.map_or(self.year_impute, f64::from),
            venue_sim: venue.value,
            affil_sim: affil.value,
            content_sim: content.map(|c| c.value),
            content_kind: self.content_kind,
            year_missing: gap.is_none(),
            venue_missing: venue.missing,
            affil_missing: affil.missing,
            content_missing: content.is_some_and(|c| c.missing),
        }
    }
}
