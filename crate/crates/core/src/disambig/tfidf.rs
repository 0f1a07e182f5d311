use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::features::{tokenize, Similarity};

/// Document frequencies turned into smoothed inverse document frequencies:
/// `idf(t) = ln((1 + N) / (1 + df(t))) + 1`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TfidfIndex {
    pub n_docs: usize,
    pub idf: BTreeMap<String, f64>,
}

pub fn fit_tfidf<'a, I>(train_contents: I) -> TfidfIndex
where
    I: IntoIterator<Item = &'a str>,
{
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    let mut n_docs = 0;
    for doc in train_contents {
        n_docs += 1;
        let terms: BTreeSet<String> = tokenize(doc).collect();
        for t in terms {
            *df.entry(t).or_default() += 1;
        }
    }
    let n = n_docs as f64;
    let idf = df
        .into_iter()
        .map(|(t, d)| (t, ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0))
        .collect();
    TfidfIndex { n_docs, idf }
}

impl TfidfIndex {
    /// Raw term counts weighted by idf; out-of-vocabulary terms are dropped.
    pub fn vector(&self, text: &str) -> BTreeMap<String, f64> {
        let mut tf: BTreeMap<String, f64> = BTreeMap::new();
        for t in tokenize(text) {
            if self.idf.contains_key(&t) {
                *tf.entry(t).or_default() += 1.0;
            }
        }
        for (t, w) in tf.iter_mut() {
            *w *= self.idf[t];
        }
        tf
    }
}

fn cosine(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> Option<f64> {
    let norm = |v: &BTreeMap<String, f64>| v.values().map(|x| x * x).sum::<f64>().sqrt();
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    // Summing shared terms in sorted order keeps the result exactly symmetric.
    let dot: f64 = a
        .iter()
        .filter_map(|(t, x)| b.get(t).map(|y| x * y))
        .sum();
    Some((dot / (na * nb)).clamp(0.0, 1.0))
}

/// Cosine of the tf-idf vectors of two texts; missing when either vector is empty.
pub fn content_tfidf_sim(index: &TfidfIndex, a: &str, b: &str) -> Similarity {
    match cosine(&index.vector(a), &index.vector(b)) {
        Some(value) => Similarity::present(value),
        None => Similarity::MISSING,
    }
}
