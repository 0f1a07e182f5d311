//! Classification scores, B-cubed clustering scores, and audits of external
//! author-ID assignments against the gold partition.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::builder::{BlockDataset, ClaimLookup, PairwiseInstance};
use crate::linker::LinkedClaim;
use crate::{Error, Result};

/// Precision, recall and F1 of the positive class, plus two-class Macro-F1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub macro_f1: f64,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn classification_metrics(labels: &[bool], predictions: &[bool]) -> Result<ClassificationScore> {
    if labels.len() != predictions.len() {
        return Err(Error::invalid(format!(
            "{} labels but {} predictions",
            labels.len(),
            predictions.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::invalid("classification metrics need at least one instance"));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0u64, 0u64, 0u64, 0u64);
    for (&y, &p) in labels.iter().zip(predictions) {
        match (y, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = harmonic(precision, recall);
    let neg_f1 = harmonic(ratio(tn, tn + fn_), ratio(tn, tn + fp));
    Ok(ClassificationScore {
        precision,
        recall,
        f1,
        macro_f1: (f1 + neg_f1) / 2.0,
        tp,
        fp,
        fn_,
        tn,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BCubedScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl BCubedScore {
    fn from_pr(precision: f64, recall: f64) -> Self {
        BCubedScore {
            precision,
            recall,
            f1: harmonic(precision, recall),
        }
    }
}

/// How per-element B-cubed values are averaged across blocks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum B3Averaging {
    /// Uniform over all elements of all blocks.
    #[default]
    Pooled,
    /// Average within each block, then uniformly over blocks.
    PerBlock,
}

fn dense_ids<L: Eq + Hash>(labels: &[L]) -> Vec<usize> {
    let mut ids = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(l).or_insert(next)
        })
        .collect()
}

/// Sums over elements of per-element B-cubed precision and recall, via the
/// contingency table: `Σ n_pg² / n_p` and `Σ n_pg² / n_g`.
fn bcubed_sums<T, P, G>(pred: &[P], gold: &[G]) -> Result<(T, T)>
where
    T: Num + FromPrimitive + Copy,
    P: Eq + Hash,
    G: Eq + Hash,
{
    if pred.len() != gold.len() {
        return Err(Error::invalid(format!(
            "predicted clustering has {} elements, gold has {}",
            pred.len(),
            gold.len()
        )));
    }
    let p = dense_ids(pred);
    let g = dense_ids(gold);
    let mut cells: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut p_size = vec![0usize; pred.len()];
    let mut g_size = vec![0usize; gold.len()];
    for (&pi, &gi) in p.iter().zip(&g) {
        *cells.entry((pi, gi)).or_default() += 1;
        p_size[pi] += 1;
        g_size[gi] += 1;
    }
    let num = |x: usize| T::from_usize(x).expect("count fits the numeric type");
    let mut sum_p = T::zero();
    let mut sum_r = T::zero();
    for (&(pi, gi), &n) in &cells {
        let sq = num(n * n);
        sum_p = sum_p + sq / num(p_size[pi]);
        sum_r = sum_r + sq / num(g_size[gi]);
    }
    Ok((sum_p, sum_r))
}

/// B-cubed of one clustering against a gold partition of the same elements.
pub fn bcubed<P: Eq + Hash, G: Eq + Hash>(pred: &[P], gold: &[G]) -> Result<BCubedScore> {
    let mut acc = BCubed::default();
    acc.add_block(pred, gold)?;
    acc.score(B3Averaging::Pooled)
}

/// Exact rational B-cubed `(precision, recall, f1)` for small element sets.
pub fn bcubed_exact<P: Eq + Hash, G: Eq + Hash>(
    pred: &[P],
    gold: &[G],
) -> Result<(Ratio<i64>, Ratio<i64>, Ratio<i64>)> {
    if pred.is_empty() {
        return Err(Error::invalid("B-cubed needs at least one element"));
    }
    let (sp, sr): (Ratio<i64>, Ratio<i64>) = bcubed_sums(pred, gold)?;
    let n = Ratio::from_integer(pred.len() as i64);
    let (p, r) = (sp / n, sr / n);
    let f1 = if p + r == Ratio::from_integer(0) {
        Ratio::from_integer(0)
    } else {
        Ratio::from_integer(2) * p * r / (p + r)
    };
    Ok((p, r, f1))
}

/// Accumulates B-cubed sums block by block.
#[derive(Debug, Clone, Default)]
pub struct BCubed {
    sum_p: f64,
    sum_r: f64,
    elements: usize,
    /// Per-block mean precision and recall.
    blocks: Vec<(f64, f64)>,
}

impl BCubed {
    pub fn add_block<P: Eq + Hash, G: Eq + Hash>(&mut self, pred: &[P], gold: &[G]) -> Result<()> {
        let (sp, sr): (f64, f64) = bcubed_sums(pred, gold)?;
        if pred.is_empty() {
            return Ok(());
        }
        self.sum_p += sp;
        self.sum_r += sr;
        self.elements += pred.len();
        let n = pred.len() as f64;
        self.blocks.push((sp / n, sr / n));
        Ok(())
    }

    pub fn merge(&mut self, other: BCubed) {
        self.sum_p += other.sum_p;
        self.sum_r += other.sum_r;
        self.elements += other.elements;
        self.blocks.extend(other.blocks);
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn score(&self, averaging: B3Averaging) -> Result<BCubedScore> {
        if self.elements == 0 {
            return Err(Error::invalid("B-cubed needs at least one element"));
        }
        let (p, r) = match averaging {
            B3Averaging::Pooled => {
                let n = self.elements as f64;
                (self.sum_p / n, self.sum_r / n)
            }
            B3Averaging::PerBlock => {
                let k = self.blocks.len() as f64;
                let (sp, sr) = self
                    .blocks
                    .iter()
                    .fold((0.0, 0.0), |(a, b), &(p, r)| (a + p, b + r));
                (sp / k, sr / k)
            }
        };
        Ok(BCubedScore::from_pr(p, r))
    }
}

/// External author IDs keyed by `(paper_id, 1-based byline position)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExternalIds {
    pub ids: HashMap<(String, u32), String>,
}

/// One line of an external ID file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalIdLine {
    pub paper_id: String,
    pub position: u32,
    pub external_id: String,
}

impl ExternalIds {
    pub fn from_lines<I: IntoIterator<Item = ExternalIdLine>>(lines: I) -> Self {
        ExternalIds {
            ids: lines
                .into_iter()
                .map(|l| ((l.paper_id, l.position), l.external_id))
                .collect(),
        }
    }

    pub fn get(&self, claim: &LinkedClaim) -> Option<&str> {
        self.ids
            .get(&(claim.citation.paper_id.clone(), claim.position))
            .map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub bcubed: BCubedScore,
    pub classification: Option<ClassificationScore>,
    pub claims: usize,
    /// Claims with no external ID; each was scored as its own singleton.
    pub missing: usize,
}

fn external_label(external: &ExternalIds, cfn_key: &str, claim: &LinkedClaim) -> (bool, String) {
    match external.get(claim) {
        Some(id) => (true, id.to_string()),
        None => (
            false,
            format!("\u{0}missing\u{0}{cfn_key}\u{0}{}\u{0}{}", claim.author_id, claim.doi),
        ),
    }
}

/// Score an external ID assignment: as a clustering of each block (B-cubed)
/// and as same/different predictions on the sampled pairs.
pub fn audit_id_system(
    ds: &BlockDataset,
    pairs: &[PairwiseInstance],
    external: &ExternalIds,
    averaging: B3Averaging,
) -> Result<AuditReport> {
    let mut acc = BCubed::default();
    let mut missing = 0usize;
    for block in &ds.blocks {
        let mut pred = Vec::new();
        let mut gold = Vec::new();
        for claim in block.claims() {
            let (found, label) = external_label(external, &block.cfn_key, claim);
            missing += usize::from(!found);
            pred.push(label);
            gold.push(claim.author_id.as_str());
        }
        acc.add_block(&pred, &gold)?;
    }
    let classification = if pairs.is_empty() {
        None
    } else {
        let lookup = ClaimLookup::new(ds);
        let mut labels = Vec::with_capacity(pairs.len());
        let mut preds = Vec::with_capacity(pairs.len());
        for pair in pairs {
            let (l, r) = lookup.resolve(pair).ok_or_else(|| {
                Error::invalid(format!("pair {} does not resolve in the block dataset", pair.id))
            })?;
            labels.push(pair.label);
            preds.push(
                external_label(external, &pair.cfn_key, l).1
                    == external_label(external, &pair.cfn_key, r).1,
            );
        }
        Some(classification_metrics(&labels, &preds)?)
    };
    if missing > 0 {
        log::warn!("{missing} claims have no external ID and were scored as singletons");
    }
    Ok(AuditReport {
        bcubed: acc.score(averaging)?,
        classification,
        claims: acc.elements(),
        missing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_classification() {
        let y = [true, false, true, true];
        let s = classification_metrics(&y, &y).unwrap();
        assert_eq!((s.precision, s.recall, s.f1, s.macro_f1), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn all_positive_predictions() {
        let s = classification_metrics(&[true, true, true, false], &[true; 4]).unwrap();
        assert!((s.f1 - 6.0 / 7.0).abs() < 1e-12);
        assert!((s.macro_f1 - 3.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn all_wrong() {
        let s = classification_metrics(&[true, false, true], &[false, true, false]).unwrap();
        assert_eq!(s.f1, 0.0);
        assert_eq!(s.macro_f1, 0.0);
    }

    #[test]
    fn classification_errors() {
        assert!(classification_metrics(&[], &[]).is_err());
        assert!(classification_metrics(&[true], &[true, false]).is_err());
    }

    #[test]
    fn bcubed_hand_values() {
        let s = bcubed(&[0, 0, 0, 0], &["a", "a", "b", "b"]).unwrap();
        assert_eq!((s.precision, s.recall), (0.5, 1.0));
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-15);

        let (p, r, f) = bcubed_exact(&[0, 1, 2], &[7, 7, 7]).unwrap();
        assert_eq!((p, r, f), (Ratio::from_integer(1), Ratio::new(1, 3), Ratio::new(1, 2)));

        let same = bcubed(&["x", "y", "x"], &[1, 2, 1]).unwrap();
        assert_eq!((same.precision, same.recall, same.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn per_block_averaging_differs_from_pooled() {
        let mut acc = BCubed::default();
        acc.add_block(&[0, 0, 0, 0], &[0, 0, 1, 1]).unwrap();
        acc.add_block(&[0, 0], &[0, 0]).unwrap();
        let pooled = acc.score(B3Averaging::Pooled).unwrap();
        let per_block = acc.score(B3Averaging::PerBlock).unwrap();
        assert!((pooled.precision - (2.0 + 2.0) / 6.0).abs() < 1e-12);
        assert!((per_block.precision - 0.75).abs() < 1e-12);
        assert!(BCubed::default().score(B3Averaging::Pooled).is_err());
    }
}
