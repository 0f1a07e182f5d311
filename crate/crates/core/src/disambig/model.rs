use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{ContentKind, FeatureExtractor, FeatureVector};
use super::forest::{train_forest, ForestConfig, ForestModel};
use crate::builder::{BlockDataset, ClaimLookup, PairwiseInstance};
use crate::linker::LinkedClaim;
use crate::{Error, Result, FORMAT_VERSION};

/// Anything that scores how likely two claims belong to the same author.
pub trait PairScorer: Sync {
    fn same_author_proba(&self, left: &LinkedClaim, right: &LinkedClaim) -> f64;
}

/// Fitted feature extractor plus the forest trained on its output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairModel {
    pub format_version: u32,
    pub extractor: FeatureExtractor,
    pub forest: ForestModel,
}

/// Resolve pairs to claim references, failing on any dangling pair.
pub fn resolve_pairs<'a>(
    ds: &'a BlockDataset,
    pairs: &[&PairwiseInstance],
) -> Result<Vec<(&'a LinkedClaim, &'a LinkedClaim)>> {
    let lookup = ClaimLookup::new(ds);
    pairs
        .iter()
        .map(|p| {
            lookup.resolve(p).ok_or_else(|| {
                Error::invalid(format!("pair {} does not resolve in the block dataset", p.id))
            })
        })
        .collect()
}

impl PairModel {
    /// Fit features on the training pairs and train the forest.
    pub fn train(
        ds: &BlockDataset,
        train_pairs: &[&PairwiseInstance],
        content_kind: ContentKind,
        forest: &ForestConfig,
        seed: u64,
    ) -> Result<Self> {
        Self::train_with(ds, train_pairs, content_kind, forest, seed, |e| e)
    }

    /// As [`PairModel::train`], with a hook to adjust the fitted extractor
    /// (e.g. attach plugin scores) before features are computed.
    pub fn train_with(
        ds: &BlockDataset,
        train_pairs: &[&PairwiseInstance],
        content_kind: ContentKind,
        forest: &ForestConfig,
        seed: u64,
        adjust: impl FnOnce(FeatureExtractor) -> FeatureExtractor,
    ) -> Result<Self> {
        let resolved = resolve_pairs(ds, train_pairs)?;
        let claims = resolved.iter().flat_map(|(l, r)| [*l, *r]);
        let extractor = adjust(FeatureExtractor::fit(content_kind, &resolved, claims));
        let rows: Vec<Vec<f64>> = resolved
            .par_iter()
            .map(|(l, r)| extractor.extract(l, r).to_row())
            .collect();
        let labels: Vec<bool> = train_pairs.iter().map(|p| p.label).collect();
        let forest = train_forest(&rows, &labels, &extractor.feature_names(), forest, seed)?;
        Ok(PairModel {
            format_version: FORMAT_VERSION,
            extractor,
            forest,
        })
    }

    pub fn features(&self, left: &LinkedClaim, right: &LinkedClaim) -> FeatureVector {
        self.extractor.extract(left, right)
    }

    /// Probabilities for many pairs, in input order.
    pub fn predict_pairs(&self, ds: &BlockDataset, pairs: &[&PairwiseInstance]) -> Result<Vec<f64>> {
        let resolved = resolve_pairs(ds, pairs)?;
        Ok(resolved
            .par_iter()
            .map(|(l, r)| self.same_author_proba(l, r))
            .collect())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut out = BufWriter::new(File::create(path).map_err(io)?);
        serde_json::to_writer(&mut out, self).map_err(|e| Error::io(path, std::io::Error::other(e)))?;
        out.write_all(b"\n").map_err(io)?;
        out.flush().map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let reader = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
        let model: PairModel = serde_json::from_reader(reader).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?;
        if model.format_version != FORMAT_VERSION || model.forest.format_version != FORMAT_VERSION {
            return Err(Error::Format {
                path: path.to_path_buf(),
                line: 1,
                message: format!("unsupported model format version {}", model.format_version),
            });
        }
        Ok(model)
    }
}

impl PairScorer for PairModel {
    fn same_author_proba(&self, left: &LinkedClaim, right: &LinkedClaim) -> f64 {
        self.forest.predict_proba(&self.features(left, right).to_row())
    }
}
