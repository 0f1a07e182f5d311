use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seed::rng_for;
use crate::{Error, Result, FORMAT_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Nodes with fewer (bootstrap-weighted) samples become leaves.
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    /// Features tried per node; `None` means `ceil(sqrt(d))`.
    pub max_features: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_depth: None,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
    /// Unnormalized weighted impurity decrease per feature.
    importance: Vec<f64>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    fn n_splits(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Split { .. }))
            .count()
    }
}

/// Bagged ensemble of Gini decision trees for binary labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub format_version: u32,
    pub feature_names: Vec<String>,
    pub config: ForestConfig,
    pub seed: u64,
    pub n_trees: usize,
    trees: Vec<Tree>,
}

fn gini(pos: f64, total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let p = pos / total;
    2.0 * p * (1.0 - p)
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [bool],
    weight: Vec<f64>,
    cfg: &'a ForestConfig,
    mtry: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    importance: Vec<f64>,
    total_weight: f64,
}

impl Builder<'_> {
    fn stats(&self, idx: &[usize]) -> (f64, f64) {
        idx.iter().fold((0.0, 0.0), |(w, p), &i| {
            let wi = self.weight[i];
            (w + wi, if self.y[i] { p + wi } else { p })
        })
    }

    fn best_split_on(&self, idx: &mut [usize], feature: usize, w: f64, pos: f64) -> Option<SplitChoice> {
        let x = self.x;
        idx.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]).then(a.cmp(&b)));
        let parent = w * gini(pos, w);
        let min_leaf = self.cfg.min_samples_leaf as f64;
        let mut best: Option<SplitChoice> = None;
        let (mut lw, mut lp) = (0.0, 0.0);
        for k in 0..idx.len() - 1 {
            let i = idx[k];
            lw += self.weight[i];
            if self.y[i] {
                lp += self.weight[i];
            }
            let (lo, hi) = (x[i][feature], x[idx[k + 1]][feature]);
            if lo == hi || lw < min_leaf || w - lw < min_leaf {
                continue;
            }
            let decrease = parent - lw * gini(lp, lw) - (w - lw) * gini(pos - lp, w - lw);
            if best.as_ref().is_none_or(|b| decrease > b.decrease) {
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                best = Some(SplitChoice {
                    feature,
                    threshold,
                    decrease,
                });
            }
        }
        best
    }

    fn grow(&mut self, mut idx: Vec<usize>, depth: usize) -> u32 {
        let (w, pos) = self.stats(&idx);
        let id = self.nodes.len() as u32;
        self.nodes.push(Node::Leaf {
            value: if w > 0.0 { pos / w } else { 0.0 },
        });
        let pure = pos <= 0.0 || pos >= w;
        let depth_capped = self.cfg.max_depth.is_some_and(|d| depth >= d);
        if pure || w < self.cfg.min_samples_split as f64 || depth_capped || idx.len() < 2 {
            return id;
        }

        let d = self.x[0].len();
        let mut features: Vec<usize> = (0..d).collect();
        features.shuffle(&mut self.rng);
        let mut best: Option<SplitChoice> = None;
        // Keep drawing features past `mtry` only while no valid split exists.
        for (tried, &f) in features.iter().enumerate() {
            if tried >= self.mtry && best.is_some() {
                break;
            }
            if let Some(c) = self.best_split_on(&mut idx, f, w, pos) {
                if best.as_ref().is_none_or(|b| c.decrease > b.decrease) {
                    best = Some(c);
                }
            }
        }
        let Some(choice) = best else {
            return id;
        };

        self.importance[choice.feature] += choice.decrease.max(0.0) / self.total_weight;
        let (left, right): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| self.x[i][choice.feature] <= choice.threshold);
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[id as usize] = Node::Split {
            feature: choice.feature,
            threshold: choice.threshold,
            left: l,
            right: r,
        };
        id
    }
}

fn train_tree(x: &[Vec<f64>], y: &[bool], cfg: &ForestConfig, mtry: usize, mut rng: ChaCha8Rng) -> Tree {
    let n = x.len();
    let mut weight = vec![0.0; n];
    for _ in 0..n {
        weight[rng.gen_range(0..n)] += 1.0;
    }
    let idx: Vec<usize> = (0..n).filter(|&i| weight[i] > 0.0).collect();
    let d = x[0].len();
    let mut b = Builder {
        x,
        y,
        weight,
        cfg,
        mtry,
        rng,
        nodes: Vec::new(),
        importance: vec![0.0; d],
        total_weight: n as f64,
    };
    b.grow(idx, 0);
    Tree {
        nodes: b.nodes,
        importance: b.importance,
    }
}

/// Train a random forest. Each tree gets its own seed derived from `seed`
/// and its index, so results do not depend on the thread count.
pub fn train_forest(
    x: &[Vec<f64>],
    y: &[bool],
    feature_names: &[&str],
    cfg: &ForestConfig,
    seed: u64,
) -> Result<ForestModel> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::invalid(format!(
            "forest needs matching non-empty inputs, got {} rows and {} labels",
            x.len(),
            y.len()
        )));
    }
    let d = x[0].len();
    if d == 0 || x.iter().any(|r| r.len() != d) {
        return Err(Error::invalid("feature rows must share a non-zero width"));
    }
    if feature_names.len() != d {
        return Err(Error::invalid(format!(
            "{} feature names for {d} columns",
            feature_names.len()
        )));
    }
    if cfg.n_trees == 0 {
        return Err(Error::invalid("forest needs at least one tree"));
    }
    if y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
        log::warn!("training labels contain a single class; the forest predicts a constant");
    }
    let mtry = cfg
        .max_features
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d);
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| train_tree(x, y, cfg, mtry, rng_for(seed, &format!("tree-{t}"))))
        .collect();
    Ok(ForestModel {
        format_version: FORMAT_VERSION,
        feature_names: feature_names.iter().map(|s| s.to_string()).collect(),
        config: *cfg,
        seed,
        n_trees: cfg.n_trees,
        trees,
    })
}

/// Mean over trees of the leaf's positive-class fraction.
pub fn predict_proba(model: &ForestModel, x: &[f64]) -> f64 {
    let sum: f64 = model.trees.iter().map(|t| t.predict(x)).sum();
    (sum / model.trees.len() as f64).clamp(0.0, 1.0)
}

impl ForestModel {
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        predict_proba(self, x)
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub features: Vec<FeatureImportance>,
    /// Trees that made at least one split; only these are averaged.
    pub trees_used: usize,
    /// No tree split at all; every importance is reported as 0.
    pub degenerate: bool,
}

/// Per-tree normalized Gini importance, summarized as mean and population
/// standard deviation across trees.
pub fn feature_importance(model: &ForestModel) -> ImportanceReport {
    let d = model.n_features();
    let per_tree: Vec<Vec<f64>> = model
        .trees
        .iter()
        .filter(|t| t.n_splits() > 0)
        .map(|t| {
            let total: f64 = t.importance.iter().sum();
            if total > 0.0 {
                t.importance.iter().map(|v| v / total).collect()
            } else {
                // Only zero-gain splits (e.g. the first cut of an XOR): spread evenly over used features.
                let mut used = vec![0.0; d];
                for n in &t.nodes {
                    if let Node::Split { feature, .. } = n {
                        used[*feature] = 1.0;
                    }
                }
                let k: f64 = used.iter().sum();
                used.iter().map(|u| u / k).collect()
            }
        })
        .collect();
    let k = per_tree.len();
    let features = (0..d)
        .map(|j| {
            let (mean, std) = if k == 0 {
                (0.0, 0.0)
            } else {
                let mean = per_tree.iter().map(|v| v[j]).sum::<f64>() / k as f64;
                let var = per_tree.iter().map(|v| (v[j] - mean).powi(2)).sum::<f64>() / k as f64;
                (mean, var.sqrt())
            };
            FeatureImportance {
                feature: model.feature_names[j].clone(),
                mean,
                std,
            }
        })
        .collect();
    ImportanceReport {
        features,
        trees_used: k,
        degenerate: k == 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn small_cfg() -> ForestConfig {
        ForestConfig {
            n_trees: 25,
            ..ForestConfig::default()
        }
    }

    #[test]
    fn separable_training_accuracy() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, (i % 7) as f64]).collect();
        let y: Vec<bool> = (0..40).map(|i| i >= 20).collect();
        let m = train_forest(&x, &y, &["a", "b"], &ForestConfig::default(), 1).unwrap();
        for (r, &l) in x.iter().zip(&y) {
            assert_eq!(m.predict_proba(r) >= 0.5, l);
        }
    }

    #[test]
    fn single_class_is_constant() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let m = train_forest(&x, &[true; 10], &["a"], &small_cfg(), 0).unwrap();
        assert_eq!(m.predict_proba(&[-5.0]), 1.0);
        assert_eq!(m.predict_proba(&[55.0]), 1.0);
        assert!(feature_importance(&m).degenerate);
    }

    #[test]
    fn xor_holdout() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut pts = |n: usize| -> (Vec<Vec<f64>>, Vec<bool>) {
            let x: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            let y = x.iter().map(|r| (r[0] > 0.0) != (r[1] > 0.0)).collect();
            (x, y)
        };
        let (xt, yt) = pts(400);
        let (xh, yh) = pts(400);
        let m = train_forest(&xt, &yt, &["u", "v"], &ForestConfig::default(), 5).unwrap();
        let correct = xh
            .iter()
            .zip(&yh)
            .filter(|(r, &l)| (m.predict_proba(r) >= 0.5) == l)
            .count();
        assert!(correct as f64 / 400.0 >= 0.95, "accuracy {}", correct as f64 / 400.0);
    }

    #[test]
    fn deterministic_under_seed() {
        let x: Vec<Vec<f64>> = (0..60).map(|i| vec![(i * 37 % 11) as f64, (i % 5) as f64, i as f64]).collect();
        let y: Vec<bool> = (0..60).map(|i| (i * 37 % 11) > 5).collect();
        let a = train_forest(&x, &y, &["a", "b", "c"], &small_cfg(), 9).unwrap();
        let b = train_forest(&x, &y, &["a", "b", "c"], &small_cfg(), 9).unwrap();
        assert_eq!(a, b);
        let c = train_forest(&x, &y, &["a", "b", "c"], &small_cfg(), 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn importance_tracks_the_informative_feature() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<Vec<f64>> = (0..300)
            .map(|_| (0..4).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let y: Vec<bool> = x.iter().map(|r| r[2] > 0.6).collect();
        let m = train_forest(&x, &y, &["f0", "f1", "f2", "f3"], &ForestConfig::default(), 2).unwrap();
        let rep = feature_importance(&m);
        let means: Vec<f64> = rep.features.iter().map(|f| f.mean).collect();
        let top = means.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(means[2], top);
        assert!((means.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(!rep.degenerate);
    }

    #[test]
    fn constant_features_are_degenerate() {
        let x = vec![vec![1.0, 2.0]; 8];
        let y = vec![true, false, true, false, true, false, true, false];
        let m = train_forest(&x, &y, &["a", "b"], &small_cfg(), 0).unwrap();
        let rep = feature_importance(&m);
        assert!(rep.degenerate);
        assert!(rep.features.iter().all(|f| f.mean == 0.0));
        let p = m.predict_proba(&[1.0, 2.0]);
        assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(train_forest(&[], &[], &[], &small_cfg(), 0).is_err());
        assert!(train_forest(&[vec![1.0]], &[true, false], &["a"], &small_cfg(), 0).is_err());
        assert!(train_forest(&[vec![1.0]], &[true], &["a", "b"], &small_cfg(), 0).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64 / 7.0]).collect();
        let y: Vec<bool> = (0..30).map(|i| i % 3 == 0).collect();
        let m = train_forest(&x, &y, &["a"], &small_cfg(), 4).unwrap();
        let back: ForestModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
