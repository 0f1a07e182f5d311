//! Agglomerative clustering of the claims inside a block, and the grid
//! search that picks the distance threshold on validation blocks.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::builder::{Block, BlockDataset};
use crate::disambig::PairScorer;
use crate::linker::LinkedClaim;
use crate::metrics::{B3Averaging, BCubed, BCubedScore};
use crate::{Error, Result};

/// Symmetric distances with a zero diagonal, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// Build from `dist(i, j)` evaluated once per unordered pair `i < j`.
    pub fn from_fn(n: usize, mut dist: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = dist(i, j);
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::invalid(format!("distance d({i},{j}) = {v} is outside [0, 1]")));
                }
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Ok(DistanceMatrix { n, d })
    }

    /// From a full row-major matrix; checks symmetry, range and the diagonal.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::invalid("distance matrix must be square"));
            }
            if r[i] != 0.0 {
                return Err(Error::invalid("distance matrix diagonal must be zero"));
            }
            for j in 0..n {
                if r[j] != rows[j][i] {
                    return Err(Error::invalid("distance matrix must be symmetric"));
                }
            }
        }
        Self::from_fn(n, |i, j| rows[i][j])
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    #[default]
    Average,
    Single,
    Complete,
}

impl std::str::FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" => Ok(Linkage::Average),
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            other => Err(Error::invalid(format!("unknown linkage {other:?}"))),
        }
    }
}

/// One agglomeration step: clusters represented by their smallest element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
}

/// Full merge sequence of a greedy agglomeration.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub n: usize,
    pub merges: Vec<Merge>,
}

/// Cluster id per element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
}

impl ClusterAssignment {
    pub fn n_clusters(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }
}

fn row_nearest(dist: &[f64], n: usize, active: &[bool], i: usize) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for j in i + 1..n {
        if active[j] && dist[i * n + j] < best.1 {
            best = (j, dist[i * n + j]);
        }
    }
    best
}

/// Agglomerate to a single cluster, always merging the closest pair and
/// breaking ties by the smallest `(i, j)` cluster index pair.
pub fn dendrogram(matrix: &DistanceMatrix, linkage: Linkage) -> Dendrogram {
    let n = matrix.n;
    let mut dist = matrix.d.clone();
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    // Nearest partner with a larger index, per row.
    let mut nn: Vec<(usize, f64)> = (0..n).map(|i| row_nearest(&dist, n, &active, i)).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    for _ in 1..n {
        let mut a = usize::MAX;
        for i in 0..n {
            if active[i] && nn[i].0 != usize::MAX && (a == usize::MAX || nn[i].1 < nn[a].1) {
                a = i;
            }
        }
        let (b, height) = nn[a];
        merges.push(Merge { a, b, height });

        let (sa, sb) = (size[a] as f64, size[b] as f64);
        for k in 0..n {
            if !active[k] || k == a || k == b {
                continue;
            }
            let (da, db) = (dist[a * n + k], dist[b * n + k]);
            let v = match linkage {
                Linkage::Average => (sa * da + sb * db) / (sa + sb),
                Linkage::Single => da.min(db),
                Linkage::Complete => da.max(db),
            };
            dist[a * n + k] = v;
            dist[k * n + a] = v;
        }
        active[b] = false;
        size[a] += size[b];

        nn[a] = row_nearest(&dist, n, &active, a);
        nn[b] = (usize::MAX, f64::INFINITY);
        for i in 0..n {
            if !active[i] || i == a {
                continue;
            }
            if nn[i].0 == a || nn[i].0 == b {
                nn[i] = row_nearest(&dist, n, &active, i);
            } else if i < a {
                let v = dist[i * n + a];
                if v < nn[i].1 || (v == nn[i].1 && a < nn[i].0) {
                    nn[i] = (a, v);
                }
            }
        }
    }
    Dendrogram { n, merges }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl Dendrogram {
    /// Apply merges while their height is at most `threshold`.
    pub fn cut(&self, threshold: f64) -> ClusterAssignment {
        let mut parent: Vec<usize> = (0..self.n).collect();
        for m in self.merges.iter().take_while(|m| m.height <= threshold) {
            let (ra, rb) = (find(&mut parent, m.a), find(&mut parent, m.b));
            parent[ra.max(rb)] = ra.min(rb);
        }
        let mut relabel = HashMap::new();
        let labels = (0..self.n)
            .map(|i| {
                let root = find(&mut parent, i);
                let next = relabel.len();
                *relabel.entry(root).or_insert(next)
            })
            .collect();
        ClusterAssignment { labels }
    }
}

/// Agglomerate while the closest pair of clusters is within `threshold`.
pub fn hac(matrix: &DistanceMatrix, threshold: f64, linkage: Linkage) -> ClusterAssignment {
    dendrogram(matrix, linkage).cut(threshold)
}

/// Claims of a block in canonical order: paper ID, then author ID, then DOI.
pub fn canonical_claims(block: &Block) -> Vec<&LinkedClaim> {
    let mut claims: Vec<&LinkedClaim> = block.claims().collect();
    claims.sort_by(|x, y| {
        (&x.citation.paper_id, &x.author_id, &x.doi).cmp(&(&y.citation.paper_id, &y.author_id, &y.doi))
    });
    claims
}

/// `1 - P(same author)` for every pair of claims in canonical order.
pub fn block_distances<'a, S: PairScorer + ?Sized>(
    block: &'a Block,
    scorer: &S,
) -> Result<(Vec<&'a LinkedClaim>, DistanceMatrix)> {
    let claims = canonical_claims(block);
    let matrix = DistanceMatrix::from_fn(claims.len(), |i, j| {
        1.0 - scorer.same_author_proba(claims[i], claims[j]).clamp(0.0, 1.0)
    })?;
    Ok((claims, matrix))
}

/// A clustered block: claims in canonical order with their cluster ids.
#[derive(Debug, Clone)]
pub struct BlockClustering<'a> {
    pub cfn_key: &'a str,
    pub claims: Vec<&'a LinkedClaim>,
    pub assignment: ClusterAssignment,
}

impl BlockClustering<'_> {
    pub fn gold(&self) -> Vec<&str> {
        self.claims.iter().map(|c| c.author_id.as_str()).collect()
    }
}

struct BlockTree<'a> {
    cfn_key: &'a str,
    claims: Vec<&'a LinkedClaim>,
    dendrogram: Dendrogram,
}

fn block_trees<'a, S: PairScorer + ?Sized>(
    ds: &'a BlockDataset,
    scorer: &S,
    linkage: Linkage,
) -> Result<Vec<BlockTree<'a>>> {
    ds.blocks
        .par_iter()
        .map(|block| {
            let (claims, matrix) = block_distances(block, scorer)?;
            Ok(BlockTree {
                cfn_key: &block.cfn_key,
                claims,
                dendrogram: dendrogram(&matrix, linkage),
            })
        })
        .collect()
}

/// Cluster every block at a fixed threshold.
pub fn cluster_dataset<'a, S: PairScorer + ?Sized>(
    ds: &'a BlockDataset,
    scorer: &S,
    threshold: f64,
    linkage: Linkage,
) -> Result<Vec<BlockClustering<'a>>> {
    Ok(block_trees(ds, scorer, linkage)?
        .into_iter()
        .map(|t| BlockClustering {
            cfn_key: t.cfn_key,
            assignment: t.dendrogram.cut(threshold),
            claims: t.claims,
        })
        .collect())
}

/// B-cubed of clustered blocks against author IDs.
pub fn score_clusterings(clusterings: &[BlockClustering<'_>], averaging: B3Averaging) -> Result<BCubedScore> {
    let mut acc = BCubed::default();
    for c in clusterings {
        acc.add_block(&c.assignment.labels, &c.gold())?;
    }
    acc.score(averaging)
}

/// Evenly spaced thresholds, both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for ThresholdGrid {
    fn default() -> Self {
        ThresholdGrid {
            lo: 0.0,
            hi: 1.0,
            step: 0.05,
        }
    }
}

impl ThresholdGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || self.hi < self.lo {
            return Err(Error::invalid(format!("invalid threshold grid {self:?}")));
        }
        let steps = ((self.hi - self.lo) / self.step).round() as usize;
        // Dividing the span avoids accumulating the step's rounding error.
        Ok((0..=steps)
            .map(|k| {
                if steps == 0 {
                    self.lo
                } else {
                    self.lo + (self.hi - self.lo) * k as f64 / steps as f64
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunePoint {
    pub threshold: f64,
    pub score: BCubedScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best_threshold: f64,
    pub best: BCubedScore,
    pub curve: Vec<TunePoint>,
}

/// Pick the grid threshold with the highest B-cubed F1 on `validation`.
/// Ties go to the smaller threshold, except that a maximum reaching the top
/// of the grid resolves to the top.
pub fn tune_threshold<S: PairScorer + ?Sized>(
    validation: &BlockDataset,
    scorer: &S,
    grid: &ThresholdGrid,
    linkage: Linkage,
    averaging: B3Averaging,
) -> Result<TuneResult> {
    if validation.blocks.is_empty() {
        return Err(Error::invalid("threshold tuning needs at least one block"));
    }
    let trees = block_trees(validation, scorer, linkage)?;
    let golds: Vec<Vec<&str>> = trees
        .iter()
        .map(|t| t.claims.iter().map(|c| c.author_id.as_str()).collect())
        .collect();
    let curve = grid
        .points()?
        .into_par_iter()
        .map(|threshold| {
            let mut acc = BCubed::default();
            for (t, gold) in trees.iter().zip(&golds) {
                acc.add_block(&t.dendrogram.cut(threshold).labels, gold)?;
            }
            Ok(TunePoint {
                threshold,
                score: acc.score(averaging)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = pick_threshold(&curve);
    Ok(TuneResult {
        best_threshold: curve[best].threshold,
        best: curve[best].score,
        curve,
    })
}

/// Index of the best point: the smallest maximizer, unless the maximum is
/// also attained at the top of the grid, where every block is merged.
fn pick_threshold(curve: &[TunePoint]) -> usize {
    let top = curve.iter().map(|p| p.score.f1).fold(f64::NEG_INFINITY, f64::max);
    let last = curve.len() - 1;
    if curve[last].score.f1 == top {
        return last;
    }
    curve.iter().position(|p| p.score.f1 == top).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> DistanceMatrix {
        DistanceMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn two_pairs() -> DistanceMatrix {
        matrix(&[
            &[0.0, 0.1, 0.8, 0.9],
            &[0.1, 0.0, 0.85, 0.7],
            &[0.8, 0.85, 0.0, 0.2],
            &[0.9, 0.7, 0.2, 0.0],
        ])
    }

    #[test]
    fn full_threshold_merges_everything() {
        let a = hac(&two_pairs(), 1.0, Linkage::Average);
        assert_eq!(a.labels, vec![0, 0, 0, 0]);
    }

    #[test]
    fn zero_threshold_keeps_singletons() {
        let a = hac(&two_pairs(), 0.0, Linkage::Average);
        assert_eq!(a.labels, vec![0, 1, 2, 3]);
    }

    #[test]
    fn two_well_separated_pairs() {
        for t in [0.2, 0.5, 0.8] {
            assert_eq!(hac(&two_pairs(), t, Linkage::Average).labels, vec![0, 0, 1, 1]);
        }
        // Average linkage between {0,1} and {2,3} is (0.8+0.9+0.85+0.7)/4 = 0.8125.
        assert_eq!(hac(&two_pairs(), 0.8125, Linkage::Average).n_clusters(), 1);
        assert_eq!(hac(&two_pairs(), 0.7, Linkage::Single).n_clusters(), 1);
        assert_eq!(hac(&two_pairs(), 0.85, Linkage::Complete).n_clusters(), 2);
    }

    #[test]
    fn ties_prefer_the_smallest_index_pair() {
        let m = matrix(&[&[0.0, 0.3, 0.9], &[0.3, 0.0, 0.3], &[0.9, 0.3, 0.0]]);
        // (0,1) merges first; then d({0,1},2) = 0.6 stays above 0.5.
        assert_eq!(hac(&m, 0.5, Linkage::Average).labels, vec![0, 0, 1]);
    }

    #[test]
    fn matrix_validation() {
        assert!(DistanceMatrix::from_rows(&[vec![0.0, 0.2], vec![0.3, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(&[vec![0.1]]).is_err());
        assert!(DistanceMatrix::from_rows(&[vec![0.0, 1.2], vec![1.2, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(&[]).unwrap().is_empty());
        assert!(hac(&DistanceMatrix::from_rows(&[]).unwrap(), 0.5, Linkage::Average).labels.is_empty());
    }

    fn curve(f1s: &[f64]) -> Vec<TunePoint> {
        f1s.iter()
            .enumerate()
            .map(|(i, &f1)| TunePoint {
                threshold: i as f64 / 10.0,
                score: BCubedScore {
                    precision: f1,
                    recall: f1,
                    f1,
                },
            })
            .collect()
    }

    #[test]
    fn tie_rule() {
        assert_eq!(pick_threshold(&curve(&[0.5, 0.9, 0.9, 0.7])), 1);
        assert_eq!(pick_threshold(&curve(&[0.5, 0.9, 0.9, 0.9])), 3);
        assert_eq!(pick_threshold(&curve(&[1.0, 1.0, 0.8, 0.6])), 0);
        assert_eq!(pick_threshold(&curve(&[0.3])), 0);
    }

    #[test]
    fn grid_points() {
        let pts = ThresholdGrid::default().points().unwrap();
        assert_eq!(pts.len(), 21);
        assert_eq!(pts[0], 0.0);
        assert_eq!(pts[20], 1.0);
        assert_eq!(pts[3], 0.15);
        assert!(ThresholdGrid { lo: 0.0, hi: 1.0, step: 0.0 }.points().is_err());
    }
}
