//! Block dataset construction, trimming, pair sampling and aligned splits.
//!
//! Claims are grouped by author ID into citation groups, and citation groups
//! by exact credible full name into blocks. Every ordering is canonical
//! (blocks by key, groups by author ID, items by DOI), so the output does not
//! depend on the order claims arrive in.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linker::LinkedClaim;
use crate::seed::{derive_seed, rng_for};
use crate::{Error, Result, FORMAT_VERSION};

/// All linked claims of one author inside a block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationGroup {
    pub author_id: String,
    pub items: Vec<LinkedClaim>,
}

/// Citation groups sharing one credible full name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub cfn_key: String,
    pub groups: Vec<CitationGroup>,
}

impl Block {
    /// Claims in canonical order (groups by author ID, then items by DOI).
    pub fn claims(&self) -> impl Iterator<Item = &LinkedClaim> {
        self.groups.iter().flat_map(|g| g.items.iter())
    }

    pub fn n_citations(&self) -> usize {
        self.groups.iter().map(|g| g.items.len()).sum()
    }

    pub fn n_authors(&self) -> usize {
        self.groups.len()
    }
}

/// Where a dataset came from: enough to regenerate it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub format_version: u32,
    pub seed: Option<u64>,
    /// Parameters that shaped the dataset, e.g. the position margin.
    pub params: BTreeMap<String, String>,
    /// Input file name → SHA-256.
    pub inputs: BTreeMap<String, String>,
    pub trimmed: bool,
}

impl Provenance {
    pub fn new() -> Self {
        Provenance {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            format_version: FORMAT_VERSION,
            ..Provenance::default()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDataset {
    pub blocks: Vec<Block>,
    pub provenance: Provenance,
}

impl BlockDataset {
    pub fn n_citations(&self) -> usize {
        self.blocks.iter().map(Block::n_citations).sum()
    }

    pub fn claims(&self) -> impl Iterator<Item = &LinkedClaim> {
        self.blocks.iter().flat_map(Block::claims)
    }

    pub fn block(&self, cfn_key: &str) -> Option<&Block> {
        self.blocks
            .binary_search_by(|b| b.cfn_key.as_str().cmp(cfn_key))
            .ok()
            .map(|i| &self.blocks[i])
    }

    /// Unique citations across all blocks, ordered by DOI.
    pub fn unique_citations(&self) -> Vec<&crate::ingest::CitationRecord> {
        let mut by_doi = BTreeMap::new();
        for claim in self.claims() {
            by_doi.entry(claim.doi.as_str()).or_insert(&*claim.citation);
        }
        by_doi.into_values().collect()
    }

    /// Keep only the blocks for which `keep` holds.
    pub fn filter_blocks(&self, mut keep: impl FnMut(&Block) -> bool) -> BlockDataset {
        BlockDataset {
            blocks: self.blocks.iter().filter(|b| keep(b)).cloned().collect(),
            provenance: self.provenance.clone(),
        }
    }
}

/// Canonical block key: the credible full name with surrounding whitespace removed.
pub fn cfn_key(cfn: &str) -> String {
    cfn.trim().to_string()
}

/// Group positioned claims into blocks. Claims with position 0 are skipped
/// and duplicate (author, DOI) claims keep the first occurrence.
pub fn build_block_dataset<I>(claims: I) -> BlockDataset
where
    I: IntoIterator<Item = LinkedClaim>,
{
    let mut tree: BTreeMap<String, BTreeMap<String, BTreeMap<String, LinkedClaim>>> =
        BTreeMap::new();
    let mut skipped = 0usize;
    for claim in claims {
        if claim.position == 0 {
            skipped += 1;
            continue;
        }
        tree.entry(cfn_key(&claim.cfn))
            .or_default()
            .entry(claim.author_id.clone())
            .or_default()
            .entry(claim.doi.clone())
            .or_insert(claim);
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} claims without an identified position");
    }
    let blocks = tree
        .into_iter()
        .map(|(cfn_key, groups)| Block {
            cfn_key,
            groups: groups
                .into_iter()
                .map(|(author_id, items)| CitationGroup {
                    author_id,
                    items: items.into_values().collect(),
                })
                .collect(),
        })
        .collect();
    BlockDataset {
        blocks,
        provenance: Provenance::new(),
    }
}

/// Keep only blocks with at least two citation groups.
pub fn trim_single_author_blocks(ds: &BlockDataset) -> BlockDataset {
    let mut out = ds.filter_blocks(|b| b.n_authors() >= 2);
    out.provenance.trimmed = true;
    out
}

/// A sampled pair of claims from one block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairwiseInstance {
    pub id: u64,
    pub cfn_key: String,
    pub left_paper_id: String,
    pub right_paper_id: String,
    pub label: bool,
    pub left_author_id: String,
    pub right_author_id: String,
    pub left_doi: String,
    pub right_doi: String,
}

/// Decode the `k`-th unordered pair `(i, j)`, `i < j`, of `n` items in
/// row-major order.
fn pair_at(mut k: usize, n: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row = n - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
        i += 1;
    }
}

/// Sample up to `cap` unordered claim pairs per block, uniformly without
/// replacement (`cap == 0` keeps every pair). Each block draws from its own
/// stream derived from `seed` and the block key, so output does not depend on
/// thread count.
pub fn sample_pairwise(ds: &BlockDataset, cap: usize, seed: u64) -> Vec<PairwiseInstance> {
    let per_block: Vec<Vec<PairwiseInstance>> = ds
        .blocks
        .par_iter()
        .map(|block| {
            let claims: Vec<&LinkedClaim> = block.claims().collect();
            let n = claims.len();
            if n < 2 {
                return Vec::new();
            }
            let total = n * (n - 1) / 2;
            let mut picks: Vec<usize> = if cap == 0 || cap >= total {
                (0..total).collect()
            } else {
                let mut rng = rng_for(derive_seed(seed, "pairwise"), &block.cfn_key);
                rand::seq::index::sample(&mut rng, total, cap).into_vec()
            };
            picks.sort_unstable();
            picks
                .into_iter()
                .map(|k| {
                    let (i, j) = pair_at(k, n);
                    let (l, r) = (claims[i], claims[j]);
                    PairwiseInstance {
                        id: 0,
                        cfn_key: block.cfn_key.clone(),
                        left_paper_id: l.citation.paper_id.clone(),
                        right_paper_id: r.citation.paper_id.clone(),
                        label: l.author_id == r.author_id,
                        left_author_id: l.author_id.clone(),
                        right_author_id: r.author_id.clone(),
                        left_doi: l.doi.clone(),
                        right_doi: r.doi.clone(),
                    }
                })
                .collect()
        })
        .collect();
    let mut out: Vec<PairwiseInstance> = per_block.into_iter().flatten().collect();
    for (i, p) in out.iter_mut().enumerate() {
        p.id = i as u64;
    }
    out
}

/// Resolves pairwise instances back to the claims they reference.
pub struct ClaimLookup<'a> {
    map: HashMap<(&'a str, &'a str, &'a str), &'a LinkedClaim>,
}

impl<'a> ClaimLookup<'a> {
    pub fn new(ds: &'a BlockDataset) -> Self {
        let mut map = HashMap::new();
        for block in &ds.blocks {
            for claim in block.claims() {
                map.insert(
                    (block.cfn_key.as_str(), claim.author_id.as_str(), claim.doi.as_str()),
                    claim,
                );
            }
        }
        ClaimLookup { map }
    }

    pub fn get(&self, cfn_key: &str, author_id: &str, doi: &str) -> Option<&'a LinkedClaim> {
        self.map.get(&(cfn_key, author_id, doi)).copied()
    }

    pub fn resolve(&self, pair: &PairwiseInstance) -> Option<(&'a LinkedClaim, &'a LinkedClaim)> {
        Some((
            self.get(&pair.cfn_key, &pair.left_author_id, &pair.left_doi)?,
            self.get(&pair.cfn_key, &pair.right_author_id, &pair.right_doi)?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fold {
    Train,
    Validation,
    Test,
}

impl Fold {
    pub const ALL: [Fold; 3] = [Fold::Train, Fold::Validation, Fold::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Fold::Train => "train",
            Fold::Validation => "validation",
            Fold::Test => "test",
        }
    }
}

impl std::str::FromStr for Fold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Fold::Train),
            "validation" => Ok(Fold::Validation),
            "test" => Ok(Fold::Test),
            other => Err(Error::invalid(format!("unknown fold {other:?}"))),
        }
    }
}

/// Fold of every block key. Pairwise instances follow their block key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitAssignment {
    pub folds: BTreeMap<String, Fold>,
    pub ratios: Option<[u32; 3]>,
}

#[derive(Serialize, Deserialize)]
struct SplitLine {
    cfn_key: String,
    fold: Fold,
}

impl SplitAssignment {
    pub fn fold_of(&self, cfn_key: &str) -> Option<Fold> {
        self.folds.get(cfn_key).copied()
    }

    pub fn blocks_in(&self, ds: &BlockDataset, fold: Fold) -> BlockDataset {
        ds.filter_blocks(|b| self.fold_of(&b.cfn_key) == Some(fold))
    }

    pub fn pairs_in<'a>(
        &self,
        pairs: &'a [PairwiseInstance],
        fold: Fold,
    ) -> Vec<&'a PairwiseInstance> {
        pairs
            .iter()
            .filter(|p| self.fold_of(&p.cfn_key) == Some(fold))
            .collect()
    }

    pub fn count(&self, fold: Fold) -> usize {
        self.folds.values().filter(|&&f| f == fold).count()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let lines: Vec<SplitLine> = self
            .folds
            .iter()
            .map(|(k, &fold)| SplitLine {
                cfn_key: k.clone(),
                fold,
            })
            .collect();
        crate::ingest::write_jsonl(path, &lines)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let lines: Vec<SplitLine> = crate::ingest::read_jsonl_strict(path)?;
        Ok(SplitAssignment {
            folds: lines.into_iter().map(|l| (l.cfn_key, l.fold)).collect(),
            ratios: None,
        })
    }
}

/// Fold sizes by the largest-remainder method, so each size is within one
/// of its exact share.
fn fold_sizes(n: usize, ratios: [u32; 3]) -> [usize; 3] {
    let total: u64 = ratios.iter().map(|&r| r as u64).sum();
    let exact: Vec<(usize, u64)> = ratios
        .iter()
        .map(|&r| {
            let num = n as u64 * r as u64;
            ((num / total) as usize, num % total)
        })
        .collect();
    let mut sizes = [exact[0].0, exact[1].0, exact[2].0];
    let mut left = n - sizes.iter().sum::<usize>();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| exact[b].1.cmp(&exact[a].1).then(a.cmp(&b)));
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        sizes[i] += 1;
        left -= 1;
    }
    sizes
}

/// Shuffle block keys under `seed` and cut them into train/validation/test
/// by `ratios` (which must sum to 100). Every pair must belong to a block of `ds`.
pub fn split(
    ds: &BlockDataset,
    pairs: &[PairwiseInstance],
    ratios: [u32; 3],
    seed: u64,
) -> Result<SplitAssignment> {
    if ratios.iter().sum::<u32>() != 100 {
        return Err(Error::invalid(format!(
            "split ratios must sum to 100, got {ratios:?}"
        )));
    }
    let mut keys: Vec<&str> = ds.blocks.iter().map(|b| b.cfn_key.as_str()).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.shuffle(&mut rng_for(seed, "split"));
    let sizes = fold_sizes(keys.len(), ratios);
    let mut folds = BTreeMap::new();
    let mut it = keys.into_iter();
    for (fold, size) in Fold::ALL.into_iter().zip(sizes) {
        for key in it.by_ref().take(size) {
            folds.insert(key.to_string(), fold);
        }
    }
    if let Some(p) = pairs.iter().find(|p| !folds.contains_key(&p.cfn_key)) {
        return Err(Error::invalid(format!(
            "pair {} references block {:?} that is not in the dataset",
            p.id, p.cfn_key
        )));
    }
    Ok(SplitAssignment {
        folds,
        ratios: Some(ratios),
    })
}

#[derive(Serialize, Deserialize)]
struct DatasetHeader {
    format_version: u32,
    provenance: Provenance,
}

/// Write a header line with the provenance, then one block per line.
pub fn write_dataset(ds: &BlockDataset, path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    let json = |e: serde_json::Error| Error::io(path, std::io::Error::other(e));
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    let header = DatasetHeader {
        format_version: FORMAT_VERSION,
        provenance: ds.provenance.clone(),
    };
    serde_json::to_writer(&mut out, &header).map_err(json)?;
    out.write_all(b"\n").map_err(io)?;
    for block in &ds.blocks {
        serde_json::to_writer(&mut out, block).map_err(json)?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_dataset(path: &Path) -> Result<BlockDataset> {
    let reader = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let format_err = |line: usize, message: String| Error::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = reader.lines().enumerate();
    let header: DatasetHeader = match lines.next() {
        Some((_, line)) => {
            let line = line.map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&line).map_err(|e| format_err(1, e.to_string()))?
        }
        None => return Err(format_err(1, "missing dataset header".into())),
    };
    if header.format_version != FORMAT_VERSION {
        return Err(format_err(
            1,
            format!("unsupported format version {}", header.format_version),
        ));
    }
    let mut blocks = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        blocks.push(serde_json::from_str(&line).map_err(|e| format_err(i + 1, e.to_string()))?);
    }
    Ok(BlockDataset {
        blocks,
        provenance: header.provenance,
    })
}
