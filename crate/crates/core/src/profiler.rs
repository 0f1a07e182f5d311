//! Distribution reports over a built dataset or a reference corpus, so the
//! two can be compared facet by facet.
//!
//! Every facet works on [`NameInstance`]s: one per (citation, author slot)
//! for a reference corpus, one per linked claim for a dataset. Callers that
//! want to prune instances filter the slice before profiling.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::builder::BlockDataset;
use crate::ingest::CitationRecord;
use crate::linker::LinkedClaim;
use crate::namekit::{parse_name, variation_degree, VariationChecker, VariationMeasure};
use crate::{Error, Result};

/// Key of the bin that collects values with no known category.
pub const UNKNOWN: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub key: String,
    pub count: u64,
    pub proportion: f64,
}

/// Counts per bin, in display order, with proportions of `total`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub facet: String,
    pub bins: Vec<Bin>,
    pub total: u64,
}

impl DistributionReport {
    /// Bins keep the given order; empty bins are dropped.
    pub fn from_counts<K: Into<String>>(facet: impl Into<String>, counts: impl IntoIterator<Item = (K, u64)>) -> Self {
        let counts: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|(_, c)| *c > 0)
            .map(|(k, c)| (k.into(), c))
            .collect();
        let total: u64 = counts.iter().map(|(_, c)| c).sum();
        let bins = counts
            .into_iter()
            .map(|(key, count)| Bin {
                key,
                count,
                proportion: count as f64 / total as f64,
            })
            .collect();
        DistributionReport {
            facet: facet.into(),
            bins,
            total,
        }
    }

    pub fn proportion(&self, key: &str) -> f64 {
        self.bins.iter().find(|b| b.key == key).map_or(0.0, |b| b.proportion)
    }

    pub fn count(&self, key: &str) -> u64 {
        self.bins.iter().find(|b| b.key == key).map_or(0, |b| b.count)
    }
}

/// One author slot of one citation.
#[derive(Debug, Clone, Copy)]
pub struct NameInstance<'a> {
    pub name: &'a str,
    pub position: u32,
    pub citation: &'a CitationRecord,
}

/// Every author slot of every citation.
pub fn corpus_instances<'a>(citations: impl IntoIterator<Item = &'a CitationRecord>) -> Vec<NameInstance<'a>> {
    citations
        .into_iter()
        .flat_map(|c| {
            c.authors.iter().enumerate().map(move |(i, slot)| NameInstance {
                name: &slot.name,
                position: i as u32 + 1,
                citation: c,
            })
        })
        .collect()
}

/// The identified byline slot of every claim.
pub fn claim_instances<'a>(claims: impl IntoIterator<Item = &'a LinkedClaim>) -> Vec<NameInstance<'a>> {
    claims
        .into_iter()
        .filter_map(|c| {
            Some(NameInstance {
                name: c.byline_name()?,
                position: c.position,
                citation: &c.citation,
            })
        })
        .collect()
}

/// Publications per year; citations without a year go to [`UNKNOWN`].
pub fn year_distribution<'a>(citations: impl IntoIterator<Item = &'a CitationRecord>) -> DistributionReport {
    let mut years: BTreeMap<i32, u64> = BTreeMap::new();
    let mut unknown = 0;
    for c in citations {
        match c.year {
            Some(y) => *years.entry(y).or_default() += 1,
            None => unknown += 1,
        }
    }
    let bins = years
        .into_iter()
        .map(|(y, n)| (y.to_string(), n))
        .chain([(UNKNOWN.to_string(), unknown)]);
    DistributionReport::from_counts("year", bins)
}

/// Author positions; positions above `cap` share the bin `"{cap+1}+"`.
pub fn position_distribution(instances: &[NameInstance<'_>], cap: u32) -> DistributionReport {
    let mut counts = vec![0u64; cap as usize + 1];
    let mut over = 0;
    for inst in instances {
        match inst.position {
            p if p > cap => over += 1,
            p => counts[p as usize] += 1,
        }
    }
    let bins = (1..=cap as usize)
        .map(|p| (p.to_string(), counts[p]))
        .chain([(format!("{}+", cap + 1), over)])
        .chain([(UNKNOWN.to_string(), counts[0])]);
    DistributionReport::from_counts("author_position", bins)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NameKey {
    /// Last name.
    #[serde(rename = "LN")]
    Ln,
    /// Last name plus first initial.
    #[serde(rename = "LNFI")]
    Lnfi,
}

impl NameKey {
    pub fn as_str(self) -> &'static str {
        match self {
            NameKey::Ln => "LN",
            NameKey::Lnfi => "LNFI",
        }
    }

    pub fn of(self, name: &str) -> String {
        let parsed = parse_name(name);
        let family = parsed.family.to_lowercase();
        match (self, parsed.first_initial()) {
            (NameKey::Lnfi, Some(i)) => format!("{family} {}", i.to_lowercase()),
            _ => family,
        }
    }
}

/// `"1"`, `"2-3"`, `"4-7"`, ...: the power-of-two bucket holding `n >= 1`.
pub fn log2_bucket(n: u64) -> (u64, String) {
    let lo = 1u64 << (63 - n.leading_zeros());
    let hi = lo.saturating_mul(2) - 1;
    let key = if lo == hi { lo.to_string() } else { format!("{lo}-{hi}") };
    (lo, key)
}

/// For every name instance, how often its key occurs in `instances`,
/// bucketed by powers of two.
pub fn name_popularity(instances: &[NameInstance<'_>], key: NameKey) -> DistributionReport {
    let keys: Vec<String> = instances.par_iter().map(|i| key.of(i.name)).collect();
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for k in &keys {
        *freq.entry(k.as_str()).or_default() += 1;
    }
    let mut buckets: BTreeMap<u64, (String, u64)> = BTreeMap::new();
    for k in &keys {
        let (lo, label) = log2_bucket(freq[k.as_str()]);
        buckets.entry(lo).or_insert((label, 0)).1 += 1;
    }
    DistributionReport::from_counts(format!("name_popularity_{}", key.as_str()), buckets.into_values())
}

/// What a lookup table is keyed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LookupField {
    Name,
    Given,
    Family,
    PaperId,
    Venue,
}

impl std::str::FromStr for LookupField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "name" => Ok(LookupField::Name),
            "given" => Ok(LookupField::Given),
            "family" => Ok(LookupField::Family),
            "paper_id" => Ok(LookupField::PaperId),
            "venue" => Ok(LookupField::Venue),
            other => Err(Error::invalid(format!("unknown lookup field {other:?}"))),
        }
    }
}

/// Lowercased alphanumeric tokens joined by single spaces.
pub fn lookup_key(raw: &str) -> String {
    let lower = raw.to_lowercase();
    let tokens: Vec<String> = lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect();
    tokens.join(" ")
}

/// Category per normalized key, e.g. a gender or ethnicity per name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupTable {
    pub name: String,
    pub field: LookupField,
    entries: HashMap<String, String>,
}

impl LookupTable {
    pub fn new<K: AsRef<str>, V: Into<String>>(
        name: impl Into<String>,
        field: LookupField,
        entries: impl IntoIterator<Item = (K, V)>,
    ) -> Result<Self> {
        let mut map = HashMap::new();
        for (k, v) in entries {
            let key = lookup_key(k.as_ref());
            if map.insert(key.clone(), v.into()).is_some() {
                return Err(Error::invalid(format!("duplicate lookup key {key:?}")));
            }
        }
        Ok(LookupTable {
            name: name.into(),
            field,
            entries: map,
        })
    }

    /// Tab-separated `key<TAB>category` lines; blank lines and `#` comments skipped.
    pub fn parse_tsv(name: impl Into<String>, field: LookupField, text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('\t')
                .ok_or_else(|| Error::invalid(format!("lookup line {} has no tab", n + 1)))?;
            entries.push((k.to_string(), v.trim().to_string()));
        }
        Self::new(name, field, entries)
    }

    pub fn read_tsv(name: impl Into<String>, field: LookupField, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(name, field, &text)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, raw: &str) -> Option<&str> {
        self.entries.get(&lookup_key(raw)).map(String::as_str)
    }

    fn value_of(&self, inst: &NameInstance<'_>) -> Option<&str> {
        match self.field {
            LookupField::Name => self.get(inst.name),
            LookupField::Given => self.get(&parse_name(inst.name).given),
            LookupField::Family => self.get(&parse_name(inst.name).family),
            LookupField::PaperId => self.get(&inst.citation.paper_id),
            LookupField::Venue => self.get(&inst.citation.venue),
        }
    }
}

/// Categories joined onto name instances; misses go to [`UNKNOWN`].
pub fn lookup_distribution(instances: &[NameInstance<'_>], table: &LookupTable) -> DistributionReport {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    let mut unknown = 0;
    for inst in instances {
        match table.value_of(inst) {
            Some(v) => *counts.entry(v).or_default() += 1,
            None => unknown += 1,
        }
    }
    let bins = counts.into_iter().map(|(k, n)| (k.to_string(), n)).chain([(UNKNOWN.to_string(), unknown)]);
    DistributionReport::from_counts(format!("lookup_{}", table.name), bins)
}

/// The registry family name behind a credible full name.
pub fn official_family(cfn: &str) -> String {
    parse_name(cfn).family
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockProfile {
    /// Citations per block.
    pub block_size: DistributionReport,
    /// Variant byline names (ends-with, character sensitive) per block-size bucket.
    pub variants_by_block_size: DistributionReport,
    /// Registry authors per block.
    pub authors_per_block: DistributionReport,
}

pub fn block_profile(ds: &BlockDataset, checker: &VariationChecker) -> BlockProfile {
    let mut sizes: BTreeMap<usize, u64> = BTreeMap::new();
    let mut authors: BTreeMap<usize, u64> = BTreeMap::new();
    let mut variants: BTreeMap<u64, (String, u64)> = BTreeMap::new();
    let per_block: Vec<(usize, usize, u64)> = ds
        .blocks
        .par_iter()
        .map(|b| {
            let n_variants = b
                .claims()
                .filter(|c| {
                    c.byline_name().is_some_and(|name| {
                        checker
                            .check(name, &official_family(&c.cfn), VariationMeasure::EndWith, true)
                            .is_variant
                    })
                })
                .count() as u64;
            (b.n_citations(), b.n_authors(), n_variants)
        })
        .collect();
    for (size, n_authors, n_variants) in per_block {
        *sizes.entry(size).or_default() += 1;
        *authors.entry(n_authors).or_default() += 1;
        if size > 0 {
            let (lo, label) = log2_bucket(size as u64);
            variants.entry(lo).or_insert((label, 0)).1 += n_variants;
        }
    }
    let numbered = |m: BTreeMap<usize, u64>| m.into_iter().map(|(k, n)| (k.to_string(), n)).collect::<Vec<_>>();
    BlockProfile {
        block_size: DistributionReport::from_counts("block_size", numbered(sizes)),
        variants_by_block_size: DistributionReport::from_counts("variants_by_block_size", variants.into_values()),
        authors_per_block: DistributionReport::from_counts("authors_per_block", numbered(authors)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationRow {
    pub measure: VariationMeasure,
    pub csvd: f64,
    pub civd: f64,
    pub total: u64,
}

/// Character-sensitive and -insensitive variation degree of byline names
/// against the family name of each claim's registry name.
pub fn variation_report<'a>(
    claims: impl IntoIterator<Item = &'a LinkedClaim>,
    checker: &VariationChecker,
) -> Result<Vec<VariationRow>> {
    let pairs: Vec<(&str, String)> = claims
        .into_iter()
        .filter_map(|c| Some((c.byline_name()?, official_family(&c.cfn))))
        .collect();
    VariationMeasure::ALL
        .iter()
        .map(|&measure| {
            let degree = |sensitive| {
                variation_degree(pairs.iter().map(|(name, family)| checker.check(name, family, measure, sensitive)))
            };
            Ok(VariationRow {
                measure,
                csvd: degree(true)?,
                civd: degree(false)?,
                total: pairs.len() as u64,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinGap {
    pub key: String,
    pub left: f64,
    pub right: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportComparison {
    pub facet: String,
    pub gaps: Vec<BinGap>,
    pub max_gap: f64,
}

/// Absolute proportion differences over the union of bins.
pub fn compare_reports(a: &DistributionReport, b: &DistributionReport) -> ReportComparison {
    let mut seen = BTreeSet::new();
    let keys: Vec<&str> = a
        .bins
        .iter()
        .chain(&b.bins)
        .map(|bin| bin.key.as_str())
        .filter(|k| seen.insert(*k))
        .collect();
    let gaps: Vec<BinGap> = keys
        .into_iter()
        .map(|key| {
            let (left, right) = (a.proportion(key), b.proportion(key));
            BinGap {
                key: key.to_string(),
                left,
                right,
                gap: (left - right).abs(),
            }
        })
        .collect();
    let max_gap = gaps.iter().map(|g| g.gap).fold(0.0, f64::max);
    ReportComparison {
        facet: a.facet.clone(),
        gaps,
        max_gap,
    }
}

/// Plot-ready `facet key count proportion` rows with a header line.
pub fn reports_to_tsv(reports: &[&DistributionReport]) -> String {
    let mut out = String::from("facet\tkey\tcount\tproportion\n");
    for r in reports {
        for b in &r.bins {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", r.facet, b.key, b.count, b.proportion);
        }
    }
    out
}

pub fn variation_to_tsv(rows: &[VariationRow]) -> String {
    let mut out = String::from("measure\tcsvd\tcivd\ttotal\n");
    for r in rows {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", r.measure.as_str(), r.csvd, r.civd, r.total);
    }
    out
}

pub fn comparison_to_tsv(comparisons: &[ReportComparison]) -> String {
    let mut out = String::from("facet\tkey\tleft\tright\tgap\n");
    for c in comparisons {
        for g in &c.gaps {
            let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", c.facet, g.key, g.left, g.right, g.gap);
        }
        let _ = writeln!(out, "{}\t*max\t\t\t{}", c.facet, c.max_gap);
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
