//! Streaming readers for the author registry and the citation corpus.
//!
//! Both inputs are line-delimited JSON, one record per line:
//!
//! ```text
//! {"author_id":"0000-0001-...","cfn":"Fan Wang","dois":["10.1000/abc"]}
//! {"doi":"10.1000/abc","paper_id":"p1","title":"...","abstract":"","venue":"",
//!  "year":2015,"authors":[{"name":"Wang Fan","affiliation":""}]}
//! ```
//!
//! Malformed or invalid lines are skipped and counted; only I/O failures are
//! fatal. Each reader keeps the set of keys it has seen so it can reject
//! duplicates, but never buffers records.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::marker::PhantomData;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Trim and lowercase a DOI. No other rewriting is applied.
pub fn normalize_doi(doi: &str) -> String {
    doi.trim().to_lowercase()
}

/// One registry author.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorRecord {
    pub author_id: String,
    pub cfn: String,
    #[serde(rename = "dois")]
    pub claimed_dois: Vec<String>,
}

/// A byline entry of a citation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorSlot {
    pub name: String,
    #[serde(default)]
    pub affiliation: String,
}

/// One paper of the citation corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationRecord {
    pub doi: String,
    pub paper_id: String,
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: String,
    #[serde(default)]
    pub venue: String,
    #[serde(default)]
    pub year: Option<i32>,
    pub authors: Vec<AuthorSlot>,
}

impl CitationRecord {
    /// Byline slot at a 1-based position.
    pub fn slot(&self, position: u32) -> Option<&AuthorSlot> {
        (position as usize)
            .checked_sub(1)
            .and_then(|i| self.authors.get(i))
    }

    /// Title and abstract joined, the text used by content features.
    pub fn content(&self) -> String {
        if self.abstract_text.is_empty() {
            self.title.clone()
        } else {
            format!("{} {}", self.title, self.abstract_text)
        }
    }
}

/// A record type that can be validated and keyed for duplicate detection.
pub trait Record: DeserializeOwned + Sized {
    /// Normalize in place and check the type invariants.
    fn validate(self) -> std::result::Result<Self, String>;
    fn key(&self) -> &str;
}

impl Record for AuthorRecord {
    fn validate(mut self) -> std::result::Result<Self, String> {
        self.author_id = self.author_id.trim().to_string();
        if self.author_id.is_empty() {
            return Err("empty author_id".into());
        }
        if self.cfn.trim().is_empty() {
            return Err("empty cfn".into());
        }
        let mut seen = HashSet::new();
        self.claimed_dois = self
            .claimed_dois
            .iter()
            .map(|d| normalize_doi(d))
            .filter(|d| !d.is_empty() && seen.insert(d.clone()))
            .collect();
        Ok(self)
    }

    fn key(&self) -> &str {
        &self.author_id
    }
}

impl Record for CitationRecord {
    fn validate(mut self) -> std::result::Result<Self, String> {
        self.doi = normalize_doi(&self.doi);
        if self.doi.is_empty() {
            return Err("empty doi".into());
        }
        if self.authors.is_empty() {
            return Err("empty authors list".into());
        }
        if let Some(i) = self.authors.iter().position(|a| a.name.trim().is_empty()) {
            return Err(format!("author at position {} has an empty name", i + 1));
        }
        Ok(self)
    }

    fn key(&self) -> &str {
        &self.doi
    }
}

/// Why a line was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectKind {
    /// Not parseable, or a required field is missing or mistyped.
    Malformed,
    /// Parsed but violates a record invariant.
    Invalid,
    /// Key already seen earlier in the file.
    Duplicate,
}

/// Running counts kept by a reader.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestCounters {
    pub lines: u64,
    pub blank: u64,
    pub accepted: u64,
    pub rejected: BTreeMap<RejectKind, u64>,
    /// First few rejections as `(line number, reason)`.
    pub samples: Vec<(usize, String)>,
}

const MAX_SAMPLES: usize = 20;

impl IngestCounters {
    fn reject(&mut self, kind: RejectKind, line: usize, reason: String) {
        *self.rejected.entry(kind).or_default() += 1;
        if self.samples.len() < MAX_SAMPLES {
            self.samples.push((line, reason));
        }
    }

    pub fn errors(&self) -> u64 {
        self.rejected.values().sum()
    }
}

/// Summary of a completed read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub source: String,
    pub lines: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub by_category: BTreeMap<RejectKind, u64>,
    pub samples: Vec<String>,
}

pub fn ingest_report(source: &str, counters: &IngestCounters) -> IngestReport {
    IngestReport {
        source: source.to_string(),
        lines: counters.lines,
        accepted: counters.accepted,
        rejected: counters.errors(),
        by_category: counters.rejected.clone(),
        samples: counters
            .samples
            .iter()
            .map(|(line, reason)| format!("line {line}: {reason}"))
            .collect(),
    }
}

/// Line-by-line record stream. Yields `Err` only for fatal I/O errors.
pub struct RecordReader<R, T> {
    inner: R,
    path: PathBuf,
    buf: String,
    line_no: usize,
    seen: HashSet<String>,
    counters: IngestCounters,
    done: bool,
    _marker: PhantomData<T>,
}

impl<R: BufRead, T: Record> RecordReader<R, T> {
    pub fn new(inner: R, path: impl Into<PathBuf>) -> Self {
        RecordReader {
            inner,
            path: path.into(),
            buf: String::new(),
            line_no: 0,
            seen: HashSet::new(),
            counters: IngestCounters::default(),
            done: false,
            _marker: PhantomData,
        }
    }

    pub fn counters(&self) -> &IngestCounters {
        &self.counters
    }

    pub fn report(&self) -> IngestReport {
        ingest_report(&self.path.display().to_string(), &self.counters)
    }
}

impl<R: BufRead, T: Record> Iterator for RecordReader<R, T> {
    type Item = Result<T>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            self.buf.clear();
            match self.inner.read_line(&mut self.buf) {
                Ok(0) => self.done = true,
                Ok(_) => {
                    self.line_no += 1;
                    self.counters.lines += 1;
                    let line = self.buf.trim();
                    if line.is_empty() {
                        self.counters.blank += 1;
                        continue;
                    }
                    let record = match serde_json::from_str::<T>(line) {
                        Ok(r) => r,
                        Err(e) => {
                            self.counters
                                .reject(RejectKind::Malformed, self.line_no, e.to_string());
                            continue;
                        }
                    };
                    let record = match record.validate() {
                        Ok(r) => r,
                        Err(reason) => {
                            self.counters
                                .reject(RejectKind::Invalid, self.line_no, reason);
                            continue;
                        }
                    };
                    if !self.seen.insert(record.key().to_string()) {
                        let reason = format!("duplicate key {}", record.key());
                        self.counters
                            .reject(RejectKind::Duplicate, self.line_no, reason);
                        continue;
                    }
                    self.counters.accepted += 1;
                    return Some(Ok(record));
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(Error::io(&self.path, e)));
                }
            }
        }
        None
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub fn read_author_registry(path: &Path) -> Result<RecordReader<BufReader<File>, AuthorRecord>> {
    Ok(RecordReader::new(open(path)?, path))
}

pub fn read_citation_corpus(
    path: &Path,
) -> Result<RecordReader<BufReader<File>, CitationRecord>> {
    Ok(RecordReader::new(open(path)?, path))
}

/// Write any serializable items as JSON lines.
pub fn write_jsonl<'a, T, I>(path: &Path, items: I) -> Result<()>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut out, item)
            .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Strict JSON-lines reader for files this toolkit wrote itself: any bad line is fatal.
pub fn read_jsonl_strict<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let reader = open(path)?;
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}
