//! Synthetic registry and corpus with known ground truth.
//!
//! Authors own a primary and a secondary research topic; titles and
//! abstracts draw most of their words from the topic vocabulary, venues from
//! topic venue lists, and affiliations change once over a career. Byline
//! names are printed in common formats with injected last-name variants.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::LogNormal;
use serde::{Deserialize, Serialize};

use crate::builder::cfn_key;
use crate::ingest::{write_jsonl, AuthorRecord, AuthorSlot, CitationRecord};
use crate::seed::rng_for;
use crate::Result;

const GIVEN: &str = include_str!("../data/given.txt");
const FAMILY: &str = include_str!("../data/family.txt");

const GENERIC_WORDS: &[&str] = &[
    "analysis", "study", "method", "model", "data", "results", "effect", "approach", "novel", "based",
    "using", "evaluation", "system", "towards", "new", "framework", "large", "scale", "improved", "role",
];
const SYLLABLES: &[&str] = &[
    "ba", "cor", "den", "fi", "gal", "hy", "ion", "ker", "lum", "mo", "nex", "pha", "quin", "ra", "sel", "tro",
    "ul", "ver", "xan", "zo", "bre", "cy", "dro", "ept", "fer", "gen", "lith", "mag", "neu", "osm", "pol", "syn",
];
const DEPARTMENTS: &[&str] = &["Department of Chemistry", "School of Medicine", "Institute of Physics",
    "Department of Computer Science", "Faculty of Biology", "Center for Materials Research"];
const CITIES: &[(&str, &str)] = &[("Lisbon", "Portugal"), ("Bucharest", "Romania"), ("Kyoto", "Japan"),
    ("Oslo", "Norway"), ("Toronto", "Canada"), ("Munich", "Germany"), ("Nairobi", "Kenya"), ("Lima", "Peru"),
    ("Seoul", "Korea"), ("Prague", "Czech Republic"), ("Leiden", "Netherlands"), ("Madrid", "Spain"),
    ("Boston", "USA"), ("Warsaw", "Poland"), ("Chengdu", "China"), ("Pune", "India")];
const ABBREVIATIONS: &[(&str, &str)] = &[("Journal", "J."), ("Research", "Res."), ("International", "Int."),
    ("Conference", "Conf."), ("Advances", "Adv."), ("Letters", "Lett."), ("University", "Univ."),
    ("Department", "Dept."), ("Institute", "Inst."), ("Center", "Ctr."), ("School", "Sch."), ("Faculty", "Fac.")];

/// Last-name variant kinds injected into bylines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    /// Family name printed first.
    Reversal,
    /// One edit, a digraph spelling or a dropped diacritic in the family name.
    Misspelling,
    /// The slot is glued to a neighbouring author's slot.
    Sticky,
    /// A component of a compound family name is dropped.
    Incomplete,
}

impl VariantKind {
    pub const ALL: [VariantKind; 4] = [
        VariantKind::Reversal,
        VariantKind::Misspelling,
        VariantKind::Sticky,
        VariantKind::Incomplete,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub blocks: usize,
    /// Share of blocks holding a single registry author.
    pub single_author_share: f64,
    pub max_homonyms: usize,
    /// Mean claimed papers per author, drawn log-normally.
    pub mean_papers: f64,
    /// Log-scale spread of papers per author.
    pub papers_sigma: f64,
    /// Mean papers of every homonym after the first in a block.
    pub homonym_mean_papers: f64,
    pub max_papers: usize,
    pub max_coauthors: usize,
    /// Probability that a byline slot carries an injected variant.
    pub variant_rate: f64,
    pub n_topics: usize,
    /// Probability that a paper is on the author's secondary topic.
    pub topic_shift: f64,
    /// Share of title words drawn from the topic vocabulary.
    pub topic_word_share: f64,
    pub missing_year: f64,
    pub missing_venue: f64,
    pub missing_affiliation: f64,
    pub missing_abstract: f64,
    /// Probability that a paper also lists, and is claimed by, another registry author.
    pub shared_paper_rate: f64,
    /// Share of claimed DOIs that are absent from the corpus.
    pub dangling_rate: f64,
    /// Unclaimed citations added until the corpus reaches this size.
    pub target_citations: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            blocks: 1000,
            single_author_share: 0.945,
            max_homonyms: 4,
            mean_papers: 9.4,
            papers_sigma: 1.2,
            homonym_mean_papers: 2.5,
            max_papers: 400,
            max_coauthors: 8,
            variant_rate: 0.08,
            n_topics: 40,
            topic_shift: 0.25,
            topic_word_share: 0.6,
            missing_year: 0.02,
            missing_venue: 0.05,
            missing_affiliation: 0.15,
            missing_abstract: 0.2,
            shared_paper_rate: 0.02,
            dangling_rate: 0.01,
            target_citations: 0,
        }
    }
}

/// Ground truth for one claimed paper.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthClaim {
    pub author_id: String,
    pub doi: String,
    /// 1-based slot of the author in the printed byline.
    pub position: u32,
    pub variant: Option<VariantKind>,
}

#[derive(Debug, Clone, Default)]
pub struct SynthCorpus {
    pub registry: Vec<AuthorRecord>,
    pub citations: Vec<CitationRecord>,
    pub truth: Vec<TruthClaim>,
}

impl SynthCorpus {
    /// Writes `registry.jsonl`, `corpus.jsonl` and `truth.jsonl` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;
        write_jsonl(&dir.join("registry.jsonl"), &self.registry)?;
        write_jsonl(&dir.join("corpus.jsonl"), &self.citations)?;
        write_jsonl(&dir.join("truth.jsonl"), &self.truth)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Person {
    pub given: Vec<String>,
    pub family: String,
}

impl Person {
    pub fn full(&self) -> String {
        format!("{} {}", self.given.join(" "), self.family)
    }

    fn initials(&self) -> String {
        let init: String = self
            .given
            .iter()
            .filter_map(|g| g.chars().next())
            .map(|c| format!("{c}."))
            .collect();
        format!("{init} {}", self.family)
    }
}

fn lines(text: &str) -> Vec<&str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).collect()
}

/// A random person; a second given name is added with probability 0.3.
pub fn random_person(rng: &mut impl Rng) -> Person {
    let given = lines(GIVEN);
    let family = lines(FAMILY);
    let mut names = vec![given.choose(rng).unwrap().to_string()];
    if rng.gen_bool(0.3) {
        let middle = given.choose(rng).unwrap().to_string();
        if middle != names[0] {
            names.push(middle);
        }
    }
    Person {
        given: names,
        family: family.choose(rng).unwrap().to_string(),
    }
}

fn misspell(family: &str, rng: &mut impl Rng) -> String {
    let digraphs = [("ö", "oe"), ("ü", "ue"), ("ä", "ae"), ("ij", "y"), ("'", " "), ("ø", "oe")];
    for (from, to) in digraphs {
        if family.contains(from) && rng.gen_bool(0.7) {
            return family.replacen(from, to, 1);
        }
    }
    let folded = crate::namekit::transliterate(family);
    if folded != family && rng.gen_bool(0.5) {
        return folded;
    }
    let chars: Vec<char> = family.chars().collect();
    let letters: Vec<usize> = (1..chars.len()).filter(|&i| chars[i].is_alphabetic()).collect();
    let Some(&i) = letters.choose(rng) else {
        return format!("{family}e");
    };
    let mut out = chars.clone();
    match rng.gen_range(0..3) {
        0 => {
            out.insert(i, chars[i]);
        }
        1 if chars.len() > 3 => {
            out.remove(i);
        }
        _ => {
            let vowels = ['a', 'e', 'i', 'o', 'u', 'y'];
            let mut c = *vowels.choose(rng).unwrap();
            if c == chars[i] {
                c = 'x';
            }
            out[i] = c;
        }
    }
    out.into_iter().collect()
}

/// Drops one component of a compound family name, if it has several.
fn incomplete(person: &Person, rng: &mut impl Rng) -> Option<String> {
    let parts: Vec<&str> = person.family.split([' ', '-']).filter(|p| !p.is_empty()).collect();
    if parts.len() < 2 {
        return None;
    }
    let keep = if rng.gen_bool(0.5) { parts[0] } else { parts[parts.len() - 1] };
    let init = Person {
        given: person.given.clone(),
        family: keep.to_string(),
    };
    Some(if rng.gen_bool(0.5) { init.initials() } else { init.full() })
}

/// A printed form of `person`, optionally with a variant. Sticky variants are
/// printed normally here; gluing happens when the byline is assembled.
fn printed_name(person: &Person, variant: Option<VariantKind>, rng: &mut impl Rng) -> (String, Option<VariantKind>) {
    let plain = |rng: &mut dyn rand::RngCore| match rng.gen_range(0..10) {
        0..=5 => person.full(),
        6..=8 => person.initials(),
        _ => format!("{} {}", person.given[0], person.family),
    };
    match variant {
        Some(VariantKind::Reversal) => (format!("{} {}", person.family, person.given[0]), variant),
        Some(VariantKind::Misspelling) => {
            let p = Person {
                given: person.given.clone(),
                family: misspell(&person.family, rng),
            };
            (if rng.gen_bool(0.7) { p.full() } else { p.initials() }, variant)
        }
        Some(VariantKind::Incomplete) => match incomplete(person, rng) {
            Some(name) => (name, variant),
            None => printed_name(person, Some(VariantKind::Misspelling), rng),
        },
        Some(VariantKind::Sticky) => (plain(rng), variant),
        None => (plain(rng), None),
    }
}

/// Byline with the target author at a random slot among `coauthors`.
/// Returns the slot names and the target's 1-based position.
fn byline(
    target: &Person,
    coauthors: &[Person],
    variant: Option<VariantKind>,
    rng: &mut impl Rng,
) -> (Vec<String>, u32, Option<VariantKind>) {
    let (name, variant) = printed_name(target, variant, rng);
    let mut names: Vec<String> = coauthors.iter().map(|p| printed_name(p, None, rng).0).collect();
    let at = rng.gen_range(0..=names.len());
    names.insert(at, name);
    let mut position = at;
    if variant == Some(VariantKind::Sticky) && names.len() > 1 {
        let first = if at + 1 < names.len() { at } else { at - 1 };
        let glued = format!("{} and {}", names[first], names[first + 1]);
        names[first] = glued;
        names.remove(first + 1);
        position = first;
    }
    let variant = if variant == Some(VariantKind::Sticky) && names.len() == 1 && coauthors.is_empty() {
        None
    } else {
        variant
    };
    (names, position as u32 + 1, variant)
}

fn pick_variant(rate: f64, kinds: &[VariantKind], rng: &mut impl Rng) -> Option<VariantKind> {
    if !kinds.is_empty() && rng.gen_bool(rate) {
        Some(*kinds.choose(rng).unwrap())
    } else {
        None
    }
}

fn coauthor_count(max: usize, rng: &mut impl Rng) -> usize {
    // Team sizes fall off roughly geometrically.
    let weights: Vec<f64> = (0..=max).map(|k| 0.7f64.powi(k as i32)).collect();
    WeightedIndex::new(&weights).unwrap().sample(rng)
}

/// One instance of the position-identification evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionInstance {
    pub cfn: String,
    pub names: Vec<String>,
    pub position: u32,
    pub variant: Option<VariantKind>,
}

/// `n` bylines, each hiding a registry name among random coauthors; a share
/// `variant_rate` of targets is printed with a variant drawn from `kinds`.
pub fn position_instances(n: usize, variant_rate: f64, kinds: &[VariantKind], seed: u64) -> Vec<PositionInstance> {
    let mut rng = rng_for(seed, "position-eval");
    (0..n)
        .map(|_| {
            let target = random_person(&mut rng);
            let k = coauthor_count(8, &mut rng);
            let coauthors: Vec<Person> = (0..k).map(|_| random_person(&mut rng)).collect();
            let variant = pick_variant(variant_rate, kinds, &mut rng);
            let (names, position, variant) = byline(&target, &coauthors, variant, &mut rng);
            PositionInstance {
                cfn: target.full(),
                names,
                position,
                variant,
            }
        })
        .collect()
}

struct Vocabulary {
    topics: Vec<Vec<String>>,
    venues: Vec<Vec<String>>,
}

fn vocabulary(n_topics: usize) -> Vocabulary {
    // Fixed so that corpora differ only through the generation seed.
    let mut rng = ChaCha8Rng::seed_from_u64(0x70_91c5);
    let mut seen: HashSet<String> = GENERIC_WORDS.iter().map(|w| w.to_string()).collect();
    let mut word = |rng: &mut ChaCha8Rng| loop {
        let n = rng.gen_range(2..=4);
        let w: String = (0..n).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
        if seen.insert(w.clone()) {
            return w;
        }
    };
    let topics: Vec<Vec<String>> = (0..n_topics).map(|_| (0..25).map(|_| word(&mut rng)).collect()).collect();
    let venues = topics
        .iter()
        .map(|t| {
            (0..4)
                .map(|i| match i {
                    0 => format!("Journal of {} Research", capitalize(&t[0])),
                    1 => format!("{} Letters", capitalize(&t[1])),
                    2 => format!("International Conference on {} and {}", capitalize(&t[2]), capitalize(&t[3])),
                    _ => format!("Advances in {}", capitalize(&t[4])),
                })
                .collect()
        })
        .collect();
    Vocabulary { topics, venues }
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next().map_or(String::new(), |f| f.to_uppercase().chain(c).collect())
}

fn abbreviate(text: &str, rng: &mut impl Rng) -> String {
    let mut out = text.to_string();
    for (long, short) in ABBREVIATIONS {
        if out.contains(long) && rng.gen_bool(0.5) {
            out = out.replace(long, short);
        }
    }
    out
}

/// A workplace: a department at a city university, plus a lab name.
#[derive(Debug, Clone)]
struct Workplace {
    department: &'static str,
    city: &'static str,
    country: &'static str,
    lab: String,
}

fn workplace(rng: &mut impl Rng, lab_words: &[String]) -> Workplace {
    let (city, country) = *CITIES.choose(rng).unwrap();
    Workplace {
        department: DEPARTMENTS.choose(rng).unwrap(),
        city,
        country,
        lab: capitalize(lab_words.choose(rng).unwrap()),
    }
}

/// Affiliation strings vary in detail and abbreviation between papers.
fn render_affiliation(w: &Workplace, rng: &mut impl Rng) -> String {
    let full = match rng.gen_range(0..5) {
        0 => format!("University of {}", w.city),
        1 => format!("{}, University of {}", w.department, w.city),
        2 => format!("{}, University of {}, {}", w.department, w.city, w.country),
        3 => format!("{} Laboratory, {}, University of {}", w.lab, w.department, w.city),
        _ => format!("University of {}, {}", w.city, w.country),
    };
    abbreviate(&full, rng)
}

fn render_venue(venue: &str, rng: &mut impl Rng) -> String {
    abbreviate(venue, rng)
}

struct Author {
    id: String,
    person: Person,
    primary: usize,
    secondary: usize,
    venues: Vec<String>,
    affiliations: [Workplace; 2],
    start: i32,
    span: i32,
    move_year: i32,
    /// First author of its block; later homonyms draw fewer papers.
    lead: bool,
}

fn text(vocab: &[String], n: usize, topic_share: f64, rng: &mut impl Rng) -> String {
    (0..n)
        .map(|_| {
            if rng.gen_bool(topic_share) {
                vocab.choose(rng).unwrap().as_str()
            } else {
                GENERIC_WORDS.choose(rng).unwrap()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Generate a registry, a corpus and per-claim ground truth.
pub fn generate(cfg: &SynthConfig, seed: u64) -> SynthCorpus {
    let mut rng = rng_for(seed, "synth");
    let vocab = vocabulary(cfg.n_topics.max(1));
    let n_topics = vocab.topics.len();
    let lab_words: Vec<String> = vocab.topics.iter().flat_map(|t| t[5..8].to_vec()).collect();

    let mut keys = HashSet::new();
    let mut authors: Vec<Author> = Vec::new();
    let mut serial = 0usize;
    for _ in 0..cfg.blocks {
        let person = loop {
            let p = random_person(&mut rng);
            if keys.insert(cfn_key(&p.full())) {
                break p;
            }
        };
        let n = if rng.gen_bool(cfg.single_author_share) {
            1
        } else {
            rng.gen_range(2..=cfg.max_homonyms.max(2))
        };
        for k in 0..n {
            serial += 1;
            let primary = rng.gen_range(0..n_topics);
            let secondary = rng.gen_range(0..n_topics);
            let start = rng.gen_range(1985..=2018);
            let span = rng.gen_range(1..=(2022 - start).max(1));
            let mut venues: Vec<String> = vocab.venues[primary].choose_multiple(&mut rng, 2).cloned().collect();
            venues.push(vocab.venues[secondary].choose(&mut rng).unwrap().clone());
            authors.push(Author {
                id: format!("0000-0002-{:04}-{:04}", serial / 10_000, serial % 10_000),
                person: person.clone(),
                primary,
                secondary,
                venues,
                affiliations: [workplace(&mut rng, &lab_words), workplace(&mut rng, &lab_words)],
                start,
                span,
                move_year: start + rng.gen_range(0..=span),
                lead: k == 0,
            });
        }
    }

    let sigma = cfg.papers_sigma.max(0.0);
    let papers_with_mean =
        |mean: f64| LogNormal::new(mean.max(1.0).ln() - sigma * sigma / 2.0, sigma).expect("finite parameters");
    let lead_papers = papers_with_mean(cfg.mean_papers);
    let homonym_papers = papers_with_mean(cfg.homonym_mean_papers);
    let mut claims: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut citations = Vec::new();
    let mut truth = Vec::new();
    let mut doi_serial = 0usize;
    for (ai, author) in authors.iter().enumerate() {
        let dist = if author.lead { &lead_papers } else { &homonym_papers };
        let n_papers = (dist.sample(&mut rng).round() as usize).clamp(1, cfg.max_papers.max(1));
        for _ in 0..n_papers {
            doi_serial += 1;
            let doi = format!("10.5555/synth.{doi_serial:07}");
            let topic = if rng.gen_bool(cfg.topic_shift) {
                author.secondary
            } else {
                author.primary
            };
            let year = author.start + rng.gen_range(0..=author.span);
            let k = coauthor_count(cfg.max_coauthors, &mut rng);
            let mut coauthors: Vec<Person> = (0..k).map(|_| random_person(&mut rng)).collect();
            let mut shared = None;
            if authors.len() > 1 && rng.gen_bool(cfg.shared_paper_rate) {
                let other = rng.gen_range(0..authors.len());
                if other != ai {
                    shared = Some(other);
                    coauthors.push(authors[other].person.clone());
                }
            }
            let variant = pick_variant(cfg.variant_rate, &VariantKind::ALL, &mut rng);
            let (names, position, variant) = byline(&author.person, &coauthors, variant, &mut rng);
            let work = &author.affiliations[(year >= author.move_year) as usize];
            let slots = names
                .into_iter()
                .enumerate()
                .map(|(i, name)| AuthorSlot {
                    name,
                    affiliation: if rng.gen_bool(cfg.missing_affiliation) {
                        String::new()
                    } else if i as u32 + 1 == position {
                        render_affiliation(work, &mut rng)
                    } else {
                        render_affiliation(&workplace(&mut rng, &lab_words), &mut rng)
                    },
                })
                .collect();
            let venue = if rng.gen_bool(cfg.missing_venue) {
                String::new()
            } else if rng.gen_bool(0.75) {
                render_venue(author.venues.choose(&mut rng).unwrap(), &mut rng)
            } else {
                render_venue(vocab.venues.choose(&mut rng).unwrap().choose(&mut rng).unwrap(), &mut rng)
            };
            let title_len = rng.gen_range(6..=12);
            let abstract_text = if rng.gen_bool(cfg.missing_abstract) {
                String::new()
            } else {
                let n = rng.gen_range(25..=60);
                text(&vocab.topics[topic], n, cfg.topic_word_share, &mut rng)
            };
            let record = CitationRecord {
                doi: doi.clone(),
                paper_id: format!("P{doi_serial:07}"),
                title: capitalize(&text(&vocab.topics[topic], title_len, cfg.topic_word_share, &mut rng)),
                abstract_text,
                venue,
                year: (!rng.gen_bool(cfg.missing_year)).then_some(year),
                authors: slots,
            };
            claims.entry(ai).or_default().push(doi.clone());
            truth.push(TruthClaim {
                author_id: author.id.clone(),
                doi: doi.clone(),
                position,
                variant,
            });
            if let Some(other) = shared {
                claims.entry(other).or_default().push(doi.clone());
            }
            if !rng.gen_bool(cfg.dangling_rate) {
                citations.push(record);
            }
        }
    }

    while citations.len() < cfg.target_citations {
        doi_serial += 1;
        let topic = rng.gen_range(0..n_topics);
        let k = coauthor_count(cfg.max_coauthors, &mut rng) + 1;
        citations.push(CitationRecord {
            doi: format!("10.5555/synth.{doi_serial:07}"),
            paper_id: format!("P{doi_serial:07}"),
            title: capitalize(&text(&vocab.topics[topic], 8, cfg.topic_word_share, &mut rng)),
            abstract_text: String::new(),
            venue: vocab.venues[topic].choose(&mut rng).unwrap().clone(),
            year: Some(rng.gen_range(1985..=2022)),
            authors: (0..k)
                .map(|_| AuthorSlot {
                    name: random_person(&mut rng).full(),
                    affiliation: String::new(),
                })
                .collect(),
        });
    }
    citations.shuffle(&mut rng);

    let registry = authors
        .iter()
        .enumerate()
        .map(|(i, a)| AuthorRecord {
            author_id: a.id.clone(),
            cfn: a.person.full(),
            claimed_dois: claims.remove(&i).unwrap_or_default(),
        })
        .collect();
    SynthCorpus {
        registry,
        citations,
        truth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let cfg = SynthConfig {
            blocks: 50,
            ..SynthConfig::default()
        };
        let a = generate(&cfg, 7);
        let b = generate(&cfg, 7);
        assert_eq!(a.citations, b.citations);
        assert_eq!(a.registry, b.registry);
        assert_ne!(generate(&cfg, 8).citations, a.citations);
    }

    #[test]
    fn truth_positions_point_at_the_author() {
        let cfg = SynthConfig {
            blocks: 200,
            variant_rate: 0.0,
            ..SynthConfig::default()
        };
        let c = generate(&cfg, 1);
        let by_doi: std::collections::HashMap<_, _> = c.citations.iter().map(|r| (r.doi.as_str(), r)).collect();
        let cfn: std::collections::HashMap<_, _> =
            c.registry.iter().map(|a| (a.author_id.as_str(), a.cfn.as_str())).collect();
        for t in &c.truth {
            let Some(rec) = by_doi.get(t.doi.as_str()) else { continue };
            let printed = &rec.slot(t.position).unwrap().name;
            let family = crate::namekit::parse_name(cfn[t.author_id.as_str()]).family;
            assert!(printed.ends_with(&family), "{printed} vs {family}");
        }
    }

    #[test]
    fn sticky_slots_are_glued() {
        let mut rng = rng_for(3, "t");
        let target = random_person(&mut rng);
        let co = vec![random_person(&mut rng), random_person(&mut rng)];
        let (names, pos, v) = byline(&target, &co, Some(VariantKind::Sticky), &mut rng);
        assert_eq!(names.len(), 2);
        assert_eq!(v, Some(VariantKind::Sticky));
        assert!(names[pos as usize - 1].contains(" and "));
    }

    #[test]
    fn incomplete_needs_a_compound_family() {
        let mut rng = rng_for(3, "t");
        let p = Person {
            given: vec!["Luís".into()],
            family: "Silva Dias".into(),
        };
        let name = incomplete(&p, &mut rng).unwrap();
        assert!(!name.contains("Silva Dias"));
        let q = Person {
            given: vec!["Ana".into()],
            family: "Charas".into(),
        };
        assert!(incomplete(&q, &mut rng).is_none());
    }
}
