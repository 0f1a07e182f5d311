//! One function per subcommand. Stages communicate only through files in
//! the output directory, and never modify their inputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use andkit_core::builder::{
    build_block_dataset, read_dataset, sample_pairwise, split, trim_single_author_blocks, write_dataset,
    BlockDataset, Fold, PairwiseInstance, SplitAssignment,
};
use andkit_core::cluster::{cluster_dataset, tune_threshold};
use andkit_core::disambig::{feature_importance, ContentKind, PairModel, PluginLine, PluginScores};
use andkit_core::ingest::{
    ingest_report, read_author_registry, read_citation_corpus, read_jsonl_strict, write_jsonl, CitationRecord,
    IngestReport,
};
use andkit_core::linker::{link_and_position, CitationIndex, LinkReport, LinkedClaim};
use andkit_core::metrics::{
    audit_id_system, classification_metrics, BCubed, BCubedScore, ClassificationScore, ExternalIdLine, ExternalIds,
};
use andkit_core::namekit::VariationChecker;
use andkit_core::profiler::{
    block_profile, claim_instances, compare_reports, comparison_to_tsv, corpus_instances, lookup_distribution,
    name_popularity, position_distribution, reports_to_tsv, variation_report, variation_to_tsv, write_text,
    year_distribution, DistributionReport, LookupTable, NameInstance, NameKey,
};
use andkit_core::seed::{derive_seed, digest_file};
use andkit_core::synth::generate;
use andkit_core::FORMAT_VERSION;
use anyhow::{anyhow, Context, Result};
use log::info;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, PipelineConfig};

/// File layout of the output directory.
pub struct Layout<'a> {
    pub cfg: &'a PipelineConfig,
}

impl Layout<'_> {
    fn out(&self, name: &str) -> PathBuf {
        self.cfg.out_dir.join(name)
    }

    fn tag(&self) -> &'static str {
        if self.cfg.trimmed {
            "_trimmed"
        } else {
            ""
        }
    }

    fn cf(&self) -> &'static str {
        match self.cfg.model.cf_kind {
            ContentKind::None => "none",
            ContentKind::Jaccard => "jaccard",
            ContentKind::Tfidf => "tfidf",
            ContentKind::Plugin => "plugin",
        }
    }

    pub fn claims(&self) -> PathBuf {
        self.out("claims.jsonl")
    }

    pub fn link_report(&self) -> PathBuf {
        self.out("link_report.json")
    }

    pub fn full_blocks(&self) -> PathBuf {
        self.out("blocks.jsonl")
    }

    pub fn trimmed_blocks(&self) -> PathBuf {
        self.out("blocks_trimmed.jsonl")
    }

    pub fn blocks(&self) -> PathBuf {
        self.out(&format!("blocks{}.jsonl", self.tag()))
    }

    pub fn pairs(&self) -> PathBuf {
        self.out(&format!("pairs{}.jsonl", self.tag()))
    }

    pub fn split(&self) -> PathBuf {
        self.out(&format!("split{}.jsonl", self.tag()))
    }

    pub fn profile(&self) -> PathBuf {
        self.out(&format!("profile{}.tsv", self.tag()))
    }

    pub fn variation(&self) -> PathBuf {
        self.out(&format!("variation{}.tsv", self.tag()))
    }

    pub fn report_dir(&self) -> PathBuf {
        self.out(&format!("report{}", self.tag()))
    }

    fn model_stem(&self) -> String {
        if self.cfg.trimmed {
            format!("trimmed_{}", self.cf())
        } else {
            self.cf().to_string()
        }
    }

    pub fn model(&self) -> PathBuf {
        self.out(&format!("model_{}.json", self.model_stem()))
    }

    pub fn importance(&self) -> PathBuf {
        self.out(&format!("importance_{}.tsv", self.model_stem()))
    }

    pub fn tune_curve(&self) -> PathBuf {
        self.out(&format!("tune_{}.tsv", self.model_stem()))
    }

    pub fn tune_result(&self) -> PathBuf {
        self.out(&format!("tune_{}.json", self.model_stem()))
    }

    pub fn clusters(&self) -> PathBuf {
        self.out(&format!("clusters_{}.jsonl", self.model_stem()))
    }

    pub fn scorecard(&self) -> PathBuf {
        self.out(&format!("scorecard_{}.tsv", self.model_stem()))
    }

    pub fn audit(&self) -> PathBuf {
        self.out(&format!("audit{}.tsv", self.tag()))
    }

    /// Row label in scorecards: `BF` or `BF+CF_<kind>`.
    pub fn method(&self) -> String {
        match self.cfg.model.cf_kind {
            ContentKind::None => "BF".to_string(),
            _ => format!("BF+CF_{}", self.cf()),
        }
    }
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn ensure_out_dir(cfg: &PipelineConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out_dir).with_context(|| format!("cannot create {}", cfg.out_dir.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| andkit_core::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| {
        andkit_core::Error::Format {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        }
        .into()
    })
}

fn read_corpus(path: &Path) -> Result<(Vec<CitationRecord>, IngestReport)> {
    let mut reader = read_citation_corpus(path)?;
    let records = reader.by_ref().collect::<andkit_core::Result<Vec<_>>>()?;
    Ok((records, ingest_report(&file_name(path), reader.counters())))
}

pub fn synth(cfg: &PipelineConfig) -> Result<()> {
    let corpus = generate(&cfg.synth, cfg.seed);
    let truth = cfg.input.registry.with_file_name("truth.jsonl");
    for path in [&cfg.input.registry, &cfg.input.corpus] {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        }
    }
    write_jsonl(&cfg.input.registry, &corpus.registry)?;
    write_jsonl(&cfg.input.corpus, &corpus.citations)?;
    write_jsonl(&truth, &corpus.truth)?;
    info!(
        "synth: {} authors, {} citations, {} claims",
        corpus.registry.len(),
        corpus.citations.len(),
        corpus.truth.len()
    );
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct LinkSummary {
    format_version: u32,
    /// Input file name → SHA-256.
    inputs: BTreeMap<String, String>,
    registry: IngestReport,
    corpus: IngestReport,
    link: LinkReport,
}

pub fn link(cfg: &PipelineConfig) -> Result<()> {
    ensure_out_dir(cfg)?;
    let layout = Layout { cfg };
    let (citations, corpus_report) = read_corpus(&cfg.input.corpus)?;
    let index = CitationIndex::new(citations);
    let mut registry = read_author_registry(&cfg.input.registry)?;
    let authors = registry.by_ref().collect::<andkit_core::Result<Vec<_>>>()?;
    let registry_report = ingest_report(&file_name(&cfg.input.registry), registry.counters());
    let (claims, report) = link_and_position(authors, &index, &cfg.position);
    write_jsonl(&layout.claims(), &claims)?;
    let inputs = [&cfg.input.registry, &cfg.input.corpus]
        .into_iter()
        .map(|p| Ok((file_name(p), digest_file(p)?)))
        .collect::<Result<_>>()?;
    info!(
        "link: {} authors, {} resolved, {} positioned, {} rejected",
        report.authors, report.resolved, report.positioned, report.rejected
    );
    write_json(
        &layout.link_report(),
        &LinkSummary {
            format_version: FORMAT_VERSION,
            inputs,
            registry: registry_report,
            corpus: corpus_report,
            link: report,
        },
    )
}

pub fn build_block(cfg: &PipelineConfig) -> Result<()> {
    let layout = Layout { cfg };
    let claims: Vec<LinkedClaim> = read_jsonl_strict(&layout.claims())?;
    let summary: LinkSummary = read_json(&layout.link_report())?;
    let mut ds = build_block_dataset(claims);
    ds.provenance.seed = Some(cfg.seed);
    ds.provenance.inputs = summary.inputs;
    let params = &mut ds.provenance.params;
    params.insert("position.margin".into(), summary.link.margin.to_string());
    params.insert("position.single_author_floor".into(), summary.link.single_author_floor.to_string());
    info!("build-block: {} blocks, {} citations", ds.blocks.len(), ds.n_citations());
    write_dataset(&ds, &layout.full_blocks())?;
    Ok(())
}

pub fn trim(cfg: &PipelineConfig) -> Result<()> {
    let layout = Layout { cfg };
    let ds = read_dataset(&layout.full_blocks())?;
    let trimmed = trim_single_author_blocks(&ds);
    info!("trim: kept {} of {} blocks", trimmed.blocks.len(), ds.blocks.len());
    write_dataset(&trimmed, &layout.trimmed_blocks())?;
    Ok(())
}

pub fn build_pairwise(cfg: &PipelineConfig) -> Result<()> {
    let layout = Layout { cfg };
    let ds = read_dataset(&layout.blocks())?;
    let pairs = sample_pairwise(&ds, cfg.sampling.cap, cfg.seed);
    let positives = pairs.iter().filter(|p| p.label).count();
    info!("build-pairwise: {} pairs, {} positive", pairs.len(), positives);
    write_jsonl(&layout.pairs(), &pairs)?;
    Ok(())
}

pub fn split_cmd(cfg: &PipelineConfig) -> Result<()> {
    let layout = Layout { cfg };
    let ds = read_dataset(&layout.blocks())?;
    let pairs: Vec<PairwiseInstance> = read_jsonl_strict(&layout.pairs())?;
    let s = split(&ds, &pairs, cfg.split.ratios, cfg.seed)?;
    info!(
        "split: {} train, {} validation, {} test blocks",
        s.count(Fold::Train),
        s.count(Fold::Validation),
        s.count(Fold::Test)
    );
    s.write(&layout.split())?;
    Ok(())
}

pub fn profile(cfg: &PipelineConfig) -> Result<()> {
    let layout = Layout { cfg };
    let ds = read_dataset(&layout.blocks())?;
    let checker = VariationChecker::default();
    let p = block_profile(&ds, &checker);
    write_text(
        &layout.profile(),
        &reports_to_tsv(&[&p.block_size, &p.variants_by_block_size, &p.authors_per_block]),
    )?;
    let rows = variation_report(ds.claims(), &checker)?;
    write_text(&layout.variation(), &variation_to_tsv(&rows))?;
    info!("profile: {} blocks", ds.blocks.len());
    Ok(())
}

fn facet_reports(
    citations: &[&CitationRecord],
    instances: &[NameInstance<'_>],
    lookups: &[LookupTable],
    cap: u32,
) -> Vec<DistributionReport> {
    let mut out = vec![
        year_distribution(citations.iter().copied()),
        position_distribution(instances, cap),
        name_popularity(instances, NameKey::Ln),
        name_popularity(instances, NameKey::Lnfi),
    ];
    out.extend(lookups.iter().map(|t| lookup_distribution(instances, t)));
    out
}

pub fn report(cfg: &PipelineConfig) -> Result<()> {
    let layout = Layout { cfg };
    let ds = read_dataset(&layout.blocks())?;
    let (corpus, _) = read_corpus(&cfg.input.corpus)?;
    let lookups = cfg
        .input
        .lookups
        .iter()
        .map(|l| LookupTable::read_tsv(l.name.clone(), l.field, &l.path))
        .collect::<andkit_core::Result<Vec<_>>>()?;
    let cap = cfg.profile.position_cap;
    let ds_citations = ds.unique_citations();
    let ds_reports = facet_reports(&ds_citations, &claim_instances(ds.claims()), &lookups, cap);
    let corpus_refs: Vec<&CitationRecord> = corpus.iter().collect();
    let corpus_reports = facet_reports(&corpus_refs, &corpus_instances(corpus.iter()), &lookups, cap);
    let dir = layout.report_dir();
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut comparisons = Vec::new();
    for (d, c) in ds_reports.iter().zip(&corpus_reports) {
        write_text(&dir.join(format!("dataset_{}.tsv", d.facet)), &reports_to_tsv(&[d]))?;
        write_text(&dir.join(format!("corpus_{}.tsv", c.facet)), &reports_to_tsv(&[c]))?;
        comparisons.push(compare_reports(d, c));
    }
    write_text(&dir.join("comparison.tsv"), &comparison_to_tsv(&comparisons))?;
    info!("report: {} facets", ds_reports.len());
    Ok(())
}

fn load_plugin(cfg: &PipelineConfig) -> Result<Option<PluginScores>> {
    if cfg.model.cf_kind != ContentKind::Plugin {
        return Ok(None);
    }
    let path = cfg
        .input
        .plugin_scores
        .as_ref()
        .ok_or_else(|| ConfigError("model.cf_kind = \"plugin\" needs input.plugin_scores".into()))?;
    let lines: Vec<PluginLine> = read_jsonl_strict(path)?;
    Ok(Some(PluginScores::from_lines(lines)?))
}

fn load_model(cfg: &PipelineConfig, layout: &Layout<'_>) -> Result<PairModel> {
    let mut model = PairModel::load(&layout.model())?;
    if model.extractor.content_kind != cfg.model.cf_kind {
        return Err(ConfigError(format!(
            "model {} was trained with a different model.cf_kind",
            file_name(&layout.model())
        ))
        .into());
    }
    model.extractor.plugin = load_plugin(cfg)?;
    Ok(model)
}

struct Inputs {
    ds: BlockDataset,
    pairs: Vec<PairwiseInstance>,
    split: SplitAssignment,
}

fn read_inputs(layout: &Layout<'_>) -> Result<Inputs> {
    Ok(Inputs {
        ds: read_dataset(&layout.blocks())?,
        pairs: read_jsonl_strict(&layout.pairs())?,
        split: SplitAssignment::read(&layout.split())?,
    })
}

pub fn train(cfg: &PipelineConfig) -> Result<()> {
    let layout = Layout { cfg };
    let inp = read_inputs(&layout)?;
    let train_pairs = inp.split.pairs_in(&inp.pairs, Fold::Train);
    let plugin = load_plugin(cfg)?;
    let model = PairModel::train_with(
        &inp.ds,
        &train_pairs,
        cfg.model.cf_kind,
        &cfg.model.forest,
        derive_seed(cfg.seed, "forest"),
        |e| match plugin {
            Some(p) => e.with_plugin(p),
            None => e,
        },
    )?;
    model.save(&layout.model())?;
    let imp = feature_importance(&model.forest);
    let mut tsv = String::from("feature\tmean\tstd\n");
    for f in &imp.features {
        writeln!(tsv, "{}\t{:.6}\t{:.6}", f.feature, f.mean, f.std)?;
    }
    write_text(&layout.importance(), &tsv)?;
    info!("train: {} pairs, {} trees", train_pairs.len(), cfg.model.forest.n_trees);
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct TuneSummary {
    best_threshold: f64,
    best: BCubedScore,
    linkage: andkit_core::cluster::Linkage,
    averaging: andkit_core::metrics::B3Averaging,
}

pub fn tune(cfg: &PipelineConfig) -> Result<()> {
    let layout = Layout { cfg };
    let inp = read_inputs(&layout)?;
    let model = load_model(cfg, &layout)?;
    let validation = inp.split.blocks_in(&inp.ds, Fold::Validation);
    let c = &cfg.cluster;
    let res = tune_threshold(&validation, &model, &c.grid, c.linkage, c.averaging)?;
    let mut tsv = String::from("threshold\tB3-P\tB3-R\tB3-F1\n");
    for p in &res.curve {
        writeln!(
            tsv,
            "{:.4}\t{:.6}\t{:.6}\t{:.6}",
            p.threshold, p.score.precision, p.score.recall, p.score.f1
        )?;
    }
    write_text(&layout.tune_curve(), &tsv)?;
    info!("tune: best threshold {} (B3-F1 {:.4})", res.best_threshold, res.best.f1);
    write_json(
        &layout.tune_result(),
        &TuneSummary {
            best_threshold: res.best_threshold,
            best: res.best,
            linkage: c.linkage,
            averaging: c.averaging,
        },
    )
}

#[derive(Debug, Serialize, Deserialize)]
struct ClusterLine {
    cfn_key: String,
    paper_id: String,
    doi: String,
    author_id: String,
    cluster: usize,
}

pub fn cluster(cfg: &PipelineConfig) -> Result<()> {
    let layout = Layout { cfg };
    let threshold = match cfg.cluster.threshold {
        Some(t) => t,
        None => {
            let path = layout.tune_result();
            if !path.exists() {
                return Err(ConfigError(format!(
                    "no cluster.threshold set and {} is missing; run tune first",
                    file_name(&path)
                ))
                .into());
            }
            read_json::<TuneSummary>(&path)?.best_threshold
        }
    };
    let inp = read_inputs(&layout)?;
    let model = load_model(cfg, &layout)?;
    let part = inp.split.blocks_in(&inp.ds, cfg.cluster.fold);
    let clusterings = cluster_dataset(&part, &model, threshold, cfg.cluster.linkage)?;
    let lines: Vec<ClusterLine> = clusterings
        .iter()
        .flat_map(|c| {
            c.claims.iter().zip(&c.assignment.labels).map(|(claim, &label)| ClusterLine {
                cfn_key: c.cfn_key.to_string(),
                paper_id: claim.citation.paper_id.clone(),
                doi: claim.doi.clone(),
                author_id: claim.author_id.clone(),
                cluster: label,
            })
        })
        .collect();
    write_jsonl(&layout.clusters(), &lines)?;
    info!("cluster: {} blocks at threshold {threshold}", clusterings.len());
    Ok(())
}

fn pairwise_row(method: &str, s: &ClassificationScore) -> String {
    format!("{method}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\n", s.precision, s.recall, s.f1, s.macro_f1)
}

fn b3_row(method: &str, s: &BCubedScore) -> String {
    format!("{method}\t{:.6}\t{:.6}\t{:.6}\n", s.precision, s.recall, s.f1)
}

const PAIRWISE_HEADER: &str = "method\tP\tR\tF1\tMacro-F1\n";
const B3_HEADER: &str = "method\tB3-P\tB3-R\tB3-F1\n";

pub fn evaluate(cfg: &PipelineConfig) -> Result<()> {
    let layout = Layout { cfg };
    let inp = read_inputs(&layout)?;
    let model = load_model(cfg, &layout)?;
    let fold = cfg.cluster.fold;
    let pairs = inp.split.pairs_in(&inp.pairs, fold);
    if pairs.is_empty() {
        return Err(anyhow!("the {} fold has no pairs to evaluate", fold.as_str()));
    }
    let proba = model.predict_pairs(&inp.ds, &pairs)?;
    let labels: Vec<bool> = pairs.iter().map(|p| p.label).collect();
    let preds: Vec<bool> = proba.iter().map(|&p| p >= cfg.model.cutoff).collect();
    let cls = classification_metrics(&labels, &preds)?;
    let method = layout.method();
    let mut card = String::from(PAIRWISE_HEADER);
    card.push_str(&pairwise_row(&method, &cls));
    let clusters = layout.clusters();
    if clusters.exists() {
        let lines: Vec<ClusterLine> = read_jsonl_strict(&clusters)?;
        let mut by_block: BTreeMap<&str, (Vec<usize>, Vec<&str>)> = BTreeMap::new();
        for l in &lines {
            let entry = by_block.entry(&l.cfn_key).or_default();
            entry.0.push(l.cluster);
            entry.1.push(&l.author_id);
        }
        let mut acc = BCubed::default();
        for (pred, gold) in by_block.values() {
            acc.add_block(pred, gold)?;
        }
        card.push('\n');
        card.push_str(B3_HEADER);
        card.push_str(&b3_row(&method, &acc.score(cfg.cluster.averaging)?));
    }
    write_text(&layout.scorecard(), &card)?;
    print!("{card}");
    Ok(())
}

pub fn audit_ids(cfg: &PipelineConfig) -> Result<()> {
    let layout = Layout { cfg };
    let path = cfg
        .input
        .external_ids
        .as_ref()
        .ok_or_else(|| ConfigError("audit-ids needs input.external_ids".into()))?;
    let external = ExternalIds::from_lines(read_jsonl_strict::<ExternalIdLine>(path)?);
    let ds = read_dataset(&layout.blocks())?;
    let pairs: Vec<PairwiseInstance> = read_jsonl_strict(&layout.pairs())?;
    let r = audit_id_system(&ds, &pairs, &external, cfg.cluster.averaging)?;
    let mut card = String::new();
    if let Some(cls) = &r.classification {
        card.push_str(PAIRWISE_HEADER);
        card.push_str(&pairwise_row("external", cls));
        card.push('\n');
    }
    card.push_str(B3_HEADER);
    card.push_str(&b3_row("external", &r.bcubed));
    writeln!(card, "\nclaims\t{}\nmissing\t{}", r.claims, r.missing)?;
    write_text(&layout.audit(), &card)?;
    print!("{card}");
    Ok(())
}

/// Every stage in order; `audit-ids` runs only when external IDs are configured.
pub fn run_all(cfg: &PipelineConfig) -> Result<()> {
    link(cfg)?;
    build_block(cfg)?;
    trim(cfg)?;
    build_pairwise(cfg)?;
    split_cmd(cfg)?;
    profile(cfg)?;
    report(cfg)?;
    train(cfg)?;
    tune(cfg)?;
    cluster(cfg)?;
    evaluate(cfg)?;
    if cfg.input.external_ids.is_some() {
        audit_ids(cfg)?;
    }
    Ok(())
}
