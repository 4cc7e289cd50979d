//! Stage execution with on-disk caching.
//!
//! Stage artifacts live under `<out>/cache/`; reports and the run manifest
//! under `<out>/`. Each finished stage records the checksums of its inputs,
//! its settings, and its outputs in `cache/stages.json`, and `run` skips a
//! stage whose record still matches.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use topicflow_core::corpus::{filter_by_daterange, filter_by_keywords, preprocess, PreprocessStats};
use topicflow_core::labeling::{LabelProvider, PromptTemplate, StubProvider, TopicLabel};
use topicflow_core::topics::{topic_map_coordinates, topic_vectors, MapPoint};
use topicflow_core::{aggregate_themes, fit_topics, ClusterAssignment, Corpus, Matrix, ThemeMapping, ThemeSummary, TopicModel};

use crate::config::{EmbedOn, LabelerKind, PipelineConfig};
use crate::error::{Error, Result};
use crate::ingest::{ingest_corpus, parse_timestamp, read_keywords, write_corpus, IngestReport};
use crate::labeler::{label_all, ChatProvider, LabelJob};
use crate::report::{self, read_json, write_json, LabelRecord, MapRecord, TopicRecord};
use crate::{embedfile, parallel, providers};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Stage {
    Ingest,
    Preprocess,
    Embed,
    Fit,
    Represent,
    Label,
    Themes,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Preprocess,
        Stage::Embed,
        Stage::Fit,
        Stage::Represent,
        Stage::Label,
        Stage::Themes,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Preprocess => "preprocess",
            Stage::Embed => "embed",
            Stage::Fit => "fit",
            Stage::Represent => "represent",
            Stage::Label => "label",
            Stage::Themes => "themes",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

// Cache file names.
pub const CORPUS: &str = "corpus.jsonl";
pub const INGEST: &str = "ingest.json";
pub const CLEAN: &str = "clean.jsonl";
pub const PREPROCESS: &str = "preprocess.json";
pub const EMBEDDINGS: &str = "embeddings.bin";
pub const EMBED: &str = "embed.json";
pub const FIT: &str = "fit.json";
pub const TREE: &str = "condensed_tree.json";
pub const GRAPH: &str = "fuzzy_graph.json";
pub const REPRESENT: &str = "represent.json";
pub const LABELING: &str = "labeling.json";
pub const THEMES: &str = "themes.json";
pub const STAGES: &str = "stages.json";

/// Report file names, written to the output directory.
pub const REPORT_FILES: [&str; 8] =
    ["topics.csv", "topics.json", "labels.csv", "labels.json", "themes.csv", "themes.json", "map.json", "rating_sheet.csv"];
pub const MANIFEST: &str = "run_manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestRecord {
    pub report: IngestReport,
    pub after_dates: usize,
    pub after_keywords: usize,
    pub keywords: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessRecord {
    pub input: usize,
    pub kept: usize,
    pub stats: PreprocessStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedRecord {
    pub provider_id: String,
    pub embed_on: EmbedOn,
    pub n: usize,
    pub dim: usize,
    /// Documents given zero vectors; left out of clustering.
    pub empty_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub doc_ids: Vec<String>,
    pub excluded_ids: Vec<String>,
    /// One entry per document in `doc_ids`; excluded documents are `-1`.
    pub labels: Vec<i64>,
    pub strengths: Vec<f64>,
    pub n_clusters: usize,
    pub clustered: usize,
    pub noise: usize,
    pub graph_components: usize,
    pub init: String,
    pub degenerate_rows: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentRecord {
    pub doc_ids: Vec<String>,
    pub labels_before: Vec<i64>,
    pub labels: Vec<i64>,
    pub reassigned: usize,
    pub still_noise: usize,
    pub model: TopicModel,
    pub map: Vec<MapPoint>,
    pub map_degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelingRecord {
    pub provider_id: String,
    pub labels: Vec<TopicLabel>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct StageEntry {
    inputs: BTreeMap<String, String>,
    settings: String,
    outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct StageLedger(BTreeMap<String, StageEntry>);

pub fn sha256_bytes(b: &[u8]) -> String {
    hex::encode(Sha256::digest(b))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?))
}

fn settings_hash<T: Serialize>(v: &T) -> String {
    sha256_bytes(&serde_json::to_vec(v).expect("settings serialize"))
}

fn conserve(stage: &str, what: &str, lhs: usize, rhs: usize) -> Result<()> {
    if lhs != rhs {
        return Err(Error::Pipeline(format!("{stage}: document count not conserved ({what}: {lhs} != {rhs})")));
    }
    Ok(())
}

/// Outcome of [`Pipeline::run`]: which stages ran and which were reused.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub executed: Vec<Stage>,
    pub reused: Vec<Stage>,
}

pub struct Pipeline {
    pub cfg: PipelineConfig,
    pub out: PathBuf,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig) -> Self {
        let out = cfg.out_dir.clone();
        Pipeline { cfg, out }
    }

    pub fn cache(&self, name: &str) -> PathBuf {
        self.out.join("cache").join(name)
    }

    fn ensure_dirs(&self) -> Result<()> {
        let c = self.out.join("cache");
        std::fs::create_dir_all(&c).map_err(|e| Error::io(&c, e))
    }

    fn need(&self, name: &str, stage: Stage) -> Result<PathBuf> {
        let p = self.cache(name);
        if !p.exists() {
            return Err(Error::MissingArtifact { path: p, stage: stage.name() });
        }
        Ok(p)
    }

    /// Input files of a stage, keyed by a stable name.
    fn inputs(&self, stage: Stage) -> Result<BTreeMap<String, PathBuf>> {
        let mut m = BTreeMap::new();
        let c = &self.cfg;
        let mut up = |name: &str, from: Stage| -> Result<()> {
            m.insert(name.to_string(), self.need(name, from)?);
            Ok(())
        };
        match stage {
            Stage::Ingest => {}
            Stage::Preprocess => up(CORPUS, Stage::Ingest)?,
            Stage::Embed => up(CLEAN, Stage::Preprocess)?,
            Stage::Fit => up(EMBEDDINGS, Stage::Embed)?,
            Stage::Represent => {
                up(CLEAN, Stage::Preprocess)?;
                up(FIT, Stage::Fit)?;
            }
            Stage::Label => {
                up(CLEAN, Stage::Preprocess)?;
                up(REPRESENT, Stage::Represent)?;
            }
            Stage::Themes => up(REPRESENT, Stage::Represent)?,
            Stage::Report => {
                up(REPRESENT, Stage::Represent)?;
                up(LABELING, Stage::Label)?;
                up(THEMES, Stage::Themes)?;
            }
        }
        match stage {
            Stage::Ingest => {
                let p = c.corpus.path.clone().ok_or_else(|| Error::Config(vec!["corpus.path: required".into()]))?;
                m.insert("corpus".into(), p);
                if let Some(k) = &c.corpus.keywords {
                    m.insert("keywords".into(), k.clone());
                }
            }
            Stage::Preprocess => {
                for (lang, p) in &c.cleaning.stopword_files {
                    m.insert(format!("stopwords.{lang}"), p.clone());
                }
            }
            Stage::Embed if c.embedding.kind == topicflow_core::ProviderKind::File => {
                if let Some(loc) = &c.embedding.location {
                    m.insert("vectors".into(), PathBuf::from(loc));
                }
            }
            Stage::Label => {
                if let Some(t) = &c.labeling.template {
                    m.insert("template".into(), t.clone());
                }
            }
            Stage::Themes => {
                if let Some(t) = &c.themes.mapping {
                    m.insert("mapping".into(), t.clone());
                }
            }
            _ => {}
        }
        Ok(m)
    }

    fn settings(&self, stage: Stage) -> String {
        let c = &self.cfg;
        match stage {
            Stage::Ingest => settings_hash(&c.corpus),
            Stage::Preprocess => settings_hash(&c.cleaning),
            Stage::Embed => settings_hash(&(c.embedding_spec(), c.cleaning.embed_on)),
            Stage::Fit => settings_hash(&(&c.reduce, &c.cluster, c.seed, c.workers)),
            Stage::Represent => settings_hash(&(&c.represent, &c.cleaning, c.seed)),
            Stage::Label => settings_hash(&c.labeling),
            Stage::Themes => settings_hash(&()),
            Stage::Report => settings_hash(&(&c.report, &self.manifest_config())),
        }
    }

    fn outputs(&self, stage: Stage) -> Vec<PathBuf> {
        let names: &[&str] = match stage {
            Stage::Ingest => &[CORPUS, INGEST],
            Stage::Preprocess => &[CLEAN, PREPROCESS],
            Stage::Embed => &[EMBEDDINGS, EMBED],
            Stage::Fit => &[FIT, TREE],
            Stage::Represent => &[REPRESENT],
            Stage::Label => &[LABELING],
            Stage::Themes => &[THEMES],
            Stage::Report => {
                let mut v: Vec<PathBuf> = REPORT_FILES.iter().map(|f| self.out.join(f)).collect();
                v.push(self.out.join(MANIFEST));
                if self.cfg.report.markdown {
                    v.push(self.out.join("report.md"));
                }
                return v;
            }
        };
        names.iter().map(|n| self.cache(n)).collect()
    }

    fn ledger(&self) -> StageLedger {
        read_json(&self.cache(STAGES)).unwrap_or_default()
    }

    fn hashes(files: &BTreeMap<String, PathBuf>) -> Result<BTreeMap<String, String>> {
        files.iter().map(|(k, p)| Ok((k.clone(), sha256_file(p)?))).collect()
    }

    fn is_fresh(&self, stage: Stage, inputs: &BTreeMap<String, String>, settings: &str) -> bool {
        let ledger = self.ledger();
        let Some(e) = ledger.0.get(stage.name()) else { return false };
        if &e.inputs != inputs || e.settings != settings {
            return false;
        }
        let outs = self.outputs(stage);
        outs.len() == e.outputs.len()
            && outs.iter().all(|p| {
                let key = p.file_name().unwrap().to_string_lossy().into_owned();
                matches!((e.outputs.get(&key), sha256_file(p)), (Some(want), Ok(got)) if *want == got)
            })
    }

    fn record(&self, stage: Stage, inputs: BTreeMap<String, String>, settings: String) -> Result<()> {
        let mut ledger = self.ledger();
        let mut outputs = BTreeMap::new();
        for p in self.outputs(stage) {
            outputs.insert(p.file_name().unwrap().to_string_lossy().into_owned(), sha256_file(&p)?);
        }
        ledger.0.insert(stage.name().to_string(), StageEntry { inputs, settings, outputs });
        write_json(&self.cache(STAGES), &ledger)
    }

    /// Runs one stage, or reuses its cached outputs when `reuse` is set and
    /// nothing it depends on changed. Returns whether it ran.
    pub fn stage(&self, stage: Stage, reuse: bool) -> Result<bool> {
        self.ensure_dirs()?;
        let run = || -> Result<bool> {
            let inputs = Self::hashes(&self.inputs(stage)?)?;
            let settings = self.settings(stage);
            if reuse && self.is_fresh(stage, &inputs, &settings) {
                log::info!("stage {stage}: inputs unchanged, reusing cache");
                return Ok(false);
            }
            log::info!("stage {stage}: running");
            match stage {
                Stage::Ingest => self.ingest()?,
                Stage::Preprocess => self.preprocess()?,
                Stage::Embed => self.embed()?,
                Stage::Fit => self.fit()?,
                Stage::Represent => self.represent()?,
                Stage::Label => self.label()?,
                Stage::Themes => self.themes()?,
                Stage::Report => self.report()?,
            }
            self.record(stage, inputs, settings)?;
            Ok(true)
        };
        run().map_err(|e| e.in_stage(stage.name()))
    }

    /// Every stage in order, reusing fresh caches unless `force` is set.
    pub fn run(&self, force: bool) -> Result<RunSummary> {
        let mut s = RunSummary::default();
        for st in Stage::ALL {
            if self.stage(st, !force)? {
                s.executed.push(st);
            } else {
                s.reused.push(st);
            }
        }
        Ok(s)
    }

    fn load_corpus(&self, name: &str) -> Result<Corpus> {
        Ok(ingest_corpus(&self.cache(name), 0.0)?.0)
    }

    fn ingest(&self) -> Result<()> {
        let c = &self.cfg.corpus;
        let path = c.path.as_ref().ok_or_else(|| Error::Config(vec!["corpus.path: required".into()]))?;
        let (corpus, report) = ingest_corpus(path, c.max_malformed_fraction)?;
        let corpus = match (c.start.as_deref().and_then(parse_timestamp), c.end.as_deref().and_then(parse_timestamp)) {
            (Some(s), Some(e)) => filter_by_daterange(&corpus, s, e)?,
            _ => corpus,
        };
        let after_dates = corpus.len();
        let (corpus, keywords) = match &c.keywords {
            Some(k) => {
                let kw = read_keywords(k)?;
                (filter_by_keywords(&corpus, &kw)?, Some(kw.len()))
            }
            None => (corpus, None),
        };
        log::info!(
            "ingested {} records ({} malformed), {} in date range, {} after keyword filter",
            report.records,
            report.malformed_lines.len(),
            after_dates,
            corpus.len()
        );
        if corpus.is_empty() {
            return Err(Error::Pipeline("no documents after filtering".into()));
        }
        write_corpus(&self.cache(CORPUS), &corpus)?;
        write_json(&self.cache(INGEST), &IngestRecord { report, after_dates, after_keywords: corpus.len(), keywords })
    }

    fn preprocess(&self) -> Result<()> {
        let corpus = self.load_corpus(CORPUS)?;
        let rules = self.cfg.cleaning_rules()?;
        let (clean, stats) = preprocess(&corpus, &rules);
        conserve("preprocess", "kept + dropped", clean.len() + stats.dropped_empty.len() + stats.dropped_duplicate.len(), corpus.len())?;
        log::info!(
            "preprocessed {} documents: {} kept, {} empty, {} duplicates",
            corpus.len(),
            clean.len(),
            stats.dropped_empty.len(),
            stats.dropped_duplicate.len()
        );
        if clean.is_empty() {
            return Err(Error::Pipeline("no documents after filtering".into()));
        }
        write_corpus(&self.cache(CLEAN), &clean)?;
        write_json(&self.cache(PREPROCESS), &PreprocessRecord { input: corpus.len(), kept: clean.len(), stats })
    }

    fn embed(&self) -> Result<()> {
        let corpus = self.load_corpus(CLEAN)?;
        let ids: Vec<String> = corpus.documents().iter().map(|d| d.id.clone()).collect();
        let embed_on = self.cfg.cleaning.embed_on;
        let texts: Vec<&str> = corpus
            .documents()
            .iter()
            .map(|d| match embed_on {
                EmbedOn::Clean => d.clean_text.as_str(),
                EmbedOn::Raw => d.raw_text.as_str(),
            })
            .collect();
        let spec = self.cfg.embedding_spec();
        let timeout = Duration::from_secs(self.cfg.embedding.timeout_secs);
        let e = providers::embed_corpus(&spec, &ids, &texts, self.cfg.workers, &self.cfg.embed_retry(), timeout)?;
        log::info!("embedded {} documents with {} ({} empty)", e.matrix.len(), e.provider_id, e.empty_ids.len());
        embedfile::save(&self.cache(EMBEDDINGS), &e.matrix)?;
        write_json(
            &self.cache(EMBED),
            &EmbedRecord { provider_id: e.provider_id, embed_on, n: e.matrix.len(), dim: e.matrix.dim(), empty_ids: e.empty_ids },
        )
    }

    fn fit(&self) -> Result<()> {
        let m = embedfile::load(&self.cache(EMBEDDINGS))?;
        let zero = m.zero_rows();
        let keep: Vec<usize> = (0..m.len()).filter(|i| zero.binary_search(i).is_err()).collect();
        let points = Matrix::from_embeddings(&m).select_rows(&keep);
        let workers = self.cfg.workers;
        let cfg = self.cfg.reduce_config();
        if points.rows() <= cfg.n_neighbors {
            return Err(Error::Pipeline(format!(
                "only {} documents to cluster; need more than reduce.n_neighbors = {}",
                points.rows(),
                cfg.n_neighbors
            )));
        }
        let red = parallel::reduce_parallel(&points, &cfg, workers)?;
        log::info!("reduced {} x {} to {} dimensions ({:?} init)", points.rows(), points.cols(), cfg.n_components, red.init);
        let cl = parallel::cluster_parallel(&red.embedding, &self.cfg.density_params(), workers)?;
        let a = &cl.assignment;
        log::info!("found {} clusters, {} noise points", a.n_clusters, a.noise_count());

        let mut labels = vec![-1i64; m.len()];
        let mut strengths = vec![0.0; m.len()];
        for (k, &i) in keep.iter().enumerate() {
            labels[i] = a.labels[k];
            strengths[i] = a.strengths[k];
        }
        let rec = FitRecord {
            doc_ids: m.doc_ids().to_vec(),
            excluded_ids: zero.iter().map(|&i| m.doc_ids()[i].clone()).collect(),
            labels,
            strengths,
            n_clusters: a.n_clusters,
            clustered: keep.len(),
            noise: a.noise_count(),
            graph_components: red.components,
            init: format!("{:?}", red.init).to_lowercase(),
            degenerate_rows: red.degenerate_rows.len(),
            warnings: cl.warnings.iter().map(|w| format!("{w:?}")).collect(),
        };
        conserve("fit", "clustered + excluded", rec.clustered + rec.excluded_ids.len(), m.len())?;
        write_json(&self.cache(TREE), &cl.tree)?;
        if self.cfg.report.debug_dumps {
            let p = prepared_graph(&points, &cfg)?;
            write_json(&self.cache(GRAPH), &p)?;
        }
        write_json(&self.cache(FIT), &rec)
    }

    fn represent(&self) -> Result<()> {
        let corpus = self.load_corpus(CLEAN)?;
        let fit: FitRecord = read_json(&self.cache(FIT))?;
        let ids: Vec<String> = corpus.documents().iter().map(|d| d.id.clone()).collect();
        if ids != fit.doc_ids {
            return Err(Error::Pipeline("fit output does not match the preprocessed corpus; rerun `fit`".into()));
        }
        let texts: Vec<&str> = corpus.documents().iter().map(|d| d.clean_text.as_str()).collect();
        let assignment = ClusterAssignment { labels: fit.labels.clone(), strengths: fit.strengths.clone(), n_clusters: fit.n_clusters };
        let rules = self.cfg.cleaning_rules()?;
        let params = self.cfg.representation_params(&rules);
        let (rep, re) = fit_topics(&ids, &texts, &assignment, &params)?;
        let still_noise = re.still_noise.len();
        conserve("represent", "topic counts + noise", rep.model.total_count() + still_noise, ids.len())?;
        log::info!("{} topics; {} outliers reassigned, {} left as noise", rep.model.topics.len(), re.reassigned, still_noise);
        let sizes: Vec<usize> = rep.model.topics.iter().map(|t| t.count).collect();
        let map = topic_map_coordinates(&topic_vectors(&rep.weights), &sizes, self.cfg.seed)?;
        write_json(
            &self.cache(REPRESENT),
            &RepresentRecord {
                doc_ids: ids,
                labels_before: fit.labels,
                labels: re.assignment.labels,
                reassigned: re.reassigned,
                still_noise,
                model: rep.model,
                map: map.points,
                map_degenerate: map.degenerate,
            },
        )
    }

    fn template(&self) -> Result<PromptTemplate> {
        match &self.cfg.labeling.template {
            Some(p) => Ok(PromptTemplate::parse(&crate::error::read_to_string(p)?)?),
            None => Ok(PromptTemplate::default()),
        }
    }

    fn label(&self) -> Result<()> {
        let corpus = self.load_corpus(CLEAN)?;
        let rep: RepresentRecord = read_json(&self.cache(REPRESENT))?;
        let text: BTreeMap<&str, &str> = corpus.documents().iter().map(|d| (d.id.as_str(), d.clean_text.as_str())).collect();
        let nr = self.cfg.labeling.nr_docs;
        let jobs: Vec<LabelJob> = rep
            .model
            .topics
            .iter()
            .map(|t| LabelJob {
                topic_id: t.id,
                top_terms: t.top_terms.clone(),
                documents: t.representative_doc_ids.iter().take(nr).filter_map(|id| text.get(id.as_str())).map(|s| s.to_string()).collect(),
            })
            .collect();
        let template = self.template()?;
        let (policy, conc) = (self.cfg.label_retry(), self.cfg.labeling.concurrency);
        let (provider_id, labels) = match self.cfg.labeling.provider {
            LabelerKind::Stub => (StubProvider.id(), label_all(&StubProvider, &template, &jobs, &policy, conc)?),
            LabelerKind::Live => {
                let p = ChatProvider::from_env(&self.cfg.labeling)?;
                (p.id(), label_all(&p, &template, &jobs, &policy, conc)?)
            }
        };
        let fallbacks = labels.iter().filter(|l| l.error.is_some()).count();
        if fallbacks > 0 {
            log::warn!("{fallbacks} topics fell back to top-term labels");
        }
        write_json(&self.cache(LABELING), &LabelingRecord { provider_id, labels })
    }

    fn mapping(&self) -> Result<ThemeMapping> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Entry {
            name: String,
            topic_ids: Vec<usize>,
        }
        match &self.cfg.themes.mapping {
            Some(p) => {
                let entries: Vec<Entry> = read_json(p)?;
                Ok(ThemeMapping::new(entries.into_iter().map(|e| (e.name, e.topic_ids)).collect())?)
            }
            None => Ok(ThemeMapping::default()),
        }
    }

    fn themes(&self) -> Result<()> {
        let rep: RepresentRecord = read_json(&self.cache(REPRESENT))?;
        let counts: Vec<(usize, usize)> = rep.model.topics.iter().map(|t| (t.id, t.count)).collect();
        let summary = aggregate_themes(&self.mapping()?, &counts)?;
        conserve("themes", "theme total", summary.rows.iter().map(|r| r.count).sum(), rep.model.total_count())?;
        write_json(&self.cache(THEMES), &summary)
    }

    /// The resolved config as recorded in the manifest; the output
    /// directory is left out so runs into different directories match.
    fn manifest_config(&self) -> PipelineConfig {
        let mut c = self.cfg.clone();
        c.out_dir = PathBuf::from(".");
        c
    }

    fn report(&self) -> Result<()> {
        let rep: RepresentRecord = read_json(&self.cache(REPRESENT))?;
        let lab: LabelingRecord = read_json(&self.cache(LABELING))?;
        let themes: ThemeSummary = read_json(&self.cache(THEMES))?;
        let label_of: BTreeMap<usize, &str> = lab.labels.iter().map(|l| (l.topic_id, l.label.as_str())).collect();
        let topics: Vec<TopicRecord> = rep
            .model
            .topics
            .iter()
            .map(|t| TopicRecord { topic_id: t.id, count: t.count, terms: t.top_terms.iter().take(report::TERM_COLUMNS).cloned().collect() })
            .collect();
        let labels: Vec<LabelRecord> = rep
            .model
            .topics
            .iter()
            .map(|t| LabelRecord {
                topic_id: t.id,
                count: t.count,
                label: label_of.get(&t.id).map_or_else(|| rep.model.label_or_terms(t.id), |l| l.to_string()),
            })
            .collect();
        let map: Vec<MapRecord> = rep
            .map
            .iter()
            .map(|p| MapRecord {
                topic_id: p.topic_id,
                x: p.x,
                y: p.y,
                size: p.size,
                label: label_of.get(&p.topic_id).map_or_else(String::new, |l| l.to_string()),
            })
            .collect();
        let theme_rows = report::theme_records(&themes);
        report::write_topics(&self.out, &topics)?;
        report::write_labels(&self.out, &labels)?;
        report::write_themes(&self.out, &theme_rows)?;
        report::write_map(&self.out, &map)?;
        report::write_rating_template(&self.out.join("rating_sheet.csv"), &labels)?;
        if self.cfg.report.markdown {
            report::write_markdown(&self.out, &labels, &topics, &theme_rows)?;
        }
        let manifest = self.manifest(&rep, &lab)?;
        write_json(&self.out.join(MANIFEST), &manifest)
    }

    fn manifest(&self, rep: &RepresentRecord, lab: &LabelingRecord) -> Result<serde_json::Value> {
        let ingest: IngestRecord = read_json(&self.cache(INGEST))?;
        let pre: PreprocessRecord = read_json(&self.cache(PREPROCESS))?;
        let emb: EmbedRecord = read_json(&self.cache(EMBED))?;
        let fit: FitRecord = read_json(&self.cache(FIT))?;
        let mut artifacts = BTreeMap::new();
        for name in [CORPUS, INGEST, CLEAN, PREPROCESS, EMBEDDINGS, EMBED, FIT, TREE, REPRESENT, LABELING, THEMES] {
            artifacts.insert(format!("cache/{name}"), sha256_file(&self.cache(name))?);
        }
        for name in REPORT_FILES {
            artifacts.insert(name.to_string(), sha256_file(&self.out.join(name))?);
        }
        if self.cfg.report.markdown {
            artifacts.insert("report.md".into(), sha256_file(&self.out.join("report.md"))?);
        }
        let spec = self.cfg.embedding_spec();
        Ok(serde_json::json!({
            "tool": "topicflow",
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.manifest_config(),
            "seeds": {
                "run": self.cfg.seed,
                "embedding": spec.seed,
                "reduce": self.cfg.seed,
                "topic_map": self.cfg.seed,
            },
            "workers": self.cfg.workers,
            "providers": { "embedding": emb.provider_id, "labeler": lab.provider_id },
            "counts": {
                "ingested": ingest.report.records,
                "malformed_lines": ingest.report.malformed_lines.len(),
                "after_date_filter": ingest.after_dates,
                "after_keyword_filter": ingest.after_keywords,
                "preprocess_input": pre.input,
                "dropped_empty": pre.stats.dropped_empty.len(),
                "dropped_duplicate": pre.stats.dropped_duplicate.len(),
                "documents": pre.kept,
                "embedded": emb.n,
                "embedded_empty": emb.empty_ids.len(),
                "clustered": fit.clustered,
                "noise_before_reassignment": fit.noise + fit.excluded_ids.len(),
                "reassigned": rep.reassigned,
                "noise_after_reassignment": rep.still_noise,
                "topics": rep.model.topics.len(),
                "topic_total": rep.model.total_count(),
            },
            "artifacts": artifacts,
        }))
    }
}

/// Fuzzy graph edges `(i, j, weight)` for the debug dump.
fn prepared_graph(points: &Matrix, cfg: &topicflow_core::ReduceConfig) -> Result<Vec<(usize, usize, f64)>> {
    use topicflow_core::reduce::{build_knn_graph, fuzzy_graph_from_knn, prepare_points};
    let p = prepare_points(points, cfg.metric);
    let knn = build_knn_graph(&p, cfg.n_neighbors, cfg.metric)?;
    let (g, _) = fuzzy_graph_from_knn(&knn);
    Ok(g.entries().filter(|e| e.0 < e.1).collect())
}
