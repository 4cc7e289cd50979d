//! Pipeline configuration: TOML file, defaults, and validation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use topicflow_core::embedding::{EmbeddingProviderSpec, DEFAULT_DIM, DEFAULT_MODEL};
use topicflow_core::labeling::RetryPolicy;
use topicflow_core::topics::{OutlierStrategy, StopPolicy};
use topicflow_core::{stopwords, CleaningRules, DensityParams, Metric, ProviderKind, ReduceConfig, RepresentationParams};

use crate::error::{read_to_string, Error, Result};
use crate::ingest::parse_timestamp;

/// Which text is sent to the embedding provider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedOn {
    #[default]
    Clean,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LabelerKind {
    #[default]
    Stub,
    Live,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub path: Option<PathBuf>,
    /// Keyword file; when absent no keyword filter is applied.
    pub keywords: Option<PathBuf>,
    pub start: Option<String>,
    pub end: Option<String>,
    pub max_malformed_fraction: f64,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection { path: None, keywords: None, start: None, end: None, max_malformed_fraction: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleaningSection {
    pub remove_urls: bool,
    pub remove_mentions: bool,
    pub remove_emoji: bool,
    pub remove_punctuation: bool,
    pub remove_stopwords: bool,
    pub lowercase: bool,
    pub keep_hashtag_word: bool,
    /// Include the bundled English list under `en`.
    pub builtin_english: bool,
    /// Language code to stop-word file, one word per line.
    pub stopword_files: BTreeMap<String, PathBuf>,
    pub embed_on: EmbedOn,
}

impl Default for CleaningSection {
    fn default() -> Self {
        let r = CleaningRules::default();
        CleaningSection {
            remove_urls: r.remove_urls,
            remove_mentions: r.remove_mentions,
            remove_emoji: r.remove_emoji,
            remove_punctuation: r.remove_punctuation,
            remove_stopwords: r.remove_stopwords,
            lowercase: r.lowercase,
            keep_hashtag_word: r.keep_hashtag_word,
            builtin_english: true,
            stopword_files: BTreeMap::new(),
            embed_on: EmbedOn::Clean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSection {
    pub kind: ProviderKind,
    /// Matrix file for `file`, base URL for `http`.
    pub location: Option<String>,
    pub model_name: String,
    pub batch_size: usize,
    pub dim: usize,
    /// Seed for `hash-test`; defaults to the run seed.
    pub seed: Option<u64>,
    pub timeout_secs: u64,
    pub max_attempts: u32,
    pub backoff_ms: u64,
}

impl Default for EmbeddingSection {
    fn default() -> Self {
        EmbeddingSection {
            kind: ProviderKind::HashTest,
            location: None,
            model_name: DEFAULT_MODEL.to_string(),
            batch_size: 64,
            dim: DEFAULT_DIM,
            seed: None,
            timeout_secs: 60,
            max_attempts: 3,
            backoff_ms: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReduceSection {
    pub n_neighbors: usize,
    pub n_components: usize,
    pub min_dist: f64,
    pub spread: f64,
    pub metric: Metric,
    pub epochs: Option<usize>,
    pub neg_samples: usize,
    pub learning_rate: f64,
}

impl Default for ReduceSection {
    fn default() -> Self {
        let r = ReduceConfig::default();
        ReduceSection {
            n_neighbors: r.n_neighbors,
            n_components: r.n_components,
            min_dist: r.min_dist,
            spread: r.spread,
            metric: r.metric,
            epochs: r.epochs,
            neg_samples: r.neg_samples,
            learning_rate: r.learning_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSection {
    pub min_cluster_size: usize,
    pub min_samples: usize,
    pub allow_single_cluster: bool,
}

impl Default for ClusterSection {
    fn default() -> Self {
        let d = DensityParams::default();
        ClusterSection {
            min_cluster_size: d.min_cluster_size,
            min_samples: d.min_samples,
            allow_single_cluster: d.allow_single_cluster,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RepresentSection {
    pub n_terms: usize,
    pub nr_docs: usize,
    pub max_doc_freq: f64,
    pub extra_stopwords: Vec<String>,
    /// `ctfidf` or `distributions`.
    pub strategy: String,
    pub window: usize,
    pub stride: usize,
    pub threshold: f64,
}

impl Default for RepresentSection {
    fn default() -> Self {
        RepresentSection {
            n_terms: 10,
            nr_docs: 10,
            max_doc_freq: StopPolicy::default().max_doc_freq,
            extra_stopwords: Vec::new(),
            strategy: "ctfidf".into(),
            window: 4,
            stride: 1,
            threshold: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelingSection {
    pub provider: LabelerKind,
    pub model: String,
    /// Recorded in the manifest; completion-style prompting is the only mode.
    pub mode: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Topics labeled at the same time.
    pub concurrency: usize,
    /// Representative documents per prompt.
    pub nr_docs: usize,
    /// Sectioned template file; the bundled template when absent.
    pub template: Option<PathBuf>,
    pub max_attempts: u32,
    pub backoff_ms: u64,
    pub timeout_secs: u64,
}

impl Default for LabelingSection {
    fn default() -> Self {
        LabelingSection {
            provider: LabelerKind::Stub,
            model: "gpt-4-turbo-preview".into(),
            mode: "complete".into(),
            temperature: 0.0,
            max_tokens: 64,
            concurrency: 4,
            nr_docs: 4,
            template: None,
            max_attempts: 3,
            backoff_ms: 500,
            timeout_secs: 60,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThemesSection {
    /// JSON list of `{"name": ..., "topic_ids": [...]}`.
    pub mapping: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    pub markdown: bool,
    /// Also write the fuzzy neighbor graph to the cache directory.
    pub debug_dumps: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub corpus: CorpusSection,
    pub cleaning: CleaningSection,
    pub embedding: EmbeddingSection,
    pub reduce: ReduceSection,
    pub cluster: ClusterSection,
    pub represent: RepresentSection,
    pub labeling: LabelingSection,
    pub themes: ThemesSection,
    pub report: ReportSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            workers: 1,
            out_dir: PathBuf::from("out"),
            corpus: CorpusSection::default(),
            cleaning: CleaningSection::default(),
            embedding: EmbeddingSection::default(),
            reduce: ReduceSection::default(),
            cluster: ClusterSection::default(),
            represent: RepresentSection::default(),
            labeling: LabelingSection::default(),
            themes: ThemesSection::default(),
            report: ReportSection::default(),
        }
    }
}

/// Commented defaults printed by `topicflow config --print-defaults`.
pub const DEFAULTS_TOML: &str = r#"# topicflow pipeline configuration. Relative paths are resolved against
# the directory holding this file.
seed = 42
workers = 1
out_dir = "out"

[corpus]
# path = "posts.jsonl"           # required: JSON lines with id, text, ts, likes, retweets, lang
# keywords = "keywords.txt"      # one phrase per line; no keyword filter when absent
# start = "2022-08-01T00:00:00Z" # inclusive date window, both ends required together
# end = "2023-12-31T23:59:59Z"
max_malformed_fraction = 0.1

[cleaning]
remove_urls = true
remove_mentions = true
remove_emoji = true
remove_punctuation = true
remove_stopwords = true
lowercase = true
keep_hashtag_word = true
builtin_english = true
embed_on = "clean"               # clean | raw
[cleaning.stopword_files]
# es = "stopwords_es.txt"

[embedding]
kind = "hash-test"               # hash-test | file | http
# location = "embeddings.bin"    # file path, or base URL for http
model_name = "paraphrase-multilingual-MiniLM-L12-v2"
batch_size = 64
dim = 384
# seed = 42                      # hash-test only; defaults to the run seed
timeout_secs = 60
max_attempts = 3
backoff_ms = 500

[reduce]
n_neighbors = 15
n_components = 5
min_dist = 0.0
spread = 1.0
metric = "cosine"                # cosine | euclidean
# epochs = 500                   # default: 500, or 200 above 10000 documents
neg_samples = 5
learning_rate = 1.0

[cluster]
min_cluster_size = 10
min_samples = 10
allow_single_cluster = false

[represent]
n_terms = 10
nr_docs = 10
max_doc_freq = 0.5
extra_stopwords = []
strategy = "ctfidf"              # ctfidf | distributions
window = 4
stride = 1
threshold = 0.0

[labeling]
provider = "stub"                # stub | live
model = "gpt-4-turbo-preview"
mode = "complete"
temperature = 0.0
max_tokens = 64
concurrency = 4
nr_docs = 4
# template = "topic_label.txt"
max_attempts = 3
backoff_ms = 500
timeout_secs = 60

[themes]
# mapping = "themes.json"

[report]
markdown = false
debug_dumps = false
"#;

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string().trim_end().to_string()]))
    }

    /// Reads a config file and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path).map_err(|e| Error::Config(vec![e.to_string()]))?;
        let mut c = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        c.resolve_paths(base);
        Ok(c)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.out_dir);
        for p in [&mut self.corpus.path, &mut self.corpus.keywords, &mut self.themes.mapping, &mut self.labeling.template]
            .into_iter()
            .flatten()
        {
            resolve(base, p);
        }
        for p in self.cleaning.stopword_files.values_mut() {
            resolve(base, p);
        }
        if self.embedding.kind == ProviderKind::File {
            if let Some(loc) = &mut self.embedding.location {
                let mut p = PathBuf::from(&*loc);
                resolve(base, &mut p);
                *loc = p.display().to_string();
            }
        }
    }

    /// Every problem found, so they can be fixed in one pass.
    pub fn validate(&self) -> Vec<String> {
        self.validate_for(true)
    }

    /// Like [`validate`](Self::validate); stages that only read cached
    /// artifacts pass `need_corpus = false`.
    pub fn validate_for(&self, need_corpus: bool) -> Vec<String> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                errs.push(msg);
            }
        };
        check(self.workers >= 1, format!("workers: must be at least 1 (got {})", self.workers));

        let c = &self.corpus;
        check(!need_corpus || c.path.is_some(), "corpus.path: required".into());
        check(
            (0.0..=1.0).contains(&c.max_malformed_fraction),
            format!("corpus.max_malformed_fraction: must be in [0, 1] (got {})", c.max_malformed_fraction),
        );
        let start = c.start.as_deref().map(|s| (s, parse_timestamp(s)));
        let end = c.end.as_deref().map(|s| (s, parse_timestamp(s)));
        for (key, v) in [("corpus.start", start), ("corpus.end", end)] {
            if let Some((s, None)) = v {
                check(false, format!("{key}: not an ISO-8601 timestamp: `{s}`"));
            }
        }
        match (start, end) {
            (Some((_, Some(a))), Some((_, Some(b)))) => {
                check(a <= b, format!("corpus.start: after corpus.end ({a} > {b})"))
            }
            (Some(_), None) | (None, Some(_)) => check(false, "corpus.start, corpus.end: set both or neither".into()),
            _ => {}
        }

        for (lang, _) in &self.cleaning.stopword_files {
            check(lang.chars().count() == 2, format!("cleaning.stopword_files: `{lang}` is not a 2-letter code"));
        }

        for p in self.embedding_spec().problems() {
            check(false, format!("embedding: {p}"));
        }
        let e = &self.embedding;
        check(e.kind != ProviderKind::HashTest || e.dim >= 2, format!("embedding.dim: hash-test needs at least 2 (got {})", e.dim));
        check(e.max_attempts >= 1, "embedding.max_attempts: must be at least 1".into());

        let r = &self.reduce;
        check(r.n_neighbors >= 2, format!("reduce.n_neighbors: must be at least 2 (got {})", r.n_neighbors));
        check(r.n_components >= 1, format!("reduce.n_components: must be at least 1 (got {})", r.n_components));
        check(r.spread > 0.0, format!("reduce.spread: must be positive (got {})", r.spread));
        check(
            r.min_dist >= 0.0 && r.min_dist < 4.0 * r.spread,
            format!("reduce.min_dist: must be in [0, 4 * spread) (got {})", r.min_dist),
        );
        check(r.epochs != Some(0), "reduce.epochs: must be positive".into());
        check(r.learning_rate > 0.0, format!("reduce.learning_rate: must be positive (got {})", r.learning_rate));

        let k = &self.cluster;
        check(k.min_cluster_size >= 2, format!("cluster.min_cluster_size: must be at least 2 (got {})", k.min_cluster_size));
        check(k.min_samples >= 1, format!("cluster.min_samples: must be at least 1 (got {})", k.min_samples));

        let t = &self.represent;
        check(t.n_terms >= 1, "represent.n_terms: must be at least 1".into());
        check(t.nr_docs >= 1, "represent.nr_docs: must be at least 1".into());
        check(
            t.max_doc_freq > 0.0 && t.max_doc_freq <= 1.0,
            format!("represent.max_doc_freq: must be in (0, 1] (got {})", t.max_doc_freq),
        );
        check(t.threshold >= 0.0, format!("represent.threshold: must be non-negative (got {})", t.threshold));
        match t.strategy.parse::<OutlierStrategy>() {
            Ok(OutlierStrategy::Distributions { .. }) => {
                check(t.window >= 1 && t.stride >= 1, "represent.window, represent.stride: must be positive".into())
            }
            Ok(_) => {}
            Err(_) => check(false, format!("represent.strategy: expected ctfidf or distributions (got `{}`)", t.strategy)),
        }

        let l = &self.labeling;
        check(l.concurrency >= 1, "labeling.concurrency: must be at least 1".into());
        check(l.nr_docs >= 1, "labeling.nr_docs: must be at least 1".into());
        check(l.max_attempts >= 1, "labeling.max_attempts: must be at least 1".into());
        check(l.mode == "complete", format!("labeling.mode: only `complete` is supported (got `{}`)", l.mode));
        check((0.0..=2.0).contains(&l.temperature), format!("labeling.temperature: must be in [0, 2] (got {})", l.temperature));
        check(l.provider != LabelerKind::Live || !l.model.is_empty(), "labeling.model: required for the live labeler".into());
        errs
    }

    pub fn validated(self, need_corpus: bool) -> Result<Self> {
        let errs = self.validate_for(need_corpus);
        if errs.is_empty() {
            Ok(self)
        } else {
            Err(Error::Config(errs))
        }
    }

    pub fn embedding_spec(&self) -> EmbeddingProviderSpec {
        let e = &self.embedding;
        EmbeddingProviderSpec {
            kind: e.kind,
            location: e.location.clone(),
            model_name: e.model_name.clone(),
            batch_size: e.batch_size,
            dim: e.dim,
            seed: e.seed.unwrap_or(self.seed),
        }
    }

    pub fn embed_retry(&self) -> RetryPolicy {
        RetryPolicy { max_attempts: self.embedding.max_attempts, base_delay_ms: self.embedding.backoff_ms }
    }

    pub fn label_retry(&self) -> RetryPolicy {
        RetryPolicy { max_attempts: self.labeling.max_attempts, base_delay_ms: self.labeling.backoff_ms }
    }

    pub fn reduce_config(&self) -> ReduceConfig {
        let r = &self.reduce;
        ReduceConfig {
            n_neighbors: r.n_neighbors,
            n_components: r.n_components,
            min_dist: r.min_dist,
            spread: r.spread,
            metric: r.metric,
            epochs: r.epochs,
            neg_samples: r.neg_samples,
            learning_rate: r.learning_rate,
            seed: self.seed,
        }
    }

    pub fn density_params(&self) -> DensityParams {
        DensityParams {
            min_cluster_size: self.cluster.min_cluster_size,
            min_samples: self.cluster.min_samples,
            allow_single_cluster: self.cluster.allow_single_cluster,
        }
    }

    /// Cleaning rules with stop-word files loaded.
    pub fn cleaning_rules(&self) -> Result<CleaningRules> {
        let c = &self.cleaning;
        let mut lists = BTreeMap::new();
        if c.builtin_english {
            lists.insert("en".to_string(), stopwords::english());
        }
        for (lang, path) in &c.stopword_files {
            lists.entry(lang.to_lowercase()).or_insert_with(Default::default).extend(crate::ingest::read_stopwords(path)?);
        }
        Ok(CleaningRules {
            remove_urls: c.remove_urls,
            remove_mentions: c.remove_mentions,
            remove_emoji: c.remove_emoji,
            remove_punctuation: c.remove_punctuation,
            remove_stopwords: c.remove_stopwords,
            lowercase: c.lowercase,
            keep_hashtag_word: c.keep_hashtag_word,
            stopword_lists: lists,
        })
    }

    /// Representation settings. The stop list is the union of every
    /// cleaning list plus `extra_stopwords`.
    pub fn representation_params(&self, rules: &CleaningRules) -> RepresentationParams {
        let t = &self.represent;
        let mut stop: std::collections::BTreeSet<String> = rules.stopword_lists.values().flatten().cloned().collect();
        stop.extend(t.extra_stopwords.iter().map(|w| w.to_lowercase()));
        let strategy = match t.strategy.parse::<OutlierStrategy>().unwrap_or_default() {
            OutlierStrategy::Distributions { .. } => OutlierStrategy::Distributions { window: t.window, stride: t.stride },
            s => s,
        };
        RepresentationParams {
            n_terms: t.n_terms,
            nr_docs: t.nr_docs,
            stop: StopPolicy { stopwords: stop, max_doc_freq: t.max_doc_freq },
            strategy,
            threshold: t.threshold,
        }
    }
}
