//! Command-line interface.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use topicflow_core::labeling::rate_agreement;
use topicflow_core::{KeywordSet, ProviderKind};

use crate::config::{LabelerKind, PipelineConfig, DEFAULTS_TOML};
use crate::error::{Error, Result};
use crate::ingest::{ingest_corpus, read_keywords, write_keywords};
use crate::pipeline::{Pipeline, Stage};
use crate::report::read_rating_sheet;
use crate::saturate::{saturate, ProposalParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProviderArg {
    File,
    Http,
    HashTest,
}

impl From<ProviderArg> for ProviderKind {
    fn from(p: ProviderArg) -> Self {
        match p {
            ProviderArg::File => ProviderKind::File,
            ProviderArg::Http => ProviderKind::Http,
            ProviderArg::HashTest => ProviderKind::HashTest,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "topicflow", version, about = "Topic modeling for short social-media posts")]
pub struct Cli {
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Random seed for embedding, reduction and clustering
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 1 gives bit-reproducible results
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Embedding provider.
    #[arg(long, global = true, value_enum)]
    pub provider: Option<ProviderArg>,
    /// Topic labeler
    #[arg(long, global = true, value_enum)]
    pub labeler: Option<LabelerKind>,
    /// Log as JSON lines on stderr.
    #[arg(long, global = true)]
    pub log_json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read the corpus and apply the date and keyword filters.
    Ingest,
    /// Clean, drop empty documents, and collapse duplicates.
    Preprocess,
    /// Embed the cleaned documents.
    Embed,
    /// Reduce dimensionality and cluster.
    Fit,
    /// Topic terms, outlier reassignment, and topic map.
    Represent,
    /// Label topics with the configured labeler.
    Label,
    /// Aggregate topics into themes.
    Themes,
    /// Write report tables and the run manifest.
    Report,
    /// Every stage in order, reusing unchanged caches.
    Run {
        /// Recompute every stage.
        #[arg(long)]
        force: bool,
    },
    /// Grow a keyword list until no new keywords are proposed.
    Saturate {
        /// Starting keywords; the built-in seeds when absent.
        #[arg(long)]
        keywords: Option<PathBuf>,
        /// Where to write the final list; defaults to the config's keyword file.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Accept every proposal instead of prompting.
        #[arg(long)]
        auto: bool,
        /// Stop after this many rounds even if not saturated
        #[arg(long, default_value_t = 10)]
        max_rounds: usize,
        /// Smallest share of matched posts a candidate must appear in
        #[arg(long, default_value_t = 0.2)]
        min_share: f64,
        /// Most candidates proposed per round
        #[arg(long, default_value_t = 10)]
        candidates: usize,
    },
    /// Percent agreement between two rating sheets.
    Rate { first: PathBuf, second: PathBuf },
    /// Show or check configuration.
    Config {
        #[arg(long)]
        print_defaults: bool,
        /// Only check the configuration.
        #[arg(long)]
        validate: bool,
    },
}

impl Cli {
    fn load_config(&self) -> Result<PipelineConfig> {
        let mut c = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(o) = &self.out {
            c.out_dir = o.clone();
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(w) = self.workers {
            c.workers = w;
        }
        if let Some(p) = self.provider {
            c.embedding.kind = p.into();
        }
        if let Some(l) = self.labeler {
            c.labeling.provider = l;
        }
        Ok(c)
    }
}

fn stage_of(c: &Command) -> Option<Stage> {
    Some(match c {
        Command::Ingest => Stage::Ingest,
        Command::Preprocess => Stage::Preprocess,
        Command::Embed => Stage::Embed,
        Command::Fit => Stage::Fit,
        Command::Represent => Stage::Represent,
        Command::Label => Stage::Label,
        Command::Themes => Stage::Themes,
        Command::Report => Stage::Report,
        _ => return None,
    })
}

fn execute(cli: &Cli) -> Result<()> {
    if let Command::Config { print_defaults: true, .. } = cli.command {
        print!("{DEFAULTS_TOML}");
        return Ok(());
    }
    if let Command::Rate { first, second } = &cli.command {
        let (a, b) = (read_rating_sheet(first)?, read_rating_sheet(second)?);
        let r = rate_agreement(&a, &b)?;
        println!(
            "{} topics, {} matching verdicts ({:.1}% agreement), {} accepted by both",
            r.n_topics,
            r.matching,
            100.0 * r.agreement,
            r.both_accept
        );
        return Ok(());
    }
    let need_corpus = matches!(cli.command, Command::Ingest | Command::Run { .. } | Command::Saturate { .. } | Command::Config { .. });
    let cfg = cli.load_config()?.validated(need_corpus)?;
    match &cli.command {
        Command::Config { .. } => {
            let text = toml::to_string(&cfg).map_err(|e| Error::Pipeline(e.to_string()))?;
            print!("{text}");
            Ok(())
        }
        Command::Run { force } => {
            let s = Pipeline::new(cfg).run(*force)?;
            log::info!("run finished: {} stages executed, {} reused", s.executed.len(), s.reused.len());
            Ok(())
        }
        Command::Saturate { keywords, output, auto, max_rounds, min_share, candidates } => {
            let path = cfg.corpus.path.clone().expect("validated");
            let (corpus, _) = ingest_corpus(&path, cfg.corpus.max_malformed_fraction)?;
            let seeds = match keywords.as_ref().or(cfg.corpus.keywords.as_ref()) {
                Some(k) if k.exists() => read_keywords(k)?,
                _ => KeywordSet::seeds(),
            };
            let rules = cfg.cleaning_rules()?;
            let stop = rules.stopword_lists.values().flatten().cloned().collect();
            let params = ProposalParams { min_share: *min_share, max_candidates: *candidates };
            let stdin = std::io::stdin();
            let choose = |round: usize, cands: &[(String, usize)]| -> Vec<String> {
                let all: Vec<String> = cands.iter().map(|c| c.0.clone()).collect();
                if *auto || cands.is_empty() {
                    return all;
                }
                let mut out = std::io::stdout().lock();
                let _ = writeln!(out, "round {round} candidates:");
                for (i, (t, n)) in cands.iter().enumerate() {
                    let _ = writeln!(out, "  {:>2}. {t} ({n} documents)", i + 1);
                }
                let _ = write!(out, "accept (numbers or phrases, comma-separated; blank for none): ");
                let _ = out.flush();
                let mut line = String::new();
                if stdin.lock().read_line(&mut line).is_err() {
                    return Vec::new();
                }
                line.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| match s.parse::<usize>() {
                        Ok(i) if (1..=all.len()).contains(&i) => all[i - 1].clone(),
                        _ => s.to_string(),
                    })
                    .collect()
            };
            let outcome = saturate(&corpus, seeds, &stop, &params, *max_rounds, choose)?;
            let dest = output
                .clone()
                .or(cfg.corpus.keywords.clone())
                .unwrap_or_else(|| cfg.out_dir.join("keywords.txt"));
            if let Some(dir) = dest.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            write_keywords(&dest, &outcome.keywords)?;
            println!(
                "{} keywords after {} rounds ({}), {} documents matched; written to {}",
                outcome.keywords.len(),
                outcome.rounds,
                if outcome.saturated { "saturated" } else { "round limit reached" },
                outcome.matched,
                dest.display()
            );
            Ok(())
        }
        c => {
            let stage = stage_of(c).expect("stage command");
            Pipeline::new(cfg).stage(stage, false)?;
            Ok(())
        }
    }
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    crate::logging::init(cli.log_json);
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            log::error!("{e}");
            e.exit_code()
        }
    }
}
