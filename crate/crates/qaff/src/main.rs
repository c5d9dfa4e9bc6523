//! Command-line interface over the feature extraction, scoring, ranking,
//! and evaluation pipeline.
//!
//! Data goes to stdout (or `--out`); diagnostics go to stderr. Exit code 0
//! means success, 2 a usage error, and 1 a data error. Runs are pure
//! functions of their inputs: the only randomness is the seeded fold
//! shuffle, so identical invocations produce identical bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::json;

use qaff::corpus::{self, Dataset};
use qaff::evaluation::{
    self, analyze_instance, builtin_resource_labels, rank_and_answer, relevance_score,
    EvalError, RunSettings,
};
use qaff::features::FeatureSpace;
use qaff::pipeline::{self, score_instance, Ablation, Resources};
use qaff::scoring::FfMode;
use qaff::semantic::HypernymGraph;
use qaff::structural::DpConfig;

#[derive(Parser)]
#[command(name = "qaff", version, about = "Feature-form scoring and answer extraction over dependency-parsed QA datasets")]
struct Cli {
    /// Stopword list, one word per line.
    #[arg(long, global = true, value_name = "FILE")]
    stopwords_path: Option<PathBuf>,
    /// Headword selection rules, `priority<TAB>pattern<TAB>class<TAB>note`.
    #[arg(long, global = true, value_name = "FILE")]
    headword_rules_path: Option<PathBuf>,
    /// Hypernym lexicon, `word<TAB>hypernym` per line.
    #[arg(long, global = true, value_name = "FILE")]
    lexicon_path: Option<PathBuf>,
    /// Design-principle configuration.
    #[arg(long, global = true, value_name = "FILE")]
    dp_config_path: Option<PathBuf>,
    /// Expected-answer-type map, `word<TAB>TAG` per line.
    #[arg(long, global = true, value_name = "FILE")]
    eat_map_path: Option<PathBuf>,
    /// Write data output to this file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Report progress on stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

fn parse_mode(s: &str) -> Result<FfMode, String> {
    FfMode::from_str(s)
}

fn parse_ablation(s: &str) -> Result<BTreeSet<FeatureSpace>, String> {
    let mut set = BTreeSet::new();
    for code in s.split(',') {
        let code = code.trim();
        if code.is_empty() {
            continue;
        }
        let space = FeatureSpace::parse(code)
            .ok_or_else(|| format!("unknown feature space `{code}`"))?;
        set.insert(space);
    }
    if set.is_empty() {
        return Err("ablation list selects no feature spaces".to_string());
    }
    Ok(set)
}

#[derive(Subcommand)]
enum Command {
    /// Extract feature vectors for every instance of a dataset.
    Extract {
        /// Dataset in JSON-lines form.
        dataset: PathBuf,
    },
    /// Score each question against its pooled documents.
    Score {
        /// Dataset in JSON-lines form.
        dataset: PathBuf,
        /// Feature-form combination: linear or log_product.
        #[arg(long, default_value = "log_product", value_parser = parse_mode)]
        mode: FfMode,
        /// Comma-separated feature space codes to keep, e.g. `un,bi,st_dp`.
        #[arg(long, value_parser = parse_ablation)]
        ablate: Option<BTreeSet<FeatureSpace>>,
    },
    /// Rank each instance's documents and extract an answer.
    Rank {
        /// Dataset in JSON-lines form.
        dataset: PathBuf,
        /// Feature-form combination: linear or log_product.
        #[arg(long, default_value = "log_product", value_parser = parse_mode)]
        mode: FfMode,
        /// Comma-separated feature space codes to keep, e.g. `un,bi,st_dp`.
        #[arg(long, value_parser = parse_ablation)]
        ablate: Option<BTreeSet<FeatureSpace>>,
    },
    /// Evaluate a dataset in a single pass.
    Eval {
        /// Dataset in JSON-lines form.
        dataset: PathBuf,
        /// Feature-form combination: linear or log_product.
        #[arg(long, default_value = "log_product", value_parser = parse_mode)]
        mode: FfMode,
        /// Comma-separated feature space codes to keep, e.g. `un,bi,st_dp`.
        #[arg(long, value_parser = parse_ablation)]
        ablate: Option<BTreeSet<FeatureSpace>>,
        /// Also report conventional answer-level metrics.
        #[arg(long)]
        standard_metrics: bool,
    },
    /// Run seeded k-fold cross-validation.
    Cv {
        /// Dataset in JSON-lines form.
        dataset: PathBuf,
        /// Feature-form combination: linear or log_product.
        #[arg(long, default_value = "log_product", value_parser = parse_mode)]
        mode: FfMode,
        /// Comma-separated feature space codes to keep, e.g. `un,bi,st_dp`.
        #[arg(long, value_parser = parse_ablation)]
        ablate: Option<BTreeSet<FeatureSpace>>,
        /// Number of folds.
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Seed for the fold shuffle.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rank test documents with a least-squares fit from each fold's
        /// training half instead of the raw feature-form score.
        #[arg(long)]
        regression_weighted: bool,
        /// Also report conventional answer-level metrics.
        #[arg(long)]
        standard_metrics: bool,
    },
    /// Compute a relevance score from per-dataset counts.
    Relevance {
        /// Rows of `name<TAB>correct<TAB>total`; `#` starts a comment.
        counts: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn load_resources(cli: &Cli) -> anyhow::Result<(Resources, BTreeMap<String, String>)> {
    let mut resources = Resources::builtin();
    let mut labels = builtin_resource_labels();
    let mut note = |key: &str, path: &PathBuf| {
        labels.insert(key.to_string(), path.display().to_string());
    };
    if let Some(path) = &cli.stopwords_path {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading stopwords from {}", path.display()))?;
        resources.stopwords = qaff::resources::parse_stopwords(&text);
        note("stopwords", path);
    }
    if let Some(path) = &cli.headword_rules_path {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading headword rules from {}", path.display()))?;
        resources.headword_rules = qaff::syntactic::parse_headword_rules(&text)?;
        note("headword_rules", path);
    }
    if let Some(path) = &cli.lexicon_path {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading hypernym lexicon from {}", path.display()))?;
        resources.hypernyms = HypernymGraph::from_tsv(&text)?;
        note("lexicon", path);
    }
    if let Some(path) = &cli.dp_config_path {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading dp config from {}", path.display()))?;
        resources.dp_config = DpConfig::parse(&text)?;
        note("dp_config", path);
    }
    if let Some(path) = &cli.eat_map_path {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading eat map from {}", path.display()))?;
        resources.eat_map = pipeline::parse_eat_map(&text)?;
        note("eat_map", path);
    }
    Ok((resources, labels))
}

fn emit(out: &Option<PathBuf>, data: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, data)
            .with_context(|| format!("writing output to {}", path.display())),
        None => {
            print!("{data}");
            Ok(())
        }
    }
}

fn load(path: &PathBuf, verbose: bool) -> anyhow::Result<Dataset> {
    let dataset = corpus::load_dataset(path)
        .with_context(|| format!("loading dataset {}", path.display()))?;
    if verbose {
        eprintln!(
            "loaded {} instances from {}",
            dataset.instances.len(),
            path.display()
        );
    }
    Ok(dataset)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (resources, labels) = load_resources(&cli)?;
    match &cli.command {
        Command::Extract { dataset } => {
            let dataset = load(dataset, cli.verbose)?;
            let mut lines = String::new();
            for instance in &dataset.instances {
                let analyzed = analyze_instance(instance, &resources)
                    .with_context(|| format!("analyzing instance {}", instance.id))?;
                let documents: Vec<_> = analyzed
                    .documents
                    .iter()
                    .map(|doc| {
                        json!({
                            "doc_id": doc.features.doc_id,
                            "features": doc.features.fv,
                        })
                    })
                    .collect();
                let line = json!({
                    "id": analyzed.id,
                    "q_len": analyzed.question.q_len,
                    "headword": analyzed.question.headword.key_surface(),
                    "question": analyzed.question.fv,
                    "documents": documents,
                });
                writeln!(lines, "{line}")?;
                if cli.verbose {
                    eprintln!("extracted {}", analyzed.id);
                }
            }
            emit(&cli.out, &lines)
        }
        Command::Score {
            dataset,
            mode,
            ablate,
        } => {
            let dataset = load(dataset, cli.verbose)?;
            let ablate: Ablation = ablate.clone();
            let mut lines = String::new();
            for instance in &dataset.instances {
                let analyzed = analyze_instance(instance, &resources)
                    .with_context(|| format!("analyzing instance {}", instance.id))?;
                let docs: Vec<_> = analyzed
                    .documents
                    .iter()
                    .map(|d| d.features.clone())
                    .collect();
                let pair = score_instance(&analyzed.question, &docs, *mode, &ablate)
                    .with_context(|| format!("scoring instance {}", instance.id))?;
                let overlaps: Vec<_> = pair
                    .overlaps
                    .iter()
                    .map(|o| {
                        json!({
                            "space": o.space.as_str(),
                            "numerator": o.numerator,
                            "denominator": o.denominator,
                        })
                    })
                    .collect();
                let line = json!({
                    "id": analyzed.id,
                    "overlaps": overlaps,
                    "score": pair.ff,
                });
                writeln!(lines, "{line}")?;
            }
            emit(&cli.out, &lines)
        }
        Command::Rank {
            dataset,
            mode,
            ablate,
        } => {
            let dataset = load(dataset, cli.verbose)?;
            let ablate: Ablation = ablate.clone();
            let mut lines = String::new();
            for instance in &dataset.instances {
                let analyzed = analyze_instance(instance, &resources)
                    .with_context(|| format!("analyzing instance {}", instance.id))?;
                let line = match rank_and_answer(&analyzed, *mode, &ablate, None) {
                    Ok(ranked) => {
                        let mut value = serde_json::to_value(&ranked)?;
                        value
                            .as_object_mut()
                            .expect("ranked answer serializes to an object")
                            .insert("id".to_string(), json!(analyzed.id));
                        value
                    }
                    Err(EvalError::NoDocuments { id }) => {
                        json!({"id": id, "answer": null, "error": "no documents to rank"})
                    }
                    Err(err) => return Err(err).context("ranking failed"),
                };
                writeln!(lines, "{line}")?;
            }
            emit(&cli.out, &lines)
        }
        Command::Eval {
            dataset,
            mode,
            ablate,
            standard_metrics,
        } => {
            let dataset = load(dataset, cli.verbose)?;
            let settings = RunSettings {
                mode: *mode,
                standard_metrics: *standard_metrics,
                ablate: ablate.clone(),
                resource_labels: labels,
                ..RunSettings::default()
            };
            let report = evaluation::evaluate_dataset(&dataset, &resources, &settings)?;
            let mut data = serde_json::to_string_pretty(&report)?;
            data.push('\n');
            emit(&cli.out, &data)
        }
        Command::Cv {
            dataset,
            mode,
            ablate,
            k,
            seed,
            regression_weighted,
            standard_metrics,
        } => {
            let dataset = load(dataset, cli.verbose)?;
            let settings = RunSettings {
                mode: *mode,
                seed: *seed,
                k: *k,
                regression_weighted: *regression_weighted,
                standard_metrics: *standard_metrics,
                ablate: ablate.clone(),
                resource_labels: labels,
            };
            if cli.verbose {
                eprintln!("running {}-fold cross-validation with seed {}", k, seed);
            }
            let report = evaluation::run_cv(&dataset, &resources, &settings)?;
            let mut data = serde_json::to_string_pretty(&report)?;
            data.push('\n');
            emit(&cli.out, &data)
        }
        Command::Relevance { counts } => {
            let text = std::fs::read_to_string(counts)
                .with_context(|| format!("reading counts from {}", counts.display()))?;
            let mut rows = Vec::new();
            for (line_no, line) in text.lines().enumerate() {
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    continue;
                }
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() != 3 {
                    anyhow::bail!(
                        "counts line {}: expected `name<TAB>correct<TAB>total`",
                        line_no + 1
                    );
                }
                let correct: u64 = fields[1]
                    .trim()
                    .parse()
                    .with_context(|| format!("counts line {}: bad correct count", line_no + 1))?;
                let total: u64 = fields[2]
                    .trim()
                    .parse()
                    .with_context(|| format!("counts line {}: bad total count", line_no + 1))?;
                rows.push((fields[0].trim().to_string(), correct, total));
            }
            let score = relevance_score(&rows)?;
            let mut data = serde_json::to_string_pretty(&score)?;
            data.push('\n');
            emit(&cli.out, &data)
        }
    }
}
