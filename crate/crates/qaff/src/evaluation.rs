//! Answer ranking, judging, metrics, feature relevance, and the
//! cross-validation harness.
//!
//! Ranking scores every document of an instance against the question and
//! orders them by feature-form score (or by a regression prediction when a
//! fit is supplied). The answer is read off the top document: the first
//! entity mention matching the expected answer type, with the most frequent
//! non-stopword noun as a flagged fallback. Judging tallies answers and top
//! documents independently; both feed the precision/recall/F formulas and
//! the per-feature relevance buckets.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_rational::Rational64;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::{self, CorpusError, Dataset, Document, ParsedSentence, QAInstance};
use crate::features::{weight_to_f64, FeatureKey, FeatureSpace, FeatureVector, Weight};
use crate::pipeline::{
    analyze_document, analyze_question, effective_structural, score_pair, Ablation,
    DocumentFeatures, PipelineError, QuestionFeatures, Resources,
};
use crate::scoring::{fit_ols, serialize_weight, FfMode, RegressionFit};
use crate::semantic::{entity_mentions, hypernym_chain, EntityMention, DEFAULT_MAX_DEPTH};
use crate::syntactic::HeadwordResult;

/// Errors raised while ranking or evaluating.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("instance {id} has no documents to rank")]
    NoDocuments { id: String },
    #[error("relevance input counts zero total questions")]
    ZeroTotal,
}

impl From<crate::scoring::ScoringError> for EvalError {
    fn from(err: crate::scoring::ScoringError) -> EvalError {
        EvalError::Pipeline(PipelineError::Scoring(err))
    }
}

/// Lowercases and collapses whitespace, the form used for all string
/// comparison between answers, options, and document text.
pub fn normalize(text: &str) -> String {
    text.to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// The NE tag an answer to this question should carry, or `None` when the
/// question gives no usable signal.
///
/// Who/whom/whose, when, and where map directly. `how many` and `how much`
/// ask for numbers. Which/what defer to the headword: its hypernym chain is
/// walked outward and the first word present in the EAT map decides.
pub fn expected_answer_type(
    question: &ParsedSentence,
    headword: &HeadwordResult,
    resources: &Resources,
) -> Option<String> {
    let tokens = question.tokens();
    let first = tokens.first()?.surface.to_lowercase();
    match first.as_str() {
        "who" | "whom" | "whose" => Some("PERSON".to_string()),
        "when" => Some("DATE".to_string()),
        "where" => Some("LOCATION".to_string()),
        "how" => {
            let second = tokens.get(1)?.surface.to_lowercase();
            if second == "many" || second == "much" {
                Some("NUMBER".to_string())
            } else {
                None
            }
        }
        "which" | "what" => {
            let chain = hypernym_chain(
                &resources.hypernyms,
                &headword.key_surface(),
                DEFAULT_MAX_DEPTH,
            );
            for (word, _) in chain {
                if let Some(tag) = resources.eat_map.get(&word) {
                    return Some(tag.clone());
                }
            }
            None
        }
        _ => None,
    }
}

/// One document of an instance with everything ranking needs precomputed.
#[derive(Debug, Clone)]
pub struct AnalyzedDocument {
    pub features: DocumentFeatures,
    /// Entity mentions in reading order across sentences.
    pub mentions: Vec<EntityMention>,
    /// Whether the normalized document text contains the normalized gold
    /// answer; this judges the document and labels regression samples.
    pub contains_gold: bool,
    /// The non-stopword noun with the highest unigram weight, ties going to
    /// the earliest occurrence; the fallback answer.
    pub fallback_noun: Option<String>,
}

/// An instance with question and documents fully analyzed, ready to be
/// ranked under any mode or ablation without re-extraction.
#[derive(Debug, Clone)]
pub struct AnalyzedInstance {
    pub id: String,
    pub gold_answer: String,
    pub options: Vec<String>,
    pub question: QuestionFeatures,
    pub expected_type: Option<String>,
    pub documents: Vec<AnalyzedDocument>,
}

fn best_noun(
    document: &Document,
    fv: &FeatureVector,
    stopwords: &HashSet<String>,
) -> Option<String> {
    let mut best: Option<(Weight, String)> = None;
    for sentence in &document.sentences {
        for token in sentence.tokens() {
            let lower = token.surface.to_lowercase();
            if !token.is_noun() || stopwords.contains(&lower) {
                continue;
            }
            let key = FeatureKey::new(FeatureSpace::Un, lower);
            let weight = fv.get(&key).unwrap_or_default();
            let better = best.as_ref().is_none_or(|(w, _)| weight > *w);
            if better {
                best = Some((weight, token.surface.clone()));
            }
        }
    }
    best.map(|(_, surface)| surface)
}

/// Extracts features for one instance and precomputes the ranking inputs.
pub fn analyze_instance(
    instance: &QAInstance,
    resources: &Resources,
) -> Result<AnalyzedInstance, EvalError> {
    let question = analyze_question(&instance.question, resources)?;
    let expected_type = expected_answer_type(&instance.question, &question.headword, resources);
    let gold = normalize(&instance.gold_answer);
    let mut documents = Vec::with_capacity(instance.documents.len());
    for document in &instance.documents {
        let features = analyze_document(document, resources)?;
        let mut mentions = Vec::new();
        let mut text = String::new();
        for sentence in &document.sentences {
            mentions.extend(entity_mentions(sentence));
            if !text.is_empty() {
                text.push(' ');
            }
            text.push_str(&sentence.text());
        }
        let contains_gold = normalize(&text).contains(&gold);
        let fallback_noun = best_noun(document, &features.fv, &resources.stopwords);
        documents.push(AnalyzedDocument {
            features,
            mentions,
            contains_gold,
            fallback_noun,
        });
    }
    Ok(AnalyzedInstance {
        id: instance.id.clone(),
        gold_answer: instance.gold_answer.clone(),
        options: instance.options.clone(),
        question,
        expected_type,
        documents,
    })
}

/// One document's position in a ranking.
#[derive(Debug, Clone, Serialize)]
pub struct RankedDoc {
    pub doc_id: String,
    pub ff: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<f64>,
}

/// The outcome of ranking one instance's documents.
#[derive(Debug, Clone, Serialize)]
pub struct RankedAnswer {
    pub answer: Option<String>,
    /// True when no mention matched the expected type and the noun
    /// fallback produced the answer (or nothing).
    pub fallback_used: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_type: Option<String>,
    pub top_doc_id: String,
    pub ranking: Vec<RankedDoc>,
    #[serde(skip)]
    pub top_index: usize,
}

fn snap_to_options(raw: &str, options: &[String]) -> String {
    if options.is_empty() {
        return raw.to_string();
    }
    let raw_tokens: HashSet<String> = normalize(raw)
        .split_whitespace()
        .map(str::to_string)
        .collect();
    let mut best_overlap = 0;
    let mut best_option: Option<&String> = None;
    for option in options {
        let overlap = normalize(option)
            .split_whitespace()
            .filter(|token| raw_tokens.contains(*token))
            .count();
        if overlap > best_overlap {
            best_overlap = overlap;
            best_option = Some(option);
        }
    }
    best_option.cloned().unwrap_or_else(|| raw.to_string())
}

/// Ranks an instance's documents and extracts an answer from the winner.
///
/// Documents are ordered by feature-form score in the mode's preferred
/// direction, or by descending regression prediction when `fit` is given;
/// ties fall back to ascending document id. The answer is the top
/// document's first entity mention with the expected tag; without one the
/// flagged noun fallback applies. When the instance lists options the raw
/// answer snaps to the option sharing the most tokens.
pub fn rank_and_answer(
    analyzed: &AnalyzedInstance,
    mode: FfMode,
    ablate: &Ablation,
    fit: Option<&RegressionFit>,
) -> Result<RankedAnswer, EvalError> {
    if analyzed.documents.is_empty() {
        return Err(EvalError::NoDocuments {
            id: analyzed.id.clone(),
        });
    }
    let mut scored = Vec::with_capacity(analyzed.documents.len());
    for (position, document) in analyzed.documents.iter().enumerate() {
        let structural = effective_structural(&document.features.structural, ablate);
        let pair = score_pair(
            &analyzed.question,
            &document.features.fv,
            structural,
            mode,
            ablate,
        )?;
        let predicted = fit.map(|fit| {
            fit.predict(&[
                weight_to_f64(pair.ff.le),
                weight_to_f64(pair.ff.sy),
                weight_to_f64(pair.ff.se),
            ])
        });
        scored.push((position, pair.ff.ff, predicted));
    }
    scored.sort_by(|a, b| {
        let by_score = match (a.2, b.2) {
            (Some(pa), Some(pb)) => pb.total_cmp(&pa),
            _ => {
                if mode.smaller_is_better() {
                    a.1.total_cmp(&b.1)
                } else {
                    b.1.total_cmp(&a.1)
                }
            }
        };
        by_score.then_with(|| {
            let id_a = &analyzed.documents[a.0].features.doc_id;
            let id_b = &analyzed.documents[b.0].features.doc_id;
            id_a.cmp(id_b)
        })
    });
    let top_index = scored[0].0;
    let top = &analyzed.documents[top_index];
    let mut fallback_used = false;
    let mut answer = analyzed.expected_type.as_ref().and_then(|eat| {
        top.mentions
            .iter()
            .find(|mention| &mention.tag == eat)
            .map(|mention| mention.surface.clone())
    });
    if answer.is_none() {
        fallback_used = true;
        answer = top.fallback_noun.clone();
    }
    let answer = answer.map(|raw| snap_to_options(&raw, &analyzed.options));
    let ranking = scored
        .iter()
        .map(|&(position, ff, predicted)| RankedDoc {
            doc_id: analyzed.documents[position].features.doc_id.clone(),
            ff,
            predicted,
        })
        .collect();
    Ok(RankedAnswer {
        answer,
        fallback_used,
        expected_type: analyzed.expected_type.clone(),
        top_doc_id: top.features.doc_id.clone(),
        ranking,
        top_index,
    })
}

/// One instance's judged result.
#[derive(Debug, Clone, Serialize)]
pub struct InstanceOutcome {
    pub id: String,
    pub answer: Option<String>,
    pub correct: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_doc_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_doc_correct: Option<bool>,
    pub fallback_used: bool,
}

/// Ranks and judges one instance. An instance without documents is judged
/// incorrect with no document tallied rather than failing the run.
pub fn judge_instance(
    analyzed: &AnalyzedInstance,
    mode: FfMode,
    ablate: &Ablation,
    fit: Option<&RegressionFit>,
) -> Result<InstanceOutcome, EvalError> {
    match rank_and_answer(analyzed, mode, ablate, fit) {
        Ok(ranked) => {
            let correct = ranked
                .answer
                .as_deref()
                .is_some_and(|answer| normalize(answer) == normalize(&analyzed.gold_answer));
            let top = &analyzed.documents[ranked.top_index];
            Ok(InstanceOutcome {
                id: analyzed.id.clone(),
                answer: ranked.answer,
                correct,
                top_doc_id: Some(ranked.top_doc_id),
                top_doc_correct: Some(top.contains_gold),
                fallback_used: ranked.fallback_used,
            })
        }
        Err(EvalError::NoDocuments { .. }) => Ok(InstanceOutcome {
            id: analyzed.id.clone(),
            answer: None,
            correct: false,
            top_doc_id: None,
            top_doc_correct: None,
            fallback_used: false,
        }),
        Err(err) => Err(err),
    }
}

/// Judges a batch sequentially.
pub fn evaluate_serial(
    analyzed: &[&AnalyzedInstance],
    mode: FfMode,
    ablate: &Ablation,
    fit: Option<&RegressionFit>,
) -> Result<Vec<InstanceOutcome>, EvalError> {
    analyzed
        .iter()
        .map(|instance| judge_instance(instance, mode, ablate, fit))
        .collect()
}

/// Judges a batch on the rayon pool; output order matches input order.
#[cfg(feature = "parallel")]
pub fn evaluate_parallel(
    analyzed: &[&AnalyzedInstance],
    mode: FfMode,
    ablate: &Ablation,
    fit: Option<&RegressionFit>,
) -> Result<Vec<InstanceOutcome>, EvalError> {
    use rayon::prelude::*;
    analyzed
        .par_iter()
        .map(|instance| judge_instance(instance, mode, ablate, fit))
        .collect()
}

/// Judges a batch, parallel when the feature is enabled.
pub fn evaluate(
    analyzed: &[&AnalyzedInstance],
    mode: FfMode,
    ablate: &Ablation,
    fit: Option<&RegressionFit>,
) -> Result<Vec<InstanceOutcome>, EvalError> {
    #[cfg(feature = "parallel")]
    {
        evaluate_parallel(analyzed, mode, ablate, fit)
    }
    #[cfg(not(feature = "parallel"))]
    {
        evaluate_serial(analyzed, mode, ablate, fit)
    }
}

/// Correct/incorrect tallies for answers and for top documents.
///
/// `ca + ia` is the number of judged instances; `cd + id` is the number of
/// judged top documents (instances without documents judge no document).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EvalCounts {
    pub ca: u64,
    pub ia: u64,
    pub cd: u64,
    pub id: u64,
}

/// Accumulates outcome tallies.
pub fn tally(outcomes: &[InstanceOutcome]) -> EvalCounts {
    let mut counts = EvalCounts::default();
    for outcome in outcomes {
        if outcome.correct {
            counts.ca += 1;
        } else {
            counts.ia += 1;
        }
        match outcome.top_doc_correct {
            Some(true) => counts.cd += 1,
            Some(false) => counts.id += 1,
            None => {}
        }
    }
    counts
}

/// Precision, recall, and F-measure over mixed answer/document tallies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

fn ratio(numerator: u64, denominator: u64) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        numerator as f64 / denominator as f64
    }
}

fn harmonic(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// `P = CA/(CA+CD)`, `R = CA/(CA+ID)`, `F = 2PR/(P+R)`, each `0/0` read
/// as zero.
pub fn metrics(counts: EvalCounts) -> Metrics {
    let precision = ratio(counts.ca, counts.ca + counts.cd);
    let recall = ratio(counts.ca, counts.ca + counts.id);
    Metrics {
        precision,
        recall,
        f: harmonic(precision, recall),
    }
}

/// Conventional answer-level metrics, reported alongside on request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandardMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Accuracy over all instances, precision over answered instances, recall
/// over all instances.
pub fn standard_metrics(outcomes: &[InstanceOutcome]) -> StandardMetrics {
    let total = outcomes.len() as u64;
    let answered = outcomes.iter().filter(|o| o.answer.is_some()).count() as u64;
    let correct = outcomes.iter().filter(|o| o.correct).count() as u64;
    let precision = ratio(correct, answered);
    let recall = ratio(correct, total);
    StandardMetrics {
        accuracy: ratio(correct, total),
        precision,
        recall,
        f1: harmonic(precision, recall),
    }
}

/// Relevance of one feature pooled over datasets: `Fr = sum(QC_i) /
/// (2 * sum(Q_T))` as an exact rational, bucketed onto a 1..=5 scale by
/// `ceil(10 * Fr)` clamped into range.
pub fn feature_relevance(per_dataset: &[(u64, u64)]) -> Result<(Weight, u8), EvalError> {
    let correct: u64 = per_dataset.iter().map(|(c, _)| *c).sum();
    let total: u64 = per_dataset.iter().map(|(_, t)| *t).sum();
    if total == 0 {
        return Err(EvalError::ZeroTotal);
    }
    let fr = Rational64::new(correct as i64, 2 * total as i64);
    let bucket = (5 * correct).div_ceil(total).clamp(1, 5) as u8;
    Ok((fr, bucket))
}

/// One dataset's contribution to a relevance score.
#[derive(Debug, Clone, Serialize)]
pub struct DatasetShare {
    pub name: String,
    pub correct: u64,
    pub total: u64,
    /// Per-dataset accuracy, `correct / total`.
    pub share: f64,
}

/// A feature's relevance with its per-dataset breakdown.
#[derive(Debug, Clone, Serialize)]
pub struct RelevanceScore {
    #[serde(serialize_with = "serialize_weight")]
    pub fr: Weight,
    pub bucket: u8,
    pub per_dataset: Vec<DatasetShare>,
}

/// Computes a relevance score from named `(correct, total)` rows.
pub fn relevance_score(rows: &[(String, u64, u64)]) -> Result<RelevanceScore, EvalError> {
    let tuples: Vec<(u64, u64)> = rows.iter().map(|(_, c, t)| (*c, *t)).collect();
    let (fr, bucket) = feature_relevance(&tuples)?;
    let per_dataset = rows
        .iter()
        .map(|(name, correct, total)| DatasetShare {
            name: name.clone(),
            correct: *correct,
            total: *total,
            share: ratio(*correct, *total),
        })
        .collect();
    Ok(RelevanceScore {
        fr,
        bucket,
        per_dataset,
    })
}

/// Settings for an evaluation or cross-validation run.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub mode: FfMode,
    pub seed: u64,
    pub k: usize,
    pub regression_weighted: bool,
    pub standard_metrics: bool,
    pub ablate: Ablation,
    /// Where each resource came from, echoed into reports; `builtin`
    /// unless overridden with a path.
    pub resource_labels: BTreeMap<String, String>,
}

/// The label map for a run using only embedded resources.
pub fn builtin_resource_labels() -> BTreeMap<String, String> {
    [
        "stopwords",
        "headword_rules",
        "lexicon",
        "dp_config",
        "eat_map",
    ]
    .into_iter()
    .map(|name| (name.to_string(), "builtin".to_string()))
    .collect()
}

impl Default for RunSettings {
    fn default() -> RunSettings {
        RunSettings {
            mode: FfMode::default(),
            seed: 0,
            k: 5,
            regression_weighted: false,
            standard_metrics: false,
            ablate: None,
            resource_labels: builtin_resource_labels(),
        }
    }
}

/// The settings a report was produced under.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub dataset: String,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub regression_weighted: bool,
    pub standard_metrics: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ablate: Option<Vec<String>>,
    pub resources: BTreeMap<String, String>,
}

/// Tallies and metrics for one slice of instances.
#[derive(Debug, Clone, Serialize)]
pub struct SplitStats {
    pub ca: u64,
    pub ia: u64,
    pub cd: u64,
    pub id: u64,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standard: Option<StandardMetrics>,
}

fn split_stats(outcomes: &[InstanceOutcome], with_standard: bool) -> SplitStats {
    let counts = tally(outcomes);
    let m = metrics(counts);
    SplitStats {
        ca: counts.ca,
        ia: counts.ia,
        cd: counts.cd,
        id: counts.id,
        precision: m.precision,
        recall: m.recall,
        f: m.f,
        standard: with_standard.then(|| standard_metrics(outcomes)),
    }
}

/// One fold's results.
#[derive(Debug, Clone, Serialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub stats: SplitStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regression: Option<RegressionFit>,
}

/// A single feature's relevance aggregated over folds.
#[derive(Debug, Clone, Serialize)]
pub struct RelevanceEntry {
    pub fr: f64,
    pub bucket: u8,
    pub per_fold: Vec<FoldCorrect>,
}

/// Correct count for one feature in one fold.
#[derive(Debug, Clone, Serialize)]
pub struct FoldCorrect {
    pub fold: usize,
    pub correct: u64,
    pub total: u64,
}

/// A full evaluation report. Serialization order is fixed by declaration
/// order and by the sorted relevance map, so identical runs yield
/// byte-identical JSON.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config_echo: ConfigEcho,
    pub pooled: SplitStats,
    pub folds: Vec<FoldReport>,
    pub per_feature_relevance: BTreeMap<String, RelevanceEntry>,
}

fn fit_from_train(
    train: &[&AnalyzedInstance],
    mode: FfMode,
    ablate: &Ablation,
) -> Result<Option<RegressionFit>, EvalError> {
    let mut samples = Vec::new();
    for instance in train {
        for document in &instance.documents {
            let structural = effective_structural(&document.features.structural, ablate);
            let pair = score_pair(
                &instance.question,
                &document.features.fv,
                structural,
                mode,
                ablate,
            )?;
            let predictors = vec![
                weight_to_f64(pair.ff.le),
                weight_to_f64(pair.ff.sy),
                weight_to_f64(pair.ff.se),
            ];
            let response = if document.contains_gold { 1.0 } else { 0.0 };
            samples.push((predictors, response));
        }
    }
    // A degenerate training fold falls back to plain feature-form ranking.
    Ok(fit_ols(&samples).ok())
}

fn single_space_correct(
    test: &[&AnalyzedInstance],
    mode: FfMode,
    space: FeatureSpace,
) -> Result<u64, EvalError> {
    let single: Ablation = Some(BTreeSet::from([space]));
    let outcomes = evaluate(test, mode, &single, None)?;
    Ok(outcomes.iter().filter(|o| o.correct).count() as u64)
}

fn relevance_map(
    per_space_folds: BTreeMap<FeatureSpace, Vec<FoldCorrect>>,
) -> Result<BTreeMap<String, RelevanceEntry>, EvalError> {
    let mut map = BTreeMap::new();
    for (space, per_fold) in per_space_folds {
        let tuples: Vec<(u64, u64)> = per_fold.iter().map(|f| (f.correct, f.total)).collect();
        let (fr, bucket) = feature_relevance(&tuples)?;
        map.insert(
            space.as_str().to_string(),
            RelevanceEntry {
                fr: weight_to_f64(fr),
                bucket,
                per_fold,
            },
        );
    }
    Ok(map)
}

fn echo(dataset: &Dataset, settings: &RunSettings, cv: bool) -> ConfigEcho {
    ConfigEcho {
        dataset: dataset.name.clone(),
        mode: settings.mode.to_string(),
        seed: cv.then_some(settings.seed),
        k: cv.then_some(settings.k),
        regression_weighted: settings.regression_weighted,
        standard_metrics: settings.standard_metrics,
        ablate: settings
            .ablate
            .as_ref()
            .map(|set| set.iter().map(|s| s.as_str().to_string()).collect()),
        resources: settings.resource_labels.clone(),
    }
}

/// Evaluates a whole dataset once, no folding. Per-feature relevance is
/// computed over the dataset as a single block.
pub fn evaluate_dataset(
    dataset: &Dataset,
    resources: &Resources,
    settings: &RunSettings,
) -> Result<Report, EvalError> {
    let analyzed: Vec<AnalyzedInstance> = dataset
        .instances
        .iter()
        .map(|instance| analyze_instance(instance, resources))
        .collect::<Result<_, _>>()?;
    let refs: Vec<&AnalyzedInstance> = analyzed.iter().collect();
    let outcomes = evaluate(&refs, settings.mode, &settings.ablate, None)?;
    let mut per_space_folds = BTreeMap::new();
    for &space in FeatureSpace::ALL.iter() {
        let correct = single_space_correct(&refs, settings.mode, space)?;
        per_space_folds.insert(
            space,
            vec![FoldCorrect {
                fold: 1,
                correct,
                total: refs.len() as u64,
            }],
        );
    }
    Ok(Report {
        config_echo: echo(dataset, settings, false),
        pooled: split_stats(&outcomes, settings.standard_metrics),
        folds: Vec::new(),
        per_feature_relevance: relevance_map(per_space_folds)?,
    })
}

/// Runs seeded k-fold cross-validation and assembles the report.
///
/// Each fold optionally fits a least-squares ranker on its training
/// documents (predictors are the three category averages, the response is
/// gold containment) and evaluates its test split with it. Per-feature
/// relevance judges every test instance once per feature space in
/// isolation.
pub fn run_cv(
    dataset: &Dataset,
    resources: &Resources,
    settings: &RunSettings,
) -> Result<Report, EvalError> {
    let analyzed: Vec<AnalyzedInstance> = dataset
        .instances
        .iter()
        .map(|instance| analyze_instance(instance, resources))
        .collect::<Result<_, _>>()?;
    let folds = corpus::kfold_indices(analyzed.len(), settings.k, settings.seed)?;
    let mut fold_reports = Vec::with_capacity(folds.len());
    let mut pooled = Vec::with_capacity(analyzed.len());
    let mut per_space_folds: BTreeMap<FeatureSpace, Vec<FoldCorrect>> = BTreeMap::new();
    for (fold_no, (train_idx, test_idx)) in folds.iter().enumerate() {
        let fold = fold_no + 1;
        let train: Vec<&AnalyzedInstance> = train_idx.iter().map(|&i| &analyzed[i]).collect();
        let test: Vec<&AnalyzedInstance> = test_idx.iter().map(|&i| &analyzed[i]).collect();
        let fit = if settings.regression_weighted {
            fit_from_train(&train, settings.mode, &settings.ablate)?
        } else {
            None
        };
        let outcomes = evaluate(&test, settings.mode, &settings.ablate, fit.as_ref())?;
        for &space in FeatureSpace::ALL.iter() {
            let correct = single_space_correct(&test, settings.mode, space)?;
            per_space_folds.entry(space).or_default().push(FoldCorrect {
                fold,
                correct,
                total: test.len() as u64,
            });
        }
        fold_reports.push(FoldReport {
            fold,
            train_size: train.len(),
            test_size: test.len(),
            stats: split_stats(&outcomes, settings.standard_metrics),
            regression: fit,
        });
        pooled.extend(outcomes);
    }
    Ok(Report {
        config_echo: echo(dataset, settings, true),
        pooled: split_stats(&pooled, settings.standard_metrics),
        folds: fold_reports,
        per_feature_relevance: relevance_map(per_space_folds)?,
    })
}
