//! Glue between the extractors and the scorers: question/document feature
//! bundles and the per-pair scoring recipe.
//!
//! A question analysis produces its full feature vector, question length,
//! headword, and structural weight once; each document is analyzed into a
//! merged vector (sentence vectors summed) plus accumulated structural
//! weights. Scoring a pair walks the non-structural categories, computes
//! per-space overlaps, averages them per category, and combines the result
//! with a structural weight into a feature-form score.

use std::collections::{BTreeSet, HashSet};

use num_traits::Zero;
use thiserror::Error;

use crate::corpus::{Document, ParsedSentence};
use crate::features::{FeatureCategory, FeatureSpace, FeatureVector, Weight};
use crate::lexical::{self, LexicalError};
use crate::scoring::{
    self, FeatureFormScore, FfMode, OverlapScore, ScoringError,
};
use crate::semantic::HypernymGraph;
use crate::structural::{DpConfig, StructuralWeight};
use crate::syntactic::{self, HeadwordResult, HeadwordRule, SyntacticError};

/// Everything the pipeline needs besides the data itself.
#[derive(Debug, Clone)]
pub struct Resources {
    pub stopwords: HashSet<String>,
    pub headword_rules: Vec<HeadwordRule>,
    pub hypernyms: HypernymGraph,
    pub dp_config: DpConfig,
    /// Expected-answer-type map: lowercase hypernym -> NE tag.
    pub eat_map: std::collections::HashMap<String, String>,
}

impl Resources {
    /// The embedded defaults.
    pub fn builtin() -> Resources {
        Resources {
            stopwords: crate::resources::default_stopwords(),
            headword_rules: syntactic::default_headword_rules(),
            hypernyms: HypernymGraph::builtin(),
            dp_config: DpConfig::default(),
            eat_map: parse_eat_map(crate::resources::EAT_MAP)
                .expect("embedded EAT map is well-formed"),
        }
    }
}

/// Errors raised while building feature bundles.
#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Lexical(#[from] LexicalError),
    #[error(transparent)]
    Syntactic(#[from] SyntacticError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error("eat map line {line}: {reason}")]
    BadEatMap { line: usize, reason: String },
}

/// Parses an expected-answer-type map: `word<TAB>TAG` lines, `#` comments.
pub fn parse_eat_map(
    text: &str,
) -> Result<std::collections::HashMap<String, String>, PipelineError> {
    let mut map = std::collections::HashMap::new();
    for (line_no, line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((word, tag)) = line.split_once('\t') else {
            return Err(PipelineError::BadEatMap {
                line: line_no,
                reason: "expected `word<TAB>TAG`".to_string(),
            });
        };
        map.insert(word.trim().to_lowercase(), tag.trim().to_uppercase());
    }
    Ok(map)
}

/// A fully analyzed question.
#[derive(Debug, Clone)]
pub struct QuestionFeatures {
    pub fv: FeatureVector,
    pub q_len: i64,
    pub headword: HeadwordResult,
    pub structural: StructuralWeight,
}

/// A fully analyzed document: sentence vectors merged, weights summed.
#[derive(Debug, Clone)]
pub struct DocumentFeatures {
    pub doc_id: String,
    pub fv: FeatureVector,
    pub structural: StructuralWeight,
}

/// Runs every extractor over a question.
pub fn analyze_question(
    question: &ParsedSentence,
    resources: &Resources,
) -> Result<QuestionFeatures, PipelineError> {
    let mut fv = lexical::extract_lexical(question)?;
    fv.merge(&syntactic::extract_syntactic(question, &resources.headword_rules)?);
    let headword = syntactic::extract_headword(question, &resources.headword_rules)?;
    fv.merge(&crate::semantic::extract_semantic(
        question,
        &headword,
        &resources.hypernyms,
    ));
    let (structural_fv, structural) =
        crate::structural::extract_structural(question, &resources.stopwords, &resources.dp_config);
    fv.merge(&structural_fv);
    Ok(QuestionFeatures {
        fv,
        q_len: lexical::question_length(question),
        headword,
        structural,
    })
}

/// Runs every extractor over a document, merging per-sentence vectors and
/// accumulating structural weights.
pub fn analyze_document(
    document: &Document,
    resources: &Resources,
) -> Result<DocumentFeatures, PipelineError> {
    let mut fv = FeatureVector::new();
    let mut structural = StructuralWeight::default();
    for sentence in &document.sentences {
        if sentence.is_empty() {
            continue;
        }
        fv.merge(&lexical::document_lexical(sentence.tokens()));
        fv.merge(&syntactic::document_syntactic(sentence, &resources.headword_rules)?);
        let headword = syntactic::extract_headword(sentence, &resources.headword_rules)?;
        fv.merge(&crate::semantic::extract_semantic(
            sentence,
            &headword,
            &resources.hypernyms,
        ));
        let (structural_fv, weight) = crate::structural::extract_structural(
            sentence,
            &resources.stopwords,
            &resources.dp_config,
        );
        fv.merge(&structural_fv);
        structural.add(weight);
    }
    Ok(DocumentFeatures {
        doc_id: document.doc_id.clone(),
        fv,
        structural,
    })
}

/// Optional restriction of scoring to a subset of feature spaces.
pub type Ablation = Option<BTreeSet<FeatureSpace>>;

fn selected(ablate: &Ablation, space: FeatureSpace) -> bool {
    ablate.as_ref().is_none_or(|set| set.contains(&space))
}

/// The structural weight entering ff_score: the full total by default, or
/// the sum of the selected ST components under ablation.
pub fn effective_structural(weight: &StructuralWeight, ablate: &Ablation) -> u64 {
    match ablate {
        None => weight.total(),
        Some(set) => {
            let mut total = 0;
            if set.contains(&FeatureSpace::StDp) {
                total += weight.weight_dp;
            }
            if set.contains(&FeatureSpace::StDr) {
                total += weight.weight_dr;
            }
            if set.contains(&FeatureSpace::StNer) {
                total += weight.weight_ner;
            }
            total
        }
    }
}

/// Per-space overlaps plus the combined feature-form score for one
/// question/document vector pair.
#[derive(Debug, Clone)]
pub struct PairScore {
    pub overlaps: Vec<OverlapScore>,
    pub ff: FeatureFormScore,
}

/// Scores a question bundle against one document-side vector.
///
/// Lexical and syntactic spaces are always scored. Semantic spaces are
/// scored only when the question has entries there (a question without
/// entity mentions contributes no NE score rather than a zero denominator).
/// A category left with no scored spaces averages to zero.
pub fn score_pair(
    question: &QuestionFeatures,
    d_fv: &FeatureVector,
    structural: u64,
    mode: FfMode,
    ablate: &Ablation,
) -> Result<PairScore, ScoringError> {
    let mut overlaps = Vec::new();
    let mut averages = [Weight::zero(); 3];
    for (slot, category) in [
        FeatureCategory::Lexical,
        FeatureCategory::Syntactic,
        FeatureCategory::Semantic,
    ]
    .into_iter()
    .enumerate()
    {
        let mut scores = Vec::new();
        for &space in category.spaces() {
            if !selected(ablate, space) {
                continue;
            }
            if category == FeatureCategory::Semantic && question.fv.space_len(space) == 0 {
                continue;
            }
            scores.push(scoring::overlap_score(
                space,
                &question.fv,
                d_fv,
                question.q_len,
            )?);
        }
        if !scores.is_empty() {
            averages[slot] = scoring::category_average(&scores)?;
        }
        overlaps.extend(scores);
    }
    let ff = FeatureFormScore::compute(
        averages[0],
        averages[1],
        averages[2],
        structural,
        mode,
    )?;
    Ok(PairScore { overlaps, ff })
}

/// Scores a question against the pool of its documents (the QFF view).
///
/// Document vectors are merged into one; the structural weight is the
/// question's own. A question with no documents is scored against itself,
/// which measures feature inventory rather than alignment.
pub fn score_instance(
    question: &QuestionFeatures,
    documents: &[DocumentFeatures],
    mode: FfMode,
    ablate: &Ablation,
) -> Result<PairScore, ScoringError> {
    let structural = effective_structural(&question.structural, ablate);
    if documents.is_empty() {
        return score_pair(question, &question.fv, structural, mode, ablate);
    }
    let mut pooled = FeatureVector::new();
    for document in documents {
        pooled.merge(&document.fv);
    }
    score_pair(question, &pooled, structural, mode, ablate)
}
