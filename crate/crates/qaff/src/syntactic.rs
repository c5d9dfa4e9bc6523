//! Syntactic feature extraction: tagged units, POS bag, headword, headword
//! tag, and focus words.
//!
//! Headword selection is driven by a small data-driven rule table instead of
//! hard-coded logic, so domain-specific tables can be swapped in through the
//! CLI. Rules are applied in ascending priority order; selector rules pick
//! an initial candidate and unwrap rules refine it by descending through
//! transparent nouns such as "name of X".

use std::fmt;

use num_traits::One;
use thiserror::Error;

use crate::corpus::{ParsedSentence, Token};
use crate::features::{FeatureKey, FeatureSpace, FeatureVector, Weight};

/// POS filter attached to each rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosClass {
    /// Token tag must start with `NN`.
    NounLike,
    /// Any token qualifies.
    Any,
}

impl PosClass {
    fn matches(self, token: &Token) -> bool {
        match self {
            PosClass::NounLike => token.is_noun(),
            PosClass::Any => true,
        }
    }
}

/// The action part of a headword rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RulePattern {
    /// First dependent of the root attached via one of the listed relations.
    Child(Vec<String>),
    /// The root token itself.
    Root,
    /// First matching token in sentence order.
    First,
    /// Starting from the current candidate, while its surface is one of
    /// `words`, descend to its first dependent attached via one of `rels`.
    Unwrap { words: Vec<String>, rels: Vec<String> },
}

/// One row of the headword rule table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeadwordRule {
    pub priority: u32,
    pub pattern: RulePattern,
    pub pos_class: PosClass,
    pub description: String,
}

/// The chosen headword plus the alternate nouns that feed the FW space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeadwordResult {
    /// 1-based index of the headword token.
    pub index: usize,
    /// Surface form as written.
    pub surface: String,
    /// PTB tag of the headword.
    pub pos: String,
    /// Other noun tokens in sentence order, as `(index, surface)`.
    pub alternates: Vec<(usize, String)>,
}

impl HeadwordResult {
    /// Lowercased surface, the form used in feature keys.
    pub fn key_surface(&self) -> String {
        self.surface.to_lowercase()
    }
}

/// Errors raised by syntactic extraction and rule parsing.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SyntacticError {
    #[error("cannot extract features from an empty sentence")]
    EmptyInput,
    #[error("input does not end with `?` and is not treated as a question")]
    NotAQuestion,
    #[error("rule table line {line}: {reason}")]
    BadRuleFile { line: usize, reason: String },
}

/// Parses a headword rule table.
///
/// Rows are `priority<TAB>pattern<TAB>pos_class<TAB>description`; `#`
/// comments and blank lines are skipped. Priorities must be unique.
pub fn parse_headword_rules(text: &str) -> Result<Vec<HeadwordRule>, SyntacticError> {
    let mut rules: Vec<HeadwordRule> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let columns: Vec<&str> = line.split('\t').collect();
        if columns.len() != 4 {
            return Err(SyntacticError::BadRuleFile {
                line: line_no,
                reason: format!("expected 4 tab-separated columns, found {}", columns.len()),
            });
        }
        let priority: u32 = columns[0].trim().parse().map_err(|_| SyntacticError::BadRuleFile {
            line: line_no,
            reason: format!("bad priority `{}`", columns[0]),
        })?;
        if rules.iter().any(|r| r.priority == priority) {
            return Err(SyntacticError::BadRuleFile {
                line: line_no,
                reason: format!("duplicate priority {priority}"),
            });
        }
        let pattern = parse_pattern(columns[1].trim()).ok_or_else(|| SyntacticError::BadRuleFile {
            line: line_no,
            reason: format!("bad pattern `{}`", columns[1]),
        })?;
        let pos_class = match columns[2].trim().to_uppercase().as_str() {
            "NOUN_LIKE" => PosClass::NounLike,
            "ANY" => PosClass::Any,
            other => {
                return Err(SyntacticError::BadRuleFile {
                    line: line_no,
                    reason: format!("bad pos class `{other}`"),
                })
            }
        };
        rules.push(HeadwordRule {
            priority,
            pattern,
            pos_class,
            description: columns[3].trim().to_string(),
        });
    }
    Ok(rules)
}

fn parse_pattern(text: &str) -> Option<RulePattern> {
    if text == "root" {
        return Some(RulePattern::Root);
    }
    if text == "first" {
        return Some(RulePattern::First);
    }
    if let Some(rels) = text.strip_prefix("child:") {
        let rels: Vec<String> = rels.split('|').map(str::to_string).collect();
        if rels.iter().any(String::is_empty) {
            return None;
        }
        return Some(RulePattern::Child(rels));
    }
    if let Some(spec) = text.strip_prefix("unwrap:") {
        let (words, rels) = spec.split_once('@')?;
        let words: Vec<String> = words.split('|').map(str::to_lowercase).collect();
        let rels: Vec<String> = rels.split('|').map(str::to_string).collect();
        if words.iter().any(String::is_empty) || rels.iter().any(String::is_empty) {
            return None;
        }
        return Some(RulePattern::Unwrap { words, rels });
    }
    None
}

/// The built-in rule table.
pub fn default_headword_rules() -> Vec<HeadwordRule> {
    parse_headword_rules(crate::resources::HEADWORD_RULES)
        .expect("embedded rule table is well-formed")
}

/// Selects the headword of a sentence using the given rule table.
///
/// The outcome depends only on rule priorities, not on the order rules are
/// listed. When no rule produces a candidate the root token is used.
pub fn extract_headword(
    sentence: &ParsedSentence,
    rules: &[HeadwordRule],
) -> Result<HeadwordResult, SyntacticError> {
    if sentence.is_empty() {
        return Err(SyntacticError::EmptyInput);
    }
    let mut ordered: Vec<&HeadwordRule> = rules.iter().collect();
    ordered.sort_by_key(|r| r.priority);

    let root = sentence.root();
    let mut candidate: Option<usize> = None;
    for rule in ordered {
        match &rule.pattern {
            RulePattern::Child(rels) => {
                if candidate.is_none() {
                    candidate = sentence
                        .children(root.index)
                        .find(|t| rels.contains(&t.deprel) && rule.pos_class.matches(t))
                        .map(|t| t.index);
                }
            }
            RulePattern::Root => {
                if candidate.is_none() && rule.pos_class.matches(root) {
                    candidate = Some(root.index);
                }
            }
            RulePattern::First => {
                if candidate.is_none() {
                    candidate = sentence
                        .tokens()
                        .iter()
                        .find(|t| rule.pos_class.matches(t))
                        .map(|t| t.index);
                }
            }
            RulePattern::Unwrap { words, rels } => {
                if let Some(mut current) = candidate {
                    // Each step moves strictly down the tree, so the
                    // sentence length bounds the descent.
                    for _ in 0..sentence.len() {
                        let surface = sentence.token(current).surface.to_lowercase();
                        if !words.contains(&surface) {
                            break;
                        }
                        match sentence
                            .children(current)
                            .find(|t| rels.contains(&t.deprel) && rule.pos_class.matches(t))
                        {
                            Some(child) => current = child.index,
                            None => break,
                        }
                    }
                    candidate = Some(current);
                }
            }
        }
    }

    let chosen = candidate.unwrap_or(root.index);
    let token = sentence.token(chosen);
    let alternates = sentence
        .tokens()
        .iter()
        .filter(|t| t.is_noun() && t.index != chosen)
        .map(|t| (t.index, t.surface.clone()))
        .collect();
    Ok(HeadwordResult {
        index: token.index,
        surface: token.surface.clone(),
        pos: token.pos.clone(),
        alternates,
    })
}

/// Extracts the full syntactic feature vector of a question.
///
/// TU entries are `surface/POS` with term-frequency weights over the raw
/// token count; PT entries count POS tags (their weights sum to the token
/// count); HW and HT carry the headword surface and tag with weight 1; FW
/// carries each alternate noun with weight 1.
pub fn extract_syntactic(
    question: &ParsedSentence,
    rules: &[HeadwordRule],
) -> Result<FeatureVector, SyntacticError> {
    if question.is_empty() {
        return Err(SyntacticError::EmptyInput);
    }
    if question.tokens().last().map(|t| t.surface.as_str()) != Some("?") {
        return Err(SyntacticError::NotAQuestion);
    }
    document_syntactic(question, rules)
}

/// Syntactic features of any sentence, question or not.
pub fn document_syntactic(
    sentence: &ParsedSentence,
    rules: &[HeadwordRule],
) -> Result<FeatureVector, SyntacticError> {
    if sentence.is_empty() {
        return Err(SyntacticError::EmptyInput);
    }
    let mut fv = FeatureVector::new();
    let dl = sentence.len() as i64;
    for token in sentence.tokens() {
        fv.add(
            FeatureKey::new(
                FeatureSpace::Tu,
                format!("{}/{}", token.surface.to_lowercase(), token.pos),
            ),
            Weight::new(1, dl),
        );
        fv.add(FeatureKey::new(FeatureSpace::Pt, token.pos.clone()), Weight::one());
    }
    let headword = extract_headword(sentence, rules)?;
    fv.set(
        FeatureKey::new(FeatureSpace::Hw, headword.key_surface()),
        Weight::one(),
    );
    fv.set(
        FeatureKey::new(FeatureSpace::Ht, headword.pos.clone()),
        Weight::one(),
    );
    for (_, surface) in &headword.alternates {
        fv.set(
            FeatureKey::new(FeatureSpace::Fw, surface.to_lowercase()),
            Weight::one(),
        );
    }
    Ok(fv)
}

impl fmt::Display for HeadwordResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{} ({})", self.surface, self.index, self.pos)
    }
}
