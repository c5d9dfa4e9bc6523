//! Structural feature extraction: binarized dependency relations filtered by
//! design principles.
//!
//! A parsed sentence first becomes a list of printable dependency relations
//! (one per token, including the root pseudo-relation). Binarization turns
//! the non-root relations into `(head, dependent, label)` triples, dropping
//! any triple with a stopword endpoint. Six design principles then grade
//! each triple:
//!
//! * DP1: the relation is binary. Always true after binarization.
//! * DP2: the label is meaningful (not punctuation, determiners, case
//!   markers, auxiliaries, and so on). Failures are removed outright.
//! * DP3: the endpoints are close in the tree.
//! * DP4: the head out-branches its siblings.
//! * DP5: at least one endpoint is a noun.
//! * DP6: the relation spans the longest surface distance for its head and
//!   every stopword strictly between the endpoints is linked to one of them.
//!
//! Relations passing at least `dp_pass_threshold` principles (DP1 and DP2
//! are mandatory) feed the DP-filtered weight; all retained relations feed
//! the DR weight; NER-tagged ones feed the NER weight.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use num_traits::One;
use thiserror::Error;

use crate::corpus::ParsedSentence;
use crate::features::{FeatureKey, FeatureSpace, FeatureVector, Weight};
use crate::semantic::{entity_mentions, EntityMention};

/// A printable dependency relation `label(head-i, dependent-j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyRelation {
    pub label: String,
    /// `(surface, index)`; the root pseudo-head is `("ROOT", 0)`.
    pub head: (String, usize),
    pub dependent: (String, usize),
}

impl fmt::Display for DependencyRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({}-{}, {}-{})",
            self.label, self.head.0, self.head.1, self.dependent.0, self.dependent.1
        )
    }
}

/// The six design principles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dp {
    Dp1,
    Dp2,
    Dp3,
    Dp4,
    Dp5,
    Dp6,
}

impl fmt::Display for Dp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            Dp::Dp1 => 1,
            Dp::Dp2 => 2,
            Dp::Dp3 => 3,
            Dp::Dp4 => 4,
            Dp::Dp5 => 5,
            Dp::Dp6 => 6,
        };
        write!(f, "DP{n}")
    }
}

/// A binarized structural feature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralFeature {
    /// Head surface, lowercased.
    pub left: String,
    /// Dependent surface, lowercased.
    pub right: String,
    /// Dependency label.
    pub relation: String,
    /// 1-based token index of the head.
    pub left_index: usize,
    /// 1-based token index of the dependent.
    pub right_index: usize,
    /// Design principles this feature satisfies.
    pub dp_satisfied: BTreeSet<Dp>,
    /// True for every feature produced by binarization.
    pub from_dr: bool,
    /// Lowercased NER tag when an endpoint lies inside an entity mention.
    pub ner_tag: Option<String>,
}

impl StructuralFeature {
    /// Feature-key form `left|relation|right`.
    pub fn key_name(&self) -> String {
        format!("{}|{}|{}", self.left, self.relation, self.right)
    }

    /// True when the feature counts toward the DP-filtered weight: DP1 and
    /// DP2 hold and at least `threshold` principles are satisfied.
    pub fn passes_dp(&self, threshold: usize) -> bool {
        self.dp_satisfied.contains(&Dp::Dp1)
            && self.dp_satisfied.contains(&Dp::Dp2)
            && self.dp_satisfied.len() >= threshold
    }
}

/// The three structural weight components of a sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StructuralWeight {
    /// Relations passing the design-principle filter.
    pub weight_dp: u64,
    /// All retained binarized relations.
    pub weight_dr: u64,
    /// Retained relations carrying an NER tag.
    pub weight_ner: u64,
}

impl StructuralWeight {
    pub fn total(&self) -> u64 {
        self.weight_dp + self.weight_dr + self.weight_ner
    }

    pub fn add(&mut self, other: StructuralWeight) {
        self.weight_dp += other.weight_dp;
        self.weight_dr += other.weight_dr;
        self.weight_ner += other.weight_ner;
    }
}

/// Scope of the DP6 maximal-distance comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dp6Scope {
    /// Compare against relations sharing the same head.
    PerHead,
    /// Compare against every relation in the sentence.
    Global,
}

/// Which labels DP2 treats as meaningful.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelFilter {
    /// Every label except the listed ones.
    Excluded(HashSet<String>),
    /// Only the listed labels.
    Meaningful(HashSet<String>),
}

/// Tunable parameters of the design-principle filter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpConfig {
    pub label_filter: LabelFilter,
    pub dp3_max_tree_distance: usize,
    pub dp6_scope: Dp6Scope,
    pub dp_pass_threshold: usize,
}

impl Default for DpConfig {
    fn default() -> DpConfig {
        DpConfig::parse(crate::resources::DP_CONFIG).expect("embedded DP config is well-formed")
    }
}

/// Errors raised while reading a DP configuration file.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum StructuralError {
    #[error("dp config line {line}: {reason}")]
    BadConfig { line: usize, reason: String },
}

impl DpConfig {
    /// Parses a flat `key = value` configuration.
    ///
    /// Recognized keys: `excluded_labels` and `meaningful_labels` (bracketed
    /// comma-separated lists; `meaningful_labels` wins when both appear),
    /// `dp3_max_tree_distance`, `dp6_scope` (`per_head` or `global`), and
    /// `dp_pass_threshold`.
    pub fn parse(text: &str) -> Result<DpConfig, StructuralError> {
        let mut excluded: Option<HashSet<String>> = None;
        let mut meaningful: Option<HashSet<String>> = None;
        let mut dp3 = 2usize;
        let mut scope = Dp6Scope::PerHead;
        let mut threshold = 4usize;
        for (line_no, line) in text.lines().enumerate() {
            let line_no = line_no + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| {
                StructuralError::BadConfig {
                    line: line_no,
                    reason: "expected `key = value`".to_string(),
                }
            })?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "excluded_labels" => excluded = Some(parse_label_list(value, line_no)?),
                "meaningful_labels" => meaningful = Some(parse_label_list(value, line_no)?),
                "dp3_max_tree_distance" => {
                    dp3 = value.parse().map_err(|_| StructuralError::BadConfig {
                        line: line_no,
                        reason: format!("bad distance `{value}`"),
                    })?;
                }
                "dp6_scope" => {
                    scope = match value {
                        "per_head" => Dp6Scope::PerHead,
                        "global" => Dp6Scope::Global,
                        other => {
                            return Err(StructuralError::BadConfig {
                                line: line_no,
                                reason: format!("bad scope `{other}`"),
                            })
                        }
                    };
                }
                "dp_pass_threshold" => {
                    threshold = value.parse().map_err(|_| StructuralError::BadConfig {
                        line: line_no,
                        reason: format!("bad threshold `{value}`"),
                    })?;
                }
                other => {
                    return Err(StructuralError::BadConfig {
                        line: line_no,
                        reason: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        let label_filter = match (meaningful, excluded) {
            (Some(labels), _) => LabelFilter::Meaningful(labels),
            (None, Some(labels)) => LabelFilter::Excluded(labels),
            (None, None) => LabelFilter::Excluded(HashSet::new()),
        };
        Ok(DpConfig {
            label_filter,
            dp3_max_tree_distance: dp3,
            dp6_scope: scope,
            dp_pass_threshold: threshold,
        })
    }

    /// DP2: is `label` a meaningful relation?
    pub fn is_meaningful(&self, label: &str) -> bool {
        match &self.label_filter {
            LabelFilter::Excluded(set) => !set.contains(label),
            LabelFilter::Meaningful(set) => set.contains(label),
        }
    }
}

fn parse_label_list(value: &str, line_no: usize) -> Result<HashSet<String>, StructuralError> {
    let inner = value
        .strip_prefix('[')
        .and_then(|v| v.strip_suffix(']'))
        .ok_or_else(|| StructuralError::BadConfig {
            line: line_no,
            reason: format!("expected a bracketed list, found `{value}`"),
        })?;
    Ok(inner
        .split(',')
        .map(|label| label.trim().to_string())
        .filter(|label| !label.is_empty())
        .collect())
}

/// Lists every dependency relation of a sentence in token order, including
/// the `root(ROOT-0, x)` pseudo-relation.
pub fn dependency_relations(sentence: &ParsedSentence) -> Vec<DependencyRelation> {
    sentence
        .tokens()
        .iter()
        .map(|token| {
            let head = if token.head == 0 {
                ("ROOT".to_string(), 0)
            } else {
                (sentence.token(token.head).surface.clone(), token.head)
            };
            DependencyRelation {
                label: token.deprel.clone(),
                head,
                dependent: (token.surface.clone(), token.index),
            }
        })
        .collect()
}

/// Binarizes dependency relations into structural features.
///
/// The root pseudo-relation and any relation with a stopword endpoint are
/// dropped; surfaces are lowercased. Every produced feature has `from_dr`
/// set and an empty principle set.
pub fn binarize(
    relations: &[DependencyRelation],
    stopwords: &HashSet<String>,
) -> Vec<StructuralFeature> {
    relations
        .iter()
        .filter(|rel| rel.head.1 != 0)
        .filter_map(|rel| {
            let left = rel.head.0.to_lowercase();
            let right = rel.dependent.0.to_lowercase();
            if stopwords.contains(&left) || stopwords.contains(&right) {
                return None;
            }
            Some(StructuralFeature {
                left,
                right,
                relation: rel.label.clone(),
                left_index: rel.head.1,
                right_index: rel.dependent.1,
                dp_satisfied: BTreeSet::new(),
                from_dr: true,
                ner_tag: None,
            })
        })
        .collect()
}

/// Grades features against the design principles.
///
/// Features failing DP2 are removed; the rest come back with their full
/// principle sets. DP6 maxima are computed over the DP2 survivors, which
/// makes the operation idempotent: feeding its output back in reproduces
/// the same flags.
pub fn apply_design_principles(
    features: &[StructuralFeature],
    sentence: &ParsedSentence,
    config: &DpConfig,
    stopwords: &HashSet<String>,
) -> Vec<StructuralFeature> {
    let mut kept: Vec<StructuralFeature> = features
        .iter()
        .filter(|f| config.is_meaningful(&f.relation))
        .cloned()
        .collect();

    // Surface-distance maxima for DP6, grouped by scope.
    let mut max_distance: HashMap<usize, usize> = HashMap::new();
    let mut global_max = 0usize;
    for feature in &kept {
        let distance = feature.left_index.abs_diff(feature.right_index);
        let entry = max_distance.entry(feature.left_index).or_insert(0);
        *entry = (*entry).max(distance);
        global_max = global_max.max(distance);
    }

    for feature in &mut kept {
        let mut satisfied = BTreeSet::from([Dp::Dp1, Dp::Dp2]);
        if sentence.tree_distance(feature.left_index, feature.right_index)
            <= config.dp3_max_tree_distance
        {
            satisfied.insert(Dp::Dp3);
        }
        if head_out_branches_siblings(sentence, feature.left_index) {
            satisfied.insert(Dp::Dp4);
        }
        if sentence.token(feature.left_index).is_noun()
            || sentence.token(feature.right_index).is_noun()
        {
            satisfied.insert(Dp::Dp5);
        }
        let distance = feature.left_index.abs_diff(feature.right_index);
        let scope_max = match config.dp6_scope {
            Dp6Scope::PerHead => max_distance[&feature.left_index],
            Dp6Scope::Global => global_max,
        };
        if distance == scope_max && no_unlinked_stopword_between(sentence, feature, stopwords) {
            satisfied.insert(Dp::Dp6);
        }
        feature.dp_satisfied = satisfied;
    }
    kept
}

/// DP4: the head's branch count is maximal (non-strictly) among its
/// siblings. The root has no siblings and qualifies vacuously.
fn head_out_branches_siblings(sentence: &ParsedSentence, head: usize) -> bool {
    let parent = sentence.token(head).head;
    let own = sentence.branch_count(head);
    sentence
        .children(parent)
        .all(|sibling| sentence.branch_count(sibling.index) <= own)
}

/// DP6's linkage condition: every stopword strictly between the endpoints
/// must attach to one of them (or be an endpoint's head).
fn no_unlinked_stopword_between(
    sentence: &ParsedSentence,
    feature: &StructuralFeature,
    stopwords: &HashSet<String>,
) -> bool {
    let (lo, hi) = if feature.left_index < feature.right_index {
        (feature.left_index, feature.right_index)
    } else {
        (feature.right_index, feature.left_index)
    };
    for index in lo + 1..hi {
        let token = sentence.token(index);
        if !stopwords.contains(&token.surface.to_lowercase()) {
            continue;
        }
        let linked = token.head == feature.left_index
            || token.head == feature.right_index
            || sentence.token(feature.left_index).head == index
            || sentence.token(feature.right_index).head == index;
        if !linked {
            return false;
        }
    }
    true
}

/// Attaches NER tags to features whose endpoints fall inside an entity
/// mention. The dependent endpoint wins when both are tagged.
pub fn ner_augment(
    features: &[StructuralFeature],
    mentions: &[EntityMention],
) -> Vec<StructuralFeature> {
    let tag_of = |index: usize| {
        mentions
            .iter()
            .find(|m| m.start <= index && index <= m.end)
            .map(|m| m.tag.to_lowercase())
    };
    features
        .iter()
        .map(|feature| {
            let mut tagged = feature.clone();
            tagged.ner_tag = tag_of(feature.right_index).or_else(|| tag_of(feature.left_index));
            tagged
        })
        .collect()
}

/// Counts the three structural weight components.
pub fn structural_weight(features: &[StructuralFeature], pass_threshold: usize) -> StructuralWeight {
    StructuralWeight {
        weight_dp: features.iter().filter(|f| f.passes_dp(pass_threshold)).count() as u64,
        weight_dr: features.iter().filter(|f| f.from_dr).count() as u64,
        weight_ner: features.iter().filter(|f| f.ner_tag.is_some()).count() as u64,
    }
}

/// Runs the full structural pipeline on one sentence.
///
/// Returns the ST_DR / ST_DP / ST_NER feature vector together with the
/// structural weight components.
pub fn extract_structural(
    sentence: &ParsedSentence,
    stopwords: &HashSet<String>,
    config: &DpConfig,
) -> (FeatureVector, StructuralWeight) {
    let relations = dependency_relations(sentence);
    let binarized = binarize(&relations, stopwords);
    let graded = apply_design_principles(&binarized, sentence, config, stopwords);
    let tagged = ner_augment(&graded, &entity_mentions(sentence));
    let weight = structural_weight(&tagged, config.dp_pass_threshold);

    let mut fv = FeatureVector::new();
    for feature in &tagged {
        let name = feature.key_name();
        fv.add(FeatureKey::new(FeatureSpace::StDr, name.clone()), Weight::one());
        if feature.passes_dp(config.dp_pass_threshold) {
            fv.add(FeatureKey::new(FeatureSpace::StDp, name.clone()), Weight::one());
        }
        if let Some(tag) = &feature.ner_tag {
            fv.add(
                FeatureKey::new(FeatureSpace::StNer, format!("{name}|{tag}")),
                Weight::one(),
            );
        }
    }
    (fv, weight)
}
