//! Semantic feature extraction: headword hypernyms, named-entity mentions,
//! and the headword's entity tag.
//!
//! Hypernyms come from a plain-text lexicon rather than a full WordNet
//! install: each line maps a word to one hypernym, and the senses of a word
//! are collapsed into the union of its edges. Chains are breadth-first
//! closures over that graph, capped at a configurable depth (six by
//! default), which keeps lookups cheap and cycle-safe.

use std::collections::{HashMap, HashSet, VecDeque};

use num_traits::One;
use thiserror::Error;

use crate::corpus::ParsedSentence;
use crate::features::{FeatureKey, FeatureSpace, FeatureVector, Weight};
use crate::syntactic::HeadwordResult;

/// Default bound on hypernym chain depth.
pub const DEFAULT_MAX_DEPTH: usize = 6;

/// Errors raised while loading a hypernym lexicon.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SemanticError {
    #[error("lexicon line {line}: {reason}")]
    MalformedLexicon { line: usize, reason: String },
}

/// A word-to-hypernym graph with case-insensitive lookups.
#[derive(Debug, Clone, Default)]
pub struct HypernymGraph {
    edges: HashMap<String, Vec<String>>,
    edge_count: usize,
}

impl HypernymGraph {
    /// Loads a lexicon from `word<TAB>hypernym` lines.
    ///
    /// `#` comments and blank lines are skipped; duplicate and self edges
    /// are ignored. Both columns are lowercased.
    pub fn from_tsv(text: &str) -> Result<HypernymGraph, SemanticError> {
        let mut graph = HypernymGraph::default();
        for (line_no, line) in text.lines().enumerate() {
            let line_no = line_no + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let columns: Vec<&str> = line.split('\t').collect();
            if columns.len() != 2 {
                return Err(SemanticError::MalformedLexicon {
                    line: line_no,
                    reason: format!("expected 2 tab-separated columns, found {}", columns.len()),
                });
            }
            let word = columns[0].trim().to_lowercase();
            let hypernym = columns[1].trim().to_lowercase();
            if word.is_empty() || hypernym.is_empty() {
                return Err(SemanticError::MalformedLexicon {
                    line: line_no,
                    reason: "empty word or hypernym".to_string(),
                });
            }
            graph.insert(word, hypernym);
        }
        Ok(graph)
    }

    /// The built-in lexicon.
    pub fn builtin() -> HypernymGraph {
        HypernymGraph::from_tsv(crate::resources::HYPERNYM_LEXICON)
            .expect("embedded lexicon is well-formed")
    }

    /// Adds one edge, ignoring self edges and duplicates.
    pub fn insert(&mut self, word: impl Into<String>, hypernym: impl Into<String>) {
        let word = word.into().to_lowercase();
        let hypernym = hypernym.into().to_lowercase();
        if word == hypernym {
            return;
        }
        let targets = self.edges.entry(word).or_default();
        if !targets.contains(&hypernym) {
            targets.push(hypernym);
            self.edge_count += 1;
        }
    }

    /// Direct hypernyms of `word`, in lexicon order.
    pub fn hypernyms(&self, word: &str) -> &[String] {
        self.edges
            .get(&word.to_lowercase())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Number of edges in the graph.
    pub fn len(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.edge_count == 0
    }
}

/// Breadth-first hypernym closure of `word`, capped at `max_depth` hops.
///
/// The seed appears at depth 0 even when absent from the lexicon. Each
/// reachable word is reported once at its minimum depth, in breadth-first
/// discovery order, so cycles terminate and the output is deterministic.
pub fn hypernym_chain(
    graph: &HypernymGraph,
    word: &str,
    max_depth: usize,
) -> Vec<(String, usize)> {
    let seed = word.to_lowercase();
    let mut seen: HashSet<String> = HashSet::new();
    let mut chain = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(seed.clone());
    chain.push((seed.clone(), 0));
    queue.push_back((seed, 0));
    while let Some((current, depth)) = queue.pop_front() {
        if depth == max_depth {
            continue;
        }
        for hypernym in graph.hypernyms(&current) {
            if seen.insert(hypernym.clone()) {
                chain.push((hypernym.clone(), depth + 1));
                queue.push_back((hypernym.clone(), depth + 1));
            }
        }
    }
    chain
}

/// A maximal run of adjacent tokens sharing one named-entity tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityMention {
    /// Space-joined surfaces, original casing.
    pub surface: String,
    /// Tag as annotated, e.g. `LOCATION`.
    pub tag: String,
    /// Inclusive 1-based token span.
    pub start: usize,
    pub end: usize,
}

impl EntityMention {
    /// Feature-key form: `tag:surface`, lowercased, spaces as `_`.
    pub fn key(&self) -> String {
        format!(
            "{}:{}",
            self.tag.to_lowercase(),
            self.surface.to_lowercase().replace(' ', "_")
        )
    }
}

/// Extracts entity mentions from a sentence's token-level NER tags.
///
/// Adjacent tokens with the same tag merge into one mention; `O` tokens
/// separate mentions.
pub fn entity_mentions(sentence: &ParsedSentence) -> Vec<EntityMention> {
    let mut mentions: Vec<EntityMention> = Vec::new();
    for token in sentence.tokens() {
        let Some(tag) = &token.ner else {
            continue;
        };
        match mentions.last_mut() {
            Some(last) if last.end + 1 == token.index && last.tag == *tag => {
                last.surface.push(' ');
                last.surface.push_str(&token.surface);
                last.end = token.index;
            }
            _ => mentions.push(EntityMention {
                surface: token.surface.clone(),
                tag: tag.clone(),
                start: token.index,
                end: token.index,
            }),
        }
    }
    mentions
}

/// Extracts the semantic feature vector of a sentence.
///
/// HH holds the headword's hypernym chain (weight 1 per word), NE holds one
/// entry per distinct entity mention key, and HN holds the headword's own
/// entity tag when it has one.
pub fn extract_semantic(
    sentence: &ParsedSentence,
    headword: &HeadwordResult,
    graph: &HypernymGraph,
) -> FeatureVector {
    let mut fv = FeatureVector::new();
    for (word, _) in hypernym_chain(graph, &headword.key_surface(), DEFAULT_MAX_DEPTH) {
        fv.set(FeatureKey::new(FeatureSpace::Hh, word), Weight::one());
    }
    for mention in entity_mentions(sentence) {
        fv.set(FeatureKey::new(FeatureSpace::Ne, mention.key()), Weight::one());
    }
    if let Some(tag) = &sentence.token(headword.index).ner {
        fv.set(
            FeatureKey::new(FeatureSpace::Hn, tag.to_lowercase()),
            Weight::one(),
        );
    }
    fv
}
