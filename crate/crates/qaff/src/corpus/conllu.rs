//! CoNLL-U parsing, validation, and serialization.
//!
//! The parser accepts the standard ten-column format. Only the columns this
//! crate consumes are kept on [`Token`]: ID, FORM, LEMMA, XPOS (the PTB-style
//! tag), HEAD, DEPREL, and an optional `NER=<TAG>` attribute carried in MISC.
//! Every sentence is validated as a proper dependency tree before it is
//! returned: contiguous 1-based ids, exactly one root, heads in range, and no
//! cycles.

use std::fmt;

use thiserror::Error;

/// One token of a dependency-parsed sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// 1-based position within the sentence.
    pub index: usize,
    /// Surface form exactly as written.
    pub surface: String,
    /// Lemma, or a copy of the surface when the column holds `_`.
    pub lemma: String,
    /// PTB-style part-of-speech tag from the XPOS column.
    pub pos: String,
    /// Index of the syntactic head; 0 marks the root.
    pub head: usize,
    /// Dependency relation label to the head.
    pub deprel: String,
    /// Named-entity tag from a `NER=<TAG>` MISC attribute. `O` and absent
    /// MISC both map to `None`.
    pub ner: Option<String>,
}

impl Token {
    /// True when the XPOS tag marks a noun (`NN`, `NNS`, `NNP`, `NNPS`).
    pub fn is_noun(&self) -> bool {
        self.pos.starts_with("NN")
    }

    /// True when the surface consists entirely of non-alphanumeric
    /// characters, e.g. `?`, `,`, `...`.
    pub fn is_punct(&self) -> bool {
        !self.surface.is_empty() && self.surface.chars().all(|c| !c.is_alphanumeric())
    }
}

/// A validated dependency-parsed sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSentence {
    tokens: Vec<Token>,
}

/// Errors raised while reading CoNLL-U text.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConlluError {
    /// A non-comment line does not have exactly ten tab-separated columns,
    /// or a numeric column fails to parse.
    #[error("line {line}: malformed CoNLL-U line: {reason}")]
    MalformedLine { line: usize, reason: String },
    /// A token id or head points outside the sentence.
    #[error("sentence {sentence}: token {token} has out-of-range head {head}")]
    BadIndex {
        sentence: usize,
        token: usize,
        head: usize,
    },
    /// The sentence is not a single-rooted acyclic tree.
    #[error("sentence {sentence}: not a dependency tree: {reason}")]
    NonTree { sentence: usize, reason: String },
}

/// Parses a CoNLL-U document into sentences.
///
/// Sentences are separated by blank lines; `#` comment lines are skipped.
/// Empty input yields an empty vector.
pub fn parse_conllu(text: &str) -> Result<Vec<ParsedSentence>, ConlluError> {
    let mut sentences = Vec::new();
    let mut pending: Vec<Token> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let trimmed = line.trim_end_matches(['\r']);
        if trimmed.trim().is_empty() {
            if !pending.is_empty() {
                sentences.push(finish_sentence(std::mem::take(&mut pending), sentences.len() + 1)?);
            }
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        pending.push(parse_line(trimmed, line_no)?);
    }
    if !pending.is_empty() {
        sentences.push(finish_sentence(pending, sentences.len() + 1)?);
    }
    Ok(sentences)
}

fn parse_line(line: &str, line_no: usize) -> Result<Token, ConlluError> {
    let columns: Vec<&str> = line.split('\t').collect();
    if columns.len() != 10 {
        return Err(ConlluError::MalformedLine {
            line: line_no,
            reason: format!("expected 10 columns, found {}", columns.len()),
        });
    }
    let index: usize = columns[0].parse().map_err(|_| ConlluError::MalformedLine {
        line: line_no,
        reason: format!("bad token id `{}`", columns[0]),
    })?;
    let head: usize = columns[6].parse().map_err(|_| ConlluError::MalformedLine {
        line: line_no,
        reason: format!("bad head `{}`", columns[6]),
    })?;
    let surface = columns[1].to_string();
    let lemma = if columns[2] == "_" {
        surface.clone()
    } else {
        columns[2].to_string()
    };
    let ner = columns[9]
        .split('|')
        .find_map(|attr| attr.strip_prefix("NER="))
        .filter(|tag| !tag.is_empty() && *tag != "O")
        .map(str::to_string);
    Ok(Token {
        index,
        surface,
        lemma,
        pos: columns[4].to_string(),
        head,
        deprel: columns[7].to_string(),
        ner,
    })
}

fn finish_sentence(tokens: Vec<Token>, ordinal: usize) -> Result<ParsedSentence, ConlluError> {
    for (position, token) in tokens.iter().enumerate() {
        if token.index != position + 1 {
            return Err(ConlluError::NonTree {
                sentence: ordinal,
                reason: format!(
                    "token ids not contiguous: expected {}, found {}",
                    position + 1,
                    token.index
                ),
            });
        }
    }
    let len = tokens.len();
    let mut root = None;
    for token in &tokens {
        if token.head > len {
            return Err(ConlluError::BadIndex {
                sentence: ordinal,
                token: token.index,
                head: token.head,
            });
        }
        if token.head == token.index {
            return Err(ConlluError::NonTree {
                sentence: ordinal,
                reason: format!("token {} is its own head", token.index),
            });
        }
        if token.head == 0 {
            if let Some(first) = root {
                return Err(ConlluError::NonTree {
                    sentence: ordinal,
                    reason: format!("multiple roots: tokens {first} and {}", token.index),
                });
            }
            root = Some(token.index);
        }
    }
    if root.is_none() {
        return Err(ConlluError::NonTree {
            sentence: ordinal,
            reason: "no root token".to_string(),
        });
    }
    // Walking up from every token must reach the root without revisiting a
    // node; with single-parent nodes this rules out cycles.
    for token in &tokens {
        let mut seen = vec![false; len + 1];
        let mut current = token.index;
        while current != 0 {
            if seen[current] {
                return Err(ConlluError::NonTree {
                    sentence: ordinal,
                    reason: format!("cycle through token {current}"),
                });
            }
            seen[current] = true;
            current = tokens[current - 1].head;
        }
    }
    Ok(ParsedSentence { tokens })
}

impl ParsedSentence {
    /// Builds a sentence from tokens, applying full tree validation.
    pub fn from_tokens(tokens: Vec<Token>) -> Result<ParsedSentence, ConlluError> {
        finish_sentence(tokens, 1)
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token by 1-based index. Panics when out of range.
    pub fn token(&self, index: usize) -> &Token {
        &self.tokens[index - 1]
    }

    /// The unique root token.
    pub fn root(&self) -> &Token {
        self.tokens
            .iter()
            .find(|t| t.head == 0)
            .expect("validated sentence has a root")
    }

    /// Direct dependents of the token at `head`, in sentence order. Passing
    /// 0 returns the root.
    pub fn children(&self, head: usize) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(move |t| t.head == head)
    }

    /// Number of direct dependents of `index`.
    pub fn branch_count(&self, index: usize) -> usize {
        self.children(index).count()
    }

    /// Undirected tree distance between two tokens (0 for the same token,
    /// 1 for a direct edge).
    pub fn tree_distance(&self, a: usize, b: usize) -> usize {
        let depth = |mut idx: usize| {
            let mut path = Vec::new();
            while idx != 0 {
                path.push(idx);
                idx = self.tokens[idx - 1].head;
            }
            path
        };
        let path_a = depth(a);
        let path_b = depth(b);
        // Drop the shared suffix (the common path to the root).
        let mut ai = path_a.len();
        let mut bi = path_b.len();
        while ai > 0 && bi > 0 && path_a[ai - 1] == path_b[bi - 1] {
            ai -= 1;
            bi -= 1;
        }
        ai + bi
    }

    /// Space-joined surface text.
    pub fn text(&self) -> String {
        let surfaces: Vec<&str> = self.tokens.iter().map(|t| t.surface.as_str()).collect();
        surfaces.join(" ")
    }

    /// Serializes back to ten-column CoNLL-U (no trailing blank line).
    pub fn to_conllu(&self) -> String {
        let mut out = String::new();
        for token in &self.tokens {
            let misc = match &token.ner {
                Some(tag) => format!("NER={tag}"),
                None => "_".to_string(),
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t_\t{}\t_\t{}\t{}\t_\t{}\n",
                token.index, token.surface, token.lemma, token.pos, token.head, token.deprel, misc
            ));
        }
        out
    }
}

impl fmt::Display for ParsedSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_conllu())
    }
}

/// Serializes sentences as a CoNLL-U document with blank-line separators.
pub fn serialize_conllu(sentences: &[ParsedSentence]) -> String {
    let blocks: Vec<String> = sentences.iter().map(ParsedSentence::to_conllu).collect();
    blocks.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_yields_no_sentences() {
        assert_eq!(parse_conllu("").unwrap(), Vec::new());
        assert_eq!(parse_conllu("\n\n# comment\n").unwrap(), Vec::new());
    }

    #[test]
    fn parses_minimal_two_token_sentence() {
        let text = "1\tWho\twho\t_\tWP\t_\t2\tnsubj\t_\t_\n2\twon\twin\t_\tVBD\t_\t0\troot\t_\t_\n";
        let sentences = parse_conllu(text).unwrap();
        assert_eq!(sentences.len(), 1);
        let sentence = &sentences[0];
        assert_eq!(sentence.len(), 2);
        assert_eq!(sentence.root().surface, "won");
        assert_eq!(sentence.token(1).deprel, "nsubj");
        assert_eq!(sentence.token(1).ner, None);
    }

    #[test]
    fn nine_columns_is_malformed() {
        let text = "1\tWho\twho\t_\tWP\t_\t2\tnsubj\t_\n2\twon\twin\t_\tVBD\t_\t0\troot\t_\t_\n";
        match parse_conllu(text) {
            Err(ConlluError::MalformedLine { line: 1, .. }) => {}
            other => panic!("expected MalformedLine for line 1, got {other:?}"),
        }
    }

    #[test]
    fn cycle_is_rejected() {
        let text = "1\ta\ta\t_\tNN\t_\t2\tdep\t_\t_\n2\tb\tb\t_\tNN\t_\t1\tdep\t_\t_\n3\tc\tc\t_\tVB\t_\t0\troot\t_\t_\n";
        match parse_conllu(text) {
            Err(ConlluError::NonTree { sentence: 1, .. }) => {}
            other => panic!("expected NonTree, got {other:?}"),
        }
    }

    #[test]
    fn two_roots_are_rejected() {
        let text = "1\ta\ta\t_\tNN\t_\t0\troot\t_\t_\n2\tb\tb\t_\tNN\t_\t0\troot\t_\t_\n";
        match parse_conllu(text) {
            Err(ConlluError::NonTree { sentence: 1, .. }) => {}
            other => panic!("expected NonTree, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_head_is_bad_index() {
        let text = "1\ta\ta\t_\tNN\t_\t5\tdep\t_\t_\n2\tb\tb\t_\tVB\t_\t0\troot\t_\t_\n";
        match parse_conllu(text) {
            Err(ConlluError::BadIndex {
                sentence: 1,
                token: 1,
                head: 5,
            }) => {}
            other => panic!("expected BadIndex, got {other:?}"),
        }
    }

    #[test]
    fn ner_misc_attribute_is_extracted() {
        let text = "1\tTelangana\tTelangana\t_\tNNP\t_\t2\tnsubj\t_\tNER=LOCATION\n2\tformed\tform\t_\tVBD\t_\t0\troot\t_\tNER=O\n";
        let sentences = parse_conllu(text).unwrap();
        assert_eq!(sentences[0].token(1).ner.as_deref(), Some("LOCATION"));
        assert_eq!(sentences[0].token(2).ner, None);
    }

    #[test]
    fn tree_distance_counts_edges() {
        // 3 is root; 1 <- 2 <- 3, 4 <- 3.
        let text = "1\ta\ta\t_\tNN\t_\t2\tdep\t_\t_\n2\tb\tb\t_\tNN\t_\t3\tdep\t_\t_\n3\tc\tc\t_\tVB\t_\t0\troot\t_\t_\n4\td\td\t_\tNN\t_\t3\tdep\t_\t_\n";
        let sentence = &parse_conllu(text).unwrap()[0];
        assert_eq!(sentence.tree_distance(1, 1), 0);
        assert_eq!(sentence.tree_distance(1, 2), 1);
        assert_eq!(sentence.tree_distance(1, 4), 3);
        assert_eq!(sentence.tree_distance(2, 4), 2);
    }

    #[test]
    fn serialization_roundtrips() {
        let text = "1\tWho\twho\t_\tWP\t_\t2\tnsubj\t_\t_\n2\twon\twin\t_\tVBD\t_\t0\troot\t_\tNER=O\n";
        let sentences = parse_conllu(text).unwrap();
        let serialized = serialize_conllu(&sentences);
        let reparsed = parse_conllu(&serialized).unwrap();
        assert_eq!(sentences, reparsed);
    }
}
