//! Lexical feature extraction: n-grams, wh-word, word shapes, and question
//! length.
//!
//! N-gram weights are term frequencies over the raw token count of the
//! input, kept as exact rationals. Punctuation tokens stay in the unigram
//! space (the terminal `?` is itself a useful signal) but are excluded from
//! bigram and trigram formation so that grams never span a punctuation
//! boundary.

use num_traits::One;
use thiserror::Error;

use crate::corpus::{ParsedSentence, Token};
use crate::features::{FeatureKey, FeatureSpace, FeatureVector, Weight};

/// The wh-words recognized by the WW space, in canonical order. Any other
/// question opener falls into the `rest` class.
pub const WH_WORDS: [&str; 7] = ["which", "how", "where", "what", "why", "when", "who"];

/// Errors raised by lexical extraction.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexicalError {
    #[error("n-gram order {n} is unsupported (expected 1, 2, or 3)")]
    BadN { n: usize },
    #[error("cannot extract features from an empty token sequence")]
    EmptyInput,
    #[error("input does not end with `?` and is not treated as a question")]
    NotAQuestion,
}

/// Extracts the order-`n` n-gram vector from `tokens`.
///
/// Weights are `count / DL` where `DL` is the raw length of `tokens`
/// including punctuation. Keys are lowercased surfaces, joined with `_` for
/// higher orders. An empty token slice yields an empty vector.
pub fn extract_ngrams(tokens: &[Token], n: usize) -> Result<FeatureVector, LexicalError> {
    let space = match n {
        1 => FeatureSpace::Un,
        2 => FeatureSpace::Bi,
        3 => FeatureSpace::Tr,
        _ => return Err(LexicalError::BadN { n }),
    };
    let mut fv = FeatureVector::new();
    if tokens.is_empty() {
        return Ok(fv);
    }
    let dl = tokens.len() as i64;
    let surfaces: Vec<String> = if n == 1 {
        tokens.iter().map(|t| t.surface.to_lowercase()).collect()
    } else {
        tokens
            .iter()
            .filter(|t| !t.is_punct())
            .map(|t| t.surface.to_lowercase())
            .collect()
    };
    for window in surfaces.windows(n) {
        let name = window.join("_");
        fv.add(FeatureKey::new(space, name), Weight::new(1, dl));
    }
    Ok(fv)
}

/// The wh-word class of a token sequence: the first token matching one of
/// [`WH_WORDS`], or `rest` when none appears.
pub fn wh_word(tokens: &[Token]) -> &'static str {
    for token in tokens {
        let lower = token.surface.to_lowercase();
        if let Some(word) = WH_WORDS.iter().find(|w| **w == lower) {
            return word;
        }
    }
    "rest"
}

/// Shape class of a single surface form.
///
/// Classes are checked in order: all-digit, upper-initial, all-lowercase
/// letters, then everything else.
pub fn word_shape(surface: &str) -> &'static str {
    if !surface.is_empty() && surface.chars().all(|c| c.is_ascii_digit()) {
        return "digit";
    }
    if surface.chars().next().is_some_and(|c| c.is_uppercase()) {
        return "upper";
    }
    if !surface.is_empty() && surface.chars().all(|c| c.is_lowercase() && c.is_alphabetic()) {
        return "lower";
    }
    "other"
}

/// The WS vector: shape class -> occurrence count.
pub fn word_shapes(tokens: &[Token]) -> FeatureVector {
    let mut fv = FeatureVector::new();
    for token in tokens {
        fv.add(
            FeatureKey::new(FeatureSpace::Ws, word_shape(&token.surface)),
            Weight::one(),
        );
    }
    fv
}

/// Question length: token count excluding the terminal `?`.
pub fn question_length(question: &ParsedSentence) -> i64 {
    let len = question.len() as i64;
    if question.tokens().last().is_some_and(|t| t.surface == "?") {
        len - 1
    } else {
        len
    }
}

/// Extracts the full lexical feature vector of a question.
///
/// The vector is the union of the UN, BI, and TR n-gram spaces plus one WW
/// entry (weight 1), the WS shape counts, and a QL entry `len` whose weight
/// is the token count excluding the terminal `?`.
pub fn extract_lexical(question: &ParsedSentence) -> Result<FeatureVector, LexicalError> {
    let tokens = question.tokens();
    if tokens.is_empty() {
        return Err(LexicalError::EmptyInput);
    }
    if tokens.last().map(|t| t.surface.as_str()) != Some("?") {
        return Err(LexicalError::NotAQuestion);
    }
    let mut fv = document_lexical(tokens);
    fv.add(
        FeatureKey::new(FeatureSpace::Ww, wh_word(tokens)),
        Weight::one(),
    );
    fv.add(
        FeatureKey::new(FeatureSpace::Ql, "len"),
        Weight::from_integer(question_length(question)),
    );
    Ok(fv)
}

/// Lexical features shared by questions and documents: n-grams of orders 1
/// through 3 plus word shapes. No question-ness is assumed.
pub fn document_lexical(tokens: &[Token]) -> FeatureVector {
    let mut fv = FeatureVector::new();
    for n in 1..=3 {
        fv.merge(&extract_ngrams(tokens, n).expect("orders 1..=3 are valid"));
    }
    fv.merge(&word_shapes(tokens));
    fv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_conllu;

    fn toy_tokens(surfaces: &[&str]) -> Vec<Token> {
        surfaces
            .iter()
            .enumerate()
            .map(|(i, s)| Token {
                index: i + 1,
                surface: s.to_string(),
                lemma: s.to_lowercase(),
                pos: "NN".to_string(),
                head: if i == 0 { 0 } else { 1 },
                deprel: if i == 0 { "root" } else { "dep" }.to_string(),
                ner: None,
            })
            .collect()
    }

    fn telangana_question() -> ParsedSentence {
        let text = std::fs::read_to_string(
            concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/telangana_question.conllu"),
        )
        .unwrap();
        parse_conllu(&text).unwrap().remove(0)
    }

    #[test]
    fn unigrams_keep_punctuation_and_sum_to_one() {
        let question = telangana_question();
        let fv = extract_ngrams(question.tokens(), 1).unwrap();
        // 14 tokens, "of" twice, so 13 distinct keys.
        assert_eq!(fv.len(), 13);
        assert_eq!(
            fv.get(&FeatureKey::new(FeatureSpace::Un, "of")),
            Some(Weight::new(2, 14))
        );
        assert_eq!(
            fv.get(&FeatureKey::new(FeatureSpace::Un, "?")),
            Some(Weight::new(1, 14))
        );
        assert_eq!(fv.total_weight(), Weight::one());
    }

    #[test]
    fn bigrams_skip_punctuation() {
        let question = telangana_question();
        let fv = extract_ngrams(question.tokens(), 2).unwrap();
        // 13 non-punctuation tokens form 12 bigrams, all distinct here.
        assert_eq!(fv.len(), 12);
        assert_eq!(
            fv.get(&FeatureKey::new(FeatureSpace::Bi, "of_telangana")),
            Some(Weight::new(1, 14))
        );
        assert!(fv.get(&FeatureKey::new(FeatureSpace::Bi, "telangana_?")).is_none());
    }

    #[test]
    fn repeated_bigrams_accumulate() {
        let tokens = toy_tokens(&["a", "b", "a"]);
        let fv = extract_ngrams(&tokens, 2).unwrap();
        assert_eq!(
            fv.get(&FeatureKey::new(FeatureSpace::Bi, "a_b")),
            Some(Weight::new(1, 3))
        );
        assert_eq!(
            fv.get(&FeatureKey::new(FeatureSpace::Bi, "b_a")),
            Some(Weight::new(1, 3))
        );
    }

    #[test]
    fn single_token_unigram() {
        let tokens = toy_tokens(&["hello"]);
        let fv = extract_ngrams(&tokens, 1).unwrap();
        assert_eq!(
            fv.get(&FeatureKey::new(FeatureSpace::Un, "hello")),
            Some(Weight::one())
        );
    }

    #[test]
    fn unsupported_orders_are_rejected() {
        let tokens = toy_tokens(&["a", "b"]);
        assert_eq!(extract_ngrams(&tokens, 0), Err(LexicalError::BadN { n: 0 }));
        assert_eq!(extract_ngrams(&tokens, 4), Err(LexicalError::BadN { n: 4 }));
    }

    #[test]
    fn wh_word_takes_first_match_or_rest() {
        assert_eq!(wh_word(&toy_tokens(&["Which", "state", "?"])), "which");
        assert_eq!(wh_word(&toy_tokens(&["Explain", "how", "?"])), "how");
        assert_eq!(wh_word(&toy_tokens(&["Name", "the", "capital", "?"])), "rest");
    }

    #[test]
    fn word_shapes_count_by_class() {
        let tokens = toy_tokens(&["Sania", "won", "6", "Grand", "Slam", "titles", "?"]);
        let fv = word_shapes(&tokens);
        assert_eq!(
            fv.get(&FeatureKey::new(FeatureSpace::Ws, "digit")),
            Some(Weight::one())
        );
        assert_eq!(
            fv.get(&FeatureKey::new(FeatureSpace::Ws, "upper")),
            Some(Weight::from_integer(3))
        );
        assert_eq!(
            fv.get(&FeatureKey::new(FeatureSpace::Ws, "lower")),
            Some(Weight::from_integer(2))
        );
        assert_eq!(
            fv.get(&FeatureKey::new(FeatureSpace::Ws, "other")),
            Some(Weight::one())
        );
    }

    #[test]
    fn question_features_include_ww_and_ql() {
        let question = telangana_question();
        let fv = extract_lexical(&question).unwrap();
        assert_eq!(
            fv.get(&FeatureKey::new(FeatureSpace::Ww, "which")),
            Some(Weight::one())
        );
        assert_eq!(
            fv.get(&FeatureKey::new(FeatureSpace::Ql, "len")),
            Some(Weight::from_integer(13))
        );
    }

    #[test]
    fn statements_are_not_questions() {
        let text = "1\tTelangana\ttelangana\t_\tNNP\t_\t2\tnsubj\t_\t_\n2\tformed\tform\t_\tVBD\t_\t0\troot\t_\t_\n";
        let sentence = parse_conllu(text).unwrap().remove(0);
        assert_eq!(extract_lexical(&sentence), Err(LexicalError::NotAQuestion));
    }
}
