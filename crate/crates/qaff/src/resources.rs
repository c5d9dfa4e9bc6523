//! Built-in default resources, embedded at compile time.
//!
//! Every resource can be overridden through the CLI by pointing the matching
//! `--*` flag at a file in the same format.

use std::collections::HashSet;

/// Default English stopword list.
pub const STOPWORDS: &str = include_str!("resources/stopwords.txt");

/// Default headword selection rule table.
pub const HEADWORD_RULES: &str = include_str!("resources/headword_rules.tsv");

/// Default hypernym lexicon.
pub const HYPERNYM_LEXICON: &str = include_str!("resources/hypernym_lexicon.tsv");

/// Default design-principle configuration.
pub const DP_CONFIG: &str = include_str!("resources/dp_config.txt");

/// Default expected-answer-type map.
pub const EAT_MAP: &str = include_str!("resources/eat_map.tsv");

/// Parses a stopword list: one word per line, `#` comments, blank lines
/// skipped. Words are stored lowercased.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|line| !line.is_empty() && !line.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// The built-in stopword set.
pub fn default_stopwords() -> HashSet<String> {
    parse_stopwords(STOPWORDS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_stopwords_cover_function_words() {
        let stops = default_stopwords();
        for word in ["the", "was", "of", "which", "where", "she", "n't"] {
            assert!(stops.contains(word), "missing stopword `{word}`");
        }
        for word in ["state", "telangana", "made", "ambassador", "reverse"] {
            assert!(!stops.contains(word), "content word `{word}` must not be a stopword");
        }
    }
}
