//! Sparse feature vectors over named feature spaces.
//!
//! Every extractor in this crate produces a [`FeatureVector`]: a sparse map
//! from `(space, name)` keys to non-negative rational weights. Keeping the
//! weights as exact rationals means term-frequency fractions such as `2/14`
//! survive averaging without rounding, which in turn keeps golden tests and
//! report generation bit-stable across runs and platforms.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize};

/// Identifier for one feature space.
///
/// The short codes follow the feature-form notation: lexical spaces carry
/// n-gram, wh-word, word-shape, and question-length features; syntactic
/// spaces carry tagged units, POS bags, and headword features; semantic
/// spaces carry hypernym and named-entity features; structural spaces carry
/// binarized dependency relations in three flavours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureSpace {
    /// Unigrams.
    Un,
    /// Bigrams.
    Bi,
    /// Trigrams.
    Tr,
    /// Wh-word.
    Ww,
    /// Word shapes.
    Ws,
    /// Question length.
    Ql,
    /// Tagged units (`surface/POS`).
    Tu,
    /// POS tag bag.
    Pt,
    /// Headword.
    Hw,
    /// Headword POS tag.
    Ht,
    /// Focus words (alternate nouns).
    Fw,
    /// Headword hypernyms.
    Hh,
    /// Named-entity mentions.
    Ne,
    /// Headword named-entity tag.
    Hn,
    /// Structural relations that satisfy the design principles.
    StDp,
    /// All binarized structural relations.
    StDr,
    /// Structural relations carrying a named-entity tag.
    StNer,
}

/// Coarse grouping of feature spaces used for per-category averaging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureCategory {
    Lexical,
    Syntactic,
    Semantic,
    Structural,
}

impl FeatureSpace {
    /// Every space, in category order. Useful for iteration in reports.
    pub const ALL: [FeatureSpace; 17] = [
        FeatureSpace::Un,
        FeatureSpace::Bi,
        FeatureSpace::Tr,
        FeatureSpace::Ww,
        FeatureSpace::Ws,
        FeatureSpace::Ql,
        FeatureSpace::Tu,
        FeatureSpace::Pt,
        FeatureSpace::Hw,
        FeatureSpace::Ht,
        FeatureSpace::Fw,
        FeatureSpace::Hh,
        FeatureSpace::Ne,
        FeatureSpace::Hn,
        FeatureSpace::StDp,
        FeatureSpace::StDr,
        FeatureSpace::StNer,
    ];

    /// Stable lowercase code used in serialized keys and CLI flags.
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSpace::Un => "un",
            FeatureSpace::Bi => "bi",
            FeatureSpace::Tr => "tr",
            FeatureSpace::Ww => "ww",
            FeatureSpace::Ws => "ws",
            FeatureSpace::Ql => "ql",
            FeatureSpace::Tu => "tu",
            FeatureSpace::Pt => "pt",
            FeatureSpace::Hw => "hw",
            FeatureSpace::Ht => "ht",
            FeatureSpace::Fw => "fw",
            FeatureSpace::Hh => "hh",
            FeatureSpace::Ne => "ne",
            FeatureSpace::Hn => "hn",
            FeatureSpace::StDp => "st_dp",
            FeatureSpace::StDr => "st_dr",
            FeatureSpace::StNer => "st_ner",
        }
    }

    /// Parses a lowercase space code as produced by [`FeatureSpace::as_str`].
    pub fn parse(code: &str) -> Option<FeatureSpace> {
        FeatureSpace::ALL
            .iter()
            .copied()
            .find(|space| space.as_str() == code)
    }

    /// The category this space belongs to.
    pub fn category(self) -> FeatureCategory {
        match self {
            FeatureSpace::Un
            | FeatureSpace::Bi
            | FeatureSpace::Tr
            | FeatureSpace::Ww
            | FeatureSpace::Ws
            | FeatureSpace::Ql => FeatureCategory::Lexical,
            FeatureSpace::Tu
            | FeatureSpace::Pt
            | FeatureSpace::Hw
            | FeatureSpace::Ht
            | FeatureSpace::Fw => FeatureCategory::Syntactic,
            FeatureSpace::Hh | FeatureSpace::Ne | FeatureSpace::Hn => FeatureCategory::Semantic,
            FeatureSpace::StDp | FeatureSpace::StDr | FeatureSpace::StNer => {
                FeatureCategory::Structural
            }
        }
    }
}

impl fmt::Display for FeatureSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FeatureCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureCategory::Lexical => "lexical",
            FeatureCategory::Syntactic => "syntactic",
            FeatureCategory::Semantic => "semantic",
            FeatureCategory::Structural => "structural",
        }
    }

    /// The spaces making up this category, in report order.
    pub fn spaces(self) -> &'static [FeatureSpace] {
        match self {
            FeatureCategory::Lexical => &[
                FeatureSpace::Un,
                FeatureSpace::Bi,
                FeatureSpace::Tr,
                FeatureSpace::Ww,
                FeatureSpace::Ws,
                FeatureSpace::Ql,
            ],
            FeatureCategory::Syntactic => &[
                FeatureSpace::Tu,
                FeatureSpace::Pt,
                FeatureSpace::Hw,
                FeatureSpace::Ht,
                FeatureSpace::Fw,
            ],
            FeatureCategory::Semantic => {
                &[FeatureSpace::Hh, FeatureSpace::Ne, FeatureSpace::Hn]
            }
            FeatureCategory::Structural => &[
                FeatureSpace::StDp,
                FeatureSpace::StDr,
                FeatureSpace::StNer,
            ],
        }
    }
}

impl fmt::Display for FeatureCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single feature: the space it lives in plus its name within that space.
///
/// Ordering compares `(space code, name)`, which coincides with lexicographic
/// order of the serialized `"space:name"` form because no space code is a
/// prefix of another.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureKey {
    pub space: FeatureSpace,
    pub name: String,
}

impl FeatureKey {
    pub fn new(space: FeatureSpace, name: impl Into<String>) -> FeatureKey {
        FeatureKey {
            space,
            name: name.into(),
        }
    }
}

impl PartialOrd for FeatureKey {
    fn partial_cmp(&self, other: &FeatureKey) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FeatureKey {
    fn cmp(&self, other: &FeatureKey) -> std::cmp::Ordering {
        (self.space.as_str(), self.name.as_str()).cmp(&(other.space.as_str(), other.name.as_str()))
    }
}

impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.space, self.name)
    }
}

/// Exact rational feature weight.
pub type Weight = Rational64;

/// Sparse feature vector: `(space, name) -> weight`, no zero entries.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeatureVector {
    entries: BTreeMap<FeatureKey, Weight>,
}

impl FeatureVector {
    pub fn new() -> FeatureVector {
        FeatureVector::default()
    }

    /// Adds `weight` to the entry for `key`, creating it if absent.
    ///
    /// Zero increments are ignored so the no-zero-entries invariant holds by
    /// construction. Negative weights are a caller bug.
    pub fn add(&mut self, key: FeatureKey, weight: Weight) {
        debug_assert!(!weight.is_negative(), "feature weights are non-negative");
        if weight.is_zero() {
            return;
        }
        *self.entries.entry(key).or_insert_with(Weight::zero) += weight;
    }

    /// Sets the entry for `key` to exactly `weight`, replacing any previous
    /// value. Zero weights remove the entry instead.
    pub fn set(&mut self, key: FeatureKey, weight: Weight) {
        debug_assert!(!weight.is_negative(), "feature weights are non-negative");
        if weight.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, weight);
        }
    }

    pub fn get(&self, key: &FeatureKey) -> Option<Weight> {
        self.entries.get(key).copied()
    }

    pub fn contains(&self, key: &FeatureKey) -> bool {
        self.entries.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Iterates entries in sorted key order.
    pub fn iter(&self) -> impl Iterator<Item = (&FeatureKey, &Weight)> {
        self.entries.iter()
    }

    /// Iterates the entries of one space, in sorted name order.
    pub fn iter_space(&self, space: FeatureSpace) -> impl Iterator<Item = (&FeatureKey, &Weight)> {
        self.entries.iter().filter(move |(k, _)| k.space == space)
    }

    /// Number of entries in one space.
    pub fn space_len(&self, space: FeatureSpace) -> usize {
        self.iter_space(space).count()
    }

    /// A new vector containing only the entries of `space`.
    pub fn restrict(&self, space: FeatureSpace) -> FeatureVector {
        let entries = self
            .entries
            .iter()
            .filter(|(k, _)| k.space == space)
            .map(|(k, w)| (k.clone(), *w))
            .collect();
        FeatureVector { entries }
    }

    /// Merges `other` into `self`, summing weights on shared keys.
    pub fn merge(&mut self, other: &FeatureVector) {
        for (key, weight) in other.iter() {
            self.add(key.clone(), *weight);
        }
    }

    /// Sum of all weights.
    pub fn total_weight(&self) -> Weight {
        self.entries.values().copied().sum()
    }
}

impl FromIterator<(FeatureKey, Weight)> for FeatureVector {
    fn from_iter<T: IntoIterator<Item = (FeatureKey, Weight)>>(iter: T) -> FeatureVector {
        let mut fv = FeatureVector::new();
        for (key, weight) in iter {
            fv.add(key, weight);
        }
        fv
    }
}

/// Renders a rational weight as a decimal with at most 12 significant digits.
///
/// The rounded decimal is parsed back into an `f64` so that serde_json emits
/// its shortest representation; two equal rationals always serialize to the
/// same byte sequence.
pub fn weight_to_f64(weight: Weight) -> f64 {
    let raw = weight.to_f64().unwrap_or(0.0);
    if raw == 0.0 || !raw.is_finite() {
        return 0.0;
    }
    // Round to 12 significant digits via exponential formatting.
    let formatted = format!("{raw:.11e}");
    formatted.parse::<f64>().unwrap_or(raw)
}

impl Serialize for FeatureVector {
    fn serialize<S>(&self, serializer: S) -> Result<S::Ok, S::Error>
    where
        S: serde::Serializer,
    {
        let mut map = serializer.serialize_map(Some(self.entries.len()))?;
        for (key, weight) in &self.entries {
            map.serialize_entry(&key.to_string(), &weight_to_f64(*weight))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for FeatureVector {
    fn deserialize<D>(deserializer: D) -> Result<FeatureVector, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        use serde::de::Error;
        let raw: BTreeMap<String, serde_json::Value> = BTreeMap::deserialize(deserializer)?;
        let mut fv = FeatureVector::new();
        for (key, value) in raw {
            let (space_code, name) = key
                .split_once(':')
                .ok_or_else(|| D::Error::custom(format!("feature key `{key}` lacks a `:`")))?;
            let space = FeatureSpace::parse(space_code)
                .ok_or_else(|| D::Error::custom(format!("unknown feature space `{space_code}`")))?;
            let weight = value
                .as_f64()
                .and_then(decimal_to_rational)
                .ok_or_else(|| D::Error::custom(format!("bad weight for `{key}`")))?;
            fv.set(FeatureKey::new(space, name), weight);
        }
        Ok(fv)
    }
}

/// Converts a non-negative decimal into an exact rational by scaling the
/// shortest decimal representation. Returns `None` for values that cannot be
/// represented (negative, non-finite, or too many digits for `i64`).
fn decimal_to_rational(value: f64) -> Option<Weight> {
    if !value.is_finite() || value < 0.0 {
        return None;
    }
    if value == 0.0 {
        return Some(Weight::zero());
    }
    let text = format!("{value}");
    let (mantissa, exponent) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (m.to_string(), e.parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i.to_string(), f.to_string()),
        None => (mantissa, String::new()),
    };
    let digits: i64 = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let mut ratio = Rational64::from_integer(digits);
    let ten = Rational64::from_integer(10);
    for _ in 0..scale.abs() {
        if scale > 0 {
            ratio *= ten;
        } else {
            ratio /= ten;
        }
    }
    Some(ratio)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_sort_like_their_serialized_form() {
        let mut fv = FeatureVector::new();
        fv.add(FeatureKey::new(FeatureSpace::Ww, "which"), Weight::from_integer(1));
        fv.add(FeatureKey::new(FeatureSpace::Un, "which"), Weight::new(1, 14));
        fv.add(FeatureKey::new(FeatureSpace::StDr, "a|dobj|b"), Weight::from_integer(1));
        fv.add(FeatureKey::new(FeatureSpace::StDp, "a|dobj|b"), Weight::from_integer(1));
        let keys: Vec<String> = fv.iter().map(|(k, _)| k.to_string()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn add_accumulates_and_skips_zero() {
        let mut fv = FeatureVector::new();
        let key = FeatureKey::new(FeatureSpace::Un, "of");
        fv.add(key.clone(), Weight::new(1, 14));
        fv.add(key.clone(), Weight::new(1, 14));
        fv.add(FeatureKey::new(FeatureSpace::Un, "gone"), Weight::zero());
        assert_eq!(fv.get(&key), Some(Weight::new(2, 14)));
        assert_eq!(fv.len(), 1);
    }

    #[test]
    fn restrict_keeps_only_requested_space() {
        let mut fv = FeatureVector::new();
        fv.add(FeatureKey::new(FeatureSpace::Un, "a"), Weight::from_integer(1));
        fv.add(FeatureKey::new(FeatureSpace::Bi, "a_b"), Weight::from_integer(1));
        let only_bi = fv.restrict(FeatureSpace::Bi);
        assert_eq!(only_bi.len(), 1);
        assert!(only_bi.contains(&FeatureKey::new(FeatureSpace::Bi, "a_b")));
    }

    #[test]
    fn serializes_sorted_keys_with_decimal_weights() {
        let mut fv = FeatureVector::new();
        fv.add(FeatureKey::new(FeatureSpace::Un, "of"), Weight::new(2, 14));
        fv.add(FeatureKey::new(FeatureSpace::Bi, "of_telangana"), Weight::new(1, 14));
        let json = serde_json::to_string(&fv).unwrap();
        assert_eq!(
            json,
            "{\"bi:of_telangana\":0.0714285714286,\"un:of\":0.142857142857}"
        );
    }

    #[test]
    fn deserializes_simple_decimal_weights_exactly() {
        let fv: FeatureVector =
            serde_json::from_str("{\"ne:location:telangana\":1.0,\"un:of\":0.25}").unwrap();
        assert_eq!(
            fv.get(&FeatureKey::new(FeatureSpace::Ne, "location:telangana")),
            Some(Weight::from_integer(1))
        );
        assert_eq!(
            fv.get(&FeatureKey::new(FeatureSpace::Un, "of")),
            Some(Weight::new(1, 4))
        );
    }

    #[test]
    fn space_codes_roundtrip() {
        for space in FeatureSpace::ALL {
            assert_eq!(FeatureSpace::parse(space.as_str()), Some(space));
        }
        assert_eq!(FeatureSpace::parse("nope"), None);
    }
}
