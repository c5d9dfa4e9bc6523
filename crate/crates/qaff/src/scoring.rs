//! Question/document alignment scoring.
//!
//! Each feature space yields one overlap score: how much of the question's
//! feature inventory reappears in the document, as an exact fraction. Space
//! scores average into per-category values, and the three non-structural
//! category averages combine with the structural weight into a single
//! feature-form score, either linearly or through a log-product. A small
//! hand-rolled OLS routine supports regression-weighted combinations.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{weight_to_f64, FeatureSpace, FeatureVector, Weight};

/// Smoothing constant keeping log-product scores finite at zero overlap.
pub const EPSILON: f64 = 1e-9;

/// Errors raised by scoring operations.
#[derive(Debug, Error, PartialEq)]
pub enum ScoringError {
    #[error("overlap denominator for {space} is zero")]
    ZeroDenominator { space: FeatureSpace },
    #[error("cannot average an empty score list")]
    EmptyList,
    #[error("category inputs to ff_score must be non-negative")]
    NegativeInput,
    #[error("need at least {needed} samples for {predictors} predictors, got {got}")]
    TooFewSamples {
        needed: usize,
        got: usize,
        predictors: usize,
    },
    #[error("design matrix is rank deficient")]
    RankDeficient,
}

/// Overlap of one feature space, kept as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverlapScore {
    pub space: FeatureSpace,
    pub numerator: i64,
    pub denominator: i64,
}

impl OverlapScore {
    pub fn value(&self) -> Weight {
        Weight::new(self.numerator, self.denominator)
    }
}

impl fmt::Display for OverlapScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}/{}", self.space, self.numerator, self.denominator)
    }
}

/// Scores one feature space of a question against a document vector.
///
/// The default rule counts question keys of `space` that also appear in the
/// document and divides by the question length `q_len`. Three spaces differ:
///
/// * QL scores `q_len / (q_len + 1)`, a pure length prior.
/// * WW scores `1 / q_len` when the question's wh-word entry is one of the
///   seven true wh-words, `0 / q_len` when it is `rest` or missing.
/// * The semantic spaces (HH, NE, HN) divide by the question's own key
///   count in that space instead of `q_len`, since hypernym chains and
///   entity inventories are not length-bound.
pub fn overlap_score(
    space: FeatureSpace,
    q_fv: &FeatureVector,
    d_fv: &FeatureVector,
    q_len: i64,
) -> Result<OverlapScore, ScoringError> {
    let shared = || {
        q_fv.iter_space(space)
            .filter(|(key, _)| d_fv.contains(key))
            .count() as i64
    };
    let (numerator, denominator) = match space {
        FeatureSpace::Ql => (q_len, q_len + 1),
        FeatureSpace::Ww => {
            let has_wh_word = q_fv
                .iter_space(FeatureSpace::Ww)
                .any(|(key, _)| key.name != "rest");
            (i64::from(has_wh_word), q_len)
        }
        FeatureSpace::Hh | FeatureSpace::Ne | FeatureSpace::Hn => {
            (shared(), q_fv.space_len(space) as i64)
        }
        _ => (shared(), q_len),
    };
    if denominator <= 0 {
        return Err(ScoringError::ZeroDenominator { space });
    }
    Ok(OverlapScore {
        space,
        numerator,
        denominator,
    })
}

/// Exact mean of the given overlap scores. All scores must come from one
/// category; the list must be non-empty.
pub fn category_average(scores: &[OverlapScore]) -> Result<Weight, ScoringError> {
    if scores.is_empty() {
        return Err(ScoringError::EmptyList);
    }
    debug_assert!(
        scores
            .iter()
            .all(|s| s.space.category() == scores[0].space.category()),
        "scores must share one category"
    );
    let sum: Weight = scores.iter().map(OverlapScore::value).sum();
    Ok(sum / Weight::from_integer(scores.len() as i64))
}

/// How category averages combine into a feature-form score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FfMode {
    Linear,
    #[default]
    LogProduct,
}

impl FfMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FfMode::Linear => "linear",
            FfMode::LogProduct => "log_product",
        }
    }

    /// True when smaller scores indicate better alignment.
    pub fn smaller_is_better(self) -> bool {
        matches!(self, FfMode::LogProduct)
    }
}

impl fmt::Display for FfMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FfMode {
    type Err = String;

    fn from_str(s: &str) -> Result<FfMode, String> {
        match s {
            "linear" => Ok(FfMode::Linear),
            "log_product" => Ok(FfMode::LogProduct),
            other => Err(format!("unknown mode `{other}` (use linear or log_product)")),
        }
    }
}

/// Combines category averages and the structural weight into one score.
///
/// `LINEAR` computes `le + sy + se * st`: higher is better. `LOG_PRODUCT`
/// computes `-(log10(le + e) + log10(sy + e) + log10(se + e)) * max(st, 1)`
/// with `e` = [`EPSILON`]: smaller is better, and the structural weight
/// amplifies rather than dilutes the signal.
pub fn ff_score(
    le: Weight,
    sy: Weight,
    se: Weight,
    st: u64,
    mode: FfMode,
) -> Result<f64, ScoringError> {
    if le.is_negative() || sy.is_negative() || se.is_negative() {
        return Err(ScoringError::NegativeInput);
    }
    let score = match mode {
        FfMode::Linear => {
            let combined = le + sy + se * Weight::from_integer(st as i64);
            combined.to_f64().unwrap_or(f64::MAX)
        }
        FfMode::LogProduct => {
            let log_sum = (le.to_f64().unwrap_or(0.0) + EPSILON).log10()
                + (sy.to_f64().unwrap_or(0.0) + EPSILON).log10()
                + (se.to_f64().unwrap_or(0.0) + EPSILON).log10();
            -log_sum * st.max(1) as f64
        }
    };
    Ok(score)
}

/// A scored question/document pair: the three category averages, the
/// structural weight, and the combined feature-form score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureFormScore {
    #[serde(serialize_with = "serialize_weight")]
    pub le: Weight,
    #[serde(serialize_with = "serialize_weight")]
    pub sy: Weight,
    #[serde(serialize_with = "serialize_weight")]
    pub se: Weight,
    pub st: u64,
    pub ff: f64,
    pub mode: FfMode,
}

pub(crate) fn serialize_weight<S: serde::Serializer>(w: &Weight, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(weight_to_f64(*w))
}

impl FeatureFormScore {
    /// Scores a triple of category averages under `mode`.
    pub fn compute(
        le: Weight,
        sy: Weight,
        se: Weight,
        st: u64,
        mode: FfMode,
    ) -> Result<FeatureFormScore, ScoringError> {
        let ff = ff_score(le, sy, se, st, mode)?;
        Ok(FeatureFormScore {
            le,
            sy,
            se,
            st,
            ff,
            mode,
        })
    }
}

/// An ordinary-least-squares fit with intercept.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub r_squared: f64,
}

impl RegressionFit {
    /// Predicted response for one predictor row.
    pub fn predict(&self, predictors: &[f64]) -> f64 {
        debug_assert_eq!(predictors.len(), self.coefficients.len());
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(predictors)
                .map(|(c, x)| c * x)
                .sum::<f64>()
    }
}

/// Fits `y = b0 + b1*x1 + ... + bk*xk` by solving the normal equations with
/// Gaussian elimination and partial pivoting.
///
/// Requires at least `k + 1` samples. A (numerically) singular design is
/// reported as [`ScoringError::RankDeficient`]. When the responses are
/// constant, `r_squared` is defined as 0.
pub fn fit_ols(samples: &[(Vec<f64>, f64)]) -> Result<RegressionFit, ScoringError> {
    let predictors = samples.first().map(|(x, _)| x.len()).unwrap_or(0);
    assert!(
        samples.iter().all(|(x, _)| x.len() == predictors),
        "all samples must have the same number of predictors"
    );
    let unknowns = predictors + 1;
    if samples.len() < unknowns {
        return Err(ScoringError::TooFewSamples {
            needed: unknowns,
            got: samples.len(),
            predictors,
        });
    }

    // Normal equations: (X^T X) b = X^T y, with a leading intercept column.
    let mut matrix = vec![vec![0.0f64; unknowns]; unknowns];
    let mut rhs = vec![0.0f64; unknowns];
    for (x, y) in samples {
        let mut row = Vec::with_capacity(unknowns);
        row.push(1.0);
        row.extend_from_slice(x);
        for i in 0..unknowns {
            for j in 0..unknowns {
                matrix[i][j] += row[i] * row[j];
            }
            rhs[i] += row[i] * y;
        }
    }

    let scale = matrix
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    let tolerance = 1e-10 * scale;

    // Gaussian elimination with partial pivoting.
    for col in 0..unknowns {
        let pivot_row = (col..unknowns)
            .max_by(|&a, &b| matrix[a][col].abs().total_cmp(&matrix[b][col].abs()))
            .expect("non-empty range");
        if matrix[pivot_row][col].abs() < tolerance {
            return Err(ScoringError::RankDeficient);
        }
        matrix.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for row in col + 1..unknowns {
            let (pivot_rows, elim_rows) = matrix.split_at_mut(row);
            let pivot = &pivot_rows[col];
            let target = &mut elim_rows[0];
            let factor = target[col] / pivot[col];
            for (entry, pivot_entry) in target[col..].iter_mut().zip(&pivot[col..]) {
                *entry -= factor * pivot_entry;
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut solution = vec![0.0f64; unknowns];
    for row in (0..unknowns).rev() {
        let mut value = rhs[row];
        for col in row + 1..unknowns {
            value -= matrix[row][col] * solution[col];
        }
        solution[row] = value / matrix[row][row];
    }

    let intercept = solution[0];
    let coefficients = solution[1..].to_vec();
    let fit = RegressionFit {
        intercept,
        coefficients,
        r_squared: 0.0,
    };
    let mean_y = samples.iter().map(|(_, y)| y).sum::<f64>() / samples.len() as f64;
    let ss_tot: f64 = samples.iter().map(|(_, y)| (y - mean_y).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 {
        0.0
    } else {
        let ss_res: f64 = samples
            .iter()
            .map(|(x, y)| (y - fit.predict(x)).powi(2))
            .sum();
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(RegressionFit {
        r_squared,
        ..fit
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureKey;
    use num_traits::One;

    fn fv(space: FeatureSpace, names: &[&str]) -> FeatureVector {
        let mut fv = FeatureVector::new();
        for name in names {
            fv.set(FeatureKey::new(space, *name), Weight::one());
        }
        fv
    }

    #[test]
    fn default_rule_counts_shared_keys_over_question_length() {
        let q = fv(FeatureSpace::Un, &["was", "brand", "ambassador", "of", "telangana", "which"]);
        let d = fv(FeatureSpace::Un, &["was", "brand", "ambassador", "of", "telangana", "mirza"]);
        let score = overlap_score(FeatureSpace::Un, &q, &d, 12).unwrap();
        assert_eq!((score.numerator, score.denominator), (5, 12));
    }

    #[test]
    fn question_length_space_is_a_pure_prior() {
        let q = fv(FeatureSpace::Ql, &["len"]);
        let d = FeatureVector::new();
        let score = overlap_score(FeatureSpace::Ql, &q, &d, 12).unwrap();
        assert_eq!((score.numerator, score.denominator), (12, 13));
    }

    #[test]
    fn wh_word_scores_presence_of_a_true_wh_word() {
        let d = FeatureVector::new();
        let which = fv(FeatureSpace::Ww, &["which"]);
        let score = overlap_score(FeatureSpace::Ww, &which, &d, 12).unwrap();
        assert_eq!((score.numerator, score.denominator), (1, 12));
        let rest = fv(FeatureSpace::Ww, &["rest"]);
        let score = overlap_score(FeatureSpace::Ww, &rest, &d, 12).unwrap();
        assert_eq!((score.numerator, score.denominator), (0, 12));
    }

    #[test]
    fn semantic_spaces_divide_by_question_inventory() {
        let q = fv(FeatureSpace::Hh, &["sportswoman", "athlete", "person"]);
        let d = fv(FeatureSpace::Hh, &["mirza", "athlete", "person"]);
        let score = overlap_score(FeatureSpace::Hh, &q, &d, 12).unwrap();
        assert_eq!((score.numerator, score.denominator), (2, 3));
        assert_eq!(score.value(), Weight::new(2, 3));
    }

    #[test]
    fn empty_semantic_inventory_is_a_zero_denominator() {
        let q = FeatureVector::new();
        let d = FeatureVector::new();
        assert_eq!(
            overlap_score(FeatureSpace::Hn, &q, &d, 12),
            Err(ScoringError::ZeroDenominator {
                space: FeatureSpace::Hn
            })
        );
    }

    #[test]
    fn lexical_average_matches_the_printed_value() {
        let scores = [
            (FeatureSpace::Un, 5, 12),
            (FeatureSpace::Bi, 3, 12),
            (FeatureSpace::Tr, 5, 12),
            (FeatureSpace::Ww, 1, 12),
            (FeatureSpace::Ws, 4, 12),
            (FeatureSpace::Ql, 12, 13),
        ]
        .map(|(space, numerator, denominator)| OverlapScore {
            space,
            numerator,
            denominator,
        });
        let avg = category_average(&scores).unwrap();
        assert_eq!(avg, Weight::new(21, 52));
        let printed = 0.403;
        assert!((avg.to_f64().unwrap() - printed).abs() <= 0.001);
    }

    #[test]
    fn semantic_average_matches_the_printed_value() {
        let scores = [
            (FeatureSpace::Hh, 2, 3),
            (FeatureSpace::Ne, 3, 5),
            (FeatureSpace::Hn, 2, 5),
        ]
        .map(|(space, numerator, denominator)| OverlapScore {
            space,
            numerator,
            denominator,
        });
        let avg = category_average(&scores).unwrap();
        assert_eq!(avg, Weight::new(5, 9));
        assert!((avg.to_f64().unwrap() - 0.556).abs() <= 0.001);
    }

    #[test]
    fn empty_average_is_an_error() {
        assert_eq!(category_average(&[]), Err(ScoringError::EmptyList));
    }

    #[test]
    fn linear_score_is_exact() {
        let ff = ff_score(
            Weight::new(403, 1000),
            Weight::new(335, 1000),
            Weight::new(556, 1000),
            1,
            FfMode::Linear,
        )
        .unwrap();
        assert_eq!(ff, 1.294);
    }

    #[test]
    fn log_product_score_matches_frozen_value() {
        let ff = ff_score(
            Weight::new(403, 1000),
            Weight::new(335, 1000),
            Weight::new(556, 1000),
            1,
            FfMode::LogProduct,
        )
        .unwrap();
        assert!((ff - 1.1245753520848272).abs() < 1e-12);
    }

    #[test]
    fn perfect_alignment_scores_near_zero_log_product() {
        let one = Weight::one();
        let ff = ff_score(one, one, one, 1, FfMode::LogProduct).unwrap();
        assert!(ff.abs() < 1e-6);
    }

    #[test]
    fn structural_weight_amplifies_log_product() {
        let half = Weight::new(1, 2);
        let at_one = ff_score(half, half, half, 1, FfMode::LogProduct).unwrap();
        let at_five = ff_score(half, half, half, 5, FfMode::LogProduct).unwrap();
        assert!((at_five - 5.0 * at_one).abs() < 1e-12);
        // Zero structural weight clamps to one rather than erasing the score.
        let at_zero = ff_score(half, half, half, 0, FfMode::LogProduct).unwrap();
        assert_eq!(at_zero, at_one);
    }

    #[test]
    fn negative_category_input_is_rejected() {
        assert_eq!(
            ff_score(Weight::new(-1, 2), Weight::one(), Weight::one(), 1, FfMode::Linear),
            Err(ScoringError::NegativeInput)
        );
    }

    #[test]
    fn ols_recovers_a_noiseless_plane() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let samples: Vec<(Vec<f64>, f64)> = (0..12)
            .map(|_| {
                let x1: f64 = rng.gen_range(-5.0..5.0);
                let x2: f64 = rng.gen_range(-5.0..5.0);
                (vec![x1, x2], 2.0 + 3.0 * x1 - 1.5 * x2)
            })
            .collect();
        let fit = fit_ols(&samples).unwrap();
        assert!((fit.intercept - 2.0).abs() < 1e-9);
        assert!((fit.coefficients[0] - 3.0).abs() < 1e-9);
        assert!((fit.coefficients[1] + 1.5).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_responses_fit_with_zero_r_squared() {
        let samples: Vec<(Vec<f64>, f64)> = (0..6)
            .map(|i| (vec![i as f64], 4.0))
            .collect();
        let fit = fit_ols(&samples).unwrap();
        assert!((fit.intercept - 4.0).abs() < 1e-9);
        assert!(fit.coefficients[0].abs() < 1e-9);
        assert_eq!(fit.r_squared, 0.0);
    }

    #[test]
    fn too_few_samples_is_an_error() {
        let samples = vec![(vec![1.0, 2.0], 3.0), (vec![2.0, 1.0], 4.0)];
        assert!(matches!(
            fit_ols(&samples),
            Err(ScoringError::TooFewSamples { needed: 3, got: 2, .. })
        ));
    }

    #[test]
    fn duplicate_predictor_columns_are_rank_deficient() {
        let samples: Vec<(Vec<f64>, f64)> = (0..8)
            .map(|i| {
                let x = i as f64;
                (vec![x, x], x * 2.0)
            })
            .collect();
        assert_eq!(fit_ols(&samples), Err(ScoringError::RankDeficient));
    }
}
