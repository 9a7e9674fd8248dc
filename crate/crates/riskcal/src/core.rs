//! Domain vocabulary shared by every other module: calibration datasets,
//! score and loss functions, and the threshold grid that parametrizes the
//! family of prediction sets.
//!
//! A prediction set for a planar regression model `f` is the ball
//! `{ y : score(y, f(x)) <= lambda }`. The miscoverage loss is the indicator
//! that the true label falls outside that ball; it is bounded in `[0, 1]`
//! and non-increasing in `lambda`, which is what the confidence-bound
//! machinery in [`crate::bounds`] relies on.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A planar position (meters).
pub type Position = [f64; 2];

/// Error score between a candidate label and a model prediction.
///
/// Implementations must be nonnegative and vanish when the two arguments
/// coincide. Inputs are assumed finite; datasets validate this at
/// construction so inner loops stay infallible.
pub trait ScoreFunction: Send + Sync {
    fn score(&self, candidate: Position, prediction: Position) -> f64;
}

/// Euclidean distance between candidate and prediction. With this score the
/// prediction set is a ball of radius `lambda` around the prediction, and
/// the set's radius (the inefficiency of a calibrated result) equals the
/// selected threshold.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct EuclideanScore;

impl ScoreFunction for EuclideanScore {
    fn score(&self, candidate: Position, prediction: Position) -> f64 {
        let dx = candidate[0] - prediction[0];
        let dy = candidate[1] - prediction[1];
        (dx * dx + dy * dy).sqrt()
    }
}

/// Validated Euclidean score.
///
/// Returns an error if any coordinate is non-finite.
pub fn euclidean_score(candidate: Position, prediction: Position) -> Result<f64> {
    for v in candidate.iter().chain(prediction.iter()) {
        if !v.is_finite() {
            return Err(Error::invalid(format!(
                "euclidean_score requires finite inputs, got {v}"
            )));
        }
    }
    Ok(EuclideanScore.score(candidate, prediction))
}

/// Set-valued loss `l(y, Gamma_lambda(x))`, bounded in `[0, 1]` and
/// non-increasing in `lambda` for fixed `(y, f(x))`.
pub trait LossFunction: Send + Sync {
    fn loss(&self, label: Position, prediction: Position, lambda: f64) -> f64;
}

/// Indicator that the label falls outside the threshold-`lambda` set.
/// A score exactly equal to `lambda` counts as covered (loss 0).
#[derive(Debug, Clone, Copy, Default)]
pub struct MiscoverageLoss<S = EuclideanScore> {
    score: S,
}

impl<S: ScoreFunction> MiscoverageLoss<S> {
    pub fn new(score: S) -> Self {
        Self { score }
    }
}

impl<S: ScoreFunction> LossFunction for MiscoverageLoss<S> {
    fn loss(&self, label: Position, prediction: Position, lambda: f64) -> f64 {
        if self.score.score(label, prediction) <= lambda {
            0.0
        } else {
            1.0
        }
    }
}

/// Validated miscoverage loss: 0 if `score(label, prediction) <= lambda`,
/// else 1.
pub fn miscoverage_loss(
    label: Position,
    prediction: Position,
    lambda: f64,
    score: &dyn ScoreFunction,
) -> Result<f64> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::invalid(format!(
            "miscoverage_loss requires lambda >= 0, got {lambda}"
        )));
    }
    for v in label.iter().chain(prediction.iter()) {
        if !v.is_finite() {
            return Err(Error::invalid("miscoverage_loss requires finite inputs"));
        }
    }
    Ok(if score.score(label, prediction) <= lambda {
        0.0
    } else {
        1.0
    })
}

fn validate_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("{what} contains non-finite entries")));
    }
    Ok(())
}

/// Labeled calibration samples: feature rows paired with planar positions.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: DMatrix<f64>,
    labels: DMatrix<f64>,
}

impl LabeledDataset {
    /// `features` is `n x m`, `labels` is `n x 2`; both must be finite and
    /// nonempty with matching row counts.
    pub fn new(features: DMatrix<f64>, labels: DMatrix<f64>) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::invalid("labeled dataset must have at least one row"));
        }
        if features.nrows() != labels.nrows() {
            return Err(Error::invalid(format!(
                "feature rows ({}) != label rows ({})",
                features.nrows(),
                labels.nrows()
            )));
        }
        if labels.ncols() != 2 {
            return Err(Error::invalid(format!(
                "labels must have 2 columns, got {}",
                labels.ncols()
            )));
        }
        validate_finite(&features, "features")?;
        validate_finite(&labels, "labels")?;
        Ok(Self { features, labels })
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires n >= 1
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &DMatrix<f64> {
        &self.labels
    }

    pub fn label(&self, row: usize) -> Position {
        [self.labels[(row, 0)], self.labels[(row, 1)]]
    }

    /// New dataset containing the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("subset requires at least one row"));
        }
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.len()) {
            return Err(Error::invalid(format!(
                "subset row {bad} out of range for dataset of {} rows",
                self.len()
            )));
        }
        Ok(Self {
            features: self.features.select_rows(rows),
            labels: self.labels.select_rows(rows),
        })
    }

    /// Drop the labels. Used when a labeled pool stands in for unlabeled
    /// calibration data.
    pub fn into_unlabeled(self) -> UnlabeledDataset {
        UnlabeledDataset {
            features: self.features,
        }
    }
}

/// Unlabeled calibration samples. The type exposes no label accessor, so
/// code paths that consume it cannot leak label information.
#[derive(Debug, Clone, PartialEq)]
pub struct UnlabeledDataset {
    features: DMatrix<f64>,
}

impl UnlabeledDataset {
    pub fn new(features: DMatrix<f64>) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::invalid(
                "unlabeled dataset must have at least one row",
            ));
        }
        validate_finite(&features, "features")?;
        Ok(Self { features })
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("subset requires at least one row"));
        }
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.len()) {
            return Err(Error::invalid(format!(
                "subset row {bad} out of range for dataset of {} rows",
                self.len()
            )));
        }
        Ok(Self {
            features: self.features.select_rows(rows),
        })
    }
}

/// Strictly increasing grid of candidate thresholds, starting at or above 0.
///
/// The continuum of thresholds is discretized on the observed calibration
/// scores: a test point's loss can only change value at a grid point built
/// from its own score, so a finer grid cannot change which observed losses
/// flip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGrid {
    values: Vec<f64>,
}

impl ThresholdGrid {
    /// Builds the grid from observed scores: sorted unique scores, with 0
    /// prepended and `max(scores) + padding` appended (deduplicated).
    pub fn from_scores(scores: &[f64], padding: f64) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::invalid("cannot build a grid from an empty score list"));
        }
        if !padding.is_finite() || padding < 0.0 {
            return Err(Error::invalid(format!(
                "grid padding must be a nonnegative real, got {padding}"
            )));
        }
        if scores.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::invalid("scores must be nonnegative and finite"));
        }
        let mut values: Vec<f64> = Vec::with_capacity(scores.len() + 2);
        values.push(0.0);
        values.extend_from_slice(scores);
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        values.push(max + padding);
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
        values.dedup();
        Ok(Self { values })
    }

    /// Grid from explicit values; must be strictly increasing and start at
    /// or above 0.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("threshold grid must be nonempty"));
        }
        if values[0] < 0.0 || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "threshold grid values must be finite and nonnegative",
            ));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("threshold grid must be strictly increasing"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("nonempty grid")
    }

    /// Evenly thinned copy with at most `max_len` values, always keeping the
    /// first and last grid points. Thinning trades threshold resolution for
    /// compute; any sub-grid remains valid because confidence bounds are
    /// pointwise per grid value.
    pub fn thinned(&self, max_len: usize) -> Result<Self> {
        if max_len < 2 {
            return Err(Error::invalid("thinned grid needs at least 2 points"));
        }
        let n = self.values.len();
        if n <= max_len {
            return Ok(self.clone());
        }
        let mut values = Vec::with_capacity(max_len);
        for i in 0..max_len {
            let idx = (i * (n - 1)) / (max_len - 1);
            values.push(self.values[idx]);
        }
        values.dedup();
        Ok(Self { values })
    }
}
