//! `riskcal`: calibration of risk-controlling prediction sets from scarce
//! labeled data plus abundant unlabeled data.
//!
//! Given a pre-trained regression model `f` mapping features to planar
//! positions, the library selects a threshold `lambda` so that the ball
//! `{ y : ||y - f(x)|| <= lambda }` misses the true label with risk at most
//! `alpha`, with probability at least `1 - delta` over the calibration data.
//! Four calibration strategies are implemented:
//!
//! - **RCPS** — empirical risk on labeled data plus a betting (WSR) or
//!   Hoeffding upper confidence bound.
//! - **RCPS-PPI** — pseudo-labels from an auxiliary predictor on unlabeled
//!   data, debiased with a correction term from held-out labeled data.
//! - **RCPS-CPPI** — K-fold cross-fitting so every labeled sample serves
//!   both predictor training (in K-1 folds) and bias correction (in its own
//!   fold), with per-fold bounds at level `delta / K` combined by a minimum.
//! - **SS** — a semi-supervised pooling baseline with no correction and no
//!   guarantee (negative control).
//!
//! Modules: [`core`] holds the domain vocabulary, [`bounds`] the confidence
//! bounds, [`estimators`] the risk estimators, [`calibrate`] the end-to-end
//! calibration drivers, [`models`] the base/auxiliary predictors, and
//! [`data`] ingestion, splits, and synthetic tasks with a true-risk oracle.

pub mod bounds;
pub mod calibrate;
pub mod core;
pub mod data;
pub mod error;
pub mod estimators;
pub mod models;

pub use error::{Error, Result};

/// Mixes a master seed with a sequence of tags into a new 64-bit seed.
///
/// This is the documented seed-splitting rule used everywhere a run derives
/// sub-streams (shuffles, model init, trials): SplitMix64 applied to the
/// master seed and each tag in turn. Deriving seeds this way keeps parallel
/// trials deterministic regardless of scheduling.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let mut state = splitmix64(master);
    for &tag in tags {
        state = splitmix64(state ^ tag.wrapping_mul(0xA24B_AED4_963E_E407));
    }
    state
}
