//! Pointwise upper confidence bounds on the mean of bounded i.i.d. samples.
//!
//! The workhorse is the Waudby-Smith–Ramdas (WSR) betting bound: a capital
//! process `K_i(R) = prod_{j<=i} (1 + nu_j (R - L_j))` is a nonnegative
//! martingale with initial value 1 when `R` is the true mean, so by Ville's
//! inequality the smallest `R` whose capital ever exceeds `1/delta` upper
//! bounds the mean with probability `1 - delta`. The bet sizes `nu_j` adapt
//! to the running variance, which makes the bound tight for low-variance
//! loss sequences. A Hoeffding bound is provided as a non-adaptive fallback.
//!
//! Prediction-powered risk terms live in `[-1, 2]` rather than `[0, 1]`;
//! [`rescaled_wsr_ucb`] maps them affinely onto the unit interval, bounds
//! the mapped mean, and maps back, which preserves coverage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bisection tolerance for inverting the capital process. The bound
/// is rounded up by this amount, never down.
pub const DEFAULT_BISECTION_TOLERANCE: f64 = 1e-6;

/// An ordered sequence of real samples with an a-priori known range.
///
/// The range must be known before seeing the data; estimating it from the
/// samples would void the coverage guarantee.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedSampleSequence {
    values: Vec<f64>,
    lower: f64,
    upper: f64,
}

impl BoundedSampleSequence {
    pub fn new(values: Vec<f64>, lower: f64, upper: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("sample sequence must be nonempty"));
        }
        if !lower.is_finite() || !upper.is_finite() || lower >= upper {
            return Err(Error::invalid(format!(
                "invalid sample range [{lower}, {upper}]"
            )));
        }
        if let Some(bad) = values
            .iter()
            .find(|v| !v.is_finite() || **v < lower || **v > upper)
        {
            return Err(Error::invalid(format!(
                "sample {bad} outside declared range [{lower}, {upper}]"
            )));
        }
        Ok(Self {
            values,
            lower,
            upper,
        })
    }

    /// Sequence with the unit range `[0, 1]`.
    pub fn unit(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 0.0, 1.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    fn is_unit_range(&self) -> bool {
        self.lower == 0.0 && self.upper == 1.0
    }
}

/// Which concentration bound to invert.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UcbMethod {
    Wsr,
    Hoeffding,
}

/// A configured upper-confidence-bound constructor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UcbSpec {
    pub method: UcbMethod,
    pub delta: f64,
    pub bisection_tolerance: f64,
}

impl UcbSpec {
    pub fn new(method: UcbMethod, delta: f64, bisection_tolerance: f64) -> Result<Self> {
        validate_delta(delta)?;
        if !bisection_tolerance.is_finite() || bisection_tolerance <= 0.0 {
            return Err(Error::invalid(format!(
                "bisection tolerance must be positive, got {bisection_tolerance}"
            )));
        }
        Ok(Self {
            method,
            delta,
            bisection_tolerance,
        })
    }

    pub fn wsr(delta: f64) -> Result<Self> {
        Self::new(UcbMethod::Wsr, delta, DEFAULT_BISECTION_TOLERANCE)
    }

    /// Same method and tolerance at a different confidence level (used for
    /// the per-fold `delta / K` allocation).
    pub fn at_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.method, delta, self.bisection_tolerance)
    }

    /// Upper confidence bound on the mean of `samples` at level `delta`.
    pub fn bound(&self, samples: &BoundedSampleSequence) -> Result<f64> {
        match self.method {
            UcbMethod::Wsr if samples.is_unit_range() => {
                wsr_ucb(samples, self.delta, self.bisection_tolerance)
            }
            UcbMethod::Wsr => rescaled_wsr_ucb(samples, self.delta, self.bisection_tolerance),
            UcbMethod::Hoeffding => hoeffding_ucb(samples, self.delta),
        }
    }
}

fn validate_delta(delta: f64) -> Result<()> {
    if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    Ok(())
}

/// Adaptive bet sizes `nu_i = min(1, sqrt(2 ln(1/delta) / (n sigma2_{i-1})))`
/// where `sigma2` is the regularized running variance with `sigma2_0 = 1/4`.
fn wsr_bets(values: &[f64], delta: f64) -> Vec<f64> {
    let n = values.len();
    let log_inv_delta = (1.0 / delta).ln();
    let mut bets = Vec::with_capacity(n);
    let mut sum = 0.0;
    let mut sum_sq_dev = 0.0;
    let mut sigma2_prev = 0.25;
    for (i, &v) in values.iter().enumerate() {
        let nu = (2.0 * log_inv_delta / (n as f64 * sigma2_prev))
            .sqrt()
            .min(1.0);
        bets.push(nu);
        sum += v;
        let count = i as f64 + 2.0; // regularized mean over i+1 samples
        let mu = (0.5 + sum) / count;
        sum_sq_dev += (v - mu) * (v - mu);
        sigma2_prev = (0.25 + sum_sq_dev) / count;
    }
    bets
}

/// `max_i log K_i(r)`; nondecreasing in `r`. Returns `-inf` only when every
/// prefix capital is wiped out before the running max turns positive.
fn max_log_capital(values: &[f64], bets: &[f64], r: f64) -> f64 {
    let mut acc: f64 = 0.0;
    let mut best = f64::NEG_INFINITY;
    for (&v, &nu) in values.iter().zip(bets) {
        let factor = 1.0 + nu * (r - v);
        if factor <= 0.0 {
            // capital hit zero; every later prefix stays at zero
            return best;
        }
        acc += factor.ln();
        if acc > best {
            best = acc;
        }
    }
    best
}

/// WSR upper confidence bound for samples in `[0, 1]`.
///
/// Returns `inf { R in [0, 1] : max_i K_i(R) > 1/delta }`, located by
/// bisection and rounded up by `tolerance`; returns 1 when no `R < 1`
/// accumulates enough capital. Guarantee: the true mean is at most the
/// returned value with probability `>= 1 - delta`.
pub fn wsr_ucb(samples: &BoundedSampleSequence, delta: f64, tolerance: f64) -> Result<f64> {
    validate_delta(delta)?;
    if !samples.is_unit_range() {
        return Err(Error::invalid(format!(
            "wsr_ucb requires range [0, 1]; got [{}, {}] (use rescaled_wsr_ucb)",
            samples.lower, samples.upper
        )));
    }
    if !tolerance.is_finite() || tolerance <= 0.0 {
        return Err(Error::invalid("bisection tolerance must be positive"));
    }
    let values = samples.values();
    let bets = wsr_bets(values, delta);
    let threshold = (1.0 / delta).ln();

    if max_log_capital(values, &bets, 1.0) <= threshold {
        return Ok(1.0);
    }
    // K_i(0) = prod (1 - nu_j L_j) <= 1 < 1/delta, so 0 is never rejected.
    debug_assert!(max_log_capital(values, &bets, 0.0) <= threshold);

    let mut lo = 0.0;
    let mut hi = 1.0;
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if max_log_capital(values, &bets, mid) > threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Hoeffding upper confidence bound:
/// `mean + (upper - lower) sqrt(ln(1/delta) / (2n))`.
pub fn hoeffding_ucb(samples: &BoundedSampleSequence, delta: f64) -> Result<f64> {
    validate_delta(delta)?;
    let n = samples.len() as f64;
    let width = samples.upper - samples.lower;
    Ok(samples.mean() + width * ((1.0 / delta).ln() / (2.0 * n)).sqrt())
}

/// WSR bound for samples in an arbitrary known range `[a, b]`: affinely maps
/// the samples onto `[0, 1]`, bounds the mapped mean, and maps back. The
/// affine map preserves the `1 - delta` coverage of the mean bound.
pub fn rescaled_wsr_ucb(samples: &BoundedSampleSequence, delta: f64, tolerance: f64) -> Result<f64> {
    validate_delta(delta)?;
    let a = samples.lower;
    let width = samples.upper - samples.lower;
    let mapped: Vec<f64> = samples
        .values()
        .iter()
        .map(|&x| ((x - a) / width).clamp(0.0, 1.0))
        .collect();
    let mapped = BoundedSampleSequence::unit(mapped)?;
    let inner_tolerance = (tolerance / width).max(1e-15);
    let u = wsr_ucb(&mapped, delta, inner_tolerance)?;
    Ok(a + width * u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Independent straight-line implementation: recomputes the betting
    /// recursion from the formulas and scans an R-grid of step `1e-4` for the
    /// first value whose running-max capital exceeds `1/delta`. Deliberately
    /// shares no code with the production path.
    fn wsr_grid_oracle(values: &[f64], delta: f64) -> f64 {
        let n = values.len();
        let mut mu_hat = vec![0.0; n];
        let mut sigma2_hat = vec![0.0; n];
        let mut cum = 0.0;
        for i in 0..n {
            cum += values[i];
            mu_hat[i] = (0.5 + cum) / ((i + 1) as f64 + 1.0);
        }
        let mut cum_dev = 0.0;
        for i in 0..n {
            cum_dev += (values[i] - mu_hat[i]).powi(2);
            sigma2_hat[i] = (0.25 + cum_dev) / ((i + 1) as f64 + 1.0);
        }
        let log_inv_delta = (1.0f64 / delta).ln();
        let mut nu = vec![0.0; n];
        for i in 0..n {
            let s2 = if i == 0 { 0.25 } else { sigma2_hat[i - 1] };
            nu[i] = (2.0 * log_inv_delta / (n as f64 * s2)).sqrt().min(1.0);
        }
        let steps = 10_000usize;
        for k in 0..=steps {
            let r = k as f64 / steps as f64;
            let mut log_cap = 0.0f64;
            let mut max_log_cap = f64::NEG_INFINITY;
            let mut wiped = false;
            for i in 0..n {
                let f = 1.0 + nu[i] * (r - values[i]);
                if f <= 0.0 {
                    wiped = true;
                    break;
                }
                log_cap += f.ln();
                max_log_cap = max_log_cap.max(log_cap);
            }
            let _ = wiped;
            if max_log_cap > log_inv_delta {
                return r;
            }
        }
        1.0
    }

    fn unit_seq(values: Vec<f64>) -> BoundedSampleSequence {
        BoundedSampleSequence::unit(values).unwrap()
    }

    #[test]
    fn all_ones_clamps_to_one() {
        for n in [1usize, 10, 500] {
            let s = unit_seq(vec![1.0; n]);
            assert_eq!(wsr_ucb(&s, 0.1, 1e-6).unwrap(), 1.0);
        }
    }

    #[test]
    fn all_zeros_matches_grid_oracle() {
        let values = vec![0.0; 100];
        let s = unit_seq(values.clone());
        let u = wsr_ucb(&s, 0.1, 1e-6).unwrap();
        let oracle = wsr_grid_oracle(&values, 0.1);
        assert!(u > 0.0 && u < 0.2, "u = {u}");
        assert!((u - oracle).abs() < 1e-3, "u = {u}, oracle = {oracle}");
    }

    #[test]
    fn bernoulli_sequence_matches_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let values: Vec<f64> = (0..1000)
            .map(|_| if rng.random::<f64>() < 0.3 { 1.0 } else { 0.0 })
            .collect();
        let s = unit_seq(values.clone());
        let u = wsr_ucb(&s, 0.1, 1e-6).unwrap();
        assert!(u > 0.3 && u < 0.38, "u = {u}");
        let oracle = wsr_grid_oracle(&values, 0.1);
        assert!((u - oracle).abs() < 1e-3, "u = {u}, oracle = {oracle}");
    }

    #[test]
    fn random_sequences_match_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..25 {
            let n = rng.random_range(5..400);
            let values: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let delta = [0.05, 0.1, 0.2][trial % 3];
            let u = wsr_ucb(&unit_seq(values.clone()), delta, 1e-6).unwrap();
            let oracle = wsr_grid_oracle(&values, delta);
            assert!(
                (u - oracle).abs() < 1e-3,
                "trial {trial}: u = {u}, oracle = {oracle}"
            );
        }
    }

    #[test]
    fn hoeffding_closed_form() {
        let s = unit_seq(vec![0.5; 100]);
        let expected = 0.5 + (10.0f64.ln() / 200.0).sqrt();
        let got = hoeffding_ucb(&s, 0.1).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 0.60729).abs() < 1e-5);
    }

    #[test]
    fn hoeffding_delta_near_one_returns_mean() {
        let s = unit_seq(vec![0.25, 0.75, 0.5]);
        let got = hoeffding_ucb(&s, 1.0 - 1e-12).unwrap();
        assert!((got - 0.5).abs() < 1e-6);
    }

    #[test]
    fn hoeffding_wide_range_closed_form() {
        let s = BoundedSampleSequence::new(vec![0.2; 50], -1.0, 2.0).unwrap();
        let expected = 0.2 + 3.0 * (50.0f64.ln() / 100.0).sqrt();
        let got = hoeffding_ucb(&s, 0.02).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 0.79337).abs() < 1e-4);
    }

    #[test]
    fn rescaled_is_identity_on_unit_range() {
        let values = vec![0.1, 0.9, 0.4, 0.2];
        let s = unit_seq(values.clone());
        let direct = wsr_ucb(&s, 0.1, 1e-6).unwrap();
        let rescaled = rescaled_wsr_ucb(&s, 0.1, 1e-6).unwrap();
        assert!((direct - rescaled).abs() < 1e-12);
    }

    #[test]
    fn rescaled_constant_at_lower_bound() {
        let s = BoundedSampleSequence::new(vec![-1.0, -1.0, -1.0], -1.0, 2.0).unwrap();
        let got = rescaled_wsr_ucb(&s, 0.1, 1e-6).unwrap();
        let inner = wsr_ucb(&unit_seq(vec![0.0, 0.0, 0.0]), 0.1, 1e-6 / 3.0).unwrap();
        assert!((got - (-1.0 + 3.0 * inner)).abs() < 1e-9);
    }

    #[test]
    fn rescaled_uniform_matches_oracle_after_mapping() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let values: Vec<f64> = (0..500).map(|_| rng.random_range(-1.0..2.0)).collect();
        let s = BoundedSampleSequence::new(values.clone(), -1.0, 2.0).unwrap();
        let got = rescaled_wsr_ucb(&s, 0.05, 1e-6).unwrap();
        let mapped: Vec<f64> = values.iter().map(|x| (x + 1.0) / 3.0).collect();
        let oracle = -1.0 + 3.0 * wsr_grid_oracle(&mapped, 0.05);
        assert!((got - oracle).abs() < 1e-3, "got = {got}, oracle = {oracle}");
    }

    #[test]
    fn monte_carlo_coverage_holds() {
        // Over T independent draws, the bound undershoots the true mean in
        // at most a delta + 2*sqrt(delta(1-delta)/T) fraction of trials.
        let t = 2000usize;
        let n = 200usize;
        let mu = 0.3;
        let delta = 0.1;
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let mut misses = 0usize;
        for _ in 0..t {
            let values: Vec<f64> = (0..n)
                .map(|_| if rng.random::<f64>() < mu { 1.0 } else { 0.0 })
                .collect();
            let u = wsr_ucb(&unit_seq(values), delta, 1e-6).unwrap();
            if u < mu {
                misses += 1;
            }
        }
        let rate = misses as f64 / t as f64;
        let slack = delta + 2.0 * (delta * (1.0 - delta) / t as f64).sqrt();
        assert!(rate <= slack, "miss rate {rate} exceeds {slack}");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(BoundedSampleSequence::unit(vec![]).is_err());
        assert!(BoundedSampleSequence::unit(vec![1.5]).is_err());
        assert!(BoundedSampleSequence::new(vec![0.0], 1.0, 0.0).is_err());
        let s = unit_seq(vec![0.5]);
        assert!(wsr_ucb(&s, 0.0, 1e-6).is_err());
        assert!(wsr_ucb(&s, 1.0, 1e-6).is_err());
        let wide = BoundedSampleSequence::new(vec![0.5], -1.0, 2.0).unwrap();
        assert!(wsr_ucb(&wide, 0.1, 1e-6).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // The bound never undershoots the sample mean by more than the
        // bisection tolerance (WSR) or at all (Hoeffding).
        #[test]
        fn ucb_dominates_mean(
            values in proptest::collection::vec(0.0..=1.0f64, 1..200),
            delta in 0.01..0.5f64,
        ) {
            let s = unit_seq(values);
            let mean = s.mean();
            let wsr = wsr_ucb(&s, delta, 1e-6).unwrap();
            prop_assert!(wsr >= mean - 1e-6, "wsr {} < mean {}", wsr, mean);
            let hoeff = hoeffding_ucb(&s, delta).unwrap();
            prop_assert!(hoeff >= mean);
        }

        // Smaller delta (more confidence) gives a larger bound.
        #[test]
        fn monotone_in_delta(
            values in proptest::collection::vec(0.0..=1.0f64, 2..150),
            d1 in 0.01..0.4f64,
            gap in 0.05..0.5f64,
        ) {
            let d2 = (d1 + gap).min(0.95);
            let s = unit_seq(values);
            let tight = wsr_ucb(&s, d1, 1e-7).unwrap();
            let loose = wsr_ucb(&s, d2, 1e-7).unwrap();
            prop_assert!(tight >= loose - 2e-7);
            let ht = hoeffding_ucb(&s, d1).unwrap();
            let hl = hoeffding_ucb(&s, d2).unwrap();
            prop_assert!(ht >= hl);
        }

        // rescaled_wsr_ucb(c x + d) = c * rescaled_wsr_ucb(x) + d for c > 0.
        #[test]
        fn affine_equivariance(
            values in proptest::collection::vec(0.0..=1.0f64, 2..100),
            c in 0.1..5.0f64,
            d in -3.0..3.0f64,
        ) {
            let base = unit_seq(values.clone());
            let u_base = rescaled_wsr_ucb(&base, 0.1, 1e-9).unwrap();
            let shifted: Vec<f64> = values.iter().map(|x| c * x + d).collect();
            let s = BoundedSampleSequence::new(shifted, d, c + d).unwrap();
            let u_shifted = rescaled_wsr_ucb(&s, 0.1, 1e-9).unwrap();
            prop_assert!(
                (u_shifted - (c * u_base + d)).abs() < 1e-6 * c.max(1.0),
                "{} vs {}", u_shifted, c * u_base + d
            );
        }
    }
}
