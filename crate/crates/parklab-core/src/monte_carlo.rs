//! Seeded Monte Carlo sampling of preference lists and coin flips, with
//! mergeable estimators for the parking probability and the last-car
//! preference histogram.
//!
//! Reproducibility contract: the generator is ChaCha8 keyed by
//! `seed_from_u64(seed)` with the 64-bit stream index selecting an
//! independent substream, so identical `RngSpec` values reproduce identical
//! samples bit for bit on every platform. Each trial draws all `m`
//! preferences first (one bounded-uniform draw per car), then coin flips
//! lazily, one per consulted car in car order; traces are therefore
//! reproducible regardless of where a trial fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Direction, DistributionVector, ModelParams, ParkingTrace, PreferenceList};
use crate::protocol::scan_from;

/// Seed plus substream index for a reproducible sample sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Instantiate the generator this spec describes.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Same seed, different substream; substreams are independent.
    pub fn substream(&self, stream: u64) -> Self {
        Self {
            seed: self.seed,
            stream,
        }
    }
}

/// Frequency estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithSe {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub successes: u64,
}

impl EstimateWithSe {
    pub fn from_counts(successes: u64, samples: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::Domain("estimator needs at least one sample".into()));
        }
        let value = successes as f64 / samples as f64;
        let std_error = (value * (1.0 - value) / samples as f64).sqrt();
        Ok(Self {
            value,
            std_error,
            samples,
            successes,
        })
    }

    /// Pool with an estimate from a disjoint stream (count addition).
    pub fn pool(&self, other: &Self) -> Result<Self> {
        Self::from_counts(
            self.successes + other.successes,
            self.samples + other.samples,
        )
    }
}

/// Last-car preference histogram over successful trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramResult {
    pub counts: Vec<u64>,
    pub total_success: u64,
    pub total_trials: u64,
}

impl HistogramResult {
    fn empty(n: u32) -> Self {
        Self {
            counts: vec![0; n as usize],
            total_success: 0,
            total_trials: 0,
        }
    }

    /// Empirical conditional distribution; `None` until a success is seen.
    pub fn normalized(&self) -> Option<DistributionVector> {
        if self.total_success == 0 {
            return None;
        }
        let t = self.total_success as f64;
        let probs = self.counts.iter().map(|&c| c as f64 / t).collect();
        Some(DistributionVector::new(probs).expect("count vector normalizes"))
    }

    /// Parking-probability estimate carried by the same run.
    pub fn pf_estimate(&self) -> Result<EstimateWithSe> {
        EstimateWithSe::from_counts(self.total_success, self.total_trials)
    }

    /// Merge with a histogram from a disjoint stream (count addition).
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.counts.len() != other.counts.len() {
            return Err(Error::LengthMismatch(format!(
                "merging histograms over {} and {} spots",
                self.counts.len(),
                other.counts.len()
            )));
        }
        Ok(Self {
            counts: self
                .counts
                .iter()
                .zip(&other.counts)
                .map(|(a, b)| a + b)
                .collect(),
            total_success: self.total_success + other.total_success,
            total_trials: self.total_trials + other.total_trials,
        })
    }
}

/// Draw a uniform preference list from `[n]^m` (m bounded-uniform draws).
pub fn sample_preference_list(params: &ModelParams, rng: &mut ChaCha8Rng) -> PreferenceList {
    let prefs = (0..params.m())
        .map(|_| rng.random_range(1..=params.n()))
        .collect();
    PreferenceList::with_spots(prefs, params.m(), params.n()).expect("sampled in range")
}

/// One random trial: uniform preferences, then the protocol with coins
/// flipped lazily (forward with probability `p`) when consulted.
pub fn run_random_trial(
    params: &ModelParams,
    rng: &mut ChaCha8Rng,
) -> (PreferenceList, ParkingTrace) {
    let prefs = sample_preference_list(params, rng);
    let mut occupied = vec![false; params.n() as usize + 1];
    let mut assigned = Vec::with_capacity(prefs.len());
    let mut coin_used = Vec::with_capacity(prefs.len());
    let mut success = true;

    for &pref in prefs.as_slice() {
        if !occupied[pref as usize] {
            occupied[pref as usize] = true;
            assigned.push(Some(pref));
            coin_used.push(false);
            continue;
        }
        coin_used.push(true);
        let direction = if rng.random_bool(params.p()) {
            Direction::Forward
        } else {
            Direction::Backward
        };
        match scan_from(&occupied, pref, direction) {
            Some(spot) => {
                occupied[spot as usize] = true;
                assigned.push(Some(spot));
            }
            None => {
                assigned.push(None);
                success = false;
            }
        }
    }

    (
        prefs,
        ParkingTrace {
            assigned,
            coin_used,
            success,
        },
    )
}

/// A priori bound on the total variation distance between an `n_succ`-sample
/// multinomial histogram and the distribution it was drawn from: the sum of
/// per-cell half-normal means plus five pooled standard deviations, so an
/// honest estimator clears it with negligible false-failure probability.
pub fn tv_sampling_noise_bound(q: &DistributionVector, n_succ: u64) -> f64 {
    let n = n_succ as f64;
    let mut mean = 0.0;
    let mut var = 0.0;
    for &qj in q.probs() {
        let v = qj * (1.0 - qj) / n;
        mean += 0.5 * (2.0 / std::f64::consts::PI * v).sqrt();
        var += 0.25 * v * (1.0 - 2.0 / std::f64::consts::PI);
    }
    mean + 5.0 * var.sqrt()
}

/// Frequency estimate of the probability that a uniform preference list
/// parks all cars.
pub fn estimate_pf_probability(
    params: &ModelParams,
    samples: u64,
    spec: RngSpec,
) -> Result<EstimateWithSe> {
    if samples == 0 {
        return Err(Error::Domain("samples must be >= 1".into()));
    }
    let mut rng = spec.rng();
    let mut successes = 0u64;
    for _ in 0..samples {
        if run_random_trial(params, &mut rng).1.success {
            successes += 1;
        }
    }
    EstimateWithSe::from_counts(successes, samples)
}

/// Histogram of the last car's preference over successful trials.
pub fn estimate_last_car_histogram(
    params: &ModelParams,
    samples: u64,
    spec: RngSpec,
) -> Result<HistogramResult> {
    if samples == 0 {
        return Err(Error::Domain("samples must be >= 1".into()));
    }
    let mut rng = spec.rng();
    let mut hist = HistogramResult::empty(params.n());
    hist.total_trials = samples;
    for _ in 0..samples {
        let (prefs, trace) = run_random_trial(params, &mut rng);
        if trace.success {
            hist.total_success += 1;
            hist.counts[(prefs.last() - 1) as usize] += 1;
        }
    }
    Ok(hist)
}
