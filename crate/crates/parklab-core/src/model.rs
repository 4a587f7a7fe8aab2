//! Domain types for the parking model: parameters, preference lists, coin
//! decisions, protocol traces, and probability vectors.
//!
//! Spots are numbered 1..=n throughout. A model is `m` cars entering a one-way
//! street with `n >= m` spots; a car that finds its preferred spot occupied
//! flips a coin that sends it forward with probability `p`, backward with
//! probability `1 - p`, and it then scans spot by spot in that one direction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model configuration: `m` cars, `n` spots, forward probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    m: u32,
    n: u32,
    p: f64,
}

impl ModelParams {
    pub fn new(m: u32, n: u32, p: f64) -> Result<Self> {
        if m < 1 || m > n || !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidModel { m, n, p });
        }
        Ok(Self { m, n, p })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Same street, different forward probability.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.m, self.n, p)
    }
}

/// Validate a bare `(m, n)` pair where `p` plays no role.
pub(crate) fn check_cars_spots(m: u32, n: u32) -> Result<()> {
    if m < 1 || m > n {
        return Err(Error::InvalidModel { m, n, p: 0.0 });
    }
    Ok(())
}

/// Number of cars for a car/spot ratio `c`, as `floor(c * n)`.
///
/// A tiny slack absorbs binary rounding so that e.g. `c = 0.3, n = 50`
/// yields 15 rather than 14.
pub fn cars_for_ratio(c: f64, n: u32) -> Result<u32> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!("ratio c={c} outside (0, 1)")));
    }
    let m = (c * n as f64 + 1e-9).floor() as u32;
    if m < 1 {
        return Err(Error::Domain(format!(
            "ratio c={c} with n={n} yields zero cars"
        )));
    }
    Ok(m.min(n))
}

/// Preference list: one preferred spot in `1..=n` per car.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceList {
    prefs: Vec<u32>,
}

impl PreferenceList {
    pub fn new(prefs: Vec<u32>, params: &ModelParams) -> Result<Self> {
        Self::with_spots(prefs, params.m(), params.n())
    }

    /// Validate against explicit `(m, n)` instead of full parameters.
    pub fn with_spots(prefs: Vec<u32>, m: u32, n: u32) -> Result<Self> {
        if prefs.len() != m as usize {
            return Err(Error::LengthMismatch(format!(
                "preference list has {} entries, model has m={m} cars",
                prefs.len()
            )));
        }
        if let Some(&bad) = prefs.iter().find(|&&a| a < 1 || a > n) {
            return Err(Error::InvalidPreferences(format!(
                "preference {bad} outside 1..={n}"
            )));
        }
        Ok(Self { prefs })
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.prefs
    }

    pub fn len(&self) -> usize {
        self.prefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefs.is_empty()
    }

    /// Preference of the last car.
    pub fn last(&self) -> u32 {
        *self.prefs.last().expect("preference lists are non-empty")
    }
}

/// Direction a bumped car scans in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

/// One pre-drawn coin outcome per car. Entry `i` is consulted only if car
/// `i` finds its preferred spot occupied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoinDecisions {
    decisions: Vec<Direction>,
}

impl CoinDecisions {
    pub fn new(decisions: Vec<Direction>, params: &ModelParams) -> Result<Self> {
        if decisions.len() != params.m() as usize {
            return Err(Error::LengthMismatch(format!(
                "coin list has {} entries, model has m={} cars",
                decisions.len(),
                params.m()
            )));
        }
        Ok(Self { decisions })
    }

    pub fn all(direction: Direction, params: &ModelParams) -> Self {
        Self {
            decisions: vec![direction; params.m() as usize],
        }
    }

    pub fn as_slice(&self) -> &[Direction] {
        &self.decisions
    }
}

/// Outcome of one protocol run: where each car ended up (`None` = failed to
/// park), whether its coin was consulted, and overall success.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParkingTrace {
    pub assigned: Vec<Option<u32>>,
    pub coin_used: Vec<bool>,
    pub success: bool,
}

/// Probability vector over spots `1..=n`.
///
/// Entries in `[-1e-15, 0)` are treated as cancellation noise and clamped to
/// zero; anything more negative is rejected as a genuine bug. The total mass
/// must be 1 within 1e-12.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionVector {
    probs: Vec<f64>,
}

impl DistributionVector {
    pub const NEGATIVE_CLAMP: f64 = -1e-15;
    pub const NORMALIZATION_TOL: f64 = 1e-12;

    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Domain("empty distribution vector".into()));
        }
        let mut sum = crate::numeric::KahanSum::new();
        for q in probs.iter_mut() {
            if *q < 0.0 {
                if *q < Self::NEGATIVE_CLAMP {
                    return Err(Error::Numerical(format!(
                        "distribution entry {q} below the clamp threshold"
                    )));
                }
                *q = 0.0;
            }
            sum.add(*q);
        }
        let total = sum.value();
        if (total - 1.0).abs() > Self::NORMALIZATION_TOL {
            return Err(Error::Numerical(format!(
                "distribution mass {total} deviates from 1 beyond tolerance"
            )));
        }
        Ok(Self { probs })
    }

    /// Uniform distribution on `1..=n`.
    pub fn uniform(n: u32) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n as usize],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability of spot `j` (1-based).
    pub fn prob(&self, j: u32) -> f64 {
        self.probs[(j - 1) as usize]
    }

    /// Mean of the spot index under this distribution.
    pub fn mean(&self) -> f64 {
        let mut acc = crate::numeric::KahanSum::new();
        for (i, q) in self.probs.iter().enumerate() {
            acc.add((i + 1) as f64 * q);
        }
        acc.value()
    }
}
