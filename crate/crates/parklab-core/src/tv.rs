//! Total-variation distance between the conditional last-preference
//! distribution and the uniform distribution, with every bound the model
//! admits: the (m,n) upper bound, the general-p lower bound, the dedicated
//! p = 1/2 lower bound, the ratio cap in `c`, and Θ(1/n) rate diagnostics.
//!
//! All bounds route through the stable closed-form primitives; nothing here
//! evaluates an exponential-times-factorial product directly.

use serde::{Deserialize, Serialize};

use crate::closed_forms::{poisson_factor, LastPrefKernel};
use crate::error::{Error, Result};
use crate::model::{cars_for_ratio, check_cars_spots, DistributionVector, ModelParams};
use crate::numeric::KahanSum;

/// Half the L1 distance between two probability vectors of equal length.
pub fn tv_distance(p: &DistributionVector, q: &DistributionVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(format!(
            "distributions over {} and {} spots",
            p.len(),
            q.len()
        )));
    }
    for (label, d) in [("first", p), ("second", q)] {
        let total: f64 = d.probs().iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "{label} argument is not normalized (mass {total})"
            )));
        }
    }
    let mut acc = KahanSum::new();
    for (a, b) in p.probs().iter().zip(q.probs()) {
        acc.add((a - b).abs());
    }
    Ok(0.5 * acc.value())
}

/// TV distance between the conditional last-preference distribution and the
/// uniform distribution on `1..=n`.
pub fn tv_to_uniform(params: &ModelParams) -> Result<f64> {
    let q = crate::closed_forms::q_vector(params)?;
    tv_distance(&q, &DistributionVector::uniform(params.n()))
}

/// Upper bound `(m-1)/((n+1)(n-m+1))`, valid for every `p`.
pub fn tv_upper_bound(m: u32, n: u32) -> Result<f64> {
    check_cars_spots(m, n)?;
    Ok((m as f64 - 1.0) / ((n as f64 + 1.0) * (n as f64 - m as f64 + 1.0)))
}

/// Lower bound `(|2p-1|/(4n)) |1 - poisson_factor(m, n)|`; vanishes at
/// p = 1/2, where [`tv_lower_bound_half`] takes over.
pub fn tv_lower_bound(params: &ModelParams) -> Result<f64> {
    let factor = poisson_factor(params.m(), params.n())?;
    let slope = (2.0 * params.p() - 1.0).abs();
    Ok(slope / (4.0 * params.n() as f64) * (1.0 - factor).abs())
}

/// Dedicated p = 1/2 lower bound
/// `(1/2) |n^(m-2)/(2(n+1)^(m-1)) - (1/(2(n+1)))(1 + (n-2m+2)/(n(n-m+1)))|`,
/// with the power ratio evaluated in log space. Evaluates to exactly zero at
/// m = 1, consistent with a TV distance of zero.
pub fn tv_lower_bound_half(m: u32, n: u32) -> Result<f64> {
    check_cars_spots(m, n)?;
    let (mf, nf) = (m as f64, n as f64);
    let power_ratio = ((mf - 2.0) * nf.ln() - (mf - 1.0) * (nf + 1.0).ln()).exp();
    let uniform_side =
        1.0 / (2.0 * (nf + 1.0)) * (1.0 + (nf - 2.0 * mf + 2.0) / (nf * (nf - mf + 1.0)));
    Ok(0.5 * (0.5 * power_ratio - uniform_side).abs())
}

/// Upper cap on the TV distance at `m = cn`, uniform in `n` and `p`:
/// `1 - (1-c) e^(3c/5)`.
pub fn ratio_cap(c: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!("ratio c={c} outside (0, 1)")));
    }
    Ok(1.0 - (1.0 - c) * (3.0 * c / 5.0).exp())
}

/// TV distance together with every applicable bound at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvReport {
    pub m: u32,
    pub n: u32,
    pub p: f64,
    pub tv: f64,
    pub upper: f64,
    pub lower: f64,
    /// Dedicated lower bound, populated when p = 1/2 (meaningful for m >= 2).
    pub lower_half: Option<f64>,
    /// Ratio cap, populated when the point came from `m = cn`.
    pub ratio_cap: Option<f64>,
}

impl TvReport {
    /// Slack for float comparisons of mathematically non-strict inequalities.
    pub const TOL: f64 = 1e-12;

    /// Do the bounds sandwich the computed distance?
    pub fn sandwich_holds(&self) -> bool {
        let lower = self.effective_lower();
        lower <= self.tv + Self::TOL
            && self.tv <= self.upper + Self::TOL
            && self.ratio_cap.is_none_or(|cap| self.tv <= cap + Self::TOL)
    }

    /// The applicable lower bound: the dedicated one at p = 1/2 (m >= 2),
    /// otherwise the general one.
    pub fn effective_lower(&self) -> f64 {
        match self.lower_half {
            Some(lh) if self.m >= 2 => lh,
            _ => self.lower,
        }
    }
}

/// Evaluate the TV distance and all bounds at `(m, n, p)`; pass the ratio `c`
/// when the point is part of an `m = cn` sweep so the cap column fills in.
pub fn tv_report(params: &ModelParams, c: Option<f64>) -> Result<TvReport> {
    let tv = tv_to_uniform(params)?;
    let cap = match c {
        Some(c) => Some(ratio_cap(c)?),
        None => None,
    };
    Ok(TvReport {
        m: params.m(),
        n: params.n(),
        p: params.p(),
        tv,
        upper: tv_upper_bound(params.m(), params.n())?,
        lower: tv_lower_bound(params)?,
        lower_half: (params.p() == 0.5)
            .then(|| tv_lower_bound_half(params.m(), params.n()))
            .transpose()?,
        ratio_cap: cap,
    })
}

/// One point of a Θ(1/n) rate check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: u32,
    pub m: u32,
    pub tv: f64,
    /// `n * tv`; bounded above and below iff the rate is Θ(1/n).
    pub scaled: f64,
}

/// Band `[lo, hi]` that `n * tv` must stay in at ratio `c`, from the
/// asymptotic constants of the two bounds with a slack factor of 2:
/// hi = 2 c/(1-c); lo = |2p-1| c/(8(1-c)) for p != 1/2 and
/// (1 - e^-c)/8 at p = 1/2.
pub fn rate_band(c: f64, p: f64) -> Result<(f64, f64)> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!("ratio c={c} outside (0, 1)")));
    }
    let hi = 2.0 * c / (1.0 - c);
    let lo = if p == 0.5 {
        (1.0 - (-c).exp()) / 4.0 * 0.5
    } else {
        (2.0 * p - 1.0).abs() * c / (4.0 * (1.0 - c)) * 0.5
    };
    Ok((lo, hi))
}

/// `n * tv` across a list of street sizes at fixed ratio and `p`.
pub fn rate_diagnostic(c: f64, p: f64, ns: &[u32]) -> Result<Vec<RatePoint>> {
    ns.iter()
        .map(|&n| {
            let m = cars_for_ratio(c, n)?;
            let tv = tv_to_uniform(&ModelParams::new(m, n, p)?)?;
            Ok(RatePoint {
                n,
                m,
                tv,
                scaled: n as f64 * tv,
            })
        })
        .collect()
}

/// Maximum entrywise deviation of Q_p from the convex combination
/// `(1-p) Q_0 + p Q_1`; should sit at rounding level.
pub fn convexity_check(m: u32, n: u32, p: f64) -> Result<f64> {
    let kernel = LastPrefKernel::new(m, n)?;
    let q0 = kernel.distribution(0.0)?;
    let q1 = kernel.distribution(1.0)?;
    let qp = kernel.distribution(p)?;
    let mut max = 0.0f64;
    for j in 0..n as usize {
        let mix = (1.0 - p) * q0.probs()[j] + p * q1.probs()[j];
        max = max.max((qp.probs()[j] - mix).abs());
    }
    Ok(max)
}

/// Maximum entrywise deviation of Q_1(j) from Q_0(n+1-j) — the parking
/// reversal symmetry at the endpoints.
pub fn reversal_check(m: u32, n: u32) -> Result<f64> {
    let kernel = LastPrefKernel::new(m, n)?;
    let q0 = kernel.distribution(0.0)?;
    let q1 = kernel.distribution(1.0)?;
    let mut max = 0.0f64;
    for j in 0..n as usize {
        max = max.max((q1.probs()[j] - q0.probs()[n as usize - 1 - j]).abs());
    }
    Ok(max)
}
