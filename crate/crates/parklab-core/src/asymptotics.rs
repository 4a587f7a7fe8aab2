//! Large-n approximations in the `m = cn` regime: the Poisson left-tail
//! expansion, the second-order expansion of the conditional mean, the tree
//! functions behind the alternative derivation, and error-order diagnostics.
//!
//! Two distinct Poisson parameters show up here and are deliberately kept in
//! separate functions: the left-tail expansion concerns a sum of `n` unit
//! Poissons (parameter `n`), while the mean formula's factor uses parameter
//! `n + 1`.

use serde::{Deserialize, Serialize};

use crate::closed_forms::{mean_last_pref, poisson_factor};
use crate::error::{Error, Result};
use crate::model::{cars_for_ratio, ModelParams};

fn check_ratio(c: f64) -> Result<()> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!("ratio c={c} outside (0, 1)")));
    }
    Ok(())
}

/// Ingredients of the Poisson(1) left-tail expansion at ratio `c`, kept
/// inspectable so tests can pin each piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdExpansion {
    pub c: f64,
    /// Cramér rate: `c ln c - c + 1`, positive on (0, 1).
    pub rate: f64,
    /// Minimizing exponential tilt `t*(c) = ln c`.
    pub tilt: f64,
    /// Per-variable factor `exp(-rate)` of the tilted measure.
    pub m_of_c: f64,
    /// First-order correction `1/(12c) + c/(1-c)^2`.
    pub corr: f64,
    /// Central moments of the tilted (Poisson(c)) variable.
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
    /// `mu4/mu2^2 - 3 - 5 mu3^2/(3 mu2^3) = -2/(3c)`.
    pub kurtosis_coeff: f64,
    /// Boundary term `2c/(1-c)^2` from the geometric tail at the cutoff.
    pub boundary_coeff: f64,
}

impl LdExpansion {
    pub fn new(c: f64) -> Result<Self> {
        check_ratio(c)?;
        let rate = c * c.ln() - c + 1.0;
        let one_minus = 1.0 - c;
        Ok(Self {
            c,
            rate,
            tilt: c.ln(),
            m_of_c: (-rate).exp(),
            corr: 1.0 / (12.0 * c) + c / (one_minus * one_minus),
            mu2: c,
            mu3: c,
            mu4: 3.0 * c * c + c,
            kurtosis_coeff: -2.0 / (3.0 * c),
            boundary_coeff: 2.0 * c / (one_minus * one_minus),
        })
    }
}

/// Validity guard: the `(1-c)^-1` factors blow up near c = 1.
pub const LD_MAX_RATIO: f64 = 0.95;

/// Left-tail approximation of P(X_1 + … + X_n <= nc) for iid Poisson(1):
/// `exp(-n rate) / (sqrt(2 pi n c) (1 - c)) * (1 - corr/n)`, in log space.
/// Comparisons against the exact tail use `floor(nc)` on both sides.
pub fn ld_left_tail(n: u32, c: f64) -> Result<f64> {
    check_ratio(c)?;
    if c > LD_MAX_RATIO {
        return Err(Error::Domain(format!(
            "ratio c={c} beyond the expansion's validity guard {LD_MAX_RATIO}"
        )));
    }
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let exp = LdExpansion::new(c)?;
    let nf = n as f64;
    let correction = 1.0 - exp.corr / nf;
    if correction <= 0.0 {
        return Err(Error::Domain(format!(
            "n={n} too small for the first-order correction at c={c}"
        )));
    }
    let ln_val = -nf * exp.rate
        - 0.5 * (2.0 * std::f64::consts::PI * nf * c).ln()
        - (1.0 - c).ln()
        + correction.ln();
    Ok(ln_val.exp())
}

/// Second-order expansion of the conditional mean at `m = cn`:
/// `(n+1)/2 - (2p-1) c/(2(1-c)) - (2p-1)(c^2-c-1)/(2(1-c)^3 n)`.
pub fn mean_expansion(n: u32, c: f64, p: f64) -> Result<f64> {
    check_ratio(c)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability p={p} outside [0, 1]")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let nf = n as f64;
    let one_minus = 1.0 - c;
    let slope = 2.0 * p - 1.0;
    Ok((nf + 1.0) / 2.0
        - slope * c / (2.0 * one_minus)
        - slope * (c * c - c - 1.0) / (2.0 * one_minus.powi(3) * nf))
}

const TREE_SERIES_MAX_TERMS: usize = 200_000;
const TREE_SERIES_EPS: f64 = 1e-16;

fn tree_series(z: f64, g_variant: bool, derivative: bool) -> Result<f64> {
    if !(0.0..1.0 / std::f64::consts::E).contains(&z) {
        return Err(Error::Domain(format!(
            "z={z} outside the series radius [0, 1/e)"
        )));
    }
    // F: terms z^s (s+1)^(s-1)/s!; G: z^s (s+1)^s/s!; F': s z^(s-1) (s+1)^(s-1)/s!.
    let mut term = 1.0f64;
    let mut sum = if derivative { 0.0 } else { 1.0 };
    for s in 1..TREE_SERIES_MAX_TERMS {
        let sf = s as f64;
        let exponent = if g_variant { sf } else { sf - 1.0 };
        // ratio of consecutive terms z^s (s+1)^e(s) / s!
        term *= z * ((sf + 1.0) / sf).powf(exponent);
        let contribution = if derivative { sf * term / z } else { term };
        sum += contribution;
        if contribution.abs() < TREE_SERIES_EPS * sum.abs() && s > 4 {
            return Ok(sum);
        }
    }
    Err(Error::Numerical(format!(
        "tree-function series did not converge at z={z}"
    )))
}

/// Tree function `F(z) = Σ z^s (s+1)^(s-1)/s!`; satisfies `F(c e^-c) = e^c`.
pub fn tree_f(z: f64) -> Result<f64> {
    tree_series(z, false, false)
}

/// `G(z) = Σ z^s (s+1)^s/s! = z F'(z) + F(z)`; satisfies
/// `G(c e^-c) = e^c/(1-c)`.
pub fn tree_g(z: f64) -> Result<f64> {
    tree_series(z, true, false)
}

/// `F'(z)` by term shift of the series (not finite differences).
pub fn tree_f_deriv(z: f64) -> Result<f64> {
    if z == 0.0 {
        // s=1 term of F': (s+1)^(s-1)/(s-1)! = 1 at s=1
        return Ok(1.0);
    }
    tree_series(z, false, true)
}

/// Stirling/left-tail reconstruction of the Poisson factor
/// `e^(n+1) (m-1)! P(Z <= m-1) / (n+1)^(m-1)` at `m = floor(cn)`: Stirling's
/// series (with the 1/(12k) term) for the factorial and [`ld_left_tail`]
/// with `n+1` unit Poissons for the tail, combined in log space. Agrees with
/// the exact [`poisson_factor`] to O(n^-2), like [`cf_ratio`] does.
pub fn ld_factor_approx(n: u32, c: f64) -> Result<f64> {
    let m = cars_for_ratio(c, n)?;
    if m < 2 {
        return Err(Error::Domain(format!(
            "need m >= 2 for the Stirling route, got m={m}"
        )));
    }
    let summands = n + 1;
    let threshold_ratio = (m as f64 - 1.0) / summands as f64;
    let tail = ld_left_tail(summands, threshold_ratio)?;
    let k = m as f64 - 1.0;
    let ln_fact = 0.5 * (2.0 * std::f64::consts::PI * k).ln() + k * k.ln() - k
        + (1.0 + 1.0 / (12.0 * k)).ln();
    let ln_val =
        (n as f64 + 1.0) + ln_fact + tail.ln() - (m as f64 - 1.0) * ((n as f64) + 1.0).ln();
    Ok(ln_val.exp())
}

/// First-order expansion of the Poisson factor at `m = cn`:
/// `(1/(1-c)) (1 + (c^2-c-1)/((1-c)^2 n))`. Matches
/// [`poisson_factor`] to O(n^-2).
pub fn cf_ratio(n: u32, c: f64) -> Result<f64> {
    check_ratio(c)?;
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let nf = n as f64;
    let one_minus = 1.0 - c;
    Ok(1.0 / one_minus * (1.0 + (c * c - c - 1.0) / (one_minus * one_minus * nf)))
}

/// One row of an approximation-vs-exact comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub n: u32,
    pub m: u32,
    pub approx: f64,
    pub exact: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    /// `n^2 * abs_err`; bounded iff the approximation is accurate to O(n^-2).
    pub scaled_err: f64,
}

impl ExpansionReport {
    pub fn new(n: u32, m: u32, approx: f64, exact: f64) -> Self {
        let abs_err = (approx - exact).abs();
        Self {
            n,
            m,
            approx,
            exact,
            abs_err,
            rel_err: if exact != 0.0 { abs_err / exact.abs() } else { f64::NAN },
            scaled_err: (n as f64) * (n as f64) * abs_err,
        }
    }
}

/// [`mean_expansion`] against the exact [`mean_last_pref`] at `m = floor(cn)`.
pub fn mean_expansion_report(n: u32, c: f64, p: f64) -> Result<ExpansionReport> {
    let m = cars_for_ratio(c, n)?;
    let exact = mean_last_pref(&ModelParams::new(m, n, p)?)?;
    Ok(ExpansionReport::new(n, m, mean_expansion(n, c, p)?, exact))
}

/// [`ld_left_tail`] against the exact Poisson tail P(Poisson(n) <= floor(nc)).
pub fn ld_report(n: u32, c: f64) -> Result<ExpansionReport> {
    let k = cars_for_ratio(c, n)?;
    let exact = crate::closed_forms::poisson_cdf(k as i64, n as f64)?;
    Ok(ExpansionReport::new(n, k, ld_left_tail(n, c)?, exact))
}

/// [`cf_ratio`] against the exact [`poisson_factor`] at `m = floor(cn)`.
pub fn cf_report(n: u32, c: f64) -> Result<ExpansionReport> {
    let m = cars_for_ratio(c, n)?;
    Ok(ExpansionReport::new(
        n,
        m,
        cf_ratio(n, c)?,
        poisson_factor(m, n)?,
    ))
}
