//! Shared numerics: compensated summation, log-factorials, and exact
//! rational helpers used by both the float and the rational evaluation paths.
//!
//! Products of large powers and factorials are never formed directly; callers
//! combine `ln_factorial`/`ln_binomial` terms in log space and exponentiate
//! once. Integer log-factorials come from a compensated cumulative table, so
//! their absolute error stays near machine epsilon (relative accuracy of the
//! exponentiated value is well below 1e-13).

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Kahan–Neumaier compensated accumulator.
#[derive(Debug, Clone, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

const LN_FACT_TABLE_LEN: usize = 4097;

fn ln_fact_table() -> &'static [f64; LN_FACT_TABLE_LEN] {
    static TABLE: OnceLock<[f64; LN_FACT_TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0.0; LN_FACT_TABLE_LEN];
        let mut acc = KahanSum::new();
        for (k, slot) in table.iter_mut().enumerate().skip(1) {
            acc.add((k as f64).ln());
            *slot = acc.value();
        }
        table
    })
}

/// ln(k!) from the compensated table; Stirling's series past the table end.
pub fn ln_factorial(k: u64) -> f64 {
    if (k as usize) < LN_FACT_TABLE_LEN {
        ln_fact_table()[k as usize]
    } else {
        stirling_ln_gamma(k as f64 + 1.0)
    }
}

/// Stirling series for ln Γ(x), adequate only for large x (used past the
/// factorial table, x > 4097, where the truncation error is ≪ 1e-16).
fn stirling_ln_gamma(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// ln C(n, k); zero for degenerate k.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k == 0 || k >= n {
        if k == n {
            return 0.0;
        }
        if k > n {
            return f64::NEG_INFINITY;
        }
        return 0.0;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Exact binomial coefficient as a big integer.
pub fn binomial_big(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

/// `base^exp` for integer base and possibly negative integer exponent.
pub fn big_ipow(base: &BigInt, exp: i64) -> Result<BigRational> {
    if exp >= 0 {
        return Ok(BigRational::from_integer(base.pow(exp as u32)));
    }
    if base.is_zero() {
        return Err(Error::Domain(
            "zero base raised to a negative exponent".into(),
        ));
    }
    Ok(BigRational::new(
        BigInt::one(),
        base.pow(exp.unsigned_abs() as u32),
    ))
}

/// `base^exp` for rational base and possibly negative integer exponent.
pub fn ratio_ipow(base: &BigRational, exp: i64) -> Result<BigRational> {
    if base.is_zero() && exp < 0 {
        return Err(Error::Domain(
            "zero base raised to a negative exponent".into(),
        ));
    }
    Ok(base.pow(exp as i32))
}

/// Parse a probability given as `num/den`, a decimal (`0.25`), or an integer.
///
/// Decimals convert exactly (digits over a power of ten), so `0.7` means the
/// rational 7/10 rather than the nearest binary double.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = |msg: &str| Error::Domain(format!("cannot parse '{s}' as a rational: {msg}"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad("bad numerator"))?;
        let den: BigInt = den.trim().parse().map_err(|_| bad("bad denominator"))?;
        if den.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if !frac.chars().all(|c| c.is_ascii_digit()) || frac.is_empty() {
            return Err(bad("bad fractional part"));
        }
        let negative = int.trim_start().starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad("bad integer part"))?
        };
        let frac_num: BigInt = frac.parse().map_err(|_| bad("bad fractional part"))?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let mag = int_part.abs() * &den + frac_num;
        let num = if negative { -mag } else { mag };
        return Ok(BigRational::new(num, den));
    }
    let num: BigInt = s.parse().map_err(|_| bad("not an integer"))?;
    Ok(BigRational::from_integer(num))
}

/// Check that a rational lies in [0, 1].
pub fn check_unit_interval(p: &BigRational) -> Result<()> {
    if p.is_negative() || p > &BigRational::one() {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}
