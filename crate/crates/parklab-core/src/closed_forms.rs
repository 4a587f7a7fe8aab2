//! Numerically stable evaluation of the model's closed forms: the parking
//! probability, the conditional distribution and mean of the last car's
//! preference, the Poisson CDF / regularized upper incomplete gamma pair, and
//! Abel's multinomial sums with their special-case identities.
//!
//! Large powers and factorials never appear as raw products — every such term
//! goes through log space and is exponentiated once. Each float routine has an
//! exact-rational mirror, so the enumeration oracle can check identities with
//! exact equality.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{check_cars_spots, DistributionVector, ModelParams};
use crate::numeric::{
    big_ipow, binomial_big, check_unit_interval, ln_binomial, ln_factorial, KahanSum,
};

/// P(a uniform list in `[n]^m` parks all cars) = (n-m+1)(n+1)^(m-1) / n^m,
/// evaluated in log space; the value is independent of `p`.
pub fn pf_probability(m: u32, n: u32) -> Result<f64> {
    check_cars_spots(m, n)?;
    let (m, n) = (m as f64, n as f64);
    Ok(((n - m + 1.0).ln() + (m - 1.0) * (n + 1.0).ln() - m * n.ln()).exp())
}

/// Exact-rational mirror of [`pf_probability`].
pub fn pf_probability_exact(m: u32, n: u32) -> Result<BigRational> {
    check_cars_spots(m, n)?;
    let num = BigInt::from(n - m + 1) * BigInt::from(n + 1).pow(m - 1);
    Ok(BigRational::new(num, BigInt::from(n).pow(m)))
}

/// Precomputed machinery for the conditional distribution of the last car's
/// preference at fixed `(m, n)`: the `p`-independent term table
/// `T(s) = C(m-1,s) (n-s)^(m-s-2) (s+1)^(s-1)`, normalized by `(n+1)^(m-1)`,
/// stored as suffix sums so each probability costs O(1).
#[derive(Debug, Clone)]
pub struct LastPrefKernel {
    m: u32,
    n: u32,
    leading: f64,
    /// suffix[t] = Σ_{s=t}^{m-1} T(s)/(n+1)^(m-1), for t in 1..=m.
    suffix: Vec<f64>,
}

impl LastPrefKernel {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        check_cars_spots(m, n)?;
        let nf = n as f64;
        let mf = m as f64;
        let leading = (nf - mf + 2.0) / ((nf - mf + 1.0) * (nf + 1.0));
        let ln_norm = (mf - 1.0) * (nf + 1.0).ln();
        let mut suffix = vec![0.0; m as usize + 1];
        let mut acc = KahanSum::new();
        for s in (1..m).rev() {
            let sf = s as f64;
            let ln_term = ln_binomial((m - 1) as u64, s as u64)
                + (mf - sf - 2.0) * (nf - sf).ln()
                + (sf - 1.0) * (sf + 1.0).ln()
                - ln_norm;
            acc.add(ln_term.exp());
            suffix[s as usize] = acc.value();
        }
        Ok(Self {
            m,
            n,
            leading,
            suffix,
        })
    }

    fn tail(&self, t: u32) -> f64 {
        if t >= self.m {
            0.0
        } else {
            self.suffix[t as usize]
        }
    }

    /// Q_{m,n,p}(j): probability that the last car preferred spot `j`, given
    /// that all cars parked.
    pub fn prob(&self, j: u32, p: f64) -> Result<f64> {
        if j < 1 || j > self.n {
            return Err(Error::Domain(format!(
                "spot j={j} outside 1..={}",
                self.n
            )));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("probability p={p} outside [0, 1]")));
        }
        let val = self.leading - (p * self.tail(self.n + 1 - j) + (1.0 - p) * self.tail(j));
        if val < 0.0 {
            if val < DistributionVector::NEGATIVE_CLAMP {
                return Err(Error::Numerical(format!(
                    "negative probability {val} at j={j}: formula/implementation bug"
                )));
            }
            return Ok(0.0);
        }
        Ok(val)
    }

    /// The full distribution over `1..=n`; normalization is asserted by
    /// [`DistributionVector::new`].
    pub fn distribution(&self, p: f64) -> Result<DistributionVector> {
        let probs = (1..=self.n)
            .map(|j| self.prob(j, p))
            .collect::<Result<Vec<f64>>>()?;
        DistributionVector::new(probs)
    }
}

/// Q_{m,n,p}(j) for a single spot; build a [`LastPrefKernel`] to sweep.
pub fn q_last_pref(j: u32, params: &ModelParams) -> Result<f64> {
    LastPrefKernel::new(params.m(), params.n())?.prob(j, params.p())
}

/// The conditional distribution of the last car's preference, as a vector.
pub fn q_vector(params: &ModelParams) -> Result<DistributionVector> {
    LastPrefKernel::new(params.m(), params.n())?.distribution(params.p())
}

fn abel_term_exact(m: u32, n: u32, s: u32) -> Result<BigRational> {
    let c = binomial_big((m - 1) as u64, s as u64);
    let a = big_ipow(&BigInt::from(n - s), m as i64 - s as i64 - 2)?;
    let b = big_ipow(&BigInt::from(s + 1), s as i64 - 1)?;
    Ok(BigRational::from_integer(c) * a * b)
}

/// Exact-rational mirror of the last-preference distribution.
pub fn q_vector_exact(m: u32, n: u32, p: &BigRational) -> Result<Vec<BigRational>> {
    check_cars_spots(m, n)?;
    check_unit_interval(p)?;
    let norm = BigRational::from_integer(BigInt::from(n + 1).pow(m - 1));
    // suffix[t] = Σ_{s=t}^{m-1} T(s), exact
    let mut suffix = vec![BigRational::zero(); m as usize + 1];
    for s in (1..m).rev() {
        suffix[s as usize] = &suffix[s as usize + 1] + abel_term_exact(m, n, s)?;
    }
    let tail = |t: u32| -> BigRational {
        if t >= m {
            BigRational::zero()
        } else {
            suffix[t as usize].clone()
        }
    };
    let leading = BigRational::new(BigInt::from(n - m + 2), BigInt::from(n - m + 1) * (n + 1));
    let q = BigRational::one() - p;
    Ok((1..=n)
        .map(|j| &leading - (p * tail(n + 1 - j) + &q * tail(j)) / &norm)
        .collect())
}

/// Exact-rational mirror of [`q_last_pref`].
pub fn q_last_pref_exact(j: u32, m: u32, n: u32, p: &BigRational) -> Result<BigRational> {
    if j < 1 || j > n {
        return Err(Error::Domain(format!("spot j={j} outside 1..={n}")));
    }
    Ok(q_vector_exact(m, n, p)?.swap_remove(j as usize - 1))
}

/// P(Z <= k) for Z ~ Poisson(lambda), via term-ratio recursion anchored at
/// the largest retained term so nothing underflows prematurely; monotone
/// nondecreasing in `k`.
pub fn poisson_cdf(k: i64, lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::Domain(format!("lambda={lambda} must be positive")));
    }
    if k == -1 {
        return Ok(0.0);
    }
    if k < -1 {
        return Err(Error::Domain(format!("k={k} below -1")));
    }
    let k = k as u64;
    let anchor = (lambda.floor() as u64).min(k);
    let ln_anchor = -lambda + anchor as f64 * lambda.ln() - ln_factorial(anchor);
    // terms relative to the anchor, both directions strictly decreasing
    let mut sum = 1.0f64;
    let mut rel = 1.0f64;
    for s in (1..=anchor).rev() {
        rel *= s as f64 / lambda;
        sum += rel;
        if rel < 1e-18 * sum {
            break;
        }
    }
    rel = 1.0;
    for s in anchor + 1..=k {
        rel *= lambda / s as f64;
        sum += rel;
        if rel < 1e-18 * sum {
            break;
        }
    }
    Ok((ln_anchor + sum.ln()).exp())
}

const GAMMA_MAX_ITER: usize = 1000;

/// Regularized upper incomplete gamma Q(s, x) = Γ(s, x)/Γ(s) for integer
/// s >= 1: series for the lower part when x <= s+1, Lentz continued fraction
/// otherwise. Satisfies Q(m, n+1) = P(Poisson(n+1) <= m-1).
pub fn reg_upper_gamma(s: u32, x: f64) -> Result<f64> {
    if s < 1 {
        return Err(Error::Domain(format!("s={s} must be a positive integer")));
    }
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!("x={x} must be positive")));
    }
    let a = s as f64;
    let ln_prefactor = -x + a * x.ln() - ln_factorial(s as u64 - 1);
    if x < a + 1.0 {
        // series for P(a, x); Q = 1 - P
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut denom = a;
        for _ in 0..GAMMA_MAX_ITER {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if term.abs() < f64::EPSILON * sum.abs() {
                return Ok(1.0 - (ln_prefactor + sum.ln()).exp());
            }
        }
    } else {
        // modified Lentz continued fraction for Q(a, x)
        let tiny = 1e-300;
        let b0 = x + 1.0 - a;
        let mut d = 1.0 / if b0.abs() < tiny { tiny } else { b0 };
        let mut c = 1.0 / tiny;
        let mut h = d;
        for i in 1..=GAMMA_MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            let bn = x + 2.0 * i as f64 + 1.0 - a;
            d = bn + an * d;
            if d.abs() < tiny {
                d = tiny;
            }
            d = 1.0 / d;
            c = bn + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            let delta = c * d;
            h *= delta;
            if (delta - 1.0).abs() < f64::EPSILON {
                return Ok((ln_prefactor + h.ln()).exp());
            }
        }
    }
    Err(Error::Numerical(format!(
        "incomplete gamma failed to converge at s={s}, x={x}"
    )))
}

/// The Poisson factor `e^(n+1) (m-1)! P(Z <= m-1) / (n+1)^(m-1)` with
/// Z ~ Poisson(n+1), evaluated as the finite sum Σ_{s=0}^{m-1} t_s with
/// t_{m-1} = 1 and t_{s-1} = t_s * s/(n+1) — never as the catastrophic
/// exponential-times-factorial product.
pub fn poisson_factor(m: u32, n: u32) -> Result<f64> {
    check_cars_spots(m, n)?;
    let lambda = (n + 1) as f64;
    let mut term = 1.0f64;
    let mut sum = KahanSum::new();
    sum.add(1.0);
    for s in (1..m).rev() {
        term *= s as f64 / lambda;
        sum.add(term);
    }
    Ok(sum.value())
}

/// Exact-rational mirror of [`poisson_factor`].
pub fn poisson_factor_exact(m: u32, n: u32) -> Result<BigRational> {
    check_cars_spots(m, n)?;
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    for s in (1..m).rev() {
        term *= BigRational::new(BigInt::from(s), BigInt::from(n + 1));
        sum += &term;
    }
    Ok(sum)
}

/// E(last car's preference | all cars park)
///   = (n + 2p)/2 - (p - 1/2) * poisson_factor(m, n).
/// Exactly `(n+1)/2` at `p = 1/2`.
pub fn mean_last_pref(params: &ModelParams) -> Result<f64> {
    let factor = poisson_factor(params.m(), params.n())?;
    let n = params.n() as f64;
    let p = params.p();
    Ok((n + 2.0 * p) / 2.0 - (p - 0.5) * factor)
}

/// Exact-rational mirror of [`mean_last_pref`].
pub fn mean_last_pref_exact(m: u32, n: u32, p: &BigRational) -> Result<BigRational> {
    check_unit_interval(p)?;
    let factor = poisson_factor_exact(m, n)?;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let lead = (BigRational::from_integer(n.into()) + p + p) * &half;
    Ok(lead - (p - half) * factor)
}

/// Specification of an Abel multinomial sum
/// `A_order(x_1..x_k; pw_1..pw_k) = Σ_s multinomial(order; s) Π (x_j+s_j)^(s_j+pw_j)`
/// over all compositions `s` of `order` into `k` parts, with `0^0 = 1`.
#[derive(Debug, Clone)]
pub struct AbelSpec {
    pub x: Vec<f64>,
    pub pw: Vec<i64>,
    pub order: u32,
}

/// Composition budget guard: the brute-force sum visits C(order+k-1, k-1)
/// compositions.
fn check_abel_budget(k: usize, order: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::Domain("Abel sum needs at least one variable".into()));
    }
    let mut count = 1.0f64;
    for i in 1..k {
        count *= (order as f64 + i as f64) / i as f64;
    }
    if count > 2e6 {
        return Err(Error::BudgetExceeded(format!(
            "Abel sum over ~{count:.0} compositions (order={order}, k={k})"
        )));
    }
    Ok(())
}

fn for_each_composition(order: u32, k: usize, mut visit: impl FnMut(&[u32])) {
    fn rec(rest: u32, idx: usize, buf: &mut Vec<u32>, visit: &mut impl FnMut(&[u32])) {
        if idx + 1 == buf.len() {
            buf[idx] = rest;
            visit(buf);
            return;
        }
        for first in 0..=rest {
            buf[idx] = first;
            rec(rest - first, idx + 1, buf, visit);
        }
    }
    let mut buf = vec![0u32; k];
    rec(order, 0, &mut buf, &mut visit);
}

/// Brute-force Abel multinomial sum over floats.
pub fn abel_sum(spec: &AbelSpec) -> Result<f64> {
    if spec.x.len() != spec.pw.len() {
        return Err(Error::LengthMismatch(format!(
            "{} bases but {} exponent offsets",
            spec.x.len(),
            spec.pw.len()
        )));
    }
    check_abel_budget(spec.x.len(), spec.order)?;
    let ln_order_fact = ln_factorial(spec.order as u64);
    let mut total = KahanSum::new();
    let mut bad = None;
    for_each_composition(spec.order, spec.x.len(), |s| {
        let mut ln_multinom = ln_order_fact;
        let mut term = 1.0f64;
        for ((&sj, &xj), &pj) in s.iter().zip(&spec.x).zip(&spec.pw) {
            ln_multinom -= ln_factorial(sj as u64);
            let base = xj + sj as f64;
            let expo = sj as i64 + pj;
            if base == 0.0 {
                if expo < 0 {
                    bad = Some(Error::Domain(format!(
                        "zero base x={xj}+{sj} with negative exponent {expo}"
                    )));
                    return;
                }
                if expo > 0 {
                    term = 0.0;
                }
                // 0^0 = 1 by convention
            } else {
                term *= base.powi(expo as i32);
            }
        }
        total.add(ln_multinom.exp() * term);
    });
    if let Some(err) = bad {
        return Err(err);
    }
    Ok(total.value())
}

/// Exact Abel multinomial sum for integer bases.
pub fn abel_sum_exact(x: &[i64], pw: &[i64], order: u32) -> Result<BigRational> {
    if x.len() != pw.len() {
        return Err(Error::LengthMismatch(format!(
            "{} bases but {} exponent offsets",
            x.len(),
            pw.len()
        )));
    }
    check_abel_budget(x.len(), order)?;
    let order_fact: BigInt = (1..=order as u64).map(BigInt::from).product();
    let mut total = BigRational::zero();
    let mut bad = None;
    for_each_composition(order, x.len(), |s| {
        let mut coeff = BigRational::from_integer(order_fact.clone());
        let mut term = BigRational::one();
        for ((&sj, &xj), &pj) in s.iter().zip(x).zip(pw) {
            coeff /= BigRational::from_integer((1..=sj as u64).map(BigInt::from).product());
            match big_ipow(&BigInt::from(xj + sj as i64), sj as i64 + pj) {
                Ok(pow) => term *= pow,
                Err(e) => {
                    bad = Some(e);
                    return;
                }
            }
        }
        total += coeff * term;
    });
    if let Some(err) = bad {
        return Err(err);
    }
    Ok(total)
}

/// The two closed special cases of the Abel sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbelCase {
    /// All exponent offsets -1:
    /// `(x_1…x_k)^{-1} (Σx) (Σx + order)^{order-1}`.
    AllMinusOne,
    /// Offsets (-1, …, -1, 0):
    /// `(x_1…x_k)^{-1} x_k (Σx + order)^{order}`.
    MinusOneZero,
}

/// Right-hand sides of the Abel special-case identities.
pub fn abel_identity_rhs(x: &[f64], case: AbelCase, order: u32) -> Result<f64> {
    if x.is_empty() || x.iter().any(|&v| v <= 0.0) {
        return Err(Error::Domain("bases must be positive".into()));
    }
    let prod: f64 = x.iter().product();
    let sum: f64 = x.iter().sum();
    Ok(match case {
        AbelCase::AllMinusOne => sum / prod * (sum + order as f64).powi(order as i32 - 1),
        AbelCase::MinusOneZero => {
            x[x.len() - 1] / prod * (sum + order as f64).powi(order as i32)
        }
    })
}

/// Exact mirror of [`abel_identity_rhs`].
pub fn abel_identity_rhs_exact(x: &[i64], case: AbelCase, order: u32) -> Result<BigRational> {
    if x.is_empty() || x.iter().any(|&v| v <= 0) {
        return Err(Error::Domain("bases must be positive".into()));
    }
    let prod: BigInt = x.iter().map(|&v| BigInt::from(v)).product();
    let sum: i64 = x.iter().sum();
    let shifted = BigInt::from(sum + order as i64);
    Ok(match case {
        AbelCase::AllMinusOne => {
            BigRational::new(BigInt::from(sum), prod) * big_ipow(&shifted, order as i64 - 1)?
        }
        AbelCase::MinusOneZero => {
            BigRational::new(BigInt::from(x[x.len() - 1]), prod)
                * big_ipow(&shifted, order as i64)?
        }
    })
}
