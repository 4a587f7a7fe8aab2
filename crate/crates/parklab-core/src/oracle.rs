//! Exact, independent ground truth at small sizes: the success probability of
//! a fixed preference list by weighted traversal of the coin-decision tree,
//! and the conditional last-preference distribution, parking probability, and
//! mean by full enumeration of `[n]^m`.
//!
//! Everything is generic over the weight field: run it with [`BigRational`]
//! for exact identities (probabilities are polynomials in `p` with rational
//! coefficients) or with `f64` when `p` is not rational. Branch order is fixed
//! (forward before backward, lexicographic enumeration) and budgets fail
//! loudly instead of truncating.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{Direction, PreferenceList};
use crate::numeric::check_unit_interval;
use crate::protocol::scan_from;

/// Largest street for single-list success probabilities.
pub const MAX_SINGLE_N: u32 = 8;
/// Largest street for full `[n]^m` enumeration.
pub const MAX_ENUM_N: u32 = 6;
/// Largest car count for full `[n]^m` enumeration.
pub const MAX_ENUM_M: u32 = 6;

/// Weight field for the coin-decision tree: exact rationals or floats.
pub trait Weight: Clone + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    /// `1 - self`.
    fn complement(&self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn from_u32(v: u32) -> Self;
    /// Probabilities must lie in [0, 1].
    fn check_probability(&self) -> Result<()>;
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn complement(&self) -> Self {
        1.0 - self
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn from_u32(v: u32) -> Self {
        v as f64
    }
    fn check_probability(&self) -> Result<()> {
        if !(0.0..=1.0).contains(self) {
            return Err(Error::Domain(format!("probability {self} outside [0, 1]")));
        }
        Ok(())
    }
}

impl Weight for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn complement(&self) -> Self {
        <Self as One>::one() - self
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn from_u32(v: u32) -> Self {
        BigRational::from_integer(v.into())
    }
    fn check_probability(&self) -> Result<()> {
        check_unit_interval(self)
    }
}

fn check_enum_budget(m: u32, n: u32) -> Result<()> {
    crate::model::check_cars_spots(m, n)?;
    if n > MAX_ENUM_N || m > MAX_ENUM_M {
        return Err(Error::BudgetExceeded(format!(
            "enumeration of [{n}]^{m} exceeds the n<={MAX_ENUM_N}, m<={MAX_ENUM_M} budget"
        )));
    }
    Ok(())
}

/// P(all cars park) for a fixed preference list: depth-first traversal of the
/// coin-decision tree, branching forward with weight `p` and backward with
/// weight `1 - p` whenever a car is bumped. Zero-weight branches are pruned.
pub fn success_probability<W: Weight>(prefs: &PreferenceList, n: u32, p: &W) -> Result<W> {
    p.check_probability()?;
    let m = prefs.len() as u32;
    crate::model::check_cars_spots(m, n)?;
    if n > MAX_SINGLE_N {
        return Err(Error::BudgetExceeded(format!(
            "coin-tree traversal capped at n<={MAX_SINGLE_N}, got n={n}"
        )));
    }
    if let Some(&bad) = prefs.as_slice().iter().find(|&&a| a < 1 || a > n) {
        return Err(Error::InvalidPreferences(format!(
            "preference {bad} outside 1..={n}"
        )));
    }
    let q = p.complement();
    let mut occupied = vec![false; n as usize + 1];
    Ok(dfs(prefs.as_slice(), &mut occupied, p, &q, &W::one()))
}

fn dfs<W: Weight>(rest: &[u32], occupied: &mut [bool], p: &W, q: &W, weight: &W) -> W {
    let Some((&pref, tail)) = rest.split_first() else {
        return weight.clone();
    };
    if !occupied[pref as usize] {
        occupied[pref as usize] = true;
        let total = dfs(tail, occupied, p, q, weight);
        occupied[pref as usize] = false;
        return total;
    }
    let mut total = W::zero();
    for (direction, branch) in [(Direction::Forward, p), (Direction::Backward, q)] {
        if branch.is_zero() {
            continue;
        }
        if let Some(spot) = scan_from(occupied, pref, direction) {
            occupied[spot as usize] = true;
            let w = weight.mul(branch);
            total = total.add(&dfs(tail, occupied, p, q, &w));
            occupied[spot as usize] = false;
        }
    }
    total
}

/// Lexicographic enumeration of `[n]^m`, folding each list's success
/// probability into the caller's accumulator.
fn enumerate<W: Weight>(m: u32, n: u32, p: &W, mut fold: impl FnMut(&[u32], W)) -> Result<()> {
    p.check_probability()?;
    check_enum_budget(m, n)?;
    let q = p.complement();
    let mut list = vec![1u32; m as usize];
    let mut occupied = vec![false; n as usize + 1];
    loop {
        let w = dfs(&list, &mut occupied, p, &q, &W::one());
        fold(&list, w);
        let mut k = m as usize;
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            if list[k] < n {
                list[k] += 1;
                break;
            }
            list[k] = 1;
            if k == 0 {
                return Ok(());
            }
        }
    }
}

/// P(a uniform list parks all cars) = (1/n^m) Σ_α P(α parks); equals
/// `(n-m+1)(n+1)^(m-1) / n^m` for every `p`, which tests verify exactly.
pub fn pf_probability<W: Weight>(m: u32, n: u32, p: &W) -> Result<W> {
    let mut total = W::zero();
    enumerate(m, n, p, |_, w| total = total.add(&w))?;
    let mut space = W::one();
    let nw = W::from_u32(n);
    for _ in 0..m {
        space = space.mul(&nw);
    }
    Ok(total.div(&space))
}

/// Conditional distribution of the last car's preference given that all cars
/// park: Q(j) = Σ_{α: last=j} P(α parks) / Σ_α P(α parks).
pub fn q_distribution<W: Weight>(m: u32, n: u32, p: &W) -> Result<Vec<W>> {
    let mut per_last = vec![W::zero(); n as usize];
    let mut total = W::zero();
    enumerate(m, n, p, |list, w| {
        let j = *list.last().expect("m >= 1") as usize;
        per_last[j - 1] = per_last[j - 1].add(&w);
        total = total.add(&w);
    })?;
    Ok(per_last.iter().map(|v| v.div(&total)).collect())
}

/// Conditional mean of the last car's preference, Σ_j j·Q(j).
pub fn mean_last_pref<W: Weight>(m: u32, n: u32, p: &W) -> Result<W> {
    let q = q_distribution(m, n, p)?;
    let mut mean = W::zero();
    for (i, v) in q.iter().enumerate() {
        mean = mean.add(&W::from_u32(i as u32 + 1).mul(v));
    }
    Ok(mean)
}

/// Convenience: exact distribution lowered to floats.
pub fn q_distribution_f64(m: u32, n: u32, p: f64) -> Result<crate::model::DistributionVector> {
    let q = q_distribution(m, n, &p)?;
    crate::model::DistributionVector::new(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::protocol::is_parking_function;
    use num_bigint::BigInt;

    fn rat(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn prefs(v: &[u32], n: u32) -> PreferenceList {
        PreferenceList::with_spots(v.to_vec(), v.len() as u32, n).unwrap()
    }

    #[test]
    fn single_bumped_car_cases() {
        // (2,2) both prefer 2: only the backward branch parks, weight 1-p.
        for (num, den) in [(0, 1), (1, 3), (1, 2), (1, 1)] {
            let p = rat(num, den);
            let got = success_probability(&prefs(&[2, 2], 2), 2, &p).unwrap();
            assert_eq!(got, p.complement());
        }
        // (2,2) both prefer 1: only the forward branch parks, weight p.
        let got = success_probability(&prefs(&[1, 1], 2), 2, &rat(1, 2)).unwrap();
        assert_eq!(got, rat(1, 2));
        // and the same two branches replayed through the protocol
        use crate::model::{CoinDecisions, Direction};
        let params = ModelParams::new(2, 2, 0.5).unwrap();
        let run = |dirs: &[Direction]| {
            crate::protocol::run_protocol(
                &params,
                &prefs(&[1, 1], 2),
                &CoinDecisions::new(dirs.to_vec(), &params).unwrap(),
            )
            .unwrap()
            .success
        };
        assert!(run(&[Direction::Forward, Direction::Forward]));
        assert!(!run(&[Direction::Forward, Direction::Backward]));
    }

    #[test]
    fn forward_cascade_always_parks() {
        for (m, n) in [(1, 1), (3, 3), (4, 6)] {
            let all_ones = vec![1u32; m as usize];
            let got = success_probability(&prefs(&all_ones, n), n, &rat(1, 1)).unwrap();
            assert_eq!(got, rat(1, 1));
        }
    }

    #[test]
    fn pf_probability_examples() {
        for (num, den) in [(0, 1), (1, 4), (1, 2), (3, 4), (1, 1)] {
            assert_eq!(pf_probability(2, 2, &rat(num, den)).unwrap(), rat(3, 4));
        }
        for n in 1..=5 {
            assert_eq!(
                pf_probability(1, n, &rat(2, 7)).unwrap(),
                rat(1, 1)
            );
        }
        for (num, den) in [(0, 1), (1, 3), (1, 1)] {
            assert_eq!(pf_probability(3, 4, &rat(num, den)).unwrap(), rat(50, 64));
        }
    }

    #[test]
    fn q_distribution_examples() {
        assert_eq!(
            q_distribution(2, 2, &rat(1, 1)).unwrap(),
            vec![rat(2, 3), rat(1, 3)]
        );
        // parking symmetry: p=0 is the reversal of p=1
        assert_eq!(
            q_distribution(2, 2, &rat(0, 1)).unwrap(),
            vec![rat(1, 3), rat(2, 3)]
        );
        assert_eq!(
            q_distribution(1, 5, &rat(2, 3)).unwrap(),
            vec![rat(1, 5); 5]
        );
    }

    #[test]
    fn mean_examples_and_sum_rule() {
        assert_eq!(mean_last_pref(2, 2, &rat(1, 1)).unwrap(), rat(4, 3));
        assert_eq!(mean_last_pref(2, 2, &rat(1, 2)).unwrap(), rat(3, 2));
        for (m, n) in [(2, 4), (3, 5), (4, 4)] {
            for (num, den) in [(0, 1), (1, 4), (2, 5)] {
                let p = rat(num, den);
                let sum = mean_last_pref(m, n, &p)
                    .unwrap()
                    .add(&mean_last_pref(m, n, &p.complement()).unwrap());
                assert_eq!(sum, BigRational::from_integer((n + 1).into()));
            }
        }
    }

    #[test]
    fn p_one_success_is_zero_one_and_matches_classical() {
        // Exhaustive over n <= 6: at p=1 the DFS collapses to the forward-only
        // protocol, so success probability is the parking-function indicator.
        let one = rat(1, 1);
        for n in 1..=6u32 {
            for m in 1..=n {
                let params = ModelParams::new(m, n, 1.0).unwrap();
                let mut list = vec![1u32; m as usize];
                'outer: loop {
                    let pl = prefs(&list, n);
                    let w = success_probability(&pl, n, &one).unwrap();
                    let expected = is_parking_function(&pl, &params).unwrap();
                    assert_eq!(w == one, expected, "{list:?}");
                    assert!(num_traits::Zero::is_zero(&w) || w == one);
                    let mut k = m as usize;
                    loop {
                        if k == 0 {
                            break 'outer;
                        }
                        k -= 1;
                        if list[k] < n {
                            list[k] += 1;
                            break;
                        }
                        list[k] = 1;
                        if k == 0 {
                            break 'outer;
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn float_mean_matches_closed_form() {
        for (m, n) in [(2u32, 2u32), (3, 4), (4, 6), (6, 6)] {
            for p in [0.0, 0.3, 0.7, 1.0] {
                let enumerated = mean_last_pref(m, n, &p).unwrap();
                let closed = crate::closed_forms::mean_last_pref(
                    &ModelParams::new(m, n, p).unwrap(),
                )
                .unwrap();
                assert!(
                    (enumerated - closed).abs() < 1e-12,
                    "({m},{n},{p}): {enumerated} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn float_path_matches_rational() {
        let exact = pf_probability(3, 4, &rat(1, 4)).unwrap();
        let float = pf_probability(3, 4, &0.25f64).unwrap();
        let exact_f = exact.numer().to_string().parse::<f64>().unwrap()
            / exact.denom().to_string().parse::<f64>().unwrap();
        assert!((float - exact_f).abs() < 1e-14);
    }

    #[test]
    fn budgets_fail_loudly() {
        let p = rat(1, 2);
        assert!(matches!(
            pf_probability(7, 7, &p),
            Err(Error::BudgetExceeded(_))
        ));
        assert!(matches!(
            success_probability(&prefs(&[1, 2], 9), 9, &p),
            Err(Error::BudgetExceeded(_))
        ));
        assert!(q_distribution(3, 7, &p).is_err());
        assert!(success_probability(&prefs(&[1, 1], 2), 2, &rat(3, 2)).is_err());
    }
}
