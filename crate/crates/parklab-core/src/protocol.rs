//! The parking protocol itself: a deterministic single run given explicit
//! coin outcomes, plus the classical (forward-only) parking-function test.
//!
//! Protocol rules, fixed once here and relied on everywhere else:
//! - cars are processed in list order;
//! - a car whose preferred spot is free parks there and never consults its coin;
//! - otherwise its coin is consulted exactly once and the car scans strictly
//!   monotonically in that one direction, parking at the first free spot;
//! - a car that runs off the street fails, but processing continues so a full
//!   trace exists for diagnostics (overall success requires every car parked).

use crate::error::{Error, Result};
use crate::model::{CoinDecisions, Direction, ModelParams, ParkingTrace, PreferenceList};

/// First free spot scanning from `pref` (exclusive) in `direction`.
/// `occupied` is 1-based with index 0 unused.
pub(crate) fn scan_from(occupied: &[bool], pref: u32, direction: Direction) -> Option<u32> {
    let n = occupied.len() as u32 - 1;
    match direction {
        Direction::Forward => (pref + 1..=n).find(|&s| !occupied[s as usize]),
        Direction::Backward => (1..pref).rev().find(|&s| !occupied[s as usize]),
    }
}

/// Run the protocol for one preference list and one fixed list of coin
/// outcomes, returning the full per-car trace.
pub fn run_protocol(
    params: &ModelParams,
    prefs: &PreferenceList,
    coins: &CoinDecisions,
) -> Result<ParkingTrace> {
    let m = params.m() as usize;
    if prefs.len() != m || coins.as_slice().len() != m {
        return Err(Error::LengthMismatch(format!(
            "m={m} but {} preferences and {} coins supplied",
            prefs.len(),
            coins.as_slice().len()
        )));
    }
    if let Some(&bad) = prefs.as_slice().iter().find(|&&a| a < 1 || a > params.n()) {
        return Err(Error::InvalidPreferences(format!(
            "preference {bad} outside 1..={}",
            params.n()
        )));
    }

    let mut occupied = vec![false; params.n() as usize + 1];
    let mut assigned = Vec::with_capacity(m);
    let mut coin_used = Vec::with_capacity(m);
    let mut success = true;

    for (&pref, &coin) in prefs.as_slice().iter().zip(coins.as_slice()) {
        if !occupied[pref as usize] {
            occupied[pref as usize] = true;
            assigned.push(Some(pref));
            coin_used.push(false);
            continue;
        }
        coin_used.push(true);
        match scan_from(&occupied, pref, coin) {
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

    Ok(ParkingTrace {
        assigned,
        coin_used,
        success,
    })
}

/// Classical parking-function test for `m` cars on `n` spots: the
/// nondecreasing rearrangement `b` must satisfy `b[i] <= n - m + i` (1-based).
///
/// Equivalent to every car parking under the forward-only protocol; the
/// equivalence is enforced by tests against [`parks_with_all_forward`].
pub fn is_parking_function(prefs: &PreferenceList, params: &ModelParams) -> Result<bool> {
    if prefs.len() != params.m() as usize {
        return Err(Error::LengthMismatch(format!(
            "preference list has {} entries, model has m={} cars",
            prefs.len(),
            params.m()
        )));
    }
    let mut sorted = prefs.as_slice().to_vec();
    sorted.sort_unstable();
    let offset = params.n() - params.m();
    Ok(sorted
        .iter()
        .enumerate()
        .all(|(i, &b)| b <= offset + i as u32 + 1))
}

/// The protocol-based characterization: do all cars park when every
/// consulted coin says forward?
pub fn parks_with_all_forward(prefs: &PreferenceList, params: &ModelParams) -> Result<bool> {
    let coins = CoinDecisions::all(Direction::Forward, params);
    Ok(run_protocol(params, prefs, &coins)?.success)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(m: u32, n: u32) -> ModelParams {
        ModelParams::new(m, n, 0.5).unwrap()
    }

    fn prefs(v: &[u32], p: &ModelParams) -> PreferenceList {
        PreferenceList::new(v.to_vec(), p).unwrap()
    }

    fn coins(v: &[Direction], p: &ModelParams) -> CoinDecisions {
        CoinDecisions::new(v.to_vec(), p).unwrap()
    }

    use Direction::{Backward, Forward};

    #[test]
    fn bumped_car_moves_forward() {
        let p = params(2, 2);
        let trace = run_protocol(&p, &prefs(&[1, 1], &p), &coins(&[Forward, Forward], &p)).unwrap();
        assert_eq!(trace.assigned, vec![Some(1), Some(2)]);
        assert_eq!(trace.coin_used, vec![false, true]);
        assert!(trace.success);
    }

    #[test]
    fn forward_scan_can_exit_street() {
        let p = params(2, 2);
        let trace = run_protocol(&p, &prefs(&[2, 2], &p), &coins(&[Forward, Forward], &p)).unwrap();
        assert_eq!(trace.assigned, vec![Some(2), None]);
        assert!(!trace.success);
    }

    #[test]
    fn backward_scan_finds_spot_one() {
        let p = params(2, 2);
        let trace =
            run_protocol(&p, &prefs(&[2, 2], &p), &coins(&[Forward, Backward], &p)).unwrap();
        assert_eq!(trace.assigned, vec![Some(2), Some(1)]);
        assert!(trace.success);
    }

    #[test]
    fn processing_continues_after_failure() {
        // Car 2 fails forward off the street; car 3 still parks.
        let p = params(3, 3);
        let trace = run_protocol(
            &p,
            &prefs(&[3, 3, 1], &p),
            &coins(&[Forward, Forward, Forward], &p),
        )
        .unwrap();
        assert_eq!(trace.assigned, vec![Some(3), None, Some(1)]);
        assert!(!trace.success);
    }

    #[test]
    fn classical_examples() {
        let p22 = params(2, 2);
        assert!(is_parking_function(&prefs(&[1, 1], &p22), &p22).unwrap());
        assert!(!is_parking_function(&prefs(&[2, 2], &p22), &p22).unwrap());
        // (2,7,2,9,10,1) on (m,n)=(6,10): sorted (1,2,2,7,9,10) vs caps (5,6,7,8,9,10).
        let p610 = params(6, 10);
        assert!(is_parking_function(&prefs(&[2, 7, 2, 9, 10, 1], &p610), &p610).unwrap());
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let p = params(2, 3);
        let other = params(3, 3);
        let long_prefs = prefs(&[1, 2, 3], &other);
        assert!(run_protocol(&p, &long_prefs, &CoinDecisions::all(Forward, &p)).is_err());
        assert!(is_parking_function(&long_prefs, &p).is_err());
    }

    #[test]
    fn exhaustive_equivalence_small_streets() {
        // Sorted-rearrangement criterion == all-forward protocol, all lists n <= 6.
        for n in 1..=6u32 {
            for m in 1..=n {
                let p = params(m, n);
                let mut list = vec![1u32; m as usize];
                loop {
                    let pl = PreferenceList::new(list.clone(), &p).unwrap();
                    assert_eq!(
                        is_parking_function(&pl, &p).unwrap(),
                        parks_with_all_forward(&pl, &p).unwrap(),
                        "disagreement at {list:?} (m={m}, n={n})"
                    );
                    // odometer over [n]^m
                    let mut k = 0;
                    loop {
                        if k == list.len() {
                            break;
                        }
                        if list[k] < n {
                            list[k] += 1;
                            break;
                        }
                        list[k] = 1;
                        k += 1;
                    }
                    if k == list.len() {
                        break;
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn trace_invariants(n in 1u32..=12, seed_m in 1u32..=12, data in proptest::collection::vec((1u32..=12, proptest::bool::ANY), 12)) {
            let m = seed_m.min(n);
            let p = params(m, n);
            let raw: Vec<u32> = data.iter().take(m as usize).map(|(a, _)| 1 + (a - 1) % n).collect();
            let dirs: Vec<Direction> = data.iter().take(m as usize)
                .map(|(_, fwd)| if *fwd { Forward } else { Backward }).collect();
            let pl = PreferenceList::new(raw.clone(), &p).unwrap();
            let cd = CoinDecisions::new(dirs.clone(), &p).unwrap();
            let trace = run_protocol(&p, &pl, &cd).unwrap();

            // Distinct spots among parked cars.
            let mut seen = vec![false; n as usize + 1];
            for spot in trace.assigned.iter().flatten() {
                prop_assert!(!seen[*spot as usize]);
                seen[*spot as usize] = true;
            }
            // success <=> no failures.
            prop_assert_eq!(trace.success, trace.assigned.iter().all(|a| a.is_some()));

            // Replay to confirm coin consultation and the no-jump property.
            let mut occupied = vec![false; n as usize + 1];
            for i in 0..m as usize {
                let pref = raw[i];
                prop_assert_eq!(trace.coin_used[i], occupied[pref as usize]);
                if let Some(spot) = trace.assigned[i] {
                    if spot != pref {
                        // Every spot strictly between pref and spot was occupied.
                        let range: Box<dyn Iterator<Item = u32>> = if spot > pref {
                            Box::new(pref..spot)
                        } else {
                            Box::new(spot + 1..=pref)
                        };
                        for s in range {
                            prop_assert!(occupied[s as usize] || s == pref);
                        }
                        prop_assert!(occupied[pref as usize]);
                    }
                    occupied[spot as usize] = true;
                } else {
                    // Failed: every spot on the scanned side was occupied.
                    match dirs[i] {
                        Forward => for s in pref..=n { prop_assert!(occupied[s as usize]); },
                        Backward => for s in 1..=pref { prop_assert!(occupied[s as usize]); },
                    }
                }
            }
        }

        #[test]
        fn classical_matches_forward_protocol(n in 1u32..=9, raw in proptest::collection::vec(1u32..=9, 1..=9)) {
            let m = raw.len() as u32;
            prop_assume!(m <= n);
            let p = params(m, n);
            let clipped: Vec<u32> = raw.iter().map(|&a| 1 + (a - 1) % n).collect();
            let pl = PreferenceList::new(clipped, &p).unwrap();
            prop_assert_eq!(
                is_parking_function(&pl, &p).unwrap(),
                parks_with_all_forward(&pl, &p).unwrap()
            );
        }
    }
}
