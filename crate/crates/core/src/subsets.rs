//! Enumeration of subset masses `P_J = sum_{i in J} p_i` over fixed-size subsets.

use std::sync::atomic::{AtomicU64, Ordering};

use num_traits::ToPrimitive;

use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_SUBSETS: u64 = 10_000_000;

static MAX_SUBSETS: AtomicU64 = AtomicU64::new(DEFAULT_MAX_SUBSETS);

/// Current process-wide enumeration cap.
pub fn max_subsets() -> u64 {
    MAX_SUBSETS.load(Ordering::Relaxed)
}

pub fn set_max_subsets(cap: u64) {
    MAX_SUBSETS.store(cap, Ordering::Relaxed);
}

/// Fails loudly when `C(n, j)` exceeds the enumeration cap.
pub fn check_capacity(n: usize, j: usize) -> Result<()> {
    let count = binomial(n as u64, j as i64).to_u128().unwrap_or(u128::MAX);
    let cap = max_subsets();
    if count > cap as u128 {
        return Err(Error::Capacity {
            what: format!("C({n},{j}) subsets"),
            required: count,
            cap,
        });
    }
    Ok(())
}

/// Calls `visit` with `P_J` for every size-`j` subset in lexicographic order.
///
/// Masses are updated incrementally from the shared prefix of consecutive
/// combinations. The empty subset yields a single zero.
pub fn for_each_mass<S: Scalar, F: FnMut(&S)>(probs: &[S], j: usize, mut visit: F) -> Result<()> {
    let n = probs.len();
    if j > n {
        return Ok(());
    }
    check_capacity(n, j)?;
    let mut idx: Vec<usize> = (0..j).collect();
    let mut prefix: Vec<S> = Vec::with_capacity(j + 1);
    prefix.push(S::zero());
    for t in 0..j {
        let next = prefix[t].clone() + probs[idx[t]].clone();
        prefix.push(next);
    }
    loop {
        visit(&prefix[j]);
        // rightmost position that can still advance
        let Some(i) = (0..j).rev().find(|&i| idx[i] < n - j + i) else {
            return Ok(());
        };
        idx[i] += 1;
        for t in i + 1..j {
            idx[t] = idx[t - 1] + 1;
        }
        for t in i..j {
            prefix[t + 1] = prefix[t].clone() + probs[idx[t]].clone();
        }
    }
}

/// All size-`j` masses collected in lexicographic order.
pub fn masses<S: Scalar>(probs: &[S], j: usize) -> Result<Vec<S>> {
    let mut out = Vec::new();
    for_each_mass(probs, j, |m| out.push(m.clone()))?;
    Ok(out)
}

/// `sum_{|J|=j} f(P_J)` with the mode's accumulator.
pub fn sum_over<S: Scalar, F: FnMut(&S) -> S>(probs: &[S], j: usize, mut f: F) -> Result<S> {
    use crate::scalar::Accumulator;
    let mut acc = S::Acc::default();
    for_each_mass(probs, j, |m| acc.add(f(m)))?;
    Ok(acc.total())
}
