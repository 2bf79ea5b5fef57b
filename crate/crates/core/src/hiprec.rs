//! Fixed-point big-integer evaluation of `sum_i (-1)^(N-i) C(N,i) (i/N)^k`
//! for real `k`, used where double precision cancels away.
//!
//! Values are `BigInt`s scaled by `2^bits`. Logarithms of integers come from
//! `atanh` series and are memoized per precision.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use crate::combinatorics::binomial;
use crate::scalar::{ratio_to_f64, Rational};

const GUARD: u64 = 32;
const MAX_BITS: u64 = 1 << 17;

/// `atanh(a/b) * 2^bits` for `0 <= a/b < 1`.
fn atanh_ratio(a: u64, b: u64, bits: u64) -> BigInt {
    let (a, b) = (BigInt::from(a), BigInt::from(b));
    let (a2, b2) = (&a * &a, &b * &b);
    let mut p = (BigInt::one() << bits) * &a / &b;
    let mut sum = BigInt::zero();
    let mut j = 1u64;
    while !p.is_zero() {
        sum += &p / j;
        p = p * &a2 / &b2;
        j += 2;
    }
    sum
}

fn memo() -> &'static Mutex<HashMap<(u64, u64), BigInt>> {
    static MEMO: OnceLock<Mutex<HashMap<(u64, u64), BigInt>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `ln 2 * 2^bits`.
fn ln2(bits: u64) -> BigInt {
    ln_int(2, bits)
}

/// `ln i * 2^bits` for `i >= 1`, as `e ln 2 + 2 atanh((i - 2^e) / (i + 2^e))`.
fn ln_int(i: u64, bits: u64) -> BigInt {
    if let Some(v) = memo().lock().expect("ln memo poisoned").get(&(i, bits)) {
        return v.clone();
    }
    let g = bits + GUARD;
    let e = 63 - i.leading_zeros() as u64;
    let pow = 1u64 << e;
    let ln_two = atanh_ratio(1, 3, g) * 2;
    let value: BigInt = (ln_two * e + atanh_ratio(i - pow, i + pow, g) * 2) >> GUARD;
    memo().lock().expect("ln memo poisoned").insert((i, bits), value.clone());
    value
}

/// `exp(y)` for fixed-point `y`, returned as `(m, q)` with `exp(y) = m 2^q / 2^bits`
/// and `1 <= m / 2^bits < 2`.
fn exp_fixed(y: &BigInt, bits: u64) -> (BigInt, i64) {
    const HALVINGS: u64 = 8;
    let g = bits + GUARD + HALVINGS;
    let ln_two = ln2(g);
    let y = y << (g - bits);
    let (q, r) = y.div_mod_floor(&ln_two);
    let r = r >> HALVINGS;
    let one = BigInt::one() << g;
    let mut sum = one.clone();
    let mut term = one;
    let mut n = 1u64;
    loop {
        term = ((term * &r) >> g) / n;
        if term.is_zero() {
            break;
        }
        sum += &term;
        n += 1;
    }
    for _ in 0..HALVINGS {
        sum = (&sum * &sum) >> g;
    }
    let q = q.to_i64().expect("exponent within i64");
    (sum >> (g - bits), q)
}

/// `sum_{i=0..N} (-1)^(N-i) C(N,i) (i/N)^k` carried with `bits` fraction bits.
fn evaluate(n: u64, k: f64, bits: u64, ln_mags: &[f64]) -> BigInt {
    let (mant, exp, _) = k.integer_decode();
    let mant = BigInt::from(mant);
    let ln_n = ln_int(n, bits);
    let floor_ln = -(bits as f64) * std::f64::consts::LN_2 - 16.0;
    let mut total = BigInt::zero();
    for i in 0..=n {
        // term magnitude below the precision floor contributes nothing
        if ln_mags[i as usize] < floor_ln {
            continue;
        }
        let c = binomial(n, i as i64);
        let term = if i == 0 {
            if k == 0.0 {
                c << bits
            } else {
                continue;
            }
        } else {
            let d = ln_int(i, bits) - &ln_n;
            let y = &d * &mant;
            let y = if exp >= 0 { y << exp as u64 } else { y >> (-exp) as u64 };
            let (m, q) = exp_fixed(&y, bits);
            let t = c * m;
            if q >= 0 {
                t << q as u64
            } else {
                t >> (-q) as u64
            }
        };
        if (n - i) % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// High-precision value of the alternating sum.
///
/// `ln_mags[i]` is the log-magnitude of term `i`. `floor_log2` is a lower bound
/// on `log2 |result|` (pass `None` when unknown; precision is then raised until
/// the result clears the error floor).
pub(crate) fn alternating_power_sum(n: u64, k: f64, ln_mags: &[f64], floor_log2: Option<f64>) -> f64 {
    let max_ln = ln_mags.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = (max_ln / std::f64::consts::LN_2).max(0.0) + ((n + 2) as f64).log2() + (k + 2.0).log2();
    let mut need = floor_log2.map(|f| (-f).max(0.0)).unwrap_or(64.0);
    loop {
        let bits = ((64.0 + spread + need) as u64).next_multiple_of(64).min(MAX_BITS);
        let v = evaluate(n, k, bits, ln_mags);
        // error stays below 2^(spread + 8) units of 2^-bits
        let noise = spread + 8.0;
        let got = v.abs().bits() as f64;
        if got >= noise + 56.0 || bits == MAX_BITS || floor_log2.is_some() {
            return ratio_to_f64(&Rational::new(v, BigInt::one() << bits));
        }
        need += (noise + 56.0 - got).max(64.0);
    }
}
