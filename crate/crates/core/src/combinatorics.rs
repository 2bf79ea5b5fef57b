//! Exact combinatorial primitives: binomials, Stirling numbers of the second
//! kind, harmonic numbers, and the continuous extension of the EL complete
//! collection CDF.

use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::report::{CheckReport, Relation};
use crate::scalar::{Accumulator, NeumaierSum, Rational, Scalar};

/// `C(n, k)`, zero when `k < 0` or `k > n`.
pub fn binomial(n: u64, k: i64) -> BigInt {
    if k < 0 || k as u64 > n {
        return BigInt::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, i| acc * i)
}

fn stirling_table() -> &'static RwLock<Vec<Vec<BigInt>>> {
    static TABLE: OnceLock<RwLock<Vec<Vec<BigInt>>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(vec![vec![BigInt::one()]]))
}

/// Stirling number of the second kind `S(k, n)`: partitions of `k` labelled
/// objects into `n` non-empty blocks.
///
/// Rows are memoized in a shared triangular table and extended on demand
/// with `S(k, n) = n S(k-1, n) + S(k-1, n-1)`.
pub fn stirling2(k: u64, n: u64) -> BigInt {
    if n > k {
        return BigInt::zero();
    }
    let (k, n) = (k as usize, n as usize);
    {
        let table = stirling_table().read().expect("stirling table poisoned");
        if let Some(row) = table.get(k) {
            return row[n].clone();
        }
    }
    let mut table = stirling_table().write().expect("stirling table poisoned");
    while table.len() <= k {
        let prev = table.last().expect("table seeded with row 0");
        let m = prev.len();
        let mut row = Vec::with_capacity(m + 1);
        row.push(BigInt::zero());
        for j in 1..=m {
            let carry = if j < m { &prev[j] * j } else { BigInt::zero() };
            row.push(carry + &prev[j - 1]);
        }
        table.push(row);
    }
    table[k][n].clone()
}

/// `S(n + offset, n)` from the closed forms on the Stirling diagonals, `offset` in `1..=5`.
pub fn stirling2_diagonal(n: u64, offset: u32) -> Result<Rational> {
    if n == 0 {
        return Err(Error::Domain("stirling2_diagonal needs N >= 1".into()));
    }
    let q = |v: BigInt| Rational::from_integer(v);
    let ni = BigInt::from(n);
    let c = |top: u64, k: i64| q(binomial(top, k));
    let value = match offset {
        1 => c(n + 1, 2),
        2 => c(n + 2, 3) * q(3 * &ni + 1) / q(4.into()),
        3 => c(n + 3, 4) * c(n + 1, 2),
        4 => {
            let poly = 15 * &ni * &ni * &ni + 30 * &ni * &ni + 5 * &ni - 2;
            c(n + 4, 5) * q(poly) / q(48.into())
        }
        5 => {
            let poly = 3 * &ni * &ni + 7 * &ni - 2;
            c(n + 5, 6) * c(n + 1, 2) * q(poly) / q(8.into())
        }
        _ => {
            return Err(Error::Domain(format!(
                "stirling2_diagonal offset must be in 1..=5, got {offset}"
            )))
        }
    };
    Ok(value)
}

/// Generalized harmonic number `H_{n,a} = sum_{i=1..n} i^-a` for integer `a`.
pub fn harmonic<S: Scalar>(n: u64, a: u32) -> S {
    S::sum((1..=n).rev().map(|i| S::one() / S::from_i64(i as i64).powi(a)))
}

/// `H_{n,a}` for real `a`, summed smallest-first with compensation.
pub fn harmonic_real(n: u64, a: f64) -> f64 {
    let mut acc = NeumaierSum::default();
    for i in (1..=n).rev() {
        acc.add((i as f64).powf(-a));
    }
    acc.value()
}

/// `ln C(n, m)` for `m = 0..=n`, built by cumulative sums.
fn ln_binomial_row(n: u64) -> Vec<f64> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    row.push(0.0);
    for m in 1..=n {
        acc += ((n - m + 1) as f64).ln() - (m as f64).ln();
        row.push(acc);
    }
    row
}

/// `sum_{i=0..N} (-1)^(N-i) C(N,i) (i/N)^k` for real `k >= 0`.
///
/// Evaluated as `sum_m (-1)^m C(N,m) (1 - m/N)^k` from log-magnitudes; terms
/// below `1e-30` of the largest are dropped and the rest summed in
/// descending magnitude with Neumaier compensation. At integer `k` this is
/// `N! S(k, N) / N^k`, and exactly zero for integer `k < N`.
///
/// Near `k = N` with large `N` the terms dwarf the result. When the
/// accumulated roundoff bound exceeds `1e-13` of the value, the sum is
/// recomputed in fixed-point big-integer arithmetic.
pub fn el_cdf_continuous(n: u64, k: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if k.fract() == 0.0 && k < n as f64 {
        return 0.0;
    }
    let ln_c = ln_binomial_row(n);
    // ln_mags[m]: log-magnitude of the term with (1 - m/N)^k
    let mut ln_mags = vec![f64::NEG_INFINITY; n as usize + 1];
    let mut terms: Vec<(f64, f64, f64)> = Vec::with_capacity(n as usize + 1);
    for m in 0..=n {
        let ln_pow = if m == n {
            // 0^0 = 1, 0^k = 0
            if k == 0.0 {
                0.0
            } else {
                continue;
            }
        } else {
            k * (-(m as f64) / n as f64).ln_1p()
        };
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let ln_mag = ln_c[m as usize] + ln_pow;
        ln_mags[m as usize] = ln_mag;
        terms.push((ln_mag, sign, ln_c[m as usize] + ln_pow.abs()));
    }
    let max = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    let cutoff = max + (1e-30f64).ln();
    terms.retain(|t| t.0 >= cutoff);
    terms.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut acc = NeumaierSum::default();
    let mut roundoff = 0.0;
    for &(ln_mag, sign, spread) in &terms {
        let mag = ln_mag.exp();
        acc.add(sign * mag);
        roundoff += mag * f64::EPSILON * (4.0 + spread);
    }
    let value = acc.value();
    if roundoff <= 1e-13 * value.abs() {
        return value;
    }
    // Pr[T_N <= k] >= N!/N^N once k >= N
    let floor_log2 = (k >= n as f64).then(|| {
        let ln_fact: f64 = (1..=n).map(|i| (i as f64).ln()).sum();
        (ln_fact - n as f64 * (n as f64).ln()) / std::f64::consts::LN_2 - 1.0
    });
    // reindex by i = N - m for the (i/N)^k form
    ln_mags.reverse();
    crate::hiprec::alternating_power_sum(n, k, &ln_mags, floor_log2)
}

/// Checks `sum_{i=0..b} C(b,i)(-1)^i/(a+i+1)^2 = a! b!/(a+b+1)! (H_{a+b+1} - H_a)` exactly.
pub fn integral_identity_check(a: u64, b: u64) -> CheckReport {
    let lhs = Rational::sum((0..=b).map(|i| {
        let sign = if i % 2 == 0 { 1 } else { -1 };
        let denom = BigInt::from(a + i + 1);
        Rational::new(sign * binomial(b, i as i64), &denom * &denom)
    }));
    let beta = Rational::new(factorial(a) * factorial(b), factorial(a + b + 1));
    let rhs = beta * (harmonic::<Rational>(a + b + 1, 1) - harmonic::<Rational>(a, 1));
    let mut report = CheckReport::new("integral_identity");
    report.compare(format!("a={a}, b={b}"), &lhs, Relation::Equal, &rhs);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    /// Counts set partitions of `{0..k}` into exactly `n` blocks by
    /// restricted growth strings.
    fn brute_partitions(k: usize, n: usize) -> u64 {
        fn rec(pos: usize, k: usize, used: usize, n: usize) -> u64 {
            if pos == k {
                return (used == n) as u64;
            }
            let mut total = 0;
            for b in 0..=used.min(n.saturating_sub(1)) {
                let next = if b == used { used + 1 } else { used };
                if next <= n {
                    total += rec(pos + 1, k, next, n);
                }
            }
            total
        }
        if k == 0 {
            return (n == 0) as u64;
        }
        rec(0, k, 0, n)
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(4, 7), BigInt::zero());
        assert_eq!(binomial(0, 0), BigInt::one());
        assert_eq!(binomial(3, -1), BigInt::zero());
        assert_eq!(binomial(64, 32), "1832624140942590534".parse::<BigInt>().unwrap());
    }

    #[test]
    fn binomial_symmetry() {
        for n in 0..=40u64 {
            for k in 0..=n {
                assert_eq!(binomial(n, k as i64), binomial(n, (n - k) as i64));
            }
        }
    }

    #[test]
    fn stirling_examples() {
        assert_eq!(brute_partitions(3, 2), 3);
        assert_eq!(stirling2(3, 2), BigInt::from(3));
        assert_eq!(stirling2(2, 5), BigInt::zero());
        assert_eq!(stirling2(6, 4), BigInt::from(65));
        assert_eq!(stirling2(0, 0), BigInt::one());
        assert_eq!(stirling2(5, 0), BigInt::zero());
    }

    #[test]
    fn stirling_matches_partition_enumeration() {
        for k in 0..=8 {
            for n in 0..=k {
                assert_eq!(
                    stirling2(k as u64, n as u64),
                    BigInt::from(brute_partitions(k, n)),
                    "S({k},{n})"
                );
            }
        }
    }

    #[test]
    fn stirling_matches_explicit_alternating_sum() {
        for k in 0..=20u64 {
            for n in 0..=k {
                let sum: BigInt = (0..=n)
                    .map(|i| {
                        let sign = if (n - i) % 2 == 0 { 1 } else { -1 };
                        sign * binomial(n, i as i64) * BigInt::from(i).pow(k as u32)
                    })
                    .sum();
                assert_eq!(sum / factorial(n), stirling2(k, n));
            }
        }
    }

    #[test]
    fn diagonal_examples() {
        assert_eq!(stirling2_diagonal(2, 2).unwrap(), q(7, 1));
        assert_eq!(stirling2_diagonal(3, 1).unwrap(), q(6, 1));
        assert_eq!(stirling2_diagonal(4, 2).unwrap(), q(65, 1));
        assert!(stirling2_diagonal(3, 0).is_err());
        assert!(stirling2_diagonal(3, 6).is_err());
        assert!(stirling2_diagonal(0, 1).is_err());
    }

    #[test]
    fn diagonal_matches_recurrence_table() {
        for n in 1..=20u64 {
            for offset in 1..=5u32 {
                let d = stirling2_diagonal(n, offset).unwrap();
                assert!(d.is_integer());
                assert_eq!(d, Rational::from_integer(stirling2(n + offset as u64, n)), "N={n} offset={offset}");
            }
        }
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(harmonic::<Rational>(3, 1), q(11, 6));
        assert_eq!(harmonic::<Rational>(3, 2), q(49, 36));
        assert_eq!(harmonic::<Rational>(0, 1), q(0, 1));
        assert!((harmonic::<f64>(3, 1) - 11.0 / 6.0).abs() < 1e-15);
        assert!((harmonic_real(3, 1.0) - 11.0 / 6.0).abs() < 1e-15);
        assert_eq!(harmonic::<Rational>(4, 0), q(4, 1));
    }

    #[test]
    fn el_cdf_examples() {
        assert!((el_cdf_continuous(2, 2.0) - 0.5).abs() < 1e-15);
        for n in 1..6 {
            assert!(el_cdf_continuous(n, 0.0).abs() < 1e-15);
        }
        let h: f64 = harmonic_real(1000, 1.0);
        let v = el_cdf_continuous(1000, 1000.0 * h);
        assert!((v - 0.5704).abs() < 0.001, "{v}");
    }

    #[test]
    fn el_cdf_matches_stirling_at_integers() {
        for n in 1..=12u64 {
            for k in 0..=n + 10 {
                let exact = Rational::new(factorial(n) * stirling2(k, n), BigInt::from(n).pow(k as u32));
                let exact = exact.to_f64();
                let got = el_cdf_continuous(n, k as f64);
                assert!((got - exact).abs() <= 1e-12 * exact.abs(), "N={n} k={k}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn el_cdf_is_nondecreasing() {
        for n in [3u64, 10, 50, 200] {
            let h = harmonic_real(n, 1.0);
            let hi = 4.0 * n as f64 * h;
            let mut prev = el_cdf_continuous(n, n as f64);
            let steps = 400;
            for s in 1..=steps {
                let k = n as f64 + (hi - n as f64) * s as f64 / steps as f64;
                let v = el_cdf_continuous(n, k);
                assert!(v >= prev - 1e-13, "N={n} k={k}");
                prev = v;
            }
        }
    }

    #[test]
    fn integral_identity_examples() {
        let r = integral_identity_check(0, 1);
        assert!(r.passed);
        assert_eq!(r.witnesses[0].lhs, "3/4");
        let r = integral_identity_check(2, 0);
        assert!(r.passed);
        assert_eq!(r.witnesses[0].rhs, "1/9");
        // a = 0, b = m - 1 reduces to the alternating harmonic identity
        let r = integral_identity_check(0, 2);
        assert!(r.passed);
        let m = 3u64;
        let alt = Rational::sum((1..=m).map(|p| {
            let sign = if p % 2 == 1 { 1 } else { -1 };
            Rational::new(sign * binomial(m, p as i64), BigInt::from(p))
        }));
        assert_eq!(alt, q(11, 6));
        assert_eq!(Rational::from_integer(BigInt::from(m)) * parse_side(&r.witnesses[0].lhs), q(11, 6));
    }

    fn parse_side(s: &str) -> Rational {
        crate::scalar::parse_rational(s).unwrap()
    }

    #[test]
    fn integral_identity_grid() {
        for a in 0..=30 {
            for b in 0..=30 {
                assert!(integral_identity_check(a, b).passed, "a={a} b={b}");
            }
        }
    }

    proptest! {
        #[test]
        fn pascal_rule(n in 1u64..60, k in 1i64..60) {
            prop_assert_eq!(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
        }
    }
}
