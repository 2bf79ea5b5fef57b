//! Exact evaluation of the waiting time `T_n` and working set `W_k`
//! distributions under the independent reference model.
//!
//! Every formula is an alternating, binomially weighted sum over subset
//! masses `P_J`. With `N` items, `n` the collection size and `k` the number
//! of draws:
//!
//! ```text
//! Pr[T_n = k] = sum_{j<n} (-1)^(n-1-j) C(N-j-1, N-n) sum_{|J|=j} P_J^(k-1) (1 - P_J)
//! Pr[T_n > k] = sum_{j<n} (-1)^(n-1-j) C(N-j-1, N-n) sum_{|J|=j} P_J^k
//! Pr[W_k = n] = sum_{j<=n} (-1)^(n-j) C(N-j, N-n) sum_{|J|=j} P_J^k
//! E[T_n]      = sum_{j<n} (-1)^(n-1-j) C(N-j-1, N-n) sum_{|J|=j} 1 / (1 - P_J)
//! R_N^k       = sum_J (-1)^|J| P_J^k          Pr[T_N <= k] = (-1)^N R_N^k
//! ```
//!
//! In float mode the clamping rules of [`NEGATIVE_CLAMP`] apply to pdf entries.

use std::collections::HashMap;

use serde::Serialize;

use crate::combinatorics::{binomial, factorial, harmonic, stirling2};
use crate::error::{Error, Result};
use crate::popularity::{exclude_probs, Popularity};
use crate::report::{CheckReport, Relation};
use crate::scalar::{Accumulator, Rational, Scalar};
use crate::subsets::{for_each_mass, masses, max_subsets, sum_over};

/// Float pdf entries in `[-NEGATIVE_CLAMP, 0)` are roundoff and clamped to zero;
/// anything more negative is reported as an error.
pub const NEGATIVE_CLAMP: f64 = 1e-9;

/// Tail target for truncated infinite sums in float mode.
const SERIES_TAIL: f64 = 1e-12;
const SERIES_TERM: f64 = 1e-15;
const SERIES_MAX_WORK: u64 = 2_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    /// `T_n` over trial counts `k`.
    WaitingTime { n: usize },
    /// `W_k` over sizes `n`.
    WorkingSet { k: u32 },
}

/// pdf / CDF / CCDF of a CCP variable over a contiguous range of its free index.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable<S> {
    pub variable: Variable,
    /// Value of the free index at row 0.
    pub start: u64,
    pub pdf: Vec<S>,
    pub cdf: Vec<S>,
    pub ccdf: Vec<S>,
    /// Number of float pdf entries clamped from tiny negatives to zero.
    pub clamped: usize,
}

impl<S: Scalar> DistributionTable<S> {
    pub fn len(&self) -> usize {
        self.pdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pdf.is_empty()
    }

    fn row(&self, x: u64) -> Option<usize> {
        x.checked_sub(self.start)
            .map(|i| i as usize)
            .filter(|&i| i < self.pdf.len())
    }

    pub fn pdf_at(&self, x: u64) -> Option<&S> {
        self.row(x).map(|i| &self.pdf[i])
    }

    pub fn cdf_at(&self, x: u64) -> Option<&S> {
        self.row(x).map(|i| &self.cdf[i])
    }

    pub fn ccdf_at(&self, x: u64) -> Option<&S> {
        self.row(x).map(|i| &self.ccdf[i])
    }

    /// `(x, pdf, cdf, ccdf)` rows in index order.
    pub fn rows(&self) -> impl Iterator<Item = (u64, &S, &S, &S)> + '_ {
        (0..self.pdf.len()).map(move |i| (self.start + i as u64, &self.pdf[i], &self.cdf[i], &self.ccdf[i]))
    }
}

/// `R_N^k` together with its indices.
#[derive(Debug, Clone, PartialEq)]
pub struct RValue<S> {
    pub n: usize,
    pub k: u32,
    pub value: S,
}

fn sign<S: Scalar>(exp: usize) -> S {
    if exp % 2 == 0 {
        S::one()
    } else {
        -S::one()
    }
}

fn binom<S: Scalar>(n: usize, k: i64) -> S {
    S::from_bigint(&binomial(n as u64, k))
}

/// `(-1)^(n-1-j) C(N-j-1, N-n)` for `j = 0..n`.
fn waiting_time_coefs<S: Scalar>(big_n: usize, n: usize) -> Vec<S> {
    (0..n)
        .map(|j| sign::<S>(n - 1 - j) * binom(big_n - j - 1, (big_n - n) as i64))
        .collect()
}

/// `(-1)^(n-j) C(N-j, N-n)` for `j = 0..=n`.
fn working_set_coefs<S: Scalar>(big_n: usize, n: usize) -> Vec<S> {
    (0..=n)
        .map(|j| sign::<S>(n - j) * binom(big_n - j, (big_n - n) as i64))
        .collect()
}

fn check_size<S: Scalar>(pop: &Popularity<S>, n: usize, allow_zero: bool) -> Result<()> {
    let lo = if allow_zero { 0 } else { 1 };
    if n < lo || n > pop.len() {
        return Err(Error::Domain(format!(
            "collection size n = {n} must satisfy {lo} <= n <= N = {}",
            pop.len()
        )));
    }
    Ok(())
}

/// Applies the float clamping rule; exact negatives are always errors.
fn clamp_pdf<S: Scalar>(pdf: &mut [S], table: &str, start: u64) -> Result<usize> {
    let mut clamped = 0;
    for (i, v) in pdf.iter_mut().enumerate() {
        if *v < S::zero() {
            let f = v.to_f64();
            if !S::EXACT && f >= -NEGATIVE_CLAMP {
                *v = S::zero();
                clamped += 1;
            } else {
                return Err(Error::NegativeProbability {
                    table: table.to_string(),
                    index: start as usize + i,
                    value: f,
                });
            }
        }
    }
    Ok(clamped)
}

/// `sum_{|J|=j} P_J^k`.
pub fn subset_power_sum<S: Scalar>(pop: &Popularity<S>, j: usize, k: u32) -> Result<S> {
    check_size(pop, j, true)?;
    sum_over(pop.probs(), j, |m| m.powi(k))
}

/// pdf, CDF and CCDF of `T_n` for `k = 1..=k_max`.
pub fn t_distribution<S: Scalar>(pop: &Popularity<S>, n: usize, k_max: u32) -> Result<DistributionTable<S>> {
    check_size(pop, n, false)?;
    if (k_max as usize) < n {
        return Err(Error::Domain(format!("k_max = {k_max} must be >= n = {n}")));
    }
    let big_n = pop.len();
    let coefs = waiting_time_coefs::<S>(big_n, n);
    let by_size: Vec<Vec<S>> = (0..n).map(|j| masses(pop.probs(), j)).collect::<Result<_>>()?;
    // running P_J^(k-1), starting at k = 1 (0^0 = 1 for the empty set)
    let mut powers: Vec<Vec<S>> = by_size.iter().map(|ms| vec![S::one(); ms.len()]).collect();

    let rows = k_max as usize;
    let mut pdf = Vec::with_capacity(rows);
    let mut ccdf = Vec::with_capacity(rows);
    for k in 1..=k_max {
        let mut pdf_acc = S::Acc::default();
        let mut ccdf_acc = S::Acc::default();
        for (j, ms) in by_size.iter().enumerate() {
            let mut pdf_j = S::Acc::default();
            let mut ccdf_j = S::Acc::default();
            for (m, pw) in ms.iter().zip(powers[j].iter_mut()) {
                pdf_j.add(pw.clone() * (S::one() - m.clone()));
                *pw = pw.clone() * m.clone();
                ccdf_j.add(pw.clone());
            }
            pdf_acc.add(coefs[j].clone() * pdf_j.total());
            ccdf_acc.add(coefs[j].clone() * ccdf_j.total());
        }
        let (mut p, mut c) = (pdf_acc.total(), ccdf_acc.total());
        if (k as usize) < n {
            debug_assert!(!S::EXACT || (p.is_zero() && c == S::one()));
            // Pr[T_n = k] vanishes identically below n
            p = S::zero();
            c = S::one();
        }
        pdf.push(p);
        ccdf.push(c);
    }
    let clamped = clamp_pdf(&mut pdf, "T_n pdf", 1)?;
    let cdf = ccdf.iter().map(|c| S::one() - c.clone()).collect();
    let table = DistributionTable {
        variable: Variable::WaitingTime { n },
        start: 1,
        pdf,
        cdf,
        ccdf,
        clamped,
    };
    if S::EXACT && pop.is_uniform() {
        debug_assert!(table
            .pdf
            .iter()
            .enumerate()
            .all(|(i, v)| v.to_f64() == t_pdf_el(big_n, n, i as u32 + 1).to_f64()));
    }
    Ok(table)
}

/// EL pdf `N! S(k-1, n-1) / ((N-n)! N^k)`.
pub fn t_pdf_el(big_n: usize, n: usize, k: u32) -> Rational {
    if k == 0 || n == 0 || n > big_n {
        return Rational::from_integer(0.into());
    }
    let num = factorial(big_n as u64) * stirling2(k as u64 - 1, n as u64 - 1);
    let den = factorial((big_n - n) as u64) * num_bigint::BigInt::from(big_n).pow(k);
    Rational::new(num, den)
}

/// EL complete collection CDF `N! S(k, N) / N^k`.
pub fn t_cdf_complete_el(big_n: usize, k: u32) -> Rational {
    let num = factorial(big_n as u64) * stirling2(k as u64, big_n as u64);
    Rational::new(num, num_bigint::BigInt::from(big_n).pow(k))
}

/// `Pr[T_n = k]` at a single point.
pub fn t_pdf_point<S: Scalar>(pop: &Popularity<S>, n: usize, k: u32) -> Result<S> {
    check_size(pop, n, false)?;
    if k == 0 {
        return Ok(S::zero());
    }
    let coefs = waiting_time_coefs::<S>(pop.len(), n);
    let mut acc = S::Acc::default();
    for (j, c) in coefs.into_iter().enumerate() {
        let s = sum_over(pop.probs(), j, |m| m.powi(k - 1) * (S::one() - m.clone()))?;
        acc.add(c * s);
    }
    Ok(acc.total())
}

/// `Pr[T_n > k]` at a single point.
pub fn t_ccdf_point<S: Scalar>(pop: &Popularity<S>, n: usize, k: u32) -> Result<S> {
    check_size(pop, n, false)?;
    let coefs = waiting_time_coefs::<S>(pop.len(), n);
    let mut acc = S::Acc::default();
    for (j, c) in coefs.into_iter().enumerate() {
        acc.add(c * sum_over(pop.probs(), j, |m| m.powi(k))?);
    }
    Ok(acc.total())
}

/// `E[T_n]` in Flajolet form.
pub fn t_expectation<S: Scalar>(pop: &Popularity<S>, n: usize) -> Result<S> {
    check_size(pop, n, true)?;
    let coefs = waiting_time_coefs::<S>(pop.len(), n);
    let mut acc = S::Acc::default();
    for (j, c) in coefs.into_iter().enumerate() {
        acc.add(c * sum_over(pop.probs(), j, |m| S::one() / (S::one() - m.clone()))?);
    }
    Ok(acc.total())
}

/// `E[T_n]` in Von Schelling form, summing `1/P_J` over the large subsets.
pub fn t_expectation_von_schelling<S: Scalar>(pop: &Popularity<S>, n: usize) -> Result<S> {
    check_size(pop, n, true)?;
    let big_n = pop.len();
    let mut acc = S::Acc::default();
    for m in big_n - n + 1..=big_n {
        let c = sign::<S>(n + m - 1 - big_n) * binom(m - 1, (big_n - n) as i64);
        acc.add(c * sum_over(pop.probs(), m, |mass| S::one() / mass.clone())?);
    }
    Ok(acc.total())
}

/// EL expectation `N (H_N - H_{N-n})`.
pub fn t_expectation_el<S: Scalar>(big_n: usize, n: usize) -> Result<S> {
    if n > big_n {
        return Err(Error::Domain(format!("n = {n} exceeds N = {big_n}")));
    }
    let h = harmonic::<S>(big_n as u64, 1) - harmonic::<S>((big_n - n) as u64, 1);
    Ok(S::from_i64(big_n as i64) * h)
}

/// `E[T_n]` as `sum_{k>=0} Pr[T_n > k]`.
///
/// Exact mode sums each geometric tail in closed form; float mode truncates
/// once terms fall below `1e-15` and the remaining tail is certified below `1e-12`.
pub fn t_expectation_by_tail_sum<S: Scalar>(pop: &Popularity<S>, n: usize) -> Result<S> {
    check_size(pop, n, false)?;
    let coefs = waiting_time_coefs::<S>(pop.len(), n);
    alternating_geometric_series(pop.probs(), &coefs)
}

/// `sum_{k>=0} sum_j coefs[j] sum_{|J|=j} P_J^k`, all masses below one.
fn alternating_geometric_series<S: Scalar>(probs: &[S], coefs: &[S]) -> Result<S> {
    if S::EXACT {
        let mut acc = S::Acc::default();
        for (j, c) in coefs.iter().enumerate() {
            acc.add(c.clone() * sum_over(probs, j, |m| S::one() / (S::one() - m.clone()))?);
        }
        return Ok(acc.total());
    }
    let by_size: Vec<Vec<f64>> = (0..coefs.len())
        .map(|j| masses(probs, j).map(|ms| ms.iter().map(Scalar::to_f64).collect()))
        .collect::<Result<_>>()?;
    let cf: Vec<f64> = coefs.iter().map(Scalar::to_f64).collect();
    let subsets: u64 = by_size.iter().map(|v| v.len() as u64).sum();
    let mut powers: Vec<Vec<f64>> = by_size.iter().map(|ms| vec![1.0; ms.len()]).collect();
    let mut total = crate::scalar::NeumaierSum::default();
    let mut work = 0u64;
    loop {
        let mut term = crate::scalar::NeumaierSum::default();
        let mut tail_bound = 0.0;
        for (j, ms) in by_size.iter().enumerate() {
            let mut inner = crate::scalar::NeumaierSum::default();
            let mut inner_tail = 0.0;
            for (m, pw) in ms.iter().zip(powers[j].iter_mut()) {
                inner.add(*pw);
                *pw *= m;
                // remaining sum_{k' > k} m^k' = m^(k+1) / (1 - m)
                inner_tail += *pw / (1.0 - m);
            }
            term.add(cf[j] * inner.value());
            tail_bound += cf[j].abs() * inner_tail;
        }
        total.add(term.value());
        work += subsets;
        if term.value().abs() < SERIES_TERM && tail_bound < SERIES_TAIL {
            return Ok(S::from_rational(
                &Rational::from_float(total.value()).unwrap_or_else(|| Rational::from_integer(0.into())),
            ));
        }
        if work > SERIES_MAX_WORK {
            return Err(Error::Capacity {
                what: "truncated geometric series (a subset mass is too close to 1)".into(),
                required: work as u128,
                cap: SERIES_MAX_WORK,
            });
        }
    }
}

/// pdf, CDF and CCDF of `W_k` for sizes `n = 0..=N`.
pub fn w_distribution<S: Scalar>(pop: &Popularity<S>, k: u32) -> Result<DistributionTable<S>> {
    let big_n = pop.len();
    let power_sums: Vec<S> = (0..=big_n)
        .map(|j| sum_over(pop.probs(), j, |m| m.powi(k)))
        .collect::<Result<_>>()?;
    let mut pdf = Vec::with_capacity(big_n + 1);
    let mut cdf = Vec::with_capacity(big_n + 1);
    for n in 0..=big_n {
        let coefs = working_set_coefs::<S>(big_n, n);
        let mut p = S::sum(coefs.into_iter().zip(&power_sums).map(|(c, s)| c * s.clone()));
        let c = if n == big_n {
            S::one()
        } else {
            S::sum((0..=n).map(|j| {
                sign::<S>(n - j) * binom(big_n - j - 1, (big_n - n - 1) as i64) * power_sums[j].clone()
            }))
        };
        if n as u64 > k as u64 {
            debug_assert!(!S::EXACT || p.is_zero());
            p = S::zero();
        }
        pdf.push(p);
        cdf.push(c);
    }
    let clamped = clamp_pdf(&mut pdf, "W_k pdf", 0)?;
    let ccdf = cdf.iter().map(|c| S::one() - c.clone()).collect();
    Ok(DistributionTable {
        variable: Variable::WorkingSet { k },
        start: 0,
        pdf,
        cdf,
        ccdf,
        clamped,
    })
}

/// `E[W_k] = sum_i (1 - (1 - p_i)^k)`, the discrete working set function.
pub fn w_expectation<S: Scalar>(pop: &Popularity<S>, k: u32) -> S {
    S::sum(pop.probs().iter().map(|p| S::one() - (S::one() - p.clone()).powi(k)))
}

fn r_raw<S: Scalar>(probs: &[S], k: u32) -> Result<S> {
    let mut acc = S::Acc::default();
    for j in 0..=probs.len() {
        acc.add(sign::<S>(j) * sum_over(probs, j, |m| m.powi(k))?);
    }
    let value = acc.total();
    if (k as usize) < probs.len() {
        debug_assert!(!S::EXACT || value.is_zero());
        return Ok(S::zero());
    }
    Ok(value)
}

/// `R_N^k = sum_J (-1)^|J| P_J^k` by enumeration; zero for `k < N`.
pub fn r_value<S: Scalar>(pop: &Popularity<S>, k: u32) -> Result<RValue<S>> {
    Ok(RValue {
        n: pop.len(),
        k,
        value: r_raw(pop.probs(), k)?,
    })
}

/// Closed forms of `R_N^(N+offset)` for `offset` in `0..=3`.
pub fn r_closed_form<S: Scalar>(pop: &Popularity<S>, offset: u32) -> Result<S> {
    let big_n = pop.len();
    let prod = pop.probs().iter().fold(S::one(), |acc, p| acc * p.clone());
    let r_nn = sign::<S>(big_n) * S::from_bigint(&factorial(big_n as u64)) * prod;
    let nn = S::from_i64(big_n as i64);
    let sq = pop.power_sum(2);
    Ok(match offset {
        0 => r_nn,
        1 => r_nn * binom(big_n + 1, 2) / nn,
        2 => r_nn * binom(big_n + 2, 3) * (S::from_i64(3) + sq) / (S::from_i64(4) * nn),
        3 => r_nn * binom(big_n + 3, 4) * (S::one() + sq) / (S::from_i64(2) * nn),
        _ => {
            return Err(Error::Domain(format!(
                "no closed form known for R_N^(N+{offset}); offsets 0..=3 only"
            )))
        }
    })
}

/// `R_N^k` via `R_N^(k-1) - sum_l p_l (1-p_l)^(k-1) R_{N-1,{l}}^(k-1)`.
pub fn r_recurrence_step<S: Scalar>(pop: &Popularity<S>, k: u32) -> Result<S> {
    if k == 0 {
        return Err(Error::Domain("recurrence step needs k >= 1".into()));
    }
    if pop.len() < 3 {
        return Err(Error::Domain("recurrence step needs N >= 3".into()));
    }
    let prev = r_value(pop, k - 1)?.value;
    let mut acc = S::Acc::default();
    for l in 0..pop.len() {
        let p = pop.get(l).clone();
        let sub = r_value(&pop.exclude(l)?, k - 1)?.value;
        acc.add(p.clone() * (S::one() - p).powi(k - 1) * sub);
    }
    Ok(prev - acc.total())
}

/// `Pr[T_M <= k]` for a complete collection on a raw vector; the singleton is `1_{k>=1}`.
fn complete_cdf_raw<S: Scalar>(probs: &[S], k: u32) -> Result<S> {
    if probs.len() == 1 {
        return Ok(if k >= 1 { S::one() } else { S::zero() });
    }
    Ok(sign::<S>(probs.len()) * r_raw(probs, k)?)
}

/// `Pr[T_N = k]` through the exclusion recursion
/// `sum_l p_l (1-p_l)^(k-1) Pr[T_{N-1,{l}} <= k-1]`.
pub fn t_pdf_recursive<S: Scalar>(pop: &Popularity<S>, k: u32) -> Result<S> {
    if k == 0 {
        return Ok(S::zero());
    }
    let mut acc = S::Acc::default();
    for l in 0..pop.len() {
        let p = pop.get(l).clone();
        let rest = exclude_probs(pop.probs(), l);
        acc.add(p.clone() * (S::one() - p).powi(k - 1) * complete_cdf_raw(&rest, k - 1)?);
    }
    Ok(acc.total())
}

/// `E[T_n] = sum_{|J|<n} I_J` with `I_J` summed over orderings of `J`.
///
/// Depth-first over ordered prefixes; the suffix sum below a prefix only
/// depends on the prefix as a set, so it is memoized by bitmask.
pub fn ferrante_expectation<S: Scalar>(pop: &Popularity<S>, n: usize) -> Result<S> {
    check_size(pop, n, false)?;
    let big_n = pop.len();
    if big_n > 63 {
        return Err(Error::Capacity {
            what: "Ferrante recursion over a support larger than 63".into(),
            required: big_n as u128,
            cap: 63,
        });
    }
    let required: u128 = (0..n)
        .map(|j| num_traits::ToPrimitive::to_u128(&binomial(big_n as u64, j as i64)).unwrap_or(u128::MAX))
        .sum();
    let cap = max_subsets();
    if required > cap as u128 {
        return Err(Error::Capacity {
            what: format!("Ferrante prefixes of size < {n} over N = {big_n}"),
            required,
            cap,
        });
    }

    struct Walker<'a, S> {
        probs: &'a [S],
        depth_limit: u32,
        memo: HashMap<u64, S>,
    }

    impl<S: Scalar> Walker<'_, S> {
        fn suffix(&mut self, mask: u64, mass: &S) -> S {
            if mask.count_ones() >= self.depth_limit {
                return S::zero();
            }
            if let Some(v) = self.memo.get(&mask) {
                return v.clone();
            }
            let mut acc = S::Acc::default();
            for (i, p) in self.probs.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    continue;
                }
                let next_mass = mass.clone() + p.clone();
                let step = p.clone() / (S::one() - next_mass.clone());
                let below = self.suffix(mask | (1 << i), &next_mass);
                acc.add(step * (S::one() + below));
            }
            let v = acc.total();
            self.memo.insert(mask, v.clone());
            v
        }
    }

    let mut walker = Walker {
        probs: pop.probs(),
        depth_limit: n as u32 - 1,
        memo: HashMap::new(),
    };
    Ok(S::one() + walker.suffix(0, &S::zero()))
}

/// `sum_{|J|=j} I_J`, the size-`j` layer of the Ferrante expectation.
pub fn ferrante_layer<S: Scalar>(pop: &Popularity<S>, j: usize) -> Result<S> {
    if j == 0 {
        return Ok(S::one());
    }
    check_size(pop, j, false)?;
    if j == pop.len() {
        return Err(Error::Domain("I_J is undefined for the full set".into()));
    }
    Ok(ferrante_expectation(pop, j + 1)? - ferrante_expectation(pop, j)?)
}

/// Checks the three marginal relations between `T_n` and `W_k` at `(k, n)`:
/// (a) `sum_n Pr[T_n = k] = sum_i p_i (1-p_i)^(k-1)`,
/// (b) `sum_k Pr[W_k = n] = E[T_{n+1}] - E[T_n]`,
/// (c) `Pr[W_k < n] = Pr[T_n > k]`.
pub fn marginal_identities<S: Scalar>(pop: &Popularity<S>, k: u32, n: usize) -> Result<CheckReport> {
    let big_n = pop.len();
    if k == 0 {
        return Err(Error::Domain("marginal identities need k >= 1".into()));
    }
    if n == 0 || n >= big_n {
        return Err(Error::Domain(format!("marginal identities need 1 <= n < N, got n = {n}")));
    }
    let tol = 1e-9;
    let mut report = CheckReport::new("marginal_identities");

    let mut lhs = S::Acc::default();
    for m in 1..=big_n {
        lhs.add(t_pdf_point(pop, m, k)?);
    }
    let rhs = S::sum(pop.probs().iter().map(|p| p.clone() * (S::one() - p.clone()).powi(k - 1)));
    report.compare_tol(format!("(a) sum_n Pr[T_n={k}]"), &lhs.total(), Relation::Equal, &rhs, tol);

    let series = alternating_geometric_series(pop.probs(), &working_set_coefs::<S>(big_n, n))?;
    let delta = t_expectation(pop, n + 1)? - t_expectation(pop, n)?;
    report.compare_tol(format!("(b) sum_k Pr[W_k={n}]"), &series, Relation::Equal, &delta, tol);

    let w = w_distribution(pop, k)?;
    let w_below = w.cdf_at(n as u64 - 1).cloned().expect("n - 1 within 0..=N");
    let t_above = t_ccdf_point(pop, n, k)?;
    report.compare_tol(format!("(c) Pr[W_{k}<{n}] vs Pr[T_{n}>{k}]"), &w_below, Relation::Equal, &t_above, tol);
    if !S::EXACT {
        report.note("float mode: series (b) truncated with certified tail < 1e-12");
    }
    Ok(report)
}

/// `Pr[T_N <= k]` for real `k`, as `sum_J (-1)^(N-|J|) P_J^k`.
pub fn complete_cdf_continuous(pop: &Popularity<f64>, k: f64) -> Result<f64> {
    if k < 0.0 {
        return Err(Error::Domain(format!("k must be >= 0, got {k}")));
    }
    let big_n = pop.len();
    let mut acc = crate::scalar::NeumaierSum::default();
    for j in 0..=big_n {
        let s: f64 = if (big_n - j) % 2 == 0 { 1.0 } else { -1.0 };
        for_each_mass(pop.probs(), j, |m| {
            let v = if *m == 0.0 {
                if k == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                m.powf(k)
            };
            acc.add(s * v);
        })?;
    }
    Ok(acc.value())
}
