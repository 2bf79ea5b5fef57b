//! Numeric checkers for the inequalities, extremality results and identities
//! of the model, plus the randomized fuzzing driver and the standard suite.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ccp::{
    ferrante_expectation, marginal_identities, r_closed_form, r_recurrence_step, r_value, t_distribution,
    t_expectation, t_expectation_by_tail_sum, t_expectation_el, t_expectation_von_schelling, t_pdf_point,
    t_pdf_recursive, w_distribution, w_expectation, complete_cdf_continuous, t_cdf_complete_el,
};
use crate::combinatorics::{binomial, el_cdf_continuous, harmonic_real, integral_identity_check};
use crate::error::{Error, Result};
use crate::popularity::{ExactPopularity, FloatPopularity, Popularity};
use crate::report::{CheckReport, Outcome, Relation, Witness};
use crate::scalar::{Rational, Scalar};
use crate::sim::replication_rng;
use crate::subsets::sum_over;
use crate::ws_lru::{working_set, WsBase, WsCurve};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Relative tolerance for float-mode equalities.
const FLOAT_EQ_TOL: f64 = 1e-9;

fn eq_tol<S: Scalar>() -> f64 {
    if S::EXACT {
        0.0
    } else {
        FLOAT_EQ_TOL
    }
}

/// `Equal` on the uniform popularity, `strict` otherwise.
fn boundary_or<S: Scalar>(pop: &Popularity<S>, strict: Relation) -> Relation {
    if pop.is_uniform() {
        Relation::Equal
    } else {
        strict
    }
}

fn boundary_note<S: Scalar>(pop: &Popularity<S>, report: &mut CheckReport) {
    if pop.is_uniform() {
        report.note("EL boundary: equality expected");
    }
}

/// Compact text form of a popularity, e.g. `(1/2,1/4,1/4)`.
pub fn label<S: Scalar>(pop: &Popularity<S>) -> String {
    let parts: Vec<String> = pop.probs().iter().map(Scalar::render).collect();
    format!("({})", parts.join(","))
}

/// Power sums against the uniform value: `sum p^k > N^(1-k)` and `sum p^-k > N^(k+1)`.
pub fn check_power_sum_bounds<S: Scalar>(pop: &Popularity<S>, k_max: u32) -> CheckReport {
    let mut report = CheckReport::new("power_sum_bounds");
    boundary_note(pop, &mut report);
    let n = pop.len() as i64;
    let rel = boundary_or(pop, Relation::Greater);
    for k in 2..=k_max {
        let lhs = pop.power_sum(k);
        let rhs = S::one() / S::from_i64(n).powi(k - 1);
        report.compare_tol(format!("sum p^{k} vs N^(1-{k})"), &lhs, rel, &rhs, tol_for::<S>(rel));
        let lhs = S::sum(pop.probs().iter().map(|p| S::one() / p.powi(k)));
        let rhs = S::from_i64(n).powi(k + 1);
        report.compare_tol(format!("sum p^-{k} vs N^({k}+1)"), &lhs, rel, &rhs, tol_for::<S>(rel));
    }
    report
}

fn tol_for<S: Scalar>(rel: Relation) -> f64 {
    if rel == Relation::Equal {
        eq_tol::<S>()
    } else {
        crate::report::FLOAT_STRICT_TOL
    }
}

/// `sum p^k > (sum p^2)^(k-1)` for `3 <= k <= k_max`.
pub fn check_second_moment_bound<S: Scalar>(pop: &Popularity<S>, k_max: u32) -> CheckReport {
    let mut report = CheckReport::new("second_moment_bound");
    boundary_note(pop, &mut report);
    let rel = boundary_or(pop, Relation::Greater);
    let sq = pop.power_sum(2);
    for k in 3..=k_max {
        let lhs = pop.power_sum(k);
        let rhs = sq.powi(k - 1);
        report.compare_tol(format!("sum p^{k} vs (sum p^2)^{}", k - 1), &lhs, rel, &rhs, tol_for::<S>(rel));
    }
    report
}

/// Subset generalizations at size `j`: reciprocal sums of `1 - P_J` and `P_J`,
/// and `sum P_J^k > C(N,j) (j/N)^k` for `k` in `2..=4`.
pub fn check_subset_reciprocal_bound<S: Scalar>(pop: &Popularity<S>, j: usize) -> Result<CheckReport> {
    let n = pop.len();
    if j == 0 || j >= n {
        return Err(Error::Domain(format!("subset bound needs 0 < j < N = {n}, got {j}")));
    }
    let mut report = CheckReport::new(format!("subset_reciprocal_bound_j{j}"));
    boundary_note(pop, &mut report);
    let rel = boundary_or(pop, Relation::Greater);
    let tol = tol_for::<S>(rel);
    let c = S::from_bigint(&binomial(n as u64, j as i64));
    let nn = S::from_i64(n as i64);
    let jj = S::from_i64(j as i64);

    let lhs = sum_over(pop.probs(), j, |m| S::one() / (S::one() - m.clone()))?;
    let rhs = c.clone() * nn.clone() / (nn.clone() - jj.clone());
    report.compare_tol(format!("j={j}: sum 1/(1-P_J)"), &lhs, rel, &rhs, tol);

    let lhs = sum_over(pop.probs(), j, |m| S::one() / m.clone())?;
    let rhs = c.clone() * nn.clone() / jj.clone();
    report.compare_tol(format!("j={j}: sum 1/P_J"), &lhs, rel, &rhs, tol);

    for k in 2..=4u32 {
        let lhs = sum_over(pop.probs(), j, |m| m.powi(k))?;
        let rhs = c.clone() * (jj.clone() / nn.clone()).powi(k);
        report.compare_tol(format!("j={j}: sum P_J^{k}"), &lhs, rel, &rhs, tol);
    }
    Ok(report)
}

/// Elementary symmetric polynomials `e_0..=e_N` of the probabilities.
fn elementary_symmetric<S: Scalar>(probs: &[S]) -> Vec<S> {
    let mut e = vec![S::zero(); probs.len() + 1];
    e[0] = S::one();
    for (seen, p) in probs.iter().enumerate() {
        for n in (1..=seen + 1).rev() {
            e[n] = e[n].clone() + e[n - 1].clone() * p.clone();
        }
    }
    e
}

/// `prod (N p_i) < 1`, `e_n(p) < C(N,n)/N^n` for `2 <= n <= N`, and the
/// cubic consequence `2 sum(p^3 - 1/N^3) < 3 sum(p^2 - 1/N^2)`.
pub fn check_product_lemmas<S: Scalar>(pop: &Popularity<S>) -> CheckReport {
    let mut report = CheckReport::new("product_lemmas");
    boundary_note(pop, &mut report);
    let rel = boundary_or(pop, Relation::Less);
    let tol = tol_for::<S>(rel);
    let n = pop.len();
    let nn = S::from_i64(n as i64);
    let prod = pop.probs().iter().fold(S::one(), |acc, p| acc * nn.clone() * p.clone());
    report.compare_tol("prod N p_i vs 1", &prod, rel, &S::one(), tol);
    let e = elementary_symmetric(pop.probs());
    for m in 2..=n {
        let rhs = S::from_bigint(&binomial(n as u64, m as i64)) / nn.powi(m as u32);
        report.compare_tol(format!("e_{m}(p) vs C(N,{m})/N^{m}"), &e[m], rel, &rhs, tol);
    }
    if n >= 3 {
        let lhs = S::from_i64(2) * (pop.power_sum(3) - nn.clone() / nn.powi(3));
        let rhs = S::from_i64(3) * (pop.power_sum(2) - nn.clone() / nn.powi(2));
        report.compare_tol("2 sum(p^3 - N^-3) vs 3 sum(p^2 - N^-2)", &lhs, rel, &rhs, tol);
    }
    report
}

/// The uniform popularity is extremal: (a) smallest `E[T_n]`, (b) largest
/// `Pr[T_n <= k]`, (c) largest `E[W_k]`, (d) largest `(-1)^N R_N^k`.
pub fn check_el_extremality<S: Scalar>(pop: &Popularity<S>, n_max: usize, k_max: u32) -> Result<CheckReport> {
    let n = pop.len();
    let n_max = n_max.min(n);
    let mut report = CheckReport::new("el_extremality");
    boundary_note(pop, &mut report);
    let el = Popularity::<S>::uniform(n)?;
    let strict_less = boundary_or(pop, Relation::Less);
    let strict_greater = boundary_or(pop, Relation::Greater);
    let tol_l = tol_for::<S>(strict_less);
    let tol_g = tol_for::<S>(strict_greater);

    for m in 2..=n_max {
        let lhs = t_expectation(pop, m)?;
        let rhs = t_expectation_el::<S>(n, m)?;
        report.compare_tol(format!("(a) E[T_{m}]"), &lhs, strict_greater, &rhs, tol_g);
    }
    for m in 2..=n_max {
        if (k_max as usize) < m {
            continue;
        }
        let t = t_distribution(pop, m, k_max)?;
        let t_el = t_distribution(&el, m, k_max)?;
        for k in m as u64..=k_max as u64 {
            let (lhs, rhs) = (t.cdf_at(k).expect("in range"), t_el.cdf_at(k).expect("in range"));
            report.compare_tol(format!("(b) Pr[T_{m}<={k}]"), lhs, strict_less, rhs, tol_l);
        }
    }
    for k in 2..=k_max {
        let lhs = w_expectation(pop, k);
        let rhs = w_expectation(&el, k);
        report.compare_tol(format!("(c) E[W_{k}]"), &lhs, strict_less, &rhs, tol_l);
    }
    let sign = if n % 2 == 0 { S::one() } else { -S::one() };
    for k in n as u32..=k_max {
        let lhs = sign.clone() * r_value(pop, k)?.value;
        let rhs = S::from_rational(&t_cdf_complete_el(n, k));
        report.compare_tol(format!("(d) (-1)^N R_N^{k}"), &lhs, strict_less, &rhs, tol_l);
    }
    Ok(report)
}

/// Slopes at `x = 1+` of the duration and detection curves; on the uniform
/// popularity both equal `(N-1)/N^2` and `1 - (1-1/N)^(N(H_N - H_{N-n})) <= n/N`.
pub fn check_duration_detection<S: Scalar>(pop: &Popularity<S>) -> CheckReport {
    let mut report = CheckReport::new("duration_detection");
    let n = pop.len() as i64;
    let nn = S::from_i64(n);
    let duration = S::one() / (nn.clone() * S::sum(pop.probs().iter().map(|p| p.clone() / (S::one() - p.clone()))));
    let detection = (S::one() - pop.power_sum(2)) / nn.clone();
    if pop.is_uniform() {
        report.note("EL boundary: equal slopes expected");
        let el_slope = S::from_ratio(n - 1, n * n);
        let tol = eq_tol::<S>();
        report.compare_tol("duration slope vs (N-1)/N^2", &duration, Relation::Equal, &el_slope, tol);
        report.compare_tol("detection slope vs (N-1)/N^2", &detection, Relation::Equal, &el_slope, tol);
        let h_n = harmonic_real(n as u64, 1.0);
        for m in 0..=n {
            let e = n as f64 * (h_n - harmonic_real((n - m) as u64, 1.0));
            let lhs = -(e * (-1.0 / n as f64).ln_1p()).exp_m1();
            report.compare(format!("1-(1-1/N)^E[T_{m}] vs {m}/N"), &lhs, Relation::LessEq, &(m as f64 / n as f64));
        }
    } else {
        report.compare("duration slope vs detection slope", &duration, Relation::Less, &detection);
    }
    report
}

/// `j > WS(E[T_j]) > j - (j-1) e^(-H_{j-1})` for `2 <= j <= N`, exact base.
///
/// The working set is evaluated at a real time, so this check always runs in
/// floating point; `E[T_j]` itself is computed in the popularity's mode.
pub fn check_ws_sandwich<S: Scalar>(pop: &Popularity<S>) -> Result<CheckReport> {
    let mut report = CheckReport::new("ws_sandwich");
    let curve = WsCurve::new(pop, WsBase::Exact);
    for j in 2..=pop.len() {
        let e = t_expectation(pop, j)?.to_f64();
        let ws = working_set(&curve, e);
        let jf = j as f64;
        let lower = jf - (jf - 1.0) * (-harmonic_real(j as u64 - 1, 1.0)).exp();
        report.compare(format!("WS(E[T_{j}]) vs {j}"), &ws, Relation::LessEq, &jf);
        report.compare(format!("WS(E[T_{j}]) vs lower bound"), &ws, Relation::Greater, &lower);
    }
    Ok(report)
}

/// Structural identities of the distributions on one popularity: the
/// complete CDF against `R_N^k`, its closed forms, recurrences and shift
/// property, the four expectation formulas, and the marginal relations.
pub fn check_identities<S: Scalar>(pop: &Popularity<S>, k_max: u32) -> Result<CheckReport> {
    let n = pop.len();
    let tol = eq_tol::<S>();
    let eq = Relation::Equal;
    let mut report = CheckReport::new("identities");
    let k_top = k_max.max(n as u32 + 3);
    let sign = if n % 2 == 0 { S::one() } else { -S::one() };

    let t_full = t_distribution(pop, n, k_top)?;
    let r: Vec<S> = (0..=k_top).map(|k| r_value(pop, k).map(|v| v.value)).collect::<Result<_>>()?;
    for k in 1..=k_top {
        let cdf = t_full.cdf_at(k as u64).expect("in range");
        report.compare_tol(format!("Pr[T_N<={k}] vs (-1)^N R_N^{k}"), cdf, eq, &(sign.clone() * r[k as usize].clone()), tol);
        let rec = t_pdf_recursive(pop, k)?;
        report.compare_tol(format!("Pr[T_N={k}] by exclusion"), &rec, eq, t_full.pdf_at(k as u64).expect("in range"), tol);
    }
    for k in 0..n as u32 {
        report.compare_tol(format!("R_N^{k} vanishes"), &r[k as usize], eq, &S::zero(), tol);
    }
    for offset in 0..=3u32 {
        let closed = r_closed_form(pop, offset)?;
        report.compare_tol(format!("R_N^(N+{offset}) closed form"), &closed, eq, &r[n + offset as usize], tol);
    }
    if n >= 3 {
        for k in 1..=k_top {
            let step = r_recurrence_step(pop, k)?;
            report.compare_tol(format!("R_N^{k} recurrence step"), &step, eq, &r[k as usize], tol);
        }
    }
    // shift property: sum_J (-1)^|J| (a + P_J)^N = R_N^N
    for a in [S::from_ratio(1, 2), S::one(), S::from_i64(2)] {
        let mut acc = <S as Scalar>::zero();
        for j in 0..=n {
            let s = sum_over(pop.probs(), j, |m| (a.clone() + m.clone()).powi(n as u32))?;
            acc = if j % 2 == 0 { acc + s } else { acc - s };
        }
        report.compare_tol(format!("shift a={}", a.render()), &acc, eq, &r[n], tol);
    }
    // full-history recurrence
    for k in n as u32 + 1..=k_top {
        let s = S::sum((n as u32..k).map(|u| {
            let c = S::from_bigint(&binomial(k as u64, u as i64)) * r[u as usize].clone();
            if (n as u32 + u) % 2 == 0 {
                c
            } else {
                -c
            }
        }));
        if (k - n as u32) % 2 == 1 {
            report.compare_tol(format!("R_N^{k} full history"), &r[k as usize], eq, &(s / S::from_i64(2)), tol);
        } else {
            // vanishing sum: measure it against the size of its terms
            let scale = S::sum((n as u32..k).map(|u| {
                let c = S::from_bigint(&binomial(k as u64, u as i64)) * r[u as usize].clone();
                c.abs()
            }));
            report.compare_tol(format!("full history sum at k={k}"), &(s + scale.clone()), eq, &scale, tol);
        }
    }
    for m in 1..=n {
        let e = t_expectation(pop, m)?;
        report.compare_tol(format!("E[T_{m}] Von Schelling"), &t_expectation_von_schelling(pop, m)?, eq, &e, tol);
        report.compare_tol(format!("E[T_{m}] tail sum"), &t_expectation_by_tail_sum(pop, m)?, eq, &e, tol);
        if n <= 10 {
            report.compare_tol(format!("E[T_{m}] Ferrante"), &ferrante_expectation(pop, m)?, eq, &e, tol);
        }
    }
    for k in 1..=k_max {
        let total = S::sum((1..=n).map(|m| t_pdf_point(pop, m, k)).collect::<Result<Vec<_>>>()?);
        report.compare(format!("sum_n Pr[T_n={k}] positive"), &total, Relation::Greater, &S::zero());
        let w = w_distribution(pop, k)?;
        report.compare_tol(format!("sum_n Pr[W_{k}=n]"), &S::sum(w.pdf.iter().cloned()), eq, &S::one(), tol);
        for m in 1..n {
            report.absorb(marginal_identities(pop, k, m)?);
        }
    }
    Ok(report)
}

/// Exact EL recurrences on the uniform popularity of size `n`:
/// `Pr[T_{m+1}=k+1] = ((N-m)/N) Pr[T_m=k] + (m/N) Pr[T_{m+1}=k]` and
/// `Pr[W_{k+1}=m+1] = ((N-m)/N) Pr[W_k=m] + ((m+1)/N) Pr[W_k=m+1]`.
pub fn check_el_recurrences(n: usize, k_max: u32) -> Result<CheckReport> {
    let pop = ExactPopularity::uniform(n)?;
    let mut report = CheckReport::new(format!("el_recurrences[N={n}]"));
    let nn = n as i64;
    let frac = |a: i64| Rational::new(a.into(), nn.into());
    let t: Vec<_> = (1..=n).map(|m| t_distribution(&pop, m, k_max + 1)).collect::<Result<_>>()?;
    for m in 1..n {
        for k in 1..=k_max as u64 {
            let lhs = t[m].pdf_at(k + 1).expect("in range").clone();
            let rhs = frac(nn - m as i64) * t[m - 1].pdf_at(k).expect("in range").clone()
                + frac(m as i64) * t[m].pdf_at(k).expect("in range").clone();
            report.compare(format!("T: m={m} k={k}"), &lhs, Relation::Equal, &rhs);
        }
    }
    let w: Vec<_> = (0..=k_max + 1).map(|k| w_distribution(&pop, k)).collect::<Result<_>>()?;
    for k in 0..=k_max as usize {
        for m in 0..n as u64 {
            let lhs = w[k + 1].pdf_at(m + 1).expect("in range").clone();
            let rhs = frac(nn - m as i64) * w[k].pdf_at(m).expect("in range").clone()
                + frac(m as i64 + 1) * w[k].pdf_at(m + 1).expect("in range").clone();
            report.compare(format!("W: k={k} m={m}"), &lhs, Relation::Equal, &rhs);
        }
    }
    Ok(report)
}

/// `Pr[T_N <= E[T_N]]` for power laws of each skewness, by the continuous-`k`
/// CDF sum. For `N = 15` the values are also held to the empirical band `[0.55, 0.65]`.
pub fn check_cdf_at_expectation(n: usize, a_list: &[f64]) -> Result<CheckReport> {
    let mut report = CheckReport::new(format!("cdf_at_expectation[N={n}]"));
    report.note("empirical observation, not a theorem");
    for &a in a_list {
        let pop = FloatPopularity::power_law_real(n, a)?;
        let e = t_expectation(&pop, n)?;
        let v = complete_cdf_continuous(&pop, e)?;
        report.note(format!("a={a}: E[T_N]={e}, Pr[T_N<=E]={v}"));
        if n == 15 {
            report.compare(format!("a={a} lower"), &v, Relation::GreaterEq, &0.55);
            report.compare(format!("a={a} upper"), &v, Relation::LessEq, &0.65);
        }
    }
    Ok(report)
}

/// `Pr[T_N <= N H_N]` for the uniform popularity, held near its large-`N`
/// limit `e^(-e^(-gamma))` by the band `[0.568, 0.573]`.
pub fn check_erdos_renyi(n: u64) -> CheckReport {
    let mut report = CheckReport::new(format!("erdos_renyi[N={n}]"));
    let v = el_cdf_continuous(n, n as f64 * harmonic_real(n, 1.0));
    let limit = (-(-EULER_GAMMA).exp()).exp();
    report.note(format!("value={v}, limit={limit}"));
    report.compare("value vs 0.568", &v, Relation::GreaterEq, &0.568);
    report.compare("value vs 0.573", &v, Relation::LessEq, &0.573);
    report
}

/// One row of the simplex grid search over `sum_i (1-p_i)^E[T_j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Appendix14Row {
    pub j: usize,
    pub max_observed: f64,
    pub argmax: Vec<f64>,
    pub min_observed: f64,
    pub argmin: Vec<f64>,
    pub el_value: f64,
    pub bound: f64,
}

/// Maxima reported for `N = 6`, `j = 2..=6`.
pub const APPENDIX14_N6_MAXIMA: [f64; 5] = [4.36348, 3.44042, 2.47332, 1.49181, 0.509713];

#[derive(Debug, Clone, Copy)]
struct Extremum {
    value: f64,
    point: [u32; 16],
}

impl Extremum {
    fn better(self, other: Self, maximize: bool) -> Self {
        let ord = self.value.total_cmp(&other.value);
        let pick_self = match ord {
            std::cmp::Ordering::Equal => self.point <= other.point,
            std::cmp::Ordering::Greater => maximize,
            std::cmp::Ordering::Less => !maximize,
        };
        if pick_self {
            self
        } else {
            other
        }
    }
}

/// `(E[T_2], ..., E[T_N])` in floating point from all `2^N` subset masses.
fn expectations_by_bitmask(p: &[f64], coefs: &[Vec<f64>]) -> Vec<f64> {
    let n = p.len();
    let mut mass = vec![0.0; 1 << n];
    let mut by_size = vec![0.0; n];
    for mask in 1usize..(1 << n) {
        let low = mask.trailing_zeros() as usize;
        mass[mask] = mass[mask & (mask - 1)] + p[low];
    }
    for (mask, m) in mass.iter().enumerate() {
        let size = mask.count_ones() as usize;
        if size < n {
            by_size[size] += 1.0 / (1.0 - m);
        }
    }
    (2..=n)
        .map(|j| (0..j).map(|m| coefs[j][m] * by_size[m]).sum())
        .collect()
}

/// Grid search of `sum_i (1-p_i)^E[T_j]` over the simplex.
///
/// The first `N-1` coordinates run over `1e-5 + grid_step * m` and the last
/// takes the remainder. The target is symmetric in the coordinates, so only
/// nondecreasing free coordinates are visited.
pub fn appendix14_rows(n: usize, grid_step: f64) -> Result<Vec<Appendix14Row>> {
    if !(2..=16).contains(&n) {
        return Err(Error::Domain(format!("grid search supports 2 <= N <= 16, got {n}")));
    }
    if !(grid_step > 0.0 && grid_step < 1.0) {
        return Err(Error::Domain(format!("grid step must be in (0,1), got {grid_step}")));
    }
    const FLOOR: f64 = 1e-5;
    let free = n - 1;
    let steps = ((1.0 - FLOOR * free as f64) / grid_step).floor() as u32;
    // coefs[j][m] = (-1)^(j-1-m) C(N-m-1, N-j)
    let coefs: Vec<Vec<f64>> = (0..=n)
        .map(|j| {
            (0..j)
                .map(|m| {
                    let c = crate::scalar::ratio_to_f64(&Rational::from_integer(binomial(
                        (n - m - 1) as u64,
                        (n - j) as i64,
                    )));
                    if (j - 1 - m) % 2 == 0 {
                        c
                    } else {
                        -c
                    }
                })
                .collect()
        })
        .collect();
    let coord = |m: u32| FLOOR + grid_step * m as f64;

    let evaluate = |ms: &[u32]| -> Option<Vec<f64>> {
        let mut p: Vec<f64> = ms.iter().map(|&m| coord(m)).collect();
        let last = 1.0 - p.iter().sum::<f64>();
        if last <= 0.0 {
            return None;
        }
        p.push(last);
        let es = expectations_by_bitmask(&p, &coefs);
        Some(
            es.iter()
                .map(|&e| p.iter().map(|&q| (e * (-q).ln_1p()).exp()).sum())
                .collect(),
        )
    };

    let blank = Extremum { value: f64::NAN, point: [0; 16] };
    let init = || (vec![blank; n - 1], vec![blank; n - 1]);
    let merge = |mut acc: (Vec<Extremum>, Vec<Extremum>), other: (Vec<Extremum>, Vec<Extremum>)| {
        for i in 0..acc.0.len() {
            acc.0[i] = pick(acc.0[i], other.0[i], true);
            acc.1[i] = pick(acc.1[i], other.1[i], false);
        }
        acc
    };
    let (maxima, minima) = (0..=steps)
        .into_par_iter()
        .map(|first| {
            let mut acc = init();
            let mut ms = vec![first; free];
            // odometer over nondecreasing sequences starting at `first`
            loop {
                let sum_so_far: f64 = ms.iter().map(|&m| coord(m)).sum();
                if sum_so_far < 1.0 {
                    if let Some(vals) = evaluate(&ms) {
                        let mut point = [0u32; 16];
                        point[..free].copy_from_slice(&ms);
                        for (i, v) in vals.into_iter().enumerate() {
                            let cand = Extremum { value: v, point };
                            acc.0[i] = pick(acc.0[i], cand, true);
                            acc.1[i] = pick(acc.1[i], cand, false);
                        }
                    }
                }
                // advance the rightmost coordinate that keeps the sum feasible
                let mut pos = free;
                loop {
                    if pos == 1 {
                        return acc;
                    }
                    pos -= 1;
                    ms[pos] += 1;
                    for t in pos + 1..free {
                        ms[t] = ms[pos];
                    }
                    let total: f64 = ms.iter().map(|&m| coord(m)).sum();
                    if total < 1.0 {
                        break;
                    }
                }
            }
        })
        .reduce(init, merge);

    let point_of = |e: &Extremum| -> Vec<f64> {
        let mut p: Vec<f64> = e.point[..free].iter().map(|&m| coord(m)).collect();
        p.push(1.0 - p.iter().sum::<f64>());
        p
    };
    let el = FloatPopularity::uniform(n)?;
    let curve = WsCurve::new(&el, WsBase::Exact);
    (2..=n)
        .map(|j| {
            let i = j - 2;
            let jf = j as f64;
            let e_el = t_expectation_el::<f64>(n, j)?;
            Ok(Appendix14Row {
                j,
                max_observed: maxima[i].value,
                argmax: point_of(&maxima[i]),
                min_observed: minima[i].value,
                argmin: point_of(&minima[i]),
                el_value: n as f64 - working_set(&curve, e_el),
                bound: n as f64 - jf + (jf - 1.0) * (-harmonic_real(j as u64 - 1, 1.0)).exp(),
            })
        })
        .collect()
}

fn pick(a: Extremum, b: Extremum, maximize: bool) -> Extremum {
    match (a.value.is_nan(), b.value.is_nan()) {
        (true, _) => b,
        (_, true) => a,
        _ => a.better(b, maximize),
    }
}

/// Grid search report: each maximum stays within its bound, and for `N = 6`
/// the maxima match the published table within `1e-2`.
pub fn appendix14_table(n: usize, grid_step: f64) -> Result<CheckReport> {
    let rows = appendix14_rows(n, grid_step)?;
    let mut report = CheckReport::new(format!("appendix14_table[N={n}]"));
    for row in &rows {
        let j = row.j;
        report.compare(format!("j={j} max vs bound"), &row.max_observed, Relation::LessEq, &row.bound);
        report.compare(format!("j={j} max vs EL"), &row.max_observed, Relation::GreaterEq, &row.el_value);
        if n == 6 {
            let published = APPENDIX14_N6_MAXIMA[j - 2];
            let margin = 1e-2 - (row.max_observed - published).abs();
            report.push(Witness {
                input: format!("j={j} max vs published {published} (+-1e-2)"),
                relation: Relation::Equal,
                lhs: crate::scalar::format_float(row.max_observed),
                rhs: crate::scalar::format_float(published),
                margin,
                outcome: if margin >= 0.0 { Outcome::Pass } else { Outcome::Fail },
            });
        }
        report.note(format!(
            "j={j}: max={} min={} EL={} bound={}",
            row.max_observed, row.min_observed, row.el_value, row.bound
        ));
    }
    Ok(report)
}

/// A property check that can run in either arithmetic mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    PowerSumBounds { k_max: u32 },
    SecondMomentBound { k_max: u32 },
    SubsetReciprocalBound { j: usize },
    ProductLemmas,
    ElExtremality { n_max: usize, k_max: u32 },
    DurationDetection,
    WsSandwich,
    Identities { k_max: u32 },
}

impl Check {
    pub fn run<S: Scalar>(&self, pop: &Popularity<S>) -> Result<CheckReport> {
        match *self {
            Check::PowerSumBounds { k_max } => Ok(check_power_sum_bounds(pop, k_max)),
            Check::SecondMomentBound { k_max } => Ok(check_second_moment_bound(pop, k_max)),
            Check::SubsetReciprocalBound { j } => check_subset_reciprocal_bound(pop, j),
            Check::ProductLemmas => Ok(check_product_lemmas(pop)),
            Check::ElExtremality { n_max, k_max } => check_el_extremality(pop, n_max, k_max),
            Check::DurationDetection => Ok(check_duration_detection(pop)),
            Check::WsSandwich => check_ws_sandwich(pop),
            Check::Identities { k_max } => check_identities(pop, k_max),
        }
    }

    /// Float evaluation; indeterminate margins are settled by re-running on
    /// the exact rational image of the same doubles.
    pub fn run_resolving(&self, pop: &FloatPopularity) -> Result<CheckReport> {
        let report = self.run(pop)?;
        if report.indeterminate_count() == 0 || *self == Check::WsSandwich {
            return Ok(report);
        }
        let mut exact = self.run(&pop.to_exact()?)?;
        exact.note(format!(
            "{} indeterminate float margins re-evaluated in exact mode",
            report.indeterminate_count()
        ));
        Ok(exact)
    }

    /// The inequality and extremality checks applicable to a support of size `n`.
    pub fn inequality_set(n: usize) -> Vec<Check> {
        let mut checks = vec![
            Check::PowerSumBounds { k_max: 6 },
            Check::SecondMomentBound { k_max: 6 },
            Check::ProductLemmas,
            Check::DurationDetection,
            Check::ElExtremality {
                n_max: n,
                k_max: n as u32 + 4,
            },
        ];
        checks.extend((1..n).map(|j| Check::SubsetReciprocalBound { j }));
        checks
    }
}

/// Random integer weights in `1..=1000` with `N` uniform in `n_lo..=n_hi`,
/// rejecting the (rare) all-equal draw.
pub fn random_popularity(rng: &mut impl Rng, n_lo: usize, n_hi: usize) -> Result<ExactPopularity> {
    loop {
        let n = rng.random_range(n_lo..=n_hi);
        let weights: Vec<Rational> = (0..n).map(|_| Rational::from_integer(rng.random_range(1..=1000i64).into())).collect();
        let pop = ExactPopularity::from_weights(weights)?;
        if !pop.is_uniform() {
            return Ok(pop);
        }
    }
}

/// Runs every inequality check on `count` random non-uniform popularities.
///
/// Only failing or indeterminate witnesses are kept; the notes carry totals.
pub fn fuzz_inequalities(seed: u64, count: usize, n_lo: usize, n_hi: usize, exact: bool) -> Result<CheckReport> {
    let results: Vec<Result<(usize, CheckReport)>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = replication_rng(seed, i);
            let pop = random_popularity(&mut rng, n_lo, n_hi)?;
            let mut point = CheckReport::new(format!("#{i} {}", label(&pop)));
            let float = pop.to_f64();
            for check in Check::inequality_set(pop.len()) {
                let r = if exact { check.run(&pop)? } else { check.run_resolving(&float)? };
                point.absorb(r);
            }
            Ok((point.witnesses.len(), point))
        })
        .collect();
    let mut report = CheckReport::new("fuzz_inequalities");
    let mut total = 0;
    for r in results {
        let (n, point) = r?;
        total += n;
        let name = point.name.clone();
        for mut w in point.witnesses.into_iter().filter(|w| w.outcome != Outcome::Pass) {
            w.input = format!("{name}: {}", w.input);
            report.push(w);
        }
    }
    report.note(format!(
        "{count} popularities, {total} witnesses, {} failed, {} indeterminate, {} mode",
        report.failure_count(),
        report.indeterminate_count(),
        if exact { "exact" } else { "float" }
    ));
    Ok(report)
}

fn named(mut report: CheckReport, suffix: &str) -> CheckReport {
    report.name = format!("{}[{suffix}]", report.name);
    report
}

/// The standard verification suite, sorted by report name.
///
/// `full` adds the `N = 6` simplex grid search and a 1000-point fuzz run.
pub fn run_suite(full: bool) -> Result<Vec<CheckReport>> {
    let q = |n: i64, d: i64| Rational::new(n.into(), d.into());
    let mut pops: Vec<ExactPopularity> = vec![
        ExactPopularity::from_probs(vec![q(1, 2), q(1, 4), q(1, 4)])?,
        ExactPopularity::from_probs(vec![q(9, 10), q(1, 20), q(1, 20)])?,
        ExactPopularity::from_probs(vec![q(1, 10), q(2, 10), q(3, 10), q(4, 10)])?,
        ExactPopularity::power_law(5, 1)?,
        ExactPopularity::power_law(6, 2)?,
    ];
    pops.extend((2..=6).map(ExactPopularity::uniform).collect::<Result<Vec<_>>>()?);

    let mut jobs: Vec<(Check, ExactPopularity)> = Vec::new();
    for pop in &pops {
        let mut set = Check::inequality_set(pop.len());
        set.push(Check::WsSandwich);
        set.push(Check::Identities { k_max: 4 });
        jobs.extend(set.into_iter().map(|c| (c, pop.clone())));
    }
    let mut reports: Vec<CheckReport> = jobs
        .par_iter()
        .map(|(check, pop)| check.run(pop).map(|r| named(r, &label(pop))))
        .collect::<Result<_>>()?;

    for n in [3, 6, 10] {
        reports.push(check_el_recurrences(n, 12)?);
    }
    let mut integral = CheckReport::new("integral_identity");
    for a in 0..=8 {
        for b in 0..=8 {
            integral.absorb(integral_identity_check(a, b));
        }
    }
    reports.push(integral);
    reports.push(check_cdf_at_expectation(15, &[0.0, 1.0, 2.0, 3.0, 4.0])?);
    reports.push(check_erdos_renyi(1000));
    reports.push(fuzz_inequalities(2024, if full { 1000 } else { 100 }, 3, 7, true)?);
    if full {
        reports.push(appendix14_table(6, 0.01)?);
    }
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn hq() -> ExactPopularity {
        ExactPopularity::from_probs(vec![q(1, 2), q(1, 4), q(1, 4)]).unwrap()
    }

    fn skew() -> FloatPopularity {
        FloatPopularity::from_probs(vec![0.9, 0.05, 0.05]).unwrap()
    }

    #[test]
    fn power_sum_examples() {
        let r = check_power_sum_bounds(&ExactPopularity::uniform(2).unwrap(), 2);
        assert!(r.passed);
        assert_eq!(r.witnesses[0].relation, Relation::Equal);
        assert_eq!(r.witnesses[0].lhs, "1/2");
        let r = check_power_sum_bounds(&hq(), 3);
        assert!(r.passed);
        assert_eq!((r.witnesses[0].lhs.as_str(), r.witnesses[0].rhs.as_str()), ("3/8", "1/3"));
        assert_eq!((r.witnesses[2].lhs.as_str(), r.witnesses[2].rhs.as_str()), ("5/32", "1/9"));
    }

    #[test]
    fn second_moment_examples() {
        let r = check_second_moment_bound(&hq(), 3);
        assert!(r.passed);
        assert_eq!((r.witnesses[0].lhs.as_str(), r.witnesses[0].rhs.as_str()), ("5/32", "9/64"));
        let r = check_second_moment_bound(&ExactPopularity::uniform(4).unwrap(), 6);
        assert!(r.passed && r.witnesses.iter().all(|w| w.lhs == w.rhs));
        let r = check_second_moment_bound(&skew(), 4);
        assert!(r.passed && r.witnesses[1].margin > 0.0);
    }

    #[test]
    fn subset_reciprocal_examples() {
        let r = check_subset_reciprocal_bound(&ExactPopularity::uniform(4).unwrap(), 2).unwrap();
        assert!(r.passed);
        assert_eq!(r.witnesses[0].lhs, "12");
        let r = check_subset_reciprocal_bound(&hq(), 1).unwrap();
        assert!(r.passed);
        assert_eq!((r.witnesses[0].lhs.as_str(), r.witnesses[0].rhs.as_str()), ("14/3", "9/2"));
        let r = check_subset_reciprocal_bound(&hq(), 2).unwrap();
        assert!(r.passed && r.witnesses.iter().all(|w| w.margin > 0.0));
        assert!(check_subset_reciprocal_bound(&hq(), 3).is_err());
    }

    #[test]
    fn product_lemma_examples() {
        let r = check_product_lemmas(&hq());
        assert!(r.passed);
        assert_eq!(r.witnesses[0].lhs, "27/32");
        assert_eq!((r.witnesses[1].lhs.as_str(), r.witnesses[1].rhs.as_str()), ("5/16", "1/3"));
        let r = check_product_lemmas(&ExactPopularity::uniform(5).unwrap());
        assert!(r.passed);
        assert_eq!(r.witnesses[0].lhs, "1");
        assert!(r.notes.contains("EL boundary"));
    }

    #[test]
    fn elementary_symmetric_matches_enumeration() {
        let p = ExactPopularity::power_law(6, 1).unwrap();
        let e = elementary_symmetric(p.probs());
        for m in 0..=6usize {
            let mut brute = q(0, 1);
            for mask in 0u32..64 {
                if mask.count_ones() as usize == m {
                    brute += (0..6).filter(|i| mask >> i & 1 == 1).fold(q(1, 1), |acc, i| acc * p.get(i).clone());
                }
            }
            assert_eq!(e[m], brute);
        }
    }

    #[test]
    fn el_extremality_examples() {
        let r = check_el_extremality(&hq(), 3, 6).unwrap();
        assert!(r.passed, "{r:?}");
        let a3 = r.witnesses.iter().find(|w| w.input == "(a) E[T_3]").unwrap();
        assert_eq!(a3.rhs, "11/2");
        let d3 = r.witnesses.iter().find(|w| w.input == "(d) (-1)^N R_N^3").unwrap();
        assert_eq!((d3.lhs.as_str(), d3.rhs.as_str()), ("3/16", "2/9"));
        let r = check_el_extremality(&ExactPopularity::from_probs(vec![q(1, 2), q(1, 2)]).unwrap(), 2, 6).unwrap();
        assert!(r.passed && r.witnesses.iter().all(|w| w.relation == Relation::Equal));
    }

    #[test]
    fn duration_detection_examples() {
        let r = check_duration_detection(&ExactPopularity::uniform(5).unwrap());
        assert!(r.passed, "{r:?}");
        assert_eq!(r.witnesses[0].rhs, "4/25");
        let r = check_duration_detection(&hq());
        assert!(r.passed);
        assert_eq!((r.witnesses[0].lhs.as_str(), r.witnesses[0].rhs.as_str()), ("1/5", "5/24"));
        let r = check_duration_detection(&skew());
        assert!(r.passed && r.witnesses[0].margin > 0.0);
    }

    #[test]
    fn identities_hold_exactly() {
        for pop in [hq(), ExactPopularity::power_law(4, 1).unwrap(), ExactPopularity::uniform(3).unwrap()] {
            let r = check_identities(&pop, 4).unwrap();
            assert!(r.passed, "{:?}", r.witnesses.iter().find(|w| w.outcome != Outcome::Pass));
        }
    }

    #[test]
    fn identities_hold_in_float() {
        let r = check_identities(&FloatPopularity::power_law_real(5, 0.7).unwrap(), 4).unwrap();
        assert!(r.passed, "{:?}", r.witnesses.iter().find(|w| w.outcome != Outcome::Pass));
    }

    #[test]
    fn el_recurrences_hold() {
        let r = check_el_recurrences(4, 10).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn ws_sandwich_examples() {
        for pop in [hq().to_f64(), skew(), FloatPopularity::uniform(7).unwrap()] {
            let r = check_ws_sandwich(&pop).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn float_indeterminate_falls_back_to_exact() {
        // nearly uniform: float margins vanish into the band
        let eps = 1e-9;
        let pop = FloatPopularity::from_probs(vec![0.25 + eps, 0.25 - eps, 0.25, 0.25]).unwrap();
        let float = Check::ProductLemmas.run(&pop).unwrap();
        assert!(float.indeterminate_count() > 0);
        let resolved = Check::ProductLemmas.run_resolving(&pop).unwrap();
        assert_eq!(resolved.indeterminate_count(), 0);
        assert!(resolved.passed, "{resolved:?}");
        assert!(resolved.notes.contains("exact mode"));
    }

    #[test]
    fn appendix14_small_case() {
        let rows = appendix14_rows(3, 0.001).unwrap();
        let j3 = &rows[1];
        assert!((j3.min_observed - 0.312403).abs() < 1e-3, "{j3:?}");
        assert!(j3.min_observed < j3.el_value);
        assert!((j3.el_value - 0.322567).abs() < 1e-6);
        let mut sorted = j3.argmin.clone();
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[0] - 0.167).abs() < 0.01 && (sorted[2] - 0.417).abs() < 0.01, "{sorted:?}");
        for row in &rows {
            assert!(row.max_observed <= row.bound);
        }
    }

    #[test]
    fn fuzz_small_run() {
        let r = fuzz_inequalities(7, 20, 3, 5, true).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.witnesses.is_empty());
        let f = fuzz_inequalities(7, 20, 3, 5, false).unwrap();
        assert!(f.passed, "{f:?}");
    }
}
