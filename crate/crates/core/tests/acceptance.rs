//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the lines always show.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;

use ccp_core::ccp::{r_closed_form, r_recurrence_step, r_value, t_distribution, t_expectation, w_distribution};
use ccp_core::checks::{self, check_el_recurrences, check_identities, random_popularity, Check};
use ccp_core::combinatorics::{el_cdf_continuous, harmonic_real};
use ccp_core::sim::{replication_rng, sim_lru_miss_rate, sim_waiting_time, SimConfig, SimReport};
use ccp_core::ws_lru::{
    fagin_miss_rate, mr_delta_product, working_set, ws_powerlaw_closed, ws_powerlaw_inverse, PowerLawModel, WsBase,
    WsCurve,
};
use ccp_core::scalar::ratio_to_f64;
use ccp_core::{ExactPopularity, FloatPopularity, Outcome, Rational, Relation};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Verdict of one criterion.
struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
        }
    }
}

/// `dist[k][m] = Pr[m distinct items after k draws]`, by pushing the exact
/// probability of every set of seen items through each draw. This is the
/// exhaustive stream sum with streams grouped by the set they have seen.
fn seen_set_oracle(p: &[Rational], k_max: usize) -> (Vec<Vec<Rational>>, Vec<HashMap<u32, Rational>>) {
    let n = p.len();
    let mut states: HashMap<u32, Rational> = HashMap::from([(0, Rational::one())]);
    let mut history = vec![states.clone()];
    for _ in 0..k_max {
        let mut next: HashMap<u32, Rational> = HashMap::new();
        for (mask, pr) in &states {
            for (i, pi) in p.iter().enumerate() {
                *next.entry(mask | 1 << i).or_insert_with(Rational::zero) += pr * pi;
            }
        }
        states = next;
        history.push(states.clone());
    }
    let dist = history
        .iter()
        .map(|h| {
            let mut row = vec![Rational::zero(); n + 1];
            for (mask, pr) in h {
                row[mask.count_ones() as usize] += pr;
            }
            row
        })
        .collect();
    (dist, history)
}

/// Literal enumeration of all `N^k` streams: `Pr[m distinct after k draws]`.
fn stream_enumeration(p: &[Rational], k: usize) -> Vec<Rational> {
    let n = p.len();
    let mut out = vec![Rational::zero(); n + 1];
    let total = n.pow(k as u32);
    for code in 0..total {
        let (mut c, mut mask, mut pr) = (code, 0u32, Rational::one());
        for _ in 0..k {
            let i = c % n;
            c /= n;
            mask |= 1 << i;
            pr *= &p[i];
        }
        out[mask.count_ones() as usize] += pr;
    }
    out
}

/// `Pr[T_n = k]` from the seen-set states after `k - 1` draws.
fn oracle_t_pdf(p: &[Rational], history: &[HashMap<u32, Rational>], n: usize, k: usize) -> Rational {
    if k == 0 {
        return Rational::zero();
    }
    let mut acc = Rational::zero();
    for (mask, pr) in &history[k - 1] {
        if mask.count_ones() as usize == n - 1 {
            let seen: Rational = (0..p.len()).filter(|i| mask >> i & 1 == 1).map(|i| p[i].clone()).sum();
            acc += pr * (Rational::one() - seen);
        }
    }
    acc
}

fn criterion_1() -> Verdict {
    let mut rng = replication_rng(1, 0);
    let mut pops: Vec<ExactPopularity> = Vec::new();
    for n in 2..=6 {
        pops.push(ExactPopularity::uniform(n).unwrap());
        pops.push(ExactPopularity::power_law(n, 1).unwrap());
        pops.push(ExactPopularity::power_law(n, 2).unwrap());
        for _ in 0..3 {
            let w = (0..n).map(|_| Rational::from_integer(rng.random_range(1..=50i64).into())).collect();
            pops.push(ExactPopularity::from_weights(w).unwrap());
        }
    }
    pops.push(ExactPopularity::from_probs(vec![q(1, 2), q(1, 4), q(1, 4)]).unwrap());
    pops.push(ExactPopularity::from_probs(vec![q(9, 10), q(1, 20), q(1, 20)]).unwrap());

    let mut compared = 0usize;
    for pop in &pops {
        let p = pop.probs();
        let big_n = p.len();
        let k_top = big_n + 6;
        let (dist, history) = seen_set_oracle(p, k_top);
        // the grouped sum agrees with literal stream enumeration where that is cheap
        for k in 0..=k_top {
            if big_n.pow(k as u32) <= 50_000 && dist[k] != stream_enumeration(p, k) {
                return Verdict::new(false, format!("oracle self-check failed at N={big_n} k={k}"));
            }
        }
        for n in 1..=big_n {
            let t = t_distribution(pop, n, (n + 6) as u32).unwrap();
            for k in 1..=n + 6 {
                let want = oracle_t_pdf(p, &history, n, k);
                if t.pdf_at(k as u64) != Some(&want) {
                    return Verdict::new(false, format!("T_{n} pmf at k={k} differs for {}", checks::label(pop)));
                }
                let cdf: Rational = (1..=k).map(|x| oracle_t_pdf(p, &history, n, x)).sum();
                if t.cdf_at(k as u64) != Some(&cdf) || t.ccdf_at(k as u64) != Some(&(Rational::one() - &cdf)) {
                    return Verdict::new(false, format!("T_{n} cdf at k={k} differs for {}", checks::label(pop)));
                }
                compared += 1;
            }
        }
        for k in 0..=k_top {
            let w = w_distribution(pop, k as u32).unwrap();
            for m in 0..=big_n {
                if w.pdf_at(m as u64) != Some(&dist[k][m]) {
                    return Verdict::new(false, format!("W_{k} pmf at n={m} differs for {}", checks::label(pop)));
                }
                compared += 1;
            }
        }
    }
    Verdict::new(true, format!("{} popularities, {compared} pmf values equal", pops.len()))
}

fn stirling_table(k_max: usize, n_max: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::zero(); n_max + 1]; k_max + 1];
    s[0][0] = BigInt::one();
    for k in 1..=k_max {
        for n in 1..=n_max.min(k) {
            s[k][n] = BigInt::from(n) * &s[k - 1][n] + &s[k - 1][n - 1];
        }
    }
    s
}

fn criterion_2() -> Verdict {
    for big_n in 1..=12usize {
        let pop = if big_n == 1 { None } else { Some(ExactPopularity::uniform(big_n).unwrap()) };
        let h = |m: usize| (1..=m).map(|i| q(1, i as i64)).sum::<Rational>();
        if let Some(pop) = pop {
            for n in 1..=big_n {
                let want = Rational::from_integer(big_n.into()) * (h(big_n) - h(big_n - n));
                let got = t_expectation(&pop, n).unwrap();
                if got != want {
                    return Verdict::new(false, format!("E[T_{n}] for N={big_n}: {got} vs {want}"));
                }
            }
        }
    }
    let s = stirling_table(40, 10);
    for big_n in 2..=10usize {
        let pop = ExactPopularity::uniform(big_n).unwrap();
        let t = t_distribution(&pop, big_n, 40).unwrap();
        let fact: BigInt = (1..=big_n).map(BigInt::from).product();
        for k in 1..=40usize {
            let want = Rational::new(&fact * &s[k][big_n], BigInt::from(big_n).pow(k as u32));
            if t.cdf_at(k as u64) != Some(&want) {
                return Verdict::new(false, format!("Pr[T_N<={k}] for N={big_n}"));
            }
        }
    }
    Verdict::new(true, "E[T_n] for N<=12 and Pr[T_N<=k] for N<=10, k<=40 exact")
}

fn criterion_3() -> Verdict {
    let mut rng = replication_rng(3, 0);
    for i in 0..50 {
        let pop = random_popularity(&mut rng, 2, 7).unwrap();
        let n = pop.len() as u32;
        for offset in 0..=3 {
            let r = r_value(&pop, n + offset).unwrap().value;
            if r_closed_form(&pop, offset).unwrap() != r {
                return Verdict::new(false, format!("#{i} offset {offset} on {}", checks::label(&pop)));
            }
        }
        if n >= 3 {
            for k in 1..=n + 4 {
                if r_recurrence_step(&pop, k).unwrap() != r_value(&pop, k).unwrap().value {
                    return Verdict::new(false, format!("#{i} recurrence at k={k} on {}", checks::label(&pop)));
                }
            }
        }
    }
    Verdict::new(true, "50 random popularities: offsets 0-3 and recurrence step exact")
}

fn criterion_4() -> Verdict {
    let mut rng = replication_rng(4, 0);
    let mut witnesses = 0;
    for n in 2..=7 {
        let mut grid = vec![
            ExactPopularity::uniform(n).unwrap(),
            ExactPopularity::power_law(n, 1).unwrap(),
            ExactPopularity::power_law(n, 2).unwrap(),
        ];
        grid.push(random_popularity(&mut rng, n, n).unwrap());
        for pop in &grid {
            let r = check_identities(pop, 4).unwrap();
            witnesses += r.witnesses.len();
            if !r.passed {
                let w = r.witnesses.iter().find(|w| w.outcome != Outcome::Pass).unwrap();
                return Verdict::new(false, format!("{}: {} ({} vs {})", checks::label(pop), w.input, w.lhs, w.rhs));
            }
        }
        let r = check_el_recurrences(n, 12).unwrap();
        witnesses += r.witnesses.len();
        if !r.passed {
            return Verdict::new(false, format!("EL/Read recurrences for N={n}"));
        }
    }
    Verdict::new(true, format!("{witnesses} exact witnesses on the N<=7 grid"))
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let v = el_cdf_continuous(1000, 1000.0 * harmonic_real(1000, 1.0));
    let took = start.elapsed();
    let pass = (0.568..=0.573).contains(&v) && took < Duration::from_secs(5);
    Verdict::new(pass, format!("value {v:.6}, {took:.2?}"))
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let r = checks::check_cdf_at_expectation(15, &[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
    let took = start.elapsed();
    let values: Vec<String> = r.witnesses.iter().step_by(2).map(|w| format!("{:.4}", w.lhs.parse::<f64>().unwrap())).collect();
    Verdict::new(
        r.passed && r.witnesses.len() == 10 && took < Duration::from_secs(300),
        format!("values {} in [0.55, 0.65], {took:.2?}", values.join(", ")),
    )
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    let rows = checks::appendix14_rows(6, 0.01).unwrap();
    let took = start.elapsed();
    let mut pass = took < Duration::from_secs(600);
    let mut maxima = Vec::new();
    for r in &rows {
        let published = checks::APPENDIX14_N6_MAXIMA[r.j - 2];
        pass &= (r.max_observed - published).abs() <= 1e-2 && r.max_observed <= r.bound;
        maxima.push(format!("{:.6}", r.max_observed));
    }
    Verdict::new(pass, format!("maxima {}, {took:.2?}", maxima.join(", ")))
}

fn criterion_8() -> Verdict {
    for n in 2..=20 {
        let pop = ExactPopularity::uniform(n).unwrap();
        for j in 1..n {
            let v = mr_delta_product(&pop, j).unwrap();
            if v != 1.0 {
                return Verdict::new(false, format!("uniform({n}) j={j}: {v}"));
            }
        }
    }
    let zipf = FloatPopularity::power_law_real(12, 1.0).unwrap();
    let mut products = Vec::new();
    for j in 8..=11 {
        let v = mr_delta_product(&zipf, j).unwrap();
        if !(0.9..=1.1).contains(&v) {
            return Verdict::new(false, format!("zipf(12) j={j}: {v}"));
        }
        products.push(format!("{v:.4}"));
    }
    Verdict::new(true, format!("uniform exact 1; zipf(12) j=8..11: {}", products.join(", ")))
}

/// Stationary LRU miss rate by the recursion over the set of the `j` most
/// recently referenced distinct items.
fn lru_oracle(pop: &ExactPopularity, j: usize) -> f64 {
    let p = pop.probs();
    let n = p.len();
    let mass = |mask: usize| -> Rational { (0..n).filter(|i| mask >> i & 1 == 1).map(|i| p[i].clone()).sum() };
    let mut layer: HashMap<usize, Rational> = HashMap::from([(0, Rational::one())]);
    for _ in 0..j {
        let mut next: HashMap<usize, Rational> = HashMap::new();
        for (mask, f) in &layer {
            let scale = f / (Rational::one() - mass(*mask));
            for (i, pi) in p.iter().enumerate() {
                if mask >> i & 1 == 0 {
                    *next.entry(mask | 1 << i).or_insert_with(Rational::zero) += &scale * pi;
                }
            }
        }
        layer = next;
    }
    let miss: Rational = layer.iter().map(|(mask, f)| f * (Rational::one() - mass(*mask))).sum();
    ratio_to_f64(&miss)
}

fn within(report: &SimReport, reference: f64) -> bool {
    (report.estimate - reference).abs() <= 4.0 * report.ci95_halfwidth
}

fn criterion_9() -> Verdict {
    let mut notes = Vec::new();
    let mut cases = 0;
    for (name, a) in [("uniform", 0.0), ("zipf", 1.0)] {
        for big_n in [4usize, 8, 12] {
            let pop = FloatPopularity::power_law_real(big_n, a).unwrap();
            for n in [big_n / 2, big_n] {
                let cfg = SimConfig::new(20 + big_n as u64, 4000);
                let r = sim_waiting_time(&pop, n, &cfg).unwrap();
                let exact_pop = ExactPopularity::power_law(big_n, a as u32).unwrap();
                let exact = ratio_to_f64(&t_expectation(&exact_pop, n).unwrap());
                cases += 1;
                if !within(&r, exact) {
                    return Verdict::new(false, format!("{name}({big_n}) T_{n}: {} vs {exact}", r.estimate));
                }
            }
        }
    }
    for (name, a) in [("uniform", 0.0), ("zipf", 1.0)] {
        for big_n in [6usize, 12] {
            let pop = FloatPopularity::power_law_real(big_n, a).unwrap();
            let curve = WsCurve::new(&pop, WsBase::Exact);
            for j in [1, big_n / 2, big_n - 1] {
                let cfg = SimConfig::new(90 + j as u64, 16).with_stream(50_000, None);
                let r = sim_lru_miss_rate(&pop, j, &cfg).unwrap();
                let fagin = fagin_miss_rate(&curve, j as f64).unwrap();
                let reference = if a == 0.0 {
                    fagin
                } else {
                    lru_oracle(&ExactPopularity::power_law(big_n, 1).unwrap(), j)
                };
                cases += 1;
                if !within(&r, reference) {
                    return Verdict::new(false, format!("{name}({big_n}) MR_{j}: {} vs {reference}", r.estimate));
                }
                if a != 0.0 && big_n == 12 {
                    notes.push(format!("j={j} sim {:.4} exact {reference:.4} Fagin {fagin:.4}", r.estimate));
                }
            }
        }
    }
    let pop = FloatPopularity::power_law_real(8, 1.0).unwrap();
    let cfg = SimConfig::new(5, 64).with_stream(5_000, None);
    let deterministic = sim_lru_miss_rate(&pop, 3, &cfg).unwrap() == sim_lru_miss_rate(&pop, 3, &cfg).unwrap()
        && sim_waiting_time(&pop, 8, &SimConfig::new(5, 500)).unwrap()
            == sim_waiting_time(&pop, 8, &SimConfig::new(5, 500)).unwrap();
    Verdict::new(
        deterministic,
        format!("{cases} cases within 4 ci95, repeat runs identical; zipf(12) LRU: {}", notes.join("; ")),
    )
}

fn criterion_10() -> Verdict {
    let r = checks::fuzz_inequalities(2024, 1000, 3, 7, true).unwrap();
    if !r.passed || r.indeterminate_count() > 0 {
        let w = &r.witnesses[0];
        return Verdict::new(false, format!("counterexample {}: {} vs {}", w.input, w.lhs, w.rhs));
    }
    let mut boundary = 0;
    for n in 2..=10 {
        let el = ExactPopularity::uniform(n).unwrap();
        for check in Check::inequality_set(n) {
            let rep = check.run(&el).unwrap();
            let mut eq_seen = false;
            for w in &rep.witnesses {
                if w.relation == Relation::Equal {
                    eq_seen = true;
                    boundary += 1;
                    if w.outcome != Outcome::Pass || w.lhs != w.rhs {
                        return Verdict::new(false, format!("uniform({n}) {}: {} vs {}", w.input, w.lhs, w.rhs));
                    }
                }
            }
            if !eq_seen && !rep.witnesses.is_empty() {
                return Verdict::new(false, format!("uniform({n}) {} reported no equality", rep.name));
            }
        }
    }
    Verdict::new(true, format!("1000 points pass, 0 indeterminate; {boundary} EL boundary equalities; {}", r.notes))
}

fn criterion_11() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for a in [0.5, 1.0] {
        let model = PowerLawModel::new(100, a).unwrap();
        let curve = WsCurve::new(&FloatPopularity::power_law_real(100, a).unwrap(), WsBase::Exp);
        for d in [10.0, 50.0, 90.0] {
            let closed = ws_powerlaw_closed(&model, d).unwrap();
            let direct = working_set(&curve, d);
            let rel = (closed - direct).abs() / direct;
            pass &= rel <= 0.02;
            parts.push(format!("a={a} D={d}: {:.2}%", 100.0 * rel));
            let back = ws_powerlaw_closed(&model, ws_powerlaw_inverse(&model, d).unwrap()).unwrap();
            let round = (back - d).abs() / d;
            pass &= round <= 1e-8;
        }
    }
    Verdict::new(pass, parts.join(", "))
}

/// Criteria reported red on purpose, with the reason.
const KNOWN_RED: &[(usize, &str)] = &[(
    11,
    "the continuum form integrates over [0, N] while the sum runs over i = 1..N; the offset of about half an item exceeds 2% at D = 10",
)];

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("exact-oracle equivalence of T and W pmfs, N <= 6", criterion_1),
        ("EL closed forms", criterion_2),
        ("R-value ladder", criterion_3),
        ("identity suite on the N <= 7 grid", criterion_4),
        ("Erdos-Renyi reproduction", criterion_5),
        ("cdf at expectation, N = 15", criterion_6),
        ("simplex grid maxima, N = 6", criterion_7),
        ("MR * dE relation", criterion_8),
        ("simulator agreement", criterion_9),
        ("inequality suite fuzzing", criterion_10),
        ("power-law closed form", criterion_11),
    ];
    let mut unexpected = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        let start = Instant::now();
        let v = run();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {id:2}: {name} [{}] ({:.1?})", v.detail, start.elapsed());
        let known = KNOWN_RED.iter().find(|(k, _)| *k == id);
        match (v.pass, known) {
            (false, Some((_, why))) => println!("     known red: {why}"),
            (false, None) => unexpected.push(id),
            (true, Some(_)) => println!("     listed as known red but passed; update KNOWN_RED"),
            (true, None) => {}
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
