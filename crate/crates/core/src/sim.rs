//! Monte Carlo ground truth under the independent reference model.
//!
//! Replication `r` draws from its own ChaCha8 stream `r` keyed by the
//! configured seed, so results do not depend on how replications are
//! scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::harmonic_real;
use crate::error::{Error, Result};
use crate::popularity::Popularity;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub seed: u64,
    pub replications: u64,
    /// References per replication (LRU only).
    pub stream_length: u64,
    /// Leading references not counted (LRU only); `None` means `10 N H_N`.
    pub warmup: Option<u64>,
}

impl SimConfig {
    pub fn new(seed: u64, replications: u64) -> Self {
        SimConfig {
            seed,
            replications,
            stream_length: 0,
            warmup: None,
        }
    }

    pub fn with_stream(mut self, stream_length: u64, warmup: Option<u64>) -> Self {
        self.stream_length = stream_length;
        self.warmup = warmup;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Domain("replications must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimReport {
    pub estimate: f64,
    pub sample_variance: f64,
    pub replications: u64,
    pub ci95_halfwidth: f64,
}

impl SimReport {
    /// Mean, unbiased variance and normal 95% half-width of `samples`.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        SimReport {
            estimate: mean,
            sample_variance: var,
            replications: samples.len() as u64,
            ci95_halfwidth: 1.96 * (var / n).sqrt(),
        }
    }
}

/// Inverse-CDF sampler over a cumulative probability array.
#[derive(Debug, Clone)]
pub struct Sampler {
    cumulative: Vec<f64>,
}

impl Sampler {
    pub fn new<S: Scalar>(pop: &Popularity<S>) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = pop
            .probs()
            .iter()
            .map(|p| {
                acc += p.to_f64();
                acc
            })
            .collect();
        // guard the top against roundoff so every u in [0,1) lands
        if let Some(last) = cumulative.last_mut() {
            *last = f64::INFINITY;
        }
        Sampler { cumulative }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cumulative.partition_point(|&c| c <= u)
    }
}

/// RNG for replication `index`.
pub fn replication_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn run_replications<T, F>(cfg: &SimConfig, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..cfg.replications)
        .into_par_iter()
        .map(|r| f(&mut replication_rng(cfg.seed, r)))
        .collect()
}

fn check_size<S: Scalar>(pop: &Popularity<S>, n: usize) -> Result<()> {
    if n == 0 || n > pop.len() {
        return Err(Error::Domain(format!("n = {n} must satisfy 1 <= n <= N = {}", pop.len())));
    }
    Ok(())
}

/// One draw count of `T_n` per replication.
pub fn sim_waiting_time_samples<S: Scalar>(pop: &Popularity<S>, n: usize, cfg: &SimConfig) -> Result<Vec<u64>> {
    check_size(pop, n)?;
    cfg.validate()?;
    let sampler = Sampler::new(pop);
    let big_n = pop.len();
    Ok(run_replications(cfg, |rng| {
        let mut seen = vec![false; big_n];
        let (mut distinct, mut draws) = (0usize, 0u64);
        while distinct < n {
            let i = sampler.sample(rng);
            draws += 1;
            if !seen[i] {
                seen[i] = true;
                distinct += 1;
            }
        }
        draws
    }))
}

/// Estimates `E[T_n]`.
pub fn sim_waiting_time<S: Scalar>(pop: &Popularity<S>, n: usize, cfg: &SimConfig) -> Result<SimReport> {
    let samples: Vec<f64> = sim_waiting_time_samples(pop, n, cfg)?.into_iter().map(|d| d as f64).collect();
    Ok(SimReport::from_samples(&samples))
}

/// One value of `W_k` per replication.
pub fn sim_working_set_samples<S: Scalar>(pop: &Popularity<S>, k: u64, cfg: &SimConfig) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::Domain("working set simulation needs k >= 1".into()));
    }
    cfg.validate()?;
    let sampler = Sampler::new(pop);
    let big_n = pop.len();
    Ok(run_replications(cfg, |rng| {
        let mut seen = vec![false; big_n];
        let mut distinct = 0usize;
        for _ in 0..k {
            let i = sampler.sample(rng);
            if !seen[i] {
                seen[i] = true;
                distinct += 1;
            }
        }
        distinct
    }))
}

/// Estimates `E[W_k]`.
pub fn sim_working_set<S: Scalar>(pop: &Popularity<S>, k: u64, cfg: &SimConfig) -> Result<SimReport> {
    let samples: Vec<f64> = sim_working_set_samples(pop, k, cfg)?.into_iter().map(|w| w as f64).collect();
    Ok(SimReport::from_samples(&samples))
}

const NIL: usize = usize::MAX;

/// Move-to-front list over item ids `0..N` holding at most `capacity` items.
#[derive(Debug, Clone)]
pub struct LruStack {
    capacity: usize,
    prev: Vec<usize>,
    next: Vec<usize>,
    cached: Vec<bool>,
    head: usize,
    tail: usize,
    len: usize,
}

impl LruStack {
    pub fn new(universe: usize, capacity: usize) -> Self {
        LruStack {
            capacity,
            prev: vec![NIL; universe],
            next: vec![NIL; universe],
            cached: vec![false; universe],
            head: NIL,
            tail: NIL,
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn unlink(&mut self, i: usize) {
        let (p, n) = (self.prev[i], self.next[i]);
        if p == NIL {
            self.head = n;
        } else {
            self.next[p] = n;
        }
        if n == NIL {
            self.tail = p;
        } else {
            self.prev[n] = p;
        }
        self.prev[i] = NIL;
        self.next[i] = NIL;
    }

    fn push_front(&mut self, i: usize) {
        self.next[i] = self.head;
        self.prev[i] = NIL;
        if self.head != NIL {
            self.prev[self.head] = i;
        }
        self.head = i;
        if self.tail == NIL {
            self.tail = i;
        }
    }

    /// References `item`; returns `true` on a hit.
    pub fn access(&mut self, item: usize) -> bool {
        if self.cached[item] {
            if self.head != item {
                self.unlink(item);
                self.push_front(item);
            }
            return true;
        }
        self.push_front(item);
        self.cached[item] = true;
        self.len += 1;
        if self.len > self.capacity {
            let victim = self.tail;
            self.unlink(victim);
            self.cached[victim] = false;
            self.len -= 1;
        }
        false
    }

    /// Items from most to least recently used.
    pub fn contents(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len);
        let mut i = self.head;
        while i != NIL {
            out.push(i);
            i = self.next[i];
        }
        out
    }
}

/// Default warmup `10 N H_N`.
pub fn default_warmup(n: usize) -> u64 {
    (10.0 * n as f64 * harmonic_real(n as u64, 1.0)).ceil() as u64
}

/// Estimates the steady-state LRU miss rate for a cache of `cache_size` items.
pub fn sim_lru_miss_rate<S: Scalar>(pop: &Popularity<S>, cache_size: usize, cfg: &SimConfig) -> Result<SimReport> {
    let big_n = pop.len();
    if cache_size == 0 || cache_size >= big_n {
        return Err(Error::Domain(format!("cache size must be in 1..N-1 = 1..{}, got {cache_size}", big_n - 1)));
    }
    cfg.validate()?;
    let warmup = cfg.warmup.unwrap_or_else(|| default_warmup(big_n));
    if warmup >= cfg.stream_length {
        return Err(Error::Domain(format!(
            "warmup {warmup} must be below stream length {}",
            cfg.stream_length
        )));
    }
    let sampler = Sampler::new(pop);
    let counted = (cfg.stream_length - warmup) as f64;
    let rates = run_replications(cfg, |rng| {
        let mut lru = LruStack::new(big_n, cache_size);
        let mut misses = 0u64;
        for step in 0..cfg.stream_length {
            let hit = lru.access(sampler.sample(rng));
            if step >= warmup && !hit {
                misses += 1;
            }
        }
        misses as f64 / counted
    });
    Ok(SimReport::from_samples(&rates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::popularity::FloatPopularity;

    #[test]
    fn report_statistics() {
        let r = SimReport::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(r.estimate, 2.5);
        assert!((r.sample_variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((r.ci95_halfwidth - 1.96 * (5.0 / 12.0f64).sqrt()).abs() < 1e-15);
        let one = SimReport::from_samples(&[7.0]);
        assert_eq!(one.sample_variance, 0.0);
    }

    #[test]
    fn lru_stack_matches_naive_list() {
        let mut rng = replication_rng(9, 0);
        for cap in 1..6 {
            let mut lru = LruStack::new(8, cap);
            let mut naive: Vec<usize> = Vec::new();
            for _ in 0..2000 {
                let item = rng.random_range(0..8);
                let depth = naive.iter().position(|&x| x == item);
                let expect_hit = depth.is_some_and(|d| d < cap);
                if let Some(d) = depth {
                    naive.remove(d);
                }
                naive.insert(0, item);
                assert_eq!(lru.access(item), expect_hit);
                let distinct = naive.len();
                assert_eq!(lru.len(), cap.min(distinct));
                assert_eq!(lru.contents(), naive[..cap.min(distinct)].to_vec());
            }
        }
    }

    #[test]
    fn waiting_time_of_one_is_one() {
        let p = FloatPopularity::power_law_real(5, 1.0).unwrap();
        let r = sim_waiting_time(&p, 1, &SimConfig::new(1, 1000)).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.sample_variance, 0.0);
        let r = sim_working_set(&p, 1, &SimConfig::new(1, 1000)).unwrap();
        assert_eq!(r.estimate, 1.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let p = FloatPopularity::power_law_real(6, 0.8).unwrap();
        let cfg = SimConfig::new(42, 5000);
        assert_eq!(sim_waiting_time(&p, 6, &cfg).unwrap(), sim_waiting_time(&p, 6, &cfg).unwrap());
        let lru = SimConfig::new(42, 8).with_stream(5000, None);
        assert_eq!(sim_lru_miss_rate(&p, 3, &lru).unwrap(), sim_lru_miss_rate(&p, 3, &lru).unwrap());
        let other = sim_waiting_time(&p, 6, &SimConfig::new(43, 5000)).unwrap();
        assert_ne!(other, sim_waiting_time(&p, 6, &cfg).unwrap());
    }

    #[test]
    fn validates_inputs() {
        let p = FloatPopularity::uniform(4).unwrap();
        assert!(sim_waiting_time(&p, 5, &SimConfig::new(1, 10)).is_err());
        assert!(sim_waiting_time(&p, 2, &SimConfig::new(1, 0)).is_err());
        assert!(sim_lru_miss_rate(&p, 4, &SimConfig::new(1, 1).with_stream(1000, None)).is_err());
        assert!(sim_lru_miss_rate(&p, 2, &SimConfig::new(1, 1).with_stream(100, Some(100))).is_err());
        assert_eq!(default_warmup(4), (10.0 * 4.0 * (25.0 / 12.0f64)).ceil() as u64);
    }
}
