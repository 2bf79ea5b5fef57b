//! Working set function, its inverse, the Fagin (Che) LRU miss rate
//! approximation and the power-law continuum forms.

use serde::Serialize;

use crate::ccp::t_expectation;
use crate::combinatorics::harmonic_real;
use crate::error::{Error, Result};
use crate::expint::{gen_exp_integral, gen_exp_integral_inverse, integrate};
use crate::popularity::Popularity;
use crate::scalar::{Accumulator, NeumaierSum, Rational, Scalar};

/// How a single item's "not yet seen" probability decays with time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WsBase {
    /// `(1 - p_i)^t`, the discrete form.
    Exact,
    /// `e^(-p_i t)`, the continuous form.
    Exp,
}

/// Which expression of the Fagin miss rate to evaluate at `t*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MissRateForm {
    /// `sum_i p_i base_i(t*)`: probability that the next reference misses.
    #[default]
    Weighted,
    /// `WS'(t*) = -sum_i base_i(t*) ln(rate_i)`.
    Derivative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WsCurve {
    probs: Vec<f64>,
    /// `-ln(rate_i)`: `-ln(1 - p_i)` or `p_i`.
    decay: Vec<f64>,
    base: WsBase,
}

impl WsCurve {
    pub fn new<S: Scalar>(pop: &Popularity<S>, base: WsBase) -> Self {
        let probs: Vec<f64> = pop.probs().iter().map(Scalar::to_f64).collect();
        let decay = probs
            .iter()
            .map(|&p| match base {
                WsBase::Exact => -(-p).ln_1p(),
                WsBase::Exp => p,
            })
            .collect();
        WsCurve { probs, decay, base }
    }

    pub fn base(&self) -> WsBase {
        self.base
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    fn survivals(&self, t: f64) -> impl Iterator<Item = f64> + '_ {
        self.decay.iter().map(move |d| (-d * t).exp())
    }
}

/// `WS(t) = sum_i (1 - base_i(t))`.
pub fn working_set(curve: &WsCurve, t: f64) -> f64 {
    let mut acc = NeumaierSum::default();
    for d in &curve.decay {
        acc.add(-(-d * t).exp_m1());
    }
    acc.value()
}

/// `t*` with `WS(t*) = j`, for `0 < j < N`.
pub fn working_set_inverse(curve: &WsCurve, j: f64) -> Result<f64> {
    let n = curve.len() as f64;
    if !(j > 0.0 && j < n) {
        return Err(Error::Domain(format!("working set inverse needs 0 < j < N = {n}, got {j}")));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while working_set(curve, hi) < j {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Domain(format!("working set never reaches {j}")));
        }
    }
    // bisect until the bracket collapses to adjacent doubles
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if working_set(curve, mid) < j {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = if (working_set(curve, lo) - j).abs() <= (working_set(curve, hi) - j).abs() {
        lo
    } else {
        hi
    };
    Ok(t)
}

/// Fagin miss rate `MR[j]` in the weighted form.
pub fn fagin_miss_rate(curve: &WsCurve, j: f64) -> Result<f64> {
    fagin_miss_rate_with(curve, j, MissRateForm::Weighted)
}

pub fn fagin_miss_rate_with(curve: &WsCurve, j: f64, form: MissRateForm) -> Result<f64> {
    let t = working_set_inverse(curve, j)?;
    let mut acc = NeumaierSum::default();
    for (i, s) in curve.survivals(t).enumerate() {
        let w = match form {
            MissRateForm::Weighted => curve.probs[i],
            MissRateForm::Derivative => curve.decay[i],
        };
        acc.add(w * s);
    }
    Ok(acc.value())
}

/// `E[T_{j+1}] - E[T_j]` with `E[T_0] = 0`.
pub fn delta_expectation<S: Scalar>(pop: &Popularity<S>, j: usize) -> Result<S> {
    if j >= pop.len() {
        return Err(Error::Domain(format!("delta expectation needs j < N = {}, got {j}", pop.len())));
    }
    Ok(t_expectation(pop, j + 1)? - t_expectation(pop, j)?)
}

/// `WS^-1(j + 1/2) - WS^-1(j - 1/2)`, approximating `delta_expectation` where
/// exact enumeration is out of reach.
pub fn delta_expectation_approx(curve: &WsCurve, j: usize) -> Result<f64> {
    if j == 0 {
        return Ok(1.0);
    }
    if j >= curve.len() {
        return Err(Error::Domain(format!("delta expectation needs j < N = {}, got {j}", curve.len())));
    }
    Ok(working_set_inverse(curve, j as f64 + 0.5)? - working_set_inverse(curve, j as f64 - 0.5)?)
}

/// `MR[j] * dE[T_j]` with the exact base and the weighted miss rate.
///
/// For a uniform popularity both factors are rational, `(N-j)/N` and
/// `N/(N-j)`, and the product is formed exactly.
pub fn mr_delta_product<S: Scalar>(pop: &Popularity<S>, j: usize) -> Result<f64> {
    let n = pop.len();
    if j == 0 || j >= n {
        return Err(Error::Domain(format!("MR * dE needs 1 <= j < N = {n}, got {j}")));
    }
    if pop.is_uniform() {
        let mr = Rational::new((n - j).into(), n.into());
        let delta = Rational::new(n.into(), (n - j).into());
        return Ok((mr * delta).to_f64());
    }
    let curve = WsCurve::new(pop, WsBase::Exact);
    Ok(fagin_miss_rate(&curve, j as f64)? * delta_expectation(pop, j)?.to_f64())
}

/// Continuum power law `p(x) = 1 / (H_{N,a} x^a)` on `[0, N]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawModel {
    pub n: usize,
    pub a: f64,
    pub h: f64,
}

impl PowerLawModel {
    pub fn new(n: usize, a: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("power law model needs N >= 2, got {n}")));
        }
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Domain(format!("power law model needs a > 0, got {a}")));
        }
        Ok(PowerLawModel { n, a, h: harmonic_real(n as u64, a) })
    }

    fn scale(&self) -> f64 {
        self.h * (self.n as f64).powf(self.a)
    }
}

/// `WS(D) = N (1 - E_{1+1/a}(D / (H N^a)) / a)`.
pub fn ws_powerlaw_closed(model: &PowerLawModel, d: f64) -> Result<f64> {
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("D must be >= 0, got {d}")));
    }
    let e = gen_exp_integral(1.0 + 1.0 / model.a, d / model.scale())?;
    Ok(model.n as f64 * (1.0 - e / model.a))
}

/// `int_0^N (1 - exp(-D / (H x^a))) dx` by adaptive quadrature.
pub fn ws_powerlaw_quadrature(model: &PowerLawModel, d: f64) -> f64 {
    let (h, a) = (model.h, model.a);
    integrate(|x: f64| -(-d / (h * x.powf(a))).exp_m1(), 0.0, model.n as f64, 1e-13)
}

/// `WS^-1(D) = H N^a E^-1_{1+1/a}(a (1 - D/N))` for `0 < D < N`.
pub fn ws_powerlaw_inverse(model: &PowerLawModel, d: f64) -> Result<f64> {
    let n = model.n as f64;
    if !(d > 0.0 && d < n) {
        return Err(Error::Domain(format!("power law inverse needs 0 < D < N = {n}, got {d}")));
    }
    let z = gen_exp_integral_inverse(1.0 + 1.0 / model.a, model.a * (1.0 - d / n))?;
    Ok(model.scale() * z)
}

/// Riemann zeta for real `a > 1`: partial sum plus an Euler-Maclaurin tail.
pub fn zeta(a: f64) -> Result<f64> {
    if !(a > 1.0) {
        return Err(Error::Domain(format!("zeta needs a > 1, got {a}")));
    }
    const M: u32 = 200;
    let mut acc = NeumaierSum::default();
    for i in (1..M).rev() {
        acc.add((i as f64).powf(-a));
    }
    let m = M as f64;
    let tail = m.powf(1.0 - a) / (a - 1.0) + 0.5 * m.powf(-a) + a * m.powf(-a - 1.0) / 12.0
        - a * (a + 1.0) * (a + 2.0) * m.powf(-a - 3.0) / 720.0
        + a * (a + 1.0) * (a + 2.0) * (a + 3.0) * (a + 4.0) * m.powf(-a - 5.0) / 30240.0;
    acc.add(tail);
    Ok(acc.value())
}

/// Leading large-`N` behaviour of `E[T_N]` for a power law of skewness `a`.
pub fn full_collection_asymptotic(n: usize, a: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("asymptotic needs N >= 2, got {n}")));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("asymptotic needs a > 0, got {a}")));
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    Ok(if a > 1.0 {
        zeta(a)? * nf.powf(a) * ln_n
    } else if a == 1.0 {
        harmonic_real(n as u64, 1.0) * nf * ln_n
    } else {
        nf * ln_n / (1.0 - a)
    })
}
