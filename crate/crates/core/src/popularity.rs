//! Validated popularity distributions `{p_i}` over a finite reference set.

use serde::Deserialize;

use crate::combinatorics::{harmonic, harmonic_real};
use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational, Scalar};

/// Normalization slack accepted in float mode.
pub const FLOAT_SUM_TOL: f64 = 1e-12;

/// A probability vector with every `0 < p_i < 1`, summing to one, `N >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Popularity<S> {
    probs: Vec<S>,
}

pub type ExactPopularity = Popularity<Rational>;
pub type FloatPopularity = Popularity<f64>;

impl<S: Scalar> Popularity<S> {
    /// Normalizes strictly positive weights into probabilities.
    pub fn from_weights(weights: Vec<S>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| **w < S::zero()) {
            return Err(Error::InvalidPopularity(format!("negative weight {}", w.render())));
        }
        if weights.iter().any(|w| w.is_zero()) {
            return Err(Error::InvalidPopularity(
                "zero weight not allowed (every p_i must be > 0)".into(),
            ));
        }
        if weights.len() < 2 {
            return Err(Error::InvalidPopularity(format!(
                "need at least 2 positive weights, got {}",
                weights.len()
            )));
        }
        let total = S::sum(weights.iter().cloned());
        let probs = weights.into_iter().map(|w| w / total.clone()).collect();
        Self::from_probs(probs)
    }

    /// Validates an already normalized probability vector.
    pub fn from_probs(probs: Vec<S>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidPopularity(format!(
                "support size must be >= 2, got {}",
                probs.len()
            )));
        }
        for (i, p) in probs.iter().enumerate() {
            if !(*p > S::zero() && *p < S::one()) {
                return Err(Error::InvalidPopularity(format!(
                    "p_{i} = {} is outside (0, 1)",
                    p.render()
                )));
            }
        }
        let total = S::sum(probs.iter().cloned());
        if !total.close_to(&S::one(), FLOAT_SUM_TOL) {
            return Err(Error::InvalidPopularity(format!(
                "probabilities sum to {}, not 1",
                total.render()
            )));
        }
        Ok(Popularity { probs })
    }

    /// The EL popularity `p_i = 1/N`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidPopularity(format!("uniform needs N >= 2, got {n}")));
        }
        Ok(Popularity {
            probs: vec![S::from_ratio(1, n as i64); n],
        })
    }

    /// Power law `p_i = 1 / (H_{N,a} i^a)` for integer skewness (exact in exact mode).
    pub fn power_law(n: usize, a: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidPopularity(format!("power law needs N >= 2, got {n}")));
        }
        let h: S = harmonic(n as u64, a);
        let probs = (1..=n)
            .map(|i| S::one() / (h.clone() * S::from_i64(i as i64).powi(a)))
            .collect();
        Self::from_probs(probs)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn get(&self, i: usize) -> &S {
        &self.probs[i]
    }

    /// The `(N-1)`-element distribution `q_j = p_j / (1 - p_l)`, `j != l`.
    pub fn exclude(&self, l: usize) -> Result<Self> {
        if l >= self.len() {
            return Err(Error::Domain(format!("index {l} out of range for N = {}", self.len())));
        }
        if self.len() < 3 {
            return Err(Error::Domain("exclusion from N = 2 leaves a single element".into()));
        }
        Ok(Popularity {
            probs: exclude_probs(&self.probs, l),
        })
    }

    /// All probabilities equal (exactly, or within `1e-12` in float mode).
    pub fn is_uniform(&self) -> bool {
        let first = &self.probs[0];
        self.probs.iter().all(|p| p.close_to(first, FLOAT_SUM_TOL))
    }

    pub fn to_f64(&self) -> FloatPopularity {
        Popularity {
            probs: self.probs.iter().map(Scalar::to_f64).collect(),
        }
    }

    /// `sum_i p_i^k`.
    pub fn power_sum(&self, k: u32) -> S {
        S::sum(self.probs.iter().map(|p| p.powi(k)))
    }
}

/// Renormalized exclusion on a raw vector; no size checks.
pub(crate) fn exclude_probs<S: Scalar>(probs: &[S], l: usize) -> Vec<S> {
    let rest = S::one() - probs[l].clone();
    probs
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != l)
        .map(|(_, p)| p.clone() / rest.clone())
        .collect()
}

impl FloatPopularity {
    /// Power law with real skewness `a >= 0`.
    pub fn power_law_real(n: usize, a: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidPopularity(format!("power law needs N >= 2, got {n}")));
        }
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::InvalidPopularity(format!("skewness must be >= 0, got {a}")));
        }
        let h = harmonic_real(n as u64, a);
        Self::from_probs((1..=n).map(|i| 1.0 / (h * (i as f64).powf(a))).collect())
    }

    /// Exact image of the stored doubles, renormalized to sum to one exactly.
    pub fn to_exact(&self) -> Result<ExactPopularity> {
        let weights = self
            .probs
            .iter()
            .map(|p| {
                Rational::from_float(*p)
                    .ok_or_else(|| Error::InvalidPopularity(format!("non-finite probability {p}")))
            })
            .collect::<Result<Vec<_>>>()?;
        ExactPopularity::from_weights(weights)
    }
}

/// Popularity file contents: `{"weights": [w_1, ..., w_N]}` where each weight is a
/// JSON number or a string holding a decimal or `p/q` rational.
#[derive(Debug, Clone, Deserialize)]
pub struct PopularitySpec {
    pub weights: Vec<WeightValue>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum WeightValue {
    Text(String),
    Number(serde_json::Number),
}

impl WeightValue {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            WeightValue::Text(s) => parse_rational(s),
            // JSON numbers are read from their decimal text so 0.1 stays 1/10.
            WeightValue::Number(n) => parse_rational(&n.to_string()),
        }
    }
}

impl PopularitySpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("popularity file: {e}")))
    }

    pub fn rationals(&self) -> Result<Vec<Rational>> {
        self.weights.iter().map(WeightValue::to_rational).collect()
    }

    pub fn to_exact(&self) -> Result<ExactPopularity> {
        ExactPopularity::from_weights(self.rationals()?)
    }
}

/// Parses a comma separated weight list such as `1,1,2` or `1/2, 0.25, 1/4`.
pub fn parse_weight_list(text: &str) -> Result<Vec<Rational>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_rational)
        .collect()
}
