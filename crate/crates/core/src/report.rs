//! Outcome records for identity and inequality checks.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Relative band inside which a float margin is too small to call.
pub const FLOAT_STRICT_TOL: f64 = 1e-12;

/// Direction asserted between the two sides of a witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Greater,
    GreaterEq,
    Less,
    LessEq,
    Equal,
}

impl Relation {
    fn is_strict(self) -> bool {
        matches!(self, Relation::Greater | Relation::Less)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    /// Float margin fell inside the roundoff band and could not be settled.
    Indeterminate,
}

/// One evaluated instance of a check.
///
/// `margin` is signed so that positive means "inside the asserted
/// direction": `lhs - rhs` for `>`, `rhs - lhs` for `<`, `-|lhs - rhs|` for `=`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub input: String,
    pub relation: Relation,
    pub lhs: String,
    pub rhs: String,
    pub margin: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub witnesses: Vec<Witness>,
    pub notes: String,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            passed: true,
            witnesses: Vec::new(),
            notes: String::new(),
        }
    }

    pub fn note(&mut self, text: impl AsRef<str>) {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(text.as_ref());
    }

    /// Records `lhs <relation> rhs` using the default float tolerance.
    pub fn compare<S: Scalar>(
        &mut self,
        input: impl Into<String>,
        lhs: &S,
        relation: Relation,
        rhs: &S,
    ) -> Outcome {
        self.compare_tol(input, lhs, relation, rhs, FLOAT_STRICT_TOL)
    }

    /// Records `lhs <relation> rhs`; `tol` is relative and ignored in exact mode.
    pub fn compare_tol<S: Scalar>(
        &mut self,
        input: impl Into<String>,
        lhs: &S,
        relation: Relation,
        rhs: &S,
        tol: f64,
    ) -> Outcome {
        let diff = lhs.clone() - rhs.clone();
        let margin = match relation {
            Relation::Greater | Relation::GreaterEq => diff,
            Relation::Less | Relation::LessEq => -diff,
            Relation::Equal => -diff.abs(),
        };
        let outcome = if S::EXACT {
            let zero = S::zero();
            let ok = match relation {
                Relation::Equal => margin == zero,
                r if r.is_strict() => margin > zero,
                _ => margin >= zero,
            };
            if ok {
                Outcome::Pass
            } else {
                Outcome::Fail
            }
        } else {
            let m = margin.to_f64();
            let band = tol * lhs.to_f64().abs().max(rhs.to_f64().abs());
            match relation {
                _ if m.is_nan() => Outcome::Fail,
                Relation::Equal => {
                    if m >= -band {
                        Outcome::Pass
                    } else {
                        Outcome::Fail
                    }
                }
                r if r.is_strict() => {
                    if m > band {
                        Outcome::Pass
                    } else if m < -band {
                        Outcome::Fail
                    } else {
                        Outcome::Indeterminate
                    }
                }
                _ => {
                    if m >= -band {
                        Outcome::Pass
                    } else {
                        Outcome::Fail
                    }
                }
            }
        };
        self.push(Witness {
            input: input.into(),
            relation,
            lhs: lhs.render(),
            rhs: rhs.render(),
            margin: margin.to_f64(),
            outcome,
        });
        outcome
    }

    pub fn push(&mut self, witness: Witness) {
        if witness.outcome != Outcome::Pass {
            self.passed = false;
        }
        self.witnesses.push(witness);
    }

    pub fn indeterminate_count(&self) -> usize {
        self.count(Outcome::Indeterminate)
    }

    pub fn failure_count(&self) -> usize {
        self.count(Outcome::Fail)
    }

    fn count(&self, outcome: Outcome) -> usize {
        self.witnesses.iter().filter(|w| w.outcome == outcome).count()
    }

    /// Folds another report's witnesses into this one, prefixing inputs with its name.
    pub fn absorb(&mut self, other: CheckReport) {
        for mut w in other.witnesses {
            w.input = format!("{}: {}", other.name, w.input);
            self.push(w);
        }
        if !other.notes.is_empty() {
            self.note(format!("{}: {}", other.name, other.notes));
        }
    }
}
