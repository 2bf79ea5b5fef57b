//! Generalized coupon collector problem under the independent reference model:
//! exact waiting time and working set distributions, working set / LRU
//! approximations, a Monte Carlo simulator and property checks.

pub mod ccp;
pub mod checks;
pub mod combinatorics;
pub mod error;
pub mod expint;
mod hiprec;
pub mod popularity;
pub mod report;
pub mod scalar;
pub mod sim;
pub mod subsets;
pub mod ws_lru;

pub use error::{Error, Result};
pub use popularity::{ExactPopularity, FloatPopularity, Popularity};
pub use report::{CheckReport, Outcome, Relation, Witness};
pub use scalar::{Rational, Scalar};
