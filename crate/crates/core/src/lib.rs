//! Exact maximization of non-decreasing approximately submodular set
//! functions under a cardinality constraint.
//!
//! The solvers share one oracle type, [`EvaluatedFunction`], and one subset
//! type, [`Subset`]:
//!
//! * [`greedy`]: the greedy chain used to seed every other method.
//! * [`astar`]: best-first search with the `1/γ`-scaled marginal heuristic.
//! * [`cg`]: constraint generation (CG, MCG) and its improved variant (ICG).
//! * [`bc`]: depth-first branch-and-cut on top of ICG.
//! * [`bip`]: the exact max-min binary subsolver behind CG, ICG and BC-ICG.
//! * [`oracle`]: brute-force optima and finite checks of the ratio properties.
//! * [`harness`]: suite runs, result records and performance profiles.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub mod astar;
pub mod bc;
pub mod bip;
pub mod cg;
pub mod error;
pub mod function;
pub mod greedy;
pub mod harness;
pub mod instances;
pub mod oracle;
pub mod subset;

pub use error::{Error, Result};
pub use function::{EvaluatedFunction, GroundSet, SetFunction, TOL};
pub use subset::Subset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Limit,
    Heuristic,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Limit => "limit",
            Status::Heuristic => "heuristic",
        })
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(Status::Optimal),
            "limit" => Ok(Status::Limit),
            "heuristic" => Ok(Status::Heuristic),
            other => Err(Error::Parse(format!("unknown status {other:?}"))),
        }
    }
}

/// Wall-clock and node budgets. For A* and BC-ICG a node is an extracted
/// search node; for CG/MCG/ICG it is one subsolver iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Limits {
    pub time: Option<Duration>,
    pub nodes: Option<u64>,
}

impl Limits {
    pub fn none() -> Self {
        Limits::default()
    }

    pub fn time(secs: f64) -> Self {
        Limits { time: Some(Duration::from_secs_f64(secs)), nodes: None }
    }

    pub fn with_nodes(mut self, nodes: u64) -> Self {
        self.nodes = Some(nodes);
        self
    }

    pub(crate) fn start(&self) -> Clock {
        Clock { start: Instant::now(), limits: *self }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Clock {
    start: Instant,
    limits: Limits,
}

impl Clock {
    pub(crate) fn exceeded(&self, nodes: u64) -> bool {
        self.limits.nodes.is_some_and(|cap| nodes >= cap) || self.limits.time.is_some_and(|t| self.start.elapsed() >= t)
    }

    pub(crate) fn millis(&self) -> f64 {
        self.start.elapsed().as_secs_f64() * 1e3
    }
}
