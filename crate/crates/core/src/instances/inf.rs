use rand::Rng;

use super::seeded_rng;
use crate::error::{Error, Result};
use crate::function::SetFunction;
use crate::subset::Subset;

/// Probability of an edge between a target and an item.
pub const EDGE_PROBABILITY: f64 = 0.1;

/// Bipartite influence: `f(S) = Σ_targets (1 - Π_{j∈S} (1 - q_ij))` with
/// `q_ij = p_j` when `(i, j)` is an edge and 0 otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct InfInstance {
    probs: Vec<f64>,
    /// `m × n` adjacency.
    edges: Vec<Vec<bool>>,
}

impl InfInstance {
    pub fn generate(n: usize, m: usize, seed: u64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument(format!("INF needs n, m >= 1 (got n={n}, m={m})")));
        }
        let mut rng = seeded_rng(seed);
        let probs: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let edges = (0..m).map(|_| (0..n).map(|_| rng.gen::<f64>() < EDGE_PROBABILITY).collect()).collect();
        Self::from_parts(probs, edges)
    }

    pub fn from_parts(probs: Vec<f64>, edges: Vec<Vec<bool>>) -> Result<Self> {
        let n = probs.len();
        if n == 0 || edges.is_empty() || edges.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("INF adjacency must be m × n with n probabilities".into()));
        }
        if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidArgument("INF probabilities must lie in [0, 1]".into()));
        }
        Ok(InfInstance { probs, edges })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn edges(&self) -> &[Vec<bool>] {
        &self.edges
    }

    /// `q_ij`.
    pub fn q(&self, target: usize, item: usize) -> f64 {
        if self.edges[target][item] {
            self.probs[item]
        } else {
            0.0
        }
    }
}

impl SetFunction for InfInstance {
    fn ground_size(&self) -> usize {
        self.probs.len()
    }

    fn value(&self, s: &Subset) -> f64 {
        if s.is_empty() {
            return 0.0;
        }
        let elems = s.to_vec();
        self.edges
            .iter()
            .map(|row| {
                let miss: f64 = elems.iter().filter(|&&j| row[j]).map(|&j| 1.0 - self.probs[j]).product();
                1.0 - miss
            })
            .sum()
    }
}
