use rand::Rng;

use super::seeded_rng;
use crate::error::{Error, Result};
use crate::function::SetFunction;
use crate::subset::Subset;

/// Facility location: `f(S) = Σ_clients max_{j∈S} g[client][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocInstance {
    /// `m × n` benefit matrix, one row per client.
    g: Vec<Vec<f64>>,
    n: usize,
}

impl LocInstance {
    pub fn generate(n: usize, m: usize, seed: u64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument(format!("LOC needs n, m >= 1 (got n={n}, m={m})")));
        }
        let mut rng = seeded_rng(seed);
        let g = (0..m).map(|_| (0..n).map(|_| rng.gen::<f64>()).collect()).collect();
        Ok(LocInstance { g, n })
    }

    pub fn from_matrix(g: Vec<Vec<f64>>) -> Result<Self> {
        let n = g.first().map_or(0, Vec::len);
        if n == 0 || g.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument("LOC matrix must be non-empty and rectangular".into()));
        }
        if g.iter().flatten().any(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidArgument("LOC benefits must be non-negative".into()));
        }
        Ok(LocInstance { g, n })
    }

    pub fn clients(&self) -> usize {
        self.g.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.g
    }
}

impl SetFunction for LocInstance {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, s: &Subset) -> f64 {
        if s.is_empty() {
            return 0.0;
        }
        let elems = s.to_vec();
        self.g.iter().map(|row| elems.iter().map(|&j| row[j]).fold(0.0, f64::max)).sum()
    }
}
