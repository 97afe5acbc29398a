use rand::Rng;

use super::seeded_rng;
use crate::error::{Error, Result};
use crate::function::SetFunction;
use crate::subset::Subset;

/// Probability that a sensor covers a given item.
pub const COVER_PROBABILITY: f64 = 0.15;

/// Weighted coverage: `f(S) = Σ_items w_i · max_{j∈S} a_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovInstance {
    weights: Vec<f64>,
    /// `m × n` incidence matrix.
    cover: Vec<Vec<bool>>,
    n: usize,
    /// Per-sensor bitmask over items.
    masks: Vec<Vec<u64>>,
}

impl CovInstance {
    pub fn generate(n: usize, m: usize, seed: u64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument(format!("COV needs n, m >= 1 (got n={n}, m={m})")));
        }
        let mut rng = seeded_rng(seed);
        let weights: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
        let cover = (0..m).map(|_| (0..n).map(|_| rng.gen::<f64>() < COVER_PROBABILITY).collect()).collect();
        Self::from_parts(weights, cover)
    }

    pub fn from_parts(weights: Vec<f64>, cover: Vec<Vec<bool>>) -> Result<Self> {
        let m = weights.len();
        let n = cover.first().map_or(0, Vec::len);
        if m == 0 || cover.len() != m || n == 0 || cover.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("COV matrix must be m × n with m weights".into()));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidArgument("COV weights must be non-negative".into()));
        }
        let words = m.div_ceil(64);
        let masks = (0..n)
            .map(|j| {
                let mut mask = vec![0u64; words];
                for (i, row) in cover.iter().enumerate() {
                    if row[j] {
                        mask[i / 64] |= 1 << (i % 64);
                    }
                }
                mask
            })
            .collect();
        Ok(CovInstance { weights, cover, n, masks })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cover(&self) -> &[Vec<bool>] {
        &self.cover
    }
}

impl SetFunction for CovInstance {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, s: &Subset) -> f64 {
        let mut covered = vec![0u64; self.weights.len().div_ceil(64)];
        for j in s.iter() {
            for (c, m) in covered.iter_mut().zip(&self.masks[j]) {
                *c |= m;
            }
        }
        let mut total = 0.0;
        for (w, &bits) in covered.iter().enumerate() {
            let mut bits = bits;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                total += self.weights[w * 64 + b];
                bits &= bits - 1;
            }
        }
        total
    }
}
