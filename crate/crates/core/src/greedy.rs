//! The greedy chain `S_[0] ⊂ S_[1] ⊂ … ⊂ S_[k]`.

use crate::function::{EvaluatedFunction, GroundSet};
use crate::subset::Subset;

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyChain {
    /// Elements in selection order.
    pub order: Vec<usize>,
    /// `prefixes[i]` holds the first `i` selected elements.
    pub prefixes: Vec<Subset>,
    pub values: Vec<f64>,
}

impl GreedyChain {
    pub fn solution(&self) -> Subset {
        *self.prefixes.last().expect("chain always holds S_[0]")
    }

    pub fn value(&self) -> f64 {
        *self.values.last().expect("chain always holds S_[0]")
    }
}

/// Runs exactly `k` steps, adding the largest-marginal element each time
/// (smallest index on ties), even once marginals reach zero.
pub fn greedy(f: &EvaluatedFunction, gs: &GroundSet) -> GreedyChain {
    let mut s = Subset::empty();
    let mut order = Vec::with_capacity(gs.k());
    let mut prefixes = vec![s];
    let mut values = vec![f.evaluate(&s)];
    for _ in 0..gs.k() {
        let rest = gs.full().difference(&s);
        let e = f.argmax_marginal(&rest, &s).expect("k <= n leaves a candidate");
        s.insert(e);
        order.push(e);
        prefixes.push(s);
        values.push(f.evaluate(&s));
    }
    GreedyChain { order, prefixes, values }
}
