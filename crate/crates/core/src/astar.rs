//! A*-MOD: best-first search over prefix-structured subsets.
//!
//! The children of a node `S` are `S ∪ {i}` for `i > max S`, so every subset
//! is reached along exactly one path. A node's value `f̄(S) = f(S) + h(S)`
//! bounds every feasible completion of `S` by elements above `max S`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::function::{EvaluatedFunction, GroundSet, TOL};
use crate::greedy::greedy;
use crate::subset::Subset;
use crate::{Limits, Status};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Heuristic {
    pub h: f64,
    /// The feasible completion used as the node's candidate solution.
    pub completion: Subset,
}

/// `h(S)` over the elements above `max S`.
///
/// If all of them fit in the budget the bound is the exact gain of adding
/// them all. Otherwise it is `(1/γ)` times the sum of the `p = k - |S|`
/// largest singleton marginals, or the exact gain of those `p` elements when
/// one of them has zero marginal.
pub fn heuristic_h(f: &EvaluatedFunction, s: &Subset, k: usize, gamma: f64) -> Heuristic {
    let n = f.n();
    let lo = s.max_element().map_or(0, |m| m + 1);
    let p = k.saturating_sub(s.len());
    if p == 0 {
        return Heuristic { h: 0.0, completion: *s };
    }
    let fs = f.evaluate(s);
    if s.len() + (n - lo) <= k {
        let completion = s.union(&(lo..n).collect());
        return Heuristic { h: f.evaluate(&completion) - fs, completion };
    }
    let mut gains: Vec<(usize, f64)> = (lo..n).map(|i| (i, f.evaluate(&s.with(i)) - fs)).collect();
    gains.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    gains.truncate(p);
    let mut completion = *s;
    for &(i, _) in &gains {
        completion.insert(i);
    }
    let h = if gains[p - 1].1 <= 0.0 {
        f.evaluate(&completion) - fs
    } else {
        gains.iter().map(|g| g.1).sum::<f64>() / gamma
    };
    Heuristic { h, completion }
}

#[derive(Debug, Clone)]
pub struct AstarResult {
    pub best: Subset,
    pub value: f64,
    /// `f(S*)` when optimal, otherwise the largest open `f̄`.
    pub bound: f64,
    /// Extracted nodes, including those discarded by the incumbent test.
    pub nodes: u64,
    pub status: Status,
    pub millis: f64,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    subset: Subset,
    value: f64,
    fbar: f64,
    completion: Subset,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.fbar
            .total_cmp(&other.fbar)
            .then(self.value.total_cmp(&other.value))
            .then_with(|| other.subset.lex_cmp(&self.subset))
    }
}

fn node(f: &EvaluatedFunction, s: Subset, k: usize, gamma: f64) -> Node {
    let hr = heuristic_h(f, &s, k, gamma);
    let value = f.evaluate(&s);
    Node { subset: s, value, fbar: value + hr.h, completion: hr.completion }
}

/// Runs A*-MOD from the greedy solution with `γ = f.gamma_lower()`.
pub fn astar_solve(f: &EvaluatedFunction, gs: &GroundSet, limits: &Limits) -> AstarResult {
    let clock = limits.start();
    let gamma = f.gamma_lower();
    let (n, k) = (gs.n(), gs.k());
    let chain = greedy(f, gs);
    let mut best = chain.solution();
    let mut best_value = chain.value();
    let mut heap = BinaryHeap::new();
    heap.push(node(f, Subset::empty(), k, gamma));
    let mut nodes = 0u64;

    while let Some(top) = heap.peek() {
        if clock.exceeded(nodes) {
            let bound = top.fbar.max(best_value);
            return AstarResult {
                best,
                value: best_value,
                bound,
                nodes,
                status: Status::Limit,
                millis: clock.millis(),
            };
        }
        let cur = heap.pop().expect("peeked");
        nodes += 1;
        if cur.fbar <= best_value + TOL {
            continue;
        }
        let cv = f.evaluate(&cur.completion);
        if cv > best_value {
            best = cur.completion;
            best_value = cv;
        }
        if cur.subset.len() < k {
            let lo = cur.subset.max_element().map_or(0, |m| m + 1);
            for i in lo..n {
                let child = node(f, cur.subset.with(i), k, gamma);
                if child.fbar > best_value + TOL {
                    heap.push(child);
                }
            }
        }
    }
    AstarResult { best, value: best_value, bound: best_value, nodes, status: Status::Optimal, millis: clock.millis() }
}
