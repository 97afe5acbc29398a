//! BC-ICG: depth-first branch-and-cut over variable fixings `(S⁰, S¹)`.

use std::io::Write;

use serde::Serialize;

use crate::bip::solve;
use crate::cg::{IcgState, Step};
use crate::error::Result;
use crate::function::{EvaluatedFunction, GroundSet, TOL};
use crate::subset::Subset;
use crate::{Limits, Status};

pub const TRACE_FORMAT: &str = "# asfm-bc-trace v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcNode {
    pub fixed_zero: Subset,
    pub fixed_one: Subset,
    /// The parent's subsolver optimum (infinite at the root).
    pub inherited_bound: f64,
    pub depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeAction {
    PrunedInherited,
    PrunedSolved,
    Branched,
    Leaf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeRecord {
    pub node: u64,
    pub depth: usize,
    pub fixed_one: usize,
    pub zbar: f64,
    pub z: Option<f64>,
    pub f_best: f64,
    pub action: NodeAction,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BcStats {
    /// Nodes extracted from the stack.
    pub nodes_processed: u64,
    pub nodes_pruned_inherited: u64,
    pub nodes_pruned_solved: u64,
    /// Subsolver calls at tree nodes.
    pub subsolver_calls: u64,
    /// ICG iterations run before the tree search.
    pub warmup_iterations: u64,
    /// `(nodes processed so far, new incumbent value)` on every improvement.
    pub incumbent_history: Vec<(u64, f64)>,
    pub trace: Vec<NodeRecord>,
}

impl BcStats {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{TRACE_FORMAT}")?;
        let mut out = csv::Writer::from_writer(w);
        for rec in &self.trace {
            out.serialize(rec)?;
        }
        if self.trace.is_empty() {
            out.write_record(["node", "depth", "fixed_one", "zbar", "z", "f_best", "action"])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BcResult {
    pub best: Subset,
    pub value: f64,
    /// `f(S*)` when optimal; otherwise the largest bound over open nodes.
    pub bound: f64,
    pub status: Status,
    pub stats: BcStats,
    /// Warm-up iterations plus node solves.
    pub subsolver_calls: u64,
    pub millis: f64,
}

/// Algorithm BC-ICG with `λ` SUB-ICG samples per solved node.
pub fn bc_icg_solve(
    f: &EvaluatedFunction,
    gs: &GroundSet,
    lambda: usize,
    limits: &Limits,
    seed: u64,
) -> Result<BcResult> {
    let clock = limits.start();
    let (n, k) = (gs.n(), gs.k());
    let (mut icg, _) = IcgState::new(f, gs, lambda.max(1), seed);
    let mut stats = BcStats::default();
    let mut bound = f64::INFINITY;

    let result = |icg: &IcgState, stats: BcStats, bound: f64, status| BcResult {
        best: icg.best,
        value: icg.best_value,
        bound,
        status,
        subsolver_calls: stats.warmup_iterations + stats.subsolver_calls,
        stats,
        millis: clock.millis(),
    };

    for _ in 0..k {
        if clock.exceeded(0) {
            return Ok(result(&icg, stats, bound, Status::Limit));
        }
        let step = icg.iterate(f, &clock)?;
        stats.warmup_iterations += 1;
        match step {
            Step::Optimal(_) => {
                let v = icg.best_value;
                return Ok(result(&icg, stats, v, Status::Optimal));
            }
            Step::Continue(z) => bound = z,
        }
    }

    let mut stack = vec![BcNode {
        fixed_zero: Subset::empty(),
        fixed_one: Subset::empty(),
        inherited_bound: f64::INFINITY,
        depth: 0,
    }];
    while let Some(node) = stack.pop() {
        if clock.exceeded(stats.nodes_processed) {
            stack.push(node);
            let open = stack.iter().map(|nd| nd.inherited_bound).fold(f64::NEG_INFINITY, f64::max);
            let b = open.min(bound).max(icg.best_value);
            return Ok(result(&icg, stats, b, Status::Limit));
        }
        stats.nodes_processed += 1;
        let id = stats.nodes_processed;
        let before = icg.best_value;
        let mut record = NodeRecord {
            node: id,
            depth: node.depth,
            fixed_one: node.fixed_one.len(),
            zbar: node.inherited_bound,
            z: None,
            f_best: icg.best_value,
            action: NodeAction::PrunedInherited,
        };
        if node.inherited_bound <= icg.best_value + TOL {
            stats.nodes_pruned_inherited += 1;
            stats.trace.push(record);
            continue;
        }

        let sol = solve(&icg.pool.model(k, node.fixed_zero, node.fixed_one)?, Some(icg.best_value))?;
        stats.subsolver_calls += 1;
        icg.absorb(f, &sol);
        if icg.best_value > before {
            stats.incumbent_history.push((id, icg.best_value));
        }
        record.z = Some(sol.z);
        record.f_best = icg.best_value;

        if sol.z <= icg.best_value + TOL {
            stats.nodes_pruned_solved += 1;
            record.action = NodeAction::PrunedSolved;
        } else {
            let fixed = node.fixed_zero.union(&node.fixed_one);
            if fixed.len() < n && node.fixed_one.len() < k {
                let free = gs.full().difference(&fixed);
                let mut pick: Option<(usize, f64)> = None;
                for i in free.iter() {
                    let v = f.evaluate(&node.fixed_one.with(i));
                    if pick.is_none_or(|(_, pv)| v > pv) {
                        pick = Some((i, v));
                    }
                }
                let (i, _) = pick.expect("a free element exists");
                let child = |zero: Subset, one: Subset| BcNode {
                    fixed_zero: zero,
                    fixed_one: one,
                    inherited_bound: sol.z,
                    depth: node.depth + 1,
                };
                stack.push(child(node.fixed_zero.with(i), node.fixed_one));
                stack.push(child(node.fixed_zero, node.fixed_one.with(i)));
                record.action = NodeAction::Branched;
            } else {
                record.action = NodeAction::Leaf;
            }
        }
        stats.trace.push(record);
    }
    let v = icg.best_value;
    Ok(result(&icg, stats, v, Status::Optimal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{CovInstance, Modular};
    use std::sync::Arc;

    #[test]
    fn full_budget_returns_everything() {
        let inst = CovInstance::generate(5, 6, 3).unwrap();
        let f = EvaluatedFunction::new(Arc::new(inst), 0.8);
        let res = bc_icg_solve(&f, &GroundSet::new(5, 5).unwrap(), 50, &Limits::none(), 1).unwrap();
        assert_eq!(res.status, Status::Optimal);
        assert_eq!(res.value, f.evaluate(&Subset::full(5)));
    }

    #[test]
    fn warm_up_can_finish_the_job() {
        let f = EvaluatedFunction::new(Arc::new(Modular::new(vec![3.0, 1.0, 2.0, 0.5])), 1.0);
        let res = bc_icg_solve(&f, &GroundSet::new(4, 2).unwrap(), 20, &Limits::none(), 1).unwrap();
        assert_eq!(res.status, Status::Optimal);
        assert_eq!(res.stats.nodes_processed, 0);
        assert_eq!(res.value, 5.0);
    }

    #[test]
    fn stats_are_consistent() {
        let inst = CovInstance::generate(12, 13, 8).unwrap();
        let f = EvaluatedFunction::new(Arc::new(inst), 0.7);
        let res = bc_icg_solve(&f, &GroundSet::new(12, 4).unwrap(), 40, &Limits::none(), 5).unwrap();
        let s = &res.stats;
        assert!(s.nodes_processed >= s.subsolver_calls);
        assert_eq!(s.trace.len() as u64, s.nodes_processed);
        assert_eq!(s.nodes_processed, s.subsolver_calls + s.nodes_pruned_inherited);
        for w in s.incumbent_history.windows(2) {
            assert!(w[1].1 > w[0].1);
        }
        let mut out = Vec::new();
        s.write_csv(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with(TRACE_FORMAT));
    }
}
