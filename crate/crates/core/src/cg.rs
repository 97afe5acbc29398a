//! Constraint generation: CG and MCG (one new cut per iteration) and ICG,
//! which also mints cuts from randomized SUB-ICG blends of tight rows.

use std::collections::HashMap;
use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bip::{solve, BipSolution, CutMode, CutRow, ReducedBipModel};
use crate::error::Result;
use crate::function::{EvaluatedFunction, GroundSet, TOL};
use crate::greedy::{greedy, GreedyChain};
use crate::instances::seeded_rng;
use crate::subset::Subset;
use crate::{Clock, Limits, Status};

pub const TRACE_FORMAT: &str = "# asfm-cg-trace v1";

/// Total SUB-ICG draws per call are capped at this multiple of `λ`.
pub const DRAW_CAP_FACTOR: usize = 20;

/// Default `λ` per unit of `k`.
pub const LAMBDA_PER_K: usize = 10;

/// The solutions inducing the current cuts.
///
/// Every member belongs to `Q⁺`; members produced by the subsolver (plus the
/// initial solution) are also flagged as belonging to `Q`.
#[derive(Debug, Clone)]
pub struct CutPool {
    mode: CutMode,
    rows: Vec<CutRow>,
    index: HashMap<Subset, usize>,
    generated: Vec<bool>,
    generated_count: usize,
    counts: Vec<u64>,
}

impl CutPool {
    pub fn new(n: usize, mode: CutMode) -> Self {
        CutPool {
            mode,
            rows: Vec::new(),
            index: HashMap::new(),
            generated: Vec::new(),
            generated_count: 0,
            counts: vec![0; n],
        }
    }

    /// Adds `s` to `Q⁺`; returns whether it was new.
    pub fn insert(&mut self, f: &EvaluatedFunction, s: Subset) -> bool {
        if self.index.contains_key(&s) {
            return false;
        }
        for i in s.iter() {
            self.counts[i] += 1;
        }
        self.index.insert(s, self.rows.len());
        self.rows.push(CutRow::generate(f, s, self.mode));
        self.generated.push(false);
        true
    }

    /// Adds `s` to `Q` (and `Q⁺`); returns whether it was new to `Q`.
    pub fn insert_generated(&mut self, f: &EvaluatedFunction, s: Subset) -> bool {
        self.insert(f, s);
        let idx = self.index[&s];
        let fresh = !self.generated[idx];
        if fresh {
            self.generated[idx] = true;
            self.generated_count += 1;
        }
        fresh
    }

    pub fn contains(&self, s: &Subset) -> bool {
        self.index.contains_key(s)
    }

    pub fn is_generated(&self, s: &Subset) -> bool {
        self.index.get(s).is_some_and(|&i| self.generated[i])
    }

    pub fn rows(&self) -> &[CutRow] {
        &self.rows
    }

    /// `|Q⁺|`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `|Q|`.
    pub fn generated_len(&self) -> usize {
        self.generated_count
    }

    pub fn generated(&self) -> impl Iterator<Item = &Subset> {
        self.rows.iter().zip(&self.generated).filter(|(_, g)| **g).map(|(r, _)| r.source())
    }

    /// Number of `Q⁺` members containing `i`.
    pub fn occurrence(&self, i: usize) -> u64 {
        self.counts[i]
    }

    /// `p_i = q_i / Σ_j q_j` over `Q⁺`.
    pub fn occurrence_rates(&self) -> Vec<f64> {
        let total: u64 = self.counts.iter().sum();
        if total == 0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts.iter().map(|&q| q as f64 / total as f64).collect()
    }

    pub fn model(&self, k: usize, fixed_zero: Subset, fixed_one: Subset) -> Result<ReducedBipModel<'_>> {
        ReducedBipModel::new(self.counts.len(), k, self.rows.as_slice(), fixed_zero, fixed_one)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CgIteration {
    pub t: usize,
    pub z: f64,
    pub f_t: f64,
    pub f_best: f64,
    pub q: usize,
    pub q_plus: usize,
    pub subsolver_nodes: u64,
    pub millis: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CgTrace {
    /// Seed of the SUB-ICG generator (ICG only).
    pub seed: Option<u64>,
    pub iterations: Vec<CgIteration>,
}

impl CgTrace {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{TRACE_FORMAT}")?;
        if let Some(seed) = self.seed {
            writeln!(w, "# seed {seed}")?;
        }
        let mut out = csv::Writer::from_writer(w);
        for it in &self.iterations {
            out.serialize(it)?;
        }
        if self.iterations.is_empty() {
            out.write_record(["t", "z", "f_t", "f_best", "q", "q_plus", "subsolver_nodes", "millis"])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CgResult {
    pub best: Subset,
    pub value: f64,
    /// Last subsolver optimum (an upper bound on OPT); infinite if none ran.
    pub bound: f64,
    pub status: Status,
    pub subsolver_calls: u64,
    pub trace: CgTrace,
    pub millis: f64,
}

impl CgResult {
    pub fn gap(&self) -> f64 {
        self.bound - self.value
    }
}

/// Algorithm CG (`Sfm`) or MCG (`Asfm`).
pub fn cg_solve(f: &EvaluatedFunction, gs: &GroundSet, mode: CutMode, limits: &Limits) -> Result<CgResult> {
    let clock = limits.start();
    let chain = greedy(f, gs);
    let mut pool = CutPool::new(gs.n(), mode);
    for &p in &chain.prefixes {
        pool.insert_generated(f, p);
    }
    let mut best = chain.solution();
    let mut best_value = chain.value();
    let mut trace = CgTrace::default();
    let mut bound = f64::INFINITY;
    let mut t = 0u64;
    loop {
        if clock.exceeded(t) {
            return Ok(CgResult {
                best,
                value: best_value,
                bound,
                status: Status::Limit,
                subsolver_calls: t,
                trace,
                millis: clock.millis(),
            });
        }
        t += 1;
        let sol = solve(&pool.model(gs.k(), Subset::empty(), Subset::empty())?, Some(best_value))?;
        bound = sol.z;
        let f_t = f.evaluate(&sol.y);
        if f_t > best_value {
            best = sol.y;
            best_value = f_t;
        }
        let done = sol.z <= best_value + TOL;
        if !done {
            pool.insert_generated(f, sol.y);
        }
        trace.iterations.push(CgIteration {
            t: t as usize,
            z: sol.z,
            f_t,
            f_best: best_value,
            q: pool.generated_len(),
            q_plus: pool.len(),
            subsolver_nodes: sol.nodes,
            millis: clock.millis(),
        });
        if done {
            return Ok(CgResult {
                best,
                value: best_value,
                bound,
                status: Status::Optimal,
                subsolver_calls: t,
                trace,
                millis: clock.millis(),
            });
        }
    }
}

/// Algorithm SUB-ICG: up to `λ` new feasible solutions blending a random
/// tight-row source `S♮` with the subsolver solution `S^(t) = sol.y`.
///
/// Each draw sets `r_i ~ U[0, p_i]` on `S♮ ∪ S^(t)` (ascending element
/// order); if `|S♮| = k` it keeps the `k` largest `r_i`, otherwise it adds
/// the largest-`r_i` element of `S^(t) ∖ S♮` to `S♮`. Ties go to the smaller
/// element. Candidates already in the pool, equal to `S^(t)` or already
/// collected are discarded. At most `20λ` draws are made.
pub fn sub_icg(pool: &CutPool, sol: &BipSolution, k: usize, lambda: usize, rng: &mut ChaCha8Rng) -> Vec<Subset> {
    let rates = pool.occurrence_rates();
    let s_t = sol.y;
    let mut out: Vec<Subset> = Vec::new();
    let mut draws = 0;
    let mut r = vec![0.0; rates.len()];
    while out.len() < lambda && draws < DRAW_CAP_FACTOR * lambda {
        draws += 1;
        let pick = sol.tight_rows[rng.gen_range(0..sol.tight_rows.len())];
        let natural = *pool.rows()[pick].source();
        let union = natural.union(&s_t);
        for i in union.iter() {
            r[i] = rng.gen::<f64>() * rates[i];
        }
        let better = |a: usize, b: usize| r[a] > r[b] || (r[a] == r[b] && a < b);
        let candidate = if natural.len() >= k {
            let mut elems = union.to_vec();
            elems.sort_by(|&a, &b| r[b].total_cmp(&r[a]).then(a.cmp(&b)));
            elems.truncate(k);
            elems.into_iter().collect::<Subset>()
        } else {
            match s_t.difference(&natural).iter().reduce(|a, b| if better(b, a) { b } else { a }) {
                Some(e) => natural.with(e),
                None => natural,
            }
        };
        if candidate != s_t && !pool.contains(&candidate) && !out.contains(&candidate) {
            out.push(candidate);
        }
    }
    out
}

/// Shared ICG state, also driving the warm-up and node updates of BC-ICG.
pub(crate) struct IcgState {
    pub(crate) pool: CutPool,
    pub(crate) best: Subset,
    pub(crate) best_value: f64,
    pub(crate) rng: ChaCha8Rng,
    pub(crate) lambda: usize,
    pub(crate) k: usize,
    pub(crate) iterations: u64,
    pub(crate) trace: CgTrace,
}

pub(crate) enum Step {
    Optimal(f64),
    Continue(f64),
}

impl IcgState {
    pub(crate) fn new(f: &EvaluatedFunction, gs: &GroundSet, lambda: usize, seed: u64) -> (Self, GreedyChain) {
        let chain = greedy(f, gs);
        let mut pool = CutPool::new(gs.n(), CutMode::Asfm);
        for &p in &chain.prefixes {
            pool.insert(f, p);
        }
        pool.insert_generated(f, chain.solution());
        let state = IcgState {
            pool,
            best: chain.solution(),
            best_value: chain.value(),
            rng: seeded_rng(seed),
            lambda,
            k: gs.k(),
            iterations: 0,
            trace: CgTrace { seed: Some(seed), iterations: Vec::new() },
        };
        (state, chain)
    }

    fn offer(&mut self, f: &EvaluatedFunction, s: Subset) -> f64 {
        let v = f.evaluate(&s);
        if v > self.best_value {
            self.best = s;
            self.best_value = v;
        }
        v
    }

    /// Adds `sol.y` to `Q` and `Q⁺` with its SUB-ICG samples, offering all of
    /// them as incumbents. Samples are drawn only if `sol.y` is new to `Q`.
    pub(crate) fn absorb(&mut self, f: &EvaluatedFunction, sol: &BipSolution) {
        let samples = if self.pool.is_generated(&sol.y) {
            Vec::new()
        } else {
            sub_icg(&self.pool, sol, self.k, self.lambda, &mut self.rng)
        };
        self.pool.insert_generated(f, sol.y);
        self.offer(f, sol.y);
        for s in samples {
            self.pool.insert(f, s);
            self.offer(f, s);
        }
    }

    /// One ICG iteration (Steps 2 to 6).
    pub(crate) fn iterate(&mut self, f: &EvaluatedFunction, clock: &Clock) -> Result<Step> {
        self.iterations += 1;
        let sol = solve(&self.pool.model(self.k, Subset::empty(), Subset::empty())?, Some(self.best_value))?;
        let f_t = self.offer(f, sol.y);
        let done = sol.z <= self.best_value + TOL;
        if !done {
            self.absorb(f, &sol);
        }
        self.trace.iterations.push(CgIteration {
            t: self.iterations as usize,
            z: sol.z,
            f_t,
            f_best: self.best_value,
            q: self.pool.generated_len(),
            q_plus: self.pool.len(),
            subsolver_nodes: sol.nodes,
            millis: clock.millis(),
        });
        Ok(if done { Step::Optimal(sol.z) } else { Step::Continue(sol.z) })
    }
}

/// Algorithm ICG with `λ` samples per iteration and a seeded generator.
pub fn icg_solve(f: &EvaluatedFunction, gs: &GroundSet, lambda: usize, limits: &Limits, seed: u64) -> Result<CgResult> {
    let clock = limits.start();
    let (mut state, _) = IcgState::new(f, gs, lambda.max(1), seed);
    let mut bound = f64::INFINITY;
    loop {
        if clock.exceeded(state.iterations) {
            return Ok(finish(state, bound, Status::Limit, &clock));
        }
        match state.iterate(f, &clock)? {
            Step::Optimal(z) => return Ok(finish(state, z, Status::Optimal, &clock)),
            Step::Continue(z) => bound = z,
        }
    }
}

fn finish(state: IcgState, bound: f64, status: Status, clock: &Clock) -> CgResult {
    CgResult {
        best: state.best,
        value: state.best_value,
        bound,
        status,
        subsolver_calls: state.iterations,
        trace: state.trace,
        millis: clock.millis(),
    }
}

/// `10k`.
pub fn default_lambda(k: usize) -> usize {
    LAMBDA_PER_K * k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{CovInstance, LocInstance, Modular};
    use std::sync::Arc;

    #[test]
    fn pool_dedup_and_counts() {
        let f = EvaluatedFunction::new(Arc::new(Modular::new(vec![1.0, 2.0, 3.0])), 1.0);
        let mut pool = CutPool::new(3, CutMode::Asfm);
        assert!(pool.insert(&f, Subset::from_elements([0, 1])));
        assert!(!pool.insert(&f, Subset::from_elements([1, 0])));
        assert!(pool.insert_generated(&f, Subset::from_elements([1])));
        assert!(pool.insert_generated(&f, Subset::from_elements([0, 1])));
        assert!(!pool.insert_generated(&f, Subset::from_elements([0, 1])));
        assert_eq!(pool.len(), 2);
        assert_eq!(pool.generated_len(), 2);
        assert_eq!((pool.occurrence(0), pool.occurrence(1), pool.occurrence(2)), (1, 2, 0));
        assert_eq!(pool.occurrence_rates(), vec![1.0 / 3.0, 2.0 / 3.0, 0.0]);
    }

    #[test]
    fn greedy_optimal_terminates_at_first_iteration() {
        let f = EvaluatedFunction::new(Arc::new(Modular::new(vec![3.0, 1.0, 2.0, 0.5])), 1.0);
        let gs = GroundSet::new(4, 2).unwrap();
        let res = cg_solve(&f, &gs, CutMode::Sfm, &Limits::none()).unwrap();
        assert_eq!(res.status, Status::Optimal);
        assert_eq!(res.subsolver_calls, 1);
        assert_eq!(res.value, 5.0);
    }

    fn sol(y: Subset, tight: Vec<usize>) -> BipSolution {
        BipSolution { y, z: 0.0, tight_rows: tight, nodes: 0 }
    }

    #[test]
    fn sub_icg_with_natural_equal_to_solution_is_empty() {
        let f = EvaluatedFunction::new(Arc::new(Modular::new(vec![1.0, 2.0, 3.0, 4.0])), 1.0);
        let mut pool = CutPool::new(4, CutMode::Asfm);
        let s = Subset::from_elements([0, 2]);
        pool.insert(&f, s);
        let out = sub_icg(&pool, &sol(s, vec![0]), 2, 5, &mut seeded_rng(1));
        assert!(out.is_empty());
    }

    #[test]
    fn sub_icg_single_extension() {
        let f = EvaluatedFunction::new(Arc::new(Modular::new(vec![1.0, 2.0, 3.0, 4.0])), 1.0);
        let mut pool = CutPool::new(4, CutMode::Asfm);
        pool.insert(&f, Subset::from_elements([0]));
        pool.insert(&f, Subset::from_elements([3]));
        let out = sub_icg(&pool, &sol(Subset::from_elements([0, 3]), vec![0]), 3, 30, &mut seeded_rng(2));
        assert!(out.is_empty());
        let out = sub_icg(&pool, &sol(Subset::from_elements([1, 3]), vec![0]), 3, 30, &mut seeded_rng(2));
        assert_eq!(out, vec![Subset::from_elements([0, 3])]);
    }

    #[test]
    fn sub_icg_outputs_are_new_and_feasible() {
        let inst = CovInstance::generate(12, 13, 7).unwrap();
        let f = EvaluatedFunction::new(Arc::new(inst), 0.8);
        let gs = GroundSet::new(12, 4).unwrap();
        let (mut state, _) = IcgState::new(&f, &gs, 40, 3);
        let clock = Limits::none().start();
        for _ in 0..3 {
            let model_sol = solve(&state.pool.model(4, Subset::empty(), Subset::empty()).unwrap(), None).unwrap();
            let out = sub_icg(&state.pool, &model_sol, 4, 40, &mut seeded_rng(9));
            for s in &out {
                assert!(s.len() <= 4);
                assert!(!state.pool.contains(s));
                assert_ne!(*s, model_sol.y);
            }
            if let Step::Optimal(_) = state.iterate(&f, &clock).unwrap() {
                break;
            }
        }
    }

    #[test]
    fn icg_trace_bounds_are_monotone() {
        let inst = LocInstance::generate(12, 13, 5).unwrap();
        let f = EvaluatedFunction::new(Arc::new(inst), 0.8);
        let gs = GroundSet::new(12, 4).unwrap();
        let res = icg_solve(&f, &gs, default_lambda(4), &Limits::none(), 11).unwrap();
        assert_eq!(res.status, Status::Optimal);
        for w in res.trace.iterations.windows(2) {
            assert!(w[1].z <= w[0].z + TOL);
            assert!(w[1].f_best >= w[0].f_best);
        }
        assert!(res.gap().abs() <= TOL);
    }

    #[test]
    fn trace_csv_has_version_line() {
        let mut out = Vec::new();
        let trace = CgTrace {
            seed: Some(4),
            iterations: vec![CgIteration {
                t: 1,
                z: 2.5,
                f_t: 2.0,
                f_best: 2.5,
                q: 3,
                q_plus: 9,
                subsolver_nodes: 12,
                millis: 0.5,
            }],
        };
        trace.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TRACE_FORMAT);
        assert_eq!(lines[1], "# seed 4");
        assert_eq!(lines[2], "t,z,f_t,f_best,q,q_plus,subsolver_nodes,millis");
        assert_eq!(lines[3], "1,2.5,2.0,2.5,3,9,12,0.5");
    }
}
