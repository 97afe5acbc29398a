//! Set-function oracle shared by every algorithm.
//!
//! Instances implement [`SetFunction`]; algorithms talk to an
//! [`EvaluatedFunction`], which layers an optional reward overlay, an optional
//! memo table and an oracle-call counter on top of the raw instance.
//!
//! Call accounting: every evaluation that is not served from the memo counts
//! as one oracle call. A marginal `f({i} | S)` therefore costs 0, 1 or 2 calls
//! depending on how many of `f(S)` and `f(S ∪ {i})` were cached.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::instances::RewardOverlay;
use crate::subset::{Subset, MAX_ELEMENTS};

/// Absolute tolerance for value comparisons and termination tests.
pub const TOL: f64 = 1e-9;

/// Ground sets up to this size are memoized by default.
pub const MEMO_DEFAULT_MAX_N: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundSet {
    n: usize,
    k: usize,
}

impl GroundSet {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 || k == 0 || k > n || n > MAX_ELEMENTS {
            return Err(Error::InvalidGroundSet { n, k });
        }
        Ok(GroundSet { n, k })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn full(&self) -> Subset {
        Subset::full(self.n)
    }
}

/// A raw set function over `{0, .., n-1}`.
pub trait SetFunction: Send + Sync {
    fn ground_size(&self) -> usize;
    fn value(&self, s: &Subset) -> f64;
}

pub struct EvaluatedFunction {
    base: Arc<dyn SetFunction>,
    overlay: Option<Arc<RewardOverlay>>,
    gamma_lower: f64,
    memo: Option<Mutex<HashMap<Subset, f64>>>,
    calls: AtomicU64,
}

impl EvaluatedFunction {
    pub fn new(base: Arc<dyn SetFunction>, gamma_lower: f64) -> Self {
        let memo = (base.ground_size() <= MEMO_DEFAULT_MAX_N).then(|| Mutex::new(HashMap::new()));
        EvaluatedFunction { base, overlay: None, gamma_lower, memo, calls: AtomicU64::new(0) }
    }

    pub fn with_overlay(mut self, overlay: Arc<RewardOverlay>) -> Self {
        self.overlay = Some(overlay);
        self.clear_memo();
        self
    }

    pub fn with_memo(mut self, enabled: bool) -> Self {
        self.memo = enabled.then(|| Mutex::new(HashMap::new()));
        self
    }

    /// A copy sharing instance data but with a fresh counter and memo.
    pub fn fresh(&self) -> Self {
        EvaluatedFunction {
            base: Arc::clone(&self.base),
            overlay: self.overlay.clone(),
            gamma_lower: self.gamma_lower,
            memo: self.memo.as_ref().map(|_| Mutex::new(HashMap::new())),
            calls: AtomicU64::new(0),
        }
    }

    fn clear_memo(&mut self) {
        if let Some(m) = &self.memo {
            m.lock().unwrap().clear();
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.base.ground_size()
    }

    /// Declared lower bound on the submodular ratio.
    #[inline]
    pub fn gamma_lower(&self) -> f64 {
        self.gamma_lower
    }

    pub fn set_gamma_lower(&mut self, gamma: f64) {
        self.gamma_lower = gamma;
    }

    pub fn base(&self) -> &Arc<dyn SetFunction> {
        &self.base
    }

    pub fn overlay(&self) -> Option<&Arc<RewardOverlay>> {
        self.overlay.as_ref()
    }

    pub fn oracle_calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn compute(&self, s: &Subset) -> f64 {
        let reward = self.overlay.as_ref().map_or(0.0, |o| o.reward(s));
        self.base.value(s) + reward
    }

    /// `f(S)`.
    pub fn evaluate(&self, s: &Subset) -> f64 {
        if let Some(memo) = &self.memo {
            if let Some(&v) = memo.lock().unwrap().get(s) {
                return v;
            }
            let v = self.compute(s);
            self.calls.fetch_add(1, Ordering::Relaxed);
            memo.lock().unwrap().insert(*s, v);
            v
        } else {
            self.calls.fetch_add(1, Ordering::Relaxed);
            self.compute(s)
        }
    }

    /// `f({i} | S) = f(S ∪ {i}) - f(S)`; `i` must not be in `S`.
    pub fn marginal(&self, i: usize, s: &Subset) -> Result<f64> {
        if s.contains(i) {
            return Err(Error::ElementPresent { element: i });
        }
        Ok(self.marginal_unchecked(i, s))
    }

    #[inline]
    pub(crate) fn marginal_unchecked(&self, i: usize, s: &Subset) -> f64 {
        self.evaluate(&s.with(i)) - self.evaluate(s)
    }

    /// Candidate with the largest marginal at `S`; smallest index wins ties.
    pub fn argmax_marginal(&self, candidates: &Subset, s: &Subset) -> Result<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in candidates.iter() {
            let g = self.marginal(i, s)?;
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((i, g));
            }
        }
        best.map(|(i, _)| i).ok_or(Error::EmptyCandidates)
    }

    /// Marginals of every element outside `S` (entries for members of `S` are 0).
    pub fn marginals(&self, s: &Subset) -> Vec<f64> {
        let fs = self.evaluate(s);
        (0..self.n()).map(|i| if s.contains(i) { 0.0 } else { self.evaluate(&s.with(i)) - fs }).collect()
    }
}

impl std::fmt::Debug for EvaluatedFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvaluatedFunction")
            .field("n", &self.n())
            .field("gamma_lower", &self.gamma_lower)
            .field("overlay", &self.overlay.as_ref().map(|o| o.len()))
            .field("memo", &self.memo.is_some())
            .field("oracle_calls", &self.oracle_calls())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{CovInstance, LocInstance, Modular};

    fn modular(w: &[f64]) -> EvaluatedFunction {
        EvaluatedFunction::new(Arc::new(Modular::new(w.to_vec())), 1.0)
    }

    #[test]
    fn ground_set_validation() {
        assert!(GroundSet::new(0, 0).is_err());
        assert!(GroundSet::new(3, 0).is_err());
        assert!(GroundSet::new(3, 4).is_err());
        assert!(GroundSet::new(MAX_ELEMENTS + 1, 1).is_err());
        let gs = GroundSet::new(5, 5).unwrap();
        assert_eq!(gs.full().len(), 5);
    }

    #[test]
    fn empty_set_is_zero() {
        let f = modular(&[1.0, 2.0]);
        assert_eq!(f.evaluate(&Subset::empty()), 0.0);
    }

    #[test]
    fn single_location_benefit() {
        let loc = LocInstance::from_matrix(vec![vec![0.5]]).unwrap();
        let f = EvaluatedFunction::new(Arc::new(loc), 1.0);
        assert_eq!(f.evaluate(&Subset::from_elements([0])), 0.5);
    }

    #[test]
    fn marginal_at_empty_set_is_singleton_value() {
        let inst = CovInstance::generate(6, 7, 3).unwrap();
        let f = EvaluatedFunction::new(Arc::new(inst), 1.0);
        let single = f.evaluate(&Subset::from_elements([0]));
        assert_eq!(f.marginal(0, &Subset::empty()).unwrap(), single);
    }

    #[test]
    fn marginal_rejects_present_element() {
        let f = modular(&[1.0, 2.0]);
        let err = f.marginal(1, &Subset::from_elements([1])).unwrap_err();
        assert!(matches!(err, Error::ElementPresent { element: 1 }));
    }

    #[test]
    fn modular_marginal_is_state_independent() {
        let f = modular(&[3.0, 1.0, 2.0, 0.5]);
        for mask in 0u64..16 {
            let s = Subset::from_mask(mask);
            for i in 0..4 {
                if !s.contains(i) {
                    assert_eq!(f.marginal(i, &s).unwrap(), f.evaluate(&Subset::from_elements([i])));
                }
            }
        }
    }

    #[test]
    fn argmax_tie_breaks_to_smallest_index() {
        let f = modular(&[1.0, 2.0, 2.0, 0.0]);
        let cands = Subset::full(4);
        assert_eq!(f.argmax_marginal(&cands, &Subset::empty()).unwrap(), 1);
        assert_eq!(f.argmax_marginal(&Subset::from_elements([3]), &Subset::empty()).unwrap(), 3);
        assert_eq!(f.argmax_marginal(&Subset::from_elements([0, 3]), &Subset::empty()).unwrap(), 0);
        assert!(matches!(f.argmax_marginal(&Subset::empty(), &Subset::empty()), Err(Error::EmptyCandidates)));
    }

    #[test]
    fn argmax_matches_linear_scan_on_coverage() {
        let inst = CovInstance::generate(12, 13, 99).unwrap();
        let f = EvaluatedFunction::new(Arc::new(inst), 1.0);
        let s = Subset::empty();
        let mut best = 0;
        for i in 1..12 {
            if f.evaluate(&s.with(i)) > f.evaluate(&s.with(best)) {
                best = i;
            }
        }
        assert_eq!(f.argmax_marginal(&Subset::full(12), &s).unwrap(), best);
    }

    #[test]
    fn memo_accounting() {
        let f = modular(&[1.0, 2.0, 3.0]);
        let s = Subset::from_elements([0]);
        f.evaluate(&s);
        assert_eq!(f.oracle_calls(), 1);
        f.evaluate(&s);
        assert_eq!(f.oracle_calls(), 1);
        // f(S) cached, f(S ∪ {1}) not: one call.
        f.marginal(1, &s).unwrap();
        assert_eq!(f.oracle_calls(), 2);
        // both cached: free.
        f.marginal(1, &s).unwrap();
        assert_eq!(f.oracle_calls(), 2);
        // neither cached: two calls.
        f.marginal(2, &Subset::from_elements([1])).unwrap();
        assert_eq!(f.oracle_calls(), 4);

        let g = modular(&[1.0, 2.0]).with_memo(false);
        g.evaluate(&s);
        g.evaluate(&s);
        assert_eq!(g.oracle_calls(), 2);
    }

    #[test]
    fn evaluate_is_pure() {
        let inst = CovInstance::generate(8, 9, 5).unwrap();
        let f = EvaluatedFunction::new(Arc::new(inst), 1.0).with_memo(false);
        let s = Subset::from_elements([1, 4, 6]);
        let a = f.evaluate(&s);
        for _ in 0..5 {
            assert_eq!(f.evaluate(&s).to_bits(), a.to_bits());
        }
    }
}
