//! Reward overlay turning an exactly submodular instance into an
//! approximately submodular one.
//!
//! Randomly chosen feasible subsets `S` (`1 <= |S| <= k`) receive a reward
//! `r_S >= 0`, so the overlaid function is `f(S) + r_S`. A candidate reward is
//! accepted only if the overlaid function stays non-decreasing and keeps
//! `f({i}|A) >= γ f({i}|B)` for every `A ⊆ B`, `i ∉ B` that involves `S`;
//! otherwise it is halved (up to ten times) before the subset is skipped.
//!
//! Only four kinds of tuples change when `f(S)` grows: `A = S`, `A ∪ {i} = S`,
//! `B = S` and `B ∪ {i} = S`. Growth helps the second and third kind, so the
//! check computes the largest admissible reward from the other two plus
//! upward monotonicity. For `n <= 15` every superset `B ⊋ S` is examined;
//! above that the single-element extensions and 200 random supersets are.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::seeded_rng;
use crate::error::{Error, Result};
use crate::function::SetFunction;
use crate::subset::{binomial, submasks, Subset};

/// Above this size only sampled supersets are validated.
pub const EXHAUSTIVE_MAX_N: usize = 15;
pub const SAMPLED_SUPERSETS: usize = 200;
pub const MAX_HALVINGS: usize = 10;
/// Candidate rewards are drawn from `(0, REWARD_SCALE · f({1..k})]`.
pub const REWARD_SCALE: f64 = 0.1;

const DENSE_MAX_N: usize = 22;
const ACCEPT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Default)]
pub struct RewardOverlay {
    k: usize,
    gamma: f64,
    entries: Vec<(Subset, f64)>,
    index: HashMap<Subset, usize>,
}

impl RewardOverlay {
    pub fn new(k: usize, gamma: f64) -> Self {
        RewardOverlay { k, gamma, entries: Vec::new(), index: HashMap::new() }
    }

    pub fn from_pairs<I: IntoIterator<Item = (Subset, f64)>>(k: usize, gamma: f64, pairs: I) -> Result<Self> {
        let mut ov = RewardOverlay::new(k, gamma);
        for (s, r) in pairs {
            ov.insert(s, r)?;
        }
        Ok(ov)
    }

    /// Adds or replaces the reward of `s`.
    pub fn insert(&mut self, s: Subset, reward: f64) -> Result<()> {
        if s.is_empty() {
            return Err(Error::InvalidArgument("the empty set cannot carry a reward".into()));
        }
        if s.len() > self.k {
            return Err(Error::InvalidArgument(format!("overlay key {s} exceeds cardinality {}", self.k)));
        }
        if !(reward >= 0.0) || !reward.is_finite() {
            return Err(Error::InvalidArgument(format!("overlay reward {reward} must be finite and >= 0")));
        }
        match self.index.get(&s) {
            Some(&pos) => self.entries[pos].1 = reward,
            None => {
                self.index.insert(s, self.entries.len());
                self.entries.push((s, reward));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn reward(&self, s: &Subset) -> f64 {
        if s.len() > self.k || s.is_empty() {
            return 0.0;
        }
        self.index.get(s).map_or(0.0, |&pos| self.entries[pos].1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Ratio bound the overlay was validated against.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Entries in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = &(Subset, f64)> {
        self.entries.iter()
    }
}

/// Values of the overlaid function during construction.
enum Store<'a> {
    Dense { base: Vec<f64>, reward: Vec<f64> },
    Sparse { func: &'a dyn SetFunction, cache: HashMap<Subset, f64>, reward: HashMap<Subset, f64> },
}

impl<'a> Store<'a> {
    fn new(func: &'a dyn SetFunction) -> Self {
        let n = func.ground_size();
        if n <= DENSE_MAX_N {
            let size = 1usize << n;
            let base = (0..size as u64).map(|m| func.value(&Subset::from_mask(m))).collect();
            Store::Dense { base, reward: vec![0.0; size] }
        } else {
            Store::Sparse { func, cache: HashMap::new(), reward: HashMap::new() }
        }
    }

    fn base(&mut self, s: &Subset) -> f64 {
        match self {
            Store::Dense { base, .. } => base[s.low_mask() as usize],
            Store::Sparse { func, cache, .. } => *cache.entry(*s).or_insert_with(|| func.value(s)),
        }
    }

    fn f(&mut self, s: &Subset) -> f64 {
        match self {
            Store::Dense { base, reward } => {
                let m = s.low_mask() as usize;
                base[m] + reward[m]
            }
            Store::Sparse { .. } => {
                let b = self.base(s);
                let Store::Sparse { reward, .. } = self else { unreachable!() };
                b + reward.get(s).copied().unwrap_or(0.0)
            }
        }
    }

    fn set_reward(&mut self, s: &Subset, r: f64) {
        match self {
            Store::Dense { reward, .. } => reward[s.low_mask() as usize] = r,
            Store::Sparse { reward, .. } => {
                reward.insert(*s, r);
            }
        }
    }
}

struct Builder<'a> {
    n: usize,
    gamma: f64,
    store: Store<'a>,
}

impl Builder<'_> {
    /// Largest `r` such that setting `f(S) = base(S) + r` keeps every
    /// validated inequality.
    fn admissible_reward(&mut self, s: &Subset, rng: &mut ChaCha8Rng) -> f64 {
        let n = self.n;
        let base_s = self.store.base(s);
        let outside: Vec<usize> = (0..n).filter(|&i| !s.contains(i)).collect();
        let mut up = vec![0.0; n];
        let mut bound = f64::INFINITY;
        for &i in &outside {
            up[i] = self.store.f(&s.with(i));
            bound = bound.min(up[i] - base_s);
        }

        // A = S, B ⊋ S, i ∉ B:  f(S∪i) - f(S) >= γ f(i|B).
        let check_superset = |store: &mut Store, b: &Subset, bound: &mut f64| {
            let fb = store.f(b);
            for &i in &outside {
                if !b.contains(i) {
                    let m = store.f(&b.with(i)) - fb;
                    *bound = bound.min(up[i] - base_s - self.gamma * m);
                }
            }
        };
        if n <= EXHAUSTIVE_MAX_N {
            let comp = Subset::full(n).difference(s).low_mask();
            for extra in submasks(comp).filter(|&m| m != 0) {
                let b = Subset::from_mask(s.low_mask() | extra);
                check_superset(&mut self.store, &b, &mut bound);
            }
        } else {
            for &j in &outside {
                check_superset(&mut self.store, &s.with(j), &mut bound);
            }
            if outside.len() > 2 {
                for _ in 0..SAMPLED_SUPERSETS {
                    let extra = rng.gen_range(2..outside.len());
                    let mut b = *s;
                    for pos in sample(rng, outside.len(), extra) {
                        b.insert(outside[pos]);
                    }
                    check_superset(&mut self.store, &b, &mut bound);
                }
            }
        }

        // B ∪ {i} = S, A ⊊ B:  f(i|A) >= γ (f(S) - f(S∖i)).
        let members = s.to_vec();
        for &i in &members {
            let rest = s.without(i);
            let f_rest = self.store.f(&rest);
            for a in subsets_of(&rest) {
                if a == rest {
                    continue;
                }
                let m = self.store.f(&a.with(i)) - self.store.f(&a);
                bound = bound.min(m / self.gamma + f_rest - base_s);
            }
        }
        bound
    }
}

fn subsets_of(s: &Subset) -> Vec<Subset> {
    let elems = s.to_vec();
    (0u64..1 << elems.len())
        .map(|m| elems.iter().enumerate().filter(|(b, _)| m >> b & 1 == 1).map(|(_, &e)| e).collect())
        .collect()
}

/// Draws up to `count` distinct non-empty subsets of cardinality `<= k`
/// and rewards each one as far as the ratio bound `gamma_target` allows.
pub fn perturb(base: &dyn SetFunction, k: usize, count: usize, gamma_target: f64, seed: u64) -> Result<RewardOverlay> {
    if !(gamma_target > 0.0 && gamma_target <= 1.0) {
        return Err(Error::InvalidArgument(format!("gamma_target {gamma_target} outside (0, 1]")));
    }
    let n = base.ground_size();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={n}")));
    }
    let mut overlay = RewardOverlay::new(k, gamma_target);
    if count == 0 {
        return Ok(overlay);
    }

    let scale = REWARD_SCALE * base.value(&Subset::full(k));
    if !(scale > 0.0) {
        return Ok(overlay);
    }

    let mut rng = seeded_rng(seed);
    let weights: Vec<f64> = (1..=k).map(|r| binomial(n, r)).collect();
    let total: f64 = weights.iter().sum();
    let target = (count as f64).min(total) as usize;
    let max_draws = 20 * target + 1000;

    let mut builder = Builder { n, gamma: gamma_target, store: Store::new(base) };
    let mut seen: std::collections::HashSet<Subset> = std::collections::HashSet::new();
    let mut draws = 0;
    while seen.len() < target && draws < max_draws {
        draws += 1;
        let mut u = rng.gen::<f64>() * total;
        let mut size = k;
        for (idx, w) in weights.iter().enumerate() {
            if u < *w {
                size = idx + 1;
                break;
            }
            u -= w;
        }
        let s: Subset = sample(&mut rng, n, size).into_iter().collect();
        if !seen.insert(s) {
            continue;
        }
        let mut candidate = scale * (1.0 - rng.gen::<f64>());
        let limit = builder.admissible_reward(&s, &mut rng);
        for _ in 0..=MAX_HALVINGS {
            if candidate <= limit - ACCEPT_SLACK {
                overlay.insert(s, candidate)?;
                builder.store.set_reward(&s, candidate);
                break;
            }
            candidate *= 0.5;
        }
    }
    Ok(overlay)
}
