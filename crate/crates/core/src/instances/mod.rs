//! Benchmark instance families, the reward overlay and ratio bounds.

mod ca;
mod cov;
mod inf;
mod io;
mod loc;
mod perturb;
mod ratio;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use ca::{ca_gamma_lower, ingest_ca, ingest_ca_rows, CaIngest, CaInstance, CaOptions, DEFAULT_REWARD_INTERVAL};
pub use cov::{CovInstance, COVER_PROBABILITY};
pub use inf::{InfInstance, EDGE_PROBABILITY};
pub use io::{InstanceFile, OverlayEntry, Payload, FORMAT_TAG};
pub use loc::LocInstance;
pub use perturb::{perturb, RewardOverlay, EXHAUSTIVE_MAX_N, MAX_HALVINGS, REWARD_SCALE, SAMPLED_SUPERSETS};
pub(crate) use ratio::{fold_ratio, tabulate};
pub use ratio::{ratio_bounds_bruteforce, RatioBounds, RATIO_MAX_N};

use crate::error::{Error, Result};
use crate::function::{EvaluatedFunction, GroundSet, SetFunction};
use crate::subset::Subset;

/// Perturbed subsets per unit of `k` (the benchmark protocol uses `1000k`).
pub const PERTURB_PER_K: usize = 1000;

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `f(S) = Σ_{i∈S} w_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Modular {
    weights: Vec<f64>,
}

impl Modular {
    pub fn new(weights: Vec<f64>) -> Self {
        Modular { weights }
    }
}

impl SetFunction for Modular {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, s: &Subset) -> f64 {
        s.iter().map(|i| self.weights[i]).sum()
    }
}

/// Explicit value table indexed by subset bitmask (`n <= 20`).
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    n: usize,
    values: Vec<f64>,
}

impl Tabulated {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > 20 || values.len() != 1 << n {
            return Err(Error::InvalidArgument(format!("table for n = {n} needs 2^n entries")));
        }
        if values[0] != 0.0 {
            return Err(Error::InvalidArgument("f(∅) must be 0".into()));
        }
        Ok(Tabulated { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(&Subset) -> f64) -> Result<Self> {
        Self::new(n, (0u64..1 << n).map(|m| f(&Subset::from_mask(m))).collect())
    }
}

impl SetFunction for Tabulated {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, s: &Subset) -> f64 {
        self.values[s.low_mask() as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum InstanceKind {
    Loc,
    Cov,
    Inf,
    Ca,
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstanceKind::Loc => "LOC",
            InstanceKind::Cov => "COV",
            InstanceKind::Inf => "INF",
            InstanceKind::Ca => "CA",
        })
    }
}

impl FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "loc" => Ok(InstanceKind::Loc),
            "cov" => Ok(InstanceKind::Cov),
            "inf" => Ok(InstanceKind::Inf),
            "ca" => Ok(InstanceKind::Ca),
            other => Err(Error::Parse(format!("unknown instance type {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Loc(LocInstance),
    Cov(CovInstance),
    Inf(InfInstance),
    Ca(CaInstance),
}

impl Instance {
    /// Generates a LOC/COV/INF instance; CA instances come from ingestion.
    pub fn generate(kind: InstanceKind, n: usize, m: usize, seed: u64) -> Result<Self> {
        match kind {
            InstanceKind::Loc => LocInstance::generate(n, m, seed).map(Instance::Loc),
            InstanceKind::Cov => CovInstance::generate(n, m, seed).map(Instance::Cov),
            InstanceKind::Inf => InfInstance::generate(n, m, seed).map(Instance::Inf),
            InstanceKind::Ca => Err(Error::InvalidArgument("CA instances are ingested, not generated".into())),
        }
    }

    pub fn kind(&self) -> InstanceKind {
        match self {
            Instance::Loc(_) => InstanceKind::Loc,
            Instance::Cov(_) => InstanceKind::Cov,
            Instance::Inf(_) => InstanceKind::Inf,
            Instance::Ca(_) => InstanceKind::Ca,
        }
    }

    fn inner(&self) -> &dyn SetFunction {
        match self {
            Instance::Loc(i) => i,
            Instance::Cov(i) => i,
            Instance::Inf(i) => i,
            Instance::Ca(i) => i,
        }
    }
}

impl SetFunction for Instance {
    fn ground_size(&self) -> usize {
        self.inner().ground_size()
    }

    fn value(&self, s: &Subset) -> f64 {
        self.inner().value(s)
    }
}

/// An instance together with its budget, declared ratio bound and overlay.
#[derive(Debug, Clone)]
pub struct Problem {
    pub id: String,
    pub kind: InstanceKind,
    pub m: usize,
    pub k: usize,
    pub gamma_lower: f64,
    pub seed: u64,
    pub instance: Arc<Instance>,
    pub overlay: Option<Arc<RewardOverlay>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbSpec {
    pub count: usize,
    pub gamma: f64,
}

impl Problem {
    /// Generates an instance (`m` defaults to `n + 1`) and, if requested,
    /// perturbs it; the declared `γ̲` is the perturbation target or 1.
    pub fn generate(
        kind: InstanceKind,
        n: usize,
        m: Option<usize>,
        k: usize,
        seed: u64,
        perturbation: Option<PerturbSpec>,
    ) -> Result<Self> {
        GroundSet::new(n, k)?;
        let m = m.unwrap_or(n + 1);
        let instance = Instance::generate(kind, n, m, seed)?;
        let (overlay, gamma_lower) = match perturbation {
            Some(p) => {
                let ov = perturb(&instance, k, p.count, p.gamma, perturb_seed(seed))?;
                (Some(Arc::new(ov)), p.gamma)
            }
            None => (None, 1.0),
        };
        Ok(Problem {
            id: problem_id(kind, n, k, seed, overlay.is_some().then_some(gamma_lower)),
            kind,
            m,
            k,
            gamma_lower,
            seed,
            instance: Arc::new(instance),
            overlay,
        })
    }

    pub fn n(&self) -> usize {
        self.instance.ground_size()
    }

    pub fn ground_set(&self) -> GroundSet {
        GroundSet::new(self.n(), self.k).expect("validated at construction")
    }

    /// A fresh oracle (own counter and memo) over this problem.
    pub fn function(&self) -> EvaluatedFunction {
        let base: Arc<dyn SetFunction> = self.instance.clone();
        let f = EvaluatedFunction::new(base, self.gamma_lower);
        match &self.overlay {
            Some(ov) => f.with_overlay(Arc::clone(ov)),
            None => f,
        }
    }
}

/// `LOC-n12-k3-s4`, with a `-g0.8` suffix for perturbed instances.
pub fn problem_id(kind: InstanceKind, n: usize, k: usize, seed: u64, gamma: Option<f64>) -> String {
    match gamma {
        Some(g) => format!("{kind}-n{n}-k{k}-s{seed}-g{g}"),
        None => format!("{kind}-n{n}-k{k}-s{seed}"),
    }
}

/// Seed for the overlay stream, kept apart from the generator stream.
pub fn perturb_seed(seed: u64) -> u64 {
    seed ^ 0x5DEE_CE66_D1CE_4E5B
}
