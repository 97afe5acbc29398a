//! Combinatorial-auction instances built from market-basket transactions.
//!
//! Package utility is `f(S) = Σ_{i∈S} w_i + Σ_{i<j, i,j∈S} r_ij`. Individual
//! utilities are drawn uniformly from `[1, 2]`; mutual utilities are an affine
//! image of pair co-occurrence counts, sending the smallest count to the low
//! end of the reward interval and the largest to the high end.

use std::collections::HashMap;
use std::io::Read;

use rand::Rng;

use super::seeded_rng;
use crate::error::{Error, Result};
use crate::function::SetFunction;
use crate::subset::{Subset, MAX_ELEMENTS};

pub const DEFAULT_REWARD_INTERVAL: (f64, f64) = (-0.09, 0.01);
pub const DEFAULT_UTILITY_INTERVAL: (f64, f64) = (1.0, 2.0);

#[derive(Debug, Clone, PartialEq)]
pub struct CaInstance {
    w: Vec<f64>,
    r: Vec<Vec<f64>>,
}

impl CaInstance {
    pub fn from_parts(w: Vec<f64>, r: Vec<Vec<f64>>) -> Result<Self> {
        let n = w.len();
        if n == 0 || r.len() != n || r.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument("CA needs n utilities and an n × n mutual matrix".into()));
        }
        for i in 0..n {
            if r[i][i] != 0.0 {
                return Err(Error::InvalidArgument(format!("CA diagonal r[{i}][{i}] must be 0")));
            }
            for j in 0..i {
                if r[i][j] != r[j][i] {
                    return Err(Error::InvalidArgument(format!("CA mutual matrix not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(CaInstance { w, r })
    }

    pub fn utilities(&self) -> &[f64] {
        &self.w
    }

    pub fn mutual(&self) -> &[Vec<f64>] {
        &self.r
    }
}

impl SetFunction for CaInstance {
    fn ground_size(&self) -> usize {
        self.w.len()
    }

    fn value(&self, s: &Subset) -> f64 {
        let elems = s.to_vec();
        let mut total = 0.0;
        for (a, &i) in elems.iter().enumerate() {
            total += self.w[i];
            for &j in &elems[..a] {
                total += self.r[i][j];
            }
        }
        total
    }
}

#[derive(Debug, Clone)]
pub struct CaOptions {
    /// Ground-set size. `None` means "number of distinct items seen"; a larger
    /// value pads with items that never occur.
    pub n: Option<usize>,
    /// Fixed item catalog; unknown items become an error.
    pub catalog: Option<Vec<String>>,
    pub seed: u64,
    pub reward_interval: (f64, f64),
    pub utility_interval: (f64, f64),
}

impl Default for CaOptions {
    fn default() -> Self {
        CaOptions {
            n: None,
            catalog: None,
            seed: 0,
            reward_interval: DEFAULT_REWARD_INTERVAL,
            utility_interval: DEFAULT_UTILITY_INTERVAL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CaIngest {
    pub instance: CaInstance,
    /// Item names, indexed by element.
    pub items: Vec<String>,
    pub transactions: usize,
    /// Pair co-occurrence counts (symmetric, zero diagonal).
    pub counts: Vec<Vec<u64>>,
}

/// Reads comma-separated transactions (one per line, quoted or bare names).
pub fn ingest_ca<R: Read>(reader: R, options: &CaOptions) -> Result<CaIngest> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(rec.iter().map(str::to_owned).collect::<Vec<_>>());
    }
    ingest_ca_rows(&rows, options)
}

pub fn ingest_ca_rows(rows: &[Vec<String>], options: &CaOptions) -> Result<CaIngest> {
    let (lo, hi) = options.reward_interval;
    if !(lo <= hi) {
        return Err(Error::InvalidArgument(format!("reward interval [{lo}, {hi}] is empty")));
    }
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut items: Vec<String> = Vec::new();
    if let Some(catalog) = &options.catalog {
        for name in catalog {
            if index.insert(name.clone(), items.len()).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate catalog item {name:?}")));
            }
            items.push(name.clone());
        }
    }

    let mut baskets: Vec<Vec<usize>> = Vec::new();
    for row in rows {
        let mut basket: Vec<usize> = Vec::new();
        for name in row.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
            let id = match index.get(name) {
                Some(&id) => id,
                None if options.catalog.is_some() => {
                    return Err(Error::Parse(format!("unknown item {name:?} not in catalog")))
                }
                None => {
                    let id = items.len();
                    index.insert(name.to_owned(), id);
                    items.push(name.to_owned());
                    id
                }
            };
            if !basket.contains(&id) {
                basket.push(id);
            }
        }
        if !basket.is_empty() {
            baskets.push(basket);
        }
    }
    if baskets.is_empty() {
        return Err(Error::InvalidArgument("transaction stream is empty".into()));
    }

    let n = match options.n {
        Some(n) if n < items.len() => {
            return Err(Error::InvalidArgument(format!("{} distinct items exceed n = {n}", items.len())))
        }
        Some(n) => n,
        None => items.len(),
    };
    if n == 0 || n > MAX_ELEMENTS {
        return Err(Error::InvalidArgument(format!("CA ground set size {n} unsupported")));
    }
    while items.len() < n {
        items.push(format!("item{}", items.len() + 1));
    }

    let mut counts = vec![vec![0u64; n]; n];
    for basket in &baskets {
        for (a, &i) in basket.iter().enumerate() {
            for &j in &basket[..a] {
                counts[i][j] += 1;
                counts[j][i] += 1;
            }
        }
    }
    let pairs = (0..n).flat_map(|i| (0..i).map(move |j| (i, j)));
    let (cmin, cmax) =
        pairs.clone().map(|(i, j)| counts[i][j]).fold((u64::MAX, 0u64), |(a, b), c| (a.min(c), b.max(c)));

    let map = |c: u64| -> f64 {
        if cmax == cmin {
            // Degenerate spread: any co-purchase maps to the top of the interval.
            if cmax > 0 {
                hi
            } else {
                lo
            }
        } else {
            lo + (hi - lo) * (c - cmin) as f64 / (cmax - cmin) as f64
        }
    };
    let mut r = vec![vec![0.0; n]; n];
    for (i, j) in pairs {
        let v = map(counts[i][j]);
        r[i][j] = v;
        r[j][i] = v;
    }

    let mut rng = seeded_rng(options.seed);
    let (wlo, whi) = options.utility_interval;
    let w: Vec<f64> = (0..n).map(|_| wlo + (whi - wlo) * rng.gen::<f64>()).collect();

    Ok(CaIngest { instance: CaInstance::from_parts(w, r)?, items, transactions: baskets.len(), counts })
}

/// Closed-form lower bound on the submodular ratio of a CA instance for
/// packages of at most `k` items: for every item, the smallest achievable
/// marginal (most negative `k-1` mutual utilities) over the largest
/// (most positive `k-1`).
pub fn ca_gamma_lower(inst: &CaInstance, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidArgument("ca_gamma_lower needs k >= 2".into()));
    }
    let n = inst.w.len();
    let mut gamma = f64::INFINITY;
    for i in 0..n {
        let mut neg: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| inst.r[i][j]).filter(|&v| v < 0.0).collect();
        let mut pos: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| inst.r[i][j]).filter(|&v| v > 0.0).collect();
        neg.sort_by(f64::total_cmp);
        pos.sort_by(|a, b| b.total_cmp(a));
        let lower: f64 = neg.iter().take(k - 1).sum();
        let upper: f64 = pos.iter().take(k - 1).sum();
        let num = inst.w[i] + lower;
        let den = inst.w[i] + upper;
        if den <= 0.0 || num <= 0.0 {
            return Err(Error::Positivity { item: i });
        }
        gamma = gamma.min(num / den);
    }
    Ok(gamma.min(1.0))
}
