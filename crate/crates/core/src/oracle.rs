//! Brute-force oracles: exact optima, the pairwise submodular ratio and
//! exhaustive checks of the ratio-based characterizations and cut validity.
//!
//! Enumeration is lexicographic in subset bitmasks, so the first reported
//! violation is reproducible.

use std::fmt;

use crate::bip::ReducedBipModel;
use crate::error::{Error, Result};
use crate::function::{EvaluatedFunction, GroundSet, TOL};
use crate::instances::{fold_ratio, tabulate};
use crate::subset::{count_up_to, submasks, subsets_up_to, Subset};

/// Largest enumeration `brute_force_opt` accepts.
pub const ENUMERATION_GUARD: f64 = 1e7;

/// Largest ground set for the exhaustive property checks.
pub const CHECK_MAX_N: usize = 10;

/// Objective ties within this tolerance count as co-optimal.
pub const TIE_TOL: f64 = 1e-12;

/// Slack added to `f(T_y)` when testing that `X` excludes larger values.
pub const EXCLUSION_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub optimum: f64,
    pub optimizers: Vec<Subset>,
    pub subsets_enumerated: u64,
}

/// Every subset with `|S| <= k`, keeping the maximum and all its attainers.
pub fn brute_force_opt(f: &EvaluatedFunction, gs: &GroundSet) -> Result<OracleReport> {
    let (n, k) = (gs.n(), gs.k());
    let count = count_up_to(n, k);
    if n > 63 || count > ENUMERATION_GUARD {
        return Err(Error::GuardExceeded { count, limit: ENUMERATION_GUARD });
    }
    let mut optimum = f64::NEG_INFINITY;
    let mut optimizers: Vec<(Subset, f64)> = Vec::new();
    let mut seen = 0u64;
    for s in subsets_up_to(n, k) {
        seen += 1;
        let v = f.evaluate(&s);
        if v > optimum {
            optimum = v;
        }
        if v >= optimum - TIE_TOL {
            optimizers.push((s, v));
        }
    }
    let optimizers = optimizers.into_iter().filter(|&(_, v)| v >= optimum - TIE_TOL).map(|(s, _)| s).collect();
    Ok(OracleReport { optimum, optimizers, subsets_enumerated: seen })
}

/// Exhaustive max-min over all feasible `y` of a reduced model (`n <= 20`).
pub fn brute_force_bip(model: &ReducedBipModel<'_>) -> Result<(f64, Vec<Subset>)> {
    let n = model.n();
    if n > 20 {
        return Err(Error::GuardExceeded { count: 2f64.powi(n as i32), limit: 2f64.powi(20) });
    }
    let mut best = f64::NEG_INFINITY;
    let mut values = Vec::new();
    for y in subsets_up_to(n, model.k()).filter(|y| model.is_feasible(y)) {
        let v = model.objective(&y);
        best = best.max(v);
        values.push((y, v));
    }
    let argmax = values.into_iter().filter(|&(_, v)| v >= best - TIE_TOL).map(|(y, _)| y).collect();
    Ok((best, argmax))
}

fn check_size(f: &EvaluatedFunction) -> Result<usize> {
    let n = f.n();
    if n > CHECK_MAX_N {
        return Err(Error::InvalidArgument(format!("exhaustive checks need n <= {CHECK_MAX_N}, got {n}")));
    }
    Ok(n)
}

/// `γ = min_{S,T} (f(S) - f(S∩T)) / (f(S∪T) - f(T))` over all pairs, with
/// `0/0 = 1` and positive-over-zero ratios ignored.
pub fn gamma_pairwise(f: &EvaluatedFunction) -> Result<f64> {
    let n = check_size(f)?;
    let t = tabulate(f);
    let full = 1u64 << n;
    let mut gamma: f64 = 1.0;
    for s in 0..full {
        for u in 0..full {
            let num = t[s as usize] - t[(s & u) as usize];
            let den = t[(s | u) as usize] - t[u as usize];
            gamma = fold_ratio(gamma, num, den);
        }
    }
    Ok(gamma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub condition: &'static str,
    pub detail: String,
    /// The side that should be the larger one fell short by this much.
    pub excess: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {} by {:.3e}", self.condition, self.detail, self.excess)
    }
}

struct Table {
    n: usize,
    v: Vec<f64>,
}

impl Table {
    fn new(f: &EvaluatedFunction) -> Result<Self> {
        let n = check_size(f)?;
        Ok(Table { n, v: tabulate(f) })
    }

    #[inline]
    fn f(&self, s: u64) -> f64 {
        self.v[s as usize]
    }

    #[inline]
    fn gain(&self, i: usize, s: u64) -> f64 {
        self.v[(s | 1 << i) as usize] - self.v[s as usize]
    }

    fn full(&self) -> u64 {
        (1u64 << self.n) - 1
    }

    fn outside(&self, s: u64) -> impl Iterator<Item = usize> {
        (0..self.n).filter(move |&i| s >> i & 1 == 0)
    }
}

fn show(mask: u64) -> String {
    Subset::from_mask(mask).to_string()
}

/// Pushes a violation when `big >= small` fails beyond `TOL`.
fn expect_ge(out: &mut Vec<Violation>, condition: &'static str, big: f64, small: f64, detail: impl FnOnce() -> String) {
    if big < small - TOL {
        out.push(Violation { condition, detail: detail(), excess: small - big });
    }
}

/// Right-hand side of the single-pair upper bound
/// `f(S) + f(j1|S) + (1/γ̄) f(j2|S) + (1/γ) Σ_{rest of T∖S} f(j|S)`.
/// `j1`/`j2` are absent when `T ∖ S` has fewer elements.
fn pair_bound(tab: &Table, s: u64, t: u64, j1: Option<usize>, j2: Option<usize>, gamma: f64, gamma_bar: f64) -> f64 {
    let mut rhs = tab.f(s);
    for j in tab.outside(s).filter(|&j| t >> j & 1 == 1) {
        let g = tab.gain(j, s);
        rhs += if Some(j) == j1 {
            g
        } else if Some(j) == j2 {
            g / gamma_bar
        } else {
            g / gamma
        };
    }
    rhs
}

/// Ordered choices of `(j1, j2)` from `T ∖ S`, with `None` standing in when
/// fewer than two elements are available.
fn pairs(tab: &Table, s: u64, t: u64) -> Vec<(Option<usize>, Option<usize>)> {
    let d: Vec<usize> = tab.outside(s).filter(|&j| t >> j & 1 == 1).collect();
    match d.len() {
        0 => vec![(None, None)],
        1 => vec![(Some(d[0]), None)],
        _ => {
            let mut out = Vec::with_capacity(d.len() * (d.len() - 1));
            for &a in &d {
                for &b in &d {
                    if a != b {
                        out.push((Some(a), Some(b)));
                    }
                }
            }
            out
        }
    }
}

fn cond_i(tab: &Table, gamma: f64, out: &mut Vec<Violation>, name: &'static str) {
    let full = tab.full();
    for a in 0..=full {
        for b in 0..=full {
            let lhs = tab.f(a) - tab.f(a & b);
            let rhs = gamma * (tab.f(a | b) - tab.f(b));
            expect_ge(out, name, lhs, rhs, || format!("A = {}, B = {}", show(a), show(b)));
        }
    }
}

fn cond_ii(tab: &Table, gamma: f64, signed: bool, out: &mut Vec<Violation>, name: &'static str) {
    for t in 0..=tab.full() {
        for i in tab.outside(t) {
            let gt = tab.gain(i, t);
            if signed {
                expect_ge(out, name, gt, 0.0, || format!("f({{{}}} | {}) < 0", i + 1, show(t)));
            }
            for s in submasks(t) {
                let gs = tab.gain(i, s);
                expect_ge(out, name, gs, gamma * gt, || format!("i = {}, S = {}, T = {}", i + 1, show(s), show(t)));
            }
        }
    }
}

fn cond_iii(tab: &Table, gamma_bar: f64, out: &mut Vec<Violation>) {
    for s in 0..=tab.full() {
        for i in tab.outside(s) {
            let g = tab.gain(i, s);
            for e in tab.outside(s).filter(|&e| e != i) {
                let ge = tab.gain(i, s | 1 << e);
                expect_ge(out, "iii", g, gamma_bar * ge, || format!("i = {}, e = {}, S = {}", i + 1, e + 1, show(s)));
            }
        }
    }
}

fn cond_iv(
    tab: &Table,
    gamma: f64,
    gamma_bar: f64,
    nested_only: bool,
    correction: bool,
    out: &mut Vec<Violation>,
    name: &'static str,
) {
    let full = tab.full();
    for s in 0..=full {
        for t in 0..=full {
            if nested_only && s & !t != 0 {
                continue;
            }
            let mut minus = 0.0;
            if correction {
                let st = s | t;
                for i in (0..tab.n).filter(|&i| s >> i & 1 == 1 && t >> i & 1 == 0) {
                    minus += gamma * tab.gain(i, st & !(1 << i));
                }
            }
            for (j1, j2) in pairs(tab, s, t) {
                let rhs = pair_bound(tab, s, t, j1, j2, gamma, gamma_bar) - minus;
                expect_ge(out, name, rhs, tab.f(t), || {
                    let lab = |j: Option<usize>| j.map_or("-".to_string(), |j| (j + 1).to_string());
                    format!("S = {}, T = {}, j1 = {}, j2 = {}", show(s), show(t), lab(j1), lab(j2))
                });
            }
        }
    }
}

/// The five ratio conditions (i) to (v) for given `γ <= γ̄`, exhaustively.
pub fn check_prop1(f: &EvaluatedFunction, gamma: f64, gamma_bar: f64) -> Result<Vec<Violation>> {
    let tab = Table::new(f)?;
    let mut out = Vec::new();
    cond_i(&tab, gamma, &mut out, "i");
    cond_ii(&tab, gamma, false, &mut out, "ii");
    cond_iii(&tab, gamma_bar, &mut out);
    cond_iv(&tab, gamma, gamma_bar, false, true, &mut out, "iv");
    cond_iv(&tab, gamma, gamma_bar, true, false, &mut out, "v");
    Ok(out)
}

/// The non-decreasing variants (i*), (ii*) and (iv*).
///
/// (i*) is checked as monotonicity on nested pairs together with the
/// pairwise inequality over all pairs.
pub fn check_prop2(f: &EvaluatedFunction, gamma: f64, gamma_bar: f64) -> Result<Vec<Violation>> {
    let tab = Table::new(f)?;
    let mut out = Vec::new();
    for b in 0..=tab.full() {
        for a in submasks(b) {
            expect_ge(&mut out, "i*", tab.f(b), tab.f(a), || format!("A = {} ⊆ B = {}", show(a), show(b)));
        }
    }
    cond_i(&tab, gamma, &mut out, "i*");
    cond_ii(&tab, gamma, true, &mut out, "ii*");
    cond_iv(&tab, gamma, gamma_bar, false, false, &mut out, "iv*");
    Ok(out)
}

/// Membership in `X` for every `y` with `|y| <= k`: `(f(T_y), y)` must
/// satisfy every inequality, and `(f(T_y) + ε, y)` must violate the one
/// rooted at `S = T_y`.
pub fn check_prop3(f: &EvaluatedFunction, gs: &GroundSet, gamma: f64, gamma_bar: f64) -> Result<Vec<Violation>> {
    let tab = Table::new(f)?;
    let k = gs.k();
    let mut out = Vec::new();
    let sources: Vec<u64> = (0..=tab.full()).filter(|s| s.count_ones() as usize <= k).collect();
    for &y in &sources {
        let eta = tab.f(y);
        for &s in &sources {
            for (j1, j2) in x_pairs(&tab, s) {
                let rhs = x_row(&tab, s, y, j1, j2, gamma, gamma_bar);
                expect_ge(&mut out, "X", rhs, eta, || format!("y = {}, S = {}", show(y), show(s)));
            }
        }
        let witness = x_pairs(&tab, y)
            .into_iter()
            .map(|(j1, j2)| x_row(&tab, y, y, j1, j2, gamma, gamma_bar))
            .fold(f64::INFINITY, f64::min);
        if witness >= eta + EXCLUSION_EPS {
            out.push(Violation {
                condition: "X-exclusion",
                detail: format!("y = {} not cut off at S = T_y", show(y)),
                excess: witness - eta,
            });
        }
    }
    Ok(out)
}

fn x_pairs(tab: &Table, s: u64) -> Vec<(Option<usize>, Option<usize>)> {
    pairs(tab, s, tab.full())
}

/// `f(S) + f(j1|S) y_j1 + (1/γ̄) f(j2|S) y_j2 + (1/γ) Σ f(j|S) y_j`.
fn x_row(tab: &Table, s: u64, y: u64, j1: Option<usize>, j2: Option<usize>, gamma: f64, gamma_bar: f64) -> f64 {
    pair_bound(tab, s, y & !s, j1, j2, gamma, gamma_bar)
}

/// `f(i|S) >= γ̄^q f(i|T)` for all `S ⊆ T`, `i ∉ T`, `q = |T ∖ S|`.
pub fn check_gamma_bar_power(f: &EvaluatedFunction, gamma_bar: f64) -> Result<Vec<Violation>> {
    let tab = Table::new(f)?;
    let mut out = Vec::new();
    for t in 0..=tab.full() {
        for i in tab.outside(t) {
            let gt = tab.gain(i, t);
            for s in submasks(t) {
                let q = (t & !s).count_ones() as i32;
                expect_ge(&mut out, "γ̄^q", tab.gain(i, s), gamma_bar.powi(q) * gt, || {
                    format!("i = {}, S = {}, T = {}", i + 1, show(s), show(t))
                });
            }
        }
    }
    Ok(out)
}
