//! Reduced max-min binary programs and their exact branch-and-bound solver.
//!
//! A model maximizes `z` subject to `z <= row_r(y)` for every row, the
//! cardinality budget `|y| <= k` and variable fixings `S⁰` (forced out) and
//! `S¹` (forced in). A row induced by a feasible solution `S` reads
//!
//! ```text
//! row(y) = f(S) + f(j|S) y_j + (1/γ) Σ_{i ∉ S ∪ {j}} f(i|S) y_i
//! ```
//!
//! with `j` the largest-marginal element outside `S`. In SFM mode every
//! coefficient is the plain marginal.

use std::borrow::Cow;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::function::{EvaluatedFunction, TOL};
use crate::subset::Subset;

/// Slack used by the subsolver's own pruning test.
pub const PRUNE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CutMode {
    /// Unscaled marginals (exactly submodular functions).
    Sfm,
    /// Pinned `j` plus `1/γ`-scaled remaining marginals.
    Asfm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutRow {
    source: Subset,
    j_star: Option<usize>,
    base: f64,
    coeff: Vec<f64>,
}

impl CutRow {
    /// The row induced by `source`. Costs at most `n + 1` evaluations.
    pub fn generate(f: &EvaluatedFunction, source: Subset, mode: CutMode) -> Self {
        let n = f.n();
        let base = f.evaluate(&source);
        let marg = f.marginals(&source);
        let mut j_star: Option<usize> = None;
        for i in (0..n).filter(|&i| !source.contains(i)) {
            if j_star.is_none_or(|j| marg[i] > marg[j]) {
                j_star = Some(i);
            }
        }
        let scale = match mode {
            CutMode::Sfm => 1.0,
            CutMode::Asfm => 1.0 / f.gamma_lower(),
        };
        let coeff = (0..n)
            .map(|i| {
                if source.contains(i) {
                    0.0
                } else if Some(i) == j_star {
                    marg[i].max(0.0)
                } else {
                    scale * marg[i].max(0.0)
                }
            })
            .collect();
        CutRow { source, j_star, base, coeff }
    }

    /// A row from explicit data; coefficients on `source` are ignored.
    pub fn new(source: Subset, j_star: Option<usize>, base: f64, coeff: Vec<f64>) -> Result<Self> {
        let n = coeff.len();
        if source.max_element().is_some_and(|m| m >= n) {
            return Err(Error::InvalidArgument("row source outside the ground set".into()));
        }
        if let Some(j) = j_star {
            if j >= n || source.contains(j) {
                return Err(Error::InvalidArgument(format!("pinned element {} invalid", j + 1)));
            }
        }
        if !base.is_finite() || coeff.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidArgument("row data must be finite with non-negative coefficients".into()));
        }
        let mut coeff = coeff;
        for i in source.iter() {
            coeff[i] = 0.0;
        }
        Ok(CutRow { source, j_star, base, coeff })
    }

    pub fn source(&self) -> &Subset {
        &self.source
    }

    pub fn j_star(&self) -> Option<usize> {
        self.j_star
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn coeff(&self) -> &[f64] {
        &self.coeff
    }

    pub fn n(&self) -> usize {
        self.coeff.len()
    }

    pub fn value(&self, y: &Subset) -> f64 {
        row_value(self, y)
    }
}

/// `base + Σ_{i ∈ y∖source} coeff[i]`.
pub fn row_value(row: &CutRow, y: &Subset) -> f64 {
    row.base + y.difference(&row.source).iter().map(|i| row.coeff[i]).sum::<f64>()
}

#[derive(Debug, Clone)]
pub struct ReducedBipModel<'a> {
    n: usize,
    k: usize,
    rows: Cow<'a, [CutRow]>,
    fixed_zero: Subset,
    fixed_one: Subset,
}

impl<'a> ReducedBipModel<'a> {
    pub fn new(
        n: usize,
        k: usize,
        rows: impl Into<Cow<'a, [CutRow]>>,
        fixed_zero: Subset,
        fixed_one: Subset,
    ) -> Result<Self> {
        let rows = rows.into();
        if rows.is_empty() {
            return Err(Error::InvalidArgument("model needs at least one row".into()));
        }
        if rows.iter().any(|r| r.n() != n) {
            return Err(Error::InvalidArgument(format!("every row must have {n} coefficients")));
        }
        if k > n || fixed_zero.union(&fixed_one).max_element().is_some_and(|m| m >= n) {
            return Err(Error::InvalidArgument("budget or fixings outside the ground set".into()));
        }
        if !fixed_zero.is_disjoint(&fixed_one) {
            return Err(Error::InvalidArgument("fixings overlap".into()));
        }
        if fixed_one.len() > k {
            return Err(Error::Infeasible(format!("{} elements fixed to one with k = {k}", fixed_one.len())));
        }
        Ok(ReducedBipModel { n, k, rows, fixed_zero, fixed_one })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> &[CutRow] {
        &self.rows
    }

    pub fn fixed_zero(&self) -> &Subset {
        &self.fixed_zero
    }

    pub fn fixed_one(&self) -> &Subset {
        &self.fixed_one
    }

    pub fn is_feasible(&self, y: &Subset) -> bool {
        y.len() <= self.k
            && self.fixed_one.is_subset_of(y)
            && y.is_disjoint(&self.fixed_zero)
            && y.max_element().is_none_or(|m| m < self.n)
    }

    /// `min_r row_r(y)`.
    pub fn objective(&self, y: &Subset) -> f64 {
        self.rows.iter().map(|r| r.value(y)).fold(f64::INFINITY, f64::min)
    }

    /// Text dump: a header, the fixings, then one row per line as
    /// `base i:coeff ...` with 1-based indices and zero entries omitted.
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        let list = |s: &Subset| s.iter().map(|e| (e + 1).to_string()).collect::<Vec<_>>().join(" ");
        writeln!(w, "n {} k {} rows {}", self.n, self.k, self.rows.len())?;
        writeln!(w, "fix0 {}", list(&self.fixed_zero))?;
        writeln!(w, "fix1 {}", list(&self.fixed_one))?;
        for row in self.rows.iter() {
            write!(w, "{:?}", row.base)?;
            for (i, c) in row.coeff.iter().enumerate() {
                if *c != 0.0 {
                    write!(w, " {}:{:?}", i + 1, c)?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipSolution {
    /// The selected elements `{i : y_i = 1}`.
    pub y: Subset,
    pub z: f64,
    /// Rows whose value at `y` is within `TOL` of `z`.
    pub tight_rows: Vec<usize>,
    /// Branch-and-bound nodes visited.
    pub nodes: u64,
}

/// Solves the model exactly by depth-first branch-and-bound.
///
/// `incumbent_hint` is a value the caller already knows to be attainable; it
/// only tightens pruning. If the hint turns out to exceed the optimum the
/// model is solved again without it.
pub fn solve(model: &ReducedBipModel<'_>, incumbent_hint: Option<f64>) -> Result<BipSolution> {
    let mut search = Search::new(model);
    let mut found = search.run(incumbent_hint.filter(|h| h.is_finite()).map(|h| h - PRUNE_EPS));
    if found.is_none() {
        found = search.run(None);
    }
    let y = found.expect("an unhinted search always reaches a leaf");
    let values: Vec<f64> = model.rows.iter().map(|r| r.value(&y)).collect();
    let z = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut tight_rows: Vec<usize> = (0..values.len()).filter(|&r| values[r] <= z + TOL).collect();
    if tight_rows.is_empty() {
        let best = (0..values.len()).max_by(|&a, &b| values[a].total_cmp(&values[b]).then(b.cmp(&a))).unwrap();
        tight_rows.push(best);
    }
    Ok(BipSolution { y, z, tight_rows, nodes: search.nodes })
}

struct Search {
    /// Free variables in branching order.
    vars: Vec<usize>,
    rows: usize,
    /// `coef[r * F + d]`: coefficient of row `r` on variable `vars[d]`.
    coef: Vec<f64>,
    /// Per row, positions sorted by descending coefficient.
    sorted: Vec<u16>,
    /// Row values with only the fixed-one elements selected.
    start: Vec<f64>,
    budget: usize,
    fixed_one: Subset,
    nodes: u64,
    // per-run state
    partial: Vec<Vec<f64>>,
    chosen: Vec<usize>,
    level: f64,
    best: Option<Subset>,
    hot: usize,
}

impl Search {
    fn new(model: &ReducedBipModel<'_>) -> Self {
        let n = model.n;
        let rows = model.rows.len();
        let free = Subset::full(n).difference(&model.fixed_zero.union(&model.fixed_one));
        let best_coef = |i: usize| model.rows.iter().map(|r| r.coeff[i]).fold(0.0, f64::max);
        let mut vars: Vec<(usize, f64)> = free.iter().map(|i| (i, best_coef(i))).collect();
        vars.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let vars: Vec<usize> = vars.into_iter().map(|(i, _)| i).collect();
        let width = vars.len();

        let mut coef = vec![0.0; rows * width];
        let mut sorted = Vec::with_capacity(rows * width);
        let mut start = Vec::with_capacity(rows);
        for (r, row) in model.rows.iter().enumerate() {
            let line = &mut coef[r * width..(r + 1) * width];
            for (d, &i) in vars.iter().enumerate() {
                if !row.source.contains(i) {
                    line[d] = row.coeff[i];
                }
            }
            let mut order: Vec<u16> = (0..width as u16).collect();
            order.sort_by(|&a, &b| line[b as usize].total_cmp(&line[a as usize]).then(a.cmp(&b)));
            sorted.extend(order);
            start.push(row.value(&model.fixed_one));
        }
        Search {
            budget: (model.k - model.fixed_one.len()).min(width),
            vars,
            rows,
            coef,
            sorted,
            start,
            fixed_one: model.fixed_one,
            nodes: 0,
            partial: Vec::new(),
            chosen: Vec::new(),
            level: f64::NEG_INFINITY,
            best: None,
            hot: 0,
        }
    }

    fn run(&mut self, level: Option<f64>) -> Option<Subset> {
        self.level = level.unwrap_or(f64::NEG_INFINITY);
        self.best = None;
        self.hot = 0;
        self.chosen.clear();
        self.partial = vec![self.start.clone(); self.budget + 1];
        self.dfs(0);
        self.best
    }

    fn width(&self) -> usize {
        self.vars.len()
    }

    /// Sum of the `m` largest coefficients of row `r` at positions `>= d`.
    fn top(&self, r: usize, d: usize, m: usize) -> f64 {
        let w = self.width();
        let line = &self.coef[r * w..(r + 1) * w];
        let mut sum = 0.0;
        let mut taken = 0;
        for &p in &self.sorted[r * w..(r + 1) * w] {
            if taken == m {
                break;
            }
            if p as usize >= d {
                sum += line[p as usize];
                taken += 1;
            }
        }
        sum
    }

    /// Whether some row's optimistic value is already at or below `level`.
    fn prunable(&mut self, d: usize, m: usize) -> bool {
        let c = self.chosen.len();
        let rows = self.rows;
        let hot = self.hot;
        if self.partial[c][hot] + self.top(hot, d, m) <= self.level {
            return true;
        }
        for r in 0..rows {
            if r != hot && self.partial[c][r] + self.top(r, d, m) <= self.level {
                self.hot = r;
                return true;
            }
        }
        false
    }

    fn dfs(&mut self, d: usize) {
        self.nodes += 1;
        let c = self.chosen.len();
        let m = self.budget - c;
        if m == 0 {
            let value = self.partial[c].iter().copied().fold(f64::INFINITY, f64::min);
            if value > self.level {
                let mut y = self.fixed_one;
                for &p in &self.chosen {
                    y.insert(self.vars[p]);
                }
                self.best = Some(y);
                self.level = value + PRUNE_EPS;
            }
            return;
        }
        if self.prunable(d, m) {
            return;
        }
        let w = self.width();
        for r in 0..self.rows {
            self.partial[c + 1][r] = self.partial[c][r] + self.coef[r * w + d];
        }
        self.chosen.push(d);
        self.dfs(d + 1);
        self.chosen.pop();
        if w - d > m {
            self.dfs(d + 1);
        }
    }
}
