use crate::error::{Error, Result};
use crate::function::{EvaluatedFunction, TOL};
use crate::subset::{submasks, Subset};

pub const RATIO_MAX_N: usize = 15;

/// Denominators at or below this are treated as zero.
pub const ZERO_DENOM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioBounds {
    /// Submodular ratio.
    pub gamma: f64,
    /// Upper bound from single-element extensions.
    pub gamma_bar: f64,
}

/// Folds `num / den` into a running minimum with the `0/0 = 1` convention;
/// a positive numerator over a zero denominator imposes nothing.
#[inline]
pub(crate) fn fold_ratio(acc: f64, num: f64, den: f64) -> f64 {
    if den > ZERO_DENOM {
        acc.min(num / den)
    } else if num.abs() <= ZERO_DENOM {
        acc.min(1.0)
    } else {
        acc
    }
}

/// Tabulates `f` over all `2^n` subsets.
pub(crate) fn tabulate(f: &EvaluatedFunction) -> Vec<f64> {
    let n = f.n();
    (0u64..1 << n).map(|m| f.evaluate(&Subset::from_mask(m))).collect()
}

/// Exact `γ` and `γ̄` by enumeration.
///
/// `γ` is computed in its nested-pair form `min f({i}|S) / f({i}|T)` over
/// `S ⊆ T`, `i ∉ T`, which coincides with the pairwise definition over all
/// `(S, T)` for non-decreasing functions; `γ̄` restricts to `T = S ∪ {j}`.
pub fn ratio_bounds_bruteforce(f: &EvaluatedFunction) -> Result<RatioBounds> {
    let n = f.n();
    if n > RATIO_MAX_N {
        return Err(Error::InvalidArgument(format!("ratio enumeration needs n <= {RATIO_MAX_N}, got {n}")));
    }
    let table = tabulate(f);
    let full = (1u64 << n) - 1;

    for t in 0..=full {
        for i in 0..n {
            if t >> i & 1 == 0 {
                let g = table[(t | 1 << i) as usize] - table[t as usize];
                if g < -TOL {
                    return Err(Error::NonMonotone {
                        element: i + 1,
                        subset: Subset::from_mask(t).to_string(),
                        value: g,
                    });
                }
            }
        }
    }

    let mut gamma: f64 = 1.0;
    for t in 0..=full {
        let ft = table[t as usize];
        for i in (0..n).filter(|&i| t >> i & 1 == 0) {
            let den = table[(t | 1 << i) as usize] - ft;
            for s in submasks(t) {
                let num = table[(s | 1 << i) as usize] - table[s as usize];
                gamma = fold_ratio(gamma, num, den);
            }
        }
    }

    let mut gamma_bar: f64 = 1.0;
    for s in 0..=full {
        let fs = table[s as usize];
        for i in (0..n).filter(|&i| s >> i & 1 == 0) {
            let num = table[(s | 1 << i) as usize] - fs;
            for j in (0..n).filter(|&j| j != i && s >> j & 1 == 0) {
                let sj = s | 1 << j;
                let den = table[(sj | 1 << i) as usize] - table[sj as usize];
                gamma_bar = fold_ratio(gamma_bar, num, den);
            }
        }
    }

    Ok(RatioBounds { gamma, gamma_bar })
}
