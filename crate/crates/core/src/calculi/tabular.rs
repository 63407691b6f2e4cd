//! Entry-level arithmetic of the three table calculi.
//!
//! | calculus    | zero | ⊕      | ↓   | ⊖        | normalize     |
//! |-------------|------|--------|-----|----------|---------------|
//! | probability | 0    | a·b    | sum | a/b      | divide by sum |
//! | kappa       | ∞    | a+b    | min | a−b      | subtract min  |
//! | possibility | 0    | a·b    | max | a/b      | divide by max |
//!
//! Removal treats "zero over zero" as zero and rejects a nonzero entry over a
//! zero one.

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::valuation::{Calculus, ClassFlags, TabularValuation};

pub(crate) fn zero_value(c: Calculus) -> f64 {
    match c {
        Calculus::Kappa => f64::INFINITY,
        _ => 0.0,
    }
}

pub(crate) fn is_zero_value(c: Calculus, v: f64) -> bool {
    v == zero_value(c)
}

/// Entry of `ι_s` for a frame of `n` configurations.
pub(crate) fn identity_value(c: Calculus, n: usize) -> f64 {
    match c {
        Calculus::Probability => 1.0 / n as f64,
        Calculus::Kappa => 0.0,
        Calculus::Possibility => 1.0,
        Calculus::Belief => unreachable!("belief is not tabular"),
    }
}

pub(crate) fn is_zero_table(c: Calculus, values: &[f64]) -> bool {
    values.iter().all(|&v| is_zero_value(c, v))
}

fn combine_value(c: Calculus, a: f64, b: f64) -> f64 {
    match c {
        Calculus::Kappa => a + b,
        _ => a * b,
    }
}

fn remove_value(c: Calculus, a: f64, b: f64) -> Option<f64> {
    let zero = zero_value(c);
    if b == zero {
        return (a == zero).then_some(zero);
    }
    Some(match c {
        Calculus::Kappa => a - b,
        _ => a / b,
    })
}

fn fold_init(c: Calculus) -> f64 {
    match c {
        Calculus::Probability => 0.0,
        Calculus::Kappa => f64::INFINITY,
        Calculus::Possibility => f64::NEG_INFINITY,
        Calculus::Belief => unreachable!(),
    }
}

fn fold_value(c: Calculus, acc: f64, v: f64) -> f64 {
    match c {
        Calculus::Probability => acc + v,
        Calculus::Kappa => acc.min(v),
        Calculus::Possibility => acc.max(v),
        Calculus::Belief => unreachable!(),
    }
}

/// Normalizes in place. Returns `false` (leaving the table all-zero) when
/// the table cannot be normalized.
pub(crate) fn normalize_values(c: Calculus, values: &mut [f64]) -> bool {
    let zero = zero_value(c);
    let ok = match c {
        Calculus::Probability => {
            let sum: f64 = values.iter().sum();
            if sum != 0.0 && sum.is_finite() {
                values.iter_mut().for_each(|v| *v /= sum);
                true
            } else {
                false
            }
        }
        Calculus::Kappa => {
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            if min.is_finite() {
                values.iter_mut().for_each(|v| *v -= min);
                true
            } else {
                false
            }
        }
        Calculus::Possibility => {
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max > 0.0 && max.is_finite() {
                values.iter_mut().for_each(|v| *v /= max);
                true
            } else {
                false
            }
        }
        Calculus::Belief => unreachable!(),
    };
    if !ok {
        values.iter_mut().for_each(|v| *v = zero);
    }
    ok
}

pub(crate) fn classify(c: Calculus, values: &[f64], tol: f64) -> ClassFlags {
    let is_zero = is_zero_table(c, values);
    let (is_proper, is_normal, strictly_positive) = match c {
        Calculus::Probability => {
            let sum: f64 = values.iter().sum();
            (
                !is_zero && values.iter().all(|&v| v >= 0.0),
                !is_zero && (sum - 1.0).abs() <= tol,
                values.iter().all(|&v| v > 0.0),
            )
        }
        Calculus::Kappa => {
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            (
                !is_zero,
                !is_zero && min == 0.0,
                values.iter().all(|v| v.is_finite()),
            )
        }
        Calculus::Possibility => {
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (
                !is_zero && values.iter().all(|&v| (0.0..=1.0).contains(&v)),
                !is_zero && (max - 1.0).abs() <= tol,
                values.iter().all(|&v| v > 0.0),
            )
        }
        Calculus::Belief => unreachable!(),
    };
    ClassFlags {
        is_zero,
        is_proper,
        is_normal,
        is_positive: strictly_positive && is_proper && is_normal,
    }
}

pub(crate) fn combine(a: &TabularValuation, b: &TabularValuation) -> Result<TabularValuation> {
    let c = a.calculus();
    let u = a.domain().union(b.domain())?;
    let ma = u.projection_map(a.domain())?;
    let mb = u.projection_map(b.domain())?;
    let (av, bv) = (a.values(), b.values());
    let mut values: Vec<f64> = ma
        .iter()
        .zip(&mb)
        .map(|(&i, &j)| combine_value(c, av[i], bv[j]))
        .collect();
    normalize_values(c, &mut values);
    Ok(TabularValuation::from_parts(c, u, values))
}

/// Marginal onto `target ⊆ domain`, folding each fibre in one pass.
pub(crate) fn marginalize_to(a: &TabularValuation, target: &Domain) -> Result<TabularValuation> {
    let c = a.calculus();
    let map = a.domain().projection_map(target)?;
    let mut values = vec![fold_init(c); target.size()];
    for (&j, &v) in map.iter().zip(a.values()) {
        values[j] = fold_value(c, values[j], v);
    }
    Ok(TabularValuation::from_parts(c, target.clone(), values))
}

pub(crate) fn remove(a: &TabularValuation, b: &TabularValuation) -> Result<TabularValuation> {
    let c = a.calculus();
    let u = a.domain().union(b.domain())?;
    if is_zero_table(c, a.values()) || is_zero_table(c, b.values()) {
        return Ok(TabularValuation::from_parts(
            c,
            u.clone(),
            vec![zero_value(c); u.size()],
        ));
    }
    let ma = u.projection_map(a.domain())?;
    let mb = u.projection_map(b.domain())?;
    let (av, bv) = (a.values(), b.values());
    let mut values = Vec::with_capacity(u.size());
    for (index, (&i, &j)) in ma.iter().zip(&mb).enumerate() {
        values.push(remove_value(c, av[i], bv[j]).ok_or(Error::InconsistentRemoval { index })?);
    }
    normalize_values(c, &mut values);
    Ok(TabularValuation::from_parts(c, u, values))
}
