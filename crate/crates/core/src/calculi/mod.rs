//! Combination `⊕`, marginalization `↓` and removal `⊖`, dispatched on the
//! calculus tag of the operands.

pub mod belief;
pub(crate) mod tabular;

pub use belief::{
    commonality_to_mass, mass_to_commonality, CommonalityTable, ConfigSet, MassValuation,
};

use crate::domain::{Domain, VarId};
use crate::error::{Error, Result};
use crate::valuation::{identity_for, Valuation};

fn same_calculus(a: &Valuation, b: &Valuation) -> Result<()> {
    if a.calculus() != b.calculus() {
        return Err(Error::CalculusMismatch(a.calculus(), b.calculus()));
    }
    Ok(())
}

/// `ρ ⊕ σ`, a valuation for `r ∪ s` that is normal or zero.
pub fn combine(rho: &Valuation, sigma: &Valuation) -> Result<Valuation> {
    same_calculus(rho, sigma)?;
    Ok(match (rho, sigma) {
        (Valuation::Tabular(a), Valuation::Tabular(b)) => tabular::combine(a, b)?.into(),
        (Valuation::Mass(a), Valuation::Mass(b)) => belief::combine(a, b)?.into(),
        _ => unreachable!("calculus tags agree"),
    })
}

/// Combination of any number of valuations. The empty combination is `ι_∅`
/// in the given calculus.
pub fn combine_all<'a>(
    calculus: crate::valuation::Calculus,
    vals: impl IntoIterator<Item = &'a Valuation>,
) -> Result<Valuation> {
    let mut it = vals.into_iter();
    let Some(first) = it.next() else {
        return Ok(identity_for(&Domain::empty(), calculus));
    };
    let mut acc = crate::valuation::normalize(first);
    for v in it {
        acc = combine(&acc, v)?;
    }
    Ok(acc)
}

/// `σ↓(s − {X})`.
pub fn marginalize(sigma: &Valuation, x: VarId) -> Result<Valuation> {
    if !sigma.domain().contains(x) {
        return Err(Error::domain(format!(
            "cannot delete variable {x}: not in {}",
            sigma.domain()
        )));
    }
    marginalize_to(sigma, &sigma.domain().without(x))
}

/// `σ↓t` for `t ⊆ s`.
pub fn marginalize_to(sigma: &Valuation, target: &Domain) -> Result<Valuation> {
    if !target.is_subset(sigma.domain()) {
        return Err(Error::domain(format!(
            "cannot marginalize {} to {}",
            sigma.domain(),
            target
        )));
    }
    Ok(match sigma {
        Valuation::Tabular(t) => tabular::marginalize_to(t, target)?.into(),
        Valuation::Mass(m) => belief::marginalize_to(m, target)?.into(),
    })
}

/// `σ ⊖ ρ`, a valuation for `r ∪ s`.
pub fn remove(sigma: &Valuation, rho: &Valuation) -> Result<Valuation> {
    same_calculus(sigma, rho)?;
    Ok(match (sigma, rho) {
        (Valuation::Tabular(a), Valuation::Tabular(b)) => tabular::remove(a, b)?.into(),
        (Valuation::Mass(a), Valuation::Mass(b)) => belief::remove(a, b)?.into(),
        _ => unreachable!("calculus tags agree"),
    })
}
