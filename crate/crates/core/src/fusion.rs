//! Local computation of marginals by successive fusion.
//!
//! Deleting a variable `Y` from a collection of valuations combines exactly
//! the valuations that mention `Y`, marginalizes `Y` out of the result, and
//! leaves every other valuation alone. Repeating this along any sequence of
//! the variables outside the target and combining the survivors gives the
//! marginal of the joint valuation without ever building the joint table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::calculi::{combine, combine_all, marginalize};
use crate::domain::{Domain, Registry, VarId};
use crate::error::{Error, Result};
use crate::valuation::{zero_for, Calculus, Valuation};

/// Largest joint frame the brute-force oracle will materialize.
pub const BRUTE_FORCE_LIMIT: u64 = 1 << 20;

/// A joint valuation given as the combination of its factors.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredModel {
    registry: Registry,
    calculus: Calculus,
    factors: Vec<Valuation>,
    variables: Domain,
}

impl FactoredModel {
    pub fn new(registry: Registry, calculus: Calculus, factors: Vec<Valuation>) -> Result<Self> {
        let full = registry.full_domain();
        let mut variables = Domain::empty();
        for (i, f) in factors.iter().enumerate() {
            if f.calculus() != calculus {
                return Err(Error::CalculusMismatch(calculus, f.calculus()));
            }
            let ok = f.domain().pairs().all(|(v, c)| full.card_of(v) == Some(c));
            if !ok {
                return Err(Error::domain(format!(
                    "factor {i} has a domain outside the registry"
                )));
            }
            variables = variables.union(f.domain())?;
        }
        Ok(FactoredModel {
            registry,
            calculus,
            factors,
            variables,
        })
    }

    /// Single-factor model whose joint is `tau`.
    pub fn from_joint(registry: Registry, tau: Valuation) -> Result<Self> {
        let c = tau.calculus();
        FactoredModel::new(registry, c, vec![tau])
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn calculus(&self) -> Calculus {
        self.calculus
    }

    pub fn factors(&self) -> &[Valuation] {
        &self.factors
    }

    /// The union of the factor domains.
    pub fn variables(&self) -> &Domain {
        &self.variables
    }

    /// The full joint valuation, subject to [`BRUTE_FORCE_LIMIT`].
    pub fn joint(&self) -> Result<Valuation> {
        check_capacity(&self.variables)?;
        combine_all(self.calculus, &self.factors)
    }

    /// Marginal of the joint on `target`, computed by fusion along the
    /// min-fill order.
    pub fn marginal(&self, target: &Domain) -> Result<Valuation> {
        let plan = elimination_order(self, target, Heuristic::MinFill)?;
        marginal_by_fusion(self, target, &plan)
    }
}

fn check_capacity(d: &Domain) -> Result<()> {
    let needed = d.checked_size().unwrap_or(u64::MAX);
    if needed > BRUTE_FORCE_LIMIT {
        return Err(Error::Capacity {
            needed,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Heuristic {
    Declared,
    MinDegree,
    MinFill,
}

impl Heuristic {
    pub const ALL: [Heuristic; 3] = [
        Heuristic::Declared,
        Heuristic::MinDegree,
        Heuristic::MinFill,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Heuristic::Declared => "declared",
            Heuristic::MinDegree => "min-degree",
            Heuristic::MinFill => "min-fill",
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "declared" => Ok(Heuristic::Declared),
            "min-degree" => Ok(Heuristic::MinDegree),
            "min-fill" => Ok(Heuristic::MinFill),
            other => Err(Error::Parse(format!(
                "unknown elimination heuristic {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationPlan {
    pub order: Vec<VarId>,
    pub heuristic: Heuristic,
}

/// Result of one fusion step.
#[derive(Debug, Clone)]
pub struct FuseOutcome {
    pub factors: Vec<Valuation>,
    /// `false` when no factor mentioned the variable and nothing changed.
    pub eliminated: bool,
    /// Configurations of the combined valuation before `Y` was deleted.
    pub combined_cells: usize,
}

/// `Fus_Y`: combine the factors containing `y`, delete `y`, keep the rest.
pub fn fuse_step(factors: &[Valuation], y: VarId) -> Result<FuseOutcome> {
    let (with, without): (Vec<&Valuation>, Vec<&Valuation>) =
        factors.iter().partition(|f| f.domain().contains(y));
    if with.is_empty() {
        return Ok(FuseOutcome {
            factors: factors.to_vec(),
            eliminated: false,
            combined_cells: 0,
        });
    }
    let mut rho = with[0].clone();
    for f in &with[1..] {
        rho = combine(&rho, f)?;
    }
    let combined_cells = rho.domain().size();
    let fused = marginalize(&rho, y)?;
    let mut out: Vec<Valuation> = without.into_iter().cloned().collect();
    out.push(fused);
    Ok(FuseOutcome {
        factors: out,
        eliminated: true,
        combined_cells,
    })
}

/// Elimination sequence for every variable of the model outside `keep`.
/// Ties are broken by registry order.
pub fn elimination_order(
    model: &FactoredModel,
    keep: &Domain,
    heuristic: Heuristic,
) -> Result<EliminationPlan> {
    if !keep.is_subset(model.variables()) {
        return Err(Error::domain(format!(
            "kept variables {} are not all in the model",
            keep
        )));
    }
    let candidates: Vec<VarId> = model.variables().difference(keep).vars().to_vec();
    if heuristic == Heuristic::Declared {
        return Ok(EliminationPlan {
            order: candidates,
            heuristic,
        });
    }

    let mut graph: BTreeMap<VarId, BTreeSet<VarId>> = model
        .variables()
        .vars()
        .iter()
        .map(|&v| (v, BTreeSet::new()))
        .collect();
    for f in model.factors() {
        for &a in f.domain().vars() {
            for &b in f.domain().vars() {
                if a != b {
                    graph.get_mut(&a).unwrap().insert(b);
                }
            }
        }
    }

    let mut remaining: BTreeSet<VarId> = candidates.into_iter().collect();
    let mut order = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let score = |v: VarId| -> usize {
            let nb = &graph[&v];
            match heuristic {
                Heuristic::MinDegree => nb.len(),
                _ => {
                    let nbv: Vec<VarId> = nb.iter().copied().collect();
                    let mut fill = 0;
                    for (i, &a) in nbv.iter().enumerate() {
                        for &b in &nbv[i + 1..] {
                            if !graph[&a].contains(&b) {
                                fill += 1;
                            }
                        }
                    }
                    fill
                }
            }
        };
        // BTreeSet iteration is in registry order, so min_by_key keeps the
        // earliest variable among ties.
        let next = remaining.iter().copied().min_by_key(|&v| score(v)).unwrap();
        remaining.remove(&next);
        order.push(next);
        let nb: Vec<VarId> = graph.remove(&next).unwrap().into_iter().collect();
        for &a in &nb {
            let set = graph.get_mut(&a).unwrap();
            set.remove(&next);
            set.extend(nb.iter().copied().filter(|&b| b != a));
        }
    }
    Ok(EliminationPlan { order, heuristic })
}

/// Marginal plus bookkeeping from a fusion run.
#[derive(Debug, Clone)]
pub struct FusionRun {
    pub marginal: Valuation,
    /// Largest combined valuation built, in configurations.
    pub peak_cells: usize,
    /// Set when an intermediate zero valuation ended the run early.
    pub zero_shortcut: bool,
}

pub fn marginal_by_fusion(
    model: &FactoredModel,
    target: &Domain,
    plan: &EliminationPlan,
) -> Result<Valuation> {
    fusion_run(model, target, plan).map(|r| r.marginal)
}

pub fn fusion_run(
    model: &FactoredModel,
    target: &Domain,
    plan: &EliminationPlan,
) -> Result<FusionRun> {
    if !target.is_subset(model.variables()) {
        return Err(Error::domain(format!(
            "target {} is not in the model",
            target
        )));
    }
    let expected = model.variables().difference(target);
    let mut seen = BTreeSet::new();
    for &v in &plan.order {
        if !expected.contains(v) || !seen.insert(v) {
            return Err(Error::precondition(format!(
                "elimination plan is not a permutation of the non-target variables (offending variable {v})"
            )));
        }
    }
    if seen.len() != expected.len() {
        return Err(Error::precondition(
            "elimination plan does not cover every non-target variable",
        ));
    }

    let zero_run = |peak_cells| FusionRun {
        marginal: zero_for(target, model.calculus()),
        peak_cells,
        zero_shortcut: true,
    };
    if model.factors().iter().any(Valuation::is_zero) {
        return Ok(zero_run(0));
    }
    let mut factors = model.factors().to_vec();
    let mut peak = 0;
    for &y in &plan.order {
        let step = fuse_step(&factors, y)?;
        peak = peak.max(step.combined_cells);
        factors = step.factors;
        if factors.last().is_some_and(Valuation::is_zero) {
            return Ok(zero_run(peak));
        }
    }
    let survivors_domain = factors
        .iter()
        .try_fold(Domain::empty(), |d, f| d.union(f.domain()))?;
    peak = peak.max(survivors_domain.size());
    let marginal = combine_all(model.calculus(), &factors)?;
    debug_assert_eq!(marginal.domain(), target);
    Ok(FusionRun {
        marginal,
        peak_cells: peak,
        zero_shortcut: false,
    })
}

/// The reference marginal: combine every factor on the full frame, then
/// delete the other variables one at a time in registry order.
pub fn brute_force_marginal(model: &FactoredModel, target: &Domain) -> Result<Valuation> {
    if !target.is_subset(model.variables()) {
        return Err(Error::domain(format!(
            "target {} is not in the model",
            target
        )));
    }
    let mut v = model.joint()?;
    for &x in model.variables().difference(target).vars() {
        v = marginalize(&v, x)?;
    }
    Ok(v)
}
