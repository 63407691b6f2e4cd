//! Independence and conditional independence decided by factorization of
//! the joint valuation `τ`.
//!
//! `r ⊥ s` holds when `τ↓(r∪s) = τ↓r ⊕ τ↓s`, and `r ⊥ s | t` when
//! `τ↓(r∪s∪t) = (τ↓(r∪t) ⊖ τ↓t) ⊕ τ↓(s∪t)`. Both tests use only marginals,
//! so any [`Marginals`] source works: a factored model (marginals by
//! fusion) or a precomputed [`MarginalTable`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::calculi::{combine, combine_all, marginalize_to, remove};
use crate::domain::{Domain, Registry};
use crate::error::{Error, Result};
use crate::format::valuation_json;
use crate::fusion::{elimination_order, fuse_step, FactoredModel, Heuristic};
use crate::valuation::{
    classify, same_valuation, support_identity, Calculus, ClassFlags, Valuation, DEFAULT_TOL,
};

/// Largest variable set for which the graphoid audit enumerates triples.
pub const GRAPHOID_MAX_VARS: usize = 5;

/// Source of marginals of a joint valuation `τ` on `variables()`.
pub trait Marginals {
    fn calculus(&self) -> Calculus;
    fn variables(&self) -> &Domain;
    fn marginal(&self, d: &Domain) -> Result<Valuation>;
    /// Class of `τ` itself.
    fn joint_flags(&self) -> Result<ClassFlags>;

    /// Valuations whose combination is `τ↓keep`, when a factored form is
    /// available.
    fn factorization(&self, _keep: &Domain) -> Option<Vec<Valuation>> {
        None
    }
}

impl Marginals for FactoredModel {
    fn calculus(&self) -> Calculus {
        FactoredModel::calculus(self)
    }

    fn variables(&self) -> &Domain {
        FactoredModel::variables(self)
    }

    fn marginal(&self, d: &Domain) -> Result<Valuation> {
        FactoredModel::marginal(self, d)
    }

    fn joint_flags(&self) -> Result<ClassFlags> {
        match self.joint() {
            Ok(j) => Ok(classify(&j)),
            Err(Error::Capacity { .. }) => {
                // Combining proper valuations is proper normal or zero.
                let all_proper = self.factors().iter().all(|f| classify(f).is_proper);
                let nonzero = !self.marginal(&Domain::empty())?.is_zero();
                Ok(ClassFlags {
                    is_zero: !nonzero,
                    is_proper: all_proper && nonzero,
                    is_normal: nonzero,
                    is_positive: false,
                })
            }
            Err(e) => Err(e),
        }
    }

    fn factorization(&self, keep: &Domain) -> Option<Vec<Valuation>> {
        let plan = elimination_order(self, keep, Heuristic::MinFill).ok()?;
        let mut factors = self.factors().to_vec();
        for &y in &plan.order {
            factors = fuse_step(&factors, y).ok()?.factors;
        }
        Some(factors)
    }
}

/// All marginals of a joint valuation on a small variable set, computed once.
#[derive(Debug, Clone)]
pub struct MarginalTable {
    calculus: Calculus,
    variables: Domain,
    flags: ClassFlags,
    table: BTreeMap<Domain, Valuation>,
}

impl MarginalTable {
    /// Every marginal of `tau`; the domain of `tau` may hold at most
    /// [`GRAPHOID_MAX_VARS`] variables.
    pub fn from_joint(tau: &Valuation) -> Result<Self> {
        let vars = tau.domain().clone();
        if vars.len() > GRAPHOID_MAX_VARS {
            return Err(Error::Capacity {
                needed: vars.len() as u64,
                limit: GRAPHOID_MAX_VARS as u64,
            });
        }
        let mut table = BTreeMap::new();
        for mask in 0..1u64 << vars.len() {
            let d = vars.select(mask);
            table.insert(d.clone(), marginalize_to(tau, &d)?);
        }
        Ok(MarginalTable {
            calculus: tau.calculus(),
            variables: vars,
            flags: classify(tau),
            table,
        })
    }

    pub fn from_model(model: &FactoredModel) -> Result<Self> {
        if model.variables().len() > GRAPHOID_MAX_VARS {
            return Err(Error::Capacity {
                needed: model.variables().len() as u64,
                limit: GRAPHOID_MAX_VARS as u64,
            });
        }
        MarginalTable::from_joint(&model.joint()?)
    }

    pub fn joint(&self) -> &Valuation {
        &self.table[&self.variables]
    }
}

impl Marginals for MarginalTable {
    fn calculus(&self) -> Calculus {
        self.calculus
    }

    fn variables(&self) -> &Domain {
        &self.variables
    }

    fn marginal(&self, d: &Domain) -> Result<Valuation> {
        self.table
            .get(d)
            .cloned()
            .ok_or_else(|| Error::domain(format!("{d} is not a subset of the joint domain")))
    }

    fn joint_flags(&self) -> Result<ClassFlags> {
        Ok(self.flags)
    }
}

/// Outcome of a conditional-independence query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Undecidable(String),
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }

    pub fn holds(&self) -> Option<bool> {
        match self {
            Verdict::Holds => Some(true),
            Verdict::Fails => Some(false),
            Verdict::Undecidable(_) => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds => f.write_str("true"),
            Verdict::Fails => f.write_str("false"),
            Verdict::Undecidable(why) => write!(f, "undecidable: {why}"),
        }
    }
}

/// Pairwise disjoint `r`, `s`, `t` with `r` and `s` nonempty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CiTriple {
    pub r: Domain,
    pub s: Domain,
    pub t: Domain,
}

impl CiTriple {
    pub fn new(r: Domain, s: Domain, t: Domain) -> Result<Self> {
        if r.is_empty() || s.is_empty() {
            return Err(Error::domain("r and s must be nonempty"));
        }
        if !r.is_disjoint(&s) || !r.is_disjoint(&t) || !s.is_disjoint(&t) {
            return Err(Error::domain("r, s and t must be pairwise disjoint"));
        }
        Ok(CiTriple { r, s, t })
    }

    pub fn swapped(&self) -> CiTriple {
        CiTriple {
            r: self.s.clone(),
            s: self.r.clone(),
            t: self.t.clone(),
        }
    }

    /// `r ⊥ s | t` with variable names from `reg`.
    pub fn label(&self, reg: &Registry) -> String {
        let names = |d: &Domain| {
            let n = reg.names_of(d);
            if n.is_empty() {
                "∅".to_string()
            } else {
                n.join(",")
            }
        };
        if self.t.is_empty() {
            format!("{} ⊥ {}", names(&self.r), names(&self.s))
        } else {
            format!(
                "{} ⊥ {} | {}",
                names(&self.r),
                names(&self.s),
                names(&self.t)
            )
        }
    }
}

fn require_proper_normal(tau: &impl Marginals) -> Result<()> {
    let f = tau.joint_flags()?;
    if !f.is_proper_normal() {
        return Err(Error::precondition(format!(
            "independence is defined for proper normal joint valuations ({f})"
        )));
    }
    Ok(())
}

fn require_in(tau: &impl Marginals, sets: &[&Domain]) -> Result<()> {
    for d in sets {
        if !d.is_subset(tau.variables()) {
            return Err(Error::domain(format!(
                "{d} is not part of the joint domain"
            )));
        }
    }
    Ok(())
}

fn union(a: &Domain, b: &Domain) -> Result<Domain> {
    a.union(b)
}

fn eq(a: &Valuation, b: &Valuation) -> bool {
    same_valuation(a, b, DEFAULT_TOL)
}

/// The conditional `τ ⊖ τ↓r` for `s − r` given `r`.
pub fn conditional(tau: &Valuation, r: &Domain) -> Result<Valuation> {
    if !classify(tau).is_proper_normal() {
        return Err(Error::precondition(
            "conditional requires a proper normal valuation",
        ));
    }
    if !r.is_subset(tau.domain()) {
        return Err(Error::domain(format!(
            "{r} is not a subset of {}",
            tau.domain()
        )));
    }
    remove(tau, &marginalize_to(tau, r)?)
}

/// `r ⊥ s`. Empty `r` or `s` is vacuously independent.
pub fn is_independent(tau: &impl Marginals, r: &Domain, s: &Domain) -> Result<bool> {
    if !r.is_disjoint(s) {
        return Err(Error::domain("independence needs disjoint sets"));
    }
    require_in(tau, &[r, s])?;
    require_proper_normal(tau)?;
    marginal_product_holds(tau, r, s)
}

fn marginal_product_holds(tau: &impl Marginals, r: &Domain, s: &Domain) -> Result<bool> {
    if r.is_empty() || s.is_empty() {
        return Ok(true);
    }
    let joint = tau.marginal(&union(r, s)?)?;
    let product = combine(&tau.marginal(r)?, &tau.marginal(s)?)?;
    Ok(eq(&joint, &product))
}

fn check_parts(parts: &[Domain], t: Option<&Domain>) -> Result<()> {
    for (i, a) in parts.iter().enumerate() {
        if a.is_empty() {
            return Err(Error::domain(format!("part {i} is empty")));
        }
        if let Some(t) = t {
            if !a.is_disjoint(t) {
                return Err(Error::domain(format!(
                    "part {i} overlaps the conditioning set"
                )));
            }
        }
        for b in &parts[i + 1..] {
            if !a.is_disjoint(b) {
                return Err(Error::domain("parts must be pairwise disjoint"));
            }
        }
    }
    Ok(())
}

/// `⊥ {r_1, …, r_n}`: the marginal on the union is the combination of the
/// individual marginals.
pub fn is_jointly_independent(tau: &impl Marginals, parts: &[Domain]) -> Result<bool> {
    check_parts(parts, None)?;
    require_in(tau, &parts.iter().collect::<Vec<_>>())?;
    require_proper_normal(tau)?;
    jointly_independent_unchecked(tau, parts)
}

fn jointly_independent_unchecked(tau: &impl Marginals, parts: &[Domain]) -> Result<bool> {
    if parts.len() < 2 {
        return Ok(true);
    }
    let all = parts.iter().try_fold(Domain::empty(), |d, p| d.union(p))?;
    let marginals = parts
        .iter()
        .map(|p| tau.marginal(p))
        .collect::<Result<Vec<_>>>()?;
    let product = combine_all(tau.calculus(), &marginals)?;
    Ok(eq(&tau.marginal(&all)?, &product))
}

/// `r ⊥ s | t`.
///
/// When the removal `τ↓(r∪t) ⊖ τ↓t` is undefined the factored form of `τ`
/// is searched for a witness; failing that the verdict is undecidable.
pub fn is_cond_independent(tau: &impl Marginals, triple: &CiTriple) -> Result<Verdict> {
    require_in(tau, &[&triple.r, &triple.s, &triple.t])?;
    require_proper_normal(tau)?;
    cond_independent_unchecked(tau, triple)
}

fn cond_independent_unchecked(tau: &impl Marginals, triple: &CiTriple) -> Result<Verdict> {
    let CiTriple { r, s, t } = triple;
    if t.is_empty() {
        return marginal_product_holds(tau, r, s).map(Verdict::from_bool);
    }
    let rt = union(r, t)?;
    let st = union(s, t)?;
    let rst = union(&rt, s)?;
    let cond = match remove(&tau.marginal(&rt)?, &tau.marginal(t)?) {
        Ok(c) => c,
        Err(e) if e.is_removal_failure() => return Ok(factored_witness(tau, triple, &rst, e)),
        Err(e) => return Err(e),
    };
    let rhs = combine(&cond, &tau.marginal(&st)?)?;
    Ok(Verdict::from_bool(eq(&tau.marginal(&rst)?, &rhs)))
}

fn factored_witness(
    tau: &impl Marginals,
    triple: &CiTriple,
    rst: &Domain,
    cause: Error,
) -> Verdict {
    let rt = triple.r.union(&triple.t).unwrap_or_default();
    let st = triple.s.union(&triple.t).unwrap_or_default();
    match tau.factorization(rst) {
        Some(factors)
            if factors
                .iter()
                .all(|f| f.domain().is_subset(&rt) || f.domain().is_subset(&st)) =>
        {
            Verdict::Holds
        }
        Some(_) => Verdict::Undecidable(format!(
            "{cause}; the factored form does not split along r∪t / s∪t"
        )),
        None => Verdict::Undecidable(format!("{cause}; no factored form available")),
    }
}

/// `⊥ {r_1, …, r_n} | t`, decided by chaining
/// `r_j ⊥ (r_1 ∪ … ∪ r_{j−1}) | t` for `j = 2..n`.
pub fn is_jointly_cond_independent(
    tau: &impl Marginals,
    parts: &[Domain],
    t: &Domain,
) -> Result<Verdict> {
    check_parts(parts, Some(t))?;
    let mut all: Vec<&Domain> = parts.iter().collect();
    all.push(t);
    require_in(tau, &all)?;
    require_proper_normal(tau)?;
    let mut prefix = match parts.first() {
        Some(p) => p.clone(),
        None => return Ok(Verdict::Holds),
    };
    let mut undecided = None;
    for p in &parts[1..] {
        let triple = CiTriple::new(p.clone(), prefix.clone(), t.clone())?;
        match cond_independent_unchecked(tau, &triple)? {
            Verdict::Fails => return Ok(Verdict::Fails),
            Verdict::Undecidable(why) => undecided = Some(why),
            Verdict::Holds => {}
        }
        prefix = prefix.union(p)?;
    }
    Ok(undecided.map_or(Verdict::Holds, Verdict::Undecidable))
}

/// Which relation a characterization decides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Relation {
    /// `r ⊥ s`
    Unconditional,
    /// `r ⊥ s | t`
    Conditional,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Characterization {
    pub name: &'static str,
    pub relation: Relation,
    /// `None` when a removal it needs is undefined.
    pub value: Option<bool>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrosscheckReport {
    pub triple: CiTriple,
    pub items: Vec<Characterization>,
}

impl CrosscheckReport {
    pub fn computed(&self, relation: Relation) -> Vec<bool> {
        self.items
            .iter()
            .filter(|c| c.relation == relation)
            .filter_map(|c| c.value)
            .collect()
    }

    /// Every computed characterization of the same relation agrees.
    pub fn coherent(&self) -> bool {
        [Relation::Unconditional, Relation::Conditional]
            .iter()
            .all(|&rel| {
                let v = self.computed(rel);
                v.windows(2).all(|w| w[0] == w[1])
            })
    }

    pub fn get(&self, name: &str) -> Option<bool> {
        self.items
            .iter()
            .find(|c| c.name == name)
            .and_then(|c| c.value)
    }
}

fn attempt(f: impl FnOnce() -> Result<bool>) -> Result<(Option<bool>, Option<String>)> {
    match f() {
        Ok(b) => Ok((Some(b), None)),
        Err(e) if e.is_removal_failure() => Ok((None, Some(e.to_string()))),
        Err(e) => Err(e),
    }
}

/// Evaluates every constructive characterization of `r ⊥ s` and of
/// `r ⊥ s | t` and reports each value.
pub fn characterization_crosscheck(
    tau: &impl Marginals,
    triple: &CiTriple,
) -> Result<CrosscheckReport> {
    require_in(tau, &[&triple.r, &triple.s, &triple.t])?;
    require_proper_normal(tau)?;
    let CiTriple { r, s, t } = triple;
    let m = |d: &Domain| tau.marginal(d);
    let rs = union(r, s)?;
    let rt = union(r, t)?;
    let st = union(s, t)?;
    let rst = union(&rt, s)?;

    let mut items = Vec::new();
    let mut push = |name, relation, f: &dyn Fn() -> Result<bool>| -> Result<()> {
        let (value, note) = attempt(f)?;
        items.push(Characterization {
            name,
            relation,
            value,
            note,
        });
        Ok(())
    };

    push("marginal-product", Relation::Unconditional, &|| {
        Ok(eq(&m(&rs)?, &combine(&m(r)?, &m(s)?)?))
    })?;
    push("remove-first", Relation::Unconditional, &|| {
        let lhs = remove(&m(&rs)?, &m(r)?)?;
        let rhs = combine(&m(s)?, &support_identity(&m(r)?)?)?;
        Ok(eq(&lhs, &rhs))
    })?;
    push("remove-second", Relation::Unconditional, &|| {
        let lhs = remove(&m(&rs)?, &m(s)?)?;
        let rhs = combine(&m(r)?, &support_identity(&m(s)?)?)?;
        Ok(eq(&lhs, &rhs))
    })?;

    let cond_r = || remove(&m(&rt)?, &m(t)?);
    let cond_s = || remove(&m(&st)?, &m(t)?);
    push("conditional-product", Relation::Conditional, &|| {
        let rhs = combine(&combine(&m(t)?, &cond_r()?)?, &cond_s()?)?;
        Ok(eq(&m(&rst)?, &rhs))
    })?;
    push("conditional-ratio", Relation::Conditional, &|| {
        let lhs = remove(&m(&rst)?, &m(t)?)?;
        Ok(eq(&lhs, &combine(&cond_r()?, &cond_s()?)?))
    })?;
    push("one-conditional", Relation::Conditional, &|| {
        Ok(eq(&m(&rst)?, &combine(&cond_r()?, &m(&st)?)?))
    })?;
    push("remove-second-given", Relation::Conditional, &|| {
        let lhs = remove(&m(&rst)?, &m(&st)?)?;
        let rhs = combine(&cond_r()?, &support_identity(&m(&st)?)?)?;
        Ok(eq(&lhs, &rhs))
    })?;

    Ok(CrosscheckReport {
        triple: triple.clone(),
        items,
    })
}

/// A premise/conclusion instance of a graphoid property that did not hold.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphoidCounterexample {
    pub premises: Vec<CiTriple>,
    pub conclusion: CiTriple,
    /// `τ` restricted to the variables the instance mentions.
    pub operand: Valuation,
}

impl GraphoidCounterexample {
    /// Re-evaluates the instance; `true` when it still fails.
    pub fn recheck(&self, tau: &impl Marginals) -> Result<bool> {
        for p in &self.premises {
            if cond_independent_unchecked(tau, p)? != Verdict::Holds {
                return Ok(false);
            }
        }
        Ok(cond_independent_unchecked(tau, &self.conclusion)? == Verdict::Fails)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
    /// Instances where a premise or the conclusion was undecidable.
    pub skipped: usize,
    pub counterexamples: Vec<GraphoidCounterexample>,
    /// Failures that the property's hypotheses already exclude (intersection
    /// without positivity). Not defects.
    pub expected: Vec<GraphoidCounterexample>,
}

impl PropertyResult {
    fn new(name: &'static str) -> Self {
        PropertyResult {
            name,
            passed: 0,
            failed: 0,
            skipped: 0,
            counterexamples: Vec::new(),
            expected: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GraphoidReport {
    pub positive_mode: bool,
    /// Every triple found conditionally independent, sorted.
    pub relation: Vec<CiTriple>,
    pub undecidable: Vec<CiTriple>,
    pub properties: Vec<PropertyResult>,
}

impl GraphoidReport {
    pub fn total_failures(&self) -> usize {
        self.properties.iter().map(|p| p.failed).sum()
    }

    pub fn property(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn to_text(&self, reg: &Registry) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "graphoid audit: positive-mode={} relation={} undecidable={}",
            self.positive_mode,
            self.relation.len(),
            self.undecidable.len()
        );
        let _ = writeln!(
            out,
            "{:<14} {:>8} {:>8} {:>8} {:>8}",
            "property", "passed", "failed", "skipped", "expected"
        );
        for p in &self.properties {
            let _ = writeln!(
                out,
                "{:<14} {:>8} {:>8} {:>8} {:>8}",
                p.name,
                p.passed,
                p.failed,
                p.skipped,
                p.expected.len()
            );
        }
        let _ = writeln!(out, "total failures: {}", self.total_failures());
        for t in &self.undecidable {
            let _ = writeln!(out, "undecidable: {}", t.label(reg));
        }
        for p in &self.properties {
            for (kind, list) in [
                ("counterexample", &p.counterexamples),
                ("expected", &p.expected),
            ] {
                for c in list {
                    let premises: Vec<String> = c.premises.iter().map(|t| t.label(reg)).collect();
                    let _ = writeln!(
                        out,
                        "{kind} [{}]: {} does not yield {}",
                        p.name,
                        premises.join(" and "),
                        c.conclusion.label(reg)
                    );
                }
            }
        }
        out
    }

    pub fn to_json(&self, reg: &Registry) -> Value {
        let instance = |c: &GraphoidCounterexample| {
            json!({
                "premises": c.premises.iter().map(|t| t.label(reg)).collect::<Vec<_>>(),
                "conclusion": c.conclusion.label(reg),
                "operand": valuation_json(reg, &c.operand),
            })
        };
        json!({
            "positive_mode": self.positive_mode,
            "relation": self.relation.iter().map(|t| t.label(reg)).collect::<Vec<_>>(),
            "undecidable": self.undecidable.iter().map(|t| t.label(reg)).collect::<Vec<_>>(),
            "properties": self.properties.iter().map(|p| json!({
                "name": p.name,
                "passed": p.passed,
                "failed": p.failed,
                "skipped": p.skipped,
                "counterexamples": p.counterexamples.iter().map(instance).collect::<Vec<_>>(),
                "expected": p.expected.iter().map(instance).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "total_failures": self.total_failures(),
        })
    }
}

/// Enumerates every valid triple over the variables of `tau`, decides the
/// relation, and checks symmetry, decomposition, weak union, contraction,
/// intersection and coarsening of joint independences.
///
/// Intersection instances count as failures only in `positive_mode`, which
/// requires `τ` to be positive proper normal; otherwise its violations are
/// listed as expected.
pub fn graphoid_audit(tau: &MarginalTable, positive_mode: bool) -> Result<GraphoidReport> {
    require_proper_normal(tau)?;
    if positive_mode && !tau.joint_flags()?.is_positive {
        return Err(Error::precondition(
            "positive mode requires a positive proper normal valuation",
        ));
    }
    let vars = tau.variables().clone();
    let n = vars.len();
    if n > GRAPHOID_MAX_VARS {
        return Err(Error::Capacity {
            needed: n as u64,
            limit: GRAPHOID_MAX_VARS as u64,
        });
    }

    // (r, s, t) masks -> verdict, for r, s nonempty.
    let mut verdicts: BTreeMap<(u64, u64, u64), Verdict> = BTreeMap::new();
    for code in 0..4usize.pow(n as u32) {
        let (mut r, mut s, mut t) = (0u64, 0u64, 0u64);
        let mut c = code;
        for i in 0..n {
            match c % 4 {
                1 => r |= 1 << i,
                2 => s |= 1 << i,
                3 => t |= 1 << i,
                _ => {}
            }
            c /= 4;
        }
        if r == 0 || s == 0 {
            continue;
        }
        let triple = CiTriple::new(vars.select(r), vars.select(s), vars.select(t))?;
        verdicts.insert((r, s, t), cond_independent_unchecked(tau, &triple)?);
    }

    let triple = |r: u64, s: u64, t: u64| CiTriple {
        r: vars.select(r),
        s: vars.select(s),
        t: vars.select(t),
    };
    let verdict = |r: u64, s: u64, t: u64| &verdicts[&(r, s, t)];
    let operand = |mask: u64| tau.marginal(&vars.select(mask));

    let mut relation = Vec::new();
    let mut undecidable = Vec::new();
    for (&(r, s, t), v) in &verdicts {
        match v {
            Verdict::Holds => relation.push(triple(r, s, t)),
            Verdict::Undecidable(_) => undecidable.push(triple(r, s, t)),
            Verdict::Fails => {}
        }
    }
    relation.sort();
    undecidable.sort();

    let mut symmetry = PropertyResult::new("symmetry");
    let mut decomposition = PropertyResult::new("decomposition");
    let mut weak_union = PropertyResult::new("weak-union");
    let mut contraction = PropertyResult::new("contraction");
    let mut intersection = PropertyResult::new("intersection");

    // Records one implication instance.
    let record = |res: &mut PropertyResult,
                  premises: Vec<(u64, u64, u64)>,
                  conclusion: (u64, u64, u64),
                  expected_failure: bool|
     -> Result<()> {
        let mut decided = true;
        for &(r, s, t) in &premises {
            match verdict(r, s, t) {
                Verdict::Fails => return Ok(()),
                Verdict::Undecidable(_) => decided = false,
                Verdict::Holds => {}
            }
        }
        let (cr, cs, ct) = conclusion;
        match (decided, verdict(cr, cs, ct)) {
            (false, _) | (_, Verdict::Undecidable(_)) => res.skipped += 1,
            (true, Verdict::Holds) => res.passed += 1,
            (true, Verdict::Fails) => {
                let cx = GraphoidCounterexample {
                    premises: premises.iter().map(|&(r, s, t)| triple(r, s, t)).collect(),
                    conclusion: triple(cr, cs, ct),
                    operand: operand(cr | cs | ct)?,
                };
                if expected_failure {
                    res.expected.push(cx);
                } else {
                    res.failed += 1;
                    res.counterexamples.push(cx);
                }
            }
        }
        Ok(())
    };

    let full = (1u64 << n) - 1;
    for r in 1..=full {
        let rest = full & !r;
        // s ranges over nonempty subsets of the complement of r
        let mut s = rest;
        while s != 0 {
            record(&mut symmetry, vec![(r, s, 0)], (s, r, 0), false)?;
            let rest_t = rest & !s;
            let mut t = rest_t;
            while t != 0 {
                record(&mut decomposition, vec![(r, s | t, 0)], (r, s, 0), false)?;
                record(&mut weak_union, vec![(r, s | t, 0)], (r, s, t), false)?;
                record(
                    &mut contraction,
                    vec![(r, s, 0), (r, t, s)],
                    (r, s | t, 0),
                    false,
                )?;
                record(
                    &mut intersection,
                    vec![(r, s, t), (r, t, s)],
                    (r, s | t, 0),
                    !positive_mode,
                )?;
                t = (t - 1) & rest_t;
            }
            s = (s - 1) & rest;
        }
    }

    let coarsening = coarsening_audit(tau, &vars)?;

    Ok(GraphoidReport {
        positive_mode,
        relation,
        undecidable,
        properties: vec![
            symmetry,
            decomposition,
            weak_union,
            contraction,
            intersection,
            coarsening,
        ],
    })
}

/// Families of pairwise disjoint nonempty masks with at least two members,
/// each listed once (members in ascending order).
fn disjoint_families(full: u64) -> Vec<Vec<u64>> {
    fn extend(remaining: u64, min: u64, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if current.len() >= 2 {
            out.push(current.clone());
        }
        let mut sub = remaining;
        let mut subs = Vec::new();
        while sub != 0 {
            if sub > min {
                subs.push(sub);
            }
            sub = (sub - 1) & remaining;
        }
        subs.sort_unstable();
        for sub in subs {
            current.push(sub);
            extend(remaining & !sub, sub, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    extend(full, 0, &mut Vec::new(), &mut out);
    out
}

/// Set partitions of `0..n` as block-index assignments.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, blocks: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..=blocks {
            cur.push(b);
            go(i + 1, n, blocks.max(b + 1), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, 0, &mut Vec::new(), &mut out);
    out
}

fn nonempty_submasks(m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut s = m;
    while s != 0 {
        out.push(s);
        s = (s - 1) & m;
    }
    out.sort_unstable();
    out
}

/// Functions of jointly independent blocks are jointly independent: for every
/// jointly independent family, every grouping of its blocks, and every choice
/// of subsets of the grouped unions.
fn coarsening_audit(tau: &MarginalTable, vars: &Domain) -> Result<PropertyResult> {
    let mut res = PropertyResult::new("coarsening");
    let full = (1u64 << vars.len()) - 1;
    let mut memo: BTreeMap<Vec<u64>, bool> = BTreeMap::new();
    let mut joint = |family: &[u64]| -> Result<bool> {
        let mut key = family.to_vec();
        key.sort_unstable();
        if let Some(&b) = memo.get(&key) {
            return Ok(b);
        }
        let parts: Vec<Domain> = key.iter().map(|&m| vars.select(m)).collect();
        let b = jointly_independent_unchecked(tau, &parts)?;
        memo.insert(key, b);
        Ok(b)
    };
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    for family in disjoint_families(full) {
        if !joint(&family)? {
            continue;
        }
        for assignment in set_partitions(family.len()) {
            let k = assignment.iter().max().map_or(0, |m| m + 1);
            if k < 2 {
                continue;
            }
            let mut unions = vec![0u64; k];
            for (block, &g) in assignment.iter().enumerate() {
                unions[g] |= family[block];
            }
            let choices: Vec<Vec<u64>> = unions.iter().map(|&u| nonempty_submasks(u)).collect();
            let mut idx = vec![0usize; k];
            loop {
                let coarse: Vec<u64> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
                let mut key = coarse.clone();
                key.sort_unstable();
                if seen.insert(key) {
                    if joint(&coarse)? {
                        res.passed += 1;
                    } else {
                        res.failed += 1;
                        let all = coarse.iter().fold(0, |a, &m| a | m);
                        res.counterexamples.push(GraphoidCounterexample {
                            premises: vec![],
                            conclusion: CiTriple {
                                r: vars.select(coarse[0]),
                                s: vars.select(all & !coarse[0]),
                                t: Domain::empty(),
                            },
                            operand: tau.marginal(&vars.select(all))?,
                        });
                    }
                }
                let mut pos = 0;
                loop {
                    if pos == k {
                        break;
                    }
                    idx[pos] += 1;
                    if idx[pos] < choices[pos].len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
                if pos == k {
                    break;
                }
            }
        }
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_and_partitions_enumerate() {
        // three variables: {a,b},{a,c},{b,c},{a,bc},{b,ac},{c,ab},{a,b,c}
        assert_eq!(disjoint_families(0b111).len(), 7);
        assert_eq!(set_partitions(3).len(), 5);
        assert_eq!(set_partitions(4).len(), 15);
        assert_eq!(nonempty_submasks(0b101), vec![0b001, 0b100, 0b101]);
    }
}
