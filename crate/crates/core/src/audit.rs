//! Randomized audit of the combination, marginalization and removal laws.
//!
//! Every law is a row. For each trial each row draws its own instance from a
//! generator seeded by `(seed, trial, row)`, so reports do not depend on the
//! order rows or trials are evaluated in. An instance whose operation is
//! undefined (a removal with a vanishing divisor) is a skip, with its reason
//! counted. Failing instances are kept, with their operands, and replay.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::calculi::belief::{masses_close, MAX_COMMONALITY_FRAME};
use crate::calculi::{
    combine, commonality_to_mass, marginalize, marginalize_to, mass_to_commonality, remove,
    CommonalityTable,
};
use crate::domain::{Domain, Registry, VarId};
use crate::error::{Error, Result};
use crate::fusion::BRUTE_FORCE_LIMIT;
use crate::model::ModelDocument;
use crate::random::{random_registry, random_subdomain, random_valuation, trial_rng, Shape};
use crate::valuation::{
    classify, identity_for, is_identity_for, normalize, same_valuation, support_identity, zero_for,
    Calculus, Valuation, DEFAULT_TOL,
};

/// Counterexamples stored per row; further failures are only counted.
pub const MAX_STORED_COUNTEREXAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditCaps {
    pub max_vars: usize,
    pub max_states: usize,
}

/// Operands and parameters of one law instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub operands: Vec<Valuation>,
    pub vars: Vec<VarId>,
    pub subdomains: Vec<Domain>,
}

impl Instance {
    fn ops(operands: Vec<Valuation>) -> Self {
        Instance {
            operands,
            vars: vec![],
            subdomains: vec![],
        }
    }

    fn with_vars(mut self, vars: Vec<VarId>) -> Self {
        self.vars = vars;
        self
    }

    fn with_subdomains(mut self, d: Vec<Domain>) -> Self {
        self.subdomains = d;
        self
    }
}

/// Result of evaluating one instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    Fail(String),
    Skip(String),
}

struct Gen {
    rng: ChaCha8Rng,
    calculus: Calculus,
    reg: Registry,
    full: Domain,
}

impl Gen {
    fn sub(&mut self) -> Domain {
        random_subdomain(&mut self.rng, &self.full, 0.6)
    }

    fn nonempty_sub(&mut self) -> Domain {
        loop {
            let d = self.sub();
            if !d.is_empty() {
                return d;
            }
        }
    }

    fn sub_of(&mut self, d: &Domain) -> Domain {
        random_subdomain(&mut self.rng, d, 0.5)
    }

    fn val(&mut self, d: &Domain, shape: Shape) -> Valuation {
        random_valuation(&mut self.rng, self.calculus, d, shape)
    }

    fn any(&mut self, d: &Domain) -> Valuation {
        let shape = Shape::any(&mut self.rng);
        self.val(d, shape)
    }

    fn nonzero(&mut self, d: &Domain) -> Valuation {
        let shape = Shape::nonzero(&mut self.rng);
        self.val(d, shape)
    }

    fn normal(&mut self, d: &Domain) -> Valuation {
        let shape = Shape::normal(&mut self.rng);
        self.val(d, shape)
    }

    fn var_in(&mut self, d: &Domain) -> VarId {
        *d.vars().choose(&mut self.rng).expect("nonempty domain")
    }

    fn anys(&mut self, n: usize) -> Instance {
        let v = (0..n)
            .map(|_| {
                let d = self.sub();
                self.any(&d)
            })
            .collect();
        Instance::ops(v)
    }

    fn nonzeros(&mut self, n: usize) -> Instance {
        let v = (0..n)
            .map(|_| {
                let d = self.sub();
                self.nonzero(&d)
            })
            .collect();
        Instance::ops(v)
    }

    fn shaped_pair(&mut self, shape: Shape) -> Instance {
        let (a, b) = (self.sub(), self.sub());
        Instance::ops(vec![self.val(&a, shape), self.val(&b, shape)])
    }

    /// `σ` on a nonempty `s` and a variable `X ∈ s`.
    fn with_var(&mut self, shape: Option<Shape>) -> Instance {
        let s = self.nonempty_sub();
        let sigma = match shape {
            Some(sh) => self.val(&s, sh),
            None => self.any(&s),
        };
        let x = self.var_in(&s);
        Instance::ops(vec![sigma]).with_vars(vec![x])
    }

    /// `(ρ, σ)` with `X ∈ s`, `X ∉ r`, `ρ` first.
    fn split_on_var(&mut self) -> Instance {
        let s = self.nonempty_sub();
        let x = self.var_in(&s);
        let rest = self.full.without(x);
        let r = self.sub_of(&rest);
        let rho = self.any(&r);
        let sigma = self.any(&s);
        Instance::ops(vec![rho, sigma]).with_vars(vec![x])
    }

    /// Normal `σ` on `s` and `r ⊆ s`.
    fn normal_with_sub(&mut self) -> Instance {
        let s = self.sub();
        let sigma = self.normal(&s);
        let r = self.sub_of(&s);
        Instance::ops(vec![sigma]).with_subdomains(vec![r])
    }

    /// `σ` of the given shape (any when `None`) and normal or positive `ρ`.
    fn sigma_rho(&mut self, sigma: Option<Shape>, rho_positive: bool, r_in_s: bool) -> Instance {
        let s = self.sub();
        let r = if r_in_s { self.sub_of(&s) } else { self.sub() };
        let sg = match sigma {
            Some(sh) => self.val(&s, sh),
            None => self.any(&s),
        };
        let rh = if rho_positive {
            self.val(&r, Shape::Positive)
        } else {
            self.normal(&r)
        };
        Instance::ops(vec![sg, rh])
    }
}

type GenFn = fn(&mut Gen) -> Instance;
type EvalFn = fn(&Instance, f64) -> Result<Outcome>;

/// One audited law.
pub struct Law {
    pub name: &'static str,
    pub group: &'static str,
    pub statement: &'static str,
    belief_only: bool,
    /// Fewest registry variables an instance needs.
    min_vars: usize,
    generate: GenFn,
    evaluate: EvalFn,
}

fn eq(a: &Valuation, b: &Valuation, tol: f64) -> bool {
    same_valuation(a, b, tol)
}

/// Entrywise equality without normalizing either side.
fn raw_eq(a: &Valuation, b: &Valuation, tol: f64) -> bool {
    if a.calculus() != b.calculus() || a.domain() != b.domain() {
        return false;
    }
    match (a, b) {
        (Valuation::Tabular(x), Valuation::Tabular(y)) => {
            if x.calculus() == Calculus::Kappa {
                x.values() == y.values()
            } else {
                x.values()
                    .iter()
                    .zip(y.values())
                    .all(|(p, q)| (p - q).abs() <= tol)
            }
        }
        (Valuation::Mass(x), Valuation::Mass(y)) => masses_close(x, y, tol),
        _ => false,
    }
}

fn verdict(ok: bool, what: impl FnOnce() -> String) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail(what())
    }
}

fn union(a: &Valuation, b: &Valuation) -> Result<Domain> {
    a.domain().union(b.domain())
}

fn op(i: &Instance, k: usize) -> &Valuation {
    &i.operands[k]
}

macro_rules! law {
    ($name:expr, $group:expr, $stmt:expr, $gen:expr, $eval:expr) => {
        Law {
            name: $name,
            group: $group,
            statement: $stmt,
            belief_only: false,
            min_vars: 1,
            generate: $gen,
            evaluate: $eval,
        }
    };
}

/// The audited laws in report order.
pub fn laws() -> Vec<Law> {
    let mut v = vec![
        law!(
            "C1",
            "combination",
            "ρ⊕σ is a valuation for r∪s",
            |g| g.anys(2),
            |i, _| {
                let c = combine(op(i, 0), op(i, 1))?;
                let u = union(op(i, 0), op(i, 1))?;
                Ok(verdict(c.domain() == &u, || {
                    format!("domain {}", c.domain())
                }))
            }
        ),
        law!(
            "C2",
            "combination",
            "ρ⊕(σ⊕τ) = (ρ⊕σ)⊕τ",
            |g| g.anys(3),
            |i, tol| {
                let (a, b, c) = (op(i, 0), op(i, 1), op(i, 2));
                let l = combine(&combine(a, b)?, c)?;
                let r = combine(a, &combine(b, c)?)?;
                Ok(verdict(eq(&l, &r, tol), || "sides differ".into()))
            }
        ),
        law!(
            "C3",
            "combination",
            "ρ⊕σ = σ⊕ρ",
            |g| g.anys(2),
            |i, tol| {
                let l = combine(op(i, 0), op(i, 1))?;
                let r = combine(op(i, 1), op(i, 0))?;
                Ok(verdict(eq(&l, &r, tol), || "sides differ".into()))
            }
        ),
        law!(
            "C4",
            "combination",
            "σ⊕ζ_r = ζ_s⊕ρ = ζ_{r∪s}",
            |g| g.anys(2),
            |i, _| {
                let (s, r) = (op(i, 0), op(i, 1));
                let u = union(s, r)?;
                let a = combine(s, &zero_for(r.domain(), r.calculus()))?;
                let b = combine(&zero_for(s.domain(), s.calculus()), r)?;
                let ok = a.is_zero() && b.is_zero() && a.domain() == &u && b.domain() == &u;
                Ok(verdict(ok, || {
                    "combination with a zero valuation is not zero".into()
                }))
            }
        ),
        law!(
            "C5",
            "combination",
            "nonzero ρ, σ ⇒ ρ⊕σ normal or zero",
            |g| g.nonzeros(2),
            |i, _| {
                let f = classify(&combine(op(i, 0), op(i, 1))?);
                Ok(verdict(f.is_normal || f.is_zero, || {
                    format!("result is {f}")
                }))
            }
        ),
        law!(
            "C6",
            "combination",
            "proper ρ, σ ⇒ ρ⊕σ proper normal or zero",
            |g| g.nonzeros(2),
            |i, _| {
                let f = classify(&combine(op(i, 0), op(i, 1))?);
                Ok(verdict(f.is_proper_normal() || f.is_zero, || {
                    format!("result is {f}")
                }))
            }
        ),
        law!(
            "C7",
            "combination",
            "positive proper normal ρ, σ ⇒ ρ⊕σ positive proper normal",
            |g| g.shaped_pair(Shape::Positive),
            |i, _| {
                let f = classify(&combine(op(i, 0), op(i, 1))?);
                Ok(verdict(f.is_ppn(), || format!("result is {f}")))
            }
        ),
        law!(
            "empty-domain",
            "combination",
            "nonzero α_∅, β_∅ ⇒ α_∅⊕β_∅ = ι_∅",
            |g| {
                let (a, b) = (g.nonzero(&Domain::empty()), g.nonzero(&Domain::empty()));
                Instance::ops(vec![a, b])
            },
            |i, tol| {
                let c = combine(op(i, 0), op(i, 1))?;
                Ok(verdict(
                    raw_eq(&c, &identity_for(&Domain::empty(), c.calculus()), tol),
                    || "not the empty identity".into(),
                ))
            }
        ),
        law!(
            "M1",
            "marginalization",
            "σ↓(s−{X}) is a valuation for s−{X}",
            |g| g.with_var(None),
            |i, _| {
                let m = marginalize(op(i, 0), i.vars[0])?;
                let want = op(i, 0).domain().without(i.vars[0]);
                Ok(verdict(m.domain() == &want, || {
                    format!("domain {}", m.domain())
                }))
            }
        ),
        law!(
            "M2",
            "marginalization",
            "deleting X1 then X2 equals deleting X2 then X1",
            |g| {
                let s = loop {
                    let s = g.sub();
                    if s.len() >= 2 {
                        break s;
                    }
                };
                let sigma = g.any(&s);
                let mut vs = s.vars().to_vec();
                vs.shuffle(&mut g.rng);
                Instance::ops(vec![sigma]).with_vars(vs[..2].to_vec())
            },
            |i, tol| {
                let (x1, x2) = (i.vars[0], i.vars[1]);
                let s = op(i, 0);
                let a = marginalize(&marginalize(s, x1)?, x2)?;
                let b = marginalize(&marginalize(s, x2)?, x1)?;
                Ok(verdict(raw_eq(&a, &b, tol), || {
                    "deletion order matters".into()
                }))
            }
        ),
        law!(
            "M2-consonance",
            "marginalization",
            "(σ↓r)↓q = σ↓q for q ⊆ r ⊆ s",
            |g| {
                let s = g.sub();
                let sigma = g.any(&s);
                let r = g.sub_of(&s);
                let q = g.sub_of(&r);
                Instance::ops(vec![sigma]).with_subdomains(vec![r, q])
            },
            |i, tol| {
                let (r, q) = (&i.subdomains[0], &i.subdomains[1]);
                let a = marginalize_to(&marginalize_to(op(i, 0), r)?, q)?;
                let b = marginalize_to(op(i, 0), q)?;
                Ok(verdict(raw_eq(&a, &b, tol), || {
                    "two-stage marginal differs".into()
                }))
            }
        ),
        law!(
            "M3",
            "marginalization",
            "σ↓(s−{X}) nonzero iff σ nonzero",
            |g| g.with_var(None),
            |i, _| {
                let m = marginalize(op(i, 0), i.vars[0])?;
                Ok(verdict(m.is_zero() == op(i, 0).is_zero(), || {
                    format!("marginal is {}", classify(&m))
                }))
            }
        ),
        law!(
            "M4",
            "marginalization",
            "σ proper ⇒ σ↓(s−{X}) proper",
            |g| {
                let sh = Shape::nonzero(&mut g.rng);
                g.with_var(Some(sh))
            },
            |i, _| {
                let f = classify(&marginalize(op(i, 0), i.vars[0])?);
                Ok(verdict(f.is_proper, || format!("marginal is {f}")))
            }
        ),
        law!(
            "M5",
            "marginalization",
            "σ↓(s−{X}) normal iff σ normal",
            |g| g.with_var(None),
            |i, _| {
                let f = classify(&marginalize(op(i, 0), i.vars[0])?);
                Ok(verdict(f.is_normal == classify(op(i, 0)).is_normal, || {
                    format!("marginal is {f}")
                }))
            }
        ),
        law!(
            "M6",
            "marginalization",
            "σ positive proper normal ⇒ σ↓(s−{X}) positive proper normal",
            |g| g.with_var(Some(Shape::Positive)),
            |i, _| {
                let f = classify(&marginalize(op(i, 0), i.vars[0])?);
                Ok(verdict(f.is_ppn(), || format!("marginal is {f}")))
            }
        ),
        law!(
            "CM1",
            "combination-marginalization",
            "σ normal, r ⊆ s, δ an identity for σ↓r ⇒ σ⊕δ = σ",
            |g| g.normal_with_sub(),
            |i, tol| {
                let sigma = op(i, 0);
                let m = marginalize_to(sigma, &i.subdomains[0])?;
                let delta = support_identity(&m)?;
                if !is_identity_for(&delta, &m, tol)? {
                    return Ok(Outcome::Skip("support identity is not an identity".into()));
                }
                Ok(verdict(eq(&combine(sigma, &delta)?, sigma, tol), || {
                    "σ⊕δ ≠ σ".into()
                }))
            }
        ),
        law!(
            "CM2",
            "combination-marginalization",
            "X ∉ r, X ∈ s ⇒ (ρ⊕σ)↓((r∪s)−{X}) = ρ⊕σ↓(s−{X})",
            |g| g.split_on_var(),
            |i, tol| {
                let (rho, sigma, x) = (op(i, 0), op(i, 1), i.vars[0]);
                let l = marginalize(&combine(rho, sigma)?, x)?;
                let r = combine(rho, &marginalize(sigma, x)?)?;
                Ok(verdict(eq(&l, &r, tol), || "sides differ".into()))
            }
        ),
        law!(
            "marginal-to-first-domain",
            "combination-marginalization",
            "(ρ⊕σ)↓r = ρ⊕σ↓(r∩s)",
            |g| g.anys(2),
            |i, tol| {
                let (rho, sigma) = (op(i, 0), op(i, 1));
                let l = marginalize_to(&combine(rho, sigma)?, rho.domain())?;
                let r = combine(
                    rho,
                    &marginalize_to(sigma, &rho.domain().intersection(sigma.domain()))?,
                )?;
                Ok(verdict(eq(&l, &r, tol), || "sides differ".into()))
            }
        ),
        law!(
            "normal-absorbs-sub-identity",
            "identity",
            "σ normal, r ⊆ s ⇒ σ⊕ι_r = σ",
            |g| g.normal_with_sub(),
            |i, tol| {
                let sigma = op(i, 0);
                let c = combine(sigma, &identity_for(&i.subdomains[0], sigma.calculus()))?;
                Ok(verdict(raw_eq(&c, sigma, tol), || "σ⊕ι_r ≠ σ".into()))
            }
        ),
        law!(
            "empty-marginal-normalizes",
            "identity",
            "σ, ρ nonzero ⇒ σ⊕ρ↓∅ = σ⊕ι_∅",
            |g| g.nonzeros(2),
            |i, tol| {
                let (sigma, rho) = (op(i, 0), op(i, 1));
                let l = combine(sigma, &marginalize_to(rho, &Domain::empty())?)?;
                let r = combine(sigma, &identity_for(&Domain::empty(), sigma.calculus()))?;
                Ok(verdict(raw_eq(&l, &r, tol), || "sides differ".into()))
            }
        ),
        law!(
            "normal-iff-fixed-by-empty-identity",
            "identity",
            "σ normal or zero iff σ⊕ι_∅ = σ",
            |g| g.anys(1),
            |i, tol| {
                let sigma = op(i, 0);
                let f = classify(sigma);
                let fixed = raw_eq(
                    &combine(sigma, &identity_for(&Domain::empty(), sigma.calculus()))?,
                    sigma,
                    tol,
                );
                Ok(verdict((f.is_normal || f.is_zero) == fixed, || {
                    format!("{f}, fixed = {fixed}")
                }))
            }
        ),
        law!(
            "identity-absorbs-sub-identity",
            "identity",
            "r ⊆ s ⇒ ι_s⊕ι_r = ι_s",
            |g| {
                let s = g.sub();
                let r = g.sub_of(&s);
                identity_pair(g.calculus, &s, &r)
            },
            |i, tol| identity_law(i, tol, false)
        ),
        law!(
            "identity-union",
            "identity",
            "ι_s⊕ι_r = ι_{r∪s}",
            |g| {
                let (s, r) = (g.sub(), g.sub());
                identity_pair(g.calculus, &s, &r)
            },
            |i, tol| identity_law(i, tol, true)
        ),
        law!(
            "R1",
            "removal",
            "σ⊖ρ is a valuation for r∪s",
            |g| g.anys(2),
            |i, _| {
                let d = remove(op(i, 0), op(i, 1))?;
                let u = union(op(i, 0), op(i, 1))?;
                Ok(verdict(d.domain() == &u, || {
                    format!("domain {}", d.domain())
                }))
            }
        ),
        law!(
            "R2",
            "removal",
            "σ⊖ζ_r = ζ_s⊖ρ = ζ_{r∪s}",
            |g| g.anys(2),
            |i, _| {
                let (s, r) = (op(i, 0), op(i, 1));
                let u = union(s, r)?;
                let a = remove(s, &zero_for(r.domain(), r.calculus()))?;
                let b = remove(&zero_for(s.domain(), s.calculus()), r)?;
                let ok = a.is_zero() && b.is_zero() && a.domain() == &u && b.domain() == &u;
                Ok(verdict(ok, || {
                    "removal involving a zero valuation is not zero".into()
                }))
            }
        ),
        law!(
            "R3",
            "removal",
            "σ, ρ nonzero ⇒ σ⊖ρ normal or zero",
            |g| g.nonzeros(2),
            |i, _| {
                let f = classify(&remove(op(i, 0), op(i, 1))?);
                Ok(verdict(f.is_normal || f.is_zero, || {
                    format!("result is {f}")
                }))
            }
        ),
        law!(
            "R4",
            "removal",
            "ρ normal ⇒ ρ⊖ρ is an identity for ρ",
            |g| {
                let r = g.sub();
                Instance::ops(vec![g.normal(&r)])
            },
            |i, tol| {
                let rho = op(i, 0);
                let d = remove(rho, rho)?;
                let ok = classify(&d).is_normal && is_identity_for(&d, rho, tol)?;
                Ok(verdict(ok, || {
                    format!("ρ⊖ρ is {} and not an identity", classify(&d))
                }))
            }
        ),
        law!(
            "CR.1",
            "removal",
            "(π⊕θ)⊖ρ = π⊕(θ⊖ρ)",
            |g| g.anys(3),
            |i, tol| {
                let (p, t, r) = (op(i, 0), op(i, 1), op(i, 2));
                let l = remove(&combine(p, t)?, r)?;
                let rr = combine(p, &remove(t, r)?)?;
                Ok(verdict(eq(&l, &rr, tol), || "sides differ".into()))
            }
        ),
        law!(
            "CR.2",
            "removal",
            "π⊖(θ⊕ρ) = (π⊖θ)⊖ρ",
            |g| g.anys(3),
            |i, tol| {
                let (p, t, r) = (op(i, 0), op(i, 1), op(i, 2));
                let l = remove(p, &combine(t, r)?)?;
                let rr = remove(&remove(p, t)?, r)?;
                Ok(verdict(eq(&l, &rr, tol), || "sides differ".into()))
            }
        ),
        law!(
            "CR.3",
            "removal",
            "π⊖(θ⊖ρ) = (π⊖θ)⊕ρ",
            |g| g.anys(3),
            |i, tol| {
                let (p, t, r) = (op(i, 0), op(i, 1), op(i, 2));
                let l = remove(p, &remove(t, r)?)?;
                let rr = combine(&remove(p, t)?, r)?;
                Ok(verdict(eq(&l, &rr, tol), || "sides differ".into()))
            }
        ),
        law!(
            "MR",
            "removal",
            "X ∈ s, X ∉ r ⇒ (σ⊖ρ)↓((r∪s)−{X}) = σ↓(s−{X})⊖ρ",
            |g| {
                let i = g.split_on_var();
                let (rho, sigma) = (i.operands[0].clone(), i.operands[1].clone());
                Instance::ops(vec![sigma, rho]).with_vars(i.vars)
            },
            |i, tol| {
                let (sigma, rho, x) = (op(i, 0), op(i, 1), i.vars[0]);
                let l = marginalize(&remove(sigma, rho)?, x)?;
                let r = remove(&marginalize(sigma, x)?, rho)?;
                Ok(verdict(eq(&l, &r, tol), || "sides differ".into()))
            }
        ),
        law!(
            "remove-restores-marginal",
            "removal",
            "ρ normal ⇒ ((σ⊕ρ)⊖ρ)↓s = σ⊕ι_∅",
            |g| g.sigma_rho(None, false, false),
            |i, tol| {
                let (sigma, rho) = (op(i, 0), op(i, 1));
                let l = marginalize_to(&remove(&combine(sigma, rho)?, rho)?, sigma.domain())?;
                Ok(verdict(eq(&l, &normalize(sigma), tol), || {
                    "marginal differs from normalized σ".into()
                }))
            }
        ),
        law!(
            "remove-restores-normal",
            "removal",
            "σ, ρ normal ⇒ ((σ⊕ρ)⊖ρ)↓s = σ",
            |g| {
                let sh = Shape::normal(&mut g.rng);
                g.sigma_rho(Some(sh), false, false)
            },
            |i, tol| {
                let (sigma, rho) = (op(i, 0), op(i, 1));
                let l = marginalize_to(&remove(&combine(sigma, rho)?, rho)?, sigma.domain())?;
                Ok(verdict(raw_eq(&l, sigma, tol), || {
                    "marginal differs from σ".into()
                }))
            }
        ),
        law!(
            "remove-restores-product-marginal",
            "removal",
            "ρ normal ⇒ ((σ⊕ρ)⊖ρ)↓s⊕ρ = σ⊕ρ",
            |g| g.sigma_rho(None, false, false),
            |i, tol| {
                let (sigma, rho) = (op(i, 0), op(i, 1));
                let sr = combine(sigma, rho)?;
                let l = combine(&marginalize_to(&remove(&sr, rho)?, sigma.domain())?, rho)?;
                Ok(verdict(eq(&l, &sr, tol), || "sides differ".into()))
            }
        ),
        law!(
            "remove-restores-product",
            "removal",
            "ρ normal ⇒ ((σ⊕ρ)⊖ρ)⊕ρ = σ⊕ρ",
            |g| g.sigma_rho(None, false, false),
            |i, tol| {
                let (sigma, rho) = (op(i, 0), op(i, 1));
                let sr = combine(sigma, rho)?;
                let l = combine(&remove(&sr, rho)?, rho)?;
                Ok(verdict(eq(&l, &sr, tol), || "sides differ".into()))
            }
        ),
        law!(
            "self-removal-positive",
            "removal",
            "ρ positive proper normal ⇒ ρ⊖ρ = ι_r",
            |g| {
                let r = g.sub();
                Instance::ops(vec![g.val(&r, Shape::Positive)])
            },
            |i, tol| {
                let rho = op(i, 0);
                let d = remove(rho, rho)?;
                Ok(verdict(
                    raw_eq(&d, &identity_for(rho.domain(), rho.calculus()), tol),
                    || "ρ⊖ρ ≠ ι_r".into(),
                ))
            }
        ),
        law!(
            "remove-positive-leaves-identity",
            "removal",
            "ρ positive proper normal ⇒ (σ⊕ρ)⊖ρ = σ⊕ι_r",
            |g| g.sigma_rho(None, true, false),
            |i, tol| {
                let (sigma, rho) = (op(i, 0), op(i, 1));
                let l = remove(&combine(sigma, rho)?, rho)?;
                let r = combine(sigma, &identity_for(rho.domain(), rho.calculus()))?;
                Ok(verdict(eq(&l, &r, tol), || "sides differ".into()))
            }
        ),
        law!(
            "remove-positive-restores",
            "removal",
            "σ normal, ρ positive proper normal, r ⊆ s ⇒ (σ⊕ρ)⊖ρ = σ",
            |g| {
                let sh = Shape::normal(&mut g.rng);
                g.sigma_rho(Some(sh), true, true)
            },
            |i, tol| {
                let (sigma, rho) = (op(i, 0), op(i, 1));
                let l = remove(&combine(sigma, rho)?, rho)?;
                Ok(verdict(raw_eq(&l, sigma, tol), || "(σ⊕ρ)⊖ρ ≠ σ".into()))
            }
        ),
        law!(
            "conditional-recombines",
            "removal",
            "σ normal, r ⊆ s ⇒ (σ⊖σ↓r)⊕σ↓r = σ",
            |g| g.normal_with_sub(),
            |i, tol| {
                let sigma = op(i, 0);
                let m = marginalize_to(sigma, &i.subdomains[0])?;
                let l = combine(&remove(sigma, &m)?, &m)?;
                Ok(verdict(raw_eq(&l, sigma, tol), || {
                    "recombination differs from σ".into()
                }))
            }
        ),
        law!(
            "conditional-normal",
            "removal",
            "σ normal, r ⊆ s ⇒ σ⊖σ↓r normal",
            |g| g.normal_with_sub(),
            |i, _| {
                let sigma = op(i, 0);
                let m = marginalize_to(sigma, &i.subdomains[0])?;
                let f = classify(&remove(sigma, &m)?);
                Ok(verdict(f.is_normal, || format!("conditional is {f}")))
            }
        ),
        law!(
            "remove-sub-identity",
            "removal",
            "σ normal, r ⊆ s ⇒ σ⊖ι_r = σ",
            |g| g.normal_with_sub(),
            |i, tol| {
                let sigma = op(i, 0);
                let l = remove(sigma, &identity_for(&i.subdomains[0], sigma.calculus()))?;
                Ok(verdict(raw_eq(&l, sigma, tol), || "σ⊖ι_r ≠ σ".into()))
            }
        ),
        law!(
            "conditional-marginal-identity",
            "removal",
            "σ normal, r ⊆ s ⇒ (σ⊖σ↓r)↓r is an identity for σ↓r",
            |g| g.normal_with_sub(),
            |i, tol| {
                let sigma = op(i, 0);
                let r = &i.subdomains[0];
                let m = marginalize_to(sigma, r)?;
                let d = marginalize_to(&remove(sigma, &m)?, r)?;
                Ok(verdict(is_identity_for(&d, &m, tol)?, || {
                    "not an identity".into()
                }))
            }
        ),
    ];
    for law in v.iter_mut().filter(|l| l.name == "M2") {
        law.min_vars = 2;
    }
    v.push(Law {
        name: "commonality-roundtrip",
        group: "belief transforms",
        statement: "Möbius inversion of the commonality function returns the mass function",
        belief_only: true,
        min_vars: 1,
        generate: |g| g.anys(1),
        evaluate: |i, tol| {
            let m = op(i, 0).as_mass().expect("belief operand");
            let back = commonality_to_mass(&mass_to_commonality(m)?);
            Ok(verdict(masses_close(&back, m, tol), || {
                "round trip changed the masses".into()
            }))
        },
    });
    v.push(Law {
        name: "dempster-commonality",
        group: "belief transforms",
        statement: "Dempster's rule equals the normalized product of commonality functions",
        belief_only: true,
        min_vars: 1,
        generate: |g| g.anys(2),
        evaluate: |i, tol| {
            let (a, b) = (op(i, 0), op(i, 1));
            let u = union(a, b)?;
            let qa = mass_to_commonality(&a.as_mass().unwrap().extend(&u)?)?;
            let qb = mass_to_commonality(&b.as_mass().unwrap().extend(&u)?)?;
            let q = qa
                .values()
                .iter()
                .zip(qb.values())
                .map(|(x, y)| x * y)
                .collect();
            let oracle = commonality_to_mass(&CommonalityTable::new(u, q)?).normalized();
            let c = combine(a, b)?;
            Ok(verdict(
                masses_close(c.as_mass().unwrap(), &oracle, tol),
                || "Dempster differs from the oracle".into(),
            ))
        },
    });
    v
}

fn identity_pair(c: Calculus, s: &Domain, r: &Domain) -> Instance {
    Instance::ops(vec![identity_for(s, c), identity_for(r, c)])
}

/// `ι_s⊕ι_r` against `ι_{r∪s}` (`to_union`) or `ι_s`.
fn identity_law(i: &Instance, tol: f64, to_union: bool) -> Result<Outcome> {
    let (is, ir) = (op(i, 0), op(i, 1));
    let c = is.calculus();
    let l = combine(is, ir)?;
    let want = if to_union {
        identity_for(&union(is, ir)?, c)
    } else {
        is.clone()
    };
    Ok(verdict(raw_eq(&l, &want, tol), || {
        "identities do not combine to the expected identity".into()
    }))
}

/// Evaluates `law` on `inst` in calculus `c`; removal failures become skips.
pub fn evaluate_law(law: &Law, c: Calculus, inst: &Instance, tol: f64) -> Outcome {
    debug_assert!(inst.operands.iter().all(|v| v.calculus() == c));
    match (law.evaluate)(inst, tol) {
        Ok(o) => o,
        Err(e) => match skip_reason(&e) {
            Some(reason) => Outcome::Skip(reason),
            None => Outcome::Fail(format!("error: {e}")),
        },
    }
}

fn skip_reason(e: &Error) -> Option<String> {
    match e {
        Error::InconsistentRemoval { .. } => {
            Some("removal undefined: divisor vanishes where the dividend does not".into())
        }
        Error::RemovalUndefined { .. } => {
            Some("removal undefined: zero commonality divisor".into())
        }
        _ => None,
    }
}

fn tolerance(c: Calculus) -> f64 {
    if c == Calculus::Kappa {
        0.0
    } else {
        DEFAULT_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomRow {
    pub name: &'static str,
    pub group: &'static str,
    pub statement: &'static str,
    pub checked: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub skip_reasons: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditCounterexample {
    pub law: &'static str,
    pub trial: u64,
    pub detail: String,
    pub registry: Registry,
    pub instance: Instance,
}

impl AuditCounterexample {
    pub fn to_json(&self, calculus: Calculus) -> Value {
        let doc = ModelDocument::from_valuations(&self.registry, calculus, &self.instance.operands);
        json!({
            "law": self.law,
            "trial": self.trial,
            "detail": self.detail,
            "vars": self.instance.vars.iter().map(|&v| self.registry.name(v)).collect::<Vec<_>>(),
            "subdomains": self.instance.subdomains.iter().map(|d| self.registry.names_of(d)).collect::<Vec<_>>(),
            "operands": serde_json::to_value(doc).expect("documents serialize"),
        })
    }

    /// Re-evaluates the stored instance; `true` when it still fails.
    pub fn replay(&self, calculus: Calculus) -> bool {
        let laws = laws();
        let law = laws.iter().find(|l| l.name == self.law).expect("known law");
        matches!(
            evaluate_law(law, calculus, &self.instance, tolerance(calculus)),
            Outcome::Fail(_)
        )
    }
}

/// Rebuilds a counterexample from its JSON form and re-evaluates it; `true`
/// when the serialized operands still violate the law.
pub fn replay_json(calculus: Calculus, v: &Value) -> Result<bool> {
    let bad = |m: &str| Error::Parse(format!("counterexample: {m}"));
    let name = v["law"].as_str().ok_or_else(|| bad("missing law"))?;
    let laws = laws();
    let law = laws
        .iter()
        .find(|l| l.name == name)
        .ok_or_else(|| bad("unknown law"))?;
    let doc: ModelDocument =
        serde_json::from_value(v["operands"].clone()).map_err(|e| bad(&e.to_string()))?;
    let reg = doc.registry()?;
    let operands = doc
        .valuations
        .iter()
        .map(|s| s.to_valuation(&reg, doc.calculus))
        .collect::<Result<Vec<_>>>()?;
    let names = |x: &Value| -> Result<Vec<String>> {
        serde_json::from_value(x.clone()).map_err(|e| bad(&e.to_string()))
    };
    let vars = names(&v["vars"])?
        .iter()
        .map(|n| reg.id(n))
        .collect::<Result<Vec<_>>>()?;
    let subs: Vec<Vec<String>> =
        serde_json::from_value(v["subdomains"].clone()).map_err(|e| bad(&e.to_string()))?;
    let subdomains = subs
        .iter()
        .map(|d| reg.domain_of(&d.iter().map(String::as_str).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let inst = Instance {
        operands,
        vars,
        subdomains,
    };
    Ok(matches!(
        evaluate_law(law, calculus, &inst, tolerance(calculus)),
        Outcome::Fail(_)
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub calculus: Calculus,
    pub seed: u64,
    pub trials: u64,
    pub caps: AuditCaps,
    pub rows: Vec<AxiomRow>,
    pub counterexamples: Vec<AuditCounterexample>,
}

impl AuditReport {
    pub fn row(&self, name: &str) -> Option<&AxiomRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn total_failures(&self) -> usize {
        self.rows.iter().map(|r| r.failed).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "axiom audit: calculus={} seed={} trials={} max-vars={} max-states={}",
            self.calculus, self.seed, self.trials, self.caps.max_vars, self.caps.max_states
        );
        let w = self
            .rows
            .iter()
            .map(|r| r.name.len())
            .max()
            .unwrap_or(4)
            .max(4);
        let _ = writeln!(
            out,
            "{:<w$}  {:>7}  {:>7}  {:>7}  {:>7}",
            "law", "checked", "passed", "failed", "skipped"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<w$}  {:>7}  {:>7}  {:>7}  {:>7}  {}",
                r.name, r.checked, r.passed, r.failed, r.skipped, r.statement
            );
        }
        let (c, p, f, s) = self.rows.iter().fold((0, 0, 0, 0), |a, r| {
            (
                a.0 + r.checked,
                a.1 + r.passed,
                a.2 + r.failed,
                a.3 + r.skipped,
            )
        });
        let _ = writeln!(out, "total: checked={c} passed={p} failed={f} skipped={s}");
        let with_skips: Vec<_> = self.rows.iter().filter(|r| r.skipped > 0).collect();
        if !with_skips.is_empty() {
            let _ = writeln!(out, "skip reasons:");
            for r in with_skips {
                for (why, n) in &r.skip_reasons {
                    let _ = writeln!(out, "  {}: {why} ({n})", r.name);
                }
            }
        }
        if !self.counterexamples.is_empty() {
            let _ = writeln!(
                out,
                "counterexamples (first {MAX_STORED_COUNTEREXAMPLES} per law):"
            );
            for cx in &self.counterexamples {
                let _ = writeln!(out, "  {} trial {}: {}", cx.law, cx.trial, cx.detail);
                let _ = writeln!(out, "    {}", cx.to_json(self.calculus)["operands"]);
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "calculus": self.calculus.as_str(),
            "seed": self.seed,
            "trials": self.trials,
            "caps": {"max_vars": self.caps.max_vars, "max_states": self.caps.max_states},
            "rows": self.rows.iter().map(|r| json!({
                "law": r.name,
                "group": r.group,
                "statement": r.statement,
                "checked": r.checked,
                "passed": r.passed,
                "failed": r.failed,
                "skipped": r.skipped,
                "skip_reasons": r.skip_reasons,
            })).collect::<Vec<_>>(),
            "total_failures": self.total_failures(),
            "counterexamples": self.counterexamples.iter().map(|c| c.to_json(self.calculus)).collect::<Vec<_>>(),
        })
    }
}

fn check_caps(c: Calculus, caps: AuditCaps) -> Result<()> {
    let cells = (caps.max_states.max(1) as u64)
        .checked_pow(caps.max_vars as u32)
        .unwrap_or(u64::MAX);
    let limit = if c == Calculus::Belief {
        MAX_COMMONALITY_FRAME as u64
    } else {
        BRUTE_FORCE_LIMIT
    };
    if caps.max_vars == 0 || cells > limit {
        return Err(Error::Capacity {
            needed: cells,
            limit,
        });
    }
    Ok(())
}

/// Runs every law applicable to `calculus` for `trials` trials.
pub fn run_axiom_suite(
    calculus: Calculus,
    seed: u64,
    trials: u64,
    caps: AuditCaps,
) -> Result<AuditReport> {
    check_caps(calculus, caps)?;
    let tol = tolerance(calculus);
    let laws: Vec<Law> = laws()
        .into_iter()
        .filter(|l| !l.belief_only || calculus == Calculus::Belief)
        .collect();
    let mut rows: Vec<AxiomRow> = laws
        .iter()
        .map(|l| AxiomRow {
            name: l.name,
            group: l.group,
            statement: l.statement,
            checked: 0,
            passed: 0,
            failed: 0,
            skipped: 0,
            skip_reasons: BTreeMap::new(),
        })
        .collect();
    let mut stored: Vec<Vec<AuditCounterexample>> = vec![Vec::new(); laws.len()];
    for trial in 0..trials {
        for (k, law) in laws.iter().enumerate() {
            let row = &mut rows[k];
            row.checked += 1;
            if caps.max_vars < law.min_vars {
                row.skipped += 1;
                *row.skip_reasons
                    .entry("caps allow too few variables".into())
                    .or_insert(0) += 1;
                continue;
            }
            let mut rng = trial_rng(seed, trial * 256 + k as u64);
            let reg = loop {
                let reg = random_registry(&mut rng, caps.max_vars, caps.max_states);
                if reg.len() >= law.min_vars {
                    break reg;
                }
            };
            let full = reg.full_domain();
            let mut g = Gen {
                rng,
                calculus,
                reg,
                full,
            };
            let inst = (law.generate)(&mut g);
            let outcome = evaluate_law(law, calculus, &inst, tol);
            if let Outcome::Fail(detail) = &outcome {
                if stored[k].len() < MAX_STORED_COUNTEREXAMPLES {
                    stored[k].push(AuditCounterexample {
                        law: law.name,
                        trial,
                        detail: detail.clone(),
                        registry: g.reg,
                        instance: inst,
                    });
                }
            }
            match outcome {
                Outcome::Pass => row.passed += 1,
                Outcome::Fail(_) => row.failed += 1,
                Outcome::Skip(why) => {
                    row.skipped += 1;
                    *row.skip_reasons.entry(why).or_insert(0) += 1;
                }
            }
        }
    }
    Ok(AuditReport {
        calculus,
        seed,
        trials,
        caps,
        rows,
        counterexamples: stored.into_iter().flatten().collect(),
    })
}

/// Re-parses the operands of every stored counterexample and confirms that
/// each still fails.
pub fn replay_all(report: &AuditReport) -> Result<bool> {
    for cx in &report.counterexamples {
        if !cx.replay(report.calculus)
            || !replay_json(report.calculus, &cx.to_json(report.calculus))?
        {
            return Ok(false);
        }
    }
    Ok(true)
}
