//! Seeded generators for registries, valuations of each class, and factored
//! models. Everything is driven by a caller-supplied RNG so that audits are
//! reproducible from `(seed, trial)`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculi::{ConfigSet, MassValuation};
use crate::domain::{Domain, Registry, Variable};
use crate::fusion::{EliminationPlan, FactoredModel, Heuristic};
use crate::valuation::{normalize, zero_for, Calculus, TabularValuation, Valuation};

/// Independent generator for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Class a generated valuation is shaped into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Zero,
    /// Nonzero, nonnegative, deliberately not normal.
    Proper,
    /// Proper normal, possibly with zero cells.
    ProperNormal,
    /// Positive proper normal.
    Positive,
}

impl Shape {
    pub const ALL: [Shape; 4] = [
        Shape::Zero,
        Shape::Proper,
        Shape::ProperNormal,
        Shape::Positive,
    ];

    /// A shape drawn with most weight on the nonzero classes.
    pub fn any<R: Rng>(rng: &mut R) -> Shape {
        match rng.gen_range(0..20) {
            0 => Shape::Zero,
            1..=6 => Shape::Proper,
            7..=13 => Shape::ProperNormal,
            _ => Shape::Positive,
        }
    }

    pub fn nonzero<R: Rng>(rng: &mut R) -> Shape {
        *[Shape::Proper, Shape::ProperNormal, Shape::Positive]
            .choose(rng)
            .unwrap()
    }

    pub fn normal<R: Rng>(rng: &mut R) -> Shape {
        if rng.gen_bool(0.5) {
            Shape::ProperNormal
        } else {
            Shape::Positive
        }
    }
}

/// A registry of `1..=max_vars` variables named `V0, V1, …` with
/// `2..=max_states` states each (a single state when `max_states < 2`).
pub fn random_registry<R: Rng>(rng: &mut R, max_vars: usize, max_states: usize) -> Registry {
    let n = rng.gen_range(1..=max_vars.max(1));
    let vars = (0..n)
        .map(|i| {
            let k = if max_states < 2 {
                1
            } else {
                rng.gen_range(2..=max_states)
            };
            Variable::with_card(format!("V{i}"), k)
        })
        .collect();
    Registry::new(vars).expect("generated names are unique")
}

/// Each member of `d` kept independently with probability `p`.
pub fn random_subdomain<R: Rng>(rng: &mut R, d: &Domain, p: f64) -> Domain {
    let mask = (0..d.len()).fold(0u64, |m, i| if rng.gen_bool(p) { m | 1 << i } else { m });
    d.select(mask)
}

fn unit<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// Chance that a cell of a non-positive valuation is zeroed.
const SPARSE_CELL: f64 = 0.2;

pub fn random_valuation<R: Rng>(
    rng: &mut R,
    calculus: Calculus,
    d: &Domain,
    shape: Shape,
) -> Valuation {
    match calculus {
        Calculus::Belief => random_mass(rng, d, shape),
        c => random_table(rng, c, d, shape),
    }
}

fn random_table<R: Rng>(rng: &mut R, c: Calculus, d: &Domain, shape: Shape) -> Valuation {
    if shape == Shape::Zero {
        return zero_for(d, c);
    }
    let n = d.size();
    let zero = if c == Calculus::Kappa {
        f64::INFINITY
    } else {
        0.0
    };
    let mut values: Vec<f64> = (0..n)
        .map(|_| match c {
            Calculus::Kappa => rng.gen_range(0..=5) as f64,
            _ => unit(rng),
        })
        .collect();
    if shape != Shape::Positive && n > 1 && rng.gen_bool(0.5) {
        let keep = rng.gen_range(0..n);
        for (i, v) in values.iter_mut().enumerate() {
            if i != keep && rng.gen_bool(SPARSE_CELL) {
                *v = zero;
            }
        }
    }
    let table = Valuation::Tabular(TabularValuation::from_parts(c, d.clone(), values));
    let normal = normalize(&table);
    if shape != Shape::Proper {
        return normal;
    }
    let mut values = normal.values().to_vec();
    match c {
        Calculus::Probability => {
            let scale = rng.gen_range(0.2..3.0);
            values.iter_mut().for_each(|v| *v *= scale);
        }
        Calculus::Possibility => {
            let scale = rng.gen_range(0.1..0.9);
            values.iter_mut().for_each(|v| *v *= scale);
        }
        Calculus::Kappa => {
            let shift = rng.gen_range(1..=3) as f64;
            values.iter_mut().for_each(|v| *v += shift);
        }
        Calculus::Belief => unreachable!(),
    }
    TabularValuation::from_parts(c, d.clone(), values).into()
}

fn random_subset<R: Rng>(rng: &mut R, frame: usize) -> ConfigSet {
    loop {
        let s = ConfigSet::from_indices(frame, (0..frame).filter(|_| rng.gen_bool(0.5)));
        if !s.is_empty() {
            return s;
        }
    }
}

fn random_mass<R: Rng>(rng: &mut R, d: &Domain, shape: Shape) -> Valuation {
    if shape == Shape::Zero {
        return MassValuation::zero(d.clone()).into();
    }
    let frame = d.size();
    let k = rng.gen_range(1..=3);
    let mut focal: Vec<(ConfigSet, f64)> = (0..k)
        .map(|_| (random_subset(rng, frame), unit(rng)))
        .collect();
    if shape == Shape::Positive {
        focal.push((ConfigSet::full(frame), unit(rng)));
    }
    let m = MassValuation::new(d.clone(), focal).expect("generated focal sets are valid");
    let m = m.normalized();
    if shape != Shape::Proper {
        return m.into();
    }
    let scale = rng.gen_range(0.2..3.0);
    let focal = m
        .focal()
        .iter()
        .map(|(s, &v)| (s.clone(), v * scale))
        .collect::<Vec<_>>();
    MassValuation::new(d.clone(), focal).unwrap().into()
}

/// Random factored model over `n_vars` binary variables with
/// `1..=max_factors` factors on domains of one to three variables.
pub fn random_model<R: Rng>(
    rng: &mut R,
    calculus: Calculus,
    n_vars: usize,
    max_factors: usize,
) -> FactoredModel {
    let names: Vec<String> = (0..n_vars).map(|i| format!("V{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let reg = Registry::binary(&refs);
    let full = reg.full_domain();
    let m = rng.gen_range(1..=max_factors.max(1));
    let factors = (0..m)
        .map(|_| {
            let arity = rng.gen_range(1..=3.min(n_vars));
            let mut ids: Vec<usize> = (0..n_vars).collect();
            ids.shuffle(rng);
            let d = full.select(ids[..arity].iter().fold(0, |m, &i| m | 1 << i));
            let shape = match rng.gen_range(0..40) {
                0 => Shape::Zero,
                _ => Shape::nonzero(rng),
            };
            random_valuation(rng, calculus, &d, shape)
        })
        .collect();
    FactoredModel::new(reg, calculus, factors).expect("generated factors fit the registry")
}

/// A uniformly shuffled elimination order for the variables outside `keep`.
pub fn random_plan<R: Rng>(rng: &mut R, model: &FactoredModel, keep: &Domain) -> EliminationPlan {
    let mut order = model.variables().difference(keep).vars().to_vec();
    order.shuffle(rng);
    EliminationPlan {
        order,
        heuristic: Heuristic::Declared,
    }
}
