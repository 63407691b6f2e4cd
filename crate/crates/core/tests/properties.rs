use proptest::prelude::*;
use rand::Rng;

use vbs::fusion::{
    brute_force_marginal, elimination_order, marginal_by_fusion, FactoredModel, Heuristic,
};
use vbs::model::{parse_model, ModelDocument, ParseOptions};
use vbs::random::{
    random_model, random_plan, random_registry, random_subdomain, random_valuation, trial_rng,
    Shape,
};
use vbs::valuation::same_valuation;
use vbs::{classify, combine, marginalize_to, Calculus, Domain, Valuation};

fn tol(c: Calculus) -> f64 {
    if c == Calculus::Kappa {
        0.0
    } else {
        1e-9
    }
}

fn calculus() -> impl Strategy<Value = Calculus> {
    prop::sample::select(Calculus::ALL.to_vec())
}

fn tabular() -> impl Strategy<Value = Calculus> {
    prop::sample::select(vec![
        Calculus::Probability,
        Calculus::Kappa,
        Calculus::Possibility,
    ])
}

fn caps(c: Calculus) -> (usize, usize) {
    if c == Calculus::Belief {
        (2, 2)
    } else {
        (3, 3)
    }
}

/// Three valuations on random subdomains of one random registry.
fn triple(c: Calculus, seed: u64) -> (Valuation, Valuation, Valuation) {
    let mut rng = trial_rng(seed, 0);
    let (v, s) = caps(c);
    let reg = random_registry(&mut rng, v, s);
    let full = reg.full_domain();
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        let d = random_subdomain(rng, &full, 0.6);
        let shape = Shape::any(rng);
        random_valuation(rng, c, &d, shape)
    };
    (draw(&mut rng), draw(&mut rng), draw(&mut rng))
}

/// Joint-table oracle for the tabular calculi, written independently of the
/// library's operators: combine pointwise over the full frame, marginalize by
/// sum / max / min.
fn tabular_oracle(model: &FactoredModel, target: &Domain) -> Vec<f64> {
    let c = model.calculus();
    let full = model.variables().clone();
    let unit = if c == Calculus::Kappa { 0.0 } else { 1.0 };
    let pick = |d: &Domain, states: &[usize]| {
        let sub: Vec<usize> = d
            .vars()
            .iter()
            .map(|v| states[full.vars().iter().position(|w| w == v).unwrap()])
            .collect();
        d.encode(&sub)
    };
    let empty_value = match c {
        Calculus::Kappa => f64::INFINITY,
        _ => 0.0,
    };
    let mut out = vec![empty_value; target.size()];
    for i in 0..full.size() {
        let states = full.decode(i);
        let mut x = unit;
        for f in model.factors() {
            let y = f.values()[pick(f.domain(), &states)];
            x = if c == Calculus::Kappa { x + y } else { x * y };
        }
        let j = pick(target, &states);
        out[j] = match c {
            Calculus::Probability => out[j] + x,
            Calculus::Possibility => out[j].max(x),
            Calculus::Kappa => out[j].min(x),
            Calculus::Belief => unreachable!(),
        };
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn combination_is_commutative_and_associative(c in calculus(), seed in any::<u64>()) {
        let (a, b, d) = triple(c, seed);
        let ab = combine(&a, &b).unwrap();
        prop_assert!(same_valuation(&ab, &combine(&b, &a).unwrap(), tol(c)));
        let left = combine(&ab, &d).unwrap();
        let right = combine(&a, &combine(&b, &d).unwrap()).unwrap();
        prop_assert!(same_valuation(&left, &right, tol(c)));
    }

    #[test]
    fn marginalization_order_does_not_matter(c in calculus(), seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 1);
        let (v, s) = caps(c);
        let reg = random_registry(&mut rng, v.max(2), s);
        let full = reg.full_domain();
        prop_assume!(full.len() >= 2);
        let shape = Shape::any(&mut rng);
        let sigma = random_valuation(&mut rng, c, &full, shape);
        let (x, y) = (full.vars()[0], full.vars()[1]);
        let a = vbs::marginalize(&vbs::marginalize(&sigma, x).unwrap(), y).unwrap();
        let b = vbs::marginalize(&vbs::marginalize(&sigma, y).unwrap(), x).unwrap();
        prop_assert!(same_valuation(&a, &b, tol(c)));
    }

    #[test]
    fn marginal_of_combination_moves_inside(c in calculus(), seed in any::<u64>()) {
        let (rho, sigma, _) = triple(c, seed);
        let r = rho.domain().clone();
        let left = marginalize_to(&combine(&rho, &sigma).unwrap(), &r).unwrap();
        let inner = marginalize_to(&sigma, &r.intersection(sigma.domain())).unwrap();
        let right = combine(&rho, &inner).unwrap();
        prop_assert!(same_valuation(&left, &right, tol(c)));
    }

    #[test]
    fn fusion_matches_brute_force_and_oracle(c in calculus(), seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = trial_rng(seed, 2);
        let n = if c == Calculus::Belief { n.min(3) } else { n };
        let model = random_model(&mut rng, c, n, 5);
        let target = random_subdomain(&mut rng, model.variables(), 0.4);
        let plan = random_plan(&mut rng, &model, &target);
        let fused = marginal_by_fusion(&model, &target, &plan).unwrap();
        let brute = brute_force_marginal(&model, &target).unwrap();
        prop_assert!(same_valuation(&fused, &brute, tol(c)), "{fused:?} vs {brute:?}");
        if c.is_tabular() {
            let oracle = Valuation::table(c, target.clone(), tabular_oracle(&model, &target)).unwrap();
            prop_assert!(same_valuation(&fused, &oracle, tol(c)), "{fused:?} vs oracle {oracle:?}");
        }
    }

    #[test]
    fn heuristics_agree(c in tabular(), seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 3);
        let n = rng.gen_range(2..=6);
        let model = random_model(&mut rng, c, n, 6);
        let target = random_subdomain(&mut rng, model.variables(), 0.3);
        let results: Vec<Valuation> = Heuristic::ALL
            .iter()
            .map(|&h| {
                let plan = elimination_order(&model, &target, h).unwrap();
                marginal_by_fusion(&model, &target, &plan).unwrap()
            })
            .collect();
        for r in &results[1..] {
            prop_assert!(same_valuation(&results[0], r, tol(c)));
        }
    }

    #[test]
    fn model_documents_round_trip(c in calculus(), seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 4);
        let model = random_model(&mut rng, c, if c == Calculus::Belief { 3 } else { 5 }, 5);
        let text = ModelDocument::from_model(&model).to_json();
        let back = parse_model(&text, ParseOptions::default()).unwrap();
        prop_assert_eq!(back.factors(), model.factors());
        prop_assert_eq!(ModelDocument::from_model(&back).to_json(), text);
    }

    #[test]
    fn classes_form_the_lattice(c in calculus(), seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 5);
        let (v, s) = caps(c);
        let reg = random_registry(&mut rng, v, s);
        for shape in Shape::ALL {
            let x = random_valuation(&mut rng, c, &reg.full_domain(), shape);
            let f = classify(&x);
            prop_assert!(f.is_consistent(), "{f}");
            match shape {
                Shape::Zero => prop_assert!(f.is_zero),
                Shape::Proper => prop_assert!(f.is_proper && !f.is_zero),
                Shape::ProperNormal => prop_assert!(f.is_proper_normal()),
                Shape::Positive => prop_assert!(f.is_positive),
            }
        }
    }
}
