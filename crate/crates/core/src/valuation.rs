//! The calculus-independent valuation abstraction: tags, the two concrete
//! representations, classification into the coherence classes, identities
//! and equality up to normalization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calculi::belief::MassValuation;
use crate::calculi::{belief, tabular};
use crate::domain::Domain;
use crate::error::{Error, Result};

/// Absolute tolerance used after normalization when none is given.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Calculus {
    Probability,
    Kappa,
    Possibility,
    Belief,
}

impl Calculus {
    pub const ALL: [Calculus; 4] = [
        Calculus::Probability,
        Calculus::Kappa,
        Calculus::Possibility,
        Calculus::Belief,
    ];

    pub fn is_tabular(self) -> bool {
        self != Calculus::Belief
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Calculus::Probability => "probability",
            Calculus::Kappa => "kappa",
            Calculus::Possibility => "possibility",
            Calculus::Belief => "belief",
        }
    }
}

impl fmt::Display for Calculus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Calculus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "probability" => Ok(Calculus::Probability),
            "kappa" => Ok(Calculus::Kappa),
            "possibility" => Ok(Calculus::Possibility),
            "belief" => Ok(Calculus::Belief),
            other => Err(Error::Parse(format!("unknown calculus {other:?}"))),
        }
    }
}

/// Dense table over the configurations of a domain, in canonical order.
///
/// Kappa tables hold integral values and `f64::INFINITY`; integer arithmetic
/// on `f64` is exact far beyond the ranks used here.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularValuation {
    calculus: Calculus,
    domain: Domain,
    values: Vec<f64>,
}

impl TabularValuation {
    pub fn new(calculus: Calculus, domain: Domain, values: Vec<f64>) -> Result<Self> {
        if !calculus.is_tabular() {
            return Err(Error::domain(
                "belief valuations are mass functions, not tables",
            ));
        }
        if values.len() != domain.size() {
            return Err(Error::domain(format!(
                "table has {} entries, domain {} has {} configurations",
                values.len(),
                domain,
                domain.size()
            )));
        }
        if let Some(i) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::domain(format!("NaN entry at index {i}")));
        }
        if calculus == Calculus::Kappa {
            if let Some(i) = values
                .iter()
                .position(|&v| v == f64::NEG_INFINITY || (v.is_finite() && v.fract() != 0.0))
            {
                return Err(Error::domain(format!(
                    "kappa entry at index {i} is not an integer rank"
                )));
            }
        } else if let Some(i) = values.iter().position(|v| v.is_infinite()) {
            return Err(Error::domain(format!("infinite entry at index {i}")));
        }
        Ok(TabularValuation {
            calculus,
            domain,
            values,
        })
    }

    pub(crate) fn from_parts(calculus: Calculus, domain: Domain, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), domain.size());
        TabularValuation {
            calculus,
            domain,
            values,
        }
    }

    pub fn calculus(&self) -> Calculus {
        self.calculus
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A valuation in one of the four calculi.
#[derive(Debug, Clone, PartialEq)]
pub enum Valuation {
    Tabular(TabularValuation),
    Mass(MassValuation),
}

impl Valuation {
    /// Tabular valuation from raw values in canonical order.
    pub fn table(calculus: Calculus, domain: Domain, values: Vec<f64>) -> Result<Self> {
        TabularValuation::new(calculus, domain, values).map(Valuation::Tabular)
    }

    pub fn calculus(&self) -> Calculus {
        match self {
            Valuation::Tabular(t) => t.calculus,
            Valuation::Mass(_) => Calculus::Belief,
        }
    }

    pub fn domain(&self) -> &Domain {
        match self {
            Valuation::Tabular(t) => &t.domain,
            Valuation::Mass(m) => m.domain(),
        }
    }

    pub fn as_table(&self) -> Option<&TabularValuation> {
        match self {
            Valuation::Tabular(t) => Some(t),
            Valuation::Mass(_) => None,
        }
    }

    pub fn as_mass(&self) -> Option<&MassValuation> {
        match self {
            Valuation::Mass(m) => Some(m),
            Valuation::Tabular(_) => None,
        }
    }

    /// Table entries; empty for mass functions.
    pub fn values(&self) -> &[f64] {
        match self {
            Valuation::Tabular(t) => &t.values,
            Valuation::Mass(_) => &[],
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Valuation::Tabular(t) => tabular::is_zero_table(t.calculus, &t.values),
            Valuation::Mass(m) => m.is_zero(),
        }
    }

    pub fn classify(&self) -> ClassFlags {
        classify(self)
    }
}

impl From<MassValuation> for Valuation {
    fn from(m: MassValuation) -> Self {
        Valuation::Mass(m)
    }
}

impl From<TabularValuation> for Valuation {
    fn from(t: TabularValuation) -> Self {
        Valuation::Tabular(t)
    }
}

/// Membership of a valuation in the zero / proper / normal / positive
/// classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassFlags {
    pub is_zero: bool,
    pub is_proper: bool,
    pub is_normal: bool,
    pub is_positive: bool,
}

impl ClassFlags {
    pub fn is_nonzero(&self) -> bool {
        !self.is_zero
    }

    pub fn is_proper_normal(&self) -> bool {
        self.is_proper && self.is_normal
    }

    /// Positive proper normal.
    pub fn is_ppn(&self) -> bool {
        self.is_positive
    }

    /// The class lattice: zero excludes proper and normal; positive implies
    /// proper and normal.
    pub fn is_consistent(&self) -> bool {
        !(self.is_zero && (self.is_proper || self.is_normal))
            && (!self.is_positive || (self.is_proper && self.is_normal))
    }
}

impl fmt::Display for ClassFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "zero={} proper={} normal={} positive={}",
            self.is_zero, self.is_proper, self.is_normal, self.is_positive
        )
    }
}

pub fn classify(v: &Valuation) -> ClassFlags {
    classify_with_tol(v, DEFAULT_TOL)
}

/// Classification with an explicit tolerance for the normality test.
/// Positivity uses strict inequalities.
pub fn classify_with_tol(v: &Valuation, tol: f64) -> ClassFlags {
    match v {
        Valuation::Tabular(t) => tabular::classify(t.calculus, &t.values, tol),
        Valuation::Mass(m) => belief::classify(m, tol),
    }
}

fn check_same_kind(a: &Valuation, b: &Valuation) -> Result<()> {
    if a.calculus() != b.calculus() {
        return Err(Error::CalculusMismatch(a.calculus(), b.calculus()));
    }
    Ok(())
}

/// Equality up to normalization. Kappa tables compare exactly whatever `tol`
/// is; probability, possibility and mass functions compare entrywise within
/// `tol`.
pub fn valuations_equal(a: &Valuation, b: &Valuation, tol: f64) -> Result<bool> {
    check_same_kind(a, b)?;
    if a.domain() != b.domain() {
        return Err(Error::domain(format!(
            "cannot compare valuations on {} and {}",
            a.domain(),
            b.domain()
        )));
    }
    Ok(match (normalize(a), normalize(b)) {
        (Valuation::Tabular(x), Valuation::Tabular(y)) => {
            if x.calculus == Calculus::Kappa {
                x.values == y.values
            } else {
                x.values
                    .iter()
                    .zip(&y.values)
                    .all(|(p, q)| (p - q).abs() <= tol)
            }
        }
        (Valuation::Mass(x), Valuation::Mass(y)) => belief::masses_close(&x, &y, tol),
        _ => unreachable!("calculus tags already checked"),
    })
}

/// Like [`valuations_equal`] but a domain mismatch counts as "not equal".
pub fn same_valuation(a: &Valuation, b: &Valuation, tol: f64) -> bool {
    a.calculus() == b.calculus()
        && a.domain() == b.domain()
        && valuations_equal(a, b, tol).unwrap_or(false)
}

/// `ι_s`, the identity of the normal valuations on `s`.
pub fn identity_for(s: &Domain, calculus: Calculus) -> Valuation {
    match calculus {
        Calculus::Belief => MassValuation::vacuous(s.clone()).into(),
        c => {
            let n = s.size();
            TabularValuation::from_parts(c, s.clone(), vec![tabular::identity_value(c, n); n])
                .into()
        }
    }
}

/// `ζ_s`, the zero valuation on `s`.
pub fn zero_for(s: &Domain, calculus: Calculus) -> Valuation {
    match calculus {
        Calculus::Belief => MassValuation::zero(s.clone()).into(),
        c => TabularValuation::from_parts(c, s.clone(), vec![tabular::zero_value(c); s.size()])
            .into(),
    }
}

/// `σ ⊕ ι_∅`: the normal form of a nonzero valuation; zero stays zero.
pub fn normalize(v: &Valuation) -> Valuation {
    match v {
        Valuation::Tabular(t) => {
            let mut values = t.values.clone();
            if !tabular::normalize_values(t.calculus, &mut values) {
                return zero_for(&t.domain, t.calculus);
            }
            TabularValuation::from_parts(t.calculus, t.domain.clone(), values).into()
        }
        Valuation::Mass(m) => m.normalized().into(),
    }
}

/// An identity `δ_σ` for a normal valuation, built from its support.
///
/// Belief functions get the vacuous valuation.
pub fn support_identity(sigma: &Valuation) -> Result<Valuation> {
    if !classify(sigma).is_normal {
        return Err(Error::precondition(
            "support identity requires a normal valuation",
        ));
    }
    Ok(match sigma {
        Valuation::Tabular(t) => {
            let c = t.calculus;
            let support = t
                .values
                .iter()
                .filter(|&&v| !tabular::is_zero_value(c, v))
                .count();
            let on = tabular::identity_value(c, support);
            let off = tabular::zero_value(c);
            let values = t
                .values
                .iter()
                .map(|&v| {
                    if tabular::is_zero_value(c, v) {
                        off
                    } else {
                        on
                    }
                })
                .collect();
            TabularValuation::from_parts(c, t.domain.clone(), values).into()
        }
        Valuation::Mass(m) => identity_for(m.domain(), Calculus::Belief),
    })
}

/// Whether `σ ⊕ δ = σ` within `tol`.
pub fn is_identity_for(delta: &Valuation, sigma: &Valuation, tol: f64) -> Result<bool> {
    check_same_kind(delta, sigma)?;
    if delta.domain() != sigma.domain() {
        return Err(Error::domain(
            "identity candidate must share the valuation's domain",
        ));
    }
    let combined = crate::calculi::combine(sigma, delta)?;
    valuations_equal(&combined, sigma, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Registry;

    fn reg() -> Registry {
        Registry::binary(&["X", "Y"])
    }

    fn t(c: Calculus, names: &[&str], v: &[f64]) -> Valuation {
        Valuation::table(c, reg().domain_of(names).unwrap(), v.to_vec()).unwrap()
    }

    const P: Calculus = Calculus::Probability;
    const K: Calculus = Calculus::Kappa;
    const INF: f64 = f64::INFINITY;

    #[test]
    fn classify_examples() {
        let f = classify(&t(P, &["X"], &[0.6, 0.4]));
        assert_eq!(
            f,
            ClassFlags {
                is_zero: false,
                is_proper: true,
                is_normal: true,
                is_positive: true
            }
        );
        let f = classify(&t(P, &["X"], &[0.0, 0.0]));
        assert_eq!(
            f,
            ClassFlags {
                is_zero: true,
                is_proper: false,
                is_normal: false,
                is_positive: false
            }
        );
        let f = classify(&t(K, &["X"], &[0.0, 2.0]));
        assert_eq!(
            f,
            ClassFlags {
                is_zero: false,
                is_proper: true,
                is_normal: true,
                is_positive: true
            }
        );
        assert!(classify(&t(K, &["X"], &[INF, INF])).is_zero);
        let f = classify(&t(K, &["X"], &[1.0, INF]));
        assert!(f.is_proper && !f.is_normal && !f.is_positive);
    }

    #[test]
    fn equality_up_to_normalization() {
        assert!(
            valuations_equal(&t(P, &["X"], &[0.3, 0.2]), &t(P, &["X"], &[0.6, 0.4]), 1e-9).unwrap()
        );
        assert!(
            !valuations_equal(&t(P, &["X"], &[0.6, 0.4]), &t(P, &["X"], &[0.4, 0.6]), 1e-9)
                .unwrap()
        );
        let z = zero_for(&reg().domain_of(&["X"]).unwrap(), P);
        assert!(valuations_equal(&z, &z, 0.0).unwrap());
        assert!(matches!(
            valuations_equal(&t(P, &["X"], &[0.6, 0.4]), &t(P, &["Y"], &[0.6, 0.4]), 1e-9),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            valuations_equal(&t(P, &["X"], &[0.6, 0.4]), &t(K, &["X"], &[0.0, 1.0]), 1e-9),
            Err(Error::CalculusMismatch(..))
        ));
    }

    #[test]
    fn identities_and_zeros() {
        let x = reg().domain_of(&["X"]).unwrap();
        assert_eq!(identity_for(&x, P).values(), &[0.5, 0.5]);
        assert_eq!(identity_for(&x, K).values(), &[0.0, 0.0]);
        assert_eq!(
            identity_for(&x, Calculus::Possibility).values(),
            &[1.0, 1.0]
        );
        assert_eq!(identity_for(&Domain::empty(), P).values(), &[1.0]);
        assert_eq!(zero_for(&x, P).values(), &[0.0, 0.0]);
        assert_eq!(zero_for(&x, K).values(), &[INF, INF]);
        assert_eq!(zero_for(&Domain::empty(), P).values(), &[0.0]);
        for c in Calculus::ALL {
            assert!(classify(&identity_for(&x, c)).is_positive, "{c}");
            assert!(
                classify(&identity_for(&Domain::empty(), c)).is_positive,
                "{c}"
            );
            assert!(classify(&zero_for(&x, c)).is_zero, "{c}");
        }
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&t(P, &["X"], &[0.3, 0.2])).values(), &[0.6, 0.4]);
        assert_eq!(normalize(&t(K, &["X"], &[1.0, 3.0])).values(), &[0.0, 2.0]);
        let z = zero_for(&reg().domain_of(&["X"]).unwrap(), K);
        assert_eq!(normalize(&z), z);
    }

    #[test]
    fn support_identity_examples() {
        assert_eq!(
            support_identity(&t(P, &["X"], &[0.6, 0.4]))
                .unwrap()
                .values(),
            &[0.5, 0.5]
        );
        let s = t(P, &["X"], &[1.0, 0.0]);
        let d = support_identity(&s).unwrap();
        assert_eq!(d.values(), &[1.0, 0.0]);
        assert!(is_identity_for(&d, &s, 1e-9).unwrap());
        let s = t(K, &["X"], &[0.0, INF]);
        let d = support_identity(&s).unwrap();
        assert_eq!(d.values(), &[0.0, INF]);
        assert!(is_identity_for(&d, &s, 0.0).unwrap());
        assert!(matches!(
            support_identity(&t(P, &["X"], &[0.3, 0.2])),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn is_identity_examples() {
        let x = reg().domain_of(&["X"]).unwrap();
        let s = t(P, &["X"], &[0.7, 0.3]);
        assert!(is_identity_for(&identity_for(&x, P), &s, 1e-9).unwrap());
        assert!(
            !is_identity_for(&t(P, &["X"], &[1.0, 0.0]), &t(P, &["X"], &[0.5, 0.5]), 1e-9).unwrap()
        );
    }

    #[test]
    fn table_validation() {
        let x = reg().domain_of(&["X"]).unwrap();
        assert!(Valuation::table(P, x.clone(), vec![0.5]).is_err());
        assert!(Valuation::table(P, x.clone(), vec![0.5, f64::NAN]).is_err());
        assert!(Valuation::table(K, x.clone(), vec![0.5, 1.0]).is_err());
        assert!(Valuation::table(Calculus::Belief, x, vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn calculus_names_round_trip() {
        for c in Calculus::ALL {
            assert_eq!(c.as_str().parse::<Calculus>().unwrap(), c);
        }
        assert!("fuzzy".parse::<Calculus>().is_err());
    }
}
