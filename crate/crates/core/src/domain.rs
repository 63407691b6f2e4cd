//! Variables, the model registry, domains and configurations.
//!
//! A [`Domain`] is a set of registry indices kept in ascending order together
//! with the frame size of each member. Configurations of a domain are
//! enumerated row-major with the highest registry index varying fastest, so a
//! flat table index and a state tuple convert into one another with fixed
//! strides.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Index of a variable in its [`Registry`].
pub type VarId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub states: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, states: &[&str]) -> Self {
        Variable {
            name: name.into(),
            states: states.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// A variable with states labelled `0..n`.
    pub fn with_card(name: impl Into<String>, n: usize) -> Self {
        Variable {
            name: name.into(),
            states: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    pub fn card(&self) -> usize {
        self.states.len()
    }
}

/// Ordered list of variables. Declaration order defines the canonical
/// configuration order of every table built against it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Registry {
    vars: Vec<Variable>,
    index: HashMap<String, VarId>,
}

impl Registry {
    pub fn new(vars: Vec<Variable>) -> Result<Self> {
        let mut index = HashMap::with_capacity(vars.len());
        for (id, v) in vars.iter().enumerate() {
            if v.states.is_empty() {
                return Err(Error::domain(format!(
                    "variable {} has an empty frame",
                    v.name
                )));
            }
            for (i, s) in v.states.iter().enumerate() {
                if v.states[..i].contains(s) {
                    return Err(Error::domain(format!(
                        "variable {} repeats state label {s}",
                        v.name
                    )));
                }
            }
            if index.insert(v.name.clone(), id).is_some() {
                return Err(Error::domain(format!("duplicate variable name {}", v.name)));
            }
        }
        Ok(Registry { vars, index })
    }

    /// Binary variables named `names[i]` with states `0`, `1`.
    pub fn binary(names: &[&str]) -> Self {
        Registry::new(names.iter().map(|n| Variable::with_card(*n, 2)).collect())
            .expect("binary registry names must be unique")
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id]
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.vars[id].name
    }

    pub fn id(&self, name: &str) -> Result<VarId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::domain(format!("unknown variable {name}")))
    }

    pub fn domain(&self, ids: &[VarId]) -> Result<Domain> {
        let mut pairs = Vec::with_capacity(ids.len());
        for &id in ids {
            let v = self
                .vars
                .get(id)
                .ok_or_else(|| Error::domain(format!("variable index {id} out of range")))?;
            pairs.push((id, v.card()));
        }
        Domain::from_pairs(pairs)
    }

    pub fn domain_of(&self, names: &[&str]) -> Result<Domain> {
        let ids = names
            .iter()
            .map(|n| self.id(n))
            .collect::<Result<Vec<_>>>()?;
        self.domain(&ids)
    }

    pub fn full_domain(&self) -> Domain {
        Domain {
            vars: (0..self.vars.len()).collect(),
            cards: self.vars.iter().map(Variable::card).collect(),
        }
    }

    /// Comma-separated variable names of `d`, in canonical order.
    pub fn names_of(&self, d: &Domain) -> Vec<String> {
        d.vars().iter().map(|&v| self.name(v).to_string()).collect()
    }

    /// `X=a,Y=b` label of configuration `index` of `d`.
    pub fn config_label(&self, d: &Domain, index: usize) -> String {
        let states = d.decode(index);
        d.vars()
            .iter()
            .zip(states)
            .map(|(&v, s)| format!("{}={}", self.name(v), self.var(v).states[s]))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// A set of variables with their frame sizes, sorted by registry index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Domain {
    vars: Vec<VarId>,
    cards: Vec<usize>,
}

impl Domain {
    pub fn empty() -> Self {
        Domain::default()
    }

    /// Builds a domain from `(variable, frame size)` pairs in any order.
    /// Duplicates are merged when their frame sizes agree.
    pub fn from_pairs(mut pairs: Vec<(VarId, usize)>) -> Result<Self> {
        pairs.sort_unstable();
        pairs.dedup();
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::domain(format!(
                    "variable {} given frame sizes {} and {}",
                    w[0].0, w[0].1, w[1].1
                )));
            }
        }
        if let Some(&(v, _)) = pairs.iter().find(|p| p.1 == 0) {
            return Err(Error::domain(format!("variable {v} has an empty frame")));
        }
        let (vars, cards) = pairs.into_iter().unzip();
        Ok(Domain { vars, cards })
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.vars.binary_search(&v).is_ok()
    }

    pub fn card_of(&self, v: VarId) -> Option<usize> {
        self.vars.binary_search(&v).ok().map(|i| self.cards[i])
    }

    /// Number of configurations, `1` for the empty domain.
    pub fn size(&self) -> usize {
        self.cards.iter().product()
    }

    /// Configuration count without overflow, for capacity guards.
    pub fn checked_size(&self) -> Option<u64> {
        self.cards
            .iter()
            .try_fold(1u64, |acc, &c| acc.checked_mul(c as u64))
    }

    pub fn is_subset(&self, other: &Domain) -> bool {
        self.vars.iter().all(|&v| other.contains(v))
    }

    pub fn union(&self, other: &Domain) -> Result<Domain> {
        let pairs = self.pairs().chain(other.pairs()).collect::<Vec<_>>();
        Domain::from_pairs(pairs)
    }

    pub fn intersection(&self, other: &Domain) -> Domain {
        self.filter(|v| other.contains(v))
    }

    pub fn difference(&self, other: &Domain) -> Domain {
        self.filter(|v| !other.contains(v))
    }

    pub fn without(&self, v: VarId) -> Domain {
        self.filter(|u| u != v)
    }

    pub fn is_disjoint(&self, other: &Domain) -> bool {
        self.vars.iter().all(|&v| !other.contains(v))
    }

    fn filter(&self, keep: impl Fn(VarId) -> bool) -> Domain {
        let (vars, cards) = self.pairs().filter(|&(v, _)| keep(v)).unzip();
        Domain { vars, cards }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.vars.iter().copied().zip(self.cards.iter().copied())
    }

    /// State tuple of configuration `index`.
    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut states = vec![0; self.vars.len()];
        for (slot, &c) in states.iter_mut().zip(&self.cards).rev() {
            *slot = index % c;
            index /= c;
        }
        states
    }

    pub fn encode(&self, states: &[usize]) -> usize {
        states
            .iter()
            .zip(&self.cards)
            .fold(0, |acc, (&s, &c)| acc * c + s)
    }

    /// For every configuration of `self`, the index of its restriction to
    /// `sub`. Fails unless `sub ⊆ self` with matching frame sizes.
    pub fn projection_map(&self, sub: &Domain) -> Result<Vec<usize>> {
        let mut positions = Vec::with_capacity(sub.len());
        for (v, c) in sub.pairs() {
            match self.vars.binary_search(&v) {
                Ok(i) if self.cards[i] == c => positions.push(i),
                Ok(_) => {
                    return Err(Error::domain(format!(
                        "frame size mismatch for variable {v}"
                    )))
                }
                Err(_) => return Err(Error::domain(format!("variable {v} not in domain"))),
            }
        }
        let n = self.size();
        let mut map = Vec::with_capacity(n);
        let mut states = vec![0usize; self.len()];
        for _ in 0..n {
            let idx = positions
                .iter()
                .zip(&sub.cards)
                .fold(0, |acc, (&p, &c)| acc * c + states[p]);
            map.push(idx);
            for k in (0..states.len()).rev() {
                states[k] += 1;
                if states[k] < self.cards[k] {
                    break;
                }
                states[k] = 0;
            }
        }
        Ok(map)
    }

    /// Bitmask of the members of `self` within `universe` (bit `i` for the
    /// `i`-th variable of `universe`).
    pub fn mask_in(&self, universe: &Domain) -> u64 {
        self.vars
            .iter()
            .filter_map(|v| universe.vars.binary_search(v).ok())
            .fold(0, |m, i| m | (1 << i))
    }

    /// Sub-domain of `self` selected by bitmask, the inverse of [`mask_in`](Self::mask_in).
    pub fn select(&self, mask: u64) -> Domain {
        let (vars, cards) = self
            .pairs()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, p)| p)
            .unzip();
        Domain { vars, cards }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.vars.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "#{v}")?;
        }
        write!(f, "}}")
    }
}

/// One state per variable of a domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    domain: Domain,
    states: Vec<usize>,
}

impl Configuration {
    pub fn new(domain: Domain, states: Vec<usize>) -> Result<Self> {
        if states.len() != domain.len() {
            return Err(Error::domain(format!(
                "configuration has {} states for a domain of {} variables",
                states.len(),
                domain.len()
            )));
        }
        if let Some((i, _)) = states
            .iter()
            .zip(domain.cards())
            .enumerate()
            .find(|(_, (&s, &c))| s >= c)
        {
            return Err(Error::domain(format!("state out of range at position {i}")));
        }
        Ok(Configuration { domain, states })
    }

    pub fn from_index(domain: Domain, index: usize) -> Self {
        let states = domain.decode(index);
        Configuration { domain, states }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn state_of(&self, v: VarId) -> Option<usize> {
        self.domain
            .vars
            .binary_search(&v)
            .ok()
            .map(|i| self.states[i])
    }

    pub fn index(&self) -> usize {
        self.domain.encode(&self.states)
    }
}

/// Restriction `x↓r` of a configuration to a sub-domain.
pub fn project_config(x: &Configuration, r: &Domain) -> Result<Configuration> {
    let mut states = Vec::with_capacity(r.len());
    for (v, c) in r.pairs() {
        match x.domain.vars.binary_search(&v) {
            Ok(i) if x.domain.cards[i] == c => states.push(x.states[i]),
            _ => {
                return Err(Error::domain(format!(
                    "cannot project configuration on {} to {}",
                    x.domain, r
                )))
            }
        }
    }
    Ok(Configuration {
        domain: r.clone(),
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> (Registry, Domain) {
        let reg = Registry::binary(&["X", "Y"]);
        let d = reg.domain_of(&["X", "Y"]).unwrap();
        (reg, d)
    }

    #[test]
    fn project_config_restricts() {
        let (reg, xy) = xy();
        let x = Configuration::new(xy.clone(), vec![0, 1]).unwrap();
        let only_x = reg.domain_of(&["X"]).unwrap();
        assert_eq!(project_config(&x, &only_x).unwrap().states(), &[0]);
        assert_eq!(project_config(&x, &xy).unwrap(), x);
        let e = project_config(&x, &Domain::empty()).unwrap();
        assert!(e.states().is_empty());
        assert_eq!(e.domain().size(), 1);
    }

    #[test]
    fn project_config_rejects_non_subset() {
        let reg = Registry::binary(&["X", "Y", "Z"]);
        let x = Configuration::new(reg.domain_of(&["X", "Y"]).unwrap(), vec![0, 1]).unwrap();
        let z = reg.domain_of(&["Z"]).unwrap();
        assert!(matches!(project_config(&x, &z), Err(Error::Domain(_))));
    }

    #[test]
    fn canonical_order_last_fastest() {
        let reg = Registry::new(vec![
            Variable::with_card("A", 2),
            Variable::with_card("B", 3),
        ])
        .unwrap();
        // listed out of order, stored in registry order
        let d = reg.domain_of(&["B", "A"]).unwrap();
        assert_eq!(d.vars(), &[0, 1]);
        assert_eq!(d.decode(0), vec![0, 0]);
        assert_eq!(d.decode(1), vec![0, 1]);
        assert_eq!(d.decode(3), vec![1, 0]);
        assert_eq!(d.encode(&[1, 2]), 5);
        assert_eq!(reg.config_label(&d, 4), "A=1,B=1");
    }

    #[test]
    fn projection_map_matches_decode() {
        let reg = Registry::new(vec![
            Variable::with_card("A", 2),
            Variable::with_card("B", 3),
            Variable::with_card("C", 2),
        ])
        .unwrap();
        let full = reg.full_domain();
        let ac = reg.domain_of(&["A", "C"]).unwrap();
        let map = full.projection_map(&ac).unwrap();
        for (i, &j) in map.iter().enumerate() {
            let s = full.decode(i);
            assert_eq!(ac.decode(j), vec![s[0], s[2]]);
        }
        assert_eq!(full.projection_map(&Domain::empty()).unwrap(), vec![0; 12]);
    }

    #[test]
    fn registry_rejects_duplicates() {
        assert!(Registry::new(vec![
            Variable::with_card("X", 2),
            Variable::with_card("X", 3)
        ])
        .is_err());
        assert!(Registry::new(vec![Variable::new("X", &["a", "a"])]).is_err());
        assert!(Registry::new(vec![Variable::new("X", &[])]).is_err());
    }

    #[test]
    fn empty_domain_has_one_configuration() {
        assert_eq!(Domain::empty().size(), 1);
        assert_eq!(
            Domain::empty().projection_map(&Domain::empty()).unwrap(),
            vec![0]
        );
    }

    #[test]
    fn masks_round_trip() {
        let reg = Registry::binary(&["W", "X", "Y", "Z"]);
        let full = reg.full_domain();
        let d = reg.domain_of(&["X", "Z"]).unwrap();
        let m = d.mask_in(&full);
        assert_eq!(m, 0b1010);
        assert_eq!(full.select(m), d);
    }
}
