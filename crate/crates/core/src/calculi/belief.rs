//! Dempster–Shafer belief functions as sparse mass functions.
//!
//! Focal sets are subsets of the frame `W_s`, stored as bitsets over the
//! canonical configuration indices of the domain. Combination is Dempster's
//! rule, marginalization projects focal sets, and removal divides
//! commonalities.

use std::collections::BTreeMap;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::valuation::ClassFlags;

/// Masses (and commonalities) with magnitude at or below this are treated as
/// numerically zero.
pub const MASS_EPS: f64 = 1e-12;

/// Largest frame for which dense commonality tables are built.
pub const MAX_COMMONALITY_FRAME: usize = 20;

/// A subset of the configurations of some domain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConfigSet {
    words: Vec<u64>,
}

impl ConfigSet {
    pub fn empty(frame: usize) -> Self {
        ConfigSet {
            words: vec![0; frame.div_ceil(64).max(1)],
        }
    }

    pub fn full(frame: usize) -> Self {
        let mut s = ConfigSet::empty(frame);
        for i in 0..frame {
            s.insert(i);
        }
        s
    }

    pub fn from_indices(frame: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = ConfigSet::empty(frame);
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Set from the low bits of `mask`; requires `frame ≤ 64`.
    pub fn from_mask(frame: usize, mask: u64) -> Self {
        debug_assert!(frame <= 64);
        let mut s = ConfigSet::empty(frame);
        s.words[0] = mask;
        s
    }

    /// The set as a bitmask; only meaningful when the frame has ≤ 64 configurations.
    pub fn mask(&self) -> u64 {
        self.words[0]
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| w >> (i % 64) & 1 == 1)
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn intersect(&self, other: &ConfigSet) -> ConfigSet {
        ConfigSet {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn is_subset(&self, other: &ConfigSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64)
                .filter(move |b| w >> b & 1 == 1)
                .map(move |b| wi * 64 + b)
        })
    }
}

/// A mass function on `W_s`. All stored masses are nonzero and all focal
/// sets are nonempty; the zero valuation has no focal sets.
#[derive(Debug, Clone, PartialEq)]
pub struct MassValuation {
    domain: Domain,
    focal: BTreeMap<ConfigSet, f64>,
}

impl MassValuation {
    /// Builds a mass function, summing repeated focal sets and dropping
    /// numerically zero masses.
    pub fn new(domain: Domain, focal: impl IntoIterator<Item = (ConfigSet, f64)>) -> Result<Self> {
        let frame = domain.size();
        let mut map = BTreeMap::new();
        for (set, m) in focal {
            if set.is_empty() {
                return Err(Error::domain("focal sets must be nonempty"));
            }
            if set.iter().any(|i| i >= frame) {
                return Err(Error::domain(
                    "focal set refers to a configuration outside the frame",
                ));
            }
            if !m.is_finite() {
                return Err(Error::domain("masses must be finite"));
            }
            let mut set = set;
            set.words.resize(frame.div_ceil(64).max(1), 0);
            *map.entry(set).or_insert(0.0) += m;
        }
        Ok(MassValuation::from_map(domain, map))
    }

    fn from_map(domain: Domain, mut focal: BTreeMap<ConfigSet, f64>) -> Self {
        focal.retain(|_, m| m.abs() > MASS_EPS);
        MassValuation { domain, focal }
    }

    pub fn zero(domain: Domain) -> Self {
        MassValuation {
            domain,
            focal: BTreeMap::new(),
        }
    }

    /// `m(W_s) = 1`.
    pub fn vacuous(domain: Domain) -> Self {
        let frame = domain.size();
        let focal = BTreeMap::from([(ConfigSet::full(frame), 1.0)]);
        MassValuation { domain, focal }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn focal(&self) -> &BTreeMap<ConfigSet, f64> {
        &self.focal
    }

    pub fn mass_of(&self, set: &ConfigSet) -> f64 {
        self.focal.get(set).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.focal.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.focal.values().sum()
    }

    /// Masses divided by their total; zero when the total vanishes.
    pub fn normalized(&self) -> MassValuation {
        let total = self.total();
        if self.focal.is_empty() || total.abs() <= MASS_EPS {
            return MassValuation::zero(self.domain.clone());
        }
        let focal = self
            .focal
            .iter()
            .map(|(k, &m)| (k.clone(), m / total))
            .collect();
        MassValuation::from_map(self.domain.clone(), focal)
    }

    /// Vacuous extension to a superdomain: every focal set becomes its
    /// cylinder in `W_to`. Masses are unchanged.
    pub fn extend(&self, to: &Domain) -> Result<MassValuation> {
        let map = to.projection_map(&self.domain)?;
        let frame = to.size();
        let focal = self
            .focal
            .iter()
            .map(|(a, &m)| (cylinder(a, &map, frame), m))
            .collect();
        Ok(MassValuation {
            domain: to.clone(),
            focal,
        })
    }
}

fn cylinder(a: &ConfigSet, map: &[usize], frame: usize) -> ConfigSet {
    ConfigSet::from_indices(frame, (0..frame).filter(|&x| a.contains(map[x])))
}

pub(crate) fn classify(m: &MassValuation, tol: f64) -> ClassFlags {
    let is_zero = m.is_zero();
    let is_proper = !is_zero && m.focal.values().all(|&v| v >= 0.0);
    let is_normal = !is_zero && (m.total() - 1.0).abs() <= tol;
    // For a nonnegative mass function every commonality is at least m(W_s)
    // and q(W_s) = m(W_s), so all commonalities are positive iff m(W_s) > 0.
    let whole = ConfigSet::full(m.domain.size());
    let is_positive = is_proper && is_normal && m.mass_of(&whole) > 0.0;
    ClassFlags {
        is_zero,
        is_proper,
        is_normal,
        is_positive,
    }
}

/// Mass-wise comparison of two already-normalized mass functions.
pub(crate) fn masses_close(a: &MassValuation, b: &MassValuation, tol: f64) -> bool {
    let keys = a.focal.keys().chain(b.focal.keys());
    keys.into_iter()
        .all(|k| (a.mass_of(k) - b.mass_of(k)).abs() <= tol)
}

/// Dempster's rule: intersect vacuous extensions, drop the conflict, and
/// renormalize. Total conflict yields the zero valuation.
pub(crate) fn combine(a: &MassValuation, b: &MassValuation) -> Result<MassValuation> {
    let u = a.domain.union(&b.domain)?;
    if a.is_zero() || b.is_zero() {
        return Ok(MassValuation::zero(u));
    }
    let ea = a.extend(&u)?;
    let eb = b.extend(&u)?;
    let mut acc: BTreeMap<ConfigSet, f64> = BTreeMap::new();
    for (sa, &ma) in &ea.focal {
        for (sb, &mb) in &eb.focal {
            let c = sa.intersect(sb);
            if !c.is_empty() {
                *acc.entry(c).or_insert(0.0) += ma * mb;
            }
        }
    }
    Ok(MassValuation {
        domain: u,
        focal: acc,
    }
    .normalized())
}

/// Projection of every focal set onto `target ⊆ domain`.
pub(crate) fn marginalize_to(a: &MassValuation, target: &Domain) -> Result<MassValuation> {
    let map = a.domain.projection_map(target)?;
    let frame = target.size();
    let mut acc: BTreeMap<ConfigSet, f64> = BTreeMap::new();
    for (set, &m) in &a.focal {
        let proj = ConfigSet::from_indices(frame, set.iter().map(|x| map[x]));
        *acc.entry(proj).or_insert(0.0) += m;
    }
    Ok(MassValuation::from_map(target.clone(), acc))
}

/// Removal in commonality space: `q(A) = q_a(A) / q_b(A)` on the joint
/// frame, then Möbius inversion and renormalization. The result may carry
/// negative masses.
pub(crate) fn remove(a: &MassValuation, b: &MassValuation) -> Result<MassValuation> {
    let u = a.domain.union(&b.domain)?;
    if a.is_zero() || b.is_zero() {
        return Ok(MassValuation::zero(u));
    }
    let qa = mass_to_commonality(&a.extend(&u)?)?;
    let qb = mass_to_commonality(&b.extend(&u)?)?;
    let mut q = vec![0.0; qa.q.len()];
    for mask in 1..q.len() {
        let d = qb.q[mask];
        if d.abs() <= MASS_EPS {
            return Err(Error::RemovalUndefined { mask: mask as u64 });
        }
        q[mask] = qa.q[mask] / d;
    }
    let table = CommonalityTable { domain: u, q };
    Ok(commonality_to_mass(&table).normalized())
}

/// Dense commonality function `q(A) = Σ { m(B) : B ⊇ A }`, indexed by the
/// bitmask of `A` over the frame. Index 0 holds `q(∅)`, the total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonalityTable {
    domain: Domain,
    q: Vec<f64>,
}

impl CommonalityTable {
    pub fn new(domain: Domain, q: Vec<f64>) -> Result<Self> {
        let frame = domain.size();
        if frame > MAX_COMMONALITY_FRAME {
            return Err(Error::Capacity {
                needed: frame as u64,
                limit: MAX_COMMONALITY_FRAME as u64,
            });
        }
        if q.len() != 1 << frame {
            return Err(Error::domain(format!(
                "commonality table needs {} entries, got {}",
                1usize << frame,
                q.len()
            )));
        }
        Ok(CommonalityTable { domain, q })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.q
    }

    pub fn get(&self, set: &ConfigSet) -> f64 {
        self.q[set.mask() as usize]
    }
}

pub fn mass_to_commonality(m: &MassValuation) -> Result<CommonalityTable> {
    let frame = m.domain.size();
    if frame > MAX_COMMONALITY_FRAME {
        return Err(Error::Capacity {
            needed: frame as u64,
            limit: MAX_COMMONALITY_FRAME as u64,
        });
    }
    let mut q = vec![0.0; 1 << frame];
    for (set, &v) in &m.focal {
        q[set.mask() as usize] += v;
    }
    for bit in 0..frame {
        let b = 1 << bit;
        for mask in 0..q.len() {
            if mask & b == 0 {
                q[mask] += q[mask | b];
            }
        }
    }
    Ok(CommonalityTable {
        domain: m.domain.clone(),
        q,
    })
}

/// Möbius inversion `m(A) = Σ { (−1)^{|B|−|A|} q(B) : B ⊇ A }` over the
/// nonempty subsets. Negative masses are kept.
pub fn commonality_to_mass(q: &CommonalityTable) -> MassValuation {
    let frame = q.domain.size();
    let mut m = q.q.clone();
    for bit in 0..frame {
        let b = 1 << bit;
        for mask in 0..m.len() {
            if mask & b == 0 {
                m[mask] -= m[mask | b];
            }
        }
    }
    let focal = m
        .iter()
        .enumerate()
        .skip(1)
        .map(|(mask, &v)| (ConfigSet::from_mask(frame, mask as u64), v))
        .collect();
    MassValuation::from_map(q.domain.clone(), focal)
}
