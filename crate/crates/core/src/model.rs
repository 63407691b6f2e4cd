//! JSON model documents.
//!
//! ```json
//! {
//!   "calculus": "probability",
//!   "variables": [{"name": "X", "states": ["0", "1"]}, {"name": "Y", "states": ["0", "1"]}],
//!   "valuations": [
//!     {"domain": ["X"], "table": [0.6, 0.4]},
//!     {"domain": ["X", "Y"], "table": [0.9, 0.1, 0.2, 0.8]}
//!   ]
//! }
//! ```
//!
//! Tables list values in canonical configuration order: the domain's
//! variables sorted by declaration order, the last one varying fastest. The
//! string `"inf"` stands for +∞. Belief-function valuations use
//! `"focal": [{"set": [{"X": "0"}, {"X": "1"}], "mass": 0.3}, …]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::calculi::{ConfigSet, MassValuation};
use crate::domain::{Domain, Registry, Variable};
use crate::error::{Error, Result};
use crate::fusion::FactoredModel;
use crate::valuation::{classify, Calculus, TabularValuation, Valuation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub calculus: Calculus,
    pub variables: Vec<VariableSpec>,
    pub valuations: Vec<ValuationSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableSpec {
    pub name: String,
    pub states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValuationSpec {
    pub domain: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focal: Option<Vec<FocalSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FocalSpec {
    pub set: Vec<BTreeMap<String, String>>,
    pub mass: f64,
}

/// A table entry: a number or the token `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(f64),
    Token(Token),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Token {
    #[serde(rename = "inf")]
    Inf,
}

impl Entry {
    pub fn value(self) -> f64 {
        match self {
            Entry::Number(x) => x,
            Entry::Token(Token::Inf) => f64::INFINITY,
        }
    }

    pub fn from_value(x: f64) -> Self {
        if x == f64::INFINITY {
            Entry::Token(Token::Inf)
        } else {
            Entry::Number(x)
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Admit valuations outside the proper class (negative entries,
    /// possibility values above one).
    pub allow_improper: bool,
}

/// Parses and validates a model document.
pub fn parse_model(text: &str, opts: ParseOptions) -> Result<FactoredModel> {
    let doc: ModelDocument = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
    doc.to_model(opts)
}

impl ModelDocument {
    pub fn registry(&self) -> Result<Registry> {
        let vars = self
            .variables
            .iter()
            .map(|v| Variable {
                name: v.name.clone(),
                states: v.states.clone(),
            })
            .collect();
        Registry::new(vars).map_err(|e| Error::Parse(format!("variables: {e}")))
    }

    pub fn to_model(&self, opts: ParseOptions) -> Result<FactoredModel> {
        let reg = self.registry()?;
        let mut factors = Vec::with_capacity(self.valuations.len());
        for (i, spec) in self.valuations.iter().enumerate() {
            let v = spec
                .to_valuation(&reg, self.calculus)
                .map_err(|e| Error::Parse(format!("valuation {i}: {}", strip(e))))?;
            let f = classify(&v);
            if !opts.allow_improper && !f.is_zero && !f.is_proper {
                return Err(Error::Parse(format!(
                    "valuation {i}: not a proper {} valuation (use allow-improper to admit it)",
                    self.calculus
                )));
            }
            factors.push(v);
        }
        FactoredModel::new(reg, self.calculus, factors)
    }

    /// Document for explicit valuations over `reg`.
    pub fn from_valuations<'a>(
        reg: &Registry,
        calculus: Calculus,
        vals: impl IntoIterator<Item = &'a Valuation>,
    ) -> Self {
        ModelDocument {
            calculus,
            variables: reg
                .variables()
                .iter()
                .map(|v| VariableSpec {
                    name: v.name.clone(),
                    states: v.states.clone(),
                })
                .collect(),
            valuations: vals
                .into_iter()
                .map(|v| ValuationSpec::from_valuation(reg, v))
                .collect(),
        }
    }

    pub fn from_model(model: &FactoredModel) -> Self {
        ModelDocument::from_valuations(model.registry(), model.calculus(), model.factors())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Parse(m) | Error::Domain(m) | Error::Precondition(m) => m,
        other => other.to_string(),
    }
}

impl ValuationSpec {
    pub fn to_valuation(&self, reg: &Registry, calculus: Calculus) -> Result<Valuation> {
        let names: Vec<&str> = self.domain.iter().map(String::as_str).collect();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::Parse(format!("variable {n} listed twice")));
            }
        }
        let d = reg.domain_of(&names)?;
        match (&self.table, &self.focal, calculus) {
            (Some(_), Some(_), _) => {
                Err(Error::Parse("give either table or focal, not both".into()))
            }
            (Some(table), None, c) if c.is_tabular() => {
                if table.len() != d.size() {
                    return Err(Error::Parse(format!(
                        "table has {} entries, domain {{{}}} has {} configurations",
                        table.len(),
                        self.domain.join(","),
                        d.size()
                    )));
                }
                let values = table.iter().map(|e| e.value()).collect();
                Ok(TabularValuation::new(c, d, values)?.into())
            }
            (None, Some(focal), Calculus::Belief) => {
                let frame = d.size();
                let mut sets = Vec::with_capacity(focal.len());
                for (j, f) in focal.iter().enumerate() {
                    if f.set.is_empty() {
                        return Err(Error::Parse(format!("focal set {j} is empty")));
                    }
                    let mut set = ConfigSet::empty(frame);
                    for cfg in &f.set {
                        let idx = config_index(reg, &d, cfg)
                            .map_err(|e| Error::Parse(format!("focal set {j}: {}", strip(e))))?;
                        set.insert(idx);
                    }
                    sets.push((set, f.mass));
                }
                Ok(MassValuation::new(d, sets)?.into())
            }
            (None, None, _) => Err(Error::Parse("missing table or focal".into())),
            (Some(_), None, c) => Err(Error::Parse(format!("{c} valuations need focal sets"))),
            (None, Some(_), c) => Err(Error::Parse(format!("{c} valuations need a table"))),
        }
    }

    pub fn from_valuation(reg: &Registry, v: &Valuation) -> Self {
        let domain = reg.names_of(v.domain());
        match v {
            Valuation::Tabular(t) => ValuationSpec {
                domain,
                table: Some(t.values().iter().map(|&x| Entry::from_value(x)).collect()),
                focal: None,
            },
            Valuation::Mass(m) => {
                let d = m.domain();
                let focal = m
                    .focal()
                    .iter()
                    .map(|(set, &mass)| FocalSpec {
                        set: set.iter().map(|i| config_object(reg, d, i)).collect(),
                        mass,
                    })
                    .collect();
                ValuationSpec {
                    domain,
                    table: None,
                    focal: Some(focal),
                }
            }
        }
    }
}

fn config_index(reg: &Registry, d: &Domain, cfg: &BTreeMap<String, String>) -> Result<usize> {
    if cfg.len() != d.len() {
        return Err(Error::Parse(format!(
            "configuration assigns {} variables, domain has {}",
            cfg.len(),
            d.len()
        )));
    }
    let mut states = Vec::with_capacity(d.len());
    for &v in d.vars() {
        let var = reg.var(v);
        let label = cfg
            .get(&var.name)
            .ok_or_else(|| Error::Parse(format!("configuration misses variable {}", var.name)))?;
        let s = var
            .states
            .iter()
            .position(|x| x == label)
            .ok_or_else(|| Error::Parse(format!("{} has no state {label}", var.name)))?;
        states.push(s);
    }
    Ok(d.encode(&states))
}

fn config_object(reg: &Registry, d: &Domain, index: usize) -> BTreeMap<String, String> {
    d.vars()
        .iter()
        .zip(d.decode(index))
        .map(|(&v, s)| {
            let var = reg.var(v);
            (var.name.clone(), var.states[s].clone())
        })
        .collect()
}
