//! Fixed 12-significant-digit number formatting and valuation rendering.

use serde_json::{json, Value};

use crate::domain::Registry;
use crate::valuation::Valuation;

pub const SIG_DIGITS: usize = 12;

/// `x` with 12 significant digits. Plain decimal notation for exponents in
/// `-5..12`, scientific otherwise; `inf` / `-inf` / `nan` for non-finite
/// values. Negative zero prints as `0`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return format!("{:.*}", SIG_DIGITS - 1, 0.0);
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// `x` rounded to 12 significant digits, as a JSON value (`"inf"` for +∞).
pub fn json_num(x: f64) -> Value {
    if x.is_finite() {
        let r: f64 = format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap();
        json!(if r == 0.0 { 0.0 } else { r })
    } else {
        json!(fmt_num(x))
    }
}

fn domain_label(reg: &Registry, v: &Valuation) -> String {
    let names = reg.names_of(v.domain());
    if names.is_empty() {
        "∅".into()
    } else {
        names.join(",")
    }
}

/// One line per configuration (tables) or focal set (mass functions).
pub fn render_valuation(reg: &Registry, v: &Valuation) -> String {
    let mut out = format!(
        "{} valuation on {{{}}}\n",
        v.calculus(),
        domain_label(reg, v)
    );
    let d = v.domain();
    match v {
        Valuation::Tabular(t) => {
            let labels: Vec<String> = (0..d.size()).map(|i| cfg_label(reg, v, i)).collect();
            let w = labels.iter().map(|l| l.chars().count()).max().unwrap_or(0);
            for (l, &x) in labels.iter().zip(t.values()) {
                out.push_str(&format!("  {l:<w$}  {}\n", fmt_num(x)));
            }
        }
        Valuation::Mass(m) => {
            if m.is_zero() {
                out.push_str("  (no focal sets)\n");
            }
            for (set, &mass) in m.focal() {
                let members: Vec<String> = set.iter().map(|i| cfg_label(reg, v, i)).collect();
                out.push_str(&format!(
                    "  {{{}}}  {}\n",
                    members.join(" | "),
                    fmt_num(mass)
                ));
            }
        }
    }
    out
}

fn cfg_label(reg: &Registry, v: &Valuation, index: usize) -> String {
    if v.domain().is_empty() {
        "()".into()
    } else {
        reg.config_label(v.domain(), index)
    }
}

/// Structured form of [`render_valuation`].
pub fn valuation_json(reg: &Registry, v: &Valuation) -> Value {
    let d = v.domain();
    let mut obj = json!({
        "calculus": v.calculus().as_str(),
        "domain": reg.names_of(d),
    });
    match v {
        Valuation::Tabular(t) => {
            obj["entries"] = t
                .values()
                .iter()
                .enumerate()
                .map(|(i, &x)| json!({"configuration": cfg_label(reg, v, i), "value": json_num(x)}))
                .collect();
        }
        Valuation::Mass(m) => {
            obj["focal"] = m
                .focal()
                .iter()
                .map(|(set, &mass)| {
                    let members: Vec<String> = set.iter().map(|i| cfg_label(reg, v, i)).collect();
                    json!({"set": members, "mass": json_num(mass)})
                })
                .collect();
        }
    }
    obj
}
