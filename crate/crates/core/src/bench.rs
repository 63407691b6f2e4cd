//! Fusion under each elimination heuristic against the brute-force joint.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::domain::{Domain, VarId};
use crate::error::{Error, Result};
use crate::fusion::{
    brute_force_marginal, elimination_order, fusion_run, FactoredModel, Heuristic,
    BRUTE_FORCE_LIMIT,
};
use crate::valuation::{same_valuation, Calculus, Valuation, DEFAULT_TOL};

#[derive(Debug, Clone)]
pub struct HeuristicTiming {
    pub heuristic: Heuristic,
    pub order: Vec<VarId>,
    pub peak_cells: usize,
    pub zero_shortcut: bool,
    /// Mean wall time over the repetitions.
    pub mean: Duration,
}

#[derive(Debug, Clone)]
pub struct BruteTiming {
    pub cells: u64,
    pub mean: Duration,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub target: Domain,
    pub repeat: usize,
    pub marginal: Valuation,
    pub fusion: Vec<HeuristicTiming>,
    /// Absent when the joint exceeds the dense-table guard.
    pub brute: Option<BruteTiming>,
}

fn mean(total: Duration, n: usize) -> Duration {
    total / n.max(1) as u32
}

/// Times fusion under every heuristic and, when it fits, the brute-force
/// marginal. Every path must produce the same marginal; a disagreement is an
/// error rather than a report.
pub fn bench_fusion(model: &FactoredModel, target: &Domain, repeat: usize) -> Result<BenchReport> {
    let repeat = repeat.max(1);
    let tol = if model.calculus() == Calculus::Kappa {
        0.0
    } else {
        DEFAULT_TOL
    };
    let mut fusion = Vec::new();
    let mut reference: Option<Valuation> = None;
    for h in Heuristic::ALL {
        let plan = elimination_order(model, target, h)?;
        let mut total = Duration::ZERO;
        let mut run = None;
        for _ in 0..repeat {
            let t = Instant::now();
            let r = fusion_run(model, target, &plan)?;
            total += t.elapsed();
            run = Some(r);
        }
        let run = run.expect("at least one repetition");
        match &reference {
            None => reference = Some(run.marginal.clone()),
            Some(m) if !same_valuation(m, &run.marginal, tol) => {
                return Err(Error::precondition(format!(
                    "fusion with {h} disagrees with {}",
                    Heuristic::ALL[0]
                )));
            }
            _ => {}
        }
        fusion.push(HeuristicTiming {
            heuristic: h,
            order: plan.order,
            peak_cells: run.peak_cells,
            zero_shortcut: run.zero_shortcut,
            mean: mean(total, repeat),
        });
    }
    let marginal = reference.expect("three heuristics ran");

    let cells = model.variables().checked_size().unwrap_or(u64::MAX);
    let brute = if cells <= BRUTE_FORCE_LIMIT {
        let mut total = Duration::ZERO;
        let mut last = None;
        for _ in 0..repeat {
            let t = Instant::now();
            let b = brute_force_marginal(model, target)?;
            total += t.elapsed();
            last = Some(b);
        }
        if !same_valuation(&marginal, last.as_ref().unwrap(), tol) {
            return Err(Error::precondition(
                "fusion disagrees with the brute-force marginal",
            ));
        }
        Some(BruteTiming {
            cells,
            mean: mean(total, repeat),
        })
    } else {
        None
    };

    Ok(BenchReport {
        target: target.clone(),
        repeat,
        marginal,
        fusion,
        brute,
    })
}

impl BenchReport {
    pub fn to_text(&self, model: &FactoredModel) -> String {
        let reg = model.registry();
        let mut out = String::new();
        let target = reg.names_of(&self.target).join(",");
        let _ = writeln!(out, "bench: target={{{target}}} repeat={}", self.repeat);
        let _ = writeln!(
            out,
            "{:<12}  {:>12}  {:>12}  order",
            "method", "peak cells", "mean µs"
        );
        for f in &self.fusion {
            let order: Vec<&str> = f.order.iter().map(|&v| reg.name(v)).collect();
            let _ = writeln!(
                out,
                "{:<12}  {:>12}  {:>12.3}  {}{}",
                f.heuristic.as_str(),
                f.peak_cells,
                f.mean.as_secs_f64() * 1e6,
                order.join(" "),
                if f.zero_shortcut {
                    "  (zero shortcut)"
                } else {
                    ""
                }
            );
        }
        match &self.brute {
            Some(b) => {
                let _ = writeln!(
                    out,
                    "{:<12}  {:>12}  {:>12.3}",
                    "brute-force",
                    b.cells,
                    b.mean.as_secs_f64() * 1e6
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "brute-force   omitted: joint exceeds {BRUTE_FORCE_LIMIT} cells"
                );
            }
        }
        let _ = writeln!(out, "all methods agree");
        out
    }

    pub fn to_json(&self, model: &FactoredModel) -> Value {
        let reg = model.registry();
        json!({
            "target": reg.names_of(&self.target),
            "repeat": self.repeat,
            "fusion": self.fusion.iter().map(|f| json!({
                "heuristic": f.heuristic.as_str(),
                "order": f.order.iter().map(|&v| reg.name(v)).collect::<Vec<_>>(),
                "peak_cells": f.peak_cells,
                "zero_shortcut": f.zero_shortcut,
                "mean_seconds": f.mean.as_secs_f64(),
            })).collect::<Vec<_>>(),
            "brute_force": self.brute.as_ref().map(|b| json!({
                "cells": b.cells,
                "mean_seconds": b.mean.as_secs_f64(),
            })),
            "agree": true,
        })
    }
}
