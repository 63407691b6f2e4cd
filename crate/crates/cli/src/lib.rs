//! Command-line dispatch for the `vbs` binary.

use std::ffi::OsString;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use vbs::audit::{run_axiom_suite, AuditCaps};
use vbs::bench::bench_fusion;
use vbs::format::{render_valuation, valuation_json};
use vbs::fusion::{elimination_order, fusion_run, FactoredModel, Heuristic};
use vbs::independence::{
    conditional, graphoid_audit, is_cond_independent, is_independent, CiTriple, MarginalTable,
    Verdict,
};
use vbs::model::{parse_model, ParseOptions};
use vbs::{classify, Calculus, Domain, Error, Registry};

#[derive(Parser, Debug)]
#[command(
    name = "vbs",
    version,
    about = "Valuation-based inference and independence queries"
)]
struct Cli {
    /// Emit a structured JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Admit non-proper valuations in model files (they are classified, never normalized).
    #[arg(long, global = true)]
    allow_improper: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ModelArg {
    /// Model file.
    #[arg(long)]
    model: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Marginal of the joint on a set of variables, by fusion.
    Marginal {
        #[command(flatten)]
        model: ModelArg,
        /// Comma-separated variable names.
        #[arg(long)]
        target: String,
        #[arg(long, default_value = "min-fill")]
        order: String,
    },
    /// Unconditional independence r ⊥ s.
    Indep {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        r: String,
        #[arg(long)]
        s: String,
    },
    /// Conditional independence r ⊥ s | t.
    Ci {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        r: String,
        #[arg(long)]
        s: String,
        #[arg(long, default_value = "")]
        t: String,
    },
    /// Conditional of the joint given a set of variables.
    Conditional {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        given: String,
    },
    /// Class membership of one valuation of the model file.
    Classify {
        #[command(flatten)]
        model: ModelArg,
        /// Zero-based position in the file's valuation list.
        #[arg(long)]
        index: usize,
    },
    /// Randomized audit of the algebraic laws for one calculus.
    AxiomCheck {
        #[arg(long)]
        calculus: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        trials: u64,
        #[arg(long, default_value_t = 3)]
        max_vars: usize,
        #[arg(long, default_value_t = 3)]
        max_states: usize,
    },
    /// Graphoid properties of the model's independence relation.
    GraphoidAudit {
        #[command(flatten)]
        model: ModelArg,
        /// Treat intersection failures as defects; requires a positive joint.
        #[arg(long)]
        positive: bool,
    },
    /// Fusion under each heuristic against the brute-force joint.
    Bench {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 10)]
        repeat: usize,
    },
}

/// Text or JSON output plus the exit status.
struct Output {
    code: u8,
    text: String,
    json: Value,
}

impl Output {
    fn ok(text: String, json: Value) -> Self {
        Output {
            code: 0,
            text,
            json,
        }
    }
}

fn load(arg: &ModelArg, allow_improper: bool) -> Result<FactoredModel, String> {
    let text = std::fs::read_to_string(&arg.model)
        .map_err(|e| format!("cannot read {}: {e}", arg.model))?;
    parse_model(&text, ParseOptions { allow_improper }).map_err(|e| format!("{}: {e}", arg.model))
}

fn names(list: &str) -> Vec<&str> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

fn domain(reg: &Registry, list: &str) -> Result<Domain, Error> {
    reg.domain_of(&names(list))
}

fn truth(query: &str, verdict: Verdict, json: Value) -> Output {
    let (code, text) = match &verdict {
        Verdict::Holds => (0, "true".to_string()),
        Verdict::Fails => (1, "false".to_string()),
        Verdict::Undecidable(why) => (2, format!("undecidable: {why}")),
    };
    let mut json = json;
    json["query"] = json!(query);
    json["result"] = match verdict.holds() {
        Some(b) => json!(b),
        None => json!("undecidable"),
    };
    Output {
        code,
        text: format!("{text}\n"),
        json,
    }
}

fn execute(cli: &Cli) -> Result<Output, String> {
    let improper = cli.allow_improper;
    let err = |e: Error| e.to_string();
    match &cli.command {
        Command::Marginal {
            model,
            target,
            order,
        } => {
            let m = load(model, improper)?;
            let reg = m.registry();
            let target = domain(reg, target).map_err(err)?;
            let h: Heuristic = order.parse().map_err(err)?;
            let plan = elimination_order(&m, &target, h).map_err(err)?;
            let run = fusion_run(&m, &target, &plan).map_err(err)?;
            let order: Vec<&str> = plan.order.iter().map(|&v| reg.name(v)).collect();
            let text = format!(
                "elimination order ({h}): {}\n{}",
                if order.is_empty() {
                    "-".to_string()
                } else {
                    order.join(" ")
                },
                render_valuation(reg, &run.marginal)
            );
            let json = json!({
                "query": "marginal",
                "heuristic": h.as_str(),
                "order": order,
                "marginal": valuation_json(reg, &run.marginal),
            });
            Ok(Output::ok(text, json))
        }
        Command::Indep { model, r, s } => {
            let m = load(model, improper)?;
            let reg = m.registry();
            let (rd, sd) = (domain(reg, r).map_err(err)?, domain(reg, s).map_err(err)?);
            let b = is_independent(&m, &rd, &sd).map_err(err)?;
            let json = json!({"r": reg.names_of(&rd), "s": reg.names_of(&sd)});
            Ok(truth("indep", Verdict::from_bool(b), json))
        }
        Command::Ci { model, r, s, t } => {
            let m = load(model, improper)?;
            let reg = m.registry();
            let triple = CiTriple::new(
                domain(reg, r).map_err(err)?,
                domain(reg, s).map_err(err)?,
                domain(reg, t).map_err(err)?,
            )
            .map_err(err)?;
            let v = is_cond_independent(&m, &triple).map_err(err)?;
            let json = json!({
                "r": reg.names_of(&triple.r),
                "s": reg.names_of(&triple.s),
                "t": reg.names_of(&triple.t),
            });
            Ok(truth("ci", v, json))
        }
        Command::Conditional { model, given } => {
            let m = load(model, improper)?;
            let reg = m.registry();
            let given = domain(reg, given).map_err(err)?;
            let tau = m.joint().map_err(err)?;
            let c = conditional(&tau, &given).map_err(err)?;
            let label = if given.is_empty() {
                "∅".to_string()
            } else {
                reg.names_of(&given).join(",")
            };
            let text = format!(
                "conditional given {{{label}}}\n{}",
                render_valuation(reg, &c)
            );
            let json = json!({
                "query": "conditional",
                "given": reg.names_of(&given),
                "conditional": valuation_json(reg, &c),
            });
            Ok(Output::ok(text, json))
        }
        Command::Classify { model, index } => {
            let m = load(model, improper)?;
            let reg = m.registry();
            let v = m.factors().get(*index).ok_or_else(|| {
                format!(
                    "index {index} out of range: the model has {} valuations",
                    m.factors().len()
                )
            })?;
            let f = classify(v);
            let text = format!("valuation {index}: {f}\n{}", render_valuation(reg, v));
            let json = json!({
                "query": "classify",
                "index": index,
                "zero": f.is_zero,
                "proper": f.is_proper,
                "normal": f.is_normal,
                "positive": f.is_positive,
                "valuation": valuation_json(reg, v),
            });
            Ok(Output::ok(text, json))
        }
        Command::AxiomCheck {
            calculus,
            seed,
            trials,
            max_vars,
            max_states,
        } => {
            let c: Calculus = calculus.parse().map_err(err)?;
            let caps = AuditCaps {
                max_vars: *max_vars,
                max_states: *max_states,
            };
            let report = run_axiom_suite(c, *seed, *trials, caps).map_err(err)?;
            Ok(Output::ok(report.to_text(), report.to_json()))
        }
        Command::GraphoidAudit { model, positive } => {
            let m = load(model, improper)?;
            let table = MarginalTable::from_model(&m).map_err(err)?;
            let report = graphoid_audit(&table, *positive).map_err(err)?;
            Ok(Output::ok(
                report.to_text(m.registry()),
                report.to_json(m.registry()),
            ))
        }
        Command::Bench {
            model,
            target,
            repeat,
        } => {
            let m = load(model, improper)?;
            let target = domain(m.registry(), target).map_err(err)?;
            let report = bench_fusion(&m, &target, *repeat).map_err(err)?;
            let mut json = report.to_json(&m);
            json["marginal"] = valuation_json(m.registry(), &report.marginal);
            let text = format!(
                "{}{}",
                report.to_text(&m),
                render_valuation(m.registry(), &report.marginal)
            );
            Ok(Output::ok(text, json))
        }
    }
}

/// Exit status and captured streams of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (program name first) and executes the subcommand.
/// Exit codes: 0 success, 1 a false independence query, 2 any error.
pub fn run<I, T>(args: I) -> Run
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Run {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Run {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            let stdout = if cli.json {
                format!(
                    "{}\n",
                    serde_json::to_string_pretty(&out.json).expect("serializable report")
                )
            } else {
                out.text
            };
            Run {
                code: out.code,
                stdout,
                stderr: String::new(),
            }
        }
        Err(msg) => Run {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(name: &str) -> String {
        format!("{}/../../models/{name}", env!("CARGO_MANIFEST_DIR"))
    }

    fn vbs(args: &[&str]) -> Run {
        run(std::iter::once("vbs").chain(args.iter().copied()))
    }

    fn stdout(o: &Run) -> String {
        o.stdout.clone()
    }

    #[test]
    fn truth_values_set_the_exit_code() {
        let chain = model("chain.json");
        let o = vbs(&["ci", "--model", &chain, "--r", "Y", "--s", "Z", "--t", "X"]);
        assert_eq!(
            (Some(o.code as i32), stdout(&o).as_str()),
            (Some(0), "true\n")
        );
        let o = vbs(&["indep", "--model", &chain, "--r", "Y", "--s", "Z"]);
        assert_eq!(
            (Some(o.code as i32), stdout(&o).as_str()),
            (Some(1), "false\n")
        );
        let o = vbs(&["ci", "--model", &chain, "--r", "Y", "--s", "Z"]);
        assert_eq!(Some(o.code as i32), Some(1));
        let copy = model("copy_chain.json");
        let o = vbs(&["ci", "--model", &copy, "--r", "X", "--s", "Y", "--t", "Z"]);
        assert_eq!(Some(o.code as i32), Some(0));
        let o = vbs(&["indep", "--model", &copy, "--r", "X", "--s", "Y,Z"]);
        assert_eq!(Some(o.code as i32), Some(1));
    }

    #[test]
    fn marginal_prints_labelled_twelve_digit_entries() {
        let o = vbs(&[
            "marginal",
            "--model",
            &model("prior_likelihood.json"),
            "--target",
            "Y",
        ]);
        assert_eq!(Some(o.code as i32), Some(0));
        let text = stdout(&o);
        assert!(text.contains("Y=0  0.620000000000"), "{text}");
        assert!(text.contains("Y=1  0.380000000000"), "{text}");
        let o = vbs(&[
            "marginal",
            "--model",
            &model("kappa_chain.json"),
            "--target",
            "Z",
            "--order",
            "declared",
        ]);
        assert!(stdout(&o).contains("kappa valuation on {Z}"));
    }

    #[test]
    fn json_output_is_structured() {
        let o = vbs(&[
            "--json",
            "indep",
            "--model",
            &model("chain.json"),
            "--r",
            "Y",
            "--s",
            "Z",
        ]);
        assert_eq!(Some(o.code as i32), Some(1));
        let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["result"], false);
        let o = vbs(&[
            "marginal",
            "--model",
            &model("prior_likelihood.json"),
            "--target",
            "Y",
            "--json",
        ]);
        let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["marginal"]["entries"][0]["value"], 0.62);
    }

    #[test]
    fn errors_exit_with_two() {
        let chain = model("chain.json");
        for args in [
            vec!["frobnicate"],
            vec!["indep", "--model", "missing.json", "--r", "X", "--s", "Y"],
            vec!["indep", "--model", &chain, "--r", "X", "--s", "Q"],
            vec![
                "indep", "--model", &chain, "--r", "X", "--s", "Y", "--bogus",
            ],
            vec!["ci", "--model", &chain, "--r", "X", "--s", "X"],
            vec![
                "marginal", "--model", &chain, "--target", "Y", "--order", "random",
            ],
            vec!["classify", "--model", &chain, "--index", "9"],
            vec!["axiom-check", "--calculus", "fuzzy"],
            vec![
                "graphoid-audit",
                "--model",
                &model("copy_chain.json"),
                "--positive",
            ],
        ] {
            let o = vbs(&args);
            assert_eq!(Some(o.code as i32), Some(2), "{args:?}");
            assert!(!o.stderr.is_empty(), "{args:?}");
        }
    }

    #[test]
    fn improper_factors_need_the_flag() {
        let dir = std::env::temp_dir().join(format!("vbs-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("neg.json");
        std::fs::write(
            &path,
            r#"{"calculus":"probability","variables":[{"name":"X","states":["a","b"]}],
                "valuations":[{"domain":["X"],"table":[-0.5,1.5]}]}"#,
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let o = vbs(&["classify", "--model", p, "--index", "0"]);
        assert_eq!(Some(o.code as i32), Some(2));
        assert!(o.stderr.contains("valuation 0"));
        let o = vbs(&["classify", "--model", p, "--index", "0", "--allow-improper"]);
        assert_eq!(Some(o.code as i32), Some(0));
        assert!(stdout(&o).contains("proper=false"), "{}", stdout(&o));
        assert!(stdout(&o).contains("-0.500000000000"));
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn conditional_and_audit_commands_run() {
        let o = vbs(&[
            "conditional",
            "--model",
            &model("chain.json"),
            "--given",
            "X",
        ]);
        assert_eq!(Some(o.code as i32), Some(0));
        assert!(
            stdout(&o).contains("X=0,Y=0,Z=0  0.360000000000"),
            "{}",
            stdout(&o)
        );
        let o = vbs(&[
            "axiom-check",
            "--calculus",
            "kappa",
            "--seed",
            "1",
            "--trials",
            "20",
        ]);
        assert_eq!(Some(o.code as i32), Some(0));
        assert!(stdout(&o).starts_with("axiom audit: calculus=kappa seed=1 trials=20"));
        let o = vbs(&[
            "bench",
            "--model",
            &model("chain.json"),
            "--target",
            "Z",
            "--repeat",
            "2",
        ]);
        assert_eq!(Some(o.code as i32), Some(0));
        assert!(stdout(&o).contains("Z=0  0.650000000000"));
    }
}
