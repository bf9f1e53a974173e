use gaussnet_core::classify::{canonical_matrix, classify_with, verify_classification, ClassifyOptions};
use gaussnet_core::measure::{ggqc_with, Bipartition, GgqcReport};
use gaussnet_core::network::{
    apply_protocol_with, build_initial_state, check_attainment, design_optimal, quoted_lambda_sq_threshold,
    type_iv_condition, verify_network_with, Design, OpRecord,
};
use gaussnet_core::search::{random_search_max_ggqc, sweep_lambda_with, SearchConfig, SweepRow};
use gaussnet_core::CanonicalForm;
use nalgebra::Matrix4;
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::error::{CliError, Result};
use crate::report::{fmt_f64, inputs_digest};

/// Command-line settings that affect results.
#[derive(Debug, Clone, PartialEq)]
pub struct Flags {
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub full_table: bool,
}

impl Default for Flags {
    fn default() -> Self {
        Flags {
            seed: 0,
            samples: 200,
            tol: 1e-9,
            full_table: false,
        }
    }
}

impl Flags {
    fn describe(&self) -> String {
        format!(
            "seed={};samples={};tol={};full_table={}",
            self.seed,
            self.samples,
            fmt_f64(self.tol),
            self.full_table
        )
    }
}

/// What a run produces.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Json(Value),
    Csv(String),
}

fn one_based(modes: &[usize]) -> Value {
    json!(modes.iter().map(|m| m + 1).collect::<Vec<_>>())
}

fn rows(m: &Matrix4<f64>) -> Value {
    json!((0..4).map(|r| (0..4).map(|c| m[(r, c)]).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn form_json(f: &CanonicalForm) -> Value {
    serde_json::to_value(f).expect("canonical forms serialize")
}

fn bipartition_json(b: &Bipartition) -> Value {
    json!({ "side": one_based(&b.side()), "complement": one_based(&b.complement()) })
}

fn ggqc_json(r: &GgqcReport, full_table: bool) -> Value {
    let mut v = json!({
        "value": r.value,
        "argmin": one_based(&r.argmin.side()),
        "argmin_complement": one_based(&r.argmin.complement()),
        "det_gamma": r.det_gamma,
        "bipartitions": r.table.len(),
    });
    if full_table {
        v["table"] = json!(r
            .table
            .iter()
            .map(|e| json!({
                "side": one_based(&e.bipartition.side()),
                "d_side": e.d_side,
                "d_complement": e.d_complement,
                "m": e.m,
            }))
            .collect::<Vec<_>>());
    }
    v
}

fn design_json(d: &Design) -> Value {
    json!({
        "type": d.input.kind.name(),
        "gamma_out": d.input.gamma_out,
        "gamma_in": d.input.gamma_in,
        "lambda_sq_threshold": d.lambda_sq_threshold,
        "lambda_sq": d.lambda_sq,
        "form": form_json(&d.form),
    })
}

fn op_json(r: &OpRecord) -> Value {
    json!({
        "modes": one_based(&[r.modes.0, r.modes.1]),
        "gamma_out": r.gamma_out,
        "gamma_in": r.gamma_in,
        "matrix": rows(&r.matrix),
        "design": r.design.as_ref().map(design_json),
        "eq9": { "holds": r.attainment.holds, "lhs": r.attainment.lhs, "rhs": r.attainment.rhs },
        "in_scope": r.in_scope,
    })
}

fn run_ggqc(cfg: &RunConfig, flags: &Flags) -> Result<Value> {
    let initial = build_initial_state(&cfg.spec)?;
    let state = if cfg.spec.operations.is_empty() {
        initial
    } else {
        apply_protocol_with(&initial, &cfg.spec, &cfg.options.ggqc)?.state
    };
    let report = ggqc_with(&state, &cfg.options.ggqc)?;
    let mut v = ggqc_json(&report, flags.full_table);
    v["modes"] = json!(state.modes());
    Ok(v)
}

fn run_classify(cfg: &RunConfig, flags: &Flags) -> Result<Value> {
    let m = cfg.matrix.expect("validated at parse time");
    let s = gaussnet_core::SymplecticMatrix::from_matrix4(&m, flags.tol)?;
    let opts = ClassifyOptions {
        input_tol: flags.tol,
        ..ClassifyOptions::default()
    };
    let r = classify_with(&s, &opts)?;
    Ok(json!({
        "type": r.form.name(),
        "form": form_json(&r.form),
        "left": rows(&r.left),
        "right": rows(&r.right),
        "residual": r.residual,
        "verified_residual": verify_classification(&s, &r)?,
        "branch": serde_json::to_value(r.branch).expect("branch serializes"),
        "det_a": r.det_a,
    }))
}

fn run_design(cfg: &RunConfig) -> Result<Value> {
    let (input, margin) = cfg.design.expect("validated at parse time");
    let d = design_optimal(&input, margin)?;
    let m = canonical_matrix(&d.form)?.to_matrix4()?;
    let attainment = check_attainment(&m, input.gamma_out, input.gamma_in);
    let mut v = design_json(&d);
    v["quoted_lambda_sq_threshold"] = json!(quoted_lambda_sq_threshold(&input));
    v["matrix"] = rows(&m);
    v["eq9"] = json!({ "holds": attainment.holds, "lhs": attainment.lhs, "rhs": attainment.rhs });
    if let CanonicalForm::IV { lambda1, lambda2 } = d.form {
        let (lhs, rhs) = type_iv_condition(input.gamma_out, input.gamma_in, lambda1, lambda2);
        v["condition"] = json!({ "lhs": lhs, "rhs": rhs });
    }
    Ok(v)
}

fn run_verify(cfg: &RunConfig, flags: &Flags) -> Result<Value> {
    let r = verify_network_with(&cfg.spec, &cfg.options.ggqc)?;
    let search = if flags.samples > 0 && !cfg.spec.operations.is_empty() {
        let sc = SearchConfig {
            samples: flags.samples,
            seed: flags.seed,
            sampler: cfg.options.sampler,
            include_designed: cfg.options.include_designed,
            ggqc: cfg.options.ggqc,
        };
        let s = random_search_max_ggqc(&cfg.spec, &sc)?;
        json!({
            "samples": flags.samples,
            "sampler": serde_json::to_value(sc.sampler).expect("sampler serializes"),
            "include_designed": sc.include_designed,
            "best_value": s.best_value,
            "best_sample": s.best_sample,
            "excess_over_bound": s.best_value - s.bound,
            "trace": s.trace.iter().map(|t| json!({"sample": t.sample, "value": t.value})).collect::<Vec<_>>(),
        })
    } else {
        Value::Null
    };
    let nodes: serde_json::Map<String, Value> = cfg
        .spec
        .node_assignment
        .iter()
        .map(|(m, label)| ((m + 1).to_string(), json!(label)))
        .collect();
    Ok(json!({
        "resultant_ggqc": r.resultant_ggqc,
        "argmin": bipartition_json(&r.argmin),
        "source_ggqc": r.source_ggqc,
        "bound": r.bound,
        "gap": r.gap,
        "det_gamma": r.det_gamma,
        "eq9_ok": r.attainment_ok(),
        "operations": r.operations.iter().map(op_json).collect::<Vec<_>>(),
        "nodes": nodes,
        "search": search,
    }))
}

fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
    w.write_record(["lambda", "ggqc", "eq9", "gap"]).map_err(io)?;
    for r in rows {
        w.write_record([fmt_f64(r.lambda), fmt_f64(r.ggqc), r.attainment.to_string(), fmt_f64(r.gap)])
            .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Executes a validated configuration. `config_bytes` feeds the inputs digest.
pub fn run(cfg: &RunConfig, flags: &Flags, config_bytes: &[u8]) -> Result<Output> {
    let results = match cfg.command {
        Command::Ggqc => run_ggqc(cfg, flags)?,
        Command::Classify => run_classify(cfg, flags)?,
        Command::Design => run_design(cfg)?,
        Command::VerifyNetwork => run_verify(cfg, flags)?,
        Command::Sweep => {
            let (kind, grid) = cfg.sweep.as_ref().expect("validated at parse time");
            let rows = sweep_lambda_with(&cfg.spec, *kind, grid, &cfg.options.ggqc)?;
            return Ok(Output::Csv(sweep_csv(&rows)?));
        }
    };
    Ok(Output::Json(json!({
        "command": cfg.command.as_str(),
        "inputs_digest": inputs_digest(config_bytes, &flags.describe()),
        "results": results,
        "seed": flags.seed,
        "version": env!("CARGO_PKG_VERSION"),
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn run_text(text: &str) -> Output {
        let cfg = parse_config(text, None, 1e-9).unwrap();
        run(&cfg, &Flags { samples: 4, ..Flags::default() }, text.as_bytes()).unwrap()
    }

    #[test]
    fn product_sources_have_zero() {
        let out = run_text(
            r#"{"command": "ggqc", "sources": [{"kind": "tritter", "gamma": 0.5}, {"kind": "two_mode_pure", "gamma": 2}]}"#,
        );
        let Output::Json(v) = out else { panic!() };
        assert!(v["results"]["value"].as_f64().unwrap().abs() <= 1e-12);
        assert_eq!(v["results"]["modes"], 5);
    }

    #[test]
    fn classify_type_v() {
        let out = run_text(r#"{"command": "classify", "matrix": [[0,0,1,0],[0,0,0,1],[-1,0,0,0],[0,-1,0,0]]}"#);
        let Output::Json(v) = out else { panic!() };
        assert_eq!(v["results"]["type"], "V");
    }

    #[test]
    fn design_reports_threshold() {
        let out = run_text(r#"{"command": "design", "design": {"type": "I", "gamma_out": 2, "gamma_in": 2}}"#);
        let Output::Json(v) = out else { panic!() };
        let t = v["results"]["lambda_sq_threshold"].as_f64().unwrap();
        assert!((t - (2f64.sqrt() - 1.0) / 2.0).abs() <= 1e-14);
        assert_eq!(v["results"]["eq9"]["holds"], true);
    }

    #[test]
    fn sweep_emits_csv() {
        let out = run_text(
            r#"{"command": "sweep", "sources": [{"kind": "tritter", "gamma": 0.5}, {"kind": "tritter", "gamma": 0.5}],
            "operations": [{"modes": [3, 4], "unitary": {"design": "I"}}],
            "sweep": {"type": "I", "grid": [0.0, 0.5]}}"#,
        );
        let Output::Csv(text) = out else { panic!() };
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "lambda,ggqc,eq9,gap");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0.0000000000000000e0,"));
        assert!(lines[1].contains(",false,"));
    }
}
