//! Run configuration documents.
//!
//! Mode indices in documents are 1-based; they are converted to the
//! library's zero-based indices here.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use gaussnet_core::measure::GgqcOptions;
use gaussnet_core::network::{DesignInput, DesignType, NetworkSpec, OpUnitary, Operation, ThresholdRule, DEFAULT_MARGIN};
use gaussnet_core::search::{linspace, Sampler};
use gaussnet_core::{CanonicalForm, StateKind, SymplecticMatrix};
use nalgebra::Matrix4;
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ggqc,
    Classify,
    Design,
    VerifyNetwork,
    Sweep,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Ggqc => "ggqc",
            Command::Classify => "classify",
            Command::Design => "design",
            Command::VerifyNetwork => "verify-network",
            Command::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ggqc" => Ok(Command::Ggqc),
            "classify" => Ok(Command::Classify),
            "design" => Ok(Command::Design),
            "verify-network" => Ok(Command::VerifyNetwork),
            "sweep" => Ok(Command::Sweep),
            other => Err(CliError::Usage(format!(
                "unknown command {other:?}; expected ggqc, classify, design, verify-network or sweep"
            ))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    command: Option<String>,
    #[serde(default)]
    sources: Vec<StateKind>,
    #[serde(default)]
    operations: Vec<OperationDoc>,
    /// Node label per 1-based mode index.
    #[serde(default)]
    nodes: BTreeMap<String, String>,
    matrix: Option<Vec<Vec<f64>>>,
    design: Option<DesignDoc>,
    sweep: Option<SweepDoc>,
    #[serde(default)]
    options: OptionsDoc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperationDoc {
    modes: [usize; 2],
    unitary: UnitaryDoc,
}

/// Exactly one encoding must be present: `{type, lambda[, lambda2]}`,
/// `{xi}`, `{rows}` or `{design}`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitaryDoc {
    #[serde(rename = "type")]
    kind: Option<String>,
    lambda: Option<f64>,
    lambda2: Option<f64>,
    xi: Option<f64>,
    rows: Option<Vec<Vec<f64>>>,
    design: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignDoc {
    #[serde(rename = "type")]
    kind: String,
    gamma_out: f64,
    gamma_in: f64,
    margin: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepDoc {
    #[serde(rename = "type")]
    kind: String,
    grid: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OptionsDoc {
    standardize: bool,
    rule: ThresholdRule,
    margin: f64,
    n_max: usize,
    sampler: Sampler,
    include_designed: bool,
}

impl Default for OptionsDoc {
    fn default() -> Self {
        OptionsDoc {
            standardize: true,
            rule: ThresholdRule::default(),
            margin: DEFAULT_MARGIN,
            n_max: GgqcOptions::default().n_max,
            sampler: Sampler::default(),
            include_designed: false,
        }
    }
}

/// Run-wide settings taken from the `options` object.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub ggqc: GgqcOptions,
    pub sampler: Sampler,
    pub include_designed: bool,
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub spec: NetworkSpec,
    pub matrix: Option<Matrix4<f64>>,
    pub design: Option<(DesignInput, f64)>,
    pub sweep: Option<(DesignType, Vec<f64>)>,
    pub options: RunOptions,
}

fn semantic(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.to_string(),
        message: message.into(),
        line: 0,
        column: 0,
    }
}

fn matrix4(rows: &[Vec<f64>], path: &str, tol: f64) -> Result<Matrix4<f64>> {
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
        return Err(semantic(path, "expected a 4×4 array of rows"));
    }
    let m = Matrix4::from_fn(|r, c| rows[r][c]);
    SymplecticMatrix::from_matrix4(&m, tol)?;
    Ok(m)
}

fn design_type(name: &str, path: &str) -> Result<DesignType> {
    DesignType::parse(name).map_err(|e| match e {
        gaussnet_core::Error::Unsupported(_) => CliError::Core(e),
        other => semantic(path, other.to_string()),
    })
}

fn unitary(doc: &UnitaryDoc, path: &str, tol: f64) -> Result<OpUnitary> {
    let present = [doc.kind.is_some(), doc.xi.is_some(), doc.rows.is_some(), doc.design.is_some()]
        .iter()
        .filter(|&&b| b)
        .count();
    if present != 1 {
        return Err(semantic(
            path,
            "unitary needs exactly one of {type, lambda[, lambda2]}, {xi}, {rows} or {design}",
        ));
    }
    if (doc.lambda.is_some() || doc.lambda2.is_some()) && doc.kind.is_none() {
        return Err(semantic(path, "lambda and lambda2 belong to the canonical encoding"));
    }
    if let Some(kind) = &doc.kind {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| semantic(path, format!("type {kind} needs {name}")))
        };
        let form = match kind.as_str() {
            "I" => CanonicalForm::I { lambda: need(doc.lambda, "lambda")? },
            "II" => CanonicalForm::II { lambda: need(doc.lambda, "lambda")? },
            "III" => CanonicalForm::III { lambda: need(doc.lambda, "lambda")? },
            "IV" => {
                let lambda1 = need(doc.lambda, "lambda")?;
                CanonicalForm::IV {
                    lambda1,
                    lambda2: doc.lambda2.unwrap_or(-lambda1),
                }
            }
            "V" => CanonicalForm::V,
            "VI" => CanonicalForm::VI { lambda: need(doc.lambda, "lambda")? },
            other => return Err(semantic(path, format!("unknown canonical type {other:?}"))),
        };
        gaussnet_core::canonical_matrix(&form).map_err(|e| semantic(path, e.to_string()))?;
        return Ok(OpUnitary::Canonical(form));
    }
    if let Some(xi) = doc.xi {
        if !xi.is_finite() {
            return Err(semantic(path, "xi must be finite"));
        }
        return Ok(OpUnitary::Squeezer { xi });
    }
    if let Some(rows) = &doc.rows {
        return Ok(OpUnitary::Explicit(matrix4(rows, &format!("{path}.rows"), tol)?));
    }
    let name = doc.design.as_deref().expect("one encoding is present");
    Ok(OpUnitary::Designed(design_type(name, &format!("{path}.design"))?))
}

fn deserialize(text: &str) -> Result<Document> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: Document = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Config {
            path,
            message: inner.to_string(),
            line: inner.line(),
            column: inner.column(),
        }
    })?;
    Ok(doc)
}

/// Parses and validates a configuration. `command` overrides the document's
/// `command` key; `tol` is the symplecticity tolerance for matrix inputs.
pub fn parse_config(text: &str, command: Option<Command>, tol: f64) -> Result<RunConfig> {
    let doc = deserialize(text)?;
    let command = match (command, doc.command.as_deref()) {
        (Some(c), Some(d)) if c.as_str() != d => {
            return Err(CliError::Usage(format!(
                "command {c} given on the command line but the config says {d:?}"
            )))
        }
        (Some(c), _) => c,
        (None, Some(d)) => d.parse()?,
        (None, None) => return Err(CliError::Usage("no command given in the config or on the command line".into())),
    };

    let opts = &doc.options;
    if !(opts.margin >= 0.0) {
        return Err(semantic("options.margin", "margin must be ≥ 0"));
    }
    if opts.n_max < 2 {
        return Err(semantic("options.n_max", "n_max must be at least 2"));
    }

    for (k, s) in doc.sources.iter().enumerate() {
        let path = format!("sources[{k}]");
        match s.build() {
            Ok(_) => {}
            Err(e) if e.is_physics() => return Err(e.into()),
            Err(e) => return Err(semantic(&path, e.to_string())),
        }
    }
    let total: usize = doc.sources.iter().map(StateKind::modes).sum();

    let mut operations = Vec::with_capacity(doc.operations.len());
    for (k, op) in doc.operations.iter().enumerate() {
        let path = format!("operations[{k}]");
        let [i, j] = op.modes;
        if i == j {
            return Err(semantic(&format!("{path}.modes"), format!("mode {i} appears twice")));
        }
        if i == 0 || j == 0 || i > total || j > total {
            return Err(semantic(
                &format!("{path}.modes"),
                format!("modes are numbered 1..={total}, got [{i}, {j}]"),
            ));
        }
        operations.push(Operation::new(i - 1, j - 1, unitary(&op.unitary, &format!("{path}.unitary"), tol)?));
    }

    let mut node_assignment = BTreeMap::new();
    for (key, label) in &doc.nodes {
        let mode: usize = key
            .parse()
            .ok()
            .filter(|&m| m >= 1 && m <= total)
            .ok_or_else(|| semantic(&format!("nodes.{key}"), format!("node keys are modes 1..={total}")))?;
        node_assignment.insert(mode - 1, label.clone());
    }

    let mut spec = NetworkSpec::new(doc.sources, operations);
    spec.node_assignment = node_assignment;
    spec.standardize = opts.standardize;
    spec.rule = opts.rule;
    spec.margin = opts.margin;
    spec.op_tol = tol;

    let matrix = doc
        .matrix
        .as_ref()
        .map(|rows| matrix4(rows, "matrix", tol))
        .transpose()?;

    let design = match &doc.design {
        Some(d) => {
            let kind = design_type(&d.kind, "design.type")?;
            let input = DesignInput::new(d.gamma_out, d.gamma_in, kind).map_err(|e| semantic("design", e.to_string()))?;
            let margin = d.margin.unwrap_or(opts.margin);
            if !(margin >= 0.0) {
                return Err(semantic("design.margin", "margin must be ≥ 0"));
            }
            Some((input, margin))
        }
        None => None,
    };

    let sweep = match &doc.sweep {
        Some(s) => {
            let kind = design_type(&s.kind, "sweep.type")?;
            let grid = match (&s.grid, s.start, s.stop, s.points) {
                (Some(g), None, None, None) => g.clone(),
                (None, Some(a), Some(b), Some(n)) => linspace(a, b, n),
                _ => return Err(semantic("sweep", "give either grid or all of start, stop, points")),
            };
            if grid.is_empty() {
                return Err(semantic("sweep", "grid is empty"));
            }
            Some((kind, grid))
        }
        None => None,
    };

    let needs = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(semantic("", format!("command {command} needs {what}")))
        }
    };
    match command {
        Command::Ggqc => needs(!spec.sources.is_empty(), "sources")?,
        Command::Classify => needs(matrix.is_some(), "matrix")?,
        Command::Design => needs(design.is_some(), "design")?,
        Command::VerifyNetwork => needs(!spec.sources.is_empty(), "sources")?,
        Command::Sweep => {
            needs(!spec.sources.is_empty(), "sources")?;
            needs(!spec.operations.is_empty(), "operations")?;
            needs(sweep.is_some(), "sweep")?;
        }
    }

    Ok(RunConfig {
        command,
        spec,
        matrix,
        design,
        sweep,
        options: RunOptions {
            ggqc: GgqcOptions {
                n_max: opts.n_max,
                ..GgqcOptions::default()
            },
            sampler: opts.sampler,
            include_designed: opts.include_designed,
        },
    })
}
