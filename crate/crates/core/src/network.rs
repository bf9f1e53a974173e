//! Entanglement-generation protocol on networks of Gaussian sources.
//!
//! Sources are tensored in order; two-mode Gaussian unitaries are then applied
//! at intermediate nodes, each acting as the identity elsewhere. Mode indices
//! are zero-based and global (source `k` owns a contiguous range).
//!
//! For an operation on modes `(i, j)` the boundary mixedness values are
//! `γ_out = √det Γ_ii` and `γ_in = √det Γ_jj`, read after local
//! standardization turns both reduced blocks into multiples of the identity.
//! The operation preserves the smallest source correlation when
//!
//! `γ_out⁴ γ_in² ≤ det(γ_out S₁₁S₁₁ᵀ + γ_in S₁₂S₁₂ᵀ) · det(γ_out S₂₁S₂₁ᵀ + γ_in S₂₂S₂₂ᵀ)`
//!
//! together with enough coupling across the cut between the joined sources
//! (see [`cut_threshold`]).

use std::collections::BTreeMap;

use nalgebra::{DVector, Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::classify::{blocks, canonical_matrix, CanonicalForm};
use crate::error::{Error, Result};
use crate::measure::{ggqc_with, Bipartition, GgqcOptions};
use crate::state::{tensor_all, GaussianState, StateKind};
use crate::symplectic::{embed_single_mode, embed_two_mode, williamson_single_mode, GaussianUnitary, SymplecticMatrix};

/// Relative margin added to designed `λ²` thresholds.
pub const DEFAULT_MARGIN: f64 = 1e-6;

/// Default tolerance for accepting operation matrices as symplectic.
pub const OP_TOL: f64 = 1e-9;

/// A state is treated as pure when `|det Γ − 1|` is below this.
const PURITY_TOL: f64 = 1e-8;

/// The canonical families with a design rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DesignType {
    I,
    II,
    III,
    IV,
}

impl DesignType {
    pub fn name(&self) -> &'static str {
        match self {
            DesignType::I => "I",
            DesignType::II => "II",
            DesignType::III => "III",
            DesignType::IV => "IV",
        }
    }

    /// Parses `"I"` through `"IV"`. `"V"` and `"VI"` are reported as
    /// unsupported since they admit no design rule.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "I" => Ok(DesignType::I),
            "II" => Ok(DesignType::II),
            "III" => Ok(DesignType::III),
            "IV" => Ok(DesignType::IV),
            "V" | "VI" => Err(Error::Unsupported(format!("no design rule for type {name}"))),
            other => Err(Error::InvalidArgument(format!("unknown canonical type {other:?}"))),
        }
    }
}

/// Boundary mixedness of the two modes an operation joins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignInput {
    /// Mode feeding the first block of the 4×4 matrix.
    pub gamma_out: f64,
    /// Mode feeding the second block.
    pub gamma_in: f64,
    pub kind: DesignType,
}

impl DesignInput {
    pub fn new(gamma_out: f64, gamma_in: f64, kind: DesignType) -> Result<Self> {
        if !(gamma_out >= 1.0 && gamma_in >= 1.0) || !gamma_out.is_finite() || !gamma_in.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "boundary mixedness must be ≥ 1, got {gamma_out}, {gamma_in}"
            )));
        }
        Ok(DesignInput {
            gamma_out,
            gamma_in,
            kind,
        })
    }
}

fn positive_root(a: f64, b: f64, c: f64) -> f64 {
    // Larger root of a x² + b x + c, written to avoid cancellation when b > 0.
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    if b > 0.0 {
        (-2.0 * c) / (b + disc)
    } else {
        (-b + disc) / (2.0 * a)
    }
}

/// Smallest `λ²` at which the canonical family satisfies the attainment
/// inequality with equality. For type IV the pair is taken with
/// `|λ₁| = |λ₂|` and the value is `λ₁²`.
pub fn lambda_sq_threshold(input: &DesignInput) -> f64 {
    let (g1, g2) = (input.gamma_out, input.gamma_in);
    let s = g1 + g2;
    match input.kind {
        // (s x + g1)(s x + g2) = g1² g2
        DesignType::I => positive_root(s * s, s * s, g1 * g2 * (1.0 - g1)),
        // (s x − g1)(s x − g2) = g1² g2 on x ≥ 1
        DesignType::II => {
            let disc = (s.powi(4) + 4.0 * s * s * g1 * g2 * (g1 - 1.0)).sqrt();
            (s * s + disc) / (2.0 * s * s)
        }
        // (g1 + g2 x)(g2 + g1 x) = g1³ g2
        DesignType::III | DesignType::IV => positive_root(g1 * g2, g1 * g1 + g2 * g2, g1 * g2 * (1.0 - g1 * g1)),
    }
}

/// The closed-form table entries as usually quoted. Rows I, II and IV agree
/// with [`lambda_sq_threshold`]; row III squares `γ_out + γ_in` outside the
/// radical and drops a factor `γ_out γ_in` inside it, so it does not solve the
/// inequality (kept for comparison).
pub fn quoted_lambda_sq_threshold(input: &DesignInput) -> f64 {
    let (g1, g2) = (input.gamma_out, input.gamma_in);
    let s = g1 + g2;
    match input.kind {
        DesignType::I => (-s * s + (s.powi(4) + 4.0 * s * s * g1 * g2 * (g1 - 1.0)).sqrt()) / (2.0 * s * s),
        DesignType::II => (s * s + (s.powi(4) + 4.0 * s * s * g1 * g2 * (g1 - 1.0)).sqrt()) / (2.0 * s * s),
        DesignType::III => {
            let q = g1 * g1 + g2 * g2;
            (-s * s + (q * q + 4.0 * g1 * g2 * (g1 * g1 - 1.0)).sqrt()) / (2.0 * g1 * g2)
        }
        DesignType::IV => lambda_sq_threshold(input),
    }
}

/// Both sides of `(γ_out λ₁² + γ_in)(γ_in λ₂² + γ_out) ≥ γ_out³ γ_in`.
pub fn type_iv_condition(gamma_out: f64, gamma_in: f64, lambda1: f64, lambda2: f64) -> (f64, f64) {
    let lhs = (gamma_out * lambda1 * lambda1 + gamma_in) * (gamma_in * lambda2 * lambda2 + gamma_out);
    (lhs, gamma_out.powi(3) * gamma_in)
}

/// Smallest type-I `λ²` for which the cut separating two pure, standardized
/// sources keeps correlation `bound`. Across that cut
/// `M = 1 − ((γ_out γ_in + 1) λ² + 1)⁻⁴`.
pub fn cut_threshold(gamma_out: f64, gamma_in: f64, bound: f64) -> f64 {
    if !(bound > 0.0) {
        return 0.0;
    }
    ((1.0 - bound).powf(-0.25) - 1.0) / (gamma_out * gamma_in + 1.0)
}

/// How designed operations pick their strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// The inequality threshold alone.
    Inequality,
    /// For type I between pure sources, also clear [`cut_threshold`].
    #[default]
    InequalityAndCut,
}

/// A designed operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Design {
    pub input: DesignInput,
    /// Inequality threshold on `λ²` (on `λ₁²` for type IV).
    pub lambda_sq_threshold: f64,
    /// The `λ²` actually used.
    pub lambda_sq: f64,
    pub form: CanonicalForm,
}

fn form_for(kind: DesignType, lambda_sq: f64) -> CanonicalForm {
    let lambda = lambda_sq.max(0.0).sqrt();
    match kind {
        DesignType::I => CanonicalForm::I { lambda },
        DesignType::II => CanonicalForm::II { lambda },
        DesignType::III => CanonicalForm::III { lambda },
        DesignType::IV => CanonicalForm::IV {
            lambda1: lambda,
            lambda2: -lambda,
        },
    }
}

/// Operation of the requested family at its threshold. Types I–III use
/// `λ² = threshold · (1 + margin)`; type IV sits exactly on its boundary.
pub fn design_optimal(input: &DesignInput, margin: f64) -> Result<Design> {
    let threshold = lambda_sq_threshold(input);
    let lambda_sq = match input.kind {
        DesignType::IV => threshold,
        _ => threshold * (1.0 + margin),
    };
    design_with_lambda_sq(input, threshold, lambda_sq)
}

fn design_with_lambda_sq(input: &DesignInput, threshold: f64, lambda_sq: f64) -> Result<Design> {
    Ok(Design {
        input: *input,
        lambda_sq_threshold: threshold,
        lambda_sq,
        form: form_for(input.kind, lambda_sq),
    })
}

/// Outcome of the attainment inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttainmentCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

impl AttainmentCheck {
    /// `|lhs − rhs| / lhs`.
    pub fn relative_gap(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.lhs
    }
}

/// Evaluates `γ_out⁴ γ_in² ≤ det(γ_out S₁₁S₁₁ᵀ + γ_in S₁₂S₁₂ᵀ) det(γ_out S₂₁S₂₁ᵀ + γ_in S₂₂S₂₂ᵀ)`.
/// `holds` allows a relative slack of `1e-12`.
pub fn check_attainment(s: &Matrix4<f64>, gamma_out: f64, gamma_in: f64) -> AttainmentCheck {
    let [a, b, c, d] = blocks(s);
    let mix = |x: &Matrix2<f64>, y: &Matrix2<f64>| {
        (x * x.transpose() * gamma_out + y * y.transpose() * gamma_in).determinant()
    };
    let lhs = gamma_out.powi(4) * gamma_in * gamma_in;
    let rhs = mix(&a, &b) * mix(&c, &d);
    AttainmentCheck {
        holds: rhs >= lhs * (1.0 - 1e-12),
        lhs,
        rhs,
    }
}

/// Two-mode squeezer: blocks `cosh ξ · I`, `sinh ξ · diag(1, −1)`. Coincides
/// with the type-I form at `λ = sinh ξ`.
pub fn two_mode_squeezer(xi: f64) -> SymplecticMatrix {
    let (c, s) = (xi.cosh(), xi.sinh());
    let m = Matrix4::new(
        c, 0.0, s, 0.0, //
        0.0, c, 0.0, -s, //
        s, 0.0, c, 0.0, //
        0.0, -s, 0.0, c,
    );
    SymplecticMatrix::from_matrix4(&m, 1e-12).expect("two-mode squeezer is symplectic")
}

/// `√det` of the reduced covariance block of `mode`.
pub fn boundary_gamma(state: &GaussianState, mode: usize) -> Result<f64> {
    if mode >= state.modes() {
        return Err(Error::InvalidArgument(format!(
            "mode index {mode} out of range for {} modes",
            state.modes()
        )));
    }
    Ok(state.cm().block(mode, mode).determinant().sqrt())
}

/// Applies the single-mode Williamson map to `mode` so its reduced block
/// becomes `γ I₂`. Returns the new state and the local unitary used.
pub fn standardize_boundary(state: &GaussianState, mode: usize) -> Result<(GaussianState, GaussianUnitary)> {
    let n = state.modes();
    if mode >= n {
        return Err(Error::InvalidArgument(format!("mode index {mode} out of range for {n} modes")));
    }
    let (s1, _) = williamson_single_mode(&state.cm().block(mode, mode))?;
    let u = GaussianUnitary::linear(embed_single_mode(&s1, mode, n)?);
    Ok((state.apply_unitary(&u)?, u))
}

/// How an operation's 4×4 symplectic is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum OpUnitary {
    Canonical(CanonicalForm),
    Squeezer { xi: f64 },
    Explicit(Matrix4<f64>),
    /// Chosen at run time from the boundary mixedness of the two modes.
    Designed(DesignType),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operation {
    /// Global zero-based modes; the first feeds the first block.
    pub modes: (usize, usize),
    pub unitary: OpUnitary,
}

impl Operation {
    pub fn new(i: usize, j: usize, unitary: OpUnitary) -> Self {
        Operation { modes: (i, j), unitary }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub sources: Vec<StateKind>,
    /// Node labels per global mode; descriptive only.
    pub node_assignment: BTreeMap<usize, String>,
    pub operations: Vec<Operation>,
    /// Standardize both boundary modes before each operation.
    pub standardize: bool,
    pub rule: ThresholdRule,
    pub margin: f64,
    /// Tolerance for accepting explicit operation matrices as symplectic.
    pub op_tol: f64,
}

impl NetworkSpec {
    pub fn new(sources: Vec<StateKind>, operations: Vec<Operation>) -> Self {
        NetworkSpec {
            sources,
            node_assignment: BTreeMap::new(),
            operations,
            standardize: true,
            rule: ThresholdRule::default(),
            margin: DEFAULT_MARGIN,
            op_tol: OP_TOL,
        }
    }

    pub fn with_rule(mut self, rule: ThresholdRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn total_modes(&self) -> usize {
        self.sources.iter().map(StateKind::modes).sum()
    }

    /// Index of the source owning global `mode`.
    pub fn source_of(&self, mode: usize) -> Option<usize> {
        let mut start = 0;
        for (k, s) in self.sources.iter().enumerate() {
            let end = start + s.modes();
            if mode < end {
                return Some(k);
            }
            start = end;
        }
        None
    }

    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            return Err(Error::InvalidArgument("network needs at least one source".into()));
        }
        let n = self.total_modes();
        for (k, op) in self.operations.iter().enumerate() {
            let (i, j) = op.modes;
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "operation {k} references mode {} but the network has {n}",
                    i.max(j)
                )));
            }
            if i == j {
                return Err(Error::InvalidArgument(format!("operation {k} acts twice on mode {i}")));
            }
        }
        if !(self.margin >= 0.0) {
            return Err(Error::InvalidArgument(format!("margin must be ≥ 0, got {}", self.margin)));
        }
        Ok(())
    }

    /// Three `tritter(γ)` sources; operations join modes (2, 3) and (5, 6).
    pub fn chain_example(gamma: f64) -> Self {
        NetworkSpec::new(
            vec![StateKind::Tritter { gamma }; 3],
            vec![
                Operation::new(2, 3, OpUnitary::Designed(DesignType::I)),
                Operation::new(5, 6, OpUnitary::Designed(DesignType::I)),
            ],
        )
    }

    /// Three `tritter(γ)` sources; mode 2 is joined first with mode 3, then
    /// with mode 6.
    pub fn star_example(gamma: f64) -> Self {
        NetworkSpec::new(
            vec![StateKind::Tritter { gamma }; 3],
            vec![
                Operation::new(2, 3, OpUnitary::Designed(DesignType::I)),
                Operation::new(2, 6, OpUnitary::Designed(DesignType::I)),
            ],
        )
    }
}

pub fn chain_example(gamma: f64) -> NetworkSpec {
    NetworkSpec::chain_example(gamma)
}

pub fn star_example(gamma: f64) -> NetworkSpec {
    NetworkSpec::star_example(gamma)
}

/// Tensor product of the sources in order.
pub fn build_initial_state(spec: &NetworkSpec) -> Result<GaussianState> {
    let states = spec
        .sources
        .iter()
        .map(StateKind::build)
        .collect::<Result<Vec<_>>>()?;
    tensor_all(&states).ok_or_else(|| Error::InvalidArgument("network needs at least one source".into()))
}

/// What happened at one operation.
#[derive(Debug, Clone, PartialEq)]
pub struct OpRecord {
    pub modes: (usize, usize),
    pub gamma_out: f64,
    pub gamma_in: f64,
    pub matrix: Matrix4<f64>,
    pub design: Option<Design>,
    pub attainment: AttainmentCheck,
    /// False when both modes belong to the same source.
    pub in_scope: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    pub state: GaussianState,
    pub operations: Vec<OpRecord>,
}

fn source_values(spec: &NetworkSpec, opts: &GgqcOptions) -> Result<Vec<f64>> {
    spec.sources
        .iter()
        .map(|s| ggqc_with(&s.build()?, opts).map(|r| r.value))
        .collect()
}

fn resolve(
    op: &Operation,
    gamma_out: f64,
    gamma_in: f64,
    spec: &NetworkSpec,
    cut: Option<f64>,
) -> Result<(Matrix4<f64>, Option<Design>)> {
    let explicit = |m: &Matrix4<f64>| -> Result<Matrix4<f64>> {
        SymplecticMatrix::from_matrix4(m, spec.op_tol)?;
        Ok(*m)
    };
    match &op.unitary {
        OpUnitary::Canonical(f) => Ok((canonical_matrix(f)?.to_matrix4()?, None)),
        OpUnitary::Squeezer { xi } => Ok((two_mode_squeezer(*xi).to_matrix4()?, None)),
        OpUnitary::Explicit(m) => Ok((explicit(m)?, None)),
        OpUnitary::Designed(kind) => {
            let input = DesignInput::new(gamma_out.max(1.0), gamma_in.max(1.0), *kind)?;
            let mut design = design_optimal(&input, spec.margin)?;
            if let (DesignType::I, Some(bound)) = (kind, cut) {
                let needed = cut_threshold(input.gamma_out, input.gamma_in, bound);
                if needed > design.lambda_sq_threshold {
                    design = design_with_lambda_sq(&input, design.lambda_sq_threshold, needed * (1.0 + spec.margin))?;
                }
            }
            Ok((canonical_matrix(&design.form)?.to_matrix4()?, Some(design)))
        }
    }
}

/// Runs the operations in order on `state` (normally the output of
/// [`build_initial_state`]).
pub fn apply_protocol(state: &GaussianState, spec: &NetworkSpec) -> Result<ProtocolRun> {
    apply_protocol_with(state, spec, &GgqcOptions::default())
}

pub fn apply_protocol_with(state: &GaussianState, spec: &NetworkSpec, opts: &GgqcOptions) -> Result<ProtocolRun> {
    spec.validate()?;
    let n = state.modes();
    if n != spec.total_modes() {
        return Err(Error::DimensionMismatch {
            expected: spec.total_modes(),
            found: n,
        });
    }
    let designs_type_i = spec
        .operations
        .iter()
        .any(|op| op.unitary == OpUnitary::Designed(DesignType::I));
    let cut = if spec.rule == ThresholdRule::InequalityAndCut
        && designs_type_i
        && (state.cm().determinant() - 1.0).abs() <= PURITY_TOL
    {
        let values = source_values(spec, opts)?;
        Some(values.into_iter().fold(f64::INFINITY, f64::min))
    } else {
        None
    };

    let mut current = state.clone();
    let mut records = Vec::with_capacity(spec.operations.len());
    for op in &spec.operations {
        let (i, j) = op.modes;
        if spec.standardize {
            current = standardize_boundary(&current, i)?.0;
            current = standardize_boundary(&current, j)?.0;
        }
        let gamma_out = boundary_gamma(&current, i)?;
        let gamma_in = boundary_gamma(&current, j)?;
        let (matrix, design) = resolve(op, gamma_out, gamma_in, spec, cut)?;
        let embedded = embed_two_mode(&matrix, (i, j), n)?;
        current = current.apply_unitary(&GaussianUnitary::new(embedded, DVector::zeros(2 * n))?)?;
        records.push(OpRecord {
            modes: (i, j),
            gamma_out,
            gamma_in,
            matrix,
            design,
            attainment: check_attainment(&matrix, gamma_out, gamma_in),
            in_scope: spec.source_of(i) != spec.source_of(j),
        });
    }
    Ok(ProtocolRun {
        state: current,
        operations: records,
    })
}

/// Resultant correlation against the smallest source correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkReport {
    pub resultant_ggqc: f64,
    pub argmin: Bipartition,
    pub source_ggqc: Vec<f64>,
    pub bound: f64,
    /// `bound − resultant_ggqc`.
    pub gap: f64,
    pub operations: Vec<OpRecord>,
    pub det_gamma: f64,
}

impl NetworkReport {
    pub fn attainment_ok(&self) -> Vec<bool> {
        self.operations.iter().map(|r| r.attainment.holds).collect()
    }
}

pub fn verify_network(spec: &NetworkSpec) -> Result<NetworkReport> {
    verify_network_with(spec, &GgqcOptions::default())
}

pub fn verify_network_with(spec: &NetworkSpec, opts: &GgqcOptions) -> Result<NetworkReport> {
    spec.validate()?;
    let limit = opts.n_max;
    if spec.total_modes() > limit {
        return Err(Error::Capacity {
            modes: spec.total_modes(),
            limit,
        });
    }
    let source_ggqc = source_values(spec, opts)?;
    let bound = source_ggqc.iter().copied().fold(f64::INFINITY, f64::min);
    let initial = build_initial_state(spec)?;
    let run = apply_protocol_with(&initial, spec, opts)?;
    let report = ggqc_with(&run.state, opts)?;
    Ok(NetworkReport {
        resultant_ggqc: report.value,
        argmin: report.argmin,
        source_ggqc,
        bound,
        gap: bound - report.value,
        operations: run.operations,
        det_gamma: report.det_gamma,
    })
}
