//! Sampling oracle for the largest correlation a network can reach, and
//! one-parameter sweeps over canonical operation families.

use nalgebra::Matrix4;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{canonical_matrix, CanonicalForm};
use crate::error::{Error, Result};
use crate::measure::GgqcOptions;
use crate::network::{verify_network_with, DesignType, NetworkSpec, OpUnitary, Operation};
use crate::symplectic::{local_symplectic, random_single_mode_with, random_symplectic_with};

/// Slack allowed above the bound before a sample counts as a violation.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// `exp(ΩH)` draws only.
    RandomSymplectic,
    /// A random canonical form of any of the six types with random local
    /// dressings on both sides.
    CanonicalDressed,
    /// Each operation picks one of the two above with equal odds.
    #[default]
    Mixed,
    /// The operations as written in the spec, every sample.
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub samples: usize,
    pub seed: u64,
    pub sampler: Sampler,
    /// Also evaluate the spec with every operation designed as type I.
    pub include_designed: bool,
    pub ggqc: GgqcOptions,
}

impl SearchConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        SearchConfig {
            samples,
            seed,
            sampler: Sampler::default(),
            include_designed: false,
            ggqc: GgqcOptions::default(),
        }
    }
}

/// One improvement of the running maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub sample: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best_value: f64,
    /// Sample index of the maximizer; `samples` denotes the designed candidate.
    pub best_sample: usize,
    pub best_ops: Vec<Matrix4<f64>>,
    pub trace: Vec<TraceEntry>,
    pub bound: f64,
    pub values: Vec<f64>,
}

fn random_canonical<R: Rng>(rng: &mut R) -> CanonicalForm {
    match rng.gen_range(0..6) {
        0 => CanonicalForm::I { lambda: rng.gen_range(0.0..2.0) },
        1 => CanonicalForm::II { lambda: 1.0 + rng.gen_range(1e-3..2.0) },
        2 => CanonicalForm::III { lambda: rng.gen_range(-2.0..2.0) },
        3 => {
            let l = rng.gen_range(-2.0..2.0);
            CanonicalForm::IV { lambda1: l, lambda2: -l }
        }
        4 => CanonicalForm::V,
        _ => CanonicalForm::VI { lambda: rng.gen_range(1e-3..1.0 - 1e-3) },
    }
}

fn dressed<R: Rng>(rng: &mut R) -> Matrix4<f64> {
    let form = random_canonical(rng);
    let core = canonical_matrix(&form).expect("sampled parameters lie in the domain");
    let mut local = || {
        let blocks = [random_single_mode_with(rng), random_single_mode_with(rng)];
        local_symplectic(&blocks)
    };
    let (l, r) = (local(), local());
    let s = l.compose(&core).and_then(|x| x.compose(&r)).expect("4×4 compositions");
    s.to_matrix4().expect("two-mode matrix")
}

fn draw<R: Rng>(sampler: Sampler, rng: &mut R) -> Matrix4<f64> {
    let random = |rng: &mut R| random_symplectic_with(2, rng).to_matrix4().expect("two-mode matrix");
    match sampler {
        Sampler::RandomSymplectic => random(rng),
        Sampler::CanonicalDressed => dressed(rng),
        Sampler::Mixed | Sampler::Fixed => {
            if rng.gen_bool(0.5) {
                random(rng)
            } else {
                dressed(rng)
            }
        }
    }
}

/// Operation matrices for one sample. Each sample has its own ChaCha stream,
/// so results do not depend on evaluation order.
pub fn sample_operations(spec: &NetworkSpec, cfg: &SearchConfig, sample: usize) -> Vec<Operation> {
    if cfg.sampler == Sampler::Fixed {
        return spec.operations.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(sample as u64);
    spec.operations
        .iter()
        .map(|op| Operation {
            modes: op.modes,
            unitary: OpUnitary::Explicit(draw(cfg.sampler, &mut rng)),
        })
        .collect()
}

fn designed(spec: &NetworkSpec) -> Vec<Operation> {
    spec.operations
        .iter()
        .map(|op| Operation {
            modes: op.modes,
            unitary: OpUnitary::Designed(DesignType::I),
        })
        .collect()
}

/// Largest resultant correlation over sampled operation sets.
///
/// Samples are evaluated in parallel; the maximum is reduced in sample order
/// with the earliest sample winning ties. Any value above the bound by more
/// than [`BOUND_SLACK`] is reported as [`Error::BoundViolation`].
pub fn random_search_max_ggqc(spec: &NetworkSpec, cfg: &SearchConfig) -> Result<SearchResult> {
    if cfg.samples == 0 {
        return Err(Error::InvalidArgument("search needs at least one sample".into()));
    }
    spec.validate()?;
    let mut candidates: Vec<Vec<Operation>> = (0..cfg.samples)
        .map(|k| sample_operations(spec, cfg, k))
        .collect();
    if cfg.include_designed {
        candidates.push(designed(spec));
    }
    let reports = candidates
        .par_iter()
        .map(|ops| {
            let mut s = spec.clone();
            s.operations = ops.clone();
            verify_network_with(&s, &cfg.ggqc)
        })
        .collect::<Vec<_>>();

    let mut bound = f64::NAN;
    let mut values = Vec::with_capacity(reports.len());
    let mut best: Option<(usize, f64, Vec<Matrix4<f64>>)> = None;
    let mut trace = Vec::new();
    for (k, report) in reports.into_iter().enumerate() {
        let report = report?;
        bound = report.bound;
        let value = report.resultant_ggqc;
        if value > bound + BOUND_SLACK {
            return Err(Error::BoundViolation { value, bound });
        }
        values.push(value);
        if best.as_ref().is_none_or(|(_, v, _)| value > *v) {
            trace.push(TraceEntry { sample: k, value });
            best = Some((k, value, report.operations.iter().map(|r| r.matrix).collect()));
        }
    }
    let (best_sample, best_value, best_ops) = best.expect("at least one sample");
    Ok(SearchResult {
        best_value,
        best_sample,
        best_ops,
        trace,
        bound,
        values,
    })
}

/// One point of a one-parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub ggqc: f64,
    /// The attainment inequality holds at every operation.
    pub attainment: bool,
    /// `bound − ggqc`.
    pub gap: f64,
}

/// The canonical form of `kind` at parameter `lambda`; type IV uses
/// `(λ, −λ)`.
pub fn family_member(kind: DesignType, lambda: f64) -> CanonicalForm {
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

/// Replaces every operation of `spec` by the `kind` family at each grid
/// value, in grid order.
pub fn sweep_lambda(spec: &NetworkSpec, kind: DesignType, grid: &[f64]) -> Result<Vec<SweepRow>> {
    sweep_lambda_with(spec, kind, grid, &GgqcOptions::default())
}

pub fn sweep_lambda_with(
    spec: &NetworkSpec,
    kind: DesignType,
    grid: &[f64],
    opts: &GgqcOptions,
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("sweep grid is empty".into()));
    }
    grid.par_iter()
        .map(|&lambda| {
            let form = family_member(kind, lambda);
            canonical_matrix(&form)?;
            let mut s = spec.clone();
            for op in &mut s.operations {
                op.unitary = OpUnitary::Canonical(form);
            }
            let r = verify_network_with(&s, opts)?;
            Ok(SweepRow {
                lambda,
                ggqc: r.resultant_ggqc,
                attainment: r.operations.iter().all(|o| o.attainment.holds),
                gap: r.gap,
            })
        })
        .collect()
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => (0..n)
            .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}
