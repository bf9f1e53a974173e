//! Genuine Gaussian quantum correlation.
//!
//! For a bipartition `α | ᾱ` of the modes, `M(α) = 1 − det Γ / (D(α) D(ᾱ))`
//! where `D(·)` is the principal minor of `Γ` on the 2×2 blocks of a mode set.
//! The genuine correlation is the minimum of `M` over all bipartitions; it
//! vanishes exactly on states that factorize across some cut.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::covariance::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::state::{tritter_entries, GaussianState};

/// Default largest mode count accepted by [`enumerate_bipartitions`].
pub const DEFAULT_N_MAX: usize = 20;

/// Hard ceiling imposed by the 64-bit mode mask.
const MASK_BITS: usize = 63;

/// Ties closer than this keep the lower bitmask as minimizer.
pub const TIE_TOL: f64 = 1e-12;

/// Principal minors below this trigger a degeneracy warning.
const DEGENERATE_MINOR: f64 = 1e-12;

/// A bipartition of `n` modes, stored as the bitmask of the side containing
/// mode 0. Bit `k` stands for (zero-based) mode `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bipartition {
    mask: u64,
    modes: usize,
}

impl Bipartition {
    /// Canonical bipartition from a mask; a mask without mode 0 is replaced by
    /// its complement.
    pub fn new(mask: u64, modes: usize) -> Result<Self> {
        if !(2..=MASK_BITS).contains(&modes) {
            return Err(Error::InvalidArgument(format!(
                "bipartitions need 2..={MASK_BITS} modes, got {modes}"
            )));
        }
        let full = (1u64 << modes) - 1;
        if mask & !full != 0 {
            return Err(Error::InvalidArgument(format!(
                "mask {mask:#b} references modes beyond {modes}"
            )));
        }
        let mask = if mask & 1 == 0 { full & !mask } else { mask };
        if mask == full || mask == 0 {
            return Err(Error::InvalidArgument("both sides of a bipartition must be nonempty".into()));
        }
        Ok(Bipartition { mask, modes })
    }

    /// Canonical bipartition with `side` on one part.
    pub fn from_modes(side: &[usize], modes: usize) -> Result<Self> {
        let mut mask = 0u64;
        for &m in side {
            if m >= modes {
                return Err(Error::InvalidArgument(format!(
                    "mode index {m} out of range for {modes} modes"
                )));
            }
            mask |= 1 << m;
        }
        Self::new(mask, modes)
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn total_modes(&self) -> usize {
        self.modes
    }

    pub fn contains(&self, mode: usize) -> bool {
        mode < self.modes && self.mask >> mode & 1 == 1
    }

    /// Modes of the canonical side, ascending.
    pub fn side(&self) -> Vec<usize> {
        (0..self.modes).filter(|&m| self.contains(m)).collect()
    }

    /// Modes of the complementary side, ascending.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.modes).filter(|&m| !self.contains(m)).collect()
    }
}

/// All `2^(n−1) − 1` canonical bipartitions of `n` modes, ascending by mask.
pub fn enumerate_bipartitions(n: usize, n_max: usize) -> Result<Vec<Bipartition>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "bipartitions need at least two modes, got {n}"
        )));
    }
    let limit = n_max.min(MASK_BITS);
    if n > limit {
        return Err(Error::Capacity { modes: n, limit });
    }
    let full = (1u64 << n) - 1;
    Ok((1..full)
        .step_by(2)
        .map(|mask| Bipartition { mask, modes: n })
        .collect())
}

fn submatrix(gamma: &DMatrix<f64>, modes: &[usize]) -> DMatrix<f64> {
    let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    DMatrix::from_fn(idx.len(), idx.len(), |r, c| gamma[(idx[r], idx[c])])
}

/// Determinant of the principal submatrix on the 2×2 blocks of `modes`,
/// computed through a partially pivoted LU factorization.
pub fn principal_det(cm: &CovarianceMatrix, modes: &[usize]) -> Result<f64> {
    if modes.is_empty() {
        return Err(Error::InvalidArgument("principal minor of an empty mode set".into()));
    }
    if let Some(&m) = modes.iter().find(|&&m| m >= cm.modes()) {
        return Err(Error::InvalidArgument(format!(
            "mode index {m} out of range for {} modes",
            cm.modes()
        )));
    }
    let det = submatrix(cm.matrix(), modes).lu().determinant();
    if det < DEGENERATE_MINOR {
        log::warn!("principal minor on modes {modes:?} is numerically degenerate: {det:e}");
    }
    Ok(det)
}

/// One row of the per-bipartition table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BipartitionEntry {
    pub bipartition: Bipartition,
    pub d_side: f64,
    pub d_complement: f64,
    pub m: f64,
}

fn entry(cm: &CovarianceMatrix, det_gamma: f64, b: Bipartition) -> BipartitionEntry {
    let d_side = principal_det(cm, &b.side()).expect("canonical side is nonempty");
    let d_complement = principal_det(cm, &b.complement()).expect("complement is nonempty");
    BipartitionEntry {
        bipartition: b,
        d_side,
        d_complement,
        m: 1.0 - det_gamma / (d_side * d_complement),
    }
}

/// `M(α) = 1 − det Γ / (D(α) D(ᾱ))`.
pub fn m_value(state: &GaussianState, alpha: &Bipartition) -> Result<f64> {
    if alpha.total_modes() != state.modes() {
        return Err(Error::DimensionMismatch {
            expected: state.modes(),
            found: alpha.total_modes(),
        });
    }
    let cm = state.cm();
    Ok(entry(cm, cm.determinant(), *alpha).m)
}

/// `M` for the cut separating `side` from the remaining modes.
pub fn m_value_of(state: &GaussianState, side: &[usize]) -> Result<f64> {
    m_value(state, &Bipartition::from_modes(side, state.modes())?)
}

/// Result of an exhaustive minimization over bipartitions.
#[derive(Debug, Clone, PartialEq)]
pub struct GgqcReport {
    pub value: f64,
    pub argmin: Bipartition,
    pub table: Vec<BipartitionEntry>,
    pub det_gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgqcOptions {
    pub n_max: usize,
    pub tie_tol: f64,
}

impl Default for GgqcOptions {
    fn default() -> Self {
        GgqcOptions {
            n_max: DEFAULT_N_MAX,
            tie_tol: TIE_TOL,
        }
    }
}

/// Genuine Gaussian quantum correlation with default options.
pub fn ggqc(state: &GaussianState) -> Result<GgqcReport> {
    ggqc_with(state, &GgqcOptions::default())
}

/// Evaluates every bipartition (in parallel) and reduces in mask order, so the
/// report is identical to a sequential evaluation.
pub fn ggqc_with(state: &GaussianState, opts: &GgqcOptions) -> Result<GgqcReport> {
    let n = state.modes();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "genuine correlation is undefined for a single mode".into(),
        ));
    }
    let parts = enumerate_bipartitions(n, opts.n_max)?;
    let cm = state.cm();
    let det_gamma = cm.determinant();
    let table: Vec<BipartitionEntry> = parts
        .into_par_iter()
        .map(|b| entry(cm, det_gamma, b))
        .collect();
    let mut best = table[0];
    for e in &table[1..] {
        if e.m < best.m - opts.tie_tol {
            best = *e;
        }
    }
    Ok(GgqcReport {
        value: best.m,
        argmin: best.bipartition,
        table,
        det_gamma,
    })
}

/// States with a closed-form genuine correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    TwoModePure { gamma: f64 },
    TwoModeStandard { a: f64, b: f64, c: f64, d: f64 },
    Tritter { gamma: f64 },
}

/// Analytic value for the states of [`ClosedForm`].
pub fn closed_form(kind: &ClosedForm) -> Result<f64> {
    match *kind {
        ClosedForm::TwoModePure { gamma } => {
            if !(gamma >= 1.0) {
                return Err(Error::InvalidArgument(format!("need γ ≥ 1, got {gamma}")));
            }
            Ok(1.0 - 1.0 / gamma.powi(4))
        }
        ClosedForm::TwoModeStandard { a, b, c, d } => {
            if !(a >= 1.0 && b >= 1.0) {
                return Err(Error::InvalidArgument(format!("need a, b ≥ 1, got {a}, {b}")));
            }
            let ab = a * b;
            Ok(1.0 - (ab - c * c) * (ab - d * d) / (ab * ab))
        }
        ClosedForm::Tritter { gamma } => {
            if !(gamma >= 0.0) {
                return Err(Error::InvalidArgument(format!("need γ ≥ 0, got {gamma}")));
            }
            let den = 5.0 + 4.0 * (4.0 * gamma).cosh();
            Ok(1.0 - 81.0 / (den * den))
        }
    }
}

/// `1 − 1/(R₊R₋)²`, the tritter value written through the marginal entries.
pub fn tritter_marginal_form(gamma: f64) -> f64 {
    let (rp, rm, _) = tritter_entries(gamma);
    1.0 - 1.0 / (rp * rp * rm * rm)
}
