//! Gaussian states at the level of first and second moments.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::covariance::{validate_cm, CovarianceMatrix};
use crate::error::{Error, Result};
use crate::symplectic::{random_symplectic, GaussianUnitary, SymplecticMatrix, DEFAULT_TOL};

/// Stream offset separating the symplectic draw from the spectrum draw in
/// [`random_state`].
const SPECTRUM_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// An `n`-mode Gaussian state `(Γ, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    cm: CovarianceMatrix,
    mean: DVector<f64>,
}

impl GaussianState {
    pub fn new(cm: CovarianceMatrix, mean: DVector<f64>) -> Result<Self> {
        if mean.len() != cm.matrix().nrows() {
            return Err(Error::DimensionMismatch {
                expected: cm.matrix().nrows(),
                found: mean.len(),
            });
        }
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("mean vector must be finite".into()));
        }
        Ok(GaussianState { cm, mean })
    }

    /// Zero-mean state with covariance `cm`.
    pub fn centered(cm: CovarianceMatrix) -> Self {
        let dim = cm.matrix().nrows();
        GaussianState {
            cm,
            mean: DVector::zeros(dim),
        }
    }

    /// Validates `gamma` at `tol` and pairs it with a zero mean.
    pub fn from_cm(gamma: DMatrix<f64>, tol: f64) -> Result<Self> {
        Ok(Self::centered(CovarianceMatrix::new(gamma, tol)?))
    }

    pub fn vacuum(n: usize) -> Self {
        Self::centered(CovarianceMatrix::identity(n))
    }

    pub fn modes(&self) -> usize {
        self.cm.modes()
    }

    pub fn cm(&self) -> &CovarianceMatrix {
        &self.cm
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// `Γ → SΓSᵀ`, `d → m + Sd`. The result is re-symmetrized and validated.
    pub fn apply_unitary(&self, u: &GaussianUnitary) -> Result<GaussianState> {
        if u.modes() != self.modes() {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.modes(),
                found: 2 * u.modes(),
            });
        }
        let s = u.symplectic.matrix();
        let gamma = s * self.cm.matrix() * s.transpose();
        let mean = &u.displacement + s * &self.mean;
        let tol = DEFAULT_TOL * gamma.amax().max(1.0);
        let cm = CovarianceMatrix::new(gamma, tol)?;
        Ok(GaussianState { cm, mean })
    }

    pub fn apply_symplectic(&self, s: &SymplecticMatrix) -> Result<GaussianState> {
        if s.modes() != self.modes() {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.modes(),
                found: 2 * s.modes(),
            });
        }
        let m = s.matrix();
        let gamma = m * self.cm.matrix() * m.transpose();
        let tol = DEFAULT_TOL * gamma.amax().max(1.0);
        Ok(GaussianState {
            cm: CovarianceMatrix::new(gamma, tol)?,
            mean: m * &self.mean,
        })
    }

    /// Reduced state on `modes` (zero-based, in the given order).
    pub fn reduce(&self, modes: &[usize]) -> Result<GaussianState> {
        if modes.is_empty() {
            return Err(Error::InvalidArgument("cannot reduce to an empty mode set".into()));
        }
        let n = self.modes();
        let mut seen = vec![false; n];
        for &m in modes {
            if m >= n {
                return Err(Error::InvalidArgument(format!(
                    "mode index {m} out of range for {n} modes"
                )));
            }
            if std::mem::replace(&mut seen[m], true) {
                return Err(Error::InvalidArgument(format!("mode {m} listed twice")));
            }
        }
        Ok(self.gather(modes))
    }

    /// Reorders modes: new mode `k` is old mode `perm[k]`.
    ///
    /// Equivalent to conjugating by the block permutation matrix, a symplectic
    /// operation.
    pub fn permute(&self, perm: &[usize]) -> Result<GaussianState> {
        if perm.len() != self.modes() {
            return Err(Error::DimensionMismatch {
                expected: self.modes(),
                found: perm.len(),
            });
        }
        self.reduce(perm)
    }

    fn gather(&self, modes: &[usize]) -> GaussianState {
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let d = idx.len();
        let g = self.cm.matrix();
        let gamma = DMatrix::from_fn(d, d, |r, c| g[(idx[r], idx[c])]);
        let mean = DVector::from_fn(d, |r, _| self.mean[idx[r]]);
        GaussianState {
            cm: CovarianceMatrix::from_unchecked(gamma),
            mean,
        }
    }
}

/// Direct sum `ρ ⊗ σ`: block-diagonal covariance, concatenated means.
pub fn tensor(first: &GaussianState, second: &GaussianState) -> GaussianState {
    let (d1, d2) = (first.mean.len(), second.mean.len());
    let mut gamma = DMatrix::zeros(d1 + d2, d1 + d2);
    gamma.view_mut((0, 0), (d1, d1)).copy_from(first.cm.matrix());
    gamma.view_mut((d1, d1), (d2, d2)).copy_from(second.cm.matrix());
    let mean = DVector::from_iterator(d1 + d2, first.mean.iter().chain(second.mean.iter()).copied());
    GaussianState {
        cm: CovarianceMatrix::from_unchecked(gamma),
        mean,
    }
}

/// Tensor product of a sequence of states, in order.
pub fn tensor_all<'a, I>(states: I) -> Option<GaussianState>
where
    I: IntoIterator<Item = &'a GaussianState>,
{
    let mut iter = states.into_iter();
    let first = iter.next()?.clone();
    Some(iter.fold(first, |acc, s| tensor(&acc, s)))
}

/// Two-mode pure state in standard form: blocks `γI₂` and `√(γ²−1)·diag(1,−1)`.
pub fn two_mode_pure(gamma: f64) -> Result<GaussianState> {
    if !(gamma >= 1.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "two-mode mixedness factor must satisfy γ ≥ 1, got {gamma}"
        )));
    }
    let c = (gamma * gamma - 1.0).sqrt();
    two_mode_blocks(gamma, gamma, c, -c, DEFAULT_TOL)
}

/// Two-mode standard form: blocks `aI₂`, `bI₂` and correlations `diag(c, d)`.
pub fn two_mode_standard(a: f64, b: f64, c: f64, d: f64) -> Result<GaussianState> {
    if !(a >= 1.0 && b >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "standard-form local factors need a, b ≥ 1, got a = {a}, b = {b}"
        )));
    }
    if ![c, d].iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidArgument("correlations must be finite".into()));
    }
    two_mode_blocks(a, b, c, d, DEFAULT_TOL)
}

fn two_mode_blocks(a: f64, b: f64, c: f64, d: f64, tol: f64) -> Result<GaussianState> {
    #[rustfmt::skip]
    let gamma = DMatrix::from_row_slice(4, 4, &[
        a,   0.0, c,   0.0,
        0.0, a,   0.0, d,
        c,   0.0, b,   0.0,
        0.0, d,   0.0, b,
    ]);
    GaussianState::from_cm(gamma, tol)
}

/// `R₊`, `R₋` and `S` entering the tritter covariance matrix.
pub fn tritter_entries(gamma: f64) -> (f64, f64, f64) {
    let (ch, sh) = ((2.0 * gamma).cosh(), (2.0 * gamma).sinh());
    (ch + sh / 3.0, ch - sh / 3.0, -2.0 * sh / 3.0)
}

/// Three single-mode squeezed vacua mixed on a symmetric three-port splitter.
pub fn tritter_state(gamma: f64) -> Result<GaussianState> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tritter squeezing must satisfy γ ≥ 0, got {gamma}"
        )));
    }
    let (rp, rm, s) = tritter_entries(gamma);
    let mut m = DMatrix::zeros(6, 6);
    for i in 0..3 {
        for j in 0..3 {
            let (q, p) = if i == j { (rp, rm) } else { (s, -s) };
            m[(2 * i, 2 * j)] = q;
            m[(2 * i + 1, 2 * j + 1)] = p;
        }
    }
    GaussianState::from_cm(m, DEFAULT_TOL)
}

/// Seeded random state `S (⊕ₖ νₖ I₂) Sᵀ` with `νₖ ∈ [1, 3]` and
/// `S = random_symplectic(n, seed)`.
pub fn random_state(n: usize, seed: u64) -> Result<GaussianState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SPECTRUM_STREAM);
    let nus: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..=3.0)).collect();
    state_from_spectrum(&nus, seed)
}

/// Seeded random pure state: the symplectic orbit of the vacuum.
pub fn random_pure_state(n: usize, seed: u64) -> Result<GaussianState> {
    state_from_spectrum(&vec![1.0; n], seed)
}

fn state_from_spectrum(nus: &[f64], seed: u64) -> Result<GaussianState> {
    let n = nus.len();
    if n == 0 {
        return Err(Error::InvalidArgument("mode count must be positive".into()));
    }
    let diag = DVector::from_iterator(2 * n, nus.iter().flat_map(|&v| [v, v]));
    let s = random_symplectic(n, seed);
    let m = s.matrix();
    let gamma = m * DMatrix::from_diagonal(&diag) * m.transpose();
    let tol = DEFAULT_TOL * gamma.amax().max(1.0);
    GaussianState::from_cm(gamma, tol)
}

/// Declarative description of a source state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateKind {
    TwoModePure {
        gamma: f64,
    },
    TwoModeStandard {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
    },
    Tritter {
        gamma: f64,
    },
    Explicit {
        cm: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mean: Option<Vec<f64>>,
    },
    Random {
        modes: usize,
        seed: u64,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        pure: bool,
    },
}

impl StateKind {
    pub fn build(&self) -> Result<GaussianState> {
        match self {
            StateKind::TwoModePure { gamma } => two_mode_pure(*gamma),
            StateKind::TwoModeStandard { a, b, c, d } => two_mode_standard(*a, *b, *c, *d),
            StateKind::Tritter { gamma } => tritter_state(*gamma),
            StateKind::Explicit { cm, mean } => {
                let dim = cm.len();
                if cm.iter().any(|row| row.len() != dim) {
                    return Err(Error::InvalidArgument("explicit covariance matrix must be square".into()));
                }
                let gamma = DMatrix::from_fn(dim, dim, |r, c| cm[r][c]);
                validate_cm(&gamma, DEFAULT_TOL)??;
                let cm = CovarianceMatrix::from_unchecked(gamma);
                let mean = match mean {
                    Some(v) => DVector::from_column_slice(v),
                    None => DVector::zeros(dim),
                };
                GaussianState::new(cm, mean)
            }
            StateKind::Random { modes, seed, pure } => {
                if *pure {
                    random_pure_state(*modes, *seed)
                } else {
                    random_state(*modes, *seed)
                }
            }
        }
    }

    /// Mode count without building the state.
    pub fn modes(&self) -> usize {
        match self {
            StateKind::TwoModePure { .. } | StateKind::TwoModeStandard { .. } => 2,
            StateKind::Tritter { .. } => 3,
            StateKind::Explicit { cm, .. } => cm.len() / 2,
            StateKind::Random { modes, .. } => *modes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::embed_two_mode;
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix4;

    #[test]
    fn two_mode_pure_gamma_one_is_vacuum() {
        let s = two_mode_pure(1.0).unwrap();
        assert_eq!(s.cm().matrix(), &DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn two_mode_pure_gamma_two_blocks() {
        let s = two_mode_pure(2.0).unwrap();
        let g = s.cm();
        assert_eq!(g.block(0, 0), nalgebra::Matrix2::identity() * 2.0);
        assert_eq!(g.block(1, 1), nalgebra::Matrix2::identity() * 2.0);
        let r3 = 3f64.sqrt();
        assert_eq!(g.block(0, 1), nalgebra::Matrix2::new(r3, 0.0, 0.0, -r3));
    }

    #[test]
    fn two_mode_pure_is_pure() {
        for g in [1.0, 1.5, 3.0] {
            assert_abs_diff_eq!(two_mode_pure(g).unwrap().cm().determinant(), 1.0, epsilon = 1e-10);
        }
        assert!(two_mode_pure(0.99).is_err());
        assert!(two_mode_pure(f64::NAN).is_err());
    }

    #[test]
    fn two_mode_standard_cases() {
        let id = two_mode_standard(1.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(id.cm().matrix(), &DMatrix::<f64>::identity(4, 4));
        assert!(matches!(
            two_mode_standard(1.0, 1.0, 1.0, 1.0),
            Err(Error::NotPhysical { .. })
        ));
        assert!(two_mode_standard(2.0, 2.0, 1.0, -1.0).is_ok());
        assert!(two_mode_standard(0.5, 2.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn tritter_zero_is_vacuum() {
        assert_eq!(tritter_state(0.0).unwrap().cm().matrix(), &DMatrix::<f64>::identity(6, 6));
        assert!(tritter_state(-0.1).is_err());
    }

    #[test]
    fn tritter_is_pure() {
        for g in [0.3, 0.8] {
            let det = tritter_state(g).unwrap().cm().determinant();
            assert_abs_diff_eq!(det, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn tritter_single_mode_marginal() {
        let g = 0.7;
        let (rp, rm, _) = tritter_entries(g);
        let r = tritter_state(g).unwrap().reduce(&[0]).unwrap();
        assert_eq!(r.cm().matrix(), &DMatrix::from_row_slice(2, 2, &[rp, 0.0, 0.0, rm]));
    }

    #[test]
    fn tensor_is_block_diagonal() {
        let v = tensor(&GaussianState::vacuum(1), &GaussianState::vacuum(1));
        assert_eq!(v.cm().matrix(), &DMatrix::<f64>::identity(4, 4));
        let a = two_mode_pure(1.7).unwrap();
        let b = tritter_state(0.4).unwrap();
        let t = tensor(&a, &b);
        assert_eq!(t.modes(), 5);
        assert_abs_diff_eq!(
            t.cm().determinant(),
            a.cm().determinant() * b.cm().determinant(),
            epsilon = 1e-12
        );
        assert_eq!(t.reduce(&[0, 1]).unwrap(), a);
        assert_eq!(t.reduce(&[2, 3, 4]).unwrap(), b);
    }

    #[test]
    fn reduce_to_all_modes_is_identity() {
        let s = random_state(3, 5).unwrap();
        assert_eq!(s.reduce(&[0, 1, 2]).unwrap(), s);
        assert!(s.reduce(&[]).is_err());
        assert!(s.reduce(&[3]).is_err());
        assert!(s.reduce(&[1, 1]).is_err());
    }

    #[test]
    fn random_states_are_valid_and_deterministic() {
        for seed in 0..100 {
            let s = random_state(4, seed).unwrap();
            assert_eq!(validate_cm(s.cm().matrix(), 1e-8).unwrap(), Ok(()));
        }
        assert_eq!(random_state(3, 9).unwrap(), random_state(3, 9).unwrap());
        let p = random_pure_state(3, 11).unwrap();
        assert_abs_diff_eq!(p.cm().determinant(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn identity_unitary_leaves_state() {
        let s = random_state(2, 1).unwrap();
        let out = s.apply_unitary(&GaussianUnitary::identity(2)).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn rotation_on_isotropic_block_is_trivial() {
        let s = GaussianState::from_cm(DMatrix::identity(2, 2) * 1.8, 1e-9).unwrap();
        let th: f64 = 0.37;
        let rot = DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        let u = GaussianUnitary::linear(SymplecticMatrix::new(rot, 1e-12).unwrap());
        let out = s.apply_unitary(&u).unwrap();
        assert!((out.cm().matrix() - s.cm().matrix()).amax() < 1e-14);
    }

    #[test]
    fn squeezer_on_vacua_gives_standard_pure_state() {
        let xi: f64 = 0.6;
        let (c, s) = (xi.cosh(), xi.sinh());
        #[rustfmt::skip]
        let sq = Matrix4::new(
            c, 0.0, s, 0.0,
            0.0, c, 0.0, -s,
            s, 0.0, c, 0.0,
            0.0, -s, 0.0, c,
        );
        let u = GaussianUnitary::linear(embed_two_mode(&sq, (0, 1), 2).unwrap());
        let out = GaussianState::vacuum(2).apply_unitary(&u).unwrap();
        let expected = two_mode_pure((2.0 * xi).cosh()).unwrap();
        assert!((out.cm().matrix() - expected.cm().matrix()).amax() < 1e-12);
    }

    #[test]
    fn means_transform_affinely() {
        let s = GaussianState::new(CovarianceMatrix::identity(1), DVector::from_vec(vec![1.0, 2.0])).unwrap();
        let sq = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let u = GaussianUnitary::new(
            SymplecticMatrix::new(sq, 1e-12).unwrap(),
            DVector::from_vec(vec![0.5, -1.0]),
        )
        .unwrap();
        let out = s.apply_unitary(&u).unwrap();
        assert_eq!(out.mean(), &DVector::from_vec(vec![2.5, 0.0]));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let s = GaussianState::vacuum(2);
        assert!(matches!(
            s.apply_unitary(&GaussianUnitary::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn state_kind_round_trip() {
        let k: StateKind = serde_json::from_str(r#"{"kind":"tritter","gamma":0.5}"#).unwrap();
        assert_eq!(k, StateKind::Tritter { gamma: 0.5 });
        assert_eq!(k.modes(), 3);
        assert!(serde_json::from_str::<StateKind>(r#"{"kind":"tritter","gamma":0.5,"x":1}"#).is_err());
        let e: StateKind =
            serde_json::from_str(r#"{"kind":"explicit","cm":[[1,0],[0,1]]}"#).unwrap();
        assert_eq!(e.build().unwrap(), GaussianState::vacuum(1));
    }
}
