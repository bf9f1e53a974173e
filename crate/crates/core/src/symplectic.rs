//! Dense real symplectic geometry on `2n`-dimensional phase space.
//!
//! Coordinates are ordered `(q₁, p₁, …, q_n, p_n)` everywhere in the crate, so
//! mode `k` (zero-based) occupies rows and columns `2k` and `2k + 1`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default absolute tolerance for symplecticity and physicality checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Entry scale of the random symmetric generator used by [`random_symplectic`].
const GENERATOR_SCALE: f64 = 0.5;

/// The single-mode symplectic form `[[0, 1], [-1, 0]]`.
pub fn delta() -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -1.0, 0.0)
}

/// The symplectic form `Ω = ⊕ₖ [[0, 1], [-1, 0]]` on `n` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    modes: usize,
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

/// Builds the symplectic form on `n ≥ 1` modes.
pub fn omega(n: usize) -> Result<SymplecticForm> {
    if n == 0 {
        return Err(Error::InvalidArgument("mode count must be positive".into()));
    }
    Ok(SymplecticForm {
        modes: n,
        matrix: omega_matrix(n),
    })
}

pub(crate) fn omega_matrix(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        m[(2 * k, 2 * k + 1)] = 1.0;
        m[(2 * k + 1, 2 * k)] = -1.0;
    }
    m
}

/// Number of modes described by a `2n × 2n` matrix.
pub(crate) fn modes_of(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidArgument(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "phase-space matrices need a positive even dimension, got {}",
            m.nrows()
        )));
    }
    Ok(m.nrows() / 2)
}

/// `max |S Ω Sᵀ − Ω|` over all entries.
pub fn symplectic_defect(s: &DMatrix<f64>) -> Result<f64> {
    let n = modes_of(s)?;
    let om = omega_matrix(n);
    Ok((s * &om * s.transpose() - om).amax())
}

/// True iff `‖S Ω Sᵀ − Ω‖_max ≤ tol`.
pub fn is_symplectic(s: &DMatrix<f64>, tol: f64) -> Result<bool> {
    Ok(symplectic_defect(s)? <= tol)
}

/// A real `2n × 2n` matrix preserving the symplectic form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix(DMatrix<f64>);

impl SymplecticMatrix {
    /// Validates `m` against `SΩSᵀ = Ω` at absolute tolerance `tol`.
    pub fn new(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        let defect = symplectic_defect(&m)?;
        if defect > tol {
            return Err(Error::NotSymplectic { defect });
        }
        Ok(SymplecticMatrix(m))
    }

    pub(crate) fn from_unchecked(m: DMatrix<f64>) -> Self {
        SymplecticMatrix(m)
    }

    pub fn identity(n: usize) -> Self {
        SymplecticMatrix(DMatrix::identity(2 * n, 2 * n))
    }

    /// Lifts a validated 4×4 matrix.
    pub fn from_matrix4(m: &Matrix4<f64>, tol: f64) -> Result<Self> {
        Self::new(dmatrix_from4(m), tol)
    }

    pub fn modes(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// The 4×4 matrix of a two-mode symplectic.
    pub fn to_matrix4(&self) -> Result<Matrix4<f64>> {
        if self.0.nrows() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: self.0.nrows(),
            });
        }
        Ok(Matrix4::from_fn(|r, c| self.0[(r, c)]))
    }

    pub fn defect(&self) -> f64 {
        let om = omega_matrix(self.modes());
        (&self.0 * &om * self.0.transpose() - om).amax()
    }

    pub fn determinant(&self) -> f64 {
        self.0.clone().lu().determinant()
    }

    /// `S⁻¹ = Ω Sᵀ Ω⁻¹`, exact up to rounding.
    pub fn inverse(&self) -> Self {
        let om = omega_matrix(self.modes());
        SymplecticMatrix(&om * self.0.transpose() * om.transpose())
    }

    /// The product `self · other`.
    pub fn compose(&self, other: &SymplecticMatrix) -> Result<Self> {
        if self.modes() != other.modes() {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.modes(),
                found: 2 * other.modes(),
            });
        }
        Ok(SymplecticMatrix(&self.0 * &other.0))
    }
}

/// An affine symplectic map `(S, m)`; acts on states as `Γ → SΓSᵀ`, `d → m + Sd`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianUnitary {
    pub symplectic: SymplecticMatrix,
    pub displacement: DVector<f64>,
}

impl GaussianUnitary {
    pub fn new(symplectic: SymplecticMatrix, displacement: DVector<f64>) -> Result<Self> {
        if displacement.len() != symplectic.matrix().nrows() {
            return Err(Error::DimensionMismatch {
                expected: symplectic.matrix().nrows(),
                found: displacement.len(),
            });
        }
        Ok(GaussianUnitary {
            symplectic,
            displacement,
        })
    }

    /// The displacement-free unitary generated by `s`.
    pub fn linear(s: SymplecticMatrix) -> Self {
        let dim = s.matrix().nrows();
        GaussianUnitary {
            symplectic: s,
            displacement: DVector::zeros(dim),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::linear(SymplecticMatrix::identity(n))
    }

    pub fn modes(&self) -> usize {
        self.symplectic.modes()
    }
}

pub(crate) fn dmatrix_from4(m: &Matrix4<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(4, 4, |r, c| m[(r, c)])
}

fn check_mode(mode: usize, n: usize) -> Result<()> {
    if mode >= n {
        return Err(Error::InvalidArgument(format!(
            "mode index {mode} out of range for {n} modes"
        )));
    }
    Ok(())
}

/// Embeds a two-mode symplectic acting on `(q_i, p_i, q_j, p_j)` into `n` modes,
/// identity elsewhere. Indices are zero-based; `i` feeds the first 2×2 block row.
pub fn embed_two_mode(s4: &Matrix4<f64>, modes: (usize, usize), n: usize) -> Result<SymplecticMatrix> {
    let (i, j) = modes;
    if i == j {
        return Err(Error::InvalidArgument(format!(
            "two-mode operation needs distinct modes, got ({i}, {j})"
        )));
    }
    check_mode(i, n)?;
    check_mode(j, n)?;
    let idx = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1];
    let mut out = DMatrix::identity(2 * n, 2 * n);
    for (r, &gr) in idx.iter().enumerate() {
        for (c, &gc) in idx.iter().enumerate() {
            out[(gr, gc)] = s4[(r, c)];
        }
    }
    Ok(SymplecticMatrix::from_unchecked(out))
}

/// Embeds a single-mode symplectic (any 2×2 matrix with unit determinant).
pub fn embed_single_mode(s2: &Matrix2<f64>, mode: usize, n: usize) -> Result<SymplecticMatrix> {
    check_mode(mode, n)?;
    let mut out = DMatrix::identity(2 * n, 2 * n);
    for r in 0..2 {
        for c in 0..2 {
            out[(2 * mode + r, 2 * mode + c)] = s2[(r, c)];
        }
    }
    Ok(SymplecticMatrix::from_unchecked(out))
}

/// Direct sum of single-mode symplectics, one per mode.
pub fn local_symplectic(blocks: &[Matrix2<f64>]) -> SymplecticMatrix {
    let n = blocks.len();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for (k, b) in blocks.iter().enumerate() {
        for r in 0..2 {
            for c in 0..2 {
                out[(2 * k + r, 2 * k + c)] = b[(r, c)];
            }
        }
    }
    SymplecticMatrix::from_unchecked(out)
}

/// Seeded random element of `Sp(2n, ℝ)`: `exp(ΩH)` for a symmetric `H` with
/// entries uniform in `[-0.5, 0.5]`.
pub fn random_symplectic(n: usize, seed: u64) -> SymplecticMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_symplectic_with(n, &mut rng)
}

/// As [`random_symplectic`], drawing from a caller-provided generator.
pub fn random_symplectic_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SymplecticMatrix {
    let dim = 2 * n;
    let mut h = DMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in r..dim {
            let v = GENERATOR_SCALE * rng.gen_range(-1.0..=1.0);
            h[(r, c)] = v;
            h[(c, r)] = v;
        }
    }
    SymplecticMatrix::from_unchecked((omega_matrix(n) * h).exp())
}

/// Seeded random `2×2` matrix with unit determinant.
pub fn random_single_mode_with<R: Rng + ?Sized>(rng: &mut R) -> Matrix2<f64> {
    random_symplectic_with(1, rng).to_matrix2()
}

impl SymplecticMatrix {
    fn to_matrix2(&self) -> Matrix2<f64> {
        Matrix2::from_fn(|r, c| self.0[(r, c)])
    }
}

/// Single-mode Williamson normal form.
///
/// For a symmetric positive-definite `A` returns `(S₁, ν)` with
/// `S₁ A S₁ᵀ = ν I₂`, `ν = √det A` and `det S₁ = 1`. `S₁ = √ν · A^{-1/2}` with
/// the symmetric square root, so isotropic inputs map to the identity.
pub fn williamson_single_mode(a: &Matrix2<f64>) -> Result<(Matrix2<f64>, f64)> {
    let asym = (a[(0, 1)] - a[(1, 0)]).abs();
    let scale = a.amax().max(1.0);
    if asym > 1e-12 * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let sym = (a + a.transpose()) * 0.5;
    let det = sym.determinant();
    if !(sym[(0, 0)] > 0.0 && det > 0.0) {
        return Err(Error::Degenerate(format!(
            "single-mode block is not positive definite (a11 = {}, det = {det})",
            sym[(0, 0)]
        )));
    }
    let nu = det.sqrt();
    // √A = (A + √det A · I) / √(tr A + 2√det A) for 2×2 positive definite A.
    let t = (sym.trace() + 2.0 * nu).sqrt();
    let shifted = sym + Matrix2::identity() * nu;
    let inv = shifted
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("singular shifted block".into()))?;
    Ok((inv * (nu.sqrt() * t), nu))
}
