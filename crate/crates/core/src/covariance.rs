use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symplectic::{modes_of, omega_matrix};

/// Reason a candidate covariance matrix was rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum CmViolation {
    NotSymmetric { asymmetry: f64 },
    NotPhysical { min_eigenvalue: f64 },
}

impl From<CmViolation> for Error {
    fn from(v: CmViolation) -> Self {
        match v {
            CmViolation::NotSymmetric { asymmetry } => Error::NotSymmetric { asymmetry },
            CmViolation::NotPhysical { min_eigenvalue } => Error::NotPhysical { min_eigenvalue },
        }
    }
}

/// Smallest eigenvalue of the Hermitian matrix `Γ + iΩ`.
pub fn uncertainty_min_eigenvalue(gamma: &DMatrix<f64>) -> Result<f64> {
    let n = modes_of(gamma)?;
    let om = omega_matrix(n);
    let herm = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        Complex64::new(0.5 * (gamma[(r, c)] + gamma[(c, r)]), om[(r, c)])
    });
    let eig = herm.symmetric_eigenvalues();
    Ok(eig.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Checks symmetry and the uncertainty relation `Γ + iΩ ≥ 0`, both at `tol`.
///
/// The outer `Result` carries shape errors; the inner one the physics verdict.
pub fn validate_cm(gamma: &DMatrix<f64>, tol: f64) -> Result<Result<(), CmViolation>> {
    modes_of(gamma)?;
    let asymmetry = (gamma - gamma.transpose()).amax();
    if asymmetry > tol {
        return Ok(Err(CmViolation::NotSymmetric { asymmetry }));
    }
    let min_eigenvalue = uncertainty_min_eigenvalue(gamma)?;
    if min_eigenvalue < -tol {
        return Ok(Err(CmViolation::NotPhysical { min_eigenvalue }));
    }
    Ok(Ok(()))
}

/// A validated, exactly symmetric `2n × 2n` covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(DMatrix<f64>);

impl CovarianceMatrix {
    pub fn new(gamma: DMatrix<f64>, tol: f64) -> Result<Self> {
        validate_cm(&gamma, tol)??;
        Ok(CovarianceMatrix(symmetrize(gamma)))
    }

    pub(crate) fn from_unchecked(gamma: DMatrix<f64>) -> Self {
        CovarianceMatrix(symmetrize(gamma))
    }

    pub fn identity(n: usize) -> Self {
        CovarianceMatrix(DMatrix::identity(2 * n, 2 * n))
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

    /// The 2×2 block `A_{ij}` between modes `i` and `j`.
    pub fn block(&self, i: usize, j: usize) -> Matrix2<f64> {
        Matrix2::from_fn(|r, c| self.0[(2 * i + r, 2 * j + c)])
    }

    pub fn determinant(&self) -> f64 {
        self.0.clone().lu().determinant()
    }

    pub fn min_uncertainty_eigenvalue(&self) -> f64 {
        uncertainty_min_eigenvalue(&self.0).expect("shape validated at construction")
    }
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_is_valid() {
        for n in 1..4 {
            assert_eq!(validate_cm(&DMatrix::identity(2 * n, 2 * n), 1e-12).unwrap(), Ok(()));
        }
    }

    #[test]
    fn squeezed_below_vacuum_is_unphysical() {
        let half = DMatrix::<f64>::identity(2, 2) * 0.5;
        match validate_cm(&half, 1e-9).unwrap() {
            Err(CmViolation::NotPhysical { min_eigenvalue }) => {
                // Γ + iΩ = [[½, i], [-i, ½]] has eigenvalues ½ ± 1.
                assert!((min_eigenvalue + 0.5).abs() < 1e-12);
            }
            other => panic!("unexpected verdict {other:?}"),
        }
    }

    #[test]
    fn asymmetry_is_reported() {
        let mut m = DMatrix::<f64>::identity(2, 2);
        m[(0, 1)] = 1e-3;
        assert!(matches!(
            validate_cm(&m, 1e-9).unwrap(),
            Err(CmViolation::NotSymmetric { .. })
        ));
    }

    #[test]
    fn shape_errors_are_separate() {
        assert!(validate_cm(&DMatrix::identity(3, 3), 1e-9).is_err());
        assert!(validate_cm(&DMatrix::zeros(2, 4), 1e-9).is_err());
    }

    #[test]
    fn thermal_state_passes() {
        let m = DMatrix::<f64>::identity(4, 4) * 3.0;
        let cm = CovarianceMatrix::new(m, 1e-9).unwrap();
        assert!((cm.min_uncertainty_eigenvalue() - 2.0).abs() < 1e-12);
    }
}
