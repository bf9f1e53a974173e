//! Normal forms of `Sp(4, ℝ)` under left and right multiplication by local
//! (block-diagonal) symplectic matrices.
//!
//! Writing `S = [[A, B], [C, D]]` in 2×2 blocks, `det A = det D` and
//! `det B = det C = 1 − det A`. The orbit is decided by `δ = det A`:
//!
//! | branch            | form | parameter          |
//! |-------------------|------|--------------------|
//! | `A = 0`           | V    | none               |
//! | `δ = 0`, `A ≠ 0`  | IV   | `λ₁`, `λ₂ = −λ₁`   |
//! | `δ = 1`           | III  | `λ ≥ 0`            |
//! | `δ > 1`           | I    | `λ = √(δ − 1)`     |
//! | `0 < δ < 1`       | VI   | `λ = √(1 − δ)`     |
//! | `δ < 0`           | II   | `λ = √(1 − δ)`     |
//!
//! For III and IV the parameter is not a local invariant (a local squeeze
//! rescales it); the construction reproduces it exactly on canonical inputs.

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::{delta, SymplecticMatrix};

/// Band around `δ ∈ {0, 1}` and around `A = 0` treated as degenerate.
pub const TOL_BRANCH: f64 = 1e-7;

/// Largest accepted `‖L S R − canonical‖_max`.
pub const MAX_RESIDUAL: f64 = 1e-6;

/// Tolerance used to accept canonical matrices as symplectic.
const CANONICAL_TOL: f64 = 1e-10;

fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Signed singular value decomposition with rotations on both sides.
///
/// Returns `(U, Σ, V)` with `M = U Σ V`, `U` and `V` proper rotations and
/// `Σ = diag(σ₁, σ₂)` where `σ₁ ≥ |σ₂|` and `σ₁ σ₂ = det M`.
pub fn special_svd_2x2(m: &Matrix2<f64>) -> (Matrix2<f64>, Matrix2<f64>, Matrix2<f64>) {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let e = 0.5 * (a + d);
    let f = 0.5 * (a - d);
    let g = 0.5 * (c + b);
    let h = 0.5 * (c - b);
    let q = e.hypot(h);
    let r = f.hypot(g);
    let a1 = g.atan2(f);
    let a2 = h.atan2(e);
    let theta = 0.5 * (a2 - a1);
    let phi = 0.5 * (a2 + a1);
    (rotation(phi), Matrix2::new(q + r, 0.0, 0.0, q - r), rotation(theta))
}

/// The six local-equivalence normal forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum CanonicalForm {
    I { lambda: f64 },
    II { lambda: f64 },
    III { lambda: f64 },
    IV { lambda1: f64, lambda2: f64 },
    V,
    VI { lambda: f64 },
}

impl CanonicalForm {
    pub fn name(&self) -> &'static str {
        match self {
            CanonicalForm::I { .. } => "I",
            CanonicalForm::II { .. } => "II",
            CanonicalForm::III { .. } => "III",
            CanonicalForm::IV { .. } => "IV",
            CanonicalForm::V => "V",
            CanonicalForm::VI { .. } => "VI",
        }
    }

    /// Parameters in declaration order.
    pub fn parameters(&self) -> Vec<f64> {
        match *self {
            CanonicalForm::I { lambda }
            | CanonicalForm::II { lambda }
            | CanonicalForm::III { lambda }
            | CanonicalForm::VI { lambda } => vec![lambda],
            CanonicalForm::IV { lambda1, lambda2 } => vec![lambda1, lambda2],
            CanonicalForm::V => vec![],
        }
    }

    fn check_domain(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match *self {
            CanonicalForm::I { lambda } if !(lambda >= 0.0 && lambda.is_finite()) => {
                bad(format!("type I needs λ ≥ 0, got {lambda}"))
            }
            CanonicalForm::II { lambda } if !(lambda > 1.0 && lambda.is_finite()) => {
                bad(format!("type II needs λ > 1, got {lambda}"))
            }
            CanonicalForm::III { lambda } if !lambda.is_finite() => {
                bad(format!("type III needs a finite λ, got {lambda}"))
            }
            CanonicalForm::IV { lambda1, lambda2 } => {
                if !(lambda1.is_finite() && lambda2.is_finite()) {
                    return bad(format!("type IV needs finite parameters, got {lambda1}, {lambda2}"));
                }
                let scale = 1.0f64.max(lambda1.abs());
                if (lambda1 + lambda2).abs() > 1e-12 * scale {
                    return bad(format!(
                        "type IV is symplectic only for λ₂ = −λ₁, got {lambda1}, {lambda2}"
                    ));
                }
                Ok(())
            }
            CanonicalForm::VI { lambda } if !(lambda > 0.0 && lambda < 1.0) => {
                bad(format!("type VI needs 0 < λ < 1, got {lambda}"))
            }
            _ => Ok(()),
        }
    }
}

pub(crate) fn from_blocks(
    a: &Matrix2<f64>,
    b: &Matrix2<f64>,
    c: &Matrix2<f64>,
    d: &Matrix2<f64>,
) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(a);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(b);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(c);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(d);
    m
}

pub fn blocks(m: &Matrix4<f64>) -> [Matrix2<f64>; 4] {
    [
        m.fixed_view::<2, 2>(0, 0).into_owned(),
        m.fixed_view::<2, 2>(0, 2).into_owned(),
        m.fixed_view::<2, 2>(2, 0).into_owned(),
        m.fixed_view::<2, 2>(2, 2).into_owned(),
    ]
}

fn block_diag(x: &Matrix2<f64>, y: &Matrix2<f64>) -> Matrix4<f64> {
    from_blocks(x, &Matrix2::zeros(), &Matrix2::zeros(), y)
}

/// The 4×4 matrix of a normal form.
pub fn canonical_matrix(form: &CanonicalForm) -> Result<SymplecticMatrix> {
    form.check_domain()?;
    let i = Matrix2::identity();
    let z = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    let o = Matrix2::zeros();
    let m = match *form {
        CanonicalForm::I { lambda } => {
            let c = (lambda * lambda + 1.0).sqrt();
            from_blocks(&(i * c), &(z * lambda), &(z * lambda), &(i * c))
        }
        CanonicalForm::II { lambda } => {
            let c = (lambda * lambda - 1.0).sqrt();
            from_blocks(&(z * c), &(i * lambda), &(i * lambda), &(z * c))
        }
        CanonicalForm::III { lambda } => Matrix4::new(
            1.0, 0.0, lambda, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, -lambda, 0.0, 1.0,
        ),
        CanonicalForm::IV { lambda1, lambda2 } => Matrix4::new(
            lambda1, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, lambda2,
        ),
        CanonicalForm::V => from_blocks(&o, &i, &(-i), &o),
        CanonicalForm::VI { lambda } => {
            let c = (1.0 - lambda * lambda).sqrt();
            from_blocks(&(i * c), &(i * lambda), &(i * -lambda), &(i * c))
        }
    };
    SymplecticMatrix::from_matrix4(&m, CANONICAL_TOL)
}

/// Which determinant branch the classifier took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `A = 0`.
    ZeroBlock,
    /// `det A = 0` with `A ≠ 0`.
    Singular,
    /// `det A = 1`.
    Unit,
    /// `det A ∉ {0, 1}`.
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub tol_branch: f64,
    pub max_residual: f64,
    /// Tolerance for accepting the input as symplectic.
    pub input_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            tol_branch: TOL_BRANCH,
            max_residual: MAX_RESIDUAL,
            input_tol: 1e-9,
        }
    }
}

/// `L · S · R = canonical_matrix(form)` with `L`, `R` local.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    pub form: CanonicalForm,
    pub left: Matrix4<f64>,
    pub right: Matrix4<f64>,
    pub residual: f64,
    pub branch: Branch,
    pub det_a: f64,
}

/// `(P, Q, a, s)` with `P M Q = a · diag(1, s)`, `P, Q ∈ SL(2)`,
/// `a = √|det M|` and `s = sgn det M`. Requires `det M ≠ 0`.
fn reduce(m: &Matrix2<f64>) -> (Matrix2<f64>, Matrix2<f64>, f64, f64) {
    let (u, sigma, v) = special_svd_2x2(m);
    let (s1, s2) = (sigma[(0, 0)], sigma[(1, 1)]);
    let det = s1 * s2;
    let a = det.abs().sqrt();
    let s = det.signum();
    let k = Matrix2::new(a / s1, 0.0, 0.0, a * s / s2);
    (k * u.transpose(), v.transpose(), a, s)
}

/// `M ≈ u vᵀ` for a rank-one `M`, with the largest entry of the unit vector
/// `v` made positive.
fn rank_one(m: &Matrix2<f64>) -> (nalgebra::Vector2<f64>, nalgebra::Vector2<f64>) {
    let (u, sigma, v) = special_svd_2x2(m);
    let mut left = u.column(0) * sigma[(0, 0)];
    let mut right = v.row(0).transpose();
    let pivot = if right[0].abs() >= right[1].abs() { right[0] } else { right[1] };
    if pivot < 0.0 {
        left = -left;
        right = -right;
    }
    (left, right)
}

fn inverse2(m: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    m.try_inverse()
        .ok_or_else(|| Error::Degenerate(format!("singular 2×2 block {m:?}")))
}

/// Classifies `S` with default options.
pub fn classify(s: &SymplecticMatrix) -> Result<ClassificationResult> {
    classify_with(s, &ClassifyOptions::default())
}

pub fn classify_with(s: &SymplecticMatrix, opts: &ClassifyOptions) -> Result<ClassificationResult> {
    let m = s.to_matrix4()?;
    let defect = s.defect();
    if defect > opts.input_tol * 1f64.max(m.amax() * m.amax()) {
        return Err(Error::NotSymplectic { defect });
    }
    let [a, b, c, d] = blocks(&m);
    let det_a = a.determinant();

    let (form, left, right, branch) = if a.amax() <= opts.tol_branch {
        let r2 = inverse2(&b)? * b.determinant().sqrt();
        let r1 = -inverse2(&c)? * c.determinant().sqrt();
        (CanonicalForm::V, Matrix4::identity(), block_diag(&r1, &r2), Branch::ZeroBlock)
    } else if det_a.abs() <= opts.tol_branch {
        // B, C become the identity; the rank-one remainders A C⁻¹ = u vᵀ and
        // D B⁻¹ = p qᵀ satisfy uᵀq = vᵀp = 0, which lets L₁, L₂ align them
        // with e₁e₁ᵀ and e₂e₂ᵀ.
        let b_inv = inverse2(&b)?;
        let c_inv = inverse2(&c)?;
        let (_, v) = rank_one(&(a * c_inv));
        let (_, q) = rank_one(&(d * b_inv));
        let l1 = Matrix2::new(q[1], -q[0], q[0], q[1]);
        let l2 = Matrix2::new(v[0], v[1], -v[1], v[0]);
        let r2 = b_inv * l1.transpose() * b.determinant().sqrt();
        let r1 = c_inv * l2.transpose() * c.determinant().sqrt();
        let left = block_diag(&l1, &l2);
        let right = block_diag(&r1, &r2);
        let out = left * m * right;
        let lambda1 = out[(0, 0)];
        let form = CanonicalForm::IV {
            lambda1,
            lambda2: -lambda1,
        };
        (form, left, right, Branch::Singular)
    } else if (det_a - 1.0).abs() <= opts.tol_branch {
        let (p1, q1, _, _) = reduce(&a);
        let (p2, q2, _, _) = reduce(&d);
        let (u, sigma, v) = special_svd_2x2(&(p1 * b * q2));
        let left = block_diag(&(u.transpose() * p1), &(v * p2));
        let right = block_diag(&(q1 * u), &(q2 * v.transpose()));
        let form = CanonicalForm::III {
            lambda: sigma[(0, 0)],
        };
        (form, left, right, Branch::Unit)
    } else {
        let (p1, q1, _, sign) = reduce(&a);
        let (p2, q2, _, _) = reduce(&d);
        let js = Matrix2::new(1.0, 0.0, 0.0, sign);
        let (x, z, _, _) = reduce(&(p1 * b * q2 * js));
        let x_inv = inverse2(&x)?;
        let z_inv = inverse2(&z)?;
        let left = block_diag(&(x * p1), &(z_inv * p2));
        let right = block_diag(&(q1 * js * x_inv * js), &(q2 * js * z * js));
        let form = if det_a > 1.0 {
            CanonicalForm::I {
                lambda: (det_a - 1.0).sqrt(),
            }
        } else if det_a > 0.0 {
            CanonicalForm::VI {
                lambda: (1.0 - det_a).sqrt(),
            }
        } else {
            CanonicalForm::II {
                lambda: (1.0 - det_a).sqrt(),
            }
        };
        (form, left, right, Branch::Generic)
    };

    let target = canonical_matrix(&form)?.to_matrix4()?;
    let residual = (left * m * right - target).amax();
    if !(residual <= opts.max_residual) {
        return Err(Error::Conditioning {
            residual,
            bound: opts.max_residual,
        });
    }
    Ok(ClassificationResult {
        form,
        left,
        right,
        residual,
        branch,
        det_a,
    })
}

fn local_defect(m: &Matrix4<f64>) -> f64 {
    let [a, b, c, d] = blocks(m);
    let off = b.amax().max(c.amax());
    let da = (a.determinant() - 1.0).abs();
    let dd = (d.determinant() - 1.0).abs();
    off.max(da).max(dd)
}

/// Recomputes `‖L S R − canonical‖_max` together with how far `L` and `R`
/// are from block-diagonal symplectic, and returns the largest of these.
pub fn verify_classification(s: &SymplecticMatrix, result: &ClassificationResult) -> Result<f64> {
    let m = s.to_matrix4()?;
    let target = canonical_matrix(&result.form)?.to_matrix4()?;
    let residual = (result.left * m * result.right - target).amax();
    Ok(residual
        .max(local_defect(&result.left))
        .max(local_defect(&result.right)))
}

/// Largest violation of the block identities every `S ∈ Sp(4, ℝ)` obeys:
/// `det A + det B = 1`, `det C + det D = 1`, `A Δ Cᵀ + B Δ Dᵀ = 0`,
/// `det A = det D` and `det B = det C`.
pub fn block_identity_defect(m: &Matrix4<f64>) -> f64 {
    let [a, b, c, d] = blocks(m);
    let dl = delta();
    let (da, db, dc, dd) = (a.determinant(), b.determinant(), c.determinant(), d.determinant());
    let cross = (a * dl * c.transpose() + b * dl * d.transpose()).amax();
    [
        (da + db - 1.0).abs(),
        (dc + dd - 1.0).abs(),
        cross,
        (da - dd).abs(),
        (db - dc).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}
