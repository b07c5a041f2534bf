//! Lyapunov transformations and quadratic Lyapunov stability certificates.

use crate::algebra::LinearOperator;
use crate::calculus::{lyapunov_ac, lyapunov_c};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, matmul, matvec, solve};
use crate::tensor::{DenseTensor, SYMMETRY_TOL};

/// Pivot threshold for the definiteness tests.
pub const DEFINITENESS_TOL: f64 = 1e-10;

/// `a_c = I x_c A + A x_c I` and `a_ac = I x_ac A + A x_ac I`.
///
/// `a_c * X = AX + XA^T`. With `(A x_ac B)_{ijkl} = A_il B_jk` the type-II
/// tensor acts as `a_ac * X = A X^T + X^T A^T`, which differs from
/// `AX + X^T A` unless both `A` and `X` are symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovPair {
    pub a_c: DenseTensor,
    pub a_ac: DenseTensor,
}

impl LyapunovPair {
    pub fn apply_c(&self, x: &DenseTensor) -> Result<DenseTensor> {
        LinearOperator::new(self.a_c.clone())?.apply(x)
    }

    pub fn apply_ac(&self, x: &DenseTensor) -> Result<DenseTensor> {
        LinearOperator::new(self.a_ac.clone())?.apply(x)
    }
}

pub fn lyapunov_tensors(a: &DenseTensor) -> Result<LyapunovPair> {
    Ok(LyapunovPair {
        a_c: lyapunov_c(a)?,
        a_ac: lyapunov_ac(a)?,
    })
}

fn require_symmetric(p: &DenseTensor) -> Result<usize> {
    let n = p.expect_square()?;
    let dev = p.asymmetry();
    if dev > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { deviation: dev });
    }
    Ok(n)
}

/// `V(x) = x^T P x`.
pub fn cqlf_value(p: &DenseTensor, x: &DenseTensor) -> Result<f64> {
    let n = require_symmetric(p)?;
    x.expect_order(1)?;
    if x.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{n}x{n} form against vector of length {}",
            x.len()
        )));
    }
    let px = matvec(p, x.values())?;
    Ok(px.iter().zip(x.values()).map(|(a, b)| a * b).sum())
}

/// Matrix of the time derivative of `V` along `dx/dt = Ax`: `A^T P + P A`.
pub fn cqlf_derivative(a: &DenseTensor, p: &DenseTensor) -> Result<DenseTensor> {
    require_symmetric(p)?;
    a.same_shape(p)?;
    Ok(&matmul(&a.transpose(), p)? + &matmul(p, a)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCertificate {
    pub stable: bool,
    /// Cholesky pivots of `P`.
    pub p_pivots: Vec<f64>,
    /// Cholesky pivots of `-(A^T P + P A)`.
    pub decay_pivots: Vec<f64>,
    pub note: Option<String>,
}

impl StabilityCertificate {
    fn rejected(note: String) -> Self {
        Self {
            stable: false,
            p_pivots: Vec::new(),
            decay_pivots: Vec::new(),
            note: Some(note),
        }
    }
}

/// Certifies asymptotic stability of `dx/dt = Ax` when `P > 0` and
/// `A^T P + P A < 0`. The decay matrix is the type-I transformation of
/// `A^T` applied to `P`.
pub fn stability_certificate(a: &DenseTensor, p: &DenseTensor) -> Result<StabilityCertificate> {
    a.expect_square()?;
    p.expect_square()?;
    a.same_shape(p)?;
    if let Err(e) = require_symmetric(p) {
        return Ok(StabilityCertificate::rejected(e.to_string()));
    }
    let decay = lyapunov_tensors(&a.transpose())?.apply_c(p)?;
    let p_chol = cholesky(p, DEFINITENESS_TOL)?;
    let d_chol = cholesky(&decay.scale(-1.0), DEFINITENESS_TOL)?;
    let stable = p_chol.succeeded() && d_chol.succeeded();
    let note = match (p_chol.succeeded(), d_chol.succeeded()) {
        (true, true) => None,
        (false, _) => Some("P is not positive definite".to_string()),
        (true, false) => Some("A^T P + P A is not negative definite".to_string()),
    };
    Ok(StabilityCertificate {
        stable,
        p_pivots: p_chol.pivots,
        decay_pivots: d_chol.pivots,
        note,
    })
}

/// Solves `A^T P + P A = -Q` through the `n^2 x n^2` balanced system.
pub fn solve_lyapunov(a: &DenseTensor, q: &DenseTensor) -> Result<DenseTensor> {
    let n = a.expect_square()?;
    q.same_shape(a)?;
    let op = LinearOperator::new(lyapunov_tensors(&a.transpose())?.a_c)?;
    let rhs = q.scale(-1.0).reshape(&[n * n, 1])?;
    let p = solve(&op.balanced_matrix(), &rhs)?.reshape(&[n, n])?;
    // remove rounding asymmetry
    Ok(DenseTensor::from_fn(&[n, n], |i| {
        0.5 * (p[[i[0], i[1]]] + p[[i[1], i[0]]])
    }))
}
