//! Derivative tensors of matrix functions and a central finite-difference
//! oracle to check them.
//!
//! A derivative `dY/dX` of a `q`-order `Y` with respect to a `p`-order `X`
//! is a plain [`DenseTensor`] of shape `shape(X) ++ shape(Y)` whose entry
//! `(i..; j..)` is `dy_{j..} / dx_{i..}`.

use crate::error::{Error, Result};
use crate::linalg::{cofactor_matrix, inverse, matmul, matrix_power};
use crate::products::{
    anticross, contract_mode, cross, identity_operator, is_paired_symmetric, outer, unit_tensor,
    Side,
};
use crate::tensor::{multi_indices, DenseTensor, SYMMETRY_TOL};

pub const DEFAULT_FD_STEP: f64 = 1e-5;

fn finite_or_err(t: DenseTensor) -> Result<DenseTensor> {
    if t.is_finite() {
        Ok(t)
    } else {
        Err(Error::InvalidArgument(
            "function returned non-finite values near the evaluation point".into(),
        ))
    }
}

fn stack(x_shape: &[usize], slices: Vec<DenseTensor>) -> Result<DenseTensor> {
    let y_shape = slices[0].shape().to_vec();
    let shape: Vec<usize> = x_shape.iter().chain(&y_shape).copied().collect();
    let values = slices
        .into_iter()
        .flat_map(DenseTensor::into_values)
        .collect();
    DenseTensor::new(shape, values)
}

/// Central differences: slice `i` is `(F(X + h E_i) - F(X - h E_i)) / 2h`.
pub fn fd_derivative<F>(f: F, x: &DenseTensor, h: f64) -> Result<DenseTensor>
where
    F: Fn(&DenseTensor) -> Result<DenseTensor>,
{
    if h <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {h}"
        )));
    }
    let mut slices = Vec::with_capacity(x.len());
    for idx in multi_indices(x.shape()) {
        let mut xp = x.clone();
        let mut xm = x.clone();
        let off = x.offset(&idx);
        xp.values_mut()[off] += h;
        xm.values_mut()[off] -= h;
        let d = (&finite_or_err(f(&xp)?)? - &finite_or_err(f(&xm)?)?).scale(0.5 / h);
        slices.push(d);
    }
    stack(x.shape(), slices)
}

/// Central-difference gradient of a scalar function, shaped like `x`.
pub fn fd_gradient<F>(f: F, x: &DenseTensor, h: f64) -> Result<DenseTensor>
where
    F: Fn(&DenseTensor) -> Result<f64>,
{
    let d = fd_derivative(|y| Ok(DenseTensor::vector(vec![f(y)?])), x, h)?;
    d.reshape(x.shape())
}

/// Symmetric-matrix central differences. Off-diagonal entries move in pairs,
/// `X +- h (E_ij + E_ji)`, diagonal ones by `+- h E_ii`; each difference is
/// divided by `2h` and fills both slices `(i, j)` and `(j, i)`.
pub fn fd_derivative_sym<F>(f: F, x: &DenseTensor, h: f64) -> Result<DenseTensor>
where
    F: Fn(&DenseTensor) -> Result<DenseTensor>,
{
    let n = x.expect_square()?;
    let dev = x.asymmetry();
    if dev > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { deviation: dev });
    }
    if h <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {h}"
        )));
    }
    let mut slices: Vec<Option<DenseTensor>> = vec![None; n * n];
    for i in 0..n {
        for j in i..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[[i, j]] += h;
            xm[[i, j]] -= h;
            if i != j {
                xp[[j, i]] += h;
                xm[[j, i]] -= h;
            }
            let d = (&finite_or_err(f(&xp)?)? - &finite_or_err(f(&xm)?)?).scale(0.5 / h);
            slices[j * n + i] = Some(d.clone());
            slices[i * n + j] = Some(d);
        }
    }
    stack(
        &[n, n],
        slices.into_iter().map(|s| s.expect("filled")).collect(),
    )
}

/// `d(lambda(X) A)/dX = Lambda x A` for a constant `A`.
pub fn d_scalar_times(lambda: &DenseTensor, a: &DenseTensor) -> DenseTensor {
    outer(lambda, a)
}

pub fn d_trace(n: usize) -> DenseTensor {
    DenseTensor::identity(n)
}

/// `d det(X) / dX`: the cofactor matrix, i.e. the transposed adjugate.
pub fn d_det(x: &DenseTensor) -> Result<DenseTensor> {
    cofactor_matrix(x)
}

/// `dX/dX = I_m x_c I_n`.
pub fn d_identity(m: usize, n: usize) -> DenseTensor {
    cross(&DenseTensor::identity(m), &DenseTensor::identity(n)).expect("matrices")
}

/// `dX^T/dX = I_m x_ac I_n`.
pub fn d_transpose(m: usize, n: usize) -> DenseTensor {
    anticross(&DenseTensor::identity(m), &DenseTensor::identity(n)).expect("matrices")
}

/// `d(AXB)/dX = A^T x_c B`.
pub fn d_axb(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    cross(&a.transpose(), b)
}

/// Product rule `d(YZ)/dX = dY/dX *_4 Z + Y *_3 dZ/dX`.
pub fn d_product(
    dy: &DenseTensor,
    dz: &DenseTensor,
    y: &DenseTensor,
    z: &DenseTensor,
) -> Result<DenseTensor> {
    dy.expect_order(4)?;
    dz.expect_order(4)?;
    if dy.shape()[..2] != dz.shape()[..2] {
        return Err(Error::ShapeMismatch(format!(
            "derivatives taken with respect to {:?} and {:?}",
            &dy.shape()[..2],
            &dz.shape()[..2]
        )));
    }
    let left = contract_mode(dy, z, 3, Side::Right)?;
    let right = contract_mode(dz, y, 2, Side::Left)?;
    left.same_shape(&right)?;
    Ok(&left + &right)
}

/// `dX^{-1}/dX = -X^{-T} x_c X^{-1}`.
pub fn d_inverse(x: &DenseTensor) -> Result<DenseTensor> {
    let inv = inverse(x)?;
    Ok(cross(&inv.transpose(), &inv)?.scale(-1.0))
}

/// `dX^m/dX = sum_{s=1}^m (X^{s-1})^T x_c X^{m-s}`.
pub fn d_power(x: &DenseTensor, m: usize) -> Result<DenseTensor> {
    let n = x.expect_square()?;
    if m == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    let powers: Vec<DenseTensor> = (0..m).map(|k| matrix_power(x, k)).collect::<Result<_>>()?;
    let mut out = DenseTensor::zeros(&[n, n, n, n]);
    for s in 1..=m {
        out = &out + &cross(&powers[s - 1].transpose(), &powers[m - s])?;
    }
    Ok(out)
}

/// Tensors associated with a symmetric matrix `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricAssociated {
    /// `X_{ijk}`: `2x_ii` on the diagonal, `x_ik` when `i=j!=k` or `i=k!=j`.
    pub x3: DenseTensor,
    /// Sum of `I x_alpha X` over all 2-subsets `alpha` of the four modes.
    pub xs: DenseTensor,
    /// `delta_ij x_kl + x_ij delta_kl`.
    pub xnat: DenseTensor,
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

fn check_symmetric(x: &DenseTensor) -> Result<usize> {
    let n = x.expect_square()?;
    let dev = x.asymmetry();
    if dev > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { deviation: dev });
    }
    Ok(n)
}

pub fn sym_associated(x: &DenseTensor) -> Result<SymmetricAssociated> {
    let n = check_symmetric(x)?;
    let x3 = DenseTensor::from_fn(&[n, n, n], |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        if i == j && j == k {
            2.0 * x[[i, i]]
        } else if i == j {
            x[[i, k]]
        } else if i == k {
            x[[i, j]]
        } else {
            0.0
        }
    });
    // X_s as the sum over the six ways to place I on a pair of modes.
    let id = DenseTensor::identity(n);
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut xs = DenseTensor::zeros(&[n, n, n, n]);
    for (a, b) in pairs {
        let rest: Vec<usize> = (0..4).filter(|m| *m != a && *m != b).collect();
        let pi = crate::products::ModePartition::new(vec![vec![a, b], rest])?;
        xs = &xs + &crate::products::outer_partition(&[&id, x], &pi)?;
    }
    let xnat = &outer(&id, x) + &outer(x, &id);
    Ok(SymmetricAssociated { x3, xs, xnat })
}

/// `I x_c X + X x_c I`.
pub fn lyapunov_c(x: &DenseTensor) -> Result<DenseTensor> {
    let id = DenseTensor::identity(x.expect_square()?);
    Ok(&cross(&id, x)? + &cross(x, &id)?)
}

/// `I x_ac X + X x_ac I`.
pub fn lyapunov_ac(x: &DenseTensor) -> Result<DenseTensor> {
    let id = DenseTensor::identity(x.expect_square()?);
    Ok(&anticross(&id, x)? + &anticross(x, &id)?)
}

/// Derivative of a symmetric `X` with respect to itself:
/// `I x_c I + I x_ac I - J_{4;n}`.
pub fn d_sym_identity(n: usize) -> DenseTensor {
    let j = unit_tensor(4, n).expect("n >= 1");
    &(&d_identity(n, n) + &d_transpose(n, n)) - &j
}

/// `dX^2/dX = X_s - X^nat - I x X_3` for symmetric `X`, the last term
/// having entries `delta_ij X_{ikl}`.
pub fn d_sym_square(x: &DenseTensor) -> Result<DenseTensor> {
    let n = check_symmetric(x)?;
    let assoc = sym_associated(x)?;
    let t = DenseTensor::from_fn(&[n, n, n, n], |ix| {
        delta(ix[0], ix[1]) * assoc.x3[[ix[0], ix[2], ix[3]]]
    });
    Ok(&(&assoc.xs - &assoc.xnat) - &t)
}

/// `dX/dX` for an order-`d` tensor of dimension `n`.
pub fn d_tensor_identity(d: usize, n: usize) -> Result<DenseTensor> {
    identity_operator(&vec![n; d])
}

/// Whether a derivative tensor of a symmetric matrix function has the
/// expected pairwise symmetry.
pub fn is_symmetric_derivative(t: &DenseTensor) -> Result<bool> {
    is_paired_symmetric(t)
}

/// `d(X^m)` recursion step: `dP_m *_4 X + X^m *_3 dX/dX`.
pub fn d_power_step(dpm: &DenseTensor, x: &DenseTensor, m: usize) -> Result<DenseTensor> {
    let n = x.expect_square()?;
    let xm = matrix_power(x, m)?;
    d_product(dpm, &d_identity(n, n), &xm, x)
}

/// `Y = AXB` helper used by the product-rule checks.
pub fn axb(a: &DenseTensor, x: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    matmul(&matmul(a, x)?, b)
}
