//! Even-order tensors as linear operators on tensors of half their order:
//! products, powers, polynomials and exponentials, plus the homogeneous
//! polynomial `f_A(x) = A x^m` and its gradient.

use crate::error::{Error, Result};
use crate::linalg;
use crate::products::{contract_last, identity_operator, is_symmetric, rank1_symmetric};
use crate::tensor::{DenseTensor, SYMMETRY_TOL};

/// An order-`2d` tensor whose leading `d` dims equal its trailing `d` dims,
/// acting on tensors of the half shape through `*_[d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    tensor: DenseTensor,
    d: usize,
}

impl LinearOperator {
    pub fn new(tensor: DenseTensor) -> Result<Self> {
        let order = tensor.order();
        if !order.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "operator tensors need an even order, got {order}"
            )));
        }
        let d = order / 2;
        let s = tensor.shape();
        if s[..d] != s[d..] {
            return Err(Error::ShapeMismatch(format!(
                "operator halves differ: {:?} vs {:?}",
                &s[..d],
                &s[d..]
            )));
        }
        Ok(Self { tensor, d })
    }

    pub fn identity(half_shape: &[usize]) -> Result<Self> {
        Self::new(identity_operator(half_shape)?)
    }

    pub fn zeros(half_shape: &[usize]) -> Self {
        let shape: Vec<usize> = half_shape.iter().chain(half_shape).copied().collect();
        Self::new(DenseTensor::zeros(&shape)).expect("symmetric halves")
    }

    /// Inverse of [`balanced_matrix`](Self::balanced_matrix).
    pub fn from_balanced_matrix(m: &DenseTensor, half_shape: &[usize]) -> Result<Self> {
        let shape: Vec<usize> = half_shape.iter().chain(half_shape).copied().collect();
        Self::new(m.reshape(&shape)?)
    }

    pub fn tensor(&self) -> &DenseTensor {
        &self.tensor
    }

    pub fn into_tensor(self) -> DenseTensor {
        self.tensor
    }

    pub fn half_order(&self) -> usize {
        self.d
    }

    pub fn half_shape(&self) -> &[usize] {
        &self.tensor.shape()[..self.d]
    }

    /// Side length of the balanced matrix, the product of the half shape.
    pub fn dim(&self) -> usize {
        self.half_shape().iter().product()
    }

    /// Row-major balanced matricization: rows group the leading half, columns
    /// the trailing half. Operator products become matrix products.
    pub fn balanced_matrix(&self) -> DenseTensor {
        let n = self.dim();
        self.tensor
            .reshape(&[n, n])
            .expect("square by construction")
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.half_shape() != other.half_shape() {
            return Err(Error::ShapeMismatch(format!(
                "operators on {:?} and {:?}",
                self.half_shape(),
                other.half_shape()
            )));
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Self::new(contract_last(&self.tensor, &other.tensor, self.d)?)
    }

    /// `A *_[d] X`.
    pub fn apply(&self, x: &DenseTensor) -> Result<DenseTensor> {
        if x.shape() != self.half_shape() {
            return Err(Error::ShapeMismatch(format!(
                "operator on {:?} applied to {:?}",
                self.half_shape(),
                x.shape()
            )));
        }
        contract_last(&self.tensor, x, self.d)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self {
            tensor: &self.tensor + &other.tensor,
            d: self.d,
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            tensor: self.tensor.scale(c),
            d: self.d,
        }
    }

    pub fn power(&self, k: usize) -> Self {
        let mut out = Self::identity(self.half_shape()).expect("valid shape");
        for _ in 0..k {
            out = self.multiply(&out).expect("same space");
        }
        out
    }

    /// `sum_j c_j A^j` by Horner's scheme.
    pub fn polynomial(&self, coeffs: &[f64]) -> Self {
        let id = Self::identity(self.half_shape()).expect("valid shape");
        let Some((&lead, rest)) = coeffs.split_last() else {
            return Self::zeros(self.half_shape());
        };
        let mut acc = id.scale(lead);
        for &c in rest.iter().rev() {
            acc = self
                .multiply(&acc)
                .and_then(|p| p.add(&id.scale(c)))
                .expect("same space");
        }
        acc
    }

    /// `exp(tA)` through the balanced matrix.
    pub fn exp(&self, t: f64) -> Self {
        let m = linalg::expm(&self.balanced_matrix().scale(t)).expect("square");
        Self::from_balanced_matrix(&m, self.half_shape()).expect("same size")
    }
}

pub fn op_multiply(a: &LinearOperator, b: &LinearOperator) -> Result<LinearOperator> {
    a.multiply(b)
}

pub fn op_power(a: &LinearOperator, k: usize) -> LinearOperator {
    a.power(k)
}

pub fn op_polynomial(a: &LinearOperator, coeffs: &[f64]) -> LinearOperator {
    a.polynomial(coeffs)
}

pub fn op_exp(a: &LinearOperator, t: f64) -> LinearOperator {
    a.exp(t)
}

fn check_poly_args(a: &DenseTensor, x: &DenseTensor) -> Result<()> {
    x.expect_order(1)?;
    if !a.is_hypercube() {
        return Err(Error::NotHypercube(a.shape().to_vec()));
    }
    if a.shape()[0] != x.len() {
        return Err(Error::ShapeMismatch(format!(
            "tensor of dimension {} with vector of length {}",
            a.shape()[0],
            x.len()
        )));
    }
    Ok(())
}

/// `f_A(x) = sum A_{i1..im} x_{i1} ... x_{im}`. Symmetry of `a` is not checked.
pub fn poly_eval(a: &DenseTensor, x: &DenseTensor) -> Result<f64> {
    check_poly_args(a, x)?;
    let mut t = a.clone();
    while t.order() > 1 {
        t = contract_last(&t, x, 1)?;
    }
    Ok(t.values().iter().zip(x.values()).map(|(p, q)| p * q).sum())
}

/// `m A x^{m-1}` for a symmetric order-`m` tensor.
pub fn poly_grad(a: &DenseTensor, x: &DenseTensor) -> Result<DenseTensor> {
    check_poly_args(a, x)?;
    if !is_symmetric(a)? {
        let dev = symmetry_deviation(a);
        return Err(Error::NotSymmetric { deviation: dev });
    }
    let m = a.order();
    if m == 1 {
        return Ok(a.clone());
    }
    let xs = rank1_symmetric(x, m - 1)?;
    Ok(contract_last(a, &xs, m - 1)?.scale(m as f64))
}

fn symmetry_deviation(a: &DenseTensor) -> f64 {
    let d = a.order();
    (0..d - 1)
        .map(|k| {
            let mut p: Vec<usize> = (0..d).collect();
            p.swap(k, k + 1);
            a.permute(&p).expect("valid").max_abs_diff(a)
        })
        .fold(SYMMETRY_TOL, f64::max)
}
