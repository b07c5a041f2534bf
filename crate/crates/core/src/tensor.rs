//! Dense row-major tensor storage.
//!
//! A [`DenseTensor`] is an order-`d` array (`d >= 1`) of `f64` values stored
//! with the last index varying fastest. Matrices are order-2 tensors and
//! vectors are order-1 tensors; there is no separate matrix type.
//!
//! All indices and modes are 0-based.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used by the symmetry predicates.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor")]
pub struct DenseTensor {
    shape: Vec<usize>,
    #[serde(rename = "data")]
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl TryFrom<RawTensor> for DenseTensor {
    type Error = Error;

    fn try_from(raw: RawTensor) -> Result<Self> {
        DenseTensor::new(raw.shape, raw.data)
    }
}

impl fmt::Debug for DenseTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DenseTensor")
            .field("shape", &self.shape)
            .field("values", &self.values)
            .finish()
    }
}

fn check_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::InvalidShape(shape.to_vec()));
    }
    Ok(())
}

/// Row-major strides for `shape`.
pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

/// Iterator over every multi-index of a shape in row-major order.
#[derive(Debug, Clone)]
pub struct MultiIndexIter {
    shape: Vec<usize>,
    current: Vec<usize>,
    done: bool,
}

impl Iterator for MultiIndexIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let mut k = self.shape.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.current[k] += 1;
            if self.current[k] < self.shape[k] {
                break;
            }
            self.current[k] = 0;
        }
        Some(out)
    }
}

pub fn multi_indices(shape: &[usize]) -> MultiIndexIter {
    MultiIndexIter {
        shape: shape.to_vec(),
        current: vec![0; shape.len()],
        done: shape.contains(&0),
    }
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        check_shape(&shape)?;
        let expected: usize = shape.iter().product();
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                shape,
                expected,
                found: values.len(),
            });
        }
        Ok(Self { shape, values })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::filled(shape, 0.0)
    }

    pub fn filled(shape: &[usize], value: f64) -> Self {
        assert!(
            !shape.is_empty() && !shape.contains(&0),
            "invalid tensor shape {shape:?}"
        );
        Self {
            shape: shape.to_vec(),
            values: vec![value; shape.iter().product()],
        }
    }

    /// Builds a tensor by evaluating `f` at every multi-index.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(shape);
        for (slot, idx) in t.values.iter_mut().zip(multi_indices(shape)) {
            *slot = f(&idx);
        }
        t
    }

    pub fn vector(values: Vec<f64>) -> Self {
        let n = values.len();
        Self::new(vec![n], values).expect("vector must be non-empty")
    }

    pub fn matrix(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(vec![rows, cols], values)
    }

    /// Matrix from a list of rows. Panics on ragged input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let values = rows.iter().flat_map(|row| row.iter().copied()).collect();
        Self::new(vec![r, c], values).expect("non-empty matrix")
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(&[n, n], |i| if i[0] == i[1] { 1.0 } else { 0.0 })
    }

    pub fn diag(values: &[f64]) -> Self {
        Self::from_fn(&[values.len(), values.len()], |i| {
            if i[0] == i[1] {
                values[i[0]]
            } else {
                0.0
            }
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.shape)
    }

    pub fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.shape.len());
        let mut off = 0;
        for (k, (&i, &n)) in index.iter().zip(&self.shape).enumerate() {
            assert!(i < n, "index {i} out of bounds for mode {k} of size {n}");
            off = off * n + i;
        }
        off
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.values[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        let off = self.offset(index);
        self.values[off] = value;
    }

    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        self.shape[1]
    }

    pub fn is_matrix(&self) -> bool {
        self.order() == 2
    }

    pub fn is_square(&self) -> bool {
        self.order() == 2 && self.shape[0] == self.shape[1]
    }

    pub fn is_hypercube(&self) -> bool {
        self.shape.iter().all(|&n| n == self.shape[0])
    }

    pub fn expect_order(&self, order: usize) -> Result<()> {
        if self.order() != order {
            return Err(Error::OrderMismatch {
                expected: order,
                found: self.order(),
            });
        }
        Ok(())
    }

    pub fn expect_square(&self) -> Result<usize> {
        self.expect_order(2)?;
        if self.shape[0] != self.shape[1] {
            return Err(Error::NotSquare {
                rows: self.shape[0],
                cols: self.shape[1],
            });
        }
        Ok(self.shape[0])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            shape: self.shape.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            shape: self.shape.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + c * b)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute entrywise difference; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.shape != other.shape {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Reinterprets the flat row-major data under a new shape.
    pub fn reshape(&self, shape: &[usize]) -> Result<Self> {
        Self::new(shape.to_vec(), self.values.clone())
    }

    /// Reorders modes: output mode `k` is input mode `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let d = self.order();
        let mut seen = vec![false; d];
        if perm.len() != d {
            return Err(Error::InvalidArgument(format!(
                "permutation {perm:?} has wrong length for order {d}"
            )));
        }
        for &p in perm {
            if p >= d || seen[p] {
                return Err(Error::InvalidArgument(format!(
                    "{perm:?} is not a permutation of 0..{d}"
                )));
            }
            seen[p] = true;
        }
        let new_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let old_strides = self.strides();
        let src_strides: Vec<usize> = perm.iter().map(|&p| old_strides[p]).collect();
        let mut values = Vec::with_capacity(self.len());
        for idx in multi_indices(&new_shape) {
            let off: usize = idx.iter().zip(&src_strides).map(|(i, s)| i * s).sum();
            values.push(self.values[off]);
        }
        Self::new(new_shape, values)
    }

    /// Matrix transpose.
    pub fn transpose(&self) -> Self {
        assert_eq!(self.order(), 2, "transpose requires a matrix");
        self.permute(&[1, 0]).expect("valid permutation")
    }

    /// Mode-`mode` unfolding: an `n_mode x (product of other dims)` matrix whose
    /// columns enumerate the remaining modes row-major in increasing mode order.
    pub fn unfold(&self, mode: usize) -> Result<Self> {
        if mode >= self.order() {
            return Err(Error::ModeOutOfRange {
                mode,
                order: self.order(),
            });
        }
        let rest: Vec<usize> = (0..self.order()).filter(|&k| k != mode).collect();
        self.group_unfold(&[mode], &rest)
    }

    /// Matricization with `row_modes` grouped as rows and `col_modes` as columns,
    /// each group flattened row-major in the order given.
    pub fn group_unfold(&self, row_modes: &[usize], col_modes: &[usize]) -> Result<Self> {
        let d = self.order();
        let mut seen = vec![false; d];
        for &m in row_modes.iter().chain(col_modes) {
            if m >= d {
                return Err(Error::ModeOutOfRange { mode: m, order: d });
            }
            if seen[m] {
                return Err(Error::InvalidArgument(format!(
                    "mode {m} appears twice in the grouping"
                )));
            }
            seen[m] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument(format!(
                "grouping {row_modes:?} / {col_modes:?} does not cover all {d} modes"
            )));
        }
        let rows: usize = row_modes.iter().map(|&m| self.shape[m]).product();
        let cols: usize = col_modes.iter().map(|&m| self.shape[m]).product();
        let perm: Vec<usize> = row_modes.iter().chain(col_modes).copied().collect();
        let p = self.permute(&perm)?;
        Self::new(vec![rows, cols], p.values)
    }

    /// Inverse of [`group_unfold`](Self::group_unfold): rebuilds a tensor of
    /// `shape` from its matricization.
    pub fn fold_group(
        matrix: &Self,
        shape: &[usize],
        row_modes: &[usize],
        col_modes: &[usize],
    ) -> Result<Self> {
        check_shape(shape)?;
        let perm: Vec<usize> = row_modes.iter().chain(col_modes).copied().collect();
        if perm.len() != shape.len() {
            return Err(Error::InvalidArgument(
                "grouping does not cover the target shape".into(),
            ));
        }
        let permuted_shape: Vec<usize> = perm.iter().map(|&m| shape[m]).collect();
        let permuted = matrix.reshape(&permuted_shape)?;
        let mut inverse = vec![0; perm.len()];
        for (k, &p) in perm.iter().enumerate() {
            inverse[p] = k;
        }
        permuted.permute(&inverse)
    }

    /// Column-stacking vectorization of a matrix.
    pub fn vectorize(&self) -> Result<Self> {
        self.expect_order(2)?;
        Ok(Self::vector(self.transpose().values))
    }

    /// Inverse of [`vectorize`](Self::vectorize).
    pub fn unvectorize(v: &[f64], rows: usize, cols: usize) -> Result<Self> {
        Self::new(vec![cols, rows], v.to_vec()).map(|t| t.transpose())
    }

    /// Patterned vectorization of a symmetric matrix: the upper triangle taken
    /// column by column, `(x11, x12, x22, x13, x23, x33, ...)`.
    pub fn vectorize_sym(&self) -> Result<Self> {
        let n = self.expect_square()?;
        let dev = self.asymmetry();
        if dev > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { deviation: dev });
        }
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for j in 0..n {
            for i in 0..=j {
                out.push(self.get(&[i, j]));
            }
        }
        Ok(Self::vector(out))
    }

    /// Max `|x_ij - x_ji|` of a square matrix.
    pub fn asymmetry(&self) -> f64 {
        let n = self.shape[0];
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                dev = dev.max((self.get(&[i, j]) - self.get(&[j, i])).abs());
            }
        }
        dev
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

impl Index<&[usize]> for DenseTensor {
    type Output = f64;

    fn index(&self, index: &[usize]) -> &f64 {
        &self.values[self.offset(index)]
    }
}

impl<const N: usize> Index<[usize; N]> for DenseTensor {
    type Output = f64;

    fn index(&self, index: [usize; N]) -> &f64 {
        &self.values[self.offset(&index)]
    }
}

impl<const N: usize> IndexMut<[usize; N]> for DenseTensor {
    fn index_mut(&mut self, index: [usize; N]) -> &mut f64 {
        let off = self.offset(&index);
        &mut self.values[off]
    }
}

impl Add for &DenseTensor {
    type Output = DenseTensor;

    fn add(self, rhs: &DenseTensor) -> DenseTensor {
        self.zip_with(rhs, |a, b| a + b)
            .expect("shape mismatch in tensor addition")
    }
}

impl Sub for &DenseTensor {
    type Output = DenseTensor;

    fn sub(self, rhs: &DenseTensor) -> DenseTensor {
        self.zip_with(rhs, |a, b| a - b)
            .expect("shape mismatch in tensor subtraction")
    }
}

impl Neg for &DenseTensor {
    type Output = DenseTensor;

    fn neg(self) -> DenseTensor {
        self.scale(-1.0)
    }
}

impl Mul<&DenseTensor> for f64 {
    type Output = DenseTensor;

    fn mul(self, rhs: &DenseTensor) -> DenseTensor {
        rhs.scale(self)
    }
}
