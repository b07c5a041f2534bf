//! Tensor forms of linear ODE systems, their exponential solutions and
//! fixed-step integrators.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::LinearOperator;
use crate::error::{Error, Result};
use crate::linalg::{expm, matmul, matvec};
use crate::products::{contract, ModePairing};
use crate::tensor::{multi_indices, DenseTensor, SYMMETRY_TOL};

/// Relative tolerance on `||A_i A_j - A_j A_i||_F / (||A_i|| ||A_j||)`.
pub const COMMUTE_TOL: f64 = 1e-10;

/// `n x n` companion matrix of `x^n + a_{n-1} x^{n-1} + ... + a_0`:
/// ones on the superdiagonal, last row `(-a_0, ..., -a_{n-1})`.
pub fn companion_matrix(coeffs: &[f64]) -> Result<DenseTensor> {
    let n = coeffs.len();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "need at least one coefficient".into(),
        ));
    }
    Ok(DenseTensor::from_fn(&[n, n], |i| {
        if i[0] == n - 1 {
            -coeffs[i[1]]
        } else if i[1] == i[0] + 1 {
            1.0
        } else {
            0.0
        }
    }))
}

/// One element `t^power e^{rate t}` of a fundamental solution set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisTerm {
    pub power: usize,
    pub rate: f64,
    /// Multiplicity of the root this term belongs to.
    pub multiplicity: usize,
}

impl BasisTerm {
    pub fn eval(&self, t: f64) -> f64 {
        t.powi(self.power as i32) * (self.rate * t).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionBasis {
    pub terms: Vec<BasisTerm>,
}

/// Solutions `t^{j-1} e^{lambda t}`, `j = 1..m`, for each real root
/// `(lambda, m)`; the multiplicities must add up to `n`.
pub fn solution_basis(roots: &[(f64, usize)], n: usize) -> Result<SolutionBasis> {
    let total: usize = roots.iter().map(|r| r.1).sum();
    if total != n {
        return Err(Error::InvalidArgument(format!(
            "multiplicities add up to {total}, expected {n}"
        )));
    }
    let terms = roots
        .iter()
        .flat_map(|&(rate, m)| {
            (0..m).map(move |power| BasisTerm {
                power,
                rate,
                multiplicity: m,
            })
        })
        .collect();
    Ok(SolutionBasis { terms })
}

/// Coefficient tensor of `x^(n) + A_{n-1} x^(n-1) + ... + A_0 x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTensor {
    pub tensor: DenseTensor,
    pub p: usize,
    pub n: usize,
}

impl CoefficientTensor {
    pub fn operator(&self) -> LinearOperator {
        LinearOperator::new(self.tensor.clone()).expect("p x n x p x n")
    }
}

/// Shape `p x n x p x n`; entry `(i, j, k, l)` is 1 when `k = i, l = j + 1`,
/// `-(A_l)_{ik}` on the last `j`, 0 elsewhere.
pub fn coefficient_tensor(a_list: &[DenseTensor], p: usize, n: usize) -> Result<CoefficientTensor> {
    if a_list.len() != n || n == 0 || p == 0 {
        return Err(Error::InvalidArgument(format!(
            "expected {n} coefficient matrices, got {}",
            a_list.len()
        )));
    }
    for a in a_list {
        if a.shape() != [p, p] {
            return Err(Error::ShapeMismatch(format!(
                "coefficient matrix {:?}, expected {p}x{p}",
                a.shape()
            )));
        }
    }
    let tensor = DenseTensor::from_fn(&[p, n, p, n], |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        if j == n - 1 {
            -a_list[l][[i, k]]
        } else if k == i && l == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    Ok(CoefficientTensor { tensor, p, n })
}

/// Matrix `M` with `M vec(X) = vec(A * X)` under column-stacking `vec`:
/// `M[i + p j, k + p l] = A_{ijkl}`.
pub fn balanced_matricization(a: &DenseTensor) -> Result<DenseTensor> {
    a.expect_order(4)?;
    let s = a.shape();
    if s[0] != s[2] || s[1] != s[3] {
        return Err(Error::ShapeMismatch(format!(
            "{s:?} is not an operator on {}x{} matrices",
            s[0], s[1]
        )));
    }
    let (p, n) = (s[0], s[1]);
    let mut m = DenseTensor::zeros(&[p * n, p * n]);
    for ix in multi_indices(s) {
        m[[ix[0] + p * ix[1], ix[2] + p * ix[3]]] = a.get(&ix);
    }
    Ok(m)
}

/// Reference block layout: identity blocks on the block superdiagonal and
/// `-A_0 ... -A_{n-1}` along the last block row.
pub fn block_companion(a_list: &[DenseTensor]) -> Result<DenseTensor> {
    let n = a_list.len();
    let p = a_list
        .first()
        .ok_or_else(|| Error::InvalidArgument("no coefficient matrices".into()))?
        .rows();
    let mut m = DenseTensor::zeros(&[p * n, p * n]);
    for bj in 0..n {
        for i in 0..p {
            if bj + 1 < n {
                m[[bj * p + i, (bj + 1) * p + i]] = 1.0;
            } else {
                for (bl, a) in a_list.iter().enumerate() {
                    for k in 0..p {
                        m[[bj * p + i, bl * p + k]] = -a[[i, k]];
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Third-order scalar ODE with quadratic forcing in tensor form
/// `dx/dt = B x + A3 x^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSystem {
    pub b: DenseTensor,
    pub a3: DenseTensor,
}

impl CubicSystem {
    pub fn rhs(&self, x: &[f64]) -> Vec<f64> {
        let lin = matvec(&self.b, x).expect("3-vector");
        (0..3)
            .map(|i| {
                let mut quad = 0.0;
                for j in 0..3 {
                    for k in 0..3 {
                        quad += self.a3[[i, j, k]] * x[j] * x[k];
                    }
                }
                lin[i] + quad
            })
            .collect()
    }
}

pub fn assemble_cubic(alpha: &[f64; 3], q: &DenseTensor) -> Result<CubicSystem> {
    if q.shape() != [3, 3] {
        return Err(Error::ShapeMismatch(format!(
            "Q has shape {:?}, expected 3x3",
            q.shape()
        )));
    }
    let dev = q.asymmetry();
    if dev > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { deviation: dev });
    }
    let b = DenseTensor::from_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], alpha]);
    let a3 = DenseTensor::from_fn(
        &[3, 3, 3],
        |i| if i[0] == 2 { q[[i[1], i[2]]] } else { 0.0 },
    );
    Ok(CubicSystem { b, a3 })
}

/// `X(t) = exp(tA) * C`.
pub fn solve_exact(a: &LinearOperator, c: &DenseTensor, t: f64) -> Result<DenseTensor> {
    a.exp(t).apply(c)
}

/// Generator of a system whose "time" is itself a tensor: shape
/// `t_shape ++ x_shape ++ x_shape`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiTimeSystem {
    pub generator: DenseTensor,
    pub t_shape: Vec<usize>,
    pub x_shape: Vec<usize>,
}

impl MultiTimeSystem {
    /// Splits the generator given the order of the time tensor.
    pub fn new(generator: DenseTensor, t_order: usize) -> Result<Self> {
        let d = generator.order();
        if t_order == 0 || t_order >= d || !(d - t_order).is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "cannot split an order-{d} generator with a time tensor of order {t_order}"
            )));
        }
        let q = (d - t_order) / 2;
        let s = generator.shape();
        if s[t_order..t_order + q] != s[t_order + q..] {
            return Err(Error::ShapeMismatch(format!(
                "state groups differ in generator shape {s:?}"
            )));
        }
        Ok(Self {
            t_shape: s[..t_order].to_vec(),
            x_shape: s[t_order..t_order + q].to_vec(),
            generator,
        })
    }

    /// Slice `A_i` for a time multi-index.
    pub fn slice(&self, t_index: &[usize]) -> Result<LinearOperator> {
        let mut e = DenseTensor::zeros(&self.t_shape);
        e.set(t_index, 1.0);
        directional_generator(self, &e)
    }
}

/// Operator `D * A` along the ray `T(s) = s D`.
pub fn directional_generator(sys: &MultiTimeSystem, d: &DenseTensor) -> Result<LinearOperator> {
    if d.shape() != sys.t_shape {
        return Err(Error::ShapeMismatch(format!(
            "direction {:?} against time shape {:?}",
            d.shape(),
            sys.t_shape
        )));
    }
    let p = sys.t_shape.len();
    let pairing = ModePairing::new((0..p).collect(), (0..p).collect())?;
    LinearOperator::new(contract(d, &sys.generator, &pairing)?)
}

/// `x(t) = exp(sum_i t_i A_i) c` for pairwise commuting slices `A_i` of an
/// `m x n x n` generator.
pub fn solve_multitime(a: &DenseTensor, c: &DenseTensor, t: &[f64]) -> Result<DenseTensor> {
    a.expect_order(3)?;
    c.expect_order(1)?;
    let (m, n) = (a.shape()[0], a.shape()[1]);
    if a.shape()[2] != n || c.len() != n || t.len() != m {
        return Err(Error::ShapeMismatch(format!(
            "generator {:?}, state {:?}, time of length {}",
            a.shape(),
            c.shape(),
            t.len()
        )));
    }
    let slices: Vec<DenseTensor> = (0..m)
        .map(|i| DenseTensor::from_fn(&[n, n], |jk| a[[i, jk[0], jk[1]]]))
        .collect();
    check_commuting(&slices)?;
    let mut sum = DenseTensor::zeros(&[n, n]);
    for (ti, ai) in t.iter().zip(&slices) {
        sum = sum.axpy(*ti, ai)?;
    }
    Ok(DenseTensor::vector(matvec(&expm(&sum)?, c.values())?))
}

pub fn check_commuting(slices: &[DenseTensor]) -> Result<()> {
    for i in 0..slices.len() {
        for j in i + 1..slices.len() {
            let (ai, aj) = (&slices[i], &slices[j]);
            let comm = &matmul(ai, aj)? - &matmul(aj, ai)?;
            let scale = ai.frobenius_norm() * aj.frobenius_norm();
            let residual = if scale == 0.0 {
                0.0
            } else {
                comm.frobenius_norm() / scale
            };
            if residual > COMMUTE_TOL {
                return Err(Error::NonCommuting {
                    first: i,
                    second: j,
                    residual,
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Euler,
    Rk4,
    Exact,
}

impl Method {
    /// Operator applications per step.
    pub fn evaluations(self) -> usize {
        match self {
            Method::Euler | Method::Exact => 1,
            Method::Rk4 => 4,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Euler => "euler",
            Method::Rk4 => "rk4",
            Method::Exact => "exact",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(Method::Euler),
            "rk4" => Ok(Method::Rk4),
            "exact" => Ok(Method::Exact),
            other => Err(Error::InvalidArgument(format!(
                "unknown method `{other}` (expected euler, rk4 or exact)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DenseTensor>,
    pub method: Method,
    pub step: f64,
    /// `2 * N^2` per operator application times applications per step.
    pub flops_per_step: usize,
}

impl Trajectory {
    pub fn last(&self) -> &DenseTensor {
        self.states.last().expect("at least the initial state")
    }

    /// CSV with header `s,x11,x21,...`: one row per time, state entries in
    /// column-major order with 1-based indices (underscore-separated when
    /// any dimension exceeds 9).
    pub fn to_csv(&self) -> String {
        let shape = self.states[0].shape().to_vec();
        let wide = shape.iter().any(|&n| n > 9);
        let order = colmajor_indices(&shape);
        let mut out = String::from("s");
        for idx in &order {
            let labels: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
            out.push_str(",x");
            out.push_str(&labels.join(if wide { "_" } else { "" }));
        }
        out.push('\n');
        for (t, x) in self.times.iter().zip(&self.states) {
            out.push_str(&t.to_string());
            for idx in &order {
                out.push(',');
                out.push_str(&x.get(idx).to_string());
            }
            out.push('\n');
        }
        out
    }
}

fn colmajor_indices(shape: &[usize]) -> Vec<Vec<usize>> {
    let rev: Vec<usize> = shape.iter().rev().copied().collect();
    multi_indices(&rev)
        .map(|mut i| {
            i.reverse();
            i
        })
        .collect()
}

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {step}"
        )));
    }
    Ok(())
}

/// Fixed-step integration of `dX/ds = L * X`.
pub fn integrate(
    op: &LinearOperator,
    x0: &DenseTensor,
    step: f64,
    steps: usize,
    method: Method,
) -> Result<Trajectory> {
    check_step(step)?;
    if x0.shape() != op.half_shape() {
        return Err(Error::ShapeMismatch(format!(
            "operator on {:?} with initial state {:?}",
            op.half_shape(),
            x0.shape()
        )));
    }
    let m = op.balanced_matrix();
    let n = m.rows();
    let propagator = match method {
        Method::Exact => Some(expm(&m.scale(step))?),
        _ => None,
    };
    let f = |x: &[f64]| matvec(&m, x).expect("sized");
    let mut x = x0.values().to_vec();
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x0.clone());
    for k in 0..steps {
        x = match method {
            Method::Euler => euler_step(&f, &x, step),
            Method::Rk4 => rk4_step(&f, &x, step),
            Method::Exact => matvec(propagator.as_ref().expect("built"), &x)?,
        };
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: k + 1 });
        }
        states.push(DenseTensor::new(x0.shape().to_vec(), x.clone())?);
    }
    Ok(Trajectory {
        times: (0..=steps).map(|k| k as f64 * step).collect(),
        states,
        method,
        step,
        flops_per_step: method.evaluations() * 2 * n * n,
    })
}

/// Same stepping as [`integrate`] without storing intermediate states.
pub fn integrate_final(
    op: &LinearOperator,
    x0: &DenseTensor,
    step: f64,
    steps: usize,
    method: Method,
) -> Result<DenseTensor> {
    check_step(step)?;
    let m = op.balanced_matrix();
    let f = |x: &[f64]| matvec(&m, x).expect("sized");
    let propagator = match method {
        Method::Exact => Some(expm(&m.scale(step))?),
        _ => None,
    };
    let mut x = x0.values().to_vec();
    for k in 0..steps {
        x = match method {
            Method::Euler => euler_step(&f, &x, step),
            Method::Rk4 => rk4_step(&f, &x, step),
            Method::Exact => matvec(propagator.as_ref().expect("built"), &x)?,
        };
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: k + 1 });
        }
    }
    DenseTensor::new(x0.shape().to_vec(), x)
}

fn euler_step(f: &impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Vec<f64> {
    let k = f(x);
    x.iter().zip(&k).map(|(a, b)| a + h * b).collect()
}

fn rk4_step(f: &impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Vec<f64> {
    let shift = |base: &[f64], k: &[f64], c: f64| -> Vec<f64> {
        base.iter().zip(k).map(|(a, b)| a + c * b).collect()
    };
    let k1 = f(x);
    let k2 = f(&shift(x, &k1, h / 2.0));
    let k3 = f(&shift(x, &k2, h / 2.0));
    let k4 = f(&shift(x, &k3, h));
    (0..x.len())
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Fixed-step integration of a general right-hand side; returns every state.
pub fn integrate_fn<F>(
    rhs: F,
    x0: &[f64],
    step: f64,
    steps: usize,
    method: Method,
) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    check_step(step)?;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x0.to_vec());
    let mut x = x0.to_vec();
    for k in 0..steps {
        x = match method {
            Method::Euler => euler_step(&rhs, &x, step),
            Method::Rk4 => rk4_step(&rhs, &x, step),
            Method::Exact => {
                return Err(Error::InvalidArgument(
                    "exact stepping needs a linear operator".into(),
                ))
            }
        };
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: k + 1 });
        }
        out.push(x.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn rng(seed: u64) -> Xoshiro256PlusPlus {
        Xoshiro256PlusPlus::seed_from_u64(seed)
    }

    #[test]
    fn companion_small() {
        assert_eq!(companion_matrix(&[3.0]).unwrap().values(), &[-3.0]);
        assert_eq!(
            companion_matrix(&[1.0, 0.0]).unwrap(),
            DenseTensor::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]])
        );
        let a = [0.3, -1.2, 0.7, 2.0];
        let cp = oracle::char_poly(&companion_matrix(&a).unwrap());
        for (k, &ak) in a.iter().enumerate() {
            assert!((cp[k] - ak).abs() < 1e-10);
        }
        assert_eq!(cp[4], 1.0);
    }

    #[test]
    fn basis_terms() {
        let b = solution_basis(&[(0.0, 2)], 2).unwrap();
        assert_eq!(b.terms.len(), 2);
        assert_eq!(b.terms[0].eval(3.0), 1.0);
        assert_eq!(b.terms[1].eval(3.0), 3.0);
        let b = solution_basis(&[(-1.0, 1), (-2.0, 1)], 2).unwrap();
        assert!((b.terms[1].eval(1.0) - (-2f64).exp()).abs() < 1e-15);
        assert!(solution_basis(&[(1.0, 1)], 2).is_err());
        // x'' - 3x' + 2x = 0
        let b = solution_basis(&[(1.0, 1), (2.0, 1)], 2).unwrap();
        let h = 1e-4;
        for term in &b.terms {
            let t = 0.4;
            let d2 = (term.eval(t + h) - 2.0 * term.eval(t) + term.eval(t - h)) / (h * h);
            let d1 = (term.eval(t + h) - term.eval(t - h)) / (2.0 * h);
            assert!((d2 - 3.0 * d1 + 2.0 * term.eval(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn coefficient_tensor_cases() {
        let a0 = DenseTensor::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let c = coefficient_tensor(std::slice::from_ref(&a0), 2, 1).unwrap();
        assert_eq!(c.tensor.reshape(&[2, 2]).unwrap(), a0.scale(-1.0));
        let a1 = DenseTensor::from_rows(&[&[0.5, 0.0], &[-1.0, 2.0]]);
        let c = coefficient_tensor(&[a0.clone(), a1.clone()], 2, 2).unwrap();
        let block =
            |j: usize, l: usize| DenseTensor::from_fn(&[2, 2], |ik| c.tensor[[ik[0], j, ik[1], l]]);
        assert_eq!(block(0, 0).max_abs(), 0.0);
        assert_eq!(block(0, 1), DenseTensor::identity(2));
        assert_eq!(block(1, 0), a0.scale(-1.0));
        assert_eq!(block(1, 1), a1.scale(-1.0));
        assert!(coefficient_tensor(&[a0], 2, 2).is_err());
    }

    #[test]
    fn balanced_matricization_is_block_companion() {
        let mut r = rng(1);
        let mats: Vec<DenseTensor> = (0..3)
            .map(|_| oracle::random_tensor(&mut r, &[3, 3]))
            .collect();
        let c = coefficient_tensor(&mats, 3, 3).unwrap();
        let m = balanced_matricization(&c.tensor).unwrap();
        assert_eq!(m, block_companion(&mats).unwrap());
        let x = oracle::random_tensor(&mut r, &[3, 3]);
        let lhs = c.operator().apply(&x).unwrap().vectorize().unwrap();
        let rhs = matvec(&m, x.vectorize().unwrap().values()).unwrap();
        assert!(lhs
            .values()
            .iter()
            .zip(&rhs)
            .all(|(a, b)| (a - b).abs() < 1e-14));
        let id = crate::products::identity_operator(&[2, 3]).unwrap();
        assert_eq!(
            balanced_matricization(&id).unwrap(),
            DenseTensor::identity(6)
        );
    }

    #[test]
    fn cubic_assembly() {
        let zero = assemble_cubic(&[1.0, 2.0, 3.0], &DenseTensor::zeros(&[3, 3])).unwrap();
        assert_eq!(zero.rhs(&[1.0, 1.0, 1.0]), vec![1.0, 1.0, 6.0]);
        let s = assemble_cubic(&[0.0; 3], &DenseTensor::identity(3)).unwrap();
        assert_eq!(s.rhs(&[1.0, 0.0, 0.0]), vec![0.0, 0.0, 1.0]);
        let mut r = rng(2);
        let q = oracle::random_symmetric(&mut r, 3);
        let alpha = [0.3, -0.2, 0.1];
        let x = [0.4, -0.7, 0.2];
        let sys = assemble_cubic(&alpha, &q).unwrap();
        let qx = matvec(&q, &x).unwrap();
        let want = alpha.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>()
            + qx.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        assert!((sys.rhs(&x)[2] - want).abs() < 1e-15);
        let mut bad = q.clone();
        bad[[0, 2]] += 1.0;
        assert!(assemble_cubic(&alpha, &bad).is_err());
    }

    #[test]
    fn exact_solution() {
        let mut r = rng(3);
        let op =
            LinearOperator::new(oracle::random_tensor(&mut r, &[2, 3, 2, 3]).scale(0.3)).unwrap();
        let c = oracle::random_tensor(&mut r, &[2, 3]);
        assert!(solve_exact(&op, &c, 0.0).unwrap().max_abs_diff(&c) < 1e-15);
        let a0 = DenseTensor::from_rows(&[&[0.5, 0.1], &[-0.2, 0.3]]);
        let ct = coefficient_tensor(std::slice::from_ref(&a0), 2, 1).unwrap();
        let c1 = DenseTensor::from_rows(&[&[1.0], &[-1.0]]);
        let got = solve_exact(&ct.operator(), &c1, 1.3).unwrap();
        let want = matmul(&expm(&a0.scale(-1.3)).unwrap(), &c1).unwrap();
        assert!(got.max_abs_diff(&want) < 1e-14);
        let t = 0.8;
        let h = 1e-4;
        let fd = (&solve_exact(&op, &c, t + h).unwrap() - &solve_exact(&op, &c, t - h).unwrap())
            .scale(0.5 / h);
        let rhs = op.apply(&solve_exact(&op, &c, t).unwrap()).unwrap();
        assert!(fd.max_abs_diff(&rhs) < 1e-7);
    }

    #[test]
    fn multitime_cases() {
        let mut r = rng(4);
        let m = oracle::random_tensor(&mut r, &[3, 3]);
        let m2 = matmul(&m, &m).unwrap();
        let id = DenseTensor::identity(3);
        let slices = [m.clone(), &m2 - &id.scale(0.5)];
        let a = DenseTensor::from_fn(&[2, 3, 3], |i| slices[i[0]][[i[1], i[2]]]);
        let c = oracle::random_tensor(&mut r, &[3]);
        assert_eq!(solve_multitime(&a, &c, &[0.0, 0.0]).unwrap(), c);
        let t = [0.3, -0.2];
        let h = 1e-5;
        for (i, ai) in slices.iter().enumerate() {
            let mut tp = t;
            let mut tm = t;
            tp[i] += h;
            tm[i] -= h;
            let fd = (&solve_multitime(&a, &c, &tp).unwrap()
                - &solve_multitime(&a, &c, &tm).unwrap())
                .scale(0.5 / h);
            let x = solve_multitime(&a, &c, &t).unwrap();
            let want = DenseTensor::vector(matvec(ai, x.values()).unwrap());
            assert!(fd.max_abs_diff(&want) < 1e-6);
        }
        let single = DenseTensor::from_fn(&[1, 3, 3], |i| m[[i[1], i[2]]]);
        let got = solve_multitime(&single, &c, &[0.7]).unwrap();
        let want = matvec(&expm(&m.scale(0.7)).unwrap(), c.values()).unwrap();
        assert!(got
            .values()
            .iter()
            .zip(&want)
            .all(|(a, b)| (a - b).abs() < 1e-14));

        let other = oracle::random_tensor(&mut r, &[3, 3]);
        let bad = DenseTensor::from_fn(&[3, 3, 3], |i| match i[0] {
            0 => m[[i[1], i[2]]],
            1 => m2[[i[1], i[2]]],
            _ => other[[i[1], i[2]]],
        });
        match solve_multitime(&bad, &c, &[0.1, 0.1, 0.1]) {
            Err(Error::NonCommuting {
                first: 0,
                second: 2,
                ..
            }) => {}
            other => panic!("expected non-commuting error, got {other:?}"),
        }
    }

    #[test]
    fn directional_generator_cases() {
        let mut r = rng(5);
        let g = oracle::random_tensor(&mut r, &[4, 3, 3]);
        let sys = MultiTimeSystem::new(g.clone(), 1).unwrap();
        assert_eq!(sys.x_shape, vec![3]);
        let zero = directional_generator(&sys, &DenseTensor::zeros(&[4])).unwrap();
        assert_eq!(zero.tensor().max_abs(), 0.0);
        let s2 = sys.slice(&[2]).unwrap();
        assert_eq!(
            s2.tensor(),
            &DenseTensor::from_fn(&[3, 3], |i| g[[2, i[0], i[1]]])
        );
        assert!(MultiTimeSystem::new(DenseTensor::zeros(&[2, 3, 4]), 1).is_err());
        assert!(MultiTimeSystem::new(DenseTensor::zeros(&[2, 3, 3, 3]), 1).is_err());
        let one = oracle::random_tensor(&mut r, &[1, 2, 2, 2, 2]);
        let sys1 = MultiTimeSystem::new(one.clone(), 1).unwrap();
        let l = directional_generator(&sys1, &DenseTensor::vector(vec![1.0])).unwrap();
        assert_eq!(l.tensor(), &one.reshape(&[2, 2, 2, 2]).unwrap());
        assert!(directional_generator(&sys1, &DenseTensor::zeros(&[2])).is_err());
    }

    #[test]
    fn integrator_basics() {
        let zero = LinearOperator::zeros(&[2, 2]);
        let x0 = DenseTensor::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let tr = integrate(&zero, &x0, 0.1, 5, Method::Rk4).unwrap();
        assert!(tr.states.iter().all(|s| s == &x0));
        let neg = LinearOperator::new(DenseTensor::from_rows(&[&[-1.0]])).unwrap();
        let one = DenseTensor::vector(vec![1.0]);
        let tr = integrate(&neg, &one, 0.1, 1, Method::Euler).unwrap();
        assert!((tr.last()[[0]] - 0.9).abs() < 1e-15);
        assert_eq!(tr.times, vec![0.0, 0.1]);
        assert!(integrate(&neg, &one, -0.1, 1, Method::Euler).is_err());
        let blow = LinearOperator::new(DenseTensor::from_rows(&[&[1e200]])).unwrap();
        assert!(matches!(
            integrate(&blow, &one, 1e200, 5, Method::Euler),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn rk4_matches_exact() {
        let mut r = rng(6);
        let raw = oracle::random_tensor(&mut r, &[3, 3, 3, 3]).scale(0.2);
        let shift = crate::products::identity_operator(&[3, 3])
            .unwrap()
            .scale(-1.0);
        let op = LinearOperator::new(&raw + &shift).unwrap();
        let x0 = oracle::random_tensor(&mut r, &[3, 3]);
        let rk = integrate(&op, &x0, 1e-2, 100, Method::Rk4).unwrap();
        let ex = solve_exact(&op, &x0, 1.0).unwrap();
        assert!(rk.last().max_abs_diff(&ex) < 1e-7);
        let stepped = integrate(&op, &x0, 1e-2, 100, Method::Exact).unwrap();
        assert!(stepped.last().max_abs_diff(&ex) < 1e-12);
        let fin = integrate_final(&op, &x0, 1e-2, 100, Method::Rk4).unwrap();
        assert_eq!(&fin, rk.last());
    }

    #[test]
    fn csv_layout() {
        let op = LinearOperator::zeros(&[2, 2]);
        let x0 = DenseTensor::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let tr = integrate(&op, &x0, 0.5, 1, Method::Euler).unwrap();
        let csv = tr.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("s,x11,x21,x12,x22"));
        assert_eq!(lines.next(), Some("0,1,3,2,4"));
        assert_eq!(lines.next(), Some("0.5,1,3,2,4"));
    }

    #[test]
    fn method_parsing() {
        assert_eq!("RK4".parse::<Method>().unwrap(), Method::Rk4);
        assert!("midpoint".parse::<Method>().is_err());
        assert_eq!(Method::Exact.to_string(), "exact");
    }
}
