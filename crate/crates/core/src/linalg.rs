//! Small dense linear algebra on order-2 [`DenseTensor`]s: products, LU,
//! adjugates, Cholesky, the matrix exponential and a one-sided Jacobi SVD.

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

const SVD_MAX_SWEEPS: usize = 60;

pub fn matmul(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    a.expect_order(2)?;
    b.expect_order(2)?;
    let (m, k) = (a.rows(), a.cols());
    let (k2, n) = (b.rows(), b.cols());
    if k != k2 {
        return Err(Error::ShapeMismatch(format!(
            "cannot multiply {m}x{k} by {k2}x{n}"
        )));
    }
    let av = a.values();
    let bv = b.values();
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = av[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let brow = &bv[p * n..(p + 1) * n];
            for (o, &bpj) in row.iter_mut().zip(brow) {
                *o += aip * bpj;
            }
        }
    }
    DenseTensor::new(vec![m, n], out)
}

/// `A x` for a matrix `A` and a slice `x`.
pub fn matvec(a: &DenseTensor, x: &[f64]) -> Result<Vec<f64>> {
    a.expect_order(2)?;
    if a.cols() != x.len() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} matrix against vector of length {}",
            a.rows(),
            a.cols(),
            x.len()
        )));
    }
    let n = a.cols();
    Ok(a.values()
        .chunks(n)
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect())
}

pub fn trace(a: &DenseTensor) -> Result<f64> {
    let n = a.expect_square()?;
    Ok((0..n).map(|i| a[[i, i]]).sum())
}

/// Integer matrix power, `X^0 = I`.
pub fn matrix_power(x: &DenseTensor, m: usize) -> Result<DenseTensor> {
    let n = x.expect_square()?;
    let mut out = DenseTensor::identity(n);
    for _ in 0..m {
        out = matmul(&out, x)?;
    }
    Ok(out)
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: DenseTensor,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn new(a: &DenseTensor) -> Result<Self> {
        let n = a.expect_square()?;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[[i, k]].abs()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if pivot <= scale * f64::EPSILON * n as f64 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[[k, j]];
                    lu[[k, j]] = lu[[p, j]];
                    lu[[p, j]] = tmp;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let d = lu[[k, k]];
            for i in k + 1..n {
                let f = lu[[i, k]] / d;
                lu[[i, k]] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        let v = lu[[k, j]];
                        lu[[i, j]] -= f * v;
                    }
                }
            }
        }
        Ok(Self {
            lu,
            perm,
            sign,
            singular,
        })
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> f64 {
        let n = self.lu.rows();
        if self.singular {
            return 0.0;
        }
        (0..n).fold(self.sign, |acc, i| acc * self.lu[[i, i]])
    }

    /// Solves `A X = B` for a matrix right-hand side.
    pub fn solve(&self, b: &DenseTensor) -> Result<DenseTensor> {
        if self.singular {
            return Err(Error::Singular);
        }
        let n = self.lu.rows();
        b.expect_order(2)?;
        if b.rows() != n {
            return Err(Error::ShapeMismatch(format!(
                "right-hand side has {} rows, expected {n}",
                b.rows()
            )));
        }
        let m = b.cols();
        let mut x = DenseTensor::zeros(&[n, m]);
        for c in 0..m {
            let mut y: Vec<f64> = self.perm.iter().map(|&p| b[[p, c]]).collect();
            for i in 0..n {
                for k in 0..i {
                    y[i] -= self.lu[[i, k]] * y[k];
                }
            }
            for i in (0..n).rev() {
                for k in i + 1..n {
                    y[i] -= self.lu[[i, k]] * y[k];
                }
                y[i] /= self.lu[[i, i]];
            }
            for i in 0..n {
                x[[i, c]] = y[i];
            }
        }
        Ok(x)
    }
}

pub fn solve(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    Lu::new(a)?.solve(b)
}

pub fn inverse(a: &DenseTensor) -> Result<DenseTensor> {
    let n = a.expect_square()?;
    Lu::new(a)?.solve(&DenseTensor::identity(n))
}

pub fn det(a: &DenseTensor) -> Result<f64> {
    let n = a.expect_square()?;
    if n <= 4 {
        return Ok(det_cofactor(a));
    }
    Ok(Lu::new(a)?.det())
}

fn minor(a: &DenseTensor, row: usize, col: usize) -> DenseTensor {
    let n = a.rows();
    DenseTensor::from_fn(&[n - 1, n - 1], |ix| {
        let i = if ix[0] < row { ix[0] } else { ix[0] + 1 };
        let j = if ix[1] < col { ix[1] } else { ix[1] + 1 };
        a[[i, j]]
    })
}

fn det_cofactor(a: &DenseTensor) -> f64 {
    let n = a.rows();
    match n {
        1 => a[[0, 0]],
        2 => a[[0, 0]] * a[[1, 1]] - a[[0, 1]] * a[[1, 0]],
        _ => (0..n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                s * a[[0, j]] * det_cofactor(&minor(a, 0, j))
            })
            .sum(),
    }
}

/// Cofactor matrix: entry `(i, j)` is `(-1)^(i+j) det A(i|j)`.
pub fn cofactor_matrix(a: &DenseTensor) -> Result<DenseTensor> {
    let n = a.expect_square()?;
    if n == 1 {
        return Ok(DenseTensor::identity(1));
    }
    if n > 4 {
        let lu = Lu::new(a)?;
        if !lu.is_singular() {
            let inv = lu.solve(&DenseTensor::identity(n))?;
            return Ok(inv.transpose().scale(lu.det()));
        }
    }
    Ok(DenseTensor::from_fn(&[n, n], |ix| {
        let s = if (ix[0] + ix[1]) % 2 == 0 { 1.0 } else { -1.0 };
        s * det_cofactor(&minor(a, ix[0], ix[1]))
    }))
}

/// Classical adjugate, the transpose of the cofactor matrix, so that
/// `A adj(A) = det(A) I`.
pub fn adjugate(a: &DenseTensor) -> Result<DenseTensor> {
    Ok(cofactor_matrix(a)?.transpose())
}

/// Outcome of an attempted Cholesky factorization.
#[derive(Debug, Clone)]
pub struct Cholesky {
    /// Lower factor, present only when every pivot exceeded the tolerance.
    pub factor: Option<DenseTensor>,
    /// Pivots `d_j` (squared diagonal of the factor) computed before stopping.
    pub pivots: Vec<f64>,
}

impl Cholesky {
    pub fn succeeded(&self) -> bool {
        self.factor.is_some()
    }

    pub fn min_pivot(&self) -> f64 {
        self.pivots.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Cholesky of the symmetric part of `a`; fails at the first pivot `<= tol`.
pub fn cholesky(a: &DenseTensor, tol: f64) -> Result<Cholesky> {
    let n = a.expect_square()?;
    let sym = |i: usize, j: usize| 0.5 * (a[[i, j]] + a[[j, i]]);
    let mut l = DenseTensor::zeros(&[n, n]);
    let mut pivots = Vec::with_capacity(n);
    for j in 0..n {
        let d = sym(j, j) - (0..j).map(|k| l[[j, k]] * l[[j, k]]).sum::<f64>();
        pivots.push(d);
        if d <= tol || !d.is_finite() {
            return Ok(Cholesky {
                factor: None,
                pivots,
            });
        }
        let ljj = d.sqrt();
        l[[j, j]] = ljj;
        for i in j + 1..n {
            let s = sym(i, j) - (0..j).map(|k| l[[i, k]] * l[[j, k]]).sum::<f64>();
            l[[i, j]] = s / ljj;
        }
    }
    Ok(Cholesky {
        factor: Some(l),
        pivots,
    })
}

/// Matrix exponential by scaling and squaring with an 18-term Taylor series.
pub fn expm(a: &DenseTensor) -> Result<DenseTensor> {
    let n = a.expect_square()?;
    let norm = a.frobenius_norm();
    let mut squarings = 0u32;
    let mut scaled = norm;
    while scaled > 0.5 {
        scaled /= 2.0;
        squarings += 1;
    }
    let b = a.scale(0.5f64.powi(squarings as i32));
    let mut term = DenseTensor::identity(n);
    let mut sum = term.clone();
    for k in 1..=18 {
        term = matmul(&term, &b)?.scale(1.0 / k as f64);
        sum = &sum + &term;
    }
    for _ in 0..squarings {
        sum = matmul(&sum, &sum)?;
    }
    Ok(sum)
}

/// Thin singular value decomposition `M = U diag(s) V^T` with
/// `k = min(rows, cols)` columns in `U` and `V`, singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseTensor,
    pub s: Vec<f64>,
    pub v: DenseTensor,
    pub sweeps: usize,
}

impl Svd {
    pub fn reconstruct(&self) -> DenseTensor {
        let k = self.s.len();
        let us = DenseTensor::from_fn(&[self.u.rows(), k], |i| self.u[[i[0], i[1]]] * self.s[i[1]]);
        matmul(&us, &self.v.transpose()).expect("consistent factors")
    }
}

pub fn svd(m: &DenseTensor) -> Result<Svd> {
    m.expect_order(2)?;
    if m.rows() >= m.cols() {
        jacobi_tall(m)
    } else {
        let t = jacobi_tall(&m.transpose())?;
        Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
            sweeps: t.sweeps,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn columns(m: &DenseTensor) -> Vec<Vec<f64>> {
    let (r, c) = (m.rows(), m.cols());
    (0..c)
        .map(|j| (0..r).map(|i| m[[i, j]]).collect())
        .collect()
}

fn from_columns(cols: &[Vec<f64>], rows: usize) -> DenseTensor {
    DenseTensor::from_fn(&[rows, cols.len()], |i| cols[i[1]][i[0]])
}

/// Hestenes one-sided Jacobi on a matrix with `rows >= cols`.
fn jacobi_tall(m: &DenseTensor) -> Result<Svd> {
    let (rows, n) = (m.rows(), m.cols());
    let mut a = columns(m);
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let eps = f64::EPSILON;
    let mut sweeps = 0;
    loop {
        if sweeps >= SVD_MAX_SWEEPS {
            return Err(Error::NoConvergence("Jacobi SVD", SVD_MAX_SWEEPS));
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&a[p], &a[p]);
                let beta = dot(&a[q], &a[q]);
                let gamma = dot(&a[p], &a[q]);
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = a
        .iter()
        .enumerate()
        .map(|(j, c)| (dot(c, c).sqrt(), j))
        .collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0));
    let smax = order.first().map_or(0.0, |o| o.0);
    let cutoff = smax * eps * rows as f64;
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut v_cols = Vec::with_capacity(n);
    let mut deficient = Vec::new();
    for (k, &(sigma, j)) in order.iter().enumerate() {
        s.push(sigma);
        v_cols.push(v[j].clone());
        if sigma > cutoff && sigma > 0.0 {
            u_cols.push(a[j].iter().map(|x| x / sigma).collect());
        } else {
            u_cols.push(vec![0.0; rows]);
            deficient.push(k);
        }
    }
    complete_basis(&mut u_cols, &deficient, rows);
    Ok(Svd {
        u: from_columns(&u_cols, rows),
        s,
        v: from_columns(&v_cols, n),
        sweeps,
    })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Replaces the columns listed in `missing` with unit vectors orthogonal to
/// every other column, drawn from the standard basis by modified Gram-Schmidt.
fn complete_basis(cols: &mut [Vec<f64>], missing: &[usize], rows: usize) {
    let mut candidate = 0;
    for &k in missing {
        loop {
            assert!(candidate < rows, "basis completion ran out of candidates");
            let mut w = vec![0.0; rows];
            w[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for (j, c) in cols.iter().enumerate() {
                    if j == k || (missing.contains(&j) && c.iter().all(|x| *x == 0.0)) {
                        continue;
                    }
                    let proj = dot(&w, c);
                    for (wi, ci) in w.iter_mut().zip(c) {
                        *wi -= proj * ci;
                    }
                }
            }
            let norm = dot(&w, &w).sqrt();
            if norm > 1e-8 {
                cols[k] = w.into_iter().map(|x| x / norm).collect();
                break;
            }
        }
    }
}

/// 2-norm condition number from the singular values.
pub fn condition_number(a: &DenseTensor) -> Result<f64> {
    a.expect_square()?;
    let s = svd(a)?.s;
    let smin = *s.last().expect("non-empty");
    Ok(if smin == 0.0 {
        f64::INFINITY
    } else {
        s[0] / smin
    })
}

/// Max deviation of `Q^T Q` from the identity.
pub fn orthonormality_error(q: &DenseTensor) -> f64 {
    let g = matmul(&q.transpose(), q).expect("square Gram matrix");
    g.max_abs_diff(&DenseTensor::identity(q.cols()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn random(rows: usize, cols: usize, seed: u64) -> DenseTensor {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        DenseTensor::from_fn(&[rows, cols], |_| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn matmul_identity() {
        let a = DenseTensor::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(matmul(&a, &DenseTensor::identity(2)).unwrap(), a);
        assert!(matmul(&a, &DenseTensor::zeros(&[3, 1])).is_err());
    }

    #[test]
    fn inverse_and_det() {
        let a = random(5, 5, 1);
        let inv = inverse(&a).unwrap();
        assert!(
            matmul(&a, &inv)
                .unwrap()
                .max_abs_diff(&DenseTensor::identity(5))
                < 1e-12
        );
        let d_lu = Lu::new(&a).unwrap().det();
        let d_cof: f64 = (0..5)
            .map(|j| a[[0, j]] * cofactor_matrix(&a).unwrap()[[0, j]])
            .sum();
        assert!((d_lu - d_cof).abs() < 1e-12);
        assert_eq!(det(&DenseTensor::diag(&[2.0, 3.0])).unwrap(), 6.0);
        assert!(matches!(
            inverse(&DenseTensor::zeros(&[2, 2])),
            Err(Error::Singular)
        ));
    }

    #[test]
    fn adjugate_identity_holds_for_singular_input() {
        let a = DenseTensor::from_rows(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0], &[0.0, 1.0, 5.0]]);
        let prod = matmul(&a, &adjugate(&a).unwrap()).unwrap();
        assert!(prod.max_abs() < 1e-12);
        let b = random(4, 4, 3);
        let prod = matmul(&b, &adjugate(&b).unwrap()).unwrap();
        let want = DenseTensor::identity(4).scale(det(&b).unwrap());
        assert!(prod.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn cholesky_detects_indefinite() {
        let pd = DenseTensor::from_rows(&[&[4.0, 2.0], &[2.0, 3.0]]);
        let c = cholesky(&pd, 1e-10).unwrap();
        let l = c.factor.unwrap();
        assert!(matmul(&l, &l.transpose()).unwrap().max_abs_diff(&pd) < 1e-14);
        let indef = DenseTensor::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        let c = cholesky(&indef, 1e-10).unwrap();
        assert!(!c.succeeded());
        assert!(c.min_pivot() < 0.0);
    }

    #[test]
    fn expm_diagonal_and_nilpotent() {
        let e = expm(&DenseTensor::diag(&[1.0, 2.0])).unwrap();
        let want = DenseTensor::diag(&[1f64.exp(), 2f64.exp()]);
        assert!(e.max_abs_diff(&want) < 1e-12 * want.max_abs());
        let n = DenseTensor::from_rows(&[&[0.0, 3.0], &[0.0, 0.0]]);
        let e = expm(&n).unwrap();
        assert!(e.max_abs_diff(&DenseTensor::from_rows(&[&[1.0, 3.0], &[0.0, 1.0]])) < 1e-13);
    }

    #[test]
    fn svd_small_cases() {
        let s = svd(&DenseTensor::diag(&[1.0, 3.0])).unwrap();
        assert!((s.s[0] - 3.0).abs() < 1e-15 && (s.s[1] - 1.0).abs() < 1e-15);
        let u = [1.0, 2.0, 2.0];
        let v = [3.0, 4.0];
        let m = DenseTensor::from_fn(&[3, 2], |i| u[i[0]] * v[i[1]]);
        let s = svd(&m).unwrap();
        assert!((s.s[0] - 15.0).abs() < 1e-13);
        assert!(s.s[1].abs() < 1e-13);
        assert!(orthonormality_error(&s.u) < 1e-14);
    }

    #[test]
    fn svd_random_wide_and_tall() {
        for (r, c, seed) in [(6, 8, 7), (8, 6, 8), (5, 5, 9), (1, 4, 10)] {
            let m = random(r, c, seed);
            let s = svd(&m).unwrap();
            assert!(orthonormality_error(&s.u) < 1e-12);
            assert!(orthonormality_error(&s.v) < 1e-12);
            assert!(s.reconstruct().max_abs_diff(&m) < 1e-10 * m.frobenius_norm());
            assert!(s.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_zero_matrix_completes_basis() {
        let s = svd(&DenseTensor::zeros(&[3, 5])).unwrap();
        assert!(s.s.iter().all(|&x| x == 0.0));
        assert!(orthonormality_error(&s.u) < 1e-14);
    }

    #[test]
    fn condition_number_of_diag() {
        let k = condition_number(&DenseTensor::diag(&[10.0, 2.0])).unwrap();
        assert!((k - 5.0).abs() < 1e-14);
    }
}
