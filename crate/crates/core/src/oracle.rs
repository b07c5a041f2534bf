//! Naive nested-loop reference implementations and random generators used
//! to cross-check the fast paths.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::products::{ModePairing, Side};
use crate::tensor::{multi_indices, DenseTensor};

/// Entries uniform on `[-1, 1)`.
pub fn random_tensor<R: Rng + ?Sized>(rng: &mut R, shape: &[usize]) -> DenseTensor {
    DenseTensor::from_fn(shape, |_| rng.random_range(-1.0..1.0))
}

pub fn gaussian_tensor<R: Rng + ?Sized>(rng: &mut R, shape: &[usize]) -> DenseTensor {
    DenseTensor::from_fn(shape, |_| StandardNormal.sample(rng))
}

/// Symmetric matrix with entries uniform on `[-1, 1)`.
pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DenseTensor {
    let a = random_tensor(rng, &[n, n]);
    DenseTensor::from_fn(&[n, n], |i| {
        if i[0] <= i[1] {
            a[[i[0], i[1]]]
        } else {
            a[[i[1], i[0]]]
        }
    })
}

/// Fully symmetric order-`m` hypercube obtained by averaging over sorted indices.
pub fn random_symmetric_tensor<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> DenseTensor {
    let base = random_tensor(rng, &vec![n; m]);
    DenseTensor::from_fn(&vec![n; m], |i| {
        let mut s = i.to_vec();
        s.sort_unstable();
        base.get(&s)
    })
}

pub fn outer_loop(a: &DenseTensor, b: &DenseTensor) -> DenseTensor {
    let shape: Vec<usize> = a.shape().iter().chain(b.shape()).copied().collect();
    let p = a.order();
    DenseTensor::from_fn(&shape, |i| a.get(&i[..p]) * b.get(&i[p..]))
}

pub fn contract_loop(a: &DenseTensor, b: &DenseTensor, pairing: &ModePairing) -> DenseTensor {
    let free_a: Vec<usize> = (0..a.order())
        .filter(|m| !pairing.s_modes.contains(m))
        .collect();
    let free_b: Vec<usize> = (0..b.order())
        .filter(|m| !pairing.t_modes.contains(m))
        .collect();
    let mut shape: Vec<usize> = free_a.iter().map(|&m| a.shape()[m]).collect();
    shape.extend(free_b.iter().map(|&m| b.shape()[m]));
    let inner: Vec<usize> = pairing.s_modes.iter().map(|&m| a.shape()[m]).collect();
    let scalar = shape.is_empty();
    if scalar {
        shape.push(1);
    }
    let mut ia = vec![0; a.order()];
    let mut ib = vec![0; b.order()];
    DenseTensor::from_fn(&shape, |out| {
        if !scalar {
            for (k, &m) in free_a.iter().enumerate() {
                ia[m] = out[k];
            }
            for (k, &m) in free_b.iter().enumerate() {
                ib[m] = out[free_a.len() + k];
            }
        }
        let mut s = 0.0;
        for j in multi_indices(&inner) {
            for (k, &jk) in j.iter().enumerate() {
                ia[pairing.s_modes[k]] = jk;
                ib[pairing.t_modes[k]] = jk;
            }
            s += a.get(&ia) * b.get(&ib);
        }
        s
    })
}

pub fn contract_last_loop(a: &DenseTensor, b: &DenseTensor, k: usize) -> DenseTensor {
    let p = a.order();
    let pairing = ModePairing {
        s_modes: (p - k..p).collect(),
        t_modes: (0..k).collect(),
    };
    contract_loop(a, b, &pairing)
}

/// Single-mode product by explicit summation.
pub fn mode_product_loop(a: &DenseTensor, b: &DenseTensor, k: usize, side: Side) -> DenseTensor {
    let new_dim = match side {
        Side::Right => b.cols(),
        Side::Left => b.rows(),
    };
    let mut shape = a.shape().to_vec();
    let old_dim = shape[k];
    shape[k] = new_dim;
    DenseTensor::from_fn(&shape, |i| {
        let mut idx = i.to_vec();
        let mut s = 0.0;
        for j in 0..old_dim {
            idx[k] = j;
            let w = match side {
                Side::Right => b[[j, i[k]]],
                Side::Left => b[[i[k], j]],
            };
            s += a.get(&idx) * w;
        }
        s
    })
}

pub fn matmul_loop(a: &DenseTensor, b: &DenseTensor) -> DenseTensor {
    DenseTensor::from_fn(&[a.rows(), b.cols()], |i| {
        (0..a.cols()).map(|k| a[[i[0], k]] * b[[k, i[1]]]).sum()
    })
}

/// Determinant by Leibniz expansion over permutations.
pub fn det_leibniz(a: &DenseTensor) -> f64 {
    let n = a.rows();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    permutations(&mut perm, 0, &mut |p| {
        let mut inversions = 0;
        for i in 0..n {
            for j in i + 1..n {
                if p[i] > p[j] {
                    inversions += 1;
                }
            }
        }
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * (0..n).map(|i| a[[i, p[i]]]).product::<f64>();
    });
    total
}

fn permutations(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, f);
        p.swap(k, i);
    }
}

/// `sum_{k=0}^{terms-1} A^k / k!` for a square matrix.
pub fn exp_series(a: &DenseTensor, terms: usize) -> DenseTensor {
    let n = a.rows();
    let mut term = DenseTensor::identity(n);
    let mut sum = term.clone();
    for k in 1..terms {
        term = matmul_loop(&term, a).scale(1.0 / k as f64);
        sum = &sum + &term;
    }
    sum
}

/// Polynomial coefficients (constant first) of `prod_i (x - r_i)`.
pub fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k + 1] += ck;
            next[k] -= r * ck;
        }
        c = next;
    }
    c
}

/// Characteristic polynomial `det(xI - A)` (constant first) by the
/// Faddeev-LeVerrier recursion.
pub fn char_poly(a: &DenseTensor) -> Vec<f64> {
    let n = a.rows();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = DenseTensor::zeros(&[n, n]);
    for k in 1..=n {
        let mut next = matmul_loop(a, &m);
        for i in 0..n {
            next[[i, i]] += c[n + 1 - k];
        }
        m = next;
        let am = matmul_loop(a, &m);
        let tr: f64 = (0..n).map(|i| am[[i, i]]).sum();
        c[n - k] = -tr / k as f64;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    #[test]
    fn leibniz_matches_known_values() {
        assert_eq!(det_leibniz(&DenseTensor::diag(&[2.0, 3.0, 4.0])), 24.0);
        let a = DenseTensor::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(det_leibniz(&a), -1.0);
    }

    #[test]
    fn roots_expand() {
        assert_eq!(poly_from_roots(&[1.0, 2.0]), vec![2.0, -3.0, 1.0]);
        let cp = char_poly(&DenseTensor::diag(&[1.0, 2.0, -3.0]));
        assert_eq!(cp, poly_from_roots(&[1.0, 2.0, -3.0]));
    }

    #[test]
    fn symmetric_generators() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
        let s = random_symmetric(&mut rng, 4);
        assert_eq!(s, s.transpose());
        let t = random_symmetric_tensor(&mut rng, 3, 3);
        assert_eq!(t[[0, 1, 2]], t[[2, 0, 1]]);
    }
}
