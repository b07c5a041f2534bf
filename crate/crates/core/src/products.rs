//! Outer, partition-outer and contractive products, plus the structured
//! tensors built from them (identity operators, unit, diagonal and
//! commutation tensors, symmetric rank-1 tensors).

use crate::error::{Error, Result};
use crate::linalg::matmul;
use crate::tensor::{multi_indices, DenseTensor, SYMMETRY_TOL};

/// Assignment of output modes to factor tensors. Block `k` lists, in
/// increasing order, the output modes bound to the modes of factor `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModePartition {
    blocks: Vec<Vec<usize>>,
    order: usize,
}

impl ModePartition {
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let order: usize = blocks.iter().map(Vec::len).sum();
        let mut seen = vec![false; order];
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            if b.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidPartition(format!(
                    "block {b:?} is not strictly increasing"
                )));
            }
            for &m in b {
                if m >= order || seen[m] {
                    return Err(Error::InvalidPartition(format!(
                        "blocks {blocks:?} do not partition 0..{order}"
                    )));
                }
                seen[m] = true;
            }
        }
        Ok(Self { blocks, order })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `{{0,2},{1,3}}`.
    pub fn cross() -> Self {
        Self::new(vec![vec![0, 2], vec![1, 3]]).expect("valid")
    }

    /// `{{0,3},{1,2}}`.
    pub fn anticross() -> Self {
        Self::new(vec![vec![0, 3], vec![1, 2]]).expect("valid")
    }
}

/// Contracted modes of the left (`s_modes`) and right (`t_modes`) tensor,
/// paired positionally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModePairing {
    pub s_modes: Vec<usize>,
    pub t_modes: Vec<usize>,
}

impl ModePairing {
    pub fn new(s_modes: Vec<usize>, t_modes: Vec<usize>) -> Result<Self> {
        if s_modes.len() != t_modes.len() {
            return Err(Error::InvalidPairing(format!(
                "{} left modes vs {} right modes",
                s_modes.len(),
                t_modes.len()
            )));
        }
        for m in [&s_modes, &t_modes] {
            if m.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidPairing(format!(
                    "modes {m:?} are not strictly increasing"
                )));
            }
        }
        Ok(Self { s_modes, t_modes })
    }

    /// Last `k` modes of an order-`p` tensor against the first `k` of another.
    pub fn last_first(p: usize, k: usize) -> Result<Self> {
        if k > p {
            return Err(Error::InvalidPairing(format!(
                "cannot contract {k} modes of an order-{p} tensor"
            )));
        }
        Self::new((p - k..p).collect(), (0..k).collect())
    }
}

pub fn outer(a: &DenseTensor, b: &DenseTensor) -> DenseTensor {
    let shape: Vec<usize> = a.shape().iter().chain(b.shape()).copied().collect();
    let mut values = Vec::with_capacity(a.len() * b.len());
    for &x in a.values() {
        values.extend(b.values().iter().map(|&y| x * y));
    }
    DenseTensor::new(shape, values).expect("consistent outer shape")
}

pub fn outer_partition(factors: &[&DenseTensor], pi: &ModePartition) -> Result<DenseTensor> {
    if factors.len() != pi.blocks.len() {
        return Err(Error::InvalidPartition(format!(
            "{} factors for {} blocks",
            factors.len(),
            pi.blocks.len()
        )));
    }
    let mut shape = vec![0; pi.order];
    for (f, block) in factors.iter().zip(&pi.blocks) {
        if f.order() != block.len() {
            return Err(Error::InvalidPartition(format!(
                "block {block:?} has {} modes but its factor has order {}",
                block.len(),
                f.order()
            )));
        }
        for (&m, &n) in block.iter().zip(f.shape()) {
            shape[m] = n;
        }
    }
    // Outer product in factor order, then move each factor's modes into place.
    let mut prod = factors[0].clone();
    for f in &factors[1..] {
        prod = outer(&prod, f);
    }
    let source: Vec<usize> = pi.blocks.iter().flatten().copied().collect();
    let mut perm = vec![0; pi.order];
    for (pos, &m) in source.iter().enumerate() {
        perm[m] = pos;
    }
    let out = prod.permute(&perm)?;
    debug_assert_eq!(out.shape(), &shape[..]);
    Ok(out)
}

/// `(A x_c B)_{ijkl} = A_{ik} B_{jl}`.
pub fn cross(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    a.expect_order(2)?;
    b.expect_order(2)?;
    outer_partition(&[a, b], &ModePartition::cross())
}

/// `(A x_ac B)_{ijkl} = A_{il} B_{jk}`.
pub fn anticross(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    a.expect_order(2)?;
    b.expect_order(2)?;
    outer_partition(&[a, b], &ModePartition::anticross())
}

/// General contraction. Surviving modes: unpaired modes of `a` in order,
/// then unpaired modes of `b` in order.
pub fn contract(a: &DenseTensor, b: &DenseTensor, pairing: &ModePairing) -> Result<DenseTensor> {
    for &m in &pairing.s_modes {
        if m >= a.order() {
            return Err(Error::ModeOutOfRange {
                mode: m,
                order: a.order(),
            });
        }
    }
    for &m in &pairing.t_modes {
        if m >= b.order() {
            return Err(Error::ModeOutOfRange {
                mode: m,
                order: b.order(),
            });
        }
    }
    for (&s, &t) in pairing.s_modes.iter().zip(&pairing.t_modes) {
        if a.shape()[s] != b.shape()[t] {
            return Err(Error::ShapeMismatch(format!(
                "paired mode {s} of {:?} against mode {t} of {:?}",
                a.shape(),
                b.shape()
            )));
        }
    }
    let free_a: Vec<usize> = (0..a.order())
        .filter(|m| !pairing.s_modes.contains(m))
        .collect();
    let free_b: Vec<usize> = (0..b.order())
        .filter(|m| !pairing.t_modes.contains(m))
        .collect();
    let mut shape: Vec<usize> = free_a.iter().map(|&m| a.shape()[m]).collect();
    shape.extend(free_b.iter().map(|&m| b.shape()[m]));

    let am = matricize(a, &free_a, &pairing.s_modes)?;
    let bm = matricize(b, &pairing.t_modes, &free_b)?;
    let prod = matmul(&am, &bm)?;
    if shape.is_empty() {
        return Ok(DenseTensor::vector(prod.into_values()));
    }
    prod.reshape(&shape)
}

/// Like `group_unfold` but allowing an empty group (a single row or column).
fn matricize(t: &DenseTensor, rows: &[usize], cols: &[usize]) -> Result<DenseTensor> {
    let perm: Vec<usize> = rows.iter().chain(cols).copied().collect();
    let r: usize = rows.iter().map(|&m| t.shape()[m]).product();
    let c: usize = cols.iter().map(|&m| t.shape()[m]).product();
    t.permute(&perm)?.reshape(&[r, c])
}

/// Inner product `<A, B>`.
pub fn inner(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    a.same_shape(b)?;
    Ok(a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum())
}

/// `A *_[k] B`: last `k` modes of `a` against the first `k` of `b`.
pub fn contract_last(a: &DenseTensor, b: &DenseTensor, k: usize) -> Result<DenseTensor> {
    contract(a, b, &ModePairing::last_first(a.order(), k)?)
}

/// Which index of the matrix factor a single-mode product contracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `C *_k A`: the matrix's column index meets mode `k`.
    Left,
    /// `A *_k B`: the matrix's row index meets mode `k`.
    Right,
}

/// Single-mode product replacing mode `k` of `a` in place.
pub fn contract_mode(
    a: &DenseTensor,
    b: &DenseTensor,
    k: usize,
    side: Side,
) -> Result<DenseTensor> {
    b.expect_order(2)?;
    let op = match side {
        Side::Right => b.clone(),
        Side::Left => b.transpose(),
    };
    contract_modes(a, &op, &[k])
}

/// Contracts modes `modes` of `a` with the first half of the order-`2k`
/// tensor `op` and writes its second half back into those positions.
pub fn contract_modes(a: &DenseTensor, op: &DenseTensor, modes: &[usize]) -> Result<DenseTensor> {
    let k = modes.len();
    if op.order() != 2 * k {
        return Err(Error::OrderMismatch {
            expected: 2 * k,
            found: op.order(),
        });
    }
    let mut sorted = modes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != k {
        return Err(Error::InvalidPairing(format!("repeated mode in {modes:?}")));
    }
    // Reorder op's halves so the pairing is increasing on the `a` side.
    let order_idx: Vec<usize> = sorted
        .iter()
        .map(|m| modes.iter().position(|x| x == m).expect("present"))
        .collect();
    let perm: Vec<usize> = order_idx
        .iter()
        .copied()
        .chain(order_idx.iter().map(|&i| i + k))
        .collect();
    let op = op.permute(&perm)?;
    let raw = contract(a, &op, &ModePairing::new(sorted.clone(), (0..k).collect())?)?;
    let d = a.order();
    let free = d - k;
    let mut back = vec![0; d];
    let mut next_free = 0;
    for (m, slot) in back.iter_mut().enumerate() {
        if let Some(pos) = sorted.iter().position(|&s| s == m) {
            *slot = free + pos;
        } else {
            *slot = next_free;
            next_free += 1;
        }
    }
    raw.permute(&back)
}

/// Pairwise identity operator on tensors of shape `dims`: an order-`2d`
/// tensor with entries `prod_k delta(i_k, j_k)`.
pub fn identity_operator(dims: &[usize]) -> Result<DenseTensor> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidShape(dims.to_vec()));
    }
    let d = dims.len();
    let shape: Vec<usize> = dims.iter().chain(dims).copied().collect();
    Ok(DenseTensor::from_fn(&shape, |i| {
        if (0..d).all(|k| i[k] == i[k + d]) {
            1.0
        } else {
            0.0
        }
    }))
}

/// `J_{d;n}`: ones on the main diagonal of an order-`d` hypercube.
pub fn unit_tensor(d: usize, n: usize) -> Result<DenseTensor> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidShape(vec![n; d]));
    }
    Ok(DenseTensor::from_fn(&vec![n; d], |i| {
        if i.iter().all(|&x| x == i[0]) {
            1.0
        } else {
            0.0
        }
    }))
}

pub fn diagonal_part(a: &DenseTensor) -> Result<DenseTensor> {
    if !a.is_hypercube() {
        return Err(Error::NotHypercube(a.shape().to_vec()));
    }
    Ok(DenseTensor::from_fn(a.shape(), |i| {
        if i.iter().all(|&x| x == i[0]) {
            a.get(i)
        } else {
            0.0
        }
    }))
}

/// Commutation operator for `m x n` matrices, `I_n x_ac I_m` (shape
/// `n x m x m x n`), so that `K *_[2] A = A^T`.
pub fn commutation_tensor(m: usize, n: usize) -> Result<DenseTensor> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidShape(vec![m, n]));
    }
    anticross(&DenseTensor::identity(n), &DenseTensor::identity(m))
}

/// `x^m` with entries `x_{i1} ... x_{im}`.
pub fn rank1_symmetric(x: &DenseTensor, m: usize) -> Result<DenseTensor> {
    x.expect_order(1)?;
    if m == 0 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    let mut t = x.clone();
    for _ in 1..m {
        t = outer(&t, x);
    }
    Ok(t)
}

fn swap_perm(d: usize, a: usize, b: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..d).collect();
    p.swap(a, b);
    p
}

/// Invariance under every permutation of the modes (adjacent swaps generate
/// the symmetric group).
pub fn is_symmetric(a: &DenseTensor) -> Result<bool> {
    if !a.is_hypercube() {
        return Err(Error::NotHypercube(a.shape().to_vec()));
    }
    let d = a.order();
    for k in 0..d.saturating_sub(1) {
        if a.permute(&swap_perm(d, k, k + 1))?.max_abs_diff(a) > SYMMETRY_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Invariance under independent permutations of the first and the last
/// half of the modes.
pub fn is_paired_symmetric(a: &DenseTensor) -> Result<bool> {
    let order = a.order();
    if !order.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "paired symmetry needs an even order, got {order}"
        )));
    }
    let d = order / 2;
    let s = a.shape();
    if s[..d].iter().any(|&x| x != s[0]) || s[d..].iter().any(|&x| x != s[d]) {
        return Err(Error::ShapeMismatch(format!(
            "halves of {s:?} are not hypercubes"
        )));
    }
    for k in (0..d.saturating_sub(1)).chain(d..order - 1) {
        if a.permute(&swap_perm(order, k, k + 1))?.max_abs_diff(a) > SYMMETRY_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `a` equals its own diagonal part.
pub fn is_diagonal(a: &DenseTensor) -> Result<bool> {
    Ok(diagonal_part(a)?.max_abs_diff(a) == 0.0)
}

/// Iterates every multi-index of `a` with its value.
pub fn entries(a: &DenseTensor) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
    multi_indices(a.shape()).zip(a.values().iter().copied())
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
    fn outer_small() {
        let a = DenseTensor::vector(vec![1.0, 2.0]);
        let b = DenseTensor::vector(vec![3.0, 4.0]);
        assert_eq!(
            outer(&a, &b),
            DenseTensor::from_rows(&[&[3.0, 4.0], &[6.0, 8.0]])
        );
        let z = outer(&a, &DenseTensor::zeros(&[2, 2]));
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn outer_norm_is_multiplicative() {
        let mut r = rng(2);
        let a = oracle::random_tensor(&mut r, &[2, 3]);
        let b = oracle::random_tensor(&mut r, &[2]);
        let p = outer(&a, &b);
        assert!((p.frobenius_norm() - a.frobenius_norm() * b.frobenius_norm()).abs() < 1e-14);
        assert!(p.max_abs_diff(&oracle::outer_loop(&a, &b)) == 0.0);
    }

    #[test]
    fn partition_binding_follows_block_order() {
        let mut r = rng(3);
        let a = oracle::random_tensor(&mut r, &[2, 3]);
        let b = oracle::random_tensor(&mut r, &[2, 2]);
        let c = oracle::random_tensor(&mut r, &[2, 3, 2, 2]);
        let pi = ModePartition::new(vec![vec![0, 4], vec![1, 5], vec![2, 3, 6, 7]]).unwrap();
        let k = outer_partition(&[&a, &b, &c], &pi).unwrap();
        for (i, v) in entries(&k) {
            let want = a[[i[0], i[4]]] * b[[i[1], i[5]]] * c[[i[2], i[3], i[6], i[7]]];
            assert_eq!(v, want);
        }
    }

    #[test]
    fn cross_and_anticross_definitions() {
        let mut r = rng(4);
        let a = oracle::random_tensor(&mut r, &[2, 3]);
        let b = oracle::random_tensor(&mut r, &[4, 2]);
        let c = cross(&a, &b).unwrap();
        assert_eq!(c.shape(), &[2, 4, 3, 2]);
        for (i, v) in entries(&c) {
            assert_eq!(v, a[[i[0], i[2]]] * b[[i[1], i[3]]]);
        }
        let ac = anticross(&a, &b).unwrap();
        assert_eq!(ac.shape(), &[2, 4, 2, 3]);
        for (i, v) in entries(&ac) {
            assert_eq!(v, a[[i[0], i[3]]] * b[[i[1], i[2]]]);
        }
    }

    #[test]
    fn partition_validation() {
        assert!(ModePartition::new(vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(ModePartition::new(vec![vec![0, 3]]).is_err());
        let a = DenseTensor::identity(2);
        let pi = ModePartition::new(vec![vec![0], vec![1, 2, 3]]).unwrap();
        assert!(outer_partition(&[&a, &a], &pi).is_err());
    }

    #[test]
    fn identity_cross_acts_as_identity() {
        let mut r = rng(5);
        let x = oracle::random_tensor(&mut r, &[2, 2]);
        let id = cross(&DenseTensor::identity(2), &DenseTensor::identity(2)).unwrap();
        assert_eq!(oracle::contract_last_loop(&id, &x, 2), x);
    }

    #[test]
    fn contract_matches_loop() {
        let a = DenseTensor::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let p = contract(
            &a,
            &DenseTensor::identity(2),
            &ModePairing::new(vec![1], vec![0]).unwrap(),
        )
        .unwrap();
        assert_eq!(p, a);
        let mut r = rng(6);
        let a = oracle::random_tensor(&mut r, &[2, 3, 4]);
        let b = oracle::random_tensor(&mut r, &[3, 4, 5]);
        let pairing = ModePairing::new(vec![1, 2], vec![0, 1]).unwrap();
        let c = contract(&a, &b, &pairing).unwrap();
        assert_eq!(c.shape(), &[2, 5]);
        assert!(c.max_abs_diff(&oracle::contract_loop(&a, &b, &pairing)) < 1e-14);
        let full = ModePairing::new(vec![0, 1, 2], vec![0, 1, 2]).unwrap();
        let s = contract(&a, &a, &full).unwrap();
        assert!((s.values()[0] - a.frobenius_norm().powi(2)).abs() < 1e-13);
    }

    #[test]
    fn contract_general_pairing_matches_loop() {
        let mut r = rng(7);
        let a = oracle::random_tensor(&mut r, &[3, 2, 4]);
        let b = oracle::random_tensor(&mut r, &[4, 2, 3]);
        let pairing = ModePairing::new(vec![0, 2], vec![2, 0]).unwrap_err();
        assert!(matches!(pairing, Error::InvalidPairing(_)));
        let pairing = ModePairing::new(vec![1, 2], vec![1, 2]);
        assert!(contract(&a, &b, &pairing.unwrap()).is_err());
        let pairing = ModePairing::new(vec![1], vec![1]).unwrap();
        let c = contract(&a, &b, &pairing).unwrap();
        assert_eq!(c.shape(), &[3, 4, 4, 3]);
        assert!(c.max_abs_diff(&oracle::contract_loop(&a, &b, &pairing)) < 1e-14);
    }

    #[test]
    fn contract_last_matches_loop() {
        let mut r = rng(8);
        let a = oracle::random_tensor(&mut r, &[2, 3, 2, 3]);
        let x = oracle::random_tensor(&mut r, &[2, 3]);
        let got = contract_last(&a, &x, 2).unwrap();
        assert!(got.max_abs_diff(&oracle::contract_last_loop(&a, &x, 2)) < 1e-14);
        for (i, v) in entries(&got) {
            let mut s = 0.0;
            for k in 0..2 {
                for l in 0..3 {
                    s += a[[i[0], i[1], k, l]] * x[[k, l]];
                }
            }
            assert!((v - s).abs() < 1e-14);
        }
        assert!(contract_last(&a, &DenseTensor::zeros(&[3, 2]), 2).is_err());
    }

    #[test]
    fn contract_mode_sides() {
        let mut r = rng(9);
        let a = oracle::random_tensor(&mut r, &[2, 3, 4]);
        for k in 0..3 {
            let id = DenseTensor::identity(a.shape()[k]);
            assert_eq!(contract_mode(&a, &id, k, Side::Right).unwrap(), a);
            assert_eq!(contract_mode(&a, &id, k, Side::Left).unwrap(), a);
        }
        let b = oracle::random_tensor(&mut r, &[3, 5]);
        let got = contract_mode(&a, &b, 1, Side::Right).unwrap();
        assert!(got.max_abs_diff(&oracle::mode_product_loop(&a, &b, 1, Side::Right)) < 1e-14);
        let c = oracle::random_tensor(&mut r, &[5, 4]);
        let got = contract_mode(&a, &c, 2, Side::Left).unwrap();
        assert_eq!(got.shape(), &[2, 3, 5]);
        assert!(got.max_abs_diff(&oracle::mode_product_loop(&a, &c, 2, Side::Left)) < 1e-14);
        let sq = oracle::random_tensor(&mut r, &[3, 3]);
        let right = contract_mode(&a, &sq, 1, Side::Right).unwrap();
        let left = contract_mode(&a, &sq.transpose(), 1, Side::Left).unwrap();
        assert!(right.max_abs_diff(&left) < 1e-15);
        assert!(contract_mode(&a, &c, 0, Side::Right).is_err());
    }

    #[test]
    fn matrix_mode_product_is_transposed_multiply() {
        let mut r = rng(10);
        let a = oracle::random_tensor(&mut r, &[3, 4]);
        let b = oracle::random_tensor(&mut r, &[3, 2]);
        let got = contract_mode(&a, &b, 0, Side::Right).unwrap();
        let want = matmul(&b.transpose(), &a).unwrap();
        assert!(got.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn contract_modes_unsorted_matches_sorted() {
        let mut r = rng(11);
        let a = oracle::random_tensor(&mut r, &[2, 3, 4]);
        let op = oracle::random_tensor(&mut r, &[4, 2, 5, 3]);
        let x = contract_modes(&a, &op, &[2, 0]).unwrap();
        let swapped = op.permute(&[1, 0, 3, 2]).unwrap();
        let y = contract_modes(&a, &swapped, &[0, 2]).unwrap();
        assert_eq!(x.shape(), &[3, 3, 5]);
        assert!(x.max_abs_diff(&y) < 1e-15);
    }

    #[test]
    fn identity_operator_is_two_sided() {
        assert_eq!(identity_operator(&[3]).unwrap(), DenseTensor::identity(3));
        let mut r = rng(12);
        let x = oracle::random_tensor(&mut r, &[3, 4]);
        let id = identity_operator(&[3, 4]).unwrap();
        assert_eq!(contract_last(&id, &x, 2).unwrap(), x);
        let a = oracle::random_tensor(&mut r, &[2, 2, 2]);
        let id3 = identity_operator(&[2, 2, 2]).unwrap();
        assert_eq!(oracle::contract_last_loop(&id3, &a, 3), a);
        assert_eq!(oracle::contract_last_loop(&a, &id3, 3), a);
        assert_eq!(
            id,
            cross(&DenseTensor::identity(3), &DenseTensor::identity(4)).unwrap()
        );
    }

    #[test]
    fn unit_and_diagonal() {
        assert_eq!(unit_tensor(2, 3).unwrap(), DenseTensor::identity(3));
        let j = unit_tensor(3, 2).unwrap();
        assert_eq!(j.values().iter().filter(|&&v| v != 0.0).count(), 2);
        assert_eq!(j[[0, 0, 0]], 1.0);
        assert_eq!(j[[1, 1, 1]], 1.0);
        assert_eq!(
            diagonal_part(&DenseTensor::filled(&[2, 2, 2], 1.0)).unwrap(),
            j
        );
        assert_eq!(diagonal_part(&j).unwrap(), j);
        assert!(diagonal_part(&DenseTensor::zeros(&[2, 3])).is_err());
        let mut r = rng(13);
        let a = oracle::random_tensor(&mut r, &[3, 3]);
        let j4 = unit_tensor(4, 3).unwrap();
        let d = diagonal_part(&a).unwrap();
        assert_eq!(oracle::contract_last_loop(&j4, &a, 2), d);
        assert_eq!(oracle::contract_last_loop(&a, &j4, 2), d);
    }

    #[test]
    fn commutation_transposes() {
        let k = commutation_tensor(2, 2).unwrap();
        let a = DenseTensor::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(contract_last(&k, &a, 2).unwrap(), a.transpose());
        let s = DenseTensor::from_rows(&[&[1.0, 5.0], &[5.0, 2.0]]);
        assert_eq!(contract_last(&k, &s, 2).unwrap(), s);
        let mut r = rng(14);
        let a = oracle::random_tensor(&mut r, &[3, 4]);
        let k = commutation_tensor(3, 4).unwrap();
        assert_eq!(oracle::contract_last_loop(&k, &a, 2), a.transpose());
    }

    #[test]
    fn rank1_entries_and_norm() {
        let e1 = DenseTensor::vector(vec![1.0, 0.0]);
        let t = rank1_symmetric(&e1, 3).unwrap();
        assert_eq!(t.sum(), 1.0);
        assert_eq!(t[[0, 0, 0]], 1.0);
        let ones = rank1_symmetric(&DenseTensor::vector(vec![1.0, 1.0]), 2).unwrap();
        assert_eq!(ones, DenseTensor::filled(&[2, 2], 1.0));
        let mut r = rng(15);
        let x = oracle::random_tensor(&mut r, &[4]);
        let t = rank1_symmetric(&x, 3).unwrap();
        assert!((t.frobenius_norm() - x.frobenius_norm().powi(3)).abs() < 1e-13);
        assert!(is_symmetric(&t).unwrap());
    }

    #[test]
    fn symmetry_predicates() {
        assert!(is_symmetric(&unit_tensor(3, 2).unwrap()).unwrap());
        let mut planted = unit_tensor(3, 2).unwrap();
        planted[[0, 1, 1]] = 0.5;
        assert!(!is_symmetric(&planted).unwrap());
        assert!(is_symmetric(&DenseTensor::zeros(&[2, 3])).is_err());

        let x = DenseTensor::from_rows(&[&[1.0, 2.0, 0.5], &[2.0, -1.0, 3.0], &[0.5, 3.0, 0.0]]);
        let id = DenseTensor::identity(3);
        let xc = &cross(&id, &x).unwrap() + &cross(&x, &id).unwrap();
        let xac = &anticross(&id, &x).unwrap() + &anticross(&x, &id).unwrap();
        assert!(is_paired_symmetric(&(&xc + &xac)).unwrap());
        // each half alone is not invariant under swapping the first pair
        assert!(!is_paired_symmetric(&xc).unwrap());
        assert!(!is_paired_symmetric(&xac).unwrap());
        let nonsym = DenseTensor::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let i2 = DenseTensor::identity(2);
        let bad = &cross(&i2, &nonsym).unwrap() + &cross(&nonsym, &i2).unwrap();
        assert!(!is_paired_symmetric(&bad).unwrap());
        assert!(is_paired_symmetric(&DenseTensor::zeros(&[2, 2, 2])).is_err());
    }

    #[test]
    fn group_unfold_of_cross_is_kronecker_pattern() {
        let mut r = rng(16);
        let b = oracle::random_tensor(&mut r, &[2, 3]);
        let c = oracle::random_tensor(&mut r, &[4, 2]);
        let a = cross(&b, &c).unwrap();
        let m = a.group_unfold(&[0, 1], &[2, 3]).unwrap();
        assert_eq!(m.shape(), &[8, 6]);
        for i in 0..2 {
            for j in 0..4 {
                for k in 0..3 {
                    for l in 0..2 {
                        assert_eq!(m[[i * 4 + j, k * 2 + l]], b[[i, k]] * c[[j, l]]);
                    }
                }
            }
        }
    }
}
