//! Partial and full Tucker decompositions from SVDs of mode unfoldings.
//!
//! Factors are stored `n_k x r_k` with orthonormal columns; the core is the
//! tensor with each decomposed mode `k` contracted against `U_k`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{orthonormality_error, svd};
use crate::products::{contract_mode, Side};
use crate::tensor::DenseTensor;

pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct TuckerFactors {
    pub core: DenseTensor,
    /// Decomposed modes, strictly increasing.
    pub mode_set: Vec<usize>,
    /// `U_k` for each mode in `mode_set`, in the same order.
    pub factors: Vec<DenseTensor>,
    pub ranks: Vec<usize>,
    /// Singular values of each decomposed unfolding, descending.
    pub singular_values: Vec<Vec<f64>>,
}

impl TuckerFactors {
    pub fn reconstruct(&self) -> Result<DenseTensor> {
        tucker_reconstruct(self)
    }

    /// Largest `|U_k^T U_k - I|` entry over all factors.
    pub fn orthonormality_error(&self) -> f64 {
        self.factors
            .iter()
            .map(orthonormality_error)
            .fold(0.0, f64::max)
    }

    pub fn factor(&self, mode: usize) -> Option<&DenseTensor> {
        self.mode_set
            .iter()
            .position(|&m| m == mode)
            .map(|i| &self.factors[i])
    }

    /// Root-sum-square of the singular values discarded at each mode.
    pub fn discarded_energy(&self) -> f64 {
        self.singular_values
            .iter()
            .zip(&self.ranks)
            .map(|(s, &r)| s[r.min(s.len())..].iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }
}

fn validate_modes(a: &DenseTensor, modes: &[usize], ranks: &[usize]) -> Result<()> {
    if modes.len() != ranks.len() {
        return Err(Error::InvalidArgument(format!(
            "{} modes but {} ranks",
            modes.len(),
            ranks.len()
        )));
    }
    if modes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "mode set {modes:?} must be strictly increasing"
        )));
    }
    for (&m, &r) in modes.iter().zip(ranks) {
        if m >= a.order() {
            return Err(Error::ModeOutOfRange {
                mode: m,
                order: a.order(),
            });
        }
        let dim = a.shape()[m];
        if r == 0 || r > dim {
            return Err(Error::RankTooLarge {
                mode: m,
                rank: r,
                dim,
            });
        }
    }
    Ok(())
}

/// Leading `r` left singular vectors of a matrix.
fn leading_left_vectors(m: &DenseTensor, r: usize) -> Result<(DenseTensor, Vec<f64>)> {
    let s = svd(m)?;
    if r > s.u.cols() {
        return Err(Error::InvalidArgument(format!(
            "rank {r} exceeds the {} available singular vectors",
            s.u.cols()
        )));
    }
    let u = DenseTensor::from_fn(&[m.rows(), r], |i| s.u[[i[0], i[1]]]);
    Ok((u, s.s))
}

/// Decomposes the modes in `modes` (0-based) with the given ranks.
pub fn partial_tucker(a: &DenseTensor, modes: &[usize], ranks: &[usize]) -> Result<TuckerFactors> {
    validate_modes(a, modes, ranks)?;
    let mut factors = Vec::with_capacity(modes.len());
    let mut singular_values = Vec::with_capacity(modes.len());
    for (&m, &r) in modes.iter().zip(ranks) {
        let (u, s) = leading_left_vectors(&a.unfold(m)?, r)?;
        factors.push(u);
        singular_values.push(s);
    }
    let mut core = a.clone();
    for (&m, u) in modes.iter().zip(&factors) {
        core = contract_mode(&core, u, m, Side::Right)?;
    }
    Ok(TuckerFactors {
        core,
        mode_set: modes.to_vec(),
        factors,
        ranks: ranks.to_vec(),
        singular_values,
    })
}

/// Decomposition of every mode.
pub fn full_tucker(a: &DenseTensor, ranks: &[usize]) -> Result<TuckerFactors> {
    let modes: Vec<usize> = (0..a.order()).collect();
    partial_tucker(a, &modes, ranks)
}

pub fn tucker_reconstruct(f: &TuckerFactors) -> Result<DenseTensor> {
    if f.mode_set.len() != f.factors.len() {
        return Err(Error::InvalidArgument(
            "one factor per decomposed mode".into(),
        ));
    }
    let mut out = f.core.clone();
    for (&m, u) in f.mode_set.iter().zip(&f.factors) {
        if m >= out.order() || u.cols() != out.shape()[m] {
            return Err(Error::ShapeMismatch(format!(
                "factor {:?} does not fit mode {m} of core {:?}",
                u.shape(),
                out.shape()
            )));
        }
        out = contract_mode(&out, u, m, Side::Left)?;
    }
    Ok(out)
}

/// Per mode, the number of singular values of the unfolding above
/// `tol * sigma_max`.
pub fn tucker_rank(a: &DenseTensor, tol: f64) -> Result<Vec<usize>> {
    if tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    (0..a.order())
        .map(|m| {
            let s = svd(&a.unfold(m)?)?.s;
            let smax = s.first().copied().unwrap_or(0.0);
            Ok(s.iter().filter(|&&x| x > tol * smax).count())
        })
        .collect()
}

/// Storage and per-step cost of applying an operator before and after
/// reducing the modes in `modes`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionCost {
    pub full_elements: usize,
    pub core_elements: usize,
    /// `2 * rows * cols` of the matricized full operator.
    pub flops_full: usize,
    pub flops_reduced: usize,
    pub ratio: f64,
}

pub fn reduction_cost(shape: &[usize], modes: &[usize], ranks: &[usize]) -> Result<ReductionCost> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::InvalidShape(shape.to_vec()));
    }
    if modes.len() != ranks.len() {
        return Err(Error::InvalidArgument("one rank per mode".into()));
    }
    for (&m, &r) in modes.iter().zip(ranks) {
        let dim = *shape.get(m).ok_or(Error::ModeOutOfRange {
            mode: m,
            order: shape.len(),
        })?;
        if r == 0 || r > dim {
            return Err(Error::RankTooLarge {
                mode: m,
                rank: r,
                dim,
            });
        }
    }
    let full_elements: usize = shape.iter().product();
    let rows: usize = (0..shape.len())
        .filter(|k| !modes.contains(k))
        .map(|k| shape[k])
        .product();
    let cols_full: usize = modes.iter().map(|&m| shape[m]).product();
    let cols_reduced: usize = ranks.iter().product();
    let flops_full = 2 * rows * cols_full;
    let flops_reduced = 2 * rows * cols_reduced;
    Ok(ReductionCost {
        full_elements,
        core_elements: rows * cols_reduced,
        flops_full,
        flops_reduced,
        ratio: flops_full as f64 / flops_reduced as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::products::{outer, unit_tensor};
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn rng(seed: u64) -> Xoshiro256PlusPlus {
        Xoshiro256PlusPlus::seed_from_u64(seed)
    }

    fn orthonormal(r: &mut Xoshiro256PlusPlus, n: usize, k: usize) -> DenseTensor {
        let g = oracle::random_tensor(r, &[n, k]);
        let s = svd(&g).unwrap();
        DenseTensor::from_fn(&[n, k], |i| s.u[[i[0], i[1]]])
    }

    #[test]
    fn rank_one_mode() {
        let mut r = rng(1);
        let x = oracle::random_tensor(&mut r, &[3]);
        let rest = oracle::random_tensor(&mut r, &[2, 4]);
        let a = outer(&x, &rest);
        let f = partial_tucker(&a, &[0], &[1]).unwrap();
        assert_eq!(f.core.shape(), &[1, 2, 4]);
        assert!(f.reconstruct().unwrap().max_abs_diff(&a) < 1e-12 * a.frobenius_norm());
    }

    #[test]
    fn full_rank_hosvd_is_exact() {
        let mut r = rng(2);
        let a = oracle::random_tensor(&mut r, &[3, 4, 2]);
        let f = full_tucker(&a, &[3, 4, 2]).unwrap();
        assert!(f.reconstruct().unwrap().max_abs_diff(&a) < 1e-12);
        assert!(f.orthonormality_error() < 1e-12);
    }

    #[test]
    fn planted_structure_recovered() {
        let mut r = rng(3);
        let g = oracle::random_tensor(&mut r, &[4, 4, 3, 3]);
        let u = orthonormal(&mut r, 5, 3);
        let v = orthonormal(&mut r, 6, 3);
        let a = contract_mode(
            &contract_mode(&g, &u, 2, Side::Left).unwrap(),
            &v,
            3,
            Side::Left,
        )
        .unwrap();
        assert_eq!(&tucker_rank(&a, DEFAULT_RANK_TOL).unwrap()[2..], &[3, 3]);
        let f = partial_tucker(&a, &[2, 3], &[3, 3]).unwrap();
        assert!(f.reconstruct().unwrap().max_abs_diff(&a) < 1e-10 * a.frobenius_norm());
        let again = partial_tucker(&f.reconstruct().unwrap(), &[2, 3], &[3, 3]).unwrap();
        assert!(again.reconstruct().unwrap().max_abs_diff(&a) < 1e-10 * a.frobenius_norm());
    }

    #[test]
    fn truncation_tracks_discarded_energy() {
        let mut r = rng(4);
        let a = oracle::random_tensor(&mut r, &[4, 5, 6]);
        let f = partial_tucker(&a, &[1, 2], &[3, 4]).unwrap();
        let err = (&f.reconstruct().unwrap() - &a).frobenius_norm();
        let tail = f.discarded_energy();
        assert!(err <= tail * (1.0 + 1e-12));
        assert!(err >= tail / 2.0);
    }

    #[test]
    fn ranks_of_simple_tensors() {
        assert_eq!(
            tucker_rank(&unit_tensor(3, 2).unwrap(), DEFAULT_RANK_TOL).unwrap(),
            vec![2, 2, 2]
        );
        let x = DenseTensor::vector(vec![1.0, 2.0]);
        let y = DenseTensor::vector(vec![0.5, -1.0, 3.0]);
        let t = outer(&outer(&x, &y), &x);
        assert_eq!(tucker_rank(&t, DEFAULT_RANK_TOL).unwrap(), vec![1, 1, 1]);
    }

    #[test]
    fn empty_mode_set_is_identity() {
        let a = DenseTensor::identity(3);
        let f = partial_tucker(&a, &[], &[]).unwrap();
        assert_eq!(tucker_reconstruct(&f).unwrap(), a);
    }

    #[test]
    fn validation() {
        let a = DenseTensor::zeros(&[2, 3]);
        assert!(matches!(
            partial_tucker(&a, &[1], &[4]),
            Err(Error::RankTooLarge {
                mode: 1,
                rank: 4,
                dim: 3
            })
        ));
        assert!(partial_tucker(&a, &[1, 0], &[1, 1]).is_err());
        assert!(partial_tucker(&a, &[2], &[1]).is_err());
    }

    #[test]
    fn cost_accounting() {
        let c = reduction_cost(&[6; 6], &[4, 5], &[3, 3]).unwrap();
        assert_eq!(c.full_elements, 46656);
        assert_eq!(c.core_elements, 11664);
        assert_eq!(c.flops_full, 2 * 1296 * 36);
        assert_eq!(c.flops_reduced, 2 * 1296 * 9);
        assert_eq!(c.ratio, 4.0);
        assert_eq!(
            reduction_cost(&[6; 6], &[4, 5], &[6, 6]).unwrap().ratio,
            1.0
        );
        assert!(reduction_cost(&[6; 6], &[4, 5], &[7, 3]).is_err());
    }
}
