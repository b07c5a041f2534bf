//! Model reduction of multi-time linear systems by partial Tucker
//! decomposition of the generator's input state modes followed by Galerkin
//! projection.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::algebra::LinearOperator;
use crate::error::{Error, Result};
use crate::linalg::svd;
use crate::ode::{directional_generator, integrate, Method, MultiTimeSystem, Trajectory};
use crate::oracle;
use crate::products::{contract, contract_mode, ModePairing, Side};
use crate::tensor::DenseTensor;
use crate::tucker::{partial_tucker, reduction_cost, ReductionCost, TuckerFactors};

/// Parameters of a planted low-rank system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantConfig {
    pub seed: u64,
    pub t_shape: Vec<usize>,
    /// Dimension of each state mode; the state is `n x n`.
    pub n: usize,
    pub ranks: Vec<usize>,
    /// Fraction of nonzero entries in the core.
    pub density: f64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            t_shape: vec![6, 6],
            n: 6,
            ranks: vec![3, 3],
            density: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSystem {
    pub generator: DenseTensor,
    /// Orthonormal `n x r_k` bases planted on both state groups.
    pub bases: Vec<DenseTensor>,
    pub core: DenseTensor,
    /// Initial state inside the planted subspace.
    pub x0: DenseTensor,
    /// Unit-norm direction in time space.
    pub direction: DenseTensor,
}

/// `n x k` matrix with orthonormal columns from the SVD of a Gaussian draw.
pub fn random_orthonormal<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Result<DenseTensor> {
    let g = oracle::gaussian_tensor(rng, &[n, k]);
    let s = svd(&g)?;
    Ok(DenseTensor::from_fn(&[n, k], |i| s.u[[i[0], i[1]]]))
}

fn sparse_gaussian<R: Rng + ?Sized>(rng: &mut R, shape: &[usize], density: f64) -> DenseTensor {
    DenseTensor::from_fn(shape, |_| {
        let keep = rng.random::<f64>() < density;
        let v: f64 = rng.sample(StandardNormal);
        if keep {
            v
        } else {
            0.0
        }
    })
}

pub fn unit_direction<R: Rng + ?Sized>(rng: &mut R, shape: &[usize]) -> DenseTensor {
    let d = oracle::gaussian_tensor(rng, shape);
    let norm = d.frobenius_norm();
    d.scale(1.0 / norm)
}

/// Generator `C` with both state groups expanded by the planted bases:
/// `A = C x (U_1, ..., U_q) on outputs x (U_1, ..., U_q) on inputs`.
pub fn planted_system(cfg: &PlantConfig) -> Result<PlantedSystem> {
    if cfg.ranks.len() != 2 || cfg.ranks.iter().any(|&r| r == 0 || r > cfg.n) {
        return Err(Error::InvalidArgument(format!(
            "need two ranks in 1..={}, got {:?}",
            cfg.n, cfg.ranks
        )));
    }
    if !(cfg.density > 0.0 && cfg.density <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "density {} outside (0, 1]",
            cfg.density
        )));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(cfg.seed);
    let bases = cfg
        .ranks
        .iter()
        .map(|&r| random_orthonormal(&mut rng, cfg.n, r))
        .collect::<Result<Vec<_>>>()?;
    let p = cfg.t_shape.len();
    let mut core_shape = cfg.t_shape.clone();
    core_shape.extend(&cfg.ranks);
    core_shape.extend(&cfg.ranks);
    let core = sparse_gaussian(&mut rng, &core_shape, cfg.density);
    let mut generator = core.clone();
    for (k, u) in bases.iter().enumerate() {
        generator = contract_mode(&generator, u, p + k, Side::Left)?;
        generator = contract_mode(&generator, u, p + 2 + k, Side::Left)?;
    }
    let c0 = oracle::gaussian_tensor(&mut rng, &cfg.ranks);
    let x0 = lift(&c0, &bases)?;
    let direction = unit_direction(&mut rng, &cfg.t_shape);
    Ok(PlantedSystem {
        generator,
        bases,
        core,
        x0,
        direction,
    })
}

/// `U_1^T X U_2` generalised to every mode.
pub fn project(x: &DenseTensor, bases: &[DenseTensor]) -> Result<DenseTensor> {
    bases.iter().enumerate().try_fold(x.clone(), |acc, (k, u)| {
        contract_mode(&acc, u, k, Side::Right)
    })
}

/// `U_1 X U_2^T` generalised to every mode.
pub fn lift(x: &DenseTensor, bases: &[DenseTensor]) -> Result<DenseTensor> {
    bases.iter().enumerate().try_fold(x.clone(), |acc, (k, u)| {
        contract_mode(&acc, u, k, Side::Left)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    pub step: f64,
    pub steps: usize,
    /// Each integration is repeated this many times and the fastest run kept.
    pub timing_repeats: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Euler,
            step: 1e-3,
            steps: 1000,
            timing_repeats: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReductionOutcome {
    pub full: Trajectory,
    pub reduced: Trajectory,
    /// Reduced states mapped back to the full space.
    pub lifted: Vec<DenseTensor>,
    pub factors: TuckerFactors,
    pub reduced_operator: DenseTensor,
    /// Largest Frobenius distance between lifted and full states.
    pub error_fro: f64,
    /// `error_fro` over the largest full-state norm.
    pub error_rel: f64,
    pub cost: ReductionCost,
    pub wall_ms_full: f64,
    pub wall_ms_reduced: f64,
    pub wall_ms_decomposition: f64,
}

impl ReductionOutcome {
    pub fn speedup(&self) -> f64 {
        self.wall_ms_full / self.wall_ms_reduced
    }
}

fn timed<T>(repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let value = f()?;
        best = best.min(start.elapsed().as_secs_f64() * 1e3);
        out = Some(value);
    }
    Ok((out.expect("at least one run"), best))
}

/// Decomposes the trailing state modes of `generator`, projects the
/// directional operator onto the factor subspaces on both sides, integrates
/// full and reduced systems with identical steps and compares them.
pub fn reduce_and_solve(
    generator: &DenseTensor,
    x0: &DenseTensor,
    direction: &DenseTensor,
    ranks: &[usize],
    solver: &SolverConfig,
) -> Result<ReductionOutcome> {
    let q = x0.order();
    if generator.order() <= 2 * q {
        return Err(Error::ShapeMismatch(format!(
            "generator {:?} has no time modes for state {:?}",
            generator.shape(),
            x0.shape()
        )));
    }
    let p = generator.order() - 2 * q;
    let sys = MultiTimeSystem::new(generator.clone(), p)?;
    if sys.x_shape != x0.shape() {
        return Err(Error::ShapeMismatch(format!(
            "generator state shape {:?}, initial state {:?}",
            sys.x_shape,
            x0.shape()
        )));
    }
    let modes: Vec<usize> = (p + q..p + 2 * q).collect();

    let start = Instant::now();
    let factors = partial_tucker(generator, &modes, ranks)?;
    let wall_ms_decomposition = start.elapsed().as_secs_f64() * 1e3;

    let full_op = directional_generator(&sys, direction)?;
    let half = galerkin_operator(&factors.core, direction, &factors.factors)?;
    let x0_reduced = project(x0, &factors.factors)?;

    let (full, wall_ms_full) = timed(solver.timing_repeats, || {
        integrate(&full_op, x0, solver.step, solver.steps, solver.method)
    })?;
    let (reduced, wall_ms_reduced) = timed(solver.timing_repeats, || {
        integrate(&half, &x0_reduced, solver.step, solver.steps, solver.method)
    })?;

    let lifted = reduced
        .states
        .iter()
        .map(|x| lift(x, &factors.factors))
        .collect::<Result<Vec<_>>>()?;
    let mut error_fro: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (a, b) in full.states.iter().zip(&lifted) {
        error_fro = error_fro.max((a - b).frobenius_norm());
        scale = scale.max(a.frobenius_norm());
    }
    let error_rel = if scale > 0.0 {
        error_fro / scale
    } else {
        error_fro
    };
    let cost = reduction_cost(generator.shape(), &modes, ranks)?;
    Ok(ReductionOutcome {
        full,
        reduced,
        lifted,
        factors,
        reduced_operator: half.into_tensor(),
        error_fro,
        error_rel,
        cost,
        wall_ms_full,
        wall_ms_reduced,
        wall_ms_decomposition,
    })
}

/// Directional operator of a core whose input state modes are already
/// reduced, with its output state modes projected onto the same bases.
pub fn galerkin_operator(
    core: &DenseTensor,
    direction: &DenseTensor,
    bases: &[DenseTensor],
) -> Result<LinearOperator> {
    let p = direction.order();
    let pairing = ModePairing::new((0..p).collect(), (0..p).collect())?;
    let mut g = contract(direction, core, &pairing)?;
    for (k, u) in bases.iter().enumerate() {
        g = contract_mode(&g, u, k, Side::Right)?;
    }
    LinearOperator::new(g)
}

/// Trajectory error for each rank pair `(r, r)`, `r = 1..=max_rank`.
pub fn rank_sweep(
    generator: &DenseTensor,
    x0: &DenseTensor,
    direction: &DenseTensor,
    max_rank: usize,
    solver: &SolverConfig,
) -> Result<Vec<(usize, f64)>> {
    let quiet = SolverConfig {
        timing_repeats: 1,
        ..*solver
    };
    (1..=max_rank)
        .map(|r| {
            let ranks = vec![r; x0.order()];
            reduce_and_solve(generator, x0, direction, &ranks, &quiet).map(|o| (r, o.error_fro))
        })
        .collect()
}
