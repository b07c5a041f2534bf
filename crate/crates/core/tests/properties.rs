use proptest::prelude::*;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use tenscalc::algebra::LinearOperator;
use tenscalc::calculus::{d_power, d_sym_identity, d_sym_square, fd_derivative};
use tenscalc::io;
use tenscalc::linalg::{inverse, matmul, matrix_power};
use tenscalc::ode::{
    balanced_matricization, block_companion, coefficient_tensor, integrate, solve_exact, Method,
};
use tenscalc::oracle;
use tenscalc::products::{
    commutation_tensor, contract, contract_last, contract_mode, cross, identity_operator,
    is_paired_symmetric, is_symmetric, Side,
};
use tenscalc::stability::{lyapunov_tensors, solve_lyapunov};
use tenscalc::tucker::partial_tucker;
use tenscalc::{DenseTensor, ModePairing};

fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

fn shape(max_order: usize, max_dim: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1..=max_dim, 1..=max_order)
}

fn tensor(max_order: usize, max_dim: usize) -> impl Strategy<Value = DenseTensor> {
    shape(max_order, max_dim).prop_flat_map(|s| {
        let n: usize = s.iter().product();
        prop::collection::vec(-1.0f64..1.0, n)
            .prop_map(move |v| DenseTensor::new(s.clone(), v).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn values_match_shape(t in tensor(4, 4)) {
        prop_assert_eq!(t.values().len(), t.shape().iter().product::<usize>());
        prop_assert!(t.shape().iter().all(|&d| d >= 1));
    }

    #[test]
    fn permutation_round_trip(t in tensor(4, 3), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..t.order()).collect();
        perm.shuffle(&mut rng(seed));
        let mut inv = vec![0; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let back = t.permute(&perm).unwrap().permute(&inv).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn vectorize_round_trip(r in 1usize..5, c in 1usize..5, seed in any::<u64>()) {
        let m = oracle::random_tensor(&mut rng(seed), &[r, c]);
        let v = m.vectorize().unwrap();
        prop_assert_eq!(v.values()[1 % (r * c)], m[[1 % r, (1 / r) % c]]);
        prop_assert_eq!(DenseTensor::unvectorize(v.values(), r, c).unwrap(), m);
    }

    #[test]
    fn contraction_matches_loops(seed in any::<u64>(), k in 0usize..3) {
        let mut g = rng(seed);
        let a = oracle::random_tensor(&mut g, &[2, 3, 2]);
        let b = oracle::random_tensor(&mut g, &[3, 2, 4]);
        let pairing = ModePairing::new(vec![1], vec![0]).unwrap();
        let got = contract(&a, &b, &pairing).unwrap();
        prop_assert!(got.max_abs_diff(&oracle::contract_loop(&a, &b, &pairing)) < 1e-13);
        let c = oracle::random_tensor(&mut g, &[[2, 3, 2][k], 3]);
        let side = contract_mode(&a, &c, k, Side::Right).unwrap();
        prop_assert!(side.max_abs_diff(&oracle::mode_product_loop(&a, &c, k, Side::Right)) < 1e-13);
    }

    #[test]
    fn identity_operator_is_neutral(t in tensor(3, 3)) {
        let id = identity_operator(t.shape()).unwrap();
        prop_assert_eq!(contract_last(&id, &t, t.order()).unwrap(), t.clone());
        prop_assert_eq!(contract_last(&t, &id, t.order()).unwrap(), t);
    }

    #[test]
    fn commutation_transposes(m in 1usize..5, n in 1usize..5, seed in any::<u64>()) {
        let a = oracle::random_tensor(&mut rng(seed), &[m, n]);
        prop_assert_eq!(contract_last(&commutation_tensor(m, n).unwrap(), &a, 2).unwrap(), a.transpose());
    }

    #[test]
    fn cross_product_entries(seed in any::<u64>()) {
        let mut g = rng(seed);
        let a = oracle::random_tensor(&mut g, &[2, 3]);
        let b = oracle::random_tensor(&mut g, &[3, 2]);
        let c = cross(&a, &b).unwrap();
        prop_assert_eq!(c.shape(), &[2, 3, 3, 2][..]);
        for (ix, v) in tenscalc::products::entries(&c) {
            prop_assert_eq!(v, a[[ix[0], ix[2]]] * b[[ix[1], ix[3]]]);
        }
    }

    #[test]
    fn operator_product_is_associative(seed in any::<u64>()) {
        let mut g = rng(seed);
        let ops: Vec<LinearOperator> = (0..3)
            .map(|_| LinearOperator::new(oracle::random_tensor(&mut g, &[2, 3, 2, 3])).unwrap())
            .collect();
        let l = ops[0].multiply(&ops[1]).unwrap().multiply(&ops[2]).unwrap();
        let r = ops[0].multiply(&ops[1].multiply(&ops[2]).unwrap()).unwrap();
        prop_assert!(l.tensor().max_abs_diff(r.tensor()) < 1e-12);
    }

    #[test]
    fn balanced_matrix_is_an_algebra_map(seed in any::<u64>()) {
        let mut g = rng(seed);
        let a = LinearOperator::new(oracle::random_tensor(&mut g, &[3, 2, 3, 2])).unwrap();
        let b = LinearOperator::new(oracle::random_tensor(&mut g, &[3, 2, 3, 2])).unwrap();
        let prod = a.multiply(&b).unwrap().balanced_matrix();
        let via = matmul(&a.balanced_matrix(), &b.balanced_matrix()).unwrap();
        prop_assert!(prod.max_abs_diff(&via) < 1e-13);
    }

    #[test]
    fn power_derivative_matches_differences(seed in any::<u64>(), m in 1usize..5) {
        let x = oracle::random_tensor(&mut rng(seed), &[3, 3]);
        let closed = d_power(&x, m).unwrap();
        let fd = fd_derivative(|w| matrix_power(w, m), &x, 1e-5).unwrap();
        prop_assert!((&fd - &closed).frobenius_norm() <= 1e-6 * closed.frobenius_norm().max(1.0));
    }

    #[test]
    fn symmetric_derivatives_are_paired_symmetric(n in 1usize..5, seed in any::<u64>()) {
        let x = oracle::random_symmetric(&mut rng(seed), n);
        prop_assert!(is_paired_symmetric(&d_sym_identity(n)).unwrap());
        prop_assert!(is_paired_symmetric(&d_sym_square(&x).unwrap()).unwrap());
        let assoc = tenscalc::calculus::sym_associated(&x).unwrap();
        prop_assert!(is_symmetric(&assoc.xs).unwrap());
    }

    #[test]
    fn lyapunov_scales_linearly(n in 1usize..5, c in -3.0f64..3.0, seed in any::<u64>()) {
        let a = oracle::random_tensor(&mut rng(seed), &[n, n]);
        let base = lyapunov_tensors(&a).unwrap();
        let scaled = lyapunov_tensors(&a.scale(c)).unwrap();
        prop_assert!(scaled.a_c.max_abs_diff(&base.a_c.scale(c)) < 1e-13);
        prop_assert!(scaled.a_ac.max_abs_diff(&base.a_ac.scale(c)) < 1e-13);
    }

    #[test]
    fn lyapunov_solution_has_small_residual(n in 1usize..5, seed in any::<u64>()) {
        let raw = oracle::random_tensor(&mut rng(seed), &[n, n]);
        let a = &raw - &DenseTensor::identity(n).scale(raw.frobenius_norm() + 0.5);
        let q = DenseTensor::identity(n);
        let p = solve_lyapunov(&a, &q).unwrap();
        let res = &(&matmul(&a.transpose(), &p).unwrap() + &matmul(&p, &a).unwrap()) + &q;
        prop_assert!(res.max_abs() < 1e-10);
        prop_assert!(p.asymmetry() < 1e-10);
    }

    #[test]
    fn tucker_factors_are_orthonormal_and_projection_idempotent(t in tensor(4, 4), seed in any::<u64>()) {
        let mut g = rng(seed);
        let order = t.order();
        let modes: Vec<usize> = (0..order).collect();
        let total: usize = t.shape().iter().product();
        let ranks: Vec<usize> = t
            .shape()
            .iter()
            .map(|&n| rand::Rng::random_range(&mut g, 1..=n.min(total / n)))
            .collect();
        let f = partial_tucker(&t, &modes, &ranks).unwrap();
        prop_assert!(f.orthonormality_error() < 1e-10);
        for (k, &r) in ranks.iter().enumerate() {
            prop_assert_eq!(f.core.shape()[k], r);
        }
        let once = f.reconstruct().unwrap();
        let twice = partial_tucker(&once, &modes, &ranks).unwrap().reconstruct().unwrap();
        prop_assert!(twice.max_abs_diff(&once) < 1e-10);
    }

    #[test]
    fn coefficient_tensor_layout(p in 1usize..4, n in 1usize..4, seed in any::<u64>()) {
        let mut g = rng(seed);
        let mats: Vec<DenseTensor> = (0..n).map(|_| oracle::random_tensor(&mut g, &[p, p])).collect();
        let ct = coefficient_tensor(&mats, p, n).unwrap();
        prop_assert_eq!(balanced_matricization(&ct.tensor).unwrap(), block_companion(&mats).unwrap());
        for i in 0..p {
            for j in 0..n.saturating_sub(1) {
                prop_assert_eq!(ct.tensor[[i, j, i, j + 1]], 1.0);
            }
        }
    }

    #[test]
    fn exact_stepping_matches_closed_form(seed in any::<u64>(), steps in 1usize..20) {
        let mut g = rng(seed);
        let op = LinearOperator::new(oracle::random_tensor(&mut g, &[2, 2, 2, 2]).scale(0.5)).unwrap();
        let x0 = oracle::random_tensor(&mut g, &[2, 2]);
        let traj = integrate(&op, &x0, 0.05, steps, Method::Exact).unwrap();
        prop_assert_eq!(traj.times.len(), traj.states.len());
        let want = solve_exact(&op, &x0, 0.05 * steps as f64).unwrap();
        prop_assert!(traj.last().max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn formats_round_trip(t in tensor(4, 4)) {
        prop_assert_eq!(io::from_json(&io::to_json(&t)).unwrap(), t.clone());
        prop_assert_eq!(io::from_binary(&io::to_binary(&t)).unwrap(), t);
    }

    #[test]
    fn inverse_is_two_sided(n in 1usize..5, seed in any::<u64>()) {
        let raw = oracle::random_tensor(&mut rng(seed), &[n, n]);
        let x = &raw + &DenseTensor::identity(n).scale(n as f64);
        let xi = inverse(&x).unwrap();
        prop_assert!(matmul(&x, &xi).unwrap().max_abs_diff(&DenseTensor::identity(n)) < 1e-12);
        prop_assert!(matmul(&xi, &x).unwrap().max_abs_diff(&DenseTensor::identity(n)) < 1e-12);
    }
}
