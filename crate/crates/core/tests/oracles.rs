mod common;

use approx::assert_abs_diff_eq;
use common::*;
use ndarray::{array, Array1, Array2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sparse_cca::cca::pair_correlation;
use sparse_cca::{
    correlation_of, seed_pair, solve_cca, solve_on_pattern, true_correlation, wishart_sample, Covariance, DataSet,
    GaussianSampler, SparsityPattern,
};

#[test]
fn sample_covariance_matches_scalar_loops() {
    let truth = random_pd_triple(100, 3, 2);
    let sampler = GaussianSampler::new(&truth);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let data = sampler.sample(&mut rng, 20);
    for center in [false, true] {
        let est = data.estimate_covariance(center);
        let (x, y) = (data.x(), data.y());
        let n_samples = x.nrows();
        let mean = |a: &ndarray::ArrayView2<f64>, c: usize| {
            if center {
                (0..n_samples).map(|r| a[[r, c]]).sum::<f64>() / n_samples as f64
            } else {
                0.0
            }
        };
        let cov = |a: &ndarray::ArrayView2<f64>, i: usize, b: &ndarray::ArrayView2<f64>, j: usize| {
            let (ma, mb) = (mean(a, i), mean(b, j));
            let mut s = 0.0;
            for r in 0..n_samples {
                s += (a[[r, i]] - ma) * (b[[r, j]] - mb);
            }
            s / n_samples as f64
        };
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(est.sigma_x()[[i, j]], cov(&x, i, &x, j), epsilon = 1e-12);
            }
            for j in 0..2 {
                assert_abs_diff_eq!(est.sigma_xy()[[i, j]], cov(&x, i, &y, j), epsilon = 1e-12);
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(est.sigma_y()[[i, j]], cov(&y, i, &y, j), epsilon = 1e-12);
            }
        }
        assert!(est.validate_psd().is_ok());
    }
}

#[test]
fn ridge_shifts_marginal_spectra() {
    let c = wishart_sample::<f64>(31, 5, 5, 10).unwrap();
    let r = c.ridge_regularize(1e-3, 1e-3).unwrap();
    assert_abs_diff_eq!(min_eig(r.sigma_x()) - min_eig(c.sigma_x()), 1e-3, epsilon = 1e-12);
    assert_abs_diff_eq!(min_eig(r.sigma_y()) - min_eig(c.sigma_y()), 1e-3, epsilon = 1e-12);
}

#[test]
fn diagonal_cca_equals_cca_on_diagonal_marginals() {
    for seed in 0..20 {
        let w = wishart_sample::<f64>(seed, 4, 3, 7).unwrap();
        let c = Covariance::new(
            Array2::from_diag(&w.sigma_x().diag()),
            Array2::from_diag(&w.sigma_y().diag()),
            w.sigma_xy().to_owned() * 0.3,
        )
        .unwrap();
        let plain = solve_cca(&c).unwrap().rho;
        let diag = solve_cca(&c.diagonalize_marginals()).unwrap().rho;
        assert_abs_diff_eq!(plain, diag, epsilon = 1e-12);
    }
}

#[test]
fn pls_is_top_singular_value() {
    let c = Covariance::new(Array2::eye(2), Array2::eye(2), array![[0.5, 0.0], [0.0, 0.3]]).unwrap();
    assert_abs_diff_eq!(solve_cca(&c.identity_marginals()).unwrap().rho, 0.5, epsilon = 1e-15);

    let w = wishart_sample::<f64>(3, 6, 4, 30).unwrap();
    let pls = solve_cca(&w.identity_marginals()).unwrap().rho;
    assert_abs_diff_eq!(pls, top_singular_value(&to_na(w.sigma_xy())), epsilon = 1e-10);
}

#[test]
fn pencil_rho_matches_whitened_svd() {
    for seed in 0..20 {
        let c = random_pd_triple(seed, 6, 4);
        let s = solve_cca(&c).unwrap();
        assert_abs_diff_eq!(s.rho, whitened_svd_rho(&c), epsilon = 1e-10);
    }
}

#[test]
fn weights_satisfy_the_pencil() {
    // [0 Σxy; Σxyᵀ 0][a; b] = ρ [Σx 0; 0 Σy][a; b]
    let c = random_pd_triple(44, 5, 3);
    let s = solve_cca(&c).unwrap();
    let lhs_a = c.sigma_xy().dot(&s.b);
    let rhs_a = c.sigma_x().dot(&s.a) * s.rho;
    let lhs_b = c.sigma_xy().t().dot(&s.a);
    let rhs_b = c.sigma_y().dot(&s.b) * s.rho;
    for (p, q) in lhs_a.iter().zip(rhs_a.iter()).chain(lhs_b.iter().zip(rhs_b.iter())) {
        assert_abs_diff_eq!(p, q, epsilon = 1e-10);
    }
}

#[test]
fn seed_pair_matches_double_loop() {
    for seed in 0..20 {
        let c = wishart_sample::<f64>(seed, 7, 7, 14).unwrap();
        let mut best = (0, 0, f64::NEG_INFINITY);
        for i in 0..7 {
            for j in 0..7 {
                let v = c.sigma_xy()[[i, j]].abs() / (c.sigma_x()[[i, i]].sqrt() * c.sigma_y()[[j, j]].sqrt());
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        let (p, s) = seed_pair(&c).unwrap();
        assert_eq!((p.x()[0], p.y()[0]), (best.0, best.1));
        assert_abs_diff_eq!(s.rho, best.2, epsilon = 1e-14);
    }
}

#[test]
fn true_correlation_is_consistent_at_large_n() {
    let truth = random_pd_triple(5, 4, 4);
    let target = solve_cca(&truth).unwrap().rho;
    let sampler = GaussianSampler::new(&truth);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let est = sampler.sample(&mut rng, 1000).estimate_covariance(false);
    let sol = solve_cca(&est).unwrap();
    let scored = true_correlation(&truth, &sol).unwrap();
    assert!((scored - target).abs() < 0.05, "{scored} vs {target}");
    assert!(scored <= target + 1e-12);
}

#[test]
fn true_correlation_embedding() {
    let truth = random_pd_triple(8, 4, 3);
    let p = SparsityPattern::new(vec![1, 3], vec![0, 2]).unwrap();
    let sol = solve_on_pattern(&truth, &p).unwrap();
    let (a, b) = sol.embedded(4, 3);
    assert_eq!(a[0], 0.0);
    assert_eq!(a[1], sol.a[0]);
    assert_eq!(b[2], sol.b[1]);
    assert_abs_diff_eq!(true_correlation(&truth, &sol).unwrap(), sol.rho, epsilon = 1e-10);

    let full = solve_cca(&truth).unwrap();
    assert_eq!(
        true_correlation(&truth, &full).unwrap(),
        correlation_of(&truth, full.a.view(), full.b.view()).unwrap()
    );
}

#[test]
fn gaussian_sampler_reproduces_covariance() {
    let truth = random_pd_triple(77, 2, 2);
    let sampler = GaussianSampler::new(&truth);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data: DataSet<f64> = sampler.sample(&mut rng, 1_000_000);
    let est = data.estimate_covariance(false);
    let (tj, ej) = (truth.joint(), est.joint());
    for (t, e) in tj.iter().zip(ej.iter()) {
        assert!((t - e).abs() < 0.01, "{t} vs {e}");
    }
}

fn pd_triple() -> impl Strategy<Value = Covariance> {
    (any::<u64>(), 1usize..6, 1usize..6).prop_map(|(seed, n, m)| random_pd_triple(seed, n, m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solution_invariants(c in pd_triple()) {
        let s = solve_cca(&c).unwrap();
        prop_assert!(s.rho >= 0.0 && s.rho <= 1.0);
        prop_assert!((s.a.dot(&c.sigma_x().dot(&s.a)) - 1.0).abs() < 1e-10);
        prop_assert!((s.b.dot(&c.sigma_y().dot(&s.b)) - 1.0).abs() < 1e-10);
        prop_assert!((correlation_of(&c, s.a.view(), s.b.view()).unwrap() - s.rho).abs() < 1e-10);
        let first = s.a.iter().find(|w| w.abs() > 1e-12).unwrap();
        prop_assert!(*first > 0.0);
    }

    #[test]
    fn correlation_scale_invariance(c in pd_triple(), sa in 0.1f64..10.0, sb in 0.1f64..10.0) {
        let a = Array1::from_shape_fn(c.n(), |k| (k as f64 + 1.0).sin());
        let b = Array1::from_shape_fn(c.m(), |k| (k as f64 + 2.0).cos());
        let base = correlation_of(&c, a.view(), b.view()).unwrap();
        let scaled = correlation_of(&c, (&a * sa).view(), (&b * -sb).view()).unwrap();
        prop_assert!((scaled + base).abs() < 1e-12);
    }

    #[test]
    fn rho_invariant_under_diagonal_rescaling(c in pd_triple(), scale in 0.2f64..5.0) {
        let d = Array1::from_shape_fn(c.n(), |k| scale.powi(k as i32 % 3));
        let dd = Array2::from_diag(&d);
        let sx = dd.dot(&c.sigma_x()).dot(&dd);
        let sxy = dd.dot(&c.sigma_xy());
        let rescaled = Covariance::new(sx, c.sigma_y().to_owned(), sxy).unwrap();
        let (r0, r1) = (solve_cca(&c).unwrap().rho, solve_cca(&rescaled).unwrap().rho);
        prop_assert!((r0 - r1).abs() < 1e-10);
    }

    #[test]
    fn swapping_roles_swaps_weights(c in pd_triple()) {
        let s = solve_cca(&c).unwrap();
        let t = solve_cca(&c.swapped()).unwrap();
        prop_assert!((s.rho - t.rho).abs() < 1e-10);
        if s.rho > 1e-6 {
            // Up to the joint sign, b of the swapped problem is a of the original.
            let sign = if t.b.dot(&s.a) >= 0.0 { 1.0 } else { -1.0 };
            for (p, q) in t.b.iter().zip(s.a.iter()) {
                prop_assert!((sign * p - q).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn single_pair_closed_form(c in pd_triple()) {
        let p = SparsityPattern::new(vec![0], vec![c.m() - 1]).unwrap();
        let s = solve_on_pattern(&c, &p).unwrap();
        prop_assert!((s.rho - pair_correlation(&c, 0, c.m() - 1)).abs() < 1e-12);
    }

    #[test]
    fn restrict_composes(seed in any::<u64>(), outer_mask in 1u32..256, inner_bits in any::<u32>()) {
        let c = random_pd_triple(seed, 8, 6);
        let ox: Vec<usize> = (0..8).filter(|b| outer_mask & (1 << b) != 0).collect();
        let oy: Vec<usize> = (0..6).filter(|b| (outer_mask >> 2) & (1 << b) != 0 || *b == 0).collect();
        let ix: Vec<usize> = (0..ox.len()).filter(|b| inner_bits & (1 << b) != 0).collect();
        let iy: Vec<usize> = (0..oy.len()).filter(|b| (inner_bits >> 8) & (1 << b) != 0).collect();
        prop_assume!(!ix.is_empty() && !iy.is_empty());
        let outer = SparsityPattern::new(ox, oy).unwrap();
        let inner = SparsityPattern::new(ix, iy).unwrap();
        let twice = c.restrict(&outer).unwrap().restrict(&inner).unwrap();
        let once = c.restrict(&outer.compose(&inner).unwrap()).unwrap();
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn restriction_and_ridge_preserve_psd(c in pd_triple(), eps in 1e-6f64..1.0) {
        let p = SparsityPattern::new(vec![0], vec![0]).unwrap();
        prop_assert!(c.restrict(&p).unwrap().validate_psd().is_ok());
        let zero_marginals = Covariance::new(
            Array2::zeros((c.n(), c.n())), Array2::zeros((c.m(), c.m())), Array2::zeros((c.n(), c.m()))).unwrap();
        let r = zero_marginals.ridge_regularize(eps, eps).unwrap();
        prop_assert!(min_eig(r.sigma_x()) > 0.0 && min_eig(r.sigma_y()) > 0.0);
    }

    #[test]
    fn estimated_covariances_are_psd(seed in any::<u64>(), samples in 1usize..12) {
        let sampler = GaussianSampler::new(&random_pd_triple(seed, 3, 3));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let est = sampler.sample(&mut rng, samples).estimate_covariance(true);
        prop_assert!(est.validate_psd().is_ok());
    }
}
