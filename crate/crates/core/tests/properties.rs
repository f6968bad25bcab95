use proptest::prelude::*;

use opcalc_core::calculus::{build_cache, exp_xq, s_kernel, t_of, SpectralPoint};
use opcalc_core::data::DataGenerator;
use opcalc_core::matfun::{eigh_real_symmetric, expm, inverse, opnorm2, sqrtm_principal, ComplexMatrix, C64};
use opcalc_core::operators::{caputo_h, dirichlet_laplacian_1d, sector_bound_probe, wentzell_h};
use opcalc_core::oracle::svd_full;
use opcalc_core::solver::{solve_robin, RobinProblem};

fn matrix(n: usize, parts: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| {
        C64::new(parts[2 * (i * n + j)], parts[2 * (i * n + j) + 1])
    })
}

fn random_matrix(max_n: usize, scale: f64) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max_n).prop_flat_map(move |n| prop::collection::vec(-scale..scale, 2 * n * n).prop_map(move |v| matrix(n, &v)))
}

/// Diagonally dominant with diagonal in the right half plane: spectrum
/// stays off the negative real axis.
fn off_cut_matrix(max_n: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max_n, 0.1f64..10.0).prop_flat_map(|(n, shift)| {
        prop::collection::vec(-1.0f64..1.0, 2 * n * n).prop_map(move |v| {
            let off = matrix(n, &v).scale_real(0.5 / n as f64);
            off.shift(C64::new(shift + 0.5, 0.0))
        })
    })
}

fn lambda_in_sector() -> impl Strategy<Value = C64> {
    (0.0f64..4.0, -2.0f64..2.0).prop_map(|(lm, arg)| C64::from_polar(10f64.powf(lm), arg))
}

fn rel(a: &ComplexMatrix, b: &ComplexMatrix, scale: f64) -> f64 {
    (a - b).norm_fro() / scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sqrtm_squares_back(m in off_cut_matrix(12)) {
        let s = sqrtm_principal(&m).unwrap();
        prop_assert!(rel(&(&s * &s), &m, m.norm_fro()) <= 1e-10);
    }

    #[test]
    fn expm_semigroup(m in random_matrix(8, 1.0), x in 0.0f64..2.0, y in 0.0f64..2.0) {
        let exy = expm(&m.scale_real(x + y)).unwrap();
        let prod = &expm(&m.scale_real(x)).unwrap() * &expm(&m.scale_real(y)).unwrap();
        prop_assert!(rel(&prod, &exy, exy.norm_fro()) <= 1e-8);
    }

    #[test]
    fn functions_commute_with_polynomials(m in off_cut_matrix(10), c1 in -2.0f64..2.0, c2 in -2.0f64..2.0) {
        let eye = ComplexMatrix::identity(m.rows());
        let p = &(&(&m * &m) + &m.scale_real(c1)) + &eye.scale_real(c2);
        let scale = p.norm_fro() * m.norm_fro().max(1.0);
        for f in [sqrtm_principal(&m).unwrap(), expm(&m.scale_real(0.1)).unwrap()] {
            let comm = &(&f * &p) - &(&p * &f);
            prop_assert!(comm.norm_fro() <= 1e-9 * scale * f.norm_fro().max(1.0));
        }
    }

    #[test]
    fn opnorm_matches_svd(m in random_matrix(24, 3.0)) {
        let top = svd_full(&m).unwrap().into_iter().fold(0.0, f64::max);
        let got = opnorm2(&m).unwrap();
        prop_assert!((got - top).abs() <= 1e-9 * top.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn laplacian_symmetric_negative_definite(n in 2usize..=256) {
        let a = dirichlet_laplacian_1d(n);
        prop_assert_eq!(a.symmetry_defect(), 0.0);
        let (vals, _) = eigh_real_symmetric(&a).unwrap();
        prop_assert!(vals.iter().all(|v| *v < 0.0));
    }

    #[test]
    fn caputo_kills_constants(m in 2usize..40, nu in 0.05f64..0.95, c in -5.0f64..5.0) {
        let h = caputo_h(m, nu, 1.0 / (m - 1) as f64).unwrap();
        let v = h.mul_vec(&vec![C64::new(c, 0.0); m]);
        // zero up to rounding in the row sums
        let tol = 1e-12 * h.norm_max() * c.abs();
        prop_assert!(v.iter().all(|z| z.norm() <= tol));
    }

    #[test]
    fn sector_probe_monotone(raw in prop::collection::vec((0.0f64..4.0, -2.3f64..2.3), 2..12), cut in 1usize..12) {
        let a = dirichlet_laplacian_1d(8);
        let samples: Vec<C64> = raw.iter().map(|&(lm, arg)| C64::from_polar(10f64.powf(lm), arg)).collect();
        let cut = cut.min(samples.len());
        let phi = 0.75 * std::f64::consts::PI;
        let small = sector_bound_probe(&a, phi, &samples[..cut]).unwrap().constant_estimate;
        let big = sector_bound_probe(&a, phi, &samples).unwrap().constant_estimate;
        prop_assert!(big >= small);
    }

    #[test]
    fn cache_identities(lambda in lambda_in_sector(), n in 2usize..12) {
        let a = dirichlet_laplacian_1d(n);
        let cache = build_cache(&a, &wentzell_h(&a), SpectralPoint::new(lambda, C64::new(0.0, 0.0))).unwrap();
        let q = cache.q_lambda();
        let scale = a.norm_fro() + lambda.norm();
        let resid = (&(q * q) + &a).shift(-lambda);
        prop_assert!(resid.norm_fro() <= 1e-10 * scale);
        let eye = ComplexMatrix::identity(n);
        prop_assert!(rel(&s_kernel(&cache, 0.0).unwrap(), &eye, 1.0) <= 1e-10);
        prop_assert!(s_kernel(&cache, 1.0).unwrap().norm_fro() <= 1e-10);
        for (x, y) in [(0.25, 0.25), (0.25, 0.5), (0.5, 0.5)] {
            let whole = exp_xq(&cache, x + y).unwrap();
            let prod = &exp_xq(&cache, x).unwrap() * &exp_xq(&cache, y).unwrap();
            prop_assert!(rel(&prod, &whole, whole.norm_fro().max(1e-300)) <= 1e-8 || (&prod - &whole).norm_fro() <= 1e-14);
        }
    }

    #[test]
    fn t_lambda_commutes(lambda in lambda_in_sector(), shift in 0.0f64..100.0) {
        let a = dirichlet_laplacian_1d(10);
        let t = t_of(&a, lambda).unwrap();
        let root = sqrtm_principal(&(-&a).shift(C64::new(shift, 0.0))).unwrap();
        let r = inverse(&root).unwrap();
        let comm = &(&t * &r) - &(&r * &t);
        prop_assert!(comm.norm_fro() <= 1e-9 * t.norm_fro().max(1.0) * r.norm_fro());
    }

    #[test]
    fn robin_boundary_exactness(lambda in lambda_in_sector(), seed in 0u64..1000) {
        let n = 6;
        let nx = 65;
        let a = dirichlet_laplacian_1d(n);
        let mut g = DataGenerator::new(seed);
        let problem = RobinProblem {
            h: wentzell_h(&a),
            a,
            point: SpectralPoint::new(lambda, lambda),
            f_samples: g.smooth_profile(nx, n),
            d0: g.smooth_vector(n),
            u1: g.smooth_vector(n),
            p: 2.0,
            nx,
            norm_weight: 1.0,
        };
        let u1_norm = problem.u1.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let prof = solve_robin(&problem).unwrap();
        prop_assert!(prof.residual_dirichlet_end <= 1e-9 * (1.0 + u1_norm));
        prop_assert!(prof.residual_robin <= 1e-7 * prof.boundary_scale);
    }
}
