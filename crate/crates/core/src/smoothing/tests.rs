use alloc::vec;
use alloc::vec::Vec;

use approx::assert_relative_eq;
use proptest::prelude::*;

use super::*;
use crate::corpus::{self, ObjectiveSpec};
use crate::linalg;

fn cube(r: f64, n: usize) -> AveragingDomain {
    AveragingDomain::new(DomainShape::Cube, r, n).unwrap()
}

fn ball(r: f64, n: usize) -> AveragingDomain {
    AveragingDomain::new(DomainShape::Ball, r, n).unwrap()
}

fn cfg(method: EstimatorMethod) -> EstimatorConfig {
    EstimatorConfig {
        method,
        outer_samples: 2048,
        inner_samples: 2048,
        quadrature_points_per_axis: 128,
        fd_step_factor: 0.1,
        seed: 7,
    }
}

fn constant_spec(c: f64, dim: usize) -> ObjectiveSpec {
    ObjectiveSpec::builder("const", dim)
        .lipschitz_const(1.0)
        .value(move |_| c)
        .subgradient(|_, g| g.fill(0.0))
        .minimizer(vec![0.0; dim], c)
        .build()
        .unwrap()
}

fn affine_spec(a: Vec<f64>, b: f64) -> ObjectiveSpec {
    let dim = a.len();
    let a_val = a.clone();
    let a_grad = a.clone();
    let l = linalg::norm(&a) + 1e-9;
    ObjectiveSpec::builder("affine", dim)
        .lipschitz_const(l)
        .value(move |x| linalg::dot(&a_val, x) + b)
        .subgradient(move |_, g| g.copy_from_slice(&a_grad))
        .minimizer(vec![0.0; dim], b)
        .convex(true)
        .build()
        .unwrap()
}

// --- measure / diameter / constants -----------------------------------------

#[test]
fn measure_of_cubes_and_balls() {
    assert_relative_eq!(cube(1.0, 1).measure(), 2.0);
    assert_relative_eq!(cube(0.5, 3).measure(), 1.0);
    assert_relative_eq!(ball(1.0, 2).measure(), math::PI);
    // higher-dimensional sanity: V_3 = 4/3 pi r^3, V_4 = pi^2 r^4 / 2
    assert_relative_eq!(
        ball(2.0, 3).measure(),
        4.0 / 3.0 * math::PI * 8.0,
        max_relative = 1e-14
    );
    assert_relative_eq!(
        ball(1.0, 4).measure(),
        math::PI * math::PI / 2.0,
        max_relative = 1e-14
    );
}

#[test]
fn diameter_of_cubes_and_balls() {
    assert_relative_eq!(ball(1.0, 3).diameter(), 2.0);
    assert_relative_eq!(cube(1.0, 4).diameter(), 4.0);
    assert_relative_eq!(ball(0.25, 2).diameter(), 0.5);
}

#[test]
fn smoothing_constants_match_their_formulas() {
    assert_relative_eq!(hessian_lipschitz_constant(&ball(1.0, 2), 1.0), 0.5);
    assert_relative_eq!(hessian_lipschitz_constant(&ball(1.0, 2), 2.0), 1.0);
    assert_relative_eq!(hessian_lipschitz_constant(&ball(0.5, 2), 1.0), 2.0);
    assert_relative_eq!(gradient_norm_bound_constant(&ball(0.5, 3), 1.0), 1.0);
    assert_relative_eq!(gradient_norm_bound_constant(&ball(0.25, 3), 1.0), 2.0);
    assert_relative_eq!(gradient_norm_bound_constant(&cube(0.5, 4), 3.0), 1.5);
}

#[test]
fn invalid_domains_are_rejected() {
    assert!(AveragingDomain::new(DomainShape::Ball, 0.0, 2).is_err());
    assert!(AveragingDomain::new(DomainShape::Cube, -1.0, 2).is_err());
    assert!(AveragingDomain::new(DomainShape::Cube, 1.0, 0).is_err());
}

// --- single averaging --------------------------------------------------------

#[test]
fn constants_are_reproduced_exactly_by_all_methods() {
    let spec = constant_spec(3.25, 2);
    let d = cube(0.7, 2);
    for method in [EstimatorMethod::Quadrature, EstimatorMethod::MonteCarlo] {
        let v = single_average_value(&spec, &d, &[0.4, -0.1], &cfg(method)).unwrap();
        assert_relative_eq!(v.value().unwrap(), 3.25, epsilon = 1e-12);
        let w = double_average_value(&spec, &d, &[0.4, -0.1], &cfg(method)).unwrap();
        assert_relative_eq!(w.value().unwrap(), 3.25, epsilon = 1e-12);
    }
    let b = ball(0.7, 2);
    let v =
        single_average_value(&spec, &b, &[0.0, 0.0], &cfg(EstimatorMethod::Quadrature)).unwrap();
    assert_relative_eq!(v.value().unwrap(), 3.25, epsilon = 1e-12);
}

#[test]
fn affine_functions_pass_through_the_averaging() {
    let spec = affine_spec(vec![2.0, -1.0], 0.5);
    let x = [0.3, 0.8];
    let expected = spec.evaluate(&x).unwrap();
    for domain in [cube(0.6, 2), ball(0.6, 2)] {
        let v =
            single_average_value(&spec, &domain, &x, &cfg(EstimatorMethod::Quadrature)).unwrap();
        assert_relative_eq!(v.value().unwrap(), expected, epsilon = 1e-10);
        let w =
            double_average_value(&spec, &domain, &x, &cfg(EstimatorMethod::Quadrature)).unwrap();
        assert_relative_eq!(w.value().unwrap(), expected, epsilon = 1e-10);

        let mc =
            single_average_value(&spec, &domain, &x, &cfg(EstimatorMethod::MonteCarlo)).unwrap();
        assert!(
            (mc.value().unwrap() - expected).abs() <= 3.0 * mc.stderr_estimate,
            "mc {} vs {} (3se {})",
            mc.value().unwrap(),
            expected,
            3.0 * mc.stderr_estimate
        );
        let mc2 =
            double_average_value(&spec, &domain, &x, &cfg(EstimatorMethod::MonteCarlo)).unwrap();
        assert!((mc2.value().unwrap() - expected).abs() <= 3.0 * mc2.stderr_estimate);
    }
}

#[test]
fn abs_single_value_matches_closed_form() {
    let spec = corpus::get("abs1d", None).unwrap();
    let d = cube(1.0, 1);
    let q = single_average_value(&spec, &d, &[0.0], &cfg(EstimatorMethod::Quadrature)).unwrap();
    assert_relative_eq!(q.value().unwrap(), 0.5, max_relative = 1e-4);
    let c = single_average_value(&spec, &d, &[0.0], &cfg(EstimatorMethod::ClosedForm)).unwrap();
    assert_relative_eq!(c.value().unwrap(), 0.5);
    let mc = single_average_value(&spec, &d, &[0.0], &cfg(EstimatorMethod::MonteCarlo)).unwrap();
    assert!((mc.value().unwrap() - 0.5).abs() <= 3.0 * mc.stderr_estimate);
}

#[test]
fn abs_single_gradient_examples() {
    let spec = corpus::get("abs1d", None).unwrap();
    let d = cube(1.0, 1);
    // at the kink the averaged slope vanishes by symmetry
    let mc = single_average_gradient(&spec, &d, &[0.0], &cfg(EstimatorMethod::MonteCarlo)).unwrap();
    assert!(mc.gradient().unwrap()[0].abs() <= 3.0 * mc.stderr_estimate.max(1e-3));
    // inside the averaging window the closed form is x/r
    let q = single_average_gradient(&spec, &d, &[0.5], &cfg(EstimatorMethod::Quadrature)).unwrap();
    assert_relative_eq!(q.gradient().unwrap()[0], 0.5, max_relative = 1e-9);
}

#[test]
fn quad_gradient_survives_averaging() {
    let spec = corpus::get("quad", Some(3)).unwrap();
    let x = [0.5, -1.0, 2.0];
    let expected = [0.5, -2.0, 6.0];
    let d = ball(0.5, 3);
    let mc = single_average_gradient(&spec, &d, &x, &cfg(EstimatorMethod::MonteCarlo)).unwrap();
    let err = linalg::norm(&linalg::sub(mc.gradient().unwrap(), &expected));
    assert!(
        err <= 3.0 * mc.stderr_estimate,
        "err {err} vs 3se {}",
        3.0 * mc.stderr_estimate
    );
    let mc2 = double_average_gradient(&spec, &d, &x, &cfg(EstimatorMethod::MonteCarlo)).unwrap();
    let err2 = linalg::norm(&linalg::sub(mc2.gradient().unwrap(), &expected));
    assert!(err2 <= 3.0 * mc2.stderr_estimate);
}

// --- double averaging ---------------------------------------------------------

#[test]
fn abs_double_value_at_origin() {
    let spec = corpus::get("abs1d", None).unwrap();
    let d = cube(1.0, 1);
    let q = double_average_value(&spec, &d, &[0.0], &cfg(EstimatorMethod::Quadrature)).unwrap();
    assert_relative_eq!(q.value().unwrap(), 2.0 / 3.0, max_relative = 1e-4);
    let mc = double_average_value(&spec, &d, &[0.0], &cfg(EstimatorMethod::MonteCarlo)).unwrap();
    assert!((mc.value().unwrap() - 2.0 / 3.0).abs() <= 3.0 * mc.stderr_estimate);
}

#[test]
fn abs_double_gradient_matches_value_differences() {
    let spec = corpus::get("abs1d", None).unwrap();
    let d = cube(1.0, 1);
    let x = [0.25];
    // independent oracle: central differences of the quadrature double value;
    // the value estimator is piecewise linear in x at the cell scale, so the
    // grid must be fine relative to the differencing step
    let mut c = cfg(EstimatorMethod::Quadrature);
    c.quadrature_points_per_axis = 4096;
    let h = 1e-5;
    let vp = double_average_value(&spec, &d, &[x[0] + h], &c)
        .unwrap()
        .value()
        .unwrap();
    let vm = double_average_value(&spec, &d, &[x[0] - h], &c)
        .unwrap()
        .value()
        .unwrap();
    let fd = (vp - vm) / (2.0 * h);
    let g = double_average_gradient(&spec, &d, &x, &c).unwrap();
    assert_relative_eq!(g.gradient().unwrap()[0], fd, max_relative = 1e-3);
    // frozen from the closed form x(4r-x)/(4r^2) at x = 0.25, r = 1
    assert_relative_eq!(g.gradient().unwrap()[0], 0.234_375, max_relative = 1e-6);
    assert_relative_eq!(fd, 0.234_375, max_relative = 1e-3);
}

#[test]
fn double_gradient_vanishes_at_symmetric_kink() {
    let spec = corpus::get("abs1d", None).unwrap();
    let d = cube(1.0, 1);
    let mc = double_average_gradient(&spec, &d, &[0.0], &cfg(EstimatorMethod::MonteCarlo)).unwrap();
    assert!(mc.gradient().unwrap()[0].abs() <= 3.0 * mc.stderr_estimate.max(1e-3));
}

#[test]
fn quad_hessian_survives_double_averaging() {
    let spec = corpus::get("quad", Some(2)).unwrap();
    let x = [0.7, -0.3];
    let d = cube(0.5, 2);
    let q = double_average_hessian(&spec, &d, &x, &cfg(EstimatorMethod::Quadrature)).unwrap();
    let h = q.hessian().unwrap();
    let a_norm = math::sqrt(1.0f64 + 4.0);
    for i in 0..2 {
        for j in 0..2 {
            let expected = if i == j { (i + 1) as f64 } else { 0.0 };
            assert!(
                (h[(i, j)] - expected).abs() <= 1e-4 * a_norm,
                "H[{i}{j}] = {}",
                h[(i, j)]
            );
        }
    }
}

#[test]
fn abs_double_hessian_at_origin_is_inverse_radius() {
    let spec = corpus::get("abs1d", None).unwrap();
    let d = cube(1.0, 1);
    let q = double_average_hessian(&spec, &d, &[0.0], &cfg(EstimatorMethod::Quadrature)).unwrap();
    assert_relative_eq!(q.hessian().unwrap()[(0, 0)], 1.0, epsilon = 1e-3);
    let mc = double_average_hessian(&spec, &d, &[0.0], &cfg(EstimatorMethod::MonteCarlo)).unwrap();
    assert!((mc.hessian().unwrap()[(0, 0)] - 1.0).abs() <= 3.0 * mc.stderr_estimate.max(0.05));
}

#[test]
fn convex_hessian_estimates_have_a_spectral_floor() {
    for name in ["l1", "huber-l1"] {
        let spec = corpus::get(name, Some(3)).unwrap();
        let d = cube(0.4, 3);
        let l_s = gradient_norm_bound_constant(&d, spec.lipschitz_const());
        let est = double_average_hessian(
            &spec,
            &d,
            &[0.3, -0.2, 0.05],
            &cfg(EstimatorMethod::Quadrature),
        )
        .unwrap();
        let eigs = est.hessian().unwrap().sym_eigenvalues().unwrap();
        assert!(eigs[0] >= -1e-6 * l_s, "{name}: eig_min {}", eigs[0]);
    }
}

// --- common random numbers / keying -------------------------------------------

#[test]
fn keyed_evaluations_share_their_samples() {
    let spec = corpus::get("l1", Some(2)).unwrap();
    let d = ball(0.5, 2);
    let c = cfg(EstimatorMethod::MonteCarlo);
    let x = [0.4, -0.6];
    let h = 1e-5 * d.radius();
    // with a common key, a tiny shift leaves the sampled kink pattern intact
    // almost surely, so the value difference is exactly the affine response
    let vp = double_average_value_keyed(&spec, &d, &[x[0] + h, x[1]], &c, &x).unwrap();
    let vm = double_average_value_keyed(&spec, &d, &[x[0] - h, x[1]], &c, &x).unwrap();
    let fd = (vp.value().unwrap() - vm.value().unwrap()) / (2.0 * h);
    let g = double_average_gradient_keyed(&spec, &d, &x, &c, &x).unwrap();
    assert_relative_eq!(fd, g.gradient().unwrap()[0], max_relative = 1e-6);
}

/// Frozen reductions: these bits must survive refactors of the sample
/// loops and must not depend on the `parallel` feature (the partial sums
/// are reduced in index order either way).
#[test]
fn golden_monte_carlo_values() {
    let spec = corpus::get("l1", Some(2)).unwrap();
    let cfg = EstimatorConfig {
        method: EstimatorMethod::MonteCarlo,
        outer_samples: 1024,
        inner_samples: 512,
        seed: 2718,
        ..EstimatorConfig::default()
    };
    let v = double_average_value(&spec, &cube(0.75, 2), &[0.3, -0.4], &cfg).unwrap();
    assert_eq!(v.value().unwrap().to_bits(), 0x3ff2be6fafda2fa0);
    let g = double_average_gradient(&spec, &ball(0.75, 2), &[0.3, -0.4], &cfg).unwrap();
    assert_eq!(g.gradient().unwrap()[0].to_bits(), 0x3fda9e5fffffffff);
    assert_eq!(g.gradient().unwrap()[1].to_bits(), 0xbfe0bc1800000000);
}

#[test]
fn estimates_are_deterministic() {
    let spec = corpus::get("l1", Some(3)).unwrap();
    let d = ball(0.8, 3);
    let c = cfg(EstimatorMethod::MonteCarlo);
    let x = [0.1, 0.2, -0.3];
    let a = double_average_value(&spec, &d, &x, &c).unwrap();
    let b = double_average_value(&spec, &d, &x, &c).unwrap();
    assert_eq!(a, b);
    let ha = double_average_hessian(&spec, &d, &x, &c).unwrap();
    let hb = double_average_hessian(&spec, &d, &x, &c).unwrap();
    assert_eq!(ha, hb);
}

// --- capability errors ---------------------------------------------------------

#[test]
fn quadrature_rejects_high_dimensions() {
    let spec = corpus::get("l1", Some(5)).unwrap();
    let d = cube(1.0, 5);
    assert!(matches!(
        single_average_value(&spec, &d, &[0.0; 5], &cfg(EstimatorMethod::Quadrature)),
        Err(Error::QuadratureDimension { dim: 5, max: 4 })
    ));
}

#[test]
fn hessian_rejects_degenerate_radius() {
    let spec = corpus::get("abs1d", None).unwrap();
    let d = cube(1e-9, 1);
    assert!(matches!(
        double_average_hessian(&spec, &d, &[0.0], &cfg(EstimatorMethod::MonteCarlo)),
        Err(Error::DegenerateDomain { .. })
    ));
}

#[test]
fn dimension_mismatches_are_rejected() {
    let spec = corpus::get("l1", Some(3)).unwrap();
    let d = cube(1.0, 2);
    assert!(double_average_value(&spec, &d, &[0.0; 3], &cfg(EstimatorMethod::MonteCarlo)).is_err());
    assert!(single_average_value(
        &spec,
        &cube(1.0, 3),
        &[0.0; 2],
        &cfg(EstimatorMethod::MonteCarlo)
    )
    .is_err());
}

#[test]
fn hessian_payloads_are_symmetric() {
    let spec = corpus::get("linf", Some(2)).unwrap();
    let d = ball(0.3, 2);
    let mut c = cfg(EstimatorMethod::MonteCarlo);
    c.outer_samples = 256;
    c.inner_samples = 256;
    let est = double_average_hessian(&spec, &d, &[0.5, 0.45], &c).unwrap();
    assert_eq!(est.hessian().unwrap().max_asymmetry(), 0.0);
}

// --- property tests -------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Averaging never increases the Lipschitz constant.
    #[test]
    fn lipschitz_preservation(
        x1 in -3.0f64..3.0,
        x2 in -3.0f64..3.0,
        seed in 0u64..1000,
    ) {
        let spec = corpus::get("abs1d", None).unwrap();
        let d = cube(0.7, 1);
        let mut c = cfg(EstimatorMethod::MonteCarlo);
        c.seed = seed;
        c.inner_samples = 1024;
        let a = single_average_value(&spec, &d, &[x1], &c).unwrap();
        let b = single_average_value(&spec, &d, &[x2], &c).unwrap();
        let slack = 6.0 * math::sqrt(
            a.stderr_estimate * a.stderr_estimate + b.stderr_estimate * b.stderr_estimate,
        );
        prop_assert!(
            (a.value().unwrap() - b.value().unwrap()).abs()
                <= spec.lipschitz_const() * (x1 - x2).abs() + slack
        );
    }

    /// Quadrature reproduces affine functions over symmetric domains.
    #[test]
    fn affine_reproduction(
        a0 in -2.0f64..2.0,
        a1 in -2.0f64..2.0,
        b in -1.0f64..1.0,
        x0 in -1.0f64..1.0,
        x1 in -1.0f64..1.0,
    ) {
        let spec = affine_spec(vec![a0, a1], b);
        let d = cube(0.5, 2);
        let x = [x0, x1];
        let expected = spec.evaluate(&x).unwrap();
        let mut c = cfg(EstimatorMethod::Quadrature);
        c.quadrature_points_per_axis = 32;
        let v = double_average_value(&spec, &d, &x, &c).unwrap();
        prop_assert!((v.value().unwrap() - expected).abs() <= 1e-10);
        let g = double_average_gradient(&spec, &d, &x, &c).unwrap();
        prop_assert!((g.gradient().unwrap()[0] - a0).abs() <= 1e-9);
        prop_assert!((g.gradient().unwrap()[1] - a1).abs() <= 1e-9);
    }
}
