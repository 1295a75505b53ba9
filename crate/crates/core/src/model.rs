//! The regularized local model built on the double average: for an anchor
//! point `x` and weight `lambda`,
//!
//! ```text
//! F(y) = Phi(y) + lambda * |y - x|^2
//! ```
//!
//! At the anchor the regularizer vanishes, so value and gradient coincide
//! with the unregularized double average; the Hessian gains `2 lambda I`,
//! which together with the norm bound `|Phi''| <= L/d(D)` yields the
//! spectral sandwich `[lambda, 3 lambda]` when `lambda` is set to that bound
//! (checked by [`check_hessian_sandwich`]).
//!
//! One surrogate object corresponds to one (anchor, domain) pair;
//! re-anchoring means building a new object. Surrogates are immutable and
//! safe to share across threads.

use alloc::vec::Vec;

use crate::corpus::ObjectiveSpec;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::smoothing::{
    double_average_gradient, double_average_hessian, double_average_value, AveragingDomain,
    EstimatorConfig,
};

pub struct RegularizedSurrogate<'a> {
    objective: &'a ObjectiveSpec,
    domain: AveragingDomain,
    estimator: EstimatorConfig,
    anchor: Vec<f64>,
    reg_weight: f64,
}

impl<'a> RegularizedSurrogate<'a> {
    /// `reg_weight` may be zero for diagnostics (plain Newton on the double
    /// average); the solvers always pass a positive weight.
    pub fn new(
        objective: &'a ObjectiveSpec,
        domain: AveragingDomain,
        estimator: EstimatorConfig,
        anchor: Vec<f64>,
        reg_weight: f64,
    ) -> Result<Self> {
        objective.check_dim(&anchor)?;
        if domain.dim() != objective.dim() {
            return Err(Error::DimensionMismatch {
                expected: objective.dim(),
                found: domain.dim(),
            });
        }
        if !reg_weight.is_finite() || reg_weight < 0.0 {
            return Err(Error::InvalidConfig(
                "regularization weight must be >= 0".into(),
            ));
        }
        estimator.validate()?;
        Ok(RegularizedSurrogate {
            objective,
            domain,
            estimator,
            anchor,
            reg_weight,
        })
    }

    pub fn objective(&self) -> &ObjectiveSpec {
        self.objective
    }

    pub fn domain(&self) -> &AveragingDomain {
        &self.domain
    }

    pub fn estimator(&self) -> &EstimatorConfig {
        &self.estimator
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn reg_weight(&self) -> f64 {
        self.reg_weight
    }

    /// `Phi(y) + lambda |y - anchor|^2`.
    pub fn value(&self, y: &[f64]) -> Result<f64> {
        let base = double_average_value(self.objective, &self.domain, y, &self.estimator)?
            .value()
            .expect("value estimate");
        Ok(base + self.reg_weight * sq_dist(y, &self.anchor))
    }

    /// `Phi'(y) + 2 lambda (y - anchor)`.
    pub fn gradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        let est = double_average_gradient(self.objective, &self.domain, y, &self.estimator)?;
        let mut g = est.gradient().expect("gradient estimate").to_vec();
        for i in 0..g.len() {
            g[i] += 2.0 * self.reg_weight * (y[i] - self.anchor[i]);
        }
        Ok(g)
    }

    /// `Phi''(y) + 2 lambda I`, symmetric by construction.
    pub fn hessian(&self, y: &[f64]) -> Result<Matrix> {
        let est = double_average_hessian(self.objective, &self.domain, y, &self.estimator)?;
        let mut h = est.hessian().expect("hessian estimate").clone();
        h.add_to_diagonal(2.0 * self.reg_weight);
        Ok(h)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        s += d * d;
    }
    s
}

/// Outcome of the spectral sandwich check at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport {
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub eig_min: f64,
    pub eig_max: f64,
}

/// Checks that the surrogate Hessian's spectrum lies in
/// `[l_s (1 - 1e-3), 3 l_s (1 + 1e-3)]`; meaningful when the surrogate was
/// built with `reg_weight = l_s`. `eig_min` can also be read against
/// `2 l_s`, the floor contributed by the regularizer alone on a convex
/// objective.
pub fn check_hessian_sandwich(
    surrogate: &RegularizedSurrogate<'_>,
    y: &[f64],
    l_s: f64,
) -> Result<SandwichReport> {
    let h = surrogate.hessian(y)?;
    if !h.is_finite() {
        return Err(Error::NonFiniteEstimate);
    }
    let eigs = h.sym_eigenvalues()?;
    let eig_min = eigs[0];
    let eig_max = eigs[eigs.len() - 1];
    Ok(SandwichReport {
        lower_ok: eig_min >= l_s * (1.0 - 1e-3),
        upper_ok: eig_max <= 3.0 * l_s * (1.0 + 1e-3),
        eig_min,
        eig_max,
    })
}

/// Newton direction `-H^{-1} g` of the surrogate at its anchor (or any `y`).
/// The factorization follows the positive-definite contract: one jitter
/// retry, then failure.
pub fn newton_direction(h: &Matrix, g: &[f64]) -> Result<Vec<f64>> {
    let neg: Vec<f64> = g.iter().map(|v| -v).collect();
    linalg::solve_spd(h, &neg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::smoothing::{DomainShape, EstimatorMethod};
    use alloc::vec;
    use approx::assert_relative_eq;

    fn quad_cfg() -> EstimatorConfig {
        EstimatorConfig {
            method: EstimatorMethod::Quadrature,
            quadrature_points_per_axis: 256,
            ..EstimatorConfig::default()
        }
    }

    fn closed_cfg() -> EstimatorConfig {
        EstimatorConfig {
            method: EstimatorMethod::ClosedForm,
            ..EstimatorConfig::default()
        }
    }

    #[test]
    fn anchor_identities_hold_exactly() {
        let spec = corpus::get("l1", Some(2)).unwrap();
        let d = AveragingDomain::new(DomainShape::Cube, 0.5, 2).unwrap();
        let anchor = vec![0.3, -0.4];
        let s = RegularizedSurrogate::new(&spec, d, quad_cfg(), anchor.clone(), 1.7).unwrap();
        let raw = double_average_value(&spec, &d, &anchor, &quad_cfg()).unwrap();
        assert_eq!(s.value(&anchor).unwrap(), raw.value().unwrap());
        let raw_g = double_average_gradient(&spec, &d, &anchor, &quad_cfg()).unwrap();
        assert_eq!(s.gradient(&anchor).unwrap(), raw_g.gradient().unwrap());
    }

    #[test]
    fn surrogate_value_of_smooth_quadratic() {
        // 1-D quadratic with unit curvature: the double average adds the
        // constant 2 * r^2/6; hand-evaluated at y = 1 with lambda = 1/2.
        let spec = corpus::get("quad", Some(1)).unwrap();
        let d = AveragingDomain::new(DomainShape::Cube, 1.0, 1).unwrap();
        let s = RegularizedSurrogate::new(&spec, d, closed_cfg(), vec![0.0], 0.5).unwrap();
        let phi_1 = 0.5 + 1.0 / 3.0;
        assert_relative_eq!(s.value(&[1.0]).unwrap(), phi_1 + 0.5, epsilon = 1e-12);
        // quadrature agrees with the closed form
        let s_q = RegularizedSurrogate::new(&spec, d, quad_cfg(), vec![0.0], 0.5).unwrap();
        assert_relative_eq!(s_q.value(&[1.0]).unwrap(), phi_1 + 0.5, max_relative = 1e-4);
        // and the regularizer disappears in the limit lambda -> 0
        let s0 = RegularizedSurrogate::new(&spec, d, closed_cfg(), vec![0.0], 0.0).unwrap();
        assert_relative_eq!(s0.value(&[1.0]).unwrap(), phi_1, epsilon = 1e-12);
    }

    #[test]
    fn surrogate_gradient_adds_the_regularizer_pull() {
        let spec = corpus::get("abs1d", None).unwrap();
        let d = AveragingDomain::new(DomainShape::Cube, 1.0, 1).unwrap();
        let s = RegularizedSurrogate::new(&spec, d, closed_cfg(), vec![0.0], 1.0).unwrap();
        // Phi'(0.5) = 0.5*(4-0.5)/4 = 0.4375 from the closed form, plus
        // 2*lambda*(y - anchor) = 1.0
        let g = s.gradient(&[0.5]).unwrap();
        assert_relative_eq!(g[0], 0.4375 + 1.0, epsilon = 1e-12);
    }

    #[test]
    fn surrogate_derivatives_match_finite_differences_of_value() {
        let spec = corpus::get("huber-l1", Some(2)).unwrap();
        let d = AveragingDomain::new(DomainShape::Cube, 0.3, 2).unwrap();
        let s = RegularizedSurrogate::new(&spec, d, quad_cfg(), vec![0.2, -0.1], 0.8).unwrap();
        let y = [0.45, 0.3];
        let g = s.gradient(&y).unwrap();
        let h = 1e-5 * d.radius();
        for i in 0..2 {
            let mut yp = y;
            yp[i] += h;
            let mut ym = y;
            ym[i] -= h;
            let fd = (s.value(&yp).unwrap() - s.value(&ym).unwrap()) / (2.0 * h);
            assert_relative_eq!(g[i], fd, max_relative = 1e-3);
        }
    }

    #[test]
    fn surrogate_hessian_examples() {
        // identity quadratic with lambda = 1/2: H = I + 2*0.5*I = 2I
        let spec = corpus::get("quad", Some(1)).unwrap();
        let d = AveragingDomain::new(DomainShape::Cube, 0.5, 1).unwrap();
        let s = RegularizedSurrogate::new(&spec, d, closed_cfg(), vec![0.0], 0.5).unwrap();
        assert_relative_eq!(s.hessian(&[0.4]).unwrap()[(0, 0)], 2.0, epsilon = 1e-12);

        // twice-averaged |.| at the origin has curvature 1/r; lambda = 1
        let abs = corpus::get("abs1d", None).unwrap();
        let d1 = AveragingDomain::new(DomainShape::Cube, 1.0, 1).unwrap();
        let s1 = RegularizedSurrogate::new(&abs, d1, quad_cfg(), vec![0.0], 1.0).unwrap();
        assert_relative_eq!(s1.hessian(&[0.0]).unwrap()[(0, 0)], 3.0, epsilon = 1e-2);
    }

    #[test]
    fn hessian_is_symmetric_after_construction() {
        let spec = corpus::get("linf", Some(2)).unwrap();
        let d = AveragingDomain::new(DomainShape::Cube, 0.4, 2).unwrap();
        let s = RegularizedSurrogate::new(&spec, d, quad_cfg(), vec![0.9, 0.2], 0.3).unwrap();
        let h = s.hessian(&[0.9, 0.2]).unwrap();
        assert_eq!(h.max_asymmetry(), 0.0);
    }

    #[test]
    fn sandwich_bounds_on_shipped_objectives() {
        // zero objective: spectrum is exactly 2 l_s, inside [l_s, 3 l_s]
        let zero = corpus::ObjectiveSpec::builder("zero", 2)
            .lipschitz_const(1.0)
            .value(|_| 0.0)
            .subgradient(|_, g| g.fill(0.0))
            .minimizer(vec![0.0, 0.0], 0.0)
            .build()
            .unwrap();
        let d = AveragingDomain::new(DomainShape::Cube, 0.25, 2).unwrap();
        let l_s = crate::smoothing::gradient_norm_bound_constant(&d, zero.lipschitz_const());
        let s = RegularizedSurrogate::new(&zero, d, quad_cfg(), vec![0.0, 0.0], l_s).unwrap();
        let rep = check_hessian_sandwich(&s, &[0.1, 0.1], l_s).unwrap();
        assert!(rep.lower_ok && rep.upper_ok);
        assert_relative_eq!(rep.eig_min, 2.0 * l_s, max_relative = 1e-9);

        // quadratic with curvature exactly l_s: spectrum hits the upper edge
        // 3 l_s and the tolerance keeps it admissible
        let quad = corpus::ObjectiveSpec::builder("edge-quad", 1)
            .lipschitz_const(1.0)
            .value(move |x| 0.5 * x[0] * x[0])
            .subgradient(|x, g| g[0] = x[0])
            .minimizer(vec![0.0], 0.0)
            .build()
            .unwrap();
        let edge = AveragingDomain::new(DomainShape::Cube, 0.5, 1).unwrap();
        let l_edge = 1.0; // matches the curvature
        let s2 = RegularizedSurrogate::new(&quad, edge, quad_cfg(), vec![0.0], l_edge).unwrap();
        let rep2 = check_hessian_sandwich(&s2, &[0.0], l_edge).unwrap();
        assert!(
            rep2.upper_ok,
            "eig_max {} vs {}",
            rep2.eig_max,
            3.0 * l_edge
        );
        assert_relative_eq!(rep2.eig_max, 3.0, max_relative = 1e-4);

        // convex corpus entry away from its kinks
        let l1 = corpus::get("l1", Some(2)).unwrap();
        let dl = AveragingDomain::new(DomainShape::Cube, 0.05, 2).unwrap();
        let l_l1 = crate::smoothing::gradient_norm_bound_constant(&dl, l1.lipschitz_const());
        let s3 = RegularizedSurrogate::new(&l1, dl, quad_cfg(), vec![0.8, -0.6], l_l1).unwrap();
        let rep3 = check_hessian_sandwich(&s3, &[0.8, -0.6], l_l1).unwrap();
        assert!(rep3.lower_ok && rep3.upper_ok, "{rep3:?}");
    }

    #[test]
    fn sandwich_rejects_non_finite_hessians() {
        let bad = corpus::ObjectiveSpec::builder("nan", 1)
            .lipschitz_const(1.0)
            .value(|_| f64::NAN)
            .subgradient(|_, g| g.fill(f64::NAN))
            .minimizer(vec![0.0], 0.0)
            .build()
            .unwrap();
        let d = AveragingDomain::new(DomainShape::Cube, 0.5, 1).unwrap();
        let cfg = EstimatorConfig {
            method: EstimatorMethod::MonteCarlo,
            outer_samples: 8,
            inner_samples: 8,
            ..EstimatorConfig::default()
        };
        let s = RegularizedSurrogate::new(&bad, d, cfg, vec![0.0], 1.0).unwrap();
        assert!(matches!(
            check_hessian_sandwich(&s, &[0.0], 1.0),
            Err(Error::NonFiniteEstimate)
        ));
    }

    #[test]
    fn spectral_floor_from_convexity() {
        for name in ["l1", "quad", "huber-l1"] {
            let spec = corpus::get(name, Some(2)).unwrap();
            let d = AveragingDomain::new(DomainShape::Cube, 0.3, 2).unwrap();
            let lambda = 0.9;
            let s =
                RegularizedSurrogate::new(&spec, d, quad_cfg(), vec![0.4, 0.2], lambda).unwrap();
            let eigs = s.hessian(&[0.4, 0.2]).unwrap().sym_eigenvalues().unwrap();
            assert!(
                eigs[0] >= 2.0 * lambda * (1.0 - 1e-3),
                "{name}: {}",
                eigs[0]
            );
        }
    }
}
