//! Closed-form smoothed references for the separable corpus entries.
//!
//! For a sum of per-coordinate pieces under a cube domain the averaging
//! integral factorizes per axis, so the once- and twice-averaged values,
//! gradients and Hessians of `sum |x_i|` reduce to scalar formulas. For the
//! diagonal quadratic the averaging only shifts the value by a second-moment
//! constant and leaves gradient and Hessian untouched, which holds for ball
//! and cube domains alike.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math;
use crate::smoothing::{
    AveragingDepth, AveragingDomain, DomainShape, SmoothingEstimate, SmoothingOrder,
};

use super::ObjectiveSpec;

/// Which closed-form family an objective belongs to.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum ClosedForm {
    /// `f(x) = sum_i |x_i|`; cube (or 1-D interval) domains only.
    SumAbs,
    /// `f(x) = 1/2 sum_i a_i x_i^2`; any symmetric domain.
    QuadDiag(Vec<f64>),
}

/// Once-averaged `|.|` over `[-r, r]`.
pub(crate) fn abs_single_value(x: f64, r: f64) -> f64 {
    let t = math::abs(x);
    if t <= r {
        (x * x + r * r) / (2.0 * r)
    } else {
        t
    }
}

pub(crate) fn abs_single_deriv(x: f64, r: f64) -> f64 {
    if math::abs(x) <= r {
        x / r
    } else {
        math::sign(x)
    }
}

/// A.e. second derivative of the once-averaged `|.|`; the boundary
/// `|x| = r` takes the inner value.
pub(crate) fn abs_single_second(x: f64, r: f64) -> f64 {
    if math::abs(x) < r {
        1.0 / r
    } else {
        0.0
    }
}

/// Twice-averaged `|.|` over `[-r, r]`.
pub(crate) fn abs_double_value(x: f64, r: f64) -> f64 {
    let t = math::abs(x);
    if t <= 2.0 * r {
        2.0 * r / 3.0 + t * t / (2.0 * r) - t * t * t / (12.0 * r * r)
    } else {
        t
    }
}

pub(crate) fn abs_double_deriv(x: f64, r: f64) -> f64 {
    let t = math::abs(x);
    if t <= 2.0 * r {
        math::sign(x) * t * (4.0 * r - t) / (4.0 * r * r)
    } else {
        math::sign(x)
    }
}

pub(crate) fn abs_double_second(x: f64, r: f64) -> f64 {
    let t = math::abs(x);
    if t <= 2.0 * r {
        (2.0 * r - t) / (2.0 * r * r)
    } else {
        0.0
    }
}

fn sum_abs_reference(
    domain: &AveragingDomain,
    x: &[f64],
    order: SmoothingOrder,
    depth: AveragingDepth,
    objective: &str,
) -> Result<SmoothingEstimate> {
    if domain.shape() == DomainShape::Ball && domain.dim() != 1 {
        // A multi-dimensional ball does not factorize per coordinate.
        return Err(Error::ClosedFormUnavailable {
            objective: objective.into(),
        });
    }
    let r = domain.radius();
    let est = match (depth, order) {
        (AveragingDepth::Single, SmoothingOrder::Value) => {
            SmoothingEstimate::exact_value(x.iter().map(|&v| abs_single_value(v, r)).sum())
        }
        (AveragingDepth::Single, SmoothingOrder::Gradient) => {
            SmoothingEstimate::exact_gradient(x.iter().map(|&v| abs_single_deriv(v, r)).collect())
        }
        (AveragingDepth::Single, SmoothingOrder::Hessian) => {
            let d: Vec<f64> = x.iter().map(|&v| abs_single_second(v, r)).collect();
            SmoothingEstimate::exact_hessian(Matrix::diagonal(&d))
        }
        (AveragingDepth::Double, SmoothingOrder::Value) => {
            SmoothingEstimate::exact_value(x.iter().map(|&v| abs_double_value(v, r)).sum())
        }
        (AveragingDepth::Double, SmoothingOrder::Gradient) => {
            SmoothingEstimate::exact_gradient(x.iter().map(|&v| abs_double_deriv(v, r)).collect())
        }
        (AveragingDepth::Double, SmoothingOrder::Hessian) => {
            let d: Vec<f64> = x.iter().map(|&v| abs_double_second(v, r)).collect();
            SmoothingEstimate::exact_hessian(Matrix::diagonal(&d))
        }
    };
    Ok(est)
}

fn quad_diag_reference(
    coeffs: &[f64],
    domain: &AveragingDomain,
    x: &[f64],
    order: SmoothingOrder,
    depth: AveragingDepth,
) -> SmoothingEstimate {
    let r = domain.radius();
    let n = domain.dim() as f64;
    // Second moment of one coordinate of the uniform distribution on D.
    let m2 = match domain.shape() {
        DomainShape::Cube => r * r / 3.0,
        DomainShape::Ball => r * r / (n + 2.0),
    };
    let passes = match depth {
        AveragingDepth::Single => 1.0,
        AveragingDepth::Double => 2.0,
    };
    match order {
        SmoothingOrder::Value => {
            let f: f64 = x.iter().zip(coeffs).map(|(&v, &a)| 0.5 * a * v * v).sum();
            let shift: f64 = coeffs.iter().map(|&a| 0.5 * a * m2).sum();
            SmoothingEstimate::exact_value(f + passes * shift)
        }
        SmoothingOrder::Gradient => {
            SmoothingEstimate::exact_gradient(x.iter().zip(coeffs).map(|(&v, &a)| a * v).collect())
        }
        SmoothingOrder::Hessian => SmoothingEstimate::exact_hessian(Matrix::diagonal(coeffs)),
    }
}

/// Exact smoothed value/gradient/Hessian for objectives that carry a closed
/// form; errors with a capability failure otherwise.
pub fn reference_smoothed(
    spec: &ObjectiveSpec,
    domain: &AveragingDomain,
    x: &[f64],
    order: SmoothingOrder,
    depth: AveragingDepth,
) -> Result<SmoothingEstimate> {
    spec.check_dim(x)?;
    if domain.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: domain.dim(),
        });
    }
    match spec.closed_form() {
        Some(ClosedForm::SumAbs) => sum_abs_reference(domain, x, order, depth, spec.name()),
        Some(ClosedForm::QuadDiag(coeffs)) => {
            Ok(quad_diag_reference(coeffs, domain, x, order, depth))
        }
        None => Err(Error::ClosedFormUnavailable {
            objective: spec.name().into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn abs_single_matches_piecewise_definition() {
        assert_relative_eq!(abs_single_value(0.0, 1.0), 0.5);
        assert_relative_eq!(abs_single_value(1.0, 1.0), 1.0);
        assert_relative_eq!(abs_single_value(-3.0, 1.0), 3.0);
        assert_relative_eq!(abs_single_deriv(0.5, 1.0), 0.5);
        assert_relative_eq!(abs_single_deriv(-2.0, 1.0), -1.0);
    }

    #[test]
    fn abs_double_is_c2_across_region_boundaries() {
        let r = 0.7;
        for &x in &[2.0 * r, -2.0 * r] {
            assert_relative_eq!(abs_double_value(x, r), math::abs(x), epsilon = 1e-14);
            assert_relative_eq!(abs_double_deriv(x, r), math::sign(x), epsilon = 1e-14);
            assert_relative_eq!(abs_double_second(x, r), 0.0, epsilon = 1e-14);
        }
        assert_relative_eq!(abs_double_value(0.0, 1.0), 2.0 / 3.0);
        assert_relative_eq!(abs_double_second(0.0, 1.0), 1.0);
    }
}
