//! Integral averaging of a Lipschitz function over a ball or cube.
//!
//! The once-averaged function `phi(x) = (1/mu(D)) \int_D f(x+y) dy` is
//! continuously differentiable with `phi'(x) = (1/mu(D)) \int_D f'(x+z) dz`
//! (derivatives taken where they exist); averaging again gives a twice
//! continuously differentiable function whose Hessian is Lipschitz. Both
//! averages keep the Lipschitz constant of `f`, reproduce affine functions
//! over these symmetric domains, and preserve convexity.
//!
//! Three interchangeable estimators are provided: `closed_form` (exact, for
//! corpus entries that carry one), `quadrature` (deterministic grids,
//! dimensions up to 4), and `monte_carlo` (counter-based sampling, any
//! dimension). Monte Carlo estimates are a deterministic function of the
//! configuration and the query point.

mod monte_carlo;
mod quadrature;
mod sampling;

use alloc::vec::Vec;

use crate::corpus::{reference_smoothed, ObjectiveSpec};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math;

pub use sampling::{SampleKey, StreamKey};

/// Minimum radius for finite-difference Hessian estimation.
pub const MIN_HESSIAN_RADIUS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainShape {
    Ball,
    Cube,
}

/// The averaging set `D`: a ball of the given radius or a cube of the given
/// half-width, centered at the origin (so 0 is always interior).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragingDomain {
    shape: DomainShape,
    radius: f64,
    dim: usize,
}

impl AveragingDomain {
    pub fn new(shape: DomainShape, radius: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig(
                "domain dimension must be positive".into(),
            ));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidConfig(
                "domain radius must be positive and finite".into(),
            ));
        }
        Ok(AveragingDomain { shape, radius, dim })
    }

    pub fn shape(&self) -> DomainShape {
        self.shape
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Lebesgue measure: `(2r)^n` for the cube, `pi^(n/2) r^n / Gamma(n/2+1)`
    /// for the ball (computed by the two-step volume recurrence).
    pub fn measure(&self) -> f64 {
        match self.shape {
            DomainShape::Cube => math::powi(2.0 * self.radius, self.dim as u32),
            DomainShape::Ball => {
                let r = self.radius;
                let mut even = 1.0; // V_0
                let mut odd = 2.0 * r; // V_1
                for k in 2..=self.dim {
                    let next = 2.0 * math::PI * r * r / k as f64
                        * if k.is_multiple_of(2) { even } else { odd };
                    if k.is_multiple_of(2) {
                        even = next;
                    } else {
                        odd = next;
                    }
                }
                if self.dim.is_multiple_of(2) {
                    even
                } else {
                    odd
                }
            }
        }
    }

    /// Diameter: `2r` for the ball, `2r sqrt(n)` for the cube.
    pub fn diameter(&self) -> f64 {
        match self.shape {
            DomainShape::Ball => 2.0 * self.radius,
            DomainShape::Cube => 2.0 * self.radius * math::sqrt(self.dim as f64),
        }
    }

    /// Whether `v` lies in the domain scaled by `factor`.
    pub fn contains_scaled(&self, v: &[f64], factor: f64) -> bool {
        let bound = factor * self.radius;
        match self.shape {
            DomainShape::Ball => crate::linalg::norm(v) <= bound,
            DomainShape::Cube => crate::linalg::norm_inf(v) <= bound,
        }
    }
}

/// Lipschitz constant of the double average's Hessian, `2L/d(D)^2`.
pub fn hessian_lipschitz_constant(domain: &AveragingDomain, lipschitz: f64) -> f64 {
    let d = domain.diameter();
    2.0 * lipschitz / (d * d)
}

/// Norm bound for the double average's Hessian, `L/d(D)`.
pub fn gradient_norm_bound_constant(domain: &AveragingDomain, lipschitz: f64) -> f64 {
    lipschitz / domain.diameter()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothingOrder {
    Value,
    Gradient,
    Hessian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AveragingDepth {
    Single,
    Double,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub method: EstimatorMethod,
    /// Outer (translation) samples of the nested Monte Carlo double average.
    pub outer_samples: u64,
    /// Inner samples per outer translation; also the single-average count.
    pub inner_samples: u64,
    pub quadrature_points_per_axis: u32,
    /// Finite-difference step as a fraction of the radius.
    pub fd_step_factor: f64,
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            method: EstimatorMethod::MonteCarlo,
            outer_samples: 4096,
            inner_samples: 4096,
            quadrature_points_per_axis: 64,
            fd_step_factor: 0.1,
            seed: 0,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.outer_samples == 0 || self.inner_samples == 0 {
            return Err(Error::InvalidConfig(
                "sample counts must be positive".into(),
            ));
        }
        if self.quadrature_points_per_axis == 0 {
            return Err(Error::InvalidConfig(
                "quadrature needs at least one point per axis".into(),
            ));
        }
        if !self.fd_step_factor.is_finite()
            || self.fd_step_factor <= 0.0
            || self.fd_step_factor >= 1.0
        {
            return Err(Error::InvalidConfig(
                "fd_step_factor must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EstimatePayload {
    Value(f64),
    Gradient(Vec<f64>),
    Hessian(Matrix),
}

/// An estimate of a smoothed value, gradient or Hessian together with the
/// sampling effort and a standard-error estimate (zero for the deterministic
/// estimators).
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingEstimate {
    pub payload: EstimatePayload,
    pub samples_used: u64,
    pub stderr_estimate: f64,
}

impl SmoothingEstimate {
    pub fn value_estimate(v: f64, samples: u64, stderr: f64) -> Self {
        SmoothingEstimate {
            payload: EstimatePayload::Value(v),
            samples_used: samples,
            stderr_estimate: stderr,
        }
    }

    pub fn gradient_estimate(g: Vec<f64>, samples: u64, stderr: f64) -> Self {
        SmoothingEstimate {
            payload: EstimatePayload::Gradient(g),
            samples_used: samples,
            stderr_estimate: stderr,
        }
    }

    /// Hessians are symmetrized on construction.
    pub fn hessian_estimate(mut h: Matrix, samples: u64, stderr: f64) -> Self {
        h.symmetrize();
        SmoothingEstimate {
            payload: EstimatePayload::Hessian(h),
            samples_used: samples,
            stderr_estimate: stderr,
        }
    }

    pub fn exact_value(v: f64) -> Self {
        Self::value_estimate(v, 0, 0.0)
    }

    pub fn exact_gradient(g: Vec<f64>) -> Self {
        Self::gradient_estimate(g, 0, 0.0)
    }

    pub fn exact_hessian(h: Matrix) -> Self {
        Self::hessian_estimate(h, 0, 0.0)
    }

    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples_used = samples;
        self
    }

    pub fn value(&self) -> Option<f64> {
        match &self.payload {
            EstimatePayload::Value(v) => Some(*v),
            _ => None,
        }
    }

    pub fn gradient(&self) -> Option<&[f64]> {
        match &self.payload {
            EstimatePayload::Gradient(g) => Some(g),
            _ => None,
        }
    }

    pub fn hessian(&self) -> Option<&Matrix> {
        match &self.payload {
            EstimatePayload::Hessian(h) => Some(h),
            _ => None,
        }
    }
}

/// Shared parallel/serial fan-out with order-stable reduction.
#[cfg(feature = "parallel")]
pub(crate) fn indexed_partials<T: Send>(
    count: usize,
    f: impl Fn(usize) -> T + Send + Sync,
) -> Vec<T> {
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn indexed_partials<T>(count: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..count).map(f).collect()
}

fn check_inputs(
    spec: &ObjectiveSpec,
    domain: &AveragingDomain,
    x: &[f64],
    cfg: &EstimatorConfig,
) -> Result<()> {
    cfg.validate()?;
    spec.check_dim(x)?;
    if domain.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: domain.dim(),
        });
    }
    Ok(())
}

fn check_quadrature_dim(dim: usize) -> Result<()> {
    if dim > quadrature::MAX_DIM {
        return Err(Error::QuadratureDimension {
            dim,
            max: quadrature::MAX_DIM,
        });
    }
    Ok(())
}

/// Estimate of the once-averaged value `phi(x)`.
pub fn single_average_value(
    spec: &ObjectiveSpec,
    domain: &AveragingDomain,
    x: &[f64],
    cfg: &EstimatorConfig,
) -> Result<SmoothingEstimate> {
    check_inputs(spec, domain, x, cfg)?;
    match cfg.method {
        EstimatorMethod::ClosedForm => reference_smoothed(
            spec,
            domain,
            x,
            SmoothingOrder::Value,
            AveragingDepth::Single,
        ),
        EstimatorMethod::Quadrature => {
            check_quadrature_dim(domain.dim())?;
            let q = cfg.quadrature_points_per_axis as usize;
            match domain.shape() {
                DomainShape::Cube => quadrature::cube_single_value(spec, domain, x, q),
                DomainShape::Ball => quadrature::ball_single_value(spec, domain, x, q),
            }
        }
        EstimatorMethod::MonteCarlo => Ok(monte_carlo::single_value(spec, domain, x, cfg)),
    }
}

/// Estimate of the once-averaged gradient `phi'(x)`.
pub fn single_average_gradient(
    spec: &ObjectiveSpec,
    domain: &AveragingDomain,
    x: &[f64],
    cfg: &EstimatorConfig,
) -> Result<SmoothingEstimate> {
    check_inputs(spec, domain, x, cfg)?;
    match cfg.method {
        EstimatorMethod::ClosedForm => reference_smoothed(
            spec,
            domain,
            x,
            SmoothingOrder::Gradient,
            AveragingDepth::Single,
        ),
        EstimatorMethod::Quadrature => {
            check_quadrature_dim(domain.dim())?;
            let q = cfg.quadrature_points_per_axis as usize;
            match domain.shape() {
                DomainShape::Cube => quadrature::cube_single_gradient(spec, domain, x, q),
                DomainShape::Ball => quadrature::ball_single_gradient(spec, domain, x, q),
            }
        }
        EstimatorMethod::MonteCarlo => Ok(monte_carlo::single_gradient(spec, domain, x, cfg)),
    }
}

/// Estimate of the twice-averaged value; samples are keyed at the query
/// point itself.
pub fn double_average_value(
    spec: &ObjectiveSpec,
    domain: &AveragingDomain,
    x: &[f64],
    cfg: &EstimatorConfig,
) -> Result<SmoothingEstimate> {
    double_average_value_keyed(spec, domain, x, cfg, x)
}

/// Twice-averaged value with Monte Carlo offsets keyed at `key_point`, so
/// evaluations at nearby points can share their sample sets (common random
/// numbers). Deterministic estimators ignore the key.
pub fn double_average_value_keyed(
    spec: &ObjectiveSpec,
    domain: &AveragingDomain,
    x: &[f64],
    cfg: &EstimatorConfig,
    key_point: &[f64],
) -> Result<SmoothingEstimate> {
    check_inputs(spec, domain, x, cfg)?;
    match cfg.method {
        EstimatorMethod::ClosedForm => reference_smoothed(
            spec,
            domain,
            x,
            SmoothingOrder::Value,
            AveragingDepth::Double,
        ),
        EstimatorMethod::Quadrature => {
            check_quadrature_dim(domain.dim())?;
            let q = cfg.quadrature_points_per_axis as usize;
            match domain.shape() {
                DomainShape::Cube => quadrature::cube_double_value(spec, domain, x, q),
                DomainShape::Ball => quadrature::ball_double_value(spec, domain, x, q),
            }
        }
        EstimatorMethod::MonteCarlo => {
            Ok(monte_carlo::double_value(spec, domain, x, cfg, key_point))
        }
    }
}

/// Estimate of the twice-averaged gradient.
pub fn double_average_gradient(
    spec: &ObjectiveSpec,
    domain: &AveragingDomain,
    x: &[f64],
    cfg: &EstimatorConfig,
) -> Result<SmoothingEstimate> {
    double_average_gradient_keyed(spec, domain, x, cfg, x)
}

/// Twice-averaged gradient with an explicit sampling key; see
/// [`double_average_value_keyed`].
pub fn double_average_gradient_keyed(
    spec: &ObjectiveSpec,
    domain: &AveragingDomain,
    x: &[f64],
    cfg: &EstimatorConfig,
    key_point: &[f64],
) -> Result<SmoothingEstimate> {
    check_inputs(spec, domain, x, cfg)?;
    match cfg.method {
        EstimatorMethod::ClosedForm => reference_smoothed(
            spec,
            domain,
            x,
            SmoothingOrder::Gradient,
            AveragingDepth::Double,
        ),
        EstimatorMethod::Quadrature => {
            check_quadrature_dim(domain.dim())?;
            let q = cfg.quadrature_points_per_axis as usize;
            match domain.shape() {
                DomainShape::Cube => quadrature::cube_double_gradient(spec, domain, x, q),
                DomainShape::Ball => quadrature::ball_double_gradient(spec, domain, x, q),
            }
        }
        EstimatorMethod::MonteCarlo => Ok(monte_carlo::double_gradient(
            spec, domain, x, cfg, key_point,
        )),
    }
}

/// Estimate of the twice-averaged Hessian, symmetrized on construction.
///
/// Monte Carlo and ball quadrature difference the gradient symmetrically
/// along each coordinate with step `fd_step_factor * radius` under common
/// random numbers; cube quadrature evaluates the equivalent
/// density-derivative form exactly on the grid.
pub fn double_average_hessian(
    spec: &ObjectiveSpec,
    domain: &AveragingDomain,
    x: &[f64],
    cfg: &EstimatorConfig,
) -> Result<SmoothingEstimate> {
    check_inputs(spec, domain, x, cfg)?;
    if domain.radius() < MIN_HESSIAN_RADIUS {
        return Err(Error::DegenerateDomain {
            radius: domain.radius(),
        });
    }
    match cfg.method {
        EstimatorMethod::ClosedForm => reference_smoothed(
            spec,
            domain,
            x,
            SmoothingOrder::Hessian,
            AveragingDepth::Double,
        ),
        EstimatorMethod::Quadrature => {
            check_quadrature_dim(domain.dim())?;
            let q = cfg.quadrature_points_per_axis as usize;
            match domain.shape() {
                DomainShape::Cube => quadrature::cube_double_hessian(spec, domain, x, q),
                DomainShape::Ball => {
                    quadrature::ball_double_hessian(spec, domain, x, q, cfg.fd_step_factor)
                }
            }
        }
        EstimatorMethod::MonteCarlo => Ok(monte_carlo::double_hessian(spec, domain, x, cfg)),
    }
}

#[cfg(test)]
mod tests;
