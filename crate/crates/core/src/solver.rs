//! Newton-type minimization on the twice-averaged objective.
//!
//! Both methods iterate on the regularized surrogate anchored at the current
//! point: compute the Newton step, accept the largest halved step satisfying
//! the sufficient-decrease inequality
//!
//! ```text
//! F(x + 2^-l d) <= F(x) - 2^(-2l) * (w/2) * |d|^2
//! ```
//!
//! and then update the averaging radius.
//!
//! The stationary-point search regularizes with the Hessian norm bound
//! `L_s = L/d(D_s)` and shrinks the averaging set only while the coherence
//! inequality `3 |d_k| / d(D_s') < eps_k` keeps holding for the shrunken
//! set, one shrink factor per iteration. The superlinear method regularizes
//! with a separately decaying weight and shrinks the set when
//! `L_s |d_{k+1}| <= eps_{k+1}` signals that the steps have outrun the
//! current averaging scale.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::corpus::ObjectiveSpec;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{newton_direction, RegularizedSurrogate};
use crate::smoothing::{
    gradient_norm_bound_constant, AveragingDomain, DomainShape, EstimatorConfig, EstimatorMethod,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Stationary-point search with `L_s`-regularization.
    Stationary,
    /// Superlinear method with a decaying regularization weight.
    Superlinear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub x0: Vec<f64>,
    pub domain_shape: DomainShape,
    /// Initial averaging radius.
    pub r0: f64,
    /// Geometric radius factor per shrink, in (0, 1).
    pub radius_shrink: f64,
    /// Coherence tolerance schedule `eps_k = eps0 * eps_decay^k`.
    pub eps0: f64,
    pub eps_decay: f64,
    /// Superlinear regularization schedule `reg0 * reg_decay^k`.
    pub reg0: f64,
    pub reg_decay: f64,
    /// Stop once the Newton step norm drops below this.
    pub step_tol: f64,
    pub max_iters: u32,
    /// Cap on the halving exponent of the line search.
    pub max_halvings: u32,
    pub estimator: EstimatorConfig,
}

impl SolverConfig {
    /// Defaults matched to `spec`: start at (2, ..., 2), unit ball, and the
    /// superlinear weight seeded with the initial Hessian norm bound.
    pub fn defaults_for(spec: &ObjectiveSpec, algorithm: Algorithm) -> Self {
        let r0 = 1.0;
        let d0 =
            AveragingDomain::new(DomainShape::Ball, r0, spec.dim()).expect("unit ball is valid");
        SolverConfig {
            algorithm,
            x0: alloc::vec![2.0; spec.dim()],
            domain_shape: DomainShape::Ball,
            r0,
            radius_shrink: 0.5,
            eps0: 1.0,
            eps_decay: 0.9,
            reg0: gradient_norm_bound_constant(&d0, spec.lipschitz_const()),
            reg_decay: 0.7,
            step_tol: 1e-6,
            max_iters: 200,
            max_halvings: 40,
            estimator: EstimatorConfig {
                method: EstimatorMethod::ClosedForm,
                ..EstimatorConfig::default()
            },
        }
    }

    pub fn validate(&self, spec: &ObjectiveSpec) -> Result<()> {
        if self.x0.len() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                found: self.x0.len(),
            });
        }
        let in_unit = |v: f64| v > 0.0 && v < 1.0;
        if !self.r0.is_finite() || self.r0 <= 0.0 {
            return Err(Error::InvalidConfig("r0 must be positive".into()));
        }
        if !in_unit(self.radius_shrink) {
            return Err(Error::InvalidConfig(
                "radius_shrink must lie in (0, 1)".into(),
            ));
        }
        if !self.eps0.is_finite() || self.eps0 <= 0.0 || !in_unit(self.eps_decay) {
            return Err(Error::InvalidConfig(
                "eps schedule must decay to zero".into(),
            ));
        }
        if !self.reg0.is_finite() || self.reg0 <= 0.0 || !in_unit(self.reg_decay) {
            return Err(Error::InvalidConfig(
                "reg schedule must decay to zero".into(),
            ));
        }
        if !self.step_tol.is_finite() || self.step_tol <= 0.0 {
            return Err(Error::InvalidConfig("step_tol must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive".into()));
        }
        self.estimator.validate()
    }
}

/// Per-iteration trace entry; `x` is the point the step was computed at.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: u32,
    /// Radius index: the averaging radius is `r0 * shrink^s`.
    pub s: u32,
    pub x: Vec<f64>,
    /// Surrogate value at the anchor, i.e. the double average at `x`.
    pub surrogate_value: f64,
    pub grad_norm: f64,
    pub step: Vec<f64>,
    pub step_norm: f64,
    /// Accepted halving exponent; zero for terminal records.
    pub l: u32,
    pub radius: f64,
    /// Hessian norm bound `L/d(D_s)` at this radius.
    pub l_s: f64,
    /// Regularization weight of the surrogate this iteration.
    pub reg_weight: f64,
    /// `|step_k| / |step_{k-1}|`; zero for the first record.
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    StepTol,
    MaxIters,
    LineSearchExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub x_final: Vec<f64>,
    pub records: Vec<IterationRecord>,
    pub stop_reason: StopReason,
    /// Containment radius of the final doubled averaging set.
    pub eps2d_radius: f64,
}

/// Geometric radius schedule `r_s = r0 * gamma^s` over a fixed shape.
#[derive(Debug, Clone, Copy)]
pub struct RadiusSchedule {
    shape: DomainShape,
    r0: f64,
    gamma: f64,
    dim: usize,
}

impl RadiusSchedule {
    pub fn new(shape: DomainShape, r0: f64, gamma: f64, dim: usize) -> Self {
        RadiusSchedule {
            shape,
            r0,
            gamma,
            dim,
        }
    }

    pub fn radius(&self, s: u32) -> f64 {
        self.r0 * crate::math::powi(self.gamma, s)
    }

    pub fn domain(&self, s: u32) -> Result<AveragingDomain> {
        AveragingDomain::new(self.shape, self.radius(s), self.dim)
    }

    pub fn diameter(&self, s: u32) -> f64 {
        match self.shape {
            DomainShape::Ball => 2.0 * self.radius(s),
            DomainShape::Cube => 2.0 * self.radius(s) * crate::math::sqrt(self.dim as f64),
        }
    }
}

/// Newton step of the surrogate at `x`: solves `H d = -g` for the surrogate's
/// Hessian and gradient there.
pub fn newton_step(surrogate: &RegularizedSurrogate<'_>, x: &[f64]) -> Result<Vec<f64>> {
    let g = surrogate.gradient(x)?;
    let h = surrogate.hessian(x)?;
    newton_direction(&h, &g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchOutcome {
    pub l: u32,
    pub x_next: Vec<f64>,
}

/// Finds the smallest halving exponent `l` in `[0, max_halvings]` with
/// `F(x + 2^-l step) <= F(x) - 2^(-2l) (w/2) |step|^2` where
/// `w = decrease_weight`.
pub fn line_search(
    surrogate: &RegularizedSurrogate<'_>,
    x: &[f64],
    step: &[f64],
    decrease_weight: f64,
    max_halvings: u32,
) -> Result<LineSearchOutcome> {
    let step_norm_sq = linalg::dot(step, step);
    if step_norm_sq == 0.0 {
        return Err(Error::InvalidConfig(
            "line search needs a nonzero step".into(),
        ));
    }
    let f0 = surrogate.value(x)?;
    let mut alpha = 1.0;
    for l in 0..=max_halvings {
        let candidate = linalg::add_scaled(x, alpha, step);
        let f = surrogate.value(&candidate)?;
        if f <= f0 - alpha * alpha * 0.5 * decrease_weight * step_norm_sq {
            return Ok(LineSearchOutcome {
                l,
                x_next: candidate,
            });
        }
        alpha *= 0.5;
    }
    Err(Error::LineSearchExhausted { max_halvings })
}

/// Radius update of the stationary-point search: shrink the averaging set by
/// one factor when the coherence inequality `3 |step| / d(D_{s+1}) < eps_k`
/// still holds for the shrunken set; otherwise hold the radius and let the
/// shrinking regularization bring the step down first.
pub fn coherence_update_stationary(
    step_norm: f64,
    eps_k: f64,
    s: u32,
    schedule: &RadiusSchedule,
) -> u32 {
    if 3.0 * step_norm / schedule.diameter(s + 1) < eps_k {
        s + 1
    } else {
        s
    }
}

/// Shrink trigger of the superlinear method: fires when the incoming step
/// norm has dropped below `eps_next / L_s`.
pub fn coherence_trigger_superlinear(l_s: f64, next_step_norm: f64, eps_next: f64) -> bool {
    l_s * next_step_norm <= eps_next
}

/// True iff the objective's known stationary point lies in `x + factor * D`.
pub fn check_eps_stationarity(
    x: &[f64],
    domain: &AveragingDomain,
    spec: &ObjectiveSpec,
    factor: f64,
) -> bool {
    let diff = linalg::sub(spec.minimizer(), x);
    domain.contains_scaled(&diff, factor)
}

/// Monte Carlo sample budget doubles with every radius shrink: the
/// subgradient averages get noisier relative to the kink spacing as the set
/// shrinks. The doubling alternates between the outer and inner counts so
/// the total budget (their product) doubles per increment, and both counts
/// are capped to keep late iterations affordable. Deterministic estimators
/// are unaffected.
fn effective_estimator(base: &EstimatorConfig, s: u32) -> EstimatorConfig {
    if base.method != EstimatorMethod::MonteCarlo || s == 0 {
        return base.clone();
    }
    const EACH_CAP: u64 = 1 << 17;
    const TOTAL_CAP: u64 = 1 << 22;
    let grow = s.min(34) as u64;
    let mut cfg = base.clone();
    cfg.outer_samples = base
        .outer_samples
        .saturating_mul(1 << grow.div_ceil(2))
        .min(EACH_CAP);
    cfg.inner_samples = base
        .inner_samples
        .saturating_mul(1 << (grow / 2))
        .min(EACH_CAP);
    while cfg.outer_samples.saturating_mul(cfg.inner_samples) > TOTAL_CAP {
        if cfg.outer_samples >= cfg.inner_samples {
            cfg.outer_samples /= 2;
        } else {
            cfg.inner_samples /= 2;
        }
    }
    cfg.outer_samples = cfg
        .outer_samples
        .max(base.outer_samples.min(EACH_CAP))
        .max(1);
    cfg.inner_samples = cfg
        .inner_samples
        .max(base.inner_samples.min(EACH_CAP))
        .max(1);
    cfg
}

/// Stationary-point search (`L_s`-regularized).
pub fn run_stationary_search(spec: &ObjectiveSpec, cfg: &SolverConfig) -> Result<SolverResult> {
    if cfg.algorithm != Algorithm::Stationary {
        return Err(Error::InvalidConfig(
            "config built for a different algorithm".into(),
        ));
    }
    cfg.validate(spec)?;
    let schedule = RadiusSchedule::new(cfg.domain_shape, cfg.r0, cfg.radius_shrink, spec.dim());
    let mut x = cfg.x0.clone();
    let mut s: u32 = 0;
    let mut prev_step_norm: Option<f64> = None;
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut stop = StopReason::MaxIters;

    for k in 1..=cfg.max_iters {
        let eps_k = cfg.eps0 * crate::math::powi(cfg.eps_decay, k);
        let domain = schedule.domain(s)?;
        let l_s = gradient_norm_bound_constant(&domain, spec.lipschitz_const());
        let estimator = effective_estimator(&cfg.estimator, s);
        let surrogate = RegularizedSurrogate::new(spec, domain, estimator, x.clone(), l_s)?;
        let g = surrogate.gradient(&x)?;
        let h = surrogate.hessian(&x)?;
        let step = newton_direction(&h, &g)?;
        let step_norm = linalg::norm(&step);
        let ratio = prev_step_norm.map_or(0.0, |p| step_norm / p);
        let value = surrogate.value(&x)?;
        let mut record = IterationRecord {
            k,
            s,
            x: x.clone(),
            surrogate_value: value,
            grad_norm: linalg::norm(&g),
            step: step.clone(),
            step_norm,
            l: 0,
            radius: schedule.radius(s),
            l_s,
            reg_weight: l_s,
            ratio,
        };
        if step_norm < cfg.step_tol {
            records.push(record);
            stop = StopReason::StepTol;
            break;
        }
        if k == cfg.max_iters {
            records.push(record);
            stop = StopReason::MaxIters;
            break;
        }
        match line_search(&surrogate, &x, &step, l_s, cfg.max_halvings) {
            Ok(outcome) => {
                record.l = outcome.l;
                records.push(record);
                x = outcome.x_next;
            }
            Err(Error::LineSearchExhausted { .. }) => {
                record.l = cfg.max_halvings;
                records.push(record);
                stop = StopReason::LineSearchExhausted;
                break;
            }
            Err(e) => return Err(e),
        }
        prev_step_norm = Some(step_norm);
        s = coherence_update_stationary(step_norm, eps_k, s, &schedule);
    }

    finish(records, stop, schedule)
}

/// Superlinear method; requires a convex objective.
pub fn run_superlinear(spec: &ObjectiveSpec, cfg: &SolverConfig) -> Result<SolverResult> {
    if cfg.algorithm != Algorithm::Superlinear {
        return Err(Error::InvalidConfig(
            "config built for a different algorithm".into(),
        ));
    }
    if !spec.is_convex() {
        return Err(Error::NotConvex {
            objective: spec.name().to_string(),
        });
    }
    cfg.validate(spec)?;
    let schedule = RadiusSchedule::new(cfg.domain_shape, cfg.r0, cfg.radius_shrink, spec.dim());
    let mut x = cfg.x0.clone();
    let mut s: u32 = 0;
    let mut reg = cfg.reg0;
    let mut prev_step_norm: Option<f64> = None;
    let mut prev_ratio: Option<f64> = None;
    let mut consecutive_ratio_rises: u32 = 0;
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut stop = StopReason::MaxIters;

    for k in 1..=cfg.max_iters {
        let eps_k = cfg.eps0 * crate::math::powi(cfg.eps_decay, k);
        // The decay pauses while the observed step ratios keep rising, which
        // guards the coherence between the weight and the contraction rate.
        if consecutive_ratio_rises < 3 {
            reg *= cfg.reg_decay;
        }
        let lambda = reg;

        let mut domain = schedule.domain(s)?;
        let mut l_s = gradient_norm_bound_constant(&domain, spec.lipschitz_const());
        let mut surrogate = RegularizedSurrogate::new(
            spec,
            domain,
            effective_estimator(&cfg.estimator, s),
            x.clone(),
            lambda,
        )?;
        let mut g = surrogate.gradient(&x)?;
        let mut h = surrogate.hessian(&x)?;
        let mut step = newton_direction(&h, &g)?;
        let mut step_norm = linalg::norm(&step);

        // Shrink trigger: once the incoming step has fallen below the scale
        // of the current averaging set, refine the set and recompute the
        // step against it (one shrink per iteration).
        if k > 1 && coherence_trigger_superlinear(l_s, step_norm, eps_k) {
            s += 1;
            domain = schedule.domain(s)?;
            l_s = gradient_norm_bound_constant(&domain, spec.lipschitz_const());
            surrogate = RegularizedSurrogate::new(
                spec,
                domain,
                effective_estimator(&cfg.estimator, s),
                x.clone(),
                lambda,
            )?;
            g = surrogate.gradient(&x)?;
            h = surrogate.hessian(&x)?;
            step = newton_direction(&h, &g)?;
            step_norm = linalg::norm(&step);
        }

        let ratio = prev_step_norm.map_or(0.0, |p| step_norm / p);
        let value = surrogate.value(&x)?;
        let mut record = IterationRecord {
            k,
            s,
            x: x.clone(),
            surrogate_value: value,
            grad_norm: linalg::norm(&g),
            step: step.clone(),
            step_norm,
            l: 0,
            radius: schedule.radius(s),
            l_s,
            reg_weight: lambda,
            ratio,
        };
        if step_norm < cfg.step_tol {
            records.push(record);
            stop = StopReason::StepTol;
            break;
        }
        if k == cfg.max_iters {
            records.push(record);
            stop = StopReason::MaxIters;
            break;
        }
        match line_search(&surrogate, &x, &step, lambda, cfg.max_halvings) {
            Ok(outcome) => {
                record.l = outcome.l;
                records.push(record);
                x = outcome.x_next;
            }
            Err(Error::LineSearchExhausted { .. }) => {
                record.l = cfg.max_halvings;
                records.push(record);
                stop = StopReason::LineSearchExhausted;
                break;
            }
            Err(e) => return Err(e),
        }

        if let (Some(r_prev), true) = (prev_ratio, ratio > 0.0) {
            if ratio > r_prev {
                consecutive_ratio_rises += 1;
            } else {
                consecutive_ratio_rises = 0;
            }
        }
        if ratio > 0.0 {
            prev_ratio = Some(ratio);
        }
        prev_step_norm = Some(step_norm);
    }

    finish(records, stop, schedule)
}

fn finish(
    records: Vec<IterationRecord>,
    stop: StopReason,
    _schedule: RadiusSchedule,
) -> Result<SolverResult> {
    let last = records
        .last()
        .ok_or_else(|| Error::InvalidConfig("solver produced no iterations".into()))?;
    Ok(SolverResult {
        x_final: last.x.clone(),
        eps2d_radius: 2.0 * last.radius,
        stop_reason: stop,
        records,
    })
}
