//! Monte Carlo estimators.
//!
//! The double average is estimated in its nested form: an outer set of
//! translation samples, and for each outer sample an independent inner set.
//! Standard errors come from the spread of the per-outer-group means. All
//! offsets are drawn from the counter-based sampler keyed at `key_point`, so
//! estimates evaluated at shifted points with the same key share their sample
//! sets exactly (common random numbers), which is what the finite-difference
//! Hessian relies on.

use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::ObjectiveSpec;
use crate::linalg::Matrix;
use crate::math;

use super::sampling::{SampleKey, StreamKey};
use super::{indexed_partials, AveragingDomain, EstimatorConfig, SmoothingEstimate};

const STREAM_SINGLE: u64 = 0;
const STREAM_OUTER: u64 = 1;
const STREAM_INNER_BASE: u64 = 2;

/// Online mean/variance accumulator (Welford); deterministic for a fixed
/// push order.
#[derive(Clone, Copy)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn new() -> Self {
        Moments {
            count: 0.0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    #[inline]
    fn push(&mut self, v: f64) {
        self.count += 1.0;
        let d = v - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (v - self.mean);
    }

    /// Variance of the sample mean.
    fn variance_of_mean(&self) -> f64 {
        if self.count < 2.0 {
            return 0.0;
        }
        math::max(self.m2, 0.0) / (self.count * (self.count - 1.0))
    }
}

fn combined_stderr(moments: &[Moments]) -> f64 {
    math::sqrt(moments.iter().map(|m| m.variance_of_mean()).sum())
}

pub(super) fn single_value(
    spec: &ObjectiveSpec,
    domain: &AveragingDomain,
    x: &[f64],
    cfg: &EstimatorConfig,
) -> SmoothingEstimate {
    let stream = SampleKey::new(cfg.seed, x).stream(STREAM_SINGLE);
    let m = cfg.inner_samples;
    let n = x.len();
    let mut offset = vec![0.0; n];
    let mut pt = vec![0.0; n];
    let mut acc = Moments::new();
    for i in 0..m {
        stream.domain_offset(domain.shape(), domain.radius(), i, &mut offset);
        for k in 0..n {
            pt[k] = x[k] + offset[k];
        }
        acc.push(spec.value_unchecked(&pt));
    }
    SmoothingEstimate::value_estimate(acc.mean, m, math::sqrt(acc.variance_of_mean()))
}

pub(super) fn single_gradient(
    spec: &ObjectiveSpec,
    domain: &AveragingDomain,
    x: &[f64],
    cfg: &EstimatorConfig,
) -> SmoothingEstimate {
    let stream = SampleKey::new(cfg.seed, x).stream(STREAM_SINGLE);
    let m = cfg.inner_samples;
    let n = x.len();
    let mut offset = vec![0.0; n];
    let mut pt = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut acc = vec![Moments::new(); n];
    for i in 0..m {
        stream.domain_offset(domain.shape(), domain.radius(), i, &mut offset);
        for k in 0..n {
            pt[k] = x[k] + offset[k];
        }
        spec.subgradient_into_unchecked(&pt, &mut g);
        for k in 0..n {
            acc[k].push(g[k]);
        }
    }
    let grad: Vec<f64> = acc.iter().map(|a| a.mean).collect();
    SmoothingEstimate::gradient_estimate(grad, m, combined_stderr(&acc))
}

/// Inner sample stream for the `j`-th outer group.
#[inline]
fn inner_stream(key: &SampleKey, j: u64) -> StreamKey {
    key.stream(STREAM_INNER_BASE + j)
}

pub(super) fn double_value(
    spec: &ObjectiveSpec,
    domain: &AveragingDomain,
    x: &[f64],
    cfg: &EstimatorConfig,
    key_point: &[f64],
) -> SmoothingEstimate {
    let key = SampleKey::new(cfg.seed, key_point);
    let outer_stream = key.stream(STREAM_OUTER);
    let (n_outer, m_inner) = (cfg.outer_samples, cfg.inner_samples);
    let n = x.len();
    let shape = domain.shape();
    let r = domain.radius();
    let group_means = indexed_partials(n_outer as usize, |j| {
        let mut z = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut pt = vec![0.0; n];
        outer_stream.domain_offset(shape, r, j as u64, &mut z);
        let inner = inner_stream(&key, j as u64);
        let mut sum = 0.0;
        for m in 0..m_inner {
            inner.domain_offset(shape, r, m, &mut y);
            for k in 0..n {
                pt[k] = x[k] + z[k] + y[k];
            }
            sum += spec.value_unchecked(&pt);
        }
        sum / m_inner as f64
    });
    let mut acc = Moments::new();
    for g in &group_means {
        acc.push(*g);
    }
    SmoothingEstimate::value_estimate(
        acc.mean,
        n_outer * m_inner,
        math::sqrt(acc.variance_of_mean()),
    )
}

pub(super) fn double_gradient(
    spec: &ObjectiveSpec,
    domain: &AveragingDomain,
    x: &[f64],
    cfg: &EstimatorConfig,
    key_point: &[f64],
) -> SmoothingEstimate {
    let key = SampleKey::new(cfg.seed, key_point);
    let outer_stream = key.stream(STREAM_OUTER);
    let (n_outer, m_inner) = (cfg.outer_samples, cfg.inner_samples);
    let n = x.len();
    let shape = domain.shape();
    let r = domain.radius();
    let groups = indexed_partials(n_outer as usize, |j| {
        let mut z = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut pt = vec![0.0; n];
        let mut g = vec![0.0; n];
        let mut sum = vec![0.0; n];
        outer_stream.domain_offset(shape, r, j as u64, &mut z);
        let inner = inner_stream(&key, j as u64);
        for m in 0..m_inner {
            inner.domain_offset(shape, r, m, &mut y);
            for k in 0..n {
                pt[k] = x[k] + z[k] + y[k];
            }
            spec.subgradient_into_unchecked(&pt, &mut g);
            for k in 0..n {
                sum[k] += g[k];
            }
        }
        for s in sum.iter_mut() {
            *s /= m_inner as f64;
        }
        sum
    });
    let mut acc = vec![Moments::new(); n];
    for row in &groups {
        for k in 0..n {
            acc[k].push(row[k]);
        }
    }
    let grad: Vec<f64> = acc.iter().map(|a| a.mean).collect();
    SmoothingEstimate::gradient_estimate(grad, n_outer * m_inner, combined_stderr(&acc))
}

/// Symmetric differences of the nested gradient along each coordinate, all
/// 2n shifted evaluations sharing one offset set keyed at `x`.
pub(super) fn double_hessian(
    spec: &ObjectiveSpec,
    domain: &AveragingDomain,
    x: &[f64],
    cfg: &EstimatorConfig,
) -> SmoothingEstimate {
    let key = SampleKey::new(cfg.seed, x);
    let outer_stream = key.stream(STREAM_OUTER);
    let (n_outer, m_inner) = (cfg.outer_samples, cfg.inner_samples);
    let n = x.len();
    let shape = domain.shape();
    let r = domain.radius();
    let h = cfg.fd_step_factor * r;
    let scale = 1.0 / (m_inner as f64 * 2.0 * h);
    let groups = indexed_partials(n_outer as usize, |j| {
        let mut z = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut pt = vec![0.0; n];
        let mut g = vec![0.0; n];
        // row-major difference quotients: quot[k][col]
        let mut quot = vec![0.0; n * n];
        outer_stream.domain_offset(shape, r, j as u64, &mut z);
        let inner = inner_stream(&key, j as u64);
        for m in 0..m_inner {
            inner.domain_offset(shape, r, m, &mut y);
            for k in 0..n {
                pt[k] = x[k] + z[k] + y[k];
            }
            for col in 0..n {
                let base = pt[col];
                pt[col] = base + h;
                spec.subgradient_into_unchecked(&pt, &mut g);
                for k in 0..n {
                    quot[k * n + col] += g[k];
                }
                pt[col] = base - h;
                spec.subgradient_into_unchecked(&pt, &mut g);
                for k in 0..n {
                    quot[k * n + col] -= g[k];
                }
                pt[col] = base;
            }
        }
        for qv in quot.iter_mut() {
            *qv *= scale;
        }
        quot
    });
    let mut acc = vec![Moments::new(); n * n];
    for row in &groups {
        for (a, &v) in acc.iter_mut().zip(row.iter()) {
            a.push(v);
        }
    }
    let h_mat = Matrix::from_fn(n, |i, j| acc[i * n + j].mean);
    SmoothingEstimate::hessian_estimate(h_mat, n_outer * m_inner, combined_stderr(&acc))
}
