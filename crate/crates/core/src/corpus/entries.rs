//! The shipped test objectives.
//!
//! Every entry is convex, globally or box-Lipschitz, and has its minimizer at
//! the origin. Subgradient selections at nondifferentiable points are fixed:
//! coordinate-wise `|.|` kinks return 0, max-type functions return the
//! gradient of the lowest-index active piece.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

use super::closed_form::ClosedForm;
use super::{CorpusDescriptor, ObjectiveSpec};

/// Sampling box half-width used by the corpus invariant checks; box-Lipschitz
/// constants (the quadratic) are derived for this box.
pub const SAMPLING_BOX_HALF_WIDTH: f64 = 10.0;

pub(super) fn descriptors() -> Vec<CorpusDescriptor> {
    vec![
        CorpusDescriptor {
            name: "abs1d",
            min_dim: 1,
            max_dim: 1,
            default_dim: 1,
            is_convex: true,
            has_closed_form_smoothing: true,
            summary: "f(x) = |x|",
        },
        CorpusDescriptor {
            name: "l1",
            min_dim: 2,
            max_dim: 10,
            default_dim: 3,
            is_convex: true,
            has_closed_form_smoothing: true,
            summary: "f(x) = sum_i |x_i|",
        },
        CorpusDescriptor {
            name: "maxlin",
            min_dim: 1,
            max_dim: 4,
            default_dim: 2,
            is_convex: true,
            has_closed_form_smoothing: false,
            summary: "f(x) = max_i max(x_i, -2 x_i)",
        },
        CorpusDescriptor {
            name: "linf",
            min_dim: 2,
            max_dim: 10,
            default_dim: 2,
            is_convex: true,
            has_closed_form_smoothing: false,
            summary: "f(x) = max_i |x_i|",
        },
        CorpusDescriptor {
            name: "quad",
            min_dim: 1,
            max_dim: 10,
            default_dim: 3,
            is_convex: true,
            has_closed_form_smoothing: true,
            summary: "f(x) = 1/2 sum_i i*x_i^2 (smooth control case)",
        },
        CorpusDescriptor {
            name: "huber-l1",
            min_dim: 1,
            max_dim: 10,
            default_dim: 3,
            is_convex: true,
            has_closed_form_smoothing: false,
            summary: "f(x) = sum_i huber(x_i), delta = 0.25",
        },
    ]
}

pub(super) fn build(name: &str, dim: usize) -> Result<ObjectiveSpec> {
    match name {
        "abs1d" => abs1d(dim),
        "l1" => l1(dim),
        "maxlin" => maxlin(dim),
        "linf" => linf(dim),
        "quad" => quad(dim),
        "huber-l1" | "huberized-l1" => huber_l1(dim),
        _ => Err(Error::InvalidConfig(format!("unknown objective `{name}`"))),
    }
}

fn check_dim_range(name: &str, dim: usize, lo: usize, hi: usize) -> Result<()> {
    if dim < lo || dim > hi {
        return Err(Error::InvalidConfig(format!(
            "objective `{name}` supports dimensions {lo}..={hi}, got {dim}"
        )));
    }
    Ok(())
}

fn abs1d(dim: usize) -> Result<ObjectiveSpec> {
    check_dim_range("abs1d", dim, 1, 1)?;
    sum_abs_spec("abs1d", 1)
}

fn l1(dim: usize) -> Result<ObjectiveSpec> {
    check_dim_range("l1", dim, 2, 10)?;
    sum_abs_spec("l1", dim)
}

fn sum_abs_spec(name: &str, dim: usize) -> Result<ObjectiveSpec> {
    ObjectiveSpec::builder(name, dim)
        .lipschitz_const(math::sqrt(dim as f64))
        .value(|x| x.iter().map(|&v| math::abs(v)).sum())
        .subgradient(|x, g| {
            for (gi, &xi) in g.iter_mut().zip(x) {
                *gi = math::sign(xi);
            }
        })
        .minimizer(vec![0.0; dim], 0.0)
        .closed_form(ClosedForm::SumAbs)
        .kink_distance(|x| {
            x.iter()
                .fold(f64::INFINITY, |m, &v| math::min(m, math::abs(v)))
        })
        .build()
}

/// Pieces of a max of single-coordinate linear functions, `coeff * x[coord]`.
#[derive(Clone)]
struct SparsePieces(Vec<(usize, f64)>);

impl SparsePieces {
    fn value(&self, x: &[f64]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for &(i, c) in &self.0 {
            best = math::max(best, c * x[i]);
        }
        best
    }

    /// Index of the active piece; ties resolve to the lowest index.
    fn active(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut best_v = self.0[0].1 * x[self.0[0].0];
        for (k, &(i, c)) in self.0.iter().enumerate().skip(1) {
            let v = c * x[i];
            if v > best_v {
                best_v = v;
                best = k;
            }
        }
        best
    }

    /// Lower bound on the distance to the nearest tie between the active
    /// piece and any other piece.
    fn tie_margin(&self, x: &[f64]) -> f64 {
        let a = self.active(x);
        let (ia, ca) = self.0[a];
        let va = ca * x[ia];
        let mut margin = f64::INFINITY;
        for (k, &(i, c)) in self.0.iter().enumerate() {
            if k == a {
                continue;
            }
            let gap = va - c * x[i];
            let grad_dist = if i == ia {
                math::abs(ca - c)
            } else {
                math::sqrt(ca * ca + c * c)
            };
            if grad_dist > 0.0 {
                margin = math::min(margin, gap / grad_dist);
            }
        }
        margin
    }
}

fn max_affine_spec(name: &str, dim: usize, pieces: SparsePieces, l: f64) -> Result<ObjectiveSpec> {
    let p_val = pieces.clone();
    let p_grad = pieces.clone();
    let p_kink = pieces;
    ObjectiveSpec::builder(name, dim)
        .lipschitz_const(l)
        .value(move |x| p_val.value(x))
        .subgradient(move |x, g| {
            g.fill(0.0);
            let (i, c) = p_grad.0[p_grad.active(x)];
            g[i] = c;
        })
        .minimizer(vec![0.0; dim], 0.0)
        .kink_distance(move |x| p_kink.tie_margin(x))
        .build()
}

fn maxlin(dim: usize) -> Result<ObjectiveSpec> {
    check_dim_range("maxlin", dim, 1, 4)?;
    let mut pieces = Vec::with_capacity(2 * dim);
    for i in 0..dim {
        pieces.push((i, 1.0));
        pieces.push((i, -2.0));
    }
    max_affine_spec("maxlin", dim, SparsePieces(pieces), 2.0)
}

fn linf(dim: usize) -> Result<ObjectiveSpec> {
    check_dim_range("linf", dim, 2, 10)?;
    let mut pieces = Vec::with_capacity(2 * dim);
    for i in 0..dim {
        pieces.push((i, 1.0));
        pieces.push((i, -1.0));
    }
    max_affine_spec("linf", dim, SparsePieces(pieces), 1.0)
}

fn quad(dim: usize) -> Result<ObjectiveSpec> {
    check_dim_range("quad", dim, 1, 10)?;
    let coeffs: Vec<f64> = (1..=dim).map(|i| i as f64).collect();
    // Gradient A*x peaks at a corner of the sampling box.
    let l = SAMPLING_BOX_HALF_WIDTH * math::sqrt(coeffs.iter().map(|&a| a * a).sum());
    let c_val = coeffs.clone();
    let c_grad = coeffs.clone();
    let c_form = coeffs;
    ObjectiveSpec::builder("quad", dim)
        .lipschitz_const(l)
        .value(move |x| x.iter().zip(&c_val).map(|(&v, &a)| 0.5 * a * v * v).sum())
        .subgradient(move |x, g| {
            for ((gi, &xi), &a) in g.iter_mut().zip(x).zip(&c_grad) {
                *gi = a * xi;
            }
        })
        .minimizer(vec![0.0; dim], 0.0)
        .closed_form(ClosedForm::QuadDiag(c_form))
        .build()
}

pub(super) const HUBER_DELTA: f64 = 0.25;

fn huber_scalar(t: f64, delta: f64) -> f64 {
    let a = math::abs(t);
    if a <= delta {
        t * t / (2.0 * delta)
    } else {
        a - delta / 2.0
    }
}

fn huber_slope(t: f64, delta: f64) -> f64 {
    if math::abs(t) <= delta {
        t / delta
    } else {
        math::sign(t)
    }
}

fn huber_l1(dim: usize) -> Result<ObjectiveSpec> {
    check_dim_range("huber-l1", dim, 1, 10)?;
    ObjectiveSpec::builder("huber-l1", dim)
        .lipschitz_const(math::sqrt(dim as f64))
        .value(|x| x.iter().map(|&v| huber_scalar(v, HUBER_DELTA)).sum())
        .subgradient(|x, g| {
            for (gi, &xi) in g.iter_mut().zip(x) {
                *gi = huber_slope(xi, HUBER_DELTA);
            }
        })
        .minimizer(vec![0.0; dim], 0.0)
        .build()
}

pub(super) fn normalize_name(name: &str) -> String {
    if name == "huberized-l1" {
        String::from("huber-l1")
    } else {
        String::from(name)
    }
}
