//! Classical subgradient descent with the `a_k = a0/k` step rule, used as
//! the comparison target for the Newton-type methods.

use steklov_core::corpus::ObjectiveSpec;
use steklov_core::linalg;

use crate::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOutcome {
    /// Iterations needed to bring the Euclidean distance to the known
    /// minimizer at or below the target; `None` if the budget ran out.
    pub iterations_to_target: Option<u64>,
    pub x_final: Vec<f64>,
    /// Objective value at every visited iterate, starting with `f(x0)`.
    pub f_values: Vec<f64>,
    pub best_distance: f64,
}

pub fn run_baseline_subgradient(
    spec: &ObjectiveSpec,
    x0: &[f64],
    a0: f64,
    max_iters: u64,
    target_distance: f64,
) -> Result<BaselineOutcome> {
    if !spec.is_convex() {
        return Err(HarnessError::Config(format!(
            "baseline requires a convex objective, `{}` is not",
            spec.name()
        )));
    }
    if !a0.is_finite() || a0 <= 0.0 {
        return Err(HarnessError::Config(
            "baseline step constant must be positive".into(),
        ));
    }
    spec.check_dim(x0)
        .map_err(|e| HarnessError::Config(e.to_string()))?;

    let mut x = x0.to_vec();
    let mut f_values = Vec::new();
    let mut best_distance = f64::INFINITY;
    let mut iterations_to_target = None;
    for k in 0..=max_iters {
        let dist = linalg::norm(&linalg::sub(spec.minimizer(), &x));
        best_distance = best_distance.min(dist);
        f_values.push(spec.evaluate(&x).map_err(HarnessError::Core)?);
        if dist <= target_distance {
            iterations_to_target = Some(k);
            break;
        }
        if k == max_iters {
            break;
        }
        let g = spec.subgradient(&x).map_err(HarnessError::Core)?;
        let step = a0 / (k + 1) as f64;
        for i in 0..x.len() {
            x[i] -= step * g[i];
        }
    }
    Ok(BaselineOutcome {
        iterations_to_target,
        x_final: x,
        f_values,
        best_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use steklov_core::corpus;

    #[test]
    fn counts_iterations_to_a_loose_target() {
        let spec = corpus::get("abs1d", None).unwrap();
        let out = run_baseline_subgradient(&spec, &[1.0], 1.0, 10_000, 1e-2).unwrap();
        let n = out.iterations_to_target.expect("reachable target");
        assert!(n > 0);
        assert!(out.best_distance <= 1e-2);
    }

    #[test]
    fn gradient_descent_on_quadratics_decreases_monotonically() {
        // step a_k = a0/k with a0 <= 1/eig_max keeps plain descent monotone
        let spec = corpus::get("quad", Some(3)).unwrap();
        let a0 = 1.0 / 3.0;
        let out = run_baseline_subgradient(&spec, &[2.0, -1.0, 1.5], a0, 500, 1e-12).unwrap();
        for w in out.f_values.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn starting_at_the_minimizer_needs_zero_iterations() {
        let spec = corpus::get("l1", Some(2)).unwrap();
        let out = run_baseline_subgradient(&spec, &[0.0, 0.0], 1.0, 10, 1e-3).unwrap();
        assert_eq!(out.iterations_to_target, Some(0));
    }

    #[test]
    fn nonconvex_objectives_are_rejected() {
        let spec = steklov_core::corpus::ObjectiveSpec::builder("cave", 1)
            .lipschitz_const(1.0)
            .value(|x| -x[0].abs())
            .subgradient(|x, g| g[0] = -x[0].signum())
            .minimizer(vec![0.0], 0.0)
            .convex(false)
            .build()
            .unwrap();
        assert!(run_baseline_subgradient(&spec, &[1.0], 1.0, 10, 1e-3).is_err());
    }
}
