//! Serializable run specification: everything needed to reproduce one solver
//! run, round-trippable through its JSON config file.

use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use steklov_core::corpus::{self, ObjectiveSpec};
use steklov_core::smoothing::{
    gradient_norm_bound_constant, AveragingDomain, DomainShape, EstimatorConfig, EstimatorMethod,
};
use steklov_core::solver::{Algorithm, SolverConfig};

use crate::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    Stationary,
    Superlinear,
}

impl From<AlgorithmKind> for Algorithm {
    fn from(k: AlgorithmKind) -> Algorithm {
        match k {
            AlgorithmKind::Stationary => Algorithm::Stationary,
            AlgorithmKind::Superlinear => Algorithm::Superlinear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Ball,
    Cube,
}

impl From<DomainKind> for DomainShape {
    fn from(k: DomainKind) -> DomainShape {
        match k {
            DomainKind::Ball => DomainShape::Ball,
            DomainKind::Cube => DomainShape::Cube,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl From<EstimatorKind> for EstimatorMethod {
    fn from(k: EstimatorKind) -> EstimatorMethod {
        match k {
            EstimatorKind::ClosedForm => EstimatorMethod::ClosedForm,
            EstimatorKind::Quadrature => EstimatorMethod::Quadrature,
            EstimatorKind::MonteCarlo => EstimatorMethod::MonteCarlo,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    /// Corpus objective name.
    pub problem: String,
    /// Objective dimension; the family default when absent.
    pub dim: Option<usize>,
    pub algorithm: AlgorithmKind,
    /// Start point; `(2, ..., 2)` when absent.
    pub x0: Option<Vec<f64>>,
    pub domain: DomainKind,
    pub r0: f64,
    pub shrink: f64,
    pub eps0: f64,
    pub eps_decay: f64,
    /// Superlinear regularization seed; `L/d(D_0)` when absent.
    pub reg0: Option<f64>,
    pub reg_decay: f64,
    pub estimator: EstimatorKind,
    pub samples_outer: u64,
    pub samples_inner: u64,
    pub quadrature_points: u32,
    pub fd_step_factor: f64,
    pub seed: u64,
    pub tol: f64,
    pub max_iters: u32,
    pub max_halvings: u32,
    pub trace: PathBuf,
    pub summary: PathBuf,
    /// Also run the subgradient-descent baseline against the achieved
    /// distance to the known minimizer.
    pub baseline: bool,
    pub baseline_a0: f64,
    pub baseline_max_iters: u64,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            problem: "abs1d".into(),
            dim: None,
            algorithm: AlgorithmKind::Superlinear,
            x0: None,
            domain: DomainKind::Ball,
            r0: 1.0,
            shrink: 0.5,
            eps0: 1.0,
            eps_decay: 0.9,
            reg0: None,
            reg_decay: 0.7,
            estimator: EstimatorKind::ClosedForm,
            samples_outer: 4096,
            samples_inner: 4096,
            quadrature_points: 64,
            fd_step_factor: 0.1,
            seed: 0,
            tol: 1e-6,
            max_iters: 200,
            max_halvings: 40,
            trace: PathBuf::from("trace.csv"),
            summary: PathBuf::from("summary.json"),
            baseline: false,
            baseline_a0: 1.0,
            baseline_max_iters: 200_000,
        }
    }
}

impl RunSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("runspec serializes")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Materialize the objective and the solver configuration. All
    /// resolution failures are configuration errors.
    pub fn resolve(&self) -> Result<(ObjectiveSpec, SolverConfig)> {
        let spec = corpus::get(&self.problem, self.dim)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let x0 = match &self.x0 {
            Some(v) => {
                if v.len() != spec.dim() {
                    return Err(HarnessError::Config(format!(
                        "x0 has {} entries but `{}` has dimension {}",
                        v.len(),
                        spec.name(),
                        spec.dim()
                    )));
                }
                v.clone()
            }
            None => vec![2.0; spec.dim()],
        };
        let shape: DomainShape = self.domain.into();
        let reg0 = match self.reg0 {
            Some(v) => v,
            None => {
                let d0 = AveragingDomain::new(shape, self.r0, spec.dim())
                    .map_err(|e| HarnessError::Config(e.to_string()))?;
                gradient_norm_bound_constant(&d0, spec.lipschitz_const())
            }
        };
        let cfg = SolverConfig {
            algorithm: self.algorithm.into(),
            x0,
            domain_shape: shape,
            r0: self.r0,
            radius_shrink: self.shrink,
            eps0: self.eps0,
            eps_decay: self.eps_decay,
            reg0,
            reg_decay: self.reg_decay,
            step_tol: self.tol,
            max_iters: self.max_iters,
            max_halvings: self.max_halvings,
            estimator: EstimatorConfig {
                method: self.estimator.into(),
                outer_samples: self.samples_outer,
                inner_samples: self.samples_inner,
                quadrature_points_per_axis: self.quadrature_points,
                fd_step_factor: self.fd_step_factor,
                seed: self.seed,
            },
        };
        cfg.validate(&spec)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok((spec, cfg))
    }
}
