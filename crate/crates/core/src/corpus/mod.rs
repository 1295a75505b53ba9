//! Lipschitz convex test objectives with value and subgradient oracles,
//! known minimizers, and closed-form smoothed references where available.

mod closed_form;
mod entries;

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub use closed_form::reference_smoothed;
pub(crate) use closed_form::ClosedForm;
pub use entries::SAMPLING_BOX_HALF_WIDTH;

pub type ValueFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type SubgradientFn = Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
pub type KinkDistanceFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A Lipschitz convex objective: oracles plus the ground truth the benchmark
/// checks against.
pub struct ObjectiveSpec {
    name: String,
    dim: usize,
    lipschitz_const: f64,
    value: ValueFn,
    subgradient: SubgradientFn,
    minimizer: Vec<f64>,
    min_value: f64,
    is_convex: bool,
    closed_form: Option<ClosedForm>,
    kink_distance: Option<KinkDistanceFn>,
}

impl core::fmt::Debug for ObjectiveSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ObjectiveSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("lipschitz_const", &self.lipschitz_const)
            .field("is_convex", &self.is_convex)
            .field("has_closed_form", &self.closed_form.is_some())
            .finish()
    }
}

impl ObjectiveSpec {
    pub fn builder(name: &str, dim: usize) -> ObjectiveSpecBuilder {
        ObjectiveSpecBuilder::new(name, dim)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz_const(&self) -> f64 {
        self.lipschitz_const
    }

    pub fn minimizer(&self) -> &[f64] {
        &self.minimizer
    }

    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    pub fn is_convex(&self) -> bool {
        self.is_convex
    }

    pub fn has_closed_form_smoothing(&self) -> bool {
        self.closed_form.is_some()
    }

    pub(crate) fn closed_form(&self) -> Option<&ClosedForm> {
        self.closed_form.as_ref()
    }

    /// Validates that `x` matches the objective dimension.
    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `f(x)`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok((self.value)(x))
    }

    /// A fixed measurable selection of the generalized gradient at `x`.
    pub fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut g = alloc::vec![0.0; self.dim];
        (self.subgradient)(x, &mut g);
        Ok(g)
    }

    /// Oracle call without the dimension check; estimator inner loops.
    #[inline]
    pub fn value_unchecked(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    /// Subgradient into a caller-provided buffer, no dimension check.
    #[inline]
    pub fn subgradient_into_unchecked(&self, x: &[f64], out: &mut [f64]) {
        (self.subgradient)(x, out)
    }

    /// Lower bound on the distance from `x` to the objective's set of
    /// nondifferentiability; infinite for smooth objectives.
    pub fn kink_distance(&self, x: &[f64]) -> f64 {
        match &self.kink_distance {
            Some(f) => f(x),
            None => f64::INFINITY,
        }
    }
}

pub struct ObjectiveSpecBuilder {
    name: String,
    dim: usize,
    lipschitz_const: f64,
    value: Option<ValueFn>,
    subgradient: Option<SubgradientFn>,
    minimizer: Option<Vec<f64>>,
    min_value: f64,
    is_convex: bool,
    closed_form: Option<ClosedForm>,
    kink_distance: Option<KinkDistanceFn>,
}

impl ObjectiveSpecBuilder {
    fn new(name: &str, dim: usize) -> Self {
        ObjectiveSpecBuilder {
            name: name.to_string(),
            dim,
            lipschitz_const: 1.0,
            value: None,
            subgradient: None,
            minimizer: None,
            min_value: 0.0,
            is_convex: true,
            closed_form: None,
            kink_distance: None,
        }
    }

    pub fn lipschitz_const(mut self, l: f64) -> Self {
        self.lipschitz_const = l;
        self
    }

    pub fn value(mut self, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.value = Some(Box::new(f));
        self
    }

    pub fn subgradient(mut self, f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.subgradient = Some(Box::new(f));
        self
    }

    pub fn minimizer(mut self, x: Vec<f64>, min_value: f64) -> Self {
        self.minimizer = Some(x);
        self.min_value = min_value;
        self
    }

    pub fn convex(mut self, yes: bool) -> Self {
        self.is_convex = yes;
        self
    }

    pub(crate) fn closed_form(mut self, form: ClosedForm) -> Self {
        self.closed_form = Some(form);
        self
    }

    pub fn kink_distance(mut self, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.kink_distance = Some(Box::new(f));
        self
    }

    pub fn build(self) -> Result<ObjectiveSpec> {
        if self.dim == 0 {
            return Err(Error::InvalidConfig(
                "objective dimension must be positive".into(),
            ));
        }
        if !self.lipschitz_const.is_finite() || self.lipschitz_const <= 0.0 {
            return Err(Error::InvalidConfig(
                "Lipschitz constant must be positive".into(),
            ));
        }
        let value = self
            .value
            .ok_or_else(|| Error::InvalidConfig("objective needs a value oracle".into()))?;
        let subgradient = self
            .subgradient
            .ok_or_else(|| Error::InvalidConfig("objective needs a subgradient oracle".into()))?;
        let minimizer = self
            .minimizer
            .ok_or_else(|| Error::InvalidConfig("objective needs a known minimizer".into()))?;
        if minimizer.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: minimizer.len(),
            });
        }
        Ok(ObjectiveSpec {
            name: self.name,
            dim: self.dim,
            lipschitz_const: self.lipschitz_const,
            value,
            subgradient,
            minimizer,
            min_value: self.min_value,
            is_convex: self.is_convex,
            closed_form: self.closed_form,
            kink_distance: self.kink_distance,
        })
    }
}

/// Descriptor of a shipped objective family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusDescriptor {
    pub name: &'static str,
    pub min_dim: usize,
    pub max_dim: usize,
    pub default_dim: usize,
    pub is_convex: bool,
    pub has_closed_form_smoothing: bool,
    pub summary: &'static str,
}

/// All shipped objective families.
pub fn list_corpus() -> Vec<CorpusDescriptor> {
    entries::descriptors()
}

/// Instantiate a shipped objective at the given dimension (the family default
/// when `None`).
pub fn get(name: &str, dim: Option<usize>) -> Result<ObjectiveSpec> {
    let canonical = entries::normalize_name(name);
    let descriptor = entries::descriptors()
        .into_iter()
        .find(|d| d.name == canonical)
        .ok_or_else(|| Error::InvalidConfig(alloc::format!("unknown objective `{name}`")))?;
    entries::build(&canonical, dim.unwrap_or(descriptor.default_dim))
}
