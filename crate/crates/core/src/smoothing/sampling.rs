//! Counter-based uniform sampling in the averaging domain.
//!
//! Every draw is a pure function of `(seed, query-point hash, stream,
//! sample index)`, so estimates at different points are reproducible
//! independently of call order, and sample loops can be partitioned across
//! workers without coordination.

use crate::math;

use super::DomainShape;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Root key for all draws belonging to one (seed, query point) pair.
#[derive(Debug, Clone, Copy)]
pub struct SampleKey {
    state: u64,
}

impl SampleKey {
    pub fn new(seed: u64, point: &[f64]) -> Self {
        let mut h = mix(seed);
        for &c in point {
            h = mix(h ^ c.to_bits());
        }
        SampleKey { state: h }
    }

    pub fn stream(&self, stream: u64) -> StreamKey {
        StreamKey {
            state: mix(self.state ^ stream.wrapping_mul(GOLDEN)),
        }
    }
}

/// One independent sample stream; draws are indexed, not sequential.
#[derive(Debug, Clone, Copy)]
pub struct StreamKey {
    state: u64,
}

impl StreamKey {
    #[inline]
    fn raw(&self, index: u64) -> u64 {
        mix(self.state.wrapping_add(index.wrapping_mul(GOLDEN)))
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    fn unit(&self, index: u64) -> f64 {
        (self.raw(index) >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform in `(0, 1]`, safe for logarithms.
    #[inline]
    fn unit_open(&self, index: u64) -> f64 {
        ((self.raw(index) >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal via Box-Muller (one of the pair).
    #[inline]
    fn gaussian(&self, index: u64) -> f64 {
        let u1 = self.unit_open(2 * index);
        let u2 = self.unit(2 * index + 1);
        math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * math::PI * u2)
    }

    /// Slots of the underlying counter consumed per sample.
    #[inline]
    pub fn stride(dim: usize) -> u64 {
        2 * dim as u64 + 1
    }

    /// Writes the `sample`-th uniform draw from the domain into `out`.
    ///
    /// Cube: independent uniforms per coordinate. Ball: Gaussian direction
    /// scaled by `r * U^(1/n)`; in one dimension this degenerates to the
    /// interval and a single uniform is used.
    pub fn domain_offset(&self, shape: DomainShape, radius: f64, sample: u64, out: &mut [f64]) {
        let n = out.len();
        let base = sample * Self::stride(n);
        match shape {
            DomainShape::Cube => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = (2.0 * self.unit(base + i as u64) - 1.0) * radius;
                }
            }
            DomainShape::Ball if n == 1 => {
                out[0] = (2.0 * self.unit(base) - 1.0) * radius;
            }
            DomainShape::Ball => {
                let mut norm_sq = 0.0;
                for (i, o) in out.iter_mut().enumerate() {
                    let g = self.gaussian(base / 2 + i as u64);
                    *o = g;
                    norm_sq += g * g;
                }
                let norm = math::sqrt(norm_sq);
                let u = self.unit(base + 2 * n as u64);
                let scale = if norm > 0.0 {
                    radius * math::pow(u, 1.0 / n as f64) / norm
                } else {
                    0.0
                };
                for o in out.iter_mut() {
                    *o *= scale;
                }
            }
        }
    }
}
