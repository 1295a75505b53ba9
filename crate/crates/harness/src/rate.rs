//! Convergence-rate diagnostic: the observed proportionality coefficients
//! between consecutive step norms.

use steklov_core::solver::IterationRecord;

use crate::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    /// `ratios[i] = |step_{i+2}| / |step_{i+1}|` over the recorded steps.
    pub ratios: Vec<f64>,
    /// True iff the last `min(5, len)` ratios strictly decrease and the
    /// final one is below one half.
    pub superlinear_flag: bool,
}

pub fn ratios_from_step_norms(step_norms: &[f64]) -> Vec<f64> {
    step_norms.windows(2).map(|w| w[1] / w[0]).collect()
}

pub fn superlinear_flag(ratios: &[f64]) -> bool {
    if ratios.is_empty() {
        return false;
    }
    let tail = &ratios[ratios.len().saturating_sub(5)..];
    tail.windows(2).all(|w| w[1] < w[0]) && *tail.last().unwrap() < 0.5
}

pub fn estimate_rate(records: &[IterationRecord]) -> Result<RateEstimate> {
    if records.len() < 3 {
        return Err(HarnessError::InsufficientData {
            needed: 3,
            got: records.len(),
        });
    }
    let norms: Vec<f64> = records.iter().map(|r| r.step_norm).collect();
    let ratios = ratios_from_step_norms(&norms);
    let flag = superlinear_flag(&ratios);
    Ok(RateEstimate {
        ratios,
        superlinear_flag: flag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records_with_norms(norms: &[f64]) -> Vec<IterationRecord> {
        norms
            .iter()
            .enumerate()
            .map(|(i, &n)| IterationRecord {
                k: i as u32 + 1,
                s: 0,
                x: vec![0.0],
                surrogate_value: 0.0,
                grad_norm: 0.0,
                step: vec![n],
                step_norm: n,
                l: 0,
                radius: 1.0,
                l_s: 1.0,
                reg_weight: 1.0,
                ratio: 0.0,
            })
            .collect()
    }

    #[test]
    fn geometric_acceleration_is_flagged() {
        let recs = records_with_norms(&[1.0, 0.5, 0.125, 0.0078125]);
        let est = estimate_rate(&recs).unwrap();
        assert_eq!(est.ratios, vec![0.5, 0.25, 0.0625]);
        assert!(est.superlinear_flag);
    }

    #[test]
    fn constant_ratio_is_linear_not_superlinear() {
        let norms: Vec<f64> = (0..10).map(|k| 0.9f64.powi(k)).collect();
        let est = estimate_rate(&records_with_norms(&norms)).unwrap();
        assert!(!est.superlinear_flag);
    }

    #[test]
    fn two_records_are_insufficient() {
        let recs = records_with_norms(&[1.0, 0.5]);
        assert!(matches!(
            estimate_rate(&recs),
            Err(HarnessError::InsufficientData { needed: 3, got: 2 })
        ));
    }
}
