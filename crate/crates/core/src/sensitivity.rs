//! Derivative-based global sensitivity indices.
//!
//! With inputs uniform on the unit cube, the index of dimension `k` is the
//! mean squared partial derivative `E[(dg/dx_k)^2]`. It is estimated from the
//! gradients already observed at the training sites, so no extra model
//! evaluations are needed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::SampleSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    /// Raw indices, in squared response units per squared unit-cube length.
    pub raw: Vec<f64>,
    /// Raw indices normalized to sum to one.
    pub normalized: Vec<f64>,
    /// Zero-based dimension indices, most important first.
    pub ranking: Vec<usize>,
}

impl SensitivityResult {
    pub fn dim(&self) -> usize {
        self.raw.len()
    }

    /// Dimension with the largest index.
    pub fn most_important(&self) -> usize {
        self.ranking[0]
    }
}

/// Monte Carlo estimate of the indices from gradient rows in unit-cube
/// coordinates.
pub fn estimate_indices(gradients: &[Vec<f64>]) -> Result<SensitivityResult> {
    let first = gradients
        .first()
        .ok_or_else(|| Error::invalid("no gradients to estimate sensitivities from"))?;
    let n = first.len();
    if n == 0 {
        return Err(Error::invalid("gradients have zero dimensions"));
    }
    let mut raw = vec![0.0; n];
    for g in gradients {
        if g.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: g.len(),
            });
        }
        for (s, v) in raw.iter_mut().zip(g) {
            if !v.is_finite() {
                return Err(Error::invalid(format!("non-finite gradient component {v}")));
            }
            *s += v * v;
        }
    }
    let count = gradients.len() as f64;
    raw.iter_mut().for_each(|s| *s /= count);

    let total: f64 = raw.iter().sum();
    let normalized = if total > 0.0 {
        raw.iter().map(|s| s / total).collect()
    } else {
        vec![1.0 / n as f64; n]
    };
    let mut ranking: Vec<usize> = (0..n).collect();
    // stable sort keeps ascending index order among ties
    ranking.sort_by(|&a, &b| normalized[b].total_cmp(&normalized[a]));
    Ok(SensitivityResult {
        raw,
        normalized,
        ranking,
    })
}

/// Indices from the gradients stored in a training set.
pub fn from_samples(data: &SampleSet) -> Result<SensitivityResult> {
    let grads = data
        .gradients()
        .ok_or_else(|| Error::invalid("sample set has no gradient columns"))?;
    estimate_indices(&grads)
}
