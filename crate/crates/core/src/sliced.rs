//! Sliced likelihood.
//!
//! The training set is cut into `m` slices along one input dimension. The
//! joint density of the slices is approximated by keeping the joint factors
//! of `k` consecutive slices (a *k-appendant* likelihood):
//!
//! ```text
//! f(y_1..y_m) ~ f(y_1..y_k) * prod_{i=2}^{m-k+1} f(y_i..y_{i+k-1}) / f(y_i..y_{i+k-2})
//! ```
//!
//! Only the window matrices of `k` slices have to be factored, which is far
//! cheaper than factoring the full GEK matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gek::{self, profile_windows, Profile, Window};
use crate::kernels::KernelParams;
use crate::sampling::SampleSet;

/// Slice count used when none is requested.
pub const DEFAULT_SLICES: usize = 10;

/// Partition of the training sites into slices along one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceLayout {
    dim: usize,
    boundaries: Vec<f64>,
    members: Vec<Vec<usize>>,
}

/// Compact description of a layout for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutSummary {
    pub slices: usize,
    pub dim: usize,
    pub sizes: Vec<usize>,
    pub boundaries: Vec<f64>,
}

impl SliceLayout {
    pub fn slices(&self) -> usize {
        self.members.len()
    }

    /// Zero-based slicing dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `a_0 = 0 < a_1 < ... < a_m = 1`.
    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Sample indices per slice, ordered by the slicing coordinate.
    pub fn members(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    pub fn summary(&self) -> LayoutSummary {
        LayoutSummary {
            slices: self.slices(),
            dim: self.dim,
            sizes: self.sizes(),
            boundaries: self.boundaries.clone(),
        }
    }

    pub(crate) fn windows(&self, appendant: usize) -> Vec<Window<'_>> {
        let m = self.slices();
        let segments: Vec<&[usize]> = self.members.iter().map(Vec::as_slice).collect();
        if m <= appendant {
            return vec![Window { segments, lead: 0 }];
        }
        (0..=m - appendant)
            .map(|i| Window {
                segments: segments[i..i + appendant].to_vec(),
                lead: if i == 0 { 0 } else { appendant - 1 },
            })
            .collect()
    }
}

/// Slice count for `samples` training sites: [`DEFAULT_SLICES`], reduced to
/// `max(2, samples / 2)` when fewer than two sites per slice would remain.
pub fn default_slice_count(samples: usize) -> usize {
    if samples >= 2 * DEFAULT_SLICES {
        DEFAULT_SLICES
    } else {
        (samples / 2).max(2).min(samples.max(1))
    }
}

/// Sorts the sites along `dim` (stable, so ties keep their index order) and
/// cuts them into `m` slices whose sizes differ by at most one, the larger
/// slices first.
pub fn partition(data: &SampleSet, dim: usize, m: usize) -> Result<SliceLayout> {
    let n = data.len();
    if dim >= data.dim() {
        return Err(Error::IndexOutOfRange {
            index: dim,
            dim: data.dim(),
        });
    }
    if m == 0 || m > n {
        return Err(Error::invalid(format!(
            "slice count must be in 1..={n}, got {m}"
        )));
    }
    let coord = |i: usize| data.site(i)[dim];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| coord(a).total_cmp(&coord(b)));

    let (base, extra) = (n / m, n % m);
    let mut members = Vec::with_capacity(m);
    let mut boundaries = vec![0.0];
    let mut start = 0;
    for i in 0..m {
        let size = base + usize::from(i < extra);
        members.push(order[start..start + size].to_vec());
        start += size;
        if i + 1 < m {
            boundaries.push(0.5 * (coord(order[start - 1]) + coord(order[start])));
        }
    }
    boundaries.push(1.0);
    Ok(SliceLayout {
        dim,
        boundaries,
        members,
    })
}

fn check_appendant(appendant: usize) -> Result<()> {
    if appendant < 2 {
        return Err(Error::invalid(format!(
            "appendant order must be at least 2, got {appendant}"
        )));
    }
    Ok(())
}

fn check_layout(data: &SampleSet, params: &KernelParams, layout: &SliceLayout) -> Result<()> {
    if params.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: params.dim(),
        });
    }
    let total: usize = layout.members.iter().map(Vec::len).sum();
    if total != data.len() || layout.members.iter().flatten().any(|&i| i >= data.len()) {
        return Err(Error::invalid("slice layout does not match the sample set"));
    }
    Ok(())
}

/// Profiled `beta0` and `sigma2` of the k-appendant likelihood. Gradient
/// observations are used whenever the sample set carries them.
pub fn sliced_profile(
    params: &KernelParams,
    data: &SampleSet,
    layout: &SliceLayout,
    appendant: usize,
) -> Result<Profile> {
    check_appendant(appendant)?;
    check_layout(data, params, layout)?;
    profile_windows(
        data,
        params.theta(),
        &layout.windows(appendant),
        data.has_gradients(),
    )
}

/// Concentrated negative k-appendant log-likelihood; `+inf` when infeasible.
pub fn sliced_log_likelihood(
    params: &KernelParams,
    data: &SampleSet,
    layout: &SliceLayout,
    appendant: usize,
) -> Result<f64> {
    match sliced_profile(params, data, layout, appendant) {
        Ok(p) => Ok(p.concentrated()),
        Err(e) if e.is_infeasible() => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Full minus sliced concentrated likelihood at `params`.
pub fn likelihood_gap(
    params: &KernelParams,
    data: &SampleSet,
    layout: &SliceLayout,
    appendant: usize,
) -> Result<f64> {
    let full = gek::full_log_likelihood(data, params, data.has_gradients())?;
    let sliced = sliced_log_likelihood(params, data, layout, appendant)?;
    if !full.is_finite() || !sliced.is_finite() {
        return Err(Error::Infeasible(
            "likelihood gap undefined: a likelihood is infeasible".into(),
        ));
    }
    Ok(full - sliced)
}

/// Cost of one full GEK likelihood evaluation relative to a 2-appendant one
/// with `m` slices, counting cubic factorization work only.
pub fn cost_ratio(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::invalid(format!("cost ratio needs m >= 2, got {m}")));
    }
    let m = m as f64;
    Ok(m.powi(3) / (9.0 * m - 10.0))
}
