//! Kriging and gradient-enhanced Kriging.
//!
//! The correlation matrix of a GEK model stacks the values and all first
//! partial derivatives of the process at the training sites:
//!
//! ```text
//!     | R00  dR01 .. dR0n |        R00[i][j]  = R(x_i, x_j)
//! R = | dR10 d2R11 ..     |        dR0l[i][j] = dR(x_i, x_j)/dxhat_l
//!     | ..               |        dRk0[i][j] = dR(x_i, x_j)/dx_k
//!     | dRn0 ..     d2Rnn |        d2Rkl[i][j] = d2R(x_i, x_j)/dx_k dxhat_l
//! ```
//!
//! Hyper-parameters are estimated by minimizing the concentrated negative
//! log-likelihood `(n + 1) N ln sigma2 + ln det R`, with the constant trend
//! `beta0` and variance `sigma2` profiled out in closed form.

mod assembly;
mod likelihood;
mod model;

use std::fmt;
use std::str::FromStr;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelParams;
use crate::sampling::SampleSet;

pub(crate) use assembly::Ordering;
pub use likelihood::{profile_beta_sigma, Profile, SIGMA2_FLOOR};
pub(crate) use likelihood::{profile_windows, Window};
pub use model::{TrainOptions, TrainedSurrogate, MODEL_FORMAT, MODEL_VERSION};

pub use crate::linalg::{cholesky_with_nugget, CholeskyFactor, NUGGET_SCHEDULE};

/// Surrogate family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Ordinary Kriging on values only.
    Kriging,
    /// Gradient-enhanced Kriging tuned on the full likelihood.
    Gek,
    /// Sliced GEK, trend fit followed by a full hyper-parameter refinement.
    Sgek1,
    /// Sliced GEK, trend fit only.
    Sgek2,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Kriging,
        Variant::Gek,
        Variant::Sgek1,
        Variant::Sgek2,
    ];

    pub fn uses_gradients(self) -> bool {
        self != Variant::Kriging
    }

    pub fn is_sliced(self) -> bool {
        matches!(self, Variant::Sgek1 | Variant::Sgek2)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Kriging => "kriging",
            Variant::Gek => "gek",
            Variant::Sgek1 => "sgek1",
            Variant::Sgek2 => "sgek2",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown variant '{s}' (expected kriging, gek, sgek1 or sgek2)"
                ))
            })
    }
}

fn check_params(data: &SampleSet, params: &KernelParams, with_gradients: bool) -> Result<()> {
    if params.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: params.dim(),
        });
    }
    if with_gradients && !data.has_gradients() {
        return Err(Error::invalid(
            "gradient-enhanced model needs gradient observations",
        ));
    }
    Ok(())
}

fn all_sites(data: &SampleSet) -> Vec<usize> {
    (0..data.len()).collect()
}

/// Full correlation matrix in the order `[values; d/dx_1; ...; d/dx_n]`, or
/// the `N x N` value block when `with_gradients` is false.
pub fn correlation_matrix(
    data: &SampleSet,
    params: &KernelParams,
    with_gradients: bool,
) -> Result<Mat<f64>> {
    if params.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: params.dim(),
        });
    }
    let sites = all_sites(data);
    Ok(Ordering::new(&[&sites], data.dim(), with_gradients).matrix(data, params.theta()))
}

/// Correlation between the value at unit-cube point `x` and every training
/// observation, in the order of [`correlation_matrix`]. At a training site
/// this equals the matching column of the matrix.
pub fn correlation_vector(
    x: &[f64],
    data: &SampleSet,
    params: &KernelParams,
    with_gradients: bool,
) -> Result<Vec<f64>> {
    if x.len() != data.dim() || params.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: if x.len() != data.dim() {
                x.len()
            } else {
                params.dim()
            },
        });
    }
    let sites = all_sites(data);
    Ok(Ordering::new(&[&sites], data.dim(), with_gradients).vector(x, data, params.theta()))
}

/// Profiled `beta0`, `sigma2` and log-determinant of the full model.
pub fn full_profile(
    data: &SampleSet,
    params: &KernelParams,
    with_gradients: bool,
) -> Result<Profile> {
    check_params(data, params, with_gradients)?;
    let sites = all_sites(data);
    let window = Window {
        segments: vec![&sites],
        lead: 0,
    };
    profile_windows(data, params.theta(), &[window], with_gradients)
}

/// Concentrated negative log-likelihood of the full model; `+inf` when the
/// correlation matrix cannot be factored or the profiled variance vanishes.
pub fn full_log_likelihood(
    data: &SampleSet,
    params: &KernelParams,
    with_gradients: bool,
) -> Result<f64> {
    match full_profile(data, params, with_gradients) {
        Ok(p) => Ok(p.concentrated()),
        Err(e) if e.is_infeasible() => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}
