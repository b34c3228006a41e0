//! Profiled (concentrated) likelihood shared by the full and sliced models.
//!
//! A likelihood is a product of Gaussian densities over *windows*. Each window
//! is a run of consecutive segments; its density may be divided by the density
//! of its leading segments. The full likelihood is one window holding every
//! site. With slice-major ordering the leading block of a window's correlation
//! matrix is exactly the matrix of its leading segments, so its Cholesky
//! factor, log-determinant and forward solves are prefixes of the window's own.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assembly::Ordering;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_with_nugget, CholeskyFactor};
use crate::sampling::SampleSet;

/// Smallest process variance accepted before taking its logarithm.
pub const SIGMA2_FLOOR: f64 = 1e-300;

/// A run of consecutive segments, optionally divided by its first `lead`.
#[derive(Debug, Clone)]
pub(crate) struct Window<'a> {
    pub(crate) segments: Vec<&'a [usize]>,
    pub(crate) lead: usize,
}

/// Profiled trend coefficient and process variance at fixed hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub beta0: f64,
    /// May be negative for sliced likelihoods, which marks the point infeasible.
    pub sigma2: f64,
    /// Signed sum of the window log-determinants.
    pub log_det: f64,
    /// Effective number of observations multiplying `ln sigma2`.
    pub observations: usize,
    /// Largest relative nugget used by any window.
    pub nugget: f64,
}

impl Profile {
    /// Concentrated negative log-likelihood, `+inf` when `sigma2` is below
    /// [`SIGMA2_FLOOR`] or anything is non-finite.
    pub fn concentrated(&self) -> f64 {
        if !(self.sigma2 >= SIGMA2_FLOOR) {
            return f64::INFINITY;
        }
        let value = self.observations as f64 * self.sigma2.ln() + self.log_det;
        if value.is_finite() {
            value
        } else {
            f64::INFINITY
        }
    }
}

struct WindowSolve {
    factor: CholeskyFactor,
    zy: Vec<f64>,
    zf: Vec<f64>,
    lead_len: usize,
}

fn solve_window(
    data: &SampleSet,
    theta: &[f64],
    window: &Window,
    gradients: bool,
) -> Result<WindowSolve> {
    let ordering = Ordering::new(&window.segments, data.dim(), gradients);
    let lead_len = Ordering::new(&window.segments[..window.lead], data.dim(), gradients).len();
    let factor = cholesky_with_nugget(ordering.matrix(data, theta).as_ref())?;
    let y = ordering.responses(data);
    let f = ordering.trend();
    let mut rhs = faer::Mat::from_fn(y.len(), 2, |i, j| if j == 0 { y[i] } else { f[i] });
    factor.forward(&mut rhs);
    Ok(WindowSolve {
        factor,
        zy: (0..y.len()).map(|i| rhs[(i, 0)]).collect(),
        zf: (0..y.len()).map(|i| rhs[(i, 1)]).collect(),
        lead_len,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual(zy: &[f64], zf: &[f64], beta: f64) -> f64 {
    zy.iter().zip(zf).map(|(y, f)| (y - beta * f).powi(2)).sum()
}

/// Profiles `beta0` and `sigma2` over a set of windows.
pub(crate) fn profile_windows(
    data: &SampleSet,
    theta: &[f64],
    windows: &[Window],
    gradients: bool,
) -> Result<Profile> {
    if gradients && !data.has_gradients() {
        return Err(Error::invalid(
            "gradient-enhanced likelihood needs gradient observations",
        ));
    }
    if theta.len() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: theta.len(),
        });
    }
    let solves: Vec<WindowSolve> = windows
        .par_iter()
        .map(|w| solve_window(data, theta, w, gradients))
        .collect::<Result<_>>()?;

    let (mut ff, mut fy) = (0.0, 0.0);
    for s in &solves {
        let d = s.lead_len;
        ff += dot(&s.zf, &s.zf) - dot(&s.zf[..d], &s.zf[..d]);
        fy += dot(&s.zf, &s.zy) - dot(&s.zf[..d], &s.zy[..d]);
    }
    if !(ff > 0.0 && ff.is_finite()) {
        return Err(Error::Infeasible(format!(
            "trend normal scalar {ff} is not positive"
        )));
    }
    let beta0 = fy / ff;

    let (mut ss, mut log_det, mut observations, mut nugget) = (0.0, 0.0, 0usize, 0.0f64);
    for s in &solves {
        let d = s.lead_len;
        ss += residual(&s.zy, &s.zf, beta0) - residual(&s.zy[..d], &s.zf[..d], beta0);
        log_det += s.factor.log_det() - s.factor.log_det_leading(d);
        observations += s.zy.len() - d;
        nugget = nugget.max(s.factor.nugget());
    }
    Ok(Profile {
        beta0,
        sigma2: ss / observations as f64,
        log_det,
        observations,
        nugget,
    })
}

/// Profiled `(beta0, sigma2)` of a single factored system `R = L L^T` with
/// responses `y` and trend vector `f`.
pub fn profile_beta_sigma(factor: &CholeskyFactor, y: &[f64], f: &[f64]) -> Result<(f64, f64)> {
    let n = factor.dim();
    for v in [y, f] {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
    }
    let mut rhs = faer::Mat::from_fn(n, 2, |i, j| if j == 0 { y[i] } else { f[i] });
    factor.forward(&mut rhs);
    let zy: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
    let zf: Vec<f64> = (0..n).map(|i| rhs[(i, 1)]).collect();
    let ff = dot(&zf, &zf);
    if !(ff > 0.0 && ff.is_finite()) {
        return Err(Error::Infeasible(format!(
            "trend normal scalar {ff} is not positive"
        )));
    }
    let beta0 = dot(&zf, &zy) / ff;
    Ok((beta0, residual(&zy, &zf, beta0) / n as f64))
}
