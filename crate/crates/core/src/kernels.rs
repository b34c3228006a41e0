//! Biquadratic spline correlation.
//!
//! The one-dimensional correlation is a compactly supported piecewise quartic
//! in `xi = theta * |x - xhat|` with knots at `xi = 0.4` and `xi = 1`:
//!
//! ```text
//! R(xi) = 1 - 15 xi^2 + 35 xi^3 - 195/8 xi^4                 0   <= xi < 0.4
//!       = 5/3 - 20/3 xi + 10 xi^2 - 20/3 xi^3 + 5/3 xi^4      0.4 <= xi < 1
//!       = 0                                                   1   <= xi
//! ```
//!
//! The n-dimensional correlation is the tensor product of the univariate
//! factors. Gradient-enhanced models additionally need the first derivative
//! with respect to either argument and the mixed second derivative
//! `d^2 R / dx_k dxhat_l`, which this module assembles by the product rule.

use crate::error::{Error, Result};

/// Default lower bound for every correlation hyper-parameter.
pub const THETA_LOWER: f64 = 0.001;
/// Default upper bound for every correlation hyper-parameter.
pub const THETA_UPPER: f64 = 10.0;

const KNOT: f64 = 0.4;

/// Correlation hyper-parameters with their per-dimension search box.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelParams {
    theta: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl KernelParams {
    /// Hyper-parameters inside the default box `[0.001, 10]` in every dimension.
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        let n = theta.len();
        Self::with_bounds(theta, vec![THETA_LOWER; n], vec![THETA_UPPER; n])
    }

    pub fn with_bounds(theta: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::invalid("kernel needs at least one dimension"));
        }
        for other in [&lower, &upper] {
            if other.len() != theta.len() {
                return Err(Error::DimensionMismatch {
                    expected: theta.len(),
                    got: other.len(),
                });
            }
        }
        for k in 0..theta.len() {
            let (t, lo, hi) = (theta[k], lower[k], upper[k]);
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return Err(Error::invalid(format!(
                    "invalid theta bounds [{lo}, {hi}] in dimension {k}"
                )));
            }
            if !t.is_finite() || t < lo || t > hi {
                return Err(Error::invalid(format!(
                    "theta[{k}] = {t} outside [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self {
            theta,
            lower,
            upper,
        })
    }

    /// Isotropic parameters: the same `theta` in all `dim` dimensions.
    pub fn isotropic(theta: f64, dim: usize) -> Result<Self> {
        Self::new(vec![theta; dim])
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    /// Same bounds, new values. Values are clamped into the box.
    pub fn with_theta(&self, theta: &[f64]) -> Result<Self> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        let clamped = theta
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&t, (&lo, &hi))| t.clamp(lo, hi))
            .collect();
        Self::with_bounds(clamped, self.lower.clone(), self.upper.clone())
    }
}

/// Spline value and its first two derivatives with respect to `xi`.
#[inline]
pub(crate) fn spline(xi: f64) -> (f64, f64, f64) {
    if xi < KNOT {
        let r = 1.0 + xi * xi * (-15.0 + xi * (35.0 - 195.0 / 8.0 * xi));
        let dr = xi * (-30.0 + xi * (105.0 - 195.0 / 2.0 * xi));
        let ddr = -30.0 + xi * (210.0 - 585.0 / 2.0 * xi);
        (r, dr, ddr)
    } else if xi < 1.0 {
        let r = 5.0 / 3.0 + xi * (-20.0 / 3.0 + xi * (10.0 + xi * (-20.0 / 3.0 + 5.0 / 3.0 * xi)));
        let dr = -20.0 / 3.0 + xi * (20.0 + xi * (-20.0 + 20.0 / 3.0 * xi));
        let ddr = 20.0 + xi * (-40.0 + 20.0 * xi);
        (r, dr, ddr)
    } else {
        (0.0, 0.0, 0.0)
    }
}

#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Value, `dR/dx` and `d^2R/dx dxhat` of the univariate factor for the signed
/// difference `delta = x - xhat`.
#[inline]
pub(crate) fn factor_terms(delta: f64, theta: f64) -> (f64, f64, f64) {
    let xi = theta * delta.abs();
    let (r, dr, ddr) = spline(xi);
    (r, dr * theta * sign(delta), -ddr * theta * theta)
}

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() && theta > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "theta must be positive and finite, got {theta}"
        )))
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite, got {v}")))
    }
}

/// One-dimensional correlation at absolute distance `d`.
pub fn corr_1d(d: f64, theta: f64) -> Result<f64> {
    check_finite("distance", d)?;
    if d < 0.0 {
        return Err(Error::invalid(format!(
            "distance must be non-negative, got {d}"
        )));
    }
    check_theta(theta)?;
    Ok(spline(theta * d).0)
}

/// `dR/dx` for the signed difference `delta = x - xhat`. The derivative with
/// respect to `xhat` is the negation.
pub fn corr_1d_d1(delta: f64, theta: f64) -> Result<f64> {
    check_finite("delta", delta)?;
    check_theta(theta)?;
    Ok(factor_terms(delta, theta).1)
}

/// Mixed derivative `d^2R/dx dxhat` at absolute distance `d`.
pub fn corr_1d_d2(d: f64, theta: f64) -> Result<f64> {
    check_finite("distance", d)?;
    if d < 0.0 {
        return Err(Error::invalid(format!(
            "distance must be non-negative, got {d}"
        )));
    }
    check_theta(theta)?;
    Ok(factor_terms(d, theta).2)
}

fn check_pair(x: &[f64], xhat: &[f64], params: &KernelParams) -> Result<()> {
    for v in [x, xhat] {
        if v.len() != params.dim() {
            return Err(Error::DimensionMismatch {
                expected: params.dim(),
                got: v.len(),
            });
        }
        if let Some(bad) = v.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinate {bad}")));
        }
    }
    Ok(())
}

/// Tensor-product correlation `R(x, xhat)`.
pub fn corr_nd(x: &[f64], xhat: &[f64], params: &KernelParams) -> Result<f64> {
    check_pair(x, xhat, params)?;
    Ok(x.iter()
        .zip(xhat)
        .zip(params.theta())
        .map(|((a, b), &t)| factor_terms(a - b, t).0)
        .product())
}

/// `dR(x, xhat)/dx_k`.
pub fn corr_nd_d1(x: &[f64], xhat: &[f64], params: &KernelParams, k: usize) -> Result<f64> {
    check_pair(x, xhat, params)?;
    let n = params.dim();
    if k >= n {
        return Err(Error::IndexOutOfRange { index: k, dim: n });
    }
    let mut out = 1.0;
    for i in 0..n {
        let (r, dr, _) = factor_terms(x[i] - xhat[i], params.theta()[i]);
        out *= if i == k { dr } else { r };
    }
    Ok(out)
}

/// `d^2R(x, xhat)/dx_k dxhat_l`.
pub fn corr_nd_d2(
    x: &[f64],
    xhat: &[f64],
    params: &KernelParams,
    k: usize,
    l: usize,
) -> Result<f64> {
    check_pair(x, xhat, params)?;
    let n = params.dim();
    for idx in [k, l] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, dim: n });
        }
    }
    let mut out = 1.0;
    for i in 0..n {
        let (r, dr, ddr) = factor_terms(x[i] - xhat[i], params.theta()[i]);
        out *= if k == l && i == k {
            ddr
        } else if i == k {
            dr
        } else if i == l {
            -dr
        } else {
            r
        };
    }
    Ok(out)
}

/// Scratch space for covariance blocks between the observations of two sites.
///
/// A site carries `n + 1` observations (value, then one partial derivative per
/// dimension). The block entry `(p, q)` is the correlation between observation
/// `p` of the first site and observation `q` of the second.
#[derive(Debug, Clone)]
pub(crate) struct PairBlock {
    n: usize,
    value: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    prefix: Vec<f64>,
    suffix: Vec<f64>,
    /// Row-major `(n + 1) x (n + 1)` block.
    pub(crate) block: Vec<f64>,
}

impl PairBlock {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            n,
            value: vec![0.0; n],
            d1: vec![0.0; n],
            d2: vec![0.0; n],
            prefix: vec![1.0; n + 1],
            suffix: vec![1.0; n + 1],
            block: vec![0.0; (n + 1) * (n + 1)],
        }
    }

    /// Fills `block`; returns false (and leaves `block` stale) when the two
    /// sites lie outside each other's support, in which case every entry is 0.
    pub(crate) fn fill(&mut self, xa: &[f64], xb: &[f64], theta: &[f64], gradients: bool) -> bool {
        let n = self.n;
        for k in 0..n {
            let delta = xa[k] - xb[k];
            if theta[k] * delta.abs() >= 1.0 {
                return false;
            }
            let (r, dr, ddr) = factor_terms(delta, theta[k]);
            self.value[k] = r;
            self.d1[k] = dr;
            self.d2[k] = ddr;
        }
        for k in 0..n {
            self.prefix[k + 1] = self.prefix[k] * self.value[k];
            self.suffix[n - 1 - k] = self.suffix[n - k] * self.value[n - 1 - k];
        }
        let width = n + 1;
        let b = &mut self.block;
        b[0] = self.prefix[n];
        if !gradients {
            return true;
        }
        for k in 0..n {
            let loo = self.prefix[k] * self.suffix[k + 1];
            b[(k + 1) * width] = self.d1[k] * loo;
            b[k + 1] = -self.d1[k] * loo;
            b[(k + 1) * width + k + 1] = self.d2[k] * loo;
            let mut mid = 1.0;
            for l in k + 1..n {
                let lto = self.prefix[k] * mid * self.suffix[l + 1];
                b[(k + 1) * width + l + 1] = -self.d1[k] * self.d1[l] * lto;
                b[(l + 1) * width + k + 1] = -self.d1[l] * self.d1[k] * lto;
                mid *= self.value[l];
            }
        }
        true
    }

    /// Fills only row 0 of the block (the value observation of the first
    /// site against every observation of the second) into `block[..=n]`.
    pub(crate) fn fill_value_row(
        &mut self,
        xa: &[f64],
        xb: &[f64],
        theta: &[f64],
        gradients: bool,
    ) -> bool {
        let n = self.n;
        for k in 0..n {
            let delta = xa[k] - xb[k];
            if theta[k] * delta.abs() >= 1.0 {
                return false;
            }
            let (r, dr, _) = factor_terms(delta, theta[k]);
            self.value[k] = r;
            self.d1[k] = dr;
        }
        for k in 0..n {
            self.prefix[k + 1] = self.prefix[k] * self.value[k];
            self.suffix[n - 1 - k] = self.suffix[n - k] * self.value[n - 1 - k];
        }
        self.block[0] = self.prefix[n];
        if gradients {
            for k in 0..n {
                self.block[k + 1] = -self.d1[k] * self.prefix[k] * self.suffix[k + 1];
            }
        }
        true
    }
}
