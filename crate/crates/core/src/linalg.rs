//! Dense Cholesky factorization with an escalating relative nugget.
//!
//! Factorization and triangular solves are delegated to `faer`, always in
//! sequential mode so results do not depend on the thread count.

use dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::llt::factor::{cholesky_in_place, cholesky_in_place_scratch};
use faer::linalg::triangular_solve::{
    solve_lower_triangular_in_place, solve_upper_triangular_in_place,
};
use faer::{Mat, MatRef, Par};

use crate::error::{Error, Result};

/// Relative nuggets tried in order; `tau` inflates the diagonal to `(1 + tau) * M_ii`.
pub const NUGGET_SCHEDULE: [f64; 6] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Lower Cholesky factor of `M + tau * diag(M)`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    l: Mat<f64>,
    nugget: f64,
}

impl CholeskyFactor {
    pub fn l(&self) -> MatRef<'_, f64> {
        self.l.as_ref()
    }

    /// The relative nugget that made the factorization succeed.
    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// `ln det` of the factored matrix.
    pub fn log_det(&self) -> f64 {
        self.log_det_leading(self.dim())
    }

    /// `ln det` of the leading `k x k` principal block, whose factor is the
    /// leading block of `L`.
    pub fn log_det_leading(&self, k: usize) -> f64 {
        2.0 * (0..k).map(|i| self.l[(i, i)].ln()).sum::<f64>()
    }

    /// Solves `L z = b` in place for every column of `rhs`.
    pub fn forward(&self, rhs: &mut Mat<f64>) {
        solve_lower_triangular_in_place(self.l.as_ref(), rhs.as_mut(), Par::Seq);
    }

    /// Solves `L L^T x = b` in place for every column of `rhs`.
    pub fn solve(&self, rhs: &mut Mat<f64>) {
        self.forward(rhs);
        solve_upper_triangular_in_place(self.l.transpose(), rhs.as_mut(), Par::Seq);
    }

    /// Solves `L L^T x = b` for a single right-hand side.
    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        self.solve(&mut rhs);
        (0..b.len()).map(|i| rhs[(i, 0)]).collect()
    }
}

fn try_factor(m: MatRef<'_, f64>, tau: f64, stack: &mut MemStack) -> Option<Mat<f64>> {
    let n = m.nrows();
    let mut l = Mat::from_fn(n, n, |i, j| if i >= j { m[(i, j)] } else { 0.0 });
    if tau > 0.0 {
        for i in 0..n {
            l[(i, i)] *= 1.0 + tau;
        }
    }
    cholesky_in_place(
        l.as_mut(),
        Default::default(),
        Par::Seq,
        stack,
        Default::default(),
    )
    .ok()?;
    for j in 1..n {
        for i in 0..j {
            l[(i, j)] = 0.0;
        }
    }
    let healthy = (0..n).all(|i| {
        let d = l[(i, i)];
        d.is_finite() && d > 0.0
    });
    healthy.then_some(l)
}

/// Factors a symmetric matrix, escalating the relative nugget through
/// [`NUGGET_SCHEDULE`]. Only the lower triangle of `m` is read.
pub fn cholesky_with_nugget(m: MatRef<'_, f64>) -> Result<CholeskyFactor> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.ncols(),
        });
    }
    if n == 0 {
        return Err(Error::invalid("cannot factor an empty matrix"));
    }
    let mut mem = MemBuffer::new(cholesky_in_place_scratch::<f64>(
        n,
        Par::Seq,
        Default::default(),
    ));
    let stack = MemStack::new(&mut mem);
    for &tau in &NUGGET_SCHEDULE {
        if let Some(l) = try_factor(m, tau, stack) {
            return Ok(CholeskyFactor { l, nugget: tau });
        }
    }
    Err(Error::Infeasible(format!(
        "cholesky failed for a {n}x{n} matrix even with nugget {:e}",
        NUGGET_SCHEDULE[NUGGET_SCHEDULE.len() - 1]
    )))
}
