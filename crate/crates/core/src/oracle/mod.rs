//! Independent cross-checks of the float verification path.
//!
//! * [`exact`] repeats the subspace recursions over exact rationals.
//! * [`trajectory`] integrates sampled trajectories and matches outputs.
//! * [`pointwise`] tests the one-step matching conditions at random points.

pub mod exact;
pub mod pointwise;
pub mod trajectory;

pub use exact::{exact_simulation, exact_subspace_dims, QMatrix, QSubspace, QSystem};
pub use pointwise::pointwise_prop1_check;
pub use trajectory::{
    sample_consistent_trajectory, validate_by_trajectories, MatchingReport, Trajectory,
    TrajectoryConfig, TrialResult,
};

use crate::subspace::{thin_svd, Matrix};

/// Minimum-norm least-squares solution of `a x = b`.
pub(crate) fn lstsq(a: &Matrix, b: &Matrix) -> Matrix {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Matrix::zeros(cols, b.ncols());
    }
    let svd = thin_svd(a);
    let top = svd.sigma.iter().fold(0.0_f64, |acc, &s| acc.max(s));
    let cutoff = 1e-12 * top * rows.max(cols) as f64;
    let mut ub = svd.u.transpose() * b;
    for (i, &s) in svd.sigma.iter().enumerate() {
        let scale = if s > cutoff { 1.0 / s } else { 0.0 };
        ub.row_mut(i).scale_mut(scale);
    }
    svd.v * ub
}
