//! Terminal-value adjoint system
//!
//! ```text
//! phi_tt - phi_xx = 0, phi_tt(t,0) - phi_x(t,0) = 0, phi_tt(t,l) + phi_x(t,l) = 0,
//! phi(T) = 0, phi_t(T) = -(Y(T) - Y_T^delta)
//! ```
//!
//! Only second time derivatives appear, so with `s = T - t` the function
//! `psi(s) = phi(T - s)` solves the same homogeneous system forward in time
//! with `psi(0) = 0` and `psi_s(0) = Y(T) - Y_T^delta`. The adjoint is computed
//! by one forward solve followed by a reversal of the time axis.

use ndarray::Array2;

use crate::error::Result;
use crate::field::{BoundaryField, Trajectory};
use crate::forward::{solve_forward, BoundaryForcing, InitialData};
use crate::grid::Mesh;

/// Solves the adjoint system for `residual = Y(T) - Y_T^delta`.
///
/// A residual sampled on a different grid is linearly interpolated onto
/// `mesh.space` first.
pub fn solve_adjoint(mesh: &Mesh, residual: &BoundaryField) -> Result<Trajectory> {
    let residual = residual.resample(mesh.space)?;
    let init = InitialData {
        displacement: BoundaryField::zeros(mesh.space),
        velocity: residual,
    };
    let reversed = solve_forward(
        mesh,
        Array2::zeros(mesh.shape()).view(),
        &BoundaryForcing::zeros(mesh),
        &init,
    )?;
    Ok(reversed.time_reversed())
}
