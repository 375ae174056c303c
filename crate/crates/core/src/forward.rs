//! Explicit leapfrog solver for the wave equation with kinetic boundary
//! conditions
//!
//! ```text
//! y_tt - y_xx = F,   y_tt(t,0) - y_x(t,0) = g0,   y_tt(t,l) + y_x(t,l) = gl.
//! ```
//!
//! Interior nodes use the standard three-level scheme. Each boundary trace is
//! advanced as an ODE `y_tt = +-y_x + g` where `y_x` is the one-sided
//! second-order difference `(-3 y_0 + 4 y_1 - y_2) / (2 dx)` (mirrored at
//! `x = l`). The first step is a second-order Taylor start.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::field::{BoundaryField, SourcePair, Trajectory};
use crate::grid::Mesh;

/// Initial displacement `(y0, a, b)` and velocity `(y1, c, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub displacement: BoundaryField,
    pub velocity: BoundaryField,
}

impl InitialData {
    pub fn zeros(mesh: &Mesh) -> Self {
        Self {
            displacement: BoundaryField::zeros(mesh.space),
            velocity: BoundaryField::zeros(mesh.space),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.displacement.values().iter().all(|&v| v == 0.0) && self.velocity.values().iter().all(|&v| v == 0.0)
    }
}

/// Right-hand sides of the two boundary equations, sampled at every time level.
///
/// The physical model has `right == 0`; a nonzero right-hand side is only
/// used to build manufactured solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryForcing {
    pub left: Array1<f64>,
    pub right: Array1<f64>,
}

impl BoundaryForcing {
    pub fn zeros(mesh: &Mesh) -> Self {
        let n = mesh.time.levels();
        Self {
            left: Array1::zeros(n),
            right: Array1::zeros(n),
        }
    }

    pub fn left_only(left: Array1<f64>) -> Self {
        let n = left.len();
        Self {
            left,
            right: Array1::zeros(n),
        }
    }
}

struct Stencil<'a> {
    f: ArrayView2<'a, f64>,
    g0: ArrayView1<'a, f64>,
    gl: ArrayView1<'a, f64>,
    inv_dx: f64,
    inv_dx2: f64,
}

impl Stencil<'_> {
    /// Writes `y_tt` at time level `n` into `out`.
    fn acceleration(&self, y: &[f64], n: usize, out: &mut [f64]) {
        let last = y.len() - 1;
        let f = self.f.row(n);
        for i in 1..last {
            out[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) * self.inv_dx2 + f[i];
        }
        let dx_left = (-3.0 * y[0] + 4.0 * y[1] - y[2]) * 0.5 * self.inv_dx;
        let dx_right = (3.0 * y[last] - 4.0 * y[last - 1] + y[last - 2]) * 0.5 * self.inv_dx;
        out[0] = dx_left + self.g0[n];
        out[last] = -dx_right + self.gl[n];
    }
}

fn check_shapes(mesh: &Mesh, interior: &ArrayView2<'_, f64>, bc: &BoundaryForcing, init: &InitialData) -> Result<()> {
    let (nt1, nx1) = mesh.shape();
    if interior.dim() != (nt1, nx1) {
        return Err(Error::shape(
            "interior forcing",
            format!("{nt1}x{nx1}"),
            format!("{}x{}", interior.nrows(), interior.ncols()),
        ));
    }
    if bc.left.len() != nt1 || bc.right.len() != nt1 {
        return Err(Error::shape(
            "boundary forcing",
            nt1,
            format!("{}/{}", bc.left.len(), bc.right.len()),
        ));
    }
    for field in [&init.displacement, &init.velocity] {
        if field.grid() != mesh.space {
            return Err(Error::shape("initial data", nx1, field.grid().nodes()));
        }
    }
    Ok(())
}

/// Advances the full system from `init` over the mesh and returns every time level.
pub fn solve_forward(
    mesh: &Mesh,
    interior: ArrayView2<'_, f64>,
    bc: &BoundaryForcing,
    init: &InitialData,
) -> Result<Trajectory> {
    check_shapes(mesh, &interior, bc, init)?;
    let (nt1, nx1) = mesh.shape();
    let dt = mesh.time.dt();
    let dx = mesh.space.dx();
    let dt2 = dt * dt;
    let stencil = Stencil {
        f: interior,
        g0: bc.left.view(),
        gl: bc.right.view(),
        inv_dx: 1.0 / dx,
        inv_dx2: 1.0 / (dx * dx),
    };

    let mut values = Array2::<f64>::zeros((nt1, nx1));
    let mut prev: Vec<f64> = init.displacement.values().to_vec();
    let velocity = init.velocity.values();
    let mut acc = vec![0.0; nx1];
    stencil.acceleration(&prev, 0, &mut acc);
    let mut cur: Vec<f64> = (0..nx1)
        .map(|i| prev[i] + dt * velocity[i] + 0.5 * dt2 * acc[i])
        .collect();
    values.row_mut(0).assign(&ArrayView1::from(&prev[..]));
    store(&mut values, 1, &cur)?;

    let mut next = vec![0.0; nx1];
    for n in 1..nt1 - 1 {
        stencil.acceleration(&cur, n, &mut acc);
        for i in 0..nx1 {
            next[i] = 2.0 * cur[i] - prev[i] + dt2 * acc[i];
        }
        store(&mut values, n + 1, &next)?;
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(Trajectory::from_raw(*mesh, values))
}

fn store(values: &mut Array2<f64>, level: usize, row: &[f64]) -> Result<()> {
    if row.iter().any(|v| !v.is_finite()) {
        return Err(Error::BlowUp { step: level });
    }
    values.row_mut(level).assign(&ArrayView1::from(row));
    Ok(())
}

/// Response to a source perturbation from rest: `F = dF`, `g0 = dG`, `gl = 0`.
pub fn solve_sensitivity(dw: &SourcePair) -> Result<Trajectory> {
    let mesh = dw.mesh();
    solve_forward(
        &mesh,
        dw.interior(),
        &BoundaryForcing::left_only(dw.boundary().to_owned()),
        &InitialData::zeros(&mesh),
    )
}

/// Energy
/// `½∫y_t² + ½y_t(t,0)² + ½y_t(t,l)² + ½∫y_x²`
/// at time levels `1..nt` using centred time differences and cell-wise
/// spatial differences. Returns `(t_n, energy_n)` pairs.
pub fn energy_history(traj: &Trajectory) -> Vec<(f64, f64)> {
    let mesh = traj.mesh();
    let (dt, dx) = (mesh.time.dt(), mesh.space.dx());
    let nx = mesh.space.cells();
    let y = traj.values();
    (1..mesh.time.steps())
        .map(|n| {
            let (up, mid, down) = (y.row(n + 1), y.row(n), y.row(n - 1));
            let vel = |i: usize| (up[i] - down[i]) / (2.0 * dt);
            let mut kinetic = 0.5 * (vel(0).powi(2) + vel(nx).powi(2)) * dx;
            for i in 1..nx {
                kinetic += vel(i).powi(2) * dx;
            }
            let mut strain = 0.0;
            for i in 0..nx {
                strain += ((mid[i + 1] - mid[i]) / dx).powi(2) * dx;
            }
            let traces = vel(0).powi(2) + vel(nx).powi(2);
            (mesh.time.t(n), 0.5 * (kinetic + traces + strain))
        })
        .collect()
}
