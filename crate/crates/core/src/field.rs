//! Discrete elements of the state, source and trajectory spaces.
//!
//! Storage is nodal: a [`BoundaryField`] keeps `nx + 1` samples and its two
//! boundary traces are the endpoint samples. The extra `R^2` component of the
//! state space only shows up in the inner product (see
//! [`crate::quadrature::inner_l2b`]).

use std::ops::{Add, Mul, Sub};

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};

use crate::error::{Error, Result};
use crate::grid::{Mesh, SpaceGrid};

fn first_non_finite<'a>(values: impl IntoIterator<Item = &'a f64>) -> Option<usize> {
    values.into_iter().position(|v| !v.is_finite())
}

/// Nodal samples on `[0, l]`; `values[0]` and `values[nx]` are the traces.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField {
    grid: SpaceGrid,
    values: Array1<f64>,
}

impl BoundaryField {
    pub fn new(grid: SpaceGrid, values: Array1<f64>) -> Result<Self> {
        if values.len() != grid.nodes() {
            return Err(Error::shape("boundary field", grid.nodes(), values.len()));
        }
        if let Some(index) = first_non_finite(values.iter()) {
            return Err(Error::NonFinite {
                context: "boundary field",
                index,
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SpaceGrid) -> Self {
        Self {
            grid,
            values: Array1::zeros(grid.nodes()),
        }
    }

    pub fn constant(grid: SpaceGrid, value: f64) -> Self {
        Self {
            grid,
            values: Array1::from_elem(grid.nodes(), value),
        }
    }

    pub fn from_fn(grid: SpaceGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.coordinates().mapv(f),
        }
    }

    pub fn grid(&self) -> SpaceGrid {
        self.grid
    }

    pub fn values(&self) -> ArrayView1<'_, f64> {
        self.values.view()
    }

    pub fn into_values(self) -> Array1<f64> {
        self.values
    }

    /// Trace at `x = 0`.
    pub fn left(&self) -> f64 {
        self.values[0]
    }

    /// Trace at `x = l`.
    pub fn right(&self) -> f64 {
        self.values[self.grid.cells()]
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            values: &self.values * a,
        }
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Self) {
        assert_eq!(self.grid, other.grid, "boundary fields live on different grids");
        self.values.scaled_add(a, &other.values);
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.mapv(f),
        }
    }

    /// Piecewise-linear interpolation onto `target`.
    ///
    /// Nodes shared by both grids are copied exactly, so restriction from a
    /// grid refined by an integer factor is injection.
    pub fn resample(&self, target: SpaceGrid) -> Result<Self> {
        if target == self.grid {
            return Ok(self.clone());
        }
        if (target.length() - self.grid.length()).abs() > 1e-12 * self.grid.length() {
            return Err(Error::InvalidGrid(format!(
                "cannot resample from length {} to length {}",
                self.grid.length(),
                target.length()
            )));
        }
        let n = self.grid.cells();
        let values = target.coordinates().mapv(|x| {
            let s = x / self.grid.dx();
            let i = (s.floor() as usize).min(n - 1);
            let theta = s - i as f64;
            if theta.abs() < 1e-12 {
                self.values[i]
            } else if (1.0 - theta).abs() < 1e-12 {
                self.values[i + 1]
            } else {
                (1.0 - theta) * self.values[i] + theta * self.values[i + 1]
            }
        });
        Ok(Self { grid: target, values })
    }
}

impl Add for &BoundaryField {
    type Output = BoundaryField;

    fn add(self, rhs: Self) -> BoundaryField {
        assert_eq!(self.grid, rhs.grid, "boundary fields live on different grids");
        BoundaryField {
            grid: self.grid,
            values: &self.values + &rhs.values,
        }
    }
}

impl Sub for &BoundaryField {
    type Output = BoundaryField;

    fn sub(self, rhs: Self) -> BoundaryField {
        assert_eq!(self.grid, rhs.grid, "boundary fields live on different grids");
        BoundaryField {
            grid: self.grid,
            values: &self.values - &rhs.values,
        }
    }
}

impl Mul<&BoundaryField> for f64 {
    type Output = BoundaryField;

    fn mul(self, rhs: &BoundaryField) -> BoundaryField {
        rhs.scaled(self)
    }
}

/// Interior forcing `F(t_n, x_i)` together with the boundary forcing `G(t_n)` at `x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourcePair {
    mesh: Mesh,
    interior: Array2<f64>,
    boundary: Array1<f64>,
}

/// The adjoint gradient `(phi(t,x), phi(t,0))` has the layout of a source.
pub type GradientPair = SourcePair;

impl SourcePair {
    pub fn new(mesh: Mesh, interior: Array2<f64>, boundary: Array1<f64>) -> Result<Self> {
        let (nt1, nx1) = mesh.shape();
        if interior.dim() != (nt1, nx1) {
            return Err(Error::shape(
                "interior source",
                format!("{nt1}x{nx1}"),
                format!("{}x{}", interior.nrows(), interior.ncols()),
            ));
        }
        if boundary.len() != nt1 {
            return Err(Error::shape("boundary source", nt1, boundary.len()));
        }
        if let Some(index) = first_non_finite(interior.iter()) {
            return Err(Error::NonFinite {
                context: "interior source",
                index,
            });
        }
        if let Some(index) = first_non_finite(boundary.iter()) {
            return Err(Error::NonFinite {
                context: "boundary source",
                index,
            });
        }
        Ok(Self {
            mesh,
            interior,
            boundary,
        })
    }

    pub fn zeros(mesh: Mesh) -> Self {
        Self {
            mesh,
            interior: Array2::zeros(mesh.shape()),
            boundary: Array1::zeros(mesh.time.levels()),
        }
    }

    /// Samples `F(t, x)` and `G(t)` on the mesh.
    pub fn from_fn(mesh: Mesh, f: impl Fn(f64, f64) -> f64, g: impl Fn(f64) -> f64) -> Self {
        let x = mesh.space.coordinates();
        let t = mesh.time.times();
        let interior = Array2::from_shape_fn(mesh.shape(), |(n, i)| f(t[n], x[i]));
        let boundary = t.mapv(g);
        Self {
            mesh,
            interior,
            boundary,
        }
    }

    pub fn mesh(&self) -> Mesh {
        self.mesh
    }

    pub fn interior(&self) -> ArrayView2<'_, f64> {
        self.interior.view()
    }

    pub fn boundary(&self) -> ArrayView1<'_, f64> {
        self.boundary.view()
    }

    pub fn into_parts(self) -> (Array2<f64>, Array1<f64>) {
        (self.interior, self.boundary)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            mesh: self.mesh,
            interior: &self.interior * a,
            boundary: &self.boundary * a,
        }
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Self) {
        assert_eq!(self.mesh, other.mesh, "sources live on different meshes");
        self.interior.scaled_add(a, &other.interior);
        self.boundary.scaled_add(a, &other.boundary);
    }

    /// Clamps every interior sample into `[lo, hi]` and every boundary sample
    /// into `[glo, ghi]`. Bounds are assumed ordered.
    pub(crate) fn clamped(&self, (lo, hi): (f64, f64), (glo, ghi): (f64, f64)) -> Self {
        Self {
            mesh: self.mesh,
            interior: self.interior.mapv(|v| v.clamp(lo, hi)),
            boundary: self.boundary.mapv(|v| v.clamp(glo, ghi)),
        }
    }
}

impl Add for &SourcePair {
    type Output = SourcePair;

    fn add(self, rhs: Self) -> SourcePair {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SourcePair {
    type Output = SourcePair;

    fn sub(self, rhs: Self) -> SourcePair {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

/// Sampled displacement history `y(t_n, x_i)`; row `n` is time level `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    mesh: Mesh,
    values: Array2<f64>,
}

impl Trajectory {
    pub(crate) fn from_raw(mesh: Mesh, values: Array2<f64>) -> Self {
        debug_assert_eq!(values.dim(), mesh.shape());
        Self { mesh, values }
    }

    pub fn mesh(&self) -> Mesh {
        self.mesh
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn at(&self, level: usize) -> BoundaryField {
        BoundaryField {
            grid: self.mesh.space,
            values: self.values.row(level).to_owned(),
        }
    }

    /// `Y(T, .)`
    pub fn terminal(&self) -> BoundaryField {
        self.at(self.mesh.time.steps())
    }

    /// `y(., 0)`
    pub fn left_history(&self) -> ArrayView1<'_, f64> {
        self.values.column(0)
    }

    /// `y(., l)`
    pub fn right_history(&self) -> ArrayView1<'_, f64> {
        self.values.column(self.mesh.space.cells())
    }

    /// Reverses the time axis, `s = T - t`.
    pub fn time_reversed(&self) -> Self {
        Self {
            mesh: self.mesh,
            values: self.values.slice(s![..;-1, ..]).to_owned(),
        }
    }

    /// Max-norm distance to samples of `exact(t, x)`.
    pub fn max_error(&self, exact: impl Fn(f64, f64) -> f64) -> f64 {
        let x = self.mesh.space.coordinates();
        let t = self.mesh.time.times();
        let mut worst = 0.0_f64;
        for (n, row) in self.values.axis_iter(Axis(0)).enumerate() {
            Zip::from(&row).and(&x).for_each(|&y, &xi| {
                worst = worst.max((y - exact(t[n], xi)).abs());
            });
        }
        worst
    }

    /// Interprets the trajectory as a source on the same mesh: `(y(t,x), y(t,0))`.
    pub fn as_gradient(&self) -> GradientPair {
        SourcePair {
            mesh: self.mesh,
            interior: self.values.clone(),
            boundary: self.values.column(0).to_owned(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> SpaceGrid {
        SpaceGrid::new(1.0, n).unwrap()
    }

    #[test]
    fn rejects_wrong_length_and_nan() {
        assert!(BoundaryField::new(grid(4), Array1::zeros(4)).is_err());
        let mut v = Array1::zeros(5);
        v[3] = f64::NAN;
        match BoundaryField::new(grid(4), v) {
            Err(Error::NonFinite { index, .. }) => assert_eq!(index, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn traces_are_endpoint_samples() {
        let f = BoundaryField::from_fn(grid(10), |x| 1.0 + x);
        assert_eq!(f.left(), 1.0);
        assert_eq!(f.right(), 2.0);
    }

    #[test]
    fn resample_restricts_by_injection_and_interpolates_linear_data() {
        let fine = BoundaryField::from_fn(grid(20), |x| (3.0 * x).sin());
        let coarse = fine.resample(grid(10)).unwrap();
        for i in 0..=10 {
            assert_eq!(coarse.values()[i], fine.values()[2 * i]);
        }
        let line = BoundaryField::from_fn(grid(7), |x| 2.0 * x - 1.0);
        let other = line.resample(grid(13)).unwrap();
        let expected = BoundaryField::from_fn(grid(13), |x| 2.0 * x - 1.0);
        for (a, b) in other.values().iter().zip(expected.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn double_time_reversal_is_identity() {
        let mesh = Mesh::uniform(1.0, 8, 1.0, 0.9).unwrap();
        let values = Array2::from_shape_fn(mesh.shape(), |(n, i)| (n * 31 + i) as f64 * 0.1);
        let traj = Trajectory::from_raw(mesh, values);
        assert_eq!(traj.time_reversed().time_reversed(), traj);
        assert_eq!(
            traj.time_reversed().values().row(0),
            traj.values().row(mesh.time.steps())
        );
    }
}
