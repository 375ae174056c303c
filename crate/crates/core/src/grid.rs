//! Uniform space and time grids.

use ndarray::Array1;

use crate::error::{Error, Result};

/// Default upper bound for `dt/dx`.
pub const DEFAULT_CFL_MAX: f64 = 0.9;

/// Vertex-centred grid on `[0, l]` with nodes `x_i = i * dx`, `i = 0..=cells`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceGrid {
    length: f64,
    cells: usize,
}

impl SpaceGrid {
    /// The boundary stencils reach two nodes inwards.
    pub const MIN_CELLS: usize = 4;

    pub fn new(length: f64, cells: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        if cells < Self::MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "need at least {} cells, got {cells}",
                Self::MIN_CELLS
            )));
        }
        Ok(Self { length, cells })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Number of nodes, `cells + 1`.
    pub fn nodes(&self) -> usize {
        self.cells + 1
    }

    pub fn dx(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.cells {
            self.length
        } else {
            i as f64 * self.dx()
        }
    }

    pub fn coordinates(&self) -> Array1<f64> {
        (0..self.nodes()).map(|i| self.x(i)).collect()
    }
}

/// Uniform grid on `[0, T]` with `steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    final_time: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(final_time: f64, steps: usize) -> Result<Self> {
        if !(final_time.is_finite() && final_time > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "final time must be positive, got {final_time}"
            )));
        }
        if steps < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 time steps, got {steps}")));
        }
        Ok(Self { final_time, steps })
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of time levels, `steps + 1`.
    pub fn levels(&self) -> usize {
        self.steps + 1
    }

    pub fn dt(&self) -> f64 {
        self.final_time / self.steps as f64
    }

    pub fn t(&self, n: usize) -> f64 {
        if n == self.steps {
            self.final_time
        } else {
            n as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Array1<f64> {
        (0..self.levels()).map(|n| self.t(n)).collect()
    }
}

/// A space grid paired with a time grid that satisfies the CFL bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    pub space: SpaceGrid,
    pub time: TimeGrid,
}

impl Mesh {
    pub fn new(space: SpaceGrid, time: TimeGrid, cfl_max: f64) -> Result<Self> {
        let mesh = Self { space, time };
        let courant = mesh.courant();
        // one rounding unit of slack so that `with_courant(.., cfl_max)` always validates
        if courant > cfl_max * (1.0 + 4.0 * f64::EPSILON) {
            return Err(Error::Cfl {
                courant,
                limit: cfl_max,
            });
        }
        Ok(mesh)
    }

    /// Picks the smallest step count with `dt/dx <= courant`, capped at
    /// [`DEFAULT_CFL_MAX`].
    pub fn with_courant(space: SpaceGrid, final_time: f64, courant: f64) -> Result<Self> {
        Self::with_courant_limit(space, final_time, courant, DEFAULT_CFL_MAX)
    }

    pub fn with_courant_limit(space: SpaceGrid, final_time: f64, courant: f64, cfl_max: f64) -> Result<Self> {
        if !(courant.is_finite() && courant > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "courant number must be positive, got {courant}"
            )));
        }
        let steps = (final_time / (courant * space.dx()) - 1e-9).ceil().max(2.0) as usize;
        Self::new(space, TimeGrid::new(final_time, steps)?, cfl_max)
    }

    /// Builds the `[0, length] x [0, final_time]` mesh used throughout the examples.
    pub fn uniform(length: f64, cells: usize, final_time: f64, courant: f64) -> Result<Self> {
        Self::with_courant(SpaceGrid::new(length, cells)?, final_time, courant)
    }

    pub fn courant(&self) -> f64 {
        self.time.dt() / self.space.dx()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.time.levels(), self.space.nodes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_times_cells_is_length() {
        for cells in [4, 7, 100, 333, 1024] {
            let g = SpaceGrid::new(1.7, cells).unwrap();
            assert!((g.dx() * cells as f64 - 1.7).abs() <= 1.7 * f64::EPSILON);
            assert_eq!(g.x(cells), 1.7);
        }
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(SpaceGrid::new(1.0, 3).is_err());
        assert!(SpaceGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(2.0, 1).is_err());
        assert!(TimeGrid::new(-1.0, 10).is_err());
    }

    #[test]
    fn cfl_cap_is_enforced() {
        let space = SpaceGrid::new(1.0, 100).unwrap();
        let time = TimeGrid::new(2.0, 200).unwrap();
        match Mesh::new(space, time, DEFAULT_CFL_MAX) {
            Err(Error::Cfl { courant, .. }) => assert!((courant - 1.0).abs() < 1e-12),
            other => panic!("expected CFL error, got {other:?}"),
        }
        let mesh = Mesh::with_courant(space, 2.0, 0.9).unwrap();
        assert!(mesh.courant() <= 0.9);
        assert_eq!(mesh.time.steps(), 223);
        assert!(Mesh::with_courant(space, 2.0, 0.95).is_err());
        assert!(Mesh::with_courant_limit(space, 2.0, 0.95, 1.0).is_ok());
    }
}
