//! Random smooth fields and sources for verification runs.
//!
//! Samples are low-order trigonometric expansions with uniform coefficients,
//! so they are resolved on every mesh used here and converge under
//! refinement like any smooth function would.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::field::{BoundaryField, SourcePair};
use crate::grid::{Mesh, SpaceGrid};

const SPACE_MODES: usize = 4;
const TIME_MODES: usize = 3;

fn coefficients<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

fn space_mode(j: usize, x: f64, l: f64) -> f64 {
    (j as f64 * PI * x / l).cos()
}

fn time_mode(k: usize, t: f64, final_time: f64) -> f64 {
    (k as f64 * PI * t / final_time).cos()
}

pub fn smooth_field<R: Rng + ?Sized>(grid: SpaceGrid, rng: &mut R) -> BoundaryField {
    let c = coefficients(rng, SPACE_MODES);
    let l = grid.length();
    BoundaryField::from_fn(grid, |x| {
        c.iter().enumerate().map(|(j, a)| a * space_mode(j, x, l)).sum()
    })
}

pub fn smooth_source<R: Rng + ?Sized>(mesh: &Mesh, rng: &mut R) -> SourcePair {
    let c = coefficients(rng, SPACE_MODES * TIME_MODES);
    let d = coefficients(rng, TIME_MODES);
    let (l, tf) = (mesh.space.length(), mesh.time.final_time());
    SourcePair::from_fn(
        *mesh,
        |t, x| {
            let mut v = 0.0;
            for k in 0..TIME_MODES {
                for j in 0..SPACE_MODES {
                    v += c[k * SPACE_MODES + j] * time_mode(k, t, tf) * space_mode(j, x, l);
                }
            }
            v
        },
        |t| d.iter().enumerate().map(|(k, a)| a * time_mode(k, t, tf)).sum(),
    )
}

/// Independent uniform samples on `[-1, 1]` at every node.
pub fn white_source<R: Rng + ?Sized>(mesh: &Mesh, rng: &mut R) -> SourcePair {
    let interior = Array2::from_shape_simple_fn(mesh.shape(), || rng.random_range(-1.0..=1.0));
    let boundary = Array1::from_shape_simple_fn(mesh.time.levels(), || rng.random_range(-1.0..=1.0));
    SourcePair::new(*mesh, interior, boundary).expect("finite samples")
}
