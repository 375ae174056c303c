//! Tikhonov cost, its adjoint gradient, and the separable-source variant.

use ndarray::{Array1, Array2, ArrayView2, Zip};

use crate::adjoint::solve_adjoint;
use crate::error::{Error, Result};
use crate::field::{BoundaryField, GradientPair, SourcePair, Trajectory};
use crate::forward::{solve_forward, solve_sensitivity, BoundaryForcing, InitialData};
use crate::grid::Mesh;
use crate::quadrature::{inner_l2, inner_l2b, inner_l2t, trapezoid_time};

/// Observed displacement at the final time.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub field: BoundaryField,
    pub noise_level: f64,
    /// Seed of the noise realisation, 0 for external data.
    pub seed: u64,
}

impl Measurement {
    pub fn exact(field: BoundaryField) -> Self {
        Self {
            field,
            noise_level: 0.0,
            seed: 0,
        }
    }
}

/// Final-time overdetermination problem for a general source `(F, G)`.
#[derive(Debug, Clone)]
pub struct InverseProblem {
    mesh: Mesh,
    init: InitialData,
    data: BoundaryField,
    measurement: Measurement,
}

impl InverseProblem {
    /// The measurement may live on another grid of the same interval; it is
    /// interpolated onto the solver grid once here.
    pub fn new(mesh: Mesh, init: InitialData, measurement: Measurement) -> Result<Self> {
        for field in [&init.displacement, &init.velocity] {
            if field.grid() != mesh.space {
                return Err(Error::shape("initial data", mesh.space.nodes(), field.grid().nodes()));
            }
        }
        let data = measurement.field.resample(mesh.space)?;
        Ok(Self {
            mesh,
            init,
            data,
            measurement,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn init(&self) -> &InitialData {
        &self.init
    }

    pub fn measurement(&self) -> &Measurement {
        &self.measurement
    }

    /// Measured data on the solver grid.
    pub fn data(&self) -> &BoundaryField {
        &self.data
    }

    fn check(&self, w: &SourcePair) -> Result<()> {
        if w.mesh() != self.mesh {
            return Err(Error::shape(
                "source",
                format!("{:?}", self.mesh.shape()),
                format!("{:?}", w.mesh().shape()),
            ));
        }
        Ok(())
    }

    pub fn state(&self, w: &SourcePair) -> Result<Trajectory> {
        self.check(w)?;
        solve_forward(
            &self.mesh,
            w.interior(),
            &BoundaryForcing::left_only(w.boundary().to_owned()),
            &self.init,
        )
    }

    /// `Y(T, ., w) - Y_T^delta`
    pub fn residual(&self, w: &SourcePair) -> Result<BoundaryField> {
        Ok(&self.state(w)?.terminal() - &self.data)
    }

    /// `½ ||Y(T, ., w) - Y_T^delta||²`
    pub fn cost(&self, w: &SourcePair) -> Result<f64> {
        let r = self.residual(w)?;
        Ok(0.5 * inner_l2b(&r, &r)?)
    }

    pub fn cost_regularized(&self, w: &SourcePair, eps: f64) -> Result<f64> {
        let misfit = self.cost(w)?;
        if eps == 0.0 {
            return Ok(misfit);
        }
        Ok(misfit + 0.5 * eps * inner_l2t(w, w)?)
    }

    /// Adjoint gradient `J'(w) = (phi(t,x), phi(t,0))`.
    pub fn gradient_full(&self, w: &SourcePair) -> Result<GradientPair> {
        let r = self.residual(w)?;
        Ok(solve_adjoint(&self.mesh, &r)?.as_gradient())
    }

    /// Cost and gradient of the regularised functional from a single forward solve.
    pub fn evaluate(&self, w: &SourcePair, eps: f64) -> Result<(f64, GradientPair)> {
        let r = self.residual(w)?;
        let mut grad = solve_adjoint(&self.mesh, &r)?.as_gradient();
        let mut cost = 0.5 * inner_l2b(&r, &r)?;
        if eps != 0.0 {
            cost += 0.5 * eps * inner_l2t(w, w)?;
            grad.axpy(eps, w);
        }
        Ok((cost, grad))
    }

    /// `||delta Y(T)||²`, the quantity whose positivity on a set of sources
    /// makes the quasi-solution unique there.
    pub fn observability(&self, dw: &SourcePair) -> Result<f64> {
        self.check(dw)?;
        let dy = solve_sensitivity(dw)?.terminal();
        inner_l2b(&dy, &dy)
    }
}

/// Spatial amplitude `f(x)` with a known modulation `r(t, x)`; `F = f r`, `G = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableSource {
    pub amplitude: BoundaryField,
    pub modulation: Array2<f64>,
}

impl SeparableSource {
    pub fn new(amplitude: BoundaryField, modulation: Array2<f64>) -> Result<Self> {
        if modulation.ncols() != amplitude.grid().nodes() {
            return Err(Error::shape("modulation", amplitude.grid().nodes(), modulation.ncols()));
        }
        if let Some(index) = modulation.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "modulation",
                index,
            });
        }
        Ok(Self { amplitude, modulation })
    }

    pub fn source_pair(&self, mesh: Mesh) -> Result<SourcePair> {
        separable_pair(mesh, &self.amplitude, self.modulation.view())
    }
}

fn separable_pair(mesh: Mesh, f: &BoundaryField, r: ArrayView2<'_, f64>) -> Result<SourcePair> {
    if r.dim() != mesh.shape() {
        return Err(Error::shape(
            "modulation",
            format!("{:?}", mesh.shape()),
            format!("{:?}", r.dim()),
        ));
    }
    let fv = f.values();
    let interior = Array2::from_shape_fn(mesh.shape(), |(n, i)| fv[i] * r[[n, i]]);
    SourcePair::new(mesh, interior, Array1::zeros(mesh.time.levels()))
}

/// Inverse problem for the amplitude `f` of a separable source.
#[derive(Debug, Clone)]
pub struct SeparableProblem {
    base: InverseProblem,
    modulation: Array2<f64>,
}

/// Result of one forward/adjoint pass for the separable problem.
#[derive(Debug, Clone)]
pub struct SpatialEvaluation {
    pub cost: f64,
    pub gradient: BoundaryField,
    pub terminal: BoundaryField,
}

impl SeparableProblem {
    pub fn new(base: InverseProblem, modulation: Array2<f64>) -> Result<Self> {
        if modulation.dim() != base.mesh.shape() {
            return Err(Error::shape(
                "modulation",
                format!("{:?}", base.mesh.shape()),
                format!("{:?}", modulation.dim()),
            ));
        }
        if let Some(index) = modulation.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "modulation",
                index,
            });
        }
        Ok(Self { base, modulation })
    }

    /// `r ≡ 1`
    pub fn unmodulated(base: InverseProblem) -> Self {
        let modulation = Array2::from_elem(base.mesh.shape(), 1.0);
        Self { base, modulation }
    }

    pub fn base(&self) -> &InverseProblem {
        &self.base
    }

    pub fn mesh(&self) -> &Mesh {
        &self.base.mesh
    }

    pub fn modulation(&self) -> ArrayView2<'_, f64> {
        self.modulation.view()
    }

    pub fn source(&self, f: &BoundaryField) -> Result<SourcePair> {
        if f.grid() != self.base.mesh.space {
            return Err(Error::shape(
                "amplitude",
                self.base.mesh.space.nodes(),
                f.grid().nodes(),
            ));
        }
        separable_pair(self.base.mesh, f, self.modulation.view())
    }

    /// `Y(T, ., f)` including the initial data.
    pub fn terminal(&self, f: &BoundaryField) -> Result<BoundaryField> {
        Ok(self.base.state(&self.source(f)?)?.terminal())
    }

    /// Input-output map `Psi f`: the final displacement from rest.
    pub fn response(&self, f: &BoundaryField) -> Result<BoundaryField> {
        Ok(solve_sensitivity(&self.source(f)?)?.terminal())
    }

    /// `½||Y(T,.,f) - Y_T^delta||² + (eps/2) ||f||²_{L²(0,l)}`
    pub fn cost_regularized(&self, f: &BoundaryField, eps: f64) -> Result<f64> {
        let r = &self.terminal(f)? - &self.base.data;
        Ok(0.5 * inner_l2b(&r, &r)? + 0.5 * eps * inner_l2(f, f)?)
    }

    /// `J'_eps(f)(x) = ∫ phi(t,x) r(t,x) dt + eps f(x)`
    pub fn gradient_spatial(&self, f: &BoundaryField, eps: f64) -> Result<BoundaryField> {
        Ok(self.evaluate(f, eps)?.gradient)
    }

    pub fn evaluate(&self, f: &BoundaryField, eps: f64) -> Result<SpatialEvaluation> {
        let terminal = self.terminal(f)?;
        let r = &terminal - &self.base.data;
        let cost = 0.5 * inner_l2b(&r, &r)? + 0.5 * eps * inner_l2(f, f)?;
        let phi = solve_adjoint(&self.base.mesh, &r)?;
        let dt = self.base.mesh.time.dt();
        let weighted = &phi.values() * &self.modulation;
        let mut gradient = Array1::zeros(self.base.mesh.space.nodes());
        Zip::from(&mut gradient)
            .and(weighted.columns())
            .and(&f.values())
            .for_each(|g, column, &fi| {
                *g = trapezoid_time(column, dt).expect("at least two time levels") + eps * fi;
            });
        Ok(SpatialEvaluation {
            cost,
            gradient: BoundaryField::new(self.base.mesh.space, gradient)?,
            terminal,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{smooth_field, smooth_source};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mesh(nx: usize) -> Mesh {
        Mesh::uniform(1.0, nx, 2.0, 0.9).unwrap()
    }

    fn problem(m: Mesh, data: BoundaryField) -> InverseProblem {
        InverseProblem::new(m, InitialData::zeros(&m), Measurement::exact(data)).unwrap()
    }

    #[test]
    fn cost_of_zero_everything_is_zero() {
        let m = mesh(10);
        let p = problem(m, BoundaryField::zeros(m.space));
        assert_eq!(p.cost(&SourcePair::zeros(m)).unwrap(), 0.0);
    }

    #[test]
    fn cost_against_constant_one_data() {
        let m = mesh(10);
        let p = problem(m, BoundaryField::constant(m.space, 1.0));
        let c = p.cost(&SourcePair::zeros(m)).unwrap();
        assert!((c - 1.5).abs() < 1e-12);
    }

    #[test]
    fn self_measurement_has_zero_cost_and_gradient() {
        let m = mesh(20);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = smooth_source(&m, &mut rng);
        let y = solve_sensitivity(&w).unwrap().terminal();
        let p = problem(m, y);
        assert!(p.cost(&w).unwrap() < 1e-28);
        let g = p.gradient_full(&w).unwrap();
        assert!(g.interior().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn regularized_cost_reduces_correctly() {
        let m = mesh(10);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = smooth_source(&m, &mut rng);
        let y = solve_sensitivity(&w).unwrap().terminal();
        let p = problem(m, y);
        let norm2 = inner_l2t(&w, &w).unwrap();
        // eps = 2 with ||w||² rescaled to 3 and zero residual gives 3
        let scale = (3.0 / norm2).sqrt();
        let ws = w.scaled(scale);
        let ps = problem(m, solve_sensitivity(&ws).unwrap().terminal());
        assert!((ps.cost_regularized(&ws, 2.0).unwrap() - 3.0).abs() < 1e-10);
        assert_eq!(p.cost_regularized(&w, 0.0).unwrap(), p.cost(&w).unwrap());
        let z = SourcePair::zeros(m);
        assert_eq!(p.cost_regularized(&z, 0.7).unwrap(), p.cost(&z).unwrap());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let m = mesh(100);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let w = smooth_source(&m, &mut rng);
        let dw = smooth_source(&m, &mut rng);
        let p = problem(m, smooth_field(m.space, &mut rng));
        let g = p.gradient_full(&w).unwrap();
        let adjoint = inner_l2t(&g, &dw).unwrap();
        let h = 1e-4;
        let mut plus = w.clone();
        plus.axpy(h, &dw);
        let mut minus = w.clone();
        minus.axpy(-h, &dw);
        let fd = (p.cost(&plus).unwrap() - p.cost(&minus).unwrap()) / (2.0 * h);
        assert!((adjoint - fd).abs() / fd.abs() < 1e-2, "{adjoint} vs {fd}");
    }

    #[test]
    fn regularized_gradient_adds_eps_times_source() {
        let m = mesh(20);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = smooth_source(&m, &mut rng);
        let p = problem(m, smooth_field(m.space, &mut rng));
        let (_, g_eps) = p.evaluate(&w, 0.25).unwrap();
        let mut expected = p.gradient_full(&w).unwrap();
        expected.axpy(0.25, &w);
        for (a, b) in g_eps.interior().iter().zip(expected.interior()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn spatial_gradient_reduces_to_regularizer_for_zero_residual() {
        let m = mesh(20);
        let f = BoundaryField::from_fn(m.space, |x| 1.0 + x * x);
        let base = problem(m, BoundaryField::zeros(m.space));
        let sp = SeparableProblem::unmodulated(base);
        let data = sp.response(&f).unwrap();
        let sp = SeparableProblem::unmodulated(problem(m, data));
        let g0 = sp.gradient_spatial(&f, 0.0).unwrap();
        assert!(g0.values().iter().all(|&v| v == 0.0));
        let g = sp.gradient_spatial(&f, 1e-8).unwrap();
        for (a, b) in g.values().iter().zip(f.values()) {
            assert!((a - 1e-8 * b).abs() < 1e-22);
        }
    }

    #[test]
    fn spatial_gradient_matches_central_differences() {
        let m = mesh(100);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let r = Array2::from_shape_fn(m.shape(), |(n, i)| 1.0 + 0.3 * (m.time.t(n)).sin() * m.space.x(i));
        let sp = SeparableProblem::new(problem(m, smooth_field(m.space, &mut rng)), r).unwrap();
        let f = smooth_field(m.space, &mut rng);
        let df = smooth_field(m.space, &mut rng);
        let eps = 1e-3;
        let g = sp.gradient_spatial(&f, eps).unwrap();
        let adjoint = inner_l2(&g, &df).unwrap();
        let h = 1e-4;
        let mut plus = f.clone();
        plus.axpy(h, &df);
        let mut minus = f.clone();
        minus.axpy(-h, &df);
        let fd = (sp.cost_regularized(&plus, eps).unwrap() - sp.cost_regularized(&minus, eps).unwrap()) / (2.0 * h);
        assert!((adjoint - fd).abs() / fd.abs() < 1e-2, "{adjoint} vs {fd}");
    }

    #[test]
    fn measurement_on_finer_grid_is_restricted() {
        let m = mesh(10);
        let fine = BoundaryField::from_fn(crate::grid::SpaceGrid::new(1.0, 20).unwrap(), |x| x.sin());
        let p = problem(m, fine);
        assert_eq!(p.data().grid(), m.space);
        assert_eq!(p.data().values()[5], (0.5_f64).sin());
    }
}
