//! Synthetic reconstruction experiments.
//!
//! Every example uses `T = 2`, `l = 1`, `r ≡ 1`, zero initial data and the
//! initial guess `f_0 = 0`. Noisy data are
//! `Y_T^delta = Y_T + p ||Y_T|| xi` with `xi_i` i.i.d. uniform on `[-1, 1]`,
//! one draw per node.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::BoundaryField;
use crate::forward::{solve_forward, BoundaryForcing, InitialData};
use crate::functional::{InverseProblem, Measurement, SeparableProblem, SeparableSource};
use crate::grid::Mesh;
use crate::optimizer::{cg_reconstruct, GroundTruth, IterationRecord, OptimizerConfig, StepRule, StopStatus};
use crate::quadrature::{inner_l2, inner_l2b, norm_l2, norm_l2b};

pub const FINAL_TIME: f64 = 2.0;
pub const LENGTH: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Example {
    /// `½ (sin(πx) + √x)`
    One,
    /// `2π x² (1 - x)`
    Two,
    /// `¼ (arctan(x/π) - sin(2πx)) + ½`
    Three,
}

impl Example {
    pub const ALL: [Example; 3] = [Example::One, Example::Two, Example::Three];

    pub fn from_index(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Example::One),
            2 => Ok(Example::Two),
            3 => Ok(Example::Three),
            _ => Err(Error::InvalidArgument(format!(
                "unknown example {n}, expected 1, 2 or 3"
            ))),
        }
    }

    pub fn index(&self) -> usize {
        match self {
            Example::One => 1,
            Example::Two => 2,
            Example::Three => 3,
        }
    }

    pub fn amplitude(&self, x: f64) -> f64 {
        match self {
            Example::One => 0.5 * ((PI * x).sin() + x.sqrt()),
            Example::Two => 2.0 * PI * x * x * (1.0 - x),
            Example::Three => 0.25 * ((x / PI).atan() - (2.0 * PI * x).sin()) + 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub cells: usize,
    pub courant: f64,
    pub eps: f64,
    pub stop_tol: f64,
    pub max_iter: usize,
    /// Generate data on a mesh with twice as many cells and restrict it,
    /// instead of reusing the inversion mesh.
    pub refine_data: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            cells: 100,
            courant: 0.9,
            eps: 1e-8,
            stop_tol: 1e-8,
            max_iter: 40,
            refine_data: false,
        }
    }
}

impl ExperimentConfig {
    pub fn mesh(&self) -> Result<Mesh> {
        Mesh::uniform(LENGTH, self.cells, FINAL_TIME, self.courant)
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            eps: self.eps,
            stop_tol: self.stop_tol,
            max_iter: self.max_iter,
            step_rule: StepRule::ConjugateGradient,
            bounds: None,
        }
    }
}

/// Final displacement `Psi f` for the source `F = f r`, `G = 0`.
pub fn synthesize_measurement(
    f_true: &BoundaryField,
    modulation: &Array2<f64>,
    init: &InitialData,
    mesh: &Mesh,
) -> Result<BoundaryField> {
    let source = SeparableSource::new(f_true.clone(), modulation.clone())?.source_pair(*mesh)?;
    let traj = solve_forward(mesh, source.interior(), &BoundaryForcing::zeros(mesh), init)?;
    Ok(traj.terminal())
}

/// `Y_T + p ||Y_T|| xi`, `xi_i ~ U[-1, 1]` from a ChaCha8 stream seeded with `seed`.
pub fn add_noise(clean: &BoundaryField, noise_level: f64, seed: u64) -> Result<Measurement> {
    if !(noise_level >= 0.0 && noise_level.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise level must be >= 0, got {noise_level}"
        )));
    }
    if noise_level == 0.0 {
        return Ok(Measurement {
            field: clean.clone(),
            noise_level,
            seed,
        });
    }
    let amplitude = noise_level * norm_l2b(clean);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = clean.values().mapv(|v| v + amplitude * rng.random_range(-1.0..=1.0));
    let noisy = BoundaryField::new(clean.grid(), values)?;
    Ok(Measurement {
        field: noisy,
        noise_level,
        seed,
    })
}

/// `e = ||Psi f_k - Y_T||²` with `terminal = Psi f_k`.
pub fn conv_error(terminal: &BoundaryField, clean: &BoundaryField) -> Result<f64> {
    let r = terminal - &clean.resample(terminal.grid())?;
    inner_l2b(&r, &r)
}

/// `E = ||f - f_k||_{L²(0,l)}`, without the trace terms.
pub fn acc_error(f_k: &BoundaryField, f_true: &BoundaryField) -> Result<f64> {
    if f_k.grid() != f_true.grid() {
        return Err(Error::shape(
            "accuracy error",
            f_true.grid().nodes(),
            f_k.grid().nodes(),
        ));
    }
    let d = f_true - f_k;
    Ok(inner_l2(&d, &d)?.sqrt())
}

/// `L_T = [3 T⁴ (l + (l + 2) T² / l)]^{1/2}`
pub fn lipschitz_constant(final_time: f64, length: f64) -> Result<f64> {
    if !(final_time > 0.0 && length > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Lipschitz constant needs T > 0 and l > 0, got T = {final_time}, l = {length}"
        )));
    }
    let t2 = final_time * final_time;
    Ok((3.0 * t2 * t2 * (length + (length + 2.0) / length * t2)).sqrt())
}

/// Seed of the noise stream for one (seed, example, noise level) run.
pub fn stream_seed(seed: u64, example: Example, noise_level: f64) -> u64 {
    // splitmix64 finaliser over the packed inputs
    let mut z =
        seed ^ (example.index() as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ noise_level.to_bits().rotate_left(17);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub noise_level: f64,
    pub seed: u64,
    pub records: Vec<IterationRecord>,
    pub recovered: BoundaryField,
    pub status: StopStatus,
    /// `||f - f_final|| / ||f||` in `L²(0,l)`.
    pub relative_error: f64,
    /// Data generated on the inversion mesh itself.
    pub inverse_crime: bool,
}

impl RunReport {
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleReport {
    pub example: Example,
    pub mesh: Mesh,
    pub exact: BoundaryField,
    pub clean: BoundaryField,
    pub runs: Vec<RunReport>,
}

fn clean_data(example: Example, mesh: &Mesh, cfg: &ExperimentConfig) -> Result<BoundaryField> {
    let data_mesh = if cfg.refine_data {
        Mesh::uniform(LENGTH, 2 * cfg.cells, FINAL_TIME, cfg.courant)?
    } else {
        *mesh
    };
    let f = BoundaryField::from_fn(data_mesh.space, |x| example.amplitude(x));
    let r = Array2::from_elem(data_mesh.shape(), 1.0);
    synthesize_measurement(&f, &r, &InitialData::zeros(&data_mesh), &data_mesh)
}

/// Runs the conjugate-gradient reconstruction for every `(noise, seed)` pair.
///
/// Runs are independent and execute in parallel; the output order follows
/// `noise_levels` then `seeds`, and results do not depend on scheduling.
pub fn run_example(
    example: Example,
    noise_levels: &[f64],
    seeds: &[u64],
    cfg: &ExperimentConfig,
) -> Result<ExampleReport> {
    let mesh = cfg.mesh()?;
    let exact = BoundaryField::from_fn(mesh.space, |x| example.amplitude(x));
    let data = clean_data(example, &mesh, cfg)?;
    let clean = data.resample(mesh.space)?;
    let truth = GroundTruth {
        clean: clean.clone(),
        amplitude: exact.clone(),
    };
    let optimizer = cfg.optimizer();
    let exact_norm = norm_l2(&exact);

    let jobs: Vec<(f64, u64)> = noise_levels
        .iter()
        .flat_map(|&p| seeds.iter().map(move |&s| (p, s)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(p, seed)| -> Result<RunReport> {
            let measurement = add_noise(&data, p, stream_seed(seed, example, p))?;
            let base = InverseProblem::new(mesh, InitialData::zeros(&mesh), measurement)?;
            let problem = SeparableProblem::unmodulated(base);
            let out = cg_reconstruct(&problem, &BoundaryField::zeros(mesh.space), &optimizer, Some(&truth))?;
            let relative_error = acc_error(&out.solution, &exact)? / exact_norm;
            Ok(RunReport {
                noise_level: p,
                seed,
                records: out.records,
                recovered: out.solution,
                status: out.status,
                relative_error,
                inverse_crime: !cfg.refine_data,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExampleReport {
        example,
        mesh,
        exact,
        clean,
        runs,
    })
}

/// Convenience for tables: `(k, e, E)` for `k = 1..=n`.
pub fn error_table(run: &RunReport, n: usize) -> Vec<(usize, f64, f64)> {
    run.records
        .iter()
        .filter(|r| r.k >= 1 && r.k <= n)
        .filter_map(|r| Some((r.k, r.conv_error?, r.acc_error?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh(nx: usize) -> Mesh {
        Mesh::uniform(1.0, nx, 2.0, 0.9).unwrap()
    }

    #[test]
    fn lipschitz_constant_closed_form() {
        let lt = lipschitz_constant(2.0, 1.0).unwrap();
        assert!((lt - 624.0_f64.sqrt()).abs() < 1e-12);
        assert!((lt - 24.980).abs() < 1e-3);
        assert!(lipschitz_constant(1e-6, 1.0).unwrap() < 1e-10);
        let ts: Vec<f64> = (1..200).map(|k| k as f64 * 0.05).collect();
        for pair in ts.windows(2) {
            assert!(lipschitz_constant(pair[1], 1.3).unwrap() > lipschitz_constant(pair[0], 1.3).unwrap());
        }
        assert!(lipschitz_constant(0.0, 1.0).is_err());
        assert!(lipschitz_constant(1.0, -1.0).is_err());
    }

    #[test]
    fn zero_amplitude_gives_zero_data_and_measurement_is_linear() {
        let m = mesh(20);
        let r = Array2::from_elem(m.shape(), 1.0);
        let init = InitialData::zeros(&m);
        let zero = synthesize_measurement(&BoundaryField::zeros(m.space), &r, &init, &m).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        let f = BoundaryField::from_fn(m.space, |x| Example::One.amplitude(x));
        let y1 = synthesize_measurement(&f, &r, &init, &m).unwrap();
        let y2 = synthesize_measurement(&f.scaled(2.0), &r, &init, &m).unwrap();
        for (a, b) in y1.values().iter().zip(y2.values()) {
            assert!((2.0 * a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn example_one_measurement_fixture() {
        // regression fixture, nx = 100, dt/dx <= 0.9 (223 steps)
        let m = mesh(100);
        let f = BoundaryField::from_fn(m.space, |x| Example::One.amplitude(x));
        let y = synthesize_measurement(&f, &Array2::from_elem(m.shape(), 1.0), &InitialData::zeros(&m), &m).unwrap();
        assert_eq!(m.time.steps(), 223);
        let expected_norm = 0.754_613_035_978_705_1; // ||Y_T|| at this resolution
        assert!((norm_l2b(&y) - expected_norm).abs() < 1e-9, "{}", norm_l2b(&y));
    }

    #[test]
    fn noise_is_deterministic_and_bounded() {
        let m = mesh(50);
        let y = BoundaryField::from_fn(m.space, |x| (x * 3.0).sin() + 0.2);
        assert_eq!(add_noise(&y, 0.0, 99).unwrap().field, y);
        assert_eq!(add_noise(&y, 0.03, 5).unwrap(), add_noise(&y, 0.03, 5).unwrap());
        assert_ne!(
            add_noise(&y, 0.03, 5).unwrap().field,
            add_noise(&y, 0.03, 6).unwrap().field
        );
        let bound = 0.05 * norm_l2b(&y) * 3.0_f64.sqrt();
        for seed in 0..100 {
            let noisy = add_noise(&y, 0.05, seed).unwrap().field;
            assert!(norm_l2b(&(&noisy - &y)) <= bound);
        }
        assert!(add_noise(&y, -0.1, 0).is_err());
    }

    #[test]
    fn error_metrics() {
        let m = mesh(10);
        let one = BoundaryField::constant(m.space, 1.0);
        let zero = BoundaryField::zeros(m.space);
        assert!((acc_error(&zero, &one).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(acc_error(&one, &one).unwrap(), 0.0);
        assert!((conv_error(&zero, &one).unwrap() - 3.0).abs() < 1e-14);
        assert_eq!(conv_error(&one, &one).unwrap(), 0.0);
        let other = BoundaryField::zeros(crate::grid::SpaceGrid::new(2.0, 10).unwrap());
        assert!(acc_error(&other, &one).is_err());
    }

    #[test]
    fn runs_are_reproducible_and_ordered() {
        let cfg = ExperimentConfig {
            cells: 20,
            max_iter: 5,
            ..Default::default()
        };
        let a = run_example(Example::Two, &[0.0, 0.03], &[1, 2], &cfg).unwrap();
        let b = run_example(Example::Two, &[0.0, 0.03], &[1, 2], &cfg).unwrap();
        assert_eq!(a, b);
        let order: Vec<(f64, u64)> = a.runs.iter().map(|r| (r.noise_level, r.seed)).collect();
        assert_eq!(order, vec![(0.0, 1), (0.0, 2), (0.03, 1), (0.03, 2)]);
        assert!(a.runs.iter().all(|r| r.inverse_crime));
    }

    #[test]
    fn refined_data_avoids_the_inverse_crime() {
        let cfg = ExperimentConfig {
            cells: 20,
            max_iter: 3,
            refine_data: true,
            ..Default::default()
        };
        let report = run_example(Example::One, &[0.0], &[0], &cfg).unwrap();
        assert!(!report.runs[0].inverse_crime);
        assert_eq!(report.clean.grid(), report.mesh.space);
    }

    #[test]
    fn unknown_example_index_is_rejected() {
        assert!(Example::from_index(4).is_err());
        assert_eq!(Example::from_index(3).unwrap(), Example::Three);
    }
}
