//! Subcommand implementations.

/// Status output that tolerates a closed stdout.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use kinwave::experiment::{error_table, ExampleReport};
use kinwave::sampling::{smooth_field, smooth_source};
use kinwave::{
    cg_reconstruct, energy_history, inner_l2t, run_example, solve_forward, BoundaryField, BoundaryForcing, Example,
    ExperimentConfig, InitialData, InverseProblem, Measurement, Mesh, SeparableProblem, SourcePair, Trajectory,
};
use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Config, SourceKind};
use crate::error::{CliError, Result};
use crate::input::read_measurement;
use crate::output::{num, opt, Outputs, Table};
use crate::svg::{Plot, Series};

/// Manufactured solutions must match to within `TOL_FACTOR * dt²` in max norm.
pub const TOL_FACTOR: f64 = 10.0;

/// Relative errors below this are treated as round-off when checking the
/// convergence ratio of the gradient test.
const ROUNDOFF_FLOOR: f64 = 1e-12;

/// Step for the central difference. The cost is quadratic, so the quotient
/// is exact up to round-off and the value barely matters.
const FD_STEP: f64 = 1e-3;

fn field_table(f: &BoundaryField) -> Table {
    let mut t = Table::new(&["x", "value"]);
    let g = f.grid();
    for (i, v) in f.values().iter().enumerate() {
        t.push(vec![num(g.x(i)), num(*v)]);
    }
    t
}

fn announce(written: &[PathBuf]) {
    for p in written {
        say!("wrote {}", p.display());
    }
}

struct ForwardCase {
    interior: Array2<f64>,
    forcing: BoundaryForcing,
    init: InitialData,
    exact: Option<Box<dyn Fn(f64, f64) -> f64>>,
}

fn forward_case(cfg: &Config, mesh: &Mesh) -> Result<ForwardCase> {
    let shape = mesh.shape();
    let levels = mesh.time.levels();
    let times = mesh.time.times();
    let l = mesh.space.length();
    let zero = |exact| ForwardCase {
        interior: Array2::zeros(shape),
        forcing: BoundaryForcing::zeros(mesh),
        init: InitialData::zeros(mesh),
        exact,
    };
    Ok(match cfg.source.kind {
        SourceKind::Zero => zero(Some(Box::new(|_, _| 0.0))),
        SourceKind::Quadratic => ForwardCase {
            interior: Array2::ones(shape),
            forcing: BoundaryForcing {
                left: Array1::ones(levels),
                right: Array1::ones(levels),
            },
            init: InitialData::zeros(mesh),
            exact: Some(Box::new(|t, _| 0.5 * t * t)),
        },
        SourceKind::Cosine => {
            let k = PI / l;
            let g = times.mapv(|t| k * k * (k * t).cos());
            ForwardCase {
                interior: Array2::zeros(shape),
                forcing: BoundaryForcing { left: -&g, right: g },
                init: InitialData {
                    displacement: BoundaryField::from_fn(mesh.space, |x| (k * x).cos()),
                    velocity: BoundaryField::zeros(mesh.space),
                },
                exact: Some(Box::new(move |t, x| (k * x).cos() * (k * t).cos())),
            }
        }
        SourceKind::Example => {
            let example = Example::from_index(cfg.source.example).map_err(|e| cfg.error(e.to_string()))?;
            let mut case = zero(None);
            let f = BoundaryField::from_fn(mesh.space, |x| example.amplitude(x));
            for mut row in case.interior.rows_mut() {
                row.assign(&f.values());
            }
            case
        }
        SourceKind::Smooth => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.source.seed);
            let (interior, boundary) = smooth_source(mesh, &mut rng).into_parts();
            ForwardCase {
                interior,
                forcing: BoundaryForcing::left_only(boundary),
                init: InitialData::zeros(mesh),
                exact: None,
            }
        }
    })
}

fn snapshot_levels(steps: usize, count: usize) -> Vec<usize> {
    let count = count.max(2);
    let mut levels: Vec<usize> = (0..count)
        .map(|j| ((j * steps) as f64 / (count - 1) as f64).round() as usize)
        .collect();
    levels.dedup();
    levels
}

fn snapshot_table(traj: &Trajectory, count: usize) -> Table {
    let mesh = traj.mesh();
    let mut t = Table::new(&["t", "x", "value"]);
    for n in snapshot_levels(mesh.time.steps(), count) {
        let row = traj.values().row(n).to_owned();
        for (i, v) in row.iter().enumerate() {
            t.push(vec![num(mesh.time.t(n)), num(mesh.space.x(i)), num(*v)]);
        }
    }
    t
}

pub fn forward(cfg: &Config) -> Result<()> {
    let mesh = cfg.mesh()?;
    let case = forward_case(cfg, &mesh)?;
    let traj = solve_forward(&mesh, case.interior.view(), &case.forcing, &case.init)?;
    let terminal = traj.terminal();
    let dir = &cfg.output.dir;
    let mut out = Outputs::default();
    let tolerance = TOL_FACTOR * mesh.time.dt().powi(2);

    let mut violation = None;
    let terminal_table = match &case.exact {
        None => field_table(&terminal),
        Some(exact) => {
            let max_error = traj.max_error(exact);
            say!("max error {} (tolerance {})", num(max_error), num(tolerance));
            if max_error > tolerance {
                violation = Some(format!(
                    "max-norm error {} exceeds {} = {TOL_FACTOR} dt²",
                    num(max_error),
                    num(tolerance)
                ));
            }
            let tf = mesh.time.final_time();
            let mut t = Table::new(&["x", "value", "exact", "error", "tolerance"]);
            for (i, v) in terminal.values().iter().enumerate() {
                let x = mesh.space.x(i);
                let e = exact(tf, x);
                t.push(vec![num(x), num(*v), num(e), num((v - e).abs()), num(tolerance)]);
            }
            t
        }
    };
    out.add_table(dir.join("terminal.csv"), &terminal_table);
    out.add_table(dir.join("snapshots.csv"), &snapshot_table(&traj, cfg.output.snapshots));
    let mut energy = Table::new(&["t", "energy"]);
    for (t, e) in energy_history(&traj) {
        energy.push(vec![num(t), num(e)]);
    }
    out.add_table(dir.join("energy.csv"), &energy);
    announce(&out.commit(dir)?);
    match violation {
        Some(msg) => Err(CliError::Tolerance(msg)),
        None => Ok(()),
    }
}

pub struct GradcheckRow {
    pub cells: usize,
    pub adjoint: f64,
    pub finite_difference: f64,
    pub rel_error: f64,
}

fn gradcheck_level(cfg: &Config, cells: usize) -> Result<GradcheckRow> {
    let mesh = cfg.mesh_with_cells(cells)?;
    let (w, data, dw) = if cfg.source.kind == SourceKind::Zero {
        (
            SourcePair::zeros(mesh),
            BoundaryField::zeros(mesh.space),
            SourcePair::zeros(mesh),
        )
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.source.seed);
        let w = smooth_source(&mesh, &mut rng);
        let data = smooth_field(mesh.space, &mut rng);
        let dw = smooth_source(&mesh, &mut rng);
        (w, data, dw)
    };
    let problem = InverseProblem::new(mesh, InitialData::zeros(&mesh), Measurement::exact(data))?;
    let (_, grad) = problem.evaluate(&w, 0.0)?;
    let adjoint = inner_l2t(&grad, &dw)?;
    let mut plus = w.clone();
    plus.axpy(FD_STEP, &dw);
    let mut minus = w;
    minus.axpy(-FD_STEP, &dw);
    let finite_difference = (problem.cost(&plus)? - problem.cost(&minus)?) / (2.0 * FD_STEP);
    let diff = (adjoint - finite_difference).abs();
    let rel_error = if diff == 0.0 {
        0.0
    } else {
        diff / finite_difference.abs().max(f64::MIN_POSITIVE)
    };
    Ok(GradcheckRow {
        cells,
        adjoint,
        finite_difference,
        rel_error,
    })
}

/// Adjoint gradient against central differences on `nx/2`, `nx` and `2nx` cells.
pub fn gradcheck_rows(cfg: &Config) -> Result<Vec<GradcheckRow>> {
    let nx = cfg.grid.cells;
    if !nx.is_multiple_of(2) {
        return Err(cfg.error(format!("gradcheck needs an even cell count, got {nx}")));
    }
    [nx / 2, nx, 2 * nx].iter().map(|&n| gradcheck_level(cfg, n)).collect()
}

pub fn gradcheck(cfg: &Config) -> Result<()> {
    let rows = gradcheck_rows(cfg)?;
    let mut table = Table::new(&["cells", "adjoint", "finite_difference", "rel_error", "ratio", "order"]);
    let mut problems = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let ratio = (i > 0 && r.rel_error > 0.0).then(|| rows[i - 1].rel_error / r.rel_error);
        let order = ratio.map(f64::log2);
        table.push(vec![
            r.cells.to_string(),
            num(r.adjoint),
            num(r.finite_difference),
            num(r.rel_error),
            opt(ratio),
            opt(order),
        ]);
        say!(
            "nx {:>5}  rel_error {}  ratio {}",
            r.cells,
            num(r.rel_error),
            opt(ratio)
        );
        if i > 0 && rows[i - 1].rel_error > ROUNDOFF_FLOOR && ratio.is_some_and(|q| q < cfg.gradcheck.min_ratio) {
            problems.push(format!(
                "error ratio {} between nx={} and nx={} is below {}",
                opt(ratio),
                rows[i - 1].cells,
                r.cells,
                cfg.gradcheck.min_ratio
            ));
        }
    }
    if rows.iter().all(|r| r.adjoint == 0.0 && r.finite_difference == 0.0) {
        say!("gradient is exactly zero");
    }
    let base = &rows[1];
    if base.rel_error > cfg.gradcheck.tolerance {
        problems.insert(
            0,
            format!(
                "relative error {} at nx={} exceeds {}",
                num(base.rel_error),
                base.cells,
                cfg.gradcheck.tolerance
            ),
        );
    }
    let dir = &cfg.output.dir;
    let mut out = Outputs::default();
    out.add_table(dir.join("gradcheck.csv"), &table);
    announce(&out.commit(dir)?);
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Tolerance(problems.join("; ")))
    }
}

fn percent_label(p: f64) -> String {
    num(p * 100.0)
}

fn example_outputs(report: &ExampleReport, dir: &Path) -> Outputs {
    let n = report.example.index();
    let mut out = Outputs::default();
    let table_rows = 5;

    let mut header = vec!["k".to_string()];
    for run in &report.runs {
        let p = percent_label(run.noise_level);
        header.push(format!("e_{p}pct_seed{}", run.seed));
        header.push(format!("E_{p}pct_seed{}", run.seed));
    }
    let mut summary = Table::new(&header);
    let tables: Vec<_> = report.runs.iter().map(|r| error_table(r, table_rows)).collect();
    for k in 1..=table_rows {
        let mut row = vec![k.to_string()];
        for t in &tables {
            let entry = t.iter().find(|(kk, _, _)| *kk == k);
            row.push(opt(entry.map(|e| e.1)));
            row.push(opt(entry.map(|e| e.2)));
        }
        summary.push(row);
    }
    out.add_table(dir.join(format!("example{n}_summary.csv")), &summary);

    let mut runs = Table::new(&[
        "noise_percent",
        "seed",
        "iterations",
        "status",
        "final_cost",
        "relative_error",
        "best_k",
        "best_relative_error",
        "inverse_crime",
    ]);
    let exact_norm = kinwave::norm_l2(&report.exact);
    let mut history = Vec::new();
    for run in &report.runs {
        let p = percent_label(run.noise_level);
        let suffix = format!("example{n}_noise{p}_seed{}", run.seed);
        let mut iters = Table::new(&["k", "J_eps", "e", "E", "alpha", "gamma"]);
        for r in &run.records {
            iters.push(vec![
                r.k.to_string(),
                num(r.cost),
                opt(r.conv_error),
                opt(r.acc_error),
                opt(r.alpha),
                opt(r.gamma),
            ]);
        }
        out.add_table(dir.join(format!("{suffix}.csv")), &iters);

        let best = run
            .records
            .iter()
            .filter_map(|r| r.acc_error.map(|e| (r.k, e)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        runs.push(vec![
            p.clone(),
            run.seed.to_string(),
            run.iterations().to_string(),
            run.status.as_str().to_string(),
            num(run.records.last().map_or(f64::NAN, |r| r.cost)),
            num(run.relative_error),
            best.map(|b| b.0.to_string()).unwrap_or_default(),
            opt(best.map(|b| b.1 / exact_norm)),
            run.inverse_crime.to_string(),
        ]);

        let profile = |f: &BoundaryField| -> Vec<(f64, f64)> {
            let g = f.grid();
            f.values().iter().enumerate().map(|(i, v)| (g.x(i), *v)).collect()
        };
        let plot = Plot {
            title: format!("Example {n}, noise {p}%"),
            x_label: "x".into(),
            y_label: "f(x)".into(),
            log_y: false,
            series: vec![
                Series {
                    label: "exact".into(),
                    points: profile(&report.exact),
                    dashed: false,
                },
                Series {
                    label: format!("recovered, k = {}", run.iterations()),
                    points: profile(&run.recovered),
                    dashed: true,
                },
            ],
        };
        out.add(dir.join(format!("{suffix}.svg")), plot.render().into_bytes());
        history.push(Series {
            label: format!("{p}%"),
            points: run
                .records
                .iter()
                .filter_map(|r| r.acc_error.map(|e| (r.k as f64, e)))
                .collect(),
            dashed: false,
        });
    }
    out.add_table(dir.join(format!("example{n}_runs.csv")), &runs);
    let plot = Plot {
        title: format!("Example {n}: accuracy error"),
        x_label: "iteration k".into(),
        y_label: "E(k)".into(),
        log_y: true,
        series: history,
    };
    out.add(dir.join(format!("example{n}_errors.svg")), plot.render().into_bytes());
    out
}

pub fn example(n: usize, noise_percent: &[f64], seeds: &[u64], cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let example = Example::from_index(n).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(p) = noise_percent.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(CliError::Usage(format!(
            "noise level must be a non-negative percentage, got {p}"
        )));
    }
    cfg.mesh().map_err(|e| CliError::Usage(e.to_string()))?;
    cfg.optimizer().validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let levels: Vec<f64> = noise_percent.iter().map(|p| p / 100.0).collect();
    let report = run_example(example, &levels, seeds, cfg)?;
    for run in &report.runs {
        say!(
            "example {n} noise {}% seed {}: {} after {} iterations, relative error {}",
            percent_label(run.noise_level),
            run.seed,
            run.status.as_str(),
            run.iterations(),
            num(run.relative_error)
        );
    }
    announce(&example_outputs(&report, dir).commit(dir)?);
    Ok(())
}

pub fn invert(cfg: &Config) -> Result<()> {
    let path = cfg
        .measurement
        .path
        .as_ref()
        .ok_or_else(|| cfg.error("[measurement] path is required for invert"))?;
    let mesh = cfg.mesh()?;
    let optimizer = cfg.optimizer()?;
    let field = read_measurement(path, mesh.space)?;
    let base = InverseProblem::new(mesh, InitialData::zeros(&mesh), Measurement::exact(field))?;
    let problem = SeparableProblem::unmodulated(base);
    let out = cg_reconstruct(&problem, &BoundaryField::zeros(mesh.space), &optimizer, None)?;
    say!(
        "{} after {} iterations, J_eps = {}",
        out.status.as_str(),
        out.iterations(),
        num(out.records.last().map_or(f64::NAN, |r| r.cost))
    );
    let mut iters = Table::new(&["k", "J_eps", "alpha", "gamma", "grad_norm"]);
    for r in &out.records {
        iters.push(vec![
            r.k.to_string(),
            num(r.cost),
            opt(r.alpha),
            opt(r.gamma),
            num(r.grad_norm),
        ]);
    }
    let dir = &cfg.output.dir;
    let mut files = Outputs::default();
    files.add_table(dir.join("recovered.csv"), &field_table(&out.solution));
    files.add_table(dir.join("iterations.csv"), &iters);
    announce(&files.commit(dir)?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> Config {
        Config::parse(text, Path::new("run.toml")).unwrap()
    }

    #[test]
    fn snapshot_levels_cover_both_ends() {
        assert_eq!(snapshot_levels(223, 5), vec![0, 56, 112, 167, 223]);
        assert_eq!(snapshot_levels(3, 10), vec![0, 1, 2, 3]);
        assert_eq!(snapshot_levels(10, 1), vec![0, 10]);
    }

    #[test]
    fn manufactured_cases_meet_their_tolerance() {
        for kind in ["zero", "quadratic", "cosine"] {
            for cells in [25, 50, 100] {
                let cfg = config(&format!("[grid]\ncells = {cells}\n[source]\nkind = \"{kind}\"\n"));
                let mesh = cfg.mesh().unwrap();
                let case = forward_case(&cfg, &mesh).unwrap();
                let traj = solve_forward(&mesh, case.interior.view(), &case.forcing, &case.init).unwrap();
                let err = traj.max_error(case.exact.unwrap());
                assert!(err <= TOL_FACTOR * mesh.time.dt().powi(2), "{kind} nx={cells}: {err}");
            }
        }
    }

    #[test]
    fn gradcheck_converges_for_smooth_data() {
        let rows = gradcheck_rows(&config("[source]\nkind = \"smooth\"\n")).unwrap();
        assert!(rows[1].rel_error < 1e-2);
        assert!(rows[0].rel_error / rows[1].rel_error >= 1.5);
        assert!(rows[1].rel_error / rows[2].rel_error >= 1.5);
    }

    #[test]
    fn gradcheck_zero_case_is_exact() {
        let rows = gradcheck_rows(&config("")).unwrap();
        assert!(rows.iter().all(|r| r.adjoint == 0.0 && r.rel_error == 0.0));
        assert!(gradcheck_rows(&config("[grid]\ncells = 51\n")).is_err());
    }

    #[test]
    fn unknown_example_is_a_config_error() {
        let cfg = config("[source]\nkind = \"example\"\nexample = 4\n");
        let mesh = cfg.mesh().unwrap();
        assert_eq!(forward_case(&cfg, &mesh).err().unwrap().exit_code(), 2);
    }
}
