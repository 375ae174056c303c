//! Conjugate-gradient reconstruction of a separable source amplitude and the
//! fixed-step gradient iteration for general sources.

use crate::error::{Error, Result};
use crate::field::{BoundaryField, SourcePair};
use crate::functional::{InverseProblem, SeparableProblem};
use crate::quadrature::{inner_l2, inner_l2b, inner_l2t};

/// Runs stop with [`StopStatus::GradientVanished`] below this gradient norm.
pub const GRADIENT_FLOOR: f64 = 1e-14;
/// Relaxation denominators below this are treated as stagnation.
pub const DENOMINATOR_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// Exact step for the quadratic functional with Fletcher–Reeves directions.
    ConjugateGradient,
    /// Same step, directions reset to the gradient every iteration.
    SteepestDescent,
    /// Constant relaxation parameter.
    Fixed(f64),
}

/// Pointwise bounds `F_* <= F <= F^*`, `G_* <= G <= G^*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleBox {
    interior: (f64, f64),
    boundary: (f64, f64),
}

impl AdmissibleBox {
    pub fn new(interior: (f64, f64), boundary: (f64, f64)) -> Result<Self> {
        for (lo, hi) in [interior, boundary] {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(Error::InvalidArgument(format!(
                    "admissible bounds must satisfy lower <= upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { interior, boundary })
    }

    pub fn interior(&self) -> (f64, f64) {
        self.interior
    }

    pub fn boundary(&self) -> (f64, f64) {
        self.boundary
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub eps: f64,
    pub stop_tol: f64,
    pub max_iter: usize,
    pub step_rule: StepRule,
    pub bounds: Option<AdmissibleBox>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            eps: 1e-8,
            stop_tol: 1e-8,
            max_iter: 40,
            step_rule: StepRule::ConjugateGradient,
            bounds: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("eps must be >= 0, got {}", self.eps)));
        }
        if self.stop_tol.is_nan() || self.stop_tol <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "stopping tolerance must be > 0, got {}",
                self.stop_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        if let StepRule::Fixed(alpha) = self.step_rule {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::InvalidArgument(format!("fixed step must be > 0, got {alpha}")));
            }
        }
        Ok(())
    }
}

/// Clean data and exact amplitude, when known, for error tracking.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub clean: BoundaryField,
    pub amplitude: BoundaryField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// Regularised cost at the k-th iterate.
    pub cost: f64,
    /// `||Psi f_k - Y_T||²` against clean data.
    pub conv_error: Option<f64>,
    /// `||f - f_k||_{L²(0,l)}`
    pub acc_error: Option<f64>,
    /// Step that produced this iterate.
    pub alpha: Option<f64>,
    /// Fletcher–Reeves coefficient used for the next direction.
    pub gamma: Option<f64>,
    pub grad_norm: f64,
    /// `||w_k - w_{k-1}||`
    pub step_norm: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopStatus {
    /// `J_eps < stop_tol`
    Converged,
    MaxIterations,
    GradientVanished,
}

impl StopStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopStatus::Converged => "converged",
            StopStatus::MaxIterations => "max-iterations",
            StopStatus::GradientVanished => "gradient-vanished",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction<T> {
    pub solution: T,
    pub records: Vec<IterationRecord>,
    pub status: StopStatus,
}

impl<T> Reconstruction<T> {
    /// Index of the last iterate.
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.k)
    }
}

fn errors(
    terminal: &BoundaryField,
    f: &BoundaryField,
    truth: Option<&GroundTruth>,
) -> Result<(Option<f64>, Option<f64>)> {
    let Some(truth) = truth else {
        return Ok((None, None));
    };
    let r = terminal - &truth.clean.resample(terminal.grid())?;
    let d = &truth.amplitude - f;
    Ok((Some(inner_l2b(&r, &r)?), Some(inner_l2(&d, &d)?.sqrt())))
}

fn clamp_amplitude(f: &BoundaryField, bounds: Option<&AdmissibleBox>) -> BoundaryField {
    match bounds {
        Some(b) => {
            let (lo, hi) = b.interior();
            f.map(|v| v.clamp(lo, hi))
        }
        None => f.clone(),
    }
}

/// Conjugate-gradient reconstruction of `f` in `F = f r`.
///
/// Each iteration takes the step
/// `alpha_k = ||J'_eps(f_k)||² / (||Psi p_k||² + eps ||p_k||²)`,
/// updates `f_{k+1} = f_k - alpha_k p_k`, stops once `J_eps(f_{k+1}) < stop_tol`
/// and otherwise builds `p_{k+1} = J'_eps(f_{k+1}) + gamma_k p_k` with the
/// Fletcher–Reeves ratio. There are no restarts. When bounds are configured
/// the amplitude is clamped into the interior bounds after each update.
pub fn cg_reconstruct(
    problem: &SeparableProblem,
    f0: &BoundaryField,
    cfg: &OptimizerConfig,
    truth: Option<&GroundTruth>,
) -> Result<Reconstruction<BoundaryField>> {
    cfg.validate()?;
    let conjugate = match cfg.step_rule {
        StepRule::ConjugateGradient => true,
        StepRule::SteepestDescent => false,
        StepRule::Fixed(_) => {
            return Err(Error::InvalidArgument(
                "conjugate gradient needs an exact step rule, not a fixed step".into(),
            ))
        }
    };
    let eps = cfg.eps;
    let mut f = f0.clone();
    let mut eval = problem.evaluate(&f, eps)?;
    let mut grad_sq = inner_l2(&eval.gradient, &eval.gradient)?;
    let (e, acc) = errors(&eval.terminal, &f, truth)?;
    let mut records = vec![IterationRecord {
        k: 0,
        cost: eval.cost,
        conv_error: e,
        acc_error: acc,
        alpha: None,
        gamma: None,
        grad_norm: grad_sq.sqrt(),
        step_norm: None,
    }];
    if grad_sq.sqrt() < GRADIENT_FLOOR {
        return Ok(Reconstruction {
            solution: f,
            records,
            status: StopStatus::GradientVanished,
        });
    }

    let mut direction = eval.gradient.clone();
    for k in 0..cfg.max_iter {
        let response = problem.response(&direction)?;
        let denominator = inner_l2b(&response, &response)? + eps * inner_l2(&direction, &direction)?;
        if denominator.is_nan() || denominator < DENOMINATOR_FLOOR {
            return Err(Error::Stagnation {
                iteration: k,
                denominator,
            });
        }
        let alpha = grad_sq / denominator;
        let previous = f.clone();
        f.axpy(-alpha, &direction);
        f = clamp_amplitude(&f, cfg.bounds.as_ref());
        let step = &f - &previous;

        eval = problem.evaluate(&f, eps)?;
        let new_grad_sq = inner_l2(&eval.gradient, &eval.gradient)?;
        let (e, acc) = errors(&eval.terminal, &f, truth)?;
        records.push(IterationRecord {
            k: k + 1,
            cost: eval.cost,
            conv_error: e,
            acc_error: acc,
            alpha: Some(alpha),
            gamma: None,
            grad_norm: new_grad_sq.sqrt(),
            step_norm: Some(inner_l2(&step, &step)?.sqrt()),
        });
        if eval.cost < cfg.stop_tol {
            return Ok(Reconstruction {
                solution: f,
                records,
                status: StopStatus::Converged,
            });
        }
        if new_grad_sq.sqrt() < GRADIENT_FLOOR {
            return Ok(Reconstruction {
                solution: f,
                records,
                status: StopStatus::GradientVanished,
            });
        }
        let gamma = if conjugate { new_grad_sq / grad_sq } else { 0.0 };
        records.last_mut().expect("just pushed").gamma = Some(gamma);
        direction = direction.scaled(gamma);
        direction.axpy(1.0, &eval.gradient);
        grad_sq = new_grad_sq;
    }
    Ok(Reconstruction {
        solution: f,
        records,
        status: StopStatus::MaxIterations,
    })
}

/// Pointwise projection onto the admissible box.
pub fn project_admissible(w: &SourcePair, bounds: &AdmissibleBox) -> SourcePair {
    w.clamped(bounds.interior(), bounds.boundary())
}

/// Gradient iteration `w_{k+1} = w_k - alpha J'_eps(w_k)` with a constant step
/// (projected onto the admissible box when one is configured).
pub fn gradient_descent(
    problem: &InverseProblem,
    w0: &SourcePair,
    cfg: &OptimizerConfig,
) -> Result<Reconstruction<SourcePair>> {
    cfg.validate()?;
    let StepRule::Fixed(alpha) = cfg.step_rule else {
        return Err(Error::InvalidArgument(
            "gradient descent needs a fixed step rule".into(),
        ));
    };
    let mut w = match &cfg.bounds {
        Some(b) => project_admissible(w0, b),
        None => w0.clone(),
    };
    let (mut cost, mut grad) = problem.evaluate(&w, cfg.eps)?;
    let mut records = vec![IterationRecord {
        k: 0,
        cost,
        conv_error: None,
        acc_error: None,
        alpha: None,
        gamma: None,
        grad_norm: inner_l2t(&grad, &grad)?.sqrt(),
        step_norm: None,
    }];
    let mut status = StopStatus::MaxIterations;
    for k in 1..=cfg.max_iter {
        if records[k - 1].grad_norm < GRADIENT_FLOOR {
            status = StopStatus::GradientVanished;
            break;
        }
        let previous = w.clone();
        w.axpy(-alpha, &grad);
        if let Some(b) = &cfg.bounds {
            w = project_admissible(&w, b);
        }
        let step = &w - &previous;
        (cost, grad) = problem.evaluate(&w, cfg.eps)?;
        records.push(IterationRecord {
            k,
            cost,
            conv_error: None,
            acc_error: None,
            alpha: Some(alpha),
            gamma: None,
            grad_norm: inner_l2t(&grad, &grad)?.sqrt(),
            step_norm: Some(inner_l2t(&step, &step)?.sqrt()),
        });
        if cost < cfg.stop_tol {
            status = StopStatus::Converged;
            break;
        }
    }
    Ok(Reconstruction {
        solution: w,
        records,
        status,
    })
}
