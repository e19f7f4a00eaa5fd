//! Heavy-ball gradient descent on `SE(2)^{N-1}` with central-difference
//! gradients taken along the retraction basis.

use crate::costs::SATURATION;
use crate::error::{Error, Result};
use crate::se2::{FormationState, Pose2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub alpha: f64,
    pub beta: f64,
    /// Stop once the step norm falls below this.
    pub tol: f64,
    pub max_iters: usize,
    pub fd_step: f64,
    pub restarts: usize,
    /// Half-width of the square that random initial translations are drawn from.
    pub init_box: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            alpha: 0.001,
            beta: 0.9,
            tol: 1e-4,
            max_iters: 50_000,
            fd_step: 1e-6,
            restarts: 8,
            init_box: 3.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::Invalid("alpha must be > 0".into()));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::Invalid("beta must lie in [0, 1)".into()));
        }
        if !(self.tol > 0.0 && self.fd_step > 0.0) {
            return Err(Error::Invalid("tol and fd_step must be > 0".into()));
        }
        if self.restarts == 0 || !(self.init_box > 0.0) {
            return Err(Error::Invalid("need restarts >= 1 and init_box > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub cost: f64,
    pub step_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub iterates: Vec<TraceEntry>,
    pub final_state: FormationState,
    pub converged: bool,
    /// Set when the run stopped for a reason other than the step tolerance.
    pub diagnostic: Option<String>,
}

impl OptimizationTrace {
    pub fn final_cost(&self) -> f64 {
        self.iterates.last().map_or(f64::NAN, |e| e.cost)
    }

    pub fn iterations(&self) -> usize {
        self.iterates.len()
    }
}

/// Central differences `(J(x + h e_k) - J(x - h e_k)) / 2h` along each
/// retraction coordinate.
pub fn gradient_fd<F>(cost: &F, x: &FormationState, step: f64) -> Result<Vec<f64>>
where
    F: Fn(&FormationState) -> f64 + ?Sized,
{
    let n = x.dof();
    let mut dx = vec![0.0; n];
    let mut grad = Vec::with_capacity(n);
    for k in 0..n {
        dx[k] = step;
        let plus = cost(&x.oplus(&dx)?);
        dx[k] = -step;
        let minus = cost(&x.oplus(&dx)?);
        dx[k] = 0.0;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFiniteProbe { coordinate: k });
        }
        grad.push((plus - minus) / (2.0 * step));
    }
    Ok(grad)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Momentum descent: `v_t = alpha grad J(x_t) + beta v_{t-1}`, `dx_t = -v_t`,
/// `x_{t+1} = x_t (+) dx_t`, stopping when `|dx_t| < tol`.
pub fn minimize<F>(cost: &F, x0: &FormationState, cfg: &OptimizerConfig) -> Result<OptimizationTrace>
where
    F: Fn(&FormationState) -> f64 + ?Sized,
{
    let c0 = cost(x0);
    if !c0.is_finite() {
        return Err(Error::Invalid("cost is not finite at the initial state".into()));
    }
    let mut x = x0.clone();
    let mut velocity = vec![0.0; x.dof()];
    let mut iterates = Vec::new();
    for t in 0..cfg.max_iters {
        let grad = gradient_fd(cost, &x, cfg.fd_step)?;
        if t == 0 && c0 >= SATURATION && grad.iter().all(|g| *g == 0.0) {
            return Ok(OptimizationTrace {
                iterates,
                final_state: x,
                converged: false,
                diagnostic: Some("initial state lies on a saturated plateau with zero gradient".into()),
            });
        }
        for (v, g) in velocity.iter_mut().zip(&grad) {
            *v = cfg.alpha * g + cfg.beta * *v;
        }
        let step: Vec<f64> = velocity.iter().map(|v| -v).collect();
        x = x.oplus(&step)?;
        let step_norm = norm(&step);
        iterates.push(TraceEntry {
            iteration: t + 1,
            cost: cost(&x),
            step_norm,
        });
        if step_norm < cfg.tol {
            return Ok(OptimizationTrace {
                iterates,
                final_state: x,
                converged: true,
                diagnostic: None,
            });
        }
    }
    Ok(OptimizationTrace {
        iterates,
        final_state: x,
        converged: false,
        diagnostic: Some(format!("reached max_iters = {}", cfg.max_iters)),
    })
}

/// Random start: translations uniform in `[-b, b]^2`, headings uniform in
/// `(-pi, pi]`, resampled until every pair (Robot 1 at the origin included)
/// is farther apart than `min_separation`.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, num_robots: usize, half_box: f64, min_separation: f64) -> FormationState {
    loop {
        let poses: Vec<Pose2> = (1..num_robots)
            .map(|_| {
                let x = rng.random_range(-half_box..=half_box);
                let y = rng.random_range(-half_box..=half_box);
                let th = PI - rng.random_range(0.0..2.0 * PI);
                Pose2::new(th, x, y)
            })
            .collect();
        let state = FormationState::new(poses);
        let ok = (1..=num_robots).all(|a| {
            (a + 1..=num_robots).all(|b| state.relative_position(a, b).expect("valid ids").norm() > min_separation)
        });
        if ok {
            return state;
        }
    }
}

/// Per-restart generator, independent of how restarts are scheduled.
pub fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64 + 1);
    rng
}

/// Outcome of one restart.
#[derive(Debug, Clone)]
pub struct RestartResult<T> {
    pub restart: usize,
    pub initial: FormationState,
    pub context: T,
    pub trace: OptimizationTrace,
}

/// Runs `cfg.restarts` independent descents in parallel and returns them in
/// restart order. `setup` builds the cost (and any per-start context, such
/// as sorted ids) from the random initial state.
pub fn multistart<T, S, C>(
    num_robots: usize,
    min_separation: f64,
    cfg: &OptimizerConfig,
    seed: u64,
    setup: S,
) -> Result<Vec<RestartResult<T>>>
where
    T: Send,
    S: Fn(&FormationState) -> Result<(T, C)> + Sync,
    C: Fn(&FormationState) -> f64,
{
    cfg.validate()?;
    (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(seed, r);
            let x0 = random_state(&mut rng, num_robots, cfg.init_box, min_separation);
            let (context, cost) = setup(&x0)?;
            let trace = minimize(&cost, &x0, cfg)?;
            Ok(RestartResult {
                restart: r,
                initial: x0,
                context,
                trace,
            })
        })
        .collect()
}

/// Lowest final cost; ties go to the earliest restart.
pub fn best_restart<T>(results: &[RestartResult<T>]) -> Option<&RestartResult<T>> {
    results.iter().fold(None, |best: Option<&RestartResult<T>>, r| match best {
        Some(b) if b.trace.final_cost() <= r.trace.final_cost() => Some(b),
        _ => Some(r),
    })
}
