//! Damped (Levenberg–Marquardt) least squares for small curve models.
//!
//! Accepted steps never increase the residual sum of squares. The solver
//! stops when every free parameter moves by less than `param_tol` relative
//! to its magnitude, when an accepted step no longer changes the cost, or
//! when damping saturates at a minimum.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A model y = f(x; p) with analytic gradient ∂f/∂p.
pub trait CurveModel {
    fn n_params(&self) -> usize;

    /// Returns f(x; p) and writes ∂f/∂p into `grad`.
    fn eval(&self, params: &[f64], x: f64, grad: &mut [f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmConfig {
    pub max_iterations: usize,
    pub param_tol: f64,
    pub initial_damping: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self { max_iterations: 200, param_tol: 1e-10, initial_damping: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmReport {
    pub params: Vec<f64>,
    pub iterations: usize,
    /// Root mean square of the residuals at `params`.
    pub residual_rms: f64,
    /// Sum of squared residuals after each accepted step, starting with the initial cost.
    pub cost_history: Vec<f64>,
}

fn cost_of<M: CurveModel>(model: &M, params: &[f64], xs: &[f64], ys: &[f64], grad: &mut [f64]) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - model.eval(params, x, grad);
            r * r
        })
        .sum()
}

/// Fits `model` to `(xs, ys)` starting from `initial`. Parameters with
/// `free[k] == false` stay fixed.
pub fn fit<M: CurveModel>(
    model: &M,
    xs: &[f64],
    ys: &[f64],
    initial: &[f64],
    free: Option<&[bool]>,
    config: &LmConfig,
) -> Result<LmReport> {
    let n = model.n_params();
    assert_eq!(initial.len(), n, "initial parameter count");
    assert_eq!(xs.len(), ys.len(), "data length");
    let active: Vec<usize> = match free {
        Some(mask) => (0..n).filter(|&k| mask[k]).collect(),
        None => (0..n).collect(),
    };
    let m = active.len();
    let rms = |cost: f64| (cost / xs.len().max(1) as f64).sqrt();

    let mut params = initial.to_vec();
    let mut grad = vec![0.0; n];
    let mut cost = cost_of(model, &params, xs, ys, &mut grad);
    if !cost.is_finite() {
        return Err(Error::InputContract("initial model evaluation is not finite".into()));
    }
    let mut history = vec![cost];
    let mut damping = config.initial_damping;

    for iteration in 1..=config.max_iterations {
        if cost == 0.0 || m == 0 {
            return Ok(LmReport { params, iterations: iteration - 1, residual_rms: 0.0, cost_history: history });
        }
        let mut jtj = DMatrix::<f64>::zeros(m, m);
        let mut jtr = DVector::<f64>::zeros(m);
        for (&x, &y) in xs.iter().zip(ys) {
            let r = y - model.eval(&params, x, &mut grad);
            for (a, &ka) in active.iter().enumerate() {
                jtr[a] += grad[ka] * r;
                for (b, &kb) in active.iter().enumerate().take(a + 1) {
                    jtj[(a, b)] += grad[ka] * grad[kb];
                }
            }
        }
        for a in 0..m {
            for b in 0..a {
                jtj[(b, a)] = jtj[(a, b)];
            }
        }
        let max_diag = (0..m).map(|a| jtj[(a, a)]).fold(0.0, f64::max);
        let floor = max_diag.max(f64::MIN_POSITIVE) * 1e-15;

        // retry with growing damping until the cost drops
        loop {
            let mut lhs = jtj.clone();
            for a in 0..m {
                lhs[(a, a)] += damping * jtj[(a, a)].max(floor);
            }
            let step = match lhs.cholesky() {
                Some(ch) => ch.solve(&jtr),
                None => {
                    damping *= 10.0;
                    if damping > 1e30 {
                        return Ok(LmReport {
                            params,
                            iterations: iteration,
                            residual_rms: rms(cost),
                            cost_history: history,
                        });
                    }
                    continue;
                }
            };
            let mut trial = params.clone();
            for (a, &k) in active.iter().enumerate() {
                trial[k] += step[a];
            }
            let trial_cost = cost_of(model, &trial, xs, ys, &mut grad);
            if trial_cost.is_finite() && trial_cost <= cost {
                let small_step = active
                    .iter()
                    .enumerate()
                    .all(|(a, &k)| step[a].abs() <= config.param_tol * (params[k].abs() + config.param_tol));
                let stalled = cost - trial_cost <= 1e-15 * cost;
                params = trial;
                cost = trial_cost;
                history.push(cost);
                damping = (damping / 3.0).max(1e-12);
                if small_step || stalled {
                    return Ok(LmReport {
                        params,
                        iterations: iteration,
                        residual_rms: rms(cost),
                        cost_history: history,
                    });
                }
                break;
            }
            damping *= 4.0;
            if damping > 1e30 {
                // no descent direction left: at a minimum within rounding
                return Ok(LmReport { params, iterations: iteration, residual_rms: rms(cost), cost_history: history });
            }
        }
    }
    Err(Error::Convergence { iterations: config.max_iterations, residual: rms(cost) })
}

/// Ordinary linear least squares: minimizes ‖A c − y‖ by SVD.
pub fn linear_lstsq(design: &DMatrix<f64>, ys: &[f64]) -> Option<DVector<f64>> {
    let y = DVector::from_column_slice(ys);
    design.clone().svd(true, true).solve(&y, 1e-13).ok()
}
