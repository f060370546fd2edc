//! Levenberg–Marquardt least squares with a finite-difference Jacobian.
//!
//! Minimises `Σ r_i(p)²` for a residual function `r`. Damping follows
//! Marquardt's diagonal scaling; steps that increase the cost or produce a
//! non-finite residual are rejected and the damping raised.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug)]
pub struct LmConfig {
    pub max_iterations: usize,
    /// Converged when every parameter moves less than `xtol * (|p| + xtol)`.
    pub xtol: f64,
    /// Converged when the relative cost decrease drops below `ftol`.
    pub ftol: f64,
    pub initial_lambda: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            xtol: 1e-10,
            ftol: 1e-14,
            initial_lambda: 1e-3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// Sum of squared residuals at `params`.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `JᵀJ` at the solution; its inverse is the parameter covariance when the
    /// residuals are standardised.
    pub normal_matrix: DMatrix<f64>,
    pub residual_count: usize,
}

impl LmOutcome {
    /// Inverse of the normal matrix, `None` if it is singular.
    pub fn covariance(&self) -> Option<DMatrix<f64>> {
        let inv = self.normal_matrix.clone().try_inverse()?;
        if (0..inv.nrows()).all(|i| inv[(i, i)].is_finite() && inv[(i, i)] >= 0.0) {
            Some(inv)
        } else {
            None
        }
    }
}

/// Minimises the squared norm of `residuals(p, out)`; `out` has a fixed length.
pub fn minimize<F>(mut residuals: F, start: &[f64], n_residuals: usize, cfg: &LmConfig) -> LmOutcome
where
    F: FnMut(&[f64], &mut [f64]),
{
    let np = start.len();
    let mut p = start.to_vec();
    let mut r = vec![0.0; n_residuals];
    residuals(&p, &mut r);
    let mut cost = sum_sq(&r);
    let mut lambda = cfg.initial_lambda;
    let mut jac = DMatrix::<f64>::zeros(n_residuals, np);
    let mut converged = false;
    let mut iterations = 0;
    let mut scratch_hi = vec![0.0; n_residuals];
    let mut scratch_lo = vec![0.0; n_residuals];
    let mut trial_r = vec![0.0; n_residuals];

    if !cost.is_finite() {
        return LmOutcome {
            params: p,
            cost,
            iterations: 0,
            converged: false,
            normal_matrix: DMatrix::zeros(np, np),
            residual_count: n_residuals,
        };
    }

    jacobian(&mut residuals, &p, &mut jac, &mut scratch_hi, &mut scratch_lo);
    while iterations < cfg.max_iterations {
        iterations += 1;
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&r);

        let mut accepted = false;
        let mut small_step = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for i in 0..np {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            residuals(&trial, &mut trial_r);
            let trial_cost = sum_sq(&trial_r);
            if trial_cost.is_finite() && trial_cost <= cost {
                small_step = step
                    .iter()
                    .zip(&p)
                    .all(|(d, x)| d.abs() <= cfg.xtol * (x.abs() + cfg.xtol));
                let rel_drop = (cost - trial_cost) / cost.max(f64::MIN_POSITIVE);
                p = trial;
                std::mem::swap(&mut r, &mut trial_r);
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if rel_drop < cfg.ftol {
                    small_step = true;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e16 {
                break;
            }
        }
        if !accepted {
            // No downhill step exists at any damping: we are at a minimum to
            // working precision.
            converged = true;
            break;
        }
        jacobian(&mut residuals, &p, &mut jac, &mut scratch_hi, &mut scratch_lo);
        if small_step {
            converged = true;
            break;
        }
    }
    let normal_matrix = jac.transpose() * &jac;
    LmOutcome {
        params: p,
        cost,
        iterations,
        converged,
        normal_matrix,
        residual_count: n_residuals,
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn jacobian<F>(f: &mut F, p: &[f64], jac: &mut DMatrix<f64>, hi: &mut [f64], lo: &mut [f64])
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut q = p.to_vec();
    for j in 0..p.len() {
        let h = 1e-6 * p[j].abs().max(1e-2);
        q[j] = p[j] + h;
        f(&q, hi);
        q[j] = p[j] - h;
        f(&q, lo);
        q[j] = p[j];
        for i in 0..hi.len() {
            jac[(i, j)] = (hi[i] - lo[i]) / (2.0 * h);
        }
    }
}
