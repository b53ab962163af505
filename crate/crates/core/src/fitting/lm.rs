//! Small dense Levenberg-Marquardt solver with Marquardt diagonal scaling.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when an accepted step lowers the SSE by less than this fraction.
    pub ftol: f64,
    /// Stop when every Jacobian column is this close to orthogonal to the
    /// residual (cosine of the angle, as in MINPACK's `gtol`).
    pub gtol: f64,
    pub initial_damping: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            ftol: 1e-10,
            gtol: 1e-8,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub x: Vec<f64>,
    pub sse: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final value of the scaled gradient measure compared against `gtol`.
    pub gradient_cosine: f64,
}

/// A least-squares problem in `n` coordinates with `m` residuals.
pub trait Problem {
    fn n_params(&self) -> usize;
    fn n_residuals(&self) -> usize;
    /// Writes residuals into `r` and, when given, the Jacobian into `jac`.
    fn evaluate(&self, x: &[f64], r: &mut DVector<f64>, jac: Option<&mut DMatrix<f64>>);
    /// Maps a trial point back into the feasible set.
    fn project(&self, _x: &mut [f64]) {}
}

fn gradient_cosine(jac: &DMatrix<f64>, r: &DVector<f64>) -> f64 {
    let rnorm = r.norm();
    if rnorm == 0.0 {
        return 0.0;
    }
    jac.column_iter()
        .map(|col| {
            let cn = col.norm();
            if cn == 0.0 {
                0.0
            } else {
                col.dot(r).abs() / (cn * rnorm)
            }
        })
        .fold(0.0, f64::max)
}

pub fn minimize<P: Problem>(problem: &P, x0: &[f64], opts: &LmOptions) -> LmOutcome {
    let n = problem.n_params();
    let m = problem.n_residuals();
    let mut x = x0.to_vec();
    problem.project(&mut x);
    let mut r = DVector::zeros(m);
    let mut jac = DMatrix::zeros(m, n);
    problem.evaluate(&x, &mut r, Some(&mut jac));
    let mut sse = r.norm_squared();
    let mut damping = opts.initial_damping;
    let mut trial_r = DVector::zeros(m);
    let mut iterations = 0;

    let finish = |x: Vec<f64>, sse: f64, iterations, converged, cosine| LmOutcome {
        x,
        sse,
        iterations,
        converged,
        gradient_cosine: cosine,
    };

    loop {
        let cosine = gradient_cosine(&jac, &r);
        if sse == 0.0 || cosine < opts.gtol {
            return finish(x, sse, iterations, true, cosine);
        }
        if iterations >= opts.max_iterations {
            return finish(x, sse, iterations, false, cosine);
        }
        iterations += 1;

        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        let diag_floor = jtj.diagonal().max() * 1e-15;
        let mut accepted = false;
        while damping < 1e16 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += damping * jtj[(i, i)].max(diag_floor);
            }
            let Some(chol) = a.cholesky() else {
                damping *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let mut trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            problem.project(&mut trial);
            problem.evaluate(&trial, &mut trial_r, None);
            let trial_sse = trial_r.norm_squared();
            if trial_sse.is_finite() && trial_sse < sse {
                let relative_drop = (sse - trial_sse) / sse;
                x = trial;
                sse = trial_sse;
                problem.evaluate(&x, &mut r, Some(&mut jac));
                damping = (damping / 10.0).max(1e-12);
                accepted = true;
                if relative_drop < opts.ftol {
                    let cosine = gradient_cosine(&jac, &r);
                    return finish(x, sse, iterations, true, cosine);
                }
                break;
            }
            damping *= 10.0;
        }
        if !accepted {
            // No descent left at any damping: the SSE is stationary to
            // working precision.
            let cosine = gradient_cosine(&jac, &r);
            return finish(x, sse, iterations, true, cosine);
        }
    }
}
