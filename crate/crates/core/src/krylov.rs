//! Conjugate gradient squared over abstract linear operators with circulant
//! left preconditioning. Convergence is judged on the relative residual of
//! the original (unpreconditioned) system.

use crate::circulant::CirculantInverse;
use crate::error::{Result, SolverError};
use crate::toeplitz::ToeplitzOperator;

/// Matrix action used by the solver. A preconditioner enters as the operator
/// performing its solve action P^{-1} v.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[f64], out: &mut [f64]);
}

impl LinearOperator for ToeplitzOperator {
    fn dim(&self) -> usize {
        ToeplitzOperator::dim(self)
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        ToeplitzOperator::apply(self, v, out).expect("dimensions checked by caller");
    }
}

impl LinearOperator for CirculantInverse {
    fn dim(&self) -> usize {
        CirculantInverse::dim(self)
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        CirculantInverse::apply(self, v, out).expect("dimensions checked by caller");
    }
}

/// Outcome of one Krylov solve. `residual_history` traces
/// ||r_k||_2 / ||r_0||_2 starting from 1.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    pub relative_residual: f64,
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

const BREAKDOWN_FLOOR: f64 = 1e-300;

/// Consecutive non-improving iterations after which the solve is declared
/// stagnant. At the double-precision attainable-accuracy floor the true
/// residual stops moving while the preconditioned one keeps collapsing;
/// without this cutoff the recurrence underflows into breakdown.
const STAGNATION_WINDOW: usize = 8;

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// CGS iteration. With a preconditioner the Krylov recurrences run on
/// P^{-1} A while the stopping test uses the true residual b - A x.
pub fn cgs(
    a: &dyn LinearOperator,
    pre: Option<&dyn LinearOperator>,
    b: &[f64],
    tol: f64,
    maxit: usize,
    x0: &[f64],
) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.dim();
    if b.len() != n || x0.len() != n {
        return Err(SolverError::DimensionMismatch {
            expected: n,
            got: b.len().min(x0.len()),
        });
    }
    if !(tol > 0.0) {
        return Err(SolverError::Domain(format!(
            "tol must be positive, got {tol}"
        )));
    }
    if let Some(p) = pre {
        if p.dim() != n {
            return Err(SolverError::DimensionMismatch {
                expected: n,
                got: p.dim(),
            });
        }
    }
    let precondition = |v: &[f64]| -> Vec<f64> {
        match pre {
            Some(p) => {
                let mut out = vec![0.0; v.len()];
                p.apply(v, &mut out);
                out
            }
            None => v.to_vec(),
        }
    };

    let mut x = x0.to_vec();
    let mut av = vec![0.0; n];

    let mut r_true: Vec<f64> = if x0.iter().all(|&v| v == 0.0) {
        b.to_vec()
    } else {
        a.apply(&x, &mut av);
        b.iter().zip(&av).map(|(p, q)| p - q).collect()
    };
    let r0_norm = norm2(&r_true);
    let mut history = vec![1.0];
    if r0_norm == 0.0 {
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                relative_residual: 0.0,
                residual_history: history,
                converged: true,
            },
        ));
    }

    let mut r_hat = precondition(&r_true);
    let r_shadow = r_hat.clone();
    let r_hat0_norm = norm2(&r_hat);
    let mut rho = dot(&r_shadow, &r_hat);
    let mut rho_prev = rho;
    let mut u = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut relres = 1.0;
    let mut best_relres = 1.0;
    let mut stalled = 0usize;

    for it in 1..=maxit {
        if rho.abs() < BREAKDOWN_FLOOR {
            return Err(SolverError::Breakdown {
                iteration: it,
                value: rho,
            });
        }
        if it == 1 {
            u.copy_from_slice(&r_hat);
            p.copy_from_slice(&r_hat);
        } else {
            let beta = rho / rho_prev;
            for i in 0..n {
                u[i] = r_hat[i] + beta * q[i];
            }
            for i in 0..n {
                p[i] = u[i] + beta * (q[i] + beta * p[i]);
            }
        }

        a.apply(&p, &mut av);
        let v_hat = precondition(&av);
        let den = dot(&r_shadow, &v_hat);
        if den.abs() < BREAKDOWN_FLOOR {
            return Err(SolverError::Breakdown {
                iteration: it,
                value: den,
            });
        }
        let alpha = rho / den;
        for i in 0..n {
            q[i] = u[i] - alpha * v_hat[i];
        }
        // w = u + q reuses u in place
        for i in 0..n {
            u[i] += q[i];
        }
        a.apply(&u, &mut av);
        let w_hat = precondition(&av);
        for i in 0..n {
            x[i] += alpha * u[i];
            r_true[i] -= alpha * av[i];
            r_hat[i] -= alpha * w_hat[i];
        }

        relres = norm2(&r_true) / r0_norm;
        history.push(relres);
        if !relres.is_finite() {
            return Err(SolverError::Divergence { iteration: it });
        }
        if relres < tol {
            return Ok((
                x,
                SolveReport {
                    iterations: it,
                    relative_residual: relres,
                    residual_history: history,
                    converged: true,
                },
            ));
        }

        // attainable-accuracy floor: the preconditioned residual has dropped
        // far past tol, or the true residual has stopped improving
        if relres < best_relres * 0.99 {
            best_relres = relres;
            stalled = 0;
        } else {
            stalled += 1;
        }
        let hat_rel = norm2(&r_hat) / r_hat0_norm;
        if stalled >= STAGNATION_WINDOW || (hat_rel < tol * 1e-2 && relres >= tol) {
            return Ok((
                x,
                SolveReport {
                    iterations: it,
                    relative_residual: relres,
                    residual_history: history,
                    converged: false,
                },
            ));
        }
        rho_prev = rho;
        rho = dot(&r_shadow, &r_hat);
    }

    Ok((
        x,
        SolveReport {
            iterations: maxit,
            relative_residual: relres,
            residual_history: history,
            converged: false,
        },
    ))
}
