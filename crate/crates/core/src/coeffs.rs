//! Scalar coefficient sequences for the fractional discretization: Gamma
//! function values, Grunwald weights, second-order shifted weights, and the
//! sigma-point time weights.

use crate::error::{Result, SolverError};

/// Lanczos coefficients, g = 7, 9 terms. Relative accuracy better than 1e-13
/// over the positive reals used here.
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for positive arguments.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(SolverError::Domain(format!(
            "gamma_fn requires x > 0, got {x}"
        )));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // reflection keeps the Lanczos argument away from the poles
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma_unchecked(1.0 - x))
    } else {
        let z = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let t = z + 7.5;
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
    }
}

/// Fractional orders of the problem: alpha in time, beta in space, and the
/// derived weight point sigma = 1 - alpha/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrders {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
}

impl FractionalOrders {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(SolverError::Domain(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        if !(beta > 1.0 && beta <= 2.0) {
            return Err(SolverError::Domain(format!(
                "beta must lie in (1, 2], got {beta}"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            sigma: 1.0 - alpha / 2.0,
        })
    }
}

/// Grunwald coefficients g_k = (-1)^k C(beta, k) for k = 0..=k_max, computed
/// by the stable multiplicative recurrence.
pub fn grunwald_g(beta: f64, k_max: usize) -> Vec<f64> {
    let mut g = Vec::with_capacity(k_max + 1);
    g.push(1.0);
    for k in 1..=k_max {
        let prev = g[k - 1];
        g.push((1.0 - (beta + 1.0) / k as f64) * prev);
    }
    g
}

/// The shifted second-order spatial weights omega_k together with the lambda
/// blend factors and the underlying Grunwald sequence.
#[derive(Debug, Clone)]
pub struct SpatialWeights {
    pub beta: f64,
    pub lambda1: f64,
    pub lambda0: f64,
    pub lambdam1: f64,
    pub g: Vec<f64>,
    pub omega: Vec<f64>,
}

/// Assemble omega_0..omega_k_max from the three-branch combination of
/// Grunwald weights.
pub fn shifted_weights(beta: f64, k_max: usize) -> SpatialWeights {
    let lambda1 = (beta * beta + 3.0 * beta + 2.0) / 12.0;
    let lambda0 = (4.0 - beta * beta) / 6.0;
    let lambdam1 = (beta * beta - 3.0 * beta + 2.0) / 12.0;
    let g = grunwald_g(beta, k_max);
    let mut omega = Vec::with_capacity(k_max + 1);
    omega.push(lambda1 * g[0]);
    if k_max >= 1 {
        omega.push(lambda1 * g[1] + lambda0 * g[0]);
    }
    for k in 2..=k_max {
        omega.push(lambda1 * g[k] + lambda0 * g[k - 1] + lambdam1 * g[k - 2]);
    }
    SpatialWeights {
        beta,
        lambda1,
        lambda0,
        lambdam1,
        g,
        omega,
    }
}

/// Time weights of the sigma-point discretization. `a` and `b` are indexed by
/// level offset; `b[0]` is unused and stored as zero.
#[derive(Debug, Clone)]
pub struct TimeWeights {
    pub alpha: f64,
    pub sigma: f64,
    pub tau: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub gamma2ma: f64,
}

/// Fill a_0..a_m and b_1..b_m from the closed forms.
pub fn time_ab(alpha: f64, m: usize, tau: f64) -> Result<TimeWeights> {
    if m < 1 {
        return Err(SolverError::Domain("time_ab requires M >= 1".into()));
    }
    if !(tau > 0.0) {
        return Err(SolverError::Domain(format!("tau must be positive, got {tau}")));
    }
    let sigma = 1.0 - alpha / 2.0;
    let e1 = 1.0 - alpha;
    let e2 = 2.0 - alpha;
    let mut a = Vec::with_capacity(m + 1);
    let mut b = vec![0.0; m + 1];
    a.push(sigma.powf(e1));
    for (l, bl) in b.iter_mut().enumerate().skip(1) {
        let hi = l as f64 + sigma;
        let lo = l as f64 - 1.0 + sigma;
        a.push(hi.powf(e1) - lo.powf(e1));
        *bl = (hi.powf(e2) - lo.powf(e2)) / e2 - 0.5 * (hi.powf(e1) + lo.powf(e1));
    }
    Ok(TimeWeights {
        alpha,
        sigma,
        tau,
        a,
        b,
        gamma2ma: gamma_fn(2.0 - alpha)?,
    })
}

impl TimeWeights {
    fn max_level(&self) -> usize {
        self.a.len() - 1
    }
}

/// Row of c coefficients for time level j (indices m = 0..=j).
pub fn time_c_row(tw: &TimeWeights, j: usize) -> Result<Vec<f64>> {
    if j + 1 > tw.max_level() {
        return Err(SolverError::Domain(format!(
            "time_c_row: level {j} outside precomputed range"
        )));
    }
    if j == 0 {
        return Ok(vec![tw.a[0]]);
    }
    let mut c = Vec::with_capacity(j + 1);
    c.push(tw.a[0] + tw.b[1]);
    for m in 1..j {
        c.push(tw.a[m] + tw.b[m + 1] - tw.b[m]);
    }
    c.push(tw.a[j] - tw.b[j]);
    Ok(c)
}

/// Leading time coefficient eta_j = c_0 / (tau^alpha Gamma(2 - alpha)).
/// Constant across j >= 1.
pub fn eta(tw: &TimeWeights, j: usize) -> Result<f64> {
    let c0 = if j == 0 {
        tw.a[0]
    } else {
        if tw.max_level() < 1 {
            return Err(SolverError::Domain("eta: level outside range".into()));
        }
        tw.a[0] + tw.b[1]
    };
    Ok(c0 / (tw.tau.powf(tw.alpha) * tw.gamma2ma))
}
