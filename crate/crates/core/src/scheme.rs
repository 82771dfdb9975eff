//! Problem definition, per-level operator assembly, the memory term, and the
//! time-stepping drivers for the variable- and constant-coefficient paths.

use crate::circulant::{strang, CirculantInverse};
use crate::coeffs::{eta, shifted_weights, time_ab, time_c_row, FractionalOrders, SpatialWeights, TimeWeights};
use crate::error::{Result, SolverError};
use crate::gsf::gsf_build;
use crate::krylov::{cgs, SolveReport};
use crate::toeplitz::{LuFactors, Toeplitz, ToeplitzOperator};

/// Uniform space-time mesh. `n` counts space subintervals (at least 5),
/// `m` time steps; the interior problem has dimension n - 1.
#[derive(Debug, Clone, Copy)]
pub struct Grid {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub t_final: f64,
    pub m: usize,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize, t_final: f64, m: usize) -> Result<Self> {
        if !(b > a) {
            return Err(SolverError::Domain(format!(
                "space interval invalid: a = {a}, b = {b}"
            )));
        }
        if n < 5 {
            return Err(SolverError::Domain(format!(
                "N must be at least 5, got {n}"
            )));
        }
        if m < 1 {
            return Err(SolverError::Domain(format!("M must be at least 1, got {m}")));
        }
        if !(t_final > 0.0) {
            return Err(SolverError::Domain(format!(
                "final time must be positive, got {t_final}"
            )));
        }
        Ok(Self { a, b, n, t_final, m })
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    pub fn tau(&self) -> f64 {
        self.t_final / self.m as f64
    }

    pub fn interior_dim(&self) -> usize {
        self.n - 1
    }

    pub fn node(&self, i: usize) -> f64 {
        self.a + i as f64 * self.h()
    }

    pub fn interior_nodes(&self) -> Vec<f64> {
        (1..self.n).map(|i| self.node(i)).collect()
    }
}

pub type TimeFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceTimeFn = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Coefficient functions, source, initial data, and optionally the exact
/// solution. Homogeneous Dirichlet boundaries are implicit.
pub struct ProblemSpec {
    pub orders: FractionalOrders,
    pub gamma_t: TimeFn,
    pub dplus_t: TimeFn,
    pub dminus_t: TimeFn,
    pub source: SpaceTimeFn,
    pub initial: SpaceFn,
    pub exact: Option<SpaceTimeFn>,
    pub constant_coefficients: bool,
}

/// Implicit/explicit operator pair for one time level.
pub struct OperatorPair {
    pub a: Toeplitz,
    pub b: Toeplitz,
    pub eta: f64,
    pub level: usize,
}

/// How a level was advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Pcgs,
    Dense,
    GsfDirect,
}

/// Per-level record: the method used and, for iterative levels, the report.
#[derive(Debug, Clone)]
pub struct LevelSolve {
    pub method: SolveMethod,
    pub report: Option<SolveReport>,
}

/// The full trajectory u^0..u^M (interior values only) plus per-level solve
/// records.
pub struct SolutionHistory {
    pub levels: Vec<Vec<f64>>,
    pub solves: Vec<LevelSolve>,
}

impl SolutionHistory {
    pub fn level(&self, j: usize) -> &[f64] {
        &self.levels[j]
    }
}

/// Linear solver selection for the drivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverPath {
    Pcgs,
    Dense,
    Auto,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub path: SolverPath,
    pub tol: f64,
    pub maxit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            path: SolverPath::Auto,
            tol: 1e-12,
            maxit: 1000,
        }
    }
}

/// The leading time weight used by the drivers at every level. All levels,
/// including the first, share the j >= 1 value of eta.
pub fn level_eta(tw: &TimeWeights) -> Result<f64> {
    eta(tw, 1)
}

/// Build the implicit (A) and explicit (B) Toeplitz operators for level j.
pub fn assemble_pair(
    p: &ProblemSpec,
    g: &Grid,
    sw: &SpatialWeights,
    tw: &TimeWeights,
    j: usize,
) -> Result<OperatorPair> {
    let n = g.interior_dim();
    if sw.omega.len() < n + 1 {
        return Err(SolverError::Domain(format!(
            "spatial weights cover {} entries, need {}",
            sw.omega.len(),
            n + 1
        )));
    }
    let sigma = p.orders.sigma;
    let h = g.h();
    let t_js = (j as f64 + sigma) * g.tau();
    let gam = (p.gamma_t)(t_js);
    let dp = (p.dplus_t)(t_js);
    let dm = (p.dminus_t)(t_js);
    if dp < 0.0 || dm < 0.0 {
        return Err(SolverError::ProblemSpec(format!(
            "diffusion coefficients must be non-negative, got d+({t_js}) = {dp}, d-({t_js}) = {dm}"
        )));
    }
    let eta_j = level_eta(tw)?;
    let conv = gam / (2.0 * h);
    let hb = h.powf(p.orders.beta);
    let (dp_s, dm_s) = (dp / hb, dm / hb);
    let w = &sw.omega;

    // band of gamma/(2h) Q + D+/h^b W + D-/h^b W^T
    let mut s_col = vec![0.0; n];
    let mut s_row = vec![0.0; n];
    s_col[0] = (dp_s + dm_s) * w[1];
    s_row[0] = s_col[0];
    s_col[1] = -conv + dp_s * w[2] + dm_s * w[0];
    s_row[1] = conv + dp_s * w[0] + dm_s * w[2];
    for k in 2..n {
        s_col[k] = dp_s * w[k + 1];
        s_row[k] = dm_s * w[k + 1];
    }

    let build = |scale: f64| -> Result<Toeplitz> {
        let mut col: Vec<f64> = s_col.iter().map(|&v| scale * v).collect();
        let mut row: Vec<f64> = s_row.iter().map(|&v| scale * v).collect();
        col[0] += eta_j;
        row[0] = col[0];
        Toeplitz::new(col, row)
    };
    Ok(OperatorPair {
        a: build(-sigma)?,
        b: build(1.0 - sigma)?,
        eta: eta_j,
        level: j,
    })
}

/// Memory term H = tau^{-alpha}/Gamma(2-alpha) * sum_{s=0}^{j-1}
/// c_{j-s} (u^{s+1} - u^s). The drivers subtract H on the right-hand side.
pub fn history_term(
    tw: &TimeWeights,
    c_row: &[f64],
    hist: &SolutionHistory,
    j: usize,
) -> Result<Vec<f64>> {
    if j == 0 || c_row.len() != j + 1 {
        return Err(SolverError::Domain(format!(
            "history_term: level {j} with c row of length {}",
            c_row.len()
        )));
    }
    if hist.levels.len() <= j {
        return Err(SolverError::Domain(format!(
            "history_term: only {} stored levels for level {j}",
            hist.levels.len()
        )));
    }
    let n = hist.levels[0].len();
    let mut h = vec![0.0; n];
    for s in 0..j {
        let c = c_row[j - s];
        let newer = &hist.levels[s + 1];
        let older = &hist.levels[s];
        for i in 0..n {
            h[i] += c * (newer[i] - older[i]);
        }
    }
    let scale = tw.tau.powf(-tw.alpha) / tw.gamma2ma;
    for v in &mut h {
        *v *= scale;
    }
    Ok(h)
}

/// Hot-path form of the memory term over cached level differences
/// du^s = u^{s+1} - u^s. Accumulates four terms per pass to keep the
/// quadratic-in-M sweep memory-bound on the difference stream alone.
fn history_from_diffs(tw: &TimeWeights, c_row: &[f64], diffs: &[Vec<f64>], j: usize) -> Vec<f64> {
    let n = diffs[0].len();
    let mut h = vec![0.0; n];
    let mut s = 0;
    while s + 4 <= j {
        let (c0, c1, c2, c3) = (c_row[j - s], c_row[j - s - 1], c_row[j - s - 2], c_row[j - s - 3]);
        let (d0, d1, d2, d3) = (&diffs[s], &diffs[s + 1], &diffs[s + 2], &diffs[s + 3]);
        for i in 0..n {
            h[i] += c0 * d0[i] + c1 * d1[i] + c2 * d2[i] + c3 * d3[i];
        }
        s += 4;
    }
    while s < j {
        let c = c_row[j - s];
        for (hi, di) in h.iter_mut().zip(&diffs[s]) {
            *hi += c * di;
        }
        s += 1;
    }
    let scale = tw.tau.powf(-tw.alpha) / tw.gamma2ma;
    for v in &mut h {
        *v *= scale;
    }
    h
}

/// Right-hand side g = B u^j - H + f.
pub fn rhs(
    pair: &OperatorPair,
    u_prev: &[f64],
    h_term: Option<&[f64]>,
    f_vec: &[f64],
) -> Result<Vec<f64>> {
    let mut g = pair.b.matvec(u_prev)?;
    if let Some(h) = h_term {
        for (gi, hi) in g.iter_mut().zip(h) {
            *gi -= hi;
        }
    }
    for (gi, fi) in g.iter_mut().zip(f_vec) {
        *gi += fi;
    }
    Ok(g)
}

/// Source samples f(x_i, t_{j+sigma}) at the interior nodes.
pub fn sample_f(p: &ProblemSpec, g: &Grid, j: usize) -> Vec<f64> {
    let t = (j as f64 + p.orders.sigma) * g.tau();
    (1..g.n).map(|i| (p.source)(g.node(i), t)).collect()
}

/// Stagnated iterative solves are accepted when the relative residual is at
/// or below this floor; otherwise the level fails.
pub const RESIDUAL_ACCEPT_FLOOR: f64 = 1e-8;

fn at_level(level: usize) -> impl FnOnce(SolverError) -> SolverError {
    move |e| SolverError::AtLevel {
        level,
        source: Box::new(e),
    }
}

fn accept_report(report: &SolveReport, level: usize) -> Result<()> {
    if report.converged || report.relative_residual <= RESIDUAL_ACCEPT_FLOOR {
        Ok(())
    } else {
        Err(SolverError::AtLevel {
            level,
            source: Box::new(SolverError::Unconverged {
                relative_residual: report.relative_residual,
                iterations: report.iterations,
            }),
        })
    }
}

fn check_finite(u: &[f64], level: usize) -> Result<()> {
    if u.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(SolverError::AtLevel {
            level,
            source: Box::new(SolverError::Divergence { iteration: 0 }),
        })
    }
}

struct LevelContext {
    sw: SpatialWeights,
    tw: TimeWeights,
    x0: Vec<f64>,
}

fn prepare(p: &ProblemSpec, g: &Grid) -> Result<(LevelContext, SolutionHistory)> {
    let sw = shifted_weights(p.orders.beta, g.n + 2);
    let tw = time_ab(p.orders.alpha, g.m, g.tau())?;
    let u0: Vec<f64> = (1..g.n).map(|i| (p.initial)(g.node(i))).collect();
    check_finite(&u0, 0)?;
    let hist = SolutionHistory {
        levels: vec![u0],
        solves: Vec::new(),
    };
    let n = g.interior_dim();
    Ok((
        LevelContext {
            sw,
            tw,
            x0: vec![0.0; n],
        },
        hist,
    ))
}

/// Variable-coefficient driver: assemble, precondition, and solve one
/// Toeplitz system per level.
pub fn run_variable(p: &ProblemSpec, g: &Grid, cfg: &SolverConfig) -> Result<SolutionHistory> {
    let dense = matches!(cfg.path, SolverPath::Dense);
    let (ctx, mut hist) = prepare(p, g)?;
    let mut diffs: Vec<Vec<f64>> = Vec::with_capacity(g.m);
    let mut dense_cache: Option<LuFactors> = None;
    for j in 0..g.m {
        let pair = assemble_pair(p, g, &ctx.sw, &ctx.tw, j).map_err(at_level(j))?;
        let f_vec = sample_f(p, g, j);
        let h_term = if j >= 1 {
            let row = time_c_row(&ctx.tw, j).map_err(at_level(j))?;
            Some(history_from_diffs(&ctx.tw, &row, &diffs, j))
        } else {
            None
        };
        let g_vec = rhs(&pair, hist.level(j), h_term.as_deref(), &f_vec).map_err(at_level(j))?;

        let (u_next, solve) = if dense {
            if dense_cache.is_none() || !p.constant_coefficients {
                dense_cache = Some(pair.a.to_dense().lu().map_err(at_level(j))?);
            }
            let u = dense_cache
                .as_ref()
                .unwrap()
                .solve(&g_vec)
                .map_err(at_level(j))?;
            (
                u,
                LevelSolve {
                    method: SolveMethod::Dense,
                    report: None,
                },
            )
        } else {
            let a_op = ToeplitzOperator::new(&pair.a).map_err(at_level(j))?;
            let pre = CirculantInverse::new(&strang(&pair.a).map_err(at_level(j))?).map_err(at_level(j))?;
            let (u, report) = cgs(&a_op, Some(&pre), &g_vec, cfg.tol, cfg.maxit, &ctx.x0)
                .map_err(at_level(j))?;
            accept_report(&report, j)?;
            (
                u,
                LevelSolve {
                    method: SolveMethod::Pcgs,
                    report: Some(report),
                },
            )
        };
        check_finite(&u_next, j + 1)?;
        diffs.push(
            u_next
                .iter()
                .zip(hist.level(j))
                .map(|(a, b)| a - b)
                .collect(),
        );
        hist.levels.push(u_next);
        hist.solves.push(solve);
    }
    Ok(hist)
}

/// Constant-coefficient driver: one preconditioned solve for the first
/// level, then direct application of the cached Toeplitz inverse. Falls back
/// to per-level iteration when the inverse representation is unavailable.
pub fn run_constant(p: &ProblemSpec, g: &Grid, cfg: &SolverConfig) -> Result<SolutionHistory> {
    if !p.constant_coefficients {
        return Err(SolverError::ProblemSpec(
            "run_constant requires the constant_coefficients flag".into(),
        ));
    }
    let (ctx, mut hist) = prepare(p, g)?;
    let n = g.interior_dim();
    let mut diffs: Vec<Vec<f64>> = Vec::with_capacity(g.m);

    // the pair is level-independent; level 0 shares the leading weight
    let pair = assemble_pair(p, g, &ctx.sw, &ctx.tw, 0)?;
    let a_op = ToeplitzOperator::new(&pair.a)?;
    let b_op = ToeplitzOperator::new(&pair.b)?;
    let pre = CirculantInverse::new(&strang(&pair.a)?)?;

    // level 0
    {
        let f_vec = sample_f(p, g, 0);
        let g_vec = rhs(&pair, hist.level(0), None, &f_vec).map_err(at_level(0))?;
        let (u1, report) =
            cgs(&a_op, Some(&pre), &g_vec, cfg.tol, cfg.maxit, &ctx.x0).map_err(at_level(0))?;
        accept_report(&report, 0)?;
        check_finite(&u1, 1)?;
        diffs.push(u1.iter().zip(hist.level(0)).map(|(a, b)| a - b).collect());
        hist.levels.push(u1);
        hist.solves.push(LevelSolve {
            method: SolveMethod::Pcgs,
            report: Some(report),
        });
    }

    // inverse representation from the first and last unit vectors
    let acceptable = |r: &SolveReport| r.converged || r.relative_residual <= RESIDUAL_ACCEPT_FLOOR;
    let gsf = if g.m > 1 {
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        let mut en = vec![0.0; n];
        en[n - 1] = 1.0;
        match (
            cgs(&a_op, Some(&pre), &e1, cfg.tol, cfg.maxit, &ctx.x0),
            cgs(&a_op, Some(&pre), &en, cfg.tol, cfg.maxit, &ctx.x0),
        ) {
            (Ok((x, rx)), Ok((y, ry))) if acceptable(&rx) && acceptable(&ry) => {
                match gsf_build(&pair.a, &x, &y) {
                    Ok(gsf) => Some(gsf),
                    Err(SolverError::GsfInapplicable { .. }) => None,
                    Err(e) => return Err(e),
                }
            }
            (Ok(_), Ok(_)) => None,
            (Err(e), _) | (_, Err(e)) => return Err(at_level(0)(e)),
        }
    } else {
        None
    };

    let mut buf = vec![0.0; n];
    for j in 1..g.m {
        let row = time_c_row(&ctx.tw, j).map_err(at_level(j))?;
        let h_term = history_from_diffs(&ctx.tw, &row, &diffs, j);
        let f_vec = sample_f(p, g, j);
        b_op.apply(hist.level(j), &mut buf).map_err(at_level(j))?;
        let g_vec: Vec<f64> = buf
            .iter()
            .zip(&h_term)
            .zip(&f_vec)
            .map(|((b, h), f)| b - h + f)
            .collect();

        let (u_next, solve) = match &gsf {
            Some(inv) => (
                inv.apply(&g_vec).map_err(at_level(j))?,
                LevelSolve {
                    method: SolveMethod::GsfDirect,
                    report: None,
                },
            ),
            None => {
                let (u, report) = cgs(&a_op, Some(&pre), &g_vec, cfg.tol, cfg.maxit, &ctx.x0)
                    .map_err(at_level(j))?;
                accept_report(&report, j)?;
                (
                    u,
                    LevelSolve {
                        method: SolveMethod::Pcgs,
                        report: Some(report),
                    },
                )
            }
        };
        check_finite(&u_next, j + 1)?;
        diffs.push(
            u_next
                .iter()
                .zip(hist.level(j))
                .map(|(a, b)| a - b)
                .collect(),
        );
        hist.levels.push(u_next);
        hist.solves.push(solve);
    }
    Ok(hist)
}

/// Dispatch on the configured path and the problem's coefficient structure.
pub fn solve_problem(p: &ProblemSpec, g: &Grid, cfg: &SolverConfig) -> Result<SolutionHistory> {
    match cfg.path {
        SolverPath::Dense => run_variable(p, g, cfg),
        SolverPath::Pcgs => {
            let forced = SolverConfig {
                path: SolverPath::Pcgs,
                ..*cfg
            };
            run_variable(p, g, &forced)
        }
        SolverPath::Auto => {
            if p.constant_coefficients {
                run_constant(p, g, cfg)
            } else {
                let forced = SolverConfig {
                    path: SolverPath::Pcgs,
                    ..*cfg
                };
                run_variable(p, g, &forced)
            }
        }
    }
}
