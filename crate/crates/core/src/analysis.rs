//! Error norms, convergence-order estimation, the two manufactured-solution
//! problems, benchmark timing, and dense matrix export.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use crate::circulant::strang;
use crate::coeffs::{gamma_fn, shifted_weights, time_ab, FractionalOrders};
use crate::error::{Result, SolverError};
use crate::scheme::{
    assemble_pair, solve_problem, Grid, ProblemSpec, SolutionHistory, SolveMethod, SolverConfig,
    SolverPath,
};

/// Discrete L2 norm sqrt(h * sum v_i^2).
pub fn discrete_l2(v: &[f64], h: f64) -> f64 {
    (h * v.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

/// Error norms of a trajectory against the exact solution, over the whole
/// mesh including the initial level.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub l2_max_over_time: f64,
    pub max_norm: f64,
    pub per_level_l2: Vec<f64>,
}

pub fn error_report(hist: &SolutionHistory, p: &ProblemSpec, g: &Grid) -> Result<ErrorReport> {
    let exact = p.exact.as_ref().ok_or(SolverError::MissingExact)?;
    let h = g.h();
    let tau = g.tau();
    let mut per_level = Vec::with_capacity(hist.levels.len());
    let mut max_norm: f64 = 0.0;
    for (j, u) in hist.levels.iter().enumerate() {
        let t = j as f64 * tau;
        let mut sq = 0.0;
        for (i, &ui) in u.iter().enumerate() {
            let e = exact(g.node(i + 1), t) - ui;
            sq += e * e;
            max_norm = max_norm.max(e.abs());
        }
        per_level.push((h * sq).sqrt());
    }
    Ok(ErrorReport {
        l2_max_over_time: per_level.iter().copied().fold(0.0, f64::max),
        max_norm,
        per_level_l2: per_level,
    })
}

/// CO = log(coarse/fine) / log(ratio).
pub fn convergence_order(coarse_err: f64, fine_err: f64, ratio: f64) -> Result<f64> {
    if !(coarse_err > 0.0 && fine_err > 0.0) {
        return Err(SolverError::Domain(
            "convergence_order requires positive errors".into(),
        ));
    }
    if !(ratio > 1.0) {
        return Err(SolverError::Domain(format!(
            "refinement ratio must exceed 1, got {ratio}"
        )));
    }
    Ok((coarse_err / fine_err).ln() / ratio.ln())
}

/// One row of a convergence table. Order cells are empty on the coarsest row.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub alpha: f64,
    pub beta: f64,
    pub h: f64,
    pub tau: f64,
    pub l2_error: f64,
    pub l2_order: Option<f64>,
    pub max_error: f64,
    pub max_order: Option<f64>,
}

/// First manufactured problem: constant coefficients d+ = 0.8, d- = 0.5,
/// gamma = -0.1 on [0,1]x[0,1], exact solution (t^(2+alpha)+1) x^2 (1-x)^2.
pub fn example1(alpha: f64, beta: f64) -> Result<ProblemSpec> {
    let orders = FractionalOrders::new(alpha, beta)?;
    let (dp, dm, gam) = (0.8, 0.5, -0.1);
    let g3 = gamma_fn(3.0)? / gamma_fn(3.0 - beta)?;
    let g4 = 2.0 * gamma_fn(4.0)? / gamma_fn(4.0 - beta)?;
    let g5 = gamma_fn(5.0)? / gamma_fn(5.0 - beta)?;
    let ga = gamma_fn(3.0 + alpha)? / 2.0;
    let source = move |x: f64, t: f64| {
        let xm = 1.0 - x;
        let xp = x.powf(2.0 - beta);
        let mp = xm.powf(2.0 - beta);
        let bracket = 2.0 * gam * x * xm * (1.0 - 2.0 * x)
            + g3 * (dp * xp + dm * mp)
            - g4 * (dp * xp * x + dm * mp * xm)
            + g5 * (dp * xp * x * x + dm * mp * xm * xm);
        let shape = x * x * xm * xm;
        ga * shape * t * t - (t.powf(2.0 + alpha) + 1.0) * bracket
    };
    Ok(ProblemSpec {
        orders,
        gamma_t: Box::new(move |_| gam),
        dplus_t: Box::new(move |_| dp),
        dminus_t: Box::new(move |_| dm),
        source: Box::new(source),
        initial: Box::new(|x| x * x * (1.0 - x) * (1.0 - x)),
        exact: Some(Box::new(move |x, t| {
            (t.powf(2.0 + alpha) + 1.0) * x * x * (1.0 - x) * (1.0 - x)
        })),
        constant_coefficients: true,
    })
}

/// Second manufactured problem: time-dependent coefficients d+ = 9 sin t,
/// d- = 4 sin t, gamma = -t; same exact solution shape as the first.
pub fn example2(alpha: f64, beta: f64) -> Result<ProblemSpec> {
    let orders = FractionalOrders::new(alpha, beta)?;
    let g3 = gamma_fn(3.0)? / gamma_fn(3.0 - beta)?;
    let g4 = 2.0 * gamma_fn(4.0)? / gamma_fn(4.0 - beta)?;
    let g5 = gamma_fn(5.0)? / gamma_fn(5.0 - beta)?;
    let ga = gamma_fn(3.0 + alpha)? / 2.0;
    let source = move |x: f64, t: f64| {
        let xm = 1.0 - x;
        let xp = x.powf(2.0 - beta);
        let mp = xm.powf(2.0 - beta);
        let st = t.sin();
        let bracket = -2.0 * t * x * xm * (1.0 - 2.0 * x)
            + g3 * st * (9.0 * xp + 4.0 * mp)
            - g4 * st * (9.0 * xp * x + 4.0 * mp * xm)
            + g5 * st * (9.0 * xp * x * x + 4.0 * mp * xm * xm);
        let shape = x * x * xm * xm;
        ga * t * t * shape - (t.powf(2.0 + alpha) + 1.0) * bracket
    };
    Ok(ProblemSpec {
        orders,
        gamma_t: Box::new(|t| -t),
        dplus_t: Box::new(|t| 9.0 * t.sin()),
        dminus_t: Box::new(|t| 4.0 * t.sin()),
        source: Box::new(source),
        initial: Box::new(|x| x * x * (1.0 - x) * (1.0 - x)),
        exact: Some(Box::new(move |x, t| {
            (t.powf(2.0 + alpha) + 1.0) * x * x * (1.0 - x) * (1.0 - x)
        })),
        constant_coefficients: false,
    })
}

/// Iteration statistics over the levels of a run that used the iterative
/// solver.
#[derive(Debug, Clone, Copy)]
pub struct IterationStats {
    pub mean: f64,
    pub min: usize,
    pub max: usize,
}

pub fn iteration_stats(hist: &SolutionHistory) -> Option<IterationStats> {
    let iters: Vec<usize> = hist
        .solves
        .iter()
        .filter(|s| s.method == SolveMethod::Pcgs)
        .filter_map(|s| s.report.as_ref().map(|r| r.iterations))
        .collect();
    if iters.is_empty() {
        return None;
    }
    Some(IterationStats {
        mean: iters.iter().sum::<usize>() as f64 / iters.len() as f64,
        min: *iters.iter().min().unwrap(),
        max: *iters.iter().max().unwrap(),
    })
}

/// Wall-clock comparison of the dense and fast solution paths.
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub n: usize,
    pub m: usize,
    pub time_dense_s: f64,
    pub time_fast_s: f64,
    pub speedup: f64,
    pub iters_mean: f64,
    pub iters_max: usize,
}

/// Best-of-3 timing of both paths; problem construction is excluded from the
/// measured interval.
pub fn benchmark(p: &ProblemSpec, g: &Grid, cfg: &SolverConfig) -> Result<BenchRecord> {
    let dense_cfg = SolverConfig {
        path: SolverPath::Dense,
        ..*cfg
    };
    let fast_cfg = SolverConfig {
        path: if cfg.path == SolverPath::Dense {
            SolverPath::Auto
        } else {
            cfg.path
        },
        ..*cfg
    };
    let mut time_dense = f64::INFINITY;
    let mut time_fast = f64::INFINITY;
    let mut stats: Option<IterationStats> = None;
    for _ in 0..3 {
        let start = Instant::now();
        let _ = solve_problem(p, g, &dense_cfg)?;
        time_dense = time_dense.min(start.elapsed().as_secs_f64());

        let start = Instant::now();
        let hist = solve_problem(p, g, &fast_cfg)?;
        time_fast = time_fast.min(start.elapsed().as_secs_f64());
        if stats.is_none() {
            stats = iteration_stats(&hist);
        }
    }
    let stats = stats.unwrap_or(IterationStats {
        mean: 0.0,
        min: 0,
        max: 0,
    });
    Ok(BenchRecord {
        n: g.n,
        m: g.m,
        time_dense_s: time_dense,
        time_fast_s: time_fast,
        speedup: time_dense / time_fast,
        iters_mean: stats.mean,
        iters_max: stats.max,
    })
}

/// Write a dense matrix as row-major CSV with round-trip decimal formatting.
pub fn write_dense_csv(path: &Path, n: usize, entry: impl Fn(usize, usize) -> f64) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    for i in 0..n {
        let mut line = String::new();
        for j in 0..n {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{}", entry(i, j)));
        }
        writeln!(file, "{line}")?;
    }
    Ok(())
}

/// Export the dense system matrix of level j and the circulant-preconditioned
/// product for external spectrum analysis. Returns the two file paths.
pub fn export_matrices(
    p: &ProblemSpec,
    g: &Grid,
    j: usize,
    dir: &Path,
) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
    let sw = shifted_weights(p.orders.beta, g.n + 2);
    let tw = time_ab(p.orders.alpha, g.m, g.tau())?;
    let pair = assemble_pair(p, g, &sw, &tw, j)?;
    let n = g.interior_dim();
    let dense = pair.a.to_dense();

    std::fs::create_dir_all(dir)?;
    let a_path = dir.join("a_matrix.csv");
    write_dense_csv(&a_path, n, |i, k| dense.get(i, k))?;

    // columns of P^{-1} A via circulant solves against the columns of A
    let pre = strang(&pair.a)?;
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let col: Vec<f64> = (0..n).map(|i| dense.get(i, k)).collect();
        cols.push(pre.solve(&col)?);
    }
    let p_path = dir.join("preconditioned_a.csv");
    write_dense_csv(&p_path, n, |i, k| cols[k][i])?;
    Ok((a_path, p_path))
}
