//! Subcommand implementations and CSV emission.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use fracsolve::analysis::{
    benchmark, convergence_order, error_report, iteration_stats, ConvergenceRow,
};
use fracsolve::coeffs::{grunwald_g, shifted_weights, time_ab};
use fracsolve::scheme::{solve_problem, SolutionHistory, SolveMethod};

use crate::config::RunConfig;

type CmdResult = Result<(), Box<dyn std::error::Error>>;

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn write_out(path: Option<&Path>, content: &str) -> CmdResult {
    match path {
        Some(p) => {
            let mut f = std::fs::File::create(p)?;
            f.write_all(content.as_bytes())?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn solution_csv(cfg: &RunConfig, hist: &SolutionHistory) -> String {
    // final-level snapshot with boundary zeros reattached
    let h = (cfg.b - cfg.a) / cfg.n as f64;
    let u = hist.levels.last().expect("at least the initial level");
    let mut out = String::new();
    out.push_str(&format!("{},{}\n", fmt(cfg.a), fmt(0.0)));
    for (i, &v) in u.iter().enumerate() {
        out.push_str(&format!("{},{}\n", fmt(cfg.a + (i + 1) as f64 * h), fmt(v)));
    }
    out.push_str(&format!("{},{}\n", fmt(cfg.b), fmt(0.0)));
    out
}

pub fn cmd_solve(cfg: &RunConfig) -> CmdResult {
    let problem = cfg.build_problem()?;
    let grid = cfg.grid()?;
    let scfg = cfg.solver_config();
    let start = Instant::now();
    let hist = solve_problem(&problem, &grid, &scfg)?;
    let elapsed = start.elapsed().as_secs_f64();

    let path_used = hist
        .solves
        .iter()
        .map(|s| match s.method {
            SolveMethod::Pcgs => "pcgs",
            SolveMethod::Dense => "dense",
            SolveMethod::GsfDirect => "gsf",
        })
        .fold(None::<&str>, |acc, m| match acc {
            None => Some(m),
            Some(prev) if prev == m => Some(prev),
            Some(_) => Some("mixed"),
        })
        .unwrap_or("none");

    println!("problem: {}", cfg.problem_name());
    println!(
        "alpha = {}, beta = {}, N = {}, M = {}, solver = {path_used}",
        cfg.alpha, cfg.beta, cfg.n, cfg.m
    );
    println!("levels solved: {}", hist.solves.len());
    if let Some(stats) = iteration_stats(&hist) {
        println!(
            "pcgs iterations per level: mean {:.2}, min {}, max {}",
            stats.mean, stats.min, stats.max
        );
    }
    if let Some(exact_rep) = problem
        .exact
        .as_ref()
        .map(|_| error_report(&hist, &problem, &grid))
    {
        let rep = exact_rep?;
        println!(
            "max_n l2 error = {}, max norm = {}",
            fmt(rep.l2_max_over_time),
            fmt(rep.max_norm)
        );
    }
    println!("wall time: {elapsed:.3} s");

    let csv = solution_csv(cfg, &hist);
    let default = std::path::PathBuf::from("solution.csv");
    let out = cfg.output.clone().unwrap_or(default);
    write_out(Some(&out), &csv)?;
    println!("solution written to {}", out.display());
    Ok(())
}

pub fn cmd_convergence(cfg: &RunConfig, ladder: &[usize], mode: &str) -> CmdResult {
    if ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err("ladder must be strictly ascending".into());
    }
    let time_only = match mode {
        "space-time" => false,
        "time-only" => true,
        other => return Err(format!("unknown mode '{other}' (expected space-time or time-only)").into()),
    };

    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &entry in ladder {
        let (n, m) = if time_only {
            (cfg.n, entry)
        } else {
            // tau = h
            let h = (cfg.b - cfg.a) / entry as f64;
            let m = (cfg.t_final / h).round() as usize;
            (entry, m.max(1))
        };
        let problem = cfg.build_problem()?;
        let grid = cfg.grid_with(n, m)?;
        let hist = solve_problem(&problem, &grid, &cfg.solver_config())?;
        let rep = error_report(&hist, &problem, &grid)?;
        let (l2_order, max_order) = match rows.last() {
            Some(prev) => {
                let ratio = if time_only {
                    prev.tau / grid.tau()
                } else {
                    prev.h / grid.h()
                };
                (
                    Some(convergence_order(prev.l2_error, rep.l2_max_over_time, ratio)?),
                    Some(convergence_order(prev.max_error, rep.max_norm, ratio)?),
                )
            }
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            alpha: cfg.alpha,
            beta: cfg.beta,
            h: grid.h(),
            tau: grid.tau(),
            l2_error: rep.l2_max_over_time,
            l2_order,
            max_error: rep.max_norm,
            max_order,
        });
    }

    let mut csv = String::from("alpha,beta,h,tau,l2_error,l2_order,max_error,max_order\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt(r.alpha),
            fmt(r.beta),
            fmt(r.h),
            fmt(r.tau),
            fmt(r.l2_error),
            r.l2_order.map(fmt).unwrap_or_default(),
            fmt(r.max_error),
            r.max_order.map(fmt).unwrap_or_default(),
        ));
    }
    write_out(cfg.output.as_deref(), &csv)
}

pub fn cmd_bench(cfg: &RunConfig, ladder: &[usize]) -> CmdResult {
    let mut csv = String::from("N,M,time_dense_s,time_fast_s,speedup,iters_mean,iters_max\n");
    for &n in ladder {
        let problem = cfg.build_problem()?;
        let grid = cfg.grid_with(n, n)?;
        let rec = benchmark(&problem, &grid, &cfg.solver_config())?;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            rec.n,
            rec.m,
            fmt(rec.time_dense_s),
            fmt(rec.time_fast_s),
            fmt(rec.speedup),
            fmt(rec.iters_mean),
            rec.iters_max
        ));
    }
    write_out(cfg.output.as_deref(), &csv)
}

pub fn cmd_weights(alpha: f64, beta: f64, k: usize, output: Option<&Path>) -> CmdResult {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(format!("key 'alpha': value {alpha} outside the admissible range (0, 1]").into());
    }
    if !(beta > 1.0 && beta <= 2.0) {
        return Err(format!("key 'beta': value {beta} outside the admissible range (1, 2]").into());
    }
    let g = grunwald_g(beta, k);
    let sw = shifted_weights(beta, k);
    let tw = time_ab(alpha, k.max(1), 1.0)?;
    let mut csv = String::from("k,g,omega,a,b\n");
    for i in 0..=k {
        let a = tw.a.get(i).copied().unwrap_or(0.0);
        let b = tw.b.get(i).copied().unwrap_or(0.0);
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            i,
            fmt(g[i]),
            fmt(sw.omega[i]),
            fmt(a),
            fmt(b)
        ));
    }
    write_out(output, &csv)
}

pub fn cmd_export(cfg: &RunConfig, level: usize) -> CmdResult {
    if level >= cfg.m {
        return Err(format!("level {level} outside 0..{}", cfg.m - 1).into());
    }
    let problem = cfg.build_problem()?;
    let grid = cfg.grid()?;
    let dir = cfg
        .output
        .clone()
        .unwrap_or_else(|| std::path::PathBuf::from("."));
    let (a_path, p_path) = fracsolve::analysis::export_matrices(&problem, &grid, level, &dir)?;
    println!("wrote {}", a_path.display());
    println!("wrote {}", p_path.display());
    Ok(())
}
