//! Run configuration: flat key=value file plus command-line overrides,
//! validated before any run.

use std::path::{Path, PathBuf};

use fracsolve::coeffs::FractionalOrders;
use fracsolve::scheme::{Grid, ProblemSpec, SolverConfig, SolverPath};

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Example1,
    Example2,
    CustomConstant,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: Problem,
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    pub m: usize,
    pub t_final: f64,
    pub a: f64,
    pub b: f64,
    pub solver: SolverPath,
    pub tol: f64,
    pub maxit: usize,
    pub output: Option<PathBuf>,
    pub gamma: f64,
    pub dplus: f64,
    pub dminus: f64,
}

#[derive(Debug, Default)]
pub struct CliOverrides {
    pub problem: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub t_final: Option<f64>,
    pub tol: Option<f64>,
    pub maxit: Option<usize>,
    pub solver: Option<String>,
    pub output: Option<PathBuf>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value for key '{key}': '{value}'"))
}

fn parse_solver(key: &str, value: &str) -> Result<SolverPath, String> {
    match value {
        "pcgs" => Ok(SolverPath::Pcgs),
        "dense" => Ok(SolverPath::Dense),
        "auto" => Ok(SolverPath::Auto),
        other => Err(format!(
            "invalid value for key '{key}': '{other}' (expected pcgs, dense, or auto)"
        )),
    }
}

fn parse_problem(key: &str, value: &str) -> Result<Problem, String> {
    match value {
        "example1" => Ok(Problem::Example1),
        "example2" => Ok(Problem::Example2),
        "custom-constant" => Ok(Problem::CustomConstant),
        other => Err(format!(
            "unknown problem name for key '{key}': '{other}' (expected example1, example2, or custom-constant)"
        )),
    }
}

impl RunConfig {
    fn defaults() -> Self {
        Self {
            problem: Problem::Example1,
            alpha: 0.5,
            beta: 1.8,
            n: 32,
            m: 32,
            t_final: 1.0,
            a: 0.0,
            b: 1.0,
            solver: SolverPath::Auto,
            tol: 1e-12,
            maxit: 1000,
            output: None,
            gamma: 0.0,
            dplus: 1.0,
            dminus: 1.0,
        }
    }

    /// Read the optional config file, apply CLI overrides, and validate.
    pub fn load(file: Option<&Path>, over: &CliOverrides) -> Result<Self, String> {
        let mut cfg = Self::defaults();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
            cfg.apply_file(&text)?;
        }
        cfg.apply_overrides(over)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, text: &str) -> Result<(), String> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value, got '{line}'", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "problem" => self.problem = parse_problem(key, value)?,
                "alpha" => self.alpha = parse_value(key, value)?,
                "beta" => self.beta = parse_value(key, value)?,
                "N" => self.n = parse_value(key, value)?,
                "M" => self.m = parse_value(key, value)?,
                "T" => self.t_final = parse_value(key, value)?,
                "a" => self.a = parse_value(key, value)?,
                "b" => self.b = parse_value(key, value)?,
                "solver" => self.solver = parse_solver(key, value)?,
                "tol" => self.tol = parse_value(key, value)?,
                "maxit" => self.maxit = parse_value(key, value)?,
                "output" => self.output = Some(PathBuf::from(value)),
                "gamma" => self.gamma = parse_value(key, value)?,
                "dplus" => self.dplus = parse_value(key, value)?,
                "dminus" => self.dminus = parse_value(key, value)?,
                other => return Err(format!("unknown configuration key '{other}'")),
            }
        }
        Ok(())
    }

    fn apply_overrides(&mut self, over: &CliOverrides) -> Result<(), String> {
        if let Some(p) = &over.problem {
            self.problem = parse_problem("problem", p)?;
        }
        if let Some(v) = over.alpha {
            self.alpha = v;
        }
        if let Some(v) = over.beta {
            self.beta = v;
        }
        if let Some(v) = over.n {
            self.n = v;
        }
        if let Some(v) = over.m {
            self.m = v;
        }
        if let Some(v) = over.t_final {
            self.t_final = v;
        }
        if let Some(v) = over.tol {
            self.tol = v;
        }
        if let Some(v) = over.maxit {
            self.maxit = v;
        }
        if let Some(s) = &over.solver {
            self.solver = parse_solver("solver", s)?;
        }
        if let Some(p) = &over.output {
            self.output = Some(p.clone());
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(format!(
                "key 'alpha': value {} outside the admissible range (0, 1]",
                self.alpha
            ));
        }
        if !(self.beta > 1.0 && self.beta <= 2.0) {
            return Err(format!(
                "key 'beta': value {} outside the admissible range (1, 2]",
                self.beta
            ));
        }
        if self.n < 5 {
            return Err(format!("key 'N': value {} violates N >= 5", self.n));
        }
        if self.m < 1 {
            return Err(format!("key 'M': value {} violates M >= 1", self.m));
        }
        if !(self.t_final > 0.0) {
            return Err(format!("key 'T': value {} must be positive", self.t_final));
        }
        if !(self.b > self.a) {
            return Err(format!(
                "keys 'a'/'b': interval [{}, {}] is empty",
                self.a, self.b
            ));
        }
        if !(self.tol > 0.0) {
            return Err(format!("key 'tol': value {} must be positive", self.tol));
        }
        if self.maxit == 0 {
            return Err("key 'maxit': value must be at least 1".into());
        }
        if self.dplus < 0.0 || self.dminus < 0.0 {
            return Err(format!(
                "keys 'dplus'/'dminus': diffusion constants must be non-negative, got {} and {}",
                self.dplus, self.dminus
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, String> {
        Grid::new(self.a, self.b, self.n, self.t_final, self.m).map_err(|e| e.to_string())
    }

    pub fn grid_with(&self, n: usize, m: usize) -> Result<Grid, String> {
        Grid::new(self.a, self.b, n, self.t_final, m).map_err(|e| e.to_string())
    }

    pub fn build_problem(&self) -> Result<ProblemSpec, String> {
        match self.problem {
            Problem::Example1 => {
                fracsolve::analysis::example1(self.alpha, self.beta).map_err(|e| e.to_string())
            }
            Problem::Example2 => {
                fracsolve::analysis::example2(self.alpha, self.beta).map_err(|e| e.to_string())
            }
            Problem::CustomConstant => {
                let orders =
                    FractionalOrders::new(self.alpha, self.beta).map_err(|e| e.to_string())?;
                let (gamma, dplus, dminus) = (self.gamma, self.dplus, self.dminus);
                Ok(ProblemSpec {
                    orders,
                    gamma_t: Box::new(move |_| gamma),
                    dplus_t: Box::new(move |_| dplus),
                    dminus_t: Box::new(move |_| dminus),
                    source: Box::new(|_, _| 0.0),
                    initial: Box::new(|x| x * x * (1.0 - x) * (1.0 - x)),
                    exact: None,
                    constant_coefficients: true,
                })
            }
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            path: self.solver,
            tol: self.tol,
            maxit: self.maxit,
        }
    }

    pub fn problem_name(&self) -> &'static str {
        match self.problem {
            Problem::Example1 => "example1",
            Problem::Example2 => "example2",
            Problem::CustomConstant => "custom-constant",
        }
    }
}
