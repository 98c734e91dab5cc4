//! Commands behind the `gpcol` binary: solve, likelihood profile and
//! convergence study. Each writes a CSV with a one-line header; `solve` also
//! writes a JSON report next to the CSV.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::casebook::{case_config, CaseId};
use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::gp::{select_lengthscale, LengthscaleGrid, PosteriorField};
use crate::problem::{Oracle, Problem, Solution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NO_ORACLE: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => EXIT_IO,
        Error::NoOracle => EXIT_NO_ORACLE,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Regular grid with `n` nodes per axis over the bounding box, keeping the
/// nodes that lie in the closed domain.
pub fn evaluation_grid(domain: &Domain, n: usize) -> Result<Vec<Vec<f64>>> {
    if n < 2 {
        return Err(Error::Config(format!("grid resolution must be at least 2, got {n}")));
    }
    let (lo, hi) = domain.bounding_box()?;
    let axis = |k: usize| -> Vec<f64> {
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    hi[k]
                } else {
                    lo[k] + (hi[k] - lo[k]) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    };
    let points: Vec<Vec<f64>> = match domain.dim() {
        1 => axis(0).into_iter().map(|x| vec![x]).collect(),
        _ => {
            let (xs, ys) = (axis(0), axis(1));
            ys.iter()
                .flat_map(|y| xs.iter().map(move |x| vec![*x, *y]))
                .collect()
        }
    };
    points
        .into_iter()
        .filter_map(|p| match domain.contains_closed(&p) {
            Ok(true) => Some(Ok(p)),
            Ok(false) => None,
            Err(e) => Some(Err(e)),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridEvaluation {
    pub point: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub exact: Option<f64>,
}

impl GridEvaluation {
    pub fn lower95(&self) -> f64 {
        self.mean - 2.0 * self.std
    }

    pub fn upper95(&self) -> f64 {
        self.mean + 2.0 * self.std
    }

    pub fn abs_err(&self) -> Option<f64> {
        self.exact.map(|e| (e - self.mean).abs())
    }

    pub fn covered(&self) -> Option<bool> {
        self.abs_err().map(|e| e <= 2.0 * self.std)
    }
}

/// Posterior mean and standard deviation at every point, in input order.
pub fn evaluate_grid(
    field: &PosteriorField,
    oracle: Option<&Oracle>,
    points: &[Vec<f64>],
) -> Result<Vec<GridEvaluation>> {
    points
        .par_iter()
        .map(|p| {
            let (mean, var) = field.mean_and_variance(p)?;
            let exact = oracle.map(|o| o.value_at(p)).transpose()?;
            Ok(GridEvaluation {
                point: p.clone(),
                mean,
                std: var.sqrt(),
                exact,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorSummary {
    pub max_abs_err: f64,
    pub mean_abs_err: f64,
    pub coverage95: f64,
}

pub fn summarize(evals: &[GridEvaluation]) -> Option<ErrorSummary> {
    let errs: Vec<(f64, bool)> = evals
        .iter()
        .map(|e| Some((e.abs_err()?, e.covered()?)))
        .collect::<Option<_>>()?;
    if errs.is_empty() {
        return None;
    }
    let n = errs.len() as f64;
    Some(ErrorSummary {
        max_abs_err: errs.iter().map(|e| e.0).fold(0.0, f64::max),
        mean_abs_err: errs.iter().map(|e| e.0).sum::<f64>() / n,
        coverage95: errs.iter().filter(|e| e.1).count() as f64 / n,
    })
}

pub fn write_solution_csv(out: &mut impl Write, dim: usize, evals: &[GridEvaluation]) -> std::io::Result<()> {
    let with_exact = evals.first().is_some_and(|e| e.exact.is_some());
    let coords = ["x1", "x2", "x3"];
    let mut header: Vec<&str> = coords[..dim].to_vec();
    header.extend(["mean", "std", "lower95", "upper95"]);
    if with_exact {
        header.extend(["exact", "abs_err"]);
    }
    writeln!(out, "{}", header.join(","))?;
    for e in evals {
        let mut row: Vec<String> = e.point.iter().map(|v| fmt_num(*v)).collect();
        row.extend([e.mean, e.std, e.lower95(), e.upper95()].map(fmt_num));
        if let (Some(exact), Some(err)) = (e.exact, e.abs_err()) {
            row.extend([fmt_num(exact), fmt_num(err)]);
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualDiagnostics {
    pub max_abs_data: f64,
    pub max_interior_residual: f64,
    pub max_boundary_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub setup_ms: f64,
    pub lengthscale_and_factorization_ms: f64,
    pub grid_evaluation_ms: f64,
}

/// Everything `solve` learns, serialized as the JSON sidecar (grid values
/// go to the CSV).
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub config: String,
    pub csv: String,
    pub dimension: usize,
    pub n_interior: usize,
    pub n_boundary: usize,
    pub signal_strength: f64,
    pub lengthscale: f64,
    pub lengthscale_from_search: bool,
    pub jitter_used: f64,
    pub grid_points: usize,
    pub errors: Option<ErrorSummary>,
    pub residuals: ResidualDiagnostics,
    pub warnings: Vec<String>,
    pub timings: Timings,
    #[serde(skip)]
    pub evaluations: Vec<GridEvaluation>,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// JSON sidecar path: `out.csv` becomes `out.json`.
pub fn report_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn residual_diagnostics(field: &PosteriorField) -> Result<ResidualDiagnostics> {
    let residuals = field.collocation_residuals()?;
    let n_i = field.spec().discretization.interior.len();
    let max_abs = |v: &[f64]| v.iter().map(|r| r.abs()).fold(0.0, f64::max);
    Ok(ResidualDiagnostics {
        max_abs_data: max_abs(field.system().rhs().as_slice()),
        max_interior_residual: max_abs(&residuals[..n_i]),
        max_boundary_residual: max_abs(&residuals[n_i..]),
    })
}

/// Solves the problem in `config` and evaluates it on an `n`-per-axis grid.
pub fn solve_problem(problem: &Problem, grid: usize) -> Result<(Solution, Vec<GridEvaluation>)> {
    let solution = problem.solve()?;
    let points = evaluation_grid(&problem.spec.domain, grid)?;
    let evals = evaluate_grid(&solution.field, problem.oracle.as_ref(), &points)?;
    Ok((solution, evals))
}

pub fn cmd_solve(config: &Path, grid: usize, out: &Path) -> Result<SolveReport> {
    let t0 = Instant::now();
    let problem = Problem::from_config(ProblemConfig::load(config)?)?;
    let points = evaluation_grid(&problem.spec.domain, grid)?;
    let setup_ms = ms(t0);

    let t1 = Instant::now();
    let solution = problem.solve()?;
    let solve_ms = ms(t1);

    let t2 = Instant::now();
    let evaluations = evaluate_grid(&solution.field, problem.oracle.as_ref(), &points)?;
    let eval_ms = ms(t2);

    let field = &solution.field;
    let spec = field.spec();
    let report = SolveReport {
        config: config.display().to_string(),
        csv: out.display().to_string(),
        dimension: spec.dim(),
        n_interior: spec.discretization.interior.len(),
        n_boundary: spec.discretization.boundary.len(),
        signal_strength: spec.kernel.signal(),
        lengthscale: solution.lengthscale,
        lengthscale_from_search: solution.profile.is_some(),
        jitter_used: field.system().jitter_used(),
        grid_points: evaluations.len(),
        errors: summarize(&evaluations),
        residuals: residual_diagnostics(field)?,
        warnings: spec
            .order_warnings()
            .into_iter()
            .map(|(p, w)| format!("boundary operator at {p:?}: {w:?}"))
            .collect(),
        timings: Timings {
            setup_ms,
            lengthscale_and_factorization_ms: solve_ms,
            grid_evaluation_ms: eval_ms,
        },
        evaluations,
    };

    let mut w = create(out)?;
    write_solution_csv(&mut w, spec.dim(), &report.evaluations)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(out, e))?;
    let json_path = report_path(out);
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(&json_path, json + "\n").map_err(|e| Error::io(&json_path, e))?;
    Ok(report)
}

/// Writes `ell,normalized_likelihood` rows for an ascending lengthscale grid.
pub fn cmd_likelihood(config: &Path, grid: LengthscaleGrid, out: &Path) -> Result<Vec<(f64, f64)>> {
    let cfg = ProblemConfig::load(config)?;
    let spec = cfg.to_spec()?;
    let profile = select_lengthscale(&spec, &grid.values())?;
    let rows = profile.normalized();
    let mut w = create(out)?;
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "ell,normalized_likelihood")?;
        for (l, p) in &rows {
            writeln!(w, "{},{}", fmt_num(*l), fmt_num(*p))?;
        }
        w.flush()
    };
    write(&mut w).map_err(|e| Error::io(out, e))?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n_i: usize,
    pub lengthscale: f64,
    pub errors: ErrorSummary,
}

/// Solves the config once per interior count and compares each solution to
/// the oracle on an `grid`-per-axis evaluation grid.
pub fn convergence_study(config: &ProblemConfig, counts: &[usize], grid: usize) -> Result<Vec<ConvergenceRow>> {
    if config.oracle.is_none() {
        return Err(Error::NoOracle);
    }
    let base = Problem::from_config(config.clone())?;
    let points = evaluation_grid(&base.spec.domain, grid)?;
    counts
        .iter()
        .map(|&n_i| {
            let cfg = config.with_interior_count(n_i);
            let problem = Problem {
                spec: cfg.to_spec()?,
                lengthscale: cfg.lengthscale_policy()?,
                oracle: base.oracle.clone(),
                config: cfg,
            };
            let solution = problem.solve()?;
            let evals = evaluate_grid(&solution.field, problem.oracle.as_ref(), &points)?;
            Ok(ConvergenceRow {
                n_i,
                lengthscale: solution.lengthscale,
                errors: summarize(&evals).ok_or(Error::NoOracle)?,
            })
        })
        .collect()
}

pub fn cmd_convergence(config: &Path, counts: &[usize], grid: usize, out: &Path) -> Result<Vec<ConvergenceRow>> {
    let cfg = ProblemConfig::load(config)?;
    let rows = convergence_study(&cfg, counts, grid)?;
    let mut w = create(out)?;
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "n_i,ell,max_abs_err,mean_abs_err,coverage95")?;
        for r in &rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.n_i,
                fmt_num(r.lengthscale),
                fmt_num(r.errors.max_abs_err),
                fmt_num(r.errors.mean_abs_err),
                fmt_num(r.errors.coverage95)
            )?;
        }
        w.flush()
    };
    write(&mut w).map_err(|e| Error::io(out, e))?;
    Ok(rows)
}

/// Writes `<case>.json` for every built-in case with its default counts.
pub fn export_cases(dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    CaseId::ALL
        .into_iter()
        .map(|id| {
            let (n_i, n_b) = id.default_counts();
            let path = dir.join(format!("{id}.json"));
            std::fs::write(&path, case_config(id, n_i, n_b).to_json() + "\n").map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

/// Lengthscale grid for the `likelihood` command: `steps` values from `min`
/// to `max`, log-spaced unless `linear`.
pub fn likelihood_grid(min: f64, max: f64, steps: usize, linear: bool) -> Result<LengthscaleGrid> {
    LengthscaleGrid::new(min, max, steps, !linear)
}

