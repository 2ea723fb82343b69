//! Command implementations for the `wlab` binary.

pub mod config;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use wlab_core::calculus::{fit_convergence, ConvergenceFit};
use wlab_core::diagnostics::{Analysis, DiagnosticsReport};
use wlab_core::frame::FrameOptions;
use wlab_core::gallery::GALLERY;

use config::{Output, RunConfig, Transform};

/// Operational failures, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Chart(String),
    Analysis(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Chart(_) => 3,
            CliError::Analysis(_) | CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Chart(m) => write!(f, "chart construction failed: {m}"),
            CliError::Analysis(m) => write!(f, "analysis failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

/// Configures the global rayon pool from `WLAB_THREADS`.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("WLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("WLAB_THREADS: expected a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("WLAB_THREADS: {e}")))
}

/// Report plus the transform list, as written by `analyze`.
pub fn analyze_report(cfg: &RunConfig, nu: usize, nv: usize) -> Result<(Analysis, DiagnosticsReport), CliError> {
    let (built, applied) = cfg.build(nu, nv)?;
    let analysis = Analysis::run(&built.chart, &FrameOptions::for_chart(&built.chart))
        .map_err(|e| CliError::Analysis(e.to_string()))?;
    let mut report = analysis.report(&cfg.tolerances(&built.chart.spec));
    report.seed = Some(cfg.seed);
    report.hopf = built.hopf;
    report.transforms = applied.iter().map(describe).collect();
    Ok((analysis, report))
}

fn describe(t: &Transform) -> String {
    match t {
        Transform::Mobius { seed, magnitude } => format!("mobius(seed={}, magnitude={magnitude})", seed.unwrap_or(0)),
        Transform::IncludeN(n) => format!("include_n({n})"),
        Transform::Perturb { amplitude, seed } => format!("perturb(amplitude={amplitude}, seed={})", seed.unwrap_or(0)),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(io_err(path))
}

pub fn write_fields(analysis: &Analysis, path: &Path) -> Result<usize, CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let rows = analysis.pointwise_rows();
    for row in &rows {
        w.serialize(row)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(rows.len())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub schema_version: u32,
    pub surface: String,
    pub sizes: Vec<usize>,
    pub w_conformal: Vec<f64>,
    pub residuals: BTreeMap<String, Vec<f64>>,
    /// `None` when a residual was skipped at some size.
    pub fits: BTreeMap<String, Option<ConvergenceFit>>,
}

/// Reruns the analysis at each size (keeping the grid aspect ratio) and fits the residual decay.
pub fn convergence(cfg: &RunConfig, sizes: &[usize]) -> Result<ConvergenceTable, CliError> {
    if sizes.len() < 3 {
        return Err(CliError::Config(format!(
            "sizes: need at least 3 sizes, got {}",
            sizes.len()
        )));
    }
    if let Some(&bad) = sizes.iter().find(|&&n| n < config::MIN_GRID) {
        return Err(CliError::Config(format!(
            "sizes: {bad} is below the minimum grid size {}",
            config::MIN_GRID
        )));
    }
    let mut residuals: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut energies = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let nv = ((n * cfg.grid.nv) as f64 / cfg.grid.nu as f64)
            .round()
            .max(config::MIN_GRID as f64) as usize;
        let (_, report) = analyze_report(cfg, n, nv)?;
        energies.push(report.energies.w_conformal);
        for e in &report.entries {
            residuals.entry(e.name.clone()).or_default().push(e.linf);
        }
    }
    let fits = residuals
        .iter()
        .map(|(name, values)| {
            let fit = if values.iter().all(|v| v.is_finite()) {
                fit_convergence(sizes, values).ok()
            } else {
                None
            };
            (name.clone(), fit)
        })
        .collect();
    Ok(ConvergenceTable {
        schema_version: wlab_core::diagnostics::SCHEMA_VERSION,
        surface: cfg.surface.name.clone(),
        sizes: sizes.to_vec(),
        w_conformal: energies,
        residuals,
        fits,
    })
}

/// `analyze`: prints the report and writes any configured outputs. Returns the exit code.
pub fn cmd_analyze(cfg: &RunConfig, out: &mut impl Write) -> Result<i32, CliError> {
    let (analysis, report) = analyze_report(cfg, cfg.grid.nu, cfg.grid.nv)?;
    let json = to_json(&report);
    writeln!(out, "{json}").map_err(|e| CliError::Io(e.to_string()))?;
    for output in &cfg.outputs {
        match output {
            Output::Report(path) => write_file(path, &json)?,
            Output::Fields(path) => {
                write_fields(&analysis, path)?;
            }
            Output::Convergence { sizes, path } => {
                let table = to_json(&convergence(cfg, sizes)?);
                match path {
                    Some(p) => write_file(p, &table)?,
                    None => writeln!(out, "{table}").map_err(|e| CliError::Io(e.to_string()))?,
                }
            }
        }
    }
    Ok(if report.passed { 0 } else { 1 })
}

pub fn cmd_convergence(cfg: &RunConfig, sizes: Option<&[usize]>, out: &mut impl Write) -> Result<i32, CliError> {
    let from_config = cfg.outputs.iter().find_map(|o| match o {
        Output::Convergence { sizes, .. } => Some(sizes.as_slice()),
        _ => None,
    });
    let sizes = sizes
        .or(from_config)
        .ok_or_else(|| CliError::Config("sizes: pass --sizes or add a convergence output".into()))?;
    let table = convergence(cfg, sizes)?;
    writeln!(out, "{}", to_json(&table)).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(0)
}

pub fn cmd_gallery_list(out: &mut impl Write) -> Result<i32, CliError> {
    writeln!(out, "{}", to_json(&GALLERY)).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(0)
}

pub fn cmd_fields(cfg: &RunConfig, path: &Path) -> Result<i32, CliError> {
    let (built, _) = cfg.build(cfg.grid.nu, cfg.grid.nv)?;
    let analysis = Analysis::run(&built.chart, &FrameOptions::for_chart(&built.chart))
        .map_err(|e| CliError::Analysis(e.to_string()))?;
    write_fields(&analysis, path)?;
    Ok(0)
}
