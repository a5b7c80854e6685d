//! Command-line front end.
//!
//! Every command writes a CSV or JSON data file (stdout unless `--out` is
//! given). Numbers are rounded to 12 significant digits so both encodings of
//! a run carry identical values. Exit codes: 0 success, 2 configuration
//! error, 3 numerical or oracle failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::channels::{channel_fidelity, choi, scenario_channel, ProcessMap, ProcessMatrix, Scenario};
use crate::error::{Branch, Error};
use crate::imperfections::{
    imperfect_transfer_channel, oracle_deviation, oracle_grid, DistinguishabilityModel, PpbsPhysical,
    ReflectionConvention,
};
use crate::optimize::{maximize_kappa, maximize_omega, sweep_tv};
use crate::protocol::{
    branch_operator, conditional_states, decompose_filter, feed_forward_plan, synthesize_filter,
    InteractionSpec, PureQubit,
};
use crate::qmath::{Complex2Matrix, Complex2Vector, Complex4Matrix, C64};
use crate::tomography::{
    compare, exact_probabilities, reconstruct_linear, reconstruct_mle, sample_counts, Basis,
    Detection, Observations, ProbeSet, ReconstructionResult,
};

/// Oracle tolerance for `oracle-check`.
pub const ORACLE_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "qrl", version, about = "Heralded qubit transfer through a weak coupling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Conditional states, filters, branch operators, success and fidelity
    /// for one setting.
    Transfer,
    /// Fidelity and success over ω ∈ {5°, 10°, …, 85°} for scenarios a, b, c.
    SweepOmega,
    /// Optimal and unfiltered success over T_V ∈ {0.01, …, 0.99}.
    SweepTv,
    /// Simulated process tomography; writes files into `--out`.
    Tomography,
    /// Best ω at the configured κ and best κ at the configured ω.
    Optimize,
    /// Compares the Fock-space oracle with the closed-form PPBS operator.
    OracleCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    A,
    B,
    C,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::A => Scenario::BARE,
            ScenarioArg::B => Scenario::FILTER_ONLY,
            ScenarioArg::C => Scenario::FULL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Estimator {
    /// Linear inversion for exact probabilities, MLE for counts.
    Auto,
    Linear,
    Mle,
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Vertical intensity transmittance of the PPBS.
    #[arg(long, global = true, default_value_t = 0.334)]
    pub tv_squared: f64,
    /// Horizontal intensity transmittance of the PPBS.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub th_squared: f64,
    #[arg(long, global = true, default_value_t = 55.0)]
    pub omega_deg: f64,
    #[arg(long, global = true, default_value_t = 45.0)]
    pub kappa_deg: f64,
    #[arg(long, global = true, value_enum, default_value_t = ScenarioArg::C)]
    pub scenario: ScenarioArg,
    /// Two-photon interference visibility.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub visibility: f64,
    /// Shots per tomography setting.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub shots: u64,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; a directory for `tomography`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Use exact outcome probabilities instead of sampled counts.
    #[arg(long, global = true)]
    pub infinite_statistics: bool,
    #[arg(long, global = true, value_enum, default_value_t = Estimator::Auto)]
    pub estimator: Estimator,
    /// Negative control for `oracle-check`.
    #[arg(long, global = true, hide = true)]
    pub flip_reflection_sign: bool,
}

/// Validated configuration; angles in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tv_squared: f64,
    pub th_squared: f64,
    pub omega: f64,
    pub kappa: f64,
    pub scenario: Scenario,
    pub visibility: f64,
    pub shots: u64,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub infinite_statistics: bool,
    pub estimator: Estimator,
    pub flip_reflection_sign: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::try_from(&ConfigArgs {
            tv_squared: 0.334,
            th_squared: 1.0,
            omega_deg: 55.0,
            kappa_deg: 45.0,
            scenario: ScenarioArg::C,
            visibility: 1.0,
            shots: 10_000,
            seed: 1,
            format: Format::Csv,
            out: None,
            infinite_statistics: false,
            estimator: Estimator::Auto,
            flip_reflection_sign: false,
        })
        .expect("defaults are valid")
    }
}

impl TryFrom<&ConfigArgs> for RunConfig {
    type Error = CliError;

    fn try_from(a: &ConfigArgs) -> Result<Self, CliError> {
        let check = |what: &str, x: f64, lo: f64, hi: f64| {
            if x.is_finite() && (lo..=hi).contains(&x) {
                Ok(x)
            } else {
                Err(CliError::Config(format!("{what} = {x} is out of range [{lo}, {hi}]")))
            }
        };
        if a.shots == 0 {
            return Err(CliError::Config("--shots must be positive".into()));
        }
        Ok(Self {
            tv_squared: check("--tv-squared", a.tv_squared, 0.0, 1.0)?,
            th_squared: check("--th-squared", a.th_squared, 0.0, 1.0)?,
            omega: check("--omega-deg", a.omega_deg, 0.0, 90.0)?.to_radians(),
            kappa: check("--kappa-deg", a.kappa_deg, 0.0, 90.0)?.to_radians(),
            scenario: a.scenario.into(),
            visibility: check("--visibility", a.visibility, 0.0, 1.0)?,
            shots: a.shots,
            seed: a.seed,
            format: a.format,
            out: a.out.clone(),
            infinite_statistics: a.infinite_statistics,
            estimator: a.estimator,
            flip_reflection_sign: a.flip_reflection_sign,
        })
    }
}

impl RunConfig {
    /// No imperfection requested: perfect H transmission, full visibility.
    pub fn is_ideal(&self) -> bool {
        self.th_squared == 1.0 && self.visibility == 1.0
    }

    /// The heralded single-qubit map for a preparation angle and scenario.
    pub fn transfer_map(&self, omega: f64, scenario: Scenario) -> crate::error::Result<ProcessMap> {
        let g = PureQubit::from_angle(omega);
        if self.is_ideal() {
            let v = InteractionSpec::ppbs_intensity(self.tv_squared)?;
            scenario_channel(&v, &g, self.kappa, scenario)
        } else {
            let p = PpbsPhysical::from_intensities(self.th_squared, self.tv_squared)?;
            let vis = DistinguishabilityModel::new(self.visibility)?;
            imperfect_transfer_channel(&p, &vis, &g, self.kappa, scenario)
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Parse(_) | Error::Csv(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Rounds to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn format_number(x: f64) -> String {
    let r = round_sig(x);
    if r.is_nan() {
        "NaN".into()
    } else if r == 0.0 {
        "0".into()
    } else if r.is_finite() && (1e-4..1e15).contains(&r.abs()) {
        r.to_string()
    } else {
        format!("{r:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(round_sig(*x)),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Rows of named columns. JSON is an array of objects keyed by column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let csv_err = |e: csv::Error| CliError::Config(e.to_string());
                w.write_record(&self.columns).map_err(csv_err)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(csv_err)?;
                }
                w.into_inner().map_err(|e| CliError::Config(e.to_string()))
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        Value::Object(
                            self.columns
                                .iter()
                                .zip(row)
                                .map(|(c, v)| (c.to_string(), v.json()))
                                .collect(),
                        )
                    })
                    .collect();
                pretty(&Value::Array(rows))
            }
        }
    }
}

/// Named scalar results. CSV has columns `quantity,value`; JSON is one object.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report(pub Vec<(String, Cell)>);

impl Report {
    pub fn push(&mut self, name: impl Into<String>, value: impl Into<Cell>) {
        self.0.push((name.into(), value.into()));
    }

    fn push_matrix(&mut self, name: &str, m: &Complex2Matrix) {
        for i in 0..2 {
            for j in 0..2 {
                self.push(format!("{name}[{i}][{j}].re"), m.0[i][j].re);
                self.push(format!("{name}[{i}][{j}].im"), m.0[i][j].im);
            }
        }
    }

    fn push_vector(&mut self, name: &str, v: &Complex2Vector) {
        for i in 0..2 {
            self.push(format!("{name}[{i}].re"), v.0[i].re);
            self.push(format!("{name}[{i}].im"), v.0[i].im);
        }
    }

    pub fn get(&self, name: &str) -> Option<&Cell> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => Table {
                columns: vec!["quantity", "value"],
                rows: self.0.iter().map(|(n, v)| vec![Cell::Text(n.clone()), v.clone()]).collect(),
            }
            .render(Format::Csv),
            Format::Json => {
                let map: Map<String, Value> = self.0.iter().map(|(n, v)| (n.clone(), v.json())).collect();
                pretty(&Value::Object(map))
            }
        }
    }
}

fn pretty(v: &Value) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(v).map_err(|e| CliError::Numerical(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// What a command produced.
#[derive(Debug)]
pub enum Output {
    Table(Table),
    Report(Report),
    /// Files already written into a directory.
    Files(Vec<PathBuf>),
}

/// The preparation angles of the ω sweep, in degrees.
pub fn omega_grid_deg() -> Vec<f64> {
    (1..=17).map(|i| 5.0 * f64::from(i)).collect()
}

/// `T_V ∈ {0.01, …, 0.99}` plus `extra`, sorted and deduplicated.
pub fn tv_grid(extra: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = (1..=99).map(|i| f64::from(i) / 100.0).collect();
    if !grid.iter().any(|t| (t - extra).abs() < 1e-12) {
        grid.push(extra);
        grid.sort_by(f64::total_cmp);
    }
    grid
}

pub fn cmd_transfer(cfg: &RunConfig) -> Result<Report, CliError> {
    let design = InteractionSpec::ppbs_intensity(cfg.tv_squared)?;
    let g = PureQubit::from_angle(cfg.omega);
    let pi_plus = PureQubit::from_angle(cfg.kappa);

    // surfaces LinearDependence for a degenerate preparation
    synthesize_filter(&conditional_states(&design, &g, &pi_plus))?;
    let plan = feed_forward_plan(&design, &g, cfg.kappa)?;

    let mut r = Report::default();
    r.push("tv_squared", cfg.tv_squared);
    r.push("th_squared", cfg.th_squared);
    r.push("visibility", cfg.visibility);
    r.push("omega_deg", cfg.omega.to_degrees());
    r.push("kappa_deg", cfg.kappa.to_degrees());
    r.push("scenario", cfg.scenario.to_string());
    for (branch, pi) in [(Branch::Plus, pi_plus), (Branch::Minus, pi_plus.perp())] {
        let name = match branch {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        };
        let pair = conditional_states(&design, &g, &pi);
        r.push_vector(&format!("phi0_{name}"), &pair.phi0);
        r.push_vector(&format!("phi1_{name}"), &pair.phi1);
        match plan.filter(branch) {
            Some(f) => {
                r.push(format!("N_{name}"), f.n);
                r.push(format!("success_{name}"), f.success);
                r.push(format!("lambda_{name}"), decompose_filter(f).lambda);
                r.push_matrix(&format!("G_{name}"), &f.g);
                r.push_matrix(&format!("K_{name}"), &branch_operator(&design, &g, &pi, f));
            }
            None => r.push(format!("N_{name}"), Cell::Empty),
        }
    }
    if let Some(c) = plan.correction {
        r.push_matrix("correction", &c);
    }
    r.push("p_total", plan.total_success);

    let map = cfg.transfer_map(cfg.omega, cfg.scenario)?;
    let chi = choi(&map);
    r.push("model", if cfg.is_ideal() { "ideal" } else { "imperfect" });
    r.push("success_prob", chi.trace);
    r.push("fidelity", channel_fidelity(&chi)?);
    Ok(r)
}

pub fn cmd_sweep_omega(cfg: &RunConfig) -> Result<Table, CliError> {
    let tasks: Vec<(f64, Scenario)> = omega_grid_deg()
        .into_iter()
        .flat_map(|w| Scenario::ALL.into_iter().map(move |s| (w, s)))
        .collect();
    let rows = tasks
        .par_iter()
        .map(|&(deg, s)| {
            let point = cfg
                .transfer_map(deg.to_radians(), s)
                .map(|m| choi(&m))
                .and_then(|chi| Ok((channel_fidelity(&chi)?, chi.trace)));
            let (fidelity, success, note) = match point {
                Ok((f, p)) => (f, p, String::new()),
                Err(e) => (f64::NAN, f64::NAN, e.to_string()),
            };
            vec![deg.into(), s.to_string().into(), fidelity.into(), success.into(), note.into()]
        })
        .collect();
    Ok(Table {
        columns: vec!["omega_deg", "scenario", "fidelity", "success_prob", "note"],
        rows,
    })
}

pub fn cmd_sweep_tv(cfg: &RunConfig) -> Result<Table, CliError> {
    let curve = sweep_tv(&tv_grid(cfg.tv_squared));
    let rows = curve
        .samples
        .into_iter()
        .map(|s| {
            vec![
                s.tv_squared.into(),
                s.p.into(),
                s.omega_star.map(f64::to_degrees).into(),
                s.p_tilde.into(),
                s.error.unwrap_or_default().into(),
            ]
        })
        .collect();
    Ok(Table {
        columns: vec!["T_V", "p_optimal", "omega_star_deg", "p_tilde", "note"],
        rows,
    })
}

pub fn cmd_optimize(cfg: &RunConfig) -> Result<Table, CliError> {
    let tv = cfg.tv_squared.sqrt();
    let row = |target: &str, r: crate::optimize::OptimizationResult| {
        vec![
            target.into(),
            r.best_omega.to_degrees().into(),
            r.best_kappa.to_degrees().into(),
            r.best_p.into(),
            if r.refined { "true" } else { "false" }.into(),
        ]
    };
    Ok(Table {
        columns: vec!["optimized", "omega_deg", "kappa_deg", "p", "refined"],
        rows: vec![
            row("omega", maximize_omega(tv, cfg.kappa)?),
            row("kappa", maximize_kappa(tv, cfg.omega)?),
        ],
    })
}

/// Oracle deviations per device; the caller fails when any exceeds
/// [`ORACLE_TOL`].
pub fn cmd_oracle_check(cfg: &RunConfig) -> Result<(Table, f64), CliError> {
    let convention = if cfg.flip_reflection_sign {
        ReflectionConvention::Flipped
    } else {
        ReflectionConvention::Standard
    };
    let mut grid = oracle_grid();
    let configured = PpbsPhysical::from_intensities(cfg.th_squared, cfg.tv_squared)?;
    if !grid.contains(&configured) {
        grid.push(configured);
    }
    let mut worst = 0.0f64;
    let rows = grid
        .iter()
        .map(|p| {
            let d = oracle_deviation(p, convention);
            worst = worst.max(d);
            vec![(p.t_h * p.t_h).into(), (p.t_v * p.t_v).into(), d.into()]
        })
        .collect();
    Ok((
        Table {
            columns: vec!["T_H", "T_V", "max_deviation"],
            rows,
        },
        worst,
    ))
}

fn chi_json(chi: &Complex4Matrix, trace: f64) -> Value {
    let part = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
        chi.0.iter().map(|row| row.iter().map(|z| round_sig(f(z))).collect()).collect()
    };
    json!({ "re": part(|z| z.re), "im": part(|z| z.im), "trace": round_sig(trace) })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Reconstruction plus comparison with the analytic process matrix.
pub struct TomographyRun {
    pub truth: ProcessMatrix,
    pub result: ReconstructionResult,
    pub metrics: Report,
}

/// Simulates the experiment and reconstructs `χ̂` without touching the
/// filesystem; returns the counts table when sampled.
pub fn run_tomography(cfg: &RunConfig) -> Result<(TomographyRun, Option<crate::tomography::CountsTable>), CliError> {
    let map = cfg.transfer_map(cfg.omega, cfg.scenario)?;
    let truth = choi(&map);
    let probs = exact_probabilities(&map, &ProbeSet::pauli_six(), &Basis::ALL);
    let (obs, counts) = if cfg.infinite_statistics {
        (Observations::from_probabilities(&probs, Detection::LossAware), None)
    } else {
        let counts = sample_counts(&probs, cfg.shots, cfg.seed)?;
        (Observations::from_counts(&counts, Detection::LossAware), Some(counts))
    };
    let use_mle = match cfg.estimator {
        Estimator::Auto => !cfg.infinite_statistics,
        Estimator::Linear => false,
        Estimator::Mle => true,
    };
    let result = if use_mle {
        reconstruct_mle(&obs, 5000, 1e-10)?
    } else {
        reconstruct_linear(&obs)?
    };
    let cmp = compare(&result.chi_hat, &truth)?;

    let mut m = Report::default();
    m.push("scenario", cfg.scenario.to_string());
    m.push("omega_deg", cfg.omega.to_degrees());
    m.push("estimator", format!("{:?}", result.method).to_lowercase());
    m.push("shots_per_setting", if cfg.infinite_statistics { Cell::Empty } else { (cfg.shots as f64).into() });
    m.push("seed", cfg.seed as f64);
    m.push("fidelity", cmp.fidelity);
    m.push("trace_distance", cmp.trace_distance);
    m.push("channel_fidelity", channel_fidelity(&result.chi_hat)?);
    m.push("channel_fidelity_true", channel_fidelity(&truth)?);
    m.push("success_estimated", result.chi_hat.trace);
    m.push("success_true", truth.trace);
    m.push("log_likelihood", result.diagnostics.log_likelihood);
    m.push("iterations", result.diagnostics.iterations as f64);
    m.push("converged", if result.diagnostics.converged { "true" } else { "false" });
    Ok((TomographyRun { truth, result, metrics: m }, counts))
}

pub fn cmd_tomography(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let dir = cfg
        .out
        .as_ref()
        .ok_or_else(|| CliError::Config("tomography needs --out <directory>".into()))?;
    fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?;
    let (run, counts) = run_tomography(cfg)?;
    let mut written = Vec::new();

    if let Some(counts) = counts {
        let path = dir.join("counts.csv");
        let mut bytes = Vec::new();
        counts.write_csv(&mut bytes)?;
        write_file(&path, &bytes)?;
        written.push(path);
    }
    for (name, chi) in [("chi_hat.json", &run.result.chi_hat), ("chi_true.json", &run.truth)] {
        let path = dir.join(name);
        write_file(&path, &pretty(&chi_json(&chi.chi, chi.trace))?)?;
        written.push(path);
    }
    let ext = match cfg.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let path = dir.join(format!("metrics.{ext}"));
    write_file(&path, &run.metrics.render(cfg.format)?)?;
    written.push(path);
    Ok(written)
}

fn emit(cfg: &RunConfig, bytes: &[u8]) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => write_file(path, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Runs one command and writes its output.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Output, CliError> {
    let output = match command {
        Command::Transfer => Output::Report(cmd_transfer(cfg)?),
        Command::SweepOmega => Output::Table(cmd_sweep_omega(cfg)?),
        Command::SweepTv => Output::Table(cmd_sweep_tv(cfg)?),
        Command::Optimize => Output::Table(cmd_optimize(cfg)?),
        Command::Tomography => return Ok(Output::Files(cmd_tomography(cfg)?)),
        Command::OracleCheck => {
            let (table, worst) = cmd_oracle_check(cfg)?;
            emit(cfg, &table.render(cfg.format)?)?;
            if !(worst <= ORACLE_TOL) {
                return Err(CliError::Numerical(format!(
                    "oracle deviation {worst:e} exceeds {ORACLE_TOL:e}"
                )));
            }
            return Ok(Output::Table(table));
        }
    };
    match &output {
        Output::Table(t) => emit(cfg, &t.render(cfg.format)?)?,
        Output::Report(r) => emit(cfg, &r.render(cfg.format)?)?,
        Output::Files(_) => {}
    }
    Ok(output)
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("QRL_NUM_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("QRL_NUM_THREADS = {raw:?} is not a positive integer")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Config(e.to_string()))
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = RunConfig::try_from(&cli.config)
        .and_then(|cfg| thread_pool().map(|pool| (cfg, pool)))
        .and_then(|(cfg, pool)| pool.install(|| execute(cli.command, &cfg)));
    match result {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("qrl: {e}");
            e.exit_code()
        }
    }
}
