//! Command-line front end.
//!
//! Every command writes a single CSV or JSON artifact (stdout by default).
//! Numbers are printed with 12 significant digits. CSV files start with
//! `#`-prefixed metadata lines followed by one header row.
//!
//! Exit codes: 0 success, 1 failed check (`verify`), 2 usage error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::dynamics::{self, Schedule, Stage, WidthStage};
use crate::error::{Error, Result};
use crate::graph::{self, EdgeTier, GraphSpec, VertexClass};
use crate::spectral::{self, Probe};
use crate::subspace::{self, ReducedBasis, StateVector};
use crate::theory;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Relative `--output` paths are resolved against this directory when set.
pub const OUTPUT_DIR_ENV: &str = "SIMPLEX_SEARCH_OUT_DIR";
pub const DEFAULT_SWEEP_POINTS: usize = 500;
pub const DEFAULT_SAMPLES_PER_STAGE: usize = 2000;
/// Largest `M` accepted by `verify` (N ≤ 930).
pub const VERIFY_MAX_M: usize = 30;
/// Largest `M` for which `census` enumerates the graph.
pub const CENSUS_MAX_M: usize = 200;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "simplex-search", version, about = "Quantum walk search on the weighted simplex of complete graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    /// Cluster size M (M + 1 clusters, N = M(M+1) vertices)
    #[arg(long = "M", visible_alias = "m")]
    pub m: usize,
    /// Weight of the inter-cluster edges
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub w: f64,
}

impl SpecArgs {
    fn spec(&self) -> Result<GraphSpec> {
        GraphSpec::new(self.m, self.w)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; stdout when omitted
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form predictions as a JSON object
    Predict {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Eigenstate overlaps of |s⟩, |a⟩, |b⟩ over a γ grid (CSV)
    Sweep {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, allow_negative_numbers = true)]
        hi: f64,
        #[arg(long, default_value_t = DEFAULT_SWEEP_POINTS)]
        points: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Probability time series of the two-stage search (CSV)
    Evolve {
        #[command(flatten)]
        spec: SpecArgs,
        /// Stage-1 jumping rate (default γ_c1)
        #[arg(long)]
        gamma1: Option<f64>,
        /// Stage-1 duration (default t₁)
        #[arg(long, allow_negative_numbers = true)]
        t1: Option<f64>,
        /// Stage-2 jumping rate (default γ_c2)
        #[arg(long)]
        gamma2: Option<f64>,
        /// Stage-2 duration (default t₂)
        #[arg(long, allow_negative_numbers = true)]
        t2: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_STAGE)]
        samples: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Check full-space against reduced-space dynamics (M ≤ 30)
    Verify {
        #[command(flatten)]
        spec: SpecArgs,
        /// Jumping rate (default γ_c1)
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Edge counts by vertex class and weight (CSV)
    Census {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Algebraic connectivity and adjacency norm (JSON)
    Connectivity {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Peak success probability versus offset of one critical γ (CSV)
    Width {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        stage: u8,
        #[command(flatten)]
        out: OutputArgs,
    },
}

/// Formats `x` with 12 significant digits, plain notation for moderate
/// exponents and scientific otherwise. Trailing zeros are trimmed.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..=15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Value rounded to 12 significant digits, for JSON output.
fn round12(x: f64) -> f64 {
    fmt_num(x).parse().unwrap_or(x)
}

fn csv_row(values: impl IntoIterator<Item = f64>) -> String {
    let cells: Vec<String> = values.into_iter().map(fmt_num).collect();
    cells.join(",")
}

fn preamble(command: &str, spec: &GraphSpec) -> String {
    format!(
        "# simplex-search {VERSION}\n# command={command} M={} w={}\n",
        spec.m(),
        fmt_num(spec.w())
    )
}

#[derive(Debug, Serialize)]
pub struct PredictReport {
    #[serde(rename = "M")]
    pub m: usize,
    pub w: f64,
    pub gamma_c1: f64,
    pub gamma_c2: f64,
    pub t1: f64,
    pub t2: f64,
    pub gap1: f64,
    pub gap2: f64,
    pub e_u: f64,
    pub e_v: f64,
    pub r_u: f64,
    pub r_v: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub lambda1: f64,
    pub op_norm_a: f64,
    pub validity_margin: f64,
}

pub fn predict_json(spec: &GraphSpec) -> String {
    let p = theory::predict(spec);
    let report = PredictReport {
        m: spec.m(),
        w: round12(spec.w()),
        gamma_c1: round12(p.gamma_c1),
        gamma_c2: round12(p.gamma_c2),
        t1: round12(p.t1),
        t2: round12(p.t2),
        gap1: round12(p.gap1),
        gap2: round12(p.gap2),
        e_u: round12(p.e_u),
        e_v: round12(p.e_v),
        r_u: round12(p.r_u),
        r_v: round12(p.r_v),
        e_plus: round12(p.e_plus),
        e_minus: round12(p.e_minus),
        lambda1: round12(p.lambda1),
        op_norm_a: round12(p.op_norm_a),
        validity_margin: round12(theory::validity_margin(spec)),
    };
    serde_json::to_string_pretty(&report).expect("plain numbers serialize") + "\n"
}

/// CSV header of the sweep output: `gamma`, then `x_psi{k}` for `x ∈ {s, a, b}`, `k ∈ 0..7`.
pub fn sweep_header() -> String {
    let mut cols = vec!["gamma".to_string()];
    for probe in Probe::ALL {
        for k in 0..7 {
            cols.push(format!("{}_psi{k}", probe.name()));
        }
    }
    cols.join(",")
}

pub fn sweep_csv(spec: &GraphSpec, lo: f64, hi: f64, points: usize) -> Result<String> {
    let curves = spectral::gamma_sweep(spec, (lo, hi), points)?;
    let mut out = preamble("sweep", spec);
    writeln!(out, "# lo={} hi={} points={points}", fmt_num(lo), fmt_num(hi)).unwrap();
    writeln!(out, "{}", sweep_header()).unwrap();
    for (i, &gamma) in curves[0].gammas.iter().enumerate() {
        let row = std::iter::once(gamma).chain(curves.iter().flat_map(|c| c.overlaps[i]));
        writeln!(out, "{}", csv_row(row)).unwrap();
    }
    Ok(out)
}

/// Two-stage schedule with optional overrides of the closed-form values.
pub fn evolve_schedule(
    spec: &GraphSpec,
    gamma1: Option<f64>,
    t1: Option<f64>,
    gamma2: Option<f64>,
    t2: Option<f64>,
) -> Result<Schedule> {
    let p = theory::predict(spec);
    Schedule::new(vec![
        Stage { gamma: gamma1.unwrap_or(p.gamma_c1), duration: t1.unwrap_or(p.t1) },
        Stage { gamma: gamma2.unwrap_or(p.gamma_c2), duration: t2.unwrap_or(p.t2) },
    ])
}

pub fn evolve_csv(spec: &GraphSpec, schedule: &Schedule, samples: usize) -> Result<String> {
    let series = dynamics::run_schedule(spec, schedule, samples)?;
    let mut out = preamble("evolve", spec);
    writeln!(out, "# samples_per_stage={samples}").unwrap();
    for (i, (stage, end)) in schedule.stages().iter().zip(&series.boundaries).enumerate() {
        writeln!(
            out,
            "# stage {}: gamma={} duration={} end={}",
            i + 1,
            fmt_num(stage.gamma),
            fmt_num(stage.duration),
            fmt_num(*end)
        )
        .unwrap();
    }
    writeln!(out, "t,prob_a,prob_b,norm").unwrap();
    for i in 0..series.len() {
        let row = [series.times[i], series.prob_a[i], series.prob_b[i], series.norm[i]];
        writeln!(out, "{}", csv_row(row)).unwrap();
    }
    Ok(out)
}

pub fn census_csv(spec: &GraphSpec) -> Result<String> {
    if spec.m() > CENSUS_MAX_M {
        return Err(Error::TooLarge { m: spec.m(), limit: CENSUS_MAX_M });
    }
    let classes = graph::classify_vertices(spec, graph::default_marked())?;
    let counted = graph::edge_census(spec, &classes)?;
    let formula = theory::census_formulas(spec.m())?;
    let mut out = preamble("census", spec);
    writeln!(out, "x,y,weight,count,formula").unwrap();
    for tier in [EdgeTier::Weighted, EdgeTier::Unit] {
        for (i, x) in VertexClass::ALL.iter().enumerate() {
            for y in &VertexClass::ALL[i..] {
                let (c, f) = (counted.get(*x, *y, tier), formula.get(*x, *y, tier));
                if c > 0 || f > 0 {
                    writeln!(out, "{x},{y},{tier},{c},{f}").unwrap();
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct ConnectivityReport {
    #[serde(rename = "M")]
    pub m: usize,
    pub w: f64,
    pub lambda1_numeric: Option<f64>,
    pub lambda1_closed_form: f64,
    pub normalized_connectivity: f64,
    pub op_norm_numeric: Option<f64>,
    pub op_norm_closed_form: f64,
}

pub fn connectivity_json(spec: &GraphSpec) -> Result<String> {
    let dense = spec.m() <= graph::MAX_DENSE_M;
    let lambda1 = theory::algebraic_connectivity(spec);
    let report = ConnectivityReport {
        m: spec.m(),
        w: round12(spec.w()),
        lambda1_numeric: if dense { Some(round12(graph::algebraic_connectivity(spec)?)) } else { None },
        lambda1_closed_form: round12(lambda1),
        normalized_connectivity: round12(lambda1 / spec.degree()),
        op_norm_numeric: if dense { Some(round12(graph::adjacency_norm(spec)?)) } else { None },
        op_norm_closed_form: round12(theory::adjacency_norm(spec)),
    };
    Ok(serde_json::to_string_pretty(&report).expect("plain numbers serialize") + "\n")
}

pub fn width_csv(spec: &GraphSpec, stage: WidthStage) -> Result<String> {
    let offsets = dynamics::default_offsets(spec, stage);
    let scan = dynamics::width_scan(spec, stage, &offsets)?;
    let p = theory::predict(spec);
    let gamma = if stage == WidthStage::One { p.gamma_c1 } else { p.gamma_c2 };
    let mut out = preamble("width", spec);
    writeln!(
        out,
        "# stage={} gamma_critical={} t1={} t2={}",
        stage.number(),
        fmt_num(gamma),
        fmt_num(p.t1),
        fmt_num(p.t2)
    )
    .unwrap();
    writeln!(out, "epsilon,p_peak").unwrap();
    for point in scan {
        writeln!(out, "{}", csv_row([point.epsilon, point.p_peak])).unwrap();
    }
    Ok(out)
}

/// One line of the `verify` report.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Full-space versus reduced-space checks for one `(M, w, γ)`.
pub fn verify_checks(spec: &GraphSpec, gamma: f64) -> Result<Vec<Check>> {
    if spec.m() > VERIFY_MAX_M {
        return Err(Error::TooLarge { m: spec.m(), limit: VERIFY_MAX_M });
    }
    let marked = graph::default_marked();
    let basis = ReducedBasis::new(spec, marked)?;
    let full = subspace::search_hamiltonian(spec, marked, gamma)?;
    let reduced = subspace::reduced_hamiltonian(spec, gamma)?;
    let mut checks = Vec::new();

    let invariance = reduced.max_abs_diff(&basis.restrict(&full)?);
    checks.push(Check {
        name: "invariance",
        passed: invariance <= 1e-10,
        detail: format!("max|P·H·Pᵀ − H_reduced| = {invariance:.3e} (tol 1e-10)"),
    });

    let full_prop = dynamics::Propagator::new(&full);
    let reduced_prop = dynamics::Propagator::new(&reduced);
    let s_full = subspace::full_initial_state(spec);
    let s_reduced = subspace::reduced_initial_state(spec);
    let mut agreement: f64 = 0.0;
    for t in [1.0, 10.0] {
        let a = full_prop.evolve(&s_full, t)?;
        let b = basis.lift(&reduced_prop.evolve(&s_reduced, t)?)?;
        agreement = agreement.max(a.max_abs_diff(&b)?);
    }
    checks.push(Check {
        name: "dynamics",
        passed: agreement <= 1e-8,
        detail: format!("max|ψ_full − lift(ψ_reduced)| at t ∈ {{1, 10}} = {agreement:.3e} (tol 1e-8)"),
    });

    let probe = StateVector::from_real([0.5, -0.1, 0.3, 0.2, -0.4, 0.6, 0.3]).normalized();
    let mut leakage: f64 = 0.0;
    for start in [basis.lift(&s_reduced)?, basis.lift(&probe)?] {
        for t in [1.0, 10.0, 100.0] {
            leakage = leakage.max(basis.leakage(&full_prop.evolve(&start, t)?)?);
        }
    }
    checks.push(Check {
        name: "leakage",
        passed: leakage <= 1e-8,
        detail: format!("max‖(I − PᵀP)ψ(t)‖ for t ≤ 100 = {leakage:.3e} (tol 1e-8)"),
    });

    let counted = graph::edge_census(spec, &graph::classify_vertices(spec, marked)?)?;
    let formula = theory::census_formulas(spec.m())?;
    checks.push(Check {
        name: "census",
        passed: counted == formula,
        detail: format!("{} edges counted, {} from closed forms", counted.total(), formula.total()),
    });
    Ok(checks)
}

pub fn verify_report(spec: &GraphSpec, gamma: f64, checks: &[Check]) -> String {
    let mut out = format!("verify M={} w={} gamma={}\n", spec.m(), fmt_num(spec.w()), fmt_num(gamma));
    for c in checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        writeln!(out, "[{tag}] {:<10} {}", c.name, c.detail).unwrap();
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    let verdict = if passed == checks.len() { "PASS" } else { "FAIL" };
    writeln!(out, "{verdict}, {passed}/{} checks", checks.len()).unwrap();
    out
}

fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Writes `content` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(content.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(out: &OutputArgs, content: &str, stdout: &mut dyn Write) -> std::io::Result<()> {
    match &out.output {
        Some(path) => write_atomic(&resolve_output(path), content),
        None => stdout.write_all(content.as_bytes()),
    }
}

enum Failure {
    Usage(String),
    Check,
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn warn_regime(spec: &GraphSpec, stderr: &mut dyn Write) {
    if let Some(msg) = theory::regime_warning(spec) {
        let _ = writeln!(stderr, "warning: {msg}");
    }
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> std::result::Result<(), Failure> {
    match command {
        Command::Predict { spec, out } => {
            let spec = spec.spec()?;
            warn_regime(&spec, stderr);
            emit(&out, &predict_json(&spec), stdout)?;
        }
        Command::Sweep { spec, lo, hi, points, out } => {
            let spec = spec.spec()?;
            emit(&out, &sweep_csv(&spec, lo, hi, points)?, stdout)?;
        }
        Command::Evolve { spec, gamma1, t1, gamma2, t2, samples, out } => {
            let spec = spec.spec()?;
            warn_regime(&spec, stderr);
            let schedule = evolve_schedule(&spec, gamma1, t1, gamma2, t2)?;
            emit(&out, &evolve_csv(&spec, &schedule, samples)?, stdout)?;
        }
        Command::Verify { spec, gamma } => {
            let spec = spec.spec()?;
            if spec.m() > VERIFY_MAX_M {
                return Err(Failure::Usage(format!(
                    "verify builds the full {}-dimensional Hamiltonian; M must be ≤ {VERIFY_MAX_M}",
                    spec.n()
                )));
            }
            let gamma = gamma.unwrap_or_else(|| theory::gamma_c1(&spec));
            let checks = verify_checks(&spec, gamma)?;
            stdout.write_all(verify_report(&spec, gamma, &checks).as_bytes())?;
            if !checks.iter().all(|c| c.passed) {
                return Err(Failure::Check);
            }
        }
        Command::Census { spec, out } => {
            let spec = spec.spec()?;
            emit(&out, &census_csv(&spec)?, stdout)?;
        }
        Command::Connectivity { spec, out } => {
            let spec = spec.spec()?;
            emit(&out, &connectivity_json(&spec)?, stdout)?;
        }
        Command::Width { spec, stage, out } => {
            let spec = spec.spec()?;
            warn_regime(&spec, stderr);
            emit(&out, &width_csv(&spec, WidthStage::from_number(stage)?)?, stdout)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
            } else {
                let _ = stdout.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Check) => EXIT_CHECK_FAILED,
        Err(Failure::Io(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_CHECK_FAILED
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(0.002), "0.002");
        assert_eq!(fmt_num(1000.0), "1000");
        assert_eq!(fmt_num(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_num(24836.470973470863), "24836.4709735");
        assert_eq!(fmt_num(-1.0 / 3.0), "-0.333333333333");
        assert_eq!(fmt_num(1.2649110640673518e-4), "0.000126491106407");
        assert_eq!(fmt_num(3.1622776601683795e-8), "3.16227766017e-8");
        assert_eq!(fmt_num(6.02e23), "6.02e23");
    }

    #[test]
    fn sweep_header_has_22_columns() {
        assert_eq!(sweep_header().split(',').count(), 22);
        assert!(sweep_header().starts_with("gamma,s_psi0"));
    }
}
