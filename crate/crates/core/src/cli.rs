//! The `mveq` command-line front end.
//!
//! Exit codes: 0 success, 1 parse or I/O error (including bad arguments),
//! 2 validation error, 3 a solve command proved that no equilibrium exists.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{self, CsvRow, ScenarioInput};
use crate::linear_mv::{self, FrontierData, FrontierPoint, MvEquilibriumReport};
use crate::mvh::MvhMarket;
use crate::process::AdaptedProcess;
use crate::quadratic::{self, Construction, EquilibriumReport, NecessaryConditions, QuadraticOutcome};
use crate::scenario::{PreferenceKind, Scenario};
use crate::suite::{self, SuiteConfig, SuiteKind, SuiteReport};
use crate::Tolerances;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NONEXISTENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mveq", version, about = "Quadratic and mean-variance equilibria on finite filtration trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Report destination; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Absolute tolerance for zero tests.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Relative eigenvalue cut-off of the least-squares solver.
    #[arg(long)]
    pub rank_tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteChoice {
    Quadratic,
    LinearMv,
    Mvh,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct and verify the quadratic-utility equilibrium.
    SolveQuadratic(InputArgs),
    /// Solve the linear mean-variance equilibrium.
    SolveLinearMv(InputArgs),
    /// Verify the price system given in the scenario's `prices` block.
    Verify(InputArgs),
    /// Efficient frontiers of every agent at the given or equilibrium prices.
    Frontier {
        #[command(flatten)]
        args: InputArgs,
        /// Number of sampled frontier points per agent.
        #[arg(long, default_value_t = 11)]
        points: usize,
        /// Largest investment level y sampled; defaults to twice the largest optimal y.
        #[arg(long)]
        y_max: Option<f64>,
    },
    /// Necessary conditions for existence on the nodes where Z̄ vanishes.
    CheckConditions(InputArgs),
    /// Seeded invariant suites over random scenarios.
    RandomSuite {
        /// Accepted for interface uniformity; random suites read no scenario.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteChoice,
        /// Scenarios per suite (default 200, 500 for the MVH suite).
        #[arg(long)]
        count: Option<usize>,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_PARSE
            } else {
                EXIT_OK
            }
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error: structural problems are 1, everything else 2.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::InvalidTree(_) | Error::Dimension(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_PARSE,
        _ => EXIT_VALIDATION,
    }
}

fn tolerances(c: &Common) -> Result<Tolerances> {
    let mut t = Tolerances::default();
    if let Some(tol) = c.tol {
        t.tol = tol;
    }
    if let Some(rank) = c.rank_tol {
        t.rank = rank;
    }
    if !(t.tol > 0.0 && t.rank > 0.0) {
        return Err(Error::Bounds("tolerances must be positive".into()));
    }
    Ok(t)
}

/// Reads and validates the scenario named by `args`.
fn load(args: &InputArgs) -> Result<(ScenarioInput, Tolerances)> {
    let tol = tolerances(&args.common)?;
    let input = io::read_scenario(&args.input)?;
    let report = input.scenario.validate(&tol);
    if !report.is_valid() {
        return Err(Error::Precondition(format!("invalid scenario: {}", report.violations.join("; "))));
    }
    Ok((input, tol))
}

fn emit<T: Serialize>(common: &Common, report: &T, rows: impl FnOnce() -> Vec<CsvRow>) -> Result<()> {
    let mut text = match common.format {
        Format::Json => serde_json::to_string_pretty(report)?,
        Format::Csv => io::csv_string(&rows())?,
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &common.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::SolveQuadratic(args) => solve_quadratic(&args),
        Command::SolveLinearMv(args) => solve_linear_mv(&args),
        Command::Verify(args) => verify(&args),
        Command::Frontier { args, points, y_max } => frontier(&args, points, y_max),
        Command::CheckConditions(args) => check_conditions(&args),
        Command::RandomSuite {
            common, seed, suite, count, ..
        } => random_suite(&common, seed, suite, count),
    }
}

/// Output of `solve-quadratic`.
#[derive(Debug, Serialize)]
pub struct QuadraticSolveOutput {
    pub verdict: &'static str,
    pub reason: Option<String>,
    pub construction: Option<Construction>,
    /// Time-0 prices of all assets.
    pub s0: Option<Vec<f64>>,
    pub report: Option<EquilibriumReport>,
    pub conditions: Option<NecessaryConditions>,
}

fn equilibrium_rows(s: &Scenario, report: &EquilibriumReport) -> Vec<CsvRow> {
    let mut rows = io::adapted_rows("price", &s.tree, &report.prices);
    rows.extend(io::adapted_rows("z_bar", &s.tree, &report.z_bar));
    for (k, strategy) in report.agent_strategies.iter().enumerate() {
        rows.extend(io::predictable_rows(&format!("strategy_{k}"), &s.tree, strategy));
    }
    for (k, a) in report.agents.iter().enumerate() {
        rows.push(CsvRow::scalar(format!("optimality_gap_{k}"), a.optimality_gap));
    }
    rows.push(CsvRow::scalar("clearing_residual", report.clearing_residual));
    rows.push(CsvRow::scalar("martingale_residual", report.martingale_residual));
    rows.push(CsvRow::scalar("primitives_residual", report.primitives_residual));
    rows.push(CsvRow::scalar("representative_residual", report.representative.residual));
    rows.push(CsvRow::scalar("equilibrium", if report.verdict.is_equilibrium() { 1.0 } else { 0.0 }));
    rows
}

fn condition_rows(c: &NecessaryConditions) -> Vec<CsvRow> {
    let row = |q: &str, e: &quadratic::ConditionEntry| CsvRow {
        quantity: q.to_string(),
        time: Some(e.time),
        node: None,
        asset: Some(e.asset),
        value: e.worst,
    };
    c.cond_xi
        .iter()
        .map(|e| row("cond_xi", e))
        .chain(c.cond_g.iter().map(|e| row("cond_g", e)))
        .collect()
}

fn solve_quadratic(args: &InputArgs) -> Result<i32> {
    let (input, tol) = load(args)?;
    let s = &input.scenario;
    match quadratic::solve_quadratic(s, &tol)? {
        QuadraticOutcome::Constructed { construction, report } => {
            let out = QuadraticSolveOutput {
                verdict: report.verdict.label(),
                reason: report.verdict.reason().map(str::to_string),
                construction: Some(construction),
                s0: Some(report.prices.at(0).to_vec()),
                report: Some(*report),
                conditions: None,
            };
            emit(&args.common, &out, || equilibrium_rows(s, out.report.as_ref().expect("constructed")))?;
            Ok(EXIT_OK)
        }
        QuadraticOutcome::NonexistenceProven { reason, conditions } => {
            let out = QuadraticSolveOutput {
                verdict: "NonexistenceProven",
                reason: Some(reason),
                construction: None,
                s0: None,
                report: None,
                conditions: Some(conditions),
            };
            emit(&args.common, &out, || condition_rows(out.conditions.as_ref().expect("present")))?;
            Ok(EXIT_NONEXISTENCE)
        }
    }
}

fn solve_linear_mv(args: &InputArgs) -> Result<i32> {
    let (input, tol) = load(args)?;
    let s = &input.scenario;
    let report = linear_mv::solve_linear_mv(s, &tol)?;
    emit(&args.common, &report, || mv_rows(s, &report))?;
    Ok(if report.exists { EXIT_OK } else { EXIT_NONEXISTENCE })
}

fn mv_rows(s: &Scenario, report: &MvEquilibriumReport) -> Vec<CsvRow> {
    let mut rows = vec![
        CsvRow::scalar("gamma_bar", report.gamma_bar),
        CsvRow::scalar("gamma_bar_0", report.gamma_bar_0),
        CsvRow::scalar("exists", if report.exists { 1.0 } else { 0.0 }),
    ];
    if let Some(p) = &report.prices {
        rows.extend(io::adapted_rows("price", &s.tree, p));
    }
    if let Some(ell) = report.ell {
        rows.push(CsvRow::scalar("ell", ell));
    }
    for (k, a) in report.agents.iter().enumerate() {
        rows.push(CsvRow::scalar(format!("c_{k}"), a.c));
        rows.push(CsvRow::scalar(format!("eps2_{k}"), a.eps2));
        rows.push(CsvRow::scalar(format!("y_{k}"), a.y));
        rows.extend(io::predictable_rows(&format!("strategy_{k}"), &s.tree, &a.strategy));
    }
    if let Some(fp) = &report.fixed_point {
        rows.push(CsvRow::scalar("fp_residual", fp.fp_residual));
        rows.push(CsvRow::scalar("identity_residual", fp.identity_residual));
        rows.push(CsvRow::scalar("opportunity_l0", fp.opportunity_l0));
    }
    if let Some(c) = report.clearing_residual {
        rows.push(CsvRow::scalar("clearing_residual", c));
    }
    rows
}

/// Output of `verify`.
#[derive(Debug, Serialize)]
pub struct VerifyOutput {
    pub verdict: &'static str,
    pub reason: Option<String>,
    pub report: EquilibriumReport,
}

fn verify(args: &InputArgs) -> Result<i32> {
    let (input, tol) = load(args)?;
    let s = &input.scenario;
    let prices = input
        .prices
        .ok_or_else(|| Error::Parse("verify needs a `prices` block in the scenario file".into()))?;
    let report = quadratic::verify_equilibrium(s, &prices, &tol)?;
    let out = VerifyOutput {
        verdict: report.verdict.label(),
        reason: report.verdict.reason().map(str::to_string),
        report,
    };
    emit(&args.common, &out, || equilibrium_rows(s, &out.report))?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
pub struct AgentFrontier {
    pub agent: usize,
    #[serde(flatten)]
    pub data: FrontierData,
    /// Optimal investment level λ_k/ℓ for mean–variance agents.
    pub y_optimal: Option<f64>,
    pub points: Vec<FrontierPoint>,
}

/// Output of `frontier`.
#[derive(Debug, Serialize)]
pub struct FrontierOutput {
    /// Whether the prices came from the scenario file rather than the equilibrium construction.
    pub supplied_prices: bool,
    pub prices: AdaptedProcess,
    pub agents: Vec<AgentFrontier>,
}

fn frontier(args: &InputArgs, points: usize, y_max: Option<f64>) -> Result<i32> {
    let (input, tol) = load(args)?;
    let s = &input.scenario;
    let kind = s.preference_kind()?;
    let supplied_prices = input.prices.is_some();
    let prices = match (input.prices, kind) {
        (Some(p), _) => p,
        (None, PreferenceKind::Quadratic) => quadratic::construct_regular(s, &tol)?,
        (None, PreferenceKind::LinearMv) => {
            let report = linear_mv::solve_linear_mv(s, &tol)?;
            match report.prices {
                Some(p) => p,
                None => {
                    eprintln!("error: {}", report.note.unwrap_or_default());
                    return Ok(EXIT_NONEXISTENCE);
                }
            }
        }
    };
    let market = MvhMarket::new(&s.tree, &prices, tol);
    let mut agents = Vec::with_capacity(s.agents.len());
    for k in 0..s.agents.len() {
        let data = linear_mv::frontier_in(s, &market, k)?;
        let y_optimal = match s.agents[k].preference {
            crate::Preference::LinearMv { lambda } => Some(lambda / data.ell),
            crate::Preference::Quadratic { gamma } => Some(gamma - data.c),
        };
        agents.push((k, data, y_optimal));
    }
    let y_top = y_max.unwrap_or_else(|| {
        let m = agents.iter().filter_map(|a| a.2).fold(0.0, f64::max);
        if m > 0.0 {
            2.0 * m
        } else {
            1.0
        }
    });
    let out = FrontierOutput {
        supplied_prices,
        prices,
        agents: agents
            .into_iter()
            .map(|(agent, data, y_optimal)| AgentFrontier {
                agent,
                data,
                y_optimal,
                points: data.sample(y_top, points),
            })
            .collect(),
    };
    emit(&args.common, &out, || {
        let mut rows = Vec::new();
        for a in &out.agents {
            rows.push(CsvRow::scalar(format!("ell_{}", a.agent), a.data.ell));
            rows.push(CsvRow::scalar(format!("c_{}", a.agent), a.data.c));
            rows.push(CsvRow::scalar(format!("eps2_{}", a.agent), a.data.eps2));
            for p in &a.points {
                rows.push(CsvRow::scalar(format!("frontier_{}_y", a.agent), p.y));
                rows.push(CsvRow::scalar(format!("frontier_{}_mean", a.agent), p.mean));
                rows.push(CsvRow::scalar(format!("frontier_{}_std_dev", a.agent), p.std_dev));
            }
        }
        rows
    })?;
    Ok(EXIT_OK)
}

/// Output of `check-conditions`.
#[derive(Debug, Serialize)]
pub struct ConditionsOutput {
    pub pass: bool,
    pub density_vanishes: bool,
    pub first_failure: Option<String>,
    pub conditions: NecessaryConditions,
}

fn check_conditions(args: &InputArgs) -> Result<i32> {
    let (input, tol) = load(args)?;
    let conditions = quadratic::check_necessary_conditions(&input.scenario, &tol)?;
    let out = ConditionsOutput {
        pass: conditions.pass(),
        density_vanishes: conditions.density_vanishes(),
        first_failure: conditions.first_failure(),
        conditions,
    };
    emit(&args.common, &out, || condition_rows(&out.conditions))?;
    Ok(EXIT_OK)
}

fn random_suite(common: &Common, seed: u64, choice: SuiteChoice, count: Option<usize>) -> Result<i32> {
    tolerances(common)?;
    let kinds: Vec<SuiteKind> = match choice {
        SuiteChoice::Quadratic => vec![SuiteKind::Quadratic],
        SuiteChoice::LinearMv => vec![SuiteKind::LinearMv],
        SuiteChoice::Mvh => vec![SuiteKind::Mvh],
        SuiteChoice::All => vec![SuiteKind::Quadratic, SuiteKind::LinearMv, SuiteKind::Mvh],
    };
    let reports: Vec<SuiteReport> = kinds
        .into_iter()
        .map(|kind| {
            let mut cfg = match kind {
                SuiteKind::Mvh => suite::mvh_config(seed),
                _ => SuiteConfig {
                    seed,
                    ..SuiteConfig::default()
                },
            };
            if let Some(n) = count {
                cfg.count = n;
            }
            suite::run(kind, &cfg)
        })
        .collect();
    for r in &reports {
        eprintln!(
            "{}: {} instances, {} checks passed, {} failed",
            r.suite,
            r.instances,
            r.total_passed(),
            r.total_failed()
        );
    }
    emit(common, &reports, || {
        let mut rows = Vec::new();
        for r in &reports {
            for c in &r.checks {
                rows.push(CsvRow::scalar(format!("{}.{}.passed", r.suite, c.name), c.passed as f64));
                rows.push(CsvRow::scalar(format!("{}.{}.failed", r.suite, c.name), c.failed as f64));
                rows.push(CsvRow::scalar(format!("{}.{}.worst", r.suite, c.name), c.worst));
            }
        }
        rows
    })?;
    Ok(EXIT_OK)
}
