//! `trisect`: run one experiment on a hyperelliptic Jacobian and print a
//! single JSON report.
//!
//! Exit status: 0 when every certificate passes, 1 when a certificate
//! fails, 2 for invalid input (including unknown flags), 3 for numerical
//! failure.

mod commands;
mod input;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use trisect_core::context::Tolerances;
use trisect_core::curve::{DEFAULT_AJ_TOL, DEFAULT_PERIOD_TOL};
use trisect_core::geometry::DEFAULT_ON_THETA_TOL;
use trisect_core::numeric::DEFAULT_RANK_TOL;
use trisect_core::selftest::DEFAULT_SEED;
use trisect_core::theta::DEFAULT_THETA_TOL;
use trisect_core::{Error, Result};

use commands::Run;
use input::{CurveArgs, MatrixArgs};
use report::Report;

#[derive(Parser, Debug)]
#[command(name = "trisect", version, about = "Trisecants and multisecants of theta divisors of hyperelliptic Jacobians")]
struct Cli {
    #[command(flatten)]
    settings: Settings,
    #[command(subcommand)]
    command: Command,
}

/// Seed and tolerances shared by every subcommand; all are recorded in the report.
#[derive(Args, Debug, Clone)]
pub struct Settings {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Relative singular-value threshold for rank decisions.
    #[arg(long, global = true, default_value_t = DEFAULT_RANK_TOL)]
    pub rank_tol: f64,
    /// Tail bound for theta series.
    #[arg(long, global = true, default_value_t = DEFAULT_THETA_TOL)]
    pub theta_tol: f64,
    /// Relative theta residual below which a point counts as on the divisor.
    #[arg(long, global = true, default_value_t = DEFAULT_ON_THETA_TOL)]
    pub on_theta_tol: f64,
    /// Accuracy target for Abel-Jacobi integrals.
    #[arg(long, global = true, default_value_t = DEFAULT_AJ_TOL)]
    pub aj_tol: f64,
    /// Accuracy target for period integrals.
    #[arg(long, global = true, default_value_t = DEFAULT_PERIOD_TOL)]
    pub period_tol: f64,
    /// Bound for residual certificates: hyperplanes, halving, combinations, angles.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub residual_tol: f64,
    /// Lattice distance below which two points are identified.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub distinct_tol: f64,
    /// Add per-stage milliseconds; reports are then no longer reproducible byte for byte.
    #[arg(long, global = true)]
    pub timings: bool,
}

impl Settings {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rank: self.rank_tol,
            theta: self.theta_tol,
            on_theta: self.on_theta_tol,
            abel_jacobi: self.aj_tol,
            periods: self.period_tol,
        }
    }

    fn validate(&self) -> Result<()> {
        let all = [
            ("rank-tol", self.rank_tol),
            ("theta-tol", self.theta_tol),
            ("on-theta-tol", self.on_theta_tol),
            ("aj-tol", self.aj_tol),
            ("period-tol", self.period_tol),
            ("residual-tol", self.residual_tol),
            ("distinct-tol", self.distinct_tol),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidInput(format!("--{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }

    fn record(&self) -> serde_json::Value {
        json!({
            "rank": self.rank_tol,
            "theta": self.theta_tol,
            "on_theta": self.on_theta_tol,
            "abel_jacobi": self.aj_tol,
            "periods": self.period_tol,
            "residual": self.residual_tol,
            "distinct": self.distinct_tol,
        })
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Period matrices and the normalized Riemann matrix of a curve.
    Periods(CurveArgs),
    /// A theta function with characteristic, its gradient and Hessian.
    Theta(ThetaArgs),
    /// Fay's trisecant from four random points of the curve.
    Fay(FayArgs),
    /// A trisecant of the theta divisor from a random canonical divisor.
    Trisecant(TrisecantArgs),
    /// Multisecants: Gunning's construction or the partitions of a canonical divisor.
    Multisecant(MultisecantArgs),
    /// The Gauss fibre over a labelled canonical divisor.
    Fiber(FiberArgs),
    /// Dimension of the second-order theta functions vanishing to order four at the origin.
    #[command(name = "gamma00-dim")]
    Gamma00Dim(MatrixArgs),
    /// The order-four criterion on a constructed trisecant and on generic controls.
    #[command(name = "gamma00-trisecant")]
    Gamma00Trisecant(ControlArgs),
    /// Spans of the Gauss fibre over a canonical divisor against the order-four sections.
    Span(SpanArgs),
    /// Run the acceptance criteria on the reference curves.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
pub struct ThetaArgs {
    #[command(flatten)]
    pub source: MatrixArgs,
    /// Point as a JSON array of [re, im] pairs; the origin when omitted.
    #[arg(long)]
    pub z: Option<String>,
    /// Characteristic as bits of eps' and eps'', e.g. 10/11; zero when omitted.
    #[arg(long = "char", value_name = "BITS/BITS")]
    pub characteristic: Option<String>,
}

#[derive(Args, Debug)]
pub struct FayArgs {
    #[command(flatten)]
    pub source: CurveArgs,
    /// Random triples that are not trisecants, expected at full rank.
    #[arg(long, default_value_t = 0)]
    pub controls: usize,
}

#[derive(Args, Debug)]
pub struct TrisecantArgs {
    #[command(flatten)]
    pub source: CurveArgs,
    /// Use the degenerate construction, where two of the points merge.
    #[arg(long)]
    pub degenerate: bool,
}

#[derive(Args, Debug)]
pub struct MultisecantArgs {
    #[command(flatten)]
    pub source: CurveArgs,
    /// Number of points on the secant plane.
    #[arg(long)]
    pub ell: usize,
    /// Gunning's construction from random points instead of a canonical divisor.
    #[arg(long)]
    pub gunning: bool,
    /// Indices of the simple points taken as p's; every partition when omitted.
    #[arg(long, conflicts_with = "gunning")]
    pub partition: Option<String>,
}

#[derive(Args, Debug)]
pub struct FiberArgs {
    /// Canonical divisor such as '4P0' or 'P+P'+2W1'.
    #[arg(long)]
    pub k0: String,
    #[arg(long)]
    pub genus: usize,
}

#[derive(Args, Debug)]
pub struct ControlArgs {
    #[command(flatten)]
    pub source: CurveArgs,
    /// Generic triples on the theta divisor, expected to miss the order-four sections.
    #[arg(long, default_value_t = 3)]
    pub controls: usize,
}

#[derive(Args, Debug)]
pub struct SpanArgs {
    #[command(flatten)]
    pub source: CurveArgs,
    #[arg(long)]
    pub ell: usize,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Criteria to run, by name; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Periods(_) => "periods",
            Command::Theta(_) => "theta",
            Command::Fay(_) => "fay",
            Command::Trisecant(_) => "trisecant",
            Command::Multisecant(_) => "multisecant",
            Command::Fiber(_) => "fiber",
            Command::Gamma00Dim(_) => "gamma00-dim",
            Command::Gamma00Trisecant(_) => "gamma00-trisecant",
            Command::Span(_) => "span",
            Command::Selftest(_) => "selftest",
        }
    }

    fn run(&self, run: &mut Run) -> Result<report::Outcome> {
        match self {
            Command::Periods(a) => commands::periods(run, a),
            Command::Theta(a) => commands::theta(run, a),
            Command::Fay(a) => commands::fay(run, a),
            Command::Trisecant(a) => commands::trisecant(run, a),
            Command::Multisecant(a) => commands::multisecant(run, a),
            Command::Fiber(a) => commands::fiber(run, a),
            Command::Gamma00Dim(a) => commands::gamma00_dim(run, a),
            Command::Gamma00Trisecant(a) => commands::gamma00_trisecant(run, a),
            Command::Span(a) => commands::span(run, a),
            Command::Selftest(a) => commands::selftest(run, a),
        }
    }
}

fn exit_code(report: &Report, error: Option<&Error>) -> u8 {
    match error {
        Some(e) if e.is_input_error() => 2,
        Some(_) => 3,
        None if report.pass => 0,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let mut run = Run::new(&cli.settings);
    let outcome = cli.settings.validate().and_then(|()| cli.command.run(&mut run));
    let error = outcome.as_ref().err().cloned();
    let (inputs, timings) = run.finish(name);
    let mut report = Report::new(name, inputs, cli.settings.seed, cli.settings.record(), outcome);
    if cli.settings.timings {
        report = report.with_timings(timings);
    }
    let code = exit_code(&report, error.as_ref());
    let text = serde_json::to_string_pretty(&report).expect("reports serialize");
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{text}").is_err() {
        return ExitCode::from(3);
    }
    ExitCode::from(code)
}
