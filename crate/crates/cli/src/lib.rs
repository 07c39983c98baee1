//! Commands behind the `wecp` binary.
//!
//! Every floating-point value that leaves the process is first rounded to
//! 12 significant digits ([`sig12`]) and then printed in shortest
//! round-trip form, so identical invocations produce byte-identical output.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use wstate_ecp::analytics::{f_grid, sweep_curve, theoretical_limit, total_success};
use wstate_ecp::ecp::{acceptance_grid, iterate, verify_grid, VerificationReport};
use wstate_ecp::mc::estimate;
use wstate_ecp::{ClosedForms, Coefficient, Parity, PcdModel, WClassParams};

/// Environment variable naming the directory reports go to when `--output` is absent.
pub const OUTPUT_DIR_ENV: &str = "WECP_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] wstate_ecp::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("json encoding failed: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Parser)]
#[command(name = "wecp", version, about = "W-state entanglement concentration: exact runs, sweeps, sampling, self-verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact state-vector run of the protocol for a fixed α².
    Exact(ExactArgs),
    /// P(n) against F = N·α², one row per (F, n).
    Sweep(SweepArgs),
    /// Monte Carlo estimate of P(n).
    Sample(SampleArgs),
    /// Cross-check the state-vector engine against the closed forms.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; defaults to $WECP_OUTPUT_DIR/<command>.<ext>, else stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PcdArgs {
    /// Cross-Kerr coupling strength χ.
    #[arg(long, default_value_t = 1.0)]
    pub chi: f64,
    /// Interaction time t; the probe phase is θ = χt.
    #[arg(long, default_value_t = 0.1)]
    pub interaction_time: f64,
}

impl PcdArgs {
    fn model(&self) -> Result<PcdModel, CliError> {
        Ok(PcdModel::new(self.chi, self.interaction_time)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ExactArgs {
    /// α², strictly between 0 and 1; β² is derived as (1 − α²)/(N − 1).
    #[arg(long, allow_negative_numbers = true)]
    pub alpha2: f64,
    #[arg(long, default_value_t = 3)]
    pub n_photons: usize,
    #[arg(long, default_value_t = 5)]
    pub rounds: usize,
    #[command(flatten)]
    pub pcd: PcdArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 0.05)]
    pub f_start: f64,
    #[arg(long, default_value_t = 1.0)]
    pub f_end: f64,
    #[arg(long, default_value_t = 0.05)]
    pub f_step: f64,
    #[arg(long, default_value_t = 5)]
    pub rounds: usize,
    #[arg(long, default_value_t = 3)]
    pub n_photons: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha2: f64,
    #[arg(long, default_value_t = 3)]
    pub n_photons: usize,
    #[arg(long, default_value_t = 5)]
    pub rounds: usize,
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PerturbTarget {
    EvenPrefactor,
    OddWeight,
    RecycleWeight,
    SeriesPrefactor,
}

impl From<PerturbTarget> for Coefficient {
    fn from(t: PerturbTarget) -> Self {
        match t {
            PerturbTarget::EvenPrefactor => Coefficient::EvenPrefactor,
            PerturbTarget::OddWeight => Coefficient::OddWeight,
            PerturbTarget::RecycleWeight => Coefficient::RecycleWeight,
            PerturbTarget::SeriesPrefactor => Coefficient::SeriesPrefactor,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Rounds compared between the run tree and the closed-form series.
    #[arg(long, default_value_t = 6)]
    pub rounds: usize,
    #[command(flatten)]
    pub pcd: PcdArgs,
    /// Negative control: shift one closed-form coefficient before comparing.
    #[arg(long, value_enum, hide = true)]
    pub perturb: Option<PerturbTarget>,
    #[arg(long, default_value_t = 1e-6, hide = true)]
    pub perturb_by: f64,
    #[arg(long)]
    pub json: bool,
}

/// Rounds to 12 significant digits. Non-finite values pass through.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn fmt_num(x: f64) -> String {
    let x = sig12(x);
    if x.is_finite() {
        format!("{x}")
    } else {
        String::from("nan")
    }
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then(|| sig12(x))
}

fn params_from_alpha2(alpha2: f64, n_photons: usize) -> Result<WClassParams, CliError> {
    if !(alpha2 > 0.0 && alpha2 < 1.0) {
        return Err(CliError::Usage(format!(
            "--alpha2 must lie strictly between 0 and 1, got {alpha2}"
        )));
    }
    if n_photons < 2 {
        return Err(CliError::Usage(format!("--n-photons must be at least 2, got {n_photons}")));
    }
    WClassParams::from_alpha2(alpha2, n_photons).map_err(|e| CliError::Usage(e.to_string()))
}

fn check_rounds(rounds: usize) -> Result<(), CliError> {
    if rounds < 1 {
        return Err(CliError::Usage("--rounds must be at least 1".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct PcdReport {
    pub chi: f64,
    pub interaction_time: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactRound {
    pub round: usize,
    pub p_even: f64,
    pub p_odd: f64,
    pub alpha2_next: f64,
    pub beta2_next: f64,
    /// Probability of first succeeding in this round.
    pub success: f64,
    pub cumulative: f64,
    pub success_fidelity: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactReport {
    pub n_photons: usize,
    pub alpha2: f64,
    pub beta2: f64,
    pub rounds: Vec<ExactRound>,
    pub cumulative: f64,
    /// `N·α²`, absent when `α² > β²`.
    pub limit: Option<f64>,
    /// Worst fidelity of any produced success state with the standard W state.
    pub success_fidelity: Option<f64>,
    pub pcd: PcdReport,
    pub messages: Vec<wstate_ecp::ecp::MessageRecord>,
}

pub fn cmd_exact(args: &ExactArgs) -> Result<ExactReport, CliError> {
    let params = params_from_alpha2(args.alpha2, args.n_photons)?;
    check_rounds(args.rounds)?;
    let pcd = args.pcd.model()?;
    let tree = iterate(&params, args.rounds, &pcd)?;

    let mut cumulative = 0.0;
    let rounds = tree
        .rounds
        .iter()
        .zip(&tree.per_round_success)
        .enumerate()
        .map(|(i, (round, &success))| {
            cumulative += success;
            ExactRound {
                round: i + 1,
                p_even: sig12(round.p_even),
                p_odd: sig12(round.p_odd),
                alpha2_next: sig12(round.recycle_params.alpha2()),
                beta2_next: sig12(round.recycle_params.beta2()),
                success: sig12(success),
                cumulative: sig12(cumulative),
                success_fidelity: round.min_fidelity(Parity::Even).map(sig12),
            }
        })
        .collect::<Vec<_>>();
    let success_fidelity = rounds
        .iter()
        .filter_map(|r| r.success_fidelity)
        .reduce(f64::min);

    Ok(ExactReport {
        n_photons: params.n_photons(),
        alpha2: sig12(params.alpha2()),
        beta2: sig12(params.beta2()),
        cumulative: sig12(tree.cumulative),
        limit: theoretical_limit(&params).map(sig12),
        success_fidelity,
        rounds,
        pcd: PcdReport {
            chi: pcd.chi(),
            interaction_time: pcd.interaction_time(),
            theta: sig12(pcd.theta()),
        },
        messages: tree.message_log.records().to_vec(),
    })
}

impl ExactReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,p_even,p_odd,alpha2_next,beta2_next,success,cumulative\n");
        for r in &self.rounds {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.round,
                fmt_num(r.p_even),
                fmt_num(r.p_odd),
                fmt_num(r.alpha2_next),
                fmt_num(r.beta2_next),
                fmt_num(r.success),
                fmt_num(r.cumulative)
            );
        }
        out
    }
}

pub const SWEEP_HEADER: &str = "F,alpha2,n,P,limit";

pub fn cmd_sweep(args: &SweepArgs) -> Result<wstate_ecp::SweepTable, CliError> {
    check_rounds(args.rounds)?;
    if args.n_photons < 2 {
        return Err(CliError::Usage(format!("--n-photons must be at least 2, got {}", args.n_photons)));
    }
    let grid = f_grid(args.f_start, args.f_end, args.f_step)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    sweep_curve(&grid, args.rounds, args.n_photons).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn sweep_csv(table: &wstate_ecp::SweepTable) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_num(r.f),
            fmt_num(r.alpha2),
            r.n,
            fmt_num(r.p),
            fmt_num(r.limit)
        );
    }
    out
}

fn sweep_json(table: &wstate_ecp::SweepTable) -> Result<String, CliError> {
    let mut rounded = table.clone();
    for r in &mut rounded.rows {
        r.f = sig12(r.f);
        r.alpha2 = sig12(r.alpha2);
        r.p = sig12(r.p);
        r.limit = sig12(r.limit);
    }
    Ok(serde_json::to_string_pretty(&rounded)? + "\n")
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRound {
    pub n: usize,
    pub p_hat: f64,
    pub std_err: f64,
    pub exact: f64,
    /// `(P̂ − P)/√(P(1 − P)/shots)`; absent when `P ∈ {0, 1}`.
    pub z: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleReport {
    pub n_photons: usize,
    pub alpha2: f64,
    pub beta2: f64,
    pub shots: u64,
    pub seed: u64,
    pub successes_per_round: Vec<u64>,
    pub exhausted: u64,
    pub rounds: Vec<SampleRound>,
}

pub fn cmd_sample(args: &SampleArgs) -> Result<SampleReport, CliError> {
    let params = params_from_alpha2(args.alpha2, args.n_photons)?;
    check_rounds(args.rounds)?;
    if args.shots < 1 {
        return Err(CliError::Usage("--shots must be at least 1".into()));
    }
    let stats = estimate(&params, args.rounds, args.shots, args.seed)?;
    let rounds = (1..=args.rounds)
        .map(|n| {
            let exact = total_success(&params, n)?;
            let p_hat = stats.p_hat(n);
            let se = (exact * (1.0 - exact) / args.shots as f64).sqrt();
            Ok(SampleRound {
                n,
                p_hat: sig12(p_hat),
                std_err: sig12(stats.std_err(n)),
                exact: sig12(exact),
                z: finite_or_none((p_hat - exact) / se),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(SampleReport {
        n_photons: params.n_photons(),
        alpha2: sig12(params.alpha2()),
        beta2: sig12(params.beta2()),
        shots: stats.shots,
        seed: args.seed,
        successes_per_round: stats.successes_per_round,
        exhausted: stats.exhausted,
        rounds,
    })
}

impl SampleReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,p_hat,std_err,exact,z\n");
        for r in &self.rounds {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.n,
                fmt_num(r.p_hat),
                fmt_num(r.std_err),
                fmt_num(r.exact),
                r.z.map_or_else(|| "nan".to_string(), fmt_num)
            );
        }
        out
    }
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<VerificationReport, CliError> {
    check_rounds(args.rounds)?;
    let forms = match args.perturb {
        Some(target) => ClosedForms::perturbed(target.into(), args.perturb_by),
        None => ClosedForms::EXACT,
    };
    Ok(verify_grid(&acceptance_grid(), args.rounds, &args.pcd.model()?, &forms)?)
}

pub fn verify_text(report: &VerificationReport) -> String {
    let mut out = format!(
        "grid points: {}, rounds compared: {}\n{:<18} {:>12} {:>10}  result\n",
        report.points, report.max_rounds, "check", "max |Δ|", "tol"
    );
    for c in &report.checks {
        let _ = writeln!(
            out,
            "{:<18} {:>12.3e} {:>10.0e}  {}",
            c.name,
            c.max_delta,
            c.tolerance,
            if c.passed { "PASS" } else { "FAIL" }
        );
    }
    let _ = writeln!(out, "{}", if report.passed() { "all checks passed" } else { "VERIFICATION FAILED" });
    out
}

fn destination(out: &OutputArgs, stem: &str, ext: &str) -> Option<PathBuf> {
    out.output.clone().or_else(|| {
        std::env::var_os(OUTPUT_DIR_ENV).map(|dir| Path::new(&dir).join(format!("{stem}.{ext}")))
    })
}

fn emit(out: &OutputArgs, stem: &str, format: Format, body: &str) -> Result<(), CliError> {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    match destination(out, stem, ext) {
        Some(path) => std::fs::write(&path, body).map_err(|source| CliError::Io { path, source }),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })
        }
    }
}

/// Runs one parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Exact(args) => cmd_exact(args).and_then(|report| {
            let format = args.out.format.unwrap_or(Format::Json);
            let body = match format {
                Format::Json => serde_json::to_string_pretty(&report)? + "\n",
                Format::Csv => report.to_csv(),
            };
            emit(&args.out, "exact", format, &body).map(|_| EXIT_OK)
        }),
        Command::Sweep(args) => cmd_sweep(args).and_then(|table| {
            let format = args.out.format.unwrap_or(Format::Csv);
            let body = match format {
                Format::Csv => sweep_csv(&table),
                Format::Json => sweep_json(&table)?,
            };
            emit(&args.out, "sweep", format, &body).map(|_| EXIT_OK)
        }),
        Command::Sample(args) => cmd_sample(args).and_then(|report| {
            let format = args.out.format.unwrap_or(Format::Json);
            let body = match format {
                Format::Json => serde_json::to_string_pretty(&report)? + "\n",
                Format::Csv => report.to_csv(),
            };
            emit(&args.out, "sample", format, &body).map(|_| EXIT_OK)
        }),
        Command::Verify(args) => cmd_verify(args).and_then(|report| {
            let body = if args.json {
                serde_json::to_string_pretty(&report)? + "\n"
            } else {
                verify_text(&report)
            };
            print!("{body}");
            Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
