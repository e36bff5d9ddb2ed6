//! Command-line surface: every workflow as a reproducible, seeded command
//! emitting CSV or JSON.
//!
//! All floating-point output is printed with 12 significant digits so that
//! repeated runs are byte-identical and diffable. When `--out` is given the
//! output file is written atomically and accompanied by
//! `<out>.manifest.json` recording the full parameter set, tool version and
//! output checksum.

mod manifest;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::BTreeSet;
use std::process::ExitCode;

use clusterbench::bounds::{threshold_z, wc_lambda, Span};
use clusterbench::densesim::{cluster_state_with_limit, wc_state_with_limit, DEFAULT_DENSE_LIMIT};
use clusterbench::error::Error;
use clusterbench::errormodel::{compare_ranges, RangeRow, SourceParams};
use clusterbench::estimation::{
    certified_report, estimate_correlator_with, plan_samples, simulate_clicks, CiMethod,
    ClickSource, ExperimentPlan, DEFAULT_DELTA,
};
use clusterbench::localize::{maximize_le, LeMode, OptimizerConfig};
use clusterbench::pauli::GeneratorSet;

use output::{fmt12, round_json, OutputSink};

/// Environment variable overriding the dense simulation limit (qubits).
const DENSE_LIMIT_ENV: &str = "CLUSTERBENCH_DENSE_LIMIT";

#[derive(Parser)]
#[command(
    name = "clusterbench",
    version,
    about = "Entanglement certification toolkit for linear cluster-state sources",
    after_help = "Set CLUSTERBENCH_DENSE_LIMIT to override the dense simulation cap \
                  (default 14 qubits). Exit codes: 0 success, 2 domain/precondition \
                  error, 3 insufficient data, 4 resource limit."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write output to this file (atomically) instead of stdout, plus a
    /// `<out>.manifest.json` run manifest.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,

    /// Output format (tables default to csv, reports to json).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Correlator thresholds certifying nonzero entanglement per number of
    /// measured qubits.
    Thresholds(ThresholdsArgs),
    /// Verify backbone saturation and the fidelity identity of the
    /// worst-case state at a given correlator value.
    WcVerify(WcVerifyArgs),
    /// Compare certified ranges of the correlator floor and the direct
    /// bound over a grid of source error probabilities.
    Compare(CompareArgs),
    /// Maximize localized entanglement on worst-case states over
    /// measurement angles.
    Localize(LocalizeArgs),
    /// Simulate lossy detection of a noisy source, estimate the correlator
    /// and emit certified bound reports.
    Estimate(EstimateArgs),
    /// Sample-size plan for a target interval half-width and confidence.
    Plan(PlanArgs),
}

#[derive(Args, serde::Serialize)]
struct ThresholdsArgs {
    /// Largest number of measured qubits to tabulate.
    #[arg(long)]
    max_measured: u32,
}

#[derive(Args, serde::Serialize)]
struct WcVerifyArgs {
    /// Segment size.
    #[arg(long)]
    n: u32,
    /// Generator correlator value.
    #[arg(long)]
    z: f64,
}

#[derive(Args, serde::Serialize)]
struct CompareArgs {
    #[arg(long)]
    p_min: f64,
    #[arg(long)]
    p_max: f64,
    /// Number of grid points (inclusive of both ends).
    #[arg(long)]
    steps: u32,
    /// Cap on the measured-qubit span searched.
    #[arg(long)]
    max_span: usize,
}

#[derive(Args, serde::Serialize)]
struct LocalizeArgs {
    /// Chain length (3..=9).
    #[arg(long)]
    n: u32,
    /// Comma-separated mixing parameters.
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<f64>,
    /// Objective: the single post-selected branch or the outcome average.
    #[arg(long, value_enum, default_value = "postselected")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 2000)]
    max_iterations: usize,
}

#[derive(Clone, Copy, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
enum ModeArg {
    Postselected,
    OutcomeAveraged,
}

impl From<ModeArg> for LeMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Postselected => LeMode::Postselected,
            ModeArg::OutcomeAveraged => LeMode::OutcomeAveraged,
        }
    }
}

#[derive(Args, serde::Serialize)]
struct EstimateArgs {
    /// Y-error probability of the source.
    #[arg(long)]
    p: f64,
    /// Per-photon collection/detection efficiency.
    #[arg(long)]
    eta: f64,
    /// Number of measurement windows (trials).
    #[arg(long)]
    windows: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated measured-qubit spans for the certified reports.
    #[arg(long, value_delimiter = ',')]
    spans: Vec<u32>,
    /// Photons per emission train.
    #[arg(long, default_value_t = 8)]
    n_photons: usize,
    /// 1 - confidence for the certification interval.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
}

#[derive(Args, serde::Serialize)]
struct PlanArgs {
    #[arg(long)]
    eta: f64,
    /// Target interval half-width.
    #[arg(long)]
    epsilon: f64,
    /// 1 - confidence.
    #[arg(long)]
    delta: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err {
                Error::ResourceLimit(_) => 4,
                Error::InsufficientData(_) => 3,
                _ => 2,
            })
        }
    }
}

fn dense_limit() -> Result<usize, Error> {
    match std::env::var(DENSE_LIMIT_ENV) {
        Ok(text) => text
            .parse()
            .map_err(|_| Error::Domain(format!("{DENSE_LIMIT_ENV}='{text}' is not a qubit count"))),
        Err(_) => Ok(DEFAULT_DENSE_LIMIT),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let format = cli.format;
    let (name, params, body) = match cli.command {
        Command::Thresholds(args) => {
            let body = cmd_thresholds(&args, format)?;
            ("thresholds", serde_json::to_value(&args).unwrap(), body)
        }
        Command::WcVerify(args) => {
            let body = cmd_wc_verify(&args, format)?;
            ("wc-verify", serde_json::to_value(&args).unwrap(), body)
        }
        Command::Compare(args) => {
            let body = cmd_compare(&args, format)?;
            ("compare", serde_json::to_value(&args).unwrap(), body)
        }
        Command::Localize(args) => {
            let body = cmd_localize(&args, format)?;
            ("localize", serde_json::to_value(&args).unwrap(), body)
        }
        Command::Estimate(args) => {
            let body = cmd_estimate(&args, format)?;
            ("estimate", serde_json::to_value(&args).unwrap(), body)
        }
        Command::Plan(args) => {
            let body = cmd_plan(&args, format)?;
            ("plan", serde_json::to_value(&args).unwrap(), body)
        }
    };
    OutputSink::new(cli.out.as_deref()).emit(name, &params, &body)
}

pub(crate) enum Body {
    Csv(String),
    Json(serde_json::Value),
}

impl Body {
    fn json(value: serde_json::Value) -> Body {
        let mut value = value;
        round_json(&mut value);
        Body::Json(value)
    }
}

fn want_csv(format: Option<Format>, default_csv: bool) -> bool {
    match format {
        Some(Format::Csv) => true,
        Some(Format::Json) => false,
        None => default_csv,
    }
}

fn cmd_thresholds(args: &ThresholdsArgs, format: Option<Format>) -> Result<Body, Error> {
    if args.max_measured < 1 {
        return Err(Error::Domain("--max-measured must be >= 1".into()));
    }
    let rows: Vec<_> = (1..=args.max_measured)
        .map(threshold_z)
        .collect::<Result<_, _>>()?;
    if want_csv(format, true) {
        let mut csv = String::from("measured_qubits,threshold_exact,threshold_decimal\n");
        for (m, t) in (1..).zip(&rows) {
            csv.push_str(&format!(
                "{m},{}/{},{}\n",
                t.numerator,
                t.denominator,
                fmt12(t.value)
            ));
        }
        Ok(Body::Csv(csv))
    } else {
        let rows: Vec<_> = (1u32..)
            .zip(&rows)
            .map(|(m, t)| {
                serde_json::json!({
                    "measured_qubits": m,
                    "numerator": t.numerator,
                    "denominator": t.denominator,
                    "value": t.value,
                })
            })
            .collect();
        Ok(Body::json(
            serde_json::json!({"schema": "thresholds/1", "rows": rows}),
        ))
    }
}

fn cmd_wc_verify(args: &WcVerifyArgs, format: Option<Format>) -> Result<Body, Error> {
    let n = args.n as usize;
    let limit = dense_limit()?;
    let lambda = wc_lambda(args.z, args.n)?;
    let rho = wc_state_with_limit(n, lambda, limit)?;
    let cluster = cluster_state_with_limit(n, limit)?;
    let gens = GeneratorSet::cluster(n)?;
    let mut backbone_max_deviation = 0.0f64;
    let mut group_sum = 0.0;
    for mask in 0u64..1 << n {
        let indices: BTreeSet<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let element = gens.compose(&indices)?;
        let measured = rho.expectation(&element.operator)?;
        group_sum += measured;
        let floor = element.m() as f64 * (args.z - 1.0) + 1.0;
        backbone_max_deviation = backbone_max_deviation.max((measured - floor).abs());
    }
    let overlap = rho.fidelity_with(&cluster)?;
    let fidelity_expected = 1.0 - n as f64 * (1.0 - args.z) / 2.0;
    let fidelity_deviation = (overlap - fidelity_expected).abs();
    let expansion_deviation = (group_sum / (1u64 << n) as f64 - overlap).abs();
    if want_csv(format, false) {
        let mut csv = String::from(
            "n,z,lambda,subsets_checked,backbone_max_deviation,fidelity_deviation,backbone_expansion_deviation\n",
        );
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            args.n,
            fmt12(args.z),
            fmt12(lambda),
            1u64 << n,
            fmt12(backbone_max_deviation),
            fmt12(fidelity_deviation),
            fmt12(expansion_deviation),
        ));
        Ok(Body::Csv(csv))
    } else {
        Ok(Body::json(serde_json::json!({
            "schema": "wc_verify/1",
            "n": args.n,
            "z": args.z,
            "lambda": lambda,
            "subsets_checked": 1u64 << n,
            "backbone_max_deviation": backbone_max_deviation,
            "fidelity": overlap,
            "fidelity_expected": fidelity_expected,
            "fidelity_deviation": fidelity_deviation,
            "backbone_expansion_deviation": expansion_deviation,
        })))
    }
}

fn cmd_compare(args: &CompareArgs, format: Option<Format>) -> Result<Body, Error> {
    if !(0.0 <= args.p_min && args.p_min < args.p_max && args.p_max <= 0.5) {
        return Err(Error::Domain("need 0 <= p-min < p-max <= 0.5".into()));
    }
    if args.steps < 2 {
        return Err(Error::Domain("--steps must be >= 2".into()));
    }
    let grid: Vec<f64> = (0..args.steps)
        .map(|i| args.p_min + (args.p_max - args.p_min) * i as f64 / (args.steps - 1) as f64)
        .collect();
    let rows = compare_ranges(&grid, args.max_span)?;
    if want_csv(format, true) {
        let mut csv = String::from(RangeRow::csv_header());
        csv.push('\n');
        for r in &rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt12(r.p),
                fmt12(r.zxz_value),
                r.zxz_range,
                r.direct_range,
                fmt12(r.le3_direct),
                fmt12(r.le3_zxz),
            ));
        }
        Ok(Body::Csv(csv))
    } else {
        Ok(Body::json(serde_json::json!({
            "schema": "compare/1",
            "rows": serde_json::to_value(&rows).unwrap(),
        })))
    }
}

fn cmd_localize(args: &LocalizeArgs, format: Option<Format>) -> Result<Body, Error> {
    if args.n < 3 || args.n > 9 {
        return Err(Error::Domain("--n must be in 3..=9".into()));
    }
    if args.lambda.is_empty() {
        return Err(Error::Domain("--lambda needs at least one value".into()));
    }
    let limit = dense_limit()?;
    let mode: LeMode = args.mode.into();
    let mut results = Vec::new();
    for &lambda in &args.lambda {
        let rho = wc_state_with_limit(args.n as usize, lambda, limit)?;
        let cfg = OptimizerConfig {
            restarts: args.restarts,
            max_iterations: args.max_iterations,
            seed: args.seed,
            ..OptimizerConfig::default()
        };
        let r = maximize_le(&rho, &cfg, mode)?;
        results.push((lambda, r));
    }
    if want_csv(format, true) {
        let mut csv = String::from(
            "lambda,n,mode,best_value,theta_rms_deviation_from_pi_over_2,iterations,converged\n",
        );
        for (lambda, r) in &results {
            csv.push_str(&format!(
                "{},{},{mode},{},{},{},{}\n",
                fmt12(*lambda),
                args.n,
                fmt12(r.best_value),
                fmt12(r.best_angles.theta_rms_deviation_from_equator()),
                r.iterations,
                r.converged,
            ));
        }
        Ok(Body::Csv(csv))
    } else {
        let rows: Vec<_> = results
            .iter()
            .map(|(lambda, r)| {
                serde_json::json!({
                    "lambda": lambda,
                    "n": args.n,
                    "mode": mode.to_string(),
                    "best_value": r.best_value,
                    "theta_rms_deviation_from_pi_over_2":
                        r.best_angles.theta_rms_deviation_from_equator(),
                    "angles": r.best_angles.angles().iter()
                        .map(|&(t, p)| serde_json::json!({"theta": t, "phi": p}))
                        .collect::<Vec<_>>(),
                    "iterations": r.iterations,
                    "converged": r.converged,
                })
            })
            .collect();
        Ok(Body::json(
            serde_json::json!({"schema": "localize/1", "rows": rows}),
        ))
    }
}

fn cmd_estimate(args: &EstimateArgs, format: Option<Format>) -> Result<Body, Error> {
    let params = SourceParams::new(args.n_photons, args.p)?;
    let plan =
        ExperimentPlan::full_cycle(params.chain_qubits(), args.eta, args.windows, args.seed)?;
    let records = simulate_clicks(&ClickSource::Source(&params), &plan)?;
    let estimate = estimate_correlator_with(&records, args.delta, CiMethod::Hoeffding)?;
    let advisory = estimate_correlator_with(&records, args.delta, CiMethod::Normal)?;
    let spans: Vec<Span> = args
        .spans
        .iter()
        .map(|&m| Span::MeasuredQubits(m))
        .collect();
    let reports = certified_report(&estimate, &spans);
    if want_csv(format, false) {
        let mut csv = String::from(
            "method,confidence,z,span,le_floor,fidelity_floor,fef_floor,teleport_floor\n",
        );
        for r in &reports {
            csv.push_str(&format!(
                "hoeffding,{},{},{},{},{},{},{}\n",
                fmt12(r.confidence),
                fmt12(r.report.z),
                r.report.span,
                fmt12(r.report.le_floor),
                fmt12(r.report.fidelity_floor),
                fmt12(r.report.fef_floor),
                fmt12(r.report.teleport_floor),
            ));
        }
        Ok(Body::Csv(csv))
    } else {
        Ok(Body::json(serde_json::json!({
            "schema": "estimate_report/1",
            "source": serde_json::to_value(params).unwrap(),
            "windows": args.windows,
            "efficiency": args.eta,
            "seed": args.seed,
            "estimate": serde_json::to_value(&estimate).unwrap(),
            "normal_advisory": serde_json::to_value(&advisory).unwrap(),
            "reports": serde_json::to_value(&reports).unwrap(),
        })))
    }
}

fn cmd_plan(args: &PlanArgs, format: Option<Format>) -> Result<Body, Error> {
    let plan = plan_samples(args.eta, args.epsilon, args.delta)?;
    if want_csv(format, false) {
        Ok(Body::Csv(format!(
            "eta,epsilon,delta,complete_triples,windows\n{},{},{},{},{}\n",
            fmt12(args.eta),
            fmt12(args.epsilon),
            fmt12(args.delta),
            plan.complete_triples,
            plan.windows,
        )))
    } else {
        Ok(Body::json(serde_json::json!({
            "schema": "plan/1",
            "eta": args.eta,
            "epsilon": args.epsilon,
            "delta": args.delta,
            "complete_triples": plan.complete_triples,
            "windows": plan.windows,
        })))
    }
}
