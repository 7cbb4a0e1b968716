use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{Map, Value};
use tpsk_core::keyrate::{amplitude_upper_bound, key_rate_with, optimize_amplitude_with, rate_curve_with, UpperLimit};
use tpsk_core::lemma_lab::{oracle_diff, verify_with, VerifyOptions};
use tpsk_core::{
    AmplitudeOptimum, ChannelModel, CorrectionSymbols, CurveRow, PhaseCap, PosteriorPhase, PropertyId,
    QuadratureSpec, RateOptions,
};

mod config;
mod output;

use config::{Axis, FileConfig, Format, QuadratureSection};
use output::{num, Table};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

/// Key rates, amplitude traces and lemma checks for three-state phase-shift keying.
#[derive(Parser, Debug)]
#[command(name = "tpsk", version)]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct ChannelArgs {
    #[arg(long)]
    eta: Option<f64>,
    /// Loss 1-eta: a number, `a,b,c`, or `start:stop:step`.
    #[arg(long)]
    loss: Option<String>,
    /// Excess noise.
    #[arg(long)]
    delta: Option<f64>,
    /// Mixedness bound.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct QuadratureArgs {
    #[arg(long)]
    n_radial: Option<usize>,
    #[arg(long)]
    n_angular: Option<usize>,
    #[arg(long)]
    truncation_sigmas: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum CapArg {
    Both,
    EveOnly,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum SymbolsArg {
    FirstTwo,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum PosteriorArg {
    Eve,
    Bob,
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    /// Phase constraint on the amplitude search.
    #[arg(long, value_enum)]
    cap: Option<CapArg>,
    #[arg(long, value_enum)]
    correction_symbols: Option<SymbolsArg>,
    #[arg(long, value_enum)]
    posterior_phase: Option<PosteriorArg>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Key rate at one (eta, delta, r, eps) point.
    Rate {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Signal amplitude.
        #[arg(long)]
        r: Option<f64>,
        #[command(flatten)]
        quadrature: QuadratureArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Amplitude-optimised rate along a loss grid.
    Curve {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        quadrature: QuadratureArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Rate along an amplitude grid at one channel point.
    OptimizeR {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long)]
        r_points: Option<usize>,
        #[command(flatten)]
        quadrature: QuadratureArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Sampled checks of the spectral lemmas.
    Verify {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Property to check; repeatable. Defaults to all.
        #[arg(long = "property")]
        properties: Vec<String>,
        #[arg(long)]
        theta_max: Option<f64>,
    },
    /// Largest disagreement between the cubic spectrum and the Gram oracle.
    OracleDiff {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        theta_max: Option<f64>,
    },
}

const DEFAULT_SAMPLES: usize = 10_000;
const DEFAULT_SEED: u64 = 42;
const DEFAULT_R_POINTS: usize = 64;
const CURVE_HEADER: &[&str] = &[
    "loss",
    "eta",
    "delta",
    "eps",
    "r_opt",
    "K",
    "I_xy",
    "H_E_given_X",
    "eve_term",
    "plob",
    "theta_E",
    "boundary_active",
];
const TRACE_HEADER: &[&str] = &[
    "r",
    "K",
    "I_xy",
    "H_E_given_X",
    "eve_term",
    "eps_tilde_arg",
    "eve_overlap",
    "theta_E",
    "theta_B",
];

struct Context {
    file: FileConfig,
    format: Format,
}

impl Context {
    fn noise(&self, channel: &ChannelArgs) -> (f64, f64) {
        let c = &self.file.channel;
        (
            channel.delta.or(c.delta).unwrap_or(0.0),
            channel.eps.or(c.eps).unwrap_or(0.0),
        )
    }

    fn axis(&self, channel: &ChannelArgs) -> Result<Axis, CliError> {
        Axis::resolve(channel.eta, channel.loss.as_deref(), &self.file.channel)
    }

    fn quadrature(&self, q: &QuadratureArgs) -> Result<QuadratureSpec, CliError> {
        self.file.quadrature(&QuadratureSection {
            n_radial: q.n_radial,
            n_angular: q.n_angular,
            truncation_sigmas: q.truncation_sigmas,
            tolerance: q.tolerance,
        })
    }

    fn model(&self, m: &ModelArgs) -> (PhaseCap, RateOptions) {
        let o = &self.file.optimizer;
        let cap = match m.cap {
            Some(CapArg::Both) => PhaseCap::Both,
            Some(CapArg::EveOnly) => PhaseCap::EveOnly,
            None => o.cap.unwrap_or_default(),
        };
        let correction_symbols = match m.correction_symbols {
            Some(SymbolsArg::FirstTwo) => CorrectionSymbols::FirstTwo,
            Some(SymbolsArg::All) => CorrectionSymbols::All,
            None => o.correction_symbols.unwrap_or_default(),
        };
        let posterior_phase = match m.posterior_phase {
            Some(PosteriorArg::Eve) => PosteriorPhase::Eve,
            Some(PosteriorArg::Bob) => PosteriorPhase::Bob,
            None => o.posterior_phase.unwrap_or_default(),
        };
        (
            cap,
            RateOptions {
                correction_symbols,
                posterior_phase,
            },
        )
    }

    fn records<T: Serialize>(&self, records: &[T]) -> String {
        match self.format {
            Format::Csv => output::records_to_csv(records),
            Format::Json => output::to_json(&records),
        }
    }

    fn table(&self, table: &Table) -> String {
        match self.format {
            Format::Csv => table.to_csv(),
            Format::Json => table.to_json(),
        }
    }
}

fn numeric(e: tpsk_core::Error) -> CliError {
    CliError::Numeric(e.to_string())
}

fn usage(e: tpsk_core::Error) -> CliError {
    CliError::Usage(e.to_string())
}

/// Output text plus any per-row failures to report after writing.
type Produced = (String, Vec<String>);

fn run_rate(ctx: &Context, channel: &ChannelArgs, r: Option<f64>, q: &QuadratureArgs, m: &ModelArgs) -> Result<Produced, CliError> {
    let eta = ctx.axis(channel)?.single_eta()?;
    let (delta, eps) = ctx.noise(channel);
    let r = r
        .or(ctx.file.channel.r)
        .ok_or_else(|| CliError::Usage("rate needs --r".into()))?;
    let spec = ctx.quadrature(q)?;
    let (_, options) = ctx.model(m);
    let ch = ChannelModel::new(eta, delta, r, eps).map_err(usage)?;
    let b = key_rate_with(&ch, &spec, &options)
        .map_err(|e| CliError::Numeric(format!("at eta = {eta}, delta = {delta}, r = {r}, eps = {eps}: {e}")))?;
    Ok((ctx.records(&[b]), Vec::new()))
}

fn curve_chunks(losses: &[f64], threads: usize, run: impl Fn(&[f64]) -> Vec<CurveRow> + Sync) -> Vec<CurveRow> {
    let size = losses.len().div_ceil(threads.max(1)).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = losses.chunks(size).map(|c| s.spawn(|| run(c))).collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("curve worker panicked"))
            .collect()
    })
}

fn run_curve(
    ctx: &Context,
    channel: &ChannelArgs,
    q: &QuadratureArgs,
    m: &ModelArgs,
    threads: Option<usize>,
) -> Result<Produced, CliError> {
    let losses = ctx.axis(channel)?.losses()?;
    let (delta, eps) = ctx.noise(channel);
    ChannelModel::new(0.5, delta, 0.1, eps).map_err(usage)?;
    let spec = ctx.quadrature(q)?;
    let (cap, options) = ctx.model(m);
    let threads = threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let rows = curve_chunks(&losses, threads, |c| rate_curve_with(c, delta, eps, &spec, cap, &options));

    let mut table = Table::new(CURVE_HEADER);
    let mut failures = Vec::new();
    for row in rows {
        let mut out = Map::new();
        out.insert("loss".into(), num(row.loss));
        out.insert("eta".into(), num(row.eta));
        out.insert("delta".into(), num(row.delta));
        out.insert("eps".into(), num(row.eps));
        let plob = match ctx.format {
            Format::Csv if row.plob == f64::INFINITY => Value::String("inf".into()),
            _ => num(row.plob),
        };
        out.insert("plob".into(), plob);
        match &row.result {
            Ok(AmplitudeOptimum {
                r_opt,
                breakdown: b,
                boundary_active,
                ..
            }) => {
                out.insert("r_opt".into(), num(*r_opt));
                out.insert("K".into(), num(b.key_rate));
                out.insert("I_xy".into(), num(b.i_xy));
                out.insert("H_E_given_X".into(), num(b.h_e_given_x));
                out.insert("eve_term".into(), num(b.eve_term));
                out.insert("theta_E".into(), num(b.theta_e));
                out.insert("boundary_active".into(), Value::Bool(*boundary_active));
            }
            Err(e) => {
                failures.push(format!("loss {}: {e}", row.loss));
                if ctx.format == Format::Json {
                    out.insert("error".into(), Value::String(e.to_string()));
                }
            }
        }
        table.push(out);
    }
    Ok((ctx.table(&table), failures))
}

fn run_optimize_r(
    ctx: &Context,
    channel: &ChannelArgs,
    r_points: Option<usize>,
    q: &QuadratureArgs,
    m: &ModelArgs,
) -> Result<Produced, CliError> {
    let eta = ctx.axis(channel)?.single_eta()?;
    let (delta, eps) = ctx.noise(channel);
    let n = r_points.or(ctx.file.optimizer.r_points).unwrap_or(DEFAULT_R_POINTS);
    if n < 2 {
        return Err(CliError::Usage("--r-points must be >= 2".into()));
    }
    let spec = ctx.quadrature(q)?;
    let (cap, options) = ctx.model(m);
    let base = ChannelModel::new(eta, delta, 0.0, eps).map_err(usage)?;
    let (r_upper, limit) = amplitude_upper_bound(eta, cap);

    let mut table = Table::new(TRACE_HEADER);
    let mut failures = Vec::new();
    for k in 0..n {
        let r = r_upper * k as f64 / (n - 1) as f64;
        let mut out = Map::new();
        out.insert("r".into(), num(r));
        match base.with_amplitude(r).and_then(|ch| key_rate_with(&ch, &spec, &options)) {
            Ok(b) => {
                out.insert("K".into(), num(b.key_rate));
                out.insert("I_xy".into(), num(b.i_xy));
                out.insert("H_E_given_X".into(), num(b.h_e_given_x));
                out.insert("eve_term".into(), num(b.eve_term));
                out.insert("eps_tilde_arg".into(), num(b.eps_tilde_arg));
                out.insert("eve_overlap".into(), num(b.eve_overlap));
                out.insert("theta_E".into(), num(b.theta_e));
                out.insert("theta_B".into(), num(b.theta_b));
            }
            Err(e) => failures.push(format!("r {r}: {e}")),
        }
        table.push(out);
    }
    let opt = optimize_amplitude_with(eta, delta, eps, &spec, cap, &options).map_err(numeric)?;
    let limit = match limit {
        UpperLimit::AmplitudeBox => "amplitude_box",
        UpperLimit::EvePhase => "eve_phase",
        UpperLimit::BobPhase => "bob_phase",
    };
    eprintln!(
        "optimum r = {} K = {} (upper limit {} from {limit}, boundary active {})",
        output::fmt_num(opt.r_opt),
        output::fmt_num(opt.breakdown.key_rate),
        output::fmt_num(r_upper),
        opt.boundary_active
    );
    Ok((ctx.table(&table), failures))
}

fn run_verify(
    ctx: &Context,
    samples: Option<usize>,
    seed: Option<u64>,
    properties: &[String],
    theta_max: Option<f64>,
) -> Result<Produced, CliError> {
    let v = &ctx.file.verify;
    let samples = samples.or(v.samples).unwrap_or(DEFAULT_SAMPLES);
    let seed = seed.or(v.seed).unwrap_or(DEFAULT_SEED);
    let options = VerifyOptions {
        theta_max: theta_max.or(v.theta_max).unwrap_or(VerifyOptions::default().theta_max),
    };
    let names: Vec<String> = if properties.is_empty() {
        v.properties.clone().unwrap_or_default()
    } else {
        properties.to_vec()
    };
    let ids: Vec<PropertyId> = if names.is_empty() {
        PropertyId::ALL.to_vec()
    } else {
        names.iter().map(|n| n.parse().map_err(usage)).collect::<Result<_, _>>()?
    };
    let reports = ids
        .iter()
        .map(|id| verify_with(*id, samples, seed, &options))
        .collect::<Result<Vec<_>, _>>()
        .map_err(usage)?;
    let failures = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{} violated by {:e} (slack {:e})", r.property_id, r.worst_violation, r.slack))
        .collect();
    Ok((ctx.records(&reports), failures))
}

fn run_oracle_diff(ctx: &Context, samples: Option<usize>, seed: Option<u64>, theta_max: Option<f64>) -> Result<Produced, CliError> {
    let v = &ctx.file.verify;
    let samples = samples.or(v.samples).unwrap_or(DEFAULT_SAMPLES);
    let seed = seed.or(v.seed).unwrap_or(DEFAULT_SEED);
    let theta_max = theta_max.or(v.theta_max).unwrap_or(std::f64::consts::PI);
    let diff = oracle_diff(samples, seed, theta_max).map_err(usage)?;
    Ok((ctx.records(&[diff]), Vec::new()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let format = cli.format.or(file.format).unwrap_or_default();
    let path = cli.output.clone().or_else(|| file.output.clone());
    let ctx = Context { file, format };
    let (text, failures) = match &cli.command {
        Command::Rate {
            channel,
            r,
            quadrature,
            model,
        } => run_rate(&ctx, channel, *r, quadrature, model)?,
        Command::Curve {
            channel,
            quadrature,
            model,
            threads,
        } => run_curve(&ctx, channel, quadrature, model, *threads)?,
        Command::OptimizeR {
            channel,
            r_points,
            quadrature,
            model,
        } => run_optimize_r(&ctx, channel, *r_points, quadrature, model)?,
        Command::Verify {
            samples,
            seed,
            properties,
            theta_max,
        } => run_verify(&ctx, *samples, *seed, properties, *theta_max)?,
        Command::OracleDiff {
            samples,
            seed,
            theta_max,
        } => run_oracle_diff(&ctx, *samples, *seed, *theta_max)?,
    };
    match path {
        Some(p) => std::fs::write(&p, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display())))?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("cannot write stdout: {e}")))?,
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numeric(failures.join("\n")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tpsk: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
