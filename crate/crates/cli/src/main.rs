//! Command-line front end: entropy-rate estimation, predictive density,
//! 0-1-loss prediction, and conditional-law diagnostics over synthetic
//! sources or data files.
//!
//! Output is CSV preceded by `#`-comment lines echoing the effective
//! configuration. Runs are byte-deterministic for a fixed command line:
//! sampling uses counter-seeded generators and replicated work is fanned out
//! with index-ordered collection.
//!
//! Exit codes: 0 success, 2 configuration errors (one-line diagnostic),
//! 3 malformed input data (with the offending line number).

mod parse;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use entroscope_core::exec::map_indexed;
use entroscope_core::measure::{Alphabet, SymbolSequence};
use entroscope_core::npd::{differential_entropy_trace, predictive_density, MaxLevel, NpdConfig};
use entroscope_core::ppm::{PpmEvaluator, PpmMixture, SmoothingRule, WeightScheme};
use entroscope_core::predict::{log_ratio_diagnostic, run_prediction_ppm, RunnerConfig};
use entroscope_core::quantize::ReferenceMeasure;
use entroscope_core::sources::SourceModel;

use parse::{parse_source, read_reals, read_symbols};
use report::{log_grid, num, Report};

#[derive(Debug)]
pub enum CliError {
    /// Inconsistent or unsupported configuration → exit 2.
    Config(String),
    /// Malformed data file → exit 3, pointing at the line.
    Data { line: usize, msg: String },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Data { line, msg }) => {
            eprintln!("error: line {line}: {msg}");
            ExitCode::from(3)
        }
    }
}

#[derive(Parser)]
#[command(name = "entroscope", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy-rate estimates at logarithmic checkpoints
    Entropy(EntropyArgs),
    /// One-step predictive density over a quantile grid of the reference
    Density(DensityArgs),
    /// Cumulative 0-1-loss mistake density at logarithmic checkpoints
    Predict(PredictArgs),
    /// Mean log-ratio between true and learned conditionals by history length
    Diagnostic(DiagnosticArgs),
    /// Draw a sample path, one value per line
    Sample(SampleArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SmoothingArg {
    Laplace,
    Kt,
}

impl SmoothingArg {
    fn rule(self) -> SmoothingRule {
        match self {
            SmoothingArg::Laplace => SmoothingRule::Laplace,
            SmoothingArg::Kt => SmoothingRule::KrichevskyTrofimov,
        }
    }

    fn name(self) -> &'static str {
        match self {
            SmoothingArg::Laplace => "laplace",
            SmoothingArg::Kt => "kt",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WeightsArg {
    Rational,
    Log,
}

impl WeightsArg {
    fn scheme(self) -> WeightScheme {
        match self {
            WeightsArg::Rational => WeightScheme::Rational,
            WeightsArg::Log => WeightScheme::LogTelescoping,
        }
    }

    fn name(self) -> &'static str {
        match self {
            WeightsArg::Rational => "rational",
            WeightsArg::Log => "log",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReferenceArg {
    Uniform,
    Gaussian,
}

impl ReferenceArg {
    fn measure(self) -> ReferenceMeasure {
        match self {
            ReferenceArg::Uniform => ReferenceMeasure::Uniform01,
            ReferenceArg::Gaussian => ReferenceMeasure::StandardGaussian,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ReferenceArg::Uniform => "uniform",
            ReferenceArg::Gaussian => "gaussian",
        }
    }
}

/// Data selection shared by the analysis commands: exactly one of a source
/// spec or a data file, with --alphabet marking a file as symbol data.
#[derive(Args)]
struct DataArgs {
    /// Synthetic source, e.g. fair-coin or markov:rows=0.9,0.1;0.2,0.8
    #[arg(long)]
    source: Option<String>,
    /// Data file: whitespace-separated symbols with --alphabet, otherwise one
    /// real number per line
    #[arg(long)]
    input: Option<PathBuf>,
    /// Alphabet size of a symbol file
    #[arg(long)]
    alphabet: Option<u32>,
}

enum Data {
    Source(SourceModel),
    SymbolFile(SymbolSequence),
    RealFile(Vec<f64>),
}

impl DataArgs {
    fn resolve(&self) -> Result<Data, CliError> {
        match (&self.source, &self.input) {
            (Some(_), Some(_)) => Err(CliError::Config(
                "--source and --input are mutually exclusive".into(),
            )),
            (None, None) => Err(CliError::Config(
                "one of --source or --input is required".into(),
            )),
            (Some(spec), None) => {
                if self.alphabet.is_some() {
                    return Err(CliError::Config(
                        "--alphabet applies only to --input".into(),
                    ));
                }
                Ok(Data::Source(parse_source(spec)?))
            }
            (None, Some(path)) => match self.alphabet {
                Some(m) if m >= 2 => Ok(Data::SymbolFile(read_symbols(path, Alphabet::new(m))?)),
                Some(m) => Err(CliError::Config(format!(
                    "alphabet size must be >= 2, got {m}"
                ))),
                None => Ok(Data::RealFile(read_reals(path)?)),
            },
        }
    }

    /// Echoes whichever selector is in use.
    fn echo(&self, report: &mut Report) {
        if let Some(spec) = &self.source {
            report.config("source", spec);
        }
        if let Some(path) = &self.input {
            report.config("input", path.display());
        }
        if let Some(m) = self.alphabet {
            report.config("alphabet", m);
        }
    }
}

#[derive(Args)]
struct MixtureArgs {
    /// Escape-smoothing rule for per-order counts
    #[arg(long, value_enum, default_value_t = SmoothingArg::Laplace)]
    smoothing: SmoothingArg,
    /// Prior weights over model orders
    #[arg(long, value_enum, default_value_t = WeightsArg::Rational)]
    weights: WeightsArg,
}

impl MixtureArgs {
    fn echo(&self, report: &mut Report) {
        report.config("smoothing", self.smoothing.name());
        report.config("weights", self.weights.name());
    }

    fn mixture(&self, alphabet: Alphabet) -> PpmMixture {
        PpmMixture::new(alphabet, self.smoothing.rule(), self.weights.scheme())
    }
}

#[derive(Args)]
struct EntropyArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Sequence length drawn from --source
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Base RNG seed; replicas use seed, seed+1, ..
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of independent replicas (consecutive seeds)
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[command(flatten)]
    mixture: MixtureArgs,
    /// Reference measure for real-valued data [default: uniform]
    #[arg(long, value_enum)]
    reference: Option<ReferenceArg>,
    /// Deepest quantization level, or `auto` for a length-matched choice
    #[arg(long)]
    rmax: Option<String>,
    /// Report real-valued entropy against Lebesgue instead of the reference
    #[arg(long)]
    lebesgue: bool,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Training-sequence length drawn from --source
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of evaluation points across the reference support
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Reference measure [default: uniform]
    #[arg(long, value_enum)]
    reference: Option<ReferenceArg>,
    /// Deepest quantization level, or `auto` for a length-matched choice
    #[arg(long)]
    rmax: Option<String>,
    #[command(flatten)]
    mixture: MixtureArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Sequence length drawn from --source
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    mixture: MixtureArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnosticArgs {
    /// Synthetic finite-alphabet source (the diagnostic needs its true law)
    #[arg(long)]
    source: String,
    /// Largest history length on the checkpoint grid
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Independent sample paths averaged per checkpoint
    #[arg(long, default_value_t = 100)]
    replicas: usize,
    /// Base RNG seed; replicas use seed, seed+1, ..
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    mixture: MixtureArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    source: String,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Entropy(args) => entropy(args),
        Command::Density(args) => density(args),
        Command::Predict(args) => predict(args),
        Command::Diagnostic(args) => diagnostic(args),
        Command::Sample(args) => sample(args),
    }
}

fn require_positive(n: usize, what: &str) -> Result<(), CliError> {
    if n == 0 {
        Err(CliError::Config(format!("{what} must be >= 1")))
    } else {
        Ok(())
    }
}

fn parse_rmax(arg: &Option<String>) -> Result<MaxLevel, CliError> {
    match arg.as_deref() {
        None | Some("auto") => Ok(MaxLevel::Auto),
        Some(s) => match s.parse::<u32>() {
            Ok(r) if (1..=31).contains(&r) => Ok(MaxLevel::Fixed(r)),
            _ => Err(CliError::Config(format!(
                "rmax must be `auto` or 1..=31, got `{s}`"
            ))),
        },
    }
}

/// Rejects real-data flags on finite-alphabet runs so a config never silently
/// means less than it says.
fn reject_real_flags(
    reference: &Option<ReferenceArg>,
    rmax: &Option<String>,
    lebesgue: bool,
) -> Result<(), CliError> {
    if reference.is_some() {
        return Err(CliError::Config(
            "--reference applies only to real-valued data".into(),
        ));
    }
    if rmax.is_some() {
        return Err(CliError::Config(
            "--rmax applies only to real-valued data".into(),
        ));
    }
    if lebesgue {
        return Err(CliError::Config(
            "--lebesgue applies only to real-valued data".into(),
        ));
    }
    Ok(())
}

fn write(report: &Report, out: &Option<PathBuf>) -> Result<(), CliError> {
    report
        .write(out.as_deref())
        .map_err(|e| CliError::Config(format!("cannot write output: {e}")))
}

fn npd_config(
    reference: ReferenceMeasure,
    mixture: &MixtureArgs,
    max_level: MaxLevel,
) -> NpdConfig {
    let mut config = NpdConfig::new(reference);
    config.smoothing = mixture.smoothing.rule();
    config.scheme = mixture.weights.scheme();
    config.max_level = max_level;
    config
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

// ---------------------------------------------------------------- entropy --

fn entropy(args: EntropyArgs) -> Result<(), CliError> {
    require_positive(args.seeds as usize, "seeds")?;
    let mut report = Report::new("entropy");
    args.data.echo(&mut report);
    let rows = match args.data.resolve()? {
        Data::Source(source) if source.alphabet().is_some() => {
            reject_real_flags(&args.reference, &args.rmax, args.lebesgue)?;
            require_positive(args.n, "n")?;
            finite_entropy_source(&source, &args, &mut report)
        }
        Data::Source(source) => {
            require_positive(args.n, "n")?;
            real_entropy(
                &args,
                &mut report,
                |seed| source.sample_reals(args.n, seed),
                Some(&source),
            )?
        }
        Data::SymbolFile(seq) => {
            reject_real_flags(&args.reference, &args.rmax, args.lebesgue)?;
            if args.seeds != 1 {
                return Err(CliError::Config("--seeds applies only to --source".into()));
            }
            require_positive(seq.len(), "input length")?;
            report.config("n", seq.len());
            args.mixture.echo(&mut report);
            let grid = log_grid(seq.len());
            finite_entropy_rows(&seq, &grid, &args.mixture)
                .into_iter()
                .map(|(n, est)| {
                    vec![
                        num(n as f64),
                        num(est),
                        String::new(),
                        String::new(),
                        String::new(),
                    ]
                })
                .collect()
        }
        Data::RealFile(xs) => {
            if args.seeds != 1 {
                return Err(CliError::Config("--seeds applies only to --source".into()));
            }
            require_positive(xs.len(), "input length")?;
            let args = EntropyArgs {
                n: xs.len(),
                ..args
            };
            return real_entropy_report(&args, report, &xs, None);
        }
    };
    report.columns(&["n", "estimate_nats", "analytic_nats", "abs_error", "seed"]);
    for row in rows {
        report.row(row);
    }
    write(&report, &args.out)
}

/// Prefix entropy estimates −log P(x₁..xₙ)/n at each grid point.
fn finite_entropy_rows(
    seq: &SymbolSequence,
    grid: &[usize],
    mixture: &MixtureArgs,
) -> Vec<(usize, f64)> {
    let mut ev = PpmEvaluator::new(
        seq.alphabet(),
        mixture.smoothing.rule(),
        mixture.weights.scheme(),
    );
    let mut out = Vec::new();
    let mut want = grid.iter().copied().peekable();
    for (i, &x) in seq.symbols().iter().enumerate() {
        ev.step(x);
        while want.peek() == Some(&(i + 1)) {
            out.push((i + 1, -ev.log_prob().ln() / (i + 1) as f64));
            want.next();
        }
    }
    out
}

fn finite_entropy_source(
    source: &SourceModel,
    args: &EntropyArgs,
    report: &mut Report,
) -> Vec<Vec<String>> {
    report.config("n", args.n);
    report.config("seed", args.seed);
    report.config("seeds", args.seeds);
    args.mixture.echo(report);
    let analytic = source.analytic_entropy_rate(None).ok().map(|r| r.nats);
    let grid = log_grid(args.n);
    let per_seed = map_indexed(args.seeds as usize, |k| {
        let seed = args.seed + k as u64;
        let seq = source.sample_symbols(args.n, seed);
        (seed, finite_entropy_rows(&seq, &grid, &args.mixture))
    });
    let mut rows = Vec::new();
    for (seed, ests) in per_seed {
        for (n, est) in ests {
            rows.push(entropy_row(n, est, analytic, Some(seed)));
        }
    }
    rows
}

fn entropy_row(n: usize, est: f64, analytic: Option<f64>, seed: Option<u64>) -> Vec<String> {
    vec![
        num(n as f64),
        num(est),
        analytic.map(num).unwrap_or_default(),
        analytic.map(|a| num((est - a).abs())).unwrap_or_default(),
        seed.map(|s| s.to_string()).unwrap_or_default(),
    ]
}

/// Replicated real-valued entropy traces; one row block per seed.
fn real_entropy(
    args: &EntropyArgs,
    report: &mut Report,
    sample: impl Fn(u64) -> Vec<f64> + Sync,
    source: Option<&SourceModel>,
) -> Result<Vec<Vec<String>>, CliError> {
    let reference = args.reference.unwrap_or(ReferenceArg::Uniform);
    let max_level = parse_rmax(&args.rmax)?;
    report.config("n", args.n);
    report.config("seed", args.seed);
    report.config("seeds", args.seeds);
    args.mixture.echo(report);
    report.config("reference", reference.name());
    report.config("rmax", max_level.resolve(args.n));
    report.config("lebesgue", args.lebesgue);
    let analytic = analytic_real_rate(source, reference.measure(), args.lebesgue);
    let config = npd_config(reference.measure(), &args.mixture, max_level);
    let grid = log_grid(args.n);
    let per_seed = map_indexed(args.seeds as usize, |k| {
        let seed = args.seed + k as u64;
        let xs = sample(seed);
        (seed, real_entropy_rows(&xs, &grid, &config, args.lebesgue))
    });
    let mut rows = Vec::new();
    for (seed, ests) in per_seed {
        for (n, est) in ests? {
            rows.push(entropy_row(n, est, analytic, Some(seed)));
        }
    }
    Ok(rows)
}

/// Single-trace variant for file data (no seed column, no analytic rate).
fn real_entropy_report(
    args: &EntropyArgs,
    mut report: Report,
    xs: &[f64],
    source: Option<&SourceModel>,
) -> Result<(), CliError> {
    let reference = args.reference.unwrap_or(ReferenceArg::Uniform);
    let max_level = parse_rmax(&args.rmax)?;
    report.config("n", args.n);
    args.mixture.echo(&mut report);
    report.config("reference", reference.name());
    report.config("rmax", max_level.resolve(args.n));
    report.config("lebesgue", args.lebesgue);
    let analytic = analytic_real_rate(source, reference.measure(), args.lebesgue);
    let config = npd_config(reference.measure(), &args.mixture, max_level);
    let grid = log_grid(xs.len());
    report.columns(&["n", "estimate_nats", "analytic_nats", "abs_error", "seed"]);
    for (n, est) in real_entropy_rows(xs, &grid, &config, args.lebesgue)? {
        report.row(entropy_row(n, est, analytic, None));
    }
    write(&report, &args.out)
}

fn real_entropy_rows(
    xs: &[f64],
    grid: &[usize],
    config: &NpdConfig,
    lebesgue: bool,
) -> Result<Vec<(usize, f64)>, CliError> {
    let est = differential_entropy_trace(xs, config, grid).map_err(config_err)?;
    let trace = est.trace.unwrap_or_default();
    if !lebesgue {
        return Ok(trace);
    }
    // Reference-relative rate → Lebesgue rate: subtract the running mean of
    // the log reference density along the same data.
    let mut cum = 0.0;
    let mut cum_at = vec![0.0; xs.len() + 1];
    for (i, &x) in xs.iter().enumerate() {
        cum += config.reference.ln_density(x);
        cum_at[i + 1] = cum;
    }
    Ok(trace
        .into_iter()
        .map(|(n, est)| (n, est - cum_at[n] / n as f64))
        .collect())
}

/// Closed-form rate for the matched (source, reference) pairs; under
/// --lebesgue, shifted by the stationary mean log reference density.
fn analytic_real_rate(
    source: Option<&SourceModel>,
    reference: ReferenceMeasure,
    lebesgue: bool,
) -> Option<f64> {
    let rate = source?.analytic_entropy_rate(Some(reference)).ok()?.nats;
    if !lebesgue {
        return Some(rate);
    }
    let mean_ln_ref = match reference {
        ReferenceMeasure::Uniform01 => 0.0,
        // Stationary marginal is N(0,1): E[ln φ(X)] = −(ln 2π + 1)/2.
        ReferenceMeasure::StandardGaussian => -0.5 * ((2.0 * std::f64::consts::PI).ln() + 1.0),
    };
    Some(rate - mean_ln_ref)
}

// ---------------------------------------------------------------- density --

fn density(args: DensityArgs) -> Result<(), CliError> {
    let mut report = Report::new("density");
    args.data.echo(&mut report);
    let history = match args.data.resolve()? {
        Data::Source(source) if source.is_real_valued() => {
            require_positive(args.n, "n")?;
            report.config("n", args.n);
            report.config("seed", args.seed);
            source.sample_reals(args.n, args.seed)
        }
        Data::RealFile(xs) => {
            require_positive(xs.len(), "input length")?;
            report.config("n", xs.len());
            xs
        }
        _ => return Err(CliError::Config("density needs real-valued data".into())),
    };
    if args.grid < 2 {
        return Err(CliError::Config("grid must be >= 2".into()));
    }
    let reference = args.reference.unwrap_or(ReferenceArg::Uniform);
    let max_level = parse_rmax(&args.rmax)?;
    args.mixture.echo(&mut report);
    report.config("reference", reference.name());
    report.config("rmax", max_level.resolve(history.len() + 1));
    report.config("grid", args.grid);
    let config = npd_config(reference.measure(), &args.mixture, max_level);
    report.columns(&["x", "predictive_density"]);
    // Evaluation points sit at evenly spaced reference quantiles, clipped
    // away from the tails so Gaussian support stays finite.
    for i in 0..args.grid {
        let p = 0.001 + 0.998 * i as f64 / (args.grid - 1) as f64;
        let x = reference.measure().quantile(p);
        let d = predictive_density(x, &history, &config).map_err(config_err)?;
        report.row(vec![num(x), num(d)]);
    }
    write(&report, &args.out)
}

// ---------------------------------------------------------------- predict --

fn predict(args: PredictArgs) -> Result<(), CliError> {
    let mut report = Report::new("predict");
    args.data.echo(&mut report);
    let (seq, bayes) = match args.data.resolve()? {
        Data::Source(source) => {
            if source.is_real_valued() {
                return Err(CliError::Config("predict needs a finite alphabet".into()));
            }
            require_positive(args.n, "n")?;
            report.config("n", args.n);
            report.config("seed", args.seed);
            (
                source.sample_symbols(args.n, args.seed),
                source.bayes_error(),
            )
        }
        Data::SymbolFile(seq) => {
            require_positive(seq.len(), "input length")?;
            report.config("n", seq.len());
            (seq, None)
        }
        Data::RealFile(_) => {
            return Err(CliError::Config(
                "predict needs a finite alphabet (pass --alphabet with --input)".into(),
            ));
        }
    };
    args.mixture.echo(&mut report);
    let trace = run_prediction_ppm(
        &seq,
        &args.mixture.mixture(seq.alphabet()),
        RunnerConfig::default(),
    );
    report.columns(&["n", "mistake_density", "bayes_density"]);
    for g in log_grid(seq.len()) {
        report.row(vec![
            num(g as f64),
            num(trace.mistake_density_through(g)),
            bayes.map(num).unwrap_or_default(),
        ]);
    }
    write(&report, &args.out)
}

// ------------------------------------------------------------- diagnostic --

fn diagnostic(args: DiagnosticArgs) -> Result<(), CliError> {
    let source = parse_source(&args.source)?;
    let Some(alphabet) = source.alphabet() else {
        return Err(CliError::Config(
            "diagnostic needs a finite-alphabet source".into(),
        ));
    };
    require_positive(args.n, "n")?;
    require_positive(args.replicas, "replicas")?;
    let mut report = Report::new("diagnostic");
    report.config("source", &args.source);
    report.config("n", args.n);
    report.config("replicas", args.replicas);
    report.config("seed", args.seed);
    args.mixture.echo(&mut report);
    let grid = log_grid(args.n);
    let points = log_ratio_diagnostic(
        &source,
        &args.mixture.mixture(alphabet),
        &grid,
        args.replicas,
        args.seed,
        RunnerConfig::default(),
    );
    report.columns(&["n", "mean_log_ratio", "replicas"]);
    for pt in points {
        report.row(vec![
            num(pt.history_len as f64),
            num(pt.mean_log_ratio),
            args.replicas.to_string(),
        ]);
    }
    write(&report, &args.out)
}

// ----------------------------------------------------------------- sample --

fn sample(args: SampleArgs) -> Result<(), CliError> {
    let source = parse_source(&args.source)?;
    require_positive(args.n, "n")?;
    let mut report = Report::new("sample");
    report.config("source", &args.source);
    report.config("n", args.n);
    report.config("seed", args.seed);
    report.columns(&[]);
    if source.is_real_valued() {
        for x in source.sample_reals(args.n, args.seed) {
            report.row(vec![num(x)]);
        }
    } else {
        for &s in source.sample_symbols(args.n, args.seed).symbols() {
            report.row(vec![s.to_string()]);
        }
    }
    write(&report, &args.out)
}
