//! Command-line front end. `run` takes the argument list and output streams so
//! it can be driven from tests.
//!
//! Exit codes: 0 success, 1 usage error (bad flags, unknown method, invalid
//! sweep spec), 2 data or solver error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{
    gen_network, run_sweep, write_csv, ExperimentSpec, GenParams, SolverOptions, SweepVar, RNG_ID,
};
use crate::iterative::{IterativeConfig, Mode};
use crate::network::{load_network, load_network_unchecked, save_network, Method, SolveResult};
use crate::oracle::OracleConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "afsec", version, about = "Secrecy-rate optimisation for amplify-and-forward relay networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random degraded network.
    Gen(GenArgs),
    /// Optimise the relay amplification of a network file.
    Solve(SolveArgs),
    /// Average solvers over generated networks across a parameter sweep.
    Sweep(SweepArgs),
    /// Check a network file and report its properties.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    relays: usize,
    #[arg(long)]
    eavesdroppers: usize,
    #[arg(long, env = "AFSEC_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    p_s: f64,
    /// Power budget of every relay.
    #[arg(long, default_value_t = 5.0)]
    p_r: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Rayleigh scale of the channel gains.
    #[arg(long, default_value_t = 0.5)]
    scale: f64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Sum,
    Individual,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sum => Mode::Sum,
            ModeArg::Individual => Mode::Individual,
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Print the full result as JSON.
    #[arg(long)]
    json: bool,
    /// Report max(rate, 0).
    #[arg(long)]
    clamp: bool,
    /// Absolute bracket tolerance of the eta search (default 1e-4 * eta_max).
    #[arg(long)]
    delta: Option<f64>,
    /// Grid points per relay for the grid oracle (odd).
    #[arg(long, default_value_t = 101)]
    resolution: usize,
    /// Starting points for the multistart oracle.
    #[arg(long, default_value_t = 100)]
    starts: usize,
    #[arg(long, env = "AFSEC_SEED", default_value_t = 0)]
    seed: u64,
    /// Power constraint used by the oracles.
    #[arg(long, value_enum, default_value_t = ModeArg::Individual)]
    mode: ModeArg,
    /// h_e / h_d ratio for the scaled solver; detected from the file when omitted.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepVarArg {
    SourcePower,
    RelayCount,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// JSON experiment spec; the flags below are ignored when given.
    #[arg(long, conflicts_with_all = ["var", "from", "to", "steps"])]
    spec: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "spec")]
    var: Option<SweepVarArg>,
    #[arg(long, required_unless_present = "spec")]
    from: Option<f64>,
    #[arg(long, required_unless_present = "spec")]
    to: Option<f64>,
    #[arg(long, required_unless_present = "spec")]
    steps: Option<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Comma-separated solver names.
    #[arg(long, value_delimiter = ',', value_parser = parse_method,
          default_value = "sum_iterative,individual_iterative,zero_forcing")]
    methods: Vec<Method>,
    #[arg(long, env = "AFSEC_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    relays: usize,
    #[arg(long, default_value_t = 3)]
    eavesdroppers: usize,
    #[arg(long, default_value_t = 1.0)]
    p_s: f64,
    #[arg(long, default_value_t = 5.0)]
    p_r: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    #[arg(long, default_value_t = 0.5)]
    scale: f64,
    /// Report raw (possibly negative) rates.
    #[arg(long)]
    no_clamp: bool,
    /// Use the same networks at every sweep point.
    #[arg(long)]
    common_random_numbers: bool,
    /// CSV output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Metadata JSON; defaults to `<out>.meta.json` when `--out` is given.
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    file: PathBuf,
    #[arg(long)]
    json: bool,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse::<Method>().map_err(|_| {
        let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
        format!("unknown method `{s}` (expected one of: {})", names.join(", "))
    })
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_or_print(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_error(p, e)),
        None => out.write_all(text.as_bytes()).map_err(|e| io_error(Path::new("<stdout>"), e)),
    }
}

fn cmd_gen(args: GenArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let params = GenParams {
        rayleigh_scale: args.scale,
        p_s: args.p_s,
        p_r: args.p_r,
        sigma2: args.sigma2,
    };
    let net = gen_network(args.relays, args.eavesdroppers, args.seed, &params)?;
    match args.out {
        Some(path) => save_network(&net, path)?,
        None => {
            let text = serde_json::to_string_pretty(&net).expect("network serialises") + "\n";
            write_or_print(None, &text, out)?;
        }
    }
    Ok(())
}

fn cmd_solve(args: SolveArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let net = load_network(&args.net)?;
    let opts = SolverOptions {
        iterative: IterativeConfig {
            delta_abs: args.delta,
            ..IterativeConfig::default()
        },
        oracle: OracleConfig {
            resolution: args.resolution,
            n_starts: args.starts,
            seed: args.seed,
            mode: args.mode.into(),
            ..OracleConfig::default()
        },
        alpha: args.alpha,
    };
    let mut result: SolveResult = crate::experiments::run_method(&net, args.method, &opts)?;
    if args.clamp {
        result.secrecy_rate = result.clamped_rate();
    }
    let text = if args.json {
        serde_json::to_string_pretty(&result).expect("result serialises") + "\n"
    } else {
        let fmt = |xs: &[f64]| xs.iter().map(|x| format!("{x:.9}")).collect::<Vec<_>>().join(" ");
        format!(
            "method       {}\nsecrecy_rate {:.9} bits\nsnr_d        {:.9}\nsnr_e        {}\nbeta         {}\n",
            result.method,
            result.secrecy_rate,
            result.snr_d,
            fmt(&result.snr_e),
            fmt(&result.beta.beta)
        )
    };
    write_or_print(None, &text, out)?;
    Ok(())
}

#[derive(Serialize)]
struct SweepMetadata<'a> {
    tool: &'static str,
    version: &'static str,
    rng: &'static str,
    spec: &'a ExperimentSpec,
    skipped: &'a [crate::experiments::SkippedTrial],
}

fn sweep_spec(args: &SweepArgs) -> std::result::Result<ExperimentSpec, Failure> {
    let spec = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Data(io_error(path, e)))?;
            serde_json::from_str::<ExperimentSpec>(&text)
                .map_err(|e| Failure::Usage(format!("{}: invalid experiment spec: {e}", path.display())))?
        }
        None => ExperimentSpec {
            sweep: match args.var.expect("required by clap") {
                SweepVarArg::SourcePower => SweepVar::SourcePower,
                SweepVarArg::RelayCount => SweepVar::RelayCount,
            },
            from: args.from.expect("required by clap"),
            to: args.to.expect("required by clap"),
            steps: args.steps.expect("required by clap"),
            trials: args.trials,
            methods: args.methods.clone(),
            seed: args.seed,
            relays: args.relays,
            eavesdroppers: args.eavesdroppers,
            gen: GenParams {
                rayleigh_scale: args.scale,
                p_s: args.p_s,
                p_r: args.p_r,
                sigma2: args.sigma2,
            },
            clamp: !args.no_clamp,
            common_random_numbers: args.common_random_numbers,
        },
    };
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(spec)
}

fn cmd_sweep(args: SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> std::result::Result<(), Failure> {
    let spec = sweep_spec(&args)?;
    let result = run_sweep(&spec, &SolverOptions::default())?;

    let mut csv = Vec::new();
    write_csv(&result.rows, &mut csv)?;
    let csv = String::from_utf8(csv).expect("csv output is utf-8");
    write_or_print(args.out.as_deref(), &csv, out)?;

    let meta_path = args.meta.clone().or_else(|| {
        args.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".meta.json");
            PathBuf::from(s)
        })
    });
    if let Some(path) = meta_path {
        let meta = SweepMetadata {
            tool: "afsec",
            version: env!("CARGO_PKG_VERSION"),
            rng: RNG_ID,
            spec: &spec,
            skipped: &result.skipped,
        };
        let text = serde_json::to_string_pretty(&meta).expect("metadata serialises") + "\n";
        write_or_print(Some(&path), &text, out)?;
    }
    if !result.skipped.is_empty() {
        let _ = writeln!(err, "afsec: {} trial(s) skipped", result.skipped.len());
        for s in result.skipped.iter().take(10) {
            let _ = writeln!(err, "  {}={} {} trial {}: {}", spec.sweep.name(), s.value, s.method, s.trial, s.reason);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ValidationOutput {
    valid: bool,
    errors: Vec<String>,
    zero_destination_gains: Vec<usize>,
    degraded: bool,
    unknown_keys: Vec<String>,
}

fn cmd_validate(args: ValidateArgs, out: &mut dyn Write) -> std::result::Result<bool, Failure> {
    let (net, unknown_keys) = load_network_unchecked(&args.file)?;
    let report = net.validate();
    let output = ValidationOutput {
        valid: report.is_valid(),
        errors: report.errors,
        zero_destination_gains: report.zero_destination_gains,
        degraded: report.degraded,
        unknown_keys,
    };
    let text = if args.json {
        serde_json::to_string_pretty(&output).expect("report serialises") + "\n"
    } else {
        let mut s = format!(
            "valid={}\ndegraded={}\nrelays={}\neavesdroppers={}\n",
            output.valid, output.degraded, net.m, net.k
        );
        for e in &output.errors {
            s += &format!("error: {e}\n");
        }
        if !output.zero_destination_gains.is_empty() {
            s += &format!("zero destination gains at relays {:?}\n", output.zero_destination_gains);
        }
        for k in &output.unknown_keys {
            s += &format!("unknown key: {k}\n");
        }
        s
    };
    write_or_print(None, &text, out)?;
    Ok(output.valid)
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Solve(a) => cmd_solve(a, out),
        Command::Sweep(a) => cmd_sweep(a, out, err),
        Command::Validate(a) => match cmd_validate(a, out) {
            Ok(true) => Ok(()),
            Ok(false) => return EXIT_FAILURE,
            Err(f) => Err(f),
        },
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "afsec: {msg}\n\nUsage: afsec <gen|solve|sweep|validate> [OPTIONS]; see `afsec --help`");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(err, "afsec: {e}");
            EXIT_FAILURE
        }
    }
}
