use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use valley_codes::bitstream::{BitString, Format};
use valley_codes::channel::{transmit, ChannelModel, RngSpec};
use valley_codes::harness::{
    self, bounds_csv, bounds_table, plan_report, run_experiment, CodeSource, ExperimentConfig, RecursiveParams,
    SearchSpec,
};
use valley_codes::inner_code::{InnerCodec, SearchStrategy};
use valley_codes::recursive::RecursiveCode;

const EXIT_DECODE_FAILURE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "valley-codes", version, about = "Synchronization codes for deletion and repeat channels")]
struct Cli {
    /// Master seed for every random choice
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for trial campaigns
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Report format on standard output
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Experiment config (JSON); flags take precedence over its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Send a bit file through a channel
    Transmit {
        #[arg(long, value_parser = parse_channel)]
        channel: ChannelModel,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Monte-Carlo decoding failure probability
    Dfp(DfpArgs),
    /// Parameters for successive recursive levels
    Plan {
        #[arg(long)]
        k_base: usize,
        /// Block length of the base code [default: 3 * k-base]
        #[arg(long)]
        n_base: Option<usize>,
        #[arg(long)]
        delta_base: f64,
        #[arg(long, value_parser = parse_channel)]
        channel: ChannelModel,
        #[arg(long)]
        levels: usize,
        /// Choose level-0 redundancy from the base DFP instead of k^(2/3)
        #[arg(long)]
        bridge: bool,
    },
    /// Search for a base code
    Search {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_channel)]
        channel: ChannelModel,
        #[arg(long)]
        target: f64,
        #[arg(long, value_enum, default_value = "exhaustive")]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 1 << 20)]
        budget: u64,
        /// Fixture file to write
        #[arg(long)]
        output: PathBuf,
    },
    /// Table of every bound over a default parameter grid
    Bounds,
    /// Encode a message file
    Encode {
        /// Recursive code config or inner code fixture
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Decode a received file
    Decode {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Write the decoder trace (recursive codes only)
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Exhaustive,
    Random,
}

#[derive(Debug, Args)]
struct DfpArgs {
    /// Inner code fixture
    #[arg(long, conflicts_with = "recursive_config")]
    fixture: Option<PathBuf>,
    /// Recursive code config
    #[arg(long)]
    recursive_config: Option<PathBuf>,
    /// Wrap the fixture in one recursive step with this many correctable symbols
    #[arg(long, requires = "d", requires = "fixture")]
    t: Option<usize>,
    #[arg(long, requires = "t")]
    d: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    /// Channel to simulate [default: the code's own]
    #[arg(long, value_parser = parse_channel)]
    channel: Option<ChannelModel>,
    /// Write per-trial rows here
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the full report here
    #[arg(long)]
    json: Option<PathBuf>,
}

fn parse_channel(s: &str) -> Result<ChannelModel, String> {
    let (kind, param) = s.split_once(':').ok_or("expected bdc:<p> or prc:<lambda>")?;
    let param: f64 = param.parse().map_err(|e| format!("{param}: {e}"))?;
    match kind {
        "bdc" => ChannelModel::bdc(param),
        "prc" => ChannelModel::prc(param),
        _ => return Err(format!("unknown channel {kind}")),
    }
    .map_err(|e| e.to_string())
}

enum Failure {
    Input(String),
    Usage(String),
    Decode(String),
}

impl<E: Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn read_bits(path: &Path) -> Result<BitString, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    BitString::deserialize(&bytes, Format::from_path(path)).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> CmdResult {
    std::fs::write(path, bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_bits(path: &Path, bits: &BitString) -> CmdResult {
    write_file(path, bits.serialize(Format::from_path(path)))
}

fn print_json<T: Serialize>(value: &T) -> CmdResult {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn load_code(path: &Path) -> Result<Arc<dyn InnerCodec>, Failure> {
    Ok(harness::load_codec(path)?)
}

struct Globals {
    seed: u64,
    workers: usize,
    format: OutputFormat,
    experiment: Option<ExperimentConfig>,
}

fn cmd_transmit(g: &Globals, channel: ChannelModel, input: &Path, output: &Path) -> CmdResult {
    let x = read_bits(input)?;
    let y = transmit(channel, &x, RngSpec::new(g.seed, 0));
    write_bits(output, &y)?;
    println!("{}", serde_json::json!({ "input_len": x.len(), "output_len": y.len() }));
    Ok(())
}

fn cmd_dfp(g: &Globals, args: &DfpArgs) -> CmdResult {
    let source = match (&args.fixture, &args.recursive_config) {
        (Some(path), _) => {
            let recursive = args.t.zip(args.d).map(|(t, d)| RecursiveParams { t, d });
            Some(CodeSource::Fixture { path: path.clone(), recursive })
        }
        (None, Some(path)) => Some(CodeSource::Recursive { path: path.clone() }),
        (None, None) => None,
    };
    let mut cfg = match (g.experiment.clone(), source) {
        (Some(mut cfg), source) => {
            if let Some(source) = source {
                cfg.code = source;
            }
            cfg
        }
        (None, Some(source)) => ExperimentConfig::new(source, 10_000),
        (None, None) => return Err(Failure::Usage("dfp needs --fixture, --recursive-config or --config".into())),
    };
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if args.channel.is_some() {
        cfg.channel = args.channel;
    }
    if args.csv.is_some() {
        cfg.outputs.csv = args.csv.clone();
    }
    if args.json.is_some() {
        cfg.outputs.json = args.json.clone();
    }
    cfg.master_seed = g.seed;
    cfg.workers = Some(g.workers);
    let report = run_experiment(&cfg, g.workers)?;
    eprintln!(
        "{} trials in {:.3} s ({} workers)",
        report.trials,
        report.elapsed.as_secs_f64(),
        g.workers
    );
    if let Some(path) = &cfg.outputs.csv {
        write_file(path, report.to_csv()?)?;
    }
    if let Some(path) = &cfg.outputs.json {
        write_file(path, serde_json::to_string_pretty(&report)?)?;
    }
    match g.format {
        OutputFormat::Json => print_json(&report.summary()),
        OutputFormat::Csv => {
            print!("{}", report.to_csv()?);
            Ok(())
        }
    }
}

fn cmd_plan(
    g: &Globals,
    k_base: usize,
    n_base: Option<usize>,
    delta_base: f64,
    channel: ChannelModel,
    levels: usize,
    bridge: bool,
) -> CmdResult {
    if levels == 0 {
        return Err(Failure::Usage("--levels must be at least 1".into()));
    }
    let plan = plan_report(k_base, n_base.unwrap_or(3 * k_base), delta_base, channel, levels, bridge)?;
    match g.format {
        OutputFormat::Json => print_json(&plan),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record([
                "level", "k", "n", "delta", "t", "d", "alpha", "beta", "f_estimate", "n_prime", "rate", "dfp_bound",
                "rate_overhead_x", "final_rate_bound",
            ])?;
            let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
            for p in &plan {
                let c = &p.level.config;
                w.write_record([
                    p.level.level.to_string(),
                    c.inner.k.to_string(),
                    c.inner.n.to_string(),
                    c.inner.delta.to_string(),
                    c.t.to_string(),
                    c.d.to_string(),
                    c.derived.alpha.to_string(),
                    c.derived.beta.to_string(),
                    c.derived.f_estimate.to_string(),
                    c.derived.n_prime.to_string(),
                    p.level.rate.to_string(),
                    opt(p.level.dfp_bound.map(|b| b.total)),
                    opt(p.rate_overhead_x),
                    opt(p.final_rate_bound),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn cmd_search(g: &Globals, spec: SearchSpec, channel: ChannelModel, output: &Path) -> CmdResult {
    let code = harness::run_search(&spec, channel, g.seed)?;
    code.save(output)?;
    print_json(&code.to_fixture())
}

fn cmd_bounds(g: &Globals) -> CmdResult {
    let rows = bounds_table();
    match g.format {
        OutputFormat::Json => print_json(&rows),
        OutputFormat::Csv => {
            print!("{}", bounds_csv(&rows)?);
            Ok(())
        }
    }
}

fn cmd_encode(code: &Path, input: &Path, output: &Path) -> CmdResult {
    let code = load_code(code)?;
    let message = read_bits(input)?;
    if message.len() != code.message_len() {
        return Err(Failure::Input(format!(
            "message has {} bits, the code takes {}",
            message.len(),
            code.message_len()
        )));
    }
    write_bits(output, &code.encode(&message))
}

fn cmd_decode(code_path: &Path, input: &Path, output: &Path, trace: Option<&Path>) -> CmdResult {
    let code = load_code(code_path)?;
    let received = read_bits(input)?;
    let result = match trace {
        Some(trace_path) => {
            let recursive = harness::load_recursive(code_path)
                .map_err(|_| Failure::Usage("--trace needs a recursive code config".into()))?;
            let (result, trace) = RecursiveCode::decode_traced(&recursive, &received);
            write_file(trace_path, serde_json::to_string_pretty(&trace)?)?;
            result.map_err(|e| e.to_string())
        }
        None => code.decode(&received).map_err(|e| e.to_string()),
    };
    match result {
        Ok(message) => write_bits(output, &message),
        Err(e) => Err(Failure::Decode(e)),
    }
}

fn run(cli: Cli) -> CmdResult {
    let experiment = match &cli.config {
        Some(path) => Some(ExperimentConfig::load(path)?),
        None => None,
    };
    let workers = cli
        .workers
        .or(experiment.as_ref().and_then(|e| e.workers))
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(Failure::Usage("--workers must be at least 1".into()));
    }
    let g = Globals {
        seed: cli.seed.or(experiment.as_ref().map(|e| e.master_seed)).unwrap_or(0),
        workers,
        format: cli.format.unwrap_or(OutputFormat::Json),
        experiment,
    };
    match &cli.command {
        Command::Transmit { channel, input, output } => cmd_transmit(&g, *channel, input, output),
        Command::Dfp(args) => cmd_dfp(&g, args),
        Command::Plan { k_base, n_base, delta_base, channel, levels, bridge } => {
            cmd_plan(&g, *k_base, *n_base, *delta_base, *channel, *levels, *bridge)
        }
        Command::Search { k, n, channel, target, strategy, budget, output } => {
            let strategy = match strategy {
                StrategyArg::Exhaustive => SearchStrategy::Exhaustive,
                StrategyArg::Random => SearchStrategy::Random,
            };
            let spec = SearchSpec { k: *k, n: *n, target_delta: *target, strategy, budget: *budget };
            cmd_search(&g, spec, *channel, output)
        }
        Command::Bounds => cmd_bounds(&g),
        Command::Encode { code, input, output } => cmd_encode(code, input, output),
        Command::Decode { code, input, output, trace } => cmd_decode(code, input, output, trace.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{}", Cli::command().render_usage());
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Decode(msg)) => {
            eprintln!("decode failed: {msg}");
            ExitCode::from(EXIT_DECODE_FAILURE)
        }
    }
}
