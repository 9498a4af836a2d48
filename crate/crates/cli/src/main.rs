use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use episodic::bench::{self, BenchConfig, Suite};
use episodic::datagen::{self, GenConfig};
use episodic::miner::{self, MiningConfig};
use episodic::{
    format_episode, load_stream, parse_constraints, parse_episode, oracle, write_stream, CompactionStrategy,
    Counter, Direction, EventStream, IntervalConstraint, ParseError, SymbolTable, TypeIndex, Workers,
};

#[derive(Parser)]
#[command(name = "episodic", version, about = "Count and mine serial episodes with inter-event constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic spike train with embedded episodes.
    Generate(GenerateArgs),
    /// Count non-overlapped occurrences of one episode.
    Count(CountArgs),
    /// Level-wise mining of frequent episodes.
    Mine(MineArgs),
    /// Timing sweeps across backends and worker counts.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 64)]
    neurons: usize,
    /// Recording length in seconds.
    #[arg(long, default_value_t = 100.0)]
    duration: f64,
    /// Background firing rate per neuron in Hz.
    #[arg(long, default_value_t = 20.0)]
    rate: f64,
    /// Episode to inject, as EPISODE:RATE_HZ. Repeatable.
    #[arg(long)]
    embed: Vec<String>,
    /// Also inject this many episodes over distinct randomly chosen neurons.
    #[arg(long, default_value_t = 0)]
    standard: usize,
    #[arg(long, default_value_t = 9)]
    standard_length: usize,
    #[arg(long, default_value_t = 1.0)]
    standard_rate: f64,
    #[arg(long, default_value = "(5,10]")]
    standard_constraint: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Event file to write; the injection log goes to FILE.truth.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Fsm,
    Tracking,
    Mapconcat,
    Oracle,
}

#[derive(Args)]
struct BackendArgs {
    #[arg(long, value_parser = parse_strategy, default_value = "csw")]
    strategy: CompactionStrategy,
    #[arg(long, value_parser = parse_direction, default_value = "fwd")]
    direction: Direction,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, env = "EPISODIC_WORKERS")]
    workers: Option<usize>,
    /// Segment count for mapconcat; defaults to the worker count.
    #[arg(long)]
    segments: Option<usize>,
}

impl BackendArgs {
    fn workers(&self) -> Workers {
        self.workers.map_or_else(Workers::available, Workers::new)
    }

    fn counter(&self, algo: Algo, workers: &Workers) -> Counter {
        match algo {
            Algo::Fsm => Counter::Fsm,
            Algo::Mapconcat => Counter::MapConcat { segments: self.segments.unwrap_or(workers.threads()).max(1) },
            Algo::Tracking | Algo::Oracle => Counter::Tracking { direction: self.direction, strategy: self.strategy },
        }
    }
}

#[derive(Args)]
struct CountArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    episode: String,
    #[arg(long, value_enum, default_value = "tracking")]
    algo: Algo,
    #[command(flatten)]
    backend: BackendArgs,
    /// Print the CSV header line first.
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct MineArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    threshold: u64,
    /// Constraint alphabet, e.g. "(5,10];(10,15]".
    #[arg(long)]
    constraints: String,
    #[arg(long, default_value_t = 9)]
    max_level: usize,
    /// First level counted one episode at a time with all workers.
    #[arg(long, default_value_t = miner::DEFAULT_SWITCH_LEVEL)]
    switch_level: usize,
    #[arg(long, value_enum, default_value = "tracking")]
    algo: Algo,
    #[command(flatten)]
    backend: BackendArgs,
    /// Per-level CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary destination; stderr when absent.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "datasets", value_parser = parse_suite)]
    suite: Suite,
    /// Target event counts.
    #[arg(long, value_delimiter = ',', default_value = "100000")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7,8,9")]
    lengths: Vec<usize>,
    /// Injection rates in Hz for the frequency suite.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,5,10")]
    rates: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Worker counts to time; defaults to the number of logical cores.
    #[arg(long, value_delimiter = ',', env = "EPISODIC_WORKERS")]
    workers: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    episode_len: usize,
    #[arg(long, default_value_t = 1.0)]
    frequency: f64,
    #[arg(long)]
    segments: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_strategy(s: &str) -> Result<CompactionStrategy, String> {
    s.parse()
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    s.parse()
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse()
}

/// An error together with the exit status it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

const USAGE: u8 = 1;
const DATA: u8 = 2;

trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn data(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: USAGE, error: e.into() })
    }

    fn data(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: DATA, error: e.into() })
    }
}

fn load(path: &Path) -> Result<(EventStream, SymbolTable), Failure> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display())).data()?;
    load_stream(BufReader::new(file)).with_context(|| format!("cannot read {}", path.display())).data()
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).with_context(|| format!("cannot create {}", path.display())).data()
}

/// Episode syntax errors are usage errors; names missing from the data are data errors.
fn episode_error(e: ParseError) -> Failure {
    let code = if matches!(e, ParseError::UnknownType { .. }) { DATA } else { USAGE };
    Failure { code, error: anyhow!(e).context("invalid episode") }
}

fn single_constraint(text: &str) -> Result<IntervalConstraint, Failure> {
    match parse_constraints(text).context("invalid constraint").usage()?.as_slice() {
        [c] => Ok(*c),
        _ => Err(Failure { code: USAGE, error: anyhow!("expected exactly one constraint, got {text:?}") }),
    }
}

fn generate(args: GenerateArgs) -> Result<(), Failure> {
    let symbols = datagen::neuron_symbols(args.neurons);
    let mut embedded = args
        .embed
        .iter()
        .map(|spec| datagen::parse_embedding(spec, &symbols))
        .collect::<Result<Vec<_>, _>>()
        .context("invalid --embed")
        .usage()?;
    if args.standard > 0 {
        if args.standard_length == 0 || args.standard_length > args.neurons {
            return Err(Failure { code: USAGE, error: anyhow!("--standard-length must be in 1..={}", args.neurons) });
        }
        let constraint = single_constraint(&args.standard_constraint)?;
        embedded.extend(datagen::standard_embeddings(
            args.neurons,
            args.standard,
            args.standard_length,
            constraint,
            args.standard_rate,
            args.seed,
        ));
    }
    let config = GenConfig {
        neurons: args.neurons,
        duration_s: args.duration,
        base_rate_hz: args.rate,
        embedded,
        seed: args.seed,
    };
    let generated = datagen::generate(&config).usage()?;

    let mut out = create(&args.out)?;
    write_stream(&generated.stream, &generated.symbols, &mut out).and_then(|_| out.flush()).data()?;
    let mut truth_path = args.out.into_os_string();
    truth_path.push(".truth.csv");
    let truth_path = PathBuf::from(truth_path);
    let mut truth = create(&truth_path)?;
    datagen::write_truth(&generated, &config.embedded, &mut truth).and_then(|_| truth.flush()).data()?;

    eprintln!("wrote {} events; injection log in {}", generated.stream.len(), truth_path.display());
    for ((episode, rate), log) in config.embedded.iter().zip(&generated.injections) {
        eprintln!("  {} at {rate} Hz: {} injected", format_episode(episode, &generated.symbols), log.len());
    }
    Ok(())
}

fn count(args: CountArgs) -> Result<(), Failure> {
    let (stream, symbols) = load(&args.data)?;
    let episode = parse_episode(&args.episode, &symbols).map_err(episode_error)?;
    let workers = args.backend.workers();
    let started = Instant::now();
    let n = if args.algo == Algo::Oracle {
        let all = oracle::enumerate_all(&stream, &episode).data()?;
        oracle::max_nonoverlap(&all)
    } else {
        let index = TypeIndex::build(&stream);
        args.backend.counter(args.algo, &workers).count(&stream, &index, &episode, &workers)
    };
    let elapsed = started.elapsed().as_secs_f64() * 1e3;
    let mut out = io::stdout().lock();
    let line = |out: &mut io::StdoutLock| -> io::Result<()> {
        if args.header {
            writeln!(out, "episode,count,elapsed_ms")?;
        }
        writeln!(out, "{},{n},{elapsed:.3}", miner::csv_field(&format_episode(&episode, &symbols)))
    };
    line(&mut out).data()
}

fn mine(args: MineArgs) -> Result<(), Failure> {
    let constraints = parse_constraints(&args.constraints).context("invalid --constraints").usage()?;
    if args.algo == Algo::Oracle {
        return Err(Failure { code: USAGE, error: anyhow!("mining does not support --algo oracle") });
    }
    let (stream, symbols) = load(&args.data)?;
    let workers = args.backend.workers();
    let mut config = MiningConfig::new(args.threshold, constraints);
    config.max_level = args.max_level;
    config.strategy_switch_level = args.switch_level;
    config.counter = args.backend.counter(args.algo, &workers);
    let report = miner::mine(&stream, &config, &workers).usage()?;

    match &args.out {
        Some(path) => {
            let mut out = create(path)?;
            miner::write_csv(&report, &symbols, &mut out).and_then(|_| out.flush()).data()?;
        }
        None => miner::write_csv(&report, &symbols, io::stdout().lock()).data()?,
    }
    let summary = miner::summary_json(&report, &config, args.data.to_str());
    match &args.summary {
        Some(path) => {
            let mut out = create(path)?;
            writeln!(out, "{summary}").and_then(|_| out.flush()).data()?;
        }
        None => eprintln!("{summary}"),
    }
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<(), Failure> {
    if args.workers.contains(&0) || args.repeats == 0 {
        return Err(Failure { code: USAGE, error: anyhow!("--workers and --repeats must be positive") });
    }
    if args.sizes.is_empty() {
        return Err(Failure { code: USAGE, error: anyhow!("--sizes needs at least one value") });
    }
    let config = BenchConfig {
        suite: args.suite,
        sizes: args.sizes,
        lengths: args.lengths,
        rates: args.rates,
        repeats: args.repeats,
        workers: if args.workers.is_empty() { vec![Workers::available().threads()] } else { args.workers },
        seed: args.seed,
        episode_len: args.episode_len,
        frequency: args.frequency,
        segments: args.segments,
        ..BenchConfig::default()
    };
    if config.episode_len == 0 || config.lengths.iter().chain([&config.episode_len]).any(|&l| l > config.neurons || l == 0)
    {
        return Err(Failure { code: USAGE, error: anyhow!("episode lengths must be in 1..={}", config.neurons) });
    }
    let rows = bench::run_suite(&config).usage()?;
    match &args.out {
        Some(path) => {
            let mut out = create(path)?;
            bench::write_csv(&rows, &mut out).and_then(|_| out.flush()).data()
        }
        None => bench::write_csv(&rows, io::stdout().lock()).data(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Count(a) => count(a),
        Command::Mine(a) => mine(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
