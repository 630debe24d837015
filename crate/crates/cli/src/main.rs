//! `wdnlip`: Lipschitz constants of water distribution networks.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wdn_lipschitz::bnb::DEFAULT_MAX_BOXES;
use wdn_lipschitz::estimate::Mode;
use wdn_lipschitz::inp::parse_inp;
use wdn_lipschitz::model::{build_dae, build_network, TimeMode};
use wdn_lipschitz::report::{
    analyze_with_progress, benchmark, benchmark_table_csv, benchmark_timing_csv, convergence,
    load_network, resolve_bounds, AnalysisConfig, BenchmarkOptions, MethodName, ModeSelection,
    ReportError,
};
use wdn_lipschitz::sampling::{decade_grid, trace_csv, SamplerKind};

#[derive(Parser)]
#[command(
    name = "wdnlip",
    version,
    about = "Lipschitz constants of water distribution networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate K and L for one network.
    Analyze(AnalyzeArgs),
    /// Run every network listed in a fixture directory's networks.csv.
    Benchmark(BenchmarkArgs),
    /// Point-based estimates over a grid of sample counts.
    Convergence(ConvergenceArgs),
    /// Parse an INP file and print its canonical JSON description.
    Parse { inp: PathBuf },
    /// Export the descriptor matrices as MatrixMarket files plus layout.json.
    Dae(DaeArgs),
    /// Print the flow box implied by the pump curves as a bounds CSV.
    DefaultBounds { inp: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampler {
    Random,
    Halton,
    Sobol,
}

impl From<Sampler> for SamplerKind {
    fn from(s: Sampler) -> Self {
        match s {
            Sampler::Random => SamplerKind::Random,
            Sampler::Halton => SamplerKind::Halton,
            Sampler::Sobol => SamplerKind::Sobol,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Max,
    Sqrt,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SingleMode {
    Max,
    Sqrt,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Args)]
struct BoundsArgs {
    /// Flow bounds CSV (`link_id,q_min,q_max`).
    #[arg(long, conflicts_with = "default_bounds")]
    bounds: Option<PathBuf>,
    /// Infer bounds from the pump curves instead of reading a file.
    #[arg(long)]
    default_bounds: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    inp: PathBuf,
    #[command(flatten)]
    bounds: BoundsArgs,
    /// Comma-separated subset of analytical, interval, point.
    #[arg(long, default_value = "analytical", value_delimiter = ',')]
    methods: Vec<String>,
    /// Absolute optimality gap for branch and bound.
    #[arg(long, default_value_t = 1e-2)]
    gap: f64,
    /// Branch-and-bound box budget.
    #[arg(long, default_value_t = DEFAULT_MAX_BOXES)]
    max_boxes: u64,
    /// Number of points for the point-based method.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, value_enum, default_value = "sobol")]
    sampler: Sampler,
    /// Seed for the random sampler.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Norm(s) for the interval and point methods.
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Also write the JSON report to this file.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Append branch-and-bound progress (JSON lines) to this file.
    #[arg(long)]
    progress: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Directory holding networks.csv and the files it names.
    fixture_dir: PathBuf,
    /// Comma-separated subset of network names.
    #[arg(long, value_delimiter = ',')]
    networks: Option<Vec<String>>,
    /// Gap for every network, overriding the manifest.
    #[arg(long)]
    gap: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MAX_BOXES)]
    max_boxes: u64,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, value_enum, default_value = "sobol")]
    sampler: Sampler,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Timing repeats; the median is reported.
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Directory for results.csv and timing.csv (default: print results only).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergenceArgs {
    inp: PathBuf,
    #[command(flatten)]
    bounds: BoundsArgs,
    /// Comma-separated samplers.
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "random,halton,sobol"
    )]
    samplers: Vec<Sampler>,
    /// Comma-separated sample counts (default 10 to 100000 by decades).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "max")]
    mode: SingleMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DaeArgs {
    inp: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Time step in seconds for the discrete form.
    #[arg(long, default_value_t = 3600.0, conflicts_with = "continuous")]
    dt: f64,
    /// Continuous-time form instead of a discrete step.
    #[arg(long)]
    continuous: bool,
}

fn io_err(path: &Path, e: std::io::Error) -> ReportError {
    ReportError::Config(format!("{}: {e}", path.display()))
}

fn bounds_for(
    net: &wdn_lipschitz::model::Network,
    args: &BoundsArgs,
) -> Result<wdn_lipschitz::domain::FlowBox, ReportError> {
    if args.bounds.is_none() && !args.default_bounds {
        return Err(ReportError::Config(
            "give --bounds FILE or --default-bounds".into(),
        ));
    }
    resolve_bounds(net, args.bounds.as_deref())
}

fn network_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn run_analyze(a: AnalyzeArgs) -> Result<(), ReportError> {
    let mut methods = Vec::new();
    for m in &a.methods {
        methods.push(
            MethodName::parse(m)
                .ok_or_else(|| ReportError::Config(format!("unknown method {m}")))?,
        );
    }
    let (net, counts) = load_network(&a.inp)?;
    let bounds = bounds_for(&net, &a.bounds)?;
    let config = AnalysisConfig {
        methods,
        gap: a.gap,
        max_boxes: a.max_boxes,
        samples: a.samples,
        sampler: a.sampler.into(),
        seed: a.seed,
        mode: match a.mode {
            ModeArg::Max => ModeSelection::Max,
            ModeArg::Sqrt => ModeSelection::Sqrt,
            ModeArg::Both => ModeSelection::Both,
        },
        default_bounds: a.bounds.default_bounds,
    };
    let mut progress = match &a.progress {
        Some(p) => Some(BufWriter::new(
            File::options()
                .create(true)
                .append(true)
                .open(p)
                .map_err(|e| io_err(p, e))?,
        )),
        None => None,
    };
    let report = analyze_with_progress(
        &network_name(&a.inp),
        &net,
        counts,
        &bounds,
        &config,
        progress.as_mut().map(|w| w as &mut dyn Write),
    )?;
    if let Some(p) = &a.output {
        std::fs::write(p, report.to_json() + "\n").map_err(|e| io_err(p, e))?;
    }
    match a.format {
        Format::Json => println!("{}", report.to_json()),
        Format::Csv => print!("{}", report.to_csv()),
        Format::Table => print!("{}", report.to_table()),
    }
    Ok(())
}

fn run_benchmark(a: BenchmarkArgs) -> Result<(), ReportError> {
    let opts = BenchmarkOptions {
        networks: a.networks,
        gap: a.gap,
        max_boxes: a.max_boxes,
        samples: a.samples,
        sampler: a.sampler.into(),
        seed: a.seed,
        repeats: a.repeats,
    };
    let rows = benchmark(&a.fixture_dir, &opts)?;
    let table = benchmark_table_csv(&rows);
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let results = dir.join("results.csv");
        std::fs::write(&results, &table).map_err(|e| io_err(&results, e))?;
        let timing = dir.join("timing.csv");
        std::fs::write(&timing, benchmark_timing_csv(&rows)).map_err(|e| io_err(&timing, e))?;
    }
    print!("{table}");
    for r in &rows {
        for v in r.ordering_violations() {
            eprintln!("ordering violated: {v}");
        }
        if let Some(e) = &r.error {
            eprintln!("{}: {e}", r.network);
        }
    }
    Ok(())
}

fn run_convergence(a: ConvergenceArgs) -> Result<(), ReportError> {
    let (net, _) = load_network(&a.inp)?;
    let bounds = bounds_for(&net, &a.bounds)?;
    let grid = a.n.unwrap_or_else(|| decade_grid(5));
    let samplers: Vec<SamplerKind> = a.samplers.into_iter().map(Into::into).collect();
    let mode = match a.mode {
        SingleMode::Max => Mode::Max,
        SingleMode::Sqrt => Mode::Sqrt,
    };
    let rows = convergence(&net, &bounds, &samplers, a.seed, &grid, mode)?;
    let csv = trace_csv(&rows);
    match &a.output {
        Some(p) => std::fs::write(p, csv).map_err(|e| io_err(p, e))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn read_desc(path: &Path) -> Result<wdn_lipschitz::inp::NetworkDescription, ReportError> {
    let text = std::fs::read_to_string(path).map_err(|e| ReportError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_inp(&text).map_err(|source| ReportError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn run(cli: Cli) -> Result<(), ReportError> {
    match cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::Benchmark(a) => run_benchmark(a),
        Command::Convergence(a) => run_convergence(a),
        Command::Parse { inp } => {
            println!("{}", read_desc(&inp)?.to_canonical_json());
            Ok(())
        }
        Command::Dae(a) => {
            let net = build_network(&read_desc(&a.inp)?);
            let mode = if a.continuous {
                TimeMode::Continuous
            } else {
                TimeMode::Discrete { dt: a.dt }
            };
            let dae = build_dae(&net, mode).map_err(|e| ReportError::Config(e.to_string()))?;
            dae.export(&a.out).map_err(|e| io_err(&a.out, e))
        }
        Command::DefaultBounds { inp } => {
            let (net, _) = load_network(&inp)?;
            print!("{}", resolve_bounds(&net, None)?.to_csv());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
