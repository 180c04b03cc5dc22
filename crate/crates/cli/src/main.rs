use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use lhf::construct::{emit_plan, normalize, parse_spec};
use lhf::pointsto::{Cfg, PtaConstruction, BRANCH_JOIN_CFG};
use lhf::workload::{
    diff_digests, generate, parse, read_digest, run_lhf, run_naive, serialize, write_digest,
    GenParams, Mode, RunOptions, RunOutcome, Target,
};
use lhf::{OpCounters, OpKind};

const CSV_HEADER: &str = "engine,mode,target,ops,kind,invocations,hits,equal_hits,subset_hits,empty_hits,cold_misses,edge_misses,cumulative_ns,sets_registered,memo_entries,logical_bytes";

#[derive(Parser)]
#[command(name = "lhf", version, about = "Memoized set storage: workloads, engines and demos")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded instruction stream.
    Generate(GenerateArgs),
    /// Execute an instruction stream and write a CSV report and a digest.
    Run(RunArgs),
    /// Run the flow-sensitive points-to analysis on a CFG file.
    DemoPointsto {
        /// CFG file; the bundled branch-and-join example when omitted.
        #[arg(long)]
        cfg: Option<PathBuf>,
    },
    /// Print the normalized plan of a JSON construction spec.
    Normalize {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Claim1,
    Pessimistic,
    Optimistic,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Scalar,
    Pointsto,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Lhf,
    Naive,
}

#[derive(clap::Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "scalar")]
    target: TargetArg,
    #[arg(long)]
    ops: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    max_value: u64,
    #[arg(long, default_value_t = 200)]
    max_size: usize,
    #[arg(long, default_value_t = 300)]
    corpus: usize,
    /// A GROW is emitted before an operation with probability 1/N.
    #[arg(long, default_value_t = 1000)]
    grow_one_in: u64,
    /// Longest GROW segment; a tenth of the corpus when omitted.
    #[arg(long)]
    max_segment: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    engine: EngineArg,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    digest: PathBuf,
    /// Digest of another run; exit with status 1 if the results differ.
    #[arg(long)]
    verify_against: Option<PathBuf>,
}

/// Input problems exit with 2, failed verification with 1.
enum Failure {
    Input(anyhow::Error),
    Mismatch(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args).map_err(Failure::from),
        Command::Run(args) => cmd_run(args),
        Command::DemoPointsto { cfg } => cmd_demo_pointsto(cfg.as_deref()).map_err(Failure::from),
        Command::Normalize { spec } => cmd_normalize(&spec).map_err(Failure::from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let mode = match args.mode {
        ModeArg::Claim1 => Mode::Claim1,
        ModeArg::Pessimistic => Mode::Pessimistic,
        ModeArg::Optimistic => Mode::Optimistic,
    };
    let target = match args.target {
        TargetArg::Scalar => Target::Scalar,
        TargetArg::Pointsto => Target::PointsTo,
    };
    let params = GenParams {
        max_value: args.max_value,
        max_size: args.max_size,
        corpus_size: args.corpus,
        grow_one_in: args.grow_one_in,
        max_segment: args.max_segment.unwrap_or((args.corpus / 10).max(1)),
        ..GenParams::new(mode, target, args.ops, args.seed)
    };
    let workload = generate(&params)?;
    fs::write(&args.out, serialize(&workload))
        .with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let workload = parse(&text).with_context(|| format!("parsing {}", args.input.display()))?;
    let outcome = match args.engine {
        EngineArg::Lhf => run_lhf(&workload, RunOptions::default()),
        EngineArg::Naive => run_naive(&workload, RunOptions::default()),
    }
    .context("executing stream")?;

    let mode = workload.header_field("mode").unwrap_or("unknown");
    let target = outcome
        .target
        .map(Target::name)
        .or_else(|| workload.header_field("target"))
        .unwrap_or("unknown");
    write_file(&args.report, |w| write_report(w, &outcome, mode, target))?;
    write_file(&args.digest, |w| write_digest(w, &outcome.digest))?;

    println!(
        "{} ops={} sets={} memo={} logical_bytes={} op_ns={}",
        outcome.engine,
        outcome.ops,
        outcome.sets_registered,
        outcome.memo_entries,
        outcome.logical_units * 8,
        outcome.operation_nanos()
    );
    if let Some(path) = &args.verify_against {
        let file = fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
        let expected = read_digest(BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))?;
        if let Some(pos) = diff_digests(&outcome.digest, &expected) {
            return Err(Failure::Mismatch(format!(
                "digests first differ at corpus position {pos}"
            )));
        }
        println!("digest matches {}", path.display());
    }
    Ok(())
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .with_context(|| format!("writing {}", path.display()))
}

fn write_report<W: Write>(w: &mut W, o: &RunOutcome, mode: &str, target: &str) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    let mut row = |kind: &str, invocations: u64, c: OpCounters, nanos: u64| {
        writeln!(
            w,
            "{},{mode},{target},{},{kind},{invocations},{},{},{},{},{},{},{nanos},{},{},{}",
            o.engine,
            o.ops,
            c.hits,
            c.equal_hits,
            c.subset_hits,
            c.empty_hits,
            c.cold_misses,
            c.edge_misses,
            o.sets_registered,
            o.memo_entries,
            o.logical_units * 8
        )
    };
    for kind in [OpKind::Union, OpKind::Intersection, OpKind::Difference] {
        let t = o.timing(kind);
        let c = o.stats.map(|s| *s.get(kind)).unwrap_or_default();
        row(kind.name(), t.invocations, c, t.nanos)?;
    }
    row("register", o.register.invocations, OpCounters::default(), o.register.nanos)?;
    if let Some(child) = o.child_stats {
        for kind in [OpKind::Union, OpKind::Intersection, OpKind::Difference] {
            let c = *child.get(kind);
            row(&format!("pointee_{}", kind.name()), c.invocations(), c, 0)?;
        }
    }
    Ok(())
}

fn cmd_demo_pointsto(cfg: Option<&Path>) -> Result<()> {
    let text = match cfg {
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        None => BRANCH_JOIN_CFG.to_string(),
    };
    let mut pta = PtaConstruction::new();
    let graph = Cfg::parse(&text, &mut pta).context("parsing CFG")?;
    let analysis = pta.analyze(&graph)?;
    print!("{}", pta.report(&graph, &analysis)?);
    Ok(())
}

fn cmd_normalize(spec: &Path) -> Result<()> {
    let text = fs::read_to_string(spec).with_context(|| format!("reading {}", spec.display()))?;
    let parsed = parse_spec(&text).with_context(|| format!("parsing {}", spec.display()))?;
    print!("{}", emit_plan(&normalize(&parsed)));
    Ok(())
}
