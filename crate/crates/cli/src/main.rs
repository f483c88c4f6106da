use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use expint_core::martingale::parse_manifest;
use expint_core::suites::{eval_named, run_suite, Suite, SuiteConfig, SuiteOutput};
use expint_core::verify::{to_json_lines, Tolerances};
use expint_core::Error;

#[derive(Parser, Debug)]
#[command(name = "expint-lab", version, about = "Special-function, Bellman, heat-flow and martingale checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kernel and special-function checks, or a single evaluation with --eval
    Kernel {
        /// Evaluate NAME at the given arguments, e.g. `--eval F 2.0`
        #[arg(long, num_args = 2.., value_names = ["NAME", "ARGS"], allow_negative_numbers = true)]
        eval: Option<Vec<String>>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Static inequality checks over grids and random scans
    Verify(RunArgs),
    /// Heat-flow monotonicity, endpoint chain and sharpness table
    Flow(RunArgs),
    /// Dyadic martingale checks
    Martingale {
        /// File of `depth seed law` lines replacing the random batch
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Exploratory scans; never affect the exit code
    Scan(RunArgs),
    /// Every suite above
    All(RunArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Main random sample count of the suite
    #[arg(long)]
    samples: Option<u64>,
    /// Gauss-Hermite nodes for heat-flow quadrature
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u64).range(8..=1024))]
    nodes: u64,
    /// Largest martingale depth in the random batch
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(0..=16))]
    depth: u64,
    /// Override a named tolerance, `name=value`; repeatable
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Write reports here; tables go next to it as `<out>.<table>.tsv`
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Worker threads
    #[arg(long, env = "EXPINT_JOBS", value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
    /// Include wall-clock times in machine output
    #[arg(long)]
    timing: bool,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse(_) | Error::Io(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn config(run: &RunArgs) -> Result<SuiteConfig, Failure> {
    let mut tolerances = Tolerances::default();
    for t in &run.tol {
        tolerances.apply(t)?;
    }
    Ok(SuiteConfig {
        seed: run.seed,
        samples: run.samples,
        nodes: run.nodes as usize,
        depth: run.depth as usize,
        tolerances,
        manifest: None,
    })
}

fn init_pool(run: &RunArgs) -> Result<(), Failure> {
    if let Some(j) = run.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j as usize)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    Ok(())
}

fn render(out: &SuiteOutput, format: Format, timing: bool) -> String {
    match format {
        Format::Machine => to_json_lines(&out.reports, timing),
        Format::Human => {
            let mut s = String::new();
            for r in &out.reports {
                s.push_str(&r.to_human());
                s.push('\n');
            }
            s
        }
    }
}

fn table_path(out: &Path, name: &str) -> PathBuf {
    let mut p = out.as_os_str().to_owned();
    p.push(format!(".{name}.tsv"));
    PathBuf::from(p)
}

fn emit(suite: Suite, out: &SuiteOutput, run: &RunArgs) -> Result<bool, Failure> {
    let text = render(out, run.format, run.timing);
    match &run.out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            for (name, body) in &out.tables {
                let p = table_path(path, name);
                std::fs::write(&p, body).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display())))?;
            }
            if run.format == Format::Human {
                print!("{text}");
            }
        }
        None => print!("{text}"),
    }
    let passed = out.passed();
    if !passed {
        eprintln!("suite '{suite}' FAILED; worst witnesses:");
        for r in out.reports.iter().filter(|r| r.gating && !r.passed) {
            eprintln!("  {}: min_margin={:e} tol={:e} witness={:?}", r.check_name, r.min_margin, r.tolerance, r.worst_witness);
        }
    } else if run.format == Format::Human {
        println!("suite '{suite}': all gating checks passed");
    }
    Ok(passed)
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let (suite, run, cfg) = match &cli.command {
        Command::Kernel { eval: Some(spec), run } => {
            let args = spec[1..]
                .iter()
                .map(|a| a.parse::<f64>().map_err(|_| Failure::Usage(format!("'{a}' is not a number"))))
                .collect::<Result<Vec<_>, _>>()?;
            let v = eval_named(&spec[0], &args)?;
            match run.format {
                Format::Human => {
                    let bound = v.error_bound.map_or("unknown".to_string(), |e| format!("{e:.3e}"));
                    println!("{}({}) = {:.17e}  (error bound {bound})", v.name, spec[1..].join(", "), v.value);
                }
                Format::Machine => println!(
                    "{{\"name\":\"{}\",\"args\":{:?},\"value\":{:e},\"error_bound\":{}}}",
                    v.name,
                    v.args,
                    v.value,
                    v.error_bound.map_or("null".to_string(), |e| format!("{e:e}"))
                ),
            }
            return Ok(true);
        }
        Command::Kernel { eval: None, run } => (Suite::Kernel, run, config(run)?),
        Command::Verify(run) => (Suite::Verify, run, config(run)?),
        Command::Flow(run) => (Suite::Flow, run, config(run)?),
        Command::Martingale { manifest, run } => {
            let mut cfg = config(run)?;
            if let Some(path) = manifest {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
                cfg.manifest = Some(parse_manifest(&text)?);
            }
            (Suite::Martingale, run, cfg)
        }
        Command::Scan(run) => (Suite::Scan, run, config(run)?),
        Command::All(run) => (Suite::All, run, config(run)?),
    };
    init_pool(run)?;
    let out = run_suite(suite, &cfg)?;
    emit(suite, &out, run)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
