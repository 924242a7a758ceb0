use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use steinctrl::experiment::{parse_kv, run_experiment, slopes_by_group, to_csv, to_json, ExperimentConfig};
use steinctrl::sampling::{default_resolution, fill_distance_1d_exact, unit_grid};
use steinctrl::{fill_distance, sample_iid_uniform, sample_torus_walk, ChainConfig, Domain, Error, Estimator};

#[derive(Parser)]
#[command(name = "steinctrl", version, about = "Control-functional integration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an MC / CF / LOOCF comparison and write one row per cell and estimator.
    Bench(Box<BenchArgs>),
    /// Fit log-log MSE slopes against n from a bench CSV.
    Slope(SlopeArgs),
    /// Fill distance of a sampled or gridded point set in the unit cube.
    Filldist(FillArgs),
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct BenchArgs {
    /// key=value file with the same names as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// iid or torus.
    #[arg(long)]
    design: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    omega: Option<String>,
    /// Kernel smoothness values, comma separated.
    #[arg(long)]
    b: Option<String>,
    /// Sample sizes, comma separated.
    #[arg(long)]
    n: Option<String>,
    /// Random-walk step sizes, comma separated (torus design).
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    /// Training fraction in (0, 1), or `opt`.
    #[arg(long)]
    rho: Option<String>,
    /// Fixed bandwidth, or `opt` to maximise the marginal likelihood.
    #[arg(long)]
    bandwidth: Option<String>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Subset of MC,CF,LOOCF.
    #[arg(long)]
    estimators: Option<String>,
    /// Fill the wall_time_ms column (output is then no longer reproducible).
    #[arg(long)]
    timing: bool,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct SlopeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "CF")]
    estimator: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum PointSet {
    Iid,
    Torus,
    Grid,
}

#[derive(Args)]
struct FillArgs {
    #[arg(long, value_enum, default_value = "iid")]
    points: PointSet,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Number of points, or points per axis for a grid.
    #[arg(long, default_value_t = 64)]
    m: usize,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluation grid spacing; a dimension-dependent default if omitted.
    #[arg(long)]
    resolution: Option<f64>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn threads_from_env() -> Result<usize, Failure> {
    match std::env::var("STEINCTRL_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("STEINCTRL_THREADS must be a nonnegative integer (got {v:?})"))),
        Err(_) => Ok(0),
    }
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let mut pairs: BTreeMap<String, String> = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
            parse_kv(&text)?
        }
        None => BTreeMap::new(),
    };
    let flags = [
        ("design", &args.design),
        ("d", &args.d),
        ("omega", &args.omega),
        ("b", &args.b),
        ("n", &args.n),
        ("eps", &args.eps),
        ("reps", &args.reps),
        ("rho", &args.rho),
        ("bandwidth", &args.bandwidth),
        ("c", &args.c),
        ("seed", &args.seed),
        ("estimators", &args.estimators),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            pairs.insert(k.to_string(), v.clone());
        }
    }
    if args.timing {
        pairs.insert("timing".into(), "true".into());
    }
    let out = args.out.or_else(|| pairs.remove("out").map(PathBuf::from));
    let format = match (args.format, pairs.remove("format")) {
        (Some(f), _) => f,
        (None, Some(f)) => Format::from_str(&f, true).map_err(|_| Failure::Usage(format!("unknown format {f:?}")))?,
        (None, None) => Format::Csv,
    };
    let mut cfg = ExperimentConfig::from_pairs(&pairs)?;
    cfg.threads = threads_from_env()?;

    let rows = run_experiment(&cfg).map_err(|e| Failure::Runtime(e.to_string()))?;
    let text = match format {
        Format::Csv => to_csv(&rows),
        Format::Json => to_json(&rows).map_err(|e| Failure::Runtime(e.to_string()))? + "\n",
    };
    match out {
        Some(path) => {
            fs::write(&path, text).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn slope(args: SlopeArgs) -> Result<(), Failure> {
    let est: Estimator = args.estimator.parse()?;
    let text = fs::read_to_string(&args.input)
        .map_err(|e| Failure::Runtime(format!("cannot read {}: {e}", args.input.display())))?;
    let rows = steinctrl::experiment::from_csv(&text)?;
    let groups = slopes_by_group(&rows, est);
    if groups.is_empty() {
        return Err(Failure::Usage(format!("no {est} rows in {}", args.input.display())));
    }
    for (g, s) in groups {
        let mut line = format!("estimator={est} d={} b={} omega={}", g.d, g.b, g.omega);
        if let Some(e) = g.eps {
            line += &format!(" eps={e}");
        }
        match s {
            Ok(s) => println!("{line} slope={s:.6}"),
            Err(e) => println!("{line} slope=NA ({e})"),
        }
    }
    Ok(())
}

fn filldist(args: FillArgs) -> Result<(), Failure> {
    if args.d == 0 || args.m == 0 {
        return Err(Failure::Usage("d and m must be positive".into()));
    }
    let pts = match args.points {
        PointSet::Iid => sample_iid_uniform(args.m, args.d, args.seed),
        PointSet::Torus => sample_torus_walk(&ChainConfig::new(args.d, args.eps, args.m, args.seed))?,
        PointSet::Grid => unit_grid(args.m, args.d),
    };
    let report = if args.d == 1 && args.resolution.is_none() {
        let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        fill_distance_1d_exact(&xs, 0.0, 1.0)?
    } else {
        let res = match args.resolution.or_else(|| default_resolution(args.d)) {
            Some(r) => r,
            None => return Err(Failure::Usage(format!("give --resolution for d = {}", args.d))),
        };
        fill_distance(&pts, &Domain::unit_cube(args.d), res)?
    };
    println!(
        "points={} d={} fill_distance={:.12} resolution={:e} slack={:e} exact={}",
        pts.len(),
        args.d,
        report.value,
        report.resolution,
        report.slack,
        report.exact
    );
    Ok(())
}

fn selftest() -> Result<(), Failure> {
    let checks = steinctrl::selftest::run_all();
    let mut failed = 0;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        return Err(Failure::Runtime(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
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
    let (result, sub) = match cli.command {
        Command::Bench(a) => (bench(*a), "bench"),
        Command::Slope(a) => (slope(a), "slope"),
        Command::Filldist(a) => (filldist(a), "filldist"),
        Command::Selftest => (selftest(), "selftest"),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n");
            let mut cmd = Cli::command();
            cmd.build();
            if let Some(sc) = cmd.find_subcommand_mut(sub) {
                eprintln!("{}", sc.render_usage());
            }
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
