use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use frontier_core::dataset::{load_sample, save_estimates, save_sample};
use frontier_core::estimator::{DEFAULT_A, DEFAULT_K1, DEFAULT_K2};
use frontier_core::selfcheck::run_oracle_checks;
use frontier_core::study::{run_study, StudyConfig, DEFAULT_GRID, DEFAULT_REPLICATIONS, DEFAULT_SEED, DEFAULT_SIZES};
use frontier_core::{
    estimate_grid, rate_exponents, Error, EstimatorConfig, FrontierModel, KernelProfile, KernelSpec, Omega,
    RateSchedule,
};

#[derive(Parser)]
#[command(name = "frontier", version, about = "Frontier estimation from high-order conditional moments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a dataset from a model file and write it as CSV.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the frontier of a CSV dataset on a grid.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo convergence study and write a JSON report.
    McStudy(StudyArgs),
    /// Run the moment oracle self-checks for a model.
    OracleCheck {
        #[arg(long)]
        model: PathBuf,
        /// Check point; defaults to the flattest grid point of g in Ω.
        #[arg(long, value_delimiter = ',')]
        at: Option<Vec<f64>>,
        #[arg(long, default_value = "epanechnikov")]
        kernel: KernelProfile,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ScheduleArgs {
    /// Power exponent; defaults to the rate-optimal value.
    #[arg(long)]
    c1: Option<f64>,
    /// Bandwidth exponent; defaults to the rate-optimal value.
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_K1)]
    k1: f64,
    #[arg(long, default_value_t = DEFAULT_K2)]
    k2: f64,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_A)]
    a: f64,
    /// Moment order; taken from the schedule when omitted (requires --model).
    #[arg(long)]
    p: Option<f64>,
    /// Bandwidth; taken from the schedule when omitted (requires --model).
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, default_value = "epanechnikov")]
    kernel: KernelProfile,
    /// Grid points per axis.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Model file supplying Ω and the smoothness used by the schedule.
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    schedule: ScheduleArgs,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SIZES)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_REPLICATIONS)]
    reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_A)]
    a: f64,
    #[arg(long, default_value = "epanechnikov")]
    kernel: KernelProfile,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    schedule: ScheduleArgs,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 1,
        Error::AllPointsFailed => 3,
        _ => 2,
    }
}

fn load_model(path: &Path) -> Result<FrontierModel, Error> {
    let model = FrontierModel::load(path)?;
    let report = model.validate();
    if !report.passed() {
        eprintln!("{}", serde_json::to_string_pretty(&report).expect("report serialises"));
        return Err(Error::Model(format!("invalid model: {}", report.failure_summary())));
    }
    Ok(model)
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

fn build_schedule(model: &FrontierModel, args: &ScheduleArgs) -> Result<RateSchedule, Error> {
    let d = model.dimension();
    let (c1_opt, c2_opt) = rate_exponents(d, model.eta_g(), model.alpha_bar())?;
    let s = RateSchedule {
        c1: args.c1.unwrap_or(c1_opt),
        c2: args.c2.unwrap_or(c2_opt),
        k1: args.k1,
        k2: args.k2,
        d,
        eta_g: model.eta_g(),
        alpha_bar: model.alpha_bar(),
    };
    s.check_exponents()?;
    Ok(s)
}

fn simulate(model: &Path, n: usize, seed: u64, out: &Path) -> Result<(), Error> {
    let model = load_model(model)?;
    let sample = model.sample(n, seed)?;
    save_sample(&sample, out)?;
    println!("wrote {n} rows to {}", out.display());
    Ok(())
}

fn estimate(args: &EstimateArgs) -> Result<(), Error> {
    let sample = load_sample(&args.data)?;
    let d = sample.dimension();
    let model = args.model.as_deref().map(load_model).transpose()?;
    if let Some(m) = &model {
        if m.dimension() != d {
            return Err(Error::Config(format!(
                "dataset has dimension {d}, model has dimension {}",
                m.dimension()
            )));
        }
    }
    let (p, h) = match (args.p, args.h, &model) {
        (Some(p), Some(h), _) => (p, h),
        (p, h, Some(m)) => {
            let (ps, hs) = build_schedule(m, &args.schedule)?.at(sample.len())?;
            (p.unwrap_or(ps), h.unwrap_or(hs))
        }
        _ => return Err(Error::Config("--p and --h are required unless --model supplies a schedule".into())),
    };
    let config = EstimatorConfig::new(args.a, p, h, KernelSpec::new(args.kernel, d))?;
    if args.grid == 0 {
        return Err(Error::Config("--grid must be at least 1".into()));
    }
    let omega = model.as_ref().map(|m| m.omega().clone()).unwrap_or_else(|| Omega::default_for(d));
    let grid = omega.grid(args.grid);
    let records = estimate_grid(&sample, &grid, &config)?;
    save_estimates(&records, d, &args.out)?;
    let failures = records.iter().filter(|r| !r.is_success()).count();
    println!(
        "estimated {} grid points (p = {p}, h = {h}); {failures} failed; wrote {}",
        records.len(),
        args.out.display()
    );
    if failures == records.len() {
        return Err(Error::AllPointsFailed);
    }
    Ok(())
}

fn mc_study(args: &StudyArgs) -> Result<(), Error> {
    let model = load_model(&args.model)?;
    let config = StudyConfig {
        sizes: args.sizes.clone(),
        replications: args.reps,
        schedule: build_schedule(&model, &args.schedule)?,
        grid_resolution: args.grid,
        base_seed: args.seed,
        a: args.a,
        kernel: args.kernel,
    };
    let output = run_study(&model, &config, args.threads)?;
    write_text(&args.out, &output.report.to_json())?;
    let mut timings_path = args.out.clone().into_os_string();
    timings_path.push(".timings.json");
    let timings = serde_json::to_string_pretty(&output.timings).expect("timings serialise") + "\n";
    write_text(Path::new(&timings_path), &timings)?;
    for s in &output.report.summary {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.4e}")).unwrap_or_else(|| "-".into());
        println!(
            "n = {:>8}  p = {:.3}  h = {:.4}  median sup error = {}  w*error = {}",
            s.n,
            s.p,
            s.h,
            fmt(s.median_sup_error),
            fmt(s.scaled_sup_error)
        );
    }
    if let Some(fit) = output.report.slope {
        println!("log-log slope = {:.4}", fit.slope);
    }
    Ok(())
}

fn oracle_check(model: &Path, at: Option<&[f64]>, kernel: KernelProfile, out: Option<&Path>) -> Result<(), Error> {
    let model = load_model(model)?;
    let report = run_oracle_checks(&model, at, &KernelSpec::new(kernel, model.dimension()))?;
    let text = serde_json::to_string_pretty(&report).expect("report serialises") + "\n";
    match out {
        Some(path) => {
            write_text(path, &text)?;
            println!("oracle checks {}; wrote {}", if report.passed { "passed" } else { "failed" }, path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { model, n, seed, out } => simulate(model, *n, *seed, out),
        Command::Estimate(args) => estimate(args),
        Command::McStudy(args) => mc_study(args),
        Command::OracleCheck { model, at, kernel, out } => oracle_check(model, at.as_deref(), *kernel, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
