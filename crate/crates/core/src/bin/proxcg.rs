use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use proxcg::bounds::{compute_constants, BoundInputs};
use proxcg::csgen::{generate_instance, load_instance, metadata_sidecar, reformulate, save_instance, CsInstance};
use proxcg::duality::CsMonitor;
use proxcg::harness::acceptance::{run_criterion, CriterionResult, CRITERIA};
use proxcg::harness::sweep::{run_sweep, SweepPlan};
use proxcg::solver::{run, SolverConfig};
use proxcg::{Error, Result};

#[derive(Parser)]
#[command(name = "proxcg", version, about = "Proximal-conditional-gradient penalty solver and experiment driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded compressed-sensing instance file.
    Gen(GenArgs),
    /// Solve one compressed-sensing instance and write its trace CSV.
    Solve(SolveArgs),
    /// Run a β₀ sweep described by a JSON plan and write the aggregate CSV.
    Sweep(SweepArgs),
    /// Run acceptance checks; exits nonzero if any fails.
    Verify(VerifyArgs),
    /// Compute certificate constants and τ_t, G_t at the requested t.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1.5)]
    p: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file written by `gen`.
    #[arg(long, conflicts_with_all = ["inline", "size"])]
    instance: Option<PathBuf>,
    /// Inline instance: {"a": [[..], ..], "b": [..], "sigma": .., "p": ..}.
    #[arg(long, conflicts_with = "size")]
    inline: Option<String>,
    /// Generate the instance on the fly: m,n,k (uses --seed and --p).
    #[arg(long, value_delimiter = ',', num_args = 3)]
    size: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1.5)]
    p: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    beta0: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 1e-4)]
    h0: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1)]
    record_every: usize,
    /// Run to the iteration cap, ignoring the gap and small-step criteria.
    #[arg(long)]
    no_stop: bool,
    /// Trace CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON plan; omitted fields take the defaults.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Leave the wall-time column empty so reruns compare byte-for-byte.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// A1..A9, `oracles` (A1, A2, A8) or `all`.
    #[arg(long, default_value = "all")]
    criterion: String,
}

#[derive(Args)]
struct BoundsArgs {
    /// JSON file with all inputs; the individual flags are ignored when given.
    #[arg(long)]
    inputs: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    beta0: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 1e-4)]
    h0: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value_t = 0.0)]
    m_f: f64,
    #[arg(long, default_value_t = 0.0)]
    m_g: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_a: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_b: f64,
    #[arg(long, default_value_t = 1.0)]
    d_f: f64,
    #[arg(long, default_value_t = 1.0)]
    d_g: f64,
    #[arg(long, default_value_t = 1.0)]
    d2: f64,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    #[arg(long)]
    lambda_bar: Option<f64>,
    /// Iteration indices (≥ 2) at which to evaluate τ_t and G_t.
    #[arg(long, value_delimiter = ',', default_value = "2,10,100,1000,10000")]
    t: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct InlineInstance {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    sigma: f64,
    p: f64,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let inst = generate_instance(args.m, args.n, args.k, args.p, args.seed)?;
    save_instance(&inst, &args.out)?;
    eprint!("{}", metadata_sidecar(&inst));
    Ok(())
}

fn load_solve_instance(args: &SolveArgs) -> Result<CsInstance> {
    if let Some(path) = &args.instance {
        return load_instance(path);
    }
    if let Some(text) = &args.inline {
        let spec: InlineInstance = serde_json::from_str(text)?;
        return CsInstance::from_parts(&spec.a, spec.b, spec.sigma, spec.p);
    }
    if let Some(size) = &args.size {
        return generate_instance(size[0], size[1], size[2], args.p, args.seed);
    }
    Err(Error::InvalidParameter("solve needs --instance, --inline or --size".into()))
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let inst = load_solve_instance(&args)?;
    let problem = reformulate(&inst)?;
    let cfg = SolverConfig {
        beta0: args.beta0,
        delta: args.delta,
        h0: args.h0,
        max_iters: args.max_iters,
        step_tol: (!args.no_stop).then_some(1e-6),
        record_every: args.record_every,
        ..SolverConfig::default()
    };
    let mut monitor = CsMonitor::new(problem.dual.clone(), cfg.gap_tol, cfg.feas_tol_rel);
    monitor.stop_enabled = !args.no_stop;
    let mut outcome = run(&problem.spec, &cfg, vec![0.0; inst.n], vec![0.0; inst.m], &mut monitor)?;
    let trace = &mut outcome.trace;
    trace.push_meta("m", inst.m);
    trace.push_meta("n", inst.n);
    trace.push_meta("k", inst.k);
    trace.push_meta("p", inst.p);
    trace.push_meta("sigma", inst.sigma);
    trace.push_meta("seed", inst.seed);
    trace.push_meta("feas_violation", inst.feasibility_violation(&outcome.state.x)?);
    let mut w = output(&args.out)?;
    trace.write_csv(&mut w)?;
    w.flush()?;
    log::info!("stopped after {} iterations: {}", outcome.state.t, outcome.stop_reason);
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let plan: SweepPlan = match &args.plan {
        Some(p) => serde_json::from_reader(File::open(p)?)?,
        None => SweepPlan::default(),
    };
    let res = run_sweep(&plan);
    let mut w = output(&args.out)?;
    res.write_csv(&plan, &mut w, !args.no_timing)?;
    w.flush()?;
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<bool> {
    let ids: Vec<&str> = match args.criterion.to_ascii_lowercase().as_str() {
        "all" => CRITERIA.to_vec(),
        "oracles" => vec!["A1", "A2", "A8"],
        _ => vec![args.criterion.as_str()],
    };
    let mut all = true;
    for id in ids {
        let r: CriterionResult = run_criterion(id)?;
        println!("{r}");
        all &= r.passed;
    }
    Ok(all)
}

fn cmd_bounds(args: BoundsArgs) -> Result<()> {
    let inputs: BoundInputs = match &args.inputs {
        Some(p) => serde_json::from_reader(File::open(p)?)?,
        None => BoundInputs {
            beta0: args.beta0,
            delta: args.delta,
            h0: args.h0,
            mu: args.mu,
            nu: args.nu,
            m_f: args.m_f,
            m_g: args.m_g,
            lambda_a: args.lambda_a,
            lambda_b: args.lambda_b,
            d_f: args.d_f,
            d_g: args.d_g,
            d2_upper: args.d2,
            theta: args.theta,
            lambda_bar_norm: args.lambda_bar,
            theta_source: None,
        },
    };
    let report = compute_constants(&inputs)?;
    let mut w = output(&args.out)?;
    report.write_header(&mut w)?;
    let lam = inputs.lambda_bar_norm.unwrap_or(0.0);
    writeln!(w, "t,tau,G,objective_bound")?;
    for &t in &args.t {
        writeln!(
            w,
            "{t},{:.16e},{:.16e},{:.16e}",
            report.tau(t)?,
            report.g(t, lam)?,
            report.objective_bound(t, lam)?
        )?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a).map(|_| true),
        Command::Solve(a) => cmd_solve(a).map(|_| true),
        Command::Sweep(a) => cmd_sweep(a).map(|_| true),
        Command::Verify(a) => cmd_verify(a),
        Command::Bounds(a) => cmd_bounds(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
