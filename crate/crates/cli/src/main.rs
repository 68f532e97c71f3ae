//! `qsieve`: hybrid variational-sieve unit commitment from the command line.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 runtime failure.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use qsieve::qsim::{build_ansatz, stage_count};
use qsieve::vqa::{write_trace_csv, ParamsFile};
use qsieve::{
    brute_force_optimum, builtin_instance, default_lambda, inference, solve_periods, solve_rqp,
    Commitment, Error, GridInstance, LoadProfile, RunReport, VqaConfig, WarmStart, BUILTIN_NAMES,
};

#[derive(Parser)]
#[command(
    name = "qsieve",
    version,
    about = "Unit commitment with a sampled variational circuit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every period of a profile end to end.
    Solve(SolveArgs),
    /// Economic dispatch for one fixed commitment.
    Dispatch(DispatchArgs),
    /// Exact optimum by pruned enumeration.
    Oracle(OracleArgs),
    /// Gate and parameter counts of the ansatz.
    AnsatzInfo(AnsatzInfoArgs),
    /// Sample stored parameters for one period without training.
    Inference(InferenceArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Built-in instance: uc3, uc10 or uc26.
    #[arg(long)]
    instance: Option<String>,
    /// Generator table CSV (`unit,pmin,pmax,c,b,a`).
    #[arg(long, conflicts_with = "instance")]
    generators: Option<PathBuf>,
    /// Load profile CSV (`period,load`). Overrides the built-in profile.
    #[arg(long)]
    loads: Option<PathBuf>,
}

#[derive(Args)]
struct SolverArgs {
    /// Penalty weight. Defaults to a per-instance value.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    epsilon_warm: f64,
    /// Base seed. Random when omitted; the value used is echoed in the report.
    #[arg(long)]
    seed: Option<u64>,
    /// Attach the exhaustive optimum and the approximation error.
    #[arg(long)]
    error: bool,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: InstanceArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    layers: u64,
    #[arg(long, default_value_t = 512)]
    shots_train: usize,
    #[arg(long, default_value_t = 5000)]
    shots_final: usize,
    #[arg(long, default_value_t = 128)]
    max_candidates: usize,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Final trust radius of the optimizer.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0.5)]
    rho_begin: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iterations: usize,
    /// Comma-separated subset of period indices.
    #[arg(long, value_delimiter = ',')]
    periods: Option<Vec<usize>>,
    /// Output directory for report.json, summary.csv, traces and parameters.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads. Results do not depend on this value.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct DispatchArgs {
    #[command(flatten)]
    source: InstanceArgs,
    /// Commitment string, unit 0 first, e.g. `011`.
    #[arg(long = "u")]
    commitment: String,
    #[arg(long)]
    load: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    source: InstanceArgs,
    /// Single load. Without it every period of the profile is solved.
    #[arg(long)]
    load: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct AnsatzInfoArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..=64))]
    n_qubits: u64,
    /// Single layer count. Without it rows 1..=max-layers are printed.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    layers: Option<u64>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    max_layers: u64,
    /// Also print the gate list (requires --layers).
    #[arg(long, requires = "layers")]
    dump: bool,
}

#[derive(Args)]
struct InferenceArgs {
    #[command(flatten)]
    source: InstanceArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    period: usize,
    /// Parameter file written by `solve`.
    #[arg(long)]
    params: PathBuf,
    #[arg(long, default_value_t = 2000)]
    shots_final: usize,
    #[arg(long, default_value_t = 128)]
    max_candidates: usize,
}

/// Bad input: exit code 1.
#[derive(Debug)]
struct Usage(anyhow::Error);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(Usage(e.into()))
}

fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse { .. }
            | Error::InvalidUnit { .. }
            | Error::InvalidProfile(_)
            | Error::UnknownInstance(_)
            | Error::InvalidCommitment(_)
            | Error::EnumerationGuard { .. }
            | Error::InfeasibleRelaxation { .. }
            | Error::NoFeasibleCommitment { .. }
            | Error::ParameterLength { .. }
            | Error::InvalidConfig(_)
            | Error::ParamsMismatch(_)
            | Error::Csv(_)
            | Error::Json(_)
    )
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return 1;
    }
    match e.downcast_ref::<Error>() {
        Some(err) if is_input_error(err) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Dispatch(a) => cmd_dispatch(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::AnsatzInfo(a) => cmd_ansatz_info(a),
        Command::Inference(a) => cmd_inference(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("cannot open {}", path.display()))
        .map_err(usage)
}

fn load_instance(args: &InstanceArgs) -> anyhow::Result<(GridInstance, Option<LoadProfile>)> {
    let (instance, builtin_profile) = match (&args.instance, &args.generators) {
        (Some(name), None) => {
            let (g, p) = builtin_instance(name).map_err(|e| {
                usage(anyhow!(
                    "{e}; built-in instances: {}",
                    BUILTIN_NAMES.join(", ")
                ))
            })?;
            (g, Some(p))
        }
        (None, Some(path)) => {
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "custom".into());
            let g = GridInstance::from_csv(name, open(path)?)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(usage)?;
            (g, None)
        }
        _ => return Err(usage(anyhow!("pass either --instance or --generators"))),
    };
    let profile = match &args.loads {
        Some(path) => Some(
            LoadProfile::from_csv(open(path)?)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(usage)?,
        ),
        None => builtin_profile,
    };
    Ok((instance, profile))
}

fn require_profile(profile: Option<LoadProfile>) -> anyhow::Result<LoadProfile> {
    profile.ok_or_else(|| usage(anyhow!("--loads is required with --generators")))
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

fn create_file(path: &Path) -> anyhow::Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}"))
        .unwrap_or_else(|| "-".into())
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<()> {
    let (instance, profile) = load_instance(&args.source)?;
    let profile = require_profile(profile)?;
    let config = VqaConfig {
        layers: args.layers as usize,
        shots_train: args.shots_train,
        shots_final: args.shots_final,
        max_candidates: args.max_candidates,
        lambda: args
            .solver
            .lambda
            .unwrap_or_else(|| default_lambda(&instance)),
        epsilon_warm: args.solver.epsilon_warm,
        rho_begin: args.rho_begin,
        rho_end: args.tol,
        max_iterations: args.max_iterations,
        seed: resolve_seed(args.solver.seed),
        trials: args.trials,
        compute_error: args.solver.error,
    };
    config.validate().map_err(usage)?;
    if let Some(threads) = args.threads {
        if threads == 0 {
            return Err(usage(anyhow!("--threads must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring worker threads")?;
    }
    let periods: Vec<usize> = args.periods.unwrap_or_else(|| (0..profile.len()).collect());
    log::info!(
        "solving {} periods x {} trials of {} ({} units)",
        periods.len(),
        config.trials,
        instance.name(),
        instance.len()
    );
    let run = solve_periods(&instance, &profile, &periods, &config)?;
    let report = RunReport::new(&instance, profile.loads(), &config, &run);

    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    report.to_json(create_file(&args.out.join("report.json"))?)?;
    report.write_summary_csv(create_file(&args.out.join("summary.csv"))?)?;
    // only the shape of the ansatz is recorded, so any warm start will do
    let warm = WarmStart::from_fractions(vec![0.5; instance.len()], config.epsilon_warm)?;
    let spec = build_ansatz(instance.len(), config.layers, &warm)?;
    for r in &run.runs {
        let Ok(h) = &r.outcome else { continue };
        let stem = format!("p{}_t{}", r.period, r.trial);
        write_trace_csv(
            &h.trace,
            create_file(&args.out.join(format!("trace_{stem}.csv")))?,
        )?;
        ParamsFile::new(&spec, config.epsilon_warm, h.params.clone())
            .to_json(create_file(&args.out.join(format!("params_{stem}.json")))?)?;
    }

    let stdout = io::stdout();
    let mut out = stdout.lock();
    if args.solver.json {
        report.to_json(&mut out)?;
        writeln!(out)?;
    } else {
        writeln!(
            out,
            "{:>5} {:>6} {:>10}  {:<width$}  {:>14} {:>9}",
            "trial",
            "period",
            "load",
            "assignment",
            "cost",
            "error%",
            width = instance.len().max(10)
        )?;
        for p in &report.periods {
            let assignment = p
                .commitment
                .map(|c| c.to_string())
                .unwrap_or_else(|| format!("failed: {}", p.message.as_deref().unwrap_or("")));
            writeln!(
                out,
                "{:>5} {:>6} {:>10.3}  {:<width$}  {:>14} {:>9}",
                p.trial,
                p.period,
                p.load,
                assignment,
                fmt_opt(p.total_cost, 4),
                fmt_opt(p.error_pct, 4),
                width = instance.len().max(10)
            )?;
        }
        let a = &report.aggregate;
        writeln!(out, "mean total cost: {:.4}", a.mean_total_cost)?;
        writeln!(out, "mean iterations: {:.2}", a.mean_iterations)?;
        if let Some(e) = a.mean_error_pct {
            writeln!(out, "mean error: {e:.4}%")?;
        }
        if a.failures > 0 {
            writeln!(out, "failed cells: {}", a.failures)?;
        }
        writeln!(out, "report: {}", args.out.join("report.json").display())?;
    }
    if report.aggregate.failures > 0 {
        return Err(anyhow!("{} period(s) failed", report.aggregate.failures));
    }
    Ok(())
}

fn parse_commitment(text: &str, instance: &GridInstance) -> anyhow::Result<Commitment> {
    let u: Commitment = text.parse().map_err(usage)?;
    if u.len() != instance.len() {
        return Err(usage(anyhow!(
            "commitment `{text}` has {} units, instance `{}` has {}",
            u.len(),
            instance.name(),
            instance.len()
        )));
    }
    Ok(u)
}

fn cmd_dispatch(args: DispatchArgs) -> anyhow::Result<()> {
    let (instance, _) = load_instance(&args.source)?;
    let u = parse_commitment(&args.commitment, &instance)?;
    if !(args.load.is_finite() && args.load >= 0.0) {
        return Err(usage(anyhow!("--load must be a non-negative number")));
    }
    let r = solve_rqp(&instance, &u, args.load);
    let mut out = io::stdout().lock();
    if args.json {
        let value = serde_json::json!({
            "instance": instance.name(),
            "commitment": u,
            "load": args.load,
            "status": r.status,
            "powers": r.powers,
            "total_cost": r.total_cost.is_finite().then_some(r.total_cost),
            "marginal_price": r.marginal_price.is_finite().then_some(r.marginal_price),
        });
        serde_json::to_writer_pretty(&mut out, &value)?;
        writeln!(out)?;
        return Ok(());
    }
    writeln!(out, "commitment: {u}")?;
    writeln!(out, "load: {}", args.load)?;
    if !r.is_optimal() {
        writeln!(out, "status: infeasible")?;
        return Ok(());
    }
    writeln!(out, "status: optimal")?;
    let powers: Vec<String> = r.powers.iter().map(|p| format!("{p:.4}")).collect();
    writeln!(out, "powers: {}", powers.join(" "))?;
    writeln!(out, "marginal price: {:.6}", r.marginal_price)?;
    writeln!(out, "cost: {:.4}", r.total_cost)?;
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> anyhow::Result<()> {
    let (instance, profile) = load_instance(&args.source)?;
    let loads: Vec<(Option<usize>, f64)> = match args.load {
        Some(load) => vec![(None, load)],
        None => require_profile(profile)?
            .loads()
            .iter()
            .enumerate()
            .map(|(t, &l)| (Some(t), l))
            .collect(),
    };
    let mut rows = Vec::with_capacity(loads.len());
    for (period, load) in loads {
        let (u, r) = brute_force_optimum(&instance, load)?;
        rows.push((period, load, u, r));
    }
    let mut out = io::stdout().lock();
    if args.json {
        let value: Vec<_> = rows
            .iter()
            .map(|(period, load, u, r)| {
                serde_json::json!({
                    "period": period,
                    "load": load,
                    "commitment": u,
                    "powers": r.powers,
                    "total_cost": r.total_cost,
                    "marginal_price": r.marginal_price,
                })
            })
            .collect();
        serde_json::to_writer_pretty(&mut out, &value)?;
        writeln!(out)?;
        return Ok(());
    }
    let width = instance.len().max(10);
    writeln!(
        out,
        "{:>6} {:>10}  {:<width$}  {:>14}",
        "period", "load", "commitment", "cost"
    )?;
    for (period, load, u, r) in &rows {
        let period = period.map(|p| p.to_string()).unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{period:>6} {load:>10.3}  {:<width$}  {:>14.4}",
            u.to_string(),
            r.total_cost
        )?;
    }
    Ok(())
}

fn cmd_ansatz_info(args: AnsatzInfoArgs) -> anyhow::Result<()> {
    let n = args.n_qubits as usize;
    let warm = WarmStart::from_fractions(vec![0.5; n], 0.1)?;
    let layers: Vec<usize> = match args.layers {
        Some(l) => vec![l as usize],
        None => (1..=args.max_layers as usize).collect(),
    };
    let mut out = io::stdout().lock();
    let first = build_ansatz(n, 1, &warm)?;
    let sizes: Vec<String> = first.stage_sizes().iter().map(|s| s.to_string()).collect();
    writeln!(out, "n_qubits: {n}")?;
    writeln!(out, "stages: {} ({})", stage_count(n), sizes.join(", "))?;
    writeln!(out, "{:>6} {:>6} {:>6}", "layers", "tqg", "params")?;
    for &l in &layers {
        let spec = build_ansatz(n, l, &warm)?;
        writeln!(
            out,
            "{:>6} {:>6} {:>6}",
            l,
            spec.two_qubit_gate_count(),
            spec.parameter_count()
        )?;
    }
    if args.dump {
        let spec = build_ansatz(n, layers[0], &warm)?;
        write!(out, "{}", spec.dump())?;
    }
    Ok(())
}

fn cmd_inference(args: InferenceArgs) -> anyhow::Result<()> {
    let (instance, profile) = load_instance(&args.source)?;
    let profile = require_profile(profile)?;
    let load = *profile.loads().get(args.period).ok_or_else(|| {
        usage(anyhow!(
            "period {} out of range, profile has {} periods",
            args.period,
            profile.len()
        ))
    })?;
    let file = ParamsFile::from_json(open(&args.params)?)
        .with_context(|| format!("reading {}", args.params.display()))
        .map_err(usage)?;
    if file.n_qubits != instance.len() {
        return Err(usage(Error::ParamsMismatch(format!(
            "parameters are for {} qubits, instance `{}` has {} units",
            file.n_qubits,
            instance.name(),
            instance.len()
        ))));
    }
    let config = VqaConfig {
        layers: file.layers,
        shots_final: args.shots_final,
        max_candidates: args.max_candidates,
        lambda: args
            .solver
            .lambda
            .unwrap_or_else(|| default_lambda(&instance)),
        epsilon_warm: file.epsilon_warm,
        seed: resolve_seed(args.solver.seed),
        compute_error: args.solver.error,
        ..VqaConfig::new(1.0)
    };
    config.validate().map_err(usage)?;
    let warm = WarmStart::from_fractions(vec![0.5; instance.len()], config.epsilon_warm)?;
    file.check(&build_ansatz(instance.len(), config.layers, &warm)?)
        .map_err(usage)?;
    let run = inference(&instance, args.period, load, &file.params, &config)?;
    let s = &run.solution;
    let mut out = io::stdout().lock();
    if args.solver.json {
        serde_json::to_writer_pretty(&mut out, s)?;
        writeln!(out)?;
        return Ok(());
    }
    writeln!(out, "period: {}", s.period)?;
    writeln!(out, "load: {}", s.load)?;
    writeln!(out, "commitment: {}", s.commitment)?;
    writeln!(out, "cost: {:.4}", s.dispatch.total_cost)?;
    writeln!(out, "candidates: {}", s.candidates_evaluated)?;
    if s.fallback {
        writeln!(out, "fallback: rounded relaxation")?;
    }
    if let (Some(exact), Some(err)) = (s.exact_cost, s.error_pct) {
        writeln!(out, "exact: {exact:.4}")?;
        writeln!(out, "error: {err:.4}%")?;
    }
    Ok(())
}
