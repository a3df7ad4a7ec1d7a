//! `bicens`: fit, simulate, Monte-Carlo and basis dumps from the command line.

mod config;
mod data;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bicens::exec::{threads_from_env, with_thread_cap};
use bicens::sim::{
    fmt17, generate_dataset, knot_count, replication_rng, run_monte_carlo, tau_to_alpha, KnotRule, SimConfig,
};
use bicens::spline::{bspline_all, ispline_all, mspline_all};
use bicens::{fit, Domain, Error, FitOptions, KnotVector, SieveFit, SieveSpec};
use clap::{Args, Parser, Subcommand};

use crate::config::Config;

#[derive(Parser, Debug)]
#[command(name = "bicens", version, about = "Sieve estimation of a bivariate distribution from current-status data")]
struct Cli {
    /// Flat `key = value` file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Progress messages on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit the sieve estimator to a dataset CSV.
    Fit(FitArgs),
    /// Draw one dataset from the Clayton scenario.
    Simulate(SimulateArgs),
    /// Monte-Carlo bias and RMSE study.
    Montecarlo(MonteCarloArgs),
    /// Tabulate M-, I- and B-spline bases on a grid.
    Basis(BasisArgs),
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    /// `L1,U1,L2,U2`
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    order: Option<usize>,
    /// Interior knots per axis; default `round(n^(1/3)) - 1`.
    #[arg(long = "knots-m")]
    knots_m: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// Points per axis of the output grid.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long = "censor-lo")]
    censor_lo: Option<f64>,
    #[arg(long = "censor-hi")]
    censor_hi: Option<f64>,
    /// Dataset CSV; the truth parameters go to `<out>.truth`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MonteCarloArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long = "knots-m")]
    knots_m: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BasisArgs {
    /// Comma-separated interior knots (may be empty).
    #[arg(long, allow_hyphen_values = true)]
    knots: Option<String>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    lower: Option<f64>,
    #[arg(long)]
    upper: Option<f64>,
    /// Number of evaluation points.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit status when a fit finished without a KKT certificate.
const NOT_CONVERGED: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    with_thread_cap(threads_from_env(), || match cli.command {
        Command::Fit(args) => cmd_fit(&cfg, args, cli.verbose),
        Command::Simulate(args) => cmd_simulate(&cfg, args, cli.verbose),
        Command::Montecarlo(args) => cmd_montecarlo(&cfg, args, cli.verbose),
        Command::Basis(args) => cmd_basis(&cfg, args),
    })
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("'{s}' is not a number")))
        .collect()
}

fn parse_domain(text: &str) -> Result<Domain> {
    match parse_list(text)?.as_slice() {
        &[l1, u1, l2, u2] => Ok(Domain::new(l1, u1, l2, u2)?),
        other => bail!("--domain needs 4 numbers L1,U1,L2,U2, got {}", other.len()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn fit_options(cfg: &Config, eps: Option<f64>, max_iter: Option<usize>) -> Result<FitOptions> {
    let mut opts = FitOptions::default();
    if let Some(e) = cfg.pick("eps", eps)? {
        opts.epsilon = e;
    }
    if let Some(m) = cfg.pick("max-iter", max_iter)? {
        opts.max_iter = m;
    }
    Ok(opts)
}

fn cmd_fit(cfg: &Config, args: FitArgs, verbose: bool) -> Result<ExitCode> {
    let data_path: PathBuf = cfg.require("data", args.data)?;
    let out: PathBuf = cfg.require("out", args.out)?;
    let domain = match cfg.pick::<String>("domain", args.domain)? {
        Some(text) => parse_domain(&text)?,
        None => Domain::default(),
    };
    let order = cfg.pick("order", args.order)?.unwrap_or(4);
    let grid = cfg.pick("grid", args.grid)?.unwrap_or(50);
    if grid < 2 {
        bail!("--grid must be at least 2");
    }
    let opts = fit_options(cfg, args.eps, args.max_iter)?;

    let file = File::open(&data_path).with_context(|| format!("opening {}", data_path.display()))?;
    let data = data::read_dataset(file).with_context(|| format!("reading {}", data_path.display()))?;
    if let Some(k) = data.iter().position(|o| !domain.contains(o.c1, o.c2)) {
        bail!(
            "data row {} ({}, {}) lies outside the domain [{},{}]x[{},{}]",
            k + 1,
            data[k].c1,
            data[k].c2,
            domain.l1,
            domain.u1,
            domain.l2,
            domain.u2
        );
    }
    let m = cfg.pick("knots-m", args.knots_m)?.unwrap_or_else(|| knot_count(data.len()));
    let spec = SieveSpec::from_data(&data, m, order, domain)?;
    if verbose {
        eprintln!("fitting n = {} with p = {}, q = {} (D = {})", data.len(), spec.p(), spec.q(), spec.dim());
    }
    let fitted = fit(&spec, &data, &opts)?;

    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    write_result(create(&out.join("fit.txt"))?, &fitted, &opts, data.len())?;
    let axis1 = linspace(domain.l1, domain.u1, grid);
    let axis2 = linspace(domain.l2, domain.u2, grid);
    write_grid(create(&out.join("grid.csv"))?, &fitted, &axis1, &axis2)?;
    if verbose {
        eprintln!(
            "loglik {} after {} iterations, converged = {}",
            fitted.result.loglik, fitted.result.iterations, fitted.result.converged
        );
    }
    if fitted.result.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("warning: optimizer did not converge; results written and flagged");
        Ok(ExitCode::from(NOT_CONVERGED))
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn join(values: impl IntoIterator<Item = String>) -> String {
    values.into_iter().collect::<Vec<_>>().join(",")
}

fn write_result<W: Write>(mut out: W, fitted: &SieveFit, opts: &FitOptions, n: usize) -> Result<()> {
    let r = &fitted.result;
    let spec = &fitted.spec;
    let d = spec.domain();
    writeln!(out, "# sieve fit")?;
    writeln!(out, "converged = {}", r.converged)?;
    writeln!(out, "stalled = {}", r.stalled)?;
    writeln!(out, "kkt_certified = {}", r.kkt_certified(opts.epsilon))?;
    writeln!(out, "loglik = {}", fmt17(r.loglik))?;
    writeln!(out, "iterations = {}", r.iterations)?;
    writeln!(out, "d_norm = {}", fmt17(r.d_norm))?;
    writeln!(out, "epsilon = {}", fmt17(opts.epsilon))?;
    writeln!(out, "n = {n}")?;
    writeln!(out, "order = {}", spec.axis1.order())?;
    writeln!(out, "p = {}", spec.p())?;
    writeln!(out, "q = {}", spec.q())?;
    writeln!(out, "domain = {}", join([d.l1, d.u1, d.l2, d.u2].map(fmt17)))?;
    writeln!(out, "knots1 = {}", join(spec.axis1.interior().iter().map(|&x| fmt17(x))))?;
    writeln!(out, "knots2 = {}", join(spec.axis2.interior().iter().map(|&x| fmt17(x))))?;
    writeln!(out, "active = {}", join(r.active.indices().iter().map(|i| i.to_string())))?;
    writeln!(out, "multipliers = {}", join(r.multipliers.iter().map(|&x| fmt17(x))))?;
    writeln!(out, "[theta]")?;
    writeln!(out, "# eta row-major (p x q), then omega (p), then pi (q)")?;
    let (p, q) = (spec.p(), spec.q());
    for i in 0..p {
        for j in 0..q {
            writeln!(out, "eta[{i},{j}] = {}", fmt17(fitted.theta.eta(i, j)))?;
        }
    }
    for i in 0..p {
        writeln!(out, "omega[{i}] = {}", fmt17(fitted.theta.omega(i)))?;
    }
    for j in 0..q {
        writeln!(out, "pi[{j}] = {}", fmt17(fitted.theta.pi(j)))?;
    }
    writeln!(out, "[trace]")?;
    writeln!(out, "# iteration, loglik, d_norm, active")?;
    for (k, e) in r.trace.iter().enumerate() {
        writeln!(out, "{},{},{},{}", k + 1, fmt17(e.loglik), fmt17(e.d_norm), e.active)?;
    }
    out.flush()?;
    Ok(())
}

fn write_grid<W: Write>(out: W, fitted: &SieveFit, axis1: &[f64], axis2: &[f64]) -> Result<()> {
    let (f, f1, f2) = fitted.cdf_grid(axis1, axis2);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "t", "F", "F1", "F2"])?;
    for (a, &s) in axis1.iter().enumerate() {
        for (b, &t) in axis2.iter().enumerate() {
            w.write_record([fmt17(s), fmt17(t), fmt17(f[a][b]), fmt17(f1[a]), fmt17(f2[b])])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn sim_config(cfg: &Config, n: Option<usize>, tau: Option<f64>, seed: Option<u64>) -> Result<SimConfig> {
    let mut config = SimConfig::default();
    if let Some(v) = cfg.pick("n", n)? {
        config.n = v;
    }
    if let Some(v) = cfg.pick("tau", tau)? {
        config.tau = v;
    }
    if let Some(v) = cfg.pick("seed", seed)? {
        config.seed = v;
    }
    Ok(config)
}

fn cmd_simulate(cfg: &Config, args: SimulateArgs, verbose: bool) -> Result<ExitCode> {
    let out: PathBuf = cfg.require("out", args.out)?;
    let mut config = sim_config(cfg, args.n, args.tau, args.seed)?;
    if let Some(v) = cfg.pick("rate", args.rate)? {
        config.rate = v;
    }
    if let Some(v) = cfg.pick("censor-lo", args.censor_lo)? {
        config.censor_lo = v;
    }
    if let Some(v) = cfg.pick("censor-hi", args.censor_hi)? {
        config.censor_hi = v;
    }
    config.validate()?;
    let (data, truth) = generate_dataset(&config, &mut replication_rng(config.seed, 0))?;
    data::write_dataset(create(&out)?, &data)?;

    let mut sidecar = out.clone().into_os_string();
    sidecar.push(".truth");
    let sidecar = PathBuf::from(sidecar);
    let mut w = create(&sidecar)?;
    writeln!(w, "n = {}", config.n)?;
    writeln!(w, "tau = {}", fmt17(config.tau))?;
    writeln!(w, "alpha = {}", fmt17(truth.copula.alpha))?;
    writeln!(w, "rate = {}", fmt17(config.rate))?;
    writeln!(w, "censor_lo = {}", fmt17(config.censor_lo))?;
    writeln!(w, "censor_hi = {}", fmt17(config.censor_hi))?;
    writeln!(w, "seed = {}", config.seed)?;
    w.flush()?;
    if verbose {
        eprintln!("wrote {} and {}", out.display(), sidecar.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_montecarlo(cfg: &Config, args: MonteCarloArgs, verbose: bool) -> Result<ExitCode> {
    let out: PathBuf = cfg.require("out", args.out)?;
    let mut config = sim_config(cfg, args.n, args.tau, args.seed)?;
    if let Some(v) = cfg.pick("reps", args.reps)? {
        config.reps = v;
    }
    if let Some(v) = cfg.pick("order", args.order)? {
        config.order = v;
    }
    if let Some(m) = cfg.pick("knots-m", args.knots_m)? {
        config.knots = KnotRule::Fixed(m);
    }
    config.fit = fit_options(cfg, args.eps, args.max_iter)?;
    // reject tau >= 1 before any work
    tau_to_alpha(config.tau)?;
    if verbose {
        eprintln!("running {} replications at n = {}", config.reps, config.n);
    }
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let report = match run_monte_carlo(&config) {
        Ok(report) => report,
        Err(Error::AllReplicationsFailed { reps }) => {
            let mut w = create(&out.join("summary.txt"))?;
            writeln!(w, "n = {}", config.n)?;
            writeln!(w, "seed = {}", config.seed)?;
            writeln!(w, "reps = {reps}")?;
            writeln!(w, "failures = {reps}")?;
            w.flush()?;
            bail!("all {reps} replications failed; see {}", out.join("summary.txt").display());
        }
        Err(e) => return Err(e.into()),
    };
    let mut w = create(&out.join("grid.csv"))?;
    report.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&out.join("marginals.csv"))?;
    report.write_marginal_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&out.join("summary.txt"))?;
    report.write_summary(&mut w, &config)?;
    w.flush()?;
    if report.failures > 0 {
        eprintln!("warning: {} of {} replications failed and were excluded", report.failures, report.reps);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_basis(cfg: &Config, args: BasisArgs) -> Result<ExitCode> {
    let out: PathBuf = cfg.require("out", args.out)?;
    let interior = parse_list(&cfg.pick::<String>("knots", args.knots)?.unwrap_or_default())?;
    let order = cfg.pick("order", args.order)?.unwrap_or(4);
    let lower = cfg.pick("lower", args.lower)?.unwrap_or(0.0);
    let upper = cfg.pick("upper", args.upper)?.unwrap_or(5.0);
    let grid = cfg.pick("grid", args.grid)?.unwrap_or(101);
    if grid < 2 {
        bail!("--grid must be at least 2");
    }
    let kv = KnotVector::new(order, lower, upper, interior)?;
    let u = kv.extended();
    let mut w = csv::Writer::from_writer(create(&out)?);
    w.write_record(["s", "i", "M", "I", "N"])?;
    for s in linspace(lower, upper, grid) {
        let m = mspline_all(u, order, s)?;
        let is = ispline_all(u, order, s)?;
        let n = bspline_all(u, order, s)?;
        for i in 0..kv.basis_count() {
            w.write_record([fmt17(s), i.to_string(), fmt17(m[i]), fmt17(is[i]), fmt17(n[i])])?;
        }
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}
