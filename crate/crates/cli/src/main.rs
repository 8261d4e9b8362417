//! Command-line front end: dataset generation and I/O, fitting, block-count
//! selection, Bernstein certificates, complexity estimation, outlier
//! detection and the experiment runners.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags or arguments),
//! 2 on runtime errors (solver, numeric, selection, I/O). Human-readable
//! diagnostics go to stderr; machine-readable outputs go only to files.

mod config;
mod exp;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use minmax_mom::bernstein::{
    check_local_bernstein, BernsteinCheckConfig, ConditionalModel, DesignLaw, NoiseLaw,
};
use minmax_mom::complexity;
use minmax_mom::data::{format_float, read_matrix_csv, Dataset};
use minmax_mom::datagen::{self, OutlierXScale};
use minmax_mom::diagnostics;
use minmax_mom::error::Error;
use minmax_mom::linalg::Matrix;
use minmax_mom::losses::LossSpec;
use minmax_mom::model_select::{self, LepskiConfig};
use minmax_mom::solver::{self, BlockStrategy, MedianCriterion, SolverConfig, StepRule};

use config::Resolver;

#[derive(Parser)]
#[command(
    name = "minmax-mom",
    version,
    about = "Minmax median-of-means estimation"
)]
struct Cli {
    /// Flat `section.key = value` file supplying defaults for flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for replication/Monte Carlo fan-out (default: cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the minmax MOM estimator (or ERM with --erm / --k 1).
    Fit(FitArgs),
    /// Choose the block count by robust cross-validation.
    Cv(CvArgs),
    /// Adaptive block-count selection over a candidate set.
    Lepski(LepskiArgs),
    /// Run an experiment described by a spec file.
    Experiment(ExperimentArgs),
    /// Verify a local Bernstein condition on a synthetic model.
    Bernstein(BernsteinArgs),
    /// Monte Carlo complexity fixed point and rank bound.
    Complexity(ComplexityArgs),
    /// Score observations by median-block selection counts.
    DetectOutliers(DetectArgs),
    /// Generate a synthetic dataset.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct LossFlags {
    /// Loss family: logistic | hinge | huber | quantile | l1.
    #[arg(long)]
    loss: Option<String>,
    /// Huber threshold (required for --loss huber).
    #[arg(long)]
    delta: Option<f64>,
    /// Quantile level in (0,1) (required for --loss quantile).
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Args)]
struct SolverFlags {
    /// Number of blocks.
    #[arg(long)]
    k: Option<usize>,
    /// Block strategy: fixed | resample.
    #[arg(long)]
    blocks: Option<String>,
    /// Median criterion: incremental | plain.
    #[arg(long)]
    median_criterion: Option<String>,
    /// Step rule: median-block | full-data | constant.
    #[arg(long)]
    step_rule: Option<String>,
    /// Step size for --step-rule constant.
    #[arg(long)]
    step: Option<f64>,
    /// Step denominator: block | total.
    #[arg(long)]
    step_denominator: Option<String>,
    /// Stopping threshold.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct FitArgs {
    /// Input dataset CSV (header y,x1,...,xd).
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    loss: LossFlags,
    #[command(flatten)]
    solver: SolverFlags,
    /// Fit the plain empirical risk minimizer (the k = 1 path).
    #[arg(long)]
    erm: bool,
    /// Output file for the estimate and convergence record.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CvArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    loss: LossFlags,
    #[command(flatten)]
    solver: SolverFlags,
    /// Comma-separated block counts (default: geometric 1,2,4,... up to n).
    #[arg(long)]
    k_grid: Option<String>,
    #[arg(long)]
    v_folds: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LepskiArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    loss: LossFlags,
    /// Comma-separated block counts.
    #[arg(long)]
    k_grid: Option<String>,
    /// Comma-separated `K=value` acceptance thresholds, one per grid entry.
    #[arg(long)]
    thresholds: Option<String>,
    /// Candidate parameter vectors as a matrix CSV (header x1,...,xd).
    #[arg(long)]
    candidates: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment spec file (flat key = value).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Overrides the spec's output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct BernsteinArgs {
    #[command(flatten)]
    loss: LossFlags,
    /// Design law: constant | gaussian | rademacher | student-t5.
    #[arg(long)]
    design: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    /// Oracle parameter vector, comma separated.
    #[arg(long)]
    t_star: Option<String>,
    /// Fill value replicated to dimension d when --t-star is absent.
    #[arg(long)]
    t_star_fill: Option<f64>,
    /// Noise law: gaussian | uniform | logistic-label.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    noise_sd: Option<f64>,
    #[arg(long)]
    noise_lo: Option<f64>,
    #[arg(long)]
    noise_hi: Option<f64>,
    /// Verification sphere radius.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    n_dirs: Option<usize>,
    #[arg(long)]
    n_x: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Norm-equivalence constant (default: empirical L4/L2 ratio).
    #[arg(long)]
    c_prime: Option<f64>,
    /// Moment exponent of the norm equivalence.
    #[arg(long)]
    moment_eps: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ComplexityArgs {
    /// Dataset CSV whose design rows are used.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Covariance: empirical | identity | path to a matrix CSV.
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Bernstein constant; with --lipschitz sets gamma = 1/(575 A L).
    #[arg(long)]
    a_const: Option<f64>,
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long)]
    n_mc: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    loss: LossFlags,
    #[command(flatten)]
    solver: SolverFlags,
    /// Iterations to run (the trace length).
    #[arg(long)]
    iterations: Option<usize>,
    /// Iterations discarded before counting.
    #[arg(long)]
    burn_in: Option<usize>,
    /// Output CSV `index,score`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Model: logistic-student | figure1 | prop1 | prop2.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    t_star: Option<String>,
    #[arg(long)]
    t_star_fill: Option<f64>,
    #[arg(long)]
    noise_sd: Option<f64>,
    /// Corrupted rows for figure1.
    #[arg(long)]
    n_out: Option<usize>,
    /// Corrupted-design coordinate scale for figure1: sd5 | var5.
    #[arg(long)]
    x_scale: Option<String>,
    /// Contamination magnitude for prop1 (`‖v‖ = v_scale * n`).
    #[arg(long)]
    v_scale: Option<f64>,
    /// Deviation level x for prop2.
    #[arg(long, alias = "x")]
    x_level: Option<f64>,
    /// Allow prop2 parameters outside the supported range.
    #[arg(long)]
    relax: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional sidecar metadata file.
    #[arg(long)]
    meta: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version print to stdout and exit 0; usage errors go
            // to stderr with exit code 1.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    if let Some(jobs) = cli.jobs {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .is_err()
        {
            eprintln!("warning: thread pool already initialized; --jobs ignored");
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Argument(_) | Error::Parse(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Fit(a) => cmd_fit(a, &cfg),
        Command::Cv(a) => cmd_cv(a, &cfg),
        Command::Lepski(a) => cmd_lepski(a, &cfg),
        Command::Experiment(a) => exp::cmd_experiment(a.spec, a.out_dir, &cfg),
        Command::Bernstein(a) => cmd_bernstein(a, &cfg),
        Command::Complexity(a) => cmd_complexity(a, &cfg),
        Command::DetectOutliers(a) => cmd_detect(a, &cfg),
        Command::Generate(a) => cmd_generate(a, &cfg),
    }
}

fn parse_loss(r: &Resolver, flags: &LossFlags) -> Result<LossSpec<f64>, Error> {
    let name: String = r.required(flags.loss.clone(), "loss", "--loss")?;
    let delta = r.optional(flags.delta, "delta")?;
    let tau = r.optional(flags.tau, "tau")?;
    match name.as_str() {
        "logistic" => Ok(LossSpec::logistic()),
        "hinge" => Ok(LossSpec::hinge()),
        "huber" => {
            LossSpec::huber(delta.ok_or_else(|| Error::argument("--loss huber requires --delta"))?)
        }
        "quantile" => LossSpec::quantile(
            tau.ok_or_else(|| Error::argument("--loss quantile requires --tau"))?,
        ),
        "l1" => Ok(LossSpec::l1()),
        other => Err(Error::argument(format!("unknown --loss '{other}'"))),
    }
}

fn parse_solver(
    r: &Resolver,
    flags: &SolverFlags,
    need_k: bool,
) -> Result<SolverConfig<f64>, Error> {
    let k = if need_k {
        let k: usize = r.required(flags.k, "k", "--k")?;
        if k == 0 {
            return Err(Error::argument("--k must be at least 1"));
        }
        k
    } else {
        1
    };
    let mut cfg = SolverConfig::new(k, r.resolve(flags.seed, "seed", 0)?);
    cfg.block_strategy = match r
        .resolve(flags.blocks.clone(), "blocks", "resample".into())?
        .as_str()
    {
        "fixed" => BlockStrategy::FixedAtStart,
        "resample" => BlockStrategy::ResampleEachStep,
        other => return Err(Error::argument(format!("unknown --blocks '{other}'"))),
    };
    cfg.median_criterion = match r
        .resolve(
            flags.median_criterion.clone(),
            "median_criterion",
            "incremental".into(),
        )?
        .as_str()
    {
        "incremental" => MedianCriterion::Incremental,
        "plain" => MedianCriterion::PlainRisk,
        other => {
            return Err(Error::argument(format!(
                "unknown --median-criterion '{other}'"
            )))
        }
    };
    cfg.step_rule = match r
        .resolve(flags.step_rule.clone(), "step_rule", "median-block".into())?
        .as_str()
    {
        "median-block" => StepRule::MedianBlockOpNorm,
        "full-data" => StepRule::FullDataOpNorm,
        "constant" => StepRule::Constant(
            r.optional(flags.step, "step")?
                .ok_or_else(|| Error::argument("--step-rule constant requires --step"))?,
        ),
        other => return Err(Error::argument(format!("unknown --step-rule '{other}'"))),
    };
    cfg.step_denominator = match r
        .resolve(
            flags.step_denominator.clone(),
            "step_denominator",
            "block".into(),
        )?
        .as_str()
    {
        "block" => solver::StepDenominator::BlockSize,
        "total" => solver::StepDenominator::TotalN,
        other => {
            return Err(Error::argument(format!(
                "unknown --step-denominator '{other}'"
            )))
        }
    };
    cfg.eps = r.resolve(flags.eps, "eps", 1e-6)?;
    cfg.max_iter = r.resolve(flags.max_iter, "max_iter", 10_000)?;
    Ok(cfg)
}

/// Attributes I/O failures to the file they came from.
fn named_file<T>(res: Result<T, Error>, path: &std::path::Path) -> Result<T, Error> {
    res.map_err(|e| match e {
        Error::Io(io) => Error::argument(format!("cannot read '{}': {io}", path.display())),
        other => other,
    })
}

fn load_dataset(r: &Resolver, path: Option<PathBuf>) -> Result<Dataset<f64>, Error> {
    let path: PathBuf = r.required(path, "data", "--data")?;
    let mut ds = named_file(Dataset::<f64>::read_csv(&path), &path)?;
    let meta = path.with_extension("meta");
    if meta.exists() {
        ds.apply_meta(&meta)?;
    }
    Ok(ds)
}

fn write_kv_rows(path: &PathBuf, rows: &[(String, String)]) -> Result<(), Error> {
    let mut out = String::from("name,value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{v}");
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn cmd_fit(a: FitArgs, cfg: &BTreeMap<String, String>) -> Result<(), Error> {
    let r = Resolver::new(cfg, "fit");
    let loss = parse_loss(&r, &a.loss)?;
    let solver_cfg = parse_solver(&r, &a.solver, !a.erm)?;
    let data = load_dataset(&r, a.data)?;
    let out: PathBuf = r.required(a.out, "out", "--out")?;

    let fit = if a.erm {
        solver::erm_fit(&data, &loss, &solver_cfg)?
    } else {
        solver::mom_fit(&data, &loss, &solver_cfg)?
    };
    let mut rows = vec![
        (
            "estimator".to_string(),
            if a.erm {
                "erm".to_string()
            } else {
                "mom".to_string()
            },
        ),
        ("k".into(), fit.k.to_string()),
        ("iterations".into(), fit.iterations.to_string()),
        ("converged".into(), fit.converged.to_string()),
        ("n".into(), fit.n.to_string()),
        ("d".into(), fit.t_hat.len().to_string()),
    ];
    for (j, v) in fit.t_hat.iter().enumerate() {
        rows.push((format!("t_hat_{}", j + 1), format_float(*v)));
    }
    for (j, v) in fit.t_tilde.iter().enumerate() {
        rows.push((format!("t_tilde_{}", j + 1), format_float(*v)));
    }
    write_kv_rows(&out, &rows)?;
    eprintln!(
        "fit: k={} iterations={} converged={} -> {}",
        fit.k,
        fit.iterations,
        fit.converged,
        out.display()
    );
    Ok(())
}

fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>, Error> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::argument(format!("bad {what} entry '{p}'")))
        })
        .collect()
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::argument(format!("bad {what} entry '{p}'")))
        })
        .collect()
}

fn cmd_cv(a: CvArgs, cfg: &BTreeMap<String, String>) -> Result<(), Error> {
    let r = Resolver::new(cfg, "cv");
    let loss = parse_loss(&r, &a.loss)?;
    let mut solver_cfg = parse_solver(&r, &a.solver, false)?;
    solver_cfg.k = 1;
    let data = load_dataset(&r, a.data)?;
    let grid = match r.optional(a.k_grid, "k_grid")? {
        Some(s) => parse_usize_list(&s, "--k-grid")?,
        None => model_select::default_k_grid(data.n()),
    };
    let v_folds = r.resolve(a.v_folds, "v_folds", 3)?;
    let k = model_select::robust_cv_select_k(&data, &loss, &grid, v_folds, &solver_cfg)?;
    eprintln!("cv: selected k = {k} over grid {grid:?} with {v_folds} folds");
    if let Some(out) = a.out {
        write_kv_rows(&out, &[("selected_k".into(), k.to_string())])?;
    }
    Ok(())
}

fn cmd_lepski(a: LepskiArgs, cfg: &BTreeMap<String, String>) -> Result<(), Error> {
    let r = Resolver::new(cfg, "lepski");
    let loss = parse_loss(&r, &a.loss)?;
    let data = load_dataset(&r, a.data)?;
    let grid_s: String = r.required(a.k_grid, "k_grid", "--k-grid")?;
    let k_grid = parse_usize_list(&grid_s, "--k-grid")?;
    let thr_s: String = r.required(a.thresholds, "thresholds", "--thresholds")?;
    let mut thresholds = BTreeMap::new();
    for part in thr_s.split(',') {
        let (k, v) = part.split_once('=').ok_or_else(|| {
            Error::argument(format!("--thresholds entry '{part}' is not K=value"))
        })?;
        let k: usize = k
            .trim()
            .parse()
            .map_err(|_| Error::argument(format!("bad K in --thresholds '{part}'")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::argument(format!("bad value in --thresholds '{part}'")))?;
        thresholds.insert(k, v);
    }
    let cand_path: PathBuf = r.required(a.candidates, "candidates", "--candidates")?;
    let m: Matrix<f64> = named_file(read_matrix_csv(&cand_path), &cand_path)?;
    let candidates: Vec<Vec<f64>> = (0..m.rows()).map(|i| m.row(i).to_vec()).collect();

    let (k_hat, chosen) = model_select::lepski_select(
        &data,
        &loss,
        &LepskiConfig {
            k_grid,
            thresholds,
            candidates,
        },
    )?;
    eprintln!("lepski: selected k = {k_hat}");
    if let Some(out) = a.out {
        let mut rows = vec![("selected_k".to_string(), k_hat.to_string())];
        for (j, v) in chosen.iter().enumerate() {
            rows.push((format!("t_{}", j + 1), format_float(*v)));
        }
        write_kv_rows(&out, &rows)?;
    }
    Ok(())
}

fn cmd_bernstein(a: BernsteinArgs, cfg: &BTreeMap<String, String>) -> Result<(), Error> {
    let r = Resolver::new(cfg, "bernstein");
    let loss = parse_loss(&r, &a.loss)?;
    let d = r.resolve(a.d, "d", 1)?;
    let design = match r
        .resolve(a.design.clone(), "design", "constant".into())?
        .as_str()
    {
        "constant" => DesignLaw::ConstantOne { d },
        "gaussian" => DesignLaw::Gaussian { d },
        "rademacher" => DesignLaw::Rademacher { d },
        "student-t5" => DesignLaw::StudentT5 { d },
        other => return Err(Error::argument(format!("unknown --design '{other}'"))),
    };
    let t_star = match r.optional(a.t_star, "t_star")? {
        Some(s) => parse_f64_list(&s, "--t-star")?,
        None => vec![r.resolve(a.t_star_fill, "t_star_fill", 1.0)?; d],
    };
    let noise = match r
        .resolve(a.noise.clone(), "noise", "gaussian".into())?
        .as_str()
    {
        "gaussian" => NoiseLaw::Gaussian {
            sd: r.resolve(a.noise_sd, "noise_sd", 1.0)?,
        },
        "uniform" => NoiseLaw::Uniform {
            lo: r.resolve(a.noise_lo, "noise_lo", -1.0)?,
            hi: r.resolve(a.noise_hi, "noise_hi", 1.0)?,
        },
        "logistic-label" => NoiseLaw::LogisticLabel,
        other => return Err(Error::argument(format!("unknown --noise '{other}'"))),
    };
    let model = ConditionalModel::new(design, t_star, noise)?;
    let mut check = BernsteinCheckConfig::new(
        r.resolve(a.r, "r", 0.1)?,
        r.resolve(a.n_dirs, "n_dirs", 16)?,
        r.resolve(a.n_x, "n_x", 256)?,
        r.resolve(a.seed, "seed", 0)?,
    );
    check.c_prime = r.optional(a.c_prime, "c_prime")?;
    check.moment_eps = r.resolve(a.moment_eps, "moment_eps", 2.0)?;
    let report = check_local_bernstein(&model, &loss, &check)?;
    eprintln!(
        "bernstein: min_ratio={:.6} threshold=1/A={:.6} passed={}",
        report.min_ratio,
        1.0 / report.theorem_a,
        report.passed
    );
    if let Some(out) = a.out {
        write_kv_rows(
            &out,
            &[
                ("loss".to_string(), loss.kind().name().to_string()),
                ("r".into(), format_float(report.r)),
                (
                    "directions_tested".into(),
                    report.directions_tested.to_string(),
                ),
                ("min_ratio".into(), format_float(report.min_ratio)),
                ("theorem_a".into(), format_float(report.theorem_a)),
                (
                    "interval_half_width".into(),
                    format_float(report.interval_half_width),
                ),
                ("c_prime".into(), format_float(report.c_prime)),
                ("passed".into(), report.passed.to_string()),
            ],
        )?;
    }
    Ok(())
}

fn cmd_complexity(a: ComplexityArgs, cfg: &BTreeMap<String, String>) -> Result<(), Error> {
    let r = Resolver::new(cfg, "complexity");
    let data = load_dataset(&r, a.data)?;
    let sigma_arg = r.resolve(a.sigma.clone(), "sigma", "empirical".into())?;
    let sigma = match sigma_arg.as_str() {
        "empirical" => data.x.second_moment(),
        "identity" => Matrix::diag(&vec![1.0_f64; data.dim()]),
        path => named_file(
            read_matrix_csv(PathBuf::from(path)),
            std::path::Path::new(path),
        )?,
    };
    let gamma = match r.optional(a.gamma, "gamma")? {
        Some(g) => g,
        None => {
            let a_const: f64 = r.required(a.a_const, "a_const", "--gamma or --a-const")?;
            complexity::default_gamma(a_const, r.resolve(a.lipschitz, "lipschitz", 1.0)?)?
        }
    };
    let n_mc = r.resolve(a.n_mc, "n_mc", 2000)?;
    let seed = r.resolve(a.seed, "seed", 0)?;
    let est = complexity::fixed_point_linear(&data.x, &sigma, gamma, n_mc, seed)?;
    eprintln!(
        "complexity: r_fixed={:.6} (se {:.2e}), rank bound {:.6}",
        est.r_fixed, est.std_error, est.lemma1_bound
    );
    if let Some(out) = a.out {
        write_kv_rows(
            &out,
            &[
                ("r_fixed".to_string(), format_float(est.r_fixed)),
                ("std_error".into(), format_float(est.std_error)),
                ("lemma1_bound".into(), format_float(est.lemma1_bound)),
                ("gamma".into(), format_float(est.gamma)),
                ("n_monte_carlo".into(), est.n_monte_carlo.to_string()),
            ],
        )?;
    }
    Ok(())
}

fn cmd_detect(a: DetectArgs, cfg: &BTreeMap<String, String>) -> Result<(), Error> {
    let r = Resolver::new(cfg, "detect-outliers");
    let loss = parse_loss(&r, &a.loss)?;
    let mut solver_cfg = parse_solver(&r, &a.solver, true)?;
    // The plain-risk median keeps corrupted blocks extreme throughout the
    // trace, which is what the selection counts rely on.
    if a.solver.median_criterion.is_none() && !r.has("median_criterion") {
        solver_cfg.median_criterion = MedianCriterion::PlainRisk;
    }
    solver_cfg.max_iter = r.resolve(a.iterations, "iterations", 5000)?;
    solver_cfg.eps = 1e-300;
    solver_cfg.record_trace = true;
    let data = load_dataset(&r, a.data)?;
    let out: PathBuf = r.required(a.out, "out", "--out")?;
    let burn_in = r.resolve(a.burn_in, "burn_in", solver_cfg.max_iter / 5)?;

    let fit = solver::mom_fit(&data, &loss, &solver_cfg)?;
    let scores = diagnostics::outlier_scores(&fit, burn_in)?;
    let mut text = String::from("index,score\n");
    for (i, c) in scores.counts.iter().enumerate() {
        let _ = writeln!(text, "{i},{c}");
    }
    std::fs::write(&out, text)?;
    eprintln!(
        "detect-outliers: {} iterations counted after burn-in {} -> {}",
        scores.iterations_counted,
        scores.burn_in,
        out.display()
    );
    Ok(())
}

fn cmd_generate(a: GenerateArgs, cfg: &BTreeMap<String, String>) -> Result<(), Error> {
    let r = Resolver::new(cfg, "generate");
    let model: String = r.required(a.model.clone(), "model", "--model")?;
    let n = r.resolve(a.n, "n", 1000)?;
    let seed = r.resolve(a.seed, "seed", 0)?;
    let out: PathBuf = r.required(a.out.clone(), "out", "--out")?;

    let t_star_of = |d: usize| -> Result<Vec<f64>, Error> {
        match r.optional(a.t_star.clone(), "t_star")? {
            Some(s) => {
                let v = parse_f64_list(&s, "--t-star")?;
                if v.len() != d {
                    return Err(Error::argument(format!(
                        "--t-star has {} entries, expected {d}",
                        v.len()
                    )));
                }
                Ok(v)
            }
            None => Ok(vec![r.resolve(a.t_star_fill, "t_star_fill", 1.0)?; d]),
        }
    };

    let mut params = BTreeMap::new();
    let (ds, gen_name) = match model.as_str() {
        "logistic-student" => {
            let d = r.resolve(a.d, "d", 10)?;
            let noise_sd = r.resolve(a.noise_sd, "noise_sd", 1.0)?;
            params.insert("noise_sd".into(), format_float(noise_sd));
            (
                datagen::gen_logistic_student(n, d, &t_star_of(d)?, noise_sd, seed)?,
                "logistic_student",
            )
        }
        "figure1" => {
            let d = r.resolve(a.d, "d", 10)?;
            let noise_sd = r.resolve(a.noise_sd, "noise_sd", 1.0)?;
            let n_out = r.resolve(a.n_out, "n_out", 0)?;
            let scale = match r
                .resolve(a.x_scale.clone(), "x_scale", "sd5".into())?
                .as_str()
            {
                "sd5" => OutlierXScale::StdDev5,
                "var5" => OutlierXScale::Var5,
                other => return Err(Error::argument(format!("unknown --x-scale '{other}'"))),
            };
            params.insert("noise_sd".into(), format_float(noise_sd));
            params.insert("n_out".into(), n_out.to_string());
            let t_star = t_star_of(d)?;
            let clean = datagen::gen_logistic_student(n, d, &t_star, noise_sd, seed)?;
            (
                datagen::corrupt_figure1(
                    &clean,
                    n_out,
                    &t_star,
                    scale,
                    minmax_mom::rng::derive_seed(
                        seed,
                        minmax_mom::rng::streams::DATAGEN_ROW,
                        u64::MAX,
                    ),
                )?,
                "figure1",
            )
        }
        "prop1" => {
            let d = r.resolve(a.d, "d", 10)?;
            let v_scale = r.resolve(a.v_scale, "v_scale", 10.0)?;
            params.insert("v_scale".into(), format_float(v_scale));
            (
                datagen::gen_prop1(n, d, &t_star_of(d)?, v_scale, seed)?,
                "prop1",
            )
        }
        "prop2" => {
            let x_level = r.resolve(a.x_level, "x_level", 10.0)?;
            let t_star = r.resolve(a.t_star_fill, "t_star_fill", 0.0)?;
            params.insert("x_level".into(), format_float(x_level));
            (
                datagen::gen_prop2(n, x_level, t_star, a.relax, seed)?,
                "prop2",
            )
        }
        other => return Err(Error::argument(format!("unknown --model '{other}'"))),
    };

    ds.write_csv(&out)?;
    if let Some(meta) = &a.meta {
        ds.write_meta(meta, gen_name, &params)?;
    }
    eprintln!(
        "generate: {} rows x {} columns -> {}",
        ds.n(),
        ds.dim(),
        out.display()
    );
    Ok(())
}
