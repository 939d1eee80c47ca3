use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use comma_ea::benchmarks::ObjectiveKind;
use comma_ea::bitstring::{derive_seed, RandomSource};
use comma_ea::drift::{self, PotentialParams};
use comma_ea::experiment::{
    compare_to_theory, read_runs_csv, run_experiment, summarize_runs, write_json, CheckStatus, ExperimentSpec, Grid,
    Outputs, RunOptions, TheorySettings,
};
use comma_ea::theory::{self, BoundParams, CommaLowerParams, CommaUpperParams, LevelBasedParams};
use comma_ea::{EAConfig, Selection};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "comma-ea",
    version,
    about = "Runtime experiments and bounds for the (mu,lambda) and (mu+lambda) EA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single parameter point
    Run(ExperimentArgs),
    /// Run a grid of parameter points
    Sweep(ExperimentArgs),
    /// Evaluate closed-form bounds
    Theory(TheoryArgs),
    /// One-generation drift probes from synthetic populations
    Drift(DriftArgs),
    /// Exact expected runtime of the (1+1) EA on small instances
    Oracle(OracleArgs),
    /// Compare a per-run CSV against the bounds
    Compare(CompareArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment spec; the flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Evaluation budget per run (0 for unlimited)
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    objective: Option<String>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    mu: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    selection: Vec<Selection>,
    /// Exit nonzero if any bound comparison is violated
    #[arg(long)]
    check: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Formula {
    PK,
    PlusLower,
    PlusUpper,
    CommaLower,
    CommaUpper,
    LevelT0,
    ZSchedule,
    Uniform,
    Derived,
    All,
}

#[derive(Args)]
struct TheoryArgs {
    #[arg(long, value_enum, default_value = "all")]
    formula: Formula,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 2)]
    k: u64,
    #[arg(long, default_value_t = 1)]
    mu: u64,
    #[arg(long, default_value_t = 1)]
    lambda: u64,
    #[arg(long, default_value_t = 0.1)]
    c: f64,
    /// Comma lower-bound constant; smallest valid value for `c` if omitted
    #[arg(long = "C")]
    big_c: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long = "K")]
    big_k: Option<f64>,
    /// Target level for the level-based t0; defaults to m-1 = n
    #[arg(long)]
    ell: Option<u64>,
    /// Number of global optima for the uniform-sampling bound
    #[arg(long = "M", default_value_t = 1.0)]
    optima: f64,
    /// Number of initial samples for the uniform-sampling bound; defaults to mu+lambda
    #[arg(long = "N")]
    samples: Option<u64>,
    #[arg(long, default_value_t = theory::DEFAULT_LEADING_TERM_THRESHOLD)]
    threshold: f64,
}

#[derive(Args)]
struct DriftArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    mu: usize,
    #[arg(long)]
    lambda: usize,
    #[arg(long, default_value_t = 0.1)]
    c: f64,
    #[arg(long = "C")]
    big_c: Option<f64>,
    /// Start levels; all of 0..k-1 if omitted
    #[arg(long, value_delimiter = ',')]
    level: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    /// Exit nonzero if a drift or level-transition inequality is violated
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value = "onemax")]
    objective: String,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    /// Per-run CSV written by `run` or `sweep`
    #[arg(long)]
    runs: PathBuf,
    #[arg(long, default_value = "jump")]
    objective: String,
    #[arg(long, default_value_t = 0.1)]
    c: f64,
    #[arg(long = "C")]
    big_c: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long = "K")]
    big_k: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    check: bool,
}

/// Exit codes: 0 success, 1 error (including usage), 2 flagged violation.
fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// `Ok(false)` signals a flagged violation under `--check`.
fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(a) => experiment(a, true),
        Command::Sweep(a) => experiment(a, false),
        Command::Theory(a) => theory_cmd(a),
        Command::Drift(a) => drift_cmd(a),
        Command::Oracle(a) => oracle_cmd(a),
        Command::Compare(a) => compare_cmd(a),
    }
}

fn print(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn build_spec(a: &ExperimentArgs, single: bool) -> Result<ExperimentSpec> {
    let mut spec = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<ExperimentSpec>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => {
            let objective = a
                .objective
                .clone()
                .context("--objective is required without --config")?;
            let n = *a.n.first().context("--n is required without --config")?;
            let lambda = *a.lambda.first().context("--lambda is required without --config")?;
            ExperimentSpec::single(&objective, n, 1, lambda, Selection::Comma)
        }
    };
    if let Some(o) = &a.objective {
        spec.objective = o.clone();
    }
    if !a.n.is_empty() {
        spec.n = Grid(a.n.clone());
    }
    if !a.k.is_empty() {
        spec.k = Some(Grid(a.k.clone()));
    }
    if !a.mu.is_empty() {
        spec.mu = Some(Grid(a.mu.clone()));
        spec.mu_fraction = None;
    }
    if !a.lambda.is_empty() {
        spec.lambda = Grid(a.lambda.clone());
    }
    if !a.selection.is_empty() {
        spec.selection = Grid(a.selection.clone());
    }
    if let Some(s) = a.seed {
        spec.master_seed = s;
    }
    if let Some(t) = a.trials {
        spec.trials = t;
    }
    if let Some(b) = a.budget {
        spec.budget = (b > 0).then_some(b);
    }
    if let Some(dir) = &a.out_dir {
        spec.outputs = Outputs::in_dir(dir);
    }
    spec.validate()?;
    if single && spec.grid()?.len() != 1 {
        bail!("`run` takes a single parameter point; use `sweep` for grids");
    }
    Ok(spec)
}

fn experiment(a: ExperimentArgs, single: bool) -> Result<bool> {
    let spec = build_spec(&a, single)?;
    let out = run_experiment(
        &spec,
        &RunOptions {
            threads: a.threads,
            keep_runs: false,
        },
    )?;
    let report = compare_to_theory(&out.rows);
    if let Some(dir) = &a.out_dir {
        write_json(&dir.join("compare.json"), &report)?;
        write_json(&dir.join("spec.json"), &spec)?;
    }
    print(&json!({ "summary": out.rows, "compare": report }))?;
    Ok(!(a.check && report.violations > 0))
}

fn theory_cmd(a: TheoryArgs) -> Result<bool> {
    let big_c = a.big_c.unwrap_or_else(|| theory::minimal_big_c(a.c));
    let tp = BoundParams {
        n: a.n,
        k: a.k,
        mu: a.mu,
        lambda: a.lambda,
        c: a.c,
        big_c,
        delta: a.delta,
        big_k: a.big_k,
    };
    let mut out: Vec<(&str, Value)> = Vec::new();
    let want = |f: Formula| {
        matches!(a.formula, Formula::All) || std::mem::discriminant(&a.formula) == std::mem::discriminant(&f)
    };
    if want(Formula::PK) {
        out.push(("p_k", serde_json::to_value(theory::p_k_report(a.n, a.k)?)?));
    }
    if want(Formula::PlusLower) {
        out.push(("plus_lower", serde_json::to_value(tp.plus_lower()?)?));
    }
    if want(Formula::PlusUpper) {
        out.push(("plus_upper", serde_json::to_value(tp.plus_upper(a.threshold)?)?));
    }
    if want(Formula::CommaLower) {
        out.push((
            "comma_lower",
            serde_json::to_value(theory::comma_ea_lower_bound(CommaLowerParams {
                n: a.n,
                k: a.k,
                mu: a.mu,
                lambda: a.lambda,
                c: a.c,
                big_c,
            })?)?,
        ));
    }
    if want(Formula::CommaUpper) {
        out.push((
            "comma_upper",
            serde_json::to_value(theory::comma_ea_upper_bound(CommaUpperParams {
                n: a.n,
                k: a.k,
                mu: a.mu,
                lambda: a.lambda,
                delta: a.delta,
                big_k: a.big_k,
            })?)?,
        ));
    }
    if want(Formula::ZSchedule) || want(Formula::LevelT0) {
        let z = theory::jump_z_schedule(a.n, a.k)?;
        if want(Formula::LevelT0) {
            let r = theory::level_based_t0(&LevelBasedParams {
                m: a.n + 1,
                ell: a.ell.unwrap_or(a.n),
                z: z.z.clone(),
                delta: a.delta,
                gamma0_lambda: theory::gamma0_lambda(a.lambda, a.delta),
                lambda: a.lambda,
            })?;
            out.push(("level_t0", serde_json::to_value(r)?));
        }
        if want(Formula::ZSchedule) {
            out.push(("z_schedule", serde_json::to_value(z)?));
        }
    }
    if want(Formula::Uniform) {
        let r =
            theory::uniform_sampling_lower_bound(a.n, a.optima, a.mu, a.lambda, a.samples.unwrap_or(a.mu + a.lambda))?;
        out.push(("uniform", serde_json::to_value(r)?));
    }
    if want(Formula::Derived) {
        out.push(("derived", serde_json::to_value(tp.derived())?));
    }
    if matches!(a.formula, Formula::All) {
        out.push(("order_only", serde_json::to_value(theory::order_only_references())?));
    }
    let map: serde_json::Map<String, Value> = out.into_iter().map(|(k, v)| (k.to_owned(), v)).collect();
    print(&map)?;
    Ok(true)
}

fn drift_cmd(a: DriftArgs) -> Result<bool> {
    let big_c = a.big_c.unwrap_or_else(|| theory::minimal_big_c(a.c));
    let params = PotentialParams::new(a.n, a.k, a.lambda, a.c, big_c)?;
    let f = ObjectiveKind::Jump { k: Some(a.k) }.instantiate(a.n, None)?;
    let cfg = EAConfig::new(a.n, a.mu, a.lambda, Selection::Comma);
    let levels: Vec<usize> = if a.level.is_empty() {
        (0..a.k).collect()
    } else {
        a.level.clone()
    };
    let stay_bound = (-(1.0 - 2.0 * (1.0 / std::f64::consts::E + a.c)).powi(2) * a.lambda as f64 / 2.0).exp();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.threads.unwrap_or(0))
        .build()?;
    let mut ok = true;
    let mut results = Vec::new();
    for &level in &levels {
        let mut rng = RandomSource::new(derive_seed(a.seed, &[u64::MAX, level as u64]));
        let pop = drift::population_at_level(&params, a.mu, level, &mut rng)?;
        let est = pool.install(|| {
            drift::estimate_drift(&pop, &cfg, &f, &params, a.samples, derive_seed(a.seed, &[level as u64]))
        })?;
        let drift_ok = est.mean_delta <= 1.0 + 3.0 * est.sem;
        let stay_ok = level == 0 || est.stay.frequency <= stay_bound + 3.0 * est.stay.sem;
        let gain_ok = est
            .gain
            .iter()
            .enumerate()
            .filter(|(i, _)| level + i + 1 < a.k)
            .all(|(i, g)| g.frequency <= (a.n as f64).powi(-2 * (i as i32 + 1)) + 3.0 * g.sem);
        ok &= drift_ok && stay_ok && gain_ok;
        results.push(json!({
            "estimate": est,
            "drift_ok": drift_ok,
            "stay_bound": stay_bound,
            "stay_ok": stay_ok,
            "gain_ok": gain_ok,
        }));
    }
    print(&json!({ "params": params, "levels": results }))?;
    Ok(!a.check || ok)
}

fn oracle_cmd(a: OracleArgs) -> Result<bool> {
    if a.n.is_empty() {
        bail!("--n is required");
    }
    let kind: ObjectiveKind = a.objective.parse()?;
    let mut out = Vec::new();
    for &n in &a.n {
        let f = kind.instantiate(n, a.k)?;
        out.push(json!({ "objective": f, "result": drift::exact_hitting_time(&f)? }));
    }
    print(&out)?;
    Ok(true)
}

fn compare_cmd(a: CompareArgs) -> Result<bool> {
    let file = std::fs::File::open(&a.runs).with_context(|| format!("opening {}", a.runs.display()))?;
    let records = read_runs_csv(file)?;
    let settings = TheorySettings {
        c: a.c,
        big_c: a.big_c,
        delta: a.delta,
        big_k: a.big_k,
    };
    let rows = summarize_runs(&records, &a.objective, &settings);
    let report = compare_to_theory(&rows);
    if let Some(dir) = &a.out_dir {
        write_json(&dir.join("compare.json"), &report)?;
        write_json(&dir.join("summary.json"), &rows)?;
    }
    let violations: Vec<_> = report
        .comparisons
        .iter()
        .flat_map(|c| c.checks.iter().map(move |k| (c.grid_index, k)))
        .filter(|(_, k)| k.status == CheckStatus::Violation)
        .map(|(g, k)| json!({ "grid_index": g, "check": k.name }))
        .collect();
    print(&json!({ "summary": rows, "compare": report, "violations": violations }))?;
    Ok(!(a.check && report.violations > 0))
}
