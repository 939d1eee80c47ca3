//! Experiment specifications, seeded trial orchestration, per-run CSV and
//! per-point summaries, and comparison of empirical means against the bounds
//! in [`crate::theory`].

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::benchmarks::{Objective, ObjectiveKind};
use crate::bitstring::derive_seed;
use crate::engine::{run, EAConfig, Selection, TiePolicy, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::stats::{Moments, Z_95};
use crate::theory::{self, CommaLowerParams, CommaUpperParams};

pub const DEFAULT_TRIALS: u64 = 1000;

/// Largest sweep a spec may describe.
pub const MAX_GRID_POINTS: usize = 100_000;

/// Header of the per-run CSV, in column order.
pub const RUNS_CSV_HEADER: [&str; 14] = [
    "experiment_id",
    "grid_index",
    "trial",
    "n",
    "k",
    "mu",
    "lambda",
    "selection",
    "mutation_rate",
    "seed",
    "evaluations",
    "iterations",
    "censored",
    "best_fitness",
];

/// A sweep axis; deserializes from a scalar or an array.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Grid<T>(pub Vec<T>);

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Grid<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum OneOrMany<T> {
            Many(Vec<T>),
            One(T),
        }
        Ok(match OneOrMany::deserialize(d)? {
            OneOrMany::Many(v) => Grid(v),
            OneOrMany::One(v) => Grid(vec![v]),
        })
    }
}

impl<T> From<Vec<T>> for Grid<T> {
    fn from(v: Vec<T>) -> Self {
        Grid(v)
    }
}

impl<T> Grid<T> {
    pub fn one(v: T) -> Self {
        Grid(vec![v])
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs_csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary_json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary_csv: Option<PathBuf>,
}

impl Outputs {
    /// `runs.csv`, `summary.json` and `summary.csv` inside `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            runs_csv: Some(dir.join("runs.csv")),
            summary_json: Some(dir.join("summary.json")),
            summary_csv: Some(dir.join("summary.csv")),
        }
    }
}

/// Constants for the theory columns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheorySettings {
    #[serde(default = "default_c")]
    pub c: f64,
    /// `C` of the comma lower bound; the smallest valid value for `c` if unset.
    #[serde(default, rename = "C", skip_serializing_if = "Option::is_none")]
    pub big_c: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
    pub big_k: Option<f64>,
}

fn default_c() -> f64 {
    0.1
}

fn default_delta() -> f64 {
    0.5
}

impl Default for TheorySettings {
    fn default() -> Self {
        Self {
            c: default_c(),
            big_c: None,
            delta: default_delta(),
            big_k: None,
        }
    }
}

impl TheorySettings {
    pub fn big_c(&self) -> f64 {
        self.big_c.unwrap_or_else(|| theory::minimal_big_c(self.c))
    }
}

fn default_experiment_id() -> String {
    "experiment".into()
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

fn default_budget() -> Option<u64> {
    Some(DEFAULT_BUDGET)
}

fn default_selection() -> Grid<Selection> {
    Grid::one(Selection::Comma)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "default_experiment_id")]
    pub experiment_id: String,
    /// Objective identifier, e.g. `jump:k=3` or `onemax`.
    pub objective: String,
    pub n: Grid<usize>,
    /// Jump sizes; overrides a `k` embedded in `objective`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Grid<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Grid<usize>>,
    /// `μ = max(1, ⌊fraction·λ⌋)`; exclusive with `mu`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_fraction: Option<Grid<f64>>,
    pub lambda: Grid<usize>,
    #[serde(default = "default_selection")]
    pub selection: Grid<Selection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation_rate: Option<f64>,
    #[serde(default)]
    pub tie_policy: TiePolicy,
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Evaluation budget per run; `null` for unlimited.
    #[serde(default = "default_budget")]
    pub budget: Option<u64>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub theory: TheorySettings,
}

/// One point of the sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: usize,
    pub n: usize,
    pub k: Option<usize>,
    pub mu: usize,
    pub lambda: usize,
    pub selection: Selection,
}

impl ExperimentSpec {
    /// A single-point spec with defaults for everything else.
    pub fn single(objective: &str, n: usize, mu: usize, lambda: usize, selection: Selection) -> Self {
        Self {
            experiment_id: default_experiment_id(),
            objective: objective.into(),
            n: Grid::one(n),
            k: None,
            mu: Some(Grid::one(mu)),
            mu_fraction: None,
            lambda: Grid::one(lambda),
            selection: Grid::one(selection),
            mutation_rate: None,
            tie_policy: TiePolicy::default(),
            trials: DEFAULT_TRIALS,
            budget: default_budget(),
            master_seed: 0,
            outputs: Outputs::default(),
            theory: TheorySettings::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let mut text = String::new();
        File::open(path)?.read_to_string(&mut text)?;
        Self::from_json(&text)
    }

    pub fn objective_kind(&self) -> Result<ObjectiveKind> {
        self.objective.parse()
    }

    /// Grid points ordered by `n`, `k`, `λ`, `μ`, selection (last varies fastest).
    pub fn grid(&self) -> Result<Vec<GridPoint>> {
        let kind = self.objective_kind()?;
        let size = [
            self.n.0.len(),
            self.k.as_ref().map_or(1, |g| g.0.len()),
            self.lambda.0.len(),
            match (&self.mu, &self.mu_fraction) {
                (Some(g), _) => g.0.len(),
                (None, Some(g)) => g.0.len(),
                (None, None) => 1,
            },
            self.selection.0.len(),
        ]
        .into_iter()
        .fold(1usize, usize::saturating_mul);
        if size > MAX_GRID_POINTS {
            return Err(Error::InvalidConfig(format!(
                "sweep has {size} grid points, more than {MAX_GRID_POINTS}"
            )));
        }
        let ks: Vec<Option<usize>> = match (&self.k, kind) {
            (Some(g), ObjectiveKind::Jump { .. }) => g.0.iter().copied().map(Some).collect(),
            (Some(_), _) => {
                return Err(Error::InvalidConfig(format!(
                    "k grid given for non-jump objective {kind}"
                )))
            }
            (None, ObjectiveKind::Jump { k: Some(k) }) => vec![Some(k)],
            (None, ObjectiveKind::Jump { k: None }) => {
                return Err(Error::InvalidConfig(
                    "jump objective needs k (in the id or as a grid)".into(),
                ))
            }
            (None, _) => vec![None],
        };
        let mut out = Vec::new();
        for &n in &self.n.0 {
            for &k in &ks {
                for &lambda in &self.lambda.0 {
                    let mus: Vec<usize> = match (&self.mu, &self.mu_fraction) {
                        (Some(_), Some(_)) => {
                            return Err(Error::InvalidConfig("give mu or mu_fraction, not both".into()))
                        }
                        (Some(g), None) => g.0.clone(),
                        (None, Some(g)) => {
                            let mut v = Vec::with_capacity(g.0.len());
                            for &f in &g.0 {
                                if !(f > 0.0 && f.is_finite()) {
                                    return Err(Error::InvalidConfig(format!("mu_fraction {f} must be positive")));
                                }
                                v.push(((f * lambda as f64).floor() as usize).max(1));
                            }
                            v
                        }
                        (None, None) => vec![1],
                    };
                    for &mu in &mus {
                        for &selection in &self.selection.0 {
                            out.push(GridPoint {
                                index: out.len(),
                                n,
                                k,
                                mu,
                                lambda,
                                selection,
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn objective_for(&self, p: &GridPoint) -> Result<Objective> {
        self.objective_kind()?.instantiate(p.n, p.k)
    }

    pub fn config_for(&self, p: &GridPoint) -> EAConfig {
        let mut c = EAConfig::new(p.n, p.mu, p.lambda, p.selection)
            .with_budget(self.budget)
            .with_tie_policy(self.tie_policy);
        c.mutation_rate = self.mutation_rate;
        c
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        let empty = |name: &str, len: usize| {
            if len == 0 {
                Err(Error::InvalidConfig(format!("grid {name} is empty")))
            } else {
                Ok(())
            }
        };
        empty("n", self.n.0.len())?;
        empty("lambda", self.lambda.0.len())?;
        empty("selection", self.selection.0.len())?;
        if let Some(g) = &self.k {
            empty("k", g.0.len())?;
        }
        if let Some(g) = &self.mu {
            empty("mu", g.0.len())?;
        }
        if let Some(g) = &self.mu_fraction {
            empty("mu_fraction", g.0.len())?;
        }
        for p in self.grid()? {
            self.objective_for(&p)?;
            self.config_for(&p).validate()?;
        }
        Ok(())
    }
}

/// One line of the per-run CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub experiment_id: String,
    pub grid_index: usize,
    pub trial: u64,
    pub n: usize,
    pub k: Option<usize>,
    pub mu: usize,
    pub lambda: usize,
    pub selection: Selection,
    pub mutation_rate: f64,
    pub seed: u64,
    pub evaluations: u64,
    pub iterations: u64,
    pub censored: bool,
    pub best_fitness: i64,
}

/// Empirical statistics and theory columns for one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub grid_index: usize,
    pub objective: String,
    pub n: usize,
    pub k: Option<usize>,
    pub mu: usize,
    pub lambda: usize,
    pub selection: Selection,
    pub trials: u64,
    pub successes: u64,
    pub censored: u64,
    /// Statistics of `T` over uncensored runs only.
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub sem: Option<f64>,
    pub ci95_low: Option<f64>,
    pub ci95_high: Option<f64>,
    pub min: Option<u64>,
    pub max: Option<u64>,
    pub p_k: Option<f64>,
    pub inv_p_k: Option<f64>,
    pub comma_lower: Option<f64>,
    pub comma_lower_valid: Option<bool>,
    pub comma_upper: Option<f64>,
    pub comma_upper_valid: Option<bool>,
    pub plus_lower: Option<f64>,
    pub plus_lower_valid: Option<bool>,
    pub ratio_mean_inv_p_k: Option<f64>,
}

/// Summarizes the runs of one grid point.
pub fn summarize(point: &GridPoint, objective: &str, runs: &[RunRecord], settings: &TheorySettings) -> SummaryRow {
    let done: Vec<f64> = runs
        .iter()
        .filter(|r| !r.censored)
        .map(|r| r.evaluations as f64)
        .collect();
    let m = Moments::of(&done);
    let ci = m.map(|m| m.interval(Z_95));
    let uncensored = || runs.iter().filter(|r| !r.censored).map(|r| r.evaluations);
    let mut row = SummaryRow {
        grid_index: point.index,
        objective: objective.to_owned(),
        n: point.n,
        k: point.k,
        mu: point.mu,
        lambda: point.lambda,
        selection: point.selection,
        trials: runs.len() as u64,
        successes: done.len() as u64,
        censored: (runs.len() - done.len()) as u64,
        mean: m.map(|m| m.mean),
        std: m.map(|m| m.std),
        sem: m.map(|m| m.sem),
        ci95_low: ci.map(|c| c.0),
        ci95_high: ci.map(|c| c.1),
        min: uncensored().min(),
        max: uncensored().max(),
        p_k: None,
        inv_p_k: None,
        comma_lower: None,
        comma_lower_valid: None,
        comma_upper: None,
        comma_upper_valid: None,
        plus_lower: None,
        plus_lower_valid: None,
        ratio_mean_inv_p_k: None,
    };
    let Some(k) = point.k.filter(|&k| k >= 2 && point.n >= 2) else {
        return row;
    };
    let (n, k, mu, lambda) = (point.n as u64, k as u64, point.mu as u64, point.lambda as u64);
    if let Ok(p) = theory::p_k(n, k) {
        row.p_k = Some(p.value);
        row.inv_p_k = Some(p.inverse());
        row.ratio_mean_inv_p_k = row.mean.map(|m| m * p.value);
    }
    if let Ok(r) = theory::comma_ea_lower_bound(CommaLowerParams {
        n,
        k,
        mu,
        lambda,
        c: settings.c,
        big_c: settings.big_c(),
    }) {
        row.comma_lower = Some(r.value);
        row.comma_lower_valid = Some(r.preconditions_satisfied);
    }
    if let Ok(r) = theory::comma_ea_upper_bound(CommaUpperParams {
        n,
        k,
        mu,
        lambda,
        delta: settings.delta,
        big_k: settings.big_k,
    }) {
        row.comma_upper = Some(r.value);
        row.comma_upper_valid = Some(r.preconditions_satisfied);
    }
    if let Ok(r) = theory::plus_ea_lower_bound(n, k, mu) {
        row.plus_lower = Some(r.value);
        row.plus_lower_valid = Some(r.preconditions_satisfied);
    }
    row
}

/// Seed of trial `trial` at grid point `grid_index`.
pub fn trial_seed(master_seed: u64, grid_index: usize, trial: u64) -> u64 {
    derive_seed(master_seed, &[grid_index as u64, trial])
}

/// Runs every trial of one grid point. Results are in trial order regardless
/// of scheduling.
pub fn run_point(spec: &ExperimentSpec, point: &GridPoint) -> Result<Vec<RunRecord>> {
    let objective = spec.objective_for(point)?;
    let base = spec.config_for(point);
    base.validate()?;
    let rate = base.rate();
    (0..spec.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(spec.master_seed, point.index, trial);
            let cfg = base.clone().with_seed(seed);
            let r = run(&cfg, &objective, None)?;
            Ok(RunRecord {
                experiment_id: spec.experiment_id.clone(),
                grid_index: point.index,
                trial,
                n: point.n,
                k: point.k,
                mu: point.mu,
                lambda: point.lambda,
                selection: point.selection,
                mutation_rate: rate,
                seed,
                evaluations: r.evaluations,
                iterations: r.iterations,
                censored: r.censored,
                best_fitness: r.best_fitness_seen,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; the global rayon pool when `None`.
    pub threads: Option<usize>,
    /// Keep every [`RunRecord`] in the returned output.
    pub keep_runs: bool,
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    pub rows: Vec<SummaryRow>,
    pub runs: Vec<RunRecord>,
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

/// Runs the whole sweep, writing the configured outputs as grid points
/// complete.
pub fn run_experiment(spec: &ExperimentSpec, opts: &RunOptions) -> Result<ExperimentOutput> {
    spec.validate()?;
    match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(|| run_experiment_inner(spec, opts)),
        None => run_experiment_inner(spec, opts),
    }
}

fn run_experiment_inner(spec: &ExperimentSpec, opts: &RunOptions) -> Result<ExperimentOutput> {
    let mut runs_out = spec.outputs.runs_csv.as_deref().map(csv_writer).transpose()?;
    let mut out = ExperimentOutput::default();
    for point in spec.grid()? {
        let records = run_point(spec, &point)?;
        if let Some(w) = runs_out.as_mut() {
            for r in &records {
                w.serialize(r)?;
            }
        }
        out.rows
            .push(summarize(&point, &spec.objective, &records, &spec.theory));
        if opts.keep_runs {
            out.runs.extend(records);
        }
    }
    if let Some(mut w) = runs_out {
        w.flush()?;
    }
    if let Some(path) = spec.outputs.summary_csv.as_deref() {
        write_summary_csv(path, &out.rows)?;
    }
    if let Some(path) = spec.outputs.summary_json.as_deref() {
        write_json(path, &out.rows)?;
    }
    Ok(out)
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

/// Parses a per-run CSV, rejecting any header other than [`RUNS_CSV_HEADER`].
pub fn read_runs_csv<R: Read>(reader: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?;
    if header.iter().ne(RUNS_CSV_HEADER.iter().copied()) {
        return Err(Error::InvalidConfig(format!(
            "unexpected runs CSV header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let records: Vec<RunRecord> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
    for r in &records {
        if r.mu == 0 || r.lambda == 0 || r.n == 0 {
            return Err(Error::InvalidConfig(format!(
                "run record with zero n, mu or lambda: {r:?}"
            )));
        }
    }
    Ok(records)
}

/// Groups per-run records by grid point and summarizes each group.
pub fn summarize_runs(records: &[RunRecord], objective: &str, settings: &TheorySettings) -> Vec<SummaryRow> {
    let mut indices: Vec<usize> = records.iter().map(|r| r.grid_index).collect();
    indices.sort_unstable();
    indices.dedup();
    indices
        .into_iter()
        .map(|g| {
            let group: Vec<RunRecord> = records.iter().filter(|r| r.grid_index == g).cloned().collect();
            let first = &group[0];
            let point = GridPoint {
                index: g,
                n: first.n,
                k: first.k,
                mu: first.mu,
                lambda: first.lambda,
                selection: first.selection,
            };
            summarize(&point, objective, &group, settings)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Violation,
    NoData,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub bound: Option<f64>,
    pub mean: Option<f64>,
    pub sem: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub grid_index: usize,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub comparisons: Vec<Comparison>,
    pub violations: usize,
}

/// Slack, in standard errors, before a mean counts as violating a bound.
pub const VIOLATION_SEMS: f64 = 3.0;

fn check(name: &str, row: &SummaryRow, bound: Option<f64>, valid: Option<bool>, lower: bool) -> Check {
    let status = match (row.mean, row.sem, bound, valid) {
        _ if row.successes == 0 => CheckStatus::NoData,
        (_, _, None, _) | (_, _, _, Some(false)) | (_, _, _, None) => CheckStatus::NotApplicable,
        (Some(m), Some(s), Some(b), Some(true)) => {
            let violated = if lower {
                m < b - VIOLATION_SEMS * s
            } else {
                m > b + VIOLATION_SEMS * s
            };
            if violated {
                CheckStatus::Violation
            } else {
                CheckStatus::Pass
            }
        }
        _ => CheckStatus::NoData,
    };
    Check {
        name: name.into(),
        status,
        bound,
        mean: row.mean,
        sem: row.sem,
    }
}

/// Tests each row's mean against the bounds that apply to its selection
/// scheme: lower bounds fail when `mean < bound - 3·SEM`, upper bounds when
/// `mean > bound + 3·SEM`.
pub fn compare_to_theory(rows: &[SummaryRow]) -> CompareReport {
    let comparisons: Vec<Comparison> = rows
        .iter()
        .map(|row| {
            let checks = match row.selection {
                Selection::Comma => vec![
                    check("comma_lower", row, row.comma_lower, row.comma_lower_valid, true),
                    check("comma_upper", row, row.comma_upper, row.comma_upper_valid, false),
                ],
                Selection::Plus => vec![check("plus_lower", row, row.plus_lower, row.plus_lower_valid, true)],
            };
            Comparison {
                grid_index: row.grid_index,
                checks,
            }
        })
        .collect();
    let violations = comparisons
        .iter()
        .flat_map(|c| &c.checks)
        .filter(|c| c.status == CheckStatus::Violation)
        .count();
    CompareReport {
        comparisons,
        violations,
    }
}
