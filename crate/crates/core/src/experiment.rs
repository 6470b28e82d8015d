//! Batch experiments: configuration, controller comparison, horizon sweep and
//! noise study.
//!
//! Every study runs its cells on a worker pool, collects the results in a
//! fixed order (controller, horizon, seed) and only then writes its files, each
//! through a temporary file that is renamed into place. A failing run therefore
//! never leaves partial output behind.
//!
//! Configuration is one JSON document. Missing keys take their defaults, so an
//! empty document describes the default desk experiment. Any key can be
//! overridden from the environment: `AQUAMPC_COSTS__LAMBDA=0.2` sets
//! `costs.lambda`, with `__` separating nested keys. Keys match
//! case-insensitively and values are read as JSON, falling back to a plain
//! string.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::{DeserializeOwned, Deserializer};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cost::{ControllerKind, CostConfig};
use crate::error::{Error, Result};
use crate::growth::{ControlInput, GrowthParams, SimConfig};
use crate::metrics::{evaluate_run, FarmConfig, MseMode, PerformanceReport};
use crate::mpc::{
    run_closed_loop, ClosedLoopConfig, ClosedLoopResult, ControlBounds, HorizonConfig, NoiseConfig,
    NoiseStats, SolverOptions,
};
use crate::reference::{generate_nominal_reference, whole_periods, ReferenceTrajectory};

pub const ENV_PREFIX: &str = "AQUAMPC_";

pub const COMPARISON_FILE: &str = "comparison.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const NOISE_FILE: &str = "noise.csv";
pub const REPORT_FILE: &str = "report.json";

pub fn trajectory_file(kind: ControllerKind) -> String {
    format!("trajectory_{kind}.csv")
}

/// A parameter record given inline or as `{"file": "path.json"}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Source<T> {
    File { file: PathBuf },
    Inline(T),
}

impl<T: Default> Default for Source<T> {
    fn default() -> Self {
        Source::Inline(T::default())
    }
}

impl<'de, T: DeserializeOwned> Deserialize<'de> for Source<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        if let Value::Object(m) = &v {
            if let (1, Some(Value::String(f))) = (m.len(), m.get("file")) {
                return Ok(Source::File {
                    file: PathBuf::from(f),
                });
            }
        }
        T::deserialize(v)
            .map(Source::Inline)
            .map_err(serde::de::Error::custom)
    }
}

impl<T: DeserializeOwned + Clone> Source<T> {
    fn resolve(&self) -> Result<T> {
        match self {
            Source::Inline(t) => Ok(t.clone()),
            Source::File { file } => serde_json::from_str(&read_text(file)?).map_err(config_err),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HorizonSection {
    #[serde(rename = "N")]
    pub n: usize,
    /// Sampling period in days, shared by the controller and the plant.
    pub epsilon: f64,
}

impl Default for HorizonSection {
    fn default() -> Self {
        Self { n: 3, epsilon: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub substeps: usize,
    pub uia: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        let s = SimConfig::default();
        Self {
            substeps: s.substeps,
            uia: s.uia,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    /// Whether `run` perturbs the actuators.
    pub enabled: bool,
    pub snr_db: f64,
    /// Seeds of the noise study.
    pub seeds: Vec<u64>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            enabled: false,
            snr_db: 50.0,
            seeds: vec![1, 2, 3, 4, 5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub horizons: Vec<usize>,
    /// Runs per cell; the reported time is their median.
    pub repeats: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            horizons: vec![1, 2, 3, 5, 7, 10],
            repeats: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceSource {
    /// Model rollout under constant nominal inputs.
    Nominal,
    /// Two-column CSV `t_days,w_d_g`.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceSection {
    pub source: ReferenceSource,
    pub nominal: ControlInput,
}

impl Default for ReferenceSection {
    fn default() -> Self {
        Self {
            source: ReferenceSource::Nominal,
            nominal: ControlInput::new(0.8, 33.0, 2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub growth: Source<GrowthParams>,
    pub costs: Source<CostConfig>,
    pub farm: FarmConfig,
    pub horizon: HorizonSection,
    pub sim: SimSection,
    pub bounds: ControlBounds,
    pub noise: NoiseSection,
    pub solver: SolverOptions,
    pub controllers: Vec<ControllerKind>,
    /// Grow-out length in days.
    pub duration: f64,
    pub reference: ReferenceSection,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Worker threads; 0 uses one per core.
    pub workers: usize,
    pub mse_mode: MseMode,
    pub cold_restart: bool,
    /// When false every elapsed time is written as 0 so repeated runs produce
    /// identical files.
    pub report_wall_time: bool,
    pub sweep: SweepSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            growth: Source::default(),
            costs: Source::default(),
            farm: FarmConfig::default(),
            horizon: HorizonSection::default(),
            sim: SimSection::default(),
            bounds: ControlBounds::default(),
            noise: NoiseSection::default(),
            solver: SolverOptions::default(),
            controllers: ControllerKind::ALL.to_vec(),
            duration: 90.0,
            reference: ReferenceSection::default(),
            output_dir: PathBuf::from("results"),
            seed: 0,
            workers: 0,
            mse_mode: MseMode::Relative,
            cold_restart: true,
            report_wall_time: true,
            sweep: SweepSection::default(),
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

/// Applies `PREFIX_SECTION__KEY=value` pairs to a complete config tree.
/// Variables without the prefix are ignored; a prefixed variable naming no
/// existing key is an error.
pub fn apply_env_overrides<I>(tree: &mut Value, vars: I) -> Result<()>
where
    I: IntoIterator<Item = (String, String)>,
{
    for (name, raw) in vars {
        let Some(path) = name.strip_prefix(ENV_PREFIX) else {
            continue;
        };
        let mut node = &mut *tree;
        for part in path.split("__") {
            let Value::Object(map) = node else {
                return Err(Error::Config(format!(
                    "{name}: `{part}` is not inside a section"
                )));
            };
            let key = map
                .keys()
                .find(|k| k.eq_ignore_ascii_case(part))
                .cloned()
                .ok_or_else(|| Error::Config(format!("{name}: unknown config key `{part}`")))?;
            node = map.get_mut(&key).expect("key was just found");
        }
        *node = serde_json::from_str(&raw).unwrap_or(Value::String(raw));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parses a config document without environment overrides.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(config_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads the config file (or the defaults when `path` is `None`), then
    /// applies overrides from `env`.
    pub fn load<I>(path: Option<&Path>, env: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let text = match path {
            Some(p) => read_text(p)?,
            None => "{}".to_string(),
        };
        let cfg: Self = serde_json::from_str(&text).map_err(config_err)?;
        let mut tree = serde_json::to_value(&cfg)?;
        apply_env_overrides(&mut tree, env)?;
        let cfg: Self = serde_json::from_value(tree).map_err(config_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |r: Result<()>| r.map_err(|e| Error::Config(e.to_string()));
        if self.controllers.is_empty() {
            return Err(Error::Config(
                "at least one controller must be selected".into(),
            ));
        }
        let mut seen = self.controllers.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.controllers.len() {
            return Err(Error::Config("controller list contains duplicates".into()));
        }
        check(
            HorizonConfig {
                n: self.horizon.n,
                n_o: 0,
                epsilon: self.horizon.epsilon,
            }
            .validate(),
        )?;
        check(self.sim_config().validate())?;
        check(whole_periods(self.duration, self.horizon.epsilon).map(|_| ()))?;
        check(self.farm.validate())?;
        check(self.bounds.validate())?;
        check(self.solver.validate())?;
        if !(self.noise.snr_db > 0.0 && self.noise.snr_db.is_finite()) {
            return Err(Error::Config(format!(
                "noise.snr_db must be positive, got {}",
                self.noise.snr_db
            )));
        }
        if self.sweep.horizons.is_empty() || self.sweep.horizons.contains(&0) {
            return Err(Error::Config(
                "sweep.horizons must be a non-empty list of N >= 1".into(),
            ));
        }
        if self.sweep.repeats == 0 {
            return Err(Error::Config("sweep.repeats must be at least 1".into()));
        }
        if !self.reference.nominal.is_finite() {
            return Err(Error::Config(
                "reference.nominal inputs must be finite".into(),
            ));
        }
        if let Source::Inline(g) = &self.growth {
            check(g.validate())?;
        }
        if let Source::Inline(c) = &self.costs {
            check(c.validate())?;
        }
        Ok(())
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            epsilon: self.horizon.epsilon,
            substeps: self.sim.substeps,
            uia: self.sim.uia,
        }
    }

    /// Loads every file the config points to and builds the reference.
    pub fn resolve(&self) -> Result<Experiment> {
        self.validate()?;
        let growth = self.growth.resolve()?;
        growth.validate().map_err(config_err)?;
        let costs = self.costs.resolve()?;
        costs.validate().map_err(config_err)?;
        let longest = self
            .sweep
            .horizons
            .iter()
            .copied()
            .chain([self.horizon.n])
            .max()
            .unwrap_or(1);
        let reference = match &self.reference.source {
            ReferenceSource::Nominal => {
                // Cover the last prediction horizon too.
                let span = self.duration + longest as f64 * self.horizon.epsilon;
                generate_nominal_reference(
                    self.farm.w0,
                    span,
                    &self.reference.nominal,
                    &self.sim_config(),
                    &growth,
                )
                .map_err(config_err)?
            }
            ReferenceSource::File(path) => {
                let r = crate::reference::parse_reference(&read_text(path)?)?;
                if r.start() > 0.0 || r.end() < self.duration {
                    return Err(Error::Config(format!(
                        "reference covers [{}, {}] days but the run needs [0, {}]",
                        r.start(),
                        r.end(),
                        self.duration
                    )));
                }
                r
            }
        };
        Ok(Experiment {
            config: self.clone(),
            growth,
            costs,
            reference,
        })
    }
}

/// A validated config with its files loaded.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub growth: GrowthParams,
    pub costs: CostConfig,
    pub reference: ReferenceTrajectory,
}

/// One closed-loop run and its metrics.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub controller: ControllerKind,
    pub horizon: usize,
    pub noise_db: Option<f64>,
    pub seed: Option<u64>,
    pub report: PerformanceReport,
    pub result: ClosedLoopResult,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    kind: ControllerKind,
    horizon: usize,
    noise: NoiseConfig,
}

impl Experiment {
    fn closed_loop_config(
        &self,
        costs: &CostConfig,
        horizon: usize,
        noise: NoiseConfig,
    ) -> ClosedLoopConfig {
        let c = &self.config;
        ClosedLoopConfig {
            horizon: HorizonConfig {
                n: horizon,
                n_o: costs.terminal(horizon).n_o,
                epsilon: c.horizon.epsilon,
            },
            bounds: c.bounds,
            noise,
            sim: c.sim_config(),
            solver: c.solver,
            cold_restart: c.cold_restart,
        }
    }

    fn run_cell(&self, costs: &CostConfig, cell: Cell) -> Result<RunRecord> {
        let c = &self.config;
        let controller = cell
            .kind
            .build(costs, cell.horizon, &c.bounds, &self.growth, c.farm.w0);
        let cl = self.closed_loop_config(costs, cell.horizon, cell.noise);
        let mut result = run_closed_loop(
            c.farm.w0,
            c.duration,
            &controller,
            &self.reference,
            &self.growth,
            &cl,
        )?;
        if !c.report_wall_time {
            result.wall_time = 0.0;
            for s in &mut result.solver_stats {
                s.seconds = 0.0;
            }
        }
        let report = evaluate_run(
            &result,
            &self.reference,
            &c.farm,
            &costs.economic(),
            c.mse_mode,
        )?;
        Ok(RunRecord {
            controller: cell.kind,
            horizon: cell.horizon,
            noise_db: cell.noise.enabled.then_some(cell.noise.snr_db),
            seed: cell.noise.enabled.then_some(cell.noise.seed),
            report,
            result,
        })
    }

    fn run_cells(&self, costs: &CostConfig, cells: &[Cell]) -> Result<Vec<RunRecord>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.workers)
            .build()
            .map_err(config_err)?;
        pool.install(|| {
            cells
                .par_iter()
                .map(|&cell| self.run_cell(costs, cell))
                .collect()
        })
    }

    fn controllers(&self) -> Vec<ControllerKind> {
        let mut v = self.config.controllers.clone();
        v.sort();
        v
    }

    fn output_dir(&self) -> Result<&Path> {
        let dir = self.config.output_dir.as_path();
        fs::create_dir_all(dir)?;
        Ok(dir)
    }
}

/// One row of `comparison.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub controller: ControllerKind,
    /// Empty when the actuators were noise-free.
    pub noise_db: Option<f64>,
    pub horizon: usize,
    pub mse: f64,
    pub n_fish: u32,
    pub final_weight_g: f64,
    /// Feed per fish over the run.
    pub feed_g: f64,
    pub elapsed_s: f64,
    pub revenue: f64,
    pub feed_cost: f64,
    pub heating_cost: f64,
    pub oxygenation_cost: f64,
    pub profit: f64,
    pub profit_pct: Option<f64>,
    pub fcr: Option<f64>,
}

impl ComparisonRow {
    pub fn from_record(r: &RunRecord, n_fish: u32) -> Self {
        let l = &r.report.ledger;
        Self {
            controller: r.controller,
            noise_db: r.noise_db,
            horizon: r.horizon,
            mse: r.report.tracking_mse,
            n_fish,
            final_weight_g: r.report.final_weight,
            feed_g: r.report.total_feed,
            elapsed_s: r.report.elapsed,
            revenue: l.revenue,
            feed_cost: l.feed_cost,
            heating_cost: l.heating_cost,
            oxygenation_cost: l.oxygenation_cost,
            profit: l.profit,
            profit_pct: l.profit_percentage,
            fcr: r.report.fcr,
        }
    }
}

/// One row of `trajectory_<controller>.csv`. The control columns of the last
/// row are empty since no action follows the final state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t_days: f64,
    pub w_g: f64,
    pub w_ref_g: f64,
    pub f: Option<f64>,
    #[serde(rename = "T")]
    pub temperature: Option<f64>,
    #[serde(rename = "DO")]
    pub dissolved_oxygen: Option<f64>,
    pub feed_g_day: Option<f64>,
}

pub fn trajectory_rows(
    run: &ClosedLoopResult,
    reference: &ReferenceTrajectory,
    epsilon: f64,
) -> Vec<TrajectoryRow> {
    run.states
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let u = run.applied_controls.get(k);
            TrajectoryRow {
                t_days: s.t,
                w_g: s.w,
                w_ref_g: reference.sample(s.t),
                f: u.map(|u| u.feed_rate),
                temperature: u.map(|u| u.temperature),
                dissolved_oxygen: u.map(|u| u.dissolved_oxygen),
                feed_g_day: run.per_step_feed.get(k).map(|g| g / epsilon),
            }
        })
        .collect()
}

/// Solver bookkeeping of one run, as written to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub controller: ControllerKind,
    pub horizon: usize,
    pub noise_db: Option<f64>,
    pub seed: Option<u64>,
    pub report: PerformanceReport,
    pub steps: usize,
    pub solver_iterations: usize,
    pub converged_steps: usize,
    /// Steps whose optimized cost exceeded the warm-start cost.
    pub descent_violations: usize,
    pub noise: Option<NoiseStats>,
}

impl RunSummary {
    pub fn from_record(r: &RunRecord) -> Self {
        let stats = &r.result.solver_stats;
        Self {
            controller: r.controller,
            horizon: r.horizon,
            noise_db: r.noise_db,
            seed: r.seed,
            report: r.report,
            steps: stats.len(),
            solver_iterations: stats.iter().map(|s| s.iterations).sum(),
            converged_steps: stats.iter().filter(|s| s.converged).count(),
            descent_violations: stats.iter().filter(|s| s.cost > s.warm_cost).count(),
            noise: r.result.noise,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub growth: GrowthParams,
    pub costs: CostConfig,
    pub runs: Vec<RunSummary>,
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn read_rows<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub rows: Vec<ComparisonRow>,
    pub files: Vec<PathBuf>,
}

/// Runs every selected controller once and writes `comparison.csv`, one
/// trajectory file per controller and `report.json`.
pub fn run_experiment(exp: &Experiment) -> Result<ExperimentOutput> {
    let c = &exp.config;
    let noise = NoiseConfig {
        snr_db: c.noise.snr_db,
        seed: c.seed,
        enabled: c.noise.enabled,
    };
    let cells: Vec<Cell> = exp
        .controllers()
        .into_iter()
        .map(|kind| Cell {
            kind,
            horizon: c.horizon.n,
            noise,
        })
        .collect();
    let records = exp.run_cells(&exp.costs, &cells)?;
    let rows: Vec<ComparisonRow> = records
        .iter()
        .map(|r| ComparisonRow::from_record(r, c.farm.n_fish))
        .collect();

    let mut pending = vec![(PathBuf::from(COMPARISON_FILE), csv_bytes(&rows)?)];
    for r in &records {
        let traj = trajectory_rows(&r.result, &exp.reference, c.horizon.epsilon);
        pending.push((
            PathBuf::from(trajectory_file(r.controller)),
            csv_bytes(&traj)?,
        ));
    }
    let report = ExperimentReport {
        config: c.clone(),
        growth: exp.growth,
        costs: exp.costs,
        runs: records.iter().map(RunSummary::from_record).collect(),
    };
    pending.push((
        PathBuf::from(REPORT_FILE),
        serde_json::to_vec_pretty(&report)?,
    ));

    let files = write_all(exp, pending)?;
    Ok(ExperimentOutput {
        records,
        rows,
        files,
    })
}

fn write_all(exp: &Experiment, pending: Vec<(PathBuf, Vec<u8>)>) -> Result<Vec<PathBuf>> {
    let dir = exp.output_dir()?;
    let mut files = Vec::with_capacity(pending.len());
    for (name, bytes) in pending {
        let path = dir.join(name);
        write_atomic(&path, &bytes)?;
        files.push(path);
    }
    Ok(files)
}

/// One row of `sweep.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub controller: ControllerKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub mse: f64,
    pub feed_g: f64,
    /// Median total solver time over the repeats.
    pub elapsed_s: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    /// Solver times of every repeat, aligned with `rows`.
    pub repeat_times: Vec<Vec<f64>>,
    pub files: Vec<PathBuf>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Runs every controller at every horizon, noise-free, with the terminal
/// horizon tied to the prediction horizon. Writes `sweep.csv`.
pub fn horizon_sweep(exp: &Experiment, horizons: &[usize]) -> Result<SweepOutput> {
    if horizons.is_empty() || horizons.contains(&0) {
        return Err(Error::Config(
            "horizons must be a non-empty list of N >= 1".into(),
        ));
    }
    let mut horizons = horizons.to_vec();
    horizons.sort_unstable();
    horizons.dedup();
    let longest = exp
        .config
        .sweep
        .horizons
        .iter()
        .copied()
        .chain([exp.config.horizon.n])
        .max()
        .unwrap_or(1);
    if let (ReferenceSource::Nominal, Some(&n)) = (&exp.config.reference.source, horizons.last()) {
        if n > longest {
            return Err(Error::Config(format!(
                "horizon {n} exceeds the nominal reference span; add it to sweep.horizons"
            )));
        }
    }
    let costs = CostConfig {
        n_o: None,
        ..exp.costs
    };
    let repeats = exp.config.sweep.repeats;
    let noise = NoiseConfig {
        enabled: false,
        ..NoiseConfig::default()
    };
    let mut cells = Vec::new();
    for kind in exp.controllers() {
        for &horizon in &horizons {
            cells.extend(std::iter::repeat_n(
                Cell {
                    kind,
                    horizon,
                    noise,
                },
                repeats,
            ));
        }
    }
    let records = exp.run_cells(&costs, &cells)?;

    let mut rows = Vec::new();
    let mut repeat_times = Vec::new();
    for group in records.chunks(repeats) {
        let first = &group[0];
        let times: Vec<f64> = group.iter().map(|r| r.report.elapsed).collect();
        rows.push(SweepRow {
            controller: first.controller,
            n: first.horizon,
            mse: first.report.tracking_mse,
            feed_g: first.report.total_feed,
            elapsed_s: median(&times),
        });
        repeat_times.push(times);
    }
    let files = write_all(exp, vec![(PathBuf::from(SWEEP_FILE), csv_bytes(&rows)?)])?;
    Ok(SweepOutput {
        rows,
        repeat_times,
        files,
    })
}

/// One row of `noise.csv`. Rows come in pairs per controller and seed: the
/// noise-free run (empty `noise_db`) followed by the noisy run, which also
/// carries the differences noisy minus noise-free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub controller: ControllerKind,
    pub seed: u64,
    pub noise_db: Option<f64>,
    pub mse: f64,
    pub final_weight_g: f64,
    pub feed_g: f64,
    pub profit_pct: Option<f64>,
    pub fcr: Option<f64>,
    pub elapsed_s: f64,
    pub f_noise_std: Option<f64>,
    pub f_noise_target: Option<f64>,
    #[serde(rename = "T_noise_std")]
    pub t_noise_std: Option<f64>,
    #[serde(rename = "T_noise_target")]
    pub t_noise_target: Option<f64>,
    pub delta_mse: Option<f64>,
    pub delta_final_weight_g: Option<f64>,
    pub delta_feed_g: Option<f64>,
    pub delta_profit_pct: Option<f64>,
}

impl NoiseRow {
    fn new(r: &RunRecord, seed: u64, baseline: Option<&RunRecord>) -> Self {
        let rep = &r.report;
        let noise = r.result.noise.as_ref();
        let delta = |f: &dyn Fn(&RunRecord) -> f64| baseline.map(|b| f(r) - f(b));
        Self {
            controller: r.controller,
            seed,
            noise_db: r.noise_db,
            mse: rep.tracking_mse,
            final_weight_g: rep.final_weight,
            feed_g: rep.total_feed,
            profit_pct: rep.ledger.profit_percentage,
            fcr: rep.fcr,
            elapsed_s: rep.elapsed,
            f_noise_std: noise.map(|n| n.feed_rate.empirical_std()),
            f_noise_target: noise.map(|n| n.feed_rate.expected_std()),
            t_noise_std: noise.map(|n| n.temperature.empirical_std()),
            t_noise_target: noise.map(|n| n.temperature.expected_std()),
            delta_mse: delta(&|x| x.report.tracking_mse),
            delta_final_weight_g: delta(&|x| x.report.final_weight),
            delta_feed_g: delta(&|x| x.report.total_feed),
            delta_profit_pct: baseline.and_then(|b| {
                Some(rep.ledger.profit_percentage? - b.report.ledger.profit_percentage?)
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NoiseOutput {
    /// Noise-free run of each controller.
    pub baselines: Vec<RunRecord>,
    /// Noisy runs, controller-major then by seed.
    pub noisy: Vec<RunRecord>,
    pub rows: Vec<NoiseRow>,
    pub files: Vec<PathBuf>,
}

/// Runs each controller without noise and with noise at `snr_db` for every
/// seed. Writes `noise.csv`.
pub fn noise_comparison(exp: &Experiment, snr_db: f64, seeds: &[u64]) -> Result<NoiseOutput> {
    if !(snr_db > 0.0 && snr_db.is_finite()) {
        return Err(Error::Config(format!(
            "snr_db must be positive, got {snr_db}"
        )));
    }
    if seeds.is_empty() {
        return Err(Error::Config(
            "the noise study needs at least one seed".into(),
        ));
    }
    let horizon = exp.config.horizon.n;
    let kinds = exp.controllers();
    let quiet = NoiseConfig {
        snr_db,
        seed: 0,
        enabled: false,
    };
    let mut cells: Vec<Cell> = kinds
        .iter()
        .map(|&kind| Cell {
            kind,
            horizon,
            noise: quiet,
        })
        .collect();
    for &kind in &kinds {
        for &seed in seeds {
            cells.push(Cell {
                kind,
                horizon,
                noise: NoiseConfig {
                    snr_db,
                    seed,
                    enabled: true,
                },
            });
        }
    }
    let mut records = exp.run_cells(&exp.costs, &cells)?;
    let noisy = records.split_off(kinds.len());
    let baselines = records;

    let mut rows = Vec::with_capacity(2 * noisy.len());
    for (base, runs) in baselines.iter().zip(noisy.chunks(seeds.len())) {
        for (run, &seed) in runs.iter().zip(seeds) {
            rows.push(NoiseRow::new(base, seed, None));
            rows.push(NoiseRow::new(run, seed, Some(base)));
        }
    }
    let files = write_all(exp, vec![(PathBuf::from(NOISE_FILE), csv_bytes(&rows)?)])?;
    Ok(NoiseOutput {
        baselines,
        noisy,
        rows,
        files,
    })
}
