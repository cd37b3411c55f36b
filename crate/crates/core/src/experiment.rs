//! Experiment runner: config parsing, preset batches and CSV/JSON output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamform::{zf_directions, DEFAULT_GAMMA_TOL};
use crate::channel::{derive_seed, generate, Scenario, ScenarioConfig};
use crate::error::{Error, Result};
use crate::goodput::{
    choose_a, design_for, evaluate_design_goodput, interference_only_outage, mc_goodput, rate_grid,
    sweep_rate, GoodputPoint, OutageMethod, DEFAULT_A_GRID, DEFAULT_ETA, DEFAULT_RATE_HI, DEFAULT_RATE_LO,
    DEFAULT_RATE_POINTS,
};
use crate::quadform::DEFAULT_DEGREE;

/// Redraws allowed per channel set before giving up.
pub const MAX_REDRAWS: u64 = 10;
const A_SEARCH_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Table1,
    Custom,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Table1 => "table1",
            Preset::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateGridSpec {
    pub points: usize,
    /// Lowest SINR target as a multiple of the naive max-min target.
    pub lo: f64,
    /// Highest SINR target as a multiple of the naive max-min target.
    pub hi: f64,
}

impl Default for RateGridSpec {
    fn default() -> Self {
        Self {
            points: DEFAULT_RATE_POINTS,
            lo: DEFAULT_RATE_LO,
            hi: DEFAULT_RATE_HI,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub preset: Preset,
    pub n_channel_sets: usize,
    pub eta: f64,
    pub degree: usize,
    pub a_grid: Vec<f64>,
    /// Range searched when estimating `a` per channel set.
    pub a_range: [f64; 2],
    pub rate_grid: RateGridSpec,
    /// Error draws per (user, rate) for the Monte Carlo curves; 0 disables.
    pub mc_samples: usize,
    pub output_path: PathBuf,
    /// Master seed; channel set `i` uses a seed derived from it.
    pub seed: u64,
    pub scenario: ScenarioConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            preset: Preset::Custom,
            n_channel_sets: 100,
            eta: DEFAULT_ETA,
            degree: DEFAULT_DEGREE,
            a_grid: DEFAULT_A_GRID.to_vec(),
            a_range: [0.0, 50.0],
            rate_grid: RateGridSpec::default(),
            mc_samples: 2000,
            output_path: PathBuf::from("results"),
            seed: 0,
            scenario: ScenarioConfig::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.n_channel_sets == 0 {
            return Err(Error::validation("n_channel_sets", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::validation("eta", format!("must lie in [0, 1], got {}", self.eta)));
        }
        if !(2..=30).contains(&self.degree) {
            return Err(Error::validation("degree", format!("must lie in 2..=30, got {}", self.degree)));
        }
        if self.a_grid.is_empty() || self.a_grid.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
            return Err(Error::validation("a_grid", "must be a nonempty list of finite values >= 0"));
        }
        let [lo, hi] = self.a_range;
        if !(lo >= 0.0) || !(hi >= lo) || !hi.is_finite() {
            return Err(Error::validation("a_range", format!("needs 0 <= lo <= hi, got [{lo}, {hi}]")));
        }
        let g = &self.rate_grid;
        if g.points == 0 {
            return Err(Error::validation("rate_grid.points", "must be at least 1"));
        }
        if !(g.lo > 0.0) || !(g.hi >= g.lo) || !g.hi.is_finite() {
            return Err(Error::validation("rate_grid", format!("needs 0 < lo <= hi, got lo={} hi={}", g.lo, g.hi)));
        }
        if self.mc_samples != 0 && self.mc_samples < 100 {
            return Err(Error::validation("mc_samples", "must be 0 (disabled) or at least 100"));
        }
        Ok(())
    }

    /// Scenario settings a preset runs with.
    pub fn effective_scenario(&self) -> ScenarioConfig {
        let mut cfg = self.scenario.clone();
        match self.preset {
            Preset::Fig1 => cfg.multicell = false,
            Preset::Fig2 | Preset::Fig3 => cfg.multicell = true,
            Preset::Table1 | Preset::Custom => {}
        }
        cfg
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub fn parse_config_str(text: &str) -> Result<ExperimentSpec> {
    let spec: ExperimentSpec = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

pub fn parse_config(path: &Path) -> Result<ExperimentSpec> {
    let text = fs::read_to_string(path)?;
    parse_config_str(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Channel set `index` of a batch, redrawn while zero-forcing is
/// ill-conditioned. Returns the scenario and the number of redraws.
pub fn draw_channel_set(config: &ScenarioConfig, seed: u64, index: u64) -> Result<(Scenario, u64)> {
    for redraw in 0..=MAX_REDRAWS {
        let cfg = ScenarioConfig {
            seed: derive_seed(seed, &[index, redraw]),
            ..config.clone()
        };
        let sc = generate(&cfg)?;
        match zf_directions(&sc.h_est) {
            Ok(_) => return Ok((sc, redraw)),
            Err(Error::IllConditioned { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Degenerate(format!(
        "channel set {index} stayed ill-conditioned after {MAX_REDRAWS} redraws"
    )))
}

/// Per-channel-set quantities feeding the table and the scale-factor curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSetResult {
    pub index: usize,
    pub redraws: u64,
    /// Rate promised by the uncertainty-blind max-min design.
    pub naive_claimed: f64,
    /// Goodput that design delivers at its promised rate.
    pub naive_delivered: f64,
    /// Best goodput over the rate sweep of the uncertainty-blind design.
    pub sweep_best: f64,
    pub sweep_best_rate: f64,
    pub sweep_failures: usize,
    /// Series goodput per entry of the scale-factor grid.
    pub grid_goodput: Vec<f64>,
    /// `e^{-a}` goodput per entry of the scale-factor grid.
    pub grid_goodput_exp_a: Vec<f64>,
    pub grid_rate: Vec<f64>,
    pub grid_outage: Vec<f64>,
    pub estimated_a: f64,
    pub estimated_a_goodput: f64,
    pub a1_goodput: f64,
}

pub fn evaluate_channel_set(spec: &ExperimentSpec, config: &ScenarioConfig, index: usize) -> Result<ChannelSetResult> {
    let (sc, redraws) = draw_channel_set(config, spec.seed, index as u64)?;
    let (eta, d) = (spec.eta, spec.degree);

    let naive = evaluate_design_goodput(&sc, 0.0, eta, d)?;
    let design = design_for(&sc, 0.0, DEFAULT_GAMMA_TOL)?;
    let rates = rate_grid(naive.gamma, spec.rate_grid.points, spec.rate_grid.lo, spec.rate_grid.hi)?;
    let mut sweep_best = f64::NEG_INFINITY;
    let mut sweep_best_rate = 0.0;
    let mut sweep_failures = 0;
    for p in sweep_rate(&sc, &design, &rates, eta, d) {
        match p {
            Ok(p) if p.goodput_per_user > sweep_best => {
                sweep_best = p.goodput_per_user;
                sweep_best_rate = p.rate;
            }
            Ok(_) => {}
            Err(_) => sweep_failures += 1,
        }
    }
    if sweep_failures == rates.len() {
        return Err(Error::Degenerate(format!("every rate point failed for channel set {index}")));
    }

    let mut grid_goodput = Vec::with_capacity(spec.a_grid.len());
    let mut grid_goodput_exp_a = Vec::with_capacity(spec.a_grid.len());
    let mut grid_rate = Vec::with_capacity(spec.a_grid.len());
    let mut grid_outage = Vec::with_capacity(spec.a_grid.len());
    let mut a1_goodput = None;
    for &a in &spec.a_grid {
        let e = evaluate_design_goodput(&sc, a, eta, d)?;
        if a == 1.0 {
            a1_goodput = Some(e.alg1.goodput_per_user);
        }
        grid_goodput.push(e.alg1.goodput_per_user);
        grid_goodput_exp_a.push(e.exp_a.goodput_per_user);
        grid_rate.push(e.alg1.rate);
        grid_outage.push(mean(&e.alg1.outage));
    }
    let a1_goodput = match a1_goodput {
        Some(g) => g,
        None => evaluate_design_goodput(&sc, 1.0, eta, d)?.alg1.goodput_per_user,
    };

    let chosen = choose_a(&sc, eta, (spec.a_range[0], spec.a_range[1]), A_SEARCH_TOL)?;
    let estimated = evaluate_design_goodput(&sc, chosen.a, eta, d)?;

    Ok(ChannelSetResult {
        index,
        redraws,
        naive_claimed: naive.alg1.rate,
        naive_delivered: naive.alg1.goodput_per_user,
        sweep_best,
        sweep_best_rate,
        sweep_failures,
        grid_goodput,
        grid_goodput_exp_a,
        grid_rate,
        grid_outage,
        estimated_a: chosen.a,
        estimated_a_goodput: estimated.alg1.goodput_per_user,
        a1_goodput,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Evaluates every channel set of the batch, in index order.
pub fn run_batch(spec: &ExperimentSpec, config: &ScenarioConfig, jobs: Option<usize>) -> Result<Vec<ChannelSetResult>> {
    with_pool(jobs, || {
        (0..spec.n_channel_sets)
            .into_par_iter()
            .map(|i| evaluate_channel_set(spec, config, i))
            .collect::<Result<Vec<_>>>()
    })?
}

/// Batch means of the table columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSummary {
    pub alg1_best: f64,
    pub nested_heuristic: f64,
    pub best_fixed_a: f64,
    pub best_fixed_a_value: f64,
    pub a1: f64,
    pub estimated_a: f64,
    pub estimated_a_mean: f64,
    pub naive_delivered: f64,
    pub naive_claimed: f64,
    /// Batch-mean series goodput per scale factor of the grid.
    pub grid_mean: Vec<f64>,
    pub grid_mean_exp_a: Vec<f64>,
    pub grid_mean_rate: Vec<f64>,
    pub grid_mean_outage: Vec<f64>,
    pub n_sets: usize,
    pub redraws: u64,
}

pub fn summarize(a_grid: &[f64], sets: &[ChannelSetResult]) -> TableSummary {
    let n = sets.len() as f64;
    let avg = |f: &dyn Fn(&ChannelSetResult) -> f64| sets.iter().map(f).sum::<f64>() / n;
    let col = |j: usize, f: &dyn Fn(&ChannelSetResult) -> &Vec<f64>| sets.iter().map(|s| f(s)[j]).sum::<f64>() / n;
    let grid_mean: Vec<f64> = (0..a_grid.len()).map(|j| col(j, &|s| &s.grid_goodput)).collect();
    let (best_j, best) = grid_mean
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (j, &g)| if g > acc.1 { (j, g) } else { acc });
    TableSummary {
        alg1_best: avg(&|s| s.sweep_best),
        nested_heuristic: avg(&|s| s.grid_goodput.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        best_fixed_a: best,
        best_fixed_a_value: a_grid[best_j],
        a1: avg(&|s| s.a1_goodput),
        estimated_a: avg(&|s| s.estimated_a_goodput),
        estimated_a_mean: avg(&|s| s.estimated_a),
        naive_delivered: avg(&|s| s.naive_delivered),
        naive_claimed: avg(&|s| s.naive_claimed),
        grid_mean_exp_a: (0..a_grid.len()).map(|j| col(j, &|s| &s.grid_goodput_exp_a)).collect(),
        grid_mean_rate: (0..a_grid.len()).map(|j| col(j, &|s| &s.grid_rate)).collect(),
        grid_mean_outage: (0..a_grid.len()).map(|j| col(j, &|s| &s.grid_outage)).collect(),
        grid_mean,
        n_sets: sets.len(),
        redraws: sets.iter().map(|s| s.redraws).sum(),
    }
}

/// Row of the rate-sweep and heuristic-locus output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    /// `sweep` for the fixed naive design, `heuristic` for the robust designs.
    pub kind: &'static str,
    pub index: usize,
    pub a: f64,
    pub rate: f64,
    pub method: &'static str,
    pub outage_mean: f64,
    pub outage_min: f64,
    pub outage_max: f64,
    pub goodput: f64,
}

impl CurveRow {
    fn from_point(kind: &'static str, index: usize, a: f64, p: &GoodputPoint) -> Self {
        Self {
            kind,
            index,
            a,
            rate: p.rate,
            method: p.method.label(),
            outage_mean: mean(&p.outage),
            outage_min: p.outage.iter().copied().fold(f64::INFINITY, f64::min),
            outage_max: p.outage.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            goodput: p.goodput_per_user,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleRow {
    pub a: f64,
    pub rate_mean: f64,
    pub outage_mean: f64,
    pub goodput_alg1: f64,
    pub goodput_exp_a: f64,
    pub n_sets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub method: &'static str,
    pub goodput: f64,
    /// Promised rate; only meaningful for the naive design.
    pub claimed_rate: Option<f64>,
    /// Scale factor behind the column (batch mean for the estimate).
    pub a: Option<f64>,
    pub n_sets: usize,
}

pub fn table_rows(t: &TableSummary) -> Vec<TableRow> {
    let row = |method, goodput, claimed_rate, a| TableRow {
        method,
        goodput,
        claimed_rate,
        a,
        n_sets: t.n_sets,
    };
    vec![
        row("alg1_best", t.alg1_best, None, Some(0.0)),
        row("nested_heuristic", t.nested_heuristic, None, None),
        row("best_fixed_a", t.best_fixed_a, None, Some(t.best_fixed_a_value)),
        row("a1", t.a1, None, Some(1.0)),
        row("estimated_a", t.estimated_a, None, Some(t.estimated_a_mean)),
        row("naive", t.naive_delivered, Some(t.naive_claimed), Some(0.0)),
    ]
}

pub fn scale_rows(a_grid: &[f64], t: &TableSummary) -> Vec<ScaleRow> {
    a_grid
        .iter()
        .enumerate()
        .map(|(j, &a)| ScaleRow {
            a,
            rate_mean: t.grid_mean_rate[j],
            outage_mean: t.grid_mean_outage[j],
            goodput_alg1: t.grid_mean[j],
            goodput_exp_a: t.grid_mean_exp_a[j],
            n_sets: t.n_sets,
        })
        .collect()
}

/// Rate sweep of the naive design plus the heuristic locus for one channel
/// set, for every enabled estimator.
pub fn curve_rows(spec: &ExperimentSpec, sc: &Scenario, jobs: Option<usize>) -> Result<(Vec<CurveRow>, usize)> {
    let (eta, d) = (spec.eta, spec.degree);
    let design = design_for(sc, 0.0, DEFAULT_GAMMA_TOL)?;
    let rates = rate_grid(design.gamma(), spec.rate_grid.points, spec.rate_grid.lo, spec.rate_grid.hi)?;
    let k = sc.n_users();

    let (sweep, locus) = with_pool(jobs, || {
        let sweep: Vec<Result<(GoodputPoint, GoodputPoint)>> = rates
            .par_iter()
            .map(|&r| {
                let alg1 = sweep_rate(sc, &design, &[r], eta, d).remove(0)?;
                let gamma = crate::goodput::gamma_from_rate(r);
                let inter = (0..k)
                    .map(|u| interference_only_outage(sc, &design, u, gamma, d))
                    .collect::<Result<Vec<_>>>()?;
                Ok((alg1, GoodputPoint::new(r, inter, eta, OutageMethod::InterferenceOnly)))
            })
            .collect();
        let locus: Vec<Result<_>> = spec
            .a_grid
            .par_iter()
            .map(|&a| evaluate_design_goodput(sc, a, eta, d))
            .collect();
        (sweep, locus)
    })?;

    let mut rows = Vec::new();
    let mut failures = 0;
    let mc = if spec.mc_samples > 0 {
        Some(mc_goodput(sc, &design, &rates, eta, spec.mc_samples, derive_seed(spec.seed, &[u64::MAX]))?)
    } else {
        None
    };
    for (i, p) in sweep.into_iter().enumerate() {
        match p {
            Ok((alg1, inter)) => {
                rows.push(CurveRow::from_point("sweep", i, 0.0, &alg1));
                rows.push(CurveRow::from_point("sweep", i, 0.0, &inter));
            }
            Err(_) => failures += 1,
        }
        if let Some(mc) = &mc {
            rows.push(CurveRow::from_point("sweep", i, 0.0, &mc[i]));
        }
    }
    for (j, e) in locus.into_iter().enumerate() {
        let e = e?;
        rows.push(CurveRow::from_point("heuristic", j, e.a, &e.alg1));
        rows.push(CurveRow::from_point("heuristic", j, e.a, &e.exp_a));
        if spec.mc_samples > 0 {
            let design = design_for(sc, e.a, DEFAULT_GAMMA_TOL)?;
            let seed = derive_seed(spec.seed, &[u64::MAX - 1, j as u64]);
            let p = mc_goodput(sc, &design, &[e.alg1.rate], eta, spec.mc_samples, seed)?.remove(0);
            rows.push(CurveRow::from_point("heuristic", j, e.a, &p));
        }
    }
    Ok((rows, failures))
}

/// Everything needed to rerun an experiment exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub preset: Preset,
    pub seed: u64,
    pub multicell: bool,
    pub csv: String,
    pub columns: Vec<String>,
    pub rows: usize,
    pub redraws: u64,
    pub failed_points: usize,
    pub spec: ExperimentSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv_path: PathBuf,
    pub meta_path: PathBuf,
    pub rows: usize,
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<Vec<String>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    drop(w);
    let text = fs::read_to_string(path)?;
    Ok(text.lines().next().unwrap_or("").split(',').map(str::to_owned).collect())
}

pub fn run(spec: &ExperimentSpec, jobs: Option<usize>) -> Result<RunOutput> {
    spec.validate()?;
    let cfg = spec.effective_scenario();
    let out = &spec.output_path;
    fs::create_dir_all(out)?;
    let name = spec.preset.name();
    let csv_path = out.join(format!("{name}.csv"));

    let (columns, rows, redraws, failed) = match spec.preset {
        Preset::Fig1 | Preset::Fig2 => {
            let (sc, redraws) = draw_channel_set(&cfg, spec.seed, 0)?;
            let (rows, failed) = curve_rows(spec, &sc, jobs)?;
            write_csv(&out.join(format!("{name}.scenario.csv")), &sc.to_records())?;
            (write_csv(&csv_path, &rows)?, rows.len(), redraws, failed)
        }
        Preset::Fig3 => {
            let sets = run_batch(spec, &cfg, jobs)?;
            let t = summarize(&spec.a_grid, &sets);
            let rows = scale_rows(&spec.a_grid, &t);
            let failed = sets.iter().map(|s| s.sweep_failures).sum();
            (write_csv(&csv_path, &rows)?, rows.len(), t.redraws, failed)
        }
        Preset::Table1 | Preset::Custom => {
            let sets = run_batch(spec, &cfg, jobs)?;
            let t = summarize(&spec.a_grid, &sets);
            let rows = table_rows(&t);
            let failed = sets.iter().map(|s| s.sweep_failures).sum();
            (write_csv(&csv_path, &rows)?, rows.len(), t.redraws, failed)
        }
    };

    let meta = RunMetadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        preset: spec.preset,
        seed: spec.seed,
        multicell: cfg.multicell,
        csv: format!("{name}.csv"),
        columns,
        rows,
        redraws,
        failed_points: failed,
        spec: spec.clone(),
    };
    let meta_path = out.join(format!("{name}.meta.json"));
    let mut f = fs::File::create(&meta_path)?;
    serde_json::to_writer_pretty(&mut f, &meta)?;
    f.write_all(b"\n")?;
    Ok(RunOutput {
        csv_path,
        meta_path,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        let spec = parse_config_str("").unwrap();
        assert_eq!(spec, ExperimentSpec::default());
        assert_eq!(spec.scenario.n_antennas, 8);
        assert_eq!(spec.scenario.n_users, 3);
        assert_eq!(spec.scenario.total_power, 40.0);
        assert_eq!(spec.eta, 0.3);
        assert_eq!(spec.degree, 6);
        assert_eq!(spec.mc_samples, 2000);
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let err = parse_config_str("[scenario]\nanttenas = 4\n").unwrap_err();
        assert!(err.to_string().contains("anttenas"), "{err}");
        let err = parse_config_str("etaa = 0.2\n").unwrap_err();
        assert!(err.to_string().contains("etaa"), "{err}");
    }

    #[test]
    fn invalid_values_name_the_field() {
        let err = parse_config_str("eta = 1.5\n").unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "eta"), "{err}");
        let err = parse_config_str("[scenario]\nn_users = 9\n").unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "n_antennas"), "{err}");
        let err = parse_config_str("mc_samples = 10\n").unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "mc_samples"), "{err}");
    }

    #[test]
    fn malformed_file_reports_position() {
        let err = parse_config_str("eta = \n").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn round_trip() {
        let spec = ExperimentSpec {
            preset: Preset::Fig2,
            seed: 77,
            a_grid: vec![0.5, 1.0, 2.5],
            scenario: ScenarioConfig {
                multicell: true,
                error_power: 3.5e-14,
                ..ScenarioConfig::default()
            },
            ..ExperimentSpec::default()
        };
        let text = spec.to_toml().unwrap();
        assert_eq!(parse_config_str(&text).unwrap(), spec);
    }

    #[test]
    fn presets_force_the_cell_layout() {
        let mut spec = ExperimentSpec::default();
        spec.scenario.multicell = true;
        spec.preset = Preset::Fig1;
        assert!(!spec.effective_scenario().multicell);
        spec.scenario.multicell = false;
        spec.preset = Preset::Fig3;
        assert!(spec.effective_scenario().multicell);
        spec.preset = Preset::Table1;
        assert!(!spec.effective_scenario().multicell);
    }
}
