//! Post-processing of run directories into reports and plot data.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use slowbond_core::stats::{
    self, fluctuation_exponent_with, shape_report, tail_profile, time_constant_with, transversal_exponent_with,
    Bootstrap, SampleSeries, MIN_SHAPE_VALUES,
};
use slowbond_core::tasep::{inverse_current_bounds, mean_field_current};

use crate::config::{ExperimentConfig, Model};
use crate::error::{CliError, Result};
use crate::records::{read_records, SummaryRecord};
use crate::runner::{MANIFEST_FILE, RECORDS_FILE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    #[value(name = "time_constant")]
    TimeConstant,
    Chi,
    Xi,
    Tails,
    Shape,
    Current,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::TimeConstant => "time_constant",
            Analysis::Chi => "chi",
            Analysis::Xi => "xi",
            Analysis::Tails => "tails",
            Analysis::Shape => "shape",
            Analysis::Current => "current",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunData {
    pub dir: PathBuf,
    pub config: ExperimentConfig,
    pub records: Vec<SummaryRecord>,
}

pub fn load_run(dir: &Path) -> Result<RunData> {
    let config = ExperimentConfig::load(&dir.join(MANIFEST_FILE))?;
    let records = read_records(&dir.join(RECORDS_FILE))?;
    if let Some(r) = records.iter().find(|r| r.model != config.model) {
        return Err(CliError::invalid(format!(
            "{}: record for model {} in a {} run",
            dir.display(),
            r.model,
            config.model
        )));
    }
    Ok(RunData {
        dir: dir.to_path_buf(),
        config,
        records,
    })
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    /// Correction exponent for `time_constant`; defaults to 1/2 for pinned
    /// models and 1/3 otherwise.
    pub correction: Option<f64>,
    /// Size used by `tails`; the largest available by default.
    pub n: Option<u64>,
    /// Column to analyze instead of the model's default (e.g. `L_base`).
    pub observable: Option<String>,
    pub bootstrap_seed: u64,
    /// Where the report goes; `<first run>/analysis` by default.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlotRow {
    pub x: f64,
    pub y: f64,
    pub err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub analysis: Analysis,
    pub model: Model,
    pub observable: String,
    pub run_dirs: Vec<String>,
    pub result: Value,
    #[serde(skip)]
    pub plot: Vec<PlotRow>,
}

fn main_observable(model: Model) -> Option<&'static str> {
    match model {
        Model::Ulam | Model::UlamReinforced => Some("L"),
        Model::Lattice | Model::LatticeSlowbond => Some("T"),
        Model::TasepCoupled => Some("lpp_time"),
        Model::Tasep => None,
    }
}

fn pinned(cfg: &ExperimentConfig) -> bool {
    match cfg.model {
        Model::UlamReinforced => cfg.lambda() > 0.0,
        Model::LatticeSlowbond | Model::TasepCoupled => cfg.epsilon() > 0.0,
        _ => false,
    }
}

/// Values of `observable` grouped by size, in run-directory order.
fn collect(runs: &[RunData], observable: &str) -> BTreeMap<u64, Vec<f64>> {
    let mut by_n: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for r in runs.iter().flat_map(|d| &d.records).filter(|r| r.observable == observable) {
        by_n.entry(r.n).or_default().push(r.value);
    }
    by_n
}

fn series(model: Model, by_n: &BTreeMap<u64, Vec<f64>>) -> Result<SampleSeries<f64>> {
    let mut s = SampleSeries::new(model.tag());
    for (&n, v) in by_n {
        s.push(n as usize, v.clone())?;
    }
    Ok(s)
}

fn std_error(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return f64::NAN;
    }
    (stats::variance(v) / v.len() as f64).sqrt()
}

pub fn analyze(dirs: &[PathBuf], analysis: Analysis, opts: &AnalyzeOptions) -> Result<AnalysisReport> {
    if dirs.is_empty() {
        return Err(CliError::invalid("no run directories given"));
    }
    let runs = dirs.iter().map(|d| load_run(d)).collect::<Result<Vec<_>>>()?;
    analyze_runs(&runs, analysis, opts)
}

pub fn analyze_runs(runs: &[RunData], analysis: Analysis, opts: &AnalyzeOptions) -> Result<AnalysisReport> {
    let model = runs[0].config.model;
    if runs.iter().any(|r| r.config.model != model) {
        let models: Vec<String> = runs
            .iter()
            .map(|r| format!("{} ({})", r.config.model, r.dir.display()))
            .collect();
        return Err(CliError::invalid(format!("run directories mix models: {}", models.join(", "))));
    }
    let cfg = &runs[0].config;
    let boot = Bootstrap {
        seed: opts.bootstrap_seed,
        ..Bootstrap::default()
    };
    let unsupported = || CliError::invalid(format!("analysis {} does not apply to model {model}", analysis.name()));

    let default = match analysis {
        Analysis::Xi if matches!(model, Model::Ulam | Model::UlamReinforced) => "F",
        Analysis::Xi => return Err(unsupported()),
        Analysis::Current if model == Model::Tasep => "J",
        Analysis::Current => return Err(unsupported()),
        _ => main_observable(model).ok_or_else(unsupported)?,
    };
    let observable = match &opts.observable {
        Some(o) if model.observables().contains(&o.as_str()) => o.as_str(),
        Some(o) => {
            return Err(CliError::invalid(format!(
                "model {model} has no observable `{o}` (expected one of {})",
                model.observables().join(", ")
            )))
        }
        None => default,
    };
    let by_n = collect(runs, observable);
    if by_n.is_empty() {
        return Err(CliError::invalid(format!("no `{observable}` records found")));
    }

    let (result, plot) = match analysis {
        Analysis::TimeConstant => {
            let alpha = opts.correction.unwrap_or(if pinned(cfg) { 0.5 } else { 1.0 / 3.0 });
            let e = time_constant_with(&series(model, &by_n)?, alpha, &boot)?;
            let plot = by_n
                .iter()
                .map(|(&n, v)| PlotRow {
                    x: n as f64,
                    y: stats::mean(v) / n as f64,
                    err: std_error(v) / n as f64,
                })
                .collect();
            (json!(e), plot)
        }
        Analysis::Chi => {
            let e = fluctuation_exponent_with(&series(model, &by_n)?, &boot)?;
            let plot = by_n
                .iter()
                .map(|(&n, v)| {
                    let sd = stats::std_dev(v);
                    PlotRow {
                        x: n as f64,
                        y: sd,
                        err: sd / (2.0 * (v.len() as f64 - 1.0)).sqrt(),
                    }
                })
                .collect();
            (json!(e), plot)
        }
        Analysis::Xi => {
            let e = transversal_exponent_with(&series(model, &by_n)?, &boot)?;
            let plot = by_n
                .iter()
                .map(|(&n, v)| PlotRow {
                    x: n as f64,
                    y: stats::mean(v),
                    err: std_error(v),
                })
                .collect();
            (json!(e), plot)
        }
        Analysis::Tails => {
            let n = opts.n.unwrap_or(*by_n.keys().next_back().unwrap());
            let v = by_n
                .get(&n)
                .ok_or_else(|| CliError::invalid(format!("no `{observable}` records at n = {n}")))?;
            let (d, scale) = (stats::mean(v), stats::std_dev(v));
            let t = tail_profile(v, (d, scale))?;
            let err = |p: &stats::TailPoint| {
                let q = (p.log_survival).exp();
                ((1.0 - q) / p.count as f64).sqrt()
            };
            let plot = t
                .lower
                .iter()
                .rev()
                .map(|p| PlotRow {
                    x: -p.s,
                    y: p.log_survival,
                    err: err(p),
                })
                .chain(t.upper.iter().map(|p| PlotRow {
                    x: p.s,
                    y: p.log_survival,
                    err: err(p),
                }))
                .collect();
            (json!({ "n": n, "center": d, "scale": scale, "profile": t }), plot)
        }
        Analysis::Shape => {
            let mut reports = Vec::new();
            let mut plot = Vec::new();
            for (&n, v) in by_n.iter().filter(|(_, v)| v.len() >= MIN_SHAPE_VALUES) {
                let r = shape_report(v)?;
                plot.push(PlotRow {
                    x: n as f64,
                    y: r.skewness,
                    err: r.skewness_se,
                });
                reports.push(json!({ "n": n, "report": r }));
            }
            if reports.is_empty() {
                let most = by_n.values().map(Vec::len).max().unwrap_or(0);
                return Err(slowbond_core::Error::InsufficientData(format!(
                    "shape needs {MIN_SHAPE_VALUES} values at some size, the largest level has {most}"
                ))
                .into());
            }
            (json!(reports), plot)
        }
        Analysis::Current => {
            let se_by_n = collect(runs, "J_se");
            let eps = cfg.epsilon();
            let mean_field = mean_field_current(eps);
            let mut levels = Vec::new();
            let mut plot = Vec::new();
            for (&n, v) in &by_n {
                let j = stats::mean(v);
                let se = if v.len() >= 2 {
                    std_error(v)
                } else {
                    se_by_n.get(&n).and_then(|s| s.first().copied()).unwrap_or(f64::NAN)
                };
                let z = 2.5758293035489;
                plot.push(PlotRow { x: n as f64, y: j, err: se });
                levels.push(json!({
                    "horizon": n,
                    "replicas": v.len(),
                    "current": j,
                    "std_error": se,
                    "ci99": [j - z * se, j + z * se],
                    "mean_field": mean_field,
                    "abs_diff_mean_field": (j - mean_field).abs(),
                }));
            }
            let (lo, hi) = inverse_current_bounds(eps);
            (
                json!({
                    "epsilon": eps,
                    "levels": levels,
                    "mean_field": mean_field,
                    "current_bounds": [1.0 / hi, 1.0 / lo],
                }),
                plot,
            )
        }
    };

    Ok(AnalysisReport {
        analysis,
        model,
        observable: observable.to_string(),
        run_dirs: runs.iter().map(|r| r.dir.display().to_string()).collect(),
        result,
        plot,
    })
}

/// Writes `<analysis>.json` and `<analysis>_plot.csv`; returns their paths.
pub fn write_report(report: &AnalysisReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let json_path = dir.join(format!("{}.json", report.analysis.name()));
    let mut json = serde_json::to_vec_pretty(report).map_err(|e| CliError::Runtime(e.to_string()))?;
    json.push(b'\n');
    fs::write(&json_path, json).map_err(|e| CliError::io(&json_path, e))?;

    let plot_path = dir.join(format!("{}_plot.csv", report.analysis.name()));
    let mut csv = String::from("x,y,err\n");
    for r in &report.plot {
        csv.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", r.x, r.y, r.err));
    }
    fs::write(&plot_path, csv).map_err(|e| CliError::io(&plot_path, e))?;
    Ok((json_path, plot_path))
}

pub fn default_report_dir(dirs: &[PathBuf]) -> PathBuf {
    dirs[0].join("analysis")
}
