//! Executes every `(n, replica)` cell of a config and persists the results.
//!
//! Cell `(n, r)` draws from `StreamKey(cell_seed(seed, n), r, purpose)`, so a
//! replica's values depend on nothing but the seed, its size and its own
//! index. Cells run on a bounded rayon pool; results are collected in
//! `(n, replica)` order whatever order they finish in.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use slowbond_core::geometry::transversal_fluctuation;
use slowbond_core::lattice::{sample_passage_time, sample_passage_time_pair};
use slowbond_core::rng::{self_test_words, Purpose, StreamKey};
use slowbond_core::tasep::{coupled_passage_time, current_estimate, init_step, simulate};
use slowbond_core::ulam::{reinforced_lis, reinforced_pair, LisResult};
use slowbond_core::PlanarPoint;

use crate::config::{ExperimentConfig, Model};
use crate::error::{CliError, Result};
use crate::records::{write_records, SummaryRecord, CSV_SCHEMA_VERSION, HEADER};

pub const RECORDS_FILE: &str = "records.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMING_FILE: &str = "timing.csv";

/// Experiment seed of the cells at size `n`: distinct sizes get unrelated streams.
pub fn cell_seed(seed: u64, n: u64) -> u64 {
    seed ^ n.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

pub fn cell_key(seed: u64, n: u64, replica: u64) -> StreamKey {
    StreamKey::new(cell_seed(seed, n), replica, Purpose::Generic)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub n: u64,
    pub replica: u64,
    /// Values in [`Model::observables`] order.
    pub values: Vec<f64>,
    pub wall_ms: f64,
}

fn fluctuation(r: &LisResult<f64>, n: f64) -> f64 {
    let a = PlanarPoint::new(0.0, 0.0);
    let b = PlanarPoint::new(n, n);
    transversal_fluctuation(&r.topmost_path, &a, &b).from_diagonal
}

/// Runs one cell.
pub fn simulate_cell(cfg: &ExperimentConfig, n: u64, replica: u64) -> Result<CellResult> {
    let start = Instant::now();
    let key = cell_key(cfg.seed, n, replica);
    let nu = n as usize;
    let nf = n as f64;
    let values = match cfg.model {
        Model::Ulam => {
            let r = reinforced_lis(nu, 0.0, 0.0, key)?;
            vec![r.length as f64, fluctuation(&r, nf)]
        }
        Model::UlamReinforced => {
            let (base, r) = reinforced_pair(nu, cfg.lambda(), cfg.offset(), key)?;
            vec![r.length as f64, fluctuation(&r, nf), base.length as f64, fluctuation(&base, nf)]
        }
        Model::Lattice => vec![sample_passage_time(nu, 0.0, 0, key)?],
        Model::LatticeSlowbond => {
            let (t0, te) = sample_passage_time_pair(nu, cfg.epsilon(), cfg.offset() as i64, key)?;
            vec![te, t0]
        }
        Model::Tasep => {
            let w = cfg.window() as usize;
            let horizon = cfg.params.horizon.unwrap_or(0.0);
            let state = simulate(init_step(w, w)?, cfg.epsilon(), horizon, key)?;
            let j = current_estimate(&state, cfg.burn_in())?;
            vec![j.current, j.std_error]
        }
        Model::TasepCoupled => {
            let (a, b) = coupled_passage_time(nu, cfg.epsilon(), key)?;
            if a.to_bits() != b.to_bits() {
                return Err(CliError::Runtime(format!(
                    "coupling broken at n = {n}, replica {replica}: tasep {a:e} vs lpp {b:e}"
                )));
            }
            vec![a, b]
        }
    };
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(CliError::Runtime(format!("non-finite value {v} at n = {n}, replica {replica}")));
    }
    Ok(CellResult {
        n,
        replica,
        values,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// All cells of `cfg` in `(n, replica)` order, on `workers` threads.
pub fn execute(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<CellResult>> {
    cfg.validate()?;
    let cells: Vec<(u64, u64)> = cfg
        .sizes()
        .into_iter()
        .flat_map(|n| (0..cfg.replicas).map(move |r| (n, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Runtime(format!("worker pool: {e}")))?;
    pool.install(|| {
        cells
            .par_iter()
            .map(|&(n, r)| simulate_cell(cfg, n, r))
            .collect()
    })
}

pub fn to_records(cfg: &ExperimentConfig, cells: &[CellResult]) -> Vec<SummaryRecord> {
    let names = cfg.model.observables();
    cells
        .iter()
        .flat_map(|c| {
            names.iter().zip(&c.values).map(move |(name, &value)| SummaryRecord {
                model: cfg.model,
                n: c.n,
                replica: c.replica,
                observable: (*name).to_string(),
                value,
                wall_ms: if cfg.record_wall_time { c.wall_ms } else { 0.0 },
                seed: cfg.seed,
            })
        })
        .collect()
}

pub fn rng_fingerprint() -> String {
    let mut h = Sha256::new();
    for w in self_test_words() {
        h.update(w.to_le_bytes());
    }
    hex(&h.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
struct RngInfo {
    generator: &'static str,
    test_vector_sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    csv_schema_version: u32,
    csv_header: &'static str,
    rng: RngInfo,
    rows: usize,
    records_sha256: String,
    config: &'a ExperimentConfig,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub records: Vec<SummaryRecord>,
    pub cells: Vec<CellResult>,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Runs `cfg` and writes `records.csv`, `manifest.json` and `timing.csv` into
/// its output directory.
pub fn run(cfg: &ExperimentConfig, workers: usize) -> Result<RunOutcome> {
    let cells = execute(cfg, workers)?;
    let records = to_records(cfg, &cells);
    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;

    let mut csv = Vec::new();
    write_records(&mut csv, &records).map_err(|e| CliError::io(&dir, e))?;
    write_file(&dir.join(RECORDS_FILE), &csv)?;

    let manifest = Manifest {
        tool: "slowbond",
        version: env!("CARGO_PKG_VERSION"),
        csv_schema_version: CSV_SCHEMA_VERSION,
        csv_header: HEADER,
        rng: RngInfo {
            generator: "philox4x64-10",
            test_vector_sha256: rng_fingerprint(),
        },
        rows: records.len(),
        records_sha256: hex(&Sha256::digest(&csv)),
        config: cfg,
    };
    let mut json = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
    json.push(b'\n');
    write_file(&dir.join(MANIFEST_FILE), &json)?;

    let timing_path = dir.join(TIMING_FILE);
    let file = fs::File::create(&timing_path).map_err(|e| CliError::io(&timing_path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| CliError::io(&timing_path, e);
    writeln!(out, "n,replica,wall_ms").map_err(io)?;
    for c in &cells {
        writeln!(out, "{},{},{:.3}", c.n, c.replica, c.wall_ms).map_err(io)?;
    }
    out.flush().map_err(io)?;

    Ok(RunOutcome { dir, records, cells })
}
