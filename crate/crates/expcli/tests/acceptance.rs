//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! printed; expect several minutes on a single core.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;
use std::time::Instant;

use slowbond_cli::config::{ExperimentConfig, Model, Params};
use slowbond_cli::runner::{default_workers, execute, run, CellResult, RECORDS_FILE};

use slowbond_core::geometry::{IncreasingPath, PlanarPoint};
use slowbond_core::lattice::{bernoulli_decomposition_sample, passage_time, sample_passage_time_pair, sample_weights};
use slowbond_core::point_process::{PointCloud, Source};
use slowbond_core::stats::{
    self, fluctuation_exponent, ks_two_sample, mean_interval, shape_report, time_constant, transversal_exponent,
    ModelTag, SampleSeries,
};
use slowbond_core::tasep::{coupled_passage_time, init_step, KeyedClocks};
use slowbond_core::ulam::{lis, lis_brute_force, lis_length};
use slowbond_core::{Purpose, Stream, StreamKey};

const SEED: u64 = 2026;
const Z99: f64 = 2.5758293035489004;

type P = PlanarPoint<f64>;
type Outcome = Result<(bool, String), String>;

/// Per size, per observable, the values in replica order.
type Table = BTreeMap<u64, BTreeMap<&'static str, Vec<f64>>>;

fn tabulate(model: Model, cells: &[CellResult]) -> Table {
    let mut t = Table::new();
    for c in cells {
        let row = t.entry(c.n).or_default();
        for (name, &v) in model.observables().iter().zip(&c.values) {
            row.entry(*name).or_default().push(v);
        }
    }
    t
}

fn experiment(model: Model, params: Params, n_list: Vec<u64>, replicas: u64) -> Table {
    let cfg = ExperimentConfig {
        model,
        params,
        n_list,
        replicas,
        seed: SEED,
        output_dir: "unused".into(),
        record_wall_time: false,
    };
    let cells = execute(&cfg, default_workers()).expect("acceptance experiment failed");
    tabulate(model, &cells)
}

fn reinforced_params() -> Params {
    Params {
        lambda: Some(2.0),
        offset: Some(0.0),
        ..Params::default()
    }
}

fn small_ulam() -> &'static Table {
    static T: OnceLock<Table> = OnceLock::new();
    T.get_or_init(|| experiment(Model::UlamReinforced, reinforced_params(), vec![100, 200, 400], 200))
}

const SHAPE_REPLICAS: u64 = 2000;

/// The exponent grid at 200 replicas, except n = 1000 which carries the shape sample.
fn grid_ulam() -> &'static Table {
    static T: OnceLock<Table> = OnceLock::new();
    T.get_or_init(|| {
        let mut t = experiment(Model::UlamReinforced, reinforced_params(), vec![250, 500, 2000], 200);
        t.extend(experiment(Model::UlamReinforced, reinforced_params(), vec![1000], SHAPE_REPLICAS));
        t
    })
}

fn lattice() -> &'static Table {
    static T: OnceLock<Table> = OnceLock::new();
    T.get_or_init(|| {
        let params = Params {
            epsilon: Some(0.5),
            offset: Some(0.0),
            ..Params::default()
        };
        experiment(Model::LatticeSlowbond, params, vec![250, 500, 1000], 100)
    })
}

fn series(t: &Table, observable: &str, replicas: usize) -> SampleSeries<f64> {
    let mut s = SampleSeries::new(ModelTag::Ulam);
    for (&n, row) in t {
        let v = &row[observable];
        s.push(n as usize, v[..replicas.min(v.len())].to_vec()).unwrap();
    }
    s
}

fn per_n_means(t: &Table, observable: &str) -> Vec<(u64, f64)> {
    t.iter().map(|(&n, row)| (n, stats::mean(&row[observable]) / n as f64)).collect()
}

fn increasing(v: &[(u64, f64)]) -> bool {
    v.windows(2).all(|w| w[1].1 > w[0].1)
}

fn fmt_means(v: &[(u64, f64)]) -> String {
    v.iter().map(|(n, m)| format!("{n}:{m:.4}")).collect::<Vec<_>>().join(" ")
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn c1() -> Outcome {
    let t = small_ulam();
    let means = per_n_means(t, "L_base");
    let at400 = means.last().unwrap().1;
    let fit = time_constant(&series(t, "L_base", 200), 1.0 / 3.0).map_err(err)?;
    let ok = increasing(&means) && (1.90..=2.00).contains(&at400) && (1.95..=2.05).contains(&fit.constant);
    Ok((ok, format!("L/n {} ; c = {:.4} (ci {:.4}..{:.4})", fmt_means(&means), fit.constant, fit.ci_low, fit.ci_high)))
}

fn c2() -> Outcome {
    let t = lattice();
    let means = per_n_means(t, "T_base");
    let at1000 = means.last().unwrap().1;
    let fit = time_constant(&series(t, "T_base", 100), 1.0 / 3.0).map_err(err)?;
    let ok = increasing(&means) && (3.80..=4.00).contains(&at1000) && (3.9..=4.1).contains(&fit.constant);
    Ok((ok, format!("T/n {} ; c = {:.4} (ci {:.4}..{:.4})", fmt_means(&means), fit.constant, fit.ci_low, fit.ci_high)))
}

/// Lower 99% bound the reinforcement gain must clear; the pilot gave 1.459 +- 0.005.
const REINFORCEMENT_MARGIN: f64 = 1.0;

fn c3() -> Outcome {
    let row = &small_ulam()[&400];
    let gain: Vec<f64> = row["L"].iter().zip(&row["L_base"]).map(|(a, b)| (a - b) / 400.0).collect();
    let (lo, hi) = mean_interval(&gain, 0.99).map_err(err)?;
    Ok((
        lo > REINFORCEMENT_MARGIN,
        format!("mean (L^2 - L)/n = {:.4}, 99% ci {lo:.4}..{hi:.4}, margin {REINFORCEMENT_MARGIN}", stats::mean(&gain)),
    ))
}

fn c4() -> Outcome {
    let row = &lattice()[&1000];
    let gain: Vec<f64> = row["T"].iter().zip(&row["T_base"]).map(|(a, b)| (a - b) / 1000.0).collect();
    let (lo, hi) = mean_interval(&gain, 0.99).map_err(err)?;
    let slowed = stats::mean(&row["T"]) / 1000.0;
    Ok((
        lo > 0.0 && slowed < 5.0,
        format!("mean gain/n = {:.4}, 99% ci {lo:.4}..{hi:.4}; T^0.5/n = {slowed:.4} < 5", stats::mean(&gain)),
    ))
}

fn current(eps: f64) -> Result<(f64, f64), String> {
    let params = Params {
        epsilon: Some(eps),
        horizon: Some(1e4),
        window: Some(15_000),
        ..Params::default()
    };
    let t = experiment(Model::Tasep, params, Vec::new(), 1);
    let row = t.values().next().ok_or("no tasep cell")?;
    Ok((row["J"][0], row["J_se"][0]))
}

fn c5() -> Outcome {
    let (j0, se0) = current(0.0)?;
    let (j5, se5) = current(0.5)?;
    let (lo, hi) = (j5 - Z99 * se5, j5 + Z99 * se5);
    let ok = (0.24..=0.26).contains(&j0) && j5 < 0.25 && hi < 0.25;
    Ok((
        ok,
        format!(
            "J(0) = {j0:.5} (se {se0:.5}); J(0.5) = {j5:.5}, 99% ci {lo:.5}..{hi:.5}; |J(0.5) - 2/9| = {:.5} (reported only)",
            (j5 - 2.0 / 9.0).abs()
        ),
    ))
}

fn c6() -> Outcome {
    let start = Instant::now();
    let mut mismatches = 0;
    for eps in [0.0, 0.5] {
        for k in 0..50u64 {
            let n = 200 - 3 * k as usize;
            let (a, b) = coupled_passage_time::<f64>(n, eps, StreamKey::new(SEED, k, Purpose::LatticeWeights))
                .map_err(err)?;
            mismatches += (a.to_bits() != b.to_bits()) as usize;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        mismatches == 0 && secs < 1.0,
        format!("{mismatches} mismatches in 100 pairs, n in 53..=200, {secs:.3} s"),
    ))
}

fn c7() -> Outcome {
    let e = transversal_exponent(&series(grid_ulam(), "F_base", 200)).map_err(err)?;
    Ok((
        (0.55..=0.80).contains(&e.exponent),
        format!("xi = {:.4} (ci {:.4}..{:.4})", e.exponent, e.ci_low, e.ci_high),
    ))
}

fn c8() -> Outcome {
    let base = fluctuation_exponent(&series(grid_ulam(), "L_base", 200)).map_err(err)?;
    let pinned = fluctuation_exponent(&series(grid_ulam(), "L", 200)).map_err(err)?;
    let ok = (0.25..=0.42).contains(&base.exponent)
        && (0.42..=0.58).contains(&pinned.exponent)
        && pinned.exponent > base.exponent;
    Ok((
        ok,
        format!(
            "chi(0) = {:.4} (ci {:.4}..{:.4}); chi(2) = {:.4} (ci {:.4}..{:.4})",
            base.exponent, base.ci_low, base.ci_high, pinned.exponent, pinned.ci_low, pinned.ci_high
        ),
    ))
}

fn random_cloud(g: &mut Stream, max: u64, on_grid: bool) -> PointCloud<f64> {
    let count = g.below(max + 1);
    let mut pts: Vec<P> = (0..count)
        .map(|_| {
            if on_grid {
                P::new(g.below(8) as f64, g.below(8) as f64)
            } else {
                P::new(10.0 * g.uniform::<f64>(), 10.0 * g.uniform::<f64>())
            }
        })
        .collect();
    pts.sort_by(|a, b| a.lex_cmp(b));
    pts.dedup();
    PointCloud::from_points(pts, Source::Bulk).unwrap()
}

fn c9() -> Outcome {
    let mut g = StreamKey::new(SEED, 9, Purpose::Generic).stream();
    let mut failures = 0;
    for i in 0..1000 {
        let on_grid = i % 2 == 0;
        let c = random_cloud(&mut g, 40, on_grid);
        let (u, v) = if on_grid {
            (P::new(0.0, 0.0), P::new(7.0, 7.0))
        } else {
            (P::new(0.0, 0.0), P::new(10.0, 10.0))
        };
        let fast = lis_length(&c, &u, &v).map_err(err)?;
        let full = lis(&c, &u, &v).map_err(err)?.length;
        failures += (fast != lis_brute_force(&c, &u, &v) || full != fast) as usize;
    }
    Ok((failures == 0, format!("{failures} failures over 1000 clouds")))
}

fn c10() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, eps) in [0.2, 0.5, 0.8].into_iter().enumerate() {
        let s = bernoulli_decomposition_sample(eps, 100_000, StreamKey::new(SEED, i as u64, Purpose::Decomposition))
            .map_err(err)?;
        let ks = ks_two_sample(&s.direct, &s.composite).map_err(err)?;
        ok &= ks.passes(0.01);
        parts.push(format!("eps {eps}: D = {:.5}, p = {:.3}", ks.statistic, ks.p_value));
    }
    Ok((ok, parts.join("; ")))
}

fn dominates(upper: &IncreasingPath<f64>, lower: &IncreasingPath<f64>) -> bool {
    upper
        .vertices()
        .iter()
        .chain(lower.vertices())
        .all(|p| match (upper.eval(p.x), lower.eval(p.x)) {
            (Some(a), Some(b)) => a >= b - 1e-12,
            _ => true,
        })
}

fn rerun_is_byte_identical() -> Result<bool, String> {
    let tmp = tempfile::tempdir().map_err(err)?;
    let cfg = |dir: &Path| ExperimentConfig {
        model: Model::UlamReinforced,
        params: reinforced_params(),
        n_list: vec![50, 100],
        replicas: 8,
        seed: SEED,
        output_dir: dir.to_path_buf(),
        record_wall_time: false,
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run(&cfg(&a), 1).map_err(err)?;
    run(&cfg(&b), default_workers().max(2)).map_err(err)?;
    let read = |d: &Path| std::fs::read(d.join(RECORDS_FILE)).map_err(err);
    Ok(read(&a)? == read(&b)?)
}

fn c11() -> Outcome {
    let mut g = StreamKey::new(SEED, 11, Purpose::Generic).stream();
    let mut violations: BTreeMap<&str, usize> = BTreeMap::new();
    for _ in 0..300 {
        let c = random_cloud(&mut g, 60, false);
        let mid = P::new(1.0 + 8.0 * g.uniform::<f64>(), 1.0 + 8.0 * g.uniform::<f64>());
        let (a, z) = (P::new(0.0, 0.0), P::new(10.0, 10.0));
        let whole = lis_length(&c, &a, &z).map_err(err)?;
        let split = lis_length(&c, &a, &mid).map_err(err)? + lis_length(&c, &mid, &z).map_err(err)?;
        *violations.entry("superadditivity").or_default() += (whole + (c.contains(&mid) as usize) < split) as usize;

        let mut ends = [3.0 * g.uniform::<f64>(), 3.0 * g.uniform::<f64>()];
        ends.sort_by(f64::total_cmp);
        let mut tops = [7.0 + 3.0 * g.uniform::<f64>(), 7.0 + 3.0 * g.uniform::<f64>()];
        tops.sort_by(f64::total_cmp);
        let low = lis(&c, &P::new(0.0, ends[0]), &P::new(10.0, tops[0])).map_err(err)?.topmost_path;
        let high = lis(&c, &P::new(0.0, ends[1]), &P::new(10.0, tops[1])).map_err(err)?.topmost_path;
        *violations.entry("polymer ordering").or_default() += !dominates(&high, &low) as usize;
    }
    for k in 0..100u64 {
        let eps = [0.0, 0.3, 0.6, 0.9][k as usize % 4];
        let mut s = init_step::<f64>(160, 160).map_err(err)?;
        let clocks = KeyedClocks::new(StreamKey::new(SEED, k, Purpose::TasepClocks), eps);
        s.advance(&clocks, 80.0, |_| {}).map_err(err)?;
        let occupied = s.occupation().iter().filter(|&&b| b).count();
        let bad = s.check_invariants().is_err() || occupied != 161 || s.particle_count() != 161;
        *violations.entry("exclusion/conservation").or_default() += bad as usize;

        let n = 1 + (k as usize * 7) % 40;
        let w = sample_weights(n, eps, 0, StreamKey::new(SEED, k, Purpose::LatticeWeights)).map_err(err)?;
        let (_, table) = passage_time(&w);
        let mut bad = 0;
        for x in 0..=n {
            for y in 0..=n {
                let left = if x > 0 { table.get(x - 1, y) } else { 0.0 };
                let below = if y > 0 { table.get(x, y - 1) } else { 0.0 };
                bad += (table.get(x, y) != w.get(x, y) + left.max(below)) as usize;
            }
        }
        *violations.entry("dp recurrence").or_default() += bad;
        let (t0, te) = sample_passage_time_pair(n, 0.5, 0, StreamKey::new(SEED, k, Purpose::LatticeWeights)).map_err(err)?;
        *violations.entry("defect monotonicity").or_default() += (te < t0) as usize;
    }
    *violations.entry("byte-identical rerun").or_default() += !rerun_is_byte_identical()? as usize;
    let ok = violations.values().all(|&v| v == 0);
    let detail = violations.iter().map(|(k, v)| format!("{k} {v}")).collect::<Vec<_>>().join(", ");
    Ok((ok, format!("violations: {detail}")))
}

fn c12() -> Outcome {
    let row = &grid_ulam()[&1000];
    let base = shape_report(&row["L_base"]).map_err(err)?;
    let pinned = shape_report(&row["L"]).map_err(err)?;
    let ok = base.skewness_p < 0.01 && pinned.skewness.abs() < base.skewness.abs();
    Ok((
        ok,
        format!(
            "{} replicas: skew(0) = {:.4} (p {:.2e}), skew(2) = {:.4} (p {:.3}); kurtosis {:.3} / {:.3}",
            base.n,
            base.skewness,
            base.skewness_p,
            pinned.skewness,
            pinned.skewness_p,
            base.excess_kurtosis,
            pinned.excess_kurtosis
        ),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("unperturbed Ulam law of large numbers", c1),
        ("unperturbed lattice law of large numbers", c2),
        ("diagonal reinforcement lengthens LIS (lambda = 2)", c3),
        ("slow bond lengthens lattice passage (eps = 0.5)", c4),
        ("TASEP current with and without slow bond", c5),
        ("TASEP/LPP exact coupling", c6),
        ("transversal exponent", c7),
        ("fluctuation exponents and pinning", c8),
        ("patience sorting equals quadratic DP", c9),
        ("Bernoulli decomposition in distribution", c10),
        ("invariant suites", c11),
        ("fluctuation shape discrimination at n = 1000", c12),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += !ok as usize;
        println!(
            "{} {:>2} {name}: {detail} [{:.1} s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
