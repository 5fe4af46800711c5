//! Estimators over replica samples: time constants, growth exponents, tail
//! profiles, distribution shape, plus the small inferential helpers the
//! experiments need (confidence intervals, Kolmogorov-Smirnov).
//!
//! All arithmetic runs in `f64`; results are converted back to the series'
//! scalar type.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::rng::{Purpose, StreamKey};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    Ulam,
    UlamReinforced,
    Lattice,
    LatticeSlowbond,
    Tasep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry<T> {
    pub n: usize,
    pub values: Vec<T>,
}

/// Replica values of one statistic at several system sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSeries<T> {
    entries: Vec<SampleEntry<T>>,
    model: ModelTag,
}

impl<T: Scalar> SampleSeries<T> {
    pub fn new(model: ModelTag) -> Self {
        Self {
            entries: Vec::new(),
            model,
        }
    }

    pub fn from_entries(model: ModelTag, entries: Vec<SampleEntry<T>>) -> Result<Self> {
        let mut s = Self::new(model);
        for e in entries {
            s.push(e.n, e.values)?;
        }
        Ok(s)
    }

    /// Appends a level; sizes must be strictly increasing.
    pub fn push(&mut self, n: usize, values: Vec<T>) -> Result<()> {
        if values.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "n = {n} has {} values, need at least 2",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value {v} at n = {n}")));
        }
        if let Some(last) = self.entries.last() {
            if n <= last.n {
                return Err(Error::Domain(format!(
                    "sizes must increase strictly, got {n} after {}",
                    last.n
                )));
            }
        }
        self.entries.push(SampleEntry { n, values });
        Ok(())
    }

    pub fn entries(&self) -> &[SampleEntry<T>] {
        &self.entries
    }

    pub fn model(&self) -> ModelTag {
        self.model
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.n).collect()
    }

    pub fn min_replicas(&self) -> usize {
        self.entries.iter().map(|e| e.values.len()).min().unwrap_or(0)
    }

    /// Every value multiplied by `a`.
    pub fn scaled(&self, a: T) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|e| SampleEntry {
                    n: e.n,
                    values: e.values.iter().map(|&v| v * a).collect(),
                })
                .collect(),
            model: self.model,
        }
    }

    fn levels(&self) -> Vec<Level> {
        self.entries
            .iter()
            .map(|e| Level {
                n: e.n as f64,
                values: e.values.iter().map(|v| v.as_f64()).collect(),
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
struct Level {
    n: f64,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    TimeConstant,
    Fluctuation,
    Transversal,
}

/// A fitted scaling law with a bootstrap interval on its primary quantity:
/// the constant `c` for [`EstimateKind::TimeConstant`], the exponent otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingEstimate<T> {
    pub kind: EstimateKind,
    /// Fitted growth exponent, or the supplied correction exponent for a
    /// time constant fit.
    pub exponent: T,
    /// `c` in `mean ~ c n`, or the prefactor `C` in `statistic ~ C n^exponent`.
    pub constant: T,
    /// Coefficient of the `n^exponent` correction (time constant fits only).
    pub correction: T,
    pub ci_low: T,
    pub ci_high: T,
    pub n_used: Vec<usize>,
    /// Root mean square residual of the fit (weighted for time constants,
    /// in log space for exponents).
    pub residual: T,
}

impl<T: Scalar> ScalingEstimate<T> {
    pub fn estimate(&self) -> T {
        match self.kind {
            EstimateKind::TimeConstant => self.constant,
            _ => self.exponent,
        }
    }

    pub fn ci_width(&self) -> T {
        self.ci_high - self.ci_low
    }
}

/// Percentile bootstrap over replicas, resampling each level independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for Bootstrap {
    fn default() -> Self {
        Self {
            resamples: 1000,
            level: 0.95,
            seed: 0,
        }
    }
}

impl Bootstrap {
    fn interval(&self, levels: &[Level], point: f64, stat: impl Fn(&[Level]) -> Result<f64>) -> (f64, f64) {
        if self.resamples == 0 {
            return (point, point);
        }
        let key = StreamKey::new(self.seed, 0, Purpose::Bootstrap);
        let mut draws = Vec::with_capacity(self.resamples);
        let mut scratch = levels.to_vec();
        for b in 0..self.resamples {
            let mut s = key.substream(b as u64);
            for (out, lvl) in scratch.iter_mut().zip(levels) {
                let m = lvl.values.len() as u64;
                for v in out.values.iter_mut() {
                    *v = lvl.values[s.below(m) as usize];
                }
            }
            if let Ok(x) = stat(&scratch) {
                if x.is_finite() {
                    draws.push(x);
                }
            }
        }
        if draws.is_empty() {
            return (point, point);
        }
        draws.sort_by(f64::total_cmp);
        let tail = (1.0 - self.level) / 2.0;
        let lo = quantile_sorted(&draws, tail);
        let hi = quantile_sorted(&draws, 1.0 - tail);
        // percentile intervals can miss a skewed point estimate
        (lo.min(point), hi.max(point))
    }
}

/// Linear-interpolated quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let i = h.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (h - i as f64) * (sorted[j] - sorted[i])
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased sample variance.
pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)
}

pub fn std_dev(v: &[f64]) -> f64 {
    variance(v).sqrt()
}

/// Two-sided Student-t interval for the mean at confidence `level`.
pub fn mean_interval(v: &[f64], level: f64) -> Result<(f64, f64)> {
    if v.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 values".into()));
    }
    let m = mean(v);
    let se = (variance(v) / v.len() as f64).sqrt();
    let t = StudentsT::new(0.0, 1.0, v.len() as f64 - 1.0)
        .map_err(|e| Error::Degenerate(e.to_string()))?
        .inverse_cdf(0.5 + level / 2.0);
    Ok((m - t * se, m + t * se))
}

fn solve_2x2(a: [[f64; 2]; 2], b: [f64; 2]) -> Result<[f64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = a[0][0].abs() * a[1][1].abs();
    if !(det.abs() > 1e-12 * scale) {
        return Err(Error::Degenerate("normal equations are singular".into()));
    }
    Ok([
        (b[0] * a[1][1] - a[0][1] * b[1]) / det,
        (a[0][0] * b[1] - b[0] * a[1][0]) / det,
    ])
}

/// `(c, b, weighted rms residual)` for `mean(n) = c n + b n^alpha`.
fn fit_time_constant(levels: &[Level], alpha: f64) -> Result<(f64, f64, f64)> {
    let stats: Vec<(f64, f64, f64)> = levels
        .iter()
        .map(|l| (l.n, mean(&l.values), variance(&l.values) / l.values.len() as f64))
        .collect();
    let unit = stats.iter().any(|s| !(s.2 > 0.0));
    let mut a = [[0.0; 2]; 2];
    let mut rhs = [0.0; 2];
    for &(n, y, v) in &stats {
        let w = if unit { 1.0 } else { 1.0 / v };
        let f = [n, n.powf(alpha)];
        for i in 0..2 {
            rhs[i] += w * f[i] * y;
            for j in 0..2 {
                a[i][j] += w * f[i] * f[j];
            }
        }
    }
    let [c, b] = solve_2x2(a, rhs)?;
    let ss: f64 = stats
        .iter()
        .map(|&(n, y, v)| {
            let w = if unit { 1.0 } else { 1.0 / v };
            w * (y - c * n - b * n.powf(alpha)).powi(2)
        })
        .sum();
    Ok((c, b, (ss / stats.len() as f64).sqrt()))
}

/// Time constant `c` from a weighted least squares fit of the level means to
/// `c n + b n^correction_exponent`, weights the inverse variance of each mean
/// (unit weights when some level has zero spread).
///
/// The correction exponent is supplied, not fitted: with a handful of sizes
/// a joint fit of `c`, `b` and the exponent is badly conditioned. Use `1/3`
/// for unperturbed models and `1/2` for pinned ones.
pub fn time_constant<T: Scalar>(series: &SampleSeries<T>, correction_exponent: T) -> Result<ScalingEstimate<T>> {
    time_constant_with(series, correction_exponent, &Bootstrap::default())
}

pub fn time_constant_with<T: Scalar>(
    series: &SampleSeries<T>,
    correction_exponent: T,
    boot: &Bootstrap,
) -> Result<ScalingEstimate<T>> {
    let k = series.entries.len();
    if k < 3 {
        return Err(Error::InsufficientData(format!("time constant needs 3 sizes, got {k}")));
    }
    let alpha = correction_exponent.as_f64();
    if !(alpha.is_finite() && alpha < 1.0) {
        return Err(Error::param("correction_exponent", "must be finite and below 1"));
    }
    let levels = series.levels();
    let (c, b, residual) = fit_time_constant(&levels, alpha)?;
    let (lo, hi) = boot.interval(&levels, c, |l| fit_time_constant(l, alpha).map(|r| r.0));
    Ok(ScalingEstimate {
        kind: EstimateKind::TimeConstant,
        exponent: correction_exponent,
        constant: T::of(c),
        correction: T::of(b),
        ci_low: T::of(lo),
        ci_high: T::of(hi),
        n_used: series.sizes(),
        residual: T::of(residual),
    })
}

/// Ordinary least squares of `y` on `x`: `(slope, intercept, rms residual)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("regressor has no spread".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - icpt - slope * a).powi(2))
        .sum();
    Ok((slope, icpt, (ss / x.len() as f64).sqrt()))
}

fn log_log_fit(levels: &[Level], summary: fn(&[f64]) -> f64) -> Result<(f64, f64, f64)> {
    let mut xs = Vec::with_capacity(levels.len());
    let mut ys = Vec::with_capacity(levels.len());
    for l in levels {
        let s = summary(&l.values);
        if !(s > 0.0) {
            return Err(Error::Degenerate(format!("non-positive level summary {s} at n = {}", l.n)));
        }
        xs.push(l.n.ln());
        ys.push(s.ln());
    }
    linear_fit(&xs, &ys)
}

fn exponent_estimate<T: Scalar>(
    series: &SampleSeries<T>,
    kind: EstimateKind,
    summary: fn(&[f64]) -> f64,
    boot: &Bootstrap,
) -> Result<ScalingEstimate<T>> {
    let levels = series.levels();
    let (slope, icpt, residual) = log_log_fit(&levels, summary)?;
    let (lo, hi) = boot.interval(&levels, slope, |l| log_log_fit(l, summary).map(|r| r.0));
    Ok(ScalingEstimate {
        kind,
        exponent: T::of(slope),
        constant: T::of(icpt.exp()),
        correction: T::zero(),
        ci_low: T::of(lo),
        ci_high: T::of(hi),
        n_used: series.sizes(),
        residual: T::of(residual),
    })
}

pub const MIN_EXPONENT_LEVELS: usize = 4;
pub const MIN_FLUCTUATION_REPLICAS: usize = 100;

/// Fluctuation exponent: slope of `log std` against `log n`.
pub fn fluctuation_exponent<T: Scalar>(series: &SampleSeries<T>) -> Result<ScalingEstimate<T>> {
    fluctuation_exponent_with(series, &Bootstrap::default())
}

pub fn fluctuation_exponent_with<T: Scalar>(series: &SampleSeries<T>, boot: &Bootstrap) -> Result<ScalingEstimate<T>> {
    let k = series.entries.len();
    if k < MIN_EXPONENT_LEVELS {
        return Err(Error::InsufficientData(format!(
            "fluctuation exponent needs {MIN_EXPONENT_LEVELS} sizes, got {k}"
        )));
    }
    let r = series.min_replicas();
    if r < MIN_FLUCTUATION_REPLICAS {
        return Err(Error::InsufficientData(format!(
            "fluctuation exponent needs {MIN_FLUCTUATION_REPLICAS} replicas per size, got {r}"
        )));
    }
    exponent_estimate(series, EstimateKind::Fluctuation, std_dev, boot)
}

/// Transversal exponent: slope of `log mean(F_n)` against `log n`.
pub fn transversal_exponent<T: Scalar>(series: &SampleSeries<T>) -> Result<ScalingEstimate<T>> {
    transversal_exponent_with(series, &Bootstrap::default())
}

pub fn transversal_exponent_with<T: Scalar>(series: &SampleSeries<T>, boot: &Bootstrap) -> Result<ScalingEstimate<T>> {
    let k = series.entries.len();
    if k < MIN_EXPONENT_LEVELS {
        return Err(Error::InsufficientData(format!(
            "transversal exponent needs {MIN_EXPONENT_LEVELS} sizes, got {k}"
        )));
    }
    exponent_estimate(series, EstimateKind::Transversal, mean, boot)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub s: f64,
    /// `s^{3/2}`, the abscissa under which a stretched-exponential tail is linear.
    pub s_three_halves: f64,
    pub log_survival: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailProfile {
    /// `log P[(X - d)/scale >= s]`.
    pub upper: Vec<TailPoint>,
    /// `log P[(X - d)/scale <= -s]`.
    pub lower: Vec<TailPoint>,
    /// Set when a side stopped before `s_max` for lack of exceedances.
    pub truncated: bool,
    pub sample_size: usize,
}

/// Grid settings for [`tail_profile_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailGrid {
    pub s_max: f64,
    pub step: f64,
    /// A point is kept only if at least this many values lie beyond it.
    pub min_count: usize,
}

impl Default for TailGrid {
    fn default() -> Self {
        Self {
            s_max: 5.0,
            step: 0.5,
            min_count: 10,
        }
    }
}

pub fn tail_profile(values: &[f64], center: (f64, f64)) -> Result<TailProfile> {
    tail_profile_with(values, center, &TailGrid::default())
}

/// Empirical log-survival of `(X - d)/scale` on `s = 1, 1 + step, ..., s_max`.
pub fn tail_profile_with(values: &[f64], (d, scale): (f64, f64), grid: &TailGrid) -> Result<TailProfile> {
    if values.is_empty() {
        return Err(Error::InsufficientData("no values".into()));
    }
    if !(scale > 0.0 && scale.is_finite()) || !d.is_finite() {
        return Err(Error::param("center", format!("need finite d and scale > 0, got ({d}, {scale})")));
    }
    if !(grid.step > 0.0) || !(grid.s_max >= 1.0) {
        return Err(Error::param("grid", "need step > 0 and s_max >= 1"));
    }
    let mut z: Vec<f64> = values.iter().map(|v| (v - d) / scale).collect();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    let min_count = grid.min_count.max(1);
    let mut truncated = false;
    let mut side = |count_beyond: &dyn Fn(f64) -> usize| {
        let mut out = Vec::new();
        let mut s = 1.0;
        while s <= grid.s_max + 1e-12 {
            let c = count_beyond(s);
            if c < min_count {
                truncated = true;
                break;
            }
            out.push(TailPoint {
                s,
                s_three_halves: s.powf(1.5),
                log_survival: (c as f64 / n).ln(),
                count: c,
            });
            s += grid.step;
        }
        out
    };
    let upper = side(&|s| z.len() - z.partition_point(|&x| x < s));
    let lower = side(&|s| z.partition_point(|&x| x <= -s));
    Ok(TailProfile {
        upper,
        lower,
        truncated,
        sample_size: values.len(),
    })
}

/// Second differences of the log-survival along a tail; all `<= 0` means
/// concave, all `>= 0` convex.
pub fn second_differences(tail: &[TailPoint]) -> Vec<f64> {
    tail.windows(3)
        .map(|w| w[2].log_survival - 2.0 * w[1].log_survival + w[0].log_survival)
        .collect()
}

/// Moment-based shape summary of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub n: usize,
    /// `g1 = m3 / m2^{3/2}`.
    pub skewness: f64,
    pub skewness_se: f64,
    /// `g2 = m4 / m2^2 - 3`.
    pub excess_kurtosis: f64,
    pub kurtosis_se: f64,
    /// Normal score of the skewness test.
    pub skewness_z: f64,
    /// Normal score of the kurtosis test.
    pub kurtosis_z: f64,
    /// Two-sided p-value of the skewness test alone.
    pub skewness_p: f64,
    /// p-value of the skewness-kurtosis omnibus `K^2 = Z_1^2 + Z_2^2` against
    /// chi-square with 2 degrees of freedom.
    pub normality_p: f64,
}

pub const MIN_SHAPE_VALUES: usize = 1000;

fn shape_moments(s1: f64, s2: f64, s3: f64, s4: f64, n: f64) -> (f64, f64) {
    let m = s1 / n;
    let m2 = s2 / n - m * m;
    let m3 = s3 / n - 3.0 * m * s2 / n + 2.0 * m.powi(3);
    let m4 = s4 / n - 4.0 * m * s3 / n + 6.0 * m * m * s2 / n - 3.0 * m.powi(4);
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

/// Skewness and excess kurtosis with leave-one-out jackknife errors, and the
/// D'Agostino skewness / Anscombe-Glynn kurtosis omnibus normality test.
pub fn shape_report(values: &[f64]) -> Result<ShapeReport> {
    let len = values.len();
    if len < MIN_SHAPE_VALUES {
        return Err(Error::InsufficientData(format!(
            "shape report needs {MIN_SHAPE_VALUES} values, got {len}"
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite value".into()));
    }
    let n = len as f64;
    let centre = mean(values);
    let c: Vec<f64> = values.iter().map(|v| v - centre).collect();
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    for &x in &c {
        s1 += x;
        s2 += x * x;
        s3 += x * x * x;
        s4 += x * x * x * x;
    }
    let m2 = s2 / n - (s1 / n).powi(2);
    let spread = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if !(m2 > 1e-24 * spread * spread) || m2 == 0.0 {
        return Err(Error::Degenerate("sample variance is zero".into()));
    }
    let (g1, g2) = shape_moments(s1, s2, s3, s4, n);

    let mut jack = Vec::with_capacity(len);
    for &x in &c {
        jack.push(shape_moments(s1 - x, s2 - x * x, s3 - x * x * x, s4 - x * x * x * x, n - 1.0));
    }
    let jse = |f: fn(&(f64, f64)) -> f64| {
        let vals: Vec<f64> = jack.iter().map(f).collect();
        let m = mean(&vals);
        ((n - 1.0) / n * vals.iter().map(|v| (v - m).powi(2)).sum::<f64>()).sqrt()
    };
    let skewness_se = jse(|p| p.0);
    let kurtosis_se = jse(|p| p.1);

    // skewness
    let y = g1 * ((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0))).sqrt();
    let beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0)
        / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    let w2 = -1.0 + (2.0 * (beta2 - 1.0)).sqrt();
    let delta = 1.0 / (0.5 * w2.ln()).sqrt();
    let alpha = (2.0 / (w2 - 1.0)).sqrt();
    let ya = y / alpha;
    let z1 = delta * (ya + (ya * ya + 1.0).sqrt()).ln();

    // kurtosis
    let b2 = g2 + 3.0;
    let e = 3.0 * (n - 1.0) / (n + 1.0);
    let var = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0).powi(2) * (n + 3.0) * (n + 5.0));
    let x = (b2 - e) / var.sqrt();
    let sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0))
        * (6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0))).sqrt();
    let a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + (1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)).sqrt());
    let t = (1.0 - 2.0 / a) / (1.0 + x * (2.0 / (a - 4.0)).sqrt());
    let z2 = ((1.0 - 2.0 / (9.0 * a)) - t.cbrt()) / (2.0 / (9.0 * a)).sqrt();

    let k2 = z1 * z1 + z2 * z2;
    Ok(ShapeReport {
        n: len,
        skewness: g1,
        skewness_se,
        excess_kurtosis: g2,
        kurtosis_se,
        skewness_z: z1,
        kurtosis_z: z2,
        skewness_p: erfc(z1.abs() / std::f64::consts::SQRT_2),
        normality_p: (-k2 / 2.0).exp(),
    })
}

/// Kolmogorov-Smirnov outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    /// Effective sample size `n` (one sample) or `nm/(n+m)` (two samples).
    pub effective_n: f64,
    /// Asymptotic p-value.
    pub p_value: f64,
}

impl KsResult {
    /// Asymptotic critical value of the statistic at significance `alpha`.
    pub fn critical_value(&self, alpha: f64) -> f64 {
        ks_critical_coefficient(alpha) / self.effective_n.sqrt()
    }

    pub fn passes(&self, alpha: f64) -> bool {
        self.statistic < self.critical_value(alpha)
    }
}

/// `c(alpha) = sqrt(-ln(alpha/2) / 2)`, so `c(0.01) ~ 1.628`.
pub fn ks_critical_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// Kolmogorov survival function `Q(l) = 2 sum (-1)^(k-1) exp(-2 k^2 l^2)`.
pub fn kolmogorov_survival(l: f64) -> f64 {
    if l < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * l * l).exp();
        sum += if k as u32 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_result(d: f64, ne: f64) -> KsResult {
    let sq = ne.sqrt();
    KsResult {
        statistic: d,
        effective_n: ne,
        p_value: kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d),
    }
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(ks_result(d, na * nb / (na + nb)))
}

pub fn ks_one_sample(values: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if values.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    Ok(ks_result(d, n))
}
