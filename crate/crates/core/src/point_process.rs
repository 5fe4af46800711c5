//! Poisson point configurations on rectangles and on offset diagonal lines.
//!
//! Both samplers generate points left to right from exponential spacings of
//! the x-marginal process, so clouds come out sorted without a sort pass. The
//! law is the same as "Poisson count, then i.i.d. uniform points". Spacings are
//! accumulated in `f64` regardless of the output scalar.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PlanarPoint;
use crate::rng::{Stream, StreamKey};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region<T> {
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
}

impl<T: Scalar> Region<T> {
    pub fn new(x_min: T, x_max: T, y_min: T, y_max: T) -> Result<Self> {
        let r = Self {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        r.validate()?;
        Ok(r)
    }

    /// `[0, side]^2`.
    pub fn square(side: T) -> Result<Self> {
        Self::new(T::zero(), side, T::zero(), side)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.x_min, self.x_max, self.y_min, self.y_max];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("region", "coordinates must be finite"));
        }
        if self.x_min > self.x_max || self.y_min > self.y_max {
            return Err(Error::param("region", format!("inverted bounds {self:?}")));
        }
        Ok(())
    }

    pub fn width(&self) -> T {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> T {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn contains(&self, p: &PlanarPoint<T>) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

/// Which process a point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Bulk,
    Diagonal,
}

/// Finite planar configuration, sorted lexicographically by `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    points: Vec<PlanarPoint<T>>,
    sources: Vec<Source>,
    seed_record: Vec<StreamKey>,
}

impl<T: Scalar> Default for PointCloud<T> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<T: Scalar> PointCloud<T> {
    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            sources: Vec::new(),
            seed_record: Vec::new(),
        }
    }

    /// Builds a cloud from arbitrary points. Exact duplicates and non-finite
    /// coordinates are rejected.
    pub fn from_points(mut points: Vec<PlanarPoint<T>>, source: Source) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::Domain(format!("non-finite point {p:?}")));
        }
        points.sort_by(|a, b| a.lex_cmp(b));
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Domain(format!("duplicate point {:?}", w[0])));
        }
        let sources = vec![source; points.len()];
        Ok(Self {
            points,
            sources,
            seed_record: Vec::new(),
        })
    }

    pub fn points(&self) -> &[PlanarPoint<T>] {
        &self.points
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    /// Keys of every stream that contributed points.
    pub fn seed_record(&self) -> &[StreamKey] {
        &self.seed_record
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &PlanarPoint<T>) -> bool {
        self.points.binary_search_by(|q| q.lex_cmp(p)).is_ok()
    }

    pub fn count_in(&self, region: &Region<T>) -> usize {
        self.points.iter().filter(|p| region.contains(p)).count()
    }

    pub fn count_source(&self, source: Source) -> usize {
        self.sources.iter().filter(|&&s| s == source).count()
    }

    pub fn translate(&self, dx: T, dy: T) -> Self {
        Self {
            points: self.points.iter().map(|p| p.translate(dx, dy)).collect(),
            sources: self.sources.clone(),
            seed_record: self.seed_record.clone(),
        }
    }

    fn is_sorted_strict(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[0].lex_cmp(&w[1]) == std::cmp::Ordering::Less)
    }
}

fn check_rate(name: &'static str, rate: f64) -> Result<()> {
    if !rate.is_finite() {
        return Err(Error::param(name, format!("must be finite, got {rate}")));
    }
    if rate < 0.0 {
        return Err(Error::param(name, format!("must be nonnegative, got {rate}")));
    }
    Ok(())
}

/// Homogeneous Poisson process of intensity `rate` on `region`.
pub fn sample_poisson_field<T: Scalar>(
    region: &Region<T>,
    rate: T,
    key: StreamKey,
) -> Result<PointCloud<T>> {
    region.validate()?;
    let rate = rate.as_f64();
    check_rate("rate", rate)?;
    let (x0, x1) = (region.x_min.as_f64(), region.x_max.as_f64());
    let (y0, h) = (region.y_min.as_f64(), region.height().as_f64());

    let mut cloud = PointCloud {
        points: Vec::new(),
        sources: Vec::new(),
        seed_record: vec![key],
    };
    let marginal = rate * h;
    if marginal == 0.0 || x1 == x0 {
        return Ok(cloud);
    }

    let mut s = key.stream();
    cloud.points.reserve((marginal * (x1 - x0) * 1.01) as usize + 16);
    let mut x = x0;
    loop {
        let next = x + s.exponential(marginal);
        if next > x1 {
            break;
        }
        if next == x {
            continue;
        }
        x = next;
        let y = y0 + h * s.uniform::<f64>();
        cloud.points.push(PlanarPoint::new(T::of(x), T::of(y)));
    }
    cloud.sources = vec![Source::Bulk; cloud.points.len()];
    repair_collisions(&mut cloud, &mut s, y0, h);
    Ok(cloud)
}

/// Restores strict lexicographic order after rounding to `T`. For `f64`
/// output this is a single linear check; narrower scalars can map distinct
/// abscissae together, and an exact coincidence gets a fresh ordinate.
fn repair_collisions<T: Scalar>(cloud: &mut PointCloud<T>, s: &mut Stream, y0: f64, h: f64) {
    while !cloud.is_sorted_strict() {
        cloud.points.sort_by(|a, b| a.lex_cmp(b));
        for i in 1..cloud.points.len() {
            if cloud.points[i] == cloud.points[i - 1] {
                cloud.points[i].y = T::of(y0 + h * s.uniform::<f64>());
            }
        }
    }
}

/// Poisson process of intensity `lambda` per unit arc length on the line
/// `y = x + offset`, for `x` in `x_range`. The x-marginal has intensity
/// `lambda * sqrt(2)`.
///
/// Abscissae are snapped to a dyadic grid fine enough that `x + offset` is
/// exact whenever `offset` lies on the same grid (integers always do), so
/// every emitted point satisfies `y - x == offset` bit for bit.
pub fn sample_diagonal_reinforcement<T: Scalar>(
    lambda: T,
    offset: T,
    x_range: (T, T),
    key: StreamKey,
) -> Result<PointCloud<T>> {
    let lam = lambda.as_f64();
    check_rate("lambda", lam)?;
    let (lo, hi) = (x_range.0.as_f64(), x_range.1.as_f64());
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::param("x_range", format!("invalid range [{lo}, {hi}]")));
    }
    if !offset.is_finite() {
        return Err(Error::param("offset", "must be finite"));
    }

    let mut cloud = PointCloud {
        points: Vec::new(),
        sources: Vec::new(),
        seed_record: vec![key],
    };
    let marginal = lam * std::f64::consts::SQRT_2;
    if marginal == 0.0 || lo == hi {
        return Ok(cloud);
    }

    let span = lo.abs().max(hi.abs()) + offset.as_f64().abs();
    let exponent = span.max(1.0).log2().floor() as i32 + 1;
    let quantum = 2f64.powi(exponent - T::MANTISSA_DIGITS as i32);

    let mut s = key.stream();
    let mut x = lo;
    let mut last: Option<f64> = None;
    loop {
        x += s.exponential(marginal);
        if x > hi {
            break;
        }
        let snapped = (x / quantum).round() * quantum;
        if snapped < lo || snapped > hi || last == Some(snapped) {
            continue;
        }
        last = Some(snapped);
        let px = T::of(snapped);
        cloud.points.push(PlanarPoint::new(px, px + offset));
    }
    cloud.sources = vec![Source::Diagonal; cloud.points.len()];
    Ok(cloud)
}

/// Multiset union of two clouds; order restored, tags and seed records kept.
pub fn superimpose<T: Scalar>(a: &PointCloud<T>, b: &PointCloud<T>) -> PointCloud<T> {
    let mut points = Vec::with_capacity(a.len() + b.len());
    let mut sources = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len()
            || (i < a.len() && a.points[i].lex_cmp(&b.points[j]) != std::cmp::Ordering::Greater);
        if take_a {
            points.push(a.points[i]);
            sources.push(a.sources[i]);
            i += 1;
        } else {
            points.push(b.points[j]);
            sources.push(b.sources[j]);
            j += 1;
        }
    }
    let mut seed_record = a.seed_record.clone();
    seed_record.extend_from_slice(&b.seed_record);
    PointCloud {
        points,
        sources,
        seed_record,
    }
}
