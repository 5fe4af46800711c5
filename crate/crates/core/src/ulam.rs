//! Longest increasing paths through Poisson clouds.
//!
//! `X(u, v)` is the largest number of cloud points `p` with `u <= p <= v`
//! (componentwise) that form a chain strictly increasing in both coordinates.
//! Corner points that happen to be cloud points are counted once.
//!
//! Lengths come from patience sorting in `O(N log L)`. The topmost maximal
//! path is rebuilt from the pile structure: every pile is an antichain whose
//! points arrive with nonincreasing `y`, so walking down from the top pile
//! and taking, at each level, the first point lying strictly below-left of
//! the current one yields the highest admissible point at every level. A
//! chain that is highest at every level dominates every other maximal chain
//! pointwise as a piecewise linear function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{IncreasingPath, PlanarPoint};
use crate::point_process::{
    sample_diagonal_reinforcement, sample_poisson_field, superimpose, PointCloud, Region,
};
use crate::rng::{Purpose, StreamKey};
use crate::scalar::Scalar;

/// Longest chain between two corners and the topmost path realising it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LisResult<T> {
    pub length: usize,
    pub topmost_path: IncreasingPath<T>,
    pub from: PlanarPoint<T>,
    pub to: PlanarPoint<T>,
}

impl<T: Scalar> LisResult<T> {
    /// `X - d(u, v)` with `d` the l1 distance between the corners.
    pub fn centered_by_distance(&self) -> T {
        let d = (self.to.x - self.from.x) + (self.to.y - self.from.y);
        T::of_usize(self.length) - d
    }

    /// `X - mean`, the mean being an estimate supplied by the caller.
    pub fn centered(&self, mean: T) -> T {
        T::of_usize(self.length) - mean
    }
}

fn check_corners<T: Scalar>(u: &PlanarPoint<T>, v: &PlanarPoint<T>) -> Result<()> {
    if !(u.is_finite() && v.is_finite()) {
        return Err(Error::Domain("corners must be finite".into()));
    }
    if !u.precedes(v) {
        return Err(Error::Domain(format!(
            "corner {u:?} does not strictly precede {v:?}"
        )));
    }
    Ok(())
}

/// Indices of cloud points inside `[u, v]`, in patience order: `x`
/// ascending, and `y` descending within a run of equal `x` so that points
/// sharing an abscissa can never extend one another.
fn for_each_in_box<T: Scalar>(
    pts: &[PlanarPoint<T>],
    u: &PlanarPoint<T>,
    v: &PlanarPoint<T>,
    mut f: impl FnMut(usize),
) {
    let lo = pts.partition_point(|p| p.x < u.x);
    let hi = pts.partition_point(|p| p.x <= v.x);
    let inside = |p: &PlanarPoint<T>| p.y >= u.y && p.y <= v.y;
    let mut i = lo;
    while i < hi {
        let mut j = i + 1;
        while j < hi && pts[j].x == pts[i].x {
            j += 1;
        }
        if j == i + 1 {
            if inside(&pts[i]) {
                f(i);
            }
        } else {
            for k in (i..j).rev() {
                if inside(&pts[k]) {
                    f(k);
                }
            }
        }
        i = j;
    }
}

/// Length of the longest chain of cloud points in `[u, v]`.
pub fn lis_length<T: Scalar>(
    cloud: &PointCloud<T>,
    u: &PlanarPoint<T>,
    v: &PlanarPoint<T>,
) -> Result<usize> {
    check_corners(u, v)?;
    let pts = cloud.points();
    let mut tops: Vec<T> = Vec::new();
    for_each_in_box(pts, u, v, |i| {
        let y = pts[i].y;
        let pile = tops.partition_point(|&t| t < y);
        if pile == tops.len() {
            tops.push(y);
        } else {
            tops[pile] = y;
        }
    });
    Ok(tops.len())
}

/// Quadratic longest-chain DP over the points in `[u, v]`. Test oracle.
pub fn lis_brute_force<T: Scalar>(
    cloud: &PointCloud<T>,
    u: &PlanarPoint<T>,
    v: &PlanarPoint<T>,
) -> usize {
    let pts: Vec<_> = cloud
        .points()
        .iter()
        .filter(|p| u.dominated_by(p) && p.dominated_by(v))
        .collect();
    let mut best = vec![1usize; pts.len()];
    for j in 0..pts.len() {
        for i in 0..j {
            if pts[i].precedes(pts[j]) {
                best[j] = best[j].max(best[i] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

/// Longest chain length together with the topmost maximal path from `u` to
/// `v`. The path's vertices are `u`, the chain, and `v`; a corner is left
/// out when it coincides with a chain point or does not strictly precede
/// (follow) it.
pub fn lis<T: Scalar>(
    cloud: &PointCloud<T>,
    u: &PlanarPoint<T>,
    v: &PlanarPoint<T>,
) -> Result<LisResult<T>> {
    check_corners(u, v)?;
    let pts = cloud.points();
    assert!(pts.len() < u32::MAX as usize, "cloud too large for u32 indices");

    let mut tops: Vec<T> = Vec::new();
    let mut levels: Vec<Vec<u32>> = Vec::new();
    for_each_in_box(pts, u, v, |i| {
        let y = pts[i].y;
        let pile = tops.partition_point(|&t| t < y);
        if pile == tops.len() {
            tops.push(y);
            levels.push(Vec::new());
        } else {
            tops[pile] = y;
        }
        levels[pile].push(i as u32);
    });

    let length = levels.len();
    let mut chain = Vec::with_capacity(length);
    if let Some(top) = levels.last() {
        let mut cur = pts[top[0] as usize];
        chain.push(cur);
        for level in levels[..length - 1].iter().rev() {
            let k = level.partition_point(|&i| pts[i as usize].y >= cur.y);
            let next = pts[level[k] as usize];
            debug_assert!(next.precedes(&cur));
            chain.push(next);
            cur = next;
        }
        chain.reverse();
    }

    let mut vertices = Vec::with_capacity(length + 2);
    if chain.first().map_or(true, |p| u.precedes(p)) {
        vertices.push(*u);
    }
    vertices.extend_from_slice(&chain);
    if chain.last().map_or(true, |p| p.precedes(v)) {
        vertices.push(*v);
    }
    Ok(LisResult {
        length,
        topmost_path: IncreasingPath::new(vertices)?,
        from: *u,
        to: *v,
    })
}

/// Topmost maximal path from `u` to `v`.
pub fn topmost_maximal_path<T: Scalar>(
    cloud: &PointCloud<T>,
    u: &PlanarPoint<T>,
    v: &PlanarPoint<T>,
) -> Result<IncreasingPath<T>> {
    lis(cloud, u, v).map(|r| r.topmost_path)
}

/// Base configuration on `[0, n]^2` and its diagonal reinforcement.
#[derive(Debug, Clone)]
pub struct ReinforcedConfiguration<T> {
    pub base: PointCloud<T>,
    pub diagonal: PointCloud<T>,
}

impl<T: Scalar> ReinforcedConfiguration<T> {
    /// Samples the rate one field on `[0, n]^2` (purpose `BulkField`) and the
    /// intensity `lambda` process on `y = x + offset` clipped to the square
    /// (purpose `Diagonal`), both under `key`'s seed and replica.
    pub fn sample(n: usize, lambda: T, offset: T, key: StreamKey) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        let side = T::of_usize(n);
        if !(offset.abs() < side) {
            return Err(Error::Domain(format!(
                "offset {offset} puts the reinforced line outside [0, {n}]^2"
            )));
        }
        let base = sample_poisson_field(
            &Region::square(side)?,
            T::one(),
            key.with_purpose(Purpose::BulkField),
        )?;
        let range = (T::zero().max(-offset), side.min(side - offset));
        let diagonal = sample_diagonal_reinforcement(
            lambda,
            offset,
            range,
            key.with_purpose(Purpose::Diagonal),
        )?;
        Ok(Self { base, diagonal })
    }

    pub fn reinforced(&self) -> PointCloud<T> {
        superimpose(&self.base, &self.diagonal)
    }
}

fn corners<T: Scalar>(n: usize) -> (PlanarPoint<T>, PlanarPoint<T>) {
    let side = T::of_usize(n);
    (PlanarPoint::new(T::zero(), T::zero()), PlanarPoint::new(side, side))
}

/// `L_n^{lambda, m}`: longest chain from `(0,0)` to `(n,n)` in the rate one
/// field plus the reinforcement on `y = x + offset`.
pub fn reinforced_lis<T: Scalar>(
    n: usize,
    lambda: T,
    offset: T,
    key: StreamKey,
) -> Result<LisResult<T>> {
    let config = ReinforcedConfiguration::sample(n, lambda, offset, key)?;
    let (u, v) = corners(n);
    lis(&config.reinforced(), &u, &v)
}

/// Unperturbed and reinforced results on a shared base configuration.
pub fn reinforced_pair<T: Scalar>(
    n: usize,
    lambda: T,
    offset: T,
    key: StreamKey,
) -> Result<(LisResult<T>, LisResult<T>)> {
    let config = ReinforcedConfiguration::sample(n, lambda, offset, key)?;
    let (u, v) = corners(n);
    let base = lis(&config.base, &u, &v)?;
    let reinforced = lis(&config.reinforced(), &u, &v)?;
    Ok((base, reinforced))
}
