//! Planar points, increasing paths and the path functionals measured on them.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point_process::PointCloud;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarPoint<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> PlanarPoint<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    /// Strict partial order: `self < other` in both coordinates.
    #[inline]
    pub fn precedes(&self, other: &Self) -> bool {
        self.x < other.x && self.y < other.y
    }

    /// Componentwise `<=`.
    #[inline]
    pub fn dominated_by(&self, other: &Self) -> bool {
        self.x <= other.x && self.y <= other.y
    }

    /// Lexicographic order by `(x, y)`; coordinates are finite by construction.
    #[inline]
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        self.x
            .partial_cmp(&other.x)
            .unwrap_or(Ordering::Equal)
            .then(self.y.partial_cmp(&other.y).unwrap_or(Ordering::Equal))
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn translate(&self, dx: T, dy: T) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }
}

/// Area of the axis-aligned box with corners `u <= v`.
#[inline]
pub fn box_area<T: Scalar>(u: &PlanarPoint<T>, v: &PlanarPoint<T>) -> T {
    (v.x - u.x) * (v.y - u.y)
}

/// Piecewise linear path through strictly increasing vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncreasingPath<T> {
    vertices: Vec<PlanarPoint<T>>,
}

impl<T: Scalar> IncreasingPath<T> {
    pub fn new(vertices: Vec<PlanarPoint<T>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Domain("a path needs at least one vertex".into()));
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::Domain(format!("non-finite vertex {p:?}")));
        }
        if let Some(w) = vertices.windows(2).find(|w| !w[0].precedes(&w[1])) {
            return Err(Error::Domain(format!(
                "vertices {:?} and {:?} are not strictly increasing",
                w[0], w[1]
            )));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[PlanarPoint<T>] {
        &self.vertices
    }

    pub fn start(&self) -> PlanarPoint<T> {
        self.vertices[0]
    }

    pub fn end(&self) -> PlanarPoint<T> {
        *self.vertices.last().expect("nonempty")
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// `gamma_x`: the height of the path above `x`, if `x` is in its span.
    pub fn eval(&self, x: T) -> Option<T> {
        let v = &self.vertices;
        if x < v[0].x || x > self.end().x {
            return None;
        }
        // first vertex with vertex.x >= x
        let i = v.partition_point(|p| p.x < x);
        if v[i].x == x {
            return Some(v[i].y);
        }
        let (a, b) = (v[i - 1], v[i]);
        Some(a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x))
    }

    fn position(&self, p: &PlanarPoint<T>) -> Option<usize> {
        self.vertices
            .binary_search_by(|v| v.lex_cmp(p))
            .ok()
    }
}

/// Number of path vertices that are points of `cloud`, counting the start
/// vertex but never the end vertex.
pub fn path_length<T: Scalar>(gamma: &IncreasingPath<T>, cloud: &PointCloud<T>) -> usize {
    let v = gamma.vertices();
    v[..v.len() - 1]
        .iter()
        .filter(|p| cloud.contains(p))
        .count()
}

/// Area of the region of `gamma` between `u` and `v`: the union of boxes
/// spanned by consecutive cloud points of the restricted path, with `u` and
/// `v` as the outer corners.
pub fn path_area<T: Scalar>(
    gamma: &IncreasingPath<T>,
    cloud: &PointCloud<T>,
    u: &PlanarPoint<T>,
    v: &PlanarPoint<T>,
) -> Result<T> {
    let i = gamma
        .position(u)
        .ok_or_else(|| Error::Domain(format!("{u:?} is not a vertex of the path")))?;
    let j = gamma
        .position(v)
        .ok_or_else(|| Error::Domain(format!("{v:?} is not a vertex of the path")))?;
    if i >= j {
        return Err(Error::Domain(format!("{u:?} does not precede {v:?}")));
    }
    let vs = gamma.vertices();
    let mut corner = *u;
    let mut area = T::zero();
    for p in vs[i + 1..j].iter().filter(|p| cloud.contains(p)) {
        area = area + box_area(&corner, p);
        corner = *p;
    }
    Ok(area + box_area(&corner, v))
}

/// Transversal fluctuation of a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transversal<T> {
    /// `max |gamma_x - x|`, deviation from the main diagonal.
    pub from_diagonal: T,
    /// `max |gamma_x - chord(x)|` over `[a.x, b.x]`, chord from `a` to `b`.
    pub from_chord: T,
}

/// Both suprema are attained at vertices (or at the chord ends), since the
/// deviation is piecewise linear in `x`. The chord deviation is taken over the
/// part of the path inside `[a.x, b.x]`.
pub fn transversal_fluctuation<T: Scalar>(
    gamma: &IncreasingPath<T>,
    a: &PlanarPoint<T>,
    b: &PlanarPoint<T>,
) -> Transversal<T> {
    let from_diagonal = gamma
        .vertices()
        .iter()
        .map(|p| (p.y - p.x).abs())
        .fold(T::zero(), T::max);

    let chord = |x: T| a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
    let mut from_chord = T::zero();
    if b.x > a.x {
        let inside = gamma
            .vertices()
            .iter()
            .filter(|p| p.x >= a.x && p.x <= b.x)
            .map(|p| (p.x, p.y));
        let ends = [a.x, b.x]
            .into_iter()
            .filter_map(|x| gamma.eval(x).map(|y| (x, y)));
        for (x, y) in inside.chain(ends) {
            from_chord = from_chord.max((y - chord(x)).abs());
        }
    }
    Transversal {
        from_diagonal,
        from_chord,
    }
}
