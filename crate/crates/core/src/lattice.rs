//! Exponential directed last passage percolation on `{0..n}^2` with a defect
//! line.
//!
//! Weights are stored row-major with `x` as the first index. Every weight is
//! `-ln(u) / rate` for a uniform `u` read from the key's stream in row-major
//! order, so two samples that differ only in `epsilon` share their uniforms:
//! the defect weights are the unperturbed ones divided by `1 - epsilon`.
//!
//! Passage times sum the weights of all `2n + 1` vertices of a path, both
//! corners included.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Purpose, Stream, StreamKey};
use crate::scalar::Scalar;

/// Exponential weights on `{0..n}^2`, rate `1 - epsilon` on `y = x + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeWeights<T> {
    n: usize,
    epsilon: T,
    offset: i64,
    xi: Vec<T>,
}

fn check_epsilon<T: Scalar>(epsilon: T) -> Result<()> {
    if !(epsilon >= T::zero() && epsilon < T::one()) {
        return Err(Error::param("epsilon", format!("must lie in [0, 1), got {epsilon}")));
    }
    Ok(())
}

fn check_offset(n: usize, offset: i64) -> Result<()> {
    if offset.unsigned_abs() as usize > n {
        return Err(Error::param("offset", format!("|{offset}| exceeds n = {n}")));
    }
    Ok(())
}

#[inline]
fn on_line(x: usize, y: usize, offset: i64) -> bool {
    y as i64 - x as i64 == offset
}

impl<T: Scalar> LatticeWeights<T> {
    /// Weights given explicitly as `rows[x][y]`.
    pub fn from_rows(rows: &[Vec<T>], epsilon: T, offset: i64) -> Result<Self> {
        let side = rows.len();
        if side == 0 || rows.iter().any(|r| r.len() != side) {
            return Err(Error::param("rows", "weights must form a nonempty square array"));
        }
        check_epsilon(epsilon)?;
        let n = side - 1;
        check_offset(n, offset)?;
        let xi: Vec<T> = rows.iter().flatten().copied().collect();
        if xi.iter().any(|w| !(w.is_finite() && *w >= T::zero())) {
            return Err(Error::param("rows", "weights must be finite and nonnegative"));
        }
        Ok(Self {
            n,
            epsilon,
            offset,
            xi,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.xi[x * (self.n + 1) + y]
    }

    /// Row-major values.
    pub fn as_slice(&self) -> &[T] {
        &self.xi
    }

    /// Weights on the defect line, in increasing `x`.
    pub fn defect_line(&self) -> Vec<T> {
        (0..=self.n)
            .filter_map(|x| {
                let y = x as i64 + self.offset;
                (0..=self.n as i64)
                    .contains(&y)
                    .then(|| self.get(x, y as usize))
            })
            .collect()
    }
}

/// Row-major weight generator shared by the stored and the streaming paths.
struct WeightSource<T> {
    stream: Stream,
    defect_rate: T,
    offset: i64,
}

impl<T: Scalar> WeightSource<T> {
    fn new(epsilon: T, offset: i64, key: StreamKey) -> Self {
        Self {
            stream: key.with_purpose(Purpose::LatticeWeights).stream(),
            defect_rate: T::one() - epsilon,
            offset,
        }
    }

    /// Unit-rate weight and the weight at this cell under the defect.
    #[inline]
    fn next(&mut self, x: usize, y: usize) -> (T, T) {
        let base = -self.stream.uniform::<T>().ln();
        let w = if on_line(x, y, self.offset) {
            base / self.defect_rate
        } else {
            base
        };
        (base, w)
    }
}

/// Independent exponentials: rate 1 off the line `y = x + offset`, rate
/// `1 - epsilon` on it.
pub fn sample_weights<T: Scalar>(
    n: usize,
    epsilon: T,
    offset: i64,
    key: StreamKey,
) -> Result<LatticeWeights<T>> {
    check_epsilon(epsilon)?;
    check_offset(n, offset)?;
    let mut src = WeightSource::new(epsilon, offset, key);
    let side = n + 1;
    let mut xi = Vec::with_capacity(side * side);
    for x in 0..side {
        for y in 0..side {
            xi.push(src.next(x, y).1);
        }
    }
    Ok(LatticeWeights {
        n,
        epsilon,
        offset,
        xi,
    })
}

/// Full table of point-to-point passage times from the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PassageTable<T> {
    n: usize,
    t: Vec<T>,
}

impl<T: Scalar> PassageTable<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.t[x * (self.n + 1) + y]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.t
    }

    /// The two predecessor values entering the recurrence at `(x, y)`,
    /// out-of-grid terms being zero: `(from (x-1, y), from (x, y-1))`.
    #[inline]
    fn predecessors(&self, x: usize, y: usize) -> (T, T) {
        let left = if x > 0 { self.get(x - 1, y) } else { T::zero() };
        let below = if y > 0 { self.get(x, y - 1) } else { T::zero() };
        (left, below)
    }
}

/// `T[x][y] = xi[x][y] + max(T[x-1][y], T[x][y-1])`.
pub fn passage_time<T: Scalar>(weights: &LatticeWeights<T>) -> (T, PassageTable<T>) {
    let side = weights.n + 1;
    let mut table = PassageTable {
        n: weights.n,
        t: vec![T::zero(); side * side],
    };
    for x in 0..side {
        for y in 0..side {
            let (left, below) = table.predecessors(x, y);
            table.t[x * side + y] = weights.get(x, y) + left.max(below);
        }
    }
    (table.get(weights.n, weights.n), table)
}

/// Corner-to-corner passage time with a single rolling row; weights are never
/// stored. Bit-identical to [`passage_time`] on [`sample_weights`] output.
pub fn sample_passage_time<T: Scalar>(n: usize, epsilon: T, offset: i64, key: StreamKey) -> Result<T> {
    Ok(sample_passage_time_pair(n, epsilon, offset, key)?.1)
}

/// `(T_n^0, T_n^epsilon)` on common random numbers, with a rolling row each.
pub fn sample_passage_time_pair<T: Scalar>(
    n: usize,
    epsilon: T,
    offset: i64,
    key: StreamKey,
) -> Result<(T, T)> {
    check_epsilon(epsilon)?;
    check_offset(n, offset)?;
    let mut src = WeightSource::new(epsilon, offset, key);
    let side = n + 1;
    // row[y] holds T[x-1][y] before the update and T[x][y] after it
    let mut base = vec![T::zero(); side];
    let mut defect = vec![T::zero(); side];
    for x in 0..side {
        let (mut below_b, mut below_d) = (T::zero(), T::zero());
        for y in 0..side {
            let (wb, wd) = src.next(x, y);
            let tb = wb + base[y].max(below_b);
            let td = wd + defect[y].max(below_d);
            base[y] = tb;
            defect[y] = td;
            below_b = tb;
            below_d = td;
        }
    }
    Ok((base[n], defect[n]))
}

/// Oriented lattice path from `(0,0)` to `(n,n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePath {
    pub vertices: Vec<(usize, usize)>,
}

impl LatticePath {
    /// Sum of weights along the path, accumulated from the origin.
    pub fn weight<T: Scalar>(&self, weights: &LatticeWeights<T>) -> T {
        self.vertices
            .iter()
            .fold(T::zero(), |acc, &(x, y)| acc + weights.get(x, y))
    }

    /// `max |y - x|` over the path.
    pub fn max_deviation(&self) -> usize {
        self.vertices
            .iter()
            .map(|&(x, y)| x.abs_diff(y))
            .max()
            .unwrap_or(0)
    }

    /// Vertices lying on `y = x + offset`.
    pub fn hits(&self, offset: i64) -> usize {
        self.vertices
            .iter()
            .filter(|&&(x, y)| on_line(x, y, offset))
            .count()
    }
}

/// Backtracks from `(n, n)`; on an exact tie the vertical predecessor
/// `(x, y-1)` wins. Every visited cell is re-checked against the recurrence.
pub fn topmost_geodesic<T: Scalar>(
    table: &PassageTable<T>,
    weights: &LatticeWeights<T>,
) -> Result<LatticePath> {
    if table.n != weights.n {
        return Err(Error::Integrity(format!(
            "table is {}x{} but weights are {}x{}",
            table.n + 1,
            table.n + 1,
            weights.n + 1,
            weights.n + 1
        )));
    }
    let (mut x, mut y) = (weights.n, weights.n);
    let mut rev = Vec::with_capacity(2 * weights.n + 1);
    loop {
        let (left, below) = table.predecessors(x, y);
        if table.get(x, y) != weights.get(x, y) + left.max(below) {
            return Err(Error::Integrity(format!(
                "recurrence fails at ({x}, {y}): table does not match weights"
            )));
        }
        rev.push((x, y));
        if x == 0 && y == 0 {
            break;
        }
        if y > 0 && (x == 0 || below >= left) {
            y -= 1;
        } else {
            x -= 1;
        }
    }
    rev.reverse();
    Ok(LatticePath { vertices: rev })
}

/// Paired samples for `Exp(1-eps) =d Exp(1) + Bernoulli(eps) * Exp'(1-eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionSample<T> {
    pub direct: Vec<T>,
    pub composite: Vec<T>,
}

/// Draws `count` direct `Exp(1-eps)` variates and `count` composite ones from
/// independent substreams of `key`.
pub fn bernoulli_decomposition_sample<T: Scalar>(
    epsilon: T,
    count: usize,
    key: StreamKey,
) -> Result<DecompositionSample<T>> {
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::param("epsilon", format!("must lie in (0, 1), got {epsilon}")));
    }
    let key = key.with_purpose(Purpose::Decomposition);
    let rate = T::one() - epsilon;
    let mut direct_stream = key.substream(0);
    let mut composite_stream = key.substream(1);
    let eps = epsilon.as_f64();
    let direct = (0..count).map(|_| direct_stream.exponential(rate)).collect();
    let composite = (0..count)
        .map(|_| {
            let unit = composite_stream.exponential(T::one());
            let coin = composite_stream.bernoulli(eps);
            let extra = composite_stream.exponential(rate);
            if coin {
                unit + extra
            } else {
                unit
            }
        })
        .collect();
    Ok(DecompositionSample { direct, composite })
}

/// Magic bytes of the binary dumps.
pub const WEIGHTS_MAGIC: [u8; 8] = *b"LPPWGT01";
pub const TABLE_MAGIC: [u8; 8] = *b"LPPTBL01";

/// Decoded binary dump: 24-byte header (magic, `n` as u64, `epsilon` as f64),
/// then `(n+1)^2` row-major f64 values, everything little-endian.
#[derive(Debug, Clone, PartialEq)]
pub struct Dump {
    pub magic: [u8; 8],
    pub n: usize,
    pub epsilon: f64,
    pub values: Vec<f64>,
}

fn write_dump<T: Scalar>(
    out: &mut impl Write,
    magic: [u8; 8],
    n: usize,
    epsilon: T,
    values: &[T],
) -> Result<()> {
    out.write_all(&magic)?;
    out.write_all(&(n as u64).to_le_bytes())?;
    out.write_all(&epsilon.as_f64().to_le_bytes())?;
    for v in values {
        out.write_all(&v.as_f64().to_le_bytes())?;
    }
    Ok(())
}

pub fn write_weights<T: Scalar>(out: &mut impl Write, w: &LatticeWeights<T>) -> Result<()> {
    write_dump(out, WEIGHTS_MAGIC, w.n, w.epsilon, &w.xi)
}

/// Tables carry the epsilon of the weights they were computed from.
pub fn write_table<T: Scalar>(out: &mut impl Write, t: &PassageTable<T>, epsilon: T) -> Result<()> {
    write_dump(out, TABLE_MAGIC, t.n, epsilon, &t.t)
}

pub fn read_dump(input: &mut impl Read) -> Result<Dump> {
    let mut header = [0u8; 24];
    input.read_exact(&mut header)?;
    let magic: [u8; 8] = header[..8].try_into().expect("8 bytes");
    if magic != WEIGHTS_MAGIC && magic != TABLE_MAGIC {
        return Err(Error::Integrity(format!("unknown dump magic {magic:?}")));
    }
    let n = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes")) as usize;
    let epsilon = f64::from_le_bytes(header[16..24].try_into().expect("8 bytes"));
    let count = (n + 1)
        .checked_mul(n + 1)
        .ok_or_else(|| Error::Integrity(format!("absurd size n = {n}")))?;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(Error::Integrity(format!(
            "expected {} payload bytes, found {}",
            count * 8,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(Dump {
        magic,
        n,
        epsilon,
        values,
    })
}
