//! Continuous-time TASEP from step initial condition with a slow bond `(0, 1)`.
//!
//! Particle `k` starts at site `-k`. Each particle whose right neighbour is
//! vacant carries one exponential clock; when it rings the particle jumps.
//! In TASEP a vacant site ahead of a particle can only be filled by that same
//! particle, so a scheduled jump is never invalidated and the event queue
//! needs no cancellation: a particle's clock is drawn once, when it becomes
//! free, at the time of the event that freed it.
//!
//! Clocks are addressed by `(particle, jump index)`. With [`KeyedClocks`] the
//! waiting time of particle `i`'s `j`-th jump is `-ln(u)/rate` for a uniform
//! `u` read at counter `(j, i)` of the key, so runs at different `epsilon`
//! share their randomness and every crossing time is pathwise monotone in
//! `epsilon`. With [`WeightClocks`] the waits are the lattice weights
//! `xi(i, j)`, which turns the engine into an executable form of the
//! TASEP / last passage coupling.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::io::Write;

use bitvec::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{passage_time, sample_weights, LatticeWeights};
use crate::rng::{Purpose, StreamKey};
use crate::scalar::Scalar;

/// Waiting-time source for the event engine.
pub trait Clocks<T> {
    /// Wait for jump number `jump` (0-based) of `particle` once it is free to
    /// move; `slow` is set when the jump crosses the bond `(0, 1)`. `None`
    /// means the jump never happens.
    fn wait(&self, particle: usize, jump: u64, slow: bool) -> Option<T>;
}

/// Exponential clocks read from a counter-based stream.
#[derive(Debug, Clone, Copy)]
pub struct KeyedClocks<T> {
    key: StreamKey,
    slow_rate: T,
}

impl<T: Scalar> KeyedClocks<T> {
    pub fn new(key: StreamKey, epsilon: T) -> Self {
        Self {
            key: key.with_purpose(Purpose::TasepClocks),
            slow_rate: T::one() - epsilon,
        }
    }
}

impl<T: Scalar> Clocks<T> for KeyedClocks<T> {
    #[inline]
    fn wait(&self, particle: usize, jump: u64, slow: bool) -> Option<T> {
        let e = -T::open_unit(self.key.word_at(particle as u64, jump)).ln();
        Some(if slow { e / self.slow_rate } else { e })
    }
}

/// Clocks taken from lattice weights: particle `i`'s `j`-th jump waits
/// `xi(i, j)`. Jumps outside the array never fire.
#[derive(Debug, Clone, Copy)]
pub struct WeightClocks<'a, T> {
    weights: &'a LatticeWeights<T>,
}

impl<'a, T: Scalar> WeightClocks<'a, T> {
    pub fn new(weights: &'a LatticeWeights<T>) -> Self {
        Self { weights }
    }
}

impl<T: Scalar> Clocks<T> for WeightClocks<'_, T> {
    #[inline]
    fn wait(&self, particle: usize, jump: u64, _slow: bool) -> Option<T> {
        let n = self.weights.n();
        (particle <= n && jump <= n as u64).then(|| self.weights.get(particle, jump as usize))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Event<T> {
    time: T,
    particle: usize,
}

impl<T: PartialOrd> Eq for Event<T> {}

impl<T: PartialOrd> Ord for Event<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .partial_cmp(&other.time)
            .unwrap_or(Ordering::Equal)
            .then(self.particle.cmp(&other.particle))
    }
}

impl<T: PartialOrd> PartialOrd for Event<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One executed jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump<T> {
    pub time: T,
    pub particle: usize,
    /// 0-based index of this jump among the particle's jumps.
    pub index: u64,
    pub from: i64,
}

/// Finite window `[-w_left, w_right]` of the lattice.
#[derive(Debug, Clone)]
pub struct TasepState<T> {
    w_left: usize,
    w_right: usize,
    occupation: BitVec<u64, Lsb0>,
    positions: Vec<i64>,
    jump_counts: Vec<u64>,
    time: T,
    bond_crossings: u64,
    crossing_times: Vec<T>,
    pending: BinaryHeap<Reverse<Event<T>>>,
    armed: bool,
    events: u64,
}

/// Step initial condition: sites `-w_left..=0` occupied, `1..=w_right` empty.
pub fn init_step<T: Scalar>(w_left: usize, w_right: usize) -> Result<TasepState<T>> {
    if w_left < 1 || w_right < 1 {
        return Err(Error::param("window", "both sides need at least one site"));
    }
    let mut occupation = bitvec![u64, Lsb0; 0; w_left + w_right + 1];
    occupation[..=w_left].fill(true);
    Ok(TasepState {
        w_left,
        w_right,
        occupation,
        positions: (0..=w_left as i64).map(|k| -k).collect(),
        jump_counts: vec![0; w_left + 1],
        time: T::zero(),
        bond_crossings: 0,
        crossing_times: Vec::new(),
        pending: BinaryHeap::new(),
        armed: false,
        events: 0,
    })
}

impl<T: Scalar> TasepState<T> {
    pub fn window(&self) -> (i64, i64) {
        (-(self.w_left as i64), self.w_right as i64)
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn particle_count(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn jump_counts(&self) -> &[u64] {
        &self.jump_counts
    }

    pub fn bond_crossings(&self) -> u64 {
        self.bond_crossings
    }

    /// Times at which a particle crossed the bond `(0, 1)`, ascending.
    pub fn crossing_times(&self) -> &[T] {
        &self.crossing_times
    }

    /// Number of jumps executed so far.
    pub fn events(&self) -> u64 {
        self.events
    }

    #[inline]
    fn slot(&self, site: i64) -> usize {
        (site + self.w_left as i64) as usize
    }

    pub fn occupied(&self, site: i64) -> bool {
        let (lo, hi) = self.window();
        (lo..=hi).contains(&site) && self.occupation[self.slot(site)]
    }

    /// Occupation of sites `-w_left..=w_right`.
    pub fn occupation(&self) -> Vec<bool> {
        self.occupation.iter().map(|b| *b).collect()
    }

    /// Identifier of the particle sitting at `site`.
    pub fn particle_at(&self, site: i64) -> Option<usize> {
        let k = self.positions.partition_point(|&p| p > site);
        (k < self.positions.len() && self.positions[k] == site).then_some(k)
    }

    /// Full consistency check: order preserved, occupation bits match the
    /// particle positions, every particle inside the window.
    pub fn check_invariants(&self) -> Result<()> {
        let (lo, hi) = self.window();
        if self.positions.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Integrity("particles out of order".into()));
        }
        if self.positions.iter().any(|p| !(lo..=hi).contains(p)) {
            return Err(Error::Integrity("particle outside the window".into()));
        }
        if self.occupation.count_ones() != self.positions.len()
            || self.positions.iter().any(|&p| !self.occupation[self.slot(p)])
        {
            return Err(Error::Integrity("occupation disagrees with positions".into()));
        }
        let jumps: u64 = self.jump_counts.iter().sum();
        if jumps != self.events {
            return Err(Error::Integrity("jump counters disagree with event count".into()));
        }
        Ok(())
    }

    #[inline]
    fn free_to_jump(&self, k: usize) -> bool {
        k == 0 || self.positions[k - 1] > self.positions[k] + 1
    }

    #[inline]
    fn schedule<C: Clocks<T>>(&mut self, k: usize, now: T, clocks: &C) {
        let slow = self.positions[k] == 0;
        if let Some(w) = clocks.wait(k, self.jump_counts[k], slow) {
            self.pending.push(Reverse(Event {
                time: now + w,
                particle: k,
            }));
        }
    }

    fn arm<C: Clocks<T>>(&mut self, clocks: &C) {
        if self.armed {
            return;
        }
        for k in 0..self.positions.len() {
            if self.free_to_jump(k) {
                self.schedule(k, self.time, clocks);
            }
        }
        self.armed = true;
    }

    /// Executes every pending jump with time `<= until` (all of them if
    /// `until` is infinite). Clocks not yet drawn are drawn from `clocks`.
    pub fn advance<C: Clocks<T>>(
        &mut self,
        clocks: &C,
        until: T,
        mut observer: impl FnMut(&Jump<T>),
    ) -> Result<()> {
        self.arm(clocks);
        while let Some(&Reverse(ev)) = self.pending.peek() {
            if ev.time > until {
                break;
            }
            self.pending.pop();
            let k = ev.particle;
            let from = self.positions[k];
            let to = from + 1;
            if to > self.w_right as i64 {
                self.time = ev.time;
                return Err(Error::Horizon(format!(
                    "particle {k} left the window [-{}, {}] at time {}",
                    self.w_left, self.w_right, ev.time
                )));
            }
            debug_assert!(!self.occupation[self.slot(to)], "exclusion violated at site {to}");
            debug_assert!(self.free_to_jump(k));
            let (s_from, s_to) = (self.slot(from), self.slot(to));
            self.occupation.set(s_from, false);
            self.occupation.set(s_to, true);
            self.positions[k] = to;
            let index = self.jump_counts[k];
            self.jump_counts[k] += 1;
            self.time = ev.time;
            self.events += 1;
            if from == 0 {
                self.bond_crossings += 1;
                self.crossing_times.push(ev.time);
            }
            observer(&Jump {
                time: ev.time,
                particle: k,
                index,
                from,
            });

            if self.free_to_jump(k) {
                self.schedule(k, ev.time, clocks);
            }
            if k + 1 < self.positions.len() && self.positions[k + 1] == from - 1 {
                self.schedule(k + 1, ev.time, clocks);
            }
        }
        if until.is_finite() && until > self.time {
            self.time = until;
        }
        Ok(())
    }
}

fn validate_run<T: Scalar>(state: &TasepState<T>, epsilon: T, t_max: T) -> Result<()> {
    if !(epsilon >= T::zero() && epsilon < T::one()) {
        return Err(Error::param("epsilon", format!("must lie in [0, 1), got {epsilon}")));
    }
    if !(t_max.is_finite() && t_max > T::zero()) {
        return Err(Error::param("t_max", format!("must be positive and finite, got {t_max}")));
    }
    if t_max < state.time {
        return Err(Error::param("t_max", "lies before the current time"));
    }
    let needed = minimum_window(t_max.as_f64());
    if state.w_left < needed || state.w_right < needed {
        return Err(Error::Horizon(format!(
            "window [-{}, {}] is narrower than {needed} sites per side needed for t_max = {t_max}",
            state.w_left, state.w_right
        )));
    }
    Ok(())
}

/// Sites per side a run to `t_max` requires: `1.5 t_max`, widened for short
/// runs to `t_max + 8 sqrt(t_max) + 16` so that the lead particle (a rate one
/// Poisson walker) essentially never reaches the edge.
pub fn minimum_window(t_max: f64) -> usize {
    (1.5 * t_max).max(t_max + 8.0 * t_max.sqrt() + 16.0).ceil() as usize
}

/// Runs the dynamics up to `t_max` with slow bond rate `1 - epsilon`.
pub fn simulate<T: Scalar>(
    mut state: TasepState<T>,
    epsilon: T,
    t_max: T,
    key: StreamKey,
) -> Result<TasepState<T>> {
    validate_run(&state, epsilon, t_max)?;
    state.advance(&KeyedClocks::new(key, epsilon), t_max, |_| {})?;
    Ok(state)
}

/// [`simulate`], writing one CSV row `time,site,event` per jump; `site` is the
/// destination and `event` is `cross` for jumps over the slow bond, `jump`
/// otherwise.
pub fn simulate_logged<T: Scalar>(
    mut state: TasepState<T>,
    epsilon: T,
    t_max: T,
    key: StreamKey,
    out: &mut impl Write,
) -> Result<TasepState<T>> {
    validate_run(&state, epsilon, t_max)?;
    writeln!(out, "time,site,event")?;
    let mut io_err = None;
    state.advance(&KeyedClocks::new(key, epsilon), t_max, |j| {
        if io_err.is_none() {
            let kind = if j.from == 0 { "cross" } else { "jump" };
            if let Err(e) = writeln!(out, "{:.17e},{},{}", j.time.as_f64(), j.from + 1, kind) {
                io_err = Some(e);
            }
        }
    })?;
    match io_err {
        Some(e) => Err(e.into()),
        None => Ok(state),
    }
}

/// Time for particle `n` (started at `-n`) to reach site 1, computed twice
/// from one weight array: by the event engine driven by [`WeightClocks`] and
/// by the last passage recursion. The two are equal to the last bit.
pub fn coupled_passage_time<T: Scalar>(n: usize, epsilon: T, key: StreamKey) -> Result<(T, T)> {
    if n < 1 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let weights = sample_weights(n, epsilon, 0, key)?;
    let (lpp_time, _) = passage_time(&weights);
    let tasep_time = tasep_passage_time(&weights)?;
    Ok((tasep_time, lpp_time))
}

/// Event-driven arrival time of particle `n` at site 1 with clocks from
/// `weights` (defect line must be the main diagonal for the slow bond).
pub fn tasep_passage_time<T: Scalar>(weights: &LatticeWeights<T>) -> Result<T> {
    let n = weights.n();
    let mut state = init_step::<T>(n.max(1), n + 1)?;
    let mut arrival = None;
    state.advance(&WeightClocks::new(weights), T::infinity(), |j| {
        if j.particle == n && j.index == n as u64 {
            arrival = Some(j.time);
        }
    })?;
    arrival.ok_or_else(|| Error::Integrity(format!("particle {n} never reached site 1")))
}

/// Crossing rate of the slow bond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentEstimate<T> {
    pub current: T,
    pub horizon: T,
    pub burn_in: T,
    /// Batch-means standard error.
    pub std_error: T,
    pub crossings: u64,
    pub batches: usize,
}

impl<T: Scalar> CurrentEstimate<T> {
    /// `std_error / current`; infinite when nothing crossed.
    pub fn relative_error(&self) -> T {
        if self.crossings == 0 {
            T::infinity()
        } else {
            self.std_error / self.current
        }
    }

    pub fn no_crossings(&self) -> bool {
        self.crossings == 0
    }
}

pub const CURRENT_BATCHES: usize = 20;

/// Crossings after `burn_in` per unit time, with a batch-means error over
/// [`CURRENT_BATCHES`] equal slices of `(burn_in, time]`.
pub fn current_estimate<T: Scalar>(state: &TasepState<T>, burn_in: T) -> Result<CurrentEstimate<T>> {
    if !(burn_in >= T::zero()) || state.time <= burn_in {
        return Err(Error::param(
            "burn_in",
            format!("horizon {} must exceed burn-in {burn_in}", state.time),
        ));
    }
    let span = (state.time - burn_in).as_f64();
    let b0 = burn_in.as_f64();
    let times = &state.crossing_times;
    let first = times.partition_point(|&t| t <= burn_in);
    let crossings = (times.len() - first) as u64;
    let current = crossings as f64 / span;

    let width = span / CURRENT_BATCHES as f64;
    let mut counts = [0u64; CURRENT_BATCHES];
    for &t in &times[first..] {
        let b = (((t.as_f64() - b0) / width) as usize).min(CURRENT_BATCHES - 1);
        counts[b] += 1;
    }
    let rates: Vec<f64> = counts.iter().map(|&c| c as f64 / width).collect();
    let mean = rates.iter().sum::<f64>() / CURRENT_BATCHES as f64;
    let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (CURRENT_BATCHES - 1) as f64;
    Ok(CurrentEstimate {
        current: T::of(current),
        horizon: state.time,
        burn_in,
        std_error: T::of((var / CURRENT_BATCHES as f64).sqrt()),
        crossings,
        batches: CURRENT_BATCHES,
    })
}

/// [`current_estimate`] with the default burn-in of a tenth of the horizon.
pub fn current_estimate_default<T: Scalar>(state: &TasepState<T>) -> Result<CurrentEstimate<T>> {
    current_estimate(state, state.time / T::of(10.0))
}

/// Mean-field current `(1 - eps) / (2 - eps)^2` across a slow bond.
pub fn mean_field_current(epsilon: f64) -> f64 {
    (1.0 - epsilon) / (2.0 - epsilon).powi(2)
}

/// Known bounds on the inverse maximal current `kappa` with a slow bond:
/// `max{4, 3/2 + ((1-e)^2 + 2(2-e)) / (2(1-e)(2-e))} <= kappa <= 3 + 1/(1-e)`.
pub fn inverse_current_bounds(epsilon: f64) -> (f64, f64) {
    let e = epsilon;
    let lower = 1.5 + ((1.0 - e).powi(2) + 2.0 * (2.0 - e)) / (2.0 * (1.0 - e) * (2.0 - e));
    (lower.max(4.0), 3.0 + 1.0 / (1.0 - e))
}
