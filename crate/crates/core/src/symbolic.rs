//! Alphabets, finite symbol windows, cylinders and the logarithmic distance.
//!
//! Sequences are never materialised in full. A [`SymbolWindow`] holds the
//! coordinates a computation needs, and anything that would read past its
//! edge fails with [`Error::Range`] or [`Error::Resolution`] instead of
//! guessing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symbols are small nonnegative integers. Countable alphabets store sampled
/// values directly.
pub type Symbol = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alphabet {
    /// Symbols `0..size`, `size >= 2`.
    Finite(u64),
    /// All nonnegative integers (geometric i.i.d. laws, Gauss digits).
    Countable,
}

impl Alphabet {
    pub fn finite(size: u64) -> Result<Self> {
        if size < 2 {
            return Err(Error::Argument(format!(
                "a finite alphabet needs at least two symbols, got {size}"
            )));
        }
        Ok(Alphabet::Finite(size))
    }

    pub fn contains(&self, symbol: Symbol) -> bool {
        match *self {
            Alphabet::Finite(size) => symbol < size,
            Alphabet::Countable => true,
        }
    }

    pub fn size(&self) -> Option<u64> {
        match *self {
            Alphabet::Finite(size) => Some(size),
            Alphabet::Countable => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    TwoSided,
    OneSided,
}

/// Closed integer interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
}

impl Interval {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::Argument(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    /// Number of coordinates.
    pub fn len(&self) -> u64 {
        (self.hi - self.lo) as u64 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, coord: i64) -> bool {
        self.lo <= coord && coord <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn shifted(&self, by: i64) -> Interval {
        Interval {
            lo: self.lo + by,
            hi: self.hi + by,
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// `[-r, r]` for two-sided sequences, `[0, r]` for one-sided ones.
    pub fn ball(radius: u64, sidedness: Sidedness) -> Interval {
        let r = radius as i64;
        match sidedness {
            Sidedness::TwoSided => Interval { lo: -r, hi: r },
            Sidedness::OneSided => Interval { lo: 0, hi: r },
        }
    }
}

/// Random access to the symbols of a (possibly lazily generated) sequence.
pub trait Trajectory {
    fn sidedness(&self) -> Sidedness;

    /// Inclusive coordinate range that can be read.
    fn extent(&self) -> (i64, i64);

    /// Symbol at `coord`, or [`Error::Range`] outside [`Trajectory::extent`].
    fn symbol(&self, coord: i64) -> Result<Symbol>;

    fn covers(&self, lo: i64, hi: i64) -> bool {
        let (a, b) = self.extent();
        a <= lo && hi <= b
    }

    /// Hint that coordinates below `coord` will not be read again.
    fn release(&self, _coord: i64) {}

    /// Whether the symbols at `start, start + 1, ...` spell `word`.
    fn matches(&self, start: i64, word: &[Symbol]) -> Result<bool> {
        for (coord, &want) in (start..).zip(word) {
            if self.symbol(coord)? != want {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn require(&self, lo: i64, hi: i64) -> Result<()> {
        if self.covers(lo, hi) {
            Ok(())
        } else {
            let (have_lo, have_hi) = self.extent();
            Err(Error::Range {
                lo,
                hi,
                have_lo,
                have_hi,
            })
        }
    }
}

/// A finite block of symbols indexed by integer coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolWindow {
    alphabet: Alphabet,
    sidedness: Sidedness,
    start: i64,
    symbols: Vec<Symbol>,
}

impl SymbolWindow {
    pub fn new(
        alphabet: Alphabet,
        sidedness: Sidedness,
        start: i64,
        symbols: Vec<Symbol>,
    ) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Argument("a window needs at least one symbol".into()));
        }
        if sidedness == Sidedness::OneSided && start < 0 {
            return Err(Error::Argument(format!(
                "one-sided window cannot start at negative coordinate {start}"
            )));
        }
        if let Some(pos) = symbols.iter().position(|&s| !alphabet.contains(s)) {
            return Err(Error::Argument(format!(
                "symbol {} at coordinate {} is not in the alphabet {:?}",
                symbols[pos],
                start + pos as i64,
                alphabet
            )));
        }
        Ok(SymbolWindow {
            alphabet,
            sidedness,
            start,
            symbols,
        })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn range(&self) -> Interval {
        Interval {
            lo: self.start,
            hi: self.start + self.symbols.len() as i64 - 1,
        }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn get(&self, coord: i64) -> Option<Symbol> {
        let idx = coord.checked_sub(self.start)?;
        if idx < 0 {
            return None;
        }
        self.symbols.get(idx as usize).copied()
    }

    /// The window seen from `T^t`: new coordinate `i` holds old coordinate
    /// `i + t`. One-sided windows lose whatever would land below zero.
    pub fn shifted(&self, t: i64) -> Result<SymbolWindow> {
        let mut start = self.start - t;
        let mut symbols = self.symbols.as_slice();
        if self.sidedness == Sidedness::OneSided && start < 0 {
            let drop = (-start) as usize;
            if drop >= symbols.len() {
                return Err(Error::Resolution(format!(
                    "shifting by {t} leaves no nonnegative coordinates"
                )));
            }
            symbols = &symbols[drop..];
            start = 0;
        }
        SymbolWindow::new(self.alphabet, self.sidedness, start, symbols.to_vec())
    }

    /// Restriction to `range`, which must lie inside the window.
    pub fn restrict(&self, range: Interval) -> Result<SymbolWindow> {
        self.require(range.lo, range.hi)?;
        let a = (range.lo - self.start) as usize;
        let b = (range.hi - self.start) as usize;
        SymbolWindow::new(
            self.alphabet,
            self.sidedness,
            range.lo,
            self.symbols[a..=b].to_vec(),
        )
    }
}

impl Trajectory for SymbolWindow {
    fn sidedness(&self) -> Sidedness {
        self.sidedness
    }

    fn extent(&self) -> (i64, i64) {
        let r = self.range();
        (r.lo, r.hi)
    }

    fn symbol(&self, coord: i64) -> Result<Symbol> {
        self.get(coord).ok_or_else(|| {
            let r = self.range();
            Error::Range {
                lo: coord,
                hi: coord,
                have_lo: r.lo,
                have_hi: r.hi,
            }
        })
    }
}

/// Symbol constraints `a_l..a_r` on an interval `[l, r]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cylinder {
    interval: Interval,
    symbols: Vec<Symbol>,
}

impl Cylinder {
    pub fn new(interval: Interval, symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.len() as u64 != interval.len() {
            return Err(Error::Argument(format!(
                "cylinder on [{}, {}] needs {} constraints, got {}",
                interval.lo,
                interval.hi,
                interval.len(),
                symbols.len()
            )));
        }
        Ok(Cylinder { interval, symbols })
    }

    /// `{ω : ω_j = ω̃_j for j in the ball of the given radius}`.
    pub fn around(target: &SymbolWindow, radius: u64) -> Result<Self> {
        let ball = Interval::ball(radius, target.sidedness());
        let sub = target.restrict(ball).map_err(|_| {
            Error::Resolution(format!(
                "target window {:?} does not cover the radius-{radius} ball",
                target.range()
            ))
        })?;
        Cylinder::new(ball, sub.symbols)
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// Constraint at an absolute coordinate of the interval.
    pub fn symbol_at(&self, coord: i64) -> Option<Symbol> {
        if !self.interval.contains(coord) {
            return None;
        }
        Some(self.symbols[(coord - self.interval.lo) as usize])
    }

    /// `(coordinate, symbol)` pairs.
    pub fn constraints(&self) -> impl Iterator<Item = (i64, Symbol)> + '_ {
        (self.interval.lo..=self.interval.hi).zip(self.symbols.iter().copied())
    }
}

/// Scale of the metric `d(ω, ω̃) = exp(-γ m)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceParams {
    gamma: f64,
}

impl DistanceParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Argument(format!(
                "gamma must be positive and finite, got {gamma}"
            )));
        }
        Ok(DistanceParams { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Outcome of a disagreement search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disagreement {
    At(u64),
    /// The two sequences agree on every coordinate both of them expose.
    Exhausted,
}

/// Is `T^shift ω` in the cylinder?
pub fn cylinder_contains<T: Trajectory + ?Sized>(
    traj: &T,
    cyl: &Cylinder,
    shift: i64,
) -> Result<bool> {
    if shift < 0 {
        return Err(Error::Argument(format!(
            "shift power must be nonnegative, got {shift}"
        )));
    }
    let iv = cyl.interval.shifted(shift);
    traj.require(iv.lo, iv.hi)?;
    traj.matches(iv.lo, cyl.symbols())
}

/// Smallest `i >= 0` with `ω_{offset+i} != ω̃_i` or `ω_{offset-i} != ω̃_{-i}`
/// (only the first clause for one-sided sequences).
///
/// Stops with [`Disagreement::Exhausted`] as soon as a coordinate needed to
/// confirm agreement is missing from either side.
pub fn disagreement_radius_at<T: Trajectory + ?Sized>(
    traj: &T,
    offset: i64,
    target: &SymbolWindow,
) -> Result<Disagreement> {
    if traj.sidedness() != target.sidedness() {
        return Err(Error::Argument("sequences must share sidedness".into()));
    }
    let (tlo, thi) = traj.extent();
    let tr = target.range();
    let known = |i: i64| tr.contains(i) && tlo <= offset + i && offset + i <= thi;
    let two_sided = target.sidedness() == Sidedness::TwoSided;
    let mut i: i64 = 0;
    loop {
        let pos = known(i);
        if pos && traj.symbol(offset + i)? != target.symbols[(i - tr.lo) as usize] {
            return Ok(Disagreement::At(i as u64));
        }
        if !two_sided {
            if !pos {
                return Ok(Disagreement::Exhausted);
            }
        } else {
            let neg = known(-i);
            if neg && traj.symbol(offset - i)? != target.symbols[(-i - tr.lo) as usize] {
                return Ok(Disagreement::At(i as u64));
            }
            if !(pos && neg) {
                return Ok(Disagreement::Exhausted);
            }
        }
        i += 1;
    }
}

/// Disagreement radius of two windows of the same sidedness.
pub fn disagreement_radius(w1: &SymbolWindow, w2: &SymbolWindow) -> Result<Disagreement> {
    if w1.sidedness != w2.sidedness {
        return Err(Error::Argument("windows must share sidedness".into()));
    }
    if w1.range().intersect(&w2.range()).is_none() {
        return Err(Error::Argument("windows have no common coordinates".into()));
    }
    disagreement_radius_at(w1, 0, w2)
}

/// `Φ = -ln d = γ · radius`, defined only for a resolved radius.
pub fn phi_from_radius(radius: Disagreement, params: &DistanceParams) -> Result<f64> {
    match radius {
        Disagreement::At(m) => Ok(params.gamma * m as f64),
        Disagreement::Exhausted => Err(Error::Resolution(
            "windows agree on their whole common range; supply wider windows".into(),
        )),
    }
}

pub fn log_distance_phi(
    w1: &SymbolWindow,
    w2: &SymbolWindow,
    params: &DistanceParams,
) -> Result<f64> {
    phi_from_radius(disagreement_radius(w1, w2)?, params)
}
