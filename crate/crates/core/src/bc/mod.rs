//! Nonconventional sums `S_N = Σ_n Π_i 1_{C_n^{(i)}} ∘ T^{q_i(n)}` and
//! `E_N = Σ_n Π_i P(C_n^{(i)})`, with the diagnostics used to check that
//! their ratio tends to one.

mod diagnostics;
mod schedule;
mod stream;

use serde::{Deserialize, Serialize};

pub use diagnostics::{
    envelope_check, envelope_reference, expected_intersection_sum, intersection_vs_product_gap,
    pair_correlation_sum, verify_nesting, verify_nesting_intervals, EnvelopeSummary, NestingMode,
    NestingVerdict, PairCorrelation,
};
pub use schedule::{
    schedule_radius, CylinderSchedule, PreparedSchedule, ScheduleEntry, ScheduleKind,
};
pub use stream::StreamBuffer;

use crate::error::{Error, Result};
use crate::index::IndexFamily;
use crate::processes::{CounterSource, ProcessModel, RngSeed};
use crate::symbolic::{cylinder_contains, Cylinder, Sidedness, SymbolWindow, Trajectory};

/// Default bound on the number of symbols streamed for one run.
pub const DEFAULT_COORDINATE_BUDGET: u64 = 1_000_000_000;

/// `⌈1.2^j⌉` for `j = 0, 1, ...` together with the powers of ten below
/// `n_max`, sorted and deduplicated, then `n_max`.
pub fn checkpoints(n_max: u64) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    let mut x = 1.0f64;
    while x.ceil() < n_max as f64 {
        out.push(x.ceil() as u64);
        x *= 1.2;
    }
    let mut p = 10u64;
    while p < n_max {
        out.push(p);
        p = p.saturating_mul(10);
    }
    out.sort_unstable();
    out.dedup();
    if n_max > 0 {
        out.push(n_max);
    }
    out
}

/// `S_N` sampled at checkpoints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumTrace {
    pub checkpoints: Vec<(u64, u64)>,
}

impl SumTrace {
    fn from_hits(hits: impl Iterator<Item = bool>, cps: &[u64]) -> Self {
        let mut out = Vec::with_capacity(cps.len());
        let mut s = 0u64;
        let mut next = cps.iter().peekable();
        for (idx, hit) in hits.enumerate() {
            let n = idx as u64 + 1;
            s += hit as u64;
            while next.peek() == Some(&&n) {
                out.push((n, s));
                next.next();
            }
        }
        SumTrace { checkpoints: out }
    }

    pub fn last(&self) -> u64 {
        self.checkpoints.last().map(|c| c.1).unwrap_or(0)
    }

    /// `S_n` at a checkpoint.
    pub fn at(&self, n: u64) -> Option<u64> {
        self.checkpoints.iter().find(|c| c.0 == n).map(|c| c.1)
    }
}

fn check_lanes(schedule: &PreparedSchedule, family: &IndexFamily) -> Result<()> {
    if schedule.ell() != family.ell() {
        return Err(Error::Argument(format!(
            "schedule has {} lanes but the family has {}",
            schedule.ell(),
            family.ell()
        )));
    }
    Ok(())
}

/// `Π_i P(C^{(i)})` for every distinct entry.
fn entry_products(model: &ProcessModel, schedule: &PreparedSchedule) -> Result<Vec<f64>> {
    schedule
        .distinct_entries()
        .iter()
        .map(|e| {
            e.cylinders()
                .iter()
                .map(|c| model.cylinder_probability(c))
                .try_fold(1.0, |acc, p| p.map(|p| acc * p))
        })
        .collect()
}

/// `E_N` at each checkpoint.
pub fn expected_trace(
    model: &ProcessModel,
    schedule: &PreparedSchedule,
    cps: &[u64],
) -> Result<Vec<f64>> {
    let products = entry_products(model, schedule)?;
    let mut out = Vec::with_capacity(cps.len());
    let mut next = cps.iter().peekable();
    let mut e = 0.0;
    for n in 1..=schedule.n_max() {
        e += products[schedule.key(n)];
        while next.peek() == Some(&&n) {
            out.push(e);
            next.next();
        }
    }
    Ok(out)
}

/// `E_N = Σ_{n<=N} Π_i P(C_n^{(i)})`.
pub fn expected_sum_shift(
    model: &ProcessModel,
    schedule: &CylinderSchedule,
    n_max: u64,
) -> Result<f64> {
    let prepared = schedule.prepare(n_max)?;
    Ok(expected_trace(model, &prepared, &[n_max])?[0])
}

/// Coordinates `[lo, hi]` read while evaluating `n = 1..=N`.
pub fn required_range(schedule: &PreparedSchedule, family: &IndexFamily) -> Result<(i64, i64)> {
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for n in 1..=schedule.n_max() {
        let iv = schedule.entry(n).interval();
        for lane in 0..family.ell() {
            let q = family.coordinate(lane, n)?;
            lo = lo.min(q + iv.lo);
            hi = hi.max(q.checked_add(iv.hi).ok_or_else(|| {
                Error::Resource(format!(
                    "coordinate q_{}({n}) + {} overflows",
                    lane + 1,
                    iv.hi
                ))
            })?);
        }
    }
    Ok((lo, hi))
}

#[inline]
fn hit_at<T: Trajectory + ?Sized>(
    traj: &T,
    cylinders: &[Cylinder],
    family: &IndexFamily,
    n: u64,
) -> Result<bool> {
    for (lane, cyl) in cylinders.iter().enumerate() {
        if !cylinder_contains(traj, cyl, family.coordinate(lane, n)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `S_N` over a random-access trajectory.
pub fn nonconventional_sum_on<T: Trajectory + ?Sized>(
    traj: &T,
    schedule: &PreparedSchedule,
    family: &IndexFamily,
    cps: &[u64],
) -> Result<SumTrace> {
    check_lanes(schedule, family)?;
    let mut err = None;
    let hits = (1..=schedule.n_max()).map(|n| {
        match hit_at(traj, schedule.entry(n).cylinders(), family, n) {
            Ok(h) => h,
            Err(e) => {
                err.get_or_insert(e);
                false
            }
        }
    });
    let trace = SumTrace::from_hits(hits, cps);
    match err {
        Some(e) => Err(e),
        None => Ok(trace),
    }
}

/// `S_N` over a sampled window; the window must cover every coordinate the
/// sum reads.
pub fn nonconventional_sum_shift(
    window: &SymbolWindow,
    schedule: &CylinderSchedule,
    family: &IndexFamily,
    n_max: u64,
) -> Result<SumTrace> {
    let prepared = schedule.prepare(n_max)?;
    check_lanes(&prepared, family)?;
    let (lo, hi) = required_range(&prepared, family)?;
    if !window.covers(lo, hi) {
        let r = window.range();
        return Err(Error::Resolution(format!(
            "S_N for N = {n_max} reads coordinates [{lo}, {hi}] but the window covers [{}, {}]",
            r.lo, r.hi
        )));
    }
    nonconventional_sum_on(window, &prepared, family, &checkpoints(n_max))
}

/// `S_N` for laws without random access: evaluation points are visited in
/// coordinate order while a single forward stream supplies the symbols, so
/// only the span between concurrently open points is resident.
pub fn nonconventional_sum_streamed(
    model: &ProcessModel,
    sidedness: Sidedness,
    seed: RngSeed,
    schedule: &PreparedSchedule,
    family: &IndexFamily,
    budget: u64,
    cps: &[u64],
) -> Result<SumTrace> {
    check_lanes(schedule, family)?;
    let (lo, hi) = required_range(schedule, family)?;
    let span = (hi as i128 - lo as i128 + 1) as u128;
    if span > budget as u128 {
        return Err(Error::Resource(format!(
            "N = {} needs {span} streamed symbols on [{lo}, {hi}], over the budget of {budget}",
            schedule.n_max()
        )));
    }
    let n_max = schedule.n_max();
    if n_max > u32::MAX as u64 {
        return Err(Error::Resource(format!(
            "N = {n_max} is too large to stream"
        )));
    }
    let ell = family.ell();
    // (start coordinate, n, lane)
    let mut points: Vec<(i64, u32, u8)> = Vec::with_capacity(n_max as usize * ell);
    for n in 1..=n_max {
        let iv = schedule.entry(n).interval();
        for lane in 0..ell {
            points.push((family.coordinate(lane, n)? + iv.lo, n as u32, lane as u8));
        }
    }
    points.sort_unstable();
    let stream = StreamBuffer::new(model, sidedness, lo, seed)?;
    let mut lanes_hit = vec![0u8; n_max as usize + 1];
    for &(start, n, lane) in &points {
        stream.release(start);
        let n = n as u64;
        let cyl = &schedule.entry(n).cylinders()[lane as usize];
        if cylinder_contains(&stream, cyl, start - cyl.interval().lo)? {
            lanes_hit[n as usize] += 1;
        }
    }
    Ok(SumTrace::from_hits(
        lanes_hit[1..].iter().map(|&h| h as usize == ell),
        cps,
    ))
}

/// An indicator sequence `1_{Γ_j}`, `j >= 0`.
pub trait IndicatorTrace {
    fn indicator(&self, j: u64) -> Result<bool>;
}

impl IndicatorTrace for [bool] {
    fn indicator(&self, j: u64) -> Result<bool> {
        self.get(j as usize).copied().ok_or(Error::Range {
            lo: j as i64,
            hi: j as i64,
            have_lo: 0,
            have_hi: self.len() as i64 - 1,
        })
    }
}

/// `Γ_j = {T^j ω ∈ C}` on a trajectory.
pub struct CylinderEvents<'a, T: ?Sized> {
    pub trajectory: &'a T,
    pub cylinder: &'a Cylinder,
}

impl<T: Trajectory + ?Sized> IndicatorTrace for CylinderEvents<'_, T> {
    fn indicator(&self, j: u64) -> Result<bool> {
        cylinder_contains(self.trajectory, self.cylinder, j as i64)
    }
}

/// `S_N = Σ_{n<=N} Π_i 1_{Γ_{q_i(n)}}`.
pub fn nonconventional_sum_events<I: IndicatorTrace + ?Sized>(
    trace: &I,
    family: &IndexFamily,
    n_max: u64,
) -> Result<SumTrace> {
    if n_max == 0 {
        return Err(Error::Argument("N must be positive".into()));
    }
    let mut err = None;
    let hits = (1..=n_max).map(|n| {
        let mut all = true;
        for lane in 0..family.ell() {
            let r = family
                .coordinate(lane, n)
                .and_then(|j| trace.indicator(j as u64));
            match r {
                Ok(true) => {}
                Ok(false) => {
                    all = false;
                    break;
                }
                Err(e) => {
                    err.get_or_insert(e);
                    all = false;
                    break;
                }
            }
        }
        all
    });
    let trace = SumTrace::from_hits(hits, &checkpoints(n_max));
    match err {
        Some(e) => Err(e),
        None => Ok(trace),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRow {
    pub n: u64,
    pub s: u64,
    pub e: f64,
    pub ratio: f64,
    pub gap: f64,
    /// `E^{1/2} (ln E)^{3/2+ε}`, absent while `E <= e`.
    pub envelope_ref: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<CheckpointRow>,
    pub epsilon: f64,
    pub seed: RngSeed,
}

impl ConvergenceReport {
    pub fn new(s: &SumTrace, e: &[f64], epsilon: f64, seed: RngSeed) -> Result<Self> {
        if s.checkpoints.len() != e.len() {
            return Err(Error::Invariant(
                "S and E traces have different checkpoints".into(),
            ));
        }
        let rows = s
            .checkpoints
            .iter()
            .zip(e)
            .map(|(&(n, s), &e)| CheckpointRow {
                n,
                s,
                e,
                ratio: s as f64 / e,
                gap: (s as f64 - e).abs(),
                envelope_ref: envelope_reference(e, epsilon),
            })
            .collect();
        Ok(ConvergenceReport {
            rows,
            epsilon,
            seed,
        })
    }

    pub fn last(&self) -> &CheckpointRow {
        self.rows
            .last()
            .expect("a report has at least one checkpoint")
    }

    pub fn row(&self, n: u64) -> Option<&CheckpointRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub epsilon: f64,
    pub coordinate_budget: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            epsilon: 0.5,
            coordinate_budget: DEFAULT_COORDINATE_BUDGET,
        }
    }
}

/// One sampled run of the shift setup: `S_N` on a fresh trajectory, `E_N`
/// exactly, at geometric checkpoints.
pub fn run_shift(
    model: &ProcessModel,
    sidedness: Sidedness,
    schedule: &CylinderSchedule,
    family: &IndexFamily,
    n_max: u64,
    seed: RngSeed,
    options: RunOptions,
) -> Result<ConvergenceReport> {
    if options.epsilon.is_nan() || options.epsilon <= 0.0 {
        return Err(Error::Argument("epsilon must be positive".into()));
    }
    model.check_sidedness(sidedness)?;
    let prepared = schedule.prepare(n_max)?;
    check_lanes(&prepared, family)?;
    let cps = checkpoints(n_max);
    let s = if model.is_iid() {
        let src = CounterSource::new(model, sidedness, seed)?;
        nonconventional_sum_on(&src, &prepared, family, &cps)?
    } else {
        nonconventional_sum_streamed(
            model,
            sidedness,
            seed,
            &prepared,
            family,
            options.coordinate_budget,
            &cps,
        )?
    };
    let e = expected_trace(model, &prepared, &cps)?;
    ConvergenceReport::new(&s, &e, options.epsilon, seed)
}
