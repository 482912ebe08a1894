use serde::{Deserialize, Serialize};

use super::schedule::{CylinderSchedule, PreparedSchedule};
use super::{check_lanes, entry_products, ConvergenceReport};
use crate::error::{Error, Result};
use crate::index::IndexFamily;
use crate::processes::{PowerCache, ProcessModel};
use crate::symbolic::{Interval, Symbol};

/// Largest number of indices accepted by [`pair_correlation_sum`].
pub const PAIR_CORRELATION_LIMIT: u64 = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NestingMode {
    /// `r_m < r_n + D` for all `m < n`.
    RightNested,
    /// `[l_m, r_m] ⊂ (l_n − D, r_n + D)` for all `m < n`.
    Nested,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestingVerdict {
    pub mode: NestingMode,
    pub d: u64,
    pub holds: bool,
    /// First violating `(m, n)`: smallest `n`, then smallest `m`.
    pub witness: Option<(u64, u64)>,
}

/// Checks nesting of `Λ_1, Λ_2, ...`. Running extremes of the earlier
/// intervals make this linear in the number of intervals.
pub fn verify_nesting_intervals(
    intervals: impl IntoIterator<Item = Interval>,
    mode: NestingMode,
    d: u64,
) -> Result<NestingVerdict> {
    if d == 0 {
        return Err(Error::Argument("D must be positive".into()));
    }
    let dd = d as i128;
    let ivs: Vec<Interval> = intervals.into_iter().collect();
    let violates = |earlier: &Interval, later: &Interval| {
        earlier.hi as i128 >= later.hi as i128 + dd
            || (mode == NestingMode::Nested && earlier.lo as i128 <= later.lo as i128 - dd)
    };
    let mut max_hi = i64::MIN;
    let mut min_lo = i64::MAX;
    for (idx, iv) in ivs.iter().enumerate() {
        let extremes = Interval {
            lo: min_lo,
            hi: max_hi,
        };
        if idx > 0 && violates(&extremes, iv) {
            let m = ivs[..idx].iter().position(|e| violates(e, iv)).unwrap_or(0);
            return Ok(NestingVerdict {
                mode,
                d,
                holds: false,
                witness: Some((m as u64 + 1, idx as u64 + 1)),
            });
        }
        max_hi = max_hi.max(iv.hi);
        min_lo = min_lo.min(iv.lo);
    }
    Ok(NestingVerdict {
        mode,
        d,
        holds: true,
        witness: None,
    })
}

pub fn verify_nesting(
    schedule: &CylinderSchedule,
    mode: NestingMode,
    d: u64,
    n_max: u64,
) -> Result<NestingVerdict> {
    let prepared = schedule.prepare(n_max)?;
    verify_nesting_intervals((1..=n_max).map(|n| prepared.entry(n).interval()), mode, d)
}

/// `E^{1/2} (ln E)^{3/2+ε}` for `E > e`.
pub fn envelope_reference(e: f64, epsilon: f64) -> Option<f64> {
    if e > std::f64::consts::E {
        Some(e.sqrt() * e.ln().powf(1.5 + epsilon))
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSummary {
    /// Checkpoints with `E_N > e`.
    pub evaluated: usize,
    pub violations: usize,
    pub fraction: f64,
}

/// Fraction of checkpoints with `|S_N − E_N| > C E^{1/2} (ln E)^{3/2+ε}`,
/// among those where `E_N > e`.
pub fn envelope_check(report: &ConvergenceReport, c: f64, epsilon: f64) -> Result<EnvelopeSummary> {
    if !(c > 0.0 && epsilon > 0.0) {
        return Err(Error::Argument("C and epsilon must be positive".into()));
    }
    let mut evaluated = 0;
    let mut violations = 0;
    for row in &report.rows {
        if let Some(env) = envelope_reference(row.e, epsilon) {
            evaluated += 1;
            if (row.s as f64 - row.e).abs() > c * env {
                violations += 1;
            }
        }
    }
    let fraction = if evaluated == 0 {
        0.0
    } else {
        violations as f64 / evaluated as f64
    };
    Ok(EnvelopeSummary {
        evaluated,
        violations,
        fraction,
    })
}

/// Constraints of `Γ_n = ∩_i T^{−q_i(n)} C_n^{(i)}`.
fn gamma_constraints(
    schedule: &PreparedSchedule,
    family: &IndexFamily,
    n: u64,
) -> Result<Vec<(i64, Symbol)>> {
    let mut out = Vec::new();
    for (lane, cyl) in schedule.entry(n).cylinders().iter().enumerate() {
        let q = family.coordinate(lane, n)?;
        out.extend(cyl.constraints().map(|(j, a)| (q + j, a)));
    }
    Ok(out)
}

/// `Σ_{n<=N} P(Γ_n)`, the mean of `S_N`.
pub fn expected_intersection_sum(
    model: &ProcessModel,
    schedule: &CylinderSchedule,
    family: &IndexFamily,
    n_max: u64,
) -> Result<f64> {
    let prepared = schedule.prepare(n_max)?;
    check_lanes(&prepared, family)?;
    let mut cache = model.as_markov().map(PowerCache::new);
    let mut total = 0.0;
    for n in 1..=n_max {
        total +=
            model.joint_with_cache(&gamma_constraints(&prepared, family, n)?, cache.as_mut())?;
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelation {
    /// `Σ_{m,n=M}^N (P(Γ_m ∩ Γ_n) − P(Γ_m) P(Γ_n))`.
    pub lhs: f64,
    /// `Σ_{n=M}^N P(Γ_n)`.
    pub rhs: f64,
    pub ratio: f64,
}

pub fn pair_correlation_sum(
    model: &ProcessModel,
    schedule: &CylinderSchedule,
    family: &IndexFamily,
    m_lo: u64,
    n_max: u64,
) -> Result<PairCorrelation> {
    if m_lo == 0 || m_lo > n_max {
        return Err(Error::Argument(format!(
            "need 1 <= M <= N, got M = {m_lo}, N = {n_max}"
        )));
    }
    let count = n_max - m_lo + 1;
    if count > PAIR_CORRELATION_LIMIT {
        return Err(Error::Resource(format!(
            "{count} indices exceed the pair-correlation limit of {PAIR_CORRELATION_LIMIT}"
        )));
    }
    let prepared = schedule.prepare(n_max)?;
    check_lanes(&prepared, family)?;
    let mut cache = model.as_markov().map(PowerCache::new);
    let gammas: Vec<Vec<(i64, Symbol)>> = (m_lo..=n_max)
        .map(|n| gamma_constraints(&prepared, family, n))
        .collect::<Result<_>>()?;
    let probs: Vec<f64> = gammas
        .iter()
        .map(|g| model.joint_with_cache(g, cache.as_mut()))
        .collect::<Result<_>>()?;
    let mut lhs = 0.0;
    let mut merged = Vec::new();
    for a in 0..gammas.len() {
        lhs += probs[a] - probs[a] * probs[a];
        for b in a + 1..gammas.len() {
            merged.clear();
            merged.extend_from_slice(&gammas[a]);
            merged.extend_from_slice(&gammas[b]);
            let joint = model.joint_with_cache(&merged, cache.as_mut())?;
            lhs += 2.0 * (joint - probs[a] * probs[b]);
        }
    }
    let rhs: f64 = probs.iter().sum();
    Ok(PairCorrelation {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

/// Partial sums `Σ_{n<=k} |P(∩_i T^{−q_i(n)} C_n^{(i)}) − Π_i P(C_n^{(i)})|`
/// for `k = 1..=N`.
pub fn intersection_vs_product_gap(
    model: &ProcessModel,
    schedule: &CylinderSchedule,
    family: &IndexFamily,
    n_max: u64,
) -> Result<Vec<f64>> {
    if family.ell() < 2 {
        return Err(Error::Argument("the intersection gap needs ℓ >= 2".into()));
    }
    let prepared = schedule.prepare(n_max)?;
    check_lanes(&prepared, family)?;
    let mut cache = model.as_markov().map(PowerCache::new);
    let products = entry_products(model, &prepared)?;
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let joint =
            model.joint_with_cache(&gamma_constraints(&prepared, family, n)?, cache.as_mut())?;
        acc += (joint - products[prepared.key(n)]).abs();
        out.push(acc);
    }
    Ok(out)
}
