use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::processes::{sample_window, ProcessModel, RngSeed};
use crate::symbolic::{Cylinder, Interval, Sidedness, SymbolWindow, Trajectory};

/// The cylinders `C_n^{(1)}, ..., C_n^{(ℓ)}`, all defined on `Λ_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    interval: Interval,
    cylinders: Vec<Cylinder>,
}

impl ScheduleEntry {
    pub fn new(cylinders: Vec<Cylinder>) -> Result<Self> {
        let first = cylinders.first().ok_or_else(|| {
            Error::Argument("a schedule entry needs at least one cylinder".into())
        })?;
        let interval = first.interval();
        if let Some(bad) = cylinders.iter().find(|c| c.interval() != interval) {
            return Err(Error::Argument(format!(
                "cylinders of one entry must share their interval: [{}, {}] vs [{}, {}]",
                interval.lo,
                interval.hi,
                bad.interval().lo,
                bad.interval().hi
            )));
        }
        Ok(ScheduleEntry {
            interval,
            cylinders,
        })
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn cylinders(&self) -> &[Cylinder] {
        &self.cylinders
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleKind {
    /// The same cylinders for every `n`.
    Fixed { entry: ScheduleEntry },
    /// `C_n^{(i)}` is the radius-`⌊β ln n⌋` cylinder around target `i`.
    Radius {
        beta: f64,
        targets: Vec<SymbolWindow>,
    },
    /// `entries[n - 1]` for `n = 1, 2, ...`.
    Explicit { entries: Vec<ScheduleEntry> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderSchedule {
    kind: ScheduleKind,
}

/// `⌊β ln n⌋`.
pub fn schedule_radius(beta: f64, n: u64) -> u64 {
    (beta * (n as f64).ln()).floor().max(0.0) as u64
}

impl CylinderSchedule {
    pub fn fixed(cylinders: Vec<Cylinder>) -> Result<Self> {
        Ok(CylinderSchedule {
            kind: ScheduleKind::Fixed {
                entry: ScheduleEntry::new(cylinders)?,
            },
        })
    }

    /// One cylinder used by all `ell` lanes.
    pub fn fixed_shared(cylinder: Cylinder, ell: usize) -> Result<Self> {
        if ell == 0 {
            return Err(Error::Argument("ℓ must be positive".into()));
        }
        Self::fixed(vec![cylinder; ell])
    }

    pub fn radius(beta: f64, targets: Vec<SymbolWindow>) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Argument(format!(
                "beta must be positive and finite, got {beta}"
            )));
        }
        let first = targets
            .first()
            .ok_or_else(|| Error::Argument("a radius schedule needs at least one target".into()))?;
        if targets.iter().any(|t| t.sidedness() != first.sidedness()) {
            return Err(Error::Argument("targets must share sidedness".into()));
        }
        Ok(CylinderSchedule {
            kind: ScheduleKind::Radius { beta, targets },
        })
    }

    /// Radius schedule with `ell` targets sampled from `model`, wide enough
    /// for `n <= n_max`. Target `i` uses stream `seed.stream + i`.
    pub fn sampled_radius(
        model: &ProcessModel,
        sidedness: Sidedness,
        beta: f64,
        ell: usize,
        n_max: u64,
        seed: RngSeed,
    ) -> Result<Self> {
        let ball = Interval::ball(schedule_radius(beta, n_max.max(1)), sidedness);
        let targets = (0..ell as u64)
            .map(|i| {
                sample_window(
                    model,
                    ball,
                    sidedness,
                    RngSeed::new(seed.seed, seed.stream + i),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::radius(beta, targets)
    }

    pub fn explicit(entries: Vec<ScheduleEntry>) -> Result<Self> {
        let ell = entries
            .first()
            .ok_or_else(|| Error::Argument("an explicit schedule needs at least one entry".into()))?
            .cylinders
            .len();
        if entries.iter().any(|e| e.cylinders.len() != ell) {
            return Err(Error::Argument("every entry must carry ℓ cylinders".into()));
        }
        Ok(CylinderSchedule {
            kind: ScheduleKind::Explicit { entries },
        })
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn ell(&self) -> usize {
        match &self.kind {
            ScheduleKind::Fixed { entry } => entry.cylinders.len(),
            ScheduleKind::Radius { targets, .. } => targets.len(),
            ScheduleKind::Explicit { entries } => entries[0].cylinders.len(),
        }
    }

    /// Resolves the schedule on `1..=n_max`, building each distinct entry
    /// once.
    pub fn prepare(&self, n_max: u64) -> Result<PreparedSchedule> {
        if n_max == 0 {
            return Err(Error::Argument("N must be positive".into()));
        }
        let (entries, keying) = match &self.kind {
            ScheduleKind::Fixed { entry } => (vec![entry.clone()], Keying::Constant),
            ScheduleKind::Radius { beta, targets } => {
                let r_max = schedule_radius(*beta, n_max);
                let entries = (0..=r_max)
                    .map(|r| {
                        ScheduleEntry::new(
                            targets
                                .iter()
                                .map(|t| Cylinder::around(t, r))
                                .collect::<Result<_>>()?,
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                (entries, Keying::Radius(*beta))
            }
            ScheduleKind::Explicit { entries } => {
                if (entries.len() as u64) < n_max {
                    return Err(Error::Argument(format!(
                        "explicit schedule defines n = 1..={} but N = {n_max}",
                        entries.len()
                    )));
                }
                (entries[..n_max as usize].to_vec(), Keying::PerIndex)
            }
        };
        Ok(PreparedSchedule {
            ell: self.ell(),
            n_max,
            entries,
            keying,
        })
    }
}

#[derive(Clone, Copy, Debug)]
enum Keying {
    Constant,
    Radius(f64),
    PerIndex,
}

/// A schedule resolved on `1..=N`.
#[derive(Clone, Debug)]
pub struct PreparedSchedule {
    ell: usize,
    n_max: u64,
    entries: Vec<ScheduleEntry>,
    keying: Keying,
}

impl PreparedSchedule {
    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// Index of the distinct entry used at `n`; equal keys mean equal
    /// cylinders.
    #[inline]
    pub fn key(&self, n: u64) -> usize {
        match self.keying {
            Keying::Constant => 0,
            Keying::Radius(beta) => schedule_radius(beta, n) as usize,
            Keying::PerIndex => (n - 1) as usize,
        }
    }

    #[inline]
    pub fn entry(&self, n: u64) -> &ScheduleEntry {
        &self.entries[self.key(n)]
    }

    pub fn distinct_entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }
}
