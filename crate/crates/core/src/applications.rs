//! Entropy, the maximal log-distance statistic `M_N` and multiple hitting
//! times of shrinking cylinders.
//!
//! With `Φ = γ m` where `m` is the first disagreement radius, `ω` lies in the
//! radius-`n` cylinder around `ω̃` exactly when `m >= n + 1`. Hence for
//! `ℓ = 1`, `M_N >= γ (n + 1)` if and only if `τ_{C_n(ω̃)} <= N`.

use serde::{Deserialize, Serialize};

use crate::bc::{checkpoints, StreamBuffer};
use crate::error::{Error, Result};
use crate::index::IndexFamily;
use crate::processes::{sample_window, CounterSource, ProcessModel, RngSeed};
use crate::symbolic::{
    disagreement_radius_at, Cylinder, Disagreement, DistanceParams, Interval, Sidedness, Symbol,
    SymbolWindow, Trajectory,
};

/// Streams per replicate; role 0 is `ω`, roles `1..=ℓ` are the targets.
pub const STREAMS_PER_REPLICATE: u64 = 16;

pub fn replicate_seed(base: u64, replicate: u64, role: u64) -> RngSeed {
    RngSeed::new(base, replicate * STREAMS_PER_REPLICATE + role)
}

/// Replicate `index` of a run with base seed `base_seed`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Replicate {
    pub base_seed: u64,
    pub index: u64,
}

impl Replicate {
    pub fn new(base_seed: u64, index: u64) -> Self {
        Replicate { base_seed, index }
    }

    pub fn seed(&self, role: u64) -> RngSeed {
        replicate_seed(self.base_seed, self.index, role)
    }
}

/// Random-access trajectory for i.i.d. laws, forward stream otherwise.
#[allow(clippy::large_enum_variant)]
pub enum Source<'m> {
    Counter(CounterSource<'m>),
    Stream(StreamBuffer<'m>),
}

impl<'m> Source<'m> {
    /// Streams start at `start` (clamped to 0 for one-sided sequences).
    pub fn new(
        model: &'m ProcessModel,
        sidedness: Sidedness,
        start: i64,
        seed: RngSeed,
    ) -> Result<Self> {
        model.check_sidedness(sidedness)?;
        if model.is_iid() {
            Ok(Source::Counter(CounterSource::new(model, sidedness, seed)?))
        } else {
            let start = if sidedness == Sidedness::OneSided {
                start.max(0)
            } else {
                start
            };
            Ok(Source::Stream(StreamBuffer::new(
                model, sidedness, start, seed,
            )?))
        }
    }
}

impl Trajectory for Source<'_> {
    fn sidedness(&self) -> Sidedness {
        match self {
            Source::Counter(c) => c.sidedness(),
            Source::Stream(s) => s.sidedness(),
        }
    }

    fn extent(&self) -> (i64, i64) {
        match self {
            Source::Counter(c) => c.extent(),
            Source::Stream(s) => s.extent(),
        }
    }

    #[inline]
    fn symbol(&self, coord: i64) -> Result<Symbol> {
        match self {
            Source::Counter(c) => c.symbol(coord),
            Source::Stream(s) => s.symbol(coord),
        }
    }

    #[inline]
    fn matches(&self, start: i64, word: &[Symbol]) -> Result<bool> {
        match self {
            Source::Counter(c) => c.matches(start, word),
            Source::Stream(s) => s.matches(start, word),
        }
    }

    fn release(&self, coord: i64) {
        if let Source::Stream(s) = self {
            s.release(coord);
        }
    }
}

/// Kolmogorov-Sinai entropy in nats.
pub fn entropy_exact(model: &ProcessModel) -> Result<f64> {
    model.entropy_rate()
}

/// `−Σ_a P([a]) ln P([a])`; finite for every supported countable law.
pub fn partition_entropy(model: &ProcessModel) -> Result<f64> {
    match model.alphabet().size() {
        Some(size) => {
            let mut h = 0.0;
            for a in 0..size {
                let p = model.marginal(a)?;
                if p > 0.0 {
                    h -= p * p.ln();
                }
            }
            Ok(h)
        }
        None if model.is_iid() => model.entropy_rate(),
        None => Err(Error::Unsupported(format!(
            "no closed form for the 1-cylinder entropy of the {} model",
            model.name()
        ))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisorMode {
    /// `2r` for cylinders on `[−r, r]`.
    TwoSided,
    /// `r` for cylinders on `[0, r]`.
    OneSided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmbEstimate {
    pub radius: u64,
    pub seed: RngSeed,
    /// `−ln P(C_r(ω̃)) / divisor`.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub exact_h: Option<f64>,
    pub divisor: DivisorMode,
    pub estimates: Vec<SmbEstimate>,
}

impl EntropyReport {
    pub fn mean(&self) -> f64 {
        self.estimates.iter().map(|e| e.value).sum::<f64>() / self.estimates.len() as f64
    }
}

/// `−ln P(C_r(ω̃)) / |Λ|` for one target.
pub fn smb_value(model: &ProcessModel, target: &SymbolWindow, radius: u64) -> Result<f64> {
    let cyl = Cylinder::around(target, radius)?;
    let lp = model.log_cylinder_probability(&cyl)?;
    if !lp.is_finite() {
        return Err(Error::Invariant(format!(
            "radius-{radius} cylinder has probability zero under the {} model",
            model.name()
        )));
    }
    let divisor = match target.sidedness() {
        Sidedness::TwoSided => 2 * radius,
        Sidedness::OneSided => radius,
    };
    Ok(-lp / divisor as f64)
}

/// SMB estimates at one radius over `seeds` independent targets.
pub fn entropy_smb(
    model: &ProcessModel,
    sidedness: Sidedness,
    radius: u64,
    seeds: u64,
    base_seed: u64,
) -> Result<EntropyReport> {
    if radius == 0 || seeds == 0 {
        return Err(Error::Argument(
            "radius and seed count must be positive".into(),
        ));
    }
    model.check_sidedness(sidedness)?;
    let ball = Interval::ball(radius, sidedness);
    let estimates = (0..seeds)
        .map(|rep| {
            let seed = replicate_seed(base_seed, rep, 1);
            let target = sample_window(model, ball, sidedness, seed)?;
            Ok(SmbEstimate {
                radius,
                seed,
                value: smb_value(model, &target, radius)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyReport {
        exact_h: entropy_exact(model).ok(),
        divisor: match sidedness {
            Sidedness::TwoSided => DivisorMode::TwoSided,
            Sidedness::OneSided => DivisorMode::OneSided,
        },
        estimates,
    })
}

fn check_targets(targets: &[SymbolWindow], family: &IndexFamily) -> Result<()> {
    if targets.len() != family.ell() {
        return Err(Error::Argument(format!(
            "{} targets for a family of {} polynomials",
            targets.len(),
            family.ell()
        )));
    }
    Ok(())
}

/// First index from which every `q_i` is non-decreasing, so coordinates
/// below the current evaluation points are never read again.
fn release_start(family: &IndexFamily) -> Option<u64> {
    family
        .polynomials()
        .iter()
        .all(|p| p.leading() > 0)
        .then(|| {
            family
                .polynomials()
                .iter()
                .map(|p| p.monotone_threshold())
                .max()
                .unwrap_or(0)
        })
}

/// Coordinates this far behind the current point are kept for
/// disagreement scans that run to the left.
const RELEASE_MARGIN: i64 = 4096;

/// `M_N` at geometric checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxLogTrace {
    /// `(N, M_N, max_{n<=N} min_i m_i(n))` with `m` the disagreement radius.
    pub checkpoints: Vec<(u64, f64, u64)>,
}

impl MaxLogTrace {
    pub fn at(&self, n: u64) -> Option<f64> {
        self.checkpoints.iter().find(|c| c.0 == n).map(|c| c.1)
    }

    pub fn last(&self) -> f64 {
        self.checkpoints.last().map(|c| c.1).unwrap_or(0.0)
    }
}

/// `M_N = max_{n<=N} min_i Φ_{ω̃^{(i)}}(T^{q_i(n)} ω)`.
pub fn max_log_distance<T: Trajectory + ?Sized>(
    traj: &T,
    targets: &[SymbolWindow],
    family: &IndexFamily,
    n_max: u64,
    params: &DistanceParams,
) -> Result<MaxLogTrace> {
    check_targets(targets, family)?;
    if n_max == 0 {
        return Err(Error::Argument("N must be positive".into()));
    }
    let cps = checkpoints(n_max);
    let mut next = cps.iter().peekable();
    let release_from = release_start(family);
    let mut best: u64 = 0;
    let mut out = Vec::with_capacity(cps.len());
    for n in 1..=n_max {
        let mut m_min = u64::MAX;
        let mut lowest = i64::MAX;
        for (lane, target) in targets.iter().enumerate() {
            let q = family.coordinate(lane, n)?;
            lowest = lowest.min(q);
            match disagreement_radius_at(traj, q, target)? {
                Disagreement::At(m) => m_min = m_min.min(m),
                Disagreement::Exhausted => {
                    return Err(Error::Resolution(format!(
                        "Φ unresolved at n = {n}, i = {}: the sequences agree to the window edge",
                        lane + 1
                    )))
                }
            }
        }
        best = best.max(m_min);
        if release_from.is_some_and(|s| n >= s) {
            traj.release(lowest - RELEASE_MARGIN);
        }
        while next.peek() == Some(&&n) {
            out.push((n, params.gamma() * best as f64, best));
            next.next();
        }
    }
    Ok(MaxLogTrace { checkpoints: out })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPair {
    pub omega: RngSeed,
    pub target: RngSeed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HittingTimeRecord {
    pub radius: u64,
    /// `None` when no hit occurred up to the cap.
    pub tau: Option<u64>,
    pub cap: u64,
    pub seeds: Option<SeedPair>,
}

impl HittingTimeRecord {
    pub fn censored(&self) -> bool {
        self.tau.is_none()
    }
}

/// `τ = min{k >= 1 : T^{q_i(k)} ω ∈ C_n(ω̃) for every i}`, censored at `cap`.
pub fn hitting_time<T: Trajectory + ?Sized>(
    traj: &T,
    target: &SymbolWindow,
    family: &IndexFamily,
    radius: u64,
    cap: u64,
) -> Result<HittingTimeRecord> {
    if cap == 0 {
        return Err(Error::Argument("cap must be positive".into()));
    }
    if traj.sidedness() != target.sidedness() {
        return Err(Error::Argument(
            "trajectory and target must share sidedness".into(),
        ));
    }
    let cyl = Cylinder::around(target, radius)?;
    let iv = cyl.interval();
    let word = cyl.symbols();
    let release_from = release_start(family);
    let ell = family.ell();
    let unresolved = |k: u64, q: i64| {
        Error::Resolution(format!(
            "hitting time at k = {k} needs coordinates [{}, {}] outside the trajectory",
            q + iv.lo,
            q + iv.hi
        ))
    };
    for k in 1..=cap {
        let mut all = true;
        for lane in 0..ell {
            let q = family.coordinate(lane, k)?;
            match traj.matches(q + iv.lo, word) {
                Ok(true) => {}
                Ok(false) => {
                    all = false;
                    break;
                }
                Err(Error::Range { .. }) => return Err(unresolved(k, q)),
                Err(e) => return Err(e),
            }
        }
        if all {
            return Ok(HittingTimeRecord {
                radius,
                tau: Some(k),
                cap,
                seeds: None,
            });
        }
        if k % 1024 == 0 && release_from.is_some_and(|s| k >= s) {
            let lowest = (0..ell)
                .map(|l| family.coordinate(l, k))
                .try_fold(i64::MAX, |m, q| q.map(|q| m.min(q)))?;
            traj.release(lowest + iv.lo);
        }
    }
    Ok(HittingTimeRecord {
        radius,
        tau: None,
        cap,
        seeds: None,
    })
}

/// One sampled `(ω, ω̃)` pair: `ω̃` uses role 1 and `ω` role 0 of the
/// replicate.
pub fn sampled_hitting_time(
    model: &ProcessModel,
    sidedness: Sidedness,
    family: &IndexFamily,
    radius: u64,
    cap: u64,
    replicate: Replicate,
) -> Result<HittingTimeRecord> {
    let seeds = SeedPair {
        omega: replicate.seed(0),
        target: replicate.seed(1),
    };
    let target = sample_window(
        model,
        Interval::ball(radius, sidedness),
        sidedness,
        seeds.target,
    )?;
    let start = -(radius as i64);
    let traj = Source::new(model, sidedness, start, seeds.omega)?;
    let mut rec = hitting_time(&traj, &target, family, radius, cap)?;
    rec.seeds = Some(seeds);
    Ok(rec)
}

/// Sampled `M_N` trace with `ℓ` fresh targets of the given radius.
pub fn sampled_max_log_distance(
    model: &ProcessModel,
    sidedness: Sidedness,
    family: &IndexFamily,
    n_max: u64,
    params: &DistanceParams,
    target_radius: u64,
    replicate: Replicate,
) -> Result<MaxLogTrace> {
    let ball = Interval::ball(target_radius, sidedness);
    let targets = (0..family.ell() as u64)
        .map(|i| sample_window(model, ball, sidedness, replicate.seed(1 + i)))
        .collect::<Result<Vec<_>>>()?;
    let start = -(target_radius as i64) - RELEASE_MARGIN;
    let traj = Source::new(model, sidedness, start, replicate.seed(0))?;
    max_log_distance(&traj, &targets, family, n_max, params)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusSummary {
    pub radius: u64,
    pub uncensored: usize,
    pub censored: usize,
    pub mean_ln_tau: Option<f64>,
    /// Whether the radius entered the fit.
    pub used: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub radii: Vec<RadiusSummary>,
    pub censored: usize,
}

/// Radii with fewer uncensored records are left out of the fit.
pub const MIN_UNCENSORED_PER_RADIUS: usize = 30;

/// Ordinary least squares `y = a + b x`; returns `(b, stderr(b), a)`.
pub fn fit_log_slope(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "a slope with a standard error needs 3 points, got {}",
            points.len()
        )));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "all points share one abscissa".into(),
        ));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Ok((slope, (sse / (k - 2.0) / sxx).sqrt(), intercept))
}

/// Least-squares slope of mean `ln τ` against the radius.
pub fn exponent_fit(records: &[HittingTimeRecord]) -> Result<ExponentFit> {
    let mut radii: Vec<u64> = records.iter().map(|r| r.radius).collect();
    radii.sort_unstable();
    radii.dedup();
    let mut summaries = Vec::with_capacity(radii.len());
    let mut points = Vec::new();
    for &radius in &radii {
        let taus: Vec<u64> = records
            .iter()
            .filter(|r| r.radius == radius)
            .filter_map(|r| r.tau)
            .collect();
        let censored = records
            .iter()
            .filter(|r| r.radius == radius && r.censored())
            .count();
        let mean = (!taus.is_empty())
            .then(|| taus.iter().map(|&t| (t as f64).ln()).sum::<f64>() / taus.len() as f64);
        let used = taus.len() >= MIN_UNCENSORED_PER_RADIUS;
        if let (true, Some(m)) = (used, mean) {
            points.push((radius as f64, m));
        }
        summaries.push(RadiusSummary {
            radius,
            uncensored: taus.len(),
            censored,
            mean_ln_tau: mean,
            used,
        });
    }
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} radii have at least {MIN_UNCENSORED_PER_RADIUS} uncensored records; 3 are needed",
            points.len()
        )));
    }
    let (slope, stderr, intercept) = fit_log_slope(&points)?;
    Ok(ExponentFit {
        slope,
        stderr,
        intercept,
        censored: summaries.iter().map(|s| s.censored).sum(),
        radii: summaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::Alphabet;

    fn coin() -> ProcessModel {
        ProcessModel::iid_finite(vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn exact_entropies() {
        assert_eq!(entropy_exact(&coin()).unwrap(), std::f64::consts::LN_2);
        let m = ProcessModel::markov(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let hand = -(2.0 / 3.0) * (0.9f64 * 0.9f64.ln() + 0.1 * 0.1f64.ln())
            - (1.0 / 3.0) * (0.2f64 * 0.2f64.ln() + 0.8 * 0.8f64.ln());
        assert!((entropy_exact(&m).unwrap() - hand).abs() < 1e-12);
        assert!(matches!(
            entropy_exact(&ProcessModel::gauss_digits()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn geometric_partition_entropy_is_finite() {
        let g = ProcessModel::iid_geometric(0.3).unwrap();
        let h = partition_entropy(&g).unwrap();
        let direct: f64 = (0..2000)
            .map(|a| {
                let p = 0.3 * 0.7f64.powi(a);
                -p * p.ln()
            })
            .sum();
        assert!((h - direct).abs() < 1e-12);
    }

    #[test]
    fn smb_coin_closed_form() {
        let r = entropy_smb(&coin(), Sidedness::TwoSided, 10, 5, 1).unwrap();
        for e in &r.estimates {
            assert!((e.value - 21.0 * std::f64::consts::LN_2 / 20.0).abs() < 1e-12);
        }
    }

    #[test]
    fn immediate_hit_and_censoring() {
        let zeros =
            SymbolWindow::new(Alphabet::Finite(2), Sidedness::TwoSided, -20, vec![0; 200]).unwrap();
        let target =
            SymbolWindow::new(Alphabet::Finite(2), Sidedness::TwoSided, -5, vec![0; 11]).unwrap();
        let q = IndexFamily::identity();
        assert_eq!(
            hitting_time(&zeros, &target, &q, 5, 10).unwrap().tau,
            Some(1)
        );
        let ones =
            SymbolWindow::new(Alphabet::Finite(2), Sidedness::TwoSided, -5, vec![1; 11]).unwrap();
        let rec = hitting_time(&zeros, &ones, &q, 5, 50).unwrap();
        assert!(rec.censored());
        assert_eq!(rec.tau, None);
    }

    #[test]
    fn unresolved_phi_is_an_error() {
        let w =
            SymbolWindow::new(Alphabet::Finite(2), Sidedness::TwoSided, -10, vec![0; 30]).unwrap();
        let t =
            SymbolWindow::new(Alphabet::Finite(2), Sidedness::TwoSided, -4, vec![0; 9]).unwrap();
        let p = DistanceParams::new(1.0).unwrap();
        let r = max_log_distance(&w, &[t], &IndexFamily::identity(), 3, &p);
        assert!(matches!(r, Err(Error::Resolution(msg)) if msg.contains("n = 1")));
    }

    #[test]
    fn synthetic_fit() {
        let pts: Vec<(f64, f64)> = (1..6).map(|n| (n as f64, 2.0 * n as f64)).collect();
        let (slope, se, _) = fit_log_slope(&pts).unwrap();
        assert!((slope - 2.0).abs() < 1e-12);
        assert!(se.abs() < 1e-12);

        let recs: Vec<HittingTimeRecord> = (3..7u64)
            .flat_map(|n| {
                (0..40).map(move |i| HittingTimeRecord {
                    radius: n,
                    tau: (i < 35).then_some(1u64 << (2 * n)),
                    cap: 1 << 40,
                    seeds: None,
                })
            })
            .collect();
        let fit = exponent_fit(&recs).unwrap();
        assert!((fit.slope - 4f64.ln()).abs() < 1e-12);
        assert_eq!(fit.censored, 4 * 5);
        assert!(exponent_fit(&recs[..80]).is_err());
    }
}
