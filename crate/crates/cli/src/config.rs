use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use shiftbc::applications::entropy_exact;
use shiftbc::bc::{CylinderSchedule, ScheduleEntry};
use shiftbc::index::IndexFamily;
use shiftbc::processes::{ProcessModel, RngSeed};
use shiftbc::symbolic::{Cylinder, Interval, Sidedness};
use shiftbc::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Iid { probabilities: Vec<f64> },
    Geometric { p: f64 },
    Markov { rows: Vec<Vec<f64>> },
    Gauss,
}

impl ModelSpec {
    pub fn build(&self) -> Result<ProcessModel> {
        match self {
            ModelSpec::Iid { probabilities } => ProcessModel::iid_finite(probabilities.clone()),
            ModelSpec::Geometric { p } => ProcessModel::iid_geometric(*p),
            ModelSpec::Markov { rows } => ProcessModel::markov(rows),
            ModelSpec::Gauss => Ok(ProcessModel::gauss_digits()),
        }
    }
}

/// Symbols on `[start, start + len − 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderSpec {
    pub start: i64,
    pub symbols: Vec<u64>,
}

impl CylinderSpec {
    pub fn build(&self) -> Result<Cylinder> {
        if self.symbols.is_empty() {
            return Err(Error::Argument(
                "a cylinder needs at least one symbol".into(),
            ));
        }
        let hi = self
            .start
            .checked_add(self.symbols.len() as i64 - 1)
            .ok_or_else(|| Error::Argument("cylinder end overflows".into()))?;
        Cylinder::new(Interval::new(self.start, hi)?, self.symbols.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// `β = (1 − δ) / (2ℓh)`: `E_N → ∞`.
    Lower,
    /// `β = (1 + δ) / (2ℓh)`: `E_N` converges.
    Upper,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    /// One cylinder per lane, or a single cylinder shared by all lanes.
    Fixed { cylinders: Vec<CylinderSpec> },
    /// Radius `⌊β ln n⌋` around targets sampled per replicate.
    Radius { beta: f64 },
    /// Radius schedule with `β` derived from the exact entropy.
    EntropyRadius { delta: f64, bound: Bound },
    /// `entries[n − 1]` lists the lane cylinders used at `n`.
    Explicit { entries: Vec<Vec<CylinderSpec>> },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: PathBuf::from("out"),
            format: Format::Csv,
        }
    }
}

/// Everything a command needs. Commands ignore the fields they do not use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub sidedness: Sidedness,
    /// Coefficient lists, low degree first: `[0, 1]` is `n`.
    pub family: Vec<Vec<i64>>,
    pub schedule: ScheduleSpec,
    /// `N` for `bc-run` and `maxlog`.
    pub n: u64,
    /// Cylinder radii for `hit`; one radius for `entropy`.
    pub radii: Vec<u64>,
    /// Censoring cap for `hit`.
    pub cap: u64,
    pub replicates: u64,
    pub seed: u64,
    pub gamma: f64,
    pub epsilon: f64,
    /// Envelope constant.
    pub c: f64,
    /// Smallest horizon for the index-family checks; runs use at least `N`.
    pub horizon: u64,
    /// Largest gap for `mix`.
    pub k_max: u64,
    /// Cylinder length for the brute-force mixing cross-check.
    pub oracle_max_len: Option<u32>,
    /// Half-width of the sampled targets for `maxlog`.
    pub target_radius: u64,
    /// Declared tolerance on `|S_N/E_N − 1|` for `bc-run`.
    pub tolerance: Option<f64>,
    pub coordinate_budget: u64,
    pub output: OutputSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelSpec::Iid {
                probabilities: vec![0.5, 0.5],
            },
            sidedness: Sidedness::TwoSided,
            family: vec![vec![0, 1]],
            schedule: ScheduleSpec::Fixed {
                cylinders: vec![CylinderSpec {
                    start: 0,
                    symbols: vec![0],
                }],
            },
            n: 10_000,
            radii: vec![4, 5, 6, 7, 8],
            cap: 100_000_000,
            replicates: 1,
            seed: 1,
            gamma: 1.0,
            epsilon: 0.5,
            c: 20.0,
            horizon: 1_000_000,
            k_max: 10,
            oracle_max_len: None,
            target_radius: 128,
            tolerance: None,
            coordinate_budget: shiftbc::bc::DEFAULT_COORDINATE_BUDGET,
            output: OutputSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Argument(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Argument(format!("invalid config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON of every field except `output`, so the
    /// same experiment written to different places hashes the same.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = OutputSpec::default();
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn family(&self) -> Result<IndexFamily> {
        IndexFamily::new(&self.family)
    }

    /// The cylinder schedule of one replicate. Radius targets use roles
    /// `1..=ℓ` of the replicate's streams.
    pub fn schedule(
        &self,
        model: &ProcessModel,
        ell: usize,
        n_max: u64,
        target_seed: RngSeed,
    ) -> Result<CylinderSchedule> {
        match &self.schedule {
            ScheduleSpec::Fixed { cylinders } => {
                let built = cylinders
                    .iter()
                    .map(CylinderSpec::build)
                    .collect::<Result<Vec<_>>>()?;
                match built.len() {
                    1 => CylinderSchedule::fixed_shared(built[0].clone(), ell),
                    k if k == ell => CylinderSchedule::fixed(built),
                    k => Err(Error::Argument(format!(
                        "{k} fixed cylinders for a family of {ell} polynomials"
                    ))),
                }
            }
            ScheduleSpec::Radius { beta } => CylinderSchedule::sampled_radius(
                model,
                self.sidedness,
                *beta,
                ell,
                n_max,
                target_seed,
            ),
            ScheduleSpec::EntropyRadius { delta, bound } => {
                let beta = entropy_beta(model, ell, *delta, *bound)?;
                CylinderSchedule::sampled_radius(
                    model,
                    self.sidedness,
                    beta,
                    ell,
                    n_max,
                    target_seed,
                )
            }
            ScheduleSpec::Explicit { entries } => CylinderSchedule::explicit(
                entries
                    .iter()
                    .map(|e| {
                        ScheduleEntry::new(
                            e.iter().map(CylinderSpec::build).collect::<Result<_>>()?,
                        )
                    })
                    .collect::<Result<_>>()?,
            ),
        }
    }
}

/// `(1 ∓ δ) / (2ℓh)`.
pub fn entropy_beta(model: &ProcessModel, ell: usize, delta: f64, bound: Bound) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) || (bound == Bound::Lower && delta >= 1.0) {
        return Err(Error::Argument(format!(
            "delta must lie in (0, 1) for the lower schedule and be positive otherwise, got {delta}"
        )));
    }
    let h = entropy_exact(model)?;
    let factor = match bound {
        Bound::Lower => 1.0 - delta,
        Bound::Upper => 1.0 + delta,
    };
    Ok(factor / (2.0 * ell as f64 * h))
}
