//! Stationary shift-invariant laws with exact probability kernels.

mod gauss;
mod markov;
mod mixing;
mod sampling;

pub use gauss::gauss_entropy;
pub use markov::{stationary_distribution, MarkovChain, PowerCache};
pub use mixing::{
    mixing_oracle_bruteforce, phi_exact, psi_exact, MixingKind, MixingProfile, Provenance,
};
pub use sampling::{sample_window, CounterSource, RngSeed, SequentialSampler};

use crate::error::{Error, Result};
use crate::symbolic::{Alphabet, Cylinder, Sidedness, Symbol};

const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ProcessModel {
    kind: ModelKind,
}

#[derive(Clone, Debug, PartialEq)]
enum ModelKind {
    IidFinite {
        probabilities: Vec<f64>,
        cumulative: Vec<f64>,
    },
    IidGeometric {
        p: f64,
    },
    Markov(MarkovChain),
    GaussDigits,
}

impl ProcessModel {
    /// i.i.d. symbols with the given strictly positive marginal law.
    pub fn iid_finite(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() < 2 {
            return Err(Error::Model("the alphabet must not be a singleton".into()));
        }
        if let Some(p) = probabilities.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
            return Err(Error::Model(format!(
                "every probability must lie in (0, 1), got {p}"
            )));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::Model(format!("probabilities sum to {sum}, not 1")));
        }
        let cumulative = markov::cumulate(probabilities.iter().copied());
        Ok(ProcessModel {
            kind: ModelKind::IidFinite {
                probabilities,
                cumulative,
            },
        })
    }

    /// i.i.d. symbols with `P([a]) = p (1-p)^a`, `a = 0, 1, ...`.
    pub fn iid_geometric(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Model(format!(
                "geometric parameter must lie in (0, 1), got {p}"
            )));
        }
        Ok(ProcessModel {
            kind: ModelKind::IidGeometric { p },
        })
    }

    pub fn markov(rows: &[Vec<f64>]) -> Result<Self> {
        Ok(ProcessModel {
            kind: ModelKind::Markov(MarkovChain::new(rows)?),
        })
    }

    /// Continued-fraction digits under the Gauss measure (one-sided only).
    pub fn gauss_digits() -> Self {
        ProcessModel {
            kind: ModelKind::GaussDigits,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::IidFinite { .. } => "iid_finite",
            ModelKind::IidGeometric { .. } => "iid_geometric",
            ModelKind::Markov(_) => "markov",
            ModelKind::GaussDigits => "gauss_digits",
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        match &self.kind {
            ModelKind::IidFinite { probabilities, .. } => {
                Alphabet::Finite(probabilities.len() as u64)
            }
            ModelKind::Markov(c) => Alphabet::Finite(c.states() as u64),
            ModelKind::IidGeometric { .. } | ModelKind::GaussDigits => Alphabet::Countable,
        }
    }

    pub fn is_iid(&self) -> bool {
        matches!(
            self.kind,
            ModelKind::IidFinite { .. } | ModelKind::IidGeometric { .. }
        )
    }

    pub fn as_markov(&self) -> Option<&MarkovChain> {
        match &self.kind {
            ModelKind::Markov(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_gauss(&self) -> bool {
        matches!(self.kind, ModelKind::GaussDigits)
    }

    pub fn check_sidedness(&self, sidedness: Sidedness) -> Result<()> {
        if self.is_gauss() && sidedness == Sidedness::TwoSided {
            return Err(Error::Model("Gauss digits are one-sided".into()));
        }
        Ok(())
    }

    fn check_symbol(&self, s: Symbol) -> Result<()> {
        let ok = match self.kind {
            ModelKind::GaussDigits => s >= 1,
            _ => self.alphabet().contains(s),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!(
                "symbol {s} is not valid for the {} model",
                self.name()
            )))
        }
    }

    fn check_coordinate(&self, coord: i64) -> Result<()> {
        if self.is_gauss() && coord < 0 {
            return Err(Error::Model(format!(
                "Gauss digits are one-sided; coordinate {coord} does not exist"
            )));
        }
        Ok(())
    }

    /// `P([a])`, the probability of the 1-cylinder at coordinate 0.
    pub fn marginal(&self, a: Symbol) -> Result<f64> {
        self.check_symbol(a)?;
        Ok(match &self.kind {
            ModelKind::IidFinite { probabilities, .. } => probabilities[a as usize],
            ModelKind::IidGeometric { p } => p * (1.0 - p).powf(a as f64),
            ModelKind::Markov(c) => c.stationary()[a as usize],
            ModelKind::GaussDigits => gauss::first_digit_probability(a),
        })
    }

    /// Exact stationary probability of a cylinder.
    pub fn cylinder_probability(&self, cyl: &Cylinder) -> Result<f64> {
        match &self.kind {
            ModelKind::GaussDigits => Ok(self.log_cylinder_probability(cyl)?.exp()),
            _ => {
                self.check_cylinder(cyl)?;
                Ok(self.path_probability(cyl.symbols()))
            }
        }
    }

    /// `ln P(C)`; stays finite where [`Self::cylinder_probability`] would
    /// underflow (long Gauss prefixes, wide Markov cylinders).
    pub fn log_cylinder_probability(&self, cyl: &Cylinder) -> Result<f64> {
        self.check_cylinder(cyl)?;
        let w = cyl.symbols();
        Ok(match &self.kind {
            ModelKind::IidFinite { probabilities, .. } => {
                w.iter().map(|&a| probabilities[a as usize].ln()).sum()
            }
            ModelKind::IidGeometric { p } => {
                w.iter().map(|&a| p.ln() + a as f64 * (1.0 - p).ln()).sum()
            }
            ModelKind::Markov(c) => {
                let mut acc = c.stationary()[w[0] as usize].ln();
                for pair in w.windows(2) {
                    acc += c.p(pair[0] as usize, pair[1] as usize).ln();
                }
                acc
            }
            // Stationarity: a block starting anywhere at or after 0 has the
            // law of the prefix.
            ModelKind::GaussDigits => gauss::log_prefix_probability(w),
        })
    }

    fn check_cylinder(&self, cyl: &Cylinder) -> Result<()> {
        self.check_coordinate(cyl.interval().lo)?;
        cyl.symbols().iter().try_for_each(|&s| self.check_symbol(s))
    }

    /// Probability of a contiguous word (finite-alphabet and geometric laws).
    fn path_probability(&self, w: &[Symbol]) -> f64 {
        match &self.kind {
            ModelKind::IidFinite { probabilities, .. } => {
                w.iter().map(|&a| probabilities[a as usize]).product()
            }
            ModelKind::IidGeometric { p } => {
                w.iter().map(|&a| p * (1.0 - p).powf(a as f64)).product()
            }
            ModelKind::Markov(c) => {
                let mut acc = c.stationary()[w[0] as usize];
                for pair in w.windows(2) {
                    acc *= c.p(pair[0] as usize, pair[1] as usize);
                }
                acc
            }
            ModelKind::GaussDigits => gauss::log_prefix_probability(w).exp(),
        }
    }

    /// Probability that every `(coordinate, symbol)` constraint holds.
    ///
    /// Two different symbols at one coordinate give probability 0.
    pub fn joint_cylinder_probability(&self, constraints: &[(i64, Symbol)]) -> Result<f64> {
        let mut cache = self.as_markov().map(PowerCache::new);
        self.joint_with_cache(constraints, cache.as_mut())
    }

    /// As [`Self::joint_cylinder_probability`], reusing matrix powers across
    /// calls.
    pub fn joint_with_cache(
        &self,
        constraints: &[(i64, Symbol)],
        cache: Option<&mut PowerCache<'_>>,
    ) -> Result<f64> {
        let mut sorted = constraints.to_vec();
        for &(coord, s) in &sorted {
            self.check_coordinate(coord)?;
            self.check_symbol(s)?;
        }
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
            return Ok(0.0);
        }
        if sorted.is_empty() {
            return Ok(1.0);
        }
        match &self.kind {
            ModelKind::IidFinite { .. } | ModelKind::IidGeometric { .. } => {
                let mut acc = 1.0;
                for &(_, s) in &sorted {
                    acc *= self.marginal(s)?;
                }
                Ok(acc)
            }
            ModelKind::Markov(chain) => Ok(match cache {
                Some(c) => markov_joint(chain, &sorted, c),
                None => markov_joint(chain, &sorted, &mut PowerCache::new(chain)),
            }),
            ModelKind::GaussDigits => {
                let contiguous = sorted.windows(2).all(|w| w[1].0 == w[0].0 + 1);
                if !contiguous {
                    return Err(Error::Unsupported(
                        "Gauss-digit joint probabilities need a contiguous block".into(),
                    ));
                }
                let word: Vec<Symbol> = sorted.iter().map(|&(_, s)| s).collect();
                Ok(gauss::log_prefix_probability(&word).exp())
            }
        }
    }

    /// Kolmogorov-Sinai entropy in nats, where it has a closed form.
    pub fn entropy_rate(&self) -> Result<f64> {
        match &self.kind {
            ModelKind::IidFinite { probabilities, .. } => {
                Ok(-probabilities.iter().map(|&p| p * p.ln()).sum::<f64>())
            }
            ModelKind::IidGeometric { p } => {
                let q = 1.0 - p;
                Ok(-(p * p.ln() + q * q.ln()) / p)
            }
            ModelKind::Markov(c) => {
                let n = c.states();
                let mut h = 0.0;
                for a in 0..n {
                    let row: f64 = (0..n)
                        .map(|b| c.p(a, b))
                        .filter(|&p| p > 0.0)
                        .map(|p| p * p.ln())
                        .sum();
                    h -= c.stationary()[a] * row;
                }
                Ok(h)
            }
            ModelKind::GaussDigits => Err(Error::Unsupported(
                "no closed-form entropy for Gauss digits; use the SMB estimate".into(),
            )),
        }
    }
}

fn markov_joint(chain: &MarkovChain, sorted: &[(i64, Symbol)], cache: &mut PowerCache<'_>) -> f64 {
    let mut acc = chain.stationary()[sorted[0].1 as usize];
    for w in sorted.windows(2) {
        let gap = (w[1].0 - w[0].0) as u64;
        acc *= cache.entry(gap, w[0].1 as usize, w[1].1 as usize);
    }
    acc
}
