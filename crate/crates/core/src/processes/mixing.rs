//! φ- and ψ-mixing coefficients.
//!
//! For a Markov chain the past and the future interact only through the
//! state at the boundary, which collapses the suprema to
//! `φ(k) = max_a ½ Σ_b |P^k(a,b) − π_b|` and
//! `ψ(k) = max_{a,b} |P^k(a,b)/π_b − 1|`. The brute-force oracle enumerates
//! cylinder events instead and never touches `P^k`, so the two routes check
//! each other.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ModelKind, ProcessModel};
use crate::error::{Error, Result};
use crate::symbolic::Symbol;

const ENUMERATION_LIMIT: u128 = 100_000_000;
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingKind {
    Phi,
    Psi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ExactFormula,
    BruteForceOracle,
}

/// Coefficient values for gaps `1..=k_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingProfile {
    pub kind: MixingKind,
    pub values: BTreeMap<u64, f64>,
    pub provenance: Provenance,
}

impl MixingProfile {
    pub fn exact(model: &ProcessModel, kind: MixingKind, k_max: u64) -> Result<Self> {
        let values = (1..=k_max)
            .map(|k| {
                let v = match kind {
                    MixingKind::Phi => phi_exact(model, k)?,
                    MixingKind::Psi => psi_exact(model, k)?,
                };
                Ok((k, v))
            })
            .collect::<Result<_>>()?;
        Self::checked(MixingProfile {
            kind,
            values,
            provenance: Provenance::ExactFormula,
        })
    }

    pub fn oracle(
        model: &ProcessModel,
        kind: MixingKind,
        k_max: u64,
        max_len: u32,
    ) -> Result<Self> {
        let values = (1..=k_max)
            .map(|k| Ok((k, mixing_oracle_bruteforce(model, kind, k, max_len)?)))
            .collect::<Result<_>>()?;
        Self::checked(MixingProfile {
            kind,
            values,
            provenance: Provenance::BruteForceOracle,
        })
    }

    fn checked(profile: Self) -> Result<Self> {
        let mut prev = f64::INFINITY;
        for (&k, &v) in &profile.values {
            if v < 0.0 || (profile.kind == MixingKind::Phi && v > 1.0 + MONOTONE_SLACK) {
                return Err(Error::Invariant(format!(
                    "coefficient {v} at k={k} out of range"
                )));
            }
            if v > prev + MONOTONE_SLACK {
                return Err(Error::Invariant(format!(
                    "coefficient increases at k={k}: {prev} -> {v}"
                )));
            }
            prev = v;
        }
        Ok(profile)
    }

    /// Partial sum `Σ_{k<=k_max}` of the coefficients.
    pub fn partial_sum(&self) -> f64 {
        self.values.values().sum()
    }
}

fn check_gap(k: u64) -> Result<()> {
    if k == 0 {
        return Err(Error::Argument("mixing gap k must be positive".into()));
    }
    Ok(())
}

pub fn phi_exact(model: &ProcessModel, k: u64) -> Result<f64> {
    check_gap(k)?;
    match &model.kind {
        ModelKind::IidFinite { .. } | ModelKind::IidGeometric { .. } => Ok(0.0),
        ModelKind::Markov(chain) => {
            let pk = chain.power(k);
            let pi = chain.stationary();
            let n = chain.states();
            Ok((0..n)
                .map(|a| 0.5 * (0..n).map(|b| (pk[(a, b)] - pi[b]).abs()).sum::<f64>())
                .fold(0.0, f64::max))
        }
        ModelKind::GaussDigits => Err(Error::Unsupported(
            "no exact mixing coefficients for Gauss digits".into(),
        )),
    }
}

pub fn psi_exact(model: &ProcessModel, k: u64) -> Result<f64> {
    check_gap(k)?;
    match &model.kind {
        ModelKind::IidFinite { .. } | ModelKind::IidGeometric { .. } => Ok(0.0),
        ModelKind::Markov(chain) => {
            let pk = chain.power(k);
            let pi = chain.stationary();
            let n = chain.states();
            let mut best: f64 = 0.0;
            for a in 0..n {
                for b in 0..n {
                    best = best.max((pk[(a, b)] / pi[b] - 1.0).abs());
                }
            }
            Ok(best)
        }
        ModelKind::GaussDigits => Err(Error::Unsupported(
            "no exact mixing coefficients for Gauss digits".into(),
        )),
    }
}

/// All words of a given length over `0..size`, in lexicographic order.
fn words(size: u64, len: u32) -> impl Iterator<Item = Vec<Symbol>> {
    let total = size.pow(len);
    (0..total).map(move |mut code| {
        let mut w = vec![0; len as usize];
        for slot in w.iter_mut().rev() {
            *slot = code % size;
            code /= size;
        }
        w
    })
}

/// Supremum of the dependence coefficient over cylinder events.
///
/// `Γ` ranges over cylinders of length `1..=max_len` ending at coordinate 0
/// and `Δ` over cylinders of length `1..=max_len` starting at coordinate `k`.
/// `P(Γ ∩ Δ)` is obtained by summing path probabilities over every filling
/// of the gap. For φ the inner supremum over the σ-algebra generated by
/// length-`L` cylinders is the total-variation distance, computed by summing
/// over the atoms; for ψ the ratio of a union is a convex combination of
/// ratios of atoms, so atoms suffice.
pub fn mixing_oracle_bruteforce(
    model: &ProcessModel,
    kind: MixingKind,
    k: u64,
    max_len: u32,
) -> Result<f64> {
    check_gap(k)?;
    if max_len == 0 {
        return Err(Error::Argument("max_len must be positive".into()));
    }
    let size = match (&model.kind, model.alphabet().size()) {
        (ModelKind::IidFinite { .. } | ModelKind::Markov(_), Some(size)) => size,
        _ => {
            return Err(Error::Unsupported(
                "the brute-force oracle needs a finite-alphabet i.i.d. or Markov model".into(),
            ))
        }
    };
    let gap = k - 1;
    let mut work: u128 = 0;
    for lg in 1..=max_len as u64 {
        for ld in 1..=max_len as u64 {
            let exp = lg + ld + gap;
            let term = (size as u128).checked_pow(exp as u32).unwrap_or(u128::MAX);
            work = work.saturating_add(term);
        }
    }
    if work > ENUMERATION_LIMIT {
        return Err(Error::Resource(format!(
            "oracle enumeration of {work} paths exceeds the limit {ENUMERATION_LIMIT}"
        )));
    }
    let gap_words: Vec<Vec<Symbol>> = words(size, gap as u32).collect();
    let joint = |g: &[Symbol], d: &[Symbol]| -> f64 {
        let mut path = Vec::with_capacity(g.len() + gap as usize + d.len());
        gap_words
            .iter()
            .map(|fill| {
                path.clear();
                path.extend_from_slice(g);
                path.extend_from_slice(fill);
                path.extend_from_slice(d);
                model.path_probability(&path)
            })
            .sum()
    };

    let mut best: f64 = 0.0;
    for lg in 1..=max_len {
        for g in words(size, lg) {
            let pg = model.path_probability(&g);
            if pg == 0.0 {
                continue;
            }
            for ld in 1..=max_len {
                match kind {
                    MixingKind::Phi => {
                        let tv: f64 = words(size, ld)
                            .map(|d| (joint(&g, &d) / pg - model.path_probability(&d)).abs())
                            .sum::<f64>()
                            * 0.5;
                        best = best.max(tv);
                    }
                    MixingKind::Psi => {
                        for d in words(size, ld) {
                            let pd = model.path_probability(&d);
                            if pd == 0.0 {
                                continue;
                            }
                            best = best.max((joint(&g, &d) / (pg * pd) - 1.0).abs());
                        }
                    }
                }
            }
        }
    }
    Ok(best)
}
