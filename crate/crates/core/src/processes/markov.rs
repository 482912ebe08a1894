use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-12;

/// Finite-state, irreducible, aperiodic chain together with its stationary
/// law and the time-reversed kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovChain {
    transition: DMatrix<f64>,
    stationary: Vec<f64>,
    reversed: DMatrix<f64>,
    cumulative: Vec<Vec<f64>>,
    reversed_cumulative: Vec<Vec<f64>>,
    stationary_cumulative: Vec<f64>,
}

impl MarkovChain {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let transition = to_matrix(rows)?;
        let stationary = stationary_of(&transition)?;
        let n = transition.nrows();
        let reversed = DMatrix::from_fn(n, n, |a, b| {
            stationary[b] * transition[(b, a)] / stationary[a]
        });
        let cumulative = (0..n)
            .map(|a| cumulate(transition.row(a).iter().copied()))
            .collect();
        let reversed_cumulative = (0..n)
            .map(|a| cumulate(reversed.row(a).iter().copied()))
            .collect();
        let stationary_cumulative = cumulate(stationary.iter().copied());
        Ok(MarkovChain {
            transition,
            stationary,
            reversed,
            cumulative,
            reversed_cumulative,
            stationary_cumulative,
        })
    }

    pub fn states(&self) -> usize {
        self.transition.nrows()
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn p(&self, a: usize, b: usize) -> f64 {
        self.transition[(a, b)]
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// `P̃(a, b) = π_b P(b, a) / π_a`.
    pub fn reversed(&self) -> &DMatrix<f64> {
        &self.reversed
    }

    /// `P^k` by repeated squaring.
    pub fn power(&self, k: u64) -> DMatrix<f64> {
        matrix_power(&self.transition, k)
    }

    pub fn max_entry(&self) -> f64 {
        self.transition.iter().copied().fold(0.0, f64::max)
    }

    pub(crate) fn step_cumulative(&self, from: usize) -> &[f64] {
        &self.cumulative[from]
    }

    pub(crate) fn reversed_cumulative(&self, from: usize) -> &[f64] {
        &self.reversed_cumulative[from]
    }

    pub(crate) fn stationary_cumulative(&self) -> &[f64] {
        &self.stationary_cumulative
    }
}

/// Stationary vector of an irreducible aperiodic row-stochastic matrix.
pub fn stationary_distribution(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    stationary_of(&to_matrix(rows)?)
}

/// Caches `P^k` for the gaps actually requested.
#[derive(Debug)]
pub struct PowerCache<'a> {
    chain: &'a MarkovChain,
    squares: Vec<DMatrix<f64>>,
    powers: HashMap<u64, DMatrix<f64>>,
}

impl<'a> PowerCache<'a> {
    pub fn new(chain: &'a MarkovChain) -> Self {
        PowerCache {
            chain,
            squares: vec![chain.transition.clone()],
            powers: HashMap::new(),
        }
    }

    /// Entry `(a, b)` of `P^k`.
    pub fn entry(&mut self, k: u64, a: usize, b: usize) -> f64 {
        match k {
            0 => (a == b) as u8 as f64,
            1 => self.chain.transition[(a, b)],
            _ => {
                if !self.powers.contains_key(&k) {
                    let m = self.compute(k);
                    self.powers.insert(k, m);
                }
                self.powers[&k][(a, b)]
            }
        }
    }

    fn compute(&mut self, k: u64) -> DMatrix<f64> {
        let bits = 64 - k.leading_zeros() as usize;
        while self.squares.len() < bits {
            let last = self.squares.last().unwrap();
            let next = last * last;
            self.squares.push(next);
        }
        let n = self.chain.states();
        let mut acc: Option<DMatrix<f64>> = None;
        for (bit, sq) in self.squares.iter().enumerate().take(bits) {
            if k >> bit & 1 == 1 {
                acc = Some(match acc {
                    None => sq.clone(),
                    Some(m) => m * sq,
                });
            }
        }
        acc.unwrap_or_else(|| DMatrix::identity(n, n))
    }
}

fn to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::Model(format!(
            "a chain needs at least two states, got {n}"
        )));
    }
    for (a, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Model(format!(
                "row {a} has {} entries, expected {n}",
                row.len()
            )));
        }
        if row.iter().any(|&p| !(0.0..=1.0).contains(&p) || p.is_nan()) {
            return Err(Error::Model(format!("row {a} has an entry outside [0, 1]")));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::Model(format!("row {a} sums to {sum}, not 1")));
        }
    }
    Ok(DMatrix::from_fn(n, n, |a, b| rows[a][b]))
}

fn matrix_power(m: &DMatrix<f64>, mut k: u64) -> DMatrix<f64> {
    let n = m.nrows();
    let mut result = DMatrix::identity(n, n);
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// A nonnegative matrix is primitive iff some power is strictly positive,
/// and Wielandt's bound says `(n-1)^2 + 1` suffices.
fn is_primitive(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    let mut pattern: Vec<Vec<bool>> = (0..n)
        .map(|a| (0..n).map(|b| m[(a, b)] > 0.0).collect())
        .collect();
    let needed = (n - 1) * (n - 1) + 1;
    let mut reached = 1usize;
    // Squaring overshoots the bound, which is harmless: powers of a
    // primitive pattern stay positive and powers of an imprimitive one never
    // become positive.
    while reached < needed {
        let mut next = vec![vec![false; n]; n];
        for (a, row) in next.iter_mut().enumerate() {
            for (c, via) in pattern.iter().enumerate() {
                if pattern[a][c] {
                    for (cell, &step) in row.iter_mut().zip(via) {
                        *cell |= step;
                    }
                }
            }
        }
        pattern = next;
        reached *= 2;
    }
    pattern.iter().all(|row| row.iter().all(|&x| x))
}

fn stationary_of(p: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !is_primitive(p) {
        return Err(Error::Model("chain is reducible or periodic".into()));
    }
    let n = p.nrows();
    // Solve (Pᵀ - I) π = 0 with the last equation replaced by Σπ = 1.
    let mut a = p.transpose() - DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(n);
    rhs[n - 1] = 1.0;
    let mut pi = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Model("singular stationary system".into()))?;
    // One refinement step: π ← πP, renormalised.
    for _ in 0..2 {
        let next = p.transpose() * &pi;
        let s: f64 = next.iter().sum();
        pi = next / s;
    }
    let pi: Vec<f64> = pi.iter().map(|&x| x.max(0.0)).collect();
    let residual = (0..n)
        .map(|b| ((0..n).map(|a| pi[a] * p[(a, b)]).sum::<f64>() - pi[b]).abs())
        .fold(0.0, f64::max);
    if residual > STATIONARY_TOL {
        return Err(Error::Model(format!(
            "stationary residual {residual:e} exceeds tolerance"
        )));
    }
    Ok(pi)
}

pub(crate) fn cumulate(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}
