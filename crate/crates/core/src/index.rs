//! Polynomial index families `q_1, ..., q_ℓ` and decidable checks of the
//! two counting conditions they must satisfy.
//!
//! Every certificate uses integer Cauchy root bounds: a polynomial with
//! integer coefficients `c_0..c_d` has no real root of modulus at least
//! `1 + ⌈max_{i<d} |c_i| / |c_d|⌉`, so beyond that point it has the sign of
//! `c_d`, and beyond the bound of its derivative it is strictly monotone.
//! No floating point is involved.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer polynomial, coefficients low degree first, trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<i128>", into = "Vec<i128>")]
pub struct Polynomial {
    coeffs: Vec<i128>,
    /// The same coefficients when they all fit in 64 bits.
    narrow: Option<Vec<i64>>,
}

impl From<Vec<i128>> for Polynomial {
    fn from(coeffs: Vec<i128>) -> Self {
        Polynomial::from_i128(coeffs)
    }
}

impl From<Polynomial> for Vec<i128> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl Polynomial {
    pub fn new(coeffs: &[i64]) -> Self {
        Self::from_i128(coeffs.iter().map(|&c| c as i128).collect())
    }

    fn from_i128(mut coeffs: Vec<i128>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        let narrow = coeffs.iter().map(|&c| i64::try_from(c).ok()).collect();
        Polynomial { coeffs, narrow }
    }

    pub fn coefficients(&self) -> &[i128] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> i128 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    /// Horner evaluation; `None` on 128-bit overflow.
    #[inline]
    pub fn eval_i128(&self, n: i128) -> Option<i128> {
        let mut acc: i128 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = acc.checked_mul(n)?.checked_add(c)?;
        }
        Some(acc)
    }

    /// Horner evaluation in 64 bits; `None` on overflow.
    #[inline]
    pub fn eval_i64(&self, n: i64) -> Option<i64> {
        let mut acc: i64 = 0;
        for &c in self.narrow.as_ref()?.iter().rev() {
            acc = acc.checked_mul(n)?.checked_add(c)?;
        }
        Some(acc)
    }

    pub fn eval_big(&self, n: u64) -> BigInt {
        let n = BigInt::from(n);
        let mut acc = BigInt::from(0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * &n + BigInt::from(c);
        }
        acc
    }

    pub fn derivative(&self) -> Polynomial {
        Self::from_i128(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as i128)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::from_i128(
            (0..len)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(0)
                        - other.coeffs.get(i).copied().unwrap_or(0)
                })
                .collect(),
        )
    }

    /// Integer `B` with no real root in `[B, ∞)`; 0 for constants.
    pub fn root_bound(&self) -> u64 {
        if self.is_constant() {
            return 0;
        }
        let lead = self.leading().unsigned_abs();
        let max = self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .map(|c| c.unsigned_abs())
            .max()
            .unwrap_or(0);
        let ratio = max.div_ceil(lead);
        u64::try_from(ratio + 1).unwrap_or(u64::MAX)
    }

    /// Integer `t` such that the polynomial is strictly monotone on `[t, ∞)`.
    /// Meaningless for constants (returns 0).
    pub fn monotone_threshold(&self) -> u64 {
        match self.degree() {
            None | Some(0) | Some(1) => 0,
            _ => self.derivative().root_bound(),
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0 { '-' } else { '+' })?;
            } else if c < 0 {
                write!(f, "-")?;
            }
            let a = c.unsigned_abs();
            match i {
                0 => write!(f, "{a}")?,
                1 if a == 1 => write!(f, "n")?,
                1 => write!(f, "{a}n")?,
                _ if a == 1 => write!(f, "n^{i}")?,
                _ => write!(f, "{a}n^{i}")?,
            }
            first = false;
        }
        Ok(())
    }
}

/// `q_1, ..., q_ℓ`. Lanes are addressed 1-based in the public evaluation
/// API and 0-based in the hot-path [`IndexFamily::coordinate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexFamily {
    polys: Vec<Polynomial>,
}

impl IndexFamily {
    pub fn new(coefficient_lists: &[Vec<i64>]) -> Result<Self> {
        if coefficient_lists.is_empty() {
            return Err(Error::Argument(
                "an index family needs at least one polynomial".into(),
            ));
        }
        Ok(IndexFamily {
            polys: coefficient_lists
                .iter()
                .map(|c| Polynomial::new(c))
                .collect(),
        })
    }

    pub fn from_polynomials(polys: Vec<Polynomial>) -> Result<Self> {
        if polys.is_empty() {
            return Err(Error::Argument(
                "an index family needs at least one polynomial".into(),
            ));
        }
        Ok(IndexFamily { polys })
    }

    /// `q(n) = n`.
    pub fn identity() -> Self {
        IndexFamily {
            polys: vec![Polynomial::new(&[0, 1])],
        }
    }

    pub fn ell(&self) -> usize {
        self.polys.len()
    }

    pub fn polynomials(&self) -> &[Polynomial] {
        &self.polys
    }

    /// Exact `q_i(n)` for `1 <= i <= ℓ`.
    pub fn evaluate(&self, i: usize, n: u64) -> Result<BigUint> {
        let poly = self.lane(i)?;
        poly.eval_big(n).to_biguint().ok_or_else(|| {
            Error::Invariant(format!("q_{i}({n}) = {} is negative", poly.eval_big(n)))
        })
    }

    fn lane(&self, i: usize) -> Result<&Polynomial> {
        if i == 0 || i > self.polys.len() {
            return Err(Error::Argument(format!(
                "lane {i} outside 1..={}",
                self.polys.len()
            )));
        }
        Ok(&self.polys[i - 1])
    }

    /// `q_{lane+1}(n)` as a coordinate (0-based lane).
    #[inline]
    pub fn coordinate(&self, lane: usize, n: u64) -> Result<i64> {
        let p = &self.polys[lane];
        if let Some(v) = i64::try_from(n).ok().and_then(|n| p.eval_i64(n)) {
            if v >= 0 {
                return Ok(v);
            }
        }
        let v = p
            .eval_i128(n as i128)
            .ok_or_else(|| Error::Resource(format!("q_{}({n}) overflows", lane + 1)))?;
        if v < 0 {
            return Err(Error::Invariant(format!(
                "q_{}({n}) = {v} is negative",
                lane + 1
            )));
        }
        i64::try_from(v).map_err(|_| {
            Error::Resource(format!(
                "q_{}({n}) = {v} exceeds the coordinate range",
                lane + 1
            ))
        })
    }

    fn value(&self, lane: usize, n: u64) -> Result<i128> {
        self.polys[lane]
            .eval_i128(n as i128)
            .ok_or_else(|| Error::Resource(format!("q_{}({n}) overflows 128 bits", lane + 1)))
    }

    /// `min_{i≠j} |q_i(n) − q_j(n)|`.
    pub fn q_min(&self, n: u64) -> Result<u128> {
        if self.ell() < 2 {
            return Err(Error::Argument(
                "q_min needs at least two polynomials".into(),
            ));
        }
        let vals: Vec<i128> = (0..self.ell())
            .map(|l| self.value(l, n))
            .collect::<Result<_>>()?;
        let mut best = u128::MAX;
        for i in 0..vals.len() {
            for j in i + 1..vals.len() {
                best = best.min(vals[i].abs_diff(vals[j]));
            }
        }
        Ok(best)
    }

    /// `δ(m, n) = min_{i,j} |q_i(m) − q_j(n)|`.
    pub fn delta_semimetric(&self, m: u64, n: u64) -> Result<u128> {
        if m == 0 || n == 0 {
            return Err(Error::Argument("δ(m, n) is defined for m, n >= 1".into()));
        }
        let a: Vec<i128> = (0..self.ell())
            .map(|l| self.value(l, m))
            .collect::<Result<_>>()?;
        let b: Vec<i128> = (0..self.ell())
            .map(|l| self.value(l, n))
            .collect::<Result<_>>()?;
        Ok(a.iter()
            .flat_map(|x| b.iter().map(move |y| x.abs_diff(*y)))
            .min()
            .unwrap())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Bounded solution counts of `q_i − q_j = k` and `q_i = k`.
    SolutionCounts,
    /// Finitely many pairs `n > m` with `max_i q_i(n) <= max_i q_i(m)`.
    MaxMonotonicity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    ConstantDifference { i: usize, j: usize },
    ConstantFunction { i: usize },
    Negative { i: usize, n: u64 },
    HorizonTooShort { needed: u64 },
    NotEventuallyIncreasing,
    Overflow { n: u64 },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::ConstantDifference { i, j } => write!(f, "q_{i} - q_{j} is constant"),
            Witness::ConstantFunction { i } => write!(f, "q_{i} is constant"),
            Witness::Negative { i, n } => write!(f, "q_{i}({n}) is negative"),
            Witness::HorizonTooShort { needed } => {
                write!(f, "tail certificate needs a horizon of at least {needed}")
            }
            Witness::NotEventuallyIncreasing => write!(f, "max_i q_i is not eventually increasing"),
            Witness::Overflow { n } => write!(f, "evaluation overflows 128 bits near n = {n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail { witness: Witness },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub condition: Condition,
    pub horizon: u64,
    /// Largest count seen with `n <= horizon` (pairs for the second
    /// condition).
    pub k_observed: Option<u64>,
    /// Certified bound on the count over all `n >= 0`.
    pub k: Option<u64>,
    /// Point beyond which the tail argument applies.
    pub tail_from: Option<u64>,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    fn fail(condition: Condition, horizon: u64, witness: Witness) -> Self {
        AssumptionReport {
            condition,
            horizon,
            k_observed: None,
            k: None,
            tail_from: None,
            verdict: Verdict::Fail { witness },
        }
    }
}

/// Finds a negative value or certifies `q_i(n) >= 0` for all `n >= 0`.
fn certify_nonnegative(family: &IndexFamily, horizon: u64) -> std::result::Result<(), Witness> {
    for (lane, p) in family.polys.iter().enumerate() {
        let i = lane + 1;
        let tail = p.root_bound();
        if p.leading() < 0 {
            // Negative from the root bound on; report the first offender.
            let n = (0..=tail)
                .find(|&n| p.eval_i128(n as i128).is_none_or(|v| v < 0))
                .unwrap_or(tail);
            return Err(Witness::Negative { i, n });
        }
        if tail > horizon {
            return Err(Witness::HorizonTooShort { needed: tail });
        }
        for n in 0..=tail {
            match p.eval_i128(n as i128) {
                None => return Err(Witness::Overflow { n }),
                Some(v) if v < 0 => return Err(Witness::Negative { i, n }),
                Some(_) => {}
            }
        }
    }
    Ok(())
}

struct CountOutcome {
    observed: u64,
    bound: u64,
}

/// A polynomial restricted to `[from, to]` where it is strictly monotone.
struct MonotoneRun<'a> {
    p: &'a Polynomial,
    from: u64,
    to: u64,
    increasing: bool,
}

impl MonotoneRun<'_> {
    fn at(&self, n: u64) -> std::result::Result<i128, Witness> {
        self.p.eval_i128(n as i128).ok_or(Witness::Overflow { n })
    }

    /// `n` in the run with `p(n) = k`, if any.
    fn solve(&self, k: i128) -> std::result::Result<Option<u64>, Witness> {
        let (mut lo, mut hi) = (self.from, self.to);
        while lo <= hi {
            let mid = lo + (hi - lo) / 2;
            let v = self.at(mid)?;
            if v == k {
                return Ok(Some(mid));
            }
            let go_right = (v < k) == self.increasing;
            if go_right {
                lo = mid + 1;
            } else {
                if mid == 0 {
                    break;
                }
                hi = mid - 1;
            }
        }
        Ok(None)
    }

    /// Can `p` take the value `k` somewhere after `to`?
    fn may_hit_beyond(&self, k: i128) -> std::result::Result<bool, Witness> {
        let end = self.at(self.to)?;
        Ok(if self.increasing { k > end } else { k < end })
    }

    /// Values in ascending order, with their arguments.
    fn ascending(&self) -> impl Iterator<Item = std::result::Result<(i128, u64), Witness>> + '_ {
        let (a, b) = (self.from, self.to);
        let forward = self.increasing;
        (0..=b - a).map(move |off| {
            let n = if forward { a + off } else { b - off };
            self.at(n).map(|v| (v, n))
        })
    }
}

/// Counts `#{n : p(n) = k for some p in polys}` for every `k`, on `[0,
/// horizon]` and, through the monotone tails, for all `n >= 0`.
fn count_solutions(
    polys: &[Polynomial],
    horizon: u64,
) -> std::result::Result<CountOutcome, Witness> {
    let t = polys
        .iter()
        .map(|p| p.monotone_threshold())
        .max()
        .unwrap_or(0);
    if t > horizon {
        return Err(Witness::HorizonTooShort { needed: t });
    }
    let mut runs = Vec::with_capacity(polys.len());
    for p in polys {
        let up = p
            .eval_i128(t as i128 + 1)
            .ok_or(Witness::Overflow { n: t + 1 })?
            > p.eval_i128(t as i128).ok_or(Witness::Overflow { n: t })?;
        runs.push(MonotoneRun {
            p,
            from: t,
            to: horizon,
            increasing: up,
        });
    }

    let mut head: BTreeMap<i128, Vec<u64>> = BTreeMap::new();
    for p in polys {
        for n in 0..t {
            let v = p.eval_i128(n as i128).ok_or(Witness::Overflow { n })?;
            let ns = head.entry(v).or_default();
            if !ns.contains(&n) {
                ns.push(n);
            }
        }
    }

    let mut observed: u64 = 1;
    let mut bound: u64 = polys.len() as u64;
    for (&k, ns) in &head {
        let mut tail_hits: Vec<u64> = Vec::new();
        let mut slack = 0;
        for run in &runs {
            if let Some(n) = run.solve(k)? {
                if !tail_hits.contains(&n) {
                    tail_hits.push(n);
                }
            }
            if run.may_hit_beyond(k)? {
                slack += 1;
            }
        }
        let count = (ns.len() + tail_hits.len()) as u64;
        observed = observed.max(count);
        bound = bound.max(count + slack);
    }

    if runs.len() == 2 {
        // Coincidences between the two monotone tails.
        let mut a = runs[0].ascending().peekable();
        let mut b = runs[1].ascending().peekable();
        while let (Some(x), Some(y)) = (a.peek(), b.peek()) {
            let (vx, nx) = x.clone()?;
            let (vy, ny) = y.clone()?;
            match vx.cmp(&vy) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    if !head.contains_key(&vx) {
                        let c = if nx == ny { 1 } else { 2 };
                        observed = observed.max(c);
                        bound = bound.max(c);
                    }
                    a.next();
                    b.next();
                }
            }
        }
    }
    Ok(CountOutcome { observed, bound })
}

/// Checks bounded solution counts for `q_i(n) − q_j(n) = k` and
/// `q_i(n) = k` (only the latter when `ℓ = 1`).
pub fn check_assumption_i(family: &IndexFamily, horizon: u64) -> Result<AssumptionReport> {
    if horizon == 0 {
        return Err(Error::Argument("horizon must be positive".into()));
    }
    let cond = Condition::SolutionCounts;
    if let Err(w) = certify_nonnegative(family, horizon) {
        return Ok(AssumptionReport::fail(cond, horizon, w));
    }
    let ell = family.ell();
    let mut sets: Vec<Vec<Polynomial>> = Vec::new();
    for i in 0..ell {
        if family.polys[i].is_constant() {
            return Ok(AssumptionReport::fail(
                cond,
                horizon,
                Witness::ConstantFunction { i: i + 1 },
            ));
        }
    }
    if ell == 1 {
        sets.push(vec![family.polys[0].clone()]);
    } else {
        for i in 0..ell {
            for j in 0..ell {
                if i == j {
                    continue;
                }
                let diff = family.polys[i].sub(&family.polys[j]);
                if diff.is_constant() {
                    let (a, b) = (i.min(j) + 1, i.max(j) + 1);
                    return Ok(AssumptionReport::fail(
                        cond,
                        horizon,
                        Witness::ConstantDifference { i: a, j: b },
                    ));
                }
                sets.push(vec![diff, family.polys[i].clone()]);
            }
        }
    }
    let mut observed = 0;
    let mut bound = 0;
    let mut tail_from = 0;
    for set in &sets {
        tail_from = tail_from.max(
            set.iter()
                .map(|p| p.monotone_threshold())
                .max()
                .unwrap_or(0),
        );
        match count_solutions(set, horizon) {
            Ok(c) => {
                observed = observed.max(c.observed);
                bound = bound.max(c.bound);
            }
            Err(w) => return Ok(AssumptionReport::fail(cond, horizon, w)),
        }
    }
    Ok(AssumptionReport {
        condition: cond,
        horizon,
        k_observed: Some(observed),
        k: Some(bound),
        tail_from: Some(tail_from),
        verdict: Verdict::Pass,
    })
}

/// Counts pairs `n > m >= 0` with `max_i q_i(n) <= max_i q_i(m)`.
pub fn check_assumption_ii(family: &IndexFamily, horizon: u64) -> Result<AssumptionReport> {
    if horizon == 0 {
        return Err(Error::Argument("horizon must be positive".into()));
    }
    let cond = Condition::MaxMonotonicity;
    match count_max_violations(family, horizon) {
        Ok((count, tail_from)) => Ok(AssumptionReport {
            condition: cond,
            horizon,
            k_observed: Some(count),
            k: Some(count),
            tail_from: Some(tail_from),
            verdict: Verdict::Pass,
        }),
        Err(w) => Ok(AssumptionReport::fail(cond, horizon, w)),
    }
}

fn count_max_violations(
    family: &IndexFamily,
    horizon: u64,
) -> std::result::Result<(u64, u64), Witness> {
    let polys = &family.polys;
    // Eventually dominant polynomial: p beats q eventually iff p − q has a
    // positive leading coefficient.
    let mut dom = &polys[0];
    for p in &polys[1..] {
        if p.sub(dom).leading() > 0 {
            dom = p;
        }
    }
    if dom.is_constant() || dom.leading() <= 0 {
        return Err(Witness::NotEventuallyIncreasing);
    }
    let n_dom = polys
        .iter()
        .map(|p| dom.sub(p))
        .filter(|d| d.degree().is_some())
        .map(|d| d.root_bound())
        .max()
        .unwrap_or(0);
    let n_star = n_dom.max(dom.monotone_threshold());
    if n_star > horizon {
        return Err(Witness::HorizonTooShort { needed: n_star });
    }
    let max_at = |n: u64| -> std::result::Result<i128, Witness> {
        polys
            .iter()
            .map(|p| p.eval_i128(n as i128).ok_or(Witness::Overflow { n }))
            .try_fold(i128::MIN, |acc, v| v.map(|v| acc.max(v)))
    };

    let mut count: u64 = 0;
    let mut seen: Vec<i128> = Vec::with_capacity(n_star as usize);
    for n in 0..n_star {
        let v = max_at(n)?;
        // previous values >= v
        let idx = seen.partition_point(|&x| x < v);
        count += (seen.len() - idx) as u64;
        seen.insert(idx, v);
    }
    let ceiling = seen.last().copied();
    let mut n = n_star;
    if let Some(top) = ceiling {
        loop {
            let v = max_at(n)?;
            if v > top {
                break;
            }
            if n > horizon {
                return Err(Witness::HorizonTooShort { needed: n });
            }
            let idx = seen.partition_point(|&x| x < v);
            count += (seen.len() - idx) as u64;
            n += 1;
        }
    }
    Ok((count, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(lists: &[&[i64]]) -> IndexFamily {
        IndexFamily::new(&lists.iter().map(|l| l.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let f = fam(&[&[0, 0, 1], &[3, 2]]);
        assert_eq!(f.evaluate(1, 7).unwrap(), BigUint::from(49u32));
        assert_eq!(f.evaluate(2, 0).unwrap(), BigUint::from(3u32));
        let neg = fam(&[&[0, -10, 1]]);
        match neg.evaluate(1, 3) {
            Err(Error::Invariant(msg)) => assert!(msg.contains("q_1(3)")),
            other => panic!("{other:?}"),
        }
        assert!(f.evaluate(3, 0).is_err());
    }

    #[test]
    fn evaluate_is_arbitrary_precision() {
        let f = fam(&[&[0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]]);
        let v = f.evaluate(1, u64::MAX).unwrap();
        assert_eq!(v, BigUint::from(u64::MAX).pow(10));
    }

    #[test]
    fn q_min_examples() {
        let f = fam(&[&[0, 1], &[0, 0, 1]]);
        assert_eq!(f.q_min(3).unwrap(), 6);
        assert_eq!(f.q_min(1).unwrap(), 0);
        let g = fam(&[&[0, 1], &[0, 2], &[0, 3]]);
        assert_eq!(g.q_min(5).unwrap(), 5);
        assert!(fam(&[&[0, 1]]).q_min(3).is_err());
    }

    #[test]
    fn delta_examples() {
        let f = fam(&[&[0, 1], &[0, 0, 1]]);
        assert_eq!(f.delta_semimetric(2, 3).unwrap(), 1);
        assert_eq!(f.delta_semimetric(4, 4).unwrap(), 0);
        assert_eq!(fam(&[&[0, 1]]).delta_semimetric(2, 5).unwrap(), 3);
    }

    #[test]
    fn thresholds() {
        let p = Polynomial::new(&[9, -5, 1]);
        assert_eq!(p.monotone_threshold(), 4);
        assert_eq!(p.root_bound(), 10);
        assert_eq!(Polynomial::new(&[5, 3]).monotone_threshold(), 0);
        assert_eq!(format!("{p}"), "n^2 - 5n + 9");
    }

    #[test]
    fn assumption_i_examples() {
        let r = check_assumption_i(&fam(&[&[0, 1], &[0, 0, 1]]), 1000).unwrap();
        assert!(r.passed());
        assert_eq!(r.k_observed, Some(2));
        assert_eq!(r.k, Some(2));

        let r = check_assumption_i(&fam(&[&[0, 1], &[1, 1]]), 1000).unwrap();
        assert_eq!(
            r.verdict,
            Verdict::Fail {
                witness: Witness::ConstantDifference { i: 1, j: 2 }
            }
        );

        let r = check_assumption_i(&fam(&[&[0, 2]]), 1000).unwrap();
        assert!(r.passed());
        assert_eq!(r.k, Some(1));
    }

    #[test]
    fn assumption_i_rejects_negative_and_constant() {
        let r = check_assumption_i(&fam(&[&[0, -10, 1]]), 1000).unwrap();
        assert!(matches!(
            r.verdict,
            Verdict::Fail {
                witness: Witness::Negative { i: 1, n: 1 }
            }
        ));
        let r = check_assumption_i(&fam(&[&[4]]), 1000).unwrap();
        assert!(matches!(
            r.verdict,
            Verdict::Fail {
                witness: Witness::ConstantFunction { i: 1 }
            }
        ));
    }

    #[test]
    fn assumption_ii_examples() {
        let r = check_assumption_ii(&fam(&[&[0, 1], &[0, 0, 1]]), 1000).unwrap();
        assert!(r.passed());
        assert_eq!(r.k, Some(0));
        let r = check_assumption_ii(&fam(&[&[9, -5, 1]]), 1000).unwrap();
        assert!(r.passed());
        assert_eq!(r.k, Some(9));
        let r = check_assumption_ii(&fam(&[&[0, 3], &[1, 1, 2]]), 1000).unwrap();
        assert_eq!(r.k, Some(0));
    }

    #[test]
    fn assumption_ii_constant_family_fails() {
        let r = check_assumption_ii(&fam(&[&[2], &[5]]), 100).unwrap();
        assert_eq!(
            r.verdict,
            Verdict::Fail {
                witness: Witness::NotEventuallyIncreasing
            }
        );
    }

    #[test]
    fn short_horizon_is_reported() {
        let r = check_assumption_i(&fam(&[&[0, -50, 1]]), 10).unwrap();
        assert!(!r.passed());
    }
}
