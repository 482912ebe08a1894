//! Continued-fraction digits of a Gauss-distributed point.
//!
//! Expanding a sampled `f64` runs out of precision after a couple of dozen
//! digits, so digits are produced one at a time from their exact conditional
//! law given the prefix. With convergents `p_n/q_n`, the remainder
//! `y = T^n x` has density proportional to `1 / ((1 + s y)(A + B y))` on
//! `[0, 1]` where `s = q_{n-1}/q_n`, `A = (q_n + p_n)/q_n` and
//! `B = (q_{n-1} + p_{n-1})/q_n`. Every quantity stays in `[0, 2]`, and the
//! only small number, `d = sA - B = ±1/q_n²`, is tracked multiplicatively.

use crate::symbolic::Symbol;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct GaussState {
    a: f64,
    b: f64,
    s: f64,
    d: f64,
}

impl GaussState {
    pub(crate) fn initial() -> Self {
        GaussState {
            a: 1.0,
            b: 1.0,
            s: 0.0,
            d: -1.0,
        }
    }

    /// Unnormalised conditional CDF of the remainder, `ln(1 + d t)/d` with
    /// `t = y/(A + B y)`.
    fn cdf(&self, y: f64) -> f64 {
        let t = y / (self.a + self.b * y);
        if self.d == 0.0 {
            t
        } else {
            (self.d * t).ln_1p() / self.d
        }
    }

    /// Probability that the next digit equals `digit` (>= 1).
    pub(crate) fn conditional(&self, digit: Symbol) -> f64 {
        let a = digit as f64;
        (self.cdf(1.0 / a) - self.cdf(1.0 / (a + 1.0))) / self.cdf(1.0)
    }

    /// Draws the next digit from `u` in `(0, 1]` by inverting the CDF.
    pub(crate) fn digit_from_uniform(&self, u: f64) -> Symbol {
        let g = u * self.cdf(1.0);
        let t = if self.d == 0.0 {
            g
        } else {
            (self.d * g).exp_m1() / self.d
        };
        let y = self.a * t / (1.0 - self.b * t);
        let inv = 1.0 / y;
        if inv.is_nan() || inv >= u64::MAX as f64 {
            return u64::MAX;
        }
        (inv.floor() as u64).max(1)
    }

    pub(crate) fn advance(&mut self, digit: Symbol) {
        let a = digit as f64;
        let s_next = 1.0 / (a + self.s);
        let a_next = (a * self.a + self.b) * s_next;
        let b_next = self.a * s_next;
        self.d = -self.d * s_next * s_next;
        self.a = a_next;
        self.b = b_next;
        self.s = s_next;
    }
}

/// `ln P([a_1 .. a_n])` under the Gauss measure.
pub(crate) fn log_prefix_probability(digits: &[Symbol]) -> f64 {
    let mut state = GaussState::initial();
    let mut acc = 0.0;
    for &d in digits {
        acc += state.conditional(d).ln();
        state.advance(d);
    }
    acc
}

/// Gauss measure of the first-digit cylinder `{a_1 = a}`.
pub(crate) fn first_digit_probability(a: Symbol) -> f64 {
    GaussState::initial().conditional(a)
}

/// Entropy of the Gauss map, `π² / (6 ln 2)`.
pub fn gauss_entropy() -> f64 {
    std::f64::consts::PI.powi(2) / (6.0 * std::f64::consts::LN_2)
}
