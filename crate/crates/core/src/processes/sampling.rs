//! Seeded, reproducible sampling of stationary trajectories.
//!
//! Every sampler is a ChaCha8 stream selected by `(seed, stream)`. For
//! i.i.d. laws the symbol at coordinate `i` is a pure function of the 64-bit
//! word at a fixed position of that stream, so windows, lazily generated
//! trajectories and sequential scans all see the same sequence.

use std::cell::RefCell;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gauss::GaussState;
use super::{ModelKind, ProcessModel};
use crate::error::{Error, Result};
use crate::symbolic::{Interval, Sidedness, Symbol, SymbolWindow, Trajectory};

/// `(seed, stream)` fixes a trajectory bit for bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSeed { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Uniform in `(0, 1]` from the top 53 bits of a word.
#[inline]
pub(crate) fn unit_open_closed(x: u64) -> f64 {
    ((x >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn pick(cumulative: &[f64], u: f64) -> Symbol {
    // u is in (0, 1]; the first bucket whose right edge reaches u is the
    // number of edges below u. Counting avoids an unpredictable branch.
    let below: usize = cumulative.iter().map(|&c| (c < u) as usize).sum();
    below.min(cumulative.len() - 1) as Symbol
}

/// Maps one stream word to an i.i.d. symbol.
#[inline]
fn iid_symbol(model: &ProcessModel, word: u64) -> Symbol {
    let u = unit_open_closed(word);
    match &model.kind {
        ModelKind::IidFinite { cumulative, .. } => pick(cumulative, u),
        ModelKind::IidGeometric { p } => {
            // P(X >= a) = (1-p)^a; u in (0, 1] gives X = floor(ln u / ln(1-p)).
            let x = (u.ln() / (1.0 - p).ln()).floor();
            if x >= u64::MAX as f64 {
                u64::MAX
            } else {
                x as u64
            }
        }
        _ => unreachable!("iid_symbol called on a non-i.i.d. model"),
    }
}

/// Fills `out` with consecutive i.i.d. symbols, one stream word each.
fn fill_page(model: &ProcessModel, rng: &mut ChaCha8Rng, out: &mut [Symbol]) {
    let mut bytes = [0u8; 8 * PAGE];
    let bytes = &mut bytes[..8 * out.len()];
    rng.fill_bytes(bytes);
    let words = bytes
        .chunks_exact(8)
        .map(|b| u64::from_le_bytes(b.try_into().expect("8-byte chunk")));
    match &model.kind {
        ModelKind::IidFinite { cumulative, .. } if cumulative.len() == 2 => {
            let edge = cumulative[0];
            for (sym, w) in out.iter_mut().zip(words) {
                *sym = (unit_open_closed(w) > edge) as Symbol;
            }
        }
        ModelKind::IidFinite { cumulative, .. } => {
            for (sym, w) in out.iter_mut().zip(words) {
                *sym = pick(cumulative, unit_open_closed(w));
            }
        }
        _ => {
            for (sym, w) in out.iter_mut().zip(words) {
                *sym = iid_symbol(model, w);
            }
        }
    }
}

/// Word position (in 32-bit words) of coordinate `coord`.
#[inline]
fn word_pos(coord: i64) -> u128 {
    ((coord as i128 - i64::MIN as i128) as u128) * 2
}

const PAGE_BITS: u32 = 8;
const PAGE: usize = 1 << PAGE_BITS;
const CACHE_SLOTS: usize = 16;

/// Unbounded, lazily generated i.i.d. trajectory.
///
/// Symbols are produced a page at a time and kept in a small cache, so scans that move steadily through coordinates cost about one
/// ChaCha word per symbol. Not `Sync`; each worker builds its own.
pub struct CounterSource<'m> {
    model: &'m ProcessModel,
    sidedness: Sidedness,
    seed: RngSeed,
    cache: RefCell<PageCache>,
}

struct PageCache {
    rng: ChaCha8Rng,
    tags: [Option<u64>; CACHE_SLOTS],
    pages: Vec<Symbol>,
    last: usize,
    victim: usize,
}

impl PageCache {
    /// Slot holding `page`, generating it if absent. Fully associative, so
    /// several scans advancing at different speeds do not evict each other.
    #[inline]
    fn slot(&mut self, model: &ProcessModel, page: u64) -> usize {
        if self.tags[self.last] == Some(page) {
            return self.last;
        }
        let slot = match self.tags.iter().position(|&t| t == Some(page)) {
            Some(s) => s,
            None => {
                let s = self.victim;
                self.victim = (self.victim + 1) % CACHE_SLOTS;
                self.rng.set_word_pos(((page as u128) << PAGE_BITS) * 2);
                fill_page(
                    model,
                    &mut self.rng,
                    &mut self.pages[s * PAGE..(s + 1) * PAGE],
                );
                self.tags[s] = Some(page);
                s
            }
        };
        self.last = slot;
        slot
    }
}

impl<'m> CounterSource<'m> {
    pub fn new(model: &'m ProcessModel, sidedness: Sidedness, seed: RngSeed) -> Result<Self> {
        if !model.is_iid() {
            return Err(Error::Unsupported(
                "random-access sampling needs an i.i.d. model; use a window".into(),
            ));
        }
        Ok(CounterSource {
            model,
            sidedness,
            seed,
            cache: RefCell::new(PageCache {
                rng: seed.rng(),
                tags: [None; CACHE_SLOTS],
                pages: vec![0; PAGE * CACHE_SLOTS],
                last: 0,
                victim: 0,
            }),
        })
    }

    pub fn seed(&self) -> RngSeed {
        self.seed
    }
}

impl Trajectory for CounterSource<'_> {
    fn sidedness(&self) -> Sidedness {
        self.sidedness
    }

    fn extent(&self) -> (i64, i64) {
        match self.sidedness {
            Sidedness::TwoSided => (i64::MIN, i64::MAX),
            Sidedness::OneSided => (0, i64::MAX),
        }
    }

    #[inline]
    fn symbol(&self, coord: i64) -> Result<Symbol> {
        if self.sidedness == Sidedness::OneSided && coord < 0 {
            return Err(Error::Range {
                lo: coord,
                hi: coord,
                have_lo: 0,
                have_hi: i64::MAX,
            });
        }
        let offset = (coord as u64) ^ (1 << 63);
        let page = offset >> PAGE_BITS;
        let within = (offset as usize) & (PAGE - 1);
        let mut cache = self.cache.borrow_mut();
        let slot = cache.slot(self.model, page);
        Ok(cache.pages[slot * PAGE + within])
    }

    fn matches(&self, start: i64, word: &[Symbol]) -> Result<bool> {
        if self.sidedness == Sidedness::OneSided && start < 0 && !word.is_empty() {
            return Err(Error::Range {
                lo: start,
                hi: start + word.len() as i64 - 1,
                have_lo: 0,
                have_hi: i64::MAX,
            });
        }
        let mut offset = (start as u64) ^ (1 << 63);
        let mut rest = word;
        let mut cache = self.cache.borrow_mut();
        while !rest.is_empty() {
            let within = (offset as usize) & (PAGE - 1);
            let take = rest.len().min(PAGE - within);
            let slot = cache.slot(self.model, offset >> PAGE_BITS);
            let base = slot * PAGE + within;
            if cache.pages[base..base + take] != rest[..take] {
                return Ok(false);
            }
            rest = &rest[take..];
            offset += take as u64;
        }
        Ok(true)
    }
}

/// Forward-only stream of stationary symbols starting at a coordinate.
pub struct SequentialSampler<'m> {
    model: &'m ProcessModel,
    rng: ChaCha8Rng,
    state: SeqState,
}

enum SeqState {
    Iid,
    Markov(Option<usize>),
    Gauss(GaussState),
}

impl<'m> SequentialSampler<'m> {
    /// Sampler whose first symbol is the one at coordinate `start`.
    pub fn new(model: &'m ProcessModel, start: i64, seed: RngSeed) -> Result<Self> {
        let mut rng = seed.rng();
        let state = match &model.kind {
            ModelKind::IidFinite { .. } | ModelKind::IidGeometric { .. } => {
                rng.set_word_pos(word_pos(start));
                SeqState::Iid
            }
            ModelKind::Markov(_) => SeqState::Markov(None),
            ModelKind::GaussDigits => {
                if start < 0 {
                    return Err(Error::Model("Gauss digits are one-sided".into()));
                }
                SeqState::Gauss(GaussState::initial())
            }
        };
        Ok(SequentialSampler { model, rng, state })
    }

    #[inline]
    pub fn next_symbol(&mut self) -> Symbol {
        let word = self.rng.next_u64();
        match &mut self.state {
            SeqState::Iid => iid_symbol(self.model, word),
            SeqState::Markov(prev) => {
                let chain = match &self.model.kind {
                    ModelKind::Markov(c) => c,
                    _ => unreachable!(),
                };
                let u = unit_open_closed(word);
                let next = match prev {
                    None => pick(chain.stationary_cumulative(), u),
                    Some(a) => pick(chain.step_cumulative(*a), u),
                } as usize;
                *prev = Some(next);
                next as Symbol
            }
            SeqState::Gauss(state) => {
                let digit = state.digit_from_uniform(unit_open_closed(word));
                state.advance(digit);
                digit
            }
        }
    }
}

impl Iterator for SequentialSampler<'_> {
    type Item = Symbol;

    fn next(&mut self) -> Option<Symbol> {
        Some(self.next_symbol())
    }
}

/// Samples the stationary law restricted to `range`.
///
/// Two-sided Markov windows containing 0 draw `ω_0 ~ π`, run the chain
/// forward, then run the reversed kernel backward. Gauss digits are produced
/// from their exact conditional laws.
pub fn sample_window(
    model: &ProcessModel,
    range: Interval,
    sidedness: Sidedness,
    seed: RngSeed,
) -> Result<SymbolWindow> {
    model.check_sidedness(sidedness)?;
    if sidedness == Sidedness::OneSided && range.lo < 0 {
        return Err(Error::Argument(format!(
            "one-sided window cannot cover negative coordinate {}",
            range.lo
        )));
    }
    let len = range.len() as usize;
    let symbols: Vec<Symbol> = match &model.kind {
        ModelKind::Markov(chain) if range.contains(0) => {
            let mut rng = seed.rng();
            let mut out = vec![0 as Symbol; len];
            let zero = (-range.lo) as usize;
            let mut cur = pick(
                chain.stationary_cumulative(),
                unit_open_closed(rng.next_u64()),
            );
            out[zero] = cur;
            for slot in out.iter_mut().skip(zero + 1) {
                cur = pick(
                    chain.step_cumulative(cur as usize),
                    unit_open_closed(rng.next_u64()),
                );
                *slot = cur;
            }
            cur = out[zero];
            for slot in out[..zero].iter_mut().rev() {
                cur = pick(
                    chain.reversed_cumulative(cur as usize),
                    unit_open_closed(rng.next_u64()),
                );
                *slot = cur;
            }
            out
        }
        _ => SequentialSampler::new(model, range.lo, seed)?
            .take(len)
            .collect(),
    };
    SymbolWindow::new(model.alphabet(), sidedness, range.lo, symbols)
}
