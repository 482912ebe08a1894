//! Forward-streamed trajectories for laws without random access.

use std::cell::RefCell;
use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::processes::{ProcessModel, RngSeed, SequentialSampler};
use crate::symbolic::{Sidedness, Symbol, Trajectory};

/// A trajectory generated forward from `start`, keeping only the symbols
/// between the release mark and the furthest coordinate read.
pub struct StreamBuffer<'m> {
    sidedness: Sidedness,
    inner: RefCell<Inner<'m>>,
}

struct Inner<'m> {
    sampler: SequentialSampler<'m>,
    base: i64,
    buf: VecDeque<Symbol>,
}

impl<'m> StreamBuffer<'m> {
    pub fn new(
        model: &'m ProcessModel,
        sidedness: Sidedness,
        start: i64,
        seed: RngSeed,
    ) -> Result<Self> {
        model.check_sidedness(sidedness)?;
        if sidedness == Sidedness::OneSided && start < 0 {
            return Err(Error::Argument(format!(
                "one-sided stream cannot start at {start}"
            )));
        }
        Ok(StreamBuffer {
            sidedness,
            inner: RefCell::new(Inner {
                sampler: SequentialSampler::new(model, start, seed)?,
                base: start,
                buf: VecDeque::new(),
            }),
        })
    }

    fn discard_below(&self, coord: i64) {
        let mut inner = self.inner.borrow_mut();
        let Inner { sampler, base, buf } = &mut *inner;
        while *base < coord {
            if buf.pop_front().is_none() {
                sampler.next_symbol();
            }
            *base += 1;
        }
    }
}

impl Trajectory for StreamBuffer<'_> {
    fn sidedness(&self) -> Sidedness {
        self.sidedness
    }

    fn extent(&self) -> (i64, i64) {
        (self.inner.borrow().base, i64::MAX)
    }

    /// Forgets every coordinate below `coord`.
    fn release(&self, coord: i64) {
        self.discard_below(coord);
    }

    #[inline]
    fn symbol(&self, coord: i64) -> Result<Symbol> {
        let mut inner = self.inner.borrow_mut();
        let Inner { sampler, base, buf } = &mut *inner;
        if coord < *base {
            return Err(Error::Range {
                lo: coord,
                hi: coord,
                have_lo: *base,
                have_hi: i64::MAX,
            });
        }
        let idx = (coord - *base) as usize;
        while buf.len() <= idx {
            buf.push_back(sampler.next_symbol());
        }
        Ok(buf[idx])
    }
}
