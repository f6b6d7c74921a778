//! Exact maximization over price lattices by branch and bound.
//!
//! A block of lattice points is discarded only when an upper bound on every
//! value inside it falls below the incumbent, so the result is the same as an
//! exhaustive scan: the largest value, ties resolved to the smallest index
//! (lexicographically in two dimensions). Values of `-inf` mark points that
//! are not candidates.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Points `lower + k * step` for `k >= 1` that lie strictly below `upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    lower: f64,
    step: f64,
    len: usize,
}

impl Lattice {
    pub fn open(lower: f64, upper: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
        }
        if !(lower.is_finite() && upper.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        Ok(Self::open_unchecked(lower, upper, step))
    }

    pub(crate) fn open_unchecked(lower: f64, upper: f64, step: f64) -> Self {
        let span = (upper - lower) / step;
        let len = if span <= 1.0 {
            0
        } else {
            let nearest = span.round();
            let mut n = if (span - nearest).abs() < 1e-9 { nearest - 1.0 } else { span.floor() };
            while n > 0.0 && lower + n * step >= upper {
                n -= 1.0;
            }
            n as usize
        };
        Lattice { lower, step, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn point(&self, index: usize) -> f64 {
        self.lower + (index + 1) as f64 * self.step
    }

    /// Largest index whose point does not exceed `x`, if any.
    pub fn last_at_or_below(&self, x: f64) -> Option<usize> {
        if self.len == 0 || x < self.point(0) {
            return None;
        }
        let guess = ((x - self.lower) / self.step).floor() as i64 - 1;
        let mut i = guess.clamp(0, self.len as i64 - 1) as usize;
        while i + 1 < self.len && self.point(i + 1) <= x {
            i += 1;
        }
        while i > 0 && self.point(i) > x {
            i -= 1;
        }
        Some(i)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.point(i))
    }
}

/// Slack added to bounds before comparing with the incumbent, so that
/// round-off in the bound never discards a genuine improvement.
fn margin(incumbent: f64) -> f64 {
    1e-9 * (incumbent.abs() + 1.0)
}

#[derive(Debug, Clone, Copy)]
struct Block<K> {
    bound: f64,
    key: K,
}

impl<K: Ord> PartialEq for Block<K> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<K: Ord> Eq for Block<K> {}
impl<K: Ord> PartialOrd for Block<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<K: Ord> Ord for Block<K> {
    // larger bound first, then the smaller key
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then_with(|| other.key.cmp(&self.key))
    }
}

#[derive(Debug, Clone, Copy)]
struct Incumbent<I> {
    index: Option<I>,
    value: f64,
}

impl<I: Ord + Copy> Incumbent<I> {
    fn offer(&mut self, index: I, value: f64) {
        let better = value > self.value
            || (value == self.value && value > f64::NEG_INFINITY && self.index.is_some_and(|j| index < j));
        if better {
            self.index = Some(index);
            self.value = value;
        }
    }

    fn prunes(&self, bound: f64) -> bool {
        bound == f64::NEG_INFINITY || (self.value > f64::NEG_INFINITY && bound + margin(self.value) < self.value)
    }
}

/// Maximize `value` over `0..len`, beating `floor` strictly.
///
/// `bound(lo, hi)` must bound `value(i)` for every `i` in `lo..=hi` and may
/// return `-inf` when no index in the range is a candidate.
pub fn maximize_line<B, V>(len: usize, floor: f64, bound: B, value: V) -> Option<(usize, f64)>
where
    B: Fn(usize, usize) -> f64,
    V: Fn(usize) -> f64,
{
    if len == 0 {
        return None;
    }
    let mut best = Incumbent { index: None, value: floor };
    let mut heap = BinaryHeap::new();
    heap.push(Block { bound: bound(0, len - 1), key: (0usize, len - 1) });
    while let Some(Block { bound: b, key: (lo, hi) }) = heap.pop() {
        if best.prunes(b) {
            continue;
        }
        if lo == hi {
            best.offer(lo, value(lo));
            continue;
        }
        let mid = lo + (hi - lo) / 2;
        for (l, h) in [(lo, mid), (mid + 1, hi)] {
            let bb = bound(l, h).min(b);
            if !best.prunes(bb) {
                heap.push(Block { bound: bb, key: (l, h) });
            }
        }
    }
    best.index.map(|i| (i, best.value))
}

/// A rectangle of lattice indices `rows x cols`, both ranges inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rect {
    pub rows: (usize, usize),
    pub cols: (usize, usize),
}

/// Two-dimensional analogue of [`maximize_line`] with lexicographic ties.
pub fn maximize_grid<B, V>(
    rows: usize,
    cols: usize,
    floor: f64,
    bound: B,
    value: V,
) -> Option<((usize, usize), f64)>
where
    B: Fn(Rect) -> f64,
    V: Fn(usize, usize) -> f64,
{
    if rows == 0 || cols == 0 {
        return None;
    }
    let mut best = Incumbent { index: None, value: floor };
    let mut heap = BinaryHeap::new();
    let root = Rect { rows: (0, rows - 1), cols: (0, cols - 1) };
    heap.push(Block { bound: bound(root), key: root });
    while let Some(Block { bound: b, key: rect }) = heap.pop() {
        if best.prunes(b) {
            continue;
        }
        let (r0, r1) = rect.rows;
        let (c0, c1) = rect.cols;
        if r0 == r1 && c0 == c1 {
            best.offer((r0, c0), value(r0, c0));
            continue;
        }
        let halves = if r1 - r0 >= c1 - c0 {
            let mid = r0 + (r1 - r0) / 2;
            [Rect { rows: (r0, mid), cols: rect.cols }, Rect { rows: (mid + 1, r1), cols: rect.cols }]
        } else {
            let mid = c0 + (c1 - c0) / 2;
            [Rect { rows: rect.rows, cols: (c0, mid) }, Rect { rows: rect.rows, cols: (mid + 1, c1) }]
        };
        for half in halves {
            let bb = bound(half).min(b);
            if !best.prunes(bb) {
                heap.push(Block { bound: bb, key: half });
            }
        }
    }
    best.index.map(|i| (i, best.value))
}
