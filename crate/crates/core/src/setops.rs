//! Neighbor-set representations and the early-exit intersections.
//!
//! All intersections iterate a sorted array `A` and probe a membership
//! structure `B`. They only promise an exact answer when `|A ∩ B| > θ`.

use crate::graph::VertexId;

/// Slots scanned from a home bucket: one 64-byte cache line of 4-byte ids.
pub const NEIGHBORHOOD: usize = 16;
const EMPTY: VertexId = VertexId::MAX;
const MIN_CAPACITY: usize = 16;
const MAX_LOAD: f64 = 0.7;
const MAX_PROBE: usize = 256;

/// Anything that answers set-membership queries over vertex ids.
pub trait Membership {
    fn contains(&self, x: VertexId) -> bool;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Membership for [VertexId] {
    #[inline]
    fn contains(&self, x: VertexId) -> bool {
        self.binary_search(&x).is_ok()
    }

    fn len(&self) -> usize {
        <[VertexId]>::len(self)
    }
}

/// Hopscotch hash set of vertex ids with 16-slot neighborhoods tracked by a
/// per-bucket bitmask. Slots are padded past the last bucket instead of
/// wrapping around.
#[derive(Clone, Debug)]
pub struct HopscotchSet {
    slots: Box<[VertexId]>,
    hop: Box<[u16]>,
    shift: u32,
    len: usize,
}

impl Default for HopscotchSet {
    fn default() -> Self {
        Self::with_capacity(0)
    }
}

impl HopscotchSet {
    /// Sized for `expected` elements at load factor 0.7.
    pub fn with_capacity(expected: usize) -> Self {
        let buckets = ((expected as f64 / MAX_LOAD).ceil() as usize)
            .next_power_of_two()
            .max(MIN_CAPACITY);
        Self::with_buckets(buckets)
    }

    fn with_buckets(buckets: usize) -> Self {
        debug_assert!(buckets.is_power_of_two());
        HopscotchSet {
            slots: vec![EMPTY; buckets + NEIGHBORHOOD - 1].into_boxed_slice(),
            hop: vec![0; buckets].into_boxed_slice(),
            shift: 64 - buckets.trailing_zeros(),
            len: 0,
        }
    }

    /// Builds from distinct elements.
    pub fn from_slice(elems: &[VertexId]) -> Self {
        let mut s = Self::with_capacity(elems.len());
        for &x in elems {
            s.insert(x);
        }
        s
    }

    pub fn buckets(&self) -> usize {
        self.hop.len()
    }

    #[inline]
    fn home(&self, x: VertexId) -> usize {
        // Fibonacci hashing
        ((x as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> self.shift) as usize
    }

    /// Inserts `x`; returns false if it was already present.
    pub fn insert(&mut self, x: VertexId) -> bool {
        assert_ne!(x, EMPTY, "vertex id reserved as empty marker");
        if self.contains(x) {
            return false;
        }
        loop {
            if (self.len + 1) as f64 <= self.buckets() as f64 * MAX_LOAD && self.try_place(x) {
                self.len += 1;
                return true;
            }
            self.grow();
        }
    }

    fn try_place(&mut self, x: VertexId) -> bool {
        let home = self.home(x);
        let limit = (home + MAX_PROBE).min(self.slots.len());
        let Some(mut free) = (home..limit).find(|&i| self.slots[i] == EMPTY) else {
            return false;
        };
        while free - home >= NEIGHBORHOOD {
            match self.hop_back(free) {
                Some(f) => free = f,
                None => return false,
            }
        }
        self.slots[free] = x;
        self.hop[home] |= 1 << (free - home);
        true
    }

    /// Moves an element from within reach of `free` into it, returning the
    /// slot it vacated.
    fn hop_back(&mut self, free: usize) -> Option<usize> {
        for bucket in free + 1 - NEIGHBORHOOD..free.min(self.hop.len()) {
            let mask = self.hop[bucket];
            if mask == 0 {
                continue;
            }
            let i = mask.trailing_zeros() as usize;
            let from = bucket + i;
            if from < free {
                self.slots[free] = self.slots[from];
                self.slots[from] = EMPTY;
                self.hop[bucket] = (mask & !(1 << i)) | (1 << (free - bucket));
                return Some(from);
            }
        }
        None
    }

    fn grow(&mut self) {
        let mut buckets = self.buckets() * 2;
        loop {
            let mut bigger = Self::with_buckets(buckets);
            if self.iter().all(|x| bigger.try_place(x)) {
                bigger.len = self.len;
                *self = bigger;
                return;
            }
            buckets *= 2;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.slots.iter().copied().filter(|&x| x != EMPTY)
    }

    /// Checks the hopscotch invariants; used by tests.
    pub fn audit(&self) -> Result<(), String> {
        let mut seen = 0;
        for (slot, &x) in self.slots.iter().enumerate() {
            if x == EMPTY {
                continue;
            }
            seen += 1;
            let home = self.home(x);
            if slot < home || slot - home >= NEIGHBORHOOD {
                return Err(format!("{x} at slot {slot} out of reach of home {home}"));
            }
            if self.hop[home] >> (slot - home) & 1 == 0 {
                return Err(format!("mask of bucket {home} misses slot {slot}"));
            }
        }
        for (bucket, &mask) in self.hop.iter().enumerate() {
            for i in 0..NEIGHBORHOOD {
                if mask >> i & 1 == 1 {
                    let x = self.slots[bucket + i];
                    if x == EMPTY || self.home(x) != bucket {
                        return Err(format!("bucket {bucket} bit {i} points at a stranger"));
                    }
                }
            }
        }
        if seen != self.len {
            return Err(format!("size {} but {seen} occupied slots", self.len));
        }
        let mut all: Vec<_> = self.iter().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err("duplicate element".into());
        }
        Ok(())
    }
}

impl Membership for HopscotchSet {
    #[inline]
    fn contains(&self, x: VertexId) -> bool {
        let home = self.home(x);
        let mut mask = self.hop[home];
        while mask != 0 {
            let i = mask.trailing_zeros() as usize;
            if self.slots[home + i] == x {
                return true;
            }
            mask &= mask - 1;
        }
        false
    }

    fn len(&self) -> usize {
        self.len
    }
}

/// Strictly ascending vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SortedArraySet(Box<[VertexId]>);

impl SortedArraySet {
    pub fn from_sorted(elems: Vec<VertexId>) -> Self {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        SortedArraySet(elems.into_boxed_slice())
    }

    pub fn from_unsorted(mut elems: Vec<VertexId>) -> Self {
        elems.sort_unstable();
        elems.dedup();
        SortedArraySet(elems.into_boxed_slice())
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.0
    }
}

impl Membership for SortedArraySet {
    #[inline]
    fn contains(&self, x: VertexId) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    fn len(&self) -> usize {
        self.0.len()
    }
}

impl std::ops::Deref for SortedArraySet {
    type Target = [VertexId];

    fn deref(&self) -> &[VertexId] {
        &self.0
    }
}

/// Writes `A ∩ B` into `out` (in `A`'s order) and returns its size when it
/// exceeds `theta`. Gives up as soon as too many elements of `A` have missed
/// for the result to exceed `theta`; `out` then holds a partial result.
pub fn intersect_gt<B: Membership + ?Sized>(
    a: &[VertexId],
    b: &B,
    out: &mut Vec<VertexId>,
    theta: usize,
) -> Option<usize> {
    out.clear();
    let (n, m) = (a.len(), b.len());
    if n < theta || m < theta {
        return None;
    }
    // misses still tolerated
    let mut budget = (n - theta) as isize;
    for &x in a {
        if !b.contains(x) {
            budget -= 1;
            if budget <= 0 {
                return None;
            }
        } else {
            out.push(x);
        }
    }
    // only reachable with budget == 0 when n == theta and nothing missed
    (budget > 0).then_some(out.len())
}

/// `|A ∩ B|` when it exceeds `theta`, otherwise `None`.
pub fn intersect_size_gt_val<B: Membership + ?Sized>(
    a: &[VertexId],
    b: &B,
    theta: usize,
) -> Option<usize> {
    let (n, m) = (a.len(), b.len());
    if n <= theta || m <= theta {
        return None;
    }
    let mut budget = n - theta;
    let mut size = 0;
    for &x in a {
        if b.contains(x) {
            size += 1;
        } else {
            budget -= 1;
            if budget == 0 {
                return None;
            }
        }
    }
    Some(size)
}

/// Exactly `|A ∩ B| > theta`, exiting early in both directions.
pub fn intersect_size_gt_bool<B: Membership + ?Sized>(a: &[VertexId], b: &B, theta: usize) -> bool {
    let (n, m) = (a.len(), b.len());
    if n <= theta || m <= theta {
        return false;
    }
    let mut budget = n - theta;
    for (i, &x) in a.iter().enumerate() {
        if !b.contains(x) {
            budget -= 1;
            if budget == 0 {
                return false;
            }
        } else if budget > n - i - 1 {
            return true;
        }
    }
    budget > 0
}

/// Full intersection size without early exits.
pub fn intersection_size<B: Membership + ?Sized>(a: &[VertexId], b: &B) -> usize {
    a.iter().filter(|&&x| b.contains(x)).count()
}

/// Full intersection without early exits.
pub fn intersect_into<B: Membership + ?Sized>(a: &[VertexId], b: &B, out: &mut Vec<VertexId>) {
    out.clear();
    out.extend(a.iter().copied().filter(|&x| b.contains(x)));
}

/// The three thresholded intersections, with the early exits optionally
/// replaced by a full scan followed by the same comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Intersector {
    pub early_exit: bool,
}

impl Default for Intersector {
    fn default() -> Self {
        Intersector { early_exit: true }
    }
}

impl Intersector {
    pub fn gt<B: Membership + ?Sized>(
        self,
        a: &[VertexId],
        b: &B,
        out: &mut Vec<VertexId>,
        theta: usize,
    ) -> Option<usize> {
        if self.early_exit {
            return intersect_gt(a, b, out, theta);
        }
        intersect_into(a, b, out);
        (out.len() > theta).then_some(out.len())
    }

    pub fn size_gt_val<B: Membership + ?Sized>(
        self,
        a: &[VertexId],
        b: &B,
        theta: usize,
    ) -> Option<usize> {
        if self.early_exit {
            return intersect_size_gt_val(a, b, theta);
        }
        let size = intersection_size(a, b);
        (size > theta).then_some(size)
    }

    pub fn size_gt_bool<B: Membership + ?Sized>(self, a: &[VertexId], b: &B, theta: usize) -> bool {
        if self.early_exit {
            return intersect_size_gt_bool(a, b, theta);
        }
        intersection_size(a, b) > theta
    }
}
