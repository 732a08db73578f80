//! Lazily built, coreness-filtered, relabelled neighbor sets.
//!
//! Each vertex may carry a hash form, a sorted form, or both. A form is
//! built on first request under the vertex's lock and published by setting
//! its flag bit with release ordering; readers that observe the bit (acquire)
//! read the form without locking. Published forms are never mutated.
//!
//! Neighbors whose coreness is below the incumbent size at build time are
//! left out. The incumbent only grows, so a dropped neighbor can never be
//! part of a clique that beats any later incumbent.

use std::cell::UnsafeCell;
use std::str::FromStr;
use std::sync::atomic::{AtomicU8, AtomicUsize, Ordering};

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::{CsrGraph, InducedSubgraph, VertexId};
use crate::incumbent::Incumbent;
use crate::ordering::{CorenessInfo, CorenessLevels, VertexOrder};
use crate::par::Execution;
use crate::setops::{HopscotchSet, Membership, SortedArraySet};

const HASHED: u8 = 1;
const SORTED: u8 = 2;

/// Vertices above this degree default to the hash form.
pub const HASH_DEGREE_THRESHOLD: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrepopulatePolicy {
    /// Hash forms for every vertex whose coreness reaches the incumbent.
    #[default]
    Must,
    All,
    None,
}

impl FromStr for PrepopulatePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "must" => Ok(PrepopulatePolicy::Must),
            "all" => Ok(PrepopulatePolicy::All),
            "none" => Ok(PrepopulatePolicy::None),
            other => Err(Error::Config(format!(
                "unknown prepopulate policy {other:?}"
            ))),
        }
    }
}

/// Either published representation of a neighborhood.
#[derive(Clone, Copy, Debug)]
pub enum Neighborhood<'a> {
    Hashed(&'a HopscotchSet),
    Sorted(&'a SortedArraySet),
}

impl Membership for Neighborhood<'_> {
    #[inline]
    fn contains(&self, x: VertexId) -> bool {
        match self {
            Neighborhood::Hashed(h) => h.contains(x),
            Neighborhood::Sorted(s) => s.contains(x),
        }
    }

    fn len(&self) -> usize {
        match self {
            Neighborhood::Hashed(h) => Membership::len(*h),
            Neighborhood::Sorted(s) => Membership::len(*s),
        }
    }
}

pub struct LazyGraph<'g> {
    base: &'g CsrGraph,
    order: VertexOrder,
    coreness: CorenessInfo,
    levels: CorenessLevels,
    incumbent: &'g Incumbent,
    flags: Box<[AtomicU8]>,
    locks: Box<[Mutex<()>]>,
    hashed: Box<[UnsafeCell<Option<Box<HopscotchSet>>>]>,
    sorted: Box<[UnsafeCell<Option<SortedArraySet>>]>,
    hash_builds: AtomicUsize,
    sorted_builds: AtomicUsize,
}

// SAFETY: a cell is written only by the holder of the matching lock and only
// while its flag bit is clear; the bit is then set with release ordering and
// never cleared. Shared references into a cell are handed out only after the
// bit was observed set with acquire ordering.
unsafe impl Sync for LazyGraph<'_> {}

impl<'g> LazyGraph<'g> {
    /// `coreness` is indexed by input id; it is re-indexed by relabelled id.
    pub fn new(
        base: &'g CsrGraph,
        order: VertexOrder,
        coreness: &CorenessInfo,
        incumbent: &'g Incumbent,
    ) -> Self {
        let n = base.num_vertices();
        assert_eq!(order.len(), n);
        let coreness = coreness.relabel(&order);
        let levels = CorenessLevels::new(&coreness);
        LazyGraph {
            base,
            order,
            coreness,
            levels,
            incumbent,
            flags: (0..n).map(|_| AtomicU8::new(0)).collect(),
            locks: (0..n).map(|_| Mutex::new(())).collect(),
            hashed: (0..n).map(|_| UnsafeCell::new(None)).collect(),
            sorted: (0..n).map(|_| UnsafeCell::new(None)).collect(),
            hash_builds: AtomicUsize::new(0),
            sorted_builds: AtomicUsize::new(0),
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.base.num_vertices()
    }

    pub fn base(&self) -> &'g CsrGraph {
        self.base
    }

    pub fn order(&self) -> &VertexOrder {
        &self.order
    }

    pub fn incumbent(&self) -> &'g Incumbent {
        self.incumbent
    }

    /// Coreness by relabelled id.
    #[inline]
    pub fn coreness(&self, v: VertexId) -> u32 {
        self.coreness.get(v)
    }

    pub fn coreness_info(&self) -> &CorenessInfo {
        &self.coreness
    }

    pub fn degeneracy(&self) -> u32 {
        self.coreness.degeneracy()
    }

    pub fn levels(&self) -> &CorenessLevels {
        &self.levels
    }

    /// Unfiltered degree of relabelled vertex `v`.
    pub fn degree(&self, v: VertexId) -> usize {
        self.base.degree(self.order.original(v))
    }

    pub fn has_hashed(&self, v: VertexId) -> bool {
        self.flags[v as usize].load(Ordering::Acquire) & HASHED != 0
    }

    pub fn has_sorted(&self, v: VertexId) -> bool {
        self.flags[v as usize].load(Ordering::Acquire) & SORTED != 0
    }

    /// Number of hash forms built so far.
    pub fn hash_builds(&self) -> usize {
        self.hash_builds.load(Ordering::Relaxed)
    }

    pub fn sorted_builds(&self) -> usize {
        self.sorted_builds.load(Ordering::Relaxed)
    }

    /// Relabelled neighbors of `v` that pass the coreness filter right now.
    fn filtered_neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        let floor = self.incumbent.size();
        self.base
            .neighbors(self.order.original(v))
            .iter()
            .map(|&u| self.order.relabelled(u))
            .filter(move |&u| self.coreness(u) as usize >= floor)
    }

    pub fn hashed(&self, v: VertexId) -> &HopscotchSet {
        let i = v as usize;
        if self.flags[i].load(Ordering::Acquire) & HASHED == 0 {
            let _guard = self.locks[i].lock();
            if self.flags[i].load(Ordering::Acquire) & HASHED == 0 {
                let mut set = HopscotchSet::with_capacity(self.degree(v));
                for u in self.filtered_neighbors(v) {
                    set.insert(u);
                }
                // SAFETY: lock held and flag clear, so no reader or writer
                // can touch this cell.
                unsafe { *self.hashed[i].get() = Some(Box::new(set)) };
                self.flags[i].fetch_or(HASHED, Ordering::Release);
                self.hash_builds.fetch_add(1, Ordering::Relaxed);
            }
        }
        // SAFETY: flag observed set; the cell is immutable from now on.
        unsafe { (*self.hashed[i].get()).as_deref().expect("published") }
    }

    pub fn sorted(&self, v: VertexId) -> &SortedArraySet {
        let i = v as usize;
        if self.flags[i].load(Ordering::Acquire) & SORTED == 0 {
            let _guard = self.locks[i].lock();
            if self.flags[i].load(Ordering::Acquire) & SORTED == 0 {
                let mut elems: Vec<VertexId> = Vec::with_capacity(self.degree(v));
                elems.extend(self.filtered_neighbors(v));
                elems.sort_unstable();
                // SAFETY: as in `hashed`.
                unsafe { *self.sorted[i].get() = Some(SortedArraySet::from_sorted(elems)) };
                self.flags[i].fetch_or(SORTED, Ordering::Release);
                self.sorted_builds.fetch_add(1, Ordering::Relaxed);
            }
        }
        // SAFETY: as in `hashed`.
        unsafe { (*self.sorted[i].get()).as_ref().expect("published") }
    }

    /// An existing form if there is one (hash preferred), otherwise a new
    /// hash form for high-degree vertices and a sorted one for the rest.
    pub fn any(&self, v: VertexId) -> Neighborhood<'_> {
        let flags = self.flags[v as usize].load(Ordering::Acquire);
        if flags & HASHED != 0 || (flags & SORTED == 0 && self.degree(v) > HASH_DEGREE_THRESHOLD) {
            Neighborhood::Hashed(self.hashed(v))
        } else {
            Neighborhood::Sorted(self.sorted(v))
        }
    }

    /// Ascending filtered neighbors with a larger relabelled id than `v`.
    pub fn right_neighborhood(&self, v: VertexId) -> &[VertexId] {
        let s = self.sorted(v).as_slice();
        &s[s.partition_point(|&u| u <= v)..]
    }

    /// `G[members]` with adjacency read from the hash forms. Every member
    /// must have coreness at least the current incumbent size, which makes
    /// the filtered forms exact on the member set.
    pub fn induced_subgraph(&self, members: Vec<VertexId>) -> InducedSubgraph {
        let sets: Vec<&HopscotchSet> = members.iter().map(|&u| self.hashed(u)).collect();
        let ids = members.clone();
        InducedSubgraph::from_index_predicate(members, |i, j| sets[i].contains(ids[j]))
    }

    /// Eagerly builds hash forms according to `policy`.
    pub fn prepopulate(&self, policy: PrepopulatePolicy, exec: Execution) {
        let start = match policy {
            PrepopulatePolicy::None => return,
            PrepopulatePolicy::All => 0,
            PrepopulatePolicy::Must => {
                let floor = self.incumbent.size();
                self.coreness
                    .coreness()
                    .partition_point(|&c| (c as usize) < floor)
            }
        };
        exec.for_each_index(start..self.num_vertices(), |v| {
            self.hashed(v as VertexId);
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordering::{determine_sort_order, kcore_sequential};
    use crate::{gen, par::with_threads};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn k5_pendant() -> CsrGraph {
        let mut edges = Vec::new();
        for u in 0..5 {
            for v in u + 1..5 {
                edges.push((u, v));
            }
        }
        edges.push((0, 5));
        CsrGraph::from_dense_edges(6, &edges)
    }

    fn build<'g>(g: &'g CsrGraph, inc: &'g Incumbent) -> LazyGraph<'g> {
        let c = kcore_sequential(g, 0);
        let o = determine_sort_order(g, &c, Execution::Sequential);
        LazyGraph::new(g, o, &c, inc)
    }

    fn sorted_of(set: &HopscotchSet) -> Vec<VertexId> {
        let mut v: Vec<_> = set.iter().collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn triangle_unfiltered() {
        let g = gen::complete(3);
        let inc = Incumbent::new();
        let h = build(&g, &inc);
        for v in 0..3 {
            assert_eq!(Membership::len(h.hashed(v)), 2);
        }
        assert_eq!(h.sorted(0).as_slice(), &[1, 2]);
        assert_eq!(h.right_neighborhood(0), &[1, 2]);
        assert!(h.right_neighborhood(2).is_empty());
    }

    #[test]
    fn coreness_filter_drops_pendant() {
        let g = k5_pendant();
        let inc = Incumbent::new();
        inc.try_improve(&[0, 1, 2]);
        let h = build(&g, &inc);
        // relabelled: pendant is 0, the hub (input id 0) is last
        let hub = h.order().relabelled(0);
        let pendant = h.order().relabelled(5);
        assert_eq!(pendant, 0);
        let set = h.hashed(hub);
        assert_eq!(Membership::len(set), 4);
        assert!(!set.contains(pendant));
        assert!(!h.sorted(hub).contains(pendant));
        // pendant keeps nothing: its only neighbor passes, itself does not matter
        assert_eq!(h.sorted(pendant).as_slice(), &[hub]);
    }

    #[test]
    fn memoized_forms_are_not_rebuilt() {
        let g = gen::gnp(40, 0.3, 1);
        let inc = Incumbent::new();
        let h = build(&g, &inc);
        let a = h.hashed(7) as *const HopscotchSet;
        let b = h.hashed(7) as *const HopscotchSet;
        assert_eq!(a, b);
        assert_eq!(h.hash_builds(), 1);
        let isolated = CsrGraph::from_dense_edges(2, &[]);
        let h2 = build(&isolated, &inc);
        assert!(h2.sorted(0).is_empty());
    }

    #[test]
    fn any_picks_form_by_degree_and_cache() {
        // vertex 0 has degree 20, vertex 21 has degree 5
        let mut edges: Vec<(VertexId, VertexId)> = (1..=20).map(|u| (0, u)).collect();
        edges.extend((22..27).map(|u| (21, u)));
        let g = CsrGraph::from_dense_edges(27, &edges);
        let inc = Incumbent::new();
        let h = build(&g, &inc);
        let hi = h.order().relabelled(0);
        let lo = h.order().relabelled(21);
        assert!(matches!(h.any(hi), Neighborhood::Hashed(_)));
        assert!(matches!(h.any(lo), Neighborhood::Sorted(_)));
        // sorted form cached for a high-degree vertex is reused
        let other = h.order().relabelled(1);
        h.sorted(other);
        assert!(matches!(h.any(other), Neighborhood::Sorted(_)));
        assert!(!h.has_hashed(other));
        h.hashed(other);
        assert!(matches!(h.any(other), Neighborhood::Hashed(_)));
    }

    #[test]
    fn prepopulate_policies() {
        let g = k5_pendant();
        let inc = Incumbent::new();
        inc.try_improve(&[0, 1, 2]);
        let h = build(&g, &inc);
        h.prepopulate(PrepopulatePolicy::None, Execution::Sequential);
        assert_eq!(h.hash_builds(), 0);
        h.prepopulate(PrepopulatePolicy::Must, Execution::Parallel);
        assert_eq!(h.hash_builds(), 5);
        assert!(!h.has_hashed(h.order().relabelled(5)));

        let tri = gen::complete(3);
        let inc0 = Incumbent::new();
        let h = build(&tri, &inc0);
        h.prepopulate(PrepopulatePolicy::All, Execution::Sequential);
        assert_eq!(h.hash_builds(), 3);
    }

    #[test]
    fn right_neighborhoods_partition_edges() {
        let g = gen::gnp(20, 0.3, 4);
        let inc = Incumbent::new();
        let h = build(&g, &inc);
        let total: usize = (0..20).map(|v| h.right_neighborhood(v).len()).sum();
        assert_eq!(total, g.num_edges());
    }

    #[test]
    fn forms_differ_only_below_the_later_incumbent() {
        let g = gen::planted_clique(60, 0.15, 8, 3);
        let inc = Incumbent::new();
        let h = build(&g, &inc);
        for v in 0..60 {
            h.sorted(v);
        }
        inc.try_improve(&[0, 1, 2, 3, 4]);
        for v in 0..60 {
            let hashed = sorted_of(h.hashed(v));
            let sorted = h.sorted(v).as_slice();
            assert!(hashed.iter().all(|u| sorted.contains(u)));
            for u in sorted.iter().filter(|u| !hashed.contains(u)) {
                assert!((h.coreness(*u) as usize) < 5);
            }
        }
    }

    #[test]
    fn concurrent_access_builds_each_form_once() {
        let g = gen::gnp(300, 0.1, 8);
        let inc = Incumbent::new();
        let h = build(&g, &inc);
        let requested: Vec<AtomicU8> = (0..300).map(|_| AtomicU8::new(0)).collect();
        with_threads(8, |exec| {
            exec.for_each_index(0..8, |t| {
                let mut rng = ChaCha8Rng::seed_from_u64(t as u64);
                for _ in 0..2000 {
                    let v = rng.gen_range(0..300u32);
                    if rng.gen_bool(0.5) {
                        let set = h.hashed(v);
                        assert_eq!(Membership::len(set), g.degree(h.order().original(v)));
                        requested[v as usize].fetch_or(HASHED, Ordering::Relaxed);
                    } else {
                        let s = h.sorted(v);
                        assert!(s.windows(2).all(|w| w[0] < w[1]));
                        assert_eq!(s.len(), g.degree(h.order().original(v)));
                        requested[v as usize].fetch_or(SORTED, Ordering::Relaxed);
                    }
                }
            });
        });
        let want_h = requested
            .iter()
            .filter(|f| f.load(Ordering::Relaxed) & HASHED != 0)
            .count();
        let want_s = requested
            .iter()
            .filter(|f| f.load(Ordering::Relaxed) & SORTED != 0)
            .count();
        assert_eq!(h.hash_builds(), want_h);
        assert_eq!(h.sorted_builds(), want_s);
    }
}
