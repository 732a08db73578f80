//! Sub-problem engines for one neighborhood: a branch-and-bound clique
//! search and a vertex-cover decision procedure on the complement, wrapped in
//! a binary search that turns covers back into cliques.

use crate::bitset::{BitMatrix, BitSet};
use crate::graph::{complement_adjacency, ComplementAdjacency, InducedSubgraph, VertexId};
use crate::incumbent::CliqueSink;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McOptions {
    /// Prune with the greedy coloring bound in addition to `|C| + |P|`.
    pub coloring: bool,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { coloring: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KvcOptions {
    /// Apply the high-degree and degree ≤ 2 reductions.
    pub kernels: bool,
}

impl Default for KvcOptions {
    fn default() -> Self {
        KvcOptions { kernels: true }
    }
}

/// Colors used by greedy sequential coloring of `candidates` in index order,
/// stopping once `cap` is exceeded.
fn color_classes(adj: &BitMatrix, candidates: &BitSet, cap: usize) -> usize {
    let mut uncolored = candidates.clone();
    let mut colors = 0;
    while !uncolored.is_empty() {
        colors += 1;
        if colors > cap {
            break;
        }
        // one color class: a greedy independent set in index order
        let mut open = uncolored.clone();
        while let Some(v) = open.first() {
            open.remove(v);
            open.difference_with(adj.row(v));
            uncolored.remove(v);
        }
    }
    colors
}

/// Color count of greedy sequential coloring in member order; never below
/// the clique number.
pub fn greedy_color_bound(h: &InducedSubgraph) -> usize {
    color_classes(&h.adjacency_matrix(), &BitSet::full(h.len()), usize::MAX)
}

struct CliqueSearch<'a> {
    adj: BitMatrix,
    members: &'a [VertexId],
    base: &'a [VertexId],
    sink: &'a dyn CliqueSink,
    opts: McOptions,
    current: Vec<usize>,
    best: usize,
}

impl CliqueSearch<'_> {
    fn bound(&self) -> usize {
        self.best.max(self.sink.threshold())
    }

    fn report(&mut self) {
        let size = self.base.len() + self.current.len();
        if size <= self.bound() {
            return;
        }
        self.best = size;
        let mut clique = self.base.to_vec();
        clique.extend(self.current.iter().map(|&i| self.members[i]));
        self.sink.offer(&clique);
    }

    fn expand(&mut self, mut candidates: BitSet, mut excluded: BitSet) {
        if self.sink.cancelled() {
            return;
        }
        let size = self.base.len() + self.current.len();
        let count = candidates.count();
        if count == 0 {
            self.report();
            return;
        }
        let bound = self.bound();
        if size + count <= bound {
            return;
        }
        if self.opts.coloring
            && size + color_classes(&self.adj, &candidates, bound.saturating_sub(size)) <= bound
        {
            return;
        }

        // Tomita pivot: the vertex of P ∪ X with most neighbors in P
        let pivot = candidates
            .iter()
            .chain(excluded.iter())
            .max_by_key(|&w| {
                (
                    self.adj.row(w).intersection_count(&candidates),
                    std::cmp::Reverse(w),
                )
            })
            .expect("candidates non-empty");
        let mut branches = candidates.clone();
        branches.difference_with(self.adj.row(pivot));

        for v in branches.iter() {
            let row = self.adj.row(v);
            self.current.push(v);
            self.expand(candidates.intersection(row), excluded.intersection(row));
            self.current.pop();
            candidates.remove(v);
            excluded.insert(v);
            if self.base.len() + self.current.len() + candidates.count() <= self.bound() {
                break;
            }
        }
    }
}

/// Searches for the largest clique of `base ∪ K` with `K` a clique of `h`,
/// reporting it to `sink` when it beats the sink's threshold. Every member of
/// `h` must be adjacent to all of `base`.
pub fn mc_branch_bound(
    h: &InducedSubgraph,
    base: &[VertexId],
    sink: &dyn CliqueSink,
    opts: McOptions,
) {
    let mut search = CliqueSearch {
        adj: h.adjacency_matrix(),
        members: h.members(),
        base,
        sink,
        opts,
        current: Vec::new(),
        best: 0,
    };
    search.expand(BitSet::full(h.len()), BitSet::new(h.len()));
}

/// A k-vertex-cover instance over the rows of a complement graph.
#[derive(Clone, Debug)]
pub struct KvcInstance<'a> {
    rows: &'a BitMatrix,
    /// Vertices not yet decided.
    pub active: BitSet,
    /// Remaining cover budget; negative means infeasible.
    pub budget: isize,
    /// Vertices committed to the cover so far.
    pub cover: Vec<usize>,
}

impl<'a> KvcInstance<'a> {
    pub fn new(comp: &'a ComplementAdjacency, k: usize) -> Self {
        KvcInstance {
            rows: comp.rows(),
            active: BitSet::full(comp.len()),
            budget: k as isize,
            cover: Vec::new(),
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rows.row(v).intersection_count(&self.active)
    }

    pub fn num_edges(&self) -> usize {
        self.active.iter().map(|v| self.degree(v)).sum::<usize>() / 2
    }

    pub fn max_degree(&self) -> usize {
        self.active
            .iter()
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    fn take(&mut self, v: usize) {
        self.active.remove(v);
        self.cover.push(v);
        self.budget -= 1;
    }

    fn feasible_so_far(&self) -> bool {
        self.budget >= 0
    }
}

/// Forces every vertex of degree above the budget into the cover, then
/// rejects instances with more edges than `budget²`. Returns false when
/// infeasible.
pub fn buss_kernel(inst: &mut KvcInstance) -> bool {
    loop {
        if !inst.feasible_so_far() {
            return false;
        }
        let heavy = inst
            .active
            .iter()
            .find(|&v| inst.degree(v) as isize > inst.budget);
        match heavy {
            Some(v) => inst.take(v),
            None => break,
        }
    }
    let k = inst.budget as usize;
    inst.num_edges() <= k * k
}

/// Degree 0: drop. Degree 1: take the neighbor. Degree 2 inside a triangle:
/// take both neighbors. Applied to a fixpoint; vertex-merging cases are not
/// handled. Returns false when the budget runs out.
pub fn low_degree_kernel(inst: &mut KvcInstance) -> bool {
    let mut changed = true;
    while changed {
        changed = false;
        let snapshot: Vec<usize> = inst.active.iter().collect();
        for v in snapshot {
            if !inst.active.get(v) {
                continue;
            }
            let nbrs = inst.rows.row(v).intersection(&inst.active);
            match nbrs.count() {
                0 => {
                    inst.active.remove(v);
                }
                1 => {
                    let u = nbrs.first().expect("one neighbor");
                    inst.take(u);
                    inst.active.remove(v);
                    changed = true;
                }
                2 => {
                    let mut it = nbrs.iter();
                    let (a, b) = (it.next().unwrap(), it.next().unwrap());
                    if inst.rows.get(a, b) {
                        inst.take(a);
                        inst.take(b);
                        inst.active.remove(v);
                        changed = true;
                    }
                }
                _ => {}
            }
            if !inst.feasible_so_far() {
                return false;
            }
        }
    }
    true
}

/// Exact cover when every remaining vertex has degree at most two: each
/// path with `e` edges needs `⌈e/2⌉` vertices, each cycle on `c` vertices
/// needs `⌈c/2⌉`. Adds the cover and returns whether it fits the budget.
pub fn path_cycle_cover(inst: &mut KvcInstance) -> bool {
    debug_assert!(inst.max_degree() <= 2);
    let mut seen = BitSet::new(inst.active.universe());
    let starts: Vec<usize> = inst.active.iter().collect();
    let mut chosen = Vec::new();
    // paths first (start at an endpoint), then whatever is left are cycles
    for pass in 0..2 {
        for &s in &starts {
            if seen.get(s) || (pass == 0 && inst.degree(s) == 2) {
                continue;
            }
            let mut walk = vec![s];
            seen.insert(s);
            let mut prev = usize::MAX;
            let mut cur = s;
            loop {
                let next = inst
                    .rows
                    .row(cur)
                    .intersection(&inst.active)
                    .iter()
                    .find(|&u| u != prev && !seen.get(u));
                match next {
                    Some(u) => {
                        seen.insert(u);
                        walk.push(u);
                        prev = cur;
                        cur = u;
                    }
                    None => break,
                }
            }
            chosen.extend(walk.iter().skip(1).step_by(2));
            if pass == 1 && walk.len() % 2 == 1 && walk.len() > 1 {
                chosen.push(walk[0]);
            }
        }
    }
    for v in chosen {
        inst.take(v);
    }
    inst.active = BitSet::new(inst.active.universe());
    inst.feasible_so_far()
}

struct CoverSearch<'s> {
    opts: KvcOptions,
    cancelled: &'s dyn Fn() -> bool,
}

impl CoverSearch<'_> {
    fn solve(&self, mut inst: KvcInstance) -> Option<Vec<usize>> {
        if (self.cancelled)() {
            return None;
        }
        if self.opts.kernels {
            loop {
                if !buss_kernel(&mut inst) {
                    return None;
                }
                let before = inst.cover.len();
                if !low_degree_kernel(&mut inst) {
                    return None;
                }
                if inst.cover.len() == before {
                    break;
                }
            }
        }
        if !inst.feasible_so_far() {
            return None;
        }
        let degrees: Vec<(usize, usize)> =
            inst.active.iter().map(|v| (v, inst.degree(v))).collect();
        let max_deg = degrees.iter().map(|&(_, d)| d).max().unwrap_or(0);
        if max_deg == 0 {
            return Some(inst.cover);
        }
        if inst.budget == 0 {
            return None;
        }
        if max_deg <= 2 {
            return path_cycle_cover(&mut inst).then_some(inst.cover);
        }

        // branch on the smallest-index vertex of maximum degree
        let v = degrees
            .iter()
            .find(|&&(_, d)| d == max_deg)
            .map(|&(v, _)| v)
            .expect("non-empty");
        let mut with_v = inst.clone();
        with_v.take(v);
        if let Some(cover) = self.solve(with_v) {
            return Some(cover);
        }
        if max_deg as isize > inst.budget {
            return None;
        }
        let nbrs = inst.rows.row(v).intersection(&inst.active);
        inst.active.remove(v);
        for u in nbrs.iter() {
            inst.take(u);
        }
        self.solve(inst)
    }
}

/// A vertex cover of size at most `k` (member indices), if one exists.
pub fn kvc_cover_with(
    comp: &ComplementAdjacency,
    k: usize,
    opts: KvcOptions,
    cancelled: &dyn Fn() -> bool,
) -> Option<Vec<usize>> {
    CoverSearch { opts, cancelled }.solve(KvcInstance::new(comp, k))
}

pub fn kvc_cover(comp: &ComplementAdjacency, k: usize, opts: KvcOptions) -> Option<Vec<usize>> {
    kvc_cover_with(comp, k, opts, &|| false)
}

/// Whether a vertex cover of size at most `k` exists.
pub fn kvc_decision(comp: &ComplementAdjacency, k: usize) -> bool {
    kvc_cover(comp, k, KvcOptions::default()).is_some()
}

/// Size of a minimum vertex cover, by binary search over `k`.
pub fn min_vertex_cover_size(comp: &ComplementAdjacency, opts: KvcOptions) -> usize {
    let (mut lo, mut hi) = (0, comp.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if kvc_cover(comp, mid, opts).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Degeneracy of a small subgraph by repeated min-degree removal.
pub fn local_degeneracy(h: &InducedSubgraph) -> usize {
    let n = h.len();
    let mut deg: Vec<usize> = (0..n).map(|i| h.adjacency(i).len()).collect();
    let mut alive = vec![true; n];
    let mut degeneracy = 0;
    for _ in 0..n {
        let v = (0..n)
            .filter(|&i| alive[i])
            .min_by_key(|&i| deg[i])
            .expect("vertices remain");
        degeneracy = degeneracy.max(deg[v]);
        alive[v] = false;
        for &u in h.adjacency(v) {
            if alive[u as usize] {
                deg[u as usize] -= 1;
            }
        }
    }
    degeneracy
}

/// Finds the largest clique of `h` through vertex covers of its complement
/// and reports `base ∪ clique` when it beats the sink's threshold. The
/// clique size is binary-searched between what is needed to beat the
/// threshold and the degeneracy bound of `h`.
pub fn max_clique_via_kvc(
    h: &InducedSubgraph,
    base: &[VertexId],
    sink: &dyn CliqueSink,
    opts: KvcOptions,
) {
    let n = h.len();
    // a clique of h must exceed this size to help
    let need = sink.threshold().saturating_sub(base.len());
    if n <= need {
        return;
    }
    let hi = n.min(local_degeneracy(h) + 1);
    if hi <= need {
        return;
    }
    let comp = complement_adjacency(h);
    let cancelled = || sink.cancelled();
    let (mut lo, mut hi) = (need, hi);
    let mut best: Option<Vec<usize>> = None;
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        match kvc_cover_with(&comp, n - mid, opts, &cancelled) {
            Some(cover) => {
                lo = mid;
                best = Some(cover);
            }
            None if sink.cancelled() => return,
            None => hi = mid - 1,
        }
    }
    let Some(cover) = best else { return };
    let mut in_cover = vec![false; n];
    for c in cover {
        in_cover[c] = true;
    }
    let mut clique = base.to_vec();
    clique.extend((0..n).filter(|&i| !in_cover[i]).map(|i| h.members()[i]));
    if clique.len() > sink.threshold() {
        sink.offer(&clique);
    }
}
