//! Coreness (with a degree floor), degeneracy and the coreness-then-degree
//! relabelling.

use std::ops::Range;
use std::sync::atomic::{AtomicBool, AtomicU32, Ordering};

use crate::graph::{CsrGraph, VertexId};
use crate::par::Execution;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorenessInfo {
    coreness: Vec<u32>,
    degeneracy: u32,
    floor: usize,
}

impl CorenessInfo {
    pub fn coreness(&self) -> &[u32] {
        &self.coreness
    }

    #[inline]
    pub fn get(&self, v: VertexId) -> u32 {
        self.coreness[v as usize]
    }

    pub fn degeneracy(&self) -> u32 {
        self.degeneracy
    }

    /// Incumbent size that was used to pre-filter low-degree vertices.
    pub fn floor(&self) -> usize {
        self.floor
    }

    fn from_values(coreness: Vec<u32>, floor: usize) -> Self {
        let degeneracy = coreness.iter().copied().max().unwrap_or(0);
        CorenessInfo {
            coreness,
            degeneracy,
            floor,
        }
    }

    /// Same values re-indexed by relabelled id.
    pub fn relabel(&self, order: &VertexOrder) -> CorenessInfo {
        let coreness = order
            .to_original()
            .iter()
            .map(|&v| self.coreness[v as usize])
            .collect();
        CorenessInfo {
            coreness,
            degeneracy: self.degeneracy,
            floor: self.floor,
        }
    }
}

/// Coreness of every vertex. Vertices of degree below `floor` are left out of
/// the peeling and get their degree as coreness, an upper bound that is below
/// the floor anyway.
pub fn kcore(g: &CsrGraph, floor: usize, exec: Execution) -> CorenessInfo {
    if exec.is_parallel() {
        kcore_rounds(g, floor, exec)
    } else {
        kcore_sequential(g, floor)
    }
}

/// Matula–Beck bucket peeling.
pub fn kcore_sequential(g: &CsrGraph, floor: usize) -> CorenessInfo {
    let n = g.num_vertices();
    let active: Vec<bool> = (0..n as VertexId).map(|v| g.degree(v) >= floor).collect();
    let mut coreness = vec![0u32; n];
    let mut deg = vec![0usize; n];
    let mut max_deg = 0;
    for v in 0..n {
        if active[v] {
            deg[v] = g
                .neighbors(v as VertexId)
                .iter()
                .filter(|&&u| active[u as usize])
                .count();
            max_deg = max_deg.max(deg[v]);
        } else {
            coreness[v] = g.degree(v as VertexId) as u32;
        }
    }

    // bin sort active vertices by residual degree
    let mut bin_start = vec![0usize; max_deg + 2];
    for v in 0..n {
        if active[v] {
            bin_start[deg[v] + 1] += 1;
        }
    }
    for d in 0..=max_deg {
        bin_start[d + 1] += bin_start[d];
    }
    let total = bin_start[max_deg + 1];
    let mut order = vec![0 as VertexId; total];
    let mut pos = vec![0usize; n];
    let mut fill = bin_start.clone();
    for v in 0..n {
        if active[v] {
            pos[v] = fill[deg[v]];
            order[pos[v]] = v as VertexId;
            fill[deg[v]] += 1;
        }
    }

    for i in 0..total {
        let v = order[i] as usize;
        coreness[v] = deg[v] as u32;
        for &u in g.neighbors(v as VertexId) {
            let u = u as usize;
            if !active[u] || deg[u] <= deg[v] {
                continue;
            }
            // move u to the front of its bin, then shrink that bin
            let du = deg[u];
            let front = bin_start[du];
            let w = order[front] as usize;
            if w != u {
                order.swap(pos[u], front);
                pos[w] = pos[u];
                pos[u] = front;
            }
            bin_start[du] = front + 1;
            deg[u] -= 1;
        }
    }
    CorenessInfo::from_values(coreness, floor)
}

/// Level-synchronous peeling: every round removes all vertices whose
/// residual degree is at most the current level.
pub fn kcore_rounds(g: &CsrGraph, floor: usize, exec: Execution) -> CorenessInfo {
    let n = g.num_vertices();
    let ids: Vec<VertexId> = (0..n as VertexId).collect();
    let removed: Vec<AtomicBool> = ids
        .iter()
        .map(|&v| AtomicBool::new(g.degree(v) < floor))
        .collect();
    let coreness: Vec<AtomicU32> = ids
        .iter()
        .map(|&v| {
            AtomicU32::new(if g.degree(v) < floor {
                g.degree(v) as u32
            } else {
                0
            })
        })
        .collect();
    let deg: Vec<AtomicU32> = exec
        .map(&ids, |&v| {
            if removed[v as usize].load(Ordering::Relaxed) {
                return 0;
            }
            g.neighbors(v)
                .iter()
                .filter(|&&u| !removed[u as usize].load(Ordering::Relaxed))
                .count() as u32
        })
        .into_iter()
        .map(AtomicU32::new)
        .collect();

    let mut remaining: Vec<VertexId> = ids
        .into_iter()
        .filter(|&v| !removed[v as usize].load(Ordering::Relaxed))
        .collect();
    let mut level = 0u32;
    while !remaining.is_empty() {
        let mut frontier: Vec<VertexId> = remaining
            .iter()
            .copied()
            .filter(|&v| deg[v as usize].load(Ordering::Relaxed) <= level)
            .collect();
        if frontier.is_empty() {
            level = remaining
                .iter()
                .map(|&v| deg[v as usize].load(Ordering::Relaxed))
                .min()
                .unwrap_or(level);
            continue;
        }
        while !frontier.is_empty() {
            exec.for_each(&frontier, |&v| {
                removed[v as usize].store(true, Ordering::Relaxed);
                coreness[v as usize].store(level, Ordering::Relaxed);
            });
            let next: Vec<Vec<VertexId>> = exec.map(&frontier, |&v| {
                let mut out = Vec::new();
                for &u in g.neighbors(v) {
                    if removed[u as usize].load(Ordering::Relaxed) {
                        continue;
                    }
                    // exactly one decrement crosses from level + 1 to level
                    if deg[u as usize].fetch_sub(1, Ordering::AcqRel) == level + 1 {
                        out.push(u);
                    }
                }
                out
            });
            frontier = next.into_iter().flatten().collect();
        }
        remaining.retain(|&v| !removed[v as usize].load(Ordering::Relaxed));
        level += 1;
    }
    CorenessInfo::from_values(
        coreness.into_iter().map(AtomicU32::into_inner).collect(),
        floor,
    )
}

/// Bijection between input (dense) ids and relabelled ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexOrder {
    to_relabelled: Vec<VertexId>,
    to_original: Vec<VertexId>,
}

impl VertexOrder {
    pub fn from_sequence(to_original: Vec<VertexId>) -> Self {
        let mut to_relabelled = vec![0; to_original.len()];
        for (new, &old) in to_original.iter().enumerate() {
            to_relabelled[old as usize] = new as VertexId;
        }
        VertexOrder {
            to_relabelled,
            to_original,
        }
    }

    pub fn len(&self) -> usize {
        self.to_original.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_original.is_empty()
    }

    #[inline]
    pub fn relabelled(&self, original: VertexId) -> VertexId {
        self.to_relabelled[original as usize]
    }

    #[inline]
    pub fn original(&self, relabelled: VertexId) -> VertexId {
        self.to_original[relabelled as usize]
    }

    pub fn to_relabelled(&self) -> &[VertexId] {
        &self.to_relabelled
    }

    pub fn to_original(&self) -> &[VertexId] {
        &self.to_original
    }
}

/// Orders vertices by increasing coreness, then increasing degree, then
/// input id: a stable sort by degree followed by a stable counting sort by
/// coreness.
pub fn determine_sort_order(g: &CsrGraph, c: &CorenessInfo, exec: Execution) -> VertexOrder {
    let n = g.num_vertices();
    let mut by_degree: Vec<VertexId> = (0..n as VertexId).collect();
    exec.sort_by_key(&mut by_degree, |&v| g.degree(v));

    let levels = c.degeneracy() as usize + 1;
    let mut start = vec![0usize; levels + 1];
    for &k in c.coreness() {
        start[k as usize + 1] += 1;
    }
    for k in 0..levels {
        start[k + 1] += start[k];
    }
    let mut sorted = vec![0 as VertexId; n];
    for v in by_degree {
        let k = c.get(v) as usize;
        sorted[start[k]] = v;
        start[k] += 1;
    }
    VertexOrder::from_sequence(sorted)
}

/// Relabelled id ranges holding each coreness value. Requires coreness that is
/// non-decreasing along relabelled ids.
#[derive(Clone, Debug)]
pub struct CorenessLevels {
    starts: Vec<u32>,
}

impl CorenessLevels {
    pub fn new(relabelled: &CorenessInfo) -> Self {
        let c = relabelled.coreness();
        debug_assert!(c.windows(2).all(|w| w[0] <= w[1]));
        let levels = relabelled.degeneracy() as usize + 1;
        let starts = (0..=levels)
            .map(|k| c.partition_point(|&x| (x as usize) < k) as u32)
            .collect();
        CorenessLevels { starts }
    }

    /// Vertices with coreness exactly `k`; empty past the degeneracy.
    pub fn level(&self, k: usize) -> Range<VertexId> {
        if k + 1 >= self.starts.len() {
            let end = *self.starts.last().unwrap_or(&0);
            return end..end;
        }
        self.starts[k]..self.starts[k + 1]
    }
}
