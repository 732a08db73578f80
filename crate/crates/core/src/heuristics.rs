//! Greedy searches that prime the incumbent before the exact search.

use crate::graph::{CsrGraph, VertexId};
use crate::incumbent::Incumbent;
use crate::lazy_graph::LazyGraph;
use crate::par::Execution;
use crate::setops::Intersector;

/// Default number of seeds for [`degree_heuristic`].
pub const DEFAULT_TOP_K: usize = 64;

/// The `k` highest-degree vertices, ties broken by lower id.
pub fn top_degree_vertices(g: &CsrGraph, k: usize) -> Vec<VertexId> {
    let mut all: Vec<VertexId> = (0..g.num_vertices() as VertexId).collect();
    let key = |&v: &VertexId| (std::cmp::Reverse(g.degree(v)), v);
    if k < all.len() {
        all.select_nth_unstable_by_key(k, key);
        all.truncate(k);
    }
    all.sort_unstable_by_key(key);
    all
}

fn submit(g: &CsrGraph, incumbent: &Incumbent, clique: &[VertexId]) {
    if clique.len() > incumbent.size() && g.is_clique(clique) {
        incumbent.try_improve(clique);
    }
}

/// Greedy walk from each of the `top_k` highest-degree vertices of `g`,
/// always adding the candidate with the most neighbors among the remaining
/// candidates. Cliques are in `g`'s ids.
pub fn degree_heuristic(
    g: &CsrGraph,
    top_k: usize,
    incumbent: &Incumbent,
    ix: Intersector,
    exec: Execution,
) {
    let seeds = top_degree_vertices(g, top_k);
    exec.for_each(&seeds, |&v| {
        let floor = incumbent.size();
        if g.degree(v) < floor {
            return;
        }
        let mut clique = vec![v];
        let mut cand: Vec<VertexId> = g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&w| g.degree(w) >= floor)
            .collect();
        let mut next = Vec::new();
        while !cand.is_empty() {
            let mut best = 0;
            let mut winner = None;
            for &w in &cand {
                if let Some(s) = ix.size_gt_val(&cand, g.neighbors(w), best) {
                    best = s;
                    winner = Some(w);
                }
            }
            let Some(u) = winner else {
                // no two candidates are adjacent
                clique.push(cand[0]);
                break;
            };
            clique.push(u);
            if ix.gt(&cand, g.neighbors(u), &mut next, best - 1).is_none() {
                break;
            }
            std::mem::swap(&mut cand, &mut next);
        }
        submit(g, incumbent, &clique);
    });
}

/// Greedy walk from the lowest-numbered vertex of every coreness level,
/// always adding the highest-numbered candidate. A walk stops once its
/// candidates can no longer lift it above the incumbent.
pub fn coreness_heuristic(lazy: &LazyGraph, ix: Intersector, exec: Execution) {
    let levels: Vec<usize> = (1..=lazy.degeneracy() as usize + 1).rev().collect();
    let g = lazy.base();
    let incumbent = lazy.incumbent();
    exec.for_each(&levels, |&k| {
        let range = lazy.levels().level(k);
        if range.is_empty() || k < incumbent.size() {
            return;
        }
        let v = range.start;
        let mut clique = vec![v];
        let mut cand = lazy.right_neighborhood(v).to_vec();
        let mut next = Vec::new();
        while let Some(&u) = cand.last() {
            clique.push(u);
            let rest = &cand[..cand.len() - 1];
            // the walk beats the incumbent only if more than this many
            // candidates survive
            let theta = incumbent.size().saturating_sub(clique.len());
            if ix.gt(rest, &lazy.any(u), &mut next, theta).is_none() {
                break;
            }
            std::mem::swap(&mut cand, &mut next);
        }
        let dense: Vec<VertexId> = clique.iter().map(|&u| lazy.order().original(u)).collect();
        submit(g, incumbent, &dense);
    });
}
