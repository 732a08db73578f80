//! Seeded random graph generators for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{CsrGraph, VertexId};

/// Erdős–Rényi `G(n, p)` with all `n` vertices present.
pub fn gnp(n: usize, p: f64, seed: u64) -> CsrGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n as VertexId {
        for v in u + 1..n as VertexId {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    CsrGraph::from_dense_edges(n, &edges)
}

/// `G(n, p)` with a clique on `clique` randomly chosen vertices planted on top.
pub fn planted_clique(n: usize, p: f64, clique: usize, seed: u64) -> CsrGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n as VertexId {
        for v in u + 1..n as VertexId {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let mut ids: Vec<VertexId> = (0..n as VertexId).collect();
    ids.shuffle(&mut rng);
    let planted = &ids[..clique.min(n)];
    for (i, &u) in planted.iter().enumerate() {
        for &v in &planted[i + 1..] {
            edges.push((u, v));
        }
    }
    CsrGraph::from_dense_edges(n, &edges)
}

/// Sparse graph with a heavy-tailed degree profile: each new vertex links
/// to `m` earlier vertices chosen proportionally to degree.
pub fn preferential_attachment(n: usize, m: usize, seed: u64) -> CsrGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut targets: Vec<VertexId> = Vec::new();
    let core = (m + 1).min(n);
    for u in 0..core as VertexId {
        for v in u + 1..core as VertexId {
            edges.push((u, v));
            targets.push(u);
            targets.push(v);
        }
    }
    for u in core as VertexId..n as VertexId {
        for _ in 0..m {
            let v = targets[rng.gen_range(0..targets.len())];
            edges.push((u, v));
            targets.push(u);
            targets.push(v);
        }
    }
    CsrGraph::from_dense_edges(n, &edges)
}

pub fn complete(n: usize) -> CsrGraph {
    let mut edges = Vec::new();
    for u in 0..n as VertexId {
        for v in u + 1..n as VertexId {
            edges.push((u, v));
        }
    }
    CsrGraph::from_dense_edges(n, &edges)
}
