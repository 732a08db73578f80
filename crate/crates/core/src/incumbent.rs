//! The shared best-so-far clique.

use std::sync::atomic::{AtomicUsize, Ordering};

use parking_lot::Mutex;

use crate::graph::VertexId;

/// Largest clique found so far. The size only ever grows; replacement is
/// linearizable through the inner lock while the size stays readable without
/// locking.
#[derive(Debug, Default)]
pub struct Incumbent {
    size: AtomicUsize,
    clique: Mutex<Vec<VertexId>>,
}

impl Incumbent {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size.load(Ordering::Acquire)
    }

    pub fn clique(&self) -> Vec<VertexId> {
        self.clique.lock().clone()
    }

    /// Replaces the incumbent iff `clique` is strictly larger. The caller
    /// vouches that `clique` is a clique.
    pub fn try_improve(&self, clique: &[VertexId]) -> bool {
        if clique.len() <= self.size() {
            return false;
        }
        let mut guard = self.clique.lock();
        if clique.len() <= guard.len() {
            return false;
        }
        guard.clear();
        guard.extend_from_slice(clique);
        self.size.store(clique.len(), Ordering::Release);
        true
    }
}

/// Where sub-solvers report cliques. Ids are in whatever space the solver's
/// input uses; implementations translate as needed.
pub trait CliqueSink: Sync {
    /// Size a clique must exceed to be worth reporting.
    fn threshold(&self) -> usize;

    fn offer(&self, clique: &[VertexId]) -> bool;

    /// Cooperative cancellation.
    fn cancelled(&self) -> bool {
        false
    }
}

impl CliqueSink for Incumbent {
    fn threshold(&self) -> usize {
        self.size()
    }

    fn offer(&self, clique: &[VertexId]) -> bool {
        self.try_improve(clique)
    }
}
