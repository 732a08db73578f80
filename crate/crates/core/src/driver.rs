//! The full solve: heuristics, coreness ordering, the lazy graph, and the
//! systematic per-vertex search with filtering and sub-solver dispatch.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CsrGraph, VertexId};
use crate::heuristics::{coreness_heuristic, degree_heuristic, DEFAULT_TOP_K};
use crate::incumbent::{CliqueSink, Incumbent};
use crate::lazy_graph::{LazyGraph, PrepopulatePolicy};
use crate::ordering::{determine_sort_order, kcore};
use crate::par::{with_threads, Execution};
use crate::setops::Intersector;
use crate::subsolvers::{max_clique_via_kvc, mc_branch_bound, KvcOptions, McOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Worker threads; 0 uses every core, 1 runs sequentially.
    pub threads: usize,
    /// Density above which a neighborhood goes to the vertex-cover solver.
    pub phi: f64,
    pub top_k: usize,
    pub prepopulate: PrepopulatePolicy,
    pub seed: u64,
    /// Seconds; `None` runs to completion.
    pub timeout: Option<f64>,
    /// Pick the phase-one seed of each level at random instead of taking the
    /// lowest-numbered vertex.
    pub random_seed_pick: bool,
    /// Neighborhood filters 2 and 3. Filter 1 and the coreness gate are
    /// always on.
    pub filters: bool,
    pub early_exit: bool,
    pub coloring: bool,
    pub kernels: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            threads: 0,
            phi: 0.1,
            top_k: DEFAULT_TOP_K,
            prepopulate: PrepopulatePolicy::Must,
            seed: 0,
            timeout: None,
            random_seed_pick: false,
            filters: true,
            early_exit: true,
            coloring: true,
            kernels: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.phi) {
            return Err(Error::Config(format!(
                "phi must be in [0, 1], got {}",
                self.phi
            )));
        }
        if self.top_k == 0 {
            return Err(Error::Config("top_k must be at least 1".into()));
        }
        if let Some(t) = self.timeout {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("invalid timeout {t}")));
            }
        }
        Ok(())
    }

    fn intersector(&self) -> Intersector {
        Intersector {
            early_exit: self.early_exit,
        }
    }
}

/// Wall time per phase, in seconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub degree_heuristic: f64,
    pub kcore: f64,
    pub ordering: f64,
    pub prepopulate: f64,
    pub coreness_heuristic: f64,
    pub systematic_search: f64,
}

/// Neighborhoods still alive after each stage of [`neighbor_search`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterCounts {
    pub gate: u64,
    pub f1: u64,
    pub f2: u64,
    pub f3: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DispatchCounts {
    pub mc: u64,
    pub kvc: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub phases: PhaseTimes,
    pub filters: FilterCounts,
    pub dispatch: DispatchCounts,
    pub heuristic_degree: usize,
    pub heuristic_coreness: usize,
    pub degeneracy: u32,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub omega: usize,
    /// Original vertex ids, ascending.
    pub clique: Vec<u64>,
    /// The same clique in dense ids.
    pub dense_clique: Vec<VertexId>,
    /// False when the search stopped at the timeout.
    pub exact: bool,
    pub report: PhaseReport,
}

#[derive(Default)]
struct Counters {
    gate: AtomicU64,
    f1: AtomicU64,
    f2: AtomicU64,
    f3: AtomicU64,
    mc: AtomicU64,
    kvc: AtomicU64,
}

impl Counters {
    fn bump(c: &AtomicU64) {
        c.fetch_add(1, Ordering::Relaxed);
    }

    fn snapshot(&self) -> (FilterCounts, DispatchCounts) {
        let get = |c: &AtomicU64| c.load(Ordering::Relaxed);
        (
            FilterCounts {
                gate: get(&self.gate),
                f1: get(&self.f1),
                f2: get(&self.f2),
                f3: get(&self.f3),
            },
            DispatchCounts {
                mc: get(&self.mc),
                kvc: get(&self.kvc),
            },
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubSolver {
    Mc,
    Kvc,
}

/// Vertex cover on dense neighborhoods, branch and bound otherwise. The
/// density is `m_hat / (n (n - 1))` with `m_hat` counting directed edges.
pub fn choose_algorithm(m_hat: usize, n: usize, phi: f64) -> SubSolver {
    if n <= 1 {
        return SubSolver::Mc;
    }
    let density = m_hat as f64 / (n as f64 * (n - 1) as f64);
    if density > phi {
        SubSolver::Kvc
    } else {
        SubSolver::Mc
    }
}

/// Shared state of one systematic search.
pub struct SearchContext<'a, 'g> {
    lazy: &'a LazyGraph<'g>,
    cfg: &'a SolverConfig,
    counters: Counters,
    deadline: Option<Instant>,
    timed_out: AtomicBool,
}

impl<'a, 'g> SearchContext<'a, 'g> {
    pub fn new(lazy: &'a LazyGraph<'g>, cfg: &'a SolverConfig, deadline: Option<Instant>) -> Self {
        SearchContext {
            lazy,
            cfg,
            counters: Counters::default(),
            deadline,
            timed_out: AtomicBool::new(false),
        }
    }

    fn incumbent(&self) -> usize {
        self.lazy.incumbent().size()
    }

    pub fn timed_out(&self) -> bool {
        if self.timed_out.load(Ordering::Relaxed) {
            return true;
        }
        match self.deadline {
            Some(d) if Instant::now() >= d => {
                self.timed_out.store(true, Ordering::Relaxed);
                true
            }
            _ => false,
        }
    }

    pub fn filter_counts(&self) -> FilterCounts {
        self.counters.snapshot().0
    }

    pub fn dispatch_counts(&self) -> DispatchCounts {
        self.counters.snapshot().1
    }
}

/// Translates relabelled cliques to dense ids and checks them before they
/// reach the incumbent.
struct RelabelledSink<'c, 'a, 'g> {
    ctx: &'c SearchContext<'a, 'g>,
}

impl CliqueSink for RelabelledSink<'_, '_, '_> {
    fn threshold(&self) -> usize {
        self.ctx.incumbent()
    }

    fn offer(&self, clique: &[VertexId]) -> bool {
        let lazy = self.ctx.lazy;
        let dense: Vec<VertexId> = clique.iter().map(|&u| lazy.order().original(u)).collect();
        debug_assert!(lazy.base().is_clique(&dense));
        lazy.base().is_clique(&dense) && lazy.incumbent().try_improve(&dense)
    }

    fn cancelled(&self) -> bool {
        self.ctx.timed_out()
    }
}

/// Searches cliques made of `v` and its right-neighborhood. Candidates are
/// narrowed by coreness, then by a threshold on common neighbors (twice, the
/// second pass also estimating the edge count), and the survivors are handed
/// to a sub-solver.
pub fn neighbor_search(ctx: &SearchContext, v: VertexId) {
    let lazy = ctx.lazy;
    let ix = ctx.cfg.intersector();
    if ctx.timed_out() || (lazy.coreness(v) as usize) < ctx.incumbent() {
        return;
    }
    Counters::bump(&ctx.counters.gate);

    // filter 1: coreness
    let inc = ctx.incumbent();
    let mut cand: Vec<VertexId> = lazy
        .right_neighborhood(v)
        .iter()
        .copied()
        .filter(|&u| lazy.coreness(u) as usize >= inc)
        .collect();
    if cand.len() < inc {
        return;
    }
    Counters::bump(&ctx.counters.f1);

    let mut m_hat = cand.len() * cand.len().saturating_sub(1);
    if ctx.cfg.filters {
        // filter 2: u, v and more than inc - 2 common candidates
        let inc = ctx.incumbent();
        if inc >= 2 {
            let keep: Vec<bool> = cand
                .iter()
                .map(|&u| ix.size_gt_bool(&cand, lazy.hashed(u), inc - 2))
                .collect();
            let mut it = keep.into_iter();
            cand.retain(|_| it.next().unwrap());
        }
        if cand.len() < ctx.incumbent() {
            return;
        }
        Counters::bump(&ctx.counters.f2);

        // filter 3: same test, keeping the sizes as an edge estimate
        let inc = ctx.incumbent();
        let theta = inc.saturating_sub(2);
        m_hat = 0;
        let sizes: Vec<Option<usize>> = cand
            .iter()
            .map(|&u| {
                if inc >= 2 {
                    ix.size_gt_val(&cand, lazy.hashed(u), theta)
                } else {
                    Some(crate::setops::intersection_size(&cand, lazy.hashed(u)))
                }
            })
            .collect();
        for s in sizes.iter().flatten() {
            m_hat += s;
        }
        let mut it = sizes.into_iter();
        cand.retain(|_| it.next().unwrap().is_some());
        if cand.len() < ctx.incumbent() {
            return;
        }
        Counters::bump(&ctx.counters.f3);
    } else {
        Counters::bump(&ctx.counters.f2);
        Counters::bump(&ctx.counters.f3);
    }

    let n = cand.len();
    let sink = RelabelledSink { ctx };
    let h = lazy.induced_subgraph(cand);
    match choose_algorithm(m_hat, n, ctx.cfg.phi) {
        SubSolver::Kvc => {
            Counters::bump(&ctx.counters.kvc);
            max_clique_via_kvc(
                &h,
                &[v],
                &sink,
                KvcOptions {
                    kernels: ctx.cfg.kernels,
                },
            );
        }
        SubSolver::Mc => {
            Counters::bump(&ctx.counters.mc);
            mc_branch_bound(
                &h,
                &[v],
                &sink,
                McOptions {
                    coloring: ctx.cfg.coloring,
                },
            );
        }
    }
}

/// Phase one evaluates a single seed per coreness level from the incumbent
/// size upward; phase two sweeps every level from the top down, skipping
/// levels that can no longer beat the incumbent.
pub fn systematic_search(ctx: &SearchContext, exec: Execution) {
    let lazy = ctx.lazy;
    let top = lazy.degeneracy() as usize + 1;
    if lazy.num_vertices() == 0 {
        return;
    }

    let levels: Vec<usize> = (ctx.incumbent()..=top).collect();
    let seeds: Vec<Option<VertexId>> = exec.map(&levels, |&k| {
        let range = lazy.levels().level(k);
        if range.is_empty() {
            return None;
        }
        let v = if ctx.cfg.random_seed_pick {
            let mut rng =
                ChaCha8Rng::seed_from_u64(ctx.cfg.seed ^ (k as u64).wrapping_mul(0x9E37_79B9));
            rng.gen_range(range)
        } else {
            range.start
        };
        neighbor_search(ctx, v);
        Some(v)
    });

    for k in (1..=top).rev() {
        if k < ctx.incumbent() || ctx.timed_out() {
            break;
        }
        let range = lazy.levels().level(k);
        let seed = levels.iter().position(|&l| l == k).and_then(|i| seeds[i]);
        exec.for_each_index(range.start as usize..range.end as usize, |v| {
            let v = v as VertexId;
            if Some(v) != seed && lazy.coreness(v) as usize >= ctx.incumbent() {
                neighbor_search(ctx, v);
            }
        });
    }
}

fn timed<R>(slot: &mut f64, f: impl FnOnce() -> R) -> R {
    let start = Instant::now();
    let r = f();
    *slot = start.elapsed().as_secs_f64();
    r
}

/// Exact maximum clique of `g`.
pub fn lazy_mc(g: &CsrGraph, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let deadline = cfg
        .timeout
        .map(|t| Instant::now() + Duration::from_secs_f64(t));
    Ok(with_threads(cfg.threads, |exec| {
        solve_with(g, cfg, deadline, exec)
    }))
}

fn solve_with(
    g: &CsrGraph,
    cfg: &SolverConfig,
    deadline: Option<Instant>,
    exec: Execution,
) -> SolveResult {
    let mut report = PhaseReport::default();
    let t = &mut report.phases;
    let incumbent = Incumbent::new();
    let ix = cfg.intersector();

    timed(&mut t.degree_heuristic, || {
        degree_heuristic(g, cfg.top_k, &incumbent, ix, exec)
    });
    report.heuristic_degree = incumbent.size();
    let coreness = timed(&mut t.kcore, || kcore(g, incumbent.size(), exec));
    report.degeneracy = coreness.degeneracy();
    let order = timed(&mut t.ordering, || determine_sort_order(g, &coreness, exec));
    let lazy = LazyGraph::new(g, order, &coreness, &incumbent);
    timed(&mut t.prepopulate, || {
        lazy.prepopulate(cfg.prepopulate, exec)
    });
    timed(&mut t.coreness_heuristic, || {
        coreness_heuristic(&lazy, ix, exec)
    });
    report.heuristic_coreness = incumbent.size();

    let ctx = SearchContext::new(&lazy, cfg, deadline);
    timed(&mut t.systematic_search, || systematic_search(&ctx, exec));
    (report.filters, report.dispatch) = ctx.counters.snapshot();
    let exact = !ctx.timed_out.load(Ordering::Relaxed);

    let mut dense_clique = incumbent.clique();
    dense_clique.sort_unstable();
    let mut clique: Vec<u64> = dense_clique.iter().map(|&v| g.original_id(v)).collect();
    clique.sort_unstable();
    SolveResult {
        omega: dense_clique.len(),
        clique,
        dense_clique,
        exact,
        report,
    }
}

/// Size of the subgraphs an exact search must and may touch once the
/// clique number is known.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MustMayStats {
    pub omega: usize,
    pub vertices: usize,
    pub edges: usize,
    /// Coreness above `omega - 1`.
    pub must_vertices: usize,
    pub must_edges: usize,
    /// Coreness at least `omega - 1`.
    pub may_vertices: usize,
    pub may_edges: usize,
    /// Edges with exactly one endpoint in the may set.
    pub attached_edges: usize,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl MustMayStats {
    pub fn must_vertex_fraction(&self) -> f64 {
        ratio(self.must_vertices, self.vertices)
    }

    pub fn must_edge_fraction(&self) -> f64 {
        ratio(self.must_edges, self.edges)
    }

    pub fn may_vertex_fraction(&self) -> f64 {
        ratio(self.may_vertices, self.vertices)
    }

    pub fn may_edge_fraction(&self) -> f64 {
        ratio(self.may_edges, self.edges)
    }

    pub fn attached_edge_fraction(&self) -> f64 {
        ratio(self.attached_edges, self.edges)
    }
}

pub fn must_may_stats(g: &CsrGraph, omega: usize, exec: Execution) -> MustMayStats {
    let c = kcore(g, 0, exec);
    let must = |v: VertexId| omega >= 1 && c.get(v) as usize > omega - 1;
    let may = |v: VertexId| c.get(v) as usize + 1 >= omega;
    let mut s = MustMayStats {
        omega,
        vertices: g.num_vertices(),
        edges: g.num_edges(),
        ..Default::default()
    };
    for v in 0..g.num_vertices() as VertexId {
        s.must_vertices += must(v) as usize;
        s.may_vertices += may(v) as usize;
        for &u in g.neighbors(v) {
            if u <= v {
                continue;
            }
            s.must_edges += (must(u) && must(v)) as usize;
            s.may_edges += (may(u) && may(v)) as usize;
            s.attached_edges += (may(u) != may(v)) as usize;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

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

    fn sequential() -> SolverConfig {
        SolverConfig {
            threads: 1,
            ..Default::default()
        }
    }

    #[test]
    fn choose_algorithm_examples() {
        assert_eq!(choose_algorithm(20, 5, 0.5), SubSolver::Kvc);
        assert_eq!(choose_algorithm(0, 5, 0.1), SubSolver::Mc);
        assert_eq!(choose_algorithm(10, 5, 0.5), SubSolver::Mc);
        assert_eq!(choose_algorithm(11, 5, 0.5), SubSolver::Kvc);
        assert_eq!(choose_algorithm(0, 1, 0.0), SubSolver::Mc);
        assert_eq!(choose_algorithm(0, 0, 0.0), SubSolver::Mc);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig {
            phi: 1.5,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SolverConfig {
            top_k: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }

    #[test]
    fn small_graphs() {
        let tri = CsrGraph::from_dense_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let r = lazy_mc(&tri, &sequential()).unwrap();
        assert_eq!(
            (r.omega, r.clique.clone(), r.exact),
            (3, vec![0, 1, 2], true)
        );

        let empty = CsrGraph::from_dense_edges(0, &[]);
        let r = lazy_mc(&empty, &sequential()).unwrap();
        assert_eq!(r.omega, 0);
        assert_eq!(r.report.filters, FilterCounts::default());

        let isolated = CsrGraph::from_dense_edges(4, &[]);
        assert_eq!(lazy_mc(&isolated, &sequential()).unwrap().omega, 1);
    }

    #[test]
    fn zero_gap_skips_the_systematic_search() {
        let g = gen::complete(12);
        let r = lazy_mc(&g, &sequential()).unwrap();
        assert_eq!(r.omega, 12);
        assert_eq!(r.report.filters, FilterCounts::default());
        assert_eq!(r.report.dispatch, DispatchCounts::default());
    }

    #[test]
    fn gate_admits_only_clique_vertices() {
        let g = k5_pendant();
        let inc = Incumbent::new();
        inc.try_improve(&[0, 5]);
        let c = kcore(&g, 0, Execution::Sequential);
        let o = determine_sort_order(&g, &c, Execution::Sequential);
        let lazy = LazyGraph::new(&g, o, &c, &inc);
        let cfg = sequential();
        let ctx = SearchContext::new(&lazy, &cfg, None);
        systematic_search(&ctx, Execution::Sequential);
        assert_eq!(inc.size(), 5);
        let counts = ctx.filter_counts();
        assert!(counts.gate >= 1 && counts.gate <= 5);
        // the pendant vertex has coreness 1 and is never dispatched
        assert_eq!(lazy.coreness(0), 1);
    }

    #[test]
    fn dense_neighborhood_goes_to_vertex_cover() {
        let g = gen::complete(6);
        let inc = Incumbent::new();
        inc.try_improve(&[0, 1, 2, 3]);
        let c = kcore(&g, 0, Execution::Sequential);
        let o = determine_sort_order(&g, &c, Execution::Sequential);
        let lazy = LazyGraph::new(&g, o, &c, &inc);
        let cfg = sequential();
        let ctx = SearchContext::new(&lazy, &cfg, None);
        neighbor_search(&ctx, 0);
        assert_eq!(inc.size(), 6);
        assert_eq!(ctx.dispatch_counts(), DispatchCounts { mc: 0, kvc: 1 });
        assert_eq!(
            ctx.filter_counts(),
            FilterCounts {
                gate: 1,
                f1: 1,
                f2: 1,
                f3: 1
            }
        );
    }

    #[test]
    fn low_coreness_neighbors_are_filtered() {
        // vertex 0 joined to three leaves; incumbent 3
        let g = CsrGraph::from_dense_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        let inc = Incumbent::new();
        inc.try_improve(&[7, 8, 9]);
        let c = kcore(&g, 0, Execution::Sequential);
        let o = determine_sort_order(&g, &c, Execution::Sequential);
        let lazy = LazyGraph::new(&g, o, &c, &inc);
        let cfg = sequential();
        let ctx = SearchContext::new(&lazy, &cfg, None);
        for v in 0..4 {
            neighbor_search(&ctx, v);
        }
        assert_eq!(ctx.filter_counts(), FilterCounts::default());
    }

    #[test]
    fn counters_never_increase_along_filters() {
        for seed in 0..40 {
            let g = gen::gnp(80, 0.15, seed);
            let r = lazy_mc(&g, &sequential()).unwrap();
            let f = &r.report.filters;
            assert!(f.gate >= f.f1 && f.f1 >= f.f2 && f.f2 >= f.f3);
            assert_eq!(f.f3, r.report.dispatch.mc + r.report.dispatch.kvc);
        }
    }

    #[test]
    fn zero_timeout_is_inexact_but_valid() {
        let g = gen::gnp(300, 0.3, 1);
        let cfg = SolverConfig {
            timeout: Some(0.0),
            top_k: 1,
            ..sequential()
        };
        let r = lazy_mc(&g, &cfg).unwrap();
        assert!(g.is_clique(&r.dense_clique));
        assert!(!r.exact || r.report.filters.gate == 0);
    }

    #[test]
    fn must_may_examples() {
        let s = must_may_stats(&gen::complete(5), 5, Execution::Sequential);
        assert_eq!(
            (s.may_vertex_fraction(), s.must_vertex_fraction()),
            (1.0, 0.0)
        );

        let s = must_may_stats(&k5_pendant(), 5, Execution::Sequential);
        assert_eq!(s.may_vertices, 5);
        assert_eq!(s.must_vertices, 0);
        assert_eq!(s.may_vertex_fraction(), 5.0 / 6.0);
        assert_eq!(s.attached_edges, 1);
        assert_eq!(s.may_edges, 10);
    }
}
