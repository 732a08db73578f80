use std::io::Cursor;

use lazymc::ordering::{kcore, kcore_sequential};
use lazymc::{
    gen, lazy_mc, load_binary, load_edge_list, with_threads, CsrGraph, PrepopulatePolicy,
    SolverConfig,
};

fn cfg(threads: usize) -> SolverConfig {
    SolverConfig {
        threads,
        ..Default::default()
    }
}

#[test]
fn planted_clique_is_recovered_exactly() {
    for (n, p, k, seed) in [(500, 0.02, 25, 1), (300, 0.2, 15, 2), (150, 0.5, 20, 3)] {
        let g = gen::planted_clique(n, p, k, seed);
        let r = lazy_mc(&g, &cfg(4)).unwrap();
        assert!(r.exact);
        assert!(r.omega >= k);
        assert!(g.is_clique(&r.dense_clique));
        assert_eq!(lazy_mc(&g, &cfg(1)).unwrap().omega, r.omega);
    }
}

#[test]
fn zero_gap_graph_does_no_systematic_work() {
    // sparse background whose degeneracy stays below the planted clique
    let g = gen::planted_clique(3000, 0.001, 30, 9);
    let r = lazy_mc(&g, &cfg(1)).unwrap();
    assert_eq!(r.omega, 30);
    assert_eq!(r.report.degeneracy, 29);
    let f = &r.report.filters;
    assert_eq!((f.gate, f.f1, f.f2, f.f3), (0, 0, 0, 0));
}

#[test]
fn ablations_agree_on_harder_graphs() {
    let graphs = [
        gen::gnp(150, 0.5, 11),
        gen::gnp(90, 0.85, 12),
        gen::preferential_attachment(3000, 10, 13),
    ];
    for g in &graphs {
        let want = lazy_mc(g, &cfg(1)).unwrap().omega;
        let variants = [
            SolverConfig {
                coloring: false,
                ..cfg(1)
            },
            SolverConfig {
                kernels: false,
                ..cfg(1)
            },
            SolverConfig { phi: 0.0, ..cfg(4) },
            SolverConfig { phi: 1.0, ..cfg(4) },
            SolverConfig {
                prepopulate: PrepopulatePolicy::None,
                ..cfg(2)
            },
            SolverConfig {
                prepopulate: PrepopulatePolicy::All,
                ..cfg(2)
            },
            SolverConfig {
                random_seed_pick: true,
                seed: 42,
                ..cfg(8)
            },
            SolverConfig { top_k: 1, ..cfg(1) },
        ];
        for v in &variants {
            let r = lazy_mc(g, v).unwrap();
            assert_eq!(r.omega, want, "{v:?}");
            assert!(g.is_clique(&r.dense_clique));
        }
    }
}

#[test]
fn parallel_and_sequential_coreness_agree_at_scale() {
    let g = gen::preferential_attachment(50_000, 6, 5);
    let seq = kcore_sequential(&g, 0);
    let par = with_threads(8, |exec| kcore(&g, 0, exec));
    assert_eq!(seq, par);
    let floored_seq = kcore_sequential(&g, 10);
    let floored_par = with_threads(4, |exec| kcore(&g, 10, exec));
    assert_eq!(floored_seq, floored_par);
}

#[test]
fn file_formats_give_the_same_answer() {
    let g = gen::planted_clique(400, 0.05, 12, 21);
    let mut text = String::from("% edge list\n");
    for v in 0..g.num_vertices() as u32 {
        for &u in g.neighbors(v) {
            if u > v {
                text.push_str(&format!(
                    "{} {}\t1\n",
                    g.original_id(v) * 3 + 7,
                    g.original_id(u) * 3 + 7
                ));
            }
        }
    }
    let from_text = load_edge_list(Cursor::new(text)).unwrap();
    let mut bytes = Vec::new();
    from_text.write_binary(&mut bytes).unwrap();
    let from_bin = load_binary(Cursor::new(bytes)).unwrap();

    let a = lazy_mc(&from_text, &cfg(1)).unwrap();
    let b = lazy_mc(&from_bin, &cfg(1)).unwrap();
    assert_eq!(a.omega, b.omega);
    assert_eq!(a.omega, lazy_mc(&g, &cfg(1)).unwrap().omega);
    assert!(a.clique.iter().all(|id| id % 3 == 1));
}

#[test]
fn witness_uses_original_ids() {
    let g = CsrGraph::from_edges([(100, 5), (5, 42), (42, 100), (42, 7)]);
    let r = lazy_mc(&g, &cfg(1)).unwrap();
    assert_eq!(r.clique, vec![5, 42, 100]);
}
