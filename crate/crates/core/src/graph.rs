//! Input graph in compressed sparse row form, plus the induced-subgraph and
//! complement views handed to the sub-solvers.

use std::io::{BufRead, Read, Write};

use crate::bitset::BitMatrix;
use crate::error::{Error, Result};

/// Dense vertex index, `0 <= id < n`.
pub type VertexId = u32;

const BINARY_MAGIC: [u8; 8] = *b"LZMCCSR1";

/// Immutable, symmetric, loop-free adjacency in compressed sparse rows.
///
/// Neighbor lists are strictly ascending. `original_ids[v]` is the id the
/// vertex carried in the input file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CsrGraph {
    offsets: Vec<usize>,
    neighbors: Vec<VertexId>,
    original_ids: Vec<u64>,
}

impl CsrGraph {
    /// Builds a normalized graph from arbitrary undirected edges over
    /// arbitrary ids. Self-loops are dropped, duplicates collapsed and every
    /// edge symmetrized. Ids are compacted through their sorted-unique order;
    /// ids listed in `extra_vertices` are kept even when they have no edge.
    pub fn from_edges<I>(edges: I) -> Self
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        Self::from_edges_with_vertices(edges, std::iter::empty())
    }

    pub fn from_edges_with_vertices<I, J>(edges: I, extra_vertices: J) -> Self
    where
        I: IntoIterator<Item = (u64, u64)>,
        J: IntoIterator<Item = u64>,
    {
        let edges: Vec<(u64, u64)> = edges.into_iter().collect();
        let mut ids: Vec<u64> = edges
            .iter()
            .flat_map(|&(u, v)| [u, v])
            .chain(extra_vertices)
            .collect();
        ids.sort_unstable();
        ids.dedup();

        let dense = |x: u64| ids.binary_search(&x).expect("id collected above") as VertexId;
        let mut pairs: Vec<(VertexId, VertexId)> = Vec::with_capacity(edges.len() * 2);
        for &(u, v) in &edges {
            if u == v {
                continue;
            }
            let (a, b) = (dense(u), dense(v));
            pairs.push((a, b));
            pairs.push((b, a));
        }
        pairs.sort_unstable();
        pairs.dedup();

        let n = ids.len();
        let mut offsets = vec![0usize; n + 1];
        for &(a, _) in &pairs {
            offsets[a as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let neighbors = pairs.into_iter().map(|(_, b)| b).collect();
        CsrGraph {
            offsets,
            neighbors,
            original_ids: ids,
        }
    }

    /// Builds from already-dense ids `0..n`. Isolated vertices are kept.
    pub fn from_dense_edges(n: usize, edges: &[(VertexId, VertexId)]) -> Self {
        Self::from_edges_with_vertices(
            edges.iter().map(|&(u, v)| (u as u64, v as u64)),
            0..n as u64,
        )
    }

    /// Assembles a graph from raw CSR arrays, checking every invariant.
    pub fn from_csr(offsets: Vec<usize>, neighbors: Vec<VertexId>) -> Result<Self> {
        let n = offsets
            .len()
            .checked_sub(1)
            .ok_or_else(|| Error::InvalidGraph("offsets array must hold n + 1 entries".into()))?;
        let g = CsrGraph {
            offsets,
            neighbors,
            original_ids: (0..n as u64).collect(),
        };
        g.validate()?;
        Ok(g)
    }

    /// Full scan of the structural invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vertices();
        if self.offsets.first() != Some(&0) || self.offsets[n] != self.neighbors.len() {
            return Err(Error::InvalidGraph(
                "offsets do not span the edge array".into(),
            ));
        }
        if self.original_ids.len() != n {
            return Err(Error::InvalidGraph(
                "original id table has wrong length".into(),
            ));
        }
        for v in 0..n {
            if self.offsets[v] > self.offsets[v + 1] {
                return Err(Error::InvalidGraph(format!(
                    "offsets decrease at vertex {v}"
                )));
            }
            let row = self.neighbors(v as VertexId);
            for (i, &u) in row.iter().enumerate() {
                if u as usize >= n {
                    return Err(Error::InvalidGraph(format!("neighbor {u} out of range")));
                }
                if u as usize == v {
                    return Err(Error::InvalidGraph(format!("self-loop at {v}")));
                }
                if i > 0 && row[i - 1] >= u {
                    return Err(Error::InvalidGraph(format!(
                        "row {v} not strictly ascending"
                    )));
                }
                if !self.has_edge(u, v as VertexId) {
                    return Err(Error::InvalidGraph(format!("edge ({v},{u}) not symmetric")));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn num_vertices(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    /// Directed entry count, twice the number of undirected edges.
    #[inline]
    pub fn num_directed_edges(&self) -> usize {
        self.neighbors.len()
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_vertices() as VertexId)
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    #[inline]
    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.neighbors(a).binary_search(&b).is_ok()
    }

    pub fn original_id(&self, v: VertexId) -> u64 {
        self.original_ids[v as usize]
    }

    /// Dense id of an input-file id, if the vertex exists.
    pub fn dense_id(&self, original: u64) -> Option<VertexId> {
        self.original_ids
            .binary_search(&original)
            .ok()
            .map(|i| i as VertexId)
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn neighbor_array(&self) -> &[VertexId] {
        &self.neighbors
    }

    /// Returns the first non-adjacent pair in `vertices`, or `None` when they
    /// form a clique. Repeated vertices count as a violation.
    pub fn find_non_edge(&self, vertices: &[VertexId]) -> Option<(VertexId, VertexId)> {
        for (i, &u) in vertices.iter().enumerate() {
            for &w in &vertices[i + 1..] {
                if u == w || !self.has_edge(u, w) {
                    return Some((u, w));
                }
            }
        }
        None
    }

    pub fn is_clique(&self, vertices: &[VertexId]) -> bool {
        self.find_non_edge(vertices).is_none()
    }

    /// Writes the little-endian binary form: magic, n, m, offsets, neighbors.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&BINARY_MAGIC)?;
        out.write_all(&(self.num_vertices() as u64).to_le_bytes())?;
        out.write_all(&(self.num_directed_edges() as u64).to_le_bytes())?;
        for &o in &self.offsets {
            out.write_all(&(o as u64).to_le_bytes())?;
        }
        for &u in &self.neighbors {
            out.write_all(&u.to_le_bytes())?;
        }
        Ok(())
    }
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

/// Reads the binary form written by [`CsrGraph::write_binary`].
pub fn load_binary<R: Read>(mut input: R) -> Result<CsrGraph> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if magic != BINARY_MAGIC {
        return Err(Error::InvalidGraph(
            "bad magic in binary graph header".into(),
        ));
    }
    let n = read_u64(&mut input)? as usize;
    let m = read_u64(&mut input)? as usize;
    let mut offsets = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        offsets.push(read_u64(&mut input)? as usize);
    }
    let mut raw = vec![0u8; m * 4];
    input.read_exact(&mut raw)?;
    let neighbors = raw
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    CsrGraph::from_csr(offsets, neighbors)
}

/// Parses a whitespace-separated edge list.
///
/// Lines starting with `#` or `%` are comments. Tokens past the first two
/// (weights, timestamps) are ignored. When the input opens with a
/// `%%MatrixMarket` banner, the first data line is the size header and is
/// skipped.
pub fn load_edge_list<R: BufRead>(input: R) -> Result<CsrGraph> {
    let mut edges = Vec::new();
    let mut matrix_market = false;
    let mut skip_size_line = false;
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if idx == 0 && trimmed.starts_with("%%MatrixMarket") {
            matrix_market = true;
            skip_size_line = true;
            continue;
        }
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        if matrix_market && skip_size_line {
            skip_size_line = false;
            continue;
        }
        let mut tokens = trimmed.split(|c: char| c.is_whitespace() || c == ',');
        let mut next = || -> Result<u64> {
            let tok = tokens
                .by_ref()
                .find(|t| !t.is_empty())
                .ok_or_else(|| Error::Parse {
                    line: lineno,
                    message: "expected two vertex ids".into(),
                })?;
            tok.parse::<u64>().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("invalid vertex id {tok:?}: {e}"),
            })
        };
        let u = next()?;
        let v = next()?;
        edges.push((u, v));
    }
    Ok(CsrGraph::from_edges(edges))
}

/// Sub-problem graph: members in ascending id order with adjacency given as
/// ascending member indices (`0..members.len()`).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InducedSubgraph {
    members: Vec<VertexId>,
    adjacency: Vec<Vec<u32>>,
    directed_edges: usize,
}

impl InducedSubgraph {
    /// Builds `G[members]` from an adjacency predicate. `members` must be
    /// ascending and duplicate-free.
    pub fn from_predicate<F>(members: Vec<VertexId>, mut adjacent: F) -> Self
    where
        F: FnMut(VertexId, VertexId) -> bool,
    {
        let ids = members.clone();
        Self::from_index_predicate(members, |i, j| adjacent(ids[i], ids[j]))
    }

    /// Like [`Self::from_predicate`], but the predicate receives member
    /// indices `i < j`.
    pub fn from_index_predicate<F>(members: Vec<VertexId>, mut adjacent: F) -> Self
    where
        F: FnMut(usize, usize) -> bool,
    {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        let k = members.len();
        let mut adjacency = vec![Vec::new(); k];
        let mut directed_edges = 0;
        for i in 0..k {
            for j in i + 1..k {
                if adjacent(i, j) {
                    adjacency[i].push(j as u32);
                    adjacency[j].push(i as u32);
                    directed_edges += 2;
                }
            }
        }
        InducedSubgraph {
            members,
            adjacency,
            directed_edges,
        }
    }

    /// Builds from local adjacency lists (member indices).
    pub fn from_local_edges(members: Vec<VertexId>, edges: &[(u32, u32)]) -> Self {
        let k = members.len();
        let mut adjacency = vec![Vec::new(); k];
        for &(a, b) in edges {
            if a != b {
                adjacency[a as usize].push(b);
                adjacency[b as usize].push(a);
            }
        }
        let mut directed_edges = 0;
        for row in &mut adjacency {
            row.sort_unstable();
            row.dedup();
            directed_edges += row.len();
        }
        InducedSubgraph {
            members,
            adjacency,
            directed_edges,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    /// Neighbors of member `i`, as member indices.
    pub fn adjacency(&self, i: usize) -> &[u32] {
        &self.adjacency[i]
    }

    pub fn directed_edges(&self) -> usize {
        self.directed_edges
    }

    pub fn density(&self) -> f64 {
        let k = self.members.len();
        if k < 2 {
            0.0
        } else {
            self.directed_edges as f64 / (k * (k - 1)) as f64
        }
    }

    pub fn adjacency_matrix(&self) -> BitMatrix {
        let mut m = BitMatrix::new(self.len());
        for (i, row) in self.adjacency.iter().enumerate() {
            for &j in row {
                m.set(i, j as usize);
            }
        }
        m
    }
}

/// `G[S]` cut out of a CSR graph.
pub fn induced_subgraph(g: &CsrGraph, set: &[VertexId]) -> InducedSubgraph {
    let mut members = set.to_vec();
    members.sort_unstable();
    InducedSubgraph::from_predicate(members, |u, v| g.has_edge(u, v))
}

/// Complement of an induced subgraph as symmetric bit rows over member
/// indices; a set bit marks a non-edge. The diagonal stays clear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplementAdjacency {
    members: Vec<VertexId>,
    rows: BitMatrix,
}

impl ComplementAdjacency {
    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    pub fn rows(&self) -> &BitMatrix {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn num_edges(&self) -> usize {
        self.rows.count_ones() / 2
    }

    /// Converts back to a subgraph whose edges are the complement's edges.
    pub fn to_subgraph(&self) -> InducedSubgraph {
        let mut edges = Vec::new();
        for i in 0..self.len() {
            for j in self.rows.row(i).iter() {
                if i < j {
                    edges.push((i as u32, j as u32));
                }
            }
        }
        InducedSubgraph::from_local_edges(self.members.clone(), &edges)
    }
}

pub fn complement_adjacency(h: &InducedSubgraph) -> ComplementAdjacency {
    let mut rows = h.adjacency_matrix();
    rows.complement_in_place();
    ComplementAdjacency {
        members: h.members.clone(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    fn parse(s: &str) -> CsrGraph {
        load_edge_list(s.as_bytes()).unwrap()
    }

    #[test]
    fn triangle_loads() {
        let g = parse("0 1\n1 2\n2 0");
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_directed_edges(), 6);
        g.validate().unwrap();
    }

    #[test]
    fn normalization_drops_loops_and_duplicates() {
        let g = parse("0 0\n0 1\n1 0\n0 1");
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.neighbors(0), &[1]);
    }

    #[test]
    fn sparse_ids_are_compacted_in_sorted_order() {
        let g = parse("# comment\n100 7\n7\t42\n");
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.original_id(0), 7);
        assert_eq!(g.original_id(1), 42);
        assert_eq!(g.original_id(2), 100);
        assert_eq!(g.dense_id(42), Some(1));
        assert_eq!(g.dense_id(43), None);
        assert!(g.has_edge(0, 2));
    }

    #[test]
    fn empty_input_is_empty_graph() {
        let g = parse("");
        assert_eq!(g.num_vertices(), 0);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = load_edge_list("0 1\n1 x\n".as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let err = load_edge_list("0 1\n\n5\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn extra_columns_and_matrix_market_header() {
        let g = parse("1 2 0.5\n2 3 7\n");
        assert_eq!(g.num_edges(), 2);
        let g = parse("%%MatrixMarket matrix coordinate pattern symmetric\n% c\n3 3 2\n1 2\n2 3\n");
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_edges(), 2);
    }

    #[test]
    fn binary_round_trip() {
        let g = gen::gnp(40, 0.2, 3);
        let mut buf = Vec::new();
        g.write_binary(&mut buf).unwrap();
        let h = load_binary(buf.as_slice()).unwrap();
        assert_eq!(g.offsets(), h.offsets());
        assert_eq!(g.neighbor_array(), h.neighbor_array());
        assert!(load_binary(&buf[..10]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(load_binary(bad.as_slice()).is_err());
    }

    #[test]
    fn from_csr_rejects_asymmetry() {
        assert!(CsrGraph::from_csr(vec![0, 1, 1], vec![1]).is_err());
        assert!(CsrGraph::from_csr(vec![0, 1, 2], vec![1, 0]).is_ok());
    }

    #[test]
    fn induced_examples() {
        let tri = parse("0 1\n1 2\n2 0");
        let h = induced_subgraph(&tri, &[0, 1]);
        assert_eq!(h.directed_edges(), 2);
        assert_eq!(h.density(), 1.0);

        let path = parse("0 1\n1 2");
        let h = induced_subgraph(&path, &[0, 2]);
        assert_eq!(h.directed_edges(), 0);
        assert_eq!(h.density(), 0.0);
        assert_eq!(induced_subgraph(&path, &[]).len(), 0);
    }

    #[test]
    fn induced_matches_naive_pairwise_oracle() {
        for seed in 0..20 {
            let g = gen::gnp(12, 0.5, seed);
            let v = (seed % 12) as VertexId;
            let set = g.neighbors(v).to_vec();
            let h = induced_subgraph(&g, &set);
            for i in 0..set.len() {
                for j in 0..set.len() {
                    let naive = i != j && g.neighbors(set[i]).contains(&set[j]);
                    assert_eq!(h.adjacency(i).contains(&(j as u32)), naive);
                }
            }
        }
    }

    #[test]
    fn induced_on_all_vertices_is_whole_graph() {
        let g = gen::gnp(30, 0.3, 9);
        let all: Vec<VertexId> = (0..30).collect();
        let h = induced_subgraph(&g, &all);
        assert_eq!(h.directed_edges(), g.num_directed_edges());
        for v in 0..30u32 {
            assert_eq!(h.adjacency(v as usize), g.neighbors(v));
        }
    }

    #[test]
    fn complement_examples() {
        let k4 = InducedSubgraph::from_predicate(vec![0, 1, 2, 3], |_, _| true);
        assert_eq!(complement_adjacency(&k4).num_edges(), 0);
        let empty = InducedSubgraph::from_predicate(vec![0, 1, 2, 3], |_, _| false);
        let c = complement_adjacency(&empty);
        assert_eq!(c.num_edges(), 6);
        for i in 0..4 {
            assert!(!c.rows().get(i, i));
        }
    }

    #[test]
    fn complement_matches_all_pairs_difference() {
        for seed in 0..10 {
            let g = gen::gnp(15, 0.4, seed);
            let all: Vec<VertexId> = (0..15).collect();
            let h = induced_subgraph(&g, &all);
            let c = complement_adjacency(&h);
            let mut expected = 0;
            for i in 0..15 {
                for j in 0..15 {
                    let non_edge = i != j && !g.has_edge(i as u32, j as u32);
                    assert_eq!(c.rows().get(i, j), non_edge);
                    if non_edge && i < j {
                        expected += 1;
                    }
                }
            }
            assert_eq!(c.num_edges(), expected);
            assert_eq!(c.num_edges(), 15 * 14 / 2 - h.directed_edges() / 2);
            // double complement restores the edge set
            let back = complement_adjacency(&c.to_subgraph());
            assert_eq!(back.to_subgraph(), h);
        }
    }
}
