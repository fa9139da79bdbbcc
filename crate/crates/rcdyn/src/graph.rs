//! Finite simple graphs with an ordered edge list, edge subsets and
//! connectivity queries.
//!
//! The edge order fixed at construction defines the state indexing used
//! everywhere else: subset `A` has index `sum over e in A of 2^e`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest edge count representable by an [`EdgeSubset`] bit-set.
pub const MAX_EDGES: usize = 32;

/// A finite simple graph. Edges are unordered pairs stored as
/// `(min, max)`; the position of a pair in the list is its edge index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::parameter("graph needs at least one vertex"));
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u == v {
                return Err(Error::parameter(format!("self-loop at vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::parameter(format!(
                    "edge ({u},{v}) out of range for {n} vertices"
                )));
            }
            let pair = (u.min(v), u.max(v));
            if normalized.contains(&pair) {
                return Err(Error::parameter(format!("duplicate edge ({u},{v})")));
            }
            normalized.push(pair);
        }
        Ok(Graph { n, edges: normalized })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> (usize, usize) {
        self.edges[index]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    /// The d-dimensional torus of side length L, vertices in row-major
    /// order. For L >= 3 this has d*L^d edges; for L = 2 the two
    /// parallel neighbor pairs coincide and are collapsed, leaving
    /// d*2^(d-1) distinct edges.
    pub fn torus(l: usize, d: usize) -> Result<Self> {
        if l < 2 {
            return Err(Error::parameter("torus side length must be >= 2"));
        }
        if d < 1 {
            return Err(Error::parameter("torus dimension must be >= 1"));
        }
        let n = l.checked_pow(d as u32).ok_or_else(|| Error::parameter("torus too large"))?;
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for v in 0..n {
            // coordinates, row-major: last axis varies fastest
            let mut coords = vec![0usize; d];
            let mut rest = v;
            for i in (0..d).rev() {
                coords[i] = rest % l;
                rest /= l;
            }
            for axis in 0..d {
                let mut nb = coords.clone();
                nb[axis] = (nb[axis] + 1) % l;
                let mut w = 0usize;
                for i in 0..d {
                    w = w * l + nb[i];
                }
                let pair = (v.min(w), v.max(w));
                if v != w && !edges.contains(&pair) {
                    edges.push(pair);
                }
            }
        }
        Graph::new(n, edges)
    }

    /// Path on n vertices (n-1 edges in traversal order).
    pub fn path(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::parameter("path needs n >= 1"));
        }
        Graph::new(n, (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect())
    }

    /// Cycle on n vertices, edges in traversal order.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::parameter("cycle needs n >= 3"));
        }
        let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        edges.push((0, n - 1));
        Graph::new(n, edges)
    }

    /// Complete graph, edges in lexicographic pair order.
    pub fn complete(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::parameter("complete graph needs n >= 1"));
        }
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Graph::new(n, edges)
    }

    /// Star with n leaves attached to vertex 0.
    pub fn star(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::parameter("star needs n >= 1 leaves"));
        }
        Graph::new(n + 1, (1..=n).map(|v| (0, v)).collect())
    }

    /// True iff the graph is connected (using all edges).
    pub fn is_connected(&self) -> bool {
        let full = EdgeSubset::full(self.n_edges());
        components(self, &full).0 == 1
    }

    pub fn is_tree(&self) -> bool {
        self.n_edges() + 1 == self.n && self.is_connected()
    }

    /// Parses a builtin name: `torus:L,d`, `path:n`, `cycle:n`,
    /// `complete:n`, `star:n`.
    pub fn parse_builtin(spec: &str) -> Result<Self> {
        let (kind, args) = spec
            .split_once(':')
            .ok_or_else(|| Error::parameter(format!("bad graph spec '{spec}'")))?;
        let nums: Vec<usize> = args
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parameter(format!("bad graph spec '{spec}'")))?;
        match (kind, nums.as_slice()) {
            ("torus", [l, d]) => Graph::torus(*l, *d),
            ("path", [n]) => Graph::path(*n),
            ("cycle", [n]) => Graph::cycle(*n),
            ("complete", [n]) => Graph::complete(*n),
            ("star", [n]) => Graph::star(*n),
            _ => Err(Error::parameter(format!("bad graph spec '{spec}'"))),
        }
    }

    /// Reads `{"n": <int>, "edges": [[u,v], ...]}`; file edge order
    /// becomes the edge index order.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        Graph::new(file.n, file.edges)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphFile {
            n: self.n,
            edges: self.edges.clone(),
        })
        .expect("graph serialization")
    }
}

/// A subset of the edges of a graph, as a bit-set keyed by edge index.
/// The bit pattern doubles as the RC state index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeSubset {
    bits: u32,
    n_edges: usize,
}

impl EdgeSubset {
    pub fn empty(n_edges: usize) -> Self {
        assert!(n_edges <= MAX_EDGES, "edge count exceeds bit-set width");
        EdgeSubset { bits: 0, n_edges }
    }

    pub fn full(n_edges: usize) -> Self {
        assert!(n_edges <= MAX_EDGES);
        let bits = if n_edges == 32 { u32::MAX } else { (1u32 << n_edges) - 1 };
        EdgeSubset { bits, n_edges }
    }

    pub fn from_bits(bits: u32, n_edges: usize) -> Self {
        assert!(n_edges <= MAX_EDGES);
        debug_assert!(u64::from(bits) < (1u64 << n_edges) || n_edges == 32);
        EdgeSubset { bits, n_edges }
    }

    pub fn from_edges(edges: &[usize], n_edges: usize) -> Self {
        let mut s = EdgeSubset::empty(n_edges);
        for &e in edges {
            assert!(e < n_edges);
            s.bits |= 1 << e;
        }
        s
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// The RC state index of this subset.
    pub fn index(&self) -> usize {
        self.bits as usize
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn contains(&self, e: usize) -> bool {
        self.bits >> e & 1 == 1
    }

    /// |A|
    pub fn size(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn with_edge(&self, e: usize) -> Self {
        EdgeSubset { bits: self.bits | 1 << e, ..*self }
    }

    pub fn without_edge(&self, e: usize) -> Self {
        EdgeSubset { bits: self.bits & !(1 << e), ..*self }
    }

    pub fn toggled(&self, e: usize) -> Self {
        EdgeSubset { bits: self.bits ^ 1 << e, ..*self }
    }

    pub fn is_subset_of(&self, other: &EdgeSubset) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn union(&self, other: &EdgeSubset) -> Self {
        EdgeSubset { bits: self.bits | other.bits, ..*self }
    }

    pub fn iter_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_edges).filter(move |&e| self.contains(e))
    }

    /// All subsets of an edge set of the given size, in index order.
    pub fn all(n_edges: usize) -> impl Iterator<Item = EdgeSubset> {
        assert!(n_edges < MAX_EDGES);
        (0u32..1 << n_edges).map(move |bits| EdgeSubset { bits, n_edges })
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller root so labels stay canonical
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

/// Connected components of (V, A). Returns `(c(A), labels)` where each
/// label is the smallest vertex index in the component; isolated
/// vertices count as components.
pub fn components(g: &Graph, a: &EdgeSubset) -> (usize, Vec<usize>) {
    let mut uf = UnionFind::new(g.n_vertices());
    for e in a.iter_edges() {
        let (u, v) = g.edge(e);
        uf.union(u, v);
    }
    let labels: Vec<usize> = (0..g.n_vertices()).map(|v| uf.find(v)).collect();
    let count = labels.iter().enumerate().filter(|&(v, &l)| v == l).count();
    (count, labels)
}

/// True iff u and v lie in the same component of (V, A).
pub fn connected_in(g: &Graph, a: &EdgeSubset, u: usize, v: usize) -> bool {
    if u == v {
        return true;
    }
    let mut uf = UnionFind::new(g.n_vertices());
    for e in a.iter_edges() {
        let (x, y) = g.edge(e);
        uf.union(x, y);
    }
    uf.find(u) == uf.find(v)
}

/// All labeled connected simple graphs on 2..=max_vertices vertices,
/// each exactly once, in deterministic order (vertex count, then edge
/// bitmask over lexicographic pairs).
pub fn enumerate_connected_graphs(max_vertices: usize) -> Result<Vec<Graph>> {
    if max_vertices > 5 {
        return Err(Error::SizeLimit {
            what: "connected graph enumeration".into(),
            requested: max_vertices,
            cap: 5,
        });
    }
    let mut out = Vec::new();
    for n in 2..=max_vertices {
        let pairs: Vec<(usize, usize)> = {
            let mut p = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    p.push((u, v));
                }
            }
            p
        };
        for mask in 0u32..1 << pairs.len() {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            let g = Graph::new(n, edges)?;
            if g.is_connected() {
                out.push(g);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn torus_1d_is_cycle() {
        let t = Graph::torus(3, 1).unwrap();
        assert_eq!(t.n_vertices(), 3);
        assert_eq!(t.n_edges(), 3);
        let c = Graph::cycle(3).unwrap();
        let mut te: Vec<_> = t.edges().to_vec();
        let mut ce: Vec<_> = c.edges().to_vec();
        te.sort();
        ce.sort();
        assert_eq!(te, ce);
    }

    #[test]
    fn torus_counts() {
        let t = Graph::torus(3, 2).unwrap();
        assert_eq!(t.n_vertices(), 9);
        assert_eq!(t.n_edges(), 18);
        // L=2 collapses the doubled neighbor pairs
        let t22 = Graph::torus(2, 2).unwrap();
        assert_eq!(t22.n_vertices(), 4);
        assert_eq!(t22.n_edges(), 4);
    }

    #[test]
    fn torus_is_regular_for_l_ge_3() {
        for (l, d) in [(3, 1), (4, 1), (3, 2), (4, 2)] {
            let t = Graph::torus(l, d).unwrap();
            for v in 0..t.n_vertices() {
                assert_eq!(t.degree(v), 2 * d, "torus({l},{d}) vertex {v}");
            }
        }
    }

    #[test]
    fn basic_constructions() {
        assert_eq!(Graph::path(2).unwrap().n_edges(), 1);
        assert_eq!(Graph::cycle(4).unwrap().n_edges(), 4);
        assert_eq!(Graph::complete(4).unwrap().n_edges(), 6);
        assert_eq!(Graph::star(3).unwrap().n_edges(), 3);
        assert!(Graph::cycle(2).is_err());
        assert!(Graph::torus(1, 2).is_err());
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::new(3, vec![(0, 0)]).is_err());
        assert!(Graph::new(3, vec![(0, 3)]).is_err());
        assert!(Graph::new(3, vec![(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn triangle_components() {
        let g = Graph::cycle(3).unwrap();
        let m = g.n_edges();
        assert_eq!(components(&g, &EdgeSubset::empty(m)).0, 3);
        assert_eq!(components(&g, &EdgeSubset::full(m)).0, 1);
        let one = EdgeSubset::from_edges(&[0], m); // edge {0,1}
        assert_eq!(components(&g, &one).0, 2);
    }

    #[test]
    fn connectivity_queries() {
        let g = Graph::cycle(3).unwrap();
        let m = g.n_edges();
        let a = EdgeSubset::from_edges(&[0, 1], m); // {0,1},{1,2}
        assert!(connected_in(&g, &a, 0, 2));
        assert!(!connected_in(&g, &EdgeSubset::empty(m), 0, 1));
        assert!(connected_in(&g, &EdgeSubset::empty(m), 2, 2));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_connected_graphs(2).unwrap().len(), 1);
        // K2 plus 4 labeled connected graphs on 3 vertices
        assert_eq!(enumerate_connected_graphs(3).unwrap().len(), 5);
        let four = enumerate_connected_graphs(4).unwrap();
        assert!(four.iter().any(|g| g.n_vertices() == 4 && g.n_edges() == 6));
        assert!(enumerate_connected_graphs(6).is_err());
    }

    #[test]
    fn builtin_parse() {
        assert_eq!(Graph::parse_builtin("torus:3,2").unwrap().n_edges(), 18);
        assert_eq!(Graph::parse_builtin("path:4").unwrap().n_edges(), 3);
        assert!(Graph::parse_builtin("blob:3").is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = Graph::cycle(4).unwrap();
        let back = Graph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
    }

    proptest! {
        #[test]
        fn component_count_invariants(mask in 0u32..64, extra in 0usize..6) {
            let g = Graph::complete(4).unwrap();
            let m = g.n_edges();
            let a = EdgeSubset::from_bits(mask, m);
            let (c, labels) = components(&g, &a);
            prop_assert!(c >= 1);
            prop_assert_eq!(components(&g, &EdgeSubset::empty(m)).0, 4);
            // adding one edge drops the count by at most 1
            let b = a.with_edge(extra % m);
            let (cb, _) = components(&g, &b);
            prop_assert!(cb == c || cb + 1 == c || b == a);
            // labels agree with pairwise connectivity
            for u in 0..4 {
                for v in 0..4 {
                    prop_assert_eq!(connected_in(&g, &a, u, v), labels[u] == labels[v]);
                }
            }
        }
    }
}
