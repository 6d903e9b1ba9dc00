//! Finite simple graphs with a dense all-pairs distance table.
//!
//! Vertices are the dense identifiers `0..n`. Graphs read from an edge list
//! keep their original integer labels in [`Graph::label`]. Product graphs
//! encode the pair `(i, j)` as `i * n2 + j` and record the coordinates of
//! every vertex in the flattened list of leaf factors, so products of
//! products behave uniformly.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use crate::error::{Error, Result};

pub const MAX_VERTICES: usize = 4096;
pub const MAX_GEODESICS: usize = 1_000_000;

/// Description of a graph to build.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    /// The segment `{0, .., n-1}` of ℤ.
    Path(usize),
    /// The cycle ℤ/r, `r >= 3`.
    Cycle(usize),
    Complete(usize),
    /// `{0,1}^n` built as an n-fold product of two-vertex graphs.
    Hypercube(usize),
    /// Left-nested product of the listed graphs.
    Product(Vec<GraphSpec>),
    /// Edge-list text (see [`Graph::from_edge_list`]).
    EdgeList(String),
}

#[derive(Debug, Clone)]
pub struct ProductStructure {
    pub left: Arc<Graph>,
    pub right: Arc<Graph>,
    /// Leaf factors, left to right.
    pub factors: Vec<Arc<Graph>>,
    /// `coords[v][i]` is the vertex of `factors[i]` that `v` projects to.
    pub coords: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct Graph {
    labels: Vec<u64>,
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    dist: Vec<u32>,
    product: Option<ProductStructure>,
}

/// A walk with consecutive vertices adjacent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Curve(pub Vec<usize>);

impl Curve {
    pub fn len(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.0.len() <= 1
    }

    pub fn start(&self) -> usize {
        self.0[0]
    }

    pub fn end(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    pub fn is_curve(&self, g: &Graph) -> bool {
        !self.0.is_empty() && self.0.windows(2).all(|w| g.is_edge(w[0], w[1]))
    }

    pub fn is_geodesic(&self, g: &Graph) -> bool {
        self.is_curve(g) && g.dist(self.start(), self.end()) as usize == self.len()
    }
}

pub fn build_graph(spec: &GraphSpec) -> Result<Arc<Graph>> {
    match spec {
        GraphSpec::Path(n) => Graph::path(*n).map(Arc::new),
        GraphSpec::Cycle(r) => Graph::cycle(*r).map(Arc::new),
        GraphSpec::Complete(n) => Graph::complete(*n).map(Arc::new),
        GraphSpec::Hypercube(n) => Graph::hypercube(*n),
        GraphSpec::EdgeList(text) => Graph::from_edge_list(text).map(Arc::new),
        GraphSpec::Product(parts) => {
            let mut it = parts.iter();
            let first = it.next().ok_or(Error::EmptyGraph)?;
            let mut acc = build_graph(first)?;
            for part in it {
                let next = build_graph(part)?;
                acc = Arc::new(Graph::product(&acc, &next)?);
            }
            Ok(acc)
        }
    }
}

impl Graph {
    /// Builds a graph on `0..n` from undirected edges. Duplicate edges are
    /// merged; self-loops and disconnected inputs are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::with_labels((0..n as u64).collect(), edges)
    }

    fn with_labels(labels: Vec<u64>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if n > MAX_VERTICES {
            return Err(Error::TooManyVertices(n, MAX_VERTICES));
        }
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u >= n {
                return Err(Error::UnknownVertex(u as u64));
            }
            if v >= n {
                return Err(Error::UnknownVertex(v as u64));
            }
            if u == v {
                return Err(Error::SelfLoop(labels[u]));
            }
            set.insert((u.min(v), u.max(v)));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        let dist = all_pairs_bfs(&adj)?;
        Ok(Graph { labels, adj, edges, dist, product: None })
    }

    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges)
    }

    pub fn cycle(r: usize) -> Result<Self> {
        if r < 3 {
            return Err(Error::CycleTooShort(r));
        }
        let edges: Vec<_> = (0..r).map(|i| (i, (i + 1) % r)).collect();
        Self::from_edges(r, &edges)
    }

    /// Cayley graph of ℤ/r with generator 1: the two-vertex graph for
    /// `r = 2`, the cycle otherwise.
    pub fn cyclic_group(r: usize) -> Result<Self> {
        match r {
            2 => Self::path(2),
            _ => Self::cycle(r),
        }
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::from_edges(n, &edges)
    }

    pub fn hypercube(n: usize) -> Result<Arc<Self>> {
        if n == 0 {
            return Self::path(1).map(Arc::new);
        }
        let k2 = Arc::new(Self::path(2)?);
        let mut acc = k2.clone();
        for _ in 1..n {
            acc = Arc::new(Self::product(&acc, &k2)?);
        }
        Ok(acc)
    }

    /// Parses an edge list: one edge per line as two whitespace-separated
    /// non-negative integers, `#` starts a comment line. The vertex set is
    /// the set of integers mentioned, relabelled densely in increasing order.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut raw = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let mut next = || -> Result<u64> {
                let tok =
                    parts.next().ok_or_else(|| Error::Parse { line: i + 1, msg: "expected two vertices".into() })?;
                tok.parse::<u64>().map_err(|e| Error::Parse { line: i + 1, msg: format!("{tok:?}: {e}") })
            };
            let u = next()?;
            let v = next()?;
            if parts.next().is_some() {
                return Err(Error::Parse { line: i + 1, msg: "trailing tokens".into() });
            }
            raw.push((u, v));
        }
        let labels: BTreeSet<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
        let index: BTreeMap<u64, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let edges: Vec<_> = raw.iter().map(|(u, v)| (index[u], index[v])).collect();
        Self::with_labels(labels.into_iter().collect(), &edges)
    }

    /// Cartesian product `g1 × g2` with the sum metric.
    pub fn product(g1: &Arc<Graph>, g2: &Arc<Graph>) -> Result<Self> {
        let (n1, n2) = (g1.n(), g2.n());
        let n = n1 * n2;
        if n > MAX_VERTICES {
            return Err(Error::TooManyVertices(n, MAX_VERTICES));
        }
        let mut adj = vec![Vec::new(); n];
        let mut edges = Vec::new();
        for i in 0..n1 {
            for j in 0..n2 {
                let v = i * n2 + j;
                for &i2 in &g1.adj[i] {
                    adj[v].push(i2 * n2 + j);
                }
                for &j2 in &g2.adj[j] {
                    adj[v].push(i * n2 + j2);
                }
                adj[v].sort_unstable();
                edges.extend(adj[v].iter().filter(|&&w| w > v).map(|&w| (v, w)));
            }
        }
        edges.sort_unstable();
        let mut dist = vec![0u32; n * n];
        for v in 0..n {
            let (i, j) = (v / n2, v % n2);
            for w in 0..n {
                let (k, l) = (w / n2, w % n2);
                dist[v * n + w] = g1.dist(i, k) + g2.dist(j, l);
            }
        }
        let leaves = |g: &Arc<Graph>| -> Vec<Arc<Graph>> {
            match &g.product {
                Some(p) => p.factors.clone(),
                None => vec![g.clone()],
            }
        };
        let coords_of = |g: &Graph, v: usize| -> Vec<usize> {
            match &g.product {
                Some(p) => p.coords[v].clone(),
                None => vec![v],
            }
        };
        let mut factors = leaves(g1);
        factors.extend(leaves(g2));
        let coords = (0..n)
            .map(|v| {
                let mut c = coords_of(g1, v / n2);
                c.extend(coords_of(g2, v % n2));
                c
            })
            .collect();
        Ok(Graph {
            labels: (0..n as u64).collect(),
            adj,
            edges,
            dist,
            product: Some(ProductStructure { left: g1.clone(), right: g2.clone(), factors, coords }),
        })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// Undirected edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn is_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn dist(&self, u: usize, v: usize) -> u32 {
        self.dist[u * self.n() + v]
    }

    pub fn label(&self, v: usize) -> u64 {
        self.labels[v]
    }

    pub fn vertex_by_label(&self, label: u64) -> Option<usize> {
        self.labels.binary_search(&label).ok()
    }

    pub fn product_structure(&self) -> Option<&ProductStructure> {
        self.product.as_ref()
    }

    /// Vertex of a product graph with the given leaf-factor coordinates.
    pub fn vertex_of_coords(&self, coords: &[usize]) -> Option<usize> {
        match &self.product {
            None => match coords {
                [v] if *v < self.n() => Some(*v),
                _ => None,
            },
            Some(p) => {
                if coords.len() != p.factors.len() {
                    return None;
                }
                let mut v = 0usize;
                for (c, f) in coords.iter().zip(&p.factors) {
                    if *c >= f.n() {
                        return None;
                    }
                    v = v * f.n() + c;
                }
                Some(v)
            }
        }
    }

    /// All geodesics from `x` to `y`, in lexicographic order.
    pub fn enumerate_geodesics(&self, x: usize, y: usize) -> Result<Vec<Curve>> {
        let mut out = Vec::new();
        let mut stack = vec![x];
        self.extend_geodesics(y, &mut stack, &mut out)?;
        Ok(out)
    }

    fn extend_geodesics(&self, y: usize, stack: &mut Vec<usize>, out: &mut Vec<Curve>) -> Result<()> {
        let cur = *stack.last().unwrap();
        if cur == y {
            if out.len() >= MAX_GEODESICS {
                return Err(Error::TooManyGeodesics(MAX_GEODESICS));
            }
            out.push(Curve(stack.clone()));
            return Ok(());
        }
        let remaining = self.dist(cur, y);
        for &w in &self.adj[cur] {
            if self.dist(w, y) + 1 == remaining {
                stack.push(w);
                self.extend_geodesics(y, stack, out)?;
                stack.pop();
            }
        }
        Ok(())
    }
}

fn all_pairs_bfs(adj: &[Vec<usize>]) -> Result<Vec<u32>> {
    let n = adj.len();
    let mut dist = vec![u32::MAX; n * n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        let row = &mut dist[s * n..(s + 1) * n];
        row[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if row[w] == u32::MAX {
                    row[w] = row[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if row.contains(&u32::MAX) {
            return Err(Error::Disconnected);
        }
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_walks(g: &Graph, x: usize, y: usize) -> BTreeSet<Curve> {
        // every adjacent-step walk of length d(x,y), no distance filtering
        let len = g.dist(x, y) as usize;
        let mut walks = vec![vec![x]];
        for _ in 0..len {
            let mut next = Vec::new();
            for w in &walks {
                for &v in g.neighbors(*w.last().unwrap()) {
                    let mut w2 = w.clone();
                    w2.push(v);
                    next.push(w2);
                }
            }
            walks = next;
        }
        walks.into_iter().filter(|w| *w.last().unwrap() == y).map(Curve).collect()
    }

    #[test]
    fn path_metric() {
        let g = Graph::path(4).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edges().len(), 3);
        assert_eq!(g.dist(0, 3), 3);
    }

    #[test]
    fn hypercube_two() {
        let g = Graph::hypercube(2).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edges().len(), 4);
        let a = g.vertex_of_coords(&[0, 0]).unwrap();
        let b = g.vertex_of_coords(&[1, 1]).unwrap();
        assert_eq!(g.dist(a, b), 2);
        assert_eq!(g.enumerate_geodesics(a, b).unwrap().len(), 2);
    }

    #[test]
    fn complete_three() {
        let g = Graph::complete(3).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(g.dist(x, y), u32::from(x != y));
            }
        }
    }

    #[test]
    fn construction_errors() {
        assert_eq!(Graph::cycle(2).unwrap_err(), Error::CycleTooShort(2));
        assert_eq!(Graph::path(0).unwrap_err(), Error::EmptyGraph);
        assert_eq!(Graph::from_edge_list("0 1\n2 3\n").unwrap_err(), Error::Disconnected);
        assert!(matches!(Graph::from_edge_list("0 1\n1 x\n"), Err(Error::Parse { line: 2, .. })));
        assert_eq!(Graph::from_edge_list("# nothing\n").unwrap_err(), Error::EmptyGraph);
        assert_eq!(Graph::from_edge_list("3 3\n").unwrap_err(), Error::SelfLoop(3));
        assert!(matches!(Graph::path(MAX_VERTICES + 1), Err(Error::TooManyVertices(..))));
    }

    #[test]
    fn edge_list_relabels() {
        let g = Graph::from_edge_list("# square\n10 20\n20 30\n30 40\n40 10\n10 20\n").unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edges().len(), 4);
        let a = g.vertex_by_label(10).unwrap();
        let c = g.vertex_by_label(30).unwrap();
        assert_eq!(g.dist(a, c), 2);
        assert_eq!(g.label(c), 30);
    }

    #[test]
    fn trivial_geodesic() {
        let g = Graph::cycle(5).unwrap();
        let gs = g.enumerate_geodesics(2, 2).unwrap();
        assert_eq!(gs, vec![Curve(vec![2])]);
        assert_eq!(g.enumerate_geodesics(0, 3).unwrap().len(), 1);
    }

    #[test]
    fn grid_geodesic_count() {
        // path 3 × path 2, corner to corner: binom(3, 2) = 3
        let g = build_graph(&GraphSpec::Product(vec![GraphSpec::Path(3), GraphSpec::Path(2)])).unwrap();
        let a = g.vertex_of_coords(&[0, 0]).unwrap();
        let b = g.vertex_of_coords(&[2, 1]).unwrap();
        assert_eq!(g.enumerate_geodesics(a, b).unwrap().len(), 3);
    }

    #[test]
    fn product_of_paths_is_square() {
        let p2 = Arc::new(Graph::path(2).unwrap());
        let g = Graph::product(&p2, &p2).unwrap();
        let cube = Graph::hypercube(2).unwrap();
        assert_eq!(g.edges(), cube.edges());
    }

    #[test]
    fn geodesics_match_brute_force() {
        let graphs = vec![
            Graph::cycle(6).unwrap(),
            Graph::complete(4).unwrap(),
            (*Graph::hypercube(3).unwrap()).clone(),
            (*build_graph(&GraphSpec::Product(vec![GraphSpec::Path(4), GraphSpec::Cycle(3)])).unwrap()).clone(),
            Graph::from_edge_list("0 1\n1 2\n2 3\n3 0\n1 4\n4 5\n5 3\n").unwrap(),
        ];
        for g in &graphs {
            assert!(g.n() <= 12);
            for x in 0..g.n() {
                for y in 0..g.n() {
                    let got: BTreeSet<_> = g.enumerate_geodesics(x, y).unwrap().into_iter().collect();
                    for c in &got {
                        assert!(c.is_geodesic(g));
                        assert_eq!((c.start(), c.end()), (x, y));
                    }
                    assert_eq!(got, brute_force_walks(g, x, y));
                }
            }
        }
    }

    #[test]
    fn metric_axioms() {
        let g = build_graph(&GraphSpec::Product(vec![GraphSpec::Path(3), GraphSpec::Cycle(4)])).unwrap();
        let n = g.n();
        for x in 0..n {
            for y in 0..n {
                assert_eq!(g.dist(x, y), g.dist(y, x));
                assert_eq!(g.dist(x, y) == 0, x == y);
                assert_eq!(g.dist(x, y) == 1, g.is_edge(x, y));
                for z in 0..n {
                    assert!(g.dist(x, z) <= g.dist(x, y) + g.dist(y, z));
                }
            }
        }
    }
}
