//! The W₁-orientation of a graph with respect to a pair of measures, the
//! oriented edge and triple graphs built on it, discrete divergences and
//! extremal-geodesic counting.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::ops::{Add, Sub};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::measure::Measure;
use crate::transport;

/// An oriented triple `x0 -> x1 -> x2` with the indices of its two edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triple {
    pub x0: usize,
    pub x1: usize,
    pub x2: usize,
    pub first: usize,
    pub second: usize,
}

#[derive(Debug, Clone)]
pub struct Orientation {
    graph: Arc<Graph>,
    edges: Vec<(usize, usize)>,
    edge_index: HashMap<(usize, usize), usize>,
    // ℰ(x) and ℱ(x) as edge indices
    in_edges: Vec<Vec<usize>>,
    out_edges: Vec<Vec<usize>>,
    triples: Vec<Triple>,
    triples_out_of: Vec<Vec<usize>>,
    triples_into: Vec<Vec<usize>>,
    active: Vec<usize>,
    is_active: Vec<bool>,
}

/// W₁-orientation of `g` with respect to `(f0, f1)`: `x -> y` iff some pair
/// `(a, b)` charged by an optimal coupling has a geodesic stepping from
/// `x` to `y`.
pub fn orient(g: &Arc<Graph>, f0: &Measure, f1: &Measure) -> Result<Orientation> {
    let pairs = transport::optimal_support_union(g, f0, f1);
    let mut edges = BTreeSet::new();
    for &(a, b) in &pairs {
        let dab = g.dist(a, b);
        if dab == 0 {
            continue;
        }
        for &(u, v) in g.edges() {
            for (x, y) in [(u, v), (v, u)] {
                if g.dist(a, x) + 1 + g.dist(y, b) == dab {
                    edges.insert((x, y));
                }
            }
        }
    }
    let extra: Vec<_> = f0.support().chain(f1.support()).collect();
    Orientation::from_edges(g.clone(), edges.into_iter().collect(), &extra)
}

impl Orientation {
    /// Builds an orientation from directed edges of `graph`. Active vertices
    /// are the edge endpoints plus `extra_active`. Acyclicity is not checked
    /// here; see [`Orientation::topological_order`].
    pub fn from_edges(graph: Arc<Graph>, mut edges: Vec<(usize, usize)>, extra_active: &[usize]) -> Result<Self> {
        let n = graph.n();
        edges.sort_unstable();
        edges.dedup();
        let mut edge_index = HashMap::with_capacity(edges.len());
        for (i, &(x, y)) in edges.iter().enumerate() {
            if !graph.is_edge(x, y) {
                return Err(Error::NotAnEdge(x, y));
            }
            edge_index.insert((x, y), i);
        }
        for &(x, y) in &edges {
            if edge_index.contains_key(&(y, x)) {
                return Err(Error::DoublyOriented(x.min(y), x.max(y)));
            }
        }
        let mut in_edges = vec![Vec::new(); n];
        let mut out_edges = vec![Vec::new(); n];
        for (i, &(x, y)) in edges.iter().enumerate() {
            out_edges[x].push(i);
            in_edges[y].push(i);
        }
        let mut triples = Vec::new();
        let mut triples_out_of = vec![Vec::new(); edges.len()];
        let mut triples_into = vec![Vec::new(); edges.len()];
        for (first, &(x0, x1)) in edges.iter().enumerate() {
            for &second in &out_edges[x1] {
                let x2 = edges[second].1;
                let k = triples.len();
                triples.push(Triple { x0, x1, x2, first, second });
                triples_out_of[first].push(k);
                triples_into[second].push(k);
            }
        }
        let mut is_active = vec![false; n];
        for &(x, y) in &edges {
            is_active[x] = true;
            is_active[y] = true;
        }
        for &v in extra_active {
            if v >= n {
                return Err(Error::UnknownVertex(v as u64));
            }
            is_active[v] = true;
        }
        let active = (0..n).filter(|&v| is_active[v]).collect();
        Ok(Orientation {
            graph,
            edges,
            edge_index,
            in_edges,
            out_edges,
            triples,
            triples_out_of,
            triples_into,
            active,
            is_active,
        })
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    /// Number of vertices of the underlying graph (length of vertex functions).
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// E(G): oriented edges, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// T(G): oriented triples.
    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn edge_id(&self, x: usize, y: usize) -> Option<usize> {
        self.edge_index.get(&(x, y)).copied()
    }

    pub fn triple_id(&self, x0: usize, x1: usize, x2: usize) -> Option<usize> {
        let first = self.edge_id(x0, x1)?;
        self.triples_out_of[first].iter().copied().find(|&k| self.triples[k].x2 == x2)
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn is_active(&self, v: usize) -> bool {
        self.is_active[v]
    }

    /// ℰ(x) as vertices.
    pub fn predecessors(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.in_edges[x].iter().map(move |&e| self.edges[e].0)
    }

    /// ℱ(x) as vertices.
    pub fn successors(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_edges[x].iter().map(move |&e| self.edges[e].1)
    }

    pub fn in_edges(&self, x: usize) -> &[usize] {
        &self.in_edges[x]
    }

    pub fn out_edges(&self, x: usize) -> &[usize] {
        &self.out_edges[x]
    }

    /// Triples whose first edge is `e`.
    pub fn triples_out_of(&self, e: usize) -> &[usize] {
        &self.triples_out_of[e]
    }

    /// Triples whose second edge is `e`.
    pub fn triples_into(&self, e: usize) -> &[usize] {
        &self.triples_into[e]
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Active vertices in topological order, or [`Error::CycleDetected`].
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let n = self.n();
        let mut indeg = vec![0usize; n];
        for &(_, y) in &self.edges {
            indeg[y] += 1;
        }
        let mut stack: Vec<usize> = self.active.iter().rev().copied().filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.active.len());
        while let Some(v) = stack.pop() {
            order.push(v);
            for &e in self.out_edges[v].iter().rev() {
                let w = self.edges[e].1;
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    stack.push(w);
                }
            }
        }
        if order.len() != self.active.len() {
            return Err(Error::CycleDetected);
        }
        Ok(order)
    }

    fn check_len(expected: usize, got: usize) -> Result<()> {
        if expected != got {
            return Err(Error::LengthMismatch { expected, got });
        }
        Ok(())
    }

    /// `∇·g(x) = Σ_{ℱ(x)} g(x x2) - Σ_{ℰ(x)} g(x0 x)` for an edge function.
    pub fn divergence<T>(&self, g: &[T]) -> Result<Vec<T>>
    where
        T: Clone + Zero + Add<Output = T> + Sub<Output = T>,
    {
        Self::check_len(self.edges.len(), g.len())?;
        let mut out = vec![T::zero(); self.n()];
        for (e, &(x, y)) in self.edges.iter().enumerate() {
            out[x] = out[x].clone() + g[e].clone();
            out[y] = out[y].clone() - g[e].clone();
        }
        Ok(out)
    }

    /// Divergence of a triple function onto edges:
    /// `∇·h(x0 x1) = Σ_{ℱ(x1)} h(x0 x1 x2) - Σ_{ℰ(x0)} h(x-1 x0 x1)`.
    pub fn edge_divergence<T>(&self, h: &[T]) -> Result<Vec<T>>
    where
        T: Clone + Zero + Add<Output = T> + Sub<Output = T>,
    {
        Self::check_len(self.triples.len(), h.len())?;
        let mut out = vec![T::zero(); self.edges.len()];
        for (k, tr) in self.triples.iter().enumerate() {
            out[tr.first] = out[tr.first].clone() + h[k].clone();
            out[tr.second] = out[tr.second].clone() - h[k].clone();
        }
        Ok(out)
    }

    /// `∇₂·h = ∇·(∇·h)`.
    pub fn second_divergence<T>(&self, h: &[T]) -> Result<Vec<T>>
    where
        T: Clone + Zero + Add<Output = T> + Sub<Output = T>,
    {
        self.divergence(&self.edge_divergence(h)?)
    }

    /// Sub-orientation keeping the given edges (by index) and active vertices.
    pub fn restrict(&self, edge_ids: &[usize], extra_active: &[usize]) -> Result<Orientation> {
        let edges = edge_ids.iter().map(|&e| self.edges[e]).collect();
        Orientation::from_edges(self.graph.clone(), edges, extra_active)
    }

    /// Debug dump: `x -> y` lines, then `A x value`, `B x value`, `EG value`.
    pub fn dump(&self) -> Result<String> {
        let pc = path_counts(self)?;
        let mut s = String::new();
        for &(x, y) in &self.edges {
            let _ = writeln!(s, "{} -> {}", self.graph.label(x), self.graph.label(y));
        }
        for &v in &self.active {
            let _ = writeln!(s, "A {} {}", self.graph.label(v), pc.a[v]);
        }
        for &v in &self.active {
            let _ = writeln!(s, "B {} {}", self.graph.label(v), pc.b[v]);
        }
        let _ = writeln!(s, "EG {}", pc.eg);
        Ok(s)
    }
}

/// Oriented-path counts. `a[x]` counts oriented paths from a source (a
/// vertex with empty ℰ) to `x`, `b[x]` paths from `x` to a sink; both are
/// zero off the active set.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCounts {
    pub a: Vec<BigUint>,
    pub b: Vec<BigUint>,
    /// Number of extremal geodesics.
    pub eg: BigUint,
}

pub fn path_counts(o: &Orientation) -> Result<PathCounts> {
    let order = o.topological_order()?;
    let n = o.n();
    let mut a = vec![BigUint::zero(); n];
    let mut b = vec![BigUint::zero(); n];
    for &x in &order {
        a[x] =
            if o.in_edges(x).is_empty() { BigUint::from(1u8) } else { o.predecessors(x).map(|p| a[p].clone()).sum() };
    }
    for &x in order.iter().rev() {
        b[x] = if o.out_edges(x).is_empty() { BigUint::from(1u8) } else { o.successors(x).map(|s| b[s].clone()).sum() };
    }
    let eg = order.iter().filter(|&&x| o.in_edges(x).is_empty()).map(|&x| b[x].clone()).sum();
    Ok(PathCounts { a, b, eg })
}

impl PathCounts {
    pub fn eg_f64(&self) -> f64 {
        self.eg.to_f64().unwrap_or(f64::INFINITY)
    }

    fn ratio(&self, num: BigUint) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(self.eg.clone()))
    }
}

/// Fraction of extremal geodesics visiting a vertex, an oriented edge or an
/// oriented triple: `A(first) B(last) / |EG|`.
pub fn m_weight(o: &Orientation, pc: &PathCounts, tuple: &[usize]) -> Result<BigRational> {
    let not_oriented = || Error::NotOriented(tuple.to_vec());
    match *tuple {
        [x] if x < o.n() && o.is_active(x) => Ok(pc.ratio(&pc.a[x] * &pc.b[x])),
        [x0, x1] if o.edge_id(x0, x1).is_some() => Ok(pc.ratio(&pc.a[x0] * &pc.b[x1])),
        [x0, x1, x2] if o.triple_id(x0, x1, x2).is_some() => Ok(pc.ratio(&pc.a[x0] * &pc.b[x2])),
        _ => Err(not_oriented()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: u32, d: u32) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn chain(len: usize) -> Orientation {
        let g = Arc::new(Graph::path(len + 1).unwrap());
        let edges = (0..len).map(|i| (i, i + 1)).collect();
        Orientation::from_edges(g, edges, &[]).unwrap()
    }

    #[test]
    fn dirac_chain_orientation() {
        let g = Arc::new(Graph::path(5).unwrap());
        let o = orient(&g, &Measure::dirac(0), &Measure::dirac(3)).unwrap();
        assert_eq!(o.edges(), &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(o.triples().len(), 2);
        assert_eq!(o.active(), &[0, 1, 2, 3]);
    }

    #[test]
    fn interleaved_orientation() {
        let g = Arc::new(Graph::path(4).unwrap());
        let f0 = Measure::uniform(&[0, 2]).unwrap();
        let f1 = Measure::uniform(&[1, 3]).unwrap();
        let o = orient(&g, &f0, &f1).unwrap();
        assert_eq!(o.edges(), &[(0, 1), (2, 3)]);
        assert!(o.triples().is_empty());
        assert_eq!(path_counts(&o).unwrap().eg, BigUint::from(2u8));
    }

    #[test]
    fn diamond_counts_and_weights() {
        let g = Graph::hypercube(2).unwrap();
        let (v00, v01, v10, v11) = (0, 1, 2, 3);
        let o = orient(&g, &Measure::dirac(v00), &Measure::dirac(v11)).unwrap();
        assert_eq!(o.edges().len(), 4);
        assert_eq!(o.triples().len(), 2);
        let pc = path_counts(&o).unwrap();
        let one = BigUint::from(1u8);
        assert_eq!([&pc.a[v00], &pc.a[v01], &pc.a[v10]], [&one, &one, &one]);
        assert_eq!(pc.a[v11], BigUint::from(2u8));
        assert_eq!(pc.b[v00], BigUint::from(2u8));
        assert_eq!(pc.eg, BigUint::from(2u8));
        assert_eq!(m_weight(&o, &pc, &[v00]).unwrap(), ratio(1, 1));
        assert_eq!(m_weight(&o, &pc, &[v00, v01]).unwrap(), ratio(1, 2));
        assert_eq!(m_weight(&o, &pc, &[v00, v01, v11]).unwrap(), ratio(1, 2));
        assert_eq!(m_weight(&o, &pc, &[v00, v10, v11]).unwrap(), ratio(1, 2));
        assert!(matches!(m_weight(&o, &pc, &[v01, v00]), Err(Error::NotOriented(_))));
    }

    #[test]
    fn chain_counts() {
        let o = chain(3);
        let pc = path_counts(&o).unwrap();
        assert!(pc.a.iter().chain(&pc.b).all(|c| *c == BigUint::from(1u8)));
        assert_eq!(pc.eg, BigUint::from(1u8));
        for x in 0..4 {
            assert_eq!(m_weight(&o, &pc, &[x]).unwrap(), ratio(1, 1));
        }
    }

    #[test]
    fn divergences_on_chains() {
        let o = chain(2);
        assert_eq!(o.divergence(&[1.0, 1.0]).unwrap(), vec![1.0, 0.0, -1.0]);
        let o = chain(3);
        assert_eq!(o.second_divergence(&[1.0, 1.0]).unwrap(), vec![1.0, -1.0, -1.0, 1.0]);
        assert_eq!(o.divergence(&[1.0]).unwrap_err(), Error::LengthMismatch { expected: 3, got: 1 });
    }

    #[test]
    fn complete_graph_has_no_triples() {
        let g = Arc::new(Graph::complete(4).unwrap());
        let f0 = Measure::new([(0, 0.5), (1, 0.5)]).unwrap();
        let f1 = Measure::new([(2, 0.25), (3, 0.75)]).unwrap();
        let o = orient(&g, &f0, &f1).unwrap();
        assert!(!o.is_empty());
        assert!(o.triples().is_empty());
    }

    #[test]
    fn cycle_is_detected() {
        let g = Arc::new(Graph::cycle(3).unwrap());
        let o = Orientation::from_edges(g.clone(), vec![(0, 1), (1, 2), (2, 0)], &[]).unwrap();
        assert_eq!(path_counts(&o).unwrap_err(), Error::CycleDetected);
        assert_eq!(
            Orientation::from_edges(g.clone(), vec![(0, 1), (1, 0)], &[]).unwrap_err(),
            Error::DoublyOriented(0, 1)
        );
        let p = Arc::new(Graph::path(3).unwrap());
        assert_eq!(Orientation::from_edges(p, vec![(0, 2)], &[]).unwrap_err(), Error::NotAnEdge(0, 2));
    }

    #[test]
    fn equal_measures_give_empty_orientation() {
        let g = Arc::new(Graph::cycle(5).unwrap());
        let f = Measure::new([(1, 0.3), (3, 0.7)]).unwrap();
        let o = orient(&g, &f, &f).unwrap();
        assert!(o.is_empty());
        assert_eq!(o.active(), &[1, 3]);
        assert_eq!(path_counts(&o).unwrap().eg, BigUint::from(2u8));
    }

    #[test]
    fn dump_format() {
        let o = chain(1);
        assert_eq!(o.dump().unwrap(), "0 -> 1\nA 0 1\nA 1 1\nB 0 1\nB 1 1\nEG 1\n");
    }
}
