//! Orientations and BB-triples on product graphs `G₁ × G₂`: edge classes,
//! split divergences, oriented squares, slices, and the tensorization bound
//! on `H''`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::ops::{Add, Sub};
use std::sync::Arc;

use num_traits::Zero;

use crate::bb_triple::{BbTriple, INEQUALITY_SLACK};
use crate::error::{Error, Result};
use crate::geodesic::GeodesicCurve;
use crate::graph::{Graph, ProductStructure};
use crate::measure::Measure;
use crate::orientation::{orient, Orientation};
use crate::transport;

/// Coordinate axis of a two-factor product: `Left` moves the `G₁`
/// coordinate, `Right` the `G₂` coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Left,
    Right,
}

impl Axis {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Axis::Left),
            2 => Ok(Axis::Right),
            _ => Err(Error::Domain(format!("axis {i}, expected 1 or 2"))),
        }
    }
}

fn structure(g: &Graph) -> Result<&ProductStructure> {
    g.product_structure().ok_or(Error::NotAProduct)
}

/// Vertex `(i, j)` of `G₁ × G₂` for `i ∈ G₁`, `j ∈ G₂`.
fn pair(n2: usize, i: usize, j: usize) -> usize {
    i * n2 + j
}

/// An orientation on a product graph with every edge classified by the
/// coordinate it moves.
#[derive(Debug, Clone)]
pub struct ProductOrientation {
    pub orientation: Arc<Orientation>,
    n2: usize,
    /// Axis moved by each oriented edge.
    pub edge_class: Vec<Axis>,
    /// Leaf factor moved by each oriented edge.
    pub leaf_class: Vec<usize>,
}

/// An oriented product square `x0 -> m1 -> x2`, `x0 -> m2 -> x2` with the
/// first step of `x0 -> m1` along the left axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Square {
    pub x0: usize,
    pub m1: usize,
    pub m2: usize,
    pub x2: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SquareReport {
    pub squares: Vec<Square>,
    /// Triples moving left then right.
    pub t12: usize,
    /// Triples moving right then left.
    pub t21: usize,
    /// `Σ_x |ℱ₁(x)| |ℱ₂(x)|`.
    pub corner_pairs: usize,
    /// Whether `|S| = |T¹²| = |T²¹| = Σ |ℱ₁||ℱ₂|`.
    pub bijection: bool,
}

impl ProductOrientation {
    pub fn new(orientation: Arc<Orientation>) -> Result<Self> {
        let g = orientation.graph().clone();
        let ps = structure(&g)?;
        let n2 = ps.right.n();
        let mut edge_class = Vec::with_capacity(orientation.edges().len());
        let mut leaf_class = Vec::with_capacity(orientation.edges().len());
        for &(x, y) in orientation.edges() {
            edge_class.push(if x / n2 != y / n2 { Axis::Left } else { Axis::Right });
            let leaf = (0..ps.factors.len())
                .find(|&i| ps.coords[x][i] != ps.coords[y][i])
                .expect("adjacent product vertices differ in one coordinate");
            leaf_class.push(leaf);
        }
        Ok(ProductOrientation { orientation, n2, edge_class, leaf_class })
    }

    pub fn graph(&self) -> &Arc<Graph> {
        self.orientation.graph()
    }

    fn class_edges(&self, axis: Axis) -> impl Iterator<Item = usize> + '_ {
        (0..self.edge_class.len()).filter(move |&e| self.edge_class[e] == axis)
    }

    /// `(∇⁽¹⁾·g, ∇⁽²⁾·g)`; their sum is `∇·g`.
    pub fn split_divergence<T>(&self, g: &[T]) -> Result<(Vec<T>, Vec<T>)>
    where
        T: Clone + Zero + Add<Output = T> + Sub<Output = T>,
    {
        let o = &self.orientation;
        if g.len() != o.edges().len() {
            return Err(Error::LengthMismatch { expected: o.edges().len(), got: g.len() });
        }
        let mut parts = [vec![T::zero(); o.n()], vec![T::zero(); o.n()]];
        for (e, &(x, y)) in o.edges().iter().enumerate() {
            let part = &mut parts[(self.edge_class[e] == Axis::Right) as usize];
            part[x] = part[x].clone() + g[e].clone();
            part[y] = part[y].clone() - g[e].clone();
        }
        let [a, b] = parts;
        Ok((a, b))
    }

    /// Oriented product squares together with the counts of the
    /// square-triple bijection.
    pub fn squares(&self) -> SquareReport {
        let o = &self.orientation;
        let n2 = self.n2;
        let mut squares = Vec::new();
        let mut corner_pairs = 0;
        for &x0 in o.active() {
            let left: Vec<usize> = self.successors_along(x0, Axis::Left).collect();
            let right: Vec<usize> = self.successors_along(x0, Axis::Right).collect();
            corner_pairs += left.len() * right.len();
            for &m1 in &left {
                for &m2 in &right {
                    let x2 = pair(n2, m1 / n2, m2 % n2);
                    if o.edge_id(m1, x2).is_some() && o.edge_id(m2, x2).is_some() {
                        squares.push(Square { x0, m1, m2, x2 });
                    }
                }
            }
        }
        let (mut t12, mut t21) = (0, 0);
        for tr in o.triples() {
            match (self.edge_class[tr.first], self.edge_class[tr.second]) {
                (Axis::Left, Axis::Right) => t12 += 1,
                (Axis::Right, Axis::Left) => t21 += 1,
                _ => {}
            }
        }
        squares.sort_unstable();
        let bijection = squares.len() == t12 && t12 == t21 && t21 == corner_pairs;
        SquareReport { squares, t12, t21, corner_pairs, bijection }
    }

    fn successors_along(&self, x: usize, axis: Axis) -> impl Iterator<Item = usize> + '_ {
        let o = &self.orientation;
        o.out_edges(x).iter().filter(move |&&e| self.edge_class[e] == axis).map(move |&e| o.edges()[e].1)
    }

    /// The slice of `tr` obtained by fixing the other coordinate to `fixed`,
    /// as a BB-triple on the factor graph moved by `axis`.
    pub fn project_triple(&self, tr: &BbTriple, axis: Axis, fixed: usize) -> Result<BbTriple> {
        let o = &self.orientation;
        let ps = structure(o.graph())?;
        let n2 = self.n2;
        let (factor, other) = match axis {
            Axis::Left => (ps.left.clone(), ps.right.n()),
            Axis::Right => (ps.right.clone(), ps.left.n()),
        };
        if fixed >= other {
            return Err(Error::UnknownVertex(fixed as u64));
        }
        let lift = |v: usize| match axis {
            Axis::Left => pair(n2, v, fixed),
            Axis::Right => pair(n2, fixed, v),
        };
        let coord = |x: usize| match axis {
            Axis::Left => x / n2,
            Axis::Right => x % n2,
        };
        let edges: Vec<(usize, usize)> = self
            .class_edges(axis)
            .map(|e| o.edges()[e])
            .filter(|&(x, _)| lift(coord(x)) == x)
            .map(|(x, y)| (coord(x), coord(y)))
            .collect();
        let active: Vec<usize> = (0..factor.n()).filter(|&v| o.is_active(lift(v))).collect();
        let sub = Arc::new(Orientation::from_edges(factor.clone(), edges, &active)?);
        let f = (0..factor.n()).map(|v| tr.f[lift(v)]).collect();
        let g = sub
            .edges()
            .iter()
            .map(|&(a, b)| tr.g[o.edge_id(lift(a), lift(b)).expect("slice edge is oriented")])
            .collect();
        let h = sub
            .triples()
            .iter()
            .map(|t| tr.h[o.triple_id(lift(t.x0), lift(t.x1), lift(t.x2)).expect("slice triple is oriented")])
            .collect();
        BbTriple::new(sub, f, g, h)
    }

    /// `Σ` over slices along `axis` of `𝓘(slice)`.
    pub fn slice_sum(&self, tr: &BbTriple, axis: Axis) -> Result<f64> {
        let ps = structure(self.orientation.graph())?;
        let other = match axis {
            Axis::Left => ps.right.n(),
            Axis::Right => ps.left.n(),
        };
        let mut total = 0.0;
        for fixed in 0..other {
            let slice = self.project_triple(tr, axis, fixed)?;
            if slice.mass() > 0.0 {
                total += slice.functional_i()?;
            }
        }
        Ok(total)
    }

    /// `𝓘` of the sub-triple carried by the edges of one leaf factor: the
    /// sum over all slices along that factor with every other coordinate
    /// fixed.
    pub fn leaf_slice_sum(&self, tr: &BbTriple, leaf: usize) -> Result<f64> {
        let o = &self.orientation;
        let ids: Vec<usize> = (0..self.leaf_class.len()).filter(|&e| self.leaf_class[e] == leaf).collect();
        let sub = Arc::new(o.restrict(&ids, o.active())?);
        let g = sub.edges().iter().map(|&(a, b)| tr.g[o.edge_id(a, b).unwrap()]).collect();
        let h = sub.triples().iter().map(|t| tr.h[o.triple_id(t.x0, t.x1, t.x2).unwrap()]).collect();
        BbTriple::new(sub, tr.f.clone(), g, h)?.functional_i()
    }

    /// `Σ g² (1/f(x0) + 1/f(x1))` over oriented edges moving a two-vertex
    /// leaf factor (an involutive generator).
    pub fn involutive_edge_bound(&self, tr: &BbTriple) -> Result<f64> {
        let ps = structure(self.orientation.graph())?;
        Ok(self
            .orientation
            .edges()
            .iter()
            .enumerate()
            .filter(|(e, _)| ps.factors[self.leaf_class[*e]].n() == 2)
            .map(|(e, &(a, b))| tr.g[e] * tr.g[e] * (1.0 / tr.f[a] + 1.0 / tr.f[b]))
            .sum())
    }
}

/// Marginals of a measure on `G₁ × G₂`.
pub fn marginals(g: &Graph, f: &Measure) -> Result<(Measure, Measure)> {
    let ps = structure(g)?;
    let n2 = ps.right.n();
    let (mut a, mut b) = (vec![0.0; ps.left.n()], vec![0.0; n2]);
    for (v, m) in f.atoms() {
        a[v / n2] += m;
        b[v % n2] += m;
    }
    Ok((Measure::normalized(a.into_iter().enumerate())?, Measure::normalized(b.into_iter().enumerate())?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub direct: Vec<(usize, usize)>,
    pub composed: Vec<(usize, usize)>,
    pub equal: bool,
    /// Whether `W₁(f0, f1)` is the sum of the marginal costs.
    pub marginal_additive: bool,
}

/// Compares the orientation of `(f0, f1)` on `G₁ × G₂` with the one composed
/// from the orientations of the marginals: `(x1, x2) -> (y1, x2)` whenever
/// `x1 -> y1` on `G₁` and `x2` is active on `G₂`, and symmetrically.
///
/// The two agree for product measures. In general they need not: the
/// composition only sees the marginal couplings, and when the optimal cost
/// is not additive over the factors the edge sets differ.
pub fn check_orientation_decomposition(g: &Arc<Graph>, f0: &Measure, f1: &Measure) -> Result<DecompositionReport> {
    let ps = structure(g)?;
    let n2 = ps.right.n();
    let direct = orient(g, f0, f1)?;
    let (a0, b0) = marginals(g, f0)?;
    let (a1, b1) = marginals(g, f1)?;
    let o1 = orient(&ps.left, &a0, &a1)?;
    let o2 = orient(&ps.right, &b0, &b1)?;
    let mut composed = BTreeSet::new();
    for &(x, y) in o1.edges() {
        for &j in o2.active() {
            composed.insert((pair(n2, x, j), pair(n2, y, j)));
        }
    }
    for &(x, y) in o2.edges() {
        for &i in o1.active() {
            composed.insert((pair(n2, i, x), pair(n2, i, y)));
        }
    }
    let composed: Vec<_> = composed.into_iter().collect();
    let direct = direct.edges().to_vec();
    let total = transport::w1_cost_exact(g, f0, f1);
    let parts = transport::w1_cost_exact(&ps.left, &a0, &a1) + transport::w1_cost_exact(&ps.right, &b0, &b1);
    Ok(DecompositionReport { equal: direct == composed, direct, composed, marginal_additive: total == parts })
}

/// Product measure `a ⊗ b` on `G₁ × G₂`.
pub fn product_measure(g: &Graph, a: &Measure, b: &Measure) -> Result<Measure> {
    let ps = structure(g)?;
    let n2 = ps.right.n();
    Measure::normalized(a.atoms().flat_map(|(i, x)| b.atoms().map(move |(j, y)| (pair(n2, i, j), x * y))))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorRow {
    pub t: f64,
    pub hpp: f64,
    pub slice_sum_axis1: f64,
    pub slice_sum_axis2: f64,
    /// `Σ` over leaf factors of their slice sums.
    pub leaf_slice_sum: f64,
    pub involutive_edge_bound: f64,
    /// `H''` dominates the axis sum, the leaf sum and the involutive bound.
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorReport {
    pub rows: Vec<TensorRow>,
}

impl TensorReport {
    pub fn all_satisfied(&self) -> bool {
        self.rows.iter().all(|r| r.satisfied)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,Hpp,slice_sum_axis1,slice_sum_axis2,involutive_edge_bound,satisfied\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:e},{:e},{:e},{:e},{}",
                r.t, r.hpp, r.slice_sum_axis1, r.slice_sum_axis2, r.involutive_edge_bound, r.satisfied
            );
        }
        s
    }
}

/// Tensorization check of `H''(t) = 𝓘(f_t, g_t, h_t)` against the slice
/// sums at interior grid points.
pub fn tensorization_check(c: &GeodesicCurve, grid: &[f64]) -> Result<TensorReport> {
    let po = ProductOrientation::new(c.orientation.clone())?;
    let leaves = structure(po.graph())?.factors.len();
    let mut rows = Vec::new();
    for &t in grid.iter().filter(|&&t| t > 0.0 && t < 1.0) {
        let tr = c.eval_triple(t)?;
        let hpp = tr.functional_i()?;
        let slice_sum_axis1 = po.slice_sum(&tr, Axis::Left)?;
        let slice_sum_axis2 = po.slice_sum(&tr, Axis::Right)?;
        let leaf_slice_sum = (0..leaves).map(|l| po.leaf_slice_sum(&tr, l)).sum::<Result<f64>>()?;
        let involutive_edge_bound = po.involutive_edge_bound(&tr)?;
        let slack = INEQUALITY_SLACK * hpp.abs().max(1.0);
        let satisfied = hpp >= slice_sum_axis1 + slice_sum_axis2 - slack
            && hpp >= leaf_slice_sum - slack
            && hpp >= involutive_edge_bound - slack;
        rows.push(TensorRow {
            t,
            hpp,
            slice_sum_axis1,
            slice_sum_axis2,
            leaf_slice_sum,
            involutive_edge_bound,
            satisfied,
        });
    }
    Ok(TensorReport { rows })
}
