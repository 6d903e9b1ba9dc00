//! Optimal transport between finitely supported measures on a graph.
//!
//! The W₁ problem is solved exactly: masses are converted to rationals and
//! the transportation problem is solved by successive shortest paths. Graph
//! distances are integers, so node potentials stay integral and only the
//! flow values are rational.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{Signed, Zero};

use crate::error::Result;
use crate::graph::Graph;
use crate::lp::{self, rational_from_f64, rational_from_int, rational_to_f64, Rational};
use crate::measure::{Coupling, Measure};

/// Resolution of [`exact_masses`].
pub const MASS_QUANTUM: i64 = 1_000_000_000_000;

/// Exact masses of `m`: each atom is rounded to a multiple of
/// `1 / MASS_QUANTUM` (never to zero) and the largest atom absorbs the
/// remainder, so the total is exactly one. Rounding first keeps float noise
/// from creating spurious optimal pairs.
pub fn exact_masses(m: &Measure) -> Vec<(usize, Rational)> {
    let mut units: Vec<(usize, i64)> =
        m.atoms().map(|(v, x)| (v, ((x * MASS_QUANTUM as f64).round() as i64).max(1))).collect();
    let total: i64 = units.iter().map(|u| u.1).sum();
    if let Some(largest) = units.iter_mut().max_by_key(|u| u.1) {
        largest.1 += MASS_QUANTUM - total;
    }
    let q = rational_from_int(MASS_QUANTUM);
    units.into_iter().map(|(v, k)| (v, rational_from_int(k) / &q)).collect()
}

/// Exact optimal solution of the W₁ transportation problem together with
/// integral dual potentials.
#[derive(Debug, Clone)]
pub struct ExactTransport {
    pub sources: Vec<usize>,
    pub sinks: Vec<usize>,
    pub supply: Vec<Rational>,
    pub demand: Vec<Rational>,
    /// `cost[i][j] = d(sources[i], sinks[j])`.
    pub cost: Vec<Vec<i64>>,
    pub flow: Vec<Vec<Rational>>,
    pub total_cost: Rational,
    /// Shortest-path labels of the final residual network, sources first.
    potential: Vec<i64>,
}

impl ExactTransport {
    pub fn solve(g: &Graph, f0: &Measure, f1: &Measure) -> Self {
        let (sources, supply): (Vec<_>, Vec<_>) = exact_masses(f0).into_iter().unzip();
        let (sinks, demand): (Vec<_>, Vec<_>) = exact_masses(f1).into_iter().unzip();
        let cost: Vec<Vec<i64>> =
            sources.iter().map(|&a| sinks.iter().map(|&b| i64::from(g.dist(a, b))).collect()).collect();
        let (ns, nt) = (sources.len(), sinks.len());
        let mut flow = vec![vec![Rational::zero(); nt]; ns];
        let mut supply_left = supply.clone();
        let mut demand_left = demand.clone();

        while supply_left.iter().any(|s| s.is_positive()) {
            let init: Vec<Option<i64>> =
                (0..ns + nt).map(|u| (u < ns && supply_left[u].is_positive()).then_some(0)).collect();
            let (dist, pred) = bellman_ford(&cost, &flow, init);
            let sink = (0..nt)
                .filter(|&j| demand_left[j].is_positive() && dist[ns + j].is_some())
                .min_by_key(|&j| (dist[ns + j].unwrap(), j))
                .expect("balanced transport always has an augmenting path");

            // walk the path back to its source and find the bottleneck
            let mut path = vec![ns + sink];
            let mut u = ns + sink;
            while let Some(p) = pred[u] {
                path.push(p);
                u = p;
            }
            path.reverse();
            let src = path[0];
            let mut delta = supply_left[src].clone().min(demand_left[sink].clone());
            for w in path.windows(2) {
                if w[0] >= ns {
                    // backward arc sink -> source
                    delta = delta.min(flow[w[1]][w[0] - ns].clone());
                }
            }
            for w in path.windows(2) {
                if w[0] < ns {
                    flow[w[0]][w[1] - ns] += &delta;
                } else {
                    flow[w[1]][w[0] - ns] -= &delta;
                }
            }
            supply_left[src] -= &delta;
            demand_left[sink] -= &delta;
        }

        let total_cost = (0..ns)
            .flat_map(|i| (0..nt).map(move |j| (i, j)))
            .fold(Rational::zero(), |acc, (i, j)| acc + &flow[i][j] * rational_from_int(cost[i][j]));
        let (dist, _) = bellman_ford(&cost, &flow, vec![Some(0); ns + nt]);
        let potential = dist.into_iter().map(|d| d.unwrap()).collect();
        ExactTransport { sources, sinks, supply, demand, cost, flow, total_cost, potential }
    }

    /// Zero reduced cost with respect to the final potentials. Every optimal
    /// coupling is supported on tight pairs.
    pub fn is_tight(&self, i: usize, j: usize) -> bool {
        let ns = self.sources.len();
        self.cost[i][j] + self.potential[i] - self.potential[ns + j] == 0
    }

    pub fn coupling(&self, f0: &Measure, f1: &Measure) -> Coupling {
        let entries =
            self.positive_pairs().map(|(i, j)| ((self.sources[i], self.sinks[j]), rational_to_f64(&self.flow[i][j])));
        Coupling::new(entries, f0.clone(), f1.clone()).expect("exact flow satisfies the marginals")
    }

    fn positive_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let nt = self.sinks.len();
        (0..self.sources.len())
            .flat_map(move |i| (0..nt).map(move |j| (i, j)))
            .filter(|&(i, j)| self.flow[i][j].is_positive())
    }

    /// Union of the supports of all optimal couplings, as index pairs.
    ///
    /// A tight pair `(i, j)` carries mass in some optimal coupling iff it
    /// lies on a cycle of the tight residual network, i.e. `j` reaches `i`
    /// through tight forward arcs and backward arcs of positive flow.
    pub fn support_union(&self) -> BTreeSet<(usize, usize)> {
        let (ns, nt) = (self.sources.len(), self.sinks.len());
        let mut arcs = vec![Vec::new(); ns + nt];
        for i in 0..ns {
            for j in 0..nt {
                if self.is_tight(i, j) {
                    arcs[i].push(ns + j);
                }
                if self.flow[i][j].is_positive() {
                    arcs[ns + j].push(i);
                }
            }
        }
        let mut out: BTreeSet<_> = self.positive_pairs().collect();
        for j in 0..nt {
            let mut seen = vec![false; ns + nt];
            let mut queue = VecDeque::from([ns + j]);
            seen[ns + j] = true;
            while let Some(u) = queue.pop_front() {
                for &w in &arcs[u] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            for i in 0..ns {
                if seen[i] && self.is_tight(i, j) {
                    out.insert((i, j));
                }
            }
        }
        out
    }
}

/// Bellman-Ford on the residual transport network. Nodes `0..ns` are
/// sources, `ns..` sinks. Returns distances and predecessors.
fn bellman_ford(
    cost: &[Vec<i64>],
    flow: &[Vec<Rational>],
    init: Vec<Option<i64>>,
) -> (Vec<Option<i64>>, Vec<Option<usize>>) {
    let ns = cost.len();
    let nt = cost.first().map_or(0, Vec::len);
    let mut dist = init;
    let mut pred = vec![None; ns + nt];
    for _ in 0..ns + nt {
        let mut changed = false;
        for i in 0..ns {
            for j in 0..nt {
                if let Some(di) = dist[i] {
                    let cand = di + cost[i][j];
                    if dist[ns + j].is_none_or(|d| cand < d) {
                        dist[ns + j] = Some(cand);
                        pred[ns + j] = Some(i);
                        changed = true;
                    }
                }
                if flow[i][j].is_positive() {
                    if let Some(dj) = dist[ns + j] {
                        let cand = dj - cost[i][j];
                        if dist[i].is_none_or(|d| cand < d) {
                            dist[i] = Some(cand);
                            pred[i] = Some(ns + j);
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    (dist, pred)
}

/// `min_π Σ d(x, y) π(x, y)` over couplings of `f0` and `f1`.
pub fn w1_cost(g: &Graph, f0: &Measure, f1: &Measure) -> f64 {
    rational_to_f64(&w1_cost_exact(g, f0, f1))
}

pub fn w1_cost_exact(g: &Graph, f0: &Measure, f1: &Measure) -> Rational {
    ExactTransport::solve(g, f0, f1).total_cost
}

/// One W₁-optimal coupling.
pub fn optimal_coupling(g: &Graph, f0: &Measure, f1: &Measure) -> Coupling {
    ExactTransport::solve(g, f0, f1).coupling(f0, f1)
}

/// Builds the equality system of the transport polytope over
/// `supp(f0) × supp(f1)` (row-major variables).
fn transport_polytope(
    sources: &[(usize, Rational)],
    sinks: &[(usize, Rational)],
) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let (ns, nt) = (sources.len(), sinks.len());
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (i, (_, m)) in sources.iter().enumerate() {
        let mut row = vec![Rational::zero(); ns * nt];
        for j in 0..nt {
            row[i * nt + j] = rational_from_int(1);
        }
        a.push(row);
        b.push(m.clone());
    }
    for (j, (_, m)) in sinks.iter().enumerate() {
        let mut row = vec![Rational::zero(); ns * nt];
        for i in 0..ns {
            row[i * nt + j] = rational_from_int(1);
        }
        a.push(row);
        b.push(m.clone());
    }
    (a, b)
}

/// W₁ cost computed by the generic rational simplex instead of the flow
/// solver.
pub fn w1_cost_lp(g: &Graph, f0: &Measure, f1: &Measure) -> Result<Rational> {
    let s = exact_masses(f0);
    let t = exact_masses(f1);
    let (a, b) = transport_polytope(&s, &t);
    let c: Vec<_> =
        s.iter().flat_map(|(x, _)| t.iter().map(move |(y, _)| rational_from_int(i64::from(g.dist(*x, *y))))).collect();
    Ok(lp::minimize(&c, &a, &b)?.objective)
}

/// Threshold above which the maximal mass of a pair counts as positive.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;

/// Whether some W₁-optimal coupling charges `(a, b)`.
///
/// Solves `max π(a, b)` over couplings with cost equal to the optimum,
/// exactly, and compares the maximum against [`SUPPORT_THRESHOLD`].
pub fn in_some_optimal_support(g: &Graph, f0: &Measure, f1: &Measure, a: usize, b: usize) -> Result<bool> {
    let s = exact_masses(f0);
    let t = exact_masses(f1);
    let (Some(ia), Some(jb)) = (s.iter().position(|x| x.0 == a), t.iter().position(|x| x.0 == b)) else {
        return Ok(false);
    };
    let optimum = w1_cost_exact(g, f0, f1);
    let (mut rows, mut rhs) = transport_polytope(&s, &t);
    rows.push(
        s.iter().flat_map(|(x, _)| t.iter().map(move |(y, _)| rational_from_int(i64::from(g.dist(*x, *y))))).collect(),
    );
    rhs.push(optimum);
    let mut c = vec![Rational::zero(); s.len() * t.len()];
    c[ia * t.len() + jb] = rational_from_int(1);
    let best = lp::maximize(&c, &rows, &rhs)?.objective;
    Ok(best > rational_from_f64(SUPPORT_THRESHOLD))
}

/// All `(a, b)` charged by some W₁-optimal coupling, via the tight residual
/// network of one exact optimum.
pub fn optimal_support_union(g: &Graph, f0: &Measure, f1: &Measure) -> BTreeSet<(usize, usize)> {
    let tr = ExactTransport::solve(g, f0, f1);
    tr.support_union().into_iter().map(|(i, j)| (tr.sources[i], tr.sinks[j])).collect()
}

/// Quantile coupling of two measures on ℤ (vertex ids read as positions):
/// cumulative distributions are paired level by level. It is the unique
/// minimiser of `Σ (i - j)² π(i, j)`.
pub fn w2_monotone_coupling(f0: &Measure, f1: &Measure) -> Coupling {
    let s = exact_masses(f0);
    let t = exact_masses(f1);
    let mut entries: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
    let (mut i, mut j) = (0, 0);
    let mut left_i = s[0].1.clone();
    let mut left_j = t[0].1.clone();
    while i < s.len() && j < t.len() {
        let m = left_i.clone().min(left_j.clone());
        if m.is_positive() {
            *entries.entry((s[i].0, t[j].0)).or_insert_with(Rational::zero) += &m;
        }
        left_i -= &m;
        left_j -= &m;
        if left_i.is_zero() {
            i += 1;
            if i < s.len() {
                left_i = s[i].1.clone();
            }
        }
        if left_j.is_zero() {
            j += 1;
            if j < t.len() {
                left_j = t[j].1.clone();
            }
        }
    }
    Coupling::new(entries.into_iter().map(|(k, v)| (k, rational_to_f64(&v))), f0.clone(), f1.clone())
        .expect("quantile coupling has the right marginals")
}
