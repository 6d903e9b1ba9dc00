//! The canonical W₁,₊-geodesic between two measures.
//!
//! On the W₁-orientation the curve has the product form
//! `f_t(x) = p_t(x) q_t(x) / |EG|`, `g_t(x0 x1) = p_t(x0) q_t(x1) / |EG|`,
//! `h_t(x0 x1 x2) = p_t(x0) q_t(x2) / |EG|`, where
//! `p'(x) = Σ_{ℰ(x)} p(x0)` and `q'(x) = -Σ_{ℱ(x)} q(x2)`. Both families are
//! polynomials; the boundary values are found by alternating proportional
//! fitting of the two endpoint constraints.
//!
//! `p` is stored in the variable `t` and `q` in `s = 1 - t`, so every
//! coefficient is non-negative and evaluation is free of cancellation.

use std::fmt::Write as _;
use std::sync::Arc;

use num_traits::Zero;

use crate::bb_triple::BbTriple;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::measure::Measure;
use crate::orientation::{orient, path_counts, Orientation, PathCounts};
use crate::poly::Polynomial;
use crate::transport;

pub type Poly = Polynomial<f64>;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;
/// Boundary values below this are treated as zero divisors.
pub const DEGENERATE_THRESHOLD: f64 = 1e-14;
/// Tolerance of [`GeodesicCurve::check_w1_geodesic`].
pub const W1_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct GeodesicCurve {
    pub orientation: Arc<Orientation>,
    pub counts: PathCounts,
    /// `p_t(x)` as a polynomial in `t`; zero off the active set.
    pub p: Vec<Poly>,
    /// `q_t(x)` as a polynomial in `s = 1 - t`; zero off the active set.
    pub q: Vec<Poly>,
    pub f0: Measure,
    pub f1: Measure,
    /// `|EG|` as a float.
    pub eg: f64,
    /// L¹ endpoint residual reached by the solver.
    pub residual: f64,
    pub iterations: usize,
}

/// Orients, counts and solves with default tolerances.
pub fn canonical_geodesic(g: &Arc<Graph>, f0: &Measure, f1: &Measure) -> Result<GeodesicCurve> {
    let o = Arc::new(orient(g, f0, f1)?);
    let pc = path_counts(&o)?;
    solve_canonical(o, pc, f0, f1, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

pub fn solve_canonical(
    o: Arc<Orientation>,
    pc: PathCounts,
    f0: &Measure,
    f1: &Measure,
    tol: f64,
    max_iter: usize,
) -> Result<GeodesicCurve> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol}")));
    }
    let n = o.n();
    for v in f0.support().chain(f1.support()) {
        if v >= n || !o.is_active(v) {
            return Err(Error::InvalidMeasure(format!("vertex {v} outside the orientation")));
        }
    }
    let order = o.topological_order()?;
    let eg = pc.eg_f64();
    let a0 = f0.to_dense(n);
    let a1 = f1.to_dense(n);

    let mut q1 = vec![0.0; n];
    for &v in o.active() {
        q1[v] = 1.0;
    }
    let mut p0 = vec![0.0; n];
    let mut iterations = 0;
    loop {
        let q = integrate_backward(&o, &order, &q1);
        let q0: Vec<f64> = q.iter().map(Poly::eval_one).collect();
        if iterations > 0 {
            let residual = endpoint_residual(&o, &p0, &q0, &a0, eg);
            if residual < tol {
                let p = integrate_forward(&o, &order, &p0);
                let p1: Vec<f64> = p.iter().map(Poly::eval_one).collect();
                let residual = residual.max(endpoint_residual(&o, &p1, &q1, &a1, eg));
                return Ok(GeodesicCurve {
                    orientation: o,
                    counts: pc,
                    p,
                    q,
                    f0: f0.clone(),
                    f1: f1.clone(),
                    eg,
                    residual,
                    iterations,
                });
            }
            if iterations >= max_iter {
                return Err(Error::NotConverged { iterations, residual });
            }
        }
        iterations += 1;

        p0 = fit(&o, &a0, &q0, eg)?;
        let p = integrate_forward(&o, &order, &p0);
        let p1: Vec<f64> = p.iter().map(Poly::eval_one).collect();
        q1 = fit(&o, &a1, &p1, eg)?;

        // gauge: p -> λp, q -> q/λ leaves the curve unchanged
        let scale = o.active().iter().map(|&v| q1[v]).fold(0.0, f64::max);
        if scale > 0.0 {
            q1.iter_mut().for_each(|v| *v /= scale);
            p0.iter_mut().for_each(|v| *v *= scale);
        }
    }
}

/// `eg · target / other` pointwise, with `0 / 0 = 0`.
fn fit(o: &Orientation, target: &[f64], other: &[f64], eg: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; o.n()];
    for &v in o.active() {
        if target[v] > 0.0 {
            if other[v] < DEGENERATE_THRESHOLD {
                return Err(Error::DegenerateBoundary(v));
            }
            out[v] = eg * target[v] / other[v];
        }
    }
    Ok(out)
}

fn endpoint_residual(o: &Orientation, p: &[f64], q: &[f64], target: &[f64], eg: f64) -> f64 {
    o.active().iter().map(|&v| (p[v] * q[v] / eg - target[v]).abs()).sum()
}

/// `p(x) = p0(x) + ∫_0^t Σ_{ℰ(x)} p(x0)`.
fn integrate_forward(o: &Orientation, order: &[usize], p0: &[f64]) -> Vec<Poly> {
    let mut p = vec![Poly::zero(); o.n()];
    for &x in order {
        let inflow = o.predecessors(x).fold(Poly::zero(), |acc, y| &acc + &p[y]);
        p[x] = inflow.antiderivative(p0[x]);
    }
    p
}

/// `q(x) = q1(x) + ∫_0^s Σ_{ℱ(x)} q(x2)` in `s = 1 - t`.
fn integrate_backward(o: &Orientation, order: &[usize], q1: &[f64]) -> Vec<Poly> {
    let mut q = vec![Poly::zero(); o.n()];
    for &x in order.iter().rev() {
        let outflow = o.successors(x).fold(Poly::zero(), |acc, y| &acc + &q[y]);
        q[x] = outflow.antiderivative(q1[x]);
    }
    q
}

#[derive(Debug, Clone, PartialEq)]
pub struct W1Report {
    pub w1: f64,
    pub max_defect: f64,
    pub pairs: usize,
    pub passed: bool,
}

/// Polynomial identities of the curve, as relative coefficient defects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityReport {
    /// `∂f/∂t + ∇·g`.
    pub vertex_defect: f64,
    /// `∂g/∂t + ∇·h`.
    pub edge_defect: f64,
    /// `Σ_x f_t(x) - 1`.
    pub mass_defect: f64,
}

impl ContinuityReport {
    pub fn max(&self) -> f64 {
        self.vertex_defect.max(self.edge_defect).max(self.mass_defect)
    }
}

impl GeodesicCurve {
    fn check_t(t: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::TimeOutOfRange(t));
        }
        Ok(())
    }

    pub fn p_at(&self, x: usize, t: f64) -> f64 {
        self.p[x].eval(t)
    }

    pub fn q_at(&self, x: usize, t: f64) -> f64 {
        self.q[x].eval(1.0 - t)
    }

    /// `f_t` as a dense vertex function.
    pub fn density(&self, t: f64) -> Result<Vec<f64>> {
        Self::check_t(t)?;
        let mut f = vec![0.0; self.orientation.n()];
        for &x in self.orientation.active() {
            f[x] = self.p_at(x, t) * self.q_at(x, t) / self.eg;
        }
        Ok(f)
    }

    /// `f_t` as a measure (renormalised to absorb solver round-off).
    pub fn measure(&self, t: f64) -> Result<Measure> {
        let f = self.density(t)?;
        Measure::normalized(f.into_iter().enumerate().filter(|(_, m)| *m > 0.0))
    }

    pub fn eval_triple(&self, t: f64) -> Result<BbTriple> {
        Self::check_t(t)?;
        let o = &self.orientation;
        let p: Vec<f64> = (0..o.n()).map(|x| self.p_at(x, t)).collect();
        let q: Vec<f64> = (0..o.n()).map(|x| self.q_at(x, t)).collect();
        let f = (0..o.n()).map(|x| p[x] * q[x] / self.eg).collect();
        let g = o.edges().iter().map(|&(a, b)| p[a] * q[b] / self.eg).collect();
        let h = o.triples().iter().map(|tr| p[tr.x0] * q[tr.x2] / self.eg).collect();
        BbTriple::new(o.clone(), f, g, h)
    }

    /// `W₁(f_s, f_t) = |t - s| W₁(f_0, f_1)` for all grid pairs, within
    /// [`W1_TOLERANCE`].
    pub fn check_w1_geodesic(&self, grid: &[f64]) -> Result<W1Report> {
        let g = self.orientation.graph();
        let w1 = transport::w1_cost(g, &self.f0, &self.f1);
        let measures = grid.iter().map(|&t| self.measure(t)).collect::<Result<Vec<_>>>()?;
        let mut max_defect = 0.0f64;
        let mut pairs = 0;
        for i in 0..grid.len() {
            for j in i + 1..grid.len() {
                let d = transport::w1_cost(g, &measures[i], &measures[j]);
                max_defect = max_defect.max((d - (grid[j] - grid[i]).abs() * w1).abs());
                pairs += 1;
            }
        }
        Ok(W1Report { w1, max_defect, pairs, passed: max_defect <= W1_TOLERANCE })
    }

    /// The families `f`, `g`, `h` as polynomials in `t`.
    pub fn polynomials(&self) -> (Vec<Poly>, Vec<Poly>, Vec<Poly>) {
        let o = &self.orientation;
        let inv = 1.0 / self.eg;
        let qt: Vec<Poly> = self.q.iter().map(Poly::compose_one_minus).collect();
        let f = (0..o.n()).map(|x| (&self.p[x] * &qt[x]).scale(inv)).collect();
        let g = o.edges().iter().map(|&(a, b)| (&self.p[a] * &qt[b]).scale(inv)).collect();
        let h = o.triples().iter().map(|tr| (&self.p[tr.x0] * &qt[tr.x2]).scale(inv)).collect();
        (f, g, h)
    }

    /// Checks `∂f/∂t = -∇·g`, `∂g/∂t = -∇·h` and mass conservation
    /// coefficient-wise.
    pub fn continuity(&self) -> Result<ContinuityReport> {
        let o = &self.orientation;
        let (f, g, h) = self.polynomials();
        let div_g = o.divergence(&g)?;
        let div_h = o.edge_divergence(&h)?;
        let defect = |lhs: &[Poly], rhs: &[Poly]| {
            let mut worst = 0.0f64;
            let mut scale = 1.0f64;
            for (a, b) in lhs.iter().zip(rhs) {
                for &c in a.coeffs().iter().chain(b.coeffs()) {
                    scale = scale.max(c.abs());
                }
                for &c in (&a.derivative() + b).coeffs() {
                    worst = worst.max(c.abs());
                }
            }
            worst / scale
        };
        let mass = f.iter().fold(Poly::constant(-1.0), |acc, p| &acc + p);
        let mass_defect = mass.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
        Ok(ContinuityReport { vertex_defect: defect(&f, &div_g), edge_defect: defect(&g, &div_h), mass_defect })
    }

    /// `t,vertex,f_t` rows over active vertices, vertices by label.
    pub fn to_csv(&self, grid: &[f64]) -> Result<String> {
        let g = self.orientation.graph();
        let mut s = String::from("t,vertex,f_t\n");
        for &t in grid {
            let f = self.density(t)?;
            for &x in self.orientation.active() {
                let _ = writeln!(s, "{t},{},{:e}", g.label(x), f[x]);
            }
        }
        Ok(s)
    }
}

/// `k/(n-1)` for `k in 0..n`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, k: usize, t: f64) -> f64 {
        let mut c = 1.0;
        for i in 0..k {
            c = c * (n - i) as f64 / (i + 1) as f64;
        }
        c * t.powi(k as i32) * (1.0 - t).powi((n - k) as i32)
    }

    #[test]
    fn dirac_chain_is_binomial() {
        let n = 5;
        let g = Arc::new(Graph::path(n + 1).unwrap());
        let c = canonical_geodesic(&g, &Measure::dirac(0), &Measure::dirac(n)).unwrap();
        for t in uniform_grid(11) {
            let f = c.density(t).unwrap();
            for k in 0..=n {
                assert!((f[k] - binomial(n, k, t)).abs() < 1e-12, "t={t} k={k}");
            }
        }
        assert!(c.residual < DEFAULT_TOL);
        assert!(c.continuity().unwrap().max() < 1e-12);
    }

    #[test]
    fn half_time_chain_triple() {
        let g = Arc::new(Graph::path(3).unwrap());
        let c = canonical_geodesic(&g, &Measure::dirac(0), &Measure::dirac(2)).unwrap();
        let tr = c.eval_triple(0.5).unwrap();
        for (a, b) in tr.f.iter().zip([0.25, 0.5, 0.25]) {
            assert!((a - b).abs() < 1e-14);
        }
        // g = -∂f/∂t at the source: d/dt (1-t)² = -1 at t = 1/2
        assert!(tr.g.iter().all(|g| (g - 1.0).abs() < 1e-14));
        assert!((tr.h[0] - 2.0).abs() < 1e-14);
        assert!(tr.validate().is_valid());
    }

    #[test]
    fn square_is_product_bernoulli() {
        let g = Graph::hypercube(2).unwrap();
        let c = canonical_geodesic(&g, &Measure::dirac(0), &Measure::dirac(3)).unwrap();
        for t in [0.1, 0.5, 0.8] {
            let f = c.density(t).unwrap();
            let expected = [(1.0 - t) * (1.0 - t), t * (1.0 - t), t * (1.0 - t), t * t];
            for (a, b) in f.iter().zip(expected) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        let r = c.check_w1_geodesic(&[0.0, 0.3, 1.0]).unwrap();
        assert!((r.w1 - 2.0).abs() < 1e-12);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn equal_measures_give_constant_curve() {
        let g = Arc::new(Graph::path(4).unwrap());
        let f = Measure::new([(1, 0.25), (3, 0.75)]).unwrap();
        let c = canonical_geodesic(&g, &f, &f).unwrap();
        assert!(c.orientation.is_empty());
        for t in [0.0, 0.4, 1.0] {
            let d = c.density(t).unwrap();
            assert!((d[1] - 0.25).abs() < 1e-15 && (d[3] - 0.75).abs() < 1e-15);
        }
        let r = c.check_w1_geodesic(&uniform_grid(3)).unwrap();
        assert_eq!(r.w1, 0.0);
        assert!(r.max_defect < 1e-15);
    }

    #[test]
    fn mixed_endpoints_satisfy_the_identities() {
        let g = Arc::new(Graph::path(6).unwrap());
        let f0 = Measure::new([(0, 0.5), (1, 0.2), (3, 0.3)]).unwrap();
        let f1 = Measure::new([(2, 0.1), (4, 0.6), (5, 0.3)]).unwrap();
        let c = canonical_geodesic(&g, &f0, &f1).unwrap();
        assert!(c.continuity().unwrap().max() < 1e-10);
        assert!(c.measure(0.0).unwrap().total_variation(&f0) < 1e-9);
        assert!(c.measure(1.0).unwrap().total_variation(&f1) < 1e-9);
        assert!(c.check_w1_geodesic(&uniform_grid(5)).unwrap().passed);
        for t in [0.01, 0.5, 0.99] {
            assert!(c.eval_triple(t).unwrap().validate().is_valid());
        }
    }

    #[test]
    fn time_out_of_range() {
        let g = Arc::new(Graph::path(2).unwrap());
        let c = canonical_geodesic(&g, &Measure::dirac(0), &Measure::dirac(1)).unwrap();
        assert_eq!(c.eval_triple(1.5).unwrap_err(), Error::TimeOutOfRange(1.5));
        let csv = c.to_csv(&[0.0, 1.0]).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("t,vertex,f_t\n0,0,1e0\n"));
    }
}
