//! Entropy functionals and their behaviour along canonical geodesics.

use std::fmt::Write as _;

use crate::bb_triple::{BbTriple, IDENTITY_TOLERANCE, INEQUALITY_SLACK};
use crate::error::{Error, Result};
use crate::geodesic::GeodesicCurve;
use crate::measure::Measure;
use crate::orientation::Orientation;

/// Finite-difference step.
pub const FD_STEP: f64 = 1e-3;
/// Relative tolerance between `𝓘` and the finite-difference `H''`.
pub const FD_TOLERANCE: f64 = 1e-4;
/// Threshold on `H''` for a convexity verdict.
pub const CONVEXITY_SLACK: f64 = 1e-8;

/// `Σ f log f` with `0 log 0 = 0`, over a dense vertex function.
pub fn shannon(f: &[f64]) -> f64 {
    f.iter().filter(|&&m| m > 0.0).map(|&m| m * m.ln()).sum()
}

pub fn shannon_entropy(f: &Measure) -> f64 {
    f.atoms().map(|(_, m)| m * m.ln()).sum()
}

fn check_order(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("Rényi order {p} outside (0, 1)")));
    }
    Ok(())
}

/// `-Σ f^p` over a dense vertex function.
pub fn renyi(f: &[f64], p: f64) -> Result<f64> {
    check_order(p)?;
    Ok(-f.iter().filter(|&&m| m > 0.0).map(|&m| m.powf(p)).sum::<f64>())
}

pub fn renyi_entropy(f: &Measure, p: f64) -> Result<f64> {
    check_order(p)?;
    Ok(-f.atoms().map(|(_, m)| m.powf(p)).sum::<f64>())
}

/// `Σ f log(f / ν)`.
pub fn relative_entropy(f: &Measure, nu: &Measure) -> Result<f64> {
    let mut total = 0.0;
    for (x, m) in f.atoms() {
        let n = nu.get(x);
        if !(n > 0.0) {
            return Err(Error::Domain(format!("reference measure vanishes at vertex {x}")));
        }
        total += m * (m / n).ln();
    }
    Ok(total)
}

/// `(φ(t+δ) - 2φ(t) + φ(t-δ)) / δ²`.
pub fn second_difference(phi: impl Fn(f64) -> Result<f64>, t: f64, step: f64) -> Result<f64> {
    Ok((phi(t + step)? - 2.0 * phi(t)? + phi(t - step)?) / (step * step))
}

/// Five-point central estimate of `φ''(t)`, accurate to `O(step⁴)`.
pub fn fd_second_derivative(phi: impl Fn(f64) -> Result<f64>, t: f64, step: f64) -> Result<f64> {
    let (a, b) = (phi(t + step)? + phi(t - step)?, phi(t + 2.0 * step)? + phi(t - 2.0 * step)?);
    Ok((16.0 * a - b - 30.0 * phi(t)?) / (12.0 * step * step))
}

/// Divided second differences of values on an arbitrary grid; `None` at the
/// two ends.
pub fn grid_second_differences(grid: &[f64], values: &[f64]) -> Vec<Option<f64>> {
    (0..grid.len())
        .map(|i| {
            if i == 0 || i + 1 >= grid.len() {
                return None;
            }
            let (a, b, c) = (grid[i - 1], grid[i], grid[i + 1]);
            let left = (values[i] - values[i - 1]) / (b - a);
            let right = (values[i + 1] - values[i]) / (c - b);
            Some(2.0 * (right - left) / (c - a))
        })
        .collect()
}

/// `Σ_{T(G)} h`.
pub fn w_squared(tr: &BbTriple) -> f64 {
    tr.h.iter().sum()
}

/// `V₊(x) = Σ_{ℱ(x)} g / f(x)` and `V₋(x) = Σ_{ℰ(x)} g / f(x)`, zero where
/// `f` vanishes.
pub fn velocity_fields(tr: &BbTriple) -> (Vec<f64>, Vec<f64>) {
    let o = &tr.orientation;
    let n = o.n();
    let (mut plus, mut minus) = (vec![0.0; n], vec![0.0; n]);
    for &x in o.active() {
        if tr.f[x] > 0.0 {
            plus[x] = o.out_edges(x).iter().map(|&e| tr.g[e]).sum::<f64>() / tr.f[x];
            minus[x] = o.in_edges(x).iter().map(|&e| tr.g[e]).sum::<f64>() / tr.f[x];
        }
    }
    (plus, minus)
}

/// `Σ_x f V₊ V₋`, equal to [`w_squared`] on BB-triples.
pub fn velocity_pairing(tr: &BbTriple) -> f64 {
    let (plus, minus) = velocity_fields(tr);
    tr.orientation.active().iter().map(|&x| tr.f[x] * plus[x] * minus[x]).sum()
}

/// A potential `V` for the reference measure `ν = exp(-V)` together with a
/// claimed lower bound `K` on `V(x0) - 2V(x1) + V(x2)` along oriented triples.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub v: Vec<f64>,
    pub k: f64,
}

impl Potential {
    /// Triples violating the `K`-convexity bound.
    pub fn violations(&self, o: &Orientation) -> Result<Vec<(usize, usize, usize)>> {
        if self.v.len() != o.n() {
            return Err(Error::LengthMismatch { expected: o.n(), got: self.v.len() });
        }
        Ok(o.triples()
            .iter()
            .filter(|tr| self.v[tr.x0] - 2.0 * self.v[tr.x1] + self.v[tr.x2] < self.k - 1e-12)
            .map(|tr| (tr.x0, tr.x1, tr.x2))
            .collect())
    }

    pub fn check(&self, o: &Orientation) -> Result<()> {
        let offending = self.violations(o)?;
        if offending.is_empty() {
            Ok(())
        } else {
            Err(Error::NotKConvex { k: self.k, offending })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeEntropyRow {
    pub t: f64,
    pub hpp: f64,
    pub hnu_pp: f64,
    pub w_squared: f64,
    pub satisfied: bool,
}

/// Checks `H_ν''(t) ≥ H''(t) + K W²` with `H_ν'' = H'' + Σ_x ∇₂·h_t(x) V(x)`.
pub fn relative_entropy_bound(c: &GeodesicCurve, pot: &Potential, grid: &[f64]) -> Result<Vec<RelativeEntropyRow>> {
    let o = &c.orientation;
    pot.check(o)?;
    grid.iter()
        .map(|&t| {
            let tr = c.eval_triple(t)?;
            let hpp = tr.functional_i()?;
            let d2h = o.second_divergence(&tr.h)?;
            let hnu_pp = hpp + o.active().iter().map(|&x| d2h[x] * pot.v[x]).sum::<f64>();
            let w2 = w_squared(&tr);
            let rhs = hpp + pot.k * w2;
            Ok(RelativeEntropyRow {
                t,
                hpp,
                hnu_pp,
                w_squared: w2,
                satisfied: hnu_pp >= rhs - INEQUALITY_SLACK * rhs.abs().max(1.0),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenyiCurve {
    pub p: f64,
    pub values: Vec<f64>,
    /// Divided second differences over the grid.
    pub second_differences: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyCurveReport {
    pub grid: Vec<f64>,
    pub h: Vec<f64>,
    /// `𝓘(f_t, g_t, h_t)`; `None` at `t ∈ {0, 1}`.
    pub hpp_analytic: Vec<Option<f64>>,
    /// Five-point central differences at step [`FD_STEP`]; `None` within
    /// `2 FD_STEP` of the ends.
    pub hpp_fd: Vec<Option<f64>>,
    pub lower_bound: Vec<Option<f64>>,
    pub w_squared: Vec<f64>,
    pub renyi: Vec<RenyiCurve>,
    /// Minimum of `𝓘` over the grid and its midpoints.
    pub min_hpp: f64,
    pub convex: bool,
}

impl EntropyCurveReport {
    /// Largest `|𝓘 - H''_fd| / max(1, |𝓘|)` over points where both exist.
    pub fn max_fd_mismatch(&self) -> f64 {
        self.hpp_analytic
            .iter()
            .zip(&self.hpp_fd)
            .filter_map(|(a, b)| Some((a.as_ref()?, b.as_ref()?)))
            .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
            .fold(0.0, f64::max)
    }

    pub fn w_squared_spread(&self) -> f64 {
        std_dev(&self.w_squared)
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        let mut s = String::from("t,H,Hpp_analytic,Hpp_fd,lower_bound_general,w_squared");
        for r in &self.renyi {
            let _ = write!(s, ",renyi_{}", r.p);
        }
        s.push('\n');
        for i in 0..self.grid.len() {
            let _ = write!(
                s,
                "{},{:e},{},{},{},{:e}",
                self.grid[i],
                self.h[i],
                opt(self.hpp_analytic[i]),
                opt(self.hpp_fd[i]),
                opt(self.lower_bound[i]),
                self.w_squared[i]
            );
            for r in &self.renyi {
                let _ = write!(s, ",{:e}", r.values[i]);
            }
            s.push('\n');
        }
        s
    }
}

pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64).sqrt()
}

fn interior(t: f64) -> bool {
    t > 0.0 && t < 1.0
}

pub fn entropy_along_curve(c: &GeodesicCurve, grid: &[f64], renyi_orders: &[f64]) -> Result<EntropyCurveReport> {
    for &p in renyi_orders {
        check_order(p)?;
    }
    let entropy = |t: f64| c.density(t).map(|f| shannon(&f));
    let fd_margin = 2.0 * FD_STEP;
    let mut report = EntropyCurveReport {
        grid: grid.to_vec(),
        h: Vec::with_capacity(grid.len()),
        hpp_analytic: Vec::with_capacity(grid.len()),
        hpp_fd: Vec::with_capacity(grid.len()),
        lower_bound: Vec::with_capacity(grid.len()),
        w_squared: Vec::with_capacity(grid.len()),
        renyi: Vec::new(),
        min_hpp: f64::INFINITY,
        convex: true,
    };
    let mut densities = Vec::with_capacity(grid.len());
    for &t in grid {
        let tr = c.eval_triple(t)?;
        report.h.push(shannon(&tr.f));
        report.w_squared.push(w_squared(&tr));
        if interior(t) {
            let i = tr.functional_i()?;
            report.min_hpp = report.min_hpp.min(i);
            report.hpp_analytic.push(Some(i));
            report.lower_bound.push(Some(tr.lower_bound_general()));
        } else {
            report.hpp_analytic.push(None);
            report.lower_bound.push(None);
        }
        report.hpp_fd.push(if t > fd_margin && t < 1.0 - fd_margin {
            Some(fd_second_derivative(entropy, t, FD_STEP)?)
        } else {
            None
        });
        densities.push(tr.f);
    }
    for w in grid.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if interior(mid) {
            report.min_hpp = report.min_hpp.min(c.eval_triple(mid)?.functional_i()?);
        }
    }
    report.convex = report.min_hpp >= -CONVEXITY_SLACK;
    for &p in renyi_orders {
        let values = densities.iter().map(|f| renyi(f, p)).collect::<Result<Vec<_>>>()?;
        let second_differences = grid_second_differences(grid, &values);
        report.renyi.push(RenyiCurve { p, values, second_differences });
    }
    Ok(report)
}

/// Auxiliary function whose non-negativity drives Rényi convexity on ℤ:
/// `(1-p)(x-1)² - (x^p - 1)/(2-p) - x^{2-p}/(2-p) - (1-p)x²/(2-p) + 2x - 1`.
pub fn psi(x: f64, p: f64) -> Result<f64> {
    check_order(p)?;
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("ψ evaluated at {x}")));
    }
    let q = 2.0 - p;
    Ok((1.0 - p) * (x - 1.0) * (x - 1.0) - (x.powf(p) - 1.0) / q - x.powf(q) / q - (1.0 - p) * x * x / q + 2.0 * x
        - 1.0)
}

/// `h^{2-p} g^{2p-2} / (2-p) + (1-p) g² f^{p-2} / (2-p) - h f^{p-1}`.
pub fn holder_gap(f: f64, g: f64, h: f64, p: f64) -> Result<f64> {
    check_order(p)?;
    if !(f > 0.0 && g > 0.0 && h > 0.0) {
        return Err(Error::Domain(format!("Hölder gap needs positive inputs, got ({f}, {g}, {h})")));
    }
    let q = 2.0 - p;
    Ok(h.powf(q) * g.powf(2.0 * p - 2.0) / q + (1.0 - p) * g * g * f.powf(p - 2.0) / q - h * f.powf(p - 1.0))
}

/// Checks `W² = Σ f V₊ V₋` within the identity tolerance.
pub fn velocity_identity_holds(tr: &BbTriple) -> bool {
    let (a, b) = (w_squared(tr), velocity_pairing(tr));
    (a - b).abs() <= IDENTITY_TOLERANCE * a.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::geodesic::{canonical_geodesic, uniform_grid};
    use crate::graph::Graph;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn shannon_examples() {
        assert_eq!(shannon_entropy(&Measure::dirac(0)), 0.0);
        assert!((shannon_entropy(&Measure::uniform(&[0, 1]).unwrap()) + LN2).abs() < 1e-15);
        let bin = Measure::new([(0, 0.25), (1, 0.5), (2, 0.25)]).unwrap();
        assert!((shannon_entropy(&bin) + 1.5 * LN2).abs() < 1e-15);
    }

    #[test]
    fn renyi_examples() {
        assert_eq!(renyi_entropy(&Measure::dirac(3), 0.3).unwrap(), -1.0);
        let u = Measure::uniform(&[0, 1]).unwrap();
        assert!((renyi_entropy(&u, 0.5).unwrap() + 2f64.sqrt()).abs() < 1e-15);
        let bin = Measure::new([(0, 0.25), (1, 0.5), (2, 0.25)]).unwrap();
        let p = 0.999;
        let limit = (renyi_entropy(&bin, p).unwrap() + 1.0) / (1.0 - p);
        assert!((limit - shannon_entropy(&bin)).abs() < 1e-2);
        assert!(renyi_entropy(&u, 1.0).is_err());
    }

    #[test]
    fn relative_entropy_examples() {
        let nu = Measure::uniform(&[0, 1, 2, 3]).unwrap();
        assert!((relative_entropy(&Measure::dirac(0), &nu).unwrap() - 4f64.ln()).abs() < 1e-15);
        assert!(relative_entropy(&nu, &nu).unwrap().abs() < 1e-15);
        let f = Measure::new([(1, 0.3), (2, 0.7)]).unwrap();
        let shift = relative_entropy(&f, &nu).unwrap() - shannon_entropy(&f) - 4f64.ln();
        assert!(shift.abs() < 1e-12);
        assert!(relative_entropy(&nu, &Measure::dirac(0)).is_err());
    }

    #[test]
    fn bernoulli_second_derivative() {
        let g = Arc::new(Graph::path(2).unwrap());
        let c = canonical_geodesic(&g, &Measure::dirac(0), &Measure::dirac(1)).unwrap();
        let r = entropy_along_curve(&c, &[0.25, 0.5, 0.75], &[]).unwrap();
        assert!((r.hpp_analytic[1].unwrap() - 4.0).abs() < 1e-12);
        assert!((r.hpp_analytic[0].unwrap() - (4.0 + 4.0 / 3.0)).abs() < 1e-12);
        assert!(r.max_fd_mismatch() < FD_TOLERANCE);
        assert!(r.convex);
    }

    #[test]
    fn binomial_chain_report() {
        let g = Arc::new(Graph::path(4).unwrap());
        let c = canonical_geodesic(&g, &Measure::dirac(0), &Measure::dirac(3)).unwrap();
        let r = entropy_along_curve(&c, &uniform_grid(101), &[0.5]).unwrap();
        assert!(r.convex);
        assert!(r.max_fd_mismatch() < FD_TOLERANCE);
        assert!(r.w_squared_spread() < 1e-8);
        assert!((r.w_squared[50] - 6.0).abs() < 1e-10);
        assert!(r.renyi[0].second_differences.iter().flatten().all(|&d| d >= -1e-6));
        let csv = r.to_csv();
        assert!(csv.starts_with("t,H,Hpp_analytic,Hpp_fd,lower_bound_general,w_squared,renyi_0.5\n0,"));
        assert_eq!(csv.lines().count(), 102);
    }

    #[test]
    fn w_squared_examples() {
        let g = Arc::new(Graph::path(3).unwrap());
        let c = canonical_geodesic(&g, &Measure::dirac(0), &Measure::dirac(2)).unwrap();
        for t in [0.1, 0.5, 0.9] {
            let tr = c.eval_triple(t).unwrap();
            assert!((w_squared(&tr) - 2.0).abs() < 1e-13);
            assert!(velocity_identity_holds(&tr));
        }
        let g = Arc::new(Graph::path(2).unwrap());
        let c = canonical_geodesic(&g, &Measure::dirac(0), &Measure::dirac(1)).unwrap();
        assert_eq!(w_squared(&c.eval_triple(0.5).unwrap()), 0.0);
    }

    #[test]
    fn quadratic_potential_bound() {
        let g = Arc::new(Graph::path(3).unwrap());
        let c = canonical_geodesic(&g, &Measure::dirac(0), &Measure::dirac(2)).unwrap();
        let grid = [0.2, 0.5, 0.8];
        let quad = Potential { v: vec![0.0, 1.0, 4.0], k: 2.0 };
        for row in relative_entropy_bound(&c, &quad, &grid).unwrap() {
            assert!(row.satisfied);
            assert!((row.w_squared - 2.0).abs() < 1e-13);
        }
        let flat = Potential { v: vec![0.0; 3], k: 0.0 };
        for row in relative_entropy_bound(&c, &flat, &grid).unwrap() {
            assert_eq!(row.hnu_pp, row.hpp);
        }
        let concave = Potential { v: vec![0.0, 1.0, 0.0], k: 0.0 };
        assert!(matches!(
            relative_entropy_bound(&c, &concave, &grid),
            Err(Error::NotKConvex { offending, .. }) if offending == vec![(0, 1, 2)]
        ));
    }

    #[test]
    fn psi_and_holder_gap() {
        for p in [0.1, 0.5, 0.9] {
            assert!(psi(1.0, p).unwrap().abs() < 1e-15);
            assert!(holder_gap(1.0, 1.0, 1.0, p).unwrap().abs() < 1e-15);
            assert!(psi(0.0, p).unwrap() >= 0.0);
            assert!(psi(3.7, p).unwrap() >= 0.0);
        }
        assert!(psi(-1.0, 0.5).is_err());
        assert!(holder_gap(0.0, 1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn grid_differences_of_a_parabola() {
        let grid = [0.0, 0.1, 0.3, 0.6];
        let values: Vec<f64> = grid.iter().map(|t| 3.0 * t * t).collect();
        let d = grid_second_differences(&grid, &values);
        assert_eq!(d[0], None);
        assert!((d[1].unwrap() - 6.0).abs() < 1e-12 && (d[2].unwrap() - 6.0).abs() < 1e-12);
    }
}
