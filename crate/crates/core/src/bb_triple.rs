//! Benamou-Brenier triples `(f, g, h)` on an oriented graph and the
//! curvature functional `𝓘(f, g, h) = Σ_x ∇₂·h(x) log f(x) + (∇·g(x))² / f(x)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::orientation::Orientation;

/// Relative tolerance for the identities checked on triples.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;
/// Absolute slack used when inequalities are evaluated in floating point.
pub const INEQUALITY_SLACK: f64 = 1e-8;

/// Functions on the active vertices (`f`, indexed by graph vertex), the
/// oriented edges (`g`) and the oriented triples (`h`) of an orientation.
#[derive(Debug, Clone)]
pub struct BbTriple {
    pub orientation: Arc<Orientation>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// `max |f(x1) h - g g| / |g g|` over oriented triples.
    pub max_relative_violation: f64,
    pub worst_triple: Option<(usize, usize, usize)>,
    pub nonpositive_f: Vec<usize>,
    pub nonpositive_g: Vec<(usize, usize)>,
    pub negative_h: Vec<(usize, usize, usize)>,
    /// `|Σ f - 1|`.
    pub normalization_defect: f64,
}

impl ValidationReport {
    /// BB equation within [`IDENTITY_TOLERANCE`] and the sign conditions.
    pub fn is_valid(&self) -> bool {
        self.max_relative_violation <= IDENTITY_TOLERANCE
            && self.nonpositive_f.is_empty()
            && self.nonpositive_g.is_empty()
            && self.negative_h.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub i: f64,
    pub bound: f64,
    pub satisfied: bool,
}

impl BbTriple {
    pub fn new(orientation: Arc<Orientation>, f: Vec<f64>, g: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        let checks =
            [(orientation.n(), f.len()), (orientation.edges().len(), g.len()), (orientation.triples().len(), h.len())];
        for (expected, got) in checks {
            if expected != got {
                return Err(Error::LengthMismatch { expected, got });
            }
        }
        Ok(BbTriple { orientation, f, g, h })
    }

    /// Completes `(f, g)` with `h(x0 x1 x2) = g(x0 x1) g(x1 x2) / f(x1)`.
    pub fn from_fg(orientation: Arc<Orientation>, f: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        let h = orientation.triples().iter().map(|tr| g[tr.first] * g[tr.second] / f[tr.x1]).collect();
        Self::new(orientation, f, g, h)
    }

    pub fn validate(&self) -> ValidationReport {
        let o = &self.orientation;
        let mut worst = 0.0f64;
        let mut worst_triple = None;
        let mut negative_h = Vec::new();
        for (k, tr) in o.triples().iter().enumerate() {
            let lhs = self.f[tr.x1] * self.h[k];
            let rhs = self.g[tr.first] * self.g[tr.second];
            let denom = if rhs != 0.0 { rhs.abs() } else { lhs.abs() };
            let rel = if denom == 0.0 { 0.0 } else { (lhs - rhs).abs() / denom };
            if rel > worst || rel.is_nan() {
                worst = if rel.is_nan() { f64::INFINITY } else { rel };
                worst_triple = Some((tr.x0, tr.x1, tr.x2));
            }
            if !(self.h[k] >= 0.0) {
                negative_h.push((tr.x0, tr.x1, tr.x2));
            }
        }
        let nonpositive_f = o.active().iter().copied().filter(|&v| !(self.f[v] > 0.0)).collect();
        let nonpositive_g = o.edges().iter().zip(&self.g).filter(|(_, &g)| !(g > 0.0)).map(|(&e, _)| e).collect();
        let total: f64 = o.active().iter().map(|&v| self.f[v]).sum();
        ValidationReport {
            max_relative_violation: worst,
            worst_triple,
            nonpositive_f,
            nonpositive_g,
            negative_h,
            normalization_defect: (total - 1.0).abs(),
        }
    }

    /// `𝓘(f, g, h)` with `0 log 0 = 0`.
    pub fn functional_i(&self) -> Result<f64> {
        let o = &self.orientation;
        let div_g = o.divergence(&self.g)?;
        let div2_h = o.second_divergence(&self.h)?;
        let mut total = 0.0;
        for &x in o.active() {
            let f = self.f[x];
            if f > 0.0 {
                total += div2_h[x] * f.ln() + div_g[x] * div_g[x] / f;
            } else if div_g[x] != 0.0 || div2_h[x] != 0.0 {
                return Err(Error::InvalidTriple(format!("f vanishes at vertex {x} where the divergences do not")));
            }
        }
        Ok(total)
    }

    /// `Σ_x (∇·g(x))² / f(x)`, the part of 𝓘 without `h`.
    pub fn divergence_energy(&self) -> Result<f64> {
        let o = &self.orientation;
        let div_g = o.divergence(&self.g)?;
        let mut total = 0.0;
        for &x in o.active() {
            if div_g[x] != 0.0 {
                if !(self.f[x] > 0.0) {
                    return Err(Error::InvalidTriple(format!("f vanishes at vertex {x} where ∇·g does not")));
                }
                total += div_g[x] * div_g[x] / self.f[x];
            }
        }
        Ok(total)
    }

    /// 𝓘 after integration by parts: every oriented triple contributes
    /// `h log(f(x0) h / g(x0 x1)²) + h log(f(x2) h / g(x1 x2)²)`, plus the
    /// divergence energy. Equal to [`BbTriple::functional_i`] on BB-triples.
    pub fn functional_i_ibp(&self) -> Result<f64> {
        let o = &self.orientation;
        let mut total = self.divergence_energy()?;
        for (k, tr) in o.triples().iter().enumerate() {
            let h = self.h[k];
            if h == 0.0 {
                continue;
            }
            let (fa, fb) = (self.f[tr.x0], self.f[tr.x2]);
            let (ga, gb) = (self.g[tr.first], self.g[tr.second]);
            if !(fa > 0.0 && fb > 0.0 && ga > 0.0 && gb > 0.0) {
                return Err(Error::InvalidTriple(format!(
                    "non-positive value around triple ({}, {}, {})",
                    tr.x0, tr.x1, tr.x2
                )));
            }
            total += h * (fa * h / (ga * ga)).ln() + h * (fb * h / (gb * gb)).ln();
        }
        Ok(total)
    }

    /// `Σ_{(x0 x1)} g²/f(x0) (1 - |ℱ(x1)|) + g²/f(x1) (1 - |ℰ(x0)|)`.
    pub fn lower_bound_general(&self) -> f64 {
        let o = &self.orientation;
        o.edges()
            .iter()
            .zip(&self.g)
            .filter(|(_, &g)| g != 0.0)
            .map(|(&(x0, x1), &g)| {
                let out1 = o.out_edges(x1).len() as f64;
                let in0 = o.in_edges(x0).len() as f64;
                g * g / self.f[x0] * (1.0 - out1) + g * g / self.f[x1] * (1.0 - in0)
            })
            .sum()
    }

    /// 𝓘 against [`BbTriple::lower_bound_general`] with slack
    /// `1e-8 · max(1, |𝓘|)`.
    pub fn check_i_bound(&self) -> Result<BoundReport> {
        let i = self.functional_i()?;
        let bound = self.lower_bound_general();
        Ok(BoundReport { i, bound, satisfied: i >= bound - INEQUALITY_SLACK * i.abs().max(1.0) })
    }

    /// `Σ_x f(x)`.
    pub fn mass(&self) -> f64 {
        self.orientation.active().iter().map(|&v| self.f[v]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn chain(len: usize) -> Arc<Orientation> {
        let g = Arc::new(Graph::path(len + 1).unwrap());
        Arc::new(Orientation::from_edges(g, (0..len).map(|i| (i, i + 1)).collect(), &[]).unwrap())
    }

    #[test]
    fn single_edge_has_no_triples() {
        let c = 0.3;
        let t = BbTriple::new(chain(1), vec![0.5, 0.5], vec![c], vec![]).unwrap();
        assert!(t.validate().is_valid());
        let expected = 4.0 * c * c;
        assert!((t.functional_i().unwrap() - expected).abs() < 1e-15);
        assert!((t.lower_bound_general() - expected).abs() < 1e-15);
        assert!((t.functional_i_ibp().unwrap() - expected).abs() < 1e-15);
        assert!(t.check_i_bound().unwrap().satisfied);
    }

    #[test]
    fn arithmetic_identity_validates() {
        let t = BbTriple::new(chain(2), vec![0.25, 0.5, 0.25], vec![0.25, 0.25], vec![0.125]).unwrap();
        let r = t.validate();
        assert_eq!(r.max_relative_violation, 0.0);
        assert!(r.is_valid());

        let bad = BbTriple::new(chain(2), vec![0.25, 0.5, 0.25], vec![0.25, 0.25], vec![0.25]).unwrap();
        let r = bad.validate();
        assert_eq!(r.max_relative_violation, 1.0);
        assert_eq!(r.worst_triple, Some((0, 1, 2)));
        assert!(!r.is_valid());
    }

    #[test]
    fn zero_flux_gives_zero() {
        let t = BbTriple::new(chain(3), vec![0.1, 0.2, 0.3, 0.4], vec![0.0; 3], vec![0.0; 2]).unwrap();
        assert_eq!(t.functional_i().unwrap(), 0.0);
        assert_eq!(t.functional_i_ibp().unwrap(), 0.0);
    }

    #[test]
    fn vanishing_density_is_rejected() {
        let t = BbTriple::new(chain(1), vec![0.0, 1.0], vec![1.0], vec![]).unwrap();
        assert!(matches!(t.functional_i(), Err(Error::InvalidTriple(_))));
        assert!(!t.validate().is_valid());
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            BbTriple::new(chain(2), vec![0.5; 3], vec![1.0], vec![]),
            Err(Error::LengthMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn ibp_matches_on_derived_triple() {
        let t = BbTriple::from_fg(chain(4), vec![0.1, 0.3, 0.2, 0.15, 0.25], vec![0.7, 0.2, 1.1, 0.4]).unwrap();
        let (a, b) = (t.functional_i().unwrap(), t.functional_i_ibp().unwrap());
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
        assert!(a >= -1e-12);
    }
}
