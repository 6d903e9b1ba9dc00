//! Binomial mixtures along the W₂-optimal coupling on ℤ.
//!
//! Vertex ids are read as positions on ℤ. For a coupling `π` with `i ≤ j`
//! on its support,
//!
//! ```text
//! f_t(k) = Σ π(i,j) Bin_{j-i,t}(k-i)
//! g_t(k) = Σ π(i,j) (j-i) Bin_{j-i-1,t}(k-i)            (edge k -> k+1)
//! h_t(k) = Σ π(i,j) (j-i)(j-i-1) Bin_{j-i-2,t}(k-i)     (triple k -> k+1 -> k+2)
//! ```
//!
//! so that `∂f/∂t = -∇g` and `∂g/∂t = -∇h` with left differences
//! `∇g(k) = g(k) - g(k-1)`.

use std::fmt::Write as _;

use crate::entropy::{fd_second_derivative, shannon, FD_STEP};
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::transport::w2_monotone_coupling;

/// Slack for the pointwise comparison `h ≤ h̃`.
pub const H_TILDE_SLACK: f64 = 1e-10;
/// Relative slack of the log-concavity test.
pub const LOG_CONCAVITY_SLACK: f64 = 1e-12;
/// Threshold on finite-difference `H''` for a convexity verdict.
pub const FD_CONVEXITY_SLACK: f64 = 1e-6;

/// `C(n, m) t^m (1-t)^(n-m)`, zero outside `0 ≤ m ≤ n`.
pub fn binomial_pmf(n: i64, m: i64, t: f64) -> f64 {
    if n < 0 || m < 0 || m > n {
        return 0.0;
    }
    let m_small = m.min(n - m);
    let mut c = 1.0;
    for r in 0..m_small {
        c = c * (n - r) as f64 / (r + 1) as f64;
    }
    c * t.powi(m as i32) * (1.0 - t).powi((n - m) as i32)
}

/// `F₀(k) ≥ F₁(k)` for every `k`: `f0` is stochastically dominated by `f1`.
pub fn stochastic_domination(f0: &Measure, f1: &Measure) -> bool {
    let n = f0.max_vertex().max(f1.max_vertex()) + 1;
    f0.cdf(n).iter().zip(f1.cdf(n)).all(|(a, b)| *a >= b - 1e-12)
}

/// `f(k+1)² ≥ f(k) f(k+2)` for all `k`, with support an interval.
pub fn is_log_concave(f: &[f64]) -> bool {
    let support: Vec<usize> = (0..f.len()).filter(|&k| f[k] > 0.0).collect();
    let (Some(&lo), Some(&hi)) = (support.first(), support.last()) else {
        return false;
    };
    if hi - lo + 1 != support.len() {
        return false;
    }
    f.windows(3).all(|w| w[1] * w[1] >= w[0] * w[2] * (1.0 - LOG_CONCAVITY_SLACK))
}

pub fn log_concavity(f: &Measure) -> bool {
    is_log_concave(&f.to_dense(f.max_vertex() + 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct W2Triple {
    pub f: Vec<f64>,
    /// `g[k]` on the edge `k -> k+1`.
    pub g: Vec<f64>,
    /// `h[k]` on the triple `k -> k+1 -> k+2`.
    pub h: Vec<f64>,
}

impl W2Triple {
    fn g_at(&self, k: i64) -> f64 {
        usize::try_from(k).ok().and_then(|k| self.g.get(k)).copied().unwrap_or(0.0)
    }

    fn h_at(&self, k: i64) -> f64 {
        usize::try_from(k).ok().and_then(|k| self.h.get(k)).copied().unwrap_or(0.0)
    }

    /// `h̃(k) = g(k) g(k+1) / f(k+1)`, zero where `f(k+1) = 0`.
    pub fn h_tilde(&self) -> Vec<f64> {
        (0..self.h.len())
            .map(|k| {
                let f = self.f[k + 1];
                if f > 0.0 {
                    self.g[k] * self.g[k + 1] / f
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// `Σ_k ∇₂h(k) log f(k) + (∇g(k))² / f(k)`.
    pub fn functional_i(&self) -> Result<f64> {
        let mut total = 0.0;
        for (k, &f) in self.f.iter().enumerate() {
            let k = k as i64;
            let dg = self.g_at(k) - self.g_at(k - 1);
            let d2h = self.h_at(k) - 2.0 * self.h_at(k - 1) + self.h_at(k - 2);
            if f > 0.0 {
                total += d2h * f.ln() + dg * dg / f;
            } else if dg != 0.0 || d2h != 0.0 {
                return Err(Error::InvalidTriple(format!("f vanishes at {k} where the divergences do not")));
            }
        }
        Ok(total)
    }

    /// `Σ_k (h - h̃)(k) (log f(k+2) - 2 log f(k+1) + log f(k))`, a lower
    /// bound for `H''` when `(f, g, h̃)` is used to absorb the BB part.
    pub fn defect_term(&self) -> f64 {
        let ht = self.h_tilde();
        (0..self.h.len())
            .filter(|&k| self.f[k] > 0.0 && self.f[k + 1] > 0.0 && self.f[k + 2] > 0.0)
            .map(|k| (self.h[k] - ht[k]) * (self.f[k + 2].ln() - 2.0 * self.f[k + 1].ln() + self.f[k].ln()))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HComparison {
    /// `max_k h(k) - h̃(k)`.
    pub max_excess: f64,
    /// `min_k g(k) g(k-1) - f(k) h(k-1)`.
    pub min_quadratic_form: f64,
    /// `min (j₂-j₁)(i₂-i₁)` over distinct support pairs of the coupling;
    /// the off-diagonal coefficients are this over `t(1-t)`.
    pub certificate_min: i64,
    pub h_le_htilde: bool,
}

/// The binomial/W₂ interpolation attached to a coupling with `i ≤ j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinomialW2 {
    pairs: Vec<(usize, usize, f64)>,
    len: usize,
}

impl BinomialW2 {
    /// Interpolation along the monotone coupling; requires `f0` to be
    /// stochastically dominated by `f1`.
    pub fn new(f0: &Measure, f1: &Measure) -> Result<Self> {
        if !stochastic_domination(f0, f1) {
            return Err(Error::NotDominated);
        }
        let c = w2_monotone_coupling(f0, f1);
        Self::from_coupling(c.entries().map(|((i, j), m)| (i, j, m)).collect())
    }

    /// Interpolation along an arbitrary coupling moving mass rightwards.
    pub fn from_coupling(pairs: Vec<(usize, usize, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidMeasure("empty coupling".into()));
        }
        if let Some(&(i, j, _)) = pairs.iter().find(|(i, j, _)| i > j) {
            return Err(Error::Domain(format!("coupling moves mass leftwards: ({i}, {j})")));
        }
        let len = pairs.iter().map(|p| p.1).max().unwrap() + 1;
        Ok(BinomialW2 { pairs, len })
    }

    pub fn pairs(&self) -> &[(usize, usize, f64)] {
        &self.pairs
    }

    /// Window length: positions `0..len`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn eval(&self, t: f64) -> Result<W2Triple> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::TimeOutOfRange(t));
        }
        let n = self.len;
        let mut f = vec![0.0; n];
        let mut g = vec![0.0; n.saturating_sub(1)];
        let mut h = vec![0.0; n.saturating_sub(2)];
        for &(i, j, m) in &self.pairs {
            let d = (j - i) as i64;
            for k in i..=j {
                let r = (k - i) as i64;
                f[k] += m * binomial_pmf(d, r, t);
                if k < j {
                    g[k] += m * d as f64 * binomial_pmf(d - 1, r, t);
                }
                if k + 1 < j {
                    h[k] += m * (d * (d - 1)) as f64 * binomial_pmf(d - 2, r, t);
                }
            }
        }
        Ok(W2Triple { f, g, h })
    }

    /// `g_t(k)` re-expressed as `Σ π Bin_{j-i,t}(k-i) (j-k)/(1-t)`, for
    /// `t < 1`.
    pub fn g_from_right(&self, t: f64) -> Vec<f64> {
        let mut g = vec![0.0; self.len.saturating_sub(1)];
        for &(i, j, m) in &self.pairs {
            for k in i..j {
                g[k] += m * binomial_pmf((j - i) as i64, (k - i) as i64, t) * (j - k) as f64 / (1.0 - t);
            }
        }
        g
    }

    /// `g_t(k-1)` re-expressed as `Σ π Bin_{j-i,t}(k-i) (k-i)/t`, indexed by
    /// the edge `k-1 -> k`, for `t > 0`.
    pub fn g_from_left(&self, t: f64) -> Vec<f64> {
        let mut g = vec![0.0; self.len.saturating_sub(1)];
        for &(i, j, m) in &self.pairs {
            for k in i + 1..=j {
                g[k - 1] += m * binomial_pmf((j - i) as i64, (k - i) as i64, t) * (k - i) as f64 / t;
            }
        }
        g
    }

    pub fn compare_h(&self, t: f64) -> Result<HComparison> {
        let tr = self.eval(t)?;
        let ht = tr.h_tilde();
        let max_excess =
            (0..tr.h.len()).filter(|&k| tr.f[k + 1] > 0.0).map(|k| tr.h[k] - ht[k]).fold(f64::NEG_INFINITY, f64::max);
        let min_quadratic_form =
            (1..tr.g.len()).map(|k| tr.g[k] * tr.g[k - 1] - tr.f[k] * tr.h[k - 1]).fold(f64::INFINITY, f64::min);
        let mut certificate_min = i64::MAX;
        for (a, &(i1, j1, _)) in self.pairs.iter().enumerate() {
            for &(i2, j2, _) in &self.pairs[a + 1..] {
                certificate_min = certificate_min.min((j2 as i64 - j1 as i64) * (i2 as i64 - i1 as i64));
            }
        }
        Ok(HComparison { max_excess, min_quadratic_form, certificate_min, h_le_htilde: !(max_excess > H_TILDE_SLACK) })
    }

    pub fn entropy(&self, t: f64) -> Result<f64> {
        Ok(shannon(&self.eval(t)?.f))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinomialRow {
    pub t: f64,
    pub h: f64,
    /// Five-point finite difference of `H`; `None` near the ends.
    pub hpp_fd: Option<f64>,
    /// `𝓘(f_t, g_t, h_t)`; `None` at `t ∈ {0, 1}`.
    pub hpp_analytic: Option<f64>,
    pub log_concave: bool,
    pub h_le_htilde: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinomialReport {
    pub domination: bool,
    pub rows: Vec<BinomialRow>,
    /// Both hypotheses hold on the grid.
    pub theorem_applies: bool,
    /// Minimum finite-difference `H''` over the grid.
    pub min_hpp_fd: f64,
    /// `min_hpp_fd ≥ -1e-6`.
    pub convex_observed: bool,
}

impl BinomialReport {
    pub fn status(&self) -> &'static str {
        match (self.domination, self.theorem_applies) {
            (false, _) => "not dominated: interpolation undefined",
            (true, false) => "theorem does not apply",
            (true, true) => "theorem applies",
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,H,Hpp_fd,domination,log_concave,h_le_htilde,theorem_applies\n");
        for r in &self.rows {
            let fd = r.hpp_fd.map(|v| format!("{v:e}")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{:e},{},{},{},{},{}",
                r.t, r.h, fd, self.domination, r.log_concave, r.h_le_htilde, self.theorem_applies
            );
        }
        s
    }
}

pub fn entropy_convexity_report(f0: &Measure, f1: &Measure, grid: &[f64]) -> Result<BinomialReport> {
    let domination = stochastic_domination(f0, f1);
    if !domination {
        return Ok(BinomialReport {
            domination,
            rows: Vec::new(),
            theorem_applies: false,
            min_hpp_fd: f64::NAN,
            convex_observed: false,
        });
    }
    let curve = BinomialW2::new(f0, f1)?;
    let margin = 2.0 * FD_STEP;
    let mut rows = Vec::with_capacity(grid.len());
    for &t in grid {
        let tr = curve.eval(t)?;
        let hpp_fd = if t > margin && t < 1.0 - margin {
            Some(fd_second_derivative(|s| curve.entropy(s), t, FD_STEP)?)
        } else {
            None
        };
        let interior = t > 0.0 && t < 1.0;
        rows.push(BinomialRow {
            t,
            h: shannon(&tr.f),
            hpp_fd,
            hpp_analytic: if interior { Some(tr.functional_i()?) } else { None },
            log_concave: is_log_concave(&tr.f),
            h_le_htilde: curve.compare_h(t)?.h_le_htilde,
        });
    }
    let theorem_applies = rows.iter().all(|r| r.log_concave);
    let min_hpp_fd = rows.iter().filter_map(|r| r.hpp_fd).fold(f64::INFINITY, f64::min);
    Ok(BinomialReport {
        domination,
        rows,
        theorem_applies,
        min_hpp_fd,
        convex_observed: min_hpp_fd >= -FD_CONVEXITY_SLACK,
    })
}
