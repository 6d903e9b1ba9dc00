//! Finitely supported probability measures and couplings.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Absolute tolerance on the total mass of a [`Measure`].
pub const MASS_TOLERANCE: f64 = 1e-12;
/// Tolerance accepted by [`Measure::parse`] before renormalising.
pub const FILE_MASS_TOLERANCE: f64 = 1e-6;

/// Probability mass function on graph vertices. Zero atoms are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    mass: BTreeMap<usize, f64>,
}

impl Measure {
    pub fn new(atoms: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut mass = BTreeMap::new();
        for (v, m) in atoms {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::InvalidMeasure(format!("mass {m} at vertex {v}")));
            }
            if m > 0.0 {
                *mass.entry(v).or_insert(0.0) += m;
            }
        }
        if mass.is_empty() {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        let total: f64 = mass.values().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidMeasure(format!("total mass {total}")));
        }
        Ok(Measure { mass })
    }

    /// Rescales non-negative weights to total mass one.
    pub fn normalized(atoms: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let atoms: Vec<_> = atoms.into_iter().collect();
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidMeasure(format!("total weight {total}")));
        }
        Self::new(atoms.into_iter().map(|(v, m)| (v, m / total)))
    }

    pub fn dirac(v: usize) -> Self {
        Measure { mass: BTreeMap::from([(v, 1.0)]) }
    }

    pub fn uniform(support: &[usize]) -> Result<Self> {
        Self::normalized(support.iter().map(|&v| (v, 1.0)))
    }

    /// Reads `vertex mass` lines (`#` comments allowed). The masses must sum
    /// to one within [`FILE_MASS_TOLERANCE`] and are then renormalised.
    /// Vertices are raw labels; callers map them to graph vertices.
    pub fn parse(text: &str) -> Result<Vec<(u64, f64)>> {
        let mut atoms = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let parts: Vec<_> = line.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(err("expected `vertex mass`".into()));
            }
            let v = parts[0].parse::<u64>().map_err(|e| err(format!("{:?}: {e}", parts[0])))?;
            let m = parts[1].parse::<f64>().map_err(|e| err(format!("{:?}: {e}", parts[1])))?;
            atoms.push((v, m));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > FILE_MASS_TOLERANCE {
            return Err(Error::InvalidMeasure(format!("masses sum to {total}")));
        }
        Ok(atoms.into_iter().map(|(v, m)| (v, m / total)).collect())
    }

    pub fn get(&self, v: usize) -> f64 {
        self.mass.get(&v).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.mass.keys().copied()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.mass.iter().map(|(&v, &m)| (v, m))
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn max_vertex(&self) -> usize {
        *self.mass.keys().next_back().unwrap()
    }

    /// Dense vector of length `n`.
    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (v, m) in self.atoms() {
            out[v] = m;
        }
        out
    }

    pub fn total_variation(&self, other: &Measure) -> f64 {
        let mut keys: Vec<_> = self.support().chain(other.support()).collect();
        keys.sort_unstable();
        keys.dedup();
        0.5 * keys.iter().map(|&v| (self.get(v) - other.get(v)).abs()).sum::<f64>()
    }

    /// Cumulative distribution `F(k) = Σ_{l ≤ k} f(l)` for `k in 0..n`, reading
    /// vertex ids as positions on ℤ.
    pub fn cdf(&self, n: usize) -> Vec<f64> {
        let mut acc = 0.0;
        (0..n)
            .map(|k| {
                acc += self.get(k);
                acc
            })
            .collect()
    }
}

/// Coupling between two measures. Only strictly positive entries are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    mass: BTreeMap<(usize, usize), f64>,
    left: Measure,
    right: Measure,
}

impl Coupling {
    /// Checks row and column sums against the marginals within `1e-10`.
    pub fn new(
        entries: impl IntoIterator<Item = ((usize, usize), f64)>,
        left: Measure,
        right: Measure,
    ) -> Result<Self> {
        let mut mass = BTreeMap::new();
        for ((a, b), m) in entries {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::InvalidMeasure(format!("coupling mass {m} at ({a}, {b})")));
            }
            if m > 0.0 {
                *mass.entry((a, b)).or_insert(0.0) += m;
            }
        }
        let c = Coupling { mass, left, right };
        let defect = c.marginal_defect();
        if defect > 1e-10 {
            return Err(Error::InvalidMeasure(format!("coupling marginal defect {defect:e}")));
        }
        Ok(c)
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.mass.get(&(a, b)).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.mass.iter().map(|(&k, &m)| (k, m))
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.mass.keys().copied()
    }

    pub fn left(&self) -> &Measure {
        &self.left
    }

    pub fn right(&self) -> &Measure {
        &self.right
    }

    pub fn cost(&self, cost: impl Fn(usize, usize) -> f64) -> f64 {
        self.entries().map(|((a, b), m)| cost(a, b) * m).sum()
    }

    /// Largest absolute deviation of a row or column sum from its marginal.
    pub fn marginal_defect(&self) -> f64 {
        let mut rows: BTreeMap<usize, f64> = self.left.atoms().map(|(v, m)| (v, -m)).collect();
        let mut cols: BTreeMap<usize, f64> = self.right.atoms().map(|(v, m)| (v, -m)).collect();
        for ((a, b), m) in self.entries() {
            *rows.entry(a).or_insert(0.0) += m;
            *cols.entry(b).or_insert(0.0) += m;
        }
        rows.values().chain(cols.values()).fold(0.0f64, |acc, d| acc.max(d.abs()))
    }
}
