//! JSON scenario documents.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use serde::Deserialize;
use w1plus::entropy::Potential;
use w1plus::geodesic::uniform_grid;
use w1plus::graph::{build_graph, Graph, GraphSpec};
use w1plus::measure::{Measure, FILE_MASS_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Mode {
    #[serde(rename = "orient")]
    Orient,
    #[serde(rename = "geodesic")]
    Geodesic,
    #[serde(rename = "entropy")]
    Entropy,
    #[serde(rename = "tensor")]
    Tensor,
    #[serde(rename = "binomial-w2")]
    BinomialW2,
    #[serde(rename = "bbtest")]
    BbTest,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphDoc {
    Path(usize),
    Cycle(usize),
    Complete(usize),
    Hypercube(usize),
    Product(Vec<GraphDoc>),
    /// Path to an edge-list file, relative to the scenario.
    EdgeList(PathBuf),
}

impl GraphDoc {
    fn to_spec(&self, base: &Path) -> anyhow::Result<GraphSpec> {
        Ok(match self {
            GraphDoc::Path(n) => GraphSpec::Path(*n),
            GraphDoc::Cycle(r) => GraphSpec::Cycle(*r),
            GraphDoc::Complete(n) => GraphSpec::Complete(*n),
            GraphDoc::Hypercube(n) => GraphSpec::Hypercube(*n),
            GraphDoc::Product(fs) => {
                GraphSpec::Product(fs.iter().map(|f| f.to_spec(base)).collect::<anyhow::Result<_>>()?)
            }
            GraphDoc::EdgeList(p) => {
                let path = base.join(p);
                GraphSpec::EdgeList(fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?)
            }
        })
    }

    pub fn is_product(&self) -> bool {
        matches!(self, GraphDoc::Product(fs) if fs.len() >= 2) || matches!(self, GraphDoc::Hypercube(n) if *n >= 2)
    }
}

/// A vertex given by its label or, on product graphs, its leaf coordinates.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum VertexRef {
    Label(u64),
    Coords(Vec<usize>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MeasureDoc {
    Atoms(Vec<(VertexRef, f64)>),
    File { file: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridDoc {
    Count(usize),
    Points(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
pub struct PotentialDoc {
    /// One value per vertex, in vertex order.
    pub v: Vec<f64>,
    pub k: f64,
}

/// Tolerances with their defaults.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Endpoint residual of the boundary solver.
    pub solver: f64,
    /// Slack on inequality checks (`H'' ≥ 0`, tensorization, bounds).
    pub check: f64,
    /// Relative gap allowed between `𝓘` and the finite-difference `H''`.
    pub fd: f64,
    /// Slack on second differences of Rényi entropies and binomial `H`.
    pub renyi: f64,
    /// Relative tolerance of identities (BB equation, `𝓘` after IBP).
    pub identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { solver: 1e-10, check: 1e-8, fd: 1e-4, renyi: 1e-6, identity: 1e-9 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub mode: Mode,
    pub graph: GraphDoc,
    pub f0: Option<MeasureDoc>,
    pub f1: Option<MeasureDoc>,
    pub grid: Option<GridDoc>,
    #[serde(default)]
    pub renyi: Vec<f64>,
    pub potential: Option<PotentialDoc>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Number of random triples in `bbtest` mode.
    pub samples: Option<usize>,
}

/// A scenario with its graph, measures and grid resolved.
pub struct Loaded {
    pub scenario: Scenario,
    pub graph: Arc<Graph>,
    pub f0: Measure,
    pub f1: Measure,
    pub grid: Vec<f64>,
    pub potential: Option<Potential>,
}

pub const DEFAULT_GRID: usize = 101;

pub fn load(path: &Path, grid_override: Option<usize>) -> anyhow::Result<Loaded> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let scenario: Scenario = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let graph = build_graph(&scenario.graph.to_spec(base)?)?;
    let f0 = resolve_measure(scenario.f0.as_ref().ok_or_else(|| anyhow!("missing f0"))?, &graph, base)?;
    let f1 = resolve_measure(scenario.f1.as_ref().ok_or_else(|| anyhow!("missing f1"))?, &graph, base)?;
    let grid = match (grid_override, &scenario.grid) {
        (Some(n), _) => count_grid(n)?,
        (None, Some(GridDoc::Count(n))) => count_grid(*n)?,
        (None, Some(GridDoc::Points(ts))) => {
            if ts.is_empty() || ts.iter().any(|t| !(0.0..=1.0).contains(t)) || ts.windows(2).any(|w| w[0] >= w[1]) {
                bail!("grid points must be increasing and inside [0, 1]");
            }
            ts.clone()
        }
        (None, None) => uniform_grid(DEFAULT_GRID),
    };
    if scenario.mode == Mode::Tensor && !scenario.graph.is_product() {
        bail!("tensor mode needs a product graph with explicit factors");
    }
    let potential = match &scenario.potential {
        Some(p) if p.v.len() != graph.n() => bail!("potential has {} values for {} vertices", p.v.len(), graph.n()),
        Some(p) => Some(Potential { v: p.v.clone(), k: p.k }),
        None => None,
    };
    Ok(Loaded { scenario, graph, f0, f1, grid, potential })
}

fn count_grid(n: usize) -> anyhow::Result<Vec<f64>> {
    if n < 2 {
        bail!("grid needs at least 2 points");
    }
    Ok(uniform_grid(n))
}

fn resolve_measure(doc: &MeasureDoc, g: &Graph, base: &Path) -> anyhow::Result<Measure> {
    let atoms: Vec<(VertexRef, f64)> = match doc {
        MeasureDoc::Atoms(a) => a.clone(),
        MeasureDoc::File { file } => {
            let path = base.join(file);
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            Measure::parse(&text)?.into_iter().map(|(v, m)| (VertexRef::Label(v), m)).collect()
        }
    };
    let mut resolved = Vec::with_capacity(atoms.len());
    for (v, m) in atoms {
        let id = match &v {
            VertexRef::Label(l) => g.vertex_by_label(*l),
            VertexRef::Coords(c) => g.vertex_of_coords(c),
        };
        resolved.push((id.ok_or_else(|| anyhow!("unknown vertex {v:?}"))?, m));
    }
    let total: f64 = resolved.iter().map(|a| a.1).sum();
    if (total - 1.0).abs() > FILE_MASS_TOLERANCE {
        bail!("masses sum to {total}");
    }
    Ok(Measure::normalized(resolved)?)
}
