//! Bundled invariant suites.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use w1plus::bb_triple::BbTriple;
use w1plus::binomial_w2::{binomial_pmf, BinomialW2};
use w1plus::entropy::{holder_gap, psi};
use w1plus::geodesic::{canonical_geodesic, uniform_grid};
use w1plus::graph::{build_graph, Graph, GraphSpec};
use w1plus::measure::Measure;
use w1plus::orientation::orient;

use crate::modes::Check;

/// Multiplies one `h` value of each canonical triple, as a corrupted m-weight
/// would.
const FAULT_FACTOR: f64 = 1.5;

fn random_measure(rng: &mut ChaCha8Rng, n: usize, atoms: usize) -> Measure {
    Measure::normalized((0..atoms).map(|_| (rng.gen_range(0..n), rng.gen_range(0.05..1.0)))).expect("positive weights")
}

fn graphs() -> Vec<Arc<Graph>> {
    let specs = [
        GraphSpec::Path(7),
        GraphSpec::Cycle(6),
        GraphSpec::Product(vec![GraphSpec::Path(3), GraphSpec::Path(3)]),
        GraphSpec::Hypercube(3),
    ];
    specs.iter().map(|s| build_graph(s).expect("builtin graph")).collect()
}

type SuiteResult = Result<Check, w1plus::Error>;

fn random_triples(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut worst = 0.0f64;
    let mut bound = true;
    let samples = 1000;
    let gs = graphs();
    for k in 0..samples {
        let g = &gs[k % gs.len()];
        let o = Arc::new(orient(g, &random_measure(rng, g.n(), 3), &random_measure(rng, g.n(), 3))?);
        let f = (0..o.n()).map(|_| rng.gen_range(0.01..1.0)).collect();
        let gv = o.edges().iter().map(|_| rng.gen_range(0.01..2.0)).collect();
        let tr = BbTriple::from_fg(o, f, gv)?;
        let (a, b) = (tr.functional_i()?, tr.functional_i_ibp()?);
        worst = worst.max((a - b).abs() / a.abs().max(1.0));
        bound &= tr.check_i_bound()?.satisfied;
    }
    Ok(Check {
        name: "random BB triples",
        passed: worst <= 1e-9 && bound,
        detail: format!("{samples} samples, IBP gap {worst:.2e}, lower bound holds: {bound}"),
    })
}

fn canonical_triples(rng: &mut ChaCha8Rng, inject_fault: bool) -> SuiteResult {
    let grid = uniform_grid(11);
    let mut worst = 0.0f64;
    let mut at = None;
    for g in graphs() {
        for _ in 0..3 {
            let c = canonical_geodesic(&g, &random_measure(rng, g.n(), 3), &random_measure(rng, g.n(), 3))?;
            for &t in &grid {
                let mut tr = c.eval_triple(t)?;
                if inject_fault && !tr.h.is_empty() {
                    tr.h[0] *= FAULT_FACTOR;
                }
                let r = tr.validate();
                if r.max_relative_violation > worst {
                    worst = r.max_relative_violation;
                    at = r.worst_triple.map(|(a, b, c)| (g.label(a), g.label(b), g.label(c)));
                }
            }
        }
    }
    let passed = worst <= 1e-9;
    let detail = if passed {
        format!("max relative violation {worst:.2e}")
    } else {
        let at = at.map(|(a, b, c)| format!("{a} -> {b} -> {c}")).unwrap_or_default();
        format!("BB equation violated at triple {at}: relative violation {worst:.2e}")
    };
    Ok(Check { name: "canonical BB triples", passed, detail })
}

fn psi_grid() -> SuiteResult {
    let mut min = f64::INFINITY;
    for p in (1..=9).map(|k| k as f64 / 10.0) {
        for k in 0..=10_000 {
            min = min.min(psi(k as f64 * 1e-3, p)?);
        }
    }
    Ok(Check { name: "psi grid", passed: min >= -1e-12, detail: format!("min psi = {min:.3e}") })
}

fn holder_samples(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut min = f64::INFINITY;
    let samples = 100_000;
    for _ in 0..samples {
        let [f, g, h] = [(); 3].map(|_| 10f64.powf(rng.gen_range(-2.0..2.0)));
        let p = rng.gen_range(1..=9) as f64 / 10.0;
        min = min.min(holder_gap(f, g, h, p)?);
    }
    Ok(Check { name: "Holder gap", passed: min >= -1e-12, detail: format!("{samples} samples, min gap = {min:.3e}") })
}

fn binomial_oracle() -> SuiteResult {
    let grid = uniform_grid(21);
    let mut worst = 0.0f64;
    for n in 1..=12usize {
        let g = Arc::new(Graph::path(n + 1)?);
        let c = canonical_geodesic(&g, &Measure::dirac(0), &Measure::dirac(n))?;
        let b = BinomialW2::new(&Measure::dirac(0), &Measure::dirac(n))?;
        for &t in &grid {
            let (f, fb) = (c.density(t)?, b.eval(t)?.f);
            for k in 0..=n {
                let exact = binomial_pmf(n as i64, k as i64, t);
                worst = worst.max((f[k] - exact).abs()).max((fb[k] - exact).abs());
            }
        }
    }
    Ok(Check { name: "binomial oracle", passed: worst <= 1e-10, detail: format!("n <= 12, max deviation {worst:.2e}") })
}

fn binomial_comparison(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut worst = f64::NEG_INFINITY;
    let mut pairs = 0;
    while pairs < 50 {
        let f0 = random_measure(rng, 4, 3);
        let shift = rng.gen_range(0..4);
        let f1 = Measure::normalized(random_measure(rng, 4, 3).atoms().map(|(v, m)| (v + shift, m)))?;
        let Ok(c) = BinomialW2::new(&f0, &f1) else { continue };
        for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
            worst = worst.max(c.compare_h(t)?.max_excess);
        }
        pairs += 1;
    }
    Ok(Check {
        name: "binomial h <= h~",
        passed: worst <= 1e-10,
        detail: format!("{pairs} dominated pairs, max h - h~ = {worst:.2e}"),
    })
}

/// Runs every suite; errors inside a suite count as failures.
pub fn run(seed: u64, inject_fault: bool) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let results = [
        ("random BB triples", random_triples(&mut rng)),
        ("canonical BB triples", canonical_triples(&mut rng, inject_fault)),
        ("psi grid", psi_grid()),
        ("Holder gap", holder_samples(&mut rng)),
        ("binomial oracle", binomial_oracle()),
        ("binomial h <= h~", binomial_comparison(&mut rng)),
    ];
    results
        .into_iter()
        .map(|(name, r)| r.unwrap_or_else(|e| Check { name, passed: false, detail: format!("error: {e}") }))
        .collect()
}
