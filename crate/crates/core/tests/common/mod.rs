#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use w1plus::binomial_w2::{is_log_concave, stochastic_domination, BinomialW2};
use w1plus::graph::{build_graph, Graph, GraphSpec};
use w1plus::measure::Measure;

pub fn random_measure(rng: &mut ChaCha8Rng, n: usize, atoms: usize) -> Measure {
    let atoms: Vec<(usize, f64)> = (0..atoms).map(|_| (rng.gen_range(0..n), rng.gen_range(0.05..1.0))).collect();
    Measure::normalized(atoms).unwrap()
}

pub fn grid_graph(factors: &[usize]) -> Arc<Graph> {
    build_graph(&GraphSpec::Product(factors.iter().map(|&n| GraphSpec::Path(n)).collect())).unwrap()
}

pub fn path(n: usize) -> Arc<Graph> {
    Arc::new(Graph::path(n).unwrap())
}

/// A dominated pair on `0..span+shift` whose binomial interpolation is
/// log-concave at every point of `times`, or `None`.
pub fn dominated_log_concave_pair(rng: &mut ChaCha8Rng, times: &[f64]) -> Option<(Measure, Measure)> {
    let width = rng.gen_range(1..=4);
    let shape = |rng: &mut ChaCha8Rng, at: usize| {
        let base: f64 = rng.gen_range(0.2..0.8);
        Measure::normalized((0..width).map(|k| (at + k, base.powi(k as i32) * rng.gen_range(0.7..1.3)))).unwrap()
    };
    let f0 = shape(rng, 0);
    let shift = rng.gen_range(0..=4);
    let f1 = shape(rng, shift);
    if !stochastic_domination(&f0, &f1) || f0 == f1 {
        return None;
    }
    let c = BinomialW2::new(&f0, &f1).ok()?;
    times.iter().all(|&t| is_log_concave(&c.eval(t).unwrap().f)).then_some((f0, f1))
}
