//! Pipelines behind `run`.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use w1plus::bb_triple::BbTriple;
use w1plus::binomial_w2::entropy_convexity_report;
use w1plus::entropy::{entropy_along_curve, relative_entropy_bound};
use w1plus::geodesic::{solve_canonical, GeodesicCurve, DEFAULT_MAX_ITER};
use w1plus::orientation::{orient, path_counts, Orientation};
use w1plus::product::tensorization_check;
use w1plus::Result;

use crate::scenario::{Loaded, Mode, Tolerances};

pub const DEFAULT_SAMPLES: usize = 1000;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Check { name, passed, detail }
    }
}

pub struct Outcome {
    pub csv: String,
    pub checks: Vec<Check>,
}

pub fn run(l: &Loaded, tol: &Tolerances) -> Result<Outcome> {
    match l.scenario.mode {
        Mode::Orient => orient_mode(l),
        Mode::Geodesic => geodesic_mode(l, tol),
        Mode::Entropy => entropy_mode(l, tol),
        Mode::Tensor => tensor_mode(l, tol),
        Mode::BinomialW2 => binomial_mode(l, tol),
        Mode::BbTest => bbtest_mode(l, tol),
    }
}

fn orientation(l: &Loaded) -> Result<Arc<Orientation>> {
    Ok(Arc::new(orient(&l.graph, &l.f0, &l.f1)?))
}

fn curve(l: &Loaded, tol: &Tolerances) -> Result<GeodesicCurve> {
    let o = orientation(l)?;
    let pc = path_counts(&o)?;
    solve_canonical(o, pc, &l.f0, &l.f1, tol.solver, DEFAULT_MAX_ITER)
}

fn orient_mode(l: &Loaded) -> Result<Outcome> {
    let o = orientation(l)?;
    let acyclic = o.topological_order().is_ok();
    Ok(Outcome {
        csv: o.dump()?,
        checks: vec![Check::new(
            "orientation acyclic",
            acyclic,
            format!("{} oriented edges, {} triples", o.edges().len(), o.triples().len()),
        )],
    })
}

fn geodesic_mode(l: &Loaded, tol: &Tolerances) -> Result<Outcome> {
    let c = curve(l, tol)?;
    let w1 = c.check_w1_geodesic(&l.grid)?;
    let cont = c.continuity()?;
    let mut worst = 0.0f64;
    for &t in &l.grid {
        worst = worst.max(c.eval_triple(t)?.validate().max_relative_violation);
    }
    Ok(Outcome {
        csv: c.to_csv(&l.grid)?,
        checks: vec![
            Check::new(
                "W1 geodesic",
                w1.passed,
                format!("W1 = {:.6}, max defect {:.2e} over {} pairs", w1.w1, w1.max_defect, w1.pairs),
            ),
            Check::new("continuity equations", cont.max() <= tol.identity, format!("max defect {:.2e}", cont.max())),
            Check::new("BB equation", worst <= tol.identity, format!("max relative violation {worst:.2e}")),
        ],
    })
}

fn entropy_mode(l: &Loaded, tol: &Tolerances) -> Result<Outcome> {
    let c = curve(l, tol)?;
    let r = entropy_along_curve(&c, &l.grid, &l.scenario.renyi)?;
    let mut checks = vec![
        Check::new("H'' >= 0", r.min_hpp >= -tol.check, format!("min H'' = {:.6e}", r.min_hpp)),
        Check::new(
            "H'' matches finite differences",
            r.max_fd_mismatch() <= tol.fd,
            format!("max relative gap {:.2e}", r.max_fd_mismatch()),
        ),
        Check::new("W^2 constant", r.w_squared_spread() <= tol.check, format!("std {:.2e}", r.w_squared_spread())),
    ];
    for rc in &r.renyi {
        let min = rc.second_differences.iter().flatten().fold(f64::INFINITY, |m, &d| m.min(d));
        checks.push(Check::new(
            "Renyi convexity",
            min >= -tol.renyi,
            format!("p = {}: min second difference {min:.3e}", rc.p),
        ));
    }
    if let Some(pot) = &l.potential {
        let interior: Vec<f64> = l.grid.iter().copied().filter(|&t| t > 0.0 && t < 1.0).collect();
        let rows = relative_entropy_bound(&c, pot, &interior)?;
        let worst = rows.iter().map(|r| r.hnu_pp - (r.hpp + pot.k * r.w_squared)).fold(f64::INFINITY, f64::min);
        checks.push(Check::new(
            "relative entropy bound",
            worst >= -tol.check,
            format!("min H_nu'' - H'' - K W^2 = {worst:.3e}"),
        ));
    }
    Ok(Outcome { csv: r.to_csv(), checks })
}

fn tensor_mode(l: &Loaded, tol: &Tolerances) -> Result<Outcome> {
    let c = curve(l, tol)?;
    let r = tensorization_check(&c, &l.grid)?;
    let gap = |f: &dyn Fn(&w1plus::product::TensorRow) -> f64| {
        r.rows.iter().map(|row| row.hpp - f(row)).fold(f64::INFINITY, f64::min)
    };
    let slices = gap(&|row| row.slice_sum_axis1 + row.slice_sum_axis2);
    let leaves = gap(&|row| row.leaf_slice_sum);
    let involutive = gap(&|row| row.involutive_edge_bound);
    Ok(Outcome {
        csv: r.to_csv(),
        checks: vec![
            Check::new("two-factor tensorization", slices >= -tol.check, format!("min H'' - slice sum = {slices:.3e}")),
            Check::new("leaf tensorization", leaves >= -tol.check, format!("min H'' - leaf slice sum = {leaves:.3e}")),
            Check::new(
                "involutive edge bound",
                involutive >= -tol.check,
                format!("min H'' - bound = {involutive:.3e}"),
            ),
        ],
    })
}

fn binomial_mode(l: &Loaded, tol: &Tolerances) -> Result<Outcome> {
    let labels = |m: &w1plus::measure::Measure| {
        w1plus::measure::Measure::new(m.atoms().map(|(v, x)| (l.graph.label(v) as usize, x)))
    };
    let r = entropy_convexity_report(&labels(&l.f0)?, &labels(&l.f1)?, &l.grid)?;
    let mut checks = vec![Check::new("stochastic domination", r.domination, r.status().to_string())];
    if r.domination {
        let holds = r.rows.iter().all(|row| row.h_le_htilde);
        checks.push(Check::new("h <= h~", holds, format!("holds at all {} grid points: {holds}", r.rows.len())));
        if r.theorem_applies {
            checks.push(Check::new(
                "entropy convexity",
                r.min_hpp_fd >= -tol.renyi,
                format!("min FD H'' = {:.3e}", r.min_hpp_fd),
            ));
        } else {
            checks.push(Check::new(
                "entropy convexity",
                true,
                format!("observational only, min FD H'' = {:.3e}", r.min_hpp_fd),
            ));
        }
    }
    Ok(Outcome { csv: r.to_csv(), checks })
}

fn bbtest_mode(l: &Loaded, tol: &Tolerances) -> Result<Outcome> {
    let o = orientation(l)?;
    let samples = l.scenario.samples.unwrap_or(DEFAULT_SAMPLES);
    let mut rng = ChaCha8Rng::seed_from_u64(l.scenario.seed);
    let mut csv = String::from("sample,functional_i,functional_i_ibp,relative_gap,lower_bound,bound_satisfied\n");
    let (mut worst_gap, mut worst_valid, mut bound_ok) = (0.0f64, 0.0f64, true);
    for k in 0..samples {
        let f = (0..o.n()).map(|_| rng.gen_range(0.01..1.0)).collect();
        let g = o.edges().iter().map(|_| rng.gen_range(0.01..2.0)).collect();
        let tr = BbTriple::from_fg(o.clone(), f, g)?;
        worst_valid = worst_valid.max(tr.validate().max_relative_violation);
        let i = tr.functional_i()?;
        let ibp = tr.functional_i_ibp()?;
        let gap = (i - ibp).abs() / i.abs().max(1.0);
        worst_gap = worst_gap.max(gap);
        let b = tr.check_i_bound()?;
        bound_ok &= b.satisfied;
        let _ = writeln!(csv, "{k},{i:e},{ibp:e},{gap:e},{:e},{}", b.bound, b.satisfied);
    }
    Ok(Outcome {
        csv,
        checks: vec![
            Check::new("BB equation", worst_valid <= tol.identity, format!("max relative violation {worst_valid:.2e}")),
            Check::new("integration by parts", worst_gap <= tol.identity, format!("max relative gap {worst_gap:.2e}")),
            Check::new("general lower bound", bound_ok, format!("{samples} samples")),
        ],
    })
}
