//! Exact two-phase simplex over arbitrary-precision rationals.
//!
//! Dense tableau with Bland's rule, meant for the small transport
//! polytopes that arise at desk scale. Used as the reference semantics for
//! optimal-support membership and as an independent oracle for the
//! min-cost-flow solver.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Exact conversion of a finite float.
pub fn rational_from_f64(x: f64) -> Rational {
    BigRational::from_float(x).expect("finite float")
}

pub fn rational_to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn rational_from_int(x: i64) -> Rational {
    BigRational::from_integer(BigInt::from(x))
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<Rational>,
    pub objective: Rational,
}

/// Minimises `c·x` subject to `A x = b`, `x >= 0`.
pub fn minimize(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> Result<LpSolution> {
    let n = c.len();
    let m = a.len();
    assert_eq!(b.len(), m);
    for row in a {
        assert_eq!(row.len(), n);
    }

    // Tableau columns: n structural, m artificial, then the right-hand side.
    let width = n + m + 1;
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(m);
    for (i, row) in a.iter().enumerate() {
        let flip = b[i].is_negative();
        let mut r = vec![Rational::zero(); width];
        for j in 0..n {
            r[j] = if flip { -row[j].clone() } else { row[j].clone() };
        }
        r[n + i] = Rational::one();
        r[width - 1] = if flip { -b[i].clone() } else { b[i].clone() };
        t.push(r);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase one: minimise the sum of artificials.
    let mut obj = vec![Rational::zero(); width];
    for j in n..n + m {
        obj[j] = Rational::one();
    }
    price_out(&mut obj, &t, &basis);
    run_simplex(&mut t, &mut obj, &mut basis, n + m)?;
    if obj[width - 1].is_negative() {
        // objective row stores -z
        return Err(Error::Infeasible);
    }

    // Drive artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < t.len() {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t[i][j].is_zero()) {
                pivot(&mut t, &mut obj, &mut basis, i, j);
            } else {
                t.remove(i);
                basis.remove(i);
                continue;
            }
        }
        i += 1;
    }

    // Phase two on structural columns only.
    for row in &mut t {
        let rhs = row[width - 1].clone();
        row.truncate(n);
        row.push(rhs);
    }
    let mut obj = vec![Rational::zero(); n + 1];
    obj[..n].clone_from_slice(c);
    price_out(&mut obj, &t, &basis);
    run_simplex(&mut t, &mut obj, &mut basis, n)?;

    let mut x = vec![Rational::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        x[bv] = t[i][n].clone();
    }
    let objective = c.iter().zip(&x).fold(Rational::zero(), |acc, (ci, xi)| acc + ci * xi);
    Ok(LpSolution { x, objective })
}

/// Maximises `c·x` subject to `A x = b`, `x >= 0`.
pub fn maximize(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> Result<LpSolution> {
    let neg: Vec<_> = c.iter().map(|v| -v.clone()).collect();
    let mut sol = minimize(&neg, a, b)?;
    sol.objective = -sol.objective;
    Ok(sol)
}

/// Makes the objective row consistent with the current basis (reduced
/// costs zero on basic columns).
fn price_out(obj: &mut [Rational], t: &[Vec<Rational>], basis: &[usize]) {
    for (i, &bv) in basis.iter().enumerate() {
        let coef = obj[bv].clone();
        if !coef.is_zero() {
            for (o, v) in obj.iter_mut().zip(&t[i]) {
                *o -= &coef * v;
            }
        }
    }
}

fn run_simplex(t: &mut [Vec<Rational>], obj: &mut [Rational], basis: &mut [usize], ncols: usize) -> Result<()> {
    let rhs = obj.len() - 1;
    loop {
        // Bland: lowest-index improving column
        let Some(enter) = (0..ncols).find(|&j| obj[j].is_negative()) else {
            return Ok(());
        };
        let mut leave: Option<(usize, Rational)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[rhs] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::Unbounded);
        };
        pivot(t, obj, basis, row, enter);
    }
}

fn pivot(t: &mut [Vec<Rational>], obj: &mut [Rational], basis: &mut [usize], row: usize, col: usize) {
    let p = t[row][col].clone();
    for v in t[row].iter_mut() {
        *v /= &p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i != row && !r[col].is_zero() {
            let f = r[col].clone();
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                *v -= &f * pv;
            }
        }
    }
    if !obj[col].is_zero() {
        let f = obj[col].clone();
        for (v, pv) in obj.iter_mut().zip(&pivot_row) {
            *v -= &f * pv;
        }
    }
    basis[row] = col;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn small_lp() {
        // min -x - y  s.t. x + s1 = 2, y + s2 = 3
        let c = vec![q(-1, 1), q(-1, 1), q(0, 1), q(0, 1)];
        let a = vec![vec![q(1, 1), q(0, 1), q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1), q(0, 1), q(1, 1)]];
        let b = vec![q(2, 1), q(3, 1)];
        let s = minimize(&c, &a, &b).unwrap();
        assert_eq!(s.objective, q(-5, 1));
    }

    #[test]
    fn redundant_rows_and_infeasibility() {
        // 2x2 transport polytope: rows and columns both sum to 1 (rank 3)
        let a = vec![
            vec![q(1, 1), q(1, 1), q(0, 1), q(0, 1)],
            vec![q(0, 1), q(0, 1), q(1, 1), q(1, 1)],
            vec![q(1, 1), q(0, 1), q(1, 1), q(0, 1)],
            vec![q(0, 1), q(1, 1), q(0, 1), q(1, 1)],
        ];
        let b = vec![q(1, 2), q(1, 2), q(1, 2), q(1, 2)];
        let c = vec![q(0, 1), q(2, 1), q(2, 1), q(0, 1)];
        let s = minimize(&c, &a, &b).unwrap();
        assert_eq!(s.objective, q(0, 1));
        assert_eq!(s.x, vec![q(1, 2), q(0, 1), q(0, 1), q(1, 2)]);

        let bad = vec![q(1, 2), q(1, 2), q(1, 2), q(1, 1)];
        assert_eq!(minimize(&c, &a, &bad).unwrap_err(), Error::Infeasible);
    }

    #[test]
    fn unbounded() {
        // max x subject to x - y = 0
        let a = vec![vec![q(1, 1), q(-1, 1)]];
        let r = maximize(&[q(1, 1), q(0, 1)], &a, &[q(0, 1)]);
        assert_eq!(r.unwrap_err(), Error::Unbounded);
    }

    #[test]
    fn float_round_trip_is_exact() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 12345.678] {
            assert_eq!(rational_to_f64(&rational_from_f64(x)), x);
        }
    }
}
