//! Phase-1 simplex for `{x ≥ 0 : Mx = b}` with Bland's rule, generic over the
//! number type so the same code runs in floating point and exact rationals.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::ops::{Add, Div, Mul, Sub};

use crate::error::{Error, Result};

pub trait Field:
    Clone
    + PartialOrd
    + Zero
    + Signed
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    /// Magnitudes at or below this count as zero when pivoting.
    fn eps() -> Self;
    fn to_f64(&self) -> f64;
}

impl Field for f64 {
    fn eps() -> Self {
        1e-12
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Field for BigRational {
    fn eps() -> Self {
        BigRational::zero()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone)]
pub struct PhaseOne<T> {
    /// Minimum of the sum of artificial variables; zero iff feasible.
    pub objective: T,
    /// Values of the original variables at the final basis.
    pub solution: Vec<T>,
    pub pivots: usize,
}

/// Rows of `m` with `b ≥ 0` assumed; callers flip signs beforehand.
pub fn phase_one<T: Field>(m: &[Vec<T>], b: &[T], max_pivots: usize) -> Result<PhaseOne<T>> {
    let rows = m.len();
    let n = m.first().map_or(0, |r| r.len());
    let width = n + rows + 1;
    let rhs = width - 1;
    let mut tab: Vec<Vec<T>> = Vec::with_capacity(rows + 1);
    for (i, row) in m.iter().enumerate() {
        let mut r = vec![T::zero(); width];
        let flip = b[i].is_negative();
        for (k, v) in row.iter().enumerate() {
            r[k] = if flip { -v.clone() } else { v.clone() };
        }
        r[n + i] = T::one();
        r[rhs] = if flip { -b[i].clone() } else { b[i].clone() };
        tab.push(r);
    }
    // objective row: maximize −Σ artificials, expressed in nonbasic terms
    let mut obj = vec![T::zero(); width];
    for r in &tab {
        for k in 0..n {
            obj[k] = obj[k].clone() - r[k].clone();
        }
        obj[rhs] = obj[rhs].clone() - r[rhs].clone();
    }
    tab.push(obj);
    let mut basis: Vec<usize> = (n..n + rows).collect();
    let eps = T::eps();
    let neg_eps = -eps.clone();

    let mut pivots = 0;
    while let Some(enter) = (0..n + rows).find(|&k| tab[rows][k] < neg_eps) {
        let mut leave: Option<usize> = None;
        for i in 0..rows {
            if tab[i][enter] > eps {
                leave = match leave {
                    None => Some(i),
                    Some(l) => {
                        let lhs = tab[i][rhs].clone() * tab[l][enter].clone();
                        let rhs_ = tab[l][rhs].clone() * tab[i][enter].clone();
                        if lhs < rhs_ || (lhs == rhs_ && basis[i] < basis[l]) {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
        }
        let Some(leave) = leave else { break };
        pivot(&mut tab, leave, enter);
        basis[leave] = enter;
        pivots += 1;
        if pivots >= max_pivots {
            return Err(Error::SolverStall(pivots));
        }
    }
    let mut solution = vec![T::zero(); n];
    for (i, &v) in basis.iter().enumerate() {
        if v < n {
            solution[v] = tab[i][rhs].clone();
        }
    }
    Ok(PhaseOne {
        objective: -tab[rows][rhs].clone(),
        solution,
        pivots,
    })
}

fn pivot<T: Field>(tab: &mut [Vec<T>], row: usize, col: usize) {
    let p = tab[row][col].clone();
    for v in tab[row].iter_mut() {
        *v = v.clone() / p.clone();
    }
    let pivot_row = tab[row].clone();
    for (i, r) in tab.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let f = r[col].clone();
        for (v, pv) in r.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *v = v.clone() - f.clone() * pv.clone();
            }
        }
    }
}
