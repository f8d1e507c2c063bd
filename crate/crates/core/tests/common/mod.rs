//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random point of the simplex with every entry at least `floor`.
pub fn simplex(rng: &mut impl Rng, l: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..l)
        .map(|_| -rng.random::<f64>().max(1e-300).ln())
        .collect();
    let s: f64 = raw.iter().sum();
    let spare = 1.0 - floor * l as f64;
    raw.iter().map(|x| floor + spare * x / s).collect()
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Random positive rational distribution with small integer weights.
pub fn rational_simplex(rng: &mut impl Rng, l: usize, max_weight: i64) -> Vec<BigRational> {
    let w: Vec<i64> = (0..l).map(|_| rng.random_range(1..=max_weight)).collect();
    let s: i64 = w.iter().sum();
    w.iter().map(|&x| q(x, s)).collect()
}

pub fn to_f64(v: &[BigRational]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64().unwrap()).collect()
}

/// Column-stochastic `rows × cols` rational matrix, returned as rows.
pub fn rational_stochastic(rng: &mut impl Rng, rows: usize, cols: usize) -> Vec<Vec<BigRational>> {
    let columns: Vec<Vec<BigRational>> =
        (0..cols).map(|_| rational_simplex(rng, rows, 9)).collect();
    (0..rows)
        .map(|x| (0..cols).map(|j| columns[j][x].clone()).collect())
        .collect()
}

pub fn apply_rational(a: &[Vec<BigRational>], v: &[BigRational]) -> Vec<BigRational> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
        })
        .collect()
}

fn hinge(p: &[BigRational], g: &[BigRational], t: &BigRational) -> BigRational {
    p.iter().zip(g).fold(BigRational::zero(), |acc, (a, b)| {
        let d = a - t * b;
        if d.is_positive() {
            acc + d
        } else {
            acc
        }
    })
}

/// Blackwell criterion for dichotomies: `(p, g)` reaches `(pt, gt)` iff
/// `Σ(p − t g)₊ ≥ Σ(pt − t gt)₊` for all `t ≥ 0`. Both sides are piecewise
/// linear in `t`, so breakpoints and the slope at infinity suffice.
pub fn blackwell_feasible(
    p: &[BigRational],
    g: &[BigRational],
    pt: &[BigRational],
    gt: &[BigRational],
) -> bool {
    let mut ts = vec![BigRational::zero()];
    for (a, b) in p.iter().zip(g).chain(pt.iter().zip(gt)) {
        if !b.is_zero() {
            ts.push(a / b);
        }
    }
    let tail = |p: &[BigRational], g: &[BigRational]| {
        p.iter()
            .zip(g)
            .filter(|(_, b)| b.is_zero())
            .fold(BigRational::zero(), |acc, (a, _)| acc + a)
    };
    if tail(p, g) < tail(pt, gt) {
        return false;
    }
    ts.iter().all(|t| hinge(p, g, t) >= hinge(pt, gt, t))
}

/// Smallest `Σ(1 − w)g` over `w ∈ [0,1]^l` with `Σ w p = f2`, by visiting
/// every vertex of the feasible polytope: all coordinates at a bound except
/// at most one.
pub fn np_vertex_oracle(p: &[f64], g: &[f64], f2: f64) -> Option<f64> {
    let l = p.len();
    let mut best: Option<f64> = None;
    let mut consider = |w: &[f64]| {
        let f1: f64 = w.iter().zip(g).map(|(a, b)| (1.0 - a) * b).sum();
        best = Some(best.map_or(f1, |x: f64| x.min(f1)));
    };
    for mask in 0u32..(1 << l) {
        let base: Vec<f64> = (0..l).map(|k| ((mask >> k) & 1) as f64).collect();
        let spent: f64 = base.iter().zip(p).map(|(a, b)| a * b).sum();
        if (spent - f2).abs() <= 1e-13 {
            consider(&base);
        }
        for k in 0..l {
            if base[k] != 0.0 || p[k] == 0.0 {
                continue;
            }
            let w = (f2 - spent) / p[k];
            if (0.0..=1.0).contains(&w) {
                let mut v = base.clone();
                v[k] = w;
                consider(&v);
            }
        }
    }
    best
}

/// Largest `Σ w·gain` subject to `Σ w·cost ≤ budget`, from the dual
/// `min_{λ ≥ 0} λ·budget + Σ(gain − λ·cost)₊` evaluated at its breakpoints.
pub fn knapsack_dual(cost: &[f64], gain: &[f64], budget: f64) -> f64 {
    let mut lambdas = vec![0.0];
    lambdas.extend(
        cost.iter()
            .zip(gain)
            .filter(|(c, _)| **c > 0.0)
            .map(|(c, g)| g / c),
    );
    lambdas
        .iter()
        .map(|&lam| {
            lam * budget
                + cost
                    .iter()
                    .zip(gain)
                    .map(|(c, g)| (g - lam * c).max(0.0))
                    .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn gibbs(levels: &[f64], beta: f64) -> Vec<f64> {
    let w: Vec<f64> = levels.iter().map(|e| (-beta * e).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter().map(|x| x / z).collect()
}

pub fn kl(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .filter(|(x, _)| **x > 0.0)
        .map(|(x, y)| x * (x / y).ln())
        .sum()
}

/// `max ln(p/g) − min ln(p/g)` for diagonal objects.
pub fn classical_d(p: &[f64], g: &[f64]) -> f64 {
    let r: Vec<f64> = p.iter().zip(g).map(|(a, b)| (a / b).ln()).collect();
    r.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - r.iter().copied().fold(f64::INFINITY, f64::min)
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                go(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}
