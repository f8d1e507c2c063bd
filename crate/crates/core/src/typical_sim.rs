//! Exact class-level simulation of the conversion protocol that realizes a
//! stochastic witness with equilibrium ancillas.
//!
//! The joint system is a word of length `n+1` over the resource alphabet and
//! a word of length `n+1` over the target alphabet. A class `(r, s)` collects
//! all word pairs with letter counts `r` and `s`; the protocol permutes
//! inside each class, so every class is handled with exact integer counts.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::conversion::{rational_from_f64, StochasticMatrix};
use crate::deviation::binomial;
use crate::error::{Error, Result};
use crate::inference::{compositions, log_sum_exp};
use crate::model::QuasiClassicalObject;
use crate::Caps;

/// Witness equations must hold to this accuracy before simulating.
pub const WITNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TypeClassPair {
    pub r: Vec<usize>,
    pub s: Vec<usize>,
}

pub fn type_class_pair_count(n: usize, l: usize, lt: usize) -> u128 {
    let one = |k: usize| binomial((n + k) as u128, (k - 1) as u128);
    if l == 0 || lt == 0 {
        return 0;
    }
    one(l).saturating_mul(one(lt))
}

pub fn enumerate_type_classes(
    n: usize,
    l: usize,
    lt: usize,
    caps: &Caps,
) -> Result<Vec<TypeClassPair>> {
    let needed = type_class_pair_count(n, l, lt);
    if needed > caps.enumeration {
        return Err(Error::EnumerationCapExceeded {
            needed,
            cap: caps.enumeration,
        });
    }
    let rs = compositions(n + 1, l);
    let ss = compositions(n + 1, lt);
    let mut out = Vec::with_capacity(rs.len() * ss.len());
    for r in &rs {
        for s in &ss {
            out.push(TypeClassPair {
                r: r.clone(),
                s: s.clone(),
            });
        }
    }
    Ok(out)
}

struct Factorials(Vec<BigUint>);

impl Factorials {
    fn up_to(n: usize) -> Self {
        let mut t = Vec::with_capacity(n + 1);
        t.push(BigUint::from(1u32));
        for k in 1..=n {
            let next = &t[k - 1] * BigUint::from(k);
            t.push(next);
        }
        Self(t)
    }

    /// `total! / ∏ counts_i!`.
    fn multinomial(&self, counts: &[usize]) -> BigUint {
        let total: usize = counts.iter().sum();
        counts
            .iter()
            .fold(self.0[total].clone(), |acc, &k| acc / &self.0[k])
    }

    /// Multinomial of `counts` with one occurrence of `letter` removed; zero if absent.
    fn without(&self, counts: &[usize], letter: usize) -> BigUint {
        if counts[letter] == 0 {
            return BigUint::zero();
        }
        let mut c = counts.to_vec();
        c[letter] -= 1;
        self.multinomial(&c)
    }
}

/// Counts for one class: `b_j` word pairs start with `j`, `c_x` end with `x`;
/// `m[x][j]` pairs are routed from start `j` to end `x`, `leftover[x][j]`
/// more by the completing bijection.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationTable {
    pub b: Vec<BigUint>,
    pub c: Vec<BigUint>,
    pub m: Vec<Vec<BigUint>>,
    pub leftover: Vec<Vec<BigUint>>,
}

impl AllocationTable {
    /// `m[x][j] + leftover[x][j]`.
    pub fn routed(&self, x: usize, j: usize) -> BigUint {
        &self.m[x][j] + &self.leftover[x][j]
    }
}

fn exact_matrix(a: &StochasticMatrix) -> Vec<Vec<BigRational>> {
    (0..a.rows())
        .map(|x| {
            (0..a.cols())
                .map(|j| rational_from_f64(a.get(x, j)))
                .collect()
        })
        .collect()
}

fn floor_product(a: &BigRational, b: &BigUint) -> BigUint {
    let prod = a * BigRational::from_integer(BigInt::from(b.clone()));
    prod.floor().to_integer().to_biguint().unwrap_or_default()
}

fn allocate(
    a: &[Vec<BigRational>],
    class: &TypeClassPair,
    n: usize,
    fact: &Factorials,
) -> AllocationTable {
    let (l, lt) = (class.r.len(), class.s.len());
    let mr = fact.multinomial(&class.r);
    let ms = fact.multinomial(&class.s);
    let b: Vec<BigUint> = (0..l).map(|j| fact.without(&class.r, j) * &ms).collect();
    let c: Vec<BigUint> = (0..lt).map(|x| &mr * fact.without(&class.s, x)).collect();
    debug_assert_eq!(n + 1, class.r.iter().sum::<usize>());

    let mut budget = b.clone();
    let mut m = vec![vec![BigUint::zero(); l]; lt];
    for x in 0..lt {
        let mut room = c[x].clone();
        for j in 0..l {
            let want = floor_product(&a[x][j], &b[j]);
            let take = want.min(room.clone()).min(budget[j].clone());
            room -= &take;
            budget[j] -= &take;
            m[x][j] = take;
        }
    }
    // lexicographic completion: spare sources by ascending j fill spare targets by ascending x
    let mut spare_target: Vec<BigUint> = (0..lt)
        .map(|x| &c[x] - m[x].iter().fold(BigUint::zero(), |s, v| s + v))
        .collect();
    let mut leftover = vec![vec![BigUint::zero(); l]; lt];
    let mut x = 0;
    for j in 0..l {
        while !budget[j].is_zero() && x < lt {
            let take = budget[j].clone().min(spare_target[x].clone());
            leftover[x][j] += &take;
            budget[j] -= &take;
            spare_target[x] -= &take;
            if spare_target[x].is_zero() {
                x += 1;
            }
        }
    }
    AllocationTable { b, c, m, leftover }
}

pub fn allocation(
    a: &StochasticMatrix,
    class: &TypeClassPair,
    n: usize,
) -> Result<AllocationTable> {
    if class.r.len() != a.cols() || class.s.len() != a.rows() {
        return Err(Error::ShapeMismatch {
            expected: format!("class over {} and {} letters", a.cols(), a.rows()),
            got: format!("{} and {}", class.r.len(), class.s.len()),
        });
    }
    for (what, v) in [("r", &class.r), ("s", &class.s)] {
        let total: usize = v.iter().sum();
        if total != n + 1 {
            return Err(Error::ShapeMismatch {
                expected: format!("{what} summing to {}", n + 1),
                got: total.to_string(),
            });
        }
    }
    Ok(allocate(
        &exact_matrix(a),
        class,
        n,
        &Factorials::up_to(n + 1),
    ))
}

/// Natural logarithm of a big integer; `−∞` for zero.
pub fn ln_big(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 900;
    (v >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

fn check_witness(
    a: &StochasticMatrix,
    o: &QuasiClassicalObject,
    target: &QuasiClassicalObject,
) -> Result<()> {
    if a.cols() != o.len() || a.rows() != target.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{}", target.len(), o.len()),
            got: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    crate::model::same_beta(o.beta(), target.beta())?;
    let ap = a.apply(o.p())?;
    let ag = a.apply(o.g())?;
    let dp = ap
        .iter()
        .zip(target.p())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let dg = ag
        .iter()
        .zip(target.g())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    if dg > WITNESS_TOL {
        return Err(Error::InvalidWitness(format!("|Ag − g̃| = {dg:e}")));
    }
    if dp > WITNESS_TOL {
        return Err(Error::InvalidWitness(format!("|Ap − p̃| = {dp:e}")));
    }
    Ok(())
}

fn ln_weight(v: &[f64], counts: &[usize]) -> f64 {
    counts
        .iter()
        .zip(v)
        .map(|(&k, &x)| if k == 0 { 0.0 } else { k as f64 * x.ln() })
        .sum()
}

/// Everything the simulation learns at one ancilla count `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationOutcome {
    pub n: usize,
    /// Distribution of the last target letter after the protocol.
    pub marginal: Vec<f64>,
    /// Total mass before normalization; one up to rounding.
    pub total_mass: f64,
    /// Largest per-class `|mass out − mass in|`.
    pub conservation_error: f64,
    /// `max |P̃(x)/P̃(v) − p̃_x/p̃_v|` over near-typical classes.
    pub ratio_diagnostic: f64,
    pub classes: usize,
}

/// Near-typical: `‖r/(n+1) − g‖₁ + ‖s/(n+1) − g̃‖₁ ≤ (n+1)^{−1/3}`.
pub fn is_near_typical(class: &TypeClassPair, g: &[f64], gt: &[f64]) -> bool {
    let total = class.r.iter().sum::<usize>() as f64;
    let dist = |counts: &[usize], v: &[f64]| -> f64 {
        counts
            .iter()
            .zip(v)
            .map(|(&k, &x)| (k as f64 / total - x).abs())
            .sum()
    };
    dist(&class.r, g) + dist(&class.s, gt) <= total.powf(-1.0 / 3.0)
}

pub fn simulate(
    a: &StochasticMatrix,
    o: &QuasiClassicalObject,
    target: &QuasiClassicalObject,
    n: usize,
    caps: &Caps,
) -> Result<SimulationOutcome> {
    check_witness(a, o, target)?;
    let classes = enumerate_type_classes(n, o.len(), target.len(), caps)?;
    let fact = Factorials::up_to(n + 1);
    let exact = exact_matrix(a);
    let (p, g, gt, pt) = (o.p(), o.g(), target.g(), target.p());
    let lt = target.len();
    let ln_ratio: Vec<f64> = p
        .iter()
        .zip(g)
        .map(|(&x, &y)| {
            if x == 0.0 {
                f64::NEG_INFINITY
            } else {
                x.ln() - y.ln()
            }
        })
        .collect();

    let mut per_x: Vec<Vec<f64>> = vec![Vec::with_capacity(classes.len()); lt];
    let mut conservation_error: f64 = 0.0;
    let mut ratio_diagnostic: f64 = 0.0;
    for class in &classes {
        let table = allocate(&exact, class, n, &fact);
        let base = ln_weight(g, &class.r) + ln_weight(gt, &class.s);
        let ln_w: Vec<f64> = ln_ratio.iter().map(|r| r + base).collect();
        let mut out = vec![f64::NEG_INFINITY; lt];
        for (x, slot) in out.iter_mut().enumerate() {
            *slot = log_sum_exp((0..o.len()).map(|j| ln_big(&table.routed(x, j)) + ln_w[j]));
            per_x[x].push(*slot);
        }
        let mass_in = log_sum_exp((0..o.len()).map(|j| ln_big(&table.b[j]) + ln_w[j])).exp();
        let mass_out = log_sum_exp(out.iter().copied()).exp();
        conservation_error = conservation_error.max((mass_in - mass_out).abs());
        if is_near_typical(class, g, gt) {
            for x in 0..lt {
                for v in 0..lt {
                    if x != v && pt[v] > 0.0 && out[v] > f64::NEG_INFINITY {
                        let d = ((out[x] - out[v]).exp() - pt[x] / pt[v]).abs();
                        ratio_diagnostic = ratio_diagnostic.max(d);
                    }
                }
            }
        }
    }
    let ln_marginal: Vec<f64> = per_x.into_iter().map(log_sum_exp).collect();
    let total_mass = log_sum_exp(ln_marginal.iter().copied()).exp();
    if (total_mass - 1.0).abs() > 1e-9 {
        return Err(Error::NonNormalized {
            what: "simulated output marginal",
            sum: total_mass,
        });
    }
    let marginal = ln_marginal.iter().map(|v| v.exp() / total_mass).collect();
    Ok(SimulationOutcome {
        n,
        marginal,
        total_mass,
        conservation_error,
        ratio_diagnostic,
        classes: classes.len(),
    })
}

/// Output distribution of the last target letter after the protocol with `n` ancilla pairs.
pub fn exact_output_marginal(
    a: &StochasticMatrix,
    o: &QuasiClassicalObject,
    target: &QuasiClassicalObject,
    n: usize,
    caps: &Caps,
) -> Result<Vec<f64>> {
    Ok(simulate(a, o, target, n, caps)?.marginal)
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub tv_distance: f64,
    pub ratio_diagnostic: f64,
    pub conservation_error: f64,
    pub marginal: Vec<f64>,
}

pub fn convergence_report(
    a: &StochasticMatrix,
    o: &QuasiClassicalObject,
    target: &QuasiClassicalObject,
    n_list: &[usize],
    caps: &Caps,
) -> Result<Vec<ConvergenceRow>> {
    check_witness(a, o, target)?;
    n_list
        .iter()
        .map(|&n| {
            let s = simulate(a, o, target, n, caps)?;
            Ok(ConvergenceRow {
                n,
                tv_distance: total_variation(&s.marginal, target.p()),
                ratio_diagnostic: s.ratio_diagnostic,
                conservation_error: s.conservation_error,
                marginal: s.marginal,
            })
        })
        .collect()
}

/// Letter counts summing to `total` closest to `total·weights` (largest remainder).
pub fn nearest_counts(total: usize, weights: &[f64]) -> Vec<usize> {
    let raw: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut counts: Vec<usize> = raw.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        (raw[b] - raw[b].floor())
            .total_cmp(&(raw[a] - raw[a].floor()))
            .then(a.cmp(&b))
    });
    let mut missing = total - counts.iter().sum::<usize>();
    for k in order {
        if missing == 0 {
            break;
        }
        counts[k] += 1;
        missing -= 1;
    }
    counts
}
