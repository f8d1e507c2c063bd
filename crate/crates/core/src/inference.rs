//! Cooling as hypothesis testing: randomized Neyman-Pearson rules, the
//! lowest temperature a resource can reach, and its many-copy behaviour.

use serde::Serialize;

use crate::conversion::kl_divergence;
use crate::deviation::binomial;
use crate::error::{Error, Result};
use crate::model::{QuasiClassicalObject, Units};
use crate::Caps;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorPair {
    /// Risk of the first kind: deciding for the resource when equilibrium is actual.
    pub f1: f64,
    /// Risk of the second kind.
    pub f2: f64,
}

/// `w1[i]` is the probability of deciding "equilibrium" on outcome `i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionRule {
    pub w1: Vec<f64>,
}

impl DecisionRule {
    /// `F₁ = Σ (1 − w_i) g_i`, `F₂ = Σ w_i p_i`.
    pub fn errors(&self, p: &[f64], g: &[f64]) -> Result<ErrorPair> {
        for v in [p, g] {
            if v.len() != self.w1.len() {
                return Err(Error::LengthMismatch {
                    left: self.w1.len(),
                    right: v.len(),
                });
            }
        }
        Ok(ErrorPair {
            f1: self.w1.iter().zip(g).map(|(w, x)| (1.0 - w) * x).sum(),
            f2: self.w1.iter().zip(p).map(|(w, x)| w * x).sum(),
        })
    }
}

fn check_gap(gap: f64) -> Result<()> {
    if gap <= 0.0 || !gap.is_finite() {
        return Err(Error::NonpositiveGap(gap));
    }
    Ok(())
}

/// Logistic `1/(1 + e^{−x})` without overflow.
fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Error pair that certifies a qubit of gap `E` at inverse temperature `β̂`.
pub fn target_errors(gap: f64, beta: f64, beta_hat: f64) -> Result<ErrorPair> {
    check_gap(gap)?;
    Ok(ErrorPair {
        f1: logistic(-beta_hat * gap),
        f2: logistic(beta * gap),
    })
}

/// `ln Σ e^{x_k}`, ignoring `−∞` terms.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().filter(|x| *x > f64::NEG_INFINITY).collect();
    let Some(m) = xs.iter().copied().reduce(f64::max) else {
        return f64::NEG_INFINITY;
    };
    if m == f64::INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeymanPearson {
    pub f1_min: f64,
    pub ln_f1_min: f64,
    pub rule: DecisionRule,
}

/// Outcome masses given as logarithms; `cost` carries the constraint and
/// `gain` the objective.
struct LogItem {
    ln_cost: f64,
    ln_gain: f64,
}

/// Fractional knapsack: weights `w_k ∈ [0,1]` maximizing `Σ w·gain` with
/// `Σ w·cost = budget`. Returns the weights and `ln(1 − Σ w·gain)` taken
/// directly from the unselected tail.
fn knapsack(items: &[LogItem], budget: f64) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..items.len()).collect();
    let ratio = |k: usize| {
        let it = &items[k];
        if it.ln_cost == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            it.ln_gain - it.ln_cost
        }
    };
    order.sort_by(|&a, &b| ratio(b).total_cmp(&ratio(a)).then(a.cmp(&b)));
    let mut w = vec![0.0; items.len()];
    let mut spent = 0.0;
    let mut tail = Vec::new();
    for &k in &order {
        let cost = items[k].ln_cost.exp();
        if cost == 0.0 {
            w[k] = 1.0;
            continue;
        }
        let room = budget - spent;
        if room <= 0.0 {
            tail.push(items[k].ln_gain);
        } else if cost <= room {
            w[k] = 1.0;
            spent += cost;
        } else {
            let frac = room / cost;
            w[k] = frac;
            spent = budget;
            tail.push(items[k].ln_gain + (1.0 - frac).ln());
        }
    }
    (w, log_sum_exp(tail))
}

fn ln_or_neg_inf(x: f64) -> f64 {
    if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        x.ln()
    }
}

/// Smallest `F₁` among randomized rules with `F₂ = f2_target` exactly:
/// maximize `Σ w_i g_i` subject to `Σ w_i p_i = f2_target`.
pub fn neyman_pearson(p: &[f64], g: &[f64], f2_target: f64) -> Result<NeymanPearson> {
    if p.len() != g.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: g.len(),
        });
    }
    if !(0.0..=1.0).contains(&f2_target) {
        return Err(Error::OutOfUnitInterval {
            what: "target error of the second kind",
            value: f2_target,
        });
    }
    let items: Vec<LogItem> = p
        .iter()
        .zip(g)
        .map(|(&a, &b)| LogItem {
            ln_cost: ln_or_neg_inf(a),
            ln_gain: ln_or_neg_inf(b),
        })
        .collect();
    let (w1, ln_f1_min) = knapsack(&items, f2_target);
    Ok(NeymanPearson {
        f1_min: ln_f1_min.exp(),
        ln_f1_min,
        rule: DecisionRule { w1 },
    })
}

/// Inverse temperature `β̂` with `1/(1 + e^{β̂E}) = F₁`, from `ln F₁`.
pub fn beta_from_ln_error(ln_f1: f64, gap: f64) -> f64 {
    if ln_f1 == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    // ln(1 − F₁) via ln_1p keeps precision when F₁ is tiny
    let ln_rest = if ln_f1 < -0.7 {
        (-ln_f1.exp()).ln_1p()
    } else {
        (-ln_f1.exp_m1()).ln()
    };
    (ln_rest - ln_f1) / gap
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoolingTemperature {
    pub beta_hat: f64,
    /// `1/(kβ̂)`; zero when `β̂ = ∞`, negative for an inverted qubit.
    pub temperature: f64,
    pub f1_min: f64,
    pub ln_f1_min: f64,
    /// Probability of sending each resource state to the qubit's lower level.
    pub rule: DecisionRule,
}

/// Lowest temperature to which `o` cools a qubit of gap `E` that starts in
/// the environment state. The qubit must end with equilibrium image
/// `g̃ = (F₂, 1 − F₂)`, so the rule spends exactly `F₂` of the `g`-mass on
/// the lower level and the upper-level population `p̃₂` is what remains of
/// the `p`-mass.
pub fn lowest_temperature(
    o: &QuasiClassicalObject,
    gap: f64,
    units: &Units,
) -> Result<CoolingTemperature> {
    check_gap(gap)?;
    let f2 = target_errors(gap, o.beta(), o.beta())?.f2;
    let np = neyman_pearson(o.g(), o.p(), f2)?;
    let beta_hat = beta_from_ln_error(np.ln_f1_min, gap);
    Ok(CoolingTemperature {
        beta_hat,
        temperature: units.temperature(beta_hat),
        f1_min: np.f1_min,
        ln_f1_min: np.ln_f1_min,
        rule: np.rule,
    })
}

/// `ln k!` for `k = 0..=n`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(n + 1);
    t.push(0.0);
    let mut acc = 0.0;
    for k in 1..=n {
        acc += (k as f64).ln();
        t.push(acc);
    }
    t
}

/// All `r ∈ ℕ^l` with `Σ r = n`, in lexicographically descending order.
pub fn compositions(n: usize, l: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k);
            rec(left - k, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if l > 0 {
        rec(n, l, &mut Vec::with_capacity(l), &mut out);
    }
    out
}

/// Number of type classes `C(n + l − 1, l − 1)`.
pub fn type_class_count(n: usize, l: usize) -> u128 {
    if l == 0 {
        return 0;
    }
    binomial((n + l - 1) as u128, (l - 1) as u128)
}

/// `ln` of the total probability of type class `r` under `q`.
pub fn ln_class_probability(r: &[usize], q: &[f64], ln_fact: &[f64]) -> f64 {
    let n: usize = r.iter().sum();
    let mut s = ln_fact[n];
    for (&k, &x) in r.iter().zip(q) {
        if k == 0 {
            continue;
        }
        if x == 0.0 {
            return f64::NEG_INFINITY;
        }
        s += k as f64 * x.ln() - ln_fact[k];
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SequencePoint {
    pub n: usize,
    pub beta_hat: f64,
    pub temperature: f64,
    /// `n·k·T_n`.
    pub scaled: f64,
    pub ln_f1_min: f64,
}

/// Lowest temperatures `T_n` reachable with `n` copies of `o`, for
/// `n = 1..=n_max`, computed exactly over type classes.
pub fn temperature_sequence(
    o: &QuasiClassicalObject,
    gap: f64,
    n_max: usize,
    caps: &Caps,
    units: &Units,
) -> Result<Vec<SequencePoint>> {
    check_gap(gap)?;
    let needed = type_class_count(n_max, o.len());
    if needed > caps.enumeration {
        return Err(Error::EnumerationCapExceeded {
            needed,
            cap: caps.enumeration,
        });
    }
    let f2 = target_errors(gap, o.beta(), o.beta())?.f2;
    let ln_fact = ln_factorials(n_max);
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let items: Vec<LogItem> = compositions(n, o.len())
            .iter()
            .map(|r| LogItem {
                ln_cost: ln_class_probability(r, o.g(), &ln_fact),
                ln_gain: ln_class_probability(r, o.p(), &ln_fact),
            })
            .collect();
        let (_, ln_f1) = knapsack(&items, f2);
        let beta_hat = beta_from_ln_error(ln_f1, gap);
        let temperature = units.temperature(beta_hat);
        out.push(SequencePoint {
            n,
            beta_hat,
            temperature,
            scaled: n as f64 * units.boltzmann * temperature,
            ln_f1_min: ln_f1,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteinLimit {
    /// `S(g‖p)`, the decay rate of `F₁` with the number of copies.
    pub exponent: f64,
    /// `lim n·k·T_n = E/(k·S(g‖p))`.
    pub limit: f64,
    /// Some `p_i = 0`: the exponent is infinite and finite `n` may reach `T = 0`.
    pub degenerate: bool,
}

pub fn stein_exponent(o: &QuasiClassicalObject) -> f64 {
    kl_divergence(o.g(), o.p()).unwrap_or(f64::NAN)
}

pub fn stein_limit(o: &QuasiClassicalObject, gap: f64, units: &Units) -> Result<SteinLimit> {
    check_gap(gap)?;
    let exponent = stein_exponent(o);
    Ok(SteinLimit {
        exponent,
        limit: gap / (units.boltzmann * exponent),
        degenerate: exponent.is_infinite(),
    })
}

/// `ln Z(β) = ln Σ e^{−βE_i}`.
pub fn ln_partition(levels: &[f64], beta: f64) -> f64 {
    log_sum_exp(levels.iter().map(|e| -beta * e))
}

/// `S(g‖p)` for Gibbs vectors `p` at `β̃` and `g` at `β` on the same levels:
/// `ln Z(β̃) − ln Z(β) + ⟨E⟩_g (β̃ − β)`.
pub fn thermal_resource_kl(levels: &[f64], beta_tilde: f64, beta: f64) -> f64 {
    let lz = ln_partition(levels, beta);
    let mean: f64 = levels.iter().map(|e| e * (-beta * e - lz).exp()).sum();
    ln_partition(levels, beta_tilde) - lz + mean * (beta_tilde - beta)
}
