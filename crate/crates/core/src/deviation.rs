//! Maximal diagonal deviation from equilibrium and the relative inverse
//! temperatures hidden in an object.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::model::{Object, QuantumObject, QuasiClassicalObject, Qubit};
use crate::Caps;

/// Block eigenvalues at or below this count as zero (infinite deviation).
pub const ZERO_EIGENVALUE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationReport {
    pub value: f64,
    /// Pair of (spectral) indices attaining the maximum.
    pub witness: (usize, usize),
    pub finite: bool,
}

impl DeviationReport {
    fn from_extremes(hi: (usize, f64), lo: (usize, f64)) -> Self {
        let value = if lo.1 == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            (hi.1 - lo.1).max(0.0)
        };
        Self {
            value,
            witness: (hi.0, lo.0),
            finite: value.is_finite(),
        }
    }
}

fn extremes(pairs: impl Iterator<Item = (usize, f64, f64)>) -> ((usize, f64), (usize, f64)) {
    let mut hi = (0, f64::NEG_INFINITY);
    let mut lo = (0, f64::INFINITY);
    for (k, up, down) in pairs {
        if up > hi.1 {
            hi = (k, up);
        }
        if down < lo.1 {
            lo = (k, down);
        }
    }
    (hi, lo)
}

/// `D = max_{i,j} |ln p_i − ln p_j − ln g_i + ln g_j|`.
pub fn classical_deviation(o: &QuasiClassicalObject) -> DeviationReport {
    let (hi, lo) = extremes(o.p().iter().zip(o.g()).enumerate().map(|(k, (&p, &g))| {
        let u = if p == 0.0 {
            f64::NEG_INFINITY
        } else {
            p.ln() - g.ln()
        };
        (k, u, u)
    }));
    DeviationReport::from_extremes(hi, lo)
}

/// Spectral form: per equilibrium eigenspace, the largest and smallest
/// eigenvalue of the compressed state.
pub fn quantum_deviation(o: &QuantumObject) -> DeviationReport {
    let spec = o.spectral();
    let (hi, lo) = extremes((0..spec.len()).map(|k| {
        let (values, _) = hermitian_eigen(&spec.block(k, o.rho()));
        let ln_lambda = spec.eigenvalues[k].ln();
        let max = values[0];
        let min = *values.last().unwrap();
        let up = if max <= ZERO_EIGENVALUE {
            f64::NEG_INFINITY
        } else {
            max.ln() - ln_lambda
        };
        let down = if min <= ZERO_EIGENVALUE {
            f64::NEG_INFINITY
        } else {
            min.ln() - ln_lambda
        };
        (k, up, down)
    }));
    DeviationReport::from_extremes(hi, lo)
}

pub fn max_diag_deviation(o: &Object) -> DeviationReport {
    match o {
        Object::Classical(c) => classical_deviation(c),
        Object::Quantum(q) => quantum_deviation(q),
    }
}

/// `D(Q) = |ln(r/s) + βE|` for a diagonal qubit.
pub fn qubit_deviation(q: &Qubit) -> f64 {
    ((q.upper / q.lower).ln() + q.beta * q.gap).abs()
}

/// `β_{i,j} = (ln p_i − ln p_j)/(E_j − E_i)`. A single vanishing probability
/// yields a signed infinity.
pub fn relative_inverse_temperature(o: &QuasiClassicalObject, i: usize, j: usize) -> Result<f64> {
    let l = o.len();
    for index in [i, j] {
        if index >= l {
            return Err(Error::IndexOutOfRange { index, len: l });
        }
    }
    let (g, p) = (o.g(), o.p());
    // E_j − E_i straight from the equilibrium weights
    let de = (g[i].ln() - g[j].ln()) / o.beta();
    if de.abs() <= 1e-12 * (1.0 + (g[i].ln().abs() + g[j].ln().abs()) / o.beta().abs()) {
        return Err(Error::EqualEnergies(i, j));
    }
    match (p[i] == 0.0, p[j] == 0.0) {
        (true, true) => Err(Error::ZeroProbability(i)),
        _ => Ok((p[i].ln() - p[j].ln()) / de),
    }
}

pub fn complementary_beta(beta1: f64, beta: f64) -> f64 {
    2.0 * beta - beta1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitTemperatures {
    pub deviation: f64,
    /// Coldest reachable inverse temperature, `β + D/E`.
    pub beta_lower_limit: f64,
    /// Hottest reachable inverse temperature, `β − D/E`; negative means inversion.
    pub beta_upper_limit: f64,
}

pub fn limit_temperatures(o: &Object, gap: f64) -> Result<LimitTemperatures> {
    if gap <= 0.0 || !gap.is_finite() {
        return Err(Error::NonpositiveGap(gap));
    }
    let d = max_diag_deviation(o).value;
    let beta = o.beta();
    Ok(LimitTemperatures {
        deviation: d,
        beta_lower_limit: beta + d / gap,
        beta_upper_limit: beta - d / gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoolingVerdict {
    pub cool: bool,
    pub heat: bool,
    /// `D(O) ≤ D(Q)`: the resource adds nothing beyond the free environment.
    pub worthless: bool,
}

/// Whether `o`, helped by free equilibrium ancillas, can cool or heat `q`.
pub fn can_cool(o: &Object, q: &Qubit) -> CoolingVerdict {
    let d_o = max_diag_deviation(o).value;
    let d_q = qubit_deviation(q);
    if d_o > d_q {
        CoolingVerdict {
            cool: true,
            heat: true,
            worthless: false,
        }
    } else {
        CoolingVerdict {
            cool: q.is_hotter_than_environment(),
            heat: q.is_colder_than_environment(),
            worthless: true,
        }
    }
}

/// `v_{i,j} = ((1/β) ln(g_i/g_j), ln(p_i/p_j))`; the x-component equals `E_j − E_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationVector {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
}

impl DeviationVector {
    /// Slope `y/x`, the relative inverse temperature of the pair.
    pub fn relative_beta(&self) -> f64 {
        self.y / self.x
    }

    /// Signed projection onto the line `y = −x/β`, orthogonal to the
    /// equilibrium line `y = βx`.
    pub fn deviation_projection(&self, beta: f64) -> f64 {
        (self.y - beta * self.x) / (1.0 + beta * beta).sqrt()
    }
}

pub fn deviation_vectors(o: &QuasiClassicalObject) -> Result<Vec<DeviationVector>> {
    if let Some(k) = o.p().iter().position(|&x| x == 0.0) {
        return Err(Error::ZeroProbability(k));
    }
    let (p, g, beta) = (o.p(), o.g(), o.beta());
    let l = o.len();
    let mut out = Vec::with_capacity(l * l.saturating_sub(1));
    for i in 0..l {
        for j in 0..l {
            if i != j {
                out.push(DeviationVector {
                    i,
                    j,
                    x: (g[i].ln() - g[j].ln()) / beta,
                    y: p[i].ln() - p[j].ln(),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AchievableBetas {
    /// Distinct relative inverse temperatures at gap `E`, descending.
    pub values: Vec<f64>,
    /// Largest value (lowest relative temperature), if any sum matched.
    pub max: Option<f64>,
    /// Number of multisets scanned.
    pub scanned: u128,
}

pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for t in 0..k {
        acc = acc.saturating_mul(n - t) / (t + 1);
    }
    acc
}

/// Relative inverse temperatures of pairs of states in the `n`-fold
/// composition whose energy difference matches `gap` within `tol`, found as
/// slopes of sums of `n` deviation vectors (including the zero vector).
pub fn achievable_relative_betas(
    o: &QuasiClassicalObject,
    n: usize,
    gap: f64,
    tol: f64,
    caps: &Caps,
) -> Result<AchievableBetas> {
    if gap <= 0.0 || !gap.is_finite() {
        return Err(Error::NonpositiveGap(gap));
    }
    let mut vectors: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for v in deviation_vectors(o)? {
        if !vectors.iter().any(|&(x, y)| x == v.x && y == v.y) {
            vectors.push((v.x, v.y));
        }
    }
    let m = vectors.len() as u128;
    let needed = binomial(m + n as u128 - 1, n as u128);
    if needed > caps.enumeration {
        return Err(Error::EnumerationCapExceeded {
            needed,
            cap: caps.enumeration,
        });
    }
    let mut found = Vec::new();
    let mut scanned = 0u128;
    sum_multisets(&vectors, n, 0, (0.0, 0.0), &mut |(x, y)| {
        scanned += 1;
        if (x - gap).abs() <= tol {
            found.push(y / x);
        }
    });
    found.sort_by(|a, b| b.total_cmp(a));
    found.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    Ok(AchievableBetas {
        max: found.first().copied(),
        values: found,
        scanned,
    })
}

fn sum_multisets(
    vectors: &[(f64, f64)],
    remaining: usize,
    start: usize,
    acc: (f64, f64),
    visit: &mut impl FnMut((f64, f64)),
) {
    if remaining == 0 {
        visit(acc);
        return;
    }
    for k in start..vectors.len() {
        let (x, y) = vectors[k];
        sum_multisets(vectors, remaining - 1, k, (acc.0 + x, acc.1 + y), visit);
    }
}

/// `D(O^n)/n` for `n = 1..=n_max`.
pub fn deviation_rate(o: &Object, n_max: usize, caps: &Caps) -> Result<Vec<f64>> {
    let d = o.dim() as u128;
    let limit = match o {
        Object::Classical(_) => caps.enumeration,
        Object::Quantum(_) => caps.matrix_dim,
    };
    let needed = d.checked_pow(n_max as u32).unwrap_or(u128::MAX);
    if needed > limit {
        return Err(Error::EnumerationCapExceeded { needed, cap: limit });
    }
    let mut out = Vec::with_capacity(n_max);
    let mut power = o.clone();
    for n in 1..=n_max {
        if n > 1 {
            power = power.compose(o)?;
        }
        out.push(max_diag_deviation(&power).value / n as f64);
    }
    Ok(out)
}


#[cfg(test)]
mod properties {
    use super::*;
    use crate::conversion::apply_stochastic;
    use crate::strategies::{object, object_and_map};
    use proptest::prelude::*;

    fn d(o: &QuasiClassicalObject) -> f64 {
        max_diag_deviation(&o.clone().into()).value
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn deviation_never_grows((o, a) in object_and_map()) {
            let out = apply_stochastic(&a, &o).unwrap();
            prop_assert!(d(&out) <= d(&o) + 1e-9);
            let r: Vec<f64> = o.p().iter().zip(o.g()).map(|(a, b)| (a / b).ln()).collect();
            let direct = r.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - r.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert!((d(&o) - direct).abs() <= 1e-12);
        }

        #[test]
        fn relative_beta_is_symmetric_in_its_pair(o in object(3)) {
            for (i, j) in [(0, 1), (1, 2), (0, 2)] {
                if let (Ok(a), Ok(b)) = (relative_inverse_temperature(&o, i, j), relative_inverse_temperature(&o, j, i)) {
                    prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
                }
            }
        }
    }
}
