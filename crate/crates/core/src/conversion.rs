//! The conversion order on quasi-classical objects, relative entropies, free
//! energy and the Landauer bound.

pub mod simplex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{energies_from_equilibrium, QuasiClassicalObject};
use simplex::{phase_one, Field};

/// Column sums of a stochastic matrix may deviate from one by this much.
pub const STOCHASTIC_TOL: f64 = 1e-9;
/// Phase-1 objectives above this certify infeasibility.
pub const INFEASIBILITY_TOL: f64 = 1e-8;
/// Line searches stop once the bracket is this narrow.
pub const BISECTION_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

/// `S(a‖b) = Σ a_i ln(a_i/b_i)` with `0·ln(0/x) = 0` and `x·ln(x/0) = ∞`.
pub fn kl_divergence(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut s = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        if x == 0.0 {
            continue;
        }
        if y == 0.0 {
            return Ok(f64::INFINITY);
        }
        s += x * (x / y).ln();
    }
    Ok(s.max(0.0))
}

/// Shannon entropy in nats.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.ln())
        .sum::<f64>()
}

/// `F_g(p) = E_g(p) − S(p)/β`, energies read off `g` with ground energy 0.
pub fn free_energy(p: &[f64], g: &[f64], beta: f64) -> Result<f64> {
    if p.len() != g.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: g.len(),
        });
    }
    let e = energies_from_equilibrium(g, beta)?;
    let mean: f64 = p.iter().zip(&e).map(|(x, y)| x * y).sum();
    Ok(mean - entropy(p) / beta)
}

/// `F_g(p) − F_g(g)`, which equals `S(p‖g)/β`.
pub fn free_energy_excess(p: &[f64], g: &[f64], beta: f64) -> Result<f64> {
    let diff = free_energy(p, g, beta)? - free_energy(g, g, beta)?;
    debug_assert!({
        let kl = kl_divergence(p, g)? / beta;
        (diff - kl).abs() <= 1e-8 * (1.0 + kl.abs())
    });
    Ok(diff)
}

/// Column-stochastic `l̃ × l` matrix, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StochasticMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl StochasticMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: format!("{rows}x{cols} = {} entries", rows * cols),
                got: format!("{} entries", entries.len()),
            });
        }
        if let Some(index) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "stochastic matrix",
                index,
            });
        }
        if let Some(index) = entries.iter().position(|&x| x < 0.0) {
            return Err(Error::NegativeEntry {
                what: "stochastic matrix",
                index,
                value: entries[index],
            });
        }
        for j in 0..cols {
            let sum: f64 = (0..rows).map(|x| entries[x * cols + j]).sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NonNormalized {
                    what: "stochastic matrix column",
                    sum,
                });
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch {
                expected: format!("rows of length {cols}"),
                got: format!("row of length {}", bad.len()),
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let entries = (0..n * n)
            .map(|k| if k / n == k % n { 1.0 } else { 0.0 })
            .collect();
        Self {
            rows: n,
            cols: n,
            entries,
        }
    }

    /// Every column equal to `column`: forget the input, prepare `column`.
    pub fn constant(column: &[f64], cols: usize) -> Result<Self> {
        let rows = column.len();
        let entries = (0..rows * cols).map(|k| column[k / cols]).collect();
        Self::new(rows, cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, j: usize) -> f64 {
        self.entries[x * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .chunks(self.cols.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch {
                expected: format!("vector of length {}", self.cols),
                got: format!("length {}", v.len()),
            });
        }
        Ok((0..self.rows)
            .map(|x| (0..self.cols).map(|j| self.get(x, j) * v[j]).sum())
            .collect())
    }

    /// `self · first`: apply `first`, then `self`.
    pub fn after(&self, first: &Self) -> Result<Self> {
        if self.cols != first.rows {
            return Err(Error::ShapeMismatch {
                expected: format!("{} rows", self.cols),
                got: format!("{} rows", first.rows),
            });
        }
        let (r, c) = (self.rows, first.cols);
        let entries = (0..r * c)
            .map(|k| {
                let (x, j) = (k / c, k % c);
                (0..self.cols)
                    .map(|m| self.get(x, m) * first.get(m, j))
                    .sum()
            })
            .collect();
        Self::new(r, c, entries)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConversionWitness {
    pub feasible: bool,
    pub matrix: Option<StochasticMatrix>,
    /// Largest violation of `Ap = p̃`, `Ag = g̃` and the column sums.
    pub residual: f64,
    pub phase_one_objective: f64,
}

/// Output object `(Ap, Ag, β)`.
pub fn apply_stochastic(
    a: &StochasticMatrix,
    o: &QuasiClassicalObject,
) -> Result<QuasiClassicalObject> {
    let p = renormalize(a.apply(o.p())?);
    let g = renormalize(a.apply(o.g())?);
    QuasiClassicalObject::new(p, g, o.beta())
}

fn renormalize(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
    v
}

/// Constraint rows over the variables `a_{xj}` (index `x·l + j`): column
/// sums, then `Ap = p̃`, then `Ag = g̃`.
fn constraints<T: Field>(p: &[T], g: &[T], pt: &[T], gt: &[T]) -> (Vec<Vec<T>>, Vec<T>) {
    let (l, lt) = (p.len(), pt.len());
    let mut m = Vec::with_capacity(l + 2 * lt);
    let mut b = Vec::with_capacity(l + 2 * lt);
    for j in 0..l {
        let mut row = vec![T::zero(); l * lt];
        for x in 0..lt {
            row[x * l + j] = T::one();
        }
        m.push(row);
        b.push(T::one());
    }
    for (src, dst) in [(p, pt), (g, gt)] {
        for x in 0..lt {
            let mut row = vec![T::zero(); l * lt];
            for j in 0..l {
                row[x * l + j] = src[j].clone();
            }
            m.push(row);
            b.push(dst[x].clone());
        }
    }
    (m, b)
}

fn check_pair(o: &QuasiClassicalObject, target: &QuasiClassicalObject) -> Result<()> {
    crate::model::same_beta(o.beta(), target.beta())
}

fn witness_from(
    o: &QuasiClassicalObject,
    target: &QuasiClassicalObject,
    objective: f64,
    solution: Vec<f64>,
    infeasible: bool,
) -> Result<ConversionWitness> {
    if infeasible {
        return Ok(ConversionWitness {
            feasible: false,
            matrix: None,
            residual: objective,
            phase_one_objective: objective,
        });
    }
    let (l, lt) = (o.len(), target.len());
    let mut entries: Vec<f64> = solution.iter().map(|&x| x.max(0.0)).collect();
    // polish column sums so the witness is stochastic to machine precision
    for j in 0..l {
        let s: f64 = (0..lt).map(|x| entries[x * l + j]).sum();
        if s > 0.0 {
            (0..lt).for_each(|x| entries[x * l + j] /= s);
        }
    }
    let a = StochasticMatrix::new(lt, l, entries)?;
    let residual = witness_residual(&a, o, target)?;
    Ok(ConversionWitness {
        feasible: true,
        matrix: Some(a),
        residual,
        phase_one_objective: objective,
    })
}

/// Largest violation of `Ap = p̃` and `Ag = g̃`.
pub fn witness_residual(
    a: &StochasticMatrix,
    o: &QuasiClassicalObject,
    target: &QuasiClassicalObject,
) -> Result<f64> {
    let ap = a.apply(o.p())?;
    let ag = a.apply(o.g())?;
    if ap.len() != target.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} output levels", target.len()),
            got: format!("{}", ap.len()),
        });
    }
    Ok(ap
        .iter()
        .zip(target.p())
        .chain(ag.iter().zip(target.g()))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Decides `O ≥ Õ`: is there a stochastic `A` with `Ap = p̃` and `Ag = g̃`?
pub fn conversion_feasible(
    o: &QuasiClassicalObject,
    target: &QuasiClassicalObject,
) -> Result<ConversionWitness> {
    check_pair(o, target)?;
    let (m, b) = constraints(o.p(), o.g(), target.p(), target.g());
    let r = phase_one(&m, &b, MAX_PIVOTS)?;
    let infeasible = r.objective > INFEASIBILITY_TOL;
    witness_from(o, target, r.objective.max(0.0), r.solution, infeasible)
}

/// Exact rational version: inputs are converted exactly and renormalized in
/// rational arithmetic, so infeasibility is certified without tolerance.
pub fn conversion_feasible_exact(
    o: &QuasiClassicalObject,
    target: &QuasiClassicalObject,
) -> Result<ConversionWitness> {
    check_pair(o, target)?;
    let conv = |v: &[f64]| normalize_rational(v.iter().map(|&x| rational_from_f64(x)).collect());
    let (p, g, pt, gt) = (conv(o.p()), conv(o.g()), conv(target.p()), conv(target.g()));
    let r = feasible_rational(&p, &g, &pt, &gt)?;
    let objective = Field::to_f64(&r.objective);
    let solution = r.solution.iter().map(Field::to_f64).collect();
    witness_from(o, target, objective, solution, r.objective.is_positive())
}

/// Exact phase-1 solve on rational data; zero objective means feasible.
pub fn feasible_rational(
    p: &[BigRational],
    g: &[BigRational],
    pt: &[BigRational],
    gt: &[BigRational],
) -> Result<simplex::PhaseOne<BigRational>> {
    if p.len() != g.len() || pt.len() != gt.len() {
        return Err(Error::LengthMismatch {
            left: p.len().max(pt.len()),
            right: g.len().min(gt.len()),
        });
    }
    let (m, b) = constraints(p, g, pt, gt);
    phase_one(&m, &b, MAX_PIVOTS)
}

pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

fn normalize_rational(v: Vec<BigRational>) -> Vec<BigRational> {
    let s = v.iter().fold(BigRational::zero(), |a, x| a + x);
    if s.is_zero() || s.is_one() {
        return v;
    }
    v.into_iter().map(|x| x / s.clone()).collect()
}

/// Small rationals for tests and examples: `n/d`.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandauerReport {
    pub copies: u64,
    /// `n·S(p‖g)`.
    pub forward_total: f64,
    /// `S(p̃‖g̃)`.
    pub forward_required: f64,
    pub forward_ok: bool,
    /// `n·S(g‖p)`.
    pub backward_total: f64,
    /// `S(g̃‖p̃)`.
    pub backward_required: f64,
    pub backward_ok: bool,
    /// Smallest `n` passing the forward check, if any.
    pub min_copies_forward: Option<u64>,
    /// The target needs an infinite backward divergence that a full-support
    /// resource never provides.
    pub impossible_for_all_n: bool,
}

/// The perfectly initialized bit: `p̃ = (0,1)`, `g̃ = (1/2,1/2)`.
pub fn erasure_target(beta: f64) -> Result<QuasiClassicalObject> {
    QuasiClassicalObject::new(vec![0.0, 1.0], vec![0.5, 0.5], beta)
}

/// Necessary conditions for `O^{⊗n} ≥ Õ` from monotonicity of both relative entropies.
pub fn landauer_audit(
    o: &QuasiClassicalObject,
    n: u64,
    target: &QuasiClassicalObject,
) -> Result<LandauerReport> {
    let fwd = kl_divergence(o.p(), o.g())?;
    let bwd = kl_divergence(o.g(), o.p())?;
    let fwd_req = kl_divergence(target.p(), target.g())?;
    let bwd_req = kl_divergence(target.g(), target.p())?;
    let forward_total = n as f64 * fwd;
    let backward_total = if n == 0 { 0.0 } else { n as f64 * bwd };
    let min_copies_forward = min_copies(fwd, fwd_req);
    Ok(LandauerReport {
        copies: n,
        forward_total,
        forward_required: fwd_req,
        forward_ok: forward_total >= fwd_req,
        backward_total,
        backward_required: bwd_req,
        backward_ok: backward_total >= bwd_req,
        min_copies_forward,
        impossible_for_all_n: bwd_req.is_infinite() && bwd.is_finite(),
    })
}

fn min_copies(per_copy: f64, required: f64) -> Option<u64> {
    if required <= 0.0 {
        return Some(0);
    }
    if per_copy.is_infinite() {
        return Some(1);
    }
    if per_copy <= 0.0 || required.is_infinite() {
        return None;
    }
    let mut n = (required / per_copy).ceil().max(1.0) as u64;
    while (n as f64) * per_copy < required {
        n += 1;
    }
    while n > 1 && ((n - 1) as f64) * per_copy >= required {
        n -= 1;
    }
    Some(n)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundtripReport {
    /// `p₂` of the original object.
    pub original: f64,
    /// Largest `p̃₂` reachable on the intermediate system.
    pub forward_max: f64,
    /// Largest `p₂′` recovered on the original system.
    pub recovered: f64,
    pub loss: f64,
    pub lossless: bool,
}

/// Largest upper-level probability `t ∈ [lo, 1]` for which `feasible(t)` holds,
/// assuming the feasible set is an interval containing `lo`.
pub fn bisect_max(lo: f64, mut feasible: impl FnMut(f64) -> Result<bool>) -> Result<f64> {
    if feasible(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (lo, 1.0);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Transfer the excitation of a 2-level object to a system with equilibrium
/// `g̃` and back, each time as far up as the conversion order allows.
pub fn roundtrip_loss(o: &QuasiClassicalObject, g_tilde: &[f64]) -> Result<RoundtripReport> {
    if o.len() != 2 {
        return Err(Error::ShapeMismatch {
            expected: "2-level object".into(),
            got: format!("{} levels", o.len()),
        });
    }
    let beta = o.beta();
    let mid_eq = QuasiClassicalObject::equilibrium(g_tilde.to_vec(), beta)?;
    let reachable = |from: &QuasiClassicalObject, g: &[f64], t: f64| -> Result<bool> {
        let target = QuasiClassicalObject::new(vec![1.0 - t, t], g.to_vec(), beta)?;
        Ok(conversion_feasible(from, &target)?.feasible)
    };
    let forward_max = bisect_max(mid_eq.g()[1], |t| reachable(o, g_tilde, t))?;
    let mid =
        QuasiClassicalObject::new(vec![1.0 - forward_max, forward_max], g_tilde.to_vec(), beta)?;
    let recovered = bisect_max(o.g()[1], |t| reachable(&mid, o.g(), t))?;
    let original = o.p()[1];
    let loss = original - recovered;
    Ok(RoundtripReport {
        original,
        forward_max,
        recovered,
        loss,
        lossless: loss <= 10.0 * BISECTION_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deviation::classical_deviation;
    use crate::model::make_object;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kl_cases() {
        assert_eq!(kl_divergence(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            kl_divergence(&[0.5, 0.5], &[0.9, 0.1]).unwrap(),
            0.5 * (0.5f64 / 0.9).ln() + 0.5 * 5f64.ln(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            kl_divergence(&[0.5, 0.5], &[0.9, 0.1]).unwrap(),
            0.5108256237659907,
            epsilon = 1e-12
        );
        assert_eq!(
            kl_divergence(&[0.5, 0.5], &[1.0, 0.0]).unwrap(),
            f64::INFINITY
        );
        assert_eq!(kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap(), 2f64.ln());
        assert!(matches!(
            kl_divergence(&[1.0], &[0.5, 0.5]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn free_energy_cases() {
        let g = [0.6, 0.3, 0.1];
        assert_abs_diff_eq!(
            free_energy_excess(&g, &g, 1.4).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            free_energy_excess(&[1.0, 0.0], &[0.5, 0.5], 1.0).unwrap(),
            2f64.ln(),
            epsilon = 1e-14
        );
        let p = [0.2, 0.2, 0.6];
        assert_abs_diff_eq!(
            free_energy_excess(&p, &g, 0.7).unwrap(),
            kl_divergence(&p, &g).unwrap() / 0.7,
            epsilon = 1e-12
        );
        assert_eq!(
            free_energy(&[0.5, 0.5], &[1.0, 0.0], 1.0),
            Err(Error::ZeroEquilibriumEntry { index: 1 })
        );
    }

    #[test]
    fn stochastic_matrix_validation() {
        assert!(StochasticMatrix::new(2, 2, vec![0.5, 0.5, 0.5, 0.5]).is_ok());
        assert!(matches!(
            StochasticMatrix::new(2, 2, vec![0.5, 0.5, 0.6, 0.5]),
            Err(Error::NonNormalized { .. })
        ));
        assert!(matches!(
            StochasticMatrix::new(2, 2, vec![1.5, 0.5, -0.5, 0.5]),
            Err(Error::NegativeEntry { .. })
        ));
        assert!(matches!(
            StochasticMatrix::new(2, 2, vec![1.0]),
            Err(Error::ShapeMismatch { .. })
        ));
        let a = StochasticMatrix::from_rows(&[vec![0.3, 1.0, 0.0], vec![0.7, 0.0, 1.0]]).unwrap();
        assert_eq!((a.rows(), a.cols()), (2, 3));
        let b = StochasticMatrix::from_rows(&[vec![0.1, 0.5], vec![0.9, 0.5]]).unwrap();
        let ba = b.after(&a).unwrap();
        assert_eq!((ba.rows(), ba.cols()), (2, 3));
        assert_abs_diff_eq!(ba.get(0, 0), 0.1 * 0.3 + 0.5 * 0.7, epsilon = 1e-15);
    }

    #[test]
    fn apply_cases() {
        let o = make_object(vec![0.7, 0.2, 0.1], vec![0.5, 0.3, 0.2], 1.0).unwrap();
        let same = apply_stochastic(&StochasticMatrix::identity(3), &o).unwrap();
        for (a, b) in same.p().iter().zip(o.p()).chain(same.g().iter().zip(o.g())) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        let gt = [0.6, 0.4];
        let r = apply_stochastic(&StochasticMatrix::constant(&gt, 3).unwrap(), &o).unwrap();
        assert_abs_diff_eq!(r.p()[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(r.g()[1], 0.4, epsilon = 1e-15);
        assert!(matches!(
            apply_stochastic(&StochasticMatrix::identity(2), &o),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn reflexive_and_equilibrium_worthless() {
        let o = make_object(vec![0.7, 0.2, 0.1], vec![0.5, 0.3, 0.2], 1.0).unwrap();
        let w = conversion_feasible(&o, &o).unwrap();
        assert!(w.feasible && w.residual <= 1e-8);
        let eq = QuasiClassicalObject::equilibrium(vec![0.5, 0.3, 0.2], 1.0).unwrap();
        let target = make_object(vec![0.9, 0.1], vec![0.5, 0.5], 1.0).unwrap();
        assert!(!conversion_feasible(&eq, &target).unwrap().feasible);
        assert!(!conversion_feasible_exact(&eq, &target).unwrap().feasible);
    }

    #[test]
    fn two_level_degradation_is_feasible() {
        let o = make_object(vec![0.9, 0.1], vec![0.5, 0.5], 1.0).unwrap();
        let t = make_object(vec![0.8, 0.2], vec![0.5, 0.5], 1.0).unwrap();
        for w in [
            conversion_feasible(&o, &t).unwrap(),
            conversion_feasible_exact(&o, &t).unwrap(),
        ] {
            assert!(w.feasible);
            assert!(w.residual <= 1e-8);
        }
        // 2×2 stochastic matrices are [[a, b], [1−a, 1−b]]; g uniform forces a + b = 1
        // and then 0.9a + 0.1(1 − a) = 0.8 gives a = 7/8
        let a = StochasticMatrix::from_rows(&[vec![0.875, 0.125], vec![0.125, 0.875]]).unwrap();
        assert!(witness_residual(&a, &o, &t).unwrap() < 1e-15);
        let back = conversion_feasible(&t, &o).unwrap();
        assert!(!back.feasible);
    }

    #[test]
    fn beta_mismatch_rejected() {
        let o = make_object(vec![0.9, 0.1], vec![0.5, 0.5], 1.0).unwrap();
        let t = make_object(vec![0.9, 0.1], vec![0.5, 0.5], 2.0).unwrap();
        assert!(matches!(
            conversion_feasible(&o, &t),
            Err(Error::BetaMismatch(..))
        ));
    }

    #[test]
    fn landauer_cases() {
        let target = erasure_target(1.0).unwrap();
        let pure = make_object(vec![1.0, 0.0], vec![0.5, 0.5], 1.0).unwrap();
        let r = landauer_audit(&pure, 1, &target).unwrap();
        assert!(r.forward_ok && r.backward_ok && !r.impossible_for_all_n);
        assert_eq!(r.min_copies_forward, Some(1));

        let o = make_object(vec![0.9, 0.1], vec![0.5, 0.5], 1.0).unwrap();
        let r = landauer_audit(&o, 1, &target).unwrap();
        assert!(!r.forward_ok && !r.backward_ok && r.impossible_for_all_n);
        assert_eq!(r.min_copies_forward, Some(2));
        assert!(landauer_audit(&o, 2, &target).unwrap().forward_ok);
        assert!(!landauer_audit(&o, 1000, &target).unwrap().backward_ok);
    }

    #[test]
    fn roundtrip_identical_systems_is_lossless() {
        let g = vec![0.7, 0.3];
        let o = make_object(vec![0.2, 0.8], g.clone(), 1.0).unwrap();
        let r = roundtrip_loss(&o, &g).unwrap();
        assert!(r.lossless, "{r:?}");
        assert_abs_diff_eq!(r.forward_max, 0.8, epsilon = 1e-8);
    }

    #[test]
    fn roundtrip_equilibrium_stays_put() {
        let g = vec![0.7, 0.3];
        let o = QuasiClassicalObject::equilibrium(g, 1.0).unwrap();
        let r = roundtrip_loss(&o, &[0.6, 0.4]).unwrap();
        assert_abs_diff_eq!(r.forward_max, 0.4, epsilon = 1e-8);
        assert_abs_diff_eq!(r.recovered, 0.3, epsilon = 1e-8);
    }

    #[test]
    fn roundtrip_mismatched_systems_lose() {
        let o = make_object(vec![0.2, 0.8], vec![0.7, 0.3], 1.0).unwrap();
        let r = roundtrip_loss(&o, &[0.6, 0.4]).unwrap();
        assert!(r.recovered < r.original - 1e-6, "{r:?}");
        assert!(!r.lossless);
    }

    #[test]
    fn deviation_monotone_on_witness() {
        let o = make_object(vec![0.6, 0.3, 0.1], vec![0.4, 0.35, 0.25], 1.0).unwrap();
        let t = make_object(vec![0.5, 0.5], vec![0.45, 0.55], 1.0).unwrap();
        let w = conversion_feasible(&o, &t).unwrap();
        if w.feasible {
            let out = apply_stochastic(w.matrix.as_ref().unwrap(), &o).unwrap();
            assert!(classical_deviation(&o).value >= classical_deviation(&out).value - 1e-9);
        }
    }
}
