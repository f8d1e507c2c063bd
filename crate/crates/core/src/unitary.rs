//! Energy-conserving unitaries on resource ⊗ qubit: the swap cooling step,
//! energy shells, the optimality criterion and optimal shell sorting.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigen, max_abs, CMatrix, SpectralDecomposition};
use crate::model::{Object, QuasiClassicalObject, Qubit};
use crate::Caps;

/// Relative tolerance for matching energies.
pub const ENERGY_TOL: f64 = 1e-9;
const UNITARY_TOL: f64 = 1e-10;

fn energies_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= ENERGY_TOL * (1.0 + a.abs().max(b.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwapStep {
    pub qubit: Qubit,
    /// Change of the lower-level probability; positive means cooling.
    pub delta: f64,
    /// Change of the upper-level probability, `−delta`.
    pub upper_change: f64,
}

/// Exchange `|i⟩⊗|0⟩ ↔ |j⟩⊗|1⟩`, energy conserving when `E_i − E_j` is the qubit gap.
pub fn swap_cooling_step(
    o: &QuasiClassicalObject,
    q: &Qubit,
    i: usize,
    j: usize,
) -> Result<SwapStep> {
    let l = o.len();
    for index in [i, j] {
        if index >= l {
            return Err(Error::IndexOutOfRange { index, len: l });
        }
    }
    let e = o.energies();
    let actual = e[i] - e[j];
    if !energies_match(actual, q.gap) {
        return Err(Error::GapMismatch {
            i,
            j,
            actual,
            gap: q.gap,
        });
    }
    let (p, s, r) = (o.p(), q.lower, q.upper);
    let delta = p[j] * r - p[i] * s;
    let lower = (s + delta).clamp(0.0, 1.0);
    Ok(SwapStep {
        qubit: Qubit::new(lower, 1.0 - lower, q.gap, q.beta)?,
        delta,
        upper_change: -delta,
    })
}

/// One eigenspace of the joint equilibrium, split by the qubit level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyShell {
    pub energy: f64,
    /// Joint indices `2k + b` with qubit level `b = 0`.
    pub lower: Vec<usize>,
    /// Joint indices with qubit level `b = 1`.
    pub upper: Vec<usize>,
}

/// Shells of resource levels `energies` combined with a qubit of gap `gap`,
/// ordered by energy. Joint index `2k + b` is resource level `k`, qubit level `b`.
pub fn energy_shells(energies: &[f64], gap: f64) -> Vec<EnergyShell> {
    let mut joint: Vec<(f64, usize)> = (0..2 * energies.len())
        .map(|idx| (energies[idx / 2] + (idx % 2) as f64 * gap, idx))
        .collect();
    joint.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut shells: Vec<EnergyShell> = Vec::new();
    for (energy, idx) in joint {
        let fresh = match shells.last() {
            Some(s) => !energies_match(s.energy, energy),
            None => true,
        };
        if fresh {
            shells.push(EnergyShell {
                energy,
                lower: Vec::new(),
                upper: Vec::new(),
            });
        }
        let s = shells.last_mut().unwrap();
        if idx % 2 == 0 {
            s.lower.push(idx);
        } else {
            s.upper.push(idx);
        }
    }
    for s in &mut shells {
        s.lower.sort_unstable();
        s.upper.sort_unstable();
    }
    shells
}

/// Diagonal `1 ⊗ σ_z` on `l` resource levels, `+1` on qubit level 0.
pub fn qubit_axis(l: usize) -> CMatrix {
    CMatrix::from_fn(2 * l, 2 * l, |a, b| {
        if a != b {
            c(0.0, 0.0)
        } else if a % 2 == 0 {
            c(1.0, 0.0)
        } else {
            c(-1.0, 0.0)
        }
    })
}

/// Sector eigenvalues of `alpha` inside one shell: `(Γ⁺, Γ⁻, commutator residual)`.
fn shell_sectors(alpha: &CMatrix, basis: &CMatrix, axis: &CMatrix) -> (Vec<f64>, Vec<f64>, f64) {
    let a = basis.adjoint() * alpha * basis;
    let z = basis.adjoint() * axis * basis;
    let residual = max_abs(&(&a * &z - &z * &a));
    let (zvals, w) = hermitian_eigen(&z);
    let pick = |positive: bool| -> Vec<f64> {
        let cols: Vec<DVector<Complex64>> = zvals
            .iter()
            .enumerate()
            .filter(|(_, v)| (**v > 0.0) == positive)
            .map(|(k, _)| w.column(k).into_owned())
            .collect();
        if cols.is_empty() {
            return Vec::new();
        }
        let v = CMatrix::from_columns(&cols);
        hermitian_eigen(&(v.adjoint() * &a * v)).0
    };
    (pick(true), pick(false), residual)
}

/// Both conditions for `alpha` to be unimprovable by shell-preserving
/// unitaries: every compressed block commutes with the qubit axis, and in
/// each shell the `+1` sector eigenvalues dominate the `−1` sector ones.
pub fn optimality_check(
    alpha: &CMatrix,
    gamma_sigma: &SpectralDecomposition,
    axis: &CMatrix,
) -> Result<bool> {
    let n = alpha.nrows();
    if alpha.ncols() != n || gamma_sigma.dim() != n || axis.nrows() != n || axis.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "state {}x{}, shells on {}, axis {}x{}",
            n,
            alpha.ncols(),
            gamma_sigma.dim(),
            axis.nrows(),
            axis.ncols()
        )));
    }
    for basis in &gamma_sigma.bases {
        let (plus, minus, residual) = shell_sectors(alpha, basis, axis);
        if residual > 1e-10 {
            return Ok(false);
        }
        if let (Some(lo), Some(hi)) = (plus.last(), minus.first()) {
            if *lo < *hi - 1e-10 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShellSort {
    pub before: Qubit,
    pub after: Qubit,
    /// `permutation[new] = old` over joint indices `2k + b`.
    pub permutation: Vec<usize>,
    /// Joint weights after sorting.
    pub joint: Vec<f64>,
}

/// Within each energy shell, move the largest joint weights onto the qubit's
/// lower level; stable in the original index.
pub fn optimal_shell_sort(o: &Object, q: &Qubit, caps: &Caps) -> Result<ShellSort> {
    let o = o.to_classical()?;
    crate::model::same_beta(o.beta(), q.beta)?;
    let needed = 2 * o.len() as u128;
    if needed > caps.matrix_dim {
        return Err(Error::EnumerationCapExceeded {
            needed,
            cap: caps.matrix_dim,
        });
    }
    let weights: Vec<f64> = (0..2 * o.len())
        .map(|idx| o.p()[idx / 2] * if idx % 2 == 0 { q.lower } else { q.upper })
        .collect();
    let mut permutation: Vec<usize> = (0..weights.len()).collect();
    for shell in energy_shells(&o.energies(), q.gap) {
        let mut slots = shell.lower.clone();
        slots.extend(&shell.upper);
        let mut olds = slots.clone();
        olds.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
        for (slot, old) in slots.into_iter().zip(olds) {
            permutation[slot] = old;
        }
    }
    let joint: Vec<f64> = permutation.iter().map(|&old| weights[old]).collect();
    let lower: f64 = joint.iter().step_by(2).sum();
    Ok(ShellSort {
        before: *q,
        after: Qubit::new(
            lower.clamp(0.0, 1.0),
            1.0 - lower.clamp(0.0, 1.0),
            q.gap,
            q.beta,
        )?,
        permutation,
        joint,
    })
}

fn unitarity_defect(u: &CMatrix) -> f64 {
    max_abs(&(u.adjoint() * u - CMatrix::identity(u.nrows(), u.ncols())))
}

/// `tr(A u B u*) − tr(A B)` for descending diagonal `A` and `B = diag(−1,…,−1,1,…,1)`.
pub fn kuehnlein_gap(a: &[f64], b: &[f64], u: &CMatrix) -> Result<f64> {
    let n = a.len();
    if b.len() != n || u.nrows() != n || u.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "A has {n} entries, B {}, u is {}x{}",
            b.len(),
            u.nrows(),
            u.ncols()
        )));
    }
    if a.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::NotSorted);
    }
    let flips = b.iter().take_while(|&&x| x == -1.0).count();
    if b[flips..].iter().any(|&x| x != 1.0) {
        return Err(Error::BadSignPattern);
    }
    let defect = unitarity_defect(u);
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    // tr(A u B u*) = Σ_{i,k} a_i b_k |u_ik|²
    let rotated: f64 = (0..n)
        .map(|i| a[i] * (0..n).map(|k| b[k] * u[(i, k)].norm_sqr()).sum::<f64>())
        .sum();
    let plain: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok(rotated - plain)
}

/// Haar-distributed unitary: Gram-Schmidt on columns of independent
/// standard complex normal entries.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let mut cols: Vec<DVector<Complex64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v = DVector::from_fn(dim, |_, _| {
            c(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            )
        });
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v / c(norm, 0.0));
        }
    }
    if dim == 0 {
        return CMatrix::zeros(0, 0);
    }
    CMatrix::from_columns(&cols)
}

/// Block-diagonal unitary with an independent Haar block on each spectral
/// subspace: a random transformation that commutes with the decomposed matrix.
pub fn random_allowed_unitary<R: Rng + ?Sized>(
    shells: &SpectralDecomposition,
    rng: &mut R,
) -> CMatrix {
    let n = shells.dim();
    shells.bases.iter().fold(CMatrix::zeros(n, n), |acc, v| {
        let h = haar_unitary(v.ncols(), rng);
        acc + v * h * v.adjoint()
    })
}

/// Whether some energy difference of `levels` matches one of `levels_t`.
pub fn gap_compatibility(levels: &[f64], levels_t: &[f64], tol: f64) -> bool {
    let diffs = |v: &[f64]| -> Vec<f64> {
        let mut d = Vec::new();
        for (i, a) in v.iter().enumerate() {
            for (j, b) in v.iter().enumerate() {
                if i != j {
                    d.push(a - b);
                }
            }
        }
        d
    };
    let (d1, d2) = (diffs(levels), diffs(levels_t));
    d1.iter().any(|a| d2.iter().any(|b| (a - b).abs() <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, kron};
    use crate::model::{gibbs_distribution, make_object};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_level(p_upper: f64, gap: f64, beta: f64) -> QuasiClassicalObject {
        make_object(
            vec![1.0 - p_upper, p_upper],
            gibbs_distribution(&[0.0, gap], beta),
            beta,
        )
        .unwrap()
    }

    /// Joint weights permuted by swapping the two entries, as a full permutation.
    fn permuted_lower(o: &QuasiClassicalObject, q: &Qubit, i: usize, j: usize) -> f64 {
        let mut w: Vec<f64> = (0..2 * o.len())
            .map(|idx| o.p()[idx / 2] * if idx % 2 == 0 { q.lower } else { q.upper })
            .collect();
        w.swap(2 * i, 2 * j + 1);
        w.iter().step_by(2).sum()
    }

    #[test]
    fn swap_at_equilibrium_is_fixed_point() {
        let o = QuasiClassicalObject::thermal(&[0.0, 1.0], 1.0, 1.0).unwrap();
        let q = Qubit::equilibrium(1.0, 1.0).unwrap();
        let step = swap_cooling_step(&o, &q, 1, 0).unwrap();
        assert_abs_diff_eq!(step.delta, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn colder_pair_cools() {
        let o = QuasiClassicalObject::thermal(&[0.0, 1.0], 2.5, 1.0).unwrap();
        let q = Qubit::equilibrium(1.0, 1.0).unwrap();
        let step = swap_cooling_step(&o, &q, 1, 0).unwrap();
        assert!(step.upper_change < 0.0);
        assert!(step.qubit.upper < q.upper);
        assert!(matches!(
            swap_cooling_step(&o, &q, 0, 1),
            Err(Error::GapMismatch { .. })
        ));
    }

    #[test]
    fn swap_formula_matches_permutation() {
        let gap = 0.8;
        let g = gibbs_distribution(&[0.0, gap, 2.0 * gap], 1.0);
        let o = make_object(vec![0.4, 0.5, 0.1], g, 1.0).unwrap();
        let q = Qubit::new(0.731, 0.269, gap, 1.0).unwrap();
        for (i, j) in [(1, 0), (2, 1)] {
            let step = swap_cooling_step(&o, &q, i, j).unwrap();
            assert_abs_diff_eq!(
                q.lower + step.delta,
                permuted_lower(&o, &q, i, j),
                epsilon = 1e-12
            );
        }
        let step = swap_cooling_step(&o, &q, 1, 0).unwrap();
        assert_abs_diff_eq!(step.delta, 0.4 * 0.269 - 0.5 * 0.731, epsilon = 1e-15);
    }

    #[test]
    fn shells_partition_joint_space() {
        let shells = energy_shells(&[0.0, 1.0, 2.0], 1.0);
        let energies: Vec<f64> = shells.iter().map(|s| s.energy).collect();
        assert_eq!(energies, vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(
            (shells[1].lower.clone(), shells[1].upper.clone()),
            (vec![2], vec![1])
        );
        let mut all: Vec<usize> = shells
            .iter()
            .flat_map(|s| s.lower.iter().chain(&s.upper).copied())
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..6).collect::<Vec<_>>());
    }

    fn joint_equilibrium(g: &[f64], gap: f64, beta: f64) -> CMatrix {
        kron(&diag(g), &diag(&gibbs_distribution(&[0.0, gap], beta)))
    }

    #[test]
    fn equilibrium_product_is_optimal() {
        let g = gibbs_distribution(&[0.0, 1.0, 2.0], 0.9);
        let gs = joint_equilibrium(&g, 1.0, 0.9);
        let spec = SpectralDecomposition::of(&gs);
        assert!(optimality_check(&gs, &spec, &qubit_axis(3)).unwrap());
    }

    #[test]
    fn misordered_shell_fails_and_swap_improves() {
        let beta = 1.0;
        let o = two_level(0.05, 1.0, beta);
        let q = Qubit::equilibrium(1.0, beta).unwrap();
        let alpha = kron(&diag(o.p()), &diag(&[q.lower, q.upper]));
        let spec = SpectralDecomposition::of(&joint_equilibrium(o.g(), 1.0, beta));
        assert!(!optimality_check(&alpha, &spec, &qubit_axis(2)).unwrap());
        let step = swap_cooling_step(&o, &q, 1, 0).unwrap();
        assert!(step.delta > 0.0);
    }

    #[test]
    fn sorted_output_is_optimal() {
        let beta = 0.7;
        let g = gibbs_distribution(&[0.0, 0.5, 1.0, 1.5], beta);
        let o: Object = make_object(vec![0.1, 0.2, 0.3, 0.4], g.clone(), beta)
            .unwrap()
            .into();
        let q = Qubit::equilibrium(0.5, beta).unwrap();
        let sorted = optimal_shell_sort(&o, &q, &Caps::default()).unwrap();
        let alpha = diag(&sorted.joint);
        let spec = SpectralDecomposition::of(&joint_equilibrium(&g, 0.5, beta));
        assert!(optimality_check(&alpha, &spec, &qubit_axis(4)).unwrap());
        assert!(sorted.after.lower > q.lower);
    }

    #[test]
    fn equilibrium_sort_is_identity() {
        let o: Object = QuasiClassicalObject::thermal(&[0.0, 1.0, 2.0], 1.0, 1.0)
            .unwrap()
            .into();
        let q = Qubit::equilibrium(1.0, 1.0).unwrap();
        let s = optimal_shell_sort(&o, &q, &Caps::default()).unwrap();
        assert_abs_diff_eq!(s.after.lower, q.lower, epsilon = 1e-12);
    }

    #[test]
    fn kuehnlein_cases() {
        let id = CMatrix::identity(2, 2);
        assert_eq!(kuehnlein_gap(&[2.0, 1.0], &[-1.0, 1.0], &id).unwrap(), 0.0);
        let swap =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_abs_diff_eq!(
            kuehnlein_gap(&[2.0, 1.0], &[-1.0, 1.0], &swap).unwrap(),
            2.0,
            epsilon = 1e-15
        );
        assert_eq!(
            kuehnlein_gap(&[1.0, 2.0], &[-1.0, 1.0], &id),
            Err(Error::NotSorted)
        );
        assert_eq!(
            kuehnlein_gap(&[2.0, 1.0], &[1.0, -1.0], &id),
            Err(Error::BadSignPattern)
        );
        let bad = id.scale(2.0);
        assert!(matches!(
            kuehnlein_gap(&[2.0, 1.0], &[-1.0, 1.0], &bad),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn haar_is_unitary_and_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 1..=6 {
            let u = haar_unitary(dim, &mut rng);
            assert!(unitarity_defect(&u) < 1e-12);
        }
        let a = haar_unitary(3, &mut ChaCha8Rng::seed_from_u64(1));
        let b = haar_unitary(3, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
    }

    #[test]
    fn allowed_unitaries_commute_with_shells() {
        let gs = joint_equilibrium(&gibbs_distribution(&[0.0, 1.0, 2.0], 1.0), 1.0, 1.0);
        let spec = SpectralDecomposition::of(&gs);
        let u = random_allowed_unitary(&spec, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(unitarity_defect(&u) < 1e-12);
        assert!(max_abs(&(&u * &gs - &gs * &u)) < 1e-12);
    }

    #[test]
    fn gap_compatibility_cases() {
        assert!(gap_compatibility(&[0.0, 1.0], &[0.0, 1.0], 1e-9));
        assert!(!gap_compatibility(&[0.0, 1.0], &[0.0, 2f64.sqrt()], 1e-9));
        assert!(!gap_compatibility(&[0.0, 1.0, 2.0], &[0.0, 3.0], 1e-9));
        assert!(gap_compatibility(&[0.0, 1.0, 3.0], &[0.0, 2.0], 1e-9));
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use crate::model::gibbs_distribution;
    use crate::strategies::dist;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn swaps_conserve_energy(p in dist(3), gap in 0.3f64..1.5, beta_q in -1.0f64..3.0) {
            let levels = [0.0, gap, 2.0 * gap];
            let o = QuasiClassicalObject::new(p, gibbs_distribution(&levels, 1.0), 1.0).unwrap();
            let q = Qubit::thermal(gap, beta_q, 1.0).unwrap();
            for (i, j) in [(1, 0), (2, 1)] {
                let step = swap_cooling_step(&o, &q, i, j).unwrap();
                let mut joint: Vec<(f64, f64)> = Vec::new();
                for (k, e) in levels.iter().enumerate() {
                    joint.push((*e, o.p()[k] * q.lower));
                    joint.push((e + gap, o.p()[k] * q.upper));
                }
                let before: f64 = joint.iter().map(|(e, w)| e * w).sum();
                prop_assert!((joint[2 * i].0 - joint[2 * j + 1].0).abs() <= 1e-12);
                let (a, b) = (joint[2 * i].1, joint[2 * j + 1].1);
                joint[2 * i].1 = b;
                joint[2 * j + 1].1 = a;
                let after: f64 = joint.iter().map(|(e, w)| e * w).sum();
                prop_assert!((before - after).abs() <= 1e-12);
                let lower: f64 = joint.iter().step_by(2).map(|(_, w)| w).sum();
                prop_assert!((lower - step.qubit.lower).abs() <= 1e-12);
            }
        }

        #[test]
        fn shell_sort_dominates_swaps(p in dist(4), gap in 0.3f64..1.5, beta_q in -1.0f64..3.0) {
            let levels = [0.0, gap, 2.0 * gap, 3.0 * gap];
            let o = QuasiClassicalObject::new(p, gibbs_distribution(&levels, 1.0), 1.0).unwrap();
            let q = Qubit::thermal(gap, beta_q, 1.0).unwrap();
            let sorted = optimal_shell_sort(&Object::from(o.clone()), &q, &Caps::default()).unwrap();
            prop_assert!(sorted.after.lower >= q.lower - 1e-12);
            for i in 1..4 {
                let step = swap_cooling_step(&o, &q, i, i - 1).unwrap();
                prop_assert!(sorted.after.lower >= step.qubit.lower - 1e-12);
            }
        }
    }
}
