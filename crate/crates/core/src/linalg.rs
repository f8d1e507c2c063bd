//! Small dense complex linear algebra used by the quantum paths.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues closer than this are treated as one spectral cluster.
pub const CLUSTER_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn diag(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c(values[i], 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn hermitian_residual(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Eigenvalues (descending) and matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    // symmetrize so round-off in the input does not leak into the solver
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Checks positivity and unit trace of a density matrix.
pub fn validate_density(m: &CMatrix, what: &'static str, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotDensityMatrix {
            what,
            reason: format!("shape {}x{}", m.nrows(), m.ncols()),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NotDensityMatrix {
            what,
            reason: "non-finite entry".into(),
        });
    }
    let herm = hermitian_residual(m);
    if herm > tol {
        return Err(Error::NotDensityMatrix {
            what,
            reason: format!("not Hermitian (residual {herm:e})"),
        });
    }
    let tr = trace(m);
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::NotDensityMatrix {
            what,
            reason: format!("trace {tr} is not 1"),
        });
    }
    let (values, _) = hermitian_eigen(m);
    if let Some(min) = values.last() {
        if *min < -tol {
            return Err(Error::NotDensityMatrix {
                what,
                reason: format!("negative eigenvalue {min:e}"),
            });
        }
    }
    Ok(())
}

/// Spectral projections of a Hermitian matrix with eigenvalues clustered
/// within [`CLUSTER_TOL`], ordered by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projections: Vec<CMatrix>,
    /// Orthonormal basis of each projection's range, as columns.
    pub bases: Vec<CMatrix>,
}

impl SpectralDecomposition {
    pub fn of(m: &CMatrix) -> Self {
        Self::with_tolerance(m, CLUSTER_TOL)
    }

    pub fn with_tolerance(m: &CMatrix, tol: f64) -> Self {
        let n = m.nrows();
        let (values, vectors) = hermitian_eigen(m);
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for k in 0..n {
            match groups.last_mut() {
                Some(g) if values[*g.last().unwrap()] - values[k] <= tol => g.push(k),
                _ => groups.push(vec![k]),
            }
        }
        let mut eigenvalues = Vec::with_capacity(groups.len());
        let mut projections = Vec::with_capacity(groups.len());
        let mut bases = Vec::with_capacity(groups.len());
        for g in groups {
            let mean = g.iter().map(|&k| values[k]).sum::<f64>() / g.len() as f64;
            let basis = CMatrix::from_fn(n, g.len(), |i, j| vectors[(i, g[j])]);
            projections.push(&basis * basis.adjoint());
            bases.push(basis);
            eigenvalues.push(mean);
        }
        Self {
            eigenvalues,
            projections,
            bases,
        }
    }

    pub fn dim(&self) -> usize {
        self.projections.first().map_or(0, |p| p.nrows())
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Compression of `m` onto the range of cluster `k`, in that cluster's basis.
    pub fn block(&self, k: usize, m: &CMatrix) -> CMatrix {
        let v = &self.bases[k];
        v.adjoint() * m * v
    }

    /// Σ_k P_k m P_k.
    pub fn pinch(&self, m: &CMatrix) -> CMatrix {
        let n = m.nrows();
        self.projections
            .iter()
            .fold(CMatrix::zeros(n, n), |acc, p| acc + p * m * p)
    }
}

/// Which tensor factor a restriction keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Partial trace of a `(dl*dr)`-dimensional matrix, keeping `keep`.
pub fn partial_trace(m: &CMatrix, dl: usize, dr: usize, keep: Side) -> Result<CMatrix> {
    if dl * dr != m.nrows() || m.nrows() != m.ncols() || dl == 0 || dr == 0 {
        return Err(Error::BadFactorization {
            left: dl,
            right: dr,
            joint: m.nrows(),
        });
    }
    Ok(match keep {
        Side::Left => CMatrix::from_fn(dl, dl, |a, b| {
            (0..dr).map(|k| m[(a * dr + k, b * dr + k)]).sum()
        }),
        Side::Right => CMatrix::from_fn(dr, dr, |a, b| {
            (0..dl).map(|k| m[(k * dr + a, k * dr + b)]).sum()
        }),
    })
}

/// Orthonormal basis diagonalizing two commuting Hermitian matrices, found by
/// diagonalizing `b` inside each spectral cluster of `a`.
pub fn common_eigenbasis(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let spec = SpectralDecomposition::of(a);
    let mut columns: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(n);
    for k in 0..spec.len() {
        let block = spec.block(k, b);
        let (_, w) = hermitian_eigen(&block);
        let basis = &spec.bases[k] * w;
        for col in basis.column_iter() {
            columns.push(col.into_owned());
        }
    }
    CMatrix::from_columns(&columns)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_projections_resolve_identity() {
        let g = diag(&[0.4, 0.3, 0.3]);
        let spec = SpectralDecomposition::of(&g);
        assert_eq!(spec.len(), 2);
        let sum = spec
            .projections
            .iter()
            .fold(CMatrix::zeros(3, 3), |acc, p| acc + p);
        assert!(max_abs(&(sum - CMatrix::identity(3, 3))) < 1e-12);
        for (i, p) in spec.projections.iter().enumerate() {
            assert!(max_abs(&(p * p - p)) < 1e-12);
            assert!(hermitian_residual(p) < 1e-12);
            for q in spec.projections.iter().skip(i + 1) {
                assert!(max_abs(&(p * q)) < 1e-12);
            }
        }
        assert!((spec.eigenvalues[0] - 0.4).abs() < 1e-14);
    }

    #[test]
    fn partial_trace_rejects_bad_factors() {
        let m = CMatrix::identity(6, 6);
        assert!(matches!(
            partial_trace(&m, 4, 2, Side::Left),
            Err(Error::BadFactorization { .. })
        ));
    }

    #[test]
    fn density_validation() {
        assert!(validate_density(&diag(&[0.5, 0.5]), "rho", 1e-10).is_ok());
        assert!(validate_density(&diag(&[1.5, -0.5]), "rho", 1e-10).is_err());
        assert!(validate_density(&diag(&[0.5, 0.4]), "rho", 1e-10).is_err());
    }
}
