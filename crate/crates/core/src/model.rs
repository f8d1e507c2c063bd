//! Objects: an actual state paired with the equilibrium state of the same
//! system at a shared reference inverse temperature.
//!
//! The equilibrium state stands in for the Hamiltonian. For a fixed finite,
//! nonzero β the two determine each other up to a constant energy shift, which
//! is fixed here by putting the lowest level at zero.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, Side, SpectralDecomposition};

/// Tolerance on the normalization of probability vectors.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Tolerance on trace, hermiticity and positivity of density matrices.
pub const DENSITY_TOL: f64 = 1e-10;

/// Scale between inverse temperature and reported temperature, `T = 1/(k β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Units {
    pub boltzmann: f64,
}

impl Default for Units {
    fn default() -> Self {
        Self { boltzmann: 1.0 }
    }
}

impl Units {
    pub fn temperature(&self, beta: f64) -> f64 {
        1.0 / (self.boltzmann * beta)
    }

    pub fn inverse_temperature(&self, temperature: f64) -> f64 {
        1.0 / (self.boltzmann * temperature)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::ZeroBeta);
    }
    Ok(())
}

fn check_probability_vector(v: &[f64], what: &'static str) -> Result<()> {
    for (index, &x) in v.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite { what, index });
        }
        if x < 0.0 {
            return Err(Error::NegativeEntry {
                what,
                index,
                value: x,
            });
        }
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NonNormalized { what, sum });
    }
    Ok(())
}

pub(crate) fn same_beta(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
        return Err(Error::BetaMismatch(a, b));
    }
    Ok(())
}

/// Tensor product of two probability vectors, left index major.
pub fn tensor(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

/// Gibbs weights `e^{-β E_i} / Z`, evaluated with a shifted exponent.
pub fn gibbs_distribution(levels: &[f64], beta: f64) -> Vec<f64> {
    let shift = levels
        .iter()
        .map(|&e| -beta * e)
        .fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = levels.iter().map(|&e| (-beta * e - shift).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Energies implied by an equilibrium vector: `E_i = -ln(g_i)/β`, shifted so
/// the lowest level sits at zero.
pub fn energies_from_equilibrium(g: &[f64], beta: f64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    if let Some(index) = g.iter().position(|&x| x <= 0.0 || !x.is_finite()) {
        return Err(Error::ZeroEquilibriumEntry { index });
    }
    let raw: Vec<f64> = g.iter().map(|&x| -x.ln() / beta).collect();
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(raw.into_iter().map(|e| e - min).collect())
}

/// Diagonal actual state `p` with equilibrium `g`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiClassicalObject {
    p: Vec<f64>,
    g: Vec<f64>,
    beta: f64,
    zero_support: bool,
}

/// Validates and builds a quasi-classical object.
pub fn make_object(p: Vec<f64>, g: Vec<f64>, beta: f64) -> Result<QuasiClassicalObject> {
    QuasiClassicalObject::new(p, g, beta)
}

impl QuasiClassicalObject {
    pub fn new(p: Vec<f64>, g: Vec<f64>, beta: f64) -> Result<Self> {
        if p.len() != g.len() {
            return Err(Error::LengthMismatch {
                left: p.len(),
                right: g.len(),
            });
        }
        check_beta(beta)?;
        check_probability_vector(&p, "p")?;
        check_probability_vector(&g, "g")?;
        if let Some(index) = g.iter().position(|&x| x == 0.0) {
            return Err(Error::ZeroEquilibriumEntry { index });
        }
        let zero_support = p.contains(&0.0);
        Ok(Self {
            p,
            g,
            beta,
            zero_support,
        })
    }

    /// The equilibrium object `(g, g)`.
    pub fn equilibrium(g: Vec<f64>, beta: f64) -> Result<Self> {
        Self::new(g.clone(), g, beta)
    }

    /// Thermal object for the given levels: actual state at `beta_actual`,
    /// equilibrium at `beta`.
    pub fn thermal(levels: &[f64], beta_actual: f64, beta: f64) -> Result<Self> {
        Self::new(
            gibbs_distribution(levels, beta_actual),
            gibbs_distribution(levels, beta),
            beta,
        )
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Some `p_i` is exactly zero.
    pub fn has_zero_support(&self) -> bool {
        self.zero_support
    }

    pub fn energies(&self) -> Vec<f64> {
        energies_from_equilibrium(&self.g, self.beta).expect("validated at construction")
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        same_beta(self.beta, other.beta)?;
        Ok(Self {
            p: tensor(&self.p, &other.p),
            g: tensor(&self.g, &other.g),
            beta: self.beta,
            zero_support: self.zero_support || other.zero_support,
        })
    }

    /// `n`-fold composition with itself; `n = 0` gives the trivial one-level object.
    pub fn power(&self, n: usize) -> Self {
        let mut out = Self {
            p: vec![1.0],
            g: vec![1.0],
            beta: self.beta,
            zero_support: false,
        };
        for _ in 0..n {
            out = out.compose(self).expect("same beta");
        }
        out
    }

    /// Exchanges the roles of actual and equilibrium state. Fails when `p`
    /// lacks full support.
    pub fn swapped(&self) -> Result<Self> {
        Self::new(self.g.clone(), self.p.clone(), self.beta)
    }

    pub fn is_equilibrium(&self, tol: f64) -> bool {
        self.p
            .iter()
            .zip(&self.g)
            .all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Density matrix `rho` with equilibrium density matrix `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumObject {
    rho: CMatrix,
    gamma: CMatrix,
    beta: f64,
}

impl QuantumObject {
    pub fn new(rho: CMatrix, gamma: CMatrix, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        if rho.shape() != gamma.shape() {
            return Err(Error::ShapeMismatch {
                expected: format!("{:?}", gamma.shape()),
                got: format!("{:?}", rho.shape()),
            });
        }
        linalg::validate_density(&rho, "rho", DENSITY_TOL)?;
        linalg::validate_density(&gamma, "gamma", DENSITY_TOL)?;
        let (values, _) = linalg::hermitian_eigen(&gamma);
        if let Some(index) = values.iter().position(|&v| v <= 0.0) {
            return Err(Error::ZeroEquilibriumEntry { index });
        }
        Ok(Self { rho, gamma, beta })
    }

    pub fn from_classical(o: &QuasiClassicalObject) -> Self {
        Self {
            rho: linalg::diag(o.p()),
            gamma: linalg::diag(o.g()),
            beta: o.beta(),
        }
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn gamma(&self) -> &CMatrix {
        &self.gamma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn spectral(&self) -> SpectralDecomposition {
        SpectralDecomposition::of(&self.gamma)
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        same_beta(self.beta, other.beta)?;
        Ok(Self {
            rho: linalg::kron(&self.rho, &other.rho),
            gamma: linalg::kron(&self.gamma, &other.gamma),
            beta: self.beta,
        })
    }

    pub fn power(&self, n: usize) -> Self {
        let mut out = Self {
            rho: CMatrix::identity(1, 1),
            gamma: CMatrix::identity(1, 1),
            beta: self.beta,
        };
        for _ in 0..n {
            out = out.compose(self).expect("same beta");
        }
        out
    }

    /// Max-entry norm of `[rho, gamma]`.
    pub fn commutator_residual(&self) -> f64 {
        linalg::max_abs(&linalg::commutator(&self.rho, &self.gamma))
    }

    /// Basis diagonalizing `gamma` (and the time-averaged state).
    pub fn eigenbasis(&self) -> CMatrix {
        let avg = self.spectral().pinch(&self.rho);
        linalg::common_eigenbasis(&self.gamma, &avg)
    }

    /// Quasi-classical object of the time-averaged state in a joint eigenbasis.
    pub fn quasi_classical_reduction(&self) -> Result<QuasiClassicalObject> {
        let avg = time_average(self);
        let basis = linalg::common_eigenbasis(&avg.gamma, &avg.rho);
        quasi_classical_projection(&avg, &basis)
    }
}

/// Either kind of object.
#[derive(Debug, Clone, PartialEq)]
pub enum Object {
    Classical(QuasiClassicalObject),
    Quantum(QuantumObject),
}

impl Object {
    pub fn beta(&self) -> f64 {
        match self {
            Object::Classical(o) => o.beta(),
            Object::Quantum(o) => o.beta(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Object::Classical(o) => o.len(),
            Object::Quantum(o) => o.dim(),
        }
    }

    pub fn to_quantum(&self) -> QuantumObject {
        match self {
            Object::Classical(o) => QuantumObject::from_classical(o),
            Object::Quantum(o) => o.clone(),
        }
    }

    /// Quasi-classical form. Quantum objects must commute with their
    /// equilibrium state.
    pub fn to_classical(&self) -> Result<QuasiClassicalObject> {
        match self {
            Object::Classical(o) => Ok(o.clone()),
            Object::Quantum(o) => {
                let residual = o.commutator_residual();
                if residual > DENSITY_TOL {
                    return Err(Error::NotCommuting(residual));
                }
                o.quasi_classical_reduction()
            }
        }
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (Object::Classical(a), Object::Classical(b)) => Ok(Object::Classical(a.compose(b)?)),
            _ => Ok(Object::Quantum(
                self.to_quantum().compose(&other.to_quantum())?,
            )),
        }
    }

    pub fn power(&self, n: usize) -> Self {
        match self {
            Object::Classical(o) => Object::Classical(o.power(n)),
            Object::Quantum(o) => Object::Quantum(o.power(n)),
        }
    }
}

impl From<QuasiClassicalObject> for Object {
    fn from(o: QuasiClassicalObject) -> Self {
        Object::Classical(o)
    }
}

impl From<QuantumObject> for Object {
    fn from(o: QuantumObject) -> Self {
        Object::Quantum(o)
    }
}

pub fn compose(a: &Object, b: &Object) -> Result<Object> {
    a.compose(b)
}

/// Marginal of a bipartite object whose equilibrium state is a product
/// `gamma_l ⊗ gamma_r` of the declared factor dimensions.
pub fn restrict(joint: &QuantumObject, dims: (usize, usize), side: Side) -> Result<QuantumObject> {
    let (dl, dr) = dims;
    let rho = linalg::partial_trace(&joint.rho, dl, dr, side)?;
    let gl = linalg::partial_trace(&joint.gamma, dl, dr, Side::Left)?;
    let gr = linalg::partial_trace(&joint.gamma, dl, dr, Side::Right)?;
    if linalg::max_abs(&(linalg::kron(&gl, &gr) - &joint.gamma)) > DENSITY_TOL {
        return Err(Error::BadFactorization {
            left: dl,
            right: dr,
            joint: joint.dim(),
        });
    }
    let gamma = match side {
        Side::Left => gl,
        Side::Right => gr,
    };
    Ok(QuantumObject {
        rho,
        gamma,
        beta: joint.beta,
    })
}

/// Time average `Σ_j P_j rho P_j` over the spectral projections of `gamma`.
pub fn time_average(o: &QuantumObject) -> QuantumObject {
    let rho = o.spectral().pinch(&o.rho);
    QuantumObject {
        rho,
        gamma: o.gamma.clone(),
        beta: o.beta,
    }
}

/// Diagonals of `rho` and `gamma` in a basis (columns of `basis`) that
/// diagonalizes `gamma`.
pub fn quasi_classical_projection(
    o: &QuantumObject,
    basis: &CMatrix,
) -> Result<QuasiClassicalObject> {
    let n = o.dim();
    if basis.shape() != (n, n) {
        return Err(Error::ShapeMismatch {
            expected: format!("({n}, {n})"),
            got: format!("{:?}", basis.shape()),
        });
    }
    let unitarity = linalg::max_abs(&(basis.adjoint() * basis - CMatrix::identity(n, n)));
    if unitarity > DENSITY_TOL {
        return Err(Error::NotUnitary(unitarity));
    }
    let g_b = basis.adjoint() * &o.gamma * basis;
    let off = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| g_b[(i, j)].norm())
        .fold(0.0, f64::max);
    if off > DENSITY_TOL {
        return Err(Error::BasisDoesNotDiagonalize { residual: off });
    }
    let rho_b = basis.adjoint() * &o.rho * basis;
    let clean = |x: f64| if x < 0.0 && x > -DENSITY_TOL { 0.0 } else { x };
    let p: Vec<f64> = (0..n).map(|i| clean(rho_b[(i, i)].re)).collect();
    let g: Vec<f64> = (0..n).map(|i| g_b[(i, i)].re).collect();
    QuasiClassicalObject::new(renormalize(p), renormalize(g), o.beta)
}

fn renormalize(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// Two-level system with lower/upper occupations `(s, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Qubit {
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub beta: f64,
}

impl Qubit {
    pub fn new(lower: f64, upper: f64, gap: f64, beta: f64) -> Result<Self> {
        if gap <= 0.0 || !gap.is_finite() {
            return Err(Error::NonpositiveGap(gap));
        }
        check_beta(beta)?;
        check_probability_vector(&[lower, upper], "qubit occupation")?;
        Ok(Self {
            lower,
            upper,
            gap,
            beta,
        })
    }

    /// Diagonal qubit at inverse temperature `beta_qubit`, environment at `beta`.
    pub fn thermal(gap: f64, beta_qubit: f64, beta: f64) -> Result<Self> {
        let w = gibbs_distribution(&[0.0, gap], beta_qubit);
        Self::new(w[0], w[1], gap, beta)
    }

    pub fn equilibrium(gap: f64, beta: f64) -> Result<Self> {
        Self::thermal(gap, beta, beta)
    }

    /// `ln(s/r)/E`; infinite for a pure state.
    pub fn inverse_temperature(&self) -> f64 {
        (self.lower.ln() - self.upper.ln()) / self.gap
    }

    pub fn equilibrium_occupation(&self) -> [f64; 2] {
        let w = gibbs_distribution(&[0.0, self.gap], self.beta);
        [w[0], w[1]]
    }

    pub fn as_object(&self) -> QuasiClassicalObject {
        QuasiClassicalObject::new(
            vec![self.lower, self.upper],
            self.equilibrium_occupation().to_vec(),
            self.beta,
        )
        .expect("qubit invariants")
    }

    /// Hotter than the environment (more upper-level weight than equilibrium).
    pub fn is_hotter_than_environment(&self) -> bool {
        self.upper * self.equilibrium_occupation()[0]
            > self.lower * self.equilibrium_occupation()[1]
    }

    pub fn is_colder_than_environment(&self) -> bool {
        self.upper * self.equilibrium_occupation()[0]
            < self.lower * self.equilibrium_occupation()[1]
    }
}

/// Convenience for building complex matrices from row-major `[re, im]` pairs.
pub fn matrix_from_pairs(pairs: &[[f64; 2]]) -> Result<CMatrix> {
    let n = (pairs.len() as f64).sqrt().round() as usize;
    if n * n != pairs.len() || n == 0 {
        return Err(Error::ShapeMismatch {
            expected: "a square number of entries".into(),
            got: pairs.len().to_string(),
        });
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        let [re, im] = pairs[i * n + j];
        c(re, im)
    }))
}
