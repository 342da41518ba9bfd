//! Collective-spin operators and the LMG Hamiltonian in the maximal-`j`
//! Dicke basis.
//!
//! Basis index `i` corresponds to `m = -N/2 + i`, so index 0 is the
//! all-down state and index `N` the all-up state. The index therefore also
//! counts the number of up spins ("excitations").
//!
//! The Hamiltonian is the ferromagnetic LMG model
//!
//! ```text
//! H = -(2 lambda / N) (Jx^2 + gamma Jy^2) + 2 h Jz
//! ```
//!
//! with the constant `(lambda / 2)(1 + gamma)` that separates it from the
//! pairwise Pauli form dropped (see [`constant_shift`]).

mod brute;
mod isotropic;

pub use brute::{brute_force_hamiltonian, BRUTE_FORCE_MAX_SPINS};
pub use isotropic::{isotropic_energy, isotropic_gap};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::StateVector;

pub type CMatrix = DMatrix<Complex64>;

/// Physical parameters of one LMG Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmgParams {
    /// Number of spin-1/2 particles.
    pub n: usize,
    /// Spin-spin coupling strength.
    pub lambda: f64,
    /// Anisotropy, 0 (fully anisotropic) to 1 (isotropic).
    pub gamma: f64,
    /// Magnetic field strength.
    pub h: f64,
}

impl LmgParams {
    pub fn new(n: usize, lambda: f64, gamma: f64, h: f64) -> Result<Self> {
        let params = LmgParams { n, lambda, gamma, h };
        params.validate()?;
        Ok(params)
    }

    /// Anisotropic model with `lambda = 1`, the setting used for every
    /// published data set.
    pub fn anisotropic(n: usize, h: f64) -> Result<Self> {
        Self::new(n, 1.0, 0.0, h)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("n", "particle count must be at least 1"));
        }
        if !self.lambda.is_finite() {
            return Err(Error::param("lambda", "must be finite"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::param("gamma", format!("must lie in [0, 1], got {}", self.gamma)));
        }
        if !self.h.is_finite() {
            return Err(Error::param("h", "must be finite"));
        }
        Ok(())
    }

    /// Same model with a different field.
    pub fn with_field(&self, h: f64) -> Self {
        LmgParams { h, ..*self }
    }

    /// Hilbert-space dimension `N + 1` of the maximal-`j` sector.
    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn basis(&self) -> CollectiveSpinBasis {
        CollectiveSpinBasis::new(self.n)
    }
}

/// The `j = N/2` Dicke basis `|m>`, `m = -N/2, ..., N/2` in ascending order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CollectiveSpinBasis {
    n: usize,
}

impl CollectiveSpinBasis {
    pub fn new(n: usize) -> Self {
        CollectiveSpinBasis { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// Total angular momentum `j = N/2`.
    pub fn j(&self) -> f64 {
        self.n as f64 / 2.0
    }

    /// Magnetic quantum number of basis index `i`.
    pub fn m(&self, i: usize) -> f64 {
        i as f64 - self.j()
    }

    pub fn m_values(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m(i)).collect()
    }
}

/// Which Hilbert space an operator or state lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// Symmetric sector of `n` spins.
    Dicke { n: usize },
    /// Spin sector of `n` spins tensored with a Fock space of `fock_dim`
    /// levels, spin index major.
    Composite { n: usize, fock_dim: usize },
}

impl Basis {
    pub fn dim(&self) -> usize {
        match *self {
            Basis::Dicke { n } => n + 1,
            Basis::Composite { n, fock_dim } => (n + 1) * fock_dim,
        }
    }
}

impl From<CollectiveSpinBasis> for Basis {
    fn from(b: CollectiveSpinBasis) -> Self {
        Basis::Dicke { n: b.n }
    }
}

/// Entrywise Hermiticity tolerance, relative to `max(1, max |a_ij|)`.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Dense square operator tagged with its basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    basis: Basis,
    entries: CMatrix,
}

impl OperatorMatrix {
    pub fn new(basis: Basis, entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::param("entries", "operator matrix must be square"));
        }
        if entries.nrows() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: entries.nrows(),
            });
        }
        Ok(OperatorMatrix { basis, entries })
    }

    /// Build from a real matrix.
    pub fn from_real(basis: Basis, entries: &DMatrix<f64>) -> Result<Self> {
        Self::new(basis, entries.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    /// `max_ij |A_ij - conj(A_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    /// Fails with [`Error::NonHermitian`] when the defect exceeds
    /// [`HERMITICITY_TOL`] relative to the largest entry.
    pub fn ensure_hermitian(&self) -> Result<()> {
        let tolerance = HERMITICITY_TOL * self.max_abs().max(1.0);
        let deviation = self.hermiticity_defect();
        if deviation > tolerance {
            return Err(Error::NonHermitian { deviation, tolerance });
        }
        Ok(())
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix {
            basis: self.basis,
            entries: self.entries.adjoint(),
        }
    }

    /// `<psi|A|psi>`; the real part for Hermitian `A`.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        if psi.basis() != self.basis {
            return Err(Error::BasisMismatch(format!(
                "state in {:?}, operator in {:?}",
                psi.basis(),
                self.basis
            )));
        }
        let a = psi.amplitudes();
        Ok(a.dotc(&(&self.entries * a)).re)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n", "particle count must be at least 1"));
    }
    Ok(())
}

/// `J_z |m> = m |m>`.
pub fn build_jz(basis: &CollectiveSpinBasis) -> OperatorMatrix {
    let d = basis.dim();
    let mut a = CMatrix::zeros(d, d);
    for i in 0..d {
        a[(i, i)] = Complex64::new(basis.m(i), 0.0);
    }
    OperatorMatrix {
        basis: (*basis).into(),
        entries: a,
    }
}

/// `J_+ |m> = sqrt((j - m)(j + m + 1)) |m + 1>`.
pub fn build_jplus(basis: &CollectiveSpinBasis) -> OperatorMatrix {
    let d = basis.dim();
    let j = basis.j();
    let mut a = CMatrix::zeros(d, d);
    for i in 0..d.saturating_sub(1) {
        let m = basis.m(i);
        a[(i + 1, i)] = Complex64::new(((j - m) * (j + m + 1.0)).sqrt(), 0.0);
    }
    OperatorMatrix {
        basis: (*basis).into(),
        entries: a,
    }
}

/// `J_- = (J_+)^dagger`.
pub fn build_jminus(basis: &CollectiveSpinBasis) -> OperatorMatrix {
    build_jplus(basis).adjoint()
}

/// `J_x = (J_+ + J_-) / 2`.
pub fn build_jx(basis: &CollectiveSpinBasis) -> OperatorMatrix {
    let p = build_jplus(basis).entries;
    let entries = (&p + p.adjoint()) * Complex64::new(0.5, 0.0);
    OperatorMatrix {
        basis: (*basis).into(),
        entries,
    }
}

/// `J_y = (J_+ - J_-) / 2i`.
pub fn build_jy(basis: &CollectiveSpinBasis) -> OperatorMatrix {
    let p = build_jplus(basis).entries;
    let entries = (&p - p.adjoint()) * Complex64::new(0.0, -0.5);
    OperatorMatrix {
        basis: (*basis).into(),
        entries,
    }
}

/// Identity shift separating [`build_lmg_hamiltonian`] from the pairwise
/// Pauli form: `H_pauli = H_dicke + constant_shift * I` on the symmetric
/// sector.
pub fn constant_shift(params: &LmgParams) -> f64 {
    0.5 * params.lambda * (1.0 + params.gamma)
}

/// Real pentadiagonal LMG matrix on `spins` spins with interaction
/// prefactor `2 lambda / norm`.
pub(crate) fn lmg_matrix(params: &LmgParams, spins: usize, norm: f64) -> DMatrix<f64> {
    let n = spins as f64;
    let d = spins + 1;
    let diag_coeff = params.lambda * (1.0 + params.gamma) / (2.0 * norm);
    let band_coeff = params.lambda * (1.0 - params.gamma) / (2.0 * norm);
    let mut a = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        let m = i as f64 - n / 2.0;
        a[(i, i)] = 2.0 * m * params.h - diag_coeff * (n * (0.5 * n + 1.0) - 2.0 * m * m);
        if i + 2 < d && band_coeff != 0.0 {
            // <m+2| J_+^2 |m> = sqrt((A_+ + N)(A_+ - 1)), A_+ = N^2/4 - m^2 - 2m
            let a_plus = n * n / 4.0 - m * m - 2.0 * m;
            let v = -band_coeff * ((a_plus + n) * (a_plus - 1.0)).sqrt();
            a[(i + 2, i)] = v;
            a[(i, i + 2)] = v;
        }
    }
    a
}

/// LMG Hamiltonian of `params` in the Dicke basis.
///
/// Couples `m` only to `m` and `m +/- 2`; the band vanishes for
/// `gamma = 1`.
pub fn build_lmg_hamiltonian(params: &LmgParams) -> Result<OperatorMatrix> {
    params.validate()?;
    check_n(params.n)?;
    let a = lmg_matrix(params, params.n, params.n as f64);
    OperatorMatrix::from_real(Basis::Dicke { n: params.n }, &a)
}
