//! Hermitian eigendecomposition and exact time evolution in the eigenbasis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dicke::{Basis, CMatrix, OperatorMatrix};
use crate::error::{Error, Result};

pub type CVector = DVector<Complex64>;

/// Tolerance on `| |psi| - 1 |` for states handed in from outside.
pub const NORM_TOL: f64 = 1e-12;

/// Pure state in a tagged basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: Basis,
    amplitudes: CVector,
}

impl StateVector {
    /// Wraps `amplitudes`; fails unless they have unit norm.
    pub fn new(basis: Basis, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Invariant(format!("state norm {norm} is not 1")));
        }
        Ok(StateVector { basis, amplitudes })
    }

    /// Normalizes `amplitudes` first.
    pub fn normalized(basis: Basis, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::param("amplitudes", "cannot normalize a zero vector"));
        }
        Self::new(basis, amplitudes.unscale(norm))
    }

    /// The `index`-th basis vector.
    pub fn basis_state(basis: Basis, index: usize) -> Result<Self> {
        if index >= basis.dim() {
            return Err(Error::param(
                "index",
                format!("{index} outside dimension {}", basis.dim()),
            ));
        }
        let mut a = CVector::zeros(basis.dim());
        a[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { basis, amplitudes: a })
    }

    pub(crate) fn from_raw(basis: Basis, amplitudes: CVector) -> Self {
        StateVector { basis, amplitudes }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// Ascending eigenvalues and orthonormal eigenvectors (as columns) of a
/// Hermitian operator.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    basis: Basis,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    pub fn eigenvector(&self, k: usize) -> StateVector {
        StateVector::from_raw(self.basis, self.eigenvectors.column(k).into_owned())
    }

    /// Largest minus smallest eigenvalue.
    pub fn bandwidth(&self) -> f64 {
        self.eigenvalues[self.dim() - 1] - self.eigenvalues[0]
    }

    /// `eps_l - eps_0` for `l = 1..=levels` (fewer if the spectrum is short).
    pub fn gaps(&self, levels: usize) -> Vec<f64> {
        let e0 = self.eigenvalues[0];
        self.eigenvalues.iter().skip(1).take(levels).map(|e| e - e0).collect()
    }

    /// Expansion coefficients `<v_k|psi>`.
    pub fn coefficients(&self, psi: &StateVector) -> Result<CVector> {
        self.check_basis(psi)?;
        Ok(self.eigenvectors.ad_mul(psi.amplitudes()))
    }

    /// `sum_k mu_k |v_k><v_k|`.
    pub fn reconstruct(&self) -> CMatrix {
        let scaled = DMatrix::from_fn(self.dim(), self.dim(), |i, k| {
            self.eigenvectors[(i, k)] * self.eigenvalues[k]
        });
        scaled * self.eigenvectors.adjoint()
    }

    fn check_basis(&self, psi: &StateVector) -> Result<()> {
        if psi.basis() != self.basis {
            return Err(Error::BasisMismatch(format!(
                "state in {:?}, decomposition in {:?}",
                psi.basis(),
                self.basis
            )));
        }
        Ok(())
    }

    /// Prepares repeated evolution of `psi0`.
    pub fn propagator(&self, psi0: &StateVector) -> Result<Propagator<'_>> {
        Ok(Propagator {
            spec: self,
            coefficients: self.coefficients(psi0)?,
        })
    }
}

/// `psi0` expanded in an eigenbasis, ready to be evolved to any time.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    spec: &'a SpectralDecomposition,
    coefficients: CVector,
}

impl Propagator<'_> {
    pub fn coefficients(&self) -> &CVector {
        &self.coefficients
    }

    /// `sum_k exp(-i mu_k t) <v_k|psi0> |v_k>`.
    pub fn at(&self, t: f64) -> StateVector {
        if t == 0.0 {
            return StateVector::from_raw(self.spec.basis, self.spec.eigenvectors() * &self.coefficients);
        }
        let phased = CVector::from_iterator(
            self.coefficients.len(),
            self.coefficients
                .iter()
                .zip(&self.spec.eigenvalues)
                .map(|(c, &mu)| c * Complex64::from_polar(1.0, -mu * t)),
        );
        StateVector::from_raw(self.spec.basis, self.spec.eigenvectors() * phased)
    }
}

/// Groups indices into connected components of the off-diagonal sparsity
/// graph, each sorted, ordered by smallest member.
fn components(a: &CMatrix) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut label = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![start];
        let mut members = Vec::new();
        label[start] = id;
        while let Some(i) = stack.pop() {
            members.push(i);
            for j in 0..n {
                if label[j] == usize::MAX && (a[(i, j)] != Complex64::ZERO || a[(j, i)] != Complex64::ZERO) {
                    label[j] = id;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Rotates `v` so its largest-magnitude entry (first one, on ties) is real
/// and positive.
fn fix_gauge(v: &mut [Complex64]) {
    let max = v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-10)).unwrap_or(0);
    let phase = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
}

/// Full eigendecomposition of a Hermitian operator.
///
/// Disconnected blocks of the sparsity pattern (parity sectors of the LMG
/// model, conserved sectors of the composite model) are diagonalized
/// separately, so eigenvectors never mix symmetry sectors even when levels
/// are degenerate to machine precision. Eigenvalues come out ascending with
/// ties ordered by block, and each eigenvector is phase-fixed so its
/// largest component is real positive.
///
/// Non-Hermitian input is rejected rather than symmetrized, and so is
/// input with non-finite entries (e.g. parameters large enough to overflow).
pub fn diagonalize(op: &OperatorMatrix) -> Result<SpectralDecomposition> {
    let a = op.entries();
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Invariant("operator has non-finite entries".into()));
    }
    op.ensure_hermitian()?;
    let dim = op.dim();
    let real = op.is_real();
    let mut pairs: Vec<(f64, Vec<Complex64>)> = Vec::with_capacity(dim);
    for block in components(a) {
        let b = block.len();
        if real {
            let sub = DMatrix::<f64>::from_fn(b, b, |i, j| a[(block[i], block[j])].re);
            let eig = sub.symmetric_eigen();
            for k in 0..b {
                let mut v = vec![Complex64::ZERO; dim];
                for (i, &row) in block.iter().enumerate() {
                    v[row] = Complex64::new(eig.eigenvectors[(i, k)], 0.0);
                }
                pairs.push((eig.eigenvalues[k], v));
            }
        } else {
            let sub = CMatrix::from_fn(b, b, |i, j| a[(block[i], block[j])]);
            let eig = sub.symmetric_eigen();
            for k in 0..b {
                let mut v = vec![Complex64::ZERO; dim];
                for (i, &row) in block.iter().enumerate() {
                    v[row] = eig.eigenvectors[(i, k)];
                }
                pairs.push((eig.eigenvalues[k], v));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut eigenvectors = CMatrix::zeros(dim, dim);
    let mut eigenvalues = Vec::with_capacity(dim);
    for (k, (mu, mut v)) in pairs.into_iter().enumerate() {
        fix_gauge(&mut v);
        for (i, z) in v.into_iter().enumerate() {
            eigenvectors[(i, k)] = z;
        }
        eigenvalues.push(mu);
    }
    Ok(SpectralDecomposition {
        basis: op.basis(),
        eigenvalues,
        eigenvectors,
    })
}

/// `(eps_0, |eps_0>)`.
pub fn ground_state(spec: &SpectralDecomposition) -> (f64, StateVector) {
    (spec.eigenvalue(0), spec.eigenvector(0))
}

/// `exp(-i H t) |psi0>` with `hbar = 1`.
pub fn evolve(spec: &SpectralDecomposition, psi0: &StateVector, t: f64) -> Result<StateVector> {
    if t == 0.0 {
        spec.check_basis(psi0)?;
        return Ok(psi0.clone());
    }
    Ok(spec.propagator(psi0)?.at(t))
}
