//! Reduced states of `M`-spin subsystems, passive states and ergotropy.
//!
//! Basis index `i` counts up spins in both the full and the reduced Dicke
//! basis, so `|k>` of `N` spins splits as
//! `sum_q amp(N, M, k, q) |q>_M |k - q>_{N-M}`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::dicke::{lmg_matrix, Basis, CMatrix, LmgParams, OperatorMatrix};
use crate::error::{Error, Result};
use crate::quench::{argmax, Quench};
use crate::spectral::{diagonalize, SpectralDecomposition, StateVector};

/// Offset added to the work in [`efficiency_ratio`].
pub const RATIO_OFFSET: f64 = 1e-10;

/// Agreement required between the two ergotropy routes.
pub const ROUTE_TOL: f64 = 1e-9;

const FLUSH: f64 = 1e-300;

/// `sqrt(C(M,q) C(N-M,k-q) / C(N,k))`; zero outside the allowed range.
pub fn dicke_split_amplitude(n: usize, m: usize, k: usize, q: usize) -> f64 {
    if m > n || k > n || q > m || q > k || k - q > n - m {
        return 0.0;
    }
    let ln =
        ln_binomial(m as u64, q as u64) + ln_binomial((n - m) as u64, (k - q) as u64) - ln_binomial(n as u64, k as u64);
    let a = (0.5 * ln).exp();
    if a < FLUSH {
        0.0
    } else {
        a
    }
}

/// Density matrix of `m` spins in their Dicke basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    m: usize,
    entries: CMatrix,
}

impl ReducedDensityMatrix {
    /// Checks Hermiticity (1e-12), unit trace (1e-10) and positivity (1e-10).
    pub fn new(m: usize, entries: CMatrix) -> Result<Self> {
        if entries.nrows() != m + 1 || entries.ncols() != m + 1 {
            return Err(Error::DimensionMismatch {
                expected: m + 1,
                found: entries.nrows(),
            });
        }
        let rho = ReducedDensityMatrix { m, entries };
        rho.validate()?;
        Ok(rho)
    }

    /// `|psi><psi|`.
    pub fn pure(psi: &StateVector) -> Result<Self> {
        let Basis::Dicke { n } = psi.basis() else {
            return Err(Error::BasisMismatch("expected a Dicke-basis state".into()));
        };
        let a = psi.amplitudes();
        Ok(ReducedDensityMatrix {
            m: n,
            entries: a * a.adjoint(),
        })
    }

    pub(crate) fn from_raw(m: usize, entries: CMatrix) -> Self {
        ReducedDensityMatrix { m, entries }
    }

    pub fn validate(&self) -> Result<()> {
        self.operator()?;
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::Invariant(format!("density matrix trace {tr} is not 1")));
        }
        let min = self.min_eigenvalue()?;
        if min < -1e-10 {
            return Err(Error::Invariant(format!("density matrix has eigenvalue {min}")));
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m + 1
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    fn operator(&self) -> Result<OperatorMatrix> {
        OperatorMatrix::new(Basis::Dicke { n: self.m }, self.entries.clone())
    }

    /// Eigenvalues ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.operator()?;
        let mut ev: Vec<f64> = self.entries.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// `Tr[rho H]`.
    pub fn energy(&self, h: &SpectralDecomposition) -> Result<f64> {
        let p = self.populations(h)?;
        Ok(p.iter().zip(h.eigenvalues()).map(|(p, e)| p * e).sum())
    }

    /// Diagonal `<zeta_i|rho|zeta_i>` in the eigenbasis of `h`.
    pub fn populations(&self, h: &SpectralDecomposition) -> Result<Vec<f64>> {
        self.check(h)?;
        let z = h.eigenvectors();
        let rz = &self.entries * z;
        Ok((0..h.dim()).map(|i| z.column(i).dotc(&rz.column(i)).re).collect())
    }

    fn check(&self, h: &SpectralDecomposition) -> Result<()> {
        if h.basis() != (Basis::Dicke { n: self.m }) {
            return Err(Error::BasisMismatch(format!(
                "state of {} spins, Hamiltonian in {:?}",
                self.m,
                h.basis()
            )));
        }
        Ok(())
    }
}

/// Reduced state of the first `m` spins of the symmetric state `psi`.
pub fn reduce_symmetric_state(psi: &StateVector, m: usize) -> Result<ReducedDensityMatrix> {
    let Basis::Dicke { n } = psi.basis() else {
        return Err(Error::BasisMismatch("expected a Dicke-basis state".into()));
    };
    if m == 0 || m > n {
        return Err(Error::param(
            "m",
            format!("subsystem size must lie in 1..={n}, got {m}"),
        ));
    }
    if m == n {
        return ReducedDensityMatrix::pure(psi);
    }
    let c = psi.amplitudes();
    let rest = n - m;
    // A[q, r] = c_{q+r} amp(N, M, q+r, q); rho = A A^H.
    let a = CMatrix::from_fn(m + 1, rest + 1, |q, r| c[q + r] * dicke_split_amplitude(n, m, q + r, q));
    Ok(ReducedDensityMatrix::from_raw(m, &a * a.adjoint()))
}

/// Interaction prefactor used for the `M`-spin battery Hamiltonian.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsystemNormalization {
    /// `2/M`: the subsystem is an LMG battery of its own.
    #[default]
    Subsystem,
    /// `2/N`: keep the full system's coupling per pair.
    Full,
}

/// LMG Hamiltonian on `m` of the `params.n` spins.
pub fn subsystem_hamiltonian(params: &LmgParams, m: usize, norm: SubsystemNormalization) -> Result<OperatorMatrix> {
    params.validate()?;
    if m == 0 || m > params.n {
        return Err(Error::param(
            "m",
            format!("subsystem size must lie in 1..={}, got {m}", params.n),
        ));
    }
    let scale = match norm {
        SubsystemNormalization::Subsystem => m,
        SubsystemNormalization::Full => params.n,
    };
    OperatorMatrix::from_real(Basis::Dicke { n: m }, &lmg_matrix(params, m, scale as f64))
}

/// `sigma = sum_i eta_i |zeta_i><zeta_i|` with `eta` descending and `zeta`
/// ascending.
#[derive(Debug, Clone)]
pub struct PassiveState {
    populations: Vec<f64>,
    entries: CMatrix,
}

impl PassiveState {
    /// Eigenvalues of `rho` in descending order, as paired with the levels.
    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn to_density_matrix(&self, m: usize) -> ReducedDensityMatrix {
        ReducedDensityMatrix::from_raw(m, self.entries.clone())
    }

    /// `Tr[sigma H] = sum_i eta_i zeta_i`.
    pub fn energy(&self, h: &SpectralDecomposition) -> f64 {
        self.populations.iter().zip(h.eigenvalues()).map(|(p, e)| p * e).sum()
    }
}

/// Sorts populations descending; equal values keep their original order.
fn descending(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.iter().map(|&i| values[i]).collect()
}

pub fn passive_state(rho: &ReducedDensityMatrix, h: &SpectralDecomposition) -> Result<PassiveState> {
    rho.check(h)?;
    let populations = descending(&rho.eigenvalues()?);
    let z = h.eigenvectors();
    let scaled = DMatrix::from_fn(h.dim(), h.dim(), |i, k| z[(i, k)] * populations[k]);
    Ok(PassiveState {
        entries: scaled * z.adjoint(),
        populations,
    })
}

/// Ergotropy through both routes before clamping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgotropyRoutes {
    /// `Tr[rho H] - Tr[sigma H]` with `sigma` built as a matrix.
    pub via_passive_state: f64,
    /// `sum_i (p_i - eta_i) zeta_i`.
    pub via_populations: f64,
}

/// `Tr[A B]` without forming the product.
fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// Battery Hamiltonian kept both diagonalized and as a dense matrix, for
/// repeated ergotropy evaluations.
#[derive(Debug, Clone)]
pub struct BatteryHamiltonian {
    spectrum: SpectralDecomposition,
    matrix: CMatrix,
    scale: f64,
}

impl BatteryHamiltonian {
    pub fn new(spectrum: SpectralDecomposition) -> Self {
        let matrix = spectrum.reconstruct();
        let scale = spectrum.eigenvalues().iter().fold(1.0_f64, |a, e| a.max(e.abs()));
        BatteryHamiltonian {
            spectrum,
            matrix,
            scale,
        }
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    pub fn routes(&self, rho: &ReducedDensityMatrix) -> Result<ErgotropyRoutes> {
        let h = &self.spectrum;
        let sigma = passive_state(rho, h)?;
        let via_passive_state = trace_product(&rho.entries, &self.matrix) - trace_product(&sigma.entries, &self.matrix);
        let p = rho.populations(h)?;
        let via_populations = p
            .iter()
            .zip(sigma.populations())
            .zip(h.eigenvalues())
            .map(|((p, eta), zeta)| (p - eta) * zeta)
            .sum();
        Ok(ErgotropyRoutes {
            via_passive_state,
            via_populations,
        })
    }

    /// Both routes are evaluated and must agree within [`ROUTE_TOL`]
    /// (relative to the spectral scale); tiny negative results are clamped
    /// to 0.
    pub fn ergotropy(&self, rho: &ReducedDensityMatrix) -> Result<f64> {
        let r = self.routes(rho)?;
        if (r.via_passive_state - r.via_populations).abs() > ROUTE_TOL * self.scale {
            return Err(Error::Invariant(format!(
                "ergotropy routes disagree: {} vs {}",
                r.via_passive_state, r.via_populations
            )));
        }
        if r.via_populations < -1e-10 * self.scale {
            return Err(Error::Invariant(format!("negative ergotropy {}", r.via_populations)));
        }
        Ok(r.via_populations.max(0.0))
    }
}

pub fn ergotropy_routes(rho: &ReducedDensityMatrix, h: &SpectralDecomposition) -> Result<ErgotropyRoutes> {
    BatteryHamiltonian::new(h.clone()).routes(rho)
}

/// Maximum energy extractable from `rho` by a unitary, with respect to `h`.
pub fn ergotropy(rho: &ReducedDensityMatrix, h: &SpectralDecomposition) -> Result<f64> {
    BatteryHamiltonian::new(h.clone()).ergotropy(rho)
}

/// `Tr[rho_t H] - Tr[rho_0 H]`; may be negative.
pub fn subsystem_work(
    rho_t: &ReducedDensityMatrix,
    rho_0: &ReducedDensityMatrix,
    h: &SpectralDecomposition,
) -> Result<f64> {
    Ok(rho_t.energy(h)? - rho_0.energy(h)?)
}

/// `E / (W + 1e-10)`.
pub fn efficiency_ratio(ergotropy: f64, work: f64) -> f64 {
    ergotropy / (work + RATIO_OFFSET)
}

pub fn efficiency_ratio_series(ergotropy: &[f64], work: &[f64]) -> Vec<f64> {
    ergotropy
        .iter()
        .zip(work)
        .map(|(&e, &w)| efficiency_ratio(e, w))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgotropyReport {
    pub m: usize,
    pub times: Vec<f64>,
    pub ergotropy_series: Vec<f64>,
    pub subsystem_work_series: Vec<f64>,
    pub ratio_series: Vec<f64>,
    pub e_max: f64,
    pub t_e_max: f64,
    pub ratio_at_e_max: f64,
}

impl ErgotropyReport {
    pub fn from_series(m: usize, times: Vec<f64>, ergotropy: Vec<f64>, work: Vec<f64>) -> Self {
        let ratio_series = efficiency_ratio_series(&ergotropy, &work);
        let (e_max, t_e_max) = argmax(&times, &ergotropy);
        let at = times.iter().position(|&t| t == t_e_max).unwrap_or(0);
        ErgotropyReport {
            m,
            ratio_at_e_max: ratio_series[at],
            times,
            ergotropy_series: ergotropy,
            subsystem_work_series: work,
            ratio_series,
            e_max,
            t_e_max,
        }
    }
}

/// Ergotropy and work of the first `m` spins along a quench's time grid.
pub fn subsystem_report(quench: &Quench, m: usize, norm: SubsystemNormalization) -> Result<ErgotropyReport> {
    let battery = BatteryHamiltonian::new(diagonalize(&subsystem_hamiltonian(&quench.spec().initial, m, norm)?)?);
    let h = battery.spectrum();
    let rho_0 = reduce_symmetric_state(quench.initial_state(), m)?;
    let e0 = rho_0.energy(h)?;
    let rows: Vec<(f64, f64)> = quench
        .times()
        .par_iter()
        .map(|&t| {
            let rho = reduce_symmetric_state(&quench.state_at(t), m)?;
            Ok((battery.ergotropy(&rho)?, rho.energy(h)? - e0))
        })
        .collect::<Result<_>>()?;
    let (e, w) = rows.into_iter().unzip();
    Ok(ErgotropyReport::from_series(m, quench.times().to_vec(), e, w))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::quench::{uniform_time_grid, QuenchSpec};
    use crate::spectral::CVector;
    use num_complex::Complex64;
    use proptest::prelude::*;

    /// Partial trace over spins `m..n` of a symmetric state embedded into
    /// the full `2^n` space, projected back onto the `m`-spin Dicke basis.
    pub(crate) fn brute_force_reduce(c: &CVector, n: usize, m: usize) -> CMatrix {
        let binom = |a: usize, b: usize| ln_binomial(a as u64, b as u64).exp();
        let full: Vec<Complex64> = (0..1usize << n)
            .map(|s| {
                let k = s.count_ones() as usize;
                c[k] / binom(n, k).sqrt()
            })
            .collect();
        let (da, db) = (1usize << m, 1usize << (n - m));
        let mut rho = CMatrix::zeros(da, da);
        for a in 0..da {
            for a2 in 0..da {
                let mut acc = Complex64::ZERO;
                for b in 0..db {
                    acc += full[a | (b << m)] * full[a2 | (b << m)].conj();
                }
                rho[(a, a2)] = acc;
            }
        }
        let dicke = DMatrix::from_fn(da, m + 1, |s, q| {
            let ones = (s as u32).count_ones() as usize;
            if ones == q {
                Complex64::new(1.0 / binom(m, q).sqrt(), 0.0)
            } else {
                Complex64::ZERO
            }
        });
        dicke.adjoint() * rho * dicke
    }

    fn state(n: usize, raw: &[(f64, f64)]) -> StateVector {
        let v = CVector::from_iterator(n + 1, raw.iter().map(|&(a, b)| Complex64::new(a, b)));
        StateVector::normalized(Basis::Dicke { n }, v).unwrap()
    }

    fn lmg_spec(n: usize, h: f64) -> SpectralDecomposition {
        let p = LmgParams::anisotropic(n, h).unwrap();
        diagonalize(&subsystem_hamiltonian(&p, n, SubsystemNormalization::Subsystem).unwrap()).unwrap()
    }

    #[test]
    fn split_amplitudes() {
        assert_eq!(dicke_split_amplitude(10, 4, 0, 0), 1.0);
        let half = 0.5f64.sqrt();
        assert!((dicke_split_amplitude(2, 1, 1, 0) - half).abs() < 1e-15);
        assert!((dicke_split_amplitude(2, 1, 1, 1) - half).abs() < 1e-15);
        assert_eq!(dicke_split_amplitude(5, 2, 1, 3), 0.0);
        for k in 0..=100 {
            let s: f64 = (0..=30).map(|q| dicke_split_amplitude(100, 30, k, q).powi(2)).sum();
            assert!((s - 1.0).abs() < 1e-12, "k={k}: {s}");
        }
    }

    #[test]
    fn reduction_matches_brute_force() {
        let p = LmgParams::anisotropic(4, 0.5).unwrap();
        let spec = diagonalize(&crate::build_lmg_hamiltonian(&p).unwrap()).unwrap();
        let psi = spec.eigenvector(0);
        let rho = reduce_symmetric_state(&psi, 2).unwrap();
        let oracle = brute_force_reduce(psi.amplitudes(), 4, 2);
        assert!((rho.entries() - oracle).camax() < 1e-12);
        rho.validate().unwrap();
    }

    #[test]
    fn product_and_full_reductions_are_pure() {
        let down = StateVector::basis_state(Basis::Dicke { n: 8 }, 0).unwrap();
        let rho = reduce_symmetric_state(&down, 3).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert!((rho.entries()[(0, 0)].re - 1.0).abs() < 1e-12);
        let psi = state(
            5,
            &[(0.3, 0.1), (0.2, -0.4), (0.0, 0.5), (0.1, 0.0), (0.7, 0.2), (0.1, 0.1)],
        );
        let full = reduce_symmetric_state(&psi, 5).unwrap();
        assert!((full.purity() - 1.0).abs() < 1e-12);
        assert!(reduce_symmetric_state(&psi, 0).is_err());
        assert!(reduce_symmetric_state(&psi, 6).is_err());
    }

    #[test]
    fn subsystem_hamiltonian_cases() {
        let p = LmgParams::anisotropic(10, 0.7).unwrap();
        let full = subsystem_hamiltonian(&p, 10, SubsystemNormalization::Subsystem).unwrap();
        assert_eq!(full, crate::build_lmg_hamiltonian(&p).unwrap());
        // one spin: only the field and a constant survive, gap 2h
        let one = diagonalize(&subsystem_hamiltonian(&p, 1, SubsystemNormalization::Subsystem).unwrap()).unwrap();
        assert!((one.eigenvalue(1) - one.eigenvalue(0) - 1.4).abs() < 1e-12);
        let half = diagonalize(
            &subsystem_hamiltonian(
                &LmgParams::anisotropic(100, 0.5).unwrap(),
                50,
                SubsystemNormalization::Subsystem,
            )
            .unwrap(),
        )
        .unwrap();
        assert!(half.eigenvalue(1) - half.eigenvalue(0) < 1e-6 * half.bandwidth());
    }

    #[test]
    fn ergotropy_of_simple_states() {
        let h = lmg_spec(6, 1.5);
        let ground = ReducedDensityMatrix::pure(&h.eigenvector(0)).unwrap();
        assert!(ergotropy(&ground, &h).unwrap().abs() < 1e-10);
        let mixed = ReducedDensityMatrix::new(6, CMatrix::identity(7, 7) / Complex64::new(7.0, 0.0)).unwrap();
        assert!(ergotropy(&mixed, &h).unwrap().abs() < 1e-10);
        let excited = ReducedDensityMatrix::pure(&h.eigenvector(1)).unwrap();
        let e = ergotropy(&excited, &h).unwrap();
        assert!((e - (h.eigenvalue(1) - h.eigenvalue(0))).abs() < 1e-10);
    }

    #[test]
    fn pure_full_system_ergotropy_equals_work() {
        let p = LmgParams::anisotropic(30, 0.5).unwrap();
        let q = Quench::prepare(QuenchSpec::new(p, 2.0, uniform_time_grid(10.0, 40).unwrap()).unwrap()).unwrap();
        let r = subsystem_report(&q, 30, SubsystemNormalization::Subsystem).unwrap();
        let w = q.stored_work_series();
        for (i, (e, wm)) in r.ergotropy_series.iter().zip(&r.subsystem_work_series).enumerate() {
            assert!((e - w[i]).abs() < 1e-9);
            assert!((wm - w[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn no_quench_leaves_locked_ergotropy_only() {
        let p = LmgParams::anisotropic(40, 0.5).unwrap();
        let q = Quench::prepare(QuenchSpec::new(p, 0.5, uniform_time_grid(5.0, 10).unwrap()).unwrap()).unwrap();
        let r = subsystem_report(&q, 20, SubsystemNormalization::Subsystem).unwrap();
        assert!(r.subsystem_work_series.iter().all(|w| w.abs() < 1e-10));
        assert!(r.e_max >= 0.0);
    }

    fn random_rho(d: usize, seed: &[f64]) -> ReducedDensityMatrix {
        let a = CMatrix::from_fn(d, d, |i, j| {
            Complex64::new(seed[(i * d + j) % seed.len()], seed[(i + 3 * j + 1) % seed.len()])
        });
        let r = &a * a.adjoint();
        let tr = r.trace();
        ReducedDensityMatrix::new(d - 1, r / tr).unwrap()
    }

    proptest! {
        #[test]
        fn passive_states_hold_no_ergotropy(seed in prop::collection::vec(-1.0f64..1.0, 13..40), h in 0.0f64..2.0) {
            let h = lmg_spec(5, h);
            let rho = random_rho(6, &seed);
            prop_assume!(rho.purity() > 0.0);
            let sigma = passive_state(&rho, &h).unwrap().to_density_matrix(5);
            prop_assert!(ergotropy(&sigma, &h).unwrap() < 1e-10);
            let r = ergotropy_routes(&rho, &h).unwrap();
            prop_assert!((r.via_passive_state - r.via_populations).abs() < 1e-9);
            prop_assert!(r.via_populations > -1e-10);
        }

        #[test]
        fn ergotropy_is_tie_invariant(p in 0.0f64..1.0, h in 0.0f64..2.0) {
            // two equal populations, placed on either pair of levels
            let h = lmg_spec(2, h);
            let q = (1.0 - p) / 2.0;
            let z = h.eigenvectors();
            let zeta = h.eigenvalues();
            for pops in [[q, p, q], [q, q, p], [p, q, q]] {
                let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(3, pops.iter().map(|&x| Complex64::new(x, 0.0))));
                let rho = ReducedDensityMatrix::new(2, z * d * z.adjoint()).unwrap();
                let mut eta = pops.to_vec();
                eta.sort_by(|a, b| b.total_cmp(a));
                let expect: f64 = (0..3).map(|i| (pops[i] - eta[i]) * zeta[i]).sum();
                prop_assert!((ergotropy(&rho, &h).unwrap() - expect.max(0.0)).abs() < 1e-10);
            }
        }

        #[test]
        fn splitting_reduction_matches_tensor_trace(
            raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 7),
            m in 1usize..6,
        ) {
            let psi = state(6, &raw);
            let rho = reduce_symmetric_state(&psi, m).unwrap();
            let oracle = brute_force_reduce(psi.amplitudes(), 6, m);
            prop_assert!((rho.entries() - oracle).camax() < 1e-12);
            rho.validate().unwrap();
        }
    }
}
