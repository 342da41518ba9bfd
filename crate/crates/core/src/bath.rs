//! Charging through a single truncated bosonic mode,
//! `H_C = H_LMG + omega a^dag a + g (J_+ a + J_- a^dag)`.
//!
//! The composite basis is spin-index major: `|s> (x) |n>` sits at
//! `s * n_max + n`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dicke::{build_jplus, build_lmg_hamiltonian, Basis, CMatrix, LmgParams, OperatorMatrix};
use crate::ergotropy::{efficiency_ratio, BatteryHamiltonian, ReducedDensityMatrix};
use crate::error::{Error, Result};
use crate::quench::{argmax, shannon_entropy, validate_time_grid};
use crate::spectral::{diagonalize, ground_state, CVector, SpectralDecomposition, StateVector};

/// How the mode frequency is chosen when a config does not give a number.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaRule {
    /// `omega = lambda`.
    #[default]
    Coupling,
    /// `omega = 2h`, the Zeeman spacing of free spins.
    Resonant,
}

impl OmegaRule {
    pub fn omega(self, params: &LmgParams) -> f64 {
        match self {
            OmegaRule::Coupling => params.lambda,
            OmegaRule::Resonant => 2.0 * params.h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub omega: f64,
    pub g: f64,
    pub n_init: usize,
    pub n_max: usize,
}

impl BathSpec {
    pub fn new(omega: f64, g: f64, n_init: usize, n_max: usize) -> Self {
        BathSpec {
            omega,
            g,
            n_init,
            n_max,
        }
    }

    /// The cutoff must leave room for every spin to be flipped by a photon
    /// taken from or given to the mode.
    pub fn validate(&self, n: usize) -> Result<()> {
        if !self.omega.is_finite() {
            return Err(Error::param("omega", "must be finite"));
        }
        if !self.g.is_finite() {
            return Err(Error::param("g", "must be finite"));
        }
        if self.n_max <= self.n_init + n {
            return Err(Error::param(
                "n_max",
                format!(
                    "Fock cutoff {} must exceed n_init + N = {}",
                    self.n_max,
                    self.n_init + n
                ),
            ));
        }
        Ok(())
    }

    pub fn with_coupling(&self, g: f64) -> Self {
        BathSpec { g, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompositeSpace {
    pub spin_dim: usize,
    pub fock_dim: usize,
}

impl CompositeSpace {
    pub fn new(n: usize, n_max: usize) -> Self {
        CompositeSpace {
            spin_dim: n + 1,
            fock_dim: n_max,
        }
    }

    pub fn dim(&self) -> usize {
        self.spin_dim * self.fock_dim
    }

    pub fn index(&self, spin: usize, photons: usize) -> usize {
        spin * self.fock_dim + photons
    }

    /// Inverse of [`CompositeSpace::index`].
    pub fn split(&self, i: usize) -> (usize, usize) {
        (i / self.fock_dim, i % self.fock_dim)
    }

    pub fn basis(&self) -> Basis {
        Basis::Composite {
            n: self.spin_dim - 1,
            fock_dim: self.fock_dim,
        }
    }
}

/// `A (x) B` for dense complex matrices.
fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn number_operator(n_max: usize) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        n_max,
        (0..n_max).map(|n| Complex64::new(n as f64, 0.0)),
    ))
}

fn annihilation(n_max: usize) -> CMatrix {
    let mut a = CMatrix::zeros(n_max, n_max);
    for n in 1..n_max {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn build_composite_hamiltonian(params: &LmgParams, bath: &BathSpec) -> Result<OperatorMatrix> {
    bath.validate(params.n)?;
    let space = CompositeSpace::new(params.n, bath.n_max);
    let h_lmg = build_lmg_hamiltonian(params)?.into_entries();
    let jp = build_jplus(&params.basis()).into_entries();
    let jm = jp.adjoint();
    let a = annihilation(bath.n_max);
    let ad = a.adjoint();
    let id_s = CMatrix::identity(space.spin_dim, space.spin_dim);
    let id_f = CMatrix::identity(bath.n_max, bath.n_max);
    let g = Complex64::new(bath.g, 0.0);
    let h = kron(&h_lmg, &id_f)
        + kron(&id_s, &number_operator(bath.n_max)) * Complex64::new(bath.omega, 0.0)
        + (kron(&jp, &a) + kron(&jm, &ad)) * g;
    OperatorMatrix::new(space.basis(), h)
}

/// `Tr_bath |psi><psi|` as an `(N+1) x (N+1)` density matrix.
pub fn trace_out_bath(psi: &StateVector) -> Result<ReducedDensityMatrix> {
    let Basis::Composite { n, fock_dim } = psi.basis() else {
        return Err(Error::BasisMismatch("expected a composite spin-mode state".into()));
    };
    let p = DMatrix::from_fn(n + 1, fock_dim, |s, k| psi.amplitudes()[s * fock_dim + k]);
    Ok(ReducedDensityMatrix::from_raw(n, &p * p.adjoint()))
}

/// `P(eps_j) = <eps_j|rho_B|eps_j>`.
pub fn energy_occupations(rho: &ReducedDensityMatrix, battery: &SpectralDecomposition) -> Result<Vec<f64>> {
    rho.populations(battery)
}

/// `<a^dag a>` of a composite state.
pub fn photon_number(psi: &StateVector) -> Result<f64> {
    let Basis::Composite { fock_dim, .. } = psi.basis() else {
        return Err(Error::BasisMismatch("expected a composite spin-mode state".into()));
    };
    Ok(psi
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, z)| (i % fock_dim) as f64 * z.norm_sqr())
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargingRun {
    pub times: Vec<f64>,
    pub work_series: Vec<f64>,
    pub photon_series: Vec<f64>,
    pub ergotropy_series: Vec<f64>,
    pub ratio_series: Vec<f64>,
    /// Shannon entropy of the battery-level occupations.
    pub entropy_series: Vec<f64>,
    /// `<psi(t)|H_C|psi(t)>`, constant up to rounding.
    pub total_energy_series: Vec<f64>,
    pub w_max: f64,
    pub t_w_max: f64,
    pub ergotropy_at_w_max: f64,
    /// Occupations `P(eps_j)` at `t_w_max`.
    pub occupations_at_w_max: Vec<f64>,
}

/// Both Hamiltonians of a bath run, diagonalized once.
#[derive(Debug, Clone)]
pub struct BathCharger {
    params: LmgParams,
    bath: BathSpec,
    composite_op: OperatorMatrix,
    composite: SpectralDecomposition,
    battery: BatteryHamiltonian,
    ground_energy: f64,
    initial: StateVector,
    coefficients: CVector,
}

impl BathCharger {
    pub fn prepare(params: LmgParams, bath: BathSpec) -> Result<Self> {
        params.validate()?;
        let composite_op = build_composite_hamiltonian(&params, &bath)?;
        let composite = diagonalize(&composite_op)?;
        let battery = BatteryHamiltonian::new(diagonalize(&build_lmg_hamiltonian(&params)?)?);
        let (ground_energy, ground) = ground_state(battery.spectrum());
        let space = CompositeSpace::new(params.n, bath.n_max);
        let mut amps = CVector::zeros(space.dim());
        for s in 0..space.spin_dim {
            amps[space.index(s, bath.n_init)] = ground.amplitudes()[s];
        }
        let initial = StateVector::normalized(space.basis(), amps)?;
        let coefficients = composite.coefficients(&initial)?;
        Ok(BathCharger {
            params,
            bath,
            composite_op,
            composite,
            battery,
            ground_energy,
            initial,
            coefficients,
        })
    }

    pub fn params(&self) -> &LmgParams {
        &self.params
    }

    pub fn bath(&self) -> &BathSpec {
        &self.bath
    }

    pub fn composite_hamiltonian(&self) -> &OperatorMatrix {
        &self.composite_op
    }

    pub fn composite_spectrum(&self) -> &SpectralDecomposition {
        &self.composite
    }

    pub fn battery_spectrum(&self) -> &SpectralDecomposition {
        self.battery.spectrum()
    }

    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    pub fn state_at(&self, t: f64) -> StateVector {
        if t == 0.0 {
            return self.initial.clone();
        }
        let phased = CVector::from_iterator(
            self.coefficients.len(),
            self.coefficients
                .iter()
                .zip(self.composite.eigenvalues())
                .map(|(c, &mu)| c * Complex64::from_polar(1.0, -mu * t)),
        );
        StateVector::from_raw(self.composite.basis(), self.composite.eigenvectors() * phased)
    }

    pub fn battery_state(&self, t: f64) -> Result<ReducedDensityMatrix> {
        trace_out_bath(&self.state_at(t))
    }

    /// `(W, <n>, E, S, <H_C>)` at time `t`.
    fn sample(&self, t: f64) -> Result<(f64, f64, f64, f64, f64)> {
        let psi = self.state_at(t);
        let rho = trace_out_bath(&psi)?;
        let occupations = energy_occupations(&rho, self.battery.spectrum())?;
        let energy: f64 = occupations
            .iter()
            .zip(self.battery.spectrum().eigenvalues())
            .map(|(p, e)| p * e)
            .sum();
        let total = self.composite_op.expectation(&psi)?;
        Ok((
            energy - self.ground_energy,
            photon_number(&psi)?,
            self.battery.ergotropy(&rho)?,
            shannon_entropy(&occupations),
            total,
        ))
    }

    pub fn run(&self, times: &[f64]) -> Result<ChargingRun> {
        validate_time_grid(times)?;
        let rows: Vec<_> = times.par_iter().map(|&t| self.sample(t)).collect::<Result<_>>()?;
        let mut run = ChargingRun {
            times: times.to_vec(),
            work_series: Vec::with_capacity(rows.len()),
            photon_series: Vec::with_capacity(rows.len()),
            ergotropy_series: Vec::with_capacity(rows.len()),
            ratio_series: Vec::with_capacity(rows.len()),
            entropy_series: Vec::with_capacity(rows.len()),
            total_energy_series: Vec::with_capacity(rows.len()),
            w_max: 0.0,
            t_w_max: 0.0,
            ergotropy_at_w_max: 0.0,
            occupations_at_w_max: Vec::new(),
        };
        for (w, n, e, s, total) in rows {
            run.work_series.push(w);
            run.photon_series.push(n);
            run.ergotropy_series.push(e);
            run.ratio_series.push(efficiency_ratio(e, w));
            run.entropy_series.push(s);
            run.total_energy_series.push(total);
        }
        let (w_max, t_w_max) = argmax(times, &run.work_series);
        let at = times.iter().position(|&t| t == t_w_max).unwrap_or(0);
        run.w_max = w_max;
        run.t_w_max = t_w_max;
        run.ergotropy_at_w_max = run.ergotropy_series[at];
        run.occupations_at_w_max = energy_occupations(&self.battery_state(t_w_max)?, self.battery.spectrum())?;
        Ok(run)
    }
}

/// One bath charging run from `|eps_0> (x) |n_init>`.
pub fn run_bath_charging(params: &LmgParams, bath: &BathSpec, times: &[f64]) -> Result<ChargingRun> {
    BathCharger::prepare(*params, *bath)?.run(times)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingPoint {
    pub g: f64,
    pub w_max: f64,
    pub t_w_max: f64,
    /// Ergotropy at the time of `w_max`.
    pub ergotropy: f64,
    pub ratio: f64,
}

/// Runs every `g` independently; results keep the order of `g_values`.
pub fn coupling_sweep(
    params: &LmgParams,
    template: &BathSpec,
    g_values: &[f64],
    times: &[f64],
) -> Result<Vec<CouplingPoint>> {
    if g_values.is_empty() {
        return Err(Error::param("g", "coupling list must not be empty"));
    }
    g_values
        .par_iter()
        .map(|&g| {
            let run = run_bath_charging(params, &template.with_coupling(g), times)?;
            Ok(CouplingPoint {
                g,
                w_max: run.w_max,
                t_w_max: run.t_w_max,
                ergotropy: run.ergotropy_at_w_max,
                ratio: efficiency_ratio(run.ergotropy_at_w_max, run.w_max),
            })
        })
        .collect()
}
