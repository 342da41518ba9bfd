//! Sudden-quench charging: the battery starts in the ground state of
//! `H_B = H(h_i)` and evolves under `H_C = H(h_c)`.
//!
//! Two independent routes to the stored work are kept: the direct one
//! (evolve the state, take `<psi(t)|H_B|psi(t)>`) and the closed form through
//! the overlap matrix `<eps_l|mu_k>`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dicke::{build_lmg_hamiltonian, CMatrix, LmgParams, OperatorMatrix};
use crate::error::{Error, Result};
use crate::spectral::{diagonalize, ground_state, CVector, Propagator, SpectralDecomposition, StateVector};

/// Default charging window and resolution.
pub const DEFAULT_T_MAX: f64 = 50.0;
pub const DEFAULT_GRID_POINTS: usize = 2000;

/// Charge-spectrum levels closer than this are treated as degenerate by
/// [`Quench::long_time_average_work_degenerate_aware`].
pub const DEGENERACY_TOL: f64 = 1e-10;

/// `points` equally spaced times on `[0, t_max]`.
pub fn uniform_time_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::param("t_max", format!("must be positive, got {t_max}")));
    }
    if points < 2 {
        return Err(Error::param("points", "a time grid needs at least 2 points"));
    }
    let step = t_max / (points - 1) as f64;
    Ok((0..points).map(|k| k as f64 * step).collect())
}

pub(crate) fn validate_time_grid(grid: &[f64]) -> Result<()> {
    match grid.first() {
        None => return Err(Error::param("time_grid", "must not be empty")),
        Some(&t0) if t0 != 0.0 => return Err(Error::param("time_grid", format!("must start at 0, starts at {t0}"))),
        _ => {}
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("time_grid", "must be finite and strictly increasing"));
    }
    Ok(())
}

/// One quench `h_i -> h_c` sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuenchSpec {
    pub initial: LmgParams,
    pub charge: LmgParams,
    pub time_grid: Vec<f64>,
}

impl QuenchSpec {
    pub fn new(initial: LmgParams, h_c: f64, time_grid: Vec<f64>) -> Result<Self> {
        let spec = QuenchSpec {
            initial,
            charge: initial.with_field(h_c),
            time_grid,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.initial.validate()?;
        self.charge.validate()?;
        let (a, b) = (&self.initial, &self.charge);
        if a.n != b.n || a.lambda != b.lambda || a.gamma != b.gamma {
            return Err(Error::param(
                "charge",
                "initial and charging Hamiltonians must share N, lambda and gamma",
            ));
        }
        validate_time_grid(&self.time_grid)
    }

    pub fn is_trivial(&self) -> bool {
        self.initial == self.charge
    }
}

/// Discrete work distribution `{(mu_k - eps_0, |<mu_k|eps_0>|^2)}`, one
/// point per charging eigenstate, in ascending `mu_k` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkDistribution {
    pub work_values: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl WorkDistribution {
    pub fn len(&self) -> usize {
        self.work_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.work_values.is_empty()
    }

    pub fn total_probability(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// First moment `sum_k p_k W_k`.
    pub fn mean(&self) -> f64 {
        self.work_values
            .iter()
            .zip(&self.probabilities)
            .map(|(w, p)| w * p)
            .sum()
    }

    /// Point carrying the largest probability (first one on ties).
    pub fn dominant(&self) -> (f64, f64) {
        let mut best = 0;
        for (k, &p) in self.probabilities.iter().enumerate() {
            if p > self.probabilities[best] {
                best = k;
            }
        }
        (self.work_values[best], self.probabilities[best])
    }

    /// Points with probability above `threshold`.
    pub fn support(&self, threshold: f64) -> usize {
        self.probabilities.iter().filter(|&&p| p > threshold).count()
    }

    /// Probability mass binned into `[k w, (k+1) w)` bins for plotting;
    /// returns `(bin centre, mass)` for non-empty bins in ascending order.
    pub fn histogram(&self, bin_width: f64) -> Result<Vec<(f64, f64)>> {
        if !(bin_width.is_finite() && bin_width > 0.0) {
            return Err(Error::param("bin_width", "must be positive"));
        }
        let mut bins: std::collections::BTreeMap<i64, f64> = Default::default();
        for (w, p) in self.work_values.iter().zip(&self.probabilities) {
            *bins.entry((w / bin_width).floor() as i64).or_default() += p;
        }
        Ok(bins
            .into_iter()
            .map(|(k, p)| ((k as f64 + 0.5) * bin_width, p))
            .collect())
    }
}

/// How the optimal charging time is read off the power curve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TOptRule {
    /// Time of maximum power `W(t)/t`.
    #[default]
    MaxPower,
    /// Time of maximum stored work.
    MaxWork,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSummary {
    pub p_max: f64,
    /// `None` when no work is ever stored.
    pub t_opt: Option<f64>,
}

/// Peak power over `t > 0` and the optimal charging time. Ties go to the
/// earlier time.
pub fn power_summary(times: &[f64], work: &[f64], rule: TOptRule) -> PowerSummary {
    if work.iter().all(|&w| w == 0.0) {
        return PowerSummary {
            p_max: 0.0,
            t_opt: None,
        };
    }
    let mut best_power: Option<(f64, f64)> = None;
    for (&t, &w) in times.iter().zip(work) {
        if t <= 0.0 {
            continue;
        }
        let p = w / t;
        if best_power.is_none_or(|(bp, _)| p > bp) {
            best_power = Some((p, t));
        }
    }
    let Some((p_max, t_power)) = best_power else {
        return PowerSummary {
            p_max: 0.0,
            t_opt: None,
        };
    };
    let t_opt = match rule {
        TOptRule::MaxPower => t_power,
        TOptRule::MaxWork => argmax(times, work).1,
    };
    PowerSummary {
        p_max,
        t_opt: Some(t_opt),
    }
}

/// `(max, time of max)`, earliest time on ties.
pub(crate) fn argmax(times: &[f64], values: &[f64]) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, times[0]);
    for (&t, &v) in times.iter().zip(values) {
        if v > best.0 {
            best = (v, t);
        }
    }
    best
}

/// `-sum p ln p` with `0 ln 0 = 0`.
pub fn shannon_entropy(populations: &[f64]) -> f64 {
    -populations
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuenchSummary {
    pub w_max: f64,
    pub t_w_max: f64,
    pub p_max: f64,
    pub t_opt: Option<f64>,
    pub mean_work: f64,
    pub work_variance: f64,
}

/// Time series and summary of one quench.
#[derive(Debug, Clone, PartialEq)]
pub struct QuenchResult {
    pub times: Vec<f64>,
    pub work_series: Vec<f64>,
    /// `W(t)/t`; absent at `t = 0`.
    pub power_series: Vec<Option<f64>>,
    pub entropy_series: Vec<f64>,
    pub summary: QuenchSummary,
}

/// A quench with both Hamiltonians diagonalized.
#[derive(Debug, Clone)]
pub struct Quench {
    spec: QuenchSpec,
    battery_op: OperatorMatrix,
    battery: SpectralDecomposition,
    charge: SpectralDecomposition,
    ground_energy: f64,
    ground: StateVector,
    /// `<mu_k|eps_0>`
    overlaps: CVector,
    /// `<eps_l|mu_k>`, rows `l`, columns `k`.
    transfer: CMatrix,
}

impl Quench {
    pub fn prepare(spec: QuenchSpec) -> Result<Self> {
        spec.validate()?;
        let battery_op = build_lmg_hamiltonian(&spec.initial)?;
        let battery = diagonalize(&battery_op)?;
        let (ground_energy, ground) = ground_state(&battery);
        let (charge, transfer) = if spec.is_trivial() {
            // No quench: identical eigenbases, overlaps exactly the identity.
            let d = battery.dim();
            (battery.clone(), CMatrix::identity(d, d))
        } else {
            let charge = diagonalize(&build_lmg_hamiltonian(&spec.charge)?)?;
            let transfer = battery.eigenvectors().ad_mul(charge.eigenvectors());
            (charge, transfer)
        };
        let overlaps = if spec.is_trivial() {
            let mut c = CVector::zeros(battery.dim());
            c[0] = Complex64::new(1.0, 0.0);
            c
        } else {
            charge.coefficients(&ground)?
        };
        Ok(Quench {
            spec,
            battery_op,
            battery,
            charge,
            ground_energy,
            ground,
            overlaps,
            transfer,
        })
    }

    pub fn spec(&self) -> &QuenchSpec {
        &self.spec
    }

    pub fn times(&self) -> &[f64] {
        &self.spec.time_grid
    }

    pub fn battery_hamiltonian(&self) -> &OperatorMatrix {
        &self.battery_op
    }

    pub fn battery_spectrum(&self) -> &SpectralDecomposition {
        &self.battery
    }

    pub fn charge_spectrum(&self) -> &SpectralDecomposition {
        &self.charge
    }

    /// `eps_0`.
    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    /// `|eps_0>`.
    pub fn initial_state(&self) -> &StateVector {
        &self.ground
    }

    fn propagator(&self) -> Propagator<'_> {
        // The ground state lives in the charge basis by construction.
        self.charge
            .propagator(&self.ground)
            .expect("ground state shares the charge basis")
    }

    /// `|psi(t)> = exp(-i H_C t) |eps_0>`.
    pub fn state_at(&self, t: f64) -> StateVector {
        if t == 0.0 {
            return self.ground.clone();
        }
        self.propagator().at(t)
    }

    /// `E(t) = <psi(t)|H_B|psi(t)>`, evaluated on the evolved state.
    pub fn battery_energy(&self, t: f64) -> f64 {
        if t == 0.0 {
            return self.ground_energy;
        }
        self.battery_op
            .expectation(&self.state_at(t))
            .expect("state shares the battery basis")
    }

    /// `W(t) = E(t) - eps_0` through the evolved state.
    pub fn stored_work_direct(&self, t: f64) -> f64 {
        self.battery_energy(t) - self.ground_energy
    }

    /// Amplitudes `<eps_l|psi(t)> = sum_k exp(-i mu_k t) <mu_k|eps_0> <eps_l|mu_k>`.
    fn battery_amplitudes(&self, t: f64) -> CVector {
        let phased = CVector::from_iterator(
            self.overlaps.len(),
            self.overlaps
                .iter()
                .zip(self.charge.eigenvalues())
                .map(|(c, &mu)| c * Complex64::from_polar(1.0, -mu * t)),
        );
        &self.transfer * phased
    }

    /// Populations `p_l(t) = |<eps_l|psi(t)>|^2` of the battery eigenstates.
    pub fn populations(&self, t: f64) -> Vec<f64> {
        if self.spec.is_trivial() {
            return self.overlaps.iter().map(|c| c.norm_sqr()).collect();
        }
        self.battery_amplitudes(t).iter().map(|a| a.norm_sqr()).collect()
    }

    fn excitation_energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.battery.eigenvalues().iter().map(move |e| e - self.ground_energy)
    }

    /// Closed-form `W(t) = sum_l p_l(t) (eps_l - eps_0)`.
    pub fn stored_work(&self, t: f64) -> f64 {
        self.populations(t)
            .iter()
            .zip(self.excitation_energies())
            .map(|(p, w)| p * w)
            .sum()
    }

    /// Closed-form `W(t)` over the spec's time grid.
    pub fn stored_work_series(&self) -> Vec<f64> {
        self.times().par_iter().map(|&t| self.stored_work(t)).collect()
    }

    /// Direct-route `W(t)` over the spec's time grid.
    pub fn stored_work_direct_series(&self) -> Vec<f64> {
        self.times().par_iter().map(|&t| self.stored_work_direct(t)).collect()
    }

    /// Shannon entropy of the battery-eigenbasis populations.
    pub fn entropy(&self, t: f64) -> f64 {
        shannon_entropy(&self.populations(t))
    }

    pub fn shannon_entropy_series(&self) -> Vec<f64> {
        self.times().par_iter().map(|&t| self.entropy(t)).collect()
    }

    pub fn work_distribution(&self) -> WorkDistribution {
        WorkDistribution {
            work_values: self
                .charge
                .eigenvalues()
                .iter()
                .map(|mu| mu - self.ground_energy)
                .collect(),
            probabilities: self.overlaps.iter().map(|c| c.norm_sqr()).collect(),
        }
    }

    /// `a_k = sum_l |<eps_l|mu_k>|^2 (eps_l - eps_0)`.
    fn eigenstate_work(&self) -> Vec<f64> {
        let w: Vec<f64> = self.excitation_energies().collect();
        (0..self.charge.dim())
            .map(|k| {
                self.transfer
                    .column(k)
                    .iter()
                    .zip(&w)
                    .map(|(o, w)| o.norm_sqr() * w)
                    .sum()
            })
            .collect()
    }

    /// Long-time average `sum_l sum_k |<mu_k|eps_0>|^2 |<eps_l|mu_k>|^2 (eps_l - eps_0)`.
    pub fn long_time_average_work(&self) -> f64 {
        self.overlaps
            .iter()
            .zip(self.eigenstate_work())
            .map(|(c, a)| c.norm_sqr() * a)
            .sum()
    }

    /// Long-time variance, clamped at 0:
    ///
    /// ```text
    /// sum_{l,l'} sum_k p_k |<eps_l|mu_k>|^2 |<eps_l'|mu_k>|^2 w_l w_l' - <W>^2
    /// ```
    pub fn work_variance(&self) -> f64 {
        let a = self.eigenstate_work();
        let (mut first, mut second) = (0.0, 0.0);
        for (c, a) in self.overlaps.iter().zip(&a) {
            let p = c.norm_sqr();
            first += p * a;
            second += p * a * a;
        }
        (second - first * first).max(0.0)
    }

    /// Long-time average that keeps interference between charge levels
    /// closer than `tol`, which do not dephase over any finite window.
    pub fn long_time_average_work_degenerate_aware(&self, tol: f64) -> f64 {
        let mu = self.charge.eigenvalues();
        let w: Vec<f64> = self.excitation_energies().collect();
        let mut total = 0.0;
        let mut start = 0;
        while start < mu.len() {
            let mut end = start + 1;
            while end < mu.len() && mu[end] - mu[end - 1] < tol {
                end += 1;
            }
            for (l, wl) in w.iter().enumerate() {
                let amp: Complex64 = (start..end).map(|k| self.transfer[(l, k)] * self.overlaps[k]).sum();
                total += amp.norm_sqr() * wl;
            }
            start = end;
        }
        total
    }

    /// Everything the quench protocol reports for its time grid.
    pub fn run(&self, rule: TOptRule) -> QuenchResult {
        let times = self.times().to_vec();
        let work_series = self.stored_work_series();
        let entropy_series = self.shannon_entropy_series();
        let power_series = times
            .iter()
            .zip(&work_series)
            .map(|(&t, &w)| (t > 0.0).then(|| w / t))
            .collect();
        let (w_max, t_w_max) = argmax(&times, &work_series);
        let power = power_summary(&times, &work_series, rule);
        QuenchResult {
            summary: QuenchSummary {
                w_max,
                t_w_max,
                p_max: power.p_max,
                t_opt: power.t_opt,
                mean_work: self.long_time_average_work(),
                work_variance: self.work_variance(),
            },
            times,
            work_series,
            power_series,
            entropy_series,
        }
    }

    /// Real matrix of `|<eps_l|mu_k>|^2`, for diagnostics.
    pub fn transition_probabilities(&self) -> DMatrix<f64> {
        self.transfer.map(|z| z.norm_sqr())
    }
}
