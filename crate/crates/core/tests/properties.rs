use proptest::prelude::*;

use lmg_battery::dicke::{brute_force_hamiltonian, constant_shift};
use lmg_battery::ergotropy::{
    ergotropy, passive_state, reduce_symmetric_state, subsystem_hamiltonian, subsystem_report, SubsystemNormalization,
};
use lmg_battery::quench::uniform_time_grid;
use lmg_battery::{build_lmg_hamiltonian, diagonalize, LmgParams, Quench, QuenchSpec};

fn quench(n: usize, gamma: f64, h_i: f64, h_c: f64, points: usize) -> Quench {
    let params = LmgParams::new(n, 1.0, gamma, h_i).unwrap();
    Quench::prepare(QuenchSpec::new(params, h_c, uniform_time_grid(20.0, points).unwrap()).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dicke_levels_sit_in_the_full_spectrum(n in 1usize..=7, gamma in 0.0..=1.0f64, h in 0.0..2.5f64) {
        let params = LmgParams::new(n, 1.0, gamma, h).unwrap();
        let dicke = diagonalize(&build_lmg_hamiltonian(&params).unwrap()).unwrap();
        let brute = brute_force_hamiltonian(n, 1.0, gamma, h).unwrap().symmetric_eigenvalues();
        let shift = constant_shift(&params);
        for &e in dicke.eigenvalues() {
            let d = brute.iter().map(|b| (b - e - shift).abs()).fold(f64::INFINITY, f64::min);
            prop_assert!(d < 1e-9, "level {e} missing (closest {d})");
        }
    }

    #[test]
    fn stored_work_is_nonnegative_and_bounded(
        n in 2usize..=30, gamma in 0.0..=1.0f64, h_i in 0.0..2.5f64, h_c in 0.0..2.5f64,
    ) {
        let q = quench(n, gamma, h_i, h_c, 41);
        let top = q.battery_spectrum().bandwidth();
        for w in q.stored_work_series() {
            prop_assert!(w >= -1e-10 && w <= top + 1e-10);
        }
        let wpd = q.work_distribution();
        prop_assert!((wpd.total_probability() - 1.0).abs() < 1e-10);
        prop_assert!(q.work_variance() >= 0.0);
    }

    #[test]
    fn subsystem_ergotropy_is_bounded_by_energy_above_ground(
        n in 4usize..=24, h_i in 0.0..2.5f64, h_c in 0.0..2.5f64, frac in 0.1..1.0f64, t in 0.0..20.0f64,
    ) {
        let m = ((n as f64 * frac).ceil() as usize).clamp(1, n);
        let q = quench(n, 0.0, h_i, h_c, 2);
        let params = LmgParams::anisotropic(n, h_i).unwrap();
        let hm = diagonalize(&subsystem_hamiltonian(&params, m, SubsystemNormalization::Subsystem).unwrap()).unwrap();
        let rho = reduce_symmetric_state(&q.state_at(t), m).unwrap();
        let e = ergotropy(&rho, &hm).unwrap();
        let above_ground = rho.energy(&hm).unwrap() - hm.eigenvalue(0);
        prop_assert!(e >= 0.0);
        prop_assert!(e <= above_ground + 1e-9, "E {e} above {above_ground}");
    }

    #[test]
    fn full_subsystem_ergotropy_equals_work(n in 2usize..=30, h_i in 0.0..2.5f64, h_c in 0.0..2.5f64) {
        let q = quench(n, 0.0, h_i, h_c, 21);
        let report = subsystem_report(&q, n, SubsystemNormalization::Subsystem).unwrap();
        for (e, w) in report.ergotropy_series.iter().zip(q.stored_work_series()) {
            prop_assert!((e - w).abs() < 1e-9);
        }
    }

    #[test]
    fn passive_states_hold_no_ergotropy(n in 2usize..=12, h in 0.0..2.5f64, t in 0.0..20.0f64) {
        let q = quench(n, 0.0, h, 2.5 - h, 2);
        let params = LmgParams::anisotropic(n, h).unwrap();
        let m = n / 2;
        let hm = diagonalize(&subsystem_hamiltonian(&params, m, SubsystemNormalization::Subsystem).unwrap()).unwrap();
        let rho = reduce_symmetric_state(&q.state_at(t), m).unwrap();
        let sigma = passive_state(&rho, &hm).unwrap().to_density_matrix(m);
        prop_assert!(ergotropy(&sigma, &hm).unwrap() < 1e-10);
    }
}
