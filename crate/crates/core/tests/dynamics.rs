// Copyright 2026 casimir-sim Contributors
// SPDX-License-Identifier: Apache-2.0

use casimir_core::analytic::{integrate_moments, MomentParams, MomentState};
use casimir_core::config::RunSpec;
use casimir_core::lindblad::Termination;
use proptest::prelude::*;

fn bare_cavity(d: f64, modulation: f64, n_max: usize, t_end: f64) -> RunSpec {
    RunSpec::from_text(&format!(
        "g = 0\ngamma = 0\ngamma_phi = 0\nkappa = 0.01\nterms.interaction = none\n\
         drive.d = {d}\ndrive.Omega = {modulation}\nfock.n_max = {n_max}\n\
         integrator.t_end = {t_end}\noutput.sample_interval = 1\n"
    ))
    .unwrap()
}

#[test]
fn photon_number_follows_moment_equations() {
    for (d, modulation) in [(0.005, 2.0), (0.008, 2.05), (0.02, 2.3)] {
        let spec = bare_cavity(d, modulation, 16, 600.0);
        let traj = spec.execute().unwrap();
        assert_eq!(traj.status, Termination::Completed);
        let params = MomentParams {
            omega0: 1.0,
            d,
            modulation,
            kappa: 0.01,
        };
        let moments = integrate_moments(&params, MomentState::VACUUM, 600.0, 1.0).unwrap();
        assert_eq!(moments.times.len(), traj.samples.len());
        for (s, (t, m)) in traj
            .samples
            .iter()
            .zip(moments.times.iter().zip(&moments.states))
            .skip(50)
        {
            assert!((s.t - t).abs() < 1e-9);
            let tol = 0.02 * m.n + 1e-7;
            assert!(
                (s.n_ph - m.n).abs() < tol,
                "d={d} Ω={modulation} t={t}: {} vs {}",
                s.n_ph,
                m.n
            );
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let spec =
        RunSpec::from_text("drive.d = 0.01\nfock.n_max = 5\nintegrator.t_end = 80\n").unwrap();
    let a = spec.execute().unwrap();
    let b = spec.execute().unwrap();
    assert_eq!(a.samples, b.samples);
    assert_eq!(a.metadata.stats, b.metadata.stats);
}

#[test]
fn undriven_ground_state_is_stationary_without_counterrotating_terms() {
    let spec = RunSpec::from_text(
        "drive.d = 0\nterms.interaction = jc\nfock.n_max = 4\nintegrator.t_end = 200\n",
    )
    .unwrap();
    let traj = spec.execute().unwrap();
    assert!(traj
        .samples
        .iter()
        .all(|s| s.w_e.abs() < 1e-14 && s.n_ph.abs() < 1e-14));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn short_runs_stay_physical(
        d in 0.0..0.02f64,
        modulation in 1.8..2.2f64,
        g in 0.0..0.1f64,
        epsilon in 0.8..1.2f64,
    ) {
        let spec = RunSpec::from_text(&format!(
            "drive.d = {d}\ndrive.Omega = {modulation}\ng = {g}\nepsilon = {epsilon}\n\
             fock.n_max = 6\nintegrator.t_end = 60\n"
        )).unwrap();
        let traj = spec.execute().unwrap();
        prop_assert_eq!(&traj.status, &Termination::Completed);
        prop_assert!(traj.max_trace_deviation() < 1e-8);
        prop_assert!(traj.min_eigenvalue() > -1e-7);
        prop_assert!(traj.max_purity() <= 1.0 + 1e-9);
        for s in &traj.samples {
            prop_assert!((0.0..=1.0).contains(&s.w_e));
            prop_assert!(s.n_ph >= 0.0);
        }
    }
}
