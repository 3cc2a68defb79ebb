// Copyright 2026 casimir-sim Contributors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! plus indented detail lines.
//!
//! Some checks are known to fail for the model as specified; they are listed
//! in `EXPECTED_RED` and do not fail the test binary. Any other failing check
//! does.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use casimir_core::analytic::{
    bisect_d_crit, d_crit_res, floquet_growth_rate, w_casimir, w_lamb, MomentParams, SwitchSpec,
};
use casimir_core::config::{ConfigMap, RunSpec};
use casimir_core::lindblad::Termination;
use casimir_core::observables::{
    fast_oscillation_amplitude, fourier_amplitude, steady_envelope, Trajectory,
};
use casimir_core::spectrum::DressedBasis;
use casimir_core::sweep::{
    find_peaks, linspace, run_point, run_sweep, Peak, SweepAxis, SweepRow, SweepSpec,
};

/// Checks that fail for the model as specified.
const EXPECTED_RED: &[&str] = &["1", "2c-d", "2c-g", "3-level", "8"];

const FIG2: &str =
    "omega0 = 1\nepsilon = 1\ng = 0.05\nkappa = 0.01\ngamma = 0.05\ngamma_phi = 0.05\n\
                    drive.kind = cosine\ndrive.d = 0.01\ndrive.Omega = 2\nfock.n_max = 12\n";

const BARE: &str = "g = 0\ngamma = 0\ngamma_phi = 0\nkappa = 0.01\nterms.interaction = none\n\
                    integrator.t_end = 3000\n";

const SWITCH: &str = "g = 0.02\nkappa = 0\ngamma = 0\ngamma_phi = 0\ndrive.kind = switch\n\
                      drive.omega1 = 1\ndrive.omega2 = 1.2\ndrive.tau = 0.06283185307179587\n\
                      initial.state = dressed\nfock.n_max = 12\nintegrator.t_end = 50TR\n\
                      integrator.rel_tol = 1e-10\nintegrator.abs_tol = 1e-13\n";

const TRACE_LIMIT: f64 = 1e-6;
const EIGEN_FLOOR: f64 = -1e-7;

fn with(base: &str, extra: &str) -> String {
    let mut map = ConfigMap::parse(base).unwrap();
    for line in extra.lines().filter(|l| !l.trim().is_empty()) {
        map.apply_override(line).unwrap();
    }
    map.to_text()
}

fn ratio_within(r: f64, target: f64, tol: f64) -> bool {
    (r / target - 1.0).abs() <= tol
}

#[derive(Default)]
struct Suite {
    failed: BTreeSet<String>,
    lines: Vec<String>,
    runs: usize,
    sweep_points: usize,
    max_trace_dev: f64,
    min_eig: f64,
    unhealthy: Vec<String>,
}

impl Suite {
    fn check(&mut self, id: &str, pass: bool, detail: String) -> bool {
        if !pass {
            self.failed.insert(id.to_string());
        }
        self.lines.push(format!(
            "    [{}] {id}: {detail}",
            if pass { "ok" } else { "x" }
        ));
        pass
    }

    fn info(&mut self, detail: String) {
        self.lines.push(format!("    [i] {detail}"));
    }

    fn report(&mut self, criterion: &str, title: &str) {
        let failed = self.failed.iter().any(|id| {
            id.strip_prefix(criterion)
                .is_some_and(|rest| !rest.starts_with(|c: char| c.is_ascii_digit()))
        });
        println!(
            "criterion {criterion}: {} {title}",
            if failed { "FAIL" } else { "PASS" }
        );
        for line in self.lines.drain(..) {
            println!("{line}");
        }
    }

    fn observe(&mut self, label: &str, traj: &Trajectory) {
        self.runs += 1;
        self.max_trace_dev = self.max_trace_dev.max(traj.max_trace_deviation());
        self.min_eig = self.min_eig.min(traj.min_eigenvalue());
        if matches!(
            traj.status,
            Termination::TraceDrift { .. }
                | Termination::PositivityLoss { .. }
                | Termination::NonFiniteState { .. }
                | Termination::StepSizeUnderflow { .. }
        ) {
            self.unhealthy.push(format!("{label}: {}", traj.status));
        }
    }

    fn run(&mut self, label: &str, text: &str) -> Trajectory {
        let traj = RunSpec::from_text(text).unwrap().execute().unwrap();
        self.observe(label, &traj);
        traj
    }

    fn sweep(
        &mut self,
        label: &str,
        base: &str,
        axis: SweepAxis,
        values: Vec<f64>,
    ) -> Vec<SweepRow> {
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        let spec = SweepSpec {
            base: ConfigMap::parse(base).unwrap(),
            axis,
            values,
            workers,
        };
        let rows = run_sweep(&spec).unwrap();
        self.sweep_points += rows.len();
        for row in rows
            .iter()
            .filter(|r| r.status != "completed" && r.status != "truncation_breach")
        {
            self.unhealthy
                .push(format!("{label} {axis}={}: {}", row.axis_value, row.status));
        }
        rows
    }
}

fn w_e_max_profile(rows: &[SweepRow]) -> (Vec<f64>, Vec<f64>) {
    let x = rows.iter().map(|r| r.axis_value).collect();
    let y = rows
        .iter()
        .map(|r| r.envelope.map_or(f64::NAN, |e| e.w_e_max))
        .collect();
    (x, y)
}

fn describe(peaks: &[Peak]) -> String {
    let parts: Vec<String> = peaks
        .iter()
        .map(|p| {
            format!(
                "Ω={:.4} w_e_max={:.5} width={:.4}",
                p.position, p.height, p.width
            )
        })
        .collect();
    format!("{} peak(s): [{}]", peaks.len(), parts.join("; "))
}

fn ripple(traj: &Trajectory, modulation: f64) -> f64 {
    fast_oscillation_amplitude(traj, modulation, 2.0 * PI / modulation, 0.25).unwrap_or(f64::NAN)
}

struct Fig3a {
    x: Vec<f64>,
    y: Vec<f64>,
    peaks: Vec<Peak>,
}

fn criterion_1(s: &mut Suite) -> Fig3a {
    let g: f64 = 0.05;
    let expected = [2.0 - 2f64.sqrt() * g, 2.0 + 2f64.sqrt() * g];
    let rows = s.sweep("fig3a", FIG2, SweepAxis::Omega, linspace(1.85, 2.15, 41));
    let (x, y) = w_e_max_profile(&rows);
    let peaks = find_peaks(&x, &y);
    s.check(
        "1",
        peaks.len() == 2
            && peaks
                .iter()
                .zip(expected)
                .all(|(p, e)| (p.position - e).abs() <= 0.01),
        format!(
            "{}; expected two at {:.4}, {:.4} (±0.01)",
            describe(&peaks),
            expected[0],
            expected[1]
        ),
    );
    s.check(
        "1-rows",
        rows.iter().all(|r| r.stabilized()),
        format!(
            "{} of {} points stabilized",
            rows.iter().filter(|r| r.stabilized()).count(),
            rows.len()
        ),
    );

    // Same sweep at reduced decoherence.
    let low = with(FIG2, "gamma = 0.01\ngamma_phi = 0.01");
    let rows = s.sweep(
        "fig3a-low",
        &low,
        SweepAxis::Omega,
        linspace(1.85, 2.15, 21),
    );
    let (lx, ly) = w_e_max_profile(&rows);
    let low_peaks = find_peaks(&lx, &ly);
    s.info(format!(
        "same sweep at γ=γφ=0.01, 21 points: {}",
        describe(&low_peaks)
    ));
    let resolved = low_peaks.len() == 2
        && low_peaks
            .iter()
            .zip(expected)
            .all(|(p, e)| (p.position - e).abs() <= 0.01);
    s.check(
        "1-low",
        resolved,
        format!("doublet resolved at reduced decoherence: {resolved}"),
    );
    s.report("1", "two-peak resonance structure");
    Fig3a { x, y, peaks }
}

struct Fig2 {
    traj: Trajectory,
    ripple: f64,
}

fn criterion_2(s: &mut Suite) -> Fig2 {
    let base = s.run("fig2", FIG2);
    let env = steady_envelope(&base, 0.25);
    let (stab, detail) = match &env {
        Ok(e) => (
            e.stabilized && e.n_ph_stabilized,
            format!(
                "w_e ∈ [{:.5}, {:.5}] stabilized={}, n_ph_mean={:.5} stabilized={}",
                e.w_e_min, e.w_e_max, e.stabilized, e.n_ph_mean, e.n_ph_stabilized
            ),
        ),
        Err(err) => (false, err.to_string()),
    };
    s.check("2a", stab, detail);

    let full = ripple(&base, 2.0);
    let fourier = fourier_amplitude(&base, 2.0, PI, 0.25).unwrap_or(f64::NAN);
    let jc = s.run("fig2-jc", &with(FIG2, "terms.interaction = jc"));
    let jc_ripple = ripple(&jc, 2.0);
    s.check(
        "2b",
        full / jc_ripple > 3.0,
        format!(
            "ripple full={full:.3e} (fourier {fourier:.3e}), jc={jc_ripple:.3e}, ratio={:.1} > 3",
            full / jc_ripple
        ),
    );

    let doubled_d = s.run("fig2-2d", &with(FIG2, "drive.d = 0.02"));
    let (pass, detail) = if doubled_d.status.is_completed() {
        let r = ripple(&doubled_d, 2.0) / full;
        (
            ratio_within(r, 2.0, 0.3),
            format!("d 0.01→0.02: ripple ratio {r:.3} (2 ± 30%)"),
        )
    } else {
        (
            false,
            format!(
                "d 0.01→0.02: run ended with {} (d = 0.02 exceeds the threshold)",
                doubled_d.status
            ),
        )
    };
    s.check("2c-d", pass, detail);

    let half_d = s.run("fig2-d/2", &with(FIG2, "drive.d = 0.005"));
    let r = full / ripple(&half_d, 2.0);
    s.info(format!(
        "subcritical pair d 0.005→0.01: ripple ratio {r:.3}"
    ));

    let doubled_g = s.run("fig2-2g", &with(FIG2, "g = 0.1"));
    let r = ripple(&doubled_g, 2.0) / full;
    s.check(
        "2c-g",
        ratio_within(r, 2.0, 0.3),
        format!("g 0.05→0.1 at Ω=2: ripple ratio {r:.3} (2 ± 30%)"),
    );

    // Keeping Ω on the upper dressed resonance as g changes.
    let track = |g: f64| {
        with(
            FIG2,
            &format!(
                "g = {g}\ndrive.d = 0.005\ndrive.Omega = {}\noutput.sample_interval = 0.1",
                2.0 + 2f64.sqrt() * g
            ),
        )
    };
    let (om1, om2) = (2.0 + 2f64.sqrt() * 0.05, 2.0 + 2f64.sqrt() * 0.1);
    let t1 = s.run("fig2-track-g", &track(0.05));
    let t2 = s.run("fig2-track-2g", &track(0.1));
    let r = ripple(&t2, om2) / ripple(&t1, om1);
    s.info(format!(
        "g 0.05→0.1 at Ω=2+√2g, d=0.005: ripple ratio {r:.3}"
    ));
    s.report("2", "subcritical stabilization and counterrotating ripple");
    Fig2 {
        traj: base,
        ripple: full,
    }
}

fn criterion_3(s: &mut Suite) {
    let traj = s.run("fig5", &with(FIG2, "drive.d = 0.1\nfock.n_max = 40"));
    let breach = matches!(traj.status, Termination::TruncationBreach { .. });
    let end = traj.last().map_or(0.0, |x| x.t);

    // Per-period maxima of n_ph.
    let period = 2.0 * PI;
    let mut maxima: Vec<f64> = Vec::new();
    for sample in &traj.samples {
        let k = (sample.t / period) as usize;
        if k == maxima.len() {
            maxima.push(sample.n_ph);
        } else if let Some(m) = maxima.get_mut(k) {
            *m = m.max(sample.n_ph);
        }
    }
    let complete = &maxima[..maxima.len().saturating_sub(1)];
    let growing = complete.len() >= 3 && complete.windows(2).all(|w| w[1] > w[0]);
    s.check(
        "3-growth",
        breach && growing,
        format!(
            "{}; per-period n_ph maxima rise monotonically over {} periods: {} → {:.3}",
            traj.status,
            complete.len(),
            complete.first().map_or(0.0, |x| *x),
            complete.last().map_or(0.0, |x| *x)
        ),
    );

    let window = traj.trailing_window(0.25).unwrap();
    let mean = window.iter().map(|x| x.w_e).sum::<f64>() / window.len() as f64;
    s.check(
        "3-level",
        (mean - 0.5).abs() <= 0.1,
        format!("windowed w_e mean over the last quarter before t={end:.1}: {mean:.3} (0.5 ± 0.1)"),
    );
    s.report("3", "supercritical growth");
}

fn criterion_4(s: &mut Suite) {
    let kappa = 0.01;
    let sub = s.run(
        "bare-d0.005",
        &with(BARE, "drive.d = 0.005\ndrive.Omega = 2\nfock.n_max = 12"),
    );
    let saturated = steady_envelope(&sub, 0.25).is_ok_and(|e| e.n_ph_stabilized);
    s.check(
        "4-sub",
        sub.status.is_completed() && saturated,
        format!(
            "d=0.005: {}, n_ph={:.4}, stabilized={saturated}",
            sub.status,
            sub.last().unwrap().n_ph
        ),
    );
    let sup = s.run(
        "bare-d0.02",
        &with(BARE, "drive.d = 0.02\ndrive.Omega = 2\nfock.n_max = 40"),
    );
    s.check(
        "4-super",
        matches!(sup.status, Termination::TruncationBreach { .. }),
        format!("d=0.02: {}", sup.status),
    );

    for (modulation, id) in [(2.0, "4-res"), (2.1, "4-det")] {
        let closed = d_crit_res(1.0, modulation, kappa).unwrap();
        let bisected = bisect_d_crit(1.0, modulation, kappa, 0.5, 1e-6).unwrap();
        let reference = if modulation == 2.0 { kappa } else { closed };
        let rate_below = floquet_growth_rate(&MomentParams {
            omega0: 1.0,
            d: 0.9 * bisected,
            modulation,
            kappa,
        })
        .unwrap();
        let rate_above = floquet_growth_rate(&MomentParams {
            omega0: 1.0,
            d: 1.1 * bisected,
            modulation,
            kappa,
        })
        .unwrap();
        s.check(
            id,
            ratio_within(bisected, reference, 0.1) && rate_below < 0.0 && rate_above > 0.0,
            format!(
                "Ω={modulation}: bisected d_crit={bisected:.5}, reference {reference:.5}, closed form {closed:.5}, \
                 growth rate at 0.9/1.1×: {rate_below:.2e}/{rate_above:.2e}"
            ),
        );
    }
    s.report("4", "critical amplitude");
}

fn switch_average(s: &mut Suite, label: &str, text: &str) -> (f64, f64) {
    let spec = RunSpec::from_text(text).unwrap();
    let ops = spec.operators().unwrap();
    let basis = DressedBasis::new(
        &ops,
        &spec.params,
        spec.drive.omega2,
        spec.terms.interaction,
    );
    let from = spec.drive.t_switch + 5.0 * spec.params.rabi_time();
    let (mut sum, mut count) = (0.0, 0usize);
    let traj = spec
        .execute_observed(|t, rho| {
            if t >= from {
                sum += basis.excited_population(rho);
                count += 1;
            }
        })
        .unwrap();
    s.observe(label, &traj);
    let bare: Vec<f64> = traj
        .samples
        .iter()
        .filter(|x| x.t >= from)
        .map(|x| x.w_e)
        .collect();
    (
        sum / count as f64,
        bare.iter().sum::<f64>() / bare.len() as f64,
    )
}

fn criterion_5(s: &mut Suite) {
    for (epsilon, interaction, id) in [(1.6, "jc", "5-casimir"), (1.0, "ajc", "5-lamb")] {
        let spec = SwitchSpec {
            omega1: 1.0,
            omega2: 1.2,
            epsilon,
            g: 0.02,
        };
        let oracle = if interaction == "jc" {
            w_casimir(&spec).unwrap()
        } else {
            w_lamb(&spec).unwrap()
        };
        let text = with(
            SWITCH,
            &format!("epsilon = {epsilon}\nterms.interaction = {interaction}"),
        );
        let (dressed, bare) = switch_average(s, id, &text);
        s.check(
            id,
            ratio_within(dressed, oracle, 0.25),
            format!(
                "ε={epsilon} {interaction}: dressed excited population {dressed:.4e} vs oracle {oracle:.4e} \
                 (ratio {:.3}); bare w_e average {bare:.4e}",
                dressed / oracle
            ),
        );
    }
    s.report("5", "perturbative switch oracles");
}

fn criterion_6(s: &mut Suite) {
    let base = with(FIG2, &format!("drive.Omega = {}", 2.0 + 2f64.sqrt() * 0.05));
    let series = |s: &mut Suite, id: &str, overrides: &[String]| {
        let maxima: Vec<f64> = overrides
            .iter()
            .map(|o| {
                let traj = s.run(id, &with(&base, o));
                steady_envelope(&traj, 0.25).map_or(f64::NAN, |e| {
                    if e.stabilized {
                        e.w_e_max
                    } else {
                        f64::NAN
                    }
                })
            })
            .collect();
        let decreasing = maxima.windows(2).all(|w| w[1] < w[0]);
        let shown: Vec<String> = maxima.iter().map(|m| format!("{m:.5}")).collect();
        s.check(
            id,
            decreasing,
            format!("stabilized w_e_max: {}", shown.join(" > ")),
        );
    };
    let gammas: Vec<String> = [0.01, 0.02, 0.1]
        .iter()
        .map(|g| format!("gamma = {g}\ngamma_phi = {g}"))
        .collect();
    series(s, "6-gamma", &gammas);
    let kappas: Vec<String> = [0.01, 0.02, 0.05]
        .iter()
        .map(|k| format!("kappa = {k}"))
        .collect();
    series(s, "6-kappa", &kappas);
    s.report("6", "decoherence suppression");
}

fn criterion_7(s: &mut Suite, fig3a: &Fig3a, fig2: &Fig2) {
    let rel = |a: f64, b: f64| ((a - b) / b).abs();

    // Rerun the grid points around each maximum.
    let deeper = with(FIG2, "fock.n_max = 16");
    let base = ConfigMap::parse(&deeper).unwrap();
    let mut worst: f64 = 0.0;
    for peak in &fig3a.peaks {
        let idx = [peak.index - 1, peak.index, peak.index + 1];
        let mut y = fig3a.y.clone();
        for &i in &idx {
            let spec = SweepSpec {
                base: base.clone(),
                axis: SweepAxis::Omega,
                values: vec![fig3a.x[i]],
                workers: 1,
            };
            let row = run_point(&spec.point(fig3a.x[i]).unwrap(), fig3a.x[i]);
            s.sweep_points += 1;
            y[i] = row.envelope.map_or(f64::NAN, |e| e.w_e_max);
        }
        let again = find_peaks(&fig3a.x, &y);
        match again.iter().find(|p| p.index == peak.index) {
            Some(p) => {
                worst = worst
                    .max(rel(p.position, peak.position))
                    .max(rel(p.height, peak.height))
            }
            None => worst = f64::INFINITY,
        }
    }
    s.check(
        "7-cutoff-1",
        worst < 0.01,
        format!("n_max 12→16 on the sweep peaks: largest relative change {worst:.2e}"),
    );

    let traj = s.run("fig2-n16", &deeper);
    let (a, b) = (
        steady_envelope(&fig2.traj, 0.25).unwrap(),
        steady_envelope(&traj, 0.25).unwrap(),
    );
    let changes = [
        rel(b.w_e_min, a.w_e_min),
        rel(b.w_e_max, a.w_e_max),
        rel(b.n_ph_mean, a.n_ph_mean),
        rel(ripple(&traj, 2.0), fig2.ripple),
    ];
    let worst = changes.iter().cloned().fold(0.0, f64::max);
    s.check(
        "7-cutoff-2",
        worst < 0.01,
        format!("n_max 12→16 on envelope and ripple: largest relative change {worst:.2e}"),
    );

    let again = s.run("fig2-rerun", FIG2);
    s.check(
        "7-determinism",
        again.samples == fig2.traj.samples && again.metadata.stats == fig2.traj.metadata.stats,
        "rerun of the reference trajectory is bitwise identical".into(),
    );
    s.report("7", "health invariants");
}

fn criterion_8(s: &mut Suite) {
    let text = with(FIG2, "epsilon = 0.9");
    let rows = s.sweep("fig3b", &text, SweepAxis::Omega, linspace(1.85, 2.15, 41));
    let (x, y) = w_e_max_profile(&rows);
    let mut peaks = find_peaks(&x, &y);
    let detail = describe(&peaks);
    peaks.sort_by(|a, b| b.prominence.total_cmp(&a.prominence));
    peaks.truncate(2);
    peaks.sort_by(|a, b| a.position.total_cmp(&b.position));
    let pass = peaks.len() == 2 && peaks[0].width > peaks[1].width;
    s.check("8", pass, format!("Δ=−0.1: {detail}"));
    s.report("8", "peak-width asymmetry");
}

fn health(s: &mut Suite) {
    s.check(
        "7-trace",
        s.max_trace_dev < TRACE_LIMIT,
        format!(
            "max |Tr ρ − 1| over {} trajectories: {:.2e}",
            s.runs, s.max_trace_dev
        ),
    );
    s.check(
        "7-positivity",
        s.min_eig > EIGEN_FLOOR,
        format!("min sampled eigenvalue: {:.2e}", s.min_eig),
    );
    let unhealthy = s.unhealthy.clone();
    s.check(
        "7-sweeps",
        unhealthy.is_empty(),
        format!(
            "{} sweep points ended completed or at the truncation guard{}",
            s.sweep_points,
            if unhealthy.is_empty() {
                String::new()
            } else {
                format!("; unhealthy: {}", unhealthy.join(", "))
            }
        ),
    );
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut s = Suite {
        min_eig: f64::INFINITY,
        ..Suite::default()
    };
    let fig3a = criterion_1(&mut s);
    let fig2 = criterion_2(&mut s);
    criterion_3(&mut s);
    criterion_4(&mut s);
    criterion_5(&mut s);
    criterion_6(&mut s);
    criterion_8(&mut s);
    health(&mut s);
    criterion_7(&mut s, &fig3a, &fig2);

    let unexpected: Vec<&String> = s
        .failed
        .iter()
        .filter(|id| !EXPECTED_RED.contains(&id.as_str()))
        .collect();
    let recovered: Vec<&&str> = EXPECTED_RED
        .iter()
        .filter(|id| !s.failed.contains(**id))
        .collect();
    println!(
        "acceptance finished in {:.0} s",
        started.elapsed().as_secs_f64()
    );
    println!("expected failures: {}", EXPECTED_RED.join(", "));
    if !recovered.is_empty() {
        println!("expected failures that passed: {recovered:?}");
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
