//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! non-zero status if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;

use qprobe_core::analytic::exact_final_state_for;
use qprobe_core::evolve::{lindblad_evolve, JointState, StepControl};
use qprobe_core::iontrap::{interaction_time, to_measurement_config, IonTrapParams};
use qprobe_core::linalg::{fidelity, kron_ket, propagator, BlochVector, C64};
use qprobe_core::model::{
    build_hamiltonian, build_lindblad_ops, EnvironmentConfig, MeasurementConfig, ProbeSelfConfig,
    KET_ZERO,
};
use qprobe_core::protocol::{run_repeated, run_single, ChainReport, MeasurementReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Check {
    label: String,
    value: f64,
    lo: f64,
    hi: f64,
}

impl Check {
    fn passed(&self) -> bool {
        (self.lo..=self.hi).contains(&self.value)
    }
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn within(&mut self, label: impl Into<String>, value: f64, lo: f64, hi: f64) {
        self.0.push(Check {
            label: label.into(),
            value,
            lo,
            hi,
        });
    }

    fn near(&mut self, label: impl Into<String>, value: f64, target: f64, tol: f64) {
        self.within(label, value, target - tol, target + tol);
    }

    fn at_most(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.within(label, value, f64::NEG_INFINITY, bound);
    }

    fn holds(&mut self, label: impl Into<String>, cond: bool) {
        self.within(label, if cond { 1.0 } else { 0.0 }, 1.0, 1.0);
    }
}

fn diagonal_axis() -> BlochVector {
    BlochVector::new(1.0, 1.0, 1.0)
}

fn base(xi: f64) -> MeasurementConfig {
    MeasurementConfig::new(xi)
        .with_measured_axis(diagonal_axis())
        .expect("nonzero axis")
}

fn single(xi: f64) -> MeasurementReport {
    run_single(&base(xi), None, None, &StepControl::default()).expect("closed run")
}

fn with_probe(xi: f64, delta_p: f64, axis: BlochVector) -> MeasurementReport {
    let p = ProbeSelfConfig::new(delta_p, axis).expect("valid probe");
    run_single(&base(xi), Some(&p), None, &StepControl::default()).expect("closed run")
}

fn with_env(kappa_s: f64, kappa_p: f64, axis: BlochVector) -> MeasurementReport {
    let env = EnvironmentConfig::new(kappa_s, kappa_p, axis, axis).expect("valid environment");
    run_single(&base(0.1), None, Some(&env), &StepControl::default()).expect("open run")
}

fn chain(xi: f64, n: usize) -> ChainReport {
    run_repeated(&base(xi), n, None, None, &StepControl::default()).expect("chain")
}

/// Every run the regression criteria look at, computed once.
struct Runs {
    strong: MeasurementReport,
    moderate: MeasurementReport,
    weak: MeasurementReport,
    chain_moderate: ChainReport,
    chain_half: ChainReport,
    chain_weak: ChainReport,
    probe_y: MeasurementReport,
    probe_x: MeasurementReport,
    probe_diag: MeasurementReport,
    env_z: MeasurementReport,
    env_system: MeasurementReport,
    env_probe: MeasurementReport,
    env_both: MeasurementReport,
}

impl Runs {
    fn compute() -> Self {
        std::thread::scope(|s| {
            let env_z = s.spawn(|| with_env(0.02, 0.0, BlochVector::Z));
            let env_system = s.spawn(|| with_env(0.02, 0.0, BlochVector::X));
            let env_probe = s.spawn(|| with_env(0.0, 0.02, BlochVector::X));
            let env_both = s.spawn(|| with_env(0.02, 0.02, BlochVector::X));
            Runs {
                strong: single(0.5),
                moderate: single(0.1),
                weak: single(0.01),
                chain_moderate: chain(0.1, 10),
                chain_half: chain(0.05, 10),
                chain_weak: chain(0.01, 10),
                probe_y: with_probe(0.1, 0.3, BlochVector::Y),
                probe_x: with_probe(0.1, 0.3, BlochVector::X),
                probe_diag: with_probe(0.1, 0.05, diagonal_axis()),
                env_z: env_z.join().unwrap(),
                env_system: env_system.join().unwrap(),
                env_probe: env_probe.join().unwrap(),
                env_both: env_both.join().unwrap(),
            }
        })
    }

    fn closed(&self) -> Vec<&MeasurementReport> {
        let mut out = vec![&self.strong, &self.moderate, &self.weak];
        for c in [&self.chain_moderate, &self.chain_half, &self.chain_weak] {
            out.extend(c.per_cycle.iter());
        }
        out
    }

    fn all(&self) -> Vec<&MeasurementReport> {
        let mut out = self.closed();
        out.extend([
            &self.probe_y,
            &self.probe_x,
            &self.probe_diag,
            &self.env_z,
            &self.env_system,
            &self.env_probe,
            &self.env_both,
        ]);
        out
    }
}

fn measurement_strength(runs: &Runs, c: &mut Checks) {
    let (s, m) = (&runs.strong, &runs.moderate);
    c.near("disturbance xi=0.5", s.disturbance, 0.49, 0.02);
    c.near("disturbance xi=0.1", m.disturbance, 0.03, 0.01);
    c.near("deviation xi=0.5", s.pointer_deviation, 0.22, 0.02);
    c.near("deviation xi=0.1", m.pointer_deviation, 0.015, 0.005);
    c.near("purity xi=0.5", s.final_system_max_eigenvalue, 0.82, 0.01);
    c.near("purity xi=0.1", m.final_system_max_eigenvalue, 0.99, 0.005);
}

fn repeated(runs: &Runs, c: &mut Checks) {
    let a = &runs.chain_moderate;
    c.near(
        "xi=0.1 cumulative disturbance",
        a.cumulative_disturbance,
        0.25,
        0.03,
    );
    c.near(
        "xi=0.1 system purity",
        a.final_system_max_eigenvalue,
        0.88,
        0.02,
    );
    c.near(
        "xi=0.1 worst-case deviation",
        a.worst_case_deviation,
        0.24,
        0.03,
    );
    c.near("xi=0.1 average deviation", a.average_deviation, 0.14, 0.03);
    let b = &runs.chain_half;
    c.near(
        "xi=0.05 cumulative disturbance",
        b.cumulative_disturbance,
        0.016,
        0.005,
    );
    c.near(
        "xi=0.05 worst-case deviation",
        b.worst_case_deviation,
        0.007,
        0.005,
    );
    let (w, one) = (&runs.chain_weak, &runs.weak);
    c.near(
        "xi=0.01 disturbance vs single",
        w.cumulative_disturbance,
        one.disturbance,
        0.005,
    );
    c.near(
        "xi=0.01 worst case vs single",
        w.worst_case_deviation,
        one.pointer_deviation,
        0.005,
    );
    c.near(
        "xi=0.01 average vs single",
        w.average_deviation,
        one.pointer_deviation,
        0.005,
    );
    c.near(
        "xi=0.01 purity vs single",
        w.final_system_max_eigenvalue,
        one.final_system_max_eigenvalue,
        0.005,
    );
}

fn probe_dynamics(runs: &Runs, c: &mut Checks) {
    c.near("deviation r=y", runs.probe_y.pointer_deviation, 0.22, 0.02);
    c.near("deviation r=x", runs.probe_x.pointer_deviation, 0.05, 0.015);
    c.near(
        "deviation r=diag",
        runs.probe_diag.pointer_deviation,
        0.02,
        0.01,
    );
    for (name, r) in [
        ("r=y", &runs.probe_y),
        ("r=x", &runs.probe_x),
        ("r=diag", &runs.probe_diag),
    ] {
        c.near(
            format!("purity {name}"),
            r.final_system_max_eigenvalue,
            0.99,
            0.005,
        );
    }
    let fixed_y = runs
        .probe_y
        .counter_rotated
        .expect("probe dynamics present");
    c.near(
        "counter-rotated deviation r=y",
        fixed_y.deviation,
        0.02,
        0.01,
    );
    let fixed_x = runs
        .probe_x
        .counter_rotated
        .expect("probe dynamics present");
    c.near(
        "counter-rotation keeps <sigma_x> for r=x",
        fixed_x.probe_bloch.x,
        runs.probe_x.final_probe_bloch.x,
        1e-12,
    );
}

fn environment(runs: &Runs, c: &mut Checks) {
    let (z, closed) = (&runs.env_z, &runs.moderate);
    c.near(
        "z coupling disturbance",
        z.disturbance,
        closed.disturbance,
        0.01,
    );
    c.near(
        "z coupling deviation",
        z.pointer_deviation,
        closed.pointer_deviation,
        0.01,
    );
    c.near(
        "z coupling system purity",
        z.final_system_max_eigenvalue,
        closed.final_system_max_eigenvalue,
        0.01,
    );
    c.near(
        "z coupling probe purity",
        z.final_probe_max_eigenvalue,
        closed.final_probe_max_eigenvalue,
        0.01,
    );
    let s = &runs.env_system;
    c.near(
        "system only: system purity",
        s.final_system_max_eigenvalue,
        0.83,
        0.02,
    );
    c.near("system only: disturbance", s.disturbance, 0.35, 0.02);
    c.near("system only: deviation", s.pointer_deviation, 0.19, 0.02);
    c.near(
        "system only: probe purity",
        s.final_probe_max_eigenvalue,
        0.95,
        0.02,
    );
    let p = &runs.env_probe;
    c.near(
        "probe only: probe purity",
        p.final_probe_max_eigenvalue,
        0.87,
        0.02,
    );
    c.near("probe only: deviation", p.pointer_deviation, 0.19, 0.02);
    let b = &runs.env_both;
    c.near(
        "both: probe purity",
        b.final_probe_max_eigenvalue,
        0.83,
        0.02,
    );
    c.near("both: deviation", b.pointer_deviation, 0.32, 0.03);
}

fn random_unit(rng: &mut ChaCha8Rng) -> BlochVector {
    loop {
        let v = BlochVector::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if (0.1..=1.0).contains(&v.norm()) {
            return v.normalized().unwrap();
        }
    }
}

fn oracle(c: &mut Checks) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = C64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI)) * rng.gen_range(0.0..1.0);
        let b = C64::from_polar((1.0 - a.norm_sqr()).sqrt(), rng.gen_range(0.0..2.0 * PI));
        let mut cfg = MeasurementConfig::new(rng.gen_range(0.05..2.0))
            .with_angles(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI))
            .with_lambda(rng.gen_range(0.0..PI / 2.0))
            .with_probe_axis(random_unit(&mut rng))
            .unwrap();
        cfg.probe_init = [a, b];
        cfg.readout_axis = Some(BlochVector::X);
        let exact = exact_final_state_for(&cfg).expect("valid config");
        let u = propagator(&build_hamiltonian(&cfg, None).unwrap(), cfg.duration()).unwrap();
        let numeric = u.apply(&kron_ket(&KET_ZERO, &cfg.probe_init));
        worst = worst.max(1.0 - fidelity(&exact, &numeric));
    }
    c.at_most("max infidelity over 100 configs", worst, 1e-9);
}

fn first_order(c: &mut Checks) {
    for xi in [0.005, 0.01] {
        let ratio = single(2.0 * xi).pointer_deviation / single(xi).pointer_deviation;
        c.within(format!("deviation ratio at xi={xi}"), ratio, 3.5, 4.5);
    }
}

fn structural(runs: &Runs, c: &mut Checks) {
    let (mut trace, mut herm, mut neg) = (0.0f64, 0.0f64, 0.0f64);
    for r in runs.all() {
        let d = r.trajectory.diagnostics;
        trace = trace.max(d.trace_error);
        herm = herm.max(d.hermiticity_error);
        neg = neg.max(-d.min_eigenvalue);
    }
    c.at_most("max trace error", trace, 1e-9);
    c.at_most("max hermiticity error", herm, 1e-9);
    c.at_most("max negative eigenvalue", neg.max(0.0), 1e-9);
    let sy = runs
        .closed()
        .iter()
        .flat_map(|r| r.trajectory.probe_bloch.iter().map(|b| b.y.abs()))
        .fold(0.0f64, f64::max);
    c.at_most("max |<sigma_y>| of the probe, closed runs", sy, 1e-8);
    c.within(
        "RK4 convergence factor",
        rk4_convergence_factor(),
        12.0,
        20.0,
    );
}

fn rk4_convergence_factor() -> f64 {
    let cfg = base(0.1);
    let t = cfg.duration();
    let env = EnvironmentConfig::new(0.02, 0.02, BlochVector::X, BlochVector::X).unwrap();
    let h = build_hamiltonian(&cfg, None).unwrap();
    let ops = build_lindblad_ops(&env).unwrap();
    let start = JointState::product(&cfg.system_init, &cfg.probe_init);
    let readout = cfg.readout().unwrap();
    // one step per sample interval, so the step is exactly t / steps
    let run = |steps: usize| {
        let control = StepControl {
            dt: Some(t),
            samples: steps + 1,
        };
        *lindblad_evolve(&start, &h, &ops, t, &control, &readout)
            .unwrap()
            .final_state
            .density()
    };
    let reference = run(3200);
    let coarse = run(200).max_abs_diff(&reference);
    let fine = run(400).max_abs_diff(&reference);
    coarse / fine
}

fn ion_trap(c: &mut Checks) {
    let six = IonTrapParams::new(400.0, 2400.0);
    let xi6 = to_measurement_config(&six).unwrap().config.xi;
    c.holds("xi at Delta1 = 6 J0 equals 1/6 exactly", xi6 == 1.0 / 6.0);
    c.holds("1/6 rounds to 0.17", (xi6 * 100.0).round() == 17.0);
    let eight = IonTrapParams {
        delta_range_multiple: 8.0,
        ..IonTrapParams::new(400.0, 3200.0)
    };
    let xi8 = to_measurement_config(&eight).unwrap().config.xi;
    c.holds("xi at Delta1 = 8 J0 equals 1/8 exactly", xi8 == 0.125);
    c.holds("1/8 rounds to 0.13", (xi8 * 100.0).round() == 13.0);
    let t = interaction_time(&IonTrapParams::new(400.0, 400.0));
    c.near(
        "T(J0 = 400/s) relative error",
        (t - PI / 1600.0).abs() / t,
        0.0,
        1e-12,
    );
    c.near("T(J0 = 400/s) in ms", t * 1e3, 1.96, 0.005);
}

type Criterion<'a> = (&'static str, Box<dyn Fn(&mut Checks) + 'a>);

fn main() -> ExitCode {
    let start = std::time::Instant::now();
    let runs = Runs::compute();
    let criteria: [Criterion; 8] = [
        (
            "measurement strength regression",
            Box::new(|c| measurement_strength(&runs, c)),
        ),
        (
            "repeated measurement regression",
            Box::new(|c| repeated(&runs, c)),
        ),
        (
            "intrinsic probe dynamics regression",
            Box::new(|c| probe_dynamics(&runs, c)),
        ),
        (
            "environment regression",
            Box::new(|c| environment(&runs, c)),
        ),
        (
            "closed form against numerical propagation",
            Box::new(oracle),
        ),
        ("first-order accuracy in xi", Box::new(first_order)),
        ("structural invariants", Box::new(|c| structural(&runs, c))),
        ("ion-trap mapping", Box::new(ion_trap)),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let mut checks = Checks::default();
        run(&mut checks);
        let bad: Vec<&Check> = checks.0.iter().filter(|c| !c.passed()).collect();
        let verdict = if bad.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "criterion {}: {verdict} {title} ({}/{} checks)",
            i + 1,
            checks.0.len() - bad.len(),
            checks.0.len()
        );
        for c in &checks.0 {
            let mark = if c.passed() { "ok  " } else { "FAIL" };
            println!(
                "    {mark} {}: {:.6e} in [{:.6e}, {:.6e}]",
                c.label, c.value, c.lo, c.hi
            );
        }
        if !bad.is_empty() {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of 8 criteria passed in {:.1?}",
        8 - failed,
        start.elapsed()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
