//! Time evolution of the joint system-probe state: exact unitary propagation
//! and a fixed-step RK4 integrator for the Pauli-Lindblad master equation
//!
//! ```text
//! d rho / dt = -i [H, rho] - 1/2 sum_k kappa_k [L_k, [L_k, rho]]
//! ```

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 math is unavailable without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{
    bloch_vector, hermitian_eigensystem, kron, partial_trace, purity, BlochVector, Ket2, Ket4,
    Mat2, Mat4, Subsystem, C64, HERMITIAN_TOL, ONE,
};
use crate::model::LindbladTerm;

/// Default number of RK4 steps across one measurement interval.
pub const DEFAULT_STEPS_PER_RUN: f64 = 20_000.0;
/// Default number of recorded samples per measurement interval.
pub const DEFAULT_SAMPLES: usize = 1000;
/// A run is abandoned once a sampled state drifts this far from a density matrix.
pub const FAILURE_TOL: f64 = 1e-5;

/// Density matrix of system (x) probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointState {
    rho: Mat4,
}

impl JointState {
    pub fn pure(psi: &Ket4) -> Self {
        Self {
            rho: Mat4::projector(psi),
        }
    }

    pub fn product(system: &Ket2, probe: &Ket2) -> Self {
        Self {
            rho: kron(&Mat2::projector(system), &Mat2::projector(probe)),
        }
    }

    /// `rho_S (x) |probe><probe|`: discards system-probe correlations.
    pub fn with_fresh_probe(system: &Mat2, probe: &Ket2) -> Self {
        Self {
            rho: kron(system, &Mat2::projector(probe)),
        }
    }

    pub fn from_density(rho: Mat4) -> Result<Self> {
        let state = Self { rho };
        let d = state.diagnostics();
        if d.trace_error > 1e-9 || d.hermiticity_error > 1e-9 || d.min_eigenvalue < -1e-9 {
            return Err(Error::invalid(alloc::format!(
                "not a density matrix: {d:?}"
            )));
        }
        Ok(state)
    }

    pub fn density(&self) -> &Mat4 {
        &self.rho
    }

    pub fn reduced(&self, keep: Subsystem) -> Mat2 {
        partial_trace(&self.rho, keep)
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        let min_eigenvalue = hermitian_eigensystem(&self.rho.hermitian_part())
            .map(|es| es.values[0])
            .unwrap_or(f64::NAN);
        StateDiagnostics {
            trace_error: (self.rho.trace() - ONE).norm(),
            hermiticity_error: self.rho.hermiticity_error(),
            min_eigenvalue,
        }
    }
}

/// Worst-case departure from a valid density matrix over a set of states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateDiagnostics {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub const CLEAN: Self = Self {
        trace_error: 0.0,
        hermiticity_error: 0.0,
        min_eigenvalue: f64::INFINITY,
    };

    pub fn merge(&self, other: &Self) -> Self {
        Self {
            trace_error: self.trace_error.max(other.trace_error),
            hermiticity_error: self.hermiticity_error.max(other.hermiticity_error),
            min_eigenvalue: self.min_eigenvalue.min(other.min_eigenvalue),
        }
    }

    fn is_failure(&self) -> bool {
        !(self.trace_error <= FAILURE_TOL
            && self.hermiticity_error <= FAILURE_TOL
            && self.min_eigenvalue >= -FAILURE_TOL)
    }
}

/// Sampled observables of a run. All series share the length of `times`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub system_bloch: Vec<BlochVector>,
    pub probe_bloch: Vec<BlochVector>,
    pub system_purity: Vec<f64>,
    pub probe_purity: Vec<f64>,
    /// `<sigma . k>` on the probe.
    pub probe_pointer: Vec<f64>,
    pub diagnostics: StateDiagnostics,
}

impl TrajectoryRecord {
    pub fn new() -> Self {
        Self {
            times: Vec::new(),
            system_bloch: Vec::new(),
            probe_bloch: Vec::new(),
            system_purity: Vec::new(),
            probe_purity: Vec::new(),
            probe_pointer: Vec::new(),
            diagnostics: StateDiagnostics::CLEAN,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, state: &JointState, readout: &BlochVector) -> StateDiagnostics {
        let rho_s = state.reduced(Subsystem::System);
        let rho_p = state.reduced(Subsystem::Probe);
        let probe = bloch_vector(&rho_p);
        self.times.push(t);
        self.system_bloch.push(bloch_vector(&rho_s));
        self.probe_bloch.push(probe);
        self.system_purity.push(purity(&rho_s));
        self.probe_purity.push(purity(&rho_p));
        self.probe_pointer.push(probe.dot(readout));
        let d = state.diagnostics();
        self.diagnostics = self.diagnostics.merge(&d);
        d
    }

    /// Appends `other` shifted by `offset`, dropping samples that would not be
    /// strictly later than the current end.
    pub fn extend_shifted(&mut self, other: &TrajectoryRecord, offset: f64) {
        let last = self.times.last().copied().unwrap_or(f64::NEG_INFINITY);
        for i in 0..other.len() {
            let t = other.times[i] + offset;
            if t <= last {
                continue;
            }
            self.times.push(t);
            self.system_bloch.push(other.system_bloch[i]);
            self.probe_bloch.push(other.probe_bloch[i]);
            self.system_purity.push(other.system_purity[i]);
            self.probe_purity.push(other.probe_purity[i]);
            self.probe_pointer.push(other.probe_pointer[i]);
        }
        self.diagnostics = self.diagnostics.merge(&other.diagnostics);
    }

    /// Returns a copy with every time shifted by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        let mut out = self.clone();
        out.times.iter_mut().for_each(|t| *t += offset);
        out
    }
}

impl Default for TrajectoryRecord {
    fn default() -> Self {
        Self::new()
    }
}

/// Output of an evolution run.
#[derive(Clone, Debug, PartialEq)]
pub struct Evolution {
    pub record: TrajectoryRecord,
    pub final_state: JointState,
}

/// `samples` equally spaced times from 0 to `duration` inclusive.
pub fn time_grid(duration: f64, samples: usize) -> Vec<f64> {
    let intervals = samples.saturating_sub(1).max(1);
    (0..samples)
        .map(|i| {
            if i == intervals {
                duration
            } else {
                duration * i as f64 / intervals as f64
            }
        })
        .collect()
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::invalid("empty time grid"));
    }
    if times[0].is_nan()
        || times[0] < 0.0
        || times.windows(2).any(|w| w[1].is_nan() || w[1] <= w[0])
    {
        return Err(Error::invalid(
            "time grid must start at t >= 0 and increase strictly",
        ));
    }
    Ok(())
}

/// Closed-system evolution `rho(t) = U(t) rho0 U(t)^dagger` with
/// `U(t) = V exp(-i Lambda t) V^dagger`, sampled on `times`.
pub fn unitary_evolve(
    h: &Mat4,
    initial: &JointState,
    times: &[f64],
    readout: &BlochVector,
) -> Result<Evolution> {
    check_grid(times)?;
    let es = hermitian_eigensystem(h)?;
    let mut record = TrajectoryRecord::new();
    let mut state = *initial;
    for &t in times {
        let u = es.propagator(t);
        state = JointState {
            rho: u.conjugate(initial.density()),
        };
        record.push(t, &state, readout);
    }
    Ok(Evolution {
        record,
        final_state: state,
    })
}

/// Right-hand side of the master equation in double-commutator form.
pub fn lindblad_rhs(rho: &Mat4, h: &Mat4, ops: &[LindbladTerm]) -> Mat4 {
    let minus_i = C64::new(0.0, -1.0);
    let mut d = h.commutator(rho).scale(minus_i);
    for term in ops.iter().filter(|t| t.rate != 0.0) {
        let inner = term.op.commutator(rho);
        d += term.op.commutator(&inner) * (-0.5 * term.rate);
    }
    d
}

/// Step-size and sampling controls for [`lindblad_evolve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    /// Largest RK4 step; `None` means `duration / 20000`.
    pub dt: Option<f64>,
    /// Recorded samples including both endpoints.
    pub samples: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            dt: None,
            samples: DEFAULT_SAMPLES,
        }
    }
}

impl StepControl {
    pub fn resolve_dt(&self, duration: f64) -> f64 {
        self.dt.unwrap_or(duration / DEFAULT_STEPS_PER_RUN)
    }
}

fn rk4_step(rho: &Mat4, h: &Mat4, ops: &[LindbladTerm], dt: f64) -> Mat4 {
    let k1 = lindblad_rhs(rho, h, ops);
    let k2 = lindblad_rhs(&(*rho + k1 * (dt / 2.0)), h, ops);
    let k3 = lindblad_rhs(&(*rho + k2 * (dt / 2.0)), h, ops);
    let k4 = lindblad_rhs(&(*rho + k3 * dt), h, ops);
    *rho + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Integrates the master equation over `[0, duration]` with classical RK4.
///
/// Sample times fall on step boundaries, so the step actually used is
/// `(duration / (samples - 1)) / ceil(...)`, never larger than the requested
/// `dt`. The state is re-symmetrized after every step.
pub fn lindblad_evolve(
    initial: &JointState,
    h: &Mat4,
    ops: &[LindbladTerm],
    duration: f64,
    control: &StepControl,
    readout: &BlochVector,
) -> Result<Evolution> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::invalid(alloc::format!(
            "duration {duration} must be positive"
        )));
    }
    if control.samples < 2 {
        return Err(Error::invalid("at least two samples are required"));
    }
    let dt = control.resolve_dt(duration);
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(alloc::format!(
            "step size {dt} must be positive"
        )));
    }
    h.check_hermitian(HERMITIAN_TOL)?;
    for term in ops {
        term.op.check_hermitian(HERMITIAN_TOL)?;
        if term.rate.is_nan() || term.rate < 0.0 {
            return Err(Error::invalid("Lindblad rates must be non-negative"));
        }
    }

    let times = time_grid(duration, control.samples);
    let mut record = TrajectoryRecord::new();
    let mut rho = *initial.density();
    record.push(0.0, initial, readout);

    let mut asymmetry: f64 = 0.0;
    for w in times.windows(2) {
        let span = w[1] - w[0];
        let substeps = (span / dt).ceil().max(1.0) as usize;
        let step = span / substeps as f64;
        for _ in 0..substeps {
            rho = rk4_step(&rho, h, ops, step);
            asymmetry = asymmetry.max(rho.hermiticity_error());
            rho = rho.hermitian_part();
        }
        let state = JointState { rho };
        let mut d = record.push(w[1], &state, readout);
        d.hermiticity_error = d.hermiticity_error.max(asymmetry);
        record.diagnostics = record.diagnostics.merge(&d);
        if d.is_failure() {
            return Err(Error::IntegrationFailure {
                time: w[1],
                trace_error: d.trace_error,
                hermiticity_error: d.hermiticity_error,
                min_eigenvalue: d.min_eigenvalue,
            });
        }
    }
    log::debug!(
        "lindblad_evolve: {} samples, dt <= {dt:e}, max pre-symmetrization asymmetry {asymmetry:e}",
        control.samples
    );
    Ok(Evolution {
        record,
        final_state: JointState { rho },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testing::*;
    use crate::linalg::{Matrix, SIGMA_X, SIGMA_Z};
    use crate::model::{build_hamiltonian, EnvironmentConfig, MeasurementConfig, KET_ZERO};
    use core::f64::consts::FRAC_1_SQRT_2;
    use rand::Rng;

    fn diagonal_observable(xi: f64) -> MeasurementConfig {
        MeasurementConfig::new(xi)
            .with_measured_axis(BlochVector::new(1.0, 1.0, 1.0))
            .unwrap()
    }

    #[test]
    fn protection_only_keeps_ground_state() {
        let h = kron(&SIGMA_Z, &Mat2::identity()) * 0.5;
        let start = JointState::product(&KET_ZERO, &KET_ZERO);
        let ev = unitary_evolve(&h, &start, &time_grid(7.0, 50), &BlochVector::X).unwrap();
        for (s, p) in ev.record.system_bloch.iter().zip(&ev.record.probe_bloch) {
            assert!((s.z - 1.0).abs() < 1e-14 && s.x.abs() < 1e-14);
            assert!((p.z - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn unitary_evolution_preserves_spectrum_and_purity() {
        let mut r = rng(30);
        for _ in 0..20 {
            let h = random_hermitian::<4>(&mut r);
            let rho0 = random_density::<4>(&mut r);
            let start = JointState::from_density(rho0).unwrap();
            let ev = unitary_evolve(&h, &start, &time_grid(3.0, 20), &BlochVector::X).unwrap();
            let before = hermitian_eigensystem(&rho0).unwrap().values;
            let after = hermitian_eigensystem(ev.final_state.density())
                .unwrap()
                .values;
            for (a, b) in before.iter().zip(&after) {
                assert!((a - b).abs() < 1e-9);
            }
            let pure = JointState::pure(&random_ket::<4>(&mut r));
            let ev = unitary_evolve(&h, &pure, &time_grid(3.0, 20), &BlochVector::X).unwrap();
            assert!((purity(ev.final_state.density()) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_or_unordered_grid_is_rejected() {
        let start = JointState::product(&KET_ZERO, &KET_ZERO);
        let h = Mat4::zeros();
        assert!(unitary_evolve(&h, &start, &[], &BlochVector::X).is_err());
        assert!(unitary_evolve(&h, &start, &[0.0, 1.0, 1.0], &BlochVector::X).is_err());
    }

    #[test]
    fn rhs_without_dissipation_is_a_commutator() {
        let mut r = rng(31);
        let h = random_hermitian::<4>(&mut r);
        let rho = random_density::<4>(&mut r);
        let term = LindbladTerm {
            op: kron(&SIGMA_X, &Mat2::identity()),
            rate: 0.0,
        };
        let want = h.commutator(&rho).scale(C64::new(0.0, -1.0));
        assert!(lindblad_rhs(&rho, &h, &[term]).max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn pauli_dissipator_identity() {
        // For L^2 = I the double commutator equals 2 (L rho L - rho).
        let mut r = rng(32);
        for _ in 0..100 {
            let l = kron(&random_unit(&mut r).pauli(), &random_unit(&mut r).pauli());
            let kappa = r.gen_range(0.0..1.0);
            let rho = random_density::<4>(&mut r);
            let got = lindblad_rhs(&rho, &Mat4::zeros(), &[LindbladTerm { op: l, rate: kappa }]);
            let want = (l * rho * l - rho) * kappa;
            assert!(got.max_abs_diff(&want) <= 1e-12);
        }
    }

    #[test]
    fn diagonal_state_is_a_fixed_point_of_dephasing() {
        let rho = Matrix::diagonal(&[0.4, 0.3, 0.2, 0.1].map(|x| C64::new(x, 0.0)));
        let term = LindbladTerm {
            op: kron(&SIGMA_Z, &Mat2::identity()),
            rate: 0.7,
        };
        assert_eq!(lindblad_rhs(&rho, &Mat4::zeros(), &[term]), Mat4::zeros());
    }

    #[test]
    fn dephasing_decays_coherence_at_twice_the_rate() {
        // Closed form for H = 0, L = sigma_z (x) I: <sigma_x>_S(t) = exp(-2 kappa t).
        let kappa = 0.3;
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let start = JointState::product(&[h, h], &KET_ZERO);
        let ops = [LindbladTerm {
            op: kron(&SIGMA_Z, &Mat2::identity()),
            rate: kappa,
        }];
        let control = StepControl {
            dt: Some(1e-3),
            samples: 11,
        };
        let ev =
            lindblad_evolve(&start, &Mat4::zeros(), &ops, 2.0, &control, &BlochVector::X).unwrap();
        for (t, b) in ev.record.times.iter().zip(&ev.record.system_bloch) {
            assert!((b.x - (-2.0 * kappa * t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_system_limit_matches_unitary() {
        let cfg = diagonal_observable(0.1);
        let h = build_hamiltonian(&cfg, None).unwrap();
        let env = EnvironmentConfig::new(0.0, 0.0, BlochVector::X, BlochVector::X).unwrap();
        let ops = crate::model::build_lindblad_ops(&env).unwrap();
        let start = JointState::product(&cfg.system_init, &cfg.probe_init);
        let t = cfg.duration();
        let control = StepControl::default();
        let open = lindblad_evolve(&start, &h, &ops, t, &control, &BlochVector::X).unwrap();
        let closed =
            unitary_evolve(&h, &start, &time_grid(t, control.samples), &BlochVector::X).unwrap();
        assert_eq!(open.record.times, closed.record.times);
        let (a, b) = (&open.record, &closed.record);
        for i in 0..a.len() {
            for (u, v) in [
                (a.system_bloch[i], b.system_bloch[i]),
                (a.probe_bloch[i], b.probe_bloch[i]),
            ] {
                assert!(
                    (u.x - v.x).abs() < 1e-8
                        && (u.y - v.y).abs() < 1e-8
                        && (u.z - v.z).abs() < 1e-8
                );
            }
        }
    }

    #[test]
    fn coarse_steps_are_reported_as_integration_failure() {
        let cfg = diagonal_observable(0.1);
        let h = build_hamiltonian(&cfg, None).unwrap();
        let start = JointState::product(&cfg.system_init, &cfg.probe_init);
        let control = StepControl {
            dt: Some(5.0),
            samples: 2,
        };
        let err = lindblad_evolve(&start, &h, &[], 200.0, &control, &BlochVector::X).unwrap_err();
        assert!(matches!(err, Error::IntegrationFailure { .. }), "{err:?}");
    }

    #[test]
    fn invalid_controls_are_rejected() {
        let start = JointState::product(&KET_ZERO, &KET_ZERO);
        let h = Mat4::zeros();
        let bad = [
            (
                1.0,
                StepControl {
                    dt: Some(0.0),
                    samples: 10,
                },
            ),
            (
                1.0,
                StepControl {
                    dt: None,
                    samples: 1,
                },
            ),
            (0.0, StepControl::default()),
        ];
        for (t, c) in bad {
            assert!(lindblad_evolve(&start, &h, &[], t, &c, &BlochVector::X).is_err());
        }
        let mut skew = Mat4::zeros();
        skew.0[0][1] = ONE;
        assert!(lindblad_evolve(
            &start,
            &skew,
            &[],
            1.0,
            &StepControl::default(),
            &BlochVector::X
        )
        .is_err());
    }

    #[test]
    fn from_density_rejects_invalid_matrices() {
        let mut rho = Mat4::identity() * 0.5;
        assert!(JointState::from_density(rho).is_err());
        rho = Mat4::identity() * 0.25;
        rho.0[0][1] = C64::new(0.1, 0.0);
        assert!(JointState::from_density(rho).is_err());
        let neg = Matrix::diagonal(&[1.2, -0.2, 0.0, 0.0].map(|x| C64::new(x, 0.0)));
        assert!(JointState::from_density(neg).is_err());
    }

    #[test]
    fn time_grid_endpoints() {
        let g = time_grid(10.0, 1000);
        assert_eq!(g.len(), 1000);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 10.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
