//! Measurement protocols and the figures of merit used to judge them.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 math is unavailable without std
use num_traits::Float;

use crate::analytic::ideal_pointer_for;
use crate::error::{Error, Result};
use crate::evolve::{
    lindblad_evolve, time_grid, unitary_evolve, Evolution, JointState, StepControl,
    TrajectoryRecord,
};
use crate::linalg::{
    bloch_vector, max_eigenvalue, propagator, purity, BlochVector, Mat2, Subsystem,
};
use crate::model::{
    build_hamiltonian, build_lindblad_ops, EnvironmentConfig, MeasurementConfig, ProbeSelfConfig,
};

/// Below this magnitude of the ideal value deviations are reported absolutely.
pub const RELATIVE_DEVIATION_FLOOR: f64 = 0.05;

/// Probe readout after undoing the free probe rotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectedReadout {
    pub probe_bloch: BlochVector,
    pub pointer: f64,
    pub deviation: f64,
}

/// Figures of merit of a single measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementReport {
    /// `1 - min_t Tr[rho_S(t) sigma_z]` over the sampled trajectory.
    pub disturbance: f64,
    /// `Tr(rho^2)` of the reduced states at `t = T`.
    pub final_system_purity: f64,
    pub final_probe_purity: f64,
    /// Largest eigenvalue of the reduced states at `t = T`.
    pub final_system_max_eigenvalue: f64,
    pub final_probe_max_eigenvalue: f64,
    pub final_system_bloch: BlochVector,
    pub final_probe_bloch: BlochVector,
    /// `<sigma . k>` on the probe at `t = T`.
    pub final_pointer: f64,
    pub ideal_pointer: f64,
    pub pointer_deviation: f64,
    /// Present when the run included intrinsic probe dynamics.
    pub counter_rotated: Option<CorrectedReadout>,
    pub trajectory: TrajectoryRecord,
}

/// Figures of merit of a chain of measurements on one system.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainReport {
    pub per_cycle: Vec<MeasurementReport>,
    /// Disturbance over the whole chain `[0, N T]`.
    pub cumulative_disturbance: f64,
    /// Deviation of the final cycle.
    pub worst_case_deviation: f64,
    /// Mean deviation over all cycles.
    pub average_deviation: f64,
    pub final_system_purity: f64,
    pub final_system_max_eigenvalue: f64,
    /// Concatenated trajectory; each cycle boundary appears once.
    pub trajectory: TrajectoryRecord,
}

pub fn disturbance(traj: &TrajectoryRecord) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::invalid("disturbance of an empty trajectory"));
    }
    let min_z = traj
        .system_bloch
        .iter()
        .map(|b| b.z)
        .fold(f64::INFINITY, f64::min);
    Ok(1.0 - min_z)
}

/// `|actual - ideal| / |ideal|`, or `|actual - ideal|` when the ideal value is
/// too small to divide by.
pub fn pointer_deviation(actual: f64, ideal: f64) -> f64 {
    let diff = (actual - ideal).abs();
    if ideal.abs() > RELATIVE_DEVIATION_FLOOR {
        diff / ideal.abs()
    } else {
        diff
    }
}

/// Undoes the free probe evolution `exp(-i H_P T)` by conjugating with
/// `exp(+i (omega_P T / 2) sigma . r)`.
pub fn apply_counter_rotation(probe_state: &Mat2, probe: &ProbeSelfConfig, duration: f64) -> Mat2 {
    let half_angle = probe.omega_p(duration) * duration / 2.0;
    // exp(+i a sigma.r) is the propagator of sigma.r at time -a
    let u = propagator(&probe.axis.pauli(), -half_angle)
        .expect("sigma . r is Hermitian for a unit axis");
    u.conjugate(probe_state)
}

fn evolve_cycle(
    cfg: &MeasurementConfig,
    probe: Option<&ProbeSelfConfig>,
    env: Option<&EnvironmentConfig>,
    initial: &JointState,
    control: &StepControl,
) -> Result<Evolution> {
    let h = build_hamiltonian(cfg, probe)?;
    let readout = cfg.readout()?;
    let t = cfg.duration();
    match env {
        None => unitary_evolve(&h, initial, &time_grid(t, control.samples), &readout),
        Some(env) => {
            let ops = build_lindblad_ops(env)?;
            lindblad_evolve(initial, &h, &ops, t, control, &readout)
        }
    }
}

fn summarize(
    ev: Evolution,
    cfg: &MeasurementConfig,
    probe: Option<&ProbeSelfConfig>,
) -> Result<MeasurementReport> {
    let readout = cfg.readout()?;
    let rho_s = ev.final_state.reduced(Subsystem::System);
    let rho_p = ev.final_state.reduced(Subsystem::Probe);
    let probe_bloch = bloch_vector(&rho_p);
    let final_pointer = probe_bloch.dot(&readout);
    let ideal_pointer = ideal_pointer_for(cfg);
    let counter_rotated = probe.map(|p| {
        let corrected = bloch_vector(&apply_counter_rotation(&rho_p, p, cfg.duration()));
        let pointer = corrected.dot(&readout);
        CorrectedReadout {
            probe_bloch: corrected,
            pointer,
            deviation: pointer_deviation(pointer, ideal_pointer),
        }
    });
    Ok(MeasurementReport {
        disturbance: disturbance(&ev.record)?,
        final_system_purity: purity(&rho_s),
        final_probe_purity: purity(&rho_p),
        final_system_max_eigenvalue: max_eigenvalue(&rho_s),
        final_probe_max_eigenvalue: max_eigenvalue(&rho_p),
        final_system_bloch: bloch_vector(&rho_s),
        final_probe_bloch: probe_bloch,
        final_pointer,
        ideal_pointer,
        pointer_deviation: pointer_deviation(final_pointer, ideal_pointer),
        counter_rotated,
        trajectory: ev.record,
    })
}

fn validate_all(
    cfg: &MeasurementConfig,
    probe: Option<&ProbeSelfConfig>,
    env: Option<&EnvironmentConfig>,
) -> Result<()> {
    cfg.validate()?;
    if let Some(p) = probe {
        p.validate()?;
    }
    if let Some(e) = env {
        e.validate()?;
    }
    Ok(())
}

/// One measurement: prepare both qubits, interact for `T`, read out `sigma . k`.
/// Closed runs use exact propagation; an environment switches to the master
/// equation.
pub fn run_single(
    cfg: &MeasurementConfig,
    probe: Option<&ProbeSelfConfig>,
    env: Option<&EnvironmentConfig>,
    control: &StepControl,
) -> Result<MeasurementReport> {
    validate_all(cfg, probe, env)?;
    let start = JointState::product(&cfg.system_init, &cfg.probe_init);
    let ev = evolve_cycle(cfg, probe, env, &start, control)?;
    summarize(ev, cfg, probe)
}

/// `cycles` consecutive measurements on one system. The probe is re-prepared
/// in `probe_init` at the start of every cycle; the system state carries over.
pub fn run_repeated(
    cfg: &MeasurementConfig,
    cycles: usize,
    probe: Option<&ProbeSelfConfig>,
    env: Option<&EnvironmentConfig>,
    control: &StepControl,
) -> Result<ChainReport> {
    if cycles == 0 {
        return Err(Error::invalid(
            "a measurement chain needs at least one cycle",
        ));
    }
    validate_all(cfg, probe, env)?;
    let t = cfg.duration();
    let mut state = JointState::product(&cfg.system_init, &cfg.probe_init);
    let mut per_cycle = Vec::with_capacity(cycles);
    let mut trajectory = TrajectoryRecord::new();
    for c in 0..cycles {
        if c > 0 {
            let rho_s = state.reduced(Subsystem::System);
            state = JointState::with_fresh_probe(&rho_s, &cfg.probe_init);
        }
        let ev = evolve_cycle(cfg, probe, env, &state, control)?;
        state = ev.final_state;
        let offset = c as f64 * t;
        let mut report = summarize(ev, cfg, probe)?;
        if c > 0 {
            report.trajectory = report.trajectory.shifted(offset);
        }
        trajectory.extend_shifted(&report.trajectory, 0.0);
        per_cycle.push(report);
    }
    let last = per_cycle.last().expect("cycles >= 1");
    let cumulative_disturbance = per_cycle
        .iter()
        .map(|r| r.disturbance)
        .fold(f64::NEG_INFINITY, f64::max);
    let average_deviation =
        per_cycle.iter().map(|r| r.pointer_deviation).sum::<f64>() / cycles as f64;
    Ok(ChainReport {
        cumulative_disturbance,
        worst_case_deviation: last.pointer_deviation,
        average_deviation,
        final_system_purity: last.final_system_purity,
        final_system_max_eigenvalue: last.final_system_max_eigenvalue,
        trajectory,
        per_cycle,
    })
}
