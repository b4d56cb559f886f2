//! Measurement configurations and the Hamiltonians and Lindblad operators they
//! define. Natural units throughout: hbar = 1, omega_0 = 1, times in 1/omega_0.

use core::f64::consts::{FRAC_PI_4, PI};

#[allow(unused_imports)] // inherent f64 math is unavailable without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{
    bloch_vector, ket_norm, kron, BlochVector, Ket2, Mat2, Mat4, ONE, SIGMA_Z, ZERO,
};

const UNIT_TOL: f64 = 1e-12;

/// `|0>`, the +1 eigenstate of sigma_z.
pub const KET_ZERO: Ket2 = [ONE, ZERO];
/// `|1>`.
pub const KET_ONE: Ket2 = [ZERO, ONE];

/// One protective measurement: strength, observable, pointer axis and initial
/// states. The interaction time `T = 1 / xi` is derived, never stored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementConfig {
    /// Interaction strength relative to the protection Hamiltonian.
    pub xi: f64,
    /// Coupling constant; `pi / 4` maps `cos(gamma) = 1` onto a quarter turn.
    pub lambda: f64,
    /// Polar angle of the measured axis `m`.
    pub gamma: f64,
    /// Azimuth of the measured axis `m`.
    pub eta: f64,
    /// Axis `n` the probe rotates about.
    pub probe_axis: BlochVector,
    pub system_init: Ket2,
    pub probe_init: Ket2,
    /// Axis `k` read out on the probe; `None` resolves to `n x b(probe_init)`.
    pub readout_axis: Option<BlochVector>,
}

impl MeasurementConfig {
    /// Defaults: `lambda = pi/4`, `m = z`, `n = y`, both qubits in `|0>`.
    pub fn new(xi: f64) -> Self {
        Self {
            xi,
            lambda: FRAC_PI_4,
            gamma: 0.0,
            eta: 0.0,
            probe_axis: BlochVector::Y,
            system_init: KET_ZERO,
            probe_init: KET_ZERO,
            readout_axis: None,
        }
    }

    pub fn with_angles(mut self, gamma: f64, eta: f64) -> Self {
        self.gamma = gamma;
        self.eta = eta;
        self
    }

    /// Sets `m` from an arbitrary (normalized on the way in) direction.
    pub fn with_measured_axis(mut self, axis: BlochVector) -> Result<Self> {
        let (gamma, eta) = axis.normalized()?.angles();
        self.gamma = gamma;
        self.eta = eta;
        Ok(self)
    }

    pub fn with_probe_axis(mut self, axis: BlochVector) -> Result<Self> {
        self.probe_axis = axis.normalized()?;
        Ok(self)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    /// Interaction time `T = 1 / (omega_0 xi)`.
    pub fn duration(&self) -> f64 {
        1.0 / self.xi
    }

    pub fn measured_axis(&self) -> BlochVector {
        BlochVector::from_angles(self.gamma, self.eta)
    }

    /// The probe observable whose expectation encodes the pointer shift.
    pub fn readout(&self) -> Result<BlochVector> {
        if let Some(k) = self.readout_axis {
            return k.normalized();
        }
        let start = bloch_vector(&Mat2::projector(&self.probe_init));
        self.probe_axis.cross(&start).normalized().map_err(|_| {
            Error::invalid("probe_init is parallel to the probe axis; set an explicit readout axis")
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi > 0.0 && self.xi.is_finite()) {
            return Err(Error::invalid(alloc::format!(
                "xi = {} must be > 0",
                self.xi
            )));
        }
        if !self.lambda.is_finite() {
            return Err(Error::invalid("lambda must be finite"));
        }
        if !(0.0..=PI).contains(&self.gamma) {
            return Err(Error::invalid(alloc::format!(
                "gamma = {} outside [0, pi]",
                self.gamma
            )));
        }
        if !(0.0..2.0 * PI).contains(&self.eta) {
            return Err(Error::invalid(alloc::format!(
                "eta = {} outside [0, 2 pi)",
                self.eta
            )));
        }
        check_unit("probe_axis", &self.probe_axis)?;
        for (name, ket) in [
            ("system_init", &self.system_init),
            ("probe_init", &self.probe_init),
        ] {
            if (ket_norm(ket) - 1.0).abs() > 1e-10 {
                return Err(Error::invalid(alloc::format!("{name} is not normalized")));
            }
        }
        if self.readout_axis.is_none() {
            let start = bloch_vector(&Mat2::projector(&self.probe_init));
            if start.dot(&self.probe_axis).abs() > 1e-9 {
                return Err(Error::invalid(
                    "probe_init must be perpendicular to the probe axis for the default readout",
                ));
            }
        }
        self.readout().map(|_| ())
    }
}

/// Intrinsic probe dynamics `H_P = (pi delta_P / 4T) sigma . r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeSelfConfig {
    /// Strength of `H_P` relative to the interaction.
    pub delta_p: f64,
    pub axis: BlochVector,
}

impl ProbeSelfConfig {
    pub fn new(delta_p: f64, axis: BlochVector) -> Result<Self> {
        let cfg = Self {
            delta_p,
            axis: axis.normalized()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `omega_P = (pi / 2T) delta_P`.
    pub fn omega_p(&self, duration: f64) -> f64 {
        PI / (2.0 * duration) * self.delta_p
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_p >= 0.0 && self.delta_p.is_finite()) {
            return Err(Error::invalid(alloc::format!(
                "delta_p = {} must be >= 0",
                self.delta_p
            )));
        }
        check_unit("probe_self.axis", &self.axis)
    }
}

/// Pauli couplings of system and probe to their baths. Rates are in units of
/// omega_0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvironmentConfig {
    pub kappa_s: f64,
    pub kappa_p: f64,
    pub system_axis: BlochVector,
    pub probe_axis: BlochVector,
}

impl EnvironmentConfig {
    pub fn new(
        kappa_s: f64,
        kappa_p: f64,
        system_axis: BlochVector,
        probe_axis: BlochVector,
    ) -> Result<Self> {
        let cfg = Self {
            kappa_s,
            kappa_p,
            system_axis: system_axis.normalized()?,
            probe_axis: probe_axis.normalized()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, k) in [("kappa_s", self.kappa_s), ("kappa_p", self.kappa_p)] {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::invalid(alloc::format!("{name} = {k} must be >= 0")));
            }
        }
        check_unit("environment.system_axis", &self.system_axis)?;
        check_unit("environment.probe_axis", &self.probe_axis)
    }
}

fn check_unit(name: &str, v: &BlochVector) -> Result<()> {
    if (v.norm() - 1.0).abs() > UNIT_TOL {
        return Err(Error::invalid(alloc::format!(
            "{name} must be a unit vector (norm {})",
            v.norm()
        )));
    }
    Ok(())
}

/// `sigma . u` for a unit vector `u`.
pub fn pauli_dot(u: &BlochVector) -> Result<Mat2> {
    if (u.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(alloc::format!(
            "sigma . u needs a unit vector, got norm {}",
            u.norm()
        )));
    }
    Ok(u.pauli())
}

/// `H = (1/2) sigma_z (x) I + (lambda / T) (sigma.m) (x) (sigma.n)
///      + (pi delta_P / 4T) I (x) (sigma.r)`.
pub fn build_hamiltonian(cfg: &MeasurementConfig, probe: Option<&ProbeSelfConfig>) -> Result<Mat4> {
    cfg.validate()?;
    let t = cfg.duration();
    let id = Mat2::identity();
    let protection = kron(&SIGMA_Z, &id) * 0.5;
    let coupling = kron(
        &pauli_dot(&cfg.measured_axis())?,
        &pauli_dot(&cfg.probe_axis)?,
    );
    let mut h = protection + coupling * (cfg.lambda / t);
    if let Some(p) = probe {
        p.validate()?;
        h += kron(&id, &pauli_dot(&p.axis)?) * (PI * p.delta_p / (4.0 * t));
    }
    Ok(h)
}

/// A Hermitian jump operator with its rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LindbladTerm {
    pub op: Mat4,
    pub rate: f64,
}

/// `[(sigma.e_S (x) I, kappa_S), (I (x) sigma.e_P, kappa_P)]`.
pub fn build_lindblad_ops(env: &EnvironmentConfig) -> Result<[LindbladTerm; 2]> {
    env.validate()?;
    let id = Mat2::identity();
    Ok([
        LindbladTerm {
            op: kron(&pauli_dot(&env.system_axis)?, &id),
            rate: env.kappa_s,
        },
        LindbladTerm {
            op: kron(&id, &pauli_dot(&env.probe_axis)?),
            rate: env.kappa_p,
        },
    ])
}
