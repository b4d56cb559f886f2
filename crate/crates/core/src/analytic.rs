//! Closed-form results for the protective measurement Hamiltonian.
//!
//! Projecting the probe onto the eigenstates `|+->_n` of `sigma . n` splits the
//! dynamics into two single-qubit problems `H_+- = (1/2) sigma . w_+-` with
//! `w_+- = z +- 2 lambda xi m`.

use core::f64::consts::FRAC_PI_2;

#[allow(unused_imports)] // inherent f64 math is unavailable without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{
    fidelity, inner, ket_from_bloch, BlochVector, Ket2, Ket4, Mat4, Matrix, C64, ZERO,
};
use crate::model::{MeasurementConfig, KET_ZERO};

/// Effective fields `w_+-` seen by the system for probe eigenvalue `+-1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveField {
    pub w_plus: BlochVector,
    pub w_minus: BlochVector,
    pub chi_plus: f64,
    pub chi_minus: f64,
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
}

pub fn effective_field(xi: f64, lambda: f64, gamma: f64, eta: f64) -> EffectiveField {
    let g = 2.0 * lambda * xi;
    let field = |sign: f64| {
        BlochVector::new(
            sign * g * eta.cos() * gamma.sin(),
            sign * g * eta.sin() * gamma.sin(),
            1.0 + sign * g * gamma.cos(),
        )
    };
    let chi = |sign: f64| (1.0 + g * g + sign * 2.0 * g * gamma.cos()).max(0.0).sqrt();
    let (w_plus, w_minus) = (field(1.0), field(-1.0));
    // atan2 keeps the polar angle accurate near the poles
    let (theta_plus, phi_plus) = w_plus.angles();
    let (theta_minus, phi_minus) = w_minus.angles();
    EffectiveField {
        w_plus,
        w_minus,
        chi_plus: chi(1.0),
        chi_minus: chi(-1.0),
        theta_plus,
        theta_minus,
        phi_plus,
        phi_minus,
    }
}

/// Eigenstates `|+>_n`, `|->_n` of `sigma . n`.
pub fn probe_eigenbasis(n: &BlochVector) -> Result<(Ket2, Ket2)> {
    Ok((ket_from_bloch(n)?, ket_from_bloch(&n.scaled(-1.0))?))
}

/// Amplitudes `(c_+, c_-)` of the configured probe state in the `sigma . n` basis.
pub fn probe_amplitudes(cfg: &MeasurementConfig) -> Result<(C64, C64)> {
    let (plus, minus) = probe_eigenbasis(&cfg.probe_axis)?;
    Ok((
        inner(&plus, &cfg.probe_init),
        inner(&minus, &cfg.probe_init),
    ))
}

/// Joint state at `t = T` for a system starting in `|0>` and a probe state
/// `c_+ |+>_n + c_- |->_n`.
pub fn exact_final_state(cfg: &MeasurementConfig, c_plus: C64, c_minus: C64) -> Result<Ket4> {
    cfg.validate()?;
    let weight = c_plus.norm_sqr() + c_minus.norm_sqr();
    if (weight - 1.0).abs() > 1e-10 {
        return Err(Error::invalid(alloc::format!(
            "probe amplitudes have |c+|^2 + |c-|^2 = {weight}"
        )));
    }
    if (fidelity(&cfg.system_init, &KET_ZERO) - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(
            "the closed form assumes the system starts in |0>",
        ));
    }
    let ef = effective_field(cfg.xi, cfg.lambda, cfg.gamma, cfg.eta);
    let (plus, minus) = probe_eigenbasis(&cfg.probe_axis)?;
    let t = cfg.duration();

    let branch = |chi: f64, theta: f64, phi: f64| -> Ket2 {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let e = C64::from_polar(1.0, phi);
        let phi0 = [C64::new(c, 0.0), e * s];
        let phi1 = [C64::new(s, 0.0), -e * c];
        let (early, late) = (
            C64::from_polar(c, -chi * t / 2.0),
            C64::from_polar(s, chi * t / 2.0),
        );
        [
            early * phi0[0] + late * phi1[0],
            early * phi0[1] + late * phi1[1],
        ]
    };
    let sys_plus = branch(ef.chi_plus, ef.theta_plus, ef.phi_plus);
    let sys_minus = branch(ef.chi_minus, ef.theta_minus, ef.phi_minus);

    let mut out = [ZERO; 4];
    for s in 0..2 {
        for p in 0..2 {
            out[2 * s + p] = c_plus * sys_plus[s] * plus[p] + c_minus * sys_minus[s] * minus[p];
        }
    }
    Ok(out)
}

/// [`exact_final_state`] with the amplitudes taken from `cfg.probe_init`.
pub fn exact_final_state_for(cfg: &MeasurementConfig) -> Result<Ket4> {
    let (c_plus, c_minus) = probe_amplitudes(cfg)?;
    exact_final_state(cfg, c_plus, c_minus)
}

/// Probe rotation about `n` in the weak limit: `2 lambda cos(gamma)`.
pub fn ideal_rotation_angle(gamma: f64, lambda: f64) -> f64 {
    2.0 * lambda * gamma.cos()
}

/// Ideal pointer value `sin((pi/2) cos(gamma))` for `lambda = pi/4`.
pub fn ideal_pointer_value(gamma: f64) -> f64 {
    (FRAC_PI_2 * gamma.cos()).sin()
}

/// Ideal pointer value for an arbitrary configuration: the probe turns by
/// `2 lambda <psi_S| sigma.m |psi_S>` and `sigma . k` picks up its sine.
pub fn ideal_pointer_for(cfg: &MeasurementConfig) -> f64 {
    let m = cfg.measured_axis().pauli();
    (2.0 * cfg.lambda * m.expectation(&cfg.system_init)).sin()
}

/// Two-qubit gate equivalent to an ideal protective measurement of `sigma . m`
/// with the probe rotating about y: `|0>` controls `R_y(2 Theta_m)`, `|1>`
/// controls `R_y(-2 Theta_m)`, with `Theta_m = (pi/4) cos(gamma)`.
pub fn controlled_rotation_gate(gamma: f64) -> Mat4 {
    let theta_m = core::f64::consts::FRAC_PI_4 * gamma.cos();
    let (c, s) = (C64::new(theta_m.cos(), 0.0), C64::new(theta_m.sin(), 0.0));
    Matrix([
        [c, -s, ZERO, ZERO],
        [s, c, ZERO, ZERO],
        [ZERO, ZERO, c, s],
        [ZERO, ZERO, -s, c],
    ])
}
