//! Trapped-ion parameters and their translation into dimensionless configs.
//!
//! The lab Hamiltonian is `Delta1 sigma_phi (x) I + J0 sigma_theta (x) sigma_theta
//! + Delta2 I (x) sigma_z` with `sigma_phi = sigma_x cos(phi) - sigma_y sin(phi)` and
//! `sigma_theta = sigma_x sin(theta) + sigma_y cos(theta)`. The translation works
//! in a frame where the protection axis is `z`.

#[allow(unused_imports)] // inherent f64 math is unavailable without std
use num_traits::Float;

use core::f64::consts::PI;

use crate::error::{Error, Infeasibility, Result};
use crate::linalg::{ket_from_bloch, BlochVector};
use crate::model::{MeasurementConfig, ProbeSelfConfig};

pub const DEFAULT_DELTA_RANGE_MULTIPLE: f64 = 6.0;

/// Physical parameters in s^-1 and radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IonTrapParams {
    pub j0: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub theta: f64,
    pub phi: f64,
    /// Largest accessible `Delta / J0`.
    pub delta_range_multiple: f64,
}

impl IonTrapParams {
    pub fn new(j0: f64, delta1: f64) -> Self {
        Self {
            j0,
            delta1,
            delta2: 0.0,
            theta: PI / 2.0,
            phi: 0.0,
            delta_range_multiple: DEFAULT_DELTA_RANGE_MULTIPLE,
        }
    }

    pub fn check_feasibility(&self) -> Result<()> {
        let fail = |i| Err(Error::Infeasible(i));
        if !(self.j0 > 0.0 && self.j0.is_finite()) {
            return fail(Infeasibility::NonPositiveCoupling { j0: self.j0 });
        }
        if self.delta_range_multiple.is_nan() || self.delta_range_multiple < 0.0 {
            return Err(Error::invalid("delta_range_multiple must be >= 0"));
        }
        if !(self.theta.is_finite() && self.phi.is_finite()) {
            return Err(Error::invalid("theta and phi must be finite"));
        }
        let max = self.delta_range_multiple * self.j0;
        for (ion, delta) in [(1, self.delta1), (2, self.delta2)] {
            if delta.is_nan() || delta < 0.0 {
                return fail(Infeasibility::NegativeShift { ion, delta });
            }
            if delta > max {
                return fail(Infeasibility::ShiftAboveRange { ion, delta, max });
            }
        }
        if self.delta1 == 0.0 {
            return fail(Infeasibility::ZeroProtection);
        }
        Ok(())
    }

    /// Smallest measurement strength reachable with this coupling and range.
    pub fn xi_min(&self) -> f64 {
        1.0 / self.delta_range_multiple
    }
}

/// Interaction time `T = pi / (4 J0)` in seconds.
pub fn interaction_time(p: &IonTrapParams) -> f64 {
    PI / (4.0 * p.j0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct IonTrapMapping {
    pub config: MeasurementConfig,
    /// Present when `delta2 > 0`.
    pub probe_self: Option<ProbeSelfConfig>,
    /// Physical duration of the interaction, seconds.
    pub interaction_time: f64,
}

/// Lab vector in the frame `(z x p, z, p)`, `p` the protection axis.
fn to_protection_frame(v: &BlochVector, phi: f64) -> BlochVector {
    let p = BlochVector::new(phi.cos(), -phi.sin(), 0.0);
    let x = BlochVector::Z.cross(&p);
    BlochVector::new(v.dot(&x), v.dot(&BlochVector::Z), v.dot(&p))
}

pub fn to_measurement_config(p: &IonTrapParams) -> Result<IonTrapMapping> {
    p.check_feasibility()?;
    let coupling_axis = BlochVector::new(p.theta.sin(), p.theta.cos(), 0.0);
    let axis = to_protection_frame(&coupling_axis, p.phi).normalized()?;
    // the lab z axis lies in the protection plane, so it is perpendicular to n
    let lab_z = to_protection_frame(&BlochVector::Z, p.phi);
    let config = MeasurementConfig {
        probe_init: ket_from_bloch(&lab_z)?,
        ..MeasurementConfig::new(p.j0 / p.delta1)
    }
    .with_measured_axis(axis)?
    .with_probe_axis(axis)?;
    config.validate()?;
    let probe_self = if p.delta2 > 0.0 {
        Some(ProbeSelfConfig::new(p.delta2 / p.j0, lab_z)?)
    } else {
        None
    };
    Ok(IonTrapMapping {
        config,
        probe_self,
        interaction_time: interaction_time(p),
    })
}
