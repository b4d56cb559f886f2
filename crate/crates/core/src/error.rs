use alloc::string::String;
use core::fmt;

/// Failure modes shared by every module of the core crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    InvalidArgument(String),
    /// A matrix that must be Hermitian was not, within tolerance.
    NotHermitian { deviation: f64 },
    /// The master-equation integrator left the set of valid density matrices.
    IntegrationFailure {
        time: f64,
        trace_error: f64,
        hermiticity_error: f64,
        min_eigenvalue: f64,
    },
    /// Ion-trap parameters fall outside the experimentally accessible box.
    Infeasible(Infeasibility),
}

/// The specific feasibility bound that an ion-trap parameter set violates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Infeasibility {
    /// J0 must be strictly positive.
    NonPositiveCoupling { j0: f64 },
    /// Delta1 = 0 leaves the measurement strength undefined.
    ZeroProtection,
    /// A Stark shift is negative.
    NegativeShift { ion: u8, delta: f64 },
    /// A Stark shift exceeds `multiple * J0`.
    ShiftAboveRange { ion: u8, delta: f64, max: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NotHermitian { deviation } => {
                write!(
                    f,
                    "matrix is not Hermitian (max |A - A^dagger| = {deviation:e})"
                )
            }
            Error::IntegrationFailure {
                time,
                trace_error,
                hermiticity_error,
                min_eigenvalue,
            } => write!(
                f,
                "integration failed at t = {time}: trace error {trace_error:e}, \
                 hermiticity error {hermiticity_error:e}, min eigenvalue {min_eigenvalue:e} \
                 (reduce the step size)"
            ),
            Error::Infeasible(why) => write!(f, "infeasible ion-trap parameters: {why}"),
        }
    }
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Infeasibility::NonPositiveCoupling { j0 } => {
                write!(f, "coupling J0 = {j0} must be > 0")
            }
            Infeasibility::ZeroProtection => {
                write!(f, "Delta1 = 0 leaves the measurement strength undefined")
            }
            Infeasibility::NegativeShift { ion, delta } => {
                write!(
                    f,
                    "Delta{ion} = {delta} violates the lower bound Delta{ion} >= 0"
                )
            }
            Infeasibility::ShiftAboveRange { ion, delta, max } => write!(
                f,
                "Delta{ion} = {delta} violates the upper bound Delta{ion} <= {max}"
            ),
        }
    }
}

impl core::error::Error for Error {}
