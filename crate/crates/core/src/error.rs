use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input outside the admissible set (bad dimension, point outside Ω, NaN).
    Domain(&'static str),
    /// A numerical tolerance could not be met; carries the achieved estimate.
    Accuracy { what: &'static str, estimate: f64 },
    /// An iterative method failed to converge.
    NoConvergence(&'static str),
    /// The maximizer sits on the search-box boundary.
    BoundaryHit { what: &'static str, margin: f64 },
    /// Step size collapsed in the ODE integrator.
    Stiff { r: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Accuracy { what, estimate } => {
                write!(f, "accuracy error in {what}: estimate {estimate:e}")
            }
            Error::NoConvergence(m) => write!(f, "no convergence: {m}"),
            Error::BoundaryHit { what, margin } => {
                write!(f, "boundary hit in {what} (relative margin {margin:e})")
            }
            Error::Stiff { r } => write!(f, "step size underflow at r = {r:e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
