use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite coordinate in point ({0}, {1}, {2})")]
    NonFinitePoint(f64, f64, f64),
    #[error("point ({0}, {1}, {2}) lies in the singular set")]
    SingularPoint(f64, f64, f64),
    #[error("finite-difference stencil touches the singular set")]
    StencilHitsSingularity,
    #[error("step {h} is below the resolvable threshold {min}")]
    StepTooSmall { h: f64, min: f64 },
    #[error("derivative order {0} exceeds 2")]
    OrderTooHigh(usize),
    #[error("polynomial degree {0} exceeds 2")]
    DegreeOverflow(usize),
    #[error("parameter out of domain: {0}")]
    ParameterOutOfDomain(String),
    #[error("denominator vanishes: {0}")]
    DenominatorVanishes(String),
    #[error("heat polynomial degree {0} exceeds 12")]
    DegreeTooLarge(usize),
    #[error("argument {0} is within 1e-6 of a pole")]
    NearPole(f64),
    #[error("integration range contains a pole near {0}")]
    PoleInRange(f64),
    #[error("integration path reaches the singular point: {0}")]
    SingularPath(String),
    #[error("parameter pole: {0}")]
    ParameterPole(String),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("jacobian singular (|J| = {0:e})")]
    JacobianSingular(f64),
    #[error("zero denominator: {0}")]
    ZeroDenominator(String),
    #[error("invalid case: {0}")]
    InvalidCase(String),
    #[error("case boundary: {0}")]
    CaseBoundary(String),
    #[error("singular time t = {0}")]
    SingularTime(f64),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("not a common viscid/inviscid solution: {0}")]
    NotACommonSolution(String),
    #[error("unstable step: max |u| grew to {0:e}")]
    UnstableStep(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for failures caused by numerics rather than by bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence(_)
                | Error::JacobianSingular(_)
                | Error::QuadratureFailure(_)
                | Error::UnstableStep(_)
                | Error::PoleInRange(_)
                | Error::NearPole(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
