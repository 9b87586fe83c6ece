use alloc::string::String;

/// Failures raised by the core pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    Lattice(String),
    #[error("invalid model parameters: {0}")]
    Model(String),
    #[error("basis dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("sector with {0} particles is not part of the basis")]
    MissingSector(usize),
    #[error("operator does not conserve particle number (residual {0:e})")]
    NotNumberConserving(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("no admissible spectral gap: {0}")]
    Gap(String),
    #[error("eigensolver did not converge: {0}")]
    Convergence(String),
    #[error("gap closes along the flux path near phi = {0}")]
    GapClosure(f64),
    #[error("integrator step floor reached at phi = {phi} (error estimate {err:e})")]
    StepFloor { phi: f64, err: f64 },
    #[error("sectors cannot be resolved: {0}")]
    Sectors(String),
    #[error("winding grid could not be refined below a phase jump of pi: {0}")]
    Winding(String),
    #[error("invalid filter: {0}")]
    Filter(String),
}

pub type Result<T> = core::result::Result<T, Error>;
