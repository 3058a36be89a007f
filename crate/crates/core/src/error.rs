use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("zero frequency: the thermal spectrum diverges at omega = 0")]
    ZeroFrequency,

    #[error("negative temperature {0} K")]
    NegativeTemperature(f64),

    #[error("noise occupation {0} is below the vacuum floor 1/2")]
    BelowVacuum(f64),

    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(&'static str),

    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    #[error("terminal of `{element}` on node {node} is not wired to anything else")]
    UnwiredTerminal { element: String, node: usize },

    #[error("singular network equations at omega = {omega} rad/s (rank deficiency {deficiency})")]
    Singular { omega: f64, deficiency: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown channel `{0}`")]
    UnknownChannel(String),

    #[error("no transduction: the readout does not depend on the signal channel")]
    NoTransduction,

    #[error("no feedback, no readout: feedback impedance is zero")]
    NoFeedback,

    #[error("feedback impedance must be reactive, found real part {0} ohm")]
    DissipativeFeedback(f64),

    #[error("no temperature given for noise source `{0}`")]
    MissingTemperature(String),

    #[error("stage chain is empty")]
    EmptyChain,

    #[error("stage {stage}: input impedance {found} ohm does not match upstream readout impedance {expected} ohm")]
    ImpedanceMismatch { stage: usize, expected: f64, found: f64 },

    #[error("estimators are defined on different source sets")]
    MismatchedSources,

    #[error("missing transduction gain for the detection stage")]
    MissingTransductionGain,

    #[error("could not complete the scattering matrix with the requested signature")]
    Completion,
}
