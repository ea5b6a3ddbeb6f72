use alloc::boxed::Box;
use alloc::string::String;

use crate::flow::Aborted;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("triangle {triangle} references invalid vertex {index}")]
    IndexOutOfRange { triangle: usize, index: usize },

    #[error("non-manifold connectivity at vertices ({a}, {b}): {reason}")]
    NonManifold { a: usize, b: usize, reason: &'static str },

    #[error("triangle {triangle} is degenerate")]
    DegenerateTriangle { triangle: usize },

    #[error("tangent plane at vertex {vertex} is not two-dimensional")]
    RankDeficient { vertex: usize },

    #[error("quadratic fit at vertex {vertex} is underdetermined")]
    FitUnderdetermined { vertex: usize },

    #[error("normal transport across edge ({a}, {b}) is ill-conditioned (singular value {singular_value:.3e})")]
    TransportIllConditioned { a: usize, b: usize, singular_value: f64 },

    #[error("tensor argument is not symmetric")]
    NonSymmetricInput,

    #[error("derivative order {0} is not supported")]
    UnsupportedOrder(u32),

    #[error("cutoff weight vanishes on the whole mesh; {remaining} time units remain")]
    EmptyActiveSet { remaining: f64 },

    #[error("linear solve stalled at relative residual {residual:.3e}")]
    SolveFailed { residual: f64 },

    #[error("triangle quality {quality:.3e} fell below the abort threshold")]
    MeshDegenerated { quality: f64 },

    #[error("normal graph is no longer immersed at vertex {vertex} (det ratio {det_ratio:.3e})")]
    ImmersionLost { vertex: usize, det_ratio: f64 },

    #[error("gauge splitting at vertex {vertex} is degenerate (condition number {condition:.3e})")]
    GaugeDegenerate { vertex: usize, condition: f64 },

    #[error("energy concentration {value:.6e} exceeds the admissible bound {bound:.6e}")]
    ConcentrationTooLarge { value: f64, bound: f64 },

    #[error("need at least {required} samples, got {found}")]
    InsufficientData { required: usize, found: usize },

    #[error("field vanishes identically")]
    ZeroField,

    #[error("exponent {0} outside the admissible range")]
    BadExponent(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("flow aborted: {}", .0.reason)]
    Aborted(Box<Aborted>),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }
}
