//! Error type shared by every module in the crate.

use crate::qstate::ValidationReport;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("state vector length {len} is not a power of two (need 2^n with n >= 1)")]
    NotPowerOfTwo { len: usize },

    #[error("qubit count {n} outside supported range 1..={max}")]
    QubitCountOutOfRange { n: usize, max: usize },

    #[error("qubit count {n} below minimum {min} for this operation")]
    QubitCountTooSmall { n: usize, min: usize },

    #[error("state vector has zero norm and cannot be normalized")]
    ZeroNorm,

    #[error("noise weight {v} outside [0, 1]")]
    NoiseWeightOutOfRange { v: f64 },

    #[error("Bloch vector {index} has length {len:.6} > 1")]
    BlochVectorTooLong { index: usize, len: f64 },

    #[error("density matrix failed validation: {report}")]
    InvalidState { report: ValidationReport },

    #[error("expected {expected} entries, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("operands disagree on qubit count: {a} vs {b}")]
    QubitCountMismatch { a: usize, b: usize },

    #[error("tensor entry {index} = {value:.6} lies outside [-1, 1]")]
    EntryOutOfRange { index: usize, value: f64 },

    #[error("frame for observer {observer} is not orthonormal (max deviation {deviation:.3e})")]
    FrameNotOrthonormal { observer: usize, deviation: f64 },

    #[error("direction {setting} for observer {observer} is not unit length (norm {norm:.12})")]
    DirectionNotUnit {
        observer: usize,
        setting: usize,
        norm: f64,
    },

    #[error("c-vector for observer {observer} is not unit length (norm {norm:.12})")]
    CVectorNotUnit { observer: usize, norm: f64 },

    #[error(
        "no local hidden variable model: general inequality value {value:.12} exceeds bound {bound}"
    )]
    NoLocalModel { value: f64, bound: f64 },

    #[error("operation limited to {max} qubits, got {n}")]
    TooManyQubits { n: usize, max: usize },

    #[error("optimizer objective returned a non-finite value")]
    NonFiniteObjective,

    #[error("unknown violation test id `{id}`")]
    UnknownTest { id: String },

    #[error("violation test `{id}` does not support {n} qubits")]
    UnsupportedQubitCount { id: String, n: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
