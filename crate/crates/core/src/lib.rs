//! Desk-scale simulator of verifiable quantum secret sharing and secure
//! multiparty quantum computation over prime-dimensional qudits, tolerating
//! any dishonest minority of t < n/2 players.
//!
//! The crate is layered bottom-up:
//!
//! * [`field`]: arithmetic mod p, polynomials, evaluation codes, decoding.
//! * [`params`]: shared protocol parameters and their validity rules.
//! * [`engine`]: qudit handles, Pauli words, the common gate interface.
//! * [`stab`]: sparse stabilizer-tableau backend (Clifford + measurement).
//! * [`sparse`]: exact sparse state-vector backend (non-Clifford, oracles).
//! * [`oracle`]: tiny dense linear-algebra oracles for tests.
//! * [`stats`]: chi-square and Wilson-interval helpers for verdicts.

pub mod auth;
pub mod engine;
pub mod field;
pub mod net;
pub mod oracle;
pub mod params;
pub mod script;
pub mod sparse;
pub mod stab;
pub mod stats;
pub mod ttp;
pub mod views;
pub mod vqss;
pub mod wqss;
pub mod zero;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated a precondition (bad sizes, zero scalars, ...).
    #[error("parameter error: {0}")]
    Param(String),
    /// A decode failed: no consistent polynomial/codeword exists. For the
    /// protocols this is a detection signal, not a bug.
    #[error("decode failure: {0}")]
    Decode(String),
    /// A protocol step received something structurally impossible for an
    /// honest execution (wrong message kind, missing share, ...).
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn param(msg: impl Into<String>) -> Error {
        Error::Param(msg.into())
    }
    pub fn decode(msg: impl Into<String>) -> Error {
        Error::Decode(msg.into())
    }
    pub fn protocol(msg: impl Into<String>) -> Error {
        Error::Protocol(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Error {
        Error::Config(msg.into())
    }
}
